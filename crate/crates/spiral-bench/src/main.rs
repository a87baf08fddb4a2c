use std::fs::File;
use std::io::{BufReader, BufWriter};
use std::path::PathBuf;
use std::time::Duration;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};
use spiral::io;
use spiral_bench::{build_instance, run_method, ExperimentConfig, Method};

#[derive(Parser)]
#[command(
    name = "spiral-bench",
    about = "Poisson reconstruction benchmark: sparse measurement simulation and timed solver sweeps"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Sweep (method, tau, seed) under a time budget and summarize
    Bench(BenchArgs),
    /// Reconstruct a single signal from files on disk
    Solve(SolveArgs),
    /// Generate a matrix, a true signal, and counts, and write them out
    Gen(GenArgs),
}

#[derive(Args)]
struct BenchArgs {
    /// Signal length
    #[arg(long, default_value_t = 1024)]
    m: usize,
    /// Number of measurements
    #[arg(long, default_value_t = 512)]
    n_rows: usize,
    /// Nonzeros per matrix row
    #[arg(long, default_value_t = 32)]
    row_nnz: usize,
    /// Target mean of A f
    #[arg(long, default_value_t = 50.0)]
    mean_count: f64,
    /// Per-run wall-clock budget in seconds
    #[arg(long, default_value_t = 3.0, allow_negative_numbers = true)]
    budget_secs: f64,
    /// Outer-iteration cap per run
    #[arg(long, default_value_t = 1_000_000)]
    max_iters: usize,
    /// Instance seed; repeat for several (default 1..=10)
    #[arg(long = "seed")]
    seeds: Vec<u64>,
    /// Method to run; repeat for several (default all five)
    #[arg(long = "method")]
    methods: Vec<String>,
    /// Override the tau grid for every method; repeat for several values
    #[arg(long = "tau", allow_negative_numbers = true)]
    taus: Vec<f64>,
    /// Directory for trace CSVs, runs.csv, summary.csv and plot.svg
    #[arg(long, default_value = "bench-out")]
    out_dir: PathBuf,
    /// Shrink to 3 seeds and 4 tau values per method
    #[arg(long)]
    quick: bool,
}

#[derive(Args)]
struct SolveArgs {
    /// Sensing matrix file
    #[arg(long)]
    matrix: PathBuf,
    /// Observed counts file
    #[arg(long)]
    counts: PathBuf,
    /// Optional true signal; adds the error column to the trace
    #[arg(long)]
    truth: Option<PathBuf>,
    /// One of: spiral_ti, spiral_tv, em_ti, em_tv, spiral_l1
    #[arg(long)]
    method: String,
    #[arg(long, allow_negative_numbers = true)]
    tau: f64,
    /// Wall-clock budget in seconds; unlimited when absent
    #[arg(long, allow_negative_numbers = true)]
    budget_secs: Option<f64>,
    #[arg(long, default_value_t = 1_000_000)]
    max_iters: usize,
    /// Directory for trace.csv and estimate.txt
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
}

#[derive(Args)]
struct GenArgs {
    #[arg(long, default_value_t = 1024)]
    m: usize,
    #[arg(long, default_value_t = 512)]
    n_rows: usize,
    #[arg(long, default_value_t = 32)]
    row_nnz: usize,
    #[arg(long, default_value_t = 50.0)]
    mean_count: f64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Directory for matrix.txt, truth.txt and counts.txt
    #[arg(long, default_value = "instance")]
    out_dir: PathBuf,
}

fn budget_from_secs(secs: f64) -> anyhow::Result<Duration> {
    if !secs.is_finite() || secs <= 0.0 {
        bail!("--budget-secs must be a positive number, got {secs}");
    }
    Ok(Duration::from_secs_f64(secs))
}

fn cmd_bench(args: BenchArgs) -> anyhow::Result<()> {
    let mut cfg = ExperimentConfig::new(&args.out_dir);
    cfg.m = args.m;
    cfg.n_rows = args.n_rows;
    cfg.row_nnz = args.row_nnz;
    cfg.mean_count = args.mean_count;
    cfg.budget = budget_from_secs(args.budget_secs)?;
    cfg.max_iters = args.max_iters;
    if !args.seeds.is_empty() {
        cfg.seeds = args.seeds;
    }
    if !args.methods.is_empty() {
        let methods: Vec<Method> = args
            .methods
            .iter()
            .map(|s| Method::parse(s))
            .collect::<Result<_, _>>()?;
        cfg.tau_grids = methods
            .iter()
            .map(|&m| spiral_bench::default_tau_grid(m))
            .collect();
        cfg.methods = methods;
    }
    if !args.taus.is_empty() {
        cfg.tau_grids = vec![args.taus; cfg.methods.len()];
    }
    if args.quick {
        cfg = cfg.quick();
    }

    let report = spiral_bench::run_benchmark(&cfg)?;
    println!("method        best_tau    median_rms");
    for s in &report.summary {
        println!("{:<12}  {:<10.6}  {:.6}", s.method.name(), s.best_tau, s.median_rms);
    }
    println!("outputs in {}", cfg.out_dir.display());
    Ok(())
}

fn cmd_solve(args: SolveArgs) -> anyhow::Result<()> {
    let method = Method::parse(&args.method)?;
    let matrix = io::read_matrix(BufReader::new(
        File::open(&args.matrix).with_context(|| format!("opening {}", args.matrix.display()))?,
    ))?;
    let counts = io::read_counts(BufReader::new(
        File::open(&args.counts).with_context(|| format!("opening {}", args.counts.display()))?,
    ))?;
    let truth = args
        .truth
        .as_ref()
        .map(|p| {
            io::read_signal(BufReader::new(
                File::open(p).with_context(|| format!("opening {}", p.display()))?,
            ))
            .map_err(anyhow::Error::from)
        })
        .transpose()?;
    let budget = args.budget_secs.map(budget_from_secs).transpose()?;

    let trace = run_method(
        &matrix,
        &counts,
        truth.as_ref(),
        method,
        args.tau,
        budget,
        args.max_iters,
    )?;

    std::fs::create_dir_all(&args.out_dir)?;
    let trace_path = args.out_dir.join("trace.csv");
    io::write_trace_rows(BufWriter::new(File::create(&trace_path)?), &trace.rows)?;
    let est_path = args.out_dir.join("estimate.txt");
    io::write_signal(BufWriter::new(File::create(&est_path)?), &trace.estimate)?;

    let last = trace.rows.last().expect("trace records its start");
    print!(
        "{}: objective {:.6} after {} iterations in {:.3} s",
        method.name(),
        last.objective,
        last.iter,
        last.seconds
    );
    match last.rms {
        Some(r) => println!(", relative error {r:.6}"),
        None => println!(),
    }
    println!("wrote {} and {}", trace_path.display(), est_path.display());
    Ok(())
}

fn cmd_gen(args: GenArgs) -> anyhow::Result<()> {
    let inst = build_instance(args.n_rows, args.m, args.row_nnz, args.mean_count, args.seed)?;
    std::fs::create_dir_all(&args.out_dir)?;
    let matrix_path = args.out_dir.join("matrix.txt");
    io::write_matrix(BufWriter::new(File::create(&matrix_path)?), &inst.matrix)?;
    let truth_path = args.out_dir.join("truth.txt");
    io::write_signal(BufWriter::new(File::create(&truth_path)?), &inst.truth)?;
    let counts_path = args.out_dir.join("counts.txt");
    io::write_counts(BufWriter::new(File::create(&counts_path)?), &inst.counts)?;
    println!(
        "wrote {}, {}, {}",
        matrix_path.display(),
        truth_path.display(),
        counts_path.display()
    );
    Ok(())
}

fn main() {
    let cli = Cli::parse();
    let result = match cli.cmd {
        Cmd::Bench(args) => cmd_bench(args),
        Cmd::Solve(args) => cmd_solve(args),
        Cmd::Gen(args) => cmd_gen(args),
    };
    if let Err(e) = result {
        eprintln!("error: {e:#}");
        std::process::exit(1);
    }
}
