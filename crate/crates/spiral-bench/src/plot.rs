//! Error-vs-time curves as a self-contained SVG: plain text, one labeled
//! polyline per trace file.

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use spiral::{io, Error, Result};

const LEFT: f64 = 72.0;
const TOP: f64 = 24.0;
const RIGHT: f64 = 860.0;
const BOTTOM: f64 = 500.0;
const WIDTH: f64 = 900.0;
const HEIGHT: f64 = 560.0;
const PALETTE: [&str; 6] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b",
];

/// Data range extended by 5% of its width on both sides; a degenerate
/// range gets a small symmetric pad instead.
fn padded_range(lo: f64, hi: f64) -> (f64, f64) {
    let span = hi - lo;
    if span > 0.0 {
        (lo - 0.05 * span, hi + 0.05 * span)
    } else {
        let half = (0.05 * hi.abs()).max(1e-3);
        (lo - half, hi + half)
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Read `(label, trace csv)` pairs and write an SVG with one
/// error-vs-seconds polyline per trace. Trace rows must carry the error
/// column; a row without one is reported with its line number.
pub fn emit_plot(curves: &[(String, PathBuf)], out: &Path) -> Result<()> {
    if curves.is_empty() {
        return Err(Error::Empty("curve list"));
    }
    let mut loaded: Vec<(String, Vec<(f64, f64)>)> = Vec::with_capacity(curves.len());
    for (label, path) in curves {
        let rows = io::read_trace_rows(BufReader::new(File::open(path)?))?;
        if rows.is_empty() {
            return Err(Error::Empty("trace file"));
        }
        let mut points = Vec::with_capacity(rows.len());
        for (i, row) in rows.iter().enumerate() {
            let rms = row.rms.ok_or_else(|| Error::Parse {
                line: i + 2,
                message: format!("trace row has no rms value in {}", path.display()),
            })?;
            points.push((row.seconds, rms));
        }
        loaded.push((label.clone(), points));
    }

    let all = loaded.iter().flat_map(|(_, pts)| pts.iter());
    let (mut xlo, mut xhi, mut ylo, mut yhi) =
        (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for &(x, y) in all {
        xlo = xlo.min(x);
        xhi = xhi.max(x);
        ylo = ylo.min(y);
        yhi = yhi.max(y);
    }
    let (xlo, xhi) = padded_range(xlo, xhi);
    let (ylo, yhi) = padded_range(ylo, yhi);
    let sx = |x: f64| LEFT + (x - xlo) / (xhi - xlo) * (RIGHT - LEFT);
    let sy = |y: f64| BOTTOM - (y - ylo) / (yhi - ylo) * (BOTTOM - TOP);

    let mut w = BufWriter::new(File::create(out)?);
    writeln!(
        w,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" \
         viewBox=\"0 0 {WIDTH} {HEIGHT}\">"
    )?;
    writeln!(w, "<rect width=\"{WIDTH}\" height=\"{HEIGHT}\" fill=\"white\"/>")?;
    writeln!(
        w,
        "<rect x=\"{LEFT}\" y=\"{TOP}\" width=\"{}\" height=\"{}\" fill=\"none\" \
         stroke=\"#333333\"/>",
        RIGHT - LEFT,
        BOTTOM - TOP
    )?;
    for (x, anchor) in [(xlo, "start"), (xhi, "end")] {
        writeln!(
            w,
            "<text x=\"{:.2}\" y=\"{:.2}\" font-size=\"12\" text-anchor=\"{anchor}\">{x:.3}</text>",
            sx(x),
            BOTTOM + 18.0
        )?;
    }
    for y in [ylo, yhi] {
        writeln!(
            w,
            "<text x=\"{:.2}\" y=\"{:.2}\" font-size=\"12\" text-anchor=\"end\">{y:.4}</text>",
            LEFT - 6.0,
            sy(y) + 4.0
        )?;
    }
    writeln!(
        w,
        "<text x=\"{:.2}\" y=\"{:.2}\" font-size=\"13\" text-anchor=\"middle\">seconds</text>",
        0.5 * (LEFT + RIGHT),
        HEIGHT - 10.0
    )?;
    writeln!(
        w,
        "<text x=\"16\" y=\"{:.2}\" font-size=\"13\" text-anchor=\"middle\" \
         transform=\"rotate(-90 16 {:.2})\">relative error</text>",
        0.5 * (TOP + BOTTOM),
        0.5 * (TOP + BOTTOM)
    )?;

    for (k, (label, points)) in loaded.iter().enumerate() {
        let color = PALETTE[k % PALETTE.len()];
        let coords: Vec<String> = points
            .iter()
            .map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y)))
            .collect();
        writeln!(
            w,
            "<polyline fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\" points=\"{}\"/>",
            coords.join(" ")
        )?;
        let ly = TOP + 16.0 + 18.0 * k as f64;
        writeln!(
            w,
            "<line x1=\"{:.2}\" y1=\"{ly:.2}\" x2=\"{:.2}\" y2=\"{ly:.2}\" stroke=\"{color}\" \
             stroke-width=\"2\"/>",
            RIGHT - 150.0,
            RIGHT - 120.0
        )?;
        writeln!(
            w,
            "<text x=\"{:.2}\" y=\"{:.2}\" font-size=\"12\">{}</text>",
            RIGHT - 112.0,
            ly + 4.0,
            escape(label)
        )?;
    }
    writeln!(w, "</svg>")?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use spiral::TraceRow;

    fn temp_dir(tag: &str) -> PathBuf {
        let dir = std::env::temp_dir().join(format!(
            "spiral-plot-{tag}-{}",
            std::time::SystemTime::now()
                .duration_since(std::time::UNIX_EPOCH)
                .unwrap()
                .as_nanos()
        ));
        std::fs::create_dir_all(&dir).unwrap();
        dir
    }

    fn write_trace(path: &Path, rows: &[TraceRow]) {
        let f = File::create(path).unwrap();
        io::write_trace_rows(BufWriter::new(f), rows).unwrap();
    }

    fn row(iter: usize, rms: f64, seconds: f64) -> TraceRow {
        TraceRow {
            iter,
            objective: 1.0,
            alpha: 1.0,
            rms: Some(rms),
            seconds,
        }
    }

    #[test]
    fn padding_extends_five_percent_each_side() {
        let (lo, hi) = padded_range(0.0, 10.0);
        assert!((lo + 0.5).abs() <= 1e-12 && (hi - 10.5).abs() <= 1e-12);
        let (lo, hi) = padded_range(2.0, 2.0);
        assert!(lo < 2.0 && hi > 2.0);
    }

    #[test]
    fn flat_trace_yields_one_horizontal_polyline() {
        let dir = temp_dir("flat");
        let trace = dir.join("t.csv");
        write_trace(&trace, &[row(0, 0.4, 0.0), row(1, 0.4, 1.0), row(2, 0.4, 2.0)]);
        let out = dir.join("plot.svg");
        emit_plot(&[("only".into(), trace)], &out).unwrap();
        let svg = std::fs::read_to_string(&out).unwrap();
        assert_eq!(svg.matches("<polyline").count(), 1);
        let pts = svg
            .split("points=\"")
            .nth(1)
            .unwrap()
            .split('"')
            .next()
            .unwrap();
        let ys: Vec<&str> = pts
            .split_whitespace()
            .map(|p| p.split(',').nth(1).unwrap())
            .collect();
        assert!(ys.windows(2).all(|w| w[0] == w[1]), "{ys:?}");
        std::fs::remove_dir_all(&dir).ok();
    }

    #[test]
    fn five_traces_yield_five_labeled_curves() {
        let dir = temp_dir("five");
        let mut curves = Vec::new();
        for k in 0..5 {
            let p = dir.join(format!("t{k}.csv"));
            write_trace(
                &p,
                &[row(0, 0.5 + k as f64 * 0.1, 0.0), row(1, 0.3, 1.0 + k as f64)],
            );
            curves.push((format!("method_{k}"), p));
        }
        let out = dir.join("plot.svg");
        emit_plot(&curves, &out).unwrap();
        let svg = std::fs::read_to_string(&out).unwrap();
        assert_eq!(svg.matches("<polyline").count(), 5);
        for k in 0..5 {
            assert!(svg.contains(&format!("method_{k}")));
        }
        std::fs::remove_dir_all(&dir).ok();
    }

    #[test]
    fn malformed_trace_reports_the_line() {
        let dir = temp_dir("bad");
        let p = dir.join("t.csv");
        let mut f = File::create(&p).unwrap();
        writeln!(f, "iter,objective,alpha,rms,seconds").unwrap();
        writeln!(f, "0,1.0,1.0,0.5,0.0").unwrap();
        writeln!(f, "not,a,valid,row").unwrap();
        drop(f);
        let err = emit_plot(&[("x".into(), p)], &dir.join("plot.svg")).unwrap_err();
        assert!(err.to_string().contains("line 3"), "{err}");
        std::fs::remove_dir_all(&dir).ok();
    }

    #[test]
    fn empty_curve_list_is_rejected() {
        assert!(emit_plot(&[], Path::new("unused.svg")).is_err());
    }
}
