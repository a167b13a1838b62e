//! CSV records and log-log SVG scatter plots.

use std::fmt::Write as _;
use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::oracles::csv_err;

use super::experiment::RunRecord;

/// Sorts by `(config_hash, trial)` so serial and parallel runs write
/// identical files.
pub fn canonical_sort(records: &mut [RunRecord]) {
    records.sort_by(|a, b| (&a.config_hash, a.trial).cmp(&(&b.config_hash, b.trial)));
}

/// Writes records (canonically sorted) with a header row.
pub fn write_records<W: Write>(records: &[RunRecord], out: W) -> Result<()> {
    let mut sorted = records.to_vec();
    canonical_sort(&mut sorted);
    let mut w = csv::Writer::from_writer(out);
    for r in &sorted {
        w.serialize(r).map_err(csv_err)?;
    }
    if sorted.is_empty() {
        w.write_record(COLUMNS).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

pub const COLUMNS: [&str; 18] = [
    "config_hash",
    "trial",
    "seed",
    "d",
    "n",
    "alpha",
    "rho",
    "mbar",
    "gamma",
    "algorithm",
    "oracle",
    "subopt",
    "calls_total",
    "unique_points",
    "eps",
    "delta",
    "wall_ms",
    "error",
];

pub fn read_records<R: Read>(inp: R) -> Result<Vec<RunRecord>> {
    let mut rdr = csv::Reader::from_reader(inp);
    let header = rdr.headers().map_err(csv_err)?;
    if header.iter().ne(COLUMNS.iter().copied()) {
        return Err(Error::Format(format!("unexpected CSV header {header:?}")));
    }
    rdr.deserialize().map(|r| r.map_err(csv_err)).collect()
}

pub fn read_records_file(path: &Path) -> Result<Vec<RunRecord>> {
    read_records(BufReader::new(File::open(path)?))
}

/// Swept quantity on the horizontal axis of a plot.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum XAxis {
    D,
    Alpha,
    Rho,
    Mbar,
    Gamma,
}

impl XAxis {
    pub fn parse(name: &str) -> Result<Self> {
        Ok(match name {
            "d" => XAxis::D,
            "alpha" => XAxis::Alpha,
            "rho" => XAxis::Rho,
            "mbar" => XAxis::Mbar,
            "gamma" => XAxis::Gamma,
            other => return Err(Error::config(format!("unknown axis {other:?}"))),
        })
    }

    pub fn name(&self) -> &'static str {
        match self {
            XAxis::D => "d",
            XAxis::Alpha => "alpha",
            XAxis::Rho => "rho",
            XAxis::Mbar => "mbar",
            XAxis::Gamma => "gamma",
        }
    }

    fn value(&self, r: &RunRecord) -> Option<f64> {
        match self {
            XAxis::D => Some(r.d as f64),
            XAxis::Alpha => r.alpha,
            XAxis::Rho => r.rho,
            XAxis::Mbar => r.mbar,
            XAxis::Gamma => r.gamma.map(|g| g as f64),
        }
    }
}

/// `(log10 x, log10 calls)` for error-free records with positive finite values.
pub fn loglog_points(records: &[RunRecord], x: XAxis) -> Vec<(f64, f64)> {
    records
        .iter()
        .filter(|r| !r.is_error())
        .filter_map(|r| {
            let xv = x.value(r)?;
            let yv = r.calls_total as f64;
            (xv > 0.0 && xv.is_finite() && yv > 0.0).then(|| (xv.log10(), yv.log10()))
        })
        .collect()
}

/// Least-squares line `y = slope x + intercept`; `None` with fewer than two
/// distinct x values.
pub fn fit_line(points: &[(f64, f64)]) -> Option<(f64, f64)> {
    let n = points.len() as f64;
    if points.len() < 2 {
        return None;
    }
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx <= 1e-15 {
        return None;
    }
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    Some((slope, my - slope * mx))
}

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 480.0;
const MARGIN: f64 = 60.0;

/// Log-log scatter of oracle calls against `x` with the fitted line and its
/// slope. Records with errors are left out.
pub fn svg_scatter(records: &[RunRecord], x: XAxis) -> Result<String> {
    let pts = loglog_points(records, x);
    if pts.is_empty() {
        return Err(Error::InvalidParameter(format!(
            "no error-free records with positive {} and calls",
            x.name()
        )));
    }
    let (mut x0, mut x1) = bounds(pts.iter().map(|p| p.0));
    let (mut y0, mut y1) = bounds(pts.iter().map(|p| p.1));
    pad(&mut x0, &mut x1);
    pad(&mut y0, &mut y1);
    let sx = |v: f64| MARGIN + (v - x0) / (x1 - x0) * (WIDTH - 2.0 * MARGIN);
    let sy = |v: f64| HEIGHT - MARGIN - (v - y0) / (y1 - y0) * (HEIGHT - 2.0 * MARGIN);

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let (left, right, top, bottom) = (MARGIN, WIDTH - MARGIN, MARGIN, HEIGHT - MARGIN);
    let _ = writeln!(
        s,
        r#"<path d="M{left} {top} L{left} {bottom} L{right} {bottom}" stroke="black" fill="none"/>"#
    );
    for k in x0.ceil() as i32..=x1.floor() as i32 {
        let px = sx(k as f64);
        let _ = writeln!(
            s,
            r#"<line x1="{px:.2}" y1="{bottom}" x2="{px:.2}" y2="{:.2}" stroke="black"/><text x="{px:.2}" y="{:.2}" font-size="12" text-anchor="middle">1e{k}</text>"#,
            bottom + 5.0,
            bottom + 20.0
        );
    }
    for k in y0.ceil() as i32..=y1.floor() as i32 {
        let py = sy(k as f64);
        let _ = writeln!(
            s,
            r#"<line x1="{:.2}" y1="{py:.2}" x2="{left}" y2="{py:.2}" stroke="black"/><text x="{:.2}" y="{:.2}" font-size="12" text-anchor="end">1e{k}</text>"#,
            left - 5.0,
            left - 8.0,
            py + 4.0
        );
    }
    for &(px, py) in &pts {
        let _ = writeln!(s, r#"<circle cx="{:.2}" cy="{:.2}" r="3" fill="steelblue"/>"#, sx(px), sy(py));
    }
    if let Some((slope, intercept)) = fit_line(&pts) {
        let _ = writeln!(
            s,
            r#"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="firebrick"/>"#,
            sx(x0),
            sy(slope * x0 + intercept),
            sx(x1),
            sy(slope * x1 + intercept)
        );
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" font-size="14">slope {slope:.3}</text>"#,
            left + 10.0,
            top - 20.0
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="{:.2}" font-size="14" text-anchor="middle">{}</text>"#,
        WIDTH / 2.0,
        HEIGHT - 15.0,
        x.name()
    );
    let _ = writeln!(
        s,
        r#"<text x="15" y="{:.2}" font-size="14" transform="rotate(-90 15 {:.2})" text-anchor="middle">oracle calls</text>"#,
        HEIGHT / 2.0,
        HEIGHT / 2.0
    );
    s.push_str("</svg>\n");
    Ok(s)
}

fn bounds(it: impl Iterator<Item = f64>) -> (f64, f64) {
    it.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)))
}

fn pad(lo: &mut f64, hi: &mut f64) {
    let span = (*hi - *lo).max(0.2);
    let mid = 0.5 * (*hi + *lo);
    *lo = mid - 0.55 * span;
    *hi = mid + 0.55 * span;
}

/// Output format of [`emit_report`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ReportKind {
    Csv,
    SvgScatter(XAxis),
}

pub fn emit_report(records: &[RunRecord], kind: ReportKind, path: &Path) -> Result<()> {
    if records.is_empty() {
        return Err(Error::InvalidParameter("no records to report".into()));
    }
    let mut out = BufWriter::new(File::create(path)?);
    match kind {
        ReportKind::Csv => write_records(records, &mut out)?,
        ReportKind::SvgScatter(x) => out.write_all(svg_scatter(records, x)?.as_bytes())?,
    }
    out.flush()?;
    Ok(())
}
