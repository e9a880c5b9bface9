//! CSV, JSON and SVG output.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::anisotropy::WulffShape;
use crate::driver::FlowTrace;
use crate::error::{Error, Result};
use crate::geom::Vec2;
use crate::harness::metric::Outline;
use crate::harness::pair::{ConvergenceTable, EquivarianceReport, SlopeFit};

pub const TRACE_HEADER: &str = "t,energy,area,min_facet_length";
pub const REPORT_HEADER: &str = "t,defect,defect_normalized";
pub const CONVERGENCE_HEADER: &str = "dt,points,defect";

fn write_file(path: &Path, contents: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    fs::write(path, contents).map_err(|e| Error::io(path, e))
}

fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value).map_err(|source| Error::Parse {
        path: path.to_path_buf(),
        source,
    })?;
    write_file(path, &(text + "\n"))
}

/// Trace table, one row per record.
pub fn trace_csv<S>(trace: &FlowTrace<S>) -> String {
    let mut out = format!("{TRACE_HEADER}\n");
    for r in &trace.records {
        let _ = writeln!(out, "{:e},{:e},{:e},{:e}", r.t, r.energy, r.area, r.min_length);
    }
    out
}

pub fn report_csv(report: &EquivarianceReport) -> String {
    let mut out = format!("{REPORT_HEADER}\n");
    for r in &report.rows {
        let _ = writeln!(out, "{:e},{:e},{:e}", r.t, r.defect, r.defect_normalized);
    }
    out
}

pub fn convergence_csv(table: &ConvergenceTable) -> String {
    let mut out = format!("{CONVERGENCE_HEADER}\n");
    for l in &table.levels {
        let pts = l.points.map_or(String::new(), |n| n.to_string());
        let _ = writeln!(out, "{:e},{pts},{:e}", l.dt, l.defect);
    }
    out
}

pub fn slope_label(fit: &SlopeFit) -> String {
    match fit {
        SlopeFit::Exact => "n/a (all defects at rounding level)".into(),
        SlopeFit::NonMonotone => "n/a (non-monotone defects)".into(),
        SlopeFit::Slope(s) => format!("{s:.4}"),
    }
}

/// Overlays closed outlines in one SVG, with `y` pointing up.
pub fn svg(outlines: &[Vec<Vec2>]) -> String {
    let (mut lo, mut hi) = (Vec2::new(f64::INFINITY, f64::INFINITY), Vec2::new(f64::NEG_INFINITY, f64::NEG_INFINITY));
    for p in outlines.iter().flatten().filter(|p| p.is_finite()) {
        lo = Vec2::new(lo.x.min(p.x), lo.y.min(p.y));
        hi = Vec2::new(hi.x.max(p.x), hi.y.max(p.y));
    }
    if !lo.is_finite() || !hi.is_finite() {
        lo = Vec2::new(-1.0, -1.0);
        hi = Vec2::new(1.0, 1.0);
    }
    let span = (hi.x - lo.x).max(hi.y - lo.y).max(1e-12);
    let margin = 0.05 * span;
    let (x0, y0) = (lo.x - margin, -hi.y - margin);
    let (w, h) = (hi.x - lo.x + 2.0 * margin, hi.y - lo.y + 2.0 * margin);
    let stroke = span / 400.0;
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" viewBox="{x0} {y0} {w} {h}">"#
    );
    for pts in outlines {
        let coords: Vec<String> = pts.iter().map(|p| format!("{},{}", p.x, -p.y)).collect();
        let _ = writeln!(
            out,
            r#"  <polygon points="{}" fill="none" stroke="black" stroke-width="{stroke}"/>"#,
            coords.join(" ")
        );
    }
    out.push_str("</svg>\n");
    out
}

#[derive(Serialize)]
struct Snapshot<'a, S> {
    t: f64,
    #[serde(flatten)]
    geometry: &'a S,
}

/// Writes `trace.csv`, `snapshot_NNNN.json` per record, `events.json` and `trace.svg` into `dir`.
pub fn write_trace<S>(trace: &FlowTrace<S>, dir: &Path) -> Result<Vec<PathBuf>>
where
    S: Serialize + Outline,
{
    let mut written = Vec::new();
    let csv = dir.join("trace.csv");
    write_file(&csv, &trace_csv(trace))?;
    written.push(csv);
    for (k, r) in trace.records.iter().enumerate() {
        let path = dir.join(format!("snapshot_{k:04}.json"));
        write_json(&path, &Snapshot { t: r.t, geometry: &r.snapshot })?;
        written.push(path);
    }
    let events = dir.join("events.json");
    write_json(&events, &trace.events)?;
    written.push(events);
    let outlines: Vec<Vec<Vec2>> = trace.records.iter().map(|r| r.snapshot.outline()).collect();
    let fig = dir.join("trace.svg");
    write_file(&fig, &svg(&outlines))?;
    written.push(fig);
    Ok(written)
}

/// Writes `wulff.json` and `wulff.svg` into `dir`.
pub fn write_wulff(w: &WulffShape, dir: &Path) -> Result<Vec<PathBuf>> {
    let json = dir.join("wulff.json");
    write_json(&json, w)?;
    let fig = dir.join("wulff.svg");
    write_file(&fig, &svg(std::slice::from_ref(&w.vertices)))?;
    Ok(vec![json, fig])
}

/// Writes `report.csv` and, when present, the event mismatches to `mismatches.txt`.
pub fn write_report(report: &EquivarianceReport, dir: &Path) -> Result<Vec<PathBuf>> {
    let csv = dir.join("report.csv");
    write_file(&csv, &report_csv(report))?;
    let mut written = vec![csv];
    if !report.mismatches.is_empty() {
        let path = dir.join("mismatches.txt");
        write_file(&path, &(report.mismatches.join("\n") + "\n"))?;
        written.push(path);
    }
    Ok(written)
}

pub fn write_convergence(table: &ConvergenceTable, dir: &Path) -> Result<Vec<PathBuf>> {
    let csv = dir.join("convergence.csv");
    write_file(&csv, &convergence_csv(table))?;
    Ok(vec![csv])
}
