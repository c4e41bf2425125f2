//! Deterministic SVG plots of a JSON report: decay curves for `diff-decay`,
//! a histogram of one numeric column otherwise.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use diamond_core::ExperimentReport;

use crate::CliError;

const W: f64 = 640.0;
const H: f64 = 400.0;
const MARGIN: f64 = 56.0;
const BINS: usize = 20;
const PALETTE: [&str; 6] = ["#1b6ca8", "#c0392b", "#27ae60", "#8e44ad", "#d35400", "#2c3e50"];

/// Columns tried first for histograms, in order.
const PREFERRED: [&str; 8] = ["remainder", "statistic", "ratio", "stretch", "energy", "frequency", "diameter", "d_pq"];

fn num(v: f64) -> String {
    format!("{v:.2}")
}

fn label(v: f64) -> String {
    format!("{v:.4e}")
}

fn header(title: &str) -> String {
    let mut s = String::new();
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}">"#);
    let _ = writeln!(s, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(s, r#"<text x="{}" y="24" font-family="sans-serif" font-size="14" text-anchor="middle">{}</text>"#, num(W / 2.0), escape(title));
    let (x0, y0, x1) = (MARGIN, H - MARGIN, W - MARGIN);
    let _ = writeln!(s, r#"<line x1="{}" y1="{}" x2="{}" y2="{}" stroke="black"/>"#, num(x0), num(y0), num(x1), num(y0));
    let _ = writeln!(s, r#"<line x1="{}" y1="{}" x2="{}" y2="{}" stroke="black"/>"#, num(x0), num(y0), num(x0), num(MARGIN));
    s
}

fn axis_labels(s: &mut String, xlo: f64, xhi: f64, ylo: f64, yhi: f64, xname: &str, yname: &str) {
    let y0 = H - MARGIN;
    let _ = writeln!(s, r#"<text x="{}" y="{}" font-family="sans-serif" font-size="10">{}</text>"#, num(MARGIN), num(y0 + 16.0), label(xlo));
    let _ = writeln!(s, r#"<text x="{}" y="{}" font-family="sans-serif" font-size="10" text-anchor="end">{}</text>"#, num(W - MARGIN), num(y0 + 16.0), label(xhi));
    let _ = writeln!(s, r#"<text x="{}" y="{}" font-family="sans-serif" font-size="10" text-anchor="end">{}</text>"#, num(MARGIN - 4.0), num(y0), label(ylo));
    let _ = writeln!(s, r#"<text x="{}" y="{}" font-family="sans-serif" font-size="10" text-anchor="end">{}</text>"#, num(MARGIN - 4.0), num(MARGIN + 4.0), label(yhi));
    let _ = writeln!(s, r#"<text x="{}" y="{}" font-family="sans-serif" font-size="12" text-anchor="middle">{}</text>"#, num(W / 2.0), num(H - 12.0), escape(xname));
    let _ = writeln!(
        s,
        r#"<text x="14" y="{}" font-family="sans-serif" font-size="12" text-anchor="middle" transform="rotate(-90 14 {})">{}</text>"#,
        num(H / 2.0),
        num(H / 2.0),
        escape(yname)
    );
}

fn escape(t: &str) -> String {
    t.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn scale(v: f64, lo: f64, hi: f64, a: f64, b: f64) -> f64 {
    if hi > lo {
        a + (v - lo) / (hi - lo) * (b - a)
    } else {
        (a + b) / 2.0
    }
}

fn column(rep: &ExperimentReport, name: &str) -> Option<Vec<f64>> {
    let i = rep.rows.columns.iter().position(|c| c == name)?;
    rep.rows.rows.iter().map(|r| r.get(i).and_then(|v| v.parse::<f64>().ok()).filter(|x| x.is_finite())).collect()
}

/// The preferred numeric column, else the last numeric one.
pub fn histogram_column(rep: &ExperimentReport) -> Option<(String, Vec<f64>)> {
    let named = PREFERRED.iter().find_map(|&c| column(rep, c).map(|v| (c.to_string(), v)));
    named.or_else(|| rep.rows.columns.iter().rev().find_map(|c| column(rep, c).map(|v| (c.clone(), v))))
}

pub fn histogram_svg(title: &str, name: &str, values: &[f64]) -> String {
    let lo = values.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut counts = [0usize; BINS];
    for &v in values {
        let k = if hi > lo { (((v - lo) / (hi - lo)) * BINS as f64) as usize } else { 0 };
        counts[k.min(BINS - 1)] += 1;
    }
    let top = *counts.iter().max().unwrap_or(&1) as f64;
    let mut s = header(title);
    let bw = (W - 2.0 * MARGIN) / BINS as f64;
    for (k, &c) in counts.iter().enumerate() {
        let h = c as f64 / top * (H - 2.0 * MARGIN);
        let _ = writeln!(
            s,
            r#"<rect x="{}" y="{}" width="{}" height="{}" fill="{}"/>"#,
            num(MARGIN + k as f64 * bw),
            num(H - MARGIN - h),
            num(bw - 1.0),
            num(h),
            PALETTE[0]
        );
    }
    axis_labels(&mut s, lo, hi, 0.0, top, name, "count");
    s.push_str("</svg>\n");
    s
}

/// Median remainder per (function, radius), plotted on log-log axes.
pub fn decay_svg(rep: &ExperimentReport) -> Option<String> {
    let (fi, ri, vi) = ["function", "r", "remainder"].map(|c| rep.rows.columns.iter().position(|x| x == c)).into();
    let (fi, ri, vi) = (fi?, ri?, vi?);
    let mut groups: BTreeMap<String, BTreeMap<String, Vec<f64>>> = BTreeMap::new();
    for row in &rep.rows.rows {
        let v: f64 = row.get(vi)?.parse().ok()?;
        groups.entry(row.get(fi)?.clone()).or_default().entry(row.get(ri)?.clone()).or_default().push(v);
    }
    // floor keeps exactly linear functions on a log axis
    let floor = 1e-16f64;
    let curves: Vec<(String, Vec<(f64, f64)>)> = groups
        .into_iter()
        .map(|(f, by_r)| {
            let mut pts: Vec<(f64, f64)> = by_r
                .into_iter()
                .filter_map(|(r, mut v)| {
                    v.sort_by(f64::total_cmp);
                    let med = v[(v.len() - 1) / 2];
                    Some((r.parse::<f64>().ok()?.log10(), med.max(floor).log10()))
                })
                .collect();
            pts.sort_by(|a, b| a.0.total_cmp(&b.0));
            (f, pts)
        })
        .collect();
    let all: Vec<(f64, f64)> = curves.iter().flat_map(|c| c.1.iter().cloned()).collect();
    if all.is_empty() {
        return None;
    }
    let (xlo, xhi) = all.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), p| (a.min(p.0), b.max(p.0)));
    let (ylo, yhi) = all.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), p| (a.min(p.1), b.max(p.1)));
    let mut s = header(&format!("{}: median normalized remainder", rep.run_id));
    for (k, (f, pts)) in curves.iter().enumerate() {
        let color = PALETTE[k % PALETTE.len()];
        let path: Vec<String> = pts
            .iter()
            .map(|&(x, y)| format!("{},{}", num(scale(x, xlo, xhi, MARGIN, W - MARGIN)), num(scale(y, ylo, yhi, H - MARGIN, MARGIN))))
            .collect();
        let _ = writeln!(s, r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="2"/>"#, path.join(" "));
        let ly = MARGIN + 14.0 * k as f64;
        let _ = writeln!(s, r#"<text x="{}" y="{}" font-family="sans-serif" font-size="11" fill="{color}">{}</text>"#, num(W - MARGIN - 200.0), num(ly), escape(f));
    }
    axis_labels(&mut s, xlo, xhi, ylo, yhi, "log10 r", "log10 median remainder");
    s.push_str("</svg>\n");
    Some(s)
}

/// Plots for one report; the error names what is missing.
pub fn render(rep: &ExperimentReport) -> Result<Vec<(String, String)>, CliError> {
    if rep.rows.rows.is_empty() {
        return Err(CliError::Failed(format!("empty report `{}`: no rows to plot", rep.run_id)));
    }
    let mut out = Vec::new();
    if let Some(svg) = decay_svg(rep) {
        out.push(("decay".to_string(), svg));
    }
    if let Some((name, values)) = histogram_column(rep) {
        if !values.is_empty() {
            out.push((format!("hist-{name}"), histogram_svg(&format!("{}: {name}", rep.run_id), &name, &values)));
        }
    }
    if out.is_empty() {
        return Err(CliError::Failed(format!("report `{}` has no numeric column to plot", rep.run_id)));
    }
    Ok(out)
}

pub fn plot_file(report: &Path, dir: &Path) -> Result<Vec<PathBuf>, CliError> {
    let text = fs::read_to_string(report).map_err(|e| CliError::Usage(format!("cannot read {}: {e}", report.display())))?;
    let rep: ExperimentReport = serde_json::from_str(&text).map_err(|e| CliError::Usage(format!("malformed report {}: {e}", report.display())))?;
    fs::create_dir_all(dir)?;
    let mut paths = Vec::new();
    for (kind, svg) in render(&rep)? {
        let p = dir.join(format!("{}.{kind}.svg", rep.experiment));
        fs::write(&p, svg)?;
        paths.push(p);
    }
    Ok(paths)
}
