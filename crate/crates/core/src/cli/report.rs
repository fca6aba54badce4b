//! Summary report and charts, generated from manifests and their CSV files.

use std::path::{Path, PathBuf};

use super::manifest::RunManifest;
use super::svg::{auto_scales, render, Chart, Series};
use crate::error::{Error, Result};

pub const SUMMARY_NAME: &str = "summary.txt";

#[derive(Debug, Clone, PartialEq)]
pub struct ReportBundle {
    pub summary: PathBuf,
    pub charts: Vec<PathBuf>,
}

/// A CSV file read as a header plus string cells.
struct Table {
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

fn read_table(path: &Path) -> Result<Table> {
    let mut r = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_path(path)
        .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    let header = r
        .headers()
        .map_err(|e| Error::Parse(e.to_string()))?
        .iter()
        .map(str::to_string)
        .collect();
    let mut rows = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
        rows.push(rec.iter().map(str::to_string).collect());
    }
    Ok(Table { header, rows })
}

/// Series for every column whose cells all parse as finite numbers, against
/// the first column. `None` when the first column is not numeric.
fn chart_for(title: &str, t: &Table) -> Option<Chart> {
    let num = |s: &str| s.parse::<f64>().ok().filter(|v| v.is_finite());
    let xs: Vec<f64> = t.rows.iter().map(|r| r.first().and_then(|c| num(c))).collect::<Option<_>>()?;
    if xs.is_empty() {
        return None;
    }
    let mut series = Vec::new();
    for (j, name) in t.header.iter().enumerate().skip(1) {
        let ys: Option<Vec<f64>> = t.rows.iter().map(|r| r.get(j).and_then(|c| num(c))).collect();
        if let Some(ys) = ys {
            series.push(Series {
                name: name.clone(),
                points: xs.iter().copied().zip(ys).collect(),
            });
        }
    }
    if series.is_empty() {
        return None;
    }
    let (x_scale, y_scale) = auto_scales(&series);
    Some(Chart {
        title: title.to_string(),
        x_label: t.header[0].clone(),
        x_scale,
        y_scale,
        series,
    })
}

/// Writes `summary.txt` and one SVG per chartable CSV into `out`. The
/// output depends only on the manifests' identity, status, checks and CSV
/// contents, never on timestamps.
pub fn emit_report(manifests: &[PathBuf], out: &Path) -> Result<ReportBundle> {
    std::fs::create_dir_all(out)?;
    let mut summary = String::new();
    let mut charts = Vec::new();
    for mpath in manifests {
        let m = RunManifest::read(mpath)?;
        let dir = mpath.parent().unwrap_or(Path::new("."));
        let short = &m.run_id[..m.run_id.len().min(12)];
        let passed = m.checks.iter().filter(|c| c.passed).count();
        summary.push_str(&format!(
            "run {short} ({}): status {}, {passed}/{} checks passed\n",
            m.command,
            m.status,
            m.checks.len()
        ));
        if let Some(e) = &m.error {
            summary.push_str(&format!("  error: {e}\n"));
        }
        for c in &m.checks {
            summary.push_str(&format!(
                "  [{}] {}: {}\n",
                if c.passed { "pass" } else { "FAIL" },
                c.name,
                c.detail
            ));
        }
        for art in m.artifacts.iter().filter(|a| a.ends_with(".csv")) {
            let path = dir.join(art);
            if !path.exists() {
                return Err(Error::Io(format!(
                    "manifest {} lists `{art}`, which does not exist",
                    mpath.display()
                )));
            }
            let t = read_table(&path)?;
            summary.push_str(&format!("  table {art}: {} rows, columns {}\n", t.rows.len(), t.header.join(",")));
            let stem = art.trim_end_matches(".csv").replace('/', "_");
            if let Some(chart) = chart_for(&format!("{} {stem} ({short})", m.command), &t) {
                let name = format!("{short}-{stem}.svg");
                let p = out.join(&name);
                std::fs::write(&p, render(&chart))?;
                summary.push_str(&format!("  chart {name}\n"));
                charts.push(p);
            }
        }
        summary.push('\n');
    }
    let summary_path = out.join(SUMMARY_NAME);
    std::fs::write(&summary_path, summary)?;
    Ok(ReportBundle {
        summary: summary_path,
        charts,
    })
}
