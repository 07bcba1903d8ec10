//! CSV reports: one row per (method, σ, n, rep), per-cell summaries, weights.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use super::consistency::{mean_sd, ConsistencyResult};
use super::suite::{ExperimentResult, Method, ResultRow};
use crate::error::{PearlError, Result};

pub const RESULTS_HEADER: [&str; 9] = ["method", "sigma", "n", "rep", "mse", "acc", "ce", "tau", "runtime_ms"];
pub const SUMMARY_HEADER: [&str; 12] = [
    "method", "sigma", "n", "count", "mse_mean", "mse_sd", "acc_mean", "acc_sd", "ce_mean", "ce_sd",
    "tau_mean", "tau_sd",
];

fn num(v: f64) -> String {
    if v.is_finite() {
        v.to_string()
    } else {
        String::new()
    }
}

fn opt(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}

fn csv_err(e: csv::Error) -> PearlError {
    PearlError::Io(std::io::Error::other(e))
}

fn render(header: &[&str], records: impl IntoIterator<Item = Vec<String>>) -> Result<String> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(vec![]);
    w.write_record(header).map_err(csv_err)?;
    for r in records {
        w.write_record(&r).map_err(csv_err)?;
    }
    let bytes = w.into_inner().map_err(|e| PearlError::Io(std::io::Error::other(e.to_string())))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

/// Tidy per-repetition table. `runtime_ms` is left empty unless `timings` is set,
/// so that seeded reruns produce identical bytes.
pub fn results_csv(rows: &[ResultRow], timings: bool) -> Result<String> {
    render(
        &RESULTS_HEADER,
        rows.iter().map(|r| {
            vec![
                r.method.name().to_string(),
                num(r.sigma),
                r.n.to_string(),
                r.rep.to_string(),
                num(r.metrics.mse),
                opt(r.metrics.accuracy),
                opt(r.metrics.ce),
                opt(r.tau),
                if timings { format!("{:.3}", r.runtime_ms) } else { String::new() },
            ]
        }),
    )
}

fn stat(values: Vec<Option<f64>>) -> [String; 2] {
    let v: Vec<f64> = values.into_iter().flatten().collect();
    if v.is_empty() {
        return [String::new(), String::new()];
    }
    let (m, s) = mean_sd(&v);
    [num(m), num(s)]
}

/// Mean and sample standard deviation per (method, σ, n) cell.
pub fn summary_csv(rows: &[ResultRow]) -> Result<String> {
    let mut cells: BTreeMap<(Method, u64, usize), Vec<&ResultRow>> = BTreeMap::new();
    for r in rows {
        cells.entry((r.method, r.sigma.to_bits(), r.n)).or_default().push(r);
    }
    let mut keys: Vec<_> = cells.keys().copied().collect();
    keys.sort_by(|a, b| {
        (a.0, f64::from_bits(a.1), a.2)
            .partial_cmp(&(b.0, f64::from_bits(b.1), b.2))
            .expect("finite sigma")
    });
    render(
        &SUMMARY_HEADER,
        keys.into_iter().map(|k| {
            let c = &cells[&k];
            let mut rec = vec![k.0.name().to_string(), num(f64::from_bits(k.1)), k.2.to_string(), c.len().to_string()];
            rec.extend(stat(c.iter().map(|r| Some(r.metrics.mse)).collect()));
            rec.extend(stat(c.iter().map(|r| r.metrics.accuracy).collect()));
            rec.extend(stat(c.iter().map(|r| r.metrics.ce).collect()));
            rec.extend(stat(c.iter().map(|r| r.tau).collect()));
            rec
        }),
    )
}

/// Long-format weights of every PEARL row.
pub fn weights_csv(rows: &[ResultRow], labels: &[String]) -> Result<String> {
    render(
        &["sigma", "n", "rep", "candidate", "label", "weight"],
        rows.iter().filter_map(|r| r.weights.as_ref().map(|w| (r, w))).flat_map(|(r, w)| {
            w.iter().enumerate().map(move |(j, x)| {
                vec![
                    num(r.sigma),
                    r.n.to_string(),
                    r.rep.to_string(),
                    j.to_string(),
                    labels.get(j).cloned().unwrap_or_default(),
                    num(*x),
                ]
            })
        }),
    )
}

pub fn tau_curve_csv(result: &ConsistencyResult) -> Result<String> {
    render(
        &["sigma", "n", "reps", "tau_mean", "tau_sd"],
        result.curve.iter().map(|p| {
            vec![num(result.sigma), p.n.to_string(), p.reps.to_string(), num(p.mean), num(p.sd)]
        }),
    )
}

fn write(dir: &Path, name: &str, body: String) -> Result<PathBuf> {
    let path = dir.join(name);
    fs::write(&path, body)?;
    Ok(path)
}

/// Writes `results.csv`, `summary.csv` and `weights.csv` into `dir`.
pub fn emit_report(result: &ExperimentResult, dir: &Path, timings: bool) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    Ok(vec![
        write(dir, "results.csv", results_csv(&result.rows, timings)?)?,
        write(dir, "summary.csv", summary_csv(&result.rows)?)?,
        write(dir, "weights.csv", weights_csv(&result.rows, &result.candidate_labels)?)?,
    ])
}

/// Writes `results.csv`, `summary.csv` and `tau_curve.csv` into `dir`.
pub fn emit_consistency_report(result: &ConsistencyResult, dir: &Path, timings: bool) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    Ok(vec![
        write(dir, "results.csv", results_csv(&result.rows, timings)?)?,
        write(dir, "summary.csv", summary_csv(&result.rows)?)?,
        write(dir, "tau_curve.csv", tau_curve_csv(result)?)?,
    ])
}
