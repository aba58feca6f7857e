//! Per-configuration summaries, CSV/JSON output and gnuplot scripts.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::trial::{Algorithm, BenchRecord};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Csv,
    Json,
}

impl FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            other => Err(Error::invalid(format!("unknown format `{other}`"))),
        }
    }
}

/// One row per configuration `(k, N, algorithm, eta, r, snr)`.
///
/// Error, block, operation and conditioning means are taken over successful
/// trials only.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AggregateRow {
    pub k: usize,
    #[serde(rename = "N")]
    pub n: usize,
    pub algorithm: Algorithm,
    pub eta: usize,
    pub r: Option<u32>,
    pub snr_db: Option<f64>,
    pub trials: usize,
    pub failure_rate: f64,
    pub mean_error_l2: Option<f64>,
    pub mean_rel_error: Option<f64>,
    pub mean_block: Option<f64>,
    pub mean_unknown_block: Option<f64>,
    pub max_block: usize,
    pub mean_ops_actual: Option<f64>,
    pub mean_ops_paper: Option<f64>,
    /// `+inf` when no trial succeeded and some block was singular.
    pub mean_log10_cond: Option<f64>,
}

pub const CSV_HEADER: [&str; 14] = [
    "k",
    "N",
    "algorithm",
    "eta",
    "r",
    "snr_db",
    "trials",
    "failure_rate",
    "mean_error_l2",
    "mean_block",
    "max_block",
    "mean_ops_actual",
    "mean_ops_paper",
    "mean_log10_cond",
];

fn same_config(a: &BenchRecord, b: &BenchRecord) -> bool {
    a.k == b.k
        && a.n == b.n
        && a.algorithm == b.algorithm
        && a.eta == b.eta
        && a.r == b.r
        && a.snr_db.map(f64::to_bits) == b.snr_db.map(f64::to_bits)
}

fn mean(values: impl Iterator<Item = f64>) -> Option<f64> {
    let (sum, count) = values.fold((0.0, 0usize), |(s, c), v| (s + v, c + 1));
    (count > 0).then(|| sum / count as f64)
}

/// Group records by configuration, in order of first appearance.
pub fn aggregate(records: &[BenchRecord]) -> Result<Vec<AggregateRow>> {
    if records.is_empty() {
        return Err(Error::invalid("no records to aggregate"));
    }
    let mut groups: Vec<Vec<&BenchRecord>> = Vec::new();
    for rec in records {
        match groups.iter_mut().find(|g| same_config(g[0], rec)) {
            Some(g) => g.push(rec),
            None => groups.push(vec![rec]),
        }
    }
    Ok(groups.into_iter().map(|g| summarize(&g)).collect())
}

fn summarize(group: &[&BenchRecord]) -> AggregateRow {
    let first = group[0];
    let ok: Vec<&BenchRecord> = group.iter().copied().filter(|r| r.success).collect();
    let failures = group.len() - ok.len();
    let mut cond = mean(ok.iter().filter_map(|r| r.mean_log10_cond));
    if ok.is_empty() && group.iter().any(|r| r.singular) {
        cond = Some(f64::INFINITY);
    }
    AggregateRow {
        k: first.k,
        n: first.n,
        algorithm: first.algorithm,
        eta: first.eta,
        r: first.r,
        snr_db: first.snr_db,
        trials: group.len(),
        failure_rate: failures as f64 / group.len() as f64,
        mean_error_l2: mean(ok.iter().filter_map(|r| r.error_l2)),
        mean_rel_error: mean(ok.iter().filter_map(|r| r.rel_error)),
        mean_block: mean(ok.iter().map(|r| r.mean_block)),
        mean_unknown_block: mean(ok.iter().map(|r| r.unknown_mean_block)),
        max_block: ok.iter().map(|r| r.max_block).max().unwrap_or(0),
        mean_ops_actual: mean(ok.iter().map(|r| r.ops_actual as f64)),
        mean_ops_paper: mean(ok.iter().map(|r| r.ops_paper_model as f64)),
        mean_log10_cond: cond,
    }
}

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|v| v.to_string()).unwrap_or_default()
}

/// Write rows as CSV with [`CSV_HEADER`].
pub fn write_csv<W: Write>(rows: &[AggregateRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER)?;
    for row in rows {
        w.write_record([
            row.k.to_string(),
            row.n.to_string(),
            row.algorithm.to_string(),
            row.eta.to_string(),
            opt(row.r),
            opt(row.snr_db),
            row.trials.to_string(),
            row.failure_rate.to_string(),
            opt(row.mean_error_l2),
            opt(row.mean_block),
            row.max_block.to_string(),
            opt(row.mean_ops_actual),
            opt(row.mean_ops_paper),
            opt(row.mean_log10_cond),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Parse a CSV written by [`write_csv`] back into `(header, rows)` of strings.
pub fn read_csv(path: &Path) -> Result<Vec<csv::StringRecord>> {
    let mut r = csv::Reader::from_path(path)?;
    Ok(r.records().collect::<std::result::Result<_, _>>()?)
}

/// Aggregate `records`, write the table to `out_path` and gnuplot scripts next
/// to it. Returns every file written.
pub fn aggregate_and_emit(records: &[BenchRecord], out_path: &Path, format: OutputFormat) -> Result<Vec<PathBuf>> {
    let rows = aggregate(records)?;
    if let Some(dir) = out_path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    match format {
        OutputFormat::Csv => write_csv(&rows, fs::File::create(out_path)?)?,
        OutputFormat::Json => fs::write(out_path, serde_json::to_string_pretty(&rows)?)?,
    }
    let mut written = vec![out_path.to_path_buf()];
    if format == OutputFormat::Csv {
        let data = out_path.file_name().and_then(|s| s.to_str()).unwrap_or("bench.csv");
        let dir = out_path.parent().unwrap_or(Path::new(""));
        let algos = distinct(rows.iter().map(|r| r.algorithm.to_string()));
        for (name, script) in [
            ("error_vs_logk.gp", error_vs_logk(data, &algos)),
            ("error_vs_snr.gp", error_vs_snr(data, &algos)),
            ("cond_vs_logk.gp", cond_vs_logk(data, &algos)),
        ] {
            let path = dir.join(name);
            fs::write(&path, script)?;
            written.push(path);
        }
    }
    Ok(written)
}

fn distinct(items: impl Iterator<Item = String>) -> Vec<String> {
    let mut out: Vec<String> = Vec::new();
    for s in items {
        if !out.contains(&s) {
            out.push(s);
        }
    }
    out
}

fn preamble(data: &str, algos: &[String], out: &str) -> String {
    format!(
        "set datafile separator ','\n\
         set datafile missing ''\n\
         set key autotitle columnhead\n\
         set terminal pngcairo size 800,600\n\
         set output '{out}'\n\
         data = '{data}'\n\
         algos = \"{}\"\n",
        algos.join(" ")
    )
}

fn error_vs_logk(data: &str, algos: &[String]) -> String {
    preamble(data, algos, "error_vs_logk.png")
        + "set xlabel 'log2 k'\n\
           set ylabel 'mean l2 error'\n\
           set logscale y\n\
           plot for [a in algos] data every ::1 using (strcol(3) eq a ? log($1)/log(2) : 1/0):9 \\\n\
           \x20   with linespoints title a\n"
}

fn error_vs_snr(data: &str, algos: &[String]) -> String {
    preamble(data, algos, "error_vs_snr.png")
        + "set xlabel 'SNR (dB)'\n\
           set ylabel 'mean l2 error'\n\
           set logscale y\n\
           set multiplot layout 1,3\n\
           do for [kk in \"8 32 256\"] {\n\
           \x20   set title sprintf('k = %s', kk)\n\
           \x20   plot for [a in algos] data every ::1 \\\n\
           \x20       using (strcol(3) eq a && strcol(1) eq kk ? $6 : 1/0):9 with linespoints title a\n\
           }\n\
           unset multiplot\n"
}

fn cond_vs_logk(data: &str, algos: &[String]) -> String {
    preamble(data, algos, "cond_vs_logk.png")
        + "set xlabel 'log2 k'\n\
           set ylabel 'mean log10 condition number'\n\
           plot for [a in algos] data every ::1 using (strcol(3) eq a ? log($1)/log(2) : 1/0):14 \\\n\
           \x20   with linespoints title a\n"
}
