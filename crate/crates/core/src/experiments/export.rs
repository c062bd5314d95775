use std::fs::{self, File};
use std::path::{Path, PathBuf};

use super::runner::ScenarioResult;
use super::ExperimentError;

pub const SUMMARY_HEADER: [&str; 10] = [
    "scenario_id",
    "method",
    "sweep_param",
    "sweep_value",
    "tau_bps",
    "total_power_w",
    "feasible",
    "outer_candidates",
    "bisect_iters",
    "wall_ms",
];

pub const DETAIL_HEADER: [&str; 8] =
    ["scenario_id", "method", "user_index", "gain", "eta", "p_t_w", "p_c_w", "rate_bps"];

#[derive(Debug, Clone, Copy, Default)]
pub struct ExportOptions {
    /// Write measured wall-clock times; otherwise `wall_ms` is 0 so that
    /// repeated runs produce identical files.
    pub timings: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExportPaths {
    pub summary: PathBuf,
    pub detail: PathBuf,
}

/// 17 significant digits, enough to round-trip any `f64`.
pub fn format_number(v: f64) -> String {
    format!("{v:.16e}")
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> ExperimentError + '_ {
    move |source| ExperimentError::Io { path: path.to_path_buf(), source }
}

fn csv_err(path: &Path) -> impl Fn(csv::Error) -> ExperimentError + '_ {
    move |e| ExperimentError::Io { path: path.to_path_buf(), source: e.into() }
}

fn writer(path: &Path) -> Result<csv::Writer<File>, ExperimentError> {
    let file = File::create(path).map_err(io_err(path))?;
    Ok(csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(file))
}

/// Writes `summary.csv` and `detail.csv` into `dir`, creating it if needed.
pub fn export_csv(
    results: &[ScenarioResult],
    dir: &Path,
    opts: &ExportOptions,
) -> Result<ExportPaths, ExperimentError> {
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    let summary = dir.join("summary.csv");
    let detail = dir.join("detail.csv");

    let mut w = writer(&summary)?;
    w.write_record(SUMMARY_HEADER).map_err(csv_err(&summary))?;
    for res in results {
        let (param, value) = match res.sweep {
            Some((p, v)) => (p.as_str().to_string(), format_number(v)),
            None => (String::new(), String::new()),
        };
        for run in &res.runs {
            let r = &run.report;
            let wall = if opts.timings { run.wall_ms } else { 0.0 };
            w.write_record([
                res.scenario_id.clone(),
                r.method.to_string(),
                param.clone(),
                value.clone(),
                format_number(r.tau_bps),
                format_number(r.allocation.total_power()),
                r.feasible.to_string(),
                r.outer_candidates_evaluated.to_string(),
                r.bisection_iterations_total.to_string(),
                format_number(wall),
            ])
            .map_err(csv_err(&summary))?;
        }
    }
    w.flush().map_err(io_err(&summary))?;

    let mut w = writer(&detail)?;
    w.write_record(DETAIL_HEADER).map_err(csv_err(&detail))?;
    for res in results {
        for run in &res.runs {
            let a = &run.report.allocation;
            for i in 0..a.n_users() {
                w.write_record([
                    res.scenario_id.clone(),
                    run.report.method.to_string(),
                    i.to_string(),
                    format_number(res.gains[i]),
                    format_number(a.eta[i]),
                    format_number(a.p_t_w[i]),
                    format_number(a.p_c_w[i]),
                    format_number(a.rates_bps[i]),
                ])
                .map_err(csv_err(&detail))?;
            }
        }
    }
    w.flush().map_err(io_err(&detail))?;
    Ok(ExportPaths { summary, detail })
}
