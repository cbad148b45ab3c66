//! JSON-lines run reports and human-readable tables.
//!
//! Every line is an object with a `record` tag. The first line is always the
//! `run` record carrying `schema_version`; payload records follow.

use std::fmt::Write as _;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use ngg_core::gof::{ComparisonRow, GofReport};
use ngg_core::inference::FitResult;
use ngg_core::montecarlo::SimulationReport;
use ngg_core::sampling::Envelope;
use serde::Serialize;

use crate::error::CliResult;
use crate::stats::Descriptive;

pub const SCHEMA_VERSION: &str = "nwwfit/1";

#[derive(Debug, Clone, Serialize)]
pub struct RunHeader {
    pub schema_version: &'static str,
    pub command: String,
    pub argv: Vec<String>,
    pub seed: Option<u64>,
    pub threads: Option<usize>,
    pub wall_time_s: f64,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, Serialize)]
#[serde(tag = "record", rename_all = "snake_case")]
pub enum Record {
    Run(RunHeader),
    Descriptive(Descriptive),
    Fit {
        fit: FitResult,
        gof: GofReport,
    },
    Comparison(ComparisonRow),
    Simulation(SimulationReport),
    Sample {
        n: usize,
        proposals: u64,
        acceptance_rate: f64,
        envelope: Envelope,
    },
    Plotdata {
        points: usize,
        histogram_bins: Option<usize>,
    },
}

pub fn write_jsonl(path: &Path, records: &[Record]) -> CliResult<()> {
    let mut w = BufWriter::new(File::create(path)?);
    for r in records {
        serde_json::to_writer(&mut w, r).map_err(std::io::Error::from)?;
        w.write_all(b"\n")?;
    }
    w.flush()?;
    Ok(())
}

fn fmt_num(v: f64) -> String {
    if !v.is_finite() {
        return format!("{v}");
    }
    let a = v.abs();
    if a != 0.0 && !(1e-4..1e6).contains(&a) {
        format!("{v:.4e}")
    } else {
        format!("{v:.5}")
    }
}

pub fn descriptive_table(d: &Descriptive, label: &str) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "Descriptive statistics ({label})");
    let _ = writeln!(
        s,
        "{:>8} {:>10} {:>10} {:>10} {:>10} {:>10} {:>10} {:>16}",
        "n", "mean", "median", "sd", "min", "max", "skewness", "kurtosis(excess)"
    );
    let _ = writeln!(
        s,
        "{:>8} {:>10} {:>10} {:>10} {:>10} {:>10} {:>10} {:>16}",
        d.n,
        fmt_num(d.mean),
        fmt_num(d.median),
        fmt_num(d.sd),
        fmt_num(d.min),
        fmt_num(d.max),
        fmt_num(d.skewness),
        fmt_num(d.excess_kurtosis)
    );
    s
}

/// Estimates with standard errors in parentheses underneath.
pub fn fit_table(fit: &FitResult, gof: &GofReport) -> String {
    let mut s = String::new();
    let names = fit.estimates.names();
    let _ = write!(s, "{:<6}", "Model");
    for n in &names {
        let _ = write!(s, " {:>12}", n);
    }
    let _ = writeln!(s);
    let _ = write!(s, "{:<6}", fit.model);
    for v in fit.estimates.values() {
        let _ = write!(s, " {:>12}", fmt_num(v));
    }
    let _ = writeln!(s);
    let _ = write!(s, "{:<6}", "");
    match &fit.std_errors {
        Some(se) => {
            for v in se {
                let _ = write!(s, " {:>12}", format!("({})", fmt_num(*v)));
            }
        }
        None => {
            let _ = write!(s, " (standard errors unavailable: information matrix not positive definite)");
        }
    }
    let _ = writeln!(s);
    let _ = writeln!(s);
    s.push_str(&gof_header());
    s.push_str(&gof_line(gof, None));
    s
}

fn gof_header() -> String {
    format!(
        "{:<6} {:>5} {:>14} {:>14} {:>14} {:>14} {:>14} {:>10} {:>10}\n",
        "Model", "rank", "loglik", "AIC", "CAIC", "BIC", "HQIC", "A*", "W*"
    )
}

fn gof_line(g: &GofReport, rank: Option<usize>) -> String {
    format!(
        "{:<6} {:>5} {:>14.4} {:>14.4} {:>14.4} {:>14.4} {:>14.4} {:>10} {:>10}\n",
        g.model_name,
        rank.map(|r| r.to_string()).unwrap_or_else(|| "-".into()),
        g.loglik,
        g.aic,
        g.caic,
        g.bic,
        g.hqic,
        fmt_num(g.a_star),
        fmt_num(g.w_star)
    )
}

pub fn comparison_table(rows: &[ComparisonRow]) -> String {
    let mut s = gof_header();
    for r in rows {
        match (&r.gof, &r.error) {
            (Some(g), _) => s.push_str(&gof_line(g, r.rank)),
            (None, Some(e)) => {
                let _ = writeln!(s, "{:<6} {:>5} failed: {e}", r.model.short_name(), "-");
            }
            (None, None) => {}
        }
    }
    s
}

/// Rows are sample sizes; bias columns then MSE columns, then mean absolute
/// error.
pub fn simulation_table(r: &SimulationReport) -> String {
    let mut s = String::new();
    let names = r.scenario.names();
    let _ = writeln!(
        s,
        "scenario {:?}, {} replications{}",
        r.scenario.values(),
        r.replications,
        if r.valid { "" } else { " (INVALID: failure fraction above 5%)" }
    );
    let _ = write!(s, "{:>6}", "n");
    for block in ["bias", "mse", "mae"] {
        for n in &names {
            let _ = write!(s, " {:>12}", format!("{block}({n})"));
        }
    }
    let _ = writeln!(s, " {:>8}", "failures");
    for (i, n) in r.sample_sizes.iter().enumerate() {
        let _ = write!(s, "{n:>6}");
        for block in [&r.bias, &r.mse, &r.mean_abs_error] {
            for v in &block[i] {
                let _ = write!(s, " {:>12}", fmt_num(*v));
            }
        }
        let _ = writeln!(s, " {:>8}", r.failures[i]);
    }
    s
}
