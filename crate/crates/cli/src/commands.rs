//! The five subcommands. Each returns its payload records and a table; main
//! adds the run header and handles output.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use ngg_core::gof::{compare_models, fit_model, gof_report, CompareOptions, ModelKind};
use ngg_core::montecarlo::{run_study, StartPolicy, StudyOptions};
use ngg_core::rng::entropy_seed;
use ngg_core::sampling::{build_envelope, sample_with_envelope};
use ngg_core::{Exec, NwwModel};

use crate::error::{CliError, CliResult};
use crate::ingest::{load, IngestionSpec};
use crate::report::{comparison_table, descriptive_table, fit_table, simulation_table, Record};
use crate::stats::describe;

pub struct Outcome {
    pub records: Vec<Record>,
    pub table: String,
    pub seed: Option<u64>,
    pub warnings: Vec<String>,
}

/// The given seed, or a fresh one from entropy that is echoed to stderr.
pub fn resolve_seed(seed: Option<u64>) -> u64 {
    seed.unwrap_or_else(|| {
        let s = entropy_seed();
        eprintln!("seed: {s} (drawn from entropy; pass --seed {s} to reproduce)");
        s
    })
}

pub fn parse_params(s: &str) -> CliResult<NwwModel> {
    let v: Vec<f64> = s
        .split(',')
        .map(|t| t.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|_| CliError::Input(format!("--params expects k1,l1,k2,l2 as numbers, got `{s}`")))?;
    match v.as_slice() {
        [k1, l1, k2, l2] => NwwModel::nww(*k1, *l1, *k2, *l2).map_err(CliError::input),
        _ => Err(CliError::Input(format!("--params expects 4 values, got {}", v.len()))),
    }
}

pub fn parse_sizes(s: &str) -> CliResult<Vec<usize>> {
    s.split(',')
        .map(|t| {
            t.trim()
                .parse::<usize>()
                .map_err(|_| CliError::Input(format!("--sizes expects comma-separated integers, got `{s}`")))
        })
        .collect()
}

/// `lo:hi:step` → grid points lo, lo + step, … ≤ hi.
pub fn parse_grid(s: &str) -> CliResult<Vec<f64>> {
    let parts: Vec<f64> = s
        .split(':')
        .map(|t| t.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|_| CliError::Input(format!("--grid expects lo:hi:step, got `{s}`")))?;
    let [lo, hi, step] = parts[..] else {
        return Err(CliError::Input(format!("--grid expects lo:hi:step, got `{s}`")));
    };
    if !(step > 0.0 && hi >= lo && lo.is_finite() && hi.is_finite()) {
        return Err(CliError::Input(format!("--grid needs lo <= hi and a positive step, got `{s}`")));
    }
    let count = ((hi - lo) / step + 1e-9).floor() as usize + 1;
    if count > 10_000_000 {
        return Err(CliError::Input(format!("--grid would produce {count} points")));
    }
    Ok((0..count).map(|i| lo + step * i as f64).collect())
}

fn parse_models(s: Option<&str>) -> CliResult<Vec<ModelKind>> {
    match s {
        None => Ok(ModelKind::ALL.to_vec()),
        Some(s) => s
            .split(',')
            .map(|m| m.trim().parse::<ModelKind>().map_err(CliError::input))
            .collect(),
    }
}

fn output_writer(out: Option<&Path>) -> CliResult<Box<dyn Write>> {
    Ok(match out {
        Some(p) => Box::new(BufWriter::new(File::create(p).map_err(|e| {
            CliError::Input(format!("cannot create {}: {e}", p.display()))
        })?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

pub fn cmd_fit(spec: &IngestionSpec, model: &str, starts: usize, seed: Option<u64>) -> CliResult<Outcome> {
    let kind: ModelKind = model.parse().map_err(CliError::input)?;
    let ing = load(spec)?;
    let seed = resolve_seed(seed);
    let desc = describe(ing.data.observations());
    let opts = CompareOptions {
        starts,
        seed,
        exec: Exec::default(),
    };
    let (fit, fitted) = fit_model(kind, &ing.data, &opts).map_err(CliError::numerical)?;
    let gof = gof_report(&fit, &fitted, &ing.data).map_err(CliError::numerical)?;
    let mut warnings = ing.warnings;
    if gof.clamped_probabilities > 0 {
        warnings.push(format!("{} fitted probabilities clamped away from 0 or 1", gof.clamped_probabilities));
    }
    let table = format!(
        "{}\n{}",
        descriptive_table(&desc, &ing.column_label),
        fit_table(&fit, &gof)
    );
    Ok(Outcome {
        records: vec![Record::Descriptive(desc), Record::Fit { fit, gof }],
        table,
        seed: Some(seed),
        warnings,
    })
}

pub fn cmd_compare(spec: &IngestionSpec, models: Option<&str>, starts: usize, seed: Option<u64>) -> CliResult<Outcome> {
    let models = parse_models(models)?;
    let ing = load(spec)?;
    let seed = resolve_seed(seed);
    let desc = describe(ing.data.observations());
    let rows = compare_models(
        &ing.data,
        &models,
        &CompareOptions {
            starts,
            seed,
            exec: Exec::default(),
        },
    )
    .map_err(CliError::from_core)?;
    let mut warnings = ing.warnings;
    for r in &rows {
        if let Some(e) = &r.error {
            warnings.push(format!("{} failed: {e}", r.model));
        }
    }
    if rows.iter().all(|r| r.gof.is_none()) {
        return Err(CliError::Numerical("every model failed to fit".into()));
    }
    let table = format!(
        "{}\n{}",
        descriptive_table(&desc, &ing.column_label),
        comparison_table(&rows)
    );
    let mut records = vec![Record::Descriptive(desc)];
    records.extend(rows.into_iter().map(Record::Comparison));
    Ok(Outcome {
        records,
        table,
        seed: Some(seed),
        warnings,
    })
}

pub struct SimulateArgs<'a> {
    pub params: &'a str,
    pub sizes: &'a str,
    pub reps: usize,
    pub seed: Option<u64>,
    pub start: StartPolicy,
    pub starts: usize,
}

pub fn cmd_simulate(a: &SimulateArgs) -> CliResult<Outcome> {
    let model = parse_params(a.params)?;
    let sizes = parse_sizes(a.sizes)?;
    let seed = resolve_seed(a.seed);
    let mut opts = StudyOptions {
        start: a.start,
        ..StudyOptions::default()
    };
    opts.fit.starts = a.starts;
    let report = run_study(&model, &sizes, a.reps, seed, &opts).map_err(CliError::from_core)?;
    let mut warnings = Vec::new();
    if !report.valid {
        warnings.push("more than 5% of fits failed at some sample size; report flagged invalid".to_string());
    }
    Ok(Outcome {
        table: simulation_table(&report),
        records: vec![Record::Simulation(report)],
        seed: Some(seed),
        warnings,
    })
}

pub fn cmd_sample(params: &str, n: usize, seed: Option<u64>, out: Option<&Path>) -> CliResult<Outcome> {
    let model = parse_params(params)?;
    if n == 0 {
        return Err(CliError::Input("-n must be at least 1".into()));
    }
    let seed = resolve_seed(seed);
    let env = build_envelope(&model).map_err(CliError::numerical)?;
    let s = sample_with_envelope(&model, &env, n, seed, Exec::default()).map_err(CliError::numerical)?;
    let mut w = output_writer(out)?;
    for v in &s.values {
        writeln!(w, "{v}")?;
    }
    w.flush()?;
    let table = format!(
        "drew {n} values; acceptance rate {:.4} ({} proposals); envelope [{}, {}] x [0, {}]\n",
        s.acceptance_rate,
        s.proposals,
        env.x_lo,
        env.x_hi,
        env.height()
    );
    Ok(Outcome {
        records: vec![Record::Sample {
            n,
            proposals: s.proposals,
            acceptance_rate: s.acceptance_rate,
            envelope: env,
        }],
        table,
        seed: Some(seed),
        warnings: Vec::new(),
    })
}

pub struct PlotArgs<'a> {
    pub params: &'a str,
    pub grid: &'a str,
    pub out: Option<&'a Path>,
    pub histogram: Option<(IngestionSpec, usize, Option<PathBuf>)>,
}

/// Equal-width bins over the data range: (lo, hi, count, density).
pub fn histogram(x: &[f64], bins: usize) -> Vec<(f64, f64, usize, f64)> {
    let lo = x.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = x.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let width = if hi > lo { (hi - lo) / bins as f64 } else { 1.0 };
    let mut counts = vec![0usize; bins];
    for &v in x {
        let i = (((v - lo) / width) as usize).min(bins - 1);
        counts[i] += 1;
    }
    let n = x.len() as f64;
    counts
        .into_iter()
        .enumerate()
        .map(|(i, c)| {
            let a = lo + width * i as f64;
            (a, a + width, c, c as f64 / (n * width))
        })
        .collect()
}

pub fn cmd_plotdata(a: &PlotArgs) -> CliResult<Outcome> {
    let model = parse_params(a.params)?;
    let grid = parse_grid(a.grid)?;
    let mut warnings = Vec::new();
    let hist = match &a.histogram {
        Some((spec, bins, path)) => {
            if *bins == 0 {
                return Err(CliError::Input("--bins must be at least 1".into()));
            }
            let ing = load(spec)?;
            warnings.extend(ing.warnings);
            Some((histogram(ing.data.observations(), *bins), path.clone()))
        }
        None => None,
    };
    let mut w = output_writer(a.out)?;
    writeln!(w, "x,pdf,cdf")?;
    for &x in &grid {
        let pdf = model.pdf(x).unwrap_or(f64::INFINITY);
        writeln!(w, "{x},{pdf},{}", model.cdf(x))?;
    }
    w.flush()?;
    drop(w);
    let bins = hist.as_ref().map(|(h, _)| h.len());
    if let Some((h, path)) = hist {
        let mut w = output_writer(path.as_deref())?;
        if path.is_none() {
            writeln!(w)?;
        }
        writeln!(w, "bin_lo,bin_hi,count,density")?;
        for (lo, hi, c, d) in h {
            writeln!(w, "{lo},{hi},{c},{d}")?;
        }
        w.flush()?;
    }
    Ok(Outcome {
        table: format!("{} grid points written\n", grid.len()),
        records: vec![Record::Plotdata {
            points: grid.len(),
            histogram_bins: bins,
        }],
        seed: None,
        warnings,
    })
}
