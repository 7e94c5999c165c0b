use std::fmt::Write as _;
use std::path::PathBuf;

use log::{info, warn};
use rayon::prelude::*;

use bbqp_core::engine::{self, CmcsConfig, RunParams, Termination};
use bbqp_core::seed;
use bbqp_core::tuner::{gap_percent, BestKnownRegistry};
use bbqp_core::BbqpInstance;

use crate::error::{CliError, CliResult};

pub const CSV_HEADER: &str = "instance,config,budget_ms,objective,best_known,gap_percent";

#[derive(Debug, Clone)]
pub struct BenchOptions {
    pub budget_ms: u64,
    /// `(n, ms)`: instances whose larger dimension is at least `n` get `ms`.
    pub size_budgets: Vec<(usize, u64)>,
    /// Iteration budget instead of wall-clock; makes runs reproducible.
    pub iterations: Option<u64>,
    pub seeds: usize,
    pub seed: u64,
    pub jobs: usize,
    pub polish: bool,
}

impl BenchOptions {
    pub fn termination(&self, instance: &BbqpInstance) -> Termination {
        if let Some(n) = self.iterations {
            return Termination::Iterations(n);
        }
        let size = instance.m().max(instance.n());
        let ms = self
            .size_budgets
            .iter()
            .filter(|(n, _)| size >= *n)
            .max_by_key(|(n, _)| *n)
            .map_or(self.budget_ms, |&(_, ms)| ms);
        Termination::millis(ms)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchRow {
    pub instance: String,
    pub config: String,
    pub budget_ms: u128,
    pub objective: Option<f64>,
    pub best_known: Option<f64>,
    pub gap: Option<f64>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchSummary {
    pub config: String,
    pub mean_gap: f64,
    pub max_gap: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchReport {
    pub rows: Vec<BenchRow>,
    pub summaries: Vec<BenchSummary>,
}

/// Quotes a CSV field when it contains a separator, quote or line break.
pub fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn opt(v: Option<f64>, precision: Option<usize>) -> String {
    match (v, precision) {
        (Some(v), Some(p)) => format!("{v:.p$}"),
        (Some(v), None) => format!("{v}"),
        (None, _) => String::new(),
    }
}

impl BenchReport {
    /// CSV with one row per run followed by `MEAN` and `MAX` rows per
    /// configuration.
    pub fn to_csv(&self) -> String {
        let mut s = String::new();
        writeln!(s, "{CSV_HEADER}").unwrap();
        for r in &self.rows {
            writeln!(
                s,
                "{},{},{},{},{},{}",
                csv_field(&r.instance),
                csv_field(&r.config),
                r.budget_ms,
                opt(r.objective, None),
                opt(r.best_known, None),
                opt(r.gap, Some(4))
            )
            .unwrap();
        }
        for sm in &self.summaries {
            let config = csv_field(&sm.config);
            writeln!(s, "MEAN,{config},,,,{:.4}", sm.mean_gap).unwrap();
            writeln!(s, "MAX,{config},,,,{:.4}", sm.max_gap).unwrap();
        }
        s
    }
}

/// Runs every configuration on every instance with `options.seeds` seeds,
/// raises registry records where a run beat them, then reports gaps against
/// the updated records. A failing run is reported in its row and the rest
/// of the benchmark continues.
pub fn bench(
    instances: &[(String, BbqpInstance)],
    configs: &[CmcsConfig],
    options: &BenchOptions,
    registry: &mut BestKnownRegistry,
) -> CliResult<BenchReport> {
    let mut tasks = Vec::new();
    for (t, (id, _)) in instances.iter().enumerate() {
        for (c, config) in configs.iter().enumerate() {
            for s in 0..options.seeds.max(1) {
                let label = format!("{id}/{}", config.name);
                tasks.push((t, c, seed::run_seed(options.seed, &label, s as u64)));
            }
        }
    }
    let one = |&(t, c, run_seed): &(usize, usize, u64)| -> (usize, usize, u128, Result<f64, String>) {
        let instance = &instances[t].1;
        let termination = options.termination(instance);
        let mut params = RunParams::new(termination, run_seed);
        params.polish = options.polish;
        let outcome = engine::run(&configs[c], instance, &params)
            .map(|r| r.best_objective)
            .map_err(|e| e.to_string());
        (t, c, termination.budget_ms(), outcome)
    };
    let results: Vec<_> = if options.jobs > 1 {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(options.jobs)
            .build()
            .map_err(|e| CliError::invalid(format!("cannot start {} threads: {e}", options.jobs)))?;
        pool.install(|| tasks.par_iter().map(one).collect())
    } else {
        tasks.iter().map(one).collect()
    };

    let mut best = vec![f64::NEG_INFINITY; instances.len()];
    for (t, _, _, outcome) in &results {
        if let Ok(obj) = outcome {
            best[*t] = best[*t].max(*obj);
        }
    }
    for (t, (id, _)) in instances.iter().enumerate() {
        if best[t].is_finite() && registry.update(id, best[t])? {
            info!("new best known for {id}: {}", best[t]);
        }
    }

    let mut rows = Vec::with_capacity(results.len());
    let mut row_config = Vec::with_capacity(results.len());
    for (t, c, budget_ms, outcome) in results {
        row_config.push(c);
        let id = &instances[t].0;
        let best_known = registry.get(id);
        let (objective, error) = match outcome {
            Ok(v) => (Some(v), None),
            Err(e) => {
                warn!("{id} with {}: {e}", configs[c].name);
                (None, Some(e))
            }
        };
        let gap = match (objective, best_known) {
            (Some(obj), Some(b)) if b > 0.0 => Some(gap_percent(b, obj)),
            _ => None,
        };
        rows.push(BenchRow {
            instance: id.clone(),
            config: configs[c].name.clone(),
            budget_ms,
            objective,
            best_known,
            gap,
            error,
        });
    }
    let summaries = configs
        .iter()
        .enumerate()
        .map(|(c, config)| {
            let gaps: Vec<f64> = rows
                .iter()
                .zip(&row_config)
                .filter(|(_, &rc)| rc == c)
                .filter_map(|(r, _)| r.gap)
                .collect();
            BenchSummary {
                config: config.name.clone(),
                mean_gap: bbqp_core::tuner::mean_gap(&gaps),
                max_gap: gaps.iter().copied().fold(0.0, f64::max),
            }
        })
        .collect();
    Ok(BenchReport { rows, summaries })
}

/// Parses `N=MS` size budget rules.
pub fn parse_size_budget(s: &str) -> Result<(usize, u64), String> {
    let (n, ms) = s.split_once('=').ok_or_else(|| format!("expected N=MS, got `{s}`"))?;
    let n = n.trim().parse().map_err(|_| format!("bad size `{n}`"))?;
    let ms = ms.trim().parse().map_err(|_| format!("bad budget `{ms}`"))?;
    Ok((n, ms))
}

pub fn registry_for(explicit: Option<PathBuf>, inputs: &[PathBuf]) -> CliResult<BestKnownRegistry> {
    let path = explicit.unwrap_or_else(|| {
        let first = &inputs[0];
        let dir = if first.is_dir() {
            first.clone()
        } else {
            first.parent().map(PathBuf::from).unwrap_or_default()
        };
        crate::files::default_registry(&dir)
    });
    Ok(BestKnownRegistry::open(path)?)
}
