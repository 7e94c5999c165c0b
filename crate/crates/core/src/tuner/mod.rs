//! Offline configuration of CMCS: the gap objective minimised during tuning,
//! brute-force configurators for VNS and operator probabilities, an
//! evolutionary configurator for k-row and MCHH matrices, and the registry of
//! best-known objective values.

mod brute;
mod krow;
mod registry;

use std::sync::Arc;

use rayon::prelude::*;
use rayon::ThreadPool;

use crate::components::ComponentKind;
use crate::engine::{self, CmcsConfig, RunParams, Termination};
use crate::error::{BbqpError, Result};
use crate::generator::{self, Preset};
use crate::instance::BbqpInstance;
use crate::seed;

pub use brute::{
    brute_force, brute_force_opprob, brute_force_vns, opprob_candidate_count, opprob_candidates,
    vns_candidates, BruteForceOutcome, BruteForceSettings, MAX_OPPROB_COMPONENTS, WEIGHT_SET,
};
pub use krow::{tune_krow, GenerationStats, TunedConfig, TunerSettings};
pub use registry::{best_known_update, BestKnownRegistry};

/// Default per-run budget during tuning.
pub const DEFAULT_RUN_MILLIS: u64 = 100;
/// Default number of repeats per training instance.
pub const DEFAULT_REPEATS: usize = 10;
/// A capped evaluation stops once its mean gap is certain to exceed
/// `CAP_FACTOR * best + CAP_SLACK`, where `best` is the incumbent's gap.
pub const CAP_FACTOR: f64 = 2.0;
pub const CAP_SLACK: f64 = 0.01;

/// One training instance with its repeat count and reference objective.
#[derive(Debug, Clone)]
pub struct TrainingInstance {
    pub id: String,
    pub instance: Arc<BbqpInstance>,
    pub repeats: usize,
    pub best_known: f64,
}

/// The training set `T` and everything needed to score a configuration on it.
#[derive(Clone)]
pub struct TuningProblem {
    pub instances: Vec<TrainingInstance>,
    pub termination: Termination,
    /// Components the configurators may use.
    pub pool: Vec<ComponentKind>,
    pub seed_base: u64,
    threads: Option<Arc<ThreadPool>>,
}

impl std::fmt::Debug for TuningProblem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("TuningProblem")
            .field("instances", &self.instances.iter().map(|t| &t.id).collect::<Vec<_>>())
            .field("termination", &self.termination)
            .field("pool", &self.pool)
            .field("seed_base", &self.seed_base)
            .field("jobs", &self.jobs())
            .finish()
    }
}

impl TuningProblem {
    pub fn new(
        instances: Vec<TrainingInstance>,
        termination: Termination,
        pool: Vec<ComponentKind>,
        seed_base: u64,
    ) -> Result<Self> {
        if instances.is_empty() {
            return Err(BbqpError::InvalidArgument("training set is empty".into()));
        }
        for t in &instances {
            if t.repeats == 0 {
                return Err(BbqpError::InvalidArgument(format!("{}: repeat count must be at least 1", t.id)));
            }
            if !(t.best_known.is_finite() && t.best_known > 0.0) {
                return Err(BbqpError::InvalidArgument(format!(
                    "{}: best-known objective must be positive, got {}",
                    t.id, t.best_known
                )));
            }
        }
        if pool.is_empty() {
            return Err(BbqpError::InvalidArgument("component pool is empty".into()));
        }
        Ok(TuningProblem {
            instances,
            termination,
            pool,
            seed_base,
            threads: None,
        })
    }

    /// Evaluates runs on up to `jobs` threads. Wall-clock budgets are only
    /// comparable when `jobs` does not exceed the available cores.
    pub fn with_jobs(mut self, jobs: usize) -> Result<Self> {
        self.threads = if jobs > 1 {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(jobs)
                .build()
                .map_err(|e| BbqpError::InvalidArgument(format!("cannot start {jobs} worker threads: {e}")))?;
            Some(Arc::new(pool))
        } else {
            None
        };
        Ok(self)
    }

    pub fn jobs(&self) -> usize {
        self.threads.as_ref().map_or(1, |p| p.current_num_threads())
    }

    pub fn with_pool(mut self, pool: Vec<ComponentKind>) -> Self {
        self.pool = pool;
        self
    }

    pub fn with_seed_base(mut self, seed_base: u64) -> Self {
        self.seed_base = seed_base;
        self
    }

    /// Number of runs `|T|` for one evaluation.
    pub fn run_count(&self) -> usize {
        self.instances.iter().map(|t| t.repeats).sum()
    }

    /// Seed of repeat `r` on training instance `t`.
    pub fn run_seed(&self, t: usize, r: usize) -> u64 {
        seed::run_seed(self.seed_base, &self.instances[t].id, r as u64)
    }
}

/// Generates the standard training set: one 200×500 instance per family.
/// Returns `(id, instance)` pairs; best-known values are up to the caller.
pub fn training_instances(base_seed: u64) -> Result<Vec<(String, BbqpInstance)>> {
    Preset::Training
        .entries(base_seed)
        .into_iter()
        .map(|(family, m, n, s)| {
            let inst = generator::generate(family, m, n, s)?;
            Ok((inst.default_id(), inst))
        })
        .collect()
}

/// Relative gap in percent of `achieved` to `best_known`.
pub fn gap_percent(best_known: f64, achieved: f64) -> f64 {
    (best_known - achieved) / best_known * 100.0
}

/// Mean of the per-run gaps.
pub fn mean_gap(gaps: &[f64]) -> f64 {
    if gaps.is_empty() {
        return 0.0;
    }
    gaps.iter().sum::<f64>() / gaps.len() as f64
}

/// Result of one evaluation with per-run detail.
#[derive(Debug, Clone)]
pub struct Evaluation {
    pub mean_gap: f64,
    /// `(instance index, repeat, objective)` for every run.
    pub runs: Vec<(usize, usize, f64)>,
}

impl Evaluation {
    /// Highest objective observed on each training instance.
    pub fn best_per_instance(&self, count: usize) -> Vec<f64> {
        let mut best = vec![f64::NEG_INFINITY; count];
        for &(t, _, obj) in &self.runs {
            best[t] = best[t].max(obj);
        }
        best
    }
}

/// Mean percent gap of `config` over the training multiset.
pub fn evaluate_config(config: &CmcsConfig, problem: &TuningProblem) -> Result<f64> {
    evaluate_detailed(config, problem, 1).map(|e| e.mean_gap)
}

/// Like [`evaluate_config`] with every repeat count multiplied by
/// `repeat_factor`. The first `repeats` seeds per instance coincide with the
/// plain evaluation.
pub fn evaluate_detailed(config: &CmcsConfig, problem: &TuningProblem, repeat_factor: usize) -> Result<Evaluation> {
    config.validate()?;
    let factor = repeat_factor.max(1);
    let jobs: Vec<(usize, usize)> = problem
        .instances
        .iter()
        .enumerate()
        .flat_map(|(t, ti)| (0..ti.repeats * factor).map(move |r| (t, r)))
        .collect();
    let one = |&(t, r): &(usize, usize)| -> Result<(usize, usize, f64)> {
        let params = RunParams::new(problem.termination, problem.run_seed(t, r));
        let result = engine::run(config, &problem.instances[t].instance, &params)?;
        Ok((t, r, result.best_objective))
    };
    let runs: Vec<(usize, usize, f64)> = match &problem.threads {
        Some(pool) => pool.install(|| jobs.par_iter().map(one).collect::<Result<_>>())?,
        None => jobs.iter().map(one).collect::<Result<_>>()?,
    };
    let gaps: Vec<f64> = runs
        .iter()
        .map(|&(t, _, obj)| gap_percent(problem.instances[t].best_known, obj))
        .collect();
    Ok(Evaluation {
        mean_gap: mean_gap(&gaps),
        runs,
    })
}

/// Cap used against an incumbent with mean gap `best`.
pub fn capping_bound(best: f64) -> f64 {
    CAP_FACTOR * best.max(0.0) + CAP_SLACK
}

/// Result of [`evaluate_capped`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Capped {
    /// Every run finished; the mean gap equals [`evaluate_config`]'s.
    Complete(f64),
    /// Stopped early; holds a lower bound on the mean gap above the cap.
    Stopped(f64),
}

impl Capped {
    pub fn gap(self) -> f64 {
        match self {
            Capped::Complete(g) | Capped::Stopped(g) => g,
        }
    }

    pub fn is_complete(self) -> bool {
        matches!(self, Capped::Complete(_))
    }
}

/// Like [`evaluate_config`], but stops once the runs so far push the mean
/// gap above `cap`. Unseen runs count as zero gap, which is a lower bound as
/// long as runs do not beat the best-known values. Runs cycle through the
/// instances so each of them is sampled early.
pub fn evaluate_capped(config: &CmcsConfig, problem: &TuningProblem, cap: f64) -> Result<Capped> {
    config.validate()?;
    let most = problem.instances.iter().map(|t| t.repeats).max().unwrap_or(0);
    let jobs: Vec<(usize, usize)> = (0..most)
        .flat_map(|r| {
            problem
                .instances
                .iter()
                .enumerate()
                .filter(move |(_, ti)| r < ti.repeats)
                .map(move |(t, _)| (t, r))
        })
        .collect();
    let n = jobs.len() as f64;
    let gap = |&(t, r): &(usize, usize)| -> Result<((usize, usize), f64)> {
        let params = RunParams::new(problem.termination, problem.run_seed(t, r));
        let result = engine::run(config, &problem.instances[t].instance, &params)?;
        Ok(((t, r), gap_percent(problem.instances[t].best_known, result.best_objective)))
    };
    let chunk = problem.jobs().max(1);
    let mut done = Vec::with_capacity(jobs.len());
    let mut sum = 0.0;
    for part in jobs.chunks(chunk) {
        let gaps: Vec<((usize, usize), f64)> = match &problem.threads {
            Some(pool) => pool.install(|| part.par_iter().map(gap).collect::<Result<_>>())?,
            None => part.iter().map(gap).collect::<Result<_>>()?,
        };
        sum += gaps.iter().map(|g| g.1).sum::<f64>();
        done.extend(gaps);
        if sum / n > cap && done.len() < jobs.len() {
            return Ok(Capped::Stopped(sum / n));
        }
    }
    // Same summation order as the uncapped evaluation.
    done.sort_by_key(|g| g.0);
    let gaps: Vec<f64> = done.into_iter().map(|g| g.1).collect();
    Ok(Capped::Complete(mean_gap(&gaps)))
}
