use std::fmt::Write as _;
use std::sync::Arc;

use log::info;

use bbqp_core::engine::{self, make_uniform, shipped, CmcsConfig, RunParams, Termination};
use bbqp_core::seed;
use bbqp_core::tuner::{
    brute_force_opprob, brute_force_vns, tune_krow, BestKnownRegistry, BruteForceSettings, GenerationStats,
    TrainingInstance, TunerSettings, TuningProblem,
};
use bbqp_core::{BbqpInstance, ComponentKind};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Schema {
    /// Evolved k-row matrices.
    Krow,
    /// Brute force over VNS orderings.
    Vns,
    /// Brute force over operator probabilities.
    Opprob,
    /// Evolved single shared matrix.
    Mchh,
}

#[derive(Debug, Clone)]
pub struct TuneOptions {
    pub schema: Schema,
    pub k: usize,
    pub budget_ms: u64,
    pub repeats: usize,
    pub pool: Vec<ComponentKind>,
    pub seed: u64,
    pub jobs: usize,
    pub population: Option<usize>,
    pub generations: Option<usize>,
    pub max_candidates: Option<usize>,
    pub top: usize,
    pub reeval: usize,
    pub capping: bool,
}

#[derive(Debug, Clone)]
pub struct TuneOutcome {
    pub config: CmcsConfig,
    pub gap: f64,
    pub log: Vec<GenerationStats>,
    pub evaluations: usize,
}

impl TuneOutcome {
    pub fn log_csv(&self) -> String {
        let mut s = String::from("generation,best_gap,mean_gap\n");
        for g in &self.log {
            writeln!(s, "{},{:.6},{:.6}", g.generation, g.best_gap, g.mean_gap).unwrap();
        }
        s
    }
}

/// Reference objective for an instance without a registry entry: the best
/// of the shipped 2-row and uniform configurations at `budget`.
pub fn estimate_best_known(instance: &BbqpInstance, budget: Termination, seed: u64) -> CliResult<f64> {
    let mut best = f64::NEG_INFINITY;
    for config in [shipped::two_row(), make_uniform(&ComponentKind::ALL)?] {
        let r = engine::run(&config, instance, &RunParams::new(budget, seed))?;
        best = best.max(r.best_objective);
    }
    Ok(best)
}

/// Builds the training problem, filling missing registry records with
/// reference runs at ten times the tuning budget.
pub fn training_problem(
    instances: Vec<(String, BbqpInstance)>,
    registry: &mut BestKnownRegistry,
    options: &TuneOptions,
) -> CliResult<TuningProblem> {
    let mut training = Vec::with_capacity(instances.len());
    for (id, instance) in instances {
        let best_known = match registry.get(&id) {
            Some(v) => v,
            None => {
                let budget = Termination::millis(options.budget_ms.saturating_mul(10).max(1));
                let v = estimate_best_known(&instance, budget, seed::derive(options.seed, &["reference", &id]))?;
                info!("reference objective for {id}: {v}");
                registry.update(&id, v)?;
                v
            }
        };
        if best_known <= 0.0 {
            return Err(CliError::invalid(format!(
                "{id}: best-known objective {best_known} is not positive, gaps are undefined"
            )));
        }
        training.push(TrainingInstance {
            id,
            instance: Arc::new(instance),
            repeats: options.repeats,
            best_known,
        });
    }
    let problem = TuningProblem::new(
        training,
        Termination::millis(options.budget_ms),
        options.pool.clone(),
        options.seed,
    )?;
    Ok(problem.with_jobs(options.jobs)?)
}

pub fn tune(problem: &TuningProblem, options: &TuneOptions) -> CliResult<TuneOutcome> {
    match options.schema {
        Schema::Krow | Schema::Mchh => {
            let mut settings = if options.schema == Schema::Mchh {
                TunerSettings::mchh(options.pool.len())
            } else {
                TunerSettings {
                    k: options.k,
                    ..TunerSettings::default()
                }
            };
            settings.capping = options.capping;
            if let Some(p) = options.population {
                settings.population = p;
                settings.initial_population = 2 * p;
            }
            if let Some(g) = options.generations {
                settings.generations = g;
            }
            settings.max_evaluations = options.max_candidates;
            settings.final_reeval_factor = options.reeval;
            let mut rng = seed::rng_from_seed(seed::derive(options.seed, &["evolution"]));
            let out = tune_krow(problem, &settings, &mut rng)?;
            Ok(TuneOutcome {
                config: out.config,
                gap: out.gap,
                log: out.log,
                evaluations: out.evaluations,
            })
        }
        Schema::Vns | Schema::Opprob => {
            let settings = BruteForceSettings {
                top: options.top,
                reeval_factor: options.reeval,
                max_candidates: options.max_candidates,
                seed: seed::derive(options.seed, &["sample"]),
                capping: options.capping,
            };
            let out = if options.schema == Schema::Vns {
                brute_force_vns(problem, &settings)?
            } else {
                brute_force_opprob(problem, &settings)?
            };
            let gaps: Vec<f64> = out.ranking.iter().map(|r| r.1).collect();
            let log = vec![GenerationStats {
                generation: 1,
                best_gap: gaps.first().copied().unwrap_or(f64::NAN),
                mean_gap: bbqp_core::tuner::mean_gap(&gaps),
                evaluations: out.evaluated,
            }];
            Ok(TuneOutcome {
                config: out.best,
                gap: out.gap,
                log,
                evaluations: out.evaluated,
            })
        }
    }
}
