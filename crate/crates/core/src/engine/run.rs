use std::time::{Duration, Instant};

use rand::Rng;

use crate::components::ComponentKind;
use crate::error::Result;
use crate::instance::BbqpInstance;
use crate::seed;
use crate::solution::Solution;

use super::config::CmcsConfig;
use super::polish::polish;

/// When a run stops.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    /// Stop once this much wall-clock time has elapsed; checked before every
    /// component application.
    WallClock(Duration),
    /// Stop after this many component applications. Reproducible
    /// bit-for-bit, meant for tests and replayable benchmarks.
    Iterations(u64),
}

impl Termination {
    pub fn millis(ms: u64) -> Self {
        Termination::WallClock(Duration::from_millis(ms))
    }

    /// Budget in milliseconds for reports; 0 for iteration budgets.
    pub fn budget_ms(&self) -> u128 {
        match self {
            Termination::WallClock(d) => d.as_millis(),
            Termination::Iterations(_) => 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RunParams {
    pub termination: Termination,
    pub seed: u64,
    /// Polish the incumbent after the search (default `true`).
    pub polish: bool,
}

impl RunParams {
    pub fn new(termination: Termination, seed: u64) -> Self {
        RunParams {
            termination,
            seed,
            polish: true,
        }
    }

    pub fn without_polish(mut self) -> Self {
        self.polish = false;
        self
    }
}

#[derive(Debug, Clone)]
pub struct RunResult {
    pub components: Vec<ComponentKind>,
    /// Incumbent after the optional polish.
    pub best: Solution,
    pub best_objective: f64,
    pub initial_objective: f64,
    /// Incumbent objective before polishing.
    pub search_objective: f64,
    /// Executions per component, indexed like `components`.
    pub component_executions: Vec<u64>,
    /// Strict improvements per component.
    pub component_successes: Vec<u64>,
    /// `transition_counts[from][to] = [after success, after failure]`.
    pub transition_counts: Vec<Vec<[u64; 2]>>,
    pub iterations: u64,
    /// `(iteration, objective)` each time the incumbent improved; starts
    /// with the initial solution at iteration 0.
    pub incumbent_trace: Vec<(u64, f64)>,
    pub search_time: Duration,
}

/// Samples an index with probability proportional to `row[k]`, by inverting
/// the cumulative sum at one uniform draw. Boundary ties go to the lower
/// index and zero-weight entries are never returned.
pub fn roulette<R: Rng + ?Sized>(row: &[f64], rng: &mut R) -> usize {
    let total: f64 = row.iter().sum();
    let r = rng.random::<f64>() * total;
    let mut cumulative = 0.0;
    let mut last_positive = 0;
    for (k, &p) in row.iter().enumerate() {
        if p <= 0.0 {
            continue;
        }
        cumulative += p;
        last_positive = k;
        if r < cumulative {
            return k;
        }
    }
    last_positive
}

/// Runs CMCS from a random initial solution drawn from the run seed.
pub fn run(config: &CmcsConfig, instance: &BbqpInstance, params: &RunParams) -> Result<RunResult> {
    config.validate()?;
    let mut rng = seed::rng_from_seed(params.seed);
    let start = Solution::random(instance, &mut rng);
    Ok(search(config, instance, params, start, &mut rng))
}

/// Runs CMCS from a given initial solution. The random stream is still
/// seeded from `params.seed`.
pub fn run_from(
    config: &CmcsConfig,
    instance: &BbqpInstance,
    params: &RunParams,
    start: Solution,
) -> Result<RunResult> {
    config.validate()?;
    let mut rng = seed::rng_from_seed(params.seed);
    Ok(search(config, instance, params, start, &mut rng))
}

fn search<R: Rng + ?Sized>(
    config: &CmcsConfig,
    instance: &BbqpInstance,
    params: &RunParams,
    mut current: Solution,
    rng: &mut R,
) -> RunResult {
    let h_count = config.len();
    let started = Instant::now();
    let deadline = match params.termination {
        Termination::WallClock(d) => Some(started + d),
        Termination::Iterations(_) => None,
    };
    let max_iterations = match params.termination {
        Termination::Iterations(n) => n,
        Termination::WallClock(_) => u64::MAX,
    };

    let initial_objective = current.objective();
    let mut best = current.clone();
    let mut executions = vec![0u64; h_count];
    let mut successes = vec![0u64; h_count];
    let mut transitions = vec![vec![[0u64; 2]; h_count]; h_count];
    let mut trace = vec![(0, initial_objective)];
    let mut iterations = 0u64;
    let mut h = 0usize;

    while iterations < max_iterations {
        if deadline.is_some_and(|d| Instant::now() >= d) {
            break;
        }
        let outcome = config.components[h].apply(&mut current, instance, rng);
        iterations += 1;
        executions[h] += 1;
        let next = if outcome.improved {
            successes[h] += 1;
            if current.objective() > best.objective() {
                best.clone_from(&current);
                trace.push((iterations, best.objective()));
            }
            let next = roulette(&config.msucc[h], rng);
            transitions[h][next][0] += 1;
            next
        } else {
            let next = roulette(&config.mfail[h], rng);
            transitions[h][next][1] += 1;
            next
        };
        h = next;
    }
    let search_time = started.elapsed();
    let search_objective = best.objective();
    if params.polish {
        polish(&mut best, instance);
    }
    RunResult {
        components: config.components.clone(),
        best_objective: best.objective(),
        best,
        initial_objective,
        search_objective,
        component_executions: executions,
        component_successes: successes,
        transition_counts: transitions,
        iterations,
        incumbent_trace: trace,
        search_time,
    }
}

#[cfg(test)]
mod tests {
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    use super::*;
    use crate::engine::{make_ils, make_uniform, shipped};
    use crate::error::BbqpError;
    use crate::generator;
    use crate::instance::Family;
    use crate::ComponentKind::*;

    #[test]
    fn roulette_frequencies() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let draws = 100_000;
        let ones = (0..draws).filter(|_| roulette(&[0.3, 0.7], &mut rng) == 1).count();
        let freq = ones as f64 / draws as f64;
        assert!((freq - 0.7).abs() <= 0.01, "freq {freq}");
    }

    #[test]
    fn roulette_never_picks_zero_entries() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..10_000 {
            let k = roulette(&[0.0, 0.5, 0.0, 0.5, 0.0], &mut rng);
            assert!(k == 1 || k == 3);
        }
        assert_eq!(roulette(&[0.0, 1.0], &mut rng), 1);
    }

    #[test]
    fn invalid_config_fails_before_search() {
        let inst = generator::generate(Family::Random, 5, 5, 1).unwrap();
        let bad = CmcsConfig {
            name: "OptX only".into(),
            components: vec![OptX],
            msucc: vec![vec![1.0]],
            mfail: vec![vec![1.0]],
        };
        let err = run(&bad, &inst, &RunParams::new(Termination::Iterations(10), 0)).unwrap_err();
        assert!(matches!(err, BbqpError::Config(_)));
    }

    #[test]
    fn iteration_budget_is_deterministic() {
        let inst = generator::generate(Family::BMaxCut, 20, 30, 4).unwrap();
        let config = shipped::two_row();
        let params = RunParams::new(Termination::Iterations(500), 99);
        let a = run(&config, &inst, &params).unwrap();
        let b = run(&config, &inst, &params).unwrap();
        assert_eq!(a.best, b.best);
        assert_eq!(a.transition_counts, b.transition_counts);
        assert_eq!(a.component_executions, b.component_executions);
        assert_eq!(a.incumbent_trace, b.incumbent_trace);
        assert_eq!(a.iterations, 500);
    }

    #[test]
    fn statistics_are_consistent() {
        let inst = generator::generate(Family::Random, 15, 25, 2).unwrap();
        let config = make_uniform(&ComponentKind::ALL).unwrap();
        let r = run(&config, &inst, &RunParams::new(Termination::Iterations(2000), 3)).unwrap();
        assert_eq!(r.component_executions.iter().sum::<u64>(), r.iterations);
        let transitions: u64 = r.transition_counts.iter().flatten().map(|c| c[0] + c[1]).sum();
        assert_eq!(transitions, r.iterations);
        assert_eq!(r.best_objective, r.best.objective());
        assert!(r.best_objective >= r.search_objective);
        assert!(r.search_objective >= r.initial_objective);
        assert!(r.incumbent_trace.windows(2).all(|w| w[1].1 > w[0].1 && w[1].0 > w[0].0));
        assert_eq!(r.incumbent_trace.last().unwrap().1, r.search_objective);
        assert!(r.best.cache_error(&inst) <= 1e-9);
        // OptX never follows itself.
        assert_eq!(r.transition_counts[0][0], [0, 0]);
    }

    #[test]
    fn ils_trace_alternates_climbing_and_one_mutation() {
        let inst = generator::generate(Family::MaxInduced, 20, 40, 8).unwrap();
        let config = make_ils(FlpX, MutY4).unwrap();
        let r = run(&config, &inst, &RunParams::new(Termination::Iterations(3000), 5)).unwrap();
        let t = &r.transition_counts;
        // Every exit from the mutation goes to the hill climber.
        assert_eq!(t[1][1], [0, 0]);
        assert!(t[1][0][0] + t[1][0][1] > 0);
        // Successful climbs repeat the climber; failures go to the mutation.
        assert_eq!(t[0][1][0], 0);
        assert_eq!(t[0][0][1], 0);
        let into_mutation = t[0][1][1];
        let mutations = r.component_executions[1];
        assert!(into_mutation == mutations || into_mutation == mutations + 1);
    }

    #[test]
    fn wall_clock_budget_stops() {
        let inst = generator::generate(Family::Random, 30, 60, 2).unwrap();
        let params = RunParams::new(Termination::millis(20), 1);
        let started = Instant::now();
        let r = run(&shipped::two_row(), &inst, &params).unwrap();
        assert!(started.elapsed() < Duration::from_secs(2));
        assert!(r.iterations > 0);
        assert!(r.best_objective >= r.initial_objective);
    }
}
