use std::collections::HashSet;

use log::{debug, info};
use rand::seq::index;

use crate::components::ComponentKind;
use crate::engine::{make_op_prob, make_vns, CmcsConfig};
use crate::error::{BbqpError, Result};
use crate::seed;

use super::{capping_bound, evaluate_capped, evaluate_detailed, Capped, TuningProblem};

/// Weights available to each component of an operator-probability config.
pub const WEIGHT_SET: [f64; 5] = [0.1, 0.2, 0.5, 0.8, 1.0];
/// Largest component subset the operator-probability search considers.
pub const MAX_OPPROB_COMPONENTS: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BruteForceSettings {
    /// Candidates re-evaluated at the end.
    pub top: usize,
    /// Repeat multiplier for the re-evaluation.
    pub reeval_factor: usize,
    /// Evaluate at most this many candidates, drawn uniformly without
    /// replacement from the full enumeration.
    pub max_candidates: Option<usize>,
    pub seed: u64,
    /// Stop evaluating candidates that fall clearly behind the best one so
    /// far (see [`super::evaluate_capped`]).
    pub capping: bool,
}

impl Default for BruteForceSettings {
    fn default() -> Self {
        BruteForceSettings {
            top: 10,
            reeval_factor: 10,
            max_candidates: None,
            seed: 0,
            capping: false,
        }
    }
}

#[derive(Debug, Clone)]
pub struct BruteForceOutcome {
    pub best: CmcsConfig,
    /// Gap of `best` in the final re-evaluation.
    pub gap: f64,
    /// Candidates evaluated on the plain training set.
    pub evaluated: usize,
    /// Candidates whose evaluation was capped.
    pub capped: usize,
    /// `(config, plain gap)` sorted ascending; capped candidates hold a
    /// lower bound.
    pub ranking: Vec<(CmcsConfig, f64)>,
}

/// Every operator-probability weight assignment over `pool`: component
/// subsets of size at most `max_components` containing a hill climber and a
/// mutation, crossed with every weight in `weights` per component.
pub fn opprob_candidates(
    pool: &[ComponentKind],
    weights: &[f64],
    max_components: usize,
) -> Result<Vec<Vec<(ComponentKind, f64)>>> {
    let pool = dedup(pool);
    if weights.is_empty() || weights.iter().any(|w| !(w.is_finite() && *w > 0.0)) {
        return Err(BbqpError::InvalidArgument("weights must be positive".into()));
    }
    let mut out = Vec::new();
    let h = pool.len();
    for mask in 1u32..(1 << h) {
        let subset: Vec<ComponentKind> = (0..h).filter(|&i| mask >> i & 1 == 1).map(|i| pool[i]).collect();
        if subset.len() > max_components
            || !subset.iter().any(|k| k.is_hill_climber())
            || !subset.iter().any(|k| k.is_mutation())
        {
            continue;
        }
        let mut digits = vec![0usize; subset.len()];
        loop {
            out.push(subset.iter().zip(&digits).map(|(&k, &d)| (k, weights[d])).collect());
            let mut pos = 0;
            while pos < digits.len() {
                digits[pos] += 1;
                if digits[pos] < weights.len() {
                    break;
                }
                digits[pos] = 0;
                pos += 1;
            }
            if pos == digits.len() {
                break;
            }
        }
    }
    if out.is_empty() {
        return Err(BbqpError::InvalidArgument(
            "pool needs at least one hill climber and one mutation".into(),
        ));
    }
    Ok(out)
}

/// Closed-form size of [`opprob_candidates`]: the sum over subset sizes `s`
/// of `(C(h+u, s) − C(h, s) − C(u, s)) · w^s` for `h` hill climbers, `u`
/// mutations and `w` weights.
pub fn opprob_candidate_count(hill_climbers: usize, mutations: usize, weights: usize, max_components: usize) -> u64 {
    fn choose(n: usize, k: usize) -> u64 {
        if k > n {
            return 0;
        }
        (0..k).fold(1u64, |acc, i| acc * (n - i) as u64 / (i + 1) as u64)
    }
    (1..=max_components.min(hill_climbers + mutations))
        .map(|s| {
            let mixed = choose(hill_climbers + mutations, s) - choose(hill_climbers, s) - choose(mutations, s);
            mixed * (weights as u64).pow(s as u32)
        })
        .sum()
}

/// Every VNS over `pool`: each ordered non-empty sequence of distinct hill
/// climbers followed by each single mutation.
pub fn vns_candidates(pool: &[ComponentKind]) -> Result<Vec<CmcsConfig>> {
    let pool = dedup(pool);
    let hcs: Vec<ComponentKind> = pool.iter().copied().filter(|k| k.is_hill_climber()).collect();
    let muts: Vec<ComponentKind> = pool.iter().copied().filter(|k| k.is_mutation()).collect();
    if hcs.is_empty() || muts.is_empty() {
        return Err(BbqpError::InvalidArgument(
            "VNS needs at least one hill climber and one mutation".into(),
        ));
    }
    let mut sequences = Vec::new();
    let mut current = Vec::new();
    permutations(&hcs, &mut current, &mut sequences);
    let mut out = Vec::with_capacity(sequences.len() * muts.len());
    for seq in &sequences {
        for &m in &muts {
            out.push(make_vns(seq, m)?);
        }
    }
    Ok(out)
}

fn permutations(items: &[ComponentKind], current: &mut Vec<ComponentKind>, out: &mut Vec<Vec<ComponentKind>>) {
    for &k in items {
        if current.contains(&k) {
            continue;
        }
        current.push(k);
        out.push(current.clone());
        permutations(items, current, out);
        current.pop();
    }
}

fn dedup(pool: &[ComponentKind]) -> Vec<ComponentKind> {
    let mut out = Vec::new();
    for &k in pool {
        if !out.contains(&k) {
            out.push(k);
        }
    }
    out
}

/// Evaluates `candidates` (or a random subset of them, see
/// [`BruteForceSettings::max_candidates`]), then re-evaluates the best
/// `top` with `reeval_factor` times the repeats and returns the winner.
pub fn brute_force(
    problem: &TuningProblem,
    candidates: Vec<CmcsConfig>,
    settings: &BruteForceSettings,
) -> Result<BruteForceOutcome> {
    if candidates.is_empty() {
        return Err(BbqpError::InvalidArgument("no candidate configurations".into()));
    }
    let candidates = match settings.max_candidates {
        Some(limit) if limit < candidates.len() => {
            let mut rng = seed::rng_from_seed(settings.seed);
            let mut picked: Vec<usize> = index::sample(&mut rng, candidates.len(), limit.max(1)).into_vec();
            picked.sort_unstable();
            picked.into_iter().map(|i| candidates[i].clone()).collect()
        }
        _ => candidates,
    };
    let total = candidates.len();
    let mut ranking = Vec::with_capacity(total);
    let mut complete = Vec::new();
    let mut incumbent = f64::INFINITY;
    for (k, config) in candidates.into_iter().enumerate() {
        let cap = if settings.capping && incumbent.is_finite() {
            capping_bound(incumbent)
        } else {
            f64::INFINITY
        };
        let outcome = evaluate_capped(&config, problem, cap)?;
        debug!("candidate {}/{total} {}: {outcome:?}", k + 1, config.name);
        if let Capped::Complete(gap) = outcome {
            incumbent = incumbent.min(gap);
            complete.push((config.clone(), gap));
        }
        ranking.push((config, outcome.gap()));
    }
    ranking.sort_by(|a, b| a.1.total_cmp(&b.1));
    complete.sort_by(|a, b| a.1.total_cmp(&b.1));
    let capped = total - complete.len();

    let mut best: Option<(CmcsConfig, f64)> = None;
    for (config, plain) in complete.iter().take(settings.top.max(1)) {
        let gap = if settings.reeval_factor > 1 {
            evaluate_detailed(config, problem, settings.reeval_factor)?.mean_gap
        } else {
            *plain
        };
        debug!("re-evaluated {}: {plain:.4} -> {gap:.4}", config.name);
        if best.as_ref().is_none_or(|(_, g)| gap < *g) {
            best = Some((config.clone(), gap));
        }
    }
    let (best, gap) = best.expect("at least one candidate");
    info!(
        "brute force: {} wins with gap {gap:.4} after {total} candidates ({capped} capped)",
        best.name
    );
    Ok(BruteForceOutcome {
        best,
        gap,
        evaluated: total,
        capped,
        ranking,
    })
}

/// Brute-force operator-probability configuration over the problem's pool.
/// Weight assignments that normalise to the same probabilities are
/// evaluated once.
pub fn brute_force_opprob(problem: &TuningProblem, settings: &BruteForceSettings) -> Result<BruteForceOutcome> {
    let mut seen = HashSet::new();
    let mut configs = Vec::new();
    for weights in opprob_candidates(&problem.pool, &WEIGHT_SET, MAX_OPPROB_COMPONENTS)? {
        let total: f64 = weights.iter().map(|(_, w)| w).sum();
        let key: Vec<(ComponentKind, i64)> = weights
            .iter()
            .map(|&(k, w)| (k, (w / total * 1e9).round() as i64))
            .collect();
        if seen.insert(key) {
            configs.push(make_op_prob(&weights)?);
        }
    }
    brute_force(problem, configs, settings)
}

/// Brute-force VNS configuration over the problem's pool.
pub fn brute_force_vns(problem: &TuningProblem, settings: &BruteForceSettings) -> Result<BruteForceOutcome> {
    brute_force(problem, vns_candidates(&problem.pool)?, settings)
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::engine::{is_k_row, validate_config, Termination};
    use crate::generator;
    use crate::instance::Family;
    use crate::tuner::TrainingInstance;
    use ComponentKind::*;

    #[test]
    fn two_component_pool_has_twenty_five_assignments() {
        let c = opprob_candidates(&[OptX, MutX4], &WEIGHT_SET, 4).unwrap();
        assert_eq!(c.len(), 25);
        let distinct: HashSet<String> = c.iter().map(|w| format!("{w:?}")).collect();
        assert_eq!(distinct.len(), 25);
    }

    #[test]
    fn full_pool_count_matches_closed_form() {
        let c = opprob_candidates(&ComponentKind::ALL, &WEIGHT_SET, MAX_OPPROB_COMPONENTS).unwrap();
        assert_eq!(c.len() as u64, opprob_candidate_count(4, 5, 5, 4));
        // 20·25 + 70·125 + 120·625
        assert_eq!(c.len(), 84_250);
        for w in &c {
            assert!(w.len() <= 4);
            assert!(w.iter().any(|(k, _)| k.is_hill_climber()));
            assert!(w.iter().any(|(k, _)| k.is_mutation()));
        }
    }

    #[test]
    fn opprob_needs_a_mutation() {
        assert!(opprob_candidates(&[OptX, FlpY], &WEIGHT_SET, 4).is_err());
        assert!(opprob_candidates(&[OptX, MutX4], &[], 4).is_err());
    }

    #[test]
    fn vns_enumeration() {
        let c = vns_candidates(&[OptX, OptY, MutX4]).unwrap();
        assert_eq!(c.len(), 4);
        let names: Vec<&str> = c.iter().map(|c| c.name.as_str()).collect();
        assert_eq!(names.len(), 4);
        for config in &c {
            assert!(validate_config(config).is_empty());
            assert!(is_k_row(config, 1));
        }
        // Four climbers: 4 + 12 + 24 + 24 ordered sequences, times 5 mutations.
        assert_eq!(vns_candidates(&ComponentKind::ALL).unwrap().len(), 64 * 5);
        assert!(vns_candidates(&[MutX4, MutY4]).is_err());
    }

    fn small_problem() -> TuningProblem {
        let inst = generator::generate(Family::Random, 8, 12, 5).unwrap();
        TuningProblem::new(
            vec![TrainingInstance {
                id: "r".into(),
                instance: Arc::new(inst),
                repeats: 2,
                best_known: 1e4,
            }],
            Termination::Iterations(30),
            vec![OptX, OptY, MutX4],
            3,
        )
        .unwrap()
    }

    #[test]
    fn brute_force_picks_a_ranked_candidate() {
        let p = small_problem();
        let settings = BruteForceSettings {
            top: 2,
            reeval_factor: 2,
            ..Default::default()
        };
        let out = brute_force_vns(&p, &settings).unwrap();
        assert_eq!(out.evaluated, 4);
        assert!(out.ranking.windows(2).all(|w| w[0].1 <= w[1].1));
        assert!(out.ranking[..2].iter().any(|(c, _)| c == &out.best));
    }

    #[test]
    fn opprob_search_respects_limits() {
        let p = small_problem();
        let settings = BruteForceSettings {
            top: 1,
            reeval_factor: 1,
            max_candidates: Some(7),
            seed: 1,
            capping: false,
        };
        let out = brute_force_opprob(&p, &settings).unwrap();
        assert_eq!(out.evaluated, 7);
        assert!(out.best.components.iter().any(|k| k.is_hill_climber()));
        assert!(out.best.components.iter().any(|k| k.is_mutation()));
        assert_eq!(out.gap, out.ranking[0].1);
    }

    #[test]
    fn capped_opprob_search_reports_complete_winners() {
        let p = small_problem();
        let settings = BruteForceSettings {
            top: 2,
            reeval_factor: 1,
            max_candidates: Some(12),
            seed: 4,
            capping: true,
        };
        let out = brute_force_opprob(&p, &settings).unwrap();
        assert_eq!(out.evaluated, 12);
        assert!(out.capped < out.evaluated);
        assert!(out.best.validate().is_ok());
    }
}
