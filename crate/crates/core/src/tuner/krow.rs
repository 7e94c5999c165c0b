use std::collections::HashMap;

use log::{debug, info};
use rand::seq::{IndexedRandom, SliceRandom};
use rand::Rng;

use crate::components::ComponentKind;
use crate::engine::{make_vns, self_loop_prohibited, CmcsConfig, Matrix};
use crate::error::{BbqpError, Result};

use super::{capping_bound, evaluate_capped, evaluate_detailed, Capped, TuningProblem};

const MIN_WEIGHT: f64 = 0.05;

/// Settings of the evolutionary configurator.
#[derive(Debug, Clone, PartialEq)]
pub struct TunerSettings {
    pub population: usize,
    /// Individuals drawn for the first generation; the best `population`
    /// of them survive. Values below `population` mean `population`.
    pub initial_population: usize,
    /// Generations including the initial population.
    pub generations: usize,
    /// Probability of each extra mutation after the first one.
    pub mutation_rate: f64,
    pub crossover_rate: f64,
    pub elite: usize,
    pub tournament: usize,
    /// Maximum non-zeros per matrix row.
    pub k: usize,
    /// Evolve one matrix used for both outcomes (MCHH) instead of two.
    pub shared: bool,
    /// Number of structured individuals in the first generation,
    /// alternately VNS chains and climb-or-mutate chains.
    pub structured_seeds: usize,
    /// Repeat multiplier when the two best configurations are re-evaluated.
    pub final_reeval_factor: usize,
    /// Stop once this many distinct configurations have been evaluated.
    pub max_evaluations: Option<usize>,
    /// Stop evaluating candidates that fall clearly behind the best one so
    /// far (see [`super::evaluate_capped`]).
    pub capping: bool,
}

impl Default for TunerSettings {
    fn default() -> Self {
        TunerSettings {
            population: 20,
            initial_population: 40,
            generations: 50,
            mutation_rate: 0.3,
            crossover_rate: 0.3,
            elite: 2,
            tournament: 3,
            k: 2,
            shared: false,
            structured_seeds: 10,
            final_reeval_factor: 10,
            max_evaluations: None,
            capping: false,
        }
    }
}

impl TunerSettings {
    /// MCHH mode: one shared matrix with no sparsity limit.
    pub fn mchh(pool_size: usize) -> Self {
        TunerSettings {
            k: pool_size,
            shared: true,
            structured_seeds: 0,
            ..Self::default()
        }
    }

    pub fn validate(&self, pool: &[ComponentKind]) -> Result<()> {
        let fail = |msg: String| Err(BbqpError::InvalidArgument(msg));
        if self.population < 2 {
            return fail(format!("population must be at least 2, got {}", self.population));
        }
        if self.generations == 0 {
            return fail("at least one generation is required".into());
        }
        if self.elite >= self.population {
            return fail(format!("elite count {} must be below the population size", self.elite));
        }
        if self.tournament == 0 {
            return fail("tournament size must be positive".into());
        }
        if self.k == 0 || self.k > pool.len() {
            return fail(format!("k must lie in 1..={}, got {}", pool.len(), self.k));
        }
        for (name, p) in [("mutation", self.mutation_rate), ("crossover", self.crossover_rate)] {
            if !(0.0..=1.0).contains(&p) {
                return fail(format!("{name} rate {p} outside [0, 1]"));
            }
        }
        if !pool.iter().any(|k| k.is_hill_climber()) || !pool.iter().any(|k| k.is_mutation()) {
            return fail("pool needs at least one hill climber and one mutation".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GenerationStats {
    pub generation: usize,
    pub best_gap: f64,
    pub mean_gap: f64,
    /// Distinct configurations evaluated so far.
    pub evaluations: usize,
}

#[derive(Debug, Clone)]
pub struct TunedConfig {
    pub config: CmcsConfig,
    /// Gap in the final re-evaluation.
    pub gap: f64,
    /// Gap on the plain training set.
    pub training_gap: f64,
    pub runner_up: Option<(CmcsConfig, f64)>,
    pub log: Vec<GenerationStats>,
    pub evaluations: usize,
}

type Row = Vec<(usize, f64)>;

/// Sparse matrices over the whole pool; rows of inactive components are
/// kept so they can be reactivated.
#[derive(Debug, Clone)]
struct Genome {
    active: Vec<bool>,
    succ: Vec<Row>,
    fail: Vec<Row>,
}

struct Space<'a> {
    pool: &'a [ComponentKind],
    k: usize,
    shared: bool,
}

impl Space<'_> {
    fn matrices(&self) -> &'static [Matrix] {
        if self.shared {
            &[Matrix::Succ]
        } else {
            &[Matrix::Succ, Matrix::Fail]
        }
    }

    fn admissible(&self, g: &Genome, matrix: Matrix, from: usize, to: usize) -> bool {
        g.active[to] && !(from == to && self_loop_prohibited(matrix, self.pool[from], self.shared))
    }

    fn targets(&self, g: &Genome, matrix: Matrix, from: usize) -> Vec<usize> {
        (0..self.pool.len()).filter(|&to| self.admissible(g, matrix, from, to)).collect()
    }

    fn random_row<R: Rng + ?Sized>(&self, g: &Genome, matrix: Matrix, from: usize, rng: &mut R) -> Row {
        let mut targets = self.targets(g, matrix, from);
        targets.shuffle(rng);
        let size = rng.random_range(1..=self.k.min(targets.len()).max(1));
        targets.truncate(size);
        targets.into_iter().map(|c| (c, weight(rng))).collect()
    }

    fn random<R: Rng + ?Sized>(&self, rng: &mut R) -> Genome {
        let p = self.pool.len();
        let mut g = Genome {
            active: (0..p).map(|_| rng.random_bool(0.5)).collect(),
            succ: vec![Vec::new(); p],
            fail: vec![Vec::new(); p],
        };
        self.ensure_pool(&mut g, rng);
        for h in 0..p {
            g.succ[h] = self.random_row(&g, Matrix::Succ, h, rng);
            g.fail[h] = self.random_row(&g, Matrix::Fail, h, rng);
        }
        self.repair(&mut g, rng);
        g
    }

    /// VNS over a random ordered subset of the pool's hill climbers.
    fn structured<R: Rng + ?Sized>(&self, rng: &mut R) -> Genome {
        let mut hcs: Vec<ComponentKind> = self.pool.iter().copied().filter(|k| k.is_hill_climber()).collect();
        let muts: Vec<ComponentKind> = self.pool.iter().copied().filter(|k| k.is_mutation()).collect();
        hcs.shuffle(rng);
        hcs.truncate(rng.random_range(1..=hcs.len()));
        let mutation = *muts.choose(rng).expect("pool has a mutation");
        let config = make_vns(&hcs, mutation).expect("VNS over a valid pool");
        let p = self.pool.len();
        let mut g = Genome {
            active: vec![false; p],
            succ: vec![Vec::new(); p],
            fail: vec![Vec::new(); p],
        };
        let idx = |k: ComponentKind| self.pool.iter().position(|&x| x == k).expect("component from the pool");
        for (a, &ka) in config.components.iter().enumerate() {
            let from = idx(ka);
            g.active[from] = true;
            for (rows, matrix) in [(&mut g.succ, &config.msucc), (&mut g.fail, &config.mfail)] {
                rows[from] = matrix[a]
                    .iter()
                    .enumerate()
                    .filter(|(_, &v)| v > 0.0)
                    .map(|(b, &v)| (idx(config.components[b]), v))
                    .collect();
            }
        }
        self.repair(&mut g, rng);
        g
    }

    /// Random subsets of hill climbers and mutations where a hill climber
    /// moves on to another hill climber after a success and to a hill
    /// climber or a mutation after a failure, and mutations hand back to a
    /// hill climber.
    fn climb_seed<R: Rng + ?Sized>(&self, rng: &mut R) -> Genome {
        let p = self.pool.len();
        let pick = |want: fn(ComponentKind) -> bool, most: usize, rng: &mut R| {
            let mut idx: Vec<usize> = (0..p).filter(|&h| want(self.pool[h])).collect();
            idx.shuffle(rng);
            idx.truncate(rng.random_range(1..=most.min(idx.len())));
            idx
        };
        let hcs = pick(ComponentKind::is_hill_climber, p, rng);
        let muts = pick(ComponentKind::is_mutation, 2, rng);
        let mut g = Genome {
            active: (0..p).map(|h| hcs.contains(&h) || muts.contains(&h)).collect(),
            succ: vec![Vec::new(); p],
            fail: vec![Vec::new(); p],
        };
        let choose = |g: &Genome, matrix: Matrix, from: usize, among: &[usize], rng: &mut R| {
            let ok: Vec<usize> = among.iter().copied().filter(|&to| self.admissible(g, matrix, from, to)).collect();
            ok.choose(rng).copied()
        };
        for &h in &hcs {
            g.succ[h] = choose(&g, Matrix::Succ, h, &hcs, rng)
                .into_iter()
                .map(|to| (to, 1.0))
                .collect();
            let mut fail: Row = Vec::new();
            if self.k >= 2 {
                fail.extend(choose(&g, Matrix::Fail, h, &hcs, rng).map(|to| (to, weight(rng))));
            }
            fail.push((*muts.choose(rng).expect("a mutation was picked"), weight(rng)));
            g.fail[h] = fail;
        }
        for &u in &muts {
            for matrix in [Matrix::Succ, Matrix::Fail] {
                let to = choose(&g, matrix, u, &hcs, rng).expect("hill climbers are admissible after a mutation");
                *self.row_mut(&mut g, matrix, u) = vec![(to, 1.0)];
            }
        }
        self.repair(&mut g, rng);
        g
    }

    fn ensure_pool<R: Rng + ?Sized>(&self, g: &mut Genome, rng: &mut R) {
        for want in [ComponentKind::is_hill_climber, ComponentKind::is_mutation] {
            let present = (0..self.pool.len()).any(|h| g.active[h] && want(self.pool[h]));
            if !present {
                let options: Vec<usize> = (0..self.pool.len()).filter(|&h| want(self.pool[h])).collect();
                g.active[*options.choose(rng).expect("pool checked up front")] = true;
            }
        }
    }

    /// Restores the invariants: an active hill climber and mutation, and
    /// every active row holding 1..=k distinct admissible targets with
    /// positive weights.
    fn repair<R: Rng + ?Sized>(&self, g: &mut Genome, rng: &mut R) {
        self.ensure_pool(g, rng);
        for h in 0..self.pool.len() {
            if !g.active[h] {
                continue;
            }
            for &matrix in self.matrices() {
                let mut row = std::mem::take(self.row_mut(g, matrix, h));
                let mut seen = Vec::new();
                row.retain(|&(c, _)| {
                    let keep = self.admissible(g, matrix, h, c) && !seen.contains(&c);
                    seen.push(c);
                    keep
                });
                row.truncate(self.k);
                for e in &mut row {
                    e.1 = e.1.clamp(MIN_WEIGHT, 1.0);
                }
                if row.is_empty() {
                    let targets = self.targets(g, matrix, h);
                    row.push((*targets.choose(rng).expect("two active components"), weight(rng)));
                }
                *self.row_mut(g, matrix, h) = row;
            }
        }
    }

    fn row_mut<'g>(&self, g: &'g mut Genome, matrix: Matrix, h: usize) -> &'g mut Row {
        match matrix {
            Matrix::Succ => &mut g.succ[h],
            Matrix::Fail => &mut g.fail[h],
        }
    }

    fn decode(&self, g: &Genome, name: &str) -> CmcsConfig {
        let active: Vec<usize> = (0..self.pool.len()).filter(|&h| g.active[h]).collect();
        let pos = |h: usize| active.iter().position(|&a| a == h).expect("active target");
        let dense = |rows: &[Row]| -> Vec<Vec<f64>> {
            active
                .iter()
                .map(|&h| {
                    let mut out = vec![0.0; active.len()];
                    let total: f64 = rows[h].iter().map(|e| e.1).sum();
                    for &(c, w) in &rows[h] {
                        out[pos(c)] = w / total;
                    }
                    out
                })
                .collect()
        };
        let msucc = dense(&g.succ);
        let mfail = if self.shared { msucc.clone() } else { dense(&g.fail) };
        CmcsConfig {
            name: name.to_string(),
            components: active.iter().map(|&h| self.pool[h]).collect(),
            msucc,
            mfail,
        }
    }

    fn active_rows(&self, g: &Genome, min_len: usize) -> Vec<(Matrix, usize)> {
        let mut out = Vec::new();
        for &matrix in self.matrices() {
            for h in (0..self.pool.len()).filter(|&h| g.active[h]) {
                let len = match matrix {
                    Matrix::Succ => g.succ[h].len(),
                    Matrix::Fail => g.fail[h].len(),
                };
                if len >= min_len {
                    out.push((matrix, h));
                }
            }
        }
        out
    }

    /// Applies one randomly chosen specialised mutation. Returns false when
    /// the chosen operator had nothing to act on.
    fn mutate<R: Rng + ?Sized>(&self, g: &mut Genome, rng: &mut R) -> bool {
        match rng.random_range(0..5) {
            0 => self.swap_weights(g, rng),
            1 => self.move_column(g, rng),
            2 => self.perturb_split(g, rng),
            3 => self.resize_row(g, rng),
            _ => self.toggle_component(g, rng),
        }
    }

    fn swap_weights<R: Rng + ?Sized>(&self, g: &mut Genome, rng: &mut R) -> bool {
        let Some(&(matrix, h)) = self.active_rows(g, 2).choose(rng) else {
            return false;
        };
        let row = self.row_mut(g, matrix, h);
        let picked = rand::seq::index::sample(rng, row.len(), 2);
        let (a, b) = (picked.index(0), picked.index(1));
        let wa = row[a].1;
        row[a].1 = row[b].1;
        row[b].1 = wa;
        true
    }

    fn move_column<R: Rng + ?Sized>(&self, g: &mut Genome, rng: &mut R) -> bool {
        let Some(&(matrix, h)) = self.active_rows(g, 1).choose(rng) else {
            return false;
        };
        let row = match matrix {
            Matrix::Succ => &g.succ[h],
            Matrix::Fail => &g.fail[h],
        };
        let free: Vec<usize> = self
            .targets(g, matrix, h)
            .into_iter()
            .filter(|c| !row.iter().any(|e| e.0 == *c))
            .collect();
        let Some(&to) = free.choose(rng) else {
            return false;
        };
        let row = self.row_mut(g, matrix, h);
        let e = rng.random_range(0..row.len());
        row[e].0 = to;
        true
    }

    fn perturb_split<R: Rng + ?Sized>(&self, g: &mut Genome, rng: &mut R) -> bool {
        let Some(&(matrix, h)) = self.active_rows(g, 2).choose(rng) else {
            return false;
        };
        let row = self.row_mut(g, matrix, h);
        let e = rng.random_range(0..row.len());
        row[e].1 = weight(rng);
        true
    }

    fn resize_row<R: Rng + ?Sized>(&self, g: &mut Genome, rng: &mut R) -> bool {
        let Some(&(matrix, h)) = self.active_rows(g, 1).choose(rng) else {
            return false;
        };
        let targets = self.targets(g, matrix, h);
        let row = self.row_mut(g, matrix, h);
        let can_grow = row.len() < self.k && targets.iter().any(|c| !row.iter().any(|e| e.0 == *c));
        let can_shrink = row.len() > 1;
        if can_grow && (!can_shrink || rng.random_bool(0.5)) {
            let free: Vec<usize> = targets.into_iter().filter(|c| !row.iter().any(|e| e.0 == *c)).collect();
            let to = *free.choose(rng).expect("checked above");
            row.push((to, weight(rng)));
            true
        } else if can_shrink {
            let e = rng.random_range(0..row.len());
            row.remove(e);
            true
        } else {
            false
        }
    }

    fn toggle_component<R: Rng + ?Sized>(&self, g: &mut Genome, rng: &mut R) -> bool {
        let h = rng.random_range(0..self.pool.len());
        let kind = self.pool[h];
        if g.active[h] {
            let same_role = |x: usize| {
                x != h && g.active[x] && self.pool[x].is_hill_climber() == kind.is_hill_climber()
            };
            if !(0..self.pool.len()).any(same_role) {
                return false;
            }
            g.active[h] = false;
            return true;
        }
        g.active[h] = true;
        g.succ[h] = self.random_row(g, Matrix::Succ, h, rng);
        g.fail[h] = self.random_row(g, Matrix::Fail, h, rng);
        // Make the new component reachable from some other row.
        let rows: Vec<(Matrix, usize)> = self.active_rows(g, 1).into_iter().filter(|&(_, r)| r != h).collect();
        if let Some(&(matrix, r)) = rows.choose(rng) {
            let k = self.k;
            let row = self.row_mut(g, matrix, r);
            if row.len() < k {
                row.push((h, weight(rng)));
            } else {
                let e = rng.random_range(0..row.len());
                row[e].0 = h;
            }
        }
        true
    }

    fn crossover<R: Rng + ?Sized>(&self, a: &Genome, b: &Genome, rng: &mut R) -> Genome {
        let mut child = a.clone();
        for h in 0..self.pool.len() {
            if rng.random_bool(0.5) {
                child.active[h] = b.active[h];
                child.succ[h] = b.succ[h].clone();
                child.fail[h] = b.fail[h].clone();
            }
        }
        child
    }
}

fn weight<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    rng.random_range(MIN_WEIGHT..=1.0)
}

fn key(config: &CmcsConfig) -> String {
    format!("{:?}|{:?}|{:?}", config.components, config.msucc, config.mfail)
}

struct Archive<'p> {
    problem: &'p TuningProblem,
    /// Score of each distinct configuration; capped ones hold a lower bound.
    scores: HashMap<String, (CmcsConfig, Capped)>,
    limit: Option<usize>,
    capping: bool,
    best: f64,
}

impl Archive<'_> {
    fn exhausted(&self) -> bool {
        self.limit.is_some_and(|l| self.scores.len() >= l)
    }

    fn score(&mut self, config: CmcsConfig) -> Result<f64> {
        let k = key(&config);
        if let Some((_, c)) = self.scores.get(&k) {
            return Ok(c.gap());
        }
        debug_assert!(config.validate().is_ok());
        let cap = if self.capping && self.best.is_finite() {
            capping_bound(self.best)
        } else {
            f64::INFINITY
        };
        let outcome = evaluate_capped(&config, self.problem, cap)?;
        if let Capped::Complete(gap) = outcome {
            self.best = self.best.min(gap);
        }
        debug!("evaluation {}: {outcome:?}", self.scores.len() + 1);
        self.scores.insert(k, (config, outcome));
        Ok(outcome.gap())
    }

    fn capped(&self) -> usize {
        self.scores.values().filter(|(_, c)| !c.is_complete()).count()
    }

    /// Fully evaluated configurations sorted by gap, ties broken by key.
    fn ranked(&self) -> Vec<(&String, &CmcsConfig, f64)> {
        let mut all: Vec<_> = self
            .scores
            .iter()
            .filter(|(_, (_, c))| c.is_complete())
            .map(|(k, (c, g))| (k, c, g.gap()))
            .collect();
        all.sort_by(|a, b| a.2.total_cmp(&b.2).then_with(|| a.0.cmp(b.0)));
        all
    }
}

/// Evolves k-row (or, with `settings.shared`, MCHH) configurations over the
/// problem's pool and returns the best one found. Every individual is
/// decoded into a valid configuration with at most `k` non-zeros per row.
pub fn tune_krow<R: Rng + ?Sized>(
    problem: &TuningProblem,
    settings: &TunerSettings,
    rng: &mut R,
) -> Result<TunedConfig> {
    settings.validate(&problem.pool)?;
    let space = Space {
        pool: &problem.pool,
        k: settings.k,
        shared: settings.shared,
    };
    let name = if settings.shared {
        "MCHH (tuned)".to_string()
    } else {
        format!("{}-row (tuned)", settings.k)
    };
    let mut archive = Archive {
        problem,
        scores: HashMap::new(),
        limit: settings.max_evaluations,
        capping: settings.capping,
        best: f64::INFINITY,
    };

    let initial = settings.initial_population.max(settings.population);
    let mut population: Vec<(Genome, f64)> = Vec::with_capacity(initial);
    let seeds = if settings.shared { 0 } else { settings.structured_seeds };
    for i in 0..initial {
        if archive.exhausted() && !population.is_empty() {
            break;
        }
        let g = match i {
            i if i < seeds && i % 2 == 0 => space.structured(rng),
            i if i < seeds => space.climb_seed(rng),
            _ => space.random(rng),
        };
        let gap = archive.score(space.decode(&g, &name))?;
        population.push((g, gap));
    }
    population.sort_by(|a, b| a.1.total_cmp(&b.1));
    population.truncate(settings.population);
    let mut log = vec![stats(1, &population, archive.scores.len())];
    info!(
        "generation 1: best {:.4}, mean {:.4}",
        log[0].best_gap, log[0].mean_gap
    );

    for generation in 2..=settings.generations {
        if archive.exhausted() {
            break;
        }
        population.sort_by(|a, b| a.1.total_cmp(&b.1));
        let mut next: Vec<(Genome, f64)> = population.iter().take(settings.elite).cloned().collect();
        while next.len() < settings.population && !archive.exhausted() {
            let a = tournament(&population, settings.tournament, rng);
            let mut child = if rng.random_bool(settings.crossover_rate) {
                let b = tournament(&population, settings.tournament, rng);
                space.crossover(a, b, rng)
            } else {
                a.clone()
            };
            // Tiny pools can leave every operator without a target.
            for _ in 0..20 {
                if space.mutate(&mut child, rng) {
                    break;
                }
            }
            while rng.random_bool(settings.mutation_rate) {
                space.mutate(&mut child, rng);
            }
            space.repair(&mut child, rng);
            let gap = archive.score(space.decode(&child, &name))?;
            next.push((child, gap));
        }
        population = next;
        let s = stats(generation, &population, archive.scores.len());
        info!("generation {generation}: best {:.4}, mean {:.4}", s.best_gap, s.mean_gap);
        log.push(s);
    }

    if settings.capping {
        info!("{} of {} evaluations capped", archive.capped(), archive.scores.len());
    }
    let ranked = archive.ranked();
    let finalists: Vec<(CmcsConfig, f64)> = ranked.iter().take(2).map(|(_, c, g)| ((*c).clone(), *g)).collect();
    let mut results = Vec::new();
    for (config, plain) in finalists {
        let gap = if settings.final_reeval_factor > 1 {
            evaluate_detailed(&config, problem, settings.final_reeval_factor)?.mean_gap
        } else {
            plain
        };
        results.push((config, plain, gap));
    }
    results.sort_by(|a, b| a.2.total_cmp(&b.2));
    let mut results = results.into_iter();
    let (config, training_gap, gap) = results.next().expect("at least one evaluation");
    let runner_up = results.next().map(|(c, _, g)| (c, g));
    Ok(TunedConfig {
        config,
        gap,
        training_gap,
        runner_up,
        log,
        evaluations: archive.scores.len(),
    })
}

fn stats(generation: usize, population: &[(Genome, f64)], evaluations: usize) -> GenerationStats {
    let gaps: Vec<f64> = population.iter().map(|p| p.1).collect();
    GenerationStats {
        generation,
        best_gap: gaps.iter().copied().fold(f64::INFINITY, f64::min),
        mean_gap: super::mean_gap(&gaps),
        evaluations,
    }
}

fn tournament<'a, R: Rng + ?Sized>(population: &'a [(Genome, f64)], size: usize, rng: &mut R) -> &'a Genome {
    let mut best: Option<&(Genome, f64)> = None;
    for _ in 0..size {
        let c = population.choose(rng).expect("non-empty population");
        if best.is_none_or(|b| c.1 < b.1) {
            best = Some(c);
        }
    }
    &best.expect("size is positive").0
}
