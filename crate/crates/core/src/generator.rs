//! Benchmark instance generation.
//!
//! Five families are supported: Random, Max Biclique, Max Induced Subgraph,
//! bipartite MaxCut and Matrix Factorisation. All but Random and Matrix
//! Factorisation are built on a random bipartite graph whose node degrees
//! are drawn from per-side ranges and then realised edge by edge.

use log::{debug, warn};
use rand::seq::IndexedRandom;
use rand::Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{BbqpError, Result};
use crate::instance::{BbqpInstance, Family};
use crate::seed;

/// Standard deviation of every normally distributed weight.
pub const WEIGHT_SIGMA: f64 = 100.0;

/// Degree ranges and weight mean for [`generate_graph`].
#[derive(Debug, Clone, PartialEq)]
pub struct BipartiteGraphParams {
    pub m: usize,
    pub n: usize,
    pub d1lo: usize,
    pub d1hi: usize,
    pub d2lo: usize,
    pub d2hi: usize,
    pub mu: f64,
    pub sigma: f64,
}

impl BipartiteGraphParams {
    pub fn new(m: usize, n: usize, left: (usize, usize), right: (usize, usize), mu: f64) -> Self {
        BipartiteGraphParams {
            m,
            n,
            d1lo: left.0,
            d1hi: left.1,
            d2lo: right.0,
            d2hi: right.1,
            mu,
            sigma: WEIGHT_SIGMA,
        }
    }

    /// Ranges used by the Biclique, Max Induced and MaxCut families:
    /// left degrees in `[⌊n/5⌋, n]`, right degrees in `[⌊m/5⌋, m]`.
    pub fn dense(m: usize, n: usize, mu: f64) -> Self {
        Self::new(m, n, (n / 5, n), (m / 5, m), mu)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(BbqpError::InvalidArgument(msg));
        if self.m == 0 || self.n == 0 {
            return bad(format!("graph sides must be non-empty, got {}x{}", self.m, self.n));
        }
        if self.d1lo > self.d1hi || self.d1hi > self.n {
            return bad(format!(
                "left degree range [{}, {}] must satisfy lo <= hi <= n = {}",
                self.d1lo, self.d1hi, self.n
            ));
        }
        if self.d2lo > self.d2hi || self.d2hi > self.m {
            return bad(format!(
                "right degree range [{}, {}] must satisfy lo <= hi <= m = {}",
                self.d2lo, self.d2hi, self.m
            ));
        }
        if self.m * self.d1lo > self.n * self.d2hi || self.m * self.d1hi < self.n * self.d2lo {
            return bad("degree ranges cannot produce equal degree sums on both sides".into());
        }
        if !(self.mu.is_finite() && self.sigma.is_finite() && self.sigma >= 0.0) {
            return bad("weight distribution parameters must be finite".into());
        }
        Ok(())
    }
}

/// A simple weighted bipartite graph on `m` left and `n` right nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedBipartiteGraph {
    pub m: usize,
    pub n: usize,
    /// `(left, right, weight)`, sorted by `(left, right)`.
    pub edges: Vec<(usize, usize, f64)>,
    /// Degree targets of the left nodes once both sums were balanced.
    pub target_left: Vec<usize>,
    /// Degree targets of the right nodes once both sums were balanced.
    pub target_right: Vec<usize>,
    /// Unplaceable demand dropped from left nodes in dead ends.
    pub dropped_demand: usize,
}

impl WeightedBipartiteGraph {
    pub fn left_degrees(&self) -> Vec<usize> {
        let mut deg = vec![0; self.m];
        for &(i, _, _) in &self.edges {
            deg[i] += 1;
        }
        deg
    }

    pub fn right_degrees(&self) -> Vec<usize> {
        let mut deg = vec![0; self.n];
        for &(_, j, _) in &self.edges {
            deg[j] += 1;
        }
        deg
    }
}

/// Integer drawn from `Normal(mean, sd)`, rounded half away from zero.
pub fn normal_integer<R: Rng + ?Sized>(dist: &Normal<f64>, rng: &mut R) -> f64 {
    dist.sample(rng).round()
}

fn normal(mean: f64, sd: f64) -> Result<Normal<f64>> {
    Normal::new(mean, sd).map_err(|e| BbqpError::InvalidArgument(format!("normal distribution: {e}")))
}

/// Draws degree targets on both sides until their sums agree.
///
/// Nodes are re-drawn alternately from the left and right side. After
/// `10·(m+n)` unsuccessful re-draws, a forcing phase only accepts re-draws
/// that shrink `|Σ left − Σ right|`; it is given another `10·(m+n)` steps.
fn balanced_degrees<R: Rng + ?Sized>(
    p: &BipartiteGraphParams,
    rng: &mut R,
) -> Result<(Vec<usize>, Vec<usize>)> {
    let mut left: Vec<usize> = (0..p.m).map(|_| rng.random_range(p.d1lo..=p.d1hi)).collect();
    let mut right: Vec<usize> = (0..p.n).map(|_| rng.random_range(p.d2lo..=p.d2hi)).collect();
    let mut sum_left: usize = left.iter().sum();
    let mut sum_right: usize = right.iter().sum();

    let patience = 10 * (p.m + p.n);
    let mut attempts = 0;
    let mut pick_left = true;
    while sum_left != sum_right && attempts < patience {
        if pick_left {
            let v = rng.random_range(0..p.m);
            sum_left -= left[v];
            left[v] = rng.random_range(p.d1lo..=p.d1hi);
            sum_left += left[v];
        } else {
            let u = rng.random_range(0..p.n);
            sum_right -= right[u];
            right[u] = rng.random_range(p.d2lo..=p.d2hi);
            sum_right += right[u];
        }
        pick_left = !pick_left;
        attempts += 1;
    }

    let mut forced = 0;
    while sum_left != sum_right {
        if forced >= patience {
            return Err(BbqpError::Generation(format!(
                "degree sums did not balance ({sum_left} vs {sum_right})"
            )));
        }
        forced += 1;
        let diff = sum_left.abs_diff(sum_right);
        let left_larger = sum_left > sum_right;
        // Move the larger side down if it has slack, otherwise the smaller up.
        let use_left = if left_larger {
            left.iter().any(|&d| d > p.d1lo)
        } else {
            !right.iter().any(|&d| d > p.d2lo)
        };
        let shrink = use_left == left_larger;
        let (degrees, sum, lo, hi) = if use_left {
            (&mut left, &mut sum_left, p.d1lo, p.d1hi)
        } else {
            (&mut right, &mut sum_right, p.d2lo, p.d2hi)
        };
        let movable: Vec<usize> = (0..degrees.len())
            .filter(|&k| if shrink { degrees[k] > lo } else { degrees[k] < hi })
            .collect();
        let &k = movable.choose(rng).ok_or_else(|| {
            BbqpError::Generation("no degree can move toward balance".into())
        })?;
        let old = degrees[k];
        let new = if shrink {
            rng.random_range(lo.max(old.saturating_sub(diff))..old)
        } else {
            rng.random_range(old + 1..=hi.min(old + diff))
        };
        degrees[k] = new;
        *sum = *sum - old + new;
    }
    Ok((left, right))
}

/// Index set supporting O(1) insert, remove and uniform sampling.
struct SampleSet {
    items: Vec<usize>,
    pos: Vec<usize>,
}

impl SampleSet {
    const ABSENT: usize = usize::MAX;

    fn new(universe: usize) -> Self {
        SampleSet {
            items: Vec::new(),
            pos: vec![Self::ABSENT; universe],
        }
    }

    fn insert(&mut self, k: usize) {
        if self.pos[k] == Self::ABSENT {
            self.pos[k] = self.items.len();
            self.items.push(k);
        }
    }

    fn remove(&mut self, k: usize) {
        let p = self.pos[k];
        if p == Self::ABSENT {
            return;
        }
        let last = *self.items.last().expect("non-empty when k is present");
        self.items.swap_remove(p);
        if last != k {
            self.pos[last] = p;
        }
        self.pos[k] = Self::ABSENT;
    }

    fn contains(&self, k: usize) -> bool {
        self.pos[k] != Self::ABSENT
    }

    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Option<usize> {
        self.items.choose(rng).copied()
    }
}

/// Random bipartite graph with degree targets drawn from the parameter
/// ranges and integer `Normal(μ, σ)` edge weights.
pub fn generate_graph<R: Rng + ?Sized>(
    params: &BipartiteGraphParams,
    rng: &mut R,
) -> Result<WeightedBipartiteGraph> {
    params.validate()?;
    let (m, n) = (params.m, params.n);
    let mut attempt = 0;
    let (target_left, target_right, placed) = loop {
        attempt += 1;
        if attempt > PLACEMENT_ATTEMPTS {
            return Err(BbqpError::Generation(format!(
                "no realisable degree sequence after {PLACEMENT_ATTEMPTS} attempts"
            )));
        }
        let (left, right) = balanced_degrees(params, rng)?;
        if !realisable(&left, &right) {
            debug!("attempt {attempt}: degree sequence is not bigraphic, redrawing");
            continue;
        }
        match place_edges(&left, &right, rng) {
            Some(placed) => break (left, right, placed),
            None => debug!("attempt {attempt}: edge placement stalled, redrawing"),
        }
    };
    let Placement { adj, dropped } = placed;
    let total: usize = target_left.iter().sum();

    let dist = normal(params.mu, params.sigma)?;
    let mut edges = Vec::with_capacity(total);
    for i in 0..m {
        for j in 0..n {
            if adj[i * n + j] {
                edges.push((i, j, normal_integer(&dist, rng)));
            }
        }
    }
    Ok(WeightedBipartiteGraph {
        m,
        n,
        edges,
        target_left,
        target_right,
        dropped_demand: dropped,
    })
}

const PLACEMENT_ATTEMPTS: usize = 50;

/// Gale–Ryser test: whether some simple bipartite graph has exactly these
/// degrees.
fn realisable(left: &[usize], right: &[usize]) -> bool {
    if left.iter().sum::<usize>() != right.iter().sum::<usize>() {
        return false;
    }
    let mut a = left.to_vec();
    a.sort_unstable_by(|x, y| y.cmp(x));
    let mut prefix = 0;
    for (k, &deg) in a.iter().enumerate() {
        prefix += deg;
        let cap: usize = right.iter().map(|&b| b.min(k + 1)).sum();
        if prefix > cap {
            return false;
        }
    }
    true
}

struct Placement {
    adj: Vec<bool>,
    dropped: usize,
}

/// Step 5: repeatedly connects a random left node with unmet demand to a
/// random open right node, stealing an edge from a saturated right node when
/// no open one is available. Returns `None` if the walk does not settle
/// within its step budget.
fn place_edges<R: Rng + ?Sized>(target_left: &[usize], target_right: &[usize], rng: &mut R) -> Option<Placement> {
    let (m, n) = (target_left.len(), target_right.len());
    let mut demand_left = target_left.to_vec();
    let mut adj = vec![false; m * n];
    let mut right_nbrs: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut deg_left = vec![0usize; m];
    let mut deg_right = vec![0usize; n];
    let mut open_left = SampleSet::new(m);
    let mut open_right = SampleSet::new(n);
    for v in (0..m).filter(|&v| demand_left[v] > 0) {
        open_left.insert(v);
    }
    for u in (0..n).filter(|&u| target_right[u] > 0) {
        open_right.insert(u);
    }

    let total: usize = target_left.iter().sum();
    let step_limit = 50 * (total + m + n) + 1000;
    let mut steps = 0;
    let mut dropped = 0;

    // open_adj[v] = |N(v) ∩ open right nodes|, so U' is empty exactly when
    // it equals the number of open right nodes. Right nodes never reopen: a
    // steal takes an edge from a saturated node and refills it at once.
    let mut open_adj = vec![0usize; m];

    while let Some(v) = open_left.sample(rng) {
        steps += 1;
        if steps > step_limit {
            return None;
        }

        let u = if open_adj[v] < open_right.items.len() {
            // Uniform choice from U' = {u : deg u < d_u, (v,u) ∉ E}:
            // rejection sampling, then an exact scan.
            let mut chosen = (0..32)
                .filter_map(|_| open_right.sample(rng))
                .find(|&u| !adj[v * n + u]);
            if chosen.is_none() {
                let candidates: Vec<usize> = open_right
                    .items
                    .iter()
                    .copied()
                    .filter(|&u| !adj[v * n + u])
                    .collect();
                chosen = candidates.choose(rng).copied();
            }
            let u = chosen.expect("U' is non-empty");
            open_adj[v] += 1;
            u
        } else {
            // Every unsaturated right node is already adjacent to v: steal
            // an edge from a saturated one.
            let stealable = |u: usize| target_right[u] > 0 && !adj[v * n + u];
            let mut picked = (0..64).map(|_| rng.random_range(0..n)).find(|&u| stealable(u));
            if picked.is_none() {
                let candidates: Vec<usize> = (0..n).filter(|&u| stealable(u)).collect();
                picked = candidates.choose(rng).copied();
            }
            let Some(u) = picked else {
                let missing = demand_left[v] - deg_left[v];
                warn!("left node {v}: dropping {missing} unplaceable degree units");
                dropped += missing;
                demand_left[v] = deg_left[v];
                open_left.remove(v);
                continue;
            };
            let k = rng.random_range(0..right_nbrs[u].len());
            let victim = right_nbrs[u].swap_remove(k);
            adj[victim * n + u] = false;
            deg_left[victim] -= 1;
            deg_right[u] -= 1;
            open_left.insert(victim);
            u
        };

        adj[v * n + u] = true;
        right_nbrs[u].push(v);
        deg_left[v] += 1;
        deg_right[u] += 1;
        if deg_left[v] >= demand_left[v] {
            open_left.remove(v);
        }
        if deg_right[u] >= target_right[u] && open_right.contains(u) {
            open_right.remove(u);
            for &w in &right_nbrs[u] {
                open_adj[w] -= 1;
            }
        }
    }
    Some(Placement { adj, dropped })
}

fn ordered(m: usize, n: usize) -> Result<(usize, usize)> {
    if m == 0 || n == 0 {
        return Err(BbqpError::InvalidArgument(format!(
            "instance dimensions must be positive, got {m}x{n}"
        )));
    }
    Ok((m.min(n), m.max(n)))
}

/// `q_ij`, `c_i`, `d_j` all integer `Normal(0, 100)` draws.
pub fn make_random<R: Rng + ?Sized>(m: usize, n: usize, rng: &mut R) -> Result<BbqpInstance> {
    let (m, n) = ordered(m, n)?;
    let dist = normal(0.0, WEIGHT_SIGMA)?;
    let mut draw = |len: usize| -> Vec<f64> { (0..len).map(|_| normal_integer(&dist, rng)).collect() };
    let q = draw(m * n);
    let c = draw(m);
    let d = draw(n);
    BbqpInstance::new(m, n, q, c, d, Family::Random, 0)
}

/// Penalty used for non-edges of a biclique instance: one more than the
/// total absolute edge weight, so a single non-edge outweighs any set of
/// edges.
pub fn biclique_penalty(graph: &WeightedBipartiteGraph) -> f64 {
    1.0 + graph.edges.iter().map(|e| e.2.abs()).sum::<f64>()
}

/// Max weight biclique: `q_ij = w_ij` on edges, `−M` elsewhere, `c = d = 0`.
pub fn make_biclique<R: Rng + ?Sized>(m: usize, n: usize, rng: &mut R) -> Result<BbqpInstance> {
    let (m, n) = ordered(m, n)?;
    if m < 5 {
        return Err(BbqpError::InvalidArgument(format!(
            "biclique instances need both sides >= 5, got {m}x{n}"
        )));
    }
    let graph = generate_graph(&BipartiteGraphParams::dense(m, n, 100.0), rng)?;
    let penalty = biclique_penalty(&graph);
    let mut q = vec![-penalty; m * n];
    for &(i, j, w) in &graph.edges {
        q[i * n + j] = w;
    }
    BbqpInstance::new(m, n, q, vec![0.0; m], vec![0.0; n], Family::Biclique, 0)
}

/// Max induced subgraph: `q_ij = w_ij` on edges (`μ = 0`), zero elsewhere.
pub fn make_max_induced<R: Rng + ?Sized>(m: usize, n: usize, rng: &mut R) -> Result<BbqpInstance> {
    let (m, n) = ordered(m, n)?;
    let graph = generate_graph(&BipartiteGraphParams::dense(m, n, 0.0), rng)?;
    let mut q = vec![0.0; m * n];
    for &(i, j, w) in &graph.edges {
        q[i * n + j] = w;
    }
    BbqpInstance::new(m, n, q, vec![0.0; m], vec![0.0; n], Family::MaxInduced, 0)
}

/// Bipartite MaxCut: `q_ij = −2w_ij` on edges, `c_i = ½Σ_j q_ij`,
/// `d_j = ½Σ_i q_ij`. Weights are integral, so the halves are exact.
pub fn make_maxcut<R: Rng + ?Sized>(m: usize, n: usize, rng: &mut R) -> Result<BbqpInstance> {
    let (m, n) = ordered(m, n)?;
    let graph = generate_graph(&BipartiteGraphParams::dense(m, n, 0.0), rng)?;
    let mut q = vec![0.0; m * n];
    for &(i, j, w) in &graph.edges {
        q[i * n + j] = -2.0 * w;
    }
    let c = (0..m).map(|i| 0.5 * q[i * n..(i + 1) * n].iter().sum::<f64>()).collect();
    let d = (0..n)
        .map(|j| 0.5 * (0..m).map(|i| q[i * n + j]).sum::<f64>())
        .collect();
    BbqpInstance::new(m, n, q, c, d, Family::BMaxCut, 0)
}

/// Rank-one binary matrix approximation: `q_ij = 1 − 2h_ij` with
/// `h_ij ~ Bernoulli(0.5)`, `c = d = 0`.
pub fn make_matrix_factor<R: Rng + ?Sized>(m: usize, n: usize, rng: &mut R) -> Result<BbqpInstance> {
    let (m, n) = ordered(m, n)?;
    let h: Vec<bool> = (0..m * n).map(|_| rng.random_bool(0.5)).collect();
    Ok(matrix_factor_from(m, n, &h))
}

/// Matrix factorisation instance for a given binary matrix `h` (row-major).
pub fn matrix_factor_from(m: usize, n: usize, h: &[bool]) -> BbqpInstance {
    let q = h.iter().map(|&b| if b { -1.0 } else { 1.0 }).collect();
    BbqpInstance::new(m, n, q, vec![0.0; m], vec![0.0; n], Family::MatrixFactor, 0)
        .expect("shape is consistent")
}

/// Generates an instance of `family` from its own ChaCha stream seeded with
/// `seed`; the seed is recorded in the instance.
pub fn generate(family: Family, m: usize, n: usize, seed: u64) -> Result<BbqpInstance> {
    let mut rng = seed::rng_from_seed(seed);
    let inst = match family {
        Family::Random => make_random(m, n, &mut rng),
        Family::Biclique => make_biclique(m, n, &mut rng),
        Family::MaxInduced => make_max_induced(m, n, &mut rng),
        Family::BMaxCut => make_maxcut(m, n, &mut rng),
        Family::MatrixFactor => make_matrix_factor(m, n, &mut rng),
        Family::Custom => Err(BbqpError::InvalidArgument(
            "custom instances cannot be generated".into(),
        )),
    }?;
    Ok(inst.with_seed(seed))
}

/// Benchmark size presets: one instance per family and size.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    /// 200..1000 × 1000.
    Medium,
    /// 1000..5000 × 5000.
    Large,
    /// One 200 × 500 instance per family.
    Training,
}

impl std::str::FromStr for Preset {
    type Err = BbqpError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "medium" => Ok(Preset::Medium),
            "large" => Ok(Preset::Large),
            "training" | "train" => Ok(Preset::Training),
            _ => Err(BbqpError::InvalidArgument(format!("unknown preset `{s}`"))),
        }
    }
}

impl Preset {
    pub fn sizes(self) -> Vec<(usize, usize)> {
        match self {
            Preset::Medium => (1..=5).map(|k| (200 * k, 1000)).collect(),
            Preset::Large => (1..=5).map(|k| (1000 * k, 5000)).collect(),
            Preset::Training => vec![(200, 500)],
        }
    }

    /// `(family, m, n, seed)` for every instance of the preset. Seeds are
    /// derived from `base_seed`, the family and the size.
    pub fn entries(self, base_seed: u64) -> Vec<(Family, usize, usize, u64)> {
        let mut out = Vec::new();
        for family in Family::GENERATED {
            for (m, n) in self.sizes() {
                let s = seed::derive(base_seed, &[family.name(), &m.to_string(), &n.to_string()]);
                out.push((family, m, n, s));
            }
        }
        out
    }
}
