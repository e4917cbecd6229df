//! Real-coded genetic algorithm over the six free model parameters.
//!
//! Each generation keeps the best individuals verbatim, replaces a decaying
//! fraction with uniform mutants, and fills the rest with blend-crossover
//! offspring of rank-selected parents from the mating pool.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::metrics::{CostBreakdown, CostModel, CostWeights, ExperimentalDataset, MetricsError};
use crate::model::{HypoParams, SearchParams};

/// Order of the genes: φ_c (rad), h_s (kPa), n, e_c0, α, β.
pub type Genome = [f64; 6];

pub const GENE_NAMES: [&str; 6] = ["phi_c", "h_s", "n", "e_c0", "alpha", "beta"];

pub type Rng64 = ChaCha8Rng;

pub fn seeded_rng(seed: u64) -> Rng64 {
    ChaCha8Rng::seed_from_u64(seed)
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GaError {
    #[error("invalid GA configuration: {0}")]
    InvalidConfig(&'static str),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
}

/// Search box in internal units (radians, kPa).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bounds {
    pub min: Genome,
    pub max: Genome,
}

impl Bounds {
    /// Builds bounds from the customary table units: degrees and GPa.
    pub fn from_table(min: Genome, max: Genome) -> Self {
        let conv = |mut g: Genome| {
            g[0] = g[0].to_radians();
            g[1] *= 1.0e6;
            g
        };
        Self {
            min: conv(min),
            max: conv(max),
        }
    }

    pub fn validate(&self) -> Result<(), GaError> {
        let ok = self
            .min
            .iter()
            .zip(&self.max)
            .all(|(lo, hi)| lo.is_finite() && hi.is_finite() && lo < hi);
        if ok {
            Ok(())
        } else {
            Err(GaError::InvalidConfig(
                "bounds_min must be below bounds_max componentwise",
            ))
        }
    }

    pub fn contains(&self, g: &Genome) -> bool {
        (0..6).all(|k| g[k] >= self.min[k] && g[k] <= self.max[k])
    }

    pub fn clamp(&self, mut g: Genome) -> Genome {
        for (k, v) in g.iter_mut().enumerate() {
            *v = v.max(self.min[k]).min(self.max[k]);
        }
        g
    }

    pub fn midpoint(&self) -> Genome {
        std::array::from_fn(|k| 0.5 * (self.min[k] + self.max[k]))
    }

    pub fn range(&self) -> Genome {
        std::array::from_fn(|k| self.max[k] - self.min[k])
    }

    pub fn sample_uniform(&self, rng: &mut impl Rng) -> Genome {
        std::array::from_fn(|k| self.min[k] + (self.max[k] - self.min[k]) * rng.random::<f64>())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaConfig {
    pub n_individuals: usize,
    pub n_iterations: usize,
    pub elite_fraction: f64,
    pub mating_fraction: f64,
    pub mutation_start: f64,
    pub mutation_end: f64,
    pub bounds: Bounds,
    pub lambda_d: f64,
    pub lambda_i: f64,
    pub weights: CostWeights<f64>,
    pub seed: u64,
}

impl GaConfig {
    /// Default operator settings (500 individuals, 20 iterations) over `bounds`.
    pub fn new(bounds: Bounds) -> Self {
        Self {
            n_individuals: 500,
            n_iterations: 20,
            elite_fraction: 0.01,
            mating_fraction: 0.50,
            mutation_start: 0.5,
            mutation_end: 0.1,
            bounds,
            lambda_d: 0.60,
            lambda_i: 1.20,
            weights: CostWeights::unit(),
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<(), GaError> {
        self.bounds.validate()?;
        if self.n_individuals < 2 {
            return Err(GaError::InvalidConfig(
                "at least 2 individuals are required",
            ));
        }
        let frac = |f: f64| f > 0.0 && f <= 1.0;
        if !frac(self.elite_fraction) || !frac(self.mating_fraction) {
            return Err(GaError::InvalidConfig(
                "elite and mating fractions must lie in (0, 1]",
            ));
        }
        if !(self.mutation_end > 0.0
            && self.mutation_end <= self.mutation_start
            && self.mutation_start < 1.0)
        {
            return Err(GaError::InvalidConfig(
                "mutation fractions need 0 < end <= start < 1",
            ));
        }
        if !(self.lambda_d > 0.0 && self.lambda_d < 1.0 && self.lambda_i > 1.0) {
            return Err(GaError::InvalidConfig(
                "ratios need 0 < lambda_d < 1 < lambda_i",
            ));
        }
        self.weights.validate()?;
        Ok(())
    }

    pub fn elite_count(&self) -> usize {
        ((self.elite_fraction * self.n_individuals as f64).round() as usize)
            .clamp(1, self.n_individuals)
    }

    pub fn mutation_count(&self, iteration: usize) -> usize {
        let n = (mutation_fraction(iteration, self) * self.n_individuals as f64).round() as usize;
        n.min(self.n_individuals - self.elite_count())
    }

    pub fn mating_pool_size(&self) -> usize {
        ((self.mating_fraction * self.n_individuals as f64).round() as usize)
            .clamp(2, self.n_individuals)
    }

    pub fn to_search(&self, g: &Genome) -> SearchParams<f64> {
        SearchParams {
            phi_c: g[0],
            h_s: g[1],
            n: g[2],
            e_c0: g[3],
            alpha: g[4],
            beta: g[5],
            lambda_d: self.lambda_d,
            lambda_i: self.lambda_i,
        }
    }
}

/// Candidate parameter vectors with their (possibly cached) costs.
#[derive(Debug, Clone, PartialEq)]
pub struct Population {
    pub individuals: Vec<Genome>,
    costs: Vec<Option<CostBreakdown<f64>>>,
    ranking: Vec<usize>,
}

impl Population {
    pub fn from_individuals(individuals: Vec<Genome>) -> Self {
        let n = individuals.len();
        Self {
            individuals,
            costs: vec![None; n],
            ranking: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.individuals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.individuals.is_empty()
    }

    pub fn is_evaluated(&self) -> bool {
        !self.ranking.is_empty() && self.costs.iter().all(Option::is_some)
    }

    /// Ranking from best to worst; empty until evaluated.
    pub fn ranking(&self) -> &[usize] {
        &self.ranking
    }

    pub fn cost(&self, i: usize) -> Option<f64> {
        self.costs[i].map(|c| c.total)
    }

    pub fn breakdown(&self, i: usize) -> Option<CostBreakdown<f64>> {
        self.costs[i]
    }

    pub fn best(&self) -> Option<(usize, f64)> {
        self.ranking
            .first()
            .map(|&i| (i, self.cost(i).unwrap_or(f64::INFINITY)))
    }
}

/// Half Gaussian (centred in the box, σ = range/6, clamped), half uniform.
pub fn init_pop(config: &GaConfig, rng: &mut impl Rng) -> Population {
    let n_gauss = config.n_individuals / 2;
    let mid = config.bounds.midpoint();
    let range = config.bounds.range();
    let normals: Vec<Normal<f64>> = (0..6)
        .map(|k| Normal::new(mid[k], range[k] / 6.0).expect("finite positive sigma"))
        .collect();
    let mut individuals = Vec::with_capacity(config.n_individuals);
    for _ in 0..n_gauss {
        let g: Genome = std::array::from_fn(|k| normals[k].sample(rng));
        individuals.push(config.bounds.clamp(g));
    }
    for _ in n_gauss..config.n_individuals {
        individuals.push(config.bounds.sample_uniform(rng));
    }
    Population::from_individuals(individuals)
}

/// Evaluates uncached individuals (in parallel) and ranks the population by
/// ascending cost; infeasible `+∞` costs sort last, ties keep index order.
pub fn eval_pop<'a>(
    pop: &'a mut Population,
    model: &CostModel<f64>,
    config: &GaConfig,
) -> &'a [usize] {
    let fresh: Vec<(usize, CostBreakdown<f64>)> = pop
        .costs
        .par_iter()
        .enumerate()
        .filter(|(_, c)| c.is_none())
        .map(|(i, _)| {
            let mut c = model.evaluate_search(&config.to_search(&pop.individuals[i]));
            if c.total.is_nan() {
                c = CostBreakdown::rejected();
            }
            (i, c)
        })
        .collect();
    for (i, c) in fresh {
        pop.costs[i] = Some(c);
    }
    let totals: Vec<f64> = pop
        .costs
        .iter()
        .map(|c| c.expect("evaluated").total)
        .collect();
    let mut ranking: Vec<usize> = (0..pop.len()).collect();
    ranking.sort_by(|&a, &b| totals[a].total_cmp(&totals[b]));
    pop.ranking = ranking;
    &pop.ranking
}

/// Fraction of mutants at `iteration`, decaying geometrically from
/// `mutation_start` at 0 to `mutation_end` at `n_iterations`.
pub fn mutation_fraction(iteration: usize, config: &GaConfig) -> f64 {
    if config.n_iterations == 0 {
        return config.mutation_start;
    }
    let s = iteration as f64 / config.n_iterations as f64;
    config.mutation_start * (s * (config.mutation_end / config.mutation_start).ln()).exp()
}

/// Discrete triangular distribution over ranks `1..=pool`, with weight
/// `pool - rank`.
#[derive(Debug, Clone)]
pub struct TriangularSelector {
    cumulative: Vec<u64>,
}

impl TriangularSelector {
    pub fn new(pool: usize) -> Self {
        assert!(pool >= 2, "mating pool needs at least two individuals");
        let mut acc = 0u64;
        let cumulative = (1..=pool)
            .map(|rank| {
                acc += (pool - rank) as u64;
                acc
            })
            .collect();
        Self { cumulative }
    }

    pub fn pool(&self) -> usize {
        self.cumulative.len()
    }

    /// Draws a 1-based rank.
    pub fn sample_rank(&self, rng: &mut impl Rng) -> usize {
        let total = *self.cumulative.last().expect("non-empty pool");
        let r = rng.random_range(0..total);
        self.cumulative.partition_point(|&c| c <= r) + 1
    }
}

/// Picks the index of a parent among the best `pool` ranked individuals.
pub fn select_parent(ranking: &[usize], pool: usize, rng: &mut impl Rng) -> usize {
    let rank = TriangularSelector::new(pool.min(ranking.len())).sample_rank(rng);
    ranking[rank - 1]
}

/// Componentwise convex blend `θ·p1 + (1 − θ)·p2`.
pub fn blend(p1: &Genome, p2: &Genome, theta: &[f64; 6]) -> Genome {
    std::array::from_fn(|k| theta[k] * p1[k] + (1.0 - theta[k]) * p2[k])
}

pub fn crossover(p1: &Genome, p2: &Genome, rng: &mut impl Rng) -> Genome {
    let theta: [f64; 6] = std::array::from_fn(|_| rng.random::<f64>());
    blend(p1, p2, &theta)
}

/// Builds the next generation: elites, then uniform mutants, then offspring.
pub fn update_pop(
    pop: &Population,
    iteration: usize,
    config: &GaConfig,
    rng: &mut impl Rng,
) -> Population {
    assert!(
        pop.is_evaluated(),
        "population must be evaluated before update"
    );
    let n = config.n_individuals;
    let n_elite = config.elite_count().min(pop.len());
    let n_mut = config.mutation_count(iteration);
    let n_off = n - n_elite - n_mut;

    let mut individuals = Vec::with_capacity(n);
    let mut costs = Vec::with_capacity(n);
    for &i in &pop.ranking[..n_elite] {
        individuals.push(pop.individuals[i]);
        costs.push(pop.costs[i]);
    }
    for _ in 0..n_mut {
        individuals.push(config.bounds.sample_uniform(rng));
        costs.push(None);
    }
    let selector = TriangularSelector::new(config.mating_pool_size().min(pop.len()));
    for _ in 0..n_off {
        let p1 = &pop.individuals[pop.ranking[selector.sample_rank(rng) - 1]];
        let p2 = &pop.individuals[pop.ranking[selector.sample_rank(rng) - 1]];
        // blending can round one ulp past a bound
        individuals.push(config.bounds.clamp(crossover(p1, p2, rng)));
        costs.push(None);
    }
    Population {
        individuals,
        costs,
        ranking: Vec::new(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IterationStats {
    pub iteration: usize,
    pub best_cost: f64,
    /// Mean of the finite costs in the mating pool.
    pub pool_mean_cost: f64,
    pub feasible: usize,
}

fn iteration_stats(pop: &Population, iteration: usize, config: &GaConfig) -> IterationStats {
    let pool = config.mating_pool_size().min(pop.len());
    let finite: Vec<f64> = pop.ranking[..pool]
        .iter()
        .filter_map(|&i| pop.cost(i))
        .filter(|c| c.is_finite())
        .collect();
    let pool_mean_cost = if finite.is_empty() {
        f64::INFINITY
    } else {
        finite.iter().sum::<f64>() / finite.len() as f64
    };
    IterationStats {
        iteration,
        best_cost: pop.best().map_or(f64::INFINITY, |b| b.1),
        pool_mean_cost,
        feasible: pop
            .costs
            .iter()
            .flatten()
            .filter(|c| c.is_feasible())
            .count(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationResult {
    pub seed: u64,
    pub genome: Genome,
    pub search: SearchParams<f64>,
    /// `None` when every candidate of the final population was infeasible.
    pub params: Option<HypoParams<f64>>,
    pub cost: CostBreakdown<f64>,
    pub history: Vec<IterationStats>,
}

impl CalibrationResult {
    pub fn is_feasible(&self) -> bool {
        self.cost.is_feasible() && self.params.is_some()
    }
}

/// Runs the full calibration loop against `data`.
pub fn run(
    config: &GaConfig,
    data: &ExperimentalDataset<f64>,
) -> Result<CalibrationResult, GaError> {
    config.validate()?;
    let model = CostModel::new(data, config.weights)?;
    Ok(run_with_model(config, &model))
}

/// Same as [`run`] with an already prepared cost model.
pub fn run_with_model(config: &GaConfig, model: &CostModel<f64>) -> CalibrationResult {
    let mut rng = seeded_rng(config.seed);
    let mut pop = init_pop(config, &mut rng);
    let mut history = Vec::with_capacity(config.n_iterations + 1);
    for it in 0..config.n_iterations {
        eval_pop(&mut pop, model, config);
        history.push(iteration_stats(&pop, it, config));
        pop = update_pop(&pop, it, config, &mut rng);
    }
    eval_pop(&mut pop, model, config);
    history.push(iteration_stats(&pop, config.n_iterations, config));

    let best = pop.ranking[0];
    let genome = pop.individuals[best];
    let search = config.to_search(&genome);
    let cost = pop.breakdown(best).expect("evaluated");
    CalibrationResult {
        seed: config.seed,
        genome,
        search,
        params: search.expand().ok().filter(|_| cost.is_feasible()),
        cost,
        history,
    }
}
