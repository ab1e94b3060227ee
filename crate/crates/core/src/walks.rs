//! Path generators.
//!
//! Lattice neighbours are ordered `+e₁, −e₁, +e₂, −e₂, ...`; site distributions and
//! Dirichlet parameters follow the same order.

use std::collections::HashMap;

use rand::Rng;
use rand_distr::{Distribution, Gamma};

use crate::error::{Error, Result};
use crate::lift::DiscretePath;
use crate::rng::{environment_seed, site_rng, walk_rng, SimRng};

const PROB_TOL: f64 = 1e-12;

fn check_probabilities(probs: &[f64]) -> Result<()> {
    if probs.iter().any(|&p| !(p >= 0.0) || !p.is_finite()) {
        return Err(Error::InvalidParameter("probabilities must be nonnegative".into()));
    }
    let total: f64 = probs.iter().sum();
    if (total - 1.0).abs() > PROB_TOL {
        return Err(Error::InvalidParameter(format!("probabilities sum to {total}, not 1")));
    }
    Ok(())
}

/// Index of the first cumulative weight exceeding `u`, skipping zero-mass atoms.
fn pick(probs: &[f64], u: f64) -> usize {
    let mut acc = 0.0;
    let mut last = 0;
    for (i, &p) in probs.iter().enumerate() {
        if p > 0.0 {
            acc += p;
            last = i;
            if u < acc {
                return i;
            }
        }
    }
    last
}

/// Unit vector `±e_{i/2}` for neighbour index `i`.
pub fn neighbor(index: usize, dim: usize) -> Vec<f64> {
    let mut v = vec![0.0; dim];
    v[index / 2] = if index % 2 == 0 { 1.0 } else { -1.0 };
    v
}

/// Finite step distribution for i.i.d. walks.
#[derive(Clone, Debug, PartialEq)]
pub struct StepLaw {
    dim: usize,
    support: Vec<f64>,
    probs: Vec<f64>,
}

impl StepLaw {
    pub fn new(dim: usize, support: Vec<Vec<f64>>, probs: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::ZeroDimension);
        }
        if support.is_empty() || support.len() != probs.len() {
            return Err(Error::InvalidParameter("support and probabilities must be non-empty and match".into()));
        }
        check_probabilities(&probs)?;
        let mut flat = Vec::with_capacity(dim * support.len());
        for s in &support {
            if s.len() != dim {
                return Err(Error::DimensionMismatch { left: dim, right: s.len() });
            }
            if !s.iter().all(|x| x.is_finite()) {
                return Err(Error::NonFinite);
            }
            flat.extend_from_slice(s);
        }
        Ok(Self { dim, support: flat, probs })
    }

    /// Uniform law on the `2d` nearest neighbours.
    pub fn simple_random_walk(dim: usize) -> Self {
        let support = (0..2 * dim).map(|i| neighbor(i, dim)).collect();
        Self::new(dim, support, vec![1.0 / (2 * dim) as f64; 2 * dim]).expect("valid law")
    }

    pub fn point_mass(step: Vec<f64>) -> Result<Self> {
        let dim = step.len();
        Self::new(dim, vec![step], vec![1.0])
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn atoms(&self) -> impl Iterator<Item = (&[f64], f64)> + '_ {
        self.support.chunks(self.dim).zip(self.probs.iter().copied())
    }

    pub fn mean(&self) -> Vec<f64> {
        let mut m = vec![0.0; self.dim];
        for (s, p) in self.atoms() {
            for (mi, &x) in m.iter_mut().zip(s) {
                *mi += p * x;
            }
        }
        m
    }

    fn sample<'a>(&'a self, rng: &mut SimRng) -> &'a [f64] {
        let i = pick(&self.probs, rng.random::<f64>());
        &self.support[i * self.dim..(i + 1) * self.dim]
    }

    pub fn max_norm(&self) -> f64 {
        self.support.chunks(self.dim).map(|s| s.iter().map(|x| x * x).sum::<f64>().sqrt()).fold(0.0, f64::max)
    }
}

fn check_steps(n: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::InvalidParameter("number of steps must be at least 1".into()));
    }
    Ok(())
}

fn check_p(p: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidParameter(format!("p must lie in [0, 1], got {p}")));
    }
    Ok(())
}

pub fn gen_iid_walk(law: &StepLaw, n: usize, seed: u64) -> Result<DiscretePath<f64>> {
    check_steps(n)?;
    let mut rng = walk_rng(seed);
    let mut data = Vec::with_capacity(n * law.dim());
    for _ in 0..n {
        data.extend_from_slice(law.sample(&mut rng));
    }
    DiscretePath::new(law.dim(), data, law.max_norm())
}

/// `i^n` as a lattice vector, `n ≥ 0`.
fn rotation(n: usize) -> [f64; 2] {
    match n % 4 {
        0 => [1.0, 0.0],
        1 => [0.0, 1.0],
        2 => [-1.0, 0.0],
        _ => [0.0, -1.0],
    }
}

/// `ΔX_n = iⁿ ζ_n` for `n = 1, 2, ...` with `P(ζ = 1) = p = 1 − P(ζ = −1)`.
pub fn gen_rotating_drift(p: f64, n: usize, seed: u64) -> Result<DiscretePath<f64>> {
    check_p(p)?;
    check_steps(n)?;
    let mut rng = walk_rng(seed);
    let mut data = Vec::with_capacity(2 * n);
    for k in 1..=n {
        let zeta = if rng.random::<f64>() < p { 1.0 } else { -1.0 };
        let r = rotation(k);
        data.push(r[0] * zeta);
        data.push(r[1] * zeta);
    }
    DiscretePath::new(2, data, 1.0)
}

/// Start site of the periodic environment walk; from `1 ∈ ℤ[i]` its increments
/// follow the rotating drift law step for step.
pub const PERIODIC_START: [i64; 2] = [1, 0];

/// Two-periodic environment: the preferred move (probability `p`) and the
/// opposite move at `site`, determined by the parity class of the site.
pub fn periodic_kernel(p: f64, site: [i64; 2]) -> [([i64; 2], f64); 2] {
    let preferred = match (site[0].rem_euclid(2), site[1].rem_euclid(2)) {
        (0, 0) => [1, 0],
        (1, 0) => [0, 1],
        (1, 1) => [-1, 0],
        _ => [0, -1],
    };
    [(preferred, p), ([-preferred[0], -preferred[1]], 1.0 - p)]
}

pub fn gen_periodic_env_walk(p: f64, n: usize, seed: u64) -> Result<DiscretePath<f64>> {
    check_p(p)?;
    check_steps(n)?;
    let mut rng = walk_rng(seed);
    let mut pos = PERIODIC_START;
    let mut data = Vec::with_capacity(2 * n);
    for _ in 0..n {
        let [(up, pu), (down, _)] = periodic_kernel(p, pos);
        let step = if rng.random::<f64>() < pu { up } else { down };
        pos = [pos[0] + step[0], pos[1] + step[1]];
        data.push(step[0] as f64);
        data.push(step[1] as f64);
    }
    DiscretePath::new(2, data, 1.0)
}

/// Clockwise unit loop inserted after every two random steps.
pub const CLOCKWISE_LOOP: [[f64; 2]; 4] = [[0.0, 1.0], [1.0, 0.0], [0.0, -1.0], [-1.0, 0.0]];

/// Period of the loop walk: two simple random walk steps, then the loop.
pub const LOOP_PERIOD: usize = 6;

/// Simple random walk on ℤ² with a deterministic clockwise loop every two steps.
pub fn gen_loop_walk(n: usize, seed: u64) -> Result<DiscretePath<f64>> {
    check_steps(n)?;
    let law = StepLaw::simple_random_walk(2);
    let mut rng = walk_rng(seed);
    let mut data = Vec::with_capacity(2 * n);
    for k in 0..n {
        match k % LOOP_PERIOD {
            0 | 1 => data.extend_from_slice(law.sample(&mut rng)),
            j => data.extend_from_slice(&CLOCKWISE_LOOP[j - 2]),
        }
    }
    DiscretePath::new(2, data, 1.0)
}

/// Transition probabilities at a site, one per neighbour.
#[derive(Clone, Debug, PartialEq)]
pub struct SiteDistribution {
    probs: Vec<f64>,
}

impl SiteDistribution {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.len() < 2 || probs.len() % 2 != 0 {
            return Err(Error::InvalidParameter("site distribution needs 2d entries".into()));
        }
        check_probabilities(&probs)?;
        Ok(Self { probs })
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn dim(&self) -> usize {
        self.probs.len() / 2
    }

    pub fn min_prob(&self) -> f64 {
        self.probs.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DirichletParams {
    alpha: Vec<f64>,
}

impl DirichletParams {
    pub fn new(alpha: Vec<f64>) -> Result<Self> {
        if alpha.len() < 2 || alpha.len() % 2 != 0 {
            return Err(Error::InvalidParameter("alpha needs one weight per neighbour (2d entries)".into()));
        }
        if alpha.iter().any(|&a| !(a > 0.0) || !a.is_finite()) {
            return Err(Error::NonPositiveAlpha);
        }
        Ok(Self { alpha })
    }

    pub fn alpha(&self) -> &[f64] {
        &self.alpha
    }

    pub fn dim(&self) -> usize {
        self.alpha.len() / 2
    }

    /// Annealed one-step mean drift `Σ_e (α_e / Σα) e`.
    pub fn annealed_drift(&self) -> Vec<f64> {
        let total: f64 = self.alpha.iter().sum();
        (0..self.dim()).map(|i| (self.alpha[2 * i] - self.alpha[2 * i + 1]) / total).collect()
    }
}

/// Dirichlet(α) site by normalising independent Gamma(α_e, 1) variates.
pub fn sample_dirichlet_site<R: Rng + ?Sized>(params: &DirichletParams, rng: &mut R) -> SiteDistribution {
    let gammas: Vec<Gamma<f64>> =
        params.alpha.iter().map(|&a| Gamma::new(a, 1.0).expect("alpha validated")).collect();
    loop {
        let draws: Vec<f64> = gammas.iter().map(|g| g.sample(rng)).collect();
        let total: f64 = draws.iter().sum();
        // Very small shapes can underflow every coordinate; redraw.
        if total > 0.0 && total.is_finite() {
            let mut probs: Vec<f64> = draws.iter().map(|x| x / total).collect();
            let s: f64 = probs.iter().sum();
            probs.iter_mut().for_each(|x| *x /= s);
            return SiteDistribution { probs };
        }
    }
}

/// Euclidean projection of `probs` onto `{ω : ω_e ≥ κ, Σ ω_e = 1}`.
pub fn project_elliptic(probs: &[f64], kappa: f64) -> Vec<f64> {
    let n = probs.len();
    let mass = 1.0 - n as f64 * kappa;
    let shifted: Vec<f64> = probs.iter().map(|p| p - kappa).collect();
    let mut sorted = shifted.clone();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let mut cum = 0.0;
    let mut theta = 0.0;
    for (j, &u) in sorted.iter().enumerate() {
        cum += u;
        let t = (cum - mass) / (j + 1) as f64;
        if u - t > 0.0 {
            theta = t;
        }
    }
    let mut out: Vec<f64> = shifted.iter().map(|&y| (y - theta).max(0.0) + kappa).collect();
    let s: f64 = out.iter().sum();
    out.iter_mut().for_each(|x| *x /= s);
    out
}

/// Law of a single site of an i.i.d. environment.
#[derive(Clone, Debug, PartialEq)]
pub enum EnvironmentLaw {
    Dirichlet(DirichletParams),
    /// Dirichlet draws projected onto `{ω ≥ κ_ell}`.
    Elliptic { base: DirichletParams, kappa: f64 },
    /// The same distribution at every site.
    Fixed(SiteDistribution),
}

impl EnvironmentLaw {
    pub fn elliptic(base: DirichletParams, kappa: f64) -> Result<Self> {
        let n = base.alpha.len() as f64;
        if !(kappa > 0.0) || n * kappa > 1.0 {
            return Err(Error::InvalidParameter(format!("kappa_ell must lie in (0, 1/{n}], got {kappa}")));
        }
        Ok(Self::Elliptic { base, kappa })
    }

    pub fn dim(&self) -> usize {
        match self {
            Self::Dirichlet(p) | Self::Elliptic { base: p, .. } => p.dim(),
            Self::Fixed(s) => s.dim(),
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> SiteDistribution {
        match self {
            Self::Dirichlet(p) => sample_dirichlet_site(p, rng),
            Self::Elliptic { base, kappa } => {
                let raw = sample_dirichlet_site(base, rng);
                SiteDistribution { probs: project_elliptic(&raw.probs, *kappa) }
            }
            Self::Fixed(s) => s.clone(),
        }
    }
}

const DEFAULT_CACHE_LIMIT: usize = 1 << 20;

/// I.i.d. environment materialised on demand.
///
/// The distribution at `x` is a pure function of `(seed, x)`; the memo table only
/// saves recomputation and is cleared when it reaches its size limit.
#[derive(Clone, Debug)]
pub struct LazyEnvironment {
    law: EnvironmentLaw,
    seed: u64,
    cache: HashMap<Vec<i64>, SiteDistribution>,
    cache_limit: usize,
}

impl LazyEnvironment {
    pub fn new(law: EnvironmentLaw, seed: u64) -> Self {
        Self { law, seed, cache: HashMap::new(), cache_limit: DEFAULT_CACHE_LIMIT }
    }

    pub fn with_cache_limit(mut self, limit: usize) -> Self {
        self.cache_limit = limit.max(1);
        self
    }

    pub fn law(&self) -> &EnvironmentLaw {
        &self.law
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn dim(&self) -> usize {
        self.law.dim()
    }

    pub fn cached_sites(&self) -> usize {
        self.cache.len()
    }

    /// Distribution at `site`, recomputed from scratch.
    pub fn site_distribution(&self, site: &[i64]) -> SiteDistribution {
        self.law.sample(&mut site_rng(self.seed, site))
    }

    pub fn site(&mut self, site: &[i64]) -> &SiteDistribution {
        if !self.cache.contains_key(site) {
            if self.cache.len() >= self.cache_limit {
                self.cache.clear();
            }
            let dist = self.site_distribution(site);
            self.cache.insert(site.to_vec(), dist);
        }
        &self.cache[site]
    }
}

/// Quenched walk from the origin in `env`; transitions drawn from `seed`.
pub fn gen_rwre_walk(env: &mut LazyEnvironment, n: usize, seed: u64) -> Result<DiscretePath<f64>> {
    check_steps(n)?;
    let dim = env.dim();
    let mut rng = walk_rng(seed);
    let mut pos = vec![0i64; dim];
    let mut data = Vec::with_capacity(dim * n);
    for _ in 0..n {
        let u = rng.random::<f64>();
        let i = pick(env.site(&pos).probs(), u);
        let axis = i / 2;
        let sign = if i % 2 == 0 { 1 } else { -1 };
        pos[axis] += sign;
        data.extend((0..dim).map(|k| if k == axis { sign as f64 } else { 0.0 }));
    }
    DiscretePath::new(dim, data, 1.0)
}

/// Annealed sample: a fresh environment keyed off the walk seed.
pub fn gen_annealed_rwre_walk(law: &EnvironmentLaw, n: usize, seed: u64) -> Result<DiscretePath<f64>> {
    let mut env = LazyEnvironment::new(law.clone(), environment_seed(seed));
    gen_rwre_walk(&mut env, n, seed)
}

/// Trap parameter of a Dirichlet environment and the ballisticity sum.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DirichletKappa {
    /// `κ = 2 Σ_e α_e − max_e (α_e + α_{−e})`; regeneration durations have a finite
    /// `p`-th moment iff `p < κ`.
    pub kappa: f64,
    /// `Σ_e |α_e − α_{−e}|` summed over all `2d` neighbours.
    pub ballisticity_sum: f64,
}

impl DirichletKappa {
    pub fn is_ballistic(&self) -> bool {
        self.ballisticity_sum > 1.0
    }

    /// Ballistic and `κ > 8`, the setting where the rough path limit applies with
    /// `p < κ/2`.
    pub fn admits_rough_limit(&self) -> bool {
        self.is_ballistic() && self.kappa > 8.0
    }
}

pub fn dirichlet_kappa(params: &DirichletParams) -> DirichletKappa {
    let a = &params.alpha;
    let total: f64 = a.iter().sum();
    let max_pair = (0..params.dim()).map(|i| a[2 * i] + a[2 * i + 1]).fold(f64::NEG_INFINITY, f64::max);
    let ballisticity_sum = (0..params.dim()).map(|i| 2.0 * (a[2 * i] - a[2 * i + 1]).abs()).sum();
    DirichletKappa { kappa: 2.0 * total - max_pair, ballisticity_sum }
}
