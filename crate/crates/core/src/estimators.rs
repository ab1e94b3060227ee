//! Block-level estimators of the speed `v`, covariance `M` and area anomaly `Γ`:
//!
//! ```text
//! v = E[X_{τ₁,τ₂}] / E[τ₂ − τ₁]
//! M = E[X̄_{τ₁,τ₂} ⊗ X̄_{τ₁,τ₂}] / E[τ₂ − τ₁]
//! Γ = E[A_{τ₁,τ₂}(X̄)] / E[τ₂ − τ₁]
//! ```
//!
//! with `X̄_n = X_n − n v`. Only blocks with index `k ≥ 2` enter; pooled blocks
//! from several replicas are filtered by [`Block::index`], so every replica's
//! first block is dropped. Centering uses the plug-in `v̂`, and the standard
//! errors come from the delta method applied to the block means, including the
//! variability of `v̂` itself. Sums run sequentially in block order.


use crate::error::{Error, Result};
use crate::lift::{dyadic_pairs, DiscretePath};
use crate::matrix::SquareMatrix;
use crate::regeneration::Block;
use crate::scalar::Scalar;

/// Fewest usable blocks (`k ≥ 2`) accepted by the estimators.
pub const MIN_USABLE_BLOCKS: usize = 2;

/// Fewest replicas per scale for [`kolmogorov_ratio`].
pub const MIN_KOLMOGOROV_REPLICAS: usize = 100;

fn usable<T: Scalar>(blocks: &[Block<T>]) -> Result<Vec<&Block<T>>> {
    let out: Vec<&Block<T>> = blocks.iter().filter(|b| b.index >= 2).collect();
    if out.len() < MIN_USABLE_BLOCKS {
        return Err(Error::InsufficientBlocks { needed: MIN_USABLE_BLOCKS, got: out.len() });
    }
    Ok(out)
}

fn check_dim(blocks: &[&Block<f64>], v: &[f64]) -> Result<usize> {
    let d = blocks[0].increment.len();
    if v.len() != d {
        return Err(Error::DimensionMismatch { left: d, right: v.len() });
    }
    Ok(d)
}

fn mean_duration(blocks: &[&Block<f64>]) -> f64 {
    blocks.iter().map(|b| b.duration() as f64).sum::<f64>() / blocks.len() as f64
}

/// `sqrt(Σ ψ² / (K (K − 1)))` for zero-mean influence values `ψ`.
fn standard_error(sum_sq: f64, k: usize) -> f64 {
    (sum_sq / (k as f64 * (k as f64 - 1.0))).sqrt()
}

/// `v̂` and its per-coordinate standard errors.
pub fn estimate_speed(blocks: &[Block<f64>]) -> Result<(Vec<f64>, Vec<f64>)> {
    let bs = usable(blocks)?;
    let d = bs[0].increment.len();
    let k = bs.len();
    let beta = mean_duration(&bs);
    let mut mean_x = vec![0.0; d];
    for b in &bs {
        for (m, &x) in mean_x.iter_mut().zip(&b.increment) {
            *m += x;
        }
    }
    let v: Vec<f64> = mean_x.iter().map(|m| m / k as f64 / beta).collect();
    let mut ss = vec![0.0; d];
    for b in &bs {
        let xbar = b.centered_increment(&v);
        for (s, x) in ss.iter_mut().zip(&xbar) {
            *s += (x / beta).powi(2);
        }
    }
    Ok((v, ss.into_iter().map(|s| standard_error(s, k)).collect()))
}

/// `M̂` and entrywise standard errors, given the plug-in speed `v`.
pub fn estimate_covariance(blocks: &[Block<f64>], v: &[f64]) -> Result<(SquareMatrix<f64>, SquareMatrix<f64>)> {
    let bs = usable(blocks)?;
    let d = check_dim(&bs, v)?;
    let k = bs.len() as f64;
    let beta = mean_duration(&bs);
    let centered: Vec<Vec<f64>> = bs.iter().map(|b| b.centered_increment(v)).collect();
    let mut m = SquareMatrix::zeros(d);
    let mut tau_x = vec![0.0; d];
    for (b, x) in bs.iter().zip(&centered) {
        let tau = b.duration() as f64;
        for i in 0..d {
            tau_x[i] += tau * x[i];
            for j in i..d {
                m.set(i, j, m.get(i, j) + x[i] * x[j]);
            }
        }
    }
    tau_x.iter_mut().for_each(|t| *t /= k);
    for i in 0..d {
        for j in i..d {
            let val = m.get(i, j) / k / beta;
            m.set(i, j, val);
            m.set(j, i, val);
        }
    }
    let mut ss = SquareMatrix::zeros(d);
    for (b, x) in bs.iter().zip(&centered) {
        let tau = b.duration() as f64;
        for i in 0..d {
            for j in i..d {
                let dv_i = x[i] / beta;
                let dv_j = x[j] / beta;
                let psi = (x[i] * x[j] - m.get(i, j) * tau - dv_i * tau_x[j] - tau_x[i] * dv_j) / beta;
                ss.set(i, j, ss.get(i, j) + psi * psi);
            }
        }
    }
    let se = SquareMatrix::from_fn(d, |i, j| {
        let (a, c) = if i <= j { (i, j) } else { (j, i) };
        standard_error(ss.get(a, c), bs.len())
    });
    Ok((m, se))
}

/// `Γ̂` and entrywise standard errors, given the plug-in speed `v`.
pub fn estimate_anomaly(blocks: &[Block<f64>], v: &[f64]) -> Result<(SquareMatrix<f64>, SquareMatrix<f64>)> {
    let bs = usable(blocks)?;
    let d = check_dim(&bs, v)?;
    let k = bs.len() as f64;
    let beta = mean_duration(&bs);
    let areas: Vec<SquareMatrix<f64>> = bs.iter().map(|b| b.centered_area(v)).collect();
    let mut gamma = SquareMatrix::<f64>::zeros(d);
    let mut mean_q = vec![0.0; d];
    for (b, a) in bs.iter().zip(&areas) {
        for i in 0..d {
            mean_q[i] += b.weighted[i];
            for j in i + 1..d {
                gamma.set(i, j, gamma.get(i, j) + a.get(i, j));
            }
        }
    }
    mean_q.iter_mut().for_each(|q| *q /= k);
    for i in 0..d {
        for j in i + 1..d {
            let val = gamma.get(i, j) / k / beta;
            gamma.set(i, j, val);
            gamma.set(j, i, -val);
        }
    }
    let mut ss = SquareMatrix::zeros(d);
    for (b, a) in bs.iter().zip(&areas) {
        let tau = b.duration() as f64;
        let dv: Vec<f64> = b.centered_increment(v).iter().map(|x| x / beta).collect();
        for i in 0..d {
            for j in i + 1..d {
                let shift = 0.5 * (dv[i] * mean_q[j] - mean_q[i] * dv[j]);
                let psi = (a.get(i, j) - gamma.get(i, j) * tau - shift) / beta;
                ss.set(i, j, ss.get(i, j) + psi * psi);
            }
        }
    }
    let se = SquareMatrix::from_fn(d, |i, j| {
        if i == j {
            0.0
        } else {
            let (a, c) = if i < j { (i, j) } else { (j, i) };
            standard_error(ss.get(a, c), bs.len())
        }
    });
    Ok((gamma, se))
}

/// Estimated `(v, M, Γ)` with standard errors.
#[derive(Clone, Debug, PartialEq)]
pub struct AnomalyEstimate {
    pub speed: Vec<f64>,
    pub speed_se: Vec<f64>,
    pub covariance: SquareMatrix<f64>,
    pub covariance_se: SquareMatrix<f64>,
    pub anomaly: SquareMatrix<f64>,
    pub anomaly_se: SquareMatrix<f64>,
    /// Number of blocks with index `k ≥ 2`.
    pub blocks_used: usize,
    /// `β̂ = mean(τ_k − τ_{k−1})`.
    pub mean_duration: f64,
}

impl AnomalyEstimate {
    pub fn dim(&self) -> usize {
        self.speed.len()
    }

    /// Largest `|Γ̂_ij − target_ij| / SE_ij` over `i < j`; zero-SE entries count as
    /// infinitely many SEs unless they match exactly.
    pub fn anomaly_z(&self, target: &SquareMatrix<f64>) -> f64 {
        let d = self.dim();
        let mut worst = 0.0f64;
        for i in 0..d {
            for j in i + 1..d {
                let diff = (self.anomaly.get(i, j) - target.get(i, j)).abs();
                let se = self.anomaly_se.get(i, j);
                let z = if diff == 0.0 { 0.0 } else if se == 0.0 { f64::INFINITY } else { diff / se };
                worst = worst.max(z);
            }
        }
        worst
    }
}

/// Two-pass estimate: `v̂` first, then `M̂` and `Γ̂` centered by `v̂`.
pub fn estimate(blocks: &[Block<f64>]) -> Result<AnomalyEstimate> {
    let (speed, speed_se) = estimate_speed(blocks)?;
    let (covariance, covariance_se) = estimate_covariance(blocks, &speed)?;
    let (anomaly, anomaly_se) = estimate_anomaly(blocks, &speed)?;
    let bs = usable(blocks)?;
    Ok(AnomalyEstimate {
        speed,
        speed_se,
        covariance,
        covariance_se,
        anomaly,
        anomaly_se,
        blocks_used: bs.len(),
        mean_duration: mean_duration(&bs),
    })
}

/// The two routes to the anomaly of a single block, before dividing by `β`.
///
/// `direct` lifts the centered increments `ΔX − v`; `lemma` adds to the
/// uncentered area the drift cross terms
/// `½ Σ_{k<l} (v⊗ΔX_k + ΔX_l⊗v) − (ΔX_k⊗v + v⊗ΔX_l)`.
pub fn block_anomaly_routes<T: Scalar>(
    path: &DiscretePath<T>,
    block: &Block<T>,
    v: &[T],
) -> Result<(SquareMatrix<T>, SquareMatrix<T>)> {
    let d = path.dim();
    if v.len() != d {
        return Err(Error::DimensionMismatch { left: d, right: v.len() });
    }
    if block.end > path.len() || block.start >= block.end {
        return Err(Error::MismatchedDecomposition(format!(
            "block [{}, {}] outside path of length {}",
            block.start,
            block.end,
            path.len()
        )));
    }
    let direct = path.center(v)?.area_window(block.start, block.end)?;

    let uncentered = path.area_window(block.start, block.end)?;
    // prefix_sum: Σ_{k<l} ΔX_k; later: Σ_l (l − 1) ΔX_l; earlier: Σ_l prefix_l.
    let mut prefix = vec![T::zero(); d];
    let mut later = vec![T::zero(); d];
    let mut earlier = vec![T::zero(); d];
    let mut count = T::zero();
    for s in block.start..block.end {
        let x = path.step(s);
        for i in 0..d {
            earlier[i] = earlier[i] + prefix[i];
            later[i] = later[i] + count * x[i];
        }
        for i in 0..d {
            prefix[i] = prefix[i] + x[i];
        }
        count = count + T::one();
    }
    let lemma = SquareMatrix::from_fn(d, |i, j| {
        let cross = (v[i] * earlier[j] + later[i] * v[j]) - (earlier[i] * v[j] + v[i] * later[j]);
        uncentered.get(i, j) + cross.half()
    });
    Ok((direct, lemma))
}

/// `Γ̂` by the direct route and by the uncentered-area-plus-drift-terms route.
pub fn anomaly_decomposition<T: Scalar>(
    path: &DiscretePath<T>,
    blocks: &[Block<T>],
    v: &[T],
) -> Result<(SquareMatrix<T>, SquareMatrix<T>)> {
    let bs = usable(blocks)?;
    let d = path.dim();
    let mut direct = SquareMatrix::zeros(d);
    let mut lemma = SquareMatrix::zeros(d);
    let mut total = T::zero();
    for b in bs {
        let (a, l) = block_anomaly_routes(path, b, v)?;
        direct = direct.add(&a);
        lemma = lemma.add(&l);
        total = total + T::from_usize(b.duration()).expect("duration representable");
    }
    Ok((direct.scale(T::one() / total), lemma.scale(T::one() / total)))
}

/// `p* = min(⌊p⌋, 2⌊p/2⌋)` and the Hölder exponent bound `(p* − 1)/(2p*)`.
///
/// For Dirichlet environments with trap parameter `κ > 8` take `p < κ/2`. The
/// range `½ − 1/(κ/2)*` sometimes quoted in that setting subtracts twice as much
/// as `½ − 1/(2p*)`; the bound reported here is the latter.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PStar {
    pub value: u32,
    /// `None` when `p* = 0`.
    pub holder_bound: Option<f64>,
}

pub fn pstar(p: f64) -> Result<PStar> {
    if !(p >= 1.0) || !p.is_finite() {
        return Err(Error::InvalidParameter(format!("p must be >= 1, got {p}")));
    }
    let floor = p.floor() as u32;
    let even = 2 * (p / 2.0).floor() as u32;
    let value = floor.min(even);
    let holder_bound = (value > 0).then(|| (value as f64 - 1.0) / (2.0 * value as f64));
    Ok(PStar { value, holder_bound })
}

/// Paths of `N · T` steps used at scale `N`.
#[derive(Clone, Debug)]
pub struct ScaleSample {
    pub scale: usize,
    pub paths: Vec<DiscretePath<f64>>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct KolmogorovRow {
    pub scale: usize,
    pub replicas: usize,
    /// `max_{(s,t)} mean ‖ι^{(N)}(X)_{s,t}‖^{2p*} / |t − s|^{p*}` over dyadic pairs.
    pub max_ratio: f64,
    /// Grid pair attaining the maximum, in grid-index units.
    pub argmax: (usize, usize),
}

/// Empirical Kolmogorov ratios on dyadic grid pairs, one row per scale.
pub fn kolmogorov_ratio(samples: &[ScaleSample], pstar: u32) -> Result<Vec<KolmogorovRow>> {
    if samples.is_empty() {
        return Err(Error::EmptyGrid);
    }
    let mut rows = Vec::with_capacity(samples.len());
    for sample in samples {
        if sample.paths.len() < MIN_KOLMOGOROV_REPLICAS {
            return Err(Error::InsufficientReplicas { needed: MIN_KOLMOGOROV_REPLICAS, got: sample.paths.len() });
        }
        let len = sample.paths[0].len();
        if sample.paths.iter().any(|p| p.len() != len) {
            return Err(Error::InvalidParameter("paths at one scale must share a length".into()));
        }
        let pairs = dyadic_pairs(len);
        if pairs.is_empty() {
            return Err(Error::EmptyGrid);
        }
        let mut sums = vec![0.0; pairs.len()];
        for path in &sample.paths {
            let lift = path.rescale(sample.scale)?;
            for (acc, &(s, t)) in sums.iter_mut().zip(&pairs) {
                *acc += lift.window(s, t)?.homogeneous_norm().powi(2 * pstar as i32);
            }
        }
        let reps = sample.paths.len() as f64;
        let mut best = (0.0, pairs[0]);
        for (sum, &(s, t)) in sums.iter().zip(&pairs) {
            let dt = (t - s) as f64 / sample.scale as f64;
            let ratio = sum / reps / dt.powi(pstar as i32);
            if ratio > best.0 {
                best = (ratio, (s, t));
            }
        }
        rows.push(KolmogorovRow { scale: sample.scale, replicas: sample.paths.len(), max_ratio: best.0, argmax: best.1 });
    }
    Ok(rows)
}

/// `max / min` of the per-scale maxima; 1 when all are zero.
pub fn kolmogorov_spread(rows: &[KolmogorovRow]) -> f64 {
    let max = rows.iter().map(|r| r.max_ratio).fold(0.0, f64::max);
    let min = rows.iter().map(|r| r.max_ratio).fold(f64::INFINITY, f64::min);
    if max == 0.0 {
        1.0
    } else {
        max / min
    }
}
