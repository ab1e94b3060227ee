//! Regeneration times in a direction `ℓ` and the induced block decomposition.
//!
//! A time `n` is a regeneration time when the projected path `X·ℓ` is a strict
//! record at `n` (`X_m·ℓ < X_n·ℓ` for all `m < n`) and stays strictly above that
//! level afterwards (`X_m·ℓ > X_n·ℓ` for all `m > n`). On a finite horizon the
//! future condition is only known up to the last index, so times later than
//! `len − margin` are left unconfirmed and the tail after the last confirmed time
//! is censored.

use std::io::Write;

use crate::algebra::G2Element;
use crate::error::{Error, Result};
use crate::lift::DiscretePath;
use crate::matrix::SquareMatrix;
use crate::scalar::{to_f64, Scalar};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TimesSource {
    Detected,
    Known,
}

/// Regeneration times `0 = τ₀ < τ₁ < ... < τ_K` of one path.
#[derive(Clone, Debug, PartialEq)]
pub struct RegenerationDecomposition {
    direction: Option<Vec<f64>>,
    times: Vec<usize>,
    path_len: usize,
    source: TimesSource,
}

impl RegenerationDecomposition {
    /// Decomposition at externally known times (e.g. `τ_k = 4k`).
    pub fn from_times(path_len: usize, mut times: Vec<usize>) -> Result<Self> {
        if times.first() != Some(&0) {
            times.insert(0, 0);
        }
        if times.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidParameter("regeneration times must be strictly increasing".into()));
        }
        if let Some(&last) = times.last() {
            if last > path_len {
                return Err(Error::InvalidWindow { m: 0, n: last, len: path_len });
            }
        }
        Ok(Self { direction: None, times, path_len, source: TimesSource::Known })
    }

    /// `τ_k = k · period` for all multiples inside the path.
    pub fn periodic(path_len: usize, period: usize) -> Result<Self> {
        if period == 0 {
            return Err(Error::InvalidParameter("period must be positive".into()));
        }
        Self::from_times(path_len, (0..=path_len / period).map(|k| k * period).collect())
    }

    pub fn times(&self) -> &[usize] {
        &self.times
    }

    pub fn direction(&self) -> Option<&[f64]> {
        self.direction.as_deref()
    }

    pub fn source(&self) -> TimesSource {
        self.source
    }

    pub fn path_len(&self) -> usize {
        self.path_len
    }

    pub fn num_blocks(&self) -> usize {
        self.times.len() - 1
    }

    pub fn last_time(&self) -> usize {
        *self.times.last().expect("τ₀ always present")
    }

    pub fn is_censored(&self) -> bool {
        self.last_time() < self.path_len
    }

    /// `[τ_K, len]`, excluded from all block statistics.
    pub fn censored_tail(&self) -> Option<(usize, usize)> {
        self.is_censored().then(|| (self.last_time(), self.path_len))
    }

    /// Re-checks both record conditions for every `τ_k`, `k ≥ 1`, in `O(n)`.
    pub fn satisfies_record_conditions<T: Scalar>(&self, path: &DiscretePath<T>) -> Result<bool> {
        let dir = match &self.direction {
            Some(d) => d,
            None => return Ok(true),
        };
        let proj = path.projection(dir)?;
        let (past_max, future_min) = record_envelopes(&proj);
        Ok(self.times[1..].iter().all(|&n| proj[n] > past_max[n] && proj[n] < future_min[n]))
    }
}

/// `past_max[n] = max_{m<n} y_m` and `future_min[n] = min_{m>n} y_m`, with
/// infinities for empty ranges.
fn record_envelopes(proj: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let len = proj.len();
    let mut past_max = vec![f64::NEG_INFINITY; len];
    for n in 1..len {
        past_max[n] = past_max[n - 1].max(proj[n - 1]);
    }
    let mut future_min = vec![f64::INFINITY; len];
    for n in (0..len.saturating_sub(1)).rev() {
        future_min[n] = future_min[n + 1].min(proj[n + 1]);
    }
    (past_max, future_min)
}

pub fn detect_regenerations<T: Scalar>(
    path: &DiscretePath<T>,
    direction: &[f64],
    margin: usize,
) -> Result<RegenerationDecomposition> {
    if path.is_empty() {
        return Err(Error::EmptyPath);
    }
    let norm = direction.iter().map(|x| x * x).sum::<f64>().sqrt();
    if (norm - 1.0).abs() > 1e-12 {
        return Err(Error::NonUnitDirection(norm));
    }
    let proj = path.projection(direction)?;
    let (past_max, future_min) = record_envelopes(&proj);
    let horizon = path.len().saturating_sub(margin);
    let mut times = vec![0];
    for n in 1..=horizon {
        if proj[n] > past_max[n] && proj[n] < future_min[n] {
            times.push(n);
        }
    }
    Ok(RegenerationDecomposition {
        direction: Some(direction.to_vec()),
        times,
        path_len: path.len(),
        source: TimesSource::Detected,
    })
}

/// Statistics of one regeneration block `[τ_{k−1}, τ_k]`.
#[derive(Clone, Debug, PartialEq)]
pub struct Block<T> {
    /// Block number `k ≥ 1`.
    pub index: usize,
    pub start: usize,
    pub end: usize,
    /// `X_{τ_{k−1}, τ_k}`.
    pub increment: Vec<T>,
    /// Uncentered area `½(S − Sᵀ)` of the block.
    pub area: SquareMatrix<T>,
    /// `Q = Σ_j (2j − L − 1) ΔX_j` over the block's `L` increments; centering by
    /// `v` shifts the area by `−½(v ⊗ Q − Q ⊗ v)`.
    pub weighted: Vec<T>,
}

impl<T: Scalar> Block<T> {
    pub fn duration(&self) -> usize {
        self.end - self.start
    }

    fn duration_t(&self) -> T {
        T::from_usize(self.duration()).expect("duration representable")
    }

    /// `X̄_{τ_{k−1}, τ_k} = X_{τ_{k−1}, τ_k} − (τ_k − τ_{k−1}) v`.
    pub fn centered_increment(&self, v: &[T]) -> Vec<T> {
        let l = self.duration_t();
        self.increment.iter().zip(v).map(|(&x, &c)| x - l * c).collect()
    }

    /// Area of the block after centering the path by `v`.
    pub fn centered_area(&self, v: &[T]) -> SquareMatrix<T> {
        let q = &self.weighted;
        SquareMatrix::from_fn(self.area.dim(), |i, j| self.area.get(i, j) - (v[i] * q[j] - q[i] * v[j]).half())
    }

    /// Lift of the centered block: `(X̄, ½ X̄ ⊗ X̄ + Ā)`.
    pub fn centered_lift(&self, v: &[T]) -> G2Element<T> {
        let x = self.centered_increment(v);
        let area = self.centered_area(v);
        let b = SquareMatrix::from_fn(x.len(), |i, j| (x[i] * x[j]).half() + area.get(i, j));
        G2Element::new(x, b).expect("block dimensions consistent")
    }
}

/// Cuts `path` at the decomposition's times; the censored tail is dropped.
pub fn decompose<T: Scalar>(path: &DiscretePath<T>, decomposition: &RegenerationDecomposition) -> Result<Vec<Block<T>>> {
    if path.len() != decomposition.path_len {
        return Err(Error::MismatchedDecomposition(format!(
            "path has {} steps, decomposition expects {}",
            path.len(),
            decomposition.path_len
        )));
    }
    let d = path.dim();
    let times = decomposition.times();
    let mut blocks = Vec::with_capacity(times.len().saturating_sub(1));
    for (k, w) in times.windows(2).enumerate() {
        let (start, end) = (w[0], w[1]);
        let lift = path.lift_window(start, end)?;
        let len = T::from_usize(end - start).expect("duration representable");
        let mut weighted = vec![T::zero(); d];
        let mut j = T::one();
        for s in start..end {
            let c = j + j - len - T::one();
            for (q, &x) in weighted.iter_mut().zip(path.step(s)) {
                *q = *q + c * x;
            }
            j = j + T::one();
        }
        blocks.push(Block {
            index: k + 1,
            start,
            end,
            increment: lift.level1().to_vec(),
            area: lift.area(),
            weighted,
        });
    }
    Ok(blocks)
}

/// `⊗_k (ΔY_k, ½ ΔY_k^{⊗2}) ⊗ (0, Σ_k a_k)` for the blocks centered by `v`,
/// which equals the lift of the centered path over `[τ₀, τ_K]`.
pub fn splice_blocks<T: Scalar>(blocks: &[Block<T>], v: &[T]) -> G2Element<T> {
    let d = v.len();
    let mut g = G2Element::identity(d);
    let mut areas = SquareMatrix::zeros(d);
    for b in blocks {
        g.push_step(&b.centered_increment(v)).expect("dimension");
        areas = areas.add(&b.centered_area(v));
    }
    g.mul(&G2Element::central(areas)).expect("dimension")
}

/// Empirical `E[(τ_k − τ_{k−1})^{2p}]` over blocks `k ≥ 2`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BlockMoments {
    pub p: f64,
    pub moment: f64,
    pub blocks_used: usize,
    /// Slope of `log P(D ≥ d)` against `log d` over the upper tail; `None` when the
    /// durations take fewer than three distinct values.
    pub tail_slope: Option<f64>,
}

pub fn block_moments<T: Scalar>(blocks: &[Block<T>], p: f64) -> Result<BlockMoments> {
    if !(p >= 1.0) {
        return Err(Error::InvalidParameter(format!("moment order p must be >= 1, got {p}")));
    }
    if blocks.len() < 2 {
        return Err(Error::InsufficientBlocks { needed: 2, got: blocks.len() });
    }
    let durations: Vec<usize> = blocks[1..].iter().map(Block::duration).collect();
    let moment = durations.iter().map(|&d| (d as f64).powf(2.0 * p)).sum::<f64>() / durations.len() as f64;
    Ok(BlockMoments { p, moment, blocks_used: durations.len(), tail_slope: tail_slope(&durations) })
}

/// Points `(log d, log P(D ≥ d))` for each distinct duration `d`.
pub fn survival_points(durations: &[usize]) -> Vec<(f64, f64)> {
    let mut sorted = durations.to_vec();
    sorted.sort_unstable();
    let n = sorted.len() as f64;
    let mut out = Vec::new();
    let mut i = 0;
    while i < sorted.len() {
        let d = sorted[i];
        out.push(((d as f64).ln(), ((sorted.len() - i) as f64 / n).ln()));
        while i < sorted.len() && sorted[i] == d {
            i += 1;
        }
    }
    out
}

/// Least-squares slope over the upper half of the survival points.
pub fn tail_slope(durations: &[usize]) -> Option<f64> {
    let pts = survival_points(durations);
    if pts.len() < 3 {
        return None;
    }
    let tail = &pts[pts.len() / 2..];
    let tail = if tail.len() < 2 { &pts[..] } else { tail };
    let n = tail.len() as f64;
    let mx = tail.iter().map(|p| p.0).sum::<f64>() / n;
    let my = tail.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = tail.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = tail.iter().map(|p| (p.0 - mx).powi(2)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

/// Lag-1 autocorrelation of durations over blocks `k ≥ 2`; near zero when the
/// blocks behave as independent.
pub fn duration_lag1_correlation<T: Scalar>(blocks: &[Block<T>]) -> Option<f64> {
    let d: Vec<f64> = blocks.iter().skip(1).map(|b| b.duration() as f64).collect();
    if d.len() < 3 {
        return None;
    }
    let n = d.len() as f64;
    let mean = d.iter().sum::<f64>() / n;
    let var: f64 = d.iter().map(|x| (x - mean).powi(2)).sum();
    if var == 0.0 {
        return None;
    }
    let cov: f64 = d.windows(2).map(|w| (w[0] - mean) * (w[1] - mean)).sum();
    Some(cov / var)
}

/// Comma-separated block summaries: duration, increment, then the area as its
/// strictly upper entries for `d ≤ 3` or the full flattened matrix otherwise.
pub fn write_block_records<T: Scalar, W: Write>(blocks: &[Block<T>], mut w: W) -> std::io::Result<()> {
    let d = match blocks.first() {
        Some(b) => b.increment.len(),
        None => return Ok(()),
    };
    let mut header = vec!["duration".to_string()];
    header.extend((1..=d).map(|i| format!("dx{i}")));
    if d <= 3 {
        for i in 1..=d {
            for j in i + 1..=d {
                header.push(format!("a{i}{j}"));
            }
        }
    } else {
        for i in 1..=d {
            for j in 1..=d {
                header.push(format!("a{i}_{j}"));
            }
        }
    }
    writeln!(w, "{}", header.join(","))?;
    for b in blocks {
        let mut fields = vec![b.duration().to_string()];
        fields.extend(b.increment.iter().map(|&x| fmt(to_f64(x))));
        let area = if d <= 3 { b.area.strict_upper() } else { b.area.as_slice().to_vec() };
        fields.extend(area.into_iter().map(|x| fmt(to_f64(x))));
        writeln!(w, "{}", fields.join(","))?;
    }
    Ok(())
}

fn fmt(x: f64) -> String {
    if x == 0.0 {
        "0".into()
    } else {
        format!("{x}")
    }
}
