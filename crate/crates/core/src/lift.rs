//! Level-2 lifts of discrete paths.
//!
//! A path is stored as its increments `ΔX_1, ..., ΔX_n`. The lift over an index
//! window `[m, n]` is the pair `(X_{m,n}, S_{m,n})` with
//!
//! ```text
//! S_{m,n}^{ij} = Σ_{m<k<l≤n} ΔX_k^i ΔX_l^j + ½ Σ_{m<k≤n} ΔX_k^i ΔX_k^j
//! ```
//!
//! which is the level-2 iterated integral of the piecewise linear interpolation.
//! It is computed by folding Chen's rule one increment at a time.

use std::io::{BufRead, Write};

use num_traits::Float;

use crate::algebra::G2Element;
use crate::error::{Error, Result};
use crate::matrix::SquareMatrix;
use crate::scalar::{to_f64, Scalar};

#[derive(Clone, Debug, PartialEq)]
pub struct DiscretePath<T> {
    dim: usize,
    data: Vec<T>,
    jump_bound: f64,
}

fn euclid<T: Scalar>(v: &[T]) -> f64 {
    v.iter().map(|&x| to_f64(x).powi(2)).sum::<f64>().sqrt()
}

impl<T: Scalar> DiscretePath<T> {
    /// Builds a path from flat row-major increments, checking `|ΔX_k|₂ ≤ K`.
    pub fn new(dim: usize, data: Vec<T>, jump_bound: f64) -> Result<Self> {
        if dim == 0 {
            return Err(Error::ZeroDimension);
        }
        if data.len() % dim != 0 {
            return Err(Error::DimensionMismatch { left: dim, right: data.len() % dim });
        }
        if !data.iter().all(Scalar::is_finite_value) {
            return Err(Error::NonFinite);
        }
        for (index, step) in data.chunks(dim).enumerate() {
            let norm = euclid(step);
            if norm > jump_bound * (1.0 + 1e-12) {
                return Err(Error::JumpBound { index, norm, bound: jump_bound });
            }
        }
        Ok(Self { dim, data, jump_bound })
    }

    /// Builds a path whose jump bound is the largest increment norm.
    pub fn from_increments(dim: usize, data: Vec<T>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::ZeroDimension);
        }
        let bound = data.chunks(dim).map(euclid).fold(0.0, f64::max);
        Self::new(dim, data, bound)
    }

    pub fn from_steps<S: AsRef<[T]>>(dim: usize, steps: &[S]) -> Result<Self> {
        let mut data = Vec::with_capacity(steps.len() * dim);
        for s in steps {
            let s = s.as_ref();
            if s.len() != dim {
                return Err(Error::DimensionMismatch { left: dim, right: s.len() });
            }
            data.extend_from_slice(s);
        }
        Self::from_increments(dim, data)
    }

    pub fn zeros(dim: usize, len: usize) -> Self {
        Self { dim, data: vec![T::zero(); dim * len], jump_bound: 0.0 }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of increments.
    pub fn len(&self) -> usize {
        self.data.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn jump_bound(&self) -> f64 {
        self.jump_bound
    }

    /// Increment `ΔX_{k+1}` (zero-based).
    pub fn step(&self, k: usize) -> &[T] {
        &self.data[k * self.dim..(k + 1) * self.dim]
    }

    pub fn steps(&self) -> std::slice::Chunks<'_, T> {
        self.data.chunks(self.dim)
    }

    pub fn as_flat(&self) -> &[T] {
        &self.data
    }

    pub fn map<U: Scalar>(&self, f: impl Fn(T) -> U) -> DiscretePath<U> {
        DiscretePath { dim: self.dim, data: self.data.iter().map(|&x| f(x)).collect(), jump_bound: self.jump_bound }
    }

    /// Increment `X_{m,n} = X_n − X_m`.
    pub fn increment(&self, m: usize, n: usize) -> Result<Vec<T>> {
        self.check_window(m, n)?;
        let mut acc = vec![T::zero(); self.dim];
        for s in self.data[m * self.dim..n * self.dim].chunks(self.dim) {
            for (a, &x) in acc.iter_mut().zip(s) {
                *a = *a + x;
            }
        }
        Ok(acc)
    }

    /// Positions `X_0 = 0, X_1, ..., X_n` projected on `direction`.
    pub fn projection(&self, direction: &[f64]) -> Result<Vec<f64>> {
        if direction.len() != self.dim {
            return Err(Error::DimensionMismatch { left: self.dim, right: direction.len() });
        }
        let mut out = Vec::with_capacity(self.len() + 1);
        let mut level = 0.0;
        out.push(level);
        for s in self.steps() {
            level += s.iter().zip(direction).map(|(&x, &l)| to_f64(x) * l).sum::<f64>();
            out.push(level);
        }
        Ok(out)
    }

    fn check_window(&self, m: usize, n: usize) -> Result<()> {
        if m >= n || n > self.len() {
            return Err(Error::InvalidWindow { m, n, len: self.len() });
        }
        Ok(())
    }

    /// Lift over `[m, n]` by streaming Chen updates, `O((n − m) d²)`.
    pub fn lift_window(&self, m: usize, n: usize) -> Result<WindowSignature<T>> {
        self.check_window(m, n)?;
        let mut g = G2Element::identity(self.dim);
        for k in m..n {
            g.push_step(self.step(k))?;
        }
        Ok(WindowSignature { m, n, g })
    }

    /// Signed area `½(S − Sᵀ)` over `[m, n]`.
    pub fn area_window(&self, m: usize, n: usize) -> Result<SquareMatrix<T>> {
        Ok(self.lift_window(m, n)?.g.second().antisymmetric_part())
    }

    /// Lifts over `[0, k]` for every `k = 0..=n`.
    pub fn prefix_lifts(&self) -> Vec<G2Element<T>> {
        let mut out = Vec::with_capacity(self.len() + 1);
        let mut g = G2Element::identity(self.dim);
        out.push(g.clone());
        for s in self.steps() {
            g.push_step(s).expect("path dimension is consistent");
            out.push(g.clone());
        }
        out
    }

    /// Centered path `X̄_n = X_n − n v`.
    pub fn center(&self, v: &[T]) -> Result<Self> {
        if v.len() != self.dim {
            return Err(Error::DimensionMismatch { left: self.dim, right: v.len() });
        }
        let data = self
            .data
            .chunks(self.dim)
            .flat_map(|s| s.iter().zip(v).map(|(&x, &c)| x - c))
            .collect();
        Ok(Self { dim: self.dim, data, jump_bound: self.jump_bound + euclid(v) })
    }
}

impl<T: Scalar + Float> DiscretePath<T> {
    /// Grid-time view of `ι^{(N)}(X)`.
    pub fn rescale(&self, scale: usize) -> Result<RescaledLift<T>> {
        RescaledLift::new(self, scale)
    }
}

/// Lift of a path over the index window `[m, n]`.
#[derive(Clone, Debug, PartialEq)]
pub struct WindowSignature<T> {
    pub m: usize,
    pub n: usize,
    pub g: G2Element<T>,
}

impl<T: Scalar> WindowSignature<T> {
    /// Empty window `[m, m]` carrying the identity.
    pub fn empty(dim: usize, m: usize) -> Self {
        Self { m, n: m, g: G2Element::identity(dim) }
    }

    /// Extends the window by one increment, `O(d²)`.
    pub fn extend(mut self, step: &[T]) -> Result<Self> {
        self.g.push_step(step)?;
        self.n += 1;
        Ok(self)
    }

    pub fn level1(&self) -> &[T] {
        self.g.first()
    }

    pub fn level2(&self) -> &SquareMatrix<T> {
        self.g.second()
    }

    pub fn area(&self) -> SquareMatrix<T> {
        self.g.second().antisymmetric_part()
    }
}

/// Free-function form of [`WindowSignature::extend`].
pub fn lift_stream<T: Scalar>(state: WindowSignature<T>, step: &[T]) -> Result<WindowSignature<T>> {
    state.extend(step)
}

/// `ι^{(N)}(X)` evaluated on the grid `{0, 1/N, ..., n/N}`.
///
/// Window values are obtained from prefix lifts by `δ_{1/√N}(P_s⁻¹ ⊗ P_t)`.
#[derive(Clone, Debug)]
pub struct RescaledLift<T> {
    scale: usize,
    prefixes: Vec<G2Element<T>>,
}

impl<T: Scalar + Float> RescaledLift<T> {
    pub fn new(path: &DiscretePath<T>, scale: usize) -> Result<Self> {
        if scale == 0 {
            return Err(Error::NonPositiveScale(0.0));
        }
        Ok(Self { scale, prefixes: path.prefix_lifts() })
    }

    pub fn scale(&self) -> usize {
        self.scale
    }

    /// Number of grid steps, so the horizon is `T = steps / N`.
    pub fn steps(&self) -> usize {
        self.prefixes.len() - 1
    }

    pub fn horizon(&self) -> f64 {
        self.steps() as f64 / self.scale as f64
    }

    fn factor(&self) -> T {
        T::one() / T::from(self.scale).expect("scale fits").sqrt()
    }

    /// `ι^{(N)}(X)_{s/N, t/N}` for grid indices `s ≤ t`.
    pub fn window(&self, s: usize, t: usize) -> Result<G2Element<T>> {
        if s > t || t > self.steps() {
            return Err(Error::InvalidWindow { m: s, n: t, len: self.steps() });
        }
        self.prefixes[s].between(&self.prefixes[t])?.dilate(self.factor())
    }

    /// `ι^{(N)}(X)_{0, t/N}`.
    pub fn at(&self, t: usize) -> Result<G2Element<T>> {
        self.window(0, t)
    }

    fn grid_index(&self, time: f64) -> Result<usize> {
        let x = time * self.scale as f64;
        let r = x.round();
        if !(time >= 0.0) || (x - r).abs() > 1e-9 * x.abs().max(1.0) || r as usize > self.steps() {
            return Err(Error::OffGrid(time));
        }
        Ok(r as usize)
    }

    /// Evaluation at real times; only grid times `k/N` are accepted.
    pub fn window_at_times(&self, s: f64, t: f64) -> Result<G2Element<T>> {
        let (i, j) = (self.grid_index(s)?, self.grid_index(t)?);
        self.window(i, j)
    }
}

/// Set of grid pairs `(s, t)`, in grid-index units, used by Hölder diagnostics.
#[derive(Clone, Debug, PartialEq)]
pub enum HolderGrid {
    /// Intervals `[i 2^j, (i+1) 2^j]` for every level `j` fitting in the path.
    Dyadic,
    /// All pairs `s < t`; only for paths of at most `2^12` steps.
    Full,
    Pairs(Vec<(usize, usize)>),
}

pub const FULL_GRID_LIMIT: usize = 1 << 12;

/// Dyadic intervals of lengths `1, 2, 4, ...` tiling `[0, len]` from the left.
pub fn dyadic_pairs(len: usize) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    let mut h = 1;
    while h <= len {
        let mut s = 0;
        while s + h <= len {
            out.push((s, s + h));
            s += h;
        }
        h *= 2;
    }
    out
}

impl HolderGrid {
    pub fn pairs(&self, len: usize) -> Result<Vec<(usize, usize)>> {
        let pairs = match self {
            HolderGrid::Dyadic => dyadic_pairs(len),
            HolderGrid::Full => {
                if len > FULL_GRID_LIMIT {
                    return Err(Error::InvalidParameter(format!(
                        "full grid limited to {FULL_GRID_LIMIT} steps, got {len}"
                    )));
                }
                (0..len).flat_map(|s| (s + 1..=len).map(move |t| (s, t))).collect()
            }
            HolderGrid::Pairs(p) => {
                if let Some(&(s, t)) = p.iter().find(|&&(s, t)| s >= t || t > len) {
                    return Err(Error::InvalidWindow { m: s, n: t, len });
                }
                p.clone()
            }
        };
        if pairs.is_empty() {
            return Err(Error::EmptyGrid);
        }
        Ok(pairs)
    }
}

/// Grid estimate of `‖X‖_α + ‖𝕏‖_{2α}`, a lower bound for the Hölder rough path norm.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HolderNorm {
    pub first: f64,
    pub second: f64,
}

impl HolderNorm {
    pub fn total(&self) -> f64 {
        self.first + self.second
    }
}

pub fn holder_norm<T: Scalar + Float>(lift: &RescaledLift<T>, alpha: f64, grid: &HolderGrid) -> Result<HolderNorm> {
    if !(alpha > 1.0 / 3.0 && alpha <= 0.5) {
        return Err(Error::InvalidParameter(format!("alpha {alpha} outside (1/3, 1/2]")));
    }
    let pairs = grid.pairs(lift.steps())?;
    let n = lift.scale() as f64;
    let mut first = 0.0f64;
    let mut second = 0.0f64;
    for (s, t) in pairs {
        let w = lift.window(s, t)?;
        let dt = (t - s) as f64 / n;
        let a = euclid(w.first());
        let b = to_f64(w.second().frobenius());
        first = first.max(a / dt.powf(alpha));
        second = second.max(b / dt.powf(2.0 * alpha));
    }
    Ok(HolderNorm { first, second })
}

fn fmt_num(x: f64) -> String {
    if x == 0.0 {
        "0".to_string()
    } else {
        format!("{x}")
    }
}

/// Writes the line-delimited record format: a header `# d=<d> n=<n> K=<K>`
/// followed by one increment per line as comma-separated numbers.
pub fn write_path<W: Write>(path: &DiscretePath<f64>, mut w: W) -> std::io::Result<()> {
    writeln!(w, "# d={} n={} K={}", path.dim(), path.len(), fmt_num(path.jump_bound()))?;
    let mut line = String::new();
    for s in path.steps() {
        line.clear();
        for (i, &x) in s.iter().enumerate() {
            if i > 0 {
                line.push(',');
            }
            line.push_str(&fmt_num(x));
        }
        line.push('\n');
        w.write_all(line.as_bytes())?;
    }
    Ok(())
}

pub fn read_path<R: BufRead>(r: R) -> Result<DiscretePath<f64>> {
    let mut lines = r.lines().enumerate();
    let parse_err = |line: usize, msg: String| Error::Parse { line: line + 1, msg };
    let (i0, header) = match lines.next() {
        Some((i, Ok(h))) => (i, h),
        Some((i, Err(e))) => return Err(parse_err(i, e.to_string())),
        None => return Err(Error::Parse { line: 1, msg: "missing header".into() }),
    };
    let header = header.trim().strip_prefix('#').ok_or_else(|| parse_err(i0, "header must start with '#'".into()))?;
    let (mut d, mut n, mut k) = (None, None, None);
    for field in header.split_whitespace() {
        let (key, value) = field.split_once('=').ok_or_else(|| parse_err(i0, format!("bad header field {field}")))?;
        match key {
            "d" => d = value.parse::<usize>().ok(),
            "n" => n = value.parse::<usize>().ok(),
            "K" => k = value.parse::<f64>().ok(),
            _ => {}
        }
    }
    let (d, n, k) = match (d, n, k) {
        (Some(d), Some(n), Some(k)) => (d, n, k),
        _ => return Err(parse_err(i0, "header needs d, n and K".into())),
    };
    let mut data = Vec::with_capacity(d * n);
    for (i, line) in lines {
        let line = line.map_err(|e| parse_err(i, e.to_string()))?;
        if line.trim().is_empty() {
            continue;
        }
        let before = data.len();
        for tok in line.split(',') {
            data.push(tok.trim().parse::<f64>().map_err(|e| parse_err(i, e.to_string()))?);
        }
        if data.len() - before != d {
            return Err(parse_err(i, format!("expected {d} values")));
        }
    }
    if data.len() != d * n {
        return Err(Error::Parse { line: 1, msg: format!("header announces {n} increments, found {}", data.len() / d.max(1)) });
    }
    DiscretePath::new(d, data, k)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::Rational64;
    use proptest::prelude::*;

    type Q = Rational64;

    fn q(n: i64) -> Q {
        Q::from_integer(n)
    }

    fn lattice_path(steps: &[(i64, i64)]) -> DiscretePath<Q> {
        let s: Vec<[Q; 2]> = steps.iter().map(|&(x, y)| [q(x), q(y)]).collect();
        DiscretePath::from_steps(2, &s).unwrap()
    }

    /// Direct evaluation of the double-sum formula, `O(n²)`.
    fn double_sum(path: &DiscretePath<Q>, m: usize, n: usize) -> (Vec<Q>, SquareMatrix<Q>) {
        let d = path.dim();
        let mut s = SquareMatrix::zeros(d);
        let mut x = vec![q(0); d];
        for k in m..n {
            let dk = path.step(k);
            for i in 0..d {
                x[i] += dk[i];
                for j in 0..d {
                    let mut v = s.get(i, j) + (dk[i] * dk[j]) / q(2);
                    for l in k + 1..n {
                        v += dk[i] * path.step(l)[j];
                    }
                    s.set(i, j, v);
                }
            }
        }
        (x, s)
    }

    #[test]
    fn two_step_lift() {
        let p = lattice_path(&[(1, 0), (0, 1)]);
        let w = p.lift_window(0, 2).unwrap();
        assert_eq!(w.level1(), &[q(1), q(1)]);
        let half = Q::new(1, 2);
        assert_eq!(w.level2().as_slice(), &[half, q(1), q(0), half]);
        assert_eq!(p.area_window(0, 2).unwrap().get(0, 1), half);
    }

    #[test]
    fn square_loop_has_unit_area() {
        let p = lattice_path(&[(1, 0), (0, 1), (-1, 0), (0, -1)]);
        let w = p.lift_window(0, 4).unwrap();
        assert_eq!(w.level1(), &[q(0), q(0)]);
        assert_eq!(w.area().get(0, 1), q(1));
        assert_eq!(w.area().get(1, 0), q(-1));
    }

    #[test]
    fn single_step_is_half_outer_product() {
        let p = lattice_path(&[(3, -2)]);
        let w = p.lift_window(0, 1).unwrap();
        assert_eq!(w.level2().as_slice(), &[Q::new(9, 2), q(-3), q(-3), q(2)]);
    }

    #[test]
    fn straight_path_has_no_area() {
        let p = lattice_path(&[(2, 1); 7]);
        assert!(p.area_window(0, 7).unwrap().is_zero());
        assert!(p.area_window(2, 5).unwrap().is_zero());
    }

    #[test]
    fn zero_increment_leaves_signature_unchanged() {
        let p = lattice_path(&[(1, 0), (0, 1), (1, 1)]);
        let w = p.lift_window(0, 3).unwrap();
        let w2 = lift_stream(w.clone(), &[q(0), q(0)]).unwrap();
        assert_eq!(w.g, w2.g);
        assert_eq!(w2.n, 4);
    }

    #[test]
    fn window_errors() {
        let p = lattice_path(&[(1, 0), (0, 1)]);
        assert_eq!(p.lift_window(1, 1), Err(Error::InvalidWindow { m: 1, n: 1, len: 2 }));
        assert!(p.lift_window(0, 3).is_err());
        assert!(p.area_window(2, 1).is_err());
    }

    #[test]
    fn jump_bound_enforced() {
        assert!(matches!(DiscretePath::new(2, vec![3.0, 4.0], 4.9), Err(Error::JumpBound { .. })));
        assert_eq!(DiscretePath::from_increments(2, vec![3.0, 4.0, 0.0, 1.0]).unwrap().jump_bound(), 5.0);
    }

    #[test]
    fn centering_examples() {
        let p = DiscretePath::from_increments(2, vec![1.0, 2.0, -1.0, 0.5]).unwrap();
        assert_eq!(p.center(&[0.0, 0.0]).unwrap().as_flat(), p.as_flat());
        let v = [0.25, -0.5];
        let c = p.center(&v).unwrap();
        assert!((c.jump_bound() - (p.jump_bound() + (0.25f64.powi(2) + 0.25).sqrt())).abs() < 1e-15);
        let back = c.center(&[-0.25, 0.5]).unwrap();
        assert_eq!(back.as_flat(), p.as_flat());
        let det = DiscretePath::from_increments(2, [0.3, -0.7].repeat(5)).unwrap();
        assert!(det.center(&[0.3, -0.7]).unwrap().as_flat().iter().all(|&x| x == 0.0));
    }

    #[test]
    fn rescale_scale_one_is_plain_lift() {
        let p = DiscretePath::from_increments(2, vec![1.0, 0.0, 0.0, 1.0, -1.0, 0.0]).unwrap();
        let r = p.rescale(1).unwrap();
        for (s, t) in [(0, 3), (1, 2), (0, 2)] {
            assert_eq!(r.window(s, t).unwrap(), p.lift_window(s, t).unwrap().g);
        }
        assert!(p.rescale(0).is_err());
    }

    #[test]
    fn rescale_grid_values() {
        let p = DiscretePath::from_increments(2, vec![1.0, 0.0, 0.0, 1.0, -1.0, 0.0, 0.0, 1.0]).unwrap();
        let r = p.rescale(4).unwrap();
        let g = r.at(2).unwrap();
        assert!((g.first()[0] - 0.5).abs() < 1e-15 && (g.first()[1] - 0.5).abs() < 1e-15);
        assert!((g.second().get(0, 1) - 0.25).abs() < 1e-15);
        assert_eq!(r.window_at_times(0.0, 0.5).unwrap(), g);
        assert_eq!(r.window_at_times(0.1, 0.5), Err(Error::OffGrid(0.1)));
        assert!(r.window_at_times(0.0, 1.25).is_err());
    }

    #[test]
    fn holder_examples() {
        let zero = DiscretePath::<f64>::zeros(2, 16).rescale(16).unwrap();
        assert_eq!(holder_norm(&zero, 0.4, &HolderGrid::Dyadic).unwrap().total(), 0.0);

        let single = DiscretePath::from_increments(2, vec![1.0, 0.0]).unwrap().rescale(1).unwrap();
        let h = holder_norm(&single, 0.5, &HolderGrid::Full).unwrap();
        assert_eq!(h.first, 1.0);
        assert_eq!(h.second, 0.5);

        assert!(holder_norm(&single, 0.3, &HolderGrid::Full).is_err());
        assert_eq!(holder_norm(&single, 0.4, &HolderGrid::Pairs(vec![])), Err(Error::EmptyGrid));
        assert!(holder_norm(&single, 0.4, &HolderGrid::Pairs(vec![(0, 2)])).is_err());
        let long = DiscretePath::<f64>::zeros(1, FULL_GRID_LIMIT + 1).rescale(1).unwrap();
        assert!(holder_norm(&long, 0.4, &HolderGrid::Full).is_err());
    }

    #[test]
    fn dyadic_pairs_cover_levels() {
        assert_eq!(dyadic_pairs(4), vec![(0, 1), (1, 2), (2, 3), (3, 4), (0, 2), (2, 4), (0, 4)]);
        assert_eq!(dyadic_pairs(3), vec![(0, 1), (1, 2), (2, 3), (0, 2)]);
    }

    #[test]
    fn record_round_trip_and_errors() {
        let p = DiscretePath::from_increments(2, vec![1.0, 0.0, -0.5, 0.25]).unwrap();
        let mut buf = Vec::new();
        write_path(&p, &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert_eq!(text.lines().nth(1), Some("1,0"));
        assert_eq!(read_path(&buf[..]).unwrap(), p);
        assert!(read_path("# d=2 n=2 K=1\n1,0\n".as_bytes()).is_err());
        assert!(read_path("# d=2 n=1 K=1\n1,0,0\n".as_bytes()).is_err());
        assert!(read_path("d=2 n=1 K=1\n1,0\n".as_bytes()).is_err());
        assert!(read_path("# d=2 n=1 K=0.5\n1,0\n".as_bytes()).is_err());
    }

    fn small_steps() -> impl Strategy<Value = Vec<(i64, i64)>> {
        prop::collection::vec((-2i64..=2, -2i64..=2), 1..60)
    }

    proptest! {
        #[test]
        fn streaming_matches_double_sum(steps in small_steps()) {
            let p = lattice_path(&steps);
            let n = p.len();
            let w = p.lift_window(0, n).unwrap();
            let (x, s) = double_sum(&p, 0, n);
            prop_assert_eq!(w.level1(), &x[..]);
            prop_assert_eq!(w.level2(), &s);
            prop_assert!(w.g.is_geometric());
        }

        #[test]
        fn chen_splice(steps in small_steps(), a in 0usize..60, b in 0usize..60, c in 0usize..60) {
            let p = lattice_path(&steps);
            let mut ix = [a % (p.len() + 1), b % (p.len() + 1), c % (p.len() + 1)];
            ix.sort();
            let [m, u, n] = ix;
            prop_assume!(m < u && u < n);
            let left = p.lift_window(m, u).unwrap().g;
            let right = p.lift_window(u, n).unwrap().g;
            prop_assert_eq!(left.mul(&right).unwrap(), p.lift_window(m, n).unwrap().g);
        }

        #[test]
        fn dilation_identity_on_grid(steps in small_steps(), n in 1usize..50) {
            let p = lattice_path(&steps).map(|x| *x.numer() as f64 / *x.denom() as f64);
            let r = p.rescale(n).unwrap();
            let sq = (n as f64).sqrt();
            for m in 1..=p.len() {
                let back = r.at(m).unwrap().dilate(sq).unwrap();
                let direct = p.lift_window(0, m).unwrap().g;
                for (x, y) in back.first().iter().chain(back.second().as_slice()).zip(direct.first().iter().chain(direct.second().as_slice())) {
                    prop_assert!((x - y).abs() <= 1e-12 * y.abs().max(1.0));
                }
            }
        }

        #[test]
        fn holder_grid_monotone(steps in small_steps(), extra in prop::collection::vec((0usize..60, 0usize..60), 0..20)) {
            let p = lattice_path(&steps).map(|x| *x.numer() as f64);
            let r = p.rescale(p.len()).unwrap();
            let coarse = dyadic_pairs(p.len());
            let mut fine = coarse.clone();
            fine.extend(extra.into_iter().map(|(s, t)| (s % p.len(), 1 + t % p.len())).filter(|(s, t)| s < t));
            let hc = holder_norm(&r, 0.4, &HolderGrid::Pairs(coarse)).unwrap();
            let hf = holder_norm(&r, 0.4, &HolderGrid::Pairs(fine)).unwrap();
            let hfull = holder_norm(&r, 0.4, &HolderGrid::Full).unwrap();
            prop_assert!(hc.total() <= hf.total());
            prop_assert!(hf.total() <= hfull.total());
        }
    }
}
