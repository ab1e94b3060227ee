//! The step-2 group `G²(ℝᵈ)` carried by pairs `(a, b)` with `a ∈ ℝᵈ` and
//! `b ∈ ℝᵈˣᵈ`.
//!
//! The product is Chen's rule `(a, b) ⊗ (a', b') = (a + a', b + b' + a ⊗ a')`,
//! the identity is `(0, 0)` and the inverse is `(−a, −b + a ⊗ a)`. Geometric
//! elements are those with `Sym(b) = ½ a ⊗ a`; they are in bijection with
//! [`AreaElement`]s `(a, A)` where `A` is the antisymmetric part of `b`.

use num_traits::Float;

use crate::error::{Error, Result};
use crate::matrix::SquareMatrix;
use crate::scalar::Scalar;

#[derive(Clone, Debug, PartialEq)]
pub struct G2Element<T> {
    a: Vec<T>,
    b: SquareMatrix<T>,
}

fn check_dim(left: usize, right: usize) -> Result<()> {
    if left != right {
        return Err(Error::DimensionMismatch { left, right });
    }
    Ok(())
}

impl<T: Scalar> G2Element<T> {
    pub fn identity(dim: usize) -> Self {
        Self { a: vec![T::zero(); dim], b: SquareMatrix::zeros(dim) }
    }

    pub fn new(a: Vec<T>, b: SquareMatrix<T>) -> Result<Self> {
        if a.is_empty() {
            return Err(Error::ZeroDimension);
        }
        check_dim(a.len(), b.dim())?;
        if !a.iter().chain(b.as_slice()).all(Scalar::is_finite_value) {
            return Err(Error::NonFinite);
        }
        Ok(Self { a, b })
    }

    /// Lift of a single straight increment: `(Δ, ½ Δ ⊗ Δ)`.
    pub fn from_step(step: &[T]) -> Self {
        let b = SquareMatrix::from_fn(step.len(), |i, j| (step[i] * step[j]).half());
        Self { a: step.to_vec(), b }
    }

    /// Central element `(0, b)`.
    pub fn central(b: SquareMatrix<T>) -> Self {
        Self { a: vec![T::zero(); b.dim()], b }
    }

    pub fn dim(&self) -> usize {
        self.a.len()
    }

    pub fn first(&self) -> &[T] {
        &self.a
    }

    pub fn second(&self) -> &SquareMatrix<T> {
        &self.b
    }

    pub fn into_parts(self) -> (Vec<T>, SquareMatrix<T>) {
        (self.a, self.b)
    }

    pub fn is_identity(&self) -> bool {
        self.a.iter().all(|x| x.is_zero()) && self.b.is_zero()
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        check_dim(self.dim(), other.dim())?;
        let d = self.dim();
        let a = self.a.iter().zip(&other.a).map(|(&x, &y)| x + y).collect();
        let b = SquareMatrix::from_fn(d, |i, j| {
            self.b.get(i, j) + other.b.get(i, j) + self.a[i] * other.a[j]
        });
        Ok(Self { a, b })
    }

    /// In-place `self ⊗ (Δ, ½ Δ ⊗ Δ)`: one step of the streaming lift.
    pub fn push_step(&mut self, step: &[T]) -> Result<()> {
        check_dim(self.dim(), step.len())?;
        let d = self.dim();
        for i in 0..d {
            let ai = self.a[i];
            let si = step[i];
            for j in 0..d {
                let v = self.b.get(i, j) + ai * step[j] + (si * step[j]).half();
                self.b.set(i, j, v);
            }
        }
        for (x, &s) in self.a.iter_mut().zip(step) {
            *x = *x + s;
        }
        Ok(())
    }

    pub fn inv(&self) -> Self {
        let d = self.dim();
        Self {
            a: self.a.iter().map(|&x| -x).collect(),
            b: SquareMatrix::from_fn(d, |i, j| self.a[i] * self.a[j] - self.b.get(i, j)),
        }
    }

    /// `self⁻¹ ⊗ other` without forming the inverse:
    /// `(a' − a, b' − b − a ⊗ (a' − a))`.
    pub fn between(&self, other: &Self) -> Result<Self> {
        check_dim(self.dim(), other.dim())?;
        let d = self.dim();
        let a: Vec<T> = self.a.iter().zip(&other.a).map(|(&x, &y)| y - x).collect();
        let b = SquareMatrix::from_fn(d, |i, j| {
            other.b.get(i, j) - self.b.get(i, j) - self.a[i] * a[j]
        });
        Ok(Self { a, b })
    }

    /// Dilation `δ_ε(a, b) = (εa, ε²b)`.
    pub fn dilate(&self, eps: T) -> Result<Self> {
        if !(eps > T::zero()) {
            return Err(Error::NonPositiveScale(eps.to_f64().unwrap_or(f64::NAN)));
        }
        let eps2 = eps * eps;
        Ok(Self { a: self.a.iter().map(|&x| x * eps).collect(), b: self.b.scale(eps2) })
    }

    /// `(Sym(b), Anti(b))` with `Sym(b) + Anti(b) = b`.
    pub fn split(&self) -> (SquareMatrix<T>, SquareMatrix<T>) {
        (self.b.symmetric_part(), self.b.antisymmetric_part())
    }

    /// `Sym(b) − ½ a ⊗ a`, zero exactly for geometric elements.
    pub fn geometric_defect(&self) -> SquareMatrix<T> {
        let d = self.dim();
        SquareMatrix::from_fn(d, |i, j| {
            (self.b.get(i, j) + self.b.get(j, i)).half() - (self.a[i] * self.a[j]).half()
        })
    }

    pub fn is_geometric(&self) -> bool {
        self.geometric_defect().is_zero()
    }

    pub fn to_area(&self) -> AreaElement<T> {
        AreaElement { a: self.a.clone(), area: self.b.antisymmetric_part() }
    }
}

impl<T: Scalar + Float> G2Element<T> {
    /// Homogeneous norm `|a|₂ + sqrt(|b|_F)`, equivalent to the
    /// Carnot–Carathéodory norm up to constants and 1-homogeneous under dilation.
    pub fn homogeneous_norm(&self) -> T {
        let a2 = self.a.iter().fold(T::zero(), |acc, &x| acc + x * x);
        a2.sqrt() + self.b.frobenius().sqrt()
    }

    pub fn cc_distance(&self, other: &Self) -> Result<T> {
        Ok(self.between(other)?.homogeneous_norm())
    }

    /// Relative geometric defect `|Sym(b) − ½a⊗a|_F / max(1, |a|², |b|_F)`.
    pub fn relative_geometric_defect(&self) -> T {
        let a2 = self.a.iter().fold(T::zero(), |acc, &x| acc + x * x);
        let scale = T::one().max(a2).max(self.b.frobenius());
        self.geometric_defect().frobenius() / scale
    }
}

/// Geometric element presented as `(increment, signed area)`.
#[derive(Clone, Debug, PartialEq)]
pub struct AreaElement<T> {
    a: Vec<T>,
    area: SquareMatrix<T>,
}

impl<T: Scalar> AreaElement<T> {
    pub fn new(a: Vec<T>, area: SquareMatrix<T>) -> Result<Self> {
        check_dim(a.len(), area.dim())?;
        if !area.is_antisymmetric() {
            return Err(Error::InvalidParameter("area matrix must be antisymmetric".into()));
        }
        Ok(Self { a, area })
    }

    pub fn zero(dim: usize) -> Self {
        Self { a: vec![T::zero(); dim], area: SquareMatrix::zeros(dim) }
    }

    pub fn increment(&self) -> &[T] {
        &self.a
    }

    pub fn area(&self) -> &SquareMatrix<T> {
        &self.area
    }

    /// `(a + a', A + A' + ½(a ⊗ a' − a' ⊗ a))`.
    pub fn wedge_mul(&self, other: &Self) -> Result<Self> {
        check_dim(self.a.len(), other.a.len())?;
        let d = self.a.len();
        let a = self.a.iter().zip(&other.a).map(|(&x, &y)| x + y).collect();
        let area = SquareMatrix::from_fn(d, |i, j| {
            self.area.get(i, j)
                + other.area.get(i, j)
                + (self.a[i] * other.a[j] - other.a[i] * self.a[j]).half()
        });
        Ok(Self { a, area })
    }

    /// Back to the geometric pair: `b = ½ a ⊗ a + A`.
    pub fn to_g2(&self) -> G2Element<T> {
        let d = self.a.len();
        let b = SquareMatrix::from_fn(d, |i, j| (self.a[i] * self.a[j]).half() + self.area.get(i, j));
        G2Element { a: self.a.clone(), b }
    }
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

    fn half() -> Q {
        Q::new(1, 2)
    }

    fn e(i: usize, d: usize) -> Vec<Q> {
        (0..d).map(|k| if k == i { q(1) } else { q(0) }).collect()
    }

    fn mat(d: usize, entries: &[(usize, usize, Q)]) -> SquareMatrix<Q> {
        let mut m = SquareMatrix::zeros(d);
        for &(i, j, v) in entries {
            m.set(i, j, v);
        }
        m
    }

    fn int_element(d: usize) -> impl Strategy<Value = G2Element<Q>> {
        (prop::collection::vec(-20i64..=20, d), prop::collection::vec(-50i64..=50, d * d)).prop_map(
            move |(a, b)| {
                G2Element::new(
                    a.into_iter().map(q).collect(),
                    SquareMatrix::from_row_major(d, b.into_iter().map(q).collect()).unwrap(),
                )
                .unwrap()
            },
        )
    }

    fn geometric_element(d: usize) -> impl Strategy<Value = G2Element<Q>> {
        (prop::collection::vec(-20i64..=20, d), prop::collection::vec(-50i64..=50, d * d)).prop_map(
            move |(a, area)| {
                let full = SquareMatrix::from_row_major(d, area.into_iter().map(q).collect()).unwrap();
                AreaElement::new(a.into_iter().map(q).collect(), full.antisymmetric_part())
                    .unwrap()
                    .to_g2()
            },
        )
    }

    fn float_element(d: usize) -> impl Strategy<Value = G2Element<f64>> {
        (prop::collection::vec(-5.0..5.0f64, d), prop::collection::vec(-5.0..5.0f64, d * d))
            .prop_map(move |(a, b)| G2Element::new(a, SquareMatrix::from_row_major(d, b).unwrap()).unwrap())
    }

    #[test]
    fn identity_is_neutral() {
        let g = G2Element::new(vec![q(2), q(-1)], mat(2, &[(0, 1, q(3)), (1, 1, q(7))])).unwrap();
        let id = G2Element::identity(2);
        assert_eq!(id.mul(&g).unwrap(), g);
        assert_eq!(g.mul(&id).unwrap(), g);
    }

    #[test]
    fn product_of_two_unit_steps() {
        let g = G2Element::from_step(&e(0, 2));
        let h = G2Element::from_step(&e(1, 2));
        let gh = g.mul(&h).unwrap();
        assert_eq!(gh.first(), &[q(1), q(1)]);
        assert_eq!(gh.second(), &mat(2, &[(0, 0, half()), (1, 1, half()), (0, 1, q(1))]));
    }

    #[test]
    fn inverse_closed_form() {
        assert!(G2Element::<Q>::identity(3).inv().is_identity());
        let g = G2Element::from_step(&e(0, 2));
        let inv = g.inv();
        assert_eq!(inv.first(), &[q(-1), q(0)]);
        assert_eq!(inv.second(), &mat(2, &[(0, 0, half())]));
        assert!(g.mul(&inv).unwrap().is_identity());
    }

    #[test]
    fn dimension_mismatch_rejected() {
        let g = G2Element::<Q>::identity(2);
        let h = G2Element::<Q>::identity(3);
        assert_eq!(g.mul(&h), Err(Error::DimensionMismatch { left: 2, right: 3 }));
        assert!(g.between(&h).is_err());
        assert!(AreaElement::<Q>::zero(2).wedge_mul(&AreaElement::zero(3)).is_err());
    }

    #[test]
    fn non_finite_rejected() {
        assert_eq!(
            G2Element::new(vec![f64::NAN], SquareMatrix::zeros(1)),
            Err(Error::NonFinite)
        );
    }

    #[test]
    fn wedge_of_equal_increments_has_no_area() {
        let g = AreaElement::new(vec![q(3), q(-2)], SquareMatrix::zeros(2)).unwrap();
        let gg = g.wedge_mul(&g).unwrap();
        assert_eq!(gg.increment(), &[q(6), q(-4)]);
        assert!(gg.area().is_zero());
    }

    #[test]
    fn wedge_of_unit_steps_is_triangle_area() {
        let g = AreaElement::new(e(0, 2), SquareMatrix::zeros(2)).unwrap();
        let h = AreaElement::new(e(1, 2), SquareMatrix::zeros(2)).unwrap();
        let gh = g.wedge_mul(&h).unwrap();
        assert_eq!(gh.increment(), &[q(1), q(1)]);
        assert_eq!(gh.area(), &mat(2, &[(0, 1, half()), (1, 0, -half())]));
    }

    #[test]
    fn area_constructor_rejects_symmetric_input() {
        assert!(AreaElement::new(vec![q(0), q(0)], mat(2, &[(0, 1, q(1)), (1, 0, q(1))])).is_err());
    }

    #[test]
    fn split_examples() {
        let zero = G2Element::<Q>::identity(2);
        let (s, a) = zero.split();
        assert!(s.is_zero() && a.is_zero());

        let g = G2Element::new(vec![q(0), q(0)], mat(2, &[(0, 1, q(1))])).unwrap();
        let (s, a) = g.split();
        assert_eq!(s, mat(2, &[(0, 1, half()), (1, 0, half())]));
        assert_eq!(a, mat(2, &[(0, 1, half()), (1, 0, -half())]));

        let l = G2Element::from_step(&e(0, 2)).mul(&G2Element::from_step(&e(1, 2))).unwrap();
        assert_eq!(l.split().1.get(0, 1), half());
    }

    #[test]
    fn dilation_examples() {
        let g = G2Element::new(e(0, 2), mat(2, &[(0, 1, q(1))])).unwrap();
        assert_eq!(g.dilate(q(1)).unwrap(), g);
        let g2 = g.dilate(q(2)).unwrap();
        assert_eq!(g2.first(), &[q(2), q(0)]);
        assert_eq!(g2.second().get(0, 1), q(4));
        assert!(g.dilate(q(0)).is_err());
        assert!(g.dilate(q(-1)).is_err());
        assert!(g.dilate(Q::new(1, 3)).unwrap().dilate(q(3)).unwrap() == g);
    }

    #[test]
    fn norm_examples() {
        assert_eq!(G2Element::<f64>::identity(2).homogeneous_norm(), 0.0);
        let g = G2Element::new(vec![1.0, 0.0], SquareMatrix::zeros(2)).unwrap();
        assert_eq!(g.homogeneous_norm(), 1.0);
    }

    #[test]
    fn distance_examples() {
        let g = G2Element::new(vec![1.5, -2.0], SquareMatrix::from_row_major(2, vec![1.0, 2.0, 0.5, -3.0]).unwrap())
            .unwrap();
        assert_eq!(g.cc_distance(&g).unwrap(), 0.0);
        let origin = G2Element::identity(2);
        assert_eq!(origin.cc_distance(&g).unwrap(), g.homogeneous_norm());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(512))]

        #[test]
        fn associativity_exact(g in int_element(3), h in int_element(3), k in int_element(3)) {
            let left = g.mul(&h).unwrap().mul(&k).unwrap();
            let right = g.mul(&h.mul(&k).unwrap()).unwrap();
            prop_assert_eq!(left, right);
        }

        #[test]
        fn inverse_both_sides(g in int_element(3)) {
            prop_assert!(g.mul(&g.inv()).unwrap().is_identity());
            prop_assert!(g.inv().mul(&g).unwrap().is_identity());
            prop_assert_eq!(g.between(&g).unwrap(), G2Element::identity(3));
        }

        #[test]
        fn between_matches_inverse_product(g in int_element(2), h in int_element(2)) {
            prop_assert_eq!(g.between(&h).unwrap(), g.inv().mul(&h).unwrap());
        }

        #[test]
        fn geometric_closure(g in geometric_element(3), h in geometric_element(3)) {
            prop_assert!(g.is_geometric());
            prop_assert!(g.mul(&h).unwrap().is_geometric());
            prop_assert!(g.inv().is_geometric());
        }

        #[test]
        fn area_conversion_is_homomorphism(g in geometric_element(2), h in geometric_element(2)) {
            let via_group = g.mul(&h).unwrap().to_area();
            let via_wedge = g.to_area().wedge_mul(&h.to_area()).unwrap();
            prop_assert_eq!(&via_group, &via_wedge);
            prop_assert!(via_wedge.area().is_antisymmetric());
            prop_assert_eq!(via_group.to_g2(), g.mul(&h).unwrap());
        }

        #[test]
        fn dilation_is_automorphism(g in int_element(2), h in int_element(2), n in 1i64..10, m in 1i64..10) {
            let eps = Q::new(n, m);
            let lhs = g.mul(&h).unwrap().dilate(eps).unwrap();
            let rhs = g.dilate(eps).unwrap().mul(&h.dilate(eps).unwrap()).unwrap();
            prop_assert_eq!(lhs, rhs);
        }

        #[test]
        fn norm_homogeneity(g in float_element(3), eps in 1e-3..1e3f64) {
            let lhs = g.dilate(eps).unwrap().homogeneous_norm();
            let rhs = eps * g.homogeneous_norm();
            prop_assert!((lhs - rhs).abs() <= 1e-12 * rhs.max(1e-300));
        }

        #[test]
        fn norm_quasi_subadditive(g in float_element(2), h in float_element(2)) {
            let lhs = g.mul(&h).unwrap().homogeneous_norm();
            let rhs = 1.5 * (g.homogeneous_norm() + h.homogeneous_norm());
            prop_assert!(lhs <= rhs * (1.0 + 1e-12));
        }
    }
}
