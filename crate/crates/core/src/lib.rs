//! Level-2 rough path numerics for discrete random walks.
//!
//! The crate is organised bottom-up:
//!
//! * [`algebra`]: the step-2 nilpotent group of pairs `(a, b)` with Chen's product,
//!   inverses, dilations and the homogeneous norm `|a| + sqrt(|b|_F)`.
//! * [`lift`]: discrete paths, window signatures, streaming lifts, rescaling and
//!   Hölder diagnostics.
//! * [`walks`]: generators for i.i.d. walks, the rotating drift walk, its periodic
//!   environment presentation, loop walks and random walks in random environment.
//! * [`regeneration`]: regeneration time detection and block decompositions.
//! * [`estimators`]: speed, covariance and area anomaly estimates with standard
//!   errors, plus the Kolmogorov tightness diagnostic.
//!
//! Core types are generic over a [`Scalar`]. Floating point (`f64`, `f32`) is used
//! for Monte Carlo work; [`Rational64`] gives exact arithmetic on lattice paths.

pub mod algebra;
pub mod error;
pub mod estimators;
pub mod lift;
pub mod matrix;
pub mod regeneration;
pub mod rng;
pub mod scalar;
pub mod walks;

pub use algebra::{AreaElement, G2Element};
pub use error::{Error, Result};
pub use estimators::AnomalyEstimate;
pub use lift::{DiscretePath, RescaledLift, WindowSignature};
pub use matrix::SquareMatrix;
pub use regeneration::{Block, RegenerationDecomposition};

pub use scalar::Scalar;

pub use num_rational::Rational64;

/// Floating point group element.
pub type G2 = G2Element<f64>;
/// Exact group element over rationals; lattice lifts have half-integer entries.
pub type ExactG2 = G2Element<Rational64>;
/// Floating point path.
pub type Path = DiscretePath<f64>;
/// Exact path over rationals.
pub type ExactPath = DiscretePath<Rational64>;
/// Floating point matrix.
pub type Matrix = SquareMatrix<f64>;
