//! Divergence-free spectral Galerkin solver for the incompressible
//! Navier-Stokes equations on box and torus domains in dimensions 2-4,
//! together with a verification harness that checks the a-priori estimates
//! the solver is supposed to satisfy: the energy identity, Poincare-type
//! spectral-gap bounds, trilinear-form inequalities, exponential decay
//! envelopes, uniqueness contraction, and time-derivative estimates.
//!
//! The velocity field is expanded in divergence-free trigonometric Stokes
//! eigenmodes (complex exponentials on the torus, mixed sine/cosine products
//! on the free-slip box), so the Stokes operator is diagonal and every
//! energy estimate of the truncated system is a finite-dimensional identity
//! that can be tested at machine precision.
//!
//! Modules:
//! - [`domain`]: box geometry and the Steklov sum `chi`.
//! - [`modes`]: wavevector lattice enumeration.
//! - [`field`]: coefficient fields, norms, Leray projection, serialization.
//! - [`grid`]: physical-space synthesis and spectrally exact quadrature.
//! - [`ops`]: Stokes operator, trilinear form, nonlinear term, pressure.
//! - [`solver`]: time integration of the truncated system with energy
//!   bookkeeping.
//! - [`verify`]: decay envelopes, contraction and time-derivative checks.
//! - [`certificates`]: smallness-condition certificates and numerical
//!   estimation of the L4 embedding constant.
//!
//! All reductions use a fixed blocked summation order, so results are
//! bit-identical between the rayon build (feature `parallel`, default) and
//! the sequential fallback, and across thread counts.

// index-heavy numerical kernels read better with explicit loops, and
// `!(x > 0.0)` deliberately rejects NaN alongside nonpositive values
#![allow(clippy::needless_range_loop)]
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod certificates;
pub mod domain;
pub mod error;
pub mod field;
pub mod grid;
pub(crate) mod lattice;
pub mod modes;
pub mod ops;
pub(crate) mod parallel;
pub mod solver;
pub mod verify;

pub use domain::{BoxDomain, Flavor};
pub use error::CoreError;
pub use field::SpectralField;
pub use modes::{enumerate_modes, ModeIndex};
pub use solver::{GalerkinSystem, Scheme, TrajectoryRecord};

/// Convenience alias used throughout the crate.
pub type Complex64 = num_complex::Complex<f64>;
