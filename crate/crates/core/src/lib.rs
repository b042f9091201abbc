//! Numerical toolkit for complete-Pick multiplier algebras on the unit ball.
//!
//! The crate is organised bottom-up:
//!
//! * [`kernel`] evaluates the Drury-Arveson kernel `1/(1 - <z,w>)`, assembles
//!   Gram matrices on finite samples and provides the Hermitian linear algebra
//!   (eigenvalues, jittered Cholesky whitening) everything else relies on.
//! * [`pick`] computes minimal multiplier norms of interpolation data and the
//!   separator / union-norm bounds for strongly disjoint samples.
//! * [`holomap`] models polynomial maps from the disk into the ball together
//!   with the boundary checks (properness, transversality, injectivity).
//! * [`operator_r`] discretises `R = alpha alpha*` on the circle, splits it into
//!   its Toeplitz and Hilbert-Schmidt parts and checks the spectrum against an
//!   exact multi-index enumeration for monomial maps.
//! * [`experiment`] ties the pieces into config-driven runs with CSV / JSON
//!   output; the `dapick` binary is a thin wrapper around it.

// `!(x < y)` is used deliberately so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod experiment;
pub mod holomap;
pub mod kernel;
pub mod operator_r;
pub mod pick;
pub mod tol;

pub use error::{Error, Result};
pub use num_complex::Complex64 as C64;
pub use tol::Tolerances;
