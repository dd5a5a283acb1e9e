//! Spectral-theory toolkit for Jacobi matrices given by their coefficient
//! sequences.
//!
//! The crate is organized around a small set of objects:
//!
//! * [`models::JacobiSequence`] — coefficient sequences `(a_n, b_n)` for the
//!   standard families (free, constant, slowly oscillating, random,
//!   sparse-barrier block models, substitution sequences, periodic).
//! * [`recurrence`] — orthonormal-polynomial evaluation with log rescaling,
//!   Christoffel–Darboux kernels, Christoffel functions, local ratio
//!   diagnostics, and kernel-weighted moment functionals.
//! * [`transfer`] — 2x2 transfer-matrix products in log scale, Lyapunov
//!   exponent estimates, and growth diagnostics.
//! * [`green`] — resolvent (Green's function) machinery: closed forms on
//!   constant blocks, complex tridiagonal solves for truncations, Weyl
//!   solutions, and decoupling residuals.
//! * [`spectral`] — truncated-matrix eigenproblems (bisection plus inverse
//!   iteration) and the finite spectral measures they induce.
//! * [`prufer`] — polar (radius/angle) dynamics of solutions in the
//!   elliptic regime, with exact per-step radius increments.
//! * [`bounds`] — standalone inequality checks behind the estimates, with
//!   seeded fuzz harnesses.
//!
//! Everything is deterministic: randomized routines take explicit seeds and
//! use a counter-based generator, so results are reproducible across runs
//! and platforms.

pub mod bounds;
pub mod error;
pub mod green;
pub mod models;
pub mod prufer;
pub mod recurrence;
pub mod rng;
pub mod spectral;
pub mod transfer;

pub use error::{Error, Result};
pub use models::JacobiSequence;
