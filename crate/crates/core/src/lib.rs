//! Hermitian sum-of-squares hierarchy over complex projective space.
//!
//! Polynomials `f(z) = Σ c_{αβ} z̄^α z^β` on `CP^{d-1}` are quantized onto the
//! symmetric subspace `Sym^n(C^d)`. The normal-ordered (Q) quantization bounds
//! `sup f` from above, the Toeplitz (P) quantization bounds it from below, and
//! Husimi sampling of the top eigenvector rounds back to a feasible point.
//!
//! The same machinery verifies quantum de Finetti bounds exactly on small
//! instances and runs Quantum Max-d-Cut cloud blow-up experiments.

pub mod cli;
pub mod coherent;
pub mod definetti;
pub mod error;
pub mod exec;
pub mod fock;
pub mod qmaxcut;
pub mod quantize;
pub mod spectral;
pub mod symspace;

pub use error::{Error, Result};
pub use num_complex::Complex64 as C64;

/// Default `sym_dim` above which operators stay matrix-free.
pub const DEFAULT_DENSE_THRESHOLD: usize = 4096;

/// Dense complex matrix used for densities and materialized operators.
pub type CMatrix = nalgebra::DMatrix<C64>;
