//! Coefficient-space toolkit for global hypoellipticity diagnostics.
//!
//! Everything here operates on spectral data only: an elliptic reference
//! operator is represented by its eigenvalue/multiplicity ladder, functions
//! and ultradistributions by their block Fourier coefficients, and invariant
//! operators by their matrix symbols. On top of that the crate provides
//!
//! * [`weights`] — Komatsu-type weight sequences, axiom checks, and the
//!   associated function `M(r)` with its generalized inverse;
//! * [`spectra`] — built-in flat-torus and sphere ladders plus user models;
//! * [`symbols`] — matrix symbols, the smallest-singular-value functional
//!   `m(σ)`, and generated symbol families;
//! * [`classify`] — membership tests for smooth, Roumieu, Beurling, and dual
//!   classes from coefficient decay;
//! * [`hypotest`] — finite-truncation verdicts for the Roumieu/Beurling
//!   global hypoellipticity conditions and the smooth comparison condition;
//! * [`synth`] — synthesis of the singular solutions witnessing failure of
//!   those conditions, with an automatic verification contract.

pub mod classify;
pub mod hypotest;
pub mod jsonout;
pub mod spectra;
pub mod symbols;
pub mod synth;
pub mod weights;

mod trend;

pub use nalgebra::Complex;

/// Complex scalar used throughout the crate.
pub type C64 = Complex<f64>;

/// Geometric grid of `n` points from `a` to `b` inclusive (`n >= 1`,
/// `0 < a <= b`). The default grids of the classifiers and hypoellipticity
/// tests are built from this.
pub fn geometric_grid(a: f64, b: f64, n: usize) -> Vec<f64> {
    assert!(a > 0.0 && b >= a && n >= 1, "geometric grid needs 0 < a <= b, n >= 1");
    if n == 1 {
        return vec![a];
    }
    let step = (b.ln() - a.ln()) / (n - 1) as f64;
    (0..n).map(|i| (a.ln() + step * i as f64).exp()).collect()
}
