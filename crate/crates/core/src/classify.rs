//! Membership tests for coefficient sequences: smooth, Roumieu, Beurling,
//! and the two dual classes.
//!
//! Membership in an asymptotic class is undecidable from finitely many
//! blocks, so every verdict is defined over the computed truncation: the
//! defining inequality must hold at every computed block with the fitted
//! constants, and the tail behaviour is read from the trailing window of the
//! scalar diagnostic (see [`crate::trend`] thresholds). Verdicts carry the
//! truncation they were decided at. Blocks with zero norm are skipped in the
//! diagnostics — the defining inequalities are vacuous there.

use std::sync::Arc;

use nalgebra::DVector;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::spectra::SpectralModel;
use crate::trend::{ls_slope, tail_lambda_threshold, window_start, BURN_IN_LAMBDA, SLOPE_TOL};
use crate::weights::{AssociatedFunction, WeightError, WeightSequence};
use crate::C64;

#[derive(Debug, Error)]
pub enum ClassifyError {
    #[error("weights have nu = {weights_nu} but model `{model}` has nu = {model_nu}")]
    NuMismatch { weights_nu: u32, model: String, model_nu: u32 },
    #[error("grid must be nonempty with positive entries")]
    EmptyGrid,
    #[error("coefficient block at index {ell} has length {len}, expected {expected}")]
    ShapeMismatch { ell: usize, len: usize, expected: usize },
    #[error("coefficient file declares model `{file_model}`, expected `{expected}`")]
    ModelNameMismatch { file_model: String, expected: String },
    #[error("coefficient file block index {ell} out of range or out of order at position {pos}")]
    BadBlockIndex { ell: usize, pos: usize },
    #[error(
        "insufficient truncation for E-power sums: last nonzero block carries fraction \
         {fraction:.3} of the k = {k} sum"
    )]
    InsufficientTruncation { k: usize, fraction: f64 },
    #[error("E-power norms outgrow h^(nu k) M_(nu k) for every grid h up to k = {k_max}")]
    GrowthIncompatible { k_max: usize },
    #[error(transparent)]
    Weights(#[from] WeightError),
    #[error("failed to read coefficient file: {0}")]
    Io(#[from] std::io::Error),
    #[error("failed to parse coefficient file: {0}")]
    Parse(#[from] serde_json::Error),
}

/// Block coefficient sequence `ℓ ↦ û(ℓ) ∈ C^{d_ℓ}` over a spectral model.
#[derive(Debug, Clone)]
pub struct CoefficientSequence {
    model: Arc<SpectralModel>,
    coeffs: Vec<DVector<C64>>,
}

impl CoefficientSequence {
    pub fn new(
        model: Arc<SpectralModel>,
        coeffs: Vec<DVector<C64>>,
    ) -> Result<Self, ClassifyError> {
        for (ell, v) in coeffs.iter().enumerate().take(model.len()) {
            let d = model.mult(ell);
            if v.len() != d {
                return Err(ClassifyError::ShapeMismatch { ell, len: v.len(), expected: d });
            }
        }
        Ok(CoefficientSequence { model, coeffs })
    }

    /// Sequence whose block at `ℓ` is `norm(ℓ, λ_ℓ, d_ℓ)` times the first
    /// basis vector.
    pub fn from_norm_fn<F>(model: Arc<SpectralModel>, mut norm: F) -> Self
    where
        F: FnMut(usize, f64, usize) -> f64,
    {
        let coeffs = (0..model.len())
            .map(|ell| {
                let d = model.mult(ell);
                let n = norm(ell, model.lambda(ell), d);
                let mut v = DVector::from_element(d, C64::new(0.0, 0.0));
                v[0] = C64::new(n, 0.0);
                v
            })
            .collect();
        CoefficientSequence { model, coeffs }
    }

    /// All-zero sequence over the full model.
    pub fn zeros(model: Arc<SpectralModel>) -> Self {
        CoefficientSequence::from_norm_fn(model, |_, _, _| 0.0)
    }

    pub fn model(&self) -> &Arc<SpectralModel> {
        &self.model
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn block(&self, ell: usize) -> &DVector<C64> {
        &self.coeffs[ell]
    }

    pub fn blocks(&self) -> &[DVector<C64>] {
        &self.coeffs
    }
}

/// Squared Hilbert–Schmidt norm of one block, summed left to right.
pub fn hs_norm_sq(v: &DVector<C64>) -> f64 {
    let mut s = 0.0;
    for z in v.iter() {
        s += z.re * z.re + z.im * z.im;
    }
    s
}

/// Per-block Hilbert–Schmidt norms.
pub fn hs_norms(u: &CoefficientSequence) -> Vec<f64> {
    u.coeffs.iter().map(|v| hs_norm_sq(v).sqrt()).collect()
}

/// Plancherel partial sum over the computed blocks.
///
/// Accumulated block by block with a left fold inside each block, so the
/// result is bit-identical to the nested double sum in the same order.
pub fn plancherel_sum(u: &CoefficientSequence) -> f64 {
    let mut total = 0.0;
    for v in &u.coeffs {
        total += hs_norm_sq(v);
    }
    total
}

/// Cumulative Plancherel sums; monotone nondecreasing.
pub fn plancherel_partials(u: &CoefficientSequence) -> Vec<f64> {
    let mut total = 0.0;
    u.coeffs
        .iter()
        .map(|v| {
            total += hs_norm_sq(v);
            total
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClassTag {
    Smooth,
    Roumieu,
    Beurling,
    DualRoumieu,
    DualBeurling,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Decision {
    Member,
    NonMember,
    Inconclusive,
}

/// Point of a diagnostic curve: `(ℓ, λ_ℓ, value)`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct DiagnosticPoint {
    pub ell: usize,
    pub lambda: f64,
    pub value: f64,
}

/// Fitted constants, stored in log domain where they can overflow.
#[derive(Debug, Clone, Serialize)]
#[serde(tag = "class", rename_all = "snake_case")]
pub enum FittedConstants {
    Smooth {
        /// `(N, log C_N)` rows.
        log_c_per_n: Vec<(f64, Option<f64>)>,
        window_slope: Option<f64>,
        offending_n: Option<f64>,
    },
    Roumieu {
        l_star: Option<f64>,
        log_c: Option<f64>,
        window_slope: Option<f64>,
    },
    Beurling {
        /// `(L, log C_L)` rows.
        log_c_per_l: Vec<(f64, Option<f64>)>,
        window_slope: Option<f64>,
    },
    Dual {
        /// `(L, log K_L)` rows.
        log_k_per_l: Vec<(f64, Option<f64>)>,
        /// For the Beurling dual: the grid level certifying boundedness.
        l: Option<f64>,
        window_max_u: Option<f64>,
    },
}

#[derive(Debug, Clone, Serialize)]
pub struct MembershipVerdict {
    pub class_tag: ClassTag,
    pub decision: Decision,
    pub fitted: FittedConstants,
    pub diagnostic: Vec<DiagnosticPoint>,
    pub truncation: usize,
}

struct ValidPoint {
    ell: usize,
    lambda: f64,
    log_norm: f64,
}

/// Nonzero blocks past the eigenvalue burn-in.
fn valid_points(u: &CoefficientSequence) -> Vec<ValidPoint> {
    let norms = hs_norms(u);
    (0..u.len())
        .filter(|&ell| u.model.lambda(ell) >= BURN_IN_LAMBDA && norms[ell] > 0.0)
        .map(|ell| ValidPoint { ell, lambda: u.model.lambda(ell), log_norm: norms[ell].ln() })
        .collect()
}

/// Tail-region eigenvalue level of the underlying ladder; anything at or
/// above it counts as tail evidence.
fn tail_lambda(u: &CoefficientSequence) -> Option<f64> {
    tail_lambda_threshold(u.model())
}

fn check_nu(u: &CoefficientSequence, w: &WeightSequence) -> Result<(), ClassifyError> {
    if w.nu() != u.model.nu {
        return Err(ClassifyError::NuMismatch {
            weights_nu: w.nu(),
            model: u.model.name.clone(),
            model_nu: u.model.nu,
        });
    }
    Ok(())
}

fn check_grid(grid: &[f64]) -> Result<(), ClassifyError> {
    if grid.is_empty() || grid.iter().any(|&g| !(g > 0.0) || !g.is_finite()) {
        return Err(ClassifyError::EmptyGrid);
    }
    Ok(())
}

fn max_opt(acc: Option<f64>, v: f64) -> Option<f64> {
    Some(acc.map_or(v, |a| a.max(v)))
}

/// Smoothness test from the polynomial-decay characterization
/// `‖û(ℓ)‖ <= C_N (1+λ_ℓ)^{-N}`.
///
/// Member when the ratio `log‖û‖ / log(1+λ)` dives over the trailing window;
/// non-member when some grid `N` shows monotone growth of
/// `‖û‖(1+λ)^N` there.
pub fn test_smooth(u: &CoefficientSequence, n_grid: &[f64]) -> MembershipVerdict {
    let pts = valid_points(u);
    let norms = hs_norms(u);

    // C_N fits run over every computed nonzero block, burn-in included.
    let log_c_per_n: Vec<(f64, Option<f64>)> = n_grid
        .iter()
        .map(|&n| {
            let mut acc = None;
            for ell in 0..u.len() {
                if norms[ell] > 0.0 {
                    let v = norms[ell].ln() + n * (1.0 + u.model.lambda(ell)).ln();
                    acc = max_opt(acc, v);
                }
            }
            (n, acc)
        })
        .collect();

    let diagnostic: Vec<DiagnosticPoint> = pts
        .iter()
        .map(|p| DiagnosticPoint {
            ell: p.ell,
            lambda: p.lambda,
            value: p.log_norm / (1.0 + p.lambda).ln(),
        })
        .collect();

    let finite_support = match tail_lambda(u) {
        Some(thr) => !pts.iter().any(|p| p.lambda >= thr),
        None => true,
    };
    if finite_support {
        return MembershipVerdict {
            class_tag: ClassTag::Smooth,
            decision: Decision::Member,
            fitted: FittedConstants::Smooth { log_c_per_n, window_slope: None, offending_n: None },
            diagnostic,
            truncation: u.len(),
        };
    }

    let w0 = window_start(pts.len());
    let xs: Vec<f64> = pts[w0..].iter().map(|p| (1.0 + p.lambda).ln()).collect();

    // Non-membership: some N with the tail of ‖û‖(1+λ)^N growing.
    for &n in n_grid {
        let ys: Vec<f64> = pts[w0..].iter().map(|p| p.log_norm + n * (1.0 + p.lambda).ln()).collect();
        if let Some(slope) = ls_slope(&xs, &ys) {
            if slope > SLOPE_TOL {
                return MembershipVerdict {
                    class_tag: ClassTag::Smooth,
                    decision: Decision::NonMember,
                    fitted: FittedConstants::Smooth {
                        log_c_per_n,
                        window_slope: Some(slope),
                        offending_n: Some(n),
                    },
                    diagnostic,
                    truncation: u.len(),
                };
            }
        }
    }

    let ratios: Vec<f64> = pts[w0..].iter().map(|p| p.log_norm / (1.0 + p.lambda).ln()).collect();
    let slope = ls_slope(&xs, &ratios);
    let decision = match slope {
        Some(s) if s < -SLOPE_TOL => Decision::Member,
        Some(_) => Decision::Inconclusive,
        None => Decision::Inconclusive,
    };
    MembershipVerdict {
        class_tag: ClassTag::Smooth,
        decision,
        fitted: FittedConstants::Smooth { log_c_per_n, window_slope: slope, offending_n: None },
        diagnostic,
        truncation: u.len(),
    }
}

/// Default grid of polynomial orders used when a Roumieu/Beurling test has to
/// fall back to the smooth test.
pub fn default_n_grid() -> Vec<f64> {
    vec![1.0, 2.0, 3.0, 4.0, 6.0, 8.0]
}

struct EnvelopeDiag {
    /// `(point, L(ℓ))` over blocks with norm strictly inside (0, 1).
    curve: Vec<(usize, f64, f64)>,
    /// Whether a block of norm >= 1 sits in the tail region.
    unit_norm_in_tail: bool,
}

fn envelope_diagnostic(
    u: &CoefficientSequence,
    assoc: &AssociatedFunction<'_>,
) -> Result<EnvelopeDiag, ClassifyError> {
    let pts = valid_points(u);
    let tail = tail_lambda(u);
    let nu_root = 1.0 / u.model.nu as f64;
    let mut curve = Vec::new();
    let mut unit_norm_in_tail = false;
    for p in &pts {
        if p.log_norm >= 0.0 {
            if tail.is_some_and(|thr| p.lambda >= thr) {
                unit_norm_in_tail = true;
            }
            continue;
        }
        let l = assoc.inverse(-p.log_norm)? / p.lambda.powf(nu_root);
        curve.push((p.ell, p.lambda, l));
    }
    Ok(EnvelopeDiag { curve, unit_norm_in_tail })
}

fn curve_to_points(curve: &[(usize, f64, f64)]) -> Vec<DiagnosticPoint> {
    curve
        .iter()
        .map(|&(ell, lambda, value)| DiagnosticPoint { ell, lambda, value })
        .collect()
}

fn curve_window_slope(curve: &[(usize, f64, f64)]) -> Option<f64> {
    let w0 = window_start(curve.len());
    let xs: Vec<f64> = curve[w0..].iter().map(|&(_, lambda, _)| lambda.ln()).collect();
    let ys: Vec<f64> = curve[w0..].iter().map(|&(_, _, v)| v.max(1e-300).ln()).collect();
    ls_slope(&xs, &ys)
}

/// Roumieu membership: `‖û(ℓ)‖ <= C exp(−M(L λ_ℓ^{1/ν}))` for some C, L.
///
/// The diagnostic is `L(ℓ) = M⁻¹(−log‖û(ℓ)‖)/λ_ℓ^{1/ν}`; membership requires
/// its trailing window to stay away from zero.
pub fn test_roumieu(
    u: &CoefficientSequence,
    w: &WeightSequence,
) -> Result<MembershipVerdict, ClassifyError> {
    check_nu(u, w)?;
    let assoc = AssociatedFunction::new(w);
    let diag = envelope_diagnostic(u, &assoc)?;
    let norms = hs_norms(u);
    let truncation = u.len();
    let nu_root = 1.0 / u.model.nu as f64;

    let verdict = |decision, l_star: Option<f64>, log_c, slope| MembershipVerdict {
        class_tag: ClassTag::Roumieu,
        decision,
        fitted: FittedConstants::Roumieu { l_star, log_c, window_slope: slope },
        diagnostic: curve_to_points(&diag.curve),
        truncation,
    };

    if diag.unit_norm_in_tail {
        // Blocks of norm >= 1 in the tail rule out decay; decide through the
        // smooth test (membership there is necessary).
        let smooth = test_smooth(u, &default_n_grid());
        let decision = match smooth.decision {
            Decision::NonMember => Decision::NonMember,
            _ => Decision::Inconclusive,
        };
        return Ok(verdict(decision, None, None, None));
    }

    let tail = tail_lambda(u);
    if !diag.curve.iter().any(|&(_, lambda, _)| tail.is_some_and(|thr| lambda >= thr)) {
        // Finitely supported within the truncation: any C covers the head.
        return Ok(verdict(Decision::Member, None, None, None));
    }

    let slope = curve_window_slope(&diag.curve);
    match slope {
        Some(s) if s < -SLOPE_TOL => Ok(verdict(Decision::NonMember, None, None, slope)),
        Some(_) => {
            let w0 = window_start(diag.curve.len());
            let l_star =
                diag.curve[w0..].iter().map(|&(_, _, v)| v).fold(f64::INFINITY, f64::min);
            let mut log_c = None;
            for ell in 0..u.len() {
                if norms[ell] > 0.0 {
                    let m = assoc.eval(l_star * u.model.lambda(ell).powf(nu_root))?;
                    log_c = max_opt(log_c, norms[ell].ln() + m);
                }
            }
            Ok(verdict(Decision::Member, Some(l_star), log_c, slope))
        }
        None => Ok(verdict(Decision::Inconclusive, None, None, None)),
    }
}

/// Beurling membership: for every grid L there is `C_L` with
/// `‖û(ℓ)‖ <= C_L exp(−M(L λ_ℓ^{1/ν}))`; requires `L(ℓ) → ∞`.
pub fn test_beurling(
    u: &CoefficientSequence,
    w: &WeightSequence,
    l_grid: &[f64],
) -> Result<MembershipVerdict, ClassifyError> {
    check_nu(u, w)?;
    check_grid(l_grid)?;
    let assoc = AssociatedFunction::new(w);
    let diag = envelope_diagnostic(u, &assoc)?;
    let norms = hs_norms(u);
    let truncation = u.len();
    let nu_root = 1.0 / u.model.nu as f64;

    let mut log_c_per_l = Vec::with_capacity(l_grid.len());
    for &l in l_grid {
        let mut acc = None;
        for ell in 0..u.len() {
            if norms[ell] > 0.0 {
                let m = assoc.eval(l * u.model.lambda(ell).powf(nu_root))?;
                acc = max_opt(acc, norms[ell].ln() + m);
            }
        }
        log_c_per_l.push((l, acc));
    }

    let verdict = |decision, slope| MembershipVerdict {
        class_tag: ClassTag::Beurling,
        decision,
        fitted: FittedConstants::Beurling { log_c_per_l: log_c_per_l.clone(), window_slope: slope },
        diagnostic: curve_to_points(&diag.curve),
        truncation,
    };

    if diag.unit_norm_in_tail {
        let smooth = test_smooth(u, &default_n_grid());
        let decision = match smooth.decision {
            Decision::NonMember => Decision::NonMember,
            _ => Decision::Inconclusive,
        };
        return Ok(verdict(decision, None));
    }
    let tail = tail_lambda(u);
    if !diag.curve.iter().any(|&(_, lambda, _)| tail.is_some_and(|thr| lambda >= thr)) {
        return Ok(verdict(Decision::Member, None));
    }

    let slope = curve_window_slope(&diag.curve);
    match slope {
        Some(s) if s > SLOPE_TOL => Ok(verdict(Decision::Member, slope)),
        Some(_) => Ok(verdict(Decision::NonMember, slope)),
        None => Ok(verdict(Decision::Inconclusive, None)),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DualFlavor {
    Roumieu,
    Beurling,
}

/// Dual-space tests from the growth characterization
/// `‖û(ℓ)‖ <= K exp(M(L λ_ℓ^{1/ν}))`.
///
/// Roumieu dual: the bound must hold for every L (diagnostic `U(ℓ) → 0`);
/// Beurling dual: for some K, L (diagnostic bounded). `U` uses
/// `log⁺ = max(0, log ·)` since the generalized inverse accepts only
/// nonnegative levels.
pub fn test_dual(
    u: &CoefficientSequence,
    w: &WeightSequence,
    flavor: DualFlavor,
    l_grid: &[f64],
) -> Result<MembershipVerdict, ClassifyError> {
    check_nu(u, w)?;
    check_grid(l_grid)?;
    let assoc = AssociatedFunction::new(w);
    let pts = valid_points(u);
    let norms = hs_norms(u);
    let truncation = u.len();
    let nu_root = 1.0 / u.model.nu as f64;

    let mut log_k_per_l = Vec::with_capacity(l_grid.len());
    for &l in l_grid {
        let mut acc = None;
        for ell in 0..u.len() {
            if norms[ell] > 0.0 {
                let m = assoc.eval(l * u.model.lambda(ell).powf(nu_root))?;
                acc = max_opt(acc, norms[ell].ln() - m);
            }
        }
        log_k_per_l.push((l, acc));
    }

    let mut curve = Vec::with_capacity(pts.len());
    for p in &pts {
        let upper = if p.log_norm <= 0.0 {
            0.0
        } else {
            assoc.inverse(p.log_norm)? / p.lambda.powf(nu_root)
        };
        curve.push((p.ell, p.lambda, upper));
    }

    let class_tag = match flavor {
        DualFlavor::Roumieu => ClassTag::DualRoumieu,
        DualFlavor::Beurling => ClassTag::DualBeurling,
    };
    let grid_min = l_grid.iter().cloned().fold(f64::INFINITY, f64::min);
    let grid_max = l_grid.iter().cloned().fold(0.0f64, f64::max);

    let verdict = |decision, l: Option<f64>, window_max_u| MembershipVerdict {
        class_tag,
        decision,
        fitted: FittedConstants::Dual { log_k_per_l: log_k_per_l.clone(), l, window_max_u },
        diagnostic: curve_to_points(&curve),
        truncation,
    };

    if curve.is_empty() {
        return Ok(verdict(Decision::Member, None, None));
    }
    let w0 = window_start(curve.len());
    let window = &curve[w0..];
    let u_max = window.iter().map(|&(_, _, v)| v).fold(0.0f64, f64::max);
    let u_min = window.iter().map(|&(_, _, v)| v).fold(f64::INFINITY, f64::min);
    let positives: Vec<&(usize, f64, f64)> = window.iter().filter(|&&(_, _, v)| v > 0.0).collect();
    let slope = if positives.len() >= 2 {
        let xs: Vec<f64> = positives.iter().map(|&&(_, lambda, _)| lambda.ln()).collect();
        let ys: Vec<f64> = positives.iter().map(|&&(_, _, v)| v.ln()).collect();
        ls_slope(&xs, &ys)
    } else {
        None
    };

    let decision = match flavor {
        DualFlavor::Roumieu => {
            if u_max < grid_min || matches!(slope, Some(s) if s < -SLOPE_TOL) {
                Decision::Member
            } else if u_min > grid_min && !matches!(slope, Some(s) if s < -SLOPE_TOL) {
                Decision::NonMember
            } else {
                Decision::Inconclusive
            }
        }
        DualFlavor::Beurling => {
            if matches!(slope, Some(s) if s > SLOPE_TOL) || u_min > grid_max {
                Decision::NonMember
            } else if let Some(&l) = l_grid.iter().find(|&&g| g > u_max) {
                return Ok(verdict(Decision::Member, Some(l), Some(u_max)));
            } else {
                Decision::Inconclusive
            }
        }
    };
    Ok(verdict(decision, None, Some(u_max)))
}

/// Result of the E-power norm fit `‖E^kφ‖ <= C h^{νk} M_{νk}`.
#[derive(Debug, Clone, Serialize)]
pub struct EpowerFit {
    pub h: f64,
    /// `log C`; `None` encodes `C = 0` (zero sequence).
    pub log_c: Option<f64>,
    /// `(k, log ‖E^k φ‖)` rows (`None` where the sum is zero).
    pub log_norms: Vec<(usize, Option<f64>)>,
}

/// Computes `‖E^kφ‖² = Σ_ℓ λ_ℓ^{2k} ‖û(ℓ)‖²` in log domain for `k <= k_max`
/// and fits the minimal grid `h` whose ratio sequence has turned over.
///
/// Errors when the last nonzero block carries more than 10% of some sum
/// (truncation-dominated) or when the growth is incompatible with every
/// grid `h`.
pub fn epower_check(
    u: &CoefficientSequence,
    w: &WeightSequence,
    k_max: usize,
    h_grid: &[f64],
) -> Result<EpowerFit, ClassifyError> {
    check_nu(u, w)?;
    check_grid(h_grid)?;
    let norms = hs_norms(u);
    let last_nonzero = (0..u.len()).rev().find(|&ell| norms[ell] > 0.0);

    let mut log_norms: Vec<(usize, Option<f64>)> = Vec::with_capacity(k_max + 1);
    let Some(last) = last_nonzero else {
        // Zero sequence: C = 0 and any h works.
        for k in 0..=k_max {
            log_norms.push((k, None));
        }
        return Ok(EpowerFit { h: h_grid[0], log_c: None, log_norms });
    };

    for k in 0..=k_max {
        let mut terms: Vec<f64> = Vec::new();
        let mut last_term = f64::NEG_INFINITY;
        for ell in 0..u.len() {
            if norms[ell] == 0.0 {
                continue;
            }
            let lambda = u.model.lambda(ell);
            let term = if lambda == 0.0 {
                if k == 0 {
                    2.0 * norms[ell].ln()
                } else {
                    continue;
                }
            } else {
                2.0 * k as f64 * lambda.ln() + 2.0 * norms[ell].ln()
            };
            if ell == last {
                last_term = term;
            }
            terms.push(term);
        }
        if terms.is_empty() {
            log_norms.push((k, None));
            continue;
        }
        let max = terms.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let sum: f64 = terms.iter().map(|&t| (t - max).exp()).sum();
        let log_sq = max + sum.ln();
        if last_term.is_finite() {
            let fraction = (last_term - log_sq).exp();
            if fraction > 0.10 {
                return Err(ClassifyError::InsufficientTruncation { k, fraction });
            }
        }
        log_norms.push((k, Some(0.5 * log_sq)));
    }

    let nu = w.nu() as f64;
    let mut sorted = h_grid.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    for &h in &sorted {
        let q: Vec<f64> = log_norms
            .iter()
            .map(|&(k, ln)| match ln {
                Some(v) => v - nu * k as f64 * h.ln() - w.log_m(w.nu() as usize * k).unwrap(),
                None => f64::NEG_INFINITY,
            })
            .collect();
        let argmax = q
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
            .map(|(i, _)| i)
            .unwrap_or(0);
        // Admissible when the ratio peaked in the first half: the growth has
        // turned over inside the computed range.
        if argmax <= k_max / 2 {
            return Ok(EpowerFit { h, log_c: Some(q[argmax]), log_norms });
        }
    }
    Err(ClassifyError::GrowthIncompatible { k_max })
}

/// On-disk form of one coefficient block.
#[derive(Debug, Serialize, Deserialize)]
pub struct CoeffBlockFile {
    pub ell: usize,
    pub re: Vec<f64>,
    pub im: Vec<f64>,
}

/// On-disk form of a coefficient sequence. Missing blocks are zero.
#[derive(Debug, Serialize, Deserialize)]
pub struct CoeffFile {
    pub model: String,
    pub coeffs: Vec<CoeffBlockFile>,
}

impl CoeffFile {
    /// Sparse form: zero blocks are omitted.
    pub fn from_sequence(u: &CoefficientSequence) -> CoeffFile {
        let coeffs = u
            .coeffs
            .iter()
            .enumerate()
            .filter(|(_, v)| v.iter().any(|z| z.re != 0.0 || z.im != 0.0))
            .map(|(ell, v)| CoeffBlockFile {
                ell,
                re: v.iter().map(|z| z.re).collect(),
                im: v.iter().map(|z| z.im).collect(),
            })
            .collect();
        CoeffFile { model: u.model.name.clone(), coeffs }
    }
}

/// Loads a coefficient file over the given model; blocks not listed are zero.
pub fn load_coeffs(
    path: impl AsRef<std::path::Path>,
    model: &Arc<SpectralModel>,
) -> Result<CoefficientSequence, ClassifyError> {
    let text = std::fs::read_to_string(path)?;
    let file: CoeffFile = serde_json::from_str(&text)?;
    sequence_from_file(file, model)
}

pub fn sequence_from_file(
    file: CoeffFile,
    model: &Arc<SpectralModel>,
) -> Result<CoefficientSequence, ClassifyError> {
    if file.model != model.name {
        return Err(ClassifyError::ModelNameMismatch {
            file_model: file.model,
            expected: model.name.clone(),
        });
    }
    let mut seq = CoefficientSequence::zeros(Arc::clone(model));
    let mut prev: Option<usize> = None;
    for (pos, fb) in file.coeffs.iter().enumerate() {
        if fb.ell >= model.len() || prev.is_some_and(|p| fb.ell <= p) {
            return Err(ClassifyError::BadBlockIndex { ell: fb.ell, pos });
        }
        prev = Some(fb.ell);
        let d = model.mult(fb.ell);
        if fb.re.len() != d || fb.im.len() != d {
            return Err(ClassifyError::ShapeMismatch { ell: fb.ell, len: fb.re.len(), expected: d });
        }
        seq.coeffs[fb.ell] =
            DVector::from_iterator(d, fb.re.iter().zip(&fb.im).map(|(&re, &im)| C64::new(re, im)));
    }
    Ok(seq)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectra;

    fn torus1(l_max: usize) -> Arc<SpectralModel> {
        Arc::new(spectra::torus_laplacian(1, l_max).unwrap())
    }

    fn linear(l_max: usize) -> Arc<SpectralModel> {
        Arc::new(spectra::linear_ladder(l_max))
    }

    fn gevrey(s: f64, nu: u32) -> WeightSequence {
        WeightSequence::gevrey(s, nu).unwrap()
    }

    #[test]
    fn hs_norm_examples() {
        let model = torus1(4);
        let zero = CoefficientSequence::zeros(Arc::clone(&model));
        assert!(hs_norms(&zero).iter().all(|&n| n == 0.0));

        let ones = CoefficientSequence::from_norm_fn(Arc::clone(&model), |_, _, _| 1.0);
        assert!(hs_norms(&ones).iter().all(|&n| n == 1.0));

        let mut v = DVector::from_element(2, C64::new(0.0, 0.0));
        v[0] = C64::new(3.0, 0.0);
        v[1] = C64::new(4.0, 0.0);
        assert_eq!(hs_norm_sq(&v).sqrt(), 5.0);
    }

    #[test]
    fn plancherel_examples() {
        let model = linear(10);
        let ones = CoefficientSequence::from_norm_fn(Arc::clone(&model), |_, _, _| 1.0);
        assert_eq!(plancherel_sum(&ones), 10.0);

        let partials = plancherel_partials(&ones);
        assert_eq!(partials.len(), 10);
        for w in partials.windows(2) {
            assert!(w[1] >= w[0]);
        }

        let mut v = DVector::from_element(2, C64::new(0.0, 0.0));
        v[0] = C64::new(3.0, 0.0);
        v[1] = C64::new(4.0, 0.0);
        let single = CoefficientSequence::new(
            Arc::new(spectra::torus_laplacian(1, 2).unwrap()),
            vec![DVector::from_element(1, C64::new(0.0, 0.0)), v],
        )
        .unwrap();
        assert_eq!(plancherel_sum(&single), 25.0);
    }

    #[test]
    fn smooth_member_and_non_member() {
        let model = linear(128);
        let fast = CoefficientSequence::from_norm_fn(Arc::clone(&model), |_, l, _| (-l).exp());
        assert_eq!(test_smooth(&fast, &default_n_grid()).decision, Decision::Member);

        let poly =
            CoefficientSequence::from_norm_fn(Arc::clone(&model), |_, l, _| (1.0 + l).powi(-2));
        let v = test_smooth(&poly, &[1.0, 2.0, 3.0]);
        assert_eq!(v.decision, Decision::NonMember);

        // Unit norms on a sparse infinite-by-construction set.
        let sparse = CoefficientSequence::from_norm_fn(Arc::clone(&model), |ell, _, _| {
            if ell % 3 == 0 {
                1.0
            } else {
                0.0
            }
        });
        assert_eq!(test_smooth(&sparse, &default_n_grid()).decision, Decision::NonMember);
    }

    #[test]
    fn smooth_finite_support_is_member() {
        let model = linear(128);
        let head = CoefficientSequence::from_norm_fn(Arc::clone(&model), |ell, _, _| {
            if ell < 10 {
                2.0
            } else {
                0.0
            }
        });
        assert_eq!(test_smooth(&head, &default_n_grid()).decision, Decision::Member);
    }

    #[test]
    fn roumieu_envelope_fixture_is_member() {
        let model = torus1(128);
        let w = gevrey(2.0, 2);
        let assoc = AssociatedFunction::new(&w);
        let u = CoefficientSequence::from_norm_fn(Arc::clone(&model), |_, l, _| {
            (-assoc.eval(2.0 * l.sqrt()).unwrap()).exp()
        });
        let v = test_roumieu(&u, &w).unwrap();
        assert_eq!(v.decision, Decision::Member);
        match v.fitted {
            FittedConstants::Roumieu { l_star: Some(l), .. } => {
                assert!(l >= 2.0 - 1e-6 && l <= 2.0 + 1e-6, "l_star = {l}");
            }
            other => panic!("unexpected fit {other:?}"),
        }
    }

    #[test]
    fn roumieu_slow_decay_is_non_member() {
        let model = torus1(256);
        let w = gevrey(2.0, 2);
        let u = CoefficientSequence::from_norm_fn(Arc::clone(&model), |_, l, _| {
            (-(1.0 + l).ln().powi(2)).exp()
        });
        let v = test_roumieu(&u, &w).unwrap();
        assert_eq!(v.decision, Decision::NonMember);

        // Oracle cross-check: for each grid L the envelope exponent
        // M(L sqrt(lambda)) ~ 2 sqrt(L) lambda^{1/4} eventually dwarfs
        // (log(1+lambda))^2, so the fitted constant grows without bound and
        // no C works.
        let assoc = AssociatedFunction::new(&w);
        for &l in &[0.1, 1.0, 10.0] {
            let ratio = |lam: f64| -(1.0 + lam).ln().powi(2) + assoc.eval(l * lam.sqrt()).unwrap();
            assert!(ratio(1e18) > ratio(1e16), "ratio not growing for L = {l}");
        }
    }

    #[test]
    fn roumieu_finite_support_is_member() {
        let model = torus1(64);
        let w = gevrey(2.0, 2);
        let u = CoefficientSequence::from_norm_fn(Arc::clone(&model), |ell, _, _| {
            if ell < 5 {
                3.0
            } else {
                0.0
            }
        });
        assert_eq!(test_roumieu(&u, &w).unwrap().decision, Decision::Member);
    }

    #[test]
    fn beurling_examples() {
        let l_grid = crate::geometric_grid(1e-3, 1e3, 25);

        // exp(-lambda) decays faster than every Gevrey envelope (nu = 1).
        let model = linear(256);
        let w = gevrey(2.0, 1);
        let fast = CoefficientSequence::from_norm_fn(Arc::clone(&model), |_, l, _| (-l).exp());
        assert_eq!(
            test_beurling(&fast, &w, &l_grid).unwrap().decision,
            Decision::Member
        );

        // Fixed-L envelope: Roumieu member but Beurling non-member.
        let assoc = AssociatedFunction::new(&w);
        let fixed = CoefficientSequence::from_norm_fn(Arc::clone(&model), |_, l, _| {
            (-assoc.eval(2.0 * l).unwrap()).exp()
        });
        assert_eq!(
            test_beurling(&fixed, &w, &l_grid).unwrap().decision,
            Decision::NonMember
        );

        let zero = CoefficientSequence::zeros(Arc::clone(&model));
        assert_eq!(test_beurling(&zero, &w, &l_grid).unwrap().decision, Decision::Member);
    }

    #[test]
    fn dual_examples() {
        let l_grid = crate::geometric_grid(1e-3, 1e3, 25);
        let model = linear(256);
        let w = gevrey(2.0, 1);

        let ones = CoefficientSequence::from_norm_fn(Arc::clone(&model), |_, _, _| 1.0);
        assert_eq!(
            test_dual(&ones, &w, DualFlavor::Roumieu, &l_grid).unwrap().decision,
            Decision::Member
        );
        assert_eq!(
            test_dual(&ones, &w, DualFlavor::Beurling, &l_grid).unwrap().decision,
            Decision::Member
        );

        // Growth exactly at the L = 1 envelope: inside the Beurling dual,
        // outside the Roumieu dual on grids reaching below 1.
        let assoc = AssociatedFunction::new(&w);
        let env = CoefficientSequence::from_norm_fn(Arc::clone(&model), |_, l, _| {
            assoc.eval(l).unwrap().exp()
        });
        assert_eq!(
            test_dual(&env, &w, DualFlavor::Beurling, &l_grid).unwrap().decision,
            Decision::Member
        );
        assert_eq!(
            test_dual(&env, &w, DualFlavor::Roumieu, &l_grid).unwrap().decision,
            Decision::NonMember
        );
        // Exact-boundary grid: inconclusive by design.
        assert_eq!(
            test_dual(&env, &w, DualFlavor::Roumieu, &[1.0]).unwrap().decision,
            Decision::Inconclusive
        );

        let huge = CoefficientSequence::from_norm_fn(Arc::clone(&model), |_, l, _| l.exp());
        assert_eq!(
            test_dual(&huge, &w, DualFlavor::Roumieu, &l_grid).unwrap().decision,
            Decision::NonMember
        );
        assert_eq!(
            test_dual(&huge, &w, DualFlavor::Beurling, &l_grid).unwrap().decision,
            Decision::NonMember
        );
    }

    #[test]
    fn epower_zero_sequence() {
        let model = linear(64);
        let w = WeightSequence::analytic(1).unwrap();
        let zero = CoefficientSequence::zeros(Arc::clone(&model));
        let fit = epower_check(&zero, &w, 8, &[1.0]).unwrap();
        assert!(fit.log_c.is_none());
    }

    #[test]
    fn epower_exponential_decay_fits_and_agrees_with_roumieu() {
        let model = linear(512);
        let w = WeightSequence::analytic(1).unwrap();
        let u = CoefficientSequence::from_norm_fn(Arc::clone(&model), |_, l, _| (-l).exp());
        let grid = crate::geometric_grid(1e-3, 1e3, 25);
        let fit = epower_check(&u, &w, 20, &grid).unwrap();
        assert!(fit.log_c.is_some());
        // Direct-summation oracle for one (k, h) pair.
        let k = 3usize;
        let oracle_sq: f64 =
            (0..512).map(|ell| (ell as f64).powi(2 * k as i32) * (-2.0 * ell as f64).exp()).sum();
        let fitted = fit.log_norms[k].1.unwrap();
        assert!((fitted - 0.5 * oracle_sq.ln()).abs() < 1e-9);

        assert_eq!(test_roumieu(&u, &w).unwrap().decision, Decision::Member);
    }

    #[test]
    fn epower_sparse_units_hit_truncation_guard() {
        let model = linear(512);
        let w = WeightSequence::analytic(1).unwrap();
        let sparse = CoefficientSequence::from_norm_fn(Arc::clone(&model), |ell, _, _| {
            if ell > 0 && ell % 7 == 0 {
                1.0
            } else {
                0.0
            }
        });
        let grid = crate::geometric_grid(1e-3, 1e3, 25);
        match epower_check(&sparse, &w, 20, &grid) {
            Err(ClassifyError::InsufficientTruncation { .. })
            | Err(ClassifyError::GrowthIncompatible { .. }) => {}
            other => panic!("expected truncation or growth failure, got {other:?}"),
        }
    }

    #[test]
    fn coeff_file_roundtrip_and_errors() {
        let model = torus1(8);
        let u = CoefficientSequence::from_norm_fn(Arc::clone(&model), |ell, _, _| {
            if ell % 2 == 0 {
                (ell + 1) as f64
            } else {
                0.0
            }
        });
        let file = CoeffFile::from_sequence(&u);
        assert_eq!(file.coeffs.len(), 4);
        let text = serde_json::to_string(&file).unwrap();
        let parsed: CoeffFile = serde_json::from_str(&text).unwrap();
        let back = sequence_from_file(parsed, &model).unwrap();
        for ell in 0..u.len() {
            assert_eq!(u.block(ell), back.block(ell));
        }

        let bad = CoeffFile {
            model: model.name.clone(),
            coeffs: vec![CoeffBlockFile { ell: 99, re: vec![1.0], im: vec![0.0] }],
        };
        assert!(matches!(
            sequence_from_file(bad, &model),
            Err(ClassifyError::BadBlockIndex { ell: 99, pos: 0 })
        ));
    }

    #[test]
    fn nu_mismatch_is_reported() {
        let model = torus1(32);
        let w = gevrey(2.0, 1);
        let u = CoefficientSequence::zeros(Arc::clone(&model));
        assert!(matches!(
            test_roumieu(&u, &w),
            Err(ClassifyError::NuMismatch { weights_nu: 1, model_nu: 2, .. })
        ));
    }
}
