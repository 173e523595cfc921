//! Finite-truncation verdicts for the global hypoellipticity conditions.
//!
//! Both asymptotic conditions are decided through the scalar diagnostic
//! `E(ℓ) = M⁻¹(max(0, −log m(σ(ℓ))))/λ_ℓ^{1/ν}`: the Roumieu condition asks
//! `E(ℓ) → 0`, the Beurling condition asks `E(ℓ)` bounded (the multiplicative
//! constant is absorbed by the doubling property of the weights). Per-grid
//! satisfaction runs on the exact inequality in log domain; trends come from
//! the trailing window with the thresholds in [`crate::trend`]. Rungs with
//! `λ < 1` are burn-in and never enter a verdict.

use serde::Serialize;
use thiserror::Error;

use crate::symbols::{m_sigma, SymbolError, SymbolSequence};
use crate::trend::{ls_slope, tail_lambda_threshold, window_start, BURN_IN_LAMBDA, SLOPE_TOL};
use crate::weights::{AssociatedFunction, WeightError, WeightSequence};

#[derive(Debug, Error)]
pub enum HypoError {
    #[error("weights have nu = {weights_nu} but model `{model}` has nu = {model_nu}")]
    NuMismatch { weights_nu: u32, model: String, model_nu: u32 },
    #[error("grid must be nonempty with positive entries")]
    EmptyGrid,
    #[error(transparent)]
    Symbols(#[from] SymbolError),
    #[error(transparent)]
    Weights(#[from] WeightError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ConditionTag {
    Roumieu31,
    Beurling41,
    SmoothRemark,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum HypoDecision {
    Holds,
    Fails,
    Inconclusive,
}

/// Point of the verdict diagnostic: `(ℓ, λ_ℓ, m(σ(ℓ)), E(ℓ))`.
///
/// `e` is `None` where `m = 0` (the diagnostic diverges there).
#[derive(Debug, Clone, Copy, Serialize)]
pub struct HypoPoint {
    pub ell: usize,
    pub lambda: f64,
    pub m: f64,
    pub e: Option<f64>,
}

/// Per-ε (or per-r) satisfaction row: the threshold beyond which the bound
/// held at every computed rung, when one exists within the truncation.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct GridRow {
    pub level: f64,
    pub satisfied_from: Option<usize>,
    pub violations: usize,
}

#[derive(Debug, Clone, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Witness {
    None,
    /// Violating rungs at `level`, with margins `E(ℓ) − level`
    /// (`None` where `E` diverges).
    Violations { level: f64, indices: Vec<usize>, margins: Vec<Option<f64>> },
    /// Satisfaction table over the ε-grid (Roumieu holds).
    EpsTable { rows: Vec<GridRow> },
    /// Fitted `(K, r, C)` for the Beurling bound (holds);
    /// `log_k <= 0` means `K <= 1`.
    BeurlingFit { log_k: f64, r: f64, c: usize },
    /// Fitted `(L, exponent, R)` for the polynomial comparison bound.
    SmoothFit { log_l: f64, exponent: f64, r_index: usize, slope: f64 },
}

#[derive(Debug, Clone, Serialize)]
pub struct HypoVerdict {
    pub condition_tag: ConditionTag,
    pub decision: HypoDecision,
    pub witness: Witness,
    pub diagnostic: Vec<HypoPoint>,
    pub truncation: usize,
}

/// Sign of the exponent in the polynomial comparison condition; the growth
/// form is the one printed in the source remark, the decay form is the one
/// matching the cited literature. Configurable because the two disagree.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExponentSign {
    Growth,
    Decay,
}

struct Prepared {
    /// All rungs past burn-in with their m-values.
    points: Vec<HypoPoint>,
    /// Indices (into the ladder) with exactly zero m past burn-in.
    zeros: Vec<usize>,
    truncation: usize,
}

fn fails_quorum(truncation: usize) -> usize {
    truncation.div_ceil(10)
}

fn prepare(
    s: &SymbolSequence,
    assoc: Option<&AssociatedFunction<'_>>,
) -> Result<Prepared, HypoError> {
    let model = s.model();
    let nu_root = 1.0 / model.nu as f64;
    let mut points = Vec::new();
    let mut zeros = Vec::new();
    for ell in 0..s.len() {
        let lambda = model.lambda(ell);
        if lambda < BURN_IN_LAMBDA {
            continue;
        }
        let m = m_sigma(s, ell)?.m_value;
        if m == 0.0 {
            zeros.push(ell);
            points.push(HypoPoint { ell, lambda, m, e: None });
            continue;
        }
        let e = match assoc {
            Some(f) => {
                let level = (-m.ln()).max(0.0);
                Some(f.inverse(level)? / lambda.powf(nu_root))
            }
            None => None,
        };
        points.push(HypoPoint { ell, lambda, m, e });
    }
    Ok(Prepared { points, zeros, truncation: s.len() })
}

fn check_inputs(
    s: &SymbolSequence,
    w: &WeightSequence,
    grid: &[f64],
) -> Result<(), HypoError> {
    if w.nu() != s.model().nu {
        return Err(HypoError::NuMismatch {
            weights_nu: w.nu(),
            model: s.model().name.clone(),
            model_nu: s.model().nu,
        });
    }
    if grid.is_empty() || grid.iter().any(|&g| !(g > 0.0) || !g.is_finite()) {
        return Err(HypoError::EmptyGrid);
    }
    Ok(())
}

/// Violation set of `m(σ(ℓ)) >= exp(−M(level·λ^{1/ν}))` over the prepared
/// points, in log domain. Zero-m rungs violate every level.
fn violations_at(
    prep: &Prepared,
    assoc: &AssociatedFunction<'_>,
    nu: u32,
    level: f64,
) -> Result<Vec<usize>, HypoError> {
    let nu_root = 1.0 / nu as f64;
    let mut out = Vec::new();
    for p in &prep.points {
        let bound = -assoc.eval(level * p.lambda.powf(nu_root))?;
        if p.m == 0.0 || p.m.ln() < bound {
            out.push(p.ell);
        }
    }
    Ok(out)
}

fn margins_for(prep: &Prepared, indices: &[usize], level: f64) -> Vec<Option<f64>> {
    indices
        .iter()
        .map(|&ell| {
            prep.points
                .iter()
                .find(|p| p.ell == ell)
                .and_then(|p| p.e)
                .map(|e| e - level)
        })
        .collect()
}

/// Window slope of `log E` against `log λ` over the positive-E points of the
/// trailing window; `None` when fewer than two such points exist.
fn window_e_slope(points: &[HypoPoint]) -> (Option<f64>, Vec<&HypoPoint>) {
    let w0 = window_start(points.len());
    let window: Vec<&HypoPoint> =
        points[w0..].iter().filter(|p| matches!(p.e, Some(e) if e > 0.0)).collect();
    if window.len() < 2 {
        return (None, window);
    }
    let xs: Vec<f64> = window.iter().map(|p| p.lambda.ln()).collect();
    let ys: Vec<f64> = window.iter().map(|p| p.e.unwrap().ln()).collect();
    (ls_slope(&xs, &ys), window)
}

/// Roumieu condition: for every ε there is `C_ε` with
/// `m(σ(ℓ)) >= exp(−M(ε λ_ℓ^{1/ν}))` for all `ℓ >= C_ε`.
pub fn test_roumieu_gh(
    s: &SymbolSequence,
    w: &WeightSequence,
    eps_grid: &[f64],
) -> Result<HypoVerdict, HypoError> {
    check_inputs(s, w, eps_grid)?;
    let assoc = AssociatedFunction::new(w);
    let prep = prepare(s, Some(&assoc))?;
    let quorum = fails_quorum(prep.truncation);
    let tail_thr = tail_lambda_threshold(s.model());
    let in_tail = |ell: usize| tail_thr.is_some_and(|thr| s.model().lambda(ell) >= thr);

    let done = |decision, witness| HypoVerdict {
        condition_tag: ConditionTag::Roumieu31,
        decision,
        witness,
        diagnostic: prep.points.clone(),
        truncation: prep.truncation,
    };

    let mut grid = eps_grid.to_vec();
    grid.sort_by(|a, b| a.partial_cmp(b).unwrap());

    if prep.zeros.len() >= quorum {
        let level = grid[0];
        let margins = margins_for(&prep, &prep.zeros, level);
        return Ok(done(
            HypoDecision::Fails,
            Witness::Violations { level, indices: prep.zeros.clone(), margins },
        ));
    }

    // Per-ε satisfaction table on the exact inequality.
    let mut rows = Vec::with_capacity(grid.len());
    let mut all_clean = true;
    let mut sets = Vec::with_capacity(grid.len());
    for &eps in &grid {
        let v = violations_at(&prep, &assoc, w.nu(), eps)?;
        let satisfied_from = if v.is_empty() {
            Some(0)
        } else if !in_tail(*v.last().unwrap()) {
            Some(v.last().unwrap() + 1)
        } else {
            None
        };
        if satisfied_from.is_none() {
            all_clean = false;
        }
        rows.push(GridRow { level: eps, satisfied_from, violations: v.len() });
        sets.push(v);
    }
    if all_clean {
        return Ok(done(HypoDecision::Holds, Witness::EpsTable { rows }));
    }

    let (slope, window_positives) = window_e_slope(&prep.points);
    if matches!(slope, Some(sl) if sl < -SLOPE_TOL) {
        // Diagnostic trending to zero: every ε is eventually satisfied; the
        // table records which thresholds were reached within truncation.
        return Ok(done(HypoDecision::Holds, Witness::EpsTable { rows }));
    }

    // Not trending to zero: look for a level violated persistently, largest
    // first (the strongest witness).
    for (row, v) in rows.iter().zip(&sets).rev() {
        let dirty_tail = v.iter().any(|&ell| in_tail(ell));
        if dirty_tail && v.len() >= quorum {
            let margins = margins_for(&prep, v, row.level);
            return Ok(done(
                HypoDecision::Fails,
                Witness::Violations { level: row.level, indices: v.clone(), margins },
            ));
        }
    }
    let _ = window_positives;
    Ok(done(HypoDecision::Inconclusive, Witness::EpsTable { rows }))
}

/// Beurling condition: some `K, r, C` give
/// `m(σ(ℓ)) >= K exp(−M(r λ_ℓ^{1/ν}))` for all `ℓ >= C`.
pub fn test_beurling_gh(
    s: &SymbolSequence,
    w: &WeightSequence,
    r_grid: &[f64],
) -> Result<HypoVerdict, HypoError> {
    check_inputs(s, w, r_grid)?;
    let assoc = AssociatedFunction::new(w);
    let prep = prepare(s, Some(&assoc))?;
    let quorum = fails_quorum(prep.truncation);
    let tail_thr = tail_lambda_threshold(s.model());
    let in_tail = |ell: usize| tail_thr.is_some_and(|thr| s.model().lambda(ell) >= thr);
    let nu_root = 1.0 / s.model().nu as f64;

    let done = |decision, witness| HypoVerdict {
        condition_tag: ConditionTag::Beurling41,
        decision,
        witness,
        diagnostic: prep.points.clone(),
        truncation: prep.truncation,
    };

    let mut grid = r_grid.to_vec();
    grid.sort_by(|a, b| a.partial_cmp(b).unwrap());

    if prep.zeros.len() >= quorum {
        let level = grid[0];
        let margins = margins_for(&prep, &prep.zeros, level);
        return Ok(done(
            HypoDecision::Fails,
            Witness::Violations { level, indices: prep.zeros.clone(), margins },
        ));
    }

    // Growth of the diagnostic dominates any finite-truncation boundedness.
    let (slope, window_positives) = window_e_slope(&prep.points);
    if matches!(slope, Some(sl) if sl > SLOPE_TOL) {
        let level = grid[0];
        let indices: Vec<usize> =
            window_positives.iter().filter(|p| p.e.unwrap() > level).map(|p| p.ell).collect();
        let margins = margins_for(&prep, &indices, level);
        return Ok(done(
            HypoDecision::Fails,
            Witness::Violations { level, indices, margins },
        ));
    }

    // Smallest grid r whose violation set stays out of the tail.
    for &r in &grid {
        let v: Vec<usize> = prep
            .points
            .iter()
            .filter(|p| match p.e {
                Some(e) => e > r,
                None => true,
            })
            .map(|p| p.ell)
            .collect();
        let clean = v.last().map_or(true, |&last| !in_tail(last));
        if clean {
            let c = v.last().map_or(0, |&last| last + 1);
            let mut log_k = f64::INFINITY;
            for p in &prep.points {
                if p.ell >= c && p.m > 0.0 {
                    let m_val = assoc.eval(r * p.lambda.powf(nu_root))?;
                    log_k = log_k.min(p.m.ln() + m_val);
                }
            }
            if !log_k.is_finite() {
                log_k = 0.0;
            }
            return Ok(done(HypoDecision::Holds, Witness::BeurlingFit { log_k, r, c }));
        }
    }

    // Bounded trend but beyond every grid level.
    let window_min_positive =
        window_positives.iter().map(|p| p.e.unwrap()).fold(f64::INFINITY, f64::min);
    if !window_positives.is_empty() && window_min_positive > *grid.last().unwrap() {
        let level = *grid.last().unwrap();
        let indices: Vec<usize> = window_positives.iter().map(|p| p.ell).collect();
        let margins = margins_for(&prep, &indices, level);
        return Ok(done(HypoDecision::Fails, Witness::Violations { level, indices, margins }));
    }
    Ok(done(HypoDecision::Inconclusive, Witness::None))
}

/// Polynomial comparison condition: `m(σ(ℓ)) >= L (1+λ_ℓ)^{±|p|}` beyond R,
/// with the exponent sign configurable.
pub fn test_smooth_gh(s: &SymbolSequence, sign: ExponentSign) -> Result<HypoVerdict, HypoError> {
    let prep = prepare(s, None)?;
    let quorum = fails_quorum(prep.truncation);
    let tail_thr = tail_lambda_threshold(s.model());
    let in_tail = |ell: usize| tail_thr.is_some_and(|thr| s.model().lambda(ell) >= thr);

    let done = |decision, witness| HypoVerdict {
        condition_tag: ConditionTag::SmoothRemark,
        decision,
        witness,
        diagnostic: prep.points.clone(),
        truncation: prep.truncation,
    };

    let zero_in_tail = prep.zeros.iter().any(|&ell| in_tail(ell));
    if prep.zeros.len() >= quorum || zero_in_tail {
        // No positive L can sit below a vanishing m.
        let margins = vec![None; prep.zeros.len()];
        return Ok(done(
            HypoDecision::Fails,
            Witness::Violations { level: 0.0, indices: prep.zeros.clone(), margins },
        ));
    }

    let nonzero: Vec<&HypoPoint> = prep.points.iter().filter(|p| p.m > 0.0).collect();
    if nonzero.len() < 4 {
        return Ok(done(HypoDecision::Inconclusive, Witness::None));
    }
    let w0 = window_start(nonzero.len());
    let window = &nonzero[w0..];
    let xs: Vec<f64> = window.iter().map(|p| (1.0 + p.lambda).ln()).collect();
    let ys: Vec<f64> = window.iter().map(|p| p.m.ln()).collect();
    let Some(beta) = ls_slope(&xs, &ys) else {
        return Ok(done(HypoDecision::Inconclusive, Witness::None));
    };

    // Drift between window halves flags super-polynomial behaviour.
    let mid = window.len() / 2;
    let drift = if mid >= 2 && window.len() - mid >= 2 {
        let b1 = ls_slope(&xs[..mid], &ys[..mid]);
        let b2 = ls_slope(&xs[mid..], &ys[mid..]);
        match (b1, b2) {
            (Some(b1), Some(b2)) => Some(b2 - b1),
            _ => None,
        }
    } else {
        None
    };

    let exponent = match sign {
        ExponentSign::Growth => beta.abs(),
        ExponentSign::Decay => -beta.abs(),
    };
    let residual_slope = beta - exponent;
    let super_polynomial = matches!(drift, Some(d) if d < -0.25);

    if residual_slope < -SLOPE_TOL || super_polynomial {
        let r_index = window.first().map(|p| p.ell).unwrap_or(0);
        let indices: Vec<usize> = window.iter().map(|p| p.ell).collect();
        let margins = vec![None; indices.len()];
        let _ = r_index;
        return Ok(done(
            HypoDecision::Fails,
            Witness::Violations { level: 0.0, indices, margins },
        ));
    }

    let r_index = window.first().map(|p| p.ell).unwrap_or(0);
    let mut log_l = f64::INFINITY;
    for p in &nonzero {
        if p.ell >= r_index {
            log_l = log_l.min(p.m.ln() - exponent * (1.0 + p.lambda).ln());
        }
    }
    Ok(done(
        HypoDecision::Holds,
        Witness::SmoothFit { log_l, exponent, r_index, slope: beta },
    ))
}

/// Per-ε verification row of the printed comparison inequality
/// `(1+λ)^{|p|} >= exp(−M(ε λ^{1/ν}))`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct PointwiseRow {
    pub eps: f64,
    pub satisfied_from: Option<usize>,
    pub min_margin: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ImplicationReport {
    pub smooth: HypoVerdict,
    pub roumieu: HypoVerdict,
    /// Set when the smooth condition holds but the Roumieu condition fails —
    /// an impossible combination, indicating a toolkit bug or truncation
    /// artifact.
    pub contradiction: bool,
    pub pointwise: Vec<PointwiseRow>,
}

/// Runs the smooth and Roumieu tests together and verifies the pointwise
/// comparison inequality at the fitted constants.
pub fn implication_check(
    s: &SymbolSequence,
    w: &WeightSequence,
    eps_grid: &[f64],
    sign: ExponentSign,
) -> Result<ImplicationReport, HypoError> {
    let smooth = test_smooth_gh(s, sign)?;
    let roumieu = test_roumieu_gh(s, w, eps_grid)?;
    let contradiction = smooth.decision == HypoDecision::Holds
        && roumieu.decision == HypoDecision::Fails;

    let exponent = match smooth.witness {
        Witness::SmoothFit { exponent, .. } => exponent.abs(),
        _ => 0.0,
    };
    let assoc = AssociatedFunction::new(w);
    let nu_root = 1.0 / s.model().nu as f64;
    let model = s.model();
    let mut pointwise = Vec::with_capacity(eps_grid.len());
    for &eps in eps_grid {
        let mut min_margin = f64::INFINITY;
        let mut last_violation: Option<usize> = None;
        let mut any = false;
        for ell in 0..s.len() {
            let lambda = model.lambda(ell);
            if lambda < BURN_IN_LAMBDA {
                continue;
            }
            any = true;
            let lhs = exponent * (1.0 + lambda).ln();
            let rhs = -assoc.eval(eps * lambda.powf(nu_root))?;
            let margin = lhs - rhs;
            min_margin = min_margin.min(margin);
            if margin < 0.0 {
                last_violation = Some(ell);
            }
        }
        let satisfied_from = if !any {
            None
        } else {
            match last_violation {
                None => Some(0),
                Some(last) if last + 1 < s.len() => Some(last + 1),
                Some(_) => None,
            }
        };
        pointwise.push(PointwiseRow { eps, satisfied_from, min_margin });
    }
    Ok(ImplicationReport { smooth, roumieu, contradiction, pointwise })
}
