//! Synthesis of singular solutions from violations of the hypoellipticity
//! conditions.
//!
//! Given a symbol violating the Roumieu condition at some fixed ε₀ (or the
//! Beurling condition along a growing schedule), the constructed `u` carries
//! the unit minimizer vector of `σ(ℓ)` on the violating subsequence and zero
//! elsewhere, and `Pu` is assembled blockwise as `σ(ℓ)·û(ℓ)`. The
//! construction cannot certify that the violation set is infinite — it
//! enumerates the set within the truncation and says so. Every synthesized
//! bundle is pushed through a three-part verification contract: `u` lies in
//! the dual class, `u` is not smooth, and `Pu` lies in the class.

use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::classify::{
    self, default_n_grid, test_beurling, test_dual, test_roumieu, test_smooth, ClassifyError,
    CoefficientSequence, Decision, DualFlavor, MembershipVerdict,
};
use crate::symbols::{m_sigma, SymbolBound, SymbolError, SymbolSequence};
use crate::trend::BURN_IN_LAMBDA;
use crate::weights::{AssociatedFunction, WeightError, WeightSequence};

/// Default cap on the Beurling schedule index k.
pub const DEFAULT_SCHEDULE_CAP: usize = 32;

#[derive(Debug, Error)]
pub enum SynthError {
    #[error("weights have nu = {weights_nu} but model `{model}` has nu = {model_nu}")]
    NuMismatch { weights_nu: u32, model: String, model_nu: u32 },
    #[error("eps0 must be positive, got {eps0}")]
    BadEps0 { eps0: f64 },
    #[error(
        "no rung violates the bound at eps0 = {eps0} within the truncation; \
         this does not assert that the condition holds"
    )]
    NoCounterexampleAtTruncation { eps0: f64 },
    #[error("schedule stalled at k = {reached_k}: no unused rung within truncation satisfies the bound")]
    ScheduleExhausted { reached_k: usize },
    #[error(transparent)]
    Symbols(#[from] SymbolError),
    #[error(transparent)]
    Weights(#[from] WeightError),
    #[error(transparent)]
    Classify(#[from] ClassifyError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Flavor {
    Roumieu,
    Beurling,
}

/// What drove the subsequence choice: a fixed ε₀ or the growing schedule
/// `(k, ℓ_k)`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Driver {
    Eps0 { eps0: f64 },
    Schedule { picks: Vec<(usize, usize)> },
}

/// Log-domain norms carried alongside the raw coefficients so verification
/// stays exact where the linear values underflow.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct LogNorms {
    pub ell: usize,
    pub log_u_norm: f64,
    /// `None` when the `Pu` block is exactly zero.
    pub log_pu_norm: Option<f64>,
}

/// Results of the automatic verification contract.
#[derive(Debug, Clone, Serialize)]
pub struct ContractReport {
    pub dual_membership: MembershipVerdict,
    pub smooth_membership: MembershipVerdict,
    pub pu_membership: MembershipVerdict,
    /// Roumieu case: fitted `log C` of the `Pu` bound at `L = ε₀`; the proof
    /// promises `C = 1`, i.e. a nonpositive value.
    pub pu_log_c_at_eps0: Option<f64>,
    pub passed: bool,
}

/// A synthesized singular solution with its blockwise image under the symbol.
#[derive(Debug, Clone)]
pub struct Counterexample {
    pub u: CoefficientSequence,
    pub pu: CoefficientSequence,
    pub subsequence: Vec<usize>,
    pub flavor: Flavor,
    pub driver: Driver,
    pub log_norms: Vec<LogNorms>,
    pub contract: ContractReport,
}

fn check_nu(s: &SymbolSequence, w: &WeightSequence) -> Result<(), SynthError> {
    if w.nu() != s.model().nu {
        return Err(SynthError::NuMismatch {
            weights_nu: w.nu(),
            model: s.model().name.clone(),
            model_nu: s.model().nu,
        });
    }
    Ok(())
}

fn assemble(
    s: &SymbolSequence,
    picks: &[(usize, SymbolBound)],
) -> Result<(CoefficientSequence, CoefficientSequence, Vec<LogNorms>), SynthError> {
    let model = Arc::clone(s.model());
    let mut u = CoefficientSequence::zeros(Arc::clone(&model));
    let mut pu = CoefficientSequence::zeros(Arc::clone(&model));
    let mut log_norms = Vec::with_capacity(picks.len());
    let mut u_blocks: Vec<_> = u.blocks().to_vec();
    let mut pu_blocks: Vec<_> = pu.blocks().to_vec();
    for (ell, bound) in picks {
        let v = bound.minimizer.clone();
        let image = s.block(*ell)? * &v;
        let u_norm = classify::hs_norm_sq(&v).sqrt();
        let pu_norm = classify::hs_norm_sq(&image).sqrt();
        log_norms.push(LogNorms {
            ell: *ell,
            log_u_norm: u_norm.ln(),
            log_pu_norm: if pu_norm > 0.0 { Some(pu_norm.ln()) } else { None },
        });
        u_blocks[*ell] = v;
        pu_blocks[*ell] = image;
    }
    u = CoefficientSequence::new(Arc::clone(&model), u_blocks)?;
    pu = CoefficientSequence::new(model, pu_blocks)?;
    Ok((u, pu, log_norms))
}

fn grids() -> Vec<f64> {
    crate::geometric_grid(1e-3, 1e3, 25)
}

fn run_contract(
    u: &CoefficientSequence,
    pu: &CoefficientSequence,
    w: &WeightSequence,
    flavor: Flavor,
    eps0: Option<f64>,
) -> Result<ContractReport, SynthError> {
    let l_grid = grids();
    let dual_flavor = match flavor {
        Flavor::Roumieu => DualFlavor::Roumieu,
        Flavor::Beurling => DualFlavor::Beurling,
    };
    let dual_membership = test_dual(u, w, dual_flavor, &l_grid)?;
    let smooth_membership = test_smooth(u, &default_n_grid());
    let pu_membership = match flavor {
        Flavor::Roumieu => test_roumieu(pu, w)?,
        Flavor::Beurling => test_beurling(pu, w, &l_grid)?,
    };

    let pu_log_c_at_eps0 = match (flavor, eps0) {
        (Flavor::Roumieu, Some(eps0)) => {
            let assoc = AssociatedFunction::new(w);
            let nu_root = 1.0 / u.model().nu as f64;
            let norms = classify::hs_norms(pu);
            let mut acc: Option<f64> = None;
            for ell in 0..pu.len() {
                if norms[ell] > 0.0 {
                    let m = assoc.eval(eps0 * u.model().lambda(ell).powf(nu_root))?;
                    let v = norms[ell].ln() + m;
                    acc = Some(acc.map_or(v, |a: f64| a.max(v)));
                }
            }
            acc
        }
        _ => None,
    };

    let c_ok = match (flavor, pu_log_c_at_eps0) {
        (Flavor::Roumieu, Some(log_c)) => log_c <= 1e-9,
        (Flavor::Roumieu, None) => true,
        (Flavor::Beurling, _) => true,
    };
    let passed = dual_membership.decision == Decision::Member
        && smooth_membership.decision == Decision::NonMember
        && pu_membership.decision == Decision::Member
        && c_ok;
    Ok(ContractReport {
        dual_membership,
        smooth_membership,
        pu_membership,
        pu_log_c_at_eps0,
        passed,
    })
}

/// Roumieu counterexample: exhaustively enumerates the violation set
/// `{ℓ : m(σ(ℓ)) < exp(−M(ε₀ λ_ℓ^{1/ν}))}` past burn-in and places the unit
/// minimizer of each violating block.
pub fn synth_roumieu(
    s: &SymbolSequence,
    w: &WeightSequence,
    eps0: f64,
) -> Result<Counterexample, SynthError> {
    check_nu(s, w)?;
    if !(eps0 > 0.0) || !eps0.is_finite() {
        return Err(SynthError::BadEps0 { eps0 });
    }
    let assoc = AssociatedFunction::new(w);
    let model = s.model();
    let nu_root = 1.0 / model.nu as f64;

    let mut picks = Vec::new();
    for ell in 0..s.len() {
        let lambda = model.lambda(ell);
        if lambda < BURN_IN_LAMBDA {
            continue;
        }
        let bound = m_sigma(s, ell)?;
        let rhs = -assoc.eval(eps0 * lambda.powf(nu_root))?;
        let violates = bound.m_value == 0.0 || bound.m_value.ln() < rhs;
        if violates {
            picks.push((ell, bound));
        }
    }
    if picks.is_empty() {
        return Err(SynthError::NoCounterexampleAtTruncation { eps0 });
    }

    let subsequence: Vec<usize> = picks.iter().map(|(ell, _)| *ell).collect();
    let (u, pu, log_norms) = assemble(s, &picks)?;
    let contract = run_contract(&u, &pu, w, Flavor::Roumieu, Some(eps0))?;
    Ok(Counterexample {
        u,
        pu,
        subsequence,
        flavor: Flavor::Roumieu,
        driver: Driver::Eps0 { eps0 },
        log_norms,
        contract,
    })
}

/// Beurling counterexample: greedy schedule picking, for each `k`, the
/// smallest unused rung with `m(σ(ℓ)) < exp(−M(k λ_ℓ^{1/ν}))`.
pub fn synth_beurling(
    s: &SymbolSequence,
    w: &WeightSequence,
    k_cap: usize,
) -> Result<Counterexample, SynthError> {
    check_nu(s, w)?;
    let assoc = AssociatedFunction::new(w);
    let model = s.model();
    let nu_root = 1.0 / model.nu as f64;
    let k_cap = k_cap.max(1);

    // Cache per-rung bounds once; the greedy scan revisits rungs.
    let mut bounds: Vec<Option<SymbolBound>> = Vec::with_capacity(s.len());
    for ell in 0..s.len() {
        if model.lambda(ell) < BURN_IN_LAMBDA {
            bounds.push(None);
        } else {
            bounds.push(Some(m_sigma(s, ell)?));
        }
    }

    let mut picks: Vec<(usize, SymbolBound)> = Vec::new();
    let mut schedule: Vec<(usize, usize)> = Vec::new();
    let mut next_start = 0usize;
    for k in 1..=k_cap {
        let mut found = None;
        for ell in next_start..s.len() {
            let Some(bound) = &bounds[ell] else { continue };
            let lambda = model.lambda(ell);
            let rhs = -assoc.eval(k as f64 * lambda.powf(nu_root))?;
            if bound.m_value == 0.0 || bound.m_value.ln() < rhs {
                found = Some((ell, bound.clone()));
                break;
            }
        }
        match found {
            Some((ell, bound)) => {
                next_start = ell + 1;
                schedule.push((k, ell));
                picks.push((ell, bound));
            }
            None => return Err(SynthError::ScheduleExhausted { reached_k: k }),
        }
    }

    let subsequence: Vec<usize> = picks.iter().map(|(ell, _)| *ell).collect();
    let (u, pu, log_norms) = assemble(s, &picks)?;
    let contract = run_contract(&u, &pu, w, Flavor::Beurling, None)?;
    Ok(Counterexample {
        u,
        pu,
        subsequence,
        flavor: Flavor::Beurling,
        driver: Driver::Schedule { picks: schedule },
        log_norms,
        contract,
    })
}

/// Manifest stored next to the `u`/`pu` coefficient files of a bundle.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BundleManifest {
    pub flavor: Flavor,
    pub driver: Driver,
    pub subsequence: Vec<usize>,
    pub log_norms: Vec<LogNorms>,
    pub contract_passed: bool,
}

impl BundleManifest {
    pub fn from_counterexample(ce: &Counterexample) -> BundleManifest {
        BundleManifest {
            flavor: ce.flavor,
            driver: ce.driver.clone(),
            subsequence: ce.subsequence.clone(),
            log_norms: ce.log_norms.clone(),
            contract_passed: ce.contract.passed,
        }
    }
}

/// Re-verification of a bundle loaded from disk.
#[derive(Debug, Clone, Serialize)]
pub struct BundleVerification {
    pub sparsity_ok: bool,
    pub unit_norms_ok: bool,
    /// `None` when no symbol sequence was supplied.
    pub pu_matches_symbol: Option<bool>,
    pub contract: ContractReport,
    pub passed: bool,
}

/// Re-runs the invariant checks and the verification contract on bundle data.
pub fn verify_bundle(
    u: &CoefficientSequence,
    pu: &CoefficientSequence,
    manifest: &BundleManifest,
    w: &WeightSequence,
    symbols: Option<&SymbolSequence>,
) -> Result<BundleVerification, SynthError> {
    let norms = classify::hs_norms(u);
    let in_subsequence = |ell: usize| manifest.subsequence.binary_search(&ell).is_ok();
    let sparsity_ok = (0..u.len()).all(|ell| in_subsequence(ell) || norms[ell] == 0.0);
    let unit_norms_ok = manifest.subsequence.iter().all(|&ell| norms[ell] == 1.0);

    let pu_matches_symbol = match symbols {
        Some(s) => {
            let mut ok = true;
            for &ell in &manifest.subsequence {
                let expected = s.block(ell)? * u.block(ell);
                if &expected != pu.block(ell) {
                    ok = false;
                    break;
                }
            }
            Some(ok)
        }
        None => None,
    };

    let eps0 = match &manifest.driver {
        Driver::Eps0 { eps0 } => Some(*eps0),
        Driver::Schedule { .. } => None,
    };
    let contract = run_contract(u, pu, w, manifest.flavor, eps0)?;
    let passed = sparsity_ok
        && unit_norms_ok
        && pu_matches_symbol.unwrap_or(true)
        && contract.passed;
    Ok(BundleVerification { sparsity_ok, unit_norms_ok, pu_matches_symbol, contract, passed })
}
