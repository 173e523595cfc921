//! Weight sequences `{M_k}` and their associated function.
//!
//! All arithmetic is carried out in the log domain: a sequence is stored (or
//! generated) as `log M_k`, Gevrey tables come from the log-gamma function
//! rather than factorial products, and the associated function
//! `M(r) = sup_k log(r^{νk} / M_{νk})` is evaluated by an ascending scan that
//! exits early at the first decrease, which is justified by the log-convexity
//! axiom (M.3).

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Default cap on the number of scan steps in [`AssociatedFunction::eval`].
pub const DEFAULT_K_BUDGET: usize = 1_000_000;

/// Absolute tolerance on the bracket width in [`AssociatedFunction::inverse`].
pub const INVERSE_ABS_TOL: f64 = 1e-12;
/// Relative tolerance on the bracket width in [`AssociatedFunction::inverse`].
pub const INVERSE_REL_TOL: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum WeightError {
    #[error("malformed weight sequence: log M_{k} = {value} is not finite")]
    MalformedSequence { k: usize, value: f64 },
    #[error("gevrey order must satisfy s > 1, got s = {s} (use `analytic` for s = 1)")]
    BadGevreyOrder { s: f64 },
    #[error("order nu must be positive")]
    BadNu,
    #[error("custom weight table must hold at least M_0 and M_1")]
    TableTooShort,
    #[error("prefix length {prefix} exceeds custom weight table length {len}")]
    PrefixExceedsTable { prefix: usize, len: usize },
    #[error("H must satisfy H > 1, got {h}")]
    BadH { h: f64 },
    #[error("no representable A >= 1 fits the prefix for the given H; first offending index k = {k}")]
    FitFailure { k: usize },
    #[error(
        "associated-function scan still nondecreasing after k = {scanned} (r = {r}); \
         r is too large for the weight table or scan budget"
    )]
    BudgetExceeded { r: f64, scanned: usize },
    #[error("level y = {y} not reached by M within the bracket-expansion budget")]
    UnreachableLevel { y: f64 },
    #[error("associated function requires r >= 0, got {r}")]
    NegativeArgument { r: f64 },
    #[error("generalized inverse requires y >= 0, got {y}")]
    NegativeLevel { y: f64 },
}

/// A weight sequence `{M_k}` in log domain together with the order ν of the
/// reference elliptic operator.
///
/// Invariants expected by the rest of the crate (`M_0 = M_1 = 1`,
/// log-convexity) are checked by [`check_axioms`], not by construction, so
/// that deliberately broken sequences can be probed.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum WeightSequence {
    /// `M_k = (k!)^s` with `s > 1`.
    Gevrey { s: f64, nu: u32 },
    /// `M_k = k!` (the Gevrey scale at `s = 1`).
    Analytic { nu: u32 },
    /// Explicit table of `log M_k`.
    Custom { nu: u32, log_m: Vec<f64> },
}

impl WeightSequence {
    pub fn gevrey(s: f64, nu: u32) -> Result<Self, WeightError> {
        if !(s > 1.0) || !s.is_finite() {
            return Err(WeightError::BadGevreyOrder { s });
        }
        if nu == 0 {
            return Err(WeightError::BadNu);
        }
        Ok(WeightSequence::Gevrey { s, nu })
    }

    pub fn analytic(nu: u32) -> Result<Self, WeightError> {
        if nu == 0 {
            return Err(WeightError::BadNu);
        }
        Ok(WeightSequence::Analytic { nu })
    }

    pub fn custom(log_m: Vec<f64>, nu: u32) -> Result<Self, WeightError> {
        if nu == 0 {
            return Err(WeightError::BadNu);
        }
        if log_m.len() < 2 {
            return Err(WeightError::TableTooShort);
        }
        for (k, &v) in log_m.iter().enumerate() {
            if !v.is_finite() {
                return Err(WeightError::MalformedSequence { k, value: v });
            }
        }
        Ok(WeightSequence::Custom { nu, log_m })
    }

    /// Re-validates a sequence obtained by deserialization.
    pub fn validate(&self) -> Result<(), WeightError> {
        match self {
            WeightSequence::Gevrey { s, nu } => {
                WeightSequence::gevrey(*s, *nu)?;
            }
            WeightSequence::Analytic { nu } => {
                WeightSequence::analytic(*nu)?;
            }
            WeightSequence::Custom { nu, log_m } => {
                WeightSequence::custom(log_m.clone(), *nu)?;
            }
        }
        Ok(())
    }

    pub fn nu(&self) -> u32 {
        match self {
            WeightSequence::Gevrey { nu, .. }
            | WeightSequence::Analytic { nu }
            | WeightSequence::Custom { nu, .. } => *nu,
        }
    }

    /// The Gevrey exponent, when the sequence is a Gevrey scale.
    pub fn gevrey_order(&self) -> Option<f64> {
        match self {
            WeightSequence::Gevrey { s, .. } => Some(*s),
            WeightSequence::Analytic { .. } => Some(1.0),
            WeightSequence::Custom { .. } => None,
        }
    }

    /// Largest index for which `log M_k` is available, if bounded.
    pub fn max_index(&self) -> Option<usize> {
        match self {
            WeightSequence::Custom { log_m, .. } => Some(log_m.len() - 1),
            _ => None,
        }
    }

    /// `log M_k`, or `None` past the end of a custom table.
    pub fn log_m(&self, k: usize) -> Option<f64> {
        match self {
            WeightSequence::Gevrey { s, .. } => Some(s * libm::lgamma(k as f64 + 1.0)),
            WeightSequence::Analytic { .. } => Some(libm::lgamma(k as f64 + 1.0)),
            WeightSequence::Custom { log_m, .. } => log_m.get(k).copied(),
        }
    }

    fn log_m_checked(&self, k: usize, prefix: usize) -> Result<f64, WeightError> {
        match self.log_m(k) {
            Some(v) if v.is_finite() => Ok(v),
            Some(v) => Err(WeightError::MalformedSequence { k, value: v }),
            None => Err(WeightError::PrefixExceedsTable {
                prefix,
                len: self.max_index().map(|m| m + 1).unwrap_or(0),
            }),
        }
    }
}

/// Outcome of one exact axiom check over a prefix.
#[derive(Debug, Clone, Serialize)]
pub struct AxiomCheck {
    pub passed: bool,
    pub first_violation: Option<usize>,
}

/// Minimal-A fit for one of the growth axioms at a caller-chosen H.
#[derive(Debug, Clone, Serialize)]
pub struct ConstantFit {
    /// Whether a representable `A >= 1` exists over the prefix.
    pub fits: bool,
    /// `log` of the minimal admissible A (0 when every ratio is below 1).
    pub min_log_a: f64,
    /// Index attaining the maximal ratio.
    pub argmax_k: usize,
}

/// Per-axiom report produced by [`check_axioms`].
#[derive(Debug, Clone, Serialize)]
pub struct AxiomReport {
    pub m0: AxiomCheck,
    pub m1: ConstantFit,
    pub m2: ConstantFit,
    pub m3: AxiomCheck,
    pub prefix_len: usize,
    pub h: f64,
}

impl AxiomReport {
    pub fn all_pass(&self) -> bool {
        self.m0.passed && self.m1.fits && self.m2.fits && self.m3.passed
    }
}

/// Checks (M.0)–(M.3) over the prefix `k = 0..=prefix_len`.
///
/// (M.0) and (M.3) are exact inequalities; (M.1) and (M.2) always admit some
/// finite A over a finite prefix of finite positive weights, so for them the
/// report carries the minimal A for the caller-chosen `h`.
pub fn check_axioms(
    w: &WeightSequence,
    prefix_len: usize,
    h: f64,
) -> Result<AxiomReport, WeightError> {
    assert!(prefix_len >= 2, "prefix_len must be at least 2");
    let table: Vec<f64> = (0..=prefix_len)
        .map(|k| w.log_m_checked(k, prefix_len))
        .collect::<Result<_, _>>()?;

    let m0_ok = table[0] == 0.0 && table[1] == 0.0;
    let m0 = AxiomCheck {
        passed: m0_ok,
        first_violation: if m0_ok {
            None
        } else if table[0] != 0.0 {
            Some(0)
        } else {
            Some(1)
        },
    };

    let mut m3 = AxiomCheck { passed: true, first_violation: None };
    for k in 1..prefix_len {
        if 2.0 * table[k] > table[k - 1] + table[k + 1] {
            m3 = AxiomCheck { passed: false, first_violation: Some(k) };
            break;
        }
    }

    let (m1, m2) = growth_fits(&table, h);
    Ok(AxiomReport { m0, m1, m2, m3, prefix_len, h })
}

fn growth_fits(table: &[f64], h: f64) -> (ConstantFit, ConstantFit) {
    let log_h = h.ln();
    let prefix_len = table.len() - 1;

    // (M.1): log A >= log M_{k+1} - k log H - log M_k
    let mut m1 = (0.0f64, 0usize);
    for k in 0..prefix_len {
        let r = table[k + 1] - k as f64 * log_h - table[k];
        if r > m1.0 {
            m1 = (r, k);
        }
    }
    // (M.2): log A >= log M_{2k} - 2k log H - 2 log M_k
    let mut m2 = (0.0f64, 0usize);
    for k in 0..=prefix_len / 2 {
        let r = table[2 * k] - 2.0 * k as f64 * log_h - 2.0 * table[k];
        if r > m2.0 {
            m2 = (r, k);
        }
    }
    let max_log_a = f64::MAX.ln();
    (
        ConstantFit { fits: m1.0 <= max_log_a, min_log_a: m1.0, argmax_k: m1.1 },
        ConstantFit { fits: m2.0 <= max_log_a, min_log_a: m2.0, argmax_k: m2.1 },
    )
}

/// Constants (A, H) certifying (M.1) and (M.2) over a finite prefix.
///
/// A is carried in log domain: growth scales like H = 2 on a fast Gevrey
/// sequence force log A into the thousands over prefixes long enough to
/// cover an associated-function scan.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct AxiomConstants {
    pub log_a: f64,
    pub h: f64,
    pub valid_up_to: usize,
}

impl AxiomConstants {
    /// Linear-domain A; saturates to infinity when unrepresentable.
    pub fn a(&self) -> f64 {
        self.log_a.exp()
    }
}

/// Fits the minimal `A >= 1` such that (M.1) and (M.2) hold with the given H
/// over `k = 0..=prefix_len`.
pub fn fit_constants(
    w: &WeightSequence,
    h: f64,
    prefix_len: usize,
) -> Result<AxiomConstants, WeightError> {
    if !(h > 1.0) || !h.is_finite() {
        return Err(WeightError::BadH { h });
    }
    let table: Vec<f64> = (0..=prefix_len)
        .map(|k| w.log_m_checked(k, prefix_len))
        .collect::<Result<_, _>>()?;
    let (m1, m2) = growth_fits(&table, h);
    let (log_a, argmax) = if m1.min_log_a >= m2.min_log_a {
        (m1.min_log_a, m1.argmax_k)
    } else {
        (m2.min_log_a, m2.argmax_k)
    };
    if !log_a.is_finite() {
        return Err(WeightError::FitFailure { k: argmax });
    }
    Ok(AxiomConstants { log_a: log_a.max(0.0), h, valid_up_to: prefix_len })
}

/// Evaluator for the associated function
/// `M(r) = sup_{k >= 1} [νk log r − log M_{νk}]` and its generalized inverse.
#[derive(Debug, Clone)]
pub struct AssociatedFunction<'w> {
    weights: &'w WeightSequence,
    clamp_nonnegative: bool,
    k_budget: usize,
}

impl<'w> AssociatedFunction<'w> {
    /// Default evaluator: clamped at zero, scan budget [`DEFAULT_K_BUDGET`].
    pub fn new(weights: &'w WeightSequence) -> Self {
        AssociatedFunction { weights, clamp_nonnegative: true, k_budget: DEFAULT_K_BUDGET }
    }

    pub fn with_clamp(mut self, clamp: bool) -> Self {
        self.clamp_nonnegative = clamp;
        self
    }

    pub fn with_budget(mut self, k_budget: usize) -> Self {
        self.k_budget = k_budget.max(1);
        self
    }

    pub fn weights(&self) -> &WeightSequence {
        self.weights
    }

    pub fn k_budget(&self) -> usize {
        self.k_budget
    }

    /// `M(r)`, by ascending scan with early exit at the first decrease.
    ///
    /// `M(0) = 0` by definition. With the clamp on (default) the result is
    /// `max(0, sup)`; with it off the raw supremum is returned, which is
    /// negative for small `r`.
    pub fn eval(&self, r: f64) -> Result<f64, WeightError> {
        if !(r >= 0.0) {
            return Err(WeightError::NegativeArgument { r });
        }
        if r == 0.0 {
            return Ok(0.0);
        }
        let nu = self.weights.nu() as usize;
        let log_r = r.ln();
        let mut best = f64::NEG_INFINITY;
        let mut prev = f64::NEG_INFINITY;
        let mut scanned = 0usize;
        for k in 1..=self.k_budget {
            let idx = nu * k;
            let log_m = match self.weights.log_m(idx) {
                Some(v) if v.is_finite() => v,
                Some(v) => return Err(WeightError::MalformedSequence { k: idx, value: v }),
                // Table ran out while the terms were still climbing.
                None => return Err(WeightError::BudgetExceeded { r, scanned }),
            };
            let term = (idx as f64) * log_r - log_m;
            if term > best {
                best = term;
            }
            // M.3 makes k -> term(k) concave, so the first strict decrease is final.
            if term < prev {
                let sup = best;
                return Ok(if self.clamp_nonnegative { sup.max(0.0) } else { sup });
            }
            prev = term;
            scanned = k;
        }
        Err(WeightError::BudgetExceeded { r, scanned })
    }

    /// Generalized inverse `inf { r >= 0 : M(r) >= y }` by monotone bisection
    /// on an exponentially expanded bracket.
    pub fn inverse(&self, y: f64) -> Result<f64, WeightError> {
        if !(y >= 0.0) {
            return Err(WeightError::NegativeLevel { y });
        }
        if y == 0.0 {
            return Ok(0.0);
        }
        // Expand until M(hi) >= y.
        let mut lo = 0.0f64;
        let mut hi = 1.0f64;
        let mut expansions = 0usize;
        loop {
            let v = self.eval(hi)?;
            if v >= y {
                break;
            }
            lo = hi;
            hi *= 2.0;
            expansions += 1;
            if expansions > 1100 {
                return Err(WeightError::UnreachableLevel { y });
            }
        }
        // Invariant: M(lo) < y <= M(hi).
        loop {
            if hi - lo <= INVERSE_ABS_TOL.max(INVERSE_REL_TOL * hi) {
                return Ok(hi);
            }
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                return Ok(hi);
            }
            if self.eval(mid)? >= y {
                hi = mid;
            } else {
                lo = mid;
            }
        }
    }
}

/// Grid report for the (M.2)-derived doubling inequality
/// `2·M(ρ) <= log A + M(H·ρ)`.
///
/// `lemma_residual_max` additionally records the largest value of
/// `M(ρ) − ½·M(√A·H·ρ)` over the grid — the residual of the sharper
/// constant-free halving estimate, reported as a diagnostic only and never
/// asserted. It is `None` when the rescaled radii exceed the scan budget
/// (large fitted A pushes `√A·H·ρ` out of reach).
#[derive(Debug, Clone, Serialize)]
pub struct DoublingReport {
    pub max_violation: f64,
    pub worst_r: f64,
    pub per_point: Vec<(f64, f64)>,
    pub lemma_residual_max: Option<f64>,
}

/// Evaluates the doubling inequality over a grid of radii.
///
/// A nonpositive `max_violation` certifies the doubling property on the grid.
pub fn doubling_check(
    f: &AssociatedFunction<'_>,
    c: &AxiomConstants,
    r_grid: &[f64],
) -> Result<DoublingReport, WeightError> {
    let halving_scale = (0.5 * c.log_a).exp() * c.h;
    let mut max_violation = f64::NEG_INFINITY;
    let mut worst_r = f64::NAN;
    let mut lemma_residual_max: Option<f64> = None;
    let mut per_point = Vec::with_capacity(r_grid.len());
    for &rho in r_grid {
        let m_rho = f.eval(rho)?;
        let m_h_rho = f.eval(c.h * rho)?;
        let violation = 2.0 * m_rho - c.log_a - m_h_rho;
        per_point.push((rho, violation));
        if violation > max_violation {
            max_violation = violation;
            worst_r = rho;
        }
        if halving_scale.is_finite() {
            if let Ok(m_scaled) = f.eval(halving_scale * rho) {
                let residual = m_rho - 0.5 * m_scaled;
                lemma_residual_max =
                    Some(lemma_residual_max.map_or(residual, |acc| acc.max(residual)));
            }
        }
    }
    Ok(DoublingReport { max_violation, worst_r, per_point, lemma_residual_max })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gevrey(s: f64, nu: u32) -> WeightSequence {
        WeightSequence::gevrey(s, nu).unwrap()
    }

    #[test]
    fn gevrey_prefix_passes_all_axioms() {
        let w = gevrey(2.0, 1);
        let report = check_axioms(&w, 64, 2.0).unwrap();
        assert!(report.m0.passed);
        assert!(report.m3.passed);
        assert!(report.m1.fits);
        assert!(report.m2.fits);
    }

    #[test]
    fn custom_m2_low_direction_is_checked_correctly() {
        // M = {1, 1, 0.5, 1}. At k = 2 the log-convexity inequality
        // 2 log M_2 <= log M_1 + log M_3 reads -1.39 <= 0 and holds; the
        // violation is at k = 1 where 0 <= log M_2 = -0.69 fails.
        let w = WeightSequence::custom(vec![0.0, 0.0, 0.5f64.ln(), 0.0], 1).unwrap();
        let report = check_axioms(&w, 2, 2.0).unwrap();
        assert!(report.m0.passed);
        assert_ne!(report.m3.first_violation, Some(2));
        assert_eq!(report.m3.first_violation, Some(1));
    }

    #[test]
    fn m0_violation_detected() {
        let w = WeightSequence::custom(vec![2.0f64.ln(), 0.0, 0.0], 1).unwrap();
        let report = check_axioms(&w, 2, 2.0).unwrap();
        assert!(!report.m0.passed);
        assert_eq!(report.m0.first_violation, Some(0));
    }

    /// Independent max-ratio oracle for the minimal A.
    fn brute_force_log_a(w: &WeightSequence, h: f64, prefix: usize) -> f64 {
        let mut log_a = 0.0f64;
        for k in 0..prefix {
            let r = w.log_m(k + 1).unwrap() - k as f64 * h.ln() - w.log_m(k).unwrap();
            log_a = log_a.max(r);
        }
        for k in 0..=prefix / 2 {
            let r =
                w.log_m(2 * k).unwrap() - 2.0 * k as f64 * h.ln() - 2.0 * w.log_m(k).unwrap();
            log_a = log_a.max(r);
        }
        log_a
    }

    #[test]
    fn fit_constants_analytic_h2() {
        let w = WeightSequence::analytic(1).unwrap();
        let c = fit_constants(&w, 2.0, 32).unwrap();
        let oracle = brute_force_log_a(&w, 2.0, 32).max(0.0);
        assert!((c.log_a - oracle).abs() <= 1e-12);
        // (k+1)/2^k and binom(2k,k)/4^k never exceed 1.
        assert_eq!(c.a(), 1.0);
    }

    #[test]
    fn fit_constants_gevrey_near_unit_h_is_large() {
        let w = gevrey(2.0, 1);
        let c = fit_constants(&w, 1.0001, 64).unwrap();
        let oracle = brute_force_log_a(&w, 1.0001, 64);
        assert!((c.log_a - oracle).abs() <= 1e-9 * oracle.abs().max(1.0));
        assert!(c.a() > 1e3, "ratios (k+1)^2/H^k peak high, got A = {}", c.a());
    }

    #[test]
    fn fit_constants_constant_sequence() {
        let w = WeightSequence::custom(vec![0.0; 33], 1).unwrap();
        let c = fit_constants(&w, 2.0, 32).unwrap();
        assert_eq!(c.a(), 1.0);
        assert_eq!(c.valid_up_to, 32);
    }

    #[test]
    fn fit_constants_rejects_h_at_most_one() {
        let w = gevrey(2.0, 1);
        assert!(matches!(fit_constants(&w, 1.0, 8), Err(WeightError::BadH { .. })));
    }

    #[test]
    fn assoc_eval_at_zero() {
        let w = gevrey(2.0, 1);
        assert_eq!(AssociatedFunction::new(&w).eval(0.0).unwrap(), 0.0);
    }

    #[test]
    fn assoc_eval_gevrey_matches_leading_order() {
        let w = gevrey(2.0, 1);
        let f = AssociatedFunction::new(&w);
        let m = f.eval(1e6).unwrap();
        let reference = 2.0 * 1e6f64.powf(0.5);
        assert!((m / reference - 1.0).abs() <= 0.05, "M(1e6) = {m}, ref = {reference}");
    }

    #[test]
    fn assoc_eval_small_r_unclamped_is_first_term() {
        let w = gevrey(2.0, 1);
        let f = AssociatedFunction::new(&w).with_clamp(false);
        let r: f64 = 1e-3;
        let expected = r.ln() - w.log_m(1).unwrap();
        let got = f.eval(r).unwrap();
        assert!(got < 0.0);
        assert!((got - expected).abs() <= 1e-15);
        // Clamped evaluator floors the same point at zero.
        let clamped = AssociatedFunction::new(&w).eval(r).unwrap();
        assert_eq!(clamped, 0.0);
    }

    #[test]
    fn assoc_eval_constant_table_exceeds_budget_for_large_r() {
        let w = WeightSequence::custom(vec![0.0; 64], 1).unwrap();
        let f = AssociatedFunction::new(&w);
        assert!(matches!(f.eval(2.0), Err(WeightError::BudgetExceeded { .. })));
        // Small r is fine: the scan exits at the first decrease.
        assert_eq!(f.eval(0.5).unwrap(), 0.0);
    }

    #[test]
    fn inverse_at_zero_level() {
        let w = gevrey(2.0, 1);
        assert_eq!(AssociatedFunction::new(&w).inverse(0.0).unwrap(), 0.0);
    }

    #[test]
    fn inverse_roundtrip_on_grid() {
        let w = gevrey(2.0, 1);
        let f = AssociatedFunction::new(&w);
        for &r in &[2.0, 5.0, 10.0, 100.0, 1e4, 1e6] {
            let y = f.eval(r).unwrap();
            let r_back = f.inverse(y).unwrap();
            assert!(r_back <= r * (1.0 + 1e-9), "inverse overshoot at r = {r}: {r_back}");
            assert!(f.eval(r_back).unwrap() >= y - 1e-9, "M(inverse(y)) < y at r = {r}");
        }
        let y = f.eval(100.0).unwrap();
        let r_back = f.inverse(y).unwrap();
        assert!(r_back >= 100.0 * (1.0 - 1e-6) && r_back <= 100.0 * (1.0 + 1e-9));
    }

    #[test]
    fn doubling_holds_for_gevrey_fitted_constants() {
        let w = gevrey(2.0, 1);
        let f = AssociatedFunction::new(&w);
        // The prefix must cover the deepest scan index of the grid:
        // k* ~ sqrt(H * 1e6), and (M.2) reads indices up to 2k*.
        let c = fit_constants(&w, 2.0, 4000).unwrap();
        let grid: Vec<f64> = (0..=6).map(|j| 10f64.powi(j)).collect();
        let report = doubling_check(&f, &c, &grid).unwrap();
        assert!(report.max_violation <= 0.0, "violation {}", report.max_violation);
    }

    #[test]
    fn doubling_near_zero_radius_is_trivial() {
        let w = gevrey(2.0, 1);
        let f = AssociatedFunction::new(&w);
        let c = fit_constants(&w, 2.0, 64).unwrap();
        let report = doubling_check(&f, &c, &[1e-12, 1e-9, 1e-6]).unwrap();
        // Both sides vanish and log A >= 0.
        assert!(report.max_violation <= 0.0);
    }

    #[test]
    fn strict_growth_past_fixture_radius() {
        // Fixture: for every (s, nu) in the test matrix, M(2r) > M(r) once
        // r >= 3 (all M_nu^{1/nu} fall below 3).
        for &(s, nu) in &[(1.5, 1), (1.5, 2), (2.0, 1), (2.0, 2), (3.0, 1), (3.0, 2)] {
            let w = gevrey(s, nu);
            let f = AssociatedFunction::new(&w);
            for &r in &[3.0, 10.0, 1e3, 1e5] {
                let lo = f.eval(r).unwrap();
                let hi = f.eval(2.0 * r).unwrap();
                assert!(hi > lo, "M not strictly growing at r = {r} for s = {s}, nu = {nu}");
            }
        }
    }
}
