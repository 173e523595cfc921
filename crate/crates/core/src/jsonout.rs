//! Deterministic JSON and CSV writers for every file the toolkit emits.
//!
//! Reports must be byte-identical across runs on identical inputs: floats are
//! printed with 17 significant digits (exact for `f64` roundtrips), fields
//! appear in fixed order, and non-finite values map to `null`. Reading goes
//! through serde; writing never does.

use crate::classify::{
    CoeffFile, DiagnosticPoint, Decision, EpowerFit, FittedConstants, MembershipVerdict,
};
use crate::hypotest::{
    ConditionTag, GridRow, HypoDecision, HypoPoint, HypoVerdict, ImplicationReport, Witness,
};
use crate::spectra::SpectralModel;
use crate::symbols::SymbolFile;
use crate::synth::{BundleManifest, BundleVerification, ContractReport, Driver, Flavor};
use crate::weights::{AxiomConstants, AxiomReport, DoublingReport};

/// One float, 17 significant digits; `null` when not finite.
pub fn fmt_f64(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        "null".into()
    }
}

pub fn fmt_opt_f64(x: Option<f64>) -> String {
    match x {
        Some(v) => fmt_f64(v),
        None => "null".into(),
    }
}

pub fn fmt_opt_usize(x: Option<usize>) -> String {
    match x {
        Some(v) => v.to_string(),
        None => "null".into(),
    }
}

pub fn fmt_str(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            '\t' => out.push_str("\\t"),
            c if (c as u32) < 0x20 => out.push_str(&format!("\\u{:04x}", c as u32)),
            c => out.push(c),
        }
    }
    out.push('"');
    out
}

fn obj(fields: &[(&str, String)]) -> String {
    let inner: Vec<String> =
        fields.iter().map(|(k, v)| format!("{}:{}", fmt_str(k), v)).collect();
    format!("{{{}}}", inner.join(","))
}

fn arr<I: IntoIterator<Item = String>>(items: I) -> String {
    let inner: Vec<String> = items.into_iter().collect();
    format!("[{}]", inner.join(","))
}

fn f64_arr(xs: &[f64]) -> String {
    arr(xs.iter().map(|&x| fmt_f64(x)))
}

pub fn model_json(m: &SpectralModel) -> String {
    obj(&[
        ("name", fmt_str(&m.name)),
        ("nu", m.nu.to_string()),
        (
            "ladder",
            arr(m.ladder.iter().map(|r| {
                obj(&[("lambda", fmt_f64(r.lambda)), ("mult", r.mult.to_string())])
            })),
        ),
    ])
}

pub fn symbol_file_json(f: &SymbolFile) -> String {
    obj(&[
        ("model", fmt_str(&f.model)),
        (
            "blocks",
            arr(f.blocks.iter().map(|b| {
                obj(&[
                    ("ell", b.ell.to_string()),
                    ("re", arr(b.re.iter().map(|row| f64_arr(row)))),
                    ("im", arr(b.im.iter().map(|row| f64_arr(row)))),
                ])
            })),
        ),
    ])
}

pub fn coeff_file_json(f: &CoeffFile) -> String {
    obj(&[
        ("model", fmt_str(&f.model)),
        (
            "coeffs",
            arr(f.coeffs.iter().map(|b| {
                obj(&[
                    ("ell", b.ell.to_string()),
                    ("re", f64_arr(&b.re)),
                    ("im", f64_arr(&b.im)),
                ])
            })),
        ),
    ])
}

pub fn decision_str(d: Decision) -> &'static str {
    match d {
        Decision::Member => "member",
        Decision::NonMember => "non_member",
        Decision::Inconclusive => "inconclusive",
    }
}

fn class_str(v: &MembershipVerdict) -> &'static str {
    use crate::classify::ClassTag::*;
    match v.class_tag {
        Smooth => "smooth",
        Roumieu => "roumieu",
        Beurling => "beurling",
        DualRoumieu => "dual_roumieu",
        DualBeurling => "dual_beurling",
    }
}

fn fitted_json(f: &FittedConstants) -> String {
    match f {
        FittedConstants::Smooth { log_c_per_n, window_slope, offending_n } => obj(&[
            ("kind", fmt_str("smooth")),
            (
                "log_c_per_n",
                arr(log_c_per_n.iter().map(|&(n, c)| {
                    obj(&[("n", fmt_f64(n)), ("log_c", fmt_opt_f64(c))])
                })),
            ),
            ("window_slope", fmt_opt_f64(*window_slope)),
            ("offending_n", fmt_opt_f64(*offending_n)),
        ]),
        FittedConstants::Roumieu { l_star, log_c, window_slope } => obj(&[
            ("kind", fmt_str("roumieu")),
            ("l_star", fmt_opt_f64(*l_star)),
            ("log_c", fmt_opt_f64(*log_c)),
            ("window_slope", fmt_opt_f64(*window_slope)),
        ]),
        FittedConstants::Beurling { log_c_per_l, window_slope } => obj(&[
            ("kind", fmt_str("beurling")),
            (
                "log_c_per_l",
                arr(log_c_per_l.iter().map(|&(l, c)| {
                    obj(&[("l", fmt_f64(l)), ("log_c", fmt_opt_f64(c))])
                })),
            ),
            ("window_slope", fmt_opt_f64(*window_slope)),
        ]),
        FittedConstants::Dual { log_k_per_l, l, window_max_u } => obj(&[
            ("kind", fmt_str("dual")),
            (
                "log_k_per_l",
                arr(log_k_per_l.iter().map(|&(l, k)| {
                    obj(&[("l", fmt_f64(l)), ("log_k", fmt_opt_f64(k))])
                })),
            ),
            ("l", fmt_opt_f64(*l)),
            ("window_max_u", fmt_opt_f64(*window_max_u)),
        ]),
    }
}

fn diag_points_json(points: &[DiagnosticPoint]) -> String {
    arr(points.iter().map(|p| {
        obj(&[
            ("ell", p.ell.to_string()),
            ("lambda", fmt_f64(p.lambda)),
            ("value", fmt_f64(p.value)),
        ])
    }))
}

pub fn membership_json(v: &MembershipVerdict) -> String {
    obj(&[
        ("class", fmt_str(class_str(v))),
        ("decision", fmt_str(decision_str(v.decision))),
        ("fitted", fitted_json(&v.fitted)),
        ("diagnostic", diag_points_json(&v.diagnostic)),
        ("truncation", v.truncation.to_string()),
    ])
}

pub fn membership_csv(v: &MembershipVerdict) -> String {
    let mut out = String::from("ell,lambda,value\n");
    for p in &v.diagnostic {
        out.push_str(&format!("{},{},{}\n", p.ell, fmt_f64(p.lambda), fmt_f64(p.value)));
    }
    out
}

pub fn hypo_decision_str(d: HypoDecision) -> &'static str {
    match d {
        HypoDecision::Holds => "holds",
        HypoDecision::Fails => "fails",
        HypoDecision::Inconclusive => "inconclusive",
    }
}

fn condition_str(t: ConditionTag) -> &'static str {
    match t {
        ConditionTag::Roumieu31 => "roumieu_3_1",
        ConditionTag::Beurling41 => "beurling_4_1",
        ConditionTag::SmoothRemark => "smooth_remark",
    }
}

fn grid_rows_json(rows: &[GridRow]) -> String {
    arr(rows.iter().map(|r| {
        obj(&[
            ("level", fmt_f64(r.level)),
            ("satisfied_from", fmt_opt_usize(r.satisfied_from)),
            ("violations", r.violations.to_string()),
        ])
    }))
}

fn witness_json(w: &Witness) -> String {
    match w {
        Witness::None => obj(&[("kind", fmt_str("none"))]),
        Witness::Violations { level, indices, margins } => obj(&[
            ("kind", fmt_str("violations")),
            ("level", fmt_f64(*level)),
            ("indices", arr(indices.iter().map(|i| i.to_string()))),
            ("margins", arr(margins.iter().map(|&m| fmt_opt_f64(m)))),
        ]),
        Witness::EpsTable { rows } => {
            obj(&[("kind", fmt_str("eps_table")), ("rows", grid_rows_json(rows))])
        }
        Witness::BeurlingFit { log_k, r, c } => obj(&[
            ("kind", fmt_str("beurling_fit")),
            ("log_k", fmt_f64(*log_k)),
            ("r", fmt_f64(*r)),
            ("c", c.to_string()),
        ]),
        Witness::SmoothFit { log_l, exponent, r_index, slope } => obj(&[
            ("kind", fmt_str("smooth_fit")),
            ("log_l", fmt_f64(*log_l)),
            ("exponent", fmt_f64(*exponent)),
            ("r_index", r_index.to_string()),
            ("slope", fmt_f64(*slope)),
        ]),
    }
}

fn hypo_points_json(points: &[HypoPoint]) -> String {
    arr(points.iter().map(|p| {
        obj(&[
            ("ell", p.ell.to_string()),
            ("lambda", fmt_f64(p.lambda)),
            ("m", fmt_f64(p.m)),
            ("e", fmt_opt_f64(p.e)),
        ])
    }))
}

pub fn hypo_json(v: &HypoVerdict) -> String {
    obj(&[
        ("condition", fmt_str(condition_str(v.condition_tag))),
        ("decision", fmt_str(hypo_decision_str(v.decision))),
        ("witness", witness_json(&v.witness)),
        ("diagnostic", hypo_points_json(&v.diagnostic)),
        ("truncation", v.truncation.to_string()),
    ])
}

pub fn hypo_csv(v: &HypoVerdict) -> String {
    let mut out = String::from("ell,lambda,m,e\n");
    for p in &v.diagnostic {
        let e = match p.e {
            Some(e) => fmt_f64(e),
            None => String::new(),
        };
        out.push_str(&format!("{},{},{},{}\n", p.ell, fmt_f64(p.lambda), fmt_f64(p.m), e));
    }
    out
}

pub fn implication_json(r: &ImplicationReport) -> String {
    obj(&[
        ("smooth", hypo_json(&r.smooth)),
        ("roumieu", hypo_json(&r.roumieu)),
        ("contradiction", r.contradiction.to_string()),
        (
            "pointwise",
            arr(r.pointwise.iter().map(|row| {
                obj(&[
                    ("eps", fmt_f64(row.eps)),
                    ("satisfied_from", fmt_opt_usize(row.satisfied_from)),
                    ("min_margin", fmt_f64(row.min_margin)),
                ])
            })),
        ),
    ])
}

pub fn axiom_report_json(r: &AxiomReport) -> String {
    let check = |c: &crate::weights::AxiomCheck| {
        obj(&[
            ("passed", c.passed.to_string()),
            ("first_violation", fmt_opt_usize(c.first_violation)),
        ])
    };
    let fit = |f: &crate::weights::ConstantFit| {
        obj(&[
            ("fits", f.fits.to_string()),
            ("min_log_a", fmt_f64(f.min_log_a)),
            ("argmax_k", f.argmax_k.to_string()),
        ])
    };
    obj(&[
        ("m0", check(&r.m0)),
        ("m1", fit(&r.m1)),
        ("m2", fit(&r.m2)),
        ("m3", check(&r.m3)),
        ("prefix_len", r.prefix_len.to_string()),
        ("h", fmt_f64(r.h)),
    ])
}

pub fn constants_json(c: &AxiomConstants) -> String {
    obj(&[
        ("log_a", fmt_f64(c.log_a)),
        ("a", fmt_f64(c.a())),
        ("h", fmt_f64(c.h)),
        ("valid_up_to", c.valid_up_to.to_string()),
    ])
}

pub fn doubling_json(r: &DoublingReport) -> String {
    obj(&[
        ("max_violation", fmt_f64(r.max_violation)),
        ("worst_r", fmt_f64(r.worst_r)),
        ("lemma_residual_max", fmt_opt_f64(r.lemma_residual_max)),
        (
            "per_point",
            arr(r.per_point.iter().map(|&(rho, v)| {
                obj(&[("r", fmt_f64(rho)), ("violation", fmt_f64(v))])
            })),
        ),
    ])
}

/// Rows of an associated-function evaluation table.
pub fn assoc_table_json(rows: &[(f64, f64)]) -> String {
    obj(&[(
        "rows",
        arr(rows.iter().map(|&(r, m)| obj(&[("r", fmt_f64(r)), ("m", fmt_f64(m))]))),
    )])
}

pub fn assoc_table_csv(rows: &[(f64, f64)]) -> String {
    let mut out = String::from("r,m\n");
    for &(r, m) in rows {
        out.push_str(&format!("{},{}\n", fmt_f64(r), fmt_f64(m)));
    }
    out
}

pub fn epower_json(f: &EpowerFit) -> String {
    obj(&[
        ("h", fmt_f64(f.h)),
        ("log_c", fmt_opt_f64(f.log_c)),
        (
            "log_norms",
            arr(f.log_norms.iter().map(|&(k, v)| {
                obj(&[("k", k.to_string()), ("log_norm", fmt_opt_f64(v))])
            })),
        ),
    ])
}

fn flavor_str(f: Flavor) -> &'static str {
    match f {
        Flavor::Roumieu => "roumieu",
        Flavor::Beurling => "beurling",
    }
}

fn driver_json(d: &Driver) -> String {
    match d {
        Driver::Eps0 { eps0 } => {
            obj(&[("kind", fmt_str("eps0")), ("eps0", fmt_f64(*eps0))])
        }
        Driver::Schedule { picks } => obj(&[
            ("kind", fmt_str("schedule")),
            (
                "picks",
                arr(picks.iter().map(|&(k, ell)| format!("[{k},{ell}]"))),
            ),
        ]),
    }
}

pub fn manifest_json(m: &BundleManifest) -> String {
    obj(&[
        ("flavor", fmt_str(flavor_str(m.flavor))),
        ("driver", driver_json(&m.driver)),
        ("subsequence", arr(m.subsequence.iter().map(|i| i.to_string()))),
        (
            "log_norms",
            arr(m.log_norms.iter().map(|n| {
                obj(&[
                    ("ell", n.ell.to_string()),
                    ("log_u_norm", fmt_f64(n.log_u_norm)),
                    ("log_pu_norm", fmt_opt_f64(n.log_pu_norm)),
                ])
            })),
        ),
        ("contract_passed", m.contract_passed.to_string()),
    ])
}

pub fn contract_json(c: &ContractReport) -> String {
    obj(&[
        ("dual_membership", membership_json(&c.dual_membership)),
        ("smooth_membership", membership_json(&c.smooth_membership)),
        ("pu_membership", membership_json(&c.pu_membership)),
        ("pu_log_c_at_eps0", fmt_opt_f64(c.pu_log_c_at_eps0)),
        ("passed", c.passed.to_string()),
    ])
}

pub fn bundle_verification_json(v: &BundleVerification) -> String {
    let matches = match v.pu_matches_symbol {
        Some(b) => b.to_string(),
        None => "null".into(),
    };
    obj(&[
        ("sparsity_ok", v.sparsity_ok.to_string()),
        ("unit_norms_ok", v.unit_norms_ok.to_string()),
        ("pu_matches_symbol", matches),
        ("contract", contract_json(&v.contract)),
        ("passed", v.passed.to_string()),
    ])
}

/// Wraps a report body with the standard envelope fields.
pub fn envelope(
    toolkit_version: &str,
    config_hash: &str,
    lmax: usize,
    command: &str,
    report: String,
) -> String {
    obj(&[
        ("toolkit_version", fmt_str(toolkit_version)),
        ("config_hash", fmt_str(config_hash)),
        ("lmax", lmax.to_string()),
        ("command", fmt_str(command)),
        ("report", report),
    ])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn float_format_roundtrips_exactly() {
        for &x in &[0.0, 1.0, -1.5, 0.1, 1e-300, 123456.789, f64::MIN_POSITIVE] {
            let s = fmt_f64(x);
            let back: f64 = s.parse().unwrap();
            assert_eq!(back.to_bits(), x.to_bits(), "roundtrip failed for {x} -> {s}");
        }
        assert_eq!(fmt_f64(f64::NAN), "null");
        assert_eq!(fmt_f64(f64::INFINITY), "null");
    }

    #[test]
    fn strings_are_escaped() {
        assert_eq!(fmt_str("a\"b\\c"), r#""a\"b\\c""#);
        assert_eq!(fmt_str("line\nbreak"), r#""line\nbreak""#);
    }

    #[test]
    fn envelope_is_valid_json() {
        let e = envelope("0.1.0", "abc", 16, "test", obj(&[("x", fmt_f64(1.0))]));
        let v: serde_json::Value = serde_json::from_str(&e).unwrap();
        assert_eq!(v["lmax"], 16);
        assert_eq!(v["report"]["x"], 1.0);
    }
}
