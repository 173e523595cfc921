//! Eigenvalue/multiplicity ladders of positive elliptic operators.
//!
//! A model is the ordered ladder `ℓ ↦ (λ_ℓ, d_ℓ)` of distinct eigenvalues
//! with their eigenspace dimensions; eigenfunctions are never materialized.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("torus dimension must be 1, 2 or 3, got {n}")]
    BadTorusDimension { n: u32 },
    #[error("ladder must hold at least one rung")]
    EmptyLadder,
    #[error("lambda_0 must be 0, got {lambda} at index 0")]
    NonzeroGroundEigenvalue { lambda: f64 },
    #[error("ladder not strictly increasing at index {ell}: lambda = {lambda}")]
    NonMonotoneLadder { ell: usize, lambda: f64 },
    #[error("multiplicity must be >= 1 at index {ell}")]
    ZeroMultiplicity { ell: usize },
    #[error("eigenvalue at index {ell} is not finite and nonnegative: {lambda}")]
    BadEigenvalue { ell: usize, lambda: f64 },
    #[error("order nu must be positive")]
    BadNu,
    #[error("failed to read model file: {0}")]
    Io(#[from] std::io::Error),
    #[error("failed to parse model file: {0}")]
    Parse(#[from] serde_json::Error),
}

/// One rung of the ladder: a distinct eigenvalue and its multiplicity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rung {
    pub lambda: f64,
    pub mult: usize,
}

/// Spectral model of a fixed positive elliptic operator of order ν,
/// represented purely by its ladder of distinct eigenvalues.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SpectralModel {
    pub name: String,
    pub nu: u32,
    pub ladder: Vec<Rung>,
}

impl SpectralModel {
    /// Validated construction from an explicit ladder.
    pub fn from_ladder(
        name: impl Into<String>,
        nu: u32,
        ladder: Vec<Rung>,
    ) -> Result<Self, ModelError> {
        let model = SpectralModel { name: name.into(), nu, ladder };
        model.validate()?;
        Ok(model)
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        if self.nu == 0 {
            return Err(ModelError::BadNu);
        }
        let first = self.ladder.first().ok_or(ModelError::EmptyLadder)?;
        if first.lambda != 0.0 {
            return Err(ModelError::NonzeroGroundEigenvalue { lambda: first.lambda });
        }
        let mut prev = f64::NEG_INFINITY;
        for (ell, rung) in self.ladder.iter().enumerate() {
            if !rung.lambda.is_finite() || rung.lambda < 0.0 {
                return Err(ModelError::BadEigenvalue { ell, lambda: rung.lambda });
            }
            if rung.lambda <= prev {
                return Err(ModelError::NonMonotoneLadder { ell, lambda: rung.lambda });
            }
            if rung.mult == 0 {
                return Err(ModelError::ZeroMultiplicity { ell });
            }
            prev = rung.lambda;
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.ladder.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ladder.is_empty()
    }

    pub fn lambda(&self, ell: usize) -> f64 {
        self.ladder[ell].lambda
    }

    pub fn mult(&self, ell: usize) -> usize {
        self.ladder[ell].mult
    }

    /// Copy of the model truncated to its first `l_max` rungs.
    pub fn truncated(&self, l_max: usize) -> SpectralModel {
        SpectralModel {
            name: self.name.clone(),
            nu: self.nu,
            ladder: self.ladder.iter().copied().take(l_max).collect(),
        }
    }
}

/// Laplacian ladder on the flat torus `T^n`, `n <= 3`, with `l_max` distinct
/// eigenvalues.
///
/// Order ν = 2; the distinct eigenvalues are the integers representable as a
/// sum of `n` squares and `d_ℓ` counts the lattice points `ξ ∈ Z^n` with
/// `|ξ|² = λ_ℓ`.
pub fn torus_laplacian(n: u32, l_max: usize) -> Result<SpectralModel, ModelError> {
    if !(1..=3).contains(&n) {
        return Err(ModelError::BadTorusDimension { n });
    }
    if l_max == 0 {
        return Err(ModelError::EmptyLadder);
    }
    let ladder = if n == 1 {
        let mut ladder = Vec::with_capacity(l_max);
        ladder.push(Rung { lambda: 0.0, mult: 1 });
        for m in 1..l_max as u64 {
            ladder.push(Rung { lambda: (m * m) as f64, mult: 2 });
        }
        ladder
    } else {
        let mut bound = (4 * l_max + 16) as i64;
        loop {
            let counts = lattice_counts(n, bound);
            let rungs: Vec<Rung> = counts
                .iter()
                .enumerate()
                .filter(|(_, &c)| c > 0)
                .map(|(m, &c)| Rung { lambda: m as f64, mult: c as usize })
                .take(l_max)
                .collect();
            if rungs.len() >= l_max {
                break rungs;
            }
            bound *= 2;
        }
    };
    SpectralModel::from_ladder(format!("torus{n}"), 2, ladder)
}

/// Counts lattice points of each squared norm up to `bound`.
fn lattice_counts(n: u32, bound: i64) -> Vec<u64> {
    let mut counts = vec![0u64; bound as usize + 1];
    let s = (bound as f64).sqrt() as i64 + 1;
    match n {
        2 => {
            for x in -s..=s {
                for y in -s..=s {
                    let q = x * x + y * y;
                    if q <= bound {
                        counts[q as usize] += 1;
                    }
                }
            }
        }
        3 => {
            for x in -s..=s {
                for y in -s..=s {
                    let q2 = x * x + y * y;
                    if q2 > bound {
                        continue;
                    }
                    for z in -s..=s {
                        let q = q2 + z * z;
                        if q <= bound {
                            counts[q as usize] += 1;
                        }
                    }
                }
            }
        }
        _ => unreachable!(),
    }
    counts
}

/// Laplace–Beltrami ladder on the 2-sphere: `λ_ℓ = ℓ(ℓ+1)`, `d_ℓ = 2ℓ+1`,
/// for `ℓ = 0..=l_max`.
pub fn sphere_laplacian(l_max: usize) -> Result<SpectralModel, ModelError> {
    if l_max == 0 {
        return Err(ModelError::EmptyLadder);
    }
    let ladder = (0..=l_max as u64)
        .map(|l| Rung { lambda: (l * (l + 1)) as f64, mult: (2 * l + 1) as usize })
        .collect();
    SpectralModel::from_ladder("sphere", 2, ladder)
}

/// Order-one ladder with `λ_ℓ = ℓ` and unit multiplicities; the simplest
/// model for exercising ν = 1 weight sequences.
pub fn linear_ladder(l_max: usize) -> SpectralModel {
    let ladder = (0..l_max as u64).map(|l| Rung { lambda: l as f64, mult: 1 }).collect();
    SpectralModel { name: "linear".into(), nu: 1, ladder }
}

/// Loads and validates a model from its JSON file form.
pub fn load_model(path: impl AsRef<std::path::Path>) -> Result<SpectralModel, ModelError> {
    let text = std::fs::read_to_string(path)?;
    let model: SpectralModel = serde_json::from_str(&text)?;
    model.validate()?;
    Ok(model)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn torus1_ladder_prefix() {
        let model = torus_laplacian(1, 5).unwrap();
        let got: Vec<(f64, usize)> =
            model.ladder.iter().map(|r| (r.lambda, r.mult)).collect();
        assert_eq!(got, vec![(0.0, 1), (1.0, 2), (4.0, 2), (9.0, 2), (16.0, 2)]);
    }

    #[test]
    fn torus2_ladder_prefix() {
        let model = torus_laplacian(2, 5).unwrap();
        let got: Vec<(f64, usize)> =
            model.ladder.iter().map(|r| (r.lambda, r.mult)).collect();
        assert_eq!(got, vec![(0.0, 1), (1.0, 4), (2.0, 4), (4.0, 4), (5.0, 8)]);
    }

    #[test]
    fn torus2_multiplicity_at_25() {
        let model = torus_laplacian(2, 64).unwrap();
        let rung = model.ladder.iter().find(|r| r.lambda == 25.0).unwrap();
        assert_eq!(rung.mult, 12);
    }

    #[test]
    fn sphere_closed_forms() {
        let model = sphere_laplacian(10).unwrap();
        assert_eq!(model.ladder[0], Rung { lambda: 0.0, mult: 1 });
        assert_eq!(model.ladder[3], Rung { lambda: 12.0, mult: 7 });
        let total: usize = model.ladder.iter().map(|r| r.mult).sum();
        assert_eq!(total, 121);
    }

    #[test]
    fn load_model_rejects_bad_ladders() {
        let dir = std::env::temp_dir();
        let dup = dir.join("ultrahypo_dup_lambda.json");
        std::fs::write(
            &dup,
            r#"{"name":"bad","nu":2,"ladder":[{"lambda":0.0,"mult":1},{"lambda":1.0,"mult":2},{"lambda":1.0,"mult":2}]}"#,
        )
        .unwrap();
        match load_model(&dup) {
            Err(ModelError::NonMonotoneLadder { ell: 2, .. }) => {}
            other => panic!("expected non-monotone error at index 2, got {other:?}"),
        }

        let zero_mult = dir.join("ultrahypo_zero_mult.json");
        std::fs::write(
            &zero_mult,
            r#"{"name":"bad","nu":2,"ladder":[{"lambda":0.0,"mult":1},{"lambda":1.0,"mult":0}]}"#,
        )
        .unwrap();
        assert!(matches!(load_model(&zero_mult), Err(ModelError::ZeroMultiplicity { ell: 1 })));

        let bad_ground = dir.join("ultrahypo_bad_ground.json");
        std::fs::write(
            &bad_ground,
            r#"{"name":"bad","nu":2,"ladder":[{"lambda":0.5,"mult":1}]}"#,
        )
        .unwrap();
        assert!(matches!(
            load_model(&bad_ground),
            Err(ModelError::NonzeroGroundEigenvalue { .. })
        ));
    }

    #[test]
    fn load_model_roundtrip() {
        let dir = std::env::temp_dir();
        let ok = dir.join("ultrahypo_ok_model.json");
        std::fs::write(
            &ok,
            r#"{"name":"three","nu":2,"ladder":[{"lambda":0.0,"mult":1},{"lambda":1.0,"mult":2},{"lambda":3.0,"mult":4}]}"#,
        )
        .unwrap();
        let model = load_model(&ok).unwrap();
        assert_eq!(model.len(), 3);
        assert_eq!(model.mult(2), 4);
    }
}
