//! Sampling, homogeneity, and unitary-invariance checks for `m(σ)`.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use ultrahypo::spectra::{self, SpectralModel};
use ultrahypo::symbols::{inverse_norm_identity_check, m_sigma, SymbolSequence};
use ultrahypo::C64;

fn single_block_model(d: usize) -> Arc<SpectralModel> {
    Arc::new(
        SpectralModel::from_ladder(
            "probe",
            2,
            vec![
                spectra::Rung { lambda: 0.0, mult: 1 },
                spectra::Rung { lambda: 1.0, mult: d },
            ],
        )
        .unwrap(),
    )
}

fn wrap_block(block: DMatrix<C64>) -> (SymbolSequence, usize) {
    let d = block.nrows();
    let model = single_block_model(d);
    let ground = DMatrix::from_element(1, 1, C64::new(1.0, 0.0));
    (SymbolSequence::new(model, vec![ground, block], None).unwrap(), 1)
}

fn random_gaussian(rng: &mut ChaCha8Rng, d: usize) -> DMatrix<C64> {
    DMatrix::from_fn(d, d, |_, _| {
        C64::new(rng.sample(rand_distr::StandardNormal), rng.sample(rand_distr::StandardNormal))
    })
}

fn random_unitary(rng: &mut ChaCha8Rng, d: usize) -> DMatrix<C64> {
    random_gaussian(rng, d).qr().q()
}

/// U diag(s) V^H with prescribed singular values.
fn with_singular_values(rng: &mut ChaCha8Rng, sv: &[f64]) -> DMatrix<C64> {
    let d = sv.len();
    let u = random_unitary(rng, d);
    let v = random_unitary(rng, d);
    let diag = DMatrix::from_fn(d, d, |i, j| {
        if i == j {
            C64::new(sv[i], 0.0)
        } else {
            C64::new(0.0, 0.0)
        }
    });
    &u * diag * v.adjoint()
}

fn random_unit_vector(rng: &mut ChaCha8Rng, d: usize) -> DVector<C64> {
    loop {
        let v = DVector::from_fn(d, |_, _| {
            C64::new(
                rng.sample(rand_distr::StandardNormal),
                rng.sample(rand_distr::StandardNormal),
            )
        });
        let n = v.norm();
        if n > 1e-6 {
            return v / C64::new(n, 0.0);
        }
    }
}

#[test]
fn sampled_minimum_is_one_sided_and_converges() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for d in 1..=4usize {
        let sv: Vec<f64> = (0..d).map(|i| 0.5 + 1.5 * (i as f64) / (d.max(2) - 1) as f64).collect();
        let block = with_singular_values(&mut rng, &sv);
        let (seq, ell) = wrap_block(block.clone());
        let m = m_sigma(&seq, ell).unwrap().m_value;

        let mut best_small = f64::INFINITY;
        let mut best_large = f64::INFINITY;
        for i in 0..10_000 {
            let v = random_unit_vector(&mut rng, d);
            let val = (&block * v).norm();
            if i < 1_000 {
                best_small = best_small.min(val);
            }
            best_large = best_large.min(val);
        }
        assert!(best_large >= m - 1e-9, "sampled below m at d={d}");
        assert!(best_large <= best_small + 1e-12, "no convergence at d={d}");
    }
}

#[test]
fn inverse_identity_on_random_well_conditioned_blocks() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for trial in 0..40 {
        let d = 2 + (trial % 7);
        let sv: Vec<f64> = (0..d).map(|_| rng.gen_range(0.5..2.0)).collect();
        let block = with_singular_values(&mut rng, &sv);
        let (seq, ell) = wrap_block(block);
        let residual = inverse_norm_identity_check(&seq, ell).unwrap();
        assert!(residual <= 1e-9, "residual {residual} at trial {trial}");
    }
}

#[test]
fn unitary_invariance_of_m() {
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    for d in 2..=6usize {
        let block = random_gaussian(&mut rng, d);
        let (seq, ell) = wrap_block(block.clone());
        let m = m_sigma(&seq, ell).unwrap().m_value;

        let u = random_unitary(&mut rng, d);
        let v = random_unitary(&mut rng, d);
        let rotated = &u * &block * &v;
        let (seq_rot, ell_rot) = wrap_block(rotated);
        let m_rot = m_sigma(&seq_rot, ell_rot).unwrap().m_value;
        assert!(
            (m - m_rot).abs() <= 1e-9 * m.max(1.0),
            "unitary invariance broken at d={d}: {m} vs {m_rot}"
        );
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn homogeneity_under_complex_scaling(
        seed in 0u64..1000,
        d in 1usize..5,
        c_re in -3.0f64..3.0,
        c_im in -3.0f64..3.0,
    ) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let block = random_gaussian(&mut rng, d);
        let c = C64::new(c_re, c_im);
        let scaled = block.map(|z| z * c);

        let (seq, ell) = wrap_block(block);
        let (seq_scaled, ell_scaled) = wrap_block(scaled);
        let m = m_sigma(&seq, ell).unwrap().m_value;
        let m_scaled = m_sigma(&seq_scaled, ell_scaled).unwrap().m_value;
        let expected = c.norm() * m;
        prop_assert!(
            (m_scaled - expected).abs() <= 1e-9 * expected.max(1.0),
            "m(c sigma) = {m_scaled}, |c| m(sigma) = {expected}"
        );
    }

    #[test]
    fn minimizer_achieves_m(seed in 0u64..1000, d in 1usize..6) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(31));
        let block = random_gaussian(&mut rng, d);
        let (seq, ell) = wrap_block(block.clone());
        let bound = m_sigma(&seq, ell).unwrap();
        prop_assert!((bound.minimizer.norm() - 1.0).abs() <= 1e-9);
        let achieved = (&block * &bound.minimizer).norm();
        prop_assert!((achieved - bound.m_value).abs() <= 1e-9 * bound.m_value.max(1.0));
    }
}
