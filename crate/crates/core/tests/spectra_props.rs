//! Lattice-count oracle checks for the built-in torus ladders.

use ultrahypo::spectra::{sphere_laplacian, torus_laplacian};

/// Independent representation count: nested loops over the cube, no
/// histogram sharing with the implementation.
fn count_representations(n: u32, m: i64) -> usize {
    let s = (m as f64).sqrt() as i64 + 1;
    let mut count = 0usize;
    match n {
        1 => {
            for x in -s..=s {
                if x * x == m {
                    count += 1;
                }
            }
        }
        2 => {
            for x in -s..=s {
                for y in -s..=s {
                    if x * x + y * y == m {
                        count += 1;
                    }
                }
            }
        }
        3 => {
            for x in -s..=s {
                for y in -s..=s {
                    for z in -s..=s {
                        if x * x + y * y + z * z == m {
                            count += 1;
                        }
                    }
                }
            }
        }
        _ => unreachable!(),
    }
    count
}

#[test]
fn torus_multiplicities_match_brute_force() {
    for &n in &[1u32, 2, 3] {
        let model = torus_laplacian(n, 48).unwrap();
        for rung in &model.ladder {
            let m = rung.lambda as i64;
            assert_eq!(
                rung.mult,
                count_representations(n, m),
                "multiplicity mismatch at n={n}, lambda={m}"
            );
        }
        // Every integer skipped between consecutive rungs has no representation.
        for pair in model.ladder.windows(2) {
            for m in (pair[0].lambda as i64 + 1)..(pair[1].lambda as i64) {
                assert_eq!(count_representations(n, m), 0, "missed eigenvalue {m} on torus{n}");
            }
        }
    }
}

#[test]
fn torus1_multiplicities_are_one_then_twos() {
    let model = torus_laplacian(1, 64).unwrap();
    assert_eq!(model.ladder[0].mult, 1);
    assert!(model.ladder[1..].iter().all(|r| r.mult == 2));
}

#[test]
fn ladders_strictly_increase_from_zero() {
    let models = [
        torus_laplacian(1, 100).unwrap(),
        torus_laplacian(2, 100).unwrap(),
        torus_laplacian(3, 100).unwrap(),
        sphere_laplacian(100).unwrap(),
    ];
    for model in &models {
        assert_eq!(model.ladder[0].lambda, 0.0);
        for pair in model.ladder.windows(2) {
            assert!(pair[0].lambda < pair[1].lambda);
        }
        assert!(model.ladder.iter().all(|r| r.mult >= 1));
    }
}
