//! Windowed trend helpers shared by the classifiers and hypoellipticity tests.
//!
//! Asymptotic conditions are decided from the trailing window of the computed
//! diagnostic, with documented thresholds: a least-squares slope below −0.05
//! counts as "trending to zero", within ±0.05 as "bounded", above +0.05 as
//! "growing".

/// Fraction of the computed points forming the trailing analysis window.
pub const WINDOW_FRACTION: f64 = 0.25;
/// Minimum number of points in the trailing window (or all, if fewer exist).
pub const WINDOW_MIN: usize = 8;
/// Slope threshold separating decay / bounded / growth.
pub const SLOPE_TOL: f64 = 0.05;
/// Eigenvalue burn-in: rungs with `λ < 1` are excluded from verdicts.
pub const BURN_IN_LAMBDA: f64 = 1.0;

/// Start index of the trailing window over `n` points.
pub fn window_start(n: usize) -> usize {
    if n == 0 {
        return 0;
    }
    let frac = ((n as f64) * WINDOW_FRACTION).ceil() as usize;
    let size = frac.max(WINDOW_MIN.min(n));
    n - size.min(n)
}

/// Eigenvalue level marking the trailing tail region of a ladder: the last
/// quarter of the computed range in log-eigenvalue scale (the scale all
/// trend regressions run on).
///
/// Sparse supports are compared against this level rather than a ladder
/// index, so a subsequence with widening gaps still counts as reaching the
/// tail. `None` when no rung clears the burn-in.
pub fn tail_lambda_threshold(model: &crate::spectra::SpectralModel) -> Option<f64> {
    let lambdas: Vec<f64> = model
        .ladder
        .iter()
        .map(|r| r.lambda)
        .filter(|&l| l >= BURN_IN_LAMBDA)
        .collect();
    let first = *lambdas.first()?;
    let last = *lambdas.last()?;
    let lo = first.ln();
    let hi = last.ln();
    if hi <= lo {
        return Some(first);
    }
    Some((lo + (1.0 - WINDOW_FRACTION) * (hi - lo)).exp())
}

/// Least-squares slope of `ys` against `xs`; `None` with fewer than two
/// points or a degenerate abscissa.
pub fn ls_slope(xs: &[f64], ys: &[f64]) -> Option<f64> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return None;
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for (&x, &y) in xs.iter().zip(ys) {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
    }
    if sxx <= 0.0 {
        return None;
    }
    Some(sxy / sxx)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn window_covers_tail() {
        assert_eq!(window_start(512), 384);
        assert_eq!(window_start(12), 4);
        assert_eq!(window_start(5), 0);
        assert_eq!(window_start(0), 0);
    }

    #[test]
    fn tail_threshold_sits_in_the_last_log_quarter() {
        let model = crate::spectra::torus_laplacian(1, 512).unwrap();
        let thr = tail_lambda_threshold(&model).unwrap();
        let last: f64 = 511.0 * 511.0;
        assert!(thr > 1.0 && thr < last);
        assert!((thr.ln() - 0.75 * last.ln()).abs() < 1e-12);
    }

    #[test]
    fn slope_of_line_is_exact() {
        let xs: Vec<f64> = (0..10).map(|i| i as f64).collect();
        let ys: Vec<f64> = xs.iter().map(|x| 3.0 * x - 1.0).collect();
        let slope = ls_slope(&xs, &ys).unwrap();
        assert!((slope - 3.0).abs() < 1e-12);
        assert!(ls_slope(&[1.0], &[2.0]).is_none());
        assert!(ls_slope(&[1.0, 1.0], &[2.0, 3.0]).is_none());
    }
}
