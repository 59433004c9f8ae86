//! Dense numeric primitives shared by every module: stable log-sum-exp,
//! equicorrelated Gaussian sampling, column standardization, central-difference
//! gradients, a small SPD solver, and seeded random streams.

use ndarray::{Array1, Array2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A reproducible random stream keyed by `(seed, stream_id)`.
///
/// Identical keys yield bit-identical sequences; distinct stream ids on the
/// same seed yield statistically independent sequences (ChaCha streams), so
/// replications and hyperparameter draws can run concurrently without
/// sharing state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RngStream {
    pub seed: u64,
    pub stream_id: u64,
}

impl RngStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        Self { seed, stream_id }
    }

    /// Instantiate the generator for this stream.
    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream_id);
        rng
    }

    /// Derive a child stream. Children of distinct `(stream_id, k)` pairs are
    /// distinct as long as nesting stays below eight levels and `k < 255`,
    /// which covers every use in this crate.
    pub fn child(&self, k: u64) -> Self {
        Self {
            seed: self.seed,
            stream_id: self.stream_id.wrapping_mul(256).wrapping_add(k + 1),
        }
    }
}

/// log Σ exp(v_i) computed with a max shift so that entries within ±1e6 do
/// not overflow.
pub fn logsumexp(v: &[f64]) -> Result<f64> {
    if v.is_empty() {
        return Err(Error::InvalidArgument("logsumexp of empty vector".into()));
    }
    let m = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if !m.is_finite() {
        return Err(Error::InvalidArgument(
            "logsumexp requires finite entries".into(),
        ));
    }
    let s: f64 = v.iter().map(|&x| (x - m).exp()).sum();
    Ok(m + s.ln())
}

/// Draw an `n × p` matrix whose rows are i.i.d. N(0, σ²[(1−ρ)I + ρ11ᵀ]),
/// realized as x_ij = σ(√ρ·g_i + √(1−ρ)·z_ij) with a shared per-row factor.
pub fn sample_equicorrelated(
    n: usize,
    p: usize,
    rho: f64,
    sigma: f64,
    stream: RngStream,
) -> Result<Array2<f64>> {
    if !(0.0..1.0).contains(&rho) {
        return Err(Error::InvalidArgument(format!(
            "rho must lie in [0,1), got {rho}"
        )));
    }
    if sigma <= 0.0 {
        return Err(Error::InvalidArgument(format!(
            "sigma must be positive, got {sigma}"
        )));
    }
    let mut rng = stream.rng();
    let sq_rho = rho.sqrt();
    let sq_ind = (1.0 - rho).sqrt();
    let mut x = Array2::zeros((n, p));
    for i in 0..n {
        let g: f64 = rng.sample(rand_distr::StandardNormal);
        for j in 0..p {
            let z: f64 = rng.sample(rand_distr::StandardNormal);
            x[[i, j]] = sigma * (sq_rho * g + sq_ind * z);
        }
    }
    Ok(x)
}

/// Center and scale each column to mean 0, sd 1 (population sd). Columns with
/// zero variance are centered and their sd reported as 1 so that
/// un-standardizing recovers the input.
pub fn standardize_columns(x: &Array2<f64>) -> (Array2<f64>, Vec<f64>, Vec<f64>) {
    let (n, p) = x.dim();
    let mut out = x.clone();
    let mut means = vec![0.0; p];
    let mut sds = vec![1.0; p];
    for j in 0..p {
        let col = x.column(j);
        let mean = col.sum() / n as f64;
        let var = col.iter().map(|&v| (v - mean) * (v - mean)).sum::<f64>() / n as f64;
        let sd = if var > 0.0 { var.sqrt() } else { 1.0 };
        means[j] = mean;
        sds[j] = sd;
        for i in 0..n {
            out[[i, j]] = (x[[i, j]] - mean) / sd;
        }
    }
    (out, means, sds)
}

/// Apply stored standardization parameters to new rows.
pub fn apply_standardization(x: &Array2<f64>, means: &[f64], sds: &[f64]) -> Array2<f64> {
    let (n, p) = x.dim();
    assert_eq!(p, means.len());
    let mut out = x.clone();
    for j in 0..p {
        for i in 0..n {
            out[[i, j]] = (x[[i, j]] - means[j]) / sds[j];
        }
    }
    out
}

/// Central finite differences (f(x+h·e_i) − f(x−h·e_i)) / (2h) per coordinate.
pub fn finite_diff_grad<F>(mut f: F, x: &Array1<f64>, h: f64) -> Result<Array1<f64>>
where
    F: FnMut(&Array1<f64>) -> f64,
{
    if h <= 0.0 {
        return Err(Error::InvalidArgument("finite-diff step must be > 0".into()));
    }
    let mut grad = Array1::zeros(x.len());
    let mut xp = x.clone();
    for i in 0..x.len() {
        xp[i] = x[i] + h;
        let fp = f(&xp);
        xp[i] = x[i] - h;
        let fm = f(&xp);
        xp[i] = x[i];
        if !fp.is_finite() || !fm.is_finite() {
            return Err(Error::Evaluation(format!(
                "non-finite function value near coordinate {i}"
            )));
        }
        grad[i] = (fp - fm) / (2.0 * h);
    }
    Ok(grad)
}

/// Solve A x = b for symmetric positive-definite A via Cholesky. Falls back
/// to a scaled ridge when the factorization stalls on a near-singular matrix.
pub fn solve_spd(a: &Array2<f64>, b: &Array1<f64>) -> Result<Array1<f64>> {
    let n = a.nrows();
    if a.ncols() != n || b.len() != n {
        return Err(Error::InvalidArgument("solve_spd shape mismatch".into()));
    }
    if let Some(x) = cholesky_solve(a, b) {
        return Ok(x);
    }
    let trace: f64 = (0..n).map(|i| a[[i, i]]).sum();
    let mut ridge = 1e-12 * trace.max(1.0);
    for _ in 0..8 {
        let mut ar = a.clone();
        for i in 0..n {
            ar[[i, i]] += ridge;
        }
        if let Some(x) = cholesky_solve(&ar, b) {
            return Ok(x);
        }
        ridge *= 100.0;
    }
    Err(Error::Evaluation(
        "SPD solve failed even with ridge regularization".into(),
    ))
}

fn cholesky_solve(a: &Array2<f64>, b: &Array1<f64>) -> Option<Array1<f64>> {
    let n = a.nrows();
    let mut l = Array2::<f64>::zeros((n, n));
    for i in 0..n {
        for j in 0..=i {
            let mut s = a[[i, j]];
            for k in 0..j {
                s -= l[[i, k]] * l[[j, k]];
            }
            if i == j {
                if s <= 0.0 || !s.is_finite() {
                    return None;
                }
                l[[i, i]] = s.sqrt();
            } else {
                l[[i, j]] = s / l[[j, j]];
            }
        }
    }
    // forward then back substitution
    let mut y = Array1::<f64>::zeros(n);
    for i in 0..n {
        let mut s = b[i];
        for k in 0..i {
            s -= l[[i, k]] * y[k];
        }
        y[i] = s / l[[i, i]];
    }
    let mut x = Array1::<f64>::zeros(n);
    for i in (0..n).rev() {
        let mut s = y[i];
        for k in i + 1..n {
            s -= l[[k, i]] * x[k];
        }
        x[i] = s / l[[i, i]];
    }
    Some(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn logsumexp_two_equal_entries() {
        let v = vec![0.0, 0.0];
        assert!((logsumexp(&v).unwrap() - 2.0_f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn logsumexp_single_entry_identity() {
        for c in [-1e6, -3.5, 0.0, 2.0, 1e6] {
            assert_eq!(logsumexp(&[c]).unwrap(), c);
        }
    }

    #[test]
    fn logsumexp_empty_errors() {
        assert!(matches!(
            logsumexp(&[]),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn logsumexp_matches_naive_at_small_magnitudes() {
        let mut rng = RngStream::new(7, 0).rng();
        let v: Vec<f64> = (0..100).map(|_| rng.random_range(-3.0..3.0)).collect();
        let naive = v.iter().map(|&x| x.exp()).sum::<f64>().ln();
        let got = logsumexp(&v).unwrap();
        assert!(((got - naive) / naive).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn logsumexp_shift_invariance(
            v in proptest::collection::vec(-50.0..50.0f64, 1..40),
            c in -100.0..100.0f64,
        ) {
            let base = logsumexp(&v).unwrap();
            let shifted: Vec<f64> = v.iter().map(|&x| x + c).collect();
            let got = logsumexp(&shifted).unwrap();
            prop_assert!((got - (base + c)).abs() < 1e-12 * (1.0 + base.abs() + c.abs()));
        }
    }

    #[test]
    fn equicorrelated_independence_case() {
        let x = sample_equicorrelated(10_000, 3, 0.0, 1.0, RngStream::new(11, 0)).unwrap();
        let (xs, _, _) = standardize_columns(&x);
        for a in 0..3 {
            for b in (a + 1)..3 {
                let corr = xs.column(a).dot(&xs.column(b)) / 10_000.0;
                assert!(corr.abs() < 0.05, "corr({a},{b}) = {corr}");
            }
        }
    }

    #[test]
    fn equicorrelated_target_correlation() {
        let n = 20_000;
        let x = sample_equicorrelated(n, 5, 0.3, 1.0, RngStream::new(12, 0)).unwrap();
        let (xs, _, sds) = standardize_columns(&x);
        for a in 0..5 {
            // column variance ≈ sigma² within ±5%
            assert!((sds[a] * sds[a] - 1.0).abs() < 0.05, "var = {}", sds[a] * sds[a]);
            for b in (a + 1)..5 {
                let corr = xs.column(a).dot(&xs.column(b)) / n as f64;
                assert!((corr - 0.3).abs() < 0.05, "corr({a},{b}) = {corr}");
            }
        }
    }

    #[test]
    fn equicorrelated_reproducible() {
        let a = sample_equicorrelated(50, 4, 0.5, 2.0, RngStream::new(3, 9)).unwrap();
        let b = sample_equicorrelated(50, 4, 0.5, 2.0, RngStream::new(3, 9)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn equicorrelated_rejects_bad_rho() {
        assert!(sample_equicorrelated(5, 2, 1.0, 1.0, RngStream::new(0, 0)).is_err());
        assert!(sample_equicorrelated(5, 2, -0.1, 1.0, RngStream::new(0, 0)).is_err());
        assert!(sample_equicorrelated(5, 2, 0.3, 0.0, RngStream::new(0, 0)).is_err());
    }

    #[test]
    fn standardize_constant_column() {
        let x = Array2::from_shape_fn((4, 1), |_| 3.0);
        let (xs, means, sds) = standardize_columns(&x);
        assert_eq!(means[0], 3.0);
        assert_eq!(sds[0], 1.0);
        assert!(xs.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn standardize_is_idempotent() {
        let x = sample_equicorrelated(200, 3, 0.2, 1.5, RngStream::new(4, 0)).unwrap();
        let (xs, _, _) = standardize_columns(&x);
        let (xss, means, sds) = standardize_columns(&xs);
        for j in 0..3 {
            assert!(means[j].abs() < 1e-12);
            assert!((sds[j] - 1.0).abs() < 1e-12);
        }
        for (a, b) in xs.iter().zip(xss.iter()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn standardize_output_is_standard() {
        let x = sample_equicorrelated(500, 4, 0.4, 0.7, RngStream::new(5, 1)).unwrap();
        let (xs, _, _) = standardize_columns(&x);
        let n = 500.0;
        for j in 0..4 {
            let mean = xs.column(j).sum() / n;
            let var = xs.column(j).iter().map(|&v| (v - mean) * (v - mean)).sum::<f64>() / n;
            assert!(mean.abs() < 1e-10);
            assert!((var - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn standardize_round_trips() {
        let x = sample_equicorrelated(100, 3, 0.1, 2.0, RngStream::new(6, 0)).unwrap();
        let (xs, means, sds) = standardize_columns(&x);
        for i in 0..100 {
            for j in 0..3 {
                let back = xs[[i, j]] * sds[j] + means[j];
                assert!((back - x[[i, j]]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn finite_diff_on_quadratic() {
        let f = |x: &Array1<f64>| x.iter().map(|&v| v * v).sum::<f64>();
        let x = Array1::from(vec![1.0, 2.0]);
        let g = finite_diff_grad(f, &x, 1e-5).unwrap();
        assert!((g[0] - 2.0).abs() < 1e-8);
        assert!((g[1] - 4.0).abs() < 1e-8);
    }

    #[test]
    fn finite_diff_on_constant_is_zero() {
        let g = finite_diff_grad(|_| 4.2, &Array1::from(vec![0.5, -1.0, 3.0]), 1e-6).unwrap();
        assert!(g.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn finite_diff_reports_non_finite() {
        let f = |x: &Array1<f64>| if x[0] > 1.0 { f64::NAN } else { x[0] };
        assert!(finite_diff_grad(f, &Array1::from(vec![1.0]), 1e-3).is_err());
    }

    #[test]
    fn spd_solver_recovers_solution() {
        let a = ndarray::arr2(&[[4.0, 1.0, 0.5], [1.0, 3.0, 0.2], [0.5, 0.2, 2.0]]);
        let x_true = Array1::from(vec![1.0, -2.0, 0.5]);
        let b = a.dot(&x_true);
        let x = solve_spd(&a, &b).unwrap();
        for i in 0..3 {
            assert!((x[i] - x_true[i]).abs() < 1e-10);
        }
    }

    #[test]
    fn distinct_streams_differ() {
        let a = sample_equicorrelated(10, 2, 0.0, 1.0, RngStream::new(1, 0)).unwrap();
        let b = sample_equicorrelated(10, 2, 0.0, 1.0, RngStream::new(1, 1)).unwrap();
        assert_ne!(a, b);
    }
}
