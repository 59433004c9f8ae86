//! Entropy-balancing weight solvers on a fixed representation matrix.
//!
//! The primal problem picks maximum-entropy unit weights subject to moment
//! constraints between treatment groups. Its dual is smooth and convex: for
//! the ATE each group `t` independently minimizes
//!
//! `L_t(λ) = log Σ_{T_i=t} exp(s_t⟨λ, Φ_i⟩) − s_t⟨λ, Φ̄⟩`
//!
//! with signs `s₀ = +1`, `s₁ = −1` and `Φ̄` the full-sample representation
//! mean; for the ATT a single dual reweights controls toward the unweighted
//! treated mean. Stationarity means the softmax-weighted group mean hits the
//! target, and the weights come out in softmax form. Diverging multipliers
//! are the dual signature of a target outside the convex hull of a group's
//! support, i.e. poor overlap, and are reported as a typed error.

use ndarray::{Array1, Array2, ArrayView1, ArrayView2, Axis};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{logsumexp, solve_spd};

/// Which average effect the weights are solved for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Estimand {
    Ate,
    Att,
}

impl Estimand {
    pub fn name(&self) -> &'static str {
        match self {
            Estimand::Ate => "ate",
            Estimand::Att => "att",
        }
    }
}

impl std::fmt::Display for Estimand {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// An entropy-balancing instance: representations, treatment indicator, and
/// the estimand that fixes the constraint set.
#[derive(Debug, Clone)]
pub struct BalanceProblem {
    pub phi: Array2<f64>,
    pub t: Vec<u8>,
    pub estimand: Estimand,
}

impl BalanceProblem {
    pub fn new(phi: Array2<f64>, t: Vec<u8>, estimand: Estimand) -> Result<Self> {
        if phi.nrows() != t.len() {
            return Err(Error::InvalidArgument(format!(
                "phi has {} rows but t has {} entries",
                phi.nrows(),
                t.len()
            )));
        }
        if phi.ncols() == 0 {
            return Err(Error::InvalidArgument("phi needs at least one column".into()));
        }
        if let Some(bad) = t.iter().find(|&&v| v > 1) {
            return Err(Error::InvalidArgument(format!(
                "treatment indicator must be 0/1, got {bad}"
            )));
        }
        if phi.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("phi contains non-finite entries".into()));
        }
        let n1 = t.iter().filter(|&&v| v == 1).count();
        if n1 == 0 || n1 == t.len() {
            return Err(Error::InvalidArgument(
                "both treatment groups must be nonempty".into(),
            ));
        }
        Ok(Self { phi, t, estimand })
    }

    pub fn n(&self) -> usize {
        self.t.len()
    }

    pub fn n_treated(&self) -> usize {
        self.t.iter().filter(|&&v| v == 1).count()
    }

    pub fn n_control(&self) -> usize {
        self.n() - self.n_treated()
    }
}

/// Solver knobs. The defaults are what every caller in this crate uses.
#[derive(Debug, Clone, Copy)]
pub struct SolverOptions {
    /// Stop when the max-abs dual gradient (standardized scale) drops below this.
    pub tol: f64,
    /// Iteration cap; hitting it without convergence reports poor overlap.
    pub max_iter: usize,
    /// Bound on ‖λ‖∞ in the standardized representation scale.
    pub lambda_cap: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            tol: 1e-8,
            max_iter: 500,
            lambda_cap: 50.0,
        }
    }
}

/// Dual multipliers and convergence diagnostics.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DualSolution {
    pub lambda0: Vec<f64>,
    pub lambda1: Vec<f64>,
    pub converged: bool,
    pub iterations: usize,
    /// Final max-abs gradient on the standardized scale.
    pub grad_norm: f64,
    /// Max-abs moment residual of the implied weights, original scale.
    pub constraint_violation: f64,
    /// Dual objective after each accepted step (both groups concatenated).
    #[serde(skip)]
    pub objective_trace: Vec<f64>,
}

/// Per-unit balancing weights. For the ATE each group's weights sum to one;
/// for the ATT the control weights sum to one and treated entries are fixed
/// at 1/N₁.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BalancingWeights {
    pub w: Vec<f64>,
    pub estimand: Estimand,
}

/// Value and gradient of one group's dual objective
/// `logsumexp(s·Φλ) − s⟨λ, target⟩` at the given multiplier.
pub fn group_dual_value_grad(
    phi: ArrayView2<f64>,
    target: ArrayView1<f64>,
    sign: f64,
    lambda: ArrayView1<f64>,
) -> (f64, Array1<f64>) {
    let z: Vec<f64> = phi
        .rows()
        .into_iter()
        .map(|row| sign * row.dot(&lambda))
        .collect();
    let lse = logsumexp(&z).expect("nonempty group");
    let value = lse - sign * lambda.dot(&target);
    let mut mean_w = Array1::<f64>::zeros(phi.ncols());
    for (i, row) in phi.rows().into_iter().enumerate() {
        let w = (z[i] - lse).exp();
        mean_w.scaled_add(w, &row);
    }
    let grad = (&mean_w - &target).mapv(|v| sign * v);
    (value, grad)
}

/// Softmax weights within one group from `z_i = s⟨λ, Φ_i⟩`.
fn softmax(z: &[f64]) -> Vec<f64> {
    let lse = logsumexp(z).expect("nonempty group");
    z.iter().map(|&v| (v - lse).exp()).collect()
}

/// Kept columns of the full sample, centered and scaled. Constant columns
/// give vacuous constraints and a singular dual Hessian, so they are
/// excluded and their multipliers reported as zero.
struct Standardized {
    phi: Array2<f64>,
    kept: Vec<usize>,
    sds: Vec<f64>,
}

fn standardize_for_solve(phi: &Array2<f64>) -> Standardized {
    let (n, p) = phi.dim();
    let mut kept = Vec::new();
    let mut means = Vec::new();
    let mut sds = Vec::new();
    for j in 0..p {
        let col = phi.column(j);
        let mean = col.sum() / n as f64;
        let var = col.iter().map(|&v| (v - mean) * (v - mean)).sum::<f64>() / n as f64;
        if var > 0.0 {
            kept.push(j);
            means.push(mean);
            sds.push(var.sqrt());
        }
    }
    let mut out = Array2::zeros((n, kept.len()));
    for (jj, &j) in kept.iter().enumerate() {
        for i in 0..n {
            out[[i, jj]] = (phi[[i, j]] - means[jj]) / sds[jj];
        }
    }
    Standardized { phi: out, kept, sds }
}

impl Standardized {
    /// Map a multiplier from the standardized scale back to original columns.
    fn lambda_to_original(&self, lambda: &Array1<f64>, p: usize) -> Vec<f64> {
        let mut out = vec![0.0; p];
        for (jj, &j) in self.kept.iter().enumerate() {
            out[j] = lambda[jj] / self.sds[jj];
        }
        out
    }
}

struct GroupSolve {
    lambda: Array1<f64>,
    iterations: usize,
    grad_norm: f64,
    trace: Vec<f64>,
}

impl GroupSolve {
    fn trivial(m: usize) -> Self {
        Self {
            lambda: Array1::zeros(m),
            iterations: 0,
            grad_norm: 0.0,
            trace: Vec::new(),
        }
    }
}

/// A solution whose weights collapse onto a single unit means the target sits
/// on the boundary of the group's convex hull: the dual infimum is approached
/// only as λ diverges, with the gradient vanishing along the way. Catch that
/// degenerate limit after nominal convergence.
fn check_not_degenerate(
    phi: ArrayView2<f64>,
    sign: f64,
    lambda: &Array1<f64>,
    group: &'static str,
) -> Result<()> {
    let z: Vec<f64> = phi
        .rows()
        .into_iter()
        .map(|row| sign * row.dot(lambda))
        .collect();
    let w = softmax(&z);
    let max_w = w.iter().fold(0.0f64, |a, &v| a.max(v));
    if w.len() > 1 && max_w >= 1.0 - 1e-7 {
        return Err(Error::InfeasibleOrPoorOverlap { group });
    }
    Ok(())
}

/// Newton (m ≤ 200) or gradient descent with backtracking on one group's dual.
fn solve_group(
    phi: ArrayView2<f64>,
    target: ArrayView1<f64>,
    sign: f64,
    group: &'static str,
    opts: &SolverOptions,
) -> Result<GroupSolve> {
    let m = phi.ncols();
    let use_newton = m <= 200;
    let mut lambda = Array1::<f64>::zeros(m);
    let (mut value, mut grad) = group_dual_value_grad(phi, target, sign, lambda.view());
    let mut trace = vec![value];
    for iter in 1..=opts.max_iter {
        let grad_norm = grad.iter().fold(0.0f64, |a, &g| a.max(g.abs()));
        if grad_norm <= opts.tol {
            check_not_degenerate(phi, sign, &lambda, group)?;
            return Ok(GroupSolve {
                lambda,
                iterations: iter - 1,
                grad_norm,
                trace,
            });
        }
        let mut direction = if use_newton {
            let z: Vec<f64> = phi
                .rows()
                .into_iter()
                .map(|row| sign * row.dot(&lambda))
                .collect();
            let w = softmax(&z);
            let mut mu = Array1::<f64>::zeros(m);
            for (i, row) in phi.rows().into_iter().enumerate() {
                mu.scaled_add(w[i], &row);
            }
            let mut hess = Array2::<f64>::zeros((m, m));
            for (i, row) in phi.rows().into_iter().enumerate() {
                for a in 0..m {
                    let wa = w[i] * row[a];
                    for b in a..m {
                        hess[[a, b]] += wa * row[b];
                    }
                }
            }
            for a in 0..m {
                for b in a..m {
                    let v = hess[[a, b]] - mu[a] * mu[b];
                    hess[[a, b]] = v;
                    hess[[b, a]] = v;
                }
            }
            match solve_spd(&hess, &grad) {
                Ok(dir) if dir.iter().all(|v| v.is_finite()) => dir,
                _ => grad.clone(),
            }
        } else {
            grad.clone()
        };
        let mut slope: f64 = grad.dot(&direction);
        if slope <= 0.0 {
            direction = grad.clone();
            slope = grad.dot(&direction);
        }
        // Armijo backtracking on the dual objective, with a rounding slack so
        // full Newton steps near the optimum (whose true decrease is below
        // f64 resolution of the objective) still get accepted.
        let slack = 1e-12 * (1.0 + value.abs());
        let mut step = 1.0;
        let mut accepted = false;
        for _ in 0..60 {
            let cand = &lambda - &direction.mapv(|v| step * v);
            let (cand_value, cand_grad) = group_dual_value_grad(phi, target, sign, cand.view());
            if cand_value <= value - 1e-4 * step * slope + slack {
                lambda = cand;
                value = cand_value;
                grad = cand_grad;
                trace.push(value);
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if !accepted {
            // No descent step exists at machine precision.
            let grad_norm = grad.iter().fold(0.0f64, |a, &g| a.max(g.abs()));
            if grad_norm <= opts.tol {
                check_not_degenerate(phi, sign, &lambda, group)?;
                return Ok(GroupSolve {
                    lambda,
                    iterations: iter,
                    grad_norm,
                    trace,
                });
            }
            return Err(Error::InfeasibleOrPoorOverlap { group });
        }
        if lambda.iter().any(|v| v.abs() > opts.lambda_cap) {
            return Err(Error::InfeasibleOrPoorOverlap { group });
        }
    }
    let grad_norm = grad.iter().fold(0.0f64, |a, &g| a.max(g.abs()));
    if grad_norm <= opts.tol {
        check_not_degenerate(phi, sign, &lambda, group)?;
        Ok(GroupSolve {
            lambda,
            iterations: opts.max_iter,
            grad_norm,
            trace,
        })
    } else {
        Err(Error::InfeasibleOrPoorOverlap { group })
    }
}

fn split_std_groups(std: &Standardized, t: &[u8]) -> (Array2<f64>, Array2<f64>) {
    let idx0: Vec<usize> = (0..t.len()).filter(|&i| t[i] == 0).collect();
    let idx1: Vec<usize> = (0..t.len()).filter(|&i| t[i] == 1).collect();
    (
        std.phi.select(Axis(0), &idx0),
        std.phi.select(Axis(0), &idx1),
    )
}

fn std_group_mean(phi: &Array2<f64>) -> Array1<f64> {
    phi.mean_axis(Axis(0)).expect("nonempty group")
}

fn assemble_dual(
    problem: &BalanceProblem,
    std: &Standardized,
    g0: GroupSolve,
    g1: GroupSolve,
) -> DualSolution {
    let p = problem.phi.ncols();
    let lambda0 = std.lambda_to_original(&g0.lambda, p);
    let lambda1 = std.lambda_to_original(&g1.lambda, p);
    let mut trace = g0.trace;
    trace.extend(g1.trace);
    let mut dual = DualSolution {
        lambda0,
        lambda1,
        converged: true,
        iterations: g0.iterations + g1.iterations,
        grad_norm: g0.grad_norm.max(g1.grad_norm),
        constraint_violation: f64::INFINITY,
        objective_trace: trace,
    };
    let weights = weights_from_dual(problem, &dual);
    dual.constraint_violation = max_moment_residual(problem, &weights);
    dual
}

/// Minimize the entropy-balancing dual. For the ATE both groups are solved
/// independently against the full-sample mean; for the ATT a single control
/// dual targets the treated mean (`lambda1` is reported as zero).
pub fn solve_dual(problem: &BalanceProblem, opts: &SolverOptions) -> Result<DualSolution> {
    let std = standardize_for_solve(&problem.phi);
    let (phi0, phi1) = split_std_groups(&std, &problem.t);
    let m = std.phi.ncols();

    let (g0, g1) = match problem.estimand {
        Estimand::Ate => {
            // Standardization centers on the full-sample mean, so the target is 0.
            let target = Array1::<f64>::zeros(m);
            let g0 = solve_group(phi0.view(), target.view(), 1.0, "control", opts)?;
            let g1 = solve_group(phi1.view(), target.view(), -1.0, "treated", opts)?;
            (g0, g1)
        }
        Estimand::Att => {
            let target = std_group_mean(&phi1);
            let g0 = solve_group(phi0.view(), target.view(), 1.0, "control", opts)?;
            (g0, GroupSolve::trivial(m))
        }
    };
    Ok(assemble_dual(problem, &std, g0, g1))
}

/// Max-abs moment residual of the given weights, original scale.
pub fn max_moment_residual(problem: &BalanceProblem, weights: &BalancingWeights) -> f64 {
    let p = problem.phi.ncols();
    let n = problem.n();
    let mut wmean0 = vec![0.0; p];
    let mut wmean1 = vec![0.0; p];
    for i in 0..n {
        let row = problem.phi.row(i);
        let w = weights.w[i];
        let acc = if problem.t[i] == 0 {
            &mut wmean0
        } else {
            &mut wmean1
        };
        for j in 0..p {
            acc[j] += w * row[j];
        }
    }
    let mut worst = 0.0f64;
    match problem.estimand {
        Estimand::Ate => {
            for j in 0..p {
                let target = problem.phi.column(j).sum() / n as f64;
                worst = worst.max((wmean0[j] - target).abs());
                worst = worst.max((wmean1[j] - target).abs());
            }
        }
        Estimand::Att => {
            for j in 0..p {
                worst = worst.max((wmean0[j] - wmean1[j]).abs());
            }
        }
    }
    worst
}

/// KKT weights from the dual multipliers: a softmax within each treatment
/// group of `η_i = −(2T_i−1)⟨λ_{T_i}, Φ_i⟩`. For the ATT the treated side is
/// fixed uniform.
pub fn weights_from_dual(problem: &BalanceProblem, dual: &DualSolution) -> BalancingWeights {
    let n = problem.n();
    let lam0 = ArrayView1::from(&dual.lambda0);
    let lam1 = ArrayView1::from(&dual.lambda1);
    let mut eta = vec![0.0; n];
    for i in 0..n {
        let row = problem.phi.row(i);
        eta[i] = match problem.t[i] {
            0 => row.dot(&lam0),
            _ => -row.dot(&lam1),
        };
    }
    let mut w = vec![0.0; n];
    match problem.estimand {
        Estimand::Ate => {
            for group in [0u8, 1u8] {
                let idx: Vec<usize> = (0..n).filter(|&i| problem.t[i] == group).collect();
                let z: Vec<f64> = idx.iter().map(|&i| eta[i]).collect();
                let sm = softmax(&z);
                for (k, &i) in idx.iter().enumerate() {
                    w[i] = sm[k];
                }
            }
        }
        Estimand::Att => {
            let idx0: Vec<usize> = (0..n).filter(|&i| problem.t[i] == 0).collect();
            let z: Vec<f64> = idx0.iter().map(|&i| eta[i]).collect();
            let sm = softmax(&z);
            for (k, &i) in idx0.iter().enumerate() {
                w[i] = sm[k];
            }
            let n1 = problem.n_treated();
            for i in 0..n {
                if problem.t[i] == 1 {
                    w[i] = 1.0 / n1 as f64;
                }
            }
        }
    }
    BalancingWeights {
        w,
        estimand: problem.estimand,
    }
}

/// The quantity added to the training loss: Σ w_i log w_i over the weight
/// vector (larger = more imbalanced; uniform weights minimize it).
pub fn entropy_stat(weights: &BalancingWeights) -> f64 {
    weights
        .w
        .iter()
        .map(|&w| if w > 0.0 { w * w.ln() } else { 0.0 })
        .sum()
}

/// Alternating Fenchel mini-max solve of the same dual: the inner scalar
/// maximization has the closed form `u* = −log Σ exp(s⟨λ,Φ⟩)` (the conjugate
/// pair of −log), and the outer problem takes plain gradient steps at fixed
/// `u`. Converges to the same stationary point as [`solve_dual`].
pub fn solve_fenchel_minimax(
    problem: &BalanceProblem,
    opts: &SolverOptions,
) -> Result<DualSolution> {
    let std = standardize_for_solve(&problem.phi);
    let (phi0, phi1) = split_std_groups(&std, &problem.t);
    let m = std.phi.ncols();

    let solve = |phi: ArrayView2<f64>,
                 target: ArrayView1<f64>,
                 sign: f64,
                 group: &'static str|
     -> Result<GroupSolve> {
        // F(λ; u) = e^u Σ exp(s⟨λ,Φ⟩) − u − 1 − s⟨λ,target⟩, evaluated in the
        // log domain so large multipliers do not overflow.
        let f_at = |lam: &Array1<f64>, u: f64| -> (f64, Array1<f64>) {
            let z: Vec<f64> = phi
                .rows()
                .into_iter()
                .map(|row| sign * row.dot(lam))
                .collect();
            let log_s = logsumexp(&z).expect("nonempty group");
            let scale = (u + log_s).exp();
            let w = softmax(&z);
            let mut mu = Array1::<f64>::zeros(m);
            for (i, row) in phi.rows().into_iter().enumerate() {
                mu.scaled_add(w[i], &row);
            }
            // ∇_λ F = e^u Σ sΦ exp(s⟨λ,Φ⟩) − s·target = scale·s·μ_w − s·target
            let grad = Array1::from_shape_fn(m, |j| sign * (scale * mu[j] - target[j]));
            let value = scale - u - 1.0 - sign * lam.dot(&target);
            (value, grad)
        };
        let mut lambda = Array1::<f64>::zeros(m);
        let mut trace = Vec::new();
        let max_outer = opts.max_iter.max(5000);
        for iter in 0..max_outer {
            let z: Vec<f64> = phi
                .rows()
                .into_iter()
                .map(|row| sign * row.dot(&lambda))
                .collect();
            let log_s = logsumexp(&z).expect("nonempty group");
            let u = -log_s;
            let (value, grad) = f_at(&lambda, u);
            // At u = −log S(λ) the surrogate gradient equals the dual gradient.
            let gnorm = grad.iter().fold(0.0f64, |a, &g| a.max(g.abs()));
            trace.push(log_s - sign * lambda.dot(&target));
            if gnorm <= opts.tol {
                return Ok(GroupSolve {
                    lambda,
                    iterations: iter,
                    grad_norm: gnorm,
                    trace,
                });
            }
            let slope = grad.dot(&grad);
            let mut step = 1.0;
            let mut moved = false;
            for _ in 0..60 {
                let cand = &lambda - &grad.mapv(|v| step * v);
                let (cand_value, _) = f_at(&cand, u);
                if cand_value <= value - 1e-4 * step * slope {
                    lambda = cand;
                    moved = true;
                    break;
                }
                step *= 0.5;
            }
            if !moved {
                return Err(Error::InfeasibleOrPoorOverlap { group });
            }
            if lambda.iter().any(|v| v.abs() > opts.lambda_cap) {
                return Err(Error::InfeasibleOrPoorOverlap { group });
            }
        }
        Err(Error::InfeasibleOrPoorOverlap { group })
    };

    let (g0, g1) = match problem.estimand {
        Estimand::Ate => {
            let target = Array1::<f64>::zeros(m);
            let g0 = solve(phi0.view(), target.view(), 1.0, "control")?;
            let g1 = solve(phi1.view(), target.view(), -1.0, "treated")?;
            (g0, g1)
        }
        Estimand::Att => {
            let target = std_group_mean(&phi1);
            let g0 = solve(phi0.view(), target.view(), 1.0, "control")?;
            (g0, GroupSolve::trivial(m))
        }
    };
    Ok(assemble_dual(problem, &std, g0, g1))
}

/// Control weights whose representation mean equals the unweighted treated
/// mean, treated weights fixed at 1/N₁.
pub fn att_weights(
    problem: &BalanceProblem,
    opts: &SolverOptions,
) -> Result<(DualSolution, BalancingWeights)> {
    if problem.estimand != Estimand::Att {
        return Err(Error::EstimandMismatch {
            expected: "att",
            got: problem.estimand.name(),
        });
    }
    let dual = solve_dual(problem, opts)?;
    let weights = weights_from_dual(problem, &dual);
    Ok((dual, weights))
}

/// Newton-solved minimizer of `Σ log(1 + exp(−(2T_i−1)⟨λ, Φ_i⟩))`, i.e. the
/// logistic propensity MLE on the given representations. With
/// `include_intercept` an all-ones column is appended last.
pub fn logistic_mle(phi: &Array2<f64>, t: &[u8], include_intercept: bool) -> Result<Array1<f64>> {
    const CAP: f64 = 50.0;
    const TOL: f64 = 1e-8;
    if phi.nrows() != t.len() {
        return Err(Error::InvalidArgument("phi/t length mismatch".into()));
    }
    let n1 = t.iter().filter(|&&v| v == 1).count();
    if n1 == 0 || n1 == t.len() {
        return Err(Error::InvalidArgument("both classes must be present".into()));
    }
    let n = phi.nrows();
    let m = phi.ncols() + usize::from(include_intercept);
    let mut x = Array2::<f64>::ones((n, m));
    for i in 0..n {
        for j in 0..phi.ncols() {
            x[[i, j]] = phi[[i, j]];
        }
    }

    let nll_grad = |lam: &Array1<f64>| -> (f64, Array1<f64>) {
        let mut nll = 0.0;
        let mut grad = Array1::<f64>::zeros(m);
        for i in 0..n {
            let z = x.row(i).dot(lam);
            let y = 2.0 * t[i] as f64 - 1.0;
            let a = -y * z;
            // softplus(a) = log(1 + e^a), stable form
            nll += a.max(0.0) + (-a.abs()).exp().ln_1p();
            let p = 1.0 / (1.0 + (-z).exp());
            let r = p - t[i] as f64;
            grad.scaled_add(r, &x.row(i));
        }
        (nll, grad)
    };

    // Separation makes the NLL infimum unattained: λ diverges while the
    // gradient vanishes, so a "converged" fit that classifies every unit
    // perfectly is reported as separation rather than returned.
    let separated = |lam: &Array1<f64>| -> bool {
        (0..n).all(|i| {
            let z = x.row(i).dot(lam);
            let p = 1.0 / (1.0 + (-z).exp());
            (t[i] as f64 - p).abs() < 1e-6
        })
    };

    let mut lam = Array1::<f64>::zeros(m);
    let (mut value, mut grad) = nll_grad(&lam);
    for _ in 0..200 {
        let gnorm = grad.iter().fold(0.0f64, |a, &g| a.max(g.abs()));
        if gnorm <= TOL {
            if separated(&lam) {
                return Err(Error::Separation { cap: CAP });
            }
            return Ok(lam);
        }
        let mut hess = Array2::<f64>::zeros((m, m));
        for i in 0..n {
            let z = x.row(i).dot(&lam);
            let p = 1.0 / (1.0 + (-z).exp());
            let s = (p * (1.0 - p)).max(1e-12);
            let row = x.row(i);
            for a in 0..m {
                let sa = s * row[a];
                for b in a..m {
                    hess[[a, b]] += sa * row[b];
                }
            }
        }
        for a in 0..m {
            for b in a..m {
                let v = hess[[a, b]];
                hess[[b, a]] = v;
            }
        }
        let dir = solve_spd(&hess, &grad).unwrap_or_else(|_| grad.clone());
        let slope = grad.dot(&dir).max(0.0);
        let slack = 1e-12 * (1.0 + value.abs());
        let mut step = 1.0;
        let mut moved = false;
        for _ in 0..60 {
            let cand = &lam - &dir.mapv(|v| step * v);
            let (cand_value, cand_grad) = nll_grad(&cand);
            if cand_value <= value - 1e-4 * step * slope + slack {
                lam = cand;
                value = cand_value;
                grad = cand_grad;
                moved = true;
                break;
            }
            step *= 0.5;
        }
        if !moved {
            let gnorm = grad.iter().fold(0.0f64, |a, &g| a.max(g.abs()));
            if gnorm <= TOL && !separated(&lam) {
                return Ok(lam);
            }
            return Err(Error::Separation { cap: CAP });
        }
        if lam.iter().any(|v| v.abs() > CAP) {
            return Err(Error::Separation { cap: CAP });
        }
    }
    Err(Error::Separation { cap: CAP })
}

/// Test-scale primal oracle: maximize −Σ w log w under the exact constraints
/// by exponentiated-gradient steps on an augmented Lagrangian, with explicit
/// per-group renormalization. Independent of the Newton dual path.
pub fn solve_primal_oracle(problem: &BalanceProblem) -> Result<BalancingWeights> {
    if problem.n() > 200 {
        return Err(Error::InvalidArgument(
            "primal oracle is test-scale only (N ≤ 200)".into(),
        ));
    }
    let std = standardize_for_solve(&problem.phi);
    let (phi0, phi1) = split_std_groups(&std, &problem.t);
    let m = std.phi.ncols();

    let solve_group_primal =
        |phi: &Array2<f64>, target: &Array1<f64>, group: &'static str| -> Result<Vec<f64>> {
            let n = phi.nrows();
            let mut w = vec![1.0 / n as f64; n];
            let mut nu = Array1::<f64>::zeros(m);
            let mut rho = 10.0f64;
            let residual = |w: &[f64]| -> Array1<f64> {
                let mut r = Array1::<f64>::zeros(m);
                for (i, row) in phi.rows().into_iter().enumerate() {
                    r.scaled_add(w[i], &row);
                }
                &r - target
            };
            let al_value = |w: &[f64], nu: &Array1<f64>, rho: f64| -> f64 {
                let ent: f64 = w
                    .iter()
                    .map(|&v| if v > 0.0 { v * v.ln() } else { 0.0 })
                    .sum();
                let r = residual(w);
                ent + nu.dot(&r) + 0.5 * rho * r.dot(&r)
            };
            let mut prev_rnorm = f64::INFINITY;
            for _outer in 0..80 {
                let mut eta = 0.25 / (1.0 + rho);
                let mut value = al_value(&w, &nu, rho);
                for _inner in 0..4000 {
                    let r = residual(&w);
                    let pull = &nu + &r.mapv(|v| rho * v);
                    let mut g = vec![0.0; n];
                    for (i, row) in phi.rows().into_iter().enumerate() {
                        g[i] = w[i].max(1e-300).ln() + 1.0 + row.dot(&pull);
                    }
                    let gbar: f64 = w.iter().zip(&g).map(|(&wi, &gi)| wi * gi).sum();
                    // multiplicative step, then renormalize onto the simplex
                    let cand: Vec<f64> = w
                        .iter()
                        .zip(&g)
                        .map(|(&wi, &gi)| wi * (-eta * (gi - gbar)).exp())
                        .collect();
                    let s: f64 = cand.iter().sum();
                    let cand: Vec<f64> = cand.iter().map(|&v| v / s).collect();
                    let cand_value = al_value(&cand, &nu, rho);
                    if cand_value <= value {
                        let moved: f64 = w
                            .iter()
                            .zip(&cand)
                            .map(|(&a, &b)| (a - b).abs())
                            .fold(0.0, f64::max);
                        w = cand;
                        value = cand_value;
                        eta *= 1.1;
                        if moved < 1e-14 {
                            break;
                        }
                    } else {
                        eta *= 0.5;
                        if eta < 1e-16 {
                            break;
                        }
                    }
                }
                let r = residual(&w);
                let rnorm = r.iter().fold(0.0f64, |a, &v| a.max(v.abs()));
                if rnorm <= 1e-9 {
                    return Ok(w);
                }
                nu = &nu + &r.mapv(|v| rho * v);
                if rnorm > 0.25 * prev_rnorm {
                    rho = (rho * 4.0).min(1e7);
                }
                prev_rnorm = rnorm;
            }
            let r = residual(&w);
            let rnorm = r.iter().fold(0.0f64, |a, &v| a.max(v.abs()));
            if rnorm <= 1e-6 {
                Ok(w)
            } else {
                Err(Error::InfeasibleOrPoorOverlap { group })
            }
        };

    let n = problem.n();
    let mut w = vec![0.0; n];
    match problem.estimand {
        Estimand::Ate => {
            let target = Array1::<f64>::zeros(m);
            let w0 = solve_group_primal(&phi0, &target, "control")?;
            let w1 = solve_group_primal(&phi1, &target, "treated")?;
            let (mut k0, mut k1) = (0, 0);
            for i in 0..n {
                if problem.t[i] == 0 {
                    w[i] = w0[k0];
                    k0 += 1;
                } else {
                    w[i] = w1[k1];
                    k1 += 1;
                }
            }
        }
        Estimand::Att => {
            let target = std_group_mean(&phi1);
            let w0 = solve_group_primal(&phi0, &target, "control")?;
            let n1 = problem.n_treated();
            let mut k0 = 0;
            for i in 0..n {
                if problem.t[i] == 0 {
                    w[i] = w0[k0];
                    k0 += 1;
                } else {
                    w[i] = 1.0 / n1 as f64;
                }
            }
        }
    }
    Ok(BalancingWeights {
        w,
        estimand: problem.estimand,
    })
}
