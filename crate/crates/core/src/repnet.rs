//! The representation network: a ReLU multi-layer perceptron Φ_θ with two
//! linear outcome heads, its joint loss (prediction + κ·entropy of the
//! balancing weights), explicit backpropagation, and the training loop that
//! interleaves gradient steps on the balancing multipliers λ with steps on
//! the network parameters.
//!
//! The entropy term is differentiated through the softmax weights at a fixed
//! λ: the multiplier is itself the argmin of a smooth convex problem in which
//! the network enters only through the objective, so its envelope
//! contribution to the gradient vanishes and λ can be treated as a constant.

use ndarray::{Array1, Array2, Axis};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::ebal::{
    group_dual_value_grad, solve_dual, weights_from_dual, BalanceProblem, BalancingWeights,
    DualSolution, Estimand, SolverOptions,
};
use crate::error::{Error, Result};
use crate::numerics::{apply_standardization, standardize_columns, RngStream};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutcomeType {
    Continuous,
    Binary,
}

/// Network shape: every layer is fully connected with ReLU activation; the
/// last layer's output is the representation Φ, and each head is linear in Φ
/// (plus an intercept, which stays out of the balance constraints).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NetworkConfig {
    pub input_dim: usize,
    /// Widths of the representation layers, in order; the last equals `rep_dim`.
    pub layers: Vec<usize>,
    pub rep_dim: usize,
    pub outcome: OutcomeType,
}

impl NetworkConfig {
    pub fn new(
        input_dim: usize,
        layers: Vec<usize>,
        rep_dim: usize,
        outcome: OutcomeType,
    ) -> Result<Self> {
        if input_dim == 0 || rep_dim == 0 || layers.is_empty() || layers.iter().any(|&w| w == 0) {
            return Err(Error::InvalidArgument("all layer sizes must be ≥ 1".into()));
        }
        if *layers.last().unwrap() != rep_dim {
            return Err(Error::InvalidArgument(format!(
                "rep_dim {} must equal the last layer width {}",
                rep_dim,
                layers.last().unwrap()
            )));
        }
        Ok(Self {
            input_dim,
            layers,
            rep_dim,
            outcome,
        })
    }
}

/// All trainable parameters: per-layer weights/biases plus the two heads.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams {
    /// Weight matrices, each (fan_in × fan_out).
    pub weights: Vec<Array2<f64>>,
    pub biases: Vec<Array1<f64>>,
    pub gamma0: Array1<f64>,
    pub gamma1: Array1<f64>,
    pub b0: f64,
    pub b1: f64,
}

impl ModelParams {
    pub fn zeros(config: &NetworkConfig) -> Self {
        let mut weights = Vec::new();
        let mut biases = Vec::new();
        let mut fan_in = config.input_dim;
        for &width in &config.layers {
            weights.push(Array2::zeros((fan_in, width)));
            biases.push(Array1::zeros(width));
            fan_in = width;
        }
        Self {
            weights,
            biases,
            gamma0: Array1::zeros(config.rep_dim),
            gamma1: Array1::zeros(config.rep_dim),
            b0: 0.0,
            b1: 0.0,
        }
    }

    pub fn n_params(&self) -> usize {
        let layer: usize = self
            .weights
            .iter()
            .zip(&self.biases)
            .map(|(w, b)| w.len() + b.len())
            .sum();
        layer + self.gamma0.len() + self.gamma1.len() + 2
    }

    /// Flatten into a single vector (layer weights row-major, then biases,
    /// then heads); the inverse of [`ModelParams::from_flat`].
    pub fn to_flat(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.n_params());
        for (w, b) in self.weights.iter().zip(&self.biases) {
            out.extend(w.iter());
            out.extend(b.iter());
        }
        out.extend(self.gamma0.iter());
        out.extend(self.gamma1.iter());
        out.push(self.b0);
        out.push(self.b1);
        out
    }

    pub fn from_flat(config: &NetworkConfig, flat: &[f64]) -> Self {
        let mut params = ModelParams::zeros(config);
        let mut k = 0;
        for l in 0..params.weights.len() {
            for v in params.weights[l].iter_mut() {
                *v = flat[k];
                k += 1;
            }
            for v in params.biases[l].iter_mut() {
                *v = flat[k];
                k += 1;
            }
        }
        for v in params.gamma0.iter_mut() {
            *v = flat[k];
            k += 1;
        }
        for v in params.gamma1.iter_mut() {
            *v = flat[k];
            k += 1;
        }
        params.b0 = flat[k];
        params.b1 = flat[k + 1];
        params
    }
}

/// Scaled-uniform layer init (±√(6/(fan_in+fan_out))), zero biases and zero
/// heads, so the balance term is the only early signal shaping Φ.
pub fn init_params(config: &NetworkConfig, stream: RngStream) -> ModelParams {
    let mut rng = stream.rng();
    let mut params = ModelParams::zeros(config);
    let mut fan_in = config.input_dim;
    for (l, &width) in config.layers.iter().enumerate() {
        let bound = (6.0 / (fan_in + width) as f64).sqrt();
        for v in params.weights[l].iter_mut() {
            *v = rng.random_range(-bound..bound);
        }
        fan_in = width;
    }
    params
}

/// Training hyperparameters for one run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrainingHyper {
    pub kappa: f64,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub iterations: usize,
    /// Gradient steps on λ per batch (the balancing stage).
    #[serde(default = "one")]
    pub lambda_steps: usize,
    /// Learning rate for λ; defaults to `learning_rate`.
    #[serde(default)]
    pub lambda_lr: Option<f64>,
    pub estimand: Estimand,
    pub seed: u64,
    /// Adam-style adaptive updates instead of plain SGD.
    #[serde(default)]
    pub adam: bool,
    /// Replace the per-batch λ gradient step with a full dual solve on the batch.
    #[serde(default)]
    pub full_dual_per_batch: bool,
}

fn one() -> usize {
    1
}

impl TrainingHyper {
    fn validate(&self) -> Result<()> {
        if self.kappa < 0.0 {
            return Err(Error::InvalidArgument("kappa must be ≥ 0".into()));
        }
        if self.batch_size < 4 {
            return Err(Error::InvalidArgument("batch size must be ≥ 4".into()));
        }
        if self.learning_rate <= 0.0 {
            return Err(Error::InvalidArgument("learning rate must be > 0".into()));
        }
        Ok(())
    }
}

/// Network forward pass: Φ plus both head outputs for every row. Binary
/// outcomes are mapped through the logistic function, so heads are on the
/// probability scale.
pub fn forward(
    config: &NetworkConfig,
    params: &ModelParams,
    x: &Array2<f64>,
) -> Result<(Array2<f64>, Array1<f64>, Array1<f64>)> {
    if x.ncols() != config.input_dim {
        return Err(Error::InvalidArgument(format!(
            "input has {} columns, network expects {}",
            x.ncols(),
            config.input_dim
        )));
    }
    let mut h = x.clone();
    for (w, b) in params.weights.iter().zip(&params.biases) {
        let mut z = h.dot(w);
        for mut row in z.rows_mut() {
            row += b;
        }
        z.mapv_inplace(|v| v.max(0.0));
        h = z;
    }
    let mut f0 = h.dot(&params.gamma0) + params.b0;
    let mut f1 = h.dot(&params.gamma1) + params.b1;
    if config.outcome == OutcomeType::Binary {
        f0.mapv_inplace(|v| 1.0 / (1.0 + (-v).exp()));
        f1.mapv_inplace(|v| 1.0 / (1.0 + (-v).exp()));
    }
    Ok((h, f0, f1))
}

struct ForwardCache {
    /// Post-activation per layer; `acts[0]` is the input.
    acts: Vec<Array2<f64>>,
}

fn forward_cached(params: &ModelParams, x: &Array2<f64>) -> ForwardCache {
    let mut acts = vec![x.clone()];
    for (w, b) in params.weights.iter().zip(&params.biases) {
        let mut z = acts.last().unwrap().dot(w);
        for mut row in z.rows_mut() {
            row += b;
        }
        z.mapv_inplace(|v| v.max(0.0));
        acts.push(z);
    }
    ForwardCache { acts }
}

/// Joint loss of a batch and its gradient with respect to every parameter,
/// holding λ fixed: prediction loss on observed outcomes (squared error or
/// cross-entropy) plus κ·Σ w log w with w the per-batch-group softmax
/// weights implied by (Φ, λ). The entropy gradient with respect to η_j is
/// `w_j (log w_j − Σ_k w_k log w_k)` within j's group, chained through
/// `∂η_j/∂Φ_j = −(2T_j−1)·λ_{T_j}`.
pub fn loss_and_grad(
    config: &NetworkConfig,
    params: &ModelParams,
    x: &Array2<f64>,
    t: &[u8],
    y: &Array1<f64>,
    lambda: &DualSolution,
    hyper: &TrainingHyper,
) -> Result<(f64, ModelParams)> {
    let n = x.nrows();
    if t.len() != n || y.len() != n {
        return Err(Error::InvalidArgument("batch misaligned".into()));
    }
    let n1 = t.iter().filter(|&&v| v == 1).count();
    if n1 == 0 || n1 == n {
        return Err(Error::DegenerateBatch);
    }
    let cache = forward_cached(params, x);
    let phi = cache.acts.last().unwrap();
    let m = phi.ncols();

    let mut grads = ModelParams::zeros(config);
    // dloss/dΦ accumulates prediction and entropy contributions
    let mut dphi = Array2::<f64>::zeros((n, m));
    let mut loss = 0.0;

    for i in 0..n {
        let phi_i = phi.row(i);
        let (gamma, bias) = if t[i] == 1 {
            (&params.gamma1, params.b1)
        } else {
            (&params.gamma0, params.b0)
        };
        let lin = phi_i.dot(gamma) + bias;
        let dlin = match config.outcome {
            OutcomeType::Continuous => {
                let r = y[i] - lin;
                loss += r * r;
                -2.0 * r
            }
            OutcomeType::Binary => {
                // cross-entropy of σ(lin): softplus(lin) − y·lin
                loss += lin.max(0.0) + (-lin.abs()).exp().ln_1p() - y[i] * lin;
                let p = 1.0 / (1.0 + (-lin).exp());
                p - y[i]
            }
        };
        if t[i] == 1 {
            grads.gamma1.scaled_add(dlin, &phi_i);
            grads.b1 += dlin;
            dphi.row_mut(i).scaled_add(dlin, &params.gamma1);
        } else {
            grads.gamma0.scaled_add(dlin, &phi_i);
            grads.b0 += dlin;
            dphi.row_mut(i).scaled_add(dlin, &params.gamma0);
        }
    }

    if hyper.kappa != 0.0 {
        let lam0 = Array1::from(lambda.lambda0.clone());
        let lam1 = Array1::from(lambda.lambda1.clone());
        // groups that contribute entropy: both for ATE, control only for ATT
        let groups: &[u8] = match hyper.estimand {
            Estimand::Ate => &[0, 1],
            Estimand::Att => &[0],
        };
        for &g in groups {
            let idx: Vec<usize> = (0..n).filter(|&i| t[i] == g).collect();
            let (lam, sign) = if g == 0 { (&lam0, 1.0) } else { (&lam1, -1.0) };
            let eta: Vec<f64> = idx.iter().map(|&i| sign * phi.row(i).dot(lam)).collect();
            let lse = crate::numerics::logsumexp(&eta)?;
            let w: Vec<f64> = eta.iter().map(|&e| (e - lse).exp()).collect();
            let h_g: f64 = w.iter().map(|&wi| if wi > 0.0 { wi * wi.ln() } else { 0.0 }).sum();
            loss += hyper.kappa * h_g;
            for (k, &i) in idx.iter().enumerate() {
                let wi = w[k];
                if wi <= 0.0 {
                    continue;
                }
                let deta = wi * (wi.ln() - h_g);
                dphi.row_mut(i).scaled_add(hyper.kappa * deta * sign, lam);
            }
        }
    }

    // backprop through the ReLU stack
    let mut upstream = dphi;
    for l in (0..params.weights.len()).rev() {
        let post = &cache.acts[l + 1];
        // ReLU mask: derivative 1 where the activation is strictly positive
        let mut dz = upstream;
        for (mut row, prow) in dz.rows_mut().into_iter().zip(post.rows()) {
            for (v, &p) in row.iter_mut().zip(prow.iter()) {
                if p <= 0.0 {
                    *v = 0.0;
                }
            }
        }
        grads.weights[l] = cache.acts[l].t().dot(&dz);
        grads.biases[l] = dz.sum_axis(Axis(0));
        upstream = dz.dot(&params.weights[l].t());
    }

    Ok((loss, grads))
}

/// A trained model: parameters, final full-data multipliers and weights, and
/// the standardization applied to inputs.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainedModel {
    pub config: NetworkConfig,
    pub params: ModelParams,
    pub estimand: Estimand,
    pub lambda: DualSolution,
    pub weights: BalancingWeights,
    pub x_means: Vec<f64>,
    pub x_sds: Vec<f64>,
}

impl PartialEq for DualSolution {
    fn eq(&self, other: &Self) -> bool {
        self.lambda0 == other.lambda0
            && self.lambda1 == other.lambda1
            && self.converged == other.converged
            && self.iterations == other.iterations
    }
}

impl PartialEq for BalancingWeights {
    fn eq(&self, other: &Self) -> bool {
        self.w == other.w && self.estimand == other.estimand
    }
}

pub struct TrainOutcome {
    pub model: TrainedModel,
    /// Joint loss per iteration.
    pub loss_trace: Vec<f64>,
}

/// Run the joint training loop: per iteration, sample a batch (resampling
/// single-group draws, capped at 100), take the configured number of
/// gradient steps on λ for the batch-restricted dual, then one optimizer
/// step on (θ, γ) with λ frozen. λ warm-starts across batches. After the
/// loop the full-data dual is solved once and its weights attached.
pub fn train(
    dataset: &Dataset,
    config: &NetworkConfig,
    hyper: &TrainingHyper,
    stream: RngStream,
) -> Result<TrainOutcome> {
    hyper.validate()?;
    let n = dataset.n();
    if dataset.p() != config.input_dim {
        return Err(Error::InvalidArgument(format!(
            "dataset has {} covariates, network expects {}",
            dataset.p(),
            config.input_dim
        )));
    }
    let n1 = dataset.n_treated();
    if n1 == 0 || n1 == n {
        return Err(Error::InvalidArgument("both groups required to train".into()));
    }
    let batch_size = hyper.batch_size.min(n);
    let (x_std, x_means, x_sds) = standardize_columns(&dataset.x);

    let mut params = init_params(config, stream.child(0));
    let mut batch_rng = stream.child(1).rng();
    let m = config.rep_dim;
    let mut lam0 = Array1::<f64>::zeros(m);
    let mut lam1 = Array1::<f64>::zeros(m);
    let lambda_lr = hyper.lambda_lr.unwrap_or(hyper.learning_rate);
    let lambda_cap = SolverOptions::default().lambda_cap;

    // Adam state, kept flat
    let mut adam_m = vec![0.0; params.n_params()];
    let mut adam_v = vec![0.0; params.n_params()];
    let mut loss_trace = Vec::with_capacity(hyper.iterations);

    for k in 0..hyper.iterations {
        // sample a batch with both groups present
        let mut batch_idx: Vec<usize> = Vec::new();
        let mut ok = false;
        for _attempt in 0..100 {
            batch_idx = rand::seq::index::sample(&mut batch_rng, n, batch_size).into_vec();
            let b1 = batch_idx.iter().filter(|&&i| dataset.t[i] == 1).count();
            if b1 > 0 && b1 < batch_idx.len() {
                ok = true;
                break;
            }
        }
        if !ok {
            return Err(Error::Training {
                iteration: k,
                message: "100 consecutive single-group batches".into(),
            });
        }
        let xb = x_std.select(Axis(0), &batch_idx);
        let tb: Vec<u8> = batch_idx.iter().map(|&i| dataset.t[i]).collect();
        let yb = Array1::from(
            batch_idx
                .iter()
                .map(|&i| dataset.y[i])
                .collect::<Vec<f64>>(),
        );

        // balancing stage on the batch representations
        let (phi_b, _, _) = forward(config, &params, &xb)?;
        if hyper.full_dual_per_batch {
            let problem = BalanceProblem::new(phi_b.clone(), tb.clone(), hyper.estimand)?;
            match solve_dual(&problem, &SolverOptions::default()) {
                Ok(dual) => {
                    lam0 = Array1::from(dual.lambda0);
                    lam1 = Array1::from(dual.lambda1);
                }
                Err(Error::InfeasibleOrPoorOverlap { .. }) => {
                    // keep the warm-started λ for this batch
                }
                Err(e) => return Err(e),
            }
        } else {
            let idx0: Vec<usize> = (0..tb.len()).filter(|&i| tb[i] == 0).collect();
            let idx1: Vec<usize> = (0..tb.len()).filter(|&i| tb[i] == 1).collect();
            let phi0 = phi_b.select(Axis(0), &idx0);
            let phi1 = phi_b.select(Axis(0), &idx1);
            let target = match hyper.estimand {
                Estimand::Ate => phi_b.mean_axis(Axis(0)).expect("nonempty"),
                Estimand::Att => phi1.mean_axis(Axis(0)).expect("nonempty"),
            };
            for _ in 0..hyper.lambda_steps {
                let (_, g0) = group_dual_value_grad(phi0.view(), target.view(), 1.0, lam0.view());
                lam0.scaled_add(-lambda_lr, &g0);
                if hyper.estimand == Estimand::Ate {
                    let (_, g1) =
                        group_dual_value_grad(phi1.view(), target.view(), -1.0, lam1.view());
                    lam1.scaled_add(-lambda_lr, &g1);
                }
            }
            lam0.mapv_inplace(|v| v.clamp(-lambda_cap, lambda_cap));
            lam1.mapv_inplace(|v| v.clamp(-lambda_cap, lambda_cap));
        }

        let lambda = DualSolution {
            lambda0: lam0.to_vec(),
            lambda1: lam1.to_vec(),
            converged: false,
            iterations: 0,
            grad_norm: f64::NAN,
            constraint_violation: f64::NAN,
            objective_trace: vec![],
        };
        let (loss, grads) = loss_and_grad(config, &params, &xb, &tb, &yb, &lambda, hyper)?;
        if !loss.is_finite() {
            let tail: Vec<f64> = loss_trace.iter().rev().take(5).cloned().collect();
            return Err(Error::Training {
                iteration: k,
                message: format!("non-finite loss {loss}; recent losses {tail:?}"),
            });
        }
        loss_trace.push(loss);

        let mut flat = params.to_flat();
        let gflat = grads.to_flat();
        if hyper.adam {
            let b1 = 0.9;
            let b2 = 0.999;
            let eps = 1e-8;
            let step = k as f64 + 1.0;
            for j in 0..flat.len() {
                adam_m[j] = b1 * adam_m[j] + (1.0 - b1) * gflat[j];
                adam_v[j] = b2 * adam_v[j] + (1.0 - b2) * gflat[j] * gflat[j];
                let mh = adam_m[j] / (1.0 - b1.powf(step));
                let vh = adam_v[j] / (1.0 - b2.powf(step));
                flat[j] -= hyper.learning_rate * mh / (vh.sqrt() + eps);
            }
        } else {
            // the batch loss is a sum, so the plain-SGD step is scaled per
            // example to keep the learning rate meaningful across batch sizes
            let scale = hyper.learning_rate / batch_size as f64;
            for j in 0..flat.len() {
                flat[j] -= scale * gflat[j];
            }
        }
        params = ModelParams::from_flat(config, &flat);
    }

    // final full-data dual and weights
    let (phi_full, _, _) = forward(config, &params, &x_std)?;
    let problem = BalanceProblem::new(phi_full, dataset.t.clone(), hyper.estimand)?;
    let lambda = solve_dual(&problem, &SolverOptions::default())?;
    let weights = weights_from_dual(&problem, &lambda);

    Ok(TrainOutcome {
        model: TrainedModel {
            config: config.clone(),
            params,
            estimand: hyper.estimand,
            lambda,
            weights,
            x_means,
            x_sds,
        },
        loss_trace,
    })
}

/// Per-row head difference f̂₁(Φ̂(x)) − f̂₀(Φ̂(x)) on new covariates
/// (probability-scale difference for binary outcomes). Standardization is
/// applied with the parameters stored at training time.
pub fn predict_ite(model: &TrainedModel, x: &Array2<f64>) -> Result<Array1<f64>> {
    let xs = apply_standardization(x, &model.x_means, &model.x_sds);
    let (_, f0, f1) = forward(&model.config, &model.params, &xs)?;
    Ok(&f1 - &f0)
}

/// Head predictions on new covariates, standardized with the stored parameters.
pub fn predict_heads(model: &TrainedModel, x: &Array2<f64>) -> Result<(Array1<f64>, Array1<f64>)> {
    let xs = apply_standardization(x, &model.x_means, &model.x_sds);
    let (_, f0, f1) = forward(&model.config, &model.params, &xs)?;
    Ok((f0, f1))
}

/// Representation coordinates on new covariates.
pub fn representation(model: &TrainedModel, x: &Array2<f64>) -> Result<Array2<f64>> {
    let xs = apply_standardization(x, &model.x_means, &model.x_sds);
    let (phi, _, _) = forward(&model.config, &model.params, &xs)?;
    Ok(phi)
}

// --- model JSON document ---

#[derive(Serialize, Deserialize)]
struct MatrixJson {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct TrainedModelJson {
    format_version: u32,
    config: NetworkConfig,
    estimand: Estimand,
    layer_weights: Vec<MatrixJson>,
    layer_biases: Vec<Vec<f64>>,
    gamma0: Vec<f64>,
    gamma1: Vec<f64>,
    b0: f64,
    b1: f64,
    lambda: DualSolution,
    balancing_weights: BalancingWeights,
    x_means: Vec<f64>,
    x_sds: Vec<f64>,
}

pub const MODEL_FORMAT_VERSION: u32 = 1;

impl TrainedModel {
    pub fn to_json(&self) -> Result<String> {
        let doc = TrainedModelJson {
            format_version: MODEL_FORMAT_VERSION,
            config: self.config.clone(),
            estimand: self.estimand,
            layer_weights: self
                .params
                .weights
                .iter()
                .map(|w| MatrixJson {
                    rows: w.nrows(),
                    cols: w.ncols(),
                    data: w.iter().cloned().collect(),
                })
                .collect(),
            layer_biases: self.params.biases.iter().map(|b| b.to_vec()).collect(),
            gamma0: self.params.gamma0.to_vec(),
            gamma1: self.params.gamma1.to_vec(),
            b0: self.params.b0,
            b1: self.params.b1,
            lambda: self.lambda.clone(),
            balancing_weights: self.weights.clone(),
            x_means: self.x_means.clone(),
            x_sds: self.x_sds.clone(),
        };
        Ok(serde_json::to_string_pretty(&doc)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: TrainedModelJson = serde_json::from_str(text)?;
        if doc.format_version != MODEL_FORMAT_VERSION {
            return Err(Error::InvalidArgument(format!(
                "unsupported model format version {}",
                doc.format_version
            )));
        }
        let mut params = ModelParams::zeros(&doc.config);
        if doc.layer_weights.len() != params.weights.len() {
            return Err(Error::InvalidArgument("layer count mismatch".into()));
        }
        for (l, mj) in doc.layer_weights.iter().enumerate() {
            if (mj.rows, mj.cols) != params.weights[l].dim() || mj.data.len() != mj.rows * mj.cols {
                return Err(Error::InvalidArgument(format!("layer {l} shape mismatch")));
            }
            params.weights[l] = Array2::from_shape_vec((mj.rows, mj.cols), mj.data.clone())
                .map_err(|e| Error::InvalidArgument(e.to_string()))?;
        }
        for (l, b) in doc.layer_biases.iter().enumerate() {
            if b.len() != params.biases[l].len() {
                return Err(Error::InvalidArgument(format!("bias {l} shape mismatch")));
            }
            params.biases[l] = Array1::from(b.clone());
        }
        params.gamma0 = Array1::from(doc.gamma0);
        params.gamma1 = Array1::from(doc.gamma1);
        params.b0 = doc.b0;
        params.b1 = doc.b1;
        Ok(TrainedModel {
            config: doc.config,
            params,
            estimand: doc.estimand,
            lambda: doc.lambda,
            weights: doc.balancing_weights,
            x_means: doc.x_means,
            x_sds: doc.x_sds,
        })
    }
}
