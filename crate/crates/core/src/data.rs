//! Datasets: synthetic high-dimensional generation, CSV ingestion and
//! serialization, deterministic splits, and the 1-NN surrogate used for
//! hyperparameter selection.
//!
//! CSV schema: a header row with mandatory columns `t` (0/1) and `y`,
//! optional `mu0`, `mu1`, `e`, `rand`, then covariates `x1..xp` in order.
//! UTF-8, comma-separated, `.` decimal. Floats are written with Rust's
//! shortest round-trip formatting, so write → load reproduces values exactly.

use std::path::Path;

use ndarray::{Array1, Array2, Axis};
use rand::Rng;

use crate::ebal::Estimand;
use crate::error::{Error, Result};
use crate::numerics::{sample_equicorrelated, standardize_columns, RngStream};

/// An observational sample: covariates, binary treatment, observed outcome,
/// plus optional ground truth for evaluation (true conditional means, true
/// propensities, and a randomized-subset flag for policy risk).
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub x: Array2<f64>,
    pub t: Vec<u8>,
    pub y: Array1<f64>,
    pub mu0: Option<Array1<f64>>,
    pub mu1: Option<Array1<f64>>,
    pub e_true: Option<Array1<f64>>,
    pub randomized: Option<Vec<u8>>,
    pub col_names: Vec<String>,
}

impl Dataset {
    pub fn new(x: Array2<f64>, t: Vec<u8>, y: Array1<f64>) -> Result<Self> {
        let n = x.nrows();
        if t.len() != n || y.len() != n {
            return Err(Error::InvalidArgument(format!(
                "misaligned dataset: x has {n} rows, t {}, y {}",
                t.len(),
                y.len()
            )));
        }
        if let Some(bad) = t.iter().find(|&&v| v > 1) {
            return Err(Error::InvalidArgument(format!(
                "treatment must be 0/1, got {bad}"
            )));
        }
        let col_names = (1..=x.ncols()).map(|j| format!("x{j}")).collect();
        Ok(Self {
            x,
            t,
            y,
            mu0: None,
            mu1: None,
            e_true: None,
            randomized: None,
            col_names,
        })
    }

    pub fn n(&self) -> usize {
        self.t.len()
    }

    pub fn p(&self) -> usize {
        self.x.ncols()
    }

    pub fn n_treated(&self) -> usize {
        self.t.iter().filter(|&&v| v == 1).count()
    }

    pub fn has_ground_truth(&self) -> bool {
        self.mu0.is_some() && self.mu1.is_some()
    }

    /// True per-unit effect `mu1 − mu0` when ground truth is present.
    pub fn true_ite(&self) -> Option<Array1<f64>> {
        match (&self.mu0, &self.mu1) {
            (Some(m0), Some(m1)) => Some(m1 - m0),
            _ => None,
        }
    }

    /// Row subset in the given index order.
    pub fn subset(&self, idx: &[usize]) -> Dataset {
        let take1 = |v: &Array1<f64>| Array1::from(idx.iter().map(|&i| v[i]).collect::<Vec<_>>());
        Dataset {
            x: self.x.select(Axis(0), idx),
            t: idx.iter().map(|&i| self.t[i]).collect(),
            y: take1(&self.y),
            mu0: self.mu0.as_ref().map(take1),
            mu1: self.mu1.as_ref().map(take1),
            e_true: self.e_true.as_ref().map(take1),
            randomized: self
                .randomized
                .as_ref()
                .map(|r| idx.iter().map(|&i| r[i]).collect()),
            col_names: self.col_names.clone(),
        }
    }
}

/// Scenario for the overlap between outcome and treatment supports.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum Scenario {
    /// High confounding: identical supports.
    A,
    /// Moderate confounding: half overlap.
    B,
    /// Low confounding: disjoint supports.
    C,
}

impl std::str::FromStr for Scenario {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "A" | "a" => Ok(Scenario::A),
            "B" | "b" => Ok(Scenario::B),
            "C" | "c" => Ok(Scenario::C),
            other => Err(Error::InvalidArgument(format!("unknown scenario {other}"))),
        }
    }
}

/// Configuration of the high-dimensional synthetic benchmark.
#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HddConfig {
    pub p: usize,
    pub p_star: usize,
    pub rho: f64,
    #[serde(default = "default_sigma")]
    pub sigma: f64,
    #[serde(default = "default_sigma")]
    pub sigma_e: f64,
    pub n: usize,
    pub scenario: Scenario,
    /// Magnitude of nonzero outcome coefficients; defaults to 1/√p*.
    #[serde(default)]
    pub coef_scale: Option<f64>,
    pub seed: u64,
}

fn default_sigma() -> f64 {
    1.0
}

impl HddConfig {
    fn validate(&self) -> Result<()> {
        if self.p_star > self.p {
            return Err(Error::InvalidArgument(format!(
                "p_star {} exceeds p {}",
                self.p_star, self.p
            )));
        }
        if self.p_star == 0 || self.n == 0 {
            return Err(Error::InvalidArgument("p_star and n must be positive".into()));
        }
        if self.scenario == Scenario::B && self.p_star % 2 != 0 {
            return Err(Error::InvalidArgument(
                "scenario B needs an even p_star (half overlap)".into(),
            ));
        }
        if self.scenario != Scenario::A && 2 * self.p_star > self.p {
            return Err(Error::InvalidArgument(format!(
                "scenario {:?} needs 2·p_star ≤ p for fresh support indices",
                self.scenario
            )));
        }
        if !(0.0..1.0).contains(&self.rho) || self.sigma <= 0.0 || self.sigma_e < 0.0 {
            return Err(Error::InvalidArgument("bad rho/sigma/sigma_e".into()));
        }
        Ok(())
    }
}

/// Generate a synthetic benchmark draw: equicorrelated Gaussian covariates, a
/// sparse logistic treatment model `P(T=1) = sigmoid(Xγ)`, and linear
/// potential outcomes `Y(t) = Xβ₀ + t·Xβ_τ + ε`.
///
/// Supports: `supp(β₀) = supp(β_τ)` = the first `p*` columns; `supp(γ)`
/// overlaps it fully (A), half (B), or not at all (C). Nonzero β entries are
/// ±coef_scale with random signs; nonzero γ entries are ±c with c set so the
/// logit `Xγ` has unit standard deviation under the design covariance, which
/// keeps propensities off the 0/1 boundary.
pub fn generate_hdd(config: &HddConfig, stream: RngStream) -> Result<Dataset> {
    config.validate()?;
    let x = sample_equicorrelated(config.n, config.p, config.rho, config.sigma, stream.child(0))?;
    let mut rng = stream.child(1).rng();

    let support_beta: Vec<usize> = (0..config.p_star).collect();
    let support_gamma: Vec<usize> = match config.scenario {
        Scenario::A => support_beta.clone(),
        Scenario::B => {
            let half = config.p_star / 2;
            let mut s: Vec<usize> = (0..half).collect();
            s.extend(config.p_star..config.p_star + half);
            s
        }
        Scenario::C => (config.p_star..2 * config.p_star).collect(),
    };

    let coef_scale = config
        .coef_scale
        .unwrap_or(1.0 / (config.p_star as f64).sqrt());
    let mut beta0 = vec![0.0; config.p];
    let mut beta_tau = vec![0.0; config.p];
    for &j in &support_beta {
        beta0[j] = if rng.random_range(0.0..1.0) < 0.5 { -1.0 } else { 1.0 } * coef_scale;
    }
    for &j in &support_beta {
        beta_tau[j] = if rng.random_range(0.0..1.0) < 0.5 { -1.0 } else { 1.0 } * coef_scale;
    }
    // γ: ±c with c making sd(Xγ) = 1 under Σ = σ²[(1−ρ)I + ρ11ᵀ]:
    // Var(Xγ) = σ²[(1−ρ)Σγ_j² + ρ(Σγ_j)²]
    let signs: Vec<f64> = support_gamma
        .iter()
        .map(|_| if rng.random_range(0.0..1.0) < 0.5 { -1.0 } else { 1.0 })
        .collect();
    let sign_sum: f64 = signs.iter().sum();
    let var_unit = config.sigma * config.sigma
        * ((1.0 - config.rho) * config.p_star as f64 + config.rho * sign_sum * sign_sum);
    let c = 1.0 / var_unit.sqrt();
    let mut gamma = vec![0.0; config.p];
    for (k, &j) in support_gamma.iter().enumerate() {
        gamma[j] = signs[k] * c;
    }

    let n = config.n;
    let mut t = vec![0u8; n];
    let mut e_true = Array1::<f64>::zeros(n);
    let mut mu0 = Array1::<f64>::zeros(n);
    let mut mu1 = Array1::<f64>::zeros(n);
    let mut y = Array1::<f64>::zeros(n);
    for i in 0..n {
        let row = x.row(i);
        let logit: f64 = support_gamma.iter().map(|&j| gamma[j] * row[j]).sum();
        let e = 1.0 / (1.0 + (-logit).exp());
        e_true[i] = e;
        t[i] = u8::from(rng.random_range(0.0..1.0) < e);
        let xb0: f64 = support_beta.iter().map(|&j| beta0[j] * row[j]).sum();
        let xbt: f64 = support_beta.iter().map(|&j| beta_tau[j] * row[j]).sum();
        mu0[i] = xb0;
        mu1[i] = xb0 + xbt;
        let noise: f64 = rng.sample::<f64, _>(rand_distr::StandardNormal) * config.sigma_e;
        y[i] = if t[i] == 1 { mu1[i] } else { mu0[i] } + noise;
    }

    let mut ds = Dataset::new(x, t, y)?;
    ds.mu0 = Some(mu0);
    ds.mu1 = Some(mu1);
    ds.e_true = Some(e_true);
    Ok(ds)
}

/// Write the dataset in the documented CSV schema.
pub fn write_csv(ds: &Dataset, path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    let mut header = vec!["t".to_string(), "y".to_string()];
    if ds.mu0.is_some() {
        header.push("mu0".into());
    }
    if ds.mu1.is_some() {
        header.push("mu1".into());
    }
    if ds.e_true.is_some() {
        header.push("e".into());
    }
    if ds.randomized.is_some() {
        header.push("rand".into());
    }
    header.extend(ds.col_names.iter().cloned());
    w.write_record(&header).map_err(io_err)?;
    for i in 0..ds.n() {
        let mut rec = vec![ds.t[i].to_string(), format!("{}", ds.y[i])];
        if let Some(m) = &ds.mu0 {
            rec.push(format!("{}", m[i]));
        }
        if let Some(m) = &ds.mu1 {
            rec.push(format!("{}", m[i]));
        }
        if let Some(e) = &ds.e_true {
            rec.push(format!("{}", e[i]));
        }
        if let Some(r) = &ds.randomized {
            rec.push(r[i].to_string());
        }
        for j in 0..ds.p() {
            rec.push(format!("{}", ds.x[[i, j]]));
        }
        w.write_record(&rec).map_err(io_err)?;
    }
    w.flush()?;
    Ok(())
}

fn io_err(e: csv::Error) -> Error {
    Error::InvalidArgument(format!("csv write failed: {e}"))
}

/// Load a dataset from the documented CSV schema. Mandatory columns `t` and
/// `y`; covariates are the columns named `x1..xp`, which must appear in
/// order; `mu0`, `mu1`, `e`, `rand` are picked up by name.
pub fn load_csv(path: &Path) -> Result<Dataset> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_path(path)?;
    let headers: Vec<String> = rdr
        .headers()
        .map_err(|e| Error::Parse {
            line: 1,
            message: format!("missing header: {e}"),
        })?
        .iter()
        .map(|h| h.trim().to_string())
        .collect();

    let find = |name: &str| headers.iter().position(|h| h == name);
    let t_col = find("t").ok_or_else(|| Error::Parse {
        line: 1,
        message: "mandatory column `t` not found".into(),
    })?;
    let y_col = find("y").ok_or_else(|| Error::Parse {
        line: 1,
        message: "mandatory column `y` not found".into(),
    })?;
    let mu0_col = find("mu0");
    let mu1_col = find("mu1");
    let e_col = find("e");
    let rand_col = find("rand");

    let mut x_cols = Vec::new();
    let mut k = 1;
    while let Some(idx) = find(&format!("x{k}")) {
        x_cols.push(idx);
        k += 1;
    }
    if x_cols.is_empty() {
        return Err(Error::Parse {
            line: 1,
            message: "no covariate columns x1.. found".into(),
        });
    }
    for win in x_cols.windows(2) {
        if win[1] != win[0] + 1 {
            return Err(Error::Parse {
                line: 1,
                message: "covariate columns x1..xp must be contiguous".into(),
            });
        }
    }
    let p = x_cols.len();

    let expected_len = headers.len();
    let mut t = Vec::new();
    let mut y = Vec::new();
    let mut mu0 = Vec::new();
    let mut mu1 = Vec::new();
    let mut e_true = Vec::new();
    let mut randomized = Vec::new();
    let mut x_data: Vec<f64> = Vec::new();

    for (rec_idx, rec) in rdr.records().enumerate() {
        let line = rec_idx + 2; // 1-based, after the header
        let rec = rec.map_err(|e| Error::Parse {
            line,
            message: format!("{e}"),
        })?;
        if rec.len() != expected_len {
            return Err(Error::Parse {
                line,
                message: format!("expected {} fields, found {}", expected_len, rec.len()),
            });
        }
        let parse_f = |idx: usize| -> Result<f64> {
            rec[idx].trim().parse::<f64>().map_err(|_| Error::Parse {
                line,
                message: format!("non-numeric cell `{}` in column {}", &rec[idx], headers[idx]),
            })
        };
        let parse_flag = |idx: usize| -> Result<u8> {
            match rec[idx].trim() {
                "0" => Ok(0),
                "1" => Ok(1),
                other => {
                    // tolerate float-formatted flags like 1.0
                    match other.parse::<f64>() {
                        Ok(v) if v == 0.0 => Ok(0),
                        Ok(v) if v == 1.0 => Ok(1),
                        _ => Err(Error::Parse {
                            line,
                            message: format!("flag column must be 0/1, got `{other}`"),
                        }),
                    }
                }
            }
        };
        t.push(parse_flag(t_col)?);
        y.push(parse_f(y_col)?);
        if let Some(c) = mu0_col {
            mu0.push(parse_f(c)?);
        }
        if let Some(c) = mu1_col {
            mu1.push(parse_f(c)?);
        }
        if let Some(c) = e_col {
            e_true.push(parse_f(c)?);
        }
        if let Some(c) = rand_col {
            randomized.push(parse_flag(c)?);
        }
        for &c in &x_cols {
            x_data.push(parse_f(c)?);
        }
    }

    let n = t.len();
    let x = Array2::from_shape_vec((n, p), x_data)
        .map_err(|e| Error::InvalidArgument(format!("bad shape: {e}")))?;
    let mut ds = Dataset::new(x, t, Array1::from(y))?;
    if mu0_col.is_some() {
        ds.mu0 = Some(Array1::from(mu0));
    }
    if mu1_col.is_some() {
        ds.mu1 = Some(Array1::from(mu1));
    }
    if e_col.is_some() {
        ds.e_true = Some(Array1::from(e_true));
    }
    if rand_col.is_some() {
        ds.randomized = Some(randomized);
    }
    Ok(ds)
}

/// Non-fatal conditions attached to a split.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SplitWarning {
    EmptySplit(&'static str),
    SingleGroup(&'static str),
}

#[derive(Debug, Clone)]
pub struct SplitResult {
    pub train: Dataset,
    pub val: Dataset,
    pub test: Dataset,
    pub warnings: Vec<SplitWarning>,
}

/// Disjoint covering train/validation/test partition by shuffled indices.
///
/// Sizes come from rounding each N·f_k to the nearest integer and settling
/// any off-by-one total against the smallest (excess) or largest (deficit)
/// fraction, which lands within ±1 row of largest-remainder targets.
pub fn split(ds: &Dataset, fractions: (f64, f64, f64), stream: RngStream) -> Result<SplitResult> {
    let (f_train, f_val, f_test) = fractions;
    let fr = [f_train, f_val, f_test];
    if fr.iter().any(|&f| f < 0.0) {
        return Err(Error::InvalidArgument("fractions must be nonnegative".into()));
    }
    let total: f64 = fr.iter().sum();
    if (total - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidArgument(format!(
            "fractions must sum to 1, got {total}"
        )));
    }
    let n = ds.n();
    let mut sizes: Vec<usize> = fr.iter().map(|f| (f * n as f64).round() as usize).collect();
    loop {
        let s: usize = sizes.iter().sum();
        if s == n {
            break;
        }
        if s > n {
            // take from the smallest-fraction nonempty split
            let k = (0..3)
                .filter(|&k| sizes[k] > 0)
                .min_by(|&a, &b| fr[a].partial_cmp(&fr[b]).unwrap())
                .expect("nonempty");
            sizes[k] -= 1;
        } else {
            let k = (0..3)
                .max_by(|&a, &b| fr[a].partial_cmp(&fr[b]).unwrap())
                .expect("nonempty");
            sizes[k] += 1;
        }
    }

    let mut idx: Vec<usize> = (0..n).collect();
    let mut rng = stream.rng();
    // Fisher–Yates
    for i in (1..n).rev() {
        let j = rng.random_range(0..=i);
        idx.swap(i, j);
    }
    let train_idx = &idx[0..sizes[0]];
    let val_idx = &idx[sizes[0]..sizes[0] + sizes[1]];
    let test_idx = &idx[sizes[0] + sizes[1]..];

    let names = ["train", "val", "test"];
    let parts = [train_idx, val_idx, test_idx];
    let mut warnings = Vec::new();
    for (name, part) in names.iter().zip(parts.iter()) {
        if part.is_empty() {
            warnings.push(SplitWarning::EmptySplit(name));
        } else {
            let n1 = part.iter().filter(|&&i| ds.t[i] == 1).count();
            if n1 == 0 || n1 == part.len() {
                warnings.push(SplitWarning::SingleGroup(name));
            }
        }
    }

    Ok(SplitResult {
        train: ds.subset(train_idx),
        val: ds.subset(val_idx),
        test: ds.subset(test_idx),
        warnings,
    })
}

/// Surrogate per-unit effect by one-nearest-neighbor matching: for unit i the
/// nearest opposite-group unit j (Euclidean distance on standardized X, ties
/// to the lowest index) supplies the missing potential outcome, and the
/// surrogate ITE is `(2T_i−1)(Y_i − Y_j)`, signed treated-minus-control.
pub fn nn_match_ite(ds: &Dataset) -> Result<Array1<f64>> {
    let n = ds.n();
    let n1 = ds.n_treated();
    if n1 == 0 || n1 == n {
        return Err(Error::InvalidArgument(
            "1-NN matching needs both groups nonempty".into(),
        ));
    }
    let (xs, _, _) = standardize_columns(&ds.x);
    let mut out = Array1::<f64>::zeros(n);
    for i in 0..n {
        let want: u8 = 1 - ds.t[i];
        let mut best = usize::MAX;
        let mut best_d = f64::INFINITY;
        for j in 0..n {
            if ds.t[j] != want {
                continue;
            }
            let mut d = 0.0;
            for k in 0..ds.p() {
                let diff = xs[[i, k]] - xs[[j, k]];
                d += diff * diff;
                if d >= best_d {
                    break;
                }
            }
            if d < best_d {
                best_d = d;
                best = j;
            }
        }
        let sign = 2.0 * ds.t[i] as f64 - 1.0;
        out[i] = sign * (ds.y[i] - ds.y[best]);
    }
    Ok(out)
}

/// Mean squared difference between model ITE predictions and the 1-NN
/// surrogate; the selection criterion for continuous outcomes.
pub fn surrogate_pehe(predicted: &Array1<f64>, surrogate: &Array1<f64>) -> f64 {
    let n = predicted.len();
    predicted
        .iter()
        .zip(surrogate.iter())
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        / n as f64
}

/// Convenience: which estimand a dataset's outcome type suggests is not a
/// property of the data; exported here only to keep CLI code in one style.
pub fn parse_estimand(s: &str) -> Result<Estimand> {
    match s {
        "ate" => Ok(Estimand::Ate),
        "att" => Ok(Estimand::Att),
        other => Err(Error::InvalidArgument(format!("unknown estimand {other}"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn hdd_config(scenario: Scenario, n: usize, p: usize, p_star: usize, seed: u64) -> HddConfig {
        HddConfig {
            p,
            p_star,
            rho: 0.3,
            sigma: 1.0,
            sigma_e: 1.0,
            n,
            scenario,
            coef_scale: None,
            seed,
        }
    }

    #[test]
    fn hdd_supports_by_scenario() {
        // recover each unit's logit(e) and effect, then solve for the
        // coefficient vectors; the nonzero patterns must overlap per scenario
        for (scenario, want_shared) in [(Scenario::A, 20usize), (Scenario::B, 10), (Scenario::C, 0)]
        {
            let p_star = 20;
            let cfg = hdd_config(scenario, 200, 60, p_star, 9);
            let ds = generate_hdd(&cfg, RngStream::new(9, 0)).unwrap();
            assert_eq!((ds.n(), ds.p()), (200, 60));
            // β_τ via least squares of the exact ITE on X (exact: τ = Xβ_τ)
            let ite = ds.true_ite().unwrap();
            let mut beta_support = vec![false; 60];
            let mut gamma_support = vec![false; 60];
            let e = ds.e_true.as_ref().unwrap();
            let logit: Vec<f64> = e.iter().map(|&v| (v / (1.0 - v)).ln()).collect();
            // a column is in a support iff zeroing it breaks the exact linear
            // relation; with n >> p the residual of the best fit restricted
            // to the complement is nonzero. Cheap proxy: exact linearity means
            // each coefficient is recoverable by correlation against the
            // residual of the other columns; here supports are far sparser
            // than n, so test columns one at a time via partial fit residual.
            // Simpler and exact: the generator uses coef ±c (same |c|), so a
            // column j is in supp(β_τ) iff regressing ite on x_j alongside
            // all other support columns keeps a nonzero coefficient. Use the
            // normal equations on the full X (n=200 > p=60).
            let solve_ls = |target: &[f64]| -> Vec<f64> {
                let p = 60;
                let mut xtx = Array2::<f64>::zeros((p, p));
                let mut xty = Array1::<f64>::zeros(p);
                for i in 0..200 {
                    let row = ds.x.row(i);
                    for a in 0..p {
                        xty[a] += row[a] * target[i];
                        for b in a..p {
                            xtx[[a, b]] += row[a] * row[b];
                        }
                    }
                }
                for a in 0..p {
                    for b in a..p {
                        let v = xtx[[a, b]];
                        xtx[[b, a]] = v;
                    }
                }
                crate::numerics::solve_spd(&xtx, &xty).unwrap().to_vec()
            };
            let bt = solve_ls(&ite.to_vec());
            let gm = solve_ls(&logit);
            for j in 0..60 {
                beta_support[j] = bt[j].abs() > 1e-8;
                gamma_support[j] = gm[j].abs() > 1e-8;
            }
            assert_eq!(beta_support.iter().filter(|&&b| b).count(), p_star);
            assert_eq!(gamma_support.iter().filter(|&&b| b).count(), p_star);
            let shared = (0..60)
                .filter(|&j| beta_support[j] && gamma_support[j])
                .count();
            assert_eq!(shared, want_shared, "scenario {scenario:?}");
        }
    }

    #[test]
    fn hdd_true_ate_is_zero_mean() {
        let cfg = hdd_config(Scenario::A, 100_000, 30, 10, 13);
        let ds = generate_hdd(&cfg, RngStream::new(13, 0)).unwrap();
        let ite = ds.true_ite().unwrap();
        let mean = ite.sum() / ite.len() as f64;
        let var = ite.iter().map(|&v| (v - mean) * (v - mean)).sum::<f64>() / ite.len() as f64;
        let mc_se = (var / ite.len() as f64).sqrt();
        assert!(mean.abs() < 3.0 * mc_se, "mean {mean}, se {mc_se}");
    }

    #[test]
    fn hdd_null_effect_case() {
        let mut cfg = hdd_config(Scenario::A, 200, 20, 4, 17);
        cfg.sigma_e = 0.0;
        cfg.coef_scale = Some(0.5);
        let ds = generate_hdd(&cfg, RngStream::new(17, 0)).unwrap();
        // with sigma_e = 0, observed Y equals mu_T exactly
        for i in 0..ds.n() {
            let expect = if ds.t[i] == 1 {
                ds.mu1.as_ref().unwrap()[i]
            } else {
                ds.mu0.as_ref().unwrap()[i]
            };
            assert_eq!(ds.y[i], expect);
        }
    }

    #[test]
    fn hdd_rejects_impossible_scenario_c() {
        let cfg = hdd_config(Scenario::C, 10, 30, 20, 1);
        assert!(generate_hdd(&cfg, RngStream::new(1, 0)).is_err());
    }

    #[test]
    fn hdd_deterministic() {
        let cfg = hdd_config(Scenario::B, 100, 40, 10, 5);
        let a = generate_hdd(&cfg, RngStream::new(5, 0)).unwrap();
        let b = generate_hdd(&cfg, RngStream::new(5, 0)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn hdd_propensity_overlap() {
        let cfg = hdd_config(Scenario::A, 10_000, 50, 10, 23);
        let ds = generate_hdd(&cfg, RngStream::new(23, 0)).unwrap();
        let e = ds.e_true.as_ref().unwrap();
        let inside = e.iter().filter(|&&v| (0.02..=0.98).contains(&v)).count();
        assert!(
            inside as f64 >= 0.99 * ds.n() as f64,
            "only {inside}/10000 inside [0.02, 0.98]"
        );
    }

    #[test]
    fn csv_minimal_round_trip() {
        let dir = std::env::temp_dir().join("drrl_csv_minimal");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("mini.csv");
        std::fs::write(&path, "t,y,x1\n0,1.5,0.25\n1,-2.0,0.5\n").unwrap();
        let ds = load_csv(&path).unwrap();
        assert_eq!(ds.n(), 2);
        assert_eq!(ds.p(), 1);
        assert_eq!(ds.t, vec![0, 1]);
        assert_eq!(ds.y[1], -2.0);
        assert!(!ds.has_ground_truth());
    }

    #[test]
    fn csv_ground_truth_flag() {
        let dir = std::env::temp_dir().join("drrl_csv_gt");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("gt.csv");
        std::fs::write(&path, "t,y,mu0,mu1,x1\n0,1.0,0.9,1.9,0.1\n1,2.0,0.8,1.8,0.3\n").unwrap();
        let ds = load_csv(&path).unwrap();
        assert!(ds.has_ground_truth());
        let ite = ds.true_ite().unwrap();
        assert!((ite[0] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn csv_full_round_trip_is_exact() {
        let cfg = hdd_config(Scenario::B, 60, 12, 4, 31);
        let ds = generate_hdd(&cfg, RngStream::new(31, 0)).unwrap();
        let dir = std::env::temp_dir().join("drrl_csv_rt");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("rt.csv");
        write_csv(&ds, &path).unwrap();
        let back = load_csv(&path).unwrap();
        assert_eq!(ds, back);
    }

    #[test]
    fn csv_errors_carry_line_numbers() {
        let dir = std::env::temp_dir().join("drrl_csv_err");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("bad.csv");
        std::fs::write(&path, "t,y,x1\n0,1.0,0.5\n1,abc,0.2\n").unwrap();
        match load_csv(&path) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("expected parse error, got {other:?}"),
        }

        std::fs::write(&path, "t,y,x1\n0,1.0\n").unwrap();
        match load_csv(&path) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("expected ragged-row error, got {other:?}"),
        }

        std::fs::write(&path, "y,x1\n1.0,0.5\n").unwrap();
        assert!(matches!(load_csv(&path), Err(Error::Parse { line: 1, .. })));
    }

    #[test]
    fn split_sizes_match_worked_example() {
        let cfg = hdd_config(Scenario::A, 747, 10, 4, 41);
        let ds = generate_hdd(&cfg, RngStream::new(41, 0)).unwrap();
        let parts = split(&ds, (0.63, 0.27, 0.10), RngStream::new(41, 1)).unwrap();
        assert_eq!(parts.train.n(), 471);
        assert_eq!(parts.val.n(), 202);
        assert_eq!(parts.test.n(), 74);
    }

    #[test]
    fn split_sizes_within_one_of_largest_remainder() {
        let cfg = hdd_config(Scenario::A, 1000, 5, 2, 43);
        let ds = generate_hdd(&cfg, RngStream::new(43, 0)).unwrap();
        for fr in [(0.54, 0.21, 0.25), (0.63, 0.27, 0.10), (0.5, 0.3, 0.2)] {
            let parts = split(&ds, fr, RngStream::new(43, 1)).unwrap();
            let n = 1000.0;
            let quotas = [fr.0 * n, fr.1 * n, fr.2 * n];
            let floors: Vec<usize> = quotas.iter().map(|q| q.floor() as usize).collect();
            let mut rem: Vec<(usize, f64)> = quotas
                .iter()
                .enumerate()
                .map(|(k, q)| (k, q - q.floor()))
                .collect();
            rem.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap());
            let deficit = 1000 - floors.iter().sum::<usize>();
            let mut lr = floors.clone();
            for k in 0..deficit {
                lr[rem[k].0] += 1;
            }
            let got = [parts.train.n(), parts.val.n(), parts.test.n()];
            for k in 0..3 {
                assert!(
                    (got[k] as i64 - lr[k] as i64).abs() <= 1,
                    "{fr:?}: got {got:?}, largest-remainder {lr:?}"
                );
            }
        }
    }

    #[test]
    fn split_all_in_train_allowed_with_warnings() {
        let cfg = hdd_config(Scenario::A, 50, 5, 2, 47);
        let ds = generate_hdd(&cfg, RngStream::new(47, 0)).unwrap();
        let parts = split(&ds, (1.0, 0.0, 0.0), RngStream::new(47, 1)).unwrap();
        assert_eq!(parts.train.n(), 50);
        assert_eq!(parts.val.n(), 0);
        assert!(parts.warnings.contains(&SplitWarning::EmptySplit("val")));
        assert!(parts.warnings.contains(&SplitWarning::EmptySplit("test")));
    }

    #[test]
    fn split_deterministic() {
        let cfg = hdd_config(Scenario::A, 200, 5, 2, 53);
        let ds = generate_hdd(&cfg, RngStream::new(53, 0)).unwrap();
        let a = split(&ds, (0.6, 0.2, 0.2), RngStream::new(53, 1)).unwrap();
        let b = split(&ds, (0.6, 0.2, 0.2), RngStream::new(53, 1)).unwrap();
        assert_eq!(a.train, b.train);
        assert_eq!(a.val, b.val);
        assert_eq!(a.test, b.test);
    }

    #[test]
    fn nn_match_exact_duplicate_covariates() {
        // unit 0 (control) and unit 2 (treated) share covariates exactly
        let x = ndarray::arr2(&[[1.0, 2.0], [0.0, 0.0], [1.0, 2.0], [5.0, 5.0]]);
        let y = Array1::from(vec![1.0, 0.0, 3.5, 9.0]);
        let ds = Dataset::new(x, vec![0, 0, 1, 1], y).unwrap();
        let s = nn_match_ite(&ds).unwrap();
        // control unit 0: matched to treated duplicate → -(y0 - y2) = 2.5
        assert_eq!(s[0], 2.5);
        // treated unit 2: matched to control duplicate → y2 - y0 = 2.5
        assert_eq!(s[2], 2.5);
    }

    #[test]
    fn nn_match_matches_quadratic_scan_oracle() {
        let cfg = hdd_config(Scenario::A, 150, 6, 2, 59);
        let ds = generate_hdd(&cfg, RngStream::new(59, 0)).unwrap();
        let got = nn_match_ite(&ds).unwrap();
        // oracle: straightforward all-pairs scan without the early-exit
        let (xs, _, _) = standardize_columns(&ds.x);
        for i in 0..ds.n() {
            let mut best = usize::MAX;
            let mut best_d = f64::INFINITY;
            for j in 0..ds.n() {
                if ds.t[j] == ds.t[i] {
                    continue;
                }
                let d: f64 = (0..ds.p())
                    .map(|k| (xs[[i, k]] - xs[[j, k]]) * (xs[[i, k]] - xs[[j, k]]))
                    .sum();
                if d < best_d {
                    best_d = d;
                    best = j;
                }
            }
            let sign = 2.0 * ds.t[i] as f64 - 1.0;
            let expect = sign * (ds.y[i] - ds.y[best]);
            assert_eq!(got[i], expect, "unit {i}");
        }
    }

    #[test]
    fn nn_match_permutation_equivariant() {
        let cfg = hdd_config(Scenario::A, 80, 4, 2, 61);
        let ds = generate_hdd(&cfg, RngStream::new(61, 0)).unwrap();
        let s = nn_match_ite(&ds).unwrap();
        let perm: Vec<usize> = (0..80).rev().collect();
        let ds_perm = ds.subset(&perm);
        let s_perm = nn_match_ite(&ds_perm).unwrap();
        for (k, &i) in perm.iter().enumerate() {
            assert_eq!(s_perm[k], s[i]);
        }
    }

    #[test]
    fn nn_surrogate_unbiased_on_cloned_units() {
        // every unit has an exact opposite-group clone with Y = mu_t
        let base = ndarray::arr2(&[[0.5, 1.0], [2.0, -1.0], [-1.5, 0.25]]);
        let mut x = Array2::<f64>::zeros((6, 2));
        let mut t = vec![0u8; 6];
        let mut y = Array1::<f64>::zeros(6);
        let mut mu0v = Array1::<f64>::zeros(6);
        let mut mu1v = Array1::<f64>::zeros(6);
        for i in 0..3 {
            let m0 = base[[i, 0]] + base[[i, 1]];
            let m1 = m0 + 2.0 * base[[i, 0]];
            for (slot, ti) in [(2 * i, 0u8), (2 * i + 1, 1u8)] {
                x.row_mut(slot).assign(&base.row(i));
                t[slot] = ti;
                y[slot] = if ti == 1 { m1 } else { m0 };
                mu0v[slot] = m0;
                mu1v[slot] = m1;
            }
        }
        let mut ds = Dataset::new(x, t, y).unwrap();
        ds.mu0 = Some(mu0v);
        ds.mu1 = Some(mu1v);
        let s = nn_match_ite(&ds).unwrap();
        let truth = ds.true_ite().unwrap();
        for i in 0..6 {
            assert!((s[i] - truth[i]).abs() < 1e-12);
        }
    }
}
