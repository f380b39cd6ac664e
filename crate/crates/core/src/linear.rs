//! Linear SVM, SVR and logistic regression trained from scratch.
//!
//! The normal vector of a linear model is an interpretable direction; a full
//! rotation is obtained by completing it to an orthogonal basis.
//!
//! SVM and SVR use Pegasos-style stochastic subgradient descent on
//! `λ/2 ‖θ‖² + 1/n Σ loss_i` with `λ = 1/(C·n)`, which has the same minimizer
//! as `½‖θ‖² + C Σ loss_i`. The bias is handled as an extra constant feature
//! and is therefore regularized together with the weights. Samples are
//! visited in a freshly shuffled order each epoch and the returned model is
//! the running average of all iterates.
//!
//! Logistic regression uses full-batch gradient descent with step `1/L`,
//! `L` being the smoothness constant of the objective; its bias is not
//! regularized.

use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;
use std::str::FromStr;

use rand::seq::SliceRandom;

use crate::densray::{
    header_token, join_floats, parse_floats, BinarySignal, ContinuousSignal, Method, Rotation,
};
use crate::eigen::complete_orthogonal;
use crate::embedding::Embeddings;
use crate::error::{Error, Result};
use crate::linalg::{dot, norm};
use crate::seed;

/// Step-size schedule for the stochastic trainers.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Schedule {
    /// `η_t = 1/(λ·t)`.
    Pegasos,
}

impl fmt::Display for Schedule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Schedule::Pegasos => f.write_str("pegasos"),
        }
    }
}

impl FromStr for Schedule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "pegasos" => Ok(Schedule::Pegasos),
            _ => Err(Error::InvalidArgument(format!("unknown schedule `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Hyperparams {
    /// Regularization trade-off `C > 0`.
    pub c: f64,
    /// Insensitivity width for SVR, in standardized target units.
    pub epsilon: f64,
    pub epochs: usize,
    pub schedule: Schedule,
    pub seed: u64,
    /// Weight samples by inverse class frequency (SVM, logistic regression).
    pub balanced: bool,
}

impl Default for Hyperparams {
    fn default() -> Self {
        Hyperparams {
            c: 1.0,
            epsilon: 0.1,
            epochs: 100,
            schedule: Schedule::Pegasos,
            seed: 0,
            balanced: false,
        }
    }
}

impl Hyperparams {
    fn validate(&self) -> Result<()> {
        if !(self.c > 0.0 && self.c.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "C must be positive, got {}",
                self.c
            )));
        }
        if !(self.epsilon >= 0.0 && self.epsilon.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "epsilon must be non-negative, got {}",
                self.epsilon
            )));
        }
        if self.epochs == 0 {
            return Err(Error::InvalidArgument("epochs must be positive".into()));
        }
        Ok(())
    }
}

/// Feature rows with real targets. For classification the targets are
/// `±1`, positives being `+1`.
#[derive(Debug, Clone)]
pub struct Dataset {
    rows: Vec<Vec<f64>>,
    targets: Vec<f64>,
}

impl Dataset {
    pub fn new(rows: Vec<Vec<f64>>, targets: Vec<f64>) -> Result<Self> {
        if rows.len() != targets.len() {
            return Err(Error::DimensionMismatch {
                expected: rows.len(),
                got: targets.len(),
            });
        }
        if rows.is_empty() {
            return Err(Error::Empty("training set".into()));
        }
        let d = rows[0].len();
        for r in &rows {
            if r.len() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    got: r.len(),
                });
            }
            if !r.iter().all(|v| v.is_finite()) {
                return Err(Error::NonFinite("training row".into()));
            }
        }
        if !targets.iter().all(|v| v.is_finite()) {
            return Err(Error::NonFinite("training target".into()));
        }
        Ok(Dataset { rows, targets })
    }

    /// Positives get `+1`, negatives `−1`.
    pub fn binary(positives: Vec<Vec<f64>>, negatives: Vec<Vec<f64>>) -> Result<Self> {
        if positives.is_empty() {
            return Err(Error::Empty("positive class".into()));
        }
        if negatives.is_empty() {
            return Err(Error::Empty("negative class".into()));
        }
        let mut targets = vec![1.0; positives.len()];
        targets.resize(positives.len() + negatives.len(), -1.0);
        let rows = positives.into_iter().chain(negatives).collect();
        Dataset::new(rows, targets)
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.rows[0].len()
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    pub fn targets(&self) -> &[f64] {
        &self.targets
    }

    fn class_weights(&self, balanced: bool) -> Vec<f64> {
        if !balanced {
            return vec![1.0; self.len()];
        }
        let n = self.len() as f64;
        let n_pos = self.targets.iter().filter(|&&y| y > 0.0).count() as f64;
        let n_neg = n - n_pos;
        self.targets
            .iter()
            .map(|&y| {
                if y > 0.0 {
                    n / (2.0 * n_pos)
                } else {
                    n / (2.0 * n_neg)
                }
            })
            .collect()
    }
}

/// Weights, bias and, after each epoch, the objective of the best epoch-end
/// averaged iterate so far.
#[derive(Debug, Clone)]
pub struct Fit {
    pub weights: Vec<f64>,
    pub bias: f64,
    pub objective_history: Vec<f64>,
}

fn hinge(margin: f64) -> f64 {
    (1.0 - margin).max(0.0)
}

/// `½(‖w‖² + b²) + C Σ s_i max(0, 1 − y_i(w·x_i + b))`, the objective the
/// SVM trainer minimizes.
pub fn svm_objective(data: &Dataset, weights: &[f64], bias: f64, c: f64, balanced: bool) -> f64 {
    let s = data.class_weights(balanced);
    let loss: f64 = data
        .rows
        .iter()
        .zip(&data.targets)
        .zip(&s)
        .map(|((x, y), si)| si * hinge(y * (dot(weights, x) + bias)))
        .sum();
    0.5 * (dot(weights, weights) + bias * bias) + c * loss
}

/// `½(‖w‖² + b²) + C Σ max(0, |w·x_i + b − z_i| − ε)` on the given targets.
pub fn svr_objective(data: &Dataset, weights: &[f64], bias: f64, c: f64, epsilon: f64) -> f64 {
    let loss: f64 = data
        .rows
        .iter()
        .zip(&data.targets)
        .map(|(x, z)| ((dot(weights, x) + bias - z).abs() - epsilon).max(0.0))
        .sum();
    0.5 * (dot(weights, weights) + bias * bias) + c * loss
}

#[derive(Clone, Copy)]
enum Loss {
    Hinge,
    EpsilonInsensitive(f64),
}

impl Loss {
    /// Derivative of the loss with respect to the prediction.
    fn slope(self, prediction: f64, target: f64) -> f64 {
        match self {
            Loss::Hinge => {
                if target * prediction < 1.0 {
                    -target
                } else {
                    0.0
                }
            }
            Loss::EpsilonInsensitive(eps) => {
                let r = prediction - target;
                if r > eps {
                    1.0
                } else if r < -eps {
                    -1.0
                } else {
                    0.0
                }
            }
        }
    }
}

/// Pegasos over the augmented vector `θ = (w, b)`.
///
/// The running average of the iterates is evaluated at the end of every
/// epoch and kept only if it lowers the objective, so the returned model is
/// the best epoch-end average and the recorded history never increases.
fn pegasos(
    data: &Dataset,
    hp: &Hyperparams,
    loss: Loss,
    sample_weights: &[f64],
    objective: impl Fn(&[f64], f64) -> f64,
) -> Result<Fit> {
    let n = data.len();
    let d = data.dim();
    let lambda = 1.0 / (hp.c * n as f64);
    let mean_weight = sample_weights.iter().sum::<f64>() / n as f64;
    let radius = (2.0 * mean_weight / lambda).sqrt();

    let mut theta = vec![0.0; d + 1];
    let mut avg = vec![0.0; d + 1];
    let mut order: Vec<usize> = (0..n).collect();
    let mut rng = seed::rng(hp.seed);
    let mut history = Vec::with_capacity(hp.epochs);
    let mut t: u64 = 0;
    let mut best: Option<(f64, Vec<f64>)> = None;

    for _ in 0..hp.epochs {
        order.shuffle(&mut rng);
        for &i in &order {
            t += 1;
            let eta = match hp.schedule {
                Schedule::Pegasos => 1.0 / (lambda * t as f64),
            };
            let x = &data.rows[i];
            let prediction = dot(&theta[..d], x) + theta[d];
            let slope = loss.slope(prediction, data.targets[i]) * sample_weights[i];
            let shrink = 1.0 - eta * lambda;
            theta.iter_mut().for_each(|v| *v *= shrink);
            if slope != 0.0 {
                for (v, xi) in theta[..d].iter_mut().zip(x) {
                    *v -= eta * slope * xi;
                }
                theta[d] -= eta * slope;
            }
            let tn = norm(&theta);
            if tn > radius {
                let f = radius / tn;
                theta.iter_mut().for_each(|v| *v *= f);
            }
            let w = 1.0 / t as f64;
            for (a, v) in avg.iter_mut().zip(&theta) {
                *a += w * (v - *a);
            }
        }
        let obj = objective(&avg[..d], avg[d]);
        if !obj.is_finite() {
            return Err(Error::Divergence("objective became non-finite".into()));
        }
        if best.as_ref().is_none_or(|(b, _)| obj < *b) {
            best = Some((obj, avg.clone()));
        }
        history.push(best.as_ref().map_or(obj, |(b, _)| *b));
    }

    let (_, mut kept) = best.expect("at least one epoch");
    let bias = kept.pop().unwrap_or(0.0);
    Ok(Fit {
        weights: kept,
        bias,
        objective_history: history,
    })
}

/// Soft-margin linear SVM on `±1` targets.
pub fn fit_svm(data: &Dataset, hp: &Hyperparams) -> Result<Fit> {
    hp.validate()?;
    if data.targets.iter().any(|&y| y != 1.0 && y != -1.0) {
        return Err(Error::InvalidArgument("SVM targets must be ±1".into()));
    }
    if !data.targets.contains(&1.0) || !data.targets.contains(&-1.0) {
        return Err(Error::Empty("class".into()));
    }
    let s = data.class_weights(hp.balanced);
    pegasos(data, hp, Loss::Hinge, &s, |w, b| {
        svm_objective(data, w, b, hp.c, hp.balanced)
    })
}

/// ε-insensitive linear regression. Targets are standardized internally;
/// the returned weights and bias predict on the original scale, while the
/// objective history refers to the standardized problem.
pub fn fit_svr(data: &Dataset, hp: &Hyperparams) -> Result<Fit> {
    hp.validate()?;
    let n = data.len() as f64;
    let mean = data.targets.iter().sum::<f64>() / n;
    let var = data.targets.iter().map(|t| (t - mean).powi(2)).sum::<f64>() / n;
    let std = var.sqrt();
    if std == 0.0 || data.len() < 2 {
        return Err(Error::InvalidArgument(
            "SVR targets must not be constant".into(),
        ));
    }
    let standardized = Dataset {
        rows: data.rows.clone(),
        targets: data.targets.iter().map(|t| (t - mean) / std).collect(),
    };
    let s = vec![1.0; data.len()];
    let fit = pegasos(
        &standardized,
        hp,
        Loss::EpsilonInsensitive(hp.epsilon),
        &s,
        |w, b| svr_objective(&standardized, w, b, hp.c, hp.epsilon),
    )?;
    Ok(Fit {
        weights: fit.weights.iter().map(|w| w * std).collect(),
        bias: fit.bias * std + mean,
        objective_history: fit.objective_history,
    })
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// `log(1 + e^{-m})` without overflow.
fn log1p_exp_neg(m: f64) -> f64 {
    if m > 0.0 {
        (-m).exp().ln_1p()
    } else {
        -m + m.exp().ln_1p()
    }
}

/// `λ/2 ‖w‖² + 1/n Σ s_i log(1 + exp(−y_i(w·x_i + b)))` with `λ = 1/(C·n)`.
pub fn logreg_objective(data: &Dataset, weights: &[f64], bias: f64, hp: &Hyperparams) -> f64 {
    let n = data.len() as f64;
    let lambda = 1.0 / (hp.c * n);
    let s = data.class_weights(hp.balanced);
    let nll: f64 = data
        .rows
        .iter()
        .zip(&data.targets)
        .zip(&s)
        .map(|((x, y), si)| si * log1p_exp_neg(y * (dot(weights, x) + bias)))
        .sum();
    0.5 * lambda * dot(weights, weights) + nll / n
}

/// Analytic gradient of [`logreg_objective`] as `(∂w, ∂b)`.
pub fn logreg_gradient(
    data: &Dataset,
    weights: &[f64],
    bias: f64,
    hp: &Hyperparams,
) -> (Vec<f64>, f64) {
    let n = data.len() as f64;
    let lambda = 1.0 / (hp.c * n);
    let s = data.class_weights(hp.balanced);
    let mut gw: Vec<f64> = weights.iter().map(|w| lambda * w).collect();
    let mut gb = 0.0;
    for ((x, y), si) in data.rows.iter().zip(&data.targets).zip(&s) {
        let m = y * (dot(weights, x) + bias);
        let coef = -si * y * sigmoid(-m) / n;
        gw.iter_mut().zip(x).for_each(|(g, xi)| *g += coef * xi);
        gb += coef;
    }
    (gw, gb)
}

/// L2-regularized logistic regression on `±1` targets; the model's
/// probability is that of the `+1` class.
pub fn fit_logreg(data: &Dataset, hp: &Hyperparams) -> Result<Fit> {
    hp.validate()?;
    if data.targets.iter().any(|&y| y != 1.0 && y != -1.0) {
        return Err(Error::InvalidArgument("logistic targets must be ±1".into()));
    }
    let n = data.len() as f64;
    let s = data.class_weights(hp.balanced);
    let lambda = 1.0 / (hp.c * n);
    let smoothness = lambda
        + data
            .rows
            .iter()
            .zip(&s)
            .map(|(x, si)| si * (dot(x, x) + 1.0))
            .sum::<f64>()
            / (4.0 * n);
    let step = 1.0 / smoothness;

    let mut w = vec![0.0; data.dim()];
    let mut b = 0.0;
    let mut history = Vec::with_capacity(hp.epochs);
    for _ in 0..hp.epochs {
        let (gw, gb) = logreg_gradient(data, &w, b, hp);
        w.iter_mut().zip(&gw).for_each(|(wi, g)| *wi -= step * g);
        b -= step * gb;
        let obj = logreg_objective(data, &w, b, hp);
        if !obj.is_finite() || !w.iter().all(|v| v.is_finite()) {
            return Err(Error::Divergence("logistic regression".into()));
        }
        history.push(obj);
    }
    Ok(Fit {
        weights: w,
        bias: b,
        objective_history: history,
    })
}

/// A trained linear model.
#[derive(Debug, Clone)]
pub struct LinearModel {
    pub weights: Vec<f64>,
    pub bias: f64,
    pub kind: Method,
    pub hyperparams: Hyperparams,
    pub signal_name: String,
}

impl LinearModel {
    pub fn dim(&self) -> usize {
        self.weights.len()
    }

    /// `w·x + b`.
    pub fn decision(&self, x: &[f64]) -> f64 {
        dot(&self.weights, x) + self.bias
    }

    /// `σ(w·x + b)`; meaningful for logistic models.
    pub fn predict_proba(&self, x: &[f64]) -> f64 {
        sigmoid(self.decision(x))
    }

    /// Writes the model text format:
    ///
    /// ```text
    /// linear <d> <kind> <signal_name> c=<C> epsilon=<ε> epochs=<n> schedule=<s> seed=<seed> balanced=<bool>
    /// <bias>
    /// <d weights>
    /// ```
    pub fn write_to<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        let hp = &self.hyperparams;
        writeln!(
            out,
            "linear {} {} {} c={:e} epsilon={:e} epochs={} schedule={} seed={} balanced={}",
            self.dim(),
            self.kind,
            header_token(&self.signal_name),
            hp.c,
            hp.epsilon,
            hp.epochs,
            hp.schedule,
            hp.seed,
            hp.balanced
        )?;
        writeln!(out, "{}", join_floats(&[self.bias]))?;
        writeln!(out, "{}", join_floats(&self.weights))?;
        out.flush()
    }

    pub fn read_from<R: BufRead>(reader: R) -> Result<Self> {
        let mut lines = reader.lines();
        let mut next_line = |no: usize| -> Result<String> {
            match lines.next() {
                Some(l) => l
                    .map(|l| l.trim_end_matches('\r').to_string())
                    .map_err(|e| Error::io("<model>", e)),
                None => Err(Error::parse(no, "unexpected end of model file")),
            }
        };
        let header = next_line(1)?;
        let fields: Vec<&str> = header.split(' ').collect();
        if fields.len() != 10 || fields[0] != "linear" {
            return Err(Error::parse(1, "malformed model header"));
        }
        let bad = |what: &str| Error::parse(1, format!("invalid {what}"));
        let d: usize = fields[1].parse().map_err(|_| bad("dimension"))?;
        let kind: Method = fields[2].parse().map_err(|_| bad("kind"))?;
        let signal_name = fields[3].to_string();
        let value = |i: usize, key: &str| -> Result<&str> {
            fields[i]
                .strip_prefix(key)
                .and_then(|r| r.strip_prefix('='))
                .ok_or_else(|| bad(key))
        };
        let hyperparams = Hyperparams {
            c: value(4, "c")?.parse().map_err(|_| bad("c"))?,
            epsilon: value(5, "epsilon")?.parse().map_err(|_| bad("epsilon"))?,
            epochs: value(6, "epochs")?.parse().map_err(|_| bad("epochs"))?,
            schedule: value(7, "schedule")?.parse()?,
            seed: value(8, "seed")?.parse().map_err(|_| bad("seed"))?,
            balanced: value(9, "balanced")?.parse().map_err(|_| bad("balanced"))?,
        };
        let bias = parse_floats(&next_line(2)?, 2)?;
        if bias.len() != 1 {
            return Err(Error::parse(2, "expected a single bias value"));
        }
        let weights = parse_floats(&next_line(3)?, 3)?;
        if weights.len() != d {
            return Err(Error::parse(3, format!("expected {d} weights")));
        }
        Ok(LinearModel {
            weights,
            bias: bias[0],
            kind,
            hyperparams,
            signal_name,
        })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        self.write_to(BufWriter::new(file))
            .map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        Self::read_from(BufReader::new(file))
    }
}

fn require_normalized(emb: &Embeddings) -> Result<()> {
    if emb.matrix().is_normalized() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(
            "embeddings must be row-normalized".into(),
        ))
    }
}

fn lookup_rows(emb: &Embeddings, tokens: &[String]) -> Result<Vec<Vec<f64>>> {
    tokens
        .iter()
        .map(|t| emb.index(t).map(|i| emb.matrix().row(i).to_vec()))
        .collect()
}

fn binary_dataset(emb: &Embeddings, signal: &BinarySignal) -> Result<Dataset> {
    require_normalized(emb)?;
    Dataset::binary(
        lookup_rows(emb, signal.positives())?,
        lookup_rows(emb, signal.negatives())?,
    )
}

fn model(fit: Fit, kind: Method, hp: &Hyperparams, name: &str) -> LinearModel {
    LinearModel {
        weights: fit.weights,
        bias: fit.bias,
        kind,
        hyperparams: *hp,
        signal_name: name.to_string(),
    }
}

pub fn train_svm(emb: &Embeddings, signal: &BinarySignal, hp: &Hyperparams) -> Result<LinearModel> {
    let data = binary_dataset(emb, signal)?;
    Ok(model(fit_svm(&data, hp)?, Method::Svm, hp, &signal.name))
}

pub fn train_svr(
    emb: &Embeddings,
    signal: &ContinuousSignal,
    hp: &Hyperparams,
) -> Result<LinearModel> {
    require_normalized(emb)?;
    let (tokens, scores): (Vec<String>, Vec<f64>) = signal.scores().iter().cloned().unzip();
    let data = Dataset::new(lookup_rows(emb, &tokens)?, scores)?;
    Ok(model(fit_svr(&data, hp)?, Method::Svr, hp, &signal.name))
}

pub fn train_logreg(
    emb: &Embeddings,
    signal: &BinarySignal,
    hp: &Hyperparams,
) -> Result<LinearModel> {
    let data = binary_dataset(emb, signal)?;
    Ok(model(
        fit_logreg(&data, hp)?,
        Method::LogReg,
        hp,
        &signal.name,
    ))
}

/// Rotation whose first column is the model's unit normal and whose other
/// columns are a seeded random orthonormal basis of its orthogonal
/// complement.
pub fn model_to_rotation(model: &LinearModel, d: usize, seed: u64) -> Result<Rotation> {
    if model.dim() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            got: model.dim(),
        });
    }
    let n = norm(&model.weights);
    if n == 0.0 || !n.is_finite() {
        return Err(Error::ZeroVector);
    }
    let direction: Vec<f64> = model.weights.iter().map(|w| w / n).collect();
    let q = complete_orthogonal(&direction, seed)?;
    Rotation::new(q, None, model.kind, model.signal_name.clone())
}
