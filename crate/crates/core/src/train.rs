//! Trainer for additive monotone models, plus ranking evaluation.
//!
//! Plain mini-batch gradient descent on the *raw* parameters: the monotone
//! reparameterization means every iterate — not just the final one —
//! satisfies the structural constraints. Training is single-threaded over
//! batches and fully determined by the seed.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::additive::{sigmoid, softplus, AdditiveMonotoneModel};
use crate::data::Dataset;
use crate::error::{Error, Result};

/// Gradient-descent settings for the logistic objective.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub seed: u64,
    /// Re-place each group link's knots at data quantiles of its weighted
    /// sum before the first step (they stay fixed afterwards).
    pub refit_knots: bool,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            epochs: 60,
            batch_size: 256,
            learning_rate: 0.5,
            seed: 0,
            refit_knots: true,
        }
    }
}

impl TrainConfig {
    fn validate(&self) -> Result<()> {
        if self.batch_size == 0 {
            return Err(Error::Config("batch size must be positive".into()));
        }
        if !self.learning_rate.is_finite() || self.learning_rate <= 0.0 {
            return Err(Error::Config(format!(
                "learning rate must be positive, got {}",
                self.learning_rate
            )));
        }
        Ok(())
    }
}

/// A trained model and the mean log-loss after each epoch (index 0 is the
/// pre-training loss).
#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub model: AdditiveMonotoneModel,
    pub loss_history: Vec<f64>,
}

/// Mean logistic log-loss of the model's scores on a dataset.
pub fn log_loss(model: &AdditiveMonotoneModel, data: &Dataset) -> f64 {
    let mut total = 0.0;
    for i in 0..data.len() {
        let f = model.value(data.row(i));
        total += if data.label(i) == 1 {
            softplus(-f)
        } else {
            softplus(f)
        };
    }
    total / data.len() as f64
}

/// Log-loss of the best constant predictor (the label prevalence); the floor
/// any useful model must beat.
pub fn constant_baseline_loss(labels: &[u8]) -> f64 {
    let n = labels.len() as f64;
    let pos = labels.iter().filter(|&&y| y == 1).count() as f64;
    let q = pos / n;
    let p = q.clamp(1e-12, 1.0 - 1e-12);
    -(q * p.ln() + (1.0 - q) * (1.0 - p).ln())
}

/// Trains a copy of the model; the input is untouched. Zero epochs return
/// the model unchanged (plus its initial loss).
pub fn train(
    model: &AdditiveMonotoneModel,
    data: &Dataset,
    config: &TrainConfig,
) -> Result<TrainOutcome> {
    config.validate()?;
    if data.is_empty() {
        return Err(Error::Training("dataset is empty".into()));
    }
    if data.dim() != model.space().dim() || !data.schema().same_geometry(model.space()) {
        return Err(Error::SpaceMismatch(
            "dataset schema differs from the model's feature space".into(),
        ));
    }

    let mut model = model.clone();
    if config.refit_knots && config.epochs > 0 {
        refit_knots(&mut model, data);
    }

    let mut history = Vec::with_capacity(config.epochs + 1);
    history.push(log_loss(&model, data));

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut order: Vec<usize> = (0..data.len()).collect();

    for epoch in 0..config.epochs {
        order.shuffle(&mut rng);
        for batch in order.chunks(config.batch_size) {
            step(&mut model, data, batch, config.learning_rate);
        }
        let loss = log_loss(&model, data);
        if !loss.is_finite() {
            return Err(Error::Training(format!(
                "loss diverged at epoch {epoch}; lower the learning rate"
            )));
        }
        history.push(loss);
    }

    Ok(TrainOutcome {
        model,
        loss_history: history,
    })
}

/// Knots at the k/(J+1) quantiles of the group's weighted sum over the data.
fn refit_knots(model: &mut AdditiveMonotoneModel, data: &Dataset) {
    for gi in 0..model.groups.len() {
        let mut zs: Vec<f64> = (0..data.len())
            .map(|i| model.groups[gi].z(data.row(i)))
            .collect();
        zs.sort_by(|a, b| a.total_cmp(b));
        if zs[0] == zs[zs.len() - 1] {
            continue; // degenerate column; keep the construction-time knots
        }
        let units = model.groups[gi].link.knots().len();
        let knots: Vec<f64> = (1..=units)
            .map(|j| {
                let q = j as f64 / (units + 1) as f64;
                let idx = ((zs.len() - 1) as f64 * q).round() as usize;
                zs[idx]
            })
            .collect();
        model.groups[gi].link.knots = knots;
    }
}

/// One gradient step on a batch; derived parameters are resynced afterwards
/// so the constraints hold at every iterate.
fn step(model: &mut AdditiveMonotoneModel, data: &Dataset, batch: &[usize], lr: f64) {
    let scale = lr / batch.len() as f64;

    let mut g_intercept = 0.0;
    let mut g_groups: Vec<(Vec<f64>, f64, Vec<f64>)> = model
        .groups
        .iter()
        .map(|g| {
            (
                vec![0.0; g.raw_weights.len()],
                0.0,
                vec![0.0; g.link.raw_coeffs.len()],
            )
        })
        .collect();
    let mut g_singles: Vec<[f64; 6]> = vec![[0.0; 6]; model.singles.len()];

    for &row in batch {
        let x = data.row(row);
        let err = sigmoid(model.value(x)) - data.label(row) as f64;
        g_intercept += err;

        for (g, grads) in model.groups.iter().zip(&mut g_groups) {
            let z = g.z(x);
            let slope = g.link.slope(z);
            // z = sum_j raw[j]^2 * prefix_x[j] with prefix_x[j] the sum of
            // the first j+1 member coordinates.
            let mut prefix = 0.0;
            for (j, &m) in g.members.iter().enumerate() {
                prefix += x[m];
                grads.0[j] += err * slope * 2.0 * g.raw_weights[j] * prefix;
            }
            grads.1 += err * 2.0 * g.link.raw_scale * z;
            for (j, &k) in g.link.knots().iter().enumerate() {
                grads.2[j] += err * 2.0 * g.link.raw_coeffs[j] * softplus(z - k);
            }
        }

        for (s, grads) in model.singles.iter().zip(&mut g_singles) {
            let xn = s.normalized_input(x[s.feature]);
            for u in 0..2 {
                let a = s.params[3 * u];
                let b = s.params[3 * u + 1];
                let c = s.params[3 * u + 2];
                if s.monotone {
                    let (ae, be) = (a * a, b * b);
                    let t = (be * xn + c).tanh();
                    let dt = 1.0 - t * t;
                    grads[3 * u] += err * t * 2.0 * a;
                    grads[3 * u + 1] += err * ae * dt * xn * 2.0 * b;
                    grads[3 * u + 2] += err * ae * dt;
                } else {
                    let t = (b * xn + c).tanh();
                    let dt = 1.0 - t * t;
                    grads[3 * u] += err * t;
                    grads[3 * u + 1] += err * a * dt * xn;
                    grads[3 * u + 2] += err * a * dt;
                }
            }
        }
    }

    model.intercept -= scale * g_intercept;
    for (g, grads) in model.groups.iter_mut().zip(&g_groups) {
        for (w, d) in g.raw_weights.iter_mut().zip(&grads.0) {
            *w -= scale * d;
        }
        g.link.raw_scale -= scale * grads.1;
        for (c, d) in g.link.raw_coeffs.iter_mut().zip(&grads.2) {
            *c -= scale * d;
        }
    }
    for (s, grads) in model.singles.iter_mut().zip(&g_singles) {
        for (p, d) in s.params.iter_mut().zip(grads) {
            *p -= scale * d;
        }
    }
    model.sync();
}

/// Area under the ROC curve by the midrank (Mann-Whitney) method: the
/// probability that a random positive outranks a random negative, ties
/// counted one half.
pub fn auc(scores: &[f64], labels: &[u8]) -> Result<f64> {
    if scores.len() != labels.len() {
        return Err(Error::DimensionMismatch {
            expected: labels.len(),
            actual: scores.len(),
        });
    }
    let n = scores.len();
    let positives = labels.iter().filter(|&&y| y == 1).count();
    let negatives = n - positives;
    if positives == 0 || negatives == 0 {
        return Err(Error::UndefinedMetric(
            "ranking quality needs both classes present".into(),
        ));
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));

    // Midranks over tie groups.
    let mut rank = vec![0.0; n];
    let mut i = 0;
    while i < n {
        let mut j = i;
        while j + 1 < n && scores[order[j + 1]] == scores[order[i]] {
            j += 1;
        }
        let mid = (i + j) as f64 / 2.0 + 1.0;
        for &idx in &order[i..=j] {
            rank[idx] = mid;
        }
        i = j + 1;
    }

    let rank_sum_pos: f64 = (0..n).filter(|&i| labels[i] == 1).map(|i| rank[i]).sum();
    let u = rank_sum_pos - positives as f64 * (positives as f64 + 1.0) / 2.0;
    Ok(u / (positives as f64 * negatives as f64))
}
