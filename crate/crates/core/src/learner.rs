//! Small deterministic classifiers trained with mini-batch SGD on
//! cross-entropy: multinomial logistic regression and a one-hidden-layer
//! ReLU MLP. These stand in for the large vision models a real audit would
//! target; what matters here is that training is fast, differentiable, and
//! a pure function of (dataset, config).

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

#[cfg(not(feature = "std"))]
use num_traits::Float;
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha12Rng;

use crate::seed;
use crate::synthdata::{Dataset, LabeledExample};

/// Probabilities are clamped to [PROB_CLAMP, 1 - PROB_CLAMP] before any
/// log or logit transform; the logit diverges at {0, 1}.
pub const PROB_CLAMP: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "arch", rename_all = "snake_case"))]
pub enum LearnerArch {
    LogisticRegression,
    Mlp { hidden: usize },
}

/// Training hyperparameters. `seed` drives weight init and the per-epoch
/// reshuffle, making `train` deterministic.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct LearnerConfig {
    pub arch: LearnerArch,
    pub epochs: usize,
    pub learning_rate: f64,
    pub batch_size: usize,
    pub l2: f64,
    pub seed: u64,
}

impl LearnerConfig {
    pub fn validate(&self) -> Result<(), TrainError> {
        if self.epochs == 0 {
            return Err(TrainError::BadConfig("epochs must be >= 1"));
        }
        if self.batch_size == 0 {
            return Err(TrainError::BadConfig("batch_size must be >= 1"));
        }
        if !(self.learning_rate > 0.0) {
            return Err(TrainError::BadConfig("learning_rate must be > 0"));
        }
        if self.l2 < 0.0 {
            return Err(TrainError::BadConfig("l2 must be >= 0"));
        }
        if let LearnerArch::Mlp { hidden } = self.arch {
            if hidden == 0 {
                return Err(TrainError::BadConfig("hidden units must be >= 1"));
            }
        }
        Ok(())
    }

    /// Copy with a different seed; used to derive per-shadow configs.
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum TrainError {
    EmptyDataset,
    BadConfig(&'static str),
    NonFinite { epoch: usize, batch: usize },
    Data(crate::synthdata::DataError),
}

impl fmt::Display for TrainError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TrainError::EmptyDataset => write!(f, "cannot train on an empty dataset"),
            TrainError::BadConfig(msg) => write!(f, "invalid learner config: {msg}"),
            TrainError::NonFinite { epoch, batch } => {
                write!(f, "non-finite weights after epoch {epoch} batch {batch}")
            }
            TrainError::Data(e) => write!(f, "invalid training data: {e}"),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for TrainError {}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EvalError {
    DimMismatch { expected: usize, got: usize },
}

impl fmt::Display for EvalError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EvalError::DimMismatch { expected, got } => {
                write!(f, "input dimension {got} does not match model dimension {expected}")
            }
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for EvalError {}

/// Layer weights. Matrices are stored row-major, one row per output unit.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "kind", rename_all = "snake_case"))]
pub enum ModelWeights {
    Linear {
        w: Vec<Vec<f64>>, // C x d
        b: Vec<f64>,      // C
    },
    Mlp {
        w1: Vec<Vec<f64>>, // h x d
        b1: Vec<f64>,      // h
        w2: Vec<Vec<f64>>, // C x h
        b2: Vec<f64>,      // C
    },
}

/// A trained classifier: immutable after `train`, safe to share.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TrainedModel {
    pub weights: ModelWeights,
    pub config: LearnerConfig,
    pub train_ids: Vec<u64>,
    pub final_train_loss: f64,
    pub dim: usize,
    pub num_classes: usize,
}

/// Numerically stable softmax (max-shifted); sums to 1 up to rounding.
pub fn softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits.iter().map(|&v| (v - max).exp()).collect();
    let sum: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / sum).collect()
}

/// Clamp a probability away from {0, 1} for log/logit transforms.
pub fn clamp_prob(p: f64) -> f64 {
    p.clamp(PROB_CLAMP, 1.0 - PROB_CLAMP)
}

/// Modified prediction entropy: the entropy-like statistic with the
/// true-class probability reflected,
/// −(1−p_y)·log(p_y) − Σ_{c≠y} p_c·log(1−p_c).
/// Zero for a one-hot correct prediction and maximal for a confident
/// wrong one, so lower values indicate member-like behavior.
pub fn modified_entropy(probs: &[f64], label: usize) -> f64 {
    let mut acc = 0.0;
    for (c, &p) in probs.iter().enumerate() {
        if c == label {
            acc -= (1.0 - p) * clamp_prob(p).ln();
        } else {
            acc -= p * clamp_prob(1.0 - p).ln();
        }
    }
    acc
}

fn uniform_init(rng: &mut ChaCha12Rng, fan_in: usize) -> impl FnMut() -> f64 + '_ {
    let bound = 1.0 / (fan_in as f64).sqrt();
    move || rng.gen_range(-bound..=bound)
}

fn init_weights(arch: LearnerArch, dim: usize, classes: usize, rng: &mut ChaCha12Rng) -> ModelWeights {
    match arch {
        LearnerArch::LogisticRegression => {
            let mut draw = uniform_init(rng, dim);
            let w = (0..classes).map(|_| (0..dim).map(|_| draw()).collect()).collect();
            let b = (0..classes).map(|_| draw()).collect();
            ModelWeights::Linear { w, b }
        }
        LearnerArch::Mlp { hidden } => {
            let (w1, b1) = {
                let mut draw = uniform_init(rng, dim);
                let w1 = (0..hidden).map(|_| (0..dim).map(|_| draw()).collect()).collect();
                let b1 = (0..hidden).map(|_| draw()).collect();
                (w1, b1)
            };
            let (w2, b2) = {
                let mut draw = uniform_init(rng, hidden);
                let w2 = (0..classes).map(|_| (0..hidden).map(|_| draw()).collect()).collect();
                let b2 = (0..classes).map(|_| draw()).collect();
                (w2, b2)
            };
            ModelWeights::Mlp { w1, b1, w2, b2 }
        }
    }
}

fn mat_vec(w: &[Vec<f64>], b: &[f64], x: &[f64]) -> Vec<f64> {
    w.iter()
        .zip(b)
        .map(|(row, bias)| row.iter().zip(x).map(|(wi, xi)| wi * xi).sum::<f64>() + bias)
        .collect()
}

impl TrainedModel {
    fn check_dim(&self, x: &[f64]) -> Result<(), EvalError> {
        if x.len() != self.dim {
            return Err(EvalError::DimMismatch { expected: self.dim, got: x.len() });
        }
        Ok(())
    }

    /// Pre-softmax class scores.
    pub fn logits(&self, x: &[f64]) -> Result<Vec<f64>, EvalError> {
        self.check_dim(x)?;
        Ok(match &self.weights {
            ModelWeights::Linear { w, b } => mat_vec(w, b, x),
            ModelWeights::Mlp { w1, b1, w2, b2 } => {
                let mut h = mat_vec(w1, b1, x);
                for v in &mut h {
                    *v = v.max(0.0);
                }
                mat_vec(w2, b2, &h)
            }
        })
    }

    pub fn probabilities(&self, x: &[f64]) -> Result<Vec<f64>, EvalError> {
        Ok(softmax(&self.logits(x)?))
    }

    /// Argmax class; ties broken by the lowest class index.
    pub fn predict(&self, x: &[f64]) -> Result<usize, EvalError> {
        let logits = self.logits(x)?;
        let mut best = 0;
        for (i, &v) in logits.iter().enumerate() {
            if v > logits[best] {
                best = i;
            }
        }
        Ok(best)
    }

    /// Softmax probability of the example's true label, unclamped.
    pub fn true_class_prob(&self, ex: &LabeledExample) -> Result<f64, EvalError> {
        Ok(self.probabilities(&ex.features)?[ex.label])
    }

    /// Cross-entropy loss -log p(y | x), clamped away from infinity.
    pub fn loss(&self, ex: &LabeledExample) -> Result<f64, EvalError> {
        Ok(-clamp_prob(self.true_class_prob(ex)?).ln())
    }

    /// Hidden-layer features after ReLU; identity features for logistic
    /// regression.
    pub fn penultimate(&self, x: &[f64]) -> Result<Vec<f64>, EvalError> {
        self.check_dim(x)?;
        Ok(match &self.weights {
            ModelWeights::Linear { .. } => x.to_vec(),
            ModelWeights::Mlp { w1, b1, .. } => {
                let mut h = mat_vec(w1, b1, x);
                for v in &mut h {
                    *v = v.max(0.0);
                }
                h
            }
        })
    }

    /// All weights flattened in a fixed order (layer by layer, row-major,
    /// biases after their matrix).
    pub fn weights_flat(&self) -> Vec<f64> {
        let mut out = Vec::new();
        match &self.weights {
            ModelWeights::Linear { w, b } => {
                for row in w {
                    out.extend_from_slice(row);
                }
                out.extend_from_slice(b);
            }
            ModelWeights::Mlp { w1, b1, w2, b2 } => {
                for row in w1 {
                    out.extend_from_slice(row);
                }
                out.extend_from_slice(b1);
                for row in w2 {
                    out.extend_from_slice(row);
                }
                out.extend_from_slice(b2);
            }
        }
        out
    }

    /// Inverse of [`weights_flat`](Self::weights_flat). Panics if the
    /// length does not match the architecture.
    pub fn set_weights_flat(&mut self, flat: &[f64]) {
        let mut it = flat.iter().copied();
        let mut fill = |row: &mut Vec<f64>| {
            for v in row.iter_mut() {
                *v = it.next().expect("flat weight vector too short");
            }
        };
        match &mut self.weights {
            ModelWeights::Linear { w, b } => {
                for row in w.iter_mut() {
                    fill(row);
                }
                fill(b);
            }
            ModelWeights::Mlp { w1, b1, w2, b2 } => {
                for row in w1.iter_mut() {
                    fill(row);
                }
                fill(b1);
                for row in w2.iter_mut() {
                    fill(row);
                }
                fill(b2);
            }
        }
        assert!(it.next().is_none(), "flat weight vector too long");
    }

    /// Analytic gradient of the cross-entropy loss at `ex` with respect to
    /// every weight, flattened in [`weights_flat`](Self::weights_flat)
    /// order. No regularization term.
    pub fn loss_gradient(&self, ex: &LabeledExample) -> Result<Vec<f64>, EvalError> {
        self.check_dim(&ex.features)?;
        let x = &ex.features;
        Ok(match &self.weights {
            ModelWeights::Linear { w, b } => {
                let p = softmax(&mat_vec(w, b, x));
                let mut dlogit = p;
                dlogit[ex.label] -= 1.0;
                let mut g = Vec::with_capacity(w.len() * x.len() + b.len());
                for d in &dlogit {
                    g.extend(x.iter().map(|xi| d * xi));
                }
                g.extend_from_slice(&dlogit);
                g
            }
            ModelWeights::Mlp { w1, b1, w2, b2 } => {
                let pre = mat_vec(w1, b1, x);
                let h: Vec<f64> = pre.iter().map(|v| v.max(0.0)).collect();
                let p = softmax(&mat_vec(w2, b2, &h));
                let mut dlogit = p;
                dlogit[ex.label] -= 1.0;
                // Backprop into the hidden layer through ReLU.
                let mut dh = vec![0.0; h.len()];
                for (row, d) in w2.iter().zip(&dlogit) {
                    for (dhj, w2j) in dh.iter_mut().zip(row) {
                        *dhj += d * w2j;
                    }
                }
                for (dhj, prej) in dh.iter_mut().zip(&pre) {
                    if *prej <= 0.0 {
                        *dhj = 0.0;
                    }
                }
                let mut g = Vec::new();
                for d in &dh {
                    g.extend(x.iter().map(|xi| d * xi));
                }
                g.extend_from_slice(&dh);
                for d in &dlogit {
                    g.extend(h.iter().map(|hi| d * hi));
                }
                g.extend_from_slice(&dlogit);
                g
            }
        })
    }

    /// Mean cross-entropy over a dataset.
    pub fn mean_loss(&self, dataset: &Dataset) -> Result<f64, EvalError> {
        let mut total = 0.0;
        for ex in &dataset.examples {
            total += self.loss(ex)?;
        }
        Ok(total / dataset.len().max(1) as f64)
    }

    /// Fraction of `dataset` classified correctly.
    pub fn accuracy(&self, dataset: &Dataset) -> Result<f64, EvalError> {
        let mut correct = 0usize;
        for ex in &dataset.examples {
            if self.predict(&ex.features)? == ex.label {
                correct += 1;
            }
        }
        Ok(correct as f64 / dataset.len().max(1) as f64)
    }
}

/// Mini-batch SGD on cross-entropy with L2 weight decay.
///
/// Deterministic: weight init and every epoch's shuffle come from a
/// ChaCha stream seeded by `config.seed`, and examples are visited in the
/// dataset's canonical id order before shuffling.
pub fn train(dataset: &Dataset, config: &LearnerConfig) -> Result<TrainedModel, TrainError> {
    config.validate()?;
    if dataset.is_empty() {
        return Err(TrainError::EmptyDataset);
    }
    dataset.validate().map_err(TrainError::Data)?;

    let dim = dataset.dim;
    let classes = dataset.num_classes;
    let mut rng = seed::rng_from(seed::mix(&[config.seed]));
    let mut model = TrainedModel {
        weights: init_weights(config.arch, dim, classes, &mut rng),
        config: *config,
        train_ids: dataset.ids(),
        final_train_loss: 0.0,
        dim,
        num_classes: classes,
    };

    let n = dataset.len();
    let mut order: Vec<usize> = (0..n).collect();
    let mut grad_acc = vec![0.0f64; model.weights_flat().len()];

    for epoch in 0..config.epochs {
        order.shuffle(&mut rng);
        for (batch_idx, batch) in order.chunks(config.batch_size).enumerate() {
            grad_acc.iter_mut().for_each(|g| *g = 0.0);
            for &i in batch {
                let g = model
                    .loss_gradient(&dataset.examples[i])
                    .expect("dims checked by validate");
                for (acc, gi) in grad_acc.iter_mut().zip(&g) {
                    *acc += gi;
                }
            }
            let scale = config.learning_rate / batch.len() as f64;
            let decay = config.learning_rate * config.l2;
            let mut flat = model.weights_flat();
            let mut finite = true;
            for (w, g) in flat.iter_mut().zip(&grad_acc) {
                *w -= scale * g + decay * *w;
                finite &= w.is_finite();
            }
            if !finite {
                return Err(TrainError::NonFinite { epoch, batch: batch_idx });
            }
            model.set_weights_flat(&flat);
        }
    }

    model.final_train_loss = model.mean_loss(dataset).expect("dims checked");
    Ok(model)
}
