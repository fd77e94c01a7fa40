//! Pairwise preference comparators.
//!
//! The built-in backend is a logistic-loss linear model over hashed,
//! side-tagged n-grams. Predictions are symmetrized so that
//! `predict(a, b) + predict(b, a) == 1` holds exactly; anything that
//! implements [`Comparator`] can stand in for it.

mod features;
mod persist;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use features::{featurize_pair, FeatureVector, PreparedText, DEFAULT_DIM};
pub use persist::{load_model, model_from_bytes, model_to_bytes, save_model, ModelIoError, FORMAT_VERSION, MAGIC};

use crate::pairs::{Criterion, PreferencePair};
use features::{length_diff_index, pair_vector, shared_index, shared_tokens, Side};

/// A pairwise scorer: probability that the first text is preferred.
pub trait Comparator: Sync {
    type Prepared: Sync;

    fn prepare(&self, text: &str) -> Self::Prepared;

    fn predict_prepared(&self, a: &Self::Prepared, b: &Self::Prepared) -> f64;

    fn predict(&self, text_a: &str, text_b: &str) -> f64 {
        self.predict_prepared(&self.prepare(text_a), &self.prepare(text_b))
    }
}

/// Turns two raw order-dependent probabilities into a symmetric pair.
/// The smaller side is snapped to a multiple of 2^-52 so that its
/// complement is exact and the two orientations sum to exactly 1.
pub fn symmetrize(s_ab: f64, s_ba: f64) -> f64 {
    let d = s_ab - s_ba;
    if d == 0.0 || d.is_nan() {
        return 0.5;
    }
    const GRID: f64 = 4_503_599_627_370_496.0; // 2^52
    let lo = ((0.5 - 0.5 * d.abs()) * GRID).round() / GRID;
    if d > 0.0 {
        1.0 - lo
    } else {
        lo
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Hyper {
    pub learning_rate: f64,
    pub epochs: u32,
    pub l2: f64,
    pub seed: u64,
}

impl Default for Hyper {
    fn default() -> Self {
        Hyper {
            learning_rate: 0.1,
            epochs: 5,
            l2: 1e-6,
            seed: 0,
        }
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum ComparatorError {
    #[error("training set is empty")]
    EmptyTrainingSet,
    #[error("test set is empty")]
    EmptyTestSet,
    #[error("invalid hyperparameters: {0}")]
    InvalidHyper(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComparatorModel {
    pub weights: Vec<f64>,
    pub bias: f64,
    pub dim: usize,
    pub criterion: Criterion,
    pub outlet_id: String,
    pub hyper: Hyper,
    pub version: u8,
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// Numerically stable `-log sigmoid(z)` for label 1 (pass `-z` for label 0).
fn log_loss(z: f64) -> f64 {
    if z > 0.0 {
        (-z).exp().ln_1p()
    } else {
        -z + z.exp().ln_1p()
    }
}

impl ComparatorModel {
    /// Raw (unsymmetrized) probability that `a` beats `b`.
    pub fn raw_score(&self, a: &PreparedText, b: &PreparedText) -> f64 {
        let mut z = self.bias;
        for &i in a.grams(Side::A) {
            z += self.weights[i as usize];
        }
        for &i in b.grams(Side::B) {
            z += self.weights[i as usize];
        }
        z += self.weights[shared_index(self.dim)] * shared_tokens(a, b) as f64;
        z += self.weights[length_diff_index(self.dim)] * (a.token_count() as f64 - b.token_count() as f64);
        sigmoid(z)
    }
}

impl Comparator for ComparatorModel {
    type Prepared = PreparedText;

    fn prepare(&self, text: &str) -> PreparedText {
        PreparedText::new(text, self.dim)
    }

    fn predict_prepared(&self, a: &PreparedText, b: &PreparedText) -> f64 {
        symmetrize(self.raw_score(a, b), self.raw_score(b, a))
    }
}

/// Symmetrized preference probability that `text_a` beats `text_b`.
pub fn predict(model: &ComparatorModel, text_a: &str, text_b: &str) -> f64 {
    model.predict(text_a, text_b)
}

pub fn train(pairs: &[PreferencePair], hyper: &Hyper) -> Result<ComparatorModel, ComparatorError> {
    train_with_history(pairs, hyper, DEFAULT_DIM).map(|(m, _)| m)
}

/// Plain SGD on the logistic loss, one shuffled pass per epoch. L2 decay is
/// applied through a global weight scale so each step touches only the
/// active features. Returns the model and the mean training loss after
/// each epoch.
pub fn train_with_history(
    pairs: &[PreferencePair],
    hyper: &Hyper,
    dim: usize,
) -> Result<(ComparatorModel, Vec<f64>), ComparatorError> {
    if pairs.is_empty() {
        return Err(ComparatorError::EmptyTrainingSet);
    }
    if !(hyper.learning_rate > 0.0 && hyper.learning_rate.is_finite()) {
        return Err(ComparatorError::InvalidHyper("learning_rate must be positive".into()));
    }
    if hyper.epochs == 0 {
        return Err(ComparatorError::InvalidHyper("epochs must be positive".into()));
    }
    if !(hyper.l2 >= 0.0 && hyper.learning_rate * hyper.l2 < 1.0) {
        return Err(ComparatorError::InvalidHyper("l2 must be >= 0 and lr * l2 < 1".into()));
    }
    if !dim.is_power_of_two() || dim < 4 || dim > u32::MAX as usize {
        return Err(ComparatorError::InvalidHyper("dim must be a power of two in [4, 2^32)".into()));
    }

    let samples: Vec<(FeatureVector, f64)> = pairs
        .iter()
        .map(|p| {
            let a = PreparedText::new(&p.text_a, dim);
            let b = PreparedText::new(&p.text_b, dim);
            (pair_vector(&a, &b, dim), p.label as f64)
        })
        .collect();

    let mut v = vec![0.0; dim];
    let mut scale = 1.0;
    let mut bias = 0.0;
    let decay = 1.0 - hyper.learning_rate * hyper.l2;
    let mut order: Vec<usize> = (0..samples.len()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(hyper.seed);
    let mut history = Vec::with_capacity(hyper.epochs as usize);

    for _ in 0..hyper.epochs {
        order.shuffle(&mut rng);
        for &k in &order {
            let (x, y) = &samples[k];
            let z = scale * x.dot(&v) + bias;
            let g = sigmoid(z) - y;
            scale *= decay;
            let step = hyper.learning_rate * g / scale;
            for (&i, &xi) in &x.values {
                v[i as usize] -= step * xi;
            }
            bias -= hyper.learning_rate * g;
            if scale < 1e-9 {
                v.iter_mut().for_each(|w| *w *= scale);
                scale = 1.0;
            }
        }
        let loss = samples
            .iter()
            .map(|(x, y)| {
                let z = scale * x.dot(&v) + bias;
                if *y > 0.5 {
                    log_loss(z)
                } else {
                    log_loss(-z)
                }
            })
            .sum::<f64>()
            / samples.len() as f64;
        history.push(loss);
    }

    let weights: Vec<f64> = v.into_iter().map(|w| w * scale).collect();
    let outlet_id = if pairs.iter().all(|p| p.outlet_id == pairs[0].outlet_id) {
        pairs[0].outlet_id.clone()
    } else {
        "mixed".to_string()
    };
    Ok((
        ComparatorModel {
            weights,
            bias,
            dim,
            criterion: pairs[0].criterion,
            outlet_id,
            hyper: *hyper,
            version: FORMAT_VERSION,
        },
        history,
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub accuracy: f64,
    pub f1: f64,
    pub precision: f64,
    pub recall: f64,
    pub n: usize,
}

impl Metrics {
    /// Standard definitions; undefined ratios are reported as 0.
    pub fn from_confusion(tp: usize, fp: usize, tn: usize, fn_: usize) -> Metrics {
        let n = tp + fp + tn + fn_;
        let ratio = |num: usize, den: usize| if den == 0 { 0.0 } else { num as f64 / den as f64 };
        let precision = ratio(tp, tp + fp);
        let recall = ratio(tp, tp + fn_);
        let f1 = if precision > 0.0 && recall > 0.0 {
            2.0 * precision * recall / (precision + recall)
        } else {
            0.0
        };
        Metrics {
            accuracy: ratio(tp + tn, n),
            f1,
            precision,
            recall,
            n,
        }
    }
}

/// Label 1 is the positive class; a pair is predicted positive when
/// `p >= 0.5`.
pub fn evaluate<C: Comparator>(model: &C, test_pairs: &[PreferencePair]) -> Result<Metrics, ComparatorError> {
    if test_pairs.is_empty() {
        return Err(ComparatorError::EmptyTestSet);
    }
    let (mut tp, mut fp, mut tn, mut fn_) = (0, 0, 0, 0);
    for pair in test_pairs {
        let positive = model.predict(&pair.text_a, &pair.text_b) >= 0.5;
        match (positive, pair.label == 1) {
            (true, true) => tp += 1,
            (true, false) => fp += 1,
            (false, false) => tn += 1,
            (false, true) => fn_ += 1,
        }
    }
    Ok(Metrics::from_confusion(tp, fp, tn, fn_))
}
