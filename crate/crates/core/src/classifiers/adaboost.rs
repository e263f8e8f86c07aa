use log::warn;
use serde::{Deserialize, Serialize};

use super::{argmax, wrap, ClassifierError, ModelParams, Standardizer, TrainConfig, TrainedModel};
use crate::dataset::LabeledDataset;

/// Vote cast for a stump that classifies the training set perfectly.
pub const PERFECT_ALPHA: f64 = 10.0;

/// h(x) = polarity if x[feature] > threshold, else -polarity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Stump {
    pub feature: usize,
    pub threshold: f64,
    pub polarity: f64,
    pub alpha: f64,
    /// Weighted training error when the stump was chosen.
    pub error: f64,
}

impl Stump {
    pub fn vote(&self, x: &[f64]) -> f64 {
        if x[self.feature] > self.threshold {
            self.polarity
        } else {
            -self.polarity
        }
    }
}

/// A boosted binary ensemble: positive scores mean the +1 class.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ensemble {
    pub stumps: Vec<Stump>,
}

impl Ensemble {
    pub fn score(&self, x: &[f64]) -> f64 {
        self.stumps.iter().map(|s| s.alpha * s.vote(x)).sum()
    }

    /// Σα per feature over the rounds that selected it.
    pub fn feature_weights(&self, n_features: usize) -> Vec<f64> {
        let mut w = vec![0.0; n_features];
        for s in &self.stumps {
            w[s.feature] += s.alpha;
        }
        w
    }

    /// Π 2√(ε(1−ε)) after each round.
    pub fn error_bounds(&self) -> Vec<f64> {
        let mut acc = 1.0;
        self.stumps
            .iter()
            .map(|s| {
                acc *= 2.0 * (s.error * (1.0 - s.error)).sqrt();
                acc
            })
            .collect()
    }
}

/// The stump with the lowest weighted error over every feature and every
/// midpoint between consecutive distinct values. Ties keep the earliest
/// feature, then the lowest threshold, then polarity +1.
pub fn best_stump(x: &[Vec<f64>], y: &[f64], w: &[f64]) -> Option<(usize, f64, f64, f64)> {
    let d = x.first().map_or(0, Vec::len);
    let total_pos: f64 = y.iter().zip(w).filter(|(l, _)| **l > 0.0).map(|(_, v)| v).sum();
    let total_neg: f64 = y.iter().zip(w).filter(|(l, _)| **l < 0.0).map(|(_, v)| v).sum();
    let mut best: Option<(usize, f64, f64, f64)> = None;
    for j in 0..d {
        let mut idx: Vec<usize> = (0..x.len()).collect();
        idx.sort_by(|&a, &b| x[a][j].total_cmp(&x[b][j]).then(a.cmp(&b)));
        // weights at or below the current split
        let (mut pos_le, mut neg_le) = (0.0, 0.0);
        let mut k = 0;
        while k < idx.len() {
            let v = x[idx[k]][j];
            while k < idx.len() && x[idx[k]][j] == v {
                let i = idx[k];
                if y[i] > 0.0 {
                    pos_le += w[i];
                } else {
                    neg_le += w[i];
                }
                k += 1;
            }
            if k == idx.len() {
                break;
            }
            let thr = 0.5 * (v + x[idx[k]][j]);
            // polarity +1 predicts +1 above the threshold
            let err_plus = pos_le + (total_neg - neg_le);
            let err_minus = neg_le + (total_pos - pos_le);
            for (err, pol) in [(err_plus, 1.0), (err_minus, -1.0)] {
                if best.is_none_or(|b| err < b.3) {
                    best = Some((j, thr, pol, err));
                }
            }
        }
    }
    best
}

/// Discrete AdaBoost on labels in {+1, −1}. Stops early after a perfect
/// stump; a first round without any stump below error 0.5 is an error,
/// later ones end training.
pub fn boost(x: &[Vec<f64>], y: &[f64], rounds: usize) -> Result<Ensemble, ClassifierError> {
    let n = x.len();
    let mut w = vec![1.0 / n as f64; n];
    let mut stumps = vec![];
    for round in 0..rounds {
        let Some((feature, threshold, polarity, err)) = best_stump(x, y, &w) else {
            if round == 0 {
                return Err(ClassifierError::NoWeakLearner(0.5));
            }
            break;
        };
        let err = err.max(0.0);
        if err >= 0.5 {
            if round == 0 {
                return Err(ClassifierError::NoWeakLearner(err));
            }
            warn!("boosting stopped after {round} rounds: best stump error {err:.6}");
            break;
        }
        let alpha = if err <= 0.0 {
            PERFECT_ALPHA
        } else {
            0.5 * ((1.0 - err) / err).ln()
        };
        let s = Stump {
            feature,
            threshold,
            polarity,
            alpha,
            error: err,
        };
        stumps.push(s);
        if err <= 0.0 {
            break;
        }
        for i in 0..n {
            w[i] *= (-alpha * y[i] * s.vote(&x[i])).exp();
        }
        let z: f64 = w.iter().sum();
        for v in w.iter_mut() {
            *v /= z;
        }
    }
    Ok(Ensemble { stumps })
}

/// Binary ensembles for two classes (class 1 is +1); one-vs-rest
/// ensembles otherwise.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoostModel {
    pub n_features: usize,
    pub ensembles: Vec<Ensemble>,
}

impl BoostModel {
    pub fn predict(&self, x: &[f64]) -> usize {
        if self.ensembles.len() == 1 {
            return usize::from(self.ensembles[0].score(x) > 0.0);
        }
        argmax(&self.ensembles.iter().map(|e| e.score(x)).collect::<Vec<_>>())
    }

    pub fn feature_weights(&self) -> Vec<f64> {
        let mut w = vec![0.0; self.n_features];
        for e in &self.ensembles {
            for (a, b) in w.iter_mut().zip(e.feature_weights(self.n_features)) {
                *a += b;
            }
        }
        w
    }
}

pub fn train_adaboost(data: &LabeledDataset, rounds: usize) -> Result<TrainedModel, ClassifierError> {
    let present = data.class_counts().iter().filter(|&&c| c > 0).count();
    if present < 2 {
        return Err(ClassifierError::NotBinary(present));
    }
    let st = Standardizer::fit(data.rows());
    let x = st.transform_all(data.rows());
    let targets: Vec<usize> = if data.n_classes() == 2 {
        vec![1]
    } else {
        (0..data.n_classes()).collect()
    };
    let ensembles = targets
        .iter()
        .map(|&c| {
            let y: Vec<f64> = data
                .labels()
                .iter()
                .map(|&l| if l == c { 1.0 } else { -1.0 })
                .collect();
            if y.iter().all(|&v| v < 0.0) {
                return Ok(Ensemble { stumps: vec![] });
            }
            boost(&x, &y, rounds)
        })
        .collect::<Result<Vec<_>, _>>()?;
    let cfg = TrainConfig {
        boost_rounds: rounds,
        ..TrainConfig::default()
    };
    Ok(wrap(
        data,
        &cfg,
        st,
        ModelParams::Adaboost(BoostModel {
            n_features: data.n_features(),
            ensembles,
        }),
    ))
}
