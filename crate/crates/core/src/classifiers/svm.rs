use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{argmax, require_classes, wrap, ClassifierError, ModelParams, Standardizer, TrainConfig, TrainedModel};
use crate::dataset::LabeledDataset;

/// One-vs-rest linear SVMs. Row c of `weights` holds the bias first, then
/// one weight per feature.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SvmModel {
    pub weights: Vec<Vec<f64>>,
}

impl SvmModel {
    pub fn margins(&self, x: &[f64]) -> Vec<f64> {
        self.weights
            .iter()
            .map(|w| w[0] + w[1..].iter().zip(x).map(|(a, b)| a * b).sum::<f64>())
            .collect()
    }

    pub fn predict(&self, x: &[f64]) -> usize {
        argmax(&self.margins(x))
    }
}

/// Pegasos subgradient descent on λ/2‖w‖² + mean hinge loss, with the bias
/// treated as a weight on a constant input. One shuffled pass per epoch.
fn pegasos(x: &[Vec<f64>], y: &[f64], lambda: f64, epochs: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let d = x.first().map_or(0, Vec::len);
    let mut w = vec![0.0; d + 1];
    let mut order: Vec<usize> = (0..x.len()).collect();
    let mut t = 0usize;
    for _ in 0..epochs {
        order.shuffle(rng);
        for &i in &order {
            t += 1;
            let eta = 1.0 / (lambda * t as f64);
            let margin = y[i] * (w[0] + w[1..].iter().zip(&x[i]).map(|(a, b)| a * b).sum::<f64>());
            let shrink = 1.0 - eta * lambda;
            for v in w.iter_mut() {
                *v *= shrink;
            }
            if margin < 1.0 {
                w[0] += eta * y[i];
                for (v, xi) in w[1..].iter_mut().zip(&x[i]) {
                    *v += eta * y[i] * xi;
                }
            }
        }
    }
    w
}

pub fn train_msvm(data: &LabeledDataset, cfg: &TrainConfig) -> Result<TrainedModel, ClassifierError> {
    require_classes(data)?;
    let st = Standardizer::fit(data.rows());
    let x = st.transform_all(data.rows());
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let weights = (0..data.n_classes())
        .map(|c| {
            let y: Vec<f64> = data
                .labels()
                .iter()
                .map(|&l| if l == c { 1.0 } else { -1.0 })
                .collect();
            pegasos(&x, &y, cfg.svm_lambda, cfg.svm_epochs, &mut rng)
        })
        .collect();
    Ok(wrap(data, cfg, st, ModelParams::Msvm(SvmModel { weights })))
}
