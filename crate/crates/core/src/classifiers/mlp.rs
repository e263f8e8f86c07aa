use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{argmax, require_classes, wrap, ClassifierError, ModelParams, Standardizer, TrainConfig, TrainedModel};
use crate::dataset::LabeledDataset;

/// One logistic hidden layer and a softmax output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlpModel {
    /// hidden × inputs
    pub w1: Vec<Vec<f64>>,
    pub b1: Vec<f64>,
    /// classes × hidden
    pub w2: Vec<Vec<f64>>,
    pub b2: Vec<f64>,
}

fn sigmoid(z: f64) -> f64 {
    1.0 / (1.0 + (-z).exp())
}

fn softmax(z: &[f64]) -> Vec<f64> {
    let m = z.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let e: Vec<f64> = z.iter().map(|v| (v - m).exp()).collect();
    let s: f64 = e.iter().sum();
    e.into_iter().map(|v| v / s).collect()
}

impl MlpModel {
    pub fn init(inputs: usize, hidden: usize, classes: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut u = |n: usize| -> Vec<f64> { (0..n).map(|_| rng.gen_range(-0.5..=0.5)).collect() };
        let w1 = (0..hidden).map(|_| u(inputs)).collect();
        let b1 = u(hidden);
        let w2 = (0..classes).map(|_| u(hidden)).collect();
        let b2 = u(classes);
        MlpModel { w1, b1, w2, b2 }
    }

    fn forward(&self, x: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let h: Vec<f64> = self
            .w1
            .iter()
            .zip(&self.b1)
            .map(|(w, b)| sigmoid(b + w.iter().zip(x).map(|(a, c)| a * c).sum::<f64>()))
            .collect();
        let z: Vec<f64> = self
            .w2
            .iter()
            .zip(&self.b2)
            .map(|(w, b)| b + w.iter().zip(&h).map(|(a, c)| a * c).sum::<f64>())
            .collect();
        (h, softmax(&z))
    }

    pub fn probabilities(&self, x: &[f64]) -> Vec<f64> {
        self.forward(x).1
    }

    pub fn predict(&self, x: &[f64]) -> usize {
        argmax(&self.probabilities(x))
    }

    /// Mean cross-entropy over the batch and its gradient.
    pub fn loss_and_grad(&self, xs: &[Vec<f64>], ys: &[usize]) -> (f64, MlpModel) {
        let n = xs.len() as f64;
        let mut g = MlpModel {
            w1: self.w1.iter().map(|r| vec![0.0; r.len()]).collect(),
            b1: vec![0.0; self.b1.len()],
            w2: self.w2.iter().map(|r| vec![0.0; r.len()]).collect(),
            b2: vec![0.0; self.b2.len()],
        };
        let mut loss = 0.0;
        for (x, &y) in xs.iter().zip(ys) {
            let (h, p) = self.forward(x);
            loss -= p[y].max(1e-300).ln();
            let dz: Vec<f64> = p
                .iter()
                .enumerate()
                .map(|(c, &pc)| (pc - if c == y { 1.0 } else { 0.0 }) / n)
                .collect();
            let mut dh = vec![0.0; h.len()];
            for (c, &d) in dz.iter().enumerate() {
                g.b2[c] += d;
                for (j, &hj) in h.iter().enumerate() {
                    g.w2[c][j] += d * hj;
                    dh[j] += d * self.w2[c][j];
                }
            }
            for (j, &hj) in h.iter().enumerate() {
                let da = dh[j] * hj * (1.0 - hj);
                g.b1[j] += da;
                for (i, &xi) in x.iter().enumerate() {
                    g.w1[j][i] += da * xi;
                }
            }
        }
        (loss / n, g)
    }

    pub fn loss(&self, xs: &[Vec<f64>], ys: &[usize]) -> f64 {
        let n = xs.len() as f64;
        xs.iter()
            .zip(ys)
            .map(|(x, &y)| -self.probabilities(x)[y].max(1e-300).ln())
            .sum::<f64>()
            / n
    }

    /// All parameters in a fixed order: w1, b1, w2, b2.
    pub fn to_flat(&self) -> Vec<f64> {
        let mut v: Vec<f64> = self.w1.iter().flatten().copied().collect();
        v.extend(&self.b1);
        v.extend(self.w2.iter().flatten());
        v.extend(&self.b2);
        v
    }

    pub fn from_flat(&self, v: &[f64]) -> MlpModel {
        let mut it = v.iter().copied();
        let mut take = |n: usize| -> Vec<f64> { it.by_ref().take(n).collect() };
        let w1 = self.w1.iter().map(|r| take(r.len())).collect();
        let b1 = take(self.b1.len());
        let w2 = self.w2.iter().map(|r| take(r.len())).collect();
        let b2 = take(self.b2.len());
        MlpModel { w1, b1, w2, b2 }
    }

    fn step(&mut self, g: &MlpModel, lr: f64) {
        let upd = |p: &mut Vec<f64>, d: &Vec<f64>| {
            for (a, b) in p.iter_mut().zip(d) {
                *a -= lr * b;
            }
        };
        self.w1.iter_mut().zip(&g.w1).for_each(|(p, d)| upd(p, d));
        upd(&mut self.b1, &g.b1);
        self.w2.iter_mut().zip(&g.w2).for_each(|(p, d)| upd(p, d));
        upd(&mut self.b2, &g.b2);
    }
}

/// Full-batch gradient descent; also returns the loss before each epoch.
pub fn train_mlp_with_history(
    data: &LabeledDataset,
    cfg: &TrainConfig,
) -> Result<(TrainedModel, Vec<f64>), ClassifierError> {
    require_classes(data)?;
    let st = Standardizer::fit(data.rows());
    let x = st.transform_all(data.rows());
    let y = data.labels();
    let mut m = MlpModel::init(data.n_features(), cfg.mlp_hidden, data.n_classes(), cfg.seed);
    let mut history = Vec::with_capacity(cfg.mlp_epochs);
    for _ in 0..cfg.mlp_epochs {
        let (loss, g) = m.loss_and_grad(&x, y);
        history.push(loss);
        m.step(&g, cfg.mlp_lr);
    }
    Ok((wrap(data, cfg, st, ModelParams::Mlp(m)), history))
}

pub fn train_mlp(data: &LabeledDataset, cfg: &TrainConfig) -> Result<TrainedModel, ClassifierError> {
    train_mlp_with_history(data, cfg).map(|(m, _)| m)
}
