use serde::{Deserialize, Serialize};

use super::{require_classes, wrap, ClassifierError, ModelParams, Standardizer, TrainConfig, TrainedModel};
use crate::dataset::LabeledDataset;

/// Memorized (standardized) training set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KnnModel {
    pub k: usize,
    pub n_classes: usize,
    pub points: Vec<Vec<f64>>,
    pub labels: Vec<usize>,
}

impl KnnModel {
    pub fn fit(points: Vec<Vec<f64>>, labels: Vec<usize>, n_classes: usize, k: usize) -> Result<Self, ClassifierError> {
        if k == 0 || k > points.len() {
            return Err(ClassifierError::KTooLarge { k, n: points.len() });
        }
        Ok(KnnModel {
            k,
            n_classes,
            points,
            labels,
        })
    }

    /// Majority vote among the k nearest (Euclidean); equal distances go to
    /// the lower training index and tied votes to the class of the nearest
    /// neighbour among the tied classes.
    pub fn predict(&self, x: &[f64]) -> usize {
        let mut d: Vec<(f64, usize)> = self
            .points
            .iter()
            .enumerate()
            .map(|(i, p)| (p.iter().zip(x).map(|(a, b)| (a - b) * (a - b)).sum::<f64>(), i))
            .collect();
        let k = self.k.min(d.len());
        if k < d.len() {
            d.select_nth_unstable_by(k - 1, |a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
            d.truncate(k);
        }
        d.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        let mut votes = vec![0usize; self.n_classes];
        for &(_, i) in &d {
            votes[self.labels[i]] += 1;
        }
        let top = votes.iter().copied().max().unwrap_or(0);
        d.iter()
            .map(|&(_, i)| self.labels[i])
            .find(|&c| votes[c] == top)
            .unwrap_or(0)
    }
}

pub fn train_knn(data: &LabeledDataset, k: usize) -> Result<TrainedModel, ClassifierError> {
    require_classes(data)?;
    let st = Standardizer::fit(data.rows());
    let knn = KnnModel::fit(st.transform_all(data.rows()), data.labels().to_vec(), data.n_classes(), k)?;
    let cfg = TrainConfig {
        knn_k: k,
        ..TrainConfig::default()
    };
    Ok(wrap(data, &cfg, st, ModelParams::Knn(knn)))
}
