use log::warn;
use serde::{Deserialize, Serialize};

use super::knn::KnnModel;
use super::{require_classes, wrap, ClassifierError, ModelParams, Standardizer, TrainConfig, TrainedModel};
use crate::dataset::LabeledDataset;

/// Eigenvalues and eigenvectors (as columns of `vectors`, row-major d×d)
/// of a symmetric matrix by cyclic Jacobi rotations.
pub fn jacobi_eigen(a: &[Vec<f64>]) -> (Vec<f64>, Vec<Vec<f64>>) {
    let n = a.len();
    let mut m: Vec<Vec<f64>> = a.to_vec();
    let mut v: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
        .collect();
    let scale: f64 = m.iter().flatten().map(|x| x * x).sum::<f64>().sqrt();
    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| m[i][j] * m[i][j])
            .sum::<f64>()
            .sqrt();
        if off <= 1e-15 * scale.max(f64::MIN_POSITIVE) {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if m[p][q].abs() <= f64::MIN_POSITIVE {
                    continue;
                }
                let theta = (m[q][q] - m[p][p]) / (2.0 * m[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (mkp, mkq) = (m[k][p], m[k][q]);
                    m[k][p] = c * mkp - s * mkq;
                    m[k][q] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let (mpk, mqk) = (m[p][k], m[q][k]);
                    m[p][k] = c * mpk - s * mqk;
                    m[q][k] = s * mpk + c * mqk;
                }
                for k in 0..n {
                    let (vkp, vkq) = (v[k][p], v[k][q]);
                    v[k][p] = c * vkp - s * vkq;
                    v[k][q] = s * vkp + c * vkq;
                }
            }
        }
    }
    ((0..n).map(|i| m[i][i]).collect(), v)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Pca {
    pub mean: Vec<f64>,
    /// dims × d, each row a unit component.
    pub components: Vec<Vec<f64>>,
    pub eigenvalues: Vec<f64>,
    /// Share of total variance per retained component.
    pub explained: Vec<f64>,
    /// Set when some retained components carry no variance.
    pub padded: bool,
}

impl Pca {
    pub fn project(&self, x: &[f64]) -> Vec<f64> {
        self.components
            .iter()
            .map(|c| c.iter().zip(x.iter().zip(&self.mean)).map(|(a, (v, m))| a * (v - m)).sum())
            .collect()
    }

    pub fn reconstruct(&self, z: &[f64]) -> Vec<f64> {
        let mut x = self.mean.clone();
        for (c, &zi) in self.components.iter().zip(z) {
            for (a, b) in x.iter_mut().zip(c) {
                *a += zi * b;
            }
        }
        x
    }
}

/// Principal components of the rows of `x` (sample covariance, n − 1).
/// Components are ordered by decreasing eigenvalue and sign-fixed so each
/// one's largest-magnitude entry is positive.
pub fn pca_rows(x: &[Vec<f64>], dims: usize) -> Result<Pca, ClassifierError> {
    let d = x.first().map_or(0, Vec::len);
    if dims == 0 || dims > d {
        return Err(ClassifierError::TooManyComponents(dims, d));
    }
    let n = x.len();
    let mean: Vec<f64> = (0..d).map(|j| x.iter().map(|r| r[j]).sum::<f64>() / n as f64).collect();
    let denom = if n > 1 { (n - 1) as f64 } else { 1.0 };
    let mut cov = vec![vec![0.0; d]; d];
    for r in x {
        for i in 0..d {
            let di = r[i] - mean[i];
            for j in i..d {
                cov[i][j] += di * (r[j] - mean[j]);
            }
        }
    }
    for i in 0..d {
        for j in i..d {
            cov[i][j] /= denom;
            cov[j][i] = cov[i][j];
        }
    }
    let (vals, vecs) = jacobi_eigen(&cov);
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| vals[b].total_cmp(&vals[a]).then(a.cmp(&b)));
    let total: f64 = vals.iter().map(|v| v.max(0.0)).sum();
    let tol = 1e-12 * total.max(f64::MIN_POSITIVE);
    let mut components = vec![];
    let mut eigenvalues = vec![];
    for &k in order.iter().take(dims) {
        let mut c: Vec<f64> = (0..d).map(|i| vecs[i][k]).collect();
        let lead = c
            .iter()
            .enumerate()
            .fold(0, |b, (i, v)| if v.abs() > c[b].abs() { i } else { b });
        if c[lead] < 0.0 {
            c.iter_mut().for_each(|v| *v = -*v);
        }
        components.push(c);
        eigenvalues.push(vals[k].max(0.0));
    }
    let padded = eigenvalues.iter().any(|&v| v <= tol);
    if padded {
        warn!("PCA: {dims} components exceed the data rank; zero-variance directions retained");
    }
    let explained = eigenvalues
        .iter()
        .map(|v| if total > 0.0 { v / total } else { 0.0 })
        .collect();
    Ok(Pca {
        mean,
        components,
        eigenvalues,
        explained,
        padded,
    })
}

pub fn pca_fit(data: &LabeledDataset, dims: usize) -> Result<Pca, ClassifierError> {
    pca_rows(data.rows(), dims)
}

/// Standardize, project onto the leading components, then 1-NN (or k-NN).
/// `pca_dims` is capped at the feature count.
pub(crate) fn train_pca_knn(data: &LabeledDataset, cfg: &TrainConfig) -> Result<TrainedModel, ClassifierError> {
    require_classes(data)?;
    let st = Standardizer::fit(data.rows());
    let z = st.transform_all(data.rows());
    let dims = cfg.pca_dims.min(data.n_features());
    let pca = pca_rows(&z, dims)?;
    let proj: Vec<Vec<f64>> = z.iter().map(|r| pca.project(r)).collect();
    let knn = KnnModel::fit(proj, data.labels().to_vec(), data.n_classes(), cfg.knn_k)?;
    Ok(wrap(data, cfg, st, ModelParams::PcaKnn { pca, knn }))
}
