//! Classifiers used as ranking probes and final evaluators.

pub mod adaboost;
pub mod knn;
pub mod mlp;
pub mod pca;
pub mod svm;

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dataset::LabeledDataset;
use crate::features::FeatureLabel;

pub use adaboost::{train_adaboost, BoostModel, Stump};
pub use knn::{train_knn, KnnModel};
pub use mlp::{train_mlp, MlpModel};
pub use pca::{pca_fit, Pca};
pub use svm::{train_msvm, SvmModel};

pub const MODEL_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum ClassifierError {
    #[error("k = {k} exceeds the {n} training samples")]
    KTooLarge { k: usize, n: usize },
    #[error("training data has a single class")]
    SingleClass,
    #[error("expected {expected} features, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("invalid training config: {0}")]
    InvalidConfig(&'static str),
    #[error("no decision stump beats chance (weighted error {0:.6} >= 0.5)")]
    NoWeakLearner(f64),
    #[error("AdaBoost needs two classes, got {0}")]
    NotBinary(usize),
    #[error("{0} components requested from {1} features")]
    TooManyComponents(usize, usize),
    #[error("unknown classifier {0:?}")]
    UnknownKind(String),
    #[error("model format version {0} is not supported")]
    Version(u32),
    #[error("model kind and parameters disagree")]
    KindMismatch,
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl ClassifierError {
    pub fn code(&self) -> &'static str {
        match self {
            ClassifierError::KTooLarge { .. } => "k_too_large",
            ClassifierError::SingleClass => "single_class",
            ClassifierError::DimensionMismatch { .. } => "dimension_mismatch",
            ClassifierError::InvalidConfig(_) => "invalid_config",
            ClassifierError::NoWeakLearner(_) => "no_weak_learner",
            ClassifierError::NotBinary(_) => "not_binary",
            ClassifierError::TooManyComponents(..) => "too_many_components",
            ClassifierError::UnknownKind(_) => "unknown_classifier",
            ClassifierError::Version(_) => "model_version",
            ClassifierError::KindMismatch => "kind_mismatch",
            ClassifierError::Json(_) => "json",
            ClassifierError::Io(_) => "io",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClassifierKind {
    Knn,
    Msvm,
    Mlp,
    Adaboost,
    PcaKnn,
}

impl ClassifierKind {
    pub const ALL: [ClassifierKind; 5] = [
        ClassifierKind::Knn,
        ClassifierKind::Msvm,
        ClassifierKind::Mlp,
        ClassifierKind::Adaboost,
        ClassifierKind::PcaKnn,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ClassifierKind::Knn => "knn",
            ClassifierKind::Msvm => "msvm",
            ClassifierKind::Mlp => "mlp",
            ClassifierKind::Adaboost => "adaboost",
            ClassifierKind::PcaKnn => "pca_knn",
        }
    }
}

impl fmt::Display for ClassifierKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ClassifierKind {
    type Err = ClassifierError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "knn" => Ok(ClassifierKind::Knn),
            "msvm" | "svm" | "m_svm" => Ok(ClassifierKind::Msvm),
            "mlp" | "nn" => Ok(ClassifierKind::Mlp),
            "adaboost" => Ok(ClassifierKind::Adaboost),
            "pca_knn" | "pcaknn" => Ok(ClassifierKind::PcaKnn),
            _ => Err(ClassifierError::UnknownKind(s.to_string())),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub knn_k: usize,
    pub svm_lambda: f64,
    pub svm_epochs: usize,
    pub mlp_hidden: usize,
    pub mlp_lr: f64,
    pub mlp_epochs: usize,
    pub boost_rounds: usize,
    pub pca_dims: usize,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            knn_k: 1,
            svm_lambda: 0.01,
            svm_epochs: 100,
            mlp_hidden: 20,
            mlp_lr: 0.05,
            mlp_epochs: 500,
            boost_rounds: 50,
            pca_dims: 10,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<(), ClassifierError> {
        if self.knn_k == 0 || self.mlp_hidden == 0 || self.boost_rounds == 0 || self.pca_dims == 0 {
            return Err(ClassifierError::InvalidConfig("counts must be positive"));
        }
        if !(self.mlp_lr > 0.0) {
            return Err(ClassifierError::InvalidConfig("mlp_lr must be positive"));
        }
        if !(self.svm_lambda > 0.0) {
            return Err(ClassifierError::InvalidConfig("svm_lambda must be positive"));
        }
        Ok(())
    }
}

/// Per-column z-score statistics fitted on training data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardizer {
    pub mean: Vec<f64>,
    /// Population standard deviation; zero-variance columns store 1.
    pub scale: Vec<f64>,
}

impl Standardizer {
    pub fn fit(rows: &[Vec<f64>]) -> Self {
        let d = rows.first().map_or(0, Vec::len);
        let n = rows.len().max(1) as f64;
        let mean: Vec<f64> = (0..d)
            .map(|j| rows.iter().map(|r| r[j]).sum::<f64>() / n)
            .collect();
        let scale = (0..d)
            .map(|j| {
                let v = rows.iter().map(|r| (r[j] - mean[j]).powi(2)).sum::<f64>() / n;
                if v > 0.0 {
                    v.sqrt()
                } else {
                    1.0
                }
            })
            .collect();
        Standardizer { mean, scale }
    }

    pub fn transform(&self, x: &[f64]) -> Vec<f64> {
        x.iter()
            .zip(self.mean.iter().zip(&self.scale))
            .map(|(v, (m, s))| (v - m) / s)
            .collect()
    }

    pub fn transform_all(&self, rows: &[Vec<f64>]) -> Vec<Vec<f64>> {
        rows.iter().map(|r| self.transform(r)).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelParams {
    Knn(KnnModel),
    Msvm(SvmModel),
    Mlp(MlpModel),
    Adaboost(BoostModel),
    PcaKnn { pca: Pca, knn: KnnModel },
}

impl ModelParams {
    pub fn kind(&self) -> ClassifierKind {
        match self {
            ModelParams::Knn(_) => ClassifierKind::Knn,
            ModelParams::Msvm(_) => ClassifierKind::Msvm,
            ModelParams::Mlp(_) => ClassifierKind::Mlp,
            ModelParams::Adaboost(_) => ClassifierKind::Adaboost,
            ModelParams::PcaKnn { .. } => ClassifierKind::PcaKnn,
        }
    }
}

/// A fitted classifier together with the standardization it was trained
/// under. Inputs to `predict` are raw feature values in `feature_subset`
/// order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainedModel {
    pub format_version: u32,
    pub kind: ClassifierKind,
    pub config: TrainConfig,
    pub feature_subset: Vec<FeatureLabel>,
    pub classes: Vec<String>,
    pub standardizer: Standardizer,
    pub parameters: ModelParams,
}

impl TrainedModel {
    pub fn n_classes(&self) -> usize {
        self.classes.len()
    }

    pub fn predict(&self, x: &[f64]) -> Result<usize, ClassifierError> {
        if x.len() != self.feature_subset.len() {
            return Err(ClassifierError::DimensionMismatch {
                expected: self.feature_subset.len(),
                got: x.len(),
            });
        }
        let z = self.standardizer.transform(x);
        Ok(match &self.parameters {
            ModelParams::Knn(m) => m.predict(&z),
            ModelParams::Msvm(m) => m.predict(&z),
            ModelParams::Mlp(m) => m.predict(&z),
            ModelParams::Adaboost(m) => m.predict(&z),
            ModelParams::PcaKnn { pca, knn } => knn.predict(&pca.project(&z)),
        })
    }

    pub fn predict_label(&self, x: &[f64]) -> Result<&str, ClassifierError> {
        Ok(&self.classes[self.predict(x)?])
    }

    pub fn to_json(&self) -> Result<String, ClassifierError> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self, ClassifierError> {
        let m: TrainedModel = serde_json::from_str(s)?;
        if m.format_version != MODEL_FORMAT_VERSION {
            return Err(ClassifierError::Version(m.format_version));
        }
        if m.parameters.kind() != m.kind {
            return Err(ClassifierError::KindMismatch);
        }
        Ok(m)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), ClassifierError> {
        std::fs::write(path, self.to_json()? + "\n")?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, ClassifierError> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}

pub(crate) fn require_classes(data: &LabeledDataset) -> Result<(), ClassifierError> {
    let present = data.class_counts().iter().filter(|&&c| c > 0).count();
    if present < 2 {
        return Err(ClassifierError::SingleClass);
    }
    Ok(())
}

pub(crate) fn wrap(
    data: &LabeledDataset,
    cfg: &TrainConfig,
    standardizer: Standardizer,
    parameters: ModelParams,
) -> TrainedModel {
    TrainedModel {
        format_version: MODEL_FORMAT_VERSION,
        kind: parameters.kind(),
        config: *cfg,
        feature_subset: data.columns().to_vec(),
        classes: data.classes().to_vec(),
        standardizer,
        parameters,
    }
}

/// Index of the largest value; ties resolve to the lowest index.
pub(crate) fn argmax(v: &[f64]) -> usize {
    let mut best = 0;
    for (i, &x) in v.iter().enumerate().skip(1) {
        if x > v[best] {
            best = i;
        }
    }
    best
}

/// Trains any supported classifier on the dataset's columns.
pub fn train(
    data: &LabeledDataset,
    kind: ClassifierKind,
    cfg: &TrainConfig,
) -> Result<TrainedModel, ClassifierError> {
    cfg.validate()?;
    match kind {
        ClassifierKind::Knn => train_knn(data, cfg.knn_k),
        ClassifierKind::Msvm => train_msvm(data, cfg),
        ClassifierKind::Mlp => train_mlp(data, cfg),
        ClassifierKind::Adaboost => train_adaboost(data, cfg.boost_rounds),
        ClassifierKind::PcaKnn => pca::train_pca_knn(data, cfg),
    }
    .map(|mut m| {
        m.config = *cfg;
        m
    })
}
