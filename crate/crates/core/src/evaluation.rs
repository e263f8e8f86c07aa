//! Cross-validation, confusion matrices and per-class recall.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use log::warn;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::classifiers::{self, ClassifierError, ClassifierKind, TrainConfig};
use crate::dataset::LabeledDataset;
use crate::features::FeatureLabel;

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("k = {0} folds; need at least 2")]
    TooFewFolds(usize),
    #[error("{n} samples cannot fill {k} folds")]
    TooFewSamples { n: usize, k: usize },
    #[error("empty feature subset")]
    EmptySubset,
    #[error("feature {0} is not in the dataset")]
    MissingFeature(FeatureLabel),
    #[error("dataset has a single class")]
    SingleClass,
    #[error("every fold was skipped")]
    NoUsableFold,
    #[error("bad CV spec {0:?}; expected kfold:K or loo")]
    BadSpec(String),
    #[error(transparent)]
    Classifier(#[from] ClassifierError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl EvalError {
    pub fn code(&self) -> &'static str {
        match self {
            EvalError::TooFewFolds(_) => "too_few_folds",
            EvalError::TooFewSamples { .. } => "too_few_samples",
            EvalError::EmptySubset => "empty_subset",
            EvalError::MissingFeature(_) => "missing_feature",
            EvalError::SingleClass => "single_class",
            EvalError::NoUsableFold => "no_usable_fold",
            EvalError::BadSpec(_) => "bad_cv_spec",
            EvalError::Classifier(e) => e.code(),
            EvalError::Io(_) => "io",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CvScheme {
    Kfold(usize),
    LeaveOneOut,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CvConfig {
    pub scheme: CvScheme,
    pub seed: u64,
    pub stratified: bool,
}

impl Default for CvConfig {
    fn default() -> Self {
        CvConfig {
            scheme: CvScheme::Kfold(10),
            seed: 0,
            stratified: true,
        }
    }
}

impl CvConfig {
    pub fn kfold(k: usize, seed: u64) -> Self {
        CvConfig {
            scheme: CvScheme::Kfold(k),
            seed,
            stratified: true,
        }
    }

    pub fn loo() -> Self {
        CvConfig {
            scheme: CvScheme::LeaveOneOut,
            seed: 0,
            stratified: false,
        }
    }
}

impl fmt::Display for CvScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CvScheme::Kfold(k) => write!(f, "kfold:{k}"),
            CvScheme::LeaveOneOut => f.write_str("loo"),
        }
    }
}

/// `kfold:K` or `loo`.
impl FromStr for CvScheme {
    type Err = EvalError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let t = s.trim().to_ascii_lowercase();
        if t == "loo" || t == "leave-one-out" {
            return Ok(CvScheme::LeaveOneOut);
        }
        t.strip_prefix("kfold:")
            .and_then(|k| k.parse().ok())
            .map(CvScheme::Kfold)
            .ok_or_else(|| EvalError::BadSpec(s.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FoldAssignment {
    /// Fold index of each sample.
    pub folds: Vec<usize>,
    pub k: usize,
    /// False when stratification was requested but had to be dropped.
    pub stratified: bool,
}

impl FoldAssignment {
    pub fn test_indices(&self, f: usize) -> Vec<usize> {
        (0..self.folds.len()).filter(|&i| self.folds[i] == f).collect()
    }

    pub fn train_indices(&self, f: usize) -> Vec<usize> {
        (0..self.folds.len()).filter(|&i| self.folds[i] != f).collect()
    }
}

/// Assigns each sample to a fold. Under stratification each class's indices
/// are shuffled with the seed and dealt round-robin, the dealing position
/// carrying over from one class to the next.
pub fn kfold_split(labels: &[usize], cfg: &CvConfig) -> Result<FoldAssignment, EvalError> {
    let n = labels.len();
    let k = match cfg.scheme {
        CvScheme::LeaveOneOut => {
            return Ok(FoldAssignment {
                folds: (0..n).collect(),
                k: n,
                stratified: false,
            })
        }
        CvScheme::Kfold(k) => k,
    };
    if k < 2 {
        return Err(EvalError::TooFewFolds(k));
    }
    if n < k {
        return Err(EvalError::TooFewSamples { n, k });
    }
    let n_classes = labels.iter().max().map_or(0, |m| m + 1);
    let mut by_class = vec![vec![]; n_classes];
    for (i, &l) in labels.iter().enumerate() {
        by_class[l].push(i);
    }
    let mut stratified = cfg.stratified;
    if stratified && by_class.iter().any(|c| !c.is_empty() && c.len() < k) {
        warn!("a class has fewer than {k} samples; falling back to unstratified folds");
        stratified = false;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let groups = if stratified {
        by_class
    } else {
        vec![(0..n).collect()]
    };
    let mut folds = vec![0; n];
    let mut pos = 0;
    for mut g in groups {
        g.shuffle(&mut rng);
        for i in g {
            folds[i] = pos % k;
            pos += 1;
        }
    }
    Ok(FoldAssignment {
        folds,
        k,
        stratified,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassRates {
    pub recall: Vec<f64>,
    /// True where a class had no test samples; its recall is reported as 0.
    pub undefined: Vec<bool>,
    pub macro_recall: f64,
}

/// recall_c = confusion[c][c] / row_sum(c). The macro average covers
/// classes with a defined recall.
pub fn per_class_rates(confusion: &[Vec<usize>]) -> ClassRates {
    let mut recall = vec![];
    let mut undefined = vec![];
    for (c, row) in confusion.iter().enumerate() {
        let total: usize = row.iter().sum();
        if total == 0 {
            recall.push(0.0);
            undefined.push(true);
        } else {
            recall.push(row[c] as f64 / total as f64);
            undefined.push(false);
        }
    }
    let defined: Vec<f64> = recall
        .iter()
        .zip(&undefined)
        .filter(|(_, u)| !**u)
        .map(|(r, _)| *r)
        .collect();
    let macro_recall = if defined.is_empty() {
        0.0
    } else {
        defined.iter().sum::<f64>() / defined.len() as f64
    };
    ClassRates {
        recall,
        undefined,
        macro_recall,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvalReport {
    pub classifier: ClassifierKind,
    pub cv: String,
    pub stratified: bool,
    pub features: Vec<FeatureLabel>,
    pub classes: Vec<String>,
    pub n_samples: usize,
    /// Pooled accuracy over all evaluated test predictions.
    pub accuracy: f64,
    pub fold_accuracies: Vec<f64>,
    pub fold_mean_accuracy: f64,
    /// Rows are true classes, columns predictions.
    pub confusion: Vec<Vec<usize>>,
    pub per_class_recall: Vec<f64>,
    pub recall_undefined: Vec<bool>,
    pub macro_recall: f64,
    pub skipped_folds: Vec<usize>,
}

impl EvalReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn write_confusion_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        write!(w, "true\\predicted")?;
        for c in &self.classes {
            write!(w, ",{c}")?;
        }
        writeln!(w)?;
        for (c, row) in self.classes.iter().zip(&self.confusion) {
            write!(w, "{c}")?;
            for v in row {
                write!(w, ",{v}")?;
            }
            writeln!(w)?;
        }
        Ok(())
    }
}

/// Cross-validated accuracy of a classifier on a column subset. Each fold
/// fits standardization and the model on its training split only.
pub fn cross_validate(
    data: &LabeledDataset,
    subset: &[FeatureLabel],
    kind: ClassifierKind,
    train_cfg: &TrainConfig,
    cv: &CvConfig,
) -> Result<EvalReport, EvalError> {
    if subset.is_empty() {
        return Err(EvalError::EmptySubset);
    }
    if let Some(&l) = subset.iter().find(|l| !data.columns().contains(l)) {
        return Err(EvalError::MissingFeature(l));
    }
    let data = data.select(subset).expect("columns checked above");
    if data.class_counts().iter().filter(|&&c| c > 0).count() < 2 {
        return Err(EvalError::SingleClass);
    }
    train_cfg.validate()?;
    let assign = kfold_split(data.labels(), cv)?;
    let results: Vec<Option<Vec<(usize, usize)>>> = (0..assign.k)
        .into_par_iter()
        .map(|f| -> Result<_, EvalError> {
            let test = assign.test_indices(f);
            let train = assign.train_indices(f);
            if test.is_empty() {
                return Ok(None);
            }
            let tr = data.subset(&train);
            if tr.class_counts().iter().filter(|&&c| c > 0).count() < 2 {
                warn!("fold {f}: training split has a single class; skipped");
                return Ok(None);
            }
            let model = match classifiers::train(&tr, kind, train_cfg) {
                Ok(m) => m,
                Err(ClassifierError::KTooLarge { .. }) | Err(ClassifierError::NoWeakLearner(_)) => {
                    warn!("fold {f}: classifier could not be trained; skipped");
                    return Ok(None);
                }
                Err(e) => return Err(e.into()),
            };
            test.iter()
                .map(|&i| Ok((data.labels()[i], model.predict(data.row(i))?)))
                .collect::<Result<Vec<_>, EvalError>>()
                .map(Some)
        })
        .collect::<Result<_, _>>()?;

    let nc = data.n_classes();
    let mut confusion = vec![vec![0usize; nc]; nc];
    let mut fold_accuracies = vec![];
    let mut skipped_folds = vec![];
    for (f, r) in results.iter().enumerate() {
        match r {
            None => skipped_folds.push(f),
            Some(pairs) => {
                let ok = pairs.iter().filter(|(t, p)| t == p).count();
                fold_accuracies.push(ok as f64 / pairs.len() as f64);
                for &(t, p) in pairs {
                    confusion[t][p] += 1;
                }
            }
        }
    }
    if fold_accuracies.is_empty() {
        return Err(EvalError::NoUsableFold);
    }
    let total: usize = confusion.iter().flatten().sum();
    let correct: usize = (0..nc).map(|c| confusion[c][c]).sum();
    let rates = per_class_rates(&confusion);
    Ok(EvalReport {
        classifier: kind,
        cv: cv.scheme.to_string(),
        stratified: assign.stratified,
        features: subset.to_vec(),
        classes: data.classes().to_vec(),
        n_samples: data.n_samples(),
        accuracy: correct as f64 / total as f64,
        fold_mean_accuracy: fold_accuracies.iter().sum::<f64>() / fold_accuracies.len() as f64,
        fold_accuracies,
        confusion,
        per_class_recall: rates.recall,
        recall_undefined: rates.undefined,
        macro_recall: rates.macro_recall,
        skipped_folds,
    })
}
