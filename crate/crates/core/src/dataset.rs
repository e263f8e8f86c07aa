//! Labeled feature matrices, their CSV form, and corpus manifests.

use std::collections::{BTreeSet, HashSet};
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use log::warn;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::audio::read_wav;
use crate::features::{extract_feature_vector, ExtractionConfig, FeatureLabel, N_FEATURES};

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("dataset has no rows")]
    Empty,
    #[error("row {row} has {got} values, expected {expected}")]
    Ragged { row: usize, got: usize, expected: usize },
    #[error("non-finite value at row {row}, column {col}")]
    NonFinite { row: usize, col: usize },
    #[error("{0} labels for {1} rows")]
    LabelCount(usize, usize),
    #[error("label {0:?} is not a declared class")]
    UnknownClass(String),
    #[error("duplicate manifest path {0}")]
    DuplicatePath(String),
    #[error("bad CSV header: {0}")]
    Header(String),
    #[error("CSV line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl DatasetError {
    pub fn code(&self) -> &'static str {
        match self {
            DatasetError::Empty => "empty_dataset",
            DatasetError::Ragged { .. } => "ragged_rows",
            DatasetError::NonFinite { .. } => "non_finite",
            DatasetError::LabelCount(..) => "label_count",
            DatasetError::UnknownClass(_) => "unknown_class",
            DatasetError::DuplicatePath(_) => "duplicate_path",
            DatasetError::Header(_) => "bad_header",
            DatasetError::Parse { .. } => "parse",
            DatasetError::Csv(_) => "csv",
            DatasetError::Io(_) => "io",
        }
    }
}

/// The five emotional states used throughout.
pub const CANONICAL_EMOTIONS: [&str; 5] = ["anger", "fear", "happiness", "neutral", "sadness"];

/// An N × d matrix of feature values with one class label per row.
///
/// Classes are kept sorted by name; a label is stored as its index in
/// `classes`. `columns` names the catalogue feature behind each column.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledDataset {
    pub corpus_id: String,
    sample_ids: Vec<String>,
    rows: Vec<Vec<f64>>,
    labels: Vec<usize>,
    classes: Vec<String>,
    columns: Vec<FeatureLabel>,
}

impl LabeledDataset {
    /// Builds a dataset from string labels. Classes are the sorted set of
    /// distinct labels.
    pub fn new(
        corpus_id: impl Into<String>,
        sample_ids: Vec<String>,
        rows: Vec<Vec<f64>>,
        labels: &[String],
        columns: Vec<FeatureLabel>,
    ) -> Result<Self, DatasetError> {
        let classes: Vec<String> = labels
            .iter()
            .cloned()
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        Self::with_classes(corpus_id, sample_ids, rows, labels, columns, classes)
    }

    pub fn with_classes(
        corpus_id: impl Into<String>,
        sample_ids: Vec<String>,
        rows: Vec<Vec<f64>>,
        labels: &[String],
        columns: Vec<FeatureLabel>,
        mut classes: Vec<String>,
    ) -> Result<Self, DatasetError> {
        if rows.is_empty() {
            return Err(DatasetError::Empty);
        }
        if labels.len() != rows.len() || sample_ids.len() != rows.len() {
            return Err(DatasetError::LabelCount(labels.len(), rows.len()));
        }
        for (i, r) in rows.iter().enumerate() {
            if r.len() != columns.len() {
                return Err(DatasetError::Ragged {
                    row: i,
                    got: r.len(),
                    expected: columns.len(),
                });
            }
            if let Some(j) = r.iter().position(|v| !v.is_finite()) {
                return Err(DatasetError::NonFinite { row: i, col: j });
            }
        }
        classes.sort();
        classes.dedup();
        let labels = labels
            .iter()
            .map(|l| {
                classes
                    .binary_search(l)
                    .map_err(|_| DatasetError::UnknownClass(l.clone()))
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(LabeledDataset {
            corpus_id: corpus_id.into(),
            sample_ids,
            rows,
            labels,
            classes,
            columns,
        })
    }

    /// Numeric-label constructor for tests and internal relabelings.
    /// Class names become `c0`, `c1`, ... unless given.
    pub fn from_indices(rows: Vec<Vec<f64>>, labels: Vec<usize>) -> Result<Self, DatasetError> {
        let n_classes = labels.iter().max().map_or(0, |m| m + 1);
        let width = rows.first().map_or(0, Vec::len);
        let classes: Vec<String> = (0..n_classes).map(|c| format!("c{c:03}")).collect();
        let names: Vec<String> = labels.iter().map(|&l| classes[l].clone()).collect();
        let ids = (0..rows.len()).map(|i| format!("s{i}")).collect();
        let columns = (1..=width.min(N_FEATURES))
            .map(|i| FeatureLabel::new(i).expect("in range"))
            .collect::<Vec<_>>();
        if width > N_FEATURES {
            return Err(DatasetError::Ragged {
                row: 0,
                got: width,
                expected: N_FEATURES,
            });
        }
        Self::with_classes("synthetic", ids, rows, &names, columns, classes)
    }

    pub fn n_samples(&self) -> usize {
        self.rows.len()
    }

    pub fn n_features(&self) -> usize {
        self.columns.len()
    }

    pub fn n_classes(&self) -> usize {
        self.classes.len()
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.rows[i]
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn label_name(&self, i: usize) -> &str {
        &self.classes[self.labels[i]]
    }

    pub fn classes(&self) -> &[String] {
        &self.classes
    }

    pub fn class_index(&self, name: &str) -> Option<usize> {
        self.classes.iter().position(|c| c == name)
    }

    pub fn columns(&self) -> &[FeatureLabel] {
        &self.columns
    }

    pub fn sample_ids(&self) -> &[String] {
        &self.sample_ids
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        self.rows.iter().map(|r| r[j]).collect()
    }

    pub fn class_counts(&self) -> Vec<usize> {
        let mut c = vec![0; self.classes.len()];
        for &l in &self.labels {
            c[l] += 1;
        }
        c
    }

    /// Column restriction, in the order given. Labels missing from the
    /// dataset are reported through `None`.
    pub fn select(&self, labels: &[FeatureLabel]) -> Option<LabeledDataset> {
        let idx: Vec<usize> = labels
            .iter()
            .map(|l| self.columns.iter().position(|c| c == l))
            .collect::<Option<_>>()?;
        Some(LabeledDataset {
            rows: self
                .rows
                .iter()
                .map(|r| idx.iter().map(|&j| r[j]).collect())
                .collect(),
            columns: labels.to_vec(),
            ..self.clone()
        })
    }

    /// Row restriction in the order given; the class list is kept whole so
    /// label indices stay comparable across subsets.
    pub fn subset(&self, idx: &[usize]) -> LabeledDataset {
        LabeledDataset {
            corpus_id: self.corpus_id.clone(),
            sample_ids: idx.iter().map(|&i| self.sample_ids[i].clone()).collect(),
            rows: idx.iter().map(|&i| self.rows[i].clone()).collect(),
            labels: idx.iter().map(|&i| self.labels[i]).collect(),
            classes: self.classes.clone(),
            columns: self.columns.clone(),
        }
    }

    /// Same rows with replaced label indices over a new class list.
    pub fn relabel(&self, labels: Vec<usize>, classes: Vec<String>) -> LabeledDataset {
        assert_eq!(labels.len(), self.rows.len());
        assert!(labels.iter().all(|&l| l < classes.len()));
        LabeledDataset {
            labels,
            classes,
            ..self.clone()
        }
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<(), DatasetError> {
        let mut out = csv::Writer::from_writer(w);
        let mut header = vec!["sample_id".to_string(), "corpus".into(), "label".into()];
        header.extend(self.columns.iter().map(|c| c.to_string()));
        out.write_record(&header)?;
        for i in 0..self.rows.len() {
            let mut rec = vec![
                self.sample_ids[i].clone(),
                self.corpus_id.clone(),
                self.label_name(i).to_string(),
            ];
            rec.extend(self.rows[i].iter().map(|v| format_value(*v)));
            out.write_record(&rec)?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(r: R) -> Result<Self, DatasetError> {
        let mut rdr = csv::Reader::from_reader(r);
        let header = rdr.headers()?.clone();
        let fixed = ["sample_id", "corpus", "label"];
        if header.len() < 4 || header.iter().take(3).ne(fixed.iter().copied()) {
            return Err(DatasetError::Header(format!(
                "expected sample_id,corpus,label,x..., got {:?}",
                header.iter().collect::<Vec<_>>()
            )));
        }
        let columns = header
            .iter()
            .skip(3)
            .map(|h| {
                h.parse::<FeatureLabel>()
                    .map_err(|e| DatasetError::Header(e.to_string()))
            })
            .collect::<Result<Vec<_>, _>>()?;
        let (mut ids, mut rows, mut labels) = (vec![], vec![], vec![]);
        let mut corpus = String::new();
        for (i, rec) in rdr.records().enumerate() {
            let rec = rec?;
            let line = i + 2;
            if rec.len() != columns.len() + 3 {
                return Err(DatasetError::Parse {
                    line,
                    msg: format!("{} fields, expected {}", rec.len(), columns.len() + 3),
                });
            }
            ids.push(rec[0].to_string());
            corpus = rec[1].to_string();
            labels.push(rec[2].to_string());
            rows.push(
                rec.iter()
                    .skip(3)
                    .map(|v| {
                        v.trim().parse::<f64>().map_err(|_| DatasetError::Parse {
                            line,
                            msg: format!("{v:?} is not a number"),
                        })
                    })
                    .collect::<Result<Vec<_>, _>>()?,
            );
        }
        Self::new(corpus, ids, rows, &labels, columns)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), DatasetError> {
        let f = std::fs::File::create(path)?;
        self.write_csv(std::io::BufWriter::new(f))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, DatasetError> {
        Self::read_csv(std::io::BufReader::new(std::fs::File::open(path)?))
    }
}

/// Nine significant digits in scientific notation.
pub fn format_value(v: f64) -> String {
    format!("{v:.8e}")
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ManifestEntry {
    pub corpus: String,
    pub path: PathBuf,
    pub label: String,
}

/// WAV files with their emotion labels. Relative paths resolve against
/// `base_dir`, normally the manifest's own directory.
#[derive(Debug, Clone, PartialEq)]
pub struct CorpusManifest {
    pub corpus_id: String,
    pub entries: Vec<ManifestEntry>,
    pub base_dir: PathBuf,
}

impl CorpusManifest {
    pub fn new(
        corpus_id: impl Into<String>,
        entries: Vec<ManifestEntry>,
        base_dir: impl Into<PathBuf>,
    ) -> Result<Self, DatasetError> {
        let mut seen = HashSet::new();
        for e in &entries {
            if !seen.insert(&e.path) {
                return Err(DatasetError::DuplicatePath(e.path.display().to_string()));
            }
        }
        Ok(CorpusManifest {
            corpus_id: corpus_id.into(),
            entries,
            base_dir: base_dir.into(),
        })
    }

    pub fn resolve(&self, e: &ManifestEntry) -> PathBuf {
        if e.path.is_absolute() {
            e.path.clone()
        } else {
            self.base_dir.join(&e.path)
        }
    }

    /// CSV with header `corpus,path,label`.
    pub fn load(path: impl AsRef<Path>) -> Result<Self, DatasetError> {
        let path = path.as_ref();
        let mut rdr = csv::Reader::from_path(path)?;
        let header = rdr.headers()?.clone();
        if header.iter().ne(["corpus", "path", "label"]) {
            return Err(DatasetError::Header("expected corpus,path,label".into()));
        }
        let mut entries = vec![];
        for (i, rec) in rdr.records().enumerate() {
            let rec = rec?;
            if rec.len() != 3 {
                return Err(DatasetError::Parse {
                    line: i + 2,
                    msg: "expected 3 fields".into(),
                });
            }
            entries.push(ManifestEntry {
                corpus: rec[0].to_string(),
                path: PathBuf::from(&rec[1]),
                label: rec[2].to_string(),
            });
        }
        let corpus_id = entries.first().map(|e| e.corpus.clone()).unwrap_or_default();
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Self::new(corpus_id, entries, base)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), DatasetError> {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(["corpus", "path", "label"])?;
        for e in &self.entries {
            w.write_record([
                e.corpus.as_str(),
                &e.path.to_string_lossy().replace('\\', "/"),
                e.label.as_str(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct BuildFailure {
    pub path: String,
    pub code: String,
    pub message: String,
}

/// Extracts one feature vector per manifest entry, in manifest order.
/// Unreadable files are skipped and listed in the second return value.
pub fn build_dataset(
    manifest: &CorpusManifest,
    cfg: &ExtractionConfig,
) -> Result<(LabeledDataset, Vec<BuildFailure>), DatasetError> {
    let results: Vec<_> = manifest
        .entries
        .par_iter()
        .map(|e| {
            let path = manifest.resolve(e);
            let fail = |code: &str, message: String| BuildFailure {
                path: e.path.display().to_string(),
                code: code.to_string(),
                message,
            };
            let sig = read_wav(&path).map_err(|err| fail(err.code(), err.to_string()))?;
            extract_feature_vector(&sig, cfg).map_err(|err| fail(err.code(), err.to_string()))
        })
        .collect();
    let (mut ids, mut rows, mut labels, mut failures) = (vec![], vec![], vec![], vec![]);
    for (e, r) in manifest.entries.iter().zip(results) {
        match r {
            Ok(fv) => {
                ids.push(sample_id(&e.path));
                rows.push(fv.values().to_vec());
                labels.push(e.label.clone());
            }
            Err(f) => {
                warn!("skipping {}: {}", f.path, f.message);
                failures.push(f);
            }
        }
    }
    let columns = FeatureLabel::all().collect();
    let ds = LabeledDataset::new(manifest.corpus_id.clone(), ids, rows, &labels, columns)?;
    Ok((ds, failures))
}

fn sample_id(path: &Path) -> String {
    let s = path.with_extension("");
    s.to_string_lossy().replace('\\', "/")
}
