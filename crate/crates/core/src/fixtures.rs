//! Loaders for the bundled reference rankings and selection results.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::features::{label_of, FeatureLabel};
use crate::selection::{FeatureSet, RankingTable, SelectionError};

/// `fixtures/` inside this crate's source tree.
pub fn fixture_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures")
}

/// `rankings/<classifier>_<dataset>.csv`, read leniently. Returns the table
/// and any repeated labels that were dropped.
pub fn load_ranking(
    dir: &Path,
    classifier: &str,
    dataset: &str,
) -> Result<(RankingTable, Vec<FeatureLabel>), SelectionError> {
    let path = dir.join("rankings").join(format!("{classifier}_{dataset}.csv"));
    let (mut t, dropped) = RankingTable::load_lenient(path)?;
    t.source = format!("{dataset}/{classifier}");
    Ok((t, dropped))
}

/// A printed selection table: the top-m rows it was built from and the
/// "special" and "common" rows it reports.
#[derive(Debug, Clone, Deserialize)]
pub struct SelectionFixture {
    pub strategy: String,
    pub fixed: String,
    pub m: usize,
    pub p: usize,
    pub top_ranked: BTreeMap<String, Vec<FeatureLabel>>,
    pub special: Vec<FeatureLabel>,
    pub common: Vec<FeatureLabel>,
}

impl SelectionFixture {
    pub fn load(path: impl AsRef<Path>) -> Result<Self, SelectionError> {
        Ok(serde_json::from_str(&std::fs::read_to_string(path)?)?)
    }

    /// The printed rows as unscored rankings.
    pub fn rankings(&self) -> Result<BTreeMap<String, RankingTable>, SelectionError> {
        self.top_ranked
            .iter()
            .map(|(k, v)| Ok((k.clone(), RankingTable::from_labels(format!("{k}/{}", self.fixed), v)?)))
            .collect()
    }

    pub fn common_set(&self) -> FeatureSet {
        FeatureSet::new(self.common.iter().copied(), "printed common row")
    }

    pub fn special_set(&self) -> FeatureSet {
        FeatureSet::new(self.special.iter().copied(), "printed special row")
    }
}

/// A summary table whose columns list feature names per classifier or
/// filter method.
#[derive(Debug, Clone, Deserialize)]
pub struct SummaryFixture {
    pub strategy: String,
    pub m: usize,
    pub columns: BTreeMap<String, Vec<String>>,
}

impl SummaryFixture {
    pub fn load(path: impl AsRef<Path>) -> Result<Self, SelectionError> {
        Ok(serde_json::from_str(&std::fs::read_to_string(path)?)?)
    }

    pub fn column(&self, key: &str) -> Result<FeatureSet, SelectionError> {
        let names = self.columns.get(key).map(Vec::as_slice).unwrap_or_default();
        let labels = names.iter().map(|n| label_of(n)).collect::<Result<Vec<_>, _>>()?;
        Ok(FeatureSet::new(labels, format!("printed column {key}")))
    }
}
