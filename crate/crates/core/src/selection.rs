//! Feature rankings, top-m truncation and the intersection/union algebra
//! over ranked subsets.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::io::{Read, Write};
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::classifiers::{self, ClassifierError, ClassifierKind, ModelParams, TrainConfig};
use crate::dataset::LabeledDataset;
use crate::evaluation::{cross_validate, CvConfig, EvalError};
use crate::features::{FeatureError, FeatureLabel, N_FEATURES};
use crate::filters::{filter_scores, FilterError, FilterMethod};

pub const DEFAULT_M: usize = 22;
pub const DEFAULT_P: usize = 10;

#[derive(Debug, Error)]
pub enum SelectionError {
    #[error("invalid cutoffs m = {m}, p = {p}; need 0 < p < m <= {N_FEATURES}")]
    Cutoffs { m: usize, p: usize },
    #[error("m = {0} is outside 1..={N_FEATURES}")]
    BadM(usize),
    #[error("ranking {source_name} has {len} entries, fewer than m = {m}")]
    ShortRanking { source_name: String, len: usize, m: usize },
    #[error("{op} needs at least {need} inputs, got {got}")]
    TooFewInputs { op: &'static str, need: usize, got: usize },
    #[error("feature {0} is listed twice in a ranking")]
    Duplicate(FeatureLabel),
    #[error("ranking line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("class {0:?} is not in the dataset")]
    UnknownEmotion(String),
    #[error("class {0:?} covers every sample")]
    OneClass(String),
    #[error(transparent)]
    Feature(#[from] FeatureError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Filter(#[from] FilterError),
    #[error(transparent)]
    Classifier(#[from] ClassifierError),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl SelectionError {
    pub fn code(&self) -> &'static str {
        match self {
            SelectionError::Cutoffs { .. } => "bad_cutoffs",
            SelectionError::BadM(_) => "bad_m",
            SelectionError::ShortRanking { .. } => "short_ranking",
            SelectionError::TooFewInputs { .. } => "too_few_inputs",
            SelectionError::Duplicate(_) => "duplicate_feature",
            SelectionError::Parse { .. } => "ranking_parse",
            SelectionError::UnknownEmotion(_) => "unknown_emotion",
            SelectionError::OneClass(_) => "one_class",
            SelectionError::Feature(e) => e.code(),
            SelectionError::Eval(e) => e.code(),
            SelectionError::Filter(e) => e.code(),
            SelectionError::Classifier(e) => e.code(),
            SelectionError::Csv(_) => "csv",
            SelectionError::Json(_) => "json",
            SelectionError::Io(_) => "io",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SelectionConfig {
    pub m: usize,
    pub p: usize,
}

impl Default for SelectionConfig {
    fn default() -> Self {
        SelectionConfig {
            m: DEFAULT_M,
            p: DEFAULT_P,
        }
    }
}

impl SelectionConfig {
    pub fn new(m: usize, p: usize) -> Result<Self, SelectionError> {
        let c = SelectionConfig { m, p };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<(), SelectionError> {
        if self.p == 0 || self.p >= self.m || self.m > N_FEATURES {
            return Err(SelectionError::Cutoffs { m: self.m, p: self.p });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RankingEntry {
    pub label: FeatureLabel,
    pub score: Option<f64>,
}

/// Features in rank order. `source` names the dataset and the classifier
/// or filter that produced it, e.g. `polish/knn`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankingTable {
    pub source: String,
    pub entries: Vec<RankingEntry>,
}

impl RankingTable {
    /// Sorts by descending score, ties by ascending feature index.
    pub fn from_scores(source: impl Into<String>, scores: &[(FeatureLabel, f64)]) -> Self {
        let mut v = scores.to_vec();
        v.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
        RankingTable {
            source: source.into(),
            entries: v
                .into_iter()
                .map(|(label, s)| RankingEntry { label, score: Some(s) })
                .collect(),
        }
    }

    /// An unscored ranking in the given order.
    pub fn from_labels(source: impl Into<String>, labels: &[FeatureLabel]) -> Result<Self, SelectionError> {
        let mut seen = BTreeSet::new();
        if let Some(&d) = labels.iter().find(|l| !seen.insert(**l)) {
            return Err(SelectionError::Duplicate(d));
        }
        Ok(RankingTable {
            source: source.into(),
            entries: labels.iter().map(|&label| RankingEntry { label, score: None }).collect(),
        })
    }

    pub fn labels(&self) -> Vec<FeatureLabel> {
        self.entries.iter().map(|e| e.label).collect()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// True when all 84 labels appear.
    pub fn is_total(&self) -> bool {
        self.labels().into_iter().collect::<BTreeSet<_>>().len() == N_FEATURES
    }

    pub fn position(&self, l: FeatureLabel) -> Option<usize> {
        self.entries.iter().position(|e| e.label == l)
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<(), SelectionError> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["rank", "feature_label", "score"])?;
        for (i, e) in self.entries.iter().enumerate() {
            let score = e.score.map(|s| s.to_string()).unwrap_or_default();
            out.write_record([(i + 1).to_string(), e.label.to_string(), score])?;
        }
        out.flush()?;
        Ok(())
    }

    fn parse_rows<R: Read>(source: &str, r: R) -> Result<Vec<RankingEntry>, SelectionError> {
        let mut rd = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(r);
        let mut entries = vec![];
        for (i, rec) in rd.records().enumerate() {
            let rec = rec?;
            let line = i + 2;
            let err = |msg: String| SelectionError::Parse { line, msg };
            let label: FeatureLabel = rec
                .get(1)
                .ok_or_else(|| err("missing feature_label".into()))?
                .parse()
                .map_err(|e: FeatureError| err(e.to_string()))?;
            let score = match rec.get(2).unwrap_or("") {
                "" => None,
                s => Some(s.parse::<f64>().map_err(|e| err(format!("score: {e}")))?),
            };
            entries.push(RankingEntry { label, score });
        }
        log::debug!("read {} ranking rows from {source}", entries.len());
        Ok(entries)
    }

    /// Strict reader: every label at most once.
    pub fn read_csv<R: Read>(source: impl Into<String>, r: R) -> Result<Self, SelectionError> {
        let source = source.into();
        let entries = Self::parse_rows(&source, r)?;
        let mut seen = BTreeSet::new();
        if let Some(e) = entries.iter().find(|e| !seen.insert(e.label)) {
            return Err(SelectionError::Duplicate(e.label));
        }
        Ok(RankingTable { source, entries })
    }

    /// Keeps the first occurrence of a repeated label and returns the
    /// dropped repeats. Meant for transcribed tables with copying errors.
    pub fn read_csv_lenient<R: Read>(
        source: impl Into<String>,
        r: R,
    ) -> Result<(Self, Vec<FeatureLabel>), SelectionError> {
        let source = source.into();
        let mut seen = BTreeSet::new();
        let mut dropped = vec![];
        let entries = Self::parse_rows(&source, r)?
            .into_iter()
            .filter(|e| {
                let fresh = seen.insert(e.label);
                if !fresh {
                    dropped.push(e.label);
                }
                fresh
            })
            .collect();
        Ok((RankingTable { source, entries }, dropped))
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), SelectionError> {
        self.write_csv(std::fs::File::create(path)?)
    }

    /// Strict load; the source name is the file stem.
    pub fn load(path: impl AsRef<Path>) -> Result<Self, SelectionError> {
        let path = path.as_ref();
        Self::read_csv(stem(path), std::fs::File::open(path)?)
    }

    pub fn load_lenient(path: impl AsRef<Path>) -> Result<(Self, Vec<FeatureLabel>), SelectionError> {
        let path = path.as_ref();
        Self::read_csv_lenient(stem(path), std::fs::File::open(path)?)
    }
}

fn stem(p: &Path) -> String {
    p.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default()
}

/// An unordered label set with a record of how it was derived.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureSet {
    pub labels: BTreeSet<FeatureLabel>,
    pub provenance: String,
}

impl FeatureSet {
    pub fn new(labels: impl IntoIterator<Item = FeatureLabel>, provenance: impl Into<String>) -> Self {
        FeatureSet {
            labels: labels.into_iter().collect(),
            provenance: provenance.into(),
        }
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn contains(&self, l: FeatureLabel) -> bool {
        self.labels.contains(&l)
    }

    pub fn is_subset(&self, other: &FeatureSet) -> bool {
        self.labels.is_subset(&other.labels)
    }

    /// Labels in ascending index order.
    pub fn to_vec(&self) -> Vec<FeatureLabel> {
        self.labels.iter().copied().collect()
    }
}

impl fmt::Display for FeatureSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let v: Vec<String> = self.labels.iter().map(|l| l.to_string()).collect();
        write!(f, "{{{}}}", v.join(", "))
    }
}

/// The first m labels of a ranking.
pub fn top_m(r: &RankingTable, m: usize) -> Result<FeatureSet, SelectionError> {
    if m == 0 || m > N_FEATURES {
        return Err(SelectionError::BadM(m));
    }
    if r.len() < m {
        return Err(SelectionError::ShortRanking {
            source_name: r.source.clone(),
            len: r.len(),
            m,
        });
    }
    Ok(FeatureSet::new(
        r.entries[..m].iter().map(|e| e.label),
        format!("top{m}({})", r.source),
    ))
}

pub fn common_features(sets: &[FeatureSet]) -> Result<FeatureSet, SelectionError> {
    if sets.len() < 2 {
        return Err(SelectionError::TooFewInputs {
            op: "common_features",
            need: 2,
            got: sets.len(),
        });
    }
    let mut acc = sets[0].labels.clone();
    for s in &sets[1..] {
        acc = acc.intersection(&s.labels).copied().collect();
    }
    let prov: Vec<&str> = sets.iter().map(|s| s.provenance.as_str()).collect();
    Ok(FeatureSet {
        labels: acc,
        provenance: format!("common[{}]", prov.join("; ")),
    })
}

/// Union of each ranking's top-p prefix; requires p < m.
pub fn special_features(rankings: &[RankingTable], p: usize, m: usize) -> Result<FeatureSet, SelectionError> {
    SelectionConfig { m, p }.validate()?;
    let mut labels = BTreeSet::new();
    let mut prov = vec![];
    for r in rankings {
        let t = top_m(r, p)?;
        labels.extend(t.labels);
        prov.push(t.provenance);
    }
    Ok(FeatureSet {
        labels,
        provenance: format!("special[{}]", prov.join("; ")),
    })
}

fn intersect_tops(
    op: &'static str,
    rankings: &BTreeMap<String, RankingTable>,
    m: usize,
) -> Result<FeatureSet, SelectionError> {
    if rankings.len() < 2 {
        return Err(SelectionError::TooFewInputs {
            op,
            need: 2,
            got: rankings.len(),
        });
    }
    let tops = rankings.values().map(|r| top_m(r, m)).collect::<Result<Vec<_>, _>>()?;
    let mut s = common_features(&tops)?;
    s.provenance = format!("{op}: {}", s.provenance);
    Ok(s)
}

/// Intersection over datasets of the top-m sets for one classifier.
pub fn language_independent(
    per_dataset: &BTreeMap<String, RankingTable>,
    m: usize,
) -> Result<FeatureSet, SelectionError> {
    intersect_tops("language_independent", per_dataset, m)
}

/// Intersection over classifiers of the top-m sets for one dataset.
pub fn classifier_independent(
    per_classifier: &BTreeMap<String, RankingTable>,
    m: usize,
) -> Result<FeatureSet, SelectionError> {
    intersect_tops("classifier_independent", per_classifier, m)
}

/// Intersection of language-independent sets across classifiers.
pub fn fully_independent(per_classifier: &BTreeMap<String, FeatureSet>) -> Result<FeatureSet, SelectionError> {
    let sets: Vec<FeatureSet> = per_classifier.values().cloned().collect();
    let mut s = common_features(&sets)?;
    s.provenance = format!("fully_independent: {}", s.provenance);
    Ok(s)
}

/// Cross-validated single-feature accuracy for every column, ranked.
pub fn rank_individual(
    data: &LabeledDataset,
    kind: ClassifierKind,
    train_cfg: &TrainConfig,
    cv: &CvConfig,
) -> Result<RankingTable, SelectionError> {
    let scores = data
        .columns()
        .par_iter()
        .map(|&l| cross_validate(data, &[l], kind, train_cfg, cv).map(|r| (l, r.accuracy)))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(RankingTable::from_scores(format!("{}/{}", data.corpus_id, kind), &scores))
}

pub fn rank_filter(data: &LabeledDataset, method: FilterMethod) -> Result<RankingTable, SelectionError> {
    let s = filter_scores(data, method)?;
    let scores: Vec<(FeatureLabel, f64)> = data.columns().iter().copied().zip(s).collect();
    Ok(RankingTable::from_scores(format!("{}/{}", data.corpus_id, method.short()), &scores))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WeightedFeature {
    pub label: FeatureLabel,
    pub name: &'static str,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EmotionReport {
    pub emotion: String,
    pub rounds: usize,
    pub n_samples: usize,
    pub n_positive: usize,
    /// Features with nonzero cumulative vote weight, heaviest first.
    pub weighted_features: Vec<WeightedFeature>,
    pub loo_accuracy: f64,
    /// Leave-one-out recall of the emotion itself.
    pub emotion_recall: f64,
}

/// One-vs-rest AdaBoost analysis of a single class: cumulative stump
/// weights from a fit on all samples, and leave-one-out accuracy.
pub fn per_emotion_analysis(
    data: &LabeledDataset,
    emotion: &str,
    rounds: usize,
) -> Result<EmotionReport, SelectionError> {
    let c = data
        .class_index(emotion)
        .ok_or_else(|| SelectionError::UnknownEmotion(emotion.to_string()))?;
    let labels: Vec<usize> = data.labels().iter().map(|&l| usize::from(l == c)).collect();
    let n_positive = labels.iter().sum();
    if n_positive == data.n_samples() {
        return Err(SelectionError::OneClass(emotion.to_string()));
    }
    let bin = data.relabel(labels, vec![format!("not_{emotion}"), emotion.to_string()]);
    let cfg = TrainConfig {
        boost_rounds: rounds,
        ..TrainConfig::default()
    };
    let model = classifiers::train(&bin, ClassifierKind::Adaboost, &cfg)?;
    let ModelParams::Adaboost(b) = &model.parameters else {
        unreachable!("trained an AdaBoost model")
    };
    let mut weighted: Vec<WeightedFeature> = bin
        .columns()
        .iter()
        .zip(b.feature_weights())
        .filter(|(_, w)| *w > 0.0)
        .map(|(&label, weight)| WeightedFeature {
            label,
            name: label.name(),
            weight,
        })
        .collect();
    weighted.sort_by(|a, b| b.weight.total_cmp(&a.weight).then(a.label.cmp(&b.label)));
    let all = bin.columns().to_vec();
    let report = cross_validate(&bin, &all, ClassifierKind::Adaboost, &cfg, &CvConfig::loo())?;
    Ok(EmotionReport {
        emotion: emotion.to_string(),
        rounds,
        n_samples: bin.n_samples(),
        n_positive,
        weighted_features: weighted,
        loo_accuracy: report.accuracy,
        emotion_recall: report.per_class_recall[1],
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Strategy {
    LangIndep,
    ClfIndep,
    Full,
    Special,
    Common,
}

impl Strategy {
    pub fn name(self) -> &'static str {
        match self {
            Strategy::LangIndep => "lang-indep",
            Strategy::ClfIndep => "clf-indep",
            Strategy::Full => "full",
            Strategy::Special => "special",
            Strategy::Common => "common",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionReport {
    pub strategy: Strategy,
    pub inputs: Vec<String>,
    pub m: usize,
    pub p: Option<usize>,
    pub result_labels: Vec<FeatureLabel>,
    pub provenance: String,
}

impl SelectionReport {
    pub fn new(strategy: Strategy, inputs: Vec<String>, m: usize, p: Option<usize>, set: &FeatureSet) -> Self {
        SelectionReport {
            strategy,
            inputs,
            m,
            p,
            result_labels: set.to_vec(),
            provenance: set.provenance.clone(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn from_json(s: &str) -> Result<Self, SelectionError> {
        Ok(serde_json::from_str(s)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::seq::SliceRandom;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn x(i: usize) -> FeatureLabel {
        FeatureLabel::new(i).unwrap()
    }

    fn ranking(order: &[usize]) -> RankingTable {
        RankingTable::from_labels("t", &order.iter().map(|&i| x(i)).collect::<Vec<_>>()).unwrap()
    }

    fn identity() -> Vec<usize> {
        (1..=84).collect()
    }

    #[test]
    fn top_m_prefix_and_bounds() {
        let r = ranking(&identity());
        assert_eq!(top_m(&r, 22).unwrap().to_vec(), (1..=22).map(x).collect::<Vec<_>>());
        assert_eq!(top_m(&r, 84).unwrap().len(), 84);
        assert_eq!(top_m(&r, 0).unwrap_err().code(), "bad_m");
        assert_eq!(top_m(&r, 85).unwrap_err().code(), "bad_m");
    }

    #[test]
    fn common_examples() {
        let a = FeatureSet::new([x(1), x(2)], "a");
        let b = FeatureSet::new([x(3)], "b");
        assert!(common_features(&[a.clone(), b]).unwrap().is_empty());
        assert_eq!(common_features(&[a.clone()]).unwrap_err().code(), "too_few_inputs");
        let s = common_features(&[a.clone(), a]).unwrap();
        assert_eq!(s.to_vec(), vec![x(1), x(2)]);
        assert!(s.provenance.contains("a; a"));
    }

    #[test]
    fn special_examples() {
        let a = ranking(&identity());
        let mut rev = identity();
        rev.reverse();
        let b = ranking(&rev);
        assert_eq!(special_features(&[a.clone(), b], 10, 22).unwrap().len(), 20);
        assert_eq!(special_features(&[a.clone(), a.clone()], 10, 22).unwrap().len(), 10);
        assert_eq!(special_features(&[a.clone()], 22, 22).unwrap_err().code(), "bad_cutoffs");
        assert!(SelectionConfig::new(22, 10).is_ok());
        assert!(SelectionConfig::new(85, 10).is_err());
        assert!(SelectionConfig::new(22, 0).is_err());
    }

    #[test]
    fn independence_preconditions() {
        let mut one = BTreeMap::new();
        one.insert("polish".to_string(), ranking(&identity()));
        assert_eq!(language_independent(&one, 22).unwrap_err().code(), "too_few_inputs");
        one.insert("savee".to_string(), ranking(&identity()));
        let s = classifier_independent(&one, 22).unwrap();
        assert_eq!(s, FeatureSet::new((1..=22).map(x), s.provenance.clone()));
        let mut fam = BTreeMap::new();
        fam.insert("knn".to_string(), s);
        fam.insert("nn".to_string(), FeatureSet::new([], "empty"));
        assert!(fully_independent(&fam).unwrap().is_empty());
    }

    #[test]
    fn csv_round_trip_and_lenient() {
        let scores: Vec<(FeatureLabel, f64)> = (1..=84).map(|i| (x(i), (i % 7) as f64 / 7.0)).collect();
        let r = RankingTable::from_scores("s", &scores);
        let mut buf = vec![];
        r.write_csv(&mut buf).unwrap();
        let back = RankingTable::read_csv("s", buf.as_slice()).unwrap();
        assert_eq!(back, r);
        assert!(back.is_total());
        // 6/7 ties: x6, x13, ... in index order
        assert_eq!(&back.labels()[..2], &[x(6), x(13)]);

        let dup = "rank,feature_label,score\n1,x5,0.9\n2,x3,\n3,x5,0.1\n";
        assert_eq!(RankingTable::read_csv("d", dup.as_bytes()).unwrap_err().code(), "duplicate_feature");
        let (t, dropped) = RankingTable::read_csv_lenient("d", dup.as_bytes()).unwrap();
        assert_eq!(t.labels(), vec![x(5), x(3)]);
        assert_eq!(t.entries[1].score, None);
        assert_eq!(dropped, vec![x(5)]);
        let bad = "rank,feature_label,score\n1,x99,0.5\n";
        assert_eq!(RankingTable::read_csv("b", bad.as_bytes()).unwrap_err().code(), "ranking_parse");
    }

    #[test]
    fn report_json_shape() {
        let s = FeatureSet::new([x(84), x(33)], "demo");
        let r = SelectionReport::new(super::Strategy::Common, vec!["a".into()], 22, None, &s);
        let v: serde_json::Value = serde_json::from_str(&r.to_json()).unwrap();
        assert_eq!(v["strategy"], "common");
        assert_eq!(v["result_labels"], serde_json::json!(["x33", "x84"]));
        assert_eq!(SelectionReport::from_json(&r.to_json()).unwrap(), r);
    }

    /// Column 0 carries the class; the rest are noise.
    fn planted(seed: u64) -> LabeledDataset {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let labels: Vec<usize> = (0..60).map(|i| i % 3).collect();
        let rows = labels
            .iter()
            .map(|&c| {
                let mut r: Vec<f64> = (0..6).map(|_| rng.gen_range(0.0..1.0)).collect();
                r[3] = c as f64 + rng.gen_range(-0.2..0.2);
                r
            })
            .collect();
        LabeledDataset::from_indices(rows, labels).unwrap()
    }

    #[test]
    fn individual_ranking_finds_planted_feature() {
        let d = planted(1);
        let r = rank_individual(&d, ClassifierKind::Knn, &TrainConfig::default(), &CvConfig::kfold(5, 0)).unwrap();
        assert_eq!(r.entries[0].label, x(4));
        assert_eq!(r.len(), 6);
        let again = rank_individual(&d, ClassifierKind::Knn, &TrainConfig::default(), &CvConfig::kfold(5, 0)).unwrap();
        assert_eq!(r, again);
    }

    #[test]
    fn duplicated_feature_ties_by_index() {
        let d = planted(2);
        let rows = d.rows().iter().map(|r| vec![r[1], r[0], r[1]]).collect();
        let d = LabeledDataset::from_indices(rows, d.labels().to_vec()).unwrap();
        let r = rank_individual(&d, ClassifierKind::Knn, &TrainConfig::default(), &CvConfig::kfold(5, 0)).unwrap();
        let (p1, p3) = (r.position(x(1)).unwrap(), r.position(x(3)).unwrap());
        assert_eq!(r.entries[p1].score, r.entries[p3].score);
        assert!(p1 < p3);
    }

    #[test]
    fn filter_ranking_finds_planted_feature() {
        let d = planted(3);
        for m in [
            FilterMethod::GainRatio,
            FilterMethod::InfoGain,
            FilterMethod::SymmetricalUncertainty,
            FilterMethod::ReliefF,
        ] {
            let r = rank_filter(&d, m).unwrap();
            assert_eq!(r.entries[0].label, x(4), "{m:?}");
        }
    }

    #[test]
    fn emotion_analysis() {
        let d = planted(4);
        let named = d.relabel(
            d.labels().to_vec(),
            vec!["anger".into(), "fear".into(), "sadness".into()],
        );
        let rep = per_emotion_analysis(&named, "sadness", 10).unwrap();
        assert_eq!(rep.weighted_features[0].label, x(4));
        assert!(rep.loo_accuracy >= 0.95);
        assert_eq!(rep.n_positive, 20);
        assert_eq!(per_emotion_analysis(&named, "joy", 10).unwrap_err().code(), "unknown_emotion");
        let one = named.relabel(vec![0; 60], vec!["anger".into()]);
        assert_eq!(per_emotion_analysis(&one, "anger", 10).unwrap_err().code(), "one_class");
    }

    fn shuffled(seed: u64) -> RankingTable {
        let mut v = identity();
        v.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
        ranking(&v)
    }

    proptest! {
        #[test]
        fn top_m_monotone(seed in 0u64..1000, m1 in 1usize..=84, m2 in 1usize..=84) {
            let r = shuffled(seed);
            let (a, b) = (m1.min(m2), m1.max(m2));
            prop_assert!(top_m(&r, a).unwrap().is_subset(&top_m(&r, b).unwrap()));
        }

        #[test]
        fn common_and_special_bounds(seeds in prop::collection::vec(0u64..1000, 2..5), m in 2usize..40) {
            let rs: Vec<RankingTable> = seeds.iter().map(|&s| shuffled(s)).collect();
            let tops: Vec<FeatureSet> = rs.iter().map(|r| top_m(r, m).unwrap()).collect();
            let c = common_features(&tops).unwrap();
            for t in &tops {
                prop_assert!(c.is_subset(t));
            }
            let p = m / 2;
            if p > 0 {
                let s = special_features(&rs, p, m).unwrap();
                for r in &rs {
                    prop_assert!(top_m(r, p).unwrap().is_subset(&s));
                }
            }
        }

        #[test]
        fn lang_indep_shrinks_as_datasets_grow(seeds in prop::collection::vec(0u64..1000, 3..6), m in 5usize..60) {
            let mut map = BTreeMap::new();
            let mut last: Option<usize> = None;
            for (i, &s) in seeds.iter().enumerate() {
                map.insert(format!("d{i}"), shuffled(s));
                if map.len() >= 2 {
                    let n = language_independent(&map, m).unwrap().len();
                    prop_assert!(n <= m);
                    if let Some(prev) = last {
                        prop_assert!(n <= prev);
                    }
                    last = Some(n);
                }
            }
        }

        #[test]
        fn intersection_order_irrelevant(seed in 0u64..10_000, m in 5usize..50) {
            // grid[dataset][classifier]
            let grid: Vec<Vec<RankingTable>> = (0..3)
                .map(|d| (0..3).map(|c| shuffled(seed * 9 + d * 3 + c)).collect())
                .collect();
            let by_clf: BTreeMap<String, FeatureSet> = (0..3)
                .map(|c| {
                    let m_: BTreeMap<String, RankingTable> =
                        (0..3).map(|d| (format!("d{d}"), grid[d as usize][c as usize].clone())).collect();
                    (format!("c{c}"), language_independent(&m_, m).unwrap())
                })
                .collect();
            let by_ds: BTreeMap<String, FeatureSet> = (0..3)
                .map(|d| {
                    let m_: BTreeMap<String, RankingTable> =
                        (0..3).map(|c| (format!("c{c}"), grid[d as usize][c as usize].clone())).collect();
                    (format!("d{d}"), classifier_independent(&m_, m).unwrap())
                })
                .collect();
            prop_assert_eq!(
                fully_independent(&by_clf).unwrap().labels,
                fully_independent(&by_ds).unwrap().labels
            );
        }
    }
}
