use std::collections::{BTreeMap, BTreeSet};

use vocalsel::features::FeatureLabel;
use vocalsel::fixtures::{fixture_dir, load_ranking, SelectionFixture, SummaryFixture};
use vocalsel::selection::{
    classifier_independent, common_features, fully_independent, language_independent, top_m, FeatureSet,
    RankingTable,
};

const M: usize = 22;
const CLASSIFIERS: [&str; 3] = ["knn", "msvm", "nn"];

fn labels(ix: &[usize]) -> BTreeSet<FeatureLabel> {
    ix.iter().map(|&i| FeatureLabel::new(i).unwrap()).collect()
}

fn selection(name: &str) -> SelectionFixture {
    SelectionFixture::load(fixture_dir().join("selection").join(format!("{name}.json"))).unwrap()
}

fn summary(name: &str) -> SummaryFixture {
    SummaryFixture::load(fixture_dir().join("selection").join(format!("{name}.json"))).unwrap()
}

fn ranking(clf: &str, ds: &str) -> RankingTable {
    load_ranking(&fixture_dir(), clf, ds).unwrap().0
}

fn common_of_rows(fx: &SelectionFixture) -> BTreeSet<FeatureLabel> {
    let tops: Vec<FeatureSet> = fx.rankings().unwrap().values().map(|r| top_m(r, M).unwrap()).collect();
    common_features(&tops).unwrap().labels
}

#[test]
fn only_the_polish_knn_table_has_repeats() {
    for clf in CLASSIFIERS {
        for ds in ["polish", "savee", "serbian", "italian"] {
            let (t, dropped) = load_ranking(&fixture_dir(), clf, ds).unwrap();
            if (clf, ds) == ("knn", "polish") {
                assert_eq!(dropped.iter().copied().collect::<BTreeSet<_>>(), labels(&[1, 5, 20]));
                assert_eq!(t.len(), 81);
            } else {
                assert!(dropped.is_empty(), "{clf}/{ds}");
                assert!(t.is_total(), "{clf}/{ds}");
            }
            assert_eq!(t.source, format!("{ds}/{clf}"));
        }
    }
}

#[test]
fn savee_classifier_independent_from_full_tables() {
    let per_clf: BTreeMap<String, RankingTable> =
        CLASSIFIERS.iter().map(|c| (c.to_string(), ranking(c, "savee"))).collect();
    let got = classifier_independent(&per_clf, M).unwrap();
    assert_eq!(got.labels, selection("clf_indep_savee").common_set().labels);
    assert_eq!(got.labels, summary("clf_indep_summary").column("savee").unwrap().labels);
}

#[test]
fn classifier_independent_summary_matches_its_rows() {
    let s = summary("clf_indep_summary");
    for ds in ["polish", "savee", "serbian"] {
        let fx = selection(&format!("clf_indep_{ds}"));
        assert_eq!(s.column(ds).unwrap().labels, fx.common_set().labels, "{ds}");
        assert_eq!(common_of_rows(&fx), fx.common_set().labels, "{ds}");
    }
}

#[test]
fn top_rows_are_prefixes_of_full_tables() {
    for clf in ["knn", "nn"] {
        let fx = selection(&format!("lang_indep_{clf}"));
        for (ds, row) in &fx.top_ranked {
            if (clf, ds.as_str()) == ("knn", "polish") {
                continue;
            }
            let full = ranking(clf, ds);
            let top: BTreeSet<_> = row.iter().copied().collect();
            assert_eq!(top, top_m(&full, M).unwrap().labels, "{clf}/{ds}");
        }
    }
}

#[test]
fn adding_italian_shrinks_each_column() {
    let with = summary("lang_indep_with_italian");
    let without = summary("lang_indep_summary");
    for clf in CLASSIFIERS {
        let a = with.column(clf).unwrap();
        let b = without.column(clf).unwrap();
        assert!(a.is_subset(&b), "{clf}: {a} not within {b}");
    }
    let per_ds = |clf: &str| -> BTreeMap<String, RankingTable> {
        ["polish", "savee", "serbian", "italian"]
            .iter()
            .map(|d| (d.to_string(), ranking(clf, d)))
            .collect()
    };
    for clf in ["knn", "nn"] {
        let got = language_independent(&per_ds(clf), M).unwrap();
        assert_eq!(got.labels, with.column(clf).unwrap().labels, "{clf}");
    }
}

#[test]
fn fully_independent_over_summary_columns() {
    let s = summary("lang_indep_summary");
    let cols: BTreeMap<String, FeatureSet> =
        CLASSIFIERS.iter().map(|c| (c.to_string(), s.column(c).unwrap())).collect();
    assert_eq!(fully_independent(&cols).unwrap().labels, labels(&[84]));
}

#[test]
fn knn_and_nn_columns_from_full_tables() {
    let s = summary("lang_indep_summary");
    for clf in ["knn", "nn"] {
        let per_ds: BTreeMap<String, RankingTable> = ["polish", "savee", "serbian"]
            .iter()
            .map(|d| (d.to_string(), ranking(clf, d)))
            .collect();
        assert_eq!(language_independent(&per_ds, M).unwrap().labels, s.column(clf).unwrap().labels);
    }
}
