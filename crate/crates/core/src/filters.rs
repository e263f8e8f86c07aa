//! Classifier-independent feature scores: entropy-based measures on
//! discretized columns, CFS merit, and ReliefF.

use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dataset::LabeledDataset;

pub const DEFAULT_BINS: usize = 10;
pub const DEFAULT_RELIEF_K: usize = 10;

#[derive(Debug, Error, PartialEq)]
pub enum FilterError {
    #[error("need at least 2 bins, got {0}")]
    TooFewBins(usize),
    #[error("empty column")]
    EmptyColumn,
    #[error("length mismatch: {0} values vs {1} labels")]
    LengthMismatch(usize, usize),
    #[error("empty feature subset")]
    EmptySubset,
    #[error("column {0} is out of range")]
    BadColumn(usize),
    #[error("class {class} has {count} samples; ReliefF with k={k} needs at least {need}")]
    ClassTooSmall {
        class: usize,
        count: usize,
        k: usize,
        need: usize,
    },
    #[error("k must be positive")]
    ZeroK,
}

impl FilterError {
    pub fn code(&self) -> &'static str {
        match self {
            FilterError::TooFewBins(_) => "too_few_bins",
            FilterError::EmptyColumn => "empty_column",
            FilterError::LengthMismatch(..) => "length_mismatch",
            FilterError::EmptySubset => "empty_subset",
            FilterError::BadColumn(_) => "bad_column",
            FilterError::ClassTooSmall { .. } => "class_too_small",
            FilterError::ZeroK => "zero_k",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteColumn {
    pub bins: Vec<usize>,
    pub n_bins: usize,
    /// `n_bins + 1` strictly increasing cut points.
    pub edges: Vec<f64>,
}

/// Equal-width binning over [min, max]; the maximum lands in the last bin
/// and a constant column maps entirely to bin 0.
pub fn discretize(column: &[f64], n_bins: usize) -> Result<DiscreteColumn, FilterError> {
    if n_bins < 2 {
        return Err(FilterError::TooFewBins(n_bins));
    }
    if column.is_empty() {
        return Err(FilterError::EmptyColumn);
    }
    let min = column.iter().copied().fold(f64::INFINITY, f64::min);
    let max = column.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let span = max - min;
    let b = n_bins as f64;
    let (bins, width) = if span > 0.0 {
        let bins = column
            .iter()
            .map(|v| (((v - min) / span * b).floor() as usize).min(n_bins - 1))
            .collect();
        (bins, span / b)
    } else {
        (vec![0; column.len()], 1.0 / b)
    };
    let edges = (0..=n_bins)
        .map(|i| if i == n_bins && span > 0.0 { max } else { min + width * i as f64 })
        .collect();
    Ok(DiscreteColumn {
        bins,
        n_bins,
        edges,
    })
}

fn counts(xs: &[usize]) -> HashMap<usize, usize> {
    let mut m = HashMap::new();
    for &x in xs {
        *m.entry(x).or_insert(0) += 1;
    }
    m
}

/// Shannon entropy in bits.
pub fn entropy(labels: &[usize]) -> f64 {
    let n = labels.len() as f64;
    if labels.is_empty() {
        return 0.0;
    }
    let mut keys: Vec<(usize, usize)> = counts(labels).into_iter().collect();
    keys.sort_unstable();
    -keys
        .iter()
        .map(|&(_, c)| {
            let p = c as f64 / n;
            p * p.log2()
        })
        .sum::<f64>()
}

/// H(Y | X) in bits.
pub fn conditional_entropy(x: &[usize], y: &[usize]) -> f64 {
    let n = x.len() as f64;
    let mut groups: HashMap<usize, Vec<usize>> = HashMap::new();
    for (&a, &b) in x.iter().zip(y) {
        groups.entry(a).or_default().push(b);
    }
    let mut keys: Vec<_> = groups.keys().copied().collect();
    keys.sort_unstable();
    keys.iter()
        .map(|k| {
            let g = &groups[k];
            g.len() as f64 / n * entropy(g)
        })
        .sum()
}

fn check(x: &[usize], y: &[usize]) -> Result<(), FilterError> {
    if x.len() != y.len() {
        return Err(FilterError::LengthMismatch(x.len(), y.len()));
    }
    if x.is_empty() {
        return Err(FilterError::EmptyColumn);
    }
    Ok(())
}

fn ig_raw(x: &[usize], y: &[usize]) -> f64 {
    let hy = entropy(y);
    let hx = entropy(x);
    (hy - conditional_entropy(x, y)).clamp(0.0, hx.min(hy))
}

/// IG = H(Y) − H(Y | X), clamped to [0, min(H(X), H(Y))] against rounding.
pub fn info_gain(feature: &DiscreteColumn, labels: &[usize]) -> Result<f64, FilterError> {
    check(&feature.bins, labels)?;
    Ok(ig_raw(&feature.bins, labels))
}

/// IG / H(X), with 0 when H(X) = 0.
pub fn gain_ratio(feature: &DiscreteColumn, labels: &[usize]) -> Result<f64, FilterError> {
    check(&feature.bins, labels)?;
    let hx = entropy(&feature.bins);
    if hx <= 0.0 {
        return Ok(0.0);
    }
    Ok((ig_raw(&feature.bins, labels) / hx).clamp(0.0, 1.0))
}

/// 2·IG / (H(X) + H(Y)), with 0 when the denominator vanishes.
pub fn symmetrical_uncertainty(
    feature: &DiscreteColumn,
    labels: &[usize],
) -> Result<f64, FilterError> {
    check(&feature.bins, labels)?;
    Ok(su_raw(&feature.bins, labels))
}

fn su_raw(x: &[usize], y: &[usize]) -> f64 {
    let den = entropy(x) + entropy(y);
    if den <= 0.0 {
        return 0.0;
    }
    (2.0 * ig_raw(x, y) / den).clamp(0.0, 1.0)
}

/// Correlation-based subset merit with SU as the correlation measure.
/// `subset` holds column indices into `data`.
pub fn cfs_merit(subset: &[usize], data: &LabeledDataset, n_bins: usize) -> Result<f64, FilterError> {
    if subset.is_empty() {
        return Err(FilterError::EmptySubset);
    }
    if let Some(&j) = subset.iter().find(|&&j| j >= data.n_features()) {
        return Err(FilterError::BadColumn(j));
    }
    let cols = subset
        .iter()
        .map(|&j| discretize(&data.column(j), n_bins))
        .collect::<Result<Vec<_>, _>>()?;
    let k = cols.len() as f64;
    let rcf = cols.iter().map(|c| su_raw(&c.bins, data.labels())).sum::<f64>() / k;
    let mut rff = 0.0;
    let mut pairs = 0usize;
    for a in 0..cols.len() {
        for b in a + 1..cols.len() {
            rff += su_raw(&cols[a].bins, &cols[b].bins);
            pairs += 1;
        }
    }
    let rff = if pairs > 0 { rff / pairs as f64 } else { 0.0 };
    let den = (k + k * (k - 1.0) * rff).sqrt();
    Ok(k * rcf / den)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum ReliefSampling {
    /// Every instance once, in index order.
    Exhaustive,
    /// `iters` instances drawn uniformly with replacement.
    Random { iters: usize, seed: u64 },
}

/// Sampling order used by ReliefF, exposed for reference implementations.
pub fn relief_schedule(n: usize, sampling: ReliefSampling) -> Vec<usize> {
    match sampling {
        ReliefSampling::Exhaustive => (0..n).collect(),
        ReliefSampling::Random { iters, seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (0..iters).map(|_| rng.gen_range(0..n)).collect()
        }
    }
}

/// ReliefF weights, one per column. Features are range-normalized and
/// neighbours found by Manhattan distance; distance ties go to the lower
/// row index.
pub fn relieff(
    data: &LabeledDataset,
    k: usize,
    sampling: ReliefSampling,
) -> Result<Vec<f64>, FilterError> {
    if k == 0 {
        return Err(FilterError::ZeroK);
    }
    let n = data.n_samples();
    let d = data.n_features();
    let counts = data.class_counts();
    for (c, &cnt) in counts.iter().enumerate() {
        if cnt > 0 && cnt < k + 1 {
            return Err(FilterError::ClassTooSmall {
                class: c,
                count: cnt,
                k,
                need: k + 1,
            });
        }
    }
    let (lo, range): (Vec<f64>, Vec<f64>) = (0..d)
        .map(|j| {
            let col = data.column(j);
            let mn = col.iter().copied().fold(f64::INFINITY, f64::min);
            let mx = col.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            (mn, mx - mn)
        })
        .unzip();
    let x: Vec<Vec<f64>> = data
        .rows()
        .iter()
        .map(|r| {
            (0..d)
                .map(|j| if range[j] > 0.0 { (r[j] - lo[j]) / range[j] } else { 0.0 })
                .collect()
        })
        .collect();
    let y = data.labels();
    let prior: Vec<f64> = counts.iter().map(|&c| c as f64 / n as f64).collect();

    let schedule = relief_schedule(n, sampling);
    let mut w = vec![0.0; d];
    if schedule.is_empty() {
        return Ok(w);
    }
    let m = schedule.len() as f64;
    let kf = k as f64;
    for &r in &schedule {
        let mut order: Vec<(f64, usize)> = (0..n)
            .filter(|&i| i != r)
            .map(|i| {
                let dist: f64 = x[r].iter().zip(&x[i]).map(|(a, b)| (a - b).abs()).sum();
                (dist, i)
            })
            .collect();
        order.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        let mut taken = vec![0usize; counts.len()];
        let own = 1.0 - prior[y[r]];
        for &(_, i) in &order {
            let c = y[i];
            if taken[c] == k {
                continue;
            }
            taken[c] += 1;
            let scale = if c == y[r] {
                -1.0 / (m * kf)
            } else if own > 0.0 {
                prior[c] / own / (m * kf)
            } else {
                0.0
            };
            for j in 0..d {
                w[j] += scale * (x[r][j] - x[i][j]).abs();
            }
        }
    }
    for v in w.iter_mut() {
        *v = v.clamp(-1.0, 1.0);
    }
    Ok(w)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum FilterMethod {
    #[serde(rename = "GR")]
    GainRatio,
    #[serde(rename = "IG")]
    InfoGain,
    #[serde(rename = "SU")]
    SymmetricalUncertainty,
    #[serde(rename = "RF")]
    ReliefF,
}

impl FilterMethod {
    pub fn short(self) -> &'static str {
        match self {
            FilterMethod::GainRatio => "GR",
            FilterMethod::InfoGain => "IG",
            FilterMethod::SymmetricalUncertainty => "SU",
            FilterMethod::ReliefF => "RF",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s.to_ascii_uppercase().as_str() {
            "GR" => Some(FilterMethod::GainRatio),
            "IG" => Some(FilterMethod::InfoGain),
            "SU" => Some(FilterMethod::SymmetricalUncertainty),
            "RF" | "RELIEFF" => Some(FilterMethod::ReliefF),
            _ => None,
        }
    }
}

/// One score per column of `data` under the given method.
pub fn filter_scores(data: &LabeledDataset, method: FilterMethod) -> Result<Vec<f64>, FilterError> {
    if method == FilterMethod::ReliefF {
        let min_class = data.class_counts().into_iter().filter(|&c| c > 0).min().unwrap_or(1);
        let k = DEFAULT_RELIEF_K.min(min_class.saturating_sub(1)).max(1);
        return relieff(data, k, ReliefSampling::Exhaustive);
    }
    (0..data.n_features())
        .map(|j| {
            let col = discretize(&data.column(j), DEFAULT_BINS)?;
            match method {
                FilterMethod::GainRatio => gain_ratio(&col, data.labels()),
                FilterMethod::InfoGain => info_gain(&col, data.labels()),
                _ => symmetrical_uncertainty(&col, data.labels()),
            }
        })
        .collect()
}
