//! The 84-entry feature catalogue and its label ↔ name mapping.

use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::FeatureError;

pub const N_FEATURES: usize = 84;
pub const N_BANDS: usize = 13;

/// One of x1..x84. Ordering follows the numeric index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct FeatureLabel(u8);

impl FeatureLabel {
    pub fn new(index: usize) -> Result<Self, FeatureError> {
        if (1..=N_FEATURES).contains(&index) {
            Ok(FeatureLabel(index as u8))
        } else {
            Err(FeatureError::LabelOutOfRange(index))
        }
    }

    /// 1-based index into the catalogue.
    pub fn index(self) -> usize {
        self.0 as usize
    }

    /// 0-based column in a feature vector.
    pub fn column(self) -> usize {
        self.0 as usize - 1
    }

    pub fn name(self) -> &'static str {
        &catalogue()[self.column()]
    }

    pub fn all() -> impl Iterator<Item = FeatureLabel> {
        (1..=N_FEATURES).map(|i| FeatureLabel(i as u8))
    }
}

impl fmt::Display for FeatureLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "x{}", self.0)
    }
}

/// Accepts either the `x<n>` form or a canonical feature name.
impl FromStr for FeatureLabel {
    type Err = FeatureError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let t = s.trim();
        if let Some(rest) = t.strip_prefix('x') {
            if let Ok(n) = rest.parse::<usize>() {
                return FeatureLabel::new(n);
            }
        }
        label_of(t)
    }
}

impl Serialize for FeatureLabel {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for FeatureLabel {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

fn catalogue() -> &'static [String] {
    static NAMES: OnceLock<Vec<String>> = OnceLock::new();
    NAMES.get_or_init(|| {
        let mut v = Vec::with_capacity(N_FEATURES);
        for stat in ["Max", "Min", "Std", "Mean", "Median"] {
            for f in 1..=3 {
                v.push(format!("{stat}(F{f})"));
            }
        }
        for stat in ["Max", "Min", "Std", "Mean", "Median"] {
            v.push(format!("Mean({stat}(F))"));
        }
        for name in [
            "Intensity",
            "Std",
            "Autocorrelation",
            "Pitch",
            "HNR",
            "Min",
            "Mean",
            "Variance",
            "Max",
            "Percentile",
            "ZCR",
            "ZCRDensity",
        ] {
            v.push(name.to_string());
        }
        for i in 1..=N_BANDS {
            v.push(format!("MFCC_{i}"));
        }
        for i in 1..=N_BANDS {
            v.push(format!("Mean(MFCC_{i})"));
        }
        for i in 1..=N_BANDS {
            v.push(format!("FBE_{i}"));
        }
        for i in 1..=N_BANDS {
            v.push(format!("Mean(FBE_{i})"));
        }
        debug_assert_eq!(v.len(), N_FEATURES);
        v
    })
}

/// Looks up a canonical feature name, e.g. `"MFCC_1"` → x33.
pub fn label_of(name: &str) -> Result<FeatureLabel, FeatureError> {
    catalogue()
        .iter()
        .position(|n| n == name)
        .map(|i| FeatureLabel((i + 1) as u8))
        .ok_or_else(|| FeatureError::UnknownName(name.to_string()))
}

/// Named column offsets inside the 84-vector.
pub(crate) mod col {
    /// x1..x20: per-formant statistics then cross-formant means.
    pub const FORMANTS: usize = 0;
    pub const N_FORMANT_STATS: usize = 20;
    pub const INTENSITY: usize = 20;
    pub const STD: usize = 21;
    pub const AUTOCORR: usize = 22;
    pub const PITCH: usize = 23;
    pub const HNR: usize = 24;
    pub const MIN: usize = 25;
    pub const MEAN: usize = 26;
    pub const VARIANCE: usize = 27;
    pub const MAX: usize = 28;
    pub const PERCENTILE: usize = 29;
    pub const ZCR: usize = 30;
    pub const ZCR_DENSITY: usize = 31;
    pub const MFCC_STD: usize = 32;
    pub const MFCC_MEAN: usize = 45;
    pub const FBE_STD: usize = 58;
    pub const FBE_MEAN: usize = 71;
}
