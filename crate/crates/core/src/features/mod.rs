//! The 84-dimensional per-utterance feature vector.

mod catalogue;
pub mod formants;
pub mod pitch;
pub mod spectral;
pub mod stats;

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::audio::{frame_signal, Signal, Window};
pub use catalogue::{label_of, FeatureLabel, N_BANDS, N_FEATURES};
use catalogue::col;
pub use formants::{extract_formants, FormantTracks};
pub use pitch::{extract_hnr, extract_pitch, PitchConfig};
pub use spectral::{extract_fbe, extract_mfcc};
pub use stats::{extract_intensity, extract_zcr, signal_statistics, SignalStats, ZeroCrossings};

#[derive(Debug, Error)]
pub enum FeatureError {
    #[error("feature label x{0} is outside x1..x84")]
    LabelOutOfRange(usize),
    #[error("unknown feature name {0:?}")]
    UnknownName(String),
    #[error("feature vector must have 84 values, got {0}")]
    WrongLength(usize),
    #[error("non-finite value in column x{0}")]
    NonFinite(usize),
    #[error("config line {line}: {msg}")]
    Config { line: usize, msg: String },
    #[error("invalid extraction config: {0}")]
    InvalidConfig(&'static str),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl FeatureError {
    pub fn code(&self) -> &'static str {
        match self {
            FeatureError::LabelOutOfRange(_) => "label_out_of_range",
            FeatureError::UnknownName(_) => "unknown_feature",
            FeatureError::WrongLength(_) => "wrong_length",
            FeatureError::NonFinite(_) => "non_finite",
            FeatureError::Config { .. } => "config_syntax",
            FeatureError::InvalidConfig(_) => "invalid_config",
            FeatureError::Io(_) => "io",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector {
    values: Vec<f64>,
    pub label: Option<String>,
    pub corpus: Option<String>,
}

impl FeatureVector {
    pub fn new(values: Vec<f64>) -> Result<Self, FeatureError> {
        if values.len() != N_FEATURES {
            return Err(FeatureError::WrongLength(values.len()));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(FeatureError::NonFinite(i + 1));
        }
        Ok(FeatureVector {
            values,
            label: None,
            corpus: None,
        })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, label: FeatureLabel) -> f64 {
        self.values[label.column()]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExtractionConfig {
    pub frame_ms: f64,
    pub hop_ms: f64,
    pub pitch_min_hz: f64,
    pub pitch_max_hz: f64,
    pub voicing_threshold: f64,
    pub n_filters: usize,
    pub percentile_q: f64,
}

impl Default for ExtractionConfig {
    fn default() -> Self {
        ExtractionConfig {
            frame_ms: 25.0,
            hop_ms: 10.0,
            pitch_min_hz: 50.0,
            pitch_max_hz: 500.0,
            voicing_threshold: 0.3,
            n_filters: N_BANDS,
            percentile_q: 90.0,
        }
    }
}

impl ExtractionConfig {
    pub fn validate(&self) -> Result<(), FeatureError> {
        if !(self.hop_ms > 0.0 && self.frame_ms >= self.hop_ms) {
            return Err(FeatureError::InvalidConfig("need frame_ms >= hop_ms > 0"));
        }
        if !(self.pitch_min_hz > 0.0 && self.pitch_max_hz > self.pitch_min_hz) {
            return Err(FeatureError::InvalidConfig("need 0 < pitch_min_hz < pitch_max_hz"));
        }
        if !(0.0..=1.0).contains(&self.voicing_threshold) {
            return Err(FeatureError::InvalidConfig("voicing_threshold must lie in [0, 1]"));
        }
        if self.n_filters != N_BANDS {
            return Err(FeatureError::InvalidConfig("n_filters is fixed at 13"));
        }
        if !(0.0..=100.0).contains(&self.percentile_q) {
            return Err(FeatureError::InvalidConfig("percentile_q must lie in [0, 100]"));
        }
        Ok(())
    }

    /// Parses `key=value` lines. Blank lines and `#` comments are ignored;
    /// missing keys keep their defaults.
    pub fn parse(text: &str) -> Result<Self, FeatureError> {
        let mut cfg = ExtractionConfig::default();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |msg: String| FeatureError::Config { line: i + 1, msg };
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| err(format!("expected key=value, got {line:?}")))?;
            let (k, v) = (k.trim(), v.trim());
            let num = || {
                v.parse::<f64>()
                    .map_err(|_| err(format!("{k}: {v:?} is not a number")))
            };
            match k {
                "frame_ms" => cfg.frame_ms = num()?,
                "hop_ms" => cfg.hop_ms = num()?,
                "pitch_min_hz" => cfg.pitch_min_hz = num()?,
                "pitch_max_hz" => cfg.pitch_max_hz = num()?,
                "voicing_threshold" => cfg.voicing_threshold = num()?,
                "percentile_q" => cfg.percentile_q = num()?,
                "n_filters" => {
                    cfg.n_filters = v
                        .parse()
                        .map_err(|_| err(format!("n_filters: {v:?} is not an integer")))?
                }
                _ => return Err(err(format!("unknown key {k:?}"))),
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, FeatureError> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "frame_ms={}", self.frame_ms);
        let _ = writeln!(s, "hop_ms={}", self.hop_ms);
        let _ = writeln!(s, "pitch_min_hz={}", self.pitch_min_hz);
        let _ = writeln!(s, "pitch_max_hz={}", self.pitch_max_hz);
        let _ = writeln!(s, "voicing_threshold={}", self.voicing_threshold);
        let _ = writeln!(s, "n_filters={}", self.n_filters);
        let _ = writeln!(s, "percentile_q={}", self.percentile_q);
        s
    }

    pub fn pitch(&self) -> PitchConfig {
        PitchConfig {
            frame_ms: self.frame_ms,
            hop_ms: self.hop_ms,
            min_hz: self.pitch_min_hz,
            max_hz: self.pitch_max_hz,
            voicing_threshold: self.voicing_threshold,
        }
    }
}

/// Assembles x1..x84 for one utterance. Sub-extractors report failure
/// through sentinel values, so the only error is an invalid config.
pub fn extract_feature_vector(
    s: &Signal,
    cfg: &ExtractionConfig,
) -> Result<FeatureVector, FeatureError> {
    cfg.validate()?;
    let mut v = vec![0.0; N_FEATURES];

    let frames = frame_signal(s, cfg.frame_ms, cfg.hop_ms, Window::Hamming)
        .map_err(|_| FeatureError::InvalidConfig("need frame_ms >= hop_ms > 0"))?;

    let fstats = formants::formant_statistics(&extract_formants(&frames).complete());
    v[col::FORMANTS..col::FORMANTS + col::N_FORMANT_STATS].copy_from_slice(&fstats);

    let pcfg = cfg.pitch();
    let track = pitch::pitch_track(&pitch::pitch_frames(s, &pcfg), &pcfg);
    let st = signal_statistics(s, cfg.percentile_q);
    let zcr = extract_zcr(s);
    v[col::INTENSITY] = extract_intensity(s);
    v[col::STD] = st.std;
    v[col::AUTOCORR] = st.autocorrelation;
    v[col::PITCH] = track.median_f0();
    v[col::HNR] = track.mean_hnr();
    v[col::MIN] = st.min;
    v[col::MEAN] = st.mean;
    v[col::VARIANCE] = st.variance;
    v[col::MAX] = st.max;
    v[col::PERCENTILE] = st.percentile;
    v[col::ZCR] = zcr.rate;
    v[col::ZCR_DENSITY] = zcr.density;

    let cep = spectral::cepstral_frames(&frames, cfg.n_filters);
    let (mfcc_std, mfcc_mean) = spectral::column_std_mean(&cep.mfcc, N_BANDS);
    let (fbe_std, fbe_mean) = spectral::column_std_mean(&cep.fbe, N_BANDS);
    v[col::MFCC_STD..col::MFCC_STD + N_BANDS].copy_from_slice(&mfcc_std);
    v[col::MFCC_MEAN..col::MFCC_MEAN + N_BANDS].copy_from_slice(&mfcc_mean);
    v[col::FBE_STD..col::FBE_STD + N_BANDS].copy_from_slice(&fbe_std);
    v[col::FBE_MEAN..col::FBE_MEAN + N_BANDS].copy_from_slice(&fbe_mean);

    for x in v.iter_mut() {
        if !x.is_finite() {
            *x = 0.0;
        }
    }
    FeatureVector::new(v)
}
