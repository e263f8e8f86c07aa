//! Synthetic emotional-speech stand-in: sawtooth voicing through fixed
//! resonators, with class-dependent pitch, level and spectral tilt.

use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::audio::{write_wav, AudioError, Signal};
use crate::dataset::{CorpusManifest, DatasetError, ManifestEntry};

#[derive(Debug, Error)]
pub enum SynthError {
    #[error("need at least two classes, got {0}")]
    TooFewClasses(usize),
    #[error("class {class}: {msg}")]
    BadClass { class: String, msg: &'static str },
    #[error("invalid corpus spec: {0}")]
    BadSpec(&'static str),
    #[error(transparent)]
    Audio(#[from] AudioError),
    #[error(transparent)]
    Dataset(#[from] DatasetError),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl SynthError {
    pub fn code(&self) -> &'static str {
        match self {
            SynthError::TooFewClasses(_) => "too_few_classes",
            SynthError::BadClass { .. } => "bad_class_spec",
            SynthError::BadSpec(_) => "bad_corpus_spec",
            SynthError::Audio(e) => e.code(),
            SynthError::Dataset(e) => e.code(),
            SynthError::Json(_) => "json",
            SynthError::Io(_) => "io",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassSpec {
    pub name: String,
    /// Fundamental frequency range in Hz, drawn uniformly per utterance.
    pub f0_hz: (f64, f64),
    /// RMS level range of the voiced component.
    pub rms: (f64, f64),
    /// One-pole low-pass coefficient in [0, 1); larger is darker.
    pub tilt: f64,
    /// Noise RMS relative to the voiced RMS.
    pub noise: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusSpec {
    pub corpus_id: String,
    pub sample_rate: u32,
    pub duration_secs: f64,
    /// (centre Hz, bandwidth Hz) of the resonators every class shares.
    pub resonators: Vec<(f64, f64)>,
    pub classes: Vec<ClassSpec>,
}

impl Default for CorpusSpec {
    /// Five classes with disjoint pitch bands and disjoint levels. The
    /// loudest class (anger) sits mid-range in pitch, so level alone marks it.
    fn default() -> Self {
        let c = |name: &str, f0: (f64, f64), rms: (f64, f64), tilt: f64| ClassSpec {
            name: name.into(),
            f0_hz: f0,
            rms,
            tilt,
            noise: 0.01,
        };
        CorpusSpec {
            corpus_id: "synthetic".into(),
            sample_rate: 16000,
            duration_secs: 1.0,
            resonators: vec![(500.0, 80.0), (1500.0, 120.0), (2500.0, 160.0)],
            classes: vec![
                c("anger", (140.0, 155.0), (0.30, 0.34), 0.2),
                c("fear", (220.0, 240.0), (0.13, 0.15), 0.4),
                c("happiness", (175.0, 190.0), (0.19, 0.22), 0.3),
                c("neutral", (115.0, 125.0), (0.085, 0.095), 0.6),
                c("sadness", (90.0, 100.0), (0.05, 0.056), 0.8),
            ],
        }
    }
}

impl CorpusSpec {
    pub fn validate(&self) -> Result<(), SynthError> {
        if self.classes.len() < 2 {
            return Err(SynthError::TooFewClasses(self.classes.len()));
        }
        if self.sample_rate == 0 || !(self.duration_secs > 0.0) {
            return Err(SynthError::BadSpec("sample_rate and duration must be positive"));
        }
        let nyq = self.sample_rate as f64 / 2.0;
        if self.resonators.iter().any(|&(f, bw)| !(f > 0.0 && f < nyq && bw > 0.0)) {
            return Err(SynthError::BadSpec("resonators need 0 < f < fs/2 and bw > 0"));
        }
        let mut names: Vec<&str> = self.classes.iter().map(|c| c.name.as_str()).collect();
        names.sort();
        names.dedup();
        if names.len() != self.classes.len() {
            return Err(SynthError::BadSpec("class names must be unique"));
        }
        for c in &self.classes {
            let bad = |msg| SynthError::BadClass {
                class: c.name.clone(),
                msg,
            };
            if c.name.is_empty() || c.name.contains(['/', '\\', ',']) {
                return Err(bad("name must be non-empty without separators"));
            }
            if !(c.f0_hz.0 > 0.0 && c.f0_hz.0 <= c.f0_hz.1 && c.f0_hz.1 < nyq) {
                return Err(bad("f0 range must satisfy 0 < lo <= hi < fs/2"));
            }
            if !(c.rms.0 > 0.0 && c.rms.0 <= c.rms.1) {
                return Err(bad("rms range must satisfy 0 < lo <= hi"));
            }
            if !(0.0..1.0).contains(&c.tilt) || !(c.noise >= 0.0) {
                return Err(bad("tilt must be in [0, 1) and noise >= 0"));
            }
        }
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, SynthError> {
        let s: CorpusSpec = serde_json::from_str(&std::fs::read_to_string(path)?)?;
        s.validate()?;
        Ok(s)
    }
}

fn rms(x: &[f64]) -> f64 {
    (x.iter().map(|v| v * v).sum::<f64>() / x.len().max(1) as f64).sqrt()
}

/// Renders one utterance. Every draw comes from `rng`, so the output is a
/// pure function of the spec, class and RNG state.
pub fn synth_utterance(spec: &CorpusSpec, class: &ClassSpec, rng: &mut ChaCha8Rng) -> Signal {
    let fs = spec.sample_rate as f64;
    let n = (spec.duration_secs * fs).round().max(1.0) as usize;
    let f0 = rng.gen_range(class.f0_hz.0..=class.f0_hz.1);
    let level = rng.gen_range(class.rms.0..=class.rms.1);
    let mut phase: f64 = rng.gen_range(0.0..1.0);
    let mut x: Vec<f64> = (0..n)
        .map(|_| {
            let v = 2.0 * phase - 1.0;
            phase = (phase + f0 / fs).fract();
            v
        })
        .collect();
    let mut y = 0.0;
    for v in x.iter_mut() {
        y = (1.0 - class.tilt) * *v + class.tilt * y;
        *v = y;
    }
    for &(f, bw) in &spec.resonators {
        let r = (-std::f64::consts::PI * bw / fs).exp();
        let a1 = 2.0 * r * (2.0 * std::f64::consts::PI * f / fs).cos();
        let a2 = -r * r;
        let (mut y1, mut y2) = (0.0, 0.0);
        for v in x.iter_mut() {
            let out = *v + a1 * y1 + a2 * y2;
            y2 = y1;
            y1 = out;
            *v = out;
        }
    }
    let g = level / rms(&x).max(f64::MIN_POSITIVE);
    // uniform noise scaled to unit variance
    let sigma = class.noise * level * 3f64.sqrt();
    let samples = x
        .into_iter()
        .map(|v| v * g + sigma * rng.gen_range(-1.0..1.0))
        .collect();
    Signal::new(samples, spec.sample_rate).expect("finite samples at a positive rate")
}

/// Writes `n_per_class` WAVs per class under `out_dir/<class>/` plus
/// `out_dir/manifest.csv`, and returns the manifest. Utterance k draws
/// from its own ChaCha stream, so output does not depend on thread count.
pub fn synth_corpus(
    spec: &CorpusSpec,
    n_per_class: usize,
    seed: u64,
    out_dir: impl AsRef<Path>,
) -> Result<CorpusManifest, SynthError> {
    spec.validate()?;
    let out_dir = out_dir.as_ref();
    let jobs: Vec<(usize, usize)> = (0..spec.classes.len())
        .flat_map(|c| (0..n_per_class).map(move |i| (c, i)))
        .collect();
    for c in &spec.classes {
        std::fs::create_dir_all(out_dir.join(&c.name))?;
    }
    let entries = jobs
        .par_iter()
        .enumerate()
        .map(|(k, &(c, i))| -> Result<ManifestEntry, SynthError> {
            let class = &spec.classes[c];
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(k as u64);
            let rel = PathBuf::from(&class.name).join(format!("{}_{i:03}.wav", class.name));
            let sig = synth_utterance(spec, class, &mut rng);
            write_wav(out_dir.join(&rel), &sig)?;
            Ok(ManifestEntry {
                corpus: spec.corpus_id.clone(),
                path: rel,
                label: class.name.clone(),
            })
        })
        .collect::<Result<Vec<_>, _>>()?;
    let manifest = CorpusManifest::new(spec.corpus_id.clone(), entries, out_dir)?;
    manifest.save(out_dir.join("manifest.csv"))?;
    Ok(manifest)
}
