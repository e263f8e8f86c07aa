//! WAV ingestion, framing and length conditioning.

use std::f64::consts::PI;
use std::io;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Error, Debug)]
pub enum AudioError {
    #[error("file not found: {0}")]
    MissingFile(String),
    #[error("unsupported encoding: {0}")]
    NotPcm(String),
    #[error("data chunk is empty")]
    EmptyData,
    #[error("malformed wav: {0}")]
    Malformed(String),
    #[error("invalid signal: {0}")]
    InvalidSignal(&'static str),
    #[error("invalid framing: {0}")]
    InvalidFraming(&'static str),
    #[error(transparent)]
    Io(#[from] io::Error),
}

impl AudioError {
    /// Stable machine-readable code for each failure mode.
    pub fn code(&self) -> &'static str {
        match self {
            AudioError::MissingFile(_) => "missing_file",
            AudioError::NotPcm(_) => "not_pcm",
            AudioError::EmptyData => "empty_data",
            AudioError::Malformed(_) => "malformed_wav",
            AudioError::InvalidSignal(_) => "invalid_signal",
            AudioError::InvalidFraming(_) => "invalid_framing",
            AudioError::Io(_) => "io",
        }
    }
}

/// Mono PCM samples at a known sample rate.
#[derive(Debug, Clone, PartialEq)]
pub struct Signal {
    samples: Vec<f64>,
    sample_rate: u32,
    source_id: String,
}

impl Signal {
    pub fn new(samples: Vec<f64>, sample_rate: u32) -> Result<Self, AudioError> {
        Self::with_id(samples, sample_rate, String::new())
    }

    pub fn with_id(
        samples: Vec<f64>,
        sample_rate: u32,
        source_id: impl Into<String>,
    ) -> Result<Self, AudioError> {
        if samples.is_empty() {
            return Err(AudioError::InvalidSignal("no samples"));
        }
        if sample_rate == 0 {
            return Err(AudioError::InvalidSignal("sample rate must be positive"));
        }
        if samples.iter().any(|v| !v.is_finite()) {
            return Err(AudioError::InvalidSignal("non-finite sample"));
        }
        Ok(Signal {
            samples,
            sample_rate,
            source_id: source_id.into(),
        })
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn sample_rate(&self) -> u32 {
        self.sample_rate
    }

    pub fn source_id(&self) -> &str {
        &self.source_id
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn duration_secs(&self) -> f64 {
        self.samples.len() as f64 / self.sample_rate as f64
    }

    /// Converts a duration in milliseconds to a sample count at this rate.
    pub fn ms_to_samples(&self, ms: f64) -> usize {
        (ms * self.sample_rate as f64 / 1000.0).round() as usize
    }

    fn map_samples(&self, samples: Vec<f64>) -> Signal {
        Signal {
            samples,
            sample_rate: self.sample_rate,
            source_id: self.source_id.clone(),
        }
    }
}

/// Reads a 16-bit PCM RIFF/WAVE file, averaging channels to mono.
pub fn read_wav(path: impl AsRef<Path>) -> Result<Signal, AudioError> {
    let path = path.as_ref();
    let reader = hound::WavReader::open(path).map_err(|e| match e {
        hound::Error::IoError(io) if io.kind() == io::ErrorKind::NotFound => {
            AudioError::MissingFile(path.display().to_string())
        }
        hound::Error::IoError(io) => AudioError::Io(io),
        hound::Error::Unsupported => AudioError::NotPcm("unsupported format tag".into()),
        other => AudioError::Malformed(other.to_string()),
    })?;
    let spec = reader.spec();
    if spec.sample_format != hound::SampleFormat::Int {
        return Err(AudioError::NotPcm("floating-point samples".into()));
    }
    if spec.bits_per_sample != 16 {
        return Err(AudioError::NotPcm(format!(
            "{}-bit samples",
            spec.bits_per_sample
        )));
    }
    let channels = spec.channels.max(1) as usize;
    let raw = reader
        .into_samples::<i16>()
        .collect::<Result<Vec<i16>, _>>()
        .map_err(|e| AudioError::Malformed(e.to_string()))?;
    if raw.len() < channels {
        return Err(AudioError::EmptyData);
    }
    let samples: Vec<f64> = raw
        .chunks_exact(channels)
        .map(|frame| {
            frame.iter().map(|&v| v as f64 / 32768.0).sum::<f64>() / channels as f64
        })
        .collect();
    let id = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    Signal::with_id(samples, spec.sample_rate, id)
}

/// Writes a mono 16-bit PCM file. Samples are scaled by 32768, rounded and clipped.
pub fn write_wav(path: impl AsRef<Path>, signal: &Signal) -> Result<(), AudioError> {
    let spec = hound::WavSpec {
        channels: 1,
        sample_rate: signal.sample_rate,
        bits_per_sample: 16,
        sample_format: hound::SampleFormat::Int,
    };
    let mut writer = hound::WavWriter::create(path.as_ref(), spec)
        .map_err(|e| AudioError::Malformed(e.to_string()))?;
    for &v in &signal.samples {
        writer
            .write_sample(quantize(v))
            .map_err(|e| AudioError::Malformed(e.to_string()))?;
    }
    writer
        .finalize()
        .map_err(|e| AudioError::Malformed(e.to_string()))
}

pub fn quantize(v: f64) -> i16 {
    (v * 32768.0).round().clamp(-32768.0, 32767.0) as i16
}

/// Scales so the largest magnitude is 1.0. All-zero signals pass through.
pub fn peak_normalize(s: &Signal) -> Signal {
    let peak = s.samples.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if peak == 0.0 {
        return s.clone();
    }
    s.map_samples(s.samples.iter().map(|v| v / peak).collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Window {
    Rectangular,
    Hamming,
}

impl Window {
    pub fn coefficients(self, len: usize) -> Vec<f64> {
        match self {
            Window::Rectangular => vec![1.0; len],
            Window::Hamming if len == 1 => vec![1.0],
            Window::Hamming => (0..len)
                .map(|n| 0.54 - 0.46 * (2.0 * PI * n as f64 / (len - 1) as f64).cos())
                .collect(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct FrameSequence {
    pub frames: Vec<Vec<f64>>,
    pub frame_len: usize,
    pub hop: usize,
    pub sample_rate: u32,
    /// Set when the signal was shorter than one frame and was zero-padded.
    pub padded: bool,
}

impl FrameSequence {
    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }
}

/// Closed-form frame count for a signal at least one frame long.
pub fn frame_count(len: usize, frame_len: usize, hop: usize) -> usize {
    if len < frame_len {
        1
    } else {
        (len - frame_len) / hop + 1
    }
}

pub fn frame_signal(
    s: &Signal,
    frame_ms: f64,
    hop_ms: f64,
    window: Window,
) -> Result<FrameSequence, AudioError> {
    if !(hop_ms > 0.0) || frame_ms < hop_ms {
        return Err(AudioError::InvalidFraming("require frame_ms >= hop_ms > 0"));
    }
    let frame_len = s.ms_to_samples(frame_ms).max(1);
    let hop = s.ms_to_samples(hop_ms).max(1);
    frame_samples(s, frame_len, hop, window)
}

/// Framing with lengths given directly in samples.
pub fn frame_samples(
    s: &Signal,
    frame_len: usize,
    hop: usize,
    window: Window,
) -> Result<FrameSequence, AudioError> {
    if hop == 0 || frame_len < hop {
        return Err(AudioError::InvalidFraming("require frame_len >= hop > 0"));
    }
    let coeffs = window.coefficients(frame_len);
    let x = &s.samples;
    let padded = x.len() < frame_len;
    let frames = if padded {
        let mut f = vec![0.0; frame_len];
        for (i, v) in x.iter().enumerate() {
            f[i] = v * coeffs[i];
        }
        vec![f]
    } else {
        (0..frame_count(x.len(), frame_len, hop))
            .map(|i| {
                let start = i * hop;
                x[start..start + frame_len]
                    .iter()
                    .zip(&coeffs)
                    .map(|(v, w)| v * w)
                    .collect()
            })
            .collect()
    };
    Ok(FrameSequence {
        frames,
        frame_len,
        hop,
        sample_rate: s.sample_rate,
        padded,
    })
}

/// Center-crops or symmetrically zero-pads to `target` samples.
pub fn fit_length(s: &Signal, target: usize) -> Result<Signal, AudioError> {
    if target == 0 {
        return Err(AudioError::InvalidSignal("target length must be positive"));
    }
    let len = s.samples.len();
    let out = if len >= target {
        let start = (len - target) / 2;
        s.samples[start..start + target].to_vec()
    } else {
        let left = (target - len) / 2;
        let mut v = vec![0.0; target];
        v[left..left + len].copy_from_slice(&s.samples);
        v
    };
    Ok(s.map_samples(out))
}
