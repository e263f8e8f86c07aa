use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

use crate::audio::{frame_samples, FrameSequence, Signal, Window};

pub const HNR_MIN_DB: f64 = -20.0;
pub const HNR_MAX_DB: f64 = 40.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PitchConfig {
    pub frame_ms: f64,
    pub hop_ms: f64,
    pub min_hz: f64,
    pub max_hz: f64,
    pub voicing_threshold: f64,
}

impl Default for PitchConfig {
    fn default() -> Self {
        PitchConfig {
            frame_ms: 25.0,
            hop_ms: 10.0,
            min_hz: 50.0,
            max_hz: 500.0,
            voicing_threshold: 0.3,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FramePitch {
    pub f0: f64,
    /// Normalized correlation at the selected lag.
    pub strength: f64,
}

/// Per-frame voicing analysis; `None` marks an unvoiced frame.
#[derive(Debug, Clone)]
pub struct PitchTrack {
    pub frames: Vec<Option<FramePitch>>,
}

impl PitchTrack {
    pub fn voiced(&self) -> impl Iterator<Item = &FramePitch> {
        self.frames.iter().flatten()
    }

    /// Median f0 over voiced frames, 0 when none are voiced.
    pub fn median_f0(&self) -> f64 {
        let f: Vec<f64> = self.voiced().map(|p| p.f0).collect();
        median(&f).unwrap_or(0.0)
    }

    /// Mean HNR over voiced frames, the floor when none are voiced.
    pub fn mean_hnr(&self) -> f64 {
        let h: Vec<f64> = self.voiced().map(|p| hnr_from_r(p.strength)).collect();
        if h.is_empty() {
            HNR_MIN_DB
        } else {
            h.iter().sum::<f64>() / h.len() as f64
        }
    }
}

pub(crate) fn median(v: &[f64]) -> Option<f64> {
    if v.is_empty() {
        return None;
    }
    let mut s = v.to_vec();
    s.sort_by(f64::total_cmp);
    let n = s.len();
    Some(if n % 2 == 1 {
        s[n / 2]
    } else {
        0.5 * (s[n / 2 - 1] + s[n / 2])
    })
}

pub fn hnr_from_r(r: f64) -> f64 {
    if r >= 1.0 {
        return HNR_MAX_DB;
    }
    if r <= 0.0 {
        return HNR_MIN_DB;
    }
    (10.0 * (r / (1.0 - r)).log10()).clamp(HNR_MIN_DB, HNR_MAX_DB)
}

/// Normalized cross-correlation of a frame with itself for lags
/// `0..=max_lag`, computed through one FFT and energy prefix sums.
pub(crate) fn normalized_autocorrelation(
    frame: &[f64],
    max_lag: usize,
    planner: &mut FftPlanner<f64>,
) -> Vec<f64> {
    let n = frame.len();
    let mean = frame.iter().sum::<f64>() / n as f64;
    let x: Vec<f64> = frame.iter().map(|v| v - mean).collect();
    let size = (2 * n).next_power_of_two();
    let mut buf: Vec<Complex<f64>> = x
        .iter()
        .map(|&v| Complex::new(v, 0.0))
        .chain(std::iter::repeat(Complex::new(0.0, 0.0)))
        .take(size)
        .collect();
    planner.plan_fft_forward(size).process(&mut buf);
    for c in buf.iter_mut() {
        *c = Complex::new(c.norm_sqr(), 0.0);
    }
    planner.plan_fft_inverse(size).process(&mut buf);

    let mut prefix = vec![0.0; n + 1];
    for i in 0..n {
        prefix[i + 1] = prefix[i] + x[i] * x[i];
    }
    let total = prefix[n];
    let max_lag = max_lag.min(n.saturating_sub(1));
    (0..=max_lag)
        .map(|tau| {
            let head = prefix[n - tau];
            let tail = total - prefix[tau];
            let den = (head * tail).sqrt();
            if total <= 0.0 || den <= 1e-12 * total {
                0.0
            } else {
                (buf[tau].re / size as f64 / den).clamp(-1.0, 1.0)
            }
        })
        .collect()
}

fn analyse_frame(
    frame: &[f64],
    fs: f64,
    cfg: &PitchConfig,
    planner: &mut FftPlanner<f64>,
) -> Option<FramePitch> {
    let max_hz = cfg.max_hz.min(fs / 2.0);
    let lag_min = ((fs / max_hz).floor() as usize).max(2);
    let lag_max = (fs / cfg.min_hz).ceil() as usize;
    if lag_max + 1 >= frame.len() || lag_min >= lag_max {
        return None;
    }
    let r = normalized_autocorrelation(frame, lag_max + 1, planner);
    let peaks: Vec<usize> = (lag_min..=lag_max)
        .filter(|&t| r[t] >= r[t - 1] && r[t] >= r[t + 1] && r[t] >= cfg.voicing_threshold)
        .collect();
    let best = peaks.iter().map(|&t| r[t]).fold(f64::NEG_INFINITY, f64::max);
    let &tau = peaks.iter().find(|&&t| r[t] >= 0.9 * best)?;
    let (a, b, c) = (r[tau - 1], r[tau], r[tau + 1]);
    let den = a - 2.0 * b + c;
    let delta = if den.abs() > 1e-15 {
        (0.5 * (a - c) / den).clamp(-0.5, 0.5)
    } else {
        0.0
    };
    let strength = (b - 0.25 * (a - c) * delta).min(1.0);
    Some(FramePitch {
        f0: fs / (tau as f64 + delta),
        strength,
    })
}

/// Rectangular frames long enough for three periods of the lowest
/// searched pitch.
pub fn pitch_frames(s: &Signal, cfg: &PitchConfig) -> FrameSequence {
    let frame_ms = cfg.frame_ms.max(3000.0 / cfg.min_hz);
    let frame_len = s.ms_to_samples(frame_ms).max(1);
    let hop = s.ms_to_samples(cfg.hop_ms).clamp(1, frame_len);
    frame_samples(s, frame_len, hop, Window::Rectangular)
        .expect("hop is clamped to 1..=frame_len")
}

pub fn pitch_track(frames: &FrameSequence, cfg: &PitchConfig) -> PitchTrack {
    let fs = frames.sample_rate as f64;
    let mut planner = FftPlanner::new();
    PitchTrack {
        frames: frames
            .frames
            .iter()
            .map(|f| analyse_frame(f, fs, cfg, &mut planner))
            .collect(),
    }
}

/// Median f0 in Hz over voiced frames, 0 when nothing is voiced.
pub fn extract_pitch(frames: &FrameSequence, cfg: &PitchConfig) -> f64 {
    pitch_track(frames, cfg).median_f0()
}

/// Mean harmonics-to-noise ratio in dB, clamped to [-20, 40].
pub fn extract_hnr(frames: &FrameSequence, cfg: &PitchConfig) -> f64 {
    pitch_track(frames, cfg).mean_hnr()
}
