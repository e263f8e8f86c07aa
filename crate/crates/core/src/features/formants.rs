use std::f64::consts::PI;

use nalgebra::DMatrix;

use super::pitch::median;
use crate::audio::FrameSequence;

pub const MAX_BANDWIDTH_HZ: f64 = 400.0;
pub const MIN_FORMANT_HZ: f64 = 50.0;

/// Predictor order used for a given sample rate.
pub fn lpc_order(sample_rate: u32) -> usize {
    2 + sample_rate as usize / 1000
}

/// Levinson–Durbin recursion. Returns `[1, a1, .., ap]` with
/// A(z) = 1 + a1 z^-1 + ... + ap z^-p, or `None` for a silent or
/// numerically unstable frame.
pub fn lpc(frame: &[f64], order: usize) -> Option<Vec<f64>> {
    if frame.len() <= order {
        return None;
    }
    let r: Vec<f64> = (0..=order)
        .map(|k| frame[..frame.len() - k].iter().zip(&frame[k..]).map(|(a, b)| a * b).sum())
        .collect();
    if r[0] <= 1e-12 {
        return None;
    }
    let mut a = vec![0.0; order + 1];
    a[0] = 1.0;
    let mut err = r[0];
    for i in 1..=order {
        let acc: f64 = (0..i).map(|j| a[j] * r[i - j]).sum();
        let k = -acc / err;
        if !k.is_finite() || k.abs() >= 1.0 {
            return None;
        }
        let prev = a.clone();
        for j in 1..i {
            a[j] = prev[j] + k * prev[i - j];
        }
        a[i] = k;
        err *= 1.0 - k * k;
        if err <= 0.0 {
            return None;
        }
    }
    Some(a)
}

/// Resonance frequencies (Hz, ascending) of an LPC polynomial whose roots
/// have positive imaginary part and bandwidth below 400 Hz.
pub fn lpc_formants(a: &[f64], sample_rate: u32) -> Vec<f64> {
    let p = a.len() - 1;
    if p == 0 {
        return vec![];
    }
    let fs = sample_rate as f64;
    let mut c = DMatrix::<f64>::zeros(p, p);
    for j in 0..p {
        c[(0, j)] = -a[j + 1];
    }
    for i in 1..p {
        c[(i, i - 1)] = 1.0;
    }
    let mut out: Vec<f64> = c
        .complex_eigenvalues()
        .iter()
        .filter(|z| z.im > 0.0)
        .filter_map(|z| {
            let freq = z.im.atan2(z.re) * fs / (2.0 * PI);
            let bw = -(fs / PI) * z.norm().ln();
            (bw < MAX_BANDWIDTH_HZ && freq > MIN_FORMANT_HZ && freq < fs / 2.0).then_some(freq)
        })
        .collect();
    out.sort_by(f64::total_cmp);
    out
}

/// Up to three lowest resonances of a (windowed) frame, ascending.
pub fn frame_formants(frame: &[f64], sample_rate: u32) -> Vec<f64> {
    let Some(a) = lpc(frame, lpc_order(sample_rate)) else {
        return vec![];
    };
    let mut f = lpc_formants(&a, sample_rate);
    f.truncate(3);
    f
}

/// Per-frame resonances. Frames without any valid root are dropped; the
/// others keep one to three ascending frequencies.
#[derive(Debug, Clone, Default)]
pub struct FormantTracks {
    pub frames: Vec<Vec<f64>>,
}

impl FormantTracks {
    /// Values of formant `k` (0-based) over frames that resolved it.
    pub fn track(&self, k: usize) -> Vec<f64> {
        self.frames.iter().filter_map(|f| f.get(k).copied()).collect()
    }

    pub fn median(&self, k: usize) -> Option<f64> {
        median(&self.track(k))
    }

    /// Frames with all three formants; the only ones used for statistics.
    pub fn complete(&self) -> Vec<[f64; 3]> {
        self.frames
            .iter()
            .filter(|f| f.len() == 3)
            .map(|f| [f[0], f[1], f[2]])
            .collect()
    }
}

pub fn extract_formants(frames: &FrameSequence) -> FormantTracks {
    FormantTracks {
        frames: frames
            .frames
            .iter()
            .map(|f| frame_formants(f, frames.sample_rate))
            .filter(|f| !f.is_empty())
            .collect(),
    }
}

/// Max, min, std, mean and median of F1..F3 over frames, followed by the
/// mean across formants of each statistic: 20 values. Zeros when no frame
/// produced three formants.
pub fn formant_statistics(tracks: &[[f64; 3]]) -> [f64; 20] {
    let mut out = [0.0; 20];
    if tracks.is_empty() {
        return out;
    }
    let n = tracks.len() as f64;
    for f in 0..3 {
        let v: Vec<f64> = tracks.iter().map(|t| t[f]).collect();
        let mean = v.iter().sum::<f64>() / n;
        out[f] = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        out[3 + f] = v.iter().copied().fold(f64::INFINITY, f64::min);
        out[6 + f] = (v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n).sqrt();
        out[9 + f] = mean;
        out[12 + f] = median(&v).unwrap_or(0.0);
    }
    for s in 0..5 {
        out[15 + s] = (out[3 * s] + out[3 * s + 1] + out[3 * s + 2]) / 3.0;
    }
    out
}
