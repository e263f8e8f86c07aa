use std::f64::consts::PI;
use std::sync::Arc;

use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use crate::audio::FrameSequence;

pub const LOG_FLOOR: f64 = 1e-10;

pub fn hz_to_mel(f: f64) -> f64 {
    2595.0 * (1.0 + f / 700.0).log10()
}

pub fn mel_to_hz(m: f64) -> f64 {
    700.0 * (10f64.powf(m / 2595.0) - 1.0)
}

/// Triangular filters equally spaced on the mel scale from 0 Hz to Nyquist.
#[derive(Debug, Clone)]
pub struct MelFilterbank {
    /// `weights[m][k]` for filter m and FFT bin k in `0..=nfft/2`.
    pub weights: Vec<Vec<f64>>,
    pub nfft: usize,
    pub sample_rate: u32,
}

impl MelFilterbank {
    pub fn new(n_filters: usize, nfft: usize, sample_rate: u32) -> Self {
        let fs = sample_rate as f64;
        let top = hz_to_mel(fs / 2.0);
        let edges: Vec<f64> = (0..n_filters + 2)
            .map(|i| mel_to_hz(top * i as f64 / (n_filters + 1) as f64))
            .collect();
        let n_bins = nfft / 2 + 1;
        let weights = (0..n_filters)
            .map(|m| {
                let (lo, c, hi) = (edges[m], edges[m + 1], edges[m + 2]);
                (0..n_bins)
                    .map(|k| {
                        let f = k as f64 * fs / nfft as f64;
                        if f >= lo && f <= c && c > lo {
                            (f - lo) / (c - lo)
                        } else if f > c && f <= hi && hi > c {
                            (hi - f) / (hi - c)
                        } else {
                            0.0
                        }
                    })
                    .collect()
            })
            .collect();
        MelFilterbank {
            weights,
            nfft,
            sample_rate,
        }
    }

    pub fn n_filters(&self) -> usize {
        self.weights.len()
    }

    /// Natural-log band energies of one power spectrum, floored at ln(1e-10).
    pub fn log_energies(&self, power: &[f64]) -> Vec<f64> {
        self.weights
            .iter()
            .map(|w| {
                let e: f64 = w.iter().zip(power).map(|(a, b)| a * b).sum();
                e.max(LOG_FLOOR).ln()
            })
            .collect()
    }
}

/// Reusable zero-padded power-spectrum computation.
pub struct PowerSpectrum {
    fft: Arc<dyn Fft<f64>>,
    nfft: usize,
    buf: Vec<Complex<f64>>,
}

impl PowerSpectrum {
    pub fn new(frame_len: usize) -> Self {
        let nfft = frame_len.max(2).next_power_of_two();
        let fft = FftPlanner::new().plan_fft_forward(nfft);
        PowerSpectrum {
            fft,
            nfft,
            buf: vec![Complex::new(0.0, 0.0); nfft],
        }
    }

    pub fn nfft(&self) -> usize {
        self.nfft
    }

    /// |X_k|^2 for k in `0..=nfft/2`.
    pub fn compute(&mut self, frame: &[f64]) -> Vec<f64> {
        for (i, c) in self.buf.iter_mut().enumerate() {
            *c = Complex::new(frame.get(i).copied().unwrap_or(0.0), 0.0);
        }
        self.fft.process(&mut self.buf);
        self.buf[..self.nfft / 2 + 1]
            .iter()
            .map(|c| c.norm_sqr())
            .collect()
    }

    /// |X_k| for k in `0..=nfft/2`.
    pub fn magnitudes(&mut self, frame: &[f64]) -> Vec<f64> {
        self.compute(frame).into_iter().map(f64::sqrt).collect()
    }
}

/// Orthonormal DCT-II.
pub fn dct2(x: &[f64]) -> Vec<f64> {
    let n = x.len();
    let nf = n as f64;
    (0..n)
        .map(|k| {
            let scale = if k == 0 {
                (1.0 / nf).sqrt()
            } else {
                (2.0 / nf).sqrt()
            };
            scale
                * x.iter()
                    .enumerate()
                    .map(|(i, v)| v * (PI * k as f64 * (2 * i + 1) as f64 / (2.0 * nf)).cos())
                    .sum::<f64>()
        })
        .collect()
}

/// Per-frame FBE and MFCC matrices (frames × bands).
#[derive(Debug, Clone)]
pub struct CepstralFrames {
    pub fbe: Vec<Vec<f64>>,
    pub mfcc: Vec<Vec<f64>>,
}

pub fn cepstral_frames(frames: &FrameSequence, n_filters: usize) -> CepstralFrames {
    let fbe = extract_fbe(frames, n_filters);
    let mfcc = fbe.iter().map(|e| dct2(e)).collect();
    CepstralFrames { fbe, mfcc }
}

/// Log mel filter-bank energies per frame.
pub fn extract_fbe(frames: &FrameSequence, n_filters: usize) -> Vec<Vec<f64>> {
    let mut ps = PowerSpectrum::new(frames.frame_len);
    let bank = MelFilterbank::new(n_filters, ps.nfft(), frames.sample_rate);
    frames
        .frames
        .iter()
        .map(|f| bank.log_energies(&ps.compute(f)))
        .collect()
}

/// DCT-II of the log filter-bank energies per frame.
pub fn extract_mfcc(frames: &FrameSequence, n_filters: usize) -> Vec<Vec<f64>> {
    cepstral_frames(frames, n_filters).mfcc
}

/// Per-column (std, mean) with population variance.
pub fn column_std_mean(m: &[Vec<f64>], width: usize) -> (Vec<f64>, Vec<f64>) {
    if m.is_empty() {
        return (vec![0.0; width], vec![0.0; width]);
    }
    let n = m.len() as f64;
    let mean: Vec<f64> = (0..width)
        .map(|j| m.iter().map(|r| r[j]).sum::<f64>() / n)
        .collect();
    let std = (0..width)
        .map(|j| {
            (m.iter().map(|r| (r[j] - mean[j]).powi(2)).sum::<f64>() / n).sqrt()
        })
        .collect();
    (std, mean)
}
