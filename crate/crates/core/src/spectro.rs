//! STFT magnitude spectrograms and grayscale PGM export.

use std::io::Write;
use std::path::Path;

use thiserror::Error;

use crate::audio::{frame_signal, AudioError, Signal, Window};
use crate::features::spectral::PowerSpectrum;

pub const DEFAULT_SIDE: usize = 227;
pub const LOG_FLOOR: f64 = 1e-10;

#[derive(Debug, Error)]
pub enum SpectroError {
    #[error("signal is empty")]
    EmptySignal,
    #[error("image side must be positive")]
    ZeroSide,
    #[error(transparent)]
    Audio(#[from] AudioError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl SpectroError {
    pub fn code(&self) -> &'static str {
        match self {
            SpectroError::EmptySignal => "empty_signal",
            SpectroError::ZeroSide => "zero_side",
            SpectroError::Audio(e) => e.code(),
            SpectroError::Io(_) => "io",
        }
    }
}

/// Linear STFT magnitudes, one row per frame and one column per bin
/// `0..=fft_size/2`.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrogram {
    pub magnitudes: Vec<Vec<f64>>,
    pub frame_ms: f64,
    pub hop_ms: f64,
    pub sample_rate: u32,
    pub fft_size: usize,
}

impl Spectrogram {
    pub fn n_frames(&self) -> usize {
        self.magnitudes.len()
    }

    pub fn n_bins(&self) -> usize {
        self.fft_size / 2 + 1
    }

    pub fn bin_hz(&self, k: usize) -> f64 {
        k as f64 * self.sample_rate as f64 / self.fft_size as f64
    }

    /// 20·log10 of each magnitude, floored at `LOG_FLOOR`.
    pub fn log_magnitudes(&self) -> Vec<Vec<f64>> {
        self.magnitudes
            .iter()
            .map(|r| r.iter().map(|&m| 20.0 * m.max(LOG_FLOOR).log10()).collect())
            .collect()
    }

    /// Σ over frames of the one-sided spectrum energy, scaled so that it
    /// equals the windowed time-domain energy.
    pub fn energy(&self) -> f64 {
        let n = self.fft_size;
        self.magnitudes
            .iter()
            .map(|r| {
                r.iter()
                    .enumerate()
                    .map(|(k, m)| {
                        let w = if k == 0 || k == n / 2 { 1.0 } else { 2.0 };
                        w * m * m
                    })
                    .sum::<f64>()
                    / n as f64
            })
            .sum()
    }

    /// Index of the strongest bin in each frame.
    pub fn dominant_bins(&self) -> Vec<usize> {
        self.magnitudes
            .iter()
            .map(|r| {
                r.iter()
                    .enumerate()
                    .fold(0, |b, (k, &m)| if m > r[b] { k } else { b })
            })
            .collect()
    }
}

/// Hamming-windowed frames, FFT zero-padded to a power of two.
pub fn spectrogram(s: &Signal, frame_ms: f64, hop_ms: f64) -> Result<Spectrogram, SpectroError> {
    if s.is_empty() {
        return Err(SpectroError::EmptySignal);
    }
    let frames = frame_signal(s, frame_ms, hop_ms, Window::Hamming)?;
    let mut ps = PowerSpectrum::new(frames.frame_len);
    let magnitudes = frames.frames.iter().map(|f| ps.magnitudes(f)).collect();
    Ok(Spectrogram {
        magnitudes,
        frame_ms,
        hop_ms,
        sample_rate: s.sample_rate(),
        fft_size: ps.nfft(),
    })
}

/// Windowed time-domain energy summed over the same frames the
/// spectrogram uses.
pub fn windowed_energy(s: &Signal, frame_ms: f64, hop_ms: f64) -> Result<f64, SpectroError> {
    let frames = frame_signal(s, frame_ms, hop_ms, Window::Hamming)?;
    Ok(frames.frames.iter().flatten().map(|v| v * v).sum())
}

/// Log magnitudes min-max scaled to 0..=255 and bilinearly resized to
/// `side × side`. Image rows run from the highest frequency bin at the top
/// to bin 0 at the bottom; columns run forward in time. A constant input
/// maps to 128 everywhere.
pub fn render_image(sp: &Spectrogram, side: usize) -> Result<Vec<u8>, SpectroError> {
    if side == 0 {
        return Err(SpectroError::ZeroSide);
    }
    let log = sp.log_magnitudes();
    let (lo, hi) = log
        .iter()
        .flatten()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    if !(hi > lo) {
        return Ok(vec![128; side * side]);
    }
    let n_t = log.len();
    let n_f = sp.n_bins();
    // src[row][col] with row 0 the top (highest frequency)
    let src = |row: usize, col: usize| 255.0 * (log[col][n_f - 1 - row] - lo) / (hi - lo);
    let coord = |i: usize, n: usize| -> (usize, usize, f64) {
        if n == 1 || side == 1 {
            return (0, 0, 0.0);
        }
        let p = i as f64 * (n - 1) as f64 / (side - 1) as f64;
        let i0 = (p.floor() as usize).min(n - 1);
        let i1 = (i0 + 1).min(n - 1);
        (i0, i1, p - i0 as f64)
    };
    let mut img = Vec::with_capacity(side * side);
    for y in 0..side {
        let (r0, r1, fy) = coord(y, n_f);
        for x in 0..side {
            let (c0, c1, fx) = coord(x, n_t);
            let top = src(r0, c0) * (1.0 - fx) + src(r0, c1) * fx;
            let bottom = src(r1, c0) * (1.0 - fx) + src(r1, c1) * fx;
            let v = top * (1.0 - fy) + bottom * fy;
            img.push(v.round().clamp(0.0, 255.0) as u8);
        }
    }
    Ok(img)
}

/// Binary PGM (P5, maxval 255).
pub fn write_pgm<W: Write>(mut w: W, pixels: &[u8], width: usize, height: usize) -> std::io::Result<()> {
    write!(w, "P5\n{width} {height}\n255\n")?;
    w.write_all(pixels)
}

pub fn export_image(sp: &Spectrogram, side: usize, path: impl AsRef<Path>) -> Result<(), SpectroError> {
    let img = render_image(sp, side)?;
    let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
    write_pgm(&mut f, &img, side, side)?;
    f.flush()?;
    Ok(())
}
