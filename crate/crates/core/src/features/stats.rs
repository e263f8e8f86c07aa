use serde::{Deserialize, Serialize};

use crate::audio::Signal;

pub const INTENSITY_FLOOR_DB: f64 = -120.0;

/// 20·log10(RMS), floored at -120 dB.
pub fn extract_intensity(s: &Signal) -> f64 {
    let x = s.samples();
    let ms = x.iter().map(|v| v * v).sum::<f64>() / x.len() as f64;
    if ms <= 0.0 {
        return INTENSITY_FLOOR_DB;
    }
    (10.0 * ms.log10()).max(INTENSITY_FLOOR_DB)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZeroCrossings {
    /// Sign changes per adjacent sample pair.
    pub rate: f64,
    /// Sign changes per second.
    pub density: f64,
}

/// Zeros count as positive.
pub fn extract_zcr(s: &Signal) -> ZeroCrossings {
    let x = s.samples();
    if x.len() < 2 {
        return ZeroCrossings {
            rate: 0.0,
            density: 0.0,
        };
    }
    let changes = x
        .windows(2)
        .filter(|w| (w[0] >= 0.0) != (w[1] >= 0.0))
        .count() as f64;
    ZeroCrossings {
        rate: changes / (x.len() - 1) as f64,
        density: changes / s.duration_secs(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SignalStats {
    pub min: f64,
    pub mean: f64,
    pub variance: f64,
    pub max: f64,
    pub std: f64,
    pub percentile: f64,
    pub autocorrelation: f64,
}

/// Linear-interpolated q-th percentile (q in 0..=100) of an unsorted slice.
pub fn percentile(values: &[f64], q: f64) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let rank = (q / 100.0).clamp(0.0, 1.0) * (v.len() - 1) as f64;
    let lo = rank.floor() as usize;
    let hi = rank.ceil() as usize;
    v[lo] + (v[hi] - v[lo]) * (rank - lo as f64)
}

/// Lag-1 autocorrelation after removing the global mean, normalized by the
/// energies of the two overlapping segments. Constant input yields 1.0.
pub fn lag1_autocorrelation(x: &[f64]) -> f64 {
    if x.len() < 2 {
        return 1.0;
    }
    let mean = x.iter().sum::<f64>() / x.len() as f64;
    let d: Vec<f64> = x.iter().map(|v| v - mean).collect();
    let num: f64 = d.windows(2).map(|w| w[0] * w[1]).sum();
    let head: f64 = d[..d.len() - 1].iter().map(|v| v * v).sum();
    let tail: f64 = d[1..].iter().map(|v| v * v).sum();
    let den = (head * tail).sqrt();
    if den <= f64::MIN_POSITIVE {
        return 1.0;
    }
    (num / den).clamp(-1.0, 1.0)
}

pub fn signal_statistics(s: &Signal, percentile_q: f64) -> SignalStats {
    let x = s.samples();
    let n = x.len() as f64;
    let min = x.iter().copied().fold(f64::INFINITY, f64::min);
    let max = x.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mean = x.iter().sum::<f64>() / n;
    let variance = x.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    let abs: Vec<f64> = x.iter().map(|v| v.abs()).collect();
    SignalStats {
        min,
        mean,
        variance,
        max,
        std: variance.sqrt(),
        percentile: percentile(&abs, percentile_q),
        autocorrelation: lag1_autocorrelation(x),
    }
}
