//! Signal and data generators shared by the integration tests.
#![allow(dead_code)]

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use vocalsel::audio::Signal;
use vocalsel::dataset::LabeledDataset;

pub fn sine(f: f64, amp: f64, fs: u32, n: usize) -> Vec<f64> {
    (0..n).map(|i| amp * (2.0 * PI * f * i as f64 / fs as f64).sin()).collect()
}

pub fn sawtooth(f0: f64, fs: u32, n: usize) -> Signal {
    let x = (0..n)
        .map(|i| 2.0 * (f0 * i as f64 / fs as f64).fract() - 1.0)
        .collect();
    Signal::new(x, fs).unwrap()
}

/// Pulse train at `f0` through two-pole resonators of 80 Hz bandwidth.
pub fn vowel(formants: &[f64], f0: f64, fs: u32, n: usize) -> Vec<f64> {
    let fs_f = fs as f64;
    let period = (fs_f / f0) as usize;
    let mut x: Vec<f64> = (0..n).map(|i| if i % period == 0 { 1.0 } else { 0.0 }).collect();
    for &f in formants {
        let r = (-PI * 80.0 / fs_f).exp();
        let (a1, a2) = (2.0 * r * (2.0 * PI * f / fs_f).cos(), -r * r);
        let mut y = vec![0.0; n];
        for i in 0..n {
            let y1 = if i >= 1 { y[i - 1] } else { 0.0 };
            let y2 = if i >= 2 { y[i - 2] } else { 0.0 };
            y[i] = x[i] + a1 * y1 + a2 * y2;
        }
        x = y;
    }
    x
}

pub fn gaussian(rng: &mut ChaCha8Rng) -> f64 {
    let u1: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
    let u2: f64 = rng.gen_range(0.0..1.0);
    (-2.0 * u1.ln()).sqrt() * (2.0 * PI * u2).cos()
}

/// Isotropic Gaussian clusters, `per_class` points around each centre.
pub fn blobs(centres: &[Vec<f64>], per_class: usize, sigma: f64, seed: u64) -> LabeledDataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rows = vec![];
    let mut labels = vec![];
    for (c, centre) in centres.iter().enumerate() {
        for _ in 0..per_class {
            rows.push(centre.iter().map(|m| m + sigma * gaussian(&mut rng)).collect());
            labels.push(c);
        }
    }
    LabeledDataset::from_indices(rows, labels).unwrap()
}

/// Shannon entropy in bits by direct summation over distinct values.
pub fn h_bits(xs: &[usize]) -> f64 {
    let n = xs.len() as f64;
    let mut vals = xs.to_vec();
    vals.sort_unstable();
    vals.dedup();
    vals.iter()
        .map(|v| {
            let p = xs.iter().filter(|x| *x == v).count() as f64 / n;
            -p * p.log2()
        })
        .sum()
}

/// H(Y | X) = −Σ p(x, y) log2(p(x, y) / p(x)) over the joint table.
pub fn h_cond_bits(x: &[usize], y: &[usize]) -> f64 {
    let n = x.len() as f64;
    let mut xs = x.to_vec();
    xs.sort_unstable();
    xs.dedup();
    let mut ys = y.to_vec();
    ys.sort_unstable();
    ys.dedup();
    let mut h = 0.0;
    for &a in &xs {
        let px = x.iter().filter(|&&v| v == a).count() as f64 / n;
        for &b in &ys {
            let pxy = x.iter().zip(y).filter(|(&u, &v)| u == a && v == b).count() as f64 / n;
            if pxy > 0.0 {
                h -= pxy * (pxy / px).log2();
            }
        }
    }
    h
}

/// Textbook ReliefF: every instance in order, k nearest hits and k nearest
/// misses per other class by Manhattan distance on range-scaled features,
/// misses weighted by class prior.
pub fn naive_relieff(rows: &[Vec<f64>], y: &[usize], k: usize) -> Vec<f64> {
    let n = rows.len();
    let d = rows[0].len();
    let nc = y.iter().max().unwrap() + 1;
    let mut scaled = rows.to_vec();
    for j in 0..d {
        let lo = rows.iter().map(|r| r[j]).fold(f64::INFINITY, f64::min);
        let hi = rows.iter().map(|r| r[j]).fold(f64::NEG_INFINITY, f64::max);
        for r in scaled.iter_mut() {
            r[j] = if hi > lo { (r[j] - lo) / (hi - lo) } else { 0.0 };
        }
    }
    let prior: Vec<f64> = (0..nc)
        .map(|c| y.iter().filter(|&&v| v == c).count() as f64 / n as f64)
        .collect();
    let mut w = vec![0.0; d];
    let denom = (n * k) as f64;
    for r in 0..n {
        for c in 0..nc {
            let mut cand: Vec<(f64, usize)> = (0..n)
                .filter(|&i| i != r && y[i] == c)
                .map(|i| {
                    let dist = (0..d).map(|j| (scaled[r][j] - scaled[i][j]).abs()).sum::<f64>();
                    (dist, i)
                })
                .collect();
            cand.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(&b.1)));
            let factor = if c == y[r] {
                -1.0
            } else {
                prior[c] / (1.0 - prior[y[r]])
            };
            for &(_, i) in cand.iter().take(k) {
                for j in 0..d {
                    w[j] += factor * (scaled[r][j] - scaled[i][j]).abs() / denom;
                }
            }
        }
    }
    w
}
