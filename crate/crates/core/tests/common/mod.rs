//! Independent reference implementations used by the integration tests.
#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

/// Spearman rho from the concordance definition: Pearson correlation of
/// mid-ranks, ranks computed by pairwise counting.
pub fn spearman_oracle(x: &[f64], y: &[f64]) -> f64 {
    let rank = |v: &[f64]| -> Vec<f64> {
        v.iter()
            .map(|a| {
                let below = v.iter().filter(|b| *b < a).count() as f64;
                let equal = v.iter().filter(|b| *b == a).count() as f64;
                below + (equal + 1.0) / 2.0
            })
            .collect()
    };
    pearson(&rank(x), &rank(y))
}

pub fn pearson(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let syy: f64 = y.iter().map(|b| (b - my).powi(2)).sum();
    if sxx == 0.0 || syy == 0.0 {
        return 0.0;
    }
    sxy / (sxx * syy).sqrt()
}

/// Plug-in entropy plus the Miller-Madow term, straight from the formula.
pub fn miller_madow_oracle(counts: &[u64]) -> f64 {
    let n: u64 = counts.iter().sum();
    let mut h = 0.0;
    let mut k = 0;
    for &c in counts {
        if c > 0 {
            k += 1;
            let p = c as f64 / n as f64;
            h -= p * p.ln() / 2f64.ln();
        }
    }
    h + (k as f64 - 1.0) / (2.0 * n as f64 * 2f64.ln())
}

/// Real series with power spectrum proportional to `f^-beta`, built by a
/// naive inverse DFT of random-phase amplitudes.
pub fn power_law_series(n: usize, beta: f64, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let half = n / 2;
    let coeffs: Vec<(f64, f64)> = (1..half)
        .map(|k| {
            let amp = (k as f64).powf(-beta / 2.0);
            let phase = rng.random::<f64>() * std::f64::consts::TAU;
            (amp, phase)
        })
        .collect();
    (0..n)
        .map(|t| {
            coeffs
                .iter()
                .enumerate()
                .map(|(i, &(amp, phase))| {
                    let k = (i + 1) as f64;
                    amp * (std::f64::consts::TAU * k * t as f64 / n as f64 + phase).cos()
                })
                .sum::<f64>()
        })
        .collect()
}

pub fn white_noise(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| rng.sample::<f64, _>(StandardNormal)).collect()
}

/// Monte Carlo accuracy of the Bayes (likelihood-ratio) rule for two
/// equiprobable Gaussian classes.
pub fn bayes_accuracy_mc(a: (f64, f64), b: (f64, f64), trials: usize, seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let loglik = |x: f64, (m, s): (f64, f64)| -0.5 * ((x - m) / s).powi(2) - s.ln();
    let mut correct = 0;
    for i in 0..trials {
        let from_a = i % 2 == 0;
        let (m, s) = if from_a { a } else { b };
        let x = m + s * rng.sample::<f64, _>(StandardNormal);
        if (loglik(x, a) > loglik(x, b)) == from_a {
            correct += 1;
        }
    }
    correct as f64 / trials as f64
}

/// Monte Carlo power of the one-sided Fisher-z test of rho0 against
/// bivariate normal samples of size `n` with correlation `rho1`.
pub fn power_mc(n: usize, rho1: f64, rho0: f64, z_crit: f64, trials: usize, seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rejections = 0;
    let mut x = vec![0.0; n];
    let mut y = vec![0.0; n];
    for _ in 0..trials {
        for i in 0..n {
            let u: f64 = rng.sample(StandardNormal);
            let v: f64 = rng.sample(StandardNormal);
            x[i] = u;
            y[i] = rho1 * u + (1.0 - rho1 * rho1).sqrt() * v;
        }
        let r = pearson(&x, &y);
        if (r.atanh() - rho0.atanh()) * ((n - 3) as f64).sqrt() > z_crit {
            rejections += 1;
        }
    }
    rejections as f64 / trials as f64
}

/// Sorted-key, whitespace-free JSON written independently of the library.
pub fn canonical_oracle(v: &serde_json::Value) -> String {
    use serde_json::Value;
    match v {
        Value::Object(map) => {
            let mut entries: Vec<(&String, &Value)> = map.iter().collect();
            entries.sort_by(|a, b| a.0.as_bytes().cmp(b.0.as_bytes()));
            let body: Vec<String> = entries
                .into_iter()
                .map(|(k, v)| format!("{}:{}", serde_json::Value::String(k.clone()), canonical_oracle(v)))
                .collect();
            format!("{{{}}}", body.join(","))
        }
        Value::Array(items) => format!("[{}]", items.iter().map(canonical_oracle).collect::<Vec<_>>().join(",")),
        other => other.to_string(),
    }
}

pub fn mean_sd(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let m = v.iter().sum::<f64>() / n;
    (m, (v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0)).sqrt())
}
