//! IKI distribution entropy (biometric leakage proxy) and the spectral
//! slope of IKI series.

use std::collections::{BTreeMap, HashMap};
use std::f64::consts::LN_2;

use rustfft::{num_complex::Complex, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{CogsigError, Result};
use crate::event_log::{compute_ikis, quantize, IkiSeries, Session};

/// Population entropy of flight times reported for the large transcription
/// corpus at full resolution. Used as a reference constant only.
pub const POPULATION_ENTROPY_BITS: f64 = 4.12;

pub const WELCH_WINDOW: usize = 128;
pub const MIN_SPECTRAL_LEN: usize = 256;

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct IkiHistogram {
    pub bin_width_ms: u64,
    /// `bin_index = quantize(iki, r) / r` mapped to its count.
    pub counts: BTreeMap<u64, u64>,
    pub total: u64,
}

impl IkiHistogram {
    pub fn new(bin_width_ms: u64) -> Result<Self> {
        if bin_width_ms < 1 {
            return Err(CogsigError::InvalidResolution(bin_width_ms));
        }
        Ok(IkiHistogram { bin_width_ms, counts: BTreeMap::new(), total: 0 })
    }

    pub fn from_ikis(values: &[u64], r: u64) -> Result<Self> {
        let mut h = IkiHistogram::new(r)?;
        h.extend(values);
        Ok(h)
    }

    pub fn from_counts(counts: &[u64]) -> Self {
        let counts: BTreeMap<u64, u64> =
            counts.iter().enumerate().filter(|(_, &c)| c > 0).map(|(i, &c)| (i as u64, c)).collect();
        let total = counts.values().sum();
        IkiHistogram { bin_width_ms: 1, counts, total }
    }

    pub fn extend(&mut self, values: &[u64]) {
        for &v in values {
            let bin = quantize(v, self.bin_width_ms).expect("width checked at construction") / self.bin_width_ms;
            *self.counts.entry(bin).or_insert(0) += 1;
            self.total += 1;
        }
    }

    pub fn occupied_bins(&self) -> usize {
        self.counts.values().filter(|&&c| c > 0).count()
    }
}

/// Plug-in Shannon entropy in bits.
pub fn plugin_entropy(hist: &IkiHistogram) -> Result<f64> {
    if hist.total == 0 {
        return Err(CogsigError::EmptyHistogram);
    }
    let n = hist.total as f64;
    Ok(hist
        .counts
        .values()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / n;
            -p * p.log2()
        })
        .sum())
}

/// Miller-Madow corrected entropy: plug-in plus `(K - 1) / (2 N ln 2)`.
pub fn iki_entropy(hist: &IkiHistogram) -> Result<f64> {
    let h = plugin_entropy(hist)?;
    let k = hist.occupied_bins() as f64;
    Ok(h + (k - 1.0) / (2.0 * hist.total as f64 * LN_2))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LeakageEstimate {
    pub r_ms: u64,
    pub pooled_entropy_bits: f64,
    /// Pooled entropy minus the mean within-writer entropy.
    pub mi_proxy_bits: f64,
}

pub fn leakage_estimate(sessions: &[Session], r: u64) -> Result<LeakageEstimate> {
    if sessions.len() < 2 {
        return Err(CogsigError::TooFewSessions { needed: 2, got: sessions.len() });
    }
    let mut pooled = IkiHistogram::new(r)?;
    let mut per_writer: HashMap<&str, IkiHistogram> = HashMap::new();
    for s in sessions {
        let Ok(ikis) = compute_ikis(s) else { continue };
        pooled.extend(&ikis.values);
        per_writer
            .entry(s.writer_id.as_str())
            .or_insert_with(|| IkiHistogram::new(r).expect("width checked"))
            .extend(&ikis.values);
    }
    let pooled_entropy_bits = iki_entropy(&pooled)?;
    let within: Vec<f64> = per_writer.values().map(iki_entropy).collect::<Result<_>>()?;
    let mean_within = within.iter().sum::<f64>() / within.len() as f64;
    Ok(LeakageEstimate { r_ms: r, pooled_entropy_bits, mi_proxy_bits: pooled_entropy_bits - mean_within })
}

/// Welch-averaged periodogram over half-overlapping 128-sample windows,
/// each mean-removed with a rectangular taper. Returns power for the
/// non-zero frequencies `k / 128`, `k = 1..=64`.
pub fn welch_periodogram(series: &[f64]) -> Result<Vec<f64>> {
    if series.len() < MIN_SPECTRAL_LEN {
        return Err(CogsigError::SeriesTooShort { len: series.len(), min: MIN_SPECTRAL_LEN });
    }
    let fft = FftPlanner::<f64>::new().plan_fft_forward(WELCH_WINDOW);
    let half = WELCH_WINDOW / 2;
    let mut power = vec![0.0; half];
    let mut windows = 0usize;
    let mut buf = vec![Complex::new(0.0, 0.0); WELCH_WINDOW];
    let mut start = 0;
    while start + WELCH_WINDOW <= series.len() {
        let w = &series[start..start + WELCH_WINDOW];
        let mean = w.iter().sum::<f64>() / WELCH_WINDOW as f64;
        for (slot, &x) in buf.iter_mut().zip(w) {
            *slot = Complex::new(x - mean, 0.0);
        }
        fft.process(&mut buf);
        for (k, p) in power.iter_mut().enumerate() {
            *p += buf[k + 1].norm_sqr();
        }
        windows += 1;
        start += half;
    }
    for p in power.iter_mut() {
        *p /= windows as f64;
    }
    Ok(power)
}

/// Least-squares slope of log-power against log-frequency over the middle
/// decade of the Welch periodogram. White noise gives about 0, 1/f noise
/// about -1.
pub fn spectral_slope_values(series: &[f64]) -> Result<f64> {
    let power = welch_periodogram(series)?;
    let (lo, hi) = middle_decade(power.len());
    let mut xs = Vec::with_capacity(hi - lo + 1);
    let mut ys = Vec::with_capacity(hi - lo + 1);
    let scale = power.iter().cloned().fold(0.0, f64::max);
    if scale.is_nan() || scale <= 0.0 {
        return Err(CogsigError::DegenerateSeries);
    }
    for k in lo..=hi {
        let p = power[k - 1] / scale;
        if p.is_nan() || p <= 1e-24 {
            return Err(CogsigError::DegenerateSeries);
        }
        xs.push((k as f64 / WELCH_WINDOW as f64).log10());
        ys.push(p.log10());
    }
    Ok(least_squares_slope(&xs, &ys))
}

pub fn spectral_slope(series: &IkiSeries) -> Result<f64> {
    spectral_slope_values(&series.as_f64())
}

/// Inclusive bin range `[lo, hi]` (1-based frequency index) spanning one
/// decade centred geometrically on the available band `1..=bins`.
fn middle_decade(bins: usize) -> (usize, usize) {
    let centre = (bins as f64).sqrt();
    let lo = (centre / 10f64.sqrt()).ceil() as usize;
    let hi = (centre * 10f64.sqrt()).floor() as usize;
    (lo.max(1), hi.min(bins))
}

fn least_squares_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    sxy / sxx
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn uniform_sixteen_bins() {
        let h = IkiHistogram::from_counts(&[1_000_000; 16]);
        assert_abs_diff_eq!(plugin_entropy(&h).unwrap(), 4.0, epsilon = 1e-12);
        assert_abs_diff_eq!(iki_entropy(&h).unwrap(), 4.0, epsilon = 5e-4);
    }

    #[test]
    fn single_bin_is_zero() {
        let h = IkiHistogram::from_counts(&[0, 42, 0]);
        assert_eq!(iki_entropy(&h).unwrap(), 0.0);
    }

    #[test]
    fn miller_madow_example() {
        let h = IkiHistogram::from_counts(&[8, 8, 16]);
        assert_abs_diff_eq!(plugin_entropy(&h).unwrap(), 1.5, epsilon = 1e-12);
        assert_abs_diff_eq!(iki_entropy(&h).unwrap(), 1.5 + 2.0 / (64.0 * LN_2), epsilon = 1e-12);
        assert_abs_diff_eq!(iki_entropy(&h).unwrap(), 1.545, epsilon = 1e-3);
    }

    #[test]
    fn empty_histogram_errors() {
        let h = IkiHistogram::new(5).unwrap();
        assert_eq!(iki_entropy(&h), Err(CogsigError::EmptyHistogram));
        assert_eq!(IkiHistogram::new(0), Err(CogsigError::InvalidResolution(0)));
    }

    #[test]
    fn histogram_bins_by_quantized_index() {
        let h = IkiHistogram::from_ikis(&[0, 4, 5, 123, 124], 5).unwrap();
        assert_eq!(h.counts.get(&0), Some(&2));
        assert_eq!(h.counts.get(&1), Some(&1));
        assert_eq!(h.counts.get(&24), Some(&2));
        assert_eq!(h.total, 5);
    }

    #[test]
    fn leakage_needs_two_sessions() {
        assert!(matches!(leakage_estimate(&[], 5), Err(CogsigError::TooFewSessions { .. })));
    }

    #[test]
    fn short_and_constant_series() {
        assert_eq!(
            spectral_slope_values(&[1.0; 100]),
            Err(CogsigError::SeriesTooShort { len: 100, min: 256 })
        );
        assert_eq!(spectral_slope_values(&[7.0; 512]), Err(CogsigError::DegenerateSeries));
    }

    #[test]
    fn middle_decade_of_welch_band() {
        assert_eq!(middle_decade(64), (3, 25));
    }
}
