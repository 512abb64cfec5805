//! Cognitive Load Correlation: rank correlation between the pause before
//! each word and that word's complexity.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::complexity::ComplexityProfile;
use crate::error::{CogsigError, Result};
use crate::event_log::{reconstruct_text, Reconstruction, Session};

/// Default decision threshold on rho.
pub const DEFAULT_TAU: f64 = 0.22;
/// Below this many pairs the verdict is inconclusive.
pub const DEFAULT_N_MIN: usize = 100;

/// Reference class models (mean, sd) for composition and transcription.
pub const COMPOSITION_MODEL: (f64, f64) = (0.45, 0.12);
pub const TRANSCRIPTION_MODEL: (f64, f64) = (0.07, 0.08);

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct LatencyComplexityPairs {
    /// `(pre_word_pause_ms, complexity)`; complexity is surprisal in bits,
    /// or the 0-7 bin in privacy mode.
    pub pairs: Vec<(f64, f64)>,
}

impl LatencyComplexityPairs {
    pub fn n(&self) -> usize {
        self.pairs.len()
    }

    pub fn pauses(&self) -> Vec<f64> {
        self.pairs.iter().map(|p| p.0).collect()
    }

    pub fn complexities(&self) -> Vec<f64> {
        self.pairs.iter().map(|p| p.1).collect()
    }
}

/// Pair every word after the first with the IKI preceding its first
/// character.
///
/// In full mode `profile` must have been computed over the reconstructed
/// text of `session`. In privacy mode `profile` is ignored and the pairs
/// are `(IKI, cbin)` taken from the tagged word-onset events.
pub fn pair_latency_complexity(
    session: &Session,
    profile: Option<&ComplexityProfile>,
) -> Result<LatencyComplexityPairs> {
    if session.privacy_mode {
        return Ok(pair_from_bins(session));
    }
    let profile = profile.ok_or_else(|| {
        CogsigError::AlignmentFailure("full-mode session needs a complexity profile".into())
    })?;
    let rec = reconstruct_text(session)?;
    pair_with_reconstruction(session, &rec, profile)
}

pub fn pair_with_reconstruction(
    session: &Session,
    rec: &Reconstruction,
    profile: &ComplexityProfile,
) -> Result<LatencyComplexityPairs> {
    let events = &session.events;
    let mut pairs = Vec::with_capacity(profile.len());
    for w in profile.per_word.iter().skip(1) {
        let e = *rec.sources.get(w.start).ok_or_else(|| {
            CogsigError::AlignmentFailure(format!(
                "word {} starts at char {} beyond text length {}",
                w.index,
                w.start,
                rec.sources.len()
            ))
        })?;
        if e == 0 {
            continue;
        }
        let pause = events[e].t - events[e - 1].t;
        pairs.push((pause as f64, w.surprisal));
    }
    Ok(LatencyComplexityPairs { pairs })
}

fn pair_from_bins(session: &Session) -> LatencyComplexityPairs {
    let events = &session.events;
    let pairs = events
        .iter()
        .enumerate()
        .filter_map(|(i, ev)| ev.cbin.map(|b| (i, b)))
        .skip(1)
        .filter(|&(i, _)| i > 0)
        .map(|(i, b)| ((events[i].t - events[i - 1].t) as f64, b as f64))
        .collect();
    LatencyComplexityPairs { pairs }
}

/// Ranks starting at 1, ties get the mean of the positions they span.
pub fn average_ranks(values: &[f64]) -> Vec<f64> {
    let n = values.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; n];
    let mut i = 0;
    while i < n {
        let mut j = i;
        while j + 1 < n && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        let rank = (i + j) as f64 / 2.0 + 1.0;
        for &k in &order[i..=j] {
            ranks[k] = rank;
        }
        i = j + 1;
    }
    ranks
}

fn pearson(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        // A constant coordinate carries no rank information.
        return 0.0;
    }
    (sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0)
}

/// Spearman correlation with average-rank ties.
pub fn spearman(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(CogsigError::InvalidParameters(format!("length mismatch {} vs {}", x.len(), y.len())));
    }
    if x.len() < 2 {
        return Err(CogsigError::TooFewPairs(x.len()));
    }
    Ok(pearson(&average_ranks(x), &average_ranks(y)))
}

pub fn compute_clc(pairs: &LatencyComplexityPairs) -> Result<f64> {
    spearman(&pairs.pauses(), &pairs.complexities())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Composition,
    Transcription,
    Inconclusive,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Composition => "composition",
            Verdict::Transcription => "transcription",
            Verdict::Inconclusive => "inconclusive",
        }
    }
}

pub fn classify(rho: f64, n: usize, tau: f64) -> Verdict {
    classify_with_min(rho, n, tau, DEFAULT_N_MIN)
}

pub fn classify_with_min(rho: f64, n: usize, tau: f64, n_min: usize) -> Verdict {
    if n < n_min || !rho.is_finite() {
        Verdict::Inconclusive
    } else if rho >= tau {
        Verdict::Composition
    } else {
        Verdict::Transcription
    }
}

fn std_normal() -> Normal {
    Normal::new(0.0, 1.0).expect("unit normal")
}

/// One-sided power of distinguishing `rho1` from `rho0` at level `alpha`,
/// using the Fisher z approximation with standard error `1/sqrt(n - 3)`.
pub fn power(n: usize, rho1: f64, rho0: f64, alpha: f64) -> Result<f64> {
    let bad = |why: &str| Err(CogsigError::InvalidParameters(why.to_string()));
    if n < 4 {
        return bad("power needs n >= 4");
    }
    if !(-1.0 < rho0 && rho0 <= rho1 && rho1 < 1.0) {
        return bad("need -1 < rho0 <= rho1 < 1");
    }
    if !(0.0 < alpha && alpha < 1.0) {
        return bad("alpha must lie in (0, 1)");
    }
    let z = std_normal();
    let shift = (rho1.atanh() - rho0.atanh()) * ((n - 3) as f64).sqrt();
    let z_crit = z.inverse_cdf(1.0 - alpha);
    Ok(1.0 - z.cdf(z_crit - shift))
}

fn log_normal_pdf(x: f64, (mean, sd): (f64, f64)) -> f64 {
    -0.5 * ((x - mean) / sd).powi(2) - sd.ln()
}

/// Point between the two class means where their Gaussian likelihoods are
/// equal, found by bisection.
pub fn equal_likelihood_threshold(composition: (f64, f64), transcription: (f64, f64)) -> f64 {
    let f = |x: f64| log_normal_pdf(x, composition) - log_normal_pdf(x, transcription);
    let (mut lo, mut hi) = (transcription.0, composition.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClcConfig {
    pub tau: f64,
    pub n_min: usize,
    /// Effect sizes and level used for the reported power at the session's n.
    pub power_rho1: f64,
    pub power_rho0: f64,
    pub power_alpha: f64,
}

impl Default for ClcConfig {
    fn default() -> Self {
        ClcConfig { tau: DEFAULT_TAU, n_min: DEFAULT_N_MIN, power_rho1: 0.35, power_rho0: 0.12, power_alpha: 0.05 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClcReport {
    pub rho: f64,
    pub n: usize,
    pub verdict: Verdict,
    pub threshold_used: f64,
    pub power_at_n: Option<f64>,
}

impl ClcReport {
    pub fn from_pairs(pairs: &LatencyComplexityPairs, cfg: &ClcConfig) -> Result<Self> {
        let rho = compute_clc(pairs)?;
        let n = pairs.n();
        Ok(ClcReport {
            rho,
            n,
            verdict: classify_with_min(rho, n, cfg.tau, cfg.n_min),
            threshold_used: cfg.tau,
            power_at_n: power(n, cfg.power_rho1, cfg.power_rho0, cfg.power_alpha).ok(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complexity::{profile_document, train_ngram};
    use crate::event_log::KeystrokeEvent;
    use approx::assert_abs_diff_eq;

    fn pairs(v: &[(f64, f64)]) -> LatencyComplexityPairs {
        LatencyComplexityPairs { pairs: v.to_vec() }
    }

    #[test]
    fn monotone_extremes() {
        let up: Vec<_> = (0..20).map(|i| (i as f64, (i * i) as f64)).collect();
        assert_abs_diff_eq!(compute_clc(&pairs(&up)).unwrap(), 1.0, epsilon = 1e-12);
        let down: Vec<_> = (0..20).map(|i| (i as f64, -(i as f64).exp())).collect();
        assert_abs_diff_eq!(compute_clc(&pairs(&down)).unwrap(), -1.0, epsilon = 1e-12);
    }

    #[test]
    fn five_point_example() {
        // d = [-1, 1, -1, 1, 0], sum d^2 = 4, rho = 1 - 6*4 / (5*24)
        let p = pairs(&[(1.0, 2.0), (2.0, 1.0), (3.0, 4.0), (4.0, 3.0), (5.0, 5.0)]);
        assert_abs_diff_eq!(compute_clc(&p).unwrap(), 0.8, epsilon = 1e-12);
    }

    #[test]
    fn too_few_pairs() {
        assert_eq!(compute_clc(&pairs(&[(1.0, 1.0)])), Err(CogsigError::TooFewPairs(1)));
    }

    #[test]
    fn ties_use_average_ranks() {
        assert_eq!(average_ranks(&[10.0, 20.0, 10.0, 30.0]), vec![1.5, 3.0, 1.5, 4.0]);
    }

    #[test]
    fn classification_rules() {
        assert_eq!(classify(0.45, 1500, DEFAULT_TAU), Verdict::Composition);
        assert_eq!(classify(0.07, 1500, DEFAULT_TAU), Verdict::Transcription);
        assert_eq!(classify(0.45, 50, DEFAULT_TAU), Verdict::Inconclusive);
        assert_eq!(classify(DEFAULT_TAU, 100, DEFAULT_TAU), Verdict::Composition);
    }

    #[test]
    fn power_boundaries() {
        assert!(power(1500, 0.35, 0.12, 0.05).unwrap() > 0.99);
        assert_abs_diff_eq!(power(200, 0.3, 0.3, 0.05).unwrap(), 0.05, epsilon = 1e-9);
        let small = power(10, 0.35, 0.12, 0.05).unwrap();
        assert!(small > 0.05 && small < 0.5, "{small}");
        assert!(power(3, 0.3, 0.1, 0.05).is_err());
        assert!(power(100, 0.1, 0.3, 0.05).is_err());
        assert!(power(100, 0.3, 0.1, 1.0).is_err());
    }

    #[test]
    fn equal_likelihood_point_near_default_tau() {
        let tau = equal_likelihood_threshold(COMPOSITION_MODEL, TRANSCRIPTION_MODEL);
        assert_abs_diff_eq!(tau, 0.2321, epsilon = 1e-3);
        assert!((tau - DEFAULT_TAU).abs() < 0.015);
    }

    fn typed_session(words: &[(&str, u64)]) -> Session {
        let mut s = Session::new("w", "s");
        let mut t = 0;
        let mut pos = 0;
        for (wi, (word, pause)) in words.iter().enumerate() {
            if wi > 0 {
                t += 100;
                s.events.push(KeystrokeEvent::insert(t, ' ', pos));
                pos += 1;
            }
            for (ci, ch) in word.chars().enumerate() {
                if !s.events.is_empty() {
                    t += if ci == 0 { *pause } else { 100 };
                }
                s.events.push(KeystrokeEvent::insert(t, ch, pos));
                pos += 1;
            }
        }
        s
    }

    #[test]
    fn two_word_document_gives_one_pair() {
        let m = train_ngram("alpha beta gamma", 1, 0.1).unwrap();
        let s = typed_session(&[("alpha", 0), ("beta", 420)]);
        let rec = reconstruct_text(&s).unwrap();
        let prof = profile_document(&m, &rec.text).unwrap();
        let p = pair_latency_complexity(&s, Some(&prof)).unwrap();
        assert_eq!(p.n(), 1);
        assert_eq!(p.pairs[0].0, 420.0);
    }

    #[test]
    fn pauses_proportional_to_surprisal_are_perfectly_ranked() {
        let corpus = "a a a a a a b b b b c c d";
        let m = train_ngram(corpus, 1, 0.1).unwrap();
        let words = ["a", "b", "c", "d", "a", "c", "b", "d", "a", "a"];
        let text = words.join(" ");
        let prof = profile_document(&m, &text).unwrap();
        let plan: Vec<(&str, u64)> = words
            .iter()
            .zip(&prof.per_word)
            .map(|(w, pw)| (*w, (100.0 * pw.surprisal).round() as u64 + 1))
            .collect();
        let s = typed_session(&plan);
        let p = pair_latency_complexity(&s, Some(&prof)).unwrap();
        assert_eq!(p.n(), words.len() - 1);
        assert_abs_diff_eq!(compute_clc(&p).unwrap(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn privacy_mode_pairs_use_bins() {
        let mut s = Session::new("w", "s");
        s.privacy_mode = true;
        let mut ev = |t, cbin| s.events.push(KeystrokeEvent { t, kind: crate::event_log::EventKind::Insert, payload: None, pos: 0, cbin });
        ev(0, Some(1));
        ev(100, None);
        ev(400, Some(5));
        ev(500, None);
        ev(1130, Some(7));
        for (i, e) in s.events.iter_mut().enumerate() {
            e.pos = i;
        }
        let p = pair_latency_complexity(&s, None).unwrap();
        assert_eq!(p.pairs, vec![(300.0, 5.0), (630.0, 7.0)]);
    }

    #[test]
    fn full_mode_without_profile_fails_alignment() {
        let s = typed_session(&[("a", 0), ("b", 100)]);
        assert!(matches!(pair_latency_complexity(&s, None), Err(CogsigError::AlignmentFailure(_))));
    }
}
