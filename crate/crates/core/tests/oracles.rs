mod common;

use approx::assert_abs_diff_eq;
use cogsig_core::clc::{compute_clc, power, spearman, LatencyComplexityPairs};
use cogsig_core::complexity::train_ngram;
use cogsig_core::entropy::{iki_entropy, spectral_slope_values, IkiHistogram};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::*;

#[test]
fn spearman_matches_rank_oracle_with_ties() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for n in 2..=12 {
        for _ in 0..50 {
            let x: Vec<f64> = (0..n).map(|_| rng.random_range(0..5) as f64).collect();
            let y: Vec<f64> = (0..n).map(|_| rng.random_range(0..7) as f64).collect();
            assert_abs_diff_eq!(spearman(&x, &y).unwrap(), spearman_oracle(&x, &y), epsilon = 1e-12);
        }
    }
}

#[test]
fn five_point_example_against_oracle() {
    let pairs = [(1.0, 2.0), (2.0, 1.0), (3.0, 4.0), (4.0, 3.0), (5.0, 5.0)];
    let (x, y): (Vec<f64>, Vec<f64>) = pairs.iter().cloned().unzip();
    let rho = compute_clc(&LatencyComplexityPairs { pairs: pairs.to_vec() }).unwrap();
    assert_abs_diff_eq!(rho, spearman_oracle(&x, &y), epsilon = 1e-12);
    assert_abs_diff_eq!(rho, 0.8, epsilon = 1e-12);
}

#[test]
fn bigram_probabilities_match_counts() {
    let corpus = "the cat sat on the mat the cat ran";
    let model = train_ngram(corpus, 1, 0.5).unwrap();
    let words: Vec<&str> = corpus.split(' ').collect();
    let vocab = model.vocab_size() as f64;
    for ctx in ["the", "cat", "on"] {
        let c_ctx = words.windows(2).filter(|w| w[0] == ctx).count() as f64;
        for w in ["cat", "mat", "ran", "sat", "on"] {
            let c = words.windows(2).filter(|p| p[0] == ctx && p[1] == w).count() as f64;
            let expected = (c + 0.5) / (c_ctx + 0.5 * vocab);
            assert_abs_diff_eq!(model.probability(w, &[ctx]), expected, epsilon = 1e-12);
        }
    }
}

#[test]
fn miller_madow_matches_formula() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for _ in 0..100 {
        let counts: Vec<u64> = (0..rng.random_range(1..40)).map(|_| rng.random_range(0..50)).collect();
        if counts.iter().sum::<u64>() == 0 {
            continue;
        }
        let h = iki_entropy(&IkiHistogram::from_counts(&counts)).unwrap();
        assert_abs_diff_eq!(h, miller_madow_oracle(&counts), epsilon = 1e-10);
    }
}

#[test]
fn spectral_slope_tracks_power_law_exponent() {
    for (beta, seed) in [(0.0, 1), (0.5, 2), (1.0, 3), (1.5, 4)] {
        let slope = spectral_slope_values(&power_law_series(4096, beta, seed)).unwrap();
        assert!((slope + beta).abs() < 0.2, "beta {beta}: slope {slope}");
    }
}

#[test]
fn fisher_power_agrees_with_monte_carlo_at_moderate_n() {
    let analytic = power(150, 0.35, 0.12, 0.05).unwrap();
    let mc = power_mc(150, 0.35, 0.12, 1.6448536269514722, 4000, 21);
    assert!((analytic - mc).abs() < 0.03, "analytic {analytic} mc {mc}");
}

#[test]
fn bayes_oracle_sanity() {
    // identical classes are at chance, far-apart classes are perfect
    assert_abs_diff_eq!(bayes_accuracy_mc((0.0, 1.0), (0.0, 1.0), 100_000, 1), 0.5, epsilon = 0.01);
    assert_abs_diff_eq!(bayes_accuracy_mc((10.0, 1.0), (0.0, 1.0), 10_000, 1), 1.0, epsilon = 1e-9);
}
