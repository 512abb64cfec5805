use cogsig_core::clc::spearman;
use cogsig_core::complexity::train_ngram;
use cogsig_core::entropy::{iki_entropy, spectral_slope_values, IkiHistogram};
use cogsig_core::event_log::{compute_ikis, parse_log, quantize, reconstruct_text, EventKind, KeystrokeEvent, Session};
use proptest::prelude::*;

/// Abstract edit: kind selector, position fraction, character, gap.
type Op = (u8, f64, char, u64);

fn build_session(ops: &[Op]) -> (Session, String) {
    let mut s = Session::new("w", "s");
    let mut doc: Vec<char> = Vec::new();
    let mut t = 0;
    for &(sel, frac, ch, gap) in ops {
        t += gap;
        let len = doc.len();
        let at = |lo: usize, hi: usize| lo + ((hi - lo) as f64 * frac).floor() as usize;
        let ev = match sel {
            0 | 1 => {
                let pos = at(0, len + 1).min(len);
                doc.insert(pos, ch);
                KeystrokeEvent::insert(t, ch, pos)
            }
            2 if len > 0 => {
                let pos = at(1, len + 1).clamp(1, len);
                doc.remove(pos - 1);
                KeystrokeEvent::new(t, EventKind::Backspace, pos)
            }
            3 if len > 0 => {
                let pos = at(0, len).min(len - 1);
                doc.remove(pos);
                KeystrokeEvent::new(t, EventKind::Delete, pos)
            }
            4 => {
                let pos = at(0, len + 1).min(len);
                doc.insert(pos, '\n');
                KeystrokeEvent::new(t, EventKind::Enter, pos)
            }
            _ => KeystrokeEvent::new(t, EventKind::CursorMove, at(0, len + 1).min(len)),
        };
        s.events.push(ev);
    }
    (s, doc.into_iter().collect())
}

fn ops() -> impl Strategy<Value = Vec<Op>> {
    prop::collection::vec((0u8..6, 0.0f64..1.0, prop::char::range('a', 'e'), 0u64..3000), 1..80)
}

proptest! {
    #[test]
    fn quantize_is_idempotent_and_bounded(t in 0u64..u64::MAX / 2, r in 1u64..10_000) {
        let q = quantize(t, r).unwrap();
        prop_assert_eq!(quantize(q, r).unwrap(), q);
        prop_assert!(q <= t && t - q < r && q.is_multiple_of(r));
    }

    #[test]
    fn jsonl_round_trip(ops in ops()) {
        let (s, _) = build_session(&ops);
        prop_assert_eq!(parse_log(&s.to_jsonl()).unwrap(), s);
    }

    #[test]
    fn replay_matches_string_edit_oracle(ops in ops()) {
        let (s, text) = build_session(&ops);
        let rec = reconstruct_text(&s).unwrap();
        prop_assert_eq!(&rec.text, &text);
        prop_assert_eq!(rec.sources.len(), text.chars().count());
    }

    #[test]
    fn quantized_session_has_multiple_of_r_ikis(ops in ops(), r in 1u64..100) {
        let (s, _) = build_session(&ops);
        let q = s.quantized(r).unwrap();
        if let Ok(ikis) = compute_ikis(&q) {
            prop_assert!(ikis.values.iter().all(|v| v % r == 0));
        }
        prop_assert_eq!(q.quantized(r).unwrap(), q);
    }

    #[test]
    fn bigram_distribution_sums_to_one(words in prop::collection::vec("[a-d]{1,2}", 2..60), ctx in "[a-d]{1,2}") {
        let corpus = words.join(" ");
        let model = train_ngram(&corpus, 1, 0.1).unwrap();
        let vocab: Vec<String> = model.vocabulary().map(str::to_string).collect();
        let total: f64 = vocab.iter().map(|w| model.probability(w, &[ctx.as_str()])).sum();
        prop_assert!((total - 1.0).abs() < 1e-9, "sum {}", total);
    }

    #[test]
    fn spearman_invariant_to_monotone_transforms(
        pts in prop::collection::vec((-1e3f64..1e3, -1e3f64..1e3), 3..60)
    ) {
        let (x, y): (Vec<f64>, Vec<f64>) = pts.into_iter().unzip();
        let rho = spearman(&x, &y).unwrap();
        let tx: Vec<f64> = x.iter().map(|v| (v / 100.0).exp()).collect();
        let ty: Vec<f64> = y.iter().map(|v| v * 3.0 - 7.0).collect();
        prop_assert!((spearman(&tx, &ty).unwrap() - rho).abs() < 1e-9);
        prop_assert!((-1.0..=1.0).contains(&rho));
    }

    #[test]
    fn spectral_slope_is_scale_invariant(seed in 0u64..1000, scale in 0.01f64..1000.0) {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let x: Vec<f64> = (0..512).map(|_| rng.random::<f64>()).collect();
        let scaled: Vec<f64> = x.iter().map(|v| v * scale + 40.0).collect();
        let a = spectral_slope_values(&x).unwrap();
        let b = spectral_slope_values(&scaled).unwrap();
        prop_assert!((a - b).abs() < 1e-6);
    }

    #[test]
    fn entropy_never_grows_when_bins_merge(ikis in prop::collection::vec(0u64..5000, 1..400), base in 1u64..20) {
        let fine = iki_entropy(&IkiHistogram::from_ikis(&ikis, base).unwrap()).unwrap();
        let coarse = iki_entropy(&IkiHistogram::from_ikis(&ikis, base * 2).unwrap()).unwrap();
        prop_assert!(coarse <= fine + 1e-12);
    }
}
