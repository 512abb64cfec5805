//! Privacy/utility trade-off of timing quantization: CLC classification
//! accuracy and IKI entropy as functions of the resolution `r`.

use serde::{Deserialize, Serialize};

use crate::analysis::Analyzer;
use crate::clc::Verdict;
use crate::entropy::leakage_estimate;
use crate::error::{CogsigError, Result};
use crate::event_log::Session;
use crate::par::{self, Execution};
use crate::synth::{derive_seed, PopulationModel, SessionKind, Synthesizer};

pub const CSV_HEADER: &str = "r_ms,accuracy,pooled_entropy_bits,mi_proxy_bits";

#[derive(Debug, Clone, PartialEq)]
pub struct LabelledSession {
    pub session: Session,
    pub truth: Verdict,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub r_ms: u64,
    /// Fraction of sessions whose CLC verdict matches the label.
    pub accuracy: f64,
    pub pooled_entropy_bits: f64,
    pub mi_proxy_bits: f64,
}

/// One composition and one transcription session per writer.
pub fn synthesize_population(
    synth: &Synthesizer,
    population: &PopulationModel,
    writers: usize,
    seed: u64,
    exec: Execution,
) -> Result<Vec<LabelledSession>> {
    let per_writer = par::map_range(exec, writers, |w| -> Result<[LabelledSession; 2]> {
        let profile = population.writer(format!("w{w:04}"), derive_seed(seed, w as u64, 0));
        let make = |kind: SessionKind, tag: u64, truth: Verdict| -> Result<LabelledSession> {
            let id = format!("w{w:04}-{}", truth.as_str());
            let cfg = population.session_config(&profile, id, derive_seed(seed, w as u64, tag));
            Ok(LabelledSession { session: synth.generate(kind, &cfg)?.session, truth })
        };
        Ok([
            make(SessionKind::Composition, 1, Verdict::Composition)?,
            make(SessionKind::Transcription, 2, Verdict::Transcription)?,
        ])
    });
    let mut out = Vec::with_capacity(2 * writers);
    for pair in per_writer {
        out.extend(pair?);
    }
    Ok(out)
}

fn check_resolutions(r_values: &[u64]) -> Result<()> {
    if r_values.is_empty() {
        return Err(CogsigError::InvalidResolutionList("no resolutions given".into()));
    }
    if r_values.contains(&0) {
        return Err(CogsigError::InvalidResolutionList("resolutions must be >= 1 ms".into()));
    }
    if r_values.windows(2).any(|w| w[0] >= w[1]) {
        return Err(CogsigError::InvalidResolutionList(format!("{r_values:?} is not strictly ascending")));
    }
    Ok(())
}

/// One row per resolution. Every session is quantized at each `r` and run
/// through the CLC decision; inconclusive verdicts count as errors.
pub fn sweep(
    r_values: &[u64],
    population: &[LabelledSession],
    analyzer: &Analyzer,
    exec: Execution,
) -> Result<Vec<SweepRow>> {
    check_resolutions(r_values)?;
    if population.len() < 2 {
        return Err(CogsigError::TooFewSessions { needed: 2, got: population.len() });
    }
    let sessions: Vec<Session> = population.iter().map(|l| l.session.clone()).collect();
    let mut rows = Vec::with_capacity(r_values.len());
    for &r in r_values {
        let hits = par::map(exec, population, |l| {
            analyzer.classify_at(&l.session, r).map(|o| (o.verdict == l.truth) as usize)
        });
        let correct: usize = hits.into_iter().sum::<Result<usize>>()?;
        let leak = leakage_estimate(&sessions, r)?;
        rows.push(SweepRow {
            r_ms: r,
            accuracy: correct as f64 / population.len() as f64,
            pooled_entropy_bits: leak.pooled_entropy_bits,
            mi_proxy_bits: leak.mi_proxy_bits,
        });
    }
    Ok(rows)
}

pub fn to_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for row in rows {
        out.push_str(&format!(
            "{},{:.4},{:.4},{:.4}\n",
            row.r_ms, row.accuracy, row.pooled_entropy_bits, row.mi_proxy_bits
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn resolution_list_validation() {
        assert!(check_resolutions(&[1, 5, 10]).is_ok());
        for bad in [&[][..], &[5, 1], &[0, 5], &[5, 5]] {
            assert!(matches!(check_resolutions(bad), Err(CogsigError::InvalidResolutionList(_))));
        }
    }

    #[test]
    fn csv_layout() {
        let rows = [SweepRow { r_ms: 5, accuracy: 0.975, pooled_entropy_bits: 5.25, mi_proxy_bits: 0.5 }];
        assert_eq!(to_csv(&rows), "r_ms,accuracy,pooled_entropy_bits,mi_proxy_bits\n5,0.9750,5.2500,0.5000\n");
    }
}
