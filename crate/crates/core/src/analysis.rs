//! End-to-end analysis of one session: quantize at the session's
//! resolution, segment, pair latencies with complexity, classify and
//! estimate timing entropy and spectral slope.

use serde::{Deserialize, Serialize};

use crate::clc::{pair_latency_complexity, pair_with_reconstruction, ClcConfig, ClcReport, Verdict};
use crate::complexity::{profile_document, tokenize, NgramModel};
use crate::entropy::{iki_entropy, spectral_slope_values, IkiHistogram};
use crate::error::{CogsigError, Result};
use crate::event_log::{reconstruct_text, Session};
use crate::par::{self, Execution};
use crate::segmentation::{
    detect_bursts, revision_stats, segment_phases, BurstSummary, PhaseSummary, RevisionStats, Segment, Thresholds,
};

pub const REPORT_SCHEMA: &str = "cogsig-report-v1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisReport {
    pub schema: String,
    pub session: String,
    pub writer: String,
    pub r_ms: u64,
    pub privacy: bool,
    pub word_count: usize,
    /// Absent when the session has fewer than two usable word onsets.
    pub clc: Option<ClcReport>,
    pub verdict: Verdict,
    pub segments: Vec<Segment>,
    pub phase_summary: PhaseSummary,
    pub bursts: BurstSummary,
    pub revisions: RevisionStats,
    pub iki_histogram: IkiHistogram,
    pub entropy_bits: f64,
    /// Slope over within-burst IKIs; absent for short or constant series.
    pub spectral_slope: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct Analyzer {
    pub model: NgramModel,
    pub thresholds: Thresholds,
    pub clc: ClcConfig,
}

impl Analyzer {
    pub fn new(model: NgramModel) -> Self {
        Analyzer { model, thresholds: Thresholds::default(), clc: ClcConfig::default() }
    }

    /// Analyze `session` at its own resolution.
    pub fn analyze(&self, session: &Session) -> Result<AnalysisReport> {
        let q = session.quantized(session.resolution_r)?;
        let verdict_only = self.classify_quantized(&q)?;
        let segments = segment_phases(&q, &self.thresholds)?;
        let bursts = detect_bursts(&q, self.thresholds.burst_break_ms)?;
        let ikis: Vec<u64> = q.events.windows(2).map(|w| w[1].t - w[0].t).collect();
        let iki_histogram = IkiHistogram::from_ikis(&ikis, q.resolution_r)?;
        let entropy_bits = iki_entropy(&iki_histogram)?;

        let mut within_burst = Vec::new();
        for b in &bursts {
            within_burst.extend(q.events[b.start_event..=b.end_event].windows(2).map(|w| (w[1].t - w[0].t) as f64));
        }
        let spectral_slope = spectral_slope_values(&within_burst).ok();

        Ok(AnalysisReport {
            schema: REPORT_SCHEMA.to_string(),
            session: q.session_id.clone(),
            writer: q.writer_id.clone(),
            r_ms: q.resolution_r,
            privacy: q.privacy_mode,
            word_count: verdict_only.word_count,
            clc: verdict_only.clc,
            verdict: verdict_only.verdict,
            phase_summary: PhaseSummary::from_segments(&segments),
            segments,
            bursts: BurstSummary::from_bursts(&bursts),
            revisions: revision_stats(&q),
            iki_histogram,
            entropy_bits,
            spectral_slope,
        })
    }

    /// CLC and verdict only, after quantizing at `r`. This is the decision
    /// path used by the resolution sweep.
    pub fn classify_at(&self, session: &Session, r: u64) -> Result<ClcOutcome> {
        self.classify_quantized(&session.quantized(r)?)
    }

    fn classify_quantized(&self, q: &Session) -> Result<ClcOutcome> {
        let (pairs, word_count) = if q.privacy_mode {
            let pairs = pair_latency_complexity(q, None)?;
            (pairs, q.events.iter().filter(|e| e.cbin.is_some()).count())
        } else {
            let rec = reconstruct_text(q)?;
            let word_count = tokenize(&rec.text).len();
            if word_count == 0 {
                return Ok(ClcOutcome { word_count, clc: None, verdict: Verdict::Inconclusive });
            }
            let profile = profile_document(&self.model, &rec.text)?;
            (pair_with_reconstruction(q, &rec, &profile)?, word_count)
        };
        let clc = match ClcReport::from_pairs(&pairs, &self.clc) {
            Ok(r) => Some(r),
            Err(CogsigError::TooFewPairs(_)) => None,
            Err(e) => return Err(e),
        };
        let verdict = clc.map_or(Verdict::Inconclusive, |c| c.verdict);
        Ok(ClcOutcome { word_count, clc, verdict })
    }

    pub fn analyze_many(&self, sessions: &[Session], exec: Execution) -> Vec<Result<AnalysisReport>> {
        par::map(exec, sessions, |s| self.analyze(s))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClcOutcome {
    pub word_count: usize,
    pub clc: Option<ClcReport>,
    pub verdict: Verdict,
}
