//! Content-free evidence records, SHA-256 commitments, personal baselines
//! and multi-session consistency checks.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::analysis::{AnalysisReport, Analyzer};
use crate::clc::Verdict;
use crate::error::{CogsigError, Result};
use crate::event_log::Session;
use crate::par::{self, Execution};
use crate::segmentation::{BurstSummary, PhaseSummary, RevisionStats};
use crate::synth::{derive_seed, PopulationModel, SessionKind, SynthConfig, Synthesizer};

pub const EVIDENCE_SCHEMA: &str = "cogsig-evidence-v1";
pub const SALT_LEN: usize = 16;

/// Top-level fields allowed to hold strings. Everything else is numeric or
/// a map of numbers.
const STRING_FIELDS: [&str; 6] = ["schema_version", "writer", "session", "verdict", "salt", "created_at"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvidenceRecord {
    pub schema_version: String,
    pub writer: String,
    pub session: String,
    pub word_count: u64,
    pub clc_rounded: f64,
    pub verdict: Verdict,
    pub r_ms: u64,
    /// Bin lower edge in ms (decimal string) to count.
    pub iki_histogram: BTreeMap<String, u64>,
    pub phase_summary: PhaseSummary,
    pub revision_summary: RevisionStats,
    pub burst_summary: BurstSummary,
    /// Lowercase hex of 16 random bytes.
    pub salt: String,
    pub created_at: String,
}

fn round_to(x: f64, decimals: i32) -> f64 {
    let scale = 10f64.powi(decimals);
    let r = (x * scale).round() / scale;
    if r == 0.0 {
        0.0
    } else {
        r
    }
}

pub fn build_evidence(report: &AnalysisReport, salt: [u8; SALT_LEN], created_at: &str) -> Result<EvidenceRecord> {
    let clc = report
        .clc
        .ok_or_else(|| CogsigError::IncompleteAnalysis(format!("session {} has no CLC", report.session)))?;
    if report.iki_histogram.total == 0 {
        return Err(CogsigError::IncompleteAnalysis(format!("session {} has no IKIs", report.session)));
    }
    let width = report.iki_histogram.bin_width_ms;
    let iki_histogram = report.iki_histogram.counts.iter().map(|(&bin, &c)| ((bin * width).to_string(), c)).collect();
    Ok(EvidenceRecord {
        schema_version: EVIDENCE_SCHEMA.to_string(),
        writer: report.writer.clone(),
        session: report.session.clone(),
        word_count: report.word_count as u64,
        clc_rounded: round_to(clc.rho, 2),
        verdict: report.verdict,
        r_ms: report.r_ms,
        iki_histogram,
        phase_summary: report.phase_summary,
        revision_summary: report.revisions,
        burst_summary: BurstSummary {
            count: report.bursts.count,
            mean_length: round_to(report.bursts.mean_length, 3),
            cv_length: round_to(report.bursts.cv_length, 3),
        },
        salt: hex::encode(salt),
        created_at: created_at.to_string(),
    })
}

/// Analyze and build the record in one step.
pub fn evidence_for_session(
    analyzer: &Analyzer,
    session: &Session,
    salt: [u8; SALT_LEN],
    created_at: &str,
) -> Result<EvidenceRecord> {
    build_evidence(&analyzer.analyze(session)?, salt, created_at)
}

/// UTF-8 JSON with lexicographically sorted keys, no insignificant
/// whitespace and shortest round-trip numbers.
pub fn canonical_json(record: &EvidenceRecord) -> Result<String> {
    let value = serde_json::to_value(record)?;
    let mut out = String::new();
    write_canonical(&value, &mut out)?;
    Ok(out)
}

fn write_canonical(v: &Value, out: &mut String) -> Result<()> {
    match v {
        Value::Null => out.push_str("null"),
        Value::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        Value::Number(n) => {
            if n.as_f64().is_some_and(|f| !f.is_finite()) {
                return Err(CogsigError::Serialization(format!("non-finite number {n}")));
            }
            out.push_str(&n.to_string());
        }
        Value::String(s) => out.push_str(&serde_json::to_string(s)?),
        Value::Array(items) => {
            out.push('[');
            for (i, item) in items.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                write_canonical(item, out)?;
            }
            out.push(']');
        }
        Value::Object(map) => {
            let mut keys: Vec<&String> = map.keys().collect();
            keys.sort();
            out.push('{');
            for (i, k) in keys.into_iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                out.push_str(&serde_json::to_string(k)?);
                out.push(':');
                write_canonical(&map[k], out)?;
            }
            out.push('}');
        }
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Commitment {
    pub digest: [u8; 32],
}

impl Commitment {
    pub fn to_hex(&self) -> String {
        hex::encode(self.digest)
    }

    pub fn from_hex(s: &str) -> Result<Self> {
        let mut digest = [0u8; 32];
        hex::decode_to_slice(s.trim(), &mut digest)
            .map_err(|e| CogsigError::Serialization(format!("bad commitment hex: {e}")))?;
        Ok(Commitment { digest })
    }
}

pub fn commit(record: &EvidenceRecord) -> Result<Commitment> {
    let canonical = canonical_json(record)?;
    Ok(Commitment { digest: Sha256::digest(canonical.as_bytes()).into() })
}

pub fn verify_commitment(record: &EvidenceRecord, commitment: &Commitment) -> bool {
    commit(record).is_ok_and(|c| c == *commitment)
}

/// Schema-level privacy check on a serialized record: no arrays anywhere,
/// no unexpected fields, strings only in identifier fields.
pub fn validate_content_free(value: &Value) -> Result<()> {
    let Value::Object(map) = value else {
        return Err(CogsigError::NotContentFree("record is not an object".into()));
    };
    const ALLOWED: [&str; 13] = [
        "schema_version",
        "writer",
        "session",
        "word_count",
        "clc_rounded",
        "verdict",
        "r_ms",
        "iki_histogram",
        "phase_summary",
        "revision_summary",
        "burst_summary",
        "salt",
        "created_at",
    ];
    for (key, v) in map {
        if !ALLOWED.contains(&key.as_str()) {
            return Err(CogsigError::NotContentFree(format!("unexpected field {key:?}")));
        }
        if STRING_FIELDS.contains(&key.as_str()) {
            if !v.is_string() {
                return Err(CogsigError::NotContentFree(format!("{key} must be a string")));
            }
        } else {
            numeric_tree(key, v)?;
        }
    }
    Ok(())
}

fn numeric_tree(path: &str, v: &Value) -> Result<()> {
    match v {
        Value::Number(_) => Ok(()),
        Value::Object(map) => map.iter().try_for_each(|(k, v)| numeric_tree(&format!("{path}.{k}"), v)),
        Value::Array(_) => Err(CogsigError::NotContentFree(format!("{path} holds an array"))),
        _ => Err(CogsigError::NotContentFree(format!("{path} holds a non-numeric value"))),
    }
}

fn revision_rate(r: &EvidenceRecord) -> f64 {
    r.revision_summary.revision_episodes as f64 / r.word_count.max(1) as f64
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

fn sample_variance(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    let m = mean(xs);
    xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (xs.len() - 1) as f64
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaselineProfile {
    pub writer: String,
    pub clc_mean: f64,
    pub clc_variance: f64,
    pub burst_length_mean: f64,
    /// Revision episodes per word.
    pub revision_rate_mean: f64,
    pub sessions_observed: usize,
}

/// Baseline from enrollment records. Enrollment sessions are trusted as
/// genuine.
pub fn calibrate_baseline(records: &[EvidenceRecord]) -> Result<BaselineProfile> {
    if records.len() < 3 {
        return Err(CogsigError::TooFewSessions { needed: 3, got: records.len() });
    }
    let writer = same_writer(records)?;
    let clc: Vec<f64> = records.iter().map(|r| r.clc_rounded).collect();
    let bursts: Vec<f64> = records.iter().map(|r| r.burst_summary.mean_length).collect();
    let revs: Vec<f64> = records.iter().map(revision_rate).collect();
    Ok(BaselineProfile {
        writer,
        clc_mean: mean(&clc),
        clc_variance: sample_variance(&clc),
        burst_length_mean: mean(&bursts),
        revision_rate_mean: mean(&revs),
        sessions_observed: records.len(),
    })
}

fn same_writer(records: &[EvidenceRecord]) -> Result<String> {
    let writer = &records[0].writer;
    if let Some(other) = records.iter().find(|r| &r.writer != writer) {
        return Err(CogsigError::WriterMismatch(format!("{writer} vs {}", other.writer)));
    }
    Ok(writer.clone())
}

/// Acceptance limits for a check over `sessions` records.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormBand {
    pub sessions: usize,
    pub variance_ratio_low: f64,
    pub variance_ratio_high: f64,
    pub revision_rate_floor: f64,
    pub burst_cv_floor: f64,
}

/// Population norms derived by Monte Carlo over synthesized genuine
/// writers, not from observed data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PopulationNorms {
    /// Mean within-writer CLC variance of the calibration population.
    pub reference_clc_variance: f64,
    pub bands: Vec<NormBand>,
    pub calibration: NormCalibration,
}

impl PopulationNorms {
    pub fn band(&self, sessions: usize) -> Option<&NormBand> {
        self.bands.iter().find(|b| b.sessions == sessions)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormCalibration {
    pub writers: usize,
    pub max_sessions: usize,
    pub seed: u64,
    /// Tail probability assigned to each one-sided test.
    pub tail: f64,
}

impl Default for NormCalibration {
    fn default() -> Self {
        NormCalibration { writers: 600, max_sessions: 10, seed: 0x6e6f_726d, tail: 0.005 }
    }
}

/// Evidence records for `n` sessions of one synthesized writer.
pub fn synthesize_records(
    synth: &Synthesizer,
    analyzer: &Analyzer,
    population: &PopulationModel,
    writer_index: u64,
    kind: SessionKind,
    n: usize,
    seed: u64,
) -> Result<Vec<EvidenceRecord>> {
    let profile = population.writer(format!("w{writer_index:05}"), derive_seed(seed, writer_index, 0));
    (0..n)
        .map(|k| {
            let id = format!("w{writer_index:05}-s{k:02}");
            let cfg = population.session_config(&profile, id, derive_seed(seed, writer_index, 1 + k as u64));
            let cfg = match kind {
                SessionKind::Forgery(attack) => SynthConfig { attack, ..cfg },
                _ => cfg,
            };
            let session = synth.generate(kind, &cfg)?.session;
            let salt = derive_seed(seed ^ 0x5a17, writer_index, k as u64).to_le_bytes();
            let mut salt16 = [0u8; SALT_LEN];
            salt16[..8].copy_from_slice(&salt);
            salt16[8..].copy_from_slice(&salt);
            evidence_for_session(analyzer, &session, salt16, "synthetic")
        })
        .collect()
}

fn quantile(sorted: &[f64], p: f64) -> f64 {
    let pos = p * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

struct Stats {
    clc_variance: f64,
    revision_rate_mean: f64,
    burst_cv_mean: f64,
}

fn stats_of(records: &[EvidenceRecord]) -> Stats {
    let clc: Vec<f64> = records.iter().map(|r| r.clc_rounded).collect();
    let revs: Vec<f64> = records.iter().map(revision_rate).collect();
    let cvs: Vec<f64> = records.iter().map(|r| r.burst_summary.cv_length).collect();
    Stats { clc_variance: sample_variance(&clc), revision_rate_mean: mean(&revs), burst_cv_mean: mean(&cvs) }
}

/// Calibrate acceptance bands for 2..=`max_sessions` records from genuine
/// composition sessions of `cal.writers` synthesized writers.
pub fn calibrate_norms(
    synth: &Synthesizer,
    analyzer: &Analyzer,
    population: &PopulationModel,
    cal: &NormCalibration,
    exec: Execution,
) -> Result<PopulationNorms> {
    if cal.writers < 10 || cal.max_sessions < 2 || !(0.0 < cal.tail && cal.tail < 0.5) {
        return Err(CogsigError::InvalidConfig(format!("bad norm calibration {cal:?}")));
    }
    let per_writer: Vec<Vec<EvidenceRecord>> = par::map_range(exec, cal.writers, |w| {
        synthesize_records(synth, analyzer, population, w as u64, SessionKind::Composition, cal.max_sessions, cal.seed)
    })
    .into_iter()
    .collect::<Result<_>>()?;

    let reference_clc_variance = mean(&per_writer.iter().map(|r| stats_of(r).clc_variance).collect::<Vec<_>>());
    if reference_clc_variance.is_nan() || reference_clc_variance <= 0.0 {
        return Err(CogsigError::InvalidConfig("calibration population has no CLC variance".into()));
    }
    let mut bands = Vec::new();
    for n in 2..=cal.max_sessions {
        let stats: Vec<Stats> = per_writer.iter().map(|r| stats_of(&r[..n])).collect();
        let sorted = |f: &dyn Fn(&Stats) -> f64| {
            let mut v: Vec<f64> = stats.iter().map(f).collect();
            v.sort_by(|a, b| a.total_cmp(b));
            v
        };
        let ratios = sorted(&|s| s.clc_variance / reference_clc_variance);
        bands.push(NormBand {
            sessions: n,
            variance_ratio_low: quantile(&ratios, cal.tail),
            variance_ratio_high: quantile(&ratios, 1.0 - cal.tail),
            revision_rate_floor: quantile(&sorted(&|s| s.revision_rate_mean), cal.tail),
            burst_cv_floor: quantile(&sorted(&|s| s.burst_cv_mean), cal.tail),
        });
    }
    Ok(PopulationNorms { reference_clc_variance, bands, calibration: cal.clone() })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConsistencyOutcome {
    Pass,
    Flag,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConsistencyReport {
    pub writer: String,
    pub sessions: usize,
    pub outcome: ConsistencyOutcome,
    pub clc_mean: f64,
    pub clc_variance: f64,
    pub variance_ratio: f64,
    pub revision_rate_mean: f64,
    pub burst_cv_mean: f64,
    /// Distance of the mean CLC from the baseline mean in baseline standard
    /// deviations of a session mean. Informational.
    pub baseline_z: Option<f64>,
    pub band: NormBand,
    pub reasons: Vec<String>,
}

pub fn consistency_check(
    records: &[EvidenceRecord],
    baseline: &BaselineProfile,
    norms: &PopulationNorms,
) -> Result<ConsistencyReport> {
    if records.len() < 2 {
        return Err(CogsigError::TooFewSessions { needed: 2, got: records.len() });
    }
    let writer = same_writer(records)?;
    if writer != baseline.writer {
        return Err(CogsigError::WriterMismatch(format!("records for {writer}, baseline for {}", baseline.writer)));
    }
    let n = records.len();
    let band = *norms
        .band(n)
        .ok_or_else(|| CogsigError::InvalidConfig(format!("no population norms calibrated for {n} sessions")))?;
    let s = stats_of(records);
    let clc_mean = mean(&records.iter().map(|r| r.clc_rounded).collect::<Vec<_>>());
    let variance_ratio = s.clc_variance / norms.reference_clc_variance;

    let mut reasons = Vec::new();
    if variance_ratio < band.variance_ratio_low {
        reasons.push(format!("CLC variance ratio {variance_ratio:.3} below {:.3}", band.variance_ratio_low));
    }
    if variance_ratio > band.variance_ratio_high {
        reasons.push(format!("CLC variance ratio {variance_ratio:.3} above {:.3}", band.variance_ratio_high));
    }
    if s.revision_rate_mean < band.revision_rate_floor {
        reasons.push(format!(
            "revision rate {:.4} below {:.4}",
            s.revision_rate_mean, band.revision_rate_floor
        ));
    }
    if s.burst_cv_mean < band.burst_cv_floor {
        reasons.push(format!("burst length CV {:.3} below {:.3}", s.burst_cv_mean, band.burst_cv_floor));
    }
    let baseline_z = (baseline.clc_variance > 0.0)
        .then(|| (clc_mean - baseline.clc_mean) / (baseline.clc_variance / n as f64).sqrt());

    Ok(ConsistencyReport {
        writer,
        sessions: n,
        outcome: if reasons.is_empty() { ConsistencyOutcome::Pass } else { ConsistencyOutcome::Flag },
        clc_mean,
        clc_variance: s.clc_variance,
        variance_ratio,
        revision_rate_mean: s.revision_rate_mean,
        burst_cv_mean: s.burst_cv_mean,
        baseline_z,
        band,
        reasons,
    })
}
