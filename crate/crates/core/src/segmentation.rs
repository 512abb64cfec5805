//! Planning / translating / revising phases, typing bursts and revision
//! statistics.
//!
//! Segments partition the inter-key intervals of a session: each IKI (the
//! gap ending at event `k + 1`) belongs to exactly one segment, and a
//! segment spanning events `start_event..=end_event` covers the IKIs between
//! them. Adjacent segments share their boundary event.

use serde::{Deserialize, Serialize};

use crate::error::{CogsigError, Result};
use crate::event_log::{EventKind, Session};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Thresholds {
    /// Any IKI at or above this starts a planning segment.
    pub planning_ms: u64,
    /// Bursts end at an IKI at or above this.
    pub burst_break_ms: u64,
    /// Consecutive deletions needed for a revision (fewer is a typo fix).
    pub revision_min_deletions: usize,
    /// Retyping after a deletion run stays in the revising segment for at
    /// most this many characters per deleted character.
    pub retype_factor: usize,
}

impl Default for Thresholds {
    fn default() -> Self {
        Thresholds { planning_ms: 1000, burst_break_ms: 2000, revision_min_deletions: 2, retype_factor: 2 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Phase {
    Planning,
    Translating,
    Revising,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub phase: Phase,
    pub start_event: usize,
    pub end_event: usize,
    pub duration_ms: u64,
    pub mean_iki_ms: f64,
}

impl Segment {
    /// IKI indices covered by this segment.
    pub fn iki_range(&self) -> std::ops::Range<usize> {
        self.start_event..self.end_event
    }
}

/// Phase label for every IKI of the session.
pub fn label_ikis(session: &Session, th: &Thresholds) -> Result<Vec<Phase>> {
    let events = &session.events;
    if events.len() < 2 {
        return Err(CogsigError::EmptyLog);
    }
    let iki = |k: usize| events[k + 1].t - events[k].t;
    let n_iki = events.len() - 1;
    let mut labels = vec![Phase::Translating; n_iki];

    // Mark the IKI ending at event `e` as revising.
    let mark = |labels: &mut Vec<Phase>, e: usize| {
        if e >= 1 {
            labels[e - 1] = Phase::Revising;
        }
    };

    let mut i = 0;
    while i < events.len() {
        let kind = events[i].kind;
        let trigger = if kind.is_deletion() {
            let run_end = run_end(events, i, |k| k.is_deletion());
            let run = run_end - i + 1;
            (run >= th.revision_min_deletions).then_some((run_end, run))
        } else if kind == EventKind::CursorMove {
            let run_end = run_end(events, i, |k| k == EventKind::CursorMove);
            Some((run_end, 1))
        } else {
            None
        };

        match trigger {
            Some((run_end, weight)) => {
                for e in i..=run_end {
                    mark(&mut labels, e);
                }
                let budget = th.retype_factor * weight;
                let mut e = run_end + 1;
                let mut retyped = 0;
                while e < events.len() && retyped < budget {
                    let follows = if kind == EventKind::CursorMove {
                        events[e].kind.is_typing() || events[e].kind.is_deletion()
                    } else {
                        events[e].kind.is_typing()
                    };
                    if !follows || iki(e - 1) >= th.planning_ms {
                        break;
                    }
                    mark(&mut labels, e);
                    retyped += 1;
                    e += 1;
                }
                i = e.max(run_end + 1);
            }
            None => {
                i = if kind.is_deletion() { run_end(events, i, |k| k.is_deletion()) + 1 } else { i + 1 };
            }
        }
    }

    // Long pauses are planning regardless of what follows them.
    for (k, label) in labels.iter_mut().enumerate() {
        if iki(k) >= th.planning_ms {
            *label = Phase::Planning;
        }
    }
    Ok(labels)
}

fn run_end(events: &[crate::event_log::KeystrokeEvent], start: usize, pred: impl Fn(EventKind) -> bool) -> usize {
    let mut end = start;
    while end + 1 < events.len() && pred(events[end + 1].kind) {
        end += 1;
    }
    end
}

pub fn segment_phases(session: &Session, th: &Thresholds) -> Result<Vec<Segment>> {
    let labels = label_ikis(session, th)?;
    let events = &session.events;
    let mut segments: Vec<Segment> = Vec::new();
    let mut start = 0usize;
    for k in 0..labels.len() {
        let boundary = k + 1 == labels.len()
            || labels[k + 1] != labels[k]
            || labels[k] == Phase::Planning;
        if boundary {
            let end = k + 1;
            let duration_ms = events[end].t - events[start].t;
            segments.push(Segment {
                phase: labels[k],
                start_event: start,
                end_event: end,
                duration_ms,
                mean_iki_ms: duration_ms as f64 / (end - start) as f64,
            });
            start = end;
        }
    }
    Ok(segments)
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct PhaseTotals {
    pub count: usize,
    pub total_ms: u64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct PhaseSummary {
    pub planning: PhaseTotals,
    pub translating: PhaseTotals,
    pub revising: PhaseTotals,
}

impl PhaseSummary {
    pub fn from_segments(segments: &[Segment]) -> Self {
        let mut s = PhaseSummary::default();
        for seg in segments {
            let slot = match seg.phase {
                Phase::Planning => &mut s.planning,
                Phase::Translating => &mut s.translating,
                Phase::Revising => &mut s.revising,
            };
            slot.count += 1;
            slot.total_ms += seg.duration_ms;
        }
        s
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Burst {
    pub start_event: usize,
    pub end_event: usize,
    pub length_chars: usize,
    pub mean_iki_ms: f64,
}

/// Maximal runs of typed characters with every IKI below `burst_break_ms`.
/// Deletions and cursor moves end a burst.
pub fn detect_bursts(session: &Session, burst_break_ms: u64) -> Result<Vec<Burst>> {
    let events = &session.events;
    if events.len() < 2 {
        return Err(CogsigError::EmptyLog);
    }
    let mut bursts = Vec::new();
    let mut i = 0;
    while i < events.len() {
        if !events[i].kind.is_typing() {
            i += 1;
            continue;
        }
        let start = i;
        while i + 1 < events.len()
            && events[i + 1].kind.is_typing()
            && events[i + 1].t - events[i].t < burst_break_ms
        {
            i += 1;
        }
        let length_chars = i - start + 1;
        let mean_iki_ms = if length_chars > 1 {
            (events[i].t - events[start].t) as f64 / (length_chars - 1) as f64
        } else {
            0.0
        };
        bursts.push(Burst { start_event: start, end_event: i, length_chars, mean_iki_ms });
        i += 1;
    }
    Ok(bursts)
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct BurstSummary {
    pub count: usize,
    pub mean_length: f64,
    /// Coefficient of variation of burst lengths.
    pub cv_length: f64,
}

impl BurstSummary {
    pub fn from_bursts(bursts: &[Burst]) -> Self {
        let n = bursts.len();
        if n == 0 {
            return BurstSummary::default();
        }
        let lens: Vec<f64> = bursts.iter().map(|b| b.length_chars as f64).collect();
        let mean = lens.iter().sum::<f64>() / n as f64;
        let var = lens.iter().map(|l| (l - mean).powi(2)).sum::<f64>() / n as f64;
        BurstSummary { count: n, mean_length: mean, cv_length: if mean > 0.0 { var.sqrt() / mean } else { 0.0 } }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RevisionStats {
    pub revision_episodes: usize,
    pub deleted_chars: usize,
    pub single_char_typo_fixes: usize,
    pub paste_flags: usize,
}

/// Inserts sharing one timestamp at or above this count are flagged as a paste.
pub const PASTE_MIN_INSERTS: usize = 3;

pub fn revision_stats(session: &Session) -> RevisionStats {
    let events = &session.events;
    let mut stats = RevisionStats::default();
    // Shadow document, used to know which character a deletion removed.
    let mut doc: Vec<Option<char>> = Vec::new();
    let mut deleted: Vec<Option<char>> = Vec::new();

    for (i, ev) in events.iter().enumerate() {
        match ev.kind {
            EventKind::Insert | EventKind::Enter => {
                let ch = if ev.kind == EventKind::Enter { Some('\n') } else { ev.payload };
                if ev.pos <= doc.len() {
                    doc.insert(ev.pos, ch);
                }
            }
            EventKind::Backspace | EventKind::Delete => {
                stats.deleted_chars += 1;
                let idx = if ev.kind == EventKind::Backspace { ev.pos.checked_sub(1) } else { Some(ev.pos) };
                let removed = match idx {
                    Some(j) if j < doc.len() => doc.remove(j),
                    _ => None,
                };
                deleted.push(removed);
                let run_over = events.get(i + 1).is_none_or(|next| !next.kind.is_deletion());
                if run_over {
                    let next = events.get(i + 1);
                    let retyped = next.is_some_and(|n| n.kind.is_typing());
                    if retyped && deleted.len() >= 2 {
                        stats.revision_episodes += 1;
                    } else if retyped && deleted.len() == 1 {
                        let next = next.expect("checked above");
                        let typed = if next.kind == EventKind::Enter { Some('\n') } else { next.payload };
                        let differs = match (deleted[0], typed) {
                            (Some(a), Some(b)) => a != b,
                            _ => true,
                        };
                        if differs {
                            stats.single_char_typo_fixes += 1;
                        }
                    }
                    deleted.clear();
                }
            }
            EventKind::CursorMove => {}
        }
    }

    let mut i = 0;
    while i < events.len() {
        let mut j = i;
        let mut inserts = 0;
        while j < events.len() && events[j].t == events[i].t {
            if events[j].kind.is_typing() {
                inserts += 1;
            }
            j += 1;
        }
        if inserts >= PASTE_MIN_INSERTS {
            stats.paste_flags += 1;
        }
        i = j;
    }
    stats
}
