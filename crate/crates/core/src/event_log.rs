//! Keystroke event streams: the `cogsig-v1` JSONL wire format, inter-key
//! intervals, timing quantization and text replay.
//!
//! A log is an optional header line followed by one event per line:
//!
//! ```text
//! {"schema":"cogsig-v1","session":"s1","writer":"w1","r":5,"privacy":false}
//! {"t":0,"kind":"insert","payload":"a","pos":0}
//! {"t":150,"kind":"insert","payload":"b","pos":1}
//! ```
//!
//! Timestamps are integer milliseconds from session start. In privacy mode
//! inserts carry no payload; word onsets carry a complexity bin (`cbin`)
//! computed by the collector instead.

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{CogsigError, Result};

pub const SCHEMA: &str = "cogsig-v1";
pub const DEFAULT_RESOLUTION_MS: u64 = 5;
/// Complexity bins attached to word onsets in privacy mode.
pub const COMPLEXITY_BINS: u8 = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EventKind {
    Insert,
    Backspace,
    Delete,
    CursorMove,
    Enter,
}

impl EventKind {
    /// Inserts and newlines both add a character to the document.
    pub fn is_typing(self) -> bool {
        matches!(self, EventKind::Insert | EventKind::Enter)
    }

    pub fn is_deletion(self) -> bool {
        matches!(self, EventKind::Backspace | EventKind::Delete)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KeystrokeEvent {
    pub t: u64,
    pub kind: EventKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub payload: Option<char>,
    pub pos: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cbin: Option<u8>,
}

impl KeystrokeEvent {
    pub fn insert(t: u64, ch: char, pos: usize) -> Self {
        KeystrokeEvent { t, kind: EventKind::Insert, payload: Some(ch), pos, cbin: None }
    }

    pub fn new(t: u64, kind: EventKind, pos: usize) -> Self {
        KeystrokeEvent { t, kind, payload: None, pos, cbin: None }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SessionHeader {
    pub schema: String,
    pub session: String,
    pub writer: String,
    pub r: u64,
    pub privacy: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Session {
    pub events: Vec<KeystrokeEvent>,
    pub resolution_r: u64,
    pub privacy_mode: bool,
    pub writer_id: String,
    pub session_id: String,
}

impl Session {
    pub fn new(writer_id: impl Into<String>, session_id: impl Into<String>) -> Self {
        Session {
            events: Vec::new(),
            resolution_r: DEFAULT_RESOLUTION_MS,
            privacy_mode: false,
            writer_id: writer_id.into(),
            session_id: session_id.into(),
        }
    }

    pub fn header(&self) -> SessionHeader {
        SessionHeader {
            schema: SCHEMA.to_string(),
            session: self.session_id.clone(),
            writer: self.writer_id.clone(),
            r: self.resolution_r,
            privacy: self.privacy_mode,
        }
    }

    /// Serialize to the JSONL wire format (header line first, trailing newline).
    pub fn to_jsonl(&self) -> String {
        let mut out = serde_json::to_string(&self.header()).expect("header serializes");
        out.push('\n');
        for ev in &self.events {
            out.push_str(&serde_json::to_string(ev).expect("event serializes"));
            out.push('\n');
        }
        out
    }

    /// Copy of this session with every IKI replaced by `quantize(iki, r)`.
    ///
    /// Timestamps are rebuilt as the running sum of quantized intervals, so
    /// all derived IKIs are multiples of `r` and ordering is preserved.
    pub fn quantized(&self, r: u64) -> Result<Session> {
        if r < 1 {
            return Err(CogsigError::InvalidResolution(r));
        }
        let mut events = self.events.clone();
        if let Some(first) = events.first_mut() {
            let mut prev_raw = first.t;
            first.t = quantize(first.t, r)?;
            let mut acc = first.t;
            for ev in events.iter_mut().skip(1) {
                let iki = ev.t - prev_raw;
                prev_raw = ev.t;
                acc += quantize(iki, r)?;
                ev.t = acc;
            }
        }
        Ok(Session { events, resolution_r: r, ..self.clone() })
    }

    /// Copy with payloads removed and the privacy flag set. Complexity bins
    /// already present on word onsets are kept.
    pub fn stripped(&self) -> Session {
        let events = self
            .events
            .iter()
            .map(|e| KeystrokeEvent { payload: None, ..e.clone() })
            .collect();
        Session { events, privacy_mode: true, ..self.clone() }
    }

    pub fn duration_ms(&self) -> u64 {
        match (self.events.first(), self.events.last()) {
            (Some(a), Some(b)) => b.t - a.t,
            _ => 0,
        }
    }
}

/// Inter-key intervals. `index_map[i]` is the event that terminates `values[i]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IkiSeries {
    pub values: Vec<u64>,
    pub index_map: Vec<usize>,
}

impl IkiSeries {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn as_f64(&self) -> Vec<f64> {
        self.values.iter().map(|&v| v as f64).collect()
    }
}

/// `⌊iki / r⌋ · r`.
pub fn quantize(iki: u64, r: u64) -> Result<u64> {
    if r < 1 {
        return Err(CogsigError::InvalidResolution(r));
    }
    Ok(iki / r * r)
}

pub fn compute_ikis(session: &Session) -> Result<IkiSeries> {
    if session.events.len() < 2 {
        return Err(CogsigError::EmptyLog);
    }
    let values = session.events.windows(2).map(|w| w[1].t - w[0].t).collect();
    let index_map = (1..session.events.len()).collect();
    Ok(IkiSeries { values, index_map })
}

/// Parse a JSONL log. The header line is optional; without it the session
/// gets empty ids, `r = 5` and privacy off.
pub fn parse_log(input: &str) -> Result<Session> {
    let mut session = Session::new("", "");
    let mut seen_header = false;
    let mut doc_len = 0usize;

    for (idx, raw) in input.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        let malformed = |reason: String| CogsigError::MalformedRecord { line: line_no, reason };
        let value: Value = serde_json::from_str(line).map_err(|e| malformed(e.to_string()))?;

        if value.get("schema").is_some() {
            if seen_header || !session.events.is_empty() {
                return Err(malformed("header must be the first record".into()));
            }
            let header: SessionHeader =
                serde_json::from_value(value).map_err(|e| malformed(e.to_string()))?;
            if header.schema != SCHEMA {
                return Err(malformed(format!("unsupported schema {:?}", header.schema)));
            }
            if header.r < 1 {
                return Err(CogsigError::InvalidResolution(header.r));
            }
            session.writer_id = header.writer;
            session.session_id = header.session;
            session.resolution_r = header.r;
            session.privacy_mode = header.privacy;
            seen_header = true;
            continue;
        }

        let ev: KeystrokeEvent =
            serde_json::from_value(value).map_err(|e| malformed(e.to_string()))?;
        if let Some(prev) = session.events.last() {
            if ev.t < prev.t {
                return Err(CogsigError::NonMonotonicTimestamp { line: line_no, prev: prev.t, t: ev.t });
            }
        }
        validate_event(&ev, session.privacy_mode, doc_len).map_err(malformed)?;
        doc_len = apply_len(ev.kind, doc_len);
        session.events.push(ev);
    }

    if session.events.is_empty() {
        return Err(CogsigError::EmptyLog);
    }
    Ok(session)
}

fn validate_event(ev: &KeystrokeEvent, privacy: bool, doc_len: usize) -> std::result::Result<(), String> {
    match (ev.kind, ev.payload, privacy) {
        (EventKind::Insert, None, false) => return Err("insert without payload".into()),
        (EventKind::Insert, Some(_), true) => return Err("payload present in privacy mode".into()),
        (EventKind::Insert, _, _) => {}
        (_, Some(_), _) => return Err(format!("{:?} event must not carry a payload", ev.kind)),
        _ => {}
    }
    if let Some(bin) = ev.cbin {
        if !privacy {
            return Err("cbin is only valid in privacy mode".into());
        }
        if bin >= COMPLEXITY_BINS {
            return Err(format!("cbin {bin} outside 0-7"));
        }
    }
    let ok = match ev.kind {
        EventKind::Insert | EventKind::Enter | EventKind::CursorMove => ev.pos <= doc_len,
        EventKind::Backspace => ev.pos >= 1 && ev.pos <= doc_len,
        EventKind::Delete => ev.pos < doc_len,
    };
    if !ok {
        return Err(format!("pos {} invalid for {:?} at document length {}", ev.pos, ev.kind, doc_len));
    }
    Ok(())
}

fn apply_len(kind: EventKind, len: usize) -> usize {
    match kind {
        EventKind::Insert | EventKind::Enter => len + 1,
        EventKind::Backspace | EventKind::Delete => len.saturating_sub(1),
        EventKind::CursorMove => len,
    }
}

/// Final document text with, for each surviving character, the index of
/// the event that typed it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Reconstruction {
    pub text: String,
    pub sources: Vec<usize>,
}

/// Replay the edit stream. `backspace` at `pos` removes the character before
/// the cursor (`pos - 1`); `delete` removes the character at `pos`.
pub fn reconstruct_text(session: &Session) -> Result<Reconstruction> {
    if session.privacy_mode {
        return Err(CogsigError::PrivacyModeActive);
    }
    let mut chars: Vec<char> = Vec::new();
    let mut sources: Vec<usize> = Vec::new();
    for (i, ev) in session.events.iter().enumerate() {
        let out_of_range = || CogsigError::PositionOutOfRange { event: i, pos: ev.pos, len: chars.len() };
        match ev.kind {
            EventKind::Insert | EventKind::Enter => {
                if ev.pos > chars.len() {
                    return Err(out_of_range());
                }
                let ch = match ev.kind {
                    EventKind::Enter => '\n',
                    _ => ev.payload.ok_or(CogsigError::PrivacyModeActive)?,
                };
                chars.insert(ev.pos, ch);
                sources.insert(ev.pos, i);
            }
            EventKind::Backspace => {
                if ev.pos == 0 || ev.pos > chars.len() {
                    return Err(out_of_range());
                }
                chars.remove(ev.pos - 1);
                sources.remove(ev.pos - 1);
            }
            EventKind::Delete => {
                if ev.pos >= chars.len() {
                    return Err(out_of_range());
                }
                chars.remove(ev.pos);
                sources.remove(ev.pos);
            }
            EventKind::CursorMove => {
                if ev.pos > chars.len() {
                    return Err(out_of_range());
                }
            }
        }
    }
    Ok(Reconstruction { text: chars.into_iter().collect(), sources })
}
