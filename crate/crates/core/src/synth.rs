//! Ground-truth session synthesis: genuine composition, mechanical
//! transcription and three forgery strategies.
//!
//! Text comes from a small synthetic language (Zipfian vocabulary with
//! sparse preferred successors) so that word surprisal under the reference
//! bigram model varies realistically within a document. Timing follows a
//! truncated log-logistic motor model; composition adds a pre-word delay
//! proportional to the upcoming word's surprisal, planning pauses at
//! sentence boundaries and revision episodes.
//!
//! Everything is driven by `ChaCha8Rng` seeded from the config, so equal
//! configs give byte-identical sessions.

use std::collections::{HashMap, HashSet};
use std::sync::OnceLock;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::complexity::{profile_document, train_ngram, NgramModel, DEFAULT_ALPHA, DEFAULT_ORDER};
use crate::error::{CogsigError, Result};
use crate::event_log::{EventKind, KeystrokeEvent, Session, DEFAULT_RESOLUTION_MS};

const LANGUAGE_SEED: u64 = 0x5eed_c0de_0001;
const CORPUS_SEED: u64 = 0x5eed_c0de_0002;
const VOCAB_SIZE: usize = 3000;
const SUCCESSORS: usize = 8;
const SUCCESSOR_WEIGHT: f64 = 0.6;
pub const REFERENCE_CORPUS_WORDS: usize = 200_000;

/// Motor draws are confined to this central quantile band of the
/// log-logistic, keeping transcription tightly bounded.
const MOTOR_QUANTILE_BAND: (f64, f64) = (0.025, 0.975);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Attack {
    None,
    NaiveSlowdown,
    PauseMap,
    RehearsedProfile,
}

impl std::str::FromStr for Attack {
    type Err = CogsigError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "none" => Ok(Attack::None),
            "naive_slowdown" => Ok(Attack::NaiveSlowdown),
            "pause_map" => Ok(Attack::PauseMap),
            "rehearsed_profile" => Ok(Attack::RehearsedProfile),
            other => Err(CogsigError::InvalidConfig(format!("unknown attack {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SessionKind {
    Composition,
    Transcription,
    Forgery(Attack),
}

/// Parameters of the forgery strategies.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ForgeryParams {
    /// Global IKI multiplier for `naive_slowdown`.
    pub slowdown: f64,
    /// Fraction of highest-surprisal words that get a deliberate pause.
    pub pause_fraction: f64,
    pub pause_median_ms: f64,
    pub pause_log_sd: f64,
    /// Log-sd of deliberate pauses in a rehearsed performance.
    pub rehearsed_log_sd: f64,
    /// Multiplier on the typo rate during a rehearsed performance.
    pub rehearsed_typo_factor: f64,
}

impl Default for ForgeryParams {
    fn default() -> Self {
        ForgeryParams {
            slowdown: 1.8,
            pause_fraction: 0.1,
            pause_median_ms: 900.0,
            pause_log_sd: 0.35,
            rehearsed_log_sd: 0.05,
            rehearsed_typo_factor: 0.25,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthConfig {
    pub seed: u64,
    pub words: usize,
    pub motor_median_ms: f64,
    /// Log-logistic shape (larger is tighter).
    pub motor_shape: f64,
    /// Milliseconds of pre-word delay per bit of surprisal (composition only).
    pub clc_gain: f64,
    /// Motor-level lexical effect in ms per bit, present in every mode.
    pub lexical_gain: f64,
    /// Relative session-to-session sd of both gains.
    pub gain_jitter: f64,
    /// Probability of a planning pause at a sentence boundary (paragraph
    /// boundaries always get one).
    pub planning_rate: f64,
    /// Probability of a revision episode per sentence.
    pub revision_rate: f64,
    /// Probability of a single-character typo fix per word.
    pub typo_rate: f64,
    pub attack: Attack,
    pub forgery: ForgeryParams,
    pub privacy: bool,
    pub resolution_r: u64,
    pub writer_id: String,
    pub session_id: String,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            seed: 0,
            words: 1500,
            motor_median_ms: 140.0,
            motor_shape: 25.0,
            clc_gain: 0.009 * 140.0,
            lexical_gain: 0.0009 * 140.0,
            gain_jitter: 0.15,
            planning_rate: 0.5,
            revision_rate: 0.3,
            typo_rate: 0.02,
            attack: Attack::None,
            forgery: ForgeryParams::default(),
            privacy: false,
            resolution_r: DEFAULT_RESOLUTION_MS,
            writer_id: "writer".into(),
            session_id: "session".into(),
        }
    }
}

impl SynthConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(CogsigError::InvalidConfig(m));
        if self.words < 1 {
            return bad("words must be >= 1".into());
        }
        if !(self.motor_median_ms > 0.0 && self.motor_median_ms.is_finite()) {
            return bad(format!("motor_median_ms {} must be positive", self.motor_median_ms));
        }
        if !(self.motor_shape > 1.0 && self.motor_shape.is_finite()) {
            return bad(format!("motor_shape {} must exceed 1", self.motor_shape));
        }
        if !(self.clc_gain >= 0.0 && self.clc_gain.is_finite()) {
            return bad(format!("clc_gain {} must be >= 0", self.clc_gain));
        }
        if !self.lexical_gain.is_finite() || self.gain_jitter.is_nan() || self.gain_jitter < 0.0 {
            return bad("lexical_gain and gain_jitter must be finite, jitter >= 0".into());
        }
        for (name, p) in [
            ("planning_rate", self.planning_rate),
            ("revision_rate", self.revision_rate),
            ("typo_rate", self.typo_rate),
            ("pause_fraction", self.forgery.pause_fraction),
        ] {
            if !(0.0..=1.0).contains(&p) {
                return bad(format!("{name} {p} outside [0, 1]"));
            }
        }
        if self.resolution_r < 1 {
            return bad("resolution_r must be >= 1".into());
        }
        Ok(())
    }
}

/// Generated session plus what the generator knows about it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub session_id: String,
    pub kind: SessionKind,
    /// Events that end a planning pause.
    pub planning_events: Vec<usize>,
    /// First deletion of each revision episode.
    pub revision_events: Vec<usize>,
    /// Word onsets preceded by a deliberate (forged) pause.
    pub deliberate_pause_events: Vec<usize>,
    pub clc_gain_used: f64,
    pub lexical_gain_used: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthOutput {
    pub session: Session,
    pub labels: GroundTruth,
    pub text: String,
}

/// Synthetic language used for both the reference corpus and session texts.
#[derive(Debug, Clone)]
pub struct Language {
    words: Vec<String>,
    unigram_cdf: Vec<f64>,
    successors: Vec<[u32; SUCCESSORS]>,
    successor_cdf: [f64; SUCCESSORS],
}

fn sample_cdf(cdf: &[f64], rng: &mut impl Rng) -> usize {
    let u: f64 = rng.random::<f64>() * cdf[cdf.len() - 1];
    cdf.partition_point(|&c| c <= u).min(cdf.len() - 1)
}

fn cumulative(weights: impl Iterator<Item = f64>) -> Vec<f64> {
    let mut acc = 0.0;
    weights
        .map(|w| {
            acc += w;
            acc
        })
        .collect()
}

impl Language {
    pub fn generate(seed: u64) -> Self {
        const ONSETS: [&str; 24] = [
            "b", "c", "d", "f", "g", "h", "j", "k", "l", "m", "n", "p", "r", "s", "t", "v", "w", "z", "st", "tr",
            "ch", "sh", "pl", "gr",
        ];
        const NUCLEI: [&str; 8] = ["a", "e", "i", "o", "u", "ai", "ou", "ea"];
        const CODAS: [&str; 6] = ["", "", "n", "r", "s", "t"];

        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut seen = HashSet::new();
        let mut words = Vec::with_capacity(VOCAB_SIZE);
        for rank in 0..VOCAB_SIZE {
            // frequent words are short
            let base = 1 + ((rank + 1) as f64).log10().floor() as usize;
            loop {
                let syllables = (base + rng.random_range(0..2)).clamp(1, 5);
                let mut w = String::new();
                for _ in 0..syllables {
                    w.push_str(ONSETS[rng.random_range(0..ONSETS.len())]);
                    w.push_str(NUCLEI[rng.random_range(0..NUCLEI.len())]);
                }
                w.push_str(CODAS[rng.random_range(0..CODAS.len())]);
                if seen.insert(w.clone()) {
                    words.push(w);
                    break;
                }
            }
        }
        let unigram_cdf = cumulative((0..VOCAB_SIZE).map(|r| 1.0 / (r as f64 + 2.7)));
        let successors = (0..VOCAB_SIZE)
            .map(|_| {
                let mut s = [0u32; SUCCESSORS];
                for slot in s.iter_mut() {
                    *slot = sample_cdf(&unigram_cdf, &mut rng) as u32;
                }
                s
            })
            .collect();
        let successor_cdf: [f64; SUCCESSORS] = cumulative((0..SUCCESSORS).map(|j| 1.0 / (j as f64 + 1.0)))
            .try_into()
            .expect("fixed length");
        Language { words, unigram_cdf, successors, successor_cdf }
    }

    fn next_word(&self, prev: usize, rng: &mut impl Rng) -> usize {
        if rng.random::<f64>() < SUCCESSOR_WEIGHT {
            self.successors[prev][sample_cdf(&self.successor_cdf, rng)] as usize
        } else {
            sample_cdf(&self.unigram_cdf, rng)
        }
    }

    /// Text of `n_words` words in sentences of 8-22 words and paragraphs of
    /// 3-6 sentences. Sentences end with '.', paragraphs with a newline.
    pub fn text(&self, n_words: usize, rng: &mut impl Rng) -> String {
        let mut out = String::with_capacity(n_words * 7);
        let mut prev = sample_cdf(&self.unigram_cdf, rng);
        let mut sentence_left = rng.random_range(8..=22);
        let mut para_left = rng.random_range(3..=6);
        for i in 0..n_words {
            let w = self.next_word(prev, rng);
            prev = w;
            out.push_str(&self.words[w]);
            sentence_left -= 1;
            let last = i + 1 == n_words;
            if sentence_left == 0 || last {
                out.push('.');
                sentence_left = rng.random_range(8..=22);
                para_left -= 1;
            }
            if last {
                break;
            }
            if para_left == 0 {
                out.push('\n');
                para_left = rng.random_range(3..=6);
            } else {
                out.push(' ');
            }
        }
        out
    }
}

/// Reference language, corpus model and session generator.
#[derive(Debug, Clone)]
pub struct Synthesizer {
    language: Language,
    model: NgramModel,
}

impl Synthesizer {
    pub fn new() -> Self {
        let language = Language::generate(LANGUAGE_SEED);
        let corpus = Self::corpus_for(&language);
        let model = train_ngram(&corpus, DEFAULT_ORDER, DEFAULT_ALPHA).expect("generated corpus is non-empty");
        Synthesizer { language, model }
    }

    /// Process-wide instance; building the corpus model takes a moment.
    pub fn shared() -> &'static Synthesizer {
        static SHARED: OnceLock<Synthesizer> = OnceLock::new();
        SHARED.get_or_init(Synthesizer::new)
    }

    fn corpus_for(language: &Language) -> String {
        let mut rng = ChaCha8Rng::seed_from_u64(CORPUS_SEED);
        language.text(REFERENCE_CORPUS_WORDS, &mut rng)
    }

    /// Reference corpus the bundled model was trained on (plain text).
    pub fn reference_corpus(&self) -> String {
        Self::corpus_for(&self.language)
    }

    pub fn model(&self) -> &NgramModel {
        &self.model
    }

    pub fn text(&self, words: usize, seed: u64) -> String {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x7e57_7e57_7e57_7e57);
        self.language.text(words, &mut rng)
    }

    /// Generate the text from `cfg.seed` and type it as `kind`.
    pub fn generate(&self, kind: SessionKind, cfg: &SynthConfig) -> Result<SynthOutput> {
        cfg.validate()?;
        let text = self.text(cfg.words, cfg.seed);
        match kind {
            SessionKind::Composition => self.composition(cfg, &text),
            SessionKind::Transcription => self.transcription(cfg, &text),
            SessionKind::Forgery(attack) => {
                let cfg = SynthConfig { attack, ..cfg.clone() };
                self.forgery(&cfg, &text)
            }
        }
    }

    pub fn composition(&self, cfg: &SynthConfig, text: &str) -> Result<SynthOutput> {
        if cfg.clc_gain.is_nan() || cfg.clc_gain <= 0.0 {
            return Err(CogsigError::InvalidConfig("composition needs clc_gain > 0".into()));
        }
        self.type_text(cfg, text, SessionKind::Composition)
    }

    pub fn transcription(&self, cfg: &SynthConfig, text: &str) -> Result<SynthOutput> {
        self.type_text(cfg, text, SessionKind::Transcription)
    }

    pub fn forgery(&self, cfg: &SynthConfig, text: &str) -> Result<SynthOutput> {
        if cfg.attack == Attack::None {
            return Err(CogsigError::InvalidConfig("forgery needs an attack".into()));
        }
        self.type_text(cfg, text, SessionKind::Forgery(cfg.attack))
    }

    fn type_text(&self, cfg: &SynthConfig, text: &str, kind: SessionKind) -> Result<SynthOutput> {
        cfg.validate()?;
        let profile = profile_document(&self.model, text)?;
        let surprisal_at: HashMap<usize, (usize, f64)> =
            profile.per_word.iter().map(|w| (w.start, (w.index, w.surprisal))).collect();

        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let z1: f64 = rng.sample(StandardNormal);
        let z2: f64 = rng.sample(StandardNormal);
        let clc_gain = match kind {
            SessionKind::Composition => cfg.clc_gain * (1.0 + cfg.gain_jitter * z1).max(0.0),
            _ => 0.0,
        };
        let lexical_gain = cfg.lexical_gain * (1.0 + cfg.gain_jitter * z2);

        let attack = match kind {
            SessionKind::Forgery(a) => a,
            _ => Attack::None,
        };
        let deliberate_cut = match attack {
            Attack::PauseMap | Attack::RehearsedProfile => {
                let mut s = profile.surprisals();
                s.sort_by(|a, b| a.total_cmp(b));
                let idx = ((1.0 - cfg.forgery.pause_fraction) * s.len() as f64).floor() as usize;
                Some(s[idx.min(s.len() - 1)])
            }
            _ => None,
        };
        let (revision_rate, typo_rate) = match kind {
            SessionKind::Composition => (cfg.revision_rate, cfg.typo_rate),
            SessionKind::Forgery(Attack::RehearsedProfile) => (0.0, cfg.typo_rate * cfg.forgery.rehearsed_typo_factor),
            _ => (0.0, cfg.typo_rate),
        };
        let slowdown = if attack == Attack::NaiveSlowdown { cfg.forgery.slowdown } else { 1.0 };

        let chunks = split_chunks(text);
        let revision_targets = pick_revision_targets(&chunks, revision_rate, &mut rng);

        let mut typist = Typist {
            rng,
            events: Vec::new(),
            t: 0,
            doc_len: 0,
            motor_median: cfg.motor_median_ms,
            motor_shape: cfg.motor_shape,
            slowdown,
        };
        let mut labels = GroundTruth {
            session_id: cfg.session_id.clone(),
            kind,
            planning_events: Vec::new(),
            revision_events: Vec::new(),
            deliberate_pause_events: Vec::new(),
            clc_gain_used: clc_gain,
            lexical_gain_used: lexical_gain,
        };
        let mut onsets: Vec<(usize, usize)> = Vec::new();

        for (ci, chunk) in chunks.iter().enumerate() {
            let word = surprisal_at.get(&chunk.start).copied();
            let s = word.map_or(0.0, |w| w.1);
            let onset_gap = if ci == 0 {
                0.0
            } else if kind == SessionKind::Composition
                && chunk.sentence_initial
                && (chunk.paragraph_initial || typist.rng.random::<f64>() < cfg.planning_rate)
            {
                labels.planning_events.push(typist.events.len());
                typist.planning_pause()
            } else if deliberate_cut.is_some_and(|cut| word.is_some() && s >= cut) {
                labels.deliberate_pause_events.push(typist.events.len());
                let sd = if attack == Attack::RehearsedProfile {
                    cfg.forgery.rehearsed_log_sd
                } else {
                    cfg.forgery.pause_log_sd
                };
                typist.lognormal(cfg.forgery.pause_median_ms, sd)
            } else {
                (typist.motor() + (clc_gain + lexical_gain) * s).max(1.0)
            };
            if let Some((wi, _)) = word {
                onsets.push((wi, typist.events.len()));
            }

            let chars: Vec<char> = chunk.text.chars().collect();
            let typo_at = (chars.len() >= 2 && typist.rng.random::<f64>() < typo_rate)
                .then(|| typist.rng.random_range(1..chars.len()));
            for (j, &ch) in chars.iter().enumerate() {
                let gap = if j == 0 { onset_gap } else { typist.motor() };
                if typo_at == Some(j) {
                    let wrong = wrong_char(ch, &mut typist.rng);
                    typist.key(gap, EventKind::Insert, Some(wrong));
                    let g = typist.motor() * 1.1;
                    typist.key(g, EventKind::Backspace, None);
                    let g = typist.motor();
                    typist.key(g, EventKind::Insert, Some(ch));
                } else {
                    typist.key(gap, EventKind::Insert, Some(ch));
                }
            }

            if revision_targets.contains(&ci) {
                let k = typist.rng.random_range(2..=(chars.len() - 1).min(6));
                let pause = typist.lognormal(500.0, 0.3).clamp(200.0, 950.0);
                labels.revision_events.push(typist.events.len());
                typist.key(pause, EventKind::Backspace, None);
                for _ in 1..k {
                    let g = typist.motor() * 0.8;
                    typist.key(g, EventKind::Backspace, None);
                }
                for &ch in &chars[chars.len() - k..] {
                    let g = typist.motor();
                    typist.key(g, EventKind::Insert, Some(ch));
                }
            }

            for ch in chunk.separator.chars() {
                let g = typist.motor();
                if ch == '\n' {
                    typist.key(g, EventKind::Enter, None);
                } else {
                    typist.key(g, EventKind::Insert, Some(ch));
                }
            }
        }

        let mut session = Session::new(cfg.writer_id.clone(), cfg.session_id.clone());
        session.resolution_r = cfg.resolution_r;
        session.events = typist.events;
        if cfg.privacy {
            for &(wi, ev) in &onsets {
                session.events[ev].cbin = Some(profile.bins[wi]);
            }
            session = session.stripped();
        }
        Ok(SynthOutput { session, labels, text: text.to_string() })
    }
}

impl Default for Synthesizer {
    fn default() -> Self {
        Synthesizer::new()
    }
}

struct Chunk<'a> {
    start: usize,
    text: &'a str,
    separator: String,
    sentence: usize,
    sentence_initial: bool,
    paragraph_initial: bool,
}

/// Whitespace-delimited chunks with the whitespace that follows each.
/// Leading whitespace of the text is not typed.
fn split_chunks(text: &str) -> Vec<Chunk<'_>> {
    let mut spans: Vec<(usize, usize, usize)> = Vec::new();
    let mut open: Option<(usize, usize)> = None;
    for (char_idx, (b, ch)) in text.char_indices().enumerate() {
        match (ch.is_whitespace(), open) {
            (true, Some((bs, cs))) => {
                spans.push((cs, bs, b));
                open = None;
            }
            (false, None) => open = Some((b, char_idx)),
            _ => {}
        }
    }
    if let Some((bs, cs)) = open {
        spans.push((cs, bs, text.len()));
    }

    let mut chunks = Vec::with_capacity(spans.len());
    let mut sentence = 0;
    let mut sentence_initial = true;
    let mut paragraph_initial = true;
    for (i, &(start, bs, be)) in spans.iter().enumerate() {
        let word = &text[bs..be];
        let sep_end = spans.get(i + 1).map_or(text.len(), |next| next.1);
        let separator = text[be..sep_end].to_string();
        chunks.push(Chunk { start, text: word, separator: separator.clone(), sentence, sentence_initial, paragraph_initial });
        sentence_initial = false;
        paragraph_initial = separator.contains('\n');
        if word.ends_with(['.', '!', '?']) || paragraph_initial {
            sentence += 1;
            sentence_initial = true;
        }
    }
    chunks
}

fn pick_revision_targets(chunks: &[Chunk], rate: f64, rng: &mut impl Rng) -> HashSet<usize> {
    let mut targets = HashSet::new();
    if rate <= 0.0 {
        return targets;
    }
    let mut by_sentence: Vec<Vec<usize>> = Vec::new();
    for (i, c) in chunks.iter().enumerate() {
        if c.text.chars().count() >= 3 {
            if by_sentence.len() <= c.sentence {
                by_sentence.resize(c.sentence + 1, Vec::new());
            }
            by_sentence[c.sentence].push(i);
        }
    }
    for candidates in &by_sentence {
        if !candidates.is_empty() && rng.random::<f64>() < rate {
            targets.insert(candidates[rng.random_range(0..candidates.len())]);
        }
    }
    targets
}

fn wrong_char(ch: char, rng: &mut impl Rng) -> char {
    loop {
        let c = (b'a' + rng.random_range(0..26u8)) as char;
        if c != ch {
            return c;
        }
    }
}

struct Typist {
    rng: ChaCha8Rng,
    events: Vec<KeystrokeEvent>,
    t: u64,
    doc_len: usize,
    motor_median: f64,
    motor_shape: f64,
    slowdown: f64,
}

impl Typist {
    /// Truncated log-logistic flight time.
    fn motor(&mut self) -> f64 {
        let (lo, hi) = MOTOR_QUANTILE_BAND;
        let u = lo + (hi - lo) * self.rng.random::<f64>();
        self.motor_median * (u / (1.0 - u)).powf(1.0 / self.motor_shape)
    }

    fn lognormal(&mut self, median: f64, log_sd: f64) -> f64 {
        let z: f64 = self.rng.sample(StandardNormal);
        median * (log_sd * z).exp()
    }

    /// Log-normal pause confined to 1-5 s.
    fn planning_pause(&mut self) -> f64 {
        loop {
            let p = self.lognormal(1800.0, 0.5);
            if (1000.0..=5000.0).contains(&p) {
                return p;
            }
        }
    }

    fn key(&mut self, gap: f64, kind: EventKind, payload: Option<char>) {
        if !self.events.is_empty() {
            self.t += (gap * self.slowdown).round().max(0.0) as u64;
        }
        self.events.push(KeystrokeEvent { t: self.t, kind, payload, pos: self.doc_len, cbin: None });
        match kind {
            EventKind::Insert | EventKind::Enter => self.doc_len += 1,
            EventKind::Backspace => self.doc_len -= 1,
            _ => {}
        }
    }
}

/// Writer-level parameters drawn from a population.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WriterProfile {
    pub writer_id: String,
    pub motor_median_ms: f64,
    pub clc_gain: f64,
    pub lexical_gain: f64,
    pub planning_rate: f64,
    pub revision_rate: f64,
}

/// Distribution of writers. Gains are expressed relative to each writer's
/// motor median, so the coupling strength does not depend on typing speed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PopulationModel {
    pub motor_median_ms: f64,
    /// Log-sd of per-writer motor medians.
    pub motor_log_sd: f64,
    pub motor_shape: f64,
    pub clc_gain_rel_mean: f64,
    pub clc_gain_rel_sd: f64,
    pub lexical_gain_rel_mean: f64,
    pub lexical_gain_rel_sd: f64,
    pub gain_jitter: f64,
    pub planning_rate: (f64, f64),
    pub revision_rate: (f64, f64),
    pub typo_rate: f64,
    pub words: usize,
}

impl Default for PopulationModel {
    fn default() -> Self {
        PopulationModel {
            motor_median_ms: 140.0,
            motor_log_sd: 0.25,
            motor_shape: 25.0,
            clc_gain_rel_mean: 0.009,
            clc_gain_rel_sd: 0.003,
            lexical_gain_rel_mean: 0.0009,
            lexical_gain_rel_sd: 0.001,
            gain_jitter: 0.15,
            planning_rate: (0.3, 0.7),
            revision_rate: (0.15, 0.45),
            typo_rate: 0.02,
            words: 1500,
        }
    }
}

impl PopulationModel {
    pub fn writer(&self, writer_id: impl Into<String>, seed: u64) -> WriterProfile {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x3171_7e55_0000_0001);
        let z: [f64; 3] = [rng.sample(StandardNormal), rng.sample(StandardNormal), rng.sample(StandardNormal)];
        let motor = self.motor_median_ms * (self.motor_log_sd * z[0]).exp();
        let clc_rel = (self.clc_gain_rel_mean + self.clc_gain_rel_sd * z[1]).max(0.0);
        let lex_rel = self.lexical_gain_rel_mean + self.lexical_gain_rel_sd * z[2];
        let uniform = |rng: &mut ChaCha8Rng, (a, b): (f64, f64)| a + (b - a) * rng.random::<f64>();
        WriterProfile {
            writer_id: writer_id.into(),
            motor_median_ms: motor,
            clc_gain: clc_rel * motor,
            lexical_gain: lex_rel * motor,
            planning_rate: uniform(&mut rng, self.planning_rate),
            revision_rate: uniform(&mut rng, self.revision_rate),
        }
    }

    pub fn session_config(&self, writer: &WriterProfile, session_id: impl Into<String>, seed: u64) -> SynthConfig {
        SynthConfig {
            seed,
            words: self.words,
            motor_median_ms: writer.motor_median_ms,
            motor_shape: self.motor_shape,
            clc_gain: writer.clc_gain.max(1e-9),
            lexical_gain: writer.lexical_gain,
            gain_jitter: self.gain_jitter,
            planning_rate: writer.planning_rate,
            revision_rate: writer.revision_rate,
            typo_rate: self.typo_rate,
            writer_id: writer.writer_id.clone(),
            session_id: session_id.into(),
            ..SynthConfig::default()
        }
    }
}

/// Independent seed for item `index` of stream `tag` under a master seed
/// (SplitMix64 finalizer).
pub fn derive_seed(master: u64, index: u64, tag: u64) -> u64 {
    let mut z = master
        .wrapping_add(index.wrapping_mul(0x9e37_79b9_7f4a_7c15))
        .wrapping_add(tag.wrapping_mul(0xd1b5_4a32_d192_ed03));
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Coefficient of variation of IKIs at or above `min_pause_ms`.
pub fn pause_cv(session: &Session, min_pause_ms: u64) -> Option<f64> {
    let pauses: Vec<f64> = session
        .events
        .windows(2)
        .map(|w| w[1].t - w[0].t)
        .filter(|&g| g >= min_pause_ms)
        .map(|g| g as f64)
        .collect();
    if pauses.len() < 2 {
        return None;
    }
    let n = pauses.len() as f64;
    let mean = pauses.iter().sum::<f64>() / n;
    let var = pauses.iter().map(|p| (p - mean).powi(2)).sum::<f64>() / (n - 1.0);
    Some(var.sqrt() / mean)
}

/// `log10(max / min)` over positive IKIs.
pub fn iki_span_decades(session: &Session) -> Option<f64> {
    let gaps = session.events.windows(2).map(|w| w[1].t - w[0].t).filter(|&g| g > 0);
    let (mut lo, mut hi) = (u64::MAX, 0u64);
    for g in gaps {
        lo = lo.min(g);
        hi = hi.max(g);
    }
    (hi > 0).then(|| (hi as f64 / lo as f64).log10())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::event_log::reconstruct_text;

    #[test]
    fn chunks_track_sentences_and_paragraphs() {
        let chunks = split_chunks("ab cd.\nef gh. ij");
        let starts: Vec<_> = chunks.iter().map(|c| (c.text, c.sentence_initial, c.paragraph_initial)).collect();
        assert_eq!(
            starts,
            vec![("ab", true, true), ("cd.", false, false), ("ef", true, true), ("gh.", false, false), ("ij", true, false)]
        );
        assert_eq!(chunks[1].separator, "\n");
        assert_eq!(chunks[4].start, 14);
    }

    #[test]
    fn generated_text_replays_exactly() {
        let synth = Synthesizer::shared();
        for kind in [
            SessionKind::Composition,
            SessionKind::Transcription,
            SessionKind::Forgery(Attack::PauseMap),
            SessionKind::Forgery(Attack::RehearsedProfile),
            SessionKind::Forgery(Attack::NaiveSlowdown),
        ] {
            let cfg = SynthConfig { words: 200, seed: 11, revision_rate: 0.9, typo_rate: 0.2, ..SynthConfig::default() };
            let out = synth.generate(kind, &cfg).unwrap();
            assert_eq!(reconstruct_text(&out.session).unwrap().text, out.text, "{kind:?}");
        }
    }

    #[test]
    fn invalid_configs() {
        let synth = Synthesizer::shared();
        let bad = SynthConfig { words: 0, ..SynthConfig::default() };
        assert!(matches!(synth.generate(SessionKind::Transcription, &bad), Err(CogsigError::InvalidConfig(_))));
        let bad = SynthConfig { motor_median_ms: 0.0, ..SynthConfig::default() };
        assert!(synth.generate(SessionKind::Composition, &bad).is_err());
        let zero_gain = SynthConfig { clc_gain: 0.0, ..SynthConfig::default() };
        assert!(synth.composition(&zero_gain, "a b c").is_err());
        assert!(synth.forgery(&SynthConfig::default(), "a b c").is_err());
    }

    #[test]
    fn attack_names_parse() {
        assert_eq!("pause_map".parse::<Attack>().unwrap(), Attack::PauseMap);
        assert!("teleport".parse::<Attack>().is_err());
    }
}
