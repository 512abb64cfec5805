//! Word-level content complexity as n-gram surprisal.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{CogsigError, Result};
use crate::event_log::COMPLEXITY_BINS;

pub const DEFAULT_ORDER: usize = 1;
pub const DEFAULT_ALPHA: f64 = 0.1;

const BOS: u32 = u32::MAX;
const UNK: u32 = u32::MAX - 1;

/// A whitespace-delimited chunk reduced to its lowercase alphanumerics.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub word: String,
    /// Character offset of the first character of the chunk.
    pub start: usize,
}

pub fn tokenize(text: &str) -> Vec<Token> {
    let mut tokens = Vec::new();
    let mut current: Option<(usize, String)> = None;
    for (i, ch) in text.chars().enumerate() {
        if ch.is_whitespace() {
            if let Some((start, word)) = current.take() {
                if !word.is_empty() {
                    tokens.push(Token { word, start });
                }
            }
            continue;
        }
        let entry = current.get_or_insert_with(|| (i, String::new()));
        if ch.is_alphanumeric() {
            entry.1.extend(ch.to_lowercase());
        }
    }
    if let Some((start, word)) = current {
        if !word.is_empty() {
            tokens.push(Token { word, start });
        }
    }
    tokens
}

#[derive(Debug, Clone, Default)]
struct ContextCounts {
    total: u64,
    next: HashMap<u32, u64>,
}

/// Add-α smoothed n-gram model. `order` is the context length in words, so
/// `order = 1` is a bigram model.
#[derive(Debug, Clone)]
pub struct NgramModel {
    order: usize,
    alpha: f64,
    vocab: HashMap<String, u32>,
    counts: HashMap<Vec<u32>, ContextCounts>,
}

pub fn train_ngram(corpus: &str, order: usize, alpha: f64) -> Result<NgramModel> {
    if !(1..=3).contains(&order) {
        return Err(CogsigError::InvalidModel(format!("order {order} not in 1..=3")));
    }
    if !(alpha.is_finite() && alpha > 0.0) {
        return Err(CogsigError::InvalidModel(format!("alpha {alpha} must be positive")));
    }
    let tokens = tokenize(corpus);
    if tokens.is_empty() {
        return Err(CogsigError::EmptyCorpus);
    }

    let mut vocab: HashMap<String, u32> = HashMap::new();
    let ids: Vec<u32> = tokens
        .into_iter()
        .map(|t| {
            let next = vocab.len() as u32;
            *vocab.entry(t.word).or_insert(next)
        })
        .collect();

    let mut counts: HashMap<Vec<u32>, ContextCounts> = HashMap::new();
    let mut context = vec![BOS; order];
    for &id in &ids {
        let entry = counts.entry(context.clone()).or_default();
        entry.total += 1;
        *entry.next.entry(id).or_insert(0) += 1;
        context.rotate_left(1);
        context[order - 1] = id;
    }

    Ok(NgramModel { order, alpha, vocab, counts })
}

impl NgramModel {
    pub fn order(&self) -> usize {
        self.order
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn vocab_size(&self) -> usize {
        self.vocab.len()
    }

    pub fn vocabulary(&self) -> impl Iterator<Item = &str> {
        self.vocab.keys().map(String::as_str)
    }

    fn id(&self, word: &str) -> u32 {
        self.vocab.get(word).copied().unwrap_or(UNK)
    }

    /// Context key for the words preceding the target; missing history is
    /// padded with the start-of-stream marker.
    fn context_key(&self, context: &[&str]) -> Vec<u32> {
        let mut key = vec![BOS; self.order];
        let take = context.len().min(self.order);
        let tail = &context[context.len() - take..];
        for (slot, w) in key[self.order - take..].iter_mut().zip(tail) {
            *slot = self.id(w);
        }
        key
    }

    fn prob_ids(&self, word: u32, key: &[u32]) -> f64 {
        let v = self.vocab.len() as f64;
        let (count, total) = match self.counts.get(key) {
            Some(c) => (c.next.get(&word).copied().unwrap_or(0), c.total),
            None => (0, 0),
        };
        (count as f64 + self.alpha) / (total as f64 + self.alpha * v)
    }

    /// `P(word | context)`. Only the last `order` words of `context` are used.
    pub fn probability(&self, word: &str, context: &[&str]) -> f64 {
        let key = self.context_key(context);
        self.prob_ids(self.id(word), &key)
    }

    /// `-log2 P(word | context)` in bits. Always finite.
    pub fn surprisal(&self, word: &str, context: &[&str]) -> f64 {
        -self.probability(word, context).log2()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WordComplexity {
    pub index: usize,
    /// Character offset of the word in the profiled text.
    pub start: usize,
    pub surprisal: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComplexityProfile {
    pub per_word: Vec<WordComplexity>,
    /// Within-document octile bin (0-7) of each word's surprisal.
    pub bins: Vec<u8>,
}

impl ComplexityProfile {
    pub fn len(&self) -> usize {
        self.per_word.len()
    }

    pub fn is_empty(&self) -> bool {
        self.per_word.is_empty()
    }

    pub fn surprisals(&self) -> Vec<f64> {
        self.per_word.iter().map(|w| w.surprisal).collect()
    }
}

pub fn profile_document(model: &NgramModel, text: &str) -> Result<ComplexityProfile> {
    let tokens = tokenize(text);
    if tokens.is_empty() {
        return Err(CogsigError::EmptyDocument);
    }
    let ids: Vec<u32> = tokens.iter().map(|t| model.id(&t.word)).collect();
    let mut key = vec![BOS; model.order];
    let per_word: Vec<WordComplexity> = tokens
        .iter()
        .zip(&ids)
        .enumerate()
        .map(|(index, (tok, &id))| {
            let surprisal = -model.prob_ids(id, &key).log2();
            key.rotate_left(1);
            key[model.order - 1] = id;
            WordComplexity { index, start: tok.start, surprisal }
        })
        .collect();
    let bins = octile_bins(&per_word.iter().map(|w| w.surprisal).collect::<Vec<_>>());
    Ok(ComplexityProfile { per_word, bins })
}

/// Bin each value by the octile of its rank: `⌊8 · rank / n⌋` with tied
/// values sharing the lowest rank of their group.
pub fn octile_bins(values: &[f64]) -> Vec<u8> {
    let n = values.len();
    let mut sorted: Vec<f64> = values.to_vec();
    sorted.sort_by(|a, b| a.total_cmp(b));
    values
        .iter()
        .map(|v| {
            let rank = sorted.partition_point(|x| x < v);
            ((COMPLEXITY_BINS as usize * rank) / n) as u8
        })
        .collect()
}
