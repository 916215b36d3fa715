//! Vocabulary: deterministic token↔id maps with reserved special ids.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::Corpus;

pub const PAD: u32 = 0;
pub const UNK: u32 = 1;
pub const BOS: u32 = 2;
pub const EOS: u32 = 3;
/// Speaker-tag token for side A, used in generator context assembly.
pub const SPK_A: u32 = 4;
/// Speaker-tag token for side B.
pub const SPK_B: u32 = 5;

const SPECIALS: [&str; 6] = ["<pad>", "<unk>", "<bos>", "<eos>", "[A]", "[B]"];

/// Lowercase, split on whitespace and punctuation boundaries; punctuation
/// characters become their own tokens.
pub fn tokenize_text(text: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut word = String::new();
    for ch in text.chars().flat_map(|c| c.to_lowercase()) {
        if ch.is_whitespace() {
            if !word.is_empty() {
                out.push(std::mem::take(&mut word));
            }
        } else if ch.is_alphanumeric() {
            word.push(ch);
        } else {
            if !word.is_empty() {
                out.push(std::mem::take(&mut word));
            }
            out.push(ch.to_string());
        }
    }
    if !word.is_empty() {
        out.push(word);
    }
    out
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct VocabData {
    id_to_token: Vec<String>,
    min_freq: usize,
    max_len: usize,
}

/// Token↔id map. Ids are dense `0..len()`, specials first.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(from = "VocabData", into = "VocabData")]
pub struct Vocab {
    id_to_token: Vec<String>,
    token_to_id: HashMap<String, u32>,
    pub min_freq: usize,
    /// Tokenization truncates to this many ids, keeping the left side.
    pub max_len: usize,
}

impl From<VocabData> for Vocab {
    fn from(d: VocabData) -> Self {
        let token_to_id = d
            .id_to_token
            .iter()
            .enumerate()
            .map(|(i, t)| (t.clone(), i as u32))
            .collect();
        Vocab { id_to_token: d.id_to_token, token_to_id, min_freq: d.min_freq, max_len: d.max_len }
    }
}

impl From<Vocab> for VocabData {
    fn from(v: Vocab) -> Self {
        VocabData { id_to_token: v.id_to_token, min_freq: v.min_freq, max_len: v.max_len }
    }
}

impl Vocab {
    /// Count tokens over the corpus and keep those with freq >= `min_freq`.
    /// Ordering is by descending frequency, ties broken lexicographically,
    /// so the result is a pure function of (corpus, min_freq, max_len).
    pub fn build(corpus: &Corpus, min_freq: usize, max_len: usize) -> Vocab {
        let mut counts: HashMap<String, usize> = HashMap::new();
        for (_, utt) in corpus.iter_utterances() {
            for tok in tokenize_text(&utt.text) {
                *counts.entry(tok).or_insert(0) += 1;
            }
        }
        let mut kept: Vec<(String, usize)> =
            counts.into_iter().filter(|(_, c)| *c >= min_freq).collect();
        kept.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));

        let mut id_to_token: Vec<String> = SPECIALS.iter().map(|s| s.to_string()).collect();
        id_to_token.extend(kept.into_iter().map(|(t, _)| t));
        let token_to_id = id_to_token
            .iter()
            .enumerate()
            .map(|(i, t)| (t.clone(), i as u32))
            .collect();
        Vocab { id_to_token, token_to_id, min_freq, max_len }
    }

    pub fn len(&self) -> usize {
        self.id_to_token.len()
    }

    pub fn is_empty(&self) -> bool {
        self.id_to_token.is_empty()
    }

    pub fn id(&self, token: &str) -> Option<u32> {
        self.token_to_id.get(token).copied()
    }

    pub fn token(&self, id: u32) -> Option<&str> {
        self.id_to_token.get(id as usize).map(|s| s.as_str())
    }

    /// Map text to ids (OOV → UNK), truncated to `max_len` from the right.
    pub fn tokenize(&self, text: &str) -> Vec<u32> {
        let mut ids: Vec<u32> = tokenize_text(text)
            .into_iter()
            .map(|t| self.id(&t).unwrap_or(UNK))
            .collect();
        ids.truncate(self.max_len);
        ids
    }

    pub fn decode(&self, ids: &[u32]) -> String {
        ids.iter()
            .filter_map(|id| self.token(*id))
            .collect::<Vec<_>>()
            .join(" ")
    }

    /// Stable content hash: changed tokens, min_freq, or max_len all change it.
    pub fn hash(&self) -> String {
        let mut hasher = Sha256::new();
        hasher.update(self.min_freq.to_le_bytes());
        hasher.update(self.max_len.to_le_bytes());
        for t in &self.id_to_token {
            hasher.update(t.as_bytes());
            hasher.update([0u8]);
        }
        hex_string(&hasher.finalize())
    }

    /// Ids that random augmentation may sample: everything except the
    /// structural specials (PAD/BOS/EOS and the speaker tags). UNK stays
    /// eligible.
    pub(crate) fn sampleable_ids(&self) -> Vec<u32> {
        let mut ids: Vec<u32> = vec![UNK];
        ids.extend(SPECIALS.len() as u32..self.len() as u32);
        ids
    }
}

pub(crate) fn hex_string(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

/// Standalone tokenize operation: text to ids under a built vocab.
pub fn tokenize(text: &str, vocab: &Vocab) -> Vec<u32> {
    vocab.tokenize(text)
}
