//! Utterance augmentation views for the absolute-correlation objective.

use std::collections::HashMap;
use std::fs;
use std::path::Path;

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::batch::View;
use super::{Conversation, Utterance, Vocab};

/// One of the four augmentation strategies. Rates are in `[0,1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "strategy", rename_all = "snake_case", deny_unknown_fields)]
pub enum AugmentationStrategy {
    /// Insert `rate·len` tokens sampled from the owning conversation's
    /// token multiset at random positions.
    ContextInsert { rate: f64 },
    /// Replace `rate·len` tokens with uniform vocabulary samples
    /// (never PAD/BOS/EOS or the speaker tags).
    RandomReplace { rate: f64 },
    /// Replace eligible tokens (those with a lexicon entry) with a uniformly
    /// chosen in-vocab synonym, each with probability `rate`.
    SynonymSub { rate: f64 },
    /// Text-identical view; the encoder applies an independent dropout mask.
    Dropout,
}

impl AugmentationStrategy {
    pub fn validate(&self) -> Result<()> {
        let rate = match self {
            AugmentationStrategy::ContextInsert { rate }
            | AugmentationStrategy::RandomReplace { rate }
            | AugmentationStrategy::SynonymSub { rate } => *rate,
            AugmentationStrategy::Dropout => return Ok(()),
        };
        if !(0.0..=1.0).contains(&rate) {
            return Err(Error::Config(format!("augmentation rate {rate} outside [0,1]")));
        }
        Ok(())
    }
}

/// Word → synonyms map loaded from TSV (`word<TAB>syn1,syn2,...`).
#[derive(Debug, Clone, Default)]
pub struct SynonymLexicon {
    entries: HashMap<String, Vec<String>>,
}

impl SynonymLexicon {
    pub fn load(path: &Path) -> Result<SynonymLexicon> {
        let text = fs::read_to_string(path)?;
        let mut entries = HashMap::new();
        for (lineno, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let (word, syns) = line.split_once('\t').ok_or_else(|| Error::Parse {
                line: lineno + 1,
                msg: "expected `word<TAB>synonyms` in synonym lexicon".into(),
            })?;
            let syns: Vec<String> = syns
                .split(',')
                .map(|s| s.trim().to_lowercase())
                .filter(|s| !s.is_empty())
                .collect();
            entries.insert(word.trim().to_lowercase(), syns);
        }
        Ok(SynonymLexicon { entries })
    }

    pub fn from_entries(entries: HashMap<String, Vec<String>>) -> Self {
        SynonymLexicon { entries }
    }

    pub fn get(&self, word: &str) -> Option<&[String]> {
        self.entries.get(word).map(|v| v.as_slice())
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

fn count_at_rate(rate: f64, len: usize) -> usize {
    ((rate * len as f64) + 1e-9).floor() as usize
}

/// Produce one augmentation view of an utterance. Deterministic given `seed`.
///
/// `conv` is the owning conversation (source multiset for ContextInsert);
/// `lexicon` is required for SynonymSub.
pub fn augment(
    utt: &Utterance,
    conv: &Conversation,
    strategy: &AugmentationStrategy,
    vocab: &Vocab,
    lexicon: Option<&SynonymLexicon>,
    seed: u64,
) -> Result<View> {
    strategy.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let tokens = utt.tokens.clone();
    match strategy {
        AugmentationStrategy::Dropout => Ok(View { tokens, encoder_dropout: true }),
        AugmentationStrategy::ContextInsert { rate } => {
            let count = count_at_rate(*rate, tokens.len());
            let multiset: Vec<u32> = conv
                .utterances
                .iter()
                .flat_map(|u| u.tokens.iter().copied())
                .collect();
            let mut out = tokens;
            if !multiset.is_empty() {
                for _ in 0..count {
                    let pos = rng.gen_range(0..=out.len());
                    let tok = multiset[rng.gen_range(0..multiset.len())];
                    out.insert(pos, tok);
                }
            }
            Ok(View { tokens: out, encoder_dropout: false })
        }
        AugmentationStrategy::RandomReplace { rate } => {
            let count = count_at_rate(*rate, tokens.len());
            let pool = vocab.sampleable_ids();
            let mut out = tokens;
            if count > 0 && !pool.is_empty() {
                let positions = sample(&mut rng, out.len(), count.min(out.len()));
                for pos in positions.iter() {
                    out[pos] = pool[rng.gen_range(0..pool.len())];
                }
            }
            Ok(View { tokens: out, encoder_dropout: false })
        }
        AugmentationStrategy::SynonymSub { rate } => {
            let lexicon = lexicon.ok_or_else(|| {
                Error::Config("synonym_sub augmentation requires a synonym lexicon".into())
            })?;
            let mut out = tokens;
            for tok in out.iter_mut() {
                let Some(word) = vocab.token(*tok) else { continue };
                let Some(syns) = lexicon.get(word) else { continue };
                if rng.gen::<f64>() < *rate {
                    let in_vocab: Vec<u32> =
                        syns.iter().filter_map(|s| vocab.id(s)).collect();
                    if !in_vocab.is_empty() {
                        *tok = in_vocab[rng.gen_range(0..in_vocab.len())];
                    }
                }
            }
            Ok(View { tokens: out, encoder_dropout: false })
        }
    }
}
