//! Dialogue corpora: parsing, vocabulary, augmentation views, batch streams.

mod augment;
mod batch;
mod parse;
mod vocab;

pub use augment::{augment, AugmentationStrategy, SynonymLexicon};
pub use batch::{batch_stream, Batch, BatchItem, View};
pub use parse::{parse_dailydialog, parse_jsonl, ParseReport};
pub use vocab::{tokenize, tokenize_text, Vocab, BOS, EOS, PAD, SPK_A, SPK_B, UNK};

use serde::{Deserialize, Serialize};

/// Which side of the two-party conversation produced an utterance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Speaker {
    A,
    B,
}

/// One turn of a conversation.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Utterance {
    pub conv_id: String,
    /// 0-based position within the conversation.
    pub turn_index: usize,
    pub speaker: Speaker,
    pub text: String,
    /// Vocabulary ids; empty until [`Corpus::tokenize_with`] runs.
    pub tokens: Vec<u32>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Conversation {
    pub id: String,
    pub utterances: Vec<Utterance>,
}

/// An ordered collection of conversations.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct Corpus {
    pub conversations: Vec<Conversation>,
}

impl Corpus {
    pub fn num_conversations(&self) -> usize {
        self.conversations.len()
    }

    pub fn num_utterances(&self) -> usize {
        self.conversations.iter().map(|c| c.utterances.len()).sum()
    }

    /// Flat iteration in corpus order, with the owning conversation's index.
    pub fn iter_utterances(&self) -> impl Iterator<Item = (usize, &Utterance)> {
        self.conversations
            .iter()
            .enumerate()
            .flat_map(|(ci, c)| c.utterances.iter().map(move |u| (ci, u)))
    }

    /// Fill every utterance's token ids from its text.
    pub fn tokenize_with(&mut self, vocab: &Vocab) {
        for conv in &mut self.conversations {
            for utt in &mut conv.utterances {
                utt.tokens = vocab.tokenize(&utt.text);
            }
        }
    }
}

/// Normalize speakers to strict A,B,A,B,… alternation by position.
pub(crate) fn alternate_speaker(turn_index: usize) -> Speaker {
    if turn_index % 2 == 0 {
        Speaker::A
    } else {
        Speaker::B
    }
}
