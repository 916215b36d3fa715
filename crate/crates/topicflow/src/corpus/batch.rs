//! Batch streaming for contrastive training.
//!
//! Batches are contiguous windows over a conversation-ordered utterance
//! stream. Conversation order is shuffled per epoch by seed; utterance order
//! inside a conversation is never shuffled. Adjacent positions that straddle
//! a conversation boundary are masked so no relative-correlation pair crosses
//! conversations.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

use super::{augment, AugmentationStrategy, Corpus, SynonymLexicon, Vocab};

/// One augmentation view of an utterance.
#[derive(Debug, Clone, PartialEq)]
pub struct View {
    pub tokens: Vec<u32>,
    /// Dropout-strategy views are text-identical; the encoder applies an
    /// independent dropout mask when this is set.
    pub encoder_dropout: bool,
}

/// One utterance in a batch with its two augmentation views.
#[derive(Debug, Clone)]
pub struct BatchItem {
    pub conv_idx: usize,
    pub conv_id: String,
    pub turn_index: usize,
    pub tokens: Vec<u32>,
    pub view_a: View,
    pub view_b: View,
}

#[derive(Debug, Clone)]
pub struct Batch {
    pub items: Vec<BatchItem>,
    /// `boundary[i]` is true when the adjacent pair `(i, i+1)` straddles a
    /// conversation boundary and must be suppressed for relative correlation.
    pub boundary: Vec<bool>,
}

impl Batch {
    /// Indices `i` for which the pair `(i, i+1)` is a valid sequential pair.
    pub fn valid_pairs(&self) -> Vec<usize> {
        self.boundary
            .iter()
            .enumerate()
            .filter(|(_, b)| !**b)
            .map(|(i, _)| i)
            .collect()
    }
}

/// Produce one epoch's batches. Deterministic given `seed`.
pub fn batch_stream(
    corpus: &Corpus,
    vocab: &Vocab,
    strategies: &[AugmentationStrategy],
    lexicon: Option<&SynonymLexicon>,
    batch_size: usize,
    seed: u64,
) -> Result<Vec<Batch>> {
    if batch_size < 2 {
        return Err(Error::InvalidInput(
            "batch_size must be >= 2 (no negatives otherwise)".into(),
        ));
    }
    if strategies.is_empty() {
        return Err(Error::Config("at least one augmentation strategy required".into()));
    }
    for s in strategies {
        s.validate()?;
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut conv_order: Vec<usize> = (0..corpus.conversations.len()).collect();
    conv_order.shuffle(&mut rng);

    let mut items: Vec<BatchItem> = Vec::with_capacity(corpus.num_utterances());
    for &ci in &conv_order {
        let conv = &corpus.conversations[ci];
        for utt in &conv.utterances {
            let pick_a = rng.gen_range(0..strategies.len());
            let pick_b = rng.gen_range(0..strategies.len());
            let seed_a = rng.gen::<u64>();
            let seed_b = rng.gen::<u64>();
            let view_a = augment(utt, conv, &strategies[pick_a], vocab, lexicon, seed_a)?;
            let view_b = augment(utt, conv, &strategies[pick_b], vocab, lexicon, seed_b)?;
            items.push(BatchItem {
                conv_idx: ci,
                conv_id: conv.id.clone(),
                turn_index: utt.turn_index,
                tokens: utt.tokens.clone(),
                view_a,
                view_b,
            });
        }
    }

    let mut batches = Vec::new();
    for chunk in items.chunks(batch_size) {
        let boundary = chunk
            .windows(2)
            .map(|w| w[0].conv_idx != w[1].conv_idx)
            .collect();
        batches.push(Batch { items: chunk.to_vec(), boundary });
    }
    Ok(batches)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{alternate_speaker, Conversation, Utterance};

    fn corpus_with_lengths(lengths: &[usize]) -> (Corpus, Vocab) {
        let conversations = lengths
            .iter()
            .enumerate()
            .map(|(ci, len)| {
                let utterances = (0..*len)
                    .map(|t| Utterance {
                        conv_id: format!("c{ci}"),
                        turn_index: t,
                        speaker: alternate_speaker(t),
                        text: format!("word{ci} tok{t} filler common"),
                        tokens: vec![],
                    })
                    .collect();
                Conversation { id: format!("c{ci}"), utterances }
            })
            .collect();
        let mut corpus = Corpus { conversations };
        let vocab = Vocab::build(&corpus, 1, 32);
        corpus.tokenize_with(&vocab);
        (corpus, vocab)
    }

    fn default_strategies() -> Vec<AugmentationStrategy> {
        vec![
            AugmentationStrategy::Dropout,
            AugmentationStrategy::RandomReplace { rate: 0.15 },
            AugmentationStrategy::ContextInsert { rate: 0.15 },
        ]
    }

    #[test]
    fn single_conversation_has_no_masked_pairs() {
        let (corpus, vocab) = corpus_with_lengths(&[4]);
        let batches =
            batch_stream(&corpus, &vocab, &default_strategies(), None, 4, 0).unwrap();
        assert_eq!(batches.len(), 1);
        assert_eq!(batches[0].items.len(), 4);
        assert!(batches[0].boundary.iter().all(|b| !b));
    }

    #[test]
    fn boundary_between_two_conversations_is_masked() {
        let (corpus, vocab) = corpus_with_lengths(&[2, 2]);
        let batches =
            batch_stream(&corpus, &vocab, &default_strategies(), None, 4, 0).unwrap();
        assert_eq!(batches.len(), 1);
        assert_eq!(batches[0].boundary, vec![false, true, false]);
    }

    #[test]
    fn ceiling_division_keeps_final_short_batch() {
        let (corpus, vocab) = corpus_with_lengths(&[4, 3, 3]);
        let batches =
            batch_stream(&corpus, &vocab, &default_strategies(), None, 4, 1).unwrap();
        let sizes: Vec<usize> = batches.iter().map(|b| b.items.len()).collect();
        assert_eq!(sizes, vec![4, 4, 2]);
    }

    #[test]
    fn batch_size_below_two_rejected() {
        let (corpus, vocab) = corpus_with_lengths(&[4]);
        assert!(batch_stream(&corpus, &vocab, &default_strategies(), None, 1, 0).is_err());
    }

    #[test]
    fn stream_is_bit_reproducible_given_seed() {
        let (corpus, vocab) = corpus_with_lengths(&[3, 5, 2, 4]);
        let a = batch_stream(&corpus, &vocab, &default_strategies(), None, 4, 42).unwrap();
        let b = batch_stream(&corpus, &vocab, &default_strategies(), None, 4, 42).unwrap();
        assert_eq!(a.len(), b.len());
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(x.boundary, y.boundary);
            for (i, j) in x.items.iter().zip(&y.items) {
                assert_eq!(i.tokens, j.tokens);
                assert_eq!(i.view_a, j.view_a);
                assert_eq!(i.view_b, j.view_b);
            }
        }
        let c = batch_stream(&corpus, &vocab, &default_strategies(), None, 4, 43).unwrap();
        let same = a.iter().zip(&c).all(|(x, y)| {
            x.items.iter().zip(&y.items).all(|(i, j)| i.conv_idx == j.conv_idx)
        });
        assert!(!same, "different seeds should reorder conversations");
    }

    #[test]
    fn masked_positions_exactly_equal_boundary_positions() {
        // brute scan across several shapes and seeds
        for seed in 0..5u64 {
            let (corpus, vocab) = corpus_with_lengths(&[2, 3, 4, 2, 5]);
            let batches =
                batch_stream(&corpus, &vocab, &default_strategies(), None, 4, seed).unwrap();
            for b in &batches {
                for i in 0..b.items.len().saturating_sub(1) {
                    let crosses = b.items[i].conv_idx != b.items[i + 1].conv_idx;
                    assert_eq!(b.boundary[i], crosses);
                }
            }
        }
    }

    #[test]
    fn utterance_order_within_conversation_preserved() {
        let (corpus, vocab) = corpus_with_lengths(&[4, 4]);
        for seed in 0..8u64 {
            let batches =
                batch_stream(&corpus, &vocab, &default_strategies(), None, 8, seed).unwrap();
            let flat: Vec<(usize, usize)> = batches
                .iter()
                .flat_map(|b| b.items.iter().map(|i| (i.conv_idx, i.turn_index)))
                .collect();
            // within each conversation run, turn indices must be 0,1,2,...
            let mut prev: Option<(usize, usize)> = None;
            for (ci, ti) in flat {
                if let Some((pci, pti)) = prev {
                    if pci == ci {
                        assert_eq!(ti, pti + 1);
                    } else {
                        assert_eq!(ti, 0);
                    }
                } else {
                    assert_eq!(ti, 0);
                }
                prev = Some((ci, ti));
            }
        }
    }
}
