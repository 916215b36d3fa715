//! Corpus ingestion: JSONL dialogues and the `__eou__`-separated text format.

use std::fs;
use std::path::Path;

use serde::Deserialize;

use crate::error::{Error, Result};

use super::{alternate_speaker, Conversation, Corpus, Utterance};

/// What parsing skipped and why.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ParseReport {
    /// Conversations dropped for having fewer than two utterances.
    pub skipped_short: usize,
    /// Lines dropped because an utterance had empty text.
    pub rejected_empty: usize,
}

impl ParseReport {
    pub fn warnings(&self) -> usize {
        self.skipped_short + self.rejected_empty
    }
}

#[derive(Deserialize)]
struct JsonUtterance {
    #[allow(dead_code)]
    speaker: String,
    text: String,
}

#[derive(Deserialize)]
struct JsonConversation {
    id: String,
    utterances: Vec<JsonUtterance>,
}

/// Parse a JSONL file with one conversation per line:
/// `{"id": ..., "utterances": [{"speaker": ..., "text": ...}, ...]}`.
///
/// Speakers are normalized to strict A/B alternation from the first
/// utterance; the incoming speaker strings are not trusted.
pub fn parse_jsonl(path: &Path) -> Result<(Corpus, ParseReport)> {
    let text = fs::read_to_string(path)?;
    let mut corpus = Corpus::default();
    let mut report = ParseReport::default();

    for (lineno, line) in text.lines().enumerate() {
        let lineno = lineno + 1;
        if line.trim().is_empty() {
            continue;
        }
        let conv: JsonConversation = serde_json::from_str(line).map_err(|e| Error::Parse {
            line: lineno,
            msg: format!("malformed JSON: {e}"),
        })?;
        let texts: Vec<String> = conv.utterances.into_iter().map(|u| u.text).collect();
        push_conversation(&mut corpus, &mut report, conv.id, texts, lineno);
    }
    Ok((corpus, report))
}

/// Parse the plain-text format: one conversation per line, utterances
/// separated by the literal token `__eou__`; a trailing empty segment after
/// the final separator is ignored.
pub fn parse_dailydialog(path: &Path) -> Result<(Corpus, ParseReport)> {
    let text = fs::read_to_string(path)?;
    let mut corpus = Corpus::default();
    let mut report = ParseReport::default();

    for (lineno, line) in text.lines().enumerate() {
        let lineno = lineno + 1;
        if line.trim().is_empty() {
            continue;
        }
        let mut segments: Vec<String> = line.split("__eou__").map(|s| s.trim().to_string()).collect();
        if segments.last().map_or(false, |s| s.is_empty()) {
            segments.pop();
        }
        push_conversation(&mut corpus, &mut report, lineno.to_string(), segments, lineno);
    }
    Ok((corpus, report))
}

fn push_conversation(
    corpus: &mut Corpus,
    report: &mut ParseReport,
    id: String,
    texts: Vec<String>,
    lineno: usize,
) {
    if texts.iter().any(|t| t.trim().is_empty()) {
        log::warn!("line {lineno}: rejected, utterance with empty text");
        report.rejected_empty += 1;
        return;
    }
    if texts.len() < 2 {
        log::warn!("line {lineno}: skipped conversation with {} utterance(s)", texts.len());
        report.skipped_short += 1;
        return;
    }
    let utterances = texts
        .into_iter()
        .enumerate()
        .map(|(i, text)| Utterance {
            conv_id: id.clone(),
            turn_index: i,
            speaker: alternate_speaker(i),
            text,
            tokens: vec![],
        })
        .collect();
    corpus.conversations.push(Conversation { id, utterances });
}
