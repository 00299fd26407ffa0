//! Sentence-level refinement: context suggestions, search, and cut lists.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::extraction::SentenceRange;
use crate::model::{FeatureBundle, ModelError, SentenceId, SpeakerId, TimeMs};
use crate::production::Effect;

pub const DEFAULT_CONTEXT: usize = 3;
pub const DEFAULT_LOOKBACK: usize = 20;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum RefineError {
    #[error("sentence {0} selected more than once")]
    DuplicateSentence(SentenceId),
    #[error(transparent)]
    Model(#[from] ModelError),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RefineContext {
    pub core: Vec<SentenceId>,
    pub before: Vec<SentenceId>,
    pub after: Vec<SentenceId>,
    /// Nearest earlier sentence spoken by the other role.
    pub leading_question: Option<SentenceId>,
    /// Sentences strictly between the leading question and the moment.
    pub between: Vec<SentenceId>,
}

/// Context around a moment with the default lookback.
pub fn context_suggestions(bundle: &FeatureBundle, moment: SentenceRange, k: usize) -> RefineContext {
    context_suggestions_with_lookback(bundle, moment, k, DEFAULT_LOOKBACK)
}

pub fn context_suggestions_with_lookback(
    bundle: &FeatureBundle,
    moment: SentenceRange,
    k: usize,
    lookback: usize,
) -> RefineContext {
    let n = bundle.sentences.len();
    let last = moment.last.min(n.saturating_sub(1));
    let before = (moment.first.saturating_sub(k)..moment.first).collect();
    let after = (last + 1..(last + 1 + k).min(n)).collect();

    let opening_role = bundle.sentence_role(moment.first).ok();
    let leading_question = (moment.first.saturating_sub(lookback)..moment.first)
        .rev()
        .find(|&id| bundle.sentence_role(id).ok() != opening_role);
    let between = match leading_question {
        Some(q) if q + 1 < moment.first => (q + 1..moment.first).collect(),
        _ => Vec::new(),
    };

    RefineContext {
        core: moment.ids(),
        before,
        after,
        leading_question,
        between,
    }
}

/// Case-insensitive substring search; all sentences for an empty query.
pub fn search_sentences(bundle: &FeatureBundle, query: &str) -> Vec<SentenceId> {
    let needle = query.to_lowercase();
    bundle
        .sentences
        .iter()
        .filter(|s| s.text.to_lowercase().contains(&needle))
        .map(|s| s.id)
        .collect()
}

/// One source interval on the teaser timeline.
///
/// `word_start..word_end` indexes the bundle words the interval covers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CutSegment {
    pub sentence_id: SentenceId,
    pub speaker_id: SpeakerId,
    pub source_in: TimeMs,
    pub source_out: TimeMs,
    pub word_start: usize,
    pub word_end: usize,
    #[serde(default)]
    pub effects: Vec<Effect>,
}

impl CutSegment {
    pub fn duration_ms(&self) -> u64 {
        self.source_out.saturating_sub(self.source_in)
    }

    /// Whether `next` resumes exactly where this segment stops in the source.
    pub fn continues_into(&self, next: &CutSegment) -> bool {
        next.word_start == self.word_end && next.source_in >= self.source_out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct CutList {
    pub segments: Vec<CutSegment>,
    pub fillers_removed: bool,
}

impl CutList {
    pub fn duration_ms(&self) -> u64 {
        self.segments.iter().map(CutSegment::duration_ms).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.segments.is_empty()
    }

    /// Teaser-timeline start of every segment.
    pub fn timeline_starts(&self) -> Vec<u64> {
        let mut t = 0;
        self.segments
            .iter()
            .map(|s| {
                let start = t;
                t += s.duration_ms();
                start
            })
            .collect()
    }

    /// Distinct sentence ids in timeline order.
    pub fn sentence_ids(&self) -> Vec<SentenceId> {
        let mut seen = HashSet::new();
        self.segments
            .iter()
            .map(|s| s.sentence_id)
            .filter(|id| seen.insert(*id))
            .collect()
    }
}

/// Builds the cut list for sentences in the given order.
///
/// With `remove_fillers`, each sentence interval has its filler-word
/// intervals subtracted, which may split it into several segments.
pub fn build_cutlist(
    bundle: &FeatureBundle,
    ordered_ids: &[SentenceId],
    remove_fillers: bool,
) -> Result<CutList, RefineError> {
    let mut seen = HashSet::new();
    for &id in ordered_ids {
        bundle.sentence(id)?;
        if !seen.insert(id) {
            return Err(RefineError::DuplicateSentence(id));
        }
    }

    let mut segments = Vec::new();
    for &id in ordered_ids {
        let s = &bundle.sentences[id];
        let start = bundle.words[s.first_word].start;
        let end = bundle.words[s.last_word].end;
        let piece = |from: TimeMs, to: TimeMs, w0: usize, w1: usize| CutSegment {
            sentence_id: id,
            speaker_id: s.speaker_id.clone(),
            source_in: from,
            source_out: to,
            word_start: w0,
            word_end: w1,
            effects: Vec::new(),
        };

        if !remove_fillers {
            if end > start {
                segments.push(piece(start, end, s.first_word, s.last_word + 1));
            }
            continue;
        }

        let mut cursor = start;
        let mut piece_words = s.first_word;
        for i in s.first_word..=s.last_word {
            let w = &bundle.words[i];
            if !w.is_filler {
                continue;
            }
            if w.start > cursor {
                segments.push(piece(cursor, w.start, piece_words, i));
            }
            cursor = cursor.max(w.end);
            piece_words = i + 1;
        }
        if end > cursor {
            segments.push(piece(cursor, end, piece_words, s.last_word + 1));
        }
    }

    Ok(CutList {
        segments,
        fillers_removed: remove_fillers,
    })
}
