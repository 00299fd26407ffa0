//! Feature bundle domain types and timeline arithmetic.
//!
//! A [`FeatureBundle`] carries everything the ingestion pipeline knows about an
//! episode: word-timed transcript, sentence segmentation with speaker labels,
//! filler flags, an amplitude envelope and per-person visibility intervals.
//! It is immutable once parsed and can be shared freely between threads.

mod format;

use std::fmt;

use serde::{Deserialize, Serialize};

pub use format::{parse_feature_bundle, serialize_feature_bundle, BundleError};

/// Milliseconds relative to the start of the episode.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct TimeMs(pub u64);

impl TimeMs {
    pub const ZERO: TimeMs = TimeMs(0);

    pub fn as_ms(self) -> u64 {
        self.0
    }

    pub fn saturating_sub(self, other: TimeMs) -> u64 {
        self.0.saturating_sub(other.0)
    }
}

impl fmt::Display for TimeMs {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}ms", self.0)
    }
}

/// Index of a sentence in the bundle; sentence ids are dense and equal to their position.
pub type SentenceId = usize;

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SpeakerId(pub String);

impl SpeakerId {
    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for SpeakerId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for SpeakerId {
    fn from(s: &str) -> Self {
        SpeakerId(s.to_string())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    Host,
    Guest,
}

impl Role {
    pub fn as_str(self) -> &'static str {
        match self {
            Role::Host => "host",
            Role::Guest => "guest",
        }
    }
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Speaker {
    pub id: SpeakerId,
    pub display_name: String,
    pub role: Role,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Word {
    pub text: String,
    pub start: TimeMs,
    pub end: TimeMs,
    pub is_filler: bool,
}

impl Word {
    pub fn duration_ms(&self) -> u64 {
        self.end.saturating_sub(self.start)
    }
}

/// A sentence covering the inclusive word index range `first_word..=last_word`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Sentence {
    pub id: SentenceId,
    pub first_word: usize,
    pub last_word: usize,
    pub speaker_id: SpeakerId,
    pub text: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AmplitudeEnvelope {
    pub frame_period_ms: u64,
    pub samples: Vec<f64>,
}

impl AmplitudeEnvelope {
    /// Sum and count of samples whose frame midpoint lies in `[start, end)`.
    pub fn frame_stats(&self, start: TimeMs, end: TimeMs) -> (f64, usize) {
        let range = self.frame_range(start, end);
        let sum = self.samples[range.clone()].iter().sum();
        (sum, range.len())
    }

    /// Frame indices whose midpoint `k*p + p/2` falls in `[start, end)`.
    pub fn frame_range(&self, start: TimeMs, end: TimeMs) -> std::ops::Range<usize> {
        if end <= start || self.frame_period_ms == 0 {
            return 0..0;
        }
        let p = self.frame_period_ms as i128;
        let n = self.samples.len() as i128;
        // k*p + p/2 >= s  <=>  k >= (2s - p) / 2p
        let lo = ceil_div(2 * start.0 as i128 - p, 2 * p).clamp(0, n);
        let hi = ceil_div(2 * end.0 as i128 - p, 2 * p).clamp(0, n);
        if hi <= lo {
            return 0..0;
        }
        lo as usize..hi as usize
    }
}

fn ceil_div(a: i128, b: i128) -> i128 {
    let q = a.div_euclid(b);
    if a.rem_euclid(b) == 0 {
        q
    } else {
        q + 1
    }
}

/// Normalized frame position of a visible person's box center.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoxCenter {
    pub x: f64,
    pub y: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VisibilityInterval {
    pub person_id: SpeakerId,
    pub start: TimeMs,
    pub end: TimeMs,
    pub center: Option<BoxCenter>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureBundle {
    pub media_ref: String,
    pub duration: TimeMs,
    pub words: Vec<Word>,
    pub sentences: Vec<Sentence>,
    pub speakers: Vec<Speaker>,
    pub envelope: AmplitudeEnvelope,
    pub visibility: Vec<VisibilityInterval>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ModelError {
    #[error("unknown sentence id {0}")]
    UnknownSentence(SentenceId),
}

impl FeatureBundle {
    pub fn sentence(&self, id: SentenceId) -> Result<&Sentence, ModelError> {
        self.sentences.get(id).ok_or(ModelError::UnknownSentence(id))
    }

    pub fn sentence_words(&self, id: SentenceId) -> Result<&[Word], ModelError> {
        let s = self.sentence(id)?;
        Ok(&self.words[s.first_word..=s.last_word])
    }

    /// Word-edge interval of a sentence: first word start to last word end.
    pub fn sentence_interval(&self, id: SentenceId) -> Result<(TimeMs, TimeMs), ModelError> {
        let s = self.sentence(id)?;
        Ok((self.words[s.first_word].start, self.words[s.last_word].end))
    }

    pub fn speaker(&self, id: &SpeakerId) -> Option<&Speaker> {
        self.speakers.iter().find(|s| &s.id == id)
    }

    pub fn sentence_role(&self, id: SentenceId) -> Result<Role, ModelError> {
        let s = self.sentence(id)?;
        // speaker references are validated at parse time
        Ok(self.speaker(&s.speaker_id).map(|sp| sp.role).unwrap_or(Role::Guest))
    }

    /// Index of the sentence whose word interval contains `ts` (half-open).
    pub fn sentence_at(&self, ts: TimeMs) -> Option<SentenceId> {
        let idx = self
            .sentences
            .partition_point(|s| self.words[s.first_word].start <= ts);
        if idx == 0 {
            return None;
        }
        let id = idx - 1;
        let (start, end) = self.sentence_interval(id).ok()?;
        (start <= ts && ts < end).then_some(id)
    }
}

/// Duration of one sentence, measured word edge to word edge.
pub fn sentence_duration(bundle: &FeatureBundle, id: SentenceId) -> Result<u64, ModelError> {
    let (start, end) = bundle.sentence_interval(id)?;
    Ok(end.saturating_sub(start))
}

/// Summed duration of the given sentences, optionally minus their filler words.
///
/// Order and contiguity of `ids` do not matter; silence between sentences is
/// never counted.
pub fn range_duration(
    bundle: &FeatureBundle,
    ids: &[SentenceId],
    exclude_fillers: bool,
) -> Result<u64, ModelError> {
    let mut total = 0u64;
    for &id in ids {
        total += sentence_duration(bundle, id)?;
        if exclude_fillers {
            let fillers: u64 = bundle
                .sentence_words(id)?
                .iter()
                .filter(|w| w.is_filler)
                .map(Word::duration_ms)
                .sum();
            total -= fillers;
        }
    }
    Ok(total)
}
