//! Candidate overview cards: tagline, duration, speakers, liveliness, keywords.

use serde::{Deserialize, Serialize};

use crate::extraction::Moment;
use crate::llm::{self, prompt, CompletionBackend};
use crate::model::{range_duration, AmplitudeEnvelope, FeatureBundle, Role, SpeakerId, TimeMs};
use crate::text;

/// Number of transcript words shown before the "..." expander.
pub const PREVIEW_WORDS: usize = 30;
/// Words kept from the moment text when the tagline has to be made locally.
const FALLBACK_TAGLINE_WORDS: usize = 8;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ReviewError {
    #[error("interval [{start}, {end}) is empty or inverted")]
    InvalidInterval { start: TimeMs, end: TimeMs },
    #[error("no envelope frames fall in [{start}, {end})")]
    EmptyInterval { start: TimeMs, end: TimeMs },
}

/// Mean amplitude of the frames whose midpoint falls in `[start, end)`.
pub fn liveliness(envelope: &AmplitudeEnvelope, start: TimeMs, end: TimeMs) -> Result<f64, ReviewError> {
    if start >= end {
        return Err(ReviewError::InvalidInterval { start, end });
    }
    let (sum, count) = envelope.frame_stats(start, end);
    if count == 0 {
        return Err(ReviewError::EmptyInterval { start, end });
    }
    Ok((sum / count as f64).clamp(0.0, 1.0))
}

/// Query keywords occurring in the moment as whole, case-insensitive words.
pub fn keyword_containment(bundle: &FeatureBundle, moment: &Moment, keywords: &[String]) -> Vec<String> {
    let tokens = text::tokens(&moment_text(bundle, moment));
    keywords
        .iter()
        .filter(|k| text::contains_phrase(&tokens, &text::tokens(k)))
        .cloned()
        .collect()
}

pub fn moment_text(bundle: &FeatureBundle, moment: &Moment) -> String {
    let r = moment.sentence_range;
    bundle.sentences[r.first..=r.last]
        .iter()
        .map(|s| s.text.as_str())
        .collect::<Vec<_>>()
        .join(" ")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeaturedSpeaker {
    pub id: SpeakerId,
    pub name: String,
    pub role: Role,
    /// `None` when the speaker's sentences cover no envelope frame.
    pub liveliness: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TaglineSource {
    Model,
    /// Built from the moment's opening words.
    Local,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentOverview {
    pub moment: Moment,
    pub tagline: String,
    pub tagline_source: TaglineSource,
    /// Set when the model was asked but failed.
    pub tagline_degraded: bool,
    pub duration_ms: u64,
    pub speakers: Vec<FeaturedSpeaker>,
    pub liveliness: Option<f64>,
    pub keywords_contained: Vec<String>,
    pub preview: String,
    pub full_text: String,
}

/// Builds the overview card for one candidate. Only the tagline may involve
/// the model; everything else is computed locally.
pub fn build_overview(
    bundle: &FeatureBundle,
    moment: &Moment,
    keywords: &[String],
    backend: Option<&dyn CompletionBackend>,
) -> MomentOverview {
    let full_text = moment_text(bundle, moment);
    let ids = moment.sentence_range.ids();

    let (tagline, tagline_source, tagline_degraded) = match backend {
        None => (local_tagline(&full_text), TaglineSource::Local, false),
        Some(b) => {
            let p = prompt::tagline_prompt(&full_text);
            match llm::complete_parsed(b, &p, llm::parse_tagline) {
                Ok(t) => (t.text, TaglineSource::Model, false),
                Err(e) => {
                    tracing::warn!(error = %e, "tagline generation failed, using transcript opening");
                    (local_tagline(&full_text), TaglineSource::Local, true)
                }
            }
        }
    };

    // per-speaker frame sums over that speaker's sentence intervals
    let mut per_speaker: Vec<(SpeakerId, f64, usize)> = Vec::new();
    for &id in &ids {
        let s = &bundle.sentences[id];
        let (start, end) = (bundle.words[s.first_word].start, bundle.words[s.last_word].end);
        let (sum, count) = bundle.envelope.frame_stats(start, end);
        match per_speaker.iter_mut().find(|(sid, _, _)| *sid == s.speaker_id) {
            Some(entry) => {
                entry.1 += sum;
                entry.2 += count;
            }
            None => per_speaker.push((s.speaker_id.clone(), sum, count)),
        }
    }
    let (total_sum, total_count) = per_speaker
        .iter()
        .fold((0.0, 0usize), |(s, c), (_, ps, pc)| (s + ps, c + pc));
    let mean = |sum: f64, count: usize| (count > 0).then(|| (sum / count as f64).clamp(0.0, 1.0));

    let speakers = per_speaker
        .iter()
        .map(|(id, sum, count)| {
            let sp = bundle.speaker(id);
            FeaturedSpeaker {
                id: id.clone(),
                name: sp.map(|s| s.display_name.clone()).unwrap_or_default(),
                role: sp.map(|s| s.role).unwrap_or(Role::Guest),
                liveliness: mean(*sum, *count),
            }
        })
        .collect();

    let words: Vec<&str> = full_text.split_whitespace().collect();
    let preview = if words.len() > PREVIEW_WORDS {
        format!("{}...", words[..PREVIEW_WORDS].join(" "))
    } else {
        words.join(" ")
    };

    MomentOverview {
        moment: moment.clone(),
        tagline,
        tagline_source,
        tagline_degraded,
        duration_ms: range_duration(bundle, &ids, false).unwrap_or(0),
        speakers,
        liveliness: mean(total_sum, total_count),
        keywords_contained: keyword_containment(bundle, moment, keywords),
        preview,
        full_text,
    }
}

fn local_tagline(text: &str) -> String {
    let words: Vec<&str> = text.split_whitespace().take(FALLBACK_TAGLINE_WORDS).collect();
    format!("{}…", words.join(" "))
}
