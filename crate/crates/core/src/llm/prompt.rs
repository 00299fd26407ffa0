//! Prompt templates.
//!
//! The wording is fixed; only the italicized slots (transcript lines, picked
//! length, speakers, style, keywords, clip text) are substituted.

use serde::{Deserialize, Serialize};

use crate::model::{sentence_duration, FeatureBundle, Role, SentenceId, SpeakerId};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TemplateKind {
    Keywords,
    Extract,
    Tagline,
    Emphasis,
}

pub(crate) const KEYWORDS_HEAD: &str = "Provide six main topic keywords for the following transcript.";
pub(crate) const EXTRACT_HEAD: &str = "This is the transcript of a podcast episode.";
pub(crate) const TAGLINE_HEAD: &str = "Come up with a catchy and short tagline for each of the clips.";
pub(crate) const EMPHASIS_HEAD: &str = "This is the transcript of a podcast clip.";

/// Identifies which template produced a rendered prompt.
pub fn classify(prompt: &str) -> Option<TemplateKind> {
    if prompt.starts_with(KEYWORDS_HEAD) {
        Some(TemplateKind::Keywords)
    } else if prompt.starts_with(EXTRACT_HEAD) {
        Some(TemplateKind::Extract)
    } else if prompt.starts_with(TAGLINE_HEAD) {
        Some(TemplateKind::Tagline)
    } else if prompt.starts_with(EMPHASIS_HEAD) {
        Some(TemplateKind::Emphasis)
    } else {
        None
    }
}

/// Seconds with one decimal, rounded half up.
pub fn format_seconds(ms: u64) -> String {
    let tenths = (ms + 50) / 100;
    format!("{}.{}", tenths / 10, tenths % 10)
}

pub fn keywords_prompt(bundle: &FeatureBundle) -> String {
    let mut out = format!("{KEYWORDS_HEAD}\nTranscript:\n");
    for s in &bundle.sentences {
        out.push_str(&format!("{}: {}\n", s.id, s.text));
    }
    out
}

/// Slot values for the clip extraction template.
#[derive(Debug, Clone, PartialEq)]
pub struct ExtractSlots {
    pub length_secs: u32,
    pub speakers: Vec<(SpeakerId, Role)>,
    pub style: String,
    pub keywords: Vec<String>,
}

pub fn extract_prompt(bundle: &FeatureBundle, slots: &ExtractSlots) -> String {
    let mut out = format!("{EXTRACT_HEAD}\nTranscript:\n");
    for s in &bundle.sentences {
        let dur = sentence_duration(bundle, s.id).unwrap_or(0);
        out.push_str(&format!(
            "{} [{}]: ({}) {}\n",
            s.id,
            format_seconds(dur),
            s.speaker_id,
            s.text
        ));
    }
    let speakers = slots
        .speakers
        .iter()
        .map(|(id, role)| format!("{id} ({role})"))
        .collect::<Vec<_>>()
        .join(", ");
    out.push_str(&format!(
        "Select consecutive sentences to create a clip that must be around {} seconds long.\n",
        slots.length_secs
    ));
    out.push_str(&format!(
        "The clip should only include the following speakers: {speakers}.\n"
    ));
    out.push_str(&format!("The clip should be {}.\n", slots.style));
    if !slots.keywords.is_empty() {
        out.push_str(&format!(
            "The clip should contain the keywords of {}.\n",
            slots.keywords.join(", ")
        ));
    }
    out.push_str(
        "The transcript is given as a list of sentences with ID and duration in seconds. \
         Only return the sentence IDs to form the clip. Do not include full sentences in your reply. \
         Must return three distinct and non-over-lapping options of such clips. \
         Use the following format: [a, b, c], [m, n, q], [x, y, z].",
    );
    out
}

pub fn tagline_prompt(clip_text: &str) -> String {
    let content = clip_text.trim().trim_end_matches(['.', ' ']);
    format!("{TAGLINE_HEAD} Clip 1: {content}. The tagline should be less than ten words.")
}

pub fn emphasis_prompt(bundle: &FeatureBundle, ids: &[SentenceId]) -> String {
    let mut out = format!("{EMPHASIS_HEAD}\nTranscript:\n");
    for &id in ids {
        if let Ok(s) = bundle.sentence(id) {
            out.push_str(&format!("{}: {}\n", s.id, s.text));
        }
    }
    out.push_str(
        "Select one single sentence as the emphasis point in the clip.\n\
         The transcript is given as a list of sentences with IDs. \
         Only return one sentence ID you think should be emphasized. \
         Must not include full sentences in your reply.",
    );
    out
}
