//! JSON bundle file format.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use super::{
    AmplitudeEnvelope, BoxCenter, FeatureBundle, Role, Sentence, Speaker, SpeakerId, TimeMs,
    VisibilityInterval, Word,
};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum BundleError {
    #[error("schema error at line {line}, column {column}: {message}")]
    Schema {
        message: String,
        line: usize,
        column: usize,
    },
    #[error("integrity error at {field}: {message}")]
    Integrity { field: String, message: String },
}

fn integrity(field: impl Into<String>, message: impl Into<String>) -> BundleError {
    BundleError::Integrity {
        field: field.into(),
        message: message.into(),
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct RawBundle {
    media_ref: String,
    duration_ms: u64,
    speakers: Vec<RawSpeaker>,
    words: Vec<RawWord>,
    sentences: Vec<RawSentence>,
    amplitude: RawAmplitude,
    #[serde(default)]
    visibility: Vec<RawVisibility>,
}

#[derive(Debug, Serialize, Deserialize)]
struct RawSpeaker {
    id: String,
    name: String,
    role: Role,
}

#[derive(Debug, Serialize, Deserialize)]
struct RawWord {
    text: String,
    start_ms: u64,
    end_ms: u64,
    #[serde(default)]
    filler: bool,
}

#[derive(Debug, Serialize, Deserialize)]
struct RawSentence {
    id: usize,
    first_word: usize,
    last_word: usize,
    speaker_id: String,
}

#[derive(Debug, Serialize, Deserialize)]
struct RawAmplitude {
    frame_period_ms: u64,
    samples: Vec<f64>,
}

#[derive(Debug, Serialize, Deserialize)]
struct RawVisibility {
    person_id: String,
    start_ms: u64,
    end_ms: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    cx: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    cy: Option<f64>,
}

/// Parses and validates a bundle document.
pub fn parse_feature_bundle(document: &[u8]) -> Result<FeatureBundle, BundleError> {
    let raw: RawBundle = serde_json::from_slice(document).map_err(|e| BundleError::Schema {
        message: e.to_string(),
        line: e.line(),
        column: e.column(),
    })?;
    validate(raw)
}

/// Writes a bundle back into the file format. `parse(serialize(b)) == b`.
pub fn serialize_feature_bundle(bundle: &FeatureBundle) -> Vec<u8> {
    let raw = RawBundle {
        media_ref: bundle.media_ref.clone(),
        duration_ms: bundle.duration.0,
        speakers: bundle
            .speakers
            .iter()
            .map(|s| RawSpeaker {
                id: s.id.0.clone(),
                name: s.display_name.clone(),
                role: s.role,
            })
            .collect(),
        words: bundle
            .words
            .iter()
            .map(|w| RawWord {
                text: w.text.clone(),
                start_ms: w.start.0,
                end_ms: w.end.0,
                filler: w.is_filler,
            })
            .collect(),
        sentences: bundle
            .sentences
            .iter()
            .map(|s| RawSentence {
                id: s.id,
                first_word: s.first_word,
                last_word: s.last_word,
                speaker_id: s.speaker_id.0.clone(),
            })
            .collect(),
        amplitude: RawAmplitude {
            frame_period_ms: bundle.envelope.frame_period_ms,
            samples: bundle.envelope.samples.clone(),
        },
        visibility: bundle
            .visibility
            .iter()
            .map(|v| RawVisibility {
                person_id: v.person_id.0.clone(),
                start_ms: v.start.0,
                end_ms: v.end.0,
                cx: v.center.map(|c| c.x),
                cy: v.center.map(|c| c.y),
            })
            .collect(),
    };
    serde_json::to_vec(&raw).expect("bundle serialization is infallible")
}

fn validate(raw: RawBundle) -> Result<FeatureBundle, BundleError> {
    let duration = TimeMs(raw.duration_ms);

    if raw.speakers.is_empty() {
        return Err(integrity("speakers", "at least one speaker is required"));
    }
    let mut seen = HashSet::new();
    for (i, s) in raw.speakers.iter().enumerate() {
        if s.id.is_empty() {
            return Err(integrity(format!("speakers[{i}].id"), "empty speaker id"));
        }
        if !seen.insert(s.id.as_str()) {
            return Err(integrity(
                format!("speakers[{i}].id"),
                format!("duplicate speaker id {:?}", s.id),
            ));
        }
    }

    let mut prev_end = 0u64;
    for (i, w) in raw.words.iter().enumerate() {
        if w.text.trim().is_empty() {
            return Err(integrity(format!("words[{i}].text"), "empty word text"));
        }
        if w.start_ms > w.end_ms {
            return Err(integrity(
                format!("words[{i}]"),
                format!("start {} after end {}", w.start_ms, w.end_ms),
            ));
        }
        if w.end_ms > raw.duration_ms {
            return Err(integrity(
                format!("words[{i}].end_ms"),
                format!("{} exceeds episode duration {}", w.end_ms, raw.duration_ms),
            ));
        }
        if w.start_ms < prev_end {
            return Err(integrity(
                format!("words[{i}].start_ms"),
                format!("{} overlaps previous word ending at {}", w.start_ms, prev_end),
            ));
        }
        prev_end = w.end_ms;
    }

    if raw.sentences.is_empty() {
        return Err(integrity("sentences", "at least one sentence is required"));
    }
    let mut next_free_word = 0usize;
    for (i, s) in raw.sentences.iter().enumerate() {
        let field = format!("sentences[{i}]");
        if s.id != i {
            return Err(integrity(
                format!("{field}.id"),
                format!("expected id {i}, found {}", s.id),
            ));
        }
        if s.first_word > s.last_word {
            return Err(integrity(&field, "first_word after last_word"));
        }
        if s.last_word >= raw.words.len() {
            return Err(integrity(
                format!("{field}.last_word"),
                format!("word index {} out of range", s.last_word),
            ));
        }
        if s.first_word < next_free_word {
            return Err(integrity(
                format!("{field}.first_word"),
                "span overlaps or precedes the previous sentence",
            ));
        }
        if !seen.contains(s.speaker_id.as_str()) {
            return Err(integrity(
                format!("{field}.speaker_id"),
                format!("unknown speaker {:?}", s.speaker_id),
            ));
        }
        next_free_word = s.last_word + 1;
    }

    let env = &raw.amplitude;
    if env.frame_period_ms == 0 {
        return Err(integrity("amplitude.frame_period_ms", "must be positive"));
    }
    for (i, &x) in env.samples.iter().enumerate() {
        if !(0.0..=1.0).contains(&x) {
            return Err(integrity(
                format!("amplitude.samples[{i}]"),
                format!("{x} outside [0, 1]"),
            ));
        }
    }

    for (i, v) in raw.visibility.iter().enumerate() {
        let field = format!("visibility[{i}]");
        if v.start_ms >= v.end_ms {
            return Err(integrity(&field, "empty or inverted interval"));
        }
        if v.end_ms > raw.duration_ms {
            return Err(integrity(format!("{field}.end_ms"), "exceeds episode duration"));
        }
        if !seen.contains(v.person_id.as_str()) {
            return Err(integrity(
                format!("{field}.person_id"),
                format!("unknown person {:?}", v.person_id),
            ));
        }
        for (name, c) in [("cx", v.cx), ("cy", v.cy)] {
            if let Some(c) = c {
                if !(0.0..=1.0).contains(&c) {
                    return Err(integrity(format!("{field}.{name}"), "outside [0, 1]"));
                }
            }
        }
        if v.cx.is_some() != v.cy.is_some() {
            return Err(integrity(&field, "cx and cy must be given together"));
        }
    }

    let words: Vec<Word> = raw
        .words
        .into_iter()
        .map(|w| Word {
            text: w.text,
            start: TimeMs(w.start_ms),
            end: TimeMs(w.end_ms),
            is_filler: w.filler,
        })
        .collect();

    let sentences = raw
        .sentences
        .into_iter()
        .map(|s| {
            let text = words[s.first_word..=s.last_word]
                .iter()
                .map(|w| w.text.as_str())
                .collect::<Vec<_>>()
                .join(" ");
            Sentence {
                id: s.id,
                first_word: s.first_word,
                last_word: s.last_word,
                speaker_id: SpeakerId(s.speaker_id),
                text,
            }
        })
        .collect();

    Ok(FeatureBundle {
        media_ref: raw.media_ref,
        duration,
        words,
        sentences,
        speakers: raw
            .speakers
            .into_iter()
            .map(|s| Speaker {
                id: SpeakerId(s.id),
                display_name: s.name,
                role: s.role,
            })
            .collect(),
        envelope: AmplitudeEnvelope {
            frame_period_ms: raw.amplitude.frame_period_ms,
            samples: raw.amplitude.samples,
        },
        visibility: raw
            .visibility
            .into_iter()
            .map(|v| VisibilityInterval {
                person_id: SpeakerId(v.person_id),
                start: TimeMs(v.start_ms),
                end: TimeMs(v.end_ms),
                center: v.cx.zip(v.cy).map(|(x, y)| BoxCenter { x, y }),
            })
            .collect(),
    })
}
