//! Edit decision list, caption files and renderer command plans.

mod render;
mod subtitles;

use serde::{Deserialize, Serialize};

use crate::finishing::{Aspect, CaptionStyle, CaptionTrack, Corner, Cue, Keyframe, LogoOverlay, ReframePlan};
use crate::model::{SentenceId, SpeakerId, TimeMs};
use crate::production::{Effect, MusicPlan, MusicStyle, Placement};
use crate::refine::CutList;

pub use render::{emit_render_script, RenderError, RenderPlan, RenderProfile, RenderStep};
pub use subtitles::{export_captions, SubtitleFormat};

pub const EDL_VERSION: u32 = 1;
/// Music level relative to speech; advisory for the renderer.
pub const MUSIC_GAIN_DB: f64 = -18.0;
pub const MUSIC_CROSSFADE_MS: u64 = 200;

/// Everything that goes into a finished teaser.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Teaser {
    pub media_ref: String,
    pub source_duration: TimeMs,
    pub cutlist: CutList,
    pub music: Option<MusicPlan>,
    pub captions: Option<CaptionTrack>,
    pub reframe: Option<ReframePlan>,
    pub logo: Option<LogoOverlay>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdlSegment {
    pub index: usize,
    pub sentence_id: SentenceId,
    pub speaker_id: SpeakerId,
    pub source_in_ms: u64,
    pub source_out_ms: u64,
    pub timeline_start_ms: u64,
    pub zoom: Option<f64>,
}

impl EdlSegment {
    pub fn duration_ms(&self) -> u64 {
        self.source_out_ms - self.source_in_ms
    }
}

/// Video-only cutaway; the speech underneath keeps playing.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EdlReaction {
    pub boundary: usize,
    pub person_id: SpeakerId,
    pub source_in_ms: u64,
    pub timeline_start_ms: u64,
    pub duration_ms: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdlReframe {
    pub aspect: Aspect,
    pub crop_width: f64,
    pub crop_height: f64,
    pub keyframes: Vec<Keyframe>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdlVideo {
    pub segments: Vec<EdlSegment>,
    pub reactions: Vec<EdlReaction>,
    pub reframe: Option<EdlReframe>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdlMusic {
    pub track_id: String,
    pub style: MusicStyle,
    pub audio_ref: String,
    pub gain_db: f64,
    pub gain_advisory: bool,
    pub crossfade_ms: u64,
    pub peak_timeline_start_ms: u64,
    pub placements: Vec<Placement>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EdlCaptions {
    pub style: CaptionStyle,
    pub cues: Vec<Cue>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdlLogo {
    pub image_ref: String,
    pub corner: Corner,
    pub margin: f64,
    pub timeline_start_ms: u64,
    pub timeline_end_ms: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TeaserEdl {
    pub version: u32,
    pub media_ref: String,
    pub source_duration_ms: u64,
    pub total_duration_ms: u64,
    pub fillers_removed: bool,
    pub video: EdlVideo,
    pub music: Option<EdlMusic>,
    pub captions: Option<EdlCaptions>,
    pub overlays: Vec<EdlLogo>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum EdlError {
    #[error("project has no cut list to export")]
    EmptyProject,
    #[error("segment {index} ends at {end_ms}ms, past the {duration_ms}ms source")]
    OutOfBounds { index: usize, end_ms: u64, duration_ms: u64 },
    #[error("invalid decision list: {0}")]
    Parse(String),
}

/// Rounds to a fixed grid so equal plans always print the same digits.
fn quantize(x: f64) -> f64 {
    (x * 1e6).round() / 1e6
}

pub fn build_edl(teaser: &Teaser) -> Result<TeaserEdl, EdlError> {
    let cl = &teaser.cutlist;
    if cl.is_empty() {
        return Err(EdlError::EmptyProject);
    }
    let starts = cl.timeline_starts();
    let total = cl.duration_ms();

    let mut segments = Vec::with_capacity(cl.segments.len());
    let mut reactions = Vec::new();
    for (index, (seg, &start)) in cl.segments.iter().zip(&starts).enumerate() {
        if seg.source_out > teaser.source_duration {
            return Err(EdlError::OutOfBounds {
                index,
                end_ms: seg.source_out.0,
                duration_ms: teaser.source_duration.0,
            });
        }
        let mut zoom = None;
        for effect in &seg.effects {
            match effect {
                Effect::Zoom { scale } => zoom = Some(quantize(*scale)),
                Effect::ReactionShot {
                    person_id,
                    source_in,
                    overlay_duration_ms,
                    ..
                } => {
                    // centered on the cut, kept inside the teaser
                    let d = (*overlay_duration_ms).min(total);
                    let at = start.saturating_sub(d / 2).min(total - d);
                    reactions.push(EdlReaction {
                        boundary: index.saturating_sub(1),
                        person_id: person_id.clone(),
                        source_in_ms: source_in.0,
                        timeline_start_ms: at,
                        duration_ms: d,
                    });
                }
            }
        }
        segments.push(EdlSegment {
            index,
            sentence_id: seg.sentence_id,
            speaker_id: seg.speaker_id.clone(),
            source_in_ms: seg.source_in.0,
            source_out_ms: seg.source_out.0,
            timeline_start_ms: start,
            zoom,
        });
    }

    let reframe = teaser.reframe.as_ref().map(|r| EdlReframe {
        aspect: r.aspect,
        crop_width: quantize(r.crop_width),
        crop_height: quantize(r.crop_height),
        keyframes: r
            .keyframes
            .iter()
            .map(|k| Keyframe {
                timeline_ms: k.timeline_ms,
                center_x: quantize(k.center_x),
                center_y: quantize(k.center_y),
            })
            .collect(),
    });
    let music = teaser.music.as_ref().map(|m| EdlMusic {
        track_id: m.track_id.clone(),
        style: m.style,
        audio_ref: m.audio_ref.clone(),
        gain_db: MUSIC_GAIN_DB,
        gain_advisory: true,
        crossfade_ms: MUSIC_CROSSFADE_MS,
        peak_timeline_start_ms: m.peak_timeline_start_ms,
        placements: m.placements.clone(),
    });
    let captions = teaser.captions.as_ref().map(|c| EdlCaptions {
        style: c.style,
        cues: c.cues.clone(),
    });
    let overlays = teaser
        .logo
        .iter()
        .map(|l| {
            let (a, b) = l.interval(total);
            EdlLogo {
                image_ref: l.image_ref.clone(),
                corner: l.corner,
                margin: quantize(l.margin),
                timeline_start_ms: a,
                timeline_end_ms: b,
            }
        })
        .collect();

    Ok(TeaserEdl {
        version: EDL_VERSION,
        media_ref: teaser.media_ref.clone(),
        source_duration_ms: teaser.source_duration.0,
        total_duration_ms: total,
        fillers_removed: cl.fillers_removed,
        video: EdlVideo {
            segments,
            reactions,
            reframe,
        },
        music,
        captions,
        overlays,
    })
}

/// Canonical bytes: sorted keys, two-space indent, trailing newline.
pub fn edl_to_bytes(edl: &TeaserEdl) -> Vec<u8> {
    // going through Value sorts object keys
    let value = serde_json::to_value(edl).expect("decision list serializes");
    let mut out = serde_json::to_vec_pretty(&value).expect("value serializes");
    out.push(b'\n');
    out
}

pub fn export_edl(teaser: &Teaser) -> Result<Vec<u8>, EdlError> {
    build_edl(teaser).map(|e| edl_to_bytes(&e))
}

pub fn parse_edl(bytes: &[u8]) -> Result<TeaserEdl, EdlError> {
    let edl: TeaserEdl = serde_json::from_slice(bytes).map_err(|e| EdlError::Parse(e.to_string()))?;
    if edl.version != EDL_VERSION {
        return Err(EdlError::Parse(format!("unsupported version {}", edl.version)));
    }
    Ok(edl)
}
