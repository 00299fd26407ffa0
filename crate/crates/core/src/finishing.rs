//! Finish-step planning: timeline mapping, captions, reframing and logo placement.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::model::{FeatureBundle, TimeMs};
use crate::refine::CutList;

pub const STANDARD_WORDS_PER_CUE: usize = 5;
pub const RAPID_WORDS_PER_CUE: usize = 2;
/// Width over height of the episode footage when nothing else is known.
pub const DEFAULT_SOURCE_ASPECT: f64 = 16.0 / 9.0;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum FinishError {
    #[error("source time {0} is not inside any cut-list segment")]
    NotInCutlist(TimeMs),
    #[error("teaser time {0}ms is past the end of the cut list")]
    PastEnd(u64),
    #[error("{target} is wider than the source footage")]
    UnsupportedAspect { target: Aspect },
}

/// Maps a source time inside some segment onto the teaser timeline.
pub fn timeline_remap(cutlist: &CutList, source_ts: TimeMs) -> Result<u64, FinishError> {
    let mut offset = 0;
    for seg in &cutlist.segments {
        if seg.source_in <= source_ts && source_ts < seg.source_out {
            return Ok(offset + (source_ts.0 - seg.source_in.0));
        }
        offset += seg.duration_ms();
    }
    Err(FinishError::NotInCutlist(source_ts))
}

/// Inverse of [`timeline_remap`].
pub fn source_time(cutlist: &CutList, teaser_ts: u64) -> Result<TimeMs, FinishError> {
    let mut offset = 0;
    for seg in &cutlist.segments {
        let len = seg.duration_ms();
        if teaser_ts < offset + len {
            return Ok(TimeMs(seg.source_in.0 + (teaser_ts - offset)));
        }
        offset += len;
    }
    Err(FinishError::PastEnd(teaser_ts))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum CaptionStyle {
    #[default]
    Standard,
    Rapid,
}

impl CaptionStyle {
    pub fn words_per_cue(self) -> usize {
        match self {
            CaptionStyle::Standard => STANDARD_WORDS_PER_CUE,
            CaptionStyle::Rapid => RAPID_WORDS_PER_CUE,
        }
    }
}

impl std::str::FromStr for CaptionStyle {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "standard" => Ok(CaptionStyle::Standard),
            "rapid" => Ok(CaptionStyle::Rapid),
            other => Err(format!("unknown caption style '{other}'")),
        }
    }
}

/// Caption cue on the teaser timeline, `[start_ms, end_ms]`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Cue {
    pub start_ms: u64,
    pub end_ms: u64,
    pub text: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CaptionTrack {
    pub style: CaptionStyle,
    pub cues: Vec<Cue>,
}

/// Chunks each segment's words into fixed-size cues.
///
/// Chunks never span two segments. Filler words are skipped when the cut list
/// was built with fillers removed.
pub fn generate_captions(bundle: &FeatureBundle, cutlist: &CutList, style: CaptionStyle) -> CaptionTrack {
    let mut cues = Vec::new();
    let mut offset = 0;
    for seg in &cutlist.segments {
        let len = seg.duration_ms();
        let local = |t: TimeMs| offset + t.saturating_sub(seg.source_in).min(len);
        let words: Vec<_> = bundle.words[seg.word_start..seg.word_end]
            .iter()
            .filter(|w| !(cutlist.fillers_removed && w.is_filler))
            .collect();
        for chunk in words.chunks(style.words_per_cue()) {
            cues.push(Cue {
                start_ms: local(chunk[0].start),
                end_ms: local(chunk[chunk.len() - 1].end),
                text: chunk.iter().map(|w| w.text.as_str()).collect::<Vec<_>>().join(" "),
            });
        }
        offset += len;
    }
    CaptionTrack { style, cues }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Aspect {
    #[default]
    Vertical,
    Square,
    Horizontal,
}

impl Aspect {
    /// Width over height.
    pub fn ratio(self) -> f64 {
        match self {
            Aspect::Vertical => 9.0 / 16.0,
            Aspect::Square => 1.0,
            Aspect::Horizontal => 16.0 / 9.0,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Aspect::Vertical => "9:16",
            Aspect::Square => "1:1",
            Aspect::Horizontal => "16:9",
        }
    }
}

impl fmt::Display for Aspect {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl std::str::FromStr for Aspect {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "vertical" | "9:16" => Ok(Aspect::Vertical),
            "square" | "1:1" => Ok(Aspect::Square),
            "horizontal" | "16:9" => Ok(Aspect::Horizontal),
            other => Err(format!("unknown aspect '{other}'")),
        }
    }
}

/// Crop window in normalized source-frame coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Keyframe {
    pub timeline_ms: u64,
    pub center_x: f64,
    pub center_y: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReframePlan {
    pub aspect: Aspect,
    pub crop_width: f64,
    pub crop_height: f64,
    pub keyframes: Vec<Keyframe>,
}

pub fn plan_reframe(bundle: &FeatureBundle, cutlist: &CutList, aspect: Aspect) -> Result<ReframePlan, FinishError> {
    plan_reframe_from(bundle, cutlist, aspect, DEFAULT_SOURCE_ASPECT)
}

/// One keyframe per segment, centered on the speaker's box when known.
pub fn plan_reframe_from(
    bundle: &FeatureBundle,
    cutlist: &CutList,
    aspect: Aspect,
    source_aspect: f64,
) -> Result<ReframePlan, FinishError> {
    let crop_width = aspect.ratio() / source_aspect;
    if crop_width > 1.0 + 1e-9 {
        return Err(FinishError::UnsupportedAspect { target: aspect });
    }
    let crop_width = crop_width.min(1.0);
    let half = crop_width / 2.0;

    let keyframes = cutlist
        .segments
        .iter()
        .zip(cutlist.timeline_starts())
        .map(|(seg, timeline_ms)| {
            let (mut weight, mut sum_x) = (0u64, 0.0);
            for v in bundle.visibility.iter().filter(|v| v.person_id == seg.speaker_id) {
                let Some(c) = v.center else { continue };
                let overlap = seg.source_out.min(v.end).0.saturating_sub(seg.source_in.max(v.start).0);
                weight += overlap;
                sum_x += c.x * overlap as f64;
            }
            let x = if weight > 0 { sum_x / weight as f64 } else { 0.5 };
            Keyframe {
                timeline_ms,
                center_x: x.clamp(half, 1.0 - half),
                // crops keep the full frame height
                center_y: 0.5,
            }
        })
        .collect();

    Ok(ReframePlan {
        aspect,
        crop_width,
        crop_height: 1.0,
        keyframes,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Corner {
    TopLeft,
    #[default]
    TopRight,
    BottomLeft,
    BottomRight,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LogoSpan {
    /// Watermark for the whole teaser.
    #[default]
    Full,
    /// Card over the last `duration_ms` of the teaser.
    TrailingCard { duration_ms: u64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogoOverlay {
    pub image_ref: String,
    #[serde(default)]
    pub corner: Corner,
    /// Fraction of the output frame height.
    #[serde(default = "default_margin")]
    pub margin: f64,
    #[serde(default)]
    pub span: LogoSpan,
}

fn default_margin() -> f64 {
    0.03
}

impl LogoOverlay {
    pub fn watermark(image_ref: impl Into<String>) -> Self {
        LogoOverlay {
            image_ref: image_ref.into(),
            corner: Corner::default(),
            margin: default_margin(),
            span: LogoSpan::Full,
        }
    }

    /// Teaser-timeline interval the logo is shown for.
    pub fn interval(&self, teaser_ms: u64) -> (u64, u64) {
        match self.span {
            LogoSpan::Full => (0, teaser_ms),
            LogoSpan::TrailingCard { duration_ms } => (teaser_ms - duration_ms.min(teaser_ms), teaser_ms),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FinishSettings {
    #[serde(default)]
    pub aspect: Aspect,
    /// `None` turns captions off.
    #[serde(default = "default_captions")]
    pub caption_style: Option<CaptionStyle>,
    #[serde(default)]
    pub logo: Option<LogoOverlay>,
}

fn default_captions() -> Option<CaptionStyle> {
    Some(CaptionStyle::Standard)
}

impl Default for FinishSettings {
    fn default() -> Self {
        FinishSettings {
            aspect: Aspect::default(),
            caption_style: default_captions(),
            logo: None,
        }
    }
}
