//! Transition planning over the cut list and music layout under the speech.

mod emphasis;
mod music;

use serde::{Deserialize, Serialize};

use crate::model::{FeatureBundle, SpeakerId, TimeMs};
use crate::refine::CutList;

pub use emphasis::{detect_emphasis, sentence_liveliness, Emphasis, EmphasisError, EmphasisSource};
pub use music::{
    default_library, lay_music, parse_manifest, MusicError, MusicPlan, MusicSegment, MusicStyle,
    MusicTrackMeta, Placement, SegmentKind,
};

pub const DEFAULT_ZOOM_SCALE: f64 = 1.15;
/// Longest stretch of a reaction shot laid over a cut.
pub const MAX_REACTION_MS: u64 = 1500;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Effect {
    /// Punch-in applied to the segment after a cut.
    Zoom { scale: f64 },
    /// Video-only cutaway to a listener; audio keeps playing underneath.
    ReactionShot {
        person_id: SpeakerId,
        source_in: TimeMs,
        source_out: TimeMs,
        overlay_duration_ms: u64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EffectKind {
    Zoom,
    ReactionShot,
}

impl Effect {
    pub fn kind(&self) -> EffectKind {
        match self {
            Effect::Zoom { .. } => EffectKind::Zoom,
            Effect::ReactionShot { .. } => EffectKind::ReactionShot,
        }
    }
}

/// Boundary between segments `boundary` and `boundary + 1` where the same
/// speaker continues from a different point in the source.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct JumpCut {
    pub boundary: usize,
    pub speaker_id: SpeakerId,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum TransitionError {
    #[error("boundary {0} is not a jump cut")]
    NotAJumpCut(usize),
    #[error("boundary {boundary} already has a {kind:?} effect")]
    EffectAlreadyPresent { boundary: usize, kind: EffectKind },
    #[error("boundary {boundary} has no {kind:?} effect")]
    EffectNotPresent { boundary: usize, kind: EffectKind },
    #[error("zoom scale must be greater than 1, got {0}")]
    InvalidScale(f64),
    #[error("no listener is visible while someone else speaks")]
    NoReactionAvailable,
}

pub fn detect_jump_cuts(cutlist: &CutList) -> Vec<JumpCut> {
    cutlist
        .segments
        .windows(2)
        .enumerate()
        .filter(|(_, w)| w[0].speaker_id == w[1].speaker_id && !w[0].continues_into(&w[1]))
        .map(|(i, w)| JumpCut {
            boundary: i,
            speaker_id: w[0].speaker_id.clone(),
        })
        .collect()
}

fn check_jump_cut(cutlist: &CutList, boundary: usize) -> Result<(), TransitionError> {
    if detect_jump_cuts(cutlist).iter().any(|j| j.boundary == boundary) {
        Ok(())
    } else {
        Err(TransitionError::NotAJumpCut(boundary))
    }
}

fn attach(mut cutlist: CutList, boundary: usize, effect: Effect) -> Result<CutList, TransitionError> {
    check_jump_cut(&cutlist, boundary)?;
    let kind = effect.kind();
    let seg = &mut cutlist.segments[boundary + 1];
    if seg.effects.iter().any(|e| e.kind() == kind) {
        return Err(TransitionError::EffectAlreadyPresent { boundary, kind });
    }
    seg.effects.push(effect);
    Ok(cutlist)
}

/// Adds a zoom to the segment following the jump cut at `boundary`.
pub fn plan_zoom(cutlist: &CutList, boundary: usize, scale: f64) -> Result<CutList, TransitionError> {
    if !(scale > 1.0 && scale.is_finite()) {
        return Err(TransitionError::InvalidScale(scale));
    }
    attach(cutlist.clone(), boundary, Effect::Zoom { scale })
}

/// Places a reaction shot over the jump cut at `boundary`.
pub fn add_reaction_shot(cutlist: &CutList, boundary: usize, shot: Effect) -> Result<CutList, TransitionError> {
    attach(cutlist.clone(), boundary, shot)
}

pub fn remove_effect(cutlist: &CutList, boundary: usize, kind: EffectKind) -> Result<CutList, TransitionError> {
    let mut out = cutlist.clone();
    let missing = TransitionError::EffectNotPresent { boundary, kind };
    let seg = out.segments.get_mut(boundary + 1).ok_or(missing.clone())?;
    let pos = seg.effects.iter().position(|e| e.kind() == kind).ok_or(missing)?;
    seg.effects.remove(pos);
    Ok(out)
}

/// A stretch where `person_id` is on screen while somebody else is talking.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReactionCandidate {
    pub person_id: SpeakerId,
    pub start: TimeMs,
    pub end: TimeMs,
}

/// All listener shots usable over a cut by `cut_speaker`.
///
/// Each visibility interval is intersected with every sentence spoken by
/// someone else; the person visible must not be the one speaking across the cut.
pub fn reaction_candidates(bundle: &FeatureBundle, cut_speaker: &SpeakerId) -> Vec<ReactionCandidate> {
    let mut out = Vec::new();
    for v in bundle.visibility.iter().filter(|v| &v.person_id != cut_speaker) {
        for s in bundle.sentences.iter().filter(|s| s.speaker_id != v.person_id) {
            let (a, b) = (bundle.words[s.first_word].start, bundle.words[s.last_word].end);
            let (start, end) = (a.max(v.start), b.min(v.end));
            if start < end {
                out.push(ReactionCandidate {
                    person_id: v.person_id.clone(),
                    start,
                    end,
                });
            }
        }
    }
    out
}

/// Picks the candidate whose midpoint is nearest `at`.
///
/// Ties go to the earlier start, then to the lower person id.
pub fn find_reaction_shot(bundle: &FeatureBundle, jump_cut: &JumpCut, at: TimeMs) -> Result<Effect, TransitionError> {
    reaction_candidates(bundle, &jump_cut.speaker_id)
        .into_iter()
        // twice the midpoint distance keeps the comparison in integers
        .min_by_key(|c| ((c.start.0 + c.end.0).abs_diff(2 * at.0), c.start, c.person_id.clone()))
        .map(|c| Effect::ReactionShot {
            overlay_duration_ms: (c.end.0 - c.start.0).min(MAX_REACTION_MS),
            person_id: c.person_id,
            source_in: c.start,
            source_out: c.end,
        })
        .ok_or(TransitionError::NoReactionAvailable)
}
