use std::fmt;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MusicStyle {
    Inspirational,
    Emotional,
    Uplifting,
    LightHearted,
}

impl MusicStyle {
    pub const ALL: [MusicStyle; 4] = [
        MusicStyle::Inspirational,
        MusicStyle::Emotional,
        MusicStyle::Uplifting,
        MusicStyle::LightHearted,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            MusicStyle::Inspirational => "inspirational",
            MusicStyle::Emotional => "emotional",
            MusicStyle::Uplifting => "uplifting",
            MusicStyle::LightHearted => "light_hearted",
        }
    }
}

impl fmt::Display for MusicStyle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for MusicStyle {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let norm = s.trim().to_ascii_lowercase().replace('-', "_");
        MusicStyle::ALL
            .into_iter()
            .find(|m| m.as_str() == norm)
            .ok_or_else(|| format!("unknown music style '{s}'"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SegmentKind {
    Regular,
    Peak,
}

/// Labeled span of the source audio file.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MusicSegment {
    pub kind: SegmentKind,
    pub start_ms: u64,
    pub end_ms: u64,
}

impl MusicSegment {
    pub fn len(&self) -> u64 {
        self.end_ms - self.start_ms
    }

    pub fn is_empty(&self) -> bool {
        self.end_ms == self.start_ms
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MusicTrackMeta {
    pub track_id: String,
    pub style: MusicStyle,
    pub audio_ref: String,
    pub segments: Vec<MusicSegment>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum MusicError {
    #[error("track {0} has no regular segments")]
    EmptyTrack(String),
    #[error("track {track}: {message}")]
    InvalidTrack { track: String, message: String },
    #[error("teaser duration must be positive")]
    ZeroDuration,
    #[error("emphasis at {at}ms lies outside the {duration}ms teaser")]
    EmphasisOutOfRange { at: u64, duration: u64 },
    #[error("music manifest: {0}")]
    Manifest(String),
}

impl MusicTrackMeta {
    pub fn validate(&self) -> Result<(), MusicError> {
        let invalid = |message: &str| MusicError::InvalidTrack {
            track: self.track_id.clone(),
            message: message.to_string(),
        };
        let peaks = self.segments.iter().filter(|s| s.kind == SegmentKind::Peak).count();
        if peaks != 1 {
            return Err(invalid(&format!("expected exactly one peak segment, found {peaks}")));
        }
        if self.segments.iter().any(|s| s.end_ms <= s.start_ms) {
            return Err(invalid("segment with non-positive length"));
        }
        let mut spans: Vec<_> = self.segments.iter().map(|s| (s.start_ms, s.end_ms)).collect();
        spans.sort_unstable();
        if spans.windows(2).any(|w| w[1].0 < w[0].1) {
            return Err(invalid("segments overlap"));
        }
        if !self.segments.iter().any(|s| s.kind == SegmentKind::Regular) {
            return Err(MusicError::EmptyTrack(self.track_id.clone()));
        }
        Ok(())
    }

    pub fn peak(&self) -> Option<&MusicSegment> {
        self.segments.iter().find(|s| s.kind == SegmentKind::Peak)
    }
}

/// One piece of source audio placed on the teaser timeline.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Placement {
    pub kind: SegmentKind,
    pub source_start_ms: u64,
    pub source_end_ms: u64,
    pub timeline_start_ms: u64,
}

impl Placement {
    pub fn len(&self) -> u64 {
        self.source_end_ms - self.source_start_ms
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn timeline_end_ms(&self) -> u64 {
        self.timeline_start_ms + self.len()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MusicPlan {
    pub track_id: String,
    pub style: MusicStyle,
    pub audio_ref: String,
    pub placements: Vec<Placement>,
    pub peak_timeline_start_ms: u64,
}

/// Cycles through the regular segments, trimming the last piece at `until`.
struct Tiler<'a> {
    regular: Vec<&'a MusicSegment>,
    next: usize,
}

impl Tiler<'_> {
    fn fill(&mut self, mut from: u64, until: u64, out: &mut Vec<Placement>) {
        while from < until {
            let seg = self.regular[self.next % self.regular.len()];
            self.next += 1;
            let len = seg.len().min(until - from);
            out.push(Placement {
                kind: SegmentKind::Regular,
                source_start_ms: seg.start_ms,
                source_end_ms: seg.start_ms + len,
                timeline_start_ms: from,
            });
            from += len;
        }
    }
}

/// Lays the track under a teaser of `duration_ms`, landing the peak on `emphasis_ms`.
///
/// The peak is moved earlier when it would run past the end, and trimmed when
/// it is longer than the whole teaser.
pub fn lay_music(track: &MusicTrackMeta, duration_ms: u64, emphasis_ms: u64) -> Result<MusicPlan, MusicError> {
    track.validate()?;
    if duration_ms == 0 {
        return Err(MusicError::ZeroDuration);
    }
    if emphasis_ms >= duration_ms {
        return Err(MusicError::EmphasisOutOfRange {
            at: emphasis_ms,
            duration: duration_ms,
        });
    }
    let peak = track.peak().expect("validated track has a peak");
    let peak_len = peak.len().min(duration_ms);
    let onset = emphasis_ms.min(duration_ms - peak_len);

    let mut tiler = Tiler {
        regular: track.segments.iter().filter(|s| s.kind == SegmentKind::Regular).collect(),
        next: 0,
    };
    let mut placements = Vec::new();
    tiler.fill(0, onset, &mut placements);
    placements.push(Placement {
        kind: SegmentKind::Peak,
        source_start_ms: peak.start_ms,
        source_end_ms: peak.start_ms + peak_len,
        timeline_start_ms: onset,
    });
    tiler.fill(onset + peak_len, duration_ms, &mut placements);

    Ok(MusicPlan {
        track_id: track.track_id.clone(),
        style: track.style,
        audio_ref: track.audio_ref.clone(),
        placements,
        peak_timeline_start_ms: onset,
    })
}

pub fn parse_manifest(bytes: &[u8]) -> Result<Vec<MusicTrackMeta>, MusicError> {
    let tracks: Vec<MusicTrackMeta> = serde_json::from_slice(bytes).map_err(|e| MusicError::Manifest(e.to_string()))?;
    for t in &tracks {
        t.validate()?;
    }
    Ok(tracks)
}

const BUNDLED_MANIFEST: &str = include_str!("../../assets/music_manifest.json");

/// The bundled library: one track per style.
pub fn default_library() -> Vec<MusicTrackMeta> {
    parse_manifest(BUNDLED_MANIFEST.as_bytes()).expect("bundled manifest is valid")
}
