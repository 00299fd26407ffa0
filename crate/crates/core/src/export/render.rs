//! Shell command plan for a command-line media renderer (ffmpeg syntax).
//!
//! The engine never touches media itself; the plan only references data
//! already present in the decision list.

use std::fmt::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{export_captions, SubtitleFormat, TeaserEdl};
use crate::finishing::{CaptionTrack, Corner};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RenderProfile {
    /// Renderer executable; the script also honours `$FFMPEG`.
    pub program: String,
    /// Directory that relative media, music and logo references resolve against.
    pub asset_root: PathBuf,
    pub output: String,
    /// Every segment is scaled to this frame size before joining.
    pub width: u32,
    pub height: u32,
    pub burn_captions: bool,
}

impl Default for RenderProfile {
    fn default() -> Self {
        RenderProfile {
            program: "ffmpeg".into(),
            asset_root: PathBuf::from("."),
            output: "teaser.mp4".into(),
            width: 1280,
            height: 720,
            burn_captions: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum RenderError {
    #[error("{kind} asset not found: {path}")]
    MissingAsset { kind: &'static str, path: PathBuf },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "step", rename_all = "snake_case")]
pub enum RenderStep {
    Trim { segment: usize, source_in_ms: u64, source_out_ms: u64, zoom: Option<f64> },
    Concat { inputs: usize },
    Overlay { what: String, timeline_start_ms: u64, timeline_end_ms: u64 },
    Crop { crop_width: f64, keyframes: usize },
    MixMusic { gain_db: f64, placements: usize },
    Captions { burn_in: bool },
}

#[derive(Debug, Clone, PartialEq)]
pub struct RenderPlan {
    pub steps: Vec<RenderStep>,
    pub script: String,
}

impl RenderPlan {
    pub fn count(&self, pred: impl Fn(&RenderStep) -> bool) -> usize {
        self.steps.iter().filter(|s| pred(s)).count()
    }
}

fn secs(ms: u64) -> String {
    format!("{}.{:03}", ms / 1000, ms % 1000)
}

fn quote(s: &str) -> String {
    format!("'{}'", s.replace('\'', r"'\''"))
}

fn resolve(root: &Path, reference: &str) -> PathBuf {
    let p = Path::new(reference);
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        root.join(p)
    }
}

fn existing(root: &Path, reference: &str, kind: &'static str) -> Result<PathBuf, RenderError> {
    let path = resolve(root, reference);
    if path.is_file() {
        Ok(path)
    } else {
        Err(RenderError::MissingAsset { kind, path })
    }
}

const ENCODE: &str = "-c:v libx264 -preset veryfast -pix_fmt yuv420p -r 30";
const ENCODE_AUDIO: &str = "-c:a aac -ar 48000 -ac 2";

struct Stages {
    script: String,
    n: usize,
}

impl Stages {
    fn current(&self) -> String {
        format!("\"$WORK/stage_{}.mp4\"", self.n)
    }

    fn next(&mut self) -> String {
        self.n += 1;
        self.current()
    }

    fn comment(&mut self, text: &str) {
        let _ = writeln!(self.script, "\n# {text}");
    }

    fn line(&mut self, text: &str) {
        self.script.push_str(text);
        self.script.push('\n');
    }
}

/// Emits the ordered plan: trims, one concat, overlays, crop, music mix, captions.
pub fn emit_render_script(edl: &TeaserEdl, profile: &RenderProfile) -> Result<RenderPlan, RenderError> {
    let music_path = match &edl.music {
        Some(m) => Some(existing(&profile.asset_root, &m.audio_ref, "music")?),
        None => None,
    };
    let logo_paths = edl
        .overlays
        .iter()
        .map(|l| existing(&profile.asset_root, &l.image_ref, "logo"))
        .collect::<Result<Vec<_>, _>>()?;
    let source = resolve(&profile.asset_root, &edl.media_ref);
    let (w, h) = (profile.width, profile.height);
    let fit = format!("scale={w}:{h},setsar=1");

    let mut steps = Vec::new();
    let mut s = Stages { script: String::new(), n: 0 };
    s.line("#!/usr/bin/env bash");
    s.line("set -euo pipefail");
    s.line(&format!("FFMPEG=\"${{FFMPEG:-{}}}\"", profile.program));
    s.line(&format!("SRC={}", quote(&source.to_string_lossy())));
    s.line(&format!("OUT=\"${{1:-{}}}\"", profile.output));
    s.line("WORK=\"$(mktemp -d)\"");
    s.line("trap 'rm -rf \"$WORK\"' EXIT");
    s.line("FF=(\"$FFMPEG\" -hide_banner -loglevel error -nostdin -y)");

    for seg in &edl.video.segments {
        s.comment(&format!("trim segment {}", seg.index));
        let vf = match seg.zoom {
            Some(z) => format!("crop=iw/{z}:ih/{z},{fit}"),
            None => fit.clone(),
        };
        s.line(&format!(
            "\"${{FF[@]}}\" -ss {} -i \"$SRC\" -t {} -vf \"{vf}\" {ENCODE} {ENCODE_AUDIO} \"$WORK/seg_{:03}.mp4\"",
            secs(seg.source_in_ms),
            secs(seg.duration_ms()),
            seg.index
        ));
        s.line(&format!("echo \"file 'seg_{:03}.mp4'\" >> \"$WORK/list.txt\"", seg.index));
        steps.push(RenderStep::Trim {
            segment: seg.index,
            source_in_ms: seg.source_in_ms,
            source_out_ms: seg.source_out_ms,
            zoom: seg.zoom,
        });
    }

    s.comment("concatenate");
    let out = s.current();
    s.line(&format!("\"${{FF[@]}}\" -f concat -safe 0 -i \"$WORK/list.txt\" -c copy {out}"));
    steps.push(RenderStep::Concat { inputs: edl.video.segments.len() });

    for r in &edl.video.reactions {
        let (a, b) = (r.timeline_start_ms, r.timeline_start_ms + r.duration_ms);
        s.comment(&format!("reaction shot of {} over cut {}", r.person_id, r.boundary));
        let input = s.current();
        let out = s.next();
        s.line(&format!(
            "\"${{FF[@]}}\" -i {input} -ss {} -t {} -i \"$SRC\" -filter_complex \
             \"[1:v]{fit},setpts=PTS-STARTPTS+{}/TB[r];[0:v][r]overlay=eof_action=pass:enable='between(t,{},{})'[v]\" \
             -map \"[v]\" -map 0:a {ENCODE} -c:a copy {out}",
            secs(r.source_in_ms),
            secs(r.duration_ms),
            secs(a),
            secs(a),
            secs(b)
        ));
        steps.push(RenderStep::Overlay {
            what: format!("reaction:{}", r.person_id),
            timeline_start_ms: a,
            timeline_end_ms: b,
        });
    }

    if let Some(rf) = &edl.video.reframe {
        s.comment(&format!("reframe to {}", rf.aspect));
        // piecewise-constant crop center, switching at each keyframe
        let mut expr = String::from("0.5");
        for k in &rf.keyframes {
            expr = format!("if(gte(t,{}),{},{expr})", secs(k.timeline_ms), k.center_x);
        }
        let input = s.current();
        let out = s.next();
        s.line(&format!(
            "\"${{FF[@]}}\" -i {input} -vf \"crop=w='iw*{cw}':h='ih*{ch}':x='iw*({expr})-iw*{cw}/2':y='ih*(1-{ch})/2',scale=trunc(iw/2)*2:trunc(ih/2)*2\" \
             {ENCODE} -c:a copy {out}",
            cw = rf.crop_width,
            ch = rf.crop_height,
        ));
        steps.push(RenderStep::Crop {
            crop_width: rf.crop_width,
            keyframes: rf.keyframes.len(),
        });
    }

    for (logo, path) in edl.overlays.iter().zip(&logo_paths) {
        s.comment("logo");
        let m = logo.margin;
        let (x, y) = match logo.corner {
            Corner::TopLeft => (format!("{m}*H"), format!("{m}*H")),
            Corner::TopRight => (format!("W-w-{m}*H"), format!("{m}*H")),
            Corner::BottomLeft => (format!("{m}*H"), format!("H-h-{m}*H")),
            Corner::BottomRight => (format!("W-w-{m}*H"), format!("H-h-{m}*H")),
        };
        let input = s.current();
        let out = s.next();
        s.line(&format!(
            "\"${{FF[@]}}\" -i {input} -i {} -filter_complex \
             \"[0:v][1:v]overlay=x={x}:y={y}:enable='between(t,{},{})'[v]\" -map \"[v]\" -map 0:a {ENCODE} -c:a copy {out}",
            quote(&path.to_string_lossy()),
            secs(logo.timeline_start_ms),
            secs(logo.timeline_end_ms)
        ));
        steps.push(RenderStep::Overlay {
            what: "logo".into(),
            timeline_start_ms: logo.timeline_start_ms,
            timeline_end_ms: logo.timeline_end_ms,
        });
    }

    if let (Some(m), Some(path)) = (&edl.music, &music_path) {
        s.comment(&format!("music bed {} at {} dB", m.track_id, m.gain_db));
        let mut graph = String::new();
        for (i, p) in m.placements.iter().enumerate() {
            let _ = write!(
                graph,
                "[1:a]atrim=start={}:end={},asetpts=PTS-STARTPTS[m{i}];",
                secs(p.source_start_ms),
                secs(p.source_end_ms)
            );
        }
        for i in 0..m.placements.len() {
            let _ = write!(graph, "[m{i}]");
        }
        let _ = write!(
            graph,
            "concat=n={}:v=0:a=1,volume={}dB[bed];[0:a][bed]amix=inputs=2:duration=first:dropout_transition=0:normalize=0[a]",
            m.placements.len(),
            m.gain_db
        );
        let input = s.current();
        let out = s.next();
        s.line(&format!(
            "\"${{FF[@]}}\" -i {input} -i {} -filter_complex \"{graph}\" -map 0:v -map \"[a]\" -c:v copy {ENCODE_AUDIO} {out}",
            quote(&path.to_string_lossy())
        ));
        steps.push(RenderStep::MixMusic {
            gain_db: m.gain_db,
            placements: m.placements.len(),
        });
    }

    if let Some(c) = &edl.captions {
        let srt = export_captions(
            &CaptionTrack {
                style: c.style,
                cues: c.cues.clone(),
            },
            SubtitleFormat::Srt,
        );
        let target = if profile.burn_captions {
            "\"$WORK/captions.srt\"".to_string()
        } else {
            "\"${OUT%.*}.srt\"".to_string()
        };
        s.comment(if profile.burn_captions { "burn in captions" } else { "sidecar captions" });
        s.line(&format!("cat > {target} <<'CAPTIONS_EOF'"));
        s.script.push_str(&srt);
        s.line("CAPTIONS_EOF");
        if profile.burn_captions {
            let input = s.current();
            let out = s.next();
            s.line(&format!(
                "\"${{FF[@]}}\" -i {input} -vf \"subtitles=$WORK/captions.srt\" {ENCODE} -c:a copy {out}"
            ));
        }
        steps.push(RenderStep::Captions {
            burn_in: profile.burn_captions,
        });
    }

    s.comment("deliver");
    let last = s.current();
    s.line(&format!("cp {last} \"$OUT\""));

    Ok(RenderPlan { steps, script: s.script })
}
