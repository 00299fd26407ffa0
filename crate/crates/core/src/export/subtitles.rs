use std::fmt::Write;

use serde::{Deserialize, Serialize};

use crate::finishing::CaptionTrack;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SubtitleFormat {
    Srt,
    Vtt,
}

fn timestamp(ms: u64, sep: char) -> String {
    format!(
        "{:02}:{:02}:{:02}{sep}{:03}",
        ms / 3_600_000,
        ms / 60_000 % 60,
        ms / 1000 % 60,
        ms % 1000
    )
}

fn one_line(text: &str) -> String {
    text.split_whitespace().collect::<Vec<_>>().join(" ").replace("-->", "->")
}

pub fn export_captions(track: &CaptionTrack, format: SubtitleFormat) -> String {
    let mut out = String::new();
    match format {
        SubtitleFormat::Srt => {
            for (i, cue) in track.cues.iter().enumerate() {
                let _ = write!(
                    out,
                    "{}\n{} --> {}\n{}\n\n",
                    i + 1,
                    timestamp(cue.start_ms, ','),
                    timestamp(cue.end_ms, ','),
                    one_line(&cue.text)
                );
            }
        }
        SubtitleFormat::Vtt => {
            out.push_str("WEBVTT\n");
            for cue in &track.cues {
                let _ = write!(
                    out,
                    "\n{} --> {}\n{}\n",
                    timestamp(cue.start_ms, '.'),
                    timestamp(cue.end_ms, '.'),
                    one_line(&cue.text)
                );
            }
        }
    }
    out
}
