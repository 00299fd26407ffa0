//! Deterministic synthetic episodes and placeholder media assets for tests,
//! demos and benchmarks.

use std::io::{self, Write};
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::model::{
    AmplitudeEnvelope, BoxCenter, FeatureBundle, Role, Sentence, Speaker, SpeakerId, TimeMs, VisibilityInterval, Word,
};
use crate::production::MusicTrackMeta;

pub const HOST_ID: &str = "host";
pub const GUEST_ID: &str = "guest";
const FRAME_MS: u64 = 100;

const TOPICS: [&str; 24] = [
    "sleep", "training", "marathon", "diet", "protein", "coffee", "stress", "music", "startup", "design",
    "camera", "family", "science", "memory", "habit", "running", "brain", "ocean", "travel", "recovery",
    "football", "vegan", "meditation", "career",
];
const GLUE: [&str; 28] = [
    "the", "and", "we", "i", "you", "it", "is", "was", "so", "that", "to", "of", "really", "think", "about",
    "my", "when", "people", "just", "know", "with", "because", "every", "day", "time", "actually", "what",
    "honestly",
];
const LIVELY: [&str; 10] = [
    "amazing", "crazy", "hilarious", "love", "laugh", "secret", "incredible", "heart", "joke", "imagine",
];
const FILLERS: [&str; 3] = ["um", "uh", "hmm"];

/// Shape of a generated episode.
#[derive(Debug, Clone, PartialEq)]
pub struct EpisodeSpec {
    pub sentences: usize,
    /// Spoken length of one sentence is drawn from this range.
    pub sentence_ms: (u64, u64),
    pub gap_ms: (u64, u64),
    pub filler_rate: f64,
    /// Chance that the listener is on camera during a sentence.
    pub listener_visibility: f64,
}

impl Default for EpisodeSpec {
    /// About an hour: 200 sentences of 6–28 s with short pauses.
    fn default() -> Self {
        EpisodeSpec {
            sentences: 200,
            sentence_ms: (6_000, 28_000),
            gap_ms: (300, 1_200),
            filler_rate: 0.05,
            listener_visibility: 0.4,
        }
    }
}

struct Builder {
    rng: ChaCha8Rng,
    words: Vec<Word>,
    sentences: Vec<Sentence>,
    levels: Vec<(u64, u64, f64)>,
    visibility: Vec<VisibilityInterval>,
    clock: u64,
    filler_rate: f64,
}

impl Builder {
    fn new(seed: u64, filler_rate: f64) -> Self {
        Builder {
            rng: ChaCha8Rng::seed_from_u64(seed),
            words: Vec::new(),
            sentences: Vec::new(),
            levels: Vec::new(),
            visibility: Vec::new(),
            clock: 0,
            filler_rate,
        }
    }

    fn token(&mut self, focus: &[&'static str; 2]) -> String {
        let r: f64 = self.rng.gen();
        if r < 0.22 {
            focus[self.rng.gen_range(0..2)].to_string()
        } else if r < 0.27 {
            LIVELY[self.rng.gen_range(0..LIVELY.len())].to_string()
        } else if r < 0.30 {
            self.rng.gen_range(2..2030).to_string()
        } else if r < 0.38 {
            TOPICS[self.rng.gen_range(0..TOPICS.len())].to_string()
        } else {
            GLUE[self.rng.gen_range(0..GLUE.len())].to_string()
        }
    }

    /// Appends one sentence spoken by `speaker` lasting roughly `length_ms`.
    fn sentence(&mut self, speaker: &str, length_ms: u64) {
        let focus = [
            TOPICS[self.rng.gen_range(0..TOPICS.len())],
            TOPICS[self.rng.gen_range(0..TOPICS.len())],
        ];
        let n = ((length_ms / 400) as usize).max(2);
        let slot = length_ms / n as u64;
        let first = self.words.len();
        let start = self.clock;
        for i in 0..n {
            let filler = i + 1 < n && self.rng.gen_bool(self.filler_rate);
            let mut text = if filler {
                FILLERS[self.rng.gen_range(0..FILLERS.len())].to_string()
            } else {
                self.token(&focus)
            };
            if i == 0 {
                let mut c = text.chars();
                text = c.next().map(|f| f.to_uppercase().chain(c).collect()).unwrap_or(text);
            }
            if i + 1 == n {
                let r: f64 = self.rng.gen();
                text.push(if r < 0.2 { '?' } else if r < 0.32 { '!' } else { '.' });
            }
            let w_start = start + i as u64 * slot;
            let w_len = slot * self.rng.gen_range(80..=95) / 100;
            self.words.push(Word {
                text,
                start: TimeMs(w_start),
                end: TimeMs(w_start + w_len.max(1)),
                is_filler: filler,
            });
        }
        let end = self.words.last().map(|w| w.end.0).unwrap_or(start);
        let id = self.sentences.len();
        let text = self.words[first..].iter().map(|w| w.text.as_str()).collect::<Vec<_>>().join(" ");
        self.sentences.push(Sentence {
            id,
            first_word: first,
            last_word: self.words.len() - 1,
            speaker_id: speaker.into(),
            text,
        });
        let level = self.rng.gen_range(0.2..0.8);
        self.levels.push((start, end, level));
        self.clock = end;
    }

    fn pause(&mut self, ms: u64) {
        self.clock += ms;
    }

    fn on_camera(&mut self, person: &str, start: u64, end: u64, x: f64) {
        if start < end {
            self.visibility.push(VisibilityInterval {
                person_id: person.into(),
                start: TimeMs(start),
                end: TimeMs(end),
                center: Some(BoxCenter { x: round3(x), y: 0.45 }),
            });
        }
    }

    fn finish(mut self, media_ref: &str) -> FeatureBundle {
        let duration = self.clock + 2_000;
        let frames = duration.div_ceil(FRAME_MS) as usize;
        let mut samples = vec![0.02; frames];
        for &(start, end, level) in &self.levels {
            let a = (start / FRAME_MS) as usize;
            let b = (end.div_ceil(FRAME_MS) as usize).min(frames);
            for s in &mut samples[a..b] {
                *s = round3((level + self.rng.gen_range(-0.1..0.1)).clamp(0.0, 1.0));
            }
        }
        FeatureBundle {
            media_ref: media_ref.into(),
            duration: TimeMs(duration),
            words: self.words,
            sentences: self.sentences,
            speakers: vec![
                Speaker { id: SpeakerId(HOST_ID.into()), display_name: "Host".into(), role: Role::Host },
                Speaker { id: SpeakerId(GUEST_ID.into()), display_name: "Guest".into(), role: Role::Guest },
            ],
            envelope: AmplitudeEnvelope { frame_period_ms: FRAME_MS, samples },
            visibility: self.visibility,
        }
    }
}

fn round3(x: f64) -> f64 {
    (x * 1000.0).round() / 1000.0
}

/// The standard test episode: 200 sentences, about an hour, host and guest.
pub fn episode(seed: u64) -> FeatureBundle {
    episode_with(seed, &EpisodeSpec::default())
}

/// Alternating turns of one to six sentences; guests talk longer.
pub fn episode_with(seed: u64, spec: &EpisodeSpec) -> FeatureBundle {
    let mut b = Builder::new(seed, spec.filler_rate);
    let mut speaker_is_host = true;
    let mut left_in_turn = 0usize;
    b.pause(1_000);
    for _ in 0..spec.sentences {
        if left_in_turn == 0 {
            speaker_is_host = !speaker_is_host;
            left_in_turn = if speaker_is_host { b.rng.gen_range(1..=3) } else { b.rng.gen_range(1..=6) };
        }
        left_in_turn -= 1;
        let (speaker, listener, x, lx) = if speaker_is_host {
            (HOST_ID, GUEST_ID, 0.3, 0.7)
        } else {
            (GUEST_ID, HOST_ID, 0.7, 0.3)
        };
        let len = b.rng.gen_range(spec.sentence_ms.0..=spec.sentence_ms.1);
        let start = b.clock;
        b.sentence(speaker, len);
        let end = b.clock;
        let jitter = b.rng.gen_range(-0.05..0.05);
        b.on_camera(speaker, start, end, x + jitter);
        if b.rng.gen_bool(spec.listener_visibility) {
            let span = end - start;
            let a = start + b.rng.gen_range(0..span / 2);
            let len = b.rng.gen_range(1_000..6_000).min(end - a);
            b.on_camera(listener, a, a + len, lx);
        }
        let gap = b.rng.gen_range(spec.gap_ms.0..=spec.gap_ms.1);
        b.pause(gap);
    }
    b.finish(&format!("episode-{seed}.mp4"))
}

/// An episode where the guest speaks in exactly three separated stretches of
/// about 30 s (three 10 s sentences each); the host fills everything else.
pub fn guest_islands(seed: u64) -> FeatureBundle {
    let mut b = Builder::new(seed, 0.0);
    b.pause(500);
    for island in 0..3 {
        for _ in 0..4 + island {
            let len = b.rng.gen_range(8_000..14_000);
            b.sentence(HOST_ID, len);
            b.pause(400);
        }
        for _ in 0..3 {
            b.sentence(GUEST_ID, 10_000);
            b.pause(300);
        }
    }
    for _ in 0..4 {
        let len = b.rng.gen_range(8_000..14_000);
        b.sentence(HOST_ID, len);
        b.pause(400);
    }
    b.finish("islands.mp4")
}

/// Writes a silent 16-bit mono 8 kHz WAV of the given length.
pub fn write_silent_wav(path: &Path, duration_ms: u64) -> io::Result<()> {
    const RATE: u32 = 8_000;
    let samples = (u64::from(RATE) * duration_ms / 1000) as u32;
    let data_len = samples * 2;
    let mut f = io::BufWriter::new(std::fs::File::create(path)?);
    f.write_all(b"RIFF")?;
    f.write_all(&(36 + data_len).to_le_bytes())?;
    f.write_all(b"WAVEfmt ")?;
    f.write_all(&16u32.to_le_bytes())?;
    f.write_all(&1u16.to_le_bytes())?;
    f.write_all(&1u16.to_le_bytes())?;
    f.write_all(&RATE.to_le_bytes())?;
    f.write_all(&(RATE * 2).to_le_bytes())?;
    f.write_all(&2u16.to_le_bytes())?;
    f.write_all(&16u16.to_le_bytes())?;
    f.write_all(b"data")?;
    f.write_all(&data_len.to_le_bytes())?;
    f.write_all(&vec![0u8; data_len as usize])?;
    f.flush()
}

/// Writes a solid-colour binary PPM image.
pub fn write_ppm(path: &Path, width: u32, height: u32, rgb: [u8; 3]) -> io::Result<()> {
    let mut f = io::BufWriter::new(std::fs::File::create(path)?);
    write!(f, "P6\n{width} {height}\n255\n")?;
    for _ in 0..width * height {
        f.write_all(&rgb)?;
    }
    f.flush()
}

/// Creates a silent stand-in audio file for every track under `root`.
pub fn write_placeholder_music(root: &Path, library: &[MusicTrackMeta]) -> io::Result<()> {
    for t in library {
        let path = root.join(&t.audio_ref);
        if let Some(dir) = path.parent() {
            std::fs::create_dir_all(dir)?;
        }
        let len = t.segments.iter().map(|s| s.end_ms).max().unwrap_or(0);
        write_silent_wav(&path, len)?;
    }
    Ok(())
}
