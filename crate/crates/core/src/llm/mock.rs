//! Deterministic offline backend.
//!
//! The mock reads the prompt it is given, recognizes the template, and answers
//! from the prompt content alone. Clip extraction is answered by running the
//! heuristic window search over the transcript lines embedded in the prompt.

use std::collections::HashMap;

use regex::Regex;

use super::prompt::{self, TemplateKind};
use super::{BackendKind, CompletionBackend, GatewayError};
use crate::extraction::{
    term_frequency_keywords, Engine, MomentQuery, Row, SpeakerFilter, Style, Table, TargetLength,
    PAGE_SIZE,
};
use crate::model::Role;
use crate::text;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct MockBackend {
    pub seed: u64,
}

impl MockBackend {
    pub fn new(seed: u64) -> Self {
        MockBackend { seed }
    }

    fn hash(&self, prompt: &str) -> u64 {
        // FNV-1a; stable across platforms and releases
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        for b in self.seed.to_le_bytes().iter().chain(prompt.as_bytes()) {
            h ^= u64::from(*b);
            h = h.wrapping_mul(0x0100_0000_01b3);
        }
        h
    }
}

impl CompletionBackend for MockBackend {
    fn kind(&self) -> BackendKind {
        BackendKind::Mock
    }

    fn complete(&self, prompt: &str) -> Result<String, GatewayError> {
        match prompt::classify(prompt) {
            Some(TemplateKind::Keywords) => Ok(answer_keywords(prompt)),
            Some(TemplateKind::Extract) => answer_extract(prompt),
            Some(TemplateKind::Tagline) => Ok(self.answer_tagline(prompt)),
            Some(TemplateKind::Emphasis) => Ok(answer_emphasis(prompt)),
            None => Err(GatewayError::BackendUnavailable(
                "mock backend does not recognise this prompt".into(),
            )),
        }
    }
}

/// `id: text` lines following the `Transcript:` header.
fn simple_transcript(prompt: &str) -> Vec<(usize, &str)> {
    prompt
        .lines()
        .skip_while(|l| *l != "Transcript:")
        .skip(1)
        .map_while(|l| {
            let (id, text) = l.split_once(": ")?;
            Some((id.parse().ok()?, text))
        })
        .collect()
}

const FILLER_TOPICS: [&str; 6] = ["podcast", "episode", "conversation", "story", "ideas", "life"];

fn answer_keywords(prompt: &str) -> String {
    let lines = simple_transcript(prompt);
    let tokens: Vec<String> = lines.iter().flat_map(|(_, t)| text::tokens(t)).collect();
    let mut picked: Vec<String> = term_frequency_keywords(tokens.iter().map(String::as_str), 6)
        .into_iter()
        .map(|(k, _)| k)
        .collect();
    for t in FILLER_TOPICS {
        if picked.len() == 6 {
            break;
        }
        if !picked.iter().any(|p| p == t) {
            picked.push(t.to_string());
        }
    }
    picked
        .iter()
        .enumerate()
        .map(|(i, k)| format!("{}. {k}", i + 1))
        .collect::<Vec<_>>()
        .join("\n")
}

fn answer_extract(prompt: &str) -> Result<String, GatewayError> {
    let line_re = Regex::new(r"^(\d+) \[(\d+)\.(\d)\]: \((.*?)\) (.*)$").expect("static regex");
    let length_re = Regex::new(r"around (\d+) seconds long").expect("static regex");
    let malformed = || GatewayError::BackendUnavailable("mock could not read extract prompt".into());

    let mut speakers: HashMap<String, Role> = HashMap::new();
    let mut style = Style::Informational;
    let mut keywords = Vec::new();
    for line in prompt.lines() {
        if let Some(rest) = line.strip_prefix("The clip should only include the following speakers: ") {
            for item in rest.trim_end_matches('.').split(", ") {
                if let Some((id, role)) = item.rsplit_once(" (") {
                    let role = match role.trim_end_matches(')') {
                        "host" => Role::Host,
                        _ => Role::Guest,
                    };
                    speakers.insert(id.to_string(), role);
                }
            }
        } else if let Some(rest) = line.strip_prefix("The clip should contain the keywords of ") {
            keywords = rest.trim_end_matches('.').split(", ").map(str::to_string).collect();
        } else if let Some(rest) = line.strip_prefix("The clip should be ") {
            let label = rest.trim_end_matches('.');
            style = Style::ALL.into_iter().find(|s| s.label() == label).unwrap_or_default();
        }
    }
    let secs: u32 = length_re
        .captures(prompt)
        .and_then(|c| c[1].parse().ok())
        .ok_or_else(malformed)?;

    let mut rows = Vec::new();
    for line in prompt.lines().skip_while(|l| *l != "Transcript:").skip(1) {
        let Some(c) = line_re.captures(line) else { break };
        let whole: u64 = c[2].parse().map_err(|_| malformed())?;
        let tenth: u64 = c[3].parse().map_err(|_| malformed())?;
        let text = c[5].to_string();
        rows.push(Row {
            duration_ms: whole * 1000 + tenth * 100,
            role: speakers.get(&c[4]).copied(),
            tokens: text::tokens(&text),
            text,
            live_sum: 0.0,
            live_count: 0,
        });
    }
    let roles: Vec<Role> = speakers.values().copied().collect();
    let filter = if roles.iter().all(|r| *r == Role::Host) {
        SpeakerFilter::HostOnly
    } else if roles.iter().all(|r| *r == Role::Guest) {
        SpeakerFilter::GuestOnly
    } else {
        SpeakerFilter::Both
    };
    let query = MomentQuery::new(
        TargetLength::try_from(secs).unwrap_or_default(),
        filter,
        style,
        keywords,
    );
    let table = Table { rows };
    let picked = Engine::new(&table, &query).select(PAGE_SIZE, &[]);
    Ok(picked
        .iter()
        .map(|c| {
            let ids: Vec<String> = (c.range.first..=c.range.last).map(|i| i.to_string()).collect();
            format!("[{}]", ids.join(", "))
        })
        .collect::<Vec<_>>()
        .join(", "))
}

impl MockBackend {
    fn answer_tagline(&self, prompt: &str) -> String {
        let content = prompt
            .split_once("Clip 1: ")
            .map(|(_, rest)| rest)
            .and_then(|rest| rest.rsplit_once(". The tagline should be"))
            .map(|(clip, _)| clip)
            .unwrap_or("");
        let tokens = text::tokens(content);
        let top: Vec<String> = term_frequency_keywords(tokens.iter().map(String::as_str), 2)
            .into_iter()
            .map(|(k, _)| capitalize(&k))
            .collect();
        let subject = if top.is_empty() {
            "This Conversation".to_string()
        } else {
            top.join(" and ")
        };
        match self.hash(prompt) % 3 {
            0 => format!("The Truth About {subject}"),
            1 => format!("Why {subject} Matters"),
            _ => format!("{subject}, Explained"),
        }
    }
}

fn capitalize(word: &str) -> String {
    let mut chars = word.chars();
    match chars.next() {
        Some(c) => c.to_uppercase().chain(chars).collect(),
        None => String::new(),
    }
}

fn answer_emphasis(prompt: &str) -> String {
    let lines = simple_transcript(prompt);
    lines
        .iter()
        .map(|(id, t)| (t.matches(['!', '?']).count(), t.len(), *id))
        .max()
        .map(|(_, _, id)| id.to_string())
        .unwrap_or_else(|| "0".into())
}
