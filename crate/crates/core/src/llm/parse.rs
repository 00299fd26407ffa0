//! Reply parsers. Each one either returns a value satisfying its prompt's
//! contract or an error; nothing in between.

use std::collections::HashSet;

use crate::model::{FeatureBundle, SentenceId};
use crate::text;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ResponseError {
    #[error("unparseable reply: {0}")]
    Parse(String),
    #[error("reply violates prompt contract: {0}")]
    Contract(String),
}

fn parse_err(msg: impl Into<String>) -> ResponseError {
    ResponseError::Parse(msg.into())
}

fn contract(msg: impl Into<String>) -> ResponseError {
    ResponseError::Contract(msg.into())
}

/// Three consecutive, pairwise disjoint sentence id lists.
pub type ClipRanges = [Vec<SentenceId>; 3];

/// Parses `[a, b, c], [m, n, q], [x, y, z]`. Prose outside the brackets is ignored.
pub fn parse_clip_response(text: &str, bundle: &FeatureBundle) -> Result<ClipRanges, ResponseError> {
    parse_clip_lists(text, bundle.sentences.len())
}

pub(crate) fn parse_clip_lists(text: &str, sentence_count: usize) -> Result<ClipRanges, ResponseError> {
    let groups = bracket_groups(text)?;
    if groups.len() != 3 {
        return Err(contract(format!("expected three clips, found {}", groups.len())));
    }
    let mut lists: Vec<Vec<SentenceId>> = Vec::with_capacity(3);
    for (n, g) in groups.iter().enumerate() {
        let ids = parse_id_list(g)?;
        if ids.is_empty() {
            return Err(contract(format!("clip {} is empty", n + 1)));
        }
        for &id in &ids {
            if id >= sentence_count {
                return Err(contract(format!("clip {} names unknown sentence {id}", n + 1)));
            }
        }
        if ids.windows(2).any(|w| w[1] != w[0] + 1) {
            return Err(contract(format!("clip {} is not a run of consecutive sentences", n + 1)));
        }
        lists.push(ids);
    }
    for i in 0..3 {
        for j in i + 1..3 {
            let (a, b) = (&lists[i], &lists[j]);
            let (a0, a1) = (a[0], *a.last().unwrap());
            let (b0, b1) = (b[0], *b.last().unwrap());
            if a0 <= b1 && b0 <= a1 {
                return Err(contract(format!("clips {} and {} overlap", i + 1, j + 1)));
            }
        }
    }
    let mut it = lists.into_iter();
    Ok([it.next().unwrap(), it.next().unwrap(), it.next().unwrap()])
}

fn bracket_groups(text: &str) -> Result<Vec<&str>, ResponseError> {
    let mut groups = Vec::new();
    let mut open: Option<usize> = None;
    for (i, c) in text.char_indices() {
        match c {
            '[' if open.is_some() => return Err(parse_err(format!("nested '[' at byte {i}"))),
            '[' => open = Some(i + 1),
            ']' => match open.take() {
                Some(start) => groups.push(&text[start..i]),
                None => return Err(parse_err(format!("unmatched ']' at byte {i}"))),
            },
            _ => {}
        }
    }
    if open.is_some() {
        return Err(parse_err("unclosed '['"));
    }
    if groups.is_empty() {
        return Err(parse_err("no bracketed id lists found"));
    }
    Ok(groups)
}

fn parse_id_list(group: &str) -> Result<Vec<SentenceId>, ResponseError> {
    if group.trim().is_empty() {
        return Ok(Vec::new());
    }
    group
        .split(',')
        .map(|item| {
            let item = item.trim();
            item.parse::<SentenceId>()
                .map_err(|_| parse_err(format!("{item:?} is not a sentence id")))
        })
        .collect()
}

/// Recovers exactly six distinct keywords from a numbered, bulleted or
/// comma-separated reply.
pub fn parse_keyword_response(text: &str) -> Result<Vec<String>, ResponseError> {
    let lines: Vec<&str> = text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.ends_with(':'))
        .collect();
    let items: Vec<String> = if lines.len() >= 6 {
        lines.iter().map(|l| l.to_string()).collect()
    } else {
        let joined = lines.join(",");
        let body = match joined.split_once(':') {
            Some((head, rest)) if head.split_whitespace().count() <= 3 => rest.to_string(),
            _ => joined,
        };
        body.split([',', ';']).map(str::to_string).collect()
    };

    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for item in items {
        let cleaned = strip_list_marker(&item);
        let kw = text::normalize_keyword(&cleaned);
        if kw.is_empty() || kw.split(' ').count() > 4 {
            continue;
        }
        if seen.insert(kw.clone()) {
            out.push(kw);
        }
    }
    if out.len() < 6 {
        return Err(parse_err(format!("expected six keywords, recovered {}", out.len())));
    }
    out.truncate(6);
    Ok(out)
}

fn strip_list_marker(item: &str) -> String {
    let s = item.trim().trim_start_matches(['-', '*', '•', '#']).trim_start();
    let digits = s.chars().take_while(|c| c.is_ascii_digit()).count();
    let s = if digits > 0 {
        let rest = &s[digits..];
        rest.strip_prefix('.')
            .or_else(|| rest.strip_prefix(')'))
            .or_else(|| rest.strip_prefix(':'))
            .unwrap_or(s)
    } else {
        s
    };
    s.trim().trim_matches(['"', '\'', '*', '`']).trim().to_string()
}

/// First integer in the reply that is one of `candidates`.
pub fn parse_single_sentence_id(text: &str, candidates: &[SentenceId]) -> Result<SentenceId, ResponseError> {
    let mut saw_integer = false;
    for run in text.split(|c: char| !c.is_ascii_digit()).filter(|r| !r.is_empty()) {
        saw_integer = true;
        if let Ok(id) = run.parse::<SentenceId>() {
            if candidates.contains(&id) {
                return Ok(id);
            }
        }
    }
    if saw_integer {
        Err(contract("no candidate sentence id in reply"))
    } else {
        Err(parse_err("reply contains no sentence id"))
    }
}

pub const MAX_TAGLINE_WORDS: usize = 10;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Tagline {
    pub text: String,
    pub truncated: bool,
}

/// Cleans a tagline reply and enforces the ten-word cap.
pub fn parse_tagline(reply: &str) -> Result<Tagline, ResponseError> {
    let line = reply
        .lines()
        .map(str::trim)
        .find(|l| !l.is_empty())
        .ok_or_else(|| parse_err("empty tagline"))?;
    let mut line = line.trim_start_matches(['-', '*', '#']).trim();
    for prefix in ["tagline", "clip 1", "clip"] {
        if line.to_lowercase().starts_with(prefix) {
            if let Some((_, rest)) = line.split_once(':') {
                line = rest.trim();
            }
            break;
        }
    }
    let line = line.trim_matches(['"', '\'', '*', '“', '”']).trim();
    let words: Vec<&str> = line.split_whitespace().collect();
    if words.is_empty() {
        return Err(parse_err("empty tagline"));
    }
    let truncated = words.len() > MAX_TAGLINE_WORDS;
    Ok(Tagline {
        text: words[..words.len().min(MAX_TAGLINE_WORDS)].join(" "),
        truncated,
    })
}
