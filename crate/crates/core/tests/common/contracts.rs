//! Reply contracts checked independently of the parsers, plus the shared corpus.

use serde::Deserialize;
use teaser_core::llm::{parse_clip_response, parse_keyword_response, parse_single_sentence_id, parse_tagline};
use teaser_core::model::FeatureBundle;

pub const CORPUS: &str = include_str!("../fixtures/malformed_replies.json");
/// Ids offered to the single-id parser.
pub const CANDIDATES: [usize; 3] = [12, 13, 14];

#[derive(Debug, Deserialize)]
pub struct Case {
    pub parser: String,
    pub reply: String,
}

pub fn corpus() -> Vec<Case> {
    serde_json::from_str(CORPUS).expect("corpus is valid json")
}

/// Three non-empty runs of consecutive known ids, pairwise disjoint.
pub fn clips_ok(clips: &[Vec<usize>], sentence_count: usize) -> bool {
    if clips.len() != 3 {
        return false;
    }
    for c in clips {
        if c.is_empty() || c.iter().any(|&id| id >= sentence_count) {
            return false;
        }
        for k in 1..c.len() {
            if c[k] != c[k - 1] + 1 {
                return false;
            }
        }
    }
    for i in 0..3 {
        for j in 0..3 {
            if i != j && clips[i].iter().any(|id| clips[j].contains(id)) {
                return false;
            }
        }
    }
    true
}

pub fn keywords_ok(kws: &[String]) -> bool {
    let mut distinct = kws.to_vec();
    distinct.sort();
    distinct.dedup();
    kws.len() == 6 && distinct.len() == 6 && kws.iter().all(|k| !k.trim().is_empty())
}

pub fn tagline_ok(text: &str) -> bool {
    let n = text.split_whitespace().count();
    (1..=10).contains(&n)
}

/// Runs one corpus case; `Some(true)` accepted and valid, `Some(false)` accepted
/// but violating its contract, `None` rejected.
pub fn run_case(case: &Case, bundle: &FeatureBundle) -> Option<bool> {
    match case.parser.as_str() {
        "clip" => parse_clip_response(&case.reply, bundle)
            .ok()
            .map(|c| clips_ok(&c, bundle.sentences.len())),
        "keywords" => parse_keyword_response(&case.reply).ok().map(|k| keywords_ok(&k)),
        "single_id" => parse_single_sentence_id(&case.reply, &CANDIDATES)
            .ok()
            .map(|id| CANDIDATES.contains(&id)),
        "tagline" => parse_tagline(&case.reply).ok().map(|t| tagline_ok(&t.text)),
        other => panic!("unknown parser {other}"),
    }
}
