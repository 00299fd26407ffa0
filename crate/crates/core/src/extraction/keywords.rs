use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::llm::{self, prompt, GatewayError};
use crate::model::FeatureBundle;
use crate::text;

use super::ExtractBackend;

pub const SUGGESTION_COUNT: usize = 6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KeywordSuggestion {
    pub keyword: String,
    pub trend_score: f64,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum TrendError {
    #[error("trend service unavailable: {0}")]
    Unavailable(String),
}

/// Popularity source used to rank keyword suggestions.
pub trait TrendClient: Send + Sync {
    fn score(&self, keyword: &str) -> Result<f64, TrendError>;
}

/// Offline fallback: how often the keyword occurs in the transcript.
pub struct OfflineTrend {
    tokens: Vec<String>,
}

impl OfflineTrend {
    pub fn from_bundle(bundle: &FeatureBundle) -> Self {
        OfflineTrend {
            tokens: spoken_tokens(bundle),
        }
    }
}

impl TrendClient for OfflineTrend {
    fn score(&self, keyword: &str) -> Result<f64, TrendError> {
        let phrase = text::tokens(keyword);
        if phrase.is_empty() || phrase.len() > self.tokens.len() {
            return Ok(0.0);
        }
        Ok(self.tokens.windows(phrase.len()).filter(|w| *w == phrase.as_slice()).count() as f64)
    }
}

fn spoken_tokens(bundle: &FeatureBundle) -> Vec<String> {
    bundle
        .words
        .iter()
        .filter(|w| !w.is_filler)
        .flat_map(|w| text::tokens(&w.text))
        .collect()
}

/// Most frequent content tokens, count descending then lexicographic.
pub fn term_frequency_keywords<'a>(tokens: impl IntoIterator<Item = &'a str>, n: usize) -> Vec<(String, usize)> {
    let mut counts: HashMap<&str, usize> = HashMap::new();
    for t in tokens {
        if text::is_content_token(t) {
            *counts.entry(t).or_default() += 1;
        }
    }
    let mut ranked: Vec<(String, usize)> = counts.into_iter().map(|(k, v)| (k.to_string(), v)).collect();
    ranked.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    ranked.truncate(n);
    ranked
}

/// Six topic keywords ranked by trend score (descending, ties lexicographic).
pub fn suggest_keywords(
    bundle: &FeatureBundle,
    backend: ExtractBackend<'_>,
    trend: &dyn TrendClient,
) -> Result<Vec<KeywordSuggestion>, SuggestError> {
    let keywords: Vec<String> = match backend {
        ExtractBackend::Heuristic => {
            let tokens = spoken_tokens(bundle);
            term_frequency_keywords(tokens.iter().map(String::as_str), SUGGESTION_COUNT)
                .into_iter()
                .map(|(k, _)| k)
                .collect()
        }
        ExtractBackend::Llm(b) => {
            let p = prompt::keywords_prompt(bundle);
            llm::complete_parsed(b, &p, llm::parse_keyword_response)?
        }
    };
    let mut out = keywords
        .into_iter()
        .map(|k| {
            let trend_score = trend.score(&k)?.max(0.0);
            Ok(KeywordSuggestion { keyword: k, trend_score })
        })
        .collect::<Result<Vec<_>, TrendError>>()?;
    sort_suggestions(&mut out);
    Ok(out)
}

pub(crate) fn sort_suggestions(list: &mut [KeywordSuggestion]) {
    list.sort_by(|a, b| {
        b.trend_score
            .total_cmp(&a.trend_score)
            .then_with(|| a.keyword.cmp(&b.keyword))
    });
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SuggestError {
    #[error(transparent)]
    Gateway(#[from] GatewayError),
    #[error(transparent)]
    Trend(#[from] TrendError),
}
