//! Multi-parameter moment search and keyword suggestion.

mod heuristic;
mod keywords;
mod lexicon;

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::llm::{self, prompt, CompletionBackend, GatewayError};
use crate::model::{range_duration, FeatureBundle, Role, SentenceId};
use crate::text;

pub use heuristic::{
    duration_closeness, ScoreParts, BOTH_ROLES_BONUS, DURATION_WEIGHT, GENERATION_BAND_MS,
    KEYWORD_WEIGHT, LIVELINESS_WEIGHT, PREFERRED_MARGIN_MS, STYLE_WEIGHT,
};
pub(crate) use heuristic::{Engine, Row, Table};
pub use keywords::{
    suggest_keywords, term_frequency_keywords, KeywordSuggestion, OfflineTrend, SuggestError,
    TrendClient, TrendError, SUGGESTION_COUNT,
};

/// Number of candidates shown per review page.
pub const PAGE_SIZE: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(try_from = "u32", into = "u32")]
pub enum TargetLength {
    S15,
    #[default]
    S30,
    S45,
}

impl TargetLength {
    pub fn seconds(self) -> u32 {
        match self {
            TargetLength::S15 => 15,
            TargetLength::S30 => 30,
            TargetLength::S45 => 45,
        }
    }

    pub fn millis(self) -> u64 {
        u64::from(self.seconds()) * 1000
    }
}

impl TryFrom<u32> for TargetLength {
    type Error = String;

    fn try_from(secs: u32) -> Result<Self, Self::Error> {
        match secs {
            15 => Ok(TargetLength::S15),
            30 => Ok(TargetLength::S30),
            45 => Ok(TargetLength::S45),
            other => Err(format!("unsupported target length {other}s (expected 15, 30 or 45)")),
        }
    }
}

impl From<TargetLength> for u32 {
    fn from(t: TargetLength) -> u32 {
        t.seconds()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum SpeakerFilter {
    HostOnly,
    GuestOnly,
    #[default]
    Both,
}

impl SpeakerFilter {
    pub fn admits(self, role: Role) -> bool {
        match self {
            SpeakerFilter::HostOnly => role == Role::Host,
            SpeakerFilter::GuestOnly => role == Role::Guest,
            SpeakerFilter::Both => true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Style {
    #[default]
    Informational,
    CuriosityArousing,
    Funny,
    Emotional,
}

impl Style {
    pub const ALL: [Style; 4] = [
        Style::Informational,
        Style::CuriosityArousing,
        Style::Funny,
        Style::Emotional,
    ];

    /// Wording used inside prompts.
    pub fn label(self) -> &'static str {
        match self {
            Style::Informational => "informational",
            Style::CuriosityArousing => "curiosity-arousing",
            Style::Funny => "funny",
            Style::Emotional => "emotional",
        }
    }
}

impl fmt::Display for Style {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// The four search parameters.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize, Default)]
pub struct MomentQuery {
    #[serde(default)]
    pub target_length: TargetLength,
    #[serde(default)]
    pub speakers: SpeakerFilter,
    #[serde(default)]
    pub style: Style,
    #[serde(default)]
    pub keywords: Vec<String>,
}

impl MomentQuery {
    pub fn new(
        target_length: TargetLength,
        speakers: SpeakerFilter,
        style: Style,
        keywords: Vec<String>,
    ) -> Self {
        MomentQuery {
            target_length,
            speakers,
            style,
            keywords,
        }
        .normalized()
    }

    /// Lowercases keywords and drops empty or duplicate entries.
    pub fn normalized(mut self) -> Self {
        let mut out: Vec<String> = Vec::new();
        for k in &self.keywords {
            let k = text::normalize_keyword(k);
            if !k.is_empty() && !out.contains(&k) {
                out.push(k);
            }
        }
        self.keywords = out;
        self
    }
}

/// Inclusive run of consecutive sentence ids.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SentenceRange {
    pub first: SentenceId,
    pub last: SentenceId,
}

impl SentenceRange {
    pub fn new(first: SentenceId, last: SentenceId) -> Self {
        assert!(first <= last, "inverted sentence range");
        SentenceRange { first, last }
    }

    pub fn contains(&self, id: SentenceId) -> bool {
        self.first <= id && id <= self.last
    }

    pub fn overlaps(&self, other: &SentenceRange) -> bool {
        self.first <= other.last && other.first <= self.last
    }

    pub fn len(&self) -> usize {
        self.last - self.first + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn ids(&self) -> Vec<SentenceId> {
        (self.first..=self.last).collect()
    }
}

impl fmt::Display for SentenceRange {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}..{}", self.first, self.last)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MomentSource {
    Llm,
    Heuristic,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Moment {
    pub sentence_range: SentenceRange,
    /// Fillers included.
    pub duration_ms: u64,
    pub source_backend: MomentSource,
}

impl Moment {
    pub fn from_range(bundle: &FeatureBundle, range: SentenceRange, source: MomentSource) -> Self {
        Moment {
            sentence_range: range,
            duration_ms: range_duration(bundle, &range.ids(), false).unwrap_or(0),
            source_backend: source,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ExtractWarning {
    /// Fewer disjoint windows satisfy the speaker filter than were asked for.
    NoFeasibleWindow { requested: usize, found: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Extraction {
    pub moments: Vec<Moment>,
    pub warning: Option<ExtractWarning>,
}

#[derive(Debug, Clone, Copy)]
pub enum ExtractBackend<'a> {
    Heuristic,
    Llm(&'a dyn CompletionBackend),
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ExtractError {
    #[error(transparent)]
    Gateway(#[from] GatewayError),
}

/// Finds three candidate moments for `query`.
pub fn extract_moments(
    bundle: &FeatureBundle,
    query: &MomentQuery,
    backend: ExtractBackend<'_>,
) -> Result<Extraction, ExtractError> {
    match backend {
        ExtractBackend::Heuristic => Ok(extract_heuristic(bundle, query, &[], PAGE_SIZE)),
        ExtractBackend::Llm(llm) => {
            let prompt = prompt::extract_prompt(bundle, &extract_slots(bundle, query));
            let ranges = llm::complete_parsed(llm, &prompt, |t| llm::parse_clip_response(t, bundle))?;
            let moments = ranges
                .iter()
                .map(|ids| {
                    let range = SentenceRange::new(ids[0], *ids.last().unwrap());
                    Moment::from_range(bundle, range, MomentSource::Llm)
                })
                .collect();
            Ok(Extraction {
                moments,
                warning: None,
            })
        }
    }
}

/// Heuristic search for up to `count` windows disjoint from `exclude`.
///
/// Used directly by the offline backend and to page beyond the first three
/// candidates ("show more").
pub fn extract_heuristic(
    bundle: &FeatureBundle,
    query: &MomentQuery,
    exclude: &[SentenceRange],
    count: usize,
) -> Extraction {
    let table = Table::from_bundle(bundle);
    let engine = Engine::new(&table, query);
    let picked = engine.select(count, exclude);
    let warning = (picked.len() < count).then(|| {
        tracing::warn!(requested = count, found = picked.len(), "not enough feasible windows");
        ExtractWarning::NoFeasibleWindow {
            requested: count,
            found: picked.len(),
        }
    });
    Extraction {
        moments: picked
            .into_iter()
            .map(|c| Moment {
                sentence_range: c.range,
                duration_ms: c.duration_ms,
                source_backend: MomentSource::Heuristic,
            })
            .collect(),
        warning,
    }
}

pub(crate) fn extract_slots(bundle: &FeatureBundle, query: &MomentQuery) -> prompt::ExtractSlots {
    prompt::ExtractSlots {
        length_secs: query.target_length.seconds(),
        speakers: bundle
            .speakers
            .iter()
            .filter(|s| query.speakers.admits(s.role))
            .map(|s| (s.id.clone(), s.role))
            .collect(),
        style: query.style.label().to_string(),
        keywords: query.keywords.clone(),
    }
}

/// Reusable scorer for one (bundle, query) pair.
pub struct HeuristicScorer {
    table: Table,
    query: MomentQuery,
}

impl HeuristicScorer {
    pub fn new(bundle: &FeatureBundle, query: &MomentQuery) -> Self {
        HeuristicScorer {
            table: Table::from_bundle(bundle),
            query: query.clone(),
        }
    }

    pub fn parts(&self, window: SentenceRange) -> ScoreParts {
        Engine::new(&self.table, &self.query).score(window)
    }

    pub fn score(&self, window: SentenceRange) -> f64 {
        self.parts(window).total()
    }

    /// Score plus the both-roles ranking bonus used when ordering candidates.
    pub fn rank(&self, window: SentenceRange) -> f64 {
        let engine = Engine::new(&self.table, &self.query);
        engine.rank(window, engine.score(window).total())
    }
}

/// Weighted window score in `[0, 1]`.
pub fn heuristic_score(bundle: &FeatureBundle, window: SentenceRange, query: &MomentQuery) -> f64 {
    HeuristicScorer::new(bundle, query).score(window)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn query_normalizes_keywords() {
        let q = MomentQuery::new(
            TargetLength::S30,
            SpeakerFilter::Both,
            Style::Funny,
            vec!["Sleep".into(), " sleep ".into(), "".into(), "Mental Health".into()],
        );
        assert_eq!(q.keywords, ["sleep", "mental health"]);
    }

    #[test]
    fn target_length_serde() {
        assert_eq!(serde_json::to_string(&TargetLength::S45).unwrap(), "45");
        assert!(serde_json::from_str::<TargetLength>("20").is_err());
        let q: MomentQuery = serde_json::from_str("{}").unwrap();
        assert_eq!(q.target_length, TargetLength::S30);
        assert_eq!(q.speakers, SpeakerFilter::Both);
        assert_eq!(q.style, Style::Informational);
    }

    #[test]
    fn range_overlap() {
        let a = SentenceRange::new(1, 3);
        assert!(a.overlaps(&SentenceRange::new(3, 5)));
        assert!(!a.overlaps(&SentenceRange::new(4, 5)));
        assert_eq!(a.ids(), [1, 2, 3]);
    }
}
