//! Deterministic window search used offline and by the mock backend.
//!
//! Candidate windows are runs of consecutive eligible sentences. Windows
//! within the ±10s generation band are ranked by score, with those inside
//! ±5s of the target always preferred; when the band runs dry the search
//! falls back to whichever windows come closest to the target.

use std::cmp::Ordering;

use crate::model::{FeatureBundle, Role};
use crate::text;

use super::lexicon::style_hits;
use super::{MomentQuery, SentenceRange, SpeakerFilter, Style};

pub const KEYWORD_WEIGHT: f64 = 0.35;
pub const STYLE_WEIGHT: f64 = 0.25;
pub const DURATION_WEIGHT: f64 = 0.25;
pub const LIVELINESS_WEIGHT: f64 = 0.15;

/// Candidate windows are generated within this distance of the target.
pub const GENERATION_BAND_MS: u64 = 10_000;
/// Windows within this distance of the target are always ranked first.
pub const PREFERRED_MARGIN_MS: u64 = 5_000;
/// Ranking bonus for windows featuring both roles when the query asks for both.
pub const BOTH_ROLES_BONUS: f64 = 0.1;
/// Style hits per sentence at which the lexicon score saturates.
const STYLE_SATURATION: f64 = 0.5;

#[derive(Debug, Clone)]
pub(crate) struct Row {
    pub duration_ms: u64,
    pub role: Option<Role>,
    pub tokens: Vec<String>,
    pub text: String,
    pub live_sum: f64,
    pub live_count: usize,
}

/// Per-sentence features the search runs over.
#[derive(Debug, Clone)]
pub(crate) struct Table {
    pub rows: Vec<Row>,
}

impl Table {
    pub fn from_bundle(bundle: &FeatureBundle) -> Self {
        let rows = bundle
            .sentences
            .iter()
            .map(|s| {
                let (start, end) = (bundle.words[s.first_word].start, bundle.words[s.last_word].end);
                let (live_sum, live_count) = bundle.envelope.frame_stats(start, end);
                Row {
                    duration_ms: end.saturating_sub(start),
                    role: bundle.speaker(&s.speaker_id).map(|sp| sp.role),
                    tokens: text::tokens(&s.text),
                    text: s.text.clone(),
                    live_sum,
                    live_count,
                }
            })
            .collect();
        Table { rows }
    }
}

/// Score components, each in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScoreParts {
    pub keyword_hit_ratio: f64,
    pub style_score: f64,
    pub duration_closeness: f64,
    pub normalized_liveliness: f64,
}

impl ScoreParts {
    pub fn total(&self) -> f64 {
        KEYWORD_WEIGHT * self.keyword_hit_ratio
            + STYLE_WEIGHT * self.style_score
            + DURATION_WEIGHT * self.duration_closeness
            + LIVELINESS_WEIGHT * self.normalized_liveliness
    }
}

/// Linear closeness: 1 at the target, 0 once off by the target or more.
pub fn duration_closeness(duration_ms: u64, target_ms: u64) -> f64 {
    if target_ms == 0 {
        return if duration_ms == 0 { 1.0 } else { 0.0 };
    }
    let off = duration_ms.abs_diff(target_ms) as f64;
    (1.0 - off / target_ms as f64).clamp(0.0, 1.0)
}

pub(crate) struct Engine<'a> {
    table: &'a Table,
    target_ms: u64,
    filter: SpeakerFilter,
    style: Style,
    keywords: Vec<Vec<String>>,
    style_hits: Vec<u32>,
    max_liveliness: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Candidate {
    pub range: SentenceRange,
    pub duration_ms: u64,
    pub score: f64,
    pub rank: f64,
    pub tier: u8,
}

impl<'a> Engine<'a> {
    pub fn new(table: &'a Table, query: &MomentQuery) -> Self {
        let style_hits = table
            .rows
            .iter()
            .map(|r| style_hits(query.style, &r.tokens, &r.text))
            .collect();
        let max_liveliness = table
            .rows
            .iter()
            .filter(|r| r.live_count > 0)
            .map(|r| r.live_sum / r.live_count as f64)
            .fold(0.0, f64::max);
        Engine {
            table,
            target_ms: query.target_length.millis(),
            filter: query.speakers,
            style: query.style,
            keywords: query.keywords.iter().map(|k| text::tokens(k)).collect(),
            style_hits,
            max_liveliness,
        }
    }

    pub fn eligible(&self, idx: usize) -> bool {
        let role = self.table.rows[idx].role;
        match self.filter {
            SpeakerFilter::HostOnly => role == Some(Role::Host),
            SpeakerFilter::GuestOnly => role == Some(Role::Guest),
            SpeakerFilter::Both => true,
        }
    }

    pub fn duration(&self, range: SentenceRange) -> u64 {
        self.table.rows[range.first..=range.last].iter().map(|r| r.duration_ms).sum()
    }

    pub fn score(&self, range: SentenceRange) -> ScoreParts {
        let rows = &self.table.rows[range.first..=range.last];

        let keyword_hit_ratio = if self.keywords.is_empty() {
            1.0
        } else {
            let tokens: Vec<String> = rows.iter().flat_map(|r| r.tokens.iter().cloned()).collect();
            let hits = self
                .keywords
                .iter()
                .filter(|k| text::contains_phrase(&tokens, k))
                .count();
            hits as f64 / self.keywords.len() as f64
        };

        let (sum, count) = rows
            .iter()
            .fold((0.0, 0usize), |(s, c), r| (s + r.live_sum, c + r.live_count));
        let normalized_liveliness = if count == 0 || self.max_liveliness <= 0.0 {
            0.0
        } else {
            (sum / count as f64 / self.max_liveliness).clamp(0.0, 1.0)
        };

        let hits: u32 = self.style_hits[range.first..=range.last].iter().sum();
        let density = hits as f64 / rows.len() as f64;
        let lexical = (density / STYLE_SATURATION).min(1.0);
        let w = self.style.liveliness_weight();
        let style_score = (1.0 - w) * lexical + w * normalized_liveliness;

        ScoreParts {
            keyword_hit_ratio,
            style_score,
            duration_closeness: duration_closeness(self.duration(range), self.target_ms),
            normalized_liveliness,
        }
    }

    pub fn rank(&self, range: SentenceRange, score: f64) -> f64 {
        if self.filter != SpeakerFilter::Both {
            return score;
        }
        let rows = &self.table.rows[range.first..=range.last];
        let host = rows.iter().any(|r| r.role == Some(Role::Host));
        let guest = rows.iter().any(|r| r.role == Some(Role::Guest));
        if host && guest {
            score + BOTH_ROLES_BONUS
        } else {
            score
        }
    }

    pub fn tier(&self, duration_ms: u64) -> u8 {
        let off = duration_ms.abs_diff(self.target_ms);
        if off <= PREFERRED_MARGIN_MS {
            0
        } else if off <= GENERATION_BAND_MS {
            1
        } else {
            2
        }
    }

    fn candidate(&self, range: SentenceRange, duration_ms: u64) -> Candidate {
        let score = self.score(range).total();
        Candidate {
            range,
            duration_ms,
            score,
            rank: self.rank(range, score),
            tier: self.tier(duration_ms),
        }
    }

    /// All windows considered by the search, skipping any that touch `exclude`.
    pub fn candidates(&self, exclude: &[SentenceRange]) -> Vec<Candidate> {
        let n = self.table.rows.len();
        let ceiling = self.target_ms + GENERATION_BAND_MS;
        let blocked = |i: usize| exclude.iter().any(|r| r.contains(i));
        let mut out = Vec::new();
        for first in 0..n {
            if !self.eligible(first) || blocked(first) {
                continue;
            }
            let mut duration = 0u64;
            for last in first..n {
                if !self.eligible(last) || blocked(last) {
                    break;
                }
                duration += self.table.rows[last].duration_ms;
                // every window up to the ceiling, plus the first one past it
                out.push(self.candidate(SentenceRange { first, last }, duration));
                if duration > ceiling {
                    break;
                }
            }
        }
        out
    }

    pub fn compare(&self, a: &Candidate, b: &Candidate) -> Ordering {
        a.tier
            .cmp(&b.tier)
            .then_with(|| {
                if a.tier == 2 {
                    a.duration_ms
                        .abs_diff(self.target_ms)
                        .cmp(&b.duration_ms.abs_diff(self.target_ms))
                } else {
                    Ordering::Equal
                }
            })
            .then_with(|| b.rank.total_cmp(&a.rank))
            .then_with(|| a.range.first.cmp(&b.range.first))
            .then_with(|| a.range.last.cmp(&b.range.last))
    }

    /// Greedy pick of up to `count` pairwise disjoint windows.
    pub fn select(&self, count: usize, exclude: &[SentenceRange]) -> Vec<Candidate> {
        let mut cands = self.candidates(exclude);
        cands.sort_by(|a, b| self.compare(a, b));
        let mut picked: Vec<Candidate> = Vec::with_capacity(count);
        for c in cands {
            if picked.len() == count {
                break;
            }
            if picked.iter().all(|p| !p.range.overlaps(&c.range)) {
                picked.push(c);
            }
        }
        picked
    }
}
