//! Scoring of extracted clips against annotations.
//!
//! All accuracies are kept as exact fractions; percentages are rounded half
//! away from zero to one decimal only when printed.

use std::collections::BTreeSet;
use std::fmt;
use std::io::Read;

use serde::{Deserialize, Serialize};

use crate::extraction::SpeakerFilter;
use crate::model::Role;

pub const DURATION_MARGIN_MS: u64 = 5000;
/// Mean rating at or above which a style or keyword match counts.
pub const RELEVANCE_THRESHOLD: u32 = 5;
/// Parameters a multi-parameter clip must satisfy to count as a success.
pub const MULTI_SUCCESS_MIN: usize = 3;

#[derive(Debug, thiserror::Error)]
pub enum EvalError {
    #[error("no annotations to score")]
    EmptySet,
    #[error("annotation csv line {line}: {message}")]
    Csv { line: u64, message: String },
    #[error("rating {0} outside 1..=7")]
    RatingOutOfRange(u8),
}

/// One annotated clip. Parameters that were not assessed are `None`.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ClipAnnotation {
    pub clip_id: String,
    pub measured_duration_ms: Option<u64>,
    pub target_duration_ms: Option<u64>,
    pub observed_speakers: Option<BTreeSet<Role>>,
    pub target_speakers: Option<SpeakerFilter>,
    pub style_ratings: Option<[u8; 2]>,
    pub keyword_ratings: Option<[u8; 2]>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Parameter {
    Duration,
    Speakers,
    Style,
    Keyword,
}

impl Parameter {
    pub const ALL: [Parameter; 4] = [Parameter::Duration, Parameter::Speakers, Parameter::Style, Parameter::Keyword];

    pub fn title(self) -> &'static str {
        match self {
            Parameter::Duration => "Duration",
            Parameter::Speakers => "Speakers",
            Parameter::Style => "Style",
            Parameter::Keyword => "Keyword",
        }
    }
}

fn rating_success(r: [u8; 2]) -> bool {
    // mean >= 5  <=>  sum >= 10
    u32::from(r[0]) + u32::from(r[1]) >= 2 * RELEVANCE_THRESHOLD
}

fn speakers_success(observed: &BTreeSet<Role>, target: SpeakerFilter) -> bool {
    match target {
        SpeakerFilter::HostOnly => !observed.is_empty() && observed.iter().all(|r| *r == Role::Host),
        SpeakerFilter::GuestOnly => !observed.is_empty() && observed.iter().all(|r| *r == Role::Guest),
        SpeakerFilter::Both => observed.contains(&Role::Host) && observed.contains(&Role::Guest),
    }
}

impl ClipAnnotation {
    /// Success of one parameter, `None` when it was not assessed.
    pub fn success(&self, p: Parameter, margin_ms: u64) -> Option<bool> {
        match p {
            Parameter::Duration => Some(self.measured_duration_ms?.abs_diff(self.target_duration_ms?) <= margin_ms),
            Parameter::Speakers => Some(speakers_success(self.observed_speakers.as_ref()?, self.target_speakers?)),
            Parameter::Style => self.style_ratings.map(rating_success),
            Parameter::Keyword => self.keyword_ratings.map(rating_success),
        }
    }

    fn validate(&self) -> Result<(), EvalError> {
        for r in self.style_ratings.iter().chain(&self.keyword_ratings).flatten() {
            if !(1..=7).contains(r) {
                return Err(EvalError::RatingOutOfRange(*r));
            }
        }
        Ok(())
    }
}

/// Exact `num / den` with `den > 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Ratio {
    pub num: i64,
    pub den: i64,
}

impl Ratio {
    pub fn value(self) -> f64 {
        self.num as f64 / self.den as f64
    }

    pub fn minus(self, other: Ratio) -> Ratio {
        Ratio {
            num: self.num * other.den - other.num * self.den,
            den: self.den * other.den,
        }
    }

    /// Percentage in tenths, rounded half away from zero.
    pub fn percent_tenths(self) -> i64 {
        let n = 1000 * self.num;
        let q = (2 * n.abs() + self.den) / (2 * self.den);
        if n < 0 {
            -q
        } else {
            q
        }
    }

    pub fn percent(self) -> f64 {
        self.percent_tenths() as f64 / 10.0
    }
}

impl fmt::Display for Ratio {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let t = self.percent_tenths();
        let sign = if t < 0 { "-" } else { "" };
        write!(f, "{sign}{}.{}%", t.abs() / 10, t.abs() % 10)
    }
}

fn accuracy(annotations: &[ClipAnnotation], p: Parameter, margin_ms: u64) -> Result<Ratio, EvalError> {
    let outcomes: Vec<bool> = annotations.iter().filter_map(|a| a.success(p, margin_ms)).collect();
    if outcomes.is_empty() {
        return Err(EvalError::EmptySet);
    }
    Ok(Ratio {
        num: outcomes.iter().filter(|s| **s).count() as i64,
        den: outcomes.len() as i64,
    })
}

/// Fraction of clips within `margin_ms` of their target length (inclusive).
pub fn duration_accuracy(annotations: &[ClipAnnotation], margin_ms: u64) -> Result<Ratio, EvalError> {
    accuracy(annotations, Parameter::Duration, margin_ms)
}

pub fn speaker_accuracy(annotations: &[ClipAnnotation]) -> Result<Ratio, EvalError> {
    accuracy(annotations, Parameter::Speakers, 0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RelevanceField {
    Style,
    Keyword,
}

/// Fraction of clips whose two ratings average 5 or more.
pub fn relevance_accuracy(annotations: &[ClipAnnotation], field: RelevanceField) -> Result<Ratio, EvalError> {
    let p = match field {
        RelevanceField::Style => Parameter::Style,
        RelevanceField::Keyword => Parameter::Keyword,
    };
    accuracy(annotations, p, 0)
}

/// Fraction of clips meeting at least [`MULTI_SUCCESS_MIN`] of their parameters.
pub fn multi_success_rate(annotations: &[ClipAnnotation], margin_ms: u64) -> Result<Ratio, EvalError> {
    if annotations.is_empty() {
        return Err(EvalError::EmptySet);
    }
    let hits = annotations
        .iter()
        .filter(|a| {
            Parameter::ALL
                .iter()
                .filter(|p| a.success(**p, margin_ms) == Some(true))
                .count()
                >= MULTI_SUCCESS_MIN
        })
        .count();
    Ok(Ratio {
        num: hits as i64,
        den: annotations.len() as i64,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AccuracyTable {
    pub single: [Option<Ratio>; 4],
    pub multi: [Option<Ratio>; 4],
    pub difference: [Option<Ratio>; 4],
    pub multi_three_or_more: Option<Ratio>,
}

pub fn accuracy_table(single: &[ClipAnnotation], multi: &[ClipAnnotation]) -> Result<AccuracyTable, EvalError> {
    for a in single.iter().chain(multi) {
        a.validate()?;
    }
    if single.is_empty() && multi.is_empty() {
        return Err(EvalError::EmptySet);
    }
    let row = |set: &[ClipAnnotation]| Parameter::ALL.map(|p| accuracy(set, p, DURATION_MARGIN_MS).ok());
    let single_row = row(single);
    let multi_row = row(multi);
    let mut difference = [None; 4];
    for i in 0..4 {
        if let (Some(s), Some(m)) = (single_row[i], multi_row[i]) {
            difference[i] = Some(m.minus(s));
        }
    }
    Ok(AccuracyTable {
        single: single_row,
        multi: multi_row,
        difference,
        multi_three_or_more: multi_success_rate(multi, DURATION_MARGIN_MS).ok(),
    })
}

impl AccuracyTable {
    pub fn to_markdown(&self) -> String {
        let cell = |r: &Option<Ratio>| r.map(|r| r.to_string()).unwrap_or_else(|| "n/a".into());
        let mut out = String::from("| | Duration | Speakers | Style | Keyword |\n|---|---|---|---|---|\n");
        for (name, row) in [
            ("Single-parameter", &self.single),
            ("Multi-parameter", &self.multi),
            ("Difference", &self.difference),
        ] {
            out.push_str(&format!("| {name} | {} |\n", row.iter().map(cell).collect::<Vec<_>>().join(" | ")));
        }
        out.push_str(&format!(
            "\nMulti-parameter clips meeting {MULTI_SUCCESS_MIN} or more parameters: {}\n",
            cell(&self.multi_three_or_more)
        ));
        out
    }
}

/// Header of the annotation CSV. Blank cells mean "not assessed".
pub const CSV_HEADER: [&str; 9] = [
    "clip_id",
    "measured_duration_ms",
    "target_duration_ms",
    "observed_speakers",
    "target_speakers",
    "style_rating_1",
    "style_rating_2",
    "keyword_rating_1",
    "keyword_rating_2",
];

#[derive(Debug, Deserialize)]
struct CsvRow {
    clip_id: String,
    measured_duration_ms: Option<u64>,
    target_duration_ms: Option<u64>,
    observed_speakers: Option<String>,
    target_speakers: Option<String>,
    style_rating_1: Option<u8>,
    style_rating_2: Option<u8>,
    keyword_rating_1: Option<u8>,
    keyword_rating_2: Option<u8>,
}

fn pair(a: Option<u8>, b: Option<u8>, line: u64, what: &str) -> Result<Option<[u8; 2]>, EvalError> {
    match (a, b) {
        (Some(a), Some(b)) => Ok(Some([a, b])),
        (None, None) => Ok(None),
        _ => Err(EvalError::Csv {
            line,
            message: format!("{what} needs both ratings"),
        }),
    }
}

/// Reads annotations; `observed_speakers` is a `;`-separated list of roles.
pub fn read_annotations(reader: impl Read) -> Result<Vec<ClipAnnotation>, EvalError> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let mut out = Vec::new();
    for rec in rdr.deserialize::<CsvRow>() {
        let row = rec.map_err(|e| EvalError::Csv {
            line: e.position().map(|p| p.line()).unwrap_or(0),
            message: e.to_string(),
        })?;
        let line = out.len() as u64 + 2;
        let bad = |message: String| EvalError::Csv { line, message };
        let observed_speakers = row
            .observed_speakers
            .filter(|s| !s.is_empty())
            .map(|s| {
                s.split(';')
                    .map(|r| match r.trim() {
                        "host" => Ok(Role::Host),
                        "guest" => Ok(Role::Guest),
                        other => Err(bad(format!("unknown role '{other}'"))),
                    })
                    .collect::<Result<BTreeSet<_>, _>>()
            })
            .transpose()?;
        let target_speakers = row
            .target_speakers
            .filter(|s| !s.is_empty())
            .map(|s| match s.as_str() {
                "host_only" => Ok(SpeakerFilter::HostOnly),
                "guest_only" => Ok(SpeakerFilter::GuestOnly),
                "both" => Ok(SpeakerFilter::Both),
                other => Err(bad(format!("unknown speaker target '{other}'"))),
            })
            .transpose()?;
        let a = ClipAnnotation {
            clip_id: row.clip_id,
            measured_duration_ms: row.measured_duration_ms,
            target_duration_ms: row.target_duration_ms,
            observed_speakers,
            target_speakers,
            style_ratings: pair(row.style_rating_1, row.style_rating_2, line, "style")?,
            keyword_ratings: pair(row.keyword_rating_1, row.keyword_rating_2, line, "keyword")?,
        };
        a.validate()?;
        out.push(a);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dur(measured: u64, target: u64) -> ClipAnnotation {
        ClipAnnotation {
            measured_duration_ms: Some(measured),
            target_duration_ms: Some(target),
            ..Default::default()
        }
    }

    fn style(a: u8, b: u8) -> ClipAnnotation {
        ClipAnnotation {
            style_ratings: Some([a, b]),
            ..Default::default()
        }
    }

    #[test]
    fn duration_margin_is_inclusive_and_strict_at_zero() {
        let set = [dur(30_000, 30_000), dur(35_000, 30_000), dur(35_001, 30_000)];
        assert_eq!(duration_accuracy(&set, 5000).unwrap(), Ratio { num: 2, den: 3 });
        let set = [dur(30_000, 30_000), dur(30_001, 30_000)];
        assert_eq!(duration_accuracy(&set, 0).unwrap(), Ratio { num: 1, den: 2 });
        assert!(matches!(duration_accuracy(&[], 5000), Err(EvalError::EmptySet)));
    }

    #[test]
    fn rating_threshold() {
        assert_eq!(relevance_accuracy(&[style(5, 4)], RelevanceField::Style).unwrap().num, 0);
        assert_eq!(relevance_accuracy(&[style(6, 4)], RelevanceField::Style).unwrap().num, 1);
    }

    #[test]
    fn speaker_rule() {
        let a = |obs: &[Role], t| ClipAnnotation {
            observed_speakers: Some(obs.iter().copied().collect()),
            target_speakers: Some(t),
            ..Default::default()
        };
        assert_eq!(speaker_accuracy(&[a(&[Role::Guest], SpeakerFilter::GuestOnly)]).unwrap().num, 1);
        assert_eq!(speaker_accuracy(&[a(&[Role::Guest], SpeakerFilter::Both)]).unwrap().num, 0);
        assert_eq!(speaker_accuracy(&[a(&[Role::Guest, Role::Host], SpeakerFilter::GuestOnly)]).unwrap().num, 0);
    }

    #[test]
    fn rounding_half_away_from_zero() {
        assert_eq!(Ratio { num: 31, den: 36 }.to_string(), "86.1%");
        assert_eq!(Ratio { num: 1, den: 8 }.percent_tenths(), 125);
        assert_eq!(Ratio { num: -3, den: 80 }.to_string(), "-3.8%");
        assert_eq!(Ratio { num: 1, den: 2000 }.to_string(), "0.1%");
        assert_eq!(Ratio { num: -1, den: 2000 }.to_string(), "-0.1%");
        assert_eq!(Ratio { num: 0, den: 3 }.to_string(), "0.0%");
    }

    #[test]
    fn identical_sets_have_zero_difference() {
        let set = vec![dur(30_000, 30_000), dur(50_000, 30_000), style(7, 7)];
        let t = accuracy_table(&set, &set).unwrap();
        assert_eq!(t.difference[0].unwrap().percent_tenths(), 0);
        assert_eq!(t.difference[2].unwrap().percent_tenths(), 0);
        assert_eq!(t.difference[1], None);
    }

    #[test]
    fn csv_round() {
        let text = "clip_id,measured_duration_ms,target_duration_ms,observed_speakers,target_speakers,style_rating_1,style_rating_2,keyword_rating_1,keyword_rating_2\n\
                    a,31000,30000,host;guest,both,6,4,,\n\
                    b,,,,,,,3,2\n";
        let set = read_annotations(text.as_bytes()).unwrap();
        assert_eq!(set.len(), 2);
        assert_eq!(set[0].success(Parameter::Speakers, 0), Some(true));
        assert_eq!(set[0].success(Parameter::Style, 0), Some(true));
        assert_eq!(set[1].success(Parameter::Keyword, 0), Some(false));
        assert_eq!(set[1].success(Parameter::Duration, 0), None);
        let bad = text.replace("6,4", "9,4");
        assert!(read_annotations(bad.as_bytes()).is_err());
    }
}
