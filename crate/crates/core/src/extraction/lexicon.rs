//! Seed lexicons for the four clip styles.

use super::Style;

const INFORMATIONAL: &[&str] = &[
    "because", "data", "evidence", "example", "explain", "fact", "facts", "how", "important",
    "learn", "learned", "means", "number", "numbers", "percent", "process", "research", "science",
    "studies", "study", "understand",
];

const CURIOSITY: &[&str] = &[
    "crazy", "discover", "discovered", "hidden", "imagine", "mystery", "never", "nobody",
    "question", "secret", "secrets", "strange", "surprised", "surprising", "truth", "weird", "why",
];

const FUNNY: &[&str] = &[
    "embarrassing", "funny", "haha", "hilarious", "joke", "jokes", "kidding", "laugh", "laughed",
    "laughing", "lol", "ridiculous", "silly",
];

const EMOTIONAL: &[&str] = &[
    "afraid", "cried", "cry", "died", "family", "father", "feel", "felt", "grief", "heart", "hope",
    "lost", "love", "loved", "mother", "pain", "proud", "scared", "tears",
];

impl Style {
    pub(crate) fn lexicon(self) -> &'static [&'static str] {
        match self {
            Style::Informational => INFORMATIONAL,
            Style::CuriosityArousing => CURIOSITY,
            Style::Funny => FUNNY,
            Style::Emotional => EMOTIONAL,
        }
    }

    /// Share of the style component taken by vocal energy instead of wording.
    pub(crate) fn liveliness_weight(self) -> f64 {
        match self {
            Style::Informational => 0.0,
            Style::CuriosityArousing => 0.1,
            Style::Funny | Style::Emotional => 0.3,
        }
    }
}

/// Lexicon hits in one sentence: matching tokens plus style punctuation.
pub(crate) fn style_hits(style: Style, tokens: &[String], raw_text: &str) -> u32 {
    let lex = style.lexicon();
    let mut hits = tokens.iter().filter(|t| lex.binary_search(&t.as_str()).is_ok()).count() as u32;
    hits += match style {
        Style::Informational => tokens.iter().filter(|t| t.chars().all(|c| c.is_ascii_digit())).count() as u32,
        Style::CuriosityArousing => raw_text.matches('?').count() as u32,
        Style::Funny | Style::Emotional => raw_text.matches('!').count() as u32,
    };
    hits
}
