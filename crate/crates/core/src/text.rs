//! Tokenization shared by keyword matching, lexicon scoring and term counts.

/// Lowercased alphanumeric runs of `text`.
pub fn tokens(text: &str) -> Vec<String> {
    text.split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(str::to_lowercase)
        .collect()
}

/// Canonical form of a user keyword: lowercase tokens joined by single spaces.
pub fn normalize_keyword(keyword: &str) -> String {
    tokens(keyword).join(" ")
}

/// Whether `phrase` occurs as a contiguous whole-token run inside `haystack`.
pub fn contains_phrase(haystack: &[String], phrase: &[String]) -> bool {
    if phrase.is_empty() || phrase.len() > haystack.len() {
        return false;
    }
    haystack.windows(phrase.len()).any(|w| w == phrase)
}

pub const STOPWORDS: &[&str] = &[
    "a", "about", "actually", "after", "again", "all", "also", "am", "an", "and", "any", "are",
    "around", "as", "at", "be", "because", "been", "before", "being", "both", "but", "by", "can",
    "could", "did", "do", "does", "doing", "don", "down", "even", "every", "for", "from", "get",
    "gets", "getting", "go", "going", "gonna", "got", "had", "has", "have", "having", "he", "her",
    "here", "him", "his", "how", "i", "if", "in", "into", "is", "it", "its", "just", "kind",
    "know", "like", "ll", "lot", "make", "me", "mean", "more", "most", "much", "my", "no", "not",
    "now", "of", "off", "oh", "ok", "okay", "on", "one", "only", "or", "other", "our", "out",
    "over", "people", "probably", "re", "really", "right", "s", "said", "same", "say", "see",
    "she", "should", "so", "some", "something", "sort", "t", "than", "that", "the", "their",
    "them", "then", "there", "these", "they", "thing", "things", "think", "this", "those",
    "through", "to", "too", "uh", "um", "up", "us", "ve", "very", "want", "was", "way", "we",
    "well", "were", "what", "when", "where", "which", "while", "who", "why", "will", "with",
    "would", "yeah", "yes", "you", "your",
];

pub fn is_stopword(token: &str) -> bool {
    STOPWORDS.binary_search(&token).is_ok()
}

/// Tokens eligible as topic keywords.
pub fn is_content_token(token: &str) -> bool {
    token.chars().count() >= 3
        && !token.chars().all(|c| c.is_ascii_digit())
        && !is_stopword(token)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stopwords_sorted_for_binary_search() {
        let mut sorted = STOPWORDS.to_vec();
        sorted.sort_unstable();
        assert_eq!(sorted, STOPWORDS);
    }

    #[test]
    fn whole_word_match() {
        let hay = tokens("... the artist said AI is changing, mental health!");
        assert!(!contains_phrase(&hay, &tokens("art")));
        assert!(contains_phrase(&hay, &tokens("ai")));
        assert!(contains_phrase(&hay, &tokens("Mental  Health")));
        assert!(!contains_phrase(&hay, &[]));
    }

    #[test]
    fn normalize() {
        assert_eq!(normalize_keyword("  Mental   HEALTH "), "mental health");
    }
}
