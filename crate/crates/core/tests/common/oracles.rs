//! Exhaustive reference implementations used as test oracles.
#![allow(dead_code)]

use std::cmp::Ordering;

use teaser_core::extraction::{HeuristicScorer, MomentQuery, SentenceRange};
use teaser_core::model::{range_duration, FeatureBundle, Role, SentenceId, SpeakerId};
use teaser_core::refine::CutList;

/// Same-speaker boundaries where the source does not simply run on:
/// the next segment starts earlier, or some word lies between the two.
pub fn jump_cuts_pairwise(bundle: &FeatureBundle, cutlist: &CutList) -> Vec<usize> {
    let mut out = Vec::new();
    for i in 0..cutlist.segments.len().saturating_sub(1) {
        let (a, b) = (&cutlist.segments[i], &cutlist.segments[i + 1]);
        if a.speaker_id != b.speaker_id {
            continue;
        }
        let runs_on = b.source_in >= a.source_out
            && !bundle.words.iter().any(|w| w.start >= a.source_out && w.end <= b.source_in);
        if !runs_on {
            out.push(i);
        }
    }
    out
}

/// Latest sentence within `lookback` before `first` whose role differs.
pub fn leading_question_scan(bundle: &FeatureBundle, first: SentenceId, lookback: usize) -> Option<SentenceId> {
    let role = |i: usize| {
        let s = &bundle.sentences[i];
        bundle.speakers.iter().find(|p| p.id == s.speaker_id).map(|p| p.role).unwrap_or(Role::Guest)
    };
    let opening = role(first);
    let mut best = None;
    for i in 0..first {
        if first - i <= lookback && role(i) != opening {
            best = Some(i);
        }
    }
    best
}

/// Sweep over every visibility and sentence edge: the runs in which a
/// listener is visible while someone else talks, nearest midpoint first.
pub fn reaction_scan(bundle: &FeatureBundle, cut_speaker: &SpeakerId, at: u64) -> Option<(SpeakerId, u64, u64)> {
    let mut edges: Vec<u64> = Vec::new();
    for v in &bundle.visibility {
        edges.extend([v.start.0, v.end.0]);
    }
    for s in &bundle.sentences {
        edges.extend([bundle.words[s.first_word].start.0, bundle.words[s.last_word].end.0]);
    }
    edges.sort_unstable();
    edges.dedup();

    // (visibility index, sentence id) -> run
    let mut runs: Vec<(usize, usize, u64, u64)> = Vec::new();
    for w in edges.windows(2) {
        let (lo, hi) = (w[0], w[1]);
        let Some(sid) = bundle.sentences.iter().position(|s| {
            bundle.words[s.first_word].start.0 <= lo && hi <= bundle.words[s.last_word].end.0
        }) else {
            continue;
        };
        for (vi, v) in bundle.visibility.iter().enumerate() {
            if v.start.0 <= lo && hi <= v.end.0 && &v.person_id != cut_speaker && v.person_id != bundle.sentences[sid].speaker_id {
                match runs.iter_mut().find(|r| r.0 == vi && r.1 == sid && r.3 == lo) {
                    Some(r) => r.3 = hi,
                    None => runs.push((vi, sid, lo, hi)),
                }
            }
        }
    }
    runs.into_iter()
        .map(|(vi, _, a, b)| (bundle.visibility[vi].person_id.clone(), a, b))
        .min_by(|x, y| {
            let dx = (x.1 + x.2).abs_diff(2 * at);
            let dy = (y.1 + y.2).abs_diff(2 * at);
            dx.cmp(&dy).then(x.1.cmp(&y.1)).then(x.0.cmp(&y.0))
        })
}

/// Every window of up to 60 admitted sentences, ordered by the documented
/// preference, then picked greedily while disjoint.
pub fn brute_force_windows(bundle: &FeatureBundle, query: &MomentQuery, count: usize) -> Vec<SentenceRange> {
    let scorer = HeuristicScorer::new(bundle, query);
    let target = query.target_length.millis();
    let admitted: Vec<bool> = (0..bundle.sentences.len())
        .map(|i| query.speakers.admits(bundle.sentence_role(i).unwrap()))
        .collect();
    let mut all = Vec::new();
    for first in 0..bundle.sentences.len() {
        for last in first..(first + 60).min(bundle.sentences.len()) {
            if !(first..=last).all(|i| admitted[i]) {
                break;
            }
            let ids: Vec<_> = (first..=last).collect();
            let d = range_duration(bundle, &ids, false).unwrap();
            let off = d.abs_diff(target);
            let tier = if off <= 5_000 { 0 } else if off <= 10_000 { 1 } else { 2 };
            let r = SentenceRange::new(first, last);
            all.push((tier, if tier == 2 { off } else { 0 }, scorer.rank(r), r));
        }
    }
    all.sort_by(|a, b| {
        a.0.cmp(&b.0)
            .then(a.1.cmp(&b.1))
            .then(b.2.partial_cmp(&a.2).unwrap_or(Ordering::Equal))
            .then(a.3.cmp(&b.3))
    });
    let mut picked: Vec<SentenceRange> = Vec::new();
    for (_, _, _, r) in all {
        if picked.len() == count {
            break;
        }
        if picked.iter().all(|p| !p.overlaps(&r)) {
            picked.push(r);
        }
    }
    picked
}
