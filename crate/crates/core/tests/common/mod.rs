#![allow(dead_code)]

pub mod contracts;
pub mod oracles;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use teaser_core::model::{FeatureBundle, SentenceId};
use teaser_core::synth::{episode_with, EpisodeSpec};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Short episode with frequent fillers and short sentences.
pub fn small_bundle(seed: u64, sentences: usize) -> FeatureBundle {
    episode_with(
        seed,
        &EpisodeSpec {
            sentences,
            sentence_ms: (1_500, 12_000),
            gap_ms: (100, 900),
            filler_rate: 0.12,
            listener_visibility: 0.6,
        },
    )
}

/// Up to `max` distinct sentence ids; kept in order or shuffled at random.
pub fn random_selection(rng: &mut ChaCha8Rng, bundle: &FeatureBundle, max: usize) -> Vec<SentenceId> {
    let n = bundle.sentences.len();
    let len = rng.gen_range(1..=max.min(n));
    let mut ids: Vec<SentenceId> = if rng.gen_bool(0.5) {
        let first = rng.gen_range(0..=n - len);
        (first..first + len).collect()
    } else {
        let mut all: Vec<SentenceId> = (0..n).collect();
        all.shuffle(rng);
        all.truncate(len);
        all
    };
    if rng.gen_bool(0.3) {
        ids.shuffle(rng);
    }
    ids
}
