use serde::{Deserialize, Serialize};

use crate::llm::{self, prompt, BackendKind, CompletionBackend};
use crate::model::{FeatureBundle, SentenceId};
use crate::refine::CutList;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EmphasisSource {
    Model,
    Liveliness,
    User,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Emphasis {
    pub sentence_id: SentenceId,
    pub source: EmphasisSource,
    /// The model was asked but failed, so liveliness picked the sentence.
    pub degraded: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum EmphasisError {
    #[error("cut list is empty")]
    EmptyCutList,
}

/// Mean envelope amplitude over a sentence; 0 when no frame falls inside it.
pub fn sentence_liveliness(bundle: &FeatureBundle, id: SentenceId) -> f64 {
    let Ok((start, end)) = bundle.sentence_interval(id) else { return 0.0 };
    let (sum, count) = bundle.envelope.frame_stats(start, end);
    if count == 0 {
        0.0
    } else {
        sum / count as f64
    }
}

fn by_liveliness(bundle: &FeatureBundle, ids: &[SentenceId]) -> SentenceId {
    let mut best = ids[0];
    let mut best_live = f64::NEG_INFINITY;
    for &id in ids {
        let live = sentence_liveliness(bundle, id);
        if live >= best_live {
            best = id;
            best_live = live;
        }
    }
    best
}

/// Chooses the sentence the music peak should land on.
///
/// Without a remote model the liveliest sentence wins, ties going to the one
/// later in the teaser.
pub fn detect_emphasis(
    bundle: &FeatureBundle,
    cutlist: &CutList,
    backend: Option<&dyn CompletionBackend>,
) -> Result<Emphasis, EmphasisError> {
    let ids = cutlist.sentence_ids();
    if ids.is_empty() {
        return Err(EmphasisError::EmptyCutList);
    }
    let local = |degraded| Emphasis {
        sentence_id: by_liveliness(bundle, &ids),
        source: EmphasisSource::Liveliness,
        degraded,
    };
    match backend {
        Some(b) if b.kind() == BackendKind::Remote => {
            let p = prompt::emphasis_prompt(bundle, &ids);
            match llm::complete_parsed(b, &p, |t| llm::parse_single_sentence_id(t, &ids)) {
                Ok(sentence_id) => Ok(Emphasis {
                    sentence_id,
                    source: EmphasisSource::Model,
                    degraded: false,
                }),
                Err(e) => {
                    tracing::warn!(error = %e, "emphasis detection failed, using liveliness");
                    Ok(local(true))
                }
            }
        }
        _ => Ok(local(false)),
    }
}
