//! Engine for co-creating short single-moment teasers from long video podcast episodes.
//!
//! The workflow runs in six steps: extract candidate moments, review them,
//! refine the chosen one at sentence level, hide jump cuts, lay music under
//! the speech, and finish with captions, reframing and a logo. Every step is a
//! pure function over an immutable [`model::FeatureBundle`]; the result is an
//! edit decision list consumed by an external renderer.

pub mod eval;
pub mod export;
pub mod extraction;
pub mod finishing;
pub mod llm;
pub mod model;
pub mod production;
pub mod refine;
pub mod review;
pub mod synth;
pub mod text;
