//! Six-step teaser workflow over one persisted project.
//!
//! Every mutating action checks that the project has reached the step the
//! action belongs to, clears whatever later steps derived from the old state,
//! moves the project to the following step and appends one audit entry.

use std::fmt;
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use teaser_core::export::{self, RenderError, RenderProfile, SubtitleFormat, Teaser};
use teaser_core::extraction::{ExtractError, 
    extract_heuristic, extract_moments, suggest_keywords, ExtractBackend, ExtractWarning, KeywordSuggestion, Moment,
    MomentQuery, OfflineTrend, SentenceRange, PAGE_SIZE,
};
use teaser_core::finishing::{generate_captions, plan_reframe, CaptionTrack, FinishSettings, ReframePlan};
use teaser_core::llm::{CompletionBackend, GatewayError};
use teaser_core::model::{FeatureBundle, SentenceId};
use teaser_core::production::{
    add_reaction_shot, detect_emphasis, detect_jump_cuts, find_reaction_shot, lay_music, plan_zoom, remove_effect,
    Emphasis, EmphasisSource, Effect, EffectKind, JumpCut, MusicPlan, MusicStyle, MusicTrackMeta, TransitionError,
    DEFAULT_ZOOM_SCALE,
};
use teaser_core::refine::{build_cutlist, context_suggestions, CutList, RefineContext, RefineError, DEFAULT_CONTEXT};
use teaser_core::review::{build_overview, MomentOverview};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Step {
    Extract,
    Review,
    Refine,
    Transitions,
    Music,
    Finish,
    Done,
}

impl fmt::Display for Step {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Step::Extract => "extract",
            Step::Review => "review",
            Step::Refine => "refine",
            Step::Transitions => "transitions",
            Step::Music => "music",
            Step::Finish => "finish",
            Step::Done => "done",
        };
        f.write_str(s)
    }
}

#[derive(Debug, thiserror::Error)]
pub enum WorkflowError {
    #[error("{action} is not available at step {step}")]
    Step { action: &'static str, step: Step },
    #[error("{0}")]
    Validation(String),
    #[error("language model backend failed: {message}")]
    Backend { message: String, degraded: bool },
}

impl WorkflowError {
    fn invalid(e: impl fmt::Display) -> Self {
        WorkflowError::Validation(e.to_string())
    }
}

impl From<GatewayError> for WorkflowError {
    fn from(e: GatewayError) -> Self {
        WorkflowError::Backend {
            message: e.to_string(),
            degraded: false,
        }
    }
}

impl From<ExtractError> for WorkflowError {
    fn from(e: ExtractError) -> Self {
        match e {
            ExtractError::Gateway(g) => g.into(),
        }
    }
}

impl From<RefineError> for WorkflowError {
    fn from(e: RefineError) -> Self {
        WorkflowError::invalid(e)
    }
}

impl From<TransitionError> for WorkflowError {
    fn from(e: TransitionError) -> Self {
        WorkflowError::invalid(e)
    }
}

/// Which engine answers extraction, taglines and emphasis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BackendChoice {
    /// Local window search only; no model calls.
    Heuristic,
    #[default]
    Mock,
    Llm,
}

impl std::str::FromStr for BackendChoice {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "heuristic" | "offline" => Ok(BackendChoice::Heuristic),
            "mock" => Ok(BackendChoice::Mock),
            "llm" | "remote" => Ok(BackendChoice::Llm),
            other => Err(format!("unknown backend '{other}' (expected heuristic, mock or llm)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditEntry {
    pub seq: u64,
    pub at_unix_ms: u64,
    pub action: String,
    pub detail: serde_json::Value,
    pub step: Step,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MusicState {
    /// `None` when the teaser has no music.
    pub plan: Option<MusicPlan>,
    pub emphasis: Option<Emphasis>,
    pub emphasis_ms: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FinishState {
    pub settings: FinishSettings,
    pub captions: Option<CaptionTrack>,
    pub reframe: ReframePlan,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TeaserProject {
    pub id: String,
    pub media_ref: String,
    pub step: Step,
    pub backend: BackendChoice,
    pub query: Option<MomentQuery>,
    pub candidates: Vec<MomentOverview>,
    pub warning: Option<ExtractWarning>,
    pub selected: Option<Moment>,
    pub cutlist: Option<CutList>,
    pub music: Option<MusicState>,
    pub finish: Option<FinishState>,
    pub audit: Vec<AuditEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidatePage {
    pub page: usize,
    pub candidates: Vec<MomentOverview>,
    pub warning: Option<ExtractWarning>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionSummary {
    pub sentence_ids: Vec<SentenceId>,
    pub remove_fillers: bool,
    pub segments: usize,
    pub duration_ms: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransitionView {
    pub jump_cuts: Vec<JumpCut>,
    /// Effects per segment index.
    pub effects: Vec<Vec<Effect>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TransitionRequest {
    Zoom {
        #[serde(default)]
        scale: Option<f64>,
    },
    Reaction {
        /// Source time to search around; defaults to the cut itself.
        #[serde(default)]
        at_ms: Option<u64>,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct MusicRequest {
    /// A style name, or `none` for no music.
    pub style: String,
    #[serde(default)]
    pub emphasis_sentence: Option<SentenceId>,
    #[serde(default)]
    pub track_id: Option<String>,
}

/// Segment timing a client-side player needs to preview the teaser.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Preview {
    pub media_ref: String,
    pub total_duration_ms: u64,
    pub segments: Vec<export::EdlSegment>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExportKind {
    Edl,
    Srt,
    Vtt,
    RenderScript,
}

impl std::str::FromStr for ExportKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "edl" => Ok(ExportKind::Edl),
            "srt" => Ok(ExportKind::Srt),
            "vtt" => Ok(ExportKind::Vtt),
            "render-script" | "render_script" => Ok(ExportKind::RenderScript),
            other => Err(format!("unknown export format '{other}'")),
        }
    }
}

/// Engine dependencies shared by every project.
pub struct Engine<'a> {
    pub model: Option<&'a dyn CompletionBackend>,
    pub library: &'a [MusicTrackMeta],
}

impl Engine<'_> {
    fn extract_backend(&self, choice: BackendChoice) -> Result<ExtractBackend<'_>, WorkflowError> {
        match (choice, self.model) {
            (BackendChoice::Heuristic, _) => Ok(ExtractBackend::Heuristic),
            (_, Some(m)) => Ok(ExtractBackend::Llm(m)),
            (_, None) => Err(WorkflowError::Backend {
                message: format!("no {choice:?} backend is configured").to_lowercase(),
                degraded: false,
            }),
        }
    }

    fn overview_backend(&self, choice: BackendChoice) -> Option<&dyn CompletionBackend> {
        match choice {
            BackendChoice::Heuristic => None,
            _ => self.model,
        }
    }
}

fn now_ms() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_millis() as u64)
        .unwrap_or(0)
}

impl TeaserProject {
    pub fn new(id: impl Into<String>, bundle: &FeatureBundle) -> Self {
        let mut p = TeaserProject {
            id: id.into(),
            media_ref: bundle.media_ref.clone(),
            step: Step::Extract,
            backend: BackendChoice::default(),
            query: None,
            candidates: Vec::new(),
            warning: None,
            selected: None,
            cutlist: None,
            music: None,
            finish: None,
            audit: Vec::new(),
        };
        p.log(
            "create",
            serde_json::json!({ "media_ref": bundle.media_ref, "sentences": bundle.sentences.len() }),
        );
        p
    }

    fn log(&mut self, action: &str, detail: serde_json::Value) {
        self.audit.push(AuditEntry {
            seq: self.audit.len() as u64 + 1,
            at_unix_ms: now_ms(),
            action: action.into(),
            detail,
            step: self.step,
        });
    }

    fn require(&self, action: &'static str, reached: Step) -> Result<(), WorkflowError> {
        if self.step < reached {
            return Err(WorkflowError::Step { action, step: self.step });
        }
        Ok(())
    }

    /// Drops everything derived after `step` and moves to `next`.
    fn advance(&mut self, step: Step, next: Step) {
        if step < Step::Review {
            self.candidates.clear();
            self.warning = None;
        }
        if step < Step::Refine {
            self.selected = None;
        }
        if step < Step::Transitions {
            self.cutlist = None;
        }
        if step < Step::Music {
            self.music = None;
        }
        if step < Step::Finish {
            self.finish = None;
        }
        self.step = next;
    }

    fn cutlist(&self) -> &CutList {
        self.cutlist.as_ref().expect("cut list exists from the transitions step on")
    }

    pub fn extract(
        &mut self,
        bundle: &FeatureBundle,
        engine: &Engine<'_>,
        query: MomentQuery,
        backend: BackendChoice,
    ) -> Result<CandidatePage, WorkflowError> {
        let query = query.normalized();
        let found = extract_moments(bundle, &query, engine.extract_backend(backend)?)?;
        let model = engine.overview_backend(backend);
        let candidates: Vec<MomentOverview> = found
            .moments
            .iter()
            .map(|m| build_overview(bundle, m, &query.keywords, model))
            .collect();

        self.advance(Step::Extract, Step::Review);
        self.backend = backend;
        self.query = Some(query.clone());
        self.candidates = candidates.clone();
        self.warning = found.warning.clone();
        self.log("extract", serde_json::json!({ "query": query, "backend": backend }));
        Ok(CandidatePage {
            page: 0,
            candidates,
            warning: found.warning,
        })
    }

    pub fn pages_shown(&self) -> usize {
        self.candidates.len().div_ceil(PAGE_SIZE)
    }

    /// Returns the already-computed page, or computes the next one.
    pub fn page(
        &mut self,
        bundle: &FeatureBundle,
        engine: &Engine<'_>,
        page: usize,
    ) -> Result<(CandidatePage, bool), WorkflowError> {
        self.require("show more", Step::Review)?;
        if page < self.pages_shown() {
            let end = (page * PAGE_SIZE + PAGE_SIZE).min(self.candidates.len());
            return Ok((
                CandidatePage {
                    page,
                    candidates: self.candidates[page * PAGE_SIZE..end].to_vec(),
                    warning: None,
                },
                false,
            ));
        }
        if page > self.pages_shown() || !self.candidates.len().is_multiple_of(PAGE_SIZE) {
            return Err(WorkflowError::Validation(format!(
                "page {page} is not available; {} page(s) shown so far",
                self.pages_shown()
            )));
        }
        let query = self.query.clone().expect("query exists from the review step on");
        let shown: Vec<SentenceRange> = self.candidates.iter().map(|c| c.moment.sentence_range).collect();
        let more = extract_heuristic(bundle, &query, &shown, PAGE_SIZE);
        let model = engine.overview_backend(self.backend);
        let candidates: Vec<MomentOverview> = more
            .moments
            .iter()
            .map(|m| build_overview(bundle, m, &query.keywords, model))
            .collect();

        self.advance(Step::Review, Step::Review);
        self.candidates.extend(candidates.iter().cloned());
        self.log("show_more", serde_json::json!({ "page": page, "found": candidates.len() }));
        Ok((
            CandidatePage {
                page,
                candidates,
                warning: more.warning,
            },
            true,
        ))
    }

    pub fn select(&mut self, candidate: usize) -> Result<Moment, WorkflowError> {
        self.require("select", Step::Review)?;
        let moment = self
            .candidates
            .get(candidate)
            .map(|c| c.moment.clone())
            .ok_or_else(|| WorkflowError::Validation(format!("no candidate {candidate}")))?;
        self.advance(Step::Review, Step::Refine);
        self.selected = Some(moment.clone());
        self.log("select", serde_json::json!({ "candidate": candidate, "range": moment.sentence_range }));
        Ok(moment)
    }

    pub fn refine_context(&self, bundle: &FeatureBundle, k: Option<usize>) -> Result<RefineContext, WorkflowError> {
        self.require("refine context", Step::Refine)?;
        let moment = self.selected.as_ref().expect("moment selected from the refine step on");
        Ok(context_suggestions(bundle, moment.sentence_range, k.unwrap_or(DEFAULT_CONTEXT)))
    }

    pub fn set_selection(
        &mut self,
        bundle: &FeatureBundle,
        ids: &[SentenceId],
        remove_fillers: bool,
    ) -> Result<SelectionSummary, WorkflowError> {
        self.require("selection", Step::Refine)?;
        if ids.is_empty() {
            return Err(WorkflowError::Validation("selection is empty".into()));
        }
        let cl = build_cutlist(bundle, ids, remove_fillers)?;
        if cl.is_empty() {
            return Err(WorkflowError::Validation("selection has no audible duration".into()));
        }
        let summary = SelectionSummary {
            sentence_ids: ids.to_vec(),
            remove_fillers,
            segments: cl.segments.len(),
            duration_ms: cl.duration_ms(),
        };
        self.advance(Step::Refine, Step::Transitions);
        self.cutlist = Some(cl);
        self.log("selection", serde_json::json!({ "ids": ids, "remove_fillers": remove_fillers }));
        Ok(summary)
    }

    pub fn transitions(&self) -> Result<TransitionView, WorkflowError> {
        self.require("transitions", Step::Transitions)?;
        let cl = self.cutlist();
        Ok(TransitionView {
            jump_cuts: detect_jump_cuts(cl),
            effects: cl.segments.iter().map(|s| s.effects.clone()).collect(),
        })
    }

    pub fn add_transition(
        &mut self,
        bundle: &FeatureBundle,
        boundary: usize,
        request: &TransitionRequest,
    ) -> Result<TransitionView, WorkflowError> {
        self.require("add transition", Step::Transitions)?;
        let cl = self.cutlist();
        let updated = match request {
            TransitionRequest::Zoom { scale } => plan_zoom(cl, boundary, scale.unwrap_or(DEFAULT_ZOOM_SCALE))?,
            TransitionRequest::Reaction { at_ms } => {
                let jc = detect_jump_cuts(cl)
                    .into_iter()
                    .find(|j| j.boundary == boundary)
                    .ok_or(TransitionError::NotAJumpCut(boundary))?;
                let at = at_ms.map(teaser_core::model::TimeMs).unwrap_or(cl.segments[boundary + 1].source_in);
                let shot = find_reaction_shot(bundle, &jc, at)?;
                add_reaction_shot(cl, boundary, shot)?
            }
        };
        self.advance(Step::Transitions, Step::Transitions);
        self.cutlist = Some(updated);
        self.log("add_transition", serde_json::json!({ "boundary": boundary, "request": request }));
        self.transitions()
    }

    pub fn remove_transition(&mut self, boundary: usize, kind: EffectKind) -> Result<TransitionView, WorkflowError> {
        self.require("remove transition", Step::Transitions)?;
        let updated = remove_effect(self.cutlist(), boundary, kind)?;
        self.advance(Step::Transitions, Step::Transitions);
        self.cutlist = Some(updated);
        self.log("remove_transition", serde_json::json!({ "boundary": boundary, "kind": kind }));
        self.transitions()
    }

    pub fn set_music(
        &mut self,
        bundle: &FeatureBundle,
        engine: &Engine<'_>,
        request: &MusicRequest,
    ) -> Result<MusicState, WorkflowError> {
        self.require("music", Step::Transitions)?;
        let cl = self.cutlist();
        let state = if request.style.trim().eq_ignore_ascii_case("none") {
            MusicState {
                plan: None,
                emphasis: None,
                emphasis_ms: None,
            }
        } else {
            let style: MusicStyle = request.style.parse().map_err(WorkflowError::Validation)?;
            let track = match &request.track_id {
                Some(id) => engine.library.iter().find(|t| &t.track_id == id && t.style == style),
                None => engine.library.iter().find(|t| t.style == style),
            }
            .ok_or_else(|| WorkflowError::Validation(format!("no {} track in the music library", style.as_str())))?;

            let emphasis = match request.emphasis_sentence {
                Some(id) => Emphasis {
                    sentence_id: id,
                    source: EmphasisSource::User,
                    degraded: false,
                },
                None => detect_emphasis(bundle, cl, engine.overview_backend(self.backend))
                    .map_err(WorkflowError::invalid)?,
            };
            let at = cl
                .timeline_starts()
                .into_iter()
                .zip(&cl.segments)
                .find(|(_, s)| s.sentence_id == emphasis.sentence_id)
                .map(|(t, _)| t)
                .ok_or_else(|| {
                    WorkflowError::Validation(format!("emphasis sentence {} is not in the teaser", emphasis.sentence_id))
                })?;
            let plan = lay_music(track, cl.duration_ms(), at).map_err(WorkflowError::invalid)?;
            MusicState {
                plan: Some(plan),
                emphasis: Some(emphasis),
                emphasis_ms: Some(at),
            }
        };
        self.advance(Step::Music, Step::Finish);
        self.music = Some(state.clone());
        self.log("music", serde_json::to_value(request).unwrap_or_default());
        Ok(state)
    }

    pub fn finish(&mut self, bundle: &FeatureBundle, settings: FinishSettings) -> Result<FinishState, WorkflowError> {
        self.require("finish", Step::Finish)?;
        let cl = self.cutlist();
        if let Some(logo) = &settings.logo {
            if !(0.0..0.5).contains(&logo.margin) {
                return Err(WorkflowError::Validation(format!("logo margin {} outside [0, 0.5)", logo.margin)));
            }
        }
        let reframe = plan_reframe(bundle, cl, settings.aspect).map_err(WorkflowError::invalid)?;
        let captions = settings.caption_style.map(|s| generate_captions(bundle, cl, s));
        let state = FinishState {
            settings: settings.clone(),
            captions,
            reframe,
        };
        self.advance(Step::Finish, Step::Done);
        self.finish = Some(state.clone());
        self.log("finish", serde_json::to_value(&settings).unwrap_or_default());
        Ok(state)
    }

    /// Everything decided so far, ready for export.
    pub fn teaser(&self, bundle: &FeatureBundle) -> Result<Teaser, WorkflowError> {
        self.require("export", Step::Transitions)?;
        Ok(Teaser {
            media_ref: bundle.media_ref.clone(),
            source_duration: bundle.duration,
            cutlist: self.cutlist().clone(),
            music: self.music.as_ref().and_then(|m| m.plan.clone()),
            captions: self.finish.as_ref().and_then(|f| f.captions.clone()),
            reframe: self.finish.as_ref().map(|f| f.reframe.clone()),
            logo: self.finish.as_ref().and_then(|f| f.settings.logo.clone()),
        })
    }

    pub fn preview(&self, bundle: &FeatureBundle) -> Result<Preview, WorkflowError> {
        let edl = export::build_edl(&self.teaser(bundle)?).map_err(WorkflowError::invalid)?;
        Ok(Preview {
            media_ref: edl.media_ref,
            total_duration_ms: edl.total_duration_ms,
            segments: edl.video.segments,
        })
    }

    pub fn export(
        &self,
        bundle: &FeatureBundle,
        kind: ExportKind,
        profile: &RenderProfile,
    ) -> Result<Vec<u8>, WorkflowError> {
        let teaser = self.teaser(bundle)?;
        let captions = || {
            teaser
                .captions
                .as_ref()
                .ok_or_else(|| WorkflowError::Validation("captions are turned off or not planned yet".into()))
        };
        match kind {
            ExportKind::Edl => export::export_edl(&teaser).map_err(WorkflowError::invalid),
            ExportKind::Srt => Ok(export::export_captions(captions()?, SubtitleFormat::Srt).into_bytes()),
            ExportKind::Vtt => Ok(export::export_captions(captions()?, SubtitleFormat::Vtt).into_bytes()),
            ExportKind::RenderScript => {
                let edl = export::build_edl(&teaser).map_err(WorkflowError::invalid)?;
                let plan = export::emit_render_script(&edl, profile).map_err(|e: RenderError| WorkflowError::invalid(e))?;
                Ok(plan.script.into_bytes())
            }
        }
    }
}

/// Keyword suggestions for the extract step; never changes the project.
pub fn keyword_suggestions(
    bundle: &FeatureBundle,
    engine: &Engine<'_>,
    backend: BackendChoice,
) -> Result<Vec<KeywordSuggestion>, WorkflowError> {
    let trend = OfflineTrend::from_bundle(bundle);
    suggest_keywords(bundle, engine.extract_backend(backend)?, &trend).map_err(|e| WorkflowError::Backend {
        message: e.to_string(),
        degraded: false,
    })
}
