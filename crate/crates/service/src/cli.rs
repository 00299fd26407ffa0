//! `teaser` command line: the workflow one step per invocation, persisted in a project directory.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use teaser_core::eval::{accuracy_table, read_annotations, EvalError};
use teaser_core::export::RenderProfile;
use teaser_core::extraction::{MomentQuery, SpeakerFilter, Style, TargetLength};
use teaser_core::finishing::{Aspect, CaptionStyle, Corner, FinishSettings, LogoOverlay, LogoSpan};
use teaser_core::llm::GatewayError;
use teaser_core::model::{serialize_feature_bundle, FeatureBundle};
use teaser_core::synth::{self, EpisodeSpec};

use crate::config::{load_library, Backends, ConfigError, ServiceConfig};
use crate::store::{ProjectDir, StoreError};
use crate::workflow::{
    BackendChoice, CandidatePage, ExportKind, MusicRequest, TeaserProject, TransitionRequest, WorkflowError,
};

pub const EXIT_VALIDATION: u8 = 1;
pub const EXIT_BACKEND: u8 = 2;

#[derive(Debug, Parser)]
#[command(name = "teaser", version, about = "Cut single-moment teasers out of long podcast episodes")]
pub struct Cli {
    /// Project directory holding the workflow state between invocations.
    #[arg(long, global = true, default_value = ".teaser")]
    pub project: PathBuf,
    /// Music manifest replacing the bundled library.
    #[arg(long, global = true, env = "MUSIC_MANIFEST")]
    pub music_manifest: Option<PathBuf>,
    /// More log output on stderr (repeatable).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Start a project from a feature bundle.
    Ingest {
        bundle: PathBuf,
        /// Replace an existing project in the directory.
        #[arg(long)]
        force: bool,
    },
    /// Write a synthetic two-speaker feature bundle.
    Synth(SynthArgs),
    /// Suggest search keywords for the episode.
    Keywords {
        #[arg(long, default_value = "mock")]
        backend: BackendChoice,
    },
    /// Search for three candidate moments.
    Extract(ExtractArgs),
    /// Pick a candidate and set the sentences of the teaser.
    Assemble(AssembleArgs),
    /// Add transitions, music and finishing.
    Produce(ProduceArgs),
    /// Write the decision list, captions and render script.
    Export(ExportArgs),
    /// Print the project state as JSON.
    Status,
    /// Score annotated clips and print the accuracy table.
    Eval(EvalArgs),
    /// Run the HTTP service.
    Serve(ServeArgs),
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[arg(long, default_value_t = 7)]
    pub seed: u64,
    #[arg(long, default_value_t = 200)]
    pub sentences: usize,
    #[arg(long)]
    pub out: PathBuf,
    /// Also write silent music tracks and a logo image under this directory.
    #[arg(long)]
    pub assets: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ExtractArgs {
    /// Target length in seconds: 15, 30 or 45.
    #[arg(long, default_value_t = 30)]
    pub length: u32,
    /// host, guest or both.
    #[arg(long, default_value = "both", value_parser = parse_speakers)]
    pub speakers: SpeakerFilter,
    /// informational, curiosity, funny or emotional.
    #[arg(long, default_value = "informational", value_parser = parse_style)]
    pub style: Style,
    #[arg(long, value_delimiter = ',')]
    pub keywords: Vec<String>,
    #[arg(long, default_value = "mock")]
    pub backend: BackendChoice,
    /// Show another page of candidates instead of searching again.
    #[arg(long)]
    pub page: Option<usize>,
}

#[derive(Debug, Args)]
pub struct AssembleArgs {
    /// Candidate to build from, counting from 0 across pages.
    #[arg(long, default_value_t = 0)]
    pub candidate: usize,
    /// Sentence ids in teaser order; defaults to the candidate's sentences.
    #[arg(long, value_delimiter = ',')]
    pub sentences: Vec<usize>,
    #[arg(long)]
    pub remove_fillers: bool,
}

#[derive(Debug, Args)]
pub struct ProduceArgs {
    /// Zoom in after these jump-cut boundaries (`all` for every jump cut).
    #[arg(long, value_delimiter = ',')]
    pub zoom: Vec<String>,
    #[arg(long)]
    pub zoom_scale: Option<f64>,
    /// Lay a reaction shot over these jump-cut boundaries.
    #[arg(long, value_delimiter = ',')]
    pub reaction: Vec<usize>,
    /// Music style or `none`.
    #[arg(long, default_value = "none")]
    pub music: String,
    /// Sentence the music peak lands on; detected when omitted.
    #[arg(long)]
    pub emphasis: Option<usize>,
    /// standard, rapid or none.
    #[arg(long, default_value = "standard")]
    pub captions: String,
    #[arg(long, default_value = "vertical")]
    pub aspect: Aspect,
    /// Logo image reference, relative to the render asset root.
    #[arg(long)]
    pub logo: Option<String>,
    #[arg(long, default_value = "top-right", value_parser = parse_corner)]
    pub logo_corner: Corner,
    /// Show the logo only as a card over the last N milliseconds.
    #[arg(long)]
    pub logo_card_ms: Option<u64>,
}

#[derive(Debug, Args)]
pub struct ExportArgs {
    #[arg(long)]
    pub edl: Option<PathBuf>,
    #[arg(long)]
    pub srt: Option<PathBuf>,
    #[arg(long)]
    pub vtt: Option<PathBuf>,
    #[arg(long)]
    pub render_script: Option<PathBuf>,
    /// Where the render script resolves media, music and logo references.
    #[arg(long, default_value = ".")]
    pub asset_root: PathBuf,
    #[arg(long)]
    pub burn_captions: bool,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[arg(long)]
    pub single: PathBuf,
    #[arg(long)]
    pub multi: PathBuf,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    #[arg(long)]
    pub bind: Option<std::net::SocketAddr>,
    #[arg(long)]
    pub store: Option<PathBuf>,
}

fn parse_speakers(s: &str) -> Result<SpeakerFilter, String> {
    match s.trim().to_ascii_lowercase().replace('-', "_").as_str() {
        "host" | "host_only" => Ok(SpeakerFilter::HostOnly),
        "guest" | "guest_only" => Ok(SpeakerFilter::GuestOnly),
        "both" | "host_and_guest" => Ok(SpeakerFilter::Both),
        other => Err(format!("unknown speakers '{other}' (expected host, guest or both)")),
    }
}

fn parse_style(s: &str) -> Result<Style, String> {
    match s.trim().to_ascii_lowercase().replace('_', "-").as_str() {
        "informational" => Ok(Style::Informational),
        "curiosity" | "curiosity-arousing" => Ok(Style::CuriosityArousing),
        "funny" => Ok(Style::Funny),
        "emotional" => Ok(Style::Emotional),
        other => Err(format!("unknown style '{other}'")),
    }
}

fn parse_corner(s: &str) -> Result<Corner, String> {
    match s.trim().to_ascii_lowercase().replace('_', "-").as_str() {
        "top-left" => Ok(Corner::TopLeft),
        "top-right" => Ok(Corner::TopRight),
        "bottom-left" => Ok(Corner::BottomLeft),
        "bottom-right" => Ok(Corner::BottomRight),
        other => Err(format!("unknown corner '{other}'")),
    }
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Store(#[from] StoreError),
    #[error(transparent)]
    Workflow(#[from] WorkflowError),
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Gateway(#[from] GatewayError),
    #[error("{0}")]
    Invalid(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Workflow(WorkflowError::Backend { .. }) | CliError::Gateway(_) => EXIT_BACKEND,
            _ => EXIT_VALIDATION,
        }
    }
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    std::fs::write(path, bytes).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn read_file(path: &Path) -> Result<Vec<u8>, CliError> {
    std::fs::read(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn fmt_secs(ms: u64) -> String {
    format!("{}.{}s", ms / 1000, ms % 1000 / 100)
}

pub fn candidate_table(page: &CandidatePage, first_index: usize) -> String {
    let mut out = String::from("#   sentences   duration  speakers          tagline\n");
    for (i, c) in page.candidates.iter().enumerate() {
        let r = c.moment.sentence_range;
        let speakers: Vec<&str> = c.speakers.iter().map(|s| s.name.as_str()).collect();
        let _ = writeln!(
            out,
            "{:<3} {:<11} {:>8}  {:<16}  {}",
            first_index + i,
            format!("{}-{}", r.first, r.last),
            fmt_secs(c.duration_ms),
            speakers.join(", "),
            c.tagline
        );
    }
    if let Some(w) = &page.warning {
        let _ = writeln!(out, "warning: {}", serde_json::to_string(w).unwrap_or_default());
    }
    out
}

struct Session {
    dir: ProjectDir,
    project: TeaserProject,
    bundle: FeatureBundle,
}

impl Session {
    fn open(dir: &Path) -> Result<Self, CliError> {
        let dir = ProjectDir::new(dir);
        let project = dir.load()?;
        let bundle = dir.bundle()?;
        Ok(Session { dir, project, bundle })
    }

    fn save(&self) -> Result<(), CliError> {
        Ok(self.dir.save(&self.project)?)
    }
}

fn backends(cli: &Cli, choice: BackendChoice) -> Result<Backends, CliError> {
    let library = load_library(cli.music_manifest.as_ref())?;
    Ok(match choice {
        BackendChoice::Llm => Backends::from_env(library)?,
        _ => Backends::offline(library),
    })
}

/// Runs one invocation, writing user-facing output to `out`.
pub fn run(cli: &Cli, out: &mut dyn std::io::Write) -> Result<(), CliError> {
    let mut say = |s: &str| {
        let _ = out.write_all(s.as_bytes());
    };
    match &cli.command {
        Command::Ingest { bundle, force } => {
            let dir = ProjectDir::new(&cli.project);
            if dir.exists() && !force {
                return Err(CliError::Invalid(format!(
                    "{} already holds a project; pass --force to replace it",
                    cli.project.display()
                )));
            }
            let bytes = read_file(bundle)?;
            let id = cli
                .project
                .file_name()
                .and_then(|n| n.to_str())
                .unwrap_or("project")
                .to_string();
            let (project, b) = dir.create(&id, &bytes)?;
            say(&format!(
                "project {} at {}: {} sentences, {} speakers, {}\n",
                project.id,
                cli.project.display(),
                b.sentences.len(),
                b.speakers.len(),
                fmt_secs(b.duration.0)
            ));
        }
        Command::Synth(a) => {
            let spec = EpisodeSpec {
                sentences: a.sentences,
                ..EpisodeSpec::default()
            };
            let b = synth::episode_with(a.seed, &spec);
            write_file(&a.out, &serialize_feature_bundle(&b))?;
            say(&format!("wrote {} ({} sentences)\n", a.out.display(), b.sentences.len()));
            if let Some(root) = &a.assets {
                let io = |source| CliError::Io {
                    path: root.clone(),
                    source,
                };
                std::fs::create_dir_all(root).map_err(io)?;
                synth::write_placeholder_music(root, &load_library(cli.music_manifest.as_ref())?).map_err(io)?;
                synth::write_ppm(&root.join("logo.ppm"), 64, 64, [240, 240, 240]).map_err(io)?;
                say(&format!("wrote placeholder assets under {}\n", root.display()));
            }
        }
        Command::Keywords { backend } => {
            let s = Session::open(&cli.project)?;
            let be = backends(cli, *backend)?;
            for k in crate::workflow::keyword_suggestions(&s.bundle, &be.engine(*backend), *backend)? {
                say(&format!("{:<24} {:.3}\n", k.keyword, k.trend_score));
            }
        }
        Command::Extract(a) => {
            let mut s = Session::open(&cli.project)?;
            let page = match a.page {
                Some(n) if n > 0 => {
                    let be = backends(cli, s.project.backend)?;
                    s.project.page(&s.bundle, &be.engine(s.project.backend), n)?.0
                }
                _ => {
                    let length = TargetLength::try_from(a.length).map_err(CliError::Invalid)?;
                    let query = MomentQuery::new(length, a.speakers, a.style, a.keywords.clone());
                    let be = backends(cli, a.backend)?;
                    s.project.extract(&s.bundle, &be.engine(a.backend), query, a.backend)?
                }
            };
            s.save()?;
            say(&candidate_table(&page, page.page * teaser_core::extraction::PAGE_SIZE));
        }
        Command::Assemble(a) => {
            let mut s = Session::open(&cli.project)?;
            let moment = s.project.select(a.candidate)?;
            let ids = if a.sentences.is_empty() {
                moment.sentence_range.ids()
            } else {
                a.sentences.clone()
            };
            let summary = s.project.set_selection(&s.bundle, &ids, a.remove_fillers)?;
            s.save()?;
            let jump_cuts = s.project.transitions()?.jump_cuts;
            say(&format!(
                "{} sentences, {} segments, {}; jump cuts at {:?}\n",
                summary.sentence_ids.len(),
                summary.segments,
                fmt_secs(summary.duration_ms),
                jump_cuts.iter().map(|j| j.boundary).collect::<Vec<_>>()
            ));
        }
        Command::Produce(a) => produce(cli, a, &mut say)?,
        Command::Export(a) => {
            let s = Session::open(&cli.project)?;
            let profile = RenderProfile {
                asset_root: a.asset_root.clone(),
                burn_captions: a.burn_captions,
                ..RenderProfile::default()
            };
            let targets = [
                (&a.edl, ExportKind::Edl),
                (&a.srt, ExportKind::Srt),
                (&a.vtt, ExportKind::Vtt),
                (&a.render_script, ExportKind::RenderScript),
            ];
            if targets.iter().all(|(p, _)| p.is_none()) {
                return Err(CliError::Invalid("nothing to export; pass --edl, --srt, --vtt or --render-script".into()));
            }
            for (path, kind) in targets {
                if let Some(path) = path {
                    write_file(path, &s.project.export(&s.bundle, kind, &profile)?)?;
                    say(&format!("wrote {}\n", path.display()));
                }
            }
        }
        Command::Status => {
            let s = Session::open(&cli.project)?;
            say(&serde_json::to_string_pretty(&s.project).expect("project serializes"));
            say("\n");
        }
        Command::Eval(a) => {
            let single = read_annotations(read_file(&a.single)?.as_slice())?;
            let multi = read_annotations(read_file(&a.multi)?.as_slice())?;
            let md = accuracy_table(&single, &multi)?.to_markdown();
            if let Some(path) = &a.out {
                write_file(path, md.as_bytes())?;
            }
            say(&md);
        }
        Command::Serve(a) => serve(cli, a)?,
    }
    Ok(())
}

fn produce(cli: &Cli, a: &ProduceArgs, say: &mut dyn FnMut(&str)) -> Result<(), CliError> {
    let mut s = Session::open(&cli.project)?;
    let jump_cuts: Vec<usize> = s.project.transitions()?.jump_cuts.iter().map(|j| j.boundary).collect();
    let mut zoom = Vec::new();
    for z in &a.zoom {
        if z == "all" {
            zoom.extend(&jump_cuts);
        } else {
            zoom.push(z.parse::<usize>().map_err(|_| CliError::Invalid(format!("bad zoom boundary '{z}'")))?);
        }
    }
    for b in zoom {
        s.project.add_transition(&s.bundle, b, &TransitionRequest::Zoom { scale: a.zoom_scale })?;
    }
    for &b in &a.reaction {
        s.project.add_transition(&s.bundle, b, &TransitionRequest::Reaction { at_ms: None })?;
    }

    let be = backends(cli, s.project.backend)?;
    let music = s.project.set_music(
        &s.bundle,
        &be.engine(s.project.backend),
        &MusicRequest {
            style: a.music.clone(),
            emphasis_sentence: a.emphasis,
            track_id: None,
        },
    )?;

    let caption_style = match a.captions.trim().to_ascii_lowercase().as_str() {
        "none" | "off" => None,
        other => Some(other.parse::<CaptionStyle>().map_err(CliError::Invalid)?),
    };
    let logo = a.logo.as_ref().map(|image| LogoOverlay {
        corner: a.logo_corner,
        span: match a.logo_card_ms {
            Some(duration_ms) => LogoSpan::TrailingCard { duration_ms },
            None => LogoSpan::Full,
        },
        ..LogoOverlay::watermark(image.clone())
    });
    let finish = s.project.finish(
        &s.bundle,
        FinishSettings {
            aspect: a.aspect,
            caption_style,
            logo,
        },
    )?;
    s.save()?;

    match (&music.plan, &music.emphasis) {
        (Some(plan), Some(e)) => say(&format!(
            "music {} with its peak at {} (sentence {}, {:?}{})\n",
            plan.track_id,
            fmt_secs(plan.peak_timeline_start_ms),
            e.sentence_id,
            e.source,
            if e.degraded { ", degraded" } else { "" }
        )),
        _ => say("no music\n"),
    }
    say(&format!(
        "{} crop {:.4} wide, {} caption cues\n",
        finish.reframe.aspect,
        finish.reframe.crop_width,
        finish.captions.as_ref().map_or(0, |c| c.cues.len())
    ));
    Ok(())
}

fn serve(cli: &Cli, a: &ServeArgs) -> Result<(), CliError> {
    let mut config = ServiceConfig::from_env()?;
    if let Some(bind) = a.bind {
        config.bind_addr = bind;
    }
    if let Some(store) = &a.store {
        config.store_dir = store.clone();
    }
    if cli.music_manifest.is_some() {
        config.music_manifest = cli.music_manifest.clone();
    }
    let library = load_library(config.music_manifest.as_ref())?;
    let backends = Backends::from_env(library)?;
    let store = crate::store::ProjectStore::open(&config.store_dir)?;
    let state = crate::api::AppState::new(store, backends, config);
    let rt = tokio::runtime::Builder::new_multi_thread()
        .enable_all()
        .build()
        .map_err(|source| CliError::Io {
            path: PathBuf::from("<runtime>"),
            source,
        })?;
    rt.block_on(crate::api::serve(state)).map_err(|source| CliError::Io {
        path: PathBuf::from("<listener>"),
        source,
    })
}

fn init_logging(verbose: u8) {
    let level = match verbose {
        0 => tracing::Level::WARN,
        1 => tracing::Level::INFO,
        _ => tracing::Level::DEBUG,
    };
    let _ = tracing_subscriber::fmt()
        .with_writer(std::io::stderr)
        .with_max_level(level)
        .with_target(false)
        .try_init();
}

/// Parses `args`, runs the command and maps failures to exit codes.
pub fn main_with(args: impl IntoIterator<Item = std::ffi::OsString>) -> ExitCode {
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_VALIDATION } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    init_logging(cli.verbose);
    match run(&cli, &mut std::io::stdout()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
