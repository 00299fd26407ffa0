//! One directory per project holding `project.json` and `bundle.json`.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use teaser_core::model::{parse_feature_bundle, serialize_feature_bundle, BundleError, FeatureBundle};

use crate::workflow::TeaserProject;

pub const PROJECT_FILE: &str = "project.json";
pub const BUNDLE_FILE: &str = "bundle.json";

#[derive(Debug, thiserror::Error)]
pub enum StoreError {
    #[error("project {0} not found")]
    NotFound(String),
    #[error("invalid feature bundle: {0}")]
    Bundle(#[from] BundleError),
    #[error("corrupt project file {path}: {message}")]
    Corrupt { path: PathBuf, message: String },
    #[error("store i/o on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> StoreError + '_ {
    move |source| StoreError::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Writes through a temporary file so readers never see a partial document.
fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), StoreError> {
    let tmp = path.with_extension("json.tmp");
    fs::write(&tmp, bytes).map_err(io_err(&tmp))?;
    fs::rename(&tmp, path).map_err(io_err(path))
}

/// A single project directory, as used by the command line.
#[derive(Debug, Clone)]
pub struct ProjectDir {
    pub path: PathBuf,
}

impl ProjectDir {
    pub fn new(path: impl Into<PathBuf>) -> Self {
        ProjectDir { path: path.into() }
    }

    pub fn exists(&self) -> bool {
        self.path.join(PROJECT_FILE).is_file()
    }

    /// Validates the bundle and starts a fresh project in this directory.
    pub fn create(&self, id: &str, bundle_bytes: &[u8]) -> Result<(TeaserProject, FeatureBundle), StoreError> {
        let bundle = parse_feature_bundle(bundle_bytes)?;
        fs::create_dir_all(&self.path).map_err(io_err(&self.path))?;
        let project = TeaserProject::new(id, &bundle);
        write_atomic(&self.path.join(BUNDLE_FILE), &serialize_feature_bundle(&bundle))?;
        self.save(&project)?;
        Ok((project, bundle))
    }

    pub fn load(&self) -> Result<TeaserProject, StoreError> {
        let path = self.path.join(PROJECT_FILE);
        let bytes = match fs::read(&path) {
            Ok(b) => b,
            Err(e) if e.kind() == io::ErrorKind::NotFound => {
                return Err(StoreError::NotFound(self.path.display().to_string()))
            }
            Err(e) => return Err(io_err(&path)(e)),
        };
        serde_json::from_slice(&bytes).map_err(|e| StoreError::Corrupt {
            path,
            message: e.to_string(),
        })
    }

    pub fn bundle(&self) -> Result<FeatureBundle, StoreError> {
        let path = self.path.join(BUNDLE_FILE);
        let bytes = fs::read(&path).map_err(io_err(&path))?;
        Ok(parse_feature_bundle(&bytes)?)
    }

    pub fn save(&self, project: &TeaserProject) -> Result<(), StoreError> {
        let mut bytes = serde_json::to_vec_pretty(project).expect("project serializes");
        bytes.push(b'\n');
        write_atomic(&self.path.join(PROJECT_FILE), &bytes)
    }
}

/// Many projects under one root, keyed by id.
#[derive(Debug)]
pub struct ProjectStore {
    root: PathBuf,
    create_lock: Mutex<()>,
}

impl ProjectStore {
    pub fn open(root: impl Into<PathBuf>) -> Result<Self, StoreError> {
        let root = root.into();
        fs::create_dir_all(&root).map_err(io_err(&root))?;
        Ok(ProjectStore {
            root,
            create_lock: Mutex::new(()),
        })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    fn valid_id(id: &str) -> bool {
        !id.is_empty() && id.chars().all(|c| c.is_ascii_alphanumeric() || c == '-')
    }

    pub fn dir(&self, id: &str) -> Result<ProjectDir, StoreError> {
        if !Self::valid_id(id) {
            return Err(StoreError::NotFound(id.to_string()));
        }
        let dir = ProjectDir::new(self.root.join(id));
        if !dir.exists() {
            return Err(StoreError::NotFound(id.to_string()));
        }
        Ok(dir)
    }

    /// Allocates the next `p<n>` id and writes the new project.
    pub fn create(&self, bundle_bytes: &[u8]) -> Result<(TeaserProject, FeatureBundle), StoreError> {
        // validate before taking an id
        parse_feature_bundle(bundle_bytes)?;
        let _guard = self.create_lock.lock().unwrap_or_else(|e| e.into_inner());
        let next = fs::read_dir(&self.root)
            .map_err(io_err(&self.root))?
            .filter_map(|e| e.ok())
            .filter_map(|e| e.file_name().to_str()?.strip_prefix('p')?.parse::<u64>().ok())
            .max()
            .unwrap_or(0)
            + 1;
        let id = format!("p{next}");
        ProjectDir::new(self.root.join(&id)).create(&id, bundle_bytes)
    }
}
