use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::PipelineError;
use crate::language::{ArticleStyle, BackendConfig, LlmConfig, VlmConfig};
use crate::planner::GripperModel;
use crate::projection::{Visibility, DEFAULT_DEPTH_BAND};
use crate::Mode;

fn default_n_grasps() -> usize {
    20
}

/// Everything one `plan` run needs. Relative paths are resolved against the
/// directory of the file the config was loaded from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    pub object_label: String,
    #[serde(default)]
    pub mode: Mode,
    pub mesh: PathBuf,
    pub image: PathBuf,
    pub camera: PathBuf,
    #[serde(default)]
    pub visibility: Visibility,
    #[serde(default)]
    pub gripper: GripperModel,
    #[serde(default = "default_n_grasps")]
    pub n_grasps: usize,
    #[serde(default)]
    pub rng_seed: u64,
    pub backend: BackendConfig,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
    /// Identifier written into the grasp file header; defaults to the mesh
    /// file stem.
    #[serde(default)]
    pub fixture_id: Option<String>,
    /// Always write "an" before the object label in prompts.
    #[serde(default)]
    pub literal_template: bool,
    #[serde(skip)]
    pub base_dir: PathBuf,
}

/// Command-line overrides; every `Some` field replaces the config value.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub object_label: Option<String>,
    pub mode: Option<Mode>,
    pub rng_seed: Option<u64>,
    pub n_grasps: Option<usize>,
    pub visibility: Option<VisibilityChoice>,
    pub output_dir: Option<PathBuf>,
    pub llm: Option<BackendChoice>,
    pub vlm: Option<BackendChoice>,
    pub llm_endpoint: Option<String>,
    pub vlm_endpoint: Option<String>,
    pub llm_fixture: Option<PathBuf>,
    pub vlm_fixture: Option<PathBuf>,
    pub literal_template: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VisibilityChoice {
    Silhouette,
    DepthBand,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BackendChoice {
    Mock,
    Http,
}

fn resolve(base: &Path, p: &Path) -> PathBuf {
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        base.join(p)
    }
}

impl PipelineConfig {
    pub fn from_toml(text: &str, base_dir: &Path) -> Result<Self, PipelineError> {
        let mut cfg: PipelineConfig = toml::from_str(text).map_err(|e| PipelineError::Config(e.to_string()))?;
        cfg.base_dir = base_dir.to_path_buf();
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, PipelineError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| PipelineError::Config(format!("cannot read {}: {e}", path.display())))?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Self::from_toml(&text, &base)
    }

    pub fn mesh_path(&self) -> PathBuf {
        resolve(&self.base_dir, &self.mesh)
    }

    pub fn image_path(&self) -> PathBuf {
        resolve(&self.base_dir, &self.image)
    }

    pub fn camera_path(&self) -> PathBuf {
        resolve(&self.base_dir, &self.camera)
    }

    pub fn output_path(&self) -> Option<PathBuf> {
        self.output_dir.as_ref().map(|p| resolve(&self.base_dir, p))
    }

    pub fn fixture_id(&self) -> String {
        self.fixture_id.clone().unwrap_or_else(|| {
            self.mesh.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "mesh".into())
        })
    }

    /// Identifier handed to the vision model: the image file stem.
    pub fn image_id(&self) -> String {
        self.image.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default()
    }

    pub fn article_style(&self) -> ArticleStyle {
        if self.literal_template {
            ArticleStyle::Literal
        } else {
            ArticleStyle::ByVowel
        }
    }

    /// Apply command-line overrides. Overrides are relative to the current
    /// directory, not the config file.
    pub fn apply(&mut self, o: &Overrides) -> Result<(), PipelineError> {
        let cwd = std::env::current_dir().unwrap_or_default();
        let rebase = |p: &Path| if p.is_absolute() { p.to_path_buf() } else { cwd.join(p) };
        if let Some(v) = &o.object_label {
            self.object_label = v.clone();
        }
        if let Some(v) = o.mode {
            self.mode = v;
        }
        if let Some(v) = o.rng_seed {
            self.rng_seed = v;
        }
        if let Some(v) = o.n_grasps {
            self.n_grasps = v;
        }
        match o.visibility {
            Some(VisibilityChoice::Silhouette) => self.visibility = Visibility::Silhouette,
            Some(VisibilityChoice::DepthBand) if !matches!(self.visibility, Visibility::DepthBand { .. }) => {
                self.visibility = Visibility::DepthBand { delta: DEFAULT_DEPTH_BAND }
            }
            _ => {}
        }
        if let Some(v) = &o.output_dir {
            self.output_dir = Some(rebase(v));
        }
        if o.literal_template {
            self.literal_template = true;
        }

        let llm = o.llm.unwrap_or(match self.backend.llm {
            LlmConfig::Mock { .. } => BackendChoice::Mock,
            LlmConfig::Http { .. } => BackendChoice::Http,
        });
        self.backend.llm = match (llm, &self.backend.llm) {
            (BackendChoice::Mock, current) => match (&o.llm_fixture, current) {
                (Some(f), _) => LlmConfig::Mock { fixture: rebase(f) },
                (None, LlmConfig::Mock { .. }) => current.clone(),
                (None, _) => return Err(PipelineError::Config("--llm mock needs --llm-fixture".into())),
            },
            (BackendChoice::Http, current) => match (&o.llm_endpoint, current) {
                (Some(e), LlmConfig::Http { model, token_env, .. }) => {
                    LlmConfig::Http { endpoint: e.clone(), model: model.clone(), token_env: token_env.clone() }
                }
                (Some(e), _) => LlmConfig::Http { endpoint: e.clone(), model: "gpt-4".into(), token_env: None },
                (None, LlmConfig::Http { .. }) => current.clone(),
                (None, _) => return Err(PipelineError::Config("--llm http needs --llm-endpoint".into())),
            },
        };

        let vlm = o.vlm.unwrap_or(match self.backend.vlm {
            VlmConfig::Mock { .. } => BackendChoice::Mock,
            VlmConfig::Http { .. } => BackendChoice::Http,
        });
        self.backend.vlm = match (vlm, &self.backend.vlm) {
            (BackendChoice::Mock, current) => match (&o.vlm_fixture, current) {
                (Some(f), _) => VlmConfig::Mock { fixture: rebase(f) },
                (None, VlmConfig::Mock { .. }) => current.clone(),
                (None, _) => return Err(PipelineError::Config("--vlm mock needs --vlm-fixture".into())),
            },
            (BackendChoice::Http, current) => match (&o.vlm_endpoint, current) {
                (Some(e), VlmConfig::Http { token_env, .. }) => VlmConfig::Http { endpoint: e.clone(), token_env: token_env.clone() },
                (Some(e), _) => VlmConfig::Http { endpoint: e.clone(), token_env: None },
                (None, VlmConfig::Http { .. }) => current.clone(),
                (None, _) => return Err(PipelineError::Config("--vlm http needs --vlm-endpoint".into())),
            },
        };
        Ok(())
    }

    /// Check the referenced files exist and every parameter is in range.
    pub fn validate(&self) -> Result<(), PipelineError> {
        for (what, path) in [("mesh", self.mesh_path()), ("image", self.image_path()), ("camera", self.camera_path())] {
            if !path.is_file() {
                return Err(PipelineError::Config(format!("{what} file {} does not exist", path.display())));
            }
        }
        let llm_fixture = match &self.backend.llm {
            LlmConfig::Mock { fixture } => Some(("llm", fixture)),
            LlmConfig::Http { .. } => None,
        };
        let vlm_fixture = match &self.backend.vlm {
            VlmConfig::Mock { fixture } => Some(("vlm", fixture)),
            VlmConfig::Http { .. } => None,
        };
        for (what, fixture) in llm_fixture.into_iter().chain(vlm_fixture) {
            let p = resolve(&self.base_dir, fixture);
            if !p.is_file() {
                return Err(PipelineError::Config(format!("{what} fixture {} does not exist", p.display())));
            }
        }
        if self.n_grasps == 0 {
            return Err(PipelineError::Config("n_grasps must be at least 1".into()));
        }
        if let Visibility::DepthBand { delta } = self.visibility {
            if !(delta >= 0.0 && delta.is_finite()) {
                return Err(PipelineError::Config("depth band must be non-negative".into()));
            }
        }
        self.gripper.validate().map_err(|e| PipelineError::Config(e.to_string()))?;
        self.backend.validate().map_err(|e| PipelineError::Config(e.to_string()))?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const CFG: &str = r#"
object_label = "mug"
mesh = "meshes/mug.obj"
image = "images/mug.png"
camera = "cameras/mug.toml"
rng_seed = 42

[backend.llm]
kind = "mock"
fixture = "llm_parts.csv"

[backend.vlm]
kind = "mock"
fixture = "vlm_boxes.csv"
"#;

    #[test]
    fn defaults_and_resolution() {
        let cfg = PipelineConfig::from_toml(CFG, Path::new("/data/fx")).unwrap();
        assert_eq!(cfg.n_grasps, 20);
        assert_eq!(cfg.mode, Mode::Grasp);
        assert_eq!(cfg.visibility, Visibility::Silhouette);
        assert_eq!(cfg.gripper, GripperModel::default());
        assert_eq!(cfg.mesh_path(), PathBuf::from("/data/fx/meshes/mug.obj"));
        assert_eq!(cfg.fixture_id(), "mug");
        assert_eq!(cfg.image_id(), "mug");
        assert!(cfg.output_path().is_none());
    }

    #[test]
    fn unknown_keys_rejected() {
        assert!(PipelineConfig::from_toml(&format!("bogus = 1\n{CFG}"), Path::new(".")).is_err());
    }

    #[test]
    fn flags_win() {
        let mut cfg = PipelineConfig::from_toml(CFG, Path::new("/data/fx")).unwrap();
        let o = Overrides {
            object_label: Some("teapot".into()),
            mode: Some(Mode::Avoid),
            rng_seed: Some(7),
            n_grasps: Some(5),
            visibility: Some(VisibilityChoice::DepthBand),
            llm: Some(BackendChoice::Http),
            llm_endpoint: Some("http://127.0.0.1:9/v1/chat/completions".into()),
            literal_template: true,
            ..Default::default()
        };
        cfg.apply(&o).unwrap();
        assert_eq!(cfg.object_label, "teapot");
        assert_eq!(cfg.mode, Mode::Avoid);
        assert_eq!((cfg.rng_seed, cfg.n_grasps), (7, 5));
        assert_eq!(cfg.visibility, Visibility::DepthBand { delta: DEFAULT_DEPTH_BAND });
        assert!(matches!(cfg.backend.llm, LlmConfig::Http { .. }));
        assert!(matches!(cfg.backend.vlm, VlmConfig::Mock { .. }));
        assert_eq!(cfg.article_style(), ArticleStyle::Literal);
    }

    #[test]
    fn switching_backend_needs_its_parameter() {
        let mut cfg = PipelineConfig::from_toml(CFG, Path::new("/data/fx")).unwrap();
        let o = Overrides { vlm: Some(BackendChoice::Http), ..Default::default() };
        assert!(matches!(cfg.apply(&o), Err(PipelineError::Config(_))));
    }

    #[test]
    fn missing_mesh_fails_validation() {
        let cfg = PipelineConfig::from_toml(CFG, Path::new("/nonexistent")).unwrap();
        let err = cfg.validate().unwrap_err();
        assert!(err.to_string().contains("mesh"), "{err}");
    }
}
