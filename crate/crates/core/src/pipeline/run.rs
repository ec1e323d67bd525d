use std::path::{Path, PathBuf};
use std::time::Instant;

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use super::config::PipelineConfig;
use super::overlay::render_overlay;
use super::{PipelineError, Stage};
use crate::evaluation::{
    build_report, deterministic_frequency, empirical_frequency, ingest_survey, load_frequencies, MethodFrequency,
    SimilarityReport, SurveyRecord,
};
use crate::geometry::{load_mesh, Bvh, MeshFormat, TriMesh};
use crate::language::{
    build_prompt, ground_part, query_part, ArticleStyle, ImageInput, LanguageModel, LlmConfig, PartAnswer, PartQuery,
};
use crate::planner::{sample_grasps, top_k, unrestricted_baseline, GraspSet};
use crate::projection::{partition_mesh, BoundingBox2D, CameraModel, RegionPartition};
use crate::Mode;

pub const GRASPS_FILE: &str = "grasps.json";
pub const PARTITION_FILE: &str = "partition.txt";
pub const OVERLAY_FILE: &str = "overlay.png";
pub const REPORT_TEXT_FILE: &str = "report.txt";
pub const REPORT_JSON_FILE: &str = "report.json";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PartitionSummary {
    pub graspable_faces: usize,
    pub obstacle_faces: usize,
}

/// Everything a `plan` run produced, before or after writing it out.
#[derive(Debug, Clone)]
pub struct PipelineResult {
    pub part_answer: PartAnswer,
    pub bounding_box: BoundingBox2D,
    pub partition: RegionPartition,
    pub summary: PartitionSummary,
    pub grasps: GraspSet,
    /// Wall time per stage in milliseconds, in execution order.
    pub timings: IndexMap<Stage, f64>,
}

/// Inputs loaded from disk, shared by the planning and baseline paths.
struct Scene {
    mesh: TriMesh,
    bvh: Bvh,
    camera: CameraModel,
    image: ImageInput,
}

fn load_scene(config: &PipelineConfig) -> Result<Scene, PipelineError> {
    let mesh_path = config.mesh_path();
    let format = MeshFormat::from_path(&mesh_path)
        .ok_or_else(|| PipelineError::Config(format!("unknown mesh format: {}", mesh_path.display())))?;
    let mesh = load_mesh(&mesh_path, format).map_err(|e| PipelineError::Geometry { stage: Stage::Load, source: e })?;
    let bvh = Bvh::build(&mesh);
    let camera =
        CameraModel::load(&config.camera_path()).map_err(|e| PipelineError::Partition { stage: Stage::Load, source: e })?;
    let image = image::open(config.image_path())
        .map_err(|e| PipelineError::Image { stage: Stage::Load, message: e.to_string() })?
        .to_rgb8();
    if image.width() != camera.width || image.height() != camera.height {
        return Err(PipelineError::Config(format!(
            "image is {}x{} but camera expects {}x{}",
            image.width(),
            image.height(),
            camera.width,
            camera.height
        )));
    }
    Ok(Scene { mesh, bvh, camera, image: ImageInput { id: config.image_id(), image } })
}

struct Clock {
    timings: IndexMap<Stage, f64>,
    last: Instant,
}

impl Clock {
    fn new() -> Self {
        Clock { timings: IndexMap::new(), last: Instant::now() }
    }

    fn lap(&mut self, stage: Stage) {
        let now = Instant::now();
        self.timings.insert(stage, (now - self.last).as_secs_f64() * 1e3);
        self.last = now;
    }
}

/// Prompt, ask, ground and partition: the part of the pipeline that decides
/// where grasping is allowed.
fn select_region(config: &PipelineConfig, scene: &Scene, clock: &mut Clock) -> Result<(PartAnswer, BoundingBox2D, RegionPartition), PipelineError> {
    let lang = |stage| move |e| PipelineError::Language { stage, source: e };
    let query = PartQuery::new(&config.object_label, config.mode).map_err(lang(Stage::Prompt))?;
    let prompt = build_prompt(&query, config.article_style()).map_err(lang(Stage::Prompt))?;
    clock.lap(Stage::Prompt);

    let base = &config.base_dir;
    let llm = config.backend.language_model(base).map_err(lang(Stage::Llm))?;
    let answer = query_part(llm.as_ref(), &prompt).map_err(lang(Stage::Llm))?;
    log::info!("{} part for `{}`: {}", mode_word(config.mode), config.object_label, answer.part_label);
    clock.lap(Stage::Llm);

    let vlm = config.backend.vision_model(base).map_err(lang(Stage::Vlm))?;
    let bx = ground_part(vlm.as_ref(), &scene.image, &answer.part_label, config.backend.detection_threshold)
        .map_err(lang(Stage::Vlm))?;
    clock.lap(Stage::Vlm);

    let partition = partition_mesh(&scene.mesh, &scene.bvh, &scene.camera, &bx, config.mode, config.visibility)
        .map_err(|e| PipelineError::Partition { stage: Stage::Partition, source: e })?;
    clock.lap(Stage::Partition);
    Ok((answer, bx, partition))
}

fn mode_word(mode: Mode) -> &'static str {
    match mode {
        Mode::Grasp => "grasp",
        Mode::Avoid => "avoid",
    }
}

/// Run every stage in memory without touching the output directory.
pub fn compute_pipeline(config: &PipelineConfig) -> Result<PipelineResult, PipelineError> {
    config.validate()?;
    let mut clock = Clock::new();
    let scene = load_scene(config)?;
    clock.lap(Stage::Load);
    let (part_answer, bounding_box, partition) = select_region(config, &scene, &mut clock)?;

    let sampled = sample_grasps(&scene.mesh, &scene.bvh, &partition, &config.gripper, config.n_grasps, config.rng_seed)
        .map_err(|e| PipelineError::Planner { stage: Stage::Sample, source: e })?;
    clock.lap(Stage::Sample);
    let grasps = top_k(&sampled, config.n_grasps);
    clock.lap(Stage::Rank);

    let summary = PartitionSummary { graspable_faces: partition.graspable_count(), obstacle_faces: partition.obstacle_count() };
    Ok(PipelineResult { part_answer, bounding_box, partition, summary, grasps, timings: clock.timings })
}

/// Run the pipeline and, if the config names an output directory, write
/// `grasps.json`, `partition.txt` and `overlay.png` there. Nothing is written
/// unless every stage succeeded.
pub fn run_pipeline(config: &PipelineConfig) -> Result<PipelineResult, PipelineError> {
    let mut result = compute_pipeline(config)?;
    if let Some(dir) = config.output_path() {
        let started = Instant::now();
        write_outputs(config, &result, &dir)?;
        result.timings.insert(Stage::Output, started.elapsed().as_secs_f64() * 1e3);
    }
    Ok(result)
}

fn write_outputs(config: &PipelineConfig, result: &PipelineResult, dir: &Path) -> Result<(), PipelineError> {
    let io = |e| PipelineError::Io { stage: Stage::Output, source: e };
    let camera = CameraModel::load(&config.camera_path()).map_err(|e| PipelineError::Partition { stage: Stage::Output, source: e })?;
    let image = image::open(config.image_path())
        .map_err(|e| PipelineError::Image { stage: Stage::Output, message: e.to_string() })?
        .to_rgb8();
    let overlay = render_overlay(&image, &result.bounding_box, &camera, &result.grasps)?;
    let mut png = Vec::new();
    overlay
        .write_to(&mut std::io::Cursor::new(&mut png), image::ImageFormat::Png)
        .map_err(|e| PipelineError::Image { stage: Stage::Output, message: e.to_string() })?;
    let json = result.grasps.to_json(&config.fixture_id(), &config.gripper);

    std::fs::create_dir_all(dir).map_err(io)?;
    write_atomic(&dir.join(GRASPS_FILE), json.as_bytes()).map_err(io)?;
    write_atomic(&dir.join(PARTITION_FILE), result.partition.to_label_text().as_bytes()).map_err(io)?;
    write_atomic(&dir.join(OVERLAY_FILE), &png).map_err(io)?;
    Ok(())
}

/// Write to a sibling temporary file and rename it into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> std::io::Result<()> {
    let name = path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
    let tmp = path.with_file_name(format!(".{name}.tmp{}", std::process::id()));
    std::fs::write(&tmp, bytes)?;
    std::fs::rename(&tmp, path).inspect_err(|_| {
        let _ = std::fs::remove_file(&tmp);
    })
}

/// Label faces for the configured object and box without sampling grasps.
pub fn run_partition(config: &PipelineConfig) -> Result<(BoundingBox2D, RegionPartition), PipelineError> {
    config.validate()?;
    let scene = load_scene(config)?;
    let (_, bx, partition) = select_region(config, &scene, &mut Clock::new())?;
    Ok((bx, partition))
}

/// Region-a frequency of the part-agnostic sampler for one configured
/// object: the region comes from the language/vision stages, the grasps from
/// sampling the whole mesh.
pub fn measure_baseline(config: &PipelineConfig, method: &str) -> Result<MethodFrequency, PipelineError> {
    config.validate()?;
    let scene = load_scene(config)?;
    let (_, _, partition) = select_region(config, &scene, &mut Clock::new())?;
    let grasps = unrestricted_baseline(&scene.mesh, &scene.bvh, &config.gripper, config.n_grasps, config.rng_seed)
        .map_err(|e| PipelineError::Planner { stage: Stage::Sample, source: e })?;
    empirical_frequency(&top_k(&grasps, config.n_grasps), &partition, &config.object_label, method)
        .map_err(|e| PipelineError::Eval { stage: Stage::Eval, source: e })
}

/// Column for a pipeline whose grasps always land on the part it names.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DeterministicSource {
    pub method: String,
    pub llm: LlmConfig,
    #[serde(default = "default_grasps")]
    pub n_grasps: u32,
    #[serde(default)]
    pub literal_template: bool,
}

/// Column measured by running the unrestricted sampler on configured scenes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeasuredSource {
    pub method: String,
    pub pipelines: Vec<PathBuf>,
}

fn default_grasps() -> u32 {
    20
}

/// Inputs of an `eval` run; relative paths resolve against `base_dir`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvalConfig {
    pub survey: PathBuf,
    /// Frequency tables (`object,method,p_a,n_grasps,provenance`).
    #[serde(default)]
    pub frequencies: Vec<PathBuf>,
    #[serde(default)]
    pub deterministic: Vec<DeterministicSource>,
    #[serde(default)]
    pub measured: Vec<MeasuredSource>,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
    #[serde(skip)]
    pub base_dir: PathBuf,
}

impl EvalConfig {
    pub fn load(path: &Path) -> Result<Self, PipelineError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| PipelineError::Config(format!("cannot read {}: {e}", path.display())))?;
        let mut cfg: EvalConfig = toml::from_str(&text).map_err(|e| PipelineError::Config(e.to_string()))?;
        cfg.base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok(cfg)
    }

    fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base_dir.join(p)
        }
    }
}

/// Frequencies of a deterministic part-naming pipeline: ask the language
/// model for each surveyed object's grasp part and score 1 or 0.
pub fn deterministic_frequencies(
    survey: &[SurveyRecord],
    llm: &dyn LanguageModel,
    method: &str,
    n_grasps: u32,
    style: ArticleStyle,
) -> Result<Vec<MethodFrequency>, PipelineError> {
    let lang = |e| PipelineError::Language { stage: Stage::Llm, source: e };
    survey
        .iter()
        .map(|rec| {
            let query = PartQuery::new(&rec.object_label, Mode::Grasp).map_err(lang)?;
            let prompt = build_prompt(&query, style).map_err(lang)?;
            let answer = query_part(llm, &prompt).map_err(lang)?;
            deterministic_frequency(rec, &answer.part_label, method, n_grasps)
                .map_err(|e| PipelineError::Eval { stage: Stage::Eval, source: e })
        })
        .collect()
}

/// Build the similarity report and, if an output directory is set, write
/// `report.txt` and `report.json`.
pub fn run_eval(config: &EvalConfig) -> Result<SimilarityReport, PipelineError> {
    let eval = |e| PipelineError::Eval { stage: Stage::Eval, source: e };
    let survey = ingest_survey(&config.resolve(&config.survey)).map_err(eval)?;
    let mut freqs = Vec::new();
    for path in &config.frequencies {
        freqs.extend(load_frequencies(&config.resolve(path)).map_err(eval)?);
    }
    for src in &config.deterministic {
        let llm = src
            .llm
            .build(&config.base_dir, std::time::Duration::from_secs(30), 2)
            .map_err(|e| PipelineError::Language { stage: Stage::Llm, source: e })?;
        let style = if src.literal_template { ArticleStyle::Literal } else { ArticleStyle::ByVowel };
        freqs.extend(deterministic_frequencies(&survey, llm.as_ref(), &src.method, src.n_grasps, style)?);
    }
    for src in &config.measured {
        for p in &src.pipelines {
            let cfg = PipelineConfig::load(&config.resolve(p))?;
            freqs.push(measure_baseline(&cfg, &src.method)?);
        }
    }
    let report = build_report(&survey, &freqs).map_err(eval)?;
    let text = report.to_text().map_err(eval)?;
    let json = report.to_json().map_err(eval)?;
    if let Some(dir) = &config.output_dir {
        let dir = config.resolve(dir);
        let io = |e| PipelineError::Io { stage: Stage::Output, source: e };
        std::fs::create_dir_all(&dir).map_err(io)?;
        write_atomic(&dir.join(REPORT_TEXT_FILE), text.as_bytes()).map_err(io)?;
        write_atomic(&dir.join(REPORT_JSON_FILE), json.as_bytes()).map_err(io)?;
    }
    Ok(report)
}
