use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use semgrasp::language::{MockLanguageModel, MockServer, MockVisionModel};
use semgrasp::pipeline::{
    exit_code, run_eval, run_partition, run_pipeline, write_atomic, BackendChoice, EvalConfig, Overrides,
    PipelineConfig, PipelineError, VisibilityChoice, GRASPS_FILE, PARTITION_FILE,
};
use semgrasp::Mode;

fn exit_codes_help() -> String {
    let mut s = String::from("Exit codes:\n");
    for (code, meaning) in exit_code::TABLE {
        s.push_str(&format!("  {code:>2}  {meaning}\n"));
    }
    s
}

#[derive(Parser)]
#[command(name = "semgrasp", version, about = "Part-aware grasp planning driven by language and vision models")]
#[command(after_help = exit_codes_help())]
struct Cli {
    /// More log output (-v info, -vv debug).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the full pipeline and write grasps.json, partition.txt and overlay.png.
    #[command(after_help = exit_codes_help())]
    Plan(PlanArgs),
    /// Build the similarity report from survey and frequency data.
    #[command(after_help = exit_codes_help())]
    Eval(EvalArgs),
    /// Label mesh faces as graspable or obstacle and dump the labels.
    #[command(after_help = exit_codes_help())]
    Partition(PlanArgs),
    /// Serve the mock language and vision fixtures over HTTP.
    MockServe(ServeArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Grasp,
    Avoid,
}

#[derive(Clone, Copy, ValueEnum)]
enum VisibilityArg {
    Silhouette,
    DepthBand,
}

#[derive(Clone, Copy, ValueEnum)]
enum BackendArg {
    Mock,
    Http,
}

impl From<BackendArg> for BackendChoice {
    fn from(b: BackendArg) -> Self {
        match b {
            BackendArg::Mock => BackendChoice::Mock,
            BackendArg::Http => BackendChoice::Http,
        }
    }
}

#[derive(Args)]
struct PlanArgs {
    /// Pipeline config (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Object label, e.g. "ice cream".
    #[arg(long)]
    object: Option<String>,
    #[arg(long, value_enum)]
    mode: Option<ModeArg>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    n_grasps: Option<usize>,
    #[arg(long, value_enum)]
    visibility: Option<VisibilityArg>,
    #[arg(long)]
    out_dir: Option<PathBuf>,
    #[arg(long, value_enum)]
    llm: Option<BackendArg>,
    #[arg(long, value_enum)]
    vlm: Option<BackendArg>,
    /// Chat-completions URL used with `--llm http`.
    #[arg(long)]
    llm_endpoint: Option<String>,
    /// Detection URL used with `--vlm http`.
    #[arg(long)]
    vlm_endpoint: Option<String>,
    /// Answer table used with `--llm mock`.
    #[arg(long)]
    llm_fixture: Option<PathBuf>,
    /// Box table used with `--vlm mock`.
    #[arg(long)]
    vlm_fixture: Option<PathBuf>,
    /// Always use "an" before the object label in the prompt.
    #[arg(long)]
    literal_template: bool,
}

impl PlanArgs {
    fn overrides(&self) -> Overrides {
        Overrides {
            object_label: self.object.clone(),
            mode: self.mode.map(|m| match m {
                ModeArg::Grasp => Mode::Grasp,
                ModeArg::Avoid => Mode::Avoid,
            }),
            rng_seed: self.seed,
            n_grasps: self.n_grasps,
            visibility: self.visibility.map(|v| match v {
                VisibilityArg::Silhouette => VisibilityChoice::Silhouette,
                VisibilityArg::DepthBand => VisibilityChoice::DepthBand,
            }),
            output_dir: self.out_dir.clone(),
            llm: self.llm.map(Into::into),
            vlm: self.vlm.map(Into::into),
            llm_endpoint: self.llm_endpoint.clone(),
            vlm_endpoint: self.vlm_endpoint.clone(),
            llm_fixture: self.llm_fixture.clone(),
            vlm_fixture: self.vlm_fixture.clone(),
            literal_template: self.literal_template,
        }
    }

    fn load(&self) -> Result<PipelineConfig, PipelineError> {
        let mut cfg = PipelineConfig::load(&self.config)?;
        cfg.apply(&self.overrides())?;
        Ok(cfg)
    }
}

#[derive(Args)]
struct EvalArgs {
    /// Evaluation config (TOML).
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    out_dir: Option<PathBuf>,
}

#[derive(Args)]
struct ServeArgs {
    /// Listen address; port 0 picks a free port.
    #[arg(long, default_value = "127.0.0.1:8765")]
    addr: String,
    #[arg(long)]
    llm_fixture: PathBuf,
    #[arg(long)]
    vlm_fixture: PathBuf,
}

fn plan(args: &PlanArgs) -> Result<(), PipelineError> {
    let cfg = args.load()?;
    let result = run_pipeline(&cfg)?;
    println!("part: {}", result.part_answer.part_label);
    let b = &result.bounding_box;
    println!("box: [{}, {}, {}, {}] score {}", b.x_min, b.y_min, b.x_max, b.y_max, b.confidence);
    println!("faces: {} graspable, {} obstacle", result.summary.graspable_faces, result.summary.obstacle_faces);
    println!("grasps: {}", result.grasps.len());
    for (stage, ms) in &result.timings {
        println!("time {stage}: {ms:.1} ms");
    }
    match cfg.output_path() {
        Some(dir) => println!("wrote {}", dir.join(GRASPS_FILE).display()),
        None => print!("{}", result.grasps.to_json(&cfg.fixture_id(), &cfg.gripper)),
    }
    Ok(())
}

fn partition(args: &PlanArgs) -> Result<(), PipelineError> {
    let cfg = args.load()?;
    let (_, partition) = run_partition(&cfg)?;
    let text = partition.to_label_text();
    match cfg.output_path() {
        Some(dir) => {
            let io = |e| PipelineError::Io { stage: semgrasp::pipeline::Stage::Output, source: e };
            std::fs::create_dir_all(&dir).map_err(io)?;
            write_atomic(&dir.join(PARTITION_FILE), text.as_bytes()).map_err(io)?;
            println!("{} graspable, {} obstacle", partition.graspable_count(), partition.obstacle_count());
        }
        None => print!("{text}"),
    }
    Ok(())
}

fn eval(args: &EvalArgs) -> Result<(), PipelineError> {
    let mut cfg = EvalConfig::load(&args.config)?;
    if let Some(dir) = &args.out_dir {
        let cwd = std::env::current_dir().unwrap_or_default();
        cfg.output_dir = Some(if dir.is_absolute() { dir.clone() } else { cwd.join(dir) });
    }
    let report = run_eval(&cfg)?;
    print!("{}", report.to_text().map_err(|e| PipelineError::Eval { stage: semgrasp::pipeline::Stage::Eval, source: e })?);
    Ok(())
}

fn serve(args: &ServeArgs) -> Result<(), PipelineError> {
    let lang = |e| PipelineError::Language { stage: semgrasp::pipeline::Stage::Load, source: e };
    let llm = MockLanguageModel::load(&args.llm_fixture).map_err(lang)?;
    let vlm = MockVisionModel::load(&args.vlm_fixture).map_err(lang)?;
    let server = MockServer::start(&args.addr, llm, vlm).map_err(lang)?;
    println!("chat: {}", server.chat_url());
    println!("detect: {}", server.detect_url());
    server.wait();
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    let outcome = match &cli.command {
        Command::Plan(a) => plan(a),
        Command::Eval(a) => eval(a),
        Command::Partition(a) => partition(a),
        Command::MockServe(a) => serve(a),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
