//! `tjunction`: simulate, featurize, curate, train and evaluate.
//!
//! Every command writes its artifact plus `<out>.manifest.json`. Exit codes:
//! 0 success, 1 invalid input, 2 file-system failure.

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::Serialize;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{SystemTime, UNIX_EPOCH};
use tjunction::analysis::{
    average_voronoi_map, fd_to_csv, fundamental_diagram, VoronoiGrid, DEFAULT_VORONOI_CELL,
};
use tjunction::floorfield::{travel_time_field, FloorFieldParams};
use tjunction::forest::ForestParams;
use tjunction::heatmap::{
    build_dataset, dedup_consecutive, default_equal_cap, distribution_report, format_distribution,
    rebalance_equal, Dataset, GridMeta, DEFAULT_CELL, DEFAULT_SIGMA,
};
use tjunction::ingest::{
    assign_origins, parse_trajectories, read_trajectory_file, write_trajectory_file, Source,
    TrajectoryMeta, TrajectorySet, Units,
};
use tjunction::pipeline::{run_experiment, train_origin_models, Mode};
use tjunction::scenario::{
    build_tjunction, observation_area_preset, preset, scenario_presets, ScenarioConfig,
};
use tjunction::simulator::{run_simulation, SimParams};

#[derive(Parser)]
#[command(name = "tjunction", version, about = "Origin distributions from density heatmaps at a T-junction")]
struct Cli {
    /// Worker threads for parallel steps (default: all cores). Results do
    /// not depend on this value.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the crowd simulation and write trajectory files.
    Simulate(SimulateArgs),
    /// Normalize an experiment trajectory file and label origins.
    Ingest(IngestArgs),
    /// Turn a directory of trajectory files into a heatmap dataset.
    Featurize(FeaturizeArgs),
    /// Drop duplicate heatmaps and thin out the 50/50 label.
    Curate(CurateArgs),
    /// Train the left and right origin forests.
    Train(TrainArgs),
    /// Repeated split/train/test runs in sim, exp or hybrid mode.
    Evaluate(EvaluateArgs),
    /// Voronoi density map or fundamental diagram of a trajectory file.
    Analyze(AnalyzeArgs),
    /// Tables derived from a dataset.
    Report(ReportArgs),
    /// Export scenario geometry as JSON, or list the presets.
    Scenario(ScenarioArgs),
    /// Export the navigation field as CSV.
    Field(FieldArgs),
}

#[derive(Args, Clone)]
struct ScenarioSource {
    /// Preset layout name (e.g. 240-80-240), or `all` where supported.
    #[arg(long, conflicts_with = "config")]
    preset: Option<String>,
    /// Scenario config file (.toml or .json) with ScenarioConfig keys.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct SimulateArgs {
    #[command(flatten)]
    scenario: ScenarioSource,
    #[arg(long)]
    agents: Option<usize>,
    #[arg(long)]
    split_left: Option<f64>,
    /// Comma-separated left fractions assigned to runs in turn, counting
    /// across all presets; overrides --split-left.
    #[arg(long, value_delimiter = ',')]
    split_cycle: Vec<f64>,
    /// Runs per scenario.
    #[arg(long, default_value_t = 1)]
    runs: usize,
    /// Seed of the first run; run i uses seed + i.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Time headway of the step-length cap in s (0 disables it).
    #[arg(long)]
    time_gap: Option<f64>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum UnitArg {
    Cm,
    M,
}

#[derive(Args)]
struct IngestArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long, value_enum, default_value = "cm")]
    units: UnitArg,
    #[arg(long, default_value_t = 16.0)]
    fps: f64,
    /// Half-width of the centerline band whose pedestrians stay unlabeled.
    #[arg(long, default_value_t = 0.1)]
    epsilon_x: f64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct FeaturizeArgs {
    /// Directory of trajectory files (`*.txt` with optional sidecars).
    #[arg(long = "in")]
    input: PathBuf,
    /// Observation area: 1 (2.4 m x 1 m) or 2 (2.4 m x 2 m).
    #[arg(long, default_value_t = 1)]
    area: u8,
    #[arg(long, default_value_t = DEFAULT_SIGMA)]
    sigma: f64,
    #[arg(long, default_value_t = DEFAULT_CELL)]
    cell: f64,
    #[arg(long, default_value_t = 1)]
    stride: usize,
    /// Frame rate assumed for files without a sidecar.
    #[arg(long, default_value_t = 16.0)]
    fps: f64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct CurateArgs {
    #[arg(long = "in")]
    input: PathBuf,
    /// Remove heatmaps identical to the previous kept one of the same run.
    #[arg(long)]
    dedup: bool,
    /// Keep at most N samples with the 50/50 label.
    #[arg(long, conflicts_with = "rebalance")]
    cap_equal: Option<usize>,
    /// Cap the 50/50 label at the largest count of any other label.
    #[arg(long)]
    rebalance: bool,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Clone)]
struct ForestArgs {
    #[arg(long, default_value_t = 50)]
    trees: usize,
    /// Features tried per split (default: ceil(features / 3)).
    #[arg(long)]
    mtry: Option<usize>,
    #[arg(long, default_value_t = 5)]
    min_leaf: usize,
}

impl ForestArgs {
    fn params(&self, seed: u64) -> ForestParams {
        ForestParams {
            n_trees: self.trees,
            mtry: self.mtry,
            min_leaf: self.min_leaf,
            seed,
        }
    }
}

#[derive(Args)]
struct TrainArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[command(flatten)]
    forest: ForestArgs,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Sim,
    Exp,
    Hybrid,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Mode {
        match m {
            ModeArg::Sim => Mode::Sim,
            ModeArg::Exp => Mode::Exp,
            ModeArg::Hybrid => Mode::Hybrid,
        }
    }
}

#[derive(Args)]
struct EvaluateArgs {
    #[arg(long, value_enum)]
    mode: ModeArg,
    #[arg(long)]
    train: PathBuf,
    /// Test dataset; required in hybrid mode, ignored otherwise.
    #[arg(long)]
    test: Option<PathBuf>,
    #[arg(long, default_value_t = 5)]
    runs: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    forest: ForestArgs,
    /// CSV report; the table goes to stdout.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum AnalysisKind {
    Voronoi,
    Fd,
}

#[derive(Args)]
struct AnalyzeArgs {
    #[arg(value_enum)]
    kind: AnalysisKind,
    #[arg(long = "in")]
    input: PathBuf,
    /// Measurement area: 0 left arm, 1 right arm, 2 exit corridor.
    #[arg(long, default_value_t = 2)]
    area_id: usize,
    /// Layout the file was recorded in (default: the sidecar's config, else 240-240-240).
    #[command(flatten)]
    scenario: ScenarioSource,
    #[arg(long, default_value_t = DEFAULT_VORONOI_CELL)]
    cell: f64,
    #[arg(long, default_value_t = 16.0)]
    fps: f64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum ReportKind {
    Distributions,
}

#[derive(Args)]
struct ReportArgs {
    #[arg(value_enum)]
    kind: ReportKind,
    #[arg(long = "in")]
    input: PathBuf,
    /// Also write the table to this file.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ScenarioArgs {
    #[command(flatten)]
    scenario: ScenarioSource,
    /// Print the preset names and exit.
    #[arg(long)]
    list: bool,
    #[arg(long, required_unless_present = "list")]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct FieldArgs {
    #[command(flatten)]
    scenario: ScenarioSource,
    #[arg(long, default_value_t = 0.3)]
    w_obs: f64,
    #[arg(long, default_value_t = 0.1)]
    h: f64,
    #[arg(long)]
    out: PathBuf,
}

enum Failure {
    Invalid(String),
    Io(String),
}

impl From<tjunction::Error> for Failure {
    fn from(e: tjunction::Error) -> Self {
        if e.is_io() {
            Failure::Io(e.to_string())
        } else {
            Failure::Invalid(e.to_string())
        }
    }
}

fn invalid(msg: impl Into<String>) -> Failure {
    Failure::Invalid(msg.into())
}

fn io_err(path: &Path, e: std::io::Error) -> Failure {
    Failure::Io(format!("{}: {e}", path.display()))
}

type CmdResult<T = ()> = Result<T, Failure>;

#[derive(Serialize)]
struct Manifest {
    tool: &'static str,
    version: &'static str,
    command: Vec<String>,
    config: serde_json::Value,
    seeds: Vec<u64>,
    inputs: Vec<PathBuf>,
    outputs: Vec<PathBuf>,
    started_unix: u64,
    finished_unix: u64,
}

fn unix_now() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}

struct Recorder {
    started: u64,
    config: serde_json::Value,
    seeds: Vec<u64>,
    inputs: Vec<PathBuf>,
    outputs: Vec<PathBuf>,
}

impl Recorder {
    fn new() -> Self {
        Recorder {
            started: unix_now(),
            config: serde_json::Value::Null,
            seeds: Vec::new(),
            inputs: Vec::new(),
            outputs: Vec::new(),
        }
    }

    /// Writes `<out>.manifest.json` next to the primary output.
    fn finish(self, primary: &Path) -> CmdResult {
        let m = Manifest {
            tool: "tjunction",
            version: env!("CARGO_PKG_VERSION"),
            command: std::env::args().collect(),
            config: self.config,
            seeds: self.seeds,
            inputs: self.inputs,
            outputs: self.outputs,
            started_unix: self.started,
            finished_unix: unix_now(),
        };
        let mut name = primary.as_os_str().to_owned();
        name.push(".manifest.json");
        let path = PathBuf::from(name);
        let json = serde_json::to_string_pretty(&m).expect("manifest serializes");
        std::fs::write(&path, json + "\n").map_err(|e| io_err(&path, e))
    }
}

fn write_text(path: &Path, text: &str) -> CmdResult {
    std::fs::write(path, text).map_err(|e| io_err(path, e))
}

fn scenario_configs(src: &ScenarioSource) -> CmdResult<Vec<ScenarioConfig>> {
    match (&src.preset, &src.config) {
        (_, Some(path)) => Ok(vec![ScenarioConfig::from_file(path)?]),
        (Some(name), None) if name == "all" => Ok(scenario_presets()),
        (Some(name), None) => preset(name).map(|c| vec![c]).ok_or_else(|| {
            let names: Vec<String> = scenario_presets().into_iter().map(|c| c.name).collect();
            invalid(format!("unknown preset `{name}` (known: {}, all)", names.join(", ")))
        }),
        (None, None) => Err(invalid("give --preset NAME or --config FILE")),
    }
}

fn single_config(src: &ScenarioSource) -> CmdResult<ScenarioConfig> {
    let mut v = scenario_configs(src)?;
    if v.len() != 1 {
        return Err(invalid("this command takes a single scenario, not `all`"));
    }
    Ok(v.remove(0))
}

fn simulate(a: &SimulateArgs, rec: &mut Recorder) -> CmdResult {
    if a.runs == 0 {
        return Err(invalid("--runs must be at least 1"));
    }
    let mut params = SimParams::default();
    if let Some(t) = a.time_gap {
        params.time_gap = t;
    }
    params.validate()?;
    let mut jobs = Vec::new();
    for base in scenario_configs(&a.scenario)? {
        for k in 0..a.runs {
            let i = jobs.len();
            let mut c = base.clone();
            c.name = if a.runs > 1 { format!("{}-{}", base.name, k + 1) } else { base.name.clone() };
            c.seed = a.seed + i as u64;
            if let Some(n) = a.agents {
                c.agent_count = n;
            }
            if !a.split_cycle.is_empty() {
                c.split_left = a.split_cycle[i % a.split_cycle.len()];
            } else if let Some(s) = a.split_left {
                c.split_left = s;
            }
            c.validate()?;
            jobs.push(c);
        }
    }
    std::fs::create_dir_all(&a.out).map_err(|e| io_err(&a.out, e))?;
    if jobs.iter().any(|c| c.agent_count == 0) {
        eprintln!("warning: zero agents, trajectory files will be empty");
    }
    let outcomes: Vec<_> = jobs
        .par_iter()
        .map(|c| run_simulation(c, &params).map(|o| (c, o)))
        .collect::<Result<_, _>>()?;
    for (c, o) in &outcomes {
        let path = a.out.join(format!("{}.txt", c.name));
        let mut meta = TrajectoryMeta::for_set(&o.trajectories);
        meta.seed = Some(c.seed);
        meta.split_left = Some(c.split_left);
        meta.config = Some((*c).clone());
        meta.unfinished = o.unfinished;
        write_trajectory_file(&path, &o.trajectories, &meta)?;
        if o.unfinished > 0 {
            eprintln!(
                "warning: {}: {} agents did not reach the target within the step budget",
                c.name, o.unfinished
            );
        }
        eprintln!("{}: {} agents, {} ticks", path.display(), c.agent_count, o.ticks);
        rec.seeds.push(c.seed);
        rec.outputs.push(path);
    }
    rec.config = serde_json::json!({
        "scenarios": jobs,
        "sim_params": format!("{params:?}"),
    });
    Ok(())
}

fn ingest(a: &IngestArgs, rec: &mut Recorder) -> CmdResult {
    let units = match a.units {
        UnitArg::Cm => Units::Centimeters,
        UnitArg::M => Units::Meters,
    };
    let file = std::fs::File::open(&a.input).map_err(|e| io_err(&a.input, e))?;
    let name = a.input.file_stem().unwrap_or_default().to_string_lossy().into_owned();
    let set = parse_trajectories(std::io::BufReader::new(file), units, a.fps, &name, Source::Experimental)
        .map_err(|e| e.in_file(&a.input))?;
    let scenario = build_tjunction(&ScenarioConfig::default())?;
    let (set, unknown) = assign_origins(&set, &scenario, a.epsilon_x);
    if unknown > 0 {
        eprintln!("warning: {unknown} pedestrians start within {} m of the centerline and stay unlabeled", a.epsilon_x);
    }
    write_trajectory_file(&a.out, &set, &TrajectoryMeta::for_set(&set))?;
    rec.inputs.push(a.input.clone());
    rec.outputs.push(a.out.clone());
    rec.config = serde_json::json!({"units": format!("{units:?}"), "fps": a.fps, "epsilon_x": a.epsilon_x});
    Ok(())
}

fn trajectory_files(dir: &Path) -> CmdResult<Vec<PathBuf>> {
    let mut paths: Vec<PathBuf> = std::fs::read_dir(dir)
        .map_err(|e| io_err(dir, e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "txt"))
        .collect();
    paths.sort();
    if paths.is_empty() {
        return Err(invalid(format!("{}: no *.txt trajectory files", dir.display())));
    }
    Ok(paths)
}

fn featurize(a: &FeaturizeArgs, rec: &mut Recorder) -> CmdResult {
    if a.stride == 0 {
        return Err(invalid("--stride must be at least 1"));
    }
    if !(a.sigma > 0.0) {
        return Err(invalid("--sigma must be positive"));
    }
    let area = observation_area_preset(a.area)?;
    let meta = GridMeta::for_area(area, a.cell)?;
    let mut sets: Vec<TrajectorySet> = Vec::new();
    for p in trajectory_files(&a.input)? {
        let (set, side) = read_trajectory_file(&p, a.fps)?;
        if side.is_none() {
            eprintln!("warning: {} has no sidecar, origins unknown", p.display());
        }
        rec.inputs.push(p);
        sets.push(set);
    }
    let ds = build_dataset(&sets, meta, a.sigma, a.stride)?;
    ds.write(&a.out)?;
    eprintln!("{}: {} samples from {} files", a.out.display(), ds.len(), sets.len());
    rec.outputs.push(a.out.clone());
    rec.config = serde_json::json!({"area": a.area, "sigma": a.sigma, "cell": a.cell, "stride": a.stride});
    Ok(())
}

fn curate(a: &CurateArgs, rec: &mut Recorder) -> CmdResult {
    let ds = Dataset::read(&a.input)?;
    let before = ds.len();
    let ds = if a.dedup { dedup_consecutive(&ds) } else { ds };
    let after_dedup = ds.len();
    let cap = match (a.cap_equal, a.rebalance) {
        (Some(c), _) => Some(c),
        (None, true) => Some(default_equal_cap(&ds)),
        (None, false) => None,
    };
    let ds = match cap {
        Some(c) => rebalance_equal(&ds, c),
        None => ds,
    };
    ds.write(&a.out)?;
    eprintln!(
        "{}: {before} -> {after_dedup} after dedup -> {} after rebalance{}",
        a.out.display(),
        ds.len(),
        cap.map(|c| format!(" (cap {c})")).unwrap_or_default()
    );
    rec.inputs.push(a.input.clone());
    rec.outputs.push(a.out.clone());
    rec.config = serde_json::json!({"dedup": a.dedup, "cap_equal": cap});
    Ok(())
}

fn train(a: &TrainArgs, rec: &mut Recorder) -> CmdResult {
    let ds = Dataset::read(&a.input)?;
    let params = a.forest.params(a.seed);
    let models = train_origin_models(&ds, &params)?;
    models.write(&a.out)?;
    rec.seeds.push(a.seed);
    rec.inputs.push(a.input.clone());
    rec.outputs.push(a.out.clone());
    rec.config = serde_json::json!({"trees": a.forest.trees, "mtry": a.forest.mtry, "min_leaf": a.forest.min_leaf});
    Ok(())
}

fn evaluate(a: &EvaluateArgs, rec: &mut Recorder) -> CmdResult {
    let mode = Mode::from(a.mode);
    let train = Dataset::read(&a.train)?;
    rec.inputs.push(a.train.clone());
    let test = match (mode, &a.test) {
        (Mode::Hybrid, None) => return Err(invalid("hybrid mode needs --test")),
        (Mode::Hybrid, Some(p)) => {
            rec.inputs.push(p.clone());
            Dataset::read(p)?
        }
        _ => train.clone(),
    };
    let report = run_experiment(mode, &train, &test, a.runs, a.seed, &a.forest.params(a.seed))?;
    write_text(&a.out, &report.to_csv())?;
    print!("{}", report.to_table());
    rec.seeds = (0..a.runs as u64).map(|r| a.seed + r).collect();
    rec.outputs.push(a.out.clone());
    rec.config = serde_json::json!({
        "mode": mode.as_str(), "runs": a.runs,
        "trees": a.forest.trees, "mtry": a.forest.mtry, "min_leaf": a.forest.min_leaf,
    });
    Ok(())
}

fn analyze(a: &AnalyzeArgs, rec: &mut Recorder) -> CmdResult {
    let (set, side) = read_trajectory_file(&a.input, a.fps)?;
    let cfg = if a.scenario.preset.is_some() || a.scenario.config.is_some() {
        single_config(&a.scenario)?
    } else {
        side.and_then(|m| m.config).unwrap_or_default()
    };
    let scenario = build_tjunction(&cfg)?;
    let area = *scenario
        .measurement_areas
        .get(a.area_id)
        .ok_or_else(|| invalid(format!("--area-id must be 0, 1 or 2, got {}", a.area_id)))?;
    let grid = VoronoiGrid::around(&scenario, area, a.cell)?;
    let text = match a.kind {
        AnalysisKind::Fd => fd_to_csv(&fundamental_diagram(&set, &grid, &area, a.area_id)),
        AnalysisKind::Voronoi => {
            let m = average_voronoi_map(&set, &grid);
            if m.frames == 0 {
                eprintln!("warning: no frames with pedestrians, map is all zeros");
            }
            m.field.to_csv()
        }
    };
    write_text(&a.out, &text)?;
    rec.inputs.push(a.input.clone());
    rec.outputs.push(a.out.clone());
    rec.config = serde_json::json!({"scenario": cfg, "area_id": a.area_id, "cell": a.cell});
    Ok(())
}

fn report(a: &ReportArgs, rec: &mut Recorder) -> CmdResult {
    let ds = Dataset::read(&a.input)?;
    let text = match a.kind {
        ReportKind::Distributions => format_distribution(&distribution_report(&ds)),
    };
    print!("{text}");
    if let Some(out) = &a.out {
        write_text(out, &text)?;
        rec.outputs.push(out.clone());
    }
    rec.inputs.push(a.input.clone());
    Ok(())
}

fn scenario_cmd(a: &ScenarioArgs, rec: &mut Recorder) -> CmdResult<bool> {
    if a.list {
        for c in scenario_presets() {
            println!("{}", c.name);
        }
        return Ok(false);
    }
    let cfg = single_config(&a.scenario)?;
    let out = a.out.as_ref().expect("clap requires --out");
    write_text(out, &build_tjunction(&cfg)?.to_geometry_json())?;
    rec.outputs.push(out.clone());
    rec.config = serde_json::to_value(&cfg).expect("config serializes");
    Ok(true)
}

fn field(a: &FieldArgs, rec: &mut Recorder) -> CmdResult {
    let cfg = single_config(&a.scenario)?;
    let params = FloorFieldParams {
        h: a.h,
        w_obs: a.w_obs,
        ..FloorFieldParams::default()
    };
    let f = travel_time_field(&build_tjunction(&cfg)?, &params)?;
    write_text(&a.out, &f.to_csv())?;
    rec.outputs.push(a.out.clone());
    rec.config = serde_json::json!({"scenario": cfg, "w_obs": a.w_obs, "h": a.h});
    Ok(())
}

fn run(cli: &Cli) -> CmdResult {
    let mut rec = Recorder::new();
    let primary: Option<PathBuf> = match &cli.command {
        Command::Simulate(a) => simulate(a, &mut rec).map(|_| Some(a.out.join("simulate")))?,
        Command::Ingest(a) => ingest(a, &mut rec).map(|_| Some(a.out.clone()))?,
        Command::Featurize(a) => featurize(a, &mut rec).map(|_| Some(a.out.clone()))?,
        Command::Curate(a) => curate(a, &mut rec).map(|_| Some(a.out.clone()))?,
        Command::Train(a) => train(a, &mut rec).map(|_| Some(a.out.clone()))?,
        Command::Evaluate(a) => evaluate(a, &mut rec).map(|_| Some(a.out.clone()))?,
        Command::Analyze(a) => analyze(a, &mut rec).map(|_| Some(a.out.clone()))?,
        Command::Report(a) => report(a, &mut rec).map(|_| a.out.clone())?,
        Command::Scenario(a) => scenario_cmd(a, &mut rec)?.then(|| a.out.clone()).flatten(),
        Command::Field(a) => field(a, &mut rec).map(|_| Some(a.out.clone()))?,
    };
    match primary {
        Some(p) => rec.finish(&p),
        None => Ok(()),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.jobs {
        if n == 0 {
            eprintln!("error: --jobs must be at least 1");
            return ExitCode::from(1);
        }
        // Only fails if the pool was already built, which cannot happen here.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Invalid(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
        Err(Failure::Io(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
    }
}
