//! `dforecast` command line: simulate, convert, train, evaluate, gradcheck.
//!
//! Every option can also come from a `--config` file of `key = value` lines
//! using the long flag names; flags given on the command line win.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, CommandFactory, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::dataset::{
    convert_published_igt, load_igt, load_ipd_with_stats, make_folds, pool_and_truncate, split_train_test,
    supervised_subset, write_atomic, write_igt_choices, write_igt_rewards, write_ipd, Dataset, DatasetManifest,
    FeatureConfig, Split, IPD_REQUIRED_ROUNDS,
};
use crate::error::{Error, Result};
use crate::evaluation::{aggregate_reports, build_report, write_report, CurveMode, EvalConfig, EvalReport};
use crate::games::{
    ensure_valid, igt_scheme, simulate_igt_population, simulate_ipd_population, GameKind, GameSpec, SynthPolicy,
};
use crate::gradcheck::{gradcheck_lstm, DEFAULT_SEEDS, TOLERANCE};
use crate::predictors::{fit_model, Checkpoint, FitSettings, ModelKind, TrainConfig, TrainHistory};

pub const TOOL_NAME: &str = env!("CARGO_PKG_NAME");
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Parser, Serialize)]
#[command(name = "dforecast", version, about = "Forecast next actions in repeated decision tasks")]
#[command(args_override_self = true)]
pub struct Cli {
    /// Seed for every random choice; required by stochastic commands.
    #[arg(long, global = true)]
    pub seed: Option<u64>,

    /// Output directory.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    /// File of `key = value` lines mirroring the long flags.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// Generate synthetic trajectories from scripted policies.
    Simulate(SimulateArgs),
    /// Convert the whitespace-separated published IGT matrix to canonical CSV.
    ConvertIgt(ConvertArgs),
    /// Fit a model on the training side of a split and write a checkpoint.
    Train(TrainArgs),
    /// Score a checkpoint, optionally with k-fold cross-validation.
    Eval(EvalArgs),
    /// Compare BPTT gradients with finite differences.
    Gradcheck(GradcheckArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Game {
    Igt,
    Ipd,
}

impl From<Game> for GameKind {
    fn from(g: Game) -> Self {
        match g {
            Game::Igt => GameKind::Igt,
            Game::Ipd => GameKind::Ipd,
        }
    }
}

#[derive(Debug, Args, Serialize)]
pub struct SimulateArgs {
    #[arg(long, value_enum)]
    pub game: Game,
    /// Number of trajectories.
    #[arg(long, default_value_t = 100)]
    pub n: usize,

    /// IGT payoff scheme (1 or 2).
    #[arg(long, default_value_t = 1)]
    pub scheme: u8,
    /// IGT policy pool, `+`-separated, e.g. `random+epsilon_greedy_igt:epsilon=0.1`.
    #[arg(long, default_value = "random")]
    pub policy: String,
    #[arg(long, default_value_t = 95)]
    pub trials: usize,

    /// IPD policy pool for player 1, `+`-separated.
    #[arg(long, default_value = "random")]
    pub p1: String,
    /// IPD policy pool for player 2.
    #[arg(long, default_value = "random")]
    pub p2: String,
    #[arg(long, default_value_t = 9)]
    pub rounds: usize,
    #[arg(long = "temptation", default_value_t = 5.0)]
    pub temptation: f64,
    #[arg(long = "reward", default_value_t = 3.0)]
    pub reward: f64,
    #[arg(long = "penalty", default_value_t = 1.0)]
    pub penalty: f64,
    #[arg(long = "sucker", default_value_t = 0.0)]
    pub sucker: f64,
}

#[derive(Debug, Args, Serialize)]
pub struct ConvertArgs {
    #[arg(long)]
    pub src: PathBuf,
    #[arg(long)]
    pub dst: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct DataArgs {
    #[arg(long, value_enum)]
    pub game: Game,
    /// IPD trajectories CSV, or IGT choice matrices (comma-separated to pool several).
    #[arg(long)]
    pub data: String,
    /// IGT win matrix matching a single choice matrix.
    #[arg(long)]
    pub wins: Option<PathBuf>,
    /// IGT loss matrix matching a single choice matrix.
    #[arg(long)]
    pub losses: Option<PathBuf>,
    /// Keep the first N actions of every IGT trajectory (pooled data defaults to the shortest).
    #[arg(long)]
    pub truncate: Option<usize>,
    /// Append the focal agent's reward to each input vector.
    #[arg(long)]
    pub include_rewards: bool,
    #[arg(long, default_value_t = 100.0)]
    pub reward_scale: f64,
}

impl DataArgs {
    fn features(&self) -> FeatureConfig {
        FeatureConfig {
            include_rewards: self.include_rewards,
            reward_scale: self.reward_scale,
        }
    }
}

#[derive(Debug, Args, Serialize)]
pub struct TrainArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[arg(long, default_value = "lstm")]
    pub model: ModelKind,
    /// Fraction of trajectories used for fitting; the rest is held out for `eval`.
    #[arg(long, default_value_t = 0.8)]
    pub train_ratio: f64,
    #[arg(long, default_value_t = 10)]
    pub hidden: usize,
    #[arg(long, default_value_t = 2)]
    pub layers: usize,
    #[arg(long, default_value_t = 200)]
    pub epochs: usize,
    #[arg(long, default_value_t = 0.01)]
    pub lr: f64,
    #[arg(long, default_value_t = 32)]
    pub batch_size: usize,
    #[arg(long, default_value_t = 5.0)]
    pub clip: f64,
    #[arg(long, default_value_t = 0.1)]
    pub validation_fraction: f64,
    #[arg(long, default_value_t = 20)]
    pub patience: usize,
    /// Autoregression order.
    #[arg(long, default_value_t = 1)]
    pub lag: usize,
    /// L2 penalty of the logistic baseline.
    #[arg(long, default_value_t = 1e-4)]
    pub l2: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Subset {
    /// The held-out side of the checkpoint's split.
    Test,
    /// Every trajectory in the dataset.
    All,
}

#[derive(Debug, Args, Serialize)]
pub struct EvalArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[arg(long)]
    pub checkpoint: PathBuf,
    /// Refit the checkpoint's model kind in k-fold cross-validation.
    #[arg(long)]
    pub folds: Option<usize>,
    #[arg(long, value_enum, default_value = "test")]
    pub subset: Subset,
    /// How predicted population curves are formed.
    #[arg(long, value_enum, default_value = "expected")]
    pub curve: CurveArg,
    /// Moving-average window for IGT curves.
    #[arg(long, default_value_t = 5)]
    pub window: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CurveArg {
    Expected,
    Argmax,
}

#[derive(Debug, Args, Serialize)]
pub struct GradcheckArgs {
    /// Perturb one analytic gradient entry (negative control).
    #[arg(long, hide = true)]
    pub corrupt: bool,
}

/// Written next to every command's outputs.
#[derive(Debug, Serialize)]
pub struct RunManifest<'a> {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: &'a Command,
    pub seed: Option<u64>,
    pub inputs: Vec<InputHash>,
    pub outputs: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dataset: Option<DatasetManifest>,
}

#[derive(Debug, Serialize)]
pub struct InputHash {
    pub path: String,
    pub sha256: String,
}

pub fn run() -> i32 {
    let _ = env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).try_init();
    run_from(std::env::args_os())
}

/// Parse `args` (including the program name) and execute; returns the exit code.
pub fn run_from<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString>,
{
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let args = match merge_config(args) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("error: {e}");
            return e.exit_code();
        }
    };
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match execute(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

const SUBCOMMANDS: [&str; 5] = ["simulate", "convert-igt", "train", "eval", "gradcheck"];

/// Splice the config file's entries in as flags right after the subcommand,
/// so anything on the command line overrides them.
fn merge_config(args: Vec<OsString>) -> Result<Vec<OsString>> {
    let strs: Vec<String> = args.iter().map(|a| a.to_string_lossy().into_owned()).collect();
    let mut config_path = None;
    let mut sub_pos = None;
    let mut i = 1;
    while i < strs.len() {
        let a = &strs[i];
        if let Some(v) = a.strip_prefix("--config=") {
            config_path = Some(v.to_string());
        } else if a == "--config" {
            config_path = strs.get(i + 1).cloned();
            i += 1;
        } else if a == "--seed" || a == "--out" {
            i += 1;
        } else if sub_pos.is_none() && SUBCOMMANDS.contains(&a.as_str()) {
            sub_pos = Some(i);
        }
        i += 1;
    }
    let (Some(path), Some(sub_pos)) = (config_path, sub_pos) else {
        return Ok(args);
    };
    let text = std::fs::read_to_string(&path).map_err(|e| Error::Config(format!("config file {path}: {e}")))?;
    let root = Cli::command();
    let sub = root
        .find_subcommand(&strs[sub_pos])
        .expect("subcommand name comes from the known list");
    let mut extra: Vec<OsString> = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("{path}:{}: expected key = value", n + 1)))?;
        let key = key.trim().trim_start_matches("--").replace('_', "-");
        let value = value.trim().trim_matches('"');
        if key == "config" {
            return Err(Error::Config(format!("{path}:{}: config files cannot nest", n + 1)));
        }
        let arg = sub
            .get_arguments()
            .chain(root.get_arguments())
            .find(|a| a.get_long() == Some(key.as_str()))
            .ok_or_else(|| Error::Config(format!("{path}:{}: unknown option '{key}'", n + 1)))?;
        if arg.get_action().takes_values() {
            extra.push(format!("--{key}").into());
            extra.push(value.into());
        } else {
            match value {
                "true" | "yes" | "1" => extra.push(format!("--{key}").into()),
                "false" | "no" | "0" => {}
                other => return Err(Error::Config(format!("{path}:{}: '{other}' is not a boolean", n + 1))),
            }
        }
    }
    let mut out = args;
    out.splice(sub_pos + 1..sub_pos + 1, extra);
    Ok(out)
}

fn execute(cli: Cli) -> Result<i32> {
    let out = cli.out.as_deref().map(prepare_out).transpose()?;
    match &cli.command {
        Command::Simulate(a) => cmd_simulate(&cli, a, &require_out(&out)?).map(|_| 0),
        Command::ConvertIgt(a) => cmd_convert(a).map(|_| 0),
        Command::Train(a) => cmd_train(&cli, a, &require_out(&out)?).map(|_| 0),
        Command::Eval(a) => cmd_eval(&cli, a, &require_out(&out)?).map(|_| 0),
        Command::Gradcheck(a) => cmd_gradcheck(&cli, a, out.as_deref()),
    }
}

fn require_seed(cli: &Cli) -> Result<u64> {
    cli.seed
        .ok_or_else(|| Error::Config("--seed is required for this command".into()))
}

fn require_out(out: &Option<PathBuf>) -> Result<PathBuf> {
    out.clone()
        .ok_or_else(|| Error::Config("--out is required for this command".into()))
}

fn prepare_out(dir: &Path) -> Result<PathBuf> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    std::fs::canonicalize(dir).map_err(|e| Error::io(dir, e))
}

fn resolve(path: &Path) -> Result<PathBuf> {
    std::fs::canonicalize(path).map_err(|e| Error::io(path, e))
}

pub fn sha256_file(path: &Path) -> Result<String> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

fn hash_inputs(paths: &[PathBuf]) -> Result<Vec<InputHash>> {
    paths
        .iter()
        .map(|p| {
            Ok(InputHash {
                path: p.display().to_string(),
                sha256: sha256_file(p)?,
            })
        })
        .collect()
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    write_atomic(path, s.as_bytes())
}

fn write_manifest(
    dir: &Path,
    cli: &Cli,
    inputs: &[PathBuf],
    outputs: Vec<String>,
    dataset: Option<DatasetManifest>,
) -> Result<()> {
    let manifest = RunManifest {
        tool: TOOL_NAME,
        version: TOOL_VERSION,
        command: &cli.command,
        seed: cli.seed,
        inputs: hash_inputs(inputs)?,
        outputs,
        dataset,
    };
    write_json(&dir.join("manifest.json"), &manifest)
}

fn parse_pool(s: &str) -> Result<Vec<SynthPolicy>> {
    s.split('+').map(|p| p.trim().parse()).collect()
}

fn check_pool(pool: &[SynthPolicy], game: GameKind) -> Result<()> {
    match pool.iter().find(|p| !p.plays(game)) {
        Some(p) => Err(Error::Config(format!("policy {p} cannot play {game}"))),
        None => Ok(()),
    }
}

fn cmd_simulate(cli: &Cli, a: &SimulateArgs, out: &Path) -> Result<()> {
    let seed = require_seed(cli)?;
    let game = GameKind::from(a.game);
    let (ds, files) = match game {
        GameKind::Igt => {
            let scheme = igt_scheme(a.scheme)?;
            let pool = parse_pool(&a.policy)?;
            check_pool(&pool, game)?;
            let trajs = simulate_igt_population(&pool, &scheme, a.trials, a.n, seed)?;
            let ds = Dataset::new(game, trajs)?;
            write_igt_choices(&ds, &out.join("choices.csv"))?;
            write_igt_rewards(&ds, &out.join("wins.csv"), &out.join("losses.csv"))?;
            (ds, vec!["choices.csv", "wins.csv", "losses.csv"])
        }
        GameKind::Ipd => {
            let spec = GameSpec::new(a.temptation, a.reward, a.penalty, a.sucker, a.rounds);
            ensure_valid(&spec)?;
            let (pool1, pool2) = (parse_pool(&a.p1)?, parse_pool(&a.p2)?);
            check_pool(&pool1, game)?;
            check_pool(&pool2, game)?;
            let trajs = simulate_ipd_population(&pool1, &pool2, &spec, a.rounds, a.n, seed)?;
            let ds = Dataset::new(game, trajs)?;
            write_ipd(&ds, &out.join("trajectories.csv"))?;
            (ds, vec!["trajectories.csv"])
        }
    };
    let files: Vec<String> = files.into_iter().map(String::from).collect();
    let manifest = ds.manifest(files.clone(), Some(seed));
    log::info!("simulated {} {game} trajectories with seed {seed}", ds.len());
    write_manifest(out, cli, &[], files, Some(manifest))
}

fn cmd_convert(a: &ConvertArgs) -> Result<()> {
    let src = resolve(&a.src)?;
    let rows = convert_published_igt(&src, &a.dst)?;
    log::info!("converted {rows} subjects from {}", src.display());
    Ok(())
}

/// Load the dataset described by `a`, returning it with the resolved input files.
fn load_data(a: &DataArgs) -> Result<(Dataset, Vec<PathBuf>)> {
    let paths = a
        .data
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| resolve(Path::new(s)))
        .collect::<Result<Vec<_>>>()?;
    if paths.is_empty() {
        return Err(Error::Config("--data names no files".into()));
    }
    let wins = a.wins.as_deref().map(resolve).transpose()?;
    let losses = a.losses.as_deref().map(resolve).transpose()?;
    let mut inputs = paths.clone();
    inputs.extend(wins.iter().cloned());
    inputs.extend(losses.iter().cloned());
    let ds = match GameKind::from(a.game) {
        GameKind::Ipd => {
            if paths.len() != 1 || wins.is_some() || losses.is_some() || a.truncate.is_some() {
                return Err(Error::Config(
                    "IPD data is one trajectories file without --wins/--losses/--truncate".into(),
                ));
            }
            let (ds, stats) = load_ipd_with_stats(&paths[0], IPD_REQUIRED_ROUNDS)?;
            log::info!("kept {} trajectories, dropped {}", stats.kept, stats.dropped_length);
            ds
        }
        GameKind::Igt => {
            if paths.len() > 1 && (wins.is_some() || losses.is_some()) {
                return Err(Error::Config("--wins/--losses need a single choice matrix".into()));
            }
            let sets = paths
                .iter()
                .map(|p| load_igt(p, wins.as_deref(), losses.as_deref()))
                .collect::<Result<Vec<_>>>()?;
            let pooled_len = sets.iter().flat_map(|d| &d.trajectories).map(|t| t.len()).min();
            match (a.truncate, sets.len()) {
                (None, 1) => sets.into_iter().next().expect("one dataset"),
                (Some(n), _) => pool_and_truncate(&sets, n)?,
                (None, _) => pool_and_truncate(&sets, pooled_len.unwrap_or(0))?,
            }
        }
    };
    Ok((ds, inputs))
}

fn train_config(a: &TrainArgs, seed: u64) -> TrainConfig {
    TrainConfig {
        epochs: a.epochs,
        learning_rate: a.lr,
        batch_size: a.batch_size,
        seed,
        gradient_clip_norm: a.clip,
        validation_fraction: a.validation_fraction,
        early_stop_patience: a.patience,
        hidden: a.hidden,
        layers: a.layers,
    }
}

fn history_csv(history: Option<&TrainHistory>) -> String {
    let mut out = String::from("epoch,train_loss,validation_loss\n");
    for r in history.map(|h| h.epochs.as_slice()).unwrap_or_default() {
        let v = r.validation_loss.map(|v| v.to_string()).unwrap_or_default();
        out.push_str(&format!("{},{},{}\n", r.epoch, r.train_loss, v));
    }
    out
}

/// Split used by `train`; an empty test side means everything was trained on.
fn training_split(ds: &Dataset, train_ratio: f64, seed: u64) -> Result<Split> {
    split_train_test(ds, train_ratio, seed)
}

fn cmd_train(cli: &Cli, a: &TrainArgs, out: &Path) -> Result<()> {
    let seed = require_seed(cli)?;
    let (ds, inputs) = load_data(&a.data)?;
    let game = ds.kind;
    let settings = FitSettings {
        kind: a.model,
        train: train_config(a, seed),
        var_lag: a.lag,
        l2: a.l2,
    };
    if a.model == ModelKind::Lstm {
        settings.train.validate()?;
    }
    let features = a.data.features();
    let split = training_split(&ds, a.train_ratio, seed)?;
    log::info!(
        "split seed {seed}: {} train / {} test trajectories",
        split.train.len(),
        split.test.len()
    );
    let train = supervised_subset(&ds, &split.train, &features)?;
    let (model, history) = fit_model(game, &train, &settings)?;
    let ck = Checkpoint::new(&model, game, settings, features, seed, a.train_ratio);
    ck.save(&out.join("checkpoint.json"))?;
    write_atomic(&out.join("history.csv"), history_csv(history.as_ref()).as_bytes())?;
    let files = vec!["checkpoint.json".to_string(), "history.csv".to_string()];
    write_manifest(out, cli, &inputs, files, Some(ds.manifest(source_names(&inputs), Some(seed))))
}

fn source_names(inputs: &[PathBuf]) -> Vec<String> {
    inputs.iter().map(|p| p.display().to_string()).collect()
}

fn cmd_eval(cli: &Cli, a: &EvalArgs, out: &Path) -> Result<()> {
    let ck_path = resolve(&a.checkpoint)?;
    let ck = Checkpoint::load(&ck_path)?;
    let (ds, mut inputs) = load_data(&a.data)?;
    ck.check_compatible(ds.kind)?;
    if ck.features != a.data.features() {
        return Err(Error::Compatibility(
            "feature settings differ from those the checkpoint was trained with".into(),
        ));
    }
    inputs.push(ck_path);
    let seed = cli.seed.unwrap_or(ck.seed);
    let config = EvalConfig {
        features: ck.features,
        window: a.window,
        curve_mode: match a.curve {
            CurveArg::Expected => CurveMode::Expected,
            CurveArg::Argmax => CurveMode::Argmax,
        },
        seed,
    };
    let mut files = Vec::new();
    match a.folds {
        None => {
            let split = match a.subset {
                Subset::Test => training_split(&ds, ck.train_ratio, ck.seed)?,
                Subset::All => Split {
                    train: Vec::new(),
                    test: (0..ds.len()).collect(),
                    seed: ck.seed,
                    fold: None,
                },
            };
            let report = build_report(&ck.model()?, &ds, &split, &config)?;
            log::info!(
                "avg_mse {} on {} trajectories in {:.3}s",
                report.avg_mse,
                report.n_test,
                report.wall_time_s
            );
            write_report(&report, out, "report")?;
            files.extend(["report.json".to_string(), "report_curve.csv".to_string()]);
        }
        Some(k) => {
            let folds = make_folds(&ds, k, seed)?;
            let mut reports: Vec<EvalReport> = Vec::with_capacity(k);
            for split in &folds {
                let fold = split.fold.unwrap_or(0);
                let mut fit = ck.fit.clone();
                fit.train.seed = seed.wrapping_add(fold as u64);
                let train = supervised_subset(&ds, &split.train, &ck.features)?;
                let (model, _) = fit_model(ds.kind, &train, &fit)?;
                let report = build_report(&model, &ds, split, &config)?;
                log::info!("fold {fold}: avg_mse {}", report.avg_mse);
                let stem = format!("fold{fold}");
                write_report(&report, out, &stem)?;
                files.extend([format!("{stem}.json"), format!("{stem}_curve.csv")]);
                reports.push(report);
            }
            let agg = aggregate_reports(&reports)?;
            write_report(&agg, out, "aggregate")?;
            files.extend(["aggregate.json".to_string(), "aggregate_curve.csv".to_string()]);
        }
    }
    write_manifest(out, cli, &inputs, files, Some(ds.manifest(source_names(&inputs), Some(seed))))
}

fn cmd_gradcheck(cli: &Cli, a: &GradcheckArgs, out: Option<&Path>) -> Result<i32> {
    let seeds: Vec<u64> = match cli.seed {
        Some(s) => (0..DEFAULT_SEEDS.len() as u64).map(|i| s.wrapping_add(i)).collect(),
        None => DEFAULT_SEEDS.to_vec(),
    };
    let report = gradcheck_lstm(&seeds, a.corrupt)?;
    for (seed, err) in &report.per_seed {
        println!("seed {seed}: max_rel_err = {err:.6e}");
    }
    println!("max_rel_err = {:.6e} over {} parameters", report.max_rel_err, report.n_params);
    let passed = report.passed();
    if passed {
        println!("max_rel_err < {TOLERANCE:e}: PASS");
    } else {
        println!("max_rel_err >= {TOLERANCE:e}: FAIL");
    }
    if let Some(dir) = out {
        write_json(&dir.join("gradcheck.json"), &report)?;
        write_manifest(dir, cli, &[], vec!["gradcheck.json".into()], None)?;
    }
    Ok(if passed { 0 } else { 4 })
}
