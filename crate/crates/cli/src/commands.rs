use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use cmcs_core::cpa::{
    diebold_mariano, dfc_select, instrument, statewise_t_test, wald_test, CovEstimator, StatewiseVariance,
    TwoStateDesign,
};
use cmcs_core::losses::{es_bcbs, find_stress_window, states_from_windows, HorizonEsSet, WindowCriterion};
use cmcs_core::mcs::{cmcs_run, mcs_run, BlockLength, McsConfig};
use cmcs_core::simlab::{
    power_study, rejection_region_grid, rejection_study, GridSpec, PowerStudyConfig, RejectionStudyConfig,
};
use cmcs_core::bootstrap::{default_block_len, BootstrapPlan};
use cmcs_core::{Error, LossPanel, RandomStream, StateSeries};
use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::error::CliError;
use crate::io;
use crate::report::*;

#[derive(Debug, Parser)]
#[command(name = "cmcs", version, about = "Conditional model confidence sets and predictive ability tests")]
pub struct Cli {
    /// Maximum number of worker threads.
    #[arg(long, global = true)]
    pub workers: Option<usize>,
    /// Output file; stdout when omitted.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    /// Human-readable table (simulation studies only).
    Table,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Model confidence set, unconditional or per state.
    Mcs(McsArgs),
    /// Conditional predictive ability tests for a pair of methods.
    Cpa(CpaArgs),
    /// Monte Carlo studies.
    #[command(subcommand)]
    Simulate(SimulateCommand),
    /// Stress-period detection and ES aggregation across liquidity horizons.
    #[command(subcommand)]
    Stress(StressCommand),
}

#[derive(Debug, Clone, Args)]
pub struct InputArgs {
    /// Loss panel CSV.
    #[arg(long)]
    pub losses: PathBuf,
    /// State series CSV (`time_index,state`).
    #[arg(long)]
    pub states: Option<PathBuf>,
    /// Comma-separated state alphabet; inferred from the state file when omitted.
    #[arg(long, value_delimiter = ',')]
    pub state_alphabet: Option<Vec<String>>,
}

#[derive(Debug, Clone, Args)]
pub struct BootArgs {
    /// Bootstrap resamples.
    #[arg(long, default_value_t = 1000)]
    pub boot_b: usize,
    /// Block length, or `auto` for ⌈n^{1/3}⌉ per sample.
    #[arg(long, default_value = "auto", value_parser = parse_block_len)]
    pub block_len: BlockLength,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
}

fn parse_block_len(s: &str) -> Result<BlockLength, String> {
    if s.eq_ignore_ascii_case("auto") {
        return Ok(BlockLength::Auto);
    }
    match s.parse::<usize>() {
        Ok(p) if p > 0 => Ok(BlockLength::Fixed(p)),
        _ => Err(format!("`{s}` is neither `auto` nor a positive integer")),
    }
}

fn block_len_echo(b: BlockLength) -> Option<usize> {
    match b {
        BlockLength::Auto => None,
        BlockLength::Fixed(p) => Some(p),
    }
}

#[derive(Debug, Clone, Args)]
pub struct McsArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[arg(long, default_value_t = 0.05)]
    pub alpha: f64,
    #[command(flatten)]
    pub boot: BootArgs,
    /// States with fewer observations are reported as insufficient data.
    #[arg(long, default_value_t = 10)]
    pub min_state_obs: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CovKind {
    Sample,
    Hac,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum StatewiseKind {
    Iid,
    Bootstrap,
}

#[derive(Debug, Clone, Args)]
pub struct CpaArgs {
    #[command(flatten)]
    pub input: InputArgs,
    /// The two methods to compare, `first,second`; defaults to the first two columns.
    #[arg(long, value_delimiter = ',')]
    pub pair: Option<Vec<String>>,
    #[arg(long, value_enum, default_value_t = CovKind::Sample)]
    pub cov: CovKind,
    /// Truncation lag for `--cov hac`; defaults to a quarter of the sample.
    #[arg(long)]
    pub hac_lag: Option<usize>,
    #[arg(long, default_value_t = 0.05)]
    pub alpha: f64,
    /// Variance of the statewise mean.
    #[arg(long, value_enum, default_value_t = StatewiseKind::Iid)]
    pub statewise_var: StatewiseKind,
    #[command(flatten)]
    pub boot: BootArgs,
}

#[derive(Debug, Subcommand)]
pub enum SimulateCommand {
    /// Average confidence-set sizes under the multi-method design.
    Power(PowerArgs),
    /// Rejection rates of the statewise t-tests and the Wald test under the two-method design.
    Rejection(RejectionArgs),
    /// Rejection regions of the t-tests and the Wald test over a grid of mean differentials.
    Region(RegionArgs),
}

#[derive(Debug, Clone, Args)]
pub struct PowerArgs {
    /// Named preset (`fig1`).
    #[arg(long)]
    pub preset: Option<String>,
    /// Study configuration file (JSON or TOML).
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub reps: Option<usize>,
    #[arg(long)]
    pub boot_b: Option<usize>,
    #[arg(long, value_parser = parse_block_len)]
    pub block_len: Option<BlockLength>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub alpha: Option<f64>,
}

#[derive(Debug, Clone, Args)]
pub struct RejectionArgs {
    /// Preset table number (1 to 4).
    #[arg(long)]
    pub table: Option<u8>,
    /// Study configuration file (JSON or TOML).
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub reps: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long, value_enum)]
    pub cov: Option<CovKind>,
    #[arg(long)]
    pub hac_lag: Option<usize>,
}

#[derive(Debug, Clone, Args)]
pub struct RegionArgs {
    /// State-1 mean differential of the design (negative).
    #[arg(long, allow_hyphen_values = true, default_value_t = -0.3)]
    pub delta1: f64,
    /// State-2 scale: `Δ₂ = -v Δ₁`.
    #[arg(long, default_value_t = 1.0)]
    pub v: f64,
    #[arg(long, default_value_t = 0.5)]
    pub p: f64,
    /// Within-state variance of the differential.
    #[arg(long, default_value_t = 4.0)]
    pub sigma2: f64,
    #[arg(long, default_value_t = 500.0)]
    pub n: f64,
    #[arg(long, default_value_t = 0.05)]
    pub alpha: f64,
    /// Grid points per axis.
    #[arg(long, default_value_t = 101)]
    pub resolution: usize,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, default_values_t = [-0.6, 0.6])]
    pub d1_range: Vec<f64>,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, default_values_t = [-0.6, 0.6])]
    pub d2_range: Vec<f64>,
}

#[derive(Debug, Subcommand)]
pub enum StressCommand {
    /// Most severe window of each risk factor and the implied state series.
    Window(WindowArgs),
    /// Aggregate ES forecasts across liquidity horizons.
    Bcbs(BcbsArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CriterionArg {
    Mean,
    Max,
}

#[derive(Debug, Clone, Args)]
pub struct WindowArgs {
    /// Risk-factor CSV, optionally as `regime=path`; repeat for several regimes.
    #[arg(long, required = true)]
    pub factor: Vec<String>,
    #[arg(long, default_value_t = cmcs_core::losses::STRESS_WINDOW_DAYS)]
    pub win: usize,
    #[arg(long, value_enum, default_value_t = CriterionArg::Mean)]
    pub criterion: CriterionArg,
    /// Label for points outside every window.
    #[arg(long, default_value = "normal")]
    pub baseline: String,
    /// Where to write the derived state series CSV.
    #[arg(long)]
    pub states_out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct BcbsArgs {
    /// ES-by-horizon CSV.
    #[arg(long)]
    pub es: PathBuf,
    /// Scaling horizon in days.
    #[arg(long = "t", default_value_t = 10.0)]
    pub base_t: f64,
}

/// Runs a parsed command line, honoring `--workers`.
pub fn run(cli: &Cli) -> Result<(), CliError> {
    match cli.workers {
        Some(0) => Err(CliError::usage("--workers must be positive")),
        Some(w) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(w)
                .build()
                .map_err(|e| CliError::usage(e.to_string()))?;
            pool.install(|| dispatch(cli))
        }
        None => dispatch(cli),
    }
}

fn dispatch(cli: &Cli) -> Result<(), CliError> {
    let out = cli.out.as_ref();
    match &cli.command {
        Command::Mcs(a) => {
            let report = cmd_mcs(a)?;
            write_report(out, cli.format, Format::Json, &report, McsReport::to_csv)
        }
        Command::Cpa(a) => {
            let report = cmd_cpa(a)?;
            write_report(out, cli.format, Format::Json, &report, CpaReport::to_csv)
        }
        Command::Simulate(SimulateCommand::Power(a)) => {
            let report = cmd_power(a)?;
            write_study(out, cli.format, &report)
        }
        Command::Simulate(SimulateCommand::Rejection(a)) => {
            let report = cmd_rejection(a)?;
            write_study(out, cli.format, &report)
        }
        Command::Simulate(SimulateCommand::Region(a)) => {
            let report = cmd_region(a)?;
            write_report(out, cli.format, Format::Csv, &report, RegionReport::to_csv)
        }
        Command::Stress(StressCommand::Window(a)) => {
            let report = cmd_window(a)?;
            write_report(out, cli.format, Format::Json, &report, WindowReport::to_csv)
        }
        Command::Stress(StressCommand::Bcbs(a)) => {
            let report = cmd_bcbs(a)?;
            write_report(out, cli.format, Format::Csv, &report, BcbsReport::to_csv)
        }
    }
}

fn to_json<T: Serialize>(report: &T) -> String {
    serde_json::to_string_pretty(report).expect("reports serialize") + "\n"
}

fn write_report<T: Serialize>(
    out: Option<&PathBuf>,
    format: Option<Format>,
    default: Format,
    report: &T,
    csv: impl Fn(&T) -> String,
) -> Result<(), CliError> {
    let text = match format.unwrap_or(default) {
        Format::Json => to_json(report),
        Format::Csv => csv(report),
        Format::Table => return Err(CliError::usage("--format table is only available for simulate power|rejection")),
    };
    io::emit(out, &text)
}

fn write_study(out: Option<&PathBuf>, format: Option<Format>, report: &StudyReport) -> Result<(), CliError> {
    let text = match format.unwrap_or(Format::Csv) {
        Format::Json => to_json(report),
        Format::Csv => report.to_csv(),
        Format::Table => report.study.render_table(),
    };
    io::emit(out, &text)
}

fn check_alpha(alpha: f64) -> Result<(), CliError> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        Err(CliError::usage(format!("--alpha {alpha} must lie in (0, 1)")))
    }
}

fn display(p: &Path) -> String {
    p.display().to_string()
}

/// Loads the panel and, if given, the state series, checking that they line up.
fn load_inputs(input: &InputArgs) -> Result<(LossPanel, Option<StateSeries>), CliError> {
    let panel = io::read_loss_csv(&input.losses)?;
    let Some(path) = &input.states else {
        if input.state_alphabet.is_some() {
            return Err(CliError::usage("--state-alphabet requires --states"));
        }
        return Ok((panel, None));
    };
    let file = io::read_state_csv(path, input.state_alphabet.clone())?;
    if file.states.len() != panel.n() {
        return Err(CliError::usage(format!(
            "{} has {} rows but {} has {}",
            display(path),
            file.states.len(),
            display(&input.losses),
            panel.n()
        )));
    }
    if let Some(ti) = panel.time_index() {
        if let Some(t) = (0..ti.len()).find(|&t| ti[t] != file.time_index[t]) {
            return Err(CliError::Parse {
                path: path.clone(),
                line: t as u64 + 2,
                message: format!("time index `{}` does not match the loss file's `{}`", file.time_index[t], ti[t]),
            });
        }
    }
    Ok((panel, Some(file.states)))
}

pub fn cmd_mcs(a: &McsArgs) -> Result<McsReport, CliError> {
    check_alpha(a.alpha)?;
    let (panel, states) = load_inputs(&a.input)?;
    let cfg = McsConfig::new(a.alpha, a.boot.boot_b, a.boot.seed)
        .with_block_len(a.boot.block_len)
        .with_min_state_obs(a.min_state_obs);
    let results = match &states {
        Some(s) => cmcs_run(&panel, s, &cfg)?,
        None => vec![mcs_run(&panel, &cfg)?],
    };
    Ok(McsReport {
        run: RunInfo::new("mcs", a.boot.seed, a.boot.boot_b, block_len_echo(a.boot.block_len), Some(a.alpha)),
        losses: display(&a.input.losses),
        states: a.input.states.as_deref().map(display),
        methods: panel.method_ids().to_vec(),
        observations: panel.n(),
        results,
    })
}

fn method_index(panel: &LossPanel, id: &str) -> Result<usize, CliError> {
    panel
        .method_ids()
        .iter()
        .position(|m| m == id)
        .ok_or_else(|| CliError::usage(format!("unknown method `{id}`")))
}

fn cov_estimator(kind: CovKind, lag: Option<usize>, n: usize) -> Result<CovEstimator, CliError> {
    match (kind, lag) {
        (CovKind::Sample, None) => Ok(CovEstimator::Sample),
        (CovKind::Sample, Some(_)) => Err(CliError::usage("--hac-lag requires --cov hac")),
        (CovKind::Hac, Some(lag)) => Ok(CovEstimator::TruncatedHac { lag }),
        (CovKind::Hac, None) => Ok(CovEstimator::quarter_sample_hac(n)),
    }
}

pub fn cmd_cpa(a: &CpaArgs) -> Result<CpaReport, CliError> {
    check_alpha(a.alpha)?;
    let (panel, states) = load_inputs(&a.input)?;
    let (i, j) = match &a.pair {
        Some(p) if p.len() != 2 => return Err(CliError::usage("--pair takes exactly two methods")),
        Some(p) => (method_index(&panel, &p[0])?, method_index(&panel, &p[1])?),
        None => (0, 1),
    };
    if i == j {
        return Err(CliError::usage("--pair needs two different methods"));
    }
    let n = panel.n();
    let cov = cov_estimator(a.cov, a.hac_lag, n)?;
    let states = match states {
        Some(s) => s,
        None => StateSeries::from_codes(vec!["all".into()], vec![0; n])?,
    };
    let d = panel.differential(i, j);
    let wald = wald_test(&instrument(&d, &states)?, cov)?;
    let dm = diebold_mariano(&d, cov)?;
    let statewise = (0..states.num_states())
        .map(|k| {
            let variance = match a.statewise_var {
                StatewiseKind::Iid => StatewiseVariance::Iid,
                StatewiseKind::Bootstrap => {
                    let count = states.codes().iter().filter(|&&c| c == k).count();
                    let p = match a.boot.block_len {
                        BlockLength::Fixed(p) => p,
                        BlockLength::Auto => default_block_len(count.max(1)),
                    };
                    let stream = RandomStream::new(a.boot.seed, k as u64);
                    StatewiseVariance::BlockBootstrap(BootstrapPlan::new(a.boot.boot_b, p, stream))
                }
            };
            let state = states.alphabet()[k].clone();
            match statewise_t_test(&d, &states, k, variance) {
                Ok(t) => Ok(StatewiseEntry { state, test: Some(t), note: None }),
                Err(Error::InsufficientData(msg)) => Ok(StatewiseEntry { state, test: None, note: Some(msg) }),
                Err(e) => Err(CliError::from(e)),
            }
        })
        .collect::<Result<Vec<_>, _>>()?;
    let dfc = dfc_select(&d, &states, &wald, a.alpha)?;
    let boot_b = if a.statewise_var == StatewiseKind::Bootstrap { a.boot.boot_b } else { 0 };
    Ok(CpaReport {
        run: RunInfo::new("cpa", a.boot.seed, boot_b, block_len_echo(a.boot.block_len), Some(a.alpha)),
        losses: display(&a.input.losses),
        states: a.input.states.as_deref().map(display),
        first: panel.method_ids()[i].clone(),
        second: panel.method_ids()[j].clone(),
        observations: n,
        cov,
        wald,
        dm,
        dm_squared: dm.statistic * dm.statistic,
        statewise,
        dfc,
    })
}

/// Reads a JSON or TOML study configuration, chosen by file extension.
pub fn read_config<T: DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let is_toml = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("toml"));
    let parse_error = |line: u64, message: String| CliError::Parse {
        path: path.to_path_buf(),
        line,
        message,
    };
    if is_toml {
        toml::from_str(&text).map_err(|e| {
            let line = e.span().map_or(0, |s| text[..s.start].lines().count().max(1) as u64);
            parse_error(line, e.message().to_string())
        })
    } else {
        serde_json::from_str(&text).map_err(|e| parse_error(e.line() as u64, e.to_string()))
    }
}

pub fn cmd_power(a: &PowerArgs) -> Result<StudyReport, CliError> {
    let mut cfg = match (&a.preset, &a.config) {
        (Some(_), Some(_)) => return Err(CliError::usage("give either --preset or --config, not both")),
        (Some(name), None) if name == "fig1" => PowerStudyConfig::figure1(),
        (Some(name), None) => return Err(CliError::usage(format!("unknown preset `{name}` (available: fig1)"))),
        (None, Some(path)) => read_config(path)?,
        (None, None) => return Err(CliError::usage("simulate power needs --preset fig1 or --config FILE")),
    };
    if let Some(r) = a.reps {
        cfg.reps = r;
    }
    if let Some(b) = a.boot_b {
        cfg.boot_b = b;
    }
    if let Some(p) = a.block_len {
        cfg.block_len = p;
    }
    if let Some(s) = a.seed {
        cfg.seed = s;
    }
    if let Some(al) = a.alpha {
        cfg.alpha = al;
    }
    check_alpha(cfg.alpha)?;
    let study = power_study(&cfg)?;
    Ok(StudyReport {
        run: RunInfo::new("simulate power", cfg.seed, cfg.boot_b, block_len_echo(cfg.block_len), Some(cfg.alpha)),
        study,
    })
}

pub fn cmd_rejection(a: &RejectionArgs) -> Result<StudyReport, CliError> {
    let mut cfg = match (a.table, &a.config) {
        (Some(_), Some(_)) => return Err(CliError::usage("give either --table or --config, not both")),
        (Some(k), None) => RejectionStudyConfig::table(k)
            .map_err(|_| CliError::usage(format!("unknown table `{k}` (available: 1, 2, 3, 4)")))?,
        (None, Some(path)) => read_config(path)?,
        (None, None) => return Err(CliError::usage("simulate rejection needs --table N or --config FILE")),
    };
    if let Some(r) = a.reps {
        cfg.reps = r;
    }
    if let Some(s) = a.seed {
        cfg.seed = s;
    }
    if let Some(al) = a.alpha {
        cfg.alpha = al;
    }
    if let Some(kind) = a.cov {
        cfg.cov = cov_estimator(kind, a.hac_lag, cfg.n)?;
    } else if a.hac_lag.is_some() {
        return Err(CliError::usage("--hac-lag requires --cov hac"));
    }
    check_alpha(cfg.alpha)?;
    let study = rejection_study(&cfg)?;
    Ok(StudyReport {
        run: RunInfo::new("simulate rejection", cfg.seed, 0, None, Some(cfg.alpha)),
        study,
    })
}

pub fn cmd_region(a: &RegionArgs) -> Result<RegionReport, CliError> {
    check_alpha(a.alpha)?;
    if a.d1_range.len() != 2 || a.d2_range.len() != 2 {
        return Err(CliError::usage("ranges take two values, `lo,hi`"));
    }
    let design = TwoStateDesign::new(a.delta1, a.v, a.p, a.sigma2)?;
    let spec = GridSpec {
        d1_range: (a.d1_range[0], a.d1_range[1]),
        d2_range: (a.d2_range[0], a.d2_range[1]),
        nx: a.resolution,
        ny: a.resolution,
    };
    let grid = rejection_region_grid(&design, a.n, a.alpha, &spec)?;
    Ok(RegionReport {
        run: RunInfo::new("simulate region", 0, 0, None, Some(a.alpha)),
        grid,
    })
}

fn split_factor_arg(arg: &str) -> (String, PathBuf) {
    match arg.split_once('=') {
        Some((name, path)) => (name.to_string(), PathBuf::from(path)),
        None => {
            let path = PathBuf::from(arg);
            let name = path
                .file_stem()
                .map_or_else(|| arg.to_string(), |s| s.to_string_lossy().into_owned());
            (name, path)
        }
    }
}

pub fn cmd_window(a: &WindowArgs) -> Result<WindowReport, CliError> {
    let criterion = match a.criterion {
        CriterionArg::Mean => WindowCriterion::RollingMean,
        CriterionArg::Max => WindowCriterion::RollingMax,
    };
    let mut windows = Vec::new();
    let mut time_index: Option<Vec<String>> = None;
    for arg in &a.factor {
        let (regime, path) = split_factor_arg(arg);
        let series = io::read_factor_csv(&path)?;
        match &time_index {
            Some(ti) if *ti != series.time => {
                return Err(CliError::usage(format!(
                    "{} does not share the time axis of the first factor file",
                    display(&path)
                )))
            }
            Some(_) => {}
            None => time_index = Some(series.time.clone()),
        }
        let window = find_stress_window(&series.values, a.win, criterion)?;
        let slice = &series.values[window.start..window.end()];
        let score = match criterion {
            WindowCriterion::RollingMean => slice.iter().sum::<f64>() / slice.len() as f64,
            WindowCriterion::RollingMax => slice.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        };
        windows.push(WindowEntry {
            regime,
            source: display(&path),
            window,
            first_time: series.time[window.start].clone(),
            last_time: series.time[window.end() - 1].clone(),
            score,
        });
    }
    let time_index = time_index.unwrap_or_default();
    let named: Vec<_> = windows.iter().map(|w| (w.regime.clone(), w.window)).collect();
    let states = states_from_windows(&named, time_index.len(), &a.baseline)?;
    if let Some(path) = &a.states_out {
        io::emit(Some(path), &io::write_state_csv(Some(&time_index), &states))?;
    }
    let state_counts = states
        .alphabet()
        .iter()
        .enumerate()
        .map(|(k, s)| (s.clone(), states.codes().iter().filter(|&&c| c == k).count()))
        .collect();
    Ok(WindowReport {
        run: RunInfo::new("stress window", 0, 0, None, None),
        win_len: a.win,
        criterion,
        baseline: a.baseline.clone(),
        windows,
        state_counts,
    })
}

pub fn cmd_bcbs(a: &BcbsArgs) -> Result<BcbsReport, CliError> {
    let table = io::read_es_csv(&a.es)?;
    let rows = table
        .rows
        .iter()
        .map(|r| {
            let horizons: Vec<(u32, f64)> = table.horizons.iter().copied().zip(r.es.iter().copied()).collect();
            let set = HorizonEsSet::new(horizons.clone(), a.base_t)?;
            Ok(BcbsRow {
                asset: r.asset.clone(),
                uc: r.uc,
                es: horizons,
                es_bcbs: es_bcbs(&set),
            })
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    Ok(BcbsReport {
        run: RunInfo::new("stress bcbs", 0, 0, None, None),
        base_t: a.base_t,
        rows,
    })
}
