//! Command-line front end: argument parsing, config-file merging, file
//! output and the exit-code table.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Deserialize;

use crate::dynamics::{tune_self_loops_report, ClosedLoopSystem};
use crate::error::{Error, Result};
use crate::experiments::{self, ExperimentConfig};
use crate::game::{solve_stackelberg, verify_stackelberg, GameSetup};
use crate::graph::{distance, enumerate_dominating_sets_with, parse_network, subset_count, MonitorSet, Network};
use crate::impact::{worst_case_impact_with, Belief, ImpactResult, ImpactSettings};
use crate::oracle::{discretized_impact_oracle, dominating_oracle, sweep_ratio_oracle, DiscretizedAttackProblem};
use crate::report::{sig9, to_json_pretty};

pub const EXIT_OK: i32 = 0;
pub const EXIT_IO: i32 = 1;
pub const EXIT_SCHEMA: i32 = 2;
pub const EXIT_GRAPH: i32 = 3;
pub const EXIT_EMPTY: i32 = 4;
pub const EXIT_UNBOUNDED: i32 = 5;
pub const EXIT_ITERATION_LIMIT: i32 = 6;
pub const EXIT_INVALID_SCENARIO: i32 = 7;
pub const EXIT_NUMERICAL: i32 = 8;
pub const EXIT_GENERATION: i32 = 9;
pub const EXIT_SCOPE: i32 = 10;

pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Schema(_) => EXIT_SCHEMA,
        Error::Graph(_) => EXIT_GRAPH,
        Error::EmptyCollection { .. } => EXIT_EMPTY,
        Error::IterationLimit { .. } => EXIT_ITERATION_LIMIT,
        Error::InvalidScenario(_) => EXIT_INVALID_SCENARIO,
        Error::Numerical(_) | Error::RootSolve(_) => EXIT_NUMERICAL,
        Error::Generation { .. } => EXIT_GENERATION,
        Error::Scope(_) => EXIT_SCOPE,
        Error::Io(_) => EXIT_IO,
    }
}

/// Relative tolerance of `--verify` against the sweep oracle.
const SWEEP_TOL: f64 = 5e-3;
/// Relative tolerance of `--verify` against the discretized oracle.
const DISCRETIZED_TOL: f64 = 5e-2;
const SWEEP_GRID: usize = 4096;

#[derive(Debug, Parser)]
#[command(name = "secalloc", version, about = "Sensor placement against stealthy data-injection attacks")]
pub struct Cli {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args, Default)]
pub struct CommonArgs {
    /// Network JSON file.
    #[arg(long, global = true)]
    pub network: Option<PathBuf>,
    /// Sensor budget n_s.
    #[arg(long, global = true)]
    pub budget: Option<usize>,
    /// Cost per sensor.
    #[arg(long, global = true)]
    pub kappa: Option<f64>,
    /// `uniform` or a belief-table JSON file.
    #[arg(long, global = true)]
    pub belief: Option<String>,
    /// Required distance of invariant zeros from the imaginary axis after tuning.
    #[arg(long, global = true)]
    pub margin: Option<f64>,
    #[arg(long, global = true)]
    pub workers: Option<usize>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// JSON config using the flag names as keys; flags take precedence.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Re-check results with the independent oracles.
    #[arg(long, global = true)]
    pub verify: bool,
    /// Exit with code 5 if the impact is unbounded.
    #[arg(long, global = true)]
    pub require_bounded: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Enumerate dominating sets within the budget.
    Dominating,
    /// Worst-case impact for one attack, target and monitor set.
    Impact(ImpactArgs),
    /// Full pipeline: tune, enumerate, solve the game.
    Solve {
        /// Also write the invariant-zero report.
        #[arg(long)]
        dump_zeros: bool,
    },
    /// Reproducible studies.
    #[command(subcommand)]
    Experiment(Experiment),
}

#[derive(Debug, Args)]
pub struct ImpactArgs {
    /// Attack vertex (1-based).
    #[arg(long)]
    pub attack: usize,
    /// Target vertex (1-based).
    #[arg(long)]
    pub target: usize,
    /// Comma-separated monitor vertices (1-based).
    #[arg(long, value_delimiter = ',', required = true)]
    pub monitors: Vec<usize>,
    /// Tune self-loop gains before computing.
    #[arg(long)]
    pub tune: bool,
}

#[derive(Debug, Subcommand)]
pub enum Experiment {
    /// Mean dominating-set counts against subset counts.
    Fig2 {
        #[arg(long, value_delimiter = ',', default_value = "10,15,20,25")]
        n_list: Vec<usize>,
        #[arg(long, default_value_t = 100)]
        samples: usize,
        #[arg(long, default_value_t = 0.5)]
        q: f64,
    },
    /// 50-vertex placement run.
    Demo50,
    /// Time-domain trace of the calibrated worst-case attack.
    Simulate {
        #[command(flatten)]
        case: ImpactArgs,
        /// Simulated time; defaults to 200/λ_min.
        #[arg(long)]
        duration: Option<f64>,
        /// Approximate number of CSV rows.
        #[arg(long, default_value_t = 2000)]
        rows: usize,
    },
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    network: Option<PathBuf>,
    budget: Option<usize>,
    kappa: Option<f64>,
    belief: Option<String>,
    margin: Option<f64>,
    workers: Option<usize>,
    seed: Option<u64>,
    out: Option<PathBuf>,
    verify: Option<bool>,
    require_bounded: Option<bool>,
    eps_cert: Option<f64>,
    eps_gamma: Option<f64>,
    max_cuts: Option<usize>,
    initial_grid: Option<usize>,
}

/// Resolved settings for one invocation.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub network_path: Option<PathBuf>,
    pub budget: usize,
    pub kappa: f64,
    pub belief: Option<String>,
    pub margin: f64,
    pub settings: ImpactSettings,
    pub workers: usize,
    pub seed: u64,
    pub out: PathBuf,
    pub verify: bool,
    pub require_bounded: bool,
}

impl RunConfig {
    pub fn resolve(args: &CommonArgs) -> Result<RunConfig> {
        let file = match &args.config {
            Some(path) => serde_json::from_str::<ConfigFile>(&read_input(path)?)
                .map_err(|e| Error::Schema(format!("{}: {e}", path.display())))?,
            None => ConfigFile::default(),
        };
        let defaults = ImpactSettings::default();
        let cfg = RunConfig {
            network_path: args.network.clone().or(file.network),
            budget: args.budget.or(file.budget).unwrap_or(3),
            kappa: args.kappa.or(file.kappa).unwrap_or(5.0),
            belief: args.belief.clone().or(file.belief),
            margin: args.margin.or(file.margin).unwrap_or(0.1),
            settings: ImpactSettings {
                eps_cert: file.eps_cert.unwrap_or(defaults.eps_cert),
                eps_gamma: file.eps_gamma.unwrap_or(defaults.eps_gamma),
                max_cuts: file.max_cuts.unwrap_or(defaults.max_cuts),
                initial_grid: file.initial_grid.unwrap_or(defaults.initial_grid),
                ..defaults
            },
            workers: args.workers.or(file.workers).unwrap_or(1),
            seed: args.seed.or(file.seed).unwrap_or(1),
            out: args.out.clone().or(file.out).unwrap_or_else(|| PathBuf::from(".")),
            verify: args.verify || file.verify.unwrap_or(false),
            require_bounded: args.require_bounded || file.require_bounded.unwrap_or(false),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<()> {
        let s = &self.settings;
        if !(s.eps_cert > 0.0 && s.eps_gamma > 0.0) || s.max_cuts == 0 || s.initial_grid == 0 {
            return Err(Error::Schema("tolerances and grid sizes must be positive".into()));
        }
        if self.workers == 0 {
            return Err(Error::Schema("workers must be at least 1".into()));
        }
        if self.budget == 0 {
            return Err(Error::Schema("budget must be at least 1".into()));
        }
        Ok(())
    }

    fn load_network(&self) -> Result<Network> {
        let path = self.network_path.as_ref().ok_or_else(|| Error::Schema("--network is required".into()))?;
        parse_network(&read_input(path)?)
    }

    fn load_belief(&self, n: usize) -> Result<Belief> {
        match self.belief.as_deref() {
            None | Some("uniform") => Ok(Belief::Uniform),
            Some(path) => Belief::parse_table(&read_input(Path::new(path))?, n),
        }
    }

    fn write(&self, name: &str, contents: &str) -> Result<PathBuf> {
        fs::create_dir_all(&self.out)?;
        let path = self.out.join(name);
        fs::write(&path, contents)?;
        Ok(path)
    }
}

/// Unreadable inputs are schema errors, not I/O failures.
fn read_input(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::Schema(format!("cannot read {}: {e}", path.display())))
}

/// Parses arguments, runs the command and returns the process exit code.
pub fn run_from<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_SCHEMA } else { EXIT_OK };
        }
    };
    match run(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

pub fn run(cli: &Cli) -> Result<i32> {
    let cfg = RunConfig::resolve(&cli.common)?;
    match &cli.command {
        Command::Dominating => cmd_dominating(&cfg),
        Command::Impact(args) => cmd_impact(&cfg, args),
        Command::Solve { dump_zeros } => cmd_solve(&cfg, *dump_zeros),
        Command::Experiment(which) => cmd_experiment(&cfg, which),
    }
}

pub fn cmd_dominating(cfg: &RunConfig) -> Result<i32> {
    let net = cfg.load_network()?;
    let budget = cfg.budget.min(net.n());
    let collection = enumerate_dominating_sets_with(&net, budget, cfg.workers)?;
    if cfg.verify {
        if let Some(bad) = collection.sets().iter().find(|m| !dominating_oracle(&net, m)) {
            return Err(Error::Numerical(format!("verification failed: {:?} is not dominating", bad.one_based())));
        }
    }
    cfg.write("dominating.json", &collection.to_json())?;
    #[derive(serde::Serialize)]
    struct Summary {
        n: usize,
        budget: usize,
        count: usize,
        subset_count: u128,
    }
    let summary = Summary { n: net.n(), budget, count: collection.len(), subset_count: subset_count(net.n(), budget) };
    cfg.write("dominating_summary.json", &to_json_pretty(&summary))?;
    println!("dominating sets: {} of {} subsets", collection.len(), subset_count(net.n(), budget));
    Ok(EXIT_OK)
}

struct Case {
    a: usize,
    rho: usize,
    monitors: MonitorSet,
}

fn resolve_case(net: &Network, args: &ImpactArgs) -> Result<Case> {
    let n = net.n();
    let index = |v: usize, what: &str| -> Result<usize> {
        if (1..=n).contains(&v) {
            Ok(v - 1)
        } else {
            Err(Error::InvalidScenario(format!("{what} vertex {v} is not in 1..={n}")))
        }
    };
    let a = index(args.attack, "attack")?;
    let rho = index(args.target, "target")?;
    if a == rho {
        return Err(Error::InvalidScenario("the target must differ from the attack vertex".into()));
    }
    for &m in &args.monitors {
        index(m, "monitor")?;
    }
    let monitors = MonitorSet::from_one_based(&args.monitors, args.monitors.len(), n)
        .map_err(|e| Error::InvalidScenario(e.to_string()))?;
    Ok(Case { a, rho, monitors })
}

fn prepare(cfg: &RunConfig, net: Network, tune: bool) -> Result<ClosedLoopSystem> {
    let net = if tune {
        let (tuned, offset) = tune_self_loops_report(&net, cfg.margin)?;
        if offset > 0.0 {
            println!("self-loop offset: {}", sig9(offset));
        }
        tuned
    } else {
        net
    };
    ClosedLoopSystem::build(&net)
}

pub fn cmd_impact(cfg: &RunConfig, args: &ImpactArgs) -> Result<i32> {
    let net = cfg.load_network()?;
    let case = resolve_case(&net, args)?;
    let sys = prepare(cfg, net, args.tune)?;
    let result = worst_case_impact_with(&sys, case.a, case.rho, &case.monitors, &cfg.settings)?;
    if cfg.verify {
        verify_impact(&sys, &case, &result)?;
        println!("verify: ok");
    }
    cfg.write("impact.json", &result.to_json())?;
    match result.value.filter(|_| result.is_bounded()) {
        Some(v) => println!("impact: {}", sig9(v)),
        None => println!("impact: unbounded"),
    }
    if cfg.require_bounded && !result.is_bounded() {
        return Ok(EXIT_UNBOUNDED);
    }
    Ok(EXIT_OK)
}

/// Boundedness against graph distances, values against the sweep (one
/// monitor) or discretized (two monitors) oracle.
fn verify_impact(sys: &ClosedLoopSystem, case: &Case, result: &ImpactResult) -> Result<()> {
    let net = sys.net();
    let nearest = case.monitors.vertices().iter().map(|&m| distance(net, m, case.a)).min().unwrap();
    let bounded = nearest <= distance(net, case.rho, case.a);
    if bounded != result.is_bounded() {
        return Err(Error::Numerical(format!("verification failed: distance law says bounded = {bounded}")));
    }
    let Some(value) = result.value.filter(|_| bounded) else {
        return Ok(());
    };
    let delta = net.delta();
    let monitors = case.monitors.vertices();
    let (oracle, tol) = match monitors {
        [m] => (sweep_ratio_oracle(sys, case.a, case.rho, *m, delta[*m], SWEEP_GRID), SWEEP_TOL),
        [_, _] => {
            let problem = DiscretizedAttackProblem::new(sys, case.a, case.rho, monitors)?;
            let thresholds: Vec<f64> = monitors.iter().map(|&m| delta[m]).collect();
            (discretized_impact_oracle(&problem, &thresholds)?, DISCRETIZED_TOL)
        }
        _ => return Err(Error::Scope("--verify handles at most two monitors".into())),
    };
    if (value - oracle).abs() > tol * oracle.abs() {
        return Err(Error::Numerical(format!("verification failed: certified {value} vs oracle {oracle}")));
    }
    Ok(())
}

pub fn cmd_solve(cfg: &RunConfig, dump_zeros: bool) -> Result<i32> {
    let raw = cfg.load_network()?;
    let budget = cfg.budget.min(raw.n());
    let belief = cfg.load_belief(raw.n())?;
    let collection = enumerate_dominating_sets_with(&raw, budget, cfg.workers)?;
    let sys = prepare(cfg, raw, true)?;
    let mut setup = GameSetup::new(belief, cfg.kappa)?.with_workers(cfg.workers);
    setup.settings = cfg.settings.clone();
    let solution = solve_stackelberg(&sys, &collection, &setup)?;
    if cfg.verify {
        if !collection.sets().iter().all(|m| dominating_oracle(sys.net(), m)) || !verify_stackelberg(&solution, &sys, &setup) {
            return Err(Error::Numerical("verification failed: solution is not Stackelberg optimal".into()));
        }
        println!("verify: ok");
    }
    cfg.write("solution.json", &solution.to_json())?;
    if dump_zeros {
        cfg.write("zeros.json", &sys.full_zero_report()?.to_json())?;
    }
    println!("m_star: {:?}", solution.best_monitor_set.one_based());
    println!("a_star: {}", solution.best_attack + 1);
    println!("r_star: {}", sig9(solution.r_star));
    println!("q_star: {}", sig9(solution.q_star));
    Ok(EXIT_OK)
}

pub fn cmd_experiment(cfg: &RunConfig, which: &Experiment) -> Result<i32> {
    match which {
        Experiment::Fig2 { n_list, samples, q } => {
            let ecfg = ExperimentConfig {
                n_list: n_list.clone(),
                q: *q,
                samples: *samples,
                n_s: cfg.budget,
                seed: cfg.seed,
                kappa: cfg.kappa,
                ..Default::default()
            };
            let rows = with_pool(cfg.workers, || experiments::count_dominating_trend(&ecfg))?;
            let path = cfg.write("fig2.csv", &experiments::trend_csv(&rows))?;
            println!("wrote {}", path.display());
        }
        Experiment::Demo50 => {
            let mut dcfg = experiments::DemoConfig::fifty_vertex(cfg.seed, cfg.workers);
            dcfg.kappa = cfg.kappa;
            dcfg.margin = cfg.margin;
            dcfg.n_s = cfg.budget;
            let outcome = experiments::run_demo(&dcfg)?;
            cfg.write("demo50_solution.json", &outcome.solution.to_json())?;
            cfg.write("demo50_summary.json", &outcome.summary.to_json())?;
            let s = &outcome.summary;
            println!("seed: {} (requested {})", s.seed_used, s.seed_requested);
            println!("dominating sets: {} of {}", s.dominating_count, s.subset_count);
            println!("m_star: {:?}  a_star: {}", s.m_star, s.a_star);
            println!("r_star: {}  q_star: {}", sig9(s.r_star), sig9(s.q_star));
        }
        Experiment::Simulate { case: args, duration, rows } => {
            let net = cfg.load_network()?;
            let case = resolve_case(&net, args)?;
            let sys = prepare(cfg, net, args.tune)?;
            let impact = worst_case_impact_with(&sys, case.a, case.rho, &case.monitors, &cfg.settings)?;
            let duration = duration.unwrap_or_else(|| experiments::default_duration(&sys));
            let trace = experiments::simulate_attack(&sys, case.a, case.rho, &case.monitors, &impact, duration)?;
            cfg.write("trace.csv", &trace.to_csv(experiments::stride_for(&trace, *rows)))?;
            cfg.write("trace.json", &trace.sidecar_json())?;
            println!("target power: {}", sig9(trace.final_target_power()));
            println!("impact: {}", impact.value.map_or("unbounded".into(), |v| sig9(v).to_string()));
        }
    }
    Ok(EXIT_OK)
}

fn with_pool<T: Send>(workers: usize, f: impl FnOnce() -> Result<T> + Send) -> Result<T> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::Numerical(format!("thread pool: {e}")))?;
    pool.install(f)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes_are_distinct() {
        let errors = [
            Error::Io(std::io::Error::other("x")),
            Error::Schema(String::new()),
            Error::Graph(crate::error::GraphError::Disconnected),
            Error::EmptyCollection { budget: 1 },
            Error::IterationLimit { cuts: 1 },
            Error::InvalidScenario(String::new()),
            Error::Numerical(String::new()),
            Error::Generation { n: 2, q: 0.1, attempts: 1 },
            Error::Scope(String::new()),
        ];
        let mut codes: Vec<i32> = errors.iter().map(exit_code).collect();
        codes.sort();
        codes.dedup();
        assert_eq!(codes, vec![1, 2, 3, 4, 6, 7, 8, 9, 10]);
    }

    #[test]
    fn flags_override_config() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("cfg.json");
        fs::write(&path, r#"{"budget": 2, "kappa": 1.5}"#).unwrap();
        let args = CommonArgs { config: Some(path), budget: Some(4), ..Default::default() };
        let cfg = RunConfig::resolve(&args).unwrap();
        assert_eq!(cfg.budget, 4);
        assert_eq!(cfg.kappa, 1.5);
    }

    #[test]
    fn unknown_config_key_is_schema_error() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("cfg.json");
        fs::write(&path, r#"{"bugdet": 2}"#).unwrap();
        let args = CommonArgs { config: Some(path), ..Default::default() };
        assert!(matches!(RunConfig::resolve(&args), Err(Error::Schema(_))));
    }
}
