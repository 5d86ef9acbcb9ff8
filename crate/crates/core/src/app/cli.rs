//! The `gbm` command line.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use super::config::{load_config, Check, ScenarioConfig};
use super::scenarios;
use super::verify::{execute, verify, write_outputs, Execution};
use crate::analysis::{destruction_dominates, near_capacity_envelopes, Gate};
use crate::error::{Error, Result};
use crate::kinetics::{Kinetics, Params, StateTriple};
use crate::ode::{
    classify_equilibrium, omega_limit_estimate, EquilibriumKind, Integrator, OdeMethod,
    DEFAULT_CLASSIFY_TOL,
};
use crate::pde::io::{write_atomic, write_snapshot};
use crate::pde::{Grid, ScalarField};
use crate::spectral::{check_rho_condition, lambda1};

/// Exit code when every requested monitor passed.
pub const EXIT_OK: i32 = 0;
/// Exit code when the run finished but at least one monitor failed.
pub const EXIT_CHECK_FAILED: i32 = 1;
/// Exit code for configuration, argument or numerical errors.
pub const EXIT_ERROR: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "gbm",
    version,
    about = "Tumor / necrosis / vasculature simulator and verification lab"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Reaction-diffusion simulations.
    Pde {
        #[command(subcommand)]
        action: PdeAction,
    },
    /// Pointwise (diffusion-free) dynamics.
    Ode {
        #[command(subcommand)]
        action: OdeAction,
    },
    /// Principal eigenvalue of −Δ + β₁·N₀ and the ρ condition.
    Eig(EigArgs),
    /// Run a scenario and every configured check.
    Verify(RunArgs),
    /// Evaluate a parameter gate (and optionally full runs) along one axis.
    Sweep(SweepArgs),
    /// List bundled scenarios, or print one.
    Scenarios { name: Option<String> },
}

#[derive(Debug, Subcommand)]
pub enum PdeAction {
    /// Simulate a scenario with its in-loop monitors.
    Run(RunArgs),
}

#[derive(Debug, Subcommand)]
pub enum OdeAction {
    /// Integrate one state and classify where it ends up.
    Run(OdeRunArgs),
    /// Estimate ω-limits of random admissible states.
    Sample(OdeSampleArgs),
}

#[derive(Debug, Clone, Args)]
pub struct ScenarioArgs {
    /// Bundled scenario name.
    #[arg(conflicts_with = "config")]
    pub scenario: Option<String>,
    /// Configuration file.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

impl ScenarioArgs {
    fn load(&self) -> Result<Option<ScenarioConfig>> {
        match (&self.scenario, &self.config) {
            (Some(name), None) => scenarios::bundled(name).map(Some),
            (None, Some(path)) => load_config(path).map(Some),
            _ => Ok(None),
        }
    }

    fn require(&self) -> Result<ScenarioConfig> {
        self.load()?.ok_or_else(|| {
            Error::InvalidArgument("give a bundled scenario name or --config PATH".into())
        })
    }
}

#[derive(Debug, Clone, Args)]
pub struct Overrides {
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub dt: Option<f64>,
    #[arg(long = "t-end")]
    pub t_end: Option<f64>,
    /// Grid size.
    #[arg(long, num_args = 2, value_names = ["NX", "NY"])]
    pub grid: Option<Vec<usize>>,
}

impl Overrides {
    fn grid(&self) -> Option<(usize, usize)> {
        self.grid.as_ref().map(|g| (g[0], g[1]))
    }

    fn apply(&self, cfg: ScenarioConfig) -> Result<ScenarioConfig> {
        cfg.with_overrides(self.dt, self.t_end, self.grid())
    }

    fn out_dir(&self, cfg: &ScenarioConfig) -> PathBuf {
        self.out
            .clone()
            .or_else(|| cfg.output.dir.clone())
            .unwrap_or_else(|| PathBuf::from("out").join(&cfg.name))
    }
}

#[derive(Debug, Clone, Args)]
pub struct RunArgs {
    #[command(flatten)]
    pub scenario: ScenarioArgs,
    #[command(flatten)]
    pub overrides: Overrides,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Rk4,
    Euler,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum KineticsArg {
    Truncated,
    Raw,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PresetArg {
    DestructionDominant,
    Angiogenic,
}

impl PresetArg {
    fn params(self) -> Params {
        match self {
            PresetArg::DestructionDominant => Params::destruction_dominant(),
            PresetArg::Angiogenic => Params::angiogenic(),
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct OdeRunArgs {
    #[command(flatten)]
    pub scenario: ScenarioArgs,
    /// Parameter preset when no scenario is given.
    #[arg(long, value_enum)]
    pub preset: Option<PresetArg>,
    /// Initial state; defaults to the scenario's initial data at its first probe.
    #[arg(long, num_args = 3, value_names = ["T", "N", "PHI"], allow_negative_numbers = true)]
    pub state: Option<Vec<f64>>,
    #[arg(long, default_value_t = crate::ode::DEFAULT_DT)]
    pub dt: f64,
    #[arg(long = "t-end", default_value_t = 2000.0)]
    pub t_end: f64,
    #[arg(long, value_enum, default_value_t = MethodArg::Rk4)]
    pub method: MethodArg,
    #[arg(long, value_enum, default_value_t = KineticsArg::Truncated)]
    pub kinetics: KineticsArg,
    /// Sampling interval of the written trajectory (days).
    #[arg(long, default_value_t = 1.0)]
    pub every: f64,
    /// Directory for `ode.csv`.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct OdeSampleArgs {
    #[command(flatten)]
    pub scenario: ScenarioArgs,
    #[arg(long, value_enum)]
    pub preset: Option<PresetArg>,
    #[arg(long, default_value_t = 100)]
    pub samples: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 1e4)]
    pub horizon: f64,
    #[arg(long, default_value_t = 0.05)]
    pub dt: f64,
}

#[derive(Debug, Clone, Args)]
pub struct EigArgs {
    #[command(flatten)]
    pub scenario: ScenarioArgs,
    #[arg(long, value_enum)]
    pub preset: Option<PresetArg>,
    /// Constant N₀ (overrides the scenario's N₀).
    #[arg(long)]
    pub n0: Option<f64>,
    #[arg(long)]
    pub beta1: Option<f64>,
    #[arg(long)]
    pub rho: Option<f64>,
    #[arg(long, num_args = 2, value_names = ["NX", "NY"])]
    pub grid: Option<Vec<usize>>,
    #[arg(long, default_value_t = crate::spectral::DEFAULT_EIGEN_TOL)]
    pub tol: f64,
    /// Write the eigenfield snapshot here.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum GateArg {
    /// δ ≥ γ/K.
    Destruction,
    /// ρ < λ₁(−Δ + β₁N₀).
    Eigen,
    /// Both near-capacity decay rates positive.
    Capacity,
}

impl GateArg {
    fn name(self) -> &'static str {
        match self {
            GateArg::Destruction => "destruction",
            GateArg::Eigen => "eigen",
            GateArg::Capacity => "capacity",
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub scenario: ScenarioArgs,
    #[arg(long, value_enum)]
    pub preset: Option<PresetArg>,
    /// Parameter to vary: rho, alpha, beta1, beta2, gamma, delta, K or kappa0.
    #[arg(long)]
    pub axis: String,
    /// `a..b` (with --points) or a comma-separated list.
    #[arg(long, allow_hyphen_values = true)]
    pub values: String,
    #[arg(long, default_value_t = 11)]
    pub points: usize,
    #[arg(long, value_enum, default_value_t = GateArg::Destruction)]
    pub gate: GateArg,
    /// Near-capacity ε for the capacity gate (default K − min N₀).
    #[arg(long)]
    pub eps: Option<f64>,
    /// Also run the scenario's checks at each point.
    #[arg(long)]
    pub run: bool,
    #[command(flatten)]
    pub overrides: Overrides,
}

/// Parses `a..b` into `points` evenly spaced values (endpoints included), or a
/// comma-separated list.
pub fn parse_values(spec: &str, points: usize) -> Result<Vec<f64>> {
    let bad = |msg: String| Error::InvalidArgument(msg);
    let num = |s: &str| {
        s.trim()
            .parse::<f64>()
            .ok()
            .filter(|v| v.is_finite())
            .ok_or_else(|| bad(format!("cannot parse '{}' as a number", s.trim())))
    };
    if let Some((a, b)) = spec.split_once("..") {
        let (a, b) = (num(a)?, num(b)?);
        return match points {
            0 => Err(bad("--points must be at least 1".into())),
            1 => Ok(vec![a]),
            n => Ok((0..n)
                .map(|i| {
                    if i + 1 == n {
                        b
                    } else {
                        a + (b - a) * i as f64 / (n - 1) as f64
                    }
                })
                .collect()),
        };
    }
    spec.split(',').map(num).collect()
}

/// Sets one named parameter.
pub fn set_param(p: &mut Params, axis: &str, value: f64) -> Result<()> {
    let slot = match axis {
        "rho" => &mut p.rho,
        "alpha" => &mut p.alpha,
        "beta1" => &mut p.beta1,
        "beta2" => &mut p.beta2,
        "gamma" => &mut p.gamma,
        "delta" => &mut p.delta,
        "K" | "k" => &mut p.k,
        "kappa0" => &mut p.kappa0,
        other => {
            return Err(Error::InvalidArgument(format!(
                "unknown sweep axis '{other}'"
            )))
        }
    };
    *slot = value;
    p.validate()
}

fn params_from(scenario: &Option<ScenarioConfig>, preset: Option<PresetArg>) -> Params {
    match (preset, scenario) {
        (Some(pr), _) => pr.params(),
        (None, Some(cfg)) => cfg.params,
        (None, None) => Params::destruction_dominant(),
    }
}

fn failure_lines(exec: &Execution) -> String {
    let mut s = String::new();
    for v in exec.report.verdicts.iter().filter(|v| !v.pass) {
        let _ = writeln!(
            s,
            "FAIL {} worst_ratio={} t_worst={}{}",
            v.monitor,
            v.worst_ratio,
            v.t_worst,
            if v.note.is_empty() {
                String::new()
            } else {
                format!(" note=\"{}\"", v.note)
            }
        );
    }
    s
}

fn finish_run(
    cfg: &ScenarioConfig,
    exec: &Execution,
    dir: &Path,
    out: &mut dyn std::io::Write,
) -> Result<i32> {
    write_outputs(cfg, exec, dir)?;
    write!(out, "{}", exec.report.summary_text())?;
    writeln!(out, "outputs in {}", dir.display())?;
    if exec.report.all_pass() {
        Ok(EXIT_OK)
    } else {
        eprint!("{}", failure_lines(exec));
        Ok(EXIT_CHECK_FAILED)
    }
}

fn pde_run(args: &RunArgs, out: &mut dyn std::io::Write) -> Result<i32> {
    let cfg = args.overrides.apply(args.scenario.require()?)?;
    let dir = args.overrides.out_dir(&cfg);
    let in_loop: Vec<Check> = cfg
        .checks
        .monitors
        .iter()
        .copied()
        .filter(|c| c.in_loop())
        .collect();
    let exec = execute(&cfg, &in_loop, Some(&dir))?;
    finish_run(&cfg, &exec, &dir, out)
}

fn verify_cmd(args: &RunArgs, out: &mut dyn std::io::Write) -> Result<i32> {
    let cfg = args.overrides.apply(args.scenario.require()?)?;
    let dir = args.overrides.out_dir(&cfg);
    let exec = verify(&cfg, Some(&dir))?;
    finish_run(&cfg, &exec, &dir, out)
}

fn initial_point(cfg: &ScenarioConfig) -> Result<StateTriple> {
    let s = cfg.initial_state()?;
    let (i, j) = cfg
        .probe_cells()
        .first()
        .copied()
        .unwrap_or((cfg.grid.nx / 2, cfg.grid.ny / 2));
    Ok(s.cell(cfg.grid.index(i, j)))
}

fn ode_run(args: &OdeRunArgs, out: &mut dyn std::io::Write) -> Result<i32> {
    let scenario = args.scenario.load()?;
    let p = params_from(&scenario, args.preset);
    let s0 = match (&args.state, &scenario) {
        (Some(v), _) => StateTriple::new(v[0], v[1], v[2]),
        (None, Some(cfg)) => initial_point(cfg)?,
        (None, None) => {
            return Err(Error::InvalidArgument(
                "give --state T N PHI, a bundled scenario or --config".into(),
            ))
        }
    };
    let method = match args.method {
        MethodArg::Rk4 => OdeMethod::Rk4,
        MethodArg::Euler => OdeMethod::Euler,
    };
    let kinetics = match args.kinetics {
        KineticsArg::Truncated => Kinetics::Truncated,
        KineticsArg::Raw => Kinetics::Raw,
    };
    let integrator = Integrator::new(method, kinetics, args.dt);
    let mut csv = String::from("t,T,N,Phi,S\n");
    let mut next = 0.0;
    let final_state = integrator.run(s0, args.t_end, &p, |t, s| {
        if t + 1e-9 * args.dt >= next || args.every <= 0.0 {
            let _ = writeln!(csv, "{t},{},{},{},{}", s.tumor, s.necrosis, s.vasc, s.sum());
            next += args.every.max(0.0);
        }
    })?;
    if let Some(dir) = &args.out {
        std::fs::create_dir_all(dir)?;
        write_atomic(&dir.join("ode.csv"), &csv)?;
    }
    let class = classify_equilibrium(&final_state, &p, DEFAULT_CLASSIFY_TOL)?;
    writeln!(
        out,
        "method: {} dt: {} t_end: {}",
        method.name(),
        args.dt,
        args.t_end
    )?;
    writeln!(
        out,
        "initial: T = {} N = {} Phi = {}",
        s0.tumor, s0.necrosis, s0.vasc
    )?;
    writeln!(
        out,
        "final:   T = {:.12e} N = {:.12e} Phi = {:.12e}",
        final_state.tumor, final_state.necrosis, final_state.vasc
    )?;
    writeln!(
        out,
        "class: {:?} (residual {:.3e})",
        class.kind, class.residual
    )?;
    Ok(EXIT_OK)
}

fn ode_sample(args: &OdeSampleArgs, out: &mut dyn std::io::Write) -> Result<i32> {
    let scenario = args.scenario.load()?;
    let p = params_from(&scenario, args.preset);
    let mut rng = StdRng::seed_from_u64(args.seed);
    let mut counts = std::collections::BTreeMap::new();
    let (mut worst_t, mut worst_phi) = (0.0f64, 0.0f64);
    let mut unconverged = 0;
    let mut drawn = 0;
    while drawn < args.samples {
        let s = StateTriple::new(
            rng.gen_range(0.0..=p.k),
            rng.gen_range(0.0..=p.k),
            rng.gen_range(0.0..=p.k),
        );
        if s.sum() > p.k || (s.tumor == 0.0 && s.necrosis == 0.0) {
            continue;
        }
        drawn += 1;
        let w = omega_limit_estimate(s, &p, args.horizon, args.dt)?;
        *counts
            .entry(format!("{:?}", w.class.kind))
            .or_insert(0usize) += 1;
        worst_t = worst_t.max(w.state.tumor.abs());
        worst_phi = worst_phi.max(w.state.vasc.abs());
        unconverged += usize::from(!w.converged);
    }
    writeln!(
        out,
        "samples: {drawn} seed: {} horizon: {}",
        args.seed, args.horizon
    )?;
    for (kind, n) in &counts {
        writeln!(out, "  {kind}: {n}")?;
    }
    writeln!(
        out,
        "max final T: {worst_t:.3e}  max final Phi: {worst_phi:.3e}  unconverged: {unconverged}"
    )?;
    let all_necrotic = counts
        .keys()
        .all(|k| k == &format!("{:?}", EquilibriumKind::Necrotic));
    Ok(if all_necrotic && unconverged == 0 {
        EXIT_OK
    } else {
        EXIT_CHECK_FAILED
    })
}

/// `x` rounded to 12 significant digits, so round-off does not show in reports.
fn significant(x: f64) -> f64 {
    format!("{x:.11e}").parse().unwrap_or(x)
}

fn eig(args: &EigArgs, out: &mut dyn std::io::Write) -> Result<i32> {
    let scenario = args.scenario.load()?;
    let mut p = params_from(&scenario, args.preset);
    if let Some(b) = args.beta1 {
        set_param(&mut p, "beta1", b)?;
    }
    if let Some(r) = args.rho {
        set_param(&mut p, "rho", r)?;
    }
    let bounds = scenario.as_ref().map_or((-2.0, 2.0, -2.0, 2.0), |c| {
        (c.grid.x0, c.grid.x1, c.grid.y0, c.grid.y1)
    });
    let grid = match (&args.grid, &scenario) {
        (Some(g), _) => Grid::new(g[0], g[1], bounds)?,
        (None, Some(cfg)) => cfg.grid,
        (None, None) => Grid::square(64)?,
    };
    let n0 = match (args.n0, &scenario) {
        (Some(c), _) => ScalarField::constant(grid, c),
        (None, Some(cfg)) => {
            let mut cfg = cfg.clone();
            cfg.grid = grid;
            cfg.initial_state()?.necrosis
        }
        (None, None) => {
            return Err(Error::InvalidArgument(
                "give --n0, a bundled scenario or --config".into(),
            ))
        }
    };
    let b = ScalarField::from_values(grid, n0.values().iter().map(|v| p.beta1 * v).collect())?;
    let r = lambda1(&b, args.tol)?;
    let cond = check_rho_condition(&p, &n0)?;
    writeln!(out, "lambda1 = {}", significant(r.lambda1))?;
    writeln!(out, "iterations = {}", r.iterations)?;
    writeln!(out, "residual = {:.3e}", r.residual)?;
    writeln!(
        out,
        "rho = {}  margin = {}  condition {}",
        p.rho,
        significant(cond.margin),
        if cond.holds { "holds" } else { "fails" }
    )?;
    if let Some(dir) = &args.out {
        std::fs::create_dir_all(dir)?;
        write_snapshot(&dir.join("eigenfield.txt"), &r.eigenfield, 0.0)?;
    }
    Ok(EXIT_OK)
}

/// One sweep row: `(applicable, margin)` of the chosen gate at `p`.
pub fn gate_at(
    gate: GateArg,
    p: &Params,
    n0: &ScalarField,
    eps: Option<f64>,
) -> Result<(bool, f64)> {
    match gate {
        GateArg::Destruction => Ok((destruction_dominates(p), p.delta - p.gamma / p.k)),
        GateArg::Eigen => {
            let c = check_rho_condition(p, n0)?;
            Ok((c.holds, c.margin))
        }
        GateArg::Capacity => {
            let eps = eps.unwrap_or(p.k - n0.min());
            let t_rate = p.beta1 * (p.k - eps) - p.rho * eps / p.k;
            let phi_rate = p.beta2 * (p.k - eps) - p.gamma * eps / p.k;
            let ok = matches!(
                near_capacity_envelopes(p, eps, 1.0, 1.0)?,
                Gate::Applicable(_)
            );
            Ok((ok, t_rate.min(phi_rate)))
        }
    }
}

fn sweep(args: &SweepArgs, out: &mut dyn std::io::Write) -> Result<i32> {
    let scenario = args.scenario.load()?;
    if args.run && scenario.is_none() {
        return Err(Error::InvalidArgument(
            "--run needs a scenario or --config".into(),
        ));
    }
    let scenario = scenario.map(|c| args.overrides.apply(c)).transpose()?;
    let base = params_from(&scenario, args.preset);
    let values = parse_values(&args.values, args.points)?;
    let n0 = match &scenario {
        Some(cfg) => cfg.initial_state()?.necrosis,
        None => ScalarField::constant(Grid::square(32)?, 1.0),
    };
    let mut csv = String::from("axis,value,gate,verdict,margin,run\n");
    let mut code = EXIT_OK;
    for v in values {
        let mut p = base;
        set_param(&mut p, &args.axis, v)?;
        let (ok, margin) = gate_at(args.gate, &p, &n0, args.eps)?;
        let run = if args.run {
            let mut cfg = scenario.clone().expect("checked above");
            cfg.params = p;
            let cfg = cfg.with_overrides(None, None, None)?;
            let exec = verify(&cfg, None)?;
            if exec.report.all_pass() {
                "pass"
            } else {
                code = EXIT_CHECK_FAILED;
                "fail"
            }
        } else {
            "skipped"
        };
        let _ = writeln!(
            csv,
            "{},{v},{},{},{margin},{run}",
            args.axis,
            args.gate.name(),
            if ok { "applicable" } else { "inapplicable" }
        );
    }
    write!(out, "{csv}")?;
    if let Some(dir) = &args.overrides.out {
        std::fs::create_dir_all(dir)?;
        write_atomic(&dir.join("sweep.csv"), &csv)?;
    }
    Ok(code)
}

fn list_scenarios(name: &Option<String>, out: &mut dyn std::io::Write) -> Result<i32> {
    match name {
        Some(n) => {
            let text = scenarios::text(n)
                .ok_or_else(|| Error::InvalidArgument(format!("unknown scenario '{n}'")))?;
            write!(out, "{text}")?;
        }
        None => {
            for n in scenarios::names() {
                writeln!(out, "{n}")?;
            }
        }
    }
    Ok(EXIT_OK)
}

/// Executes a parsed command, writing human-readable output to `out`.
pub fn dispatch(cli: &Cli, out: &mut dyn std::io::Write) -> Result<i32> {
    match &cli.command {
        Command::Pde {
            action: PdeAction::Run(a),
        } => pde_run(a, out),
        Command::Ode {
            action: OdeAction::Run(a),
        } => ode_run(a, out),
        Command::Ode {
            action: OdeAction::Sample(a),
        } => ode_sample(a, out),
        Command::Eig(a) => eig(a, out),
        Command::Verify(a) => verify_cmd(a, out),
        Command::Sweep(a) => sweep(a, out),
        Command::Scenarios { name } => list_scenarios(name, out),
    }
}

/// Parses `args` and runs; returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_ERROR } else { EXIT_OK };
        }
    };
    let stdout = std::io::stdout();
    let mut lock = stdout.lock();
    match dispatch(&cli, &mut lock) {
        Ok(code) => code,
        Err(e) => {
            let _ = lock.flush();
            eprintln!("error: {e}");
            EXIT_ERROR
        }
    }
}
