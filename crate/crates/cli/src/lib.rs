//! `nli`: figure data, parameter sweeps, validation and Monte Carlo runs
//! for SU(1,1) nonlinear interferometers.
//!
//! [`execute`] runs one invocation and captures its output; the `nli`
//! binary forwards it to the terminal. Exit codes: 0 success, 1 validation
//! failure, 2 usage error, 3 I/O error.

mod config;
mod output;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use nli_core::constants::{with_constants, ClosedFormConstants};
use nli_core::estimation::{monte_carlo_uncertainty, Sampler, REFERENCE_PHASE};
use nli_core::optimizer::{sweep, Objective, SweepAxis};
use nli_core::oracle::fock::DEFAULT_CUTOFF;
use nli_core::reports::{self, Fig2Spec, Fig3Spec, Table1Params};
use nli_core::validate::{run_validation, Tier};
use nli_core::{Flavor, GainSetting, NliConfig, NliError};

use config::ConfigFile;
use output::{csv, json, write_file};

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Io(String),
    /// Message and the report that failed.
    Validation(String, String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Validation(..) => 1,
            CliError::Usage(_) => 2,
            CliError::Io(_) => 3,
        }
    }
}

impl From<NliError> for CliError {
    fn from(e: NliError) -> Self {
        CliError::Usage(e.to_string())
    }
}

#[derive(Parser)]
#[command(
    name = "nli",
    version,
    about = "Phase sensitivity of SU(1,1) nonlinear interferometers"
)]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

impl std::str::FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        <Format as ValueEnum>::from_str(s, true)
    }
}

#[derive(Args)]
struct Common {
    /// Output file (standard output when absent).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Output format [default: csv].
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Seed of the random number generator [default: 1].
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Gain V_A of the source crystal [default: 5].
    #[arg(long = "v-a", global = true, allow_negative_numbers = true)]
    v_a: Option<f64>,
    /// Gain V_B of the analyzer crystal [default: 5].
    #[arg(long = "v-b", global = true, allow_negative_numbers = true)]
    v_b: Option<f64>,
    /// Internal reflectivity R_d of every arm [default: 0].
    #[arg(long, global = true, allow_negative_numbers = true)]
    rd: Option<f64>,
    /// Transmittance of the (first) arm; overrides --rd.
    #[arg(long, global = true, allow_negative_numbers = true)]
    t1: Option<f64>,
    /// Transmittance of the second arm (nondegenerate).
    #[arg(long, global = true, allow_negative_numbers = true)]
    t2: Option<f64>,
    /// Detection efficiency (of the first port) [default: 1].
    #[arg(long, global = true, allow_negative_numbers = true)]
    eta: Option<f64>,
    /// Detection efficiency of the second port (sum port).
    #[arg(long, global = true, allow_negative_numbers = true)]
    eta2: Option<f64>,
    /// Interference phase in radians.
    #[arg(long, global = true, allow_negative_numbers = true)]
    phi: Option<f64>,
    /// Interferometer flavor: degenerate, port1, port2 or sum [default: degenerate].
    #[arg(long, global = true)]
    flavor: Option<String>,
    /// File of key=value defaults; command-line flags take precedence.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Detection-loss deviation of the balanced interferometer.
    Fig2(Fig2Args),
    /// Optimal uncertainty and inverse Fano factor versus internal loss.
    Fig3(Fig3Args),
    /// Degenerate/nondegenerate comparison table with lossless-limit checks.
    Table1,
    /// Numeric optimum along one parameter axis.
    Sweep(SweepArgs),
    /// Closed forms against the oracles and invariants.
    Validate(ValidateArgs),
    /// Monte Carlo run of the arccos phase estimator.
    Mc(McArgs),
}

#[derive(Args)]
struct Fig2Args {
    /// Gains V [default: 5,25].
    #[arg(long = "v-list", value_delimiter = ',')]
    v_list: Vec<f64>,
    /// Detection efficiencies [default: 0.01 to 1 in steps of 0.01].
    #[arg(long = "eta-list", value_delimiter = ',')]
    eta_list: Vec<f64>,
    /// Phases [default: 0, pi/10, pi].
    #[arg(long = "phi-list", value_delimiter = ',')]
    phi_list: Vec<f64>,
}

#[derive(Args)]
struct Fig3Args {
    /// Gain of the strong crystal.
    #[arg(long = "v-strong", default_value_t = 25.0)]
    v_strong: f64,
    /// Gain of the weak crystal.
    #[arg(long = "v-weak", default_value_t = 5.0)]
    v_weak: f64,
    /// Largest internal reflectivity of the grid starting at 0.
    #[arg(long = "rd-max", default_value_t = 0.5)]
    rd_max: f64,
    /// Number of grid points.
    #[arg(long = "rd-points", default_value_t = 51)]
    rd_points: usize,
}

#[derive(Clone, Copy, ValueEnum)]
enum ObjectiveArg {
    Bare,
    Detected,
}

#[derive(Args)]
struct SweepArgs {
    /// Swept parameter: R_d, V_A, V_B, eta, T_1 or T_2 (case, `_` and `-` are ignored).
    #[arg(long)]
    axis: String,
    /// First grid value.
    #[arg(long, allow_negative_numbers = true)]
    from: Option<f64>,
    /// Last grid value.
    #[arg(long, allow_negative_numbers = true)]
    to: Option<f64>,
    /// Number of evenly spaced grid values.
    #[arg(long, default_value_t = 51)]
    points: usize,
    /// Explicit grid; replaces --from/--to/--points.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    values: Vec<f64>,
    /// Minimize the uncertainty without (bare) or with detection loss.
    #[arg(long, value_enum, default_value = "bare")]
    objective: ObjectiveArg,
}

#[derive(Args)]
struct ValidateArgs {
    /// fast: closed forms against Wick moments and the optimizer; full adds Fock and Monte Carlo checks.
    #[arg(long, default_value = "fast")]
    tier: Tier,
    /// Multiply one closed-form constant by FACTOR (mutation check), as NAME=FACTOR.
    #[arg(long)]
    perturb: Option<String>,
}

#[derive(Clone, Copy, ValueEnum)]
enum SamplerArg {
    Gaussian,
    Fock,
}

#[derive(Args)]
struct McArgs {
    /// Measurements averaged per estimate.
    #[arg(long, default_value_t = 100_000)]
    p: usize,
    /// Independent estimates; the sample variance is taken over these.
    #[arg(long, default_value_t = 400)]
    repetitions: usize,
    /// Photon-count distribution: Gaussian with the closed-form moments, or exact Fock.
    #[arg(long, value_enum, default_value = "gaussian")]
    sampler: SamplerArg,
    /// Fock-space cutoff of the exact sampler.
    #[arg(long, default_value_t = DEFAULT_CUTOFF)]
    cutoff: usize,
    /// Squeeze parameter of the source; overrides --v-a.
    #[arg(long = "r-a")]
    r_a: Option<f64>,
    /// Squeeze parameter of the analyzer; overrides --v-b.
    #[arg(long = "r-b")]
    r_b: Option<f64>,
}

/// Flags merged with the configuration file and the built-in defaults.
struct Settings {
    out: Option<PathBuf>,
    format: Format,
    seed: u64,
    v_a: f64,
    v_b: f64,
    rd: Option<f64>,
    t1: Option<f64>,
    t2: Option<f64>,
    eta: Option<f64>,
    eta2: Option<f64>,
    phi: Option<f64>,
    flavor: Flavor,
}

impl Settings {
    fn resolve(common: Common) -> Result<Self, CliError> {
        let file = match &common.config {
            Some(path) => ConfigFile::load(path)?,
            None => ConfigFile::default(),
        };
        let flavor = match common.flavor.or(file.get("flavor")?) {
            Some(name) => name.parse::<Flavor>()?,
            None => Flavor::Degenerate,
        };
        Ok(Self {
            out: common.out,
            format: common.format.or(file.get("format")?).unwrap_or(Format::Csv),
            seed: common.seed.or(file.get("seed")?).unwrap_or(1),
            v_a: common.v_a.or(file.get("v_a")?).unwrap_or(5.0),
            v_b: common.v_b.or(file.get("v_b")?).unwrap_or(5.0),
            rd: common.rd.or(file.get("rd")?),
            t1: common.t1.or(file.get("t1")?),
            t2: common.t2.or(file.get("t2")?),
            eta: common.eta.or(file.get("eta")?),
            eta2: common.eta2.or(file.get("eta2")?),
            phi: common.phi.or(file.get("phi")?),
            flavor,
        })
    }

    fn interferometer(&self, default_phi: f64) -> Result<NliConfig, CliError> {
        let mut cfg = match self.flavor.port() {
            None => NliConfig::degenerate(self.v_a, self.v_b)?,
            Some(port) => NliConfig::nondegenerate(port, self.v_a, self.v_b)?,
        };
        if let Some(rd) = self.rd {
            cfg = cfg.with_internal_reflectivity(rd)?;
        }
        match (self.flavor, self.t1, self.t2) {
            (Flavor::Degenerate, Some(t), None) => cfg = cfg.with_internal_transmittance(t)?,
            (Flavor::Degenerate, _, Some(_)) => {
                return Err(CliError::Usage("--t2 needs a nondegenerate --flavor".into()));
            }
            (_, None, None) => {}
            (_, t1, t2) => {
                let (d1, d2) = cfg.arm_transmittances();
                cfg = cfg.with_arm_transmittances(t1.unwrap_or(d1), t2.unwrap_or(d2))?;
            }
        }
        match (self.flavor, self.eta, self.eta2) {
            (_, None, None) => {}
            (Flavor::NondegenerateSum, eta1, eta2) => {
                let (d1, d2) = cfg.port_efficiencies();
                cfg = cfg.with_port_efficiencies(eta1.unwrap_or(d1), eta2.unwrap_or(d2))?;
            }
            (Flavor::NondegeneratePort2, eta1, eta2) => cfg = cfg.with_detection(eta2.or(eta1).unwrap_or(1.0))?,
            (_, Some(eta), None) => cfg = cfg.with_detection(eta)?,
            (_, _, Some(_)) => {
                return Err(CliError::Usage("--eta2 needs --flavor sum or port2".into()));
            }
        }
        Ok(cfg.with_phi(self.phi.unwrap_or(default_phi)))
    }
}

fn fig2(args: Fig2Args, s: &Settings) -> Result<String, CliError> {
    let defaults = Fig2Spec::default();
    let pick = |v: Vec<f64>, d: Vec<f64>| if v.is_empty() { d } else { v };
    let spec = Fig2Spec {
        gains: pick(args.v_list, defaults.gains),
        etas: pick(args.eta_list, defaults.etas),
        phases: pick(args.phi_list, defaults.phases),
    };
    let rows = reports::fig2_rows(&spec)?;
    match s.format {
        Format::Json => json(&rows),
        Format::Csv => Ok(csv(
            &["eta", "V", "phi", "deviation"],
            rows.iter()
                .map(|r| vec![r.eta.into(), r.v.into(), r.phi.into(), r.deviation.into()]),
        )),
    }
}

fn fig3(args: Fig3Args, s: &Settings) -> Result<String, CliError> {
    let spec = Fig3Spec {
        v_strong: args.v_strong,
        v_weak: args.v_weak,
        internal_losses: reports::linear_grid(0.0, args.rd_max, args.rd_points)?,
    };
    let rows = reports::fig3_rows(&spec)?;
    match s.format {
        Format::Json => json(&rows),
        Format::Csv => Ok(csv(
            &["R_d", "case", "inverse_fano_at_min", "delta_phi_sq_min"],
            rows.iter().map(|r| {
                vec![
                    r.r_d.into(),
                    r.case.name().into(),
                    r.inverse_fano_at_min.into(),
                    r.delta_phi_sq_min.into(),
                ]
            }),
        )),
    }
}

fn table1(s: &Settings) -> Result<(String, bool), CliError> {
    let mut d = Table1Params::default();
    if let Some(rd) = s.rd {
        d = d.with_internal_reflectivity(rd)?;
    }
    let params = Table1Params {
        v_a: s.v_a,
        v_b: s.v_b,
        t1: s.t1.unwrap_or(d.t1),
        t2: s.t2.or(s.t1).unwrap_or(d.t2),
        eta1: s.eta.unwrap_or(d.eta1),
        eta2: s.eta2.or(s.eta).unwrap_or(d.eta2),
        phi: s.phi.unwrap_or(d.phi),
    };
    let report = reports::table1(&params)?;
    let text = match s.format {
        Format::Json => json(&report)?,
        Format::Csv => csv(
            &[
                "row",
                "amplitude",
                "contrast",
                "photon_number",
                "variance",
                "detected_variance",
                "dark_fringe_factor",
                "lossless_variance",
                "lossless_optimal_uncertainty",
                "optimal_uncertainty",
                "optimal_uncertainty_detected",
            ],
            report.rows.iter().map(|r| {
                vec![
                    r.row.into(),
                    r.amplitude.into(),
                    r.contrast.into(),
                    r.photon_number.into(),
                    r.variance.into(),
                    r.detected_variance.into(),
                    r.dark_fringe_factor.into(),
                    r.lossless_variance.into(),
                    r.lossless_optimal_uncertainty.into(),
                    r.optimal_uncertainty.into(),
                    r.optimal_uncertainty_detected.into(),
                ]
            }),
        ),
    };
    Ok((text, report.passed()))
}

fn sweep_cmd(args: SweepArgs, s: &Settings) -> Result<String, CliError> {
    let axis: SweepAxis = args.axis.parse()?;
    let grid = if !args.values.is_empty() {
        args.values
    } else {
        match (args.from, args.to) {
            (Some(from), Some(to)) => reports::linear_grid(from, to, args.points)?,
            _ => return Err(CliError::Usage("sweep needs --from and --to, or --values".into())),
        }
    };
    let objective = match args.objective {
        ObjectiveArg::Bare => Objective::Bare,
        ObjectiveArg::Detected => Objective::Detected,
    };
    let template = s.interferometer(0.0)?;
    let points = sweep(&template, axis, &grid, objective)?;
    match s.format {
        Format::Json => json(&points),
        Format::Csv => Ok(csv(
            &[
                axis.name(),
                "phi_star",
                "objective",
                "n_at_star",
                "iterations",
                "bracket_width",
            ],
            points.iter().map(|p| {
                vec![
                    p.value.into(),
                    p.result.phi_star.into(),
                    p.result.objective.into(),
                    p.result.n_at_star.into(),
                    p.result.iterations.into(),
                    p.result.bracket_width.into(),
                ]
            }),
        )),
    }
}

fn validate(args: ValidateArgs, s: &Settings) -> Result<(String, bool), CliError> {
    let table = match &args.perturb {
        None => ClosedFormConstants::EXACT,
        Some(spec) => {
            let (name, factor) = spec
                .split_once('=')
                .ok_or_else(|| CliError::Usage(format!("--perturb expects NAME=FACTOR, got `{spec}`")))?;
            let factor: f64 = factor
                .parse()
                .map_err(|_| CliError::Usage(format!("--perturb factor `{factor}` is not a number")))?;
            ClosedFormConstants::perturbed(name, factor).ok_or_else(|| {
                CliError::Usage(format!(
                    "unknown constant `{name}` (known: {})",
                    ClosedFormConstants::NAMES.join(", ")
                ))
            })?
        }
    };
    let report = with_constants(table, || run_validation(args.tier, s.seed));
    let text = match s.format {
        Format::Json => json(&report)?,
        Format::Csv => report.render(),
    };
    Ok((text, report.passed()))
}

fn mc(args: McArgs, s: &Settings) -> Result<String, CliError> {
    let mut cfg = s.interferometer(REFERENCE_PHASE)?;
    if args.r_a.is_some() || args.r_b.is_some() {
        let ga = match args.r_a {
            Some(r) => GainSetting::from_squeeze(r)?,
            None => *cfg.gain_a(),
        };
        let gb = match args.r_b {
            Some(r) => GainSetting::from_squeeze(r)?,
            None => *cfg.gain_b(),
        };
        cfg = cfg.with_gain_settings(ga, gb);
    }
    let sampler = match args.sampler {
        SamplerArg::Gaussian => Sampler::GaussianApprox,
        SamplerArg::Fock => Sampler::ExactFock { cutoff: args.cutoff },
    };
    let run = monte_carlo_uncertainty(&cfg, args.p, args.repetitions, sampler, s.seed)?;
    match s.format {
        Format::Json => json(&run),
        Format::Csv => Ok(csv(
            &[
                "true_phi",
                "p",
                "estimate",
                "se_sq",
                "repetitions",
                "rng_seed",
                "clamp_events",
                "predicted_se_sq",
            ],
            [vec![
                run.true_phi.into(),
                run.p.into(),
                run.estimate.into(),
                run.se_sq.into(),
                run.repetitions.into(),
                run.rng_seed.into(),
                run.clamp_events.into(),
                run.predicted_se_sq.into(),
            ]],
        )),
    }
}

/// Captured result of one invocation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Execution {
    /// 0 success, 1 validation failure, 2 usage error, 3 I/O error.
    pub code: u8,
    pub stdout: String,
    pub stderr: String,
}

impl Execution {
    pub fn success(&self) -> bool {
        self.code == 0
    }
}

fn run(cli: Cli) -> Result<String, CliError> {
    let settings = Settings::resolve(cli.common)?;
    let out = settings.out.as_deref();
    let routed = |text: String| -> Result<String, CliError> {
        match out {
            Some(path) => write_file(path, &text).map(|_| String::new()),
            None => Ok(text),
        }
    };
    match cli.command {
        Command::Fig2(args) => routed(fig2(args, &settings)?),
        Command::Fig3(args) => routed(fig3(args, &settings)?),
        Command::Sweep(args) => routed(sweep_cmd(args, &settings)?),
        Command::Mc(args) => routed(mc(args, &settings)?),
        Command::Table1 => {
            let (text, passed) = table1(&settings)?;
            let text = routed(text)?;
            if passed {
                Ok(text)
            } else {
                Err(CliError::Validation("lossless-limit checks failed".into(), text))
            }
        }
        Command::Validate(args) => {
            let (text, passed) = validate(args, &settings)?;
            if let Some(path) = out {
                write_file(path, &text)?;
            }
            // the report always goes to standard output
            if passed {
                Ok(text)
            } else {
                Err(CliError::Validation("validation failed".into(), text))
            }
        }
    }
}

/// Parses `args` (including the program name) and runs the command.
/// Files named by `--out` are written; everything else is captured.
pub fn execute<I, T>(args: I) -> Execution
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                Execution {
                    code: 2,
                    stdout: String::new(),
                    stderr: text,
                }
            } else {
                Execution {
                    code: 0,
                    stdout: text,
                    stderr: String::new(),
                }
            };
        }
    };
    match run(cli) {
        Ok(stdout) => Execution {
            code: 0,
            stdout,
            stderr: String::new(),
        },
        Err(e) => {
            let (msg, stdout) = match &e {
                CliError::Usage(m) => (format!("usage error: {m}"), String::new()),
                CliError::Io(m) => (format!("i/o error: {m}"), String::new()),
                CliError::Validation(m, text) => (m.clone(), text.clone()),
            };
            Execution {
                code: e.code(),
                stdout,
                stderr: format!("nli: {msg}\n"),
            }
        }
    }
}
