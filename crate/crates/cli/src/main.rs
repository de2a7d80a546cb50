//! Command-line front end: load POVMs and channels from JSON, run
//! feasibility checks and the closed-form constructions, emit verification
//! reports.
//!
//! Exit codes: 0 feasible/pass, 1 infeasible/fail, 2 indeterminate,
//! 3 parse or validation failure, 4 other errors. Logging is controlled by
//! `POVM_BROADCAST_LOG` in `{quiet, info, debug}` (default quiet).

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use log::{debug, info};
use serde::Serialize;

use povm_broadcast::blmpp;
use povm_broadcast::feasibility::{
    self, decompose_fuzzy_pvm, sdp_broadcast_feasibility, verify_generation, SdpOptions, Verdict,
};
use povm_broadcast::linalg::ComplexMatrix;
use povm_broadcast::povm::DiscretePovm;
use povm_broadcast::sampling;
use povm_broadcast::weyl::{SolveTauOutcome, WeylSystem};
use povm_broadcast::{Channel, JointPovm};

const EXIT_FEASIBLE: u8 = 0;
const EXIT_INFEASIBLE: u8 = 1;
const EXIT_INDETERMINATE: u8 = 2;
const EXIT_PARSE: u8 = 3;
const EXIT_ERROR: u8 = 4;

#[derive(Parser)]
#[command(name = "povm-broadcast", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct OutputOpt {
    /// Write the JSON report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Decide whether joint POVM G is generable from local POVMs M and N.
    Check {
        /// Local POVM M (JSON).
        m: PathBuf,
        /// Local POVM N (JSON).
        n: PathBuf,
        /// Target joint POVM G on the M x N outcome grid (JSON).
        g: PathBuf,
        /// Use the analytic noisy-PVM condition instead of the numeric
        /// solver; M and N must be mixtures of a PVM with coloured noise.
        #[arg(long)]
        analytic: bool,
        #[arg(long, default_value_t = 1e-7)]
        feas_tol: f64,
        #[arg(long, default_value_t = 1e-6)]
        cert_tol: f64,
        #[arg(long, default_value_t = 20_000)]
        max_iter: usize,
        #[command(flatten)]
        output: OutputOpt,
    },
    /// Build the covariant phase-space observable for dimension D and verify
    /// the explicit broadcaster that generates it.
    WeylDemo {
        #[arg(long, value_parser = clap::value_parser!(u32).range(2..=16))]
        dim: u32,
        /// Ancilla state: a matrix JSON file, "maximally-mixed", or "random"
        /// (with --seed).
        #[arg(long, default_value = "maximally-mixed")]
        sigma: String,
        /// Seed for --sigma random; required there, refused elsewhere.
        #[arg(long)]
        seed: Option<u64>,
        /// Position noise parameter; with --mu switches to the noisy pair.
        #[arg(long, requires = "mu")]
        lambda: Option<f64>,
        /// Momentum noise parameter.
        #[arg(long, requires = "lambda")]
        mu: Option<f64>,
        #[command(flatten)]
        output: OutputOpt,
    },
    /// Optimal approximate joint measurement for the MUB pair in dimension D.
    BlmppMub {
        #[arg(long, value_parser = clap::value_parser!(u32).range(2..=16))]
        dim: u32,
        #[command(flatten)]
        output: OutputOpt,
    },
    /// Verify a channel against a (M, N, G) triple: max cellwise defect of
    /// the generation identity.
    Verify {
        #[arg(long)]
        channel: PathBuf,
        #[arg(long)]
        m: PathBuf,
        #[arg(long)]
        n: PathBuf,
        #[arg(long)]
        g: PathBuf,
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
        #[command(flatten)]
        output: OutputOpt,
    },
    /// Average a broadcaster over the displacement group of dimension D.
    Twirl {
        #[arg(long, value_parser = clap::value_parser!(u32).range(2..=16))]
        dim: u32,
        #[arg(long)]
        channel: PathBuf,
        #[command(flatten)]
        output: OutputOpt,
    },
    /// Invert the weighted Weyl-orbit mixture for the ancilla state tau.
    SolveTau {
        #[arg(long, value_parser = clap::value_parser!(u32).range(2..=16))]
        dim: u32,
        /// State sigma: matrix JSON file, "maximally-mixed", or "random".
        #[arg(long)]
        sigma: String,
        #[arg(long)]
        seed: Option<u64>,
        /// Position distribution, comma-separated probabilities of length D.
        #[arg(long = "mu-dist", value_delimiter = ',')]
        mu_dist: Vec<f64>,
        /// Momentum distribution, comma-separated probabilities of length D.
        #[arg(long = "nu-dist", value_delimiter = ',')]
        nu_dist: Vec<f64>,
        #[command(flatten)]
        output: OutputOpt,
    },
}

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn parse(msg: impl Into<String>) -> Self {
        Self { code: EXIT_PARSE, message: msg.into() }
    }

    fn error(msg: impl Into<String>) -> Self {
        Self { code: EXIT_ERROR, message: msg.into() }
    }
}

impl From<povm_broadcast::Error> for Failure {
    fn from(e: povm_broadcast::Error) -> Self {
        Failure::error(e.to_string())
    }
}

fn init_logging() {
    let level = match std::env::var("POVM_BROADCAST_LOG").as_deref() {
        Ok("debug") => "debug",
        Ok("info") => "info",
        _ => "error",
    };
    let _ = env_logger::Builder::new().parse_filters(level).try_init();
}

fn load_json<T: serde::de::DeserializeOwned>(path: &Path, what: &str) -> Result<T, Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::parse(format!("cannot read {what} from {}: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| Failure::parse(format!("{what} at {} is invalid: {e}", path.display())))
}

fn emit<T: Serialize>(report: &T, out: &OutputOpt) -> Result<(), Failure> {
    let text = serde_json::to_string_pretty(report)
        .map_err(|e| Failure::error(format!("serialization failed: {e}")))?;
    match &out.out {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| Failure::error(format!("cannot write {}: {e}", path.display()))),
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

fn load_sigma(spec: &str, dim: usize, seed: Option<u64>) -> Result<ComplexMatrix, Failure> {
    match spec {
        "maximally-mixed" => {
            if seed.is_some() {
                return Err(Failure::error("--seed only applies to --sigma random"));
            }
            Ok(ComplexMatrix::identity(dim).scale_re(1.0 / dim as f64))
        }
        "random" => {
            let seed = seed.ok_or_else(|| {
                Failure::error("--sigma random requires an explicit --seed for reproducibility")
            })?;
            Ok(sampling::random_state(&mut sampling::rng(seed), dim))
        }
        path => {
            if seed.is_some() {
                return Err(Failure::error("--seed only applies to --sigma random"));
            }
            let m: ComplexMatrix = load_json(Path::new(path), "state")?;
            if m.rows() != dim || m.cols() != dim {
                return Err(Failure::parse(format!(
                    "state is {}x{}, expected {dim}x{dim}",
                    m.rows(),
                    m.cols()
                )));
            }
            Ok(m)
        }
    }
}

fn verdict_exit(verdict: Verdict) -> u8 {
    match verdict {
        Verdict::Feasible => EXIT_FEASIBLE,
        Verdict::Infeasible => EXIT_INFEASIBLE,
        Verdict::Indeterminate => EXIT_INDETERMINATE,
    }
}

fn run_check(
    m_path: &Path,
    n_path: &Path,
    g_path: &Path,
    analytic: bool,
    opts: SdpOptions,
    output: &OutputOpt,
) -> Result<u8, Failure> {
    let m: DiscretePovm = load_json(m_path, "POVM M")?;
    let n: DiscretePovm = load_json(n_path, "POVM N")?;
    let g: JointPovm = load_json(g_path, "joint POVM G")?;
    info!(
        "check: M {} outcomes, N {} outcomes, G on dim {}",
        m.len(),
        n.len(),
        g.dim()
    );
    let report = if analytic {
        let (pm, lambda, pvec) = decompose_fuzzy_pvm(&m).ok_or_else(|| {
            Failure::error("M is not a PVM/coloured-noise mixture; the analytic route does not apply")
        })?;
        let (qn, mu, qvec) = decompose_fuzzy_pvm(&n).ok_or_else(|| {
            Failure::error("N is not a PVM/coloured-noise mixture; the analytic route does not apply")
        })?;
        debug!("analytic decomposition: lambda={lambda}, mu={mu}");
        feasibility::fuzzy_pvm_condition(&pm, &qn, lambda, mu, &pvec, &qvec, &g)?
    } else {
        sdp_broadcast_feasibility(&m, &n, &g, &opts)?
    };
    emit(&report, output)?;
    Ok(verdict_exit(report.verdict))
}

#[derive(Serialize)]
struct WeylDemoReport {
    dim: usize,
    lambda: Option<f64>,
    mu: Option<f64>,
    grid: DiscretePovm,
    margin_position: DiscretePovm,
    margin_momentum: DiscretePovm,
    condition_min_eigenvalue: Option<f64>,
    residual: f64,
}

fn run_weyl_demo(
    dim: usize,
    sigma_spec: &str,
    seed: Option<u64>,
    noise: Option<(f64, f64)>,
    output: &OutputOpt,
) -> Result<u8, Failure> {
    let sys = WeylSystem::new(dim);
    let sigma = load_sigma(sigma_spec, dim, seed)?;
    let g = sys.covariant_phase_povm(&sigma)?;
    let (m1, m2) = g.margins();

    let (channel, cond_min, local_m, local_n) = match noise {
        None => (
            sys.standard_broadcaster(&sigma)?,
            None,
            sys.position_pvm(),
            sys.momentum_pvm(),
        ),
        Some((lambda, mu)) => {
            let op = sys.noise_condition_operator(&sigma, lambda, mu)?;
            let min = povm_broadcast::linalg::min_eigenvalue(&op)?;
            if min < -1e-9 * (1.0 + op.frobenius_norm()) {
                eprintln!(
                    "noise condition violated: min eigenvalue {min:.6e} at lambda={lambda}, mu={mu}"
                );
                return Ok(EXIT_INFEASIBLE);
            }
            (
                sys.noisy_broadcaster(&sigma, lambda, mu)?,
                Some(min),
                sys.noisy_position_povm(lambda)?,
                sys.noisy_momentum_povm(mu)?,
            )
        }
    };
    let residual = verify_generation(&channel, &local_m, &local_n, &g)?;
    info!("weyl-demo dim {dim}: generation residual {residual:.3e}");
    let report = WeylDemoReport {
        dim,
        lambda: noise.map(|(l, _)| l),
        mu: noise.map(|(_, m)| m),
        grid: g.as_discrete(),
        margin_position: m1,
        margin_momentum: m2,
        condition_min_eigenvalue: cond_min,
        residual,
    };
    emit(&report, output)?;
    Ok(if residual <= 1e-8 { EXIT_FEASIBLE } else { EXIT_INFEASIBLE })
}

#[derive(Serialize)]
struct BlmppMubReport {
    dim: usize,
    target_weight: f64,
    noise_weight: f64,
    joint: DiscretePovm,
    margin_first: DiscretePovm,
    margin_second: DiscretePovm,
    formula_margin_first: DiscretePovm,
    formula_margin_second: DiscretePovm,
    max_deviation: f64,
}

fn run_blmpp_mub(dim: usize, output: &OutputOpt) -> Result<u8, Failure> {
    let inst = blmpp::mub_instance(dim)?;
    let joint = inst.joint()?;
    let (g1, g2) = joint.margins();
    let f1 = blmpp::mub_margin_formula(dim, inst.target_p(), true);
    let f2 = blmpp::mub_margin_formula(dim, inst.target_q(), true);
    let mut deviation = 0.0f64;
    for (a, b) in g1.effects().iter().zip(&f1) {
        deviation = deviation.max(a.sub(b).frobenius_norm());
    }
    for (a, b) in g2.effects().iter().zip(&f2) {
        deviation = deviation.max(a.sub(b).frobenius_norm());
    }
    let labels: Vec<povm_broadcast::Label> = g1.labels().to_vec();
    let report = BlmppMubReport {
        dim,
        target_weight: 0.5 * (1.0 + 1.0 / (dim as f64).sqrt()),
        noise_weight: 0.5 * (1.0 - 1.0 / (dim as f64).sqrt()),
        joint: joint.as_discrete(),
        margin_first: g1.clone(),
        margin_second: g2,
        formula_margin_first: DiscretePovm::new(dim, labels.clone(), f1)
            .map_err(|e| Failure::error(e.to_string()))?,
        formula_margin_second: DiscretePovm::new(dim, labels, f2)
            .map_err(|e| Failure::error(e.to_string()))?,
        max_deviation: deviation,
    };
    info!("blmpp-mub dim {dim}: max deviation {deviation:.3e}");
    emit(&report, output)?;
    Ok(if deviation <= 1e-9 { EXIT_FEASIBLE } else { EXIT_INFEASIBLE })
}

#[derive(Serialize)]
struct VerifyReport {
    residual: f64,
    tol: f64,
    cptp: bool,
}

fn run_verify(
    channel: &Path,
    m_path: &Path,
    n_path: &Path,
    g_path: &Path,
    tol: f64,
    output: &OutputOpt,
) -> Result<u8, Failure> {
    let ch: Channel = load_json(channel, "channel")?;
    let m: DiscretePovm = load_json(m_path, "POVM M")?;
    let n: DiscretePovm = load_json(n_path, "POVM N")?;
    let g: JointPovm = load_json(g_path, "joint POVM G")?;
    let residual = verify_generation(&ch, &m, &n, &g)?;
    let report = VerifyReport { residual, tol, cptp: ch.verify_cptp().is_ok() };
    emit(&report, output)?;
    Ok(if residual <= tol { EXIT_FEASIBLE } else { EXIT_INFEASIBLE })
}

#[derive(Serialize)]
struct TwirlReport {
    was_covariant: bool,
    channel: Channel,
}

fn run_twirl(dim: usize, channel: &Path, output: &OutputOpt) -> Result<u8, Failure> {
    let ch: Channel = load_json(channel, "channel")?;
    let sys = WeylSystem::new(dim);
    let was = sys.is_channel_covariant(&ch, false)?;
    let twirled = sys.twirl_channel(&ch)?;
    emit(&TwirlReport { was_covariant: was, channel: twirled }, output)?;
    Ok(EXIT_FEASIBLE)
}

fn run_solve_tau(
    dim: usize,
    sigma_spec: &str,
    seed: Option<u64>,
    mu_dist: &[f64],
    nu_dist: &[f64],
    output: &OutputOpt,
) -> Result<u8, Failure> {
    let sys = WeylSystem::new(dim);
    let sigma = load_sigma(sigma_spec, dim, seed)?;
    let outcome = sys.solve_tau(&sigma, mu_dist, nu_dist)?;
    emit(&outcome, output)?;
    Ok(match outcome {
        SolveTauOutcome::Solved { .. } => EXIT_FEASIBLE,
        SolveTauOutcome::Infeasible { .. } => EXIT_INFEASIBLE,
        SolveTauOutcome::Indeterminate { .. } => EXIT_INDETERMINATE,
    })
}

fn dispatch(cli: Cli) -> Result<u8, Failure> {
    match cli.command {
        Command::Check { m, n, g, analytic, feas_tol, cert_tol, max_iter, output } => {
            let opts = SdpOptions { feas_tol, cert_tol, max_iter, ..SdpOptions::default() };
            run_check(&m, &n, &g, analytic, opts, &output)
        }
        Command::WeylDemo { dim, sigma, seed, lambda, mu, output } => {
            let noise = match (lambda, mu) {
                (Some(l), Some(m)) => Some((l, m)),
                _ => None,
            };
            run_weyl_demo(dim as usize, &sigma, seed, noise, &output)
        }
        Command::BlmppMub { dim, output } => run_blmpp_mub(dim as usize, &output),
        Command::Verify { channel, m, n, g, tol, output } => {
            run_verify(&channel, &m, &n, &g, tol, &output)
        }
        Command::Twirl { dim, channel, output } => run_twirl(dim as usize, &channel, &output),
        Command::SolveTau { dim, sigma, seed, mu_dist, nu_dist, output } => {
            run_solve_tau(dim as usize, &sigma, seed, &mu_dist, &nu_dist, &output)
        }
    }
}

fn main() -> ExitCode {
    init_logging();
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
