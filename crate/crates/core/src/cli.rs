//! Command-line front end: argument parsing, config-file merging, subcommand
//! dispatch, and report emission.
//!
//! Exit codes: 0 on success, 1 on configuration or usage errors, 2 on
//! numerical failures (non-finite states, projection non-convergence, or a
//! failed validation check).

use std::ffi::OsString;
use std::fs;
use std::path::PathBuf;

use clap::{ArgAction, Args, Parser, Subcommand};

use crate::config::{parse_point, parse_usize_list, ConfigMap};
use crate::domain::{DomainError, FeasibleDomain};
use crate::dynamics::{run_cbo_with_trace, DynamicsError, InitKind, Scheme, SolverConfig};
use crate::experiment::{
    chaos_defaults, chaos_rate_study, invert_merton, langevin_invariant_check, reproduce_table,
    variance_decay_check, ExperimentError, LangevinPreset, TableId, DEFAULT_SUCCESS_EPS,
};
use crate::merton::NOISE_SCALE;
use crate::objective::Objective;
use crate::report::{fmt_f64, CsvReport};
use crate::schedule::Schedule;

#[derive(Parser, Debug)]
#[command(
    name = "rcbo",
    version,
    about = "Constrained consensus-based optimization and sampling via reflected particle systems"
)]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Increase log verbosity (-v: debug, -vv: trace).
    #[arg(short, long, global = true, action = ArgAction::Count)]
    verbose: u8,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run a single constrained optimization and print the final consensus.
    Optimize(OptimizeArgs),
    /// Reproduce a benchmark success-rate table.
    Bench(BenchArgs),
    /// Empirical particle-count scaling study of the consensus.
    Chaos(ChaosArgs),
    /// Validate the ensemble variance-decay rate on a ball.
    Decay(DecayArgs),
    /// Compare the Langevin sampler with its invariant-measure oracle.
    Langevin(LangevinArgs),
    /// Replicated inverse-problem parameter recovery study.
    Invert(InvertArgs),
}

#[derive(Args, Debug)]
struct OptimizeArgs {
    /// Flat key-value config file; flags override file values.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Objective: ackley | rastrigin | rosenbrock | townsend | merton.
    #[arg(long)]
    objective: Option<String>,
    /// Problem dimension (rastrigin only).
    #[arg(long)]
    dim: Option<usize>,
    /// Domain kind: ball | box | levelset-heart.
    #[arg(long)]
    domain: Option<String>,
    /// Ball center, comma separated (a single value is broadcast).
    #[arg(long)]
    center: Option<String>,
    /// Ball radius.
    #[arg(long)]
    radius: Option<f64>,
    /// Box lower corner, comma separated.
    #[arg(long)]
    lower: Option<String>,
    /// Box upper corner, comma separated.
    #[arg(long)]
    upper: Option<String>,
    /// Scheme: penalty | projection.
    #[arg(long)]
    scheme: Option<String>,
    /// Number of particles.
    #[arg(short = 'N', long = "particles")]
    particles: Option<usize>,
    /// Inverse temperature of the consensus weights.
    #[arg(long)]
    alpha: Option<f64>,
    /// Drift schedule (number, const:v, linear:a:b, expdecay:v0:rate, invsq:v0).
    #[arg(long)]
    beta: Option<String>,
    /// Diffusion schedule.
    #[arg(long)]
    sigma: Option<String>,
    /// Repelling schedule; omit or pass 'off' to disable.
    #[arg(long)]
    lambda: Option<String>,
    /// Step size.
    #[arg(long = "h")]
    h: Option<f64>,
    /// Number of steps.
    #[arg(long)]
    steps: Option<u64>,
    /// Master seed (fallback: RCBO_SEED, then 0).
    #[arg(long)]
    seed: Option<u64>,
    /// Penalty strength override (defaults to h).
    #[arg(long)]
    penalty_epsilon: Option<f64>,
    /// Initial distribution: feasible | enclosing-ball.
    #[arg(long)]
    init: Option<String>,
    /// Record the consensus trace to trace.csv.
    #[arg(long)]
    trace: bool,
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Args, Debug)]
struct CommonArgs {
    /// Output directory for reports.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Worker threads for replica-level parallelism.
    #[arg(long)]
    workers: Option<usize>,
}

#[derive(Args, Debug)]
struct BenchArgs {
    /// Table: ackley | heart | rastrigin | rosenbrock.
    #[arg(long)]
    table: String,
    /// Replicas per cell.
    #[arg(long, default_value_t = 1000)]
    runs: usize,
    #[arg(long)]
    seed: Option<u64>,
    /// Include the long-running Rastrigin d = 500 column.
    #[arg(long)]
    long: bool,
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Args, Debug)]
struct ChaosArgs {
    /// Ensemble sizes, comma separated.
    #[arg(long, default_value = "32,64,128,256,512")]
    n_list: String,
    /// Reference ensemble size.
    #[arg(long, default_value_t = 4096)]
    n_ref: usize,
    #[arg(long, default_value_t = 64)]
    replicas: usize,
    #[arg(long)]
    seed: Option<u64>,
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Args, Debug)]
struct DecayArgs {
    #[arg(long, default_value_t = 2.0)]
    beta: f64,
    #[arg(long, default_value_t = 1.0)]
    sigma: f64,
    #[arg(long, default_value_t = 1.0)]
    alpha: f64,
    /// Ball radius (centered at the origin).
    #[arg(long, default_value_t = 1.0)]
    radius: f64,
    /// Ball dimension.
    #[arg(long, default_value_t = 2)]
    dim: usize,
    #[arg(long, default_value_t = 200)]
    replicas: usize,
    #[arg(long)]
    seed: Option<u64>,
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Args, Debug)]
struct LangevinArgs {
    /// Study preset: quadratic | flat | doublewell.
    #[arg(long)]
    preset: String,
    #[arg(long)]
    seed: Option<u64>,
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Args, Debug)]
struct InvertArgs {
    #[arg(long, default_value_t = 1000)]
    runs: usize,
    #[arg(long, default_value_t = 1e14)]
    alpha: f64,
    #[arg(short = 'N', long = "particles", default_value_t = 400)]
    particles: usize,
    #[arg(long, default_value_t = 100)]
    steps: u64,
    #[arg(long)]
    seed: Option<u64>,
    /// Use noise-free observations.
    #[arg(long)]
    zero_noise: bool,
    #[command(flatten)]
    common: CommonArgs,
}

/// Errors mapped onto process exit codes.
#[derive(Debug)]
enum CliError {
    /// Configuration / usage problems (exit 1).
    Config(String),
    /// Numerical failures during a run (exit 2).
    Numerical(String),
}

impl CliError {
    fn exit_code(&self) -> i32 {
        match self {
            Self::Config(_) => 1,
            Self::Numerical(_) => 2,
        }
    }

    fn message(&self) -> &str {
        match self {
            Self::Config(m) | Self::Numerical(m) => m,
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        Self::Config(format!("io error: {e}"))
    }
}

impl From<DynamicsError> for CliError {
    fn from(e: DynamicsError) -> Self {
        match e {
            DynamicsError::InvalidConfig(_) => Self::Config(e.to_string()),
            _ => Self::Numerical(e.to_string()),
        }
    }
}

impl From<DomainError> for CliError {
    fn from(e: DomainError) -> Self {
        match e {
            DomainError::NonConvergence { .. }
            | DomainError::RejectionBudgetExceeded { .. }
            | DomainError::DegenerateGradient => Self::Numerical(e.to_string()),
            _ => Self::Config(e.to_string()),
        }
    }
}

impl From<ExperimentError> for CliError {
    fn from(e: ExperimentError) -> Self {
        match e {
            ExperimentError::InvalidConfig(_) => Self::Config(e.to_string()),
            ExperimentError::Dynamics(d) => d.into(),
            ExperimentError::Domain(d) => d.into(),
            _ => Self::Numerical(e.to_string()),
        }
    }
}

/// Parses `argv` and executes the requested subcommand; returns the process
/// exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return code;
        }
    };
    init_logging(cli.verbose);
    match execute(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            log::error!("{}", e.message());
            eprintln!("error: {}", e.message());
            e.exit_code()
        }
    }
}

fn init_logging(verbose: u8) {
    let level = match verbose {
        0 => "info",
        1 => "debug",
        _ => "trace",
    };
    let _ = env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level))
        .format_timestamp(None)
        .try_init();
}

fn install_workers(workers: Option<usize>) -> Result<(), CliError> {
    if let Some(w) = workers {
        if w == 0 {
            return Err(CliError::Config("--workers must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(w)
            .build_global()
            .map_err(|e| CliError::Config(format!("cannot configure worker pool: {e}")))?;
    }
    Ok(())
}

fn seed_fallback(flag: Option<u64>, file: Option<u64>) -> u64 {
    flag.or(file)
        .or_else(|| std::env::var("RCBO_SEED").ok().and_then(|s| s.parse().ok()))
        .unwrap_or(0)
}

fn execute(command: Command) -> Result<(), CliError> {
    match command {
        Command::Optimize(args) => run_optimize(args),
        Command::Bench(args) => run_bench(args),
        Command::Chaos(args) => run_chaos(args),
        Command::Decay(args) => run_decay(args),
        Command::Langevin(args) => run_langevin(args),
        Command::Invert(args) => run_invert(args),
    }
}

/// Fully resolved optimize invocation (flags merged over the config file).
#[derive(Debug)]
struct ResolvedRun {
    objective: Objective,
    domain: FeasibleDomain,
    solver: SolverConfig,
}

fn required<T>(value: Option<T>, what: &str, flag: &str) -> Result<T, CliError> {
    value.ok_or_else(|| CliError::Config(format!("missing required {what}; pass {flag} or set it in the config file")))
}

fn resolve_optimize(args: &OptimizeArgs) -> Result<ResolvedRun, CliError> {
    let file = match &args.config {
        Some(path) => {
            let text = fs::read_to_string(path)
                .map_err(|e| CliError::Config(format!("cannot read config {}: {e}", path.display())))?;
            ConfigMap::parse(&text).map_err(|e| CliError::Config(e.to_string()))?
        }
        None => ConfigMap::default(),
    };
    let file_str = |k: &str| file.get(k).map(str::to_string);
    let file_f64 = |k: &str| -> Result<Option<f64>, CliError> {
        file.get_parsed::<f64>(k).map_err(|e| CliError::Config(e.to_string()))
    };

    let objective_name = required(
        args.objective.clone().or_else(|| file_str("objective")),
        "objective",
        "--objective",
    )?;
    let dim_opt = match args.dim {
        Some(d) => Some(d),
        None => file
            .get_parsed::<usize>("objective.dim")
            .map_err(|e| CliError::Config(e.to_string()))?,
    };

    let objective = match objective_name.to_ascii_lowercase().as_str() {
        "ackley" => Objective::ackley(),
        "rastrigin" => Objective::rastrigin(dim_opt.unwrap_or(2)),
        "rosenbrock" => Objective::rosenbrock(),
        "townsend" => Objective::townsend(),
        "merton" => {
            // single-run inverse objective: observations drawn from the
            // ground truth with the master seed
            let seed = seed_fallback(args.seed, file.get_parsed("solver.seed").ok().flatten());
            let obs = crate::merton::generate_observations(crate::merton::true_parameters(), seed);
            Objective::merton_inverse(obs, crate::experiment::LAMBDA_REG)
        }
        other => {
            return Err(CliError::Config(format!(
                "unknown objective '{other}' (expected ackley|rastrigin|rosenbrock|townsend|merton)"
            )))
        }
    };

    let domain_kind = args
        .domain
        .clone()
        .or_else(|| file_str("domain.kind"))
        .unwrap_or_else(|| default_domain_kind(objective.name()).to_string());
    let domain = build_domain(
        &domain_kind,
        objective.dimension(),
        args.center.clone().or_else(|| file_str("domain.center")),
        match args.radius {
            Some(r) => Some(r),
            None => file_f64("domain.radius")?,
        },
        args.lower.clone().or_else(|| file_str("domain.lower")),
        args.upper.clone().or_else(|| file_str("domain.upper")),
    )?;

    let scheme_name = required(
        args.scheme.clone().or_else(|| file_str("solver.scheme")),
        "scheme",
        "--scheme",
    )?;
    let scheme = Scheme::parse(&scheme_name)
        .ok_or_else(|| CliError::Config(format!("unknown scheme '{scheme_name}'")))?;

    let parse_sched = |s: &str| -> Result<Schedule, CliError> {
        Schedule::parse(s).map_err(|e| CliError::Config(e.to_string()))
    };
    let beta = parse_sched(&required(
        args.beta.clone().or_else(|| file_str("solver.beta")),
        "beta schedule",
        "--beta",
    )?)?;
    let sigma = parse_sched(&required(
        args.sigma.clone().or_else(|| file_str("solver.sigma")),
        "sigma schedule",
        "--sigma",
    )?)?;
    let repelling = match args.lambda.clone().or_else(|| file_str("solver.lambda")) {
        None => None,
        Some(s) if s.eq_ignore_ascii_case("off") => None,
        Some(s) => Some(parse_sched(&s)?),
    };

    let alpha = required(
        match args.alpha {
            Some(a) => Some(a),
            None => file_f64("solver.alpha")?,
        },
        "alpha",
        "--alpha",
    )?;
    let h = required(
        match args.h {
            Some(h) => Some(h),
            None => file_f64("solver.h")?,
        },
        "step size",
        "--h",
    )?;
    let steps = required(
        match args.steps {
            Some(k) => Some(k),
            None => file
                .get_parsed::<u64>("solver.steps")
                .map_err(|e| CliError::Config(e.to_string()))?,
        },
        "step count",
        "--steps",
    )?;
    let particles = required(
        match args.particles {
            Some(n) => Some(n),
            None => file
                .get_parsed::<usize>("solver.particles")
                .map_err(|e| CliError::Config(e.to_string()))?,
        },
        "particle count",
        "--particles",
    )?;
    let seed = seed_fallback(
        args.seed,
        file.get_parsed("solver.seed").map_err(|e| CliError::Config(e.to_string()))?,
    );
    let penalty_epsilon = match args.penalty_epsilon {
        Some(e) => Some(e),
        None => file_f64("solver.epsilon")?,
    };
    let init = match args.init.clone().or_else(|| file_str("solver.init")) {
        None => InitKind::default(),
        Some(s) => InitKind::parse(&s)
            .ok_or_else(|| CliError::Config(format!("unknown init kind '{s}'")))?,
    };

    let solver = SolverConfig {
        scheme,
        alpha,
        beta,
        sigma,
        repelling,
        h,
        steps,
        particles,
        seed,
        penalty_epsilon,
        init,
    };
    solver.validate()?;
    if objective.dimension() != domain.dimension() {
        return Err(CliError::Config(format!(
            "objective '{}' has dimension {} but the domain has dimension {}",
            objective.name(),
            objective.dimension(),
            domain.dimension()
        )));
    }
    Ok(ResolvedRun { objective, domain, solver })
}

fn default_domain_kind(objective: &str) -> &'static str {
    match objective {
        "townsend" => "levelset-heart",
        "merton" => "box",
        _ => "ball",
    }
}

fn build_domain(
    kind: &str,
    dim: usize,
    center: Option<String>,
    radius: Option<f64>,
    lower: Option<String>,
    upper: Option<String>,
) -> Result<FeasibleDomain, CliError> {
    let broadcast = |s: &str, what: &str| -> Result<Vec<f64>, CliError> {
        let v = parse_point(s).map_err(|e| CliError::Config(e.to_string()))?;
        if v.len() == dim {
            Ok(v)
        } else if v.len() == 1 {
            Ok(vec![v[0]; dim])
        } else {
            Err(CliError::Config(format!(
                "{what} has {} components but the problem dimension is {dim}",
                v.len()
            )))
        }
    };
    match kind.to_ascii_lowercase().as_str() {
        "ball" => {
            let center = match center {
                Some(c) => broadcast(&c, "domain center")?,
                None => vec![0.0; dim],
            };
            let radius = required(radius, "ball radius", "--radius")?;
            Ok(FeasibleDomain::ball(center, radius)?)
        }
        "box" => {
            let lower = match (lower, kind) {
                (Some(l), _) => broadcast(&l, "box lower corner")?,
                (None, _) if dim == 3 => crate::merton::parameter_box().0,
                _ => return Err(CliError::Config("box domain requires --lower".into())),
            };
            let upper = match upper {
                Some(u) => broadcast(&u, "box upper corner")?,
                None if dim == 3 => crate::merton::parameter_box().1,
                None => return Err(CliError::Config("box domain requires --upper".into())),
            };
            Ok(FeasibleDomain::axis_box(lower, upper)?)
        }
        "levelset-heart" | "heart" => {
            if dim != 2 {
                return Err(CliError::Config("the heart region is two-dimensional".into()));
            }
            Ok(FeasibleDomain::heart())
        }
        other => Err(CliError::Config(format!(
            "unknown domain kind '{other}' (expected ball|box|levelset-heart)"
        ))),
    }
}

fn log_config(snapshot: &[(String, String)]) {
    for (k, v) in snapshot {
        log::info!("config {k} = {v}");
    }
}

fn run_optimize(args: OptimizeArgs) -> Result<(), CliError> {
    install_workers(args.common.workers)?;
    let run_spec = resolve_optimize(&args)?;
    let mut snapshot = run_spec.solver.snapshot();
    snapshot.push(("objective".into(), run_spec.objective.name().into()));
    snapshot.push(("domain".into(), run_spec.domain.name().into()));
    log_config(&snapshot);

    let result = run_cbo_with_trace(&run_spec.solver, &run_spec.objective, &run_spec.domain, args.trace)?;
    let value = run_spec.objective.eval(&result.consensus);
    let coords: Vec<String> = result.consensus.iter().map(|c| fmt_f64(*c)).collect();
    println!("final_consensus = [{}]", coords.join(", "));
    println!("objective_value = {}", fmt_f64(value));

    let mut report = CsvReport::new(&["coordinate", "value"]);
    report.comments_from(&snapshot);
    report.comment("objective_value", fmt_f64(value));
    for (k, c) in result.consensus.iter().enumerate() {
        report.push_row(vec![k.to_string(), fmt_f64(*c)]);
    }
    report.write_to(&args.common.out.join("report.csv"))?;

    if let Some(trace) = result.trace {
        let dim = run_spec.domain.dimension();
        let mut cols: Vec<String> = vec!["step".into(), "t".into()];
        cols.extend((0..dim).map(|k| format!("consensus_{k}")));
        let col_refs: Vec<&str> = cols.iter().map(String::as_str).collect();
        let mut tr = CsvReport::new(&col_refs);
        tr.comments_from(&snapshot);
        for (step, c) in trace.iter().enumerate() {
            let mut row = vec![step.to_string(), fmt_f64(step as f64 * run_spec.solver.h)];
            row.extend(c.iter().map(|v| fmt_f64(*v)));
            tr.push_row(row);
        }
        tr.write_to(&args.common.out.join("trace.csv"))?;
    }
    Ok(())
}

fn run_bench(args: BenchArgs) -> Result<(), CliError> {
    install_workers(args.common.workers)?;
    let table = TableId::parse(&args.table)
        .ok_or_else(|| CliError::Config(format!("unknown table '{}'", args.table)))?;
    if args.runs == 0 {
        return Err(CliError::Config("--runs must be at least 1".into()));
    }
    let seed = seed_fallback(args.seed, None);
    log::info!("config table = {}", table.name());
    log::info!("config runs = {}", args.runs);
    log::info!("config seed = {seed}");
    log::info!("config eps = {DEFAULT_SUCCESS_EPS}");
    let csv = reproduce_table(table, args.runs, seed, args.long)?;
    let path = args.common.out.join("report.csv");
    csv.write_to(&path)?;
    println!("wrote {} cells to {}", csv.rows.len(), path.display());
    Ok(())
}

fn run_chaos(args: ChaosArgs) -> Result<(), CliError> {
    install_workers(args.common.workers)?;
    let n_list = parse_usize_list(&args.n_list).map_err(|e| CliError::Config(e.to_string()))?;
    let seed = seed_fallback(args.seed, None);
    let (cfg, obj, dom) = chaos_defaults(seed);
    log_config(&cfg.snapshot());
    log::info!("config n_list = {:?}", n_list);
    log::info!("config n_ref = {}", args.n_ref);
    log::info!("config replicas = {}", args.replicas);
    let report = chaos_rate_study(&cfg, &obj, &dom, &n_list, args.n_ref, args.replicas)?;
    report.to_csv().write_to(&args.common.out.join("report.csv"))?;
    println!(
        "fitted slope = {:.4} (se {:.4}); mean-field prediction is -0.5",
        report.slope, report.slope_se
    );
    Ok(())
}

fn run_decay(args: DecayArgs) -> Result<(), CliError> {
    install_workers(args.common.workers)?;
    let dom = FeasibleDomain::ball(vec![0.0; args.dim], args.radius)?;
    let seed = seed_fallback(args.seed, None);
    log::info!(
        "config beta = {}, sigma = {}, alpha = {}, replicas = {}, seed = {seed}",
        args.beta,
        args.sigma,
        args.alpha,
        args.replicas
    );
    let check = variance_decay_check(args.beta, args.sigma, args.alpha, &dom, args.replicas, seed)?;
    check.to_csv().write_to(&args.common.out.join("decay_curve.csv"))?;
    if check.passed {
        println!("variance decay bound holds (eta0 = {})", check.eta0);
        Ok(())
    } else {
        let (t, v, b) = check.first_violation.expect("violation recorded");
        Err(CliError::Numerical(format!(
            "variance decay violated at t = {t}: var {v} > bound {b}"
        )))
    }
}

fn run_langevin(args: LangevinArgs) -> Result<(), CliError> {
    install_workers(args.common.workers)?;
    let preset = LangevinPreset::parse(&args.preset)
        .ok_or_else(|| CliError::Config(format!("unknown preset '{}'", args.preset)))?;
    let seed = seed_fallback(args.seed, None);
    let study = preset.study(seed);
    log::info!(
        "config preset = {}, sigma = {}, particles = {}, h = {}, seed = {seed}",
        study.name,
        study.sigma,
        study.particles,
        study.h
    );
    let check = langevin_invariant_check(&study)?;
    check
        .histogram_csv()
        .write_to(&args.common.out.join("histogram.csv"))?;
    check
        .decay_csv()
        .write_to(&args.common.out.join("decay_curve.csv"))?;
    println!("L1 distance to oracle density = {:.4}", check.l1_distance);
    if check.passed {
        Ok(())
    } else {
        Err(CliError::Numerical(format!(
            "invariant-measure mismatch: L1 distance {} exceeds 0.1",
            check.l1_distance
        )))
    }
}

fn run_invert(args: InvertArgs) -> Result<(), CliError> {
    install_workers(args.common.workers)?;
    let seed = seed_fallback(args.seed, None);
    let noise = if args.zero_noise { 0.0 } else { NOISE_SCALE };
    let outcome = invert_merton(args.runs, args.alpha, args.particles, args.steps, seed, noise)?;
    log_config(&outcome.report.config);
    outcome
        .report
        .to_csv()
        .write_to(&args.common.out.join("report.csv"))?;
    for (csv, name) in outcome
        .histograms
        .iter()
        .zip(["histogram_sigma.csv", "histogram_m.csv", "histogram_gamma.csv"])
    {
        csv.write_to(&args.common.out.join(name))?;
    }
    println!(
        "recovery rate = {:.4} ({} / {} replicas, CI [{:.4}, {:.4}])",
        outcome.report.rate,
        outcome.report.successes,
        outcome.report.runs,
        outcome.report.wilson_ci_95.0,
        outcome.report.wilson_ci_95.1
    );
    Ok(())
}
