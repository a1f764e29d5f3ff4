//! Replicated experiment harnesses: success-rate estimation, the benchmark
//! tables, the particle-count scaling study, the variance-decay validator,
//! the Langevin invariant-measure check, and the inverse-problem study.
//!
//! Replicas are deterministic given the master seed (replica `r` runs with
//! `replica_seed(master, r)`), so reported rates do not depend on replica
//! execution order or on the number of worker threads.

use std::sync::Arc;
use std::time::{Duration, Instant};

use rayon::prelude::*;
use thiserror::Error;

use crate::domain::{DomainError, FeasibleDomain};
use crate::dynamics::{
    langevin_step_projection, run_cbo, DynamicsError, Ensemble, InitKind, Interaction,
    LangevinConfig, Scheme, SolverConfig,
};
use crate::merton::{generate_observations_scaled, parameter_box, true_parameters, NOISE_SCALE};
use crate::objective::Objective;
use crate::report::{fmt_f64, CsvReport};
use crate::rng::{replica_seed, NoiseSource};
use crate::schedule::Schedule;
use crate::vecmath::dist;

/// Tikhonov regularization weight of the inverse problem.
pub const LAMBDA_REG: f64 = 1e-6;
/// Default λ₀ of the repelling schedule λ(t) = λ₀/(1+t²).
pub const DEFAULT_REPELLING_LAMBDA0: f64 = 4.0;
/// Success threshold used by the benchmark tables.
pub const DEFAULT_SUCCESS_EPS: f64 = 0.1;

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("invalid experiment configuration: {0}")]
    InvalidConfig(String),
    #[error("slope standard error {se} exceeds 0.1; increase replicas")]
    InsufficientReplicas { se: f64 },
    #[error("fixed-point oracle residual {residual:.3e} after {iters} iterations")]
    OracleNonConvergence { residual: f64, iters: usize },
    #[error(transparent)]
    Dynamics(#[from] DynamicsError),
    #[error(transparent)]
    Domain(#[from] DomainError),
}

/// Wilson score interval for a binomial proportion at confidence `z`.
pub fn wilson_interval(successes: usize, runs: usize, z: f64) -> (f64, f64) {
    debug_assert!(runs > 0);
    let n = runs as f64;
    let p = successes as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    // the interval always contains p̂; the boundary cases are exact
    let lo = if successes == 0 { 0.0 } else { (center - half).max(0.0).min(p) };
    let hi = if successes == runs { 1.0 } else { (center + half).min(1.0).max(p) };
    (lo, hi)
}

/// z-score of the two-sided 95% normal interval.
pub const Z_95: f64 = 1.959963984540054;
/// z-score of the two-sided 99% normal interval.
pub const Z_99: f64 = 2.5758293035489004;

/// Outcome of a replicated success-rate experiment.
#[derive(Clone, Debug)]
pub struct SuccessReport {
    pub runs: usize,
    pub successes: usize,
    pub rate: f64,
    pub wilson_ci_95: (f64, f64),
    /// Replicas aborted by numerical failure; counted as unsuccessful.
    pub numerical_failures: usize,
    /// Configuration snapshot embedded in emitted reports.
    pub config: Vec<(String, String)>,
    pub wall_time: Duration,
}

impl SuccessReport {
    /// CSV rendering; excludes wall time so identical configurations yield
    /// byte-identical files regardless of worker count.
    pub fn to_csv(&self) -> CsvReport {
        let mut csv = CsvReport::new(&["runs", "successes", "rate", "ci_lo", "ci_hi", "failures"]);
        csv.comments_from(&self.config);
        csv.push_row(vec![
            self.runs.to_string(),
            self.successes.to_string(),
            fmt_f64(self.rate),
            fmt_f64(self.wilson_ci_95.0),
            fmt_f64(self.wilson_ci_95.1),
            self.numerical_failures.to_string(),
        ]);
        csv
    }
}

/// Runs `runs` independent replicas of [`run_cbo`] and scores each final
/// consensus against `reference` with Euclidean threshold `eps`.
pub fn success_rate(
    cfg: &SolverConfig,
    obj: &Objective,
    dom: &FeasibleDomain,
    runs: usize,
    eps: f64,
    reference: &[f64],
) -> Result<SuccessReport, ExperimentError> {
    if runs == 0 || !(eps > 0.0) {
        return Err(ExperimentError::InvalidConfig(
            "success_rate requires runs >= 1 and eps > 0".into(),
        ));
    }
    if reference.len() != dom.dimension() {
        return Err(ExperimentError::InvalidConfig(
            "reference point dimension does not match the domain".into(),
        ));
    }
    let start = Instant::now();
    let outcomes: Vec<Option<bool>> = (0..runs)
        .into_par_iter()
        .map(|r| {
            let mut cfg_r = cfg.clone();
            cfg_r.seed = replica_seed(cfg.seed, r as u64);
            match run_cbo(&cfg_r, obj, dom) {
                Ok(run) => Some(dist(&run.consensus, reference) <= eps),
                Err(_) => None,
            }
        })
        .collect();
    let successes = outcomes.iter().filter(|o| **o == Some(true)).count();
    let numerical_failures = outcomes.iter().filter(|o| o.is_none()).count();
    let rate = successes as f64 / runs as f64;
    let mut config = cfg.snapshot();
    config.push(("objective".into(), obj.name().into()));
    config.push(("domain".into(), dom.name().into()));
    config.push(("eps".into(), fmt_f64(eps)));
    config.push(("runs".into(), runs.to_string()));
    Ok(SuccessReport {
        runs,
        successes,
        rate,
        wilson_ci_95: wilson_interval(successes, runs, Z_95),
        numerical_failures,
        config,
        wall_time: start.elapsed(),
    })
}

/// Benchmark table identifiers.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TableId {
    Ackley,
    Heart,
    Rastrigin,
    Rosenbrock,
}

impl TableId {
    pub fn parse(s: &str) -> Option<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "ackley" => Some(Self::Ackley),
            "heart" | "townsend" => Some(Self::Heart),
            "rastrigin" => Some(Self::Rastrigin),
            "rosenbrock" | "repelling" => Some(Self::Rosenbrock),
            _ => None,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::Ackley => "ackley",
            Self::Heart => "heart",
            Self::Rastrigin => "rastrigin",
            Self::Rosenbrock => "rosenbrock",
        }
    }
}

const TABLE_N_GRID: [usize; 4] = [10, 20, 50, 100];

/// Solver configuration of one Ackley-table cell (unit time horizon, so the
/// step count equals `1/h`).
pub fn ackley_cell_config(scheme: Scheme, n: usize, inv_h: u64, seed: u64) -> SolverConfig {
    SolverConfig {
        scheme,
        alpha: 1e4,
        beta: Schedule::Constant(1.0),
        sigma: Schedule::Constant(4.0),
        repelling: None,
        h: 1.0 / inv_h as f64,
        steps: inv_h,
        particles: n,
        seed,
        penalty_epsilon: None,
        init: InitKind::FeasibleUniform,
    }
}

/// Solver configuration of one heart-table cell (projection scheme, h = 1/20).
pub fn heart_cell_config(n: usize, steps: u64, seed: u64) -> SolverConfig {
    SolverConfig {
        scheme: Scheme::Projection,
        alpha: 1e4,
        beta: Schedule::Constant(1.0),
        sigma: Schedule::Constant(4.0),
        repelling: None,
        h: 1.0 / 20.0,
        steps,
        particles: n,
        seed,
        penalty_epsilon: None,
        init: InitKind::EnclosingBallUniform,
    }
}

/// Solver configuration of one Rastrigin-table cell: β(t) = 10t,
/// σ(t) = 10 e^{−t ln 10}, h = 1/500.
pub fn rastrigin_cell_config(n: usize, steps: u64, seed: u64) -> SolverConfig {
    SolverConfig {
        scheme: Scheme::Projection,
        alpha: 1e4,
        beta: Schedule::Linear { intercept: 0.0, slope: 10.0 },
        sigma: Schedule::ExpDecay { initial: 10.0, rate: 10f64.ln() },
        repelling: None,
        h: 1.0 / 500.0,
        steps,
        particles: n,
        seed,
        penalty_epsilon: None,
        init: InitKind::FeasibleUniform,
    }
}

/// Solver configuration of one Rosenbrock-comparison cell; `repelling`
/// toggles the λ(t) = λ₀/(1+t²) force.
pub fn rosenbrock_cell_config(repelling: bool, n: usize, steps: u64, seed: u64) -> SolverConfig {
    SolverConfig {
        scheme: Scheme::Projection,
        alpha: 1e4,
        beta: Schedule::Constant(1.0),
        sigma: Schedule::Constant(4.0),
        repelling: repelling.then_some(Schedule::InverseSquare {
            initial: DEFAULT_REPELLING_LAMBDA0,
        }),
        h: 1.0 / 20.0,
        steps,
        particles: n,
        seed,
        penalty_epsilon: None,
        init: InitKind::FeasibleUniform,
    }
}

/// Reproduces one of the benchmark success-rate tables cell by cell. The
/// Rastrigin d = 500 column is only included when `include_long` is set.
pub fn reproduce_table(
    table: TableId,
    runs: usize,
    master_seed: u64,
    include_long: bool,
) -> Result<CsvReport, ExperimentError> {
    let mut csv = CsvReport::new(&[
        "table", "scheme", "d", "N", "steps", "rate", "ci_lo", "ci_hi", "runs", "seed",
    ]);
    csv.comment("table", table.name());
    csv.comment("runs", runs.to_string());
    csv.comment("master_seed", master_seed.to_string());
    csv.comment("eps", fmt_f64(DEFAULT_SUCCESS_EPS));

    let mut cell_idx: u64 = 0;
    let push_cell = |csv: &mut CsvReport,
                         scheme_label: &str,
                         d: usize,
                         n: usize,
                         steps: u64,
                         cfg: &SolverConfig,
                         obj: &Objective,
                         dom: &FeasibleDomain,
                         reference: &[f64]|
     -> Result<(), ExperimentError> {
        let report = success_rate(cfg, obj, dom, runs, DEFAULT_SUCCESS_EPS, reference)?;
        csv.push_row(vec![
            table.name().into(),
            scheme_label.into(),
            d.to_string(),
            n.to_string(),
            steps.to_string(),
            fmt_f64(report.rate),
            fmt_f64(report.wilson_ci_95.0),
            fmt_f64(report.wilson_ci_95.1),
            runs.to_string(),
            cfg.seed.to_string(),
        ]);
        Ok(())
    };

    match table {
        TableId::Ackley => {
            let obj = Objective::ackley();
            let dom = FeasibleDomain::ball(vec![0.0, 0.0], 3.0)?;
            for scheme in [Scheme::Penalty, Scheme::Projection] {
                for &inv_h in &[5u64, 10, 20, 50, 100] {
                    for &n in &TABLE_N_GRID {
                        let seed = replica_seed(master_seed, cell_idx);
                        cell_idx += 1;
                        let cfg = ackley_cell_config(scheme, n, inv_h, seed);
                        push_cell(&mut csv, scheme.name(), 2, n, inv_h, &cfg, &obj, &dom, &[2.0, 2.0])?;
                    }
                }
            }
        }
        TableId::Heart => {
            let obj = Objective::townsend();
            let dom = FeasibleDomain::heart();
            let reference = obj.known_minimizer().expect("grid oracle").to_vec();
            for &steps in &[5u64, 10, 20, 50, 100] {
                for &n in &TABLE_N_GRID {
                    let seed = replica_seed(master_seed, cell_idx);
                    cell_idx += 1;
                    let cfg = heart_cell_config(n, steps, seed);
                    push_cell(&mut csv, "projection", 2, n, steps, &cfg, &obj, &dom, &reference)?;
                }
            }
        }
        TableId::Rastrigin => {
            let mut dims = vec![5usize, 20, 100];
            if include_long {
                dims.push(500);
            }
            for &d in &dims {
                let obj = Objective::rastrigin(d);
                let dom = FeasibleDomain::ball(vec![0.0; d], 5.0)?;
                let reference = vec![0.0; d];
                for &steps in &[200u64, 500, 1000] {
                    for &n in &TABLE_N_GRID {
                        let seed = replica_seed(master_seed, cell_idx);
                        cell_idx += 1;
                        let cfg = rastrigin_cell_config(n, steps, seed);
                        push_cell(&mut csv, "projection", d, n, steps, &cfg, &obj, &dom, &reference)?;
                    }
                }
            }
        }
        TableId::Rosenbrock => {
            let obj = Objective::rosenbrock();
            let dom = FeasibleDomain::ball(vec![0.0, 0.0], 2f64.sqrt())?;
            for repelling in [false, true] {
                let label = if repelling { "repelling" } else { "standard" };
                for &steps in &[5u64, 10, 20, 50, 100] {
                    for &n in &TABLE_N_GRID {
                        let seed = replica_seed(master_seed, cell_idx);
                        cell_idx += 1;
                        let cfg = rosenbrock_cell_config(repelling, n, steps, seed);
                        push_cell(&mut csv, label, 2, n, steps, &cfg, &obj, &dom, &[1.0, 1.0])?;
                    }
                }
            }
        }
    }
    Ok(csv)
}

/// Result of the particle-count scaling study.
#[derive(Clone, Debug)]
pub struct RateStudyReport {
    pub n_values: Vec<usize>,
    /// Mean distance of the size-N consensus to the large-N reference.
    pub mean_errors: Vec<f64>,
    /// Least-squares slope of log error against log N.
    pub slope: f64,
    pub slope_se: f64,
    pub reference: Vec<f64>,
    pub replicas: usize,
}

impl RateStudyReport {
    pub fn to_csv(&self) -> CsvReport {
        let mut csv = CsvReport::new(&["N", "mean_error"]);
        csv.comment("slope", fmt_f64(self.slope));
        csv.comment("slope_se", fmt_f64(self.slope_se));
        csv.comment("replicas", self.replicas.to_string());
        for (n, e) in self.n_values.iter().zip(&self.mean_errors) {
            csv.push_row(vec![n.to_string(), fmt_f64(*e)]);
        }
        csv
    }
}

/// Template experiment for the scaling study: smooth strongly convex
/// quadratic on a ball.
pub fn chaos_defaults(seed: u64) -> (SolverConfig, Objective, FeasibleDomain) {
    let obj = Objective::new(
        "quadratic",
        2,
        |x: &[f64]| (x[0] - 0.5) * (x[0] - 0.5) + (x[1] - 0.25) * (x[1] - 0.25),
        Some(vec![0.5, 0.25]),
    );
    let dom = FeasibleDomain::ball(vec![0.0, 0.0], 3.0).expect("valid ball");
    let cfg = SolverConfig {
        scheme: Scheme::Projection,
        alpha: 1.0,
        beta: Schedule::Constant(1.0),
        sigma: Schedule::Constant(0.5),
        repelling: None,
        h: 0.05,
        steps: 20,
        particles: 0, // set per ensemble size
        seed,
        penalty_epsilon: None,
        init: InitKind::FeasibleUniform,
    };
    (cfg, obj, dom)
}

/// Scaling study of the consensus against a large-N reference: for each N the
/// replica-averaged distance to the reference consensus is recorded and the
/// log-log slope is fitted. The mean-field theory predicts −1/2.
pub fn chaos_rate_study(
    cfg: &SolverConfig,
    obj: &Objective,
    dom: &FeasibleDomain,
    n_list: &[usize],
    n_ref: usize,
    replicas: usize,
) -> Result<RateStudyReport, ExperimentError> {
    if n_list.len() < 2 {
        return Err(ExperimentError::InvalidConfig(
            "the scaling fit needs at least 2 ensemble sizes".into(),
        ));
    }
    if n_list.windows(2).any(|w| w[0] >= w[1]) {
        return Err(ExperimentError::InvalidConfig(
            "ensemble sizes must be strictly increasing".into(),
        ));
    }
    if *n_list.last().unwrap() > n_ref / 4 {
        return Err(ExperimentError::InvalidConfig(format!(
            "max ensemble size must satisfy N <= N_ref/4 = {}",
            n_ref / 4
        )));
    }
    if replicas < 20 {
        return Err(ExperimentError::InvalidConfig("replicas must be at least 20".into()));
    }

    let consensus_runs = |n: usize| -> Result<Vec<Vec<f64>>, ExperimentError> {
        let sub_master = replica_seed(cfg.seed, n as u64);
        (0..replicas)
            .into_par_iter()
            .map(|r| {
                let mut cfg_r = cfg.clone();
                cfg_r.particles = n;
                cfg_r.seed = replica_seed(sub_master, r as u64);
                Ok(run_cbo(&cfg_r, obj, dom)?.consensus)
            })
            .collect()
    };

    let ref_runs = consensus_runs(n_ref)?;
    let dim = dom.dimension();
    let mut reference = vec![0.0; dim];
    for c in &ref_runs {
        for (a, b) in reference.iter_mut().zip(c) {
            *a += b;
        }
    }
    for a in &mut reference {
        *a /= ref_runs.len() as f64;
    }

    let mut mean_errors = Vec::with_capacity(n_list.len());
    for &n in n_list {
        let runs = consensus_runs(n)?;
        let mean_err = runs.iter().map(|c| dist(c, &reference)).sum::<f64>() / runs.len() as f64;
        mean_errors.push(mean_err);
    }

    let xs: Vec<f64> = n_list.iter().map(|n| (*n as f64).ln()).collect();
    let ys: Vec<f64> = mean_errors.iter().map(|e| e.ln()).collect();
    let (slope, slope_se) = ols_slope(&xs, &ys);
    if slope_se > 0.1 {
        return Err(ExperimentError::InsufficientReplicas { se: slope_se });
    }
    Ok(RateStudyReport {
        n_values: n_list.to_vec(),
        mean_errors,
        slope,
        slope_se,
        reference,
        replicas,
    })
}

/// OLS slope and its standard error.
fn ols_slope(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let x_mean = xs.iter().sum::<f64>() / n;
    let y_mean = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - x_mean) * (x - x_mean)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - x_mean) * (y - y_mean)).sum();
    let slope = sxy / sxx;
    if xs.len() <= 2 {
        return (slope, f64::INFINITY);
    }
    let intercept = y_mean - slope * x_mean;
    let rss: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| {
            let r = y - (intercept + slope * x);
            r * r
        })
        .sum();
    let se = (rss / (n - 2.0) / sxx).sqrt();
    (slope, se)
}

/// Outcome of the variance-decay validation.
#[derive(Clone, Debug)]
pub struct DecayCheck {
    pub eta0: f64,
    pub passed: bool,
    /// First grid time violating the bound, with (t, var, bound).
    pub first_violation: Option<(f64, f64, f64)>,
    /// Replica-averaged variance curve rows (t, var, bound).
    pub curve: Vec<(f64, f64, f64)>,
}

impl DecayCheck {
    pub fn to_csv(&self) -> CsvReport {
        let mut csv = CsvReport::new(&["t", "var", "bound"]);
        csv.comment("eta0", fmt_f64(self.eta0));
        csv.comment("passed", self.passed.to_string());
        for (t, v, b) in &self.curve {
            csv.push_row(vec![fmt_f64(*t), fmt_f64(*v), fmt_f64(*b)]);
        }
        csv
    }
}

/// Validates the variance-decay rate `η₀ = 2β − σ²(1 + e^{2αf_osc})` under a
/// constant objective (`f_osc = 0`, so `η₀ = 2β − 2σ²`): the replica-averaged
/// ensemble variance must satisfy `Var(t) ≤ Var(0)·e^{−η₀t}·1.25` at
/// t ∈ {0.25, 0.5, 1.0}.
pub fn variance_decay_check(
    beta: f64,
    sigma: f64,
    alpha: f64,
    dom: &FeasibleDomain,
    replicas: usize,
    seed: u64,
) -> Result<DecayCheck, ExperimentError> {
    if !matches!(dom, FeasibleDomain::Ball { .. }) {
        return Err(ExperimentError::InvalidConfig(
            "decay validation requires a ball domain (convexity)".into(),
        ));
    }
    let eta0 = 2.0 * beta - 2.0 * sigma * sigma;
    if !(eta0 > 0.0) {
        return Err(ExperimentError::InvalidConfig(format!(
            "decay condition violated: eta0 = 2β − 2σ² = {eta0} must be positive"
        )));
    }
    if replicas == 0 {
        return Err(ExperimentError::InvalidConfig("replicas must be at least 1".into()));
    }
    const STEPS: u64 = 80;
    let h = 1.0 / STEPS as f64;
    let n_particles = 100usize;
    let obj = Objective::new("constant", dom.dimension(), |_| 1.0, None);
    let cfg = SolverConfig {
        scheme: Scheme::Projection,
        alpha,
        beta: Schedule::Constant(beta),
        sigma: Schedule::Constant(sigma),
        repelling: None,
        h,
        steps: STEPS,
        particles: n_particles,
        seed,
        penalty_epsilon: None,
        init: InitKind::FeasibleUniform,
    };

    // replica-averaged variance at every step
    let per_replica: Vec<Vec<f64>> = (0..replicas)
        .into_par_iter()
        .map(|r| -> Result<Vec<f64>, ExperimentError> {
            let mut cfg_r = cfg.clone();
            cfg_r.seed = replica_seed(seed, r as u64);
            let noise = NoiseSource::new(cfg_r.seed);
            let rows = dom.sample_uniform(&mut noise.init_stream(), n_particles)?;
            let mut ens = Ensemble::from_rows(&rows)?;
            let mut vars = Vec::with_capacity(STEPS as usize + 1);
            vars.push(ens.variance());
            for _ in 0..STEPS {
                ens = crate::dynamics::cbo_step_projection(&ens, &cfg_r, &obj, dom, &noise)?;
                vars.push(ens.variance());
            }
            Ok(vars)
        })
        .collect::<Result<_, _>>()?;

    let mut mean_vars = vec![0.0; STEPS as usize + 1];
    for vars in &per_replica {
        for (m, v) in mean_vars.iter_mut().zip(vars) {
            *m += v;
        }
    }
    for m in &mut mean_vars {
        *m /= replicas as f64;
    }

    let var0 = mean_vars[0];
    let curve: Vec<(f64, f64, f64)> = mean_vars
        .iter()
        .enumerate()
        .map(|(k, v)| {
            let t = k as f64 * h;
            (t, *v, var0 * (-eta0 * t).exp() * 1.25)
        })
        .collect();

    let mut first_violation = None;
    for &t_check in &[0.25, 0.5, 1.0] {
        let k = (t_check / h).round() as usize;
        let (t, v, bound) = curve[k];
        if v > bound {
            first_violation = Some((t, v, bound));
            break;
        }
    }
    Ok(DecayCheck {
        eta0,
        passed: first_violation.is_none(),
        first_violation,
        curve,
    })
}

type Scalar1d = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// One-dimensional interaction potential with its derivative; a quadratic
/// kernel `V'(z) = κz` is flagged so the sampler can aggregate in O(N).
#[derive(Clone)]
pub struct Interaction1d {
    pub v: Scalar1d,
    pub dv: Scalar1d,
    pub quadratic_strength: Option<f64>,
}

/// Specification of one invariant-measure study on an interval.
#[derive(Clone)]
pub struct LangevinStudy {
    pub name: String,
    pub potential: Scalar1d,
    pub grad_potential: Scalar1d,
    pub interaction: Option<Interaction1d>,
    pub sigma: f64,
    pub interval: (f64, f64),
    pub particles: usize,
    pub h: f64,
    pub burn_in_steps: u64,
    pub collect_every: u64,
    pub collections: usize,
    pub seed: u64,
}

/// The three stock invariant-measure studies.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LangevinPreset {
    /// Quadratic potential, no interaction: truncated Gaussian.
    QuadraticWell,
    /// Large σ: nearly uniform invariant measure.
    FlatLimit,
    /// Double-well potential plus quadratic attraction.
    DoubleWell,
}

impl LangevinPreset {
    pub fn parse(s: &str) -> Option<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "quadratic" | "gauss" => Some(Self::QuadraticWell),
            "flat" => Some(Self::FlatLimit),
            "doublewell" | "double-well" => Some(Self::DoubleWell),
            _ => None,
        }
    }

    pub fn study(&self, seed: u64) -> LangevinStudy {
        let base = LangevinStudy {
            name: String::new(),
            potential: Arc::new(|_| 0.0),
            grad_potential: Arc::new(|_| 0.0),
            interaction: None,
            sigma: 1.0,
            interval: (-1.0, 1.0),
            particles: 2048,
            h: 5e-4,
            burn_in_steps: 2000,
            collect_every: 50,
            collections: 150,
            seed,
        };
        match self {
            Self::QuadraticWell => LangevinStudy {
                name: "quadratic".into(),
                potential: Arc::new(|x| 2.0 * x * x),
                grad_potential: Arc::new(|x| 4.0 * x),
                ..base
            },
            Self::FlatLimit => LangevinStudy {
                name: "flat".into(),
                potential: Arc::new(|x| 0.5 * x * x),
                grad_potential: Arc::new(|x| x),
                sigma: 3.0,
                ..base
            },
            Self::DoubleWell => LangevinStudy {
                name: "doublewell".into(),
                potential: Arc::new(|x| 2.0 * (x * x - 0.25) * (x * x - 0.25)),
                grad_potential: Arc::new(|x| 8.0 * x * (x * x - 0.25)),
                interaction: Some(Interaction1d {
                    v: Arc::new(|z| 0.5 * z * z),
                    dv: Arc::new(|z| z),
                    quadratic_strength: Some(1.0),
                }),
                ..base
            },
        }
    }
}

/// Number of grid cells of the fixed-point oracle.
pub const ORACLE_GRID: usize = 2048;
/// Number of histogram bins of the empirical comparison.
pub const HISTOGRAM_BINS: usize = 64;

/// Self-consistent invariant density `μ̃ ∝ exp(−(2/σ²)(U + V*μ̃))` on the
/// study interval, by damped fixed-point iteration on a 2048-point grid.
/// Returns cell-center densities normalized to unit mass.
pub fn fixed_point_density(study: &LangevinStudy) -> Result<Vec<f64>, ExperimentError> {
    let (a, b) = study.interval;
    let n = ORACLE_GRID;
    let dx = (b - a) / n as f64;
    let centers: Vec<f64> = (0..n).map(|i| a + (i as f64 + 0.5) * dx).collect();
    let u: Vec<f64> = centers.iter().map(|&x| (study.potential)(x)).collect();
    // pairwise kernel matrix (only when an interaction is present)
    let kernel: Option<Vec<f64>> = study.interaction.as_ref().map(|inter| {
        let mut k = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                k[i * n + j] = (inter.v)(centers[i] - centers[j]);
            }
        }
        k
    });

    let inv_temp = 2.0 / (study.sigma * study.sigma);
    let mut rho = vec![1.0 / (b - a); n];
    let mut energy = vec![0.0; n];
    const MAX_ITERS: usize = 10_000;
    const DAMPING: f64 = 0.5;
    let mut residual = f64::INFINITY;
    for _ in 0..MAX_ITERS {
        energy.copy_from_slice(&u);
        if let Some(k) = &kernel {
            for i in 0..n {
                let row = &k[i * n..(i + 1) * n];
                energy[i] += row.iter().zip(&rho).map(|(kv, r)| kv * r).sum::<f64>() * dx;
            }
        }
        let e_min = energy.iter().copied().fold(f64::INFINITY, f64::min);
        let mut updated: Vec<f64> = energy.iter().map(|e| (-(inv_temp) * (e - e_min)).exp()).collect();
        let mass: f64 = updated.iter().sum::<f64>() * dx;
        for v in &mut updated {
            *v /= mass;
        }
        residual = updated
            .iter()
            .zip(&rho)
            .map(|(new, old)| (new - old).abs())
            .fold(0.0, f64::max);
        for (old, new) in rho.iter_mut().zip(&updated) {
            *old = (1.0 - DAMPING) * *old + DAMPING * new;
        }
        if residual <= 1e-10 {
            return Ok(rho);
        }
    }
    Err(ExperimentError::OracleNonConvergence { residual, iters: MAX_ITERS })
}

/// Outcome of one invariant-measure check.
#[derive(Clone, Debug)]
pub struct LangevinCheck {
    pub name: String,
    pub l1_distance: f64,
    pub passed: bool,
    /// Histogram rows (bin_lo, bin_hi, empirical_mass, oracle_mass).
    pub histogram: Vec<(f64, f64, f64, f64)>,
    /// Wasserstein-1 distance to the oracle at each collection time.
    pub w1_curve: Vec<(f64, f64)>,
}

impl LangevinCheck {
    pub fn histogram_csv(&self) -> CsvReport {
        let mut csv = CsvReport::new(&["bin_lo", "bin_hi", "empirical_mass", "oracle_mass"]);
        csv.comment("study", &self.name);
        csv.comment("l1_distance", fmt_f64(self.l1_distance));
        csv.comment("passed", self.passed.to_string());
        for (lo, hi, e, o) in &self.histogram {
            csv.push_row(vec![fmt_f64(*lo), fmt_f64(*hi), fmt_f64(*e), fmt_f64(*o)]);
        }
        csv
    }

    pub fn decay_csv(&self) -> CsvReport {
        let mut csv = CsvReport::new(&["t", "w1"]);
        csv.comment("study", &self.name);
        for (t, w) in &self.w1_curve {
            csv.push_row(vec![fmt_f64(*t), fmt_f64(*w)]);
        }
        csv
    }
}

/// Runs the reflected Langevin integrator and compares the post-burn-in
/// empirical histogram (64 bins) with the fixed-point oracle density in L¹.
pub fn langevin_invariant_check(study: &LangevinStudy) -> Result<LangevinCheck, ExperimentError> {
    let (a, b) = study.interval;
    if !(b > a) {
        return Err(ExperimentError::InvalidConfig("empty interval".into()));
    }
    let oracle = fixed_point_density(study)?;
    let dx = (b - a) / ORACLE_GRID as f64;

    // oracle CDF at cell right edges, for W1
    let mut oracle_cdf = Vec::with_capacity(ORACLE_GRID);
    let mut acc = 0.0;
    for r in &oracle {
        acc += r * dx;
        oracle_cdf.push(acc);
    }

    let grad_u = Arc::clone(&study.grad_potential);
    let interaction = match &study.interaction {
        None => Interaction::None,
        Some(inter) => match inter.quadratic_strength {
            Some(k) => Interaction::Quadratic { strength: k },
            None => {
                let dv = Arc::clone(&inter.dv);
                Interaction::Pairwise(Arc::new(move |z: &[f64]| vec![dv(z[0])]))
            }
        },
    };
    let cfg = LangevinConfig {
        grad_potential: Arc::new(move |x: &[f64]| vec![grad_u(x[0])]),
        interaction,
        sigma_noise: study.sigma,
        h: study.h,
        steps: study.burn_in_steps + study.collect_every * study.collections as u64,
        particles: study.particles,
        seed: study.seed,
    };
    cfg.validate()?;
    let dom = FeasibleDomain::axis_box(vec![a], vec![b])?;
    let noise = NoiseSource::new(study.seed);
    let rows = dom.sample_uniform(&mut noise.init_stream(), study.particles)?;
    let mut ens = Ensemble::from_rows(&rows)?;

    let mut samples: Vec<f64> = Vec::with_capacity(study.particles * study.collections);
    let mut w1_curve = Vec::with_capacity(study.collections);
    for _ in 0..study.burn_in_steps {
        ens = langevin_step_projection(&ens, &cfg, &dom, &noise)?;
    }
    for _ in 0..study.collections {
        for _ in 0..study.collect_every {
            ens = langevin_step_projection(&ens, &cfg, &dom, &noise)?;
        }
        samples.extend_from_slice(ens.positions());
        w1_curve.push((ens.time, w1_to_oracle(ens.positions(), a, dx, &oracle_cdf)));
    }

    // 64-bin comparison
    let bins = HISTOGRAM_BINS;
    let bin_w = (b - a) / bins as f64;
    let mut emp = vec![0.0; bins];
    for &x in &samples {
        let idx = (((x - a) / bin_w) as usize).min(bins - 1);
        emp[idx] += 1.0;
    }
    for e in &mut emp {
        *e /= samples.len() as f64;
    }
    let cells_per_bin = ORACLE_GRID / bins;
    let oracle_mass: Vec<f64> = (0..bins)
        .map(|k| {
            oracle[k * cells_per_bin..(k + 1) * cells_per_bin]
                .iter()
                .sum::<f64>()
                * dx
        })
        .collect();
    let l1: f64 = emp.iter().zip(&oracle_mass).map(|(e, o)| (e - o).abs()).sum();
    let histogram = (0..bins)
        .map(|k| {
            (
                a + k as f64 * bin_w,
                a + (k + 1) as f64 * bin_w,
                emp[k],
                oracle_mass[k],
            )
        })
        .collect();
    Ok(LangevinCheck {
        name: study.name.clone(),
        l1_distance: l1,
        passed: l1 <= 0.1,
        histogram,
        w1_curve,
    })
}

/// W1 distance between the empirical measure of `positions` and the oracle,
/// via the integrated CDF difference on the oracle grid.
fn w1_to_oracle(positions: &[f64], a: f64, dx: f64, oracle_cdf: &[f64]) -> f64 {
    let mut sorted = positions.to_vec();
    sorted.sort_by(|p, q| p.total_cmp(q));
    let n = sorted.len() as f64;
    let mut w1 = 0.0;
    let mut count = 0usize;
    for (i, &oc) in oracle_cdf.iter().enumerate() {
        let edge = a + (i as f64 + 1.0) * dx;
        while count < sorted.len() && sorted[count] <= edge {
            count += 1;
        }
        w1 += (count as f64 / n - oc).abs() * dx;
    }
    w1
}

/// Outcome of the inverse-problem study.
#[derive(Clone, Debug)]
pub struct InvertOutcome {
    pub report: SuccessReport,
    /// Final consensus triples of the successful-and-finite replicas.
    pub recovered: Vec<[f64; 3]>,
    /// Per-parameter histograms (σ, m, γ) of the recovered values.
    pub histograms: Vec<CsvReport>,
}

/// Replicated recovery study for the jump-diffusion parameters: each replica
/// draws fresh noisy observations, minimizes the regularized loss over the
/// parameter box with the projection scheme, and is scored with ε = 0.01.
pub fn invert_merton(
    runs: usize,
    alpha: f64,
    particles: usize,
    steps: u64,
    master_seed: u64,
    noise_scale: f64,
) -> Result<InvertOutcome, ExperimentError> {
    if runs == 0 {
        return Err(ExperimentError::InvalidConfig("runs must be at least 1".into()));
    }
    let theta_true = true_parameters();
    let reference = theta_true.to_vec();
    let (lower, upper) = parameter_box();
    let dom = FeasibleDomain::axis_box(lower, upper)?;
    let base_cfg = SolverConfig {
        scheme: Scheme::Projection,
        alpha,
        beta: Schedule::Linear { intercept: 0.0, slope: 10.0 },
        sigma: Schedule::ExpDecay { initial: 10.0, rate: 10f64.ln() },
        repelling: None,
        h: 0.01,
        steps,
        particles,
        seed: master_seed,
        penalty_epsilon: None,
        init: InitKind::FeasibleUniform,
    };
    base_cfg.validate()?;

    let start = Instant::now();
    let outcomes: Vec<Option<[f64; 3]>> = (0..runs)
        .into_par_iter()
        .map(|r| {
            let seed_r = replica_seed(master_seed, r as u64);
            let obs = generate_observations_scaled(theta_true, seed_r, noise_scale);
            let obj = Objective::merton_inverse(obs, LAMBDA_REG);
            let mut cfg_r = base_cfg.clone();
            cfg_r.seed = seed_r;
            match run_cbo(&cfg_r, &obj, &dom) {
                Ok(run) => Some([run.consensus[0], run.consensus[1], run.consensus[2]]),
                Err(_) => None,
            }
        })
        .collect();

    let recovered: Vec<[f64; 3]> = outcomes.iter().flatten().copied().collect();
    let numerical_failures = outcomes.iter().filter(|o| o.is_none()).count();
    let eps = 0.01;
    let successes = recovered
        .iter()
        .filter(|c| dist(&c[..], &reference) <= eps)
        .count();
    let rate = successes as f64 / runs as f64;

    let mut config = base_cfg.snapshot();
    config.push(("objective".into(), "merton".into()));
    config.push(("domain".into(), "box".into()));
    config.push(("eps".into(), fmt_f64(eps)));
    config.push(("runs".into(), runs.to_string()));
    config.push(("noise_scale".into(), fmt_f64(noise_scale)));
    config.push(("lambda_reg".into(), fmt_f64(LAMBDA_REG)));
    let report = SuccessReport {
        runs,
        successes,
        rate,
        wilson_ci_95: wilson_interval(successes, runs, Z_95),
        numerical_failures,
        config: config.clone(),
        wall_time: start.elapsed(),
    };

    let names = ["sigma", "m", "gamma"];
    let histograms = (0..3)
        .map(|k| {
            let values: Vec<f64> = recovered.iter().map(|c| c[k]).collect();
            let mut csv = parameter_histogram(&values, 40);
            csv.comment("parameter", names[k]);
            csv.comment("true_value", fmt_f64(reference[k]));
            csv.comments_from(&config);
            csv
        })
        .collect();
    Ok(InvertOutcome { report, recovered, histograms })
}

/// Fixed-bin histogram over the observed value range.
fn parameter_histogram(values: &[f64], bins: usize) -> CsvReport {
    let mut csv = CsvReport::new(&["bin_lo", "bin_hi", "count"]);
    if values.is_empty() {
        return csv;
    }
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let width = if hi > lo { (hi - lo) / bins as f64 } else { 1.0 };
    let mut counts = vec![0usize; bins];
    for &v in values {
        let idx = (((v - lo) / width) as usize).min(bins - 1);
        counts[idx] += 1;
    }
    for (k, c) in counts.iter().enumerate() {
        csv.push_row(vec![
            fmt_f64(lo + k as f64 * width),
            fmt_f64(lo + (k + 1) as f64 * width),
            c.to_string(),
        ]);
    }
    csv
}

/// Inverse-problem study with the paper's noise level.
pub fn invert_merton_default_noise(
    runs: usize,
    alpha: f64,
    particles: usize,
    steps: u64,
    master_seed: u64,
) -> Result<InvertOutcome, ExperimentError> {
    invert_merton(runs, alpha, particles, steps, master_seed, NOISE_SCALE)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wilson_contains_rate_and_shrinks() {
        for &(s, n) in &[(0usize, 10usize), (5, 10), (10, 10), (137, 1000)] {
            let (lo, hi) = wilson_interval(s, n, Z_95);
            let p = s as f64 / n as f64;
            assert!(lo <= p && p <= hi, "({s}, {n})");
            assert!((0.0..=1.0).contains(&lo) && (0.0..=1.0).contains(&hi));
        }
        // width shrinks like n^{-1/2}
        let w = |n: usize| {
            let (lo, hi) = wilson_interval(n / 5, n, Z_95);
            hi - lo
        };
        let (w100, w400, w1600) = (w(100), w(400), w(1600));
        assert!(w100 > w400 && w400 > w1600);
        assert!((3.0..5.0).contains(&(w100 / w1600)), "{}", w100 / w1600);
        assert!((1.7..2.3).contains(&(w100 / w400)), "{}", w100 / w400);
    }

    #[test]
    fn success_rate_trivial_eps() {
        let (mut cfg, obj, dom) = chaos_defaults(3);
        cfg.particles = 8;
        cfg.steps = 3;
        let report = success_rate(&cfg, &obj, &dom, 20, f64::INFINITY, &[0.0, 0.0]);
        // eps must be finite and positive; infinity is allowed by > 0.0
        let report = report.unwrap();
        assert_eq!(report.successes, 20);
        assert_eq!(report.rate, 1.0);
        assert_eq!(report.numerical_failures, 0);
    }

    #[test]
    fn success_rate_is_deterministic_across_worker_counts() {
        let (mut cfg, obj, dom) = chaos_defaults(11);
        cfg.particles = 10;
        cfg.steps = 5;
        let run = |threads: usize| {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap();
            pool.install(|| {
                success_rate(&cfg, &obj, &dom, 30, 0.5, &[0.5, 0.25])
                    .unwrap()
                    .to_csv()
                    .render()
            })
        };
        assert_eq!(run(1), run(4));
    }

    #[test]
    fn chaos_study_rejects_bad_grids() {
        let (cfg, obj, dom) = chaos_defaults(1);
        assert!(matches!(
            chaos_rate_study(&cfg, &obj, &dom, &[32], 4096, 32),
            Err(ExperimentError::InvalidConfig(_))
        ));
        assert!(matches!(
            chaos_rate_study(&cfg, &obj, &dom, &[32, 2048], 4096, 32),
            Err(ExperimentError::InvalidConfig(_))
        ));
        assert!(matches!(
            chaos_rate_study(&cfg, &obj, &dom, &[32, 64], 4096, 19),
            Err(ExperimentError::InvalidConfig(_))
        ));
    }

    #[test]
    fn chaos_two_point_fit_has_no_error_estimate() {
        // with two sizes the fit has no residual degrees of freedom, so the
        // slope standard error is undefined and the study refuses the result
        let (cfg, obj, dom) = chaos_defaults(1);
        assert!(matches!(
            chaos_rate_study(&cfg, &obj, &dom, &[16, 32], 128, 24),
            Err(ExperimentError::InsufficientReplicas { .. })
        ));
    }

    #[test]
    fn chaos_slope_is_stable_under_replica_doubling() {
        let (cfg, obj, dom) = chaos_defaults(9);
        let a = chaos_rate_study(&cfg, &obj, &dom, &[16, 32, 64], 512, 64).unwrap();
        let b = chaos_rate_study(&cfg, &obj, &dom, &[16, 32, 64], 512, 128).unwrap();
        let tol = 2.0 * a.slope_se.max(b.slope_se);
        assert!(
            (a.slope - b.slope).abs() <= tol,
            "slopes {} vs {} differ beyond {tol}",
            a.slope,
            b.slope
        );
    }

    #[test]
    fn wilson_width_shrinks_on_a_fixed_config() {
        let (mut cfg, obj, dom) = chaos_defaults(33);
        cfg.particles = 8;
        cfg.steps = 4;
        let width = |runs: usize| {
            let rep = success_rate(&cfg, &obj, &dom, runs, 0.25, &[0.5, 0.25]).unwrap();
            rep.wilson_ci_95.1 - rep.wilson_ci_95.0
        };
        let (w100, w400, w1600) = (width(100), width(400), width(1600));
        assert!(w100 > w400 && w400 > w1600, "{w100} {w400} {w1600}");
        assert!((2.2..8.0).contains(&(w100 / w1600)), "{}", w100 / w1600);
    }

    #[test]
    fn ols_slope_recovers_exact_line() {
        let xs = [1.0, 2.0, 3.0, 4.0];
        let ys: Vec<f64> = xs.iter().map(|x| 3.0 - 0.5 * x).collect();
        let (slope, se) = ols_slope(&xs, &ys);
        assert!((slope + 0.5).abs() < 1e-12);
        assert!(se.abs() < 1e-12);
    }

    #[test]
    fn decay_check_rejects_nonpositive_eta0() {
        let dom = FeasibleDomain::ball(vec![0.0, 0.0], 1.0).unwrap();
        assert!(matches!(
            variance_decay_check(1.0, 1.0, 1.0, &dom, 10, 0),
            Err(ExperimentError::InvalidConfig(_))
        ));
    }

    #[test]
    fn decay_check_requires_ball() {
        let dom = FeasibleDomain::axis_box(vec![0.0], vec![1.0]).unwrap();
        assert!(matches!(
            variance_decay_check(2.0, 1.0, 1.0, &dom, 10, 0),
            Err(ExperimentError::InvalidConfig(_))
        ));
    }

    #[test]
    fn noiseless_decay_matches_closed_form_contraction() {
        // σ = 0: every deviation from the mean contracts by (1 − βh) per
        // step, so the ensemble variance scales by (1 − βh)^{2K} exactly.
        let dom = FeasibleDomain::ball(vec![0.0, 0.0], 1.0).unwrap();
        let beta = 2.0;
        let h = 1.0 / 80.0;
        let obj = Objective::new("constant", 2, |_| 1.0, None);
        let cfg = SolverConfig {
            scheme: Scheme::Projection,
            alpha: 1.0,
            beta: Schedule::Constant(beta),
            sigma: Schedule::Constant(0.0),
            repelling: None,
            h,
            steps: 40,
            particles: 64,
            seed: 5,
            penalty_epsilon: None,
            init: InitKind::FeasibleUniform,
        };
        let noise = NoiseSource::new(cfg.seed);
        let rows = dom.sample_uniform(&mut noise.init_stream(), cfg.particles).unwrap();
        let mut ens = Ensemble::from_rows(&rows).unwrap();
        let v0 = ens.variance();
        for _ in 0..cfg.steps {
            ens = crate::dynamics::cbo_step_projection(&ens, &cfg, &obj, &dom, &noise).unwrap();
        }
        let expected = v0 * (1.0 - beta * h).powi(2 * cfg.steps as i32);
        let got = ens.variance();
        assert!(
            (got - expected).abs() <= 1e-10 * expected.max(1e-30),
            "got {got}, expected {expected}"
        );
    }

    #[test]
    fn oracle_quadratic_well_matches_closed_form() {
        let study = LangevinPreset::QuadraticWell.study(1);
        let rho = fixed_point_density(&study).unwrap();
        // closed form: ρ ∝ exp(−(2/σ²) U(x)) = exp(−4x²) on [−1, 1]
        let (a, b) = study.interval;
        let dx = (b - a) / ORACLE_GRID as f64;
        let unnorm: Vec<f64> = (0..ORACLE_GRID)
            .map(|i| {
                let x = a + (i as f64 + 0.5) * dx;
                (-4.0 * x * x).exp()
            })
            .collect();
        let mass: f64 = unnorm.iter().sum::<f64>() * dx;
        for (r, u) in rho.iter().zip(&unnorm) {
            assert!((r - u / mass).abs() <= 1e-8, "{r} vs {}", u / mass);
        }
    }

    #[test]
    fn oracle_flat_limit_is_nearly_uniform() {
        let study = LangevinPreset::FlatLimit.study(1);
        let rho = fixed_point_density(&study).unwrap();
        let uniform = 0.5; // 1/(b−a)
        for r in &rho {
            assert!((r - uniform).abs() <= 0.06, "{r}");
        }
    }

    #[test]
    fn parameter_histogram_counts_everything() {
        let csv = parameter_histogram(&[0.0, 0.1, 0.2, 0.95, 1.0], 10);
        let total: usize = csv.rows.iter().map(|r| r[2].parse::<usize>().unwrap()).sum();
        assert_eq!(total, 5);
    }

    #[test]
    fn table_smoke_test_small_runs() {
        // tiny replica counts: exercises the full plumbing of every cell type
        let csv = reproduce_table(TableId::Rosenbrock, 2, 7, false).unwrap();
        assert_eq!(csv.rows.len(), 2 * 5 * 4);
        assert_eq!(csv.columns[0], "table");
        let csv2 = CsvReport::parse(&csv.render()).unwrap();
        assert_eq!(csv2, csv);
    }
}
