//! Interacting particle systems: weighted consensus, repelling forces, the
//! penalty and projection time-stepping schemes, and the mean-field Langevin
//! integrator.
//!
//! One step of either consensus scheme freezes all coefficients at `t_k` and
//! uses the pre-step positions for the consensus and repelling terms:
//!
//! ```text
//! penalty:     Y_{k+1} = Y_k + b_k h + σ(t_k) diag(Y_k − X̄) ΔW − (h/ε) π(Y_k)
//! projection:  Y_{k+1} = Π( Y_k + b_k h + σ(t_k) diag(Y_k − X̄) ΔW )
//! b_k = −β(t_k)(Y_k − X̄) + (λ(t_k)/N) Σ_j (Y_k − Y_k^j) e^{−|Y_k − Y_k^j|²/2}
//! ```
//!
//! with `ΔW` componentwise independent `N(0, h)` increments drawn from
//! per-(particle, step) substreams, so trajectories do not depend on
//! evaluation order.

use std::sync::Arc;

use rand::Rng;
use rand_distr::StandardNormal;
use thiserror::Error;

use crate::domain::{DomainError, FeasibleDomain};
use crate::objective::Objective;
use crate::rng::NoiseSource;
use crate::schedule::Schedule;

#[derive(Debug, Error)]
pub enum DynamicsError {
    #[error("non-finite particle coordinate produced at step {step}")]
    NonFinite { step: u64 },
    #[error(transparent)]
    Domain(#[from] DomainError),
    #[error("invalid solver configuration: {0}")]
    InvalidConfig(String),
}

/// Particle positions (row-major N×d) plus the simulation clock.
#[derive(Clone, Debug, PartialEq)]
pub struct Ensemble {
    positions: Vec<f64>,
    n: usize,
    dim: usize,
    pub time: f64,
    pub step: u64,
}

impl Ensemble {
    pub fn new(positions: Vec<f64>, n: usize, dim: usize) -> Result<Self, DynamicsError> {
        if n == 0 || dim == 0 || positions.len() != n * dim {
            return Err(DynamicsError::InvalidConfig(format!(
                "ensemble shape mismatch: {} values for {n}×{dim}",
                positions.len()
            )));
        }
        if !crate::vecmath::all_finite(&positions) {
            return Err(DynamicsError::NonFinite { step: 0 });
        }
        Ok(Self { positions, n, dim, time: 0.0, step: 0 })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self, DynamicsError> {
        let n = rows.len();
        let dim = rows.first().map_or(0, Vec::len);
        let mut positions = Vec::with_capacity(n * dim);
        for r in rows {
            positions.extend_from_slice(r);
        }
        Self::new(positions, n, dim)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn positions(&self) -> &[f64] {
        &self.positions
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.positions[i * self.dim..(i + 1) * self.dim]
    }

    pub fn mean(&self) -> Vec<f64> {
        let mut m = vec![0.0; self.dim];
        for i in 0..self.n {
            for (a, b) in m.iter_mut().zip(self.row(i)) {
                *a += b;
            }
        }
        for a in &mut m {
            *a /= self.n as f64;
        }
        m
    }

    /// Mean squared deviation from the ensemble mean, `(1/N) Σ |xᵢ − x̄|²`.
    pub fn variance(&self) -> f64 {
        let m = self.mean();
        (0..self.n)
            .map(|i| crate::vecmath::dist(self.row(i), &m).powi(2))
            .sum::<f64>()
            / self.n as f64
    }
}

/// Time-stepping scheme for the reflected dynamics.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Scheme {
    Penalty,
    Projection,
}

/// Initial particle distribution.
///
/// `FeasibleUniform` is the default: i.i.d. uniform on `Ḡ`. With
/// `EnclosingBallUniform` the particles start uniform on the domain's
/// enclosing ball and the scheme's own constraint handling pulls strays onto
/// `∂G` during the first step; for ball domains the two coincide. The heart
/// benchmark uses the enclosing-ball start.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum InitKind {
    #[default]
    FeasibleUniform,
    EnclosingBallUniform,
}

impl InitKind {
    pub fn parse(s: &str) -> Option<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "feasible" | "domain" => Some(Self::FeasibleUniform),
            "enclosing-ball" | "ball" => Some(Self::EnclosingBallUniform),
            _ => None,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::FeasibleUniform => "feasible",
            Self::EnclosingBallUniform => "enclosing-ball",
        }
    }
}

impl Scheme {
    pub fn parse(s: &str) -> Option<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "penalty" => Some(Self::Penalty),
            "projection" => Some(Self::Projection),
            _ => None,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::Penalty => "penalty",
            Self::Projection => "projection",
        }
    }
}

/// Full configuration of a consensus-based optimization run.
#[derive(Clone, Debug)]
pub struct SolverConfig {
    pub scheme: Scheme,
    /// Inverse temperature α of the consensus weights.
    pub alpha: f64,
    /// Drift strength β(t).
    pub beta: Schedule,
    /// Diffusion strength σ(t).
    pub sigma: Schedule,
    /// Repelling strength λ(t); `None` disables the repelling force.
    pub repelling: Option<Schedule>,
    /// Step size h.
    pub h: f64,
    /// Number of steps K.
    pub steps: u64,
    /// Number of particles N.
    pub particles: usize,
    /// Master seed of this run.
    pub seed: u64,
    /// Penalty strength ε; `None` means the optimal choice ε = h.
    pub penalty_epsilon: Option<f64>,
    /// Initial particle distribution.
    pub init: InitKind,
}

impl SolverConfig {
    /// Projection-scheme configuration with constant drift/diffusion.
    pub fn projection(alpha: f64, beta: f64, sigma: f64, h: f64, steps: u64, particles: usize, seed: u64) -> Self {
        Self {
            scheme: Scheme::Projection,
            alpha,
            beta: Schedule::Constant(beta),
            sigma: Schedule::Constant(sigma),
            repelling: None,
            h,
            steps,
            particles,
            seed,
            penalty_epsilon: None,
            init: InitKind::FeasibleUniform,
        }
    }

    /// Effective penalty strength.
    pub fn epsilon(&self) -> f64 {
        self.penalty_epsilon.unwrap_or(self.h)
    }

    pub fn validate(&self) -> Result<(), DynamicsError> {
        if !(self.alpha > 0.0) || !self.alpha.is_finite() {
            return Err(DynamicsError::InvalidConfig(format!(
                "alpha must be positive and finite, got {}",
                self.alpha
            )));
        }
        if !(self.h > 0.0) || !self.h.is_finite() {
            return Err(DynamicsError::InvalidConfig(format!(
                "step size h must be positive, got {}",
                self.h
            )));
        }
        if self.particles == 0 {
            return Err(DynamicsError::InvalidConfig("particle count must be at least 1".into()));
        }
        if !(self.epsilon() > 0.0) {
            return Err(DynamicsError::InvalidConfig("penalty epsilon must be positive".into()));
        }
        let t_end = self.h * self.steps as f64;
        for (name, sched) in [("beta", &self.beta), ("sigma", &self.sigma)] {
            if !sched.nonnegative_on(t_end) {
                return Err(DynamicsError::InvalidConfig(format!(
                    "{name} schedule becomes negative on [0, {t_end}]"
                )));
            }
        }
        if let Some(lam) = &self.repelling {
            if !lam.nonnegative_on(t_end) {
                return Err(DynamicsError::InvalidConfig(
                    "repelling schedule becomes negative".into(),
                ));
            }
        }
        Ok(())
    }

    /// Key/value snapshot embedded in report headers.
    pub fn snapshot(&self) -> Vec<(String, String)> {
        vec![
            ("scheme".into(), self.scheme.name().into()),
            ("alpha".into(), crate::report::fmt_f64(self.alpha)),
            ("beta".into(), self.beta.to_string()),
            ("sigma".into(), self.sigma.to_string()),
            (
                "lambda".into(),
                self.repelling.map_or("off".into(), |s| s.to_string()),
            ),
            ("h".into(), crate::report::fmt_f64(self.h)),
            ("steps".into(), self.steps.to_string()),
            ("particles".into(), self.particles.to_string()),
            ("seed".into(), self.seed.to_string()),
            ("penalty_epsilon".into(), crate::report::fmt_f64(self.epsilon())),
            ("init".into(), self.init.name().into()),
        ]
    }
}

/// Objective-weighted consensus point
/// `X̄ = Σᵢ xᵢ wᵢ / Σᵢ wᵢ`, `wᵢ = e^{−α(f(xᵢ) − minⱼ f(xⱼ))}`.
///
/// The min-shift makes the weights immune to adding a constant to `f` and
/// keeps at least one weight equal to 1, so the denominator never vanishes
/// for any finite `α` (values up to 10¹⁴ are exercised by the inverse
/// problem). Shifted exponents below −700 flush to an exact zero weight.
pub fn consensus(positions: &[f64], dim: usize, f_values: &[f64], alpha: f64) -> Vec<f64> {
    let n = f_values.len();
    debug_assert_eq!(positions.len(), n * dim);
    debug_assert!(n >= 1);
    let f_min = f_values.iter().copied().fold(f64::INFINITY, f64::min);
    let mut out = vec![0.0; dim];
    let mut weight_sum = 0.0;
    for (i, &f) in f_values.iter().enumerate() {
        let exponent = -alpha * (f - f_min);
        if exponent < -700.0 {
            continue;
        }
        let w = exponent.exp();
        weight_sum += w;
        let row = &positions[i * dim..(i + 1) * dim];
        for (o, x) in out.iter_mut().zip(row) {
            *o += w * x;
        }
    }
    for o in &mut out {
        *o /= weight_sum;
    }
    out
}

/// Gaussian-kernel repelling force on particle `i`:
/// `(λ_t / N) Σⱼ (xᵢ − xⱼ) e^{−|xᵢ − xⱼ|²/2}`.
pub fn repelling_force(positions: &[f64], dim: usize, i: usize, lambda_t: f64) -> Vec<f64> {
    let n = positions.len() / dim;
    debug_assert!(i < n);
    let xi = &positions[i * dim..(i + 1) * dim];
    let mut out = vec![0.0; dim];
    if lambda_t == 0.0 {
        return out;
    }
    for j in 0..n {
        let xj = &positions[j * dim..(j + 1) * dim];
        let mut sq = 0.0;
        for (a, b) in xi.iter().zip(xj) {
            sq += (a - b) * (a - b);
        }
        let k = (-0.5 * sq).exp();
        for ((o, a), b) in out.iter_mut().zip(xi).zip(xj) {
            *o += (a - b) * k;
        }
    }
    let scale = lambda_t / n as f64;
    for o in &mut out {
        *o *= scale;
    }
    out
}

/// In-place projection of one row; closed-form for ball/box, level-set
/// solve otherwise. Must agree with [`FeasibleDomain::project`].
fn project_row(dom: &FeasibleDomain, row: &mut [f64]) -> Result<(), DynamicsError> {
    match dom {
        FeasibleDomain::Ball { center, radius } => {
            let d = crate::vecmath::dist(row, center);
            if d > *radius {
                let scale = radius / d;
                for (a, c) in row.iter_mut().zip(center) {
                    *a = c + (*a - c) * scale;
                }
                crate::domain::shrink_into_ball(row, center, *radius);
            }
        }
        FeasibleDomain::Box { lower, upper } => {
            for (k, a) in row.iter_mut().enumerate() {
                if *a < lower[k] {
                    *a = lower[k];
                } else if *a > upper[k] {
                    *a = upper[k];
                }
            }
        }
        FeasibleDomain::LevelSet(_) => {
            let p = dom.project(row)?;
            row.copy_from_slice(&p);
        }
    }
    Ok(())
}

/// One Euler step of the selected scheme. `f_values` are the objective
/// values at the pre-step positions (used for the consensus).
fn cbo_step(
    ens: &Ensemble,
    cfg: &SolverConfig,
    f_values: &[f64],
    dom: &FeasibleDomain,
    noise: &NoiseSource,
) -> Result<Ensemble, DynamicsError> {
    let n = ens.n();
    let dim = ens.dim();
    let t = ens.time;
    let h = cfg.h;
    let beta = cfg.beta.value(t);
    let sigma = cfg.sigma.value(t);
    let lambda = cfg.repelling.map_or(0.0, |s| s.value(t));
    let sqrt_h = h.sqrt();
    let cons = consensus(ens.positions(), dim, f_values, cfg.alpha);

    let mut new_positions = vec![0.0; n * dim];
    for i in 0..n {
        let xi = ens.row(i);
        let out = &mut new_positions[i * dim..(i + 1) * dim];
        let repel = if lambda > 0.0 {
            Some(repelling_force(ens.positions(), dim, i, lambda))
        } else {
            None
        };
        let mut rng = noise.noise_stream(i, ens.step);
        for k in 0..dim {
            let diff = xi[k] - cons[k];
            let mut drift = -beta * diff;
            if let Some(r) = &repel {
                drift += r[k];
            }
            let dw = sqrt_h * rng.sample::<f64, _>(StandardNormal);
            out[k] = xi[k] + drift * h + sigma * diff * dw;
        }
        match cfg.scheme {
            Scheme::Penalty => {
                // −(h/ε) π(Y_k), evaluated at the pre-step position. With the
                // optimal ε = h the correction is routed as
                // `increment + Π(Y_k)`, which is the same real value and makes
                // the zero-coefficient step equal a projection step exactly.
                let proj = dom.project(xi)?;
                let scale = h / cfg.epsilon();
                if scale == 1.0 {
                    for ((o, x), p) in out.iter_mut().zip(xi).zip(&proj) {
                        *o = (*o - x) + p;
                    }
                } else {
                    for ((o, x), p) in out.iter_mut().zip(xi).zip(&proj) {
                        *o -= scale * (x - p);
                    }
                }
            }
            Scheme::Projection => {
                project_row(dom, out)?;
            }
        }
        if !crate::vecmath::all_finite(out) {
            return Err(DynamicsError::NonFinite { step: ens.step + 1 });
        }
    }
    Ok(Ensemble {
        positions: new_positions,
        n,
        dim,
        time: t + h,
        step: ens.step + 1,
    })
}

/// One penalty-scheme step.
pub fn cbo_step_penalty(
    ens: &Ensemble,
    cfg: &SolverConfig,
    obj: &Objective,
    dom: &FeasibleDomain,
    noise: &NoiseSource,
) -> Result<Ensemble, DynamicsError> {
    debug_assert_eq!(cfg.scheme, Scheme::Penalty);
    let f_values: Vec<f64> = (0..ens.n()).map(|i| obj.eval(ens.row(i))).collect();
    cbo_step(ens, cfg, &f_values, dom, noise)
}

/// One projection-scheme step; every returned particle is feasible.
pub fn cbo_step_projection(
    ens: &Ensemble,
    cfg: &SolverConfig,
    obj: &Objective,
    dom: &FeasibleDomain,
    noise: &NoiseSource,
) -> Result<Ensemble, DynamicsError> {
    debug_assert_eq!(cfg.scheme, Scheme::Projection);
    let f_values: Vec<f64> = (0..ens.n()).map(|i| obj.eval(ens.row(i))).collect();
    cbo_step(ens, cfg, &f_values, dom, noise)
}

/// Result of a full CBO run.
#[derive(Clone, Debug)]
pub struct CboRun {
    pub ensemble: Ensemble,
    /// Consensus of the final ensemble, computed with the run's α.
    pub consensus: Vec<f64>,
    /// Consensus after initialization and after every step, when requested.
    pub trace: Option<Vec<Vec<f64>>>,
}

/// Runs `cfg.steps` steps of the configured scheme from a uniform initial
/// ensemble. Identical configurations produce bitwise-identical results.
pub fn run_cbo(
    cfg: &SolverConfig,
    obj: &Objective,
    dom: &FeasibleDomain,
) -> Result<CboRun, DynamicsError> {
    run_cbo_with_trace(cfg, obj, dom, false)
}

pub fn run_cbo_with_trace(
    cfg: &SolverConfig,
    obj: &Objective,
    dom: &FeasibleDomain,
    record_trace: bool,
) -> Result<CboRun, DynamicsError> {
    cfg.validate()?;
    if obj.dimension() != dom.dimension() {
        return Err(DynamicsError::InvalidConfig(format!(
            "objective dimension {} does not match domain dimension {}",
            obj.dimension(),
            dom.dimension()
        )));
    }
    let noise = NoiseSource::new(cfg.seed);
    let mut init_rng = noise.init_stream();
    let rows = match cfg.init {
        InitKind::FeasibleUniform => dom.sample_uniform(&mut init_rng, cfg.particles)?,
        InitKind::EnclosingBallUniform => {
            let (center, radius) = dom.enclosing_ball();
            FeasibleDomain::ball(center, radius)?.sample_uniform(&mut init_rng, cfg.particles)?
        }
    };
    let mut ens = Ensemble::from_rows(&rows)?;

    let mut f_values: Vec<f64> = (0..ens.n()).map(|i| obj.eval(ens.row(i))).collect();
    let mut trace = record_trace.then(Vec::new);
    if let Some(tr) = &mut trace {
        tr.push(consensus(ens.positions(), ens.dim(), &f_values, cfg.alpha));
    }
    for _ in 0..cfg.steps {
        ens = cbo_step(&ens, cfg, &f_values, dom, &noise)?;
        for (i, f) in f_values.iter_mut().enumerate() {
            *f = obj.eval(ens.row(i));
        }
        if let Some(tr) = &mut trace {
            tr.push(consensus(ens.positions(), ens.dim(), &f_values, cfg.alpha));
        }
    }
    let final_consensus = consensus(ens.positions(), ens.dim(), &f_values, cfg.alpha);
    Ok(CboRun { ensemble: ens, consensus: final_consensus, trace })
}

type VectorField = Arc<dyn Fn(&[f64]) -> Vec<f64> + Send + Sync>;

/// Interaction drift of the mean-field Langevin dynamics,
/// `−(1/N) Σⱼ ∇V(xᵢ − xⱼ)`.
#[derive(Clone)]
pub enum Interaction {
    /// No interaction potential.
    None,
    /// `∇V(z) = strength · z`; aggregated in O(N) through the ensemble mean.
    Quadratic { strength: f64 },
    /// Arbitrary kernel gradient applied to pairwise differences, O(N²).
    Pairwise(VectorField),
}

/// Configuration of the reflected mean-field Langevin integrator
/// `dX = −∇U(X) dt − (∇V * μ)(X) dt + σ dW + reflection`.
#[derive(Clone)]
pub struct LangevinConfig {
    pub grad_potential: VectorField,
    pub interaction: Interaction,
    /// Additive noise strength σ > 0.
    pub sigma_noise: f64,
    pub h: f64,
    pub steps: u64,
    pub particles: usize,
    pub seed: u64,
}

impl LangevinConfig {
    pub fn validate(&self) -> Result<(), DynamicsError> {
        if !(self.sigma_noise > 0.0) {
            return Err(DynamicsError::InvalidConfig("sigma_noise must be positive".into()));
        }
        if !(self.h > 0.0) || self.particles == 0 {
            return Err(DynamicsError::InvalidConfig("h must be positive and particles >= 1".into()));
        }
        Ok(())
    }
}

/// One projected Euler step of the particle Langevin system.
pub fn langevin_step_projection(
    ens: &Ensemble,
    cfg: &LangevinConfig,
    dom: &FeasibleDomain,
    noise: &NoiseSource,
) -> Result<Ensemble, DynamicsError> {
    let n = ens.n();
    let dim = ens.dim();
    let h = cfg.h;
    let noise_scale = cfg.sigma_noise * h.sqrt();
    let mean = match cfg.interaction {
        Interaction::Quadratic { .. } => Some(ens.mean()),
        _ => None,
    };
    let mut new_positions = vec![0.0; n * dim];
    for i in 0..n {
        let xi = ens.row(i);
        let out = &mut new_positions[i * dim..(i + 1) * dim];
        let grad_u = (cfg.grad_potential)(xi);
        let interaction: Vec<f64> = match &cfg.interaction {
            Interaction::None => vec![0.0; dim],
            Interaction::Quadratic { strength } => {
                let m = mean.as_ref().expect("mean precomputed");
                xi.iter().zip(m).map(|(a, b)| strength * (a - b)).collect()
            }
            Interaction::Pairwise(grad_v) => {
                let mut acc = vec![0.0; dim];
                let mut diff = vec![0.0; dim];
                for j in 0..n {
                    let xj = ens.row(j);
                    for (d, (a, b)) in diff.iter_mut().zip(xi.iter().zip(xj)) {
                        *d = a - b;
                    }
                    for (acc_k, g) in acc.iter_mut().zip(grad_v(&diff)) {
                        *acc_k += g;
                    }
                }
                for a in &mut acc {
                    *a /= n as f64;
                }
                acc
            }
        };
        let mut rng = noise.noise_stream(i, ens.step);
        for k in 0..dim {
            let xi_k = xi[k];
            let drift = -grad_u[k] - interaction[k];
            let z: f64 = rng.sample(StandardNormal);
            out[k] = xi_k + drift * h + noise_scale * z;
        }
        project_row(dom, out)?;
        if !crate::vecmath::all_finite(out) {
            return Err(DynamicsError::NonFinite { step: ens.step + 1 });
        }
    }
    Ok(Ensemble {
        positions: new_positions,
        n,
        dim,
        time: ens.time + h,
        step: ens.step + 1,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::FeasibleDomain;

    fn ball2(r: f64) -> FeasibleDomain {
        FeasibleDomain::ball(vec![0.0, 0.0], r).unwrap()
    }

    #[test]
    fn consensus_of_identical_rows_is_the_row() {
        let pos = [1.5, -0.25, 1.5, -0.25, 1.5, -0.25];
        let f = [3.0, 9.0, 1.0];
        let c = consensus(&pos, 2, &f, 123.0);
        assert_eq!(c, vec![1.5, -0.25]);
    }

    #[test]
    fn consensus_alpha_zero_is_arithmetic_mean() {
        let pos = [0.0, 0.0, 1.0, 2.0, 5.0, -2.0];
        let f = [0.3, 0.1, 0.9];
        let c = consensus(&pos, 2, &f, 0.0);
        assert!((c[0] - 2.0).abs() < 1e-15);
        assert!((c[1] - 0.0).abs() < 1e-15);
    }

    #[test]
    fn consensus_two_particle_hand_weights() {
        // f = (0, ln 2 / α) gives weights (1, ½): consensus = (2/3)x¹ + (1/3)x²
        for alpha in [0.5, 1.0, 100.0] {
            let pos = [0.0, 6.0];
            let f = [0.0, (2.0f64).ln() / alpha];
            let c = consensus(&pos, 1, &f, alpha);
            assert!((c[0] - 2.0).abs() <= 1e-12, "alpha {alpha}: {c:?}");
        }
    }

    #[test]
    fn consensus_shift_invariance_bitwise() {
        let pos = [0.25, 1.0, -3.5, 2.0, 0.125, -1.0, 7.0, 0.5];
        let f = [1.5, 0.25, 3.0, 0.75];
        for alpha in [1.0, 1e4, 1e14] {
            let base = consensus(&pos, 2, &f, alpha);
            for c in [1.0, -5.0, 1024.0] {
                let shifted: Vec<f64> = f.iter().map(|v| v + c).collect();
                assert_eq!(base, consensus(&pos, 2, &shifted, alpha), "c={c}");
            }
        }
    }

    #[test]
    fn consensus_large_alpha_selects_argmin() {
        let pos = [1.0, 1.0, -2.0, 0.5, 3.0, 4.0];
        let f = [0.3, 0.1, 0.2];
        let c = consensus(&pos, 2, &f, 1e16);
        assert!((c[0] + 2.0).abs() <= 1e-9);
        assert!((c[1] - 0.5).abs() <= 1e-9);
    }

    #[test]
    fn consensus_stays_in_coordinate_hull() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(99);
        for _ in 0..500 {
            let n = 1 + rng.random_range(0..6);
            let pos: Vec<f64> = (0..n * 3).map(|_| (rng.random::<f64>() - 0.5) * 8.0).collect();
            let f: Vec<f64> = (0..n).map(|_| rng.random::<f64>() * 5.0).collect();
            let alpha = 10f64.powf(rng.random::<f64>() * 10.0);
            let c = consensus(&pos, 3, &f, alpha);
            for k in 0..3 {
                let lo = (0..n).map(|i| pos[i * 3 + k]).fold(f64::INFINITY, f64::min);
                let hi = (0..n).map(|i| pos[i * 3 + k]).fold(f64::NEG_INFINITY, f64::max);
                assert!(c[k] >= lo - 1e-12 && c[k] <= hi + 1e-12);
            }
        }
    }

    #[test]
    fn repelling_force_examples() {
        // coincident particles: zero force
        let pos = [1.0, 2.0, 1.0, 2.0];
        assert_eq!(repelling_force(&pos, 2, 0, 1.0), vec![0.0, 0.0]);
        // N=2 with x¹−x² = (1, 0): force on particle 1 is (e^{−1/2}/2, 0)
        let pos = [1.0, 0.0, 0.0, 0.0];
        let f = repelling_force(&pos, 2, 0, 1.0);
        assert!((f[0] - 0.5 * (-0.5f64).exp()).abs() <= 1e-15);
        assert_eq!(f[1], 0.0);
        // zero schedule value
        assert_eq!(repelling_force(&pos, 2, 0, 0.0), vec![0.0, 0.0]);
    }

    #[test]
    fn repelling_force_magnitude_bound() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(4);
        for _ in 0..200 {
            let n = 1 + rng.random_range(0..8);
            let pos: Vec<f64> = (0..n * 2).map(|_| (rng.random::<f64>() - 0.5) * 10.0).collect();
            let lam = rng.random::<f64>() * 3.0;
            let f = repelling_force(&pos, 2, 0, lam);
            let bound = lam * (-0.5f64).exp() + 1e-12;
            assert!(crate::vecmath::norm(&f) <= bound);
        }
    }

    fn flat_objective() -> Objective {
        Objective::new("flat", 2, |_| 1.0, None)
    }

    #[test]
    fn penalty_step_with_null_coefficients_equals_projection() {
        // β = σ = 0, ε = h: one penalty step must equal one projection step
        // exactly, particle by particle, bit for bit.
        let dom = ball2(1.0);
        let rows = vec![
            vec![0.2, 0.1],
            vec![3.0, 0.0],
            vec![-2.0, 2.0],
            vec![0.0, -5.0],
        ];
        let ens = Ensemble::from_rows(&rows).unwrap();
        let noise = NoiseSource::new(7);
        let obj = flat_objective();
        let mut cfg = SolverConfig::projection(1.0, 0.0, 0.0, 0.05, 1, rows.len(), 7);
        cfg.scheme = Scheme::Penalty;
        let pen = cbo_step_penalty(&ens, &cfg, &obj, &dom, &noise).unwrap();
        cfg.scheme = Scheme::Projection;
        let proj = cbo_step_projection(&ens, &cfg, &obj, &dom, &noise).unwrap();
        assert_eq!(pen.positions(), proj.positions());
        // and both equal the plain projection of the inputs
        for (i, row) in rows.iter().enumerate() {
            assert_eq!(pen.row(i), dom.project(row).unwrap().as_slice());
        }
    }

    #[test]
    fn interior_consensus_fixed_point_is_stationary() {
        // all particles at the same interior point: drift and diffusion vanish
        let dom = ball2(3.0);
        let rows = vec![vec![0.5, -0.25]; 4];
        let ens = Ensemble::from_rows(&rows).unwrap();
        let noise = NoiseSource::new(1);
        let obj = Objective::ackley();
        let cfg = SolverConfig::projection(1e4, 1.0, 4.0, 0.1, 1, 4, 1);
        let next = cbo_step_projection(&ens, &cfg, &obj, &dom, &noise).unwrap();
        assert_eq!(next.positions(), ens.positions());
    }

    #[test]
    fn single_particle_stays_put() {
        let dom = ball2(3.0);
        let ens = Ensemble::from_rows(&[vec![1.0, 1.0]]).unwrap();
        let noise = NoiseSource::new(3);
        let obj = Objective::ackley();
        let cfg = SolverConfig::projection(1e4, 1.0, 4.0, 0.1, 1, 1, 3);
        let next = cbo_step_projection(&ens, &cfg, &obj, &dom, &noise).unwrap();
        assert_eq!(next.positions(), ens.positions());
    }

    #[test]
    fn schemes_agree_inside_with_zero_noise() {
        let dom = ball2(3.0);
        let obj = Objective::ackley();
        let rows = vec![vec![0.1, 0.2], vec![-0.5, 1.0], vec![1.5, -0.75]];
        let ens = Ensemble::from_rows(&rows).unwrap();
        let noise = NoiseSource::new(11);
        let mut cfg = SolverConfig::projection(2.0, 1.0, 0.0, 1e-3, 1, 3, 11);
        let proj = cbo_step_projection(&ens, &cfg, &obj, &dom, &noise).unwrap();
        cfg.scheme = Scheme::Penalty;
        let pen = cbo_step_penalty(&ens, &cfg, &obj, &dom, &noise).unwrap();
        assert_eq!(proj.positions(), pen.positions());
    }

    #[test]
    fn projection_predictor_lands_on_boundary() {
        // a particle whose predictor goes to (6, 0) in Ball(0,3) is stored at (3, 0)
        let dom = ball2(3.0);
        let mut row = [6.0, 0.0];
        project_row(&dom, &mut row).unwrap();
        assert_eq!(row, [3.0, 0.0]);
    }

    #[test]
    fn project_row_matches_public_projection() {
        use rand::{Rng, SeedableRng};
        let doms = [
            ball2(2.0),
            FeasibleDomain::axis_box(vec![-1.0, 0.0], vec![1.0, 2.0]).unwrap(),
            FeasibleDomain::heart(),
        ];
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(17);
        for dom in &doms {
            for _ in 0..2000 {
                let x = [
                    (rng.random::<f64>() - 0.5) * 10.0,
                    (rng.random::<f64>() - 0.5) * 10.0,
                ];
                let mut row = x;
                project_row(dom, &mut row).unwrap();
                assert_eq!(row.to_vec(), dom.project(&x).unwrap());
            }
        }
    }

    #[test]
    fn run_cbo_zero_steps_returns_initial_consensus() {
        let dom = ball2(3.0);
        let obj = Objective::ackley();
        let cfg = SolverConfig::projection(1e4, 1.0, 4.0, 0.1, 0, 50, 42);
        let run = run_cbo(&cfg, &obj, &dom).unwrap();
        assert_eq!(run.ensemble.step, 0);
        let f: Vec<f64> = (0..50).map(|i| obj.eval(run.ensemble.row(i))).collect();
        let expected = consensus(run.ensemble.positions(), 2, &f, cfg.alpha);
        assert_eq!(run.consensus, expected);
    }

    #[test]
    fn run_cbo_is_deterministic() {
        let dom = ball2(3.0);
        let obj = Objective::ackley();
        let cfg = SolverConfig::projection(1e4, 1.0, 4.0, 0.1, 10, 30, 1234);
        let a = run_cbo(&cfg, &obj, &dom).unwrap();
        let b = run_cbo(&cfg, &obj, &dom).unwrap();
        assert_eq!(a.ensemble.positions(), b.ensemble.positions());
        assert_eq!(a.consensus, b.consensus);
    }

    #[test]
    fn projection_scheme_keeps_all_particles_feasible() {
        let dom = FeasibleDomain::heart();
        let obj = Objective::townsend();
        let cfg = SolverConfig::projection(1e4, 1.0, 4.0, 0.05, 20, 40, 5);
        let run = run_cbo(&cfg, &obj, &dom).unwrap();
        for i in 0..40 {
            assert!(dom.contains(run.ensemble.row(i)).unwrap());
        }
    }

    #[test]
    fn trace_records_every_step() {
        let dom = ball2(3.0);
        let obj = Objective::ackley();
        let cfg = SolverConfig::projection(1e4, 1.0, 4.0, 0.1, 7, 10, 9);
        let run = run_cbo_with_trace(&cfg, &obj, &dom, true).unwrap();
        let trace = run.trace.unwrap();
        assert_eq!(trace.len(), 8);
        assert_eq!(trace.last().unwrap(), &run.consensus);
    }

    #[test]
    fn dimension_mismatch_rejected() {
        let dom = ball2(3.0);
        let obj = Objective::rastrigin(5);
        let cfg = SolverConfig::projection(1e4, 1.0, 4.0, 0.1, 5, 10, 0);
        assert!(matches!(
            run_cbo(&cfg, &obj, &dom),
            Err(DynamicsError::InvalidConfig(_))
        ));
    }

    #[test]
    fn langevin_null_dynamics_is_stationary_modulo_projection() {
        let dom = FeasibleDomain::axis_box(vec![-1.0], vec![1.0]).unwrap();
        let rows = vec![vec![0.3], vec![-0.8]];
        let ens = Ensemble::from_rows(&rows).unwrap();
        // σ must be positive; emulate null noise with a tiny h and σ by
        // checking the drift-free property algebraically instead: with
        // ∇U = 0 and no interaction the increment is exactly the noise term.
        let cfg = LangevinConfig {
            grad_potential: Arc::new(|x: &[f64]| vec![0.0; x.len()]),
            interaction: Interaction::None,
            sigma_noise: 1.0,
            h: 0.01,
            steps: 1,
            particles: 2,
            seed: 3,
        };
        let noise = NoiseSource::new(3);
        let next = langevin_step_projection(&ens, &cfg, &dom, &noise).unwrap();
        for i in 0..2 {
            let mut rng = noise.noise_stream(i, 0);
            let z: f64 = rng.sample(StandardNormal);
            let expected = (ens.row(i)[0] + 0.1 * z).clamp(-1.0, 1.0);
            assert_eq!(next.row(i)[0], expected);
        }
    }

    #[test]
    fn langevin_quadratic_interaction_matches_pairwise() {
        use rand::{Rng, SeedableRng};
        let dom = FeasibleDomain::axis_box(vec![-4.0, -4.0], vec![4.0, 4.0]).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(8);
        let rows: Vec<Vec<f64>> = (0..6)
            .map(|_| (0..2).map(|_| (rng.random::<f64>() - 0.5) * 4.0).collect())
            .collect();
        let ens = Ensemble::from_rows(&rows).unwrap();
        let noise = NoiseSource::new(5);
        let mk = |interaction| LangevinConfig {
            grad_potential: Arc::new(|x: &[f64]| x.iter().map(|v| 0.3 * v).collect()),
            interaction,
            sigma_noise: 0.5,
            h: 0.01,
            steps: 1,
            particles: 6,
            seed: 5,
        };
        let fast = langevin_step_projection(&ens, &mk(Interaction::Quadratic { strength: 0.7 }), &dom, &noise).unwrap();
        let slow = langevin_step_projection(
            &ens,
            &mk(Interaction::Pairwise(Arc::new(|z: &[f64]| {
                z.iter().map(|v| 0.7 * v).collect()
            }))),
            &dom,
            &noise,
        )
        .unwrap();
        for (a, b) in fast.positions().iter().zip(slow.positions()) {
            assert!((a - b).abs() <= 1e-12);
        }
    }

    #[test]
    fn langevin_two_particle_interaction_drift() {
        // N=2 with ∇V(z) = z: interaction drift on particle 1 is −(x¹−x²)/2
        let dom = FeasibleDomain::axis_box(vec![-10.0, -10.0], vec![10.0, 10.0]).unwrap();
        let rows = vec![vec![1.0, 2.0], vec![-1.0, 0.5]];
        let ens = Ensemble::from_rows(&rows).unwrap();
        let cfg = LangevinConfig {
            grad_potential: Arc::new(|x: &[f64]| vec![0.0; x.len()]),
            interaction: Interaction::Pairwise(Arc::new(|z: &[f64]| z.to_vec())),
            sigma_noise: 1e-9,
            h: 1.0,
            steps: 1,
            particles: 2,
            seed: 2,
        };
        let noise = NoiseSource::new(2);
        let next = langevin_step_projection(&ens, &cfg, &dom, &noise).unwrap();
        let expected_drift = [-(1.0 - (-1.0)) / 2.0, -(2.0 - 0.5) / 2.0];
        for k in 0..2 {
            let moved = next.row(0)[k] - ens.row(0)[k];
            assert!((moved - expected_drift[k]).abs() <= 1e-6, "k={k}: {moved}");
        }
    }

    #[test]
    fn nonfinite_positions_are_caught() {
        let dom = ball2(1.0);
        let obj = Objective::new("explode", 2, |_| f64::NAN, None);
        // NaN objective values poison the consensus and then the positions
        let cfg = SolverConfig::projection(1.0, 1.0, 0.0, 0.1, 1, 3, 0);
        let err = run_cbo(&cfg, &obj, &dom);
        assert!(matches!(err, Err(DynamicsError::NonFinite { .. })));
    }
}
