//! Feasible-region geometry.
//!
//! A [`FeasibleDomain`] is the closed set the particle systems are confined
//! to. It supports membership tests, Euclidean projection `Π`, the penalty
//! vector `π(x) = x − Π(x)`, unit inward normals on the boundary, and uniform
//! sampling for ensemble initialization.
//!
//! Balls and axis-aligned boxes use closed-form projections. General level
//! sets `{x : g(x) ≤ 0}` are projected by moving along the inward-normal ray
//! at `x` and solving `g = 0` on that ray with Newton's method (bisection
//! fallback). For the heart-shaped region the boundary is the polar curve
//! `x² + y² = R(t)² + 4 sin²t`, `t = atan2(x, y)`, with
//! `R(t) = 2 cos t − ½ cos 2t − ¼ cos 3t − ⅛ cos 4t`.

use std::fmt;
use std::sync::Arc;

use rand::Rng;
use rand_distr::StandardNormal;
use thiserror::Error;

use crate::vecmath::{dot, norm, norm_sq};

#[derive(Debug, Error)]
pub enum DomainError {
    #[error("dimension mismatch: domain has dimension {expected}, point has {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("invalid geometry: {0}")]
    InvalidGeometry(String),
    #[error("level-set projection did not converge within {newton_iters} Newton and {bisection_iters} bisection iterations")]
    NonConvergence {
        newton_iters: usize,
        bisection_iters: usize,
    },
    #[error("rejection sampling acceptance rate fell below 1e-4 ({accepted} accepted in {attempts} attempts)")]
    RejectionBudgetExceeded { attempts: u64, accepted: u64 },
    #[error("level-set gradient is degenerate (|∇g| < 1e-12) at the query point")]
    DegenerateGradient,
    #[error("point is not on the domain boundary; no inward normal defined")]
    NotOnBoundary,
}

/// Tolerances and iteration budgets for level-set boundary solves.
#[derive(Clone, Copy, Debug)]
pub struct ProjectionSettings {
    /// Absolute tolerance on the level value `|g|` at a projected point.
    pub tol_proj: f64,
    /// Newton iteration budget before falling back to bisection.
    pub max_newton_iters: usize,
    /// Whether bisection may be used when Newton stalls.
    pub bisection_fallback: bool,
}

impl Default for ProjectionSettings {
    fn default() -> Self {
        Self {
            tol_proj: 1e-10,
            max_newton_iters: 50,
            bisection_fallback: true,
        }
    }
}

impl ProjectionSettings {
    fn validate(&self) -> Result<(), DomainError> {
        if !(self.tol_proj > 0.0) {
            return Err(DomainError::InvalidGeometry(
                "tol_proj must be positive".into(),
            ));
        }
        if self.max_newton_iters == 0 {
            return Err(DomainError::InvalidGeometry(
                "max_newton_iters must be at least 1".into(),
            ));
        }
        Ok(())
    }
}

type ScalarField = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;
type GradientField = Arc<dyn Fn(&[f64]) -> Vec<f64> + Send + Sync>;

/// Sublevel-set region `{x : g(x) ≤ 0}` with an analytic gradient and a
/// bounding box used for rejection sampling.
#[derive(Clone)]
pub struct LevelSet {
    name: String,
    dim: usize,
    g: ScalarField,
    grad_g: GradientField,
    lower: Vec<f64>,
    upper: Vec<f64>,
    settings: ProjectionSettings,
    /// Tight enclosing ball, when known analytically.
    enclosing: Option<(Vec<f64>, f64)>,
}

impl fmt::Debug for LevelSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("LevelSet")
            .field("name", &self.name)
            .field("dim", &self.dim)
            .field("lower", &self.lower)
            .field("upper", &self.upper)
            .finish()
    }
}

/// Closed feasible set `Ḡ`. Immutable after construction; all operations are
/// pure, so values can be shared freely across threads.
#[derive(Clone, Debug)]
pub enum FeasibleDomain {
    Ball { center: Vec<f64>, radius: f64 },
    Box { lower: Vec<f64>, upper: Vec<f64> },
    LevelSet(LevelSet),
}

impl FeasibleDomain {
    pub fn ball(center: Vec<f64>, radius: f64) -> Result<Self, DomainError> {
        if center.is_empty() {
            return Err(DomainError::InvalidGeometry(
                "ball center must have dimension >= 1".into(),
            ));
        }
        if !(radius > 0.0) || !radius.is_finite() {
            return Err(DomainError::InvalidGeometry(format!(
                "ball radius must be positive and finite, got {radius}"
            )));
        }
        Ok(Self::Ball { center, radius })
    }

    pub fn axis_box(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self, DomainError> {
        if lower.is_empty() || lower.len() != upper.len() {
            return Err(DomainError::InvalidGeometry(
                "box bounds must be non-empty and of equal dimension".into(),
            ));
        }
        if lower.iter().zip(&upper).any(|(l, u)| !(l < u)) {
            return Err(DomainError::InvalidGeometry(
                "box requires lower < upper componentwise".into(),
            ));
        }
        Ok(Self::Box { lower, upper })
    }

    /// General sublevel set `{x : g(x) ≤ 0}`. `bounds` is a bounding box of
    /// the region used for rejection sampling.
    pub fn level_set(
        name: impl Into<String>,
        dim: usize,
        g: impl Fn(&[f64]) -> f64 + Send + Sync + 'static,
        grad_g: impl Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static,
        bounds: (Vec<f64>, Vec<f64>),
        settings: ProjectionSettings,
    ) -> Result<Self, DomainError> {
        settings.validate()?;
        let (lower, upper) = bounds;
        if dim == 0 || lower.len() != dim || upper.len() != dim {
            return Err(DomainError::InvalidGeometry(
                "level-set bounding box must match the stated dimension".into(),
            ));
        }
        Ok(Self::LevelSet(LevelSet {
            name: name.into(),
            dim,
            g: Arc::new(g),
            grad_g: Arc::new(grad_g),
            lower,
            upper,
            settings,
            enclosing: None,
        }))
    }

    /// The heart-shaped planar region bounded by the polar curve
    /// `ρ² = R(t)² + 4 sin²t` with `t = atan2(x, y)`.
    pub fn heart() -> Self {
        let mut dom = Self::level_set(
            "heart",
            2,
            |p| heart_g(p[0], p[1]),
            |p| heart_grad(p[0], p[1]).to_vec(),
            (vec![-3.0, -3.0], vec![3.0, 3.0]),
            ProjectionSettings::default(),
        )
        .expect("heart region construction is infallible");
        if let Self::LevelSet(ls) = &mut dom {
            // polar radius peaks at the bottom tip: |R(π)| = 2 + ½ − ¼ + ⅛
            ls.enclosing = Some((vec![0.0, 0.0], 2.375));
        }
        dom
    }

    pub fn dimension(&self) -> usize {
        match self {
            Self::Ball { center, .. } => center.len(),
            Self::Box { lower, .. } => lower.len(),
            Self::LevelSet(ls) => ls.dim,
        }
    }

    pub fn name(&self) -> &str {
        match self {
            Self::Ball { .. } => "ball",
            Self::Box { .. } => "box",
            Self::LevelSet(ls) => &ls.name,
        }
    }

    /// A ball containing the domain: the domain itself for balls, the
    /// circumscribed ball for boxes, and the tight polar bound (falling back
    /// to the bounding-box circumball) for level sets.
    pub fn enclosing_ball(&self) -> (Vec<f64>, f64) {
        match self {
            Self::Ball { center, radius } => (center.clone(), *radius),
            Self::Box { lower, upper } => {
                let center: Vec<f64> =
                    lower.iter().zip(upper).map(|(l, u)| 0.5 * (l + u)).collect();
                let radius = lower
                    .iter()
                    .zip(upper)
                    .map(|(l, u)| 0.25 * (u - l) * (u - l))
                    .sum::<f64>()
                    .sqrt();
                (center, radius)
            }
            Self::LevelSet(ls) => ls.enclosing.clone().unwrap_or_else(|| {
                let center: Vec<f64> = ls
                    .lower
                    .iter()
                    .zip(&ls.upper)
                    .map(|(l, u)| 0.5 * (l + u))
                    .collect();
                let radius = ls
                    .lower
                    .iter()
                    .zip(&ls.upper)
                    .map(|(l, u)| 0.25 * (u - l) * (u - l))
                    .sum::<f64>()
                    .sqrt();
                (center, radius)
            }),
        }
    }

    /// Bounding box of the domain (exact for ball/box, as constructed for
    /// level sets).
    pub fn bounding_box(&self) -> (Vec<f64>, Vec<f64>) {
        match self {
            Self::Ball { center, radius } => (
                center.iter().map(|c| c - radius).collect(),
                center.iter().map(|c| c + radius).collect(),
            ),
            Self::Box { lower, upper } => (lower.clone(), upper.clone()),
            Self::LevelSet(ls) => (ls.lower.clone(), ls.upper.clone()),
        }
    }

    fn check_dim(&self, x: &[f64]) -> Result<(), DomainError> {
        if x.len() != self.dimension() {
            return Err(DomainError::DimensionMismatch {
                expected: self.dimension(),
                got: x.len(),
            });
        }
        Ok(())
    }

    /// Membership in the closed set `Ḡ` (boundary points count as inside;
    /// level sets use the `tol_proj` slack on the level value).
    pub fn contains(&self, x: &[f64]) -> Result<bool, DomainError> {
        self.check_dim(x)?;
        Ok(match self {
            Self::Ball { center, radius } => {
                let d: f64 = x
                    .iter()
                    .zip(center)
                    .map(|(a, c)| (a - c) * (a - c))
                    .sum();
                d.sqrt() <= *radius
            }
            Self::Box { lower, upper } => x
                .iter()
                .zip(lower.iter().zip(upper))
                .all(|(a, (l, u))| *l <= *a && *a <= *u),
            Self::LevelSet(ls) => (ls.g)(x) <= ls.settings.tol_proj,
        })
    }

    /// Projection `Π(x)`: the identity on `Ḡ`, otherwise the projection onto
    /// the boundary `∂G`. Interior points are returned bit-for-bit unchanged.
    pub fn project(&self, x: &[f64]) -> Result<Vec<f64>, DomainError> {
        self.check_dim(x)?;
        match self {
            Self::Ball { center, radius } => {
                let d = crate::vecmath::dist(x, center);
                if d <= *radius {
                    Ok(x.to_vec())
                } else {
                    let scale = radius / d;
                    let mut p: Vec<f64> = x
                        .iter()
                        .zip(center)
                        .map(|(a, c)| c + (a - c) * scale)
                        .collect();
                    shrink_into_ball(&mut p, center, *radius);
                    Ok(p)
                }
            }
            Self::Box { lower, upper } => Ok(x
                .iter()
                .zip(lower.iter().zip(upper))
                .map(|(a, (l, u))| {
                    if *a < *l {
                        *l
                    } else if *a > *u {
                        *u
                    } else {
                        *a
                    }
                })
                .collect()),
            Self::LevelSet(ls) => project_level_set(ls, x),
        }
    }

    /// Penalty vector `π(x) = x − Π(x)`; the zero vector exactly on `Ḡ`.
    pub fn penalty_vector(&self, x: &[f64]) -> Result<Vec<f64>, DomainError> {
        let p = self.project(x)?;
        Ok(x.iter().zip(&p).map(|(a, b)| a - b).collect())
    }

    /// Unit inward normal `ν(x)` at a boundary point.
    pub fn inward_normal(&self, x: &[f64]) -> Result<Vec<f64>, DomainError> {
        self.check_dim(x)?;
        match self {
            Self::Ball { center, .. } => {
                let v: Vec<f64> = center.iter().zip(x).map(|(c, a)| c - a).collect();
                let n = norm(&v);
                if n < 1e-300 {
                    return Err(DomainError::DegenerateGradient);
                }
                Ok(v.iter().map(|a| a / n).collect())
            }
            Self::Box { lower, upper } => {
                let tol = 1e-10;
                let mut v = vec![0.0; x.len()];
                let mut active = false;
                for (k, a) in x.iter().enumerate() {
                    if (a - lower[k]).abs() <= tol {
                        v[k] += 1.0;
                        active = true;
                    }
                    if (a - upper[k]).abs() <= tol {
                        v[k] -= 1.0;
                        active = true;
                    }
                }
                if !active {
                    return Err(DomainError::NotOnBoundary);
                }
                let n = norm(&v);
                if n < 1e-300 {
                    return Err(DomainError::DegenerateGradient);
                }
                Ok(v.iter().map(|a| a / n).collect())
            }
            Self::LevelSet(ls) => {
                let grad = (ls.grad_g)(x);
                let n = norm(&grad);
                if n < 1e-12 {
                    return Err(DomainError::DegenerateGradient);
                }
                Ok(grad.iter().map(|a| -a / n).collect())
            }
        }
    }

    /// `n` i.i.d. points uniform on `Ḡ`. Ball and box sampling is direct;
    /// level sets are rejection-sampled from their bounding box.
    pub fn sample_uniform<R: Rng + ?Sized>(
        &self,
        rng: &mut R,
        n: usize,
    ) -> Result<Vec<Vec<f64>>, DomainError> {
        if n == 0 {
            return Err(DomainError::InvalidGeometry(
                "sample count must be at least 1".into(),
            ));
        }
        let dim = self.dimension();
        let mut out = Vec::with_capacity(n);
        match self {
            Self::Ball { center, radius } => {
                for _ in 0..n {
                    let mut dir: Vec<f64> = loop {
                        let v: Vec<f64> =
                            (0..dim).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
                        if norm_sq(&v) > 1e-300 {
                            break v;
                        }
                    };
                    let r = radius * rng.random::<f64>().powf(1.0 / dim as f64) / norm(&dir);
                    for (d, c) in dir.iter_mut().zip(center) {
                        *d = c + *d * r;
                    }
                    out.push(dir);
                }
            }
            Self::Box { lower, upper } => {
                for _ in 0..n {
                    out.push(
                        lower
                            .iter()
                            .zip(upper)
                            .map(|(l, u)| l + rng.random::<f64>() * (u - l))
                            .collect(),
                    );
                }
            }
            Self::LevelSet(ls) => {
                let mut attempts: u64 = 0;
                let mut accepted: u64 = 0;
                while out.len() < n {
                    attempts += 1;
                    let p: Vec<f64> = ls
                        .lower
                        .iter()
                        .zip(&ls.upper)
                        .map(|(l, u)| l + rng.random::<f64>() * (u - l))
                        .collect();
                    if (ls.g)(&p) <= ls.settings.tol_proj {
                        accepted += 1;
                        out.push(p);
                    }
                    // trial window: acceptance estimate below 1e-4 signals a
                    // degenerate domain specification
                    if attempts >= 100_000 && (accepted as f64) < 1e-4 * attempts as f64 {
                        return Err(DomainError::RejectionBudgetExceeded { attempts, accepted });
                    }
                }
            }
        }
        Ok(out)
    }
}

/// Projects `x` onto the level-set boundary along the inward-normal ray at
/// `x`, solving `g(x + s·d) = 0` in the scalar `s`.
fn project_level_set(ls: &LevelSet, x: &[f64]) -> Result<Vec<f64>, DomainError> {
    let tol = ls.settings.tol_proj;
    if (ls.g)(x) <= tol {
        return Ok(x.to_vec());
    }
    let grad = (ls.grad_g)(x);
    let gn = norm(&grad);
    if gn < 1e-12 {
        return Err(DomainError::DegenerateGradient);
    }
    let dir: Vec<f64> = grad.iter().map(|a| -a / gn).collect();
    let at = |s: f64| -> Vec<f64> { x.iter().zip(&dir).map(|(a, d)| a + s * d).collect() };

    // Ray length cap: no boundary crossing can lie beyond the far side of the
    // bounding box by more than its diagonal.
    let diag = norm(&crate::vecmath::sub(&ls.upper, &ls.lower));
    let center: Vec<f64> = ls
        .lower
        .iter()
        .zip(&ls.upper)
        .map(|(l, u)| 0.5 * (l + u))
        .collect();
    let s_max = 2.0 * (crate::vecmath::dist(x, &center) + diag);

    // Newton on the ray.
    let mut s = 0.0;
    let mut newton_ok = false;
    let mut p = x.to_vec();
    for _ in 0..ls.settings.max_newton_iters {
        p = at(s);
        let gs = (ls.g)(&p);
        if gs.abs() <= tol {
            newton_ok = true;
            break;
        }
        let slope = dot(&(ls.grad_g)(&p), &dir);
        if slope.abs() < 1e-14 {
            break;
        }
        let s_next = s - gs / slope;
        if !s_next.is_finite() || s_next < 0.0 || s_next > s_max {
            break;
        }
        s = s_next;
    }
    if newton_ok {
        return Ok(p);
    }
    if !ls.settings.bisection_fallback {
        return Err(DomainError::NonConvergence {
            newton_iters: ls.settings.max_newton_iters,
            bisection_iters: 0,
        });
    }

    // Bisection fallback: expand a bracket [a, b] with g(a) > 0 >= g(b) by
    // doubling, then bisect on |g| <= tol.
    let mut a = 0.0;
    let mut b = s_max / 1024.0;
    let mut bracketed = false;
    while b <= s_max {
        if (ls.g)(&at(b)) <= 0.0 {
            bracketed = true;
            break;
        }
        a = b;
        b *= 2.0;
    }
    if !bracketed {
        return Err(DomainError::NonConvergence {
            newton_iters: ls.settings.max_newton_iters,
            bisection_iters: 0,
        });
    }
    const MAX_BISECT: usize = 200;
    for it in 0..MAX_BISECT {
        let mid = 0.5 * (a + b);
        let pm = at(mid);
        let gm = (ls.g)(&pm);
        if gm.abs() <= tol {
            return Ok(pm);
        }
        if gm > 0.0 {
            a = mid;
        } else {
            b = mid;
        }
        if (b - a).abs() < f64::EPSILON * s_max {
            // interval exhausted; accept the feasible end if it meets tol
            let pb = at(b);
            if (ls.g)(&pb).abs() <= tol {
                return Ok(pb);
            }
            return Err(DomainError::NonConvergence {
                newton_iters: ls.settings.max_newton_iters,
                bisection_iters: it + 1,
            });
        }
    }
    Err(DomainError::NonConvergence {
        newton_iters: ls.settings.max_newton_iters,
        bisection_iters: MAX_BISECT,
    })
}

/// Nudges a point produced by radial rescaling into the closed ball; the
/// rescaled point can land a few ulps outside, and ball membership carries no
/// tolerance. Each pass contracts toward the center by one epsilon.
pub(crate) fn shrink_into_ball(p: &mut [f64], center: &[f64], radius: f64) {
    for _ in 0..8 {
        if crate::vecmath::dist(p, center) <= radius {
            return;
        }
        for (a, c) in p.iter_mut().zip(center) {
            *a = c + (*a - c) * (1.0 - f64::EPSILON);
        }
    }
}

/// Polar radius of the heart curve, `R(t) = 2cos t − ½cos 2t − ¼cos 3t − ⅛cos 4t`.
fn heart_radius(t: f64) -> f64 {
    2.0 * t.cos() - 0.5 * (2.0 * t).cos() - 0.25 * (3.0 * t).cos() - 0.125 * (4.0 * t).cos()
}

fn heart_radius_deriv(t: f64) -> f64 {
    -2.0 * t.sin() + (2.0 * t).sin() + 0.75 * (3.0 * t).sin() + 0.5 * (4.0 * t).sin()
}

/// Level value of the heart region: `g ≤ 0` iff `(x, y)` is feasible.
pub fn heart_g(x: f64, y: f64) -> f64 {
    let t = f64::atan2(x, y);
    let r = heart_radius(t);
    x * x + y * y - r * r - 4.0 * t.sin() * t.sin()
}

/// Analytic gradient of [`heart_g`]. With `t = atan2(x, y)`,
/// `∂t/∂x = y/ρ²` and `∂t/∂y = −x/ρ²`.
pub fn heart_grad(x: f64, y: f64) -> [f64; 2] {
    let rho_sq = x * x + y * y;
    let t = f64::atan2(x, y);
    // d/dt of R(t)² + 4 sin²t
    let f_prime = 2.0 * heart_radius(t) * heart_radius_deriv(t) + 4.0 * (2.0 * t).sin();
    if rho_sq < 1e-300 {
        return [0.0, 0.0];
    }
    [
        2.0 * x - f_prime * y / rho_sq,
        2.0 * y + f_prime * x / rho_sq,
    ]
}

/// Point on the heart boundary at polar parameter `t ∈ [−π, π]`.
pub fn heart_boundary_point(t: f64) -> [f64; 2] {
    let r = heart_radius(t);
    let rho = (r * r + 4.0 * t.sin() * t.sin()).sqrt();
    [rho * t.sin(), rho * t.cos()]
}
