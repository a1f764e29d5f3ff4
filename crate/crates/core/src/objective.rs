//! Benchmark objective functions and the objective wrapper used by the
//! particle dynamics.

use std::f64::consts::{E, PI};
use std::fmt;
use std::sync::{Arc, OnceLock};

use crate::domain::heart_g;
use crate::merton::{merton_loss, MertonParams, ObservationSet};

/// Scalar objective on the feasible set, with an optional known minimizer
/// used for success scoring.
#[derive(Clone)]
pub struct Objective {
    name: String,
    dimension: usize,
    eval: Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>,
    known_minimizer: Option<Vec<f64>>,
}

impl fmt::Debug for Objective {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Objective")
            .field("name", &self.name)
            .field("dimension", &self.dimension)
            .field("known_minimizer", &self.known_minimizer)
            .finish()
    }
}

impl Objective {
    pub fn new(
        name: impl Into<String>,
        dimension: usize,
        eval: impl Fn(&[f64]) -> f64 + Send + Sync + 'static,
        known_minimizer: Option<Vec<f64>>,
    ) -> Self {
        Self {
            name: name.into(),
            dimension,
            eval: Arc::new(eval),
            known_minimizer,
        }
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        debug_assert_eq!(x.len(), self.dimension);
        (self.eval)(x)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn known_minimizer(&self) -> Option<&[f64]> {
        self.known_minimizer.as_deref()
    }

    /// Translated Ackley function on the plane, global minimum 0 at (2, 2).
    pub fn ackley() -> Self {
        Self::new("ackley", 2, ackley_translated, Some(vec![2.0, 2.0]))
    }

    /// Rastrigin function in `d` dimensions, global minimum 0 at the origin.
    pub fn rastrigin(d: usize) -> Self {
        assert!(d >= 1, "rastrigin requires d >= 1");
        Self::new("rastrigin", d, rastrigin, Some(vec![0.0; d]))
    }

    /// Two-dimensional Rosenbrock function, global minimum 0 at (1, 1).
    pub fn rosenbrock() -> Self {
        Self::new("rosenbrock", 2, rosenbrock2, Some(vec![1.0, 1.0]))
    }

    /// Townsend function; the known minimizer is the dense-grid reference
    /// over the heart-shaped region.
    pub fn townsend() -> Self {
        Self::new(
            "townsend",
            2,
            townsend,
            Some(townsend_heart_minimizer().to_vec()),
        )
    }

    /// Tikhonov-regularized data-misfit loss of the jump-diffusion inverse
    /// problem; minimized over the parameter box.
    pub fn merton_inverse(obs: ObservationSet, lambda_reg: f64) -> Self {
        let reference = obs.theta_true.to_vec();
        Self::new(
            "merton",
            3,
            move |x| merton_loss(MertonParams::from_slice(x), &obs, lambda_reg),
            Some(reference),
        )
    }
}

/// Ackley function translated so the global minimum sits at (2, 2):
/// `−20 exp(−0.2 √(½|z|²)) − exp(½ Σ cos 2πz_k) + 20 + e`, `z = x − (2, 2)`.
pub fn ackley_translated(x: &[f64]) -> f64 {
    debug_assert_eq!(x.len(), 2);
    let u = x[0] - 2.0;
    let v = x[1] - 2.0;
    let radial = -20.0 * (-0.2 * (0.5 * (u * u + v * v)).sqrt()).exp();
    let cosine = -(0.5 * ((2.0 * PI * u).cos() + (2.0 * PI * v).cos())).exp();
    radial + cosine + 20.0 + E
}

/// `10d + Σ (x_k² − 10 cos 2πx_k)`.
pub fn rastrigin(x: &[f64]) -> f64 {
    let d = x.len() as f64;
    10.0 * d
        + x.iter()
            .map(|&v| v * v - 10.0 * (2.0 * PI * v).cos())
            .sum::<f64>()
}

/// `(1 − x)² + 100 (y − x²)²`.
pub fn rosenbrock2(x: &[f64]) -> f64 {
    debug_assert_eq!(x.len(), 2);
    let a = 1.0 - x[0];
    let b = x[1] - x[0] * x[0];
    a * a + 100.0 * b * b
}

/// `−cos²((x − 0.1) y) − x sin(3x + y)`.
pub fn townsend(x: &[f64]) -> f64 {
    debug_assert_eq!(x.len(), 2);
    let c = ((x[0] - 0.1) * x[1]).cos();
    -c * c - x[0] * (3.0 * x[0] + x[1]).sin()
}

static TOWNSEND_MINIMIZER: OnceLock<[f64; 2]> = OnceLock::new();

/// Reference minimizer of the Townsend function over the heart region,
/// located by brute force on a 2000×2000 grid of the bounding box. Cached
/// for the process lifetime.
pub fn townsend_heart_minimizer() -> [f64; 2] {
    *TOWNSEND_MINIMIZER.get_or_init(|| {
        const N: usize = 2000;
        let mut best_val = f64::INFINITY;
        let mut best = [0.0, 0.0];
        for i in 0..N {
            let x = -3.0 + 6.0 * i as f64 / (N - 1) as f64;
            for j in 0..N {
                let y = -3.0 + 6.0 * j as f64 / (N - 1) as f64;
                if heart_g(x, y) <= 0.0 {
                    let f = townsend(&[x, y]);
                    if f < best_val {
                        best_val = f;
                        best = [x, y];
                    }
                }
            }
        }
        best
    })
}
