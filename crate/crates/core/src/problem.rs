//! Problem data: fractional order, diffusivity, reaction, source and initial data.

use std::fmt;
use std::sync::Arc;

use sha2::{Digest, Sha256};

use crate::error::{invalid, Result};
use crate::kernel::SchemeParams;
use crate::mesh::{SpatialGrid, TemporalMesh};

pub type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;
pub type SpaceFn = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;
pub type SpaceTimeFn = Arc<dyn Fn(f64, f64, f64) -> f64 + Send + Sync>;

/// Reaction term `N(u)` together with `N'(u)`.
#[derive(Clone)]
pub struct Reaction {
    name: String,
    f: ScalarFn,
    df: ScalarFn,
    /// `Some(c)` when `N(u) = c u`.
    linear: Option<f64>,
}

impl Reaction {
    pub fn new(
        name: impl Into<String>,
        f: impl Fn(f64) -> f64 + Send + Sync + 'static,
        df: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self {
            name: name.into(),
            f: Arc::new(f),
            df: Arc::new(df),
            linear: None,
        }
    }

    pub fn zero() -> Self {
        Self::linear(0.0)
    }

    /// `N(u) = c u`.
    pub fn linear(c: f64) -> Self {
        let mut r = Self::new(format!("linear({c})"), move |u| c * u, move |_| c);
        r.linear = Some(c);
        r
    }

    /// `N(u) = u - u^3`.
    pub fn allen_cahn() -> Self {
        Self::new("u-u^3", |u| u - u * u * u, |u| 1.0 - 3.0 * u * u)
    }

    /// `N(u) = u (1 - u)`.
    pub fn logistic() -> Self {
        Self::new("u(1-u)", |u| u * (1.0 - u), |u| 1.0 - 2.0 * u)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    #[inline]
    pub fn value(&self, u: f64) -> f64 {
        (self.f)(u)
    }

    #[inline]
    pub fn derivative(&self, u: f64) -> f64 {
        (self.df)(u)
    }

    pub fn linear_coefficient(&self) -> Option<f64> {
        self.linear
    }

    /// Largest `|(N(u+e) - N(u-e)) / 2e - N'(u)|` over the samples.
    pub fn derivative_mismatch(&self, samples: &[f64], eps: f64) -> f64 {
        samples
            .iter()
            .map(|&u| ((self.value(u + eps) - self.value(u - eps)) / (2.0 * eps) - self.derivative(u)).abs())
            .fold(0.0, f64::max)
    }
}

impl fmt::Debug for Reaction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Reaction").field("name", &self.name).finish()
    }
}

/// Exact solution `u(x, y, t)` and its spatial Laplacian `Δu`.
#[derive(Clone)]
pub struct ExactSolution {
    pub u: SpaceTimeFn,
    pub laplacian: Option<SpaceTimeFn>,
}

/// Everything needed to march one problem instance.
#[derive(Clone)]
pub struct ProblemSpec {
    /// Identifies the data (reaction, source, initial values) for hashing.
    pub label: String,
    pub alpha: f64,
    pub sigma: Option<f64>,
    pub nu: f64,
    pub t_final: f64,
    pub l1: f64,
    pub l2: f64,
    pub n_steps: usize,
    pub grading: f64,
    pub m1: usize,
    pub m2: usize,
    pub reaction: Reaction,
    pub source: Option<SpaceTimeFn>,
    pub initial: SpaceFn,
    pub exact: Option<ExactSolution>,
}

impl fmt::Debug for ProblemSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ProblemSpec")
            .field("label", &self.label)
            .field("alpha", &self.alpha)
            .field("nu", &self.nu)
            .field("T", &self.t_final)
            .field("N", &self.n_steps)
            .field("r", &self.grading)
            .field("M", &(self.m1, self.m2))
            .field("reaction", &self.reaction)
            .finish()
    }
}

impl ProblemSpec {
    pub fn params(&self) -> Result<SchemeParams> {
        match self.sigma {
            Some(s) => SchemeParams::with_sigma(self.alpha, s),
            None => SchemeParams::new(self.alpha),
        }
    }

    pub fn mesh(&self) -> Result<TemporalMesh> {
        TemporalMesh::graded(self.t_final, self.n_steps, self.grading)
    }

    pub fn grid(&self) -> Result<SpatialGrid> {
        SpatialGrid::new(self.l1, self.l2, self.m1, self.m2)
    }

    pub fn validate(&self) -> Result<()> {
        self.params()?;
        self.mesh()?;
        self.grid()?;
        if !(self.nu > 0.0) {
            return Err(invalid("nu", format!("diffusivity must be positive, got {}", self.nu)));
        }
        Ok(())
    }

    /// Same problem on `n_steps` time steps.
    pub fn with_steps(&self, n_steps: usize) -> Self {
        Self {
            n_steps,
            ..self.clone()
        }
    }

    /// Same problem with another reaction (and label suffix).
    pub fn with_reaction(&self, reaction: Reaction) -> Self {
        Self {
            label: format!("{}+{}", self.label, reaction.name()),
            reaction,
            ..self.clone()
        }
    }

    pub fn source_at(&self, x: f64, y: f64, t: f64) -> f64 {
        self.source.as_ref().map_or(0.0, |s| s(x, y, t))
    }

    /// Short hex digest of every parameter that determines a march.
    pub fn spec_hash(&self) -> String {
        let canonical = format!(
            "{}|reaction={}|alpha={:e}|sigma={:?}|nu={:e}|T={:e}|L={:e}x{:e}|N={}|r={:e}|M={}x{}",
            self.label,
            self.reaction.name(),
            self.alpha,
            self.sigma,
            self.nu,
            self.t_final,
            self.l1,
            self.l2,
            self.n_steps,
            self.grading,
            self.m1,
            self.m2
        );
        let digest = Sha256::digest(canonical.as_bytes());
        digest[..8].iter().map(|b| format!("{b:02x}")).collect()
    }
}

/// Manufactured problem with `u = t^alpha x y (1-x)(1-y)` on the unit square,
/// `T = 0.5`, `nu = 0.1`, `N(u) = u - u^3`.
///
/// The source `s = D_t^alpha u + L u - N(u)` uses `D_t^alpha t^alpha = Γ(1+alpha)`.
pub fn example1(alpha: f64, grading: f64, n_steps: usize, m: usize) -> ProblemSpec {
    example1_with(alpha, grading, n_steps, m, 0.1, 0.5)
}

/// [`example1`] with another diffusivity and final time; the source follows.
pub fn example1_with(
    alpha: f64,
    grading: f64,
    n_steps: usize,
    m: usize,
    nu: f64,
    t_final: f64,
) -> ProblemSpec {
    let gamma_1pa = libm::tgamma(1.0 + alpha);
    let reaction = Reaction::allen_cahn();
    let phi = |x: f64, y: f64| x * y * (1.0 - x) * (1.0 - y);
    let lap_phi = |x: f64, y: f64| -2.0 * (y * (1.0 - y) + x * (1.0 - x));
    let react = reaction.clone();
    let source = move |x: f64, y: f64, t: f64| {
        let shape = phi(x, y);
        let ta = t.powf(alpha);
        let u = ta * shape;
        gamma_1pa * shape - nu * ta * lap_phi(x, y) - react.value(u)
    };
    ProblemSpec {
        label: "example1".into(),
        alpha,
        sigma: None,
        nu,
        t_final,
        l1: 1.0,
        l2: 1.0,
        n_steps,
        grading,
        m1: m,
        m2: m,
        reaction,
        source: Some(Arc::new(source)),
        initial: Arc::new(|_, _| 0.0),
        exact: Some(ExactSolution {
            u: Arc::new(move |x, y, t| t.powf(alpha) * phi(x, y)),
            laplacian: Some(Arc::new(move |x, y, t| t.powf(alpha) * lap_phi(x, y))),
        }),
    }
}

/// `u_0 = sin(pi x) sin(pi y)`, `T = 0.5`, `nu = 0.3`, `N(u) = u (1 - u)`,
/// no explicit source and no exact solution.
pub fn example2(alpha: f64, grading: f64, n_steps: usize, m: usize) -> ProblemSpec {
    use std::f64::consts::PI;
    ProblemSpec {
        label: "example2".into(),
        alpha,
        sigma: None,
        nu: 0.3,
        t_final: 0.5,
        l1: 1.0,
        l2: 1.0,
        n_steps,
        grading,
        m1: m,
        m2: m,
        reaction: Reaction::logistic(),
        source: None,
        initial: Arc::new(|x, y| (PI * x).sin() * (PI * y).sin()),
        exact: None,
    }
}
