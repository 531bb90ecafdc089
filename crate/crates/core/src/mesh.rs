//! Temporal graded meshes and the uniform spatial grid.

use std::io::Write;

use crate::error::{invalid, Result};

/// Lower bound on consecutive step ratios required by the weight properties.
pub const RATIO_LOWER: f64 = 0.618;
/// Upper bound on `tau_j / tau_{j+1}`.
pub const RATIO_UPPER: f64 = 7.0 / 4.0;

/// Relative slack when comparing step ratios that are equal in exact
/// arithmetic (uniform meshes produce ratios of `1 +- few ulp`).
const RATIO_SLACK: f64 = 64.0 * f64::EPSILON;

/// Time points `0 = t_0 < t_1 < ... < t_N = T`.
#[derive(Debug, Clone, PartialEq)]
pub struct TemporalMesh {
    t_final: f64,
    grading: Option<f64>,
    points: Vec<f64>,
    steps: Vec<f64>,
}

impl TemporalMesh {
    /// Standard graded mesh `t_n = T (n/N)^r`.
    pub fn graded(t_final: f64, n_steps: usize, grading: f64) -> Result<Self> {
        if n_steps == 0 {
            return Err(invalid("N", "step count must be at least 1"));
        }
        if !(grading >= 1.0) || !grading.is_finite() {
            return Err(invalid("r", format!("grading must be finite and >= 1, got {grading}")));
        }
        if !(t_final > 0.0) || !t_final.is_finite() {
            return Err(invalid("T", format!("final time must be positive, got {t_final}")));
        }
        let nf = n_steps as f64;
        let mut points: Vec<f64> = (0..=n_steps)
            .map(|n| t_final * (n as f64 / nf).powf(grading))
            .collect();
        points[n_steps] = t_final;
        let mut mesh = Self::assemble(t_final, points);
        mesh.grading = Some(grading);
        Ok(mesh)
    }

    /// Uniform mesh, i.e. `graded(T, N, 1)`.
    pub fn uniform(t_final: f64, n_steps: usize) -> Result<Self> {
        Self::graded(t_final, n_steps, 1.0)
    }

    /// Arbitrary strictly increasing point list starting at zero.
    pub fn from_points(points: Vec<f64>) -> Result<Self> {
        if points.len() < 2 {
            return Err(invalid("points", "need at least t_0 and t_1"));
        }
        if points[0] != 0.0 {
            return Err(invalid("points", format!("t_0 must be 0, got {}", points[0])));
        }
        if let Some(w) = points.windows(2).position(|w| !(w[1] > w[0]) || !w[1].is_finite()) {
            return Err(invalid(
                "points",
                format!("points must be strictly increasing (violated at index {})", w + 1),
            ));
        }
        let t_final = *points.last().unwrap();
        Ok(Self::assemble(t_final, points))
    }

    fn assemble(t_final: f64, points: Vec<f64>) -> Self {
        let steps = points.windows(2).map(|w| w[1] - w[0]).collect();
        Self {
            t_final,
            grading: None,
            points,
            steps,
        }
    }

    pub fn t_final(&self) -> f64 {
        self.t_final
    }

    /// Number of steps `N`.
    pub fn n_steps(&self) -> usize {
        self.steps.len()
    }

    /// Grading exponent, for meshes built by [`TemporalMesh::graded`].
    pub fn grading(&self) -> Option<f64> {
        self.grading
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    /// `t_n` for `0 <= n <= N`.
    #[inline]
    pub fn t(&self, n: usize) -> f64 {
        self.points[n]
    }

    /// `tau_j = t_j - t_{j-1}` for `1 <= j <= N`.
    #[inline]
    pub fn tau(&self, j: usize) -> f64 {
        self.steps[j - 1]
    }

    /// Steps `tau_1..tau_N` as a slice (index 0 holds `tau_1`).
    pub fn steps(&self) -> &[f64] {
        &self.steps
    }

    /// `rho_j = tau_{j+1} / tau_j` for `1 <= j <= N-1`.
    #[inline]
    pub fn rho(&self, j: usize) -> f64 {
        self.tau(j + 1) / self.tau(j)
    }

    pub fn ratios(&self) -> Vec<f64> {
        (1..self.n_steps()).map(|j| self.rho(j)).collect()
    }

    /// Largest step.
    pub fn tau_max(&self) -> f64 {
        self.steps.iter().copied().fold(0.0, f64::max)
    }

    /// Star point `t_n^* = t_n - (1 - sigma) tau_n`.
    #[inline]
    pub fn star(&self, n: usize, sigma: f64) -> f64 {
        self.points[n] - (1.0 - sigma) * self.tau(n)
    }

    /// Write the `n, t_n, tau_n, rho_n` table; undefined entries are left empty.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "n,t_n,tau_n,rho_n")?;
        let n_steps = self.n_steps();
        for n in 0..=n_steps {
            let tau = if n >= 1 { format!("{}", self.tau(n)) } else { String::new() };
            let rho = if n >= 1 && n < n_steps { format!("{}", self.rho(n)) } else { String::new() };
            writeln!(w, "{n},{},{tau},{rho}", self.points[n])?;
        }
        Ok(())
    }
}

/// Step-ratio diagnostics for a temporal mesh.
#[derive(Debug, Clone, PartialEq)]
pub struct MeshReport {
    pub sigma: f64,
    /// `min_j rho_j`, `None` when `N = 1`.
    pub rho_min: Option<f64>,
    pub rho_max: Option<f64>,
    /// `rho_{j-1} >= rho_j` for `2 <= j <= N-1`.
    pub monotone: bool,
    /// First index where monotonicity fails.
    pub monotone_violation: Option<usize>,
    /// `rho_j >= 0.618` for all `j`.
    pub lower_ratio_ok: bool,
    /// `max_j tau_j / tau_{j+1}`.
    pub max_inverse_ratio: Option<f64>,
    /// `max_j tau_j / tau_{j+1} <= 7/4`.
    pub upper_ratio_ok: bool,
}

impl MeshReport {
    /// Whether every step-ratio hypothesis of the weight properties holds.
    pub fn hypotheses_hold(&self) -> bool {
        self.monotone && self.lower_ratio_ok && self.upper_ratio_ok
    }
}

/// Check the step-ratio hypotheses used by the coefficient properties.
pub fn validate_mesh(mesh: &TemporalMesh, sigma: f64) -> MeshReport {
    let rho = mesh.ratios();
    if rho.is_empty() {
        return MeshReport {
            sigma,
            rho_min: None,
            rho_max: None,
            monotone: true,
            monotone_violation: None,
            lower_ratio_ok: true,
            max_inverse_ratio: None,
            upper_ratio_ok: true,
        };
    }
    let rho_min = rho.iter().copied().fold(f64::INFINITY, f64::min);
    let rho_max = rho.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    // rho[i] is rho_{i+1}
    let monotone_violation = rho
        .windows(2)
        .position(|w| w[0] < w[1] * (1.0 - RATIO_SLACK))
        .map(|i| i + 2);
    let max_inverse_ratio = rho.iter().map(|r| 1.0 / r).fold(f64::NEG_INFINITY, f64::max);
    MeshReport {
        sigma,
        rho_min: Some(rho_min),
        rho_max: Some(rho_max),
        monotone: monotone_violation.is_none(),
        monotone_violation,
        lower_ratio_ok: rho_min >= RATIO_LOWER,
        max_inverse_ratio: Some(max_inverse_ratio),
        upper_ratio_ok: max_inverse_ratio <= RATIO_UPPER,
    }
}

/// Uniform grid on `(0, L1) x (0, L2)` with `M1 x M2` cells.
///
/// Only interior nodes carry unknowns; boundary values are zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpatialGrid {
    pub l1: f64,
    pub l2: f64,
    pub m1: usize,
    pub m2: usize,
    pub h1: f64,
    pub h2: f64,
}

impl SpatialGrid {
    pub fn new(l1: f64, l2: f64, m1: usize, m2: usize) -> Result<Self> {
        if m1 < 2 || m2 < 2 {
            return Err(invalid("M", format!("need at least 2 cells per axis, got {m1}x{m2}")));
        }
        if !(l1 > 0.0 && l2 > 0.0) {
            return Err(invalid("L", format!("domain lengths must be positive, got {l1}x{l2}")));
        }
        Ok(Self {
            l1,
            l2,
            m1,
            m2,
            h1: l1 / m1 as f64,
            h2: l2 / m2 as f64,
        })
    }

    /// Unit square with `M x M` cells.
    pub fn unit_square(m: usize) -> Result<Self> {
        Self::new(1.0, 1.0, m, m)
    }

    /// Interior nodes along x.
    #[inline]
    pub fn nx(&self) -> usize {
        self.m1 - 1
    }

    /// Interior nodes along y.
    #[inline]
    pub fn ny(&self) -> usize {
        self.m2 - 1
    }

    /// Total interior unknowns `(M1-1)(M2-1)`.
    #[inline]
    pub fn len(&self) -> usize {
        self.nx() * self.ny()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// `x_i = i L1 / M1`.
    #[inline]
    pub fn x(&self, i: usize) -> f64 {
        i as f64 * self.l1 / self.m1 as f64
    }

    /// `y_j = j L2 / M2`.
    #[inline]
    pub fn y(&self, j: usize) -> f64 {
        j as f64 * self.l2 / self.m2 as f64
    }

    /// Row-major storage index of interior node `(i, j)`, `1 <= i <= M1-1`.
    #[inline]
    pub fn index(&self, i: usize, j: usize) -> usize {
        (j - 1) * self.nx() + (i - 1)
    }

    /// Inverse of [`SpatialGrid::index`].
    #[inline]
    pub fn node(&self, k: usize) -> (usize, usize) {
        (k % self.nx() + 1, k / self.nx() + 1)
    }
}
