//! Truncation-error oracles.
//!
//! Each oracle evaluates one consistency residual of the scheme on an exact
//! profile and fits the constant `C` in a bound `|r^n| <= C B_n`. A bound is
//! confirmed empirically when `C` stays put as `N` doubles.

use crate::error::{invalid, FracError, Result};
use crate::kernel::{Method, SchemeParams, WeightTable};
use crate::mesh::TemporalMesh;
use crate::problem::ProblemSpec;
use crate::spatial::{laplacian_into, GridFunction2D};

/// Fitted constant `C = max_n |r^n| / B_n` on one mesh.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundFit {
    pub n_steps: usize,
    /// `max_n |r^n|`.
    pub max_residual: f64,
    pub constant: f64,
    /// Step attaining `constant`.
    pub argmax: usize,
}

fn fit(n_steps: usize, residuals: impl Iterator<Item = (f64, f64)>) -> BoundFit {
    let mut out = BoundFit {
        n_steps,
        max_residual: 0.0,
        constant: 0.0,
        argmax: 0,
    };
    for (n, (res, bound)) in residuals.enumerate() {
        let res = res.abs();
        out.max_residual = out.max_residual.max(res);
        let c = res / bound;
        if c > out.constant {
            out.constant = c;
            out.argmax = n + 1;
        }
    }
    out
}

/// Fits across a doubling sequence of `N`.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundFitSeries {
    pub fits: Vec<BoundFit>,
}

impl BoundFitSeries {
    /// `C(2N) / C(N)` for consecutive fits.
    pub fn ratios(&self) -> Vec<f64> {
        self.fits.windows(2).map(|w| w[1].constant / w[0].constant).collect()
    }

    /// Every consecutive ratio lies in `[lo, hi]`.
    pub fn is_stable(&self, lo: f64, hi: f64) -> bool {
        self.ratios().iter().all(|q| (lo..=hi).contains(q))
    }

    pub fn max_residual(&self) -> f64 {
        self.fits.iter().map(|f| f.max_residual).fold(0.0, f64::max)
    }
}

/// `γ̂ = min{alpha + 1, (3 - alpha)/r} - 1`.
pub fn gamma_hat(alpha: f64, r: f64) -> f64 {
    (alpha + 1.0).min((3.0 - alpha) / r) - 1.0
}

/// Caputo derivative `Γ(β+1)/Γ(β+1-α) t^(β-α)` of `t^β`.
fn caputo_power(alpha: f64, beta: f64, t: f64) -> f64 {
    libm::tgamma(beta + 1.0) / libm::tgamma(beta + 1.0 - alpha) * t.powf(beta - alpha)
}

/// `r_1^n = δ u^n − D^α u(t_n^*)` for `u = t^β` on the graded mesh `t_n = (n/N)^r`,
/// fitted against `(tau_1 / t_n)^(γ̂+1)`.
pub fn truncation_r1_oracle(alpha: f64, r: f64, n_steps: usize, beta: f64) -> Result<BoundFit> {
    let params = SchemeParams::new(alpha)?;
    let mesh = TemporalMesh::graded(1.0, n_steps, r)?;
    r1_on_mesh(&params, &mesh, beta)
}

fn r1_on_mesh(params: &SchemeParams, mesh: &TemporalMesh, beta: f64) -> Result<BoundFit> {
    if !(beta > 0.0) {
        return Err(invalid("beta", format!("profile exponent must be positive, got {beta}")));
    }
    let alpha = params.alpha();
    let r = mesh.grading().unwrap_or(1.0);
    let exponent = gamma_hat(alpha, r) + 1.0;
    let table = WeightTable::build(mesh, params, Method::ClosedForm)?;
    let u: Vec<f64> = mesh.points().iter().map(|t| t.powf(beta)).collect();
    let tau1 = mesh.tau(1);
    let mut residuals = Vec::with_capacity(mesh.n_steps());
    for n in 1..=mesh.n_steps() {
        let approx = table.derivative(n, &u[..=n])?;
        let exact = caputo_power(alpha, beta, mesh.star(n, params.sigma()));
        residuals.push((approx - exact, (tau1 / mesh.t(n)).powf(exponent)));
    }
    Ok(fit(mesh.n_steps(), residuals.into_iter()))
}

pub fn r1_fit_series(alpha: f64, r: f64, beta: f64, ns: &[usize]) -> Result<BoundFitSeries> {
    let fits = ns
        .iter()
        .map(|&n| truncation_r1_oracle(alpha, r, n, beta))
        .collect::<Result<_>>()?;
    Ok(BoundFitSeries { fits })
}

/// Fits for the reaction and spatial residuals of one problem.
#[derive(Debug, Clone, PartialEq)]
pub struct SpatialFits {
    /// `r_3` against `tau_n^2 t_n^(α-2)`.
    pub r3: BoundFit,
    /// `r_2` against `tau_n^2 t_n^(α-2) + h1^2 + h2^2`.
    pub r2: BoundFit,
    /// Temporal part `L (u^{n,*} − u(t_n^*))` against `tau_n^2 t_n^(α-2)`.
    pub r2_temporal: BoundFit,
    /// Spatial part `(L_h − L) u^{n,*}` against `h1^2 + h2^2`.
    pub r2_spatial: BoundFit,
}

/// Evaluate `r_3 = f(u(t_n^*)) − f(u^{n-1}) − σ f'(u^{n-1})(u^n − u^{n-1})` and
/// `r_2 = L_h u^{n,*} − L u(t_n^*)` at every node and step of `spec`'s mesh.
///
/// `r_2` is also split into its temporal and spatial parts and each is fitted
/// against its own term: when the spatial part is tiny (e.g. the stencil is
/// exact on the profile) the combined bound is dominated by a constant `h^2`
/// floor and its fitted constant drifts with `N` without saying anything about
/// the temporal term.
pub fn truncation_r3_oracle(spec: &ProblemSpec) -> Result<SpatialFits> {
    let exact = spec.exact.as_ref().ok_or(FracError::MissingExactSolution)?;
    let lap = exact.laplacian.as_ref().ok_or(FracError::MissingExactSolution)?;
    let mesh = spec.mesh()?;
    let grid = spec.grid()?;
    let sigma = spec.params()?.sigma();
    let alpha = spec.alpha;
    let f = &spec.reaction;
    let h2 = grid.h1 * grid.h1 + grid.h2 * grid.h2;

    let sample = |t: f64| GridFunction2D::from_fn(grid, |x, y| (exact.u)(x, y, t)).into_values();
    let sample_lap = |t: f64| GridFunction2D::from_fn(grid, |x, y| lap(x, y, t)).into_values();
    let mut prev = sample(0.0);
    let mut prev_lap = sample_lap(0.0);
    let mut lap_h = vec![0.0; grid.len()];
    let mut r3 = Vec::with_capacity(mesh.n_steps());
    let mut r2 = Vec::with_capacity(mesh.n_steps());
    let mut r2_t = Vec::with_capacity(mesh.n_steps());
    let mut r2_h = Vec::with_capacity(mesh.n_steps());
    for n in 1..=mesh.n_steps() {
        let t_star = mesh.star(n, sigma);
        let cur = sample(mesh.t(n));
        let at_star = sample(t_star);
        let lap_star = sample_lap(t_star);
        let cur_lap = sample_lap(mesh.t(n));
        let interp: Vec<f64> = cur
            .iter()
            .zip(&prev)
            .map(|(a, b)| sigma * a + (1.0 - sigma) * b)
            .collect();
        laplacian_into(&grid, spec.nu, &interp, &mut lap_h);

        let (mut worst3, mut worst2, mut worst2_t, mut worst2_h) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
        for k in 0..grid.len() {
            let lin = f.value(prev[k]) + sigma * f.derivative(prev[k]) * (cur[k] - prev[k]);
            worst3 = worst3.max((f.value(at_star[k]) - lin).abs());
            // L = -nu Δ
            let l_interp = -spec.nu * (sigma * cur_lap[k] + (1.0 - sigma) * prev_lap[k]);
            let l_star = -spec.nu * lap_star[k];
            worst2 = worst2.max((lap_h[k] - l_star).abs());
            worst2_t = worst2_t.max((l_interp - l_star).abs());
            worst2_h = worst2_h.max((lap_h[k] - l_interp).abs());
        }
        let temporal = mesh.tau(n).powi(2) * mesh.t(n).powf(alpha - 2.0);
        r3.push((worst3, temporal));
        r2.push((worst2, temporal + h2));
        r2_t.push((worst2_t, temporal));
        r2_h.push((worst2_h, h2));
        prev = cur;
        prev_lap = cur_lap;
    }
    Ok(SpatialFits {
        r3: fit(mesh.n_steps(), r3.into_iter()),
        r2: fit(mesh.n_steps(), r2.into_iter()),
        r2_temporal: fit(mesh.n_steps(), r2_t.into_iter()),
        r2_spatial: fit(mesh.n_steps(), r2_h.into_iter()),
    })
}
