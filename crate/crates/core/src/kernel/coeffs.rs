//! The `a_{k,j}` and `b_{k,j}` kernel integrals.
//!
//! Both are integrals over one history cell `[t_j, t_{j+1}]` of the kernel
//! `(t_{k+1}^* - eta)^(-alpha) / Γ(1-alpha)`, the second weighted by the odd
//! moment `(eta - t_{j+1/2})`. Writing `x = t_{k+1}^* - t_j`, `d = tau_{j+1}`
//! and `theta = d / x < 1`, the substitution `eta = t_j + d s` gives
//!
//! ```text
//! a = x^(-alpha) d        / Γ(1-alpha) * ∫_0^1 (1 - theta s)^(-alpha) ds
//! b = x^(-alpha) d^2 2/(t_{j+2}-t_j) / Γ(1-alpha) * ∫_0^1 (1 - theta s)^(-alpha) (s - 1/2) ds
//! ```
//!
//! The closed forms evaluate these integrals through `expm1`/`ln1p` (and a
//! power series for the odd moment at small `theta`) so that cells far from
//! the star point do not lose digits to cancellation. The quadrature path
//! integrates the same normalised integrands with adaptive Gauss-Kronrod.

use super::SchemeParams;
use crate::error::{invalid, FracError, Result};
use crate::mesh::TemporalMesh;
use crate::quadrature::{integrate, QuadOptions};

/// How kernel integrals are evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    ClosedForm,
    Quadrature,
}

impl Method {
    pub fn as_str(&self) -> &'static str {
        match self {
            Method::ClosedForm => "closed-form",
            Method::Quadrature => "quadrature",
        }
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

const SERIES_SWITCH: f64 = 0.5;

/// Cell geometry relative to the star point `t_{k+1}^*`.
struct Cell {
    /// `t_{k+1}^* - t_j`
    x: f64,
    /// `tau_{j+1}`
    d: f64,
}

fn cell(k: usize, j: usize, mesh: &TemporalMesh, sigma: f64) -> Result<Cell> {
    let d = mesh.tau(j + 1);
    // t*_{k+1} - t_{j+1} = (t_k - t_{j+1}) + sigma tau_{k+1}
    let y = (mesh.t(k) - mesh.t(j + 1)) + sigma * mesh.tau(k + 1);
    if !(y > 0.0) {
        return Err(FracError::KernelDomain {
            k,
            j,
            star: mesh.star(k + 1, sigma),
            bound: mesh.t(j + 1),
        });
    }
    Ok(Cell { x: y + d, d })
}

fn check_indices(k: usize, j: usize, mesh: &TemporalMesh) -> Result<()> {
    if j > k {
        return Err(invalid("j", format!("need j <= k, got j={j}, k={k}")));
    }
    if k + 1 > mesh.n_steps() {
        return Err(invalid(
            "k",
            format!("k+1 = {} exceeds step count {}", k + 1, mesh.n_steps()),
        ));
    }
    Ok(())
}

/// `∫_0^1 (1 - theta s)^(-alpha) ds`, times `theta`, in closed form:
/// `(1 - (1-theta)^(1-alpha)) / (1-alpha)`.
fn zeroth_moment_scaled(theta: f64, alpha: f64) -> f64 {
    let p = 1.0 - alpha;
    -(p * (-theta).ln_1p()).exp_m1() / p
}

/// `∫_0^1 (1 - theta s)^(-alpha) (s - 1/2) ds` for `0 <= theta < 1`.
pub fn odd_moment(theta: f64, alpha: f64) -> f64 {
    if theta == 0.0 {
        return 0.0;
    }
    if theta < SERIES_SWITCH {
        // (1 - theta s)^(-alpha) = sum_m (alpha)_m / m! (theta s)^m and
        // ∫ s^m (s - 1/2) ds = m / (2 (m+1) (m+2)).
        let mut coef = 1.0;
        let mut power = 1.0;
        let mut sum = 0.0;
        for m in 1..400 {
            let mf = m as f64;
            coef *= (alpha + mf - 1.0) / mf;
            power *= theta;
            let term = coef * power * mf / (2.0 * (mf + 1.0) * (mf + 2.0));
            sum += term;
            if term.abs() <= 1e-18 * sum.abs() {
                break;
            }
        }
        sum
    } else {
        let p = 1.0 - alpha;
        let l = (-theta).ln_1p();
        let e1 = -(p * l).exp_m1();
        let e2 = -((p + 1.0) * l).exp_m1();
        let t2 = theta * theta;
        e1 / (p * t2) - e2 / ((p + 1.0) * t2) - e1 / (2.0 * p * theta)
    }
}

fn quad_opts() -> QuadOptions {
    QuadOptions::default()
}

/// `a_{k,j}` for `0 <= j <= k <= N-1`.
pub fn a_coeff(
    k: usize,
    j: usize,
    mesh: &TemporalMesh,
    params: &SchemeParams,
    method: Method,
) -> Result<f64> {
    check_indices(k, j, mesh)?;
    let alpha = params.alpha();
    let sigma = params.sigma();
    if j == k {
        let h = sigma * mesh.tau(k + 1);
        return Ok(match method {
            Method::ClosedForm => h.powf(1.0 - alpha) / params.gamma_2ma(),
            Method::Quadrature => {
                // Endpoint singularity removed by s = 1 - (1-v)^q, q = 2/(1-alpha).
                let q = 2.0 / (1.0 - alpha);
                let f = |v: f64| {
                    let w = (1.0 - v).powf(q);
                    w.powf(-alpha) * q * (1.0 - v).powf(q - 1.0)
                };
                let r = integrate(f, 0.0, 1.0, quad_opts());
                h.powf(1.0 - alpha) * r.value / params.gamma_1ma()
            }
        });
    }
    let Cell { x, d } = cell(k, j, mesh, sigma)?;
    let theta = d / x;
    Ok(match method {
        Method::ClosedForm => {
            x.powf(-alpha) * x * zeroth_moment_scaled(theta, alpha) / params.gamma_1ma()
        }
        Method::Quadrature => {
            let r = integrate(|s| (1.0 - theta * s).powf(-alpha), 0.0, 1.0, quad_opts());
            x.powf(-alpha) * d * r.value / params.gamma_1ma()
        }
    })
}

/// `b_{k,j}` for `k >= 1`, `0 <= j <= k-1`.
pub fn b_coeff(
    k: usize,
    j: usize,
    mesh: &TemporalMesh,
    params: &SchemeParams,
    method: Method,
) -> Result<f64> {
    check_indices(k, j, mesh)?;
    if k == 0 || j == k {
        return Err(invalid("j", format!("b is defined for k >= 1, j <= k-1; got k={k}, j={j}")));
    }
    let alpha = params.alpha();
    let Cell { x, d } = cell(k, j, mesh, params.sigma())?;
    let theta = d / x;
    let moment = match method {
        Method::ClosedForm => odd_moment(theta, alpha),
        Method::Quadrature => {
            // ∫ (s - 1/2) = 0, so subtract the constant part of the kernel.
            let f = |s: f64| (s - 0.5) * (-alpha * (-theta * s).ln_1p()).exp_m1();
            integrate(f, 0.0, 1.0, quad_opts()).value
        }
    };
    let span = mesh.tau(j + 1) + mesh.tau(j + 2);
    Ok(2.0 / span * x.powf(-alpha) * d * d * moment / params.gamma_1ma())
}
