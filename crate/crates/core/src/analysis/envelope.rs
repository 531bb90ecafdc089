//! Pointwise-in-time error envelope
//! `‖e^n‖ <= C (tau_1 t_n^(α-1) + tau_1^(2/r) t_n^(2α-2/r) + h^2 t_n^α)`.

use super::ErrorSeries;
use crate::error::{invalid, Result};
use crate::mesh::{SpatialGrid, TemporalMesh};

/// The bracket of the envelope at step `n >= 1`; `h^2 = h1^2 + h2^2`.
pub fn envelope_bound(mesh: &TemporalMesh, grid: &SpatialGrid, alpha: f64, n: usize) -> f64 {
    let r = mesh.grading().unwrap_or(1.0);
    let tau1 = mesh.tau(1);
    let t = mesh.t(n);
    let h2 = grid.h1 * grid.h1 + grid.h2 * grid.h2;
    tau1 * t.powf(alpha - 1.0) + tau1.powf(2.0 / r) * t.powf(2.0 * alpha - 2.0 / r) + h2 * t.powf(alpha)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnvelopeFit {
    /// `max_n ‖e^n‖ / bound_n`.
    pub constant: f64,
    pub argmax: usize,
}

impl EnvelopeFit {
    /// Largest `‖e^n‖ / (C bound_n)` of another series; `<= margin` validates the fit.
    pub fn worst_ratio(
        &self,
        series: &ErrorSeries,
        mesh: &TemporalMesh,
        grid: &SpatialGrid,
        alpha: f64,
    ) -> f64 {
        (1..series.errors.len())
            .map(|n| series.errors[n] / (self.constant * envelope_bound(mesh, grid, alpha, n)))
            .fold(0.0, f64::max)
    }
}

pub fn fit_envelope(
    series: &ErrorSeries,
    mesh: &TemporalMesh,
    grid: &SpatialGrid,
    alpha: f64,
) -> Result<EnvelopeFit> {
    if series.errors.len() != mesh.n_steps() + 1 {
        return Err(invalid("series", "error series does not match the mesh"));
    }
    let mut out = EnvelopeFit {
        constant: 0.0,
        argmax: 0,
    };
    for n in 1..=mesh.n_steps() {
        let c = series.errors[n] / envelope_bound(mesh, grid, alpha, n);
        if c > out.constant {
            out = EnvelopeFit { constant: c, argmax: n };
        }
    }
    Ok(out)
}
