//! Scalar stability recurrence.
//!
//! Marches `(δ - λ1) v^j - λ2 v^{j-1} = (tau_1 / t_j)^(γ+1)` with `v^0 = 0`
//! and measures `v^j` against `V(j, γ) = tau_1 t_j^(α-1) (tau_1/t_j)^min(0,γ)`.

use std::io::Write;

use super::{Method, SchemeParams, WeightTable};
use crate::error::{invalid, FracError, Result};
use crate::mesh::TemporalMesh;

#[derive(Debug, Clone)]
pub struct RecurrenceSpec {
    pub params: SchemeParams,
    pub mesh: TemporalMesh,
    pub gamma: f64,
    pub lambda1: f64,
    pub lambda2: f64,
    /// Multiplier on the right-hand side; `0` gives the homogeneous problem.
    pub rhs_scale: f64,
}

impl RecurrenceSpec {
    pub fn new(params: SchemeParams, mesh: TemporalMesh, gamma: f64, lambda1: f64, lambda2: f64) -> Self {
        Self {
            params,
            mesh,
            gamma,
            lambda1,
            lambda2,
            rhs_scale: 1.0,
        }
    }

    /// `V(j, γ)` for `j >= 1`.
    pub fn bound(&self, j: usize) -> f64 {
        let tau1 = self.mesh.tau(1);
        let t = self.mesh.t(j);
        tau1 * t.powf(self.params.alpha() - 1.0) * (tau1 / t).powf(self.gamma.min(0.0))
    }
}

/// Whether `(r, γ)` is covered by the uniform bound: `γ != 0` and either
/// `1 <= r <= (3-α)/α`, or `r >= 1` with `γ <= α - 1`.
pub fn is_admissible(alpha: f64, grading: f64, gamma: f64) -> bool {
    gamma != 0.0
        && grading >= 1.0
        && (grading <= (3.0 - alpha) / alpha || gamma <= alpha - 1.0)
}

#[derive(Debug, Clone, PartialEq)]
pub struct RecurrenceResult {
    /// `v^0..v^N`.
    pub v: Vec<f64>,
    /// `V(j, γ)` for `j = 1..=N` (index 0 holds `j = 1`).
    pub bound: Vec<f64>,
    /// `max_j v^j / V(j, γ)`.
    pub constant: f64,
    pub argmax: usize,
}

impl RecurrenceResult {
    /// `j, t_j, v_j, V(j,γ), ratio`.
    pub fn write_csv<W: Write>(&self, mut w: W, mesh: &TemporalMesh) -> std::io::Result<()> {
        writeln!(w, "j,t_j,v_j,V,ratio")?;
        for (i, bound) in self.bound.iter().enumerate() {
            let j = i + 1;
            writeln!(w, "{j},{},{},{bound},{}", mesh.t(j), self.v[j], self.v[j] / bound)?;
        }
        Ok(())
    }
}

pub fn solve_scalar_recurrence(spec: &RecurrenceSpec) -> Result<RecurrenceResult> {
    if spec.gamma == 0.0 {
        return Err(invalid("gamma", "the bound excludes gamma = 0"));
    }
    if !(spec.lambda1 >= 0.0 && spec.lambda2 >= 0.0) {
        return Err(invalid(
            "lambda",
            format!("need lambda1, lambda2 >= 0, got {}, {}", spec.lambda1, spec.lambda2),
        ));
    }
    let alpha = spec.params.alpha();
    let lhs = spec.lambda1 * spec.mesh.tau_max().powf(alpha);
    let rhs = 1.0 / (2.0 * spec.params.gamma_2ma());
    if lhs > rhs {
        return Err(FracError::StepSizeCondition { lhs, rhs });
    }

    let mesh = &spec.mesh;
    let n_steps = mesh.n_steps();
    let table = WeightTable::build(mesh, &spec.params, Method::ClosedForm)?;
    let tau1 = mesh.tau(1);
    let mut v = vec![0.0; n_steps + 1];
    let mut dv = vec![0.0; n_steps + 1];
    for j in 1..=n_steps {
        let g = table.row(j);
        let history: f64 = g[..j - 1].iter().zip(&dv[1..j]).map(|(g, d)| g * d).sum();
        let forcing = spec.rhs_scale * (tau1 / mesh.t(j)).powf(spec.gamma + 1.0);
        let diag = g[j - 1];
        v[j] = (forcing - history + (diag + spec.lambda2) * v[j - 1]) / (diag - spec.lambda1);
        dv[j] = v[j] - v[j - 1];
    }

    let bound: Vec<f64> = (1..=n_steps).map(|j| spec.bound(j)).collect();
    let (argmax, constant) = bound
        .iter()
        .enumerate()
        .map(|(i, b)| (i + 1, v[i + 1] / b))
        .fold((1, f64::NEG_INFINITY), |acc, x| if x.1 > acc.1 { x } else { acc });
    Ok(RecurrenceResult {
        v,
        bound,
        constant,
        argmax,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(n: usize, gamma: f64, l1: f64, l2: f64) -> RecurrenceSpec {
        let p = SchemeParams::new(0.5).unwrap();
        RecurrenceSpec::new(p, TemporalMesh::graded(1.0, n, 2.0).unwrap(), gamma, l1, l2)
    }

    #[test]
    fn zero_forcing_stays_zero() {
        let mut s = spec(64, -0.5, 0.5, 0.5);
        s.rhs_scale = 0.0;
        let r = solve_scalar_recurrence(&s).unwrap();
        assert!(r.v.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn comparison_principle_keeps_sign() {
        let r = solve_scalar_recurrence(&spec(256, -0.5, 0.5, 0.5)).unwrap();
        assert!(r.v[1..].iter().all(|&v| v > 0.0));
    }

    #[test]
    fn refuses_gamma_zero_and_negative_lambda() {
        assert!(solve_scalar_recurrence(&spec(16, 0.0, 0.0, 0.0)).is_err());
        assert!(solve_scalar_recurrence(&spec(16, 0.5, -1.0, 0.0)).is_err());
    }

    #[test]
    fn refuses_large_lambda_on_coarse_mesh() {
        let err = solve_scalar_recurrence(&spec(4, 0.5, 100.0, 0.0)).unwrap_err();
        assert!(matches!(err, FracError::StepSizeCondition { .. }));
    }

    #[test]
    fn admissibility() {
        assert!(is_admissible(0.5, 2.0, 0.5));
        assert!(!is_admissible(0.5, 2.0, 0.0));
        // r = 6 > (3 - 0.5)/0.5 = 5: only gamma <= alpha - 1 qualifies
        assert!(!is_admissible(0.5, 6.0, -0.4));
        assert!(is_admissible(0.5, 6.0, -0.5));
    }
}
