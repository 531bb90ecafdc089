use std::io::Write;

use super::{a_coeff, b_coeff, Method, SchemeParams};
use crate::error::{invalid, FracError, Result};
use crate::mesh::TemporalMesh;
use crate::par;

/// One row of convolution weights, for step `n`.
#[derive(Debug, Clone, PartialEq)]
pub struct AlikhanovWeights {
    pub step: usize,
    /// `g[j-1] = g_{n-1,j-1}` for `j = 1..=n`.
    pub g: Vec<f64>,
    /// `a[j] = a_{n-1,j}` for `j = 0..=n-1`.
    pub a: Vec<f64>,
    /// `b[j] = b_{n-1,j}` for `j = 0..=n-2`.
    pub b: Vec<f64>,
    pub method: Method,
}

impl AlikhanovWeights {
    /// Leading weight `g_{n-1,n-1}`, the diagonal of the implicit step.
    pub fn diagonal(&self) -> f64 {
        *self.g.last().expect("a weight row is never empty")
    }

    /// Coefficients `p_{n,k}` of `sum_k p_{n,k} U^k`, `k = 0..=n`.
    pub fn p_coefficients(&self) -> Vec<f64> {
        p_from_g(&self.g)
    }
}

pub(crate) fn p_from_g(g: &[f64]) -> Vec<f64> {
    let n = g.len();
    let mut p = vec![0.0; n + 1];
    p[0] = -g[0];
    for k in 1..n {
        p[k] = g[k - 1] - g[k];
    }
    p[n] = g[n - 1];
    p
}

/// Weight row for step `1 <= n <= N`.
pub fn assemble_weights(
    n: usize,
    mesh: &TemporalMesh,
    params: &SchemeParams,
    method: Method,
) -> Result<AlikhanovWeights> {
    if n == 0 || n > mesh.n_steps() {
        return Err(invalid(
            "n",
            format!("step must lie in 1..={}, got {n}", mesh.n_steps()),
        ));
    }
    let k = n - 1;
    let a = (0..=k)
        .map(|j| a_coeff(k, j, mesh, params, method))
        .collect::<Result<Vec<_>>>()?;
    let b = (0..k)
        .map(|j| b_coeff(k, j, mesh, params, method))
        .collect::<Result<Vec<_>>>()?;
    let mut g = Vec::with_capacity(n);
    if k == 0 {
        g.push(a[0] / mesh.tau(1));
    } else {
        for j in 0..=k {
            let lower = if j > 0 { b[j - 1] } else { 0.0 };
            let upper = if j < k { b[j] } else { 0.0 };
            g.push((a[j] + lower - upper) / mesh.tau(j + 1));
        }
    }
    Ok(AlikhanovWeights {
        step: n,
        g,
        a,
        b,
        method,
    })
}

/// `sum_{j=1}^{n} g_{n-1,j-1} (U^j - U^{j-1})` for a scalar history `U^0..U^n`.
pub fn apply_discrete_derivative(weights: &AlikhanovWeights, history: &[f64]) -> Result<f64> {
    let n = weights.step;
    if history.len() != n + 1 {
        return Err(FracError::LengthMismatch {
            expected: n + 1,
            actual: history.len(),
        });
    }
    Ok(weights
        .g
        .iter()
        .zip(history.windows(2))
        .map(|(g, w)| g * (w[1] - w[0]))
        .sum())
}

/// All weight rows `n = 1..=N` of a mesh, stored contiguously.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightTable {
    n_steps: usize,
    method: Method,
    values: Vec<f64>,
}

impl WeightTable {
    /// Assemble every row; rows are independent and built in parallel.
    pub fn build(mesh: &TemporalMesh, params: &SchemeParams, method: Method) -> Result<Self> {
        Self::build_upto(mesh, params, method, mesh.n_steps())
    }

    /// Rows `1..=n_max` only.
    pub fn build_upto(
        mesh: &TemporalMesh,
        params: &SchemeParams,
        method: Method,
        n_max: usize,
    ) -> Result<Self> {
        let n_max = n_max.min(mesh.n_steps());
        let rows = par::map_indexed(n_max, |i| {
            assemble_weights(i + 1, mesh, params, method).map(|w| w.g)
        });
        let mut values = Vec::with_capacity(n_max * (n_max + 1) / 2);
        for row in rows {
            values.extend(row?);
        }
        Ok(Self {
            n_steps: n_max,
            method,
            values,
        })
    }

    pub fn n_steps(&self) -> usize {
        self.n_steps
    }

    pub fn method(&self) -> Method {
        self.method
    }

    /// `g_{n-1, 0..n-1}` for step `1 <= n <= n_steps`.
    #[inline]
    pub fn row(&self, n: usize) -> &[f64] {
        let start = (n - 1) * n / 2;
        &self.values[start..start + n]
    }

    /// `p_{n,0..=n}`.
    pub fn p_row(&self, n: usize) -> Vec<f64> {
        p_from_g(self.row(n))
    }

    /// Scalar discrete derivative at step `n` from `U^0..U^n`.
    pub fn derivative(&self, n: usize, history: &[f64]) -> Result<f64> {
        if history.len() != n + 1 {
            return Err(FracError::LengthMismatch {
                expected: n + 1,
                actual: history.len(),
            });
        }
        Ok(self
            .row(n)
            .iter()
            .zip(history.windows(2))
            .map(|(g, w)| g * (w[1] - w[0]))
            .sum())
    }
}

/// Dump rows `1..=n_max` as `n,j,g,a,b,method`; `b` is empty for `j = n`.
pub fn write_weights_csv<W: Write>(
    mut w: W,
    mesh: &TemporalMesh,
    params: &SchemeParams,
    method: Method,
    n_max: usize,
) -> Result<()> {
    writeln!(w, "n,j,g,a,b,method")?;
    for n in 1..=n_max.min(mesh.n_steps()) {
        let row = assemble_weights(n, mesh, params, method)?;
        for j in 1..=n {
            let b = row.b.get(j - 1).map(|b| b.to_string()).unwrap_or_default();
            writeln!(w, "{n},{j},{},{},{b},{}", row.g[j - 1], row.a[j - 1], method)?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn first_row_closed_form() {
        let mesh = TemporalMesh::graded(1.0, 16, 2.0).unwrap();
        let p = SchemeParams::new(0.5).unwrap();
        let w = assemble_weights(1, &mesh, &p, Method::ClosedForm).unwrap();
        let tau1 = mesh.tau(1);
        let expected = p.sigma().powf(0.5) * tau1.powf(0.5) / p.gamma_2ma() / tau1;
        assert_eq!(w.g.len(), 1);
        assert!(((w.g[0] - expected) / expected).abs() < 1e-14);
    }

    #[test]
    fn constant_history_has_zero_derivative() {
        let mesh = TemporalMesh::graded(1.0, 20, 2.0).unwrap();
        let p = SchemeParams::new(0.3).unwrap();
        let w = assemble_weights(20, &mesh, &p, Method::ClosedForm).unwrap();
        let d = apply_discrete_derivative(&w, &[5.0; 21]).unwrap();
        assert_eq!(d, 0.0);
        assert!(apply_discrete_derivative(&w, &[5.0; 20]).is_err());
    }

    #[test]
    fn p_row_sums_to_zero() {
        let mesh = TemporalMesh::graded(1.0, 32, 3.0).unwrap();
        let p = SchemeParams::new(0.7).unwrap();
        let table = WeightTable::build(&mesh, &p, Method::ClosedForm).unwrap();
        for n in 1..=32 {
            let pr = table.p_row(n);
            let scale = pr[n];
            assert!(pr[n] > 0.0);
            assert!(pr[..n].iter().all(|&v| v < 0.0), "row {n}");
            assert!(pr.iter().sum::<f64>().abs() < 1e-12 * scale);
        }
    }

    #[test]
    fn table_matches_single_rows() {
        let mesh = TemporalMesh::graded(0.5, 12, 2.0).unwrap();
        let p = SchemeParams::new(0.5).unwrap();
        let table = WeightTable::build(&mesh, &p, Method::ClosedForm).unwrap();
        for n in 1..=12 {
            let w = assemble_weights(n, &mesh, &p, Method::ClosedForm).unwrap();
            assert_eq!(table.row(n), &w.g[..]);
        }
    }

    #[test]
    fn weights_csv_rows() {
        let mesh = TemporalMesh::uniform(1.0, 3).unwrap();
        let p = SchemeParams::new(0.5).unwrap();
        let mut buf = Vec::new();
        write_weights_csv(&mut buf, &mesh, &p, Method::ClosedForm, 3).unwrap();
        let s = String::from_utf8(buf).unwrap();
        assert_eq!(s.lines().count(), 1 + 1 + 2 + 3);
        assert!(s.lines().nth(1).unwrap().ends_with(",,closed-form"));
    }
}
