//! Sparse symmetric solves: Jacobi-preconditioned CG with a dense LU fallback.

use nalgebra::{DMatrix, DVector};

/// Compressed sparse row matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    n: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<f64>,
}

impl CsrMatrix {
    pub fn new(n: usize, row_ptr: Vec<usize>, cols: Vec<usize>, vals: Vec<f64>) -> Self {
        assert_eq!(row_ptr.len(), n + 1);
        assert_eq!(cols.len(), vals.len());
        Self {
            n,
            row_ptr,
            cols,
            vals,
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    /// `out = A x`.
    pub fn mul_vec(&self, x: &[f64], out: &mut [f64]) {
        for (r, o) in out.iter_mut().enumerate() {
            let span = self.row_ptr[r]..self.row_ptr[r + 1];
            *o = self.cols[span.clone()]
                .iter()
                .zip(&self.vals[span])
                .map(|(&c, v)| v * x[c])
                .sum();
        }
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        let span = self.row_ptr[r]..self.row_ptr[r + 1];
        self.cols[span.clone()]
            .iter()
            .position(|&cc| cc == c)
            .map_or(0.0, |p| self.vals[span.start + p])
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n).map(|r| self.get(r, r)).collect()
    }

    /// `c A + diag(d)`; every row must already store its diagonal entry.
    pub fn scaled_plus_diagonal(&self, c: f64, d: &[f64]) -> Self {
        let mut out = self.clone();
        for (r, &dr) in d.iter().enumerate().take(self.n) {
            for p in out.row_ptr[r]..out.row_ptr[r + 1] {
                out.vals[p] *= c;
                if out.cols[p] == r {
                    out.vals[p] += dr;
                }
            }
        }
        out
    }

    pub fn is_symmetric(&self, tol: f64) -> bool {
        (0..self.n).all(|r| {
            (self.row_ptr[r]..self.row_ptr[r + 1])
                .all(|p| (self.vals[p] - self.get(self.cols[p], r)).abs() <= tol)
        })
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.n, self.n);
        for r in 0..self.n {
            for p in self.row_ptr[r]..self.row_ptr[r + 1] {
                m[(r, self.cols[p])] = self.vals[p];
            }
        }
        m
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveOptions {
    /// CG keeps iterating until the relative residual drops below this.
    pub target_tol: f64,
    /// A result is accepted if its true relative residual is below this.
    pub accept_tol: f64,
    /// Iteration budget as a multiple of the unknown count.
    pub budget_factor: usize,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            target_tol: 1e-14,
            accept_tol: 1e-12,
            budget_factor: 10,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveMethod {
    Cg,
    DenseLu,
    Trivial,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveReport {
    pub method: SolveMethod,
    pub iterations: usize,
    /// True relative residual `||b - A x|| / ||b||`.
    pub residual: f64,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

fn true_residual(a: &CsrMatrix, x: &[f64], b: &[f64]) -> f64 {
    let mut ax = vec![0.0; b.len()];
    a.mul_vec(x, &mut ax);
    let r: Vec<f64> = b.iter().zip(&ax).map(|(b, ax)| b - ax).collect();
    norm(&r) / norm(b)
}

/// Jacobi-preconditioned conjugate gradients from `x` (updated in place).
///
/// Returns the iteration count, or `None` on breakdown (non-positive
/// curvature or preconditioner).
fn pcg(a: &CsrMatrix, b: &[f64], x: &mut [f64], opts: &SolveOptions) -> Option<usize> {
    let n = b.len();
    let diag = a.diagonal();
    if diag.iter().any(|&d| !(d > 0.0)) {
        return None;
    }
    let b_norm = norm(b);
    let mut r = vec![0.0; n];
    a.mul_vec(x, &mut r);
    for (ri, bi) in r.iter_mut().zip(b) {
        *ri = bi - *ri;
    }
    let mut z: Vec<f64> = r.iter().zip(&diag).map(|(r, d)| r / d).collect();
    let mut p = z.clone();
    let mut ap = vec![0.0; n];
    let mut rz = dot(&r, &z);
    let budget = opts.budget_factor.max(1) * n.max(1);
    let mut best = f64::INFINITY;
    let mut since_best = 0;
    for it in 0..budget {
        let rel = norm(&r) / b_norm;
        if rel <= opts.target_tol {
            return Some(it);
        }
        if rel < best * 0.99 {
            best = rel;
            since_best = 0;
        } else {
            since_best += 1;
            // Stagnated at the roundoff floor.
            if since_best > 50 && best <= opts.accept_tol {
                return Some(it);
            }
        }
        a.mul_vec(&p, &mut ap);
        let pap = dot(&p, &ap);
        if !(pap > 0.0) {
            return None;
        }
        let step = rz / pap;
        for i in 0..n {
            x[i] += step * p[i];
            r[i] -= step * ap[i];
            z[i] = r[i] / diag[i];
        }
        let rz_next = dot(&r, &z);
        let beta = rz_next / rz;
        rz = rz_next;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    Some(budget)
}

fn dense_lu(a: &CsrMatrix, b: &[f64]) -> Option<Vec<f64>> {
    let lu = a.to_dense().lu();
    lu.solve(&DVector::from_column_slice(b))
        .map(|x| x.as_slice().to_vec())
        .filter(|x| x.iter().all(|v| v.is_finite()))
}

/// Solve `A x = b` starting from `guess`.
///
/// Falls back to dense LU when CG breaks down or misses the acceptance
/// tolerance. `Err` carries a description when both paths fail.
pub fn solve(
    a: &CsrMatrix,
    b: &[f64],
    guess: &[f64],
    opts: &SolveOptions,
) -> Result<(Vec<f64>, SolveReport), String> {
    if b.iter().all(|&v| v == 0.0) {
        return Ok((
            vec![0.0; b.len()],
            SolveReport {
                method: SolveMethod::Trivial,
                iterations: 0,
                residual: 0.0,
            },
        ));
    }
    let mut x = guess.to_vec();
    if let Some(iterations) = pcg(a, b, &mut x, opts) {
        let residual = true_residual(a, &x, b);
        if residual <= opts.accept_tol {
            return Ok((
                x,
                SolveReport {
                    method: SolveMethod::Cg,
                    iterations,
                    residual,
                },
            ));
        }
    }
    let x = dense_lu(a, b).ok_or_else(|| "matrix is singular".to_string())?;
    let residual = true_residual(a, &x, b);
    if residual <= opts.accept_tol {
        Ok((
            x,
            SolveReport {
                method: SolveMethod::DenseLu,
                iterations: 0,
                residual,
            },
        ))
    } else {
        Err(format!("direct fallback residual {residual:.3e} exceeds tolerance"))
    }
}
