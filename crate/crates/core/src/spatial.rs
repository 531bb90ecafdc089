//! Five-point Laplacian with homogeneous Dirichlet data, and discrete norms.

use std::io::Write;

use crate::error::{FracError, Result};
use crate::linsolve::CsrMatrix;
use crate::mesh::SpatialGrid;
use crate::par;

/// Values at the interior nodes of a [`SpatialGrid`], row-major in `y`.
///
/// Boundary values are zero and never stored.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction2D {
    grid: SpatialGrid,
    values: Vec<f64>,
}

impl GridFunction2D {
    pub fn zeros(grid: SpatialGrid) -> Self {
        Self {
            grid,
            values: vec![0.0; grid.len()],
        }
    }

    pub fn from_values(grid: SpatialGrid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(FracError::LengthMismatch {
                expected: grid.len(),
                actual: values.len(),
            });
        }
        Ok(Self { grid, values })
    }

    /// Sample `f(x, y)` at interior nodes.
    pub fn from_fn(grid: SpatialGrid, f: impl Fn(f64, f64) -> f64) -> Self {
        let values = (0..grid.len())
            .map(|k| {
                let (i, j) = grid.node(k);
                f(grid.x(i), grid.y(j))
            })
            .collect();
        Self { grid, values }
    }

    pub fn grid(&self) -> &SpatialGrid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    /// Value at interior node `(i, j)`.
    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.values[self.grid.index(i, j)]
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self {
            grid: self.grid,
            values: self.values.iter().map(|v| c * v).collect(),
        }
    }

    /// `self - other`.
    pub fn sub(&self, other: &Self) -> Self {
        Self {
            grid: self.grid,
            values: self.values.iter().zip(&other.values).map(|(a, b)| a - b).collect(),
        }
    }

    /// Discrete inner product `h1 h2 sum u v`.
    pub fn inner(&self, other: &Self) -> f64 {
        inner(&self.grid, &self.values, &other.values)
    }

    /// `||v|| = sqrt((v, v))`.
    pub fn l2_norm(&self) -> f64 {
        l2_norm(&self.grid, &self.values)
    }

    /// `||v||_inf = max |v|`.
    pub fn max_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// `|v|_2 = ||L_h v|| / nu`.
    pub fn seminorm2(&self, nu: f64) -> f64 {
        apply_laplacian(self, nu).l2_norm() / nu
    }

    /// Write `i,j,x,y,value` for every interior node.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "i,j,x,y,value")?;
        for (k, v) in self.values.iter().enumerate() {
            let (i, j) = self.grid.node(k);
            writeln!(w, "{i},{j},{},{},{v}", self.grid.x(i), self.grid.y(j))?;
        }
        Ok(())
    }
}

pub(crate) fn inner(grid: &SpatialGrid, u: &[f64], v: &[f64]) -> f64 {
    grid.h1 * grid.h2 * u.iter().zip(v).map(|(a, b)| a * b).sum::<f64>()
}

/// `sqrt(h1 h2 sum v^2)` over a raw interior vector.
pub fn l2_norm(grid: &SpatialGrid, v: &[f64]) -> f64 {
    inner(grid, v, v).sqrt()
}

/// `out = L_h v = -nu Δ_h v` with zero boundary values; parallel over rows.
pub fn laplacian_into(grid: &SpatialGrid, nu: f64, v: &[f64], out: &mut [f64]) {
    let nx = grid.nx();
    let ny = grid.ny();
    let cx = nu / (grid.h1 * grid.h1);
    let cy = nu / (grid.h2 * grid.h2);
    par::for_each_chunk_mut(out, nx, |offset, row| {
        let j = offset / nx;
        let here = &v[offset..offset + nx];
        let below = (j > 0).then(|| &v[offset - nx..offset]);
        let above = (j + 1 < ny).then(|| &v[offset + nx..offset + 2 * nx]);
        for i in 0..nx {
            let c = here[i];
            let west = if i > 0 { here[i - 1] } else { 0.0 };
            let east = if i + 1 < nx { here[i + 1] } else { 0.0 };
            let south = below.map_or(0.0, |b| b[i]);
            let north = above.map_or(0.0, |a| a[i]);
            row[i] = cx * (2.0 * c - west - east) + cy * (2.0 * c - south - north);
        }
    });
}

/// `L_h v = -nu Δ_h v`.
pub fn apply_laplacian(v: &GridFunction2D, nu: f64) -> GridFunction2D {
    let mut out = GridFunction2D::zeros(v.grid);
    laplacian_into(&v.grid, nu, &v.values, &mut out.values);
    out
}

/// Assembled sparse form of `L_h`, entries ordered to match [`laplacian_into`].
pub fn laplacian_matrix(grid: &SpatialGrid, nu: f64) -> CsrMatrix {
    let nx = grid.nx();
    let ny = grid.ny();
    let cx = nu / (grid.h1 * grid.h1);
    let cy = nu / (grid.h2 * grid.h2);
    let n = grid.len();
    let mut row_ptr = Vec::with_capacity(n + 1);
    let mut cols = Vec::with_capacity(5 * n);
    let mut vals = Vec::with_capacity(5 * n);
    row_ptr.push(0);
    for j in 0..ny {
        for i in 0..nx {
            let k = j * nx + i;
            if j > 0 {
                cols.push(k - nx);
                vals.push(-cy);
            }
            if i > 0 {
                cols.push(k - 1);
                vals.push(-cx);
            }
            cols.push(k);
            vals.push(2.0 * cx + 2.0 * cy);
            if i + 1 < nx {
                cols.push(k + 1);
                vals.push(-cx);
            }
            if j + 1 < ny {
                cols.push(k + nx);
                vals.push(-cy);
            }
            row_ptr.push(cols.len());
        }
    }
    CsrMatrix::new(n, row_ptr, cols, vals)
}
