use crate::error::{FracError, Result};
use crate::par;
use crate::problem::ProblemSpec;
use crate::solver::{march, Solution};
use crate::linsolve::{self, SolveOptions};
use crate::spatial::{apply_laplacian, l2_norm, laplacian_matrix, GridFunction2D};

/// Per-step discrete L² errors of a trajectory against the exact solution.
#[derive(Debug, Clone, PartialEq)]
pub struct ErrorSeries {
    /// `t_0..t_N`.
    pub times: Vec<f64>,
    /// `‖e^0‖..‖e^N‖`.
    pub errors: Vec<f64>,
}

impl ErrorSeries {
    /// `E_L = ‖e^N‖`.
    pub fn local(&self) -> f64 {
        *self.errors.last().unwrap_or(&0.0)
    }

    /// `E_G = max_{n >= 1} ‖e^n‖`.
    pub fn global(&self) -> f64 {
        self.errors.iter().skip(1).copied().fold(0.0, f64::max)
    }
}

pub fn error_series(solution: &Solution, spec: &ProblemSpec) -> Result<ErrorSeries> {
    let exact = spec.exact.as_ref().ok_or(FracError::MissingExactSolution)?;
    let grid = solution.grid;
    let times = solution.mesh.points().to_vec();
    let errors = solution
        .trajectory
        .iter()
        .zip(&times)
        .map(|(u, &t)| {
            let e = GridFunction2D::from_fn(grid, |x, y| (exact.u)(x, y, t));
            let diff: Vec<f64> = u.values().iter().zip(e.values()).map(|(a, b)| a - b).collect();
            l2_norm(&grid, &diff)
        })
        .collect();
    Ok(ErrorSeries { times, errors })
}

/// Final states `U^N` for each step count, marched independently (in parallel).
pub fn march_final_states(spec: &ProblemSpec, ns: &[usize]) -> Result<Vec<GridFunction2D>> {
    par::map_items(ns, |&n| march(&spec.with_steps(n)).map(|s| s.final_state().clone()))
        .into_iter()
        .collect()
}

/// `‖U^N − V^{2N}‖`; both meshes end at `T`, so the final states are comparable.
pub fn two_mesh_error(spec: &ProblemSpec, n: usize) -> Result<f64> {
    let finals = march_final_states(spec, &[n, 2 * n])?;
    Ok(finals[0].sub(&finals[1]).l2_norm())
}

/// Two-mesh errors for every `N` in `ns`, marching each distinct step count once.
pub fn two_mesh_series(spec: &ProblemSpec, ns: &[usize]) -> Result<Vec<f64>> {
    let mut all: Vec<usize> = ns.iter().flat_map(|&n| [n, 2 * n]).collect();
    all.sort_unstable();
    all.dedup();
    let finals = march_final_states(spec, &all)?;
    let lookup = |n: usize| &finals[all.binary_search(&n).expect("step count was marched")];
    Ok(ns.iter().map(|&n| lookup(n).sub(lookup(2 * n)).l2_norm()).collect())
}

/// Size of the spatial error floor at `T`, estimated by the elliptic
/// correction `‖L_h^{-1} (L_h − L) u(T)‖`.
///
/// `None` when the spec has no exact solution with a known Laplacian.
pub fn spatial_floor(spec: &ProblemSpec) -> Result<Option<f64>> {
    let Some(exact) = spec.exact.as_ref() else {
        return Ok(None);
    };
    let Some(lap) = exact.laplacian.as_ref() else {
        return Ok(None);
    };
    let grid = spec.grid()?;
    let t = spec.t_final;
    let u = GridFunction2D::from_fn(grid, |x, y| (exact.u)(x, y, t));
    let lu = GridFunction2D::from_fn(grid, |x, y| -spec.nu * lap(x, y, t));
    let defect = apply_laplacian(&u, spec.nu).sub(&lu);
    let a = laplacian_matrix(&grid, spec.nu);
    let zero = vec![0.0; grid.len()];
    let (e, _) = linsolve::solve(&a, defect.values(), &zero, &SolveOptions::default())
        .map_err(|reason| FracError::LinearSolve { step: 0, reason })?;
    Ok(Some(l2_norm(&grid, &e)))
}
