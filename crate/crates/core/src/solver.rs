//! The linearized fully discrete march.
//!
//! Each step solves
//!
//! ```text
//! (g_{n-1,n-1} I + sigma L_h - sigma diag(N'(U^{n-1}))) U^n
//!     = g_{n-1,n-1} U^{n-1} - sum_{j<n} g_{n-1,j-1} (U^j - U^{j-1})
//!       - (1-sigma) L_h U^{n-1} + N(U^{n-1}) - sigma N'(U^{n-1}) U^{n-1} + s(t_n^*)
//! ```
//!
//! which is the scheme with `U^{n,*} = sigma U^n + (1-sigma) U^{n-1}` split
//! across both sides.

use std::time::{Duration, Instant};

use crate::error::{FracError, Result};
use crate::kernel::{AlikhanovWeights, Method, SchemeParams, WeightTable};
use crate::linsolve::{self, CsrMatrix, SolveMethod, SolveOptions};
use crate::mesh::{validate_mesh, SpatialGrid, TemporalMesh};
use crate::par;
use crate::problem::ProblemSpec;
use crate::spatial::{laplacian_into, laplacian_matrix, GridFunction2D};

/// Nodes per work unit in the history accumulation.
const HISTORY_CHUNK: usize = 1024;

/// Linear system for one time step.
#[derive(Debug, Clone)]
pub struct StepSystem {
    pub step: usize,
    pub matrix: CsrMatrix,
    pub rhs: Vec<f64>,
    pub sigma: f64,
}

impl StepSystem {
    /// `A x - rhs`.
    pub fn residual(&self, x: &[f64]) -> Vec<f64> {
        let mut ax = vec![0.0; x.len()];
        self.matrix.mul_vec(x, &mut ax);
        ax.iter().zip(&self.rhs).map(|(a, b)| a - b).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepDiagnostics {
    pub method: SolveMethod,
    pub iterations: usize,
    pub residual: f64,
    pub wall: Duration,
}

/// A marched trajectory `U^0..U^N`.
#[derive(Debug, Clone)]
pub struct Solution {
    pub spec_hash: String,
    pub mesh: TemporalMesh,
    pub grid: SpatialGrid,
    pub trajectory: Vec<GridFunction2D>,
    /// One entry per step `1..=N`.
    pub diagnostics: Vec<StepDiagnostics>,
}

impl Solution {
    pub fn final_state(&self) -> &GridFunction2D {
        self.trajectory.last().expect("trajectory holds U^0")
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MarchOptions {
    pub solve: SolveOptions,
    /// Refuse meshes that fail the step-ratio hypotheses instead of warning.
    pub strict_mesh: bool,
    pub method: Method,
}

impl Default for MarchOptions {
    fn default() -> Self {
        Self {
            solve: SolveOptions::default(),
            strict_mesh: false,
            method: Method::ClosedForm,
        }
    }
}

/// `acc = sum_j g[j-1] * increments[j-1]`, parallel over node chunks.
///
/// Every node sums its terms in index order, so the result does not depend
/// on how the nodes are split across threads.
pub fn history_sum(g: &[f64], increments: &[Vec<f64>], acc: &mut [f64]) {
    debug_assert!(g.len() >= increments.len());
    par::for_each_chunk_mut(acc, HISTORY_CHUNK, |offset, out| {
        out.iter_mut().for_each(|v| *v = 0.0);
        let end = offset + out.len();
        for (w, inc) in g.iter().zip(increments) {
            for (o, d) in out.iter_mut().zip(&inc[offset..end]) {
                *o += w * d;
            }
        }
    });
}

/// Shared state for assembling steps of one problem.
struct Stepper<'a> {
    spec: &'a ProblemSpec,
    grid: SpatialGrid,
    mesh: TemporalMesh,
    sigma: f64,
    lap: CsrMatrix,
    /// Interior node coordinates.
    coords: Vec<(f64, f64)>,
}

impl<'a> Stepper<'a> {
    fn new(spec: &'a ProblemSpec) -> Result<Self> {
        spec.validate()?;
        let grid = spec.grid()?;
        let coords = (0..grid.len())
            .map(|k| {
                let (i, j) = grid.node(k);
                (grid.x(i), grid.y(j))
            })
            .collect();
        Ok(Self {
            spec,
            grid,
            mesh: spec.mesh()?,
            sigma: spec.params()?.sigma(),
            lap: laplacian_matrix(&grid, spec.nu),
            coords,
        })
    }

    fn source(&self, n: usize) -> Vec<f64> {
        let t_star = self.mesh.star(n, self.sigma);
        self.coords
            .iter()
            .map(|&(x, y)| self.spec.source_at(x, y, t_star))
            .collect()
    }

    /// Newton-linearized step.
    fn assemble(&self, n: usize, g: &[f64], prev: &[f64], increments: &[Vec<f64>]) -> StepSystem {
        let sigma = self.sigma;
        let diag_w = g[n - 1];
        let len = prev.len();
        let mut hist = vec![0.0; len];
        history_sum(&g[..n - 1], increments, &mut hist);
        let mut lap_prev = vec![0.0; len];
        laplacian_into(&self.grid, self.spec.nu, prev, &mut lap_prev);
        let src = self.source(n);
        let reaction = &self.spec.reaction;
        let mut diag = vec![0.0; len];
        let mut rhs = vec![0.0; len];
        for k in 0..len {
            let u = prev[k];
            let dn = reaction.derivative(u);
            diag[k] = diag_w - sigma * dn;
            rhs[k] = diag_w * u - hist[k] - (1.0 - sigma) * lap_prev[k] + reaction.value(u)
                - sigma * dn * u
                + src[k];
        }
        StepSystem {
            step: n,
            matrix: self.lap.scaled_plus_diagonal(sigma, &diag),
            rhs,
            sigma,
        }
    }

    /// Plain implicit step for `N(u) = c u`, with `c U^{n,*}` kept on the left.
    fn assemble_linear(
        &self,
        c: f64,
        n: usize,
        g: &[f64],
        prev: &[f64],
        increments: &[Vec<f64>],
    ) -> StepSystem {
        let sigma = self.sigma;
        let diag_w = g[n - 1];
        let len = prev.len();
        let mut hist = vec![0.0; len];
        history_sum(&g[..n - 1], increments, &mut hist);
        let mut lap_prev = vec![0.0; len];
        laplacian_into(&self.grid, self.spec.nu, prev, &mut lap_prev);
        let src = self.source(n);
        // (delta + L_h - c) U^{n,*} = s
        let diag = vec![diag_w - sigma * c; len];
        let rhs = (0..len)
            .map(|k| diag_w * prev[k] - hist[k] - (1.0 - sigma) * (lap_prev[k] - c * prev[k]) + src[k])
            .collect();
        StepSystem {
            step: n,
            matrix: self.lap.scaled_plus_diagonal(sigma, &diag),
            rhs,
            sigma,
        }
    }
}

/// Assemble step `n` from the history `U^0..U^{n-1}` and the weight row for step `n`.
pub fn assemble_step(
    n: usize,
    history: &[GridFunction2D],
    weights: &AlikhanovWeights,
    spec: &ProblemSpec,
) -> Result<StepSystem> {
    if weights.step != n {
        return Err(FracError::StepMismatch {
            weights: weights.step,
            step: n,
        });
    }
    if history.len() != n {
        return Err(FracError::LengthMismatch {
            expected: n,
            actual: history.len(),
        });
    }
    let stepper = Stepper::new(spec)?;
    if n > stepper.mesh.n_steps() {
        return Err(FracError::StepMismatch {
            weights: weights.step,
            step: stepper.mesh.n_steps(),
        });
    }
    let increments: Vec<Vec<f64>> = history
        .windows(2)
        .map(|w| w[1].values().iter().zip(w[0].values()).map(|(a, b)| a - b).collect())
        .collect();
    Ok(stepper.assemble(n, &weights.g, history[n - 1].values(), &increments))
}

/// Solve one assembled step, starting the iteration from `guess`.
pub fn solve_step(
    system: &StepSystem,
    guess: &[f64],
    opts: &SolveOptions,
) -> Result<(Vec<f64>, StepDiagnostics)> {
    let start = Instant::now();
    let (x, report) = linsolve::solve(&system.matrix, &system.rhs, guess, opts).map_err(|reason| {
        FracError::LinearSolve {
            step: system.step,
            reason,
        }
    })?;
    Ok((
        x,
        StepDiagnostics {
            method: report.method,
            iterations: report.iterations,
            residual: report.residual,
            wall: start.elapsed(),
        },
    ))
}

fn run(
    spec: &ProblemSpec,
    opts: &MarchOptions,
    linear: Option<f64>,
) -> Result<Solution> {
    let stepper = Stepper::new(spec)?;
    let mesh = stepper.mesh.clone();
    let grid = stepper.grid;
    let params: SchemeParams = spec.params()?;
    let report = validate_mesh(&mesh, params.sigma());
    if !report.hypotheses_hold() {
        if opts.strict_mesh {
            return Err(crate::error::invalid(
                "mesh",
                format!("step-ratio hypotheses fail: {report:?}"),
            ));
        }
        log::warn!("mesh fails the step-ratio hypotheses; marching anyway");
    }
    if spec.grading >= 4.0 / spec.alpha {
        log::warn!(
            "grading r = {} >= 4/alpha = {}: outside the analysed range",
            spec.grading,
            4.0 / spec.alpha
        );
    }

    let weights = WeightTable::build(&mesh, &params, opts.method)?;
    let n_steps = mesh.n_steps();
    let u0 = GridFunction2D::from_fn(grid, |x, y| (spec.initial)(x, y));
    let mut states: Vec<Vec<f64>> = Vec::with_capacity(n_steps + 1);
    states.push(u0.into_values());
    let mut increments: Vec<Vec<f64>> = Vec::with_capacity(n_steps);
    let mut diagnostics = Vec::with_capacity(n_steps);

    for n in 1..=n_steps {
        let g = weights.row(n);
        let prev = &states[n - 1];
        let system = match linear {
            Some(c) => stepper.assemble_linear(c, n, g, prev, &increments),
            None => stepper.assemble(n, g, prev, &increments),
        };
        let (next, diag) = solve_step(&system, prev, &opts.solve)?;
        let inc = next.iter().zip(prev).map(|(a, b)| a - b).collect();
        increments.push(inc);
        states.push(next);
        diagnostics.push(diag);
    }

    let trajectory = states
        .into_iter()
        .map(|v| GridFunction2D::from_values(grid, v))
        .collect::<Result<Vec<_>>>()?;
    Ok(Solution {
        spec_hash: spec.spec_hash(),
        mesh,
        grid,
        trajectory,
        diagnostics,
    })
}

/// March the Newton-linearized scheme over the whole mesh.
pub fn march(spec: &ProblemSpec) -> Result<Solution> {
    march_with(spec, &MarchOptions::default())
}

pub fn march_with(spec: &ProblemSpec, opts: &MarchOptions) -> Result<Solution> {
    run(spec, opts, None)
}

/// March the plain implicit scheme for a linear reaction `N(u) = c u`.
///
/// Algebraically identical to [`march`] with [`crate::Reaction::linear`];
/// kept as an independent code path for cross-checking.
pub fn march_linear(spec: &ProblemSpec, c: f64) -> Result<Solution> {
    run(spec, &MarchOptions::default(), Some(c))
}
