//! Enumerated checks of the weight properties P1-P4.

use super::{Method, SchemeParams, WeightTable};
use crate::error::Result;
use crate::mesh::{validate_mesh, MeshReport, TemporalMesh, RATIO_UPPER};

/// Kernel lower-bound constant for meshes with `tau_j / tau_{j+1} <= 7/4`.
pub const PI_A: f64 = 11.0 / 4.0;

/// Outcome of one property over all enumerated `(m, j)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PropertyCheck {
    /// `false` when a precondition blocked evaluation.
    pub evaluated: bool,
    pub holds: bool,
    /// Smallest relative margin seen; negative means violated.
    pub worst_margin: f64,
    /// `(m, j)` of the worst margin.
    pub worst_at: Option<(usize, usize)>,
    pub checked: usize,
}

impl PropertyCheck {
    fn skipped() -> Self {
        Self {
            evaluated: false,
            holds: false,
            worst_margin: f64::NAN,
            worst_at: None,
            checked: 0,
        }
    }

    fn empty() -> Self {
        Self {
            evaluated: true,
            holds: true,
            worst_margin: f64::INFINITY,
            worst_at: None,
            checked: 0,
        }
    }

    /// Record a margin; the property requires `margin > 0` (`strict`) or `>= 0`.
    fn record(&mut self, margin: f64, at: (usize, usize), strict: bool) {
        self.checked += 1;
        if margin < self.worst_margin || margin.is_nan() {
            self.worst_margin = margin;
            self.worst_at = Some(at);
        }
        let ok = if strict { margin > 0.0 } else { margin >= 0.0 };
        self.holds &= ok;
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PropertyReport {
    pub mesh: MeshReport,
    pub n_max: usize,
    /// `g_{m-1,j} > g_{m-1,j-1} > 0`.
    pub p1: PropertyCheck,
    /// `(2 sigma - 1) g_{m-1,m-1} > sigma g_{m-1,m-2}`.
    pub p2: PropertyCheck,
    /// `g_{m-1,j-1} pi_A tau_j >= ∫_{t_{j-1}}^{t_j} (t_m - s)^(-alpha) ds / Γ(1-alpha)`.
    pub p3: PropertyCheck,
    /// `tau_j / tau_{j+1} <= 7/4`.
    pub p4: PropertyCheck,
}

impl PropertyReport {
    pub fn all_pass(&self) -> bool {
        self.mesh.hypotheses_hold()
            && [&self.p1, &self.p2, &self.p3, &self.p4]
                .iter()
                .all(|p| p.evaluated && p.holds)
    }
}

/// Average of the continuous kernel over `[t_{j-1}, t_j]`, seen from `t_m`,
/// times `tau_j`.
fn kernel_cell_integral(mesh: &TemporalMesh, params: &SchemeParams, m: usize, j: usize) -> f64 {
    let p = 1.0 - params.alpha();
    let d = mesh.tau(j);
    let x = (mesh.t(m) - mesh.t(j)) + d;
    x.powf(p) * -(p * (-d / x).ln_1p()).exp_m1() / params.gamma_2ma()
}

/// Relative P1 margins below this are re-evaluated without cancellation.
const TIE_MARGIN: f64 = 1e-12;

/// `∫_a^b eta^m d eta` and `∫_a^b eta^m (eta - (a+b)/2) d eta`, expanded about
/// the midpoint so every term is nonnegative.
fn cell_moments(a: f64, b: f64, m: i32) -> (f64, f64) {
    let mid = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let (mut even, mut odd) = (0.0, 0.0);
    let mut binom = 1.0;
    for i in 0..=m {
        let base = mid.powi(m - i);
        if i % 2 == 0 {
            even += binom * base * 2.0 * h.powi(i + 1) / f64::from(i + 1);
        } else {
            odd += binom * base * 2.0 * h.powi(i + 2) / f64::from(i + 2);
        }
        binom *= f64::from(m - i) / f64::from(i + 1);
    }
    (even, odd)
}

/// `g_{k,j} - g_{k,j-1}` from a Taylor expansion of the kernel about `eta = 0`.
///
/// When `t_{j+1}` is tiny compared with the star point, both weights equal the
/// kernel value at the origin to ~16 digits and their difference cannot be
/// formed directly. Expanding `(t^* - eta)^(-alpha) = t^*^(-alpha) sum_m
/// (alpha)_m/m! (eta/t^*)^m`, the `m = 0` term contributes identically to
/// every weight and drops out, leaving a rapidly convergent series.
fn near_origin_difference(mesh: &TemporalMesh, params: &SchemeParams, k: usize, j: usize) -> Option<f64> {
    let star = mesh.star(k + 1, params.sigma());
    if j == 0 || j >= k || mesh.t(j + 1) > 1e-2 * star {
        return None;
    }
    let t = |i: usize| mesh.t(i) / star;
    let b_term = |i: usize, m: i32| {
        let (_, odd) = cell_moments(t(i), t(i + 1), m);
        2.0 / (t(i + 2) - t(i)) * odd
    };
    let a_term = |i: usize, m: i32| cell_moments(t(i), t(i + 1), m).0;
    let weight = |i: usize, m: i32| {
        let num = if i == 0 {
            a_term(0, m) - b_term(0, m)
        } else {
            a_term(i, m) + b_term(i - 1, m) - b_term(i, m)
        };
        num / (t(i + 1) - t(i))
    };
    let alpha = params.alpha();
    let mut coef = 1.0;
    let mut sum = 0.0;
    for m in 1..64 {
        coef *= (alpha + f64::from(m) - 1.0) / f64::from(m);
        let term = coef * (weight(j, m) - weight(j - 1, m));
        sum += term;
        if term.abs() <= 1e-18 * sum.abs() {
            break;
        }
    }
    Some(star.powf(-alpha) / params.gamma_1ma() * sum)
}

/// Audit rows `m = 1..=n_max` of the closed-form weights.
///
/// The step-ratio hypotheses are checked first; if they fail, P1 and P2 are
/// reported as not evaluated. P2 is only evaluated for `sigma = 1 - alpha/2`.
pub fn audit_properties(
    mesh: &TemporalMesh,
    params: &SchemeParams,
    n_max: usize,
) -> Result<PropertyReport> {
    let n_max = n_max.min(mesh.n_steps());
    let mesh_report = validate_mesh(mesh, params.sigma());
    let table = WeightTable::build_upto(mesh, params, Method::ClosedForm, n_max)?;
    let gate = mesh_report.hypotheses_hold();
    let sigma = params.sigma();

    let mut p1 = if gate { PropertyCheck::empty() } else { PropertyCheck::skipped() };
    let mut p2 = if gate && params.is_second_order() {
        PropertyCheck::empty()
    } else {
        PropertyCheck::skipped()
    };
    let mut p3 = PropertyCheck::empty();
    let mut p4 = PropertyCheck::empty();

    for m in 1..=n_max {
        let g = table.row(m);
        if p1.evaluated {
            p1.record(if g[0] > 0.0 { 1.0 } else { -1.0 }, (m, 1), true);
            for j in 1..m {
                let mut margin = (g[j] - g[j - 1]) / g[j];
                if margin.abs() < TIE_MARGIN {
                    if let Some(d) = near_origin_difference(mesh, params, m - 1, j) {
                        margin = d / g[j];
                    }
                }
                p1.record(margin, (m, j + 1), true);
            }
        }
        if p2.evaluated && m >= 2 {
            let lhs = (2.0 * sigma - 1.0) * g[m - 1];
            p2.record((lhs - sigma * g[m - 2]) / lhs, (m, m), true);
        }
        for j in 1..=m {
            let lower = kernel_cell_integral(mesh, params, m, j);
            p3.record(g[j - 1] * PI_A * mesh.tau(j) / lower - 1.0, (m, j), false);
        }
    }
    for j in 1..mesh.n_steps() {
        let inv = mesh.tau(j) / mesh.tau(j + 1);
        p4.record(1.0 - inv / RATIO_UPPER, (j, j + 1), false);
    }

    Ok(PropertyReport {
        mesh: mesh_report,
        n_max,
        p1,
        p2,
        p3,
        p4,
    })
}
