//! End-to-end acceptance checks against reference error tables and the
//! analytic properties of the scheme. Prints one PASS/FAIL line per
//! criterion and exits nonzero if any fails.

use std::process::ExitCode;
use std::time::Instant;

use fracstep::analysis::{
    error_series, fit_orders, r1_fit_series, truncation_r3_oracle, two_mesh_series,
};
use fracstep::kernel::{audit_properties, is_admissible, solve_scalar_recurrence, RecurrenceSpec};
use fracstep::{
    example1, example2, march, march_linear, par, Method, Reaction, SchemeParams, TemporalMesh,
    WeightTable,
};

const ALPHAS: [f64; 3] = [0.3, 0.5, 0.7];
const EX1_NS: [usize; 5] = [64, 128, 256, 512, 1024];
const EX2_NS: [usize; 5] = [32, 64, 128, 256, 512];
const AUDIT_NS: [usize; 5] = [32, 64, 128, 256, 512];

/// Reference values: per alpha, errors for each N and rates for each N after the first.
struct Column {
    errors: [f64; 5],
    rates: [f64; 4],
}

const fn col(errors: [f64; 5], rates: [f64; 4]) -> Column {
    Column { errors, rates }
}

// Example 1, r = 1
const EX1_R1_LOCAL: [Column; 3] = [
    col([1.1289e-05, 5.5701e-06, 2.7549e-06, 1.3652e-06, 6.7759e-07], [1.0192, 1.0157, 1.0129, 1.0106]),
    col([1.2444e-05, 6.2554e-06, 3.1398e-06, 1.5742e-06, 7.8864e-07], [0.9923, 0.9945, 0.9960, 0.9972]),
    col([1.0889e-05, 5.4981e-06, 2.7663e-06, 1.3887e-06, 6.9612e-07], [0.9859, 0.9910, 0.9942, 0.9963]),
];
const EX1_R1_GLOBAL_A03: Column =
    col([4.0699e-04, 3.6508e-04, 3.2066e-04, 2.7717e-04, 2.3661e-04], [0.1568, 0.1872, 0.2103, 0.2282]);

// Example 1, r = 2, local
const EX1_R2_LOCAL: [Column; 3] = [
    col([9.2114e-08, 2.0588e-08, 4.7006e-09, 1.0968e-09, 2.6082e-10], [2.1616, 2.1309, 2.0995, 2.0723]),
    col([1.8993e-07, 4.7388e-08, 1.1815e-08, 2.9480e-09, 7.3626e-10], [2.0029, 2.0039, 2.0028, 2.0015]),
    col([3.5427e-07, 9.4715e-08, 2.4918e-08, 6.4808e-09, 1.6713e-09], [1.9032, 1.9264, 1.9429, 1.9552]),
];

// Example 2 (two-mesh), r = 1, 2, 2/alpha
const EX2_R1: [Column; 3] = [
    col([1.0119e-04, 4.9593e-05, 2.4344e-05, 1.1971e-05, 5.8990e-06], [1.0289, 1.0266, 1.0240, 1.0210]),
    col([1.0303e-04, 5.1394e-05, 2.5677e-05, 1.2861e-05, 6.4536e-06], [1.0034, 1.0011, 0.9975, 0.9948]),
    col([7.0050e-05, 3.8347e-05, 2.0242e-05, 1.0467e-05, 5.3441e-06], [0.8693, 0.9217, 0.9516, 0.9698]),
];
const EX2_R2: [Column; 3] = [
    col([1.2807e-06, 2.9426e-07, 7.0058e-08, 1.7236e-08, 4.3390e-09], [2.1218, 2.0705, 2.0231, 1.9900]),
    col([5.4414e-06, 1.4114e-06, 3.6036e-07, 9.0765e-08, 2.2662e-08], [1.9469, 1.9696, 1.9892, 2.0019]),
    col([2.1078e-05, 5.4404e-06, 1.3928e-06, 3.5403e-07, 8.9523e-08], [1.9539, 1.9657, 1.9761, 1.9835]),
];
const EX2_R2A: [Column; 3] = [
    col([3.7638e-05, 9.9018e-06, 2.5602e-06, 6.5394e-07, 1.6570e-07], [1.9264, 1.9514, 1.9690, 1.9806]),
    col([4.2338e-05, 1.1227e-05, 2.9306e-06, 7.5532e-07, 1.9288e-07], [1.9150, 1.9377, 1.9560, 1.9694]),
    col([4.9098e-05, 1.3088e-05, 3.4544e-06, 9.0249e-07, 2.3374e-07], [1.9074, 1.9218, 1.9364, 1.9490]),
];

type Criterion = (&'static str, fn() -> Verdict);

struct Verdict {
    pass: bool,
    detail: String,
}

impl Verdict {
    fn new(pass: bool, detail: impl Into<String>) -> Self {
        Self {
            pass,
            detail: detail.into(),
        }
    }
}

/// Collects individual comparisons; the first few failures are reported.
#[derive(Default)]
struct Checks {
    total: usize,
    failed: Vec<String>,
}

impl Checks {
    fn check(&mut self, ok: bool, what: impl FnOnce() -> String) {
        self.total += 1;
        if !ok {
            self.failed.push(what());
        }
    }

    fn verdict(self, summary: impl Into<String>) -> Verdict {
        let summary = summary.into();
        if self.failed.is_empty() {
            Verdict::new(true, format!("{} checks; {summary}", self.total))
        } else {
            let shown: Vec<&str> = self.failed.iter().take(4).map(String::as_str).collect();
            Verdict::new(
                false,
                format!("{}/{} checks failed: {}", self.failed.len(), self.total, shown.join("; ")),
            )
        }
    }
}

fn rel(a: f64, b: f64) -> f64 {
    ((a - b) / b).abs()
}

/// `(E_L, E_G)` per N for Example 1, M = 25.
fn example1_column(alpha: f64, r: f64) -> (Vec<f64>, Vec<f64>) {
    par::map_items(&EX1_NS, |&n| {
        let spec = example1(alpha, r, n, 25);
        let s = error_series(&march(&spec).expect("march"), &spec).expect("exact solution");
        (s.local(), s.global())
    })
    .into_iter()
    .unzip()
}

fn orders(ns: &[usize], e: &[f64]) -> Vec<f64> {
    fit_orders(ns, e)
        .expect("doubling N")
        .into_iter()
        .map(|o| o.unwrap_or(f64::NAN))
        .collect()
}

fn criterion_1() -> Verdict {
    let start = Instant::now();
    let mut c = Checks::default();
    let mut worst_err: f64 = 0.0;
    let mut worst_rate: f64 = 0.0;
    for (alpha, reference) in ALPHAS.iter().zip(&EX1_R2_LOCAL) {
        let (el, _) = example1_column(*alpha, 2.0);
        for (k, (&e, &p)) in el.iter().zip(&reference.errors).enumerate() {
            worst_err = worst_err.max(rel(e, p));
            c.check(rel(e, p) <= 0.05, || format!("alpha={alpha} N={} E_L {e:.4e} vs {p:.4e}", EX1_NS[k]));
        }
        for (k, (&o, &p)) in orders(&EX1_NS, &el).iter().zip(&reference.rates).enumerate() {
            worst_rate = worst_rate.max((o - p).abs());
            c.check((o - p).abs() <= 0.05, || format!("alpha={alpha} N={} rate {o:.4} vs {p}", EX1_NS[k + 1]));
        }
    }
    c.verdict(format!(
        "max rel error dev {worst_err:.2e}, max rate dev {worst_rate:.4}, {:.1}s",
        start.elapsed().as_secs_f64()
    ))
}

fn criterion_2() -> Verdict {
    let mut c = Checks::default();
    let mut worst: f64 = 0.0;
    for (i, alpha) in ALPHAS.iter().enumerate() {
        let (el, eg) = example1_column(*alpha, 1.0);
        for (k, &o) in orders(&EX1_NS, &el).iter().enumerate() {
            worst = worst.max((o - 1.0).abs());
            c.check((o - 1.0).abs() <= 0.05, || format!("alpha={alpha} N={} local rate {o:.4}", EX1_NS[k + 1]));
        }
        if i == 0 {
            for (k, (&o, &p)) in orders(&EX1_NS, &eg).iter().zip(&EX1_R1_GLOBAL_A03.rates).enumerate() {
                c.check((o - p).abs() <= 0.05, || format!("alpha=0.3 N={} global rate {o:.4} vs {p}", EX1_NS[k + 1]));
            }
            c.check(rel(eg[0], EX1_R1_GLOBAL_A03.errors[0]) <= 0.05, || format!("E_G(64) {:.4e}", eg[0]));
        }
        for (k, (&e, &p)) in el.iter().zip(&EX1_R1_LOCAL[i].errors).enumerate() {
            c.check(rel(e, p) <= 0.05, || format!("alpha={alpha} N={} E_L {e:.4e} vs {p:.4e}", EX1_NS[k]));
        }
    }
    c.verdict(format!("max |local rate - 1| = {worst:.4}"))
}

fn criterion_3() -> Verdict {
    let mut c = Checks::default();
    let mut finals = Vec::new();
    for alpha in ALPHAS {
        let (el, eg) = example1_column(alpha, 2.0 / alpha);
        let ol = *orders(&EX1_NS, &el).last().unwrap();
        let og = *orders(&EX1_NS, &eg).last().unwrap();
        finals.push(format!("alpha={alpha}: L {ol:.4} G {og:.4}"));
        c.check(ol >= 1.9, || format!("alpha={alpha} local order at N=1024 is {ol:.4} < 1.9"));
        c.check(og >= 1.9, || format!("alpha={alpha} global order at N=1024 is {og:.4} < 1.9"));
        if alpha == 0.7 {
            c.check(rel(el[0], 8.2232e-08) <= 0.10, || format!("alpha=0.7 N=64 E_L {:.4e}", el[0]));
        }
    }
    c.verdict(finals.join(", "))
}

fn criterion_4() -> Verdict {
    let mut c = Checks::default();
    let mut worst_err: f64 = 0.0;
    let mut worst_rate: f64 = 0.0;
    for (label, table) in [("1", &EX2_R1), ("2", &EX2_R2), ("2/alpha", &EX2_R2A)] {
        for (alpha, reference) in ALPHAS.iter().zip(table.iter()) {
            let r = if label == "2/alpha" { 2.0 / alpha } else { label.parse().unwrap() };
            let e = two_mesh_series(&example2(*alpha, r, EX2_NS[0], 25), &EX2_NS).expect("march");
            for (k, (&v, &p)) in e.iter().zip(&reference.errors).enumerate() {
                worst_err = worst_err.max(rel(v, p));
                c.check(rel(v, p) <= 0.10, || format!("r={label} alpha={alpha} N={} {v:.4e} vs {p:.4e}", EX2_NS[k]));
            }
            for (k, (&o, &p)) in orders(&EX2_NS, &e).iter().zip(&reference.rates).enumerate() {
                if EX2_NS[k + 1] >= 128 {
                    worst_rate = worst_rate.max((o - p).abs());
                    c.check((o - p).abs() <= 0.05, || {
                        format!("r={label} alpha={alpha} N={} rate {o:.4} vs {p}", EX2_NS[k + 1])
                    });
                }
            }
        }
    }
    c.verdict(format!("max rel error dev {worst_err:.2e}, max rate dev {worst_rate:.4}"))
}

fn audit_matrix() -> Vec<(f64, f64, usize)> {
    let mut cells = Vec::new();
    for alpha in ALPHAS {
        for r in [1.0, 2.0, 2.0 / alpha, 3.0] {
            for n in AUDIT_NS {
                cells.push((alpha, r, n));
            }
        }
    }
    cells
}

fn criterion_5() -> Verdict {
    let cells = audit_matrix();
    let reports = par::map_items(&cells, |&(alpha, r, n)| {
        let mesh = TemporalMesh::graded(1.0, n, r).unwrap();
        audit_properties(&mesh, &SchemeParams::new(alpha).unwrap(), n).unwrap()
    });
    let mut c = Checks::default();
    for ((alpha, r, n), rep) in cells.iter().zip(&reports) {
        c.check(rep.all_pass(), || format!("alpha={alpha} r={r:.4} N={n}: {rep:?}"));
    }
    let p3 = reports.iter().map(|r| r.p3.worst_margin).fold(f64::INFINITY, f64::min);
    c.verdict(format!("{} meshes, smallest P3 margin {p3:.4} with pi_A = 11/4", cells.len()))
}

fn criterion_6() -> Verdict {
    let mut c = Checks::default();
    let mut worst: f64 = 0.0;
    for t_final in [1.0, 0.5] {
        for (alpha, r, n) in audit_matrix() {
            let p = SchemeParams::new(alpha).unwrap();
            let mesh = TemporalMesh::graded(t_final, n, r).unwrap();
            let table = WeightTable::build(&mesh, &p, Method::ClosedForm).unwrap();
            let u: Vec<f64> = mesh.points().iter().map(|t| t * t).collect();
            let g3 = libm::tgamma(3.0 - alpha);
            let tol = 1e-10 * (t_final * t_final).max(1.0);
            for k in 1..=n {
                let exact = 2.0 * mesh.star(k, p.sigma()).powf(2.0 - alpha) / g3;
                let err = (table.derivative(k, &u[..=k]).unwrap() - exact).abs();
                worst = worst.max(err);
                c.check(err <= tol, || format!("T={t_final} alpha={alpha} r={r:.4} N={n} n={k}: {err:e}"));
            }
        }
    }
    c.verdict(format!("max error {worst:.2e}"))
}

fn criterion_7() -> Verdict {
    let cells = audit_matrix();
    let worst = par::map_items(&cells, |&(alpha, r, n)| {
        let p = SchemeParams::new(alpha).unwrap();
        let mesh = TemporalMesh::graded(1.0, n, r).unwrap();
        let rows = n.min(256);
        let closed = WeightTable::build_upto(&mesh, &p, Method::ClosedForm, rows).unwrap();
        let quad = WeightTable::build_upto(&mesh, &p, Method::Quadrature, rows).unwrap();
        (1..=rows)
            .flat_map(|k| {
                closed
                    .row(k)
                    .iter()
                    .zip(quad.row(k))
                    .map(|(a, b)| rel(*b, *a))
                    .collect::<Vec<_>>()
            })
            .fold(0.0, f64::max)
    });
    let mut c = Checks::default();
    for ((alpha, r, n), w) in cells.iter().zip(&worst) {
        c.check(*w <= 1e-11, || format!("alpha={alpha} r={r:.4} N={n}: {w:e}"));
    }
    let max = worst.iter().copied().fold(0.0, f64::max);
    c.verdict(format!("max relative difference {max:.2e}"))
}

fn criterion_8() -> Verdict {
    let mut c = Checks::default();
    let mut runs = 0;
    let mut worst: f64 = 1.0;
    for alpha in ALPHAS {
        let p = SchemeParams::new(alpha).unwrap();
        let mut gammas = vec![alpha - 1.0, -0.5, 0.5];
        gammas.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
        for r in [1.0, 2.0, 2.0 / alpha, 3.0] {
            for &gamma in &gammas {
                if !is_admissible(alpha, r, gamma) {
                    continue;
                }
                for l1 in [0.0, 0.5] {
                    for l2 in [0.0, 0.5] {
                        let constant = |n| {
                            let mesh = TemporalMesh::graded(1.0, n, r).unwrap();
                            solve_scalar_recurrence(&RecurrenceSpec::new(p, mesh, gamma, l1, l2))
                                .map(|res| res.constant)
                        };
                        match (constant(128), constant(1024)) {
                            (Ok(a), Ok(b)) => {
                                runs += 1;
                                let q = (b / a).max(a / b);
                                worst = worst.max(q);
                                c.check(q <= 1.5, || {
                                    format!("alpha={alpha} r={r:.4} gamma={gamma} l=({l1},{l2}): x{q:.3}")
                                });
                            }
                            (a, b) => c.check(false, || format!("alpha={alpha} r={r:.4} gamma={gamma}: {a:?} {b:?}")),
                        }
                    }
                }
            }
        }
    }
    c.verdict(format!("{runs} admissible runs, largest change x{worst:.4}"))
}

fn criterion_9() -> Verdict {
    let mut c = Checks::default();
    let ns = AUDIT_NS;
    let mut zero: f64 = 0.0;
    for alpha in ALPHAS {
        for r in [1.0, 2.0, 2.0 / alpha, 3.0] {
            let s = r1_fit_series(alpha, r, alpha, &ns).unwrap();
            c.check(s.is_stable(0.5, 2.0), || format!("r1 beta=alpha={alpha} r={r:.4}: ratios {:?}", s.ratios()));
            for beta in [1.0, 2.0] {
                let m = r1_fit_series(alpha, r, beta, &ns).unwrap().max_residual();
                zero = zero.max(m);
                c.check(m <= 1e-12, || format!("r1 beta={beta} alpha={alpha} r={r:.4}: {m:e}"));
            }
        }
        for r in [1.0, 2.0] {
            let fits: Vec<_> = ns
                .iter()
                .map(|&n| truncation_r3_oracle(&example1(alpha, r, n, 25)).unwrap())
                .collect();
            for w in fits.windows(2) {
                let q3 = w[1].r3.constant / w[0].r3.constant;
                let q2 = w[1].r2_temporal.constant / w[0].r2_temporal.constant;
                c.check((0.5..=2.0).contains(&q3), || format!("r3 alpha={alpha} r={r}: x{q3:.3}"));
                c.check((0.5..=2.0).contains(&q2), || format!("r2 alpha={alpha} r={r}: x{q2:.3}"));
            }
        }
    }
    c.verdict(format!("exact profiles residual <= {zero:.2e}"))
}

fn criterion_10() -> Verdict {
    let mut c = Checks::default();
    let mut worst: f64 = 0.0;
    for alpha in ALPHAS {
        for coef in [-1.0, 0.5, 2.0] {
            let spec = example2(alpha, 2.0, 64, 8).with_reaction(Reaction::linear(coef));
            let a = march(&spec).unwrap();
            let b = march_linear(&spec, coef).unwrap();
            for (n, (u, v)) in a.trajectory.iter().zip(&b.trajectory).enumerate() {
                let scale = u.max_norm().max(f64::MIN_POSITIVE);
                let d = u.sub(v).max_norm() / scale;
                worst = worst.max(d);
                c.check(d <= 1e-13, || format!("alpha={alpha} c={coef} n={n}: {d:e}"));
            }
        }
    }
    c.verdict(format!("max relative difference {worst:.2e}"))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        ("example 1 local errors, r=2", criterion_1),
        ("example 1 uniform-mesh orders, r=1", criterion_2),
        ("example 1 optimal grading, r=2/alpha", criterion_3),
        ("example 2 two-mesh errors", criterion_4),
        ("coefficient property audit P1-P4", criterion_5),
        ("quadratic exactness", criterion_6),
        ("closed-form vs quadrature weights", criterion_7),
        ("stability recurrence constants", criterion_8),
        ("truncation oracles", criterion_9),
        ("linear-oracle march equivalence", criterion_10),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let v = run();
        if !v.pass {
            failed += 1;
        }
        println!(
            "criterion {:>2} {}: {} ({}) [{:.1}s]",
            i + 1,
            if v.pass { "PASS" } else { "FAIL" },
            name,
            v.detail,
            start.elapsed().as_secs_f64()
        );
    }
    println!("acceptance: {}/{} criteria pass", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
