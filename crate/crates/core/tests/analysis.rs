use fracstep::analysis::{
    error_series, fit_envelope, fit_orders, march_final_states, two_mesh_series, ConvergenceReport,
};
use fracstep::{example1, march};

fn errors(alpha: f64, r: f64, ns: &[usize], m: usize) -> (Vec<f64>, Vec<f64>) {
    ns.iter()
        .map(|&n| {
            let spec = example1(alpha, r, n, m);
            let s = error_series(&march(&spec).unwrap(), &spec).unwrap();
            (s.local(), s.global())
        })
        .unzip()
}

#[test]
fn local_and_global_orders_separate() {
    let ns = [64, 128, 256];
    let (el, eg) = errors(0.5, 2.0, &ns, 25);
    let rep = ConvergenceReport::new(0.5, 2.0, 25, ns.to_vec(), el, Some(eg)).unwrap();
    let last_local = rep.local_orders.last().unwrap().unwrap();
    let last_global = rep.global_orders.as_ref().unwrap().last().unwrap().unwrap();
    assert!(last_local >= 1.9, "{last_local}");
    assert!((0.9..=1.1).contains(&last_global), "{last_global}");
    assert_eq!(rep.local_rate(0), None);
    assert_eq!(rep.expected.global, 1.0);
}

#[test]
fn envelope_constant_transfers_to_finer_mesh() {
    let (alpha, r) = (0.5, 1.5);
    assert!(2.0 / (alpha + 1.0) < r && r < 3.0 - alpha);
    let run = |n| {
        let spec = example1(alpha, r, n, 16);
        let sol = march(&spec).unwrap();
        (error_series(&sol, &spec).unwrap(), sol.mesh, sol.grid)
    };
    let (s64, mesh64, grid) = run(64);
    let fit = fit_envelope(&s64, &mesh64, &grid, alpha).unwrap();
    let (s256, mesh256, _) = run(256);
    let worst = fit.worst_ratio(&s256, &mesh256, &grid, alpha);
    assert!(worst <= 1.2, "{worst}");
}

#[test]
fn two_mesh_orders_track_exact_orders() {
    let ns = [32, 64, 128];
    let spec = example1(0.5, 2.0, 32, 12);
    let two_mesh = two_mesh_series(&spec, &ns).unwrap();
    let (exact, _) = errors(0.5, 2.0, &ns, 12);
    let finals = march_final_states(&spec, &[32]).unwrap();
    assert_eq!(finals.len(), 1);
    let o_two = fit_orders(&ns, &two_mesh).unwrap();
    let o_exact = fit_orders(&ns, &exact).unwrap();
    for (a, b) in o_two.iter().zip(&o_exact) {
        let (a, b) = (a.unwrap(), b.unwrap());
        assert!((a - b).abs() <= 0.15, "{a} vs {b}");
    }
}
