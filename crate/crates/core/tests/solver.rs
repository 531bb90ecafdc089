use fracstep::analysis::{error_series, two_mesh_error};
use fracstep::checkpoint::{load_checkpoint, save_checkpoint, two_mesh_from_checkpoints};
use fracstep::{example1, example2, march, march_linear, Reaction};

fn max_rel_diff(a: &[f64], b: &[f64]) -> f64 {
    let scale = a.iter().map(|v| v.abs()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max) / scale
}

#[test]
fn newton_and_linear_paths_agree_for_linear_reaction() {
    for c in [-2.0, 0.0, 1.5] {
        let spec = example2(0.4, 2.0, 32, 8).with_reaction(Reaction::linear(c));
        let a = march(&spec).unwrap();
        let b = march_linear(&spec, c).unwrap();
        for (n, (u, v)) in a.trajectory.iter().zip(&b.trajectory).enumerate() {
            let d = max_rel_diff(u.values(), v.values());
            assert!(d <= 1e-13, "c={c} n={n}: {d:e}");
        }
    }
}

#[test]
fn reruns_are_bit_identical() {
    let spec = example1(0.5, 2.0, 24, 9);
    let a = march(&spec).unwrap();
    let b = march(&spec).unwrap();
    for (u, v) in a.trajectory.iter().zip(&b.trajectory) {
        assert_eq!(u.values(), v.values());
    }
    assert_eq!(a.spec_hash, b.spec_hash);
}

#[test]
fn manufactured_error_shrinks_with_refinement() {
    let e = |n| {
        let spec = example1(0.5, 2.0, n, 16);
        error_series(&march(&spec).unwrap(), &spec).unwrap().local()
    };
    let (e1, e2) = (e(16), e(32));
    assert!(e2 < 0.35 * e1, "{e1:e} -> {e2:e}");
}

#[test]
fn checkpoint_two_mesh_matches_direct() {
    let dir = tempfile::tempdir().unwrap();
    let coarse = example2(0.5, 2.0, 16, 10);
    let fine = coarse.with_steps(32);
    let (pc, pf) = (dir.path().join("c.fsck"), dir.path().join("f.fsck"));
    save_checkpoint(&pc, &coarse, &march(&coarse).unwrap()).unwrap();
    save_checkpoint(&pf, &fine, &march(&fine).unwrap()).unwrap();
    let ck_c = load_checkpoint(&pc).unwrap();
    let ck_f = load_checkpoint(&pf).unwrap();
    assert_eq!(ck_c.header.spec_hash, coarse.spec_hash());
    let from_files = two_mesh_from_checkpoints(&ck_c, &ck_f, &coarse.grid().unwrap()).unwrap();
    let direct = two_mesh_error(&coarse, 16).unwrap();
    assert_eq!(from_files, direct);
    // swapped order is not a coarse/fine pair
    assert!(two_mesh_from_checkpoints(&ck_f, &ck_c, &coarse.grid().unwrap()).is_err());
}

#[test]
fn invalid_specs_are_rejected() {
    let mut spec = example1(0.5, 2.0, 8, 4);
    spec.nu = 0.0;
    assert!(march(&spec).is_err());
    assert!(march(&example1(1.2, 2.0, 8, 4)).is_err());
    assert!(march(&example1(0.5, 0.5, 8, 4)).is_err());
    assert!(march(&example1(0.5, 2.0, 0, 4)).is_err());
}
