use kappa_core::kinematics::{compose, compose_n, omega_kappa, shell_residual, FourMomentum, Vec3};
use kappa_core::shell::{coupled_residual, solve_coupled, ShellAssignment, Sign};
use kappa_core::KappaContext;
use proptest::prelude::*;

fn vec3(r: f64) -> impl Strategy<Value = Vec3> {
    (-r..r, -r..r, -r..r).prop_map(|(x, y, z)| Vec3::new(x, y, z))
}

fn four(r: f64) -> impl Strategy<Value = FourMomentum> {
    (-r..r, vec3(r)).prop_map(|(e, k)| FourMomentum::new(e, k))
}

fn ctx(kappa: f64, m0: f64) -> KappaContext {
    KappaContext::new(kappa, m0).unwrap()
}

fn signs() -> impl Strategy<Value = ShellAssignment> {
    prop_oneof![
        Just(ShellAssignment::new(Sign::Plus, Sign::Minus)),
        Just(ShellAssignment::new(Sign::Minus, Sign::Plus)),
        Just(ShellAssignment::new(Sign::Minus, Sign::Minus)),
        Just(ShellAssignment::new(Sign::Plus, Sign::Plus)),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn omega_lies_on_the_shell(k in vec3(5.0), m0 in 0.0..2.0f64, kappa in 0.1..100.0f64) {
        let c = ctx(kappa, m0);
        let p = FourMomentum::on_shell(k, &c);
        prop_assert!(shell_residual(&p, &c) <= 1e-12);
    }

    #[test]
    fn omega_classical_limit(k in vec3(5.0), m0 in 0.0..2.0f64) {
        let c = ctx(1e9, m0);
        let classical = (k.norm_squared() + m0 * m0).sqrt();
        let w = omega_kappa(&k, &c);
        prop_assert!((w - classical).abs() <= 1e-9 * classical.max(f64::MIN_POSITIVE));
    }

    #[test]
    fn compose_is_associative(p in four(2.0), q in four(2.0), r in four(2.0), kappa in 0.5..10.0f64) {
        let c = ctx(kappa, 0.0);
        let a = compose(&compose(&p, &q, &c), &r, &c);
        let b = compose(&p, &compose(&q, &r, &c), &c);
        let scale = a.k.amax().max(1.0);
        prop_assert!((a.k - b.k).amax() <= 1e-12 * scale);
        prop_assert!((a.e - b.e).abs() <= 1e-12 * a.e.abs().max(1.0));
    }

    #[test]
    fn energies_add(p in four(2.0), q in four(2.0), kappa in 0.5..10.0f64) {
        let c = ctx(kappa, 0.0);
        prop_assert_eq!(compose(&p, &q, &c).e, p.e + q.e);
    }

    #[test]
    fn compose_n_is_left_fold(ms in prop::collection::vec(four(1.0), 1..6)) {
        let c = ctx(1.0, 0.0);
        let folded = ms[1..].iter().fold(ms[0], |acc, m| compose(&acc, m, &c));
        prop_assert_eq!(compose_n(&ms, &c).unwrap(), folded);
    }

    #[test]
    fn omega_grows_with_momentum(a in 0.0..5.0f64, b in 0.0..5.0f64, m0 in 0.0..2.0f64, kappa in 0.1..100.0f64) {
        let c = ctx(kappa, m0);
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        prop_assert!(omega_kappa(&Vec3::new(lo, 0.0, 0.0), &c) <= omega_kappa(&Vec3::new(hi, 0.0, 0.0), &c));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn solver_back_substitutes(
        kp in vec3(0.5), kq in vec3(0.5), asg in signs(), m0 in 0.0..1.0f64, kappa in 0.5..4.0f64,
    ) {
        // convergence region: components within kappa / 2, m0 within kappa
        let (kp, kq) = (kp * kappa, kq * kappa);
        let c = ctx(kappa, m0.min(kappa));
        let s = solve_coupled(&kp, &kq, asg, &c).unwrap();
        prop_assert!(s.iterations <= 200);
        prop_assert!(coupled_residual(&kp, &kq, asg, s.p0, s.q0, &c) <= 1e-12);
    }
}

#[test]
fn coupled_energies_approach_standard_shell_as_one_over_kappa() {
    let kp = Vec3::new(0.4, 0.1, 0.0);
    let kq = Vec3::new(-0.2, 0.3, 0.1);
    let asg = ShellAssignment::new(Sign::Plus, Sign::Minus);
    let deviation = |kappa: f64| {
        let c = ctx(kappa, 0.5);
        let s = solve_coupled(&kp, &kq, asg, &c).unwrap();
        (s.p0 - omega_kappa(&kp, &c)).abs()
    };
    let ratio = deviation(1e3) / deviation(2e3);
    assert!((ratio - 2.0).abs() < 1e-2, "ratio {ratio}");
    assert!(deviation(1e9) <= 1e-9);
}

#[test]
fn coupled_solution_is_the_only_sign_change() {
    // Eliminate q0 exactly and scan the remaining scalar defect in p0.
    let c = ctx(1.0, 0.5);
    let kp = Vec3::new(0.5, 0.0, 0.0);
    let kq = Vec3::new(0.0, 0.45, 0.2);
    let asg = ShellAssignment::new(Sign::Plus, Sign::Minus);
    let s = solve_coupled(&kp, &kq, asg, &c).unwrap();
    let defect = |p0: f64| {
        let q0 = omega_kappa(&(kq * (-0.5 * p0 / c.kappa).exp()), &c);
        p0 - omega_kappa(&(kp * (0.5 * q0 / c.kappa).exp()), &c)
    };
    let grid: Vec<f64> = (0..=4000).map(|i| i as f64 * 1e-3).collect();
    let changes: Vec<f64> = grid
        .windows(2)
        .filter(|w| defect(w[0]).signum() != defect(w[1]).signum())
        .map(|w| w[0])
        .collect();
    assert_eq!(changes.len(), 1);
    assert!((changes[0] - s.p0).abs() <= 1e-3);
}
