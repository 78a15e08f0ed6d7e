use kappa_core::clusters::{
    factorizability_metric, integrate_then_smear, jacobian_reweight, jacobian_reweight_fn,
    smear_cluster, Amplitude2, ChangeOfVariables, ExponentConvention, GaussianFixture, Grid2,
};
use kappa_core::KappaContext;
use nalgebra::DMatrix;
use num_complex::Complex64;
use proptest::prelude::*;

fn gaussian(sigma: f64) -> impl Fn(f64, f64) -> Complex64 {
    move |p, q| Complex64::new((-(p * p + q * q) / (2.0 * sigma * sigma)).exp(), 0.0)
}

#[test]
fn flip_frame_change_of_variables_preserves_the_integral() {
    let c = KappaContext::new(1.0, 0.25).unwrap();
    // the maps stretch one label by up to e^{w/2}: the range must hold the stretched tail.
    // The mixed frame shrinks both labels and has no preimage for large grid momenta.
    let grid = Grid2::radial(80, 7.0).unwrap();
    let f = Amplitude2::from_fn(&grid, |p, q| gaussian(0.5)(p, q));
    for map in [
        ChangeOfVariables::ANNIHILATION_FRAME,
        ChangeOfVariables::CREATION_FRAME,
    ] {
        let g = jacobian_reweight_fn(gaussian(0.5), &map, &grid, &c).unwrap();
        let (a, b) = (f.integral(&grid), g.integral(&grid));
        assert!((a - b).norm() <= 1e-6 * a.norm(), "{map:?}: {a} vs {b}");
    }
}

#[test]
fn fixture_metric_decreases_with_kappa() {
    let fx = GaussianFixture::default();
    let m: Vec<f64> = [1.0, 4.0, 16.0]
        .iter()
        .map(|&k| fx.metric(k, ExponentConvention::Full).unwrap())
        .collect();
    assert!(m[0] > 1e-6 && m[0] > m[1] && m[1] > m[2], "{m:?}");
    assert!(fx.metric(1e9, ExponentConvention::Full).unwrap() <= 1e-12);
}

#[test]
fn half_convention_shows_the_same_trend() {
    let fx = GaussianFixture::default();
    let m: Vec<f64> = [1.0, 4.0, 16.0]
        .iter()
        .map(|&k| fx.metric(k, ExponentConvention::Half).unwrap())
        .collect();
    assert!(m[0] > m[1] && m[1] > m[2], "{m:?}");
}

#[test]
fn fixture_metric_converges_under_refinement() {
    let coarse = GaussianFixture {
        points: 32,
        ..Default::default()
    };
    let fine = GaussianFixture {
        points: 64,
        ..Default::default()
    };
    let a = coarse.metric(1.0, ExponentConvention::Full).unwrap();
    let b = fine.metric(1.0, ExponentConvention::Full).unwrap();
    assert!((a - b).abs() < 0.1 * b, "{a} vs {b}");
}

#[test]
fn order_of_smearing_and_integration_matters() {
    let fx = GaussianFixture::default();
    let c = KappaContext::new(1.0, fx.m0).unwrap();
    let grid = fx.grid().unwrap();
    let f = Amplitude2::gaussian_product(&grid, fx.sigma);
    let smeared = smear_cluster(&f, &grid, &c).unwrap();
    let integrated = integrate_then_smear(&f, &grid, ExponentConvention::Full, &c).unwrap();
    assert!(smeared.max_abs_diff(&integrated) > 0.0);
    assert!(factorizability_metric(&integrated) < 1e-12);
}

#[test]
fn scaling_map_has_closed_form_jacobian() {
    let c = KappaContext::new(1.0, 0.0).unwrap();
    let grid = Grid2::line(9, 2.0).unwrap();
    let lambda = 1.25;
    let map = ChangeOfVariables::Scaling {
        lp: lambda,
        lq: lambda,
    };
    let g = jacobian_reweight_fn(gaussian(0.7), &map, &grid, &c).unwrap();
    let x = grid.coords();
    for i in 0..x.len() {
        for j in 0..x.len() {
            let expected = gaussian(0.7)(x[i] / lambda, x[j] / lambda) * lambda.powi(-6);
            assert!((g.values[(i, j)] - expected).norm() <= 1e-15);
        }
    }
}

#[test]
fn identity_map_is_exact() {
    let c = KappaContext::new(1.0, 0.0).unwrap();
    let grid = Grid2::line(6, 1.0).unwrap();
    let f = Amplitude2::from_fn(&grid, |p, q| Complex64::new(p * q + 1.0, p - q));
    assert_eq!(
        jacobian_reweight(&f, &ChangeOfVariables::Identity, &grid, &c).unwrap(),
        f
    );
}

#[test]
fn identity_kernel_metric() {
    for n in 2..8 {
        let f = Amplitude2::new(DMatrix::identity(n, n));
        assert!((factorizability_metric(&f) - (1.0 - 1.0 / n as f64)).abs() <= 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn rank_one_kernels_are_factorizable(
        u in prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), 6),
        v in prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), 6),
    ) {
        let f = Amplitude2::new(DMatrix::from_fn(6, 6, |i, j| {
            Complex64::new(u[i].0, u[i].1) * Complex64::new(v[j].0, v[j].1)
        }));
        prop_assert!(factorizability_metric(&f) <= 1e-12);
    }

    #[test]
    fn metric_is_a_fraction(entries in prop::collection::vec(-1.0..1.0f64, 25)) {
        let f = Amplitude2::new(DMatrix::from_fn(5, 5, |i, j| Complex64::new(entries[5 * i + j], 0.0)));
        let m = factorizability_metric(&f);
        prop_assert!((0.0..=1.0).contains(&m));
    }
}
