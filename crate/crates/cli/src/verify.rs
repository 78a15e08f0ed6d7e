//! Every invariant of every module, evaluated on seeded draws and fixed
//! fixtures, each reported once with its residual and the relation it tests.
//!
//! Random draws use the configured `kappa`. Drawn momenta stay in the region
//! where the coupled-shell solver is known to converge: components within
//! `min(kappa, 4) / 2` and masses within `min(1, kappa)`. Fixture checks (the
//! unit-kappa contrasts, the classical limits and the cluster sweep) use
//! their own fixed scales.

use kappa_core::clusters::{
    factorizability_metric, integrate_then_smear, jacobian_reweight_fn, smear_cluster,
    smear_cluster_with, Amplitude2, ChangeOfVariables, GaussianFixture, Grid2,
};
use kappa_core::flip::{
    binary_word, equivalence_check_kinds, flip_conservation, onshell_flip_energy_defect,
    tau_involution_check_with, transform_from_flip_frame, transform_to_flip_frame, FlipTable,
    FrameVariant,
};
use kappa_core::kinematics::{compose, omega_kappa, shell_residual};
use kappa_core::osc::{
    circ_binary, circ_commutator, circ_monomials, circ_nfold, mixed_nonassociativity_witness,
    sector_factorization, Side, WITNESS_TOL,
};
use kappa_core::shell::{coupled_residual, solve_coupled};
use kappa_core::starprod::{
    bilocal_bracket_eigenvalues, circ_star_equivalence, moyal_bilocal_brackets,
    moyal_star_planewaves, star_planewaves, MassTerm, OperatorSymbol, Theta,
};
use kappa_core::{
    FourMomentum, KappaContext, KappaError, Kind, Monomial, OscFactor, ShellAssignment, Sign, Vec3,
};
use num_complex::Complex64;
use serde::Serialize;

use crate::config::RunConfig;
use crate::error::CliError;
use crate::output::{num, Report, Table};
use crate::rng::SplitMix64;

/// How a residual is judged against its threshold.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Comparison {
    #[serde(rename = "<=")]
    AtMost,
    #[serde(rename = ">")]
    Above,
    #[serde(rename = "<")]
    Below,
}

impl Comparison {
    fn holds(self, value: f64, threshold: f64) -> bool {
        match self {
            Comparison::AtMost => value <= threshold,
            Comparison::Above => value > threshold,
            Comparison::Below => value < threshold,
        }
    }

    fn symbol(self) -> &'static str {
        match self {
            Comparison::AtMost => "<=",
            Comparison::Above => ">",
            Comparison::Below => "<",
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct InvariantRecord {
    pub name: &'static str,
    pub module: &'static str,
    /// The relation this invariant checks.
    pub anchor: &'static str,
    pub pass: bool,
    /// `null` when the check could not be evaluated.
    pub residual: Option<f64>,
    pub comparison: Comparison,
    pub threshold: f64,
    pub samples: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifyReport {
    pub passed: usize,
    pub failed: usize,
    pub invariants: Vec<InvariantRecord>,
}

impl VerifyReport {
    pub fn all_pass(&self) -> bool {
        self.failed == 0
    }

    pub fn failures(&self) -> impl Iterator<Item = &InvariantRecord> {
        self.invariants.iter().filter(|r| !r.pass)
    }
}

impl Report for VerifyReport {
    fn table(&self) -> Table {
        let mut t = Table::new(vec![
            "name",
            "module",
            "anchor",
            "pass",
            "residual",
            "comparison",
            "threshold",
            "samples",
        ]);
        for r in &self.invariants {
            t.push(vec![
                r.name.to_string(),
                r.module.to_string(),
                r.anchor.to_string(),
                r.pass.to_string(),
                r.residual.map(num).unwrap_or_default(),
                r.comparison.symbol().to_string(),
                num(r.threshold),
                r.samples.to_string(),
            ]);
        }
        t
    }
}

impl std::fmt::Display for InvariantRecord {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let verdict = if self.pass { "pass" } else { "FAIL" };
        match (&self.residual, &self.error) {
            (_, Some(e)) => write!(f, "{verdict} {} [{}]: {e}", self.name, self.module),
            (Some(r), None) => write!(
                f,
                "{verdict} {} [{}]: {r:e} {} {:e}",
                self.name,
                self.module,
                self.comparison.symbol(),
                self.threshold
            ),
            (None, None) => write!(f, "{verdict} {} [{}]", self.name, self.module),
        }
    }
}

struct Check {
    name: &'static str,
    module: &'static str,
    anchor: &'static str,
    comparison: Comparison,
    threshold: f64,
    samples: usize,
    run: fn(&Env, &mut SplitMix64, usize) -> Result<f64, KappaError>,
}

struct Env {
    ctx: KappaContext,
    flip_table: FlipTable,
    massterm: MassTerm,
    convention: kappa_core::clusters::ExponentConvention,
}

impl Env {
    /// Half-width of drawn momentum components.
    fn radius(&self) -> f64 {
        0.5 * self.ctx.kappa.min(4.0)
    }

    fn draw_ctx(&self, rng: &mut SplitMix64) -> Result<KappaContext, KappaError> {
        let m0 = rng.uniform(0.0, self.ctx.kappa.min(1.0));
        self.ctx.with_mass(m0)
    }
}

const KIND_PAIRS: [(Kind, Kind); 4] = [
    (Kind::Annihilation, Kind::Annihilation),
    (Kind::Creation, Kind::Creation),
    (Kind::Creation, Kind::Annihilation),
    (Kind::Annihilation, Kind::Creation),
];

const ASSIGNMENTS: [ShellAssignment; 4] = [
    ShellAssignment::new(Sign::Plus, Sign::Minus),
    ShellAssignment::new(Sign::Minus, Sign::Plus),
    ShellAssignment::new(Sign::Plus, Sign::Plus),
    ShellAssignment::new(Sign::Minus, Sign::Minus),
];

const CLASSICAL: f64 = 1e9;

fn ctx(kappa: f64, m0: f64) -> Result<KappaContext, KappaError> {
    KappaContext::new(kappa, m0)
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / 1f64.max(a.abs()).max(b.abs())
}

fn rel_vec(a: &Vec3, b: &Vec3) -> f64 {
    (a - b).amax() / 1f64.max(a.amax()).max(b.amax())
}

fn word_dev(a: &Monomial, b: &Monomial) -> f64 {
    a.label_deviation(b).unwrap_or(f64::INFINITY)
}

fn four(rng: &mut SplitMix64, r: f64) -> FourMomentum {
    let e = rng.uniform(-r, r);
    FourMomentum::new(e, rng.vec3(r))
}

fn max_over(n: usize, mut f: impl FnMut() -> Result<f64, KappaError>) -> Result<f64, KappaError> {
    let mut worst: f64 = 0.0;
    for _ in 0..n {
        let v = f()?;
        worst = if v.is_nan() {
            f64::INFINITY
        } else {
            worst.max(v)
        };
    }
    Ok(worst)
}

// ---- kinematics ----

fn shell_closure(env: &Env, rng: &mut SplitMix64, n: usize) -> Result<f64, KappaError> {
    max_over(n, || {
        let c = env.ctx.with_mass(rng.uniform(0.0, 2.0))?;
        let p = FourMomentum::on_shell(rng.vec3(5.0), &c);
        Ok(shell_residual(&p, &c))
    })
}

fn classical_dispersion(_: &Env, rng: &mut SplitMix64, n: usize) -> Result<f64, KappaError> {
    max_over(n, || {
        let m0 = rng.uniform(0.0, 2.0);
        let c = ctx(CLASSICAL, m0)?;
        let k = rng.vec3(5.0);
        let classical = (k.norm_squared() + m0 * m0).sqrt();
        Ok((omega_kappa(&k, &c) - classical).abs() / classical.max(f64::MIN_POSITIVE))
    })
}

fn compose_associativity(env: &Env, rng: &mut SplitMix64, n: usize) -> Result<f64, KappaError> {
    let c = &env.ctx;
    max_over(n, || {
        let (p, q, r) = (four(rng, 2.0), four(rng, 2.0), four(rng, 2.0));
        let a = compose(&compose(&p, &q, c), &r, c);
        let b = compose(&p, &compose(&q, &r, c), c);
        Ok(rel_vec(&a.k, &b.k).max(rel(a.e, b.e)))
    })
}

fn energy_additivity(env: &Env, rng: &mut SplitMix64, n: usize) -> Result<f64, KappaError> {
    max_over(n, || {
        let (p, q) = (four(rng, 2.0), four(rng, 2.0));
        Ok((compose(&p, &q, &env.ctx).e - (p.e + q.e)).abs())
    })
}

fn compose_noncommutativity(_: &Env, _: &mut SplitMix64, _: usize) -> Result<f64, KappaError> {
    let c = ctx(1.0, 0.0)?;
    let p = FourMomentum::new(1.0, Vec3::new(1.0, 0.0, 0.0));
    let q = FourMomentum::new(1.0, Vec3::new(0.0, 1.0, 0.0));
    Ok((compose(&p, &q, &c).k - compose(&q, &p, &c).k).norm())
}

// ---- shells ----

fn shell_draws(
    env: &Env,
    rng: &mut SplitMix64,
    n: usize,
    mut f: impl FnMut(&Vec3, &Vec3, ShellAssignment, &KappaContext) -> Result<f64, KappaError>,
) -> Result<f64, KappaError> {
    max_over(n, || {
        let c = env.draw_ctx(rng)?;
        let (p, q) = (rng.vec3(env.radius()), rng.vec3(env.radius()));
        let mut worst: f64 = 0.0;
        for asg in ASSIGNMENTS {
            worst = worst.max(f(&p, &q, asg, &c)?);
        }
        Ok(worst)
    })
}

fn shell_back_substitution(env: &Env, rng: &mut SplitMix64, n: usize) -> Result<f64, KappaError> {
    shell_draws(env, rng, n, |p, q, asg, c| {
        let s = solve_coupled(p, q, asg, c)?;
        Ok(coupled_residual(p, q, asg, s.p0, s.q0, c))
    })
}

fn shell_iterations(env: &Env, rng: &mut SplitMix64, n: usize) -> Result<f64, KappaError> {
    shell_draws(env, rng, n, |p, q, asg, c| {
        Ok(solve_coupled(p, q, asg, c)?.iterations as f64)
    })
}

fn shell_classical(_: &Env, rng: &mut SplitMix64, n: usize) -> Result<f64, KappaError> {
    max_over(n, || {
        let m0 = rng.uniform(0.0, 1.0);
        let c = ctx(CLASSICAL, m0)?;
        let (p, q) = (rng.vec3(2.0), rng.vec3(2.0));
        let mut worst: f64 = 0.0;
        for asg in ASSIGNMENTS {
            let s = solve_coupled(&p, &q, asg, &c)?;
            worst = worst
                .max((s.p0 - (p.norm_squared() + m0 * m0).sqrt()).abs())
                .max((s.q0 - (q.norm_squared() + m0 * m0).sqrt()).abs());
        }
        Ok(worst)
    })
}

/// `|log2(ratio / 1000)|` for the energy offsets at kappa = 1e3 and 1e6:
/// at most 1 when the offset falls off as 1/kappa within a factor 2.
fn shell_convergence_rate(env: &Env, rng: &mut SplitMix64, n: usize) -> Result<f64, KappaError> {
    max_over(n, || {
        let m0 = rng.uniform(0.0, 1.0);
        let (p, q) = (rng.vec3(env.radius()), rng.vec3(env.radius()));
        let offset = |kappa: f64| -> Result<f64, KappaError> {
            let c = ctx(kappa, m0)?;
            let s = solve_coupled(&p, &q, ASSIGNMENTS[0], &c)?;
            Ok((s.p0 - omega_kappa(&p, &c)).abs() + (s.q0 - omega_kappa(&q, &c)).abs())
        };
        Ok((offset(1e3)? / offset(1e6)? / 1e3).log2().abs())
    })
}

// ---- circ algebra ----

fn same_kind_commutators(env: &Env, rng: &mut SplitMix64, n: usize) -> Result<f64, KappaError> {
    let mut nonzero = 0usize;
    for i in 0..n {
        let c = env.ctx.with_mass(rng.uniform(0.0, 2.0))?;
        let kind = if i % 2 == 0 {
            Kind::Annihilation
        } else {
            Kind::Creation
        };
        let x = OscFactor::on_shell(kind, rng.vec3(2.0), &c);
        let y = OscFactor::on_shell(kind, rng.vec3(2.0), &c);
        if !circ_commutator(&x, &y, &c).is_empty() {
            nonzero += 1;
        }
    }
    Ok(nonzero as f64)
}

fn momentum_compensation(env: &Env, rng: &mut SplitMix64, n: usize) -> Result<f64, KappaError> {
    max_over(n, || {
        let c = env.ctx.with_mass(rng.uniform(0.0, 2.0))?;
        let (p, q) = (rng.vec3(2.0), rng.vec3(2.0));
        let mut worst: f64 = 0.0;
        for kind in [Kind::Creation, Kind::Annihilation] {
            let x = OscFactor::on_shell(kind, p, &c);
            let y = OscFactor::on_shell(kind, q, &c);
            let s = kind.sign();
            let total = circ_binary(&x, &y, &c).adjoint_eigenvalue(&c);
            worst = worst
                .max(rel_vec(&total.k, &((p + q) * s)))
                .max(rel(total.e, s * (x.e + y.e)));
        }
        Ok(worst)
    })
}

fn creators(env: &Env, rng: &mut SplitMix64, len: usize) -> Vec<OscFactor> {
    (0..len)
        .map(|_| OscFactor::on_shell(Kind::Creation, rng.vec3(1.0), &env.ctx))
        .collect()
}

fn nfold_vs_fold(env: &Env, rng: &mut SplitMix64, n: usize) -> Result<f64, KappaError> {
    let c = &env.ctx;
    max_over(n, || {
        let len = 1 + (rng.next_u64() % 5) as usize;
        let fs = creators(env, rng, len);
        let folded = fs[1..]
            .iter()
            .try_fold(Monomial::word(vec![fs[0]]), |acc, f| {
                circ_monomials(&acc, &Monomial::word(vec![*f]), c)
            })?;
        Ok(word_dev(&circ_nfold(&fs, c)?, &folded))
    })
}

fn circ_associativity(env: &Env, rng: &mut SplitMix64, n: usize) -> Result<f64, KappaError> {
    let c = &env.ctx;
    max_over(n, || {
        let fs = creators(env, rng, 4);
        let (a, b, d) = (
            Monomial::word(fs[..1].to_vec()),
            Monomial::word(fs[1..3].to_vec()),
            Monomial::word(fs[3..].to_vec()),
        );
        let left = circ_monomials(&circ_monomials(&a, &b, c)?, &d, c)?;
        let right = circ_monomials(&a, &circ_monomials(&b, &d, c)?, c)?;
        Ok(word_dev(&left, &right))
    })
}

fn sector_shift(env: &Env, rng: &mut SplitMix64, n: usize, side: Side) -> Result<f64, KappaError> {
    let c = &env.ctx;
    max_over(n, || {
        let fs = creators(env, rng, 3);
        let shift = (fs[0].e / (2.0 * c.kappa)).exp();
        let expected = if side == Side::LeftCirc {
            1.0 / shift
        } else {
            shift
        };
        let s = sector_factorization(&fs[0], &fs[1], &fs[2], side, c)?;
        let structural = if s.difference(c).is_empty() {
            0.0
        } else {
            f64::INFINITY
        };
        Ok(rel(s.inner_scale.0, expected)
            .max(rel(s.inner_scale.1, expected))
            .max(structural))
    })
}

fn left_sector(env: &Env, rng: &mut SplitMix64, n: usize) -> Result<f64, KappaError> {
    sector_shift(env, rng, n, Side::LeftCirc)
}

fn right_sector(env: &Env, rng: &mut SplitMix64, n: usize) -> Result<f64, KappaError> {
    sector_shift(env, rng, n, Side::RightCirc)
}

fn witness_deformed(_: &Env, _: &mut SplitMix64, _: usize) -> Result<f64, KappaError> {
    Ok(mixed_nonassociativity_witness(&ctx(1.0, 1.0)?).max_deviation)
}

fn witness_classical(_: &Env, _: &mut SplitMix64, _: usize) -> Result<f64, KappaError> {
    Ok(mixed_nonassociativity_witness(&ctx(CLASSICAL, 1.0)?).max_deviation)
}

// ---- flip ----

fn flip_draws(
    env: &Env,
    rng: &mut SplitMix64,
    n: usize,
    mut f: impl FnMut(Kind, Kind, &Vec3, &Vec3, &KappaContext) -> Result<f64, KappaError>,
) -> Result<f64, KappaError> {
    max_over(n, || {
        let c = env.draw_ctx(rng)?;
        let (p, q) = (rng.vec3(env.radius()), rng.vec3(env.radius()));
        let mut worst: f64 = 0.0;
        for (kx, ky) in KIND_PAIRS {
            worst = worst.max(f(kx, ky, &p, &q, &c)?);
        }
        Ok(worst)
    })
}

fn tau_involution(env: &Env, rng: &mut SplitMix64, n: usize) -> Result<f64, KappaError> {
    flip_draws(env, rng, n, |kx, ky, p, q, c| {
        let (x, y) = binary_word(kx, ky, *p, *q, c)?;
        tau_involution_check_with(&x, &y, env.flip_table, c)
    })
}

fn flip_momentum(env: &Env, rng: &mut SplitMix64, n: usize) -> Result<f64, KappaError> {
    flip_draws(env, rng, n, |kx, ky, p, q, c| {
        let (x, y) = binary_word(kx, ky, *p, *q, c)?;
        Ok(flip_conservation(&x, &y, c)?.0)
    })
}

fn flip_energy(env: &Env, rng: &mut SplitMix64, n: usize) -> Result<f64, KappaError> {
    flip_draws(env, rng, n, |kx, ky, p, q, c| {
        let (x, y) = binary_word(kx, ky, *p, *q, c)?;
        Ok(flip_conservation(&x, &y, c)?.1)
    })
}

const DEFECT_P: Vec3 = Vec3::new(1.0, 0.0, 0.0);
const DEFECT_Q: Vec3 = Vec3::new(0.0, 2.0, 0.0);

fn naive_defect_deformed(_: &Env, _: &mut SplitMix64, _: usize) -> Result<f64, KappaError> {
    Ok(onshell_flip_energy_defect(
        &DEFECT_P,
        &DEFECT_Q,
        &ctx(1.0, 1.0)?,
    ))
}

fn naive_defect_classical(_: &Env, _: &mut SplitMix64, _: usize) -> Result<f64, KappaError> {
    Ok(onshell_flip_energy_defect(
        &DEFECT_P,
        &DEFECT_Q,
        &ctx(CLASSICAL, 1.0)?,
    ))
}

fn circ_flip_equivalence(env: &Env, rng: &mut SplitMix64, n: usize) -> Result<f64, KappaError> {
    flip_draws(env, rng, n, |kx, ky, p, q, c| {
        Ok(equivalence_check_kinds(kx, ky, p, q, c)?.max_deviation)
    })
}

fn frame_round_trip(env: &Env, rng: &mut SplitMix64, n: usize) -> Result<f64, KappaError> {
    max_over(n, || {
        let c = env.draw_ctx(rng)?;
        let pm = FourMomentum::on_shell(rng.vec3(env.radius()), &c);
        let qm = FourMomentum::on_shell(rng.vec3(env.radius()), &c);
        let mut worst: f64 = 0.0;
        for v in [
            FrameVariant::Annihilation,
            FrameVariant::Creation,
            FrameVariant::CreationAnnihilation,
        ] {
            let (pp, qp) = transform_to_flip_frame(&pm, &qm, v, &c);
            let (pb, qb) = transform_from_flip_frame(&pp, &qp, v, None, &c)?;
            worst = worst
                .max(rel_vec(&pb.k, &pm.k))
                .max(rel_vec(&qb.k, &qm.k))
                .max(rel(pb.e, pm.e))
                .max(rel(qb.e, qm.e));
        }
        Ok(worst)
    })
}

// ---- clusters ----

fn fixture_metric(env: &Env, kappa: f64) -> Result<f64, KappaError> {
    GaussianFixture::default().metric(kappa, env.convention)
}

fn smear_classical(env: &Env, _: &mut SplitMix64, _: usize) -> Result<f64, KappaError> {
    let fx = GaussianFixture::default();
    let grid = fx.grid()?;
    let f = Amplitude2::gaussian_product(&grid, fx.sigma);
    let out = smear_cluster_with(&f, &grid, env.convention, &ctx(CLASSICAL, fx.m0)?)?;
    Ok(out.max_abs_diff(&f))
}

fn cluster_classical(env: &Env, _: &mut SplitMix64, _: usize) -> Result<f64, KappaError> {
    fixture_metric(env, CLASSICAL)
}

fn cluster_deformed(env: &Env, _: &mut SplitMix64, _: usize) -> Result<f64, KappaError> {
    fixture_metric(env, 1.0)
}

/// Largest step of the metric along kappa = 1, 4, 16: negative when strictly decreasing.
fn cluster_trend(env: &Env, _: &mut SplitMix64, _: usize) -> Result<f64, KappaError> {
    let m = [
        fixture_metric(env, 1.0)?,
        fixture_metric(env, 4.0)?,
        fixture_metric(env, 16.0)?,
    ];
    Ok((m[1] - m[0]).max(m[2] - m[1]))
}

fn jacobian_integral(_: &Env, _: &mut SplitMix64, _: usize) -> Result<f64, KappaError> {
    let c = ctx(1.0, 0.25)?;
    let grid = Grid2::radial(80, 7.0)?;
    let f = |p: f64, q: f64| Complex64::new((-(p * p + q * q) / 0.5).exp(), 0.0);
    let before = Amplitude2::from_fn(&grid, f).integral(&grid);
    let after =
        jacobian_reweight_fn(f, &ChangeOfVariables::ANNIHILATION_FRAME, &grid, &c)?.integral(&grid);
    Ok((before - after).norm() / before.norm())
}

fn quadrature_convergence(env: &Env, _: &mut SplitMix64, _: usize) -> Result<f64, KappaError> {
    let coarse = GaussianFixture {
        points: 32,
        ..Default::default()
    }
    .metric(1.0, env.convention)?;
    let fine = GaussianFixture {
        points: 64,
        ..Default::default()
    }
    .metric(1.0, env.convention)?;
    Ok((coarse - fine).abs() / fine)
}

fn order_of_operations(env: &Env, _: &mut SplitMix64, _: usize) -> Result<f64, KappaError> {
    let fx = GaussianFixture::default();
    let c = ctx(1.0, fx.m0)?;
    let grid = fx.grid()?;
    let f = Amplitude2::gaussian_product(&grid, fx.sigma);
    let smeared = smear_cluster(&f, &grid, &c)?;
    let integrated = integrate_then_smear(&f, &grid, env.convention, &c)?;
    debug_assert!(factorizability_metric(&integrated) < 1e-12);
    Ok(smeared.max_abs_diff(&integrated))
}

// ---- star product ----

const STAR_KAPPAS: [f64; 3] = [0.5, 1.0, 10.0];

fn star_draws(
    rng: &mut SplitMix64,
    n: usize,
    massive: bool,
    mut f: impl FnMut(&Vec3, &Vec3, &KappaContext) -> f64,
) -> Result<f64, KappaError> {
    max_over(n, || {
        let (p, q) = (rng.vec3(2.0), rng.vec3(2.0));
        let m0 = if massive { rng.uniform(0.0, 2.0) } else { 0.0 };
        let mut worst: f64 = 0.0;
        for kappa in STAR_KAPPAS {
            worst = worst.max(f(&p, &q, &ctx(kappa, m0)?));
        }
        Ok(worst)
    })
}

fn massless_brackets(_: &Env, rng: &mut SplitMix64, n: usize) -> Result<f64, KappaError> {
    star_draws(rng, n, false, |p, q, c| {
        let (bx, by) = bilocal_bracket_eigenvalues(&star_planewaves(p, q, c), MassTerm::Off, c);
        bx.norm().max(by.norm())
    })
}

fn massive_brackets(env: &Env, rng: &mut SplitMix64, n: usize) -> Result<f64, KappaError> {
    star_draws(rng, n, true, |p, q, c| {
        let (bx, by) = bilocal_bracket_eigenvalues(&star_planewaves(p, q, c), env.massterm, c);
        let expected = match env.massterm {
            MassTerm::On => 0.0,
            MassTerm::Off => c.m0 * c.m0,
        };
        (bx - expected).norm().max((by - expected).norm())
    })
}

fn cross_factor_cancellation(_: &Env, rng: &mut SplitMix64, n: usize) -> Result<f64, KappaError> {
    star_draws(rng, n, true, |p, q, c| {
        let pair = star_planewaves(p, q, c);
        let ev = |s: OperatorSymbol| s.eigenvalue(&pair, c);
        let x = ev(OperatorSymbol::LaplaceX) * ev(OperatorSymbol::ShiftY);
        let y = ev(OperatorSymbol::LaplaceY) * ev(OperatorSymbol::ShiftX);
        (x.re + p.norm_squared())
            .abs()
            .max((y.re + q.norm_squared()).abs())
    })
}

fn time_shift(_: &Env, rng: &mut SplitMix64, n: usize) -> Result<f64, KappaError> {
    star_draws(rng, n, true, |p, q, c| {
        let pair = star_planewaves(p, q, c);
        let (x0, y0) = (Complex64::new(0.3, 0.0), Complex64::new(-0.7, 0.0));
        let moved = pair.time_phase(x0 - Complex64::i() / c.kappa, y0) / pair.time_phase(x0, y0);
        let shift = OperatorSymbol::ShiftX.eigenvalue(&pair, c);
        (moved - shift).norm() / shift.norm()
    })
}

fn moyal_phase(_: &Env, rng: &mut SplitMix64, n: usize) -> Result<f64, KappaError> {
    max_over(n, || {
        let mut m = [0.0; 16];
        for i in 0..4 {
            for j in (i + 1)..4 {
                let t = rng.uniform(-1.0, 1.0);
                m[4 * i + j] = t;
                m[4 * j + i] = -t;
            }
        }
        let theta = Theta::from_row_slice(&m)?;
        let c = ctx(rng.pick(&STAR_KAPPAS), 0.0)?;
        let (p, q) = (four(rng, 2.0), four(rng, 2.0));
        let (pv, qv) = ([p.e, p.k.x, p.k.y, p.k.z], [q.e, q.k.x, q.k.y, q.k.z]);
        let mut bilinear = 0.0;
        for i in 0..4 {
            for j in 0..4 {
                bilinear += pv[i] * m[4 * i + j] * qv[j];
            }
        }
        let expected = Complex64::new(0.0, bilinear / (c.kappa * c.kappa)).exp();
        Ok((moyal_star_planewaves(&p, &q, &theta, &c) - expected).norm())
    })
}

fn moyal_factorization(_: &Env, rng: &mut SplitMix64, n: usize) -> Result<f64, KappaError> {
    max_over(n, || {
        let m0 = rng.uniform(0.0, 2.0);
        let c = ctx(1.0, m0)?;
        let on = |k: Vec3| FourMomentum::new((k.norm_squared() + m0 * m0).sqrt(), k);
        let (bx, by) = moyal_bilocal_brackets(&on(rng.vec3(2.0)), &on(rng.vec3(2.0)), &c);
        Ok(bx.abs().max(by.abs()))
    })
}

fn circ_star(env: &Env, rng: &mut SplitMix64, n: usize) -> Result<f64, KappaError> {
    max_over(n, || {
        let c = env.draw_ctx(rng)?;
        let r = 2.0 * env.radius();
        let p = Vec3::new(rng.uniform(-r, r), 0.0, 0.0);
        let q = Vec3::new(rng.uniform(-r, r), 0.0, 0.0);
        Ok(circ_star_equivalence(&p, &q, &c)?.max_deviation)
    })
}

const SUITE: &[Check] = &[
    Check {
        name: "shell closure",
        module: "kinematics",
        anchor: "deformed mass shell",
        comparison: Comparison::AtMost,
        threshold: 1e-12,
        samples: 1000,
        run: shell_closure,
    },
    Check {
        name: "classical dispersion",
        module: "kinematics",
        anchor: "large-kappa limit of the dispersion relation",
        comparison: Comparison::AtMost,
        threshold: 1e-9,
        samples: 1000,
        run: classical_dispersion,
    },
    Check {
        name: "composition associativity",
        module: "kinematics",
        anchor: "coassociative momentum coproduct",
        comparison: Comparison::AtMost,
        threshold: 1e-12,
        samples: 1000,
        run: compose_associativity,
    },
    Check {
        name: "energy additivity",
        module: "kinematics",
        anchor: "primitive energy coproduct",
        comparison: Comparison::AtMost,
        threshold: 0.0,
        samples: 1000,
        run: energy_additivity,
    },
    Check {
        name: "composition non-commutativity",
        module: "kinematics",
        anchor: "non-cocommutative momentum coproduct",
        comparison: Comparison::Above,
        threshold: 0.1,
        samples: 1,
        run: compose_noncommutativity,
    },
    Check {
        name: "coupled shell back-substitution",
        module: "shell-solver",
        anchor: "partner-dependent mass shells",
        comparison: Comparison::AtMost,
        threshold: 1e-12,
        samples: 250,
        run: shell_back_substitution,
    },
    Check {
        name: "coupled shell iteration budget",
        module: "shell-solver",
        anchor: "partner-dependent mass shells",
        comparison: Comparison::AtMost,
        threshold: 200.0,
        samples: 250,
        run: shell_iterations,
    },
    Check {
        name: "coupled shell classical limit",
        module: "shell-solver",
        anchor: "partner shells reduce to the standard shell",
        comparison: Comparison::AtMost,
        threshold: 1e-8,
        samples: 250,
        run: shell_classical,
    },
    Check {
        name: "coupled shell convergence rate",
        module: "shell-solver",
        anchor: "partner shells reduce to the standard shell",
        comparison: Comparison::AtMost,
        threshold: 1.0,
        samples: 100,
        run: shell_convergence_rate,
    },
    Check {
        name: "same-kind circ commutators",
        module: "osc-algebra",
        anchor: "circ exchange symmetry of same-kind oscillators",
        comparison: Comparison::AtMost,
        threshold: 0.0,
        samples: 1000,
        run: same_kind_commutators,
    },
    Check {
        name: "momentum compensation",
        module: "osc-algebra",
        anchor: "circ product carries the Abelian total momentum",
        comparison: Comparison::AtMost,
        threshold: 1e-12,
        samples: 1000,
        run: momentum_compensation,
    },
    Check {
        name: "n-fold circ product",
        module: "osc-algebra",
        anchor: "n-fold circ product equals iterated binary products",
        comparison: Comparison::AtMost,
        threshold: 1e-12,
        samples: 250,
        run: nfold_vs_fold,
    },
    Check {
        name: "circ associativity",
        module: "osc-algebra",
        anchor: "associativity of the circ product on creation words",
        comparison: Comparison::AtMost,
        threshold: 1e-12,
        samples: 250,
        run: circ_associativity,
    },
    Check {
        name: "left sector shift",
        module: "osc-algebra",
        anchor: "three-particle sector factorization, spectator on the left",
        comparison: Comparison::AtMost,
        threshold: 1e-12,
        samples: 250,
        run: left_sector,
    },
    Check {
        name: "right sector shift",
        module: "osc-algebra",
        anchor: "three-particle sector factorization, spectator on the right",
        comparison: Comparison::AtMost,
        threshold: 1e-12,
        samples: 250,
        run: right_sector,
    },
    Check {
        name: "mixed non-associativity",
        module: "osc-algebra",
        anchor: "mixed plain and circ products do not associate",
        comparison: Comparison::Above,
        threshold: WITNESS_TOL,
        samples: 1,
        run: witness_deformed,
    },
    Check {
        name: "mixed associativity in the classical limit",
        module: "osc-algebra",
        anchor: "mixed plain and circ products do not associate",
        comparison: Comparison::AtMost,
        threshold: WITNESS_TOL,
        samples: 1,
        run: witness_classical,
    },
    Check {
        name: "tau involution",
        module: "flip",
        anchor: "deformed flip squares to the identity",
        comparison: Comparison::AtMost,
        threshold: 1e-10,
        samples: 250,
        run: tau_involution,
    },
    Check {
        name: "flip momentum conservation",
        module: "flip",
        anchor: "deformed flip commutes with the coproduct",
        comparison: Comparison::AtMost,
        threshold: 1e-10,
        samples: 250,
        run: flip_momentum,
    },
    Check {
        name: "flip energy conservation",
        module: "flip",
        anchor: "deformed flip preserves the total energy",
        comparison: Comparison::AtMost,
        threshold: 1e-10,
        samples: 250,
        run: flip_energy,
    },
    Check {
        name: "naive on-shell flip defect",
        module: "flip",
        anchor: "standard shells are inconsistent with the flip",
        comparison: Comparison::Above,
        threshold: 1e-3,
        samples: 1,
        run: naive_defect_deformed,
    },
    Check {
        name: "naive on-shell flip defect in the classical limit",
        module: "flip",
        anchor: "standard shells are inconsistent with the flip",
        comparison: Comparison::AtMost,
        threshold: 1e-9,
        samples: 1,
        run: naive_defect_classical,
    },
    Check {
        name: "circ/flip equivalence",
        module: "flip",
        anchor: "circ exchange relation equals the deformed flip relation",
        comparison: Comparison::AtMost,
        threshold: 1e-10,
        samples: 250,
        run: circ_flip_equivalence,
    },
    Check {
        name: "flip frame round trip",
        module: "flip",
        anchor: "change of labels into the flip frame",
        comparison: Comparison::AtMost,
        threshold: 1e-12,
        samples: 250,
        run: frame_round_trip,
    },
    Check {
        name: "classical smearing is the identity",
        module: "clusters",
        anchor: "undeformed two-particle packets",
        comparison: Comparison::AtMost,
        threshold: 1e-9,
        samples: 1,
        run: smear_classical,
    },
    Check {
        name: "cluster factorizable in the classical limit",
        module: "clusters",
        anchor: "undeformed two-particle packets",
        comparison: Comparison::AtMost,
        threshold: 1e-12,
        samples: 1,
        run: cluster_classical,
    },
    Check {
        name: "cluster non-factorizability",
        module: "clusters",
        anchor: "smeared circ products are not products of one-particle packets",
        comparison: Comparison::Above,
        threshold: 1e-6,
        samples: 1,
        run: cluster_deformed,
    },
    Check {
        name: "cluster metric decreases with kappa",
        module: "clusters",
        anchor: "smeared circ products are not products of one-particle packets",
        comparison: Comparison::Below,
        threshold: 0.0,
        samples: 3,
        run: cluster_trend,
    },
    Check {
        name: "jacobian preserves the integral",
        module: "clusters",
        anchor: "jacobian of the label transformation",
        comparison: Comparison::AtMost,
        threshold: 1e-6,
        samples: 1,
        run: jacobian_integral,
    },
    Check {
        name: "quadrature convergence",
        module: "clusters",
        anchor: "discretized two-particle integral",
        comparison: Comparison::Below,
        threshold: 0.1,
        samples: 2,
        run: quadrature_convergence,
    },
    Check {
        name: "order of smearing and integration",
        module: "clusters",
        anchor: "multiply oscillators first, then integrate",
        comparison: Comparison::Above,
        threshold: 0.0,
        samples: 1,
        run: order_of_operations,
    },
    Check {
        name: "massless bilocal brackets",
        module: "starprod",
        anchor: "bilocal field equation",
        comparison: Comparison::AtMost,
        threshold: 1e-12,
        samples: 100,
        run: massless_brackets,
    },
    Check {
        name: "massive bilocal brackets",
        module: "starprod",
        anchor: "bilocal field equation with mass term",
        comparison: Comparison::AtMost,
        threshold: 1e-12,
        samples: 100,
        run: massive_brackets,
    },
    Check {
        name: "cross-factor cancellation",
        module: "starprod",
        anchor: "nonlocal coupling of the bilocal equation",
        comparison: Comparison::AtMost,
        threshold: 1e-12,
        samples: 100,
        run: cross_factor_cancellation,
    },
    Check {
        name: "imaginary time shift",
        module: "starprod",
        anchor: "nonlocal coupling of the bilocal equation",
        comparison: Comparison::AtMost,
        threshold: 1e-12,
        samples: 100,
        run: time_shift,
    },
    Check {
        name: "Moyal phase",
        module: "starprod",
        anchor: "Moyal-Weyl plane-wave product",
        comparison: Comparison::AtMost,
        threshold: 1e-14,
        samples: 100,
        run: moyal_phase,
    },
    Check {
        name: "Moyal brackets factorize",
        module: "starprod",
        anchor: "free bilocal equation of the Moyal product",
        comparison: Comparison::AtMost,
        threshold: 1e-12,
        samples: 100,
        run: moyal_factorization,
    },
    Check {
        name: "circ/star equivalence",
        module: "starprod",
        anchor: "duality of the circ and star products",
        comparison: Comparison::AtMost,
        threshold: 1e-10,
        samples: 100,
        run: circ_star,
    },
];

/// Names of every invariant, in report order.
pub fn invariant_names() -> Vec<&'static str> {
    SUITE.iter().map(|s| s.name).collect()
}

fn salt(name: &str) -> u64 {
    // FNV-1a, so each suite draws from its own stream
    name.bytes().fold(0xcbf2_9ce4_8422_2325u64, |h, b| {
        (h ^ b as u64).wrapping_mul(0x0100_0000_01b3)
    })
}

pub fn verify(cfg: &RunConfig) -> Result<VerifyReport, CliError> {
    let env = Env {
        ctx: KappaContext::new(cfg.kappa, cfg.m0)?,
        flip_table: cfg.flip_table,
        massterm: cfg.massterm,
        convention: cfg.exponent_convention,
    };
    let invariants: Vec<InvariantRecord> = SUITE
        .iter()
        .map(|s| {
            let mut rng = SplitMix64::new(cfg.seed ^ salt(s.name));
            let (residual, error) = match (s.run)(&env, &mut rng, s.samples) {
                Ok(v) => (Some(v), None),
                Err(e) => (None, Some(e.to_string())),
            };
            InvariantRecord {
                name: s.name,
                module: s.module,
                anchor: s.anchor,
                pass: residual.is_some_and(|v| s.comparison.holds(v, s.threshold)),
                residual: residual.filter(|v| v.is_finite()),
                comparison: s.comparison,
                threshold: s.threshold,
                samples: s.samples,
                error,
            }
        })
        .collect();
    let failed = invariants.iter().filter(|r| !r.pass).count();
    Ok(VerifyReport {
        passed: invariants.len() - failed,
        failed,
        invariants,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::Scenario;

    #[test]
    fn names_are_unique() {
        let mut names = invariant_names();
        let n = names.len();
        names.sort();
        names.dedup();
        assert_eq!(names.len(), n);
    }

    #[test]
    fn comparisons() {
        assert!(Comparison::AtMost.holds(0.0, 0.0));
        assert!(!Comparison::Above.holds(0.0, 0.0));
        assert!(Comparison::Below.holds(-1.0, 0.0));
        assert!(!Comparison::AtMost.holds(f64::NAN, 1.0));
    }

    #[test]
    fn corrupted_flip_table_fails_only_the_involution() {
        let mut cfg = RunConfig::defaults(Scenario::Verify);
        cfg.flip_table = FlipTable::CORRUPTED;
        let r = verify(&cfg).unwrap();
        let failed: Vec<_> = r.failures().map(|f| f.name).collect();
        assert_eq!(failed, vec!["tau involution"]);
    }
}
