//! End-to-end acceptance run: one line per criterion, nonzero exit on any failure.

use std::process::{Command, ExitCode};
use std::time::Instant;

use kappa_cli::rng::SplitMix64;
use kappa_core::clusters::{ExponentConvention, GaussianFixture};
use kappa_core::flip::{
    binary_word, equivalence_check_kinds, flip_conservation, onshell_flip_energy_defect,
    tau_involution_check,
};
use kappa_core::kinematics::{compose, omega_kappa, shell_residual};
use kappa_core::osc::{
    circ_binary, circ_commutator, circ_monomials, circ_nfold, mixed_nonassociativity_witness,
    sector_factorization, Side,
};
use kappa_core::shell::{coupled_residual, solve_coupled};
use kappa_core::starprod::{
    bilocal_bracket_eigenvalues, circ_star_equivalence, moyal_star_planewaves, star_planewaves,
    MassTerm, OperatorSymbol, Theta,
};
use kappa_core::{
    FourMomentum, KappaContext, Kind, Monomial, OscFactor, ShellAssignment, Sign, Vec3,
};
use num_complex::Complex64;

type Outcome = Result<String, String>;
type Criterion = fn(&mut SplitMix64) -> Outcome;

const KINDS: [(Kind, Kind); 4] = [
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

fn ctx(kappa: f64, m0: f64) -> KappaContext {
    KappaContext::new(kappa, m0).unwrap()
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / 1f64.max(a.abs()).max(b.abs())
}

fn rel_vec(a: &Vec3, b: &Vec3) -> f64 {
    (a - b).amax() / 1f64.max(a.amax()).max(b.amax())
}

fn four(rng: &mut SplitMix64, r: f64) -> FourMomentum {
    let e = rng.uniform(-r, r);
    FourMomentum::new(e, rng.vec3(r))
}

/// A drawn context and momentum pair inside the solver's convergence region.
fn region(rng: &mut SplitMix64) -> (KappaContext, Vec3, Vec3) {
    let kappa = rng.uniform(0.5, 4.0);
    let c = ctx(kappa, rng.uniform(0.0, kappa.min(1.0)));
    (c, rng.vec3(0.5 * kappa), rng.vec3(0.5 * kappa))
}

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn dispersion(rng: &mut SplitMix64) -> Outcome {
    let (mut shell, mut classical) = (0f64, 0f64);
    for _ in 0..1000 {
        let kappa = 10f64.powf(rng.uniform(-1.0, 2.0));
        let m0 = rng.uniform(0.0, 2.0);
        let k = rng.vec3(5.0);
        let c = ctx(kappa, m0);
        shell = shell.max(shell_residual(&FourMomentum::on_shell(k, &c), &c));
        let exact = (k.norm_squared() + m0 * m0).sqrt();
        classical = classical.max((omega_kappa(&k, &ctx(1e9, m0)) - exact).abs() / exact);
    }
    check(
        shell <= 1e-12 && classical <= 1e-9,
        format!(
            "shell residual {shell:e} <= 1e-12, classical relative error {classical:e} <= 1e-9"
        ),
    )
}

fn composition(rng: &mut SplitMix64) -> Outcome {
    let (mut assoc, mut additivity) = (0f64, 0f64);
    for _ in 0..1000 {
        let c = ctx(10f64.powf(rng.uniform(-0.3, 1.0)), 0.0);
        let (p, q, r) = (four(rng, 2.0), four(rng, 2.0), four(rng, 2.0));
        let a = compose(&compose(&p, &q, &c), &r, &c);
        let b = compose(&p, &compose(&q, &r, &c), &c);
        assoc = assoc.max(rel_vec(&a.k, &b.k)).max(rel(a.e, b.e));
        additivity = additivity.max((compose(&p, &q, &c).e - (p.e + q.e)).abs());
    }
    let c = ctx(1.0, 0.0);
    let p = FourMomentum::new(1.0, Vec3::new(1.0, 0.0, 0.0));
    let q = FourMomentum::new(1.0, Vec3::new(0.0, 1.0, 0.0));
    let witness = (compose(&p, &q, &c).k - compose(&q, &p, &c).k).norm();
    check(
        assoc <= 1e-12 && additivity == 0.0 && witness > 0.1,
        format!("associativity {assoc:e} <= 1e-12, energy additivity {additivity:e} == 0, witness {witness:.6} > 0.1"),
    )
}

fn circ_algebra(rng: &mut SplitMix64) -> Outcome {
    let mut nonzero = 0;
    let mut abelian = 0f64;
    for kind in [Kind::Annihilation, Kind::Creation] {
        for _ in 0..1000 {
            let c = ctx(rng.uniform(0.5, 10.0), rng.uniform(0.0, 2.0));
            let (p, q) = (rng.vec3(2.0), rng.vec3(2.0));
            let (x, y) = (
                OscFactor::on_shell(kind, p, &c),
                OscFactor::on_shell(kind, q, &c),
            );
            if !circ_commutator(&x, &y, &c).is_empty() {
                nonzero += 1;
            }
            let s = kind.sign();
            let total = circ_binary(&x, &y, &c).adjoint_eigenvalue(&c);
            abelian = abelian
                .max(rel_vec(&total.k, &((p + q) * s)))
                .max(rel(total.e, s * (x.e + y.e)));
        }
    }
    let mut nfold = 0f64;
    for _ in 0..200 {
        let c = ctx(rng.uniform(0.5, 10.0), rng.uniform(0.0, 1.0));
        for len in 1..=5 {
            let fs: Vec<OscFactor> = (0..len)
                .map(|_| OscFactor::on_shell(Kind::Creation, rng.vec3(1.0), &c))
                .collect();
            let folded = fs[1..]
                .iter()
                .try_fold(Monomial::word(vec![fs[0]]), |acc, f| {
                    circ_monomials(&acc, &Monomial::word(vec![*f]), &c)
                })
                .map_err(|e| e.to_string())?;
            let direct = circ_nfold(&fs, &c).map_err(|e| e.to_string())?;
            nfold = nfold.max(direct.label_deviation(&folded).unwrap_or(f64::INFINITY));
        }
    }
    check(
        nonzero == 0 && abelian <= 1e-12 && nfold <= 1e-12,
        format!("nonvanishing same-kind commutators {nonzero}, Abelian sums {abelian:e} <= 1e-12, n-fold vs folded {nfold:e} <= 1e-12"),
    )
}

fn flip_suite(rng: &mut SplitMix64) -> Outcome {
    let (mut tau, mut conservation) = (0f64, 0f64);
    for (kx, ky) in KINDS {
        for _ in 0..250 {
            let (c, p, q) = region(rng);
            let (x, y) = binary_word(kx, ky, p, q, &c).map_err(|e| e.to_string())?;
            tau = tau.max(tau_involution_check(&x, &y, &c).map_err(|e| e.to_string())?);
            let (dk, de) = flip_conservation(&x, &y, &c).map_err(|e| e.to_string())?;
            conservation = conservation.max(dk).max(de);
        }
    }
    let (p, q) = (Vec3::new(1.0, 0.0, 0.0), Vec3::new(0.0, 2.0, 0.0));
    let deformed = onshell_flip_energy_defect(&p, &q, &ctx(1.0, 1.0));
    let classical = onshell_flip_energy_defect(&p, &q, &ctx(1e9, 1.0));
    check(
        tau <= 1e-10 && conservation <= 1e-10 && deformed > 1e-3 && classical <= 1e-9,
        format!(
            "tau^2 {tau:e} <= 1e-10, conservation {conservation:e} <= 1e-10, on-shell defect {deformed:e} > 1e-3 at kappa=1 and {classical:e} <= 1e-9 at kappa=1e9"
        ),
    )
}

fn equivalence(rng: &mut SplitMix64) -> Outcome {
    let (mut agreement, mut residual, mut iterations) = (0f64, 0f64, 0usize);
    for i in 0..250 {
        let (c, p, q) = region(rng);
        let (kx, ky) = KINDS[i % 4];
        let r = equivalence_check_kinds(kx, ky, &p, &q, &c).map_err(|e| e.to_string())?;
        agreement = agreement.max(r.max_deviation);
        for asg in ASSIGNMENTS {
            let s = solve_coupled(&p, &q, asg, &c).map_err(|e| e.to_string())?;
            residual = residual.max(coupled_residual(&p, &q, asg, s.p0, s.q0, &c));
            iterations = iterations.max(s.iterations);
        }
    }
    check(
        agreement <= 1e-10 && residual <= 1e-12 && iterations <= 200,
        format!("agreement {agreement:e} <= 1e-10, back-substitution {residual:e} <= 1e-12, iterations {iterations} <= 200"),
    )
}

fn sectors(rng: &mut SplitMix64) -> Outcome {
    let mut worst = 0f64;
    for _ in 0..250 {
        let c = ctx(rng.uniform(0.5, 10.0), rng.uniform(0.0, 1.0));
        let fs: Vec<OscFactor> = (0..3)
            .map(|_| OscFactor::on_shell(Kind::Creation, rng.vec3(1.0), &c))
            .collect();
        let shift = (fs[0].e / (2.0 * c.kappa)).exp();
        for (side, expected) in [(Side::LeftCirc, 1.0 / shift), (Side::RightCirc, shift)] {
            let s = sector_factorization(&fs[0], &fs[1], &fs[2], side, &c)
                .map_err(|e| e.to_string())?;
            worst = worst
                .max(rel(s.inner_scale.0, expected))
                .max(rel(s.inner_scale.1, expected));
        }
    }
    let deformed = mixed_nonassociativity_witness(&ctx(1.0, 1.0));
    let classical = mixed_nonassociativity_witness(&ctx(1e9, 1.0));
    check(
        worst <= 1e-12 && !deformed.equal && classical.equal,
        format!(
            "sector shifts {worst:e} <= 1e-12, witness equal={} at kappa=1 and equal={} at kappa=1e9",
            deformed.equal, classical.equal
        ),
    )
}

fn clusters(_: &mut SplitMix64) -> Outcome {
    let fx = GaussianFixture::default();
    let metric = |k: f64| {
        fx.metric(k, ExponentConvention::Full)
            .map_err(|e| e.to_string())
    };
    let m = [metric(1.0)?, metric(4.0)?, metric(16.0)?];
    let classical = metric(1e9)?;
    check(
        classical <= 1e-12 && m[0] > 1e-6 && m[0] > m[1] && m[1] > m[2],
        format!(
            "{}-point grid: metric {classical:e} <= 1e-12 at kappa=1e9, {:e} > {:e} > {:e} over kappa 1, 4, 16",
            fx.points, m[0], m[1], m[2]
        ),
    )
}

fn bilocal(rng: &mut SplitMix64) -> Outcome {
    let (mut brackets, mut symbol, mut phase) = (0f64, 0f64, 0f64);
    for _ in 0..100 {
        let (p, q, q2) = (rng.vec3(2.0), rng.vec3(2.0), rng.vec3(2.0));
        for kappa in [0.5, 1.0, 10.0] {
            let c = ctx(kappa, 0.0);
            let pair = star_planewaves(&p, &q, &c);
            let (bx, by) = bilocal_bracket_eigenvalues(&pair, MassTerm::On, &c);
            brackets = brackets.max(bx.norm()).max(by.norm());
            let cross = |pair| {
                OperatorSymbol::LaplaceX.eigenvalue(pair, &c)
                    * OperatorSymbol::ShiftY.eigenvalue(pair, &c)
            };
            let a = cross(&pair);
            let b = cross(&star_planewaves(&p, &q2, &c));
            symbol = symbol
                .max((a - b).norm())
                .max((a.re + p.norm_squared()).abs());
        }
        let mut m = [0.0; 16];
        for i in 0..4 {
            for j in (i + 1)..4 {
                let t = rng.uniform(-1.0, 1.0);
                m[4 * i + j] = t;
                m[4 * j + i] = -t;
            }
        }
        let theta = Theta::from_row_slice(&m).map_err(|e| e.to_string())?;
        let c = ctx(rng.pick(&[0.5, 1.0, 10.0]), 0.0);
        let (pm, qm) = (four(rng, 2.0), four(rng, 2.0));
        let (pv, qv) = (
            [pm.e, pm.k.x, pm.k.y, pm.k.z],
            [qm.e, qm.k.x, qm.k.y, qm.k.z],
        );
        let bilinear: f64 = (0..16).map(|n| pv[n / 4] * m[n] * qv[n % 4]).sum();
        let expected = Complex64::new(0.0, bilinear / (c.kappa * c.kappa)).exp();
        phase = phase.max((moyal_star_planewaves(&pm, &qm, &theta, &c) - expected).norm());
    }
    check(
        brackets <= 1e-12 && symbol <= 1e-12 && phase <= 1e-14,
        format!("massless brackets {brackets:e} <= 1e-12, cross symbol q-dependence {symbol:e} <= 1e-12, Moyal phase {phase:e} <= 1e-14"),
    )
}

fn circ_star(rng: &mut SplitMix64) -> Outcome {
    let mut worst = 0f64;
    let mut factor = 0f64;
    for _ in 0..100 {
        let kappa = rng.uniform(0.5, 4.0);
        let c = ctx(kappa, rng.uniform(0.0, kappa.min(1.0)));
        let p = Vec3::new(rng.uniform(-kappa, kappa), 0.0, 0.0);
        let q = Vec3::new(rng.uniform(-kappa, kappa), 0.0, 0.0);
        let r = circ_star_equivalence(&p, &q, &c).map_err(|e| e.to_string())?;
        worst = worst.max(r.max_deviation);
        factor = factor.max((r.relativistic_factor - 1.0).abs());
    }
    check(
        worst <= 1e-10 && factor > 0.0,
        format!(
            "label agreement {worst:e} <= 1e-10, largest relativistic factor offset {factor:e}"
        ),
    )
}

fn cli(_: &mut SplitMix64) -> Outcome {
    let run = || {
        Command::new(env!("CARGO_BIN_EXE_kappa"))
            .args(["verify", "--seed", "7"])
            .output()
            .map_err(|e| e.to_string())
    };
    let default = Command::new(env!("CARGO_BIN_EXE_kappa"))
        .arg("verify")
        .output()
        .map_err(|e| e.to_string())?;
    let (a, b) = (run()?, run()?);
    let code = default.status.code();
    let identical = a.stdout == b.stdout && !a.stdout.is_empty();
    check(
        code == Some(0) && identical,
        format!("verify exit code {code:?}, repeated seeded JSON identical: {identical}"),
    )
}

fn main() -> ExitCode {
    let criteria: [(&str, Criterion); 10] = [
        ("dispersion closure", dispersion),
        ("composition laws", composition),
        ("circ algebra", circ_algebra),
        ("flip suite", flip_suite),
        ("equivalence of circ and flip", equivalence),
        ("sector factorization", sectors),
        ("cluster non-factorizability", clusters),
        ("bilocal equation", bilocal),
        ("circ/star equivalence", circ_star),
        ("command line", cli),
    ];
    let start = Instant::now();
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let mut rng = SplitMix64::new(0x5eed_0000 + i as u64);
        let t = Instant::now();
        let (verdict, detail) = match run(&mut rng) {
            Ok(d) => ("PASS", d),
            Err(d) => {
                failed += 1;
                ("FAIL", d)
            }
        };
        println!(
            "{verdict} {:>2} {name}: {detail} ({:.2?})",
            i + 1,
            t.elapsed()
        );
    }
    println!(
        "{} of {} criteria passed in {:.2?}",
        criteria.len() - failed,
        criteria.len(),
        start.elapsed()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
