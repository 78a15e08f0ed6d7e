//! Star products of plane waves, operator symbols of the bilocal field
//! equation, and the Moyal contrast.
//!
//! The deformed star product rescales the spatial momenta of a plane-wave
//! pair by the partner's energy:
//!
//! ```text
//! exp(i p.x) * exp(i q.y) = exp(i (p e^{w(q)/2k} . x + q e^{-w(p)/2k} . y))
//! ```
//!
//! Inside bilocals the time phase is `exp(i (p0 x0 + q0 y0))`. Operators
//! act on such a pair through a fixed symbol table:
//!
//! | operator                | symbol                          |
//! |-------------------------|---------------------------------|
//! | `d^x_j`                 | `i star_x_j`                    |
//! | `i d^x_0`               | `-p0`                           |
//! | `laplace_x`             | `-|star_x|^2`                   |
//! | `exp(i d^y_0 / k)`      | `exp(-q0/k)`                    |
//! | `exp(-i d^x_0 / k)`     | `exp(p0/k)`                     |
//! | `(2k sinh(d_0/2k))^2`   | `-(2k sinh(p0/2k))^2`           |
//!
//! The d'Alembert row takes the hyperbolic function at real argument, which
//! is the choice that turns the bilocal brackets into the deformed mass shell.

use nalgebra::Matrix4;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::context::KappaContext;
use crate::error::{KappaError, Result};
use crate::kinematics::{deformed_energy, omega_kappa, FourMomentum, Vec3};
use crate::osc::{circ_relativistic, Kind, OscFactor};
use crate::report::{vec3, FourMomentumReport, Sig17};
use crate::shell::{solve_coupled, ShellAssignment, Sign};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlaneWavePair {
    pub p: FourMomentum,
    pub q: FourMomentum,
    pub star_spatial_x: Vec3,
    pub star_spatial_y: Vec3,
}

/// Star product of plane waves with energies on the standard shell.
pub fn star_planewaves(p: &Vec3, q: &Vec3, ctx: &KappaContext) -> PlaneWavePair {
    star_planewaves_with_energies(p, q, omega_kappa(p, ctx), omega_kappa(q, ctx), ctx)
}

/// Star product of plane waves with prescribed time frequencies; the
/// spatial rescaling uses the same energies.
pub fn star_planewaves_with_energies(
    p: &Vec3,
    q: &Vec3,
    p0: f64,
    q0: f64,
    ctx: &KappaContext,
) -> PlaneWavePair {
    let two_kappa = 2.0 * ctx.kappa;
    PlaneWavePair {
        p: FourMomentum::new(p0, *p),
        q: FourMomentum::new(q0, *q),
        star_spatial_x: p * (q0 / two_kappa).exp(),
        star_spatial_y: q * (-p0 / two_kappa).exp(),
    }
}

impl PlaneWavePair {
    /// `exp(i (p0 x0 + q0 y0))`, with complex times allowed.
    pub fn time_phase(&self, x0: Complex64, y0: Complex64) -> Complex64 {
        (Complex64::i() * (x0 * self.p.e + y0 * self.q.e)).exp()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum OperatorSymbol {
    LaplaceX,
    LaplaceY,
    /// `exp(i d^y_0 / kappa)`
    ShiftY,
    /// `exp(-i d^x_0 / kappa)`
    ShiftX,
    /// `(2 kappa sinh(d^x_0 / 2 kappa))^2`
    DalembertX,
    /// `(2 kappa sinh(d^y_0 / 2 kappa))^2`
    DalembertY,
}

impl OperatorSymbol {
    pub fn eigenvalue(self, pair: &PlaneWavePair, ctx: &KappaContext) -> Complex64 {
        let re = match self {
            OperatorSymbol::LaplaceX => -pair.star_spatial_x.norm_squared(),
            OperatorSymbol::LaplaceY => -pair.star_spatial_y.norm_squared(),
            OperatorSymbol::ShiftY => (-pair.q.e / ctx.kappa).exp(),
            OperatorSymbol::ShiftX => (pair.p.e / ctx.kappa).exp(),
            OperatorSymbol::DalembertX => -deformed_energy(pair.p.e, ctx).powi(2),
            OperatorSymbol::DalembertY => -deformed_energy(pair.q.e, ctx).powi(2),
        };
        Complex64::new(re, 0.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum MassTerm {
    /// Brackets carry an extra `- m0^2` so they vanish on the massive shell.
    #[default]
    On,
    /// The brackets exactly as in the massless bilocal equation.
    Off,
}

/// Eigenvalues of the two brackets of the bilocal field equation,
/// `laplace_x shift_y - dalembert_x` and `laplace_y shift_x - dalembert_y`.
pub fn bilocal_bracket_eigenvalues(
    pair: &PlaneWavePair,
    mass: MassTerm,
    ctx: &KappaContext,
) -> (Complex64, Complex64) {
    use OperatorSymbol::*;
    let ev = |s: OperatorSymbol| s.eigenvalue(pair, ctx);
    let mass_shift = match mass {
        MassTerm::On => ctx.m0 * ctx.m0,
        MassTerm::Off => 0.0,
    };
    (
        ev(LaplaceX) * ev(ShiftY) - ev(DalembertX) - mass_shift,
        ev(LaplaceY) * ev(ShiftX) - ev(DalembertY) - mass_shift,
    )
}

/// `Omega(p) = 2 kappa sinh(omega(p) / kappa)`, the mode measure of the free field.
pub fn mode_measure(p: &Vec3, ctx: &KappaContext) -> f64 {
    2.0 * ctx.kappa * (omega_kappa(p, ctx) / ctx.kappa).sinh()
}

#[derive(Debug, Clone, PartialEq)]
pub struct CircStarEquivalence {
    /// Plane-wave data of the circ side: the on-shell momenta themselves.
    pub circ: PlaneWavePair,
    /// Operator labels shared by both sides.
    pub labels: (Vec3, Vec3),
    /// Star side: plane waves built on the operator labels with energies on
    /// the coupled shells.
    pub star: PlaneWavePair,
    /// Relativistic factor of the circ product.
    pub relativistic_factor: f64,
    /// Leading scale `exp(3 (p0 - q0) / 2 kappa)` of the change of variables on the star side.
    pub jacobian_scale: f64,
    pub max_deviation: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct CircStarReport {
    pub circ_p: FourMomentumReport,
    pub circ_q: FourMomentumReport,
    pub star_p: FourMomentumReport,
    pub star_q: FourMomentumReport,
    pub star_spatial_x: [Sig17; 3],
    pub star_spatial_y: [Sig17; 3],
    pub relativistic_factor: Sig17,
    pub jacobian_scale: Sig17,
    pub max_deviation: Sig17,
}

impl CircStarEquivalence {
    pub fn to_report(&self) -> CircStarReport {
        CircStarReport {
            circ_p: FourMomentumReport::from(&self.circ.p),
            circ_q: FourMomentumReport::from(&self.circ.q),
            star_p: FourMomentumReport::from(&self.star.p),
            star_q: FourMomentumReport::from(&self.star.q),
            star_spatial_x: vec3(&self.star.star_spatial_x),
            star_spatial_y: vec3(&self.star.star_spatial_y),
            relativistic_factor: Sig17(self.relativistic_factor),
            jacobian_scale: Sig17(self.jacobian_scale),
            max_deviation: Sig17(self.max_deviation),
        }
    }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / 1f64.max(a.abs()).max(b.abs())
}

fn rel_vec(a: &Vec3, b: &Vec3) -> f64 {
    (0..3).map(|i| rel(a[i], b[i])).fold(0.0, f64::max)
}

/// Label-level comparison of the two pictures of a two-field product.
///
/// Circ side: `a(p) o_rel a(q)` against `exp(i (p x + q y))` with on-shell
/// energies. Star side: the same operator labels, energies from the coupled
/// shells `p0 = w(P e^{q0/2k})`, `q0 = w(Q e^{-p0/2k})`, and the star plane
/// wave. Both must carry the same spatial momenta, time frequencies and
/// numeric factor.
pub fn circ_star_equivalence(
    p: &Vec3,
    q: &Vec3,
    ctx: &KappaContext,
) -> Result<CircStarEquivalence> {
    let x = OscFactor::on_shell(Kind::Annihilation, *p, ctx);
    let y = OscFactor::on_shell(Kind::Annihilation, *q, ctx);
    let word = circ_relativistic(&x, &y, ctx);
    let (lp, lq) = (word.factors[0].k, word.factors[1].k);
    let circ = PlaneWavePair {
        p: x.four_momentum(),
        q: y.four_momentum(),
        star_spatial_x: *p,
        star_spatial_y: *q,
    };

    let s = solve_coupled(&lp, &lq, ShellAssignment::new(Sign::Plus, Sign::Minus), ctx)?;
    let star = star_planewaves_with_energies(&lp, &lq, s.p0, s.q0, ctx);
    let jacobian_scale = (1.5 * (s.p0 - s.q0) / ctx.kappa).exp();
    let relativistic_factor = word.coeff.re;

    let max_deviation = [
        rel(star.p.e, circ.p.e),
        rel(star.q.e, circ.q.e),
        rel_vec(&star.star_spatial_x, &circ.star_spatial_x),
        rel_vec(&star.star_spatial_y, &circ.star_spatial_y),
        rel(relativistic_factor, jacobian_scale),
    ]
    .into_iter()
    .fold(0.0, f64::max);

    Ok(CircStarEquivalence {
        circ,
        labels: (lp, lq),
        star,
        relativistic_factor,
        jacobian_scale,
        max_deviation,
    })
}

/// Constant noncommutativity matrix `theta^{mu nu}`, validated antisymmetric.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Theta(Matrix4<f64>);

impl Theta {
    pub fn new(m: Matrix4<f64>) -> Result<Self> {
        let defect = (m + m.transpose()).amax();
        if !(defect <= 1e-14 * m.amax().max(1.0)) {
            return Err(KappaError::ThetaNotAntisymmetric(defect));
        }
        Ok(Theta(m))
    }

    /// Row-major 16 entries.
    pub fn from_row_slice(v: &[f64]) -> Result<Self> {
        if v.len() != 16 {
            return Err(KappaError::DimensionMismatch {
                expected: 16,
                found: v.len(),
            });
        }
        Self::new(Matrix4::from_row_slice(v))
    }

    pub fn zero() -> Self {
        Theta(Matrix4::zeros())
    }

    pub fn matrix(&self) -> &Matrix4<f64> {
        &self.0
    }
}

fn components(p: &FourMomentum) -> nalgebra::Vector4<f64> {
    nalgebra::Vector4::new(p.e, p.k.x, p.k.y, p.k.z)
}

/// `exp(i p_mu theta^{mu nu} q_nu / kappa^2)`.
pub fn moyal_star_planewaves(
    p: &FourMomentum,
    q: &FourMomentum,
    theta: &Theta,
    ctx: &KappaContext,
) -> Complex64 {
    let bilinear = components(p).dot(&(theta.0 * components(q)));
    (Complex64::i() * bilinear / (ctx.kappa * ctx.kappa)).exp()
}

/// Undeformed Klein-Gordon symbols `p0^2 - |p|^2 - m0^2` of the two
/// arguments of a Moyal bilocal; each depends on its own momentum only.
pub fn moyal_bilocal_brackets(
    p: &FourMomentum,
    q: &FourMomentum,
    ctx: &KappaContext,
) -> (f64, f64) {
    let m2 = ctx.m0 * ctx.m0;
    (
        p.e * p.e - p.k.norm_squared() - m2,
        q.e * q.e - q.k.norm_squared() - m2,
    )
}
