//! The deformed flip operator on binary oscillator products.
//!
//! For `x = a^(eps)(p, p0)` and `y = a^(eta)(q, q0)` the flip is
//!
//! ```text
//! tau(x y) = a^(eta)(q exp(-eps p0 / kappa), q0) a^(eps)(p exp(eta q0 / kappa), p0)
//! ```
//!
//! with `eps, eta = +1` for annihilators and `-1` for creators. The input
//! energies must solve the coupled shells of the word (see
//! [`ShellAssignment::for_kinds`]); the flipped energies are re-solved on the
//! flipped word's shells and checked against the carried labels.

use serde::Serialize;

use crate::context::KappaContext;
use crate::error::{KappaError, Result};
use crate::kinematics::{compose, omega_kappa, FourMomentum, Vec3};
use crate::osc::{circ_binary, Kind, Monomial, MonomialReport, OscFactor};
use crate::report::{FourMomentumReport, Sig17};
use crate::shell::{coupled_residual, solve_coupled, ShellAssignment, Sign};

/// Relative disagreement allowed between carried and re-solved flipped energies.
pub const FLIP_ENERGY_TOL: f64 = 1e-9;

/// Exponent rates of the flip table. The standard table uses full
/// exponents on both sides; anything else exists to exercise the
/// verification suite's failure path.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlipTable {
    pub left_rate: f64,
    pub right_rate: f64,
}

impl FlipTable {
    pub const STANDARD: FlipTable = FlipTable {
        left_rate: 1.0,
        right_rate: 1.0,
    };

    /// Left exponent halved: breaks both the shell agreement and `tau^2 = 1`.
    pub const CORRUPTED: FlipTable = FlipTable {
        left_rate: 0.5,
        right_rate: 1.0,
    };
}

impl Default for FlipTable {
    fn default() -> Self {
        Self::STANDARD
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FlipResult {
    pub word: Monomial,
    /// Composed adjoint eigenvalue of the flipped word.
    pub conserved_momentum: FourMomentum,
    /// Sum of the flipped word's energy labels.
    pub energy_total: f64,
}

impl FlipResult {
    pub fn to_report(&self) -> FlipReport {
        FlipReport {
            word: MonomialReport::from(&self.word),
            conserved_momentum: FourMomentumReport::from(&self.conserved_momentum),
            energy_total: Sig17(self.energy_total),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct FlipReport {
    pub word: MonomialReport,
    pub conserved_momentum: FourMomentumReport,
    pub energy_total: Sig17,
}

fn scale_of(a: f64, b: f64) -> f64 {
    1f64.max(a.abs()).max(b.abs())
}

/// Builds `a^(kx)(kp, p0) a^(ky)(kq, q0)` with energies on the word's coupled shells.
pub fn binary_word(
    kx: Kind,
    ky: Kind,
    kp: Vec3,
    kq: Vec3,
    ctx: &KappaContext,
) -> Result<(OscFactor, OscFactor)> {
    let s = solve_coupled(&kp, &kq, ShellAssignment::for_kinds(kx, ky), ctx)?;
    Ok((OscFactor::new(kx, kp, s.p0), OscFactor::new(ky, kq, s.q0)))
}

pub fn tau_kappa(x: &OscFactor, y: &OscFactor, ctx: &KappaContext) -> Result<FlipResult> {
    tau_kappa_with(x, y, FlipTable::STANDARD, ctx)
}

pub fn tau_kappa_with(
    x: &OscFactor,
    y: &OscFactor,
    table: FlipTable,
    ctx: &KappaContext,
) -> Result<FlipResult> {
    let tolerance = ctx.tol_solver * scale_of(x.e, y.e);
    let residual = coupled_residual(
        &x.k,
        &y.k,
        ShellAssignment::for_kinds(x.kind, y.kind),
        x.e,
        y.e,
        ctx,
    );
    if !(residual <= tolerance) {
        return Err(KappaError::OffAssignment {
            residual,
            tolerance,
        });
    }

    let (eps, eta) = (x.kind.sign(), y.kind.sign());
    let left_k = y.k * (-eps * table.left_rate * x.e / ctx.kappa).exp();
    let right_k = x.k * (eta * table.right_rate * y.e / ctx.kappa).exp();

    let s = solve_coupled(
        &left_k,
        &right_k,
        ShellAssignment::for_kinds(y.kind, x.kind),
        ctx,
    )?;
    let deviation =
        ((s.p0 - y.e).abs() / scale_of(s.p0, y.e)).max((s.q0 - x.e).abs() / scale_of(s.q0, x.e));
    if !(deviation <= FLIP_ENERGY_TOL) {
        return Err(KappaError::FlipMismatch { deviation });
    }

    let left = OscFactor::new(y.kind, left_k, s.p0);
    let right = OscFactor::new(x.kind, right_k, s.q0);
    Ok(FlipResult {
        conserved_momentum: compose(&left.eigenvalue(), &right.eigenvalue(), ctx),
        energy_total: s.p0 + s.q0,
        word: Monomial::word(vec![left, right]),
    })
}

/// Largest relative label deviation of `tau(tau(x y))` from `x y`.
pub fn tau_involution_check(x: &OscFactor, y: &OscFactor, ctx: &KappaContext) -> Result<f64> {
    tau_involution_check_with(x, y, FlipTable::STANDARD, ctx)
}

pub fn tau_involution_check_with(
    x: &OscFactor,
    y: &OscFactor,
    table: FlipTable,
    ctx: &KappaContext,
) -> Result<f64> {
    let once = tau_kappa_with(x, y, table, ctx)?;
    let (u, v) = (once.word.factors[0], once.word.factors[1]);
    let twice = tau_kappa_with(&u, &v, table, ctx)?;
    Ok(twice
        .word
        .label_deviation(&Monomial::word(vec![*x, *y]))
        .unwrap_or(f64::INFINITY))
}

/// Norm of the change in composed momentum and in total energy under the flip.
pub fn flip_conservation(x: &OscFactor, y: &OscFactor, ctx: &KappaContext) -> Result<(f64, f64)> {
    let flipped = tau_kappa(x, y, ctx)?;
    let before = compose(&x.eigenvalue(), &y.eigenvalue(), ctx);
    let momentum = (before.k - flipped.conserved_momentum.k).norm();
    let energy = (x.e + y.e - flipped.energy_total).abs();
    Ok((momentum, energy))
}

/// Energy bookkeeping of the naive flip with every factor on the standard
/// shell: the labels of `a(p) o a(q)` are swapped into those of
/// `a(q) o a(p)` but the energies are recomputed from the standard
/// dispersion relation, which does not conserve the two-particle energy.
pub fn onshell_flip_energy_defect(p: &Vec3, q: &Vec3, ctx: &KappaContext) -> f64 {
    let two_kappa = 2.0 * ctx.kappa;
    let p0 = omega_kappa(p, ctx);
    let q0 = omega_kappa(q, ctx);
    let before = omega_kappa(&(p * (-q0 / two_kappa).exp()), ctx)
        + omega_kappa(&(q * (p0 / two_kappa).exp()), ctx);
    let after = omega_kappa(&(q * (-p0 / two_kappa).exp()), ctx)
        + omega_kappa(&(p * (q0 / two_kappa).exp()), ctx);
    (before - after).abs()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum FrameVariant {
    /// `a a`: `(p e^{-q0/2k}, q e^{p0/2k})`
    Annihilation,
    /// `a+ a+`: `(p e^{q0/2k}, q e^{-p0/2k})`
    Creation,
    /// `a+ a`: `(p e^{-q0/2k}, q e^{-p0/2k})`
    CreationAnnihilation,
    /// Relabelling of the mixed `a a+` flip relation: `(e^{q0/k} p, e^{-p0/k} q)`,
    /// taking the energies from the given four-momenta.
    MixedInverse,
}

impl FrameVariant {
    fn exponents(self) -> (f64, f64, f64) {
        // (sign on q0 for p, sign on p0 for q, rate)
        match self {
            FrameVariant::Annihilation => (-1.0, 1.0, 0.5),
            FrameVariant::Creation => (1.0, -1.0, 0.5),
            FrameVariant::CreationAnnihilation => (-1.0, -1.0, 0.5),
            FrameVariant::MixedInverse => (1.0, -1.0, 1.0),
        }
    }

    /// Coupled-shell assignment satisfied by the transformed labels.
    pub fn assignment(self) -> Option<ShellAssignment> {
        match self {
            FrameVariant::Annihilation => Some(ShellAssignment::for_kinds(
                Kind::Annihilation,
                Kind::Annihilation,
            )),
            FrameVariant::Creation => {
                Some(ShellAssignment::for_kinds(Kind::Creation, Kind::Creation))
            }
            FrameVariant::CreationAnnihilation => Some(ShellAssignment::for_kinds(
                Kind::Creation,
                Kind::Annihilation,
            )),
            FrameVariant::MixedInverse => None,
        }
    }

    pub fn kinds(self) -> (Kind, Kind) {
        match self {
            FrameVariant::Annihilation => (Kind::Annihilation, Kind::Annihilation),
            FrameVariant::Creation => (Kind::Creation, Kind::Creation),
            FrameVariant::CreationAnnihilation => (Kind::Creation, Kind::Annihilation),
            FrameVariant::MixedInverse => (Kind::Annihilation, Kind::Creation),
        }
    }
}

pub fn transform_to_flip_frame(
    p: &FourMomentum,
    q: &FourMomentum,
    variant: FrameVariant,
    ctx: &KappaContext,
) -> (Vec3, Vec3) {
    let (sp, sq, rate) = variant.exponents();
    (
        p.k * (sp * rate * q.e / ctx.kappa).exp(),
        q.k * (sq * rate * p.e / ctx.kappa).exp(),
    )
}

/// Inverse of [`transform_to_flip_frame`]: recovers the standard-shell pair
/// by solving the coupled shells of the variant and undoing the rescaling.
/// For [`FrameVariant::MixedInverse`] the energies are read from `p0`, `q0`.
pub fn transform_from_flip_frame(
    p: &Vec3,
    q: &Vec3,
    variant: FrameVariant,
    energies: Option<(f64, f64)>,
    ctx: &KappaContext,
) -> Result<(FourMomentum, FourMomentum)> {
    let (p0, q0) = match (variant.assignment(), energies) {
        (Some(asg), _) => {
            let s = solve_coupled(p, q, asg, ctx)?;
            (s.p0, s.q0)
        }
        (None, Some(e)) => e,
        (None, None) => {
            return Err(KappaError::InvalidContext(
                "energies required for this variant".into(),
            ))
        }
    };
    let (sp, sq, rate) = variant.exponents();
    Ok((
        FourMomentum::new(p0, p * (-sp * rate * q0 / ctx.kappa).exp()),
        FourMomentum::new(q0, q * (-sq * rate * p0 / ctx.kappa).exp()),
    ))
}

#[derive(Debug, Clone)]
pub struct EquivalenceReport {
    /// `x o y` written as a plain word.
    pub circ_left: Monomial,
    /// `y o x` written as a plain word.
    pub circ_right: Monomial,
    /// The transformed word `x' y'` with energies from the coupled shells.
    pub flip_left: Monomial,
    /// `tau(x' y')`.
    pub flip_right: Monomial,
    pub max_deviation: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct EquivalenceReportJson {
    pub circ_left: MonomialReport,
    pub circ_right: MonomialReport,
    pub flip_left: MonomialReport,
    pub flip_right: MonomialReport,
    pub max_deviation: Sig17,
}

impl EquivalenceReport {
    pub fn to_report(&self) -> EquivalenceReportJson {
        EquivalenceReportJson {
            circ_left: MonomialReport::from(&self.circ_left),
            circ_right: MonomialReport::from(&self.circ_right),
            flip_left: MonomialReport::from(&self.flip_left),
            flip_right: MonomialReport::from(&self.flip_right),
            max_deviation: Sig17(self.max_deviation),
        }
    }
}

/// Checks that the circ exchange relation `x o y = y o x` for on-shell `a(p)`, `a(q)`
/// becomes the flip relation `w = tau(w)` once the labels are moved into
/// the flip frame and the energies re-solved on the coupled shells.
pub fn equivalence_check(p: &Vec3, q: &Vec3, ctx: &KappaContext) -> Result<EquivalenceReport> {
    equivalence_check_kinds(Kind::Annihilation, Kind::Annihilation, p, q, ctx)
}

/// Same check for any pair of kinds.
pub fn equivalence_check_kinds(
    kx: Kind,
    ky: Kind,
    p: &Vec3,
    q: &Vec3,
    ctx: &KappaContext,
) -> Result<EquivalenceReport> {
    let x = OscFactor::on_shell(kx, *p, ctx);
    let y = OscFactor::on_shell(ky, *q, ctx);
    let circ_left = circ_binary(&x, &y, ctx);
    let circ_right = circ_binary(&y, &x, ctx);

    let (pp, qp) = match (kx, ky) {
        (Kind::Annihilation, Kind::Annihilation) => transform_to_flip_frame(
            &x.four_momentum(),
            &y.four_momentum(),
            FrameVariant::Annihilation,
            ctx,
        ),
        (Kind::Creation, Kind::Creation) => transform_to_flip_frame(
            &x.four_momentum(),
            &y.four_momentum(),
            FrameVariant::Creation,
            ctx,
        ),
        (Kind::Creation, Kind::Annihilation) => transform_to_flip_frame(
            &x.four_momentum(),
            &y.four_momentum(),
            FrameVariant::CreationAnnihilation,
            ctx,
        ),
        // no printed frame; the circ labels themselves define it
        (Kind::Annihilation, Kind::Creation) => (circ_left.factors[0].k, circ_left.factors[1].k),
    };
    let (u, v) = binary_word(kx, ky, pp, qp, ctx)?;
    let flip_left = Monomial::word(vec![u, v]);
    let flip_right = tau_kappa(&u, &v, ctx)?.word;

    let d1 = circ_left
        .label_deviation(&flip_left)
        .unwrap_or(f64::INFINITY);
    let d2 = circ_right
        .label_deviation(&flip_right)
        .unwrap_or(f64::INFINITY);
    Ok(EquivalenceReport {
        circ_left,
        circ_right,
        flip_left,
        flip_right,
        max_deviation: d1.max(d2),
    })
}

/// The assignment of the flipped word, i.e. the kinds exchanged.
pub fn flipped_assignment(asg: ShellAssignment) -> ShellAssignment {
    // (eta, -eps) -> (eps, -eta)
    ShellAssignment::new(
        Sign::from_value(-asg.sign_q.value()),
        Sign::from_value(-asg.sign_p.value()),
    )
}
