//! The circ-product rewrite system on oscillator words.
//!
//! A word is an ordinary (concatenation) product of oscillator factors, each
//! labelled by a three-momentum and an energy. The circ product of two
//! factors is the concatenation of *rescaled* factors, the rescaling of each
//! factor depending on the energy of its partner:
//!
//! | pattern   | left label          | right label         |
//! |-----------|---------------------|---------------------|
//! | `a a`     | `p exp(-q0/2k)`     | `q exp(+p0/2k)`     |
//! | `a+ a+`   | `p exp(+q0/2k)`     | `q exp(-p0/2k)`     |
//! | `a+ a`    | `p exp(-q0/2k)`     | `q exp(-p0/2k)`     |
//! | `a a+`    | `p exp(+q0/2k)`     | `q exp(+p0/2k)`     |
//!
//! Energy labels are never rescaled.
//!
//! Under circ the oscillators obey the undeformed bosonic algebra, with the
//! delta placed in `[a+(p), a(q)]`. On plain words this becomes a set of local
//! rewrite rules on adjacent pairs, which [`TermSum`] uses to reach a
//! canonical form:
//!
//! * same-kind pairs are swapped by the deformed flip
//!   (`a(k1,e1) a(k2,e2) == a(k2 e^{-e1/k}, e2) a(k1 e^{e2/k}, e1)`, mirrored
//!   for creators);
//! * `a a+` pairs are normal ordered, emitting a delta term.
//!
//! Every run of same-kind factors is then identified with the circ product
//! of its *bare* labels (the labels with the neighbour rescalings removed),
//! which is invariant under the flip, so sorting the bare labels yields a
//! unique representative.

use std::cmp::Ordering;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::context::KappaContext;
use crate::error::{KappaError, Result};
use crate::kinematics::{compose_n, omega_kappa, FourMomentum, Vec3};
use crate::report::{complex, vec3, Sig17};

/// Relative label tolerance used when comparing words.
pub const LABEL_TOL: f64 = 1e-12;
/// Terms whose coefficient magnitude falls at or below this are dropped.
pub const COEFF_DROP: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Kind {
    /// `a+`, carries sign -1.
    Creation,
    /// `a`, carries sign +1.
    Annihilation,
}

impl Kind {
    pub fn sign(self) -> f64 {
        match self {
            Kind::Creation => -1.0,
            Kind::Annihilation => 1.0,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Kind::Creation => "a+",
            Kind::Annihilation => "a",
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Kind::Creation => "creation",
            Kind::Annihilation => "annihilation",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OscFactor {
    pub kind: Kind,
    pub k: Vec3,
    pub e: f64,
}

impl OscFactor {
    pub fn new(kind: Kind, k: Vec3, e: f64) -> Self {
        OscFactor { kind, k, e }
    }

    pub fn creation(k: Vec3, e: f64) -> Self {
        Self::new(Kind::Creation, k, e)
    }

    pub fn annihilation(k: Vec3, e: f64) -> Self {
        Self::new(Kind::Annihilation, k, e)
    }

    /// Factor with its energy on the standard shell.
    pub fn on_shell(kind: Kind, k: Vec3, ctx: &KappaContext) -> Self {
        Self::new(kind, k, omega_kappa(&k, ctx))
    }

    pub fn scaled(&self, factor: f64) -> Self {
        OscFactor {
            k: self.k * factor,
            ..*self
        }
    }

    /// Adjoint momentum eigenvalue. Conjugation sends `a(p)` to `a(-p)`, so
    /// creators carry the negated four-momentum.
    pub fn eigenvalue(&self) -> FourMomentum {
        FourMomentum::new(self.kind.sign() * self.e, self.k * self.kind.sign())
    }

    pub fn four_momentum(&self) -> FourMomentum {
        FourMomentum::new(self.e, self.k)
    }

    fn deviation(&self, other: &OscFactor) -> Option<f64> {
        if self.kind != other.kind {
            return None;
        }
        let mut d = rel_diff(self.e, other.e);
        for i in 0..3 {
            d = d.max(rel_diff(self.k[i], other.k[i]));
        }
        Some(d)
    }
}

/// `delta^3(arg)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeltaFactor {
    pub arg: Vec3,
}

impl DeltaFactor {
    pub fn new(arg: Vec3) -> Self {
        DeltaFactor { arg }
    }

    pub fn is_supported(&self, tol: f64) -> bool {
        self.arg.norm() <= tol
    }

    /// The delta is even; pick the sign whose leading significant component is positive.
    fn normalized(&self) -> Vec3 {
        let scale = self.arg.amax();
        for c in self.arg.iter() {
            if c.abs() > 1e-12 * scale {
                return if *c < 0.0 { -self.arg } else { self.arg };
            }
        }
        self.arg
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Monomial {
    pub coeff: Complex64,
    pub factors: Vec<OscFactor>,
    pub deltas: Vec<DeltaFactor>,
}

impl Monomial {
    pub fn scalar(coeff: Complex64) -> Self {
        Monomial {
            coeff,
            factors: Vec::new(),
            deltas: Vec::new(),
        }
    }

    pub fn word(factors: Vec<OscFactor>) -> Self {
        Monomial {
            coeff: Complex64::new(1.0, 0.0),
            factors,
            deltas: Vec::new(),
        }
    }

    pub fn with_coeff(mut self, coeff: Complex64) -> Self {
        self.coeff = coeff;
        self
    }

    pub fn scaled(mut self, factor: Complex64) -> Self {
        self.coeff *= factor;
        self
    }

    /// Ordinary product.
    pub fn concat(&self, other: &Monomial) -> Monomial {
        let mut factors = self.factors.clone();
        factors.extend_from_slice(&other.factors);
        let mut deltas = self.deltas.clone();
        deltas.extend_from_slice(&other.deltas);
        Monomial {
            coeff: self.coeff * other.coeff,
            factors,
            deltas,
        }
    }

    #[allow(clippy::len_without_is_empty)]
    pub fn len(&self) -> usize {
        self.factors.len()
    }

    pub fn is_scalar(&self) -> bool {
        self.factors.is_empty()
    }

    pub fn is_creation_only(&self) -> bool {
        self.factors.iter().all(|f| f.kind == Kind::Creation)
    }

    /// Four-momentum eigenvalue of the word under the adjoint action: the
    /// deformed composition of the factor eigenvalues, left to right.
    pub fn adjoint_eigenvalue(&self, ctx: &KappaContext) -> FourMomentum {
        let eigen: Vec<FourMomentum> = self.factors.iter().map(OscFactor::eigenvalue).collect();
        compose_n(&eigen, ctx).unwrap_or(FourMomentum::ZERO)
    }

    /// Largest relative label deviation between two words of identical
    /// shape, or `None` when the shapes differ.
    pub fn label_deviation(&self, other: &Monomial) -> Option<f64> {
        if self.factors.len() != other.factors.len() || self.deltas.len() != other.deltas.len() {
            return None;
        }
        let mut d: f64 = 0.0;
        for (a, b) in self.factors.iter().zip(&other.factors) {
            d = d.max(a.deviation(b)?);
        }
        for (a, b) in self.deltas.iter().zip(&other.deltas) {
            let (a, b) = (a.normalized(), b.normalized());
            for i in 0..3 {
                d = d.max(rel_diff(a[i], b[i]));
            }
        }
        Some(d)
    }

    fn same_word(&self, other: &Monomial, tol: f64) -> bool {
        matches!(self.label_deviation(other), Some(d) if d <= tol)
    }

    pub fn to_report(&self) -> MonomialReport {
        MonomialReport::from(self)
    }
}

fn rel_diff(a: f64, b: f64) -> f64 {
    (a - b).abs() / 1f64.max(a.abs()).max(b.abs())
}

fn label_cmp(a: &OscFactor, b: &OscFactor) -> Ordering {
    a.kind
        .cmp(&b.kind)
        .then(a.e.total_cmp(&b.e))
        .then(a.k.x.total_cmp(&b.k.x))
        .then(a.k.y.total_cmp(&b.k.y))
        .then(a.k.z.total_cmp(&b.k.z))
}

fn vec_cmp(a: &Vec3, b: &Vec3) -> Ordering {
    a.x.total_cmp(&b.x)
        .then(a.y.total_cmp(&b.y))
        .then(a.z.total_cmp(&b.z))
}

fn monomial_cmp(a: &Monomial, b: &Monomial) -> Ordering {
    a.factors
        .len()
        .cmp(&b.factors.len())
        .then(a.deltas.len().cmp(&b.deltas.len()))
        .then_with(|| {
            let kinds = a
                .factors
                .iter()
                .map(|f| f.kind)
                .cmp(b.factors.iter().map(|f| f.kind));
            kinds.then_with(|| {
                for (x, y) in a.factors.iter().zip(&b.factors) {
                    let o = label_cmp(x, y);
                    if o != Ordering::Equal {
                        return o;
                    }
                }
                for (x, y) in a.deltas.iter().zip(&b.deltas) {
                    let o = vec_cmp(&x.normalized(), &y.normalized());
                    if o != Ordering::Equal {
                        return o;
                    }
                }
                Ordering::Equal
            })
        })
}

/// Per-factor rescaling of an n-fold circ product: each factor to the left
/// with sign `t` and energy `e` contributes `exp(t e / 2k)`, each factor to
/// the right `exp(-t e / 2k)`. For creators alone this is the familiar
/// "left neighbours shrink, right neighbours stretch" rule.
pub(crate) fn nfold_exponents(factors: &[OscFactor], ctx: &KappaContext) -> Vec<f64> {
    let weights: Vec<f64> = factors.iter().map(|f| f.kind.sign() * f.e).collect();
    let total: f64 = weights.iter().sum();
    let mut left = 0.0;
    weights
        .iter()
        .map(|w| {
            let right = total - left - w;
            let x = (left - right) / (2.0 * ctx.kappa);
            left += w;
            x
        })
        .collect()
}

/// Sorts a same-kind run by bare labels and re-emits it as a plain word.
fn canonical_run(run: &mut [OscFactor], ctx: &KappaContext) {
    if run.len() < 2 {
        return;
    }
    let exps = nfold_exponents(run, ctx);
    let mut bare: Vec<OscFactor> = run
        .iter()
        .zip(&exps)
        .map(|(f, x)| f.scaled((-x).exp()))
        .collect();
    bare.sort_by(label_cmp);
    let exps = nfold_exponents(&bare, ctx);
    for (slot, (f, x)) in run.iter_mut().zip(bare.iter().zip(&exps)) {
        *slot = f.scaled(x.exp());
    }
}

/// Normal orders a word (creators to the left), collecting delta terms.
fn normal_order(m: Monomial, ctx: &KappaContext, out: &mut Vec<Monomial>) {
    let pos = m
        .factors
        .windows(2)
        .position(|w| w[0].kind == Kind::Annihilation && w[1].kind == Kind::Creation);
    let Some(i) = pos else {
        out.push(m);
        return;
    };
    let (a, c) = (m.factors[i], m.factors[i + 1]);
    let kappa = ctx.kappa;
    // a(k1,e1) a+(k2,e2) = a+(k2 e^{-e1/k}, e2) a(k1 e^{-e2/k}, e1) - delta(k2 e^{-e1/2k} - k1 e^{-e2/2k})
    let mut swapped = m.clone();
    swapped.factors[i] = c.scaled((-a.e / kappa).exp());
    swapped.factors[i + 1] = a.scaled((-c.e / kappa).exp());

    let mut contracted = m;
    contracted.factors.drain(i..i + 2);
    contracted.coeff = -contracted.coeff;
    contracted.deltas.push(DeltaFactor::new(
        c.k * (-a.e / (2.0 * kappa)).exp() - a.k * (-c.e / (2.0 * kappa)).exp(),
    ));

    normal_order(swapped, ctx, out);
    normal_order(contracted, ctx, out);
}

fn canonical_monomial(mut m: Monomial, ctx: &KappaContext) -> Monomial {
    let split = m
        .factors
        .iter()
        .position(|f| f.kind == Kind::Annihilation)
        .unwrap_or(m.factors.len());
    let (creators, annihilators) = m.factors.split_at_mut(split);
    canonical_run(creators, ctx);
    canonical_run(annihilators, ctx);
    m.deltas
        .sort_by(|a, b| vec_cmp(&a.normalized(), &b.normalized()));
    m
}

/// Linear combination of words, kept in canonical form: normal ordered,
/// same-kind runs in bare-label order, like terms merged, negligible
/// coefficients dropped and terms sorted.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct TermSum {
    terms: Vec<Monomial>,
}

impl TermSum {
    pub fn canonical(terms: Vec<Monomial>, ctx: &KappaContext) -> Self {
        let mut ordered = Vec::new();
        for t in terms {
            normal_order(t, ctx, &mut ordered);
        }
        let mut merged: Vec<Monomial> = Vec::new();
        for t in ordered.into_iter().map(|t| canonical_monomial(t, ctx)) {
            match merged.iter_mut().find(|m| m.same_word(&t, LABEL_TOL)) {
                Some(m) => m.coeff += t.coeff,
                None => merged.push(t),
            }
        }
        merged.retain(|m| m.coeff.norm() > COEFF_DROP);
        merged.sort_by(monomial_cmp);
        TermSum { terms: merged }
    }

    pub fn from_monomial(m: Monomial, ctx: &KappaContext) -> Self {
        Self::canonical(vec![m], ctx)
    }

    /// `a - b`, canonicalized.
    pub fn difference(a: &Monomial, b: &Monomial, ctx: &KappaContext) -> Self {
        Self::canonical(
            vec![a.clone(), b.clone().scaled(Complex64::new(-1.0, 0.0))],
            ctx,
        )
    }

    pub fn terms(&self) -> &[Monomial] {
        &self.terms
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    /// Largest label or coefficient deviation between two canonical sums,
    /// `None` if their term structure differs.
    pub fn max_deviation(&self, other: &TermSum) -> Option<f64> {
        if self.terms.len() != other.terms.len() {
            return None;
        }
        let mut d: f64 = 0.0;
        for (a, b) in self.terms.iter().zip(&other.terms) {
            d = d.max(a.label_deviation(b)?);
            d = d.max((a.coeff - b.coeff).norm() / 1f64.max(a.coeff.norm()));
        }
        Some(d)
    }

    pub fn approx_eq(&self, other: &TermSum, tol: f64) -> bool {
        matches!(self.max_deviation(other), Some(d) if d <= tol)
    }

    pub fn to_report(&self) -> TermSumReport {
        TermSumReport {
            terms: self.terms.iter().map(MonomialReport::from).collect(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct FactorReport {
    pub kind: &'static str,
    pub k: [Sig17; 3],
    pub e: Sig17,
}

#[derive(Debug, Clone, Serialize)]
pub struct MonomialReport {
    pub coeff: [Sig17; 2],
    pub factors: Vec<FactorReport>,
    pub deltas: Vec<[Sig17; 3]>,
}

#[derive(Debug, Clone, Serialize)]
pub struct TermSumReport {
    pub terms: Vec<MonomialReport>,
}

impl From<&OscFactor> for FactorReport {
    fn from(f: &OscFactor) -> Self {
        FactorReport {
            kind: f.kind.name(),
            k: vec3(&f.k),
            e: Sig17(f.e),
        }
    }
}

impl From<&Monomial> for MonomialReport {
    fn from(m: &Monomial) -> Self {
        MonomialReport {
            coeff: complex(m.coeff),
            factors: m.factors.iter().map(FactorReport::from).collect(),
            deltas: m.deltas.iter().map(|d| vec3(&d.arg)).collect(),
        }
    }
}

/// Binary circ product, following the kind table in the module docs.
pub fn circ_binary(x: &OscFactor, y: &OscFactor, ctx: &KappaContext) -> Monomial {
    let two_kappa = 2.0 * ctx.kappa;
    let (left, right) = match (x.kind, y.kind) {
        (Kind::Annihilation, Kind::Annihilation) => (-y.e, x.e),
        (Kind::Creation, Kind::Creation) => (y.e, -x.e),
        (Kind::Creation, Kind::Annihilation) => (-y.e, -x.e),
        (Kind::Annihilation, Kind::Creation) => (y.e, x.e),
    };
    Monomial::word(vec![
        x.scaled((left / two_kappa).exp()),
        y.scaled((right / two_kappa).exp()),
    ])
}

/// `x o y - y o x` in canonical form.
pub fn circ_commutator(x: &OscFactor, y: &OscFactor, ctx: &KappaContext) -> TermSum {
    TermSum::difference(&circ_binary(x, y, ctx), &circ_binary(y, x, ctx), ctx)
}

fn require_creators(factors: &[OscFactor]) -> Result<()> {
    if factors.iter().all(|f| f.kind == Kind::Creation) {
        Ok(())
    } else {
        Err(KappaError::UnsupportedFactorKind(
            "circ products of monomials are defined for creation-only words",
        ))
    }
}

/// Circ product of two creation monomials. Every factor of `m1` is
/// stretched by the summed energies of `m2`, every factor of `m2` shrunk by
/// the summed energies of `m1`.
pub fn circ_monomials(m1: &Monomial, m2: &Monomial, ctx: &KappaContext) -> Result<Monomial> {
    require_creators(&m1.factors)?;
    require_creators(&m2.factors)?;
    let two_kappa = 2.0 * ctx.kappa;
    let e1: f64 = m1.factors.iter().map(|f| f.e).sum();
    let e2: f64 = m2.factors.iter().map(|f| f.e).sum();
    let up = (e2 / two_kappa).exp();
    let down = (-e1 / two_kappa).exp();
    let mut factors: Vec<OscFactor> = m1.factors.iter().map(|f| f.scaled(up)).collect();
    factors.extend(m2.factors.iter().map(|f| f.scaled(down)));
    let mut deltas = m1.deltas.clone();
    deltas.extend_from_slice(&m2.deltas);
    Ok(Monomial {
        coeff: m1.coeff * m2.coeff,
        factors,
        deltas,
    })
}

/// n-fold circ product of creation factors. Factor `k` is rescaled by
/// `exp((sum of energies to its right - sum to its left) / 2 kappa)`.
pub fn circ_nfold(factors: &[OscFactor], ctx: &KappaContext) -> Result<Monomial> {
    require_creators(factors)?;
    let two_kappa = 2.0 * ctx.kappa;
    let total: f64 = factors.iter().map(|f| f.e).sum();
    let mut left = 0.0;
    let out = factors
        .iter()
        .map(|f| {
            let right = total - left - f.e;
            let g = f.scaled(((right - left) / two_kappa).exp());
            left += f.e;
            g
        })
        .collect();
    Ok(Monomial::word(out))
}

/// Same product written with the neighbour rule: each left neighbour
/// contributes `exp(-e/2k)`, each right neighbour `exp(+e/2k)`.
pub fn circ_nfold_neighbour_rule(factors: &[OscFactor], ctx: &KappaContext) -> Result<Monomial> {
    require_creators(factors)?;
    let two_kappa = 2.0 * ctx.kappa;
    let out = factors
        .iter()
        .enumerate()
        .map(|(i, f)| {
            let factor: f64 = factors
                .iter()
                .enumerate()
                .filter(|(j, _)| *j != i)
                .map(|(j, g)| {
                    if j < i {
                        (-g.e / two_kappa).exp()
                    } else {
                        (g.e / two_kappa).exp()
                    }
                })
                .product();
            f.scaled(factor)
        })
        .collect();
    Ok(Monomial::word(out))
}

/// The numeric factor multiplying the circ product in the relativistic variant.
pub fn relativistic_factor(x: &OscFactor, y: &OscFactor, ctx: &KappaContext) -> f64 {
    (1.5 / ctx.kappa * (omega_kappa(&x.k, ctx) - omega_kappa(&y.k, ctx))).exp()
}

pub fn circ_relativistic(x: &OscFactor, y: &OscFactor, ctx: &KappaContext) -> Monomial {
    let f = relativistic_factor(x, y, ctx);
    circ_binary(x, y, ctx).scaled(Complex64::new(f, 0.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Side {
    /// `a(r) . (a(p) o a(q) - a(q) o a(p))`
    LeftPlain,
    /// `a(r) o (a(p) o a(q) - a(q) o a(p))`
    LeftCirc,
    /// `(a(p) o a(q) - a(q) o a(p)) o a(r)`
    RightCirc,
}

/// Both words of a binary relation embedded in the three-particle sector.
#[derive(Debug, Clone, PartialEq)]
pub struct SectorFactorization {
    pub side: Side,
    /// Word built from `p o q`.
    pub first: Monomial,
    /// Word built from `q o p`.
    pub second: Monomial,
    /// Ratio of the inner pair's bare labels to `p` and `q`, measured from
    /// the first word.
    pub inner_scale: (f64, f64),
}

impl SectorFactorization {
    pub fn as_pair(&self, ctx: &KappaContext) -> (TermSum, TermSum) {
        (
            TermSum::from_monomial(self.first.clone(), ctx),
            TermSum::from_monomial(self.second.clone(), ctx),
        )
    }

    pub fn difference(&self, ctx: &KappaContext) -> TermSum {
        TermSum::difference(&self.first, &self.second, ctx)
    }
}

fn projected_scale(measured: &Vec3, reference: &Vec3) -> f64 {
    let n = reference.norm_squared();
    if n == 0.0 {
        1.0
    } else {
        measured.dot(reference) / n
    }
}

/// Factors a binary circ relation out of a creation word with a spectator
/// `r`. Depending on how the spectator is attached, the inner pair obeys the
/// binary relation with momenta shifted by `exp(-r0/2k)` (spectator circ'd
/// from the left), `exp(+r0/2k)` (from the right) or unshifted (plain product).
pub fn sector_factorization(
    r: &OscFactor,
    p: &OscFactor,
    q: &OscFactor,
    side: Side,
    ctx: &KappaContext,
) -> Result<SectorFactorization> {
    require_creators(&[*r, *p, *q])?;
    let rm = Monomial::word(vec![*r]);
    let pq = circ_binary(p, q, ctx);
    let qp = circ_binary(q, p, ctx);
    let (first, second, inner_at) = match side {
        Side::LeftPlain => (rm.concat(&pq), rm.concat(&qp), 1),
        Side::LeftCirc => (
            circ_monomials(&rm, &pq, ctx)?,
            circ_monomials(&rm, &qp, ctx)?,
            1,
        ),
        Side::RightCirc => (
            circ_monomials(&pq, &rm, ctx)?,
            circ_monomials(&qp, &rm, ctx)?,
            0,
        ),
    };
    // undo the binary rescaling of the inner pair to read off its bare labels
    let two_kappa = 2.0 * ctx.kappa;
    let bare_p = first.factors[inner_at].k * (-q.e / two_kappa).exp();
    let bare_q = first.factors[inner_at + 1].k * (p.e / two_kappa).exp();
    Ok(SectorFactorization {
        side,
        inner_scale: (
            projected_scale(&bare_p, &p.k),
            projected_scale(&bare_q, &q.k),
        ),
        first,
        second,
    })
}

#[derive(Debug, Clone)]
pub struct NonAssociativityWitness {
    /// `(a(p1) a(p2)) o (a(q1) a(q2))`
    pub circ_outer: TermSum,
    /// `a(p1) (a(p2) o a(q1)) a(q2)`
    pub circ_inner: TermSum,
    pub max_deviation: f64,
    pub equal: bool,
}

/// Absolute label tolerance used by the witness.
pub const WITNESS_TOL: f64 = 1e-9;

/// Compares the two bracketings of a mixed plain/circ product of two
/// creation pairs: the circ between whole pairs versus the circ between the
/// inner neighbours only.
pub fn mixed_nonassociativity_witness_with(
    p: [Vec3; 2],
    q: [Vec3; 2],
    ctx: &KappaContext,
) -> NonAssociativityWitness {
    let f = |k: Vec3| OscFactor::on_shell(Kind::Creation, k, ctx);
    let (p1, p2, q1, q2) = (f(p[0]), f(p[1]), f(q[0]), f(q[1]));
    let outer = circ_monomials(
        &Monomial::word(vec![p1, p2]),
        &Monomial::word(vec![q1, q2]),
        ctx,
    )
    .expect("creation-only");
    let inner = Monomial::word(vec![p1])
        .concat(&circ_binary(&p2, &q1, ctx))
        .concat(&Monomial::word(vec![q2]));
    let circ_outer = TermSum::from_monomial(outer, ctx);
    let circ_inner = TermSum::from_monomial(inner, ctx);
    let max_deviation = absolute_deviation(&circ_outer, &circ_inner);
    NonAssociativityWitness {
        equal: max_deviation <= WITNESS_TOL,
        circ_outer,
        circ_inner,
        max_deviation,
    }
}

fn absolute_deviation(a: &TermSum, b: &TermSum) -> f64 {
    if a.len() != b.len() {
        return f64::INFINITY;
    }
    let mut d: f64 = 0.0;
    for (x, y) in a.terms().iter().zip(b.terms()) {
        if x.factors.len() != y.factors.len() {
            return f64::INFINITY;
        }
        d = d.max((x.coeff - y.coeff).norm());
        for (f, g) in x.factors.iter().zip(&y.factors) {
            if f.kind != g.kind {
                return f64::INFINITY;
            }
            d = d.max((f.k - g.k).amax()).max((f.e - g.e).abs());
        }
    }
    d
}

/// Fixed small instance of the mixed non-associativity.
pub fn mixed_nonassociativity_witness(ctx: &KappaContext) -> NonAssociativityWitness {
    mixed_nonassociativity_witness_with(
        [Vec3::new(0.3, 0.1, 0.0), Vec3::new(-0.2, 0.4, 0.1)],
        [Vec3::new(0.25, -0.3, 0.2), Vec3::new(0.1, 0.2, -0.35)],
        ctx,
    )
}
