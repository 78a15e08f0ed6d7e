//! Two-particle states and smeared clusters on momentum grids.
//!
//! Grids are one-dimensional slices of three-dimensional momentum space:
//! every sample is a vector `(k, 0, 0)`. A radial grid reads the samples as
//! magnitudes of isotropic kernels and carries the spherical weights
//! `4 pi k^2 h`, so sums over it are genuine three-dimensional integrals; a
//! line grid carries plain weights `h`. Changes of variables always use the
//! three-dimensional Jacobian.
//!
//! Smearing a binary circ product with a two-particle kernel `f(p, q)` and
//! rewriting it in fixed oscillator labels `(P, Q)` gives the kernel
//!
//! ```text
//! g(P, Q) = f(p(P, Q), q(P, Q)) / det d(P, Q)/d(p, q)
//! ```
//!
//! which is generally not a product even when `f` is.

use std::io::{Read, Write};

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::context::KappaContext;
use crate::error::{KappaError, Result};
use crate::kinematics::{omega_kappa, omega_kappa_derivative, Vec3};
use crate::osc::{circ_binary, Kind, Monomial, OscFactor};
use crate::shell::CoupledSystem;

/// Kernel magnitude, relative to the kernel maximum, below which an edge is
/// treated as decayed and points beyond it are taken as zero.
pub const EDGE_DECAY: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum GridKind {
    Radial,
    Line,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Grid2 {
    pub kind: GridKind,
    pub axis: Vec<Vec3>,
    pub weights: Vec<f64>,
    pub delta_tol: f64,
    coords: Vec<f64>,
    spacing: f64,
}

impl Grid2 {
    /// `n` cell midpoints on `(0, kmax)`.
    pub fn radial(n: usize, kmax: f64) -> Result<Self> {
        Self::build(GridKind::Radial, n, 0.0, kmax)
    }

    /// `n` cell midpoints on `(-kmax, kmax)`.
    pub fn line(n: usize, kmax: f64) -> Result<Self> {
        Self::build(GridKind::Line, n, -kmax, kmax)
    }

    fn build(kind: GridKind, n: usize, lo: f64, hi: f64) -> Result<Self> {
        if n < 2 || !(hi > lo) || !hi.is_finite() {
            return Err(KappaError::InvalidContext(format!(
                "grid needs at least 2 points and a positive finite range (got {n} points, kmax {hi})"
            )));
        }
        let h = (hi - lo) / n as f64;
        let coords: Vec<f64> = (0..n).map(|i| lo + (i as f64 + 0.5) * h).collect();
        let weights = coords
            .iter()
            .map(|k| match kind {
                GridKind::Radial => 4.0 * std::f64::consts::PI * k * k * h,
                GridKind::Line => h,
            })
            .collect();
        Ok(Grid2 {
            kind,
            axis: coords.iter().map(|&k| Vec3::new(k, 0.0, 0.0)).collect(),
            weights,
            delta_tol: 0.5 * h,
            coords,
            spacing: h,
        })
    }

    pub fn len(&self) -> usize {
        self.coords.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    /// Linear interpolation stencil at `x`: `Ok(None)` when `x` lies more
    /// than a cell outside the grid.
    fn stencil(&self, x: f64) -> Option<(usize, usize, f64)> {
        let n = self.coords.len();
        let t = (x - self.coords[0]) / self.spacing;
        if t < -1.0 || t > (n - 1) as f64 + 1.0 {
            return None;
        }
        let i = (t.floor().max(0.0) as usize).min(n - 2);
        Some((i, i + 1, t - i as f64))
    }
}

/// Entry of an amplitude in its CSV and JSON forms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AmplitudeEntry {
    pub i: usize,
    pub j: usize,
    pub re: f64,
    pub im: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Amplitude2 {
    pub values: DMatrix<Complex64>,
}

impl Amplitude2 {
    pub fn new(values: DMatrix<Complex64>) -> Self {
        Amplitude2 { values }
    }

    pub fn from_fn(grid: &Grid2, f: impl Fn(f64, f64) -> Complex64) -> Self {
        let c = grid.coords();
        Amplitude2 {
            values: DMatrix::from_fn(c.len(), c.len(), |i, j| f(c[i], c[j])),
        }
    }

    /// `f(p) g(q)` sampled on the grid.
    pub fn product(
        grid: &Grid2,
        f: impl Fn(f64) -> Complex64,
        g: impl Fn(f64) -> Complex64,
    ) -> Self {
        Self::from_fn(grid, |p, q| f(p) * g(q))
    }

    pub fn gaussian_product(grid: &Grid2, sigma: f64) -> Self {
        let f = |k: f64| Complex64::new((-k * k / (2.0 * sigma * sigma)).exp(), 0.0);
        Self::product(grid, f, f)
    }

    pub fn dim(&self) -> usize {
        self.values.nrows()
    }

    pub fn check_grid(&self, grid: &Grid2) -> Result<()> {
        let n = grid.len();
        if self.values.nrows() != n || self.values.ncols() != n {
            return Err(KappaError::DimensionMismatch {
                expected: n,
                found: self.values.nrows().max(self.values.ncols()),
            });
        }
        if self
            .values
            .iter()
            .any(|z| !z.re.is_finite() || !z.im.is_finite())
        {
            return Err(KappaError::Parse("amplitude has non-finite entries".into()));
        }
        Ok(())
    }

    pub fn entries(&self) -> Vec<AmplitudeEntry> {
        let mut out = Vec::with_capacity(self.values.len());
        for i in 0..self.values.nrows() {
            for j in 0..self.values.ncols() {
                let z = self.values[(i, j)];
                out.push(AmplitudeEntry {
                    i,
                    j,
                    re: z.re,
                    im: z.im,
                });
            }
        }
        out
    }

    pub fn from_entries(n: usize, entries: &[AmplitudeEntry]) -> Result<Self> {
        let mut values = DMatrix::zeros(n, n);
        for e in entries {
            if e.i >= n || e.j >= n {
                return Err(KappaError::DimensionMismatch {
                    expected: n,
                    found: e.i.max(e.j) + 1,
                });
            }
            values[(e.i, e.j)] = Complex64::new(e.re, e.im);
        }
        Ok(Amplitude2 { values })
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        for e in self.entries() {
            wr.serialize(e)?;
        }
        wr.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(n: usize, r: R) -> Result<Self> {
        let mut rd = csv::Reader::from_reader(r);
        let entries = rd
            .deserialize()
            .collect::<std::result::Result<Vec<AmplitudeEntry>, _>>()?;
        Self::from_entries(n, &entries)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(&AmplitudeJson {
            n: self.dim(),
            entries: self.entries(),
        })?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let a: AmplitudeJson = serde_json::from_str(s)?;
        Self::from_entries(a.n, &a.entries)
    }

    /// `sum_ij w_i w_j f_ij`.
    pub fn integral(&self, grid: &Grid2) -> Complex64 {
        let mut s = Complex64::new(0.0, 0.0);
        for i in 0..self.values.nrows() {
            for j in 0..self.values.ncols() {
                s += self.values[(i, j)] * grid.weights[i] * grid.weights[j];
            }
        }
        s
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn max_abs_diff(&self, other: &Amplitude2) -> f64 {
        (&self.values - &other.values)
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct AmplitudeJson {
    n: usize,
    entries: Vec<AmplitudeEntry>,
}

/// The ket `a+(p) o a+(q)` with both energies on the standard shell.
pub fn two_particle_state(p: &Vec3, q: &Vec3, ctx: &KappaContext) -> Monomial {
    circ_binary(
        &OscFactor::on_shell(Kind::Creation, *p, ctx),
        &OscFactor::on_shell(Kind::Creation, *q, ctx),
        ctx,
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum ExponentConvention {
    /// `exp(+-e / 2 kappa)`, as in the binary circ product.
    Half,
    /// `exp(+-e / kappa)`, as in the smeared cluster formula.
    #[default]
    Full,
}

impl ExponentConvention {
    pub fn rate(self) -> f64 {
        match self {
            ExponentConvention::Half => 0.5,
            ExponentConvention::Full => 1.0,
        }
    }
}

/// Forward change of variables `(p, q) -> (P, Q)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ChangeOfVariables {
    Identity,
    /// `P = lp p`, `Q = lq q`.
    Scaling {
        lp: f64,
        lq: f64,
    },
    /// `P = p exp(sp rate w(q) / kappa)`, `Q = q exp(sq rate w(p) / kappa)`.
    Coupled {
        sp: f64,
        sq: f64,
        rate: f64,
    },
}

impl ChangeOfVariables {
    /// The `a a` flip-frame transform.
    pub const ANNIHILATION_FRAME: Self = ChangeOfVariables::Coupled {
        sp: -1.0,
        sq: 1.0,
        rate: 0.5,
    };
    /// The `a+ a+` flip-frame transform.
    pub const CREATION_FRAME: Self = ChangeOfVariables::Coupled {
        sp: 1.0,
        sq: -1.0,
        rate: 0.5,
    };
    /// The `a+ a` flip-frame transform.
    pub const MIXED_FRAME: Self = ChangeOfVariables::Coupled {
        sp: -1.0,
        sq: -1.0,
        rate: 0.5,
    };

    /// Label rescaling of the smeared circ product.
    pub fn smearing(convention: ExponentConvention) -> Self {
        ChangeOfVariables::Coupled {
            sp: 1.0,
            sq: -1.0,
            rate: convention.rate(),
        }
    }

    pub fn forward(&self, p: f64, q: f64, ctx: &KappaContext) -> (f64, f64) {
        match *self {
            ChangeOfVariables::Identity => (p, q),
            ChangeOfVariables::Scaling { lp, lq } => (lp * p, lq * q),
            ChangeOfVariables::Coupled { sp, sq, rate } => {
                let wp = omega_kappa(&Vec3::new(p, 0.0, 0.0), ctx);
                let wq = omega_kappa(&Vec3::new(q, 0.0, 0.0), ctx);
                (
                    p * (sp * rate * wq / ctx.kappa).exp(),
                    q * (sq * rate * wp / ctx.kappa).exp(),
                )
            }
        }
    }

    /// `det d(P, Q) / d(p, q)` of the three-dimensional map.
    pub fn forward_det(&self, p: f64, q: f64, ctx: &KappaContext) -> f64 {
        match *self {
            ChangeOfVariables::Identity => 1.0,
            ChangeOfVariables::Scaling { lp, lq } => (lp * lq).powi(3),
            ChangeOfVariables::Coupled { sp, sq, rate } => {
                let (ap, aq) = (p.abs(), q.abs());
                let a = sp * rate * omega_kappa(&Vec3::new(q, 0.0, 0.0), ctx) / ctx.kappa;
                let b = sq * rate * omega_kappa(&Vec3::new(p, 0.0, 0.0), ctx) / ctx.kappa;
                let cross = sp
                    * sq
                    * rate
                    * rate
                    * omega_kappa_derivative(ap, ctx)
                    * ap
                    * omega_kappa_derivative(aq, ctx)
                    * aq
                    / (ctx.kappa * ctx.kappa);
                (3.0 * (a + b)).exp() * (1.0 - cross)
            }
        }
    }

    /// Preimage `(p, q)` of `(P, Q)`.
    pub fn inverse(&self, big_p: f64, big_q: f64, ctx: &KappaContext) -> Result<(f64, f64)> {
        match *self {
            ChangeOfVariables::Identity => Ok((big_p, big_q)),
            ChangeOfVariables::Scaling { lp, lq } => Ok((big_p / lp, big_q / lq)),
            ChangeOfVariables::Coupled { sp, sq, rate } => {
                // energies of the preimage: w(p) = w(P e^{-sp rate w(q)/k}), and mirrored
                let sys = CoupledSystem {
                    kp2: big_p * big_p,
                    kq2: big_q * big_q,
                    sp: -sp,
                    sq: -sq,
                    rate,
                };
                let s = sys.solve(ctx)?;
                Ok((
                    big_p * (-sp * rate * s.q0 / ctx.kappa).exp(),
                    big_q * (-sq * rate * s.p0 / ctx.kappa).exp(),
                ))
            }
        }
    }
}

fn check_invertible(map: &ChangeOfVariables, grid: &Grid2, ctx: &KappaContext) -> Result<()> {
    let c = grid.coords();
    for (i, &p) in c.iter().enumerate() {
        for (j, &q) in c.iter().enumerate() {
            let det = map.forward_det(p, q, ctx);
            if !(det > 0.0) {
                return Err(KappaError::NonInvertibleMap { det, i, j });
            }
        }
    }
    Ok(())
}

/// Bilinear interpolation of a sampled kernel with at most one cell of
/// extrapolation. Farther out the kernel is zero if the edge it leaves
/// through has decayed, otherwise the range error is reported.
struct Interpolator<'a> {
    grid: &'a Grid2,
    f: &'a Amplitude2,
    decayed: [bool; 4],
}

impl<'a> Interpolator<'a> {
    fn new(grid: &'a Grid2, f: &'a Amplitude2) -> Self {
        let n = grid.len();
        let floor = EDGE_DECAY * f.max_abs();
        let row = |i: usize| (0..n).all(|j| f.values[(i, j)].norm() <= floor);
        let col = |j: usize| (0..n).all(|i| f.values[(i, j)].norm() <= floor);
        Interpolator {
            grid,
            f,
            decayed: [row(0), row(n - 1), col(0), col(n - 1)],
        }
    }

    fn axis(&self, x: f64, lo_edge: usize) -> Result<Option<(usize, usize, f64)>> {
        if let Some(s) = self.grid.stencil(x) {
            return Ok(Some(s));
        }
        let c = self.grid.coords();
        let below = x < c[0];
        if self.decayed[lo_edge + usize::from(!below)] {
            Ok(None)
        } else {
            let h = self.grid.spacing();
            Err(KappaError::GridRangeExceeded {
                value: x,
                lo: c[0] - h,
                hi: c[c.len() - 1] + h,
            })
        }
    }

    fn at(&self, p: f64, q: f64) -> Result<Complex64> {
        let (Some((i0, i1, tp)), Some((j0, j1, tq))) = (self.axis(p, 0)?, self.axis(q, 2)?) else {
            return Ok(Complex64::new(0.0, 0.0));
        };
        let v = &self.f.values;
        Ok(v[(i0, j0)] * ((1.0 - tp) * (1.0 - tq))
            + v[(i1, j0)] * (tp * (1.0 - tq))
            + v[(i0, j1)] * ((1.0 - tp) * tq)
            + v[(i1, j1)] * (tp * tq))
    }
}

/// `f~(P, Q) = f(p(P, Q), q(P, Q)) / det d(P,Q)/d(p,q)` with `f` interpolated from samples.
pub fn jacobian_reweight(
    f2: &Amplitude2,
    map: &ChangeOfVariables,
    grid: &Grid2,
    ctx: &KappaContext,
) -> Result<Amplitude2> {
    f2.check_grid(grid)?;
    check_invertible(map, grid, ctx)?;
    if *map == ChangeOfVariables::Identity {
        return Ok(f2.clone());
    }
    let interp = Interpolator::new(grid, f2);
    let c = grid.coords();
    let n = c.len();
    let mut values = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            let (p, q) = map.inverse(c[i], c[j], ctx)?;
            values[(i, j)] = interp.at(p, q)? / map.forward_det(p, q, ctx);
        }
    }
    Ok(Amplitude2 { values })
}

/// Same as [`jacobian_reweight`] with the kernel evaluated exactly at the preimages.
pub fn jacobian_reweight_fn(
    f: impl Fn(f64, f64) -> Complex64,
    map: &ChangeOfVariables,
    grid: &Grid2,
    ctx: &KappaContext,
) -> Result<Amplitude2> {
    check_invertible(map, grid, ctx)?;
    let c = grid.coords();
    let n = c.len();
    let mut values = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            let (p, q) = map.inverse(c[i], c[j], ctx)?;
            values[(i, j)] = f(p, q) / map.forward_det(p, q, ctx);
        }
    }
    Ok(Amplitude2 { values })
}

/// Effective kernel of the smeared circ product in fixed oscillator labels,
/// with the full-exponent rescaling.
pub fn smear_cluster(f2: &Amplitude2, grid: &Grid2, ctx: &KappaContext) -> Result<Amplitude2> {
    smear_cluster_with(f2, grid, ExponentConvention::Full, ctx)
}

pub fn smear_cluster_with(
    f2: &Amplitude2,
    grid: &Grid2,
    convention: ExponentConvention,
    ctx: &KappaContext,
) -> Result<Amplitude2> {
    jacobian_reweight(f2, &ChangeOfVariables::smearing(convention), grid, ctx)
}

/// The opposite order: integrate each packet first, then rescale with the
/// packets' mean energies. The rescaling is a fixed dilation, so product
/// kernels stay products.
pub fn integrate_then_smear(
    f2: &Amplitude2,
    grid: &Grid2,
    convention: ExponentConvention,
    ctx: &KappaContext,
) -> Result<Amplitude2> {
    f2.check_grid(grid)?;
    let c = grid.coords();
    let w = &grid.weights;
    let (mut norm, mut ep, mut eq) = (0.0, 0.0, 0.0);
    for i in 0..c.len() {
        for j in 0..c.len() {
            let m = f2.values[(i, j)].norm() * w[i] * w[j];
            norm += m;
            ep += m * omega_kappa(&grid.axis[i], ctx);
            eq += m * omega_kappa(&grid.axis[j], ctx);
        }
    }
    if norm == 0.0 {
        return Ok(f2.clone());
    }
    let rate = convention.rate();
    let map = ChangeOfVariables::Scaling {
        lp: (rate * eq / norm / ctx.kappa).exp(),
        lq: (-rate * ep / norm / ctx.kappa).exp(),
    };
    jacobian_reweight(f2, &map, grid, ctx)
}

/// `1 - s1^2 / sum s_k^2` over the singular values of the kernel matrix.
pub fn factorizability_metric(f2: &Amplitude2) -> f64 {
    let s = f2.values.clone().singular_values();
    let total: f64 = s.iter().map(|x| x * x).sum();
    if total == 0.0 {
        return 0.0;
    }
    let top = s.iter().cloned().fold(0.0, f64::max);
    let rest: f64 = s.iter().map(|x| x * x).sum::<f64>() - top * top;
    (rest / total).clamp(0.0, 1.0)
}

/// The standard cluster fixture: Gaussian product packets on a radial grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianFixture {
    pub points: usize,
    pub kmax: f64,
    pub sigma: f64,
    pub m0: f64,
}

impl Default for GaussianFixture {
    fn default() -> Self {
        GaussianFixture {
            points: 8,
            kmax: 2.88,
            sigma: 0.5,
            m0: 0.25,
        }
    }
}

impl GaussianFixture {
    pub fn grid(&self) -> Result<Grid2> {
        Grid2::radial(self.points, self.kmax)
    }

    /// Factorizability metric of the smeared fixture at the given `kappa`.
    pub fn metric(&self, kappa: f64, convention: ExponentConvention) -> Result<f64> {
        let ctx = KappaContext::new(kappa, self.m0)?;
        let grid = self.grid()?;
        let f2 = Amplitude2::gaussian_product(&grid, self.sigma);
        Ok(factorizability_metric(&smear_cluster_with(
            &f2, &grid, convention, &ctx,
        )?))
    }
}
