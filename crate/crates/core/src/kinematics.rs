//! Deformed dispersion relation and the non-Abelian composition of
//! four-momenta.
//!
//! Units are `hbar = c = 1`; `kappa` carries energy units and every momentum
//! is expressed in the same unit. The mass shell is
//!
//! ```text
//! (2 kappa sinh(e / 2 kappa))^2 - |k|^2 = m0^2
//! ```
//!
//! and two momenta compose as
//!
//! ```text
//! (p + q).k = p.k exp(q.e / 2 kappa) + q.k exp(-p.e / 2 kappa)
//! (p + q).e = p.e + q.e
//! ```

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use crate::context::KappaContext;
use crate::error::{KappaError, Result};

pub type Vec3 = Vector3<f64>;

/// Energy plus spatial momentum. On-shell status is always computed, never stored.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FourMomentum {
    pub e: f64,
    pub k: Vec3,
}

impl FourMomentum {
    pub const ZERO: FourMomentum = FourMomentum {
        e: 0.0,
        k: Vector3::new(0.0, 0.0, 0.0),
    };

    pub fn new(e: f64, k: Vec3) -> Self {
        FourMomentum { e, k }
    }

    /// Energy taken from the standard shell for the given spatial momentum.
    pub fn on_shell(k: Vec3, ctx: &KappaContext) -> Self {
        FourMomentum {
            e: omega_kappa(&k, ctx),
            k,
        }
    }

    pub fn is_finite(&self) -> bool {
        self.e.is_finite() && self.k.iter().all(|c| c.is_finite())
    }

    pub fn is_on_shell(&self, ctx: &KappaContext) -> bool {
        shell_residual(self, ctx) <= ctx.tol_shell
    }

    pub fn neg(&self) -> Self {
        FourMomentum {
            e: -self.e,
            k: -self.k,
        }
    }
}

/// `asinh` as `ln(x + sqrt(x^2 + 1))`, rearranged through `ln_1p`, with a
/// series branch near zero.
pub fn arcsinh(x: f64) -> f64 {
    let a = x.abs();
    let r = if a < 1e-4 {
        let a2 = a * a;
        a * (1.0 - a2 / 6.0 + 3.0 * a2 * a2 / 40.0)
    } else if a > 1e150 {
        a.ln() + std::f64::consts::LN_2
    } else {
        let s = (a * a + 1.0).sqrt();
        (a + a * a / (s + 1.0)).ln_1p()
    };
    r.copysign(x)
}

/// Positive-energy solution of the deformed mass shell.
pub fn omega_kappa(k: &Vec3, ctx: &KappaContext) -> f64 {
    omega_from_norm_sq(k.norm_squared(), ctx)
}

pub(crate) fn omega_from_norm_sq(k2: f64, ctx: &KappaContext) -> f64 {
    let kappa = ctx.kappa;
    2.0 * kappa * arcsinh((k2 + ctx.m0 * ctx.m0).sqrt() / (2.0 * kappa))
}

/// `d omega / d|k|` at the given magnitude.
pub fn omega_kappa_derivative(k_norm: f64, ctx: &KappaContext) -> f64 {
    let r2 = k_norm * k_norm + ctx.m0 * ctx.m0;
    if r2 == 0.0 {
        return 0.0;
    }
    let r = r2.sqrt();
    let x = r / (2.0 * ctx.kappa);
    (k_norm / r) / (1.0 + x * x).sqrt()
}

/// `2 kappa sinh(e / 2 kappa)`, the deformed energy entering the shell.
pub fn deformed_energy(e: f64, ctx: &KappaContext) -> f64 {
    2.0 * ctx.kappa * (e / (2.0 * ctx.kappa)).sinh()
}

pub fn shell_residual(p: &FourMomentum, ctx: &KappaContext) -> f64 {
    let d = deformed_energy(p.e, ctx);
    (d * d - p.k.norm_squared() - ctx.m0 * ctx.m0).abs()
}

pub fn compose(p: &FourMomentum, q: &FourMomentum, ctx: &KappaContext) -> FourMomentum {
    let two_kappa = 2.0 * ctx.kappa;
    FourMomentum {
        e: p.e + q.e,
        k: p.k * (q.e / two_kappa).exp() + q.k * (-p.e / two_kappa).exp(),
    }
}

/// Total momentum of the exchanged pair; identical to `compose(q, p)`.
pub fn compose_flipped(p: &FourMomentum, q: &FourMomentum, ctx: &KappaContext) -> FourMomentum {
    compose(q, p, ctx)
}

pub fn compose_n(momenta: &[FourMomentum], ctx: &KappaContext) -> Result<FourMomentum> {
    let (first, rest) = momenta.split_first().ok_or(KappaError::EmptyComposition)?;
    Ok(rest.iter().fold(*first, |acc, m| compose(&acc, m, ctx)))
}
