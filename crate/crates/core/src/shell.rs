//! Coupled mass-shell systems for binary oscillator products.
//!
//! Inside a binary product each partner's energy depends on both
//! three-momenta:
//!
//! ```text
//! p0 = omega(kp * exp(sign_p * q0 / 2 kappa))
//! q0 = omega(kq * exp(sign_q * p0 / 2 kappa))
//! ```
//!
//! The solver runs a damped fixed-point iteration seeded at the standard
//! shell energies and falls back to Newton's method with a finite-difference
//! Jacobian when the fixed point is slow or unstable. Only the principal,
//! positive-energy branch is searched.

use nalgebra::{Matrix2, Vector2};
use serde::{Deserialize, Serialize};

use crate::context::KappaContext;
use crate::error::{KappaError, Result};
use crate::kinematics::{omega_from_norm_sq, Vec3};
use crate::osc::Kind;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn value(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }

    pub fn from_value(v: f64) -> Self {
        if v >= 0.0 {
            Sign::Plus
        } else {
            Sign::Minus
        }
    }

    pub fn flipped(self) -> Self {
        match self {
            Sign::Plus => Sign::Minus,
            Sign::Minus => Sign::Plus,
        }
    }
}

/// Which rescaled shell each partner of a binary product sits on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ShellAssignment {
    pub sign_p: Sign,
    pub sign_q: Sign,
}

impl ShellAssignment {
    pub const fn new(sign_p: Sign, sign_q: Sign) -> Self {
        ShellAssignment { sign_p, sign_q }
    }

    /// Assignment for the word `a^(left) a^(right)`: the left factor feels
    /// the right kind's sign, the right factor the opposite of the left's.
    pub fn for_kinds(left: Kind, right: Kind) -> Self {
        ShellAssignment {
            sign_p: Sign::from_value(right.sign()),
            sign_q: Sign::from_value(-left.sign()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShellSolution {
    pub p0: f64,
    pub q0: f64,
    pub iterations: usize,
    pub residual: f64,
}

/// The fixed-point map of a coupled pair. `rate` multiplies the energy in the
/// exponent: `0.5` for the oscillator shells, `1.0` for the full-exponent
/// smearing convention.
#[derive(Debug, Clone, Copy)]
pub(crate) struct CoupledSystem {
    pub kp2: f64,
    pub kq2: f64,
    pub sp: f64,
    pub sq: f64,
    pub rate: f64,
}

impl CoupledSystem {
    fn image(&self, x: Vector2<f64>, ctx: &KappaContext) -> Vector2<f64> {
        // |k e^s|^2 = |k|^2 e^{2s}
        let ep = 2.0 * self.sp * self.rate * x.y / ctx.kappa;
        let eq = 2.0 * self.sq * self.rate * x.x / ctx.kappa;
        Vector2::new(
            omega_from_norm_sq(self.kp2 * ep.exp(), ctx),
            omega_from_norm_sq(self.kq2 * eq.exp(), ctx),
        )
    }

    fn defect(&self, x: Vector2<f64>, ctx: &KappaContext) -> Vector2<f64> {
        x - self.image(x, ctx)
    }

    pub fn residual(&self, x: Vector2<f64>, ctx: &KappaContext) -> f64 {
        let d = self.defect(x, ctx);
        let r = d.x.abs().max(d.y.abs());
        if r.is_nan() {
            f64::INFINITY
        } else {
            r
        }
    }

    pub fn solve(&self, ctx: &KappaContext) -> Result<ShellSolution> {
        let seed = Vector2::new(
            omega_from_norm_sq(self.kp2, ctx),
            omega_from_norm_sq(self.kq2, ctx),
        );
        let mut x = seed;
        let mut r = self.residual(x, ctx);
        let mut iterations = 0;

        let mut damping = 1.0;
        let fixed_point_budget = ctx.max_iter / 2;
        while iterations < fixed_point_budget && r > ctx.tol_solver {
            let next = x + (self.image(x, ctx) - x) * damping;
            let r_next = self.residual(next, ctx);
            if r_next > r {
                damping *= 0.5;
            }
            x = next;
            r = r_next;
            iterations += 1;
            if !r.is_finite() {
                x = seed;
                r = self.residual(x, ctx);
                break;
            }
        }

        while iterations < ctx.max_iter && r > ctx.tol_solver {
            let f = self.defect(x, ctx);
            let mut jac = Matrix2::zeros();
            for i in 0..2 {
                let h = 1e-7 * x[i].abs().max(1.0);
                let mut shifted = x;
                shifted[i] += h;
                let column = (self.defect(shifted, ctx) - f) / h;
                jac.set_column(i, &column);
            }
            let Some(inv) = jac.try_inverse() else {
                break;
            };
            let step = -(inv * f);
            let mut t = 1.0;
            let mut trial = x + step;
            let mut r_trial = self.residual(trial, ctx);
            while r_trial >= r && t > 1e-6 {
                t *= 0.5;
                trial = x + step * t;
                r_trial = self.residual(trial, ctx);
            }
            iterations += 1;
            if r_trial >= r {
                break;
            }
            x = trial;
            r = r_trial;
        }

        if r <= ctx.tol_solver {
            Ok(ShellSolution {
                p0: x.x,
                q0: x.y,
                iterations,
                residual: r,
            })
        } else {
            Err(KappaError::NoConvergence {
                p0: x.x,
                q0: x.y,
                iterations,
                residual: r,
            })
        }
    }
}

/// Back-substitution residual of `(p0, q0)` in the coupled system.
pub fn coupled_residual(
    kp: &Vec3,
    kq: &Vec3,
    asg: ShellAssignment,
    p0: f64,
    q0: f64,
    ctx: &KappaContext,
) -> f64 {
    system(kp, kq, asg).residual(Vector2::new(p0, q0), ctx)
}

fn system(kp: &Vec3, kq: &Vec3, asg: ShellAssignment) -> CoupledSystem {
    CoupledSystem {
        kp2: kp.norm_squared(),
        kq2: kq.norm_squared(),
        sp: asg.sign_p.value(),
        sq: asg.sign_q.value(),
        rate: 0.5,
    }
}

pub fn solve_coupled(
    kp: &Vec3,
    kq: &Vec3,
    asg: ShellAssignment,
    ctx: &KappaContext,
) -> Result<ShellSolution> {
    system(kp, kq, asg).solve(ctx)
}

/// Energies of the partners in `a^(left)(kp) a^(right)(kq)`.
pub fn assign_binary_shells(
    kind_left: Kind,
    kind_right: Kind,
    kp: &Vec3,
    kq: &Vec3,
    ctx: &KappaContext,
) -> Result<ShellSolution> {
    solve_coupled(
        kp,
        kq,
        ShellAssignment::for_kinds(kind_left, kind_right),
        ctx,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kinematics::omega_kappa;
    use approx::assert_relative_eq;

    const PM: ShellAssignment = ShellAssignment::new(Sign::Plus, Sign::Minus);

    fn ctx(kappa: f64, m0: f64) -> KappaContext {
        KappaContext::new(kappa, m0).unwrap()
    }

    #[test]
    fn zero_momenta_decouple() {
        let c = ctx(1.3, 0.7);
        let expected = 2.0 * 1.3 * (0.7f64 / 2.6).asinh();
        for sp in [Sign::Plus, Sign::Minus] {
            for sq in [Sign::Plus, Sign::Minus] {
                let s = solve_coupled(
                    &Vec3::zeros(),
                    &Vec3::zeros(),
                    ShellAssignment::new(sp, sq),
                    &c,
                )
                .unwrap();
                assert_relative_eq!(s.p0, expected, max_relative = 1e-14);
                assert_relative_eq!(s.q0, expected, max_relative = 1e-14);
            }
        }
    }

    #[test]
    fn classical_limit() {
        let c = ctx(1e9, 1.0);
        let kp = Vec3::new(1.0, 2.0, 0.0);
        let kq = Vec3::new(0.0, -1.0, 3.0);
        let s = solve_coupled(&kp, &kq, PM, &c).unwrap();
        assert!((s.p0 - (5.0f64 + 1.0).sqrt()).abs() <= 1e-8);
        assert!((s.q0 - (10.0f64 + 1.0).sqrt()).abs() <= 1e-8);
    }

    #[test]
    fn kind_table() {
        use Kind::*;
        assert_eq!(ShellAssignment::for_kinds(Annihilation, Annihilation), PM);
        assert_eq!(
            ShellAssignment::for_kinds(Creation, Creation),
            ShellAssignment::new(Sign::Minus, Sign::Plus)
        );
        assert_eq!(
            ShellAssignment::for_kinds(Creation, Annihilation),
            ShellAssignment::new(Sign::Plus, Sign::Plus)
        );
        assert_eq!(
            ShellAssignment::for_kinds(Annihilation, Creation),
            ShellAssignment::new(Sign::Minus, Sign::Minus)
        );
    }

    #[test]
    fn newton_fallback_reports_nonconvergence_payload() {
        // Runaway regime: both partners push each other up.
        let c = ctx(1.0, 1.0);
        let asg = ShellAssignment::new(Sign::Plus, Sign::Plus);
        let err = solve_coupled(
            &Vec3::new(30.0, 0.0, 0.0),
            &Vec3::new(30.0, 0.0, 0.0),
            asg,
            &c,
        )
        .unwrap_err();
        match err {
            KappaError::NoConvergence {
                iterations,
                residual,
                ..
            } => {
                assert!(iterations <= c.max_iter);
                assert!(residual > c.tol_solver);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn onshell_transform_is_recovered() {
        let c = ctx(1.0, 1.0);
        let p = Vec3::new(0.4, -0.3, 0.2);
        let q = Vec3::new(-0.1, 0.5, 0.6);
        let p0 = omega_kappa(&p, &c);
        let q0 = omega_kappa(&q, &c);
        let pp = p * (-q0 / 2.0).exp();
        let qp = q * (p0 / 2.0).exp();
        let s = solve_coupled(&pp, &qp, PM, &c).unwrap();
        assert!((s.p0 - p0).abs() <= 1e-12);
        assert!((s.q0 - q0).abs() <= 1e-12);
    }
}
