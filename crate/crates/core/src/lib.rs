//! Kappa-deformed oscillator kinematics and algebra.
//!
//! * [`kinematics`]: deformed dispersion relation and non-Abelian momentum composition.
//! * [`shell`]: coupled mass-shell solver for binary products.
//! * [`osc`]: the circ-product rewrite system on oscillator words.
//! * [`flip`]: the deformed flip operator and its conservation laws.
//! * [`clusters`]: two-particle kernels on momentum grids and their factorizability.
//! * [`starprod`]: star-product plane waves, bilocal operator symbols, Moyal contrast.

// `!(x > 0.0)` is used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod clusters;
pub mod context;
pub mod error;
pub mod flip;
pub mod kinematics;
pub mod osc;
pub mod report;
pub mod shell;
pub mod starprod;

pub use context::KappaContext;
pub use error::{KappaError, Result};
pub use kinematics::{FourMomentum, Vec3};
pub use osc::{Kind, Monomial, OscFactor, TermSum};
pub use shell::{ShellAssignment, ShellSolution, Sign};
