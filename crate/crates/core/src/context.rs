use serde::{Deserialize, Serialize};

use crate::error::{KappaError, Result};

/// Contexts with `kappa` at or above this value are treated as the classical regime.
pub const CLASSICAL_KAPPA: f64 = 1e9;

/// Deformation scale, rest mass and numeric tolerances shared by every computation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KappaContext {
    pub kappa: f64,
    pub m0: f64,
    pub tol_shell: f64,
    pub tol_solver: f64,
    pub max_iter: usize,
}

impl Default for KappaContext {
    fn default() -> Self {
        KappaContext {
            kappa: 1.0,
            m0: 1.0,
            tol_shell: 1e-12,
            tol_solver: 1e-13,
            max_iter: 200,
        }
    }
}

impl KappaContext {
    pub fn new(kappa: f64, m0: f64) -> Result<Self> {
        KappaContext {
            kappa,
            m0,
            ..Default::default()
        }
        .validated()
    }

    pub fn with_tolerances(mut self, tol_shell: f64, tol_solver: f64) -> Result<Self> {
        self.tol_shell = tol_shell;
        self.tol_solver = tol_solver;
        self.validated()
    }

    pub fn with_max_iter(mut self, max_iter: usize) -> Result<Self> {
        self.max_iter = max_iter;
        self.validated()
    }

    pub fn validated(self) -> Result<Self> {
        let mut problems = Vec::new();
        if !(self.kappa.is_finite() && self.kappa > 0.0) {
            problems.push(format!(
                "kappa must be positive and finite (got {})",
                self.kappa
            ));
        }
        if !(self.m0.is_finite() && self.m0 >= 0.0) {
            problems.push(format!(
                "m0 must be nonnegative and finite (got {})",
                self.m0
            ));
        }
        if !(self.tol_shell > 0.0) {
            problems.push(format!(
                "tol_shell must be positive (got {})",
                self.tol_shell
            ));
        }
        if !(self.tol_solver > 0.0) {
            problems.push(format!(
                "tol_solver must be positive (got {})",
                self.tol_solver
            ));
        }
        if self.max_iter == 0 {
            problems.push("max_iter must be positive".to_string());
        }
        if problems.is_empty() {
            Ok(self)
        } else {
            Err(KappaError::InvalidContext(problems.join("; ")))
        }
    }

    pub fn is_classical(&self) -> bool {
        self.kappa >= CLASSICAL_KAPPA
    }

    /// Same tolerances, different deformation scale.
    pub fn with_kappa(mut self, kappa: f64) -> Result<Self> {
        self.kappa = kappa;
        self.validated()
    }

    pub fn with_mass(mut self, m0: f64) -> Result<Self> {
        self.m0 = m0;
        self.validated()
    }
}
