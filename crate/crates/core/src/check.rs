//! Uniform pass/fail records for invariant checks, shared by the library
//! self-tests and the CLI `selftest` command.

#[derive(Debug, Clone)]
pub struct Check {
    pub name: String,
    pub residual: f64,
    pub tol: f64,
    pub pass: bool,
}

impl Check {
    pub fn new(name: impl Into<String>, residual: f64, tol: f64) -> Check {
        let pass = residual.is_finite() && residual < tol;
        Check {
            name: name.into(),
            residual,
            tol,
            pass,
        }
    }

    /// A check that asserts a condition rather than a residual.
    pub fn flag(name: impl Into<String>, pass: bool) -> Check {
        Check {
            name: name.into(),
            residual: if pass { 0.0 } else { 1.0 },
            tol: 1.0,
            pass,
        }
    }
}

impl std::fmt::Display for Check {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "{}: {} (residual {:.3e}, tol {:.1e})",
            if self.pass { "PASS" } else { "FAIL" },
            self.name,
            self.residual,
            self.tol
        )
    }
}
