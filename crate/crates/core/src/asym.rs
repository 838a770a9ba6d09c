//! Assembly of the large-`r` expansions of `log F(r x)` in the four
//! regimes, plus the constant-fitting harness used to compare against the
//! direct determinant.
//!
//! Every prediction is constant-free: the additive constant of the
//! expansion is not available in closed form (except at `g = 0`,
//! `alpha = 0`, where it vanishes), so comparisons always go through
//! [`fit_constant`].

use crate::flow::{DivisorSolver, FlowClass, FlowError, FlowVerdict};
use crate::surface::{SurfaceData, SurfaceError};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum AsymError {
    #[error("negative r = {0}")]
    NegativeR(f64),
    #[error("r = {r} must exceed the lower integration limit M = {m}")]
    RBelowM { r: f64, m: f64 },
    #[error("the {0:?} regime requires a rationally independent frequency vector")]
    RegimeRequiresErgodic(Regime),
    #[error("regime {regime:?} applies to genus {expected}, got {got}")]
    GenusMismatch {
        regime: Regime,
        expected: usize,
        got: usize,
    },
    #[error("need at least {0} grid points")]
    InsufficientPoints(usize),
    #[error(transparent)]
    Flow(#[from] FlowError),
    #[error(transparent)]
    Surface(#[from] SurfaceError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    /// Full expansion with the oscillatory integral from `M`.
    General,
    /// Log coefficient corrected by the time averages `B_j`; valid under
    /// good Diophantine properties of the frequencies.
    Diophantine,
    /// `B_j = 2` exactly; the order-one oscillations are dropped
    /// (the error is only `o(log r)`).
    Ergodic,
    /// Ergodic log coefficient with the theta oscillation retained.
    DioErgodic,
    /// Genus-0 closed form.
    G0Closed,
    /// Genus-1 closed form (every genus-1 flow qualifies).
    G1Closed,
}

/// A fully assembled constant-free expansion.
pub struct Expansion<'a> {
    pub regime: Regime,
    /// coefficient of `r`
    pub c_r: f64,
    /// `d_1`; the expansion carries `- d_1 sqrt(r)`
    pub d1: f64,
    /// coefficient of `log r`
    pub log_coeff: f64,
    /// whether `log theta(nu(r))` is included
    pub theta_term: bool,
    /// lower integration limit of the oscillatory term (General only)
    pub m_lower: f64,
    /// estimated time averages `B_j` (Diophantine only)
    pub b_bar: Vec<f64>,
    solver: &'a DivisorSolver,
}

impl<'a> Expansion<'a> {
    /// Builds the expansion for `regime`. `flow_class` gates the regimes
    /// that assume rational independence; `m_lower` only affects
    /// [`Regime::General`]; `t_avg` is the averaging horizon used to
    /// estimate the `B_j` in the Diophantine regime.
    pub fn build(
        regime: Regime,
        surface: &SurfaceData,
        solver: &'a DivisorSolver,
        flow_class: Option<&FlowClass>,
        m_lower: f64,
        t_avg: f64,
    ) -> Result<Expansion<'a>, AsymError> {
        let g = surface.genus();
        let alpha = surface.config().alpha();
        match regime {
            Regime::G0Closed if g != 0 => {
                return Err(AsymError::GenusMismatch {
                    regime,
                    expected: 0,
                    got: g,
                })
            }
            Regime::G1Closed if g != 1 => {
                return Err(AsymError::GenusMismatch {
                    regime,
                    expected: 1,
                    got: g,
                })
            }
            Regime::Ergodic | Regime::DioErgodic => {
                if let Some(fc) = flow_class {
                    if fc.verdict == FlowVerdict::RationallyDependent {
                        return Err(AsymError::RegimeRequiresErgodic(regime));
                    }
                }
            }
            _ => {}
        }
        let ergodic_log_coeff = -((g as f64) + 2.0 * alpha * alpha) / 8.0;
        let (log_coeff, theta_term, b_bar) = match regime {
            Regime::General => ((1.0 - 4.0 * alpha * alpha) / 16.0, true, Vec::new()),
            Regime::Diophantine => {
                let mut b_bar = Vec::with_capacity(2 * g + 1);
                for j in 1..=(2 * g + 1) {
                    b_bar.push(solver.time_average(j, t_avg)?.value);
                }
                let corr: f64 = b_bar.iter().sum::<f64>() / 32.0;
                ((1.0 - 4.0 * alpha * alpha) / 16.0 - corr, true, b_bar)
            }
            Regime::Ergodic => (ergodic_log_coeff, false, Vec::new()),
            Regime::DioErgodic | Regime::G0Closed | Regime::G1Closed => {
                (ergodic_log_coeff, true, Vec::new())
            }
        };
        Ok(Expansion {
            regime,
            c_r: surface.c,
            d1: surface.d1,
            log_coeff,
            theta_term,
            m_lower,
            b_bar,
            solver,
        })
    }

    /// Constant-free prediction of `log F(r x)`.
    pub fn predict(&self, r: f64) -> Result<f64, AsymError> {
        if r < 0.0 {
            return Err(AsymError::NegativeR(r));
        }
        let mut v = self.c_r * r - self.d1 * r.sqrt() + self.log_coeff * r.ln();
        if self.theta_term && self.solver.genus() > 0 {
            let u = self.solver.nu_mod1(r);
            let th = self.solver.theta().theta_real(u.coords()).map_err(FlowError::from)?;
            v += th.ln();
        }
        if self.regime == Regime::General {
            if r <= self.m_lower {
                return Err(AsymError::RBelowM {
                    r,
                    m: self.m_lower,
                });
            }
            let ints = self.solver.oscillatory_integral_all(self.m_lower, r)?;
            v -= ints.iter().sum::<f64>() / 32.0;
        }
        Ok(v)
    }
}

/// Constant-removal fit of direct values against a prediction.
#[derive(Debug, Clone)]
pub struct FitResult {
    /// fitted additive constant, the mean of `direct - prediction`
    pub c_hat: f64,
    /// `direct - prediction - c_hat` per grid point
    pub residuals: Vec<f64>,
    pub rms: f64,
    /// power `p` of the residual trend `~ r^p`, from the log-log slope of
    /// successive residual differences (differencing removes any constant
    /// offset exactly)
    pub drift_exponent: f64,
}

/// Fits the unknown additive constant and summarizes the residual trend.
pub fn fit_constant(
    r_grid: &[f64],
    direct: &[f64],
    predictions: &[f64],
) -> Result<FitResult, AsymError> {
    let n = r_grid.len();
    if n < 5 || direct.len() != n || predictions.len() != n {
        return Err(AsymError::InsufficientPoints(5));
    }
    let diffs: Vec<f64> = direct.iter().zip(predictions).map(|(d, p)| d - p).collect();
    let c_hat = diffs.iter().sum::<f64>() / n as f64;
    let residuals: Vec<f64> = diffs.iter().map(|d| d - c_hat).collect();
    let rms = (residuals.iter().map(|r| r * r).sum::<f64>() / n as f64).sqrt();

    // slope of log|res_{i+1} - res_i| against log of the geometric midpoint
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for i in 0..n - 1 {
        let d = (residuals[i + 1] - residuals[i]).abs();
        if d > 1e-300 {
            xs.push((r_grid[i] * r_grid[i + 1]).sqrt().ln());
            ys.push(d.ln());
        }
    }
    let drift_exponent = if xs.len() < 2 {
        0.0
    } else {
        let mx = xs.iter().sum::<f64>() / xs.len() as f64;
        let my = ys.iter().sum::<f64>() / ys.len() as f64;
        let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
        let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
        sxy / sxx
    };
    Ok(FitResult {
        c_hat,
        residuals,
        rms,
        drift_exponent,
    })
}
