//! Problem instance: interval endpoints and the Bessel order.

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum ConfigError {
    #[error("endpoint count {0} is even; expected an odd number of endpoints")]
    EvenEndpointCount(usize),
    #[error("endpoint {0} is not strictly positive")]
    NonPositiveEndpoint(f64),
    #[error("endpoints not strictly increasing at position {0}")]
    NonIncreasingEndpoints(usize),
    #[error("alpha = {0} out of range (requires alpha > -1)")]
    AlphaOutOfRange(f64),
    #[error("empty endpoint list")]
    Empty,
}

/// Validated instance: `0 < x_1 < ... < x_{2g+1}` and `alpha > -1`.
///
/// The gap set is `(0, x_1) u (x_2, x_3) u ... u (x_{2g}, x_{2g+1})`, and
/// the associated branch points sit at `-x_1, ..., -x_{2g+1}` (plus
/// infinity).
#[derive(Debug, Clone, PartialEq)]
pub struct Configuration {
    x: Vec<f64>,
    alpha: f64,
}

impl Configuration {
    pub fn new(x: Vec<f64>, alpha: f64) -> Result<Configuration, ConfigError> {
        validate(x, alpha)
    }

    /// Endpoints `x_1..x_{2g+1}`, strictly increasing.
    #[inline]
    pub fn x(&self) -> &[f64] {
        &self.x
    }

    /// `x_k`, 1-based as in the endpoint numbering.
    #[inline]
    pub fn xk(&self, k: usize) -> f64 {
        self.x[k - 1]
    }

    #[inline]
    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// Genus `g = (len(x) - 1) / 2`.
    #[inline]
    pub fn genus(&self) -> usize {
        (self.x.len() - 1) / 2
    }

    /// Gap `j` of the spectral set on the negative axis:
    /// `(-x_{2j+1}, -x_{2j})`, `j = 1..g`.
    pub fn gap(&self, j: usize) -> (f64, f64) {
        debug_assert!(j >= 1 && j <= self.genus());
        (-self.xk(2 * j + 1), -self.xk(2 * j))
    }

    /// Finite cut `j`: `(-x_{2j}, -x_{2j-1})`, `j = 1..g`. Cut `g+1` is the
    /// unbounded `(-inf, -x_{2g+1})` and is not produced here.
    pub fn cut(&self, j: usize) -> (f64, f64) {
        debug_assert!(j >= 1 && j <= self.genus());
        (-self.xk(2 * j), -self.xk(2 * j - 1))
    }

    /// Intervals of the scaled gap set `r * I_g` on the positive axis.
    pub fn scaled_intervals(&self, r: f64) -> Vec<(f64, f64)> {
        let g = self.genus();
        let mut out = Vec::with_capacity(g + 1);
        out.push((0.0, r * self.xk(1)));
        for j in 1..=g {
            out.push((r * self.xk(2 * j), r * self.xk(2 * j + 1)));
        }
        out
    }
}

/// Checks ordering, positivity, parity and the order constraint, returning
/// the canonical configuration.
pub fn validate(x: Vec<f64>, alpha: f64) -> Result<Configuration, ConfigError> {
    if x.is_empty() {
        return Err(ConfigError::Empty);
    }
    if x.len() % 2 == 0 {
        return Err(ConfigError::EvenEndpointCount(x.len()));
    }
    if !alpha.is_finite() || alpha <= -1.0 {
        return Err(ConfigError::AlphaOutOfRange(alpha));
    }
    for (i, &v) in x.iter().enumerate() {
        if !v.is_finite() || v <= 0.0 {
            return Err(ConfigError::NonPositiveEndpoint(v));
        }
        if i > 0 && v <= x[i - 1] {
            return Err(ConfigError::NonIncreasingEndpoints(i + 1));
        }
    }
    Ok(Configuration { x, alpha })
}
