//! Quadrature rules for the segment integrals.
//!
//! Two kinds are used throughout: Gauss-Legendre for smooth integrands and a
//! cosine-substitution rule for integrands with inverse-square-root endpoint
//! behavior. The Legendre constructor is generic over the scalar so the
//! determinant solver can request double-double nodes.

use crate::real::Real;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum QuadError {
    #[error("quadrature not converged: last delta {delta:.3e} at order {order}")]
    NotConverged { order: usize, delta: f64 },
}

/// Kind of node/weight rule held by a [`QuadratureRule`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RuleKind {
    /// `s = m + h cos(theta)` substitution; integrates
    /// `f(s)/sqrt((b-s)(s-a))` exactly for polynomial `f` up to the order.
    CosSubstitution,
    /// Plain Gauss-Legendre for smooth integrands.
    Legendre,
}

/// Nodes and weights on a concrete interval `(a, b)`.
#[derive(Debug, Clone)]
pub struct QuadratureRule {
    pub kind: RuleKind,
    pub order: usize,
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl QuadratureRule {
    /// Gauss-Legendre rule mapped to `(a, b)`.
    pub fn legendre(order: usize, a: f64, b: f64) -> QuadratureRule {
        assert!(order >= 2 && b > a);
        let (x, w) = gauss_legendre::<f64>(order);
        let mid = 0.5 * (a + b);
        let half = 0.5 * (b - a);
        QuadratureRule {
            kind: RuleKind::Legendre,
            order,
            nodes: x.iter().map(|&t| mid + half * t).collect(),
            weights: w.iter().map(|&t| half * t).collect(),
        }
    }

    /// Rule for `int_a^b f(s)/sqrt((b-s)(s-a)) ds`: apply the weights to
    /// plain `f` values at the nodes.
    pub fn cos_substitution(order: usize, a: f64, b: f64) -> QuadratureRule {
        assert!(order >= 2 && b > a);
        let mid = 0.5 * (a + b);
        let half = 0.5 * (b - a);
        let w = std::f64::consts::PI / order as f64;
        let nodes = (1..=order)
            .map(|k| mid + half * ((2.0 * k as f64 - 1.0) * w / 2.0).cos())
            .collect();
        QuadratureRule {
            kind: RuleKind::CosSubstitution,
            order,
            nodes,
            weights: vec![w; order],
        }
    }

    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(x))
            .sum()
    }
}

/// Gauss-Legendre nodes and weights on `(-1, 1)`, by Newton iteration on the
/// Legendre polynomial with Chebyshev initial guesses.
pub fn gauss_legendre<T: Real>(n: usize) -> (Vec<T>, Vec<T>) {
    let mut nodes = vec![T::zero(); n];
    let mut weights = vec![T::zero(); n];
    let nf = n as f64;
    for k in 0..n {
        // seed accurate to ~1e-4, polished below
        let guess = (std::f64::consts::PI * (k as f64 + 0.75) / (nf + 0.5)).cos();
        let mut x = T::from_f64(guess);
        for _ in 0..64 {
            let (p, d) = legendre_pair(n, x);
            let dx = p / d;
            x = x - dx;
            if dx.abs().to_f64() < 8.0 * T::EPS {
                break;
            }
        }
        let (_, dp) = legendre_pair(n, x);
        let one = T::one();
        nodes[n - 1 - k] = x;
        weights[n - 1 - k] = T::from_f64(2.0) / ((one - x * x) * dp * dp);
    }
    (nodes, weights)
}

/// Legendre polynomial P_n and derivative at `x` via the three-term
/// recurrence.
fn legendre_pair<T: Real>(n: usize, x: T) -> (T, T) {
    let mut p0 = T::one();
    let mut p1 = x;
    for k in 2..=n {
        let kf = T::from_f64(k as f64);
        let a = T::from_f64((2 * k - 1) as f64);
        let b = T::from_f64((k - 1) as f64);
        let p2 = (a * x * p1 - b * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let nf = T::from_f64(n as f64);
    let d = nf * (x * p1 - p0) / (x * x - T::one());
    (p1, d)
}

/// Doubles the order until successive values agree to `rel_tol`, starting at
/// `base` and capped at `max_order`.
pub fn converge<F: Fn(usize) -> f64>(
    eval: F,
    base: usize,
    rel_tol: f64,
    max_order: usize,
) -> Result<f64, QuadError> {
    let mut order = base;
    let mut prev = eval(order);
    while order < max_order {
        order *= 2;
        let next = eval(order);
        let delta = (next - prev).abs();
        if delta <= rel_tol * next.abs().max(1.0) {
            return Ok(next);
        }
        prev = next;
    }
    Err(QuadError::NotConverged {
        order,
        delta: f64::NAN,
    })
}

/// `int_a^b f(s)/sqrt(s-a) ds` via `s = a + (b-a) u^2`, Legendre in `u`.
pub fn integrate_sqrt_left<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, order: usize) -> f64 {
    let rule = QuadratureRule::legendre(order, 0.0, 1.0);
    let len = b - a;
    2.0 * len.sqrt() * rule.integrate(|u| f(a + len * u * u))
}
