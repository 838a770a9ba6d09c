//! The torus side of the problem: divisor points `b_k(u)`, the ratio
//! `B(z, u) = prod_k (z - b_k(u)) / q(z)`, its time and space averages
//! along the linear flow `t -> nu(t^2) mod 1`, the oscillatory integral
//! from the asymptotic expansion, and a heuristic classification of the
//! frequency vector.
//!
//! The monic polynomial `prod_k (s - b_k(u))` is recovered by evaluating
//! the theta-function ratio
//!
//! ```text
//! theta(0)^2/theta(u)^2
//!   * theta(phi(s)+e1/2+u) theta(-phi(s)+e1/2+u)
//!   / [theta(phi(s)+e1/2) theta(-phi(s)+e1/2)]
//!   * prod_k (s + x_{2k})
//! ```
//!
//! at `g+1` interpolation nodes placed inside the gaps and solving the
//! Vandermonde system for the coefficients; roots then come from closed
//! forms (`g <= 2`) or companion-matrix eigenvalues.

use crate::abel::{AbelError, AbelMap};
use crate::surface::{Complex64, SurfaceData};
use crate::theta::{ThetaError, ThetaEvaluator};
use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum FlowError {
    #[error(transparent)]
    Theta(#[from] ThetaError),
    #[error(transparent)]
    Abel(#[from] AbelError),
    #[error("theta denominator vanishes near interpolation node {0}")]
    ThetaDenominatorVanishes(f64),
    #[error("interpolation system is singular")]
    InterpolationSingular,
    #[error("divisor root {value} escapes interval {k}: [{lo}, {hi}]")]
    RootOutsideInterval { k: usize, value: f64, lo: f64, hi: f64 },
    #[error("evaluation at a root of q: q({0}) ~ 0")]
    EvaluationAtRootOfQ(f64),
    #[error("oscillatory quadrature disagreement {0:.3e} above tolerance")]
    QuadratureNotConverged(f64),
    #[error("search bound requires {0} integer vectors; reduce the bound")]
    SearchBoundTooLarge(f64),
}

/// A point of `R^g / Z^g`, stored reduced to `[0,1)^g`.
#[derive(Debug, Clone, PartialEq)]
pub struct TorusPoint {
    u: Vec<f64>,
}

impl TorusPoint {
    pub fn new(v: &[f64]) -> TorusPoint {
        TorusPoint {
            u: v.iter().map(|&x| x - x.floor()).collect(),
        }
    }

    pub fn zero(g: usize) -> TorusPoint {
        TorusPoint { u: vec![0.0; g] }
    }

    #[inline]
    pub fn coords(&self) -> &[f64] {
        &self.u
    }
}

/// The `g` divisor projections, one per gap: `b_k in [-x_{2k+1}, -x_{2k}]`.
#[derive(Debug, Clone)]
pub struct DivisorPoints {
    pub b: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FlowVerdict {
    ErgodicLikely,
    RationallyDependent,
    Inconclusive,
}

/// Result of the integer-relation search over the frequency vector.
///
/// The verdict is heuristic: exact rational independence is undecidable in
/// floating point, so `ErgodicLikely` only means that no near-relation was
/// found below the search bound.
#[derive(Debug, Clone)]
pub struct FlowClass {
    pub verdict: FlowVerdict,
    pub relations: Vec<Vec<i64>>,
    pub search_bound: usize,
}

/// Time average with its doubling history for convergence inspection.
#[derive(Debug, Clone)]
pub struct TimeAverage {
    pub value: f64,
    /// `(T, average up to T)` at the last three doublings
    pub history: Vec<(f64, f64)>,
}

const GOLDEN_FRAC: f64 = 0.618_033_988_749_894_9;

/// Divisor-point solver with precomputed theta phase tables at the
/// interpolation nodes.
pub struct DivisorSolver {
    g: usize,
    x: Vec<f64>,
    q_coeffs: Vec<f64>,
    omega: Vec<f64>,
    alpha_tilde: Vec<f64>,
    theta: ThetaEvaluator,
    nodes: Vec<f64>,
    radius: i32,
    /// `qf_n * exp(2 pi i n.(phi_i + e1/2))` per node and lattice point
    cplus: Vec<Vec<Complex64>>,
    /// same with `-phi_i`
    cminus: Vec<Vec<Complex64>>,
    /// denominators `theta(phi_i + e1/2) theta(-phi_i + e1/2)`
    den: Vec<Complex64>,
    /// quadratic factors `exp(i pi n^t tau n)` (modulus <= 1, safe to cache)
    qf: Vec<Complex64>,
    /// `prod_k (s_i + x_{2k})`
    prod_factor: Vec<f64>,
    theta0: f64,
    vander: nalgebra::LU<f64, nalgebra::Dyn, nalgebra::Dyn>,
}

impl DivisorSolver {
    pub fn new(
        surface: &SurfaceData,
        abel: &AbelMap,
        theta_tol: f64,
    ) -> Result<DivisorSolver, FlowError> {
        Self::with_node_seed(surface, abel, theta_tol, 0)
    }

    /// Alternative interpolation nodes; used to demonstrate that the
    /// result does not depend on the node placement.
    pub fn with_node_seed(
        surface: &SurfaceData,
        abel: &AbelMap,
        theta_tol: f64,
        seed: usize,
    ) -> Result<DivisorSolver, FlowError> {
        let g = surface.genus();
        let config = surface.config();
        let theta = ThetaEvaluator::new(&surface.tau, theta_tol, abel.im_phi_max() + 0.05)?;
        let (points, qe) = theta.lattice();
        let radius = theta.radius() as i32;
        let qf: Vec<Complex64> = qe.iter().map(|e| e.exp()).collect();
        let theta0: f64 = qf.iter().map(|c| c.re).sum::<f64>();
        let theta0 = if g == 0 { 1.0 } else { theta0 };

        let mut nodes = Vec::with_capacity(g + 1);
        let mut cplus = Vec::new();
        let mut cminus = Vec::new();
        let mut den = Vec::new();
        let mut prod_factor = Vec::new();
        if g > 0 {
            for i in 0..=g {
                let gap_idx = (i % g) + 1;
                let (lo, hi) = config.gap(gap_idx);
                let mut placed = false;
                for attempt in 0..5 {
                    let off = ((i + 1 + seed) as f64 * GOLDEN_FRAC).fract();
                    let t = 0.2 + 0.55 * off + 0.04 * attempt as f64;
                    let s = lo + (hi - lo) * t;
                    let phi = abel.abel_point_real(s)?;
                    let plus: Vec<Complex64> = phi
                        .iter()
                        .enumerate()
                        .map(|(k, &p)| p + if k == 0 { 0.5 } else { 0.0 })
                        .collect();
                    let minus: Vec<Complex64> = phi
                        .iter()
                        .enumerate()
                        .map(|(k, &p)| -p + if k == 0 { 0.5 } else { 0.0 })
                        .collect();
                    let dp = theta.theta(&plus)?;
                    let dm = theta.theta(&minus)?;
                    let d = dp * dm;
                    if d.norm() < 1e-6 * theta0 * theta0 {
                        continue; // node too close to a theta zero
                    }
                    // phase tables for this node; exponents combined before
                    // exponentiating so large lattice points cannot overflow
                    let mut tp = Vec::with_capacity(qe.len());
                    let mut tm = Vec::with_capacity(qe.len());
                    for (pt, &e) in points.chunks_exact(g).zip(qe) {
                        let mut dot_p = Complex64::new(0.0, 0.0);
                        let mut dot_m = Complex64::new(0.0, 0.0);
                        for (k, &nk) in pt.iter().enumerate() {
                            dot_p += plus[k] * nk as f64;
                            dot_m += minus[k] * nk as f64;
                        }
                        let tpi = Complex64::i() * 2.0 * std::f64::consts::PI;
                        tp.push((e + tpi * dot_p).exp());
                        tm.push((e + tpi * dot_m).exp());
                    }
                    let pf: f64 = (1..=g).map(|k| s + config.xk(2 * k)).product();
                    nodes.push(s);
                    cplus.push(tp);
                    cminus.push(tm);
                    den.push(d);
                    prod_factor.push(pf);
                    placed = true;
                    break;
                }
                if !placed {
                    let (lo, hi) = config.gap(gap_idx);
                    return Err(FlowError::ThetaDenominatorVanishes(0.5 * (lo + hi)));
                }
            }
        }
        let vander = DMatrix::from_fn(g + 1, g + 1, |i, j| {
            if g == 0 {
                1.0
            } else {
                nodes[i].powi(j as i32)
            }
        })
        .lu();
        Ok(DivisorSolver {
            g,
            x: config.x().to_vec(),
            q_coeffs: surface.q_coeffs.clone(),
            omega: surface.omega.clone(),
            alpha_tilde: surface.alpha_tilde.clone(),
            theta,
            nodes,
            radius,
            cplus,
            cminus,
            den,
            qf,
            prod_factor,
            theta0,
            vander,
        })
    }

    #[inline]
    pub fn genus(&self) -> usize {
        self.g
    }

    #[inline]
    pub fn theta(&self) -> &ThetaEvaluator {
        &self.theta
    }

    /// Interpolation nodes currently in use (one per gap, cyclically).
    pub fn interpolation_nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn q(&self, z: f64) -> f64 {
        crate::surface::q_eval(&self.q_coeffs, z)
    }

    /// `nu(r) mod 1` as a torus point.
    pub fn nu_mod1(&self, r: f64) -> TorusPoint {
        let sq = r.sqrt();
        let v: Vec<f64> = (0..self.g)
            .map(|j| -self.alpha_tilde[j + 1] - self.omega[j] * sq / (2.0 * std::f64::consts::PI))
            .collect();
        TorusPoint::new(&v)
    }

    /// Coefficients `c_0..c_g` of the monic polynomial
    /// `prod_k (s - b_k(u))`; `c_g` comes out within interpolation error
    /// of 1.
    pub fn poly_coeffs(&self, u: &TorusPoint) -> Result<Vec<f64>, FlowError> {
        if self.g == 0 {
            return Ok(vec![1.0]);
        }
        let g = self.g;
        let n = self.radius;
        // per-dimension power tables of exp(2 pi i n u_j)
        let width = (2 * n + 1) as usize;
        let mut table = vec![Complex64::new(1.0, 0.0); g * width];
        for j in 0..g {
            let base = (Complex64::i() * 2.0 * std::f64::consts::PI * u.u[j]).exp();
            let row = &mut table[j * width..(j + 1) * width];
            row[n as usize] = Complex64::new(1.0, 0.0);
            for k in 1..=n as usize {
                row[n as usize + k] = row[n as usize + k - 1] * base;
                row[n as usize - k] = row[n as usize + k].conj();
            }
        }
        let (points, _) = self.theta.lattice();
        let mut theta_u = 0.0_f64;
        let mut nums = vec![(Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0)); g + 1];
        for (idx, pt) in points.chunks_exact(g).enumerate() {
            let mut w = Complex64::new(1.0, 0.0);
            for (j, &nk) in pt.iter().enumerate() {
                w *= table[j * width + (nk + n) as usize];
            }
            theta_u += (self.qf[idx] * w).re;
            for i in 0..=g {
                nums[i].0 += self.cplus[i][idx] * w;
                nums[i].1 += self.cminus[i][idx] * w;
            }
        }
        let scale = (self.theta0 / theta_u).powi(2);
        let vals = DVector::from_fn(g + 1, |i, _| {
            scale * (nums[i].0 * nums[i].1 / self.den[i]).re * self.prod_factor[i]
        });
        let coeffs = self
            .vander
            .solve(&vals)
            .ok_or(FlowError::InterpolationSingular)?;
        Ok(coeffs.iter().copied().collect())
    }

    /// Divisor points sorted so that `b_k` lies in gap `k`.
    pub fn divisor_points(&self, u: &TorusPoint) -> Result<DivisorPoints, FlowError> {
        let coeffs = self.poly_coeffs(u)?;
        let g = self.g;
        let mut roots: Vec<f64> = match g {
            0 => Vec::new(),
            1 => vec![-coeffs[0] / coeffs[1]],
            2 => {
                let (c0, c1, c2) = (coeffs[0], coeffs[1], coeffs[2]);
                let disc = (c1 * c1 - 4.0 * c2 * c0).max(0.0).sqrt();
                // stable quadratic roots
                let q = -0.5 * (c1 + c1.signum() * disc);
                let mut r = vec![q / c2, c0 / q];
                r.sort_by(|a, b| a.partial_cmp(b).unwrap());
                r
            }
            _ => {
                let lead = coeffs[g];
                let mut comp = DMatrix::zeros(g, g);
                for i in 1..g {
                    comp[(i, i - 1)] = 1.0;
                }
                for i in 0..g {
                    comp[(i, g - 1)] = -coeffs[i] / lead;
                }
                let eig = comp.complex_eigenvalues();
                let mut r: Vec<f64> = eig.iter().map(|c| c.re).collect();
                r.sort_by(|a, b| a.partial_cmp(b).unwrap());
                r
            }
        };
        // descending: b_1 belongs to the right-most gap
        roots.reverse();
        let mut b = Vec::with_capacity(g);
        for (k, &root) in roots.iter().enumerate() {
            let (lo, hi) = (-self.x[2 * (k + 1)], -self.x[2 * k + 1]);
            let tol = 1e-8 * (1.0 + root.abs());
            if root < lo - tol || root > hi + tol {
                return Err(FlowError::RootOutsideInterval {
                    k: k + 1,
                    value: root,
                    lo,
                    hi,
                });
            }
            b.push(root.clamp(lo, hi));
        }
        Ok(DivisorPoints { b })
    }

    /// `B(z, u) = prod_k (z - b_k(u)) / q(z)`.
    pub fn b_eval(&self, z: f64, u: &TorusPoint) -> Result<f64, FlowError> {
        let q = self.q(z);
        let scale = (0..=self.g).map(|_| z.abs().max(1.0)).product::<f64>().sqrt();
        if q.abs() < 1e-12 * scale.max(1.0) {
            return Err(FlowError::EvaluationAtRootOfQ(z));
        }
        let coeffs = self.poly_coeffs(u)?;
        Ok(poly_eval(&coeffs, z) / q)
    }

    /// `B(-x_j, u)` for every endpoint `j = 1..2g+1` from one coefficient
    /// solve.
    pub fn b_at_endpoints(&self, u: &TorusPoint) -> Result<Vec<f64>, FlowError> {
        let coeffs = self.poly_coeffs(u)?;
        Ok(self
            .x
            .iter()
            .map(|&xj| poly_eval(&coeffs, -xj) / self.q(-xj))
            .collect())
    }

    /// Oscillatory integral `int_M^r B(-x_j, nu(t)) dt/t`, computed in the
    /// `s = sqrt(t)` variable with fixed spectral panels resolving the
    /// fastest phase `Omega_g s`.
    pub fn oscillatory_integral(&self, j: usize, m_lower: f64, r: f64) -> Result<f64, FlowError> {
        let sums = self.oscillatory_integral_all(m_lower, r)?;
        Ok(sums[j - 1])
    }

    /// The same integral for every endpoint at once (the integrand shares
    /// one polynomial solve per quadrature node).
    pub fn oscillatory_integral_all(&self, m_lower: f64, r: f64) -> Result<Vec<f64>, FlowError> {
        assert!(r >= m_lower && m_lower > 0.0);
        let n_end = 2 * self.g + 1;
        if r == m_lower {
            return Ok(vec![0.0; n_end]);
        }
        let (lo, hi) = (m_lower.sqrt(), r.sqrt());
        let coarse = self.osc_pass(lo, hi, 16)?;
        let fine = self.osc_pass(lo, hi, 20)?;
        let mut worst = 0.0_f64;
        for (a, b) in coarse.iter().zip(&fine) {
            worst = worst.max((a - b).abs() / b.abs().max(1.0));
        }
        if worst > 1e-6 {
            return Err(FlowError::QuadratureNotConverged(worst));
        }
        Ok(fine)
    }

    fn osc_pass(&self, lo: f64, hi: f64, order: usize) -> Result<Vec<f64>, FlowError> {
        let n_end = 2 * self.g + 1;
        let omega_max = self.omega.iter().cloned().fold(0.0, f64::max);
        let panel = if omega_max > 0.0 {
            std::f64::consts::PI / (4.0 * omega_max)
        } else {
            (hi - lo) / 8.0
        };
        let n_panels = (((hi - lo) / panel).ceil() as usize).max(1);
        let (gx, gw) = crate::quad::gauss_legendre::<f64>(order);
        let results: Vec<Result<Vec<f64>, FlowError>> = (0..n_panels)
            .into_par_iter()
            .map(|p| {
                let a = lo + (hi - lo) * p as f64 / n_panels as f64;
                let b = lo + (hi - lo) * (p + 1) as f64 / n_panels as f64;
                let mid = 0.5 * (a + b);
                let half = 0.5 * (b - a);
                let mut acc = vec![0.0; n_end];
                for (&t, &w) in gx.iter().zip(&gw) {
                    let s = mid + half * t;
                    let u = self.flow_point(s);
                    let vals = self.b_at_endpoints(&u)?;
                    for (dst, v) in acc.iter_mut().zip(vals) {
                        // dt/t with t = s^2 is 2 ds / s
                        *dst += half * w * 2.0 * v / s;
                    }
                }
                Ok(acc)
            })
            .collect();
        let mut total = vec![0.0; n_end];
        for r in results {
            let v = r?;
            for (dst, x) in total.iter_mut().zip(v) {
                *dst += x;
            }
        }
        Ok(total)
    }

    /// Point of the linear flow at parameter `s`: `nu(s^2) mod 1`.
    fn flow_point(&self, s: f64) -> TorusPoint {
        let v: Vec<f64> = (0..self.g)
            .map(|j| -self.alpha_tilde[j + 1] - self.omega[j] * s / (2.0 * std::f64::consts::PI))
            .collect();
        TorusPoint::new(&v)
    }

    /// `(1/T) int_0^T B(-x_j, nu(t^2)) dt` with the last three doublings
    /// of `T` reported for convergence inspection.
    pub fn time_average(&self, j: usize, t_max: f64) -> Result<TimeAverage, FlowError> {
        assert!(j >= 1 && j <= 2 * self.g + 1);
        let omega_max = self.omega.iter().cloned().fold(0.0, f64::max);
        let panel = if omega_max > 0.0 {
            std::f64::consts::PI / (4.0 * omega_max)
        } else {
            t_max / 64.0
        };
        let n_panels = ((t_max / panel).ceil() as usize).max(4);
        let (gx, gw) = crate::quad::gauss_legendre::<f64>(16);
        let partials: Vec<Result<f64, FlowError>> = (0..n_panels)
            .into_par_iter()
            .map(|p| {
                let a = t_max * p as f64 / n_panels as f64;
                let b = t_max * (p + 1) as f64 / n_panels as f64;
                let mid = 0.5 * (a + b);
                let half = 0.5 * (b - a);
                let mut acc = 0.0;
                for (&t, &w) in gx.iter().zip(&gw) {
                    let s = mid + half * t;
                    let u = self.flow_point(s);
                    acc += half * w * self.b_eval(-self.x[j - 1], &u)?;
                }
                Ok(acc)
            })
            .collect();
        let mut prefix = Vec::with_capacity(n_panels);
        let mut run = 0.0;
        for p in partials {
            run += p?;
            prefix.push(run);
        }
        let avg_at = |frac: f64| -> (f64, f64) {
            let idx = ((n_panels as f64 * frac).round() as usize).clamp(1, n_panels);
            let t = t_max * idx as f64 / n_panels as f64;
            (t, prefix[idx - 1] / t)
        };
        let history = vec![avg_at(0.25), avg_at(0.5), avg_at(1.0)];
        Ok(TimeAverage {
            value: history[2].1,
            history,
        })
    }

    /// Quasi-Monte Carlo average of `prod_k (z - b_k(u))` over the torus,
    /// with a batch-based standard error.
    pub fn space_average_poly(&self, z: f64, n_samples: usize) -> Result<(f64, f64), FlowError> {
        if self.g == 0 {
            return Ok((1.0, 0.0));
        }
        let dirs = rd_directions(self.g);
        let n_batches = 16usize.min((n_samples / 16).max(2));
        let per_batch = n_samples / n_batches;
        let batch_means: Vec<Result<f64, FlowError>> = (0..n_batches)
            .into_par_iter()
            .map(|b| {
                let mut acc = 0.0;
                for k in 0..per_batch {
                    let idx = (b * per_batch + k + 1) as f64;
                    let u: Vec<f64> = dirs.iter().map(|&d| (0.5 + idx * d).fract()).collect();
                    let coeffs = self.poly_coeffs(&TorusPoint::new(&u))?;
                    acc += poly_eval(&coeffs, z);
                }
                Ok(acc / per_batch as f64)
            })
            .collect();
        let means: Vec<f64> = batch_means.into_iter().collect::<Result<_, _>>()?;
        let mean = means.iter().sum::<f64>() / n_batches as f64;
        let var =
            means.iter().map(|m| (m - mean) * (m - mean)).sum::<f64>() / (n_batches - 1) as f64;
        Ok((mean, (var / n_batches as f64).sqrt()))
    }
}

fn poly_eval(coeffs: &[f64], z: f64) -> f64 {
    let mut v = 0.0;
    for &c in coeffs.iter().rev() {
        v = v * z + c;
    }
    v
}

/// Direction vector of the low-discrepancy Kronecker sequence: inverse
/// powers of the generalized golden ratio (the positive root of
/// `x^{g+1} = x + 1`).
fn rd_directions(g: usize) -> Vec<f64> {
    let mut phi = 1.5_f64;
    for _ in 0..64 {
        // Newton on x^{g+1} - x - 1
        let f = phi.powi(g as i32 + 1) - phi - 1.0;
        let df = (g as f64 + 1.0) * phi.powi(g as i32) - 1.0;
        phi -= f / df;
    }
    (1..=g).map(|j| phi.powi(-(j as i32))).collect()
}

/// Searches integer vectors `0 < ||n||_inf <= bound` for near-relations
/// `|n . omega| < rel_tol ||n|| ||omega||`.
pub fn classify_flow(omega: &[f64], bound: usize, rel_tol: f64) -> Result<FlowClass, FlowError> {
    let g = omega.len();
    if g <= 1 {
        // a single positive frequency (or none) is always equidistributed
        return Ok(FlowClass {
            verdict: FlowVerdict::ErgodicLikely,
            relations: Vec::new(),
            search_bound: bound,
        });
    }
    let total = ((2 * bound + 1) as f64).powi(g as i32);
    if total > 2e8 {
        return Err(FlowError::SearchBoundTooLarge(total));
    }
    let omega_norm = omega.iter().map(|v| v * v).sum::<f64>().sqrt();
    let mut relations: Vec<Vec<i64>> = Vec::new();
    let mut n = vec![-(bound as i64); g];
    'outer: loop {
        // only vectors whose first nonzero entry is positive
        if let Some(first) = n.iter().find(|&&v| v != 0) {
            if *first > 0 {
                let dot: f64 = n.iter().zip(omega).map(|(&ni, &o)| ni as f64 * o).sum();
                let norm = n.iter().map(|&v| (v * v) as f64).sum::<f64>().sqrt();
                if dot.abs() < rel_tol * norm * omega_norm {
                    let mut rel = n.clone();
                    let gcd = rel.iter().fold(0i64, |acc, &v| gcd_i64(acc, v.abs()));
                    if gcd > 1 {
                        rel.iter_mut().for_each(|v| *v /= gcd);
                    }
                    if !relations.contains(&rel) {
                        relations.push(rel);
                    }
                }
            }
        }
        let mut d = 0;
        loop {
            if d == g {
                break 'outer;
            }
            n[d] += 1;
            if n[d] <= bound as i64 {
                break;
            }
            n[d] = -(bound as i64);
            d += 1;
        }
    }
    let threshold = if g <= 2 { 1000 } else { 50 };
    let verdict = if !relations.is_empty() {
        FlowVerdict::RationallyDependent
    } else if bound >= threshold {
        FlowVerdict::ErgodicLikely
    } else {
        FlowVerdict::Inconclusive
    };
    relations.sort();
    Ok(FlowClass {
        verdict,
        relations,
        search_bound: bound,
    })
}

fn gcd_i64(a: i64, b: i64) -> i64 {
    if b == 0 {
        a
    } else {
        gcd_i64(b, a % b)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::abel::AbelMap;
    use crate::config::validate;
    use crate::surface::QuadCtl;

    fn setup(x: Vec<f64>, alpha: f64) -> (SurfaceData, AbelMap, DivisorSolver) {
        let c = validate(x, alpha).unwrap();
        let s = SurfaceData::compute(&c, &QuadCtl::default()).unwrap();
        let a = AbelMap::new(&s, &QuadCtl::default()).unwrap();
        let d = DivisorSolver::new(&s, &a, 1e-12).unwrap();
        (s, a, d)
    }

    struct Xorshift(u64);
    impl Xorshift {
        fn next_f64(&mut self) -> f64 {
            let mut x = self.0;
            x ^= x << 13;
            x ^= x >> 7;
            x ^= x << 17;
            self.0 = x;
            (x >> 11) as f64 / (1u64 << 53) as f64
        }
    }

    #[test]
    fn divisor_at_zero_hits_even_branch_points() {
        let (_, _, d) = setup(vec![1.0, 2.0, 3.0], 0.0);
        let b = d.divisor_points(&TorusPoint::zero(1)).unwrap();
        assert!((b.b[0] + 2.0).abs() < 1e-9, "b = {:?}", b.b);
        let (_, _, d2) = setup(vec![1.0, 2.0, 3.0, 4.5, 7.0], 0.0);
        let b2 = d2.divisor_points(&TorusPoint::zero(2)).unwrap();
        assert!((b2.b[0] + 2.0).abs() < 1e-9);
        assert!((b2.b[1] + 4.5).abs() < 1e-9);
    }

    #[test]
    fn divisor_interval_membership_random_u() {
        let (_, _, d) = setup(vec![1.0, 2.0, 3.0, 4.5, 7.0], 0.0);
        let mut rng = Xorshift(31);
        for _ in 0..100 {
            let u = TorusPoint::new(&[rng.next_f64(), rng.next_f64()]);
            let b = d.divisor_points(&u).unwrap();
            assert!((-3.0..=-2.0).contains(&b.b[0]), "{:?}", b.b);
            assert!((-7.0..=-4.5).contains(&b.b[1]), "{:?}", b.b);
        }
    }

    #[test]
    fn monic_leading_coefficient() {
        let (_, _, d) = setup(vec![1.0, 2.0, 3.0, 4.5, 7.0], 0.0);
        let coeffs = d.poly_coeffs(&TorusPoint::new(&[0.37, 0.81])).unwrap();
        assert!((coeffs[2] - 1.0).abs() < 1e-8, "lead {}", coeffs[2]);
    }

    #[test]
    fn divisor_direct_scan_oracle_g1() {
        // compare b_1(1/2) against a dense scan of |theta(phi(s)+e1/2+u)|
        let (_, a, d) = setup(vec![1.0, 2.0, 3.0], 0.0);
        let u = TorusPoint::new(&[0.5]);
        let b = d.divisor_points(&u).unwrap().b[0];
        let th = d.theta();
        let mut best = (f64::INFINITY, 0.0);
        let n = 10_000;
        for k in 0..=n {
            let s = -3.0 + k as f64 / n as f64;
            let phi = a.abel_point_real(s).unwrap();
            let arg = vec![phi[0] + Complex64::new(0.5 + 0.5, 0.0)];
            let v = th.theta(&arg).unwrap().norm();
            if v < best.0 {
                best = (v, s);
            }
        }
        assert!((b - best.1).abs() < 1e-3, "b={} scan={}", b, best.1);
        // refine the scan by golden-section around the best point
        let (mut lo, mut hi) = (best.1 - 2e-4, best.1 + 2e-4);
        for _ in 0..60 {
            let m1 = lo + 0.382 * (hi - lo);
            let m2 = lo + 0.618 * (hi - lo);
            let f = |s: f64| {
                let phi = a.abel_point_real(s).unwrap();
                th.theta(&[phi[0] + Complex64::new(1.0, 0.0)])
                    .unwrap()
                    .norm()
            };
            if f(m1) < f(m2) {
                hi = m2;
            } else {
                lo = m1;
            }
        }
        let refined = 0.5 * (lo + hi);
        assert!((b - refined).abs() < 1e-7, "b={b} refined={refined}");
    }

    #[test]
    fn node_seed_independence() {
        let c = validate(vec![1.0, 2.0, 3.0, 4.5, 7.0], 0.0).unwrap();
        let s = SurfaceData::compute(&c, &QuadCtl::default()).unwrap();
        let a = AbelMap::new(&s, &QuadCtl::default()).unwrap();
        let d0 = DivisorSolver::with_node_seed(&s, &a, 1e-12, 0).unwrap();
        let d1 = DivisorSolver::with_node_seed(&s, &a, 1e-12, 3).unwrap();
        let mut rng = Xorshift(77);
        for _ in 0..20 {
            let u = TorusPoint::new(&[rng.next_f64(), rng.next_f64()]);
            let b0 = d0.divisor_points(&u).unwrap();
            let b1 = d1.divisor_points(&u).unwrap();
            for (x, y) in b0.b.iter().zip(&b1.b) {
                assert!((x - y).abs() < 1e-8, "{x} vs {y}");
            }
        }
    }

    #[test]
    fn divisor_continuity_along_path() {
        let (_, _, d) = setup(vec![1.0, 2.0, 3.0], 0.0);
        let mut prev = d.divisor_points(&TorusPoint::new(&[0.0])).unwrap().b[0];
        for k in 1..=1000 {
            let u = k as f64 * 1e-3;
            let b = d.divisor_points(&TorusPoint::new(&[u])).unwrap().b[0];
            assert!((b - prev).abs() < 2e-2, "jump at u={u}: {prev} -> {b}");
            prev = b;
        }
    }

    #[test]
    fn b_eval_g0_is_two() {
        let (_, _, d) = setup(vec![1.0], 0.0);
        let v = d.b_eval(-1.0, &TorusPoint::zero(0)).unwrap();
        assert_eq!(v, 2.0);
    }

    #[test]
    fn b_eval_at_u_zero_closed_form() {
        let (_, _, d) = setup(vec![1.0, 2.0, 3.0], 0.0);
        // B(z, 0) = (z + x_2)/q(z)
        for &z in &[-1.0, -3.0, 0.7] {
            let v = d.b_eval(z, &TorusPoint::zero(1)).unwrap();
            let expect = (z + 2.0) / d.q(z);
            assert!((v - expect).abs() < 1e-8 * expect.abs().max(1.0));
        }
    }

    #[test]
    fn b_eval_rejects_roots_of_q() {
        let (s, _, d) = setup(vec![1.0, 2.0, 3.0], 0.0);
        let root = -2.0 * s.q_coeffs[0];
        assert!(matches!(
            d.b_eval(root, &TorusPoint::zero(1)),
            Err(FlowError::EvaluationAtRootOfQ(_))
        ));
    }

    #[test]
    fn space_average_matches_char_poly() {
        let (s, _, d) = setup(vec![1.0, 2.0, 3.0], 0.0);
        for &z in &[0.0, -2.5, 1.3, -0.7, 2.2] {
            let (est, se) = d.space_average_poly(z, 1 << 13).unwrap();
            let expect = 2.0 * s.q(z); // = det(zI - T)
            assert!(
                (est - expect).abs() < 3.0 * se.max(1e-4),
                "z={z}: {est} vs {expect} (se {se})"
            );
        }
    }

    #[test]
    fn space_average_g0_is_one() {
        let (_, _, d) = setup(vec![1.0], 0.0);
        assert_eq!(d.space_average_poly(0.4, 128).unwrap(), (1.0, 0.0));
    }

    #[test]
    fn time_average_g0_is_two() {
        let (_, _, d) = setup(vec![1.0], 0.0);
        let t = d.time_average(1, 50.0).unwrap();
        assert!((t.value - 2.0).abs() < 1e-10);
    }

    #[test]
    fn time_average_g1_near_two() {
        let (_, _, d) = setup(vec![1.0, 2.0, 3.0], 0.0);
        let t = d.time_average(1, 2000.0).unwrap();
        assert!((t.value - 2.0).abs() < 0.05, "avg {}", t.value);
    }

    #[test]
    fn oscillatory_integral_g0_closed_form() {
        let (_, _, d) = setup(vec![1.0], 0.0);
        let v = d.oscillatory_integral(1, 1.0, 100.0).unwrap();
        assert!((v - 2.0 * 100.0_f64.ln()).abs() < 1e-8);
        assert_eq!(d.oscillatory_integral(1, 5.0, 5.0).unwrap(), 0.0);
    }

    #[test]
    fn classify_known_vectors() {
        let c = classify_flow(&[1.0, std::f64::consts::SQRT_2], 1000, 1e-9).unwrap();
        assert_eq!(c.verdict, FlowVerdict::ErgodicLikely);
        assert!(c.relations.is_empty());

        let c = classify_flow(&[1.0, 2.0], 1000, 1e-9).unwrap();
        assert_eq!(c.verdict, FlowVerdict::RationallyDependent);
        assert!(c.relations.contains(&vec![2, -1]));

        let c = classify_flow(&[2.39628], 10, 1e-9).unwrap();
        assert_eq!(c.verdict, FlowVerdict::ErgodicLikely);

        let c = classify_flow(&[1.0, std::f64::consts::SQRT_2], 10, 1e-9).unwrap();
        assert_eq!(c.verdict, FlowVerdict::Inconclusive);
    }

    #[test]
    fn search_bound_guard() {
        assert!(matches!(
            classify_flow(&[1.0, 2.0, 3.0, 4.0, 5.0], 1000, 1e-9),
            Err(FlowError::SearchBoundTooLarge(_))
        ));
    }
}
