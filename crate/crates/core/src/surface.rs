//! Everything attached to the hyperelliptic surface of `sqrt(R(z))`,
//! `R(z) = prod (z + x_j)`, that does not depend on the scaling `r`:
//! cycle integrals, the degree-`g` polynomial `q`, the frequency vector
//! `Omega`, the period matrix `tau`, the boundary data `a0`/`alpha_tilde`
//! and `d1`, and the matrix `T` whose characteristic polynomial is `2q`.
//!
//! Cycle integrals are reduced to real segment integrals over the gaps and
//! cuts on the negative axis. The branch of `sqrt(R)` on the first sheet is
//! fixed by positivity on `(-x_1, inf)`; continuation through the upper
//! half-plane flips the sign once per cut crossed, which gives sign
//! `(-1)^j` on gap `j` and boundary value `i (-1)^{j+1} |R|^{1/2}` on cut
//! `j`. With the cycles oriented as in the canonical basis, the reductions
//! used below are
//!
//! ```text
//! a_{i,j}  = sum_{k=i..g} 2 (-1)^{k+1} int_{gap k} s^{j-1} |R(s)|^{-1/2} ds
//! B-period of s^{k-1} dz / sqrt(R) over B_i
//!          = 2i (-1)^{i+1} int_{cut i} s^{k-1} |R(s)|^{-1/2} ds
//! ```
//!
//! The sign conventions are self-checking: `Omega_j > 0`, positive definite
//! `Im tau`, and the period relation `(A^{-1})_{g,:} = Omega / (4 pi)` are
//! all enforced at construction.

use crate::check::Check;
use crate::config::{ConfigError, Configuration};
use crate::quad::{self, QuadratureRule};
use nalgebra::{Complex, DMatrix, DVector};
use thiserror::Error;

pub type Complex64 = Complex<f64>;

#[derive(Debug, Error)]
pub enum SurfaceError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("point {0} lies on a cut; use the cut-integral reduction instead")]
    PointOnCut(f64),
    #[error("segment quadrature not converged (last delta {delta:.3e} at order {order})")]
    QuadratureNotConverged { order: usize, delta: f64 },
    #[error("period matrix A is singular")]
    SingularPeriodMatrix,
    #[error("Omega_{0} is not positive: {1}; sign convention breach")]
    NonPositiveOmega(usize, f64),
    #[error("tau symmetry residual {0:.3e} exceeds tolerance")]
    AsymmetricTau(f64),
    #[error("Im tau is not positive definite (min eigenvalue {0:.3e})")]
    NonPositiveDefiniteTau(f64),
    #[error("negative r = {0}")]
    NegativeR(f64),
}

/// Controls for the segment quadratures: `base` nodes, doubled until the
/// value moves by less than `rel_tol`, capped at `max_order`.
#[derive(Debug, Clone, Copy)]
pub struct QuadCtl {
    pub base: usize,
    pub rel_tol: f64,
    pub max_order: usize,
}

impl Default for QuadCtl {
    fn default() -> Self {
        QuadCtl {
            base: 200,
            rel_tol: 1e-12,
            max_order: 6400,
        }
    }
}

/// All r-independent surface quantities.
#[derive(Debug, Clone)]
pub struct SurfaceData {
    config: Configuration,
    /// A-cycle periods of `s^{j-1} ds / sqrt(R)`, columns `j = 1..g`.
    pub a: DMatrix<f64>,
    /// Column `j = g+1` of the same periods.
    pub a_last: DVector<f64>,
    /// Columns `j = 2..g+1`.
    pub a_hat: DMatrix<f64>,
    pub a_inv: DMatrix<f64>,
    /// Coefficients `q_0..q_{g-1}` of `q(z) = z^g/2 + sum q_j z^j`.
    pub q_coeffs: Vec<f64>,
    /// `c = q_{g-1} - (1/4) sum x_j` (with `q_{-1} := 0` when `g = 0`).
    pub c: f64,
    /// Frequencies `Omega_1..Omega_g`, all positive.
    pub omega: Vec<f64>,
    /// Period matrix; purely imaginary for these real branch points (the
    /// real part is retained for inspection).
    pub tau: DMatrix<Complex64>,
    /// `a_{0,j}` boundary integrals, `j = 1..g+1`.
    pub a0: Vec<f64>,
    /// `alpha_tilde_0..alpha_tilde_g`.
    pub alpha_tilde: Vec<f64>,
    pub d1: f64,
    /// `T = A_hat A^{-1}`; `det(zI - T) = 2 q(z)`.
    pub t_mat: DMatrix<f64>,
}

fn sign_pm(k: usize) -> f64 {
    // (-1)^{k+1} for 1-based k
    if k % 2 == 1 {
        1.0
    } else {
        -1.0
    }
}

/// `|R(s)| / ((s-a)(b-s))` on a segment whose endpoints `-x_ka`, `-x_kb`
/// are branch points: the product of the remaining `|s + x_k|` factors.
fn reduced_abs_r(config: &Configuration, skip_a: usize, skip_b: usize, s: f64) -> f64 {
    let mut p = 1.0;
    for (k, &x) in config.x().iter().enumerate() {
        let k1 = k + 1;
        if k1 != skip_a && k1 != skip_b {
            p *= (s + x).abs();
        }
    }
    p
}

/// `int_{gap j} s^{pow} |R(s)|^{-1/2} ds` at fixed order.
fn gap_integral_at(config: &Configuration, j: usize, pow: usize, order: usize) -> f64 {
    let (a, b) = config.gap(j);
    let rule = QuadratureRule::cos_substitution(order, a, b);
    rule.integrate(|s| s.powi(pow as i32) / reduced_abs_r(config, 2 * j + 1, 2 * j, s).sqrt())
}

/// `int_{cut j} s^{pow} |R(s)|^{-1/2} ds` at fixed order.
fn cut_integral_at(config: &Configuration, j: usize, pow: usize, order: usize) -> f64 {
    let (a, b) = config.cut(j);
    let rule = QuadratureRule::cos_substitution(order, a, b);
    rule.integrate(|s| s.powi(pow as i32) / reduced_abs_r(config, 2 * j, 2 * j - 1, s).sqrt())
}

fn converge_seg<F: Fn(usize) -> f64>(
    eval: F,
    ctl: &QuadCtl,
) -> Result<f64, SurfaceError> {
    quad::converge(eval, ctl.base, ctl.rel_tol, ctl.max_order).map_err(|e| match e {
        quad::QuadError::NotConverged { order, delta } => {
            SurfaceError::QuadratureNotConverged { order, delta }
        }
    })
}

/// First-sheet value of `sqrt(R(s))` at real `s` off the cuts: positive on
/// `(-x_1, inf)`, sign `(-1)^j` on gap `j`.
pub fn sqrt_r_sheet1(s: f64, config: &Configuration) -> Result<f64, SurfaceError> {
    let x = config.x();
    let g = config.genus();
    if s <= -x[2 * g] {
        return Err(SurfaceError::PointOnCut(s));
    }
    let prod: f64 = x.iter().map(|&xk| s + xk).product();
    if s > -x[0] {
        return Ok(prod.sqrt());
    }
    for j in 1..=g {
        let (lo, hi) = config.gap(j);
        if s > lo && s < hi {
            let sgn = if j % 2 == 1 { -1.0 } else { 1.0 };
            return Ok(sgn * prod.abs().sqrt());
        }
    }
    Err(SurfaceError::PointOnCut(s))
}

/// A-cycle periods: the `g x (g+1)` table `a_{i,j}`, split into the square
/// block, the last column and the shifted block.
pub fn a_matrix(
    config: &Configuration,
    ctl: &QuadCtl,
) -> Result<(DMatrix<f64>, DVector<f64>, DMatrix<f64>), SurfaceError> {
    let g = config.genus();
    // elementary single-gap values E_k^{(j)}
    let mut elem = vec![vec![0.0; g + 1]; g];
    for k in 1..=g {
        for j in 1..=(g + 1) {
            let v = converge_seg(|n| gap_integral_at(config, k, j - 1, n), ctl)?;
            elem[k - 1][j - 1] = 2.0 * sign_pm(k) * v;
        }
    }
    let mut full = DMatrix::zeros(g, g + 1);
    for i in 0..g {
        for j in 0..=g {
            full[(i, j)] = elem[i..g].iter().map(|row| row[j]).sum();
        }
    }
    let a = full.columns(0, g).into_owned();
    let a_last = full.column(g).into_owned();
    let a_hat = full.columns(1, g).into_owned();
    Ok((a, a_last, a_hat))
}

/// Coefficients of `q(z) = z^g/2 + sum_{j<g} q_j z^j` from
/// `(q_0..q_{g-1})^t = -A^{-1} a_last / 2`.
pub fn q_polynomial(a: &DMatrix<f64>, a_last: &DVector<f64>) -> Result<Vec<f64>, SurfaceError> {
    let g = a.nrows();
    if g == 0 {
        return Ok(Vec::new());
    }
    let lu = a.clone().lu();
    let q = lu
        .solve(a_last)
        .ok_or(SurfaceError::SingularPeriodMatrix)?;
    Ok(q.iter().map(|v| -0.5 * v).collect())
}

/// Evaluates `q(z)` from its coefficient list.
pub fn q_eval(q_coeffs: &[f64], z: f64) -> f64 {
    let g = q_coeffs.len();
    let mut v = 0.5;
    for j in (0..g).rev() {
        v = v * z + q_coeffs[j];
    }
    if g == 0 {
        0.5
    } else {
        v
    }
}

/// `c = q_{g-1} - (1/4) sum x_j`.
pub fn c_const(config: &Configuration, q_coeffs: &[f64]) -> f64 {
    let qg1 = q_coeffs.last().copied().unwrap_or(0.0);
    qg1 - 0.25 * config.x().iter().sum::<f64>()
}

/// `Omega_j = 2 (-1)^{j+1} int_{cut j} q(s) |R(s)|^{-1/2} ds`, positive by
/// the sign pattern of `q` on the cuts.
pub fn omega_vector(
    config: &Configuration,
    q_coeffs: &[f64],
    ctl: &QuadCtl,
) -> Result<Vec<f64>, SurfaceError> {
    let g = config.genus();
    let mut omega = Vec::with_capacity(g);
    for j in 1..=g {
        let (a, b) = config.cut(j);
        let v = converge_seg(
            |n| {
                let rule = QuadratureRule::cos_substitution(n, a, b);
                rule.integrate(|s| {
                    q_eval(q_coeffs, s) / reduced_abs_r(config, 2 * j, 2 * j - 1, s).sqrt()
                })
            },
            ctl,
        )?;
        let om = 2.0 * sign_pm(j) * v;
        if om <= 0.0 {
            return Err(SurfaceError::NonPositiveOmega(j, om));
        }
        omega.push(om);
    }
    Ok(omega)
}

/// Period matrix `tau_{ij}` from the B-cycle reductions and the normalized
/// differentials.
pub fn tau_matrix(
    config: &Configuration,
    a: &DMatrix<f64>,
    ctl: &QuadCtl,
) -> Result<DMatrix<Complex64>, SurfaceError> {
    let g = config.genus();
    if g == 0 {
        return Ok(DMatrix::zeros(0, 0));
    }
    let a_inv = a
        .clone()
        .try_inverse()
        .ok_or(SurfaceError::SingularPeriodMatrix)?;
    // cut integrals of the monomial differentials
    let mut cuts = DMatrix::zeros(g, g);
    for i in 1..=g {
        for k in 1..=g {
            cuts[(i - 1, k - 1)] = converge_seg(|n| cut_integral_at(config, i, k - 1, n), ctl)?;
        }
    }
    let mut tau = DMatrix::from_element(g, g, Complex64::new(0.0, 0.0));
    for i in 0..g {
        let sgn = sign_pm(i + 1);
        for j in 0..g {
            let mut s = 0.0;
            for k in 0..g {
                s += cuts[(i, k)] * a_inv[(k, j)];
            }
            tau[(i, j)] = Complex64::new(0.0, 2.0 * sgn * s);
        }
    }
    // symmetry and positive definiteness are proven for the true periods;
    // failures indicate broken quadrature or sign conventions
    let mut asym = 0.0_f64;
    let mut scale = 0.0_f64;
    for i in 0..g {
        for j in 0..g {
            asym = asym.max((tau[(i, j)] - tau[(j, i)]).norm());
            scale = scale.max(tau[(i, j)].norm());
        }
    }
    if asym > 1e-8 * scale.max(1.0) {
        return Err(SurfaceError::AsymmetricTau(asym));
    }
    let min_eig = imag_min_eig(&tau);
    if min_eig <= 0.0 {
        return Err(SurfaceError::NonPositiveDefiniteTau(min_eig));
    }
    Ok(tau)
}

/// Smallest eigenvalue of `Im tau` (0 for the empty matrix).
pub fn imag_min_eig(tau: &DMatrix<Complex64>) -> f64 {
    let g = tau.nrows();
    if g == 0 {
        return 0.0;
    }
    let im = DMatrix::from_fn(g, g, |i, j| tau[(i, j)].im);
    let sym = nalgebra::SymmetricEigen::new(im);
    sym.eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min)
}

/// Boundary integrals `a_{0,j}`, the weights `alpha_tilde`, and `d1`.
///
/// Only the gap segments and `(-x_1, 0)` contribute to the real part of the
/// defining integral; cut segments are purely imaginary on the first sheet.
pub fn a0_and_alpha_tilde(
    config: &Configuration,
    a: &DMatrix<f64>,
    a_last: &DVector<f64>,
    ctl: &QuadCtl,
) -> Result<(Vec<f64>, Vec<f64>, f64), SurfaceError> {
    let g = config.genus();
    let alpha = config.alpha();
    let x1 = config.xk(1);
    let mut a0 = Vec::with_capacity(g + 1);
    for j in 1..=(g + 1) {
        let mut total = 0.0;
        for k in 1..=g {
            let v = converge_seg(|n| gap_integral_at(config, k, j - 1, n), ctl)?;
            let sheet_sign = if k % 2 == 1 { -1.0 } else { 1.0 };
            total += sheet_sign * v;
        }
        // (-x_1, 0): inverse-square-root behavior at the left endpoint only
        let tail = converge_seg(
            |n| {
                quad::integrate_sqrt_left(
                    |s| s.powi((j - 1) as i32) / reduced_abs_r(config, 1, 0, s).sqrt(),
                    -x1,
                    0.0,
                    n,
                )
            },
            ctl,
        )?;
        a0.push(-2.0 * (total + tail));
    }
    let mut alpha_tilde = vec![alpha / 2.0];
    if g > 0 {
        let a_inv = a
            .clone()
            .try_inverse()
            .ok_or(SurfaceError::SingularPeriodMatrix)?;
        for j in 0..g {
            let mut s = 0.0;
            for k in 0..g {
                s += a0[k] * a_inv[(k, j)];
            }
            alpha_tilde.push(-(alpha / 2.0) * s);
        }
    }
    let mut d1 = alpha_tilde[0] * a0[g];
    for j in 1..=g {
        d1 += alpha_tilde[j] * a_last[j - 1];
    }
    d1 *= 0.5;
    Ok((a0, alpha_tilde, d1))
}

/// `T = A_hat A^{-1}`.
pub fn t_matrix(a: &DMatrix<f64>, a_hat: &DMatrix<f64>) -> Result<DMatrix<f64>, SurfaceError> {
    let g = a.nrows();
    if g == 0 {
        return Ok(DMatrix::zeros(0, 0));
    }
    let a_inv = a
        .clone()
        .try_inverse()
        .ok_or(SurfaceError::SingularPeriodMatrix)?;
    Ok(a_hat * a_inv)
}

impl SurfaceData {
    pub fn compute(config: &Configuration, ctl: &QuadCtl) -> Result<SurfaceData, SurfaceError> {
        let g = config.genus();
        let (a, a_last, a_hat) = a_matrix(config, ctl)?;
        let a_inv = if g == 0 {
            DMatrix::zeros(0, 0)
        } else {
            a.clone()
                .try_inverse()
                .ok_or(SurfaceError::SingularPeriodMatrix)?
        };
        let q_coeffs = q_polynomial(&a, &a_last)?;
        let c = c_const(config, &q_coeffs);
        let omega = omega_vector(config, &q_coeffs, ctl)?;
        let tau = tau_matrix(config, &a, ctl)?;
        let (a0, alpha_tilde, d1) = a0_and_alpha_tilde(config, &a, &a_last, ctl)?;
        let t_mat = t_matrix(&a, &a_hat)?;
        Ok(SurfaceData {
            config: config.clone(),
            a,
            a_last,
            a_hat,
            a_inv,
            q_coeffs,
            c,
            omega,
            tau,
            a0,
            alpha_tilde,
            d1,
            t_mat,
        })
    }

    #[inline]
    pub fn config(&self) -> &Configuration {
        &self.config
    }

    #[inline]
    pub fn genus(&self) -> usize {
        self.config.genus()
    }

    pub fn q(&self, z: f64) -> f64 {
        q_eval(&self.q_coeffs, z)
    }

    /// Phase vector `nu_j(r) = -alpha_tilde_j - Omega_j sqrt(r) / (2 pi)`,
    /// not reduced modulo 1.
    pub fn nu(&self, r: f64) -> Result<Vec<f64>, SurfaceError> {
        if r < 0.0 {
            return Err(SurfaceError::NegativeR(r));
        }
        let sq = r.sqrt();
        Ok((0..self.genus())
            .map(|j| -self.alpha_tilde[j + 1] - self.omega[j] * sq / (2.0 * std::f64::consts::PI))
            .collect())
    }

    /// Runs the construction-independent identities and returns one record
    /// per invariant.
    pub fn verify_invariants(&self) -> Vec<Check> {
        let g = self.genus();
        let mut checks = Vec::new();

        // period relation: last row of A^{-1} equals Omega / (4 pi)
        if g > 0 {
            let mut num = 0.0_f64;
            let mut den = 0.0_f64;
            for j in 0..g {
                num = num.max((4.0 * std::f64::consts::PI * self.a_inv[(g - 1, j)] - self.omega[j]).abs());
                den = den.max(self.omega[j].abs());
            }
            checks.push(Check::new("period relation A^-1 vs Omega", num / den, 1e-8));
        }

        // characteristic polynomial of T equals 2q at Chebyshev points
        let lo = -self.config.xk(2 * g + 1) - 1.0;
        let hi = 1.0;
        let mut max_err = 0.0_f64;
        let mut max_q = 0.0_f64;
        for k in 0..20 {
            let t = ((2 * k + 1) as f64) * std::f64::consts::PI / 40.0;
            let z = 0.5 * (lo + hi) + 0.5 * (hi - lo) * t.cos();
            let zi = DMatrix::identity(g, g) * z - &self.t_mat;
            let det = zi.determinant();
            let qq = 2.0 * self.q(z);
            max_err = max_err.max((det - qq).abs());
            max_q = max_q.max(qq.abs());
        }
        checks.push(Check::new(
            "char poly det(zI-T) = 2q(z)",
            max_err / max_q.max(1e-300),
            1e-8,
        ));

        // tau symmetry and positivity
        if g > 0 {
            let mut asym = 0.0_f64;
            let mut scale = 0.0_f64;
            for i in 0..g {
                for j in 0..g {
                    asym = asym.max((self.tau[(i, j)] - self.tau[(j, i)]).norm());
                    scale = scale.max(self.tau[(i, j)].norm());
                }
            }
            checks.push(Check::new("tau symmetry", asym / scale.max(1.0), 1e-8));
            let min_eig = imag_min_eig(&self.tau);
            checks.push(Check::flag(
                format!("Im tau positive definite (min eig {min_eig:.3e})"),
                min_eig > 0.0,
            ));
        }

        // A-cycle normalization: A A^{-1} = I
        if g > 0 {
            let prod = &self.a * &self.a_inv;
            let resid = (&prod - DMatrix::<f64>::identity(g, g)).abs().max();
            checks.push(Check::new("A-cycle normalization", resid, 1e-12));
        }

        // q integrates to zero over every gap
        let ctl = QuadCtl::default();
        for j in 1..=g {
            let (a, b) = self.config.gap(j);
            let rule = QuadratureRule::cos_substitution(ctl.base, a, b);
            let val = rule.integrate(|s| {
                self.q(s) / reduced_abs_r(&self.config, 2 * j + 1, 2 * j, s).sqrt()
            });
            let scale = rule.integrate(|s| {
                self.q(s).abs() / reduced_abs_r(&self.config, 2 * j + 1, 2 * j, s).sqrt()
            });
            checks.push(Check::new(
                format!("q vanishing over gap {j}"),
                val.abs() / scale.max(1e-300),
                1e-9,
            ));
        }
        checks
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::validate;

    fn g1_config() -> Configuration {
        validate(vec![1.0, 2.0, 3.0], 0.0).unwrap()
    }

    /// Composite-midpoint oracle at ten times the node count; handles the
    /// inverse-square-root endpoints by the same substitution but with a
    /// rule built independently of `QuadratureRule`.
    fn oracle_gap_integral(config: &Configuration, j: usize, pow: i32, n: usize) -> f64 {
        let (a, b) = config.gap(j);
        let mid = 0.5 * (a + b);
        let half = 0.5 * (b - a);
        // midpoint rule in theta: int_0^pi f(m + h cos t) dt
        let mut s = 0.0;
        for k in 0..n {
            let t = (k as f64 + 0.5) * std::f64::consts::PI / n as f64;
            let x = mid + half * t.cos();
            let rest: f64 = config
                .x()
                .iter()
                .enumerate()
                .filter(|&(i, _)| i + 1 != 2 * j + 1 && i + 1 != 2 * j)
                .map(|(_, &xk)| (x + xk).abs())
                .product();
            s += x.powi(pow) / rest.sqrt();
        }
        s * std::f64::consts::PI / n as f64
    }

    #[test]
    fn a11_matches_oracle() {
        let c = g1_config();
        let ctl = QuadCtl::default();
        let (a, _, _) = a_matrix(&c, &ctl).unwrap();
        // a_{1,1} = 2 * int over gap 1 (sign +1 for k=1)
        let oracle = 2.0 * oracle_gap_integral(&c, 1, 0, 2000);
        assert!(
            (a[(0, 0)] - oracle).abs() < 1e-10 * oracle.abs(),
            "{} vs {}",
            a[(0, 0)],
            oracle
        );
    }

    #[test]
    fn sheet1_sign_by_continuation() {
        let c = g1_config();
        // continue sqrt(R) along a small upper half-plane arc from s=0 to
        // s=-2.5 and compare the sign with the direct evaluation
        let n = 4000;
        let z0 = Complex64::new(0.0, 0.0);
        let z1 = Complex64::new(-2.5, 0.0);
        let mut prev = {
            let r: Complex64 = c.x().iter().map(|&x| z0 + x).product();
            r.sqrt() // positive on (-x1, inf)
        };
        for k in 1..=n {
            let t = k as f64 / n as f64;
            // arc bulging into the upper half-plane
            let z = z0 * (1.0 - t) + z1 * t + Complex64::new(0.0, 0.9 * (std::f64::consts::PI * t).sin());
            let r: Complex64 = c.x().iter().map(|&x| z + x).product();
            let mut s = r.sqrt();
            if (s - prev).norm() > (s + prev).norm() {
                s = -s;
            }
            prev = s;
        }
        let direct = sqrt_r_sheet1(-2.5, &c).unwrap();
        assert!((prev.re - direct).abs() < 1e-6, "{} vs {}", prev.re, direct);
        assert!(prev.im.abs() < 1e-6);
        // matches the closed form -sqrt(1.5*0.5*0.5)
        assert!((direct + (1.5_f64 * 0.5 * 0.5).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn sheet1_domain_errors() {
        let c = g1_config();
        assert!(matches!(
            sqrt_r_sheet1(-1.5, &c),
            Err(SurfaceError::PointOnCut(_))
        ));
        assert!(matches!(
            sqrt_r_sheet1(-3.5, &c),
            Err(SurfaceError::PointOnCut(_))
        ));
        // g=0: R(0) = x1 = 1
        let c0 = validate(vec![1.0], 0.0).unwrap();
        assert_eq!(sqrt_r_sheet1(0.0, &c0).unwrap(), 1.0);
    }

    #[test]
    fn q_root_in_gap_and_t_relation() {
        let c = g1_config();
        let s = SurfaceData::compute(&c, &QuadCtl::default()).unwrap();
        // unique root of q in (-3, -2)
        let root = -2.0 * s.q_coeffs[0];
        assert!((-3.0..-2.0).contains(&root), "root {root}");
        // z* = A_hat / A for the 1x1 case
        let z_star = s.a_hat[(0, 0)] / s.a[(0, 0)];
        assert!((z_star - root).abs() < 1e-10);
        assert!((s.t_mat[(0, 0)] - z_star).abs() < 1e-12);
    }

    #[test]
    fn g0_degenerate_values() {
        let c = validate(vec![1.0], 0.75).unwrap();
        let s = SurfaceData::compute(&c, &QuadCtl::default()).unwrap();
        assert!(s.q_coeffs.is_empty());
        assert_eq!(s.q(123.0), 0.5);
        assert!((s.c + 0.25).abs() < 1e-14);
        assert!(s.omega.is_empty());
        assert!((s.d1 + 0.75).abs() < 1e-10); // d1 = -alpha sqrt(x1)
        let c5 = validate(vec![5.0], 0.0).unwrap();
        let s5 = SurfaceData::compute(&c5, &QuadCtl::default()).unwrap();
        assert!((s5.c + 1.25).abs() < 1e-14);
    }

    #[test]
    fn g0_d1_example() {
        let c = validate(vec![4.0], 1.0).unwrap();
        let s = SurfaceData::compute(&c, &QuadCtl::default()).unwrap();
        assert!((s.d1 + 2.0).abs() < 1e-10, "d1 = {}", s.d1);
    }

    #[test]
    fn alpha_zero_kills_alpha_tilde() {
        let c = g1_config();
        let s = SurfaceData::compute(&c, &QuadCtl::default()).unwrap();
        assert!(s.alpha_tilde.iter().all(|&v| v == 0.0));
        assert_eq!(s.d1, 0.0);
    }

    #[test]
    fn invariants_g1_g2() {
        for cfg in [
            validate(vec![1.0, 2.0, 3.0], 0.0).unwrap(),
            validate(vec![1.0, 2.0, 3.0, 4.5, 7.0], 0.5).unwrap(),
        ] {
            let s = SurfaceData::compute(&cfg, &QuadCtl::default()).unwrap();
            for chk in s.verify_invariants() {
                assert!(chk.pass, "{chk}");
            }
        }
    }

    #[test]
    fn omega_positive_and_lemma_value_g1() {
        let c = g1_config();
        let s = SurfaceData::compute(&c, &QuadCtl::default()).unwrap();
        assert!(s.omega[0] > 0.0);
        // frozen from the independent quadrature oracle
        assert!((s.omega[0] - 2.3962804695) .abs() < 1e-8);
        assert!((s.omega[0] - 4.0 * std::f64::consts::PI * s.a_inv[(0, 0)]).abs() < 1e-10);
    }

    #[test]
    fn tau_g1_symmetric_config_is_i() {
        // x = (1,2,3) maps the gap onto the cut under s -> -4-s, so tau = i
        let c = g1_config();
        let s = SurfaceData::compute(&c, &QuadCtl::default()).unwrap();
        assert!((s.tau[(0, 0)] - Complex64::new(0.0, 1.0)).norm() < 1e-10);
    }

    #[test]
    fn nu_values_and_derivative() {
        let c = g1_config();
        let s = SurfaceData::compute(&c, &QuadCtl::default()).unwrap();
        assert_eq!(s.nu(0.0).unwrap()[0], 0.0); // alpha = 0 here
        let r = 4.0 * std::f64::consts::PI.powi(2) / s.omega[0].powi(2);
        assert!((s.nu(r).unwrap()[0] + 1.0).abs() < 1e-12);
        // d nu_j / dr = -(A^{-1})_{gj} / sqrt(r) by finite differences
        let r0 = 7.3;
        let h = 1e-6;
        let fd = (s.nu(r0 + h).unwrap()[0] - s.nu(r0 - h).unwrap()[0]) / (2.0 * h);
        let expect = -s.a_inv[(0, 0)] / r0.sqrt();
        assert!((fd - expect).abs() < 1e-8 * expect.abs());
        assert!(matches!(s.nu(-1.0), Err(SurfaceError::NegativeR(_))));
    }

    #[test]
    fn scaling_covariance_of_omega() {
        let lam = 2.0;
        let c1 = validate(vec![1.0, 2.0, 3.0, 4.5, 7.0], 0.0).unwrap();
        let c2 = validate(vec![lam, 2.0 * lam, 3.0 * lam, 4.5 * lam, 7.0 * lam], 0.0).unwrap();
        let s1 = SurfaceData::compute(&c1, &QuadCtl::default()).unwrap();
        let s2 = SurfaceData::compute(&c2, &QuadCtl::default()).unwrap();
        for j in 0..2 {
            let ratio = s2.omega[j] / s1.omega[j];
            assert!((ratio - lam.sqrt()).abs() < 1e-8, "j={j} ratio={ratio}");
        }
    }

    #[test]
    fn quadrature_cap_reports_not_converged() {
        let c = g1_config();
        let tight = QuadCtl {
            base: 2,
            rel_tol: 1e-300,
            max_order: 4,
        };
        assert!(matches!(
            a_matrix(&c, &tight),
            Err(SurfaceError::QuadratureNotConverged { .. })
        ));
    }
}
