//! Riemann theta function of genus `g` by truncated lattice sum,
//! `theta(z) = sum_{n in Z^g} exp(i pi (n^t tau n + 2 n^t z))`,
//! with a truncation radius derived from the Gaussian tail bound.

use crate::surface::{imag_min_eig, Complex64};
use nalgebra::DMatrix;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ThetaError {
    #[error("||Im z|| = {norm:.3e} exceeds the advertised bound {max:.3e}; reduce z modulo the lattice first")]
    ImaginaryPartTooLarge { norm: f64, max: f64 },
    #[error("argument dimension {0} does not match genus {1}")]
    DimensionMismatch(usize, usize),
    #[error("invalid period matrix: {0}")]
    InvalidTau(String),
    #[error("truncation lattice would need {0} points; tighten z_im_max or tol")]
    LatticeTooLarge(usize),
}

/// Evaluator with a precomputed truncation lattice.
///
/// The radius `N` is the smallest integer for which the discarded tail
/// `sum_{||n||_inf > N} exp(-pi lambda_min ||n||^2 + 2 pi ||n|| ||Im z||)`
/// stays below `tol` for all arguments with `||Im z||_2 <= z_im_max`.
#[derive(Debug, Clone)]
pub struct ThetaEvaluator {
    g: usize,
    tau: DMatrix<Complex64>,
    lambda_min: f64,
    radius: usize,
    tol: f64,
    z_im_max: f64,
    /// lattice points, flattened with stride `g`
    points: Vec<i32>,
    /// quadratic exponents `i pi n^t tau n` per lattice point; kept as
    /// exponents so each term can be exponentiated after the linear part
    /// is added (premultiplied factors overflow for large radii)
    qe: Vec<Complex64>,
}

const MAX_LATTICE: usize = 20_000_000;

fn shell_count(g: usize, k: usize) -> f64 {
    let big = (2 * k + 1) as f64;
    let small = (2 * k - 1) as f64;
    big.powi(g as i32) - small.powi(g as i32)
}

/// Upper bound on the discarded tail beyond l-inf radius `n`.
fn tail_bound(g: usize, lambda_min: f64, z_im_max: f64, n: usize) -> f64 {
    let sqrt_g = (g as f64).sqrt();
    let mut total = 0.0;
    let mut k = n + 1;
    loop {
        let kf = k as f64;
        let term = shell_count(g, k)
            * (-std::f64::consts::PI * lambda_min * kf * kf
                + 2.0 * std::f64::consts::PI * sqrt_g * kf * z_im_max)
                .exp();
        total += term;
        if term < 1e-40 * (1.0 + total) || k > n + 10_000 {
            break;
        }
        k += 1;
    }
    total
}

impl ThetaEvaluator {
    pub fn new(
        tau: &DMatrix<Complex64>,
        tol: f64,
        z_im_max: f64,
    ) -> Result<ThetaEvaluator, ThetaError> {
        let g = tau.nrows();
        if tau.ncols() != g {
            return Err(ThetaError::InvalidTau("not square".into()));
        }
        let mut asym = 0.0_f64;
        let mut scale = 1.0_f64;
        for i in 0..g {
            for j in 0..g {
                asym = asym.max((tau[(i, j)] - tau[(j, i)]).norm());
                scale = scale.max(tau[(i, j)].norm());
            }
        }
        if asym > 1e-8 * scale {
            return Err(ThetaError::InvalidTau(format!(
                "symmetry residual {asym:.3e}"
            )));
        }
        let lambda_min = if g == 0 { 1.0 } else { imag_min_eig(tau) };
        if g > 0 && lambda_min <= 0.0 {
            return Err(ThetaError::InvalidTau(format!(
                "Im tau not positive definite (min eig {lambda_min:.3e})"
            )));
        }
        let mut radius = 1usize;
        while tail_bound(g, lambda_min, z_im_max, radius) >= tol {
            radius += 1;
            if g > 0 && (2 * radius + 1).pow(g as u32) > MAX_LATTICE {
                return Err(ThetaError::LatticeTooLarge((2 * radius + 1).pow(g as u32)));
            }
        }
        Ok(Self::with_radius(tau, lambda_min, radius, tol, z_im_max))
    }

    /// Builds the evaluator at an explicit radius (used by the truncation
    /// self-test; `new` is the normal entry point).
    pub fn with_radius(
        tau: &DMatrix<Complex64>,
        lambda_min: f64,
        radius: usize,
        tol: f64,
        z_im_max: f64,
    ) -> ThetaEvaluator {
        let g = tau.nrows();
        let mut points = Vec::new();
        let mut qe = Vec::new();
        let mut n = vec![-(radius as i32); g];
        loop {
            let mut quad = Complex64::new(0.0, 0.0);
            for i in 0..g {
                for j in 0..g {
                    quad += tau[(i, j)] * (n[i] as f64) * (n[j] as f64);
                }
            }
            qe.push(Complex64::i() * std::f64::consts::PI * quad);
            points.extend_from_slice(&n);
            // odometer increment over the box [-radius, radius]^g
            let mut d = 0;
            loop {
                if d == g {
                    return ThetaEvaluator {
                        g,
                        tau: tau.clone(),
                        lambda_min,
                        radius,
                        tol,
                        z_im_max,
                        points,
                        qe,
                    };
                }
                n[d] += 1;
                if n[d] <= radius as i32 {
                    break;
                }
                n[d] = -(radius as i32);
                d += 1;
            }
        }
    }

    #[inline]
    pub fn genus(&self) -> usize {
        self.g
    }

    #[inline]
    pub fn tau(&self) -> &DMatrix<Complex64> {
        &self.tau
    }

    #[inline]
    pub fn lambda_min(&self) -> f64 {
        self.lambda_min
    }

    #[inline]
    pub fn radius(&self) -> usize {
        self.radius
    }

    #[inline]
    pub fn tol(&self) -> f64 {
        self.tol
    }

    #[inline]
    pub fn z_im_max(&self) -> f64 {
        self.z_im_max
    }

    /// Lattice points (stride `genus`) and their quadratic exponents
    /// `i pi n^t tau n`.
    pub fn lattice(&self) -> (&[i32], &[Complex64]) {
        (&self.points, &self.qe)
    }

    fn check_arg(&self, z: &[Complex64]) -> Result<(), ThetaError> {
        if z.len() != self.g {
            return Err(ThetaError::DimensionMismatch(z.len(), self.g));
        }
        let norm = z.iter().map(|v| v.im * v.im).sum::<f64>().sqrt();
        if norm > self.z_im_max {
            return Err(ThetaError::ImaginaryPartTooLarge {
                norm,
                max: self.z_im_max,
            });
        }
        Ok(())
    }

    /// `theta(z)`, within `tol` of the exact lattice sum.
    pub fn theta(&self, z: &[Complex64]) -> Result<Complex64, ThetaError> {
        self.check_arg(z)?;
        if self.g == 0 {
            return Ok(Complex64::new(1.0, 0.0));
        }
        let mut sum = Complex64::new(0.0, 0.0);
        for (p, &e) in self.points.chunks_exact(self.g).zip(&self.qe) {
            let mut dot = Complex64::new(0.0, 0.0);
            for (k, &nk) in p.iter().enumerate() {
                dot += z[k] * nk as f64;
            }
            sum += (e + Complex64::i() * 2.0 * std::f64::consts::PI * dot).exp();
        }
        Ok(sum)
    }

    /// Gradient of `theta`, termwise-differentiated truncated sum.
    pub fn theta_grad(&self, z: &[Complex64]) -> Result<Vec<Complex64>, ThetaError> {
        self.check_arg(z)?;
        let mut grad = vec![Complex64::new(0.0, 0.0); self.g];
        if self.g == 0 {
            return Ok(grad);
        }
        let two_pi_i = Complex64::i() * 2.0 * std::f64::consts::PI;
        for (p, &e) in self.points.chunks_exact(self.g).zip(&self.qe) {
            let mut dot = Complex64::new(0.0, 0.0);
            for (k, &nk) in p.iter().enumerate() {
                dot += z[k] * nk as f64;
            }
            let term = (e + two_pi_i * dot).exp();
            for (k, &nk) in p.iter().enumerate() {
                grad[k] += term * two_pi_i * nk as f64;
            }
        }
        Ok(grad)
    }

    /// `theta(u)` at a real argument; real and positive for the purely
    /// imaginary period matrices produced by the surface module.
    pub fn theta_real(&self, u: &[f64]) -> Result<f64, ThetaError> {
        let z: Vec<Complex64> = u.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        Ok(self.theta(&z)?.re)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tau_i() -> DMatrix<Complex64> {
        DMatrix::from_element(1, 1, Complex64::new(0.0, 1.0))
    }

    // deterministic pseudo-random stream for test arguments
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

    fn tau_g2() -> DMatrix<Complex64> {
        // frozen from the x = (1, 2, 3, 4.5, 7) surface
        DMatrix::from_row_slice(
            2,
            2,
            &[
                Complex64::new(0.0, 0.9913676324),
                Complex64::new(0.0, -0.5795488202),
                Complex64::new(0.0, -0.5795488202),
                Complex64::new(0.0, 1.2333953852),
            ],
        )
    }

    #[test]
    fn scalar_lattice_oracle_at_zero() {
        let th = ThetaEvaluator::new(&tau_i(), 1e-13, 0.5).unwrap();
        let mut oracle = 0.0;
        for n in -50i64..=50 {
            oracle += (-std::f64::consts::PI * (n * n) as f64).exp();
        }
        let v = th.theta(&[Complex64::new(0.0, 0.0)]).unwrap();
        assert!((v.re - oracle).abs() < 1e-13);
        assert!(v.im.abs() < 1e-14);
    }

    #[test]
    fn evenness_random_args() {
        let th = ThetaEvaluator::new(&tau_g2(), 1e-13, 0.6).unwrap();
        let mut rng = Xorshift(0x9E3779B97F4A7C15);
        for _ in 0..100 {
            let z: Vec<Complex64> = (0..2)
                .map(|_| Complex64::new(rng.next_f64() * 2.0 - 1.0, 0.4 * (rng.next_f64() - 0.5)))
                .collect();
            let mz: Vec<Complex64> = z.iter().map(|v| -v).collect();
            let a = th.theta(&z).unwrap();
            let b = th.theta(&mz).unwrap();
            assert!((a - b).norm() < 1e-12 * a.norm().max(1.0));
        }
    }

    #[test]
    fn quasi_periodicity() {
        let tau = tau_g2();
        let th = ThetaEvaluator::new(&tau, 1e-13, 6.0).unwrap();
        let mut rng = Xorshift(42);
        for _ in 0..40 {
            let z: Vec<Complex64> = (0..2)
                .map(|_| Complex64::new(rng.next_f64() - 0.5, 0.3 * (rng.next_f64() - 0.5)))
                .collect();
            let lam: Vec<i32> = (0..2).map(|_| (rng.next_f64() * 5.0) as i32 - 2).collect();
            let lamp: Vec<i32> = (0..2).map(|_| (rng.next_f64() * 5.0) as i32 - 2).collect();
            let mut shifted = z.clone();
            for i in 0..2 {
                shifted[i] += Complex64::new(lamp[i] as f64, 0.0);
                for j in 0..2 {
                    shifted[i] += tau[(i, j)] * lam[j] as f64;
                }
            }
            // exp(-i pi (2 lam^t z + lam^t tau lam))
            let mut phase = Complex64::new(0.0, 0.0);
            for i in 0..2 {
                phase += z[i] * 2.0 * lam[i] as f64;
                for j in 0..2 {
                    phase += tau[(i, j)] * (lam[i] as f64) * (lam[j] as f64);
                }
            }
            let factor = (-Complex64::i() * std::f64::consts::PI * phase).exp();
            let lhs = th.theta(&shifted).unwrap();
            let rhs = factor * th.theta(&z).unwrap();
            assert!(
                (lhs - rhs).norm() < 1e-10 * rhs.norm().max(1e-3),
                "residual {}",
                (lhs - rhs).norm() / rhs.norm()
            );
        }
    }

    #[test]
    fn gradient_zero_at_origin_and_fd() {
        let th = ThetaEvaluator::new(&tau_g2(), 1e-13, 0.5).unwrap();
        let zero = vec![Complex64::new(0.0, 0.0); 2];
        let g0 = th.theta_grad(&zero).unwrap();
        assert!(g0.iter().all(|v| v.norm() < 1e-12));

        let mut rng = Xorshift(7);
        for _ in 0..10 {
            let z: Vec<Complex64> = (0..2)
                .map(|_| Complex64::new(rng.next_f64() - 0.5, 0.2 * (rng.next_f64() - 0.5)))
                .collect();
            let grad = th.theta_grad(&z).unwrap();
            let h = 1e-5;
            for k in 0..2 {
                let mut zp = z.clone();
                let mut zm = z.clone();
                zp[k] += Complex64::new(h, 0.0);
                zm[k] -= Complex64::new(h, 0.0);
                let fd = (th.theta(&zp).unwrap() - th.theta(&zm).unwrap()) / (2.0 * h);
                assert!((fd - grad[k]).norm() < 1e-7 * grad[k].norm().max(1.0));
            }
        }
    }

    #[test]
    fn scalar_gradient_oracle() {
        let th = ThetaEvaluator::new(&tau_i(), 1e-14, 0.5).unwrap();
        let z = 0.25;
        let mut oracle = 0.0;
        for n in -50i64..=50 {
            let nf = n as f64;
            oracle += (-std::f64::consts::PI * nf * nf).exp()
                * (-2.0 * std::f64::consts::PI * nf)
                * (2.0 * std::f64::consts::PI * nf * z).sin();
        }
        let grad = th.theta_grad(&[Complex64::new(z, 0.0)]).unwrap();
        assert!(
            (grad[0].re - oracle).abs() < 1e-12,
            "{} vs {}",
            grad[0].re,
            oracle
        );
    }

    #[test]
    fn positive_on_real_torus() {
        let th = ThetaEvaluator::new(&tau_g2(), 1e-12, 0.1).unwrap();
        // golden-ratio style quasi-random sample of the torus
        let a1 = 0.7548776662466927;
        let a2 = 0.5698402909980532;
        for k in 1..=1000 {
            let u = [(k as f64 * a1).fract(), (k as f64 * a2).fract()];
            let v = th.theta_real(&u).unwrap();
            assert!(v > 0.0, "theta({u:?}) = {v}");
        }
    }

    #[test]
    fn truncation_radius_doubling() {
        let tau = tau_g2();
        let th = ThetaEvaluator::new(&tau, 1e-12, 0.5).unwrap();
        let th2 =
            ThetaEvaluator::with_radius(&tau, th.lambda_min(), th.radius() * 2, th.tol(), 0.5);
        let mut rng = Xorshift(99);
        for _ in 0..100 {
            let z = vec![
                Complex64::new(rng.next_f64(), 0.0),
                Complex64::new(rng.next_f64(), 0.0),
            ];
            let a = th.theta(&z).unwrap();
            let b = th2.theta(&z).unwrap();
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn imaginary_bound_enforced() {
        let th = ThetaEvaluator::new(&tau_i(), 1e-12, 0.25).unwrap();
        let err = th.theta(&[Complex64::new(0.0, 0.5)]);
        assert!(matches!(err, Err(ThetaError::ImaginaryPartTooLarge { .. })));
    }

    #[test]
    fn genus_zero_is_one() {
        let tau = DMatrix::<Complex64>::zeros(0, 0);
        let th = ThetaEvaluator::new(&tau, 1e-12, 1.0).unwrap();
        assert_eq!(th.theta(&[]).unwrap(), Complex64::new(1.0, 0.0));
    }
}
