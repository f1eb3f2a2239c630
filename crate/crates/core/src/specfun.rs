//! Cylinder functions of order 0 and 1 for real positive arguments and the
//! free-space fundamental solution of the 2-D Helmholtz equation.
//!
//! Small arguments use the ascending (Neumann) series, large arguments the
//! Hankel asymptotic expansion. Both branches are self-contained so their
//! accuracy can be audited term by term.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use num_complex::Complex64;

use crate::point::Point;

/// Euler–Mascheroni constant.
const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Arguments at or above this value use the asymptotic expansion.
pub const ASYMPTOTIC_CROSSOVER: f64 = 12.0;

/// Points closer than this are treated as coincident by [`phi`].
pub const COINCIDENCE_TOL: f64 = 1e-14;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SpecFunError {
    #[error("argument {0} outside the domain (0, inf)")]
    Domain(f64),
    #[error("source and observation points coincide at {0}")]
    Coincident(Point),
}

/// The four real cylinder functions J0, J1, Y0, Y1 at one argument.
#[derive(Debug, Clone, Copy)]
pub struct BesselPair {
    pub j0: f64,
    pub j1: f64,
    pub y0: f64,
    pub y1: f64,
}

impl BesselPair {
    pub fn h0(&self) -> Complex64 {
        Complex64::new(self.j0, self.y0)
    }

    pub fn h1(&self) -> Complex64 {
        Complex64::new(self.j1, self.y1)
    }
}

fn check_domain(x: f64) -> Result<(), SpecFunError> {
    if x.is_finite() && x > 0.0 {
        Ok(())
    } else {
        Err(SpecFunError::Domain(x))
    }
}

/// Evaluates J0, J1, Y0, Y1 at `x > 0`.
pub fn bessel_jy01(x: f64) -> Result<BesselPair, SpecFunError> {
    check_domain(x)?;
    Ok(if x < ASYMPTOTIC_CROSSOVER {
        ascending_series(x)
    } else {
        let h0 = hankel_asymptotic(0.0, x);
        let h1 = hankel_asymptotic(1.0, x);
        BesselPair {
            j0: h0.re,
            y0: h0.im,
            j1: h1.re,
            y1: h1.im,
        }
    })
}

/// Hankel function of the first kind and order zero, `J0(x) + i Y0(x)`.
pub fn hankel1_0(x: f64) -> Result<Complex64, SpecFunError> {
    check_domain(x)?;
    Ok(if x < ASYMPTOTIC_CROSSOVER {
        ascending_series(x).h0()
    } else {
        hankel_asymptotic(0.0, x)
    })
}

/// Hankel function of the first kind and order one, `J1(x) + i Y1(x)`.
pub fn hankel1_1(x: f64) -> Result<Complex64, SpecFunError> {
    check_domain(x)?;
    Ok(if x < ASYMPTOTIC_CROSSOVER {
        ascending_series(x).h1()
    } else {
        hankel_asymptotic(1.0, x)
    })
}

/// Free-space fundamental solution `(i/4) H0(kappa |x - y|)`.
pub fn phi(kappa: f64, x: &Point, y: &Point) -> Result<Complex64, SpecFunError> {
    check_domain(kappa)?;
    let r = x.dist(y);
    if r < COINCIDENCE_TOL {
        return Err(SpecFunError::Coincident(*x));
    }
    Ok(phi_radial(kappa, r))
}

/// `(i/4) H0(kappa r)` for a known distance `r > 0`.
pub(crate) fn phi_radial(kappa: f64, r: f64) -> Complex64 {
    let h = ascending_or_asymptotic_h0(kappa * r);
    Complex64::new(-0.25 * h.im, 0.25 * h.re)
}

fn ascending_or_asymptotic_h0(x: f64) -> Complex64 {
    if x < ASYMPTOTIC_CROSSOVER {
        ascending_series(x).h0()
    } else {
        hankel_asymptotic(0.0, x)
    }
}

/// Integral of `Phi_kappa(x, .)` over the disk of radius `radius` centred at `x`:
/// `(i pi R / (2 kappa)) H1(kappa R) - 1/kappa^2`.
pub fn disk_integral_phi(kappa: f64, radius: f64) -> Result<Complex64, SpecFunError> {
    check_domain(kappa)?;
    let h1 = hankel1_1(kappa * radius)?;
    let scale = Complex64::new(0.0, PI * radius / (2.0 * kappa));
    Ok(scale * h1 - 1.0 / (kappa * kappa))
}

fn ascending_series(x: f64) -> BesselPair {
    let q = 0.25 * x * x;
    let half = 0.5 * x;

    // term_k = (-q)^k / (k!)^2 and (-q)^k / (k! (k+1)!)
    let mut t0 = 1.0;
    let mut t1 = 1.0;
    let mut j0 = 1.0;
    let mut j1 = 1.0;
    let mut harmonic = 0.0;
    // sums for the non-logarithmic parts of Y0, Y1
    let mut s0 = 0.0;
    let mut s1 = 2.0 * (-EULER_GAMMA) + 1.0; // psi(1) + psi(2)
    for k in 1..300 {
        let kf = k as f64;
        t0 *= -q / (kf * kf);
        t1 *= -q / (kf * (kf + 1.0));
        harmonic += 1.0 / kf;
        j0 += t0;
        j1 += t1;
        s0 += harmonic * t0;
        // psi(k+1) + psi(k+2) = -2 gamma + 2 H_k + 1/(k+1)
        s1 += (-2.0 * EULER_GAMMA + 2.0 * harmonic + 1.0 / (kf + 1.0)) * t1;
        if t0.abs() < 1e-18 * j0.abs().max(1e-300) && t1.abs() < 1e-18 && k > 2 {
            break;
        }
    }
    j1 *= half;
    let log_term = (half).ln() + EULER_GAMMA;
    let y0 = 2.0 / PI * (log_term * j0 - s0);
    let y1 = -2.0 / (PI * x) + 2.0 / PI * half.ln() * j1 - half / PI * s1;
    BesselPair { j0, j1, y0, y1 }
}

/// Hankel's expansion of `H_nu^(1)(x)`, truncated at the smallest term.
fn hankel_asymptotic(nu: f64, x: f64) -> Complex64 {
    let mu = 4.0 * nu * nu;
    let mut term = Complex64::new(1.0, 0.0);
    let mut sum = term;
    let mut last = 1.0_f64;
    for k in 1..64 {
        let kf = k as f64;
        let odd = 2.0 * kf - 1.0;
        let factor = (mu - odd * odd) / (8.0 * kf * x);
        // multiply by i * factor
        let next = Complex64::new(-term.im * factor, term.re * factor);
        let size = next.norm();
        if size >= last && k > 10 {
            break;
        }
        term = next;
        sum += term;
        last = size;
        if size < 1e-17 {
            break;
        }
    }
    // exp(i (x - nu pi/2 - pi/4)), without subtracting from a large x
    let base = Complex64::new(x.cos(), x.sin()) * Complex64::new(FRAC_1_SQRT_2, -FRAC_1_SQRT_2);
    let phase = if nu == 0.0 {
        base
    } else {
        // exp(-i pi/2) = -i
        Complex64::new(base.im, -base.re)
    };
    (2.0 / (PI * x)).sqrt() * phase * sum
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: Complex64, b: Complex64, tol: f64) -> bool {
        (a - b).norm() <= tol * b.norm()
    }

    #[test]
    fn hankel0_at_one() {
        let h = hankel1_0(1.0).unwrap();
        assert!(close(h, Complex64::new(0.765_197_686_557_966_6, 0.088_256_964_215_676_96), 1e-12));
    }

    #[test]
    fn hankel1_at_one() {
        let h = hankel1_1(1.0).unwrap();
        assert!(close(h, Complex64::new(0.440_050_585_744_933_5, -0.781_212_821_300_288_7), 1e-12));
    }

    #[test]
    fn rejects_non_positive() {
        assert_eq!(hankel1_0(0.0), Err(SpecFunError::Domain(0.0)));
        assert!(hankel1_1(-1.0).is_err());
        assert!(hankel1_0(f64::NAN).is_err());
        assert!(hankel1_0(f64::INFINITY).is_err());
    }

    #[test]
    fn y0_log_growth_near_zero() {
        let xs = [1e-3, 1e-4, 1e-5];
        let ys: Vec<f64> = xs.iter().map(|&x| hankel1_0(x).unwrap().im).collect();
        assert!(ys.iter().all(|&y| y < 0.0));
        for w in ys.windows(2) {
            // one decade of x changes Y0 by (2/pi) ln 10
            let slope = w[0] - w[1];
            assert!((slope - 2.0 / PI * 10f64.ln()).abs() < 1e-5, "{slope}");
        }
    }

    #[test]
    fn x_h1_limit() {
        for x in [1e-4, 1e-6] {
            let v = hankel1_1(x).unwrap() * x;
            assert!((v - Complex64::new(0.0, -2.0 / PI)).norm() < 1e-6, "{v}");
        }
    }

    #[test]
    fn leading_amplitude_at_ten() {
        let m = hankel1_0(10.0).unwrap().norm();
        let lead = (2.0 / (PI * 10.0)).sqrt();
        assert!((lead - 0.252_313_252_2).abs() < 1e-9);
        assert!((m - lead).abs() < 0.01 * lead);
    }

    #[test]
    fn wronskian_at_two() {
        let b = bessel_jy01(2.0).unwrap();
        let w = b.j1 * b.y0 - b.j0 * b.y1;
        assert!((w - 2.0 / (PI * 2.0)).abs() < 1e-10);
    }

    #[test]
    fn branches_agree_at_crossover() {
        let x = ASYMPTOTIC_CROSSOVER;
        let s = ascending_series(x);
        for (nu, series) in [(0.0, s.h0()), (1.0, s.h1())] {
            let a = hankel_asymptotic(nu, x);
            assert!((a - series).norm() <= 1e-11 * a.norm(), "nu={nu}: {a} vs {series}");
        }
    }

    #[test]
    fn phi_reference_value() {
        let v = phi(1.0, &Point::new(0.0, 0.0), &Point::new(1.0, 0.0)).unwrap();
        assert!((v - Complex64::new(-0.022_064_241_1, 0.191_299_421_7)).norm() < 1e-9);
        let w = phi(2.0, &Point::new(0.3, 0.1), &Point::new(0.3, 0.6)).unwrap();
        assert!((v - w).norm() < 1e-15);
    }

    #[test]
    fn phi_coincident_points() {
        let p = Point::new(1.0, 2.0);
        assert!(matches!(phi(1.0, &p, &p), Err(SpecFunError::Coincident(_))));
    }

    #[test]
    fn disk_integral_reference() {
        let v = disk_integral_phi(1.0, 1.0).unwrap();
        assert!((v - Complex64::new(0.2271, 0.6912)).norm() < 1e-4, "{v}");
    }
}
