//! Legendre functions P_λ(x) on (−1, 1] for conical degree λ = −1/2 + iμ and
//! for real degree.
//!
//! Both cases enter only through L = λ(λ+1), which is real (−(μ² + 1/4) for
//! conical degree), so the hypergeometric series used here have real terms.
//!
//! * x > 0: P_λ(x) = ₂F₁(−λ, λ+1; 1; (1−x)/2), argument below 1/2.
//! * x ≤ 0: the expansion about x = 0 (from the quadratic transformation),
//!   P_λ(x) = A ₂F₁(−λ/2, (1+λ)/2; 1/2; x²) + B x ₂F₁((1−λ)/2, 1+λ/2; 3/2; x²),
//!   with A = √π / (Γ((1−λ)/2) Γ(1+λ/2)) and B = −2√π / (Γ(−λ/2) Γ((1+λ)/2)).
//!   For conical degree the gamma products are |Γ(3/4 + iμ/2)|² and
//!   |Γ(1/4 + iμ/2)|², evaluated on the complex path and audited for a
//!   vanishing imaginary part.

use num_complex::Complex64;
use std::f64::consts::PI;

use super::gamma::{gamma_complex, rgamma};
use super::SpecFunError;

/// Below this, accuracy is no longer uniform (logarithmic singularity at −1).
pub const DEGRADED_BELOW: f64 = -0.99;

const MAX_TERMS: usize = 5_000_000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ConicalDegree {
    /// λ = −1/2 + iμ.
    Conical { mu: f64 },
    /// λ = ν real.
    Real { nu: f64 },
}

impl ConicalDegree {
    /// λ(λ + 1), real in both cases.
    pub fn eigenvalue(&self) -> f64 {
        match *self {
            ConicalDegree::Conical { mu } => -(mu * mu + 0.25),
            ConicalDegree::Real { nu } => nu * (nu + 1.0),
        }
    }

    /// Degree with λ(λ+1) = −α², i.e. λ = −1/2 + i√(α² − 1/4). For α² < 1/4
    /// the square root is imaginary and the degree is real, −1/2 − √(1/4 − α²).
    pub fn from_sech_strength(alpha: f64) -> Self {
        let d = alpha * alpha - 0.25;
        if d >= 0.0 {
            ConicalDegree::Conical { mu: d.sqrt() }
        } else {
            ConicalDegree::Real {
                nu: -0.5 - (-d).sqrt(),
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LegendreValue {
    pub value: f64,
    pub derivative: f64,
    /// Set for x < −0.99, where the series converge slowly and accuracy is not guaranteed.
    pub degraded: bool,
    /// Largest |imaginary part| seen on the complex gamma path, relative.
    pub imaginary_residue: f64,
}

/// P_λ(x).
pub fn legendre_p(degree: ConicalDegree, x: f64) -> Result<f64, SpecFunError> {
    legendre_p_with_derivative(degree, x).map(|v| v.value)
}

/// P_λ(x) and dP_λ/dx.
pub fn legendre_p_with_derivative(
    degree: ConicalDegree,
    x: f64,
) -> Result<LegendreValue, SpecFunError> {
    if !(x > -1.0 && x <= 1.0) {
        return Err(SpecFunError::Domain {
            what: "Legendre argument",
            value: x,
        });
    }
    let (ConicalDegree::Conical { mu: p } | ConicalDegree::Real { nu: p }) = degree;
    if !p.is_finite() {
        return Err(SpecFunError::Domain {
            what: "Legendre degree",
            value: p,
        });
    }
    let l = degree.eigenvalue();
    if x > 0.0 {
        let (value, dz) = series_about_one(l, 0.5 * (1.0 - x))?;
        Ok(LegendreValue {
            value,
            derivative: -0.5 * dz,
            degraded: false,
            imaginary_residue: 0.0,
        })
    } else {
        let (a, b, imaginary_residue) = connection_coefficients(degree);
        let y = x * x;
        let (f1, df1) = hypergeometric_real(|k| k * k + 0.5 * k - 0.25 * l, 0.5, y)?;
        let (f2, df2) =
            hypergeometric_real(|k| (k + 0.5) * (k + 1.0) - 0.25 * l, 1.5, y)?;
        let value = a * f1 + b * x * f2;
        let derivative = a * 2.0 * x * df1 + b * (f2 + 2.0 * y * df2);
        Ok(LegendreValue {
            value,
            derivative,
            degraded: x < DEGRADED_BELOW,
            imaginary_residue,
        })
    }
}

/// ₂F₁(−λ, λ+1; 1; z) and its z-derivative; term ratio (k(k−1) − L)/k².
fn series_about_one(l: f64, z: f64) -> Result<(f64, f64), SpecFunError> {
    let mut coeff = 1.0; // c_k
    let mut z_prev = 1.0; // z^(k-1)
    let mut sum = 1.0;
    let mut dsum = 0.0;
    for k in 1..MAX_TERMS {
        let kf = k as f64;
        coeff *= (kf * (kf - 1.0) - l) / (kf * kf);
        let dterm = kf * coeff * z_prev;
        let term = coeff * z_prev * z;
        sum += term;
        dsum += dterm;
        z_prev *= z;
        if coeff == 0.0 || z_prev == 0.0 {
            return Ok((sum, dsum));
        }
        // once the ratio has settled below 1 the tail is geometric
        let ratio = ((kf + 1.0) * kf - l) / ((kf + 1.0) * (kf + 1.0)) * z;
        if ratio.abs() < 1.0 && kf * kf > l.abs() {
            let r = ratio.abs() * (kf + 2.0) / (kf + 1.0);
            if r < 1.0 {
                let tail = term.abs() * r / (1.0 - r);
                let dtail = dterm.abs() * r / (1.0 - r);
                if tail <= 1e-17 * sum.abs() && dtail <= 1e-17 * dsum.abs().max(1e-300) {
                    return Ok((sum, dsum));
                }
            }
        }
    }
    Err(SpecFunError::NoConvergence("Legendre series about x = 1"))
}

/// ₂F₁(a, b; c; y) with (a+k)(b+k) = `ab_shift(k)` real, and its y-derivative.
fn hypergeometric_real(
    ab_shift: impl Fn(f64) -> f64,
    c: f64,
    y: f64,
) -> Result<(f64, f64), SpecFunError> {
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut dsum = 0.0;
    for k in 0..MAX_TERMS {
        let kf = k as f64;
        // term_{k+1} = term_k (a+k)(b+k) / ((c+k)(k+1)) y
        let factor = ab_shift(kf) / ((c + kf) * (kf + 1.0));
        let dterm = term * factor * (kf + 1.0); // coefficient of y^k in F'
        term *= factor * y;
        dsum += dterm;
        sum += term;
        if term == 0.0 && dterm == 0.0 {
            return Ok((sum, dsum));
        }
        let next = ab_shift(kf + 1.0) / ((c + kf + 1.0) * (kf + 2.0)) * y;
        if next.abs() < 1.0 && kf > 4.0 {
            let r = next.abs();
            let tail = term.abs() * r / (1.0 - r);
            let dtail = dterm.abs().max(term.abs() * (kf + 2.0)) * r / (1.0 - r) * (kf + 2.0);
            if tail <= 1e-17 * sum.abs() && dtail <= 1e-17 * dsum.abs().max(1e-300) {
                return Ok((sum, dsum));
            }
        }
    }
    Err(SpecFunError::NoConvergence("Legendre series about x = 0"))
}

fn connection_coefficients(degree: ConicalDegree) -> (f64, f64, f64) {
    let sqrt_pi = PI.sqrt();
    match degree {
        ConicalDegree::Conical { mu } => {
            let g34 = gamma_complex(Complex64::new(0.75, -0.5 * mu))
                * gamma_complex(Complex64::new(0.75, 0.5 * mu));
            let g14 = gamma_complex(Complex64::new(0.25, -0.5 * mu))
                * gamma_complex(Complex64::new(0.25, 0.5 * mu));
            let residue = (g34.im.abs() / g34.norm()).max(g14.im.abs() / g14.norm());
            (sqrt_pi / g34.re, -2.0 * sqrt_pi / g14.re, residue)
        }
        ConicalDegree::Real { nu } => {
            let a = sqrt_pi * rgamma(0.5 * (1.0 - nu)) * rgamma(1.0 + 0.5 * nu);
            let b = -2.0 * sqrt_pi * rgamma(-0.5 * nu) * rgamma(0.5 * (1.0 + nu));
            (a, b, 0.0)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_at_one() {
        for d in [
            ConicalDegree::Conical { mu: 0.0 },
            ConicalDegree::Conical { mu: 3.7 },
            ConicalDegree::Real { nu: 2.3 },
            ConicalDegree::Real { nu: -0.8 },
        ] {
            assert_eq!(legendre_p(d, 1.0).unwrap(), 1.0);
        }
    }

    #[test]
    fn low_integer_degrees_are_polynomials() {
        for x in [-0.5, 0.0, 0.7] {
            let p1 = legendre_p(ConicalDegree::Real { nu: 1.0 }, x).unwrap();
            assert!((p1 - x).abs() < 1e-15, "{x}: {p1}");
            let p2 = legendre_p(ConicalDegree::Real { nu: 2.0 }, x).unwrap();
            assert!((p2 - 0.5 * (3.0 * x * x - 1.0)).abs() < 1e-15);
            let p0 = legendre_p(ConicalDegree::Real { nu: 0.0 }, x).unwrap();
            assert!((p0 - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn continuous_across_zero() {
        let d = ConicalDegree::Conical { mu: 1.9 };
        let left = legendre_p_with_derivative(d, 0.0).unwrap();
        let right = legendre_p_with_derivative(d, 1e-12).unwrap();
        let predicted = left.value + 1e-12 * left.derivative;
        assert!((predicted - right.value).abs() < 1e-13);
        assert!((left.derivative - right.derivative).abs() < 1e-9);
        assert!(left.imaginary_residue <= 1e-12);
    }

    #[test]
    fn domain_and_degradation() {
        let d = ConicalDegree::Conical { mu: 1.0 };
        assert!(legendre_p(d, -1.0).is_err());
        assert!(legendre_p(d, 1.0 + 1e-12).is_err());
        assert!(legendre_p_with_derivative(d, -0.995).unwrap().degraded);
        assert!(!legendre_p_with_derivative(d, -0.98).unwrap().degraded);
    }

    #[test]
    fn sech_strength_degree() {
        assert_eq!(
            ConicalDegree::from_sech_strength(2.0).eigenvalue(),
            -4.0
        );
        let small = ConicalDegree::from_sech_strength(0.3);
        assert!(matches!(small, ConicalDegree::Real { .. }));
        assert!((small.eigenvalue() + 0.09).abs() < 1e-15);
    }
}
