//! Lanczos gamma function (g = 7, 9 coefficients), real and complex.

use num_complex::Complex64;
use std::f64::consts::PI;

const G: f64 = 7.0;
const COEFFS: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

fn is_nonpositive_integer(x: f64) -> bool {
    x <= 0.0 && x == x.round()
}

/// Γ(x) for real x; infinite at the poles.
pub fn gamma(x: f64) -> f64 {
    if is_nonpositive_integer(x) {
        return f64::INFINITY;
    }
    if x < 0.5 {
        return PI / ((PI * x).sin() * gamma(1.0 - x));
    }
    let z = x - 1.0;
    let mut sum = COEFFS[0];
    for (i, c) in COEFFS.iter().enumerate().skip(1) {
        sum += c / (z + i as f64);
    }
    let t = z + G + 0.5;
    (2.0 * PI).sqrt() * t.powf(z + 0.5) * (-t).exp() * sum
}

/// ln Γ(x) for x > 0.
pub fn ln_gamma(x: f64) -> f64 {
    debug_assert!(x > 0.0);
    if x < 0.5 {
        return (PI / (PI * x).sin()).ln() - ln_gamma(1.0 - x);
    }
    let z = x - 1.0;
    let mut sum = COEFFS[0];
    for (i, c) in COEFFS.iter().enumerate().skip(1) {
        sum += c / (z + i as f64);
    }
    let t = z + G + 0.5;
    0.5 * (2.0 * PI).ln() + (z + 0.5) * t.ln() - t + sum.ln()
}

/// 1/Γ(x), exactly zero at the poles.
pub fn rgamma(x: f64) -> f64 {
    if is_nonpositive_integer(x) {
        0.0
    } else {
        1.0 / gamma(x)
    }
}

/// Γ(z) for complex z.
pub fn gamma_complex(z: Complex64) -> Complex64 {
    if z.im == 0.0 {
        return Complex64::new(gamma(z.re), 0.0);
    }
    if z.re < 0.5 {
        let s = (Complex64::from(PI) * z).sin();
        return Complex64::from(PI) / (s * gamma_complex(Complex64::new(1.0, 0.0) - z));
    }
    let z = z - 1.0;
    let mut sum = Complex64::from(COEFFS[0]);
    for (i, c) in COEFFS.iter().enumerate().skip(1) {
        sum += *c / (z + i as f64);
    }
    let t = z + (G + 0.5);
    (2.0 * PI).sqrt() * t.powc(z + 0.5) * (-t).exp() * sum
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn factorials_and_half_integers() {
        let mut fact = 1.0;
        for n in 1..20 {
            fact *= n as f64;
            let g = gamma(n as f64 + 1.0);
            assert!((g - fact).abs() <= 1e-13 * fact, "{n}: {g} vs {fact}");
        }
        assert!((gamma(0.5) - PI.sqrt()).abs() < 1e-14);
        assert!((gamma(-0.5) + 2.0 * PI.sqrt()).abs() < 1e-13);
        assert_eq!(rgamma(0.0), 0.0);
        assert_eq!(rgamma(-3.0), 0.0);
    }

    #[test]
    fn ln_gamma_matches_gamma() {
        for x in [0.1, 0.7, 1.0, 3.3, 10.5, 40.0] {
            assert!((ln_gamma(x) - gamma(x).ln()).abs() < 1e-13 * gamma(x).ln().abs().max(1.0));
        }
    }

    #[test]
    fn complex_gamma_reflection_and_conjugation() {
        let z = Complex64::new(0.25, 0.8);
        let g = gamma_complex(z);
        let gc = gamma_complex(z.conj());
        assert!((g.conj() - gc).norm() < 1e-15 * g.norm());
        // |Γ(1/2 + iy)|² = π / cosh(πy)
        let y = 1.3;
        let h = gamma_complex(Complex64::new(0.5, y));
        let expected = PI / (PI * y).cosh();
        assert!((h.norm_sqr() - expected).abs() < 1e-14 * expected);
        // Γ(z+1) = zΓ(z)
        let lhs = gamma_complex(z + 1.0);
        assert!((lhs - z * g).norm() < 1e-14 * lhs.norm());
    }
}
