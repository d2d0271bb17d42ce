//! Bessel functions of the first kind, J_ν(x), for real ν ≥ 0 and x ≥ 0.
//!
//! Two regimes:
//! * `x ≤ SERIES_LIMIT` or `ν ≥ x`: the ascending power series, summed in
//!   double-double so the alternating cancellation (up to ~10⁷ at the seam)
//!   costs nothing.
//! * otherwise: Hankel's asymptotic expansion for the fractional orders
//!   ν₀ = frac(ν) and ν₀ + 1, then forward recurrence up to ν, which is
//!   stable while the order stays below x.

use super::dd::DoubleDouble;
use super::gamma::{gamma, ln_gamma};
use super::SpecFunError;
use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

/// Seam between the power series and the asymptotic expansion. At x = 17 the
/// smallest Hankel term for orders below 2 is ~e⁻³⁴, below double precision.
pub const SERIES_LIMIT: f64 = 17.0;

const MAX_SERIES_TERMS: usize = 500;

/// J_ν(x).
pub fn bessel_j(nu: f64, x: f64) -> Result<f64, SpecFunError> {
    if !nu.is_finite() || nu < 0.0 {
        return Err(SpecFunError::Domain {
            what: "Bessel order",
            value: nu,
        });
    }
    if !x.is_finite() || x < 0.0 {
        return Err(SpecFunError::Domain {
            what: "Bessel argument",
            value: x,
        });
    }
    if x == 0.0 {
        return Ok(if nu == 0.0 { 1.0 } else { 0.0 });
    }
    if x <= SERIES_LIMIT || nu >= x {
        Ok(series(nu, x))
    } else {
        Ok(asymptotic_with_recurrence(nu, x))
    }
}

/// dJ_ν/dx = (ν/x) J_ν − J_{ν+1}.
pub fn bessel_j_derivative(nu: f64, x: f64) -> Result<f64, SpecFunError> {
    let next = bessel_j(nu + 1.0, x)?;
    if x == 0.0 {
        // J_ν'(0): 1/2 for ν = 1, 0 for ν > 1, and infinite for 0 < ν < 1
        return Ok(if nu == 0.0 {
            0.0
        } else if nu == 1.0 {
            0.5
        } else if nu > 1.0 {
            0.0
        } else {
            f64::INFINITY
        });
    }
    Ok(nu / x * bessel_j(nu, x)? - next)
}

fn series(nu: f64, x: f64) -> f64 {
    // Σ (−x²/4)^k / (k! (ν+1)_k)
    let minus_quarter_x2 = -DoubleDouble::product(x, x) * DoubleDouble::from_f64(0.25);
    let mut term = DoubleDouble::ONE;
    let mut sum = DoubleDouble::ONE;
    for k in 1..MAX_SERIES_TERMS {
        let kf = k as f64;
        let denom = DoubleDouble::from_f64(kf) * DoubleDouble::sum(nu, kf);
        term = term * minus_quarter_x2 / denom;
        sum = sum + term;
        if term.abs_f64() <= 1e-34 * sum.abs_f64() {
            break;
        }
    }
    let half_x = 0.5 * x;
    let prefactor = if nu == 0.0 {
        1.0
    } else if nu < 100.0 {
        half_x.powf(nu) / gamma(nu + 1.0)
    } else {
        (nu * half_x.ln() - ln_gamma(nu + 1.0)).exp()
    };
    prefactor * sum.to_f64()
}

/// Hankel expansion J_ν(x) = √(2/πx) (P cos χ − Q sin χ), χ = x − (ν/2 + 1/4)π.
fn hankel(nu: f64, x: f64) -> f64 {
    let mu = 4.0 * nu * nu;
    let mut p = 1.0;
    let mut q = 0.0;
    let mut term: f64 = 1.0;
    let mut previous = f64::INFINITY;
    for k in 1..200 {
        let odd = (2 * k - 1) as f64;
        term *= (mu - odd * odd) / (k as f64 * 8.0 * x);
        let size = term.abs();
        if size > previous {
            break;
        }
        // a_k / x^k enters P for even k and Q for odd k, with alternating signs
        match k % 4 {
            1 => q += term,
            2 => p -= term,
            3 => q -= term,
            _ => p += term,
        }
        if size < 1e-17 * p.abs().max(q.abs()).max(1e-300) {
            break;
        }
        previous = size;
    }
    let chi = x - (nu * FRAC_PI_2 + FRAC_PI_4);
    (2.0 / (PI * x)).sqrt() * (p * chi.cos() - q * chi.sin())
}

fn asymptotic_with_recurrence(nu: f64, x: f64) -> f64 {
    let steps = nu.floor();
    let nu0 = nu - steps;
    let mut prev = hankel(nu0, x);
    if steps == 0.0 {
        return prev;
    }
    let mut current = hankel(nu0 + 1.0, x);
    let mut order = nu0 + 1.0;
    for _ in 1..steps as usize {
        let next = 2.0 * order / x * current - prev;
        prev = current;
        current = next;
        order += 1.0;
    }
    current
}
