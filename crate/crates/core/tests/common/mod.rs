//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

use std::path::{Path, PathBuf};

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use tdho::freq_profile::FrequencyProfile;

/// Constant-frequency oscillator kernel (Mehler), written from scratch.
pub fn mehler(mass: f64, omega: f64, q_a: f64, q_b: f64, t: f64) -> Complex64 {
    let s = (omega * t).sin();
    let c = (omega * t).cos();
    let pre = (Complex64::new(0.0, -1.0) * mass * omega / (2.0 * std::f64::consts::PI * s)).sqrt();
    let phase = mass * omega / (2.0 * s) * ((q_a * q_a + q_b * q_b) * c - 2.0 * q_a * q_b);
    pre * Complex64::new(0.0, phase).exp()
}

/// Profiles with caustic-free unit windows used across criteria.
pub fn suite() -> Vec<(FrequencyProfile, f64, f64)> {
    vec![
        (FrequencyProfile::Constant { omega0: 1.0 }, 0.0, 1.0),
        (FrequencyProfile::ExpDecay { omega0: 1.0, alpha: 1.0 }, 0.0, 1.0),
        (FrequencyProfile::PowerLaw { omega0: 1.0, alpha: 1.0, beta: 0.5 }, 0.5, 1.5),
        (FrequencyProfile::DeltaPulse { omega0: 1.0, t0: 0.5 }, 0.0, 1.0),
        (FrequencyProfile::SechSquared { alpha: 2.0, beta: 1.0, t0: 0.0 }, -0.5, 0.5),
    ]
}

fn exact(x: f64) -> BigRational {
    BigRational::from_float(x).expect("finite")
}

/// J_ν(x) from `terms` terms of the power series. The sum runs in exact
/// rational arithmetic; only the prefactor (x/2)^ν / Γ(ν+1) is floating point.
pub fn bessel_series_oracle(nu: f64, x: f64, terms: usize) -> f64 {
    if x == 0.0 {
        return if nu == 0.0 { 1.0 } else { 0.0 };
    }
    let y = exact(x) * exact(x) / BigRational::from_integer(BigInt::from(4));
    let nu1 = exact(nu) + BigRational::one();
    let mut term = BigRational::one();
    let mut sum = BigRational::zero();
    for k in 0..terms {
        sum += &term;
        let k1 = BigRational::from_integer(BigInt::from(k + 1));
        term = -(term * &y) / (k1.clone() * (&nu1 + k1 - BigRational::one()));
    }
    let prefactor = (0.5 * x).powf(nu) / statrs::function::gamma::gamma(nu + 1.0);
    prefactor * sum.to_f64().expect("representable")
}

/// Conical function P_{−1/2+iμ}(x) from `terms` terms of
/// ₂F₁(−λ, λ+1; 1; (1−x)/2), summed exactly.
pub fn conical_series_oracle(mu: f64, x: f64, terms: usize) -> f64 {
    let z = (BigRational::one() - exact(x)) / BigRational::from_integer(BigInt::from(2));
    let quarter = BigRational::new(BigInt::from(1), BigInt::from(4));
    // −λ(λ+1) = μ² + 1/4
    let l = exact(mu) * exact(mu) + quarter;
    let mut term = BigRational::one();
    let mut sum = BigRational::zero();
    for k in 0..terms {
        sum += &term;
        let kk = BigRational::from_integer(BigInt::from(k));
        let k1 = BigRational::from_integer(BigInt::from(k + 1));
        term = term * (&kk * &k1 + &l) * &z / (&k1 * &k1);
    }
    sum.to_f64().expect("representable")
}

/// CSV files under `root`, as sorted relative paths.
pub fn csv_files(root: &Path) -> Vec<PathBuf> {
    fn walk(dir: &Path, root: &Path, out: &mut Vec<PathBuf>) {
        let Ok(entries) = std::fs::read_dir(dir) else { return };
        for entry in entries.flatten() {
            let path = entry.path();
            if path.is_dir() {
                walk(&path, root, out);
            } else if path.extension().is_some_and(|e| e == "csv") {
                out.push(path.strip_prefix(root).unwrap().to_path_buf());
            }
        }
    }
    let mut out = Vec::new();
    walk(root, root, &mut out);
    out.sort();
    out
}

/// Conical function summed in f64 until the tail is negligible. Every term of
/// the series is positive for conical degrees, so there is no cancellation and
/// the ratio bound on the tail is rigorous once the term ratio falls below 1.
pub fn conical_long_series(mu: f64, x: f64) -> f64 {
    let z = 0.5 * (1.0 - x);
    let l = mu * mu + 0.25;
    let (mut term, mut sum) = (1.0f64, 0.0f64);
    for k in 0..200_000 {
        sum += term;
        let k = k as f64;
        let ratio = (k * (k + 1.0) + l) * z / ((k + 1.0) * (k + 1.0));
        term *= ratio;
        if ratio < 1.0 && term / (1.0 - ratio) < 1e-17 * sum {
            return sum + term;
        }
    }
    panic!("series for mu = {mu}, x = {x} did not settle");
}
