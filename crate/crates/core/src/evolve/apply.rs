//! ψ(q_b, t_b) = ∫ K(q_a, t_a; q_b, t_b) ψ(q_a, t_a) dq_a.
//!
//! The kernel is `M e^{iφ₀} exp(i(a q_a² + b q_b² + c q_a q_b))`. Complex
//! Gaussian inputs are integrated in closed form. Other inputs use a
//! Filon-type rule per grid interval: ψ is replaced by its local cubic
//! interpolant, and the remaining factor exp(i(α x² + κ x)) on x ∈ [−1, 1]
//! is integrated exactly for the cubic. Small κ uses 16-point
//! Gauss–Legendre; large κ expands exp(iαx²) in a short Taylor series and
//! uses the closed-form moments ∫ x^k e^{iκx}.

use num_complex::Complex64;

use super::{ComplexGaussian, EvolveError, WavePacket};
use crate::classical::solve_fundamental;
use crate::freq_profile::FrequencyProfile;
use crate::kernel::GaussianKernel;

/// Largest |a|·Δq²/4 the per-interval chirp expansion accepts.
pub const MAX_CELL_CHIRP: f64 = 0.02;

const PAIR_TOL: f64 = 1e-12;
const TAYLOR_TERMS: usize = 5;
const GAUSS_BELOW: f64 = 12.0;
const DEGREE: usize = 3 + 2 * (TAYLOR_TERMS - 1);

const GL_X: [f64; 8] = [
    0.095_012_509_837_637_44,
    0.281_603_550_779_258_9,
    0.458_016_777_657_227_4,
    0.617_876_244_402_643_7,
    0.755_404_408_355_003,
    0.865_631_202_387_831_7,
    0.944_575_023_073_232_6,
    0.989_400_934_991_649_9,
];
const GL_W: [f64; 8] = [
    0.189_450_610_455_068_5,
    0.182_603_415_044_923_6,
    0.169_156_519_395_002_5,
    0.149_595_988_816_576_7,
    0.124_628_971_255_533_9,
    0.095_158_511_682_492_78,
    0.062_253_523_938_647_89,
    0.027_152_459_411_754_09,
];

/// Propagates `psi_in` from its own time to `t_b`.
pub fn propagate_kernel(
    psi_in: &WavePacket,
    profile: &FrequencyProfile,
    mass: f64,
    t_b: f64,
) -> Result<WavePacket, EvolveError> {
    let t_a = psi_in.t();
    if !(t_b > t_a) {
        return Err(EvolveError::InvalidInput(format!(
            "target time {t_b} must exceed the packet time {t_a}"
        )));
    }
    psi_in.check_edges()?;
    let pair = solve_fundamental(profile, t_a, t_b, PAIR_TOL)?;
    let kernel = GaussianKernel::robust(mass, &pair, t_b)?;
    propagate_with_kernel(psi_in, &kernel)
}

/// Applies a precomputed kernel whose window starts at the packet time.
pub fn propagate_with_kernel(
    psi_in: &WavePacket,
    kernel: &GaussianKernel,
) -> Result<WavePacket, EvolveError> {
    let (t_a, t_b) = kernel.window();
    if psi_in.t() != t_a {
        return Err(EvolveError::InvalidInput(format!(
            "kernel starts at {t_a}, packet is at {}",
            psi_in.t()
        )));
    }
    psi_in.check_edges()?;
    let out = match psi_in.shape() {
        Some(shape) => {
            WavePacket::from_shape(*psi_in.grid(), gaussian_image(kernel, shape), t_b)?
        }
        None => filon(psi_in, kernel)?,
    };
    out.check_edges()?;
    Ok(out)
}

fn gaussian_image(kernel: &GaussianKernel, shape: &ComplexGaussian) -> ComplexGaussian {
    let i = Complex64::i();
    let (a, b, c) = kernel.coefficients();
    let a2 = shape.a + i * a;
    let quarter = 0.25 / a2;
    ComplexGaussian {
        a: i * b + c * c * quarter,
        b: -i * c * shape.b * 2.0 * quarter,
        c: shape.c
            + kernel.modulus().ln()
            + i * kernel.prefactor_phase()
            + 0.5 * (std::f64::consts::PI / -a2).ln()
            - shape.b * shape.b * quarter,
    }
}

/// Monomial coefficients (in x = (q − m)/d) of the cubic through nodes at
/// x = offset, offset+2, offset+4, offset+6.
fn cubic_basis(offset: f64) -> [[f64; 4]; 4] {
    let xs: [f64; 4] = std::array::from_fn(|i| offset + 2.0 * i as f64);
    // Lagrange basis polynomials expanded into monomials
    let mut basis = [[0.0; 4]; 4];
    for (i, row) in basis.iter_mut().enumerate() {
        let mut poly = [1.0, 0.0, 0.0, 0.0];
        let mut denom = 1.0;
        for (k, &xk) in xs.iter().enumerate() {
            if k == i {
                continue;
            }
            for p in (1..4).rev() {
                poly[p] = poly[p - 1] - xk * poly[p];
            }
            poly[0] *= -xk;
            denom *= xs[i] - xk;
        }
        for p in 0..4 {
            row[p] = poly[p] / denom;
        }
    }
    basis
}

/// ∫_{−1}^{1} x^k e^{iκx} dx for k ≤ DEGREE by upward recurrence (|κ| ≥ DEGREE).
fn moments(kappa: f64) -> [Complex64; DEGREE + 1] {
    let i = Complex64::i();
    let e_plus = Complex64::from_polar(1.0, kappa);
    let e_minus = e_plus.conj();
    let inv = 1.0 / (i * kappa);
    let mut m = [Complex64::new(0.0, 0.0); DEGREE + 1];
    m[0] = (e_plus - e_minus) * inv;
    let mut sign = -1.0;
    for k in 1..=DEGREE {
        m[k] = (e_plus - sign * e_minus) * inv - k as f64 * m[k - 1] * inv;
        sign = -sign;
    }
    m
}

fn cell_integral(p: &[Complex64; 4], alpha: f64, kappa: f64) -> Complex64 {
    let i = Complex64::i();
    if kappa.abs() <= GAUSS_BELOW {
        let mut sum = Complex64::new(0.0, 0.0);
        for (&x, &w) in GL_X.iter().zip(&GL_W) {
            for x in [x, -x] {
                let poly = p[0] + x * (p[1] + x * (p[2] + x * p[3]));
                sum += w * poly * Complex64::from_polar(1.0, alpha * x * x + kappa * x);
            }
        }
        return sum;
    }
    // P(x)·Σ (iαx²)ⁿ/n!
    let mut q = [Complex64::new(0.0, 0.0); DEGREE + 1];
    let mut factor = Complex64::new(1.0, 0.0);
    for n in 0..TAYLOR_TERMS {
        for (k, &pk) in p.iter().enumerate() {
            q[2 * n + k] += factor * pk;
        }
        factor *= i * alpha / (n + 1) as f64;
    }
    let m = moments(kappa);
    q.iter().zip(&m).map(|(a, b)| a * b).sum()
}

fn filon(psi_in: &WavePacket, kernel: &GaussianKernel) -> Result<WavePacket, EvolveError> {
    let grid = *psi_in.grid();
    let n = grid.n;
    let dq = grid.dq();
    let d = 0.5 * dq;
    let (a, b, c) = kernel.coefficients();
    let chirp = a.abs() * d * d;
    if chirp > MAX_CELL_CHIRP {
        return Err(EvolveError::GridTooCoarse {
            chirp,
            limit: MAX_CELL_CHIRP,
        });
    }
    let psi = psi_in.psi();
    let peak = psi.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let bases = [cubic_basis(-1.0), cubic_basis(-3.0), cubic_basis(-5.0)];

    // (midpoint, cubic coefficients) for every interval carrying amplitude
    let mut cells = Vec::with_capacity(n - 1);
    for j in 0..n - 1 {
        let (start, basis) = if j == 0 {
            (0, &bases[0])
        } else if j + 2 >= n {
            (n - 4, &bases[2])
        } else {
            (j - 1, &bases[1])
        };
        let nodes = &psi[start..start + 4];
        if nodes.iter().all(|z| z.norm() <= 1e-16 * peak) {
            continue;
        }
        let mut coeffs = [Complex64::new(0.0, 0.0); 4];
        for (row, &value) in basis.iter().zip(nodes) {
            for p in 0..4 {
                coeffs[p] += row[p] * value;
            }
        }
        cells.push((grid.point(j) + d, coeffs));
    }

    let alpha = a * d * d;
    let front = kernel.modulus() * d;
    let out: Vec<Complex64> = grid
        .points()
        .into_iter()
        .map(|qb| {
            let kappa = c * qb;
            let sum: Complex64 = cells
                .iter()
                .map(|(m, p)| {
                    let outer = Complex64::from_polar(1.0, (a * m + kappa) * m);
                    outer * cell_integral(p, alpha, (2.0 * a * m + kappa) * d)
                })
                .sum();
            front * Complex64::from_polar(1.0, kernel.prefactor_phase() + b * qb * qb) * sum
        })
        .collect();
    WavePacket::new(grid, out, kernel.window().1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evolve::{compare, GaussianState, Grid};

    #[test]
    fn gauss_legendre_rule() {
        let w: f64 = GL_W.iter().sum();
        assert!((w - 1.0).abs() < 1e-15);
        // exact for x^30
        let s: f64 = GL_X.iter().zip(&GL_W).map(|(x, w)| 2.0 * w * x.powi(30)).sum();
        assert!((s - 2.0 / 31.0).abs() < 1e-15);
    }

    #[test]
    fn cubic_basis_reproduces_cubics() {
        for offset in [-1.0, -3.0, -5.0] {
            let basis = cubic_basis(offset);
            let f = |x: f64| 1.0 - 2.0 * x + 0.5 * x * x * x;
            let mut c = [0.0; 4];
            for (i, row) in basis.iter().enumerate() {
                let x = offset + 2.0 * i as f64;
                for p in 0..4 {
                    c[p] += row[p] * f(x);
                }
            }
            for (got, want) in c.iter().zip([1.0, -2.0, 0.0, 0.5]) {
                assert!((got - want).abs() < 1e-14, "{c:?}");
            }
        }
    }

    #[test]
    fn moments_match_quadrature() {
        let kappa = 20.0;
        let m = moments(kappa);
        for (k, mk) in m.iter().enumerate() {
            // composite midpoint on a fine grid
            let n = 200_000;
            let mut s = Complex64::new(0.0, 0.0);
            for j in 0..n {
                let x = -1.0 + (j as f64 + 0.5) * 2.0 / n as f64;
                s += x.powi(k as i32) * Complex64::from_polar(1.0, kappa * x);
            }
            s *= 2.0 / n as f64;
            assert!((s - mk).norm() < 1e-8, "k={k}: {s} vs {mk}");
        }
    }

    #[test]
    fn quadrature_matches_closed_form() {
        let profile = FrequencyProfile::Constant { omega0: 1.0 };
        let s = GaussianState::new(0.5, 0.3, 0.6).unwrap();
        let exact_in = WavePacket::gaussian(Grid::standard(), &s, 0.0).unwrap();
        let exact = propagate_kernel(&exact_in, &profile, 1.0, 0.7).unwrap();
        let quad = propagate_kernel(&exact_in.clone().without_shape(), &profile, 1.0, 0.7).unwrap();
        let c = compare(&exact, &quad).unwrap();
        assert!(c.l2_error < 1e-7, "{c:?}");
        assert!((quad.norm() - exact_in.norm()).abs() < 1e-6);
    }

    #[test]
    fn free_spreading() {
        let s = GaussianState::new(0.0, 0.0, 0.5f64.sqrt()).unwrap();
        let p = WavePacket::gaussian(Grid::standard(), &s, 0.0).unwrap();
        let out = propagate_kernel(&p, &FrequencyProfile::free(), 1.0, 1.0).unwrap();
        assert!((out.expectation_q2() - 1.0).abs() < 1e-10);
        assert!((out.norm() - 1.0).abs() < 1e-6);
    }

    #[test]
    fn coarse_grid_is_rejected() {
        let grid = Grid::new(-10.0, 10.0, 64).unwrap();
        let p = WavePacket::gaussian(grid, &GaussianState::new(0.0, 0.0, 1.0).unwrap(), 0.0)
            .unwrap()
            .without_shape();
        let r = propagate_kernel(&p, &FrequencyProfile::free(), 1.0, 1e-2);
        assert!(matches!(r, Err(EvolveError::GridTooCoarse { .. })));
    }

    #[test]
    fn wrong_direction() {
        let p = WavePacket::gaussian(
            Grid::standard(),
            &GaussianState::new(0.0, 0.0, 1.0).unwrap(),
            1.0,
        )
        .unwrap();
        assert!(propagate_kernel(&p, &FrequencyProfile::free(), 1.0, 0.5).is_err());
    }
}
