//! Crank–Nicolson for i ψ_t = −ψ_qq/(2μ) + (μ/2) ω²(t) q² ψ with zero
//! Dirichlet values at both grid ends. Second order in time, fourth order
//! in space (compact three-point Laplacian).

use num_complex::Complex64;

use super::{EvolveError, WavePacket};
use crate::classical::ClassicalError;
use crate::freq_profile::{FrequencyProfile, Side};

/// Raised (not fatal) when Δt·max|ω²|·max q² exceeds 1: the phase per step
/// of the outermost grid points is then poorly resolved.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StabilityWarning {
    pub indicator: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CnOutput {
    pub packet: WavePacket,
    pub steps: usize,
    pub warning: Option<StabilityWarning>,
}

pub fn crank_nicolson(
    psi_in: &WavePacket,
    profile: &FrequencyProfile,
    mass: f64,
    t_b: f64,
    dt: f64,
) -> Result<CnOutput, EvolveError> {
    let t_a = psi_in.t();
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(EvolveError::InvalidInput(format!("time step must be positive, got {dt}")));
    }
    if !(mass > 0.0 && mass.is_finite()) {
        return Err(EvolveError::InvalidInput(format!("mass must be positive, got {mass}")));
    }
    if !(t_b > t_a) {
        return Err(EvolveError::InvalidInput(format!(
            "target time {t_b} must exceed the packet time {t_a}"
        )));
    }
    profile.check_window(t_a, t_b).map_err(ClassicalError::from)?;

    let grid = *psi_in.grid();
    let q = grid.points();
    let q2max = q.iter().map(|x| x * x).fold(0.0, f64::max);
    let hop = 0.5 / (mass * grid.dq() * grid.dq());
    let events = profile.jump_events(t_a, t_b);

    let mut cuts = vec![t_a];
    cuts.extend(events.iter().map(|e| e.time));
    cuts.push(t_b);

    let mut psi = psi_in.psi().to_vec();
    let mut steps = 0;
    let mut max_w2: f64 = 0.0;
    let mut scratch = Scratch::new(grid.n);
    for (k, w) in cuts.windows(2).enumerate() {
        if k > 0 {
            let s = events[k - 1].strength;
            for (z, &x) in psi.iter_mut().zip(&q) {
                *z *= Complex64::from_polar(1.0, -0.5 * mass * s * x * x);
            }
        }
        let (s0, s1) = (w[0], w[1]);
        let n = ((s1 - s0) / dt).ceil().max(1.0) as usize;
        let h = (s1 - s0) / n as f64;
        for i in 0..n {
            let t_mid = s0 + (i as f64 + 0.5) * h;
            let w2 = profile
                .smooth_omega_squared(t_mid, Side::Right)
                .map_err(ClassicalError::from)?;
            max_w2 = max_w2.max(w2.abs());
            scratch.step(&mut psi, &q, hop, 0.5 * mass * w2, h);
        }
        steps += n;
    }
    let indicator = dt * max_w2 * q2max;
    Ok(CnOutput {
        packet: WavePacket::new(grid, psi, t_b)?,
        steps,
        warning: (indicator > 1.0).then_some(StabilityWarning { indicator }),
    })
}

struct Scratch {
    rhs: Vec<Complex64>,
    c_prime: Vec<Complex64>,
}

impl Scratch {
    fn new(n: usize) -> Self {
        Self {
            rhs: vec![Complex64::new(0.0, 0.0); n],
            c_prime: vec![Complex64::new(0.0, 0.0); n],
        }
    }

    /// One Cayley step (1 + i h H/2) ψ' = (1 − i h H/2) ψ with the compact
    /// Laplacian, H = −B⁻¹δ²/(2μΔq²) + V and B = 1 + δ²/12. Both sides are
    /// multiplied by B, which leaves tridiagonal systems; B and δ² commute,
    /// so H is symmetric and the step is unitary.
    fn step(&mut self, psi: &mut [Complex64], q: &[f64], hop: f64, pot: f64, h: f64) {
        let n = psi.len();
        let l = Complex64::new(0.0, 0.5 * h);
        let v = |j: usize| pot * q[j] * q[j];
        let diag = |j: usize| 2.0 * hop + 10.0 / 12.0 * v(j);
        let side = |k: usize| -hop + v(k) / 12.0;
        // right-hand side (B − l·A)ψ, ψ vanishing outside 1..n−1
        for j in 1..n - 1 {
            let lower = (1.0 / 12.0 - l * side(j - 1)) * psi[j - 1];
            let upper = (1.0 / 12.0 - l * side(j + 1)) * psi[j + 1];
            self.rhs[j] = (10.0 / 12.0 - l * diag(j)) * psi[j] + lower + upper;
        }
        // Thomas solve of (B + l·A)ψ' = rhs
        let mut prev_c = Complex64::new(0.0, 0.0);
        let mut prev_d = Complex64::new(0.0, 0.0);
        for j in 1..n - 1 {
            let a = 1.0 / 12.0 + l * side(j - 1);
            let b = 10.0 / 12.0 + l * diag(j);
            let c = 1.0 / 12.0 + l * side(j + 1);
            let denom = b - a * prev_c;
            prev_c = c / denom;
            prev_d = (self.rhs[j] - a * prev_d) / denom;
            self.c_prime[j] = prev_c;
            self.rhs[j] = prev_d;
        }
        psi[0] = Complex64::new(0.0, 0.0);
        psi[n - 1] = Complex64::new(0.0, 0.0);
        let mut next = Complex64::new(0.0, 0.0);
        for j in (1..n - 1).rev() {
            next = self.rhs[j] - self.c_prime[j] * next;
            psi[j] = next;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evolve::{compare, ComplexGaussian, GaussianState, Grid};

    /// Free Gaussian of width σ₀ at time t, μ = 1, centered at 0.
    fn free_gaussian(s0: f64, t: f64) -> ComplexGaussian {
        let s2 = s0 * s0;
        let st = Complex64::new(s2, 0.5 * t);
        ComplexGaussian {
            a: -0.25 / st,
            b: Complex64::new(0.0, 0.0),
            c: -0.25 * (2.0 * std::f64::consts::PI * s2).ln() + 0.5 * (s2 / st).ln(),
        }
    }

    #[test]
    fn free_gaussian_spreads_analytically() {
        let s0 = 0.5f64.sqrt();
        let grid = Grid::standard();
        let p = WavePacket::gaussian(grid, &GaussianState::new(0.0, 0.0, s0).unwrap(), 0.0)
            .unwrap();
        let out = crank_nicolson(&p, &FrequencyProfile::free(), 1.0, 1.0, 1e-3).unwrap();
        let exact = WavePacket::from_shape(grid, free_gaussian(s0, 1.0), 1.0).unwrap();
        let c = compare(&exact, &out.packet).unwrap();
        assert!(c.l2_error <= 1e-5, "{c:?}");
        assert!(out.warning.is_none());
    }

    #[test]
    fn norm_is_conserved() {
        let p = WavePacket::gaussian(
            Grid::standard(),
            &GaussianState::new(1.0, 0.5, 0.7).unwrap(),
            0.0,
        )
        .unwrap();
        let profile = FrequencyProfile::Constant { omega0: 1.0 };
        let out = crank_nicolson(&p, &profile, 1.0, 1.0, 1e-3).unwrap();
        assert_eq!(out.steps, 1000);
        assert!((out.packet.norm() - 1.0).abs() <= 1e-8);
    }

    #[test]
    fn ground_state_is_stationary() {
        let s = (0.5f64).sqrt();
        let p = WavePacket::gaussian(Grid::standard(), &GaussianState::new(0.0, 0.0, s).unwrap(), 0.0)
            .unwrap();
        let profile = FrequencyProfile::Constant { omega0: 1.0 };
        let period = 2.0 * std::f64::consts::PI;
        let out = crank_nicolson(&p, &profile, 1.0, period, 1e-3).unwrap();
        let density = |w: &WavePacket| {
            WavePacket::new(
                *w.grid(),
                w.psi().iter().map(|z| Complex64::new(z.norm_sqr(), 0.0)).collect(),
                0.0,
            )
            .unwrap()
        };
        let c = compare(&density(&p), &density(&out.packet)).unwrap();
        assert!(c.l2_error <= 1e-6, "{c:?}");
    }

    #[test]
    fn warning_for_large_steps() {
        let p = WavePacket::gaussian(Grid::standard(), &GaussianState::new(0.0, 0.0, 1.0).unwrap(), 0.0)
            .unwrap();
        let profile = FrequencyProfile::Constant { omega0: 1.0 };
        let out = crank_nicolson(&p, &profile, 1.0, 0.1, 1e-2).unwrap();
        assert!(out.warning.is_some());
    }
}
