//! Time-sliced path integral: `n_slices` short-time kernels of length
//! ε = (t_b − t_a)/n_slices, each the exact free kernel followed by the
//! potential phase e^{−iε(μ/2)ω²(t_j)q_j²} at the slice end t_j.
//!
//! On a uniform grid the free short-time kernel matrix is circulant, so the
//! matrix-vector product is done with FFTs (multiplication by
//! e^{−iεk²/(2μ)}). δ kicks e^{−iμsq²/2} follow the slice containing t₀.
//! The scheme is first order in ε.

use num_complex::Complex64;
use rustfft::FftPlanner;

use super::{EvolveError, WavePacket};
use crate::classical::ClassicalError;
use crate::freq_profile::{FrequencyProfile, Side};

pub fn time_sliced_oracle(
    psi_in: &WavePacket,
    profile: &FrequencyProfile,
    mass: f64,
    t_b: f64,
    n_slices: usize,
) -> Result<WavePacket, EvolveError> {
    let t_a = psi_in.t();
    if n_slices == 0 {
        return Err(EvolveError::InvalidInput("need at least one slice".into()));
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
    psi_in.check_edges()?;

    let grid = *psi_in.grid();
    let n = grid.n;
    let q = grid.points();
    let eps = (t_b - t_a) / n_slices as f64;

    let mut planner = FftPlanner::new();
    let forward = planner.plan_fft_forward(n);
    let inverse = planner.plan_fft_inverse(n);
    let period = n as f64 * grid.dq();
    let kinetic: Vec<Complex64> = (0..n)
        .map(|j| {
            let m = if j <= n / 2 { j as f64 } else { j as f64 - n as f64 };
            let k = 2.0 * std::f64::consts::PI * m / period;
            Complex64::from_polar(1.0 / n as f64, -eps * k * k / (2.0 * mass))
        })
        .collect();

    let events = profile.jump_events(t_a, t_b);
    let mut psi = psi_in.psi().to_vec();
    for j in 1..=n_slices {
        let t_prev = t_a + (j - 1) as f64 * eps;
        let t_j = if j == n_slices { t_b } else { t_a + j as f64 * eps };
        forward.process(&mut psi);
        for (z, k) in psi.iter_mut().zip(&kinetic) {
            *z *= k;
        }
        inverse.process(&mut psi);
        let w2 = profile
            .smooth_omega_squared(t_j, Side::Left)
            .map_err(ClassicalError::from)?;
        let mut phase = eps * 0.5 * mass * w2;
        for e in events.iter().filter(|e| t_prev < e.time && e.time <= t_j) {
            phase += 0.5 * mass * e.strength;
        }
        if phase != 0.0 {
            for (z, &x) in psi.iter_mut().zip(&q) {
                *z *= Complex64::from_polar(1.0, -phase * x * x);
            }
        }
    }
    WavePacket::new(grid, psi, t_b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evolve::{compare, propagate_kernel, GaussianState, Grid};

    fn start() -> WavePacket {
        WavePacket::gaussian(
            Grid::standard(),
            &GaussianState::new(0.0, 0.0, 0.5f64.sqrt()).unwrap(),
            0.0,
        )
        .unwrap()
    }

    #[test]
    fn single_free_slice_is_the_free_kernel() {
        let p = start();
        let free = FrequencyProfile::free();
        let sliced = time_sliced_oracle(&p, &free, 1.0, 1.0, 1).unwrap();
        let exact = propagate_kernel(&p, &free, 1.0, 1.0).unwrap();
        assert!(compare(&exact, &sliced).unwrap().l2_error < 1e-12);
    }

    #[test]
    fn first_order_convergence() {
        let p = start();
        let profile = FrequencyProfile::Constant { omega0: 1.0 };
        let exact = propagate_kernel(&p, &profile, 1.0, 0.5).unwrap();
        let e64 = compare(&exact, &time_sliced_oracle(&p, &profile, 1.0, 0.5, 64).unwrap())
            .unwrap()
            .l2_error;
        let e128 = compare(&exact, &time_sliced_oracle(&p, &profile, 1.0, 0.5, 128).unwrap())
            .unwrap()
            .l2_error;
        let ratio = e64 / e128;
        assert!((ratio - 2.0).abs() <= 0.4, "{e64} {e128}");
    }

    #[test]
    fn unitary() {
        let p = start();
        let profile = FrequencyProfile::DeltaPulse {
            omega0: 1.0,
            t0: 0.5,
        };
        let out = time_sliced_oracle(&p, &profile, 1.0, 1.0, 50).unwrap();
        assert!((out.norm() - 1.0).abs() < 1e-12);
    }
}
