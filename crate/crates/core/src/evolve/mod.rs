//! Wavepacket propagation through the kernel, plus two independent oracles:
//! a Crank–Nicolson grid solver and a time-sliced path integral.

mod apply;
mod cn;
mod sliced;

pub use apply::{propagate_kernel, propagate_with_kernel, MAX_CELL_CHIRP};
pub use cn::{crank_nicolson, CnOutput, StabilityWarning};
pub use sliced::time_sliced_oracle;

use std::f64::consts::PI;
use std::fmt::Write as _;

use num_complex::Complex64;
use serde::Serialize;
use thiserror::Error;

use crate::classical::ClassicalError;
use crate::io::fmt_f64;
use crate::kernel::KernelError;

pub const MIN_POINTS: usize = 16;
/// |ψ| at the grid edges must stay below this fraction of max |ψ|.
pub const EDGE_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvolveError {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("grid too narrow: |psi| = {edge:e} at the edge (relative to its maximum)")]
    GridTooNarrow { edge: f64 },
    #[error("grid too coarse for the kernel chirp: |a|·dq²/4 = {chirp:.3e} > {limit}")]
    GridTooCoarse { chirp: f64, limit: f64 },
    #[error("grids differ")]
    GridMismatch,
    #[error(transparent)]
    Kernel(#[from] KernelError),
    #[error(transparent)]
    Classical(#[from] ClassicalError),
}

/// Uniform grid of `n` points on `[q_min, q_max]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Grid {
    pub q_min: f64,
    pub q_max: f64,
    pub n: usize,
}

impl Grid {
    pub fn new(q_min: f64, q_max: f64, n: usize) -> Result<Self, EvolveError> {
        if n < MIN_POINTS {
            return Err(EvolveError::InvalidInput(format!(
                "need at least {MIN_POINTS} grid points, got {n}"
            )));
        }
        if !(q_min.is_finite() && q_max.is_finite() && q_max > q_min) {
            return Err(EvolveError::InvalidInput(format!(
                "bad grid bounds [{q_min}, {q_max}]"
            )));
        }
        Ok(Self { q_min, q_max, n })
    }

    /// Desk-scale default: 2048 points on [−20, 20].
    pub fn standard() -> Self {
        Self {
            q_min: -20.0,
            q_max: 20.0,
            n: 2048,
        }
    }

    pub fn dq(&self) -> f64 {
        (self.q_max - self.q_min) / (self.n - 1) as f64
    }

    pub fn point(&self, j: usize) -> f64 {
        self.q_min + self.dq() * j as f64
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.n).map(|j| self.point(j)).collect()
    }
}

/// Trapezoidal ∫ over the grid of the sampled values.
fn trapezoid<T>(grid: &Grid, values: impl ExactSizeIterator<Item = T>) -> T
where
    T: std::ops::Add<Output = T> + std::ops::Mul<f64, Output = T> + Default,
{
    let n = values.len();
    let mut sum = T::default();
    for (j, v) in values.enumerate() {
        let w = if j == 0 || j + 1 == n { 0.5 } else { 1.0 };
        sum = sum + v * w;
    }
    sum * grid.dq()
}

/// ψ(q) = exp(a q² + b q + c) with Re a < 0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComplexGaussian {
    pub a: Complex64,
    pub b: Complex64,
    pub c: Complex64,
}

impl ComplexGaussian {
    pub fn eval(&self, q: f64) -> Complex64 {
        (self.a * q * q + self.b * q + self.c).exp()
    }
}

/// (2πσ²)^{−1/4} exp(−(q−q̄)²/(4σ²) + i k̄ q).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianState {
    pub center: f64,
    pub momentum: f64,
    pub sigma: f64,
}

impl GaussianState {
    pub fn new(center: f64, momentum: f64, sigma: f64) -> Result<Self, EvolveError> {
        if !(sigma > 0.0 && sigma.is_finite() && center.is_finite() && momentum.is_finite()) {
            return Err(EvolveError::InvalidInput(format!(
                "bad Gaussian (center {center}, momentum {momentum}, sigma {sigma})"
            )));
        }
        Ok(Self {
            center,
            momentum,
            sigma,
        })
    }

    pub fn shape(&self) -> ComplexGaussian {
        let s2 = self.sigma * self.sigma;
        ComplexGaussian {
            a: Complex64::new(-0.25 / s2, 0.0),
            b: Complex64::new(0.5 * self.center / s2, self.momentum),
            c: Complex64::new(
                -0.25 * self.center * self.center / s2 - 0.25 * (2.0 * PI * s2).ln(),
                0.0,
            ),
        }
    }
}

/// Sampled wavefunction at time `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct WavePacket {
    grid: Grid,
    psi: Vec<Complex64>,
    t: f64,
    norm: f64,
    shape: Option<ComplexGaussian>,
}

impl WavePacket {
    pub fn new(grid: Grid, psi: Vec<Complex64>, t: f64) -> Result<Self, EvolveError> {
        Self::build(grid, psi, t, None)
    }

    /// Samples a Gaussian state and remembers its closed form.
    pub fn gaussian(grid: Grid, state: &GaussianState, t: f64) -> Result<Self, EvolveError> {
        Self::from_shape(grid, state.shape(), t)
    }

    pub fn from_shape(grid: Grid, shape: ComplexGaussian, t: f64) -> Result<Self, EvolveError> {
        let psi = grid.points().into_iter().map(|q| shape.eval(q)).collect();
        Self::build(grid, psi, t, Some(shape))
    }

    pub fn from_fn(grid: Grid, t: f64, f: impl Fn(f64) -> Complex64) -> Result<Self, EvolveError> {
        let psi = grid.points().into_iter().map(f).collect();
        Self::build(grid, psi, t, None)
    }

    fn build(
        grid: Grid,
        psi: Vec<Complex64>,
        t: f64,
        shape: Option<ComplexGaussian>,
    ) -> Result<Self, EvolveError> {
        let grid = Grid::new(grid.q_min, grid.q_max, grid.n)?;
        if psi.len() != grid.n {
            return Err(EvolveError::InvalidInput(format!(
                "{} amplitudes for {} grid points",
                psi.len(),
                grid.n
            )));
        }
        if !t.is_finite() || psi.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(EvolveError::InvalidInput("non-finite amplitude or time".into()));
        }
        let norm = trapezoid(&grid, psi.iter().map(|z| z.norm_sqr())).sqrt();
        Ok(Self {
            grid,
            psi,
            t,
            norm,
            shape,
        })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn psi(&self) -> &[Complex64] {
        &self.psi
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    /// L² norm, √(Σ_trap |ψ|² Δq).
    pub fn norm(&self) -> f64 {
        self.norm
    }

    pub fn is_normalized(&self) -> bool {
        (self.norm - 1.0).abs() <= 1e-9
    }

    /// Closed form, when the packet is an exact complex Gaussian.
    pub fn shape(&self) -> Option<&ComplexGaussian> {
        self.shape.as_ref()
    }

    /// Drops the closed form so kernels are applied by quadrature.
    pub fn without_shape(mut self) -> Self {
        self.shape = None;
        self
    }

    /// ⟨q²⟩ with respect to |ψ|²/norm².
    pub fn expectation_q2(&self) -> f64 {
        let g = self.grid;
        let m = trapezoid(
            &g,
            self.psi
                .iter()
                .enumerate()
                .map(|(j, z)| g.point(j).powi(2) * z.norm_sqr()),
        );
        m / (self.norm * self.norm)
    }

    /// max(|ψ_0|, |ψ_{N−1}|) / max |ψ|.
    pub fn edge_ratio(&self) -> f64 {
        let peak = self.psi.iter().map(|z| z.norm()).fold(0.0, f64::max);
        if peak == 0.0 {
            return 0.0;
        }
        self.psi[0].norm().max(self.psi[self.grid.n - 1].norm()) / peak
    }

    pub(crate) fn check_edges(&self) -> Result<(), EvolveError> {
        let edge = self.edge_ratio();
        if edge > EDGE_TOL {
            Err(EvolveError::GridTooNarrow { edge })
        } else {
            Ok(())
        }
    }

    /// CSV snapshot: q,re_psi,im_psi,abs2.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("q,re_psi,im_psi,abs2\n");
        for (j, z) in self.psi.iter().enumerate() {
            let _ = writeln!(
                out,
                "{},{},{},{}",
                fmt_f64(self.grid.point(j)),
                fmt_f64(z.re),
                fmt_f64(z.im),
                fmt_f64(z.norm_sqr())
            );
        }
        out
    }

    pub fn metadata(&self) -> SnapshotMeta {
        SnapshotMeta {
            t: self.t,
            norm: self.norm,
            normalized: self.is_normalized(),
            grid: self.grid,
        }
    }
}

/// JSON metadata written next to a CSV snapshot.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SnapshotMeta {
    pub t: f64,
    pub norm: f64,
    pub normalized: bool,
    pub grid: Grid,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Comparison {
    pub l2_error: f64,
    pub max_error: f64,
    /// norm(ψ₂) / norm(ψ₁).
    pub norm_ratio: f64,
    /// |⟨ψ₁|ψ₂⟩|.
    pub overlap: f64,
}

pub fn compare(psi1: &WavePacket, psi2: &WavePacket) -> Result<Comparison, EvolveError> {
    if psi1.grid != psi2.grid {
        return Err(EvolveError::GridMismatch);
    }
    let g = psi1.grid;
    let pairs = || psi1.psi.iter().zip(&psi2.psi);
    let l2 = trapezoid(&g, pairs().map(|(a, b)| (a - b).norm_sqr())).sqrt();
    let max_error = pairs().map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
    let inner = trapezoid(&g, pairs().map(|(a, b)| a.conj() * b));
    Ok(Comparison {
        l2_error: l2,
        max_error,
        norm_ratio: psi2.norm / psi1.norm,
        overlap: inner.norm(),
    })
}
