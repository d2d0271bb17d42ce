//! The propagator of the time-dependent oscillator, ħ = 1.
//!
//! Two assembly paths produce the same complex Gaussian in (q_a, q_b):
//!
//! * literal: from any nonvanishing solution f with W = ∫ dt/f²,
//!   K = √(μ/(2πi f_a f_b W)) exp{i(μ/2)(ḟ_b/f_b q_b² − ḟ_a/f_a q_a²)}
//!   · exp{i μ/(2W) (q_b/f_b − q_a/f_a)²};
//! * robust: from the fundamental pair,
//!   K = √(μ/(2πi v_b)) exp{i μ/(2v_b) (v̇_b q_b² + u_b q_a² − 2 q_a q_b)}.
//!
//! The robust form is the literal one with f = u (see `docs/derivation.md`);
//! it only fails where v_b = 0. On the literal path f_a f_b W = v_b, so the
//! prefactor argument is positive whenever f is zero-free on the window.
//! When v_b < 0 (past a caustic) the principal branch is used and the value
//! is flagged instead of tracking Maslov phases.

use std::f64::consts::{FRAC_PI_4, PI};
use std::fmt::Write as _;

use num_complex::Complex64;
use thiserror::Error;

use crate::classical::{self, ClassicalError, ClassicalSolution, FundamentalPair};
use crate::freq_profile::{FrequencyProfile, Side};
use crate::io::fmt_f64;
use crate::quadrature;

/// Relative tolerance for W.
pub const W_REL_TOL: f64 = 1e-10;
/// |v_b| below this times (t_b − t_a) is an endpoint caustic.
pub const CAUSTIC_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum KernelError {
    #[error("invalid kernel request: {0}")]
    InvalidRequest(String),
    #[error("classical solution vanishes in the window near t = {t_zero}")]
    CausticInWindow { t_zero: f64 },
    #[error("caustic at the endpoint t_b = {t_b} (v_b = {v_b:e})")]
    CausticAtEndpoint { t_b: f64, v_b: f64 },
    #[error("solution does not match the profile: {0}")]
    SolutionMismatch(String),
    #[error("quadrature of 1/f^2 failed: {0}")]
    Quadrature(String),
    #[error(transparent)]
    Classical(#[from] ClassicalError),
}

/// Endpoints and mass of one kernel evaluation.
#[derive(Debug, Clone, Copy)]
pub struct KernelRequest<'p> {
    pub mass: f64,
    pub profile: &'p FrequencyProfile,
    pub q_a: f64,
    pub t_a: f64,
    pub q_b: f64,
    pub t_b: f64,
}

impl KernelRequest<'_> {
    pub fn validate(&self) -> Result<(), KernelError> {
        let finite = [self.mass, self.q_a, self.t_a, self.q_b, self.t_b]
            .iter()
            .all(|x| x.is_finite());
        if !finite {
            return Err(KernelError::InvalidRequest("non-finite input".into()));
        }
        if !(self.mass > 0.0) {
            return Err(KernelError::InvalidRequest(format!(
                "mass must be positive, got {}",
                self.mass
            )));
        }
        if !(self.t_b > self.t_a) {
            return Err(KernelError::InvalidRequest(format!(
                "need t_b > t_a, got [{}, {}]",
                self.t_a, self.t_b
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CausticFlag {
    #[default]
    Clear,
    /// v has a zero in (t_a, t_b); the principal branch is returned without Maslov phases.
    PostCausticBranchUnverified,
}

impl CausticFlag {
    pub fn as_str(&self) -> &'static str {
        match self {
            CausticFlag::Clear => "none",
            CausticFlag::PostCausticBranchUnverified => "post_caustic_branch_unverified",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum KernelDiagnostics {
    Literal {
        f_a: f64,
        f_b: f64,
        fdot_a: f64,
        fdot_b: f64,
        w: f64,
    },
    Robust {
        u_b: f64,
        udot_b: f64,
        v_b: f64,
        vdot_b: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelValue {
    pub value: Complex64,
    pub modulus: f64,
    /// Unwrapped: prefactor phase plus the classical action.
    pub phase: f64,
    pub caustic: CausticFlag,
    pub diagnostics: KernelDiagnostics,
}

/// The kernel at fixed (t_a, t_b) as a function of (q_a, q_b):
/// `modulus · exp(i(phase₀ + a q_a² + b q_b² + c q_a q_b))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianKernel {
    mass: f64,
    t_a: f64,
    t_b: f64,
    modulus: f64,
    prefactor_phase: f64,
    caustic: CausticFlag,
    diagnostics: KernelDiagnostics,
}

/// √(μ/(2πi D)) as (modulus, phase) with √(1/i) = e^{−iπ/4}; principal branch for D < 0.
fn prefactor(mass: f64, d: f64) -> (f64, f64) {
    let modulus = (mass / (2.0 * PI * d.abs())).sqrt();
    let phase = if d > 0.0 { -FRAC_PI_4 } else { FRAC_PI_4 };
    (modulus, phase)
}

impl GaussianKernel {
    /// Robust assembly from the fundamental pair at `t_b`.
    pub fn robust(mass: f64, pair: &FundamentalPair, t_b: f64) -> Result<Self, KernelError> {
        let t_a = pair.t_a();
        if !(mass > 0.0 && mass.is_finite()) {
            return Err(KernelError::InvalidRequest(format!("mass must be positive, got {mass}")));
        }
        if !(t_b > t_a) {
            return Err(KernelError::InvalidRequest(format!("need t_b > t_a = {t_a}, got {t_b}")));
        }
        let s = pair.state_side(t_b, Side::Left)?;
        if s.v.abs() < CAUSTIC_TOL * (t_b - t_a) {
            return Err(KernelError::CausticAtEndpoint { t_b, v_b: s.v });
        }
        let crossed = s.v < 0.0 || pair.v_zeros()?.iter().any(|&z| z < t_b);
        let (modulus, prefactor_phase) = prefactor(mass, s.v);
        Ok(Self {
            mass,
            t_a,
            t_b,
            modulus,
            prefactor_phase,
            caustic: if crossed {
                CausticFlag::PostCausticBranchUnverified
            } else {
                CausticFlag::Clear
            },
            diagnostics: KernelDiagnostics::Robust {
                u_b: s.u,
                udot_b: s.udot,
                v_b: s.v,
                vdot_b: s.vdot,
            },
        })
    }

    /// Literal assembly from a solution `f` that has no zero on `[t_a, t_b]`.
    pub fn literal<S: ClassicalSolution + ?Sized>(
        mass: f64,
        profile: &FrequencyProfile,
        f: &S,
        t_a: f64,
        t_b: f64,
    ) -> Result<Self, KernelError> {
        if !(mass > 0.0 && mass.is_finite()) {
            return Err(KernelError::InvalidRequest(format!("mass must be positive, got {mass}")));
        }
        if !(t_b > t_a) {
            return Err(KernelError::InvalidRequest(format!("need t_b > t_a, got [{t_a}, {t_b}]")));
        }
        if let Some(reason) = f.mismatch() {
            return Err(KernelError::SolutionMismatch(reason));
        }
        check_residual(profile, f, t_a, t_b)?;
        let w = compute_w(f, t_a, t_b)?;
        let f_a = f.value(t_a)?;
        let f_b = f.value(t_b)?;
        let fdot_a = f.derivative(t_a, Side::Right)?;
        let fdot_b = f.derivative(t_b, Side::Left)?;
        let (modulus, prefactor_phase) = prefactor(mass, f_a * f_b * w);
        Ok(Self {
            mass,
            t_a,
            t_b,
            modulus,
            prefactor_phase,
            caustic: CausticFlag::Clear,
            diagnostics: KernelDiagnostics::Literal {
                f_a,
                f_b,
                fdot_a,
                fdot_b,
                w,
            },
        })
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    pub fn window(&self) -> (f64, f64) {
        (self.t_a, self.t_b)
    }

    pub fn modulus(&self) -> f64 {
        self.modulus
    }

    pub fn prefactor_phase(&self) -> f64 {
        self.prefactor_phase
    }

    pub fn caustic(&self) -> CausticFlag {
        self.caustic
    }

    pub fn diagnostics(&self) -> KernelDiagnostics {
        self.diagnostics
    }

    /// (a, b, c) with action a q_a² + b q_b² + c q_a q_b.
    pub fn coefficients(&self) -> (f64, f64, f64) {
        let m = self.mass;
        match self.diagnostics {
            KernelDiagnostics::Robust { u_b, v_b, vdot_b, .. } => {
                let k = m / (2.0 * v_b);
                (k * u_b, k * vdot_b, -2.0 * k)
            }
            KernelDiagnostics::Literal {
                f_a,
                f_b,
                fdot_a,
                fdot_b,
                w,
            } => (
                0.5 * m * (1.0 / (w * f_a * f_a) - fdot_a / f_a),
                0.5 * m * (1.0 / (w * f_b * f_b) + fdot_b / f_b),
                -m / (w * f_a * f_b),
            ),
        }
    }

    /// Classical action S(q_a, q_b), evaluated in the form of the assembly path.
    pub fn action(&self, q_a: f64, q_b: f64) -> f64 {
        let m = self.mass;
        match self.diagnostics {
            KernelDiagnostics::Robust { u_b, v_b, vdot_b, .. } => {
                m / (2.0 * v_b) * (vdot_b * q_b * q_b + u_b * q_a * q_a - 2.0 * q_a * q_b)
            }
            KernelDiagnostics::Literal {
                f_a,
                f_b,
                fdot_a,
                fdot_b,
                w,
            } => {
                let d = q_b / f_b - q_a / f_a;
                0.5 * m * (fdot_b / f_b * q_b * q_b - fdot_a / f_a * q_a * q_a)
                    + m / (2.0 * w) * d * d
            }
        }
    }

    pub fn eval(&self, q_a: f64, q_b: f64) -> KernelValue {
        let phase = self.prefactor_phase + self.action(q_a, q_b);
        KernelValue {
            value: Complex64::from_polar(self.modulus, phase),
            modulus: self.modulus,
            phase,
            caustic: self.caustic,
            diagnostics: self.diagnostics,
        }
    }
}

/// W = ∫ dt/f² over `[t_a, t_b]`, after checking that f has no zero there.
pub fn compute_w<S: ClassicalSolution + ?Sized>(
    f: &S,
    t_a: f64,
    t_b: f64,
) -> Result<f64, KernelError> {
    if let Some(t_zero) = classical::first_zero(f, t_a, t_b)? {
        return Err(KernelError::CausticInWindow { t_zero });
    }
    let breaks = f.sample_nodes();
    let r = quadrature::integrate(
        |t| f.value(t).map(|v| 1.0 / (v * v)),
        t_a,
        t_b,
        &breaks,
        W_REL_TOL,
        0.0,
    )
    .map_err(|e| KernelError::Quadrature(e.to_string()))?;
    Ok(r.value)
}

/// Cheap second-difference residual of f at a few interior points.
fn check_residual<S: ClassicalSolution + ?Sized>(
    profile: &FrequencyProfile,
    f: &S,
    t_a: f64,
    t_b: f64,
) -> Result<(), KernelError> {
    let span = t_b - t_a;
    let h = 1e-2 * span;
    let avoid: Vec<f64> = profile
        .jump_events(t_a - span, t_b + span)
        .iter()
        .map(|e| e.time)
        .chain(profile.step_times(t_a - span, t_b + span))
        .collect();
    for i in 1..8 {
        let t = t_a + span * i as f64 / 8.0;
        if avoid.iter().any(|s| (t - s).abs() <= 2.0 * h) {
            continue;
        }
        let f0 = f.value(t)?;
        let fdd = (f.value(t + h)? - 2.0 * f0 + f.value(t - h)?) / (h * h);
        let w2 = profile.smooth_omega_squared(t, Side::Right).map_err(ClassicalError::from)?;
        let residual = (fdd + w2 * f0).abs();
        let allowed = 1e-2 * f0.abs().max(1.0) * (1.0 + w2.abs()).powi(2);
        if !(residual <= allowed) {
            return Err(KernelError::SolutionMismatch(format!(
                "residual {residual:.3e} at t = {t} exceeds {allowed:.3e}"
            )));
        }
    }
    Ok(())
}

/// Kernel from a classical solution `f`, assembled literally.
pub fn kernel_eq17<S: ClassicalSolution + ?Sized>(
    request: &KernelRequest<'_>,
    f: &S,
) -> Result<KernelValue, KernelError> {
    request.validate()?;
    let k = GaussianKernel::literal(request.mass, request.profile, f, request.t_a, request.t_b)?;
    Ok(k.eval(request.q_a, request.q_b))
}

/// Kernel from the fundamental pair. The pair must start at `request.t_a`.
pub fn kernel_robust(
    request: &KernelRequest<'_>,
    pair: &FundamentalPair,
) -> Result<KernelValue, KernelError> {
    request.validate()?;
    if pair.t_a() != request.t_a {
        return Err(KernelError::InvalidRequest(format!(
            "pair starts at {}, request at {}",
            pair.t_a(),
            request.t_a
        )));
    }
    let k = GaussianKernel::robust(request.mass, pair, request.t_b)?;
    Ok(k.eval(request.q_a, request.q_b))
}

/// Solves the pair and evaluates the robust kernel.
pub fn kernel(request: &KernelRequest<'_>) -> Result<KernelValue, KernelError> {
    request.validate()?;
    let pair = classical::solve_fundamental(
        request.profile,
        request.t_a,
        request.t_b,
        classical::DEFAULT_TOL,
    )?;
    kernel_robust(request, &pair)
}

/// |i ∂K/∂t_b + K_qq/(2μ) − (μ/2) ω²(t_b) q_b² K| / |K| by central differences.
pub fn schrodinger_residual(
    request: &KernelRequest<'_>,
    h_q: f64,
    h_t: f64,
) -> Result<f64, KernelError> {
    request.validate()?;
    if !(h_q > 0.0 && h_t > 0.0 && h_t < request.t_b - request.t_a) {
        return Err(KernelError::InvalidRequest(format!("bad steps h_q = {h_q}, h_t = {h_t}")));
    }
    let profile = request.profile;
    let (t_lo, t_hi) = (request.t_b - h_t, request.t_b + h_t);
    if !profile.jump_events(t_lo - h_t, t_hi + h_t).is_empty() {
        return Err(KernelError::InvalidRequest(
            "δ event inside the time stencil".into(),
        ));
    }
    let pair = classical::solve_fundamental(profile, request.t_a, t_hi + h_t, 1e-12)?;
    let at = |t: f64| GaussianKernel::robust(request.mass, &pair, t);
    let (k_lo, k_mid, k_hi) = (at(t_lo)?, at(request.t_b)?, at(t_hi)?);
    let (qa, qb) = (request.q_a, request.q_b);
    let k0 = k_mid.eval(qa, qb).value;
    let dt = (k_hi.eval(qa, qb).value - k_lo.eval(qa, qb).value) / (2.0 * h_t);
    let dqq = (k_mid.eval(qa, qb + h_q).value - 2.0 * k0 + k_mid.eval(qa, qb - h_q).value)
        / (h_q * h_q);
    let w2 = profile
        .omega_squared_at(request.t_b)
        .map_err(ClassicalError::from)?;
    let m = request.mass;
    let r = Complex64::i() * dt + dqq / (2.0 * m) - 0.5 * m * w2 * qb * qb * k0;
    Ok(r.norm() / k0.norm())
}

pub const KERNEL_CSV_HEADER: &str = "q_a,t_a,q_b,t_b,re_K,im_K,abs_K,phase,caustic_flag";

/// One CSV row for a kernel value.
pub fn csv_row(q_a: f64, t_a: f64, q_b: f64, t_b: f64, k: &KernelValue) -> String {
    let mut row = String::new();
    for x in [q_a, t_a, q_b, t_b, k.value.re, k.value.im, k.modulus, k.phase] {
        let _ = write!(row, "{},", fmt_f64(x));
    }
    row.push_str(k.caustic.as_str());
    row
}
