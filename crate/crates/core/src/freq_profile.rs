//! Time-dependent frequency profiles ω²(t).
//!
//! Smooth and step parts are evaluated pointwise; δ pulses are never
//! evaluated, they are exposed as [`JumpEvent`]s so integrators can apply
//! the exact derivative jump.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::omega_expr::{self, ExprError, ExprNode};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ProfileError {
    #[error("t = {t} outside the profile domain ({reason})")]
    Domain { t: f64, reason: &'static str },
    #[error("ω² evaluated exactly at the impulse time t = {0}")]
    EvalAtImpulse(f64),
    #[error("invalid profile: {0}")]
    Invalid(String),
    #[error(transparent)]
    Expression(#[from] ExprError),
}

/// Interpolation order for tabulated profiles.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Interp {
    Linear,
    #[default]
    Cubic,
}

/// Which one-sided limit to take at a step discontinuity.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

/// An impulsive term `s·δ(t − t₀)` in ω²(t). Integrating f̈ + ω²f = 0 across
/// it leaves f continuous and changes ḟ by `−s·f(t₀)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JumpEvent {
    pub time: f64,
    pub strength: f64,
}

impl JumpEvent {
    /// Derivative after the kick given the value and derivative before it.
    pub fn apply(&self, value: f64, derivative: f64) -> f64 {
        derivative - self.strength * value
    }
}

/// Natural cubic spline (or linear interpolant) through tabulated ω² samples.
#[derive(Debug, Clone, PartialEq)]
pub struct Tabulated {
    times: Vec<f64>,
    values: Vec<f64>,
    interp: Interp,
    /// Second derivatives at the nodes (empty for linear interpolation).
    second: Vec<f64>,
}

impl Tabulated {
    pub fn new(times: Vec<f64>, values: Vec<f64>, interp: Interp) -> Result<Self, ProfileError> {
        if times.len() < 2 {
            return Err(ProfileError::Invalid(
                "tabulated profile needs at least 2 points".into(),
            ));
        }
        if times.len() != values.len() {
            return Err(ProfileError::Invalid(format!(
                "tabulated profile has {} times but {} samples",
                times.len(),
                values.len()
            )));
        }
        if times.iter().chain(&values).any(|x| !x.is_finite()) {
            return Err(ProfileError::Invalid("tabulated data must be finite".into()));
        }
        if times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(ProfileError::Invalid(
                "tabulated time grid must be strictly increasing".into(),
            ));
        }
        let second = match interp {
            Interp::Linear => Vec::new(),
            Interp::Cubic => natural_spline_second_derivatives(&times, &values),
        };
        Ok(Self {
            times,
            values,
            interp,
            second,
        })
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn interp(&self) -> Interp {
        self.interp
    }

    fn eval(&self, t: f64) -> Result<f64, ProfileError> {
        let (first, last) = (self.times[0], *self.times.last().unwrap());
        if !(first..=last).contains(&t) {
            return Err(ProfileError::Domain {
                t,
                reason: "outside tabulated range",
            });
        }
        // index of the interval [t_i, t_{i+1}] containing t
        let i = match self.times.binary_search_by(|x| x.total_cmp(&t)) {
            Ok(i) => return Ok(self.values[i]),
            Err(i) => i - 1,
        };
        let (t0, t1) = (self.times[i], self.times[i + 1]);
        let (y0, y1) = (self.values[i], self.values[i + 1]);
        let h = t1 - t0;
        let a = (t1 - t) / h;
        let b = (t - t0) / h;
        let linear = a * y0 + b * y1;
        Ok(match self.interp {
            Interp::Linear => linear,
            Interp::Cubic => {
                let (m0, m1) = (self.second[i], self.second[i + 1]);
                linear + ((a * a * a - a) * m0 + (b * b * b - b) * m1) * h * h / 6.0
            }
        })
    }
}

fn natural_spline_second_derivatives(x: &[f64], y: &[f64]) -> Vec<f64> {
    let n = x.len();
    let mut m = vec![0.0; n];
    if n < 3 {
        return m;
    }
    // tridiagonal system for interior second derivatives, Thomas algorithm
    let mut diag = vec![0.0; n];
    let mut rhs = vec![0.0; n];
    let mut upper = vec![0.0; n];
    for i in 1..n - 1 {
        let h0 = x[i] - x[i - 1];
        let h1 = x[i + 1] - x[i];
        let lower = h0 / 6.0;
        diag[i] = (h0 + h1) / 3.0;
        upper[i] = h1 / 6.0;
        rhs[i] = (y[i + 1] - y[i]) / h1 - (y[i] - y[i - 1]) / h0;
        if i > 1 {
            let w = lower / diag[i - 1];
            diag[i] -= w * upper[i - 1];
            rhs[i] -= w * rhs[i - 1];
        }
    }
    for i in (1..n - 1).rev() {
        m[i] = (rhs[i] - upper[i] * m[i + 1]) / diag[i];
    }
    m
}

/// An ω²(t) expression together with its source, for serialization.
#[derive(Debug, Clone, PartialEq)]
pub struct ExprProfile {
    pub source: String,
    pub constants: BTreeMap<String, f64>,
    pub ast: ExprNode,
}

impl ExprProfile {
    pub fn new(source: &str, constants: BTreeMap<String, f64>) -> Result<Self, ProfileError> {
        let ast = omega_expr::parse(source, &constants)?;
        Ok(Self {
            source: source.to_string(),
            constants,
            ast,
        })
    }
}

/// ω²(t) for the oscillator `H = p²/2μ + μω²(t)q²/2`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ProfileSpec", into = "ProfileSpec")]
pub enum FrequencyProfile {
    /// ω² = ω₀².
    Constant { omega0: f64 },
    /// ω² = ω₀² e^{−αt}.
    ExpDecay { omega0: f64, alpha: f64 },
    /// ω² = (ω₀ α^β)² t^β, β > −2.
    PowerLaw { omega0: f64, alpha: f64, beta: f64 },
    /// ω² = ω₀² δ(t − t₀) + ω₀⁴ θ(t − t₀).
    DeltaPulse { omega0: f64, t0: f64 },
    /// ω² = α² / cosh²(β(t − t₀)).
    SechSquared { alpha: f64, beta: f64, t0: f64 },
    Tabulated(Tabulated),
    Expression(ExprProfile),
}

impl FrequencyProfile {
    /// ω² ≡ 0.
    pub fn free() -> Self {
        FrequencyProfile::Constant { omega0: 0.0 }
    }

    pub fn expression(source: &str) -> Result<Self, ProfileError> {
        Ok(FrequencyProfile::Expression(ExprProfile::new(
            source,
            BTreeMap::new(),
        )?))
    }

    pub fn tabulated(times: Vec<f64>, values: Vec<f64>, interp: Interp) -> Result<Self, ProfileError> {
        Ok(FrequencyProfile::Tabulated(Tabulated::new(times, values, interp)?))
    }

    pub fn kind(&self) -> &'static str {
        match self {
            FrequencyProfile::Constant { .. } => "constant",
            FrequencyProfile::ExpDecay { .. } => "exp_decay",
            FrequencyProfile::PowerLaw { .. } => "power_law",
            FrequencyProfile::DeltaPulse { .. } => "delta_pulse",
            FrequencyProfile::SechSquared { .. } => "sech_squared",
            FrequencyProfile::Tabulated(_) => "tabulated",
            FrequencyProfile::Expression(_) => "expression",
        }
    }

    fn validate(&self) -> Result<(), ProfileError> {
        let finite = |name: &str, x: f64| {
            if x.is_finite() {
                Ok(())
            } else {
                Err(ProfileError::Invalid(format!("{name} must be finite")))
            }
        };
        match *self {
            FrequencyProfile::Constant { omega0 } => finite("omega0", omega0),
            FrequencyProfile::ExpDecay { omega0, alpha } => {
                finite("omega0", omega0)?;
                finite("alpha", alpha)
            }
            FrequencyProfile::PowerLaw { omega0, alpha, beta } => {
                finite("omega0", omega0)?;
                finite("alpha", alpha)?;
                finite("beta", beta)?;
                if beta <= -2.0 {
                    return Err(ProfileError::Invalid("power_law requires beta > -2".into()));
                }
                if alpha < 0.0 && beta.fract() != 0.0 {
                    return Err(ProfileError::Invalid(
                        "power_law with non-integer beta requires alpha >= 0".into(),
                    ));
                }
                Ok(())
            }
            FrequencyProfile::DeltaPulse { omega0, t0 } => {
                finite("omega0", omega0)?;
                finite("t0", t0)
            }
            FrequencyProfile::SechSquared { alpha, beta, t0 } => {
                finite("alpha", alpha)?;
                finite("beta", beta)?;
                finite("t0", t0)
            }
            FrequencyProfile::Tabulated(_) | FrequencyProfile::Expression(_) => Ok(()),
        }
    }

    /// Smooth plus step part of ω²(t). Errors if `t` is exactly an impulse time.
    pub fn omega_squared_at(&self, t: f64) -> Result<f64, ProfileError> {
        if let FrequencyProfile::DeltaPulse { t0, .. } = *self {
            if t == t0 {
                return Err(ProfileError::EvalAtImpulse(t));
            }
        }
        self.smooth_omega_squared(t, Side::Right)
    }

    /// Smooth plus step part of ω²(t) with the given one-sided limit at steps.
    /// Impulses are ignored; θ(0) = 1 for [`Side::Right`].
    pub fn smooth_omega_squared(&self, t: f64, side: Side) -> Result<f64, ProfileError> {
        if !t.is_finite() {
            return Err(ProfileError::Domain {
                t,
                reason: "non-finite time",
            });
        }
        Ok(match self {
            FrequencyProfile::Constant { omega0 } => omega0 * omega0,
            FrequencyProfile::ExpDecay { omega0, alpha } => omega0 * omega0 * (-alpha * t).exp(),
            FrequencyProfile::PowerLaw { omega0, alpha, beta } => {
                let integer = beta.fract() == 0.0;
                if t < 0.0 && !integer {
                    return Err(ProfileError::Domain {
                        t,
                        reason: "non-integer power law needs t >= 0",
                    });
                }
                if t == 0.0 && *beta < 0.0 {
                    return Err(ProfileError::Domain {
                        t,
                        reason: "negative power law is singular at t = 0",
                    });
                }
                let scale = omega0 * alpha.powf(*beta);
                let tp = if integer { t.powi(*beta as i32) } else { t.powf(*beta) };
                scale * scale * tp
            }
            FrequencyProfile::DeltaPulse { omega0, t0 } => {
                let on = match side {
                    Side::Right => t >= *t0,
                    Side::Left => t > *t0,
                };
                if on {
                    omega0.powi(4)
                } else {
                    0.0
                }
            }
            FrequencyProfile::SechSquared { alpha, beta, t0 } => {
                let c = (beta * (t - t0)).cosh();
                alpha * alpha / (c * c)
            }
            FrequencyProfile::Tabulated(table) => table.eval(t)?,
            FrequencyProfile::Expression(e) => e.ast.eval(t)?,
        })
    }

    /// δ events strictly inside `(t_a, t_b)`, sorted by time.
    pub fn jump_events(&self, t_a: f64, t_b: f64) -> Vec<JumpEvent> {
        match *self {
            FrequencyProfile::DeltaPulse { omega0, t0 } if t_a < t0 && t0 < t_b => {
                vec![JumpEvent {
                    time: t0,
                    strength: omega0 * omega0,
                }]
            }
            _ => Vec::new(),
        }
    }

    /// Times where the smooth part has a jump (θ steps), strictly inside the window.
    pub fn step_times(&self, t_a: f64, t_b: f64) -> Vec<f64> {
        match *self {
            FrequencyProfile::DeltaPulse { t0, .. } if t_a < t0 && t0 < t_b => vec![t0],
            _ => Vec::new(),
        }
    }

    /// Checks that every point of `[t_a, t_b]` is evaluable.
    pub fn check_window(&self, t_a: f64, t_b: f64) -> Result<(), ProfileError> {
        match self {
            FrequencyProfile::PowerLaw { beta, .. } => {
                if beta.fract() != 0.0 && t_a < 0.0 {
                    return Err(ProfileError::Domain {
                        t: t_a,
                        reason: "non-integer power law needs t >= 0",
                    });
                }
                if *beta < 0.0 && t_a <= 0.0 && t_b >= 0.0 {
                    return Err(ProfileError::Domain {
                        t: 0.0,
                        reason: "negative power law is singular at t = 0",
                    });
                }
                Ok(())
            }
            FrequencyProfile::Tabulated(table) => {
                table.eval(t_a)?;
                table.eval(t_b)?;
                Ok(())
            }
            _ => {
                self.smooth_omega_squared(t_a, Side::Right)?;
                self.smooth_omega_squared(t_b, Side::Left)?;
                Ok(())
            }
        }
    }
}

impl fmt::Display for FrequencyProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FrequencyProfile::Constant { omega0 } => write!(f, "constant(omega0={omega0})"),
            FrequencyProfile::ExpDecay { omega0, alpha } => {
                write!(f, "exp_decay(omega0={omega0}, alpha={alpha})")
            }
            FrequencyProfile::PowerLaw { omega0, alpha, beta } => {
                write!(f, "power_law(omega0={omega0}, alpha={alpha}, beta={beta})")
            }
            FrequencyProfile::DeltaPulse { omega0, t0 } => {
                write!(f, "delta_pulse(omega0={omega0}, t0={t0})")
            }
            FrequencyProfile::SechSquared { alpha, beta, t0 } => {
                write!(f, "sech_squared(alpha={alpha}, beta={beta}, t0={t0})")
            }
            FrequencyProfile::Tabulated(t) => write!(f, "tabulated({} points)", t.times.len()),
            FrequencyProfile::Expression(e) => write!(f, "expression({})", e.source),
        }
    }
}

/// Wire format of a profile, e.g. `{"type": "exp_decay", "omega0": 1.0, "alpha": 0.5}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum ProfileSpec {
    Constant {
        omega0: f64,
    },
    ExpDecay {
        omega0: f64,
        alpha: f64,
    },
    PowerLaw {
        omega0: f64,
        alpha: f64,
        beta: f64,
    },
    DeltaPulse {
        omega0: f64,
        t0: f64,
    },
    SechSquared {
        alpha: f64,
        beta: f64,
        #[serde(default)]
        t0: f64,
    },
    Tabulated {
        t: Vec<f64>,
        omega2: Vec<f64>,
        #[serde(default)]
        interp: Interp,
    },
    Expression {
        expr: String,
        #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
        constants: BTreeMap<String, f64>,
    },
}

impl TryFrom<ProfileSpec> for FrequencyProfile {
    type Error = ProfileError;

    fn try_from(spec: ProfileSpec) -> Result<Self, Self::Error> {
        let profile = match spec {
            ProfileSpec::Constant { omega0 } => FrequencyProfile::Constant { omega0 },
            ProfileSpec::ExpDecay { omega0, alpha } => FrequencyProfile::ExpDecay { omega0, alpha },
            ProfileSpec::PowerLaw { omega0, alpha, beta } => {
                FrequencyProfile::PowerLaw { omega0, alpha, beta }
            }
            ProfileSpec::DeltaPulse { omega0, t0 } => FrequencyProfile::DeltaPulse { omega0, t0 },
            ProfileSpec::SechSquared { alpha, beta, t0 } => {
                FrequencyProfile::SechSquared { alpha, beta, t0 }
            }
            ProfileSpec::Tabulated { t, omega2, interp } => {
                FrequencyProfile::Tabulated(Tabulated::new(t, omega2, interp)?)
            }
            ProfileSpec::Expression { expr, constants } => {
                FrequencyProfile::Expression(ExprProfile::new(&expr, constants)?)
            }
        };
        profile.validate()?;
        Ok(profile)
    }
}

impl From<FrequencyProfile> for ProfileSpec {
    fn from(profile: FrequencyProfile) -> Self {
        match profile {
            FrequencyProfile::Constant { omega0 } => ProfileSpec::Constant { omega0 },
            FrequencyProfile::ExpDecay { omega0, alpha } => ProfileSpec::ExpDecay { omega0, alpha },
            FrequencyProfile::PowerLaw { omega0, alpha, beta } => {
                ProfileSpec::PowerLaw { omega0, alpha, beta }
            }
            FrequencyProfile::DeltaPulse { omega0, t0 } => ProfileSpec::DeltaPulse { omega0, t0 },
            FrequencyProfile::SechSquared { alpha, beta, t0 } => {
                ProfileSpec::SechSquared { alpha, beta, t0 }
            }
            FrequencyProfile::Tabulated(table) => ProfileSpec::Tabulated {
                t: table.times,
                omega2: table.values,
                interp: table.interp,
            },
            FrequencyProfile::Expression(e) => ProfileSpec::Expression {
                expr: e.source,
                constants: e.constants,
            },
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn examples() {
        let c = FrequencyProfile::Constant { omega0: 2.0 };
        assert_eq!(c.omega_squared_at(5.0).unwrap(), 4.0);
        let e = FrequencyProfile::ExpDecay {
            omega0: 1.0,
            alpha: 1.0,
        };
        assert_eq!(e.omega_squared_at(0.0).unwrap(), 1.0);
        let d = FrequencyProfile::DeltaPulse {
            omega0: 1.0,
            t0: 0.0,
        };
        assert_eq!(d.omega_squared_at(1.0).unwrap(), 1.0);
        let s = FrequencyProfile::SechSquared {
            alpha: 2.0,
            beta: 1.0,
            t0: 0.0,
        };
        assert_eq!(s.omega_squared_at(0.0).unwrap(), 4.0);
    }

    #[test]
    fn step_is_right_continuous_and_impulse_is_not_evaluable() {
        let d = FrequencyProfile::DeltaPulse {
            omega0: 2.0,
            t0: 0.5,
        };
        assert_eq!(
            d.omega_squared_at(0.5),
            Err(ProfileError::EvalAtImpulse(0.5))
        );
        assert_eq!(d.smooth_omega_squared(0.5, Side::Right).unwrap(), 16.0);
        assert_eq!(d.smooth_omega_squared(0.5, Side::Left).unwrap(), 0.0);
        assert_eq!(d.omega_squared_at(0.4999).unwrap(), 0.0);
    }

    #[test]
    fn jump_event_windows() {
        assert!(FrequencyProfile::Constant { omega0: 1.0 }
            .jump_events(0.0, 1.0)
            .is_empty());
        let d = FrequencyProfile::DeltaPulse {
            omega0: 2.0,
            t0: 0.5,
        };
        assert_eq!(
            d.jump_events(0.0, 1.0),
            vec![JumpEvent {
                time: 0.5,
                strength: 4.0
            }]
        );
        let far = FrequencyProfile::DeltaPulse {
            omega0: 2.0,
            t0: 2.0,
        };
        assert!(far.jump_events(0.0, 1.0).is_empty());
        // events on the window boundary are not inside it
        assert!(d.jump_events(0.5, 1.0).is_empty());
    }

    #[test]
    fn power_law_domain() {
        let p = FrequencyProfile::PowerLaw {
            omega0: 1.0,
            alpha: 2.0,
            beta: 0.5,
        };
        assert!(matches!(
            p.omega_squared_at(-1.0),
            Err(ProfileError::Domain { .. })
        ));
        let v = p.omega_squared_at(4.0).unwrap();
        assert!((v - 2.0 * 2.0).abs() < 1e-14 * v);
        let integer = FrequencyProfile::PowerLaw {
            omega0: 1.0,
            alpha: 1.0,
            beta: 2.0,
        };
        assert_eq!(integer.omega_squared_at(-3.0).unwrap(), 9.0);
        let zero = FrequencyProfile::PowerLaw {
            omega0: 1.5,
            alpha: 3.0,
            beta: 0.0,
        };
        assert_eq!(zero.omega_squared_at(7.0).unwrap(), 1.5 * 1.5);
    }

    #[test]
    fn exp_decay_multiplicative_property() {
        let p = FrequencyProfile::ExpDecay {
            omega0: 1.3,
            alpha: 0.7,
        };
        for (t, d) in [(0.0, 0.5), (1.0, 2.0), (-1.0, 0.25)] {
            let lhs = p.omega_squared_at(t + d).unwrap();
            let rhs = p.omega_squared_at(t).unwrap() * (-0.7f64 * d).exp();
            assert!((lhs - rhs).abs() <= 4.0 * f64::EPSILON * lhs);
        }
    }

    #[test]
    fn tabulated_nodes_and_extrapolation() {
        let t = vec![0.0, 0.5, 1.0, 2.0];
        let w = vec![1.0, 0.3, 2.0, -1.0];
        for interp in [Interp::Linear, Interp::Cubic] {
            let p = FrequencyProfile::tabulated(t.clone(), w.clone(), interp).unwrap();
            for (ti, wi) in t.iter().zip(&w) {
                assert_eq!(p.omega_squared_at(*ti).unwrap(), *wi);
            }
            assert!(matches!(
                p.omega_squared_at(2.5),
                Err(ProfileError::Domain { .. })
            ));
        }
        let lin = FrequencyProfile::tabulated(t.clone(), w.clone(), Interp::Linear).unwrap();
        assert!((lin.omega_squared_at(0.25).unwrap() - 0.65).abs() < 1e-15);
    }

    #[test]
    fn cubic_spline_reproduces_linear_data() {
        let t: Vec<f64> = (0..6).map(|i| i as f64 * 0.3).collect();
        let w: Vec<f64> = t.iter().map(|x| 2.0 * x - 1.0).collect();
        let p = FrequencyProfile::tabulated(t, w, Interp::Cubic).unwrap();
        let v = p.omega_squared_at(0.77).unwrap();
        assert!((v - (2.0 * 0.77 - 1.0)).abs() < 1e-14);
    }

    #[test]
    fn tabulated_invariants() {
        assert!(FrequencyProfile::tabulated(vec![0.0], vec![1.0], Interp::Cubic).is_err());
        assert!(
            FrequencyProfile::tabulated(vec![0.0, 0.0], vec![1.0, 2.0], Interp::Cubic).is_err()
        );
        assert!(
            FrequencyProfile::tabulated(vec![0.0, 1.0], vec![1.0], Interp::Linear).is_err()
        );
    }

    #[test]
    fn json_wire_format() {
        let p: FrequencyProfile =
            serde_json::from_str(r#"{"type": "exp_decay", "omega0": 1.0, "alpha": 0.5}"#).unwrap();
        assert_eq!(
            p,
            FrequencyProfile::ExpDecay {
                omega0: 1.0,
                alpha: 0.5
            }
        );
        let e: FrequencyProfile =
            serde_json::from_str(r#"{"type": "expression", "expr": "sin(t)^2 + 0.1"}"#).unwrap();
        let v = e.omega_squared_at(1.0).unwrap();
        assert!((v - (1f64.sin().powi(2) + 0.1)).abs() < 1e-15);
        let tab: FrequencyProfile = serde_json::from_str(
            r#"{"type": "tabulated", "t": [0, 1, 2], "omega2": [1, 2, 3], "interp": "cubic"}"#,
        )
        .unwrap();
        assert_eq!(tab.omega_squared_at(1.0).unwrap(), 2.0);
        let back: FrequencyProfile =
            serde_json::from_str(&serde_json::to_string(&tab).unwrap()).unwrap();
        assert_eq!(back, tab);
        assert!(serde_json::from_str::<FrequencyProfile>(
            r#"{"type": "power_law", "omega0": 1, "alpha": 1, "beta": -3}"#
        )
        .is_err());
        assert!(serde_json::from_str::<FrequencyProfile>(
            r#"{"type": "expression", "expr": "w*t"}"#
        )
        .is_err());
    }
}
