//! Dormand–Prince 5(4) with Hairer's continuous extension, for small
//! fixed-size systems.

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OdeError<E> {
    #[error("right-hand side failed at t = {t}: {source}")]
    Rhs { t: f64, source: E },
    #[error("step size underflow at t = {t}")]
    StepUnderflow { t: f64 },
    #[error("too many steps ({steps}) before reaching t = {t_end}")]
    TooManySteps { steps: usize, t_end: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance {
    pub rtol: f64,
    pub atol: f64,
}

impl Tolerance {
    pub fn uniform(tol: f64) -> Self {
        Self {
            rtol: tol,
            atol: tol,
        }
    }
}

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;

// error coefficients b5 − b4
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

// dense output
const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

const MAX_STEPS: usize = 1_000_000;

/// One accepted step with its interpolation coefficients.
#[derive(Debug, Clone)]
struct DenseStep<const N: usize> {
    t0: f64,
    h: f64,
    rcont: [[f64; N]; 5],
}

impl<const N: usize> DenseStep<N> {
    fn eval(&self, t: f64) -> [f64; N] {
        let theta = (t - self.t0) / self.h;
        let theta1 = 1.0 - theta;
        let r = &self.rcont;
        std::array::from_fn(|i| {
            r[0][i] + theta * (r[1][i] + theta1 * (r[2][i] + theta * (r[3][i] + theta1 * r[4][i])))
        })
    }
}

/// Dense solution on `[t0, t1]`.
#[derive(Debug, Clone)]
pub struct DenseSolution<const N: usize> {
    steps: Vec<DenseStep<N>>,
    t0: f64,
    t1: f64,
    y0: [f64; N],
    y1: [f64; N],
}

impl<const N: usize> DenseSolution<N> {
    pub fn start(&self) -> f64 {
        self.t0
    }

    pub fn end(&self) -> f64 {
        self.t1
    }

    pub fn initial(&self) -> [f64; N] {
        self.y0
    }

    pub fn last(&self) -> [f64; N] {
        self.y1
    }

    pub fn step_count(&self) -> usize {
        self.steps.len()
    }

    /// Times of the accepted step boundaries, including both ends.
    pub fn nodes(&self) -> Vec<f64> {
        let mut nodes: Vec<f64> = self.steps.iter().map(|s| s.t0).collect();
        nodes.push(self.t1);
        nodes
    }

    /// Interpolated state; `t` is clamped to the solved interval.
    pub fn eval(&self, t: f64) -> [f64; N] {
        if t <= self.t0 || self.steps.is_empty() {
            return self.y0;
        }
        if t >= self.t1 {
            return self.y1;
        }
        let idx = self.steps.partition_point(|s| s.t0 <= t).saturating_sub(1);
        self.steps[idx].eval(t)
    }
}

fn combine<const N: usize>(y: &[f64; N], h: f64, terms: &[(f64, &[f64; N])]) -> [f64; N] {
    std::array::from_fn(|i| y[i] + h * terms.iter().map(|(c, k)| c * k[i]).sum::<f64>())
}

/// Integrates y' = f(t, y) from `t0` to `t1 > t0` with dense output.
pub fn integrate<const N: usize, E, F>(
    mut rhs: F,
    t0: f64,
    t1: f64,
    y0: [f64; N],
    tol: Tolerance,
) -> Result<DenseSolution<N>, OdeError<E>>
where
    F: FnMut(f64, &[f64; N]) -> Result<[f64; N], E>,
{
    let mut f = |t: f64, y: &[f64; N]| rhs(t, y).map_err(|source| OdeError::Rhs { t, source });
    let span = t1 - t0;
    let mut steps = Vec::new();
    if span <= 0.0 {
        return Ok(DenseSolution {
            steps,
            t0,
            t1: t0,
            y0,
            y1: y0,
        });
    }

    let mut t = t0;
    let mut y = y0;
    let mut k1 = f(t, &y)?;
    let mut h = initial_step(&mut f, t0, &y0, &k1, span, tol)?;
    let mut err_prev: f64 = 1e-4;
    let mut rejected_last = false;

    for _ in 0..MAX_STEPS {
        let last = t + h >= t1 || (t1 - (t + h)) < 1e-12 * span;
        if last {
            h = t1 - t;
        }
        let k2 = f(t + C2 * h, &combine(&y, h, &[(A21, &k1)]))?;
        let k3 = f(t + C3 * h, &combine(&y, h, &[(A31, &k1), (A32, &k2)]))?;
        let k4 = f(
            t + C4 * h,
            &combine(&y, h, &[(A41, &k1), (A42, &k2), (A43, &k3)]),
        )?;
        let k5 = f(
            t + C5 * h,
            &combine(&y, h, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]),
        )?;
        let t_new = if last { t1 } else { t + h };
        let k6 = f(
            t_new,
            &combine(
                &y,
                h,
                &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)],
            ),
        )?;
        let y_new = combine(
            &y,
            h,
            &[(A71, &k1), (A73, &k3), (A74, &k4), (A75, &k5), (A76, &k6)],
        );
        let k7 = f(t_new, &y_new)?;

        let mut err_sq = 0.0;
        for i in 0..N {
            let e = h
                * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
            let scale = tol.atol + tol.rtol * y[i].abs().max(y_new[i].abs());
            err_sq += (e / scale).powi(2);
        }
        let err = (err_sq / N as f64).sqrt();

        if err <= 1.0 || h.abs() < 16.0 * f64::EPSILON * t.abs().max(1.0) {
            if err > 1.0 {
                return Err(OdeError::StepUnderflow { t });
            }
            let rcont = std::array::from_fn(|j| {
                std::array::from_fn(|i| {
                    let dy = y_new[i] - y[i];
                    let bspl = h * k1[i] - dy;
                    match j {
                        0 => y[i],
                        1 => dy,
                        2 => bspl,
                        3 => dy - h * k7[i] - bspl,
                        _ => {
                            h * (D1 * k1[i]
                                + D3 * k3[i]
                                + D4 * k4[i]
                                + D5 * k5[i]
                                + D6 * k6[i]
                                + D7 * k7[i])
                        }
                    }
                })
            });
            steps.push(DenseStep { t0: t, h, rcont });
            t = t_new;
            y = y_new;
            k1 = k7;
            if last {
                return Ok(DenseSolution {
                    steps,
                    t0,
                    t1,
                    y0,
                    y1: y,
                });
            }
            // PI step-size control
            let err_c = err.max(1e-10);
            let mut factor = 0.9 * err_c.powf(-0.7 / 5.0) * err_prev.powf(0.4 / 5.0);
            factor = factor.clamp(0.2, 10.0);
            if rejected_last {
                factor = factor.min(1.0);
            }
            h *= factor;
            err_prev = err_c;
            rejected_last = false;
        } else {
            let factor = (0.9 * err.powf(-0.2)).clamp(0.2, 1.0);
            h *= factor;
            rejected_last = true;
            if h.abs() < 16.0 * f64::EPSILON * t.abs().max(1.0) {
                return Err(OdeError::StepUnderflow { t });
            }
        }
    }
    Err(OdeError::TooManySteps {
        steps: MAX_STEPS,
        t_end: t1,
    })
}

fn initial_step<const N: usize, E, F>(
    f: &mut F,
    t0: f64,
    y0: &[f64; N],
    f0: &[f64; N],
    span: f64,
    tol: Tolerance,
) -> Result<f64, OdeError<E>>
where
    F: FnMut(f64, &[f64; N]) -> Result<[f64; N], OdeError<E>>,
{
    let norm = |v: &[f64; N]| {
        let s: f64 = (0..N)
            .map(|i| (v[i] / (tol.atol + tol.rtol * y0[i].abs())).powi(2))
            .sum();
        (s / N as f64).sqrt()
    };
    let d0 = norm(y0);
    let d1 = norm(f0);
    let h0 = if d0 < 1e-5 || d1 < 1e-5 {
        1e-6
    } else {
        0.01 * d0 / d1
    }
    .min(span);
    let y1 = combine(y0, h0, &[(1.0, f0)]);
    let f1 = f(t0 + h0, &y1)?;
    let diff: [f64; N] = std::array::from_fn(|i| f1[i] - f0[i]);
    let d2 = norm(&diff) / h0;
    let h1 = if d1.max(d2) <= 1e-15 {
        (h0 * 1e-3).max(1e-6)
    } else {
        (0.01 / d1.max(d2)).powf(0.2)
    };
    Ok((100.0 * h0).min(h1).min(span))
}
