//! Explicit Runge–Kutta integrators for a pair of complex amplitudes.
//!
//! Two schemes: the classical fixed-step RK4 and the Dormand–Prince 5(4)
//! pair with its 4th-order continuous extension (Hairer, Nørsett & Wanner,
//! "Solving ODEs I", DOPRI5).

use num_complex::Complex64;
use thiserror::Error;

pub type State = [Complex64; 2];

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OdeError {
    #[error("step size underflow at t = {t} (h = {h:e})")]
    StepUnderflow { t: f64, h: f64 },
    #[error("step budget of {max_steps} exhausted at t = {t}")]
    TooManySteps { t: f64, max_steps: usize },
    #[error("non-finite state at t = {t}")]
    NonFinite { t: f64 },
}

#[inline]
fn axpy(y: &State, h: f64, terms: &[(f64, &State)]) -> State {
    let mut out = *y;
    for (coef, k) in terms {
        let c = h * coef;
        out[0] += k[0] * c;
        out[1] += k[1] * c;
    }
    out
}

/// One classical RK4 step.
pub fn rk4_step<F>(rhs: &F, t: f64, y: &State, h: f64) -> State
where
    F: Fn(f64, &State) -> State,
{
    let k1 = rhs(t, y);
    let k2 = rhs(t + 0.5 * h, &axpy(y, h, &[(0.5, &k1)]));
    let k3 = rhs(t + 0.5 * h, &axpy(y, h, &[(0.5, &k2)]));
    let k4 = rhs(t + h, &axpy(y, h, &[(1.0, &k3)]));
    axpy(
        y,
        h,
        &[
            (1.0 / 6.0, &k1),
            (1.0 / 3.0, &k2),
            (1.0 / 3.0, &k3),
            (1.0 / 6.0, &k4),
        ],
    )
}

/// Integrates from `t0` to `t_end` in `ceil(span/step)` equal RK4 steps.
/// Returns every step including the initial point; the last time is
/// exactly `t_end`.
pub fn integrate_rk4<F>(
    rhs: &F,
    t0: f64,
    y0: State,
    t_end: f64,
    step: f64,
) -> Result<Vec<(f64, State)>, OdeError>
where
    F: Fn(f64, &State) -> State,
{
    let span = t_end - t0;
    let n = ((span / step) - 1e-9).ceil().max(1.0) as usize;
    let h = span / n as f64;
    let mut out = Vec::with_capacity(n + 1);
    let mut y = y0;
    out.push((t0, y));
    for i in 0..n {
        let t = t0 + i as f64 * h;
        y = rk4_step(rhs, t, &y, h);
        let t_next = if i + 1 == n {
            t_end
        } else {
            t0 + (i + 1) as f64 * h
        };
        if !is_finite(&y) {
            return Err(OdeError::NonFinite { t: t_next });
        }
        out.push((t_next, y));
    }
    Ok(out)
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

const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

/// Step-size controller settings for [`integrate_dopri5`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Dopri5Options {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_step: f64,
    pub max_steps: usize,
}

impl Dopri5Options {
    pub fn new(rel_tol: f64, abs_tol: f64, max_step: f64) -> Self {
        Self {
            rel_tol,
            abs_tol,
            max_step,
            max_steps: 10_000_000,
        }
    }
}

/// Interpolant over the last accepted step.
struct Dense {
    t_old: f64,
    h: f64,
    r: [State; 5],
}

impl Dense {
    fn eval(&self, t: f64) -> State {
        let s = (t - self.t_old) / self.h;
        let s1 = 1.0 - s;
        let mut out = [Complex64::new(0.0, 0.0); 2];
        for i in 0..2 {
            let r = &self.r;
            out[i] = r[0][i] + (r[1][i] + (r[2][i] + (r[3][i] + r[4][i] * s1) * s) * s1) * s;
        }
        out
    }
}

fn is_finite(y: &State) -> bool {
    y.iter().all(|c| c.re.is_finite() && c.im.is_finite())
}

fn scaled_norm(v: &State, y: &State, opts: &Dopri5Options) -> f64 {
    let comps = |s: &State| [s[0].re, s[0].im, s[1].re, s[1].im];
    let (v, y) = (comps(v), comps(y));
    let sum: f64 = v
        .iter()
        .zip(y.iter())
        .map(|(vi, yi)| {
            let sk = opts.abs_tol + opts.rel_tol * yi.abs();
            (vi / sk).powi(2)
        })
        .sum();
    (sum / 4.0).sqrt()
}

fn initial_step<F>(rhs: &F, t0: f64, y0: &State, f0: &State, opts: &Dopri5Options) -> f64
where
    F: Fn(f64, &State) -> State,
{
    let d0 = scaled_norm(y0, y0, opts);
    let d1 = scaled_norm(f0, y0, opts);
    let h0 = if d0 < 1e-5 || d1 < 1e-5 {
        1e-6
    } else {
        0.01 * d0 / d1
    };
    let h0 = h0.min(opts.max_step);
    let y1 = axpy(y0, h0, &[(1.0, f0)]);
    let f1 = rhs(t0 + h0, &y1);
    let diff = [f1[0] - f0[0], f1[1] - f0[1]];
    let d2 = scaled_norm(&diff, y0, opts) / h0;
    let h1 = if d1.max(d2) <= 1e-15 {
        (h0 * 1e-3).max(1e-6)
    } else {
        (0.01 / d1.max(d2)).powf(0.2)
    };
    (100.0 * h0).min(h1).min(opts.max_step)
}

/// Adaptive Dormand–Prince integration from `(t0, y0)` to `t_end`, sampling
/// the solution at `out_times` through dense output. `out_times` must be
/// nondecreasing and lie in `[t0, t_end]`.
pub fn integrate_dopri5<F>(
    rhs: &F,
    t0: f64,
    y0: State,
    t_end: f64,
    out_times: &[f64],
    opts: &Dopri5Options,
) -> Result<Vec<State>, OdeError>
where
    F: Fn(f64, &State) -> State,
{
    let mut out = Vec::with_capacity(out_times.len());
    let mut next_out = 0;
    while next_out < out_times.len() && out_times[next_out] <= t0 {
        out.push(y0);
        next_out += 1;
    }

    let mut t = t0;
    let mut y = y0;
    let mut k1 = rhs(t, &y);
    let mut h = initial_step(rhs, t0, &y0, &k1, opts);
    let mut rejected_last = false;
    let mut steps = 0usize;

    while t < t_end {
        if steps >= opts.max_steps {
            return Err(OdeError::TooManySteps {
                t,
                max_steps: opts.max_steps,
            });
        }
        if h < 16.0 * f64::EPSILON * t.abs().max(1.0) {
            return Err(OdeError::StepUnderflow { t, h });
        }
        let last = t + h >= t_end;
        if last {
            h = t_end - t;
        }
        steps += 1;

        let k2 = rhs(t + C2 * h, &axpy(&y, h, &[(A21, &k1)]));
        let k3 = rhs(t + C3 * h, &axpy(&y, h, &[(A31, &k1), (A32, &k2)]));
        let k4 = rhs(
            t + C4 * h,
            &axpy(&y, h, &[(A41, &k1), (A42, &k2), (A43, &k3)]),
        );
        let k5 = rhs(
            t + C5 * h,
            &axpy(&y, h, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]),
        );
        let k6 = rhs(
            t + h,
            &axpy(
                &y,
                h,
                &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)],
            ),
        );
        let y_new = axpy(
            &y,
            h,
            &[(A71, &k1), (A73, &k3), (A74, &k4), (A75, &k5), (A76, &k6)],
        );
        let t_new = if last { t_end } else { t + h };
        let k7 = rhs(t_new, &y_new);

        let err_vec = axpy(
            &[Complex64::new(0.0, 0.0); 2],
            h,
            &[
                (E1, &k1),
                (E3, &k3),
                (E4, &k4),
                (E5, &k5),
                (E6, &k6),
                (E7, &k7),
            ],
        );
        let scale = [
            Complex64::new(
                y[0].re.abs().max(y_new[0].re.abs()),
                y[0].im.abs().max(y_new[0].im.abs()),
            ),
            Complex64::new(
                y[1].re.abs().max(y_new[1].re.abs()),
                y[1].im.abs().max(y_new[1].im.abs()),
            ),
        ];
        let err = scaled_norm(&err_vec, &scale, opts);

        if !err.is_finite() {
            h *= 0.2;
            rejected_last = true;
            continue;
        }

        let mut factor = (0.9 * err.powf(-0.2)).clamp(0.2, 5.0);
        if err <= 1.0 {
            let dy = [y_new[0] - y[0], y_new[1] - y[1]];
            let hk1 = [k1[0] * h, k1[1] * h];
            let r3 = [hk1[0] - dy[0], hk1[1] - dy[1]];
            let r4 = [dy[0] - k7[0] * h - r3[0], dy[1] - k7[1] * h - r3[1]];
            let r5 = axpy(
                &[Complex64::new(0.0, 0.0); 2],
                h,
                &[
                    (D1, &k1),
                    (D3, &k3),
                    (D4, &k4),
                    (D5, &k5),
                    (D6, &k6),
                    (D7, &k7),
                ],
            );
            let dense = Dense {
                t_old: t,
                h,
                r: [y, dy, r3, r4, r5],
            };
            while next_out < out_times.len() && out_times[next_out] <= t_new {
                let tq = out_times[next_out];
                out.push(if tq == t_new { y_new } else { dense.eval(tq) });
                next_out += 1;
            }

            t = t_new;
            y = y_new;
            k1 = k7;
            if !is_finite(&y) {
                return Err(OdeError::NonFinite { t });
            }
            if rejected_last {
                factor = factor.min(1.0);
            }
            rejected_last = false;
            if last {
                break;
            }
        } else {
            factor = factor.min(1.0);
            rejected_last = true;
        }
        h = (h * factor).min(opts.max_step);
    }

    while next_out < out_times.len() {
        out.push(y);
        next_out += 1;
    }
    Ok(out)
}
