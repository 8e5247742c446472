//! Field synthesis by inverting the rotating-wave equations of motion.
//!
//! Given a prescribed population `f(t)` of |1⟩ with a constant relative phase
//! `φ`, the resonant field that makes the RWA dynamics follow it exactly is
//!
//! ```text
//! E(t) = (1/μ) · ḟ(t) / √(f(t)(1 − f(t))) · sin(ω₀t + φ)
//! ```
//!
//! The sigmoid family `f = a_i(1 − g) + a_f g`, `g = 1/(1 + e^{−αt})` has the
//! closed form implemented by [`synthesize_field_closed`]; arbitrary smooth
//! paths go through [`synthesize_field_generic`].
//!
//! Phase convention: `c1 = √f · e^{iφ}`, `c2 = √(1 − f)`.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use thiserror::Error;

use crate::domain::{ControlSpec, QuantumState, SystemParams};

/// `f(1 − f)` below this is treated as a pure state.
pub const SINGULARITY_FLOOR: f64 = 1e-30;

/// Number of probe points used to validate a user-supplied path.
pub const PROBE_POINTS: usize = 10_000;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SynthesisError {
    #[error(
        "path reaches a pure state at t = {t} (f(1-f) = {product:e}) and declares no finite drive"
    )]
    Singularity { t: f64, product: f64 },
    #[error("control path leaves [0, 1] at t = {t}: f = {value}")]
    PathOutOfRange { t: f64, value: f64 },
    #[error(
        "control path rate disagrees with finite difference at t = {t}: {analytic} vs {numeric}"
    )]
    InconsistentRate { t: f64, analytic: f64, numeric: f64 },
    #[error("invalid probe window [{start}, {end}]")]
    InvalidProbeWindow { start: f64, end: f64 },
    #[error("sample grid is not strictly increasing at index {0}")]
    GridNotIncreasing(usize),
}

/// Logistic step `1/(1 + e^{−αt})`, evaluated without overflow for any `αt`.
pub fn sigmoid(t: f64, alpha: f64) -> f64 {
    let x = alpha * t;
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// Sigmoid control path and its time derivative, `(f, ḟ)`.
pub fn control_function(t: f64, spec: &ControlSpec) -> (f64, f64) {
    let path = SigmoidPath::new(*spec);
    (path.value(t), path.rate(t))
}

/// A prescribed population path for state |1⟩.
pub trait ControlPath: Send + Sync {
    /// `f(t)`.
    fn value(&self, t: f64) -> f64;

    /// `ḟ(t)`.
    fn rate(&self, t: f64) -> f64;

    /// `1 − f(t)`. Paths that approach `f = 1` should override this with a
    /// form that does not cancel.
    fn complement(&self, t: f64) -> f64 {
        1.0 - self.value(t)
    }

    /// `(f(−∞), f(+∞))`.
    fn limits(&self) -> (f64, f64);

    /// Value of `ḟ/√(f(1 − f))` to use where the path is numerically at a
    /// pure state. `None` means such points are an error.
    fn pure_state_drive(&self) -> Option<f64> {
        None
    }
}

/// The sigmoid family `a_i(1 − g) + a_f g`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SigmoidPath {
    spec: ControlSpec,
}

impl SigmoidPath {
    pub fn new(spec: ControlSpec) -> Self {
        Self { spec }
    }

    pub fn spec(&self) -> &ControlSpec {
        &self.spec
    }
}

impl ControlPath for SigmoidPath {
    fn value(&self, t: f64) -> f64 {
        let g = sigmoid(t, self.spec.alpha());
        let h = sigmoid(-t, self.spec.alpha());
        // g + h can exceed 1 by an ulp
        (self.spec.a_i() * h + self.spec.a_f() * g).min(1.0)
    }

    fn rate(&self, t: f64) -> f64 {
        let g = sigmoid(t, self.spec.alpha());
        let h = sigmoid(-t, self.spec.alpha());
        (self.spec.a_f() - self.spec.a_i()) * self.spec.alpha() * g * h
    }

    fn complement(&self, t: f64) -> f64 {
        let g = sigmoid(t, self.spec.alpha());
        let h = sigmoid(-t, self.spec.alpha());
        ((1.0 - self.spec.a_i()) * h + (1.0 - self.spec.a_f()) * g).min(1.0)
    }

    fn limits(&self) -> (f64, f64) {
        (self.spec.a_i(), self.spec.a_f())
    }

    fn pure_state_drive(&self) -> Option<f64> {
        // the drive decays to zero wherever the sigmoid saturates
        Some(0.0)
    }
}

/// A path built from closures for `f` and `ḟ`.
pub struct FnPath<F, D> {
    value: F,
    rate: D,
    limits: (f64, f64),
}

impl<F, D> FnPath<F, D>
where
    F: Fn(f64) -> f64 + Send + Sync,
    D: Fn(f64) -> f64 + Send + Sync,
{
    pub fn new(value: F, rate: D, limits: (f64, f64)) -> Self {
        Self {
            value,
            rate,
            limits,
        }
    }
}

impl<F, D> ControlPath for FnPath<F, D>
where
    F: Fn(f64) -> f64 + Send + Sync,
    D: Fn(f64) -> f64 + Send + Sync,
{
    fn value(&self, t: f64) -> f64 {
        (self.value)(t)
    }

    fn rate(&self, t: f64) -> f64 {
        (self.rate)(t)
    }

    fn limits(&self) -> (f64, f64) {
        self.limits
    }
}

/// A control path that passed range and derivative checks on a probe grid.
#[derive(Clone)]
pub struct ControlEvaluator {
    path: Arc<dyn ControlPath>,
}

impl fmt::Debug for ControlEvaluator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ControlEvaluator")
            .field("limits", &self.path.limits())
            .finish()
    }
}

impl ControlEvaluator {
    /// Validates `path` on [`PROBE_POINTS`] points spanning
    /// `[probe_start, probe_end]`: `0 ≤ f ≤ 1` everywhere and `ḟ` within 1e-6
    /// (relative to `max |ḟ|`) of a central difference.
    pub fn new(
        path: impl ControlPath + 'static,
        probe_start: f64,
        probe_end: f64,
    ) -> Result<Self, SynthesisError> {
        if !(probe_start.is_finite() && probe_end.is_finite() && probe_start < probe_end) {
            return Err(SynthesisError::InvalidProbeWindow {
                start: probe_start,
                end: probe_end,
            });
        }
        let spacing = (probe_end - probe_start) / (PROBE_POINTS - 1) as f64;
        let h = spacing / 10.0;
        let probes: Vec<f64> = (0..PROBE_POINTS)
            .map(|i| probe_start + i as f64 * spacing)
            .collect();

        let mut max_rate = 0.0f64;
        for &t in &probes {
            let value = path.value(t);
            if !(0.0..=1.0).contains(&value) {
                return Err(SynthesisError::PathOutOfRange { t, value });
            }
            max_rate = max_rate.max(path.rate(t).abs());
        }

        let tol = 1e-6 * max_rate + 10.0 * f64::EPSILON / h;
        for &t in &probes {
            let analytic = path.rate(t);
            let numeric = (path.value(t + h) - path.value(t - h)) / (2.0 * h);
            if !((analytic - numeric).abs() <= tol) {
                return Err(SynthesisError::InconsistentRate {
                    t,
                    analytic,
                    numeric,
                });
            }
        }
        Ok(Self {
            path: Arc::new(path),
        })
    }

    /// Sigmoid path, probed over `window` widened by `5/α` on each side.
    pub fn sigmoid(spec: &ControlSpec, window: (f64, f64)) -> Result<Self, SynthesisError> {
        let pad = 5.0 / spec.alpha();
        Self::new(SigmoidPath::new(*spec), window.0 - pad, window.1 + pad)
    }

    pub fn value(&self, t: f64) -> f64 {
        self.path.value(t)
    }

    pub fn rate(&self, t: f64) -> f64 {
        self.path.rate(t)
    }

    pub fn complement(&self, t: f64) -> f64 {
        self.path.complement(t)
    }

    pub fn limits(&self) -> (f64, f64) {
        self.path.limits()
    }

    /// `ḟ/√(f(1 − f))`, the field amplitude times μ.
    pub fn drive(&self, t: f64) -> Result<f64, SynthesisError> {
        let product = self.path.value(t) * self.path.complement(t);
        if !(product >= SINGULARITY_FLOOR) {
            return self
                .path
                .pure_state_drive()
                .ok_or(SynthesisError::Singularity { t, product });
        }
        Ok(self.path.rate(t) / product.sqrt())
    }
}

/// Resonant field that drives the RWA dynamics along `eval`'s path.
pub fn synthesize_field_generic(
    eval: &ControlEvaluator,
    params: &SystemParams,
    phi: f64,
    t: f64,
) -> Result<f64, SynthesisError> {
    let drive = eval.drive(t)?;
    Ok(drive / params.mu() * (params.omega0() * t + phi).sin())
}

/// `α(a_f − a_i) e^{αt} / ((1 + e^{αt}) √((1 − a_i + (1 − a_f)e^{αt})(a_i + a_f e^{αt})))`.
///
/// For `αt > 0` numerator and denominator are divided by `e^{αt}` so the
/// exponential never overflows.
fn sigmoid_drive(spec: &ControlSpec) -> impl Fn(f64) -> f64 + '_ {
    move |t| {
        let (a_i, a_f) = (spec.a_i(), spec.a_f());
        if a_i == a_f {
            return 0.0;
        }
        let x = spec.alpha() * t;
        let shape = if x <= 0.0 {
            let e = x.exp();
            if e == 0.0 {
                return 0.0;
            }
            e / ((1.0 + e) * ((1.0 - a_i + (1.0 - a_f) * e) * (a_i + a_f * e)).sqrt())
        } else {
            let e = (-x).exp();
            if e == 0.0 {
                return 0.0;
            }
            e / ((1.0 + e) * (((1.0 - a_i) * e + (1.0 - a_f)) * (a_i * e + a_f)).sqrt())
        };
        spec.alpha() * (a_f - a_i) * shape
    }
}

/// Signed prefactor of `sin(ω₀t + φ)` in the closed-form sigmoid pulse.
pub fn signed_envelope(spec: &ControlSpec, params: &SystemParams, t: f64) -> f64 {
    sigmoid_drive(spec)(t) / params.mu()
}

/// Closed-form sigmoid pulse. Finite for every finite `t`.
pub fn synthesize_field_closed(spec: &ControlSpec, params: &SystemParams, t: f64) -> f64 {
    signed_envelope(spec, params, t) * (params.omega0() * t + spec.phi()).sin()
}

/// `|prefactor|` of the closed-form pulse.
pub fn envelope(spec: &ControlSpec, params: &SystemParams, t: f64) -> f64 {
    signed_envelope(spec, params, t).abs()
}

/// Starting state on the prescribed path: `(√f(t0)·e^{iφ}, √(1 − f(t0)))`.
pub fn initial_state(spec: &ControlSpec, t0: f64) -> QuantumState {
    let path = SigmoidPath::new(*spec);
    QuantumState::from_amplitudes(
        Complex64::from_polar(path.value(t0).sqrt(), spec.phi()),
        Complex64::new(path.complement(t0).sqrt(), 0.0),
    )
}

/// One sample of a synthesized pulse.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PulseSample {
    pub t: f64,
    pub field: f64,
    pub envelope: f64,
}

/// A synthesized resonant sigmoid pulse.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pulse {
    spec: ControlSpec,
    params: SystemParams,
    carrier: f64,
}

impl Pulse {
    pub fn synthesize(spec: ControlSpec, params: SystemParams) -> Self {
        Self {
            spec,
            params,
            carrier: params.omega0(),
        }
    }

    pub fn spec(&self) -> &ControlSpec {
        &self.spec
    }

    pub fn params(&self) -> &SystemParams {
        &self.params
    }

    /// Carrier angular frequency; always ω₀.
    pub fn carrier(&self) -> f64 {
        self.carrier
    }

    pub fn field(&self, t: f64) -> f64 {
        synthesize_field_closed(&self.spec, &self.params, t)
    }

    pub fn envelope(&self, t: f64) -> f64 {
        envelope(&self.spec, &self.params, t)
    }

    /// Complex envelope 𝓔(t) with `E(t) = 𝓔 e^{−iω₀t} + 𝓔* e^{iω₀t}`:
    /// `𝓔 = (i/2)·S(t)·e^{−iφ}` where `S` is the signed envelope.
    pub fn complex_envelope(&self, t: f64) -> Complex64 {
        let s = signed_envelope(&self.spec, &self.params, t);
        Complex64::new(0.0, 0.5 * s) * Complex64::from_polar(1.0, -self.spec.phi())
    }

    /// The prescribed path `(f, ḟ)`.
    pub fn control(&self, t: f64) -> (f64, f64) {
        control_function(t, &self.spec)
    }

    pub fn initial_state(&self, t0: f64) -> QuantumState {
        initial_state(&self.spec, t0)
    }

    pub fn sample(&self, grid: &[f64]) -> Result<Vec<PulseSample>, SynthesisError> {
        sample_pulse(&self.spec, &self.params, grid)
    }
}

/// Evaluates the closed-form pulse on a strictly increasing grid.
pub fn sample_pulse(
    spec: &ControlSpec,
    params: &SystemParams,
    grid: &[f64],
) -> Result<Vec<PulseSample>, SynthesisError> {
    if let Some(i) = grid.windows(2).position(|w| !(w[1] > w[0])) {
        return Err(SynthesisError::GridNotIncreasing(i + 1));
    }
    Ok(grid
        .iter()
        .map(|&t| {
            let s = signed_envelope(spec, params, t);
            PulseSample {
                t,
                field: s * (params.omega0() * t + spec.phi()).sin(),
                envelope: s.abs(),
            }
        })
        .collect())
}
