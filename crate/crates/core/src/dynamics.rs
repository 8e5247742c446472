//! Propagation of the amplitude pair `(c1, c2)` under a real drive.
//!
//! Exact frame (no approximation beyond the dipole coupling):
//!
//! ```text
//! ċ1 = i μ E(t) e^{−iω₀t} c2,    ċ2 = i μ E(t) e^{+iω₀t} c1
//! ```
//!
//! Rotating-wave frame, with complex envelope 𝓔 and detuning δ = ω − ω₀:
//!
//! ```text
//! ċ1 = i μ 𝓔*(t) e^{iδt} c2,     ċ2 = i μ 𝓔(t) e^{−iδt} c1
//! ```
//!
//! Norm drift is measured, never corrected.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use thiserror::Error;

use crate::domain::{Method, QuantumState, SimConfig, SystemParams, Trajectory};
use crate::ode::{self, Dopri5Options, OdeError, State};
use crate::synthesis::{control_function, Pulse, PROBE_POINTS};

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DynamicsError {
    #[error("RWA propagation needs a drive with a complex envelope")]
    MissingEnvelope,
    #[error("real field and envelope disagree at t = {t}: {real} vs {reconstructed}")]
    InconsistentDrive {
        t: f64,
        real: f64,
        reconstructed: f64,
    },
    #[error("integrator failed: {0}")]
    Integrator(#[from] OdeError),
}

impl DynamicsError {
    /// Time at which the integrator gave up, if that is what happened.
    pub fn failure_time(&self) -> Option<f64> {
        match self {
            DynamicsError::Integrator(
                OdeError::StepUnderflow { t, .. }
                | OdeError::TooManySteps { t, .. }
                | OdeError::NonFinite { t },
            ) => Some(*t),
            _ => None,
        }
    }
}

/// Which equations of motion to integrate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Frame {
    Exact,
    Rwa,
}

impl fmt::Display for Frame {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Frame::Exact => f.write_str("exact"),
            Frame::Rwa => f.write_str("rwa"),
        }
    }
}

type RealFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;
type EnvelopeFn = Arc<dyn Fn(f64) -> Complex64 + Send + Sync>;

/// A real drive `E(t)`, optionally with its rotating decomposition
/// `E = 𝓔 e^{−iωt} + 𝓔* e^{iωt}`.
#[derive(Clone)]
pub struct DriveField {
    real: RealFn,
    envelope: Option<(EnvelopeFn, f64)>,
}

impl fmt::Debug for DriveField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("DriveField")
            .field("carrier", &self.carrier())
            .finish()
    }
}

impl DriveField {
    /// Real field only; usable in the exact frame.
    pub fn from_real(real: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        Self {
            real: Arc::new(real),
            envelope: None,
        }
    }

    /// Field defined by its envelope and carrier.
    pub fn from_envelope(
        envelope: impl Fn(f64) -> Complex64 + Send + Sync + 'static,
        carrier: f64,
    ) -> Self {
        let envelope: EnvelopeFn = Arc::new(envelope);
        let env = envelope.clone();
        let real = move |t: f64| 2.0 * (env(t) * Complex64::from_polar(1.0, -carrier * t)).re;
        Self {
            real: Arc::new(real),
            envelope: Some((envelope, carrier)),
        }
    }

    /// Both representations, checked against each other to 1e-12 on a probe
    /// grid over `probe`.
    pub fn new(
        real: impl Fn(f64) -> f64 + Send + Sync + 'static,
        envelope: impl Fn(f64) -> Complex64 + Send + Sync + 'static,
        carrier: f64,
        probe: (f64, f64),
    ) -> Result<Self, DynamicsError> {
        let drive = Self {
            real: Arc::new(real),
            envelope: Some((Arc::new(envelope), carrier)),
        };
        drive.check_consistency(probe)?;
        Ok(drive)
    }

    pub fn zero() -> Self {
        Self::constant_envelope(Complex64::new(0.0, 0.0), 0.0)
    }

    pub fn constant_envelope(envelope: Complex64, carrier: f64) -> Self {
        Self::from_envelope(move |_| envelope, carrier)
    }

    pub fn field(&self, t: f64) -> f64 {
        (self.real)(t)
    }

    pub fn envelope(&self, t: f64) -> Option<Complex64> {
        self.envelope.as_ref().map(|(env, _)| env(t))
    }

    pub fn carrier(&self) -> Option<f64> {
        self.envelope.as_ref().map(|(_, w)| *w)
    }

    /// δ = ω − ω₀.
    pub fn detuning(&self, params: &SystemParams) -> Option<f64> {
        self.carrier().map(|w| w - params.omega0())
    }

    /// Largest disagreement between the two representations is within 1e-12.
    pub fn check_consistency(&self, probe: (f64, f64)) -> Result<(), DynamicsError> {
        let Some((env, carrier)) = &self.envelope else {
            return Ok(());
        };
        let spacing = (probe.1 - probe.0) / (PROBE_POINTS - 1) as f64;
        for i in 0..PROBE_POINTS {
            let t = probe.0 + i as f64 * spacing;
            let real = (self.real)(t);
            let reconstructed = 2.0 * (env(t) * Complex64::from_polar(1.0, -carrier * t)).re;
            if !((real - reconstructed).abs() <= 1e-12) {
                return Err(DynamicsError::InconsistentDrive {
                    t,
                    real,
                    reconstructed,
                });
            }
        }
        Ok(())
    }
}

impl From<Pulse> for DriveField {
    fn from(pulse: Pulse) -> Self {
        Self {
            real: Arc::new(move |t| pulse.field(t)),
            envelope: Some((
                Arc::new(move |t| pulse.complex_envelope(t)),
                pulse.carrier(),
            )),
        }
    }
}

/// Exact-frame derivatives `(ċ1, ċ2)` for real field value `field` at `t`.
pub fn rhs_exact(state: &QuantumState, t: f64, field: f64, params: &SystemParams) -> State {
    exact_derivative(&state.amplitudes(), t, field, params)
}

#[inline]
fn exact_derivative(c: &State, t: f64, field: f64, params: &SystemParams) -> State {
    let coupling = I * (params.mu() * field);
    let rot = Complex64::from_polar(1.0, params.omega0() * t);
    [coupling * rot.conj() * c[1], coupling * rot * c[0]]
}

/// RWA-frame derivatives for complex envelope value `envelope` at `t`.
pub fn rhs_rwa(
    state: &QuantumState,
    t: f64,
    envelope: Complex64,
    delta: f64,
    params: &SystemParams,
) -> State {
    rwa_derivative(&state.amplitudes(), t, envelope, delta, params)
}

#[inline]
fn rwa_derivative(
    c: &State,
    t: f64,
    envelope: Complex64,
    delta: f64,
    params: &SystemParams,
) -> State {
    let coupling = I * params.mu();
    let rot = Complex64::from_polar(1.0, delta * t);
    [
        coupling * envelope.conj() * rot * c[1],
        coupling * envelope * rot.conj() * c[0],
    ]
}

/// Uniform grid from `t_start` to `t_end` with spacing `step`; `t_end` is
/// always the last point.
pub fn uniform_grid(t_start: f64, t_end: f64, step: f64) -> Vec<f64> {
    let ratio = (t_end - t_start) / step;
    let n = if (ratio - ratio.round()).abs() < 1e-9 {
        ratio.round()
    } else {
        ratio.floor()
    };
    let n = n as usize;
    let mut grid: Vec<f64> = (0..=n).map(|i| t_start + i as f64 * step).collect();
    match grid.last_mut() {
        Some(last) if (t_end - *last).abs() <= 1e-9 * step => *last = t_end,
        _ => grid.push(t_end),
    }
    grid
}

pub(crate) fn decimate<T: Copy>(items: &[T], stride: usize) -> Vec<T> {
    let mut out: Vec<T> = items.iter().step_by(stride).copied().collect();
    if !(items.len() - 1).is_multiple_of(stride) {
        out.push(items[items.len() - 1]);
    }
    out
}

/// Integrates the amplitudes from `config.t_start()` to `config.t_end()`.
pub fn propagate(
    initial: &QuantumState,
    drive: &DriveField,
    frame: Frame,
    params: &SystemParams,
    config: &SimConfig,
) -> Result<Trajectory, DynamicsError> {
    let p = *params;
    type Rhs = Box<dyn Fn(f64, &State) -> State>;
    let rhs: Rhs = match frame {
        Frame::Exact => {
            let real = drive.real.clone();
            Box::new(move |t, c| exact_derivative(c, t, real(t), &p))
        }
        Frame::Rwa => {
            let (env, carrier) = drive
                .envelope
                .clone()
                .ok_or(DynamicsError::MissingEnvelope)?;
            let delta = carrier - p.omega0();
            Box::new(move |t, c| rwa_derivative(c, t, env(t), delta, &p))
        }
    };

    let (t0, t1) = (config.t_start(), config.t_end());
    let y0 = initial.amplitudes();
    let (times, states) = match config.method() {
        Method::Rk4 { step } => {
            let run = ode::integrate_rk4(&rhs, t0, y0, t1, step)?;
            let kept = decimate(&run, config.record_stride());
            kept.into_iter().unzip::<_, _, Vec<f64>, Vec<State>>()
        }
        Method::Adaptive { rel_tol, abs_tol } => {
            let grid = uniform_grid(t0, t1, config.output_step());
            let times = decimate(&grid, config.record_stride());
            let opts = Dopri5Options::new(rel_tol, abs_tol, (t1 - t0) / 100.0);
            let states = ode::integrate_dopri5(&rhs, t0, y0, t1, &times, &opts)?;
            (times, states)
        }
    };

    let field_values = times.iter().map(|&t| drive.field(t)).collect();
    let states = states
        .into_iter()
        .map(|[c1, c2]| QuantumState::from_amplitudes(c1, c2))
        .collect();
    Ok(Trajectory::new(times, states, field_values, None)
        .expect("integrator output is a valid trajectory"))
}

/// Propagates the pulse's own prescribed initial state over `config`'s window
/// and attaches the prescribed path as the reference.
pub fn propagate_pulse(
    pulse: &Pulse,
    frame: Frame,
    config: &SimConfig,
) -> Result<Trajectory, DynamicsError> {
    let initial = pulse.initial_state(config.t_start());
    let drive = DriveField::from(*pulse);
    let spec = *pulse.spec();
    Ok(propagate(&initial, &drive, frame, pulse.params(), config)?
        .with_reference(|t| control_function(t, &spec).0))
}

/// Closed-form RWA solution for a constant envelope `𝓔₀` and detuning `δ`,
/// starting from `initial` at time zero.
///
/// With generalized Rabi frequency `Ω = √(4μ²|𝓔₀|² + δ²)` and
/// `b = (c1 e^{−iδt/2}, c2 e^{iδt/2})`, the transformed amplitudes obey
/// `ḃ = −iMb` with `M = [[δ/2, −μ𝓔₀*], [−μ𝓔₀, −δ/2]]`, `M² = (Ω/2)²`.
pub fn rabi_oracle(
    initial: &QuantumState,
    envelope: Complex64,
    delta: f64,
    params: &SystemParams,
    t: f64,
) -> QuantumState {
    let coupling = params.mu() * envelope;
    let omega = (4.0 * coupling.norm_sqr() + delta * delta).sqrt();
    let half = 0.5 * omega * t;
    let cos = half.cos();
    // (2/Ω) sin(Ωt/2), finite as Ω → 0
    let sinc = if half.abs() < 1e-8 {
        t * (1.0 - half * half / 6.0)
    } else {
        2.0 * half.sin() / omega
    };
    let [b1, b2] = initial.amplitudes();
    let m11 = Complex64::new(0.5 * delta, 0.0);
    let m12 = -coupling.conj();
    let m21 = -coupling;
    let b1t = b1 * cos - I * sinc * (m11 * b1 + m12 * b2);
    let b2t = b2 * cos - I * sinc * (m21 * b1 - m11 * b2);
    QuantumState::from_amplitudes(
        b1t * Complex64::from_polar(1.0, 0.5 * delta * t),
        b2t * Complex64::from_polar(1.0, -0.5 * delta * t),
    )
}

/// `max |‖c‖² − 1|` over the recorded states.
pub fn norm_drift(traj: &Trajectory) -> f64 {
    norm_drift_of_states(traj.states())
}

pub fn norm_drift_of_states(states: &[QuantumState]) -> f64 {
    states
        .iter()
        .map(|s| (s.norm_sqr() - 1.0).abs())
        .fold(0.0, f64::max)
}
