//! Core value types for a driven two-level system.
//!
//! Atomic units are used throughout: energies and frequencies in hartree
//! (ħ = 1), times in ħ/E_h, fields in atomic units of field strength.
//! Only the transition frequency ω₀ = ε₂ − ε₁ is stored; the individual
//! eigenenergies only contribute a global phase and never enter populations
//! or the synthesized field.

use std::f64::consts::PI;

use num_complex::Complex64;
use thiserror::Error;

/// One atomic unit of time in femtoseconds.
pub const AU_TIME_FS: f64 = 2.418_884_326_585_7e-2;

/// Normalization tolerance accepted by [`QuantumState::new`].
pub const NORM_TOLERANCE: f64 = 1e-12;

/// Below this modulus an amplitude is treated as zero when a phase is needed.
pub const PHASE_MODULUS_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DomainError {
    #[error("omega0 must be positive and finite, got {0}")]
    NonPositiveFrequency(f64),
    #[error("mu must be nonzero and finite, got {0}")]
    ZeroDipole(f64),
    #[error("{name} must lie in [0, 1], got {value}")]
    PopulationOutOfRange { name: &'static str, value: f64 },
    #[error("alpha must be positive and finite, got {0}")]
    NonPositiveRate(f64),
    #[error("phi must be finite, got {0}")]
    NonFinitePhase(f64),
    #[error("state is not normalized: |c1|^2 + |c2|^2 = {0}")]
    NotNormalized(f64),
    #[error("relative phase undefined: amplitude modulus below {PHASE_MODULUS_FLOOR}")]
    DegenerateAmplitude,
    #[error("invalid time window: t_start = {t_start}, t_end = {t_end}")]
    EmptyWindow { t_start: f64, t_end: f64 },
    #[error("{name} must be positive and finite, got {value}")]
    NonPositive { name: &'static str, value: f64 },
    #[error("record_stride must be at least 1")]
    ZeroStride,
    #[error("trajectory series lengths differ or are shorter than 2")]
    TrajectoryShape,
    #[error("trajectory times are not strictly increasing at index {0}")]
    TimesNotIncreasing(usize),
}

/// The physical two-level system: transition frequency and dipole projection.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SystemParams {
    omega0: f64,
    mu: f64,
}

impl SystemParams {
    pub fn new(omega0: f64, mu: f64) -> Result<Self, DomainError> {
        if !(omega0.is_finite() && omega0 > 0.0) {
            return Err(DomainError::NonPositiveFrequency(omega0));
        }
        if !mu.is_finite() || mu == 0.0 {
            return Err(DomainError::ZeroDipole(mu));
        }
        Ok(Self { omega0, mu })
    }

    /// Resonance frequency ω₀ = ε₂ − ε₁.
    pub fn omega0(&self) -> f64 {
        self.omega0
    }

    /// Dipole matrix element projected on the field polarization.
    pub fn mu(&self) -> f64 {
        self.mu
    }

    /// Carrier period 2π/ω₀ in atomic units of time.
    pub fn carrier_period(&self) -> f64 {
        2.0 * PI / self.omega0
    }
}

/// Prescribed population path of the sigmoid family: the population of |1⟩
/// moves from `a_i` to `a_f` at rate `alpha`, with constant relative phase `phi`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ControlSpec {
    a_i: f64,
    a_f: f64,
    alpha: f64,
    phi: f64,
}

impl ControlSpec {
    pub fn new(a_i: f64, a_f: f64, alpha: f64, phi: f64) -> Result<Self, DomainError> {
        check_population("a_i", a_i)?;
        check_population("a_f", a_f)?;
        if !(alpha.is_finite() && alpha > 0.0) {
            return Err(DomainError::NonPositiveRate(alpha));
        }
        if !phi.is_finite() {
            return Err(DomainError::NonFinitePhase(phi));
        }
        Ok(Self {
            a_i,
            a_f,
            alpha,
            phi,
        })
    }

    pub fn a_i(&self) -> f64 {
        self.a_i
    }

    pub fn a_f(&self) -> f64 {
        self.a_f
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn phi(&self) -> f64 {
        self.phi
    }

    /// The same path with endpoints exchanged.
    pub fn reversed(&self) -> Self {
        Self {
            a_i: self.a_f,
            a_f: self.a_i,
            ..*self
        }
    }

    pub fn with_alpha(&self, alpha: f64) -> Result<Self, DomainError> {
        Self::new(self.a_i, self.a_f, alpha, self.phi)
    }

    /// Symmetric integration window `[-15/α, 15/α]`. The sigmoid is within
    /// 3.1e-7 of its limits at both ends.
    pub fn default_window(&self) -> (f64, f64) {
        let half = 15.0 / self.alpha;
        (-half, half)
    }
}

fn check_population(name: &'static str, value: f64) -> Result<(), DomainError> {
    if (0.0..=1.0).contains(&value) {
        Ok(())
    } else {
        Err(DomainError::PopulationOutOfRange { name, value })
    }
}

/// Eigenstate label.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Level {
    One,
    Two,
}

/// Interaction-picture amplitudes `(c1, c2)` of the eigenstates |1⟩ and |2⟩.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuantumState {
    c1: Complex64,
    c2: Complex64,
}

impl QuantumState {
    /// Normalized state; rejects `|c1|² + |c2|²` further than 1e-12 from 1.
    pub fn new(c1: Complex64, c2: Complex64) -> Result<Self, DomainError> {
        let norm = c1.norm_sqr() + c2.norm_sqr();
        if !norm.is_finite() || (norm - 1.0).abs() > NORM_TOLERANCE {
            return Err(DomainError::NotNormalized(norm));
        }
        Ok(Self { c1, c2 })
    }

    /// Wraps amplitudes without a normalization check. Used for propagated
    /// states, whose norm drift is measured rather than enforced.
    pub fn from_amplitudes(c1: Complex64, c2: Complex64) -> Self {
        Self { c1, c2 }
    }

    pub fn ground() -> Self {
        Self {
            c1: Complex64::new(1.0, 0.0),
            c2: Complex64::new(0.0, 0.0),
        }
    }

    pub fn c1(&self) -> Complex64 {
        self.c1
    }

    pub fn c2(&self) -> Complex64 {
        self.c2
    }

    pub fn amplitudes(&self) -> [Complex64; 2] {
        [self.c1, self.c2]
    }

    pub fn norm_sqr(&self) -> f64 {
        self.c1.norm_sqr() + self.c2.norm_sqr()
    }

    pub fn population(&self, which: Level) -> f64 {
        population(self, which)
    }

    /// `(c2, c1)`.
    pub fn swapped(&self) -> Self {
        Self {
            c1: self.c2,
            c2: self.c1,
        }
    }

    pub fn conj(&self) -> Self {
        Self {
            c1: self.c1.conj(),
            c2: self.c2.conj(),
        }
    }
}

/// `|c_k|²` for the requested level.
pub fn population(state: &QuantumState, which: Level) -> f64 {
    match which {
        Level::One => state.c1.norm_sqr(),
        Level::Two => state.c2.norm_sqr(),
    }
}

/// `arg(c1) − arg(c2)` wrapped to `(−π, π]`.
pub fn relative_phase(state: &QuantumState) -> Result<f64, DomainError> {
    if state.c1.norm() < PHASE_MODULUS_FLOOR || state.c2.norm() < PHASE_MODULUS_FLOOR {
        return Err(DomainError::DegenerateAmplitude);
    }
    Ok(wrap_phase((state.c1 * state.c2.conj()).arg()))
}

/// Wraps an angle to `(−π, π]`.
pub fn wrap_phase(angle: f64) -> f64 {
    let mut wrapped = angle.rem_euclid(2.0 * PI);
    if wrapped > PI {
        wrapped -= 2.0 * PI;
    }
    if wrapped <= -PI {
        wrapped += 2.0 * PI;
    }
    wrapped
}

/// Solver choice for a propagation run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Method {
    /// Classical fixed-step 4th-order Runge–Kutta. The window is split into
    /// `ceil(span / step)` equal steps.
    Rk4 { step: f64 },
    /// Embedded Dormand–Prince 5(4) pair with dense output.
    Adaptive { rel_tol: f64, abs_tol: f64 },
}

impl Method {
    pub const DEFAULT_REL_TOL: f64 = 1e-10;
    pub const DEFAULT_ABS_TOL: f64 = 1e-12;

    pub fn adaptive() -> Self {
        Method::Adaptive {
            rel_tol: Self::DEFAULT_REL_TOL,
            abs_tol: Self::DEFAULT_ABS_TOL,
        }
    }

    /// Fixed step of 200 steps per carrier period.
    pub fn rk4_default(params: &SystemParams) -> Self {
        Method::Rk4 {
            step: params.carrier_period() / 200.0,
        }
    }
}

impl Default for Method {
    fn default() -> Self {
        Self::adaptive()
    }
}

/// Integration window, solver and output sampling for a propagation run.
///
/// The adaptive solver records on a uniform grid of spacing `output_step`
/// (dense output); the fixed-step solver records at its own steps. Either
/// way every `record_stride`-th sample is kept and the final time is always
/// recorded.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimConfig {
    t_start: f64,
    t_end: f64,
    method: Method,
    output_step: f64,
    record_stride: usize,
}

impl SimConfig {
    pub fn new(
        t_start: f64,
        t_end: f64,
        method: Method,
        output_step: f64,
        record_stride: usize,
    ) -> Result<Self, DomainError> {
        if !(t_start.is_finite() && t_end.is_finite() && t_start < t_end) {
            return Err(DomainError::EmptyWindow { t_start, t_end });
        }
        match method {
            Method::Rk4 { step } => positive("step", step)?,
            Method::Adaptive { rel_tol, abs_tol } => {
                positive("rel_tol", rel_tol)?;
                positive("abs_tol", abs_tol)?;
            }
        }
        positive("output_step", output_step)?;
        if record_stride == 0 {
            return Err(DomainError::ZeroStride);
        }
        Ok(Self {
            t_start,
            t_end,
            method,
            output_step,
            record_stride,
        })
    }

    /// Adaptive defaults, 1 au output grid, no decimation.
    pub fn window(t_start: f64, t_end: f64) -> Result<Self, DomainError> {
        Self::new(t_start, t_end, Method::default(), 1.0, 1)
    }

    pub fn t_start(&self) -> f64 {
        self.t_start
    }

    pub fn t_end(&self) -> f64 {
        self.t_end
    }

    pub fn method(&self) -> Method {
        self.method
    }

    pub fn output_step(&self) -> f64 {
        self.output_step
    }

    pub fn record_stride(&self) -> usize {
        self.record_stride
    }

    pub fn with_method(&self, method: Method) -> Result<Self, DomainError> {
        Self::new(
            self.t_start,
            self.t_end,
            method,
            self.output_step,
            self.record_stride,
        )
    }
}

fn positive(name: &'static str, value: f64) -> Result<(), DomainError> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(DomainError::NonPositive { name, value })
    }
}

/// Recorded propagation run.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    times: Vec<f64>,
    states: Vec<QuantumState>,
    field_values: Vec<f64>,
    reference_f: Option<Vec<f64>>,
}

impl Trajectory {
    pub fn new(
        times: Vec<f64>,
        states: Vec<QuantumState>,
        field_values: Vec<f64>,
        reference_f: Option<Vec<f64>>,
    ) -> Result<Self, DomainError> {
        let n = times.len();
        let reference_ok = reference_f.as_ref().is_none_or(|r| r.len() == n);
        if n < 2 || states.len() != n || field_values.len() != n || !reference_ok {
            return Err(DomainError::TrajectoryShape);
        }
        if let Some(i) = times.windows(2).position(|w| !(w[1] > w[0])) {
            return Err(DomainError::TimesNotIncreasing(i + 1));
        }
        Ok(Self {
            times,
            states,
            field_values,
            reference_f,
        })
    }

    /// Attaches the prescribed population path sampled at the recorded times.
    pub fn with_reference(mut self, f: impl Fn(f64) -> f64) -> Self {
        self.reference_f = Some(self.times.iter().map(|&t| f(t)).collect());
        self
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn states(&self) -> &[QuantumState] {
        &self.states
    }

    pub fn field_values(&self) -> &[f64] {
        &self.field_values
    }

    pub fn reference_f(&self) -> Option<&[f64]> {
        self.reference_f.as_deref()
    }

    pub fn populations(&self, which: Level) -> Vec<f64> {
        self.states.iter().map(|s| population(s, which)).collect()
    }

    pub fn last_state(&self) -> &QuantumState {
        self.states
            .last()
            .expect("trajectory has at least two samples")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn population_examples() {
        let pure = QuantumState::new(c(1.0, 0.0), c(0.0, 0.0)).unwrap();
        assert_eq!(population(&pure, Level::One), 1.0);

        let mixed = QuantumState::new(c(0.4f64.sqrt(), 0.0), c(0.6f64.sqrt(), 0.0)).unwrap();
        assert_abs_diff_eq!(population(&mixed, Level::One), 0.4, epsilon = 1e-15);

        let equal = QuantumState::new(c(0.5, 0.5), c(0.5, -0.5)).unwrap();
        assert_abs_diff_eq!(population(&equal, Level::Two), 0.5, epsilon = 1e-15);
    }

    #[test]
    fn relative_phase_examples() {
        let h = 0.5f64.sqrt();
        let s = QuantumState::new(c(h, 0.0), c(h, 0.0)).unwrap();
        assert_eq!(relative_phase(&s).unwrap(), 0.0);

        let rotated = Complex64::from_polar(h, PI / 3.0);
        let s = QuantumState::new(rotated, c(h, 0.0)).unwrap();
        assert_abs_diff_eq!(relative_phase(&s).unwrap(), PI / 3.0, epsilon = 1e-15);

        let s = QuantumState::new(c(1.0, 0.0), c(0.0, 0.0)).unwrap();
        assert_eq!(relative_phase(&s), Err(DomainError::DegenerateAmplitude));
    }

    #[test]
    fn relative_phase_at_pi_is_positive() {
        let h = 0.5f64.sqrt();
        let s = QuantumState::new(c(-h, -0.0), c(h, 0.0)).unwrap();
        assert_eq!(relative_phase(&s).unwrap(), PI);
    }

    #[test]
    fn rejects_unnormalized_state() {
        assert!(matches!(
            QuantumState::new(c(1.0, 0.0), c(0.1, 0.0)),
            Err(DomainError::NotNormalized(_))
        ));
    }

    #[test]
    fn params_and_spec_validation() {
        assert!(SystemParams::new(0.0, 6.0).is_err());
        assert!(SystemParams::new(0.02, 0.0).is_err());
        assert!(SystemParams::new(0.02, -6.0).is_ok());
        assert!(ControlSpec::new(-0.1, 0.5, 0.01, 0.0).is_err());
        assert!(ControlSpec::new(0.4, 1.1, 0.01, 0.0).is_err());
        assert!(ControlSpec::new(0.4, 1.0, 0.0, 0.0).is_err());
        assert!(ControlSpec::new(0.4, 1.0, 0.01, f64::NAN).is_err());
        assert!(ControlSpec::new(0.0, 1.0, 0.01, 0.0).is_ok());
    }

    #[test]
    fn sim_config_validation() {
        assert!(matches!(
            SimConfig::window(10.0, 10.0),
            Err(DomainError::EmptyWindow { .. })
        ));
        assert!(SimConfig::new(0.0, 1.0, Method::Rk4 { step: 0.0 }, 1.0, 1).is_err());
        assert!(SimConfig::new(
            0.0,
            1.0,
            Method::Adaptive {
                rel_tol: 1e-8,
                abs_tol: -1.0
            },
            1.0,
            1
        )
        .is_err());
        assert_eq!(
            SimConfig::new(0.0, 1.0, Method::default(), 1.0, 0),
            Err(DomainError::ZeroStride)
        );
    }

    #[test]
    fn trajectory_shape_checks() {
        let s = QuantumState::ground();
        assert!(Trajectory::new(vec![0.0], vec![s], vec![0.0], None).is_err());
        assert_eq!(
            Trajectory::new(vec![0.0, 0.0], vec![s, s], vec![0.0, 0.0], None),
            Err(DomainError::TimesNotIncreasing(1))
        );
        assert!(Trajectory::new(vec![0.0, 1.0], vec![s, s], vec![0.0], None).is_err());
        let t = Trajectory::new(vec![0.0, 1.0], vec![s, s], vec![0.0, 0.0], None).unwrap();
        let t = t.with_reference(|t| t * 2.0);
        assert_eq!(t.reference_f(), Some(&[0.0, 2.0][..]));
    }

    fn arb_state() -> impl Strategy<Value = QuantumState> {
        (0.0f64..1.0, -PI..PI, -PI..PI).prop_map(|(p, a, b)| {
            QuantumState::from_amplitudes(
                Complex64::from_polar(p.sqrt(), a),
                Complex64::from_polar((1.0 - p).sqrt(), b),
            )
        })
    }

    proptest! {
        #[test]
        fn populations_sum_to_one(s in arb_state()) {
            let total = population(&s, Level::One) + population(&s, Level::Two);
            prop_assert!((total - 1.0).abs() <= 1e-12);
        }

        #[test]
        fn swap_or_conjugate_negates_phase(s in arb_state()) {
            prop_assume!(s.c1().norm() > 1e-6 && s.c2().norm() > 1e-6);
            let phase = relative_phase(&s).unwrap();
            prop_assume!(PI - phase.abs() > 1e-9);
            let swapped = relative_phase(&s.swapped()).unwrap();
            let conjugated = relative_phase(&s.conj()).unwrap();
            prop_assert!((swapped + phase).abs() <= 1e-12);
            prop_assert!((conjugated + phase).abs() <= 1e-12);
            let both = relative_phase(&s.swapped().conj()).unwrap();
            prop_assert!((both - phase).abs() <= 1e-12);
        }

        #[test]
        fn wrapped_phase_is_in_range(x in -100.0f64..100.0) {
            let w = wrap_phase(x);
            prop_assert!(w > -PI && w <= PI);
            let turns = (x - w) / (2.0 * PI);
            prop_assert!((turns - turns.round()).abs() < 1e-9);
        }
    }
}
