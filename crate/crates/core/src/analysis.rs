//! Tracking and pulse-shape metrics.

use std::f64::consts::PI;

use thiserror::Error;

use crate::domain::{
    population, relative_phase, wrap_phase, ControlSpec, Level, SystemParams, Trajectory,
    AU_TIME_FS,
};
use crate::synthesis::envelope;

/// Default population floor below which the relative phase is not evaluated.
pub const PHASE_POPULATION_FLOOR: f64 = 1e-6;

/// Number of points in the coarse envelope scan.
pub const SCAN_POINTS: usize = 10_000;

/// Time resolution of the peak and half-maximum refinement, au.
pub const REFINE_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AnalysisError {
    #[error("trajectory carries no reference path")]
    MissingReference,
    #[error("no sample has both populations above {floor:e}")]
    AllExcluded { floor: f64 },
    #[error("a_i = a_f gives a zero pulse with no width")]
    DegeneratePulse,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrackingError {
    pub max_abs: f64,
    pub l2: f64,
}

/// Deviation of `P₁(t)` from the reference path `f(t)`: max and RMS.
pub fn tracking_error(traj: &Trajectory) -> Result<TrackingError, AnalysisError> {
    let reference = traj.reference_f().ok_or(AnalysisError::MissingReference)?;
    let (max_abs, sum_sq) = traj
        .states()
        .iter()
        .zip(reference)
        .map(|(s, f)| population(s, Level::One) - f)
        .fold((0.0f64, 0.0f64), |(m, ss), d| (m.max(d.abs()), ss + d * d));
    Ok(TrackingError {
        max_abs,
        l2: (sum_sq / reference.len() as f64).sqrt(),
    })
}

/// `|P₁(t_end) − a_f|`.
pub fn final_population_error(traj: &Trajectory, a_f: f64) -> f64 {
    (population(traj.last_state(), Level::One) - a_f).abs()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseConstancy {
    /// Largest shortest-arc departure from the first included sample, radians.
    pub max_deviation: f64,
    pub included: usize,
    pub excluded: usize,
}

/// How far the relative phase `arg c1 − arg c2` wanders. Samples where either
/// population is below `floor` are skipped and counted.
pub fn phase_constancy(traj: &Trajectory, floor: f64) -> Result<PhaseConstancy, AnalysisError> {
    let mut reference = None;
    let mut max_deviation = 0.0f64;
    let mut included = 0;
    for s in traj.states() {
        if population(s, Level::One) < floor || population(s, Level::Two) < floor {
            continue;
        }
        let Ok(phase) = relative_phase(s) else {
            continue;
        };
        included += 1;
        let start = *reference.get_or_insert(phase);
        max_deviation = max_deviation.max(wrap_phase(phase - start).abs());
    }
    if included == 0 {
        return Err(AnalysisError::AllExcluded { floor });
    }
    Ok(PhaseConstancy {
        max_deviation,
        included,
        excluded: traj.len() - included,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PulseMetrics {
    pub peak_amplitude: f64,
    pub peak_time: f64,
    pub fwhm: f64,
    pub cycles_in_fwhm: f64,
}

/// Peak, full width at half maximum and carrier cycles within the FWHM of the
/// closed-form sigmoid pulse envelope.
///
/// The envelope is scanned on [`SCAN_POINTS`] points over the default window,
/// then the peak (golden section) and both half-maximum crossings (bisection)
/// are refined to [`REFINE_TOL`].
pub fn pulse_metrics(
    spec: &ControlSpec,
    params: &SystemParams,
) -> Result<PulseMetrics, AnalysisError> {
    if spec.a_i() == spec.a_f() {
        return Err(AnalysisError::DegeneratePulse);
    }
    let env = |t: f64| envelope(spec, params, t);
    let (start, end) = spec.default_window();
    let dt = (end - start) / (SCAN_POINTS - 1) as f64;
    let grid: Vec<f64> = (0..SCAN_POINTS).map(|i| start + i as f64 * dt).collect();
    let values: Vec<f64> = grid.iter().map(|&t| env(t)).collect();
    let imax = values
        .iter()
        .enumerate()
        .fold(0, |best, (i, v)| if *v > values[best] { i } else { best });

    let lo = grid[imax.saturating_sub(1)];
    let hi = grid[(imax + 1).min(SCAN_POINTS - 1)];
    let peak_time = golden_max(&env, lo, hi);
    let peak_amplitude = env(peak_time).max(values[imax]);
    let half = 0.5 * peak_amplitude;

    let left = (0..imax)
        .rev()
        .find(|&j| values[j] < half)
        .map(|j| bisect_crossing(&env, half, grid[j], grid[j + 1]))
        .unwrap_or(start);
    let right = (imax + 1..SCAN_POINTS)
        .find(|&j| values[j] < half)
        .map(|j| bisect_crossing(&env, half, grid[j - 1], grid[j]))
        .unwrap_or(end);

    let fwhm = right - left;
    Ok(PulseMetrics {
        peak_amplitude,
        peak_time,
        fwhm,
        cycles_in_fwhm: fwhm * params.omega0() / (2.0 * PI),
    })
}

fn golden_max(f: &impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let ratio = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = b - ratio * (b - a);
    let mut x2 = a + ratio * (b - a);
    let (mut f1, mut f2) = (f(x1), f(x2));
    for _ in 0..200 {
        if b - a <= REFINE_TOL {
            break;
        }
        if f1 < f2 {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + ratio * (b - a);
            f2 = f(x2);
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - ratio * (b - a);
            f1 = f(x1);
        }
    }
    0.5 * (a + b)
}

/// Crossing of `f = level` in `[a, b]`, given `f(a)` and `f(b)` on opposite sides.
fn bisect_crossing(f: &impl Fn(f64) -> f64, level: f64, mut a: f64, mut b: f64) -> f64 {
    let below_at_a = f(a) < level;
    for _ in 0..200 {
        if b - a <= REFINE_TOL {
            break;
        }
        let mid = 0.5 * (a + b);
        if (f(mid) < level) == below_at_a {
            a = mid;
        } else {
            b = mid;
        }
    }
    0.5 * (a + b)
}

/// Carrier period `2π/ω₀` in femtoseconds.
pub fn period_crosscheck(params: &SystemParams) -> f64 {
    params.carrier_period() * AU_TIME_FS
}
