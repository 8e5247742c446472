use proptest::prelude::*;

use resonant_pulse::analysis::{phase_constancy, pulse_metrics, tracking_error};
use resonant_pulse::domain::relative_phase;
use resonant_pulse::{
    propagate_pulse, ControlSpec, Frame, Level, Pulse, SimConfig, SystemParams, Trajectory,
};

fn params() -> SystemParams {
    SystemParams::new(0.02, 6.0).unwrap()
}

fn run(spec: ControlSpec, frame: Frame) -> Trajectory {
    let (t0, t1) = spec.default_window();
    propagate_pulse(
        &Pulse::synthesize(spec, params()),
        frame,
        &SimConfig::window(t0, t1).unwrap(),
    )
    .unwrap()
}

fn frame_gap(alpha: f64) -> f64 {
    let spec = ControlSpec::new(0.4, 1.0, alpha, 0.0).unwrap();
    let exact = run(spec, Frame::Exact);
    let rwa = run(spec, Frame::Rwa);
    exact
        .states()
        .iter()
        .zip(rwa.states())
        .map(|(a, b)| (a.population(Level::One) - b.population(Level::One)).abs())
        .fold(0.0, f64::max)
}

#[test]
fn frames_agree_for_many_cycle_pulses() {
    let spec = ControlSpec::new(0.4, 1.0, 0.0009, 0.0).unwrap();
    let cycles = pulse_metrics(&spec, &params()).unwrap().cycles_in_fwhm;
    assert!(cycles >= 15.0, "{cycles}");
    let gap = frame_gap(0.0009);
    assert!(gap <= 0.02, "{gap}");
}

#[test]
fn frame_gap_grows_with_switching_rate() {
    let gaps: Vec<f64> = [0.002, 0.005, 0.01, 0.02, 0.05]
        .iter()
        .map(|&a| frame_gap(a))
        .collect();
    assert!(gaps.windows(2).all(|w| w[1] > w[0]), "{gaps:?}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn rwa_follows_any_monotone_path(
        a_i in 0.0f64..1.0,
        a_f in 0.0f64..1.0,
        alpha in 0.005f64..0.1,
        phi in -3.0f64..3.0,
    ) {
        prop_assume!((a_i - a_f).abs() > 1e-3);
        let spec = ControlSpec::new(a_i, a_f, alpha, phi).unwrap();
        let traj = run(spec, Frame::Rwa);
        prop_assert!(tracking_error(&traj).unwrap().max_abs <= 1e-6);
        if let Ok(pc) = phase_constancy(&traj, 1e-3) {
            prop_assert!(pc.max_deviation <= 1e-6, "{}", pc.max_deviation);
            let start = traj
                .states()
                .iter()
                .find(|s| s.population(Level::One) > 1e-3 && s.population(Level::Two) > 1e-3)
                .unwrap();
            let held = relative_phase(start).unwrap();
            let d = resonant_pulse::domain::wrap_phase(held - phi);
            prop_assert!(d.abs() <= 1e-9, "phase {held} vs phi {phi}");
        }
    }
}
