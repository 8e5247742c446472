use std::path::{Path, PathBuf};

use rayon::prelude::*;

use crate::analysis::{
    final_population_error, period_crosscheck, phase_constancy, pulse_metrics, tracking_error,
    PHASE_POPULATION_FLOOR,
};
use crate::domain::{Level, SimConfig, Trajectory};
use crate::dynamics::{decimate, norm_drift, propagate_pulse, uniform_grid, Frame};
use crate::synthesis::Pulse;

use super::files::{
    fmt_full, pulse_gnuplot, trajectory_gnuplot, trajectory_rows, write_difference_csv,
    write_pulse_csv, write_table_csv, write_trajectory_csv, Summary,
};
use super::manifest::{Preset, RunManifest};
use super::CliError;

pub const PULSE_FILE: &str = "pulse.csv";
pub const TRAJECTORY_FILE: &str = "trajectory.csv";
pub const DIFFERENCE_FILE: &str = "frame_difference.csv";
pub const SUMMARY_FILE: &str = "summary.txt";
pub const SWEEP_FILE: &str = "sweep.csv";

pub const SWEEP_HEADER: [&str; 5] = [
    "alpha",
    "cycles_in_fwhm",
    "final_population_error",
    "max_tracking_error",
    "error",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct OutputOptions {
    /// Prefix each file with a `# generated_unix_s` line.
    pub timestamp: bool,
    /// Also write gnuplot scripts next to the CSV files.
    pub gnuplot: bool,
}

fn prepare_dir(dir: &Path) -> Result<(), CliError> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))
}

fn write_text(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

fn record_grid(sim: &SimConfig) -> Vec<f64> {
    let grid = uniform_grid(sim.t_start(), sim.t_end(), sim.output_step());
    decimate(&grid, sim.record_stride())
}

/// Writes `pulse.csv` sampled on the manifest's output grid.
pub fn run_synthesize(m: &RunManifest, opts: OutputOptions) -> Result<Vec<PathBuf>, CliError> {
    prepare_dir(&m.out_dir)?;
    let pulse = Pulse::synthesize(m.spec, m.params);
    let samples = pulse
        .sample(&record_grid(&m.sim))
        .map_err(|e| CliError::Numerical {
            message: e.to_string(),
            at: None,
        })?;
    let path = m.out_dir.join(PULSE_FILE);
    write_pulse_csv(&path, &samples, opts.timestamp)?;
    let mut written = vec![path];
    if opts.gnuplot {
        let gp = m.out_dir.join("pulse.gp");
        write_text(&gp, &pulse_gnuplot(PULSE_FILE, "synthesized pulse"))?;
        written.push(gp);
    }
    Ok(written)
}

#[derive(Debug, Clone)]
pub struct PropagateReport {
    pub exact: Option<Trajectory>,
    pub rwa: Option<Trajectory>,
    pub summary: Summary,
    pub written: Vec<PathBuf>,
}

fn frame_summary(s: &mut Summary, key: &str, traj: &Trajectory, a_f: f64) {
    let last = traj.last_state();
    s.push_num(format!("{key}.final_p1"), last.population(Level::One));
    s.push_num(format!("{key}.final_p2"), last.population(Level::Two));
    s.push_num(
        format!("{key}.final_population_error"),
        final_population_error(traj, a_f),
    );
    if let Ok(te) = tracking_error(traj) {
        s.push_num(format!("{key}.tracking_max_abs"), te.max_abs);
        s.push_num(format!("{key}.tracking_rms"), te.l2);
    }
    s.push_num(format!("{key}.norm_drift"), norm_drift(traj));
    if let Ok(pc) = phase_constancy(traj, PHASE_POPULATION_FLOOR) {
        s.push_num(format!("{key}.phase_max_deviation_rad"), pc.max_deviation);
    }
}

fn run_summary(m: &RunManifest, exact: Option<&Trajectory>, rwa: Option<&Trajectory>) -> Summary {
    let mut s = Summary::default();
    s.push_num("mu", m.params.mu());
    s.push_num("omega0", m.params.omega0());
    s.push_num("a_i", m.spec.a_i());
    s.push_num("a_f", m.spec.a_f());
    s.push_num("alpha", m.spec.alpha());
    s.push_num("phi", m.spec.phi());
    s.push_num("t_start", m.sim.t_start());
    s.push_num("t_end", m.sim.t_end());
    s.push("frame", m.frame.name());
    s.push_num("carrier_period_fs", period_crosscheck(&m.params));
    match pulse_metrics(&m.spec, &m.params) {
        Ok(pm) => {
            s.push_num("pulse.peak_field_au", pm.peak_amplitude);
            s.push_num("pulse.peak_time_au", pm.peak_time);
            s.push_num("pulse.fwhm_au", pm.fwhm);
            s.push_num("pulse.cycles_in_fwhm", pm.cycles_in_fwhm);
        }
        Err(_) => s.push_num("pulse.peak_field_au", 0.0),
    }
    if let Some(t) = exact {
        frame_summary(&mut s, "exact", t, m.spec.a_f());
    }
    if let Some(t) = rwa {
        frame_summary(&mut s, "rwa", t, m.spec.a_f());
    }
    if let (Some(a), Some(b)) = (exact, rwa) {
        let gap = a
            .states()
            .iter()
            .zip(b.states())
            .map(|(x, y)| (x.population(Level::One) - y.population(Level::One)).abs())
            .fold(0.0, f64::max);
        s.push_num("frames.max_p1_difference", gap);
    }
    s
}

/// Propagates the selected frames and writes the trajectory, the summary and,
/// for both frames, the pointwise difference file.
pub fn run_propagate(m: &RunManifest, opts: OutputOptions) -> Result<PropagateReport, CliError> {
    prepare_dir(&m.out_dir)?;
    let pulse = Pulse::synthesize(m.spec, m.params);
    let mut exact = None;
    let mut rwa = None;
    for &frame in m.frame.frames() {
        let traj = propagate_pulse(&pulse, frame, &m.sim)?;
        match frame {
            Frame::Exact => exact = Some(traj),
            Frame::Rwa => rwa = Some(traj),
        }
    }

    let mut written = Vec::new();
    let path = m.out_dir.join(TRAJECTORY_FILE);
    write_trajectory_csv(
        &path,
        &trajectory_rows(exact.as_ref(), rwa.as_ref()),
        opts.timestamp,
    )?;
    written.push(path);
    if let (Some(a), Some(b)) = (&exact, &rwa) {
        let path = m.out_dir.join(DIFFERENCE_FILE);
        write_difference_csv(&path, a, b, opts.timestamp)?;
        written.push(path);
    }
    let summary = run_summary(m, exact.as_ref(), rwa.as_ref());
    let path = m.out_dir.join(SUMMARY_FILE);
    summary.write(&path, opts.timestamp)?;
    written.push(path);
    if opts.gnuplot {
        let gp = m.out_dir.join("trajectory.gp");
        write_text(&gp, &trajectory_gnuplot(TRAJECTORY_FILE, "populations"))?;
        written.push(gp);
    }
    Ok(PropagateReport {
        exact,
        rwa,
        summary,
        written,
    })
}

/// Metrics for one rate in a sweep; `Err` holds the reason the row failed.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub alpha: f64,
    pub outcome: Result<SweepMetrics, String>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepMetrics {
    pub cycles_in_fwhm: f64,
    pub final_population_error: f64,
    pub max_tracking_error: f64,
}

fn sweep_one(m: &RunManifest, alpha: f64) -> Result<SweepMetrics, String> {
    let spec = m.spec.with_alpha(alpha).map_err(|e| e.to_string())?;
    let (t0, t1) = spec.default_window();
    let sim = SimConfig::new(
        t0,
        t1,
        m.sim.method(),
        m.sim.output_step(),
        m.sim.record_stride(),
    )
    .map_err(|e| e.to_string())?;
    let metrics = pulse_metrics(&spec, &m.params).map_err(|e| e.to_string())?;
    let traj = propagate_pulse(&Pulse::synthesize(spec, m.params), Frame::Exact, &sim)
        .map_err(|e| CliError::from(e).to_string())?;
    let tracking = tracking_error(&traj).map_err(|e| e.to_string())?;
    Ok(SweepMetrics {
        cycles_in_fwhm: metrics.cycles_in_fwhm,
        final_population_error: final_population_error(&traj, spec.a_f()),
        max_tracking_error: tracking.max_abs,
    })
}

/// Exact-frame metrics for each rate in `m.alphas`, each over its own
/// `±15/α` window, computed in parallel and returned in input order. Writes
/// `sweep.csv`; a failing row is reported in its `error` column.
pub fn run_sweep(m: &RunManifest, opts: OutputOptions) -> Result<Vec<SweepRow>, CliError> {
    if m.alphas.is_empty() {
        return Err(CliError::Config(
            "key `alphas`: sweep needs at least one value".into(),
        ));
    }
    prepare_dir(&m.out_dir)?;
    let rows: Vec<SweepRow> = m
        .alphas
        .par_iter()
        .map(|&alpha| SweepRow {
            alpha,
            outcome: sweep_one(m, alpha),
        })
        .collect();
    let table: Vec<Vec<String>> = rows
        .iter()
        .map(|r| match &r.outcome {
            Ok(x) => vec![
                fmt_full(r.alpha),
                fmt_full(x.cycles_in_fwhm),
                fmt_full(x.final_population_error),
                fmt_full(x.max_tracking_error),
                String::new(),
            ],
            Err(e) => vec![
                fmt_full(r.alpha),
                String::new(),
                String::new(),
                String::new(),
                e.clone(),
            ],
        })
        .collect();
    write_table_csv(
        &m.out_dir.join(SWEEP_FILE),
        &SWEEP_HEADER,
        &table,
        opts.timestamp,
    )?;
    if opts.gnuplot {
        write_text(
            &m.out_dir.join("sweep.gp"),
            "set datafile separator ','\nset datafile commentschars '#'\n\
             set key autotitle columnhead\nset logscale xy\nset xlabel 'alpha [au]'\n\
             plot 'sweep.csv' using 1:3 with linespoints, '' using 1:4 with linespoints\n",
        )?;
    }
    Ok(rows)
}

/// Built-in parameter set, both frames, pulse and trajectory written to `out`.
pub fn run_preset(
    preset: Preset,
    out: Option<&Path>,
    opts: OutputOptions,
) -> Result<PropagateReport, CliError> {
    let mut m = RunManifest::preset(preset);
    m.out_dir = out
        .map(Path::to_path_buf)
        .unwrap_or_else(|| PathBuf::from("out").join(preset.name()));
    let mut pulse_files = run_synthesize(&m, opts)?;
    let mut report = run_propagate(&m, opts)?;
    pulse_files.append(&mut report.written);
    report.written = pulse_files;
    Ok(report)
}
