//! CSV and keyed-text file formats.
//!
//! All CSV numerics use 17 significant digits so values read back are
//! bit-identical. An optional first line `# generated_unix_s = <secs>` is
//! written when timestamps are enabled and skipped on read.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use crate::domain::{relative_phase, Level, Trajectory};
use crate::synthesis::PulseSample;

use super::CliError;

pub const TRAJECTORY_HEADER: [&str; 8] = [
    "t_au",
    "field_au",
    "p1_exact",
    "p2_exact",
    "p1_rwa",
    "p2_rwa",
    "f_ref",
    "relphase_rwa",
];

pub const PULSE_HEADER: [&str; 3] = ["t_au", "field_au", "envelope_au"];

pub const DIFFERENCE_HEADER: [&str; 3] = ["t_au", "dp1_exact_minus_rwa", "dp2_exact_minus_rwa"];

/// Full round-trip precision.
pub fn fmt_full(x: f64) -> String {
    format!("{x:.16e}")
}

/// Rounded to 6 significant digits for human reading.
pub fn fmt_short(x: f64) -> String {
    if !x.is_finite() {
        return x.to_string();
    }
    let rounded: f64 = format!("{x:.5e}").parse().unwrap_or(x);
    let mag = rounded.abs();
    if mag == 0.0 || (1e-4..1e6).contains(&mag) {
        rounded.to_string()
    } else {
        format!("{rounded:e}")
    }
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map(fmt_full).unwrap_or_default()
}

fn io_error(path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::Io(format!("{}: {e}", path.display()))
}

fn open_csv(path: &Path, timestamp: bool) -> Result<csv::Writer<BufWriter<File>>, CliError> {
    let file = File::create(path).map_err(|e| io_error(path, e))?;
    let mut out = BufWriter::new(file);
    if timestamp {
        let secs = SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);
        writeln!(out, "# generated_unix_s = {secs}").map_err(|e| io_error(path, e))?;
    }
    Ok(csv::Writer::from_writer(out))
}

fn finish(mut w: csv::Writer<BufWriter<File>>, path: &Path) -> Result<(), CliError> {
    w.flush().map_err(|e| io_error(path, e))
}

pub fn write_pulse_csv(
    path: &Path,
    samples: &[PulseSample],
    timestamp: bool,
) -> Result<(), CliError> {
    let mut w = open_csv(path, timestamp)?;
    w.write_record(PULSE_HEADER)
        .map_err(|e| io_error(path, e))?;
    for s in samples {
        w.write_record([fmt_full(s.t), fmt_full(s.field), fmt_full(s.envelope)])
            .map_err(|e| io_error(path, e))?;
    }
    finish(w, path)
}

/// One row of the trajectory file.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct TrajectoryRow {
    pub t: f64,
    pub field: f64,
    pub p1_exact: Option<f64>,
    pub p2_exact: Option<f64>,
    pub p1_rwa: Option<f64>,
    pub p2_rwa: Option<f64>,
    pub f_ref: Option<f64>,
    pub relphase_rwa: Option<f64>,
}

impl TrajectoryRow {
    fn record(&self) -> [String; 8] {
        [
            fmt_full(self.t),
            fmt_full(self.field),
            fmt_opt(self.p1_exact),
            fmt_opt(self.p2_exact),
            fmt_opt(self.p1_rwa),
            fmt_opt(self.p2_rwa),
            fmt_opt(self.f_ref),
            fmt_opt(self.relphase_rwa),
        ]
    }
}

/// Merges per-frame trajectories recorded on the same time grid into rows.
pub fn trajectory_rows(exact: Option<&Trajectory>, rwa: Option<&Trajectory>) -> Vec<TrajectoryRow> {
    let base = exact.or(rwa).expect("at least one trajectory");
    (0..base.len())
        .map(|i| {
            let mut row = TrajectoryRow {
                t: base.times()[i],
                field: base.field_values()[i],
                f_ref: base.reference_f().map(|r| r[i]),
                ..TrajectoryRow::default()
            };
            if let Some(tr) = exact {
                let s = &tr.states()[i];
                row.p1_exact = Some(s.population(Level::One));
                row.p2_exact = Some(s.population(Level::Two));
            }
            if let Some(tr) = rwa {
                let s = &tr.states()[i];
                row.p1_rwa = Some(s.population(Level::One));
                row.p2_rwa = Some(s.population(Level::Two));
                row.relphase_rwa = relative_phase(s).ok();
            }
            row
        })
        .collect()
}

pub fn write_trajectory_csv(
    path: &Path,
    rows: &[TrajectoryRow],
    timestamp: bool,
) -> Result<(), CliError> {
    let mut w = open_csv(path, timestamp)?;
    w.write_record(TRAJECTORY_HEADER)
        .map_err(|e| io_error(path, e))?;
    for row in rows {
        w.write_record(row.record())
            .map_err(|e| io_error(path, e))?;
    }
    finish(w, path)
}

fn reader(path: &Path) -> Result<csv::Reader<File>, CliError> {
    csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_path(path)
        .map_err(|e| io_error(path, e))
}

fn parse_cell(path: &Path, cell: &str) -> Result<Option<f64>, CliError> {
    if cell.is_empty() {
        return Ok(None);
    }
    cell.parse()
        .map(Some)
        .map_err(|e| io_error(path, format!("bad number `{cell}`: {e}")))
}

pub fn read_trajectory_csv(path: &Path) -> Result<Vec<TrajectoryRow>, CliError> {
    let mut rd = reader(path)?;
    let header = rd.headers().map_err(|e| io_error(path, e))?.clone();
    if header.iter().ne(TRAJECTORY_HEADER.iter().copied()) {
        return Err(io_error(path, "unexpected trajectory header"));
    }
    let mut rows = Vec::new();
    for record in rd.records() {
        let record = record.map_err(|e| io_error(path, e))?;
        let cells: Vec<Option<f64>> = record
            .iter()
            .map(|c| parse_cell(path, c))
            .collect::<Result<_, _>>()?;
        let required = |v: Option<f64>| v.ok_or_else(|| io_error(path, "missing t_au or field_au"));
        rows.push(TrajectoryRow {
            t: required(cells[0])?,
            field: required(cells[1])?,
            p1_exact: cells[2],
            p2_exact: cells[3],
            p1_rwa: cells[4],
            p2_rwa: cells[5],
            f_ref: cells[6],
            relphase_rwa: cells[7],
        });
    }
    Ok(rows)
}

/// Header and numeric rows of any CSV written by this crate.
pub type NumericTable = (Vec<String>, Vec<Vec<Option<f64>>>);

/// Reads a CSV of numbers; empty or non-numeric cells become `None`.
pub fn read_numeric_csv(path: &Path) -> Result<NumericTable, CliError> {
    let mut rd = reader(path)?;
    let header = rd
        .headers()
        .map_err(|e| io_error(path, e))?
        .iter()
        .map(String::from)
        .collect();
    let mut rows = Vec::new();
    for record in rd.records() {
        let record = record.map_err(|e| io_error(path, e))?;
        rows.push(
            record
                .iter()
                .map(|c| parse_cell(path, c).ok().flatten())
                .collect(),
        );
    }
    Ok((header, rows))
}

pub fn write_difference_csv(
    path: &Path,
    exact: &Trajectory,
    rwa: &Trajectory,
    timestamp: bool,
) -> Result<(), CliError> {
    let mut w = open_csv(path, timestamp)?;
    w.write_record(DIFFERENCE_HEADER)
        .map_err(|e| io_error(path, e))?;
    for ((t, a), b) in exact.times().iter().zip(exact.states()).zip(rwa.states()) {
        let d1 = a.population(Level::One) - b.population(Level::One);
        let d2 = a.population(Level::Two) - b.population(Level::Two);
        w.write_record([fmt_full(*t), fmt_full(d1), fmt_full(d2)])
            .map_err(|e| io_error(path, e))?;
    }
    finish(w, path)
}

/// Writes arbitrary string rows under `header`.
pub fn write_table_csv(
    path: &Path,
    header: &[&str],
    rows: &[Vec<String>],
    timestamp: bool,
) -> Result<(), CliError> {
    let mut w = open_csv(path, timestamp)?;
    w.write_record(header).map_err(|e| io_error(path, e))?;
    for row in rows {
        w.write_record(row).map_err(|e| io_error(path, e))?;
    }
    finish(w, path)
}

/// Keyed text report: `key = value` lines in insertion order.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Summary {
    entries: Vec<(String, String)>,
}

impl Summary {
    pub fn push(&mut self, key: impl Into<String>, value: impl Into<String>) {
        self.entries.push((key.into(), value.into()));
    }

    pub fn push_num(&mut self, key: impl Into<String>, value: f64) {
        self.push(key, fmt_short(value));
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }

    pub fn render(&self, timestamp: bool) -> String {
        let mut out = String::new();
        if timestamp {
            let secs = SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0);
            out.push_str(&format!("# generated_unix_s = {secs}\n"));
        }
        for (k, v) in &self.entries {
            out.push_str(&format!("{k} = {v}\n"));
        }
        out
    }

    pub fn write(&self, path: &Path, timestamp: bool) -> Result<(), CliError> {
        std::fs::write(path, self.render(timestamp)).map_err(|e| io_error(path, e))
    }
}

/// Parses a keyed text report, ignoring `#` lines.
pub fn read_summary(path: &Path) -> Result<BTreeMap<String, String>, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| io_error(path, e))?;
    Ok(text
        .lines()
        .filter(|l| !l.trim_start().starts_with('#'))
        .filter_map(|l| l.split_once('='))
        .map(|(k, v)| (k.trim().to_string(), v.trim().to_string()))
        .collect())
}

/// Companion gnuplot script for a trajectory file.
pub fn trajectory_gnuplot(csv_name: &str, title: &str) -> String {
    format!(
        "set datafile separator ','\n\
         set datafile commentschars '#'\n\
         set key autotitle columnhead\n\
         set multiplot layout 2,1 title '{title}'\n\
         set ylabel 'E(t) [au]'\n\
         plot '{csv_name}' using 1:2 with lines\n\
         set xlabel 't [au]'\n\
         set ylabel 'population'\n\
         set yrange [0:1]\n\
         plot '{csv_name}' using 1:3 with lines lc rgb 'red', \\\n\
         \x20    '' using 1:4 with lines lc rgb 'green', \\\n\
         \x20    '' using 1:5 with lines dt 2 lc rgb 'red', \\\n\
         \x20    '' using 1:6 with lines dt 2 lc rgb 'green', \\\n\
         \x20    '' using 1:7 with lines lc rgb 'blue'\n\
         unset multiplot\n"
    )
}

/// Companion gnuplot script for a pulse file.
pub fn pulse_gnuplot(csv_name: &str, title: &str) -> String {
    format!(
        "set datafile separator ','\n\
         set datafile commentschars '#'\n\
         set key autotitle columnhead\n\
         set title '{title}'\n\
         set xlabel 't [au]'\n\
         set ylabel 'E(t) [au]'\n\
         plot '{csv_name}' using 1:2 with lines, '' using 1:3 with lines dt 2\n"
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn short_format_keeps_six_digits() {
        assert_eq!(fmt_short(0.999664349907), "0.999664");
        assert_eq!(fmt_short(3.356500920e-4), "0.00033565");
        assert_eq!(fmt_short(1.2899681e-11), "1.28997e-11");
        assert_eq!(fmt_short(-1234567.0), "-1.23457e6");
        assert_eq!(fmt_short(0.0), "0");
    }

    #[test]
    fn summary_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("summary.txt");
        let mut s = Summary::default();
        s.push("frame", "both");
        s.push_num("exact.final_p1", 0.99966435);
        s.write(&path, true).unwrap();
        let back = read_summary(&path).unwrap();
        assert_eq!(back["frame"], "both");
        assert_eq!(back["exact.final_p1"], "0.999664");
        assert_eq!(s.get("frame"), Some("both"));
    }

    fn arb_row() -> impl Strategy<Value = TrajectoryRow> {
        let num =
            proptest::num::f64::NORMAL | proptest::num::f64::SUBNORMAL | proptest::num::f64::ZERO;
        let opt = || proptest::option::of(num);
        (num, num, opt(), opt(), opt(), opt(), opt(), opt()).prop_map(
            |(t, field, a, b, c, d, e, f)| TrajectoryRow {
                t,
                field,
                p1_exact: a,
                p2_exact: b,
                p1_rwa: c,
                p2_rwa: d,
                f_ref: e,
                relphase_rwa: f,
            },
        )
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn trajectory_csv_round_trips_bit_for_bit(
            rows in proptest::collection::vec(arb_row(), 1..20),
            stamp in any::<bool>(),
        ) {
            let dir = tempfile::tempdir().unwrap();
            let path = dir.path().join("traj.csv");
            write_trajectory_csv(&path, &rows, stamp).unwrap();
            let back = read_trajectory_csv(&path).unwrap();
            prop_assert_eq!(back.len(), rows.len());
            for (a, b) in rows.iter().zip(&back) {
                prop_assert_eq!(a.t.to_bits(), b.t.to_bits());
                prop_assert_eq!(a.field.to_bits(), b.field.to_bits());
                let pairs = [
                    (a.p1_exact, b.p1_exact), (a.p2_exact, b.p2_exact),
                    (a.p1_rwa, b.p1_rwa), (a.p2_rwa, b.p2_rwa),
                    (a.f_ref, b.f_ref), (a.relphase_rwa, b.relphase_rwa),
                ];
                for (x, y) in pairs {
                    prop_assert_eq!(x.map(f64::to_bits), y.map(f64::to_bits));
                }
            }
        }
    }
}
