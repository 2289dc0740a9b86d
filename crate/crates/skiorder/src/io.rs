//! File formats: trajectory/curve/grid CSV, metrics JSON, ensemble tables,
//! and PGM image export.
//!
//! Every floating-point value is serialized with 17 significant digits
//! (`{:.16e}`), which round-trips 64-bit floats exactly and keeps repeated
//! runs byte-identical.

use std::io::{BufRead, Write};
use std::path::Path;

use serde::Serialize;

use crate::ensemble::{metric_value, TrialRecord, METRIC_NAMES};
use crate::error::{Error, Result};
use crate::lambda_ca::CATrace;
use crate::metrics::MetricsReport;
use crate::svknee::SingularCurve;
use crate::trajmat::SignalMatrix;

/// Round-trip-safe float formatting: 17 significant digits.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

struct SigDigitsFormatter;

impl serde_json::ser::Formatter for SigDigitsFormatter {
    fn write_f64<W>(&mut self, writer: &mut W, value: f64) -> std::io::Result<()>
    where
        W: ?Sized + std::io::Write,
    {
        write!(writer, "{}", fmt_f64(value))
    }
}

/// Serialize any value to JSON with 17-significant-digit floats.
pub fn to_json_string<T: Serialize>(value: &T) -> Result<String> {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, SigDigitsFormatter);
    value
        .serialize(&mut ser)
        .map_err(|e| Error::CsvStructure(format!("json serialization failed: {e}")))?;
    Ok(String::from_utf8(buf).expect("serde_json emits utf-8"))
}

/// The metrics JSON object. With a defined knee the object holds exactly the
/// thirteen metric keys; with an undefined knee (`rank < 3`) the knee-derived
/// keys are replaced by `"knee": "undefined"` and only the curve-level fields
/// remain.
pub fn metrics_json(report: &MetricsReport) -> String {
    let mut s = String::from("{");
    match &report.knee {
        Some(k) => {
            s += &format!(
                "\"normalized_sv_at_knee\":{},",
                fmt_f64(k.normalized_sv_at_knee)
            );
            s += &format!(
                "\"fraction_outside_bounds\":{},",
                fmt_f64(report.fraction_outside_bounds)
            );
            s += &format!(
                "\"knee_outside_bounds\":{},",
                if k.knee_outside_bounds { 1 } else { 0 }
            );
            s += &format!(
                "\"normalized_knee_position\":{},",
                fmt_f64(k.normalized_knee_position)
            );
            s += &format!("\"area_after_knee\":{},", fmt_f64(k.area_after_knee));
            s += &format!("\"knee_angle_deg\":{},", fmt_f64(k.knee_angle_deg));
            s += &format!("\"curvature\":{},", fmt_f64(k.curvature));
            s += &format!("\"knee_vector_ratio\":{},", fmt_f64(k.knee_vector_ratio));
            s += &format!("\"kappa\":{},", fmt_f64(report.kappa));
            s += &format!("\"bound_lower\":{},", fmt_f64(report.bounds.lower));
            s += &format!("\"bound_upper\":{},", fmt_f64(report.bounds.upper));
            s += &format!("\"knee_index\":{},", k.geometry.knee_index);
            s += &format!("\"rank\":{}", report.rank);
        }
        None => {
            s += "\"knee\":\"undefined\",";
            s += &format!(
                "\"fraction_outside_bounds\":{},",
                fmt_f64(report.fraction_outside_bounds)
            );
            s += &format!("\"kappa\":{},", fmt_f64(report.kappa));
            s += &format!("\"bound_lower\":{},", fmt_f64(report.bounds.lower));
            s += &format!("\"bound_upper\":{},", fmt_f64(report.bounds.upper));
            s += &format!("\"rank\":{}", report.rank);
        }
    }
    s += "}";
    s
}

/// Read a trajectory CSV: one row per signal, one column per timestep.
/// A first line starting with `label,` marks labeled mode, where each data
/// row begins with a signal label.
pub fn read_trajectory_csv<R: BufRead>(reader: R) -> Result<SignalMatrix> {
    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut labels: Vec<String> = Vec::new();
    let mut labeled = false;
    let mut width: Option<usize> = None;

    for (line_idx, line) in reader.lines().enumerate() {
        let line = line?;
        let trimmed = line.trim_end_matches(['\r', '\n']);
        if trimmed.is_empty() {
            continue;
        }
        let fields: Vec<&str> = trimmed.split(',').collect();
        if line_idx == 0 && fields[0].trim() == "label" {
            labeled = true;
            width = Some(fields.len() - 1);
            continue;
        }
        let row_no = line_idx + 1;
        let (label, data) = if labeled {
            (Some(fields[0].trim().to_string()), &fields[1..])
        } else {
            (None, &fields[..])
        };
        let expected = *width.get_or_insert(data.len());
        if data.len() != expected {
            return Err(Error::CsvStructure(format!(
                "row {row_no} has {} value columns, expected {expected}",
                data.len()
            )));
        }
        let mut row = Vec::with_capacity(data.len());
        for (j, cell) in data.iter().enumerate() {
            let col_no = j + 1 + usize::from(labeled);
            let v: f64 = cell.trim().parse().map_err(|e| Error::ParseCell {
                row: row_no,
                col: col_no,
                msg: format!("'{}': {e}", cell.trim()),
            })?;
            if !v.is_finite() {
                return Err(Error::ParseCell {
                    row: row_no,
                    col: col_no,
                    msg: format!("non-finite value '{}'", cell.trim()),
                });
            }
            row.push(v);
        }
        if let Some(l) = label {
            labels.push(l);
        }
        rows.push(row);
    }
    SignalMatrix::from_rows(rows, if labeled { Some(labels) } else { None })
}

pub fn read_trajectory_csv_path(path: impl AsRef<Path>) -> Result<SignalMatrix> {
    let file = std::fs::File::open(path)?;
    read_trajectory_csv(std::io::BufReader::new(file))
}

/// Write a trajectory CSV; with `with_labels` a `label,t0,t1,...` header and
/// per-row labels are included.
pub fn write_trajectory_csv<W: Write>(
    matrix: &SignalMatrix,
    mut w: W,
    with_labels: bool,
) -> Result<()> {
    let (m, n) = (matrix.values.nrows(), matrix.values.ncols());
    if with_labels {
        write!(w, "label")?;
        for t in 0..n {
            write!(w, ",t{t}")?;
        }
        writeln!(w)?;
    }
    for i in 0..m {
        if with_labels {
            write!(w, "{},", matrix.row_labels[i])?;
        }
        for j in 0..n {
            if j > 0 {
                write!(w, ",")?;
            }
            write!(w, "{}", fmt_f64(matrix.values[(i, j)]))?;
        }
        writeln!(w)?;
    }
    Ok(())
}

/// Write the raw and normalized singular-value curve:
/// `index,sigma,x_norm,y_norm` with `x = i/rank`, `y = sigma_i/sigma_1`.
pub fn write_curve_csv<W: Write>(curve: &SingularCurve, mut w: W) -> Result<()> {
    writeln!(w, "index,sigma,x_norm,y_norm")?;
    let s1 = curve.sigmas[0];
    for (idx, &s) in curve.sigmas.iter().enumerate() {
        let i = idx + 1;
        writeln!(
            w,
            "{i},{},{},{}",
            fmt_f64(s),
            fmt_f64(i as f64 / curve.rank as f64),
            fmt_f64(s / s1)
        )?;
    }
    Ok(())
}

/// Write an automaton grid as integer CSV, one row per cell.
pub fn write_grid_csv<W: Write>(trace: &CATrace, mut w: W) -> Result<()> {
    for i in 0..trace.n_cells() {
        for j in 0..trace.n_steps() {
            if j > 0 {
                write!(w, ",")?;
            }
            write!(w, "{}", trace.grid[(i, j)])?;
        }
        writeln!(w)?;
    }
    Ok(())
}

/// Export the grid as an 8-bit ASCII PGM, one image row per generation
/// (time runs downward as in the reference figures).
pub fn write_grid_pgm<W: Write>(trace: &CATrace, mut w: W) -> Result<()> {
    let (cells, steps) = (trace.n_cells(), trace.n_steps());
    writeln!(w, "P2")?;
    writeln!(w, "{cells} {steps}")?;
    writeln!(w, "255")?;
    let denom = (trace.states - 1).max(1) as u32;
    for t in 0..steps {
        for c in 0..cells {
            if c > 0 {
                write!(w, " ")?;
            }
            write!(w, "{}", trace.grid[(c, t)] as u32 * 255 / denom)?;
        }
        writeln!(w)?;
    }
    Ok(())
}

const ENSEMBLE_HEADER: &str = "model,trial,seed,normalized_sv_at_knee,fraction_outside_bounds,\
knee_outside_bounds,normalized_knee_position,area_after_knee,knee_angle_deg,curvature,\
knee_vector_ratio,kappa,bound_lower,bound_upper,knee_index,rank";

/// One row per trial with every metrics-JSON key as a column. Knee-undefined
/// trials leave the knee-derived cells empty; failed trials leave all metric
/// cells empty.
pub fn write_ensemble_csv<W: Write>(records: &[TrialRecord], mut w: W) -> Result<()> {
    writeln!(w, "{ENSEMBLE_HEADER}")?;
    for r in records {
        write!(w, "{},{},{}", r.model.label(), r.trial, r.seed)?;
        match &r.outcome {
            Ok(rep) => {
                for name in METRIC_NAMES {
                    match (name, metric_value(rep, name)) {
                        ("knee_outside_bounds", Some(v)) => write!(w, ",{}", v as i64)?,
                        (_, Some(v)) => write!(w, ",{}", fmt_f64(v))?,
                        (_, None) => write!(w, ",")?,
                    }
                }
                write!(w, ",{}", fmt_f64(rep.kappa))?;
                write!(w, ",{}", fmt_f64(rep.bounds.lower))?;
                write!(w, ",{}", fmt_f64(rep.bounds.upper))?;
                match &rep.knee {
                    Some(k) => write!(w, ",{}", k.geometry.knee_index)?,
                    None => write!(w, ",")?,
                }
                writeln!(w, ",{}", rep.rank)?;
            }
            Err(_) => {
                // 13 empty metric cells.
                writeln!(w, "{}", ",".repeat(13))?;
            }
        }
    }
    Ok(())
}

/// One row per (model, metric) with the distribution summary of that metric
/// over the model's successful trials. Models appear in first-encounter
/// order; metrics with no defined values are skipped.
pub fn write_summary_csv<W: Write>(records: &[TrialRecord], mut w: W) -> Result<()> {
    writeln!(w, "model,metric,mean,median,std_sample,q1,q3,iqr,n")?;
    let mut models = Vec::new();
    for r in records {
        if !models.contains(&r.model) {
            models.push(r.model);
        }
    }
    for model in models {
        for name in METRIC_NAMES {
            let values = crate::ensemble::metric_values(records, model, name);
            if values.is_empty() {
                continue;
            }
            let s = crate::ensemble::summarize(&values)?;
            writeln!(
                w,
                "{},{},{},{},{},{},{},{},{}",
                model.label(),
                name,
                fmt_f64(s.mean),
                fmt_f64(s.median),
                fmt_f64(s.std_sample),
                fmt_f64(s.q1),
                fmt_f64(s.q3),
                fmt_f64(s.iqr),
                s.n
            )?;
        }
    }
    Ok(())
}
