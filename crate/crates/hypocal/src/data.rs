//! CSV experimental data and curve files.

use std::io::Write;
use std::path::Path;

use hypocal_core::metrics::{Curves, OedometerPoint, TriaxialPoint};
use hypocal_core::{ExperimentalDataset, ExperimentalTest, Trajectory};

use crate::config::{StressConvention, TestEntry};
use crate::error::{CliError, Result};

pub const OEDOMETER_COLUMNS: [&str; 2] = ["T1_kPa", "e"];
pub const TRIAXIAL_COLUMNS: [&str; 3] = ["eps_a", "q_kPa", "eps_v"];
pub const CURVE_COLUMNS: [&str; 7] = ["t", "T1_kPa", "T2_kPa", "e", "eps_a", "q_kPa", "eps_v"];

/// Reads the named columns of a headed CSV file as rows of numbers.
pub fn read_columns<const K: usize>(path: &Path, columns: [&str; K]) -> Result<Vec<[f64; K]>> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    read_columns_str(&text, path, columns)
}

pub fn read_columns_str<const K: usize>(
    text: &str,
    path: &Path,
    columns: [&str; K],
) -> Result<Vec<[f64; K]>> {
    if text.trim().is_empty() {
        return Err(CliError::parse(path, 1, "empty file"));
    }
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let header = reader
        .headers()
        .map_err(|e| CliError::parse(path, 1, e))?
        .clone();
    let mut index = [0usize; K];
    for (slot, name) in index.iter_mut().zip(columns) {
        *slot = header
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| CliError::parse(path, 1, format!("missing column {name}")))?;
    }
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line() as usize);
            CliError::parse(path, line, e)
        })?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        if record.iter().all(str::is_empty) {
            continue;
        }
        let mut row = [0.0; K];
        for (k, &i) in index.iter().enumerate() {
            let field = record.get(i).unwrap_or("");
            row[k] = field.parse().map_err(|_| {
                CliError::parse(
                    path,
                    line,
                    format!("{}: not a number: {field:?}", columns[k]),
                )
            })?;
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(CliError::parse(path, 2, "no data rows"));
    }
    Ok(rows)
}

pub fn load_curves(path: &Path, oedometer: bool, conv: StressConvention) -> Result<Curves<f64>> {
    Ok(if oedometer {
        Curves::Oedometer(
            read_columns(path, OEDOMETER_COLUMNS)?
                .into_iter()
                .map(|[t1, e]| OedometerPoint {
                    t1: conv.normalize(t1),
                    e,
                })
                .collect(),
        )
    } else {
        Curves::Triaxial(
            read_columns(path, TRIAXIAL_COLUMNS)?
                .into_iter()
                .map(|[eps_a, q, eps_v]| TriaxialPoint { eps_a, q, eps_v })
                .collect(),
        )
    })
}

/// Loads and validates the data of every test.
pub fn load_dataset(
    tests: &[TestEntry],
    conv: StressConvention,
) -> Result<ExperimentalDataset<f64>> {
    let mut out = Vec::with_capacity(tests.len());
    for t in tests {
        let path = t
            .data
            .as_ref()
            .ok_or_else(|| CliError::validation(format!("test {}: missing data file", t.name)))?;
        out.push(ExperimentalTest {
            name: t.name.clone(),
            spec: t.spec,
            curves: load_curves(path, t.spec.is_oedometer(), conv)?,
        });
    }
    ExperimentalDataset::new(out).map_err(CliError::validation)
}

fn create(path: &Path) -> Result<csv::Writer<std::fs::File>> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    }
    csv::Writer::from_path(path).map_err(|e| CliError::io(path, e.into()))
}

fn write_rows<I, R>(path: &Path, header: &[&str], rows: I) -> Result<()>
where
    I: IntoIterator<Item = R>,
    R: IntoIterator<Item = f64>,
{
    let mut w = create(path)?;
    let io = |e: csv::Error| CliError::io(path, e.into());
    w.write_record(header).map_err(io)?;
    for row in rows {
        w.write_record(row.into_iter().map(|x| x.to_string()))
            .map_err(io)?;
    }
    w.flush().map_err(|e| CliError::io(path, e))
}

/// Writes a simulated trajectory with every derived quantity.
pub fn write_curve(path: &Path, traj: &Trajectory<f64>) -> Result<()> {
    write_rows(
        path,
        &CURVE_COLUMNS,
        (0..traj.len()).map(|i| {
            let s = &traj.samples[i];
            [
                s.t,
                s.t1,
                s.t2,
                s.e,
                traj.eps_a(i),
                traj.q(i),
                traj.eps_v(i),
            ]
        }),
    )
}

/// Writes experimental curves in the input format (signed stresses).
pub fn write_data(path: &Path, curves: &Curves<f64>) -> Result<()> {
    match curves {
        Curves::Oedometer(p) => write_rows(path, &OEDOMETER_COLUMNS, p.iter().map(|p| [p.t1, p.e])),
        Curves::Triaxial(p) => write_rows(
            path,
            &TRIAXIAL_COLUMNS,
            p.iter().map(|p| [p.eps_a, p.q, p.eps_v]),
        ),
    }
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    }
    let mut f = std::fs::File::create(path).map_err(|e| CliError::io(path, e))?;
    f.write_all(text.as_bytes())
        .map_err(|e| CliError::io(path, e))
}
