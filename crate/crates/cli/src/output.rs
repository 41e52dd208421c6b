//! Row types and the CSV / JSON writers.
//!
//! CSV output is a header plus one line per record. JSON output is a single
//! object `{ "config", "records", "summary" }`. Floats are written in their
//! shortest round-trip form.

use std::fs::File;
use std::io::{BufWriter, Write};

use fiberloop::Topology;
use serde::{Deserialize, Serialize};

use crate::args::{Format, Output};
use crate::CliError;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryRow {
    pub n: usize,
    pub time: f64,
    pub topology: Topology,
    /// Empty in measurement mode.
    pub a: Option<f64>,
    pub b: Option<f64>,
    pub w_left: f64,
    pub w_right: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReferenceRow {
    pub sequence: String,
    pub n: usize,
    pub printed: f64,
    pub computed: f64,
    pub computed_display: String,
    pub deviation: f64,
    pub tolerance: f64,
    pub within_tolerance: bool,
    pub beyond_rounding: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CompareRow {
    pub w_left_initial: f64,
    pub epsilon: f64,
    pub unitary_steps: Option<usize>,
    pub measurement_steps: Option<usize>,
    pub ratio: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub w_left_initial: f64,
    pub converged: bool,
    pub steps: Option<usize>,
    pub final_w_left: f64,
    pub final_w_right: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct McRow {
    pub n: usize,
    pub w_left: f64,
    pub w_right: f64,
    pub stderr: f64,
    pub analytic_w_left: f64,
    pub z: f64,
    pub pass: bool,
    pub generator: String,
    pub seed: u64,
}

#[derive(Debug, Serialize)]
pub struct Document<'a, C, R, S> {
    pub config: &'a C,
    pub records: &'a [R],
    pub summary: &'a S,
}

pub fn emit<C: Serialize, R: Serialize, S: Serialize>(
    output: &Output,
    doc: Document<'_, C, R, S>,
    stdout: &mut dyn Write,
) -> Result<(), CliError> {
    match &output.out {
        Some(path) => {
            let mut file =
                BufWriter::new(File::create(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?);
            write_doc(output.format, &doc, &mut file)?;
            file.flush().map_err(|e| CliError::Io(e.to_string()))
        }
        None => write_doc(output.format, &doc, stdout),
    }
}

fn write_doc<C: Serialize, R: Serialize, S: Serialize>(
    format: Format,
    doc: &Document<'_, C, R, S>,
    w: &mut dyn Write,
) -> Result<(), CliError> {
    match format {
        Format::Csv => {
            let mut writer = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(w);
            for record in doc.records {
                writer.serialize(record).map_err(|e| CliError::Io(e.to_string()))?;
            }
            writer.flush().map_err(|e| CliError::Io(e.to_string()))
        }
        Format::Json => {
            serde_json::to_writer_pretty(&mut *w, doc).map_err(|e| CliError::Io(e.to_string()))?;
            w.write_all(b"\n").map_err(|e| CliError::Io(e.to_string()))
        }
    }
}
