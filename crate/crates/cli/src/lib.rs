//! Command-line front end for `fiberloop`.
//!
//! Exit codes: 0 success, 1 numeric or I/O failure, 2 invalid configuration,
//! 3 reproduction regression (`paper` found a value outside tolerance).

pub mod args;
pub mod output;

use std::ffi::OsString;
use std::io::Write;

use clap::Parser;
use fiberloop::analysis::{self, GridSpec, SweepConfig};
use fiberloop::oracle::{self, GENERATOR};
use fiberloop::trajectory::iterate_with;
use fiberloop::{
    Error, InteractionMode, LoopDynamics, Scenario, SplitterCoefficients, StepKernel, StepSchedule, Topology,
    TopologySwitch,
};
use serde::Serialize;
use thiserror::Error;

use crate::args::{Cli, Command, CompareArgs, Initial, McArgs, PaperArgs, RunArgs, SweepArgs};
use crate::output::{emit, CompareRow, Document, McRow, ReferenceRow, SweepRow, TrajectoryRow};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error("numeric error: {0}")]
    Numeric(String),
    #[error("reproduction regression: {0}")]
    Regression(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Numeric(_) | CliError::Io(_) => 1,
            CliError::Config(_) => 2,
            CliError::Regression(_) => 3,
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::NumericDomain(_) | Error::InvalidStep(_) | Error::LengthMismatch { .. } => {
                CliError::Numeric(e.to_string())
            }
            _ => CliError::Config(e.to_string()),
        }
    }
}

/// Parses `args` (including the program name) and runs the command.
pub fn execute<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    execute_with_kernel(&LoopDynamics, args, stdout, stderr)
}

/// Like [`execute`] with the step maps of `run` and `paper` supplied by
/// `kernel`.
pub fn execute_with_kernel<K, I, T>(kernel: &K, args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    K: StepKernel,
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let rendered = e.render();
            let _ = if e.use_stderr() { write!(stderr, "{rendered}") } else { write!(stdout, "{rendered}") };
            return e.exit_code();
        }
    };
    let result = match cli.command {
        Command::Run(a) => cmd_run(kernel, &a, stdout),
        Command::Paper(a) => cmd_paper(kernel, &a, stdout),
        Command::Compare(a) => cmd_compare(&a, stdout),
        Command::Sweep(a) => cmd_sweep(&a, stdout),
        Command::Mc(a) => cmd_mc(&a, stdout),
    };
    match result {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            e.exit_code()
        }
    }
}

fn check_probability(field: &str, value: f64) -> Result<f64, CliError> {
    if value.is_finite() && (0.0..=1.0).contains(&value) {
        Ok(value)
    } else {
        Err(CliError::Config(format!("{field} out of range: {value} not in [0, 1]")))
    }
}

/// The first-step left weight, which is also the splitter's `a1^2`.
fn resolve_initial(initial: &Initial) -> Result<f64, CliError> {
    match (initial.wl1, initial.a1sq) {
        (Some(w), None) => check_probability("w_left_initial", w),
        (None, Some(r)) => check_probability("a1_squared", r),
        _ => Err(CliError::Config("exactly one of --wl1 (w_left_initial) or --a1sq (a1_squared) is required".into())),
    }
}

fn positive(field: &str, value: f64) -> Result<f64, CliError> {
    if value.is_finite() && value > 0.0 {
        Ok(value)
    } else {
        Err(CliError::Config(format!("{field} must be positive, got {value}")))
    }
}

fn at_least_one(field: &str, value: usize) -> Result<usize, CliError> {
    if value >= 1 {
        Ok(value)
    } else {
        Err(CliError::Config(format!("{field} must be at least 1")))
    }
}

#[derive(Serialize)]
struct RunConfigOut {
    command: &'static str,
    mode: InteractionMode,
    topology: Topology,
    w_left_initial: Option<f64>,
    a1_squared: Option<f64>,
    steps: usize,
    period: f64,
    epsilon: Option<f64>,
    schedule: Vec<TopologySwitch>,
}

#[derive(Serialize)]
struct RunSummary {
    steps: usize,
    final_w_left: f64,
    final_w_right: f64,
    /// First step within `epsilon` of the attractor of the topology in effect.
    converged_at: Option<usize>,
}

fn cmd_run<K: StepKernel>(kernel: &K, a: &RunArgs, stdout: &mut dyn Write) -> Result<(), CliError> {
    let p = resolve_initial(&a.initial)?;
    let steps = at_least_one("steps", a.steps)?;
    let period = positive("period", a.period)?;
    let epsilon = a.eps.map(|e| positive("epsilon", e)).transpose()?;
    let mode = InteractionMode::from(a.mode);
    let topology = Topology::from(a.topology);
    let splitter = SplitterCoefficients::from_reflectance(p)?;
    let scenario = Scenario::from_splitter(mode, topology, splitter, steps).with_period(period);
    let schedule = StepSchedule::new(a.switches.clone())?;
    let trajectory = iterate_with(kernel, &scenario, &schedule)?;

    let rows: Vec<TrajectoryRow> = trajectory
        .records
        .iter()
        .map(|r| {
            let amplitudes = r.amplitudes();
            TrajectoryRow {
                n: r.n,
                time: r.time,
                topology: r.topology,
                a: amplitudes.map(|x| x.a_left()),
                b: amplitudes.map(|x| x.b_right()),
                w_left: r.w_left,
                w_right: r.w_right,
            }
        })
        .collect();
    let last = trajectory.last().expect("at least one step");
    let converged_at = epsilon.and_then(|eps| {
        trajectory.records.iter().find(|r| r.weights().distance(&r.topology.attractor()) < eps).map(|r| r.n)
    });
    let config = RunConfigOut {
        command: "run",
        mode,
        topology,
        w_left_initial: a.initial.wl1,
        a1_squared: a.initial.a1sq,
        steps,
        period,
        epsilon,
        schedule: a.switches.clone(),
    };
    let summary = RunSummary { steps, final_w_left: last.w_left, final_w_right: last.w_right, converged_at };
    emit(&a.output, Document { config: &config, records: &rows, summary: &summary }, stdout)
}

#[derive(Serialize)]
struct PaperConfigOut {
    command: &'static str,
}

#[derive(Serialize)]
struct SequenceSummary {
    sequence: String,
    max_deviation: f64,
    tolerance: f64,
    within_tolerance: bool,
    rounding_discrepancy: bool,
}

#[derive(Serialize)]
struct PaperSummary {
    sequences: Vec<SequenceSummary>,
    all_within_tolerance: bool,
}

fn cmd_paper<K: StepKernel>(kernel: &K, a: &PaperArgs, stdout: &mut dyn Write) -> Result<(), CliError> {
    let report = analysis::reproduce_reference_sequences_with(kernel)?;
    let rows: Vec<ReferenceRow> = report
        .sequences
        .iter()
        .flat_map(|s| {
            s.entries.iter().map(|e| ReferenceRow {
                sequence: s.label.clone(),
                n: e.n,
                printed: e.printed,
                computed: e.computed,
                computed_display: e.computed_display(),
                deviation: e.deviation,
                tolerance: e.tolerance,
                within_tolerance: e.within_tolerance,
                beyond_rounding: e.beyond_rounding,
            })
        })
        .collect();
    let summary = PaperSummary {
        sequences: report
            .sequences
            .iter()
            .map(|s| SequenceSummary {
                sequence: s.label.clone(),
                max_deviation: s.max_deviation,
                tolerance: s.tolerance,
                within_tolerance: s.within_tolerance,
                rounding_discrepancy: s.rounding_discrepancy,
            })
            .collect(),
        all_within_tolerance: report.all_within_tolerance(),
    };
    emit(
        &a.output,
        Document { config: &PaperConfigOut { command: "paper" }, records: &rows, summary: &summary },
        stdout,
    )?;
    if report.all_within_tolerance() {
        Ok(())
    } else {
        let failed: Vec<&str> =
            report.sequences.iter().filter(|s| !s.within_tolerance).map(|s| s.label.as_str()).collect();
        Err(CliError::Regression(format!("sequences outside tolerance: {}", failed.join(", "))))
    }
}

#[derive(Serialize)]
struct CompareConfigOut {
    command: &'static str,
    w_left_initial: f64,
    epsilon: f64,
    max_steps: usize,
}

#[derive(Serialize)]
struct CompareSummary {
    unitary_faster: Option<bool>,
}

fn cmd_compare(a: &CompareArgs, stdout: &mut dyn Write) -> Result<(), CliError> {
    let w = check_probability("w_left_initial", a.wl1)?;
    let epsilon = positive("epsilon", a.eps)?;
    let max_steps = at_least_one("steps", a.steps)?;
    let cmp = analysis::compare_modes(w, epsilon, max_steps)?;
    let (u, m) = (cmp.unitary_steps.steps(), cmp.measurement_steps.steps());
    let rows = [CompareRow { w_left_initial: w, epsilon, unitary_steps: u, measurement_steps: m, ratio: cmp.ratio }];
    let summary = CompareSummary { unitary_faster: u.zip(m).map(|(u, m)| u < m) };
    let config = CompareConfigOut { command: "compare", w_left_initial: w, epsilon, max_steps };
    emit(&a.output, Document { config: &config, records: &rows, summary: &summary }, stdout)
}

#[derive(Serialize)]
struct SweepSummary {
    cells: usize,
    all_converged: bool,
    max_steps_taken: Option<usize>,
}

fn cmd_sweep(a: &SweepArgs, stdout: &mut dyn Write) -> Result<(), CliError> {
    let grid: GridSpec = a.grid.parse()?;
    let epsilon = positive("epsilon", a.eps)?;
    let max_steps = at_least_one("steps", a.steps)?;
    let mode = InteractionMode::from(a.mode);
    let splitter = match (mode, a.a1sq) {
        (_, Some(r)) => SplitterCoefficients::from_reflectance(check_probability("a1_squared", r)?)?,
        (InteractionMode::FixedSplitter, None) => SplitterCoefficients::symmetric(),
        (InteractionMode::MovableSplitter, None) => {
            return Err(CliError::Config("--a1sq (a1_squared) is required for measure-mode sweeps".into()))
        }
    };
    let config = SweepConfig::new(mode, a.topology.into(), splitter, epsilon, max_steps);
    let result = analysis::sweep_initial_conditions(&config, &grid.values())?;
    let rows: Vec<SweepRow> = result
        .cells
        .iter()
        .map(|c| SweepRow {
            w_left_initial: c.w_left_initial,
            converged: c.convergence.steps().is_some(),
            steps: c.convergence.steps(),
            final_w_left: c.final_weights.w_left(),
            final_w_right: c.final_weights.w_right(),
        })
        .collect();
    let summary = SweepSummary {
        cells: rows.len(),
        all_converged: result.all_converged(),
        max_steps_taken: result.max_steps_taken(),
    };
    emit(&a.output, Document { config: &result.config, records: &rows, summary: &summary }, stdout)
}

#[derive(Serialize)]
struct McConfigOut {
    command: &'static str,
    mode: InteractionMode,
    topology: Topology,
    a1_squared: f64,
    steps: usize,
    paths: usize,
    seed: u64,
    generator: &'static str,
    sigma_bound: f64,
}

#[derive(Serialize)]
struct McSummary {
    all_pass: bool,
    max_z: f64,
}

fn cmd_mc(a: &McArgs, stdout: &mut dyn Write) -> Result<(), CliError> {
    let mode = InteractionMode::from(a.mode);
    oracle::ensure_sampling_mode(mode)?;
    let p = resolve_initial(&a.initial)?;
    let steps = at_least_one("steps", a.steps)?;
    let paths = at_least_one("paths", a.paths)?;
    let sigma = positive("sigma", a.sigma)?;
    let topology = Topology::from(a.topology);
    let splitter = SplitterCoefficients::from_reflectance(p)?;

    let estimate = oracle::ensemble_frequencies(&splitter, topology, steps, paths, a.seed)?;
    let scenario = Scenario::from_splitter(mode, topology, splitter, steps);
    let analytic: Vec<_> =
        fiberloop::iterate(&scenario, &StepSchedule::empty())?.records.iter().map(|r| r.weights()).collect();
    let report = oracle::agreement_report(&estimate, &analytic, sigma)?;
    let rows: Vec<McRow> = estimate
        .steps
        .iter()
        .zip(&report.steps)
        .map(|(f, s)| McRow {
            n: f.n,
            w_left: f.w_left,
            w_right: f.w_right,
            stderr: f.stderr,
            analytic_w_left: s.analytic,
            z: s.z,
            pass: s.pass,
            generator: GENERATOR.to_string(),
            seed: a.seed,
        })
        .collect();
    let config = McConfigOut {
        command: "mc",
        mode,
        topology,
        a1_squared: p,
        steps,
        paths,
        seed: a.seed,
        generator: GENERATOR,
        sigma_bound: sigma,
    };
    let summary =
        McSummary { all_pass: report.all_pass(), max_z: report.steps.iter().map(|s| s.z).fold(0.0, f64::max) };
    emit(&a.output, Document { config: &config, records: &rows, summary: &summary }, stdout)
}
