//! Experiments built on the trajectory engine: reproduction of the reference
//! sequences, fixed-vs-movable convergence speed, and initial-condition sweeps.

use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::maps::{LoopDynamics, StepKernel};
use crate::state::{AmplitudePair, InteractionMode, LoopState, SplitterCoefficients, Topology, WeightPair};
use crate::trajectory::{
    evolve, iterate_with, steps_to_converge_with, Convergence, ConvergenceCriterion, Scenario, StepSchedule,
};

/// A published value together with the precision it was printed at.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PrintedValue {
    pub n: usize,
    pub value: f64,
    pub decimals: u32,
    /// Accepted absolute deviation of the computed value.
    pub tolerance: f64,
}

const fn printed(n: usize, value: f64, decimals: u32, tolerance: f64) -> PrintedValue {
    PrintedValue { n, value, decimals, tolerance }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ReferenceSequence {
    pub label: &'static str,
    pub mode: InteractionMode,
    /// `w_left` at step 1; in measurement mode also `a1^2`.
    pub initial_w_left: f64,
    pub printed: &'static [PrintedValue],
    /// Bound on the largest deviation over the sequence.
    pub tolerance: f64,
}

/// The three hand-computed sequences for the both-connected loop.
pub const REFERENCE_SEQUENCES: [ReferenceSequence; 3] = [
    ReferenceSequence {
        label: "unitary-0.9",
        mode: InteractionMode::FixedSplitter,
        initial_w_left: 0.9,
        printed: &[
            printed(2, 0.735, 3, 5e-4),
            printed(3, 0.562, 3, 5e-4),
            printed(4, 0.504, 3, 5e-4),
            printed(5, 0.500, 3, 5e-4),
        ],
        tolerance: 5e-4,
    },
    ReferenceSequence {
        label: "unitary-0.05",
        mode: InteractionMode::FixedSplitter,
        initial_w_left: 0.05,
        printed: &[
            printed(2, 0.84, 2, 5e-3),
            printed(3, 0.65, 2, 5e-3),
            printed(4, 0.524, 3, 5e-4),
            printed(5, 0.5006, 4, 5e-4),
        ],
        tolerance: 5e-3,
    },
    // The printed values drift from the exact recurrence (0.756 vs 0.7552 at
    // step 3); the looser bound accepts that drift and the report flags it.
    ReferenceSequence {
        label: "measure-0.9",
        mode: InteractionMode::MovableSplitter,
        initial_w_left: 0.9,
        printed: &[
            printed(2, 0.820, 3, 3e-3),
            printed(3, 0.7552, 4, 3e-3),
            printed(4, 0.703, 3, 3e-3),
            printed(5, 0.661, 3, 3e-3),
        ],
        tolerance: 3e-3,
    },
];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EntryComparison {
    pub n: usize,
    pub computed: f64,
    pub printed: f64,
    pub decimals: u32,
    pub deviation: f64,
    pub tolerance: f64,
    pub within_tolerance: bool,
    /// The deviation is larger than rounding to `decimals` places explains.
    pub beyond_rounding: bool,
}

impl EntryComparison {
    /// The computed value rounded to the printed precision.
    pub fn computed_display(&self) -> String {
        format!("{:.*}", self.decimals as usize, self.computed)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SequenceComparison {
    pub label: String,
    pub mode: InteractionMode,
    pub initial_w_left: f64,
    pub tolerance: f64,
    pub entries: Vec<EntryComparison>,
    pub max_deviation: f64,
    pub within_tolerance: bool,
    pub rounding_discrepancy: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReproductionReport {
    pub sequences: Vec<SequenceComparison>,
}

impl ReproductionReport {
    pub fn all_within_tolerance(&self) -> bool {
        self.sequences.iter().all(|s| s.within_tolerance)
    }
}

fn reference_scenario(seq: &ReferenceSequence, steps: usize) -> Result<Scenario> {
    let splitter = SplitterCoefficients::from_reflectance(seq.initial_w_left)?;
    Ok(Scenario::from_splitter(seq.mode, Topology::BothConnected, splitter, steps))
}

/// Compares `kernel`'s trajectories against the printed sequences.
pub fn reproduce_reference_sequences_with<K: StepKernel>(kernel: &K) -> Result<ReproductionReport> {
    let mut sequences = Vec::with_capacity(REFERENCE_SEQUENCES.len());
    for seq in &REFERENCE_SEQUENCES {
        let steps = seq.printed.iter().map(|p| p.n).max().unwrap_or(1);
        let trajectory = iterate_with(kernel, &reference_scenario(seq, steps)?, &StepSchedule::empty())?;
        let entries: Vec<EntryComparison> = seq
            .printed
            .iter()
            .map(|p| {
                let computed = trajectory.records[p.n - 1].w_left;
                let deviation = (computed - p.value).abs();
                EntryComparison {
                    n: p.n,
                    computed,
                    printed: p.value,
                    decimals: p.decimals,
                    deviation,
                    tolerance: p.tolerance,
                    within_tolerance: deviation <= p.tolerance,
                    beyond_rounding: deviation > 0.5 * 10f64.powi(-(p.decimals as i32)),
                }
            })
            .collect();
        let max_deviation = entries.iter().map(|e| e.deviation).fold(0.0, f64::max);
        sequences.push(SequenceComparison {
            label: seq.label.to_string(),
            mode: seq.mode,
            initial_w_left: seq.initial_w_left,
            tolerance: seq.tolerance,
            within_tolerance: max_deviation <= seq.tolerance && entries.iter().all(|e| e.within_tolerance),
            rounding_discrepancy: entries.iter().any(|e| e.beyond_rounding),
            max_deviation,
            entries,
        });
    }
    Ok(ReproductionReport { sequences })
}

pub fn reproduce_reference_sequences() -> Result<ReproductionReport> {
    reproduce_reference_sequences_with(&LoopDynamics)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpeedComparison {
    pub w_left_initial: f64,
    pub epsilon: f64,
    pub splitter: SplitterCoefficients,
    pub unitary_steps: Convergence,
    pub measurement_steps: Convergence,
    /// `measurement_steps / unitary_steps` when both converged.
    pub ratio: Option<f64>,
}

/// Steps each mode needs to come within `epsilon` of `(1/2, 1/2)` in the
/// both-connected loop, with the movable splitter's `a1^2` equal to the
/// initial weight.
pub fn compare_modes(w_left_initial: f64, epsilon: f64, max_steps: usize) -> Result<SpeedComparison> {
    let splitter = SplitterCoefficients::from_reflectance(w_left_initial)?;
    compare_modes_with_splitter(w_left_initial, splitter, epsilon, max_steps)
}

/// As [`compare_modes`] with an independently chosen measurement splitter.
pub fn compare_modes_with_splitter(
    w_left_initial: f64,
    splitter: SplitterCoefficients,
    epsilon: f64,
    max_steps: usize,
) -> Result<SpeedComparison> {
    let unitary_start = AmplitudePair::from_left_weight(w_left_initial)?;
    if w_left_initial == 0.0 || w_left_initial == 1.0 {
        return Err(Error::DegenerateInitial(w_left_initial));
    }
    let criterion = ConvergenceCriterion::new(WeightPair::balanced(), epsilon)?;
    let unitary = Scenario::from_splitter(InteractionMode::FixedSplitter, Topology::BothConnected, splitter, max_steps)
        .with_initial(LoopState::Pure(unitary_start));
    let measurement =
        Scenario::from_splitter(InteractionMode::MovableSplitter, Topology::BothConnected, splitter, max_steps)
            .with_initial(LoopState::Mixed(WeightPair::from_left(w_left_initial)?));
    let unitary_steps = steps_to_converge_with(&LoopDynamics, &unitary, &criterion)?;
    let measurement_steps = steps_to_converge_with(&LoopDynamics, &measurement, &criterion)?;
    let ratio = match (unitary_steps.steps(), measurement_steps.steps()) {
        (Some(u), Some(m)) => {
            debug_assert!(w_left_initial == 0.5 || u <= m, "unitary mode slower at w = {w_left_initial}");
            Some(m as f64 / u as f64)
        }
        _ => None,
    };
    Ok(SpeedComparison { w_left_initial, epsilon, splitter, unitary_steps, measurement_steps, ratio })
}

/// Inclusive grid `start, start + step, ...` up to `stop` (with half a step
/// of slack), written `start:stop:step`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub start: f64,
    pub stop: f64,
    pub step: f64,
}

impl GridSpec {
    pub fn new(start: f64, stop: f64, step: f64) -> Result<Self> {
        let finite = start.is_finite() && stop.is_finite() && step.is_finite();
        if !finite || step <= 0.0 || stop < start {
            return Err(Error::InvalidGrid(format!("need start <= stop and step > 0, got {start}:{stop}:{step}")));
        }
        if start < 0.0 || stop > 1.0 {
            return Err(Error::InvalidGrid(format!("values must lie in [0, 1], got {start}:{stop}")));
        }
        Ok(Self { start, stop, step })
    }

    pub fn values(&self) -> Vec<f64> {
        let limit = self.stop + 0.5 * self.step;
        (0..).map(|k| self.start + k as f64 * self.step).take_while(|v| *v <= limit).map(|v| v.min(1.0)).collect()
    }
}

impl FromStr for GridSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        let [start, stop, step] = parts[..] else {
            return Err(Error::InvalidGrid(format!("expected start:stop:step, got '{s}'")));
        };
        let parse = |x: &str| x.trim().parse::<f64>().map_err(|_| Error::InvalidGrid(format!("bad number '{x}'")));
        GridSpec::new(parse(start)?, parse(stop)?, parse(step)?)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub mode: InteractionMode,
    pub topology: Topology,
    /// Drives measurement-mode cells; unused by unitary cells.
    pub splitter: SplitterCoefficients,
    pub target: WeightPair,
    pub epsilon: f64,
    pub max_steps: usize,
}

impl SweepConfig {
    /// Targets the topology's attractor.
    pub fn new(
        mode: InteractionMode,
        topology: Topology,
        splitter: SplitterCoefficients,
        epsilon: f64,
        max_steps: usize,
    ) -> Self {
        Self { mode, topology, splitter, target: topology.attractor(), epsilon, max_steps }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepCell {
    pub w_left_initial: f64,
    pub convergence: Convergence,
    /// Weights at the converged step, or at `max_steps` otherwise.
    pub final_weights: WeightPair,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub config: SweepConfig,
    pub cells: Vec<SweepCell>,
}

impl SweepResult {
    pub fn all_converged(&self) -> bool {
        self.cells.iter().all(|c| c.convergence.steps().is_some())
    }

    pub fn max_steps_taken(&self) -> Option<usize> {
        self.cells.iter().map(|c| c.convergence.steps()).collect::<Option<Vec<_>>>()?.into_iter().max()
    }
}

fn sweep_cell(config: &SweepConfig, criterion: &ConvergenceCriterion, w: f64) -> Result<SweepCell> {
    let initial = match config.mode {
        InteractionMode::FixedSplitter => LoopState::Pure(AmplitudePair::from_left_weight(w)?),
        InteractionMode::MovableSplitter => LoopState::Mixed(WeightPair::from_left(w)?),
    };
    let scenario =
        Scenario::from_splitter(config.mode, config.topology, config.splitter, config.max_steps).with_initial(initial);
    let schedule = StepSchedule::empty();
    let mut last = initial.weights();
    for record in evolve(&LoopDynamics, &scenario, &schedule)? {
        let record = record?;
        last = record.weights();
        if criterion.is_met(&last) {
            return Ok(SweepCell {
                w_left_initial: w,
                convergence: Convergence::Converged { steps: record.n },
                final_weights: last,
            });
        }
    }
    Ok(SweepCell {
        w_left_initial: w,
        convergence: Convergence::NotConverged {
            max_steps: config.max_steps,
            final_distance: criterion.distance(&last),
        },
        final_weights: last,
    })
}

/// Convergence data for each initial `w_left` on the grid. Cells are
/// independent and evaluated in parallel; output order follows the grid.
pub fn sweep_initial_conditions(config: &SweepConfig, grid: &[f64]) -> Result<SweepResult> {
    if let Some(bad) = grid.iter().find(|w| !(0.0..=1.0).contains(*w)) {
        return Err(Error::InvalidGrid(format!("grid value {bad} outside [0, 1]")));
    }
    if grid.windows(2).any(|p| p[1] <= p[0]) {
        return Err(Error::InvalidGrid("grid values must be strictly increasing".into()));
    }
    let criterion = ConvergenceCriterion::new(config.target, config.epsilon)?;
    let cells = grid.par_iter().map(|&w| sweep_cell(config, &criterion, w)).collect::<Result<Vec<_>>>()?;
    Ok(SweepResult { config: *config, cells })
}
