//! Deterministic simulator for a photon circulating through a beam splitter
//! whose two output ports are fed back by fiber loops.
//!
//! Each period `T` the photon meets the splitter again. With a fixed splitter
//! the photon stays in a pure superposition `a |1> + b |0>` and the loop map
//! drives it to equal weights `(1/2, 1/2)` within a handful of passes,
//! whatever the splitter's own coefficients. With a movable splitter every
//! pass is a measurement, the state is a classical mixture, and the same
//! equilibrium is approached geometrically, which is much slower. Closing one
//! loop on itself ("half-connected") makes that fiber a trap: the photon ends
//! up there with certainty.
//!
//! Modules:
//!
//! * [`state`]: amplitude pairs, weight pairs, splitter coefficients,
//!   topology and mode.
//! * [`maps`]: the six step maps, their fixed points, and the closed form of
//!   the measuring both-connected loop.
//! * [`trajectory`]: iteration, topology switching schedules, convergence
//!   detection.
//! * [`oracle`]: Monte Carlo sampling of single photons in measurement mode.
//! * [`analysis`]: reproduction tables, mode speed comparison, sweeps.

pub mod analysis;
pub mod error;
pub mod maps;
pub mod oracle;
pub mod state;
pub mod trajectory;

pub use error::{Error, Result};
pub use maps::{
    closed_form_measure_both, fixed_points, step_measure_both, step_measure_left_half, step_measure_right_half,
    step_unitary_both, step_unitary_left_half, step_unitary_right_half, FixedPoint, LoopDynamics, Stability,
    StepKernel, StepMap,
};
pub use state::{
    amplitudes_from_left_weight, validate_amplitudes, validate_weights, weights_of, AmplitudePair, InteractionMode,
    LoopState, SplitterCoefficients, Topology, Violation, ViolationKind, WeightPair,
};
pub use trajectory::{
    iterate, run_switching_experiment, steps_to_converge, Convergence, ConvergenceCriterion, Record, Scenario,
    StepSchedule, TopologySwitch, Trajectory,
};
