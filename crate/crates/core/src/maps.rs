//! Single-interaction step maps for the three loop topologies.
//!
//! Fixed-splitter (unitary-mode) maps act on amplitudes and are written out
//! exactly as the loop recurrences, including their nonlinear normalizing
//! denominators. They are *not* a linear 2x2 splitter matrix: the output of
//! `step_unitary_both` at `(a, b)` is `(1, 2ab) / sqrt(1 + 4a^2 b^2)`. After the
//! first interaction these maps depend on the current state only.
//!
//! Movable-splitter (measurement-mode) maps act on mixture weights and are
//! two-state Markov chains driven by `a1^2` and `b1^2`:
//!
//! ```text
//! both-connected        right-half            left-half
//! [a1^2  b1^2]          [a1^2  0]             [1  a1^2]
//! [b1^2  a1^2]          [b1^2  1]             [0  b1^2]
//! ```
//!
//! acting on the column `(w_left, w_right)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::state::{AmplitudePair, InteractionMode, LoopState, SplitterCoefficients, Topology, WeightPair};

/// Smallest denominator the half-connected unitary maps accept.
pub const MIN_DENOMINATOR: f64 = 1e-30;

/// Both loops connected, fixed splitter.
pub fn step_unitary_both(state: AmplitudePair) -> AmplitudePair {
    let (a, b) = (state.a_left(), state.b_right());
    // `a * b` commutes exactly, so swapping the inputs gives the same bits
    let ab = a * b;
    let denom = (1.0 + 4.0 * ab * ab).sqrt();
    AmplitudePair::from_raw(1.0 / denom, 2.0 * ab / denom)
}

/// Right loop closed on itself, fixed splitter.
pub fn step_unitary_right_half(state: AmplitudePair) -> Result<AmplitudePair> {
    let (a, b) = (state.a_left(), state.b_right());
    let (left, right) = half_connected(a, b)?;
    Ok(AmplitudePair::from_raw(left, right))
}

/// Left loop closed on itself, fixed splitter. Mirror image of
/// [`step_unitary_right_half`] under `a <-> b`.
pub fn step_unitary_left_half(state: AmplitudePair) -> Result<AmplitudePair> {
    let (a, b) = (state.a_left(), state.b_right());
    let (right, left) = half_connected(b, a)?;
    Ok(AmplitudePair::from_raw(left, right))
}

// `open` is the amplitude in the loop still attached to the splitter,
// `closed` the one in the loop that captures the photon.
fn half_connected(open: f64, closed: f64) -> Result<(f64, f64)> {
    let open_sq = open * open;
    let returned = closed * (1.0 + open);
    let denom = (open_sq * open_sq + returned * returned).sqrt();
    if denom.is_nan() || denom < MIN_DENOMINATOR {
        return Err(Error::NumericDomain(format!(
            "half-connected denominator {denom:e} below {MIN_DENOMINATOR:e} at ({open}, {closed})"
        )));
    }
    Ok((open_sq / denom, returned / denom))
}

/// Both loops connected, movable splitter:
/// `w_left' = a1^2 w_left + b1^2 w_right`, `w_right' = 1 - w_left'`.
pub fn step_measure_both(weights: WeightPair, splitter: &SplitterCoefficients) -> WeightPair {
    let (r, t) = (splitter.reflectance(), splitter.transmittance());
    let w_left = r * weights.w_left() + t * weights.w_right();
    debug_assert!(
        (t * weights.w_left() + r * weights.w_right() - (1.0 - w_left)).abs() <= 1e-15,
        "transition-matrix and complement forms disagree"
    );
    WeightPair::from_raw(w_left, 1.0 - w_left)
}

/// Right loop closed, movable splitter. The right fiber is absorbing.
pub fn step_measure_right_half(weights: WeightPair, splitter: &SplitterCoefficients) -> WeightPair {
    let (stay, leak) = absorbing(weights.w_left(), weights.w_right(), splitter.reflectance(), splitter.transmittance());
    WeightPair::from_raw(stay, leak)
}

/// Left loop closed, movable splitter. The left fiber is absorbing.
pub fn step_measure_left_half(weights: WeightPair, splitter: &SplitterCoefficients) -> WeightPair {
    let (stay, leak) = absorbing(weights.w_right(), weights.w_left(), splitter.transmittance(), splitter.reflectance());
    WeightPair::from_raw(leak, stay)
}

// `open` is the weight still returning to the splitter; `sink` the absorbing one.
fn absorbing(open: f64, sink: f64, keep: f64, lose: f64) -> (f64, f64) {
    (keep * open, lose * open + sink)
}

/// `w_left` after `n` measuring interactions in the both-connected loop,
/// starting from `w_left_1` at `n = 1`:
/// `0.5 + (w_left_1 - 0.5) (a1^2 - b1^2)^(n - 1)`.
pub fn closed_form_measure_both(w_left_1: f64, splitter: &SplitterCoefficients, n: usize) -> Result<f64> {
    if n < 1 {
        return Err(Error::InvalidStep(n));
    }
    if !(0.0..=1.0).contains(&w_left_1) {
        return Err(Error::OutOfRange { field: "w_left", value: w_left_1 });
    }
    let contraction = splitter.reflectance() - splitter.transmittance();
    let exponent = i32::try_from(n - 1).map_err(|_| Error::InvalidStep(n))?;
    Ok(0.5 + (w_left_1 - 0.5) * contraction.powi(exponent))
}

/// Dispatches one interaction by topology. The trajectory engine is generic
/// over this so alternative dynamics can be substituted in checks.
pub trait StepKernel {
    fn unitary(&self, topology: Topology, state: AmplitudePair) -> Result<AmplitudePair>;

    fn measure(&self, topology: Topology, weights: WeightPair, splitter: &SplitterCoefficients) -> WeightPair;

    fn apply(&self, topology: Topology, state: LoopState, splitter: &SplitterCoefficients) -> Result<LoopState> {
        Ok(match state {
            LoopState::Pure(amplitudes) => LoopState::Pure(self.unitary(topology, amplitudes)?),
            LoopState::Mixed(weights) => LoopState::Mixed(self.measure(topology, weights, splitter)),
        })
    }
}

/// The loop recurrences implemented in this module.
#[derive(Clone, Copy, Debug, Default)]
pub struct LoopDynamics;

impl StepKernel for LoopDynamics {
    fn unitary(&self, topology: Topology, state: AmplitudePair) -> Result<AmplitudePair> {
        match topology {
            Topology::BothConnected => Ok(step_unitary_both(state)),
            Topology::RightHalfConnected => step_unitary_right_half(state),
            Topology::LeftHalfConnected => step_unitary_left_half(state),
        }
    }

    fn measure(&self, topology: Topology, weights: WeightPair, splitter: &SplitterCoefficients) -> WeightPair {
        match topology {
            Topology::BothConnected => step_measure_both(weights, splitter),
            Topology::RightHalfConnected => step_measure_right_half(weights, splitter),
            Topology::LeftHalfConnected => step_measure_left_half(weights, splitter),
        }
    }
}

/// A fully specified single-interaction map.
///
/// Unitary maps ignore `splitter`; it is carried so a map describes the whole
/// experimental configuration in either mode.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepMap {
    pub mode: InteractionMode,
    pub topology: Topology,
    pub splitter: SplitterCoefficients,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Stability {
    /// Multiplier zero: the error is at least squared each step.
    Superattracting,
    Stable,
    /// Multiplier of magnitude exactly one.
    Marginal,
    Unstable,
}

impl Stability {
    pub fn from_multiplier(multiplier: f64) -> Self {
        let m = multiplier.abs();
        if m == 0.0 {
            Stability::Superattracting
        } else if m < 1.0 {
            Stability::Stable
        } else if m == 1.0 {
            Stability::Marginal
        } else {
            Stability::Unstable
        }
    }

    pub fn is_attracting(&self) -> bool {
        matches!(self, Stability::Superattracting | Stability::Stable)
    }
}

/// Fixed point of a step map, classified by the derivative (`multiplier`) of
/// the induced one-dimensional map `w_left -> w_left'` at that point.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FixedPoint {
    pub state: LoopState,
    pub multiplier: f64,
    pub stability: Stability,
}

impl FixedPoint {
    fn new(state: LoopState, multiplier: f64) -> Self {
        Self { state, multiplier, stability: Stability::from_multiplier(multiplier) }
    }
}

const SQRT_HALF: f64 = std::f64::consts::FRAC_1_SQRT_2;

impl StepMap {
    pub fn new(mode: InteractionMode, topology: Topology, splitter: SplitterCoefficients) -> Self {
        Self { mode, topology, splitter }
    }

    /// Applies the map. Fails with [`Error::ModeMismatch`] if the state's
    /// representation does not belong to this map's mode.
    pub fn apply(&self, state: LoopState) -> Result<LoopState> {
        if state.mode() != self.mode {
            return Err(Error::ModeMismatch { mode: self.mode });
        }
        LoopDynamics.apply(self.topology, state, &self.splitter)
    }

    /// Analytically known fixed points with their multipliers.
    ///
    /// In the both-connected unitary loop only `w_left` in `{1/2, 1}` is
    /// fixed: the pure right state `(0, 1)` is sent to `(1, 0)` in one step.
    /// In measurement mode with a degenerate splitter (`a1^2` of 0 or 1) the
    /// reported points are marginal; with `a1^2 = 1/2` the both-connected
    /// loop reaches `(1/2, 1/2)` after a single step.
    pub fn fixed_points(&self) -> Vec<FixedPoint> {
        let pure = |a: f64, b: f64| LoopState::Pure(AmplitudePair::from_raw(a, b));
        let (r, t) = (self.splitter.reflectance(), self.splitter.transmittance());
        match (self.mode, self.topology) {
            (InteractionMode::FixedSplitter, Topology::BothConnected) => {
                vec![FixedPoint::new(pure(SQRT_HALF, SQRT_HALF), 0.0), FixedPoint::new(pure(1.0, 0.0), 4.0)]
            }
            (InteractionMode::FixedSplitter, Topology::RightHalfConnected) => {
                vec![FixedPoint::new(pure(0.0, 1.0), 0.0), FixedPoint::new(pure(1.0, 0.0), 4.0)]
            }
            (InteractionMode::FixedSplitter, Topology::LeftHalfConnected) => {
                vec![FixedPoint::new(pure(1.0, 0.0), 0.0), FixedPoint::new(pure(0.0, 1.0), 4.0)]
            }
            (InteractionMode::MovableSplitter, Topology::BothConnected) => {
                vec![FixedPoint::new(LoopState::Mixed(WeightPair::balanced()), r - t)]
            }
            (InteractionMode::MovableSplitter, Topology::RightHalfConnected) => {
                vec![FixedPoint::new(LoopState::Mixed(WeightPair::right()), r)]
            }
            (InteractionMode::MovableSplitter, Topology::LeftHalfConnected) => {
                vec![FixedPoint::new(LoopState::Mixed(WeightPair::left()), t)]
            }
        }
    }
}

/// Convenience wrapper over [`StepMap::fixed_points`].
pub fn fixed_points(mode: InteractionMode, topology: Topology, splitter: SplitterCoefficients) -> Vec<FixedPoint> {
    StepMap::new(mode, topology, splitter).fixed_points()
}
