//! Value types shared by every step map.
//!
//! The two basis states are fixed here once:
//!
//! * `|1>`: the photon reflected at the splitter, travelling in the left fiber.
//!   Its amplitude is `a_left`, its probability `w_left`.
//! * `|0>`: the photon passing the splitter, travelling in the right fiber.
//!   Its amplitude is `b_right`, its probability `w_right`.
//!
//! Amplitudes are non-negative reals. All constructors validate their input
//! and every value handed out by this module satisfies its invariant.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Accepted deviation of `a^2 + b^2` from one for user-supplied amplitudes.
pub const NORM_TOLERANCE: f64 = 1e-9;

/// Accepted deviation of `w_left + w_right` from one.
pub const WEIGHT_SUM_TOLERANCE: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ViolationKind {
    NotFinite,
    Negative,
    OutOfRange,
    Normalization,
    WeightSum,
}

/// Structured description of a failed invariant.
///
/// `observed` is the offending quantity (a component, `a^2 + b^2`, or
/// `w_left + w_right`) and `deviation` its signed distance from the allowed
/// value or range.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub kind: ViolationKind,
    pub observed: f64,
    pub deviation: f64,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let side = if self.deviation >= 0.0 { "excess" } else { "deficit" };
        match self.kind {
            ViolationKind::NotFinite => write!(f, "component is not finite ({})", self.observed),
            ViolationKind::Negative => write!(f, "component is negative ({})", self.observed),
            ViolationKind::OutOfRange => {
                write!(f, "component {} outside [0, 1] ({side} {})", self.observed, self.deviation.abs())
            }
            ViolationKind::Normalization => {
                write!(f, "normalization violated: a^2 + b^2 = {} ({side} {})", self.observed, self.deviation.abs())
            }
            ViolationKind::WeightSum => write!(
                f,
                "weights do not sum to one: w_left + w_right = {} ({side} {})",
                self.observed,
                self.deviation.abs()
            ),
        }
    }
}

fn check_component(x: f64) -> std::result::Result<(), Violation> {
    if !x.is_finite() {
        return Err(Violation { kind: ViolationKind::NotFinite, observed: x, deviation: f64::NAN });
    }
    if x < 0.0 {
        return Err(Violation { kind: ViolationKind::Negative, observed: x, deviation: x });
    }
    if x > 1.0 {
        return Err(Violation { kind: ViolationKind::OutOfRange, observed: x, deviation: x - 1.0 });
    }
    Ok(())
}

/// Checks a raw amplitude pair against the normalization invariant.
pub fn validate_amplitudes(a_left: f64, b_right: f64) -> std::result::Result<(), Violation> {
    check_component(a_left)?;
    check_component(b_right)?;
    let norm = a_left * a_left + b_right * b_right;
    let deviation = norm - 1.0;
    if deviation.abs() > NORM_TOLERANCE {
        return Err(Violation { kind: ViolationKind::Normalization, observed: norm, deviation });
    }
    Ok(())
}

/// Checks a raw weight pair against the sum-to-one invariant.
pub fn validate_weights(w_left: f64, w_right: f64) -> std::result::Result<(), Violation> {
    check_component(w_left)?;
    check_component(w_right)?;
    let sum = w_left + w_right;
    let deviation = sum - 1.0;
    if deviation.abs() > WEIGHT_SUM_TOLERANCE {
        return Err(Violation { kind: ViolationKind::WeightSum, observed: sum, deviation });
    }
    Ok(())
}

fn check_probability(field: &'static str, value: f64) -> Result<()> {
    if value.is_finite() && (0.0..=1.0).contains(&value) {
        Ok(())
    } else {
        Err(Error::OutOfRange { field, value })
    }
}

/// Pure-state coefficients `a |1> + b |0>`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawAmplitudes")]
pub struct AmplitudePair {
    a_left: f64,
    b_right: f64,
}

#[derive(Deserialize)]
struct RawAmplitudes {
    a_left: f64,
    b_right: f64,
}

impl TryFrom<RawAmplitudes> for AmplitudePair {
    type Error = Error;

    fn try_from(raw: RawAmplitudes) -> Result<Self> {
        AmplitudePair::new(raw.a_left, raw.b_right)
    }
}

impl AmplitudePair {
    /// Validates `(a, b)` and rescales it to unit norm.
    pub fn new(a_left: f64, b_right: f64) -> Result<Self> {
        Self::new_with_correction(a_left, b_right).map(|(pair, _)| pair)
    }

    /// Like [`AmplitudePair::new`], also returning the applied correction
    /// `a^2 + b^2 - 1` of the input.
    pub fn new_with_correction(a_left: f64, b_right: f64) -> Result<(Self, f64)> {
        validate_amplitudes(a_left, b_right).map_err(Error::InvalidState)?;
        Ok(Self::rescale(a_left, b_right))
    }

    /// Rescales any non-negative, non-zero pair to unit norm, returning the
    /// correction `a^2 + b^2 - 1` that was removed. For coefficients quoted
    /// to a few decimals, e.g. `(0.949, 0.316)`.
    pub fn rescaled(a_left: f64, b_right: f64) -> Result<(Self, f64)> {
        for x in [a_left, b_right] {
            if !x.is_finite() || x < 0.0 {
                return Err(Error::InvalidState(check_component(x).unwrap_err()));
            }
        }
        if a_left == 0.0 && b_right == 0.0 {
            return Err(Error::InvalidState(Violation {
                kind: ViolationKind::Normalization,
                observed: 0.0,
                deviation: -1.0,
            }));
        }
        Ok(Self::rescale(a_left, b_right))
    }

    fn rescale(a_left: f64, b_right: f64) -> (Self, f64) {
        let norm2 = a_left * a_left + b_right * b_right;
        let norm = norm2.sqrt();
        (Self { a_left: a_left / norm, b_right: b_right / norm }, norm2 - 1.0)
    }

    /// `(sqrt(w), sqrt(1 - w))`.
    pub fn from_left_weight(w_left: f64) -> Result<Self> {
        check_probability("w_left_initial", w_left)?;
        Ok(Self { a_left: w_left.sqrt(), b_right: (1.0 - w_left).sqrt() })
    }

    /// Used by the step maps, whose outputs are normalized by construction.
    pub(crate) fn from_raw(a_left: f64, b_right: f64) -> Self {
        debug_assert!(a_left >= 0.0 && b_right >= 0.0);
        Self { a_left, b_right }
    }

    pub fn a_left(&self) -> f64 {
        self.a_left
    }

    pub fn b_right(&self) -> f64 {
        self.b_right
    }

    pub fn norm_squared(&self) -> f64 {
        self.a_left * self.a_left + self.b_right * self.b_right
    }

    pub fn weights(&self) -> WeightPair {
        weights_of(*self)
    }

    /// Exchanges the roles of the two fibers.
    pub fn swapped(&self) -> Self {
        Self { a_left: self.b_right, b_right: self.a_left }
    }
}

/// Free-function form of [`AmplitudePair::from_left_weight`].
pub fn amplitudes_from_left_weight(w_left: f64) -> Result<AmplitudePair> {
    AmplitudePair::from_left_weight(w_left)
}

/// Probabilities `(a^2, b^2)` of finding the photon in each fiber.
pub fn weights_of(state: AmplitudePair) -> WeightPair {
    WeightPair { w_left: state.a_left * state.a_left, w_right: state.b_right * state.b_right }
}

/// Probabilities or classical mixture weights of the two fibers.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawWeights")]
pub struct WeightPair {
    w_left: f64,
    w_right: f64,
}

#[derive(Deserialize)]
struct RawWeights {
    w_left: f64,
    w_right: f64,
}

impl TryFrom<RawWeights> for WeightPair {
    type Error = Error;

    fn try_from(raw: RawWeights) -> Result<Self> {
        WeightPair::new(raw.w_left, raw.w_right)
    }
}

impl WeightPair {
    pub fn new(w_left: f64, w_right: f64) -> Result<Self> {
        validate_weights(w_left, w_right).map_err(Error::InvalidState)?;
        Ok(Self { w_left, w_right })
    }

    /// `(w, 1 - w)`.
    pub fn from_left(w_left: f64) -> Result<Self> {
        check_probability("w_left", w_left)?;
        Ok(Self { w_left, w_right: 1.0 - w_left })
    }

    pub(crate) fn from_raw(w_left: f64, w_right: f64) -> Self {
        Self { w_left, w_right }
    }

    pub const fn balanced() -> Self {
        Self { w_left: 0.5, w_right: 0.5 }
    }

    /// All weight in the left fiber.
    pub const fn left() -> Self {
        Self { w_left: 1.0, w_right: 0.0 }
    }

    /// All weight in the right fiber.
    pub const fn right() -> Self {
        Self { w_left: 0.0, w_right: 1.0 }
    }

    pub fn w_left(&self) -> f64 {
        self.w_left
    }

    pub fn w_right(&self) -> f64 {
        self.w_right
    }

    pub fn sum(&self) -> f64 {
        self.w_left + self.w_right
    }

    pub fn swapped(&self) -> Self {
        Self { w_left: self.w_right, w_right: self.w_left }
    }

    /// Max-abs distance over both components.
    pub fn distance(&self, other: &WeightPair) -> f64 {
        (self.w_left - other.w_left).abs().max((self.w_right - other.w_right).abs())
    }
}

/// Intrinsic splitter coefficients `(a1, b1)`.
///
/// In fixed-splitter runs they seed the state after the first interaction; in
/// movable-splitter runs the squares `a1^2` (reflectance) and `b1^2`
/// (transmittance) are the per-step transition probabilities. Both squares are
/// stored so that exchanging them is exact.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawSplitter")]
pub struct SplitterCoefficients {
    #[serde(rename = "a1_sq")]
    reflectance: f64,
    #[serde(rename = "b1_sq")]
    transmittance: f64,
}

#[derive(Deserialize)]
struct RawSplitter {
    a1_sq: f64,
    b1_sq: f64,
}

impl TryFrom<RawSplitter> for SplitterCoefficients {
    type Error = Error;

    fn try_from(raw: RawSplitter) -> Result<Self> {
        validate_weights(raw.a1_sq, raw.b1_sq).map_err(Error::InvalidState)?;
        Ok(Self { reflectance: raw.a1_sq, transmittance: raw.b1_sq })
    }
}

impl SplitterCoefficients {
    /// Validates `(a1, b1)` within [`NORM_TOLERANCE`] and rescales to unit norm.
    pub fn from_amplitudes(a1: f64, b1: f64) -> Result<Self> {
        validate_amplitudes(a1, b1).map_err(Error::InvalidState)?;
        let norm2 = a1 * a1 + b1 * b1;
        let reflectance = a1 * a1 / norm2;
        Ok(Self { reflectance, transmittance: 1.0 - reflectance })
    }

    /// Splitter with `a1^2 = reflectance`.
    pub fn from_reflectance(reflectance: f64) -> Result<Self> {
        check_probability("a1_squared", reflectance)?;
        Ok(Self { reflectance, transmittance: 1.0 - reflectance })
    }

    pub fn symmetric() -> Self {
        Self { reflectance: 0.5, transmittance: 0.5 }
    }

    pub fn a1(&self) -> f64 {
        self.reflectance.sqrt()
    }

    pub fn b1(&self) -> f64 {
        self.transmittance.sqrt()
    }

    /// `a1^2`
    pub fn reflectance(&self) -> f64 {
        self.reflectance
    }

    /// `b1^2`
    pub fn transmittance(&self) -> f64 {
        self.transmittance
    }

    /// The state right after the first interaction, `a1 |1> + b1 |0>`.
    pub fn initial_amplitudes(&self) -> AmplitudePair {
        AmplitudePair::from_raw(self.a1(), self.b1())
    }

    /// Mixture weights after the first measuring interaction, `(a1^2, b1^2)`.
    pub fn initial_weights(&self) -> WeightPair {
        WeightPair::from_raw(self.reflectance, self.transmittance)
    }

    pub fn swapped(&self) -> Self {
        Self { reflectance: self.transmittance, transmittance: self.reflectance }
    }
}

/// How the two fiber loops are attached to the splitter.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Topology {
    /// Both loops return the photon to the splitter.
    #[serde(rename = "both")]
    BothConnected,
    /// The right loop is closed on itself and captures the passing photon.
    #[serde(rename = "right-half")]
    RightHalfConnected,
    /// The left loop is closed on itself and captures the reflected photon.
    #[serde(rename = "left-half")]
    LeftHalfConnected,
}

impl Topology {
    pub const ALL: [Topology; 3] = [Topology::BothConnected, Topology::RightHalfConnected, Topology::LeftHalfConnected];

    pub fn as_str(&self) -> &'static str {
        match self {
            Topology::BothConnected => "both",
            Topology::RightHalfConnected => "right-half",
            Topology::LeftHalfConnected => "left-half",
        }
    }

    /// The same layout with left and right exchanged.
    pub fn mirrored(&self) -> Self {
        match self {
            Topology::BothConnected => Topology::BothConnected,
            Topology::RightHalfConnected => Topology::LeftHalfConnected,
            Topology::LeftHalfConnected => Topology::RightHalfConnected,
        }
    }

    /// Weights every interior start converges to.
    pub fn attractor(&self) -> WeightPair {
        match self {
            Topology::BothConnected => WeightPair::balanced(),
            Topology::RightHalfConnected => WeightPair::right(),
            Topology::LeftHalfConnected => WeightPair::left(),
        }
    }
}

impl fmt::Display for Topology {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Topology {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "both" => Ok(Topology::BothConnected),
            "right-half" => Ok(Topology::RightHalfConnected),
            "left-half" => Ok(Topology::LeftHalfConnected),
            other => Err(format!("unknown topology '{other}' (expected both, right-half or left-half)")),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum InteractionMode {
    /// No momentum exchange: the photon stays in a pure superposition.
    #[serde(rename = "unitary")]
    FixedSplitter,
    /// Every interaction measures the side and leaves a classical mixture.
    #[serde(rename = "measure")]
    MovableSplitter,
}

impl InteractionMode {
    pub fn as_str(&self) -> &'static str {
        match self {
            InteractionMode::FixedSplitter => "unitary",
            InteractionMode::MovableSplitter => "measure",
        }
    }
}

impl fmt::Display for InteractionMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for InteractionMode {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "unitary" => Ok(InteractionMode::FixedSplitter),
            "measure" => Ok(InteractionMode::MovableSplitter),
            other => Err(format!("unknown mode '{other}' (expected unitary or measure)")),
        }
    }
}

/// Photon state in either representation.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LoopState {
    Pure(AmplitudePair),
    Mixed(WeightPair),
}

impl LoopState {
    pub fn mode(&self) -> InteractionMode {
        match self {
            LoopState::Pure(_) => InteractionMode::FixedSplitter,
            LoopState::Mixed(_) => InteractionMode::MovableSplitter,
        }
    }

    pub fn weights(&self) -> WeightPair {
        match self {
            LoopState::Pure(amplitudes) => amplitudes.weights(),
            LoopState::Mixed(weights) => *weights,
        }
    }

    pub fn amplitudes(&self) -> Option<AmplitudePair> {
        match self {
            LoopState::Pure(amplitudes) => Some(*amplitudes),
            LoopState::Mixed(_) => None,
        }
    }
}
