//! Monte Carlo check of the measurement-mode recurrences.
//!
//! With a movable splitter every interaction records the side of the photon,
//! so a single photon follows a two-state Markov chain. Sampling many paths
//! and counting sides per step must reproduce the mixture weights.
//!
//! Each path draws from its own `ChaCha8Rng` seeded with `base_seed + index`,
//! so ensembles do not depend on how paths are scheduled across threads.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::state::{InteractionMode, SplitterCoefficients, Topology, WeightPair};

pub const GENERATOR: &str = "ChaCha8Rng";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Side {
    #[serde(rename = "L")]
    Left,
    #[serde(rename = "R")]
    Right,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PhotonPath {
    pub sides: Vec<Side>,
    pub seed: u64,
}

impl PhotonPath {
    /// True when no label follows the absorbing side of a half-connected loop
    /// with a different label.
    pub fn respects_absorption(&self, topology: Topology) -> bool {
        let sink = match topology {
            Topology::BothConnected => return true,
            Topology::RightHalfConnected => Side::Right,
            Topology::LeftHalfConnected => Side::Left,
        };
        match self.sides.iter().position(|s| *s == sink) {
            Some(first) => self.sides[first..].iter().all(|s| *s == sink),
            None => true,
        }
    }
}

fn next_side<R: Rng>(rng: &mut R, current: Side, topology: Topology, splitter: &SplitterCoefficients) -> Side {
    let (r, t) = (splitter.reflectance(), splitter.transmittance());
    // probability of ending up on the left after this interaction
    let to_left = match (topology, current) {
        (Topology::BothConnected, Side::Left) => r,
        (Topology::BothConnected, Side::Right) => t,
        (Topology::RightHalfConnected, Side::Left) => r,
        (Topology::RightHalfConnected, Side::Right) => return Side::Right,
        (Topology::LeftHalfConnected, Side::Left) => return Side::Left,
        (Topology::LeftHalfConnected, Side::Right) => r,
    };
    if rng.gen::<f64>() < to_left {
        Side::Left
    } else {
        Side::Right
    }
}

/// Samples one photon for `steps` interactions. The first label is drawn with
/// `P(L) = a1^2`.
pub fn sample_path(splitter: &SplitterCoefficients, topology: Topology, steps: usize, seed: u64) -> PhotonPath {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut sides = Vec::with_capacity(steps);
    if steps > 0 {
        let mut side = if rng.gen::<f64>() < splitter.reflectance() { Side::Left } else { Side::Right };
        sides.push(side);
        for _ in 1..steps {
            side = next_side(&mut rng, side, topology, splitter);
            sides.push(side);
        }
    }
    PhotonPath { sides, seed }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepFrequency {
    pub n: usize,
    pub w_left: f64,
    pub w_right: f64,
    /// Binomial standard error `sqrt(w (1 - w) / N)`.
    pub stderr: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnsembleEstimate {
    pub generator: String,
    pub base_seed: u64,
    pub n_paths: usize,
    pub steps: Vec<StepFrequency>,
}

/// Samples `n_paths` paths with seeds `base_seed, base_seed + 1, ...` and
/// reports the per-step fraction found on each side.
pub fn ensemble_frequencies(
    splitter: &SplitterCoefficients,
    topology: Topology,
    steps: usize,
    n_paths: usize,
    base_seed: u64,
) -> Result<EnsembleEstimate> {
    if n_paths < 1 {
        return Err(Error::InvalidScenario("n_paths must be at least 1".into()));
    }
    if steps < 1 {
        return Err(Error::InvalidScenario("steps must be at least 1".into()));
    }
    let left_counts = (0..n_paths)
        .into_par_iter()
        .fold(
            || vec![0u64; steps],
            |mut counts, index| {
                let path = sample_path(splitter, topology, steps, base_seed.wrapping_add(index as u64));
                for (count, side) in counts.iter_mut().zip(&path.sides) {
                    *count += u64::from(*side == Side::Left);
                }
                counts
            },
        )
        .reduce(
            || vec![0u64; steps],
            |mut a, b| {
                a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                a
            },
        );
    let total = n_paths as f64;
    let steps = left_counts
        .iter()
        .enumerate()
        .map(|(i, &left)| {
            let w_left = left as f64 / total;
            let w_right = (n_paths as u64 - left) as f64 / total;
            StepFrequency { n: i + 1, w_left, w_right, stderr: (w_left * w_right / total).sqrt() }
        })
        .collect();
    Ok(EnsembleEstimate { generator: GENERATOR.to_string(), base_seed, n_paths, steps })
}

/// Rejects the fixed-splitter mode, which performs no measurement to sample.
pub fn ensure_sampling_mode(mode: InteractionMode) -> Result<()> {
    match mode {
        InteractionMode::MovableSplitter => Ok(()),
        InteractionMode::FixedSplitter => Err(Error::UnsupportedMode(mode)),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepAgreement {
    pub n: usize,
    pub empirical: f64,
    pub analytic: f64,
    pub stderr: f64,
    pub z: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AgreementReport {
    pub sigma_bound: f64,
    pub steps: Vec<StepAgreement>,
}

impl AgreementReport {
    pub fn all_pass(&self) -> bool {
        self.steps.iter().all(|s| s.pass)
    }
}

/// z-score of every step's left frequency against the analytic weight.
/// A zero standard error gives `z = 0` on exact agreement and infinity otherwise.
pub fn agreement_report(
    estimate: &EnsembleEstimate,
    analytic: &[WeightPair],
    sigma_bound: f64,
) -> Result<AgreementReport> {
    if estimate.steps.len() != analytic.len() {
        return Err(Error::LengthMismatch { estimate: estimate.steps.len(), analytic: analytic.len() });
    }
    let steps = estimate
        .steps
        .iter()
        .zip(analytic)
        .map(|(freq, exact)| {
            let diff = (freq.w_left - exact.w_left()).abs();
            let z = if diff == 0.0 { 0.0 } else { diff / freq.stderr };
            StepAgreement {
                n: freq.n,
                empirical: freq.w_left,
                analytic: exact.w_left(),
                stderr: freq.stderr,
                z,
                pass: z <= sigma_bound,
            }
        })
        .collect();
    Ok(AgreementReport { sigma_bound, steps })
}
