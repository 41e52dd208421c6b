//! Stability tags checked against finite differences of the step maps.

use fiberloop::{
    fixed_points, AmplitudePair, InteractionMode, LoopDynamics, LoopState, SplitterCoefficients, Stability, StepKernel,
    Topology, WeightPair,
};

const H: f64 = 1e-6;

/// The step map seen as `w_left -> w_left'`.
fn induced(mode: InteractionMode, topology: Topology, splitter: &SplitterCoefficients, w: f64) -> f64 {
    let state = match mode {
        InteractionMode::FixedSplitter => LoopState::Pure(AmplitudePair::from_left_weight(w).unwrap()),
        InteractionMode::MovableSplitter => LoopState::Mixed(WeightPair::from_left(w).unwrap()),
    };
    LoopDynamics.apply(topology, state, splitter).unwrap().weights().w_left()
}

/// Centered difference in the interior; one-sided, pointing inward, at 0 and 1
/// where the map is not defined on the far side.
fn derivative(f: impl Fn(f64) -> f64, w: f64) -> f64 {
    if w - H < 0.0 {
        (f(w + H) - f(w)) / H
    } else if w + H > 1.0 {
        (f(w) - f(w - H)) / H
    } else {
        (f(w + H) - f(w - H)) / (2.0 * H)
    }
}

#[test]
fn tags_agree_with_numerical_derivative() {
    for r in [0.1, 0.3, 0.7, 0.9] {
        let splitter = SplitterCoefficients::from_reflectance(r).unwrap();
        for mode in [InteractionMode::FixedSplitter, InteractionMode::MovableSplitter] {
            for topology in Topology::ALL {
                for fp in fixed_points(mode, topology, splitter) {
                    let w = fp.state.weights().w_left();
                    let d = derivative(|x| induced(mode, topology, &splitter, x), w);
                    let ctx = format!("{mode} {topology} r={r} w={w} d={d}");
                    assert!((d - fp.multiplier).abs() < 1e-4, "multiplier {}: {ctx}", fp.multiplier);
                    match fp.stability {
                        Stability::Superattracting => assert!(d.abs() < 0.1, "{ctx}"),
                        Stability::Stable => assert!(d.abs() < 1.0, "{ctx}"),
                        Stability::Unstable => assert!(d.abs() > 1.0, "{ctx}"),
                        Stability::Marginal => panic!("unexpected marginal point: {ctx}"),
                    }
                }
            }
        }
    }
}

#[test]
fn documented_fixed_points_present() {
    let s = SplitterCoefficients::from_reflectance(0.9).unwrap();
    let half = std::f64::consts::FRAC_1_SQRT_2;

    let unitary = fixed_points(InteractionMode::FixedSplitter, Topology::BothConnected, s);
    assert!(unitary.iter().any(|fp| {
        let a = fp.state.amplitudes().unwrap();
        (a.a_left() - half).abs() < 1e-15 && (a.b_right() - half).abs() < 1e-15 && fp.stability.is_attracting()
    }));
    // (0, 1) is a preimage of (1, 0), not a fixed point
    assert!(unitary.iter().all(|fp| fp.state.weights().w_left() != 0.0));

    let measured = fixed_points(InteractionMode::MovableSplitter, Topology::BothConnected, s);
    assert!(measured.iter().any(|fp| fp.state == LoopState::Mixed(WeightPair::balanced())));

    let right = fixed_points(InteractionMode::FixedSplitter, Topology::RightHalfConnected, s);
    assert!(right.iter().any(|fp| fp.state.weights() == WeightPair::right() && fp.stability.is_attracting()));
    assert!(right.iter().any(|fp| fp.state.weights() == WeightPair::left() && fp.stability == Stability::Unstable));

    let left = fixed_points(InteractionMode::MovableSplitter, Topology::LeftHalfConnected, s);
    assert_eq!(left[0].state, LoopState::Mixed(WeightPair::left()));
}

#[test]
fn symmetric_splitter_measures_to_balance_in_one_step() {
    let s = SplitterCoefficients::symmetric();
    let fp = &fixed_points(InteractionMode::MovableSplitter, Topology::BothConnected, s)[0];
    assert_eq!(fp.stability, Stability::Superattracting);
    for w in [0.0, 0.2, 0.9, 1.0] {
        assert_eq!(induced(InteractionMode::MovableSplitter, Topology::BothConnected, &s, w), 0.5);
    }
}

#[test]
fn degenerate_splitters_are_marginal() {
    for r in [0.0, 1.0] {
        let s = SplitterCoefficients::from_reflectance(r).unwrap();
        let fp = &fixed_points(InteractionMode::MovableSplitter, Topology::BothConnected, s)[0];
        assert_eq!(fp.stability, Stability::Marginal);
    }
}

#[test]
fn interior_starts_reach_the_attractor() {
    for topology in Topology::ALL {
        let target = topology.attractor();
        for k in 1..20 {
            let mut state = AmplitudePair::from_left_weight(k as f64 / 20.0).unwrap();
            for _ in 0..200 {
                state = LoopDynamics.unitary(topology, state).unwrap();
            }
            assert!(state.weights().distance(&target) < 1e-12, "{topology} from {}", k as f64 / 20.0);
        }
    }
}
