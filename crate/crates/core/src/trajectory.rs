//! Iterating step maps over many interactions.
//!
//! Step `n = 1` is the state right after the first splitter interaction; each
//! further record is one loop period later and sits at time `n * T`. A
//! [`StepSchedule`] switches the loop topology between interactions: a switch
//! named for step `k` is in effect for the map that produces record `k`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::maps::{LoopDynamics, StepKernel};
use crate::state::{AmplitudePair, InteractionMode, LoopState, SplitterCoefficients, Topology, WeightPair};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub mode: InteractionMode,
    pub initial_topology: Topology,
    pub splitter: SplitterCoefficients,
    pub initial: LoopState,
    /// Loop traversal time `T`.
    pub period: f64,
    pub max_steps: usize,
}

impl Scenario {
    /// Scenario whose first record is the state the splitter itself produces:
    /// amplitudes `(a1, b1)` in unitary mode, weights `(a1^2, b1^2)` otherwise.
    pub fn from_splitter(
        mode: InteractionMode,
        topology: Topology,
        splitter: SplitterCoefficients,
        max_steps: usize,
    ) -> Self {
        let initial = match mode {
            InteractionMode::FixedSplitter => LoopState::Pure(splitter.initial_amplitudes()),
            InteractionMode::MovableSplitter => LoopState::Mixed(splitter.initial_weights()),
        };
        Self { mode, initial_topology: topology, splitter, initial, period: 1.0, max_steps }
    }

    pub fn with_initial(mut self, initial: LoopState) -> Self {
        self.initial = initial;
        self
    }

    pub fn with_period(mut self, period: f64) -> Self {
        self.period = period;
        self
    }

    pub fn with_max_steps(mut self, max_steps: usize) -> Self {
        self.max_steps = max_steps;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.initial.mode() != self.mode {
            return Err(Error::ModeMismatch { mode: self.mode });
        }
        if !(self.period.is_finite() && self.period > 0.0) {
            return Err(Error::InvalidScenario(format!("period must be positive, got {}", self.period)));
        }
        if self.max_steps < 1 {
            return Err(Error::InvalidScenario("max_steps must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TopologySwitch {
    pub at_step: usize,
    pub topology: Topology,
}

/// Topology switches ordered by strictly increasing step.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct StepSchedule {
    switches: Vec<TopologySwitch>,
}

impl StepSchedule {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn new(switches: Vec<TopologySwitch>) -> Result<Self> {
        if let Some(first) = switches.first() {
            if first.at_step < 1 {
                return Err(Error::ScheduleConflict("switch steps are numbered from 1".into()));
            }
        }
        for pair in switches.windows(2) {
            if pair[1].at_step <= pair[0].at_step {
                return Err(Error::ScheduleConflict(format!(
                    "switch steps must be strictly increasing ({} then {})",
                    pair[0].at_step, pair[1].at_step
                )));
            }
        }
        Ok(Self { switches })
    }

    pub fn switches(&self) -> &[TopologySwitch] {
        &self.switches
    }

    pub fn is_empty(&self) -> bool {
        self.switches.is_empty()
    }

    fn check_within(&self, max_steps: usize) -> Result<()> {
        match self.switches.last() {
            Some(last) if last.at_step > max_steps => {
                Err(Error::ScheduleConflict(format!("switch at step {} exceeds max_steps {max_steps}", last.at_step)))
            }
            _ => Ok(()),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Record {
    pub n: usize,
    pub time: f64,
    pub topology: Topology,
    pub state: LoopState,
    pub w_left: f64,
    pub w_right: f64,
}

impl Record {
    fn new(n: usize, period: f64, topology: Topology, state: LoopState) -> Self {
        let w = state.weights();
        Self { n, time: n as f64 * period, topology, state, w_left: w.w_left(), w_right: w.w_right() }
    }

    pub fn weights(&self) -> WeightPair {
        self.state.weights()
    }

    pub fn amplitudes(&self) -> Option<AmplitudePair> {
        self.state.amplitudes()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub mode: InteractionMode,
    pub records: Vec<Record>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn last(&self) -> Option<&Record> {
        self.records.last()
    }

    pub fn w_left(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.w_left).collect()
    }
}

/// Lazy sequence of records; yields at most `max_steps` items.
pub struct Evolution<'a, K: StepKernel> {
    kernel: &'a K,
    scenario: Scenario,
    schedule: &'a StepSchedule,
    next_switch: usize,
    topology: Topology,
    current: Option<LoopState>,
    n: usize,
}

impl<K: StepKernel> Evolution<'_, K> {
    fn topology_for(&mut self, n: usize) -> Topology {
        let switches = self.schedule.switches();
        while self.next_switch < switches.len() && switches[self.next_switch].at_step <= n {
            self.topology = switches[self.next_switch].topology;
            self.next_switch += 1;
        }
        self.topology
    }
}

impl<K: StepKernel> Iterator for Evolution<'_, K> {
    type Item = Result<Record>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.n >= self.scenario.max_steps {
            return None;
        }
        self.n += 1;
        let n = self.n;
        let topology = self.topology_for(n);
        let state = match self.current {
            None => self.scenario.initial,
            Some(previous) => match self.kernel.apply(topology, previous, &self.scenario.splitter) {
                Ok(state) => state,
                Err(e) => {
                    self.n = self.scenario.max_steps;
                    return Some(Err(e));
                }
            },
        };
        self.current = Some(state);
        Some(Ok(Record::new(n, self.scenario.period, topology, state)))
    }
}

/// Validates the inputs and returns the record stream driven by `kernel`.
pub fn evolve<'a, K: StepKernel>(
    kernel: &'a K,
    scenario: &Scenario,
    schedule: &'a StepSchedule,
) -> Result<Evolution<'a, K>> {
    scenario.validate()?;
    schedule.check_within(scenario.max_steps)?;
    Ok(Evolution {
        kernel,
        scenario: *scenario,
        schedule,
        next_switch: 0,
        topology: scenario.initial_topology,
        current: None,
        n: 0,
    })
}

pub fn iterate_with<K: StepKernel>(kernel: &K, scenario: &Scenario, schedule: &StepSchedule) -> Result<Trajectory> {
    let records = evolve(kernel, scenario, schedule)?.collect::<Result<Vec<_>>>()?;
    Ok(Trajectory { mode: scenario.mode, records })
}

/// Runs `scenario` for exactly `max_steps` records.
pub fn iterate(scenario: &Scenario, schedule: &StepSchedule) -> Result<Trajectory> {
    iterate_with(&LoopDynamics, scenario, schedule)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceCriterion {
    pub target: WeightPair,
    pub epsilon: f64,
}

impl ConvergenceCriterion {
    pub fn new(target: WeightPair, epsilon: f64) -> Result<Self> {
        if !(epsilon.is_finite() && epsilon > 0.0) {
            return Err(Error::InvalidScenario(format!("epsilon must be positive, got {epsilon}")));
        }
        Ok(Self { target, epsilon })
    }

    /// Max-abs distance of `weights` from the target.
    pub fn distance(&self, weights: &WeightPair) -> f64 {
        weights.distance(&self.target)
    }

    pub fn is_met(&self, weights: &WeightPair) -> bool {
        self.distance(weights) < self.epsilon
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "kebab-case")]
pub enum Convergence {
    Converged { steps: usize },
    NotConverged { max_steps: usize, final_distance: f64 },
}

impl Convergence {
    pub fn steps(&self) -> Option<usize> {
        match self {
            Convergence::Converged { steps } => Some(*steps),
            Convergence::NotConverged { .. } => None,
        }
    }
}

pub fn steps_to_converge_with<K: StepKernel>(
    kernel: &K,
    scenario: &Scenario,
    criterion: &ConvergenceCriterion,
) -> Result<Convergence> {
    let schedule = StepSchedule::empty();
    let mut final_distance = f64::INFINITY;
    for record in evolve(kernel, scenario, &schedule)? {
        let record = record?;
        final_distance = criterion.distance(&record.weights());
        if final_distance < criterion.epsilon {
            return Ok(Convergence::Converged { steps: record.n });
        }
    }
    Ok(Convergence::NotConverged { max_steps: scenario.max_steps, final_distance })
}

/// Smallest step whose weights lie within `epsilon` of the target, scanning
/// at most `max_steps` records of `scenario` with its initial topology.
pub fn steps_to_converge(scenario: &Scenario, criterion: &ConvergenceCriterion) -> Result<Convergence> {
    steps_to_converge_with(&LoopDynamics, scenario, criterion)
}

/// Runs consecutive phases, each holding one topology for a number of records.
pub fn run_switching_experiment(
    phases: &[(Topology, usize)],
    mode: InteractionMode,
    splitter: SplitterCoefficients,
    initial: LoopState,
) -> Result<Trajectory> {
    let (scenario, schedule) = phase_plan(phases, mode, splitter, initial)?;
    iterate(&scenario, &schedule)
}

/// Scenario and schedule equivalent to a list of phases.
pub fn phase_plan(
    phases: &[(Topology, usize)],
    mode: InteractionMode,
    splitter: SplitterCoefficients,
    initial: LoopState,
) -> Result<(Scenario, StepSchedule)> {
    let Some(&(first, _)) = phases.first() else {
        return Err(Error::ScheduleConflict("at least one phase is required".into()));
    };
    if let Some((topology, _)) = phases.iter().find(|(_, count)| *count < 1) {
        return Err(Error::ScheduleConflict(format!("phase {topology} has no steps")));
    }
    let mut switches = Vec::with_capacity(phases.len() - 1);
    let mut total = phases[0].1;
    for &(topology, count) in &phases[1..] {
        switches.push(TopologySwitch { at_step: total + 1, topology });
        total += count;
    }
    let scenario = Scenario { mode, initial_topology: first, splitter, initial, period: 1.0, max_steps: total };
    Ok((scenario, StepSchedule::new(switches)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::maps::{step_measure_both, step_unitary_both, step_unitary_right_half};

    const SQRT_HALF: f64 = std::f64::consts::FRAC_1_SQRT_2;

    fn unitary(w: f64, topology: Topology, steps: usize) -> Scenario {
        let splitter = SplitterCoefficients::from_reflectance(w).unwrap();
        Scenario::from_splitter(InteractionMode::FixedSplitter, topology, splitter, steps)
    }

    fn measure(r: f64, topology: Topology, steps: usize) -> Scenario {
        let splitter = SplitterCoefficients::from_reflectance(r).unwrap();
        Scenario::from_splitter(InteractionMode::MovableSplitter, topology, splitter, steps)
    }

    fn balanced() -> LoopState {
        LoopState::Pure(AmplitudePair::new(SQRT_HALF, SQRT_HALF).unwrap())
    }

    #[test]
    fn unitary_sequence_from_point_nine() {
        let t = iterate(&unitary(0.9, Topology::BothConnected, 5), &StepSchedule::empty()).unwrap();
        let printed = [0.9, 0.735, 0.562, 0.504, 0.500];
        assert_eq!(t.len(), 5);
        for (record, expected) in t.records.iter().zip(printed) {
            assert!((record.w_left - expected).abs() < 5e-4, "{record:?}");
        }
        assert_eq!(t.records[0].n, 1);
        assert_eq!(t.records[4].time, 5.0);
    }

    #[test]
    fn measurement_two_steps() {
        let t = iterate(&measure(0.9, Topology::BothConnected, 2), &StepSchedule::empty()).unwrap();
        assert_eq!(t.records[0].w_left, 0.9);
        assert!((t.records[1].w_left - 0.82).abs() < 1e-15);
        assert!(t.records[1].amplitudes().is_none());
    }

    #[test]
    fn consecutive_records_follow_the_map() {
        let t = iterate(&unitary(0.3, Topology::BothConnected, 10), &StepSchedule::empty()).unwrap();
        for pair in t.records.windows(2) {
            let expected = step_unitary_both(pair[0].amplitudes().unwrap());
            assert_eq!(pair[1].amplitudes().unwrap(), expected);
            let w = pair[1].amplitudes().unwrap().weights();
            assert_eq!((pair[1].w_left, pair[1].w_right), (w.w_left(), w.w_right()));
        }
        let s = measure(0.7, Topology::BothConnected, 10);
        let t = iterate(&s, &StepSchedule::empty()).unwrap();
        for pair in t.records.windows(2) {
            assert_eq!(pair[1].weights(), step_measure_both(pair[0].weights(), &s.splitter));
        }
    }

    #[test]
    fn switch_takes_effect_at_named_step() {
        let scenario = unitary(0.5, Topology::BothConnected, 50).with_initial(balanced());
        let schedule =
            StepSchedule::new(vec![TopologySwitch { at_step: 2, topology: Topology::RightHalfConnected }]).unwrap();
        let t = iterate(&scenario, &schedule).unwrap();
        assert_eq!(t.records[0].topology, Topology::BothConnected);
        assert_eq!(t.records[1].topology, Topology::RightHalfConnected);
        let expected = step_unitary_right_half(AmplitudePair::new(SQRT_HALF, SQRT_HALF).unwrap()).unwrap();
        assert_eq!(t.records[1].amplitudes().unwrap(), expected);
        for pair in t.records[1..].windows(2) {
            assert!(pair[1].w_right >= pair[0].w_right);
        }
        assert!(t.last().unwrap().w_right > 1.0 - 1e-6);
    }

    #[test]
    fn schedule_conflicts() {
        let bad = StepSchedule::new(vec![
            TopologySwitch { at_step: 3, topology: Topology::RightHalfConnected },
            TopologySwitch { at_step: 3, topology: Topology::BothConnected },
        ]);
        assert!(matches!(bad, Err(Error::ScheduleConflict(_))));
        let late = StepSchedule::new(vec![TopologySwitch { at_step: 9, topology: Topology::BothConnected }]).unwrap();
        let err = iterate(&unitary(0.9, Topology::BothConnected, 5), &late).unwrap_err();
        assert!(matches!(err, Error::ScheduleConflict(_)));
    }

    #[test]
    fn scenario_validation() {
        let s = unitary(0.9, Topology::BothConnected, 5);
        assert!(matches!(iterate(&s.with_period(0.0), &StepSchedule::empty()), Err(Error::InvalidScenario(_))));
        assert!(matches!(iterate(&s.with_max_steps(0), &StepSchedule::empty()), Err(Error::InvalidScenario(_))));
        let mixed = s.with_initial(LoopState::Mixed(WeightPair::balanced()));
        assert!(matches!(iterate(&mixed, &StepSchedule::empty()), Err(Error::ModeMismatch { .. })));
    }

    #[test]
    fn timestamps_scale_with_period() {
        let t = iterate(&unitary(0.9, Topology::BothConnected, 3).with_period(2.5), &StepSchedule::empty()).unwrap();
        let times: Vec<f64> = t.records.iter().map(|r| r.time).collect();
        assert_eq!(times, vec![2.5, 5.0, 7.5]);
    }

    #[test]
    fn convergence_examples() {
        let half = ConvergenceCriterion::new(WeightPair::balanced(), 1e-4).unwrap();
        let c = steps_to_converge(&unitary(0.9, Topology::BothConnected, 100), &half).unwrap();
        assert_eq!(c, Convergence::Converged { steps: 5 });

        let c3 = ConvergenceCriterion::new(WeightPair::balanced(), 1e-3).unwrap();
        let c = steps_to_converge(&measure(0.9, Topology::BothConnected, 100), &c3).unwrap();
        assert_eq!(c.steps(), Some(28));

        let c = steps_to_converge(&unitary(0.5, Topology::BothConnected, 10), &half).unwrap();
        assert_eq!(c.steps(), Some(1));
        let to_left = ConvergenceCriterion::new(WeightPair::left(), 1e-3).unwrap();
        let c = steps_to_converge(&measure(0.5, Topology::RightHalfConnected, 10), &to_left).unwrap();
        assert!(c.steps().is_none());
    }

    #[test]
    fn unstable_start_never_converges() {
        let target = ConvergenceCriterion::new(WeightPair::right(), 1e-6).unwrap();
        let s = unitary(1.0, Topology::RightHalfConnected, 40);
        match steps_to_converge(&s, &target).unwrap() {
            Convergence::NotConverged { max_steps, final_distance } => {
                assert_eq!(max_steps, 40);
                assert_eq!(final_distance, 1.0);
            }
            other => panic!("{other:?}"),
        }
        assert!(ConvergenceCriterion::new(WeightPair::right(), 0.0).is_err());
    }

    #[test]
    fn converged_step_is_minimal() {
        let criterion = ConvergenceCriterion::new(WeightPair::balanced(), 1e-6).unwrap();
        for w in [0.05, 0.2, 0.7, 0.99] {
            let s = unitary(w, Topology::BothConnected, 30);
            let n = steps_to_converge(&s, &criterion).unwrap().steps().unwrap();
            let t = iterate(&s, &StepSchedule::empty()).unwrap();
            assert!(t.records[..n - 1].iter().all(|r| !criterion.is_met(&r.weights())));
            assert!(criterion.is_met(&t.records[n - 1].weights()));
        }
    }

    #[test]
    fn switching_experiment_capture_phase() {
        let t = run_switching_experiment(
            &[(Topology::BothConnected, 10), (Topology::RightHalfConnected, 60)],
            InteractionMode::FixedSplitter,
            SplitterCoefficients::symmetric(),
            balanced(),
        )
        .unwrap();
        assert_eq!(t.len(), 70);
        assert!(t.last().unwrap().w_right > 1.0 - 1e-6);
    }

    #[test]
    fn long_capture_underflows_to_pure_state() {
        // The captured amplitude is squared every step and reaches exactly zero
        // well before 60 steps; the both-connected map then sends (0, 1) to the
        // repelling pure state (1, 0), where it stays.
        let start = LoopState::Pure(AmplitudePair::from_left_weight(0.1).unwrap());
        let t = run_switching_experiment(
            &[(Topology::RightHalfConnected, 60), (Topology::BothConnected, 10)],
            InteractionMode::FixedSplitter,
            SplitterCoefficients::symmetric(),
            start,
        )
        .unwrap();
        assert_eq!(t.records[59].amplitudes().unwrap().a_left(), 0.0);
        assert_eq!(t.last().unwrap().w_left, 1.0);
    }

    #[test]
    fn single_phase_matches_plain_iterate() {
        let splitter = SplitterCoefficients::from_reflectance(0.9).unwrap();
        let s = Scenario::from_splitter(InteractionMode::FixedSplitter, Topology::BothConnected, splitter, 5);
        let phased = run_switching_experiment(&[(Topology::BothConnected, 5)], s.mode, splitter, s.initial).unwrap();
        assert_eq!(phased, iterate(&s, &StepSchedule::empty()).unwrap());
        assert!(run_switching_experiment(&[], s.mode, splitter, s.initial).is_err());
        assert!(run_switching_experiment(&[(Topology::BothConnected, 0)], s.mode, splitter, s.initial).is_err());
    }

    #[test]
    fn prefix_and_determinism() {
        let s = unitary(0.2, Topology::LeftHalfConnected, 40);
        let schedule =
            StepSchedule::new(vec![TopologySwitch { at_step: 7, topology: Topology::BothConnected }]).unwrap();
        let long = iterate(&s, &schedule).unwrap();
        let again = iterate(&s, &schedule).unwrap();
        assert_eq!(long, again);
        let short = iterate(&s.with_max_steps(10), &schedule).unwrap();
        assert_eq!(short.records[..], long.records[..10]);
    }
}
