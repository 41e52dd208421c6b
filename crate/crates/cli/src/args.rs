use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use fiberloop::{InteractionMode, Topology, TopologySwitch};

#[derive(Debug, Parser)]
#[command(name = "fiberloop", version, about = "Beam-splitter fiber loop simulator")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Iterate one scenario and emit every step.
    Run(RunArgs),
    /// Recompute the published reference sequences and compare.
    Paper(PaperArgs),
    /// Steps to equilibrium with a fixed vs a movable splitter.
    Compare(CompareArgs),
    /// Convergence over a grid of initial weights.
    Sweep(SweepArgs),
    /// Monte Carlo sampling of measurement-mode photon paths.
    Mc(McArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Unitary,
    Measure,
}

impl From<ModeArg> for InteractionMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Unitary => InteractionMode::FixedSplitter,
            ModeArg::Measure => InteractionMode::MovableSplitter,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum TopologyArg {
    Both,
    RightHalf,
    LeftHalf,
}

impl From<TopologyArg> for Topology {
    fn from(t: TopologyArg) -> Self {
        match t {
            TopologyArg::Both => Topology::BothConnected,
            TopologyArg::RightHalf => Topology::RightHalfConnected,
            TopologyArg::LeftHalf => Topology::LeftHalfConnected,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum)]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Args)]
pub struct Output {
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Write to this file instead of standard output.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// `--wl1` and `--a1sq` both fix the first-step left weight, which is also
/// `a1^2`; exactly one must be given.
#[derive(Debug, Args)]
pub struct Initial {
    /// Left weight at step 1.
    #[arg(long)]
    pub wl1: Option<f64>,
    /// Splitter reflectance a1^2.
    #[arg(long)]
    pub a1sq: Option<f64>,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[arg(long, value_enum, default_value_t = ModeArg::Unitary)]
    pub mode: ModeArg,
    #[arg(long, value_enum, default_value_t = TopologyArg::Both)]
    pub topology: TopologyArg,
    #[command(flatten)]
    pub initial: Initial,
    /// Number of records, counting step 1.
    #[arg(long)]
    pub steps: usize,
    /// Report the first step within this distance of the attractor.
    #[arg(long)]
    pub eps: Option<f64>,
    /// Topology switch, `<step>:<topology>`; repeatable.
    #[arg(long = "switch", value_parser = parse_switch)]
    pub switches: Vec<TopologySwitch>,
    /// Loop period T used for timestamps.
    #[arg(long, default_value_t = 1.0)]
    pub period: f64,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Args)]
pub struct PaperArgs {
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    /// Left weight at step 1, also the splitter's a1^2.
    #[arg(long)]
    pub wl1: f64,
    #[arg(long, default_value_t = 1e-3)]
    pub eps: f64,
    /// Upper bound on iterations per mode.
    #[arg(long, default_value_t = 10_000)]
    pub steps: usize,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(long, value_enum, default_value_t = ModeArg::Unitary)]
    pub mode: ModeArg,
    #[arg(long, value_enum, default_value_t = TopologyArg::Both)]
    pub topology: TopologyArg,
    /// `start:stop:step`, inclusive.
    #[arg(long)]
    pub grid: String,
    #[arg(long, default_value_t = 1e-3)]
    pub eps: f64,
    #[arg(long, default_value_t = 1_000)]
    pub steps: usize,
    /// Splitter `a1^2`; required in measure mode.
    #[arg(long)]
    pub a1sq: Option<f64>,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Args)]
pub struct McArgs {
    #[arg(long, value_enum, default_value_t = ModeArg::Measure)]
    pub mode: ModeArg,
    #[arg(long, value_enum, default_value_t = TopologyArg::Both)]
    pub topology: TopologyArg,
    #[command(flatten)]
    pub initial: Initial,
    /// Number of records, counting step 1.
    #[arg(long)]
    pub steps: usize,
    /// Number of sampled photon paths.
    #[arg(long)]
    pub paths: usize,
    /// Base seed; path i uses seed + i.
    #[arg(long)]
    pub seed: u64,
    /// z-score bound for the per-step agreement check.
    #[arg(long, default_value_t = 4.0)]
    pub sigma: f64,
    #[command(flatten)]
    pub output: Output,
}

fn parse_switch(s: &str) -> Result<TopologySwitch, String> {
    let (step, topology) = s.split_once(':').ok_or_else(|| format!("expected <step>:<topology>, got '{s}'"))?;
    let at_step = step.trim().parse::<usize>().map_err(|e| format!("bad switch step '{step}': {e}"))?;
    let topology = topology.trim().parse::<Topology>()?;
    Ok(TopologySwitch { at_step, topology })
}
