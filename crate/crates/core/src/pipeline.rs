//! The three-phase cut pipeline: preprocess, simulate subcircuits, merge.

use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::circuit::Circuit;
use crate::cutter::{decompose, plan_cut_with, segment_depths, CutPlan, Partition, SubcircuitSet};
use crate::deadline::Deadline;
use crate::error::Result;
use crate::merger::{merge_streaming, merge_until, MergeInput, StateProvider};
use crate::statevec::{simulate_until, SimConfig, StateVec};
use crate::timing::timed;

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct PhaseTimes {
    pub pre: Duration,
    pub sub: Duration,
    pub merge: Duration,
}

impl PhaseTimes {
    pub fn total(&self) -> Duration {
        self.pre + self.sub + self.merge
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MergeMode {
    /// Keep every subcircuit state, then merge.
    #[default]
    Retained,
    /// Regenerate segment states per merge term.
    Streaming,
}

#[derive(Debug)]
pub struct CutRun {
    pub state: StateVec,
    pub times: PhaseTimes,
    pub plan: CutPlan,
    pub n_sub: usize,
    /// Depth of each segment's restricted circuit.
    pub segment_depths: Vec<usize>,
}

/// Simulates every subcircuit of every segment.
pub fn simulate_subcircuits(
    set: &SubcircuitSet,
    config: &SimConfig,
    deadline: &Deadline,
) -> Result<Vec<Vec<StateVec>>> {
    set.segments
        .iter()
        .map(|seg| {
            seg.subcircuits
                .iter()
                .map(|c| simulate_until(c, config, deadline))
                .collect()
        })
        .collect()
}

/// Simulates subcircuits on request, tracking the time spent doing so.
pub struct SimulatingProvider<'a> {
    set: &'a SubcircuitSet,
    config: SimConfig,
    deadline: Deadline,
    pub elapsed: Duration,
}

impl<'a> SimulatingProvider<'a> {
    pub fn new(set: &'a SubcircuitSet, config: SimConfig, deadline: Deadline) -> Self {
        SimulatingProvider {
            set,
            config,
            deadline,
            elapsed: Duration::ZERO,
        }
    }
}

impl StateProvider for SimulatingProvider<'_> {
    fn segment_state(&mut self, segment: usize, index: usize) -> Result<StateVec> {
        let circuit = &self.set.segments[segment].subcircuits[index];
        let (config, deadline) = (self.config, self.deadline);
        timed(&mut self.elapsed, || simulate_until(circuit, &config, &deadline))
    }
}

/// Runs the whole cut pipeline on `circuit` and times each phase.
///
/// In streaming mode the re-simulation time inside the merge is reported
/// under `sub` and the remainder under `merge`.
pub fn run_cut(
    circuit: &Circuit,
    partition: Partition,
    config: &SimConfig,
    mode: MergeMode,
    deadline: &Deadline,
) -> Result<CutRun> {
    config.check(circuit.num_qubits())?;
    for &size in partition.sizes() {
        config.check(size)?;
    }
    let mut times = PhaseTimes::default();

    let (plan, set) = timed(&mut times.pre, || -> Result<_> {
        let plan = plan_cut_with(circuit, partition)?;
        let set = decompose(circuit, &plan)?;
        Ok((plan, set))
    })?;
    deadline.check()?;

    let state = match mode {
        MergeMode::Retained => {
            let states = timed(&mut times.sub, || simulate_subcircuits(&set, config, deadline))?;
            let input = MergeInput {
                num_qubits: set.num_qubits,
                segment_states: &states,
                coeffs: &set.coeffs,
                merge_table: &set.merge_table,
            };
            timed(&mut times.merge, || merge_until(&input, config, deadline))?
        }
        MergeMode::Streaming => {
            let sizes: Vec<usize> = set.segments.iter().map(|s| s.num_qubits()).collect();
            let mut provider = SimulatingProvider::new(&set, *config, *deadline);
            let start = Instant::now();
            let state = merge_streaming(
                &mut provider,
                &sizes,
                &set.coeffs,
                &set.merge_table,
                set.num_qubits,
                config,
                deadline,
            )?;
            let total = start.elapsed();
            times.sub = provider.elapsed;
            times.merge = total.saturating_sub(provider.elapsed);
            state
        }
    };

    Ok(CutRun {
        state,
        times,
        n_sub: set.num_subcircuits(),
        segment_depths: segment_depths(&set),
        plan,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{build_staircase, BenchmarkSpec};
    use crate::statevec::simulate;

    #[test]
    fn both_modes_reconstruct_the_uncut_state() {
        let circuit = build_staircase(&BenchmarkSpec::new(6, 3, 2)).unwrap();
        let cfg = SimConfig::default();
        let oracle = simulate(&circuit, &cfg).unwrap();
        for mode in [MergeMode::Retained, MergeMode::Streaming] {
            let run = run_cut(
                &circuit,
                Partition::equal(6, 3).unwrap(),
                &cfg,
                mode,
                &Deadline::none(),
            )
            .unwrap();
            assert!(run.state.max_abs_diff(&oracle).unwrap() < 1e-12);
            assert_eq!(run.n_sub, 4 + 16 + 4);
            assert_eq!(run.times.total(), run.times.pre + run.times.sub + run.times.merge);
        }
    }

    #[test]
    fn expired_deadline_aborts() {
        let circuit = build_staircase(&BenchmarkSpec::new(8, 2, 2)).unwrap();
        let res = run_cut(
            &circuit,
            Partition::equal(8, 2).unwrap(),
            &SimConfig::default(),
            MergeMode::Retained,
            &Deadline::after(Duration::ZERO),
        );
        assert!(matches!(res, Err(crate::Error::Timeout)));
    }
}
