use std::cell::RefCell;

use super::distributed::{run_distributed, Blackboard, DistributedParams, Protocol, Shard};
use super::memory::MemoryBoundedAlgorithm;
use super::state::MachineState;
use crate::error::{Error, Result};
use crate::estimators::EstimateReport;
use crate::models::SampleBatch;

/// A memory-bounded algorithm run as a blackboard protocol.
///
/// Rounds are grouped into turns of `s` rounds. Turn `τ` belongs to pass
/// `τ / m` and machine `τ mod m`. During its turn the machine reads the
/// previous turn's `s` bits as the incoming state, streams its shard, and
/// writes the resulting state one bit per round. Each machine gets exactly
/// `T` turns, so it writes `s · T` bits.
pub struct SimulatedProtocol<'a, A: ?Sized> {
    alg: &'a A,
    params: DistributedParams,
    /// Result of the current turn, keyed by the round at which it started.
    cache: RefCell<Option<(usize, MachineState)>>,
    failure: RefCell<Option<Error>>,
}

impl<'a, A: MemoryBoundedAlgorithm + ?Sized> SimulatedProtocol<'a, A> {
    fn state_bits(&self) -> usize {
        self.alg.state_bits()
    }

    fn incoming(&self, transcript: &[bool], turn_start: usize) -> MachineState {
        let s = self.state_bits();
        if turn_start == 0 {
            MachineState::zeros(s)
        } else {
            MachineState::from_bits(transcript[turn_start - s..turn_start].to_vec())
        }
    }

    fn simulate_turn(&self, shard: Shard<'_>, transcript: &[bool], turn_start: usize) -> Result<MachineState> {
        let s = self.state_bits();
        let pass = turn_start / s / self.params.machines;
        let mut state = self.incoming(transcript, turn_start);
        for (local, x) in shard.records().enumerate() {
            state = super::memory::checked_update(self.alg, pass, shard.first_index + local, &state, x)?;
        }
        Ok(state)
    }
}

impl<A: MemoryBoundedAlgorithm + ?Sized> SimulatedProtocol<'_, A> {
    /// The first transition error met while simulating a turn, if any.
    pub fn take_failure(&self) -> Option<Error> {
        self.failure.borrow_mut().take()
    }

    /// Runs the protocol and surfaces any transition error.
    pub fn run(&self, data: &SampleBatch) -> Result<(EstimateReport, Blackboard)> {
        let out = run_distributed(self, data)?;
        match self.take_failure() {
            Some(e) => Err(e),
            None => Ok(out),
        }
    }
}

impl<A: MemoryBoundedAlgorithm + ?Sized> Protocol for SimulatedProtocol<'_, A> {
    fn params(&self) -> DistributedParams {
        self.params
    }

    fn writer(&self, transcript: &[bool]) -> usize {
        (transcript.len() / self.state_bits()) % self.params.machines
    }

    fn bit(&self, shard: Shard<'_>, transcript: &[bool]) -> bool {
        let s = self.state_bits();
        let r = transcript.len();
        let turn_start = r - r % s;
        let mut cache = self.cache.borrow_mut();
        let fresh = !matches!(&*cache, Some((start, _)) if *start == turn_start);
        if fresh {
            match self.simulate_turn(shard, transcript, turn_start) {
                Ok(st) => *cache = Some((turn_start, st)),
                Err(e) => {
                    *cache = None;
                    self.failure.borrow_mut().get_or_insert(e);
                }
            }
        }
        cache.as_ref().map(|(_, st)| st.bits()[r - turn_start]).unwrap_or(false)
    }

    fn estimate(&self, transcript: &[bool]) -> Vec<f64> {
        let s = self.state_bits();
        let last = MachineState::from_bits(transcript[transcript.len().saturating_sub(s)..].to_vec());
        self.alg.estimate(&last)
    }
}

/// Builds the protocol with parameters `(N/n, n, s·T)`.
pub fn reduce_memory_to_distributed<A: MemoryBoundedAlgorithm + ?Sized>(
    alg: &A,
    samples: usize,
    per_machine: usize,
) -> Result<SimulatedProtocol<'_, A>> {
    if per_machine == 0 || samples == 0 || samples % per_machine != 0 {
        return Err(Error::InvalidArgument(format!("{per_machine} samples per machine does not divide N = {samples}")));
    }
    if alg.state_bits() == 0 || alg.passes() == 0 {
        return Err(Error::InvalidArgument("algorithm needs s ≥ 1 and T ≥ 1".into()));
    }
    Ok(SimulatedProtocol {
        alg,
        params: DistributedParams {
            machines: samples / per_machine,
            per_machine,
            bits_per_machine: alg.state_bits() * alg.passes(),
        },
        cache: RefCell::new(None),
        failure: RefCell::new(None),
    })
}
