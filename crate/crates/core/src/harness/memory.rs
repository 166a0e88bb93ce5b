use std::time::Instant;

use super::state::MachineState;
use crate::error::{Error, Result};
use crate::estimators::{EstimateReport, EstimateShape};
use crate::models::SampleBatch;

/// `(N, T, s)`: samples, passes and state bits of a memory-bounded run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ResourceProfile {
    pub samples: u64,
    pub passes: u64,
    pub state_bits: u64,
}

impl ResourceProfile {
    pub fn new(samples: u64, passes: u64, state_bits: u64) -> Result<Self> {
        if samples == 0 || passes == 0 || state_bits == 0 {
            return Err(Error::InvalidArgument("resource profile entries must be at least 1".into()));
        }
        Ok(Self { samples, passes, state_bits })
    }

    /// `N · T · s` in 128-bit arithmetic; saturates only when all three
    /// factors are near `u64::MAX`.
    pub fn product(&self) -> u128 {
        (self.samples as u128 * self.passes as u128).saturating_mul(self.state_bits as u128)
    }
}

/// A multi-pass streaming algorithm with an `s`-bit state.
///
/// The transition sees exactly the pass index `t`, the sample index `i`,
/// the current state and the current sample; nothing else survives between
/// calls because `&self` is read-only and the state is the only carried value.
pub trait MemoryBoundedAlgorithm {
    fn state_bits(&self) -> usize;

    fn passes(&self) -> usize;

    /// `f_{t,i}(state, x_i)`.
    fn update(&self, t: usize, i: usize, state: &MachineState, sample: &[f64]) -> MachineState;

    /// `g(state)`.
    fn estimate(&self, state: &MachineState) -> Vec<f64>;

    fn name(&self) -> String {
        std::any::type_name::<Self>().rsplit("::").next().unwrap_or("algorithm").to_string()
    }
}

pub(crate) fn checked_update<A: MemoryBoundedAlgorithm + ?Sized>(
    alg: &A,
    t: usize,
    i: usize,
    state: &MachineState,
    sample: &[f64],
) -> Result<MachineState> {
    let next = alg.update(t, i, state, sample);
    if next.len() != alg.state_bits() {
        return Err(Error::StateLength { expected: alg.state_bits(), got: next.len() });
    }
    Ok(next)
}

/// Runs `T` passes over the stream in `(t, i)` lexicographic order starting
/// from the all-zero state and returns `g` of the final state.
pub fn run_memory_bounded<A: MemoryBoundedAlgorithm + ?Sized>(
    alg: &A,
    data: &SampleBatch,
) -> Result<(EstimateReport, MachineState)> {
    let started = Instant::now();
    let s = alg.state_bits();
    let passes = alg.passes();
    let profile = ResourceProfile::new(data.len() as u64, passes as u64, s as u64)?;
    let mut state = MachineState::zeros(s);
    for t in 0..passes {
        for (i, x) in data.records().enumerate() {
            state = checked_update(alg, t, i, &state, x)?;
        }
    }
    let estimate = alg.estimate(&state);
    let dim = estimate.len();
    let mut report = EstimateReport::new(estimate, EstimateShape::Vector, dim, started);
    report.iterations = passes;
    report.profile = Some(profile);
    Ok((report, state))
}
