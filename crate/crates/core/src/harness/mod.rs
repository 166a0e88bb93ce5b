//! Two resource-limited execution models and the simulation between them.
//!
//! A memory-bounded algorithm streams over `N` samples `T` times while
//! carrying nothing but an `s`-bit state. A blackboard protocol has `m`
//! machines holding `n` samples each; in every round one machine, chosen
//! from the transcript so far, appends one bit. [`reduce_memory_to_distributed`]
//! turns the first kind into the second with parameters `(N/n, n, sT)`.

mod algorithms;
mod distributed;
mod memory;
mod quantizer;
mod reduction;
mod state;

pub use algorithms::{
    fixture_algorithms, IterationPsi, PartialTracePsi, QuantizedIteration, RunningMean, TensorPowerPsi,
    ThresholdCount, XorSignFold,
};
pub use distributed::{run_distributed, Blackboard, DistributedParams, Protocol, Shard};
pub use memory::{run_memory_bounded, MemoryBoundedAlgorithm, ResourceProfile};
pub use quantizer::QuantizerSpec;
pub use reduction::{reduce_memory_to_distributed, SimulatedProtocol};
pub use state::MachineState;

/// Wraps `u_t = (1/N) Σ X_i{ψ_t(u_{t−1}), ·}` as a memory-bounded algorithm
/// whose state is the quantized iterate followed by the quantized partial
/// sum, `s = 2 d B` bits.
pub fn wrap_iteration_as_memory_bounded<P: IterationPsi>(
    psi: P,
    quantizer: QuantizerSpec,
    passes: usize,
    dim: usize,
    samples: usize,
    init: Vec<f64>,
    state_budget: usize,
) -> crate::Result<QuantizedIteration<P>> {
    QuantizedIteration::new(psi, quantizer, passes, dim, samples, init, state_budget)
}
