//! The `sample` and `reduce` verbs. Both use the first grid point and the
//! first seed of a config.

use std::io::Write;

use memlab_core::harness::{
    reduce_memory_to_distributed, run_memory_bounded, wrap_iteration_as_memory_bounded, IterationPsi,
    MemoryBoundedAlgorithm, PartialTracePsi, Protocol, QuantizerSpec, TensorPowerPsi,
};
use memlab_core::models::{batch_io, SampleBatch};
use memlab_core::rng::{child_seed, gaussian_vector};

use crate::config::{EstimatorKind, ExperimentConfig};
use crate::error::{CliError, Result};
use crate::sweep::{build_model, draw_batch, grid, run_seed, GridPoint, RunOptions};

fn first_run(cfg: &ExperimentConfig, opts: &RunOptions) -> (GridPoint, u64) {
    let point = grid(cfg)[0];
    (point, run_seed(opts.master_seed, cfg.experiment.seeds[0]))
}

/// Draws the batch of the first `(grid point, seed)` run.
pub fn sample_batch(cfg: &ExperimentConfig, opts: &RunOptions) -> Result<SampleBatch> {
    cfg.validate()?;
    let (point, seed) = first_run(cfg, opts);
    let spec = build_model(cfg, &point, seed)?;
    draw_batch(&spec, point.samples, seed, opts.budget)
}

pub fn write_sample<W: Write>(batch: &SampleBatch, out: W) -> Result<()> {
    Ok(batch_io::write_batch(out, batch)?)
}

/// Outcome of running one quantized algorithm both directly and through
/// the blackboard simulation.
#[derive(Debug, Clone, PartialEq)]
pub struct ReduceSummary {
    pub samples: usize,
    pub passes: usize,
    pub state_bits: usize,
    pub machines: usize,
    pub per_machine: usize,
    pub bits_per_machine: usize,
    pub transcript_len: usize,
    /// Whether the two estimates agree bit for bit.
    pub identical: bool,
    /// One `round writer bit` line per round.
    pub transcript: String,
}

impl std::fmt::Display for ReduceSummary {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "memory-bounded: N={} T={} s={}", self.samples, self.passes, self.state_bits)?;
        writeln!(f, "blackboard:     m={} n={} b={}", self.machines, self.per_machine, self.bits_per_machine)?;
        writeln!(f, "transcript:     {} bits", self.transcript_len)?;
        write!(f, "estimates:      {}", if self.identical { "bit-identical" } else { "DIFFERENT" })
    }
}

fn reduce_with<P: IterationPsi>(psi: P, cfg: &ExperimentConfig, batch: &SampleBatch, seed: u64) -> Result<ReduceSummary> {
    let Some(dist) = cfg.distributed else {
        return Err(CliError::Config("reduce needs a [distributed] section".into()));
    };
    let h = cfg.harness_or_default();
    let (passes, bits) = (h.passes[0], h.bits[0]);
    let d = batch.d;
    let n = batch.len();
    let init = gaussian_vector(d, child_seed(seed, 2 + cfg.estimator.init_seed));
    let q = QuantizerSpec::new(bits, h.range)?;
    let alg = wrap_iteration_as_memory_bounded(psi, q, passes, d, n, init, 2 * d * bits as usize)?;
    let (direct, _) = run_memory_bounded(&alg, batch)?;
    let protocol = reduce_memory_to_distributed(&alg, n, dist.per_machine)?;
    let (reduced, board) = protocol.run(batch)?;
    let identical = direct.estimate.len() == reduced.estimate.len()
        && direct.estimate.iter().zip(&reduced.estimate).all(|(a, b)| a.to_bits() == b.to_bits());
    let p = protocol.params();
    Ok(ReduceSummary {
        samples: n,
        passes,
        state_bits: alg.state_bits(),
        machines: p.machines,
        per_machine: p.per_machine,
        bits_per_machine: p.bits_per_machine,
        transcript_len: board.bits.len(),
        identical,
        transcript: board.dump(),
    })
}

/// Runs the first grid point's quantized algorithm directly and as a
/// blackboard protocol.
pub fn reduce(cfg: &ExperimentConfig, opts: &RunOptions) -> Result<ReduceSummary> {
    cfg.validate()?;
    let (point, seed) = first_run(cfg, opts);
    let spec = build_model(cfg, &point, seed)?;
    let batch = draw_batch(&spec, point.samples, seed, opts.budget)?;
    let k = cfg.experiment.k;
    match cfg.experiment.estimator {
        EstimatorKind::QuantizedPower => reduce_with(TensorPowerPsi { k }, cfg, &batch, seed),
        EstimatorKind::QuantizedPartialTrace => reduce_with(PartialTracePsi { k }, cfg, &batch, seed),
        other => Err(CliError::Config(format!("reduce needs a quantized estimator, not {}", other.name()))),
    }
}
