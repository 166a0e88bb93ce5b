use std::fmt::Write as _;
use std::time::Instant;

use crate::error::{Error, Result};
use crate::estimators::{EstimateReport, EstimateShape};
use crate::models::SampleBatch;

/// `(m, n, b)`: machines, samples per machine, bits written per machine.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct DistributedParams {
    pub machines: usize,
    pub per_machine: usize,
    pub bits_per_machine: usize,
}

impl DistributedParams {
    pub fn rounds(&self) -> usize {
        self.machines * self.bits_per_machine
    }
}

/// Read-only view of one machine's local samples.
#[derive(Debug, Clone, Copy)]
pub struct Shard<'a> {
    data: &'a [f64],
    record_len: usize,
    /// Global index of this shard's first sample.
    pub first_index: usize,
}

impl<'a> Shard<'a> {
    pub fn len(&self) -> usize {
        self.data.len() / self.record_len
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn records(&self) -> std::slice::ChunksExact<'a, f64> {
        self.data.chunks_exact(self.record_len)
    }
}

/// A deterministic blackboard protocol.
///
/// The writer of round `t` may depend only on the transcript `Y_{<t}`, the
/// bit only on the writer's shard and `Y_{<t}`, and the estimate only on the
/// full transcript. The signatures below hand out nothing else.
pub trait Protocol {
    fn params(&self) -> DistributedParams;

    fn writer(&self, transcript: &[bool]) -> usize;

    fn bit(&self, shard: Shard<'_>, transcript: &[bool]) -> bool;

    fn estimate(&self, transcript: &[bool]) -> Vec<f64>;
}

/// The transcript together with the per-round writer log.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Blackboard {
    pub params: DistributedParams,
    pub bits: Vec<bool>,
    pub writers: Vec<usize>,
}

impl Blackboard {
    /// Recomputes every writer from the transcript prefix alone.
    pub fn audit_writers<P: Protocol + ?Sized>(&self, protocol: &P) -> bool {
        self.writers.iter().enumerate().all(|(t, &w)| protocol.writer(&self.bits[..t]) == w)
    }

    /// One line per round: `t ℓ_t Y_t`.
    pub fn dump(&self) -> String {
        let mut out = String::with_capacity(self.bits.len() * 8);
        for (t, (w, b)) in self.writers.iter().zip(&self.bits).enumerate() {
            writeln!(out, "{t} {w} {}", u8::from(*b)).expect("writing to a String");
        }
        out
    }
}

/// Splits `data` into `m` contiguous shards of `n` records.
pub(crate) fn shards(data: &SampleBatch, params: DistributedParams) -> Result<Vec<Shard<'_>>> {
    if params.machines * params.per_machine != data.len() {
        return Err(Error::Protocol(format!(
            "{} machines with {} samples each cannot hold {} samples",
            params.machines,
            params.per_machine,
            data.len()
        )));
    }
    let len = data.record_len();
    Ok(data
        .data()
        .chunks_exact(params.per_machine * len)
        .enumerate()
        .map(|(j, chunk)| Shard { data: chunk, record_len: len, first_index: j * params.per_machine })
        .collect())
}

/// Executes all `m · b` rounds and returns the transcript-only estimate.
pub fn run_distributed<P: Protocol + ?Sized>(protocol: &P, data: &SampleBatch) -> Result<(EstimateReport, Blackboard)> {
    let started = Instant::now();
    let params = protocol.params();
    let shards = shards(data, params)?;
    let rounds = params.rounds();
    let mut bits = Vec::with_capacity(rounds);
    let mut writers = Vec::with_capacity(rounds);
    let mut written = vec![0usize; params.machines];
    for _ in 0..rounds {
        let w = protocol.writer(&bits);
        if w >= params.machines {
            return Err(Error::Protocol(format!("writer {w} does not exist")));
        }
        written[w] += 1;
        if written[w] > params.bits_per_machine {
            return Err(Error::Protocol(format!(
                "machine {w} selected more than {} times",
                params.bits_per_machine
            )));
        }
        let y = protocol.bit(shards[w], &bits);
        bits.push(y);
        writers.push(w);
    }
    if let Some(j) = written.iter().position(|&c| c != params.bits_per_machine) {
        return Err(Error::Protocol(format!(
            "machine {j} wrote {} bits, expected {}",
            written[j], params.bits_per_machine
        )));
    }
    let estimate = protocol.estimate(&bits);
    let dim = estimate.len();
    let mut report = EstimateReport::new(estimate, EstimateShape::Vector, dim, started);
    report.iterations = rounds;
    Ok((report, Blackboard { params, bits, writers }))
}
