//! Seed-replicated parameter sweeps and their CSV output.

use std::io::Write;

use memlab_core::estimators::{
    brute_force_cca, brute_force_ngca, cca_matricization_estimator, mr_matricization_estimator, ngca_spectral,
    partial_trace_spectral, tensor_power_method, BruteForceConfig, EstimateReport, PowerMethodConfig,
};
use memlab_core::harness::{
    reduce_memory_to_distributed, run_memory_bounded, wrap_iteration_as_memory_bounded, IterationPsi, Protocol,
    PartialTracePsi, QuantizerSpec, ResourceProfile, TensorPowerPsi,
};
use memlab_core::models::{build_bounded_llr_measure, build_mog_measure, sample, ModelSpec, SampleBatch};
use memlab_core::rng::{child_rng, child_seed, gaussian_vector};
use memlab_core::tensor::{overlap, EntryBudget};
use rayon::prelude::*;

use crate::config::{EstimatorKind, ExperimentConfig, MeasureChoice, ProblemKind};
use crate::error::{CliError, Result};

/// First line of every sweep CSV; bumped whenever columns change.
pub const CSV_VERSION_LINE: &str = "# memlab-sweep v1";

pub const COLUMNS: [&str; 16] = [
    "problem", "k", "d", "lambda", "N", "T", "s", "m", "n", "b", "estimator", "seed", "overlap", "iterations", "wall_ms",
    "NTs",
];

/// Index of the only column excluded from determinism comparisons.
pub const WALL_MS_COLUMN: usize = 14;

const DEFAULT_DELTA: f64 = 0.25;
const DEFAULT_TRUNCATION: f64 = 4.0;

/// Settings that come from the command line rather than the config file.
#[derive(Debug, Clone, Copy)]
pub struct RunOptions {
    /// Mixed into every per-run seed.
    pub master_seed: u64,
    pub threads: Option<usize>,
    pub budget: EntryBudget,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self { master_seed: 0, threads: None, budget: EntryBudget::default() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridPoint {
    pub d: usize,
    pub snr: f64,
    pub samples: usize,
    /// Passes and bits per coordinate, for quantized estimators only.
    pub harness: Option<(usize, u32)>,
}

/// The Cartesian product `d × λ × N (× T × B)` in row-major order.
pub fn grid(cfg: &ExperimentConfig) -> Vec<GridPoint> {
    let e = &cfg.experiment;
    let harness: Vec<Option<(usize, u32)>> = if e.estimator.is_quantized() {
        let h = cfg.harness_or_default();
        h.passes.iter().flat_map(|&t| h.bits.iter().map(move |&b| Some((t, b)))).collect()
    } else {
        vec![None]
    };
    let mut out = Vec::new();
    for &d in &e.d {
        for &snr in &e.snr {
            for &samples in &e.samples {
                out.extend(harness.iter().map(|&h| GridPoint { d, snr, samples, harness: h }));
            }
        }
    }
    out
}

/// One CSV row. Harness columns are empty for estimators that run outside
/// the memory-bounded model.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub problem: &'static str,
    pub k: usize,
    pub d: usize,
    pub snr: f64,
    pub samples: usize,
    pub passes: Option<usize>,
    pub state_bits: Option<usize>,
    pub machines: Option<usize>,
    pub per_machine: Option<usize>,
    pub bits_per_machine: Option<usize>,
    pub estimator: &'static str,
    pub seed: u64,
    pub overlap: f64,
    pub iterations: usize,
    pub wall_ms: f64,
    pub resource_product: Option<u128>,
}

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

impl SweepRow {
    pub fn fields(&self) -> [String; 16] {
        [
            self.problem.to_string(),
            self.k.to_string(),
            self.d.to_string(),
            self.snr.to_string(),
            self.samples.to_string(),
            opt(self.passes),
            opt(self.state_bits),
            opt(self.machines),
            opt(self.per_machine),
            opt(self.bits_per_machine),
            self.estimator.to_string(),
            self.seed.to_string(),
            self.overlap.to_string(),
            self.iterations.to_string(),
            format!("{:.3}", self.wall_ms),
            opt(self.resource_product),
        ]
    }
}

/// Seed used for the run at `(master, seed)`; sub-streams hang off it.
pub fn run_seed(master: u64, seed: u64) -> u64 {
    child_seed(master, seed)
}

/// The planted model for one grid point, hidden parameter drawn from the
/// run seed.
pub fn build_model(cfg: &ExperimentConfig, point: &GridPoint, seed: u64) -> Result<ModelSpec> {
    let e = &cfg.experiment;
    let mut rng = child_rng(seed, 0);
    let spec = match e.problem {
        ProblemKind::Tpca => ModelSpec::tpca_from_prior(e.k, point.d, point.snr, &mut rng)?,
        ProblemKind::Atpca => ModelSpec::atpca_coordinate(e.k, point.d, point.snr, &mut rng)?,
        ProblemKind::Ngca => {
            let measure = match e.measure {
                MeasureChoice::Mog => build_mog_measure(e.k, point.snr)?,
                MeasureChoice::BoundedLlr => build_bounded_llr_measure(e.k, point.snr)?,
            };
            ModelSpec::ngca_from_prior(point.d, measure, &mut rng)?
        }
        ProblemKind::Cca => ModelSpec::cca_coordinate(e.k, point.d, point.snr, &mut rng)?,
    };
    Ok(spec)
}

/// Draws the batch for one run after checking the entry budget.
pub fn draw_batch(spec: &ModelSpec, samples: usize, seed: u64, budget: EntryBudget) -> Result<SampleBatch> {
    let record = match spec.problem {
        memlab_core::models::Problem::Cca => spec.k * spec.d,
        memlab_core::models::Problem::Ngca => spec.d,
        _ => spec.d.pow(spec.k as u32),
    };
    let entries = samples as u128 * record as u128;
    if entries > u128::from(budget.0) {
        return Err(memlab_core::Error::Budget { entries, budget: budget.0 }.into());
    }
    Ok(sample(spec, samples, child_seed(seed, 1), budget)?)
}

fn score(truth: &[f64], estimate: &[f64], k: usize) -> Result<f64> {
    if truth.len() == estimate.len() {
        return Ok(overlap(truth, estimate)?);
    }
    // a tensor estimate of a vector signal is scored against v^{⊗k}
    let full = (0..k).fold(vec![1.0], |acc: Vec<f64>, _| {
        acc.iter().flat_map(|&a| truth.iter().map(move |&x| a * x)).collect()
    });
    Ok(overlap(&full, estimate)?)
}

struct Quantized {
    report: EstimateReport,
    profile: ResourceProfile,
    distributed: Option<(usize, usize, usize)>,
}

fn run_quantized<P: IterationPsi>(
    psi: P,
    cfg: &ExperimentConfig,
    batch: &SampleBatch,
    init: Vec<f64>,
    passes: usize,
    bits: u32,
) -> Result<Quantized> {
    let d = batch.d;
    let n = batch.len();
    let q = QuantizerSpec::new(bits, cfg.harness_or_default().range)?;
    let alg = wrap_iteration_as_memory_bounded(psi, q, passes, d, n, init, 2 * d * bits as usize)?;
    let profile = ResourceProfile::new(n as u64, passes as u64, (2 * d * bits as usize) as u64)?;
    match cfg.distributed {
        None => {
            let (report, _) = run_memory_bounded(&alg, batch)?;
            Ok(Quantized { report, profile, distributed: None })
        }
        Some(dist) => {
            let protocol = reduce_memory_to_distributed(&alg, n, dist.per_machine)?;
            let (report, _) = protocol.run(batch)?;
            let p = protocol.params();
            Ok(Quantized { report, profile, distributed: Some((p.machines, p.per_machine, p.bits_per_machine)) })
        }
    }
}

/// Runs one `(grid point, seed)` experiment.
pub fn run_point(cfg: &ExperimentConfig, point: &GridPoint, seed: u64, opts: &RunOptions) -> Result<SweepRow> {
    let e = &cfg.experiment;
    let rs = run_seed(opts.master_seed, seed);
    let spec = build_model(cfg, point, rs)?;
    let batch = draw_batch(&spec, point.samples, rs, opts.budget)?;
    let init_seed = child_seed(rs, 2 + cfg.estimator.init_seed);
    let init = gaussian_vector(point.d, init_seed);
    let power_dim = match e.estimator {
        EstimatorKind::Matricization | EstimatorKind::CcaMatricization => point.d.pow(e.k as u32 / 2),
        _ => point.d,
    };
    let defaults = PowerMethodConfig::for_dim(power_dim);
    let pcfg = PowerMethodConfig {
        max_iters: cfg.estimator.max_iters.unwrap_or(defaults.max_iters),
        tol: cfg.estimator.tol.unwrap_or(defaults.tol),
        init: (power_dim == point.d).then(|| init.clone()),
        init_seed,
    };
    let brute = || {
        let mut b = BruteForceConfig::new(
            cfg.estimator.delta.unwrap_or(DEFAULT_DELTA),
            cfg.estimator.truncation.unwrap_or(DEFAULT_TRUNCATION),
        );
        b.net_seed = child_seed(rs, 3);
        b
    };
    let mut row = SweepRow {
        problem: e.problem.name(),
        k: e.k,
        d: point.d,
        snr: point.snr,
        samples: point.samples,
        passes: None,
        state_bits: None,
        machines: None,
        per_machine: None,
        bits_per_machine: None,
        estimator: e.estimator.name(),
        seed,
        overlap: 0.0,
        iterations: 0,
        wall_ms: 0.0,
        resource_product: None,
    };
    let report = match e.estimator {
        EstimatorKind::Power => tensor_power_method(&batch, &pcfg)?,
        EstimatorKind::PartialTrace => partial_trace_spectral(&batch, &pcfg)?,
        EstimatorKind::Matricization => mr_matricization_estimator(&batch, &pcfg)?,
        EstimatorKind::NgcaSpectral => ngca_spectral(&batch, e.k, &pcfg)?,
        EstimatorKind::CcaMatricization => cca_matricization_estimator(&batch, &pcfg, opts.budget)?,
        EstimatorKind::BruteNgca => brute_force_ngca(&batch, e.k, &brute())?,
        EstimatorKind::BruteCca => brute_force_cca(&batch, &brute())?,
        EstimatorKind::QuantizedPower | EstimatorKind::QuantizedPartialTrace => {
            let (passes, bits) = point.harness.expect("quantized grid points carry harness settings");
            let out = if e.estimator == EstimatorKind::QuantizedPower {
                run_quantized(TensorPowerPsi { k: e.k }, cfg, &batch, init, passes, bits)?
            } else {
                run_quantized(PartialTracePsi { k: e.k }, cfg, &batch, init, passes, bits)?
            };
            row.passes = Some(out.profile.passes as usize);
            row.state_bits = Some(out.profile.state_bits as usize);
            row.resource_product = Some(out.profile.product());
            if let Some((m, n, b)) = out.distributed {
                row.machines = Some(m);
                row.per_machine = Some(n);
                row.bits_per_machine = Some(b);
            }
            let mut report = out.report;
            report.iterations = passes;
            report
        }
    };
    row.overlap = score(&spec.truth(), &report.estimate, e.k)?;
    row.iterations = report.iterations;
    row.wall_ms = report.wall_ms;
    Ok(row)
}

/// Runs every `(grid point, seed)` pair on a worker pool. Rows come back
/// sorted by grid index, then by seed.
pub fn run_sweep(cfg: &ExperimentConfig, opts: &RunOptions) -> Result<Vec<SweepRow>> {
    cfg.validate()?;
    let points = grid(cfg);
    let mut tasks: Vec<(usize, &GridPoint, u64)> = points
        .iter()
        .enumerate()
        .flat_map(|(g, p)| cfg.experiment.seeds.iter().map(move |&s| (g, p, s)))
        .collect();
    tasks.sort_by_key(|&(g, _, s)| (g, s));
    let work = || {
        tasks
            .par_iter()
            .map(|&(g, p, s)| {
                run_point(cfg, p, s, opts).map_err(|err| match err {
                    CliError::Core(source) => CliError::Run { context: format!("grid point {g}, seed {s}"), source },
                    other => other,
                })
            })
            .collect::<Result<Vec<_>>>()
    };
    match opts.threads {
        Some(n) => rayon::ThreadPoolBuilder::new().num_threads(n).build()?.install(work),
        None => work(),
    }
}

pub fn write_csv<W: Write>(rows: &[SweepRow], mut out: W) -> Result<()> {
    writeln!(out, "{CSV_VERSION_LINE}")?;
    let mut w = csv::Writer::from_writer(out);
    w.write_record(COLUMNS)?;
    for row in rows {
        w.write_record(row.fields())?;
    }
    w.flush()?;
    Ok(())
}

/// The CSV body with the wall-clock column blanked, for replay comparisons.
pub fn numeric_columns(csv_text: &str) -> Result<Vec<Vec<String>>> {
    let body = csv_text.strip_prefix(CSV_VERSION_LINE).unwrap_or(csv_text).trim_start_matches('\n');
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(body.as_bytes());
    let mut out = Vec::new();
    for rec in reader.records() {
        let rec = rec?;
        out.push(
            rec.iter()
                .enumerate()
                .map(|(i, f)| if i == WALL_MS_COLUMN { String::new() } else { f.to_string() })
                .collect(),
        );
    }
    Ok(out)
}
