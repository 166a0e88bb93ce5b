use super::memory::MemoryBoundedAlgorithm;
use super::quantizer::QuantizerSpec;
use super::state::MachineState;
use crate::error::{Error, Result};
use crate::estimators::tensor_power;
use crate::linalg::norm;
use crate::tensor::contract_into;

/// The map `ψ_t` of the iteration `u_t = (1/N) Σ X_i{ψ_t(u_{t−1}), ·}`.
pub trait IterationPsi {
    /// Tensor order `k` of the samples.
    fn order(&self) -> usize;

    /// Flattened order-`(k−1)` tensor; zero when `u = 0`.
    fn psi(&self, t: usize, u: &[f64]) -> Vec<f64>;
}

/// `ψ(u) = u^{⊗(k−1)} / ‖u‖^{k−1}`. For `k = 2` this is `u / ‖u‖`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TensorPowerPsi {
    pub k: usize,
}

impl IterationPsi for TensorPowerPsi {
    fn order(&self) -> usize {
        self.k
    }

    fn psi(&self, _t: usize, u: &[f64]) -> Vec<f64> {
        let n = norm(u);
        if n == 0.0 {
            return vec![0.0; u.len().pow(self.k as u32 - 1)];
        }
        let unit: Vec<f64> = u.iter().map(|x| x / n).collect();
        tensor_power(&unit, self.k - 1)
    }
}

/// `ψ(u) = I ⊗ ⋯ ⊗ I ⊗ u / ‖u‖` for even `k`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PartialTracePsi {
    pub k: usize,
}

impl IterationPsi for PartialTracePsi {
    fn order(&self) -> usize {
        self.k
    }

    fn psi(&self, _t: usize, u: &[f64]) -> Vec<f64> {
        let d = u.len();
        let ell = self.k / 2 - 1;
        let mut out = vec![0.0; d.pow(self.k as u32 - 1)];
        let n = norm(u);
        if n == 0.0 {
            return out;
        }
        for gamma in 0..d.pow(ell as u32) {
            let mut rest = gamma;
            let mut lead = 0;
            let mut place = 1;
            for _ in 0..ell {
                lead += (rest % d) * (d + 1) * place;
                rest /= d;
                place *= d * d;
            }
            out[lead * d..(lead + 1) * d].iter_mut().zip(u).for_each(|(o, x)| *o = x / n);
        }
        out
    }
}

/// Quantized version of the iteration template.
///
/// The state holds the iterate (`d` codes) followed by the running partial
/// sum (`d` codes). During pass 0 the iterate is the fixed starting vector;
/// the last sample of each pass moves the partial sum into the iterate slot.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantizedIteration<P> {
    psi: P,
    quantizer: QuantizerSpec,
    passes: usize,
    dim: usize,
    samples: usize,
    init: Vec<f64>,
}

impl<P: IterationPsi> QuantizedIteration<P> {
    pub fn new(
        psi: P,
        quantizer: QuantizerSpec,
        passes: usize,
        dim: usize,
        samples: usize,
        init: Vec<f64>,
        state_budget: usize,
    ) -> Result<Self> {
        if passes == 0 || dim == 0 || samples == 0 {
            return Err(Error::InvalidArgument("passes, dimension and sample count must be positive".into()));
        }
        if psi.order() < 2 {
            return Err(Error::InvalidArgument("iteration needs tensor order at least 2".into()));
        }
        if init.len() != dim {
            return Err(Error::Shape(format!("initial vector has length {}, expected {dim}", init.len())));
        }
        let need = 2 * dim * quantizer.bits() as usize;
        if state_budget < need {
            return Err(Error::InvalidArgument(format!(
                "state budget {state_budget} bits is below 2·d·B = {need}"
            )));
        }
        Ok(Self { psi, quantizer, passes, dim, samples, init })
    }

    fn width(&self) -> u32 {
        self.quantizer.bits()
    }

    fn read_block(&self, state: &MachineState, block: usize) -> Vec<f64> {
        let w = self.width();
        (0..self.dim)
            .map(|j| {
                let off = (block * self.dim + j) * w as usize;
                self.quantizer.decode(state.read_code(off, w).expect("state length checked by harness"))
            })
            .collect()
    }

    fn write_block(&self, state: &mut MachineState, block: usize, values: &[f64]) {
        let w = self.width();
        for (j, &v) in values.iter().enumerate() {
            let off = (block * self.dim + j) * w as usize;
            state.write_code(off, w, self.quantizer.encode(v)).expect("state length checked by harness");
        }
    }
}

impl<P: IterationPsi> MemoryBoundedAlgorithm for QuantizedIteration<P> {
    fn state_bits(&self) -> usize {
        2 * self.dim * self.width() as usize
    }

    fn passes(&self) -> usize {
        self.passes
    }

    fn update(&self, t: usize, i: usize, state: &MachineState, sample: &[f64]) -> MachineState {
        let iterate = if t == 0 { self.init.clone() } else { self.read_block(state, 0) };
        let mut partial = if i == 0 { vec![0.0; self.dim] } else { self.read_block(state, 1) };
        let psi = self.psi.psi(t, &iterate);
        contract_into(sample, self.dim, &psi, 1.0 / self.samples as f64, &mut partial);
        let mut next = MachineState::zeros(self.state_bits());
        if i + 1 == self.samples {
            self.write_block(&mut next, 0, &partial);
        } else {
            self.write_block(&mut next, 0, &iterate);
            self.write_block(&mut next, 1, &partial);
        }
        next
    }

    /// The final iterate scaled to unit norm.
    fn estimate(&self, state: &MachineState) -> Vec<f64> {
        let mut u = self.read_block(state, 0);
        let n = norm(&u);
        if n > 0.0 {
            u.iter_mut().for_each(|x| *x /= n);
        }
        u
    }
}

/// XOR of the sign bits of the first coordinate, one pass, one bit.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct XorSignFold;

impl MemoryBoundedAlgorithm for XorSignFold {
    fn state_bits(&self) -> usize {
        1
    }

    fn passes(&self) -> usize {
        1
    }

    fn update(&self, _t: usize, _i: usize, state: &MachineState, sample: &[f64]) -> MachineState {
        MachineState::from_bits(vec![state.bits()[0] ^ (sample[0] < 0.0)])
    }

    fn estimate(&self, state: &MachineState) -> Vec<f64> {
        vec![f64::from(u8::from(state.bits()[0]))]
    }
}

/// Quantized running mean of the first coordinate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunningMean {
    pub quantizer: QuantizerSpec,
    pub samples: usize,
}

impl MemoryBoundedAlgorithm for RunningMean {
    fn state_bits(&self) -> usize {
        self.quantizer.bits() as usize
    }

    fn passes(&self) -> usize {
        1
    }

    fn update(&self, _t: usize, i: usize, state: &MachineState, sample: &[f64]) -> MachineState {
        let w = self.quantizer.bits();
        let acc = if i == 0 { 0.0 } else { self.quantizer.decode(state.read_code(0, w).unwrap_or(0)) };
        let mut next = MachineState::zeros(w as usize);
        next.write_code(0, w, self.quantizer.encode(acc + sample[0] / self.samples as f64))
            .expect("width matches state");
        next
    }

    fn estimate(&self, state: &MachineState) -> Vec<f64> {
        vec![self.quantizer.decode(state.read_code(0, self.quantizer.bits()).unwrap_or(0))]
    }
}

/// Two passes: the quantized mean of the first coordinate, then the number
/// of samples whose first coordinate exceeds that mean (16-bit counter).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThresholdCount {
    pub quantizer: QuantizerSpec,
    pub samples: usize,
}

const COUNTER_BITS: u32 = 16;

impl ThresholdCount {
    pub fn new(quantizer: QuantizerSpec, samples: usize) -> Result<Self> {
        if samples == 0 || samples >= 1 << COUNTER_BITS {
            return Err(Error::InvalidArgument(format!("threshold count supports 1..65535 samples, got {samples}")));
        }
        Ok(Self { quantizer, samples })
    }
}

impl MemoryBoundedAlgorithm for ThresholdCount {
    fn state_bits(&self) -> usize {
        self.quantizer.bits() as usize + COUNTER_BITS as usize
    }

    fn passes(&self) -> usize {
        2
    }

    fn update(&self, t: usize, i: usize, state: &MachineState, sample: &[f64]) -> MachineState {
        let w = self.quantizer.bits();
        let mut next = state.clone();
        if t == 0 {
            let acc = if i == 0 { 0.0 } else { self.quantizer.decode(state.read_code(0, w).unwrap_or(0)) };
            next.write_code(0, w, self.quantizer.encode(acc + sample[0] / self.samples as f64))
                .expect("width matches state");
        } else {
            let mean = self.quantizer.decode(state.read_code(0, w).unwrap_or(0));
            let count = if i == 0 { 0 } else { state.read_code(w as usize, COUNTER_BITS).unwrap_or(0) };
            let count = count + u64::from(sample[0] > mean);
            next.write_code(w as usize, COUNTER_BITS, count).expect("counter below 2^16");
        }
        next
    }

    fn estimate(&self, state: &MachineState) -> Vec<f64> {
        let w = self.quantizer.bits();
        let mean = self.quantizer.decode(state.read_code(0, w).unwrap_or(0));
        let count = state.read_code(w as usize, COUNTER_BITS).unwrap_or(0);
        vec![mean, count as f64]
    }
}

/// A fixed starting vector for the iteration fixtures.
fn fixture_init(d: usize) -> Vec<f64> {
    (0..d).map(|i| 1.0 + 0.5 * i as f64 / d as f64).collect()
}

/// The five registered algorithms used by the reduction equality checks.
///
/// The iteration fixtures expect order-`k` tensor records with even `k ≥ 2`.
pub fn fixture_algorithms(
    d: usize,
    k: usize,
    samples: usize,
) -> Result<Vec<(String, Box<dyn MemoryBoundedAlgorithm + Send + Sync>)>> {
    if k < 2 || k % 2 != 0 {
        return Err(Error::InvalidArgument(format!("fixture set needs even k ≥ 2, got {k}")));
    }
    let q = QuantizerSpec::default();
    let budget = 2 * d * q.bits() as usize;
    let power = QuantizedIteration::new(TensorPowerPsi { k }, q, 3, d, samples, fixture_init(d), budget)?;
    let trace = QuantizedIteration::new(PartialTracePsi { k }, q, 3, d, samples, fixture_init(d), budget)?;
    Ok(vec![
        ("xor_sign_fold".to_string(), Box::new(XorSignFold) as Box<dyn MemoryBoundedAlgorithm + Send + Sync>),
        ("tensor_power".to_string(), Box::new(power)),
        ("partial_trace".to_string(), Box::new(trace)),
        ("running_mean".to_string(), Box::new(RunningMean { quantizer: q, samples })),
        ("threshold_count".to_string(), Box::new(ThresholdCount::new(q, samples)?)),
    ])
}
