use super::rademacher::rademacher_mean_moment;
use crate::error::{Error, Result};
use crate::hermite::sign_coefficient;
use crate::models::{cca_lambda_k, NonGaussMeasure};

const MAX_SAMPLES: usize = 6;
const MAX_DIM: usize = 10;
const MAX_DEGREE: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LdlrProblem {
    Ngca,
    Cca,
}

/// A small instance whose low-degree norm `‖L^{≤t} − 1‖₂²` is summed exactly.
#[derive(Debug, Clone, PartialEq)]
pub struct LdlrInstance {
    pub problem: LdlrProblem,
    pub samples: usize,
    pub d: usize,
    pub k: usize,
    pub degree: usize,
    /// `ν̂_0, …, ν̂_t`: Hermite coefficients of the non-Gaussian measure for
    /// NGCA, of `sign` for CCA.
    pub coeffs: Vec<f64>,
    pub snr: f64,
}

impl LdlrInstance {
    pub fn ngca(samples: usize, d: usize, degree: usize, measure: &NonGaussMeasure) -> Result<Self> {
        let all = measure.coefficients();
        if all.len() <= degree {
            return Err(Error::UnderResolved { have: all.len().saturating_sub(1), need: degree });
        }
        let inst = Self {
            problem: LdlrProblem::Ngca,
            samples,
            d,
            k: measure.order(),
            degree,
            coeffs: all[..=degree].to_vec(),
            snr: measure.snr(),
        };
        inst.validate()?;
        Ok(inst)
    }

    pub fn cca(samples: usize, d: usize, k: usize, degree: usize, snr: f64) -> Result<Self> {
        let inst = Self {
            problem: LdlrProblem::Cca,
            samples,
            d,
            k,
            degree,
            coeffs: (0..=degree as u64).map(sign_coefficient).collect(),
            snr,
        };
        inst.validate()?;
        Ok(inst)
    }

    fn validate(&self) -> Result<()> {
        if self.degree == 0 || self.samples == 0 || self.d == 0 {
            return Err(Error::InvalidArgument("instance needs N, d, t ≥ 1".into()));
        }
        if self.coeffs.len() != self.degree + 1 || self.coeffs.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidArgument("coefficients must be finite and cover 0..=t".into()));
        }
        if self.samples > MAX_SAMPLES || self.d > MAX_DIM || self.degree > MAX_DEGREE {
            let size = (self.degree as u128 + 1).pow(self.samples as u32) << self.d;
            let limit = (MAX_DEGREE as u128 + 1).pow(MAX_SAMPLES as u32) << MAX_DIM;
            return Err(Error::EnumerationBudget { size, limit });
        }
        Ok(())
    }
}

/// Calls `visit(entries)` for every vector of `len` integers, each at least
/// `min`, with total at most `cap`.
fn for_each_bounded(len: usize, min: usize, cap: usize, visit: &mut impl FnMut(&[usize])) {
    fn rec(buf: &mut Vec<usize>, len: usize, min: usize, room: usize, visit: &mut impl FnMut(&[usize])) {
        if buf.len() == len {
            visit(buf);
            return;
        }
        let reserve = min * (len - buf.len() - 1);
        if room < min + reserve {
            return;
        }
        for v in min..=room - reserve {
            buf.push(v);
            rec(buf, len, min, room - v, visit);
            buf.pop();
        }
    }
    rec(&mut Vec::with_capacity(len), len, min, cap, visit);
}

fn binomial(n: usize, r: usize) -> f64 {
    (0..r).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// `‖L^{≤t} − 1‖₂²` by direct enumeration of multi-indices.
///
/// NGCA: `Σ_{s ∈ ℕ₀^N, 1 ≤ ‖s‖₁ ≤ t} Π_i ν̂²_{s_i} · E V̄^{‖s‖₁}`.
///
/// CCA: `Σ_{S ⊆ [N], |S| ≥ 1} (λ/λ_k)^{2|S|} Σ Π_ℓ [Π_i ν̂²_{t^{(ℓ)}_i} · E V̄^{‖t^{(ℓ)}‖₁}]`
/// over `t^{(1)}, …, t^{(k)} ∈ ℕ^{|S|}` with `Σ_ℓ ‖t^{(ℓ)}‖₁ ≤ t`.
pub fn ldlr_norm_exact(inst: &LdlrInstance) -> Result<f64> {
    inst.validate()?;
    let moments: Vec<f64> =
        (0..=inst.degree as u32).map(|j| rademacher_mean_moment(inst.d, j, 0)).collect::<Result<_>>()?;
    let sq: Vec<f64> = inst.coeffs.iter().map(|c| c * c).collect();
    let mut total = 0.0;
    match inst.problem {
        LdlrProblem::Ngca => {
            for_each_bounded(inst.samples, 0, inst.degree, &mut |s| {
                let norm1: usize = s.iter().sum();
                if norm1 >= 1 {
                    total += s.iter().map(|&si| sq[si]).product::<f64>() * moments[norm1];
                }
            });
        }
        LdlrProblem::Cca => {
            if inst.k == 0 {
                return Err(Error::InvalidArgument("CCA needs k ≥ 1".into()));
            }
            let ratio = inst.snr / cca_lambda_k(inst.k);
            for size in 1..=inst.samples.min(inst.degree / inst.k) {
                let mut inner = 0.0;
                for_each_bounded(inst.k * size, 1, inst.degree, &mut |flat| {
                    inner += flat
                        .chunks_exact(size)
                        .map(|block| {
                            block.iter().map(|&x| sq[x]).product::<f64>() * moments[block.iter().sum::<usize>()]
                        })
                        .product::<f64>();
                });
                total += binomial(inst.samples, size) * ratio.powi(2 * size as i32) * inner;
            }
        }
    }
    Ok(total)
}
