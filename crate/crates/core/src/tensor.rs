//! Dense order-k tensors over `R^d`, stored flat in row-major order with the
//! last index varying fastest.

use crate::error::{Error, Result};
use crate::linalg::Matrix;

/// Default ceiling on the number of stored entries.
pub const DEFAULT_ENTRY_BUDGET: u64 = 100_000_000;

/// Upper bound on `d^k` a caller is willing to allocate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EntryBudget(pub u64);

impl Default for EntryBudget {
    fn default() -> Self {
        EntryBudget(DEFAULT_ENTRY_BUDGET)
    }
}

impl EntryBudget {
    /// Number of entries of an order-`order` tensor in dimension `dim`,
    /// or an error if that exceeds the budget.
    pub fn check(self, order: usize, dim: usize) -> Result<usize> {
        let entries = (dim as u128).checked_pow(order as u32).unwrap_or(u128::MAX);
        if entries > self.0 as u128 {
            return Err(Error::Budget { entries, budget: self.0 });
        }
        Ok(entries as usize)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DenseTensor {
    order: usize,
    dim: usize,
    data: Vec<f64>,
}

impl DenseTensor {
    pub fn zeros(order: usize, dim: usize, budget: EntryBudget) -> Result<Self> {
        if order == 0 || dim == 0 {
            return Err(Error::InvalidArgument("tensor order and dimension must be positive".into()));
        }
        let len = budget.check(order, dim)?;
        Ok(Self { order, dim, data: vec![0.0; len] })
    }

    pub fn from_vec(order: usize, dim: usize, data: Vec<f64>) -> Result<Self> {
        if order == 0 || dim == 0 {
            return Err(Error::InvalidArgument("tensor order and dimension must be positive".into()));
        }
        let expected = (dim as u128).checked_pow(order as u32);
        if expected != Some(data.len() as u128) {
            return Err(Error::Shape(format!(
                "{} entries cannot form an order-{order} tensor in dimension {dim}",
                data.len()
            )));
        }
        Ok(Self { order, dim, data })
    }

    /// The outer product `scale · v_1 ⊗ ⋯ ⊗ v_k`.
    pub fn outer(factors: &[&[f64]], scale: f64, budget: EntryBudget) -> Result<Self> {
        let dim = factors.first().map(|v| v.len()).unwrap_or(0);
        if factors.iter().any(|v| v.len() != dim) {
            return Err(Error::Shape("outer product factors differ in length".into()));
        }
        let mut t = Self::zeros(factors.len(), dim, budget)?;
        t.data[0] = scale;
        let mut filled = 1;
        for v in factors {
            // expand in place from the back so earlier entries are still unread
            for j in (0..filled).rev() {
                let base = t.data[j];
                for (i, &vi) in v.iter().enumerate() {
                    t.data[j * dim + i] = base * vi;
                }
            }
            filled *= dim;
        }
        Ok(t)
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    pub fn flat_index(&self, index: &[usize]) -> usize {
        debug_assert_eq!(index.len(), self.order);
        index.iter().fold(0, |acc, &i| acc * self.dim + i)
    }

    pub fn get(&self, index: &[usize]) -> f64 {
        self.data[self.flat_index(index)]
    }

    /// Inverse of [`flat_index`](Self::flat_index).
    pub fn multi_index(&self, mut flat: usize) -> Vec<usize> {
        let mut idx = vec![0; self.order];
        for slot in idx.iter_mut().rev() {
            *slot = flat % self.dim;
            flat /= self.dim;
        }
        idx
    }

    fn check_same_shape(&self, other: &Self) -> Result<()> {
        if self.order != other.order || self.dim != other.dim {
            return Err(Error::Shape(format!(
                "order/dim ({}, {}) vs ({}, {})",
                self.order, self.dim, other.order, other.dim
            )));
        }
        Ok(())
    }

    /// Frobenius inner product.
    pub fn inner(&self, other: &Self) -> Result<f64> {
        self.check_same_shape(other)?;
        Ok(self.data.iter().zip(&other.data).map(|(a, b)| a * b).sum())
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|a| a * a).sum::<f64>().sqrt()
    }

    /// `self += a · other`.
    pub fn axpy(&mut self, a: f64, other: &Self) -> Result<()> {
        self.check_same_shape(other)?;
        self.data.iter_mut().zip(&other.data).for_each(|(s, o)| *s += a * o);
        Ok(())
    }

    pub fn scale(&mut self, a: f64) {
        self.data.iter_mut().for_each(|s| *s *= a);
    }
}

/// A rank-one signal `λ · v_1 ⊗ ⋯ ⊗ v_k / √(d^k)` with every `‖v_i‖² = d`.
#[derive(Debug, Clone, PartialEq)]
pub struct RankOneSpike {
    factors: Vec<Vec<f64>>,
    snr: f64,
}

impl RankOneSpike {
    pub fn new(factors: Vec<Vec<f64>>, snr: f64) -> Result<Self> {
        let d = factors.first().map(|v| v.len()).unwrap_or(0);
        if d == 0 {
            return Err(Error::InvalidArgument("spike needs at least one nonempty factor".into()));
        }
        for v in &factors {
            if v.len() != d {
                return Err(Error::Shape("spike factors differ in length".into()));
            }
            let sq: f64 = v.iter().map(|x| x * x).sum();
            if (sq - d as f64).abs() > 1e-9 * d as f64 {
                return Err(Error::InvalidArgument(format!(
                    "spike factor has squared norm {sq}, expected {d}"
                )));
            }
        }
        if !(snr >= 0.0) {
            return Err(Error::InvalidArgument(format!("snr must be nonnegative, got {snr}")));
        }
        Ok(Self { factors, snr })
    }

    /// The symmetric spike `λ v^{⊗k} / √(d^k)`.
    pub fn symmetric(v: Vec<f64>, order: usize, snr: f64) -> Result<Self> {
        Self::new(vec![v; order], snr)
    }

    pub fn factors(&self) -> &[Vec<f64>] {
        &self.factors
    }

    pub fn snr(&self) -> f64 {
        self.snr
    }

    pub fn order(&self) -> usize {
        self.factors.len()
    }

    pub fn dim(&self) -> usize {
        self.factors[0].len()
    }

    /// Scale applied to the raw outer product.
    pub fn scale(&self) -> f64 {
        self.snr / (self.dim() as f64).powf(self.order() as f64 / 2.0)
    }
}

pub fn rank1_densify(spike: &RankOneSpike, budget: EntryBudget) -> Result<DenseTensor> {
    let refs: Vec<&[f64]> = spike.factors.iter().map(Vec::as_slice).collect();
    DenseTensor::outer(&refs, spike.scale(), budget)
}

/// `X{Ψ, ·}_i = Σ_{j_1..j_{k-1}} X_{j_1, …, j_{k-1}, i} Ψ_{j_1, …, j_{k-1}}`.
///
/// `psi` is given as a flat row-major array of length `d^{k-1}`, so an order-1
/// `Ψ` is just a vector.
pub fn contract_flat(x: &DenseTensor, psi: &[f64]) -> Result<Vec<f64>> {
    let d = x.dim;
    if psi.len() * d != x.data.len() {
        return Err(Error::Shape(format!(
            "contraction argument has {} entries, expected {}",
            psi.len(),
            x.data.len() / d
        )));
    }
    let mut out = vec![0.0; d];
    contract_into(x.as_slice(), d, psi, 1.0, &mut out);
    Ok(out)
}

/// Accumulates `scale · X{Ψ, ·}` into `out` without checks.
pub(crate) fn contract_into(x: &[f64], d: usize, psi: &[f64], scale: f64, out: &mut [f64]) {
    for (fibre, &p) in x.chunks_exact(d).zip(psi) {
        if p == 0.0 {
            continue;
        }
        let w = scale * p;
        out.iter_mut().zip(fibre).for_each(|(o, &v)| *o += w * v);
    }
}

pub fn contract(x: &DenseTensor, psi: &DenseTensor) -> Result<Vec<f64>> {
    if psi.order + 1 != x.order || psi.dim != x.dim {
        return Err(Error::Shape(format!(
            "cannot contract order {} (dim {}) against order {} (dim {})",
            x.order, x.dim, psi.order, psi.dim
        )));
    }
    contract_flat(x, &psi.data)
}

/// `Mat(T)` for an order-`2ℓ` tensor: rows indexed by the first `ℓ` indices.
///
/// Row-major storage makes this a relabelling of the flat buffer.
pub fn matricize(t: &DenseTensor) -> Result<Matrix> {
    if t.order % 2 != 0 {
        return Err(Error::InvalidArgument(format!(
            "matricization needs even order, got {}",
            t.order
        )));
    }
    let side = t.dim.pow((t.order / 2) as u32);
    Matrix::from_vec(side, side, t.data.clone())
}

pub fn matricize_inverse(m: &Matrix, order: usize, dim: usize) -> Result<DenseTensor> {
    if order % 2 != 0 {
        return Err(Error::InvalidArgument(format!("order {order} is odd")));
    }
    let side = (dim as u128).pow((order / 2) as u32);
    if m.rows() as u128 != side || m.cols() as u128 != side {
        return Err(Error::Shape(format!(
            "{}x{} matrix cannot be an order-{order} tensor in dimension {dim}",
            m.rows(),
            m.cols()
        )));
    }
    DenseTensor::from_vec(order, dim, m.as_slice().to_vec())
}

/// `⟨v, v̂⟩² / (‖v‖² ‖v̂‖²)`.
pub fn overlap(v: &[f64], vhat: &[f64]) -> Result<f64> {
    if v.len() != vhat.len() {
        return Err(Error::Shape(format!("overlap of lengths {} and {}", v.len(), vhat.len())));
    }
    let nv: f64 = v.iter().map(|a| a * a).sum();
    let nh: f64 = vhat.iter().map(|a| a * a).sum();
    if nv == 0.0 || nh == 0.0 {
        return Err(Error::InvalidArgument("overlap with a zero vector".into()));
    }
    let ip: f64 = v.iter().zip(vhat).map(|(a, b)| a * b).sum();
    Ok((ip * ip / (nv * nh)).clamp(0.0, 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn densify_examples() {
        let s = RankOneSpike::symmetric(vec![2f64.sqrt(), 0.0], 2, 1.0).unwrap();
        let t = rank1_densify(&s, EntryBudget::default()).unwrap();
        assert!((t.get(&[0, 0]) - 1.0).abs() < 1e-15);
        assert_eq!(t.as_slice()[1..], [0.0, 0.0, 0.0]);

        let s = RankOneSpike::new(vec![vec![3f64.sqrt(), 0.0, 0.0]], 2.0).unwrap();
        let t = rank1_densify(&s, EntryBudget::default()).unwrap();
        assert!((t.as_slice()[0] - 2.0).abs() < 1e-15);

        let s = RankOneSpike::symmetric(vec![1.0; 3], 3, 0.0).unwrap();
        let t = rank1_densify(&s, EntryBudget::default()).unwrap();
        assert!(t.as_slice().iter().all(|&x| x == 0.0));
    }

    #[test]
    fn contraction_examples() {
        let e1 = [1.0, 0.0];
        let e2 = [0.0, 1.0];
        let x = DenseTensor::outer(&[&e1, &e1, &e2], 1.0, EntryBudget::default()).unwrap();
        let psi = DenseTensor::outer(&[&e1, &e1], 1.0, EntryBudget::default()).unwrap();
        assert_eq!(contract(&x, &psi).unwrap(), vec![0.0, 1.0]);

        // matrix case is Aᵀu
        let a = DenseTensor::from_vec(2, 2, vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        let u = DenseTensor::from_vec(1, 2, vec![1.0, -1.0]).unwrap();
        assert_eq!(contract(&a, &u).unwrap(), vec![-2.0, -2.0]);
    }

    #[test]
    fn matricize_index_layout() {
        let data: Vec<f64> = (0..16).map(f64::from).collect();
        let t = DenseTensor::from_vec(4, 2, data).unwrap();
        let m = matricize(&t).unwrap();
        // T_{1,2,2,1} in one-based indexing sits at row (1,2), column (2,1)
        let value = t.get(&[0, 1, 1, 0]);
        assert_eq!(m.get(1, 2), value);
        assert!(matricize(&DenseTensor::zeros(3, 2, EntryBudget::default()).unwrap()).is_err());
    }

    #[test]
    fn budget_guard() {
        let err = DenseTensor::zeros(4, 200, EntryBudget(1_000_000)).unwrap_err();
        assert!(matches!(err, Error::Budget { .. }));
    }

    #[test]
    fn overlap_examples() {
        assert_eq!(overlap(&[1.0, 0.0], &[1.0, 0.0]).unwrap(), 1.0);
        assert_eq!(overlap(&[1.0, 0.0], &[0.0, 1.0]).unwrap(), 0.0);
        assert!((overlap(&[1.0, 0.0], &[3.0, 3.0]).unwrap() - 0.5).abs() < 1e-15);
        assert!(overlap(&[0.0, 0.0], &[1.0, 0.0]).is_err());
    }
}
