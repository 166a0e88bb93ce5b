use std::fmt;
use std::str::FromStr;

use rand::Rng as _;

use super::measure::NonGaussMeasure;
use crate::error::{Error, Result};
use crate::rng::Rng;
use crate::tensor::RankOneSpike;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Problem {
    Tpca,
    Atpca,
    Ngca,
    Cca,
    Parity,
    /// Labelled output of the NGCA to GLM reduction.
    Glm,
}

impl Problem {
    pub fn tag(self) -> u8 {
        match self {
            Problem::Tpca => 1,
            Problem::Atpca => 2,
            Problem::Ngca => 3,
            Problem::Cca => 4,
            Problem::Parity => 5,
            Problem::Glm => 6,
        }
    }

    pub fn from_tag(tag: u8) -> Option<Self> {
        Some(match tag {
            1 => Problem::Tpca,
            2 => Problem::Atpca,
            3 => Problem::Ngca,
            4 => Problem::Cca,
            5 => Problem::Parity,
            6 => Problem::Glm,
            _ => return None,
        })
    }
}

impl fmt::Display for Problem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Problem::Tpca => "tpca",
            Problem::Atpca => "atpca",
            Problem::Ngca => "ngca",
            Problem::Cca => "cca",
            Problem::Parity => "parity",
            Problem::Glm => "glm",
        })
    }
}

impl FromStr for Problem {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "tpca" => Ok(Problem::Tpca),
            "atpca" => Ok(Problem::Atpca),
            "ngca" => Ok(Problem::Ngca),
            "cca" => Ok(Problem::Cca),
            "parity" => Ok(Problem::Parity),
            "glm" => Ok(Problem::Glm),
            other => Err(Error::InvalidArgument(format!("unknown problem '{other}'"))),
        }
    }
}

/// The planted parameter of a model.
#[derive(Debug, Clone)]
pub enum Hidden {
    /// Rank-one tensor signal (symmetric for TPCA).
    Spike(RankOneSpike),
    /// NGCA direction with `‖V‖ = √d` and the law of `⟨x, V⟩ / √d`.
    Direction { v: Vec<f64>, measure: NonGaussMeasure },
    /// CCA view directions, each with norm `√d`.
    Views(Vec<Vec<f64>>),
    /// Parity subset: one coordinate per view, flip-free rate `Λ`.
    Parity { coords: Vec<usize>, rate: f64 },
}

/// A fully specified planted model.
#[derive(Debug, Clone)]
pub struct ModelSpec {
    pub problem: Problem,
    pub k: usize,
    pub d: usize,
    pub snr: f64,
    pub hidden: Hidden,
}

/// `(2/π)^{k/2}`, the CCA signal ceiling.
pub fn cca_lambda_k(k: usize) -> f64 {
    (2.0 / std::f64::consts::PI).powf(k as f64 / 2.0)
}

fn rademacher(d: usize, rng: &mut Rng) -> Vec<f64> {
    (0..d).map(|_| if rng.random::<bool>() { 1.0 } else { -1.0 }).collect()
}

fn coordinate(d: usize, i: usize) -> Vec<f64> {
    let mut v = vec![0.0; d];
    v[i] = (d as f64).sqrt();
    v
}

fn check_views(k: usize, d: usize, views: &[Vec<f64>]) -> Result<()> {
    if views.len() != k {
        return Err(Error::Shape(format!("expected {k} view directions, got {}", views.len())));
    }
    for v in views {
        let sq: f64 = v.iter().map(|x| x * x).sum();
        if v.len() != d || (sq - d as f64).abs() > 1e-9 * d as f64 {
            return Err(Error::InvalidArgument("each view direction needs length d and norm √d".into()));
        }
    }
    Ok(())
}

impl ModelSpec {
    /// TPCA with `V` uniform on `{±1}^d`.
    pub fn tpca_from_prior(k: usize, d: usize, snr: f64, rng: &mut Rng) -> Result<Self> {
        Self::tpca(k, d, snr, rademacher(d, rng))
    }

    pub fn tpca(k: usize, d: usize, snr: f64, v: Vec<f64>) -> Result<Self> {
        if k < 1 || v.len() != d {
            return Err(Error::InvalidArgument("TPCA needs k ≥ 1 and V of length d".into()));
        }
        let spike = RankOneSpike::symmetric(v, k, snr)?;
        Ok(Self { problem: Problem::Tpca, k, d, snr, hidden: Hidden::Spike(spike) })
    }

    /// ATPCA with the 1-sparse prior `V = √(d^k) e_{i_1} ⊗ ⋯ ⊗ e_{i_k}`.
    pub fn atpca_coordinate(k: usize, d: usize, snr: f64, rng: &mut Rng) -> Result<Self> {
        let factors = (0..k).map(|_| coordinate(d, rng.random_range(0..d))).collect();
        Self::atpca(k, d, snr, factors)
    }

    pub fn atpca(k: usize, d: usize, snr: f64, factors: Vec<Vec<f64>>) -> Result<Self> {
        check_views(k, d, &factors)?;
        let spike = RankOneSpike::new(factors, snr)?;
        Ok(Self { problem: Problem::Atpca, k, d, snr, hidden: Hidden::Spike(spike) })
    }

    /// NGCA with `V` uniform on `{±1}^d`.
    pub fn ngca_from_prior(d: usize, measure: NonGaussMeasure, rng: &mut Rng) -> Result<Self> {
        Self::ngca(d, measure, rademacher(d, rng))
    }

    pub fn ngca(d: usize, measure: NonGaussMeasure, v: Vec<f64>) -> Result<Self> {
        let sq: f64 = v.iter().map(|x| x * x).sum();
        if v.len() != d || (sq - d as f64).abs() > 1e-9 * d as f64 {
            return Err(Error::InvalidArgument("NGCA direction needs length d and norm √d".into()));
        }
        let (k, snr) = (measure.order(), measure.snr());
        Ok(Self { problem: Problem::Ngca, k, d, snr, hidden: Hidden::Direction { v, measure } })
    }

    /// CCA with coordinate view directions `√d e_{i_j}`.
    pub fn cca_coordinate(k: usize, d: usize, snr: f64, rng: &mut Rng) -> Result<Self> {
        let views = (0..k).map(|_| coordinate(d, rng.random_range(0..d))).collect();
        Self::cca(k, d, snr, views)
    }

    pub fn cca(k: usize, d: usize, snr: f64, views: Vec<Vec<f64>>) -> Result<Self> {
        check_views(k, d, &views)?;
        let max = cca_lambda_k(k);
        if !(0.0..=max).contains(&snr) {
            return Err(Error::SnrOutOfRange { lambda: snr, min: 0.0, max });
        }
        Ok(Self { problem: Problem::Cca, k, d, snr, hidden: Hidden::Views(views) })
    }

    /// The planted signal in the form estimators are scored against:
    /// `V` for TPCA/NGCA, the flattened `v_1 ⊗ ⋯ ⊗ v_k` for ATPCA/CCA.
    pub fn truth(&self) -> Vec<f64> {
        match &self.hidden {
            Hidden::Spike(s) if self.problem == Problem::Tpca => s.factors()[0].clone(),
            Hidden::Spike(s) => outer_flat(s.factors()),
            Hidden::Direction { v, .. } => v.clone(),
            Hidden::Views(views) => outer_flat(views),
            Hidden::Parity { coords, .. } => coords.iter().map(|&c| c as f64).collect(),
        }
    }
}

pub(crate) fn outer_flat(factors: &[Vec<f64>]) -> Vec<f64> {
    factors.iter().fold(vec![1.0], |acc, v| {
        acc.iter().flat_map(|&a| v.iter().map(move |&x| a * x)).collect()
    })
}
