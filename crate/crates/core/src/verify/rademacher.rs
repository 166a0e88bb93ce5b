use super::report::{CheckRecord, CheckReport};
use crate::error::{Error, Result};
use crate::hermite::ln_factorial;

/// Largest `d` for which `{±1}^d` is enumerated.
pub const MAX_ENUM_DIM: usize = 20;

pub(crate) fn enum_guard(d: usize, max: usize) -> Result<()> {
    if d == 0 || d > max {
        return Err(Error::EnumerationBudget { size: 1u128 << d.min(127), limit: 1u128 << max });
    }
    Ok(())
}

/// `E[V̄^t · Π_{i ∈ r} V_i]` for `V` uniform on `{±1}^d`, `V̄ = (1/d) Σ V_i`.
///
/// Bit `i` of `subset` selects coordinate `i`. Every sign vector is visited;
/// the integer signed counts per number of minus signs are accumulated
/// first and only then combined in floating point.
pub fn rademacher_mean_moment(d: usize, t: u32, subset: u32) -> Result<f64> {
    enum_guard(d, MAX_ENUM_DIM)?;
    if d < 32 && subset >> d != 0 {
        return Err(Error::InvalidArgument(format!("subset mask {subset:#b} has bits beyond d = {d}")));
    }
    let mut counts = vec![0i64; d + 1];
    for v in 0u32..(1 << d) {
        let sign = if (v & subset).count_ones() % 2 == 0 { 1 } else { -1 };
        counts[v.count_ones() as usize] += sign;
    }
    let total = mirrored_sum(d, |minus| {
        let c = counts[minus];
        if c == 0 {
            0.0
        } else {
            c as f64 * overlap_value(d, minus).powi(t as i32)
        }
    });
    Ok(total / (1u64 << d) as f64)
}

/// `(d − 2m) / d`, exactly antisymmetric under `m ↦ d − m`.
pub(crate) fn overlap_value(d: usize, m: usize) -> f64 {
    (d as f64 - 2.0 * m as f64) / d as f64
}

/// `Σ_{m=0}^{d} f(m)` with `f(m)` and `f(d − m)` added together first, so
/// sums that cancel by the symmetry `m ↦ d − m` come out as exact zeros.
pub(crate) fn mirrored_sum(d: usize, f: impl Fn(usize) -> f64) -> f64 {
    (0..=d / 2).map(|m| if 2 * m == d { f(m) } else { f(m) + f(d - m) }).sum()
}

fn pow_half(t: u32) -> f64 {
    (t as f64).powf(t as f64 / 2.0)
}

/// Checks every enumerated `E[V̄^t Π_{i≤ℓ} V_i]` for `1 ≤ t ≤ t_max` against
/// the moment upper bounds, the vanishing of odd moments, and the lower
/// bounds for even moments and for the best nonempty subset.
///
/// The moment depends on the subset only through its size, so the subsets
/// `{1, …, ℓ}` for `0 ≤ ℓ ≤ min(t, d)` cover every case.
pub fn check_rademacher_bounds(d: usize, t_max: u32) -> Result<CheckReport> {
    enum_guard(d, MAX_ENUM_DIM)?;
    if d < 2 || t_max as usize > 2 * (d - 1) {
        return Err(Error::InvalidArgument(format!("need d ≥ 2 and t_max ≤ 2(d−1), got d = {d}, t_max = {t_max}")));
    }
    let df = d as f64;
    let mut report = CheckReport::default();
    for t in 1..=t_max {
        let upper_all = 4f64.powi(t as i32) * pow_half(t) * df.powi(-(t.div_ceil(2) as i32));
        let upper_nonempty = 2.0 * 5f64.powi(t as i32) * pow_half(t) * df.powi(-((t + 1).div_ceil(2) as i32));
        let mut best_nonempty = f64::NEG_INFINITY;
        for ell in 0..=(t as usize).min(d) {
            let mask = if ell == 0 { 0 } else { (1u32 << ell) - 1 };
            let value = rademacher_mean_moment(d, t, mask)?;
            report.push(CheckRecord::at_most(format!("rademacher.upper.d{d}.t{t}.l{ell}"), value, upper_all));
            if ell >= 1 {
                best_nonempty = best_nonempty.max(value);
                report.push(CheckRecord::at_most(
                    format!("rademacher.upper_nonempty.d{d}.t{t}.l{ell}"),
                    value,
                    upper_nonempty,
                ));
            }
            if ell == 0 && t % 2 == 1 {
                report.push(CheckRecord::new(format!("rademacher.odd_zero.d{d}.t{t}"), value == 0.0, value, 0.0));
            }
            if ell == 0 && t % 2 == 0 && (t / 2) as usize <= d {
                let u = t / 2;
                let uf = u as f64;
                let ln_exact = ln_factorial(t as u64) - uf * 2f64.ln() - t as f64 * df.ln()
                    + ln_factorial(d as u64)
                    - ln_factorial(u as u64)
                    - ln_factorial((d - u as usize) as u64);
                let combinatorial = ln_exact.exp();
                let simple = (2.0 / std::f64::consts::E.powi(2) * uf / df).powi(u as i32);
                // relative slack for rounding in the log-factorial evaluation
                report.push(CheckRecord::at_least(
                    format!("rademacher.lower_comb.d{d}.t{t}"),
                    value,
                    combinatorial * (1.0 - 1e-12),
                ));
                report.push(CheckRecord::at_least(format!("rademacher.lower_simple.d{d}.t{t}"), value, simple));
                report.push(CheckRecord::at_least(
                    format!("rademacher.lower_chain.d{d}.t{t}"),
                    combinatorial * (1.0 + 1e-12),
                    simple,
                ));
            }
        }
        if d >= 3 {
            let lower = 5f64.powi(-(t as i32)) * pow_half(t) * df.powi(-((t + 1).div_ceil(2) as i32)) / 2.0;
            report.push(CheckRecord::at_least(format!("rademacher.lower_nonempty.d{d}.t{t}"), best_nonempty, lower));
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_cases() {
        assert!((rademacher_mean_moment(4, 2, 0).unwrap() - 0.25).abs() < 1e-15);
        assert!((rademacher_mean_moment(4, 1, 1).unwrap() - 0.25).abs() < 1e-15);
        assert_eq!(rademacher_mean_moment(7, 3, 0).unwrap(), 0.0);
        assert!(rademacher_mean_moment(21, 2, 0).is_err());
        assert!(rademacher_mean_moment(3, 2, 0b1000).is_err());
    }
}
