//! Scalar series that show up next to Hermite expansions.

use std::f64::consts::PI;

/// `ln n!`, summed directly below 256 and by Stirling's series above.
pub fn ln_factorial(n: u64) -> f64 {
    if n < 256 {
        (2..=n).map(|i| (i as f64).ln()).sum()
    } else {
        let x = n as f64;
        x * x.ln() - x + 0.5 * (2.0 * PI * x).ln() + 1.0 / (12.0 * x) - 1.0 / (360.0 * x.powi(3))
    }
}

/// `√(n!)`.
pub fn sqrt_factorial(n: u64) -> f64 {
    (0.5 * ln_factorial(n)).exp()
}

/// The tail `Σ_{i ≥ t} λ^i / i!`, summed until the terms stop contributing.
pub fn partial_exp_tail(lambda: f64, t: u64) -> f64 {
    assert!(lambda >= 0.0, "partial_exp_tail needs a nonnegative rate");
    if lambda == 0.0 {
        return if t == 0 { 1.0 } else { 0.0 };
    }
    let mut term = (t as f64 * lambda.ln() - ln_factorial(t)).exp();
    let mut sum = 0.0;
    let mut i = t;
    loop {
        sum += term;
        i += 1;
        term *= lambda / i as f64;
        // once i exceeds λ the terms decrease geometrically
        if (i as f64) > lambda && term <= f64::EPSILON * 1e-3 * sum {
            break;
        }
    }
    sum
}

/// `E[H_t(Z) · sign(Z)]` for `Z ~ N(0, 1)`.
///
/// Zero for even `t`. For odd `t = 2m + 1`, integrating `He_t φ` over the
/// half line gives `2 φ(0) He_{2m}(0) / √t!` with `He_{2m}(0) = (−1)^m (2m−1)!!`.
pub fn sign_coefficient(t: u64) -> f64 {
    if t % 2 == 0 {
        return 0.0;
    }
    let m = (t - 1) / 2;
    let sq = sign_coefficient_sq(m);
    let s = sq.sqrt();
    if m % 2 == 0 {
        s
    } else {
        -s
    }
}

// Square of the coefficient with index 2m+1, via
// a_m = (2/π) · C(2m, m) / (4^m (2m + 1)).
fn sign_coefficient_sq(m: u64) -> f64 {
    let mf = m as f64;
    let ln_central = ln_factorial(2 * m) - 2.0 * ln_factorial(m) - mf * 4f64.ln();
    (2.0 / PI) * ln_central.exp() / (2.0 * mf + 1.0)
}

/// `Σ_{t ≥ 1} E[H_t(Z) sign(Z)]²`.
///
/// The terms decay like `t^{-3/2}`, so the partial sums are accelerated by
/// Richardson extrapolation in the half-odd powers `M^{-1/2}, M^{-3/2}, …`
/// of the truncation point `M`.
pub fn sign_parseval_sum() -> f64 {
    const LEVELS: usize = 6;
    let mut partial = Vec::with_capacity(LEVELS);
    let mut sum = 0.0;
    let mut a = 2.0 / PI; // a_0
    let mut m: u64 = 0;
    let mut cutoff: u64 = 1 << 10;
    for _ in 0..LEVELS {
        while m < cutoff {
            sum += a;
            m += 1;
            let mf = m as f64;
            a *= (2.0 * mf - 1.0) * (2.0 * mf - 1.0) / ((2.0 * mf) * (2.0 * mf + 1.0));
        }
        partial.push(sum);
        cutoff *= 4;
    }
    let mut table = partial;
    for level in 0..LEVELS - 1 {
        let factor = 4f64.powf(level as f64 + 0.5);
        table = table
            .windows(2)
            .map(|w| (factor * w[1] - w[0]) / (factor - 1.0))
            .collect();
    }
    table[0]
}
