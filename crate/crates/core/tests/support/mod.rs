//! Brute-force oracles shared by the integration tests.

#![allow(dead_code)]

/// `f_α(x, y) = |x - y|^α + (x + y)^α - 2x^α`.
pub fn second_difference_kernel(alpha: f64, x: f64, y: f64) -> f64 {
    (x - y).abs().powf(alpha) + (x + y).powf(alpha) - 2.0 * x.powf(alpha)
}

/// `2α(α-1) y² (x-y)^{α-2}`.
pub fn second_difference_bound(alpha: f64, x: f64, y: f64) -> f64 {
    2.0 * alpha * (alpha - 1.0) * y * y * (x - y).powf(alpha - 2.0)
}

/// `ω(n) = Σ_{i<n} Σ_{j<n} γ(|i-j|)` by the literal double loop.
pub fn literal_vtf(gamma: &[f64], n: usize) -> f64 {
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            s += gamma[i.abs_diff(j)];
        }
    }
    s
}

/// `(Ia)(n)` by nested loops over the symmetric extension.
pub fn literal_double_integral(a: &[f64], n: usize) -> f64 {
    let at = |i: i64| a.get(i.unsigned_abs() as usize).copied().unwrap_or(0.0);
    let mut s = 0.0;
    for k in 0..n as i64 {
        for i in -k..=k {
            s += at(i);
        }
    }
    s
}

/// Unit-variance fGn autocovariance as a truncated power series in `1/n`:
/// `Σ_{j=1}^{terms} c_j n^{2H-2j}`, `c_j = Π_{i<2j} (2H - i) / (2j)!`.
pub fn fgn_power_series(h: f64, n: f64, terms: usize) -> f64 {
    let a = 2.0 * h;
    let mut sum = 0.0;
    for j in 1..=terms {
        let mut c = 1.0;
        for i in 0..2 * j {
            c *= (a - i as f64) / (i + 1) as f64;
        }
        sum += c * n.powf(a - 2.0 * j as f64);
    }
    sum
}
