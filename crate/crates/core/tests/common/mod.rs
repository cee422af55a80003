//! Reference computations that share no code with the library.
#![allow(dead_code)]

/// Poisson pmf for k = 0..=k_max by the multiplicative recurrence.
pub fn pmf_table(lambda: f64, k_max: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(k_max + 1);
    let mut p = (-lambda).exp();
    out.push(p);
    for k in 1..=k_max {
        p *= lambda / k as f64;
        out.push(p);
    }
    out
}

/// Index past which the Poisson(λ) mass is far below double precision.
pub fn support_cap(lambda: f64) -> usize {
    (lambda + 40.0 * lambda.sqrt() + 60.0) as usize
}

/// `E[min(q, D)/D]` with D = 0 counted as fully served, by direct summation.
pub fn expected_fill(lambda: f64, q: u64) -> f64 {
    let pmf = pmf_table(lambda, support_cap(lambda) + q as usize);
    pmf.iter()
        .enumerate()
        .map(|(k, p)| {
            let fill = if k == 0 { 1.0 } else { (q as usize).min(k) as f64 / k as f64 };
            fill * p
        })
        .sum()
}

/// Discrete objective `E[min(q, D)/D] − r·q/s`, evaluated for q = 0..=q_max.
pub fn discrete_objective(lambda: f64, s: u64, r: f64, q_max: u64) -> Vec<f64> {
    let pmf = pmf_table(lambda, support_cap(lambda) + q_max as usize);
    (0..=q_max)
        .map(|q| {
            let fill: f64 = pmf
                .iter()
                .enumerate()
                .map(|(k, p)| {
                    let f = if k == 0 { 1.0 } else { (q as usize).min(k) as f64 / k as f64 };
                    f * p
                })
                .sum();
            fill - r * q as f64 / s as f64
        })
        .collect()
}

/// First index of the maximum (ties go to the smallest q).
pub fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate() {
        if v > values[best] {
            best = i;
        }
    }
    best
}

/// Smallest k with the running pmf sum ≥ p.
pub fn quantile_scan(lambda: f64, p: f64) -> u64 {
    let pmf = pmf_table(lambda, support_cap(lambda));
    let mut sum = 0.0;
    for (k, v) in pmf.iter().enumerate() {
        sum += v;
        if sum >= p {
            return k as u64;
        }
    }
    pmf.len() as u64 - 1
}
