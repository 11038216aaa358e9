//! Reference implementations written independently of the library, used as
//! test oracles. They favor obviousness over speed.
#![allow(dead_code)]

use revd_core::numerics::RngStream;

pub fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// k-th smallest distance from `q` to `set`, optionally skipping index `skip`.
pub fn kth_by_sort(q: &[f64], set: &[Vec<f64>], k: usize, skip: Option<usize>) -> f64 {
    let mut d: Vec<f64> = set
        .iter()
        .enumerate()
        .filter(|(j, _)| Some(*j) != skip)
        .map(|(_, p)| dist(q, p))
        .collect();
    d.sort_by(|a, b| a.partial_cmp(b).unwrap());
    d[k - 1]
}

/// `Γ(x)` for positive integers and half-integers by direct products.
pub fn gamma_exact(x: f64) -> f64 {
    let mut g = if (x - x.floor() - 0.5).abs() < 1e-12 { std::f64::consts::PI.sqrt() } else { 1.0 };
    let mut y = if g == 1.0 { 1.0 } else { 0.5 };
    while y < x - 1e-12 {
        g *= y;
        y += 1.0;
    }
    g
}

/// Correction constant from `c(1, α) = sin(πα) / (π(1 − α))` and the ratio
/// `c(k, α) / c(k−1, α) = (k−1)² / ((k−α)(k+α−2))`.
pub fn correction_oracle(k: usize, alpha: f64) -> f64 {
    let pi = std::f64::consts::PI;
    let mut c = (pi * alpha).sin() / (pi * (1.0 - alpha));
    for j in 2..=k {
        let j = j as f64;
        c *= (j - 1.0).powi(2) / ((j - alpha) * (j + alpha - 2.0));
    }
    c
}

/// Double-loop divergence estimate with zero distances replaced by 1e-12.
pub fn naive_divergence(x: &[Vec<f64>], y: &[Vec<f64>], alpha: f64, k: usize) -> f64 {
    let guard = |d: f64| if d == 0.0 { 1e-12 } else { d };
    let n = x.len() as f64;
    let m = y.len() as f64;
    let mut total = 0.0;
    for (i, xi) in x.iter().enumerate() {
        let mu = guard(kth_by_sort(xi, x, k, Some(i)));
        let nu = guard(kth_by_sort(xi, y, k, None));
        total += ((n - 1.0) * mu / (m * nu)).powf(1.0 - alpha);
    }
    (total / n * correction_oracle(k, alpha)).ln() / (alpha - 1.0)
}

/// Per-state bonus `tanh(mean 1-NN distance) · (νk / (μk + ε))^(1−α)`.
pub fn naive_revd(curr: &[Vec<f64>], prev: &[Vec<f64>], k: usize, alpha: f64, eps: f64) -> Vec<f64> {
    let l = (curr.iter().enumerate().map(|(i, c)| kth_by_sort(c, curr, 1, Some(i))).sum::<f64>() / curr.len() as f64).tanh();
    curr.iter()
        .enumerate()
        .map(|(i, c)| {
            let mu = kth_by_sort(c, curr, k, Some(i));
            let nu = kth_by_sort(c, prev, k, None);
            l * (nu / (mu + eps)).powf(1.0 - alpha)
        })
        .collect()
}

/// Advantages as explicit truncated sums of discounted TD errors.
pub fn gae_by_sums(rewards: &[f64], values: &[f64], dones: &[bool], bootstrap: f64, gamma: f64, lam: f64) -> Vec<f64> {
    let n = rewards.len();
    let delta = |t: usize| {
        let next = if dones[t] {
            0.0
        } else if t + 1 == n {
            bootstrap
        } else {
            values[t + 1]
        };
        rewards[t] + gamma * next - values[t]
    };
    (0..n)
        .map(|t| {
            let mut sum = 0.0;
            let mut w = 1.0;
            for s in t..n {
                sum += w * delta(s);
                if dones[s] {
                    break;
                }
                w *= gamma * lam;
            }
            sum
        })
        .collect()
}

/// `D_α(N(m1, s²) ‖ N(m2, s²)) = α (m1 − m2)² / (2 s²)`.
pub fn gaussian_renyi_closed_form(alpha: f64, m1: f64, m2: f64, s: f64) -> f64 {
    alpha * (m1 - m2).powi(2) / (2.0 * s * s)
}

/// `1/(α−1) · ln ∫ p^α q^(1−α)` by composite Simpson on a wide interval.
pub fn gaussian_renyi_quadrature(alpha: f64, m1: f64, m2: f64, s: f64) -> f64 {
    let pdf = |x: f64, m: f64| (-(x - m).powi(2) / (2.0 * s * s)).exp() / (s * (2.0 * std::f64::consts::PI).sqrt());
    let (lo, hi) = (m1.min(m2) - 20.0 * s, m1.max(m2) + 20.0 * s);
    let n = 200_000;
    let h = (hi - lo) / n as f64;
    let f = |x: f64| pdf(x, m1).powf(alpha) * pdf(x, m2).powf(1.0 - alpha);
    let mut acc = f(lo) + f(hi);
    for i in 1..n {
        let x = lo + i as f64 * h;
        acc += if i % 2 == 1 { 4.0 } else { 2.0 } * f(x);
    }
    (acc * h / 3.0).ln() / (alpha - 1.0)
}

pub fn normal_rows(rng: &mut RngStream, n: usize, d: usize, offset: f64) -> Vec<Vec<f64>> {
    (0..n).map(|_| (0..d).map(|_| rng.normal() + offset).collect()).collect()
}
