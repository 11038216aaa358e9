//! k-nearest-neighbor Rényi divergence estimation.
//!
//! For samples `X` (size N, density p) and `Y` (size M, density q):
//!
//! ```text
//! D̂α(p‖q) = 1/(α−1) · ln( (1/N) Σᵢ [ (N−1)·μk(Xᵢ, X) / (M·νk(Xᵢ, Y)) ]^(1−α) · C(k, α) )
//! C(k, α) = Γ(k)² / (Γ(k−α+1) · Γ(k+α−1)),   k > |α − 1|
//! ```
//!
//! `μk` is the k-th nearest-neighbor distance within `X` excluding the point
//! itself and `νk` the k-th nearest-neighbor distance into `Y`. A zero
//! distance is replaced by [`ZERO_DISTANCE_GUARD`] and counted.

use serde::{Deserialize, Serialize};

use crate::encoder::EpisodeEmbeddings;
use crate::error::{Error, Result};
use crate::numerics::{kth_distances_across, kth_distances_within, lgamma, NeighborBackend, PointSet};

pub const ZERO_DISTANCE_GUARD: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DivergenceParams {
    alpha: f64,
    k: usize,
}

impl DivergenceParams {
    pub fn new(alpha: f64, k: usize) -> Result<Self> {
        check_order(k, alpha)?;
        Ok(Self { alpha, k })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn k(&self) -> usize {
        self.k
    }
}

fn check_order(k: usize, alpha: f64) -> Result<()> {
    if !alpha.is_finite() || alpha == 1.0 {
        return Err(Error::param(format!("divergence order alpha must be finite and != 1 (the estimator is undefined at alpha = 1), got {alpha}")));
    }
    if !((k as f64) > (alpha - 1.0).abs()) {
        return Err(Error::param(format!(
            "estimator requires k > |alpha - 1| (k = {k}, alpha = {alpha})"
        )));
    }
    Ok(())
}

/// Bias-correction constant `Γ(k)² / (Γ(k−α+1) Γ(k+α−1))`.
pub fn c_correction(k: usize, alpha: f64) -> Result<f64> {
    check_order(k, alpha)?;
    let k = k as f64;
    Ok((2.0 * lgamma(k)? - lgamma(k - alpha + 1.0)? - lgamma(k + alpha - 1.0)?).exp())
}

/// Estimate plus the number of zero distances that had to be guarded.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DivergenceEstimate {
    pub value: f64,
    pub guarded: usize,
}

fn guard(d: f64, count: &mut usize) -> f64 {
    if d == 0.0 {
        *count += 1;
        ZERO_DISTANCE_GUARD
    } else {
        d
    }
}

/// Core of the estimator from precomputed neighbor distances; `n` and `m`
/// are the sizes used in the `(N−1)/M` factor.
fn estimate_from_distances(mu: &[f64], nu: &[f64], n: usize, m: usize, p: &DivergenceParams) -> Result<DivergenceEstimate> {
    let c = c_correction(p.k, p.alpha)?;
    let scale = (n as f64 - 1.0) / m as f64;
    let exponent = 1.0 - p.alpha;
    let mut guarded = 0;
    let mut sum = 0.0;
    for (&mu_i, &nu_i) in mu.iter().zip(nu) {
        let mu_i = guard(mu_i, &mut guarded);
        let nu_i = guard(nu_i, &mut guarded);
        sum += (scale * mu_i / nu_i).powf(exponent);
    }
    let mean = sum / mu.len() as f64;
    Ok(DivergenceEstimate { value: (mean * c).ln() / (p.alpha - 1.0), guarded })
}

/// Estimates `D_α(p‖q)` from samples `x ~ p` and `y ~ q`.
pub fn estimate_renyi_divergence(x: &PointSet, y: &PointSet, p: &DivergenceParams) -> Result<f64> {
    Ok(estimate_renyi_divergence_with(x, y, p, NeighborBackend::Auto)?.value)
}

pub fn estimate_renyi_divergence_with(
    x: &PointSet,
    y: &PointSet,
    p: &DivergenceParams,
    backend: NeighborBackend,
) -> Result<DivergenceEstimate> {
    if x.d() != y.d() {
        return Err(Error::DimensionMismatch { expected: x.d(), found: y.d() });
    }
    if x.n() < p.k + 1 {
        return Err(Error::InsufficientSamples { needed: p.k + 1, available: x.n() });
    }
    if y.n() < p.k {
        return Err(Error::InsufficientSamples { needed: p.k, available: y.n() });
    }
    let mu = kth_distances_within(x, p.k, backend)?;
    let nu = kth_distances_across(x, y, p.k, backend)?;
    estimate_from_distances(&mu, &nu, x.n(), y.n(), p)
}

/// Divergence between the current and the previous episode's embeddings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscrepancyReport {
    /// Full estimate with the log and the correction constant.
    pub d_hat: f64,
    /// `[νk(eᵢ, prev) / μk(eᵢ, curr)]^(1−α)` per current state, unguarded.
    pub ratio_terms: Vec<f64>,
    pub c_correction: f64,
    pub guarded: usize,
}

/// Episodic visitation discrepancy `D̂α(ρ_curr ‖ ρ_prev)`.
///
/// Episodes may differ in length: `(T_curr − 1)` and `T_prev` take the places
/// of `N − 1` and `M`.
pub fn episodic_discrepancy(
    curr: &EpisodeEmbeddings,
    prev: &EpisodeEmbeddings,
    p: &DivergenceParams,
) -> Result<DiscrepancyReport> {
    if curr.len() < p.k + 1 {
        return Err(Error::InsufficientSamples { needed: p.k + 1, available: curr.len() });
    }
    if prev.len() < p.k {
        return Err(Error::InsufficientSamples { needed: p.k, available: prev.len() });
    }
    if curr.dim() != prev.dim() {
        return Err(Error::DimensionMismatch { expected: prev.dim(), found: curr.dim() });
    }
    let x = curr.points()?;
    let y = prev.points()?;
    let mu = kth_distances_within(&x, p.k, NeighborBackend::Auto)?;
    let nu = kth_distances_across(&x, &y, p.k, NeighborBackend::Auto)?;
    let est = estimate_from_distances(&mu, &nu, x.n(), y.n(), p)?;
    let exponent = 1.0 - p.alpha;
    let ratio_terms = mu.iter().zip(&nu).map(|(m, n)| (n / m).powf(exponent)).collect();
    Ok(DiscrepancyReport {
        d_hat: est.value,
        ratio_terms,
        c_correction: c_correction(p.k, p.alpha)?,
        guarded: est.guarded,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::RngStream;

    fn gamma_half(n: u32) -> f64 {
        // Γ(n + 1/2) by recurrence from Γ(1/2) = √π
        let mut g = std::f64::consts::PI.sqrt();
        for i in 0..n {
            g *= i as f64 + 0.5;
        }
        g
    }

    #[test]
    fn correction_against_half_integer_gammas() {
        let c3 = c_correction(3, 0.5).unwrap();
        let oracle3 = 4.0 / (gamma_half(3) * gamma_half(2));
        assert!((c3 - oracle3).abs() < 1e-12);
        assert!((c3 - 0.90541).abs() < 1e-5);
        let c5 = c_correction(5, 0.5).unwrap();
        let oracle5 = 576.0 / (gamma_half(5) * gamma_half(4));
        assert!((c5 - oracle5).abs() < 1e-12);
    }

    #[test]
    fn correction_rejects_invalid_orders() {
        assert!(c_correction(2, 1.0).is_err());
        assert!(c_correction(1, 3.0).is_err());
        assert!(c_correction(2, 3.0).is_err());
        assert!(c_correction(1, 0.5).is_ok());
        assert!(DivergenceParams::new(3.0, 1).is_err());
        assert!(DivergenceParams::new(0.5, 1).is_ok());
    }

    #[test]
    fn correction_symmetric_in_alpha() {
        for k in 1..=10 {
            for a in [0.1, 0.25, 0.5, 0.8, 0.95] {
                let lhs = c_correction(k, a).unwrap();
                let rhs = c_correction(k, 2.0 - a).unwrap();
                assert!((lhs - rhs).abs() < 1e-12 * lhs.max(1.0));
            }
        }
    }

    fn naive(x: &[f64], y: &[f64], k: usize, alpha: f64) -> f64 {
        let n = x.len() as f64;
        let m = y.len() as f64;
        let mut total = 0.0;
        for (i, xi) in x.iter().enumerate() {
            let mut own: Vec<f64> = x.iter().enumerate().filter(|(j, _)| *j != i).map(|(_, v)| (xi - v).abs()).collect();
            let mut other: Vec<f64> = y.iter().map(|v| (xi - v).abs()).collect();
            own.sort_by(f64::total_cmp);
            other.sort_by(f64::total_cmp);
            total += ((n - 1.0) * own[k - 1] / (m * other[k - 1])).powf(1.0 - alpha);
        }
        let c = c_correction(k, alpha).unwrap();
        (total / n * c).ln() / (alpha - 1.0)
    }

    #[test]
    fn matches_naive_double_loop() {
        let mut rng = RngStream::new(31);
        let x: Vec<f64> = (0..40).map(|_| rng.normal()).collect();
        let y: Vec<f64> = (0..33).map(|_| rng.normal() + 0.5).collect();
        let p = DivergenceParams::new(0.5, 3).unwrap();
        let got = estimate_renyi_divergence(
            &PointSet::from_scalars(&x).unwrap(),
            &PointSet::from_scalars(&y).unwrap(),
            &p,
        )
        .unwrap();
        assert!((got - naive(&x, &y, 3, 0.5)).abs() < 1e-12);
    }

    #[test]
    fn permutation_invariant() {
        let mut rng = RngStream::new(2);
        let mut x: Vec<f64> = (0..50).map(|_| rng.normal()).collect();
        let y: Vec<f64> = (0..50).map(|_| rng.normal()).collect();
        let p = DivergenceParams::new(0.5, 4).unwrap();
        let py = PointSet::from_scalars(&y).unwrap();
        let a = estimate_renyi_divergence(&PointSet::from_scalars(&x).unwrap(), &py, &p).unwrap();
        x.reverse();
        rng.shuffle(&mut x);
        let b = estimate_renyi_divergence(&PointSet::from_scalars(&x).unwrap(), &py, &p).unwrap();
        // summation order changes, so compare at rounding level
        assert!((a - b).abs() < 1e-13);
    }

    #[test]
    fn sample_size_checks() {
        let p = DivergenceParams::new(0.5, 3).unwrap();
        let x = PointSet::from_scalars(&[0.0, 1.0, 2.0]).unwrap();
        let y = PointSet::from_scalars(&[0.0, 1.0, 2.0]).unwrap();
        assert!(matches!(estimate_renyi_divergence(&x, &y, &p), Err(Error::InsufficientSamples { .. })));
        let y2 = PointSet::from_rows(&[vec![0.0, 1.0]]).unwrap();
        assert!(estimate_renyi_divergence(&x, &y2, &p).is_err());
    }

    #[test]
    fn identical_episodes_on_ten_points() {
        // Brute force on a fixed 10-point set compared with itself: each νk is
        // the (k−1)-th within-set distance (coincident copy at 0), so νk ≤ μk.
        let pts: Vec<f64> = vec![0.0, 0.7, 1.1, 2.5, 2.6, 4.0, 5.5, 5.9, 7.2, 9.0];
        let e = EpisodeEmbeddings::from_scalars(&pts).unwrap();
        let p = DivergenceParams::new(0.5, 3).unwrap();
        let rep = episodic_discrepancy(&e, &e, &p).unwrap();
        assert_eq!(rep.ratio_terms.len(), 10);
        assert!(rep.ratio_terms.iter().all(|&r| r <= 1.0 && r > 0.0));
        assert!(rep.d_hat.is_finite());
        assert!((rep.d_hat - naive(&pts, &pts, 3, 0.5)).abs() < 1e-12);
        assert_eq!(rep.guarded, 0);
    }

    #[test]
    fn translated_episode_has_large_discrepancy() {
        let base: Vec<f64> = (0..20).map(|i| i as f64 * 0.1).collect();
        let far: Vec<f64> = base.iter().map(|v| v + 100.0).collect();
        let p = DivergenceParams::new(0.5, 3).unwrap();
        let rep = episodic_discrepancy(
            &EpisodeEmbeddings::from_scalars(&far).unwrap(),
            &EpisodeEmbeddings::from_scalars(&base).unwrap(),
            &p,
        )
        .unwrap();
        assert!(rep.d_hat > 5.0, "{}", rep.d_hat);
        assert!((rep.d_hat - naive(&far, &base, 3, 0.5)).abs() < 1e-12);
    }

    #[test]
    fn short_episode_rejected() {
        let p = DivergenceParams::new(0.5, 3).unwrap();
        let short = EpisodeEmbeddings::from_scalars(&[0.0, 1.0, 2.0]).unwrap();
        let long = EpisodeEmbeddings::from_scalars(&[0.0, 1.0, 2.0, 3.0]).unwrap();
        assert!(episodic_discrepancy(&short, &long, &p).is_err());
        assert!(episodic_discrepancy(&long, &short, &p).is_ok());
    }

    #[test]
    fn duplicate_points_are_guarded() {
        let p = DivergenceParams::new(0.5, 1).unwrap();
        let x = PointSet::from_scalars(&[1.0, 1.0, 2.0]).unwrap();
        let y = PointSet::from_scalars(&[1.0, 5.0]).unwrap();
        let est = estimate_renyi_divergence_with(&x, &y, &p, NeighborBackend::BruteForce).unwrap();
        assert!(est.value.is_finite());
        assert!(est.guarded >= 2);
    }
}
