use super::{DecayMode, RewardConfig};
use crate::error::{Error, Result};

/// `λ₀ (1 − κ)^index`.
pub fn decay_lambda(lambda0: f64, kappa: f64, index: u64) -> f64 {
    lambda0 * (1.0 - kappa).powi(index.min(i32::MAX as u64) as i32)
}

/// `total[t] = extrinsic[t] + λ·intrinsic[t]`.
///
/// In per-episode mode λ uses `decay_index` for every element; in per-step
/// mode element `t` uses `decay_index + t`.
pub fn mix_rewards(extrinsic: &[f64], intrinsic: &[f64], cfg: &RewardConfig, decay_index: u64) -> Result<Vec<f64>> {
    if extrinsic.len() != intrinsic.len() {
        return Err(Error::DimensionMismatch { expected: extrinsic.len(), found: intrinsic.len() });
    }
    Ok(extrinsic
        .iter()
        .zip(intrinsic)
        .enumerate()
        .map(|(t, (e, i))| {
            let index = match cfg.decay_mode {
                DecayMode::PerEpisode => decay_index,
                DecayMode::PerStep => decay_index + t as u64,
            };
            e + decay_lambda(cfg.lambda0, cfg.kappa, index) * i
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn exploration_off() {
        let cfg = RewardConfig { lambda0: 0.0, ..RewardConfig::default() };
        let ext = [1.0, -2.0, 0.5];
        assert_eq!(mix_rewards(&ext, &[3.0, 4.0, 5.0], &cfg, 7).unwrap(), ext.to_vec());
    }

    #[test]
    fn default_coefficients() {
        let cfg = RewardConfig::default();
        let total = mix_rewards(&[1.0], &[2.0], &cfg, 0).unwrap();
        assert!((total[0] - 1.2).abs() < 1e-15);
    }

    #[test]
    fn no_decay_when_kappa_zero() {
        let cfg = RewardConfig { kappa: 0.0, ..RewardConfig::default() };
        for idx in [0, 1, 100, 1_000_000] {
            assert_eq!(decay_lambda(cfg.lambda0, cfg.kappa, idx), cfg.lambda0);
        }
        let step = RewardConfig { decay_mode: DecayMode::PerStep, kappa: 0.5, lambda0: 1.0, ..RewardConfig::default() };
        assert_eq!(mix_rewards(&[0.0; 3], &[1.0; 3], &step, 1).unwrap(), vec![0.5, 0.25, 0.125]);
    }

    #[test]
    fn length_mismatch() {
        assert!(mix_rewards(&[1.0], &[1.0, 2.0], &RewardConfig::default(), 0).is_err());
    }

    proptest! {
        #[test]
        fn linear_in_intrinsic(
            ext in proptest::collection::vec(-5.0f64..5.0, 8),
            a in proptest::collection::vec(-5.0f64..5.0, 8),
            b in proptest::collection::vec(-5.0f64..5.0, 8),
            c in -3.0f64..3.0,
            idx in 0u64..1000,
        ) {
            let cfg = RewardConfig::default();
            let combo: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x + c * y).collect();
            let zero = vec![0.0; 8];
            let base = mix_rewards(&ext, &zero, &cfg, idx).unwrap();
            let ma = mix_rewards(&ext, &a, &cfg, idx).unwrap();
            let mb = mix_rewards(&ext, &b, &cfg, idx).unwrap();
            let mc = mix_rewards(&ext, &combo, &cfg, idx).unwrap();
            for t in 0..8 {
                let expected = ma[t] + c * (mb[t] - base[t]);
                prop_assert!((mc[t] - expected).abs() < 1e-12);
            }
        }
    }
}
