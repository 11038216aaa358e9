use ndarray::Array2;

use crate::agents::{compute_gae, run_training, AgentConfig, Trainer};
use crate::divergence::{c_correction, estimate_renyi_divergence_with, DivergenceParams, ZERO_DISTANCE_GUARD};
use crate::encoder::EpisodeEmbeddings;
use crate::envs::EnvSpec;
use crate::error::Result;
use crate::nets::{Activation, SmallNet};
use crate::numerics::{NeighborBackend, PointSet, RngStream};
use crate::rewards::{decay_lambda, revd_rewards, RewardConfig, RewardVariant};

/// Result of one invariant check.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

/// `Γ(k)²/(Γ(k−α+1)Γ(k+α−1))` by recurrence in `k` from the reflection-formula
/// value at `k = 1`, without any log-gamma evaluation.
pub fn correction_by_recurrence(k: usize, alpha: f64) -> f64 {
    let mut c = (std::f64::consts::PI * alpha).sin() / (std::f64::consts::PI * (1.0 - alpha));
    for j in 2..=k {
        let j = j as f64;
        c *= (j - 1.0) * (j - 1.0) / ((j - alpha) * (j + alpha - 2.0));
    }
    c
}

/// Estimator evaluated with explicit double loops and full sorts.
pub fn naive_divergence(x: &[Vec<f64>], y: &[Vec<f64>], alpha: f64, k: usize) -> f64 {
    let dist = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(p, q)| (p - q).powi(2)).sum::<f64>().sqrt();
    let kth = |mut d: Vec<f64>| {
        d.sort_by(f64::total_cmp);
        let v = d[k - 1];
        if v == 0.0 { ZERO_DISTANCE_GUARD } else { v }
    };
    let (n, m) = (x.len() as f64, y.len() as f64);
    let mut sum = 0.0;
    for (i, xi) in x.iter().enumerate() {
        let mu = kth(x.iter().enumerate().filter(|(j, _)| *j != i).map(|(_, xj)| dist(xi, xj)).collect());
        let nu = kth(y.iter().map(|yj| dist(xi, yj)).collect());
        sum += ((n - 1.0) * mu / (m * nu)).powf(1.0 - alpha);
    }
    let c = correction_by_recurrence(k, alpha);
    (sum / n * c).ln() / (alpha - 1.0)
}

/// GAE written as the explicit sum `Σ_l (γλ)^l δ_{t+l}` over each episode piece.
pub fn brute_force_gae(rewards: &[f64], values: &[f64], dones: &[bool], bootstrap: f64, gamma: f64, lam: f64) -> Vec<f64> {
    let n = rewards.len();
    let next_value = |t: usize| if dones[t] { 0.0 } else if t + 1 < n { values[t + 1] } else { bootstrap };
    let delta: Vec<f64> = (0..n).map(|t| rewards[t] + gamma * next_value(t) - values[t]).collect();
    (0..n)
        .map(|t| {
            let mut acc = 0.0;
            for l in 0..n - t {
                acc += (gamma * lam).powi(l as i32) * delta[t + l];
                if dones[t + l] {
                    break;
                }
            }
            acc
        })
        .collect()
}

fn check(name: &'static str, f: impl FnOnce() -> Result<(bool, String)>) -> CheckResult {
    match f() {
        Ok((passed, detail)) => CheckResult { name, passed, detail },
        Err(e) => CheckResult { name, passed: false, detail: format!("error: {e}") },
    }
}

fn random_set(rng: &mut RngStream, n: usize, d: usize) -> Vec<Vec<f64>> {
    (0..n).map(|_| (0..d).map(|_| rng.normal()).collect()).collect()
}

/// Fast invariant suite; each check takes well under a few seconds.
pub fn run_selftest() -> Vec<CheckResult> {
    let mut out = Vec::new();

    out.push(check("correction constant", || {
        let mut worst = 0.0f64;
        for k in 1..=10 {
            for a in 1..=9 {
                let alpha = a as f64 / 10.0;
                let oracle = correction_by_recurrence(k, alpha);
                worst = worst.max((c_correction(k, alpha)? - oracle).abs() / oracle);
            }
        }
        let rejects = c_correction(1, 2.5).is_err() && c_correction(2, 1.0).is_err();
        Ok((worst < 1e-12 && rejects, format!("max relative error {worst:.2e}")))
    }));

    out.push(check("estimator matches double loop", || {
        let mut rng = RngStream::new(11);
        let mut worst = 0.0f64;
        for trial in 0..20 {
            let (n, m, d) = (8 + trial * 2, 6 + trial * 3, 1 + trial % 3);
            let x = random_set(&mut rng, n, d);
            let y = random_set(&mut rng, m, d);
            let p = DivergenceParams::new(0.5, 3)?;
            for backend in [NeighborBackend::BruteForce, NeighborBackend::KdTree] {
                let fast = estimate_renyi_divergence_with(&PointSet::from_rows(&x)?, &PointSet::from_rows(&y)?, &p, backend)?.value;
                worst = worst.max((fast - naive_divergence(&x, &y, 0.5, 3)).abs());
            }
        }
        Ok((worst < 1e-12, format!("max abs difference {worst:.2e}")))
    }));

    out.push(check("null divergence", || {
        let p = DivergenceParams::new(0.5, 5)?;
        let mut total = 0.0;
        for seed in 0..5 {
            let mut rng = RngStream::new(100 + seed);
            let x = PointSet::from_scalars(&(0..1000).map(|_| rng.normal()).collect::<Vec<_>>())?;
            let y = PointSet::from_scalars(&(0..1000).map(|_| rng.normal()).collect::<Vec<_>>())?;
            total += estimate_renyi_divergence_with(&x, &y, &p, NeighborBackend::Auto)?.value;
        }
        let mean = total / 5.0;
        Ok((mean.abs() < 0.05, format!("mean estimate {mean:.4}")))
    }));

    out.push(check("gae recursion", || {
        let mut rng = RngStream::new(5);
        let mut worst = 0.0f64;
        for _ in 0..100 {
            let n = 1 + rng.index(16);
            let r: Vec<f64> = (0..n).map(|_| rng.normal()).collect();
            let v: Vec<f64> = (0..n).map(|_| rng.normal()).collect();
            let d: Vec<bool> = (0..n).map(|_| rng.bernoulli(0.2)).collect();
            let boot = rng.normal();
            let (adv, _) = compute_gae(&r, &v, &d, boot, 0.99, 0.95)?;
            let oracle = brute_force_gae(&r, &v, &d, boot, 0.99, 0.95);
            worst = adv.iter().zip(&oracle).fold(worst, |w, (a, b)| w.max((a - b).abs()));
        }
        Ok((worst < 1e-10, format!("max abs difference {worst:.2e}")))
    }));

    out.push(check("network gradients", || {
        let mut worst = 0.0f64;
        for seed in 0..10 {
            let mut rng = RngStream::new(seed);
            let mut net = SmallNet::mlp(&[3, 5, 4, 2], Activation::Tanh, Activation::Identity, seed)?;
            let x = Array2::from_shape_fn((4, 3), |_| rng.normal());
            let up = Array2::from_shape_fn((4, 2), |_| rng.normal());
            net.forward_train(x.view())?;
            let g = net.backward(up.view())?;
            let objective = |net: &SmallNet| -> Result<f64> { Ok((&net.forward(x.view())? * &up).sum()) };
            for idx in 0..net.num_params() {
                let orig = net.params()[idx];
                let h = 1e-6;
                net.params_mut()[idx] = orig + h;
                let plus = objective(&net)?;
                net.params_mut()[idx] = orig - h;
                let minus = objective(&net)?;
                net.params_mut()[idx] = orig;
                let fd = (plus - minus) / (2.0 * h);
                worst = worst.max((fd - g.params[idx]).abs() / fd.abs().max(g.params[idx].abs()).max(1e-3));
            }
        }
        Ok((worst < 1e-4, format!("max relative error {worst:.2e}")))
    }));

    out.push(check("collapsed episode earns nothing", || {
        let curr = EpisodeEmbeddings::from_rows(&vec![vec![1.0, 2.0, 3.0]; 16])?;
        let mut rng = RngStream::new(2);
        let prev = EpisodeEmbeddings::from_rows(&random_set(&mut rng, 16, 3))?;
        let batch = revd_rewards(&curr, &prev, &RewardConfig { k: 3, ..RewardConfig::default() })?;
        Ok((batch.rewards.iter().all(|&r| r == 0.0), format!("L = {}", batch.scaling_l)))
    }));

    let tiny = || AgentConfig { workers: 2, steps_per_episode: 16, total_env_steps: 2 * 16 * 6, ..AgentConfig::ppo_discrete() };
    let tiny_reward = RewardConfig { k: 3, ..RewardConfig::default() };

    out.push(check("training loop discipline", || {
        let spec = EnvSpec::new("fourroom-7");
        let agent = tiny();
        let envs = crate::agents::build_vec_env(&spec, agent.workers, 1)?;
        let mut trainer = Trainer::new(envs, agent, tiny_reward.clone(), 1)?;
        let mut ok = true;
        while !trainer.is_finished() {
            let idx = trainer.update_index();
            let trace = trainer.update()?;
            if idx == 0 {
                ok &= trace.intrinsic.iter().flatten().all(|&r| r == 0.0) && trace.record.intrinsic_max == 0.0;
            }
            ok &= trace.record.lambda == decay_lambda(tiny_reward.lambda0, tiny_reward.kappa, idx);
            for (m, e) in trainer.memory().iter().zip(&trace.embeddings) {
                ok &= m.current.is_none() && m.previous.as_ref() == Some(e);
            }
        }
        ok &= trainer.env_steps() == tiny().total_env_steps;
        Ok((ok, format!("{} updates", trainer.update_index())))
    }));

    out.push(check("ablation identity", || {
        let spec = EnvSpec::new("fourroom-7");
        let none = run_training(&spec, &tiny(), &RewardConfig { variant: RewardVariant::None, ..tiny_reward.clone() }, 4)?;
        let off = run_training(&spec, &tiny(), &RewardConfig { lambda0: 0.0, ..tiny_reward.clone() }, 4)?;
        Ok((none == off, format!("{} updates compared", none.len())))
    }));

    out.push(check("determinism", || {
        let spec = EnvSpec::new("chain-12");
        let a = run_training(&spec, &tiny(), &tiny_reward, 9)?;
        let b = run_training(&spec, &tiny(), &tiny_reward, 9)?;
        Ok((a == b, format!("{} updates compared", a.len())))
    }));

    out.push(check("rotation invariance of rewards", || {
        let mut rng = RngStream::new(8);
        let a = random_set(&mut rng, 20, 2);
        let b = random_set(&mut rng, 20, 2);
        let (s, c) = 1.1f64.sin_cos();
        let rot = |v: &[Vec<f64>]| v.iter().map(|p| vec![c * p[0] - s * p[1], s * p[0] + c * p[1]]).collect::<Vec<_>>();
        let cfg = RewardConfig { k: 3, ..RewardConfig::default() };
        let r1 = revd_rewards(&EpisodeEmbeddings::from_rows(&a)?, &EpisodeEmbeddings::from_rows(&b)?, &cfg)?;
        let r2 = revd_rewards(&EpisodeEmbeddings::from_rows(&rot(&a))?, &EpisodeEmbeddings::from_rows(&rot(&b))?, &cfg)?;
        let worst = r1.rewards.iter().zip(&r2.rewards).fold(0.0f64, |w, (x, y)| w.max((x - y).abs()));
        Ok((worst < 1e-9, format!("max abs difference {worst:.2e}")))
    }));

    out
}
