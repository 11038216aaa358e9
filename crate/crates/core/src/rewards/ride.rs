use ndarray::{concatenate, Array2, ArrayView2, Axis};

use crate::encoder::EpisodeEmbeddings;
use crate::error::{Error, Result};
use crate::nets::{adam_step, Activation, AdamState, SmallNet};
use crate::numerics::{euclidean, kth_distances_within, NeighborBackend};

/// Forward model `g(φ(s), a) → φ(s')` with one ReLU hidden layer.
pub fn dynamics_model(embed_dim: usize, action_dim: usize, hidden: usize, seed: u64) -> Result<SmallNet> {
    SmallNet::mlp(&[embed_dim + action_dim, hidden, embed_dim], Activation::Relu, Activation::Identity, seed)
}

fn check_pairs(curr: ArrayView2<'_, f64>, actions: ArrayView2<'_, f64>, next: ArrayView2<'_, f64>) -> Result<Array2<f64>> {
    if curr.nrows() == 0 {
        return Err(Error::InsufficientSamples { needed: 1, available: 0 });
    }
    if curr.dim() != next.dim() {
        return Err(Error::DimensionMismatch { expected: curr.ncols(), found: next.ncols() });
    }
    if actions.nrows() != curr.nrows() {
        return Err(Error::DimensionMismatch { expected: curr.nrows(), found: actions.nrows() });
    }
    Ok(concatenate(Axis(1), &[curr, actions]).expect("row counts checked"))
}

/// Mean squared prediction error over all pairs and coordinates.
pub fn dynamics_loss(model: &SmallNet, curr: ArrayView2<'_, f64>, actions: ArrayView2<'_, f64>, next: ArrayView2<'_, f64>) -> Result<f64> {
    let input = check_pairs(curr, actions, next)?;
    let pred = model.forward(input.view())?;
    Ok((&pred - &next).mapv(|e| e * e).mean().unwrap_or(0.0))
}

/// One full-batch Adam step on the prediction error; returns the loss after
/// the step.
pub fn dynamics_update(
    model: &mut SmallNet,
    opt: &mut AdamState,
    curr: ArrayView2<'_, f64>,
    actions: ArrayView2<'_, f64>,
    next: ArrayView2<'_, f64>,
) -> Result<f64> {
    let input = check_pairs(curr, actions, next)?;
    let pred = model.forward_train(input.view())?;
    let scale = 2.0 / pred.len() as f64;
    let upstream = (&pred - &next).mapv(|e| e * scale);
    let grads = model.backward(upstream.view())?;
    adam_step(model.params_mut(), &grads.params, opt)?;
    dynamics_loss(model, curr, actions, next)
}

/// Median of the within-episode nearest-neighbor distances pooled over
/// `episodes`. Episodes with fewer than two states contribute nothing.
pub fn median_nn_distance(episodes: &[&EpisodeEmbeddings]) -> Result<f64> {
    let mut pooled = Vec::new();
    for e in episodes.iter().filter(|e| e.len() >= 2) {
        pooled.extend(kth_distances_within(&e.points()?, 1, NeighborBackend::Auto)?);
    }
    if pooled.is_empty() {
        return Err(Error::InsufficientSamples { needed: 2, available: 0 });
    }
    pooled.sort_by(f64::total_cmp);
    let n = pooled.len();
    Ok(if n % 2 == 1 { pooled[n / 2] } else { 0.5 * (pooled[n / 2 - 1] + pooled[n / 2]) })
}

/// Impact bonus `‖φ(s') − φ(s)‖ / √N(s')`, where `N(s')` counts the visit to
/// `s'` itself plus every earlier state of the episode within `radius` of it.
/// Row `t` of `next` is the successor of row `t` of `curr`.
pub fn ride_rewards(curr: &EpisodeEmbeddings, next: &EpisodeEmbeddings, radius: f64) -> Result<Vec<f64>> {
    if curr.len() != next.len() {
        return Err(Error::DimensionMismatch { expected: curr.len(), found: next.len() });
    }
    if curr.is_empty() {
        return Ok(Vec::new());
    }
    if curr.dim() != next.dim() {
        return Err(Error::DimensionMismatch { expected: curr.dim(), found: next.dim() });
    }
    let (c, n) = (curr.view(), next.view());
    Ok((0..curr.len())
        .map(|t| {
            let target = n.row(t);
            let earlier = (0..=t).filter(|&j| euclidean(c.row(j), target) <= radius).count();
            euclidean(target, c.row(t)) / ((1 + earlier) as f64).sqrt()
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nets::AdamConfig;
    use crate::numerics::RngStream;

    #[test]
    fn revisits_are_discounted() {
        // 0 → 1 → 0 → 1: the return trips land on already visited states
        let curr = EpisodeEmbeddings::from_scalars(&[0.0, 1.0, 0.0, 1.0]).unwrap();
        let next = EpisodeEmbeddings::from_scalars(&[1.0, 0.0, 1.0, 0.0]).unwrap();
        let r = ride_rewards(&curr, &next, 0.1).unwrap();
        let expected = [1.0, 1.0 / 2f64.sqrt(), 1.0 / 2f64.sqrt(), 1.0 / 3f64.sqrt()];
        for (a, b) in r.iter().zip(expected) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn standing_still_earns_nothing() {
        let e = EpisodeEmbeddings::from_rows(&vec![vec![0.5, 0.5]; 5]).unwrap();
        assert!(ride_rewards(&e, &e, 0.0).unwrap().iter().all(|&r| r == 0.0));
    }

    #[test]
    fn median_of_pooled_distances() {
        let a = EpisodeEmbeddings::from_scalars(&[0.0, 1.0, 3.0]).unwrap();
        let b = EpisodeEmbeddings::from_scalars(&[0.0, 10.0]).unwrap();
        // pooled: [1, 1, 2, 10, 10]
        assert_eq!(median_nn_distance(&[&a, &b]).unwrap(), 2.0);
        let lone = EpisodeEmbeddings::from_scalars(&[4.0]).unwrap();
        assert!(median_nn_distance(&[&lone]).is_err());
    }

    #[test]
    fn dynamics_loss_decreases() {
        let mut rng = RngStream::new(3);
        let curr = Array2::from_shape_fn((32, 4), |_| rng.normal());
        let actions = Array2::from_shape_fn((32, 2), |(i, j)| if i % 2 == j { 1.0 } else { 0.0 });
        let next = curr.mapv(|v| 0.5 * v + 0.1);
        let mut model = dynamics_model(4, 2, 16, 9).unwrap();
        let mut opt = AdamState::new(model.num_params(), AdamConfig { lr: 1e-2, ..AdamConfig::default() });
        let start = dynamics_loss(&model, curr.view(), actions.view(), next.view()).unwrap();
        let mut last = start;
        for _ in 0..200 {
            last = dynamics_update(&mut model, &mut opt, curr.view(), actions.view(), next.view()).unwrap();
        }
        assert!(last < 0.1 * start, "{start} -> {last}");
    }

    #[test]
    fn dynamics_update_needs_pairs() {
        let mut model = dynamics_model(2, 1, 4, 0).unwrap();
        let mut opt = AdamState::new(model.num_params(), AdamConfig::default());
        let empty = Array2::<f64>::zeros((0, 2));
        let no_actions = Array2::<f64>::zeros((0, 1));
        assert!(dynamics_update(&mut model, &mut opt, empty.view(), no_actions.view(), empty.view()).is_err());
    }
}
