//! Blackwell approachability simulation: Player Two steers the running
//! average of the state-indexed vector payoff into the orthant `{z <= y}`.
//!
//! When the average sits outside the orthant, the steering direction is the
//! normalized positive part of `avg - y`, and Player Two plays his optimal
//! strategy in the scalar game weighted by that direction. Projection onto
//! an orthant is coordinatewise clamping, so the distance is just the norm
//! of the positive part.

use std::collections::HashMap;

use rand::distributions::{Distribution, WeightedIndex};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::Result;
use crate::matrix::{game_value, Mat, StateMatrices};
use crate::simplex::SimplexPoint;

/// Player One's behaviour during the punishment simulation.
#[derive(Clone, Debug)]
pub enum OpponentPlay {
    /// A fixed mixed action every stage.
    Stationary(Vec<f64>),
    /// A repeating sequence of mixed actions.
    Cycle(Vec<Vec<f64>>),
    /// Plays the optimal row strategy of the direction-weighted game
    /// whenever the average is outside the orthant, uniform otherwise.
    BestResponse,
}

#[derive(Clone, Debug, Serialize)]
pub struct ApproachOutcome {
    /// Per-state average payoff vector after the final stage.
    pub averages: Vec<f64>,
    /// (stage, distance to the orthant) at the requested checkpoints.
    pub recorded: Vec<(usize, f64)>,
    pub final_distance: f64,
}

pub fn orthant_distance(avg: &[f64], y: &[f64]) -> f64 {
    avg.iter()
        .zip(y)
        .map(|(a, b)| (a - b).max(0.0).powi(2))
        .sum::<f64>()
        .sqrt()
}

/// Runs `stages` stages of the punishment strategy with a seeded RNG and
/// returns the per-state averages plus distances at the checkpoints.
pub fn approachability_punish(
    y: &[f64],
    mats: &StateMatrices,
    opponent: &OpponentPlay,
    stages: usize,
    seed: u64,
    record_at: &[usize],
) -> Result<ApproachOutcome> {
    let k = mats.states();
    assert_eq!(y.len(), k, "target vector must have one entry per state");
    let rows = mats.n_rows();
    let cols = mats.n_cols();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut avg = vec![0.0; k];
    let mut recorded = Vec::new();
    let uniform_row = vec![1.0 / rows as f64; rows];
    let uniform_col = vec![1.0 / cols as f64; cols];
    let mut cache: HashMap<Vec<i64>, (SimplexPoint, SimplexPoint)> = HashMap::new();

    for t in 1..=stages {
        let d: Vec<f64> = avg.iter().zip(y).map(|(a, b)| (a - b).max(0.0)).collect();
        let total: f64 = d.iter().sum();
        let outside = t > 1 && total > 0.0;
        let (opt_row, opt_col) = if outside {
            let lambda: Vec<f64> = d.iter().map(|v| v / total).collect();
            let key: Vec<i64> = lambda.iter().map(|v| (v * 1e7).round() as i64).collect();
            if let Some(hit) = cache.get(&key) {
                hit.clone()
            } else {
                let m = direction_matrix(mats, &lambda)?;
                let gv = game_value(&m)?;
                let entry = (gv.row, gv.col);
                cache.insert(key, entry.clone());
                entry
            }
        } else {
            (
                SimplexPoint::new_unchecked(uniform_row.clone()),
                SimplexPoint::new_unchecked(uniform_col.clone()),
            )
        };
        let p1_mix: Vec<f64> = match opponent {
            OpponentPlay::Stationary(p) => p.clone(),
            OpponentPlay::Cycle(seq) => seq[(t - 1) % seq.len()].clone(),
            OpponentPlay::BestResponse => {
                if outside {
                    opt_row.coords().to_vec()
                } else {
                    uniform_row.clone()
                }
            }
        };
        let i = WeightedIndex::new(&p1_mix)
            .expect("opponent mix must be a distribution")
            .sample(&mut rng);
        let j = WeightedIndex::new(opt_col.coords())
            .expect("column strategy must be a distribution")
            .sample(&mut rng);
        for (kk, a) in avg.iter_mut().enumerate() {
            let g = mats.a[kk].at(i, j);
            *a += (g - *a) / t as f64;
        }
        if record_at.contains(&t) {
            recorded.push((t, orthant_distance(&avg, y)));
        }
    }
    let final_distance = orthant_distance(&avg, y);
    Ok(ApproachOutcome {
        averages: avg,
        recorded,
        final_distance,
    })
}

fn direction_matrix(mats: &StateMatrices, lambda: &[f64]) -> Result<Mat> {
    StateMatrices::weighted(&mats.a, lambda)
}
