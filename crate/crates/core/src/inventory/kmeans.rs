//! Lloyd's k-means with k-means++ seeding.
//!
//! Assignment is data-parallel; every per-point decision is independent
//! and ties go to the lowest centroid index, so results do not depend on
//! scheduling.

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::hac::sq_dist;
use super::Codebook;
use crate::error::{Error, Result};

pub const DEFAULT_K: usize = 55;
pub const DEFAULT_MAX_ITERS: usize = 300;

#[derive(Debug, Clone, PartialEq)]
pub struct KMeansResult {
    pub codebook: Codebook,
    pub assignments: Vec<usize>,
    /// Within-cluster sum of squares after each assignment step.
    pub objective: Vec<f64>,
    pub iterations: usize,
}

pub fn kmeans(features: &[Vec<f64>], k: usize, seed: u64, max_iters: usize) -> Result<KMeansResult> {
    if k < 2 {
        return Err(Error::invalid_param(format!("k must be at least 2, got {k}")));
    }
    if max_iters == 0 {
        return Err(Error::invalid_param("max_iters must be positive"));
    }
    let dim = features.first().map(Vec::len).unwrap_or(0);
    if dim == 0 {
        return Err(Error::invalid_input("k-means needs non-empty feature vectors"));
    }
    if let Some(bad) = features.iter().find(|f| f.len() != dim) {
        return Err(Error::DimensionMismatch { expected: dim, actual: bad.len() });
    }
    let distinct = count_distinct(features);
    if k > distinct {
        return Err(Error::invalid_input(format!("k = {k} exceeds the {distinct} distinct feature vectors")));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut centroids = plus_plus(features, k, &mut rng)?;
    let mut assignments = assign(features, &centroids);
    let mut objective = vec![wss(features, &centroids, &assignments)];
    let mut iterations = 0;

    while iterations < max_iters {
        iterations += 1;
        centroids = update(features, &assignments, k, dim);
        reseed_empty(features, &mut centroids, &mut assignments);
        let next = assign(features, &centroids);
        objective.push(wss(features, &centroids, &next));
        let done = next == assignments;
        assignments = next;
        if done {
            break;
        }
    }

    let codebook = Codebook::new(centroids)?;
    Ok(KMeansResult { codebook, assignments, objective, iterations })
}

/// Index of the nearest centroid; ties resolve to the lowest index.
pub fn nearest(point: &[f64], centroids: &[Vec<f64>]) -> usize {
    let mut best = 0;
    let mut best_d = f64::INFINITY;
    for (i, c) in centroids.iter().enumerate() {
        let d = sq_dist(point, c);
        if d < best_d {
            best = i;
            best_d = d;
        }
    }
    best
}

fn assign(features: &[Vec<f64>], centroids: &[Vec<f64>]) -> Vec<usize> {
    features.par_iter().map(|p| nearest(p, centroids)).collect()
}

fn wss(features: &[Vec<f64>], centroids: &[Vec<f64>], assignments: &[usize]) -> f64 {
    features.iter().zip(assignments).map(|(p, &a)| sq_dist(p, &centroids[a])).sum()
}

fn update(features: &[Vec<f64>], assignments: &[usize], k: usize, dim: usize) -> Vec<Vec<f64>> {
    let mut sums = vec![vec![0.0; dim]; k];
    let mut counts = vec![0usize; k];
    for (p, &a) in features.iter().zip(assignments) {
        counts[a] += 1;
        for (s, x) in sums[a].iter_mut().zip(p) {
            *s += x;
        }
    }
    for (s, &c) in sums.iter_mut().zip(&counts) {
        if c > 0 {
            s.iter_mut().for_each(|v| *v /= c as f64);
        } else {
            s.fill(f64::NAN);
        }
    }
    sums
}

/// Moves each empty centroid onto the point farthest from its own
/// centroid. That point is reassigned, so the objective cannot grow.
fn reseed_empty(features: &[Vec<f64>], centroids: &mut [Vec<f64>], assignments: &mut [usize]) {
    for j in 0..centroids.len() {
        if !centroids[j][0].is_nan() {
            continue;
        }
        let mut far = None;
        let mut far_d = -1.0;
        for (i, p) in features.iter().enumerate() {
            let a = assignments[i];
            if centroids[a][0].is_nan() {
                continue;
            }
            let d = sq_dist(p, &centroids[a]);
            if d > far_d {
                far = Some(i);
                far_d = d;
            }
        }
        let i = far.expect("at least one non-empty cluster");
        centroids[j] = features[i].clone();
        assignments[i] = j;
    }
}

fn plus_plus(features: &[Vec<f64>], k: usize, rng: &mut ChaCha8Rng) -> Result<Vec<Vec<f64>>> {
    let mut centroids = vec![features[rng.random_range(0..features.len())].clone()];
    let mut d2: Vec<f64> = features.iter().map(|p| sq_dist(p, &centroids[0])).collect();
    while centroids.len() < k {
        let pick = WeightedIndex::new(&d2)
            .map_err(|e| Error::Invariant(format!("k-means++ sampling failed: {e}")))?
            .sample(rng);
        let c = features[pick].clone();
        for (d, p) in d2.iter_mut().zip(features) {
            *d = d.min(sq_dist(p, &c));
        }
        centroids.push(c);
    }
    Ok(centroids)
}

fn count_distinct(features: &[Vec<f64>]) -> usize {
    let mut keys: Vec<Vec<u64>> =
        features.iter().map(|f| f.iter().map(|x| if *x == 0.0 { 0 } else { x.to_bits() }).collect()).collect();
    keys.sort_unstable();
    keys.dedup();
    keys.len()
}
