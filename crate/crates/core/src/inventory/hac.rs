//! Ward-linkage agglomerative clustering via the nearest-neighbour chain.
//!
//! Small inputs use the Lance-Williams recurrence on a condensed matrix of
//! squared distances. Inputs above [`MATRIX_LIMIT`] points switch to the
//! equivalent centroid form of the Ward criterion, which needs O(n·d)
//! memory instead of O(n²).

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_SAMPLE_CAP: usize = 100_000;

/// Above this many points the condensed matrix route is not used.
pub const MATRIX_LIMIT: usize = 4096;

/// One agglomeration step. Cluster ids follow the usual convention: leaves
/// are `0..n`, the cluster created by step `s` is `n + s`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Merge {
    pub a: usize,
    pub b: usize,
    pub height: f64,
    pub size: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dendrogram {
    pub leaves: usize,
    pub merges: Vec<Merge>,
}

impl Dendrogram {
    pub fn heights(&self) -> impl Iterator<Item = f64> + '_ {
        self.merges.iter().map(|m| m.height)
    }

    /// Flat cluster labels (`0..k`, in order of first leaf) obtained by
    /// undoing the last `k - 1` merges.
    pub fn cut(&self, k: usize) -> Result<Vec<usize>> {
        if k == 0 || k > self.leaves {
            return Err(Error::invalid_param(format!("cannot cut {} leaves into {k} clusters", self.leaves)));
        }
        let mut uf = UnionFind::new(self.leaves);
        let mut rep: Vec<usize> = (0..self.leaves).collect();
        for m in &self.merges[..self.leaves - k] {
            let (ra, rb) = (rep[m.a], rep[m.b]);
            let root = uf.union(ra, rb);
            rep.push(root);
        }
        let mut label_of_root = vec![usize::MAX; self.leaves];
        let mut next = 0;
        Ok((0..self.leaves)
            .map(|leaf| {
                let r = uf.find(leaf);
                if label_of_root[r] == usize::MAX {
                    label_of_root[r] = next;
                    next += 1;
                }
                label_of_root[r]
            })
            .collect())
    }
}

/// Ward-linkage HAC. Inputs larger than `sample_cap` are uniformly
/// subsampled with `seed`; the returned dendrogram's leaves are then the
/// sampled points in ascending original index order.
pub fn hac_ward(features: &[Vec<f64>], sample_cap: usize, seed: u64) -> Result<Dendrogram> {
    if features.len() < 2 {
        return Err(Error::invalid_input(format!(
            "hierarchical clustering needs at least 2 vectors, got {}",
            features.len()
        )));
    }
    if sample_cap < 2 {
        return Err(Error::invalid_param("sample cap must be at least 2"));
    }
    let dim = features[0].len();
    if let Some(bad) = features.iter().find(|f| f.len() != dim) {
        return Err(Error::DimensionMismatch { expected: dim, actual: bad.len() });
    }
    let points: Vec<&[f64]> = if features.len() > sample_cap {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut idx = rand::seq::index::sample(&mut rng, features.len(), sample_cap).into_vec();
        idx.sort_unstable();
        idx.into_iter().map(|i| features[i].as_slice()).collect()
    } else {
        features.iter().map(Vec::as_slice).collect()
    };

    let raw = if points.len() <= MATRIX_LIMIT {
        nn_chain(&mut LanceWilliams::new(&points))
    } else {
        nn_chain(&mut Centroids::new(&points))
    };
    Ok(label_merges(points.len(), raw))
}

/// Ranks candidate cluster counts `2..=max_k` by the jump in merge height
/// that separates `k` clusters from `k - 1`. Larger gaps first, ties to the
/// smaller `k`.
pub fn suggest_k(d: &Dendrogram, max_k: usize) -> Vec<(usize, f64)> {
    let h: Vec<f64> = d.heights().collect();
    let n = d.leaves;
    let max_k = max_k.min(n);
    let mut out: Vec<(usize, f64)> = (2..=max_k)
        .map(|k| {
            let next = h[n - k];
            let done = if n - k == 0 { 0.0 } else { h[n - k - 1] };
            (k, next - done)
        })
        .collect();
    out.sort_by(|x, y| y.1.total_cmp(&x.1).then(x.0.cmp(&y.0)));
    out
}

trait WardSpace {
    fn len(&self) -> usize;
    /// Ward dissimilarity on the squared-distance scale.
    fn dist(&self, a: usize, b: usize) -> f64;
    /// Merges cluster `gone` into `keep`.
    fn merge(&mut self, keep: usize, gone: usize, active: &[bool]);
}

/// Nearest-neighbour chain. Returns merges as (leaf in a, leaf in b,
/// dissimilarity, size) in discovery order.
fn nn_chain<S: WardSpace>(space: &mut S) -> Vec<(usize, usize, f64, usize)> {
    let n = space.len();
    let mut active = vec![true; n];
    let mut size = vec![1usize; n];
    let mut chain: Vec<usize> = Vec::with_capacity(n);
    let mut out = Vec::with_capacity(n - 1);

    for _ in 0..n - 1 {
        if chain.is_empty() {
            chain.push(active.iter().position(|&a| a).expect("an active cluster remains"));
        }
        let (a, b, d) = loop {
            let a = *chain.last().unwrap();
            let prev = chain.len().checked_sub(2).map(|i| chain[i]);
            let (mut best, mut best_d) = match prev {
                Some(p) => (p, space.dist(a, p)),
                None => (usize::MAX, f64::INFINITY),
            };
            for (c, &live) in active.iter().enumerate() {
                if c == a || !live || Some(c) == prev {
                    continue;
                }
                let dc = space.dist(a, c);
                if dc < best_d || (best == usize::MAX) {
                    best = c;
                    best_d = dc;
                }
            }
            if Some(best) == prev {
                chain.pop();
                chain.pop();
                break (a, best, best_d);
            }
            chain.push(best);
        };
        let (keep, gone) = if a < b { (a, b) } else { (b, a) };
        space.merge(keep, gone, &active);
        active[gone] = false;
        size[keep] += size[gone];
        out.push((keep, gone, d, size[keep]));
    }
    out
}

fn label_merges(n: usize, mut raw: Vec<(usize, usize, f64, usize)>) -> Dendrogram {
    // Ward is reducible, so sorting the chain's merges by height yields a
    // valid agglomeration order.
    raw.sort_by(|x, y| x.2.total_cmp(&y.2));
    let mut uf = UnionFind::new(n);
    let mut label: Vec<usize> = (0..n).collect();
    let merges = raw
        .into_iter()
        .enumerate()
        .map(|(step, (x, y, d, size))| {
            let (rx, ry) = (uf.find(x), uf.find(y));
            let (la, lb) = (label[rx], label[ry]);
            let root = uf.union(rx, ry);
            label[root] = n + step;
            Merge { a: la.min(lb), b: la.max(lb), height: d.max(0.0).sqrt(), size }
        })
        .collect();
    Dendrogram { leaves: n, merges }
}

struct LanceWilliams {
    n: usize,
    size: Vec<f64>,
    d: Vec<f64>,
}

impl LanceWilliams {
    fn new(points: &[&[f64]]) -> Self {
        let n = points.len();
        let mut d = Vec::with_capacity(n * (n - 1) / 2);
        for i in 0..n {
            for j in i + 1..n {
                d.push(sq_dist(points[i], points[j]));
            }
        }
        Self { n, size: vec![1.0; n], d }
    }

    fn idx(&self, a: usize, b: usize) -> usize {
        let (i, j) = if a < b { (a, b) } else { (b, a) };
        self.n * i - i * (i + 1) / 2 + (j - i - 1)
    }
}

impl WardSpace for LanceWilliams {
    fn len(&self) -> usize {
        self.n
    }

    fn dist(&self, a: usize, b: usize) -> f64 {
        self.d[self.idx(a, b)]
    }

    fn merge(&mut self, keep: usize, gone: usize, active: &[bool]) {
        let (ni, nj) = (self.size[keep], self.size[gone]);
        let dij = self.dist(keep, gone);
        for (k, &live) in active.iter().enumerate() {
            if !live || k == keep || k == gone {
                continue;
            }
            let nk = self.size[k];
            let dik = self.dist(keep, k);
            let djk = self.dist(gone, k);
            let updated = ((ni + nk) * dik + (nj + nk) * djk - nk * dij) / (ni + nj + nk);
            let at = self.idx(keep, k);
            self.d[at] = updated;
        }
        self.size[keep] = ni + nj;
    }
}

struct Centroids {
    size: Vec<f64>,
    centroid: Vec<Vec<f64>>,
}

impl Centroids {
    fn new(points: &[&[f64]]) -> Self {
        Self { size: vec![1.0; points.len()], centroid: points.iter().map(|p| p.to_vec()).collect() }
    }
}

impl WardSpace for Centroids {
    fn len(&self) -> usize {
        self.size.len()
    }

    fn dist(&self, a: usize, b: usize) -> f64 {
        let (na, nb) = (self.size[a], self.size[b]);
        2.0 * na * nb / (na + nb) * sq_dist(&self.centroid[a], &self.centroid[b])
    }

    fn merge(&mut self, keep: usize, gone: usize, _active: &[bool]) {
        let (na, nb) = (self.size[keep], self.size[gone]);
        let moved = std::mem::take(&mut self.centroid[gone]);
        for (c, g) in self.centroid[keep].iter_mut().zip(&moved) {
            *c = (na * *c + nb * g) / (na + nb);
        }
        self.size[keep] = na + nb;
    }
}

pub(crate) fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        Self { parent: (0..n).collect() }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) -> usize {
        let (ra, rb) = (self.find(a), self.find(b));
        let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
        self.parent[hi] = lo;
        lo
    }
}

#[cfg(test)]
mod tests {
    use rand::Rng;
    use rand_distr::{Distribution, Normal};

    use super::*;

    /// O(n³) greedy Ward: at every step merge the pair with the smallest
    /// increase in within-cluster sum of squares, computed from scratch.
    fn brute_force(points: &[Vec<f64>]) -> Vec<(Vec<usize>, f64)> {
        let mut clusters: Vec<Vec<usize>> = (0..points.len()).map(|i| vec![i]).collect();
        let sse = |members: &[usize]| {
            let d = points[0].len();
            let mut mean = vec![0.0; d];
            for &m in members {
                for (acc, x) in mean.iter_mut().zip(&points[m]) {
                    *acc += x / members.len() as f64;
                }
            }
            members.iter().map(|&m| sq_dist(&points[m], &mean)).sum::<f64>()
        };
        let mut out = Vec::new();
        while clusters.len() > 1 {
            let mut best = (0, 0, f64::INFINITY);
            for i in 0..clusters.len() {
                for j in i + 1..clusters.len() {
                    let mut u = clusters[i].clone();
                    u.extend(&clusters[j]);
                    let inc = sse(&u) - sse(&clusters[i]) - sse(&clusters[j]);
                    if inc < best.2 {
                        best = (i, j, inc);
                    }
                }
            }
            let (i, j, inc) = best;
            let b = clusters.remove(j);
            clusters[i].extend(b);
            clusters[i].sort_unstable();
            out.push((clusters[i].clone(), (2.0 * inc.max(0.0)).sqrt()));
        }
        out
    }

    fn members(d: &Dendrogram) -> Vec<Vec<usize>> {
        let mut sets: Vec<Vec<usize>> = (0..d.leaves).map(|i| vec![i]).collect();
        for m in &d.merges {
            let mut u = sets[m.a].clone();
            u.extend(&sets[m.b]);
            u.sort_unstable();
            sets.push(u);
        }
        sets.split_off(d.leaves)
    }

    fn random_points(n: usize, dim: usize, seed: u64) -> Vec<Vec<f64>> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n).map(|_| (0..dim).map(|_| rng.random_range(-10.0..10.0)).collect()).collect()
    }

    #[test]
    fn close_pair_merges_first() {
        let d = hac_ward(&[vec![0.0, 0.0], vec![0.0, 1.0], vec![10.0, 10.0]], 100, 0).unwrap();
        assert_eq!((d.merges[0].a, d.merges[0].b), (0, 1));
        assert_eq!(d.merges[1], Merge { a: 2, b: 3, height: d.merges[1].height, size: 3 });
        // exhaustive pairwise Ward cost: the (0,1) pair costs 0.5, the others ~100
        assert!((d.merges[0].height - 1.0).abs() < 1e-12);
    }

    #[test]
    fn identical_points_merge_at_zero() {
        let d = hac_ward(&[vec![3.0, 3.0], vec![3.0, 3.0]], 10, 0).unwrap();
        assert_eq!(d.merges, vec![Merge { a: 0, b: 1, height: 0.0, size: 2 }]);
    }

    #[test]
    fn rejects_degenerate_input() {
        assert!(hac_ward(&[vec![1.0]], 10, 0).is_err());
        assert!(hac_ward(&[vec![1.0], vec![1.0, 2.0]], 10, 0).is_err());
    }

    #[test]
    fn matches_brute_force() {
        for seed in 0..20 {
            let pts = random_points(12, 3, seed);
            let d = hac_ward(&pts, 1000, 0).unwrap();
            let oracle = brute_force(&pts);
            assert_eq!(d.merges.len(), oracle.len());
            for (m, (set, _)) in members(&d).iter().zip(&oracle) {
                assert_eq!(m, set, "seed {seed}");
            }
            for (m, (_, h)) in d.merges.iter().zip(&oracle) {
                assert!((m.height - h).abs() < 1e-9 * h.max(1.0), "seed {seed}: {} vs {h}", m.height);
            }
        }
    }

    #[test]
    fn centroid_route_agrees_with_matrix_route() {
        let pts = random_points(60, 4, 7);
        let refs: Vec<&[f64]> = pts.iter().map(Vec::as_slice).collect();
        let a = label_merges(pts.len(), nn_chain(&mut LanceWilliams::new(&refs)));
        let b = label_merges(pts.len(), nn_chain(&mut Centroids::new(&refs)));
        assert_eq!(members(&a), members(&b));
        for (x, y) in a.merges.iter().zip(&b.merges) {
            assert!((x.height - y.height).abs() < 1e-9 * x.height.max(1.0));
        }
    }

    #[test]
    fn heights_are_monotone() {
        for seed in 0..10 {
            let d = hac_ward(&random_points(200, 2, seed), 1000, 0).unwrap();
            assert!(d.heights().zip(d.heights().skip(1)).all(|(a, b)| a <= b));
            assert_eq!(d.merges.last().unwrap().size, 200);
        }
    }

    #[test]
    fn subsampling_caps_leaves_and_is_seeded() {
        let pts = random_points(300, 2, 1);
        let a = hac_ward(&pts, 50, 9).unwrap();
        assert_eq!(a.leaves, 50);
        assert_eq!(a, hac_ward(&pts, 50, 9).unwrap());
    }

    #[test]
    fn suggest_k_finds_two_blobs() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let noise = Normal::new(0.0, 0.5).unwrap();
        let mut pts = Vec::new();
        for c in [-20.0, 20.0] {
            for _ in 0..40 {
                pts.push(vec![c + noise.sample(&mut rng), noise.sample(&mut rng)]);
            }
        }
        let d = hac_ward(&pts, 1000, 0).unwrap();
        assert_eq!(suggest_k(&d, 10)[0].0, 2);
        let labels = d.cut(2).unwrap();
        assert!(labels[..40].iter().all(|&l| l == 0));
        assert!(labels[40..].iter().all(|&l| l == 1));
    }

    #[test]
    fn suggest_k_single_merge() {
        let d = hac_ward(&[vec![0.0], vec![2.0]], 10, 0).unwrap();
        assert_eq!(suggest_k(&d, 5), vec![(2, d.merges[0].height)]);
    }
}
