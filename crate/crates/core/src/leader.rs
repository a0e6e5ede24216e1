//! Leader clustering of the subsequence bag under normalized edit distance.
//!
//! Each round scans the bag and promotes an entry to a
//! new centroid when it is farther than `a*T` from every existing centroid,
//! assigns every entry to its nearest centroid within `T`, and finally
//! moves each centroid to the member with the smallest total distance to
//! its co-members. Rounds repeat, carrying centroids over, until the number
//! of clusters stops changing.
//!
//! Identical unit sequences behave identically at every step, so the work
//! is done once per distinct sequence and weighted by multiplicity. The
//! scan visits distinct sequences in [`ScanOrder`], which also breaks
//! medoid ties. Canonical order settles everything else: longer sequences
//! first, then lexicographic by unit labels, then by provenance.

use std::cmp::Ordering;
use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::alignment::SubsequenceBag;
use crate::error::{Error, Result};
use crate::metrics::{normalized_unchecked, MiningConfig};
use crate::Unit;

pub const DEFAULT_MAX_ROUNDS: usize = 50;

/// Visiting order of the centroid-creation scan.
///
/// With [`ScanOrder::Length`], spans that chain a keyword with its context
/// or with a second keyword become leaders first, and shorter exact repeats
/// can end up farther than `T` but within `a*T` of them: never assigned and
/// never promoted. Visiting the most repeated sequences first seeds
/// centroids at the repeats themselves.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScanOrder {
    /// Higher multiplicity first, then canonical order.
    #[default]
    Frequency,
    /// Canonical order only.
    Length,
}

impl FromStr for ScanOrder {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "frequency" => Ok(Self::Frequency),
            "length" => Ok(Self::Length),
            other => Err(Error::invalid_param(format!("unknown scan order `{other}`"))),
        }
    }
}

impl fmt::Display for ScanOrder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Frequency => "frequency",
            Self::Length => "length",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KeywordCluster {
    pub cluster_id: usize,
    /// Medoid of the members.
    pub centroid: Vec<Unit>,
    /// Centroid the members were assigned against (each is within `T`).
    pub leader: Vec<Unit>,
    /// Indices into the bag's entries, ascending.
    pub members: Vec<usize>,
    /// Sum of distances from the centroid to every member.
    pub total_intra_distance: f64,
}

impl KeywordCluster {
    pub fn size(&self) -> usize {
        self.members.len()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusteringResult {
    pub clusters: Vec<KeywordCluster>,
    /// Bag indices not within `T` of any centroid.
    pub unassigned: Vec<usize>,
    pub rounds_run: usize,
}

/// Snapshot of one round, for inspection and testing.
#[derive(Debug, Clone)]
pub struct RoundTrace {
    pub round: usize,
    /// Centroids in effect during the assignment step, carried ones first.
    pub leaders: Vec<Vec<Unit>>,
    /// Positions in `leaders` created by this round's scan.
    pub created: Vec<usize>,
    /// For each bag entry, the index into `leaders` it was assigned to.
    pub assignment: Vec<Option<usize>>,
    /// Medoid per non-empty leader, as `(leader index, medoid units)`.
    pub medoids: Vec<(usize, Vec<Unit>)>,
}

struct Distinct<'a> {
    units: &'a [Unit],
    weight: f64,
    /// Bag indices carrying these units, in canonical order.
    entries: Vec<usize>,
}

fn canonical_cmp(a: &crate::alignment::BagEntry, b: &crate::alignment::BagEntry) -> Ordering {
    b.units.len().cmp(&a.units.len()).then_with(|| a.units.cmp(&b.units)).then_with(|| a.cmp_provenance(b))
}

pub fn leader_cluster(bag: &SubsequenceBag, cfg: &MiningConfig, max_rounds: usize) -> Result<ClusteringResult> {
    leader_cluster_traced(bag, cfg, max_rounds, |_| {})
}

/// As [`leader_cluster`], reporting every round to `observe`.
pub fn leader_cluster_traced(
    bag: &SubsequenceBag,
    cfg: &MiningConfig,
    max_rounds: usize,
    mut observe: impl FnMut(&RoundTrace),
) -> Result<ClusteringResult> {
    if bag.is_empty() {
        return Err(Error::invalid_input("cannot cluster an empty bag"));
    }
    cfg.validate()?;
    if max_rounds == 0 {
        return Err(Error::invalid_param("max_rounds must be positive"));
    }
    let entries = bag.entries();
    if entries.iter().any(|e| e.units.is_empty()) {
        return Err(Error::invalid_input("bag contains an empty unit sequence"));
    }

    let mut canonical: Vec<usize> = (0..entries.len()).collect();
    canonical.sort_by(|&x, &y| canonical_cmp(&entries[x], &entries[y]));
    let mut distinct: Vec<Distinct> = Vec::new();
    for &i in &canonical {
        match distinct.last_mut() {
            Some(d) if d.units == entries[i].units.as_slice() => {
                d.weight += 1.0;
                d.entries.push(i);
            }
            _ => distinct.push(Distinct { units: &entries[i].units, weight: 1.0, entries: vec![i] }),
        }
    }
    if cfg.scan_order == ScanOrder::Frequency {
        // Stable, so equal weights keep canonical order.
        distinct.sort_by(|x, y| y.weight.total_cmp(&x.weight));
    }

    let b = cfg.norm_b;
    let dist = |x: &[Unit], y: &[Unit]| normalized_unchecked(x, y, b);
    let separation = cfg.separation();

    let mut centroids: Vec<Vec<Unit>> = Vec::new();
    let mut prev_count: Option<usize> = None;
    let mut round = 0;
    loop {
        round += 1;

        // Scan: promote far-away sequences to centroids.
        let carried = centroids.len();
        if centroids.is_empty() {
            centroids.push(distinct[0].units.to_vec());
        }
        for d in &distinct {
            if centroids.iter().all(|c| dist(c, d.units) > separation) {
                centroids.push(d.units.to_vec());
            }
        }
        let created: Vec<usize> = (carried..centroids.len()).collect();

        // Assign within the radius, nearest first, ties to the lower index.
        let assignment: Vec<Option<usize>> = distinct
            .par_iter()
            .map(|d| {
                let mut best: Option<(usize, f64)> = None;
                for (ci, c) in centroids.iter().enumerate() {
                    let dc = dist(c, d.units);
                    if dc < cfg.radius_t && best.is_none_or(|(_, bd)| dc < bd) {
                        best = Some((ci, dc));
                    }
                }
                best.map(|(ci, _)| ci)
            })
            .collect();

        let mut groups: Vec<Vec<usize>> = vec![Vec::new(); centroids.len()];
        for (di, a) in assignment.iter().enumerate() {
            if let Some(ci) = a {
                groups[*ci].push(di);
            }
        }

        // Medoid update, ties to the earlier sequence in scan order.
        let medoids: Vec<(usize, usize, f64)> = groups
            .par_iter()
            .enumerate()
            .filter(|(_, g)| !g.is_empty())
            .map(|(ci, g)| {
                let mut best = (g[0], f64::INFINITY);
                for &m in g {
                    let total: f64 =
                        g.iter().map(|&u| distinct[u].weight * dist(distinct[m].units, distinct[u].units)).sum();
                    if total < best.1 {
                        best = (m, total);
                    }
                }
                (ci, best.0, best.1)
            })
            .collect();

        let count = medoids.len();
        let converged = prev_count == Some(count);
        let done = converged || round >= max_rounds;

        let entry_assignment = {
            let mut v = vec![None; entries.len()];
            for (di, a) in assignment.iter().enumerate() {
                for &e in &distinct[di].entries {
                    v[e] = *a;
                }
            }
            v
        };
        observe(&RoundTrace {
            round,
            leaders: centroids.clone(),
            created,
            assignment: entry_assignment,
            medoids: medoids.iter().map(|&(ci, m, _)| (ci, distinct[m].units.to_vec())).collect(),
        });

        if done {
            let clusters = medoids
                .iter()
                .enumerate()
                .map(|(cluster_id, &(ci, m, total))| {
                    let mut members: Vec<usize> =
                        groups[ci].iter().flat_map(|&u| distinct[u].entries.iter().copied()).collect();
                    members.sort_unstable();
                    KeywordCluster {
                        cluster_id,
                        centroid: distinct[m].units.to_vec(),
                        leader: centroids[ci].clone(),
                        members,
                        total_intra_distance: total,
                    }
                })
                .collect();
            let mut unassigned: Vec<usize> = assignment
                .iter()
                .enumerate()
                .filter(|(_, a)| a.is_none())
                .flat_map(|(di, _)| distinct[di].entries.iter().copied())
                .collect();
            unassigned.sort_unstable();
            return Ok(ClusteringResult { clusters, unassigned, rounds_run: round });
        }

        centroids = medoids.iter().map(|&(_, m, _)| distinct[m].units.to_vec()).collect();
        prev_count = Some(count);
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ReportOrder {
    #[default]
    CentroidLength,
    Size,
}

impl FromStr for ReportOrder {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "centroid-length" | "length" => Ok(Self::CentroidLength),
            "size" => Ok(Self::Size),
            other => Err(Error::invalid_param(format!("unknown report order `{other}`"))),
        }
    }
}

impl fmt::Display for ReportOrder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::CentroidLength => "centroid-length",
            Self::Size => "size",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClusterSummary {
    pub cluster_id: usize,
    pub centroid_units: Vec<Unit>,
    pub centroid_length: usize,
    pub member_count: usize,
    pub total_intra_distance: f64,
}

/// The `top_n` clusters by centroid length or by size, descending; ties by
/// ascending cluster id.
pub fn cluster_report(result: &ClusteringResult, top_n: usize, order: ReportOrder) -> Vec<ClusterSummary> {
    let mut refs: Vec<&KeywordCluster> = result.clusters.iter().collect();
    refs.sort_by(|x, y| {
        let key = |c: &KeywordCluster| match order {
            ReportOrder::CentroidLength => c.centroid.len(),
            ReportOrder::Size => c.size(),
        };
        key(y).cmp(&key(x)).then(x.cluster_id.cmp(&y.cluster_id))
    });
    refs.into_iter()
        .take(top_n)
        .map(|c| ClusterSummary {
            cluster_id: c.cluster_id,
            centroid_units: c.centroid.clone(),
            centroid_length: c.centroid.len(),
            member_count: c.size(),
            total_intra_distance: c.total_intra_distance,
        })
        .collect()
}

/// Mean normalized distance between members and their centroid, per
/// cluster. Handy for reports.
pub fn mean_member_distance(bag: &SubsequenceBag, c: &KeywordCluster, b: f64) -> f64 {
    if c.members.is_empty() {
        return 0.0;
    }
    let mut cache: HashMap<&[Unit], f64> = HashMap::new();
    let total: f64 = c
        .members
        .iter()
        .map(|&m| {
            let u = bag.entries()[m].units.as_slice();
            *cache.entry(u).or_insert_with(|| normalized_unchecked(&c.centroid, u, b))
        })
        .sum();
    total / c.members.len() as f64
}
