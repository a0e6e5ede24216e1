//! Unsupervised discovery of repeated spoken keywords from untranscribed
//! speech represented as discrete unit sequences.
//!
//! The pipeline runs in stages, each usable on its own:
//!
//! 1. [`segmentation`]: merge boundary hypotheses and average frame
//!    features per segment.
//! 2. [`inventory`]: size the unit inventory with Ward clustering, train a
//!    k-means codebook and turn segments into pseudo transcriptions.
//! 3. [`alignment`]: local alignment of every pair of transcriptions,
//!    collecting matched subsequences into a bag.
//! 4. [`leader`]: cluster the bag under a length-normalized edit distance
//!    ([`metrics`]) into keyword clusters.
//! 5. [`evaluation`]: purity and n-gram coverage against ground truth.
//!
//! [`synth`] generates corpora with planted keywords, and [`pipeline`]
//! drives the stages from a configuration file.

// Range checks are written `!(x > 0.0)` so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod alignment;
pub mod config;
pub mod error;
pub mod evaluation;
pub mod inventory;
pub mod io;
pub mod leader;
pub mod metrics;
pub mod pipeline;
pub mod segmentation;
pub mod synth;

/// Label of a discovered subword unit.
pub type Unit = u32;

pub use alignment::{
    extract_bag_entries, local_align, mine_pairs, AlignmentMatrix, BagEntry, MiningParams, ScoringScheme,
    SubsequenceBag, TokenSpan, TracebackMode,
};
pub use error::{Error, Result};
pub use inventory::{Codebook, UnitSequence};
pub use leader::{cluster_report, leader_cluster, ClusteringResult, KeywordCluster, ReportOrder};
pub use metrics::{levenshtein, normalized_levenshtein, MiningConfig};
