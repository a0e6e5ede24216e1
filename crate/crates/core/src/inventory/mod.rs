//! Subword unit inventory: segment clustering and pseudo transcription.

pub mod hac;
pub mod kmeans;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::segmentation::{Segment, SegmentFeature};
use crate::Unit;

pub use hac::{hac_ward, suggest_k, Dendrogram, Merge};
pub use kmeans::{kmeans, KMeansResult};

/// Relabeling is considered converged below this frame-label difference rate.
pub const CONVERGENCE_RATE: f64 = 0.001;

/// Learned unit inventory: unit `i` is represented by `centroids[i]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "CodebookFile", into = "CodebookFile")]
pub struct Codebook {
    dim: usize,
    centroids: Vec<Vec<f64>>,
}

impl Codebook {
    pub fn new(centroids: Vec<Vec<f64>>) -> Result<Self> {
        if centroids.len() < 2 {
            return Err(Error::invalid_input(format!("a codebook needs at least 2 units, got {}", centroids.len())));
        }
        let dim = centroids[0].len();
        if dim == 0 {
            return Err(Error::invalid_input("codebook centroids must be non-empty"));
        }
        for c in &centroids {
            if c.len() != dim {
                return Err(Error::DimensionMismatch { expected: dim, actual: c.len() });
            }
            if c.iter().any(|x| !x.is_finite()) {
                return Err(Error::invalid_input("codebook centroid has a non-finite coordinate"));
            }
        }
        for i in 0..centroids.len() {
            for j in i + 1..centroids.len() {
                if centroids[i] == centroids[j] {
                    return Err(Error::invalid_input(format!("codebook units {i} and {j} are identical")));
                }
            }
        }
        Ok(Self { dim, centroids })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of units.
    pub fn len(&self) -> usize {
        self.centroids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.centroids.is_empty()
    }

    pub fn centroids(&self) -> &[Vec<f64>] {
        &self.centroids
    }

    pub fn label(&self, vector: &[f64]) -> Result<Unit> {
        if vector.len() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, actual: vector.len() });
        }
        Ok(kmeans::nearest(vector, &self.centroids) as Unit)
    }
}

#[derive(Serialize, Deserialize)]
struct CodebookFile {
    dimension: usize,
    r: usize,
    centroids: Vec<Vec<f64>>,
}

impl TryFrom<CodebookFile> for Codebook {
    type Error = Error;

    fn try_from(f: CodebookFile) -> Result<Self> {
        if f.r != f.centroids.len() {
            return Err(Error::invalid_input(format!(
                "codebook declares r = {} but has {} rows",
                f.r,
                f.centroids.len()
            )));
        }
        let cb = Codebook::new(f.centroids)?;
        if cb.dim != f.dimension {
            return Err(Error::DimensionMismatch { expected: f.dimension, actual: cb.dim });
        }
        Ok(cb)
    }
}

impl From<Codebook> for CodebookFile {
    fn from(c: Codebook) -> Self {
        Self { dimension: c.dim, r: c.centroids.len(), centroids: c.centroids }
    }
}

/// Pseudo transcription of one utterance.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct UnitSequence {
    pub utt_id: String,
    pub units: Vec<Unit>,
    /// Frame span of each token.
    pub spans: Vec<Segment>,
}

impl UnitSequence {
    /// A sequence whose token `i` nominally covers frame `i`.
    pub fn from_units(utt_id: impl Into<String>, units: Vec<Unit>) -> Self {
        let spans = (0..units.len()).map(|i| Segment::new(i, i + 1)).collect();
        Self { utt_id: utt_id.into(), units, spans }
    }

    pub fn len(&self) -> usize {
        self.units.len()
    }

    pub fn is_empty(&self) -> bool {
        self.units.is_empty()
    }

    pub fn validate(&self) -> Result<()> {
        if self.units.len() != self.spans.len() {
            return Err(Error::invalid_input(format!(
                "`{}` has {} units but {} spans",
                self.utt_id,
                self.units.len(),
                self.spans.len()
            )));
        }
        let ordered = self.spans.iter().all(|s| !s.is_empty())
            && self.spans.windows(2).all(|w| w[0].end_frame <= w[1].start_frame);
        if !ordered {
            return Err(Error::invalid_input(format!("`{}` spans are not ordered and disjoint", self.utt_id)));
        }
        Ok(())
    }

    /// Frame-level labels. Spans must tile `[0, last end)` without gaps.
    pub fn to_frame_labels(&self) -> Result<Vec<Unit>> {
        self.validate()?;
        let mut out = Vec::with_capacity(self.spans.last().map_or(0, |s| s.end_frame));
        for (&u, s) in self.units.iter().zip(&self.spans) {
            if s.start_frame != out.len() {
                return Err(Error::invalid_input(format!(
                    "`{}` spans leave frames uncovered at {}",
                    self.utt_id,
                    out.len()
                )));
            }
            out.extend(std::iter::repeat_n(u, s.len()));
        }
        Ok(out)
    }
}

/// Labels each segment with its nearest codebook unit, in segment order.
pub fn transcribe(codebook: &Codebook, segments: &[SegmentFeature]) -> Result<UnitSequence> {
    let utt_id = match segments.first() {
        Some(s) => s.utt_id.clone(),
        None => return Err(Error::invalid_input("cannot transcribe an utterance without segments")),
    };
    let mut units = Vec::with_capacity(segments.len());
    let mut spans = Vec::with_capacity(segments.len());
    for s in segments {
        if s.utt_id != utt_id {
            return Err(Error::invalid_input(format!("segments from `{}` mixed into `{utt_id}`", s.utt_id)));
        }
        units.push(codebook.label(&s.vector)?);
        spans.push(s.segment);
    }
    let seq = UnitSequence { utt_id, units, spans };
    seq.validate()?;
    Ok(seq)
}

/// Fraction of frame positions whose labels differ.
pub fn label_diff_rate(a: &[Unit], b: &[Unit]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::invalid_input(format!("label sequences differ in length: {} vs {}", a.len(), b.len())));
    }
    if a.is_empty() {
        return Ok(0.0);
    }
    let diff = a.iter().zip(b).filter(|(x, y)| x != y).count();
    Ok(diff as f64 / a.len() as f64)
}

pub fn has_converged(rate: f64) -> bool {
    rate < CONVERGENCE_RATE
}
