//! Boundary-hypothesis merging and segment-level feature averaging.
//!
//! Several recognizers each propose a set of segment boundaries for an
//! utterance. The hypotheses are pooled, nearby boundaries are merged into a
//! single cut, and the frames between cuts are averaged into one feature
//! vector per segment.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_WINDOW_MS: f64 = 20.0;
pub const DEFAULT_FRAME_PERIOD_MS: f64 = 10.0;

/// Per-utterance sequence of equal-dimension feature frames.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameMatrix {
    utt_id: String,
    frame_period_ms: f64,
    dim: usize,
    data: Vec<f64>,
}

impl FrameMatrix {
    pub fn new(utt_id: impl Into<String>, frame_period_ms: f64, frames: Vec<Vec<f64>>) -> Result<Self> {
        let utt_id = utt_id.into();
        if !(frame_period_ms > 0.0) || !frame_period_ms.is_finite() {
            return Err(Error::invalid_param(format!("frame period must be positive, got {frame_period_ms}")));
        }
        let dim = frames.first().map(Vec::len).unwrap_or(0);
        if frames.is_empty() || dim == 0 {
            return Err(Error::invalid_input(format!("utterance `{utt_id}` has no frames")));
        }
        let mut data = Vec::with_capacity(frames.len() * dim);
        for (i, f) in frames.iter().enumerate() {
            if f.len() != dim {
                return Err(Error::invalid_input(format!(
                    "utterance `{utt_id}` frame {i} has dimension {}, expected {dim}",
                    f.len()
                )));
            }
            data.extend_from_slice(f);
        }
        Ok(Self { utt_id, frame_period_ms, dim, data })
    }

    pub fn utt_id(&self) -> &str {
        &self.utt_id
    }

    pub fn frame_period_ms(&self) -> f64 {
        self.frame_period_ms
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.data.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn frame(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn duration_ms(&self) -> f64 {
        self.len() as f64 * self.frame_period_ms
    }
}

/// Boundary hypotheses for one utterance, one list per recognizer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundaryHypothesisSet {
    pub utt_id: String,
    pub hypotheses: Vec<Vec<f64>>,
}

impl BoundaryHypothesisSet {
    pub fn validate(&self) -> Result<()> {
        for (h, list) in self.hypotheses.iter().enumerate() {
            for (k, &t) in list.iter().enumerate() {
                if !t.is_finite() || t < 0.0 {
                    return Err(Error::invalid_input(format!(
                        "utterance `{}` hypothesis {h}: boundary {t} is not a non-negative time",
                        self.utt_id
                    )));
                }
                if k > 0 && list[k - 1] >= t {
                    return Err(Error::invalid_input(format!(
                        "utterance `{}` hypothesis {h}: boundaries not strictly increasing",
                        self.utt_id
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Half-open frame range `[start_frame, end_frame)`. Serialized as a
/// two-element array.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(from = "(usize, usize)", into = "(usize, usize)")]
pub struct Segment {
    pub start_frame: usize,
    pub end_frame: usize,
}

impl Segment {
    pub fn new(start_frame: usize, end_frame: usize) -> Self {
        Self { start_frame, end_frame }
    }

    pub fn len(&self) -> usize {
        self.end_frame - self.start_frame
    }

    pub fn is_empty(&self) -> bool {
        self.end_frame <= self.start_frame
    }
}

impl From<(usize, usize)> for Segment {
    fn from((start_frame, end_frame): (usize, usize)) -> Self {
        Self { start_frame, end_frame }
    }
}

impl From<Segment> for (usize, usize) {
    fn from(s: Segment) -> Self {
        (s.start_frame, s.end_frame)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SegmentFeature {
    pub utt_id: String,
    pub segment: Segment,
    pub vector: Vec<f64>,
}

/// Pools every hypothesis and merges boundaries closer than `window_ms`.
pub fn merge_boundaries(hyps: &BoundaryHypothesisSet, window_ms: f64) -> Result<Vec<f64>> {
    check_window(window_ms)?;
    hyps.validate()?;
    let mut pooled: Vec<f64> = hyps.hypotheses.iter().flatten().copied().collect();
    if pooled.is_empty() {
        return Err(Error::NoBoundaries);
    }
    pooled.sort_by(f64::total_cmp);
    let mut out = Vec::new();
    merge_sorted_into(&pooled, window_ms, &mut out);
    Ok(out)
}

/// Greedy left-to-right chaining over an ascending list of times: a time
/// joins the current group when it is within `window_ms` of the previous
/// time. Each group is replaced by its arithmetic mean. `out` is cleared
/// first.
pub fn merge_sorted_into(sorted: &[f64], window_ms: f64, out: &mut Vec<f64>) {
    out.clear();
    let Some((&first, rest)) = sorted.split_first() else {
        return;
    };
    let (mut start, mut sum, mut count, mut prev) = (first, first, 1usize, first);
    for &t in rest {
        debug_assert!(t >= prev, "input must be sorted");
        if t - prev <= window_ms {
            sum += t;
            count += 1;
        } else {
            out.push(group_mean(start, prev, sum, count));
            (start, sum, count) = (t, t, 1);
        }
        prev = t;
    }
    out.push(group_mean(start, prev, sum, count));
}

// Clamped so rounding never pushes a mean outside its own group.
fn group_mean(first: f64, last: f64, sum: f64, count: usize) -> f64 {
    (sum / count as f64).clamp(first, last)
}

fn check_window(window_ms: f64) -> Result<()> {
    if window_ms > 0.0 && window_ms.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid_param(format!("merge window must be positive, got {window_ms}")))
    }
}

/// Snaps boundary times to frame indices (round half up) and tiles the
/// utterance. Cuts that collapse onto each other or onto the utterance
/// edges produce no empty segments.
pub fn segments_from_boundaries(boundaries: &[f64], frames: &FrameMatrix) -> Vec<Segment> {
    let n = frames.len();
    let mut cuts = Vec::with_capacity(boundaries.len() + 2);
    cuts.push(0);
    for &t in boundaries {
        let idx = (t / frames.frame_period_ms() + 0.5).floor();
        let idx = if idx.is_nan() || idx < 0.0 { 0 } else { (idx as usize).min(n) };
        cuts.push(idx);
    }
    cuts.push(n);
    cuts.sort_unstable();
    cuts.dedup();
    cuts.windows(2).map(|w| Segment::new(w[0], w[1])).collect()
}

/// Elementwise mean of the frames covered by `seg`.
pub fn segment_feature(frames: &FrameMatrix, seg: Segment) -> Result<SegmentFeature> {
    if seg.start_frame >= seg.end_frame || seg.end_frame > frames.len() {
        return Err(Error::invalid_input(format!(
            "segment [{}, {}) is not valid for `{}` with {} frames",
            seg.start_frame,
            seg.end_frame,
            frames.utt_id(),
            frames.len()
        )));
    }
    let mut vector = vec![0.0; frames.dim()];
    for i in seg.start_frame..seg.end_frame {
        for (acc, &x) in vector.iter_mut().zip(frames.frame(i)) {
            *acc += x;
        }
    }
    let n = seg.len() as f64;
    vector.iter_mut().for_each(|v| *v /= n);
    Ok(SegmentFeature { utt_id: frames.utt_id().to_owned(), segment: seg, vector })
}

/// Merges boundaries (an utterance without hypotheses is one segment) and
/// averages every resulting segment.
pub fn segment_utterance(
    frames: &FrameMatrix,
    hyps: &BoundaryHypothesisSet,
    window_ms: f64,
) -> Result<(Vec<f64>, Vec<SegmentFeature>)> {
    let merged = match merge_boundaries(hyps, window_ms) {
        Ok(b) => b,
        Err(Error::NoBoundaries) => Vec::new(),
        Err(e) => return Err(e),
    };
    let feats = segments_from_boundaries(&merged, frames)
        .into_iter()
        .map(|s| segment_feature(frames, s))
        .collect::<Result<Vec<_>>>()?;
    Ok((merged, feats))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn hyps(lists: &[&[f64]]) -> BoundaryHypothesisSet {
        BoundaryHypothesisSet { utt_id: "u".into(), hypotheses: lists.iter().map(|l| l.to_vec()).collect() }
    }

    fn frames(n: usize) -> FrameMatrix {
        FrameMatrix::new("u", 10.0, vec![vec![0.0]; n]).unwrap()
    }

    #[test]
    fn merge_examples() {
        assert_eq!(
            merge_boundaries(&hyps(&[&[100.0, 300.0], &[110.0, 500.0]]), 20.0).unwrap(),
            vec![105.0, 300.0, 500.0]
        );
        assert_eq!(merge_boundaries(&hyps(&[&[100.0]]), 20.0).unwrap(), vec![100.0]);
        assert_eq!(merge_boundaries(&hyps(&[&[100.0], &[115.0], &[130.0]]), 20.0).unwrap(), vec![115.0]);
    }

    #[test]
    fn merge_rejects_empty_and_bad_input() {
        assert!(matches!(merge_boundaries(&hyps(&[&[], &[]]), 20.0), Err(Error::NoBoundaries)));
        assert!(matches!(merge_boundaries(&hyps(&[]), 20.0), Err(Error::NoBoundaries)));
        assert!(merge_boundaries(&hyps(&[&[10.0]]), 0.0).is_err());
        assert!(merge_boundaries(&hyps(&[&[20.0, 10.0]]), 20.0).is_err());
        assert!(merge_boundaries(&hyps(&[&[-1.0]]), 20.0).is_err());
    }

    #[test]
    fn gap_exactly_window_chains() {
        assert_eq!(merge_boundaries(&hyps(&[&[0.0, 20.0]]), 20.0).unwrap(), vec![10.0]);
    }

    #[test]
    fn segment_examples() {
        assert_eq!(segments_from_boundaries(&[], &frames(50)), vec![Segment::new(0, 50)]);
        assert_eq!(segments_from_boundaries(&[105.0], &frames(50)), vec![Segment::new(0, 11), Segment::new(11, 50)]);
        assert_eq!(segments_from_boundaries(&[2.0, 4.0], &frames(1)), vec![Segment::new(0, 1)]);
    }

    #[test]
    fn boundaries_past_end_are_clamped() {
        assert_eq!(segments_from_boundaries(&[30.0, 9000.0], &frames(5)), vec![Segment::new(0, 3), Segment::new(3, 5)]);
    }

    #[test]
    fn feature_examples() {
        let f = FrameMatrix::new("u", 10.0, vec![vec![1.0, 2.0], vec![3.0, 4.0]]).unwrap();
        assert_eq!(segment_feature(&f, Segment::new(0, 2)).unwrap().vector, vec![2.0, 3.0]);
        let f = FrameMatrix::new("u", 10.0, vec![vec![5.0, 5.0]]).unwrap();
        assert_eq!(segment_feature(&f, Segment::new(0, 1)).unwrap().vector, vec![5.0, 5.0]);
        let f = FrameMatrix::new("u", 10.0, vec![vec![0.0, 0.0], vec![0.0, 6.0], vec![3.0, 0.0]]).unwrap();
        assert_eq!(segment_feature(&f, Segment::new(0, 3)).unwrap().vector, vec![1.0, 2.0]);
        assert!(segment_feature(&f, Segment::new(2, 4)).is_err());
        assert!(segment_feature(&f, Segment::new(1, 1)).is_err());
    }

    #[test]
    fn frame_matrix_rejects_ragged_rows() {
        assert!(FrameMatrix::new("u", 10.0, vec![vec![1.0], vec![1.0, 2.0]]).is_err());
        assert!(FrameMatrix::new("u", 10.0, vec![]).is_err());
        assert!(FrameMatrix::new("u", 0.0, vec![vec![1.0]]).is_err());
    }

    mod props {
        use proptest::prelude::*;

        use super::super::*;

        proptest! {
            #[test]
            fn tiling_covers_every_frame(
                n in 1usize..200,
                mut cuts in proptest::collection::vec(0.0f64..2500.0, 0..20),
            ) {
                cuts.sort_by(f64::total_cmp);
                cuts.dedup();
                let f = FrameMatrix::new("u", 10.0, vec![vec![1.0]; n]).unwrap();
                let segs = segments_from_boundaries(&cuts, &f);
                prop_assert_eq!(segs[0].start_frame, 0);
                prop_assert_eq!(segs.last().unwrap().end_frame, n);
                for w in segs.windows(2) {
                    prop_assert_eq!(w[0].end_frame, w[1].start_frame);
                }
                prop_assert!(segs.iter().all(|s| !s.is_empty()));
            }

            #[test]
            fn constant_segment_mean(v in -1e3f64..1e3, n in 1usize..30) {
                let f = FrameMatrix::new("u", 10.0, vec![vec![v, -v]; n]).unwrap();
                let feat = segment_feature(&f, Segment::new(0, n)).unwrap();
                prop_assert!((feat.vector[0] - v).abs() <= 1e-9 * v.abs().max(1.0));
                prop_assert!((feat.vector[1] + v).abs() <= 1e-9 * v.abs().max(1.0));
            }
        }
    }
}
