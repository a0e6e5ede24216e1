//! Inexact local alignment between pseudo transcriptions and the all-pairs
//! mining loop that collects matched subsequences into a bag.

use std::cmp::Ordering;
use std::collections::{BTreeSet, VecDeque};
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::inventory::UnitSequence;
use crate::Unit;

pub const DEFAULT_MIN_LENGTH: usize = 4;

/// Per-position alignment scores.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ScoringScheme {
    pub match_score: f64,
    pub mismatch_score: f64,
    /// Added for every gap move. Zero leaves gaps unpenalized.
    pub gap_score: f64,
}

impl Default for ScoringScheme {
    fn default() -> Self {
        Self { match_score: 1.0, mismatch_score: -1.0, gap_score: 0.0 }
    }
}

impl ScoringScheme {
    pub fn validate(&self) -> Result<()> {
        let finite = [self.match_score, self.mismatch_score, self.gap_score].iter().all(|x| x.is_finite());
        if !finite || !(self.match_score > 0.0) || !(self.mismatch_score < self.match_score) {
            return Err(Error::invalid_param(format!(
                "scoring needs match > 0 and mismatch < match, got match {} mismatch {} gap {}",
                self.match_score, self.mismatch_score, self.gap_score
            )));
        }
        Ok(())
    }

    fn pair(&self, a: Unit, b: Unit) -> f64 {
        if a == b {
            self.match_score
        } else {
            self.mismatch_score
        }
    }
}

/// Where tracebacks start.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TracebackMode {
    /// Local maxima of the last row only; alignments end at the end of `A`.
    #[default]
    LastRow,
    /// Local maxima anywhere in the matrix.
    Global,
}

impl FromStr for TracebackMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "last-row" | "last_row" => Ok(Self::LastRow),
            "global" => Ok(Self::Global),
            other => Err(Error::invalid_param(format!("unknown traceback mode `{other}`"))),
        }
    }
}

impl fmt::Display for TracebackMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::LastRow => "last-row",
            Self::Global => "global",
        })
    }
}

/// Half-open token index range. Serialized as a two-element array.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(from = "(usize, usize)", into = "(usize, usize)")]
pub struct TokenSpan {
    pub start: usize,
    pub end: usize,
}

impl TokenSpan {
    pub fn new(start: usize, end: usize) -> Self {
        Self { start, end }
    }

    pub fn len(&self) -> usize {
        self.end.saturating_sub(self.start)
    }

    pub fn is_empty(&self) -> bool {
        self.end <= self.start
    }

    pub fn overlap(&self, other: &TokenSpan) -> usize {
        self.end.min(other.end).saturating_sub(self.start.max(other.start))
    }
}

impl From<(usize, usize)> for TokenSpan {
    fn from((start, end): (usize, usize)) -> Self {
        Self { start, end }
    }
}

impl From<TokenSpan> for (usize, usize) {
    fn from(s: TokenSpan) -> Self {
        (s.start, s.end)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Move {
    Stop,
    Diag,
    Up,
    Left,
}

/// The `(n+1) x (m+1)` local alignment score matrix with the argmax move
/// of every cell. Row and column 0 are zero.
#[derive(Debug, Clone)]
pub struct AlignmentMatrix {
    cols: usize,
    values: Vec<f64>,
    moves: Vec<Move>,
}

impl AlignmentMatrix {
    /// Fills the matrix. Move ties prefer diagonal, then up, then left.
    pub fn fill(a: &[Unit], b: &[Unit], scoring: &ScoringScheme) -> Self {
        let (rows, cols) = (a.len() + 1, b.len() + 1);
        let mut values = vec![0.0; rows * cols];
        let mut moves = vec![Move::Stop; rows * cols];
        let g = scoring.gap_score;
        for i in 1..rows {
            for j in 1..cols {
                let diag = values[(i - 1) * cols + j - 1] + scoring.pair(a[i - 1], b[j - 1]);
                let up = values[(i - 1) * cols + j] + g;
                let left = values[i * cols + j - 1] + g;
                let (mut best, mut mv) = (diag, Move::Diag);
                if up > best {
                    (best, mv) = (up, Move::Up);
                }
                if left > best {
                    (best, mv) = (left, Move::Left);
                }
                if best <= 0.0 {
                    (best, mv) = (0.0, Move::Stop);
                }
                values[i * cols + j] = best;
                moves[i * cols + j] = mv;
            }
        }
        Self { cols, values, moves }
    }

    pub fn rows(&self) -> usize {
        self.values.len() / self.cols
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.cols + j]
    }

    pub fn last_row(&self) -> &[f64] {
        &self.values[(self.rows() - 1) * self.cols..]
    }

    pub fn last_row_max(&self) -> f64 {
        self.last_row().iter().copied().fold(0.0, f64::max)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(0.0, f64::max)
    }

    /// Traceback start cells for `mode`: the first cell (row-major) of each
    /// positive plateau that no neighbouring cell exceeds.
    pub fn traceback_starts(&self, mode: TracebackMode) -> Vec<(usize, usize)> {
        match mode {
            TracebackMode::LastRow => {
                let n = self.rows() - 1;
                row_plateau_maxima(self.last_row()).into_iter().map(|j| (n, j)).collect()
            }
            TracebackMode::Global => self.plateau_maxima(),
        }
    }

    fn plateau_maxima(&self) -> Vec<(usize, usize)> {
        let (rows, cols) = (self.rows(), self.cols);
        let mut seen = vec![false; rows * cols];
        let mut out = Vec::new();
        let mut queue = VecDeque::new();
        for start in 0..rows * cols {
            let v = self.values[start];
            if seen[start] || v <= 0.0 {
                continue;
            }
            seen[start] = true;
            queue.push_back(start);
            let mut is_max = true;
            while let Some(c) = queue.pop_front() {
                let (i, j) = (c / cols, c % cols);
                for di in -1isize..=1 {
                    for dj in -1isize..=1 {
                        let (ni, nj) = (i as isize + di, j as isize + dj);
                        if (di, dj) == (0, 0) || ni < 0 || nj < 0 || ni >= rows as isize || nj >= cols as isize {
                            continue;
                        }
                        let nc = ni as usize * cols + nj as usize;
                        let nv = self.values[nc];
                        if nv > v {
                            is_max = false;
                        } else if nv == v && !seen[nc] {
                            seen[nc] = true;
                            queue.push_back(nc);
                        }
                    }
                }
            }
            if is_max {
                out.push((start / cols, start % cols));
            }
        }
        out
    }

    /// Follows stored moves from `(i, j)` to the first zero cell. Returns
    /// the covered spans of `A` and `B`.
    pub fn traceback(&self, mut i: usize, mut j: usize) -> (TokenSpan, TokenSpan) {
        let (end_i, end_j) = (i, j);
        while self.get(i, j) > 0.0 {
            match self.moves[i * self.cols + j] {
                Move::Diag => {
                    i -= 1;
                    j -= 1;
                }
                Move::Up => i -= 1,
                Move::Left => j -= 1,
                Move::Stop => break,
            }
        }
        (TokenSpan::new(i, end_i), TokenSpan::new(j, end_j))
    }
}

fn row_plateau_maxima(row: &[f64]) -> Vec<usize> {
    let mut out = Vec::new();
    let mut l = 0;
    while l < row.len() {
        let v = row[l];
        let mut r = l;
        while r + 1 < row.len() && row[r + 1] == v {
            r += 1;
        }
        let left_ok = l == 0 || row[l - 1] < v;
        let right_ok = r + 1 == row.len() || row[r + 1] < v;
        if v > 0.0 && left_ok && right_ok {
            out.push(l);
        }
        l = r + 1;
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Alignment {
    pub a_span: TokenSpan,
    pub b_span: TokenSpan,
    pub score: f64,
}

/// Local alignment of `a` against `b`; one result per traceback start.
pub fn local_align(a: &[Unit], b: &[Unit], scoring: &ScoringScheme, mode: TracebackMode) -> Result<Vec<Alignment>> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::invalid_input("cannot align an empty sequence"));
    }
    scoring.validate()?;
    let p = AlignmentMatrix::fill(a, b, scoring);
    Ok(p.traceback_starts(mode)
        .into_iter()
        .map(|(i, j)| {
            let (a_span, b_span) = p.traceback(i, j);
            Alignment { a_span, b_span, score: p.get(i, j) }
        })
        .collect())
}

/// One matched subsequence together with where it came from.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BagEntry {
    pub units: Vec<Unit>,
    pub source_utt: String,
    pub source_span: TokenSpan,
    pub pair_utt: String,
    pub pair_span: TokenSpan,
    pub alignment_score: f64,
}

impl BagEntry {
    pub fn len(&self) -> usize {
        self.units.len()
    }

    pub fn is_empty(&self) -> bool {
        self.units.is_empty()
    }

    fn key(&self) -> (&[Unit], &str, TokenSpan, &str, TokenSpan) {
        (&self.units, &self.source_utt, self.source_span, &self.pair_utt, self.pair_span)
    }

    /// Compares provenance only: source then pair.
    pub fn cmp_provenance(&self, other: &Self) -> Ordering {
        (&self.source_utt, self.source_span, &self.pair_utt, self.pair_span).cmp(&(
            &other.source_utt,
            other.source_span,
            &other.pair_utt,
            other.pair_span,
        ))
    }
}

// Identity is the dedup tuple; the score is carried along.
impl PartialEq for BagEntry {
    fn eq(&self, other: &Self) -> bool {
        self.key() == other.key()
    }
}

impl Eq for BagEntry {}

impl PartialOrd for BagEntry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for BagEntry {
    fn cmp(&self, other: &Self) -> Ordering {
        self.key().cmp(&other.key())
    }
}

/// Set of bag entries, kept sorted by the dedup tuple.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SubsequenceBag {
    entries: Vec<BagEntry>,
}

impl SubsequenceBag {
    pub fn from_entries(entries: impl IntoIterator<Item = BagEntry>) -> Self {
        let set: BTreeSet<BagEntry> = entries.into_iter().collect();
        Self { entries: set.into_iter().collect() }
    }

    pub fn entries(&self) -> &[BagEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn into_entries(self) -> Vec<BagEntry> {
        self.entries
    }
}

/// Emits both sides of every alignment as bag entries, dropping sides
/// shorter than `min_length`.
pub fn extract_bag_entries(
    alignments: &[Alignment],
    a: &UnitSequence,
    b: &UnitSequence,
    min_length: usize,
) -> Vec<BagEntry> {
    let mut out = Vec::new();
    for al in alignments {
        for (src, src_span, pair, pair_span) in [(a, al.a_span, b, al.b_span), (b, al.b_span, a, al.a_span)] {
            if src_span.len() < min_length.max(1) {
                continue;
            }
            out.push(BagEntry {
                units: src.units[src_span.start..src_span.end].to_vec(),
                source_utt: src.utt_id.clone(),
                source_span: src_span,
                pair_utt: pair.utt_id.clone(),
                pair_span,
                alignment_score: al.score,
            });
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MiningStats {
    pub pairs_aligned: usize,
    pub raw_entries: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MiningParams {
    pub scoring: ScoringScheme,
    pub traceback: TracebackMode,
    pub min_length: usize,
    /// Worker threads; `None` uses the global pool.
    pub jobs: Option<usize>,
}

impl Default for MiningParams {
    fn default() -> Self {
        Self {
            scoring: ScoringScheme::default(),
            traceback: TracebackMode::default(),
            min_length: DEFAULT_MIN_LENGTH,
            jobs: None,
        }
    }
}

/// Aligns every unordered pair of utterances and collects the bag.
pub fn mine_pairs(corpus: &[UnitSequence], params: &MiningParams) -> Result<SubsequenceBag> {
    mine_pairs_with_stats(corpus, params).map(|(bag, _)| bag)
}

/// As [`mine_pairs`], also reporting how much work was done.
///
/// Each pair is aligned with the utterance whose id sorts first as `A`, so
/// the bag does not depend on corpus order. Empty utterances cannot match
/// anything and are skipped.
pub fn mine_pairs_with_stats(corpus: &[UnitSequence], params: &MiningParams) -> Result<(SubsequenceBag, MiningStats)> {
    if corpus.len() < 2 {
        return Err(Error::invalid_input(format!("mining needs at least 2 utterances, got {}", corpus.len())));
    }
    params.scoring.validate()?;
    if params.jobs == Some(0) {
        return Err(Error::invalid_param("jobs must be at least 1"));
    }
    let mut order: Vec<&UnitSequence> = corpus.iter().collect();
    order.sort_by(|x, y| x.utt_id.cmp(&y.utt_id));
    if let Some(w) = order.windows(2).find(|w| w[0].utt_id == w[1].utt_id) {
        return Err(Error::invalid_input(format!("duplicate utterance id `{}`", w[0].utt_id)));
    }
    order.retain(|s| !s.is_empty());
    let pairs: Vec<(usize, usize)> = (0..order.len()).flat_map(|i| (i + 1..order.len()).map(move |j| (i, j))).collect();

    let work = || -> Result<Vec<Vec<BagEntry>>> {
        pairs
            .par_iter()
            .map(|&(i, j)| {
                let (a, b) = (order[i], order[j]);
                let al = local_align(&a.units, &b.units, &params.scoring, params.traceback)?;
                Ok(extract_bag_entries(&al, a, b, params.min_length))
            })
            .collect()
    };
    let per_pair = match params.jobs {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::invalid_param(format!("cannot start {n} workers: {e}")))?
            .install(work)?,
        None => work()?,
    };
    let raw_entries = per_pair.iter().map(Vec::len).sum();
    let bag = SubsequenceBag::from_entries(per_pair.into_iter().flatten());
    Ok((bag, MiningStats { pairs_aligned: pairs.len(), raw_entries }))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn seq(id: &str, units: &[Unit]) -> UnitSequence {
        UnitSequence::from_units(id, units.to_vec())
    }

    fn unit_scores() -> ScoringScheme {
        ScoringScheme::default()
    }

    #[test]
    fn identical_sequences_align_fully() {
        let a = [3, 1, 4, 1, 5];
        for mode in [TracebackMode::LastRow, TracebackMode::Global] {
            let al = local_align(&a, &a, &unit_scores(), mode).unwrap();
            assert_eq!(al.len(), 1, "{mode}");
            assert_eq!(al[0].a_span, TokenSpan::new(0, 5));
            assert_eq!(al[0].b_span, TokenSpan::new(0, 5));
            assert_eq!(al[0].score, 5.0);
        }
    }

    #[test]
    fn shared_suffix_after_mismatch() {
        // Hand-filled 6x6 matrix: the last row is [0, 0, 1, 2, 3, 4].
        let p = AlignmentMatrix::fill(&[1, 2, 3, 4, 9], &[7, 2, 3, 4, 9], &unit_scores());
        assert_eq!(p.last_row(), &[0.0, 0.0, 1.0, 2.0, 3.0, 4.0]);
        let al = local_align(&[1, 2, 3, 4, 9], &[7, 2, 3, 4, 9], &unit_scores(), TracebackMode::LastRow).unwrap();
        assert_eq!(al, vec![Alignment { a_span: TokenSpan::new(1, 5), b_span: TokenSpan::new(1, 5), score: 4.0 }]);
    }

    #[test]
    fn disjoint_alphabets_give_nothing() {
        for mode in [TracebackMode::LastRow, TracebackMode::Global] {
            assert!(local_align(&[1, 2], &[3, 4], &unit_scores(), mode).unwrap().is_empty());
        }
        assert!(local_align(&[], &[3], &unit_scores(), TracebackMode::LastRow).is_err());
    }

    #[test]
    fn matrix_boundary_is_zero_and_non_negative() {
        let p = AlignmentMatrix::fill(&[1, 2, 1, 3, 1], &[2, 1, 1, 3], &ScoringScheme { gap_score: -1.0, ..unit_scores() });
        for i in 0..p.rows() {
            assert_eq!(p.get(i, 0), 0.0);
        }
        for j in 0..p.cols() {
            assert_eq!(p.get(0, j), 0.0);
        }
        assert!(p.values.iter().all(|&v| v >= 0.0));
    }

    #[test]
    fn last_row_plateau_takes_leftmost() {
        assert_eq!(row_plateau_maxima(&[0.0, 1.0, 1.0, 0.0, 2.0, 2.0]), vec![1, 4]);
        assert_eq!(row_plateau_maxima(&[0.0, 0.0]), Vec::<usize>::new());
        assert_eq!(row_plateau_maxima(&[0.0, 1.0, 2.0, 2.0, 1.0]), vec![2]);
    }

    #[test]
    fn global_mode_finds_interior_match() {
        // keyword 5 6 7 8 in the middle of both sequences
        let a = [1, 5, 6, 7, 8, 2, 3];
        let b = [9, 9, 5, 6, 7, 8, 4];
        let s = ScoringScheme { gap_score: -1.0, ..unit_scores() };
        let al = local_align(&a, &b, &s, TracebackMode::Global).unwrap();
        assert_eq!(al, vec![Alignment { a_span: TokenSpan::new(1, 5), b_span: TokenSpan::new(2, 6), score: 4.0 }]);
        // The last-row view is anchored at the end of `a` and sees nothing.
        assert!(local_align(&a, &b, &s, TracebackMode::LastRow).unwrap().iter().all(|x| x.a_span.end == a.len()));
    }

    #[test]
    fn bag_entries_keep_both_sides() {
        let (a, b) = (seq("a", &[1, 2, 3, 4]), seq("b", &[1, 9, 3, 4]));
        let al = [Alignment { a_span: TokenSpan::new(0, 4), b_span: TokenSpan::new(0, 4), score: 2.0 }];
        let e = extract_bag_entries(&al, &a, &b, 4);
        assert_eq!(e.len(), 2);
        assert_eq!(e[0].units, vec![1, 2, 3, 4]);
        assert_eq!((e[0].source_utt.as_str(), e[0].pair_utt.as_str()), ("a", "b"));
        assert_eq!(e[1].units, vec![1, 9, 3, 4]);
        assert_eq!((e[1].source_utt.as_str(), e[1].pair_utt.as_str()), ("b", "a"));
    }

    #[test]
    fn short_alignments_are_dropped() {
        let (a, b) = (seq("a", &[1, 2, 3]), seq("b", &[1, 2, 3]));
        let al = local_align(&a.units, &b.units, &unit_scores(), TracebackMode::LastRow).unwrap();
        assert!(extract_bag_entries(&al, &a, &b, 4).is_empty());
        let (a, b) = (seq("a", &[1, 2, 3, 4, 5]), seq("b", &[1, 2, 3, 4, 5]));
        let al = local_align(&a.units, &b.units, &unit_scores(), TracebackMode::LastRow).unwrap();
        let e = extract_bag_entries(&al, &a, &b, 4);
        assert_eq!(e.len(), 2);
        assert_eq!(e[0].units, e[1].units);
        assert_ne!(e[0], e[1]);
    }

    #[test]
    fn mining_counts_pairs_and_dedups() {
        let six = [1, 2, 3, 4, 5, 6];
        let bag = mine_pairs(&[seq("x", &six), seq("y", &six)], &MiningParams::default()).unwrap();
        assert_eq!(bag.len(), 2);
        let corpus = [seq("x", &six), seq("y", &six), seq("z", &[7, 7])];
        let (_, stats) = mine_pairs_with_stats(&corpus, &MiningParams::default()).unwrap();
        assert_eq!(stats.pairs_aligned, 3);
        assert!(mine_pairs(&corpus[..1], &MiningParams::default()).is_err());
        assert!(mine_pairs(&[seq("x", &six), seq("x", &six)], &MiningParams::default()).is_err());
    }

    #[test]
    fn mining_ignores_corpus_order_and_jobs() {
        let corpus = vec![
            seq("b", &[5, 1, 2, 3, 4, 9, 9]),
            seq("a", &[7, 1, 2, 3, 4, 8]),
            seq("c", &[1, 2, 3, 4, 6, 6, 1, 2, 3, 4]),
        ];
        for traceback in [TracebackMode::LastRow, TracebackMode::Global] {
            let p =
                MiningParams { traceback, scoring: ScoringScheme { gap_score: -1.0, ..unit_scores() }, ..Default::default() };
            let fwd = mine_pairs(&corpus, &p).unwrap();
            let mut rev = corpus.clone();
            rev.reverse();
            assert_eq!(fwd, mine_pairs(&rev, &p).unwrap());
            assert_eq!(fwd, mine_pairs(&corpus, &MiningParams { jobs: Some(3), ..p }).unwrap());
        }
    }

    #[test]
    fn traceback_mode_parses() {
        assert_eq!("last-row".parse::<TracebackMode>().unwrap(), TracebackMode::LastRow);
        assert_eq!("global".parse::<TracebackMode>().unwrap(), TracebackMode::Global);
        assert!("both".parse::<TracebackMode>().is_err());
        assert_eq!(serde_json::to_string(&TracebackMode::LastRow).unwrap(), "\"last-row\"");
    }

    mod props {
        use proptest::prelude::*;

        use super::*;

        fn units(max: usize) -> impl Strategy<Value = Vec<Unit>> {
            proptest::collection::vec(0u32..4, 1..=max)
        }

        proptest! {
            #[test]
            fn zero_gap_matrix_is_monotone(a in units(12), b in units(12)) {
                let p = AlignmentMatrix::fill(&a, &b, &ScoringScheme::default());
                for i in 0..p.rows() {
                    for j in 0..p.cols() {
                        if i + 1 < p.rows() { prop_assert!(p.get(i + 1, j) >= p.get(i, j)); }
                        if j + 1 < p.cols() { prop_assert!(p.get(i, j + 1) >= p.get(i, j)); }
                    }
                }
                prop_assert_eq!(p.last_row_max(), p.max());
            }

            #[test]
            fn entries_match_source_tokens(
                a in units(15),
                b in units(15),
                gap in prop_oneof![Just(0.0), Just(-1.0), Just(-0.5)],
                global in any::<bool>(),
            ) {
                let (sa, sb) = (UnitSequence::from_units("a", a), UnitSequence::from_units("b", b));
                let mode = if global { TracebackMode::Global } else { TracebackMode::LastRow };
                let s = ScoringScheme { gap_score: gap, ..ScoringScheme::default() };
                let al = local_align(&sa.units, &sb.units, &s, mode).unwrap();
                for e in extract_bag_entries(&al, &sa, &sb, 1) {
                    let src = if e.source_utt == "a" { &sa } else { &sb };
                    prop_assert_eq!(&e.units[..], &src.units[e.source_span.start..e.source_span.end]);
                }
            }

            #[test]
            fn distinct_identical_sequences_align_in_full(n in 1usize..20) {
                let a: Vec<Unit> = (0..n as Unit).collect();
                let al = local_align(&a, &a, &ScoringScheme::default(), TracebackMode::LastRow).unwrap();
                prop_assert_eq!(al.len(), 1);
                prop_assert_eq!(al[0].score, n as f64);
                prop_assert_eq!(al[0].a_span, TokenSpan::new(0, n));
                prop_assert_eq!(al[0].b_span, TokenSpan::new(0, n));
            }
        }
    }
}
