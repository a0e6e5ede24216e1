//! Scoring discovered clusters against ground truth: cluster purity and
//! coverage of the most frequent reference word n-grams.

use std::collections::{BTreeSet, HashMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::alignment::{BagEntry, SubsequenceBag};
use crate::error::{Error, Result};
use crate::inventory::UnitSequence;
use crate::leader::ClusteringResult;
use crate::metrics::normalized_unchecked;
use crate::synth::GroundTruth;
use crate::Unit;

/// Built-in English function words.
pub const DEFAULT_STOPWORDS: &[&str] = &[
    "a", "about", "after", "all", "also", "am", "an", "and", "any", "are", "as", "at", "be", "because", "been",
    "before", "being", "between", "both", "but", "by", "can", "could", "did", "do", "does", "doing", "down", "during",
    "each", "few", "for", "from", "further", "had", "has", "have", "having", "he", "her", "here", "hers", "him", "his",
    "how", "i", "if", "in", "into", "is", "it", "its", "just", "may", "me", "might", "more", "most", "must", "my",
    "no", "nor", "not", "now", "of", "off", "on", "once", "only", "or", "other", "our", "ours", "out", "over", "own",
    "same", "she", "should", "so", "some", "such", "than", "that", "the", "their", "them", "then", "there", "these",
    "they", "this", "those", "through", "to", "too", "under", "until", "up", "very", "was", "we", "were", "what",
    "when", "where", "which", "while", "who", "whom", "why", "will", "with", "would", "you", "your",
];

pub const DEFAULT_TOP_UNIGRAMS: usize = 30;
pub const DEFAULT_TOP_BIGRAMS: usize = 20;
pub const DEFAULT_TOP_TRIGRAMS: usize = 10;

pub fn default_stopwords() -> HashSet<String> {
    DEFAULT_STOPWORDS.iter().map(|s| s.to_string()).collect()
}

/// Ground-truth label of a bag entry.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TruthLabel {
    Keyword(usize),
    Filler,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterPurity {
    pub cluster_id: usize,
    pub size: usize,
    pub dominant: TruthLabel,
    pub dominant_count: usize,
    pub purity: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PurityReport {
    pub clusters: Vec<ClusterPurity>,
    /// Size-weighted mean purity.
    pub weighted_purity: f64,
}

/// The keyword whose planted span overlaps the entry's source span the
/// most (ties to the lower keyword id), or filler.
pub fn member_label(entry: &BagEntry, truth: &GroundTruth) -> Result<TruthLabel> {
    let utt = truth.utterance(&entry.source_utt).ok_or_else(|| Error::UnknownUtterance(entry.source_utt.clone()))?;
    let mut best: Option<(usize, usize)> = None;
    for o in &utt.occurrences {
        let ov = o.span.overlap(&entry.source_span);
        if ov == 0 {
            continue;
        }
        let better = match best {
            None => true,
            Some((bk, bo)) => ov > bo || (ov == bo && o.keyword_id < bk),
        };
        if better {
            best = Some((o.keyword_id, ov));
        }
    }
    Ok(best.map_or(TruthLabel::Filler, |(k, _)| TruthLabel::Keyword(k)))
}

pub fn cluster_purity(result: &ClusteringResult, bag: &SubsequenceBag, truth: &GroundTruth) -> Result<PurityReport> {
    let utts: HashMap<&str, ()> = truth.utterances.iter().map(|u| (u.utt_id.as_str(), ())).collect();
    let mut clusters = Vec::with_capacity(result.clusters.len());
    let (mut dominant_total, mut size_total) = (0usize, 0usize);
    for c in &result.clusters {
        let mut counts: HashMap<TruthLabel, usize> = HashMap::new();
        for &m in &c.members {
            let e = bag.entries().get(m).ok_or_else(|| {
                Error::invalid_input(format!("cluster {} refers to missing bag entry {m}", c.cluster_id))
            })?;
            if !utts.contains_key(e.source_utt.as_str()) {
                return Err(Error::UnknownUtterance(e.source_utt.clone()));
            }
            *counts.entry(member_label(e, truth)?).or_default() += 1;
        }
        let Some((&dominant, &dominant_count)) = counts.iter().max_by(|a, b| a.1.cmp(b.1).then_with(|| b.0.cmp(a.0)))
        else {
            continue;
        };
        let size = c.members.len();
        dominant_total += dominant_count;
        size_total += size;
        clusters.push(ClusterPurity {
            cluster_id: c.cluster_id,
            size,
            dominant,
            dominant_count,
            purity: dominant_count as f64 / size as f64,
        });
    }
    let weighted_purity = if size_total == 0 { 0.0 } else { dominant_total as f64 / size_total as f64 };
    Ok(PurityReport { clusters, weighted_purity })
}

/// Whitespace tokenization with lowercase folding.
pub fn tokenize_transcript(text: &str) -> Vec<String> {
    text.split_whitespace().map(str::to_lowercase).collect()
}

/// Counts word n-grams, dropping those made only of stopwords, ranked by
/// count descending then lexicographically.
pub fn ngram_counts(tokens: &[String], n: usize, stopwords: &HashSet<String>) -> Result<Vec<(String, usize)>> {
    if !(1..=3).contains(&n) {
        return Err(Error::invalid_param(format!("n-gram order must be 1, 2 or 3, got {n}")));
    }
    let mut counts: HashMap<String, usize> = HashMap::new();
    for w in tokens.windows(n) {
        if w.iter().all(|t| stopwords.contains(t)) {
            continue;
        }
        *counts.entry(w.join(" ")).or_default() += 1;
    }
    let mut out: Vec<(String, usize)> = counts.into_iter().collect();
    out.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Ngram {
    pub n: usize,
    pub text: String,
    pub count: usize,
}

/// Top n-grams per order: `(top unigrams, top bigrams, top trigrams)`.
pub fn examined_ngrams(tokens: &[String], stopwords: &HashSet<String>, top: (usize, usize, usize)) -> Vec<Ngram> {
    let mut out = Vec::new();
    for (n, k) in [(3, top.2), (2, top.1), (1, top.0)] {
        let ranked = ngram_counts(tokens, n, stopwords).expect("orders 1..=3 are valid");
        out.extend(ranked.into_iter().take(k).map(|(text, count)| Ngram { n, text, count }));
    }
    out
}

/// Word label given to a discovered cluster.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClusterLabel {
    pub cluster_id: usize,
    pub words: Vec<String>,
}

impl ClusterLabel {
    pub fn new(cluster_id: usize, phrase: &str) -> Self {
        Self { cluster_id, words: tokenize_transcript(phrase) }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Uncovered,
    Mismatch,
    /// Differs from a cluster only by function words.
    PartialMatchCounted,
    Match,
}

impl Verdict {
    pub fn counts_as_match(self) -> bool {
        matches!(self, Verdict::Match | Verdict::PartialMatchCounted)
    }
}

/// Compares one cluster label with one n-gram. `None` when they share no
/// content word.
pub fn judge(label: &[String], ngram: &[String], function_words: &HashSet<String>) -> Option<Verdict> {
    if label == ngram {
        return Some(Verdict::Match);
    }
    let content =
        |ws: &[String]| -> BTreeSet<String> { ws.iter().filter(|w| !function_words.contains(*w)).cloned().collect() };
    let (lc, gc) = (content(label), content(ngram));
    let covers = |c: &BTreeSet<String>, ws: &[String]| c.iter().all(|w| ws.contains(w));
    if !gc.is_empty() && covers(&gc, label) && covers(&lc, ngram) {
        return Some(Verdict::PartialMatchCounted);
    }
    if lc.intersection(&gc).next().is_some() {
        return Some(Verdict::Mismatch);
    }
    None
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NgramVerdict {
    pub n: usize,
    pub ngram: String,
    pub count: usize,
    pub verdict: Verdict,
    /// Cluster that produced the verdict.
    pub cluster_id: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverageReport {
    pub ngrams: Vec<NgramVerdict>,
    pub matched: usize,
    pub examined: usize,
    pub matching_rate: f64,
}

/// Best verdict of every n-gram over all labelled clusters.
pub fn coverage_match(labels: &[ClusterLabel], ngrams: &[Ngram], function_words: &HashSet<String>) -> CoverageReport {
    let verdicts: Vec<NgramVerdict> = ngrams
        .iter()
        .map(|g| {
            let words = tokenize_transcript(&g.text);
            let mut best = (Verdict::Uncovered, None);
            for l in labels {
                if let Some(v) = judge(&l.words, &words, function_words) {
                    if v > best.0 {
                        best = (v, Some(l.cluster_id));
                    }
                }
            }
            NgramVerdict { n: g.n, ngram: g.text.clone(), count: g.count, verdict: best.0, cluster_id: best.1 }
        })
        .collect();
    let matched = verdicts.iter().filter(|v| v.verdict.counts_as_match()).count();
    let examined = verdicts.len();
    let matching_rate = if examined == 0 { 0.0 } else { matched as f64 / examined as f64 };
    CoverageReport { ngrams: verdicts, matched, examined, matching_rate }
}

/// Labels each non-filler cluster with the word of its dominant keyword.
pub fn labels_from_purity(report: &PurityReport, truth: &GroundTruth) -> Vec<ClusterLabel> {
    report
        .clusters
        .iter()
        .filter_map(|c| match c.dominant {
            TruthLabel::Keyword(k) => truth.keyword(k).map(|kw| ClusterLabel::new(c.cluster_id, &kw.word)),
            TruthLabel::Filler => None,
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KeywordRecovery {
    pub keyword_id: usize,
    /// Some cluster's centroid equals the planted sequence.
    pub exact: bool,
    /// Closest cluster centroid and its normalized distance.
    pub nearest_cluster: Option<usize>,
    pub nearest_distance: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecoveryReport {
    pub keywords: Vec<KeywordRecovery>,
    pub exact_recovered: usize,
}

/// Rewrites every keyword as it is spelled in `corpus`: the most frequent
/// unit sequence at its planted spans, ties to the smaller sequence. Used
/// when the corpus was re-derived from frames and units were renumbered;
/// token positions must line up with the truth.
pub fn realize_keywords(truth: &GroundTruth, corpus: &[UnitSequence]) -> Result<GroundTruth> {
    let by_id: HashMap<&str, &UnitSequence> = corpus.iter().map(|s| (s.utt_id.as_str(), s)).collect();
    let mut spellings: Vec<HashMap<&[Unit], usize>> = vec![HashMap::new(); truth.keywords.len()];
    for u in &truth.utterances {
        let seq = by_id.get(u.utt_id.as_str()).ok_or_else(|| Error::UnknownUtterance(u.utt_id.clone()))?;
        if seq.len() != u.tags.len() {
            return Err(Error::invalid_input(format!(
                "{}: {} tokens in the transcription, {} in the truth",
                u.utt_id,
                seq.len(),
                u.tags.len()
            )));
        }
        for o in &u.occurrences {
            let slot = truth
                .keywords
                .iter()
                .position(|k| k.keyword_id == o.keyword_id)
                .ok_or_else(|| Error::invalid_input(format!("unknown keyword {}", o.keyword_id)))?;
            *spellings[slot].entry(&seq.units[o.span.start..o.span.end]).or_default() += 1;
        }
    }
    let mut out = truth.clone();
    for (kw, counts) in out.keywords.iter_mut().zip(&spellings) {
        if let Some((units, _)) = counts.iter().max_by(|a, b| a.1.cmp(b.1).then_with(|| b.0.cmp(a.0))) {
            kw.units = units.to_vec();
        }
    }
    Ok(out)
}

pub fn keyword_recovery(result: &ClusteringResult, truth: &GroundTruth, norm_b: f64) -> RecoveryReport {
    let keywords: Vec<KeywordRecovery> = truth
        .keywords
        .iter()
        .map(|kw| {
            let nearest = result
                .clusters
                .iter()
                .map(|c| (c.cluster_id, normalized_unchecked(&c.centroid, &kw.units, norm_b)))
                .min_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));
            KeywordRecovery {
                keyword_id: kw.keyword_id,
                exact: result.clusters.iter().any(|c| c.centroid == kw.units),
                nearest_cluster: nearest.map(|n| n.0),
                nearest_distance: nearest.map(|n| n.1),
            }
        })
        .collect();
    let exact_recovered = keywords.iter().filter(|k| k.exact).count();
    RecoveryReport { keywords, exact_recovered }
}
