//! Synthetic corpora with planted keywords and known ground truth.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::alignment::TokenSpan;
use crate::error::{Error, Result};
use crate::inventory::UnitSequence;
use crate::metrics::levenshtein;
use crate::segmentation::{BoundaryHypothesisSet, FrameMatrix};
use crate::Unit;

/// Words used for the filler stretches of the synthetic word transcript.
const FILLER_WORDS: &[&str] = &["the", "a", "of", "is", "and", "to", "in"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SynthConfig {
    pub alphabet_size: usize,
    pub num_keywords: usize,
    /// Inclusive range of keyword lengths in tokens.
    pub keyword_length: (usize, usize),
    pub num_utterances: usize,
    /// Inclusive range of noise-free utterance lengths in tokens.
    pub utterance_length: (usize, usize),
    /// Inclusive range of keyword occurrences per utterance.
    pub keywords_per_utterance: (usize, usize),
    /// Each keyword is planted in at least this many distinct utterances.
    pub min_occurrences_per_keyword: usize,
    pub substitution_rate: f64,
    pub insertion_rate: f64,
    pub deletion_rate: f64,
    /// Also apply noise to filler tokens.
    pub noise_filler: bool,
    /// Redraw keywords until every pair is maximally distinct: edit
    /// distance equal to the longer length. Keywords that share aligned
    /// units can fall within the clustering separation of each other.
    pub separate_keywords: bool,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            alphabet_size: 55,
            num_keywords: 5,
            keyword_length: (8, 8),
            num_utterances: 20,
            utterance_length: (30, 50),
            keywords_per_utterance: (1, 2),
            min_occurrences_per_keyword: 3,
            substitution_rate: 0.0,
            insertion_rate: 0.0,
            deletion_rate: 0.0,
            noise_filler: false,
            separate_keywords: true,
            seed: 0,
        }
    }
}

impl SynthConfig {
    pub fn validate(&self) -> Result<()> {
        let p = [self.substitution_rate, self.insertion_rate, self.deletion_rate];
        if p.iter().any(|x| !(0.0..=1.0).contains(x)) || p.iter().sum::<f64>() > 1.0 + 1e-12 {
            return Err(Error::invalid_param("noise rates must lie in [0, 1] and sum to at most 1"));
        }
        if self.alphabet_size < 2 {
            return Err(Error::invalid_param("alphabet size must be at least 2"));
        }
        for (name, (lo, hi)) in [
            ("keyword length", self.keyword_length),
            ("utterance length", self.utterance_length),
            ("keywords per utterance", self.keywords_per_utterance),
        ] {
            if lo > hi {
                return Err(Error::invalid_param(format!("{name} range is empty: {lo}..={hi}")));
            }
        }
        if self.keyword_length.0 == 0 || self.num_keywords == 0 || self.num_utterances == 0 {
            return Err(Error::invalid_param("need at least one keyword, one utterance and non-empty keywords"));
        }
        if self.keyword_length.1 * self.keywords_per_utterance.1 > self.utterance_length.0 {
            return Err(Error::invalid_param(format!(
                "infeasible packing: up to {} keywords of length {} do not fit in {} tokens",
                self.keywords_per_utterance.1, self.keyword_length.1, self.utterance_length.0
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Keyword {
    pub keyword_id: usize,
    pub word: String,
    pub units: Vec<Unit>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Occurrence {
    pub keyword_id: usize,
    pub span: TokenSpan,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct UtteranceTruth {
    pub utt_id: String,
    pub occurrences: Vec<Occurrence>,
    /// Keyword id of every token, `None` for filler.
    pub tags: Vec<Option<usize>>,
    /// Word-level transcript: one word per keyword occurrence, one filler
    /// word per filler stretch.
    pub words: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub keywords: Vec<Keyword>,
    pub utterances: Vec<UtteranceTruth>,
}

impl GroundTruth {
    pub fn utterance(&self, utt_id: &str) -> Option<&UtteranceTruth> {
        self.utterances.iter().find(|u| u.utt_id == utt_id)
    }

    pub fn keyword(&self, id: usize) -> Option<&Keyword> {
        self.keywords.iter().find(|k| k.keyword_id == id)
    }
}

pub fn utt_name(i: usize) -> String {
    format!("utt{i:04}")
}

pub fn keyword_word(id: usize) -> String {
    format!("kw{id:02}")
}

pub fn generate_corpus(cfg: &SynthConfig) -> Result<(Vec<UnitSequence>, GroundTruth)> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let alphabet = cfg.alphabet_size as Unit;

    let mut keywords: Vec<Keyword> = Vec::with_capacity(cfg.num_keywords);
    let mut attempts = 0;
    while keywords.len() < cfg.num_keywords {
        attempts += 1;
        if attempts > 1000 * cfg.num_keywords {
            return Err(Error::invalid_param("cannot draw enough distinct keywords from this alphabet"));
        }
        let len = rng.random_range(cfg.keyword_length.0..=cfg.keyword_length.1);
        let units: Vec<Unit> = (0..len).map(|_| rng.random_range(0..alphabet)).collect();
        let fits = |k: &Keyword| {
            if cfg.separate_keywords {
                levenshtein(&k.units, &units) == k.units.len().max(units.len())
            } else {
                k.units != units
            }
        };
        if keywords.iter().all(fits) {
            let keyword_id = keywords.len();
            keywords.push(Keyword { keyword_id, word: keyword_word(keyword_id), units });
        }
    }

    // Keyword slots per utterance.
    let counts: Vec<usize> = (0..cfg.num_utterances)
        .map(|_| rng.random_range(cfg.keywords_per_utterance.0..=cfg.keywords_per_utterance.1))
        .collect();
    let mut plan: Vec<Vec<usize>> = vec![Vec::new(); cfg.num_utterances];
    for k in 0..cfg.num_keywords {
        for _ in 0..cfg.min_occurrences_per_keyword {
            let free: Vec<usize> =
                (0..cfg.num_utterances).filter(|&u| plan[u].len() < counts[u] && !plan[u].contains(&k)).collect();
            let Some(&u) = free.get(rng.random_range(0..free.len().max(1))) else {
                return Err(Error::invalid_param(format!(
                    "infeasible packing: keyword {k} cannot reach {} occurrences",
                    cfg.min_occurrences_per_keyword
                )));
            };
            plan[u].push(k);
        }
    }
    for (u, slots) in plan.iter_mut().enumerate() {
        while slots.len() < counts[u] {
            slots.push(rng.random_range(0..cfg.num_keywords));
        }
        slots.shuffle(&mut rng);
    }

    let mut corpus = Vec::with_capacity(cfg.num_utterances);
    let mut truth = Vec::with_capacity(cfg.num_utterances);
    for (u, slots) in plan.iter().enumerate() {
        let len = rng.random_range(cfg.utterance_length.0..=cfg.utterance_length.1);
        let planted: usize = slots.iter().map(|&k| keywords[k].units.len()).sum();
        let filler = len - planted;
        let mut cuts: Vec<usize> = (0..slots.len()).map(|_| rng.random_range(0..=filler)).collect();
        cuts.sort_unstable();
        let mut gaps = Vec::with_capacity(slots.len() + 1);
        let mut last = 0;
        for &c in &cuts {
            gaps.push(c - last);
            last = c;
        }
        gaps.push(filler - last);

        let mut b = UttBuilder::default();
        for (g, &gap) in gaps.iter().enumerate() {
            if gap > 0 {
                b.words.push(FILLER_WORDS[rng.random_range(0..FILLER_WORDS.len())].to_owned());
            }
            for _ in 0..gap {
                let t = rng.random_range(0..alphabet);
                if cfg.noise_filler {
                    b.emit_noisy(t, None, cfg, &mut rng, false);
                } else {
                    b.push(t, None);
                }
            }
            if let Some(&k) = slots.get(g) {
                let start = b.units.len();
                let kw = &keywords[k];
                for (pos, &t) in kw.units.iter().enumerate() {
                    let protect_last = pos + 1 == kw.units.len() && b.units.len() == start;
                    b.emit_noisy(t, Some(k), cfg, &mut rng, protect_last);
                }
                b.occurrences.push(Occurrence { keyword_id: k, span: TokenSpan::new(start, b.units.len()) });
                b.words.push(kw.word.clone());
            }
        }
        let utt_id = utt_name(u);
        corpus.push(UnitSequence::from_units(utt_id.clone(), b.units));
        truth.push(UtteranceTruth { utt_id, occurrences: b.occurrences, tags: b.tags, words: b.words });
    }
    Ok((corpus, GroundTruth { keywords, utterances: truth }))
}

#[derive(Default)]
struct UttBuilder {
    units: Vec<Unit>,
    tags: Vec<Option<usize>>,
    occurrences: Vec<Occurrence>,
    words: Vec<String>,
}

impl UttBuilder {
    fn push(&mut self, t: Unit, tag: Option<usize>) {
        self.units.push(t);
        self.tags.push(tag);
    }

    /// Emits `t` through the substitution/insertion/deletion channel.
    /// `keep` forbids deletion so an occurrence never vanishes.
    fn emit_noisy(&mut self, t: Unit, tag: Option<usize>, cfg: &SynthConfig, rng: &mut ChaCha8Rng, keep: bool) {
        let alphabet = cfg.alphabet_size as Unit;
        let r: f64 = rng.random();
        let (ps, pi, pd) = (cfg.substitution_rate, cfg.insertion_rate, cfg.deletion_rate);
        if r < ps {
            let shift = rng.random_range(1..alphabet);
            self.push((t + shift) % alphabet, tag);
        } else if r < ps + pi {
            self.push(t, tag);
            self.push(rng.random_range(0..alphabet), tag);
        } else if r < ps + pi + pd && !keep {
            // deleted
        } else {
            self.push(t, tag);
        }
    }
}

/// Well-separated random means: minimum pairwise distance `min_sep`.
fn separated_means(k: usize, dim: usize, min_sep: f64, rng: &mut ChaCha8Rng) -> Result<Vec<Vec<f64>>> {
    let side = min_sep * k as f64;
    let mut means: Vec<Vec<f64>> = Vec::with_capacity(k);
    let mut attempts = 0;
    while means.len() < k {
        attempts += 1;
        if attempts > 10_000 * k {
            return Err(Error::Invariant("could not place separated blob means".into()));
        }
        let m: Vec<f64> = (0..dim).map(|_| rng.random_range(-side..side)).collect();
        if means.iter().all(|o| crate::inventory::hac::sq_dist(o, &m) >= min_sep * min_sep) {
            means.push(m);
        }
    }
    Ok(means)
}

/// `k` Gaussian blobs with standard deviation `spread`, emitted blob by
/// blob, with their true labels.
pub fn generate_features(
    k: usize,
    dim: usize,
    points_per_cluster: usize,
    spread: f64,
    seed: u64,
) -> Result<(Vec<Vec<f64>>, Vec<usize>)> {
    if k == 0 || dim == 0 || points_per_cluster == 0 {
        return Err(Error::invalid_param("k, dim and points per cluster must be positive"));
    }
    if !(spread > 0.0 && spread.is_finite()) {
        return Err(Error::invalid_param(format!("spread must be positive, got {spread}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let means = separated_means(k, dim, 10.0, &mut rng)?;
    let noise = Normal::new(0.0, spread).map_err(|e| Error::invalid_param(e.to_string()))?;
    let mut points = Vec::with_capacity(k * points_per_cluster);
    let mut labels = Vec::with_capacity(k * points_per_cluster);
    for (c, mean) in means.iter().enumerate() {
        for _ in 0..points_per_cluster {
            points.push(mean.iter().map(|m| m + noise.sample(&mut rng)).collect());
            labels.push(c);
        }
    }
    Ok((points, labels))
}

/// Frame-level rendering of a unit corpus for end-to-end runs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FeatureSynthConfig {
    pub dim: usize,
    pub frame_period_ms: f64,
    /// Inclusive range of frames per token.
    pub frames_per_token: (usize, usize),
    pub spread: f64,
    /// Number of boundary hypothesis lists per utterance.
    pub hypotheses: usize,
    /// Boundary jitter, uniform in `[-jitter_ms, jitter_ms]`, rounded to 1 ms.
    pub jitter_ms: f64,
    pub seed: u64,
}

impl Default for FeatureSynthConfig {
    fn default() -> Self {
        Self {
            dim: 8,
            frame_period_ms: 10.0,
            frames_per_token: (4, 7),
            spread: 0.5,
            hypotheses: 3,
            jitter_ms: 4.0,
            seed: 0,
        }
    }
}

/// Renders every token as a run of noisy frames around a per-unit mean and
/// emits jittered boundary hypotheses at the token edges.
pub fn render_features(
    corpus: &[UnitSequence],
    alphabet_size: usize,
    cfg: &FeatureSynthConfig,
) -> Result<Vec<(FrameMatrix, BoundaryHypothesisSet)>> {
    if cfg.dim == 0 || cfg.frames_per_token.0 == 0 || cfg.frames_per_token.0 > cfg.frames_per_token.1 {
        return Err(Error::invalid_param("feature rendering needs dim > 0 and a non-empty frames-per-token range"));
    }
    if !(cfg.spread > 0.0) || !(cfg.frame_period_ms > 0.0) || !(cfg.jitter_ms >= 0.0) {
        return Err(Error::invalid_param("spread and frame period must be positive, jitter non-negative"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let means = separated_means(alphabet_size, cfg.dim, 10.0, &mut rng)?;
    let noise = Normal::new(0.0, cfg.spread).map_err(|e| Error::invalid_param(e.to_string()))?;
    let mut out = Vec::with_capacity(corpus.len());
    for seq in corpus {
        let mut frames = Vec::new();
        let mut edges = Vec::new();
        for &u in &seq.units {
            let mean = means
                .get(u as usize)
                .ok_or_else(|| Error::invalid_input(format!("unit {u} outside alphabet of {alphabet_size}")))?;
            if !frames.is_empty() {
                edges.push(frames.len() as f64 * cfg.frame_period_ms);
            }
            for _ in 0..rng.random_range(cfg.frames_per_token.0..=cfg.frames_per_token.1) {
                frames.push(mean.iter().map(|m| m + noise.sample(&mut rng)).collect());
            }
        }
        let hypotheses = (0..cfg.hypotheses)
            .map(|_| {
                edges.iter().map(|e| (e + rng.random_range(-cfg.jitter_ms..=cfg.jitter_ms)).round().max(0.0)).collect()
            })
            .collect();
        let fm = FrameMatrix::new(seq.utt_id.clone(), cfg.frame_period_ms, frames)?;
        out.push((fm, BoundaryHypothesisSet { utt_id: seq.utt_id.clone(), hypotheses }));
    }
    Ok(out)
}
