//! Stage drivers. Each stage reads its inputs from the configured paths or
//! from earlier artifacts in the output directory, writes its artifacts
//! there, and records a `<stage>.manifest.json` with its parameters and the
//! SHA-256 of every file it read or wrote.

use std::collections::{BTreeMap, HashSet};
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::{json, Value};

use crate::alignment::{mine_pairs_with_stats, SubsequenceBag};
use crate::config::PipelineConfig;
use crate::error::{Error, Result};
use crate::evaluation::{
    cluster_purity, coverage_match, default_stopwords, examined_ngrams, keyword_recovery, labels_from_purity,
    realize_keywords, tokenize_transcript, ClusterLabel, CoverageReport,
};
use crate::inventory::{hac_ward, kmeans, suggest_k, transcribe, Codebook, UnitSequence};
use crate::io;
use crate::leader::{cluster_report, leader_cluster, ClusteringResult};
use crate::segmentation::{segment_utterance, BoundaryHypothesisSet, SegmentFeature};
use crate::synth::{generate_corpus, render_features, GroundTruth};

pub const SEGMENTS: &str = "segments.jsonl";
pub const MERGED_BOUNDARIES: &str = "boundaries.merged.json";
pub const DENDROGRAM: &str = "dendrogram.json";
pub const K_SUGGESTIONS: &str = "k_suggestions.json";
pub const CODEBOOK: &str = "codebook.json";
pub const TRANSCRIPTIONS: &str = "transcriptions.jsonl";
pub const BAG: &str = "bag.jsonl";
pub const CLUSTERS: &str = "clusters.json";
pub const CLUSTER_REPORT: &str = "cluster_report.json";
pub const PURITY: &str = "purity.json";
pub const COVERAGE: &str = "coverage.json";
pub const COVERAGE_CSV: &str = "coverage.csv";
pub const RECOVERY: &str = "recovery.json";
pub const CORPUS: &str = "corpus.jsonl";
pub const TRUTH: &str = "truth.json";
pub const FEATURE_MANIFEST: &str = "manifest.json";

/// Bookkeeping for one stage run.
struct StageRun<'a> {
    name: &'static str,
    out: &'a Path,
    inputs: BTreeMap<String, String>,
    outputs: Vec<PathBuf>,
}

impl<'a> StageRun<'a> {
    fn new(name: &'static str, cfg: &'a PipelineConfig) -> Result<Self> {
        cfg.validate()?;
        io::ensure_dir(&cfg.paths.output_dir)?;
        Ok(Self { name, out: &cfg.paths.output_dir, inputs: BTreeMap::new(), outputs: Vec::new() })
    }

    fn input(&mut self, path: &Path) -> Result<()> {
        let key = match path.strip_prefix(self.out) {
            Ok(rel) => rel.display().to_string(),
            Err(_) => path.file_name().map_or_else(|| path.display().to_string(), |n| n.to_string_lossy().into_owned()),
        };
        self.inputs.insert(key, io::sha256_file(path)?);
        Ok(())
    }

    fn path(&self, name: &str) -> PathBuf {
        self.out.join(name)
    }

    fn wrote(&mut self, name: impl Into<PathBuf>) {
        self.outputs.push(name.into());
    }

    fn finish(self, params: Value, extra: Value) -> Result<()> {
        let mut outputs = BTreeMap::new();
        for rel in &self.outputs {
            outputs.insert(rel.display().to_string(), io::sha256_file(&self.out.join(rel))?);
        }
        let doc = json!({
            "stage": self.name,
            "version": env!("CARGO_PKG_VERSION"),
            "params": params,
            "inputs": self.inputs,
            "outputs": outputs,
            "summary": extra,
        });
        io::write_json(&self.out.join(format!("{}.manifest.json", self.name)), &doc)
    }
}

fn params_of<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("settings serialize")
}

fn required<'p>(p: &'p Option<PathBuf>, key: &str) -> Result<&'p Path> {
    p.as_deref().ok_or_else(|| Error::invalid_param(format!("paths.{key} is not set")))
}

/// Merges boundaries and averages frames per segment, for every utterance
/// in the manifest. An utterance without a boundary file is one segment.
pub fn run_segment(cfg: &PipelineConfig) -> Result<Vec<SegmentFeature>> {
    let mut run = StageRun::new("segment", cfg)?;
    let manifest_path = required(&cfg.paths.manifest, "manifest")?;
    run.input(manifest_path)?;
    let manifest = io::read_manifest(manifest_path)?;
    if manifest.is_empty() {
        return Err(Error::invalid_input("corpus manifest lists no utterances"));
    }
    let mut merged = BTreeMap::new();
    let mut segments = Vec::new();
    for (utt, entry) in &manifest {
        let frames = io::read_features_csv(&entry.features, utt, entry.frame_period_ms)?;
        let expected = entry.duration_ms;
        if (frames.duration_ms() - expected).abs() > entry.frame_period_ms {
            return Err(Error::invalid_input(format!(
                "{utt}: manifest says {expected} ms but features cover {} ms",
                frames.duration_ms()
            )));
        }
        let hyps = match &cfg.paths.boundaries_dir {
            Some(dir) => {
                let p = dir.join(format!("{utt}.json"));
                if p.exists() {
                    run.input(&p)?;
                    io::read_boundaries(&p, utt)?
                } else {
                    log::warn!("{utt}: no boundary file, treating as one segment");
                    BoundaryHypothesisSet { utt_id: utt.clone(), hypotheses: Vec::new() }
                }
            }
            None => BoundaryHypothesisSet { utt_id: utt.clone(), hypotheses: Vec::new() },
        };
        let (b, feats) = segment_utterance(&frames, &hyps, cfg.segmentation.window_ms)?;
        merged.insert(utt.clone(), b);
        segments.extend(feats);
    }
    io::write_json(&run.path(MERGED_BOUNDARIES), &merged)?;
    run.wrote(MERGED_BOUNDARIES);
    io::write_jsonl(&run.path(SEGMENTS), &segments)?;
    run.wrote(SEGMENTS);
    run.finish(params_of(&cfg.segmentation), json!({"utterances": manifest.len(), "segments": segments.len()}))?;
    Ok(segments)
}

/// Ranks candidate inventory sizes with Ward clustering and trains the
/// k-means codebook on the segment features.
pub fn run_codebook(cfg: &PipelineConfig) -> Result<Codebook> {
    let mut run = StageRun::new("codebook", cfg)?;
    let seg_path = run.path(SEGMENTS);
    run.input(&seg_path)?;
    let segments: Vec<SegmentFeature> = io::read_jsonl(&seg_path, "segment features")?;
    let vectors: Vec<Vec<f64>> = segments.into_iter().map(|s| s.vector).collect();
    if vectors.len() < 2 {
        return Err(Error::invalid_input("codebook training needs at least 2 segments"));
    }
    let c = &cfg.codebook;
    let dendrogram = hac_ward(&vectors, c.hac_sample_cap, c.seed)?;
    let suggestions: Vec<Value> =
        suggest_k(&dendrogram, c.suggest_max_k).into_iter().map(|(k, gap)| json!({"k": k, "gap": gap})).collect();
    io::write_json(&run.path(DENDROGRAM), &dendrogram)?;
    run.wrote(DENDROGRAM);
    io::write_json(&run.path(K_SUGGESTIONS), &suggestions)?;
    run.wrote(K_SUGGESTIONS);
    let km = kmeans(&vectors, c.k, c.seed, c.max_iters)?;
    io::write_json(&run.path(CODEBOOK), &km.codebook)?;
    run.wrote(CODEBOOK);
    run.finish(
        params_of(c),
        json!({
            "segments": vectors.len(),
            "hac_leaves": dendrogram.leaves,
            "iterations": km.iterations,
            "objective": km.objective.last(),
        }),
    )?;
    Ok(km.codebook)
}

/// Labels every segment with its nearest codebook unit.
pub fn run_transcribe(cfg: &PipelineConfig) -> Result<Vec<UnitSequence>> {
    let mut run = StageRun::new("transcribe", cfg)?;
    let (cb_path, seg_path) = (run.path(CODEBOOK), run.path(SEGMENTS));
    run.input(&cb_path)?;
    run.input(&seg_path)?;
    let codebook: Codebook = io::read_json(&cb_path, "codebook")?;
    let segments: Vec<SegmentFeature> = io::read_jsonl(&seg_path, "segment features")?;
    let mut by_utt: BTreeMap<String, Vec<SegmentFeature>> = BTreeMap::new();
    for s in segments {
        by_utt.entry(s.utt_id.clone()).or_default().push(s);
    }
    let corpus = by_utt
        .values_mut()
        .map(|segs| {
            segs.sort_by_key(|s| s.segment.start_frame);
            transcribe(&codebook, segs)
        })
        .collect::<Result<Vec<_>>>()?;
    io::write_jsonl(&run.path(TRANSCRIPTIONS), &corpus)?;
    run.wrote(TRANSCRIPTIONS);
    let tokens: usize = corpus.iter().map(UnitSequence::len).sum();
    run.finish(json!({}), json!({"utterances": corpus.len(), "tokens": tokens}))?;
    Ok(corpus)
}

/// Pseudo transcriptions for mining: `paths.transcriptions` if set,
/// otherwise the transcribe stage's output.
pub fn transcriptions_path(cfg: &PipelineConfig) -> PathBuf {
    cfg.paths.transcriptions.clone().unwrap_or_else(|| cfg.paths.output_dir.join(TRANSCRIPTIONS))
}

pub fn read_corpus(path: &Path) -> Result<Vec<UnitSequence>> {
    let corpus: Vec<UnitSequence> = io::read_jsonl(path, "pseudo transcriptions")?;
    for s in &corpus {
        s.validate()?;
    }
    Ok(corpus)
}

/// Aligns every pair of transcriptions and writes the subsequence bag.
pub fn run_mine(cfg: &PipelineConfig) -> Result<SubsequenceBag> {
    let mut run = StageRun::new("mine", cfg)?;
    let path = transcriptions_path(cfg);
    run.input(&path)?;
    let corpus = read_corpus(&path)?;
    let (bag, stats) = mine_pairs_with_stats(&corpus, &cfg.mining_params())?;
    io::write_bag(&run.path(BAG), &bag)?;
    run.wrote(BAG);
    run.finish(
        params_of(&cfg.mining),
        json!({
            "utterances": corpus.len(),
            "pairs_aligned": stats.pairs_aligned,
            "raw_entries": stats.raw_entries,
            "bag_entries": bag.len(),
        }),
    )?;
    Ok(bag)
}

/// Leader clustering of the bag, plus the top-N report.
pub fn run_cluster(cfg: &PipelineConfig) -> Result<ClusteringResult> {
    let mut run = StageRun::new("cluster", cfg)?;
    let bag_path = run.path(BAG);
    run.input(&bag_path)?;
    let bag = io::read_bag(&bag_path)?;
    let result = leader_cluster(&bag, &cfg.mining_config(), cfg.clustering.max_rounds)?;
    io::write_clusters(&run.path(CLUSTERS), &result)?;
    run.wrote(CLUSTERS);
    let report = cluster_report(&result, cfg.clustering.report_top_n, cfg.clustering.report_order);
    io::write_json(&run.path(CLUSTER_REPORT), &report)?;
    run.wrote(CLUSTER_REPORT);
    run.finish(
        json!({"clustering": params_of(&cfg.clustering), "min_length": cfg.mining.min_length}),
        json!({
            "bag_entries": bag.len(),
            "clusters": result.clusters.len(),
            "unassigned": result.unassigned.len(),
            "rounds_run": result.rounds_run,
        }),
    )?;
    Ok(result)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvaluationSummary {
    pub weighted_purity: Option<f64>,
    pub exact_recovered: Option<usize>,
    pub matching_rate: Option<f64>,
}

fn read_stopwords(cfg: &PipelineConfig, run: &mut StageRun) -> Result<HashSet<String>> {
    match &cfg.paths.stopwords {
        Some(p) => {
            run.input(p)?;
            let text = fs::read_to_string(p).map_err(|e| Error::io(p, e))?;
            Ok(text.lines().map(|l| l.trim().to_lowercase()).filter(|l| !l.is_empty()).collect())
        }
        None => Ok(default_stopwords()),
    }
}

fn read_labels(path: &Path) -> Result<Vec<ClusterLabel>> {
    let raw: BTreeMap<String, String> = io::read_json(path, "cluster labels")?;
    raw.into_iter()
        .map(|(k, v)| {
            let id = k.parse::<usize>().map_err(|_| Error::Malformed {
                what: "cluster labels",
                path: path.to_path_buf(),
                msg: format!("key `{k}` is not a cluster id"),
            })?;
            Ok(ClusterLabel::new(id, &v))
        })
        .collect()
}

/// Purity and keyword recovery against synthetic truth, and n-gram coverage
/// against a word transcript. Cluster labels come from `paths.cluster_labels`
/// or, failing that, from each cluster's dominant planted keyword.
pub fn run_evaluate(cfg: &PipelineConfig) -> Result<EvaluationSummary> {
    let mut run = StageRun::new("evaluate", cfg)?;
    let (bag_path, clusters_path) = (run.path(BAG), run.path(CLUSTERS));
    run.input(&bag_path)?;
    run.input(&clusters_path)?;
    let bag = io::read_bag(&bag_path)?;
    let result = io::read_clusters(&clusters_path)?;
    if let Some(bad) = result.clusters.iter().flat_map(|c| &c.members).find(|&&m| m >= bag.len()) {
        return Err(Error::invalid_input(format!("clusters refer to bag entry {bad}, bag has {}", bag.len())));
    }

    let truth: Option<GroundTruth> = match &cfg.paths.truth {
        Some(p) => {
            run.input(p)?;
            Some(io::read_json(p, "ground truth")?)
        }
        None => None,
    };
    let mut summary = EvaluationSummary { weighted_purity: None, exact_recovered: None, matching_rate: None };
    let mut derived_labels = None;
    if let Some(t) = &truth {
        let purity = cluster_purity(&result, &bag, t)?;
        io::write_json(&run.path(PURITY), &purity)?;
        run.wrote(PURITY);
        // Units re-derived from frames are numbered by the codebook, so
        // compare against the keywords as they were transcribed.
        let derived = run.path(TRANSCRIPTIONS);
        let spelled = if cfg.paths.transcriptions.is_none() && derived.exists() {
            run.input(&derived)?;
            match realize_keywords(t, &read_corpus(&derived)?) {
                Ok(r) => r,
                Err(e) => {
                    log::warn!("keyword recovery uses planted units: {e}");
                    t.clone()
                }
            }
        } else {
            t.clone()
        };
        let recovery = keyword_recovery(&result, &spelled, cfg.clustering.norm_b);
        io::write_json(&run.path(RECOVERY), &recovery)?;
        run.wrote(RECOVERY);
        summary.weighted_purity = Some(purity.weighted_purity);
        summary.exact_recovered = Some(recovery.exact_recovered);
        derived_labels = Some(labels_from_purity(&purity, t));
    }

    let labels = match &cfg.paths.cluster_labels {
        Some(p) => {
            run.input(p)?;
            Some(read_labels(p)?)
        }
        None => derived_labels,
    };
    let tokens = match (&cfg.paths.transcript, &truth) {
        (Some(p), _) => {
            run.input(p)?;
            Some(tokenize_transcript(&fs::read_to_string(p).map_err(|e| Error::io(p, e))?))
        }
        (None, Some(t)) => Some(t.utterances.iter().flat_map(|u| u.words.iter().cloned()).collect()),
        (None, None) => None,
    };
    match (labels, tokens) {
        (Some(labels), Some(tokens)) => {
            let stop = read_stopwords(cfg, &mut run)?;
            let e = &cfg.evaluation;
            let ngrams = examined_ngrams(&tokens, &stop, (e.top_unigrams, e.top_bigrams, e.top_trigrams));
            let coverage = coverage_match(&labels, &ngrams, &stop);
            io::write_json(&run.path(COVERAGE), &coverage)?;
            run.wrote(COVERAGE);
            write_coverage_csv(&run.path(COVERAGE_CSV), &coverage)?;
            run.wrote(COVERAGE_CSV);
            summary.matching_rate = Some(coverage.matching_rate);
        }
        _ if truth.is_none() => {
            return Err(Error::invalid_param(
                "evaluation needs paths.truth, or paths.cluster_labels together with paths.transcript",
            ))
        }
        _ => {}
    }
    run.finish(params_of(&cfg.evaluation), params_of(&summary))?;
    Ok(summary)
}

fn write_coverage_csv(path: &Path, report: &CoverageReport) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| Error::io(path, e.into()))?;
    let err = |e: csv::Error| Error::io(path, e.into());
    w.write_record(["n", "ngram", "count", "verdict", "cluster_id"]).map_err(err)?;
    for v in &report.ngrams {
        let verdict = serde_json::to_value(v.verdict)?;
        w.write_record([
            v.n.to_string(),
            v.ngram.clone(),
            v.count.to_string(),
            verdict.as_str().unwrap_or_default().to_owned(),
            v.cluster_id.map(|c| c.to_string()).unwrap_or_default(),
        ])
        .map_err(err)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Generates a synthetic corpus with planted keywords. With
/// `synth.render_features` it also writes frame features, boundary
/// hypotheses and a corpus manifest for the full pipeline.
pub fn run_synth(cfg: &PipelineConfig) -> Result<(Vec<UnitSequence>, GroundTruth)> {
    let mut run = StageRun::new("synth", cfg)?;
    let s = &cfg.synth;
    let (corpus, truth) = generate_corpus(&s.corpus)?;
    io::write_jsonl(&run.path(CORPUS), &corpus)?;
    run.wrote(CORPUS);
    io::write_json(&run.path(TRUTH), &truth)?;
    run.wrote(TRUTH);
    if s.render_features {
        let rendered = render_features(&corpus, s.corpus.alphabet_size, &s.features)?;
        let mut manifest = io::CorpusManifest::new();
        for (frames, hyps) in &rendered {
            let feat_rel = PathBuf::from("features").join(format!("{}.csv", frames.utt_id()));
            let bnd_rel = PathBuf::from("boundaries").join(format!("{}.json", frames.utt_id()));
            io::write_features_csv(&run.path(feat_rel.to_str().expect("utf-8 path")), frames)?;
            io::write_json(&run.out.join(&bnd_rel), &hyps.hypotheses)?;
            manifest.insert(
                frames.utt_id().to_owned(),
                io::ManifestEntry {
                    features: feat_rel.clone(),
                    duration_ms: frames.duration_ms(),
                    frame_period_ms: frames.frame_period_ms(),
                },
            );
            run.wrote(feat_rel);
            run.wrote(bnd_rel);
        }
        io::write_json(&run.path(FEATURE_MANIFEST), &manifest)?;
        run.wrote(FEATURE_MANIFEST);
    }
    run.finish(params_of(s), json!({"utterances": corpus.len(), "keywords": truth.keywords.len()}))?;
    Ok((corpus, truth))
}

/// Chains the stages. Starts from frame features when `paths.manifest` is
/// set, otherwise from `paths.transcriptions`, and evaluates when truth or
/// labels plus a transcript are available.
pub fn run_pipeline(cfg: &PipelineConfig) -> Result<Option<EvaluationSummary>> {
    let mut cfg = cfg.clone();
    if cfg.paths.manifest.is_some() {
        run_segment(&cfg)?;
        run_codebook(&cfg)?;
        run_transcribe(&cfg)?;
        cfg.paths.transcriptions = None;
    } else if cfg.paths.transcriptions.is_none() {
        return Err(Error::invalid_param("pipeline needs paths.manifest or paths.transcriptions"));
    }
    run_mine(&cfg)?;
    run_cluster(&cfg)?;
    let p = &cfg.paths;
    if p.truth.is_some() || (p.cluster_labels.is_some() && p.transcript.is_some()) {
        return run_evaluate(&cfg).map(Some);
    }
    Ok(None)
}
