//! On-disk formats of every pipeline artifact.
//!
//! | artifact | format |
//! |---|---|
//! | corpus manifest | JSON object `utt_id -> {features, duration_ms, frame_period_ms}` |
//! | frame features | CSV, one frame per row, no header |
//! | boundary hypotheses | JSON array of arrays of times in ms, one file per utterance |
//! | segment features | JSON lines `{utt_id, segment: [start, end], vector}` |
//! | codebook | JSON `{dimension, r, centroids}` |
//! | pseudo transcriptions | JSON lines `{utt_id, units, spans: [[start, end], ...]}` |
//! | dendrogram | JSON `{leaves, merges: [{a, b, height, size}]}` |
//! | bag | JSON lines, one entry per line |
//! | clusters | JSON `{rounds_run, unassigned, clusters: [{cluster_id, centroid_units, member_count, members, ...}]}` |

use std::collections::BTreeMap;
use std::fs::{self, File};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::alignment::{BagEntry, SubsequenceBag};
use crate::error::{Error, Result};
use crate::leader::{ClusteringResult, KeywordCluster};
use crate::segmentation::{BoundaryHypothesisSet, FrameMatrix};
use crate::Unit;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub features: PathBuf,
    pub duration_ms: f64,
    pub frame_period_ms: f64,
}

/// Corpus manifest, keyed by utterance id.
pub type CorpusManifest = BTreeMap<String, ManifestEntry>;

/// Loads a manifest; relative feature paths resolve against its directory.
pub fn read_manifest(path: &Path) -> Result<CorpusManifest> {
    let mut m: CorpusManifest = read_json(path, "corpus manifest")?;
    let base = path.parent().unwrap_or(Path::new("."));
    for e in m.values_mut() {
        if e.features.is_relative() {
            e.features = base.join(&e.features);
        }
    }
    Ok(m)
}

pub fn read_features_csv(path: &Path, utt_id: &str, frame_period_ms: f64) -> Result<FrameMatrix> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut rdr = csv::ReaderBuilder::new().has_headers(false).trim(csv::Trim::All).from_reader(file);
    let mut frames = Vec::new();
    for (row, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| malformed("feature CSV", path, e))?;
        let frame = rec
            .iter()
            .map(|f| f.parse::<f64>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|e| malformed("feature CSV", path, format!("row {}: {e}", row + 1)))?;
        frames.push(frame);
    }
    FrameMatrix::new(utt_id, frame_period_ms, frames)
}

pub fn write_features_csv(path: &Path, frames: &FrameMatrix) -> Result<()> {
    let mut w = create(path)?;
    for i in 0..frames.len() {
        let line: Vec<String> = frames.frame(i).iter().map(|x| x.to_string()).collect();
        writeln!(w, "{}", line.join(",")).map_err(|e| Error::io(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn read_boundaries(path: &Path, utt_id: &str) -> Result<BoundaryHypothesisSet> {
    let hypotheses: Vec<Vec<f64>> = read_json(path, "boundary hypotheses")?;
    let set = BoundaryHypothesisSet { utt_id: utt_id.to_owned(), hypotheses };
    set.validate()?;
    Ok(set)
}

pub fn read_json<T: DeserializeOwned>(path: &Path, what: &'static str) -> Result<T> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_slice(&bytes).map_err(|e| malformed(what, path, e))
}

pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    let mut w = create(path)?;
    serde_json::to_writer_pretty(&mut w, value)?;
    writeln!(w).map_err(|e| Error::io(path, e))?;
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn read_jsonl<T: DeserializeOwned>(path: &Path, what: &'static str) -> Result<Vec<T>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut out = Vec::new();
    for (n, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(serde_json::from_str(&line).map_err(|e| malformed(what, path, format!("line {}: {e}", n + 1)))?);
    }
    Ok(out)
}

pub fn write_jsonl<'a, T: Serialize + 'a>(path: &Path, items: impl IntoIterator<Item = &'a T>) -> Result<()> {
    let mut w = create(path)?;
    for item in items {
        serde_json::to_writer(&mut w, item)?;
        writeln!(w).map_err(|e| Error::io(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn read_bag(path: &Path) -> Result<SubsequenceBag> {
    let entries: Vec<BagEntry> = read_jsonl(path, "bag")?;
    let n = entries.len();
    let bag = SubsequenceBag::from_entries(entries);
    if bag.len() != n {
        return Err(malformed("bag", path, "duplicate entries"));
    }
    Ok(bag)
}

pub fn write_bag(path: &Path, bag: &SubsequenceBag) -> Result<()> {
    write_jsonl(path, bag.entries())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterRecord {
    pub cluster_id: usize,
    pub centroid_units: Vec<Unit>,
    pub member_count: usize,
    /// Line numbers (0-based) in the bag file.
    pub members: Vec<usize>,
    pub leader_units: Vec<Unit>,
    pub total_intra_distance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClustersFile {
    pub rounds_run: usize,
    pub unassigned: Vec<usize>,
    pub clusters: Vec<ClusterRecord>,
}

impl From<&ClusteringResult> for ClustersFile {
    fn from(r: &ClusteringResult) -> Self {
        Self {
            rounds_run: r.rounds_run,
            unassigned: r.unassigned.clone(),
            clusters: r
                .clusters
                .iter()
                .map(|c| ClusterRecord {
                    cluster_id: c.cluster_id,
                    centroid_units: c.centroid.clone(),
                    member_count: c.members.len(),
                    members: c.members.clone(),
                    leader_units: c.leader.clone(),
                    total_intra_distance: c.total_intra_distance,
                })
                .collect(),
        }
    }
}

impl From<ClustersFile> for ClusteringResult {
    fn from(f: ClustersFile) -> Self {
        Self {
            rounds_run: f.rounds_run,
            unassigned: f.unassigned,
            clusters: f
                .clusters
                .into_iter()
                .map(|c| KeywordCluster {
                    cluster_id: c.cluster_id,
                    centroid: c.centroid_units,
                    leader: c.leader_units,
                    members: c.members,
                    total_intra_distance: c.total_intra_distance,
                })
                .collect(),
        }
    }
}

pub fn write_clusters(path: &Path, r: &ClusteringResult) -> Result<()> {
    write_json(path, &ClustersFile::from(r))
}

pub fn read_clusters(path: &Path) -> Result<ClusteringResult> {
    let f: ClustersFile = read_json(path, "clusters")?;
    for c in &f.clusters {
        if c.member_count != c.members.len() {
            return Err(malformed("clusters", path, format!("cluster {} member count disagrees", c.cluster_id)));
        }
    }
    Ok(f.into())
}

/// Hex SHA-256 of a file's bytes.
pub fn sha256_file(path: &Path) -> Result<String> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

pub fn ensure_dir(path: &Path) -> Result<()> {
    fs::create_dir_all(path).map_err(|e| Error::io(path, e))
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        ensure_dir(parent)?;
    }
    File::create(path).map(BufWriter::new).map_err(|e| Error::io(path, e))
}

fn malformed(what: &'static str, path: &Path, msg: impl ToString) -> Error {
    Error::Malformed { what, path: path.to_path_buf(), msg: msg.to_string() }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::alignment::TokenSpan;

    #[test]
    fn features_round_trip_exactly() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("f.csv");
        let fm = FrameMatrix::new("u", 10.0, vec![vec![0.1, -2.5e-7], vec![1.0 / 3.0, 4.0]]).unwrap();
        write_features_csv(&p, &fm).unwrap();
        assert_eq!(read_features_csv(&p, "u", 10.0).unwrap(), fm);
    }

    #[test]
    fn malformed_and_missing_inputs() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("f.csv");
        fs::write(&p, "1,2\n3,x\n").unwrap();
        assert!(matches!(read_features_csv(&p, "u", 10.0), Err(Error::Malformed { .. })));
        fs::write(&p, "1,2\n3\n").unwrap();
        assert!(read_features_csv(&p, "u", 10.0).is_err());
        assert!(matches!(read_bag(&dir.path().join("none.jsonl")), Err(Error::MissingInput(_))));
        let b = dir.path().join("b.json");
        fs::write(&b, "[[10, 5]]").unwrap();
        assert!(read_boundaries(&b, "u").is_err());
    }

    #[test]
    fn manifest_paths_resolve_relative_to_manifest() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("manifest.json");
        fs::write(&p, r#"{"u1": {"features": "features/u1.csv", "duration_ms": 100, "frame_period_ms": 10}}"#).unwrap();
        let m = read_manifest(&p).unwrap();
        assert_eq!(m["u1"].features, dir.path().join("features/u1.csv"));
    }

    #[test]
    fn bag_line_format() {
        let e = BagEntry {
            units: vec![1, 2, 3, 4],
            source_utt: "a".into(),
            source_span: TokenSpan::new(2, 6),
            pair_utt: "b".into(),
            pair_span: TokenSpan::new(0, 4),
            alignment_score: 4.0,
        };
        assert_eq!(
            serde_json::to_string(&e).unwrap(),
            r#"{"units":[1,2,3,4],"source_utt":"a","source_span":[2,6],"pair_utt":"b","pair_span":[0,4],"alignment_score":4.0}"#
        );
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("bag.jsonl");
        let bag = SubsequenceBag::from_entries([e]);
        write_bag(&p, &bag).unwrap();
        assert_eq!(read_bag(&p).unwrap(), bag);
    }
}
