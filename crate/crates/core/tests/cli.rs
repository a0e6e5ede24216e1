use std::path::Path;
use std::process::{Command, Output};

fn termminer(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_termminer"))
        .args(args)
        .env_remove("TERMMINER_CONFIG")
        .output()
        .expect("spawn termminer")
}

fn ok(args: &[&str]) -> String {
    let out = termminer(args);
    assert!(out.status.success(), "{args:?} failed: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn synth_then_pipeline_recovers_keywords() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path();
    ok(&["synth", "--out", p(out), "--seed", "4", "--utterances", "40", "--keywords", "5"]);
    for f in ["corpus.jsonl", "truth.json", "synth.manifest.json"] {
        assert!(out.join(f).exists(), "{f} missing");
    }

    let corpus = out.join("corpus.jsonl");
    let truth = out.join("truth.json");
    let stdout = ok(&[
        "pipeline",
        "--out",
        p(out),
        "--transcriptions",
        p(&corpus),
        "--truth",
        p(&truth),
        "--gap",
        "-1",
        "--traceback",
        "global",
    ]);
    assert!(stdout.contains("weighted purity"), "{stdout}");
    assert!(stdout.contains("keywords recovered exactly: 5"), "{stdout}");
    for f in ["bag.jsonl", "clusters.json", "cluster_report.json", "purity.json", "recovery.json", "mine.manifest.json"]
    {
        assert!(out.join(f).exists(), "{f} missing");
    }

    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("mine.manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["stage"], "mine");
    assert_eq!(manifest["params"]["gap_score"], -1.0);
}

#[test]
fn stages_rerun_byte_identically() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for out in [&a, &b] {
        ok(&["synth", "--out", p(out), "--utterances", "12", "--keywords", "2"]);
        let corpus = out.join("corpus.jsonl");
        ok(&["mine", "--out", p(out), "--transcriptions", p(&corpus)]);
        ok(&["cluster", "--out", p(out)]);
    }
    for f in ["corpus.jsonl", "bag.jsonl", "clusters.json", "mine.manifest.json", "cluster.manifest.json"] {
        let x = std::fs::read(a.join(f)).unwrap();
        let y = std::fs::read(b.join(f)).unwrap();
        assert!(x == y, "{f} differs between runs");
    }
}

#[test]
fn config_layers_file_env_and_flags() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("tm.toml");
    std::fs::write(&file, "[clustering]\nradius_t = 2.0\nsep_a = 1.5\n[mining]\nmin_length = 6\n").unwrap();

    let out = Command::new(env!("CARGO_BIN_EXE_termminer"))
        .args(["config", "--config", p(&file), "--sep-a", "1.25"])
        .env("TERMMINER_MINING__MIN_LENGTH", "7")
        .output()
        .unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let v: toml::Value = toml::from_str(&text).unwrap();
    assert_eq!(v["clustering"]["radius_t"].as_float(), Some(2.0));
    assert_eq!(v["clustering"]["sep_a"].as_float(), Some(1.25));
    assert_eq!(v["mining"]["min_length"].as_integer(), Some(7));
}

#[test]
fn exit_codes_follow_error_class() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(termminer(&["--help"]).status.code(), Some(0));
    assert_eq!(termminer(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(termminer(&["config", "--radius-T", "-1"]).status.code(), Some(1));

    let missing = dir.path().join("absent.jsonl");
    let out = termminer(&["mine", "--out", p(dir.path()), "--transcriptions", p(&missing)]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("absent.jsonl"));

    let bad = dir.path().join("bad.toml");
    std::fs::write(&bad, "[mining]\nno_such_key = 1\n").unwrap();
    assert_eq!(termminer(&["config", "--config", p(&bad)]).status.code(), Some(1));
}

#[test]
fn feature_level_pipeline_runs_from_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("data");
    ok(&["synth", "--features", "--out", p(&data), "--utterances", "10", "--keywords", "2"]);
    let manifest = data.join("manifest.json");
    assert!(manifest.exists());

    let out = dir.path().join("run");
    ok(&[
        "pipeline",
        "--out",
        p(&out),
        "--manifest",
        p(&manifest),
        "--boundaries",
        p(&data.join("boundaries")),
        "-k",
        "8",
        "--gap",
        "-1",
        "--traceback",
        "global",
    ]);
    for f in ["segments.jsonl", "codebook.json", "k_suggestions.json", "transcriptions.jsonl", "clusters.json"] {
        assert!(out.join(f).exists(), "{f} missing");
    }
}
