use std::ffi::{CStr, CString};
use std::ptr;

use termminer::synth::{generate_corpus, SynthConfig};
use termminer::{leader_cluster, mine_pairs, MiningConfig, MiningParams, ScoringScheme, TracebackMode};
use termminer_ffi::*;

fn last_error() -> String {
    let p = tm_last_error_message();
    assert!(!p.is_null(), "expected an error message");
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

fn cstr(s: &str) -> CString {
    CString::new(s).unwrap()
}

#[test]
fn distances_match_core() {
    let x = [1u32, 2, 3, 4];
    let y = [1u32, 3, 4];
    let mut d = 0usize;
    let mut nd = 0f64;
    unsafe {
        assert_eq!(tm_levenshtein(x.as_ptr(), x.len(), y.as_ptr(), y.len(), &mut d), TmStatus::Ok);
        assert_eq!(tm_normalized_levenshtein(x.as_ptr(), 4, y.as_ptr(), 3, 4.0, &mut nd), TmStatus::Ok);
    }
    assert_eq!(d, 1);
    assert!((nd - 4.0 / 5.0).abs() < 1e-12);
    assert!(tm_last_error_message().is_null());
}

#[test]
fn empty_sequences_accept_null() {
    let mut d = 7usize;
    let y = [5u32, 6];
    unsafe {
        assert_eq!(tm_levenshtein(ptr::null(), 0, y.as_ptr(), 2, &mut d), TmStatus::Ok);
    }
    assert_eq!(d, 2);
}

#[test]
fn null_pointers_are_rejected() {
    let x = [1u32];
    unsafe {
        assert_eq!(tm_levenshtein(x.as_ptr(), 1, ptr::null(), 3, &mut 0), TmStatus::NullPointer);
        assert_eq!(tm_levenshtein(x.as_ptr(), 1, x.as_ptr(), 1, ptr::null_mut()), TmStatus::NullPointer);
        assert_eq!(tm_corpus_push(ptr::null_mut(), ptr::null(), ptr::null(), 0), TmStatus::NullPointer);
        assert_eq!(tm_corpus_len(ptr::null()), 0);
        tm_corpus_free(ptr::null_mut());
        tm_bag_free(ptr::null_mut());
        tm_clustering_free(ptr::null_mut());
    }
    assert!(last_error().contains("null"));
}

#[test]
fn normalized_distance_rejects_bad_scale() {
    let x = [1u32];
    let mut d = 0.0;
    let s = unsafe { tm_normalized_levenshtein(x.as_ptr(), 1, x.as_ptr(), 1, -1.0, &mut d) };
    assert_eq!(s, TmStatus::InvalidParameter);
    assert!(!last_error().is_empty());
    let s = unsafe { tm_normalized_levenshtein(ptr::null(), 0, ptr::null(), 0, 1.0, &mut d) };
    assert_eq!(s, TmStatus::InvalidInput);
}

#[test]
fn merge_boundaries_sizes_and_sorts() {
    let times = [30.0, 0.0, 10.0, 100.0, 55.0];
    let mut len = 0usize;
    let mut small = [0f64; 1];
    let s = unsafe { tm_merge_boundaries(times.as_ptr(), times.len(), 20.0, small.as_mut_ptr(), 1, &mut len) };
    assert_eq!(s, TmStatus::BufferTooSmall);
    assert_eq!(len, 3);
    assert_eq!(small[0], 0.0, "nothing written on overflow");

    let mut out = vec![0f64; len];
    let s = unsafe { tm_merge_boundaries(times.as_ptr(), times.len(), 20.0, out.as_mut_ptr(), out.len(), &mut len) };
    assert_eq!(s, TmStatus::Ok);
    // 0,10,30 chain within 20 ms; 55 and 100 stand alone.
    assert_eq!(out, vec![40.0 / 3.0, 55.0, 100.0]);

    let s = unsafe { tm_merge_boundaries(times.as_ptr(), times.len(), 0.0, out.as_mut_ptr(), out.len(), &mut len) };
    assert_eq!(s, TmStatus::InvalidParameter);
    let bad = [f64::NAN];
    let s = unsafe { tm_merge_boundaries(bad.as_ptr(), 1, 20.0, out.as_mut_ptr(), out.len(), &mut len) };
    assert_eq!(s, TmStatus::InvalidInput);
}

#[test]
fn end_to_end_matches_core_library() {
    let (corpus, _) = generate_corpus(&SynthConfig { num_utterances: 30, seed: 3, ..Default::default() }).unwrap();

    let handle = tm_corpus_new();
    for s in &corpus {
        let id = cstr(&s.utt_id);
        assert_eq!(unsafe { tm_corpus_push(handle, id.as_ptr(), s.units.as_ptr(), s.units.len()) }, TmStatus::Ok);
    }
    assert_eq!(unsafe { tm_corpus_len(handle) }, corpus.len());

    let mut mp = tm_mining_params_default();
    mp.gap_score = -1.0;
    mp.traceback = TM_TRACEBACK_GLOBAL;
    let mut bag = ptr::null_mut();
    assert_eq!(unsafe { tm_mine_pairs(handle, &mp, &mut bag) }, TmStatus::Ok);

    let params = MiningParams {
        scoring: ScoringScheme { gap_score: -1.0, ..Default::default() },
        traceback: TracebackMode::Global,
        ..Default::default()
    };
    let want_bag = mine_pairs(&corpus, &params).unwrap();
    assert_eq!(unsafe { tm_bag_len(bag) }, want_bag.len());
    for (i, e) in want_bag.entries().iter().enumerate() {
        let (mut p, mut n) = (ptr::null(), 0usize);
        assert_eq!(unsafe { tm_bag_entry_units(bag, i, &mut p, &mut n) }, TmStatus::Ok);
        assert_eq!(unsafe { std::slice::from_raw_parts(p, n) }, e.units.as_slice());
    }

    let cc = tm_cluster_config_default();
    let mut cl = ptr::null_mut();
    assert_eq!(unsafe { tm_leader_cluster(bag, &cc, &mut cl) }, TmStatus::Ok);
    let want = leader_cluster(&want_bag, &MiningConfig::default(), cc.max_rounds).unwrap();
    unsafe {
        assert_eq!(tm_clustering_len(cl), want.clusters.len());
        assert_eq!(tm_clustering_rounds(cl), want.rounds_run);
        assert_eq!(tm_clustering_unassigned_len(cl), want.unassigned.len());
        for (i, c) in want.clusters.iter().enumerate() {
            let (mut p, mut n) = (ptr::null(), 0usize);
            assert_eq!(tm_clustering_centroid(cl, i, &mut p, &mut n), TmStatus::Ok);
            assert_eq!(std::slice::from_raw_parts(p, n), c.centroid.as_slice());
            let (mut m, mut mn) = (ptr::null(), 0usize);
            assert_eq!(tm_clustering_members(cl, i, &mut m, &mut mn), TmStatus::Ok);
            assert_eq!(std::slice::from_raw_parts(m, mn), c.members.as_slice());
        }
        let (mut p, mut n) = (ptr::null(), 0usize);
        assert_eq!(tm_clustering_centroid(cl, want.clusters.len(), &mut p, &mut n), TmStatus::IndexOutOfRange);
        tm_clustering_free(cl);
        tm_bag_free(bag);
        tm_corpus_free(handle);
    }
}

#[test]
fn files_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let (corpus, _) = generate_corpus(&SynthConfig { num_utterances: 12, seed: 1, ..Default::default() }).unwrap();
    let corpus_path = dir.path().join("corpus.jsonl");
    termminer::io::write_jsonl(&corpus_path, &corpus).unwrap();

    let mut handle = ptr::null_mut();
    let p = cstr(corpus_path.to_str().unwrap());
    assert_eq!(unsafe { tm_corpus_load_jsonl(p.as_ptr(), &mut handle) }, TmStatus::Ok);
    assert_eq!(unsafe { tm_corpus_len(handle) }, corpus.len());

    let mp = tm_mining_params_default();
    let mut bag = ptr::null_mut();
    assert_eq!(unsafe { tm_mine_pairs(handle, &mp, &mut bag) }, TmStatus::Ok);
    let bag_path = cstr(dir.path().join("bag.jsonl").to_str().unwrap());
    assert_eq!(unsafe { tm_bag_write_jsonl(bag, bag_path.as_ptr()) }, TmStatus::Ok);
    let mut reloaded = ptr::null_mut();
    assert_eq!(unsafe { tm_bag_load_jsonl(bag_path.as_ptr(), &mut reloaded) }, TmStatus::Ok);
    assert_eq!(unsafe { tm_bag_len(reloaded) }, unsafe { tm_bag_len(bag) });

    let cc = tm_cluster_config_default();
    let mut cl = ptr::null_mut();
    assert_eq!(unsafe { tm_leader_cluster(reloaded, &cc, &mut cl) }, TmStatus::Ok);
    let out = dir.path().join("clusters.json");
    let out_c = cstr(out.to_str().unwrap());
    assert_eq!(unsafe { tm_clustering_write_json(cl, out_c.as_ptr()) }, TmStatus::Ok);
    let back = termminer::io::read_clusters(&out).unwrap();
    assert_eq!(back.clusters.len(), unsafe { tm_clustering_len(cl) });

    unsafe {
        tm_clustering_free(cl);
        tm_bag_free(reloaded);
        tm_bag_free(bag);
        tm_corpus_free(handle);
    }
}

#[test]
fn bad_inputs_map_to_status_codes() {
    let dir = tempfile::tempdir().unwrap();
    let mut handle = ptr::null_mut();
    let missing = cstr(dir.path().join("nope.jsonl").to_str().unwrap());
    assert_eq!(unsafe { tm_corpus_load_jsonl(missing.as_ptr(), &mut handle) }, TmStatus::Io);
    assert!(handle.is_null());

    let garbage = dir.path().join("bad.jsonl");
    std::fs::write(&garbage, "{not json\n").unwrap();
    let g = cstr(garbage.to_str().unwrap());
    assert_eq!(unsafe { tm_corpus_load_jsonl(g.as_ptr(), &mut handle) }, TmStatus::InvalidInput);

    let corpus = tm_corpus_new();
    let mut mp = tm_mining_params_default();
    let mut bag = ptr::null_mut();
    assert_eq!(unsafe { tm_mine_pairs(corpus, &mp, &mut bag) }, TmStatus::InvalidInput);
    let units = [1u32, 2, 3, 4, 5];
    for id in ["a", "b"] {
        let id = cstr(id);
        assert_eq!(unsafe { tm_corpus_push(corpus, id.as_ptr(), units.as_ptr(), units.len()) }, TmStatus::Ok);
    }
    mp.traceback = 9;
    assert_eq!(unsafe { tm_mine_pairs(corpus, &mp, &mut bag) }, TmStatus::InvalidParameter);
    assert!(last_error().contains("traceback"));
    mp.traceback = TM_TRACEBACK_LAST_ROW;
    mp.match_score = -1.0;
    assert_eq!(unsafe { tm_mine_pairs(corpus, &mp, &mut bag) }, TmStatus::InvalidParameter);

    mp = tm_mining_params_default();
    assert_eq!(unsafe { tm_mine_pairs(corpus, &mp, &mut bag) }, TmStatus::Ok);
    let mut cc = tm_cluster_config_default();
    cc.scan_order = 5;
    let mut cl = ptr::null_mut();
    assert_eq!(unsafe { tm_leader_cluster(bag, &cc, &mut cl) }, TmStatus::InvalidParameter);
    cc = tm_cluster_config_default();
    cc.sep_a = -1.0;
    assert_eq!(unsafe { tm_leader_cluster(bag, &cc, &mut cl) }, TmStatus::InvalidParameter);
    unsafe {
        tm_bag_free(bag);
        tm_corpus_free(corpus);
    }
}

#[test]
fn header_declares_every_export() {
    let header = include_str!("../include/termminer.h");
    let src = include_str!("../src/lib.rs");
    let exports: Vec<&str> = src
        .lines()
        .filter_map(|l| l.split("extern \"C\" fn ").nth(1))
        .map(|rest| rest.split('(').next().unwrap())
        .collect();
    assert!(exports.len() > 20);
    for name in exports {
        assert!(header.contains(&format!("{name}(")), "{name} missing from header");
    }
    assert!(!unsafe { CStr::from_ptr(tm_version()) }.to_bytes().is_empty());
}
