use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use twisted_core::dsl::InstanceFile;
use twisted_core::error::Error;
use twisted_core::quotient::SeparatingCertificate;

fn corpus() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../corpus")
}

fn tcsep(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tcsep"))
        .args(args)
        .output()
        .expect("tcsep runs")
}

fn decide(file: &str, extra: &[&str]) -> (i32, String) {
    let path = corpus().join(file);
    let mut args = vec!["decide", path.to_str().unwrap()];
    args.extend_from_slice(extra);
    let out = tcsep(&args);
    (out.status.code().expect("exit code"), String::from_utf8_lossy(&out.stdout).into_owned())
}

const EXPECTED: &[(&str, i32)] = &[
    ("brinkconj_swap.tc", 0),
    ("brinkmann_swap.tc", 0),
    ("conj_coset.tc", 0),
    ("conj_no.tc", 1),
    ("conj_rat_no.tc", 1),
    ("conj_rat_undecided.tc", 2),
    ("conj_rat_yes.tc", 0),
    ("conj_yes.tc", 0),
    ("extension.tc", 0),
    ("fatf_twisted.tc", 0),
    ("gphi.tc", 0),
    ("semidirect_no.tc", 1),
    ("semidirect_yes.tc", 0),
    ("transvection.tc", 1),
    ("twisted_inner.tc", 0),
    ("twisted_inner_no.tc", 1),
    ("twisted_swap.tc", 1),
];

#[test]
fn corpus_verdicts() {
    for (file, code) in EXPECTED {
        assert_eq!(decide(file, &[]).0, *code, "{file}");
    }
}

#[test]
fn generic_engine_and_parallel_mode_agree_with_fast_paths() {
    for (file, code) in EXPECTED {
        let generic = decide(file, &["--no-fast-path"]).0;
        if *code != 2 && generic != 2 {
            assert_eq!(generic, *code, "{file} with --no-fast-path");
        }
        assert_eq!(decide(file, &["--parallel"]).0, *code, "{file} with --parallel");
    }
}

#[test]
fn no_writes_a_certificate() {
    let dir = std::env::temp_dir().join(format!("tcsep-cert-{}", std::process::id()));
    fs::create_dir_all(&dir).unwrap();
    let out = dir.join("cert.json");
    let (code, stdout) = decide("conj_no.tc", &["--out", out.to_str().unwrap()]);
    assert_eq!(code, 1);
    assert!(stdout.contains("verdict: NO"));
    let cert = SeparatingCertificate::from_json(&fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(cert.excluded, "b");
    assert!(cert.hom.degree >= 2);
    fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn yes_writes_a_witness_record() {
    let dir = std::env::temp_dir().join(format!("tcsep-witness-{}", std::process::id()));
    fs::create_dir_all(&dir).unwrap();
    let out = dir.join("w.json");
    assert_eq!(decide("conj_yes.tc", &["--out", out.to_str().unwrap()]).0, 0);
    let record: serde_json::Value = serde_json::from_str(&fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(record["answer"], "YES");
    assert_eq!(record["set_element"], "ab");
    fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn tiny_budget_is_undecided() {
    let args = ["--no-fast-path", "--budget-len", "0", "--budget-degree", "1", "--budget-steps", "2"];
    let (code, stdout) = decide("conj_no.tc", &args);
    assert_eq!(code, 2);
    assert!(stdout.contains("verdict: UNDECIDED"));
}

#[test]
fn errors_exit_three_with_position() {
    let dir = std::env::temp_dir().join(format!("tcsep-err-{}", std::process::id()));
    fs::create_dir_all(&dir).unwrap();
    let bad = dir.join("bad.tc");
    fs::write(&bad, "group free rank 2\nelem x abz\ndecide conj target x\n").unwrap();
    let out = tcsep(&["decide", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("line 2, column 10"), "{err}");
    let missing = tcsep(&["decide", dir.join("missing.tc").to_str().unwrap()]);
    assert_eq!(missing.status.code(), Some(3));
    fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn seed_is_printed() {
    let (_, stdout) = decide("conj_yes.tc", &["--seed", "42"]);
    assert!(stdout.starts_with("seed: 42\n"));
}

#[test]
fn corpus_parse_print_round_trip() {
    let load = |name: &str| fs::read_to_string(corpus().join(name)).map_err(|e| Error::Input(e.to_string()));
    for (file, _) in EXPECTED {
        let text = fs::read_to_string(corpus().join(file)).unwrap();
        let once = InstanceFile::parse(&text, &load).unwrap().print();
        let twice = InstanceFile::parse(&once, &load).unwrap().print();
        assert_eq!(once, twice, "{file}");
    }
}

/// Drops the timing column so runs can be compared.
fn without_timings(stdout: &[u8]) -> Vec<String> {
    String::from_utf8_lossy(stdout)
        .lines()
        .map(|l| match (l.find(": "), l.find("s) ")) {
            (Some(a), Some(b)) if a < b => format!("{}{}", &l[..a], &l[b + 2..]),
            _ => l.to_string(),
        })
        .collect()
}

#[test]
fn selftest_passes_and_is_reproducible() {
    let first = tcsep(&["selftest", "--scale", "0.1", "--seed", "7"]);
    assert!(first.status.success(), "{}", String::from_utf8_lossy(&first.stdout));
    let second = tcsep(&["selftest", "--scale", "0.1", "--seed", "7"]);
    assert_eq!(without_timings(&first.stdout), without_timings(&second.stdout));
}

#[test]
fn corrupted_nu_fails_selftest() {
    let out = tcsep(&["selftest", "--scale", "0.05", "--corrupt-nu", "2", "2"]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stdout).contains("datum validation [FAIL]"));
}
