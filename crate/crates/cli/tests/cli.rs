use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn strategia(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_strategia")).args(args).current_dir(cwd).output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn listing(dir: &Path) -> Vec<String> {
    let mut names: Vec<String> =
        fs::read_dir(dir).unwrap().map(|e| e.unwrap().file_name().to_string_lossy().into_owned()).collect();
    names.sort();
    names
}

fn solved(dir: &Path) {
    let o = strategia(&["solve", "--board", "4x4", "--material", "KRvK", "--out", "krk.ctb"], dir);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
}

// White: Kc3 Rb4, Black: Ka1. Won for White.
const WON: &str = "4/1R2/2K1/k3 w - -";
// Black king takes the unguarded rook next to it.
const DRAWN: &str = "4/4/4/kR1K b - -";

#[test]
fn solve_writes_table_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    solved(dir.path());
    assert_eq!(listing(dir.path()), ["krk.ctb", "manifest.jsonl"]);
    let bytes = fs::read(dir.path().join("krk.ctb")).unwrap();
    assert_eq!(&bytes[..4], b"CTB1");
    let line = fs::read_to_string(dir.path().join("manifest.jsonl")).unwrap();
    let m: serde_json::Value = serde_json::from_str(line.trim()).unwrap();
    assert_eq!(m["artifacts"][0]["path"], "krk.ctb");
    assert_eq!(m["table_checksum"].as_str().unwrap().len(), 8);
    assert!(m["command_line"].as_array().unwrap().iter().any(|a| a == "KRvK"));
    let o = strategia(&["info", "--tb", "krk.ctb"], dir.path());
    let info: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(info["material"], "KRvK");
    assert_eq!(info["checksum"], m["table_checksum"]);
}

#[test]
fn path_probe_and_drawn_rejection() {
    let dir = tempfile::tempdir().unwrap();
    solved(dir.path());
    let o = strategia(&["probe", "--tb", "krk.ctb", "--fen", WON], dir.path());
    assert_eq!(code(&o), 0);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["wdl"], "win");
    let dtm = v["dtm"].as_u64().unwrap();

    let o = strategia(&["path", "--tb", "krk.ctb", "--fen", WON, "--mode", "augmented", "--out", "p.csv"], dir.path());
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let csv = fs::read_to_string(dir.path().join("p.csv")).unwrap();
    let rows: Vec<&str> = csv.lines().collect();
    assert!(rows[0].starts_with("n,move,dtm,a1,"));
    assert!(rows[0].ends_with(",side"));
    assert_eq!(rows.len() as u64, dtm + 2);
    assert!(rows.last().unwrap().starts_with(&format!("{dtm},")));

    let before = listing(dir.path());
    let o = strategia(&["path", "--tb", "krk.ctb", "--fen", DRAWN, "--mode", "strict", "--out", "d.csv"], dir.path());
    assert_eq!(code(&o), 3);
    let err: serde_json::Value = serde_json::from_slice(&o.stderr).unwrap();
    assert_eq!(err["error"], "validation");
    assert!(err["message"].as_str().unwrap().contains("unsupported case"));
    assert_eq!(listing(dir.path()), before);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    assert_eq!(code(&strategia(&["frobnicate"], d)), 2);
    assert_eq!(code(&strategia(&["solve", "-b", "4x4"], d)), 2);
    assert_eq!(
        code(&strategia(&["solve", "--board", "4x4", "--material", "KRvK", "--out", "t", "--workers", "0"], d)),
        2
    );
    assert_eq!(code(&strategia(&["solve", "--board", "9x9", "--material", "KRvK", "--out", "t"], d)), 3);
    assert_eq!(code(&strategia(&["solve", "--board", "4x4", "--material", "KXvK", "--out", "t"], d)), 3);
    assert_eq!(code(&strategia(&["info", "--tb", "missing.ctb"], d)), 5);
    fs::write(d.join("junk.ctb"), b"not a table").unwrap();
    assert_eq!(code(&strategia(&["info", "--tb", "junk.ctb"], d)), 5);
    let o = Command::new(env!("CARGO_BIN_EXE_strategia"))
        .args(["solve", "--board", "8x8", "--material", "KQRvKR", "--out", "big.ctb"])
        .env("STRATEGIA_MEM_BUDGET_MB", "8")
        .current_dir(d)
        .output()
        .unwrap();
    assert_eq!(code(&o), 4);
    assert_eq!(listing(d), ["junk.ctb"]);
}

#[test]
fn experiment_is_deterministic_and_atomic() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    solved(d);
    let run = |out: &str, workers: &str| {
        strategia(
            &["experiment", "--tb", "krk.ctb", "--sample", "40", "--seed", "42", "--out", out, "--workers", workers],
            d,
        )
    };
    assert_eq!(code(&run("a", "1")), 0);
    assert_eq!(code(&run("b", "2")), 0);
    for f in ["report.json", "pairs.csv"] {
        assert_eq!(fs::read(d.join("a").join(f)).unwrap(), fs::read(d.join("b").join(f)).unwrap(), "{f}");
    }
    assert_eq!(listing(&d.join("a")), ["manifest.jsonl", "pairs.csv", "report.json"]);
    let report: serde_json::Value = serde_json::from_slice(&fs::read(d.join("a/report.json")).unwrap()).unwrap();
    assert_eq!(report["schema_version"], 1);
    assert_eq!(report["bases"], 40);
    let m: serde_json::Value =
        serde_json::from_str(fs::read_to_string(d.join("a/manifest.jsonl")).unwrap().trim()).unwrap();
    assert_eq!(m["seed"], 42);
    assert_eq!(m["table_checksum"], report["table_checksum"]);
    assert_eq!(m["artifacts"].as_array().unwrap().len(), 2);

    let o = strategia(
        &["experiment", "--tb", "krk.ctb", "--sample", "5", "--seed", "1", "--out", "a", "--format", "json"],
        d,
    );
    assert_eq!(code(&o), 0);
    assert_eq!(fs::read_to_string(d.join("a/manifest.jsonl")).unwrap().lines().count(), 2);

    let bad = |args: &[&str]| {
        let mut all = vec!["experiment", "--tb", "krk.ctb", "--sample", "5", "--seed", "1", "--out", "c"];
        all.extend_from_slice(args);
        code(&strategia(&all, d))
    };
    assert_eq!(bad(&["--format", "xml"]), 2);
    fs::write(d.join("th.toml"), "forced_mate_max_dtm = 4\nunknown_key = 1\n").unwrap();
    assert_eq!(bad(&["--thresholds", "th.toml"]), 3);
    fs::write(d.join("th.toml"), "forced_mate_max_dtm = 0\n").unwrap();
    assert_eq!(bad(&["--thresholds", "th.toml"]), 3);
    assert!(!d.join("c").exists());
    fs::write(d.join("th.toml"), "forced_mate_max_dtm = 4\n").unwrap();
    assert_eq!(bad(&["--thresholds", "th.toml"]), 0);
    let report: serde_json::Value = serde_json::from_slice(&fs::read(d.join("c/report.json")).unwrap()).unwrap();
    assert_eq!(report["thresholds"]["forced_mate_max_dtm"], 4);
    assert_eq!(report["thresholds"]["material_gap_min"], 5);
}

#[test]
fn evalprobe_perturb_and_atypical() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    solved(d);
    let o =
        strategia(&["evalprobe", "--tb", "krk.ctb", "--capacity-sweep", "10..16", "--seed", "3", "--out", "s.csv"], d);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let csv = fs::read_to_string(d.join("s.csv")).unwrap();
    assert_eq!(csv.lines().count(), 8);
    assert!(csv.starts_with("capacity,train_mae,eval_mae,"));
    let o =
        strategia(&["evalprobe", "--tb", "krk.ctb", "--capacity-sweep", "0..17", "--seed", "3", "--out", "x.csv"], d);
    assert_eq!(code(&o), 3);
    let o = strategia(
        &[
            "evalprobe",
            "--tb",
            "krk.ctb",
            "--features",
            "nope",
            "--capacity-sweep",
            "0..1",
            "--seed",
            "3",
            "--out",
            "x.csv",
        ],
        d,
    );
    assert_eq!(code(&o), 3);
    assert!(!d.join("x.csv").exists());

    let o = strategia(&["perturb", "--tb", "krk.ctb", "--fen", WON, "--out", "pp.csv"], d);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let pp = fs::read_to_string(d.join("pp.csv")).unwrap();
    assert!(pp.starts_with("base_index,base_fen,moved_from,"));
    assert!(pp.lines().count() > 1);

    let o = strategia(&["atypical", "--tb", "krk.ctb", "--fen", WON], d);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["atypical"], true);
    assert_eq!(v["detail"]["piece_count"], 3);
}
