use std::path::{Path, PathBuf};
use std::process::{Command, Output};

const ROOT: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/../..");

fn fixture(rel: &str) -> PathBuf {
    Path::new(ROOT).join("fixtures").join(rel)
}

fn mcqgen(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mcqgen"))
        .args(args)
        .env_remove("OPENAI_API_KEY")
        .env_remove("RUST_LOG")
        .output()
        .unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn generate_replay(out: &Path, extra: &[&str]) -> Output {
    let objectives = fixture("replay/objectives.jsonl");
    let transcript = fixture("replay/transcript.jsonl");
    let mut args = vec![
        "generate",
        "--objectives",
        s(&objectives),
        "--grades",
        "7-9",
        "--bloom",
        "evaluate",
        "--replay",
        s(&transcript),
        "--out",
        s(out),
    ];
    args.extend_from_slice(extra);
    mcqgen(&args)
}

#[test]
fn generate_in_replay_mode_writes_bank_and_report() {
    let dir = tempfile::tempdir().unwrap();
    let out = generate_replay(dir.path(), &[]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("5 requested: 4 approved, 1 need human review, 0 failed"), "{stderr}");
    let bank = std::fs::read_to_string(dir.path().join("bank.jsonl")).unwrap();
    assert_eq!(bank.lines().count(), 5);
    assert_eq!(bank.matches("\"status\":\"needs_human_review\"").count(), 1);
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("run_report.json")).unwrap()).unwrap();
    assert_eq!(report["gateway_calls"]["generate.v1"], 5);
}

#[test]
fn same_seed_same_bytes_other_seed_other_orders() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let c = tempfile::tempdir().unwrap();
    generate_replay(a.path(), &["--seed", "42"]);
    generate_replay(b.path(), &["--seed", "42"]);
    generate_replay(c.path(), &["--seed", "7"]);
    let read = |d: &tempfile::TempDir| std::fs::read(d.path().join("bank.jsonl")).unwrap();
    assert_eq!(read(&a), read(&b));
    assert_ne!(read(&a), read(&c));
}

#[test]
fn missing_transcript_fails_before_any_work() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("out");
    let out = mcqgen(&[
        "generate",
        "--objective",
        "explain what a sensor does",
        "--bloom",
        "understand",
        "--grades",
        "7-9",
        "--replay",
        "/nonexistent/transcript.jsonl",
        "--out",
        s(&out_dir),
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("does not exist"));
    assert!(!out_dir.exists());
}

#[test]
fn replay_miss_is_reported_per_question() {
    let dir = tempfile::tempdir().unwrap();
    let transcript = fixture("replay/transcript.jsonl");
    let out = mcqgen(&[
        "generate",
        "--objective",
        "explain what a sensor does",
        "--bloom",
        "understand",
        "--grades",
        "7-9",
        "--replay",
        s(&transcript),
        "--out",
        s(dir.path()),
    ]);
    assert_eq!(out.status.code(), Some(1));
    let report = std::fs::read_to_string(dir.path().join("run_report.json")).unwrap();
    assert!(report.contains("\"replay_miss\": true"), "{report}");
    assert_eq!(std::fs::read_to_string(dir.path().join("bank.jsonl")).unwrap(), "");
}

#[test]
fn record_without_api_key_is_a_startup_error() {
    let dir = tempfile::tempdir().unwrap();
    let t = dir.path().join("t.jsonl");
    let out = mcqgen(&["record", "--objective", "x y z", "--bloom", "apply", "--grades", "7-9", "--transcript", s(&t), "--out", s(dir.path())]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("OPENAI_API_KEY"));
    assert!(!dir.path().join("bank.jsonl").exists());
}

#[test]
fn config_file_with_a_key_is_refused() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("mcqgen.toml");
    std::fs::write(&cfg, "api_key = \"sk-not-here\"\n").unwrap();
    let out = mcqgen(&["--config", s(&cfg), "readability", "A short text."]);
    // readability does not read the config, so this succeeds
    assert!(out.status.success());
    let out = mcqgen(&["--config", s(&cfg), "lint", "--bank", s(&fixture("eval/bank.jsonl"))]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("credentials are only read from the environment"));
}

#[test]
fn config_file_values_and_flag_precedence() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("mcqgen.toml");
    let transcript = fixture("replay/transcript.jsonl");
    std::fs::write(&cfg, format!("mode = \"replay\"\ntranscript = {:?}\nmax_revisions = 1\n", s(&transcript))).unwrap();
    let objectives = fixture("replay/objectives.jsonl");
    let run = |extra: &[&str]| {
        let mut args = vec!["--config", s(&cfg), "generate", "--objectives", s(&objectives), "--grades", "7-9", "--out", s(dir.path())];
        args.extend_from_slice(extra);
        let out = mcqgen(&args);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        serde_json::from_str::<serde_json::Value>(&std::fs::read_to_string(dir.path().join("run_report.json")).unwrap()).unwrap()
    };
    // budget 1 from the file: two questions stop early
    let report = run(&[]);
    assert_eq!((report["approved"].as_u64(), report["needs_human_review"].as_u64()), (Some(3), Some(2)));
    let report = run(&["--max-revisions", "3"]);
    assert_eq!((report["approved"].as_u64(), report["needs_human_review"].as_u64()), (Some(4), Some(1)));
}

#[test]
fn lint_exit_codes_and_json() {
    let out = mcqgen(&["lint", "--bank", s(&fixture("eval/bank.jsonl"))]);
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stdout).contains("40 questions, 0 over the flaw limit"));

    let dir = tempfile::tempdir().unwrap();
    generate_replay(dir.path(), &[]);
    // the exhausted question still carries flaws
    let out = mcqgen(&["lint", "--json", "--bank", s(&dir.path().join("bank.jsonl"))]);
    assert_eq!(out.status.code(), Some(1));
    let records: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let bad: Vec<&str> = records
        .as_array()
        .unwrap()
        .iter()
        .filter(|r| r["acceptable"] == false)
        .map(|r| r["id"].as_str().unwrap())
        .collect();
    assert_eq!(bad, vec!["q005"]);
    let out = mcqgen(&["lint", "--max-flaws", "5", "--bank", s(&dir.path().join("bank.jsonl"))]);
    assert!(out.status.success());
}

#[test]
fn readability_from_argument_and_stdin() {
    let out = mcqgen(&["readability", "The cat sat on the mat."]);
    assert_eq!(String::from_utf8_lossy(&out.stdout), "grade -1.45 (6 words, 1 sentences, 6 syllables)\n");

    use std::io::Write;
    let mut child = Command::new(env!("CARGO_BIN_EXE_mcqgen"))
        .args(["readability", "--json", "--grades", "7-9"])
        .stdin(std::process::Stdio::piped())
        .stdout(std::process::Stdio::piped())
        .spawn()
        .unwrap();
    child.stdin.take().unwrap().write_all(b"Robots can help people. Data helps a model learn.").unwrap();
    let out = child.wait_with_output().unwrap();
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!((v["words"].as_u64(), v["sentences"].as_u64(), v["syllables"].as_u64()), (Some(9), Some(2), Some(13)));
    assert_eq!(v["within_band"], true);

    let hard = "Considering the computational methodology underlying contemporary conversational artificial intelligence applications, which characterization most accurately describes the mechanism?";
    let out = mcqgen(&["readability", "--grades", "7-9", hard]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stdout).contains("too hard for grades 7-9"));
}

#[test]
fn eval_json_and_csv() {
    let bank = fixture("eval/bank.jsonl");
    let ratings = fixture("eval/ratings.jsonl");
    let out = mcqgen(&["eval", "--bank", s(&bank), "--ratings", s(&ratings), "--format", "csv"]);
    let csv = String::from_utf8(out.stdout).unwrap();
    assert!(csv.lines().any(|l| l == "LORelated,yes,100.0,97.5,97.5,98.3"), "{csv}");

    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("report.json");
    let out = mcqgen(&["eval", "--bank", s(&bank), "--ratings", s(&ratings), "--out", s(&file)]);
    assert!(out.status.success());
    let stdout = mcqgen(&["eval", "--bank", s(&bank), "--ratings", s(&ratings)]).stdout;
    assert_eq!(std::fs::read(&file).unwrap(), stdout);

    // CSV ratings give the same report as JSONL
    let as_csv = dir.path().join("ratings.csv");
    let set = mcq_core::eval::load_ratings(&ratings).unwrap();
    std::fs::write(&as_csv, mcq_core::eval::ratings::to_csv(&set)).unwrap();
    let from_csv = mcqgen(&["eval", "--bank", s(&bank), "--ratings", s(&as_csv)]).stdout;
    assert_eq!(from_csv, stdout);
}

#[test]
fn export_formats() {
    let bank = fixture("eval/bank.jsonl");
    let out = mcqgen(&["export", "--bank", s(&bank), "--format", "gift"]);
    let gift = String::from_utf8(out.stdout).unwrap();
    assert_eq!(gift.matches("::q").count(), 40);
    assert!(gift.contains("=It may produce a story that lacks originality"), "{}", &gift[..400]);

    let out = mcqgen(&["export", "--bank", s(&bank), "--format", "json"]);
    assert_eq!(out.stdout, std::fs::read(&bank).unwrap());

    let out = mcqgen(&["export", "--bank", s(&bank), "--format", "csv"]);
    let csv = String::from_utf8(out.stdout).unwrap();
    assert!(csv.starts_with("id,status,revision,bloom_level,grade_band,learning_objective,scenario,stem,key_letter,option_a,option_b,option_c,option_d\n"));

    let out = mcqgen(&["export", "--bank", s(&bank), "--format", "qti"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("known: csv, gift, json"));
}

#[test]
fn empty_bank_exports_empty_file_with_warning() {
    let dir = tempfile::tempdir().unwrap();
    let bank = dir.path().join("empty.jsonl");
    std::fs::write(&bank, "").unwrap();
    let target = dir.path().join("out.gift");
    let out = mcqgen(&["export", "--bank", s(&bank), "--format", "gift", "--out", s(&target)]);
    assert!(out.status.success());
    assert_eq!(std::fs::read_to_string(&target).unwrap(), "");
    assert!(String::from_utf8_lossy(&out.stderr).contains("bank is empty"));
}
