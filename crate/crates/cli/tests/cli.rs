use std::path::PathBuf;
use std::process::{Command, Output};

fn cdenlab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cdenlab"))
        .args(args)
        .env_remove("CDENLAB_SEED")
        .output()
        .expect("spawn cdenlab")
}

fn tmp(name: &str) -> PathBuf {
    std::env::temp_dir().join(format!("cdenlab-test-{}-{name}", std::process::id()))
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

/// Value of `key=` on the first summary line starting with `prefix`.
fn field(text: &str, prefix: &str, key: &str) -> f64 {
    let line = text.lines().find(|l| l.starts_with(prefix)).unwrap_or_else(|| panic!("no line {prefix} in {text}"));
    let tok = line.split_whitespace().find_map(|t| t.strip_prefix(&format!("{key}="))).expect("key present");
    tok.parse().expect("number")
}

#[test]
fn lambda_above_cap_is_usage_error() {
    let o = cdenlab(&["lemmas", "--lambda", "64"]);
    assert_eq!(o.status.code(), Some(2));
    let o = cdenlab(&["experiment", "--game", "dph", "--lambda", "14"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn unknown_ids_are_usage_errors() {
    assert_eq!(cdenlab(&["experiment", "--game", "no-such-game"]).status.code(), Some(2));
    assert_eq!(cdenlab(&["experiment", "--game", "dph", "--strategy", "nope"]).status.code(), Some(2));
    assert_eq!(cdenlab(&["experiment", "--game", "deniability", "--scheme", "nope"]).status.code(), Some(2));
    assert_eq!(cdenlab(&["experiment"]).status.code(), Some(2));
}

#[test]
fn odd_lambda_rejected_by_the_scheme_is_usage_error() {
    let o = cdenlab(&["experiment", "--game", "deniability", "--lambda", "7", "--trials", "4"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn lemmas_pass_and_are_reproducible() {
    let (a, b) = (tmp("lemmas-a.json"), tmp("lemmas-b.json"));
    let o1 = cdenlab(&["lemmas", "--out", a.to_str().unwrap()]);
    let o2 = cdenlab(&["lemmas", "--out", b.to_str().unwrap()]);
    assert_eq!(o1.status.code(), Some(0), "{}", stdout(&o1));
    assert_eq!(o2.status.code(), Some(0));
    let (ja, jb) = (std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    assert_eq!(ja, jb);
    let v: serde_json::Value = serde_json::from_slice(&ja).unwrap();
    assert!(v["wall_time_ms"].is_null());
    for s in v["results"].as_array().unwrap() {
        if !s["informational"].as_bool().unwrap() {
            assert_eq!(s["violations"], 0, "{s}");
        }
    }
    let _ = std::fs::remove_file(a);
    let _ = std::fs::remove_file(b);
}

#[test]
fn experiment_json_is_byte_identical_on_stdout() {
    let args = ["experiment", "--game", "dph", "--trials", "256", "--seed", "0x1234"];
    let (o1, o2) = (cdenlab(&args), cdenlab(&args));
    assert_eq!(o1.status.code(), Some(0));
    assert_eq!(o1.stdout, o2.stdout);
    let v: serde_json::Value = serde_json::from_slice(&o1.stdout).unwrap();
    assert_eq!(v["config"]["seed"], 0x1234);
    for key in ["tool_version", "config", "results", "wall_time_ms"] {
        assert!(v.get(key).is_some(), "missing {key}");
    }
}

#[test]
fn seed_env_var_changes_default() {
    let run = |env: Option<&str>| {
        let mut c = Command::new(env!("CARGO_BIN_EXE_cdenlab"));
        c.args(["experiment", "--game", "dph", "--trials", "8"]);
        match env {
            Some(s) => c.env("CDENLAB_SEED", s),
            None => c.env_remove("CDENLAB_SEED"),
        };
        let v: serde_json::Value = serde_json::from_slice(&c.output().unwrap().stdout).unwrap();
        v["config"]["seed"].as_u64().unwrap()
    };
    assert_eq!(run(None), 0xC0DE);
    assert_eq!(run(Some("77")), 77);
}

#[test]
fn adp_del_computational_estimate() {
    let out = tmp("adp.json");
    let o = cdenlab(&[
        "experiment", "--game", "adp-del", "--strategy", "computational", "--reps", "6", "--trials", "4096", "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let est = field(&text, "game=adp-del", "estimate");
    // 1/64 with a 4096-trial binomial 4σ band.
    let sigma = (1.0 / 64.0 * 63.0 / 64.0 / 4096.0f64).sqrt();
    assert!((est - 1.0 / 64.0).abs() < 4.0 * sigma, "{est}");
    let _ = std::fs::remove_file(out);
}

#[test]
fn deniability_summary_reports_exact_acceptance() {
    let out = tmp("den.json");
    let o = cdenlab(&[
        "experiment", "--game", "deniability", "--scheme", "fs-nizk", "--lambda", "8", "--trials", "200", "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!((field(&text, "real_accept_prob", "real_accept_prob") - 1.0).abs() < 1e-9);
    assert!((field(&text, "real_accept_prob", "sim_accept_prob") - 0.9375).abs() < 1e-9);
    let v: serde_json::Value = serde_json::from_slice(&std::fs::read(&out).unwrap()).unwrap();
    let sim_exact = v["results"][0]["sim"]["exact"].as_f64().unwrap();
    assert!((sim_exact - 0.9375).abs() < 1e-9);
    let _ = std::fs::remove_file(out);
}

#[test]
fn evidence_demo_reports_strawman_advantage() {
    let out = tmp("ev.json");
    let o = cdenlab(&["experiment", "--game", "evidence-demo", "--trials", "200", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let adv = field(&stdout(&o), "strawman_advantage", "strawman_advantage");
    assert!(adv > 0.97, "{adv}");
    let _ = std::fs::remove_file(out);
}

#[test]
fn csv_has_one_row_per_trial() {
    let o = cdenlab(&["experiment", "--game", "soundness", "--trials", "50", "--format", "csv"]);
    assert_eq!(o.status.code(), Some(0));
    let mut rdr = csv::Reader::from_reader(o.stdout.as_slice());
    let headers = rdr.headers().unwrap().clone();
    assert_eq!(headers.iter().collect::<Vec<_>>(), ["game", "strategy", "seed", "trial", "win", "prob"]);
    assert_eq!(rdr.records().count(), 50);
}
