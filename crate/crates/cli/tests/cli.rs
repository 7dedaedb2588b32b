use std::path::{Path, PathBuf};
use std::process::Command;

use rand::rngs::StdRng;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use serde_json::Value;
use wellform_cli::run_cli;

fn corpus(rel: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../corpus")
        .join(rel)
        .display()
        .to_string()
}

fn files(dir: &str, ext: &str) -> Vec<String> {
    let mut v: Vec<PathBuf> = std::fs::read_dir(corpus(dir))
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == ext))
        .collect();
    v.sort();
    v.into_iter().map(|p| p.display().to_string()).collect()
}

fn cli(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("wellform").chain(args.iter().copied());
    let code = run_cli(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn json(args: &[&str]) -> (i32, Value) {
    let mut a = args.to_vec();
    a.extend(["--format", "json"]);
    let (code, out, err) = cli(&a);
    let v = serde_json::from_str(&out).unwrap_or_else(|e| panic!("{e}: {out}\n{err}"));
    (code, v)
}

fn schema() -> jsonschema::JSONSchema {
    let text = include_str!("../schema/report.schema.json");
    let s: Value = serde_json::from_str(text).unwrap();
    jsonschema::JSONSchema::compile(&s).unwrap()
}

#[test]
fn lint_clean_fixture() {
    let (code, out, _) = cli(&["lint", &corpus("activity/while_loop.act")]);
    assert_eq!(code, 0);
    assert_eq!(out.trim(), "well-formed: true");
}

#[test]
fn lint_two_ends_json() {
    let (code, v) = json(&["lint", &corpus("mutations/m01_while_loop.act")]);
    assert_eq!(code, 1);
    assert_eq!(v["wellFormed"], false);
    let d = v["diagnostics"].as_array().unwrap();
    assert_eq!(d.len(), 1);
    assert_eq!(d[0]["rule"], "W2-SINGLE-FINAL");
}

#[test]
fn simulate_while_loop() {
    let (code, v) = json(&["simulate", &corpus("activity/while_loop.act"), "--set", "i=0"]);
    assert_eq!(code, 0);
    assert_eq!(v["trace"]["steps"], serde_json::json!(["work", "work", "work"]));
    assert_eq!(v["trace"]["finalEnv"]["i"], 3);
    let (code, out, _) = cli(&["simulate", &corpus("activity/while_loop.act"), "--set", "i=0"]);
    assert_eq!(code, 0);
    assert_eq!(out.matches("work").count(), 3);
}

#[test]
fn simulate_guard_error_and_budget() {
    let (code, v) = json(&["simulate", &corpus("activity/while_loop.act")]);
    assert_eq!(code, 1);
    assert_eq!(v["trace"]["terminated"], "guardError");
    let (code, v) = json(&["simulate", &corpus("activity/while_loop.act"), "--set", "i=0", "--budget", "4"]);
    assert_eq!(code, 1);
    assert_eq!(v["trace"]["terminated"], "budgetExhausted");
    assert_eq!(cli(&["simulate", &corpus("activity/while_loop.act"), "--budget", "0"]).0, 3);
    assert_eq!(cli(&["simulate", &corpus("activity/while_loop.act"), "--set", "i"]).0, 3);
    assert_eq!(cli(&["simulate", &corpus("activity/while_loop.act"), "--set", "i=x"]).0, 3);
}

#[test]
fn budget_from_environment() {
    let run = |budget: &str| {
        Command::new(env!("CARGO_BIN_EXE_wellform"))
            .args(["simulate", &corpus("activity/while_loop.act"), "--set", "i=0", "--format", "json"])
            .env("WELLFORM_BUDGET", budget)
            .output()
            .unwrap()
    };
    let small = run("4");
    assert_eq!(small.status.code(), Some(1));
    let v: Value = serde_json::from_slice(&small.stdout).unwrap();
    assert_eq!(v["trace"]["terminated"], "budgetExhausted");
    assert_eq!(run("100").status.code(), Some(0));
    assert_eq!(run("lots").status.code(), Some(3));
}

#[test]
fn codegen_prints_and_writes() {
    let (code, out, _) = cli(&["codegen", &corpus("activity/while_loop.act"), "--outline"]);
    assert_eq!(code, 0);
    assert_eq!(out.trim(), "while (i < 3) { do work; } // #1");
    let target = std::env::temp_dir().join(format!("wellform-codegen-{}.pc", std::process::id()));
    let t = target.display().to_string();
    let (code, _, _) = cli(&["codegen", &corpus("activity/while_loop.act"), "-o", &t]);
    assert_eq!(code, 0);
    let written = std::fs::read_to_string(&target).unwrap();
    assert_eq!(written, "while (i < 3) {\n  do work; // i = i + 1\n} // #1\n");
    let (code, v) = json(&["simulate", &t, "--set", "i=1"]);
    std::fs::remove_file(&target).unwrap();
    assert_eq!(code, 0);
    assert_eq!(v["trace"]["steps"], serde_json::json!(["work", "work"]));
}

#[test]
fn codegen_residue() {
    let (code, v) = json(&["codegen", &corpus("mutations/m20_dowhile.act")]);
    assert_eq!(code, 1);
    assert!(v.get("code").is_none());
    assert!(!v["residue"]["remainingNodes"].as_array().unwrap().is_empty());
}

#[test]
fn sequence_commands() {
    assert_eq!(cli(&["check-seq", &corpus("sequence/parallel.seq")]).0, 0);
    let (code, v) = json(&[
        "check-consistency",
        &corpus("activity/while_loop.act"),
        &corpus("sequence/while_loop.seq"),
    ]);
    assert_eq!(code, 0);
    assert_eq!(v["consistent"], true);
    let (code, v) = json(&[
        "check-consistency",
        &corpus("activity/while_loop.act"),
        &corpus("sequence/parallel.seq"),
    ]);
    assert_eq!(code, 1);
    assert_eq!(v["consistent"], false);
    let (code, v) = json(&[
        "check-consistency",
        &corpus("mutations/m01_while_loop.act"),
        &corpus("sequence/while_loop.seq"),
    ]);
    assert_eq!(code, 1);
    assert_eq!(v["wellFormed"], false);
}

#[test]
fn grading_commands() {
    let (code, v) = json(&[
        "grade",
        "--mode",
        "annotation",
        "--rubric",
        &corpus("rubric/relationship.rub"),
        "--submission",
        &corpus("submission/relationship.txt"),
    ]);
    assert_eq!(code, 0);
    assert_eq!(v["grade"]["earned"], 2.0);
    let (code, v) = json(&[
        "grade",
        "--mode",
        "element_diff",
        "--rubric",
        &corpus("rubric/while_diagram.rub"),
        "--submission",
        &corpus("submission/while_student.act"),
        &corpus("submission/while_missing_guard.act"),
    ]);
    assert_eq!(code, 1);
    assert_eq!(v[0]["grade"]["earned"], 10.0);
    assert_eq!(v[1]["grade"]["earned"], 8.0);
    let (code, v) = json(&[
        "grade",
        "--mode",
        "hotspot",
        "--rubric",
        &corpus("rubric/forbidden.rub"),
        "--submission",
        &corpus("submission/forbidden.txt"),
        "--penalty",
        "0.5",
    ]);
    assert_eq!(code, 0);
    assert_eq!(v["grade"]["earned"], 2.0);
    let wrong_mode = cli(&[
        "grade",
        "--mode",
        "hotspot",
        "--rubric",
        &corpus("rubric/relationship.rub"),
        "--submission",
        &corpus("submission/relationship.txt"),
    ]);
    assert_eq!(wrong_mode.0, 3);
    assert!(wrong_mode.2.contains("does not match"));
}

#[test]
fn exit_codes() {
    let dir = std::env::temp_dir().join(format!("wellform-exit-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let bad = dir.join("bad.act");
    std::fs::write(&bad, "activity \"x\" { frobnicate a }").unwrap();
    let bad = bad.display().to_string();
    let (code, _, err) = cli(&["lint", &bad]);
    assert_eq!(code, 2);
    assert!(err.contains("unknown keyword"));
    let (code, v) = json(&["lint", &bad]);
    assert_eq!(code, 2);
    assert_eq!(v["error"]["kind"], "parse");
    assert_eq!(v["error"]["line"], 1);
    assert_eq!(cli(&["lint", "/nonexistent/x.act"]).0, 3);
    // Worst code wins across a batch.
    let (code, v) = json(&["lint", &corpus("activity/while_loop.act"), &bad, &corpus("mutations/m01_while_loop.act")]);
    assert_eq!(code, 2);
    assert_eq!(v.as_array().unwrap().len(), 3);
    assert_eq!(v[0]["wellFormed"], true);
    std::fs::remove_dir_all(&dir).unwrap();
    assert_eq!(cli(&[]).0, 3);
    assert_eq!(cli(&["lint"]).0, 3);
    assert_eq!(cli(&["--help"]).0, 0);
    assert_eq!(cli(&["explain", "W2-SINGLE-FINAL"]).0, 0);
    assert_eq!(cli(&["explain", "W99"]).0, 3);
}

/// Every command's JSON on every corpus file validates against the schema.
#[test]
fn json_matches_schema() {
    let schema = schema();
    let mut runs: Vec<Vec<String>> = Vec::new();
    let acts: Vec<String> = files("activity", "act").into_iter().chain(files("mutations", "act")).collect();
    for a in &acts {
        runs.push(vec!["lint".into(), a.clone()]);
        runs.push(vec!["codegen".into(), a.clone()]);
        runs.push(vec!["simulate".into(), a.clone(), "--set".into(), "i=0".into(), "--budget".into(), "200".into()]);
    }
    runs.push(["lint".to_string()].into_iter().chain(acts.iter().cloned()).collect());
    for s in files("sequence", "seq") {
        runs.push(vec!["check-seq".into(), s.clone()]);
        for a in files("activity", "act") {
            runs.push(vec!["check-consistency".into(), a, s.clone()]);
        }
    }
    for (mode, rubric, subs) in [
        ("annotation", "relationship.rub", vec!["relationship.txt", "relationship_wrong.txt"]),
        ("annotation", "multiplicity.rub", vec!["multiplicity.txt"]),
        ("hotspot", "forbidden.rub", vec!["forbidden.txt", "forbidden_wrong.txt"]),
        ("placement", "sequence_drawing.rub", vec!["sequence_drawing.txt"]),
        ("element_diff", "while_diagram.rub", vec!["while_student.act", "while_missing_guard.act"]),
    ] {
        let mut r = vec![
            "grade".to_string(),
            "--mode".into(),
            mode.into(),
            "--rubric".into(),
            corpus(&format!("rubric/{rubric}")),
            "--submission".into(),
        ];
        r.extend(subs.iter().map(|s| corpus(&format!("submission/{s}"))));
        runs.push(r);
    }
    runs.push(vec!["explain".into(), "C3-ORDER".into()]);
    runs.push(vec!["lint".into(), "/nonexistent.act".into()]);
    for r in runs {
        let args: Vec<&str> = r.iter().map(String::as_str).collect();
        let (_, v) = json(&args);
        let msgs: Vec<String> = match schema.validate(&v) {
            Ok(()) => Vec::new(),
            Err(errors) => errors.map(|e| format!("{e} at {}", e.instance_path)).collect(),
        };
        assert!(msgs.is_empty(), "{r:?}: {msgs:?}");
    }
}

/// Random argument vectors never panic and always map to a contract exit code.
#[test]
fn fuzzed_arguments() {
    let pool = [
        "lint",
        "codegen",
        "simulate",
        "check-seq",
        "check-consistency",
        "grade",
        "explain",
        "--format",
        "json",
        "text",
        "xml",
        "--set",
        "i=0",
        "i",
        "=",
        "--budget",
        "0",
        "-5",
        "10",
        "--mode",
        "hotspot",
        "element_diff",
        "--rubric",
        "--submission",
        "--penalty",
        "NaN",
        "-o",
        "--outline",
        "",
        "--",
        "-",
        "\u{1F600}",
        "W2-SINGLE-FINAL",
    ];
    let real = [
        corpus("activity/while_loop.act"),
        corpus("sequence/while_loop.seq"),
        corpus("rubric/forbidden.rub"),
        corpus("submission/forbidden.txt"),
        corpus("mutations/m07_while_loop.act"),
        "/nonexistent".to_string(),
    ];
    let mut rng = StdRng::seed_from_u64(2024);
    for _ in 0..400 {
        let n = rng.gen_range(0..7);
        let args: Vec<String> = (0..n)
            .map(|_| {
                if rng.gen_bool(0.3) {
                    real.choose(&mut rng).unwrap().clone()
                } else {
                    pool.choose(&mut rng).unwrap().to_string()
                }
            })
            .filter(|a| a != "-o")
            .collect();
        let refs: Vec<&str> = args.iter().map(String::as_str).collect();
        let outcome = std::panic::catch_unwind(|| cli(&refs));
        let (code, _, _) = outcome.unwrap_or_else(|_| panic!("panicked on {args:?}"));
        assert!((0..=3).contains(&code), "{args:?} -> {code}");
        if args.first().is_some_and(|a| !pool[..7].contains(&a.as_str()) && !a.starts_with('-')) {
            assert_eq!(code, 3, "{args:?}");
        }
    }
}
