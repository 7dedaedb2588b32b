//! One function per subcommand, each producing a [`Report`] for one input.

use std::fs;
use std::path::Path;

use wellform_core::dsl::{parse_activity, parse_rubric, parse_sequence, ParseError};
use wellform_core::expr::{Env, Value};
use wellform_core::grading::{self, GradeConfig, Mode, Rubric, Submission};
use wellform_core::lint::{self, explain as explain_rule};
use wellform_core::model::ActivityGraph;
use wellform_core::seqdiag::{self, ConsistencyError};
use wellform_core::sim::{self, run_pseudocode, Termination, DEFAULT_BUDGET};
use wellform_core::structure::{emit_outline, emit_pseudocode, reduce};

use crate::report::{ErrorInfo, Report};
use crate::{EXIT_FINDINGS, EXIT_PARSE, EXIT_USAGE};

fn read(path: &Path) -> Result<String, String> {
    fs::read_to_string(path).map_err(|e| e.to_string())
}

fn name(path: &Path) -> String {
    path.display().to_string()
}

/// Reads and parses `path`, or returns the failed report.
#[allow(clippy::result_large_err)]
fn load<T>(
    report: Report,
    path: &Path,
    parse: impl Fn(&str) -> Result<T, ParseError>,
) -> Result<(T, Report), Report> {
    let text = match read(path) {
        Ok(t) => t,
        Err(e) => return Err(report.io_error(e)),
    };
    match parse(&text) {
        Ok(v) => Ok((v, report)),
        Err(e) => Err(report.parse_error(&e)),
    }
}

pub fn lint(path: &Path) -> Report {
    let (g, mut r) = match load(Report::new("lint", name(path)), path, parse_activity) {
        Ok(x) => x,
        Err(r) => return r,
    };
    let report = lint::lint(&g);
    r.well_formed = Some(report.well_formed);
    r.diagnostics = report.diagnostics;
    if !report.well_formed {
        r.exit = EXIT_FINDINGS;
        if r.diagnostics.is_empty() {
            r.residue = reduce(&g).err();
        }
    }
    r.diagnostic_lines();
    if let Some(res) = &r.residue {
        r.line(format!("{}: not reducible: {res}", r.file));
    }
    r.line(format!("well-formed: {}", report.well_formed));
    r
}

pub fn codegen(path: &Path, output: Option<&Path>, outline: bool) -> Report {
    let (g, mut r) = match load(Report::new("codegen", name(path)), path, parse_activity) {
        Ok(x) => x,
        Err(r) => return r,
    };
    let report = lint::lint(&g);
    r.well_formed = Some(report.well_formed);
    r.diagnostics = report.diagnostics;
    r.diagnostic_lines();
    match reduce(&g) {
        Ok(tree) => {
            let code = if outline {
                emit_outline(&tree) + "\n"
            } else {
                emit_pseudocode(&tree)
            };
            match output {
                Some(out) => {
                    if let Err(e) = fs::write(out, &code) {
                        return r.io_error(format!("cannot write {}: {e}", out.display()));
                    }
                    r.line(format!("wrote {}", out.display()));
                }
                None => r.text.push_str(&code),
            }
            r.code = Some(code);
        }
        Err(res) => {
            r.line(format!("{}: not reducible: {res}", r.file));
            r.residue = Some(res);
        }
    }
    if !report.well_formed {
        r.exit = EXIT_FINDINGS;
    }
    r
}

/// `--budget`, else `WELLFORM_BUDGET`, else the default.
pub fn budget(flag: Option<u64>) -> Result<u64, String> {
    let b = match flag {
        Some(b) => b,
        None => match std::env::var("WELLFORM_BUDGET") {
            Ok(v) => v
                .trim()
                .parse()
                .map_err(|_| format!("WELLFORM_BUDGET must be a positive integer, got `{v}`"))?,
            Err(_) => DEFAULT_BUDGET,
        },
    };
    if b == 0 {
        return Err("the budget must be positive".into());
    }
    Ok(b)
}

pub fn bindings(set: &[String]) -> Result<Env, String> {
    let mut env = Env::new();
    for s in set {
        let (k, v) = s
            .split_once('=')
            .ok_or_else(|| format!("--set expects NAME=VALUE, got `{s}`"))?;
        let k = k.trim();
        let valid = k.chars().next().is_some_and(|c| c.is_ascii_alphabetic() || c == '_')
            && k.chars().all(|c| c.is_ascii_alphanumeric() || c == '_');
        if !valid {
            return Err(format!("`{k}` is not a variable name"));
        }
        let v = Value::parse(v).ok_or_else(|| format!("`{v}` is not an integer, true, or false"))?;
        env.set(k, v);
    }
    Ok(env)
}

pub fn simulate(path: &Path, env: &Env, budget: u64) -> Report {
    let mut r = Report::new("simulate", name(path));
    let text = match read(path) {
        Ok(t) => t,
        Err(e) => return r.io_error(e),
    };
    let trace = if path.extension().is_some_and(|e| e == "pc") {
        match run_pseudocode(&text, env, budget) {
            Ok(t) => t,
            Err(e) => {
                r.stderr = Some(format!("{}:{}:{}: error: {}", r.file, e.line, e.column, e.message));
                r.error = Some(ErrorInfo {
                    kind: "parse",
                    message: e.message,
                    line: Some(e.line),
                    column: Some(e.column),
                });
                r.exit = EXIT_PARSE;
                return r;
            }
        }
    } else {
        match parse_activity(&text) {
            Ok(g) => sim::run(&g, env, budget),
            Err(e) => return r.parse_error(&e),
        }
    };
    for (i, s) in trace.steps.iter().enumerate() {
        r.line(format!("{:>4}. {s}", i + 1));
    }
    r.line(format!("final: {{{}}}", trace.final_env));
    match &trace.detail {
        Some(d) => r.line(format!("terminated: {} ({d})", trace.terminated.as_str())),
        None => r.line(format!("terminated: {}", trace.terminated.as_str())),
    }
    if trace.terminated != Termination::Completed {
        r.exit = EXIT_FINDINGS;
    }
    r.trace = Some(trace);
    r
}

pub fn check_seq(path: &Path) -> Report {
    let (s, mut r) = match load(Report::new("check-seq", name(path)), path, parse_sequence) {
        Ok(x) => x,
        Err(r) => return r,
    };
    r.diagnostics = seqdiag::check_nesting(&s);
    r.diagnostic_lines();
    r.line(format!("nesting: {}", if r.diagnostics.is_empty() { "ok" } else { "broken" }));
    if !r.diagnostics.is_empty() {
        r.exit = EXIT_FINDINGS;
    }
    r
}

pub fn check_consistency(activity: &Path, sequence: &Path) -> Report {
    let r = Report::new("check-consistency", name(activity));
    let (a, r) = match load(r, activity, parse_activity) {
        Ok(x) => x,
        Err(r) => return r,
    };
    let (s, mut r) = match load(r, sequence, parse_sequence) {
        Ok(x) => x,
        Err(mut r) => {
            // Point the error at the sequence file.
            r.file = name(sequence);
            if let Some(e) = &r.error {
                if e.kind == "parse" {
                    r.stderr = r.stderr.map(|s| s.replacen(&name(activity), &name(sequence), 1));
                }
            }
            return r;
        }
    };
    match seqdiag::check_consistency(&a, &s) {
        Ok(c) => {
            for (x, y) in &c.matched_pairs {
                r.line(format!("  {x} <-> {y}"));
            }
            r.diagnostics = c.mismatches;
            r.diagnostic_lines();
            r.consistent = Some(c.consistent);
            r.matched_pairs = Some(c.matched_pairs);
        }
        Err(e) => {
            r.line(format!("{}: {e}", r.file));
            r.diagnostics = match e {
                ConsistencyError::NotWellFormed(d) => {
                    r.well_formed = Some(false);
                    d
                }
                ConsistencyError::BadNesting(d) => d,
            };
            r.diagnostic_lines();
            r.consistent = Some(false);
        }
    }
    let ok = r.consistent == Some(true);
    r.line(format!("consistent: {ok}"));
    if !ok {
        r.exit = EXIT_FINDINGS;
    }
    r
}

pub struct LoadedRubric {
    path: String,
    rubric: Rubric,
    reference: Option<ActivityGraph>,
}

pub fn load_rubric(path: &Path, mode: &str) -> Result<LoadedRubric, (i32, String)> {
    let text = read(path).map_err(|e| (EXIT_USAGE, format!("{}: {e}", path.display())))?;
    let rubric = parse_rubric(&text).map_err(|e| (EXIT_PARSE, e.render(&name(path))))?;
    if Some(rubric.mode) != Mode::from_keyword(mode) {
        return Err((
            EXIT_USAGE,
            format!("--mode {mode} does not match the rubric's mode {}", rubric.mode.keyword()),
        ));
    }
    let reference = match (rubric.mode, &rubric.reference) {
        (Mode::ElementDiff, None) => {
            return Err((EXIT_USAGE, format!("{}: element_diff rubrics need a `reference`", path.display())))
        }
        (Mode::ElementDiff, Some(rel)) => {
            let full = path.parent().unwrap_or(Path::new(".")).join(rel);
            let text = read(&full).map_err(|e| (EXIT_USAGE, format!("{}: {e}", full.display())))?;
            Some(parse_activity(&text).map_err(|e| (EXIT_PARSE, e.render(&name(&full))))?)
        }
        _ => None,
    };
    Ok(LoadedRubric {
        path: name(path),
        rubric,
        reference,
    })
}

fn points(x: f64) -> String {
    format!("{}", (x * 1000.0).round() / 1000.0)
}

pub fn grade(key: &LoadedRubric, path: &Path, penalty: Option<f64>) -> Report {
    let mut r = Report::new("grade", name(path));
    let text = match read(path) {
        Ok(t) => t,
        Err(e) => return r.io_error(e),
    };
    let sub = match key.rubric.mode {
        Mode::Annotation => Submission::Answers(grading::parse_lines(&text)),
        Mode::Hotspot => Submission::Marks(grading::parse_lines(&text).into_iter().collect()),
        Mode::Placement => match grading::parse_placements(&text) {
            Ok(p) => Submission::Placements(p),
            Err(e) => {
                let line = match &e {
                    grading::GradeError::Placement { line, .. } => Some(*line),
                    _ => None,
                };
                r.stderr = Some(format!("{}: error: {e}", r.file));
                r.error = Some(ErrorInfo {
                    kind: "parse",
                    message: e.to_string(),
                    line,
                    column: None,
                });
                r.exit = EXIT_PARSE;
                return r;
            }
        },
        Mode::ElementDiff => match parse_activity(&text) {
            Ok(student) => Submission::Diagram {
                reference: key.reference.clone().expect("element_diff rubrics carry a reference"),
                student,
            },
            Err(e) => return r.parse_error(&e),
        },
    };
    let report = match grading::grade(&key.rubric, &sub, GradeConfig { penalty }) {
        Ok(g) => g,
        Err(e) => return r.io_error(e.to_string()),
    };
    r.line(format!("rubric: {} ({}, {})", key.rubric.name, key.path, report.mode.keyword()));
    for it in &report.items {
        let mark = if it.matched { "x" } else { " " };
        let kind = it.kind.as_deref().map(|k| format!(" = {k}")).unwrap_or_default();
        r.line(format!("  [{mark}] {}{kind}  {}/{}", it.key, points(it.earned), points(it.expected)));
    }
    for p in &report.penalties {
        r.line(format!("  -{} {}", points(p.points), p.reason));
    }
    if !report.missing.is_empty() {
        r.line(format!("  missing: {}", report.missing.join(", ")));
    }
    if !report.extra.is_empty() {
        r.line(format!("  extra: {}", report.extra.join(", ")));
    }
    r.line(format!("score: {}/{}", points(report.earned), points(report.max)));
    if !report.full_marks() {
        r.exit = EXIT_FINDINGS;
    }
    r.grade = Some(report);
    r
}

pub fn explain(rule: &str) -> Report {
    let mut r = Report::new("explain", rule);
    match explain_rule(rule) {
        Ok(text) => {
            r.line(format!("{rule}: {text}"));
            r.explanation = Some(text.to_string());
        }
        Err(_) => {
            let known: Vec<&str> = lint::rule_ids().collect();
            return r.io_error(format!("unknown rule `{rule}`; known rules: {}", known.join(", ")));
        }
    }
    r
}
