//! The per-file result envelope shared by all commands.

use serde::Serialize;
use wellform_core::dsl::ParseError;
use wellform_core::grading::GradeReport;
use wellform_core::lint::Diagnostic;
use wellform_core::sim::Trace;
use wellform_core::structure::Residue;

use crate::{EXIT_PARSE, EXIT_USAGE};

#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct ErrorInfo {
    pub kind: &'static str,
    pub message: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub line: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub column: Option<usize>,
}

/// One file's outcome: the JSON document plus its text rendering and exit code.
#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct Report {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: &'static str,
    pub file: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub well_formed: Option<bool>,
    pub diagnostics: Vec<Diagnostic>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub residue: Option<Residue>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub code: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trace: Option<Trace>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub consistent: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub matched_pairs: Option<Vec<(String, String)>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grade: Option<GradeReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub explanation: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<ErrorInfo>,
    #[serde(skip)]
    pub text: String,
    #[serde(skip)]
    pub stderr: Option<String>,
    #[serde(skip)]
    pub exit: i32,
}

impl Report {
    pub fn new(command: &'static str, file: impl Into<String>) -> Self {
        Report {
            tool: "wellform",
            version: env!("CARGO_PKG_VERSION"),
            command,
            file: file.into(),
            well_formed: None,
            diagnostics: Vec::new(),
            residue: None,
            code: None,
            trace: None,
            consistent: None,
            matched_pairs: None,
            grade: None,
            explanation: None,
            error: None,
            text: String::new(),
            stderr: None,
            exit: 0,
        }
    }

    pub fn parse_error(mut self, e: &ParseError) -> Self {
        self.stderr = Some(e.render(&self.file));
        self.error = Some(ErrorInfo {
            kind: "parse",
            message: e.message.clone(),
            line: Some(e.line),
            column: Some(e.column),
        });
        self.exit = EXIT_PARSE;
        self
    }

    pub fn io_error(mut self, message: String) -> Self {
        self.stderr = Some(format!("wellform: {}: {message}", self.file));
        self.error = Some(ErrorInfo {
            kind: "io",
            message,
            line: None,
            column: None,
        });
        self.exit = EXIT_USAGE;
        self
    }

    pub fn line(&mut self, s: impl AsRef<str>) {
        self.text.push_str(s.as_ref());
        self.text.push('\n');
    }

    pub fn diagnostic_lines(&mut self) {
        let lines: Vec<String> = self
            .diagnostics
            .iter()
            .map(|d| format!("{}: {} {}: {}", self.file, d.rule, d.locus, d.message))
            .collect();
        for l in lines {
            self.line(l);
        }
    }
}
