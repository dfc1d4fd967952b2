//! Span-carrying diagnostics and their two output formats.

use std::fmt;

use serde::Serialize;

use crate::syntax::Span;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Error,
    Warning,
}

impl fmt::Display for Severity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Severity::Error => "error",
            Severity::Warning => "warning",
        })
    }
}

/// Diagnostic categories. The string forms are stable.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum DiagnosticKind {
    Lexical,
    Syntax,
    DuplicateDefinition,
    DuplicateLabel,
    DuplicateBinder,
    UnboundName,
    Type,
    Sort,
    Guard,
    Replication,
    Runtime,
}

impl DiagnosticKind {
    pub fn as_str(self) -> &'static str {
        match self {
            DiagnosticKind::Lexical => "lexical",
            DiagnosticKind::Syntax => "syntax",
            DiagnosticKind::DuplicateDefinition => "duplicate-definition",
            DiagnosticKind::DuplicateLabel => "duplicate-label",
            DiagnosticKind::DuplicateBinder => "duplicate-binder",
            DiagnosticKind::UnboundName => "unbound-name",
            DiagnosticKind::Type => "type",
            DiagnosticKind::Sort => "sort",
            DiagnosticKind::Guard => "guard",
            DiagnosticKind::Replication => "replication",
            DiagnosticKind::Runtime => "runtime",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Diagnostic {
    pub kind: DiagnosticKind,
    pub severity: Severity,
    pub span: Span,
    pub message: String,
}

impl Diagnostic {
    pub fn error(kind: DiagnosticKind, span: Span, message: impl Into<String>) -> Diagnostic {
        Diagnostic {
            kind,
            severity: Severity::Error,
            span,
            message: message.into(),
        }
    }

    pub fn warning(kind: DiagnosticKind, span: Span, message: impl Into<String>) -> Diagnostic {
        Diagnostic {
            kind,
            severity: Severity::Warning,
            span,
            message: message.into(),
        }
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.severity, self.message)
    }
}

/// Maps byte offsets to 1-based line and column numbers.
pub struct LineIndex {
    line_starts: Vec<usize>,
    len: usize,
}

impl LineIndex {
    pub fn new(src: &str) -> LineIndex {
        let mut line_starts = vec![0];
        line_starts.extend(src.match_indices('\n').map(|(i, _)| i + 1));
        LineIndex {
            line_starts,
            len: src.len(),
        }
    }

    pub fn line_col(&self, offset: usize) -> (usize, usize) {
        let offset = offset.min(self.len);
        let line = match self.line_starts.binary_search(&offset) {
            Ok(i) => i,
            Err(i) => i - 1,
        };
        (line + 1, offset - self.line_starts[line] + 1)
    }
}

#[derive(Serialize)]
struct Record<'a> {
    file: &'a str,
    line: usize,
    col: usize,
    severity: Severity,
    kind: DiagnosticKind,
    message: &'a str,
}

/// `FILE:LINE:COL: SEVERITY: MESSAGE`, one per line.
pub fn render_text(file: &str, src: &str, diags: &[Diagnostic]) -> String {
    let index = LineIndex::new(src);
    let mut out = String::new();
    for d in diags {
        let (line, col) = index.line_col(d.span.start);
        out.push_str(&format!(
            "{file}:{line}:{col}: {}: {}\n",
            d.severity, d.message
        ));
    }
    out
}

/// One JSON object per line.
pub fn render_records(file: &str, src: &str, diags: &[Diagnostic]) -> String {
    let index = LineIndex::new(src);
    let mut out = String::new();
    for d in diags {
        let (line, col) = index.line_col(d.span.start);
        let record = Record {
            file,
            line,
            col,
            severity: d.severity,
            kind: d.kind,
            message: &d.message,
        };
        out.push_str(&serde_json::to_string(&record).expect("diagnostic record serializes"));
        out.push('\n');
    }
    out
}
