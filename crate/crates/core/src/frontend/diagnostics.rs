use std::fmt::Write as _;

use crate::typing::{TypingError, TypingErrorKind};

/// Byte range into the source text.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Span {
    pub start: usize,
    pub end: usize,
}

impl Span {
    pub fn new(start: usize, end: usize) -> Self {
        Self { start, end }
    }

    pub fn join(self, other: Span) -> Span {
        Span::new(self.start.min(other.start), self.end.max(other.end))
    }

    /// 1-based line and column of the start of the span.
    pub fn line_col(&self, src: &str) -> (usize, usize) {
        let upto = &src[..self.start.min(src.len())];
        let line = upto.matches('\n').count() + 1;
        let col = upto.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
        (line, col)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Severity {
    Error,
    Warning,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Diagnostic {
    pub severity: Severity,
    pub span: Option<Span>,
    pub code: &'static str,
    pub message: String,
    pub note: Option<String>,
}

impl Diagnostic {
    pub fn error(code: &'static str, span: Option<Span>, message: impl Into<String>) -> Self {
        Self {
            severity: Severity::Error,
            span,
            code,
            message: message.into(),
            note: None,
        }
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }

    pub fn from_typing(e: &TypingError, span: Option<Span>) -> Self {
        let message = match e.kind {
            TypingErrorKind::UnboundVariable => "unbound variable",
            TypingErrorKind::NotAFunction => "not a function",
            TypingErrorKind::NotATypeFunction => "not a type function",
            TypingErrorKind::NotABox => "not a box",
            TypingErrorKind::ArgumentMismatch => "argument type mismatch",
            TypingErrorKind::ImpureTypeArgument => "impure type argument",
            TypingErrorKind::UniversalInstantiation => "universal capture set cannot be instantiated",
            TypingErrorKind::EscapingVariable => "let-bound variable escapes its scope",
            TypingErrorKind::IllFormedAnnotation => "ill-formed type annotation",
            TypingErrorKind::UnboxCaptureMismatch => "unbox annotation too small",
        };
        Diagnostic::error(e.kind.code(), span, message).with_note(e.detail.clone())
    }

    pub fn is_error(&self) -> bool {
        self.severity == Severity::Error
    }

    /// `error[CODE]: message` followed by a location and an optional note.
    pub fn render(&self, file: &str, src: &str) -> String {
        let mut out = String::new();
        let sev = match self.severity {
            Severity::Error => "error",
            Severity::Warning => "warning",
        };
        let _ = writeln!(out, "{sev}[{}]: {}", self.code, self.message);
        if let Some(span) = self.span {
            let (line, col) = span.line_col(src);
            let _ = writeln!(out, "  --> {file}:{line}:{col}");
        }
        if let Some(note) = &self.note {
            let _ = writeln!(out, "  note: {note}");
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::typing::TermPath;

    #[test]
    fn line_and_column() {
        let src = "let x =\n  y in x";
        assert_eq!(Span::new(0, 3).line_col(src), (1, 1));
        assert_eq!(Span::new(10, 11).line_col(src), (2, 3));
    }

    #[test]
    fn every_typing_error_has_its_own_code() {
        let mut codes: Vec<_> = TypingErrorKind::ALL.iter().map(|k| k.code()).collect();
        codes.sort();
        codes.dedup();
        assert_eq!(codes.len(), TypingErrorKind::ALL.len());
        for kind in TypingErrorKind::ALL {
            let e = TypingError {
                kind,
                path: TermPath::root(),
                detail: String::new(),
            };
            assert_eq!(Diagnostic::from_typing(&e, None).code, kind.code());
        }
    }

    #[test]
    fn rendering() {
        let d = Diagnostic::error("E_SYNTAX", Some(Span::new(4, 5)), "oops").with_note("hint");
        assert_eq!(d.render("f.ccbox", "let ?"), "error[E_SYNTAX]: oops\n  --> f.ccbox:1:5\n  note: hint\n");
    }
}
