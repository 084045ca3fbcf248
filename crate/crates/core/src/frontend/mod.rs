//! Surface syntax: lexing, parsing, printing and source-level diagnostics.

pub mod diagnostics;
pub mod lexer;
pub mod parser;
pub mod printer;

pub use diagnostics::{Diagnostic, Severity, Span};
pub use parser::{parse, parse_capture_set, parse_type, parse_with_scope, SourceProgram};
pub use printer::{atom_scope, print_capture_set, print_state, print_term, print_type};

use crate::syntax::TypeExpr;
use crate::typing::infer_type;
use crate::wellformed::Env;

/// Parse and type a closed program. Typing errors carry the span of the
/// offending subterm.
pub fn check_source(text: &str) -> Result<(SourceProgram, TypeExpr), Vec<Diagnostic>> {
    let program = parse(text)?;
    match infer_type(&Env::new(), &program.term) {
        Ok(t) => Ok((program, t)),
        Err(e) => {
            let span = program.span_of(&e.path);
            Err(vec![Diagnostic::from_typing(&e, span)])
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn typing_errors_point_at_the_subterm() {
        let src = "let f = fun (x : {} Top) => x in tfun [X <: Top] => f [X]";
        let d = check_source(src).unwrap_err();
        assert_eq!(d[0].code, "E_NOT_A_TYPE_FUNCTION");
        let span = d[0].span.unwrap();
        assert_eq!(&src[span.start..span.end], "f [X]");
    }

    #[test]
    fn well_typed_source() {
        let (_, t) = check_source("let f = fun (x : {} Top) => x in f f").unwrap();
        assert_eq!(print_type(&t), "{} Top");
    }
}
