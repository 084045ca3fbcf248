//! Recursive-descent parser producing locally-nameless terms.
//!
//! ```text
//! type  := capt? pure
//! capt  := "{" (elem ("," elem)*)? "}"        elem := ident | "*"
//! pure  := "Top" | ident | "box" type | "(" type ")"
//!        | "(" ident ":" type ")" "->" type | "[" ident "<:" pure "]" "->" type
//! expr  := "let" ident "=" expr "in" expr | "fun" "(" ident ":" type ")" "=>" expr
//!        | "tfun" "[" ident "<:" pure "]" "=>" expr | "box" ident | capt "unbox" ident
//!        | ident ident | ident "[" type "]" | ident | "(" expr ")"
//! ```

use std::collections::BTreeMap;

use super::diagnostics::{Diagnostic, Span};
use super::lexer::{lex, Tok, Token};
use crate::syntax::{Atom, CaptureSet, TermExpr, TermVar, TypeExpr, TypeVar, Var};
use crate::typing::TermPath;

/// A parsed program together with the source span of every subterm.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SourceProgram {
    pub text: String,
    pub term: TermExpr,
    pub spans: BTreeMap<TermPath, Span>,
}

impl SourceProgram {
    /// Span of the subterm at `path`, or of its nearest recorded ancestor.
    pub fn span_of(&self, path: &TermPath) -> Option<Span> {
        let mut p = path.0.clone();
        loop {
            if let Some(s) = self.spans.get(&TermPath(p.clone())) {
                return Some(*s);
            }
            p.pop()?;
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Kind {
    Term,
    Type,
}

type PResult<T> = Result<T, Diagnostic>;

struct Parser<'a> {
    toks: Vec<Token>,
    pos: usize,
    /// Binders in scope, innermost last.
    scope: Vec<(String, Kind)>,
    free: &'a BTreeMap<String, Atom>,
    spans: BTreeMap<TermPath, Span>,
}

/// Parse a closed program.
pub fn parse(text: &str) -> Result<SourceProgram, Vec<Diagnostic>> {
    parse_with_scope(text, &BTreeMap::new())
}

/// Parse with `free` naming atoms that may occur free in the text.
pub fn parse_with_scope(
    text: &str,
    free: &BTreeMap<String, Atom>,
) -> Result<SourceProgram, Vec<Diagnostic>> {
    let toks = lex(text).map_err(|d| vec![d])?;
    let mut p = Parser {
        toks,
        pos: 0,
        scope: Vec::new(),
        free,
        spans: BTreeMap::new(),
    };
    let term = p.expr(&TermPath::root()).map_err(|d| vec![d])?;
    p.expect(Tok::Eof, "end of input").map_err(|d| vec![d])?;
    Ok(SourceProgram {
        text: text.to_string(),
        term,
        spans: p.spans,
    })
}

/// Parse a standalone type.
pub fn parse_type(text: &str, free: &BTreeMap<String, Atom>) -> Result<TypeExpr, Vec<Diagnostic>> {
    let toks = lex(text).map_err(|d| vec![d])?;
    let mut p = Parser {
        toks,
        pos: 0,
        scope: Vec::new(),
        free,
        spans: BTreeMap::new(),
    };
    let t = p.ty().map_err(|d| vec![d])?;
    p.expect(Tok::Eof, "end of input").map_err(|d| vec![d])?;
    Ok(t)
}

/// Parse a standalone capture set such as `{a, *}`.
pub fn parse_capture_set(
    text: &str,
    free: &BTreeMap<String, Atom>,
) -> Result<CaptureSet, Vec<Diagnostic>> {
    let toks = lex(text).map_err(|d| vec![d])?;
    let mut p = Parser {
        toks,
        pos: 0,
        scope: Vec::new(),
        free,
        spans: BTreeMap::new(),
    };
    let c = p.capt().map_err(|d| vec![d])?;
    p.expect(Tok::Eof, "end of input").map_err(|d| vec![d])?;
    Ok(c)
}

fn starts_operand(t: &Tok) -> bool {
    matches!(
        t,
        Tok::Ident(_) | Tok::LParen | Tok::Fun | Tok::TFun | Tok::Box | Tok::Let | Tok::LBrace
    )
}

impl Parser<'_> {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn peek_at(&self, k: usize) -> &Tok {
        let i = (self.pos + k).min(self.toks.len() - 1);
        &self.toks[i].tok
    }

    fn span(&self) -> Span {
        self.toks[self.pos].span
    }

    fn prev_span(&self) -> Span {
        self.toks[self.pos.saturating_sub(1)].span
    }

    fn bump(&mut self) -> Token {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn unexpected(&self, what: &str) -> Diagnostic {
        Diagnostic::error(
            "E_SYNTAX",
            Some(self.span()),
            format!("expected {what}, found {}", self.peek().describe()),
        )
    }

    fn expect(&mut self, tok: Tok, what: &str) -> PResult<Span> {
        if *self.peek() == tok {
            Ok(self.bump().span)
        } else {
            Err(self.unexpected(what))
        }
    }

    fn ident(&mut self) -> PResult<(String, Span)> {
        match self.peek().clone() {
            Tok::Ident(name) => {
                let span = self.bump().span;
                Ok((name, span))
            }
            _ => Err(self.unexpected("an identifier")),
        }
    }

    fn resolve(&self, name: &str, kind: Kind) -> Option<Result<usize, Atom>> {
        let mut index = 0;
        for (n, k) in self.scope.iter().rev() {
            if *k == kind {
                if n == name {
                    return Some(Ok(index));
                }
                index += 1;
            }
        }
        match (self.free.get(name), kind) {
            (Some(a @ Atom::Term(_)), Kind::Term) | (Some(a @ Atom::Type(_)), Kind::Type) => {
                Some(Err(*a))
            }
            _ => None,
        }
    }

    fn term_var(&self, name: &str, span: Span) -> PResult<Var> {
        match self.resolve(name, Kind::Term) {
            Some(Ok(i)) => Ok(Var::Bound(i)),
            Some(Err(Atom::Term(x))) => Ok(Var::Free(x)),
            _ => Err(Diagnostic::error(
                "E_UNBOUND_IDENT",
                Some(span),
                format!("unbound variable `{name}`"),
            )),
        }
    }

    fn with_binder<T>(
        &mut self,
        name: String,
        kind: Kind,
        f: impl FnOnce(&mut Self) -> PResult<T>,
    ) -> PResult<T> {
        self.scope.push((name, kind));
        let out = f(self);
        self.scope.pop();
        out
    }

    fn operand(&mut self, role: &str) -> PResult<Var> {
        match self.peek().clone() {
            Tok::Ident(name) => {
                let span = self.bump().span;
                self.term_var(&name, span)
            }
            t if starts_operand(&t) => Err(self.mnf_violation(role)),
            _ => Err(self.unexpected(&format!("a variable as {role}"))),
        }
    }

    fn mnf_violation(&self, role: &str) -> Diagnostic {
        Diagnostic::error(
            "E_MNF_VIOLATION",
            Some(self.span()),
            format!("MNF violation: {role} must be a variable"),
        )
        .with_note("bind the intermediate result with `let` first")
    }

    // ---- types ----

    fn capt(&mut self) -> PResult<CaptureSet> {
        self.expect(Tok::LBrace, "`{`")?;
        let mut c = CaptureSet::empty();
        if *self.peek() != Tok::RBrace {
            loop {
                match self.peek().clone() {
                    Tok::Star => {
                        self.bump();
                        c.universal = true;
                    }
                    Tok::Ident(name) => {
                        let span = self.bump().span;
                        match self.term_var(&name, span)? {
                            Var::Bound(i) => {
                                c.bounds.insert(i);
                            }
                            Var::Free(x) => c.insert(x),
                        }
                    }
                    _ => return Err(self.unexpected("a variable or `*`")),
                }
                if *self.peek() == Tok::Comma {
                    self.bump();
                } else {
                    break;
                }
            }
        }
        self.expect(Tok::RBrace, "`}`")?;
        Ok(c)
    }

    fn ty(&mut self) -> PResult<TypeExpr> {
        if *self.peek() == Tok::LBrace {
            let c = self.capt()?;
            let start = self.span();
            let r = self.pure()?;
            if matches!(r, TypeExpr::Capt(..)) {
                return Err(Diagnostic::error(
                    "E_SYNTAX",
                    Some(start.join(self.prev_span())),
                    "a capture set must be followed by a pure type",
                ));
            }
            Ok(TypeExpr::capt(c, r))
        } else {
            self.pure()
        }
    }

    fn pure_only(&mut self) -> PResult<TypeExpr> {
        let start = self.span();
        let r = self.pure()?;
        if matches!(r, TypeExpr::Capt(..)) {
            return Err(Diagnostic::error(
                "E_SYNTAX",
                Some(start.join(self.prev_span())),
                "expected a pure type (no capture set)",
            ));
        }
        Ok(r)
    }

    fn pure(&mut self) -> PResult<TypeExpr> {
        match self.peek().clone() {
            Tok::Top => {
                self.bump();
                Ok(TypeExpr::Top)
            }
            Tok::Ident(name) => {
                let span = self.bump().span;
                match self.resolve(&name, Kind::Type) {
                    Some(Ok(i)) => Ok(TypeExpr::BVar(i)),
                    Some(Err(Atom::Type(x))) => Ok(TypeExpr::FVar(x)),
                    _ => Err(Diagnostic::error(
                        "E_UNBOUND_IDENT",
                        Some(span),
                        format!("unbound type variable `{name}`"),
                    )),
                }
            }
            Tok::Box => {
                self.bump();
                Ok(TypeExpr::boxed(self.ty()?))
            }
            Tok::LParen if matches!(self.peek_at(1), Tok::Ident(_)) && *self.peek_at(2) == Tok::Colon => {
                self.bump();
                let (name, _) = self.ident()?;
                self.expect(Tok::Colon, "`:`")?;
                let param = self.ty()?;
                self.expect(Tok::RParen, "`)`")?;
                self.expect(Tok::Arrow, "`->`")?;
                let result = self.with_binder(name, Kind::Term, |p| p.ty())?;
                Ok(TypeExpr::arrow(param, result))
            }
            Tok::LParen => {
                self.bump();
                let t = self.ty()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(t)
            }
            Tok::LBracket => {
                self.bump();
                let (name, _) = self.ident()?;
                self.expect(Tok::Sub, "`<:`")?;
                let bound = self.pure_only()?;
                self.expect(Tok::RBracket, "`]`")?;
                self.expect(Tok::Arrow, "`->`")?;
                let result = self.with_binder(name, Kind::Type, |p| p.ty())?;
                Ok(TypeExpr::tall(bound, result))
            }
            _ => Err(self.unexpected("a type")),
        }
    }

    // ---- terms ----

    fn expr(&mut self, path: &TermPath) -> PResult<TermExpr> {
        let start = self.span();
        let e = self.expr_inner(path)?;
        self.spans.insert(path.clone(), start.join(self.prev_span()));
        Ok(e)
    }

    fn expr_inner(&mut self, path: &TermPath) -> PResult<TermExpr> {
        match self.peek().clone() {
            Tok::Let => {
                self.bump();
                let (name, _) = self.ident()?;
                self.expect(Tok::Eq, "`=`")?;
                let bound = self.expr(&path.child(0))?;
                self.expect(Tok::In, "`in`")?;
                let body = self.with_binder(name, Kind::Term, |p| p.expr(&path.child(1)))?;
                Ok(TermExpr::let_in(bound, body))
            }
            Tok::Fun => {
                self.bump();
                self.expect(Tok::LParen, "`(`")?;
                let (name, _) = self.ident()?;
                self.expect(Tok::Colon, "`:`")?;
                let param = self.ty()?;
                self.expect(Tok::RParen, "`)`")?;
                self.expect(Tok::FatArrow, "`=>`")?;
                let body = self.with_binder(name, Kind::Term, |p| p.expr(&path.child(0)))?;
                Ok(TermExpr::abs(param, body))
            }
            Tok::TFun => {
                self.bump();
                self.expect(Tok::LBracket, "`[`")?;
                let (name, _) = self.ident()?;
                self.expect(Tok::Sub, "`<:`")?;
                let bound = self.pure_only()?;
                self.expect(Tok::RBracket, "`]`")?;
                self.expect(Tok::FatArrow, "`=>`")?;
                let body = self.with_binder(name, Kind::Type, |p| p.expr(&path.child(0)))?;
                Ok(TermExpr::tabs(bound, body))
            }
            Tok::Box => {
                self.bump();
                let x = self.operand("the operand of `box`")?;
                self.no_trailing_operand()?;
                Ok(TermExpr::Box(x))
            }
            Tok::LBrace => {
                let c = self.capt()?;
                self.expect(Tok::Unbox, "`unbox`")?;
                let x = self.operand("the operand of `unbox`")?;
                self.no_trailing_operand()?;
                Ok(TermExpr::Unbox(c, x))
            }
            Tok::LParen => {
                self.bump();
                let e = self.expr_inner(path)?;
                self.expect(Tok::RParen, "`)`")?;
                self.no_trailing_operand()?;
                Ok(e)
            }
            Tok::Ident(name) => {
                let span = self.bump().span;
                let head = self.term_var(&name, span)?;
                match self.peek().clone() {
                    Tok::Ident(_) => {
                        let arg = self.operand("a function argument")?;
                        self.no_trailing_operand()?;
                        Ok(TermExpr::App(head, arg))
                    }
                    Tok::LBracket => {
                        // Capturing arguments parse; the type checker rejects them.
                        self.bump();
                        let r = self.ty()?;
                        self.expect(Tok::RBracket, "`]`")?;
                        self.no_trailing_operand()?;
                        Ok(TermExpr::TApp(head, r))
                    }
                    t if starts_operand(&t) => Err(self.mnf_violation("a function argument")),
                    _ => Ok(TermExpr::Var(head)),
                }
            }
            _ => Err(self.unexpected("an expression")),
        }
    }

    /// An elimination form may not itself be applied: `f x y` and `(f x) y`
    /// are rejected.
    fn no_trailing_operand(&self) -> PResult<()> {
        if starts_operand(self.peek()) || *self.peek() == Tok::LBracket {
            Err(self.mnf_violation("the function being applied"))
        } else {
            Ok(())
        }
    }
}

/// Name → atom map for a list of term atoms.
pub fn term_scope<'a, I: IntoIterator<Item = (&'a str, TermVar)>>(names: I) -> BTreeMap<String, Atom> {
    names.into_iter().map(|(n, x)| (n.to_string(), Atom::Term(x))).collect()
}

pub fn type_scope<'a, I: IntoIterator<Item = (&'a str, TypeVar)>>(names: I) -> BTreeMap<String, Atom> {
    names.into_iter().map(|(n, x)| (n.to_string(), Atom::Type(x))).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn term(src: &str) -> TermExpr {
        parse(src).unwrap_or_else(|d| panic!("{d:?}")).term
    }

    fn empty_top() -> TypeExpr {
        TypeExpr::capt(CaptureSet::empty(), TypeExpr::Top)
    }

    #[test]
    fn identity() {
        assert_eq!(term("fun (x : {} Top) => x"), TermExpr::abs(empty_top(), TermExpr::bound(0)));
    }

    #[test]
    fn self_application() {
        let e = term("let f = fun (x:{}Top)=>x in f f");
        assert_eq!(
            e,
            TermExpr::let_in(
                TermExpr::abs(empty_top(), TermExpr::bound(0)),
                TermExpr::App(Var::Bound(0), Var::Bound(0))
            )
        );
    }

    #[test]
    fn unbox_with_scope() {
        let (err, p) = (TermVar(0), TermVar(1));
        let scope = term_scope([("err", err), ("p", p)]);
        let prog = parse_with_scope("{err} unbox p", &scope).unwrap();
        assert_eq!(prog.term, TermExpr::Unbox(CaptureSet::singleton(err), Var::Free(p)));
        let glyph = parse_with_scope("{err} ∘ p", &scope).unwrap();
        assert_eq!(glyph.term, prog.term);
    }

    #[test]
    fn binders_resolve_to_indices_by_kind() {
        // The type binder X does not count toward term indices.
        let e = term("fun (c : {*} Top) => tfun [X <: Top] => fun (y : X) => {c} unbox y");
        let expected = TermExpr::abs(
            TypeExpr::capt(CaptureSet::universal(), TypeExpr::Top),
            TermExpr::tabs(
                TypeExpr::Top,
                TermExpr::abs(
                    TypeExpr::BVar(0),
                    TermExpr::Unbox(CaptureSet::bound(1), Var::Bound(0)),
                ),
            ),
        );
        assert_eq!(e, expected);
    }

    #[test]
    fn dependent_arrow_types() {
        let scope = BTreeMap::new();
        let t = parse_type("(x : {} Top) -> {x} Top", &scope).unwrap();
        assert_eq!(t, TypeExpr::arrow(empty_top(), TypeExpr::capt(CaptureSet::bound(0), TypeExpr::Top)));
        let t = parse_type("[X <: Top] -> (y : X) -> box {y} X", &scope).unwrap();
        assert_eq!(
            t,
            TypeExpr::tall(
                TypeExpr::Top,
                TypeExpr::arrow(
                    TypeExpr::BVar(0),
                    TypeExpr::boxed(TypeExpr::capt(CaptureSet::bound(0), TypeExpr::BVar(0)))
                )
            )
        );
    }

    #[test]
    fn mnf_violations() {
        for src in [
            "fun (f : Top) => f (f f)",
            "fun (f : Top) => fun (x : Top) => f x x",
            "fun (f : Top) => box (fun (x : Top) => x)",
            "fun (f : Top) => f fun (x : Top) => x",
        ] {
            let d = parse(src).unwrap_err();
            assert_eq!(d[0].code, "E_MNF_VIOLATION", "{src}");
        }
    }

    #[test]
    fn unbound_and_syntax_errors() {
        assert_eq!(parse("x").unwrap_err()[0].code, "E_UNBOUND_IDENT");
        assert_eq!(parse("fun (x : Y) => x").unwrap_err()[0].code, "E_UNBOUND_IDENT");
        assert_eq!(parse("let x = in x").unwrap_err()[0].code, "E_SYNTAX");
        assert_eq!(parse("fun (x : {} {} Top) => x").unwrap_err()[0].code, "E_SYNTAX");
        assert_eq!(parse("tfun [X <: {} Top] => Top").unwrap_err()[0].code, "E_SYNTAX");
    }

    #[test]
    fn spans_cover_subterms() {
        let prog = parse("let f = fun (x : Top) => x in f f").unwrap();
        assert_eq!(prog.spans[&TermPath::root()], Span::new(0, 33));
        assert_eq!(prog.spans[&TermPath(vec![0])], Span::new(8, 26));
        assert_eq!(prog.spans[&TermPath(vec![1])], Span::new(30, 33));
        assert_eq!(prog.span_of(&TermPath(vec![1, 4])), Some(Span::new(30, 33)));
    }
}
