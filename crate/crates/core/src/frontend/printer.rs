//! Printing back to the surface syntax.
//!
//! Binders are named by depth (`x0`, `x1`, ... for terms and `X0`, ... for
//! types), free atoms by their id (`a3`, `A7`). The output of [`print_term`]
//! parses back to the same term under [`atom_scope`].

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::machine::MachineState;
use crate::syntax::{Atom, CaptureSet, TermExpr, TypeExpr, Var};

#[derive(Clone, Copy, Default)]
struct Depth {
    term: usize,
    ty: usize,
}

impl Depth {
    fn term_binder(self) -> (String, Depth) {
        (format!("x{}", self.term), Depth { term: self.term + 1, ..self })
    }

    fn type_binder(self) -> (String, Depth) {
        (format!("X{}", self.ty), Depth { ty: self.ty + 1, ..self })
    }

    fn term_name(self, i: usize) -> String {
        match self.term.checked_sub(i + 1) {
            Some(level) => format!("x{level}"),
            None => format!("?{i}"),
        }
    }

    fn type_name(self, i: usize) -> String {
        match self.ty.checked_sub(i + 1) {
            Some(level) => format!("X{level}"),
            None => format!("?{i}"),
        }
    }
}

/// Name → atom map under which printed free atoms parse back.
pub fn atom_scope<I: IntoIterator<Item = Atom>>(atoms: I) -> BTreeMap<String, Atom> {
    atoms.into_iter().map(|a| (a.to_string(), a)).collect()
}

fn var(d: Depth, v: &Var) -> String {
    match v {
        Var::Bound(i) => d.term_name(*i),
        Var::Free(x) => x.to_string(),
    }
}

fn capture_set(out: &mut String, d: Depth, c: &CaptureSet) {
    let mut elems: Vec<String> = c.frees.iter().map(|x| x.to_string()).collect();
    elems.extend(c.bounds.iter().map(|i| d.term_name(*i)));
    if c.universal {
        elems.push("*".into());
    }
    let _ = write!(out, "{{{}}}", elems.join(", "));
}

fn ty(out: &mut String, d: Depth, t: &TypeExpr) {
    match t {
        TypeExpr::BVar(i) => out.push_str(&d.type_name(*i)),
        TypeExpr::FVar(x) => {
            let _ = write!(out, "{x}");
        }
        TypeExpr::Top => out.push_str("Top"),
        TypeExpr::Box(inner) => {
            out.push_str("box ");
            ty(out, d, inner);
        }
        TypeExpr::Capt(c, r) => {
            capture_set(out, d, c);
            out.push(' ');
            if matches!(**r, TypeExpr::Capt(..)) {
                out.push('(');
                ty(out, d, r);
                out.push(')');
            } else {
                ty(out, d, r);
            }
        }
        TypeExpr::Arrow(param, result) => {
            let (name, inner) = d.term_binder();
            let _ = write!(out, "({name} : ");
            ty(out, d, param);
            out.push_str(") -> ");
            ty(out, inner, result);
        }
        TypeExpr::TAll(bound, result) => {
            let (name, inner) = d.type_binder();
            let _ = write!(out, "[{name} <: ");
            ty(out, d, bound);
            out.push_str("] -> ");
            ty(out, inner, result);
        }
    }
}

fn term(out: &mut String, d: Depth, e: &TermExpr) {
    match e {
        TermExpr::Var(v) => out.push_str(&var(d, v)),
        TermExpr::Abs(param, body) => {
            let (name, inner) = d.term_binder();
            let _ = write!(out, "fun ({name} : ");
            ty(out, d, param);
            out.push_str(") => ");
            term(out, inner, body);
        }
        TermExpr::TAbs(bound, body) => {
            let (name, inner) = d.type_binder();
            let _ = write!(out, "tfun [{name} <: ");
            ty(out, d, bound);
            out.push_str("] => ");
            term(out, inner, body);
        }
        TermExpr::Box(x) => {
            let _ = write!(out, "box {}", var(d, x));
        }
        TermExpr::App(f, x) => {
            let _ = write!(out, "{} {}", var(d, f), var(d, x));
        }
        TermExpr::TApp(f, r) => {
            let _ = write!(out, "{} [", var(d, f));
            ty(out, d, r);
            out.push(']');
        }
        TermExpr::Unbox(c, x) => {
            capture_set(out, d, c);
            let _ = write!(out, " unbox {}", var(d, x));
        }
        TermExpr::Let(bound, body) => {
            let (name, inner) = d.term_binder();
            let _ = write!(out, "let {name} = ");
            term(out, d, bound);
            out.push_str(" in ");
            term(out, inner, body);
        }
    }
}

pub fn print_type(t: &TypeExpr) -> String {
    let mut out = String::new();
    ty(&mut out, Depth::default(), t);
    out
}

pub fn print_capture_set(c: &CaptureSet) -> String {
    let mut out = String::new();
    capture_set(&mut out, Depth::default(), c);
    out
}

pub fn print_term(e: &TermExpr) -> String {
    let mut out = String::new();
    term(&mut out, Depth::default(), e);
    out
}

/// `⟨a0 = v; ... | let x0 = • in e :: ... | focus⟩`, outermost frame first.
pub fn print_state(s: &MachineState) -> String {
    let store = if s.store.is_empty() {
        "[]".to_string()
    } else {
        s.store
            .bindings()
            .iter()
            .map(|(x, v)| format!("{x} = {}", print_term(v)))
            .collect::<Vec<_>>()
            .join("; ")
    };
    let stack = if s.stack.is_empty() {
        "[]".to_string()
    } else {
        s.stack
            .iter()
            .map(|f| {
                let mut out = String::from("let x0 = • in ");
                term(&mut out, Depth { term: 1, ty: 0 }, &f.body);
                out
            })
            .collect::<Vec<_>>()
            .join(" :: ")
    };
    format!("⟨{store} | {stack} | {}⟩", print_term(&s.focus))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::parser::{parse, parse_with_scope};
    use crate::syntax::TermVar;

    #[test]
    fn closed_terms_round_trip() {
        for src in [
            "fun (x : {} Top) => x",
            "let f = fun (x : {} Top) => x in f f",
            "tfun [X <: Top] => fun (y : X) => box y",
            "fun (c : {*} Top) => fun (b : box {c} Top) => {c} unbox b",
            "tfun [X <: Top] => fun (f : {*} [Y <: X] -> (z : Y) -> {z} Top) => f [X]",
            "fun (c : {*} Top) => let x = let y = c in y in fun (k : {c, x} Top) => k",
        ] {
            let e = parse(src).unwrap().term;
            let printed = print_term(&e);
            assert_eq!(parse(&printed).unwrap().term, e, "{printed}");
        }
    }

    #[test]
    fn canonical_names() {
        let e = parse("let f = fun (x : {} Top) => x in f f").unwrap().term;
        assert_eq!(print_term(&e), "let x0 = fun (x0 : {} Top) => x0 in x0 x0");
        let t = crate::frontend::parser::parse_type("[A <: Top] -> (y : A) -> {y, *} A", &BTreeMap::new()).unwrap();
        assert_eq!(print_type(&t), "[X0 <: Top] -> (x0 : X0) -> {x0, *} X0");
    }

    #[test]
    fn free_atoms_round_trip() {
        let e = TermExpr::App(Var::Free(TermVar(3)), Var::Free(TermVar(12)));
        let printed = print_term(&e);
        assert_eq!(printed, "a3 a12");
        let back = parse_with_scope(&printed, &atom_scope(e.free_atoms())).unwrap();
        assert_eq!(back.term, e);
    }

    #[test]
    fn states() {
        let s = MachineState::initial(parse("fun (x : Top) => x").unwrap().term);
        assert_eq!(print_state(&s), "⟨[] | [] | fun (x0 : Top) => x0⟩");
    }
}
