//! Algorithmic typing for MNF terms.
//!
//! Variables are typed precisely: `x : C R` in the environment gives `x` the
//! type `{x} R`, and subcapturing expands `{x}` back to `C` when needed.
//! Abstractions capture `cv` of their body. Boxing hides a variable's
//! capture set; unboxing reveals it again under an annotation that must be
//! in scope.
//!
//! A `let` whose body type mentions the bound variable is rescued by
//! widening: covariant occurrences of `x` in capture sets are replaced by
//! the capture set of `x`'s own type. Contravariant occurrences cannot be
//! widened and are reported as [`TypingErrorKind::EscapingVariable`].

use std::fmt;

use thiserror::Error;

use crate::binding::{
    close_term_var_in_type, close_type_var_in_type, open_term_var_in_term, open_term_var_in_type,
    open_type_var_in_term, open_type_var_in_type,
};
use crate::subtyping::{subcapture, subtype};
use crate::syntax::{AtomSupply, CaptureSet, TermExpr, TermVar, TypeExpr, Var};
use crate::wellformed::{wf_type, Binding, Env};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TypingErrorKind {
    UnboundVariable,
    NotAFunction,
    NotATypeFunction,
    NotABox,
    ArgumentMismatch,
    ImpureTypeArgument,
    UniversalInstantiation,
    EscapingVariable,
    IllFormedAnnotation,
    UnboxCaptureMismatch,
}

impl TypingErrorKind {
    pub const ALL: [TypingErrorKind; 10] = [
        TypingErrorKind::UnboundVariable,
        TypingErrorKind::NotAFunction,
        TypingErrorKind::NotATypeFunction,
        TypingErrorKind::NotABox,
        TypingErrorKind::ArgumentMismatch,
        TypingErrorKind::ImpureTypeArgument,
        TypingErrorKind::UniversalInstantiation,
        TypingErrorKind::EscapingVariable,
        TypingErrorKind::IllFormedAnnotation,
        TypingErrorKind::UnboxCaptureMismatch,
    ];

    /// Stable diagnostic code.
    pub fn code(self) -> &'static str {
        match self {
            TypingErrorKind::UnboundVariable => "E_UNBOUND_VARIABLE",
            TypingErrorKind::NotAFunction => "E_NOT_A_FUNCTION",
            TypingErrorKind::NotATypeFunction => "E_NOT_A_TYPE_FUNCTION",
            TypingErrorKind::NotABox => "E_NOT_A_BOX",
            TypingErrorKind::ArgumentMismatch => "E_ARGUMENT_MISMATCH",
            TypingErrorKind::ImpureTypeArgument => "E_IMPURE_TYPE_ARGUMENT",
            TypingErrorKind::UniversalInstantiation => "E_UNIVERSAL_INSTANTIATION",
            TypingErrorKind::EscapingVariable => "E_ESCAPING_VARIABLE",
            TypingErrorKind::IllFormedAnnotation => "E_ILL_FORMED_ANNOTATION",
            TypingErrorKind::UnboxCaptureMismatch => "E_UNBOX_CAPTURE_MISMATCH",
        }
    }
}

/// Position of a subterm: child indices from the root. `fun`/`tfun` bodies
/// are child 0; a `let` has its bound term at 0 and its body at 1.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TermPath(pub Vec<u8>);

impl TermPath {
    pub fn root() -> Self {
        Self::default()
    }

    pub fn child(&self, i: u8) -> Self {
        let mut v = self.0.clone();
        v.push(i);
        TermPath(v)
    }
}

impl fmt::Display for TermPath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("/")?;
        for (i, step) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str("/")?;
            }
            write!(f, "{step}")?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, Error, PartialEq, Eq)]
#[error("{}: {detail}", kind.code())]
pub struct TypingError {
    pub kind: TypingErrorKind,
    pub path: TermPath,
    pub detail: String,
}

pub type TypingResult = Result<TypeExpr, TypingError>;

/// Captured variables of a term: free term atoms in operand positions and
/// unbox annotations. Boxes hide what they hold.
pub fn cv(e: &TermExpr) -> CaptureSet {
    let mut out = CaptureSet::empty();
    collect_cv(e, &mut out);
    out
}

fn collect_cv(e: &TermExpr, out: &mut CaptureSet) {
    let var = |v: &Var, out: &mut CaptureSet| {
        if let Var::Free(x) = v {
            out.insert(*x);
        }
    };
    match e {
        TermExpr::Var(x) => var(x, out),
        TermExpr::Box(_) => {}
        TermExpr::App(f, a) => {
            var(f, out);
            var(a, out);
        }
        TermExpr::TApp(f, _) => var(f, out),
        TermExpr::Unbox(c, x) => {
            out.frees.extend(c.frees.iter().copied());
            out.universal |= c.universal;
            var(x, out);
        }
        TermExpr::Abs(_, body) | TermExpr::TAbs(_, body) => collect_cv(body, out),
        TermExpr::Let(a, b) => {
            collect_cv(a, out);
            collect_cv(b, out);
        }
    }
}

/// Infer the type of `e` under `g`. `g` is assumed well formed and `e`
/// locally closed.
pub fn infer_type(g: &Env, e: &TermExpr) -> TypingResult {
    let mut supply = AtomSupply::avoiding(g.all_atoms());
    supply.reserve(e.free_atoms());
    Checker { supply }.infer(g, e, &TermPath::root())
}

/// Inference followed by subsumption against `t`.
pub fn check_against(g: &Env, e: &TermExpr, t: &TypeExpr) -> bool {
    infer_type(g, e).is_ok_and(|u| subtype(g, &u, t))
}

/// Remove the term atom `x` from `t`, widening covariant occurrences to
/// `widen_to`. Fails if `x` occurs contravariantly.
pub fn avoid(t: &TypeExpr, x: TermVar, widen_to: &CaptureSet) -> Option<TypeExpr> {
    avoid_at(t, x, widen_to, true)
}

fn avoid_at(t: &TypeExpr, x: TermVar, widen_to: &CaptureSet, positive: bool) -> Option<TypeExpr> {
    Some(match t {
        TypeExpr::BVar(_) | TypeExpr::FVar(_) | TypeExpr::Top => t.clone(),
        TypeExpr::Capt(c, r) => {
            let c = if c.contains(x) {
                if !positive {
                    return None;
                }
                let mut c = c.clone();
                c.remove(x);
                c.union(widen_to)
            } else {
                c.clone()
            };
            TypeExpr::capt(c, avoid_at(r, x, widen_to, positive)?)
        }
        TypeExpr::Box(inner) => TypeExpr::boxed(avoid_at(inner, x, widen_to, positive)?),
        TypeExpr::Arrow(param, result) => TypeExpr::arrow(
            avoid_at(param, x, widen_to, !positive)?,
            avoid_at(result, x, widen_to, positive)?,
        ),
        TypeExpr::TAll(bound, result) => TypeExpr::tall(
            avoid_at(bound, x, widen_to, !positive)?,
            avoid_at(result, x, widen_to, positive)?,
        ),
    })
}

/// Chase type variables through their bounds until a structural head shows.
pub fn expose<'a>(g: &'a Env, mut r: &'a TypeExpr) -> &'a TypeExpr {
    let mut hops = 0;
    while let TypeExpr::FVar(x) = r {
        match g.lookup_type(*x) {
            Some(bound) if hops <= g.len() => {
                r = bound;
                hops += 1;
            }
            _ => break,
        }
    }
    r
}

pub(crate) struct Checker {
    pub(crate) supply: AtomSupply,
}

fn err(kind: TypingErrorKind, path: &TermPath, detail: impl Into<String>) -> TypingError {
    TypingError {
        kind,
        path: path.clone(),
        detail: detail.into(),
    }
}

impl Checker {
    fn var_type(&self, g: &Env, v: Var, path: &TermPath) -> TypingResult {
        let x = match v {
            Var::Free(x) => x,
            Var::Bound(i) => {
                return Err(err(
                    TypingErrorKind::UnboundVariable,
                    path,
                    format!("dangling bound index {i}"),
                ))
            }
        };
        match g.lookup_term(x) {
            Some(t) => Ok(TypeExpr::capt(CaptureSet::singleton(x), t.pure_part().clone())),
            None => Err(err(
                TypingErrorKind::UnboundVariable,
                path,
                format!("{x} is not bound"),
            )),
        }
    }

    pub(crate) fn infer(&mut self, g: &Env, e: &TermExpr, path: &TermPath) -> TypingResult {
        use TypingErrorKind::*;
        match e {
            TermExpr::Var(v) => self.var_type(g, *v, path),
            TermExpr::Abs(param, body) => {
                if !param.is_type() || !wf_type(g, param) {
                    return Err(err(IllFormedAnnotation, path, "parameter type is not well formed"));
                }
                let x = self.supply.fresh_term();
                let g2 = g.with_fresh(Binding::Term(x, param.clone()));
                let body_ty = self.infer(&g2, &open_term_var_in_term(body, 0, x), &path.child(0))?;
                Ok(TypeExpr::capt(
                    cv(e),
                    TypeExpr::arrow(param.clone(), close_term_var_in_type(&body_ty, 0, x)),
                ))
            }
            TermExpr::TAbs(bound, body) => {
                if !bound.is_pure() || !wf_type(g, bound) {
                    return Err(err(IllFormedAnnotation, path, "type bound must be a well-formed pure type"));
                }
                let x = self.supply.fresh_type();
                let g2 = g.with_fresh(Binding::Type(x, bound.clone()));
                let opened = open_type_var_in_term(body, 0, &TypeExpr::FVar(x));
                let body_ty = self.infer(&g2, &opened, &path.child(0))?;
                Ok(TypeExpr::capt(
                    cv(e),
                    TypeExpr::tall(bound.clone(), close_type_var_in_type(&body_ty, 0, x)),
                ))
            }
            TermExpr::App(f, a) => {
                let f_ty = self.var_type(g, *f, path)?;
                let (param, result) = match expose(g, f_ty.pure_part()) {
                    TypeExpr::Arrow(p, r) => ((**p).clone(), (**r).clone()),
                    _ => return Err(err(NotAFunction, path, "applied variable is not a function")),
                };
                let a_ty = self.var_type(g, *a, path)?;
                if !subtype(g, &a_ty, &param) {
                    return Err(err(
                        ArgumentMismatch,
                        path,
                        "argument type is not a subtype of the parameter type",
                    ));
                }
                let y = a.as_free().expect("var_type accepted a bound index");
                Ok(open_term_var_in_type(&result, 0, y))
            }
            TermExpr::TApp(f, arg) => {
                let f_ty = self.var_type(g, *f, path)?;
                let (bound, result) = match expose(g, f_ty.pure_part()) {
                    TypeExpr::TAll(b, r) => ((**b).clone(), (**r).clone()),
                    _ => {
                        return Err(err(
                            NotATypeFunction,
                            path,
                            "type-applied variable is not a type function",
                        ))
                    }
                };
                if let TypeExpr::Capt(c, _) = arg {
                    let detail = if c.universal {
                        "type argument captures the universal capability {*}; box it first"
                    } else {
                        "type argument has a capture set; box it first"
                    };
                    return Err(err(ImpureTypeArgument, path, detail));
                }
                if !arg.is_pure() || !wf_type(g, arg) {
                    return Err(err(IllFormedAnnotation, path, "type argument is not well formed"));
                }
                if !subtype(g, arg, &bound) {
                    return Err(err(ArgumentMismatch, path, "type argument exceeds its bound"));
                }
                Ok(open_type_var_in_type(&result, 0, arg))
            }
            TermExpr::Box(x) => {
                let x_ty = self.var_type(g, *x, path)?;
                Ok(TypeExpr::capt(CaptureSet::empty(), TypeExpr::boxed(x_ty)))
            }
            TermExpr::Unbox(c, x) => {
                if c.universal {
                    return Err(err(
                        UniversalInstantiation,
                        path,
                        "cannot unbox under the universal capture set {*}",
                    ));
                }
                if !c.is_locally_closed() || c.frees.iter().any(|y| g.lookup_term(*y).is_none()) {
                    return Err(err(
                        IllFormedAnnotation,
                        path,
                        "unbox annotation mentions variables that are not in scope",
                    ));
                }
                let x_ty = self.var_type(g, *x, path)?;
                let inner = match expose(g, x_ty.pure_part()) {
                    TypeExpr::Box(inner) => (**inner).clone(),
                    _ => return Err(err(NotABox, path, "unboxed variable does not hold a box")),
                };
                let (boxed_c, r) = inner.split();
                if !subcapture(g, &boxed_c, c) {
                    return Err(err(
                        UnboxCaptureMismatch,
                        path,
                        "unbox annotation does not cover the boxed capture set",
                    ));
                }
                Ok(TypeExpr::capt(c.clone(), r.clone()))
            }
            TermExpr::Let(bound, body) => {
                let bound_ty = self.infer(g, bound, &path.child(0))?;
                let x = self.supply.fresh_term();
                let g2 = g.with_fresh(Binding::Term(x, bound_ty.clone()));
                let body_ty = self.infer(&g2, &open_term_var_in_term(body, 0, x), &path.child(1))?;
                avoid(&body_ty, x, &bound_ty.split().0).ok_or_else(|| {
                    err(
                        EscapingVariable,
                        path,
                        "let-bound variable occurs contravariantly in the body's type",
                    )
                })
            }
        }
    }
}
