//! Opening, closing, and substitution for the locally-nameless syntax.
//!
//! Term indices count enclosing term binders (`fun`, `let`, arrow results);
//! type indices count enclosing type binders (`tfun`, `TAll` results). Each
//! operation takes the depth of the index it targets, incrementing it only
//! under binders of its own kind.

use crate::syntax::{CaptureSet, TermExpr, TermVar, TypeExpr, TypeVar, Var};

pub fn open_term_var_in_capture_set(c: &CaptureSet, depth: usize, x: TermVar) -> CaptureSet {
    if !c.bounds.contains(&depth) {
        return c.clone();
    }
    let mut out = c.clone();
    out.bounds.remove(&depth);
    out.frees.insert(x);
    out
}

pub fn close_term_var_in_capture_set(c: &CaptureSet, depth: usize, x: TermVar) -> CaptureSet {
    if !c.frees.contains(&x) {
        return c.clone();
    }
    let mut out = c.clone();
    out.frees.remove(&x);
    out.bounds.insert(depth);
    out
}

pub fn subst_atom_in_capture_set(c: &CaptureSet, from: TermVar, to: TermVar) -> CaptureSet {
    if !c.frees.contains(&from) {
        return c.clone();
    }
    let mut out = c.clone();
    out.frees.remove(&from);
    out.frees.insert(to);
    out
}

/// Replace type index `depth` with `r`.
pub fn open_type_var_in_type(t: &TypeExpr, depth: usize, r: &TypeExpr) -> TypeExpr {
    match t {
        TypeExpr::BVar(i) if *i == depth => r.clone(),
        TypeExpr::BVar(_) | TypeExpr::FVar(_) | TypeExpr::Top => t.clone(),
        TypeExpr::Box(inner) => TypeExpr::boxed(open_type_var_in_type(inner, depth, r)),
        TypeExpr::Capt(c, inner) => TypeExpr::capt(c.clone(), open_type_var_in_type(inner, depth, r)),
        TypeExpr::Arrow(param, result) => TypeExpr::arrow(
            open_type_var_in_type(param, depth, r),
            open_type_var_in_type(result, depth, r),
        ),
        TypeExpr::TAll(bound, result) => TypeExpr::tall(
            open_type_var_in_type(bound, depth, r),
            open_type_var_in_type(result, depth + 1, r),
        ),
    }
}

/// Replace free type atom `x` with type index `depth`.
pub fn close_type_var_in_type(t: &TypeExpr, depth: usize, x: TypeVar) -> TypeExpr {
    match t {
        TypeExpr::FVar(y) if *y == x => TypeExpr::BVar(depth),
        TypeExpr::BVar(_) | TypeExpr::FVar(_) | TypeExpr::Top => t.clone(),
        TypeExpr::Box(inner) => TypeExpr::boxed(close_type_var_in_type(inner, depth, x)),
        TypeExpr::Capt(c, inner) => TypeExpr::capt(c.clone(), close_type_var_in_type(inner, depth, x)),
        TypeExpr::Arrow(param, result) => TypeExpr::arrow(
            close_type_var_in_type(param, depth, x),
            close_type_var_in_type(result, depth, x),
        ),
        TypeExpr::TAll(bound, result) => TypeExpr::tall(
            close_type_var_in_type(bound, depth, x),
            close_type_var_in_type(result, depth + 1, x),
        ),
    }
}

/// Replace term index `depth` with atom `x` in every capture set of `t`.
pub fn open_term_var_in_type(t: &TypeExpr, depth: usize, x: TermVar) -> TypeExpr {
    map_capture_sets(t, depth, &|c, d| open_term_var_in_capture_set(c, d, x))
}

pub fn close_term_var_in_type(t: &TypeExpr, depth: usize, x: TermVar) -> TypeExpr {
    map_capture_sets(t, depth, &|c, d| close_term_var_in_capture_set(c, d, x))
}

pub fn subst_term_atom_in_type(t: &TypeExpr, from: TermVar, to: TermVar) -> TypeExpr {
    map_capture_sets(t, 0, &|c, _| subst_atom_in_capture_set(c, from, to))
}

/// Rebuild `t` with `f` applied to every capture set, passing the term depth
/// (shifted under arrow results) at which the set occurs.
pub fn map_capture_sets<F>(t: &TypeExpr, depth: usize, f: &F) -> TypeExpr
where
    F: Fn(&CaptureSet, usize) -> CaptureSet,
{
    match t {
        TypeExpr::BVar(_) | TypeExpr::FVar(_) | TypeExpr::Top => t.clone(),
        TypeExpr::Box(inner) => TypeExpr::boxed(map_capture_sets(inner, depth, f)),
        TypeExpr::Capt(c, inner) => TypeExpr::capt(f(c, depth), map_capture_sets(inner, depth, f)),
        TypeExpr::Arrow(param, result) => TypeExpr::arrow(
            map_capture_sets(param, depth, f),
            map_capture_sets(result, depth + 1, f),
        ),
        TypeExpr::TAll(bound, result) => TypeExpr::tall(
            map_capture_sets(bound, depth, f),
            map_capture_sets(result, depth, f),
        ),
    }
}

/// Replace the free type atom `from` with `r`.
pub fn subst_type_atom_in_type(t: &TypeExpr, from: TypeVar, r: &TypeExpr) -> TypeExpr {
    match t {
        TypeExpr::FVar(y) if *y == from => r.clone(),
        TypeExpr::BVar(_) | TypeExpr::FVar(_) | TypeExpr::Top => t.clone(),
        TypeExpr::Box(inner) => TypeExpr::boxed(subst_type_atom_in_type(inner, from, r)),
        TypeExpr::Capt(c, inner) => TypeExpr::capt(c.clone(), subst_type_atom_in_type(inner, from, r)),
        TypeExpr::Arrow(param, result) => TypeExpr::arrow(
            subst_type_atom_in_type(param, from, r),
            subst_type_atom_in_type(result, from, r),
        ),
        TypeExpr::TAll(bound, result) => TypeExpr::tall(
            subst_type_atom_in_type(bound, from, r),
            subst_type_atom_in_type(result, from, r),
        ),
    }
}

fn open_var(v: Var, depth: usize, x: TermVar) -> Var {
    match v {
        Var::Bound(i) if i == depth => Var::Free(x),
        v => v,
    }
}

fn close_var(v: Var, depth: usize, x: TermVar) -> Var {
    match v {
        Var::Free(y) if y == x => Var::Bound(depth),
        v => v,
    }
}

fn rename_var(v: Var, from: TermVar, to: TermVar) -> Var {
    match v {
        Var::Free(y) if y == from => Var::Free(to),
        v => v,
    }
}

/// Apply `on_var` to every variable operand, `on_capt` to every capture set
/// (unbox annotations included), and `on_type` to every type annotation,
/// tracking term and type binder depths.
fn map_term<V, C, T>(
    e: &TermExpr,
    term_depth: usize,
    type_depth: usize,
    on_var: &V,
    on_capt: &C,
    on_type: &T,
) -> TermExpr
where
    V: Fn(Var, usize) -> Var,
    C: Fn(&CaptureSet, usize) -> CaptureSet,
    T: Fn(&TypeExpr, usize, usize) -> TypeExpr,
{
    let go = |e: &TermExpr, td: usize, yd: usize| map_term(e, td, yd, on_var, on_capt, on_type);
    match e {
        TermExpr::Var(v) => TermExpr::Var(on_var(*v, term_depth)),
        TermExpr::Box(v) => TermExpr::Box(on_var(*v, term_depth)),
        TermExpr::App(f, a) => TermExpr::App(on_var(*f, term_depth), on_var(*a, term_depth)),
        TermExpr::TApp(f, t) => {
            TermExpr::TApp(on_var(*f, term_depth), on_type(t, term_depth, type_depth))
        }
        TermExpr::Unbox(c, x) => TermExpr::Unbox(on_capt(c, term_depth), on_var(*x, term_depth)),
        TermExpr::Abs(t, body) => TermExpr::abs(
            on_type(t, term_depth, type_depth),
            go(body, term_depth + 1, type_depth),
        ),
        TermExpr::TAbs(t, body) => TermExpr::tabs(
            on_type(t, term_depth, type_depth),
            go(body, term_depth, type_depth + 1),
        ),
        TermExpr::Let(bound, body) => TermExpr::let_in(
            go(bound, term_depth, type_depth),
            go(body, term_depth + 1, type_depth),
        ),
    }
}

/// Replace term index `depth` with `x`, in operands and in every capture set.
pub fn open_term_var_in_term(e: &TermExpr, depth: usize, x: TermVar) -> TermExpr {
    map_term(
        e,
        depth,
        0,
        &|v, d| open_var(v, d, x),
        &|c, d| open_term_var_in_capture_set(c, d, x),
        &|t, d, _| open_term_var_in_type(t, d, x),
    )
}

pub fn close_term_var_in_term(e: &TermExpr, depth: usize, x: TermVar) -> TermExpr {
    map_term(
        e,
        depth,
        0,
        &|v, d| close_var(v, d, x),
        &|c, d| close_term_var_in_capture_set(c, d, x),
        &|t, d, _| close_term_var_in_type(t, d, x),
    )
}

/// Replace type index `depth` with `r` in every type annotation of `e`.
pub fn open_type_var_in_term(e: &TermExpr, depth: usize, r: &TypeExpr) -> TermExpr {
    map_term(
        e,
        0,
        depth,
        &|v, _| v,
        &|c, _| c.clone(),
        &|t, _, d| open_type_var_in_type(t, d, r),
    )
}

pub fn close_type_var_in_term(e: &TermExpr, depth: usize, x: TypeVar) -> TermExpr {
    map_term(
        e,
        0,
        depth,
        &|v, _| v,
        &|c, _| c.clone(),
        &|t, _, d| close_type_var_in_type(t, d, x),
    )
}

/// Rename the free term atom `from` to `to` throughout `e`.
pub fn subst_term_atom_in_term(e: &TermExpr, from: TermVar, to: TermVar) -> TermExpr {
    map_term(
        e,
        0,
        0,
        &|v, _| rename_var(v, from, to),
        &|c, _| subst_atom_in_capture_set(c, from, to),
        &|t, _, _| subst_term_atom_in_type(t, from, to),
    )
}

pub fn subst_type_atom_in_term(e: &TermExpr, from: TypeVar, r: &TypeExpr) -> TermExpr {
    map_term(
        e,
        0,
        0,
        &|v, _| v,
        &|c, _| c.clone(),
        &|t, _, _| subst_type_atom_in_type(t, from, r),
    )
}

/// Rename every free term atom through `f`, in operands, capture sets, and
/// annotations.
pub fn rename_term_atoms_in_term<F: Fn(TermVar) -> TermVar>(e: &TermExpr, f: &F) -> TermExpr {
    let capt = |c: &CaptureSet| CaptureSet {
        frees: c.frees.iter().map(|x| f(*x)).collect(),
        ..c.clone()
    };
    map_term(
        e,
        0,
        0,
        &|v, _| match v {
            Var::Free(x) => Var::Free(f(x)),
            v => v,
        },
        &|c, _| capt(c),
        &|t, _, _| map_capture_sets(t, 0, &|c, _| capt(c)),
    )
}
