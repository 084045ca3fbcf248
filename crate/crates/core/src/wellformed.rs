//! Typing environments and well-formedness of types.

use std::collections::BTreeSet;
use std::sync::Arc;

use thiserror::Error;

use crate::binding::{open_term_var_in_type, open_type_var_in_type};
use crate::syntax::{Atom, AtomSupply, CaptureSet, TermVar, TypeExpr, TypeVar};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Binding {
    /// `x : T`
    Term(TermVar, TypeExpr),
    /// `X <: R`, with `R` pure.
    Type(TypeVar, TypeExpr),
}

impl Binding {
    pub fn atom(&self) -> Atom {
        match self {
            Binding::Term(x, _) => Atom::Term(*x),
            Binding::Type(x, _) => Atom::Type(*x),
        }
    }

    pub fn ty(&self) -> &TypeExpr {
        match self {
            Binding::Term(_, t) | Binding::Type(_, t) => t,
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("atom {0:?} is already bound in the environment")]
pub struct DuplicateBinding(pub Atom);

/// An ordered telescope of bindings, oldest first.
///
/// Extension returns a new environment and leaves `self` untouched.
/// Bindings are shared between an environment and its extensions.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Env {
    bindings: Vec<Arc<Binding>>,
}

impl Env {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn bindings(&self) -> impl DoubleEndedIterator<Item = &Binding> + ExactSizeIterator + '_ {
        self.bindings.iter().map(|b| &**b)
    }

    pub fn len(&self) -> usize {
        self.bindings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bindings.is_empty()
    }

    pub fn contains(&self, a: Atom) -> bool {
        self.bindings.iter().any(|b| b.atom() == a)
    }

    pub fn with(&self, b: Binding) -> Result<Env, DuplicateBinding> {
        if self.contains(b.atom()) {
            return Err(DuplicateBinding(b.atom()));
        }
        let mut bindings = self.bindings.clone();
        bindings.push(Arc::new(b));
        Ok(Env { bindings })
    }

    pub fn with_term(&self, x: TermVar, t: TypeExpr) -> Result<Env, DuplicateBinding> {
        self.with(Binding::Term(x, t))
    }

    pub fn with_type(&self, x: TypeVar, bound: TypeExpr) -> Result<Env, DuplicateBinding> {
        self.with(Binding::Type(x, bound))
    }

    /// Extend with a binding whose atom was just drawn from a supply that
    /// avoids this environment.
    pub(crate) fn with_fresh(&self, b: Binding) -> Env {
        debug_assert!(!self.contains(b.atom()));
        let mut bindings = self.bindings.clone();
        bindings.push(Arc::new(b));
        Env { bindings }
    }

    pub fn lookup_term(&self, x: TermVar) -> Option<&TypeExpr> {
        self.bindings().rev().find_map(|b| match b {
            Binding::Term(y, t) if *y == x => Some(t),
            _ => None,
        })
    }

    pub fn lookup_type(&self, x: TypeVar) -> Option<&TypeExpr> {
        self.bindings().rev().find_map(|b| match b {
            Binding::Type(y, t) if *y == x => Some(t),
            _ => None,
        })
    }

    /// The capture set of the type bound to `x`; pure types capture nothing.
    pub fn capture_of(&self, x: TermVar) -> Option<CaptureSet> {
        self.lookup_term(x).map(|t| t.split().0)
    }

    pub fn domain(&self) -> BTreeSet<Atom> {
        self.bindings().map(Binding::atom).collect()
    }

    pub fn term_domain(&self) -> BTreeSet<TermVar> {
        self.bindings()
            .filter_map(|b| match b {
                Binding::Term(x, _) => Some(*x),
                Binding::Type(..) => None,
            })
            .collect()
    }

    pub fn type_domain(&self) -> BTreeSet<TypeVar> {
        self.bindings()
            .filter_map(|b| match b {
                Binding::Type(x, _) => Some(*x),
                Binding::Term(..) => None,
            })
            .collect()
    }

    /// Every atom mentioned anywhere in the environment.
    pub fn all_atoms(&self) -> BTreeSet<Atom> {
        let mut out = BTreeSet::new();
        for b in self.bindings() {
            out.insert(b.atom());
            b.ty().collect_atoms(&mut out);
        }
        out
    }

    /// The strict prefix before position `i`.
    pub fn prefix(&self, i: usize) -> Env {
        Env {
            bindings: self.bindings[..i].to_vec(),
        }
    }
}

impl FromIterator<Binding> for Env {
    fn from_iter<I: IntoIterator<Item = Binding>>(iter: I) -> Self {
        Env {
            bindings: iter.into_iter().map(Arc::new).collect(),
        }
    }
}

fn capture_set_wf(g: &Env, c: &CaptureSet) -> bool {
    c.is_locally_closed()
        && c.frees
            .iter()
            .all(|x| g.lookup_term(*x).is_some())
}

/// `Γ ⊢ T wf`.
///
/// The result of a dependent arrow is checked with the parameter bound in the
/// environment, so that `(x : S) -> {x} R` is well formed.
pub fn wf_type(g: &Env, t: &TypeExpr) -> bool {
    let mut supply = AtomSupply::avoiding(g.all_atoms());
    supply.reserve(t.free_atoms());
    wf_type_with(g, t, &mut supply)
}

fn wf_type_with(g: &Env, t: &TypeExpr, supply: &mut AtomSupply) -> bool {
    match t {
        TypeExpr::BVar(_) => false,
        TypeExpr::Top => true,
        TypeExpr::FVar(x) => g.lookup_type(*x).is_some(),
        TypeExpr::Capt(c, r) => capture_set_wf(g, c) && r.is_pure() && wf_type_with(g, r, supply),
        TypeExpr::Box(inner) => wf_type_with(g, inner, supply),
        TypeExpr::Arrow(param, result) => {
            if !param.is_type() || !wf_type_with(g, param, supply) {
                return false;
            }
            let x = supply.fresh_term();
            let g2 = g.with_fresh(Binding::Term(x, (**param).clone()));
            wf_type_with(&g2, &open_term_var_in_type(result, 0, x), supply)
        }
        TypeExpr::TAll(bound, result) => {
            if !bound.is_pure() || !wf_type_with(g, bound, supply) {
                return false;
            }
            let x = supply.fresh_type();
            let g2 = g.with_fresh(Binding::Type(x, (**bound).clone()));
            wf_type_with(&g2, &open_type_var_in_type(result, 0, &TypeExpr::FVar(x)), supply)
        }
    }
}

/// `Γ wf`: atoms are distinct and each binding is well formed in its strict
/// prefix. Type bindings must have pure bounds; term bindings must be types.
pub fn wf_env(g: &Env) -> bool {
    let mut seen = BTreeSet::new();
    for (i, b) in g.bindings().enumerate() {
        if !seen.insert(b.atom()) {
            return false;
        }
        let ok_kind = match b {
            Binding::Term(_, t) => t.is_type(),
            Binding::Type(_, r) => r.is_pure(),
        };
        if !ok_kind || !wf_type(&g.prefix(i), b.ty()) {
            return false;
        }
    }
    true
}
