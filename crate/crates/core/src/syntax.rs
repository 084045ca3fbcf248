//! Locally-nameless syntax for capture sets, types, and MNF terms.
//!
//! Types and pure types share one inductive [`TypeExpr`]; whether a type is
//! pure is decided by [`TypeExpr::is_pure`] rather than by the Rust type
//! system. Bound variables are de Bruijn indices, free variables are atoms.
//! Term binders (`fun`, `let`, dependent arrows) and type binders (`tfun`,
//! bounded quantifiers) use separate index spaces.

use std::collections::BTreeSet;
use std::fmt;

/// A free term variable.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TermVar(pub u32);

/// A free type variable.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TypeVar(pub u32);

/// An atom of either kind.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Atom {
    Term(TermVar),
    Type(TypeVar),
}

impl Atom {
    pub fn id(self) -> u32 {
        match self {
            Atom::Term(TermVar(id)) | Atom::Type(TypeVar(id)) => id,
        }
    }
}

impl fmt::Display for TermVar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "a{}", self.0)
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Atom::Term(x) => x.fmt(f),
            Atom::Type(x) => x.fmt(f),
        }
    }
}

impl fmt::Display for TypeVar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "A{}", self.0)
    }
}

/// Monotone supply of fresh atoms.
///
/// Ids are shared between both kinds, so a term atom and a type atom drawn
/// from the same supply never share an id.
#[derive(Clone, Debug, Default)]
pub struct AtomSupply {
    next: u32,
}

impl AtomSupply {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn starting_at(next: u32) -> Self {
        Self { next }
    }

    /// A supply whose atoms are all distinct from `used`.
    pub fn avoiding<I: IntoIterator<Item = Atom>>(used: I) -> Self {
        let next = used.into_iter().map(|a| a.id() + 1).max().unwrap_or(0);
        Self { next }
    }

    /// Bump the supply past every atom in `used`.
    pub fn reserve<I: IntoIterator<Item = Atom>>(&mut self, used: I) {
        for a in used {
            self.next = self.next.max(a.id() + 1);
        }
    }

    pub fn fresh_term(&mut self) -> TermVar {
        let id = self.next;
        self.next += 1;
        TermVar(id)
    }

    pub fn fresh_type(&mut self) -> TypeVar {
        let id = self.next;
        self.next += 1;
        TypeVar(id)
    }

    pub fn peek(&self) -> u32 {
        self.next
    }
}

/// A capture set: free term atoms, bound term indices, and the universal
/// capability `*`.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CaptureSet {
    pub frees: BTreeSet<TermVar>,
    pub bounds: BTreeSet<usize>,
    pub universal: bool,
}

impl CaptureSet {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn universal() -> Self {
        Self {
            universal: true,
            ..Self::default()
        }
    }

    pub fn singleton(x: TermVar) -> Self {
        Self::from_vars([x])
    }

    pub fn bound(index: usize) -> Self {
        Self {
            bounds: BTreeSet::from([index]),
            ..Self::default()
        }
    }

    pub fn from_vars<I: IntoIterator<Item = TermVar>>(vars: I) -> Self {
        Self {
            frees: vars.into_iter().collect(),
            ..Self::default()
        }
    }

    pub fn with_universal(mut self) -> Self {
        self.universal = true;
        self
    }

    pub fn is_empty(&self) -> bool {
        self.frees.is_empty() && self.bounds.is_empty() && !self.universal
    }

    /// No bound indices remain (the `C capt` judgment).
    pub fn is_locally_closed(&self) -> bool {
        self.bounds.is_empty()
    }

    pub fn contains(&self, x: TermVar) -> bool {
        self.frees.contains(&x)
    }

    pub fn union(&self, other: &CaptureSet) -> CaptureSet {
        CaptureSet {
            frees: self.frees.union(&other.frees).copied().collect(),
            bounds: self.bounds.union(&other.bounds).copied().collect(),
            universal: self.universal || other.universal,
        }
    }

    pub fn insert(&mut self, x: TermVar) {
        self.frees.insert(x);
    }

    pub fn remove(&mut self, x: TermVar) -> bool {
        self.frees.remove(&x)
    }
}

/// Types. A single syntax covers capturing types `C R` and pure types `R`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum TypeExpr {
    /// Bound type variable (de Bruijn index into enclosing `TAll`/`TAbs`).
    BVar(usize),
    /// Free type variable.
    FVar(TypeVar),
    Top,
    Box(Box<TypeExpr>),
    Capt(CaptureSet, Box<TypeExpr>),
    /// Dependent function type `(x : param) -> result`; the result binds the
    /// parameter as term index 0.
    Arrow(Box<TypeExpr>, Box<TypeExpr>),
    /// Bounded universal `[X <: bound] -> result`; the result binds type
    /// index 0.
    TAll(Box<TypeExpr>, Box<TypeExpr>),
}

impl TypeExpr {
    pub fn boxed(t: TypeExpr) -> Self {
        TypeExpr::Box(Box::new(t))
    }

    pub fn capt(c: CaptureSet, r: TypeExpr) -> Self {
        TypeExpr::Capt(c, Box::new(r))
    }

    pub fn arrow(param: TypeExpr, result: TypeExpr) -> Self {
        TypeExpr::Arrow(Box::new(param), Box::new(result))
    }

    pub fn tall(bound: TypeExpr, result: TypeExpr) -> Self {
        TypeExpr::TAll(Box::new(bound), Box::new(result))
    }

    /// Split into its capture set and pure part. A type without a capture set
    /// at the root is viewed as capturing nothing.
    pub fn split(&self) -> (CaptureSet, &TypeExpr) {
        match self {
            TypeExpr::Capt(c, r) => (c.clone(), r),
            r => (CaptureSet::empty(), r),
        }
    }

    /// The pure part, stripping a root capture set if there is one.
    pub fn pure_part(&self) -> &TypeExpr {
        match self {
            TypeExpr::Capt(_, r) => r,
            r => r,
        }
    }

    /// The `R pure` judgment.
    pub fn is_pure(&self) -> bool {
        match self {
            TypeExpr::FVar(_) | TypeExpr::Top => true,
            // Dangling index: not locally closed.
            TypeExpr::BVar(_) | TypeExpr::Capt(..) => false,
            TypeExpr::Box(t) => t.is_type(),
            TypeExpr::Arrow(param, result) => {
                let x = AtomSupply::avoiding(self.free_atoms()).fresh_term();
                param.is_type() && crate::binding::open_term_var_in_type(result, 0, x).is_type()
            }
            TypeExpr::TAll(bound, result) => {
                let x = AtomSupply::avoiding(self.free_atoms()).fresh_type();
                bound.is_pure()
                    && crate::binding::open_type_var_in_type(result, 0, &TypeExpr::FVar(x))
                        .is_type()
            }
        }
    }

    /// The `T type` judgment.
    pub fn is_type(&self) -> bool {
        match self {
            TypeExpr::Capt(c, r) => c.is_locally_closed() && r.is_pure(),
            t => t.is_pure(),
        }
    }

    /// Free atoms, including those in capture sets.
    pub fn free_atoms(&self) -> BTreeSet<Atom> {
        let mut out = BTreeSet::new();
        self.collect_atoms(&mut out);
        out
    }

    pub(crate) fn collect_atoms(&self, out: &mut BTreeSet<Atom>) {
        match self {
            TypeExpr::BVar(_) | TypeExpr::Top => {}
            TypeExpr::FVar(a) => {
                out.insert(Atom::Type(*a));
            }
            TypeExpr::Box(t) => t.collect_atoms(out),
            TypeExpr::Capt(c, r) => {
                c.collect_atoms(out);
                r.collect_atoms(out);
            }
            TypeExpr::Arrow(a, b) | TypeExpr::TAll(a, b) => {
                a.collect_atoms(out);
                b.collect_atoms(out);
            }
        }
    }

    pub fn size(&self) -> usize {
        match self {
            TypeExpr::BVar(_) | TypeExpr::FVar(_) | TypeExpr::Top => 1,
            TypeExpr::Box(t) | TypeExpr::Capt(_, t) => 1 + t.size(),
            TypeExpr::Arrow(a, b) | TypeExpr::TAll(a, b) => 1 + a.size() + b.size(),
        }
    }
}

impl CaptureSet {
    pub fn free_atoms(&self) -> BTreeSet<Atom> {
        let mut out = BTreeSet::new();
        self.collect_atoms(&mut out);
        out
    }

    pub(crate) fn collect_atoms(&self, out: &mut BTreeSet<Atom>) {
        out.extend(self.frees.iter().map(|x| Atom::Term(*x)));
    }
}

/// A variable operand: MNF eliminations only ever take variables.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Var {
    Bound(usize),
    Free(TermVar),
}

impl Var {
    pub fn as_free(self) -> Option<TermVar> {
        match self {
            Var::Free(x) => Some(x),
            Var::Bound(_) => None,
        }
    }
}

/// Terms in monadic normal form.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum TermExpr {
    Var(Var),
    /// `fun (x : T) => e`; the body binds term index 0.
    Abs(TypeExpr, Box<TermExpr>),
    /// `tfun [X <: R] => e`; the body binds type index 0.
    TAbs(TypeExpr, Box<TermExpr>),
    /// `box x`
    Box(Var),
    /// `x y`
    App(Var, Var),
    /// `x [R]`
    TApp(Var, TypeExpr),
    /// `C unbox x`
    Unbox(CaptureSet, Var),
    /// `let x = e1 in e2`; `e2` binds term index 0.
    Let(Box<TermExpr>, Box<TermExpr>),
}

impl TermExpr {
    pub fn free(x: TermVar) -> Self {
        TermExpr::Var(Var::Free(x))
    }

    pub fn bound(i: usize) -> Self {
        TermExpr::Var(Var::Bound(i))
    }

    pub fn abs(param: TypeExpr, body: TermExpr) -> Self {
        TermExpr::Abs(param, Box::new(body))
    }

    pub fn tabs(bound: TypeExpr, body: TermExpr) -> Self {
        TermExpr::TAbs(bound, Box::new(body))
    }

    pub fn let_in(bound: TermExpr, body: TermExpr) -> Self {
        TermExpr::Let(Box::new(bound), Box::new(body))
    }

    /// Answers of the machine: abstractions and boxes.
    pub fn is_value(&self) -> bool {
        matches!(self, TermExpr::Abs(..) | TermExpr::TAbs(..) | TermExpr::Box(_))
    }

    pub fn free_atoms(&self) -> BTreeSet<Atom> {
        let mut out = BTreeSet::new();
        self.collect_atoms(&mut out);
        out
    }

    pub(crate) fn collect_atoms(&self, out: &mut BTreeSet<Atom>) {
        let var = |v: &Var, out: &mut BTreeSet<Atom>| {
            if let Var::Free(x) = v {
                out.insert(Atom::Term(*x));
            }
        };
        match self {
            TermExpr::Var(v) | TermExpr::Box(v) => var(v, out),
            TermExpr::Abs(t, e) | TermExpr::TAbs(t, e) => {
                t.collect_atoms(out);
                e.collect_atoms(out);
            }
            TermExpr::App(f, a) => {
                var(f, out);
                var(a, out);
            }
            TermExpr::TApp(f, t) => {
                var(f, out);
                t.collect_atoms(out);
            }
            TermExpr::Unbox(c, x) => {
                c.collect_atoms(out);
                var(x, out);
            }
            TermExpr::Let(a, b) => {
                a.collect_atoms(out);
                b.collect_atoms(out);
            }
        }
    }

    pub fn size(&self) -> usize {
        match self {
            TermExpr::Var(_) | TermExpr::Box(_) | TermExpr::App(..) | TermExpr::Unbox(..) => 1,
            TermExpr::TApp(_, t) => 1 + t.size(),
            TermExpr::Abs(t, e) | TermExpr::TAbs(t, e) => 1 + t.size() + e.size(),
            TermExpr::Let(a, b) => 1 + a.size() + b.size(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn top() -> TypeExpr {
        TypeExpr::Top
    }

    #[test]
    fn purity_of_leaves_and_boxes() {
        let x = TermVar(0);
        assert!(top().is_pure());
        assert!(!TypeExpr::capt(CaptureSet::singleton(x), top()).is_pure());
        assert!(TypeExpr::boxed(TypeExpr::capt(CaptureSet::singleton(x), top())).is_pure());
    }

    #[test]
    fn type_judgment_requires_closed_capture_sets() {
        assert!(TypeExpr::capt(CaptureSet::empty(), top()).is_type());
        assert!(!TypeExpr::capt(CaptureSet::bound(0), top()).is_type());
        let id_ty = TypeExpr::arrow(
            TypeExpr::capt(CaptureSet::empty(), top()),
            TypeExpr::capt(CaptureSet::bound(0), top()),
        );
        assert!(id_ty.is_pure());
        assert!(id_ty.is_type());
        // Index 1 escapes the single arrow binder.
        let bad = TypeExpr::arrow(top(), TypeExpr::capt(CaptureSet::bound(1), top()));
        assert!(!bad.is_type());
    }

    #[test]
    fn nested_capt_is_not_a_type() {
        let t = TypeExpr::capt(
            CaptureSet::empty(),
            TypeExpr::capt(CaptureSet::empty(), top()),
        );
        assert!(!t.is_type());
    }

    #[test]
    fn type_indices_must_be_bound() {
        assert!(!TypeExpr::BVar(0).is_pure());
        assert!(TypeExpr::FVar(TypeVar(0)).is_pure());
        assert!(TypeExpr::tall(top(), TypeExpr::BVar(0)).is_pure());
        assert!(!TypeExpr::tall(top(), TypeExpr::BVar(1)).is_type());
        // A bound must itself be pure.
        assert!(!TypeExpr::tall(TypeExpr::capt(CaptureSet::empty(), top()), top()).is_pure());
    }

    #[test]
    fn values() {
        let id = TermExpr::abs(TypeExpr::Top, TermExpr::bound(0));
        assert!(id.is_value());
        assert!(!TermExpr::App(Var::Free(TermVar(0)), Var::Free(TermVar(1))).is_value());
        assert!(TermExpr::Box(Var::Free(TermVar(0))).is_value());
        assert!(!TermExpr::free(TermVar(0)).is_value());
    }

    #[test]
    fn free_atoms_cover_annotations() {
        let (a, b, c) = (TermVar(1), TermVar(2), TermVar(3));
        let t = TypeExpr::capt(CaptureSet::singleton(a), top());
        assert_eq!(t.free_atoms(), BTreeSet::from([Atom::Term(a)]));
        let abs = TermExpr::abs(t.clone(), TermExpr::bound(0));
        assert_eq!(abs.free_atoms(), t.free_atoms());
        let unbox = TermExpr::Unbox(CaptureSet::from_vars([a, b]), Var::Free(c));
        assert_eq!(
            unbox.free_atoms(),
            BTreeSet::from([Atom::Term(a), Atom::Term(b), Atom::Term(c)])
        );
    }

    #[test]
    fn capture_sets_have_set_semantics() {
        let (a, b) = (TermVar(0), TermVar(1));
        assert_eq!(CaptureSet::from_vars([a, b, a]), CaptureSet::from_vars([b, a]));
        assert!(CaptureSet::empty().is_empty());
        assert!(!CaptureSet::universal().is_empty());
    }

    #[test]
    fn supply_avoids_used_atoms() {
        let mut s = AtomSupply::avoiding([Atom::Term(TermVar(4)), Atom::Type(TypeVar(9))]);
        assert_eq!(s.fresh_term(), TermVar(10));
        assert_eq!(s.fresh_type(), TypeVar(11));
    }
}
