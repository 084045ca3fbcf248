//! Algorithmic subcapturing and subtyping.

use std::collections::BTreeSet;

use crate::binding::{open_term_var_in_type, open_type_var_in_type};
use crate::syntax::{AtomSupply, CaptureSet, TermVar, TypeExpr};
use crate::wellformed::{Binding, Env};

/// `Γ ⊢ C1 <: C2`.
///
/// `*` on the right absorbs everything; `*` on the left only fits under `*`.
/// Each atom on the left is either a member of `C2` or is expanded into the
/// capture set of its declared type.
pub fn subcapture(g: &Env, c1: &CaptureSet, c2: &CaptureSet) -> bool {
    let mut visiting = BTreeSet::new();
    subcapture_guarded(g, c1, c2, &mut visiting)
}

fn subcapture_guarded(
    g: &Env,
    c1: &CaptureSet,
    c2: &CaptureSet,
    visiting: &mut BTreeSet<TermVar>,
) -> bool {
    if c2.universal {
        return true;
    }
    if c1.universal {
        return false;
    }
    c1.frees.iter().all(|x| {
        if c2.contains(*x) {
            return true;
        }
        // A well-formed env only lets x mention earlier atoms, so a cycle
        // means the env was not well formed.
        if !visiting.insert(*x) {
            return false;
        }
        let ok = g
            .capture_of(*x)
            .is_some_and(|cx| subcapture_guarded(g, &cx, c2, visiting));
        visiting.remove(x);
        ok
    })
}

/// `Γ ⊢ T1 <: T2`.
///
/// A pure type compared against a capturing type is treated as capturing
/// the empty set.
pub fn subtype(g: &Env, t1: &TypeExpr, t2: &TypeExpr) -> bool {
    let mut supply = AtomSupply::avoiding(g.all_atoms());
    supply.reserve(t1.free_atoms());
    supply.reserve(t2.free_atoms());
    Subtyper { supply }.sub(g, t1, t2)
}

struct Subtyper {
    supply: AtomSupply,
}

impl Subtyper {
    fn sub(&mut self, g: &Env, t1: &TypeExpr, t2: &TypeExpr) -> bool {
        match (t1, t2) {
            (TypeExpr::Capt(..), _) | (_, TypeExpr::Capt(..)) => {
                let (c1, r1) = t1.split();
                let (c2, r2) = t2.split();
                subcapture(g, &c1, &c2) && self.sub_pure(g, r1, r2)
            }
            _ => self.sub_pure(g, t1, t2),
        }
    }

    fn sub_pure(&mut self, g: &Env, r1: &TypeExpr, r2: &TypeExpr) -> bool {
        match (r1, r2) {
            (_, TypeExpr::Top) => true,
            (TypeExpr::FVar(x), TypeExpr::FVar(y)) if x == y => true,
            (TypeExpr::FVar(x), _) => match g.lookup_type(*x) {
                Some(bound) => {
                    let bound = bound.clone();
                    self.sub_pure(g, &bound, r2)
                }
                None => false,
            },
            (TypeExpr::Box(a), TypeExpr::Box(b)) => self.sub(g, a, b),
            (TypeExpr::Arrow(s1, u1), TypeExpr::Arrow(s2, u2)) => {
                if !self.sub(g, s2, s1) {
                    return false;
                }
                let x = self.supply.fresh_term();
                let g2 = g.with_fresh(Binding::Term(x, (**s2).clone()));
                self.sub(
                    &g2,
                    &open_term_var_in_type(u1, 0, x),
                    &open_term_var_in_type(u2, 0, x),
                )
            }
            (TypeExpr::TAll(b1, u1), TypeExpr::TAll(b2, u2)) => {
                if !self.sub_pure(g, b2, b1) {
                    return false;
                }
                let x = self.supply.fresh_type();
                let g2 = g.with_fresh(Binding::Type(x, (**b2).clone()));
                let var = TypeExpr::FVar(x);
                self.sub(
                    &g2,
                    &open_type_var_in_type(u1, 0, &var),
                    &open_type_var_in_type(u2, 0, &var),
                )
            }
            _ => false,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::TypeVar;

    fn cs(xs: &[TermVar]) -> CaptureSet {
        CaptureSet::from_vars(xs.iter().copied())
    }

    fn capt(xs: &[TermVar], r: TypeExpr) -> TypeExpr {
        TypeExpr::capt(cs(xs), r)
    }

    fn chain() -> (Env, TermVar, TermVar, TermVar) {
        let (a, b, c) = (TermVar(0), TermVar(1), TermVar(2));
        let g = Env::new()
            .with_term(a, TypeExpr::capt(CaptureSet::universal(), TypeExpr::Top))
            .unwrap()
            .with_term(b, capt(&[a], TypeExpr::Top))
            .unwrap()
            .with_term(c, capt(&[b], TypeExpr::Top))
            .unwrap();
        (g, a, b, c)
    }

    #[test]
    fn subcapture_expands_through_env() {
        let x = TermVar(0);
        let g = Env::new().with_term(x, capt(&[], TypeExpr::Top)).unwrap();
        assert!(subcapture(&g, &cs(&[x]), &cs(&[])));
        assert!(subcapture(&Env::new(), &cs(&[]), &cs(&[])));
        let (g, a, b, c) = chain();
        assert!(subcapture(&g, &cs(&[c]), &cs(&[a])));
        assert!(subcapture(&g, &cs(&[b, c]), &cs(&[b])));
        // a is a root capability: nothing below * covers it except itself.
        assert!(!subcapture(&g, &cs(&[a]), &cs(&[c])));
        assert!(!subcapture(&g, &cs(&[b]), &cs(&[c])));
    }

    #[test]
    fn universal_is_top_only() {
        let (g, a, b, c) = chain();
        for set in [cs(&[]), cs(&[a]), cs(&[a, b, c]), CaptureSet::universal()] {
            assert!(subcapture(&g, &set, &CaptureSet::universal()));
        }
        assert!(!subcapture(&g, &CaptureSet::universal(), &cs(&[a, b, c])));
        let root = TermVar(9);
        let g = g.with_term(root, TypeExpr::capt(CaptureSet::universal(), TypeExpr::Top)).unwrap();
        assert!(!subcapture(&g, &cs(&[root]), &cs(&[a])));
        assert!(subcapture(&g, &cs(&[root]), &cs(&[root])));
    }

    #[test]
    fn subtype_examples() {
        let (x, y) = (TermVar(0), TermVar(1));
        let g = Env::new()
            .with_term(x, capt(&[], TypeExpr::Top))
            .unwrap()
            .with_term(y, capt(&[], TypeExpr::Top))
            .unwrap();
        assert!(subtype(&g, &capt(&[x], TypeExpr::Top), &capt(&[x, y], TypeExpr::Top)));
        let boxed_x = TypeExpr::boxed(capt(&[x], TypeExpr::Top));
        let boxed_star = TypeExpr::boxed(TypeExpr::capt(CaptureSet::universal(), TypeExpr::Top));
        assert!(subtype(&g, &boxed_x, &boxed_star));
        assert!(!subtype(&g, &boxed_star, &boxed_x));

        let xx = TypeVar(5);
        let g = Env::new().with_type(xx, TypeExpr::Top).unwrap();
        assert!(subtype(&g, &TypeExpr::FVar(xx), &TypeExpr::Top));
        assert!(subtype(&g, &TypeExpr::FVar(xx), &TypeExpr::FVar(xx)));
        assert!(!subtype(&g, &TypeExpr::Top, &TypeExpr::FVar(xx)));
    }

    #[test]
    fn arrows_are_contravariant_in_parameters() {
        let star_top = TypeExpr::capt(CaptureSet::universal(), TypeExpr::Top);
        let empty_top = capt(&[], TypeExpr::Top);
        let takes_any = TypeExpr::arrow(star_top.clone(), empty_top.clone());
        let takes_pure = TypeExpr::arrow(empty_top.clone(), empty_top.clone());
        let g = Env::new();
        assert!(subtype(&g, &takes_any, &takes_pure));
        assert!(!subtype(&g, &takes_pure, &takes_any));
    }

    #[test]
    fn dependent_results_are_compared_under_the_parameter() {
        // (x : {} Top) -> {x} Top  <:  (x : {} Top) -> {} Top, because x
        // captures nothing.
        let empty_top = capt(&[], TypeExpr::Top);
        let dep = TypeExpr::arrow(empty_top.clone(), TypeExpr::capt(CaptureSet::bound(0), TypeExpr::Top));
        let plain = TypeExpr::arrow(empty_top.clone(), empty_top.clone());
        assert!(subtype(&Env::new(), &dep, &plain));
        let star_top = TypeExpr::capt(CaptureSet::universal(), TypeExpr::Top);
        let dep_star = TypeExpr::arrow(star_top.clone(), TypeExpr::capt(CaptureSet::bound(0), TypeExpr::Top));
        let plain_star = TypeExpr::arrow(star_top, empty_top);
        assert!(!subtype(&Env::new(), &dep_star, &plain_star));
    }

    #[test]
    fn capturing_is_not_below_pure_unless_empty() {
        let x = TermVar(0);
        let g = Env::new()
            .with_term(x, TypeExpr::capt(CaptureSet::universal(), TypeExpr::Top))
            .unwrap();
        assert!(!subtype(&g, &capt(&[x], TypeExpr::Top), &TypeExpr::Top));
        assert!(subtype(&g, &TypeExpr::Top, &capt(&[x], TypeExpr::Top)));
    }
}
