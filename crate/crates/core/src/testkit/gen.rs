//! Rule-directed generators for environments, types, subtype chains and
//! well-typed programs.

use std::collections::BTreeSet;

use super::choices::Choices;
use super::GenConfig;
use crate::binding::{
    close_term_var_in_term, close_term_var_in_type, close_type_var_in_term, close_type_var_in_type,
    open_term_var_in_type, open_type_var_in_type,
};
use crate::subtyping::{subcapture, subtype};
use crate::syntax::{AtomSupply, CaptureSet, TermExpr, TermVar, TypeExpr, TypeVar, Var};
use crate::typing::infer_type;
use crate::wellformed::{Binding, Env};

/// Well-formedness rules for types, as tracked by the coverage counter.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum WfRule {
    Top,
    TypeVar,
    Capt,
    Box,
    Fun,
    TFun,
}

impl WfRule {
    pub const ALL: [WfRule; 6] = [
        WfRule::Top,
        WfRule::TypeVar,
        WfRule::Capt,
        WfRule::Box,
        WfRule::Fun,
        WfRule::TFun,
    ];
}

/// Generator state: a choice source, an atom supply, and counters.
pub struct Gen {
    pub cfg: GenConfig,
    pub choices: Choices,
    pub supply: AtomSupply,
    /// How often each rule was used, indexed like [`WfRule::ALL`].
    pub wf_coverage: [usize; 6],
    budget: usize,
}

/// Variables a generated subterm may mention in capturing positions.
#[derive(Clone)]
struct Scope {
    env: Env,
    usable: BTreeSet<TermVar>,
}

impl Scope {
    fn bind_term(&self, x: TermVar, t: TypeExpr) -> Scope {
        let mut usable = self.usable.clone();
        usable.insert(x);
        Scope {
            env: self.env.with_fresh(Binding::Term(x, t)),
            usable,
        }
    }

    fn bind_type(&self, x: TypeVar, bound: TypeExpr) -> Scope {
        Scope {
            env: self.env.with_fresh(Binding::Type(x, bound)),
            usable: self.usable.clone(),
        }
    }
}

const NODE_BUDGET: usize = 4000;

impl Gen {
    pub fn new(cfg: GenConfig, choices: Choices) -> Self {
        Self {
            cfg,
            choices,
            supply: AtomSupply::new(),
            wf_coverage: [0; 6],
            budget: NODE_BUDGET,
        }
    }

    fn note(&mut self, rule: WfRule) {
        self.wf_coverage[rule as usize] += 1;
    }

    // ---- environments and types ----

    /// A well-formed environment of at most `cfg.max_env_depth` bindings.
    pub fn env(&mut self) -> Env {
        let n = self.choices.choose(self.cfg.max_env_depth + 1);
        let mut g = Env::new();
        let depth = self.cfg.max_type_depth.saturating_sub(2);
        for _ in 0..n {
            if self.choices.chance(1, 3) {
                let bound = self.pure_type(&g, depth);
                let x = self.supply.fresh_type();
                g = g.with_fresh(Binding::Type(x, bound));
            } else {
                let t = self.wf_type(&g, depth);
                let x = self.supply.fresh_term();
                g = g.with_fresh(Binding::Term(x, t));
            }
        }
        g
    }

    /// A capture set over the term domain of `g`, possibly universal.
    pub fn capture_set(&mut self, g: &Env) -> CaptureSet {
        let mut c = CaptureSet::empty();
        for x in g.term_domain() {
            if self.choices.chance(1, 2) {
                c.insert(x);
            }
        }
        c.universal = self.choices.chance(1, 4);
        c
    }

    /// A type `T` with `wf_type(g, T)` and `T.is_type()`.
    pub fn wf_type(&mut self, g: &Env, depth: usize) -> TypeExpr {
        self.shape(g, depth, true)
    }

    /// A pure type well formed in `g`.
    pub fn pure_type(&mut self, g: &Env, depth: usize) -> TypeExpr {
        self.shape(g, depth, false)
    }

    fn shape(&mut self, g: &Env, depth: usize, allow_capt: bool) -> TypeExpr {
        let tvars: Vec<TypeVar> = g.type_domain().into_iter().collect();
        let mut rules = vec![WfRule::Top];
        if !tvars.is_empty() {
            rules.push(WfRule::TypeVar);
        }
        if depth > 0 {
            if allow_capt {
                rules.push(WfRule::Capt);
            }
            rules.extend([WfRule::Box, WfRule::Fun, WfRule::TFun]);
        }
        let rule = *self.choices.pick(&rules).expect("Top is always available");
        self.note(rule);
        match rule {
            WfRule::Top => TypeExpr::Top,
            WfRule::TypeVar => TypeExpr::FVar(*self.choices.pick(&tvars).expect("nonempty")),
            WfRule::Capt => {
                let c = self.capture_set(g);
                TypeExpr::capt(c, self.shape(g, depth - 1, false))
            }
            WfRule::Box => TypeExpr::boxed(self.wf_type(g, depth - 1)),
            WfRule::Fun => {
                let param = self.wf_type(g, depth - 1);
                let x = self.supply.fresh_term();
                let g2 = g.with_fresh(Binding::Term(x, param.clone()));
                let result = self.wf_type(&g2, depth - 1);
                TypeExpr::arrow(param, close_term_var_in_type(&result, 0, x))
            }
            WfRule::TFun => {
                let bound = self.pure_type(g, depth - 1);
                let x = self.supply.fresh_type();
                let g2 = g.with_fresh(Binding::Type(x, bound.clone()));
                let result = self.wf_type(&g2, depth - 1);
                TypeExpr::tall(bound, close_type_var_in_type(&result, 0, x))
            }
        }
    }

    // ---- subtype chains ----

    fn super_capture_set(&mut self, g: &Env, c: &CaptureSet) -> CaptureSet {
        let mut out = CaptureSet {
            universal: c.universal,
            ..CaptureSet::empty()
        };
        for &x in &c.frees {
            match g.capture_of(x) {
                Some(cx) if self.choices.chance(1, 3) => out = out.union(&cx),
                _ => out.insert(x),
            }
        }
        out.union(&self.capture_set(g))
    }

    fn sub_capture_set(&mut self, g: &Env, c: &CaptureSet) -> CaptureSet {
        if c.universal && self.choices.chance(1, 2) {
            return self.capture_set(g);
        }
        let mut out = CaptureSet::empty();
        for x in g.term_domain() {
            let keep = if c.contains(x) {
                !self.choices.chance(1, 3)
            } else {
                subcapture(g, &CaptureSet::singleton(x), c) && self.choices.chance(1, 3)
            };
            if keep {
                out.insert(x);
            }
        }
        out.universal = c.universal && !self.choices.chance(1, 2);
        out
    }

    /// A type intended to be a supertype of `t` in `g`.
    pub fn supertype(&mut self, g: &Env, t: &TypeExpr, depth: usize) -> TypeExpr {
        let (c, r) = t.split();
        let r2 = self.super_pure(g, r, depth);
        if matches!(t, TypeExpr::Capt(..)) || self.choices.chance(1, 3) {
            TypeExpr::capt(self.super_capture_set(g, &c), r2)
        } else {
            r2
        }
    }

    /// A type intended to be a subtype of `t` in `g`.
    pub fn subtype_of(&mut self, g: &Env, t: &TypeExpr, depth: usize) -> TypeExpr {
        let (c, r) = t.split();
        let r2 = self.sub_pure(g, r, depth);
        let c2 = self.sub_capture_set(g, &c);
        if c2.is_empty() && self.choices.chance(1, 2) {
            r2
        } else {
            TypeExpr::capt(c2, r2)
        }
    }

    fn super_pure(&mut self, g: &Env, r: &TypeExpr, depth: usize) -> TypeExpr {
        if depth == 0 || !self.choices.chance(3, 4) {
            return r.clone();
        }
        if self.choices.chance(1, 5) {
            return TypeExpr::Top;
        }
        match r {
            TypeExpr::FVar(x) => match g.lookup_type(*x) {
                Some(bound) => {
                    let bound = bound.clone();
                    self.super_pure(g, &bound, depth - 1)
                }
                None => r.clone(),
            },
            TypeExpr::Box(inner) => TypeExpr::boxed(self.supertype(g, inner, depth - 1)),
            TypeExpr::Arrow(param, result) => {
                let param2 = self.subtype_of(g, param, depth - 1);
                let x = self.supply.fresh_term();
                let g2 = g.with_fresh(Binding::Term(x, param2.clone()));
                let result2 = self.supertype(&g2, &open_term_var_in_type(result, 0, x), depth - 1);
                TypeExpr::arrow(param2, close_term_var_in_type(&result2, 0, x))
            }
            TypeExpr::TAll(bound, result) => {
                let bound2 = self.sub_pure(g, bound, depth - 1);
                let x = self.supply.fresh_type();
                let g2 = g.with_fresh(Binding::Type(x, bound2.clone()));
                let opened = open_type_var_in_type(result, 0, &TypeExpr::FVar(x));
                let result2 = self.supertype(&g2, &opened, depth - 1);
                TypeExpr::tall(bound2, close_type_var_in_type(&result2, 0, x))
            }
            _ => r.clone(),
        }
    }

    fn sub_pure(&mut self, g: &Env, r: &TypeExpr, depth: usize) -> TypeExpr {
        if depth == 0 || !self.choices.chance(3, 4) {
            return r.clone();
        }
        match r {
            TypeExpr::Top => self.pure_type(g, depth - 1),
            TypeExpr::FVar(x) => {
                let below: Vec<TypeVar> = g
                    .type_domain()
                    .into_iter()
                    .filter(|y| g.lookup_type(*y) == Some(&TypeExpr::FVar(*x)))
                    .collect();
                match self.choices.pick(&below) {
                    Some(y) => TypeExpr::FVar(*y),
                    None => r.clone(),
                }
            }
            TypeExpr::Box(inner) => TypeExpr::boxed(self.subtype_of(g, inner, depth - 1)),
            TypeExpr::Arrow(param, result) => {
                let param2 = self.supertype(g, param, depth - 1);
                let x = self.supply.fresh_term();
                let g2 = g.with_fresh(Binding::Term(x, (**param).clone()));
                let result2 = self.subtype_of(&g2, &open_term_var_in_type(result, 0, x), depth - 1);
                TypeExpr::arrow(param2, close_term_var_in_type(&result2, 0, x))
            }
            TypeExpr::TAll(bound, result) => {
                let bound2 = self.super_pure(g, bound, depth - 1);
                let x = self.supply.fresh_type();
                let g2 = g.with_fresh(Binding::Type(x, (**bound).clone()));
                let opened = open_type_var_in_type(result, 0, &TypeExpr::FVar(x));
                let result2 = self.subtype_of(&g2, &opened, depth - 1);
                TypeExpr::tall(bound2, close_type_var_in_type(&result2, 0, x))
            }
            _ => r.clone(),
        }
    }

    // ---- programs ----

    /// A closed program whose inferred type is a subtype of a generated goal
    /// type. Returns the goal alongside the program. Generation is retried
    /// when a candidate fails the final check; after repeated failures the
    /// identity function is returned.
    pub fn well_typed_program(&mut self) -> (TermExpr, TypeExpr) {
        for _ in 0..16 {
            self.budget = NODE_BUDGET;
            let scope = Scope {
                env: Env::new(),
                usable: BTreeSet::new(),
            };
            let goal = self.inhabited_type(&scope, self.cfg.max_type_depth.min(3));
            if let Some(e) = self.term(&scope, &goal, self.cfg.max_term_depth) {
                if infer_type(&Env::new(), &e).is_ok_and(|t| subtype(&Env::new(), &t, &goal)) {
                    return (e, goal);
                }
            }
        }
        let id_ty = TypeExpr::capt(CaptureSet::empty(), TypeExpr::Top);
        let id = TermExpr::abs(id_ty.clone(), TermExpr::bound(0));
        let goal = infer_type(&Env::new(), &id).expect("identity is well typed");
        (id, goal)
    }

    /// A type drawn until [`Gen::inhabited`] accepts it, else `Top`.
    fn inhabited_type(&mut self, s: &Scope, depth: usize) -> TypeExpr {
        for _ in 0..8 {
            let t = self.wf_type(&s.env, depth);
            if self.inhabited(s, &t) {
                return t;
            }
        }
        TypeExpr::Top
    }

    /// Conservative check that introduction forms and variables in scope
    /// can build a value of type `t`.
    fn inhabited(&mut self, s: &Scope, t: &TypeExpr) -> bool {
        match t.pure_part() {
            TypeExpr::Top => true,
            TypeExpr::Box(inner) => self.inhabited(s, inner),
            TypeExpr::Arrow(param, result) => {
                let x = self.supply.fresh_term();
                let inner = s.bind_term(x, (**param).clone());
                self.inhabited(&inner, &open_term_var_in_type(result, 0, x))
            }
            TypeExpr::TAll(bound, result) => {
                let x = self.supply.fresh_type();
                let inner = s.bind_type(x, (**bound).clone());
                self.inhabited(&inner, &open_type_var_in_type(result, 0, &TypeExpr::FVar(x)))
            }
            r => s.usable.iter().any(|x| {
                s.env
                    .lookup_term(*x)
                    .is_some_and(|tx| subtype(&s.env, tx.pure_part(), r))
            }),
        }
    }

    fn var_type(g: &Env, x: TermVar) -> Option<TypeExpr> {
        g.lookup_term(x)
            .map(|t| TypeExpr::capt(CaptureSet::singleton(x), t.pure_part().clone()))
    }

    fn term(&mut self, s: &Scope, goal: &TypeExpr, depth: usize) -> Option<TermExpr> {
        if self.budget == 0 {
            return None;
        }
        self.budget -= 1;

        #[derive(Clone, Copy)]
        enum Form {
            Var,
            Intro,
            App,
            TApp,
            Unbox,
            Rename,
            Scoped,
        }
        let mut forms = vec![Form::Var, Form::Intro];
        if depth > 0 {
            forms.extend([
                Form::App,
                Form::TApp,
                Form::Unbox,
                Form::Rename,
                Form::Scoped,
            ]);
        }
        // The chosen form first, then the cheap ones.
        let first = forms[self.choices.choose(forms.len())];
        for form in [first, Form::Var, Form::Intro] {
            let out = match form {
                Form::Var => self.var_of(s, goal),
                Form::Intro => self.intro(s, goal, depth),
                Form::App => self.app(s, goal, depth - 1),
                Form::TApp => self.tapp(s, goal, depth - 1),
                Form::Unbox => self.unbox(s, goal, depth - 1),
                Form::Rename => self.rename(s, goal, depth - 1),
                Form::Scoped => self.scoped(s, goal, depth - 1),
            };
            if out.is_some() {
                return out;
            }
        }
        None
    }

    fn var_of(&mut self, s: &Scope, goal: &TypeExpr) -> Option<TermExpr> {
        let fits: Vec<TermVar> = s
            .usable
            .iter()
            .copied()
            .filter(|x| Self::var_type(&s.env, *x).is_some_and(|t| subtype(&s.env, &t, goal)))
            .collect();
        self.choices.pick(&fits).map(|x| TermExpr::free(*x))
    }

    fn intro(&mut self, s: &Scope, goal: &TypeExpr, depth: usize) -> Option<TermExpr> {
        let (c, r) = goal.split();
        // Outer variables a value of this type may capture.
        let inner_scope = |s: &Scope| Scope {
            env: s.env.clone(),
            usable: s
                .usable
                .iter()
                .copied()
                .filter(|x| subcapture(&s.env, &CaptureSet::singleton(*x), &c))
                .collect(),
        };
        match r {
            TypeExpr::Top => {
                let narrower = self.pure_type(&s.env, 2);
                let narrower = if matches!(narrower, TypeExpr::Top) {
                    TypeExpr::arrow(TypeExpr::Top, TypeExpr::Top)
                } else {
                    narrower
                };
                self.intro(s, &TypeExpr::capt(c.clone(), narrower), depth)
            }
            TypeExpr::Arrow(param, result) => {
                let x = self.supply.fresh_term();
                let inner = inner_scope(s).bind_term(x, (**param).clone());
                let body = self.term(&inner, &open_term_var_in_type(result, 0, x), depth)?;
                Some(TermExpr::abs((**param).clone(), close_term_var_in_term(&body, 0, x)))
            }
            TypeExpr::TAll(bound, result) => {
                let x = self.supply.fresh_type();
                let inner = inner_scope(s).bind_type(x, (**bound).clone());
                let opened = open_type_var_in_type(result, 0, &TypeExpr::FVar(x));
                let body = self.term(&inner, &opened, depth)?;
                Some(TermExpr::tabs((**bound).clone(), close_type_var_in_term(&body, 0, x)))
            }
            TypeExpr::Box(content) => {
                let direct: Vec<TermVar> = s
                    .env
                    .term_domain()
                    .into_iter()
                    .filter(|x| Self::var_type(&s.env, *x).is_some_and(|t| subtype(&s.env, &t, content)))
                    .collect();
                if let Some(x) = self.choices.pick(&direct) {
                    return Some(TermExpr::Box(Var::Free(*x)));
                }
                let bound = self.term(s, content, depth)?;
                Some(TermExpr::let_in(bound, TermExpr::Box(Var::Bound(0))))
            }
            _ => None,
        }
    }

    /// `let f = (fun (x : S) => ...) in let a = ... in f a`
    fn app(&mut self, s: &Scope, goal: &TypeExpr, depth: usize) -> Option<TermExpr> {
        let param = self.inhabited_type(s, 2);
        let (c, _) = goal.split();
        let fn_goal = TypeExpr::capt(c, TypeExpr::arrow(param.clone(), goal.clone()));
        let fun = self.term(s, &fn_goal, depth)?;
        let f = self.supply.fresh_term();
        let f_ty = infer_type(&s.env, &fun).ok()?;
        let s2 = s.bind_term(f, f_ty);
        let arg = self.term(&s2, &param, depth)?;
        let a = self.supply.fresh_term();
        let call = TermExpr::App(Var::Free(f), Var::Free(a));
        let inner = TermExpr::let_in(arg, close_term_var_in_term(&call, 0, a));
        Some(TermExpr::let_in(fun, close_term_var_in_term(&inner, 0, f)))
    }

    /// `let f = (tfun [X <: B] => ...) in f [R]` with a result that ignores X.
    fn tapp(&mut self, s: &Scope, goal: &TypeExpr, depth: usize) -> Option<TermExpr> {
        let bound = self.pure_type(&s.env, 1);
        let arg = if self.choices.chance(1, 2) {
            bound.clone()
        } else {
            self.sub_pure(&s.env, &bound, 1)
        };
        let (c, _) = goal.split();
        let fn_goal = TypeExpr::capt(c, TypeExpr::tall(bound, goal.clone()));
        let fun = self.term(s, &fn_goal, depth)?;
        let f = self.supply.fresh_term();
        let call = TermExpr::TApp(Var::Free(f), arg);
        Some(TermExpr::let_in(fun, close_term_var_in_term(&call, 0, f)))
    }

    /// `let b = (box ...) in {C} unbox b`
    fn unbox(&mut self, s: &Scope, goal: &TypeExpr, depth: usize) -> Option<TermExpr> {
        let (c, r) = goal.split();
        let mut annot = CaptureSet::empty();
        annot.frees = c.frees.iter().copied().filter(|x| s.usable.contains(x)).collect();
        let content = TypeExpr::capt(annot.clone(), r.clone());
        let boxed = self.term(s, &TypeExpr::boxed(content), depth)?;
        let b = self.supply.fresh_term();
        let open = TermExpr::Unbox(annot, Var::Free(b));
        Some(TermExpr::let_in(boxed, close_term_var_in_term(&open, 0, b)))
    }

    /// `let y = ... in y`
    fn rename(&mut self, s: &Scope, goal: &TypeExpr, depth: usize) -> Option<TermExpr> {
        let bound = self.term(s, goal, depth)?;
        Some(TermExpr::let_in(bound, TermExpr::bound(0)))
    }

    /// `let y = (something unrelated) in ...`
    fn scoped(&mut self, s: &Scope, goal: &TypeExpr, depth: usize) -> Option<TermExpr> {
        let side_goal = self.inhabited_type(s, 2);
        let bound = self.term(s, &side_goal, depth)?;
        let bound_ty = infer_type(&s.env, &bound).ok()?;
        let y = self.supply.fresh_term();
        let s2 = s.bind_term(y, bound_ty);
        let body = self.term(&s2, goal, depth)?;
        Some(TermExpr::let_in(bound, close_term_var_in_term(&body, 0, y)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::wellformed::{wf_env, wf_type};

    fn gen(case: u64) -> Gen {
        Gen::new(GenConfig::default(), Choices::random(0, case))
    }

    #[test]
    fn depth_zero_in_the_empty_env_is_top() {
        for case in 0..20 {
            assert_eq!(gen(case).wf_type(&Env::new(), 0), TypeExpr::Top);
        }
    }

    #[test]
    fn generated_types_are_well_formed() {
        for case in 0..300 {
            let mut g = gen(case);
            let env = g.env();
            assert!(wf_env(&env), "{env:?}");
            let t = g.wf_type(&env, 4);
            assert!(t.is_type() && wf_type(&env, &t), "{t:?} in {env:?}");
            let r = g.pure_type(&env, 4);
            assert!(r.is_pure() && wf_type(&env, &r), "{r:?} in {env:?}");
        }
    }

    #[test]
    fn generated_programs_check() {
        for case in 0..50 {
            let (e, goal) = gen(case).well_typed_program();
            let t = infer_type(&Env::new(), &e).unwrap();
            assert!(subtype(&Env::new(), &t, &goal));
        }
    }
}
