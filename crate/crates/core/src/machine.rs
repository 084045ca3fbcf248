//! The store/stack/focus abstract machine and its state typing.
//!
//! A state `⟨S | E | e⟩` holds a store `S` of value bindings, a stack `E` of
//! pending `let` bodies, and the focused expression `e`. Six rules drive it:
//! APP, TAPP, OPEN, RENAME, LIFT, and LET. The store only ever grows.

use std::collections::BTreeMap;
use std::fmt;

use crate::binding::{open_term_var_in_term, open_type_var_in_term, rename_term_atoms_in_term};
use crate::subtyping::subtype;
use crate::syntax::{AtomSupply, TermExpr, TermVar, TypeExpr, Var};
use crate::typing::{avoid, Checker, TermPath, TypingError, TypingErrorKind};
use crate::wellformed::{Binding, Env};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Rule {
    App,
    TApp,
    Open,
    Rename,
    Lift,
    Let,
}

impl Rule {
    pub const ALL: [Rule; 6] = [Rule::App, Rule::TApp, Rule::Open, Rule::Rename, Rule::Lift, Rule::Let];

    pub fn label(self) -> &'static str {
        match self {
            Rule::App => "APP",
            Rule::TApp => "TAPP",
            Rule::Open => "OPEN",
            Rule::Rename => "RENAME",
            Rule::Lift => "LIFT",
            Rule::Let => "LET",
        }
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// Value bindings, oldest first.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Store {
    bindings: Vec<(TermVar, TermExpr)>,
}

impl Store {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn bindings(&self) -> &[(TermVar, TermExpr)] {
        &self.bindings
    }

    pub fn len(&self) -> usize {
        self.bindings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bindings.is_empty()
    }

    pub fn get(&self, x: TermVar) -> Option<&TermExpr> {
        self.bindings.iter().rev().find(|(y, _)| *y == x).map(|(_, v)| v)
    }

    /// Append a binding. `v` must be a value and `x` new to the store.
    pub fn push(&mut self, x: TermVar, v: TermExpr) {
        debug_assert!(v.is_value());
        debug_assert!(self.get(x).is_none());
        self.bindings.push((x, v));
    }
}

/// A pending `let` body; its term index 0 receives the focus's result.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Frame {
    pub body: TermExpr,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct MachineState {
    pub store: Store,
    /// Innermost frame last.
    pub stack: Vec<Frame>,
    pub focus: TermExpr,
}

impl MachineState {
    pub fn initial(program: TermExpr) -> Self {
        Self {
            store: Store::new(),
            stack: Vec::new(),
            focus: program,
        }
    }

    /// Rename store atoms to `0, 1, ...` in allocation order, so that states
    /// reached with different atom supplies compare equal.
    pub fn canonical(&self) -> MachineState {
        let map: BTreeMap<TermVar, TermVar> = self
            .store
            .bindings
            .iter()
            .enumerate()
            .map(|(i, (x, _))| (*x, TermVar(i as u32)))
            .collect();
        let rename = |x: TermVar| map.get(&x).copied().unwrap_or(x);
        let re = |e: &TermExpr| rename_term_atoms_in_term(e, &rename);
        MachineState {
            store: Store {
                bindings: self.store.bindings.iter().map(|(x, v)| (rename(*x), re(v))).collect(),
            },
            stack: self.stack.iter().map(|f| Frame { body: re(&f.body) }).collect(),
            focus: re(&self.focus),
        }
    }

    /// True for `⟨S | [] | v⟩` and `⟨S | [] | x⟩` with `x` bound in `S`.
    pub fn is_final(&self) -> bool {
        self.stack.is_empty()
            && match &self.focus {
                TermExpr::Var(Var::Free(x)) => self.store.get(*x).is_some(),
                e => e.is_value(),
            }
    }
}

/// A final answer. `variable` is set when the focus was a store variable;
/// `value` is always the value it denotes.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Answer {
    pub variable: Option<TermVar>,
    pub value: TermExpr,
    pub store: Store,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum StepResult {
    Stepped(MachineState, Rule),
    Final(Answer),
    Stuck(String),
}

fn lookup<'a>(s: &'a MachineState, v: &Var) -> Result<(TermVar, &'a TermExpr), String> {
    match v {
        Var::Bound(i) => Err(format!("dangling bound index {i}")),
        Var::Free(x) => s
            .store
            .get(*x)
            .map(|val| (*x, val))
            .ok_or_else(|| format!("{x} is not bound in the store")),
    }
}

/// One machine transition.
pub fn step(s: &MachineState, supply: &mut AtomSupply) -> StepResult {
    let with_focus = |focus: TermExpr, stack: Vec<Frame>| MachineState {
        store: s.store.clone(),
        stack,
        focus,
    };
    let popped = || {
        let mut stack = s.stack.clone();
        let frame = stack.pop();
        (frame, stack)
    };
    match &s.focus {
        TermExpr::Let(bound, body) => {
            let mut stack = s.stack.clone();
            stack.push(Frame { body: (**body).clone() });
            StepResult::Stepped(with_focus((**bound).clone(), stack), Rule::Let)
        }
        TermExpr::App(f, a) => {
            let (_, fv) = match lookup(s, f) {
                Ok(found) => found,
                Err(why) => return StepResult::Stuck(why),
            };
            let TermExpr::Abs(_, body) = fv else {
                return StepResult::Stuck(format!("{f:?} is not bound to a function in the store"));
            };
            let (y, _) = match lookup(s, a) {
                Ok(found) => found,
                Err(why) => return StepResult::Stuck(why),
            };
            StepResult::Stepped(
                with_focus(open_term_var_in_term(body, 0, y), s.stack.clone()),
                Rule::App,
            )
        }
        TermExpr::TApp(f, arg) => {
            let (_, fv) = match lookup(s, f) {
                Ok(found) => found,
                Err(why) => return StepResult::Stuck(why),
            };
            let TermExpr::TAbs(_, body) = fv else {
                return StepResult::Stuck(format!("{f:?} is not bound to a type function in the store"));
            };
            if !arg.is_pure() {
                return StepResult::Stuck("type argument is not pure".into());
            }
            StepResult::Stepped(
                with_focus(open_type_var_in_term(body, 0, arg), s.stack.clone()),
                Rule::TApp,
            )
        }
        TermExpr::Unbox(_, x) => {
            let (_, xv) = match lookup(s, x) {
                Ok(found) => found,
                Err(why) => return StepResult::Stuck(why),
            };
            match xv {
                TermExpr::Box(Var::Free(y)) => {
                    StepResult::Stepped(with_focus(TermExpr::free(*y), s.stack.clone()), Rule::Open)
                }
                _ => StepResult::Stuck(format!("{x:?} is not bound to a box in the store")),
            }
        }
        TermExpr::Var(v) => {
            let (x, value) = match lookup(s, v) {
                Ok(found) => found,
                Err(why) => return StepResult::Stuck(why),
            };
            match popped() {
                (Some(frame), stack) => StepResult::Stepped(
                    with_focus(open_term_var_in_term(&frame.body, 0, x), stack),
                    Rule::Rename,
                ),
                (None, _) => StepResult::Final(Answer {
                    variable: Some(x),
                    value: value.clone(),
                    store: s.store.clone(),
                }),
            }
        }
        v => {
            debug_assert!(v.is_value());
            match popped() {
                (Some(frame), stack) => {
                    let x = supply.fresh_term();
                    let mut store = s.store.clone();
                    store.push(x, v.clone());
                    StepResult::Stepped(
                        MachineState {
                            store,
                            stack,
                            focus: open_term_var_in_term(&frame.body, 0, x),
                        },
                        Rule::Lift,
                    )
                }
                (None, _) => StepResult::Final(Answer {
                    variable: None,
                    value: v.clone(),
                    store: s.store.clone(),
                }),
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Outcome {
    Answer(Answer),
    OutOfFuel(MachineState),
    Stuck(MachineState, String),
}

/// The result of iterating [`step`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Run {
    pub outcome: Outcome,
    pub steps: usize,
    /// Rule fired by each step, in order.
    pub rules: Vec<Rule>,
    /// State reached after each step, when tracing was requested.
    pub trace: Option<Vec<MachineState>>,
}

/// Run from `⟨[] | [] | program⟩` for at most `fuel` steps.
pub fn run(program: &TermExpr, fuel: usize) -> Run {
    let supply = AtomSupply::avoiding(program.free_atoms());
    run_with(program, fuel, supply, false)
}

pub fn run_traced(program: &TermExpr, fuel: usize) -> Run {
    let supply = AtomSupply::avoiding(program.free_atoms());
    run_with(program, fuel, supply, true)
}

/// Run with an explicit atom supply. The supply must avoid the program's
/// atoms.
pub fn run_with(program: &TermExpr, fuel: usize, mut supply: AtomSupply, trace: bool) -> Run {
    let mut state = MachineState::initial(program.clone());
    let mut rules = Vec::new();
    let mut states = trace.then(Vec::new);
    loop {
        match step(&state, &mut supply) {
            StepResult::Final(answer) => {
                return Run {
                    outcome: Outcome::Answer(answer),
                    steps: rules.len(),
                    rules,
                    trace: states,
                }
            }
            StepResult::Stuck(reason) => {
                return Run {
                    outcome: Outcome::Stuck(state, reason),
                    steps: rules.len(),
                    rules,
                    trace: states,
                }
            }
            StepResult::Stepped(next, rule) => {
                if rules.len() == fuel {
                    return Run {
                        outcome: Outcome::OutOfFuel(state),
                        steps: rules.len(),
                        rules,
                        trace: states,
                    };
                }
                rules.push(rule);
                if let Some(states) = states.as_mut() {
                    states.push(next.clone());
                }
                state = next;
            }
        }
    }
}

/// Typing of a whole machine state.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StateTyping {
    /// One term binding per store entry, typed in its prefix.
    pub env: Env,
    /// Type of the state as a whole, after unwinding the stack.
    pub ty: TypeExpr,
}

/// Type a machine state: the store becomes an environment, the focus is
/// typed under it, and each frame is typed with its hole bound to the type
/// below it.
pub fn type_state(s: &MachineState) -> Result<StateTyping, TypingError> {
    type_state_reusing(s, None)
}

/// [`type_state`], taking the types of leading store entries from `known`.
///
/// `known` must be the environment of a typing of an earlier state of the
/// same run. Stores only grow and their entries never change, so entries
/// whose atoms line up with `known` keep their types.
pub fn type_state_reusing(s: &MachineState, known: Option<&Env>) -> Result<StateTyping, TypingError> {
    let mut supply = AtomSupply::new();
    for (x, v) in s.store.bindings() {
        supply.reserve([crate::syntax::Atom::Term(*x)]);
        supply.reserve(v.free_atoms());
    }
    for f in &s.stack {
        supply.reserve(f.body.free_atoms());
    }
    supply.reserve(s.focus.free_atoms());
    let mut checker = Checker { supply };

    let reused = known
        .filter(|k| {
            k.len() <= s.store.len()
                && k.bindings()
                    .zip(s.store.bindings())
                    .all(|(b, (x, _))| b.atom() == crate::syntax::Atom::Term(*x))
        })
        .map_or(0, Env::len);
    let mut env = known.map_or_else(Env::new, |k| k.prefix(reused));
    for (x, v) in &s.store.bindings()[reused..] {
        let ty = checker.infer(&env, v, &TermPath::root())?;
        env = env.with_fresh(Binding::Term(*x, ty));
    }
    let mut ty = checker.infer(&env, &s.focus, &TermPath::root())?;
    for frame in s.stack.iter().rev() {
        let z = checker.supply.fresh_term();
        let g = env.with_fresh(Binding::Term(z, ty.clone()));
        let body_ty = checker.infer(&g, &open_term_var_in_term(&frame.body, 0, z), &TermPath::root())?;
        ty = avoid(&body_ty, z, &ty.split().0).ok_or_else(|| TypingError {
            kind: TypingErrorKind::EscapingVariable,
            path: TermPath::root(),
            detail: "frame hole occurs contravariantly in the frame's type".into(),
        })?;
    }
    Ok(StateTyping { env, ty })
}

/// Outcome of checking one transition against the state typing.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum StepCheck {
    /// The state was ill typed to begin with; nothing to check.
    IllTyped,
    /// Final state; nothing to step.
    Final,
    Preserved(Rule),
    /// The successor does not type, or its type is not below the original.
    PreservationViolated { rule: Rule, detail: String },
    /// A well-typed state is stuck.
    ProgressViolated(String),
}

/// Step once and compare typings before and after.
pub fn check_step(s: &MachineState, supply: &mut AtomSupply) -> (StepCheck, Option<MachineState>) {
    let before = match type_state(s) {
        Ok(t) => t,
        Err(_) => return (StepCheck::IllTyped, None),
    };
    let (verdict, next) = check_step_from(s, &before, supply);
    (verdict, next.map(|(state, _)| state))
}

/// [`check_step`] for a state already typed as `before`. Also returns the
/// successor's typing when it has one, so a run types each state once.
pub fn check_step_from(
    s: &MachineState,
    before: &StateTyping,
    supply: &mut AtomSupply,
) -> (StepCheck, Option<(MachineState, Option<StateTyping>)>) {
    match step(s, supply) {
        StepResult::Final(_) => (StepCheck::Final, None),
        StepResult::Stuck(reason) => (StepCheck::ProgressViolated(reason), None),
        StepResult::Stepped(next, rule) => match type_state_reusing(&next, Some(&before.env)) {
            Err(e) => (
                StepCheck::PreservationViolated {
                    rule,
                    detail: format!("successor is ill typed: {e}"),
                },
                Some((next, None)),
            ),
            Ok(after) if subtype(&after.env, &after.ty, &before.ty) => {
                (StepCheck::Preserved(rule), Some((next, Some(after))))
            }
            Ok(after) => (
                StepCheck::PreservationViolated {
                    rule,
                    detail: "successor type is not a subtype of the original".into(),
                },
                Some((next, Some(after))),
            ),
        },
    }
}
