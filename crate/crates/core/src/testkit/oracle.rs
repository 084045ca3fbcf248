//! Reference procedures the algorithms are tested against.

use std::collections::BTreeMap;

use crate::machine::{check_step_from, run_with, type_state, MachineState, Outcome, Rule, Run, StepCheck};
use crate::syntax::{AtomSupply, CaptureSet, TermExpr, TermVar, TypeExpr, Var};
use crate::wellformed::{Binding, Env};

/// Derivation search for `g ⊢ c1 <: c2` using only the rules as stated:
/// a set is below `c2` when each of its elements is; an element is below
/// `c2` when it is a member (this covers `*`), or when it is a variable whose
/// declared capture set is below `c2`. `max_depth` bounds the number of
/// nested variable expansions.
pub fn declarative_subcapture(g: &Env, c1: &CaptureSet, c2: &CaptureSet, max_depth: usize) -> bool {
    let star_ok = !c1.universal || c2.universal;
    star_ok && c1.frees.iter().all(|x| element_below(g, *x, c2, max_depth))
}

fn element_below(g: &Env, x: TermVar, c2: &CaptureSet, depth: usize) -> bool {
    if c2.contains(x) {
        return true;
    }
    if depth == 0 {
        return false;
    }
    match g.capture_of(x) {
        Some(cx) => declarative_subcapture(g, &cx, c2, depth - 1),
        None => false,
    }
}

/// Expansion depth that suffices for `g`: a chain of variable expansions
/// never revisits a binding.
pub fn default_oracle_depth(g: &Env) -> usize {
    g.len() + 2
}

fn subsets<T: Clone>(items: &[T]) -> Vec<Vec<T>> {
    (0..1usize << items.len())
        .map(|mask| {
            items
                .iter()
                .enumerate()
                .filter(|(i, _)| mask & (1 << i) != 0)
                .map(|(_, x)| x.clone())
                .collect()
        })
        .collect()
}

fn capture_sets_over(atoms: &[TermVar]) -> Vec<CaptureSet> {
    let mut out = Vec::new();
    for vars in subsets(atoms) {
        let c = CaptureSet::from_vars(vars);
        out.push(c.clone());
        out.push(c.with_universal());
    }
    out
}

/// Every environment of at most `max_bindings` term bindings in which each
/// binding is either pure `Top` or `C Top` with `C` over earlier atoms and `*`.
pub fn small_envs(max_bindings: usize) -> Vec<Env> {
    let mut layer = vec![Env::new()];
    let mut all = layer.clone();
    for i in 0..max_bindings {
        let x = TermVar(i as u32);
        let earlier: Vec<TermVar> = (0..i as u32).map(TermVar).collect();
        let mut types = vec![TypeExpr::Top];
        types.extend(
            capture_sets_over(&earlier)
                .into_iter()
                .map(|c| TypeExpr::capt(c, TypeExpr::Top)),
        );
        layer = layer
            .iter()
            .flat_map(|g| types.iter().map(move |t| g.with_fresh(Binding::Term(x, t.clone()))))
            .collect();
        all.extend(layer.iter().cloned());
    }
    all
}

/// A disagreement found by [`compare_subcapture_exhaustively`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Disagreement {
    pub env: Env,
    pub left: CaptureSet,
    pub right: CaptureSet,
    pub algorithmic: bool,
    pub declarative: bool,
}

#[derive(Clone, Debug, Default)]
pub struct ExhaustiveReport {
    pub cases: usize,
    pub disagreements: Vec<Disagreement>,
}

/// Compare `subcapture` with [`declarative_subcapture`] on every pair of
/// capture sets over the domain of every env from [`small_envs`].
pub fn compare_subcapture_exhaustively(
    max_bindings: usize,
    subcapture: impl Fn(&Env, &CaptureSet, &CaptureSet) -> bool,
) -> ExhaustiveReport {
    let mut report = ExhaustiveReport::default();
    for g in small_envs(max_bindings) {
        let atoms: Vec<TermVar> = g.term_domain().into_iter().collect();
        let sets = capture_sets_over(&atoms);
        let depth = default_oracle_depth(&g);
        for c1 in &sets {
            for c2 in &sets {
                report.cases += 1;
                let algorithmic = subcapture(&g, c1, c2);
                let declarative = declarative_subcapture(&g, c1, c2, depth);
                if algorithmic != declarative {
                    report.disagreements.push(Disagreement {
                        env: g.clone(),
                        left: c1.clone(),
                        right: c2.clone(),
                        algorithmic,
                        declarative,
                    });
                }
            }
        }
    }
    report
}

/// What happened when a program was run with typing checked at every step.
#[derive(Clone, Debug)]
pub struct SoundnessRun {
    pub steps: usize,
    pub rules: Vec<Rule>,
    /// States visited, starting with the initial one.
    pub states: Vec<MachineState>,
    pub ill_typed_program: bool,
    pub preservation: Option<String>,
    pub progress: Option<String>,
    pub finished: bool,
}

/// Run `program` for up to `fuel` steps, typing every state and checking
/// each step against the previous typing.
pub fn check_soundness(program: &TermExpr, fuel: usize) -> SoundnessRun {
    let mut supply = AtomSupply::avoiding(program.free_atoms());
    let mut state = MachineState::initial(program.clone());
    let mut out = SoundnessRun {
        steps: 0,
        rules: Vec::new(),
        states: vec![state.clone()],
        ill_typed_program: false,
        preservation: None,
        progress: None,
        finished: false,
    };
    let Ok(mut typing) = type_state(&state) else {
        out.ill_typed_program = true;
        return out;
    };
    while out.steps < fuel {
        let (verdict, next) = check_step_from(&state, &typing, &mut supply);
        match verdict {
            StepCheck::IllTyped => unreachable!("the current state is typed"),
            StepCheck::Final => {
                out.finished = true;
                return out;
            }
            StepCheck::ProgressViolated(reason) => {
                out.progress = Some(reason);
                return out;
            }
            StepCheck::PreservationViolated { rule, detail } => {
                out.rules.push(rule);
                out.steps += 1;
                out.states.extend(next.map(|(s, _)| s));
                out.preservation = Some(format!("{rule}: {detail}"));
                return out;
            }
            StepCheck::Preserved(rule) => {
                out.rules.push(rule);
                out.steps += 1;
                let (next, after) = next.expect("a preserved step has a successor");
                out.states.push(next.clone());
                state = next;
                typing = after.expect("a preserved step has a typed successor");
            }
        }
    }
    out
}

fn final_state(run: &Run) -> MachineState {
    match &run.outcome {
        Outcome::Answer(a) => MachineState {
            store: a.store.clone(),
            stack: Vec::new(),
            focus: match a.variable {
                Some(x) => TermExpr::Var(Var::Free(x)),
                None => a.value.clone(),
            },
        },
        Outcome::OutOfFuel(s) | Outcome::Stuck(s, _) => s.clone(),
    }
}

/// Run `program` twice with atom supplies that never overlap and compare
/// rule sequences and final states up to renaming of store atoms.
pub fn check_determinism(program: &TermExpr, fuel: usize) -> Result<(), String> {
    let low = AtomSupply::avoiding(program.free_atoms());
    let mut high = AtomSupply::starting_at(low.peek() + 1_000_000);
    high.reserve(program.free_atoms());
    let a = run_with(program, fuel, low, false);
    let b = run_with(program, fuel, high, false);
    if a.rules != b.rules {
        return Err(format!("rule sequences differ: {:?} vs {:?}", a.rules, b.rules));
    }
    let (sa, sb) = (final_state(&a), final_state(&b));
    if sa.canonical() != sb.canonical() {
        return Err("final states differ up to renaming".into());
    }
    Ok(())
}

/// How often each rule fires, keyed by label.
pub fn rule_histogram<'a, I: IntoIterator<Item = &'a Rule>>(rules: I) -> BTreeMap<Rule, usize> {
    let mut out: BTreeMap<Rule, usize> = Rule::ALL.iter().map(|r| (*r, 0)).collect();
    for r in rules {
        *out.entry(*r).or_default() += 1;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::subtyping::subcapture;

    fn chain() -> (Env, TermVar, TermVar, TermVar) {
        let (a, b, c) = (TermVar(0), TermVar(1), TermVar(2));
        let g = Env::new()
            .with_term(a, TypeExpr::capt(CaptureSet::universal(), TypeExpr::Top))
            .unwrap()
            .with_term(b, TypeExpr::capt(CaptureSet::singleton(a), TypeExpr::Top))
            .unwrap()
            .with_term(c, TypeExpr::capt(CaptureSet::singleton(b), TypeExpr::Top))
            .unwrap();
        (g, a, b, c)
    }

    #[test]
    fn empty_below_empty() {
        assert!(declarative_subcapture(&Env::new(), &CaptureSet::empty(), &CaptureSet::empty(), 1));
    }

    #[test]
    fn chain_case() {
        let (g, a, _, c) = chain();
        let (ca, cc) = (CaptureSet::singleton(a), CaptureSet::singleton(c));
        assert!(declarative_subcapture(&g, &cc, &ca, default_oracle_depth(&g)));
        assert!(subcapture(&g, &cc, &ca));
        // Two expansions are needed, so depth 1 is not enough.
        assert!(!declarative_subcapture(&g, &cc, &ca, 1));
    }

    #[test]
    fn domain_size() {
        // 1 + 3 + 3*5 + 3*5*9 environments.
        assert_eq!(small_envs(3).len(), 1 + 3 + 15 + 135);
    }

    #[test]
    fn soundness_of_self_application() {
        let id = TermExpr::abs(TypeExpr::capt(CaptureSet::empty(), TypeExpr::Top), TermExpr::bound(0));
        let prog = TermExpr::let_in(id, TermExpr::App(Var::Bound(0), Var::Bound(0)));
        let run = check_soundness(&prog, 100);
        assert!(run.finished && run.preservation.is_none() && run.progress.is_none());
        assert_eq!(run.rules, vec![Rule::Let, Rule::Lift, Rule::App]);
        assert!(check_determinism(&prog, 100).is_ok());
    }
}
