//! The property harness: run each property over generated cases, shrink
//! failures, and report.

use std::fmt;
use std::thread;

use super::choices::{shrink, Choices};
use super::gen::Gen;
use super::oracle::{check_determinism, check_soundness, declarative_subcapture, default_oracle_depth};
use super::GenConfig;
use crate::binding::{
    close_term_var_in_term, close_term_var_in_type, open_term_var_in_term, open_term_var_in_type,
    subst_type_atom_in_type,
};
use crate::frontend::{atom_scope, parse_type, parse_with_scope, print_state, print_term, print_type};
use crate::machine::Rule;
use crate::subtyping::{subcapture, subtype};
use crate::syntax::{TermExpr, TypeExpr};
use crate::typing::infer_type;
use crate::wellformed::{wf_env, wf_type, Binding, Env};

/// Fuel for machine runs inside the suite.
pub const SUITE_FUEL: usize = 10_000;

const SHRINK_BUDGET: usize = 2_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Property {
    GeneratorSoundness,
    PurityStability,
    OpenCloseRoundTrip,
    WfWeakening,
    SubcaptureOracle,
    SubtypeReflexivity,
    SubtypeTransitivity,
    PrintParseRoundTrip,
    Preservation,
    Progress,
    Determinism,
}

impl Property {
    pub const ALL: [Property; 11] = [
        Property::GeneratorSoundness,
        Property::PurityStability,
        Property::OpenCloseRoundTrip,
        Property::WfWeakening,
        Property::SubcaptureOracle,
        Property::SubtypeReflexivity,
        Property::SubtypeTransitivity,
        Property::PrintParseRoundTrip,
        Property::Preservation,
        Property::Progress,
        Property::Determinism,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Property::GeneratorSoundness => "generator-soundness",
            Property::PurityStability => "purity-stability",
            Property::OpenCloseRoundTrip => "open-close-round-trip",
            Property::WfWeakening => "wf-weakening",
            Property::SubcaptureOracle => "subcapture-oracle",
            Property::SubtypeReflexivity => "subtype-reflexivity",
            Property::SubtypeTransitivity => "subtype-transitivity",
            Property::PrintParseRoundTrip => "print-parse-round-trip",
            Property::Preservation => "preservation",
            Property::Progress => "progress",
            Property::Determinism => "determinism",
        }
    }

    pub fn from_name(name: &str) -> Option<Property> {
        Property::ALL.into_iter().find(|p| p.name() == name)
    }
}

impl fmt::Display for Property {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A generated input, rendered for humans and for `.ccbox` files.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Case {
    Program(TermExpr),
    /// An environment and some types or capture sets, already printed.
    Judgement { env: String, items: Vec<String> },
}

impl Case {
    /// Source text. Non-program cases become comment lines.
    pub fn to_source(&self) -> String {
        match self {
            Case::Program(e) => format!("{}\n", print_term(e)),
            Case::Judgement { env, items } => {
                let mut out = format!("-- env: {env}\n");
                for item in items {
                    out.push_str(&format!("-- {item}\n"));
                }
                out
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Verdict {
    Pass,
    /// The generated input did not meet the property's precondition.
    Discard,
    Fail {
        case: Case,
        reason: String,
        trace: Option<Vec<String>>,
    },
}

impl Verdict {
    pub fn is_fail(&self) -> bool {
        matches!(self, Verdict::Fail { .. })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Counterexample {
    pub property: Property,
    pub seed: u64,
    pub case_index: u64,
    pub case: Case,
    pub reason: String,
    pub trace: Option<Vec<String>>,
    pub shrunk: bool,
    /// Choice sequence that regenerates `case`.
    pub choices: Vec<u32>,
}

impl Counterexample {
    /// One comment line identifying the failure.
    pub fn metadata_line(&self) -> String {
        let choices: Vec<String> = self.choices.iter().map(u32::to_string).collect();
        format!(
            "-- property={} seed={} case={} shrunk={} choices={}",
            self.property,
            self.seed,
            self.case_index,
            self.shrunk,
            choices.join(",")
        )
    }

    /// Contents of a `.ccbox` file: metadata, reason, case, then any trace.
    pub fn to_file(&self) -> String {
        let mut out = format!("{}\n-- reason: {}\n", self.metadata_line(), self.reason);
        out.push_str(&self.case.to_source());
        if let Some(trace) = &self.trace {
            for line in trace {
                out.push_str(&format!("-- {line}\n"));
            }
        }
        out
    }

    /// Regenerate the case from its choices and check it again.
    pub fn replay(&self, cfg: &GenConfig) -> Verdict {
        check_property(self.property, &mut Gen::new(*cfg, Choices::replay(&self.choices)))
    }
}

fn render_env(g: &Env) -> String {
    let parts: Vec<String> = g
        .bindings()
        .map(|b| match b {
            Binding::Term(x, t) => format!("{x} : {}", print_type(t)),
            Binding::Type(x, t) => format!("{x} <: {}", print_type(t)),
        })
        .collect();
    if parts.is_empty() {
        "[]".into()
    } else {
        parts.join(", ")
    }
}

fn judgement(g: &Env, items: &[String]) -> Case {
    Case::Judgement {
        env: render_env(g),
        items: items.to_vec(),
    }
}

fn fail(case: Case, reason: impl Into<String>) -> Verdict {
    Verdict::Fail {
        case,
        reason: reason.into(),
        trace: None,
    }
}

fn check(ok: bool, case: impl FnOnce() -> Case, reason: &str) -> Verdict {
    if ok {
        Verdict::Pass
    } else {
        fail(case(), reason)
    }
}

/// Generate one input from `gen` and check `property` on it.
pub fn check_property(property: Property, gen: &mut Gen) -> Verdict {
    let depth = gen.cfg.max_type_depth;
    match property {
        Property::GeneratorSoundness => {
            let g = gen.env();
            if !wf_env(&g) {
                return fail(judgement(&g, &[]), "generated environment is not well formed");
            }
            let t = gen.wf_type(&g, depth);
            if !(t.is_type() && wf_type(&g, &t)) {
                return fail(judgement(&g, &[print_type(&t)]), "generated type is not well formed");
            }
            let (e, goal) = gen.well_typed_program();
            match infer_type(&Env::new(), &e) {
                Ok(u) if subtype(&Env::new(), &u, &goal) => Verdict::Pass,
                Ok(_) => fail(Case::Program(e), "program type misses its goal"),
                Err(err) => fail(Case::Program(e), format!("generated program is ill typed: {err}")),
            }
        }
        Property::PurityStability => {
            let g = gen.env();
            let x = gen.supply.fresh_type();
            let g_x = g.with_fresh(Binding::Type(x, TypeExpr::Top));
            let t = gen.wf_type(&g_x, depth);
            let r = gen.pure_type(&g, depth);
            let substituted = subst_type_atom_in_type(&t, x, &r);
            let stable = t.is_pure() == substituted.is_pure()
                && t.is_type() == substituted.is_type()
                && wf_type(&g, &substituted);
            check(
                stable,
                || judgement(&g_x, &[print_type(&t), print_type(&r), print_type(&substituted)]),
                "substituting a pure type changed the classification",
            )
        }
        Property::OpenCloseRoundTrip => {
            let g = gen.env();
            let param = gen.wf_type(&g, depth);
            let x = gen.supply.fresh_term();
            let g_x = g.with_fresh(Binding::Term(x, param));
            let t = gen.wf_type(&g_x, depth);
            let closed = close_term_var_in_type(&t, 0, x);
            if open_term_var_in_type(&closed, 0, x) != t {
                return fail(judgement(&g_x, &[print_type(&t)]), "open after close is not the identity on types");
            }
            let (e, _) = gen.well_typed_program();
            let body = match &e {
                TermExpr::Let(_, body) | TermExpr::Abs(_, body) => (**body).clone(),
                _ => return Verdict::Pass,
            };
            let y = gen.supply.fresh_term();
            let round = close_term_var_in_term(&open_term_var_in_term(&body, 0, y), 0, y);
            check(round == body, || Case::Program(e.clone()), "close after open is not the identity on terms")
        }
        Property::WfWeakening => {
            let g = gen.env();
            let t = gen.wf_type(&g, depth);
            let extra = if gen.choices.chance(1, 2) {
                let bound = gen.pure_type(&g, 2);
                Binding::Type(gen.supply.fresh_type(), bound)
            } else {
                let ty = gen.wf_type(&g, 2);
                Binding::Term(gen.supply.fresh_term(), ty)
            };
            let g2 = g.with_fresh(extra);
            check(
                wf_type(&g2, &t),
                || judgement(&g2, &[print_type(&t)]),
                "type stopped being well formed in a larger environment",
            )
        }
        Property::SubcaptureOracle => {
            let g = gen.env();
            let c1 = gen.capture_set(&g);
            let c2 = gen.capture_set(&g);
            let alg = subcapture(&g, &c1, &c2);
            let dec = declarative_subcapture(&g, &c1, &c2, default_oracle_depth(&g));
            check(
                alg == dec,
                || {
                    judgement(
                        &g,
                        &[format!(
                            "{} <: {} algorithmic={alg} declarative={dec}",
                            crate::frontend::print_capture_set(&c1),
                            crate::frontend::print_capture_set(&c2)
                        )],
                    )
                },
                "subcapture disagrees with the derivation search",
            )
        }
        Property::SubtypeReflexivity => {
            let g = gen.env();
            let t = gen.wf_type(&g, depth);
            check(subtype(&g, &t, &t), || judgement(&g, &[print_type(&t)]), "type is not a subtype of itself")
        }
        Property::SubtypeTransitivity => {
            let g = gen.env();
            let (t1, t2, t3) = if gen.choices.chance(1, 2) {
                let t1 = gen.wf_type(&g, depth);
                let t2 = gen.supertype(&g, &t1, depth);
                let t3 = gen.supertype(&g, &t2, depth);
                (t1, t2, t3)
            } else {
                let t2 = gen.wf_type(&g, depth);
                let t1 = gen.subtype_of(&g, &t2, depth);
                let t3 = gen.supertype(&g, &t2, depth);
                (t1, t2, t3)
            };
            if !(subtype(&g, &t1, &t2) && subtype(&g, &t2, &t3)) {
                return Verdict::Discard;
            }
            check(
                subtype(&g, &t1, &t3),
                || judgement(&g, &[print_type(&t1), print_type(&t2), print_type(&t3)]),
                "subtyping is not transitive",
            )
        }
        Property::PrintParseRoundTrip => {
            let g = gen.env();
            let t = gen.wf_type(&g, depth);
            let scope = atom_scope(g.all_atoms());
            let printed = print_type(&t);
            if parse_type(&printed, &scope).ok().as_ref() != Some(&t) {
                return fail(judgement(&g, &[printed]), "printed type does not parse back");
            }
            let (e, _) = gen.well_typed_program();
            let printed = print_term(&e);
            let back = parse_with_scope(&printed, &atom_scope(e.free_atoms())).map(|p| p.term);
            check(back.as_ref() == Ok(&e), || Case::Program(e.clone()), "printed program does not parse back")
        }
        Property::Preservation | Property::Progress => {
            let (e, _) = gen.well_typed_program();
            let run = check_soundness(&e, SUITE_FUEL);
            let violation = if property == Property::Preservation {
                run.preservation.clone()
            } else {
                run.progress.clone()
            };
            match violation {
                None if run.ill_typed_program => Verdict::Discard,
                None => Verdict::Pass,
                Some(reason) => Verdict::Fail {
                    case: Case::Program(e),
                    reason,
                    trace: Some(
                        run.states
                            .iter()
                            .enumerate()
                            .map(|(i, s)| {
                                let rule = i.checked_sub(1).and_then(|j| run.rules.get(j));
                                let label = rule.map_or("INIT", |r: &Rule| r.label());
                                format!("step {i} [{label}] {}", print_state(s))
                            })
                            .collect(),
                    ),
                },
            }
        }
        Property::Determinism => {
            let (e, _) = gen.well_typed_program();
            match check_determinism(&e, SUITE_FUEL) {
                Ok(()) => Verdict::Pass,
                Err(reason) => fail(Case::Program(e), reason),
            }
        }
    }
}

/// Results for one property.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PropertyReport {
    pub property: Property,
    pub passed: usize,
    pub discarded: usize,
    pub failed: usize,
    /// The first failure, shrunk.
    pub counterexample: Option<Counterexample>,
}

impl PropertyReport {
    pub fn ok(&self) -> bool {
        self.failed == 0
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Report {
    pub properties: Vec<PropertyReport>,
}

impl Report {
    pub fn ok(&self) -> bool {
        self.properties.iter().all(PropertyReport::ok)
    }

    pub fn counterexamples(&self) -> impl Iterator<Item = &Counterexample> {
        self.properties.iter().filter_map(|p| p.counterexample.as_ref())
    }
}

impl fmt::Display for Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for p in &self.properties {
            let status = if p.ok() { "pass" } else { "FAIL" };
            writeln!(
                f,
                "{status} {:<24} {} passed, {} discarded, {} failed",
                p.property.name(),
                p.passed,
                p.discarded,
                p.failed
            )?;
        }
        Ok(())
    }
}

fn stream(property: Property, case: u64) -> u64 {
    ((property as u64) << 40) | case
}

/// Check `property` on `cfg.count` cases that meet its precondition, giving
/// up on discards after ten times that many attempts. Cases are split over
/// threads; the outcome does not depend on the split.
pub fn run_property(property: Property, cfg: &GenConfig) -> PropertyReport {
    let max_attempts = cfg.count.saturating_mul(10).max(1);
    let threads = thread::available_parallelism().map_or(1, |n| n.get()).min(16);
    let mut verdicts: Vec<(u64, Verdict)> = Vec::new();
    let mut next = 0u64;
    let mut kept = 0usize;
    while kept < cfg.count && (next as usize) < max_attempts {
        let want = (cfg.count - kept).min(max_attempts - next as usize);
        let batch: Vec<u64> = (next..next + want as u64).collect();
        next += want as u64;
        let chunk = batch.len().div_ceil(threads).max(1);
        let results: Vec<(u64, Verdict)> = thread::scope(|scope| {
            let handles: Vec<_> = batch
                .chunks(chunk)
                .map(|ids| {
                    scope.spawn(move || {
                        ids.iter()
                            .map(|&i| {
                                let mut gen = Gen::new(*cfg, Choices::random(cfg.seed, stream(property, i)));
                                (i, check_property(property, &mut gen))
                            })
                            .collect::<Vec<_>>()
                    })
                })
                .collect();
            handles.into_iter().flat_map(|h| h.join().expect("property thread panicked")).collect()
        });
        kept += results.iter().filter(|(_, v)| *v != Verdict::Discard).count();
        verdicts.extend(results);
    }
    verdicts.sort_by_key(|(i, _)| *i);

    let mut report = PropertyReport {
        property,
        passed: 0,
        discarded: 0,
        failed: 0,
        counterexample: None,
    };
    for (i, v) in &verdicts {
        match v {
            Verdict::Pass => report.passed += 1,
            Verdict::Discard => report.discarded += 1,
            Verdict::Fail { .. } => {
                report.failed += 1;
                if report.counterexample.is_none() {
                    report.counterexample = Some(minimize(property, cfg, *i));
                }
            }
        }
    }
    report
}

/// Shrink the failing case `case_index` of `property` on its choice sequence.
pub fn minimize(property: Property, cfg: &GenConfig, case_index: u64) -> Counterexample {
    let mut gen = Gen::new(*cfg, Choices::random(cfg.seed, stream(property, case_index)));
    let original = check_property(property, &mut gen);
    let recorded = gen.choices.into_recorded();
    let smallest = shrink(recorded.clone(), SHRINK_BUDGET, |seq| {
        check_property(property, &mut Gen::new(*cfg, Choices::replay(seq))).is_fail()
    });
    let shrunk = smallest != recorded;
    let (verdict, choices) = if shrunk {
        let mut gen = Gen::new(*cfg, Choices::replay(&smallest));
        let v = check_property(property, &mut gen);
        (v, gen.choices.into_recorded())
    } else {
        (original, recorded)
    };
    let Verdict::Fail { case, reason, trace } = verdict else {
        unreachable!("shrinking only keeps failing sequences")
    };
    Counterexample {
        property,
        seed: cfg.seed,
        case_index,
        case,
        reason,
        trace,
        shrunk,
        choices,
    }
}

/// Run every property with `cfg`.
pub fn run_property_suite(cfg: &GenConfig) -> Report {
    Report {
        properties: Property::ALL.iter().map(|p| run_property(*p, cfg)).collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_round_trip() {
        for p in Property::ALL {
            assert_eq!(Property::from_name(p.name()), Some(p));
        }
    }

    #[test]
    fn small_suite_passes() {
        let cfg = GenConfig {
            count: 20,
            ..GenConfig::default()
        };
        let report = run_property_suite(&cfg);
        assert!(report.ok(), "{report}");
    }

    #[test]
    fn runs_are_reproducible() {
        let cfg = GenConfig {
            count: 15,
            seed: 42,
            ..GenConfig::default()
        };
        assert_eq!(
            run_property(Property::SubtypeTransitivity, &cfg),
            run_property(Property::SubtypeTransitivity, &cfg)
        );
    }
}
