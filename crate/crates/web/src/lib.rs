//! WebAssembly bindings for a static demo page: type check, evaluate, and
//! generate programs in the browser.

use wasm_bindgen::prelude::*;

use ccbox::frontend::{check_source, print_state, print_term, print_type};
use ccbox::machine::{run_traced, Outcome};
use ccbox::testkit::{gen_well_typed_program, GenConfig};

fn diagnostics(text: &str, ds: &[ccbox::frontend::Diagnostic]) -> String {
    ds.iter().map(|d| d.render("input", text)).collect()
}

/// The inferred type, or rendered diagnostics prefixed with `error`.
#[wasm_bindgen]
pub fn typecheck(text: &str) -> String {
    match check_source(text) {
        Ok((_, t)) => print_type(&t),
        Err(ds) => diagnostics(text, &ds),
    }
}

/// Type check, then run for at most `fuel` steps. One line per step,
/// then the outcome.
#[wasm_bindgen]
pub fn evaluate(text: &str, fuel: usize) -> String {
    let program = match check_source(text) {
        Ok((p, _)) => p.term,
        Err(ds) => return diagnostics(text, &ds),
    };
    let run = run_traced(&program, fuel);
    let mut out = String::new();
    let states = run.trace.unwrap_or_default();
    for (i, (rule, s)) in run.rules.iter().zip(&states).enumerate() {
        out.push_str(&format!("step {} [{rule}] {}\n", i + 1, print_state(s)));
    }
    match run.outcome {
        Outcome::Answer(a) => match a.variable {
            Some(x) => out.push_str(&format!("answer: {x} = {}\n", print_term(&a.value))),
            None => out.push_str(&format!("answer: {}\n", print_term(&a.value))),
        },
        Outcome::OutOfFuel(_) => out.push_str(&format!("out of fuel after {} steps\n", run.steps)),
        Outcome::Stuck(_, why) => out.push_str(&format!("stuck after {} steps: {why}\n", run.steps)),
    }
    out
}

/// A well-typed program drawn from the generator.
#[wasm_bindgen]
pub fn generate(seed: u64) -> String {
    let cfg = GenConfig {
        seed,
        ..GenConfig::default()
    };
    print_term(&gen_well_typed_program(&cfg, 0))
}
