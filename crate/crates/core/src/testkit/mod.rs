//! Generators, oracles and property runners.
//!
//! Everything here is deterministic in the [`GenConfig`] seed: case `i` of a
//! run draws from its own ChaCha stream, and a failing case is recorded as
//! the choice sequence that produced it.

pub mod choices;
pub mod gen;
pub mod oracle;
pub mod suite;

pub use choices::Choices;
pub use gen::{Gen, WfRule};
pub use oracle::{
    check_determinism, check_soundness, compare_subcapture_exhaustively, declarative_subcapture,
    default_oracle_depth, small_envs,
};
pub use suite::{
    check_property, run_property, run_property_suite, Case, Counterexample, Property, PropertyReport,
    Report, Verdict,
};

/// Generate a well-typed closed program for case `case` of `cfg`.
pub fn gen_well_typed_program(cfg: &GenConfig, case: u64) -> crate::syntax::TermExpr {
    Gen::new(*cfg, Choices::random(cfg.seed, case)).well_typed_program().0
}

/// Generate an environment and a type well formed in it.
pub fn gen_wf_type(cfg: &GenConfig, case: u64) -> (crate::wellformed::Env, crate::syntax::TypeExpr) {
    let mut gen = Gen::new(*cfg, Choices::random(cfg.seed, case));
    let g = gen.env();
    let t = gen.wf_type(&g, cfg.max_type_depth);
    (g, t)
}

/// Knobs shared by all generators.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GenConfig {
    pub seed: u64,
    pub max_env_depth: usize,
    pub max_type_depth: usize,
    pub max_term_depth: usize,
    pub count: usize,
}

impl Default for GenConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            max_env_depth: 4,
            max_type_depth: 4,
            max_term_depth: 6,
            count: 500,
        }
    }
}
