//! Capture checking with boxes.
//!
//! A locally-nameless implementation of a capture calculus with boxes:
//! capture sets and subcapturing, bounded polymorphism restricted to pure
//! type arguments, boxing and unboxing, and a store/stack/focus abstract
//! machine. The [`testkit`] module supplies generators and oracles that check
//! soundness properties by testing.

pub mod binding;
pub mod frontend;
pub mod machine;
pub mod subtyping;
pub mod syntax;
pub mod testkit;
pub mod typing;
pub mod wellformed;

pub use machine::{run, step, type_state, type_state_reusing, MachineState, Outcome, Rule, StepResult};
pub use subtyping::{subcapture, subtype};
pub use syntax::{Atom, AtomSupply, CaptureSet, TermExpr, TermVar, TypeExpr, TypeVar, Var};
pub use typing::{check_against, cv, infer_type, TypingError, TypingErrorKind};
pub use wellformed::{wf_env, wf_type, Binding, Env};
