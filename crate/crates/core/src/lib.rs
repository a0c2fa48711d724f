//! Compile quantifier-free semialgebraic set descriptions into a single real
//! polynomial whose zero set projects exactly onto the described set, and
//! verify the result numerically.
//!
//! The pipeline is `formula::parse` → `Formula::to_nnf` → `lift::compile`,
//! followed by `verify::check_projection`. The `gadget` module splices a
//! bridging circle into a lift to join two of its connected components
//! above a shared base point without changing the projection.

pub mod formula;
pub mod gadget;
pub mod gallery;
pub mod lift;
pub mod poly;
pub mod rational;
pub mod verify;

pub use formula::{Formula, NnfFormula, Rel, Tri};
pub use gadget::{GadgetError, WitnessPair};
pub use lift::{AuxValue, Lift, LiftError, WitnessProgram};
pub use poly::{AffineMap, EvalPlan, PolyError, Polynomial};
pub use rational::Rational;
pub use verify::{VerifyConfig, VerifyReport};
