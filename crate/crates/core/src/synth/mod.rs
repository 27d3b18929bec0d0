//! Construction of the perturbation: constants, activations and the coupled
//! Prüfer-angle system.

pub mod constants;
pub mod export;
pub mod growth;
pub mod phase;
pub mod pipeline;
pub mod plan;
pub mod system;

pub use constants::{lattice_distance, osc_bound, osc_constant, osc_threshold, periodic_bound, periodic_constant, unit_bound, unit_threshold};
pub use export::{export_potential, write_potential_csv, ExportFormat, ExportedTarget, StructuredRecord};
pub use growth::Growth;
pub use phase::{boundary_values, initial_phase, initial_state, InitialState};
pub use plan::{plan_constants, separation, LowerBound, Mode, PlanOptions, PlannedTarget, SynthesisPlan};
pub use system::{synthesize, HypothesisCheck, PruferTrajectory, SynthOptions};
pub use pipeline::{prepare, prepare_and_synthesize, Prepared, TargetSpec};
