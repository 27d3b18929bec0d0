//! Independent checks of a synthesized perturbation: probe traces, decay
//! verdicts and audits of the oscillatory-integral bounds.

pub mod audits;
pub mod sampled;
pub mod suites;
pub mod trace;

pub use audits::{
    check_cross_band, check_nonresonant, check_osc_bound, check_periodic_osc_bound, check_same_band_lower, half_period_check, panel_integral,
    BoundAudit, HalfPeriodReport, LemmaId, PhaseFn, DEFAULT_CROSS_BAND_SLACK,
};
pub use sampled::{ClosedForm, Perturbation, SampledPotential, TrajectoryPotential, ZeroPerturbation};
pub use suites::{lemma_suite, SuiteCounts, SuiteInstance, SuiteReport};
pub use trace::{
    decay_fit, decay_report, default_probes, direct_log_norm, norm_equivalence, probe_trace, prufer_trace, trace_grid, trace_probes, DecayReport,
    NormEquivalence, Probe, PruferTrace, TraceOptions, DEFAULT_TAIL_FRACTION, DEFAULT_VERDICT_MARGIN,
};
