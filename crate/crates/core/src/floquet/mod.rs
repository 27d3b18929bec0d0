//! Floquet analysis of `-u'' + V0 u = E u` with 1-periodic `V0`.

pub mod asymptotics;
pub mod audit;
pub mod bands;
pub mod frame;
pub mod fundamental;
pub mod potential;

pub use asymptotics::{anchor, asymptotic_anchor, eigenvalue_threshold, eta_curvature_bound, eta_rate_bounds, lk_thresholds, Thresholds};
pub use audit::{audit_asymptotic_bounds, audit_eta_bounds, unit_grid, AuditReport, Check};
pub use bands::{band, band_structure, eigenvalue, eigenvalue_with_margin, quasimomentum, Band, Direction, QuasiEigenvalue, K_MIN};
pub use frame::{floquet_frame, frame_pair, FloquetFrame, FramePoint};
pub use fundamental::{discriminant, discriminant_with_slope, fundamental_pair, monodromy, FundamentalPair, Monodromy};
pub use potential::{PeriodicPotential, Profile};
