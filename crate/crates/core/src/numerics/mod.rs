//! Generic numerical primitives shared by the rest of the crate.

pub mod fit;
pub mod ode;
pub mod quad;
pub mod root;
pub mod tableau;

pub use fit::{fit_line, LineFit};
pub use ode::{integrate_ivp, sample_ivp, DenseTrajectory, GridSolution, IvpOptions, Method, Solver};
pub use quad::{cumulative_integral, integrate_function, integrate_with_breaks, panel_edges};
pub use root::{find_root_bracketed, golden_max};
