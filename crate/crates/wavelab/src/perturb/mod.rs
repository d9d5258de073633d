//! Nonradial perturbations of the radial background: the linearized
//! per-mode equation, the full nonlinear difference equation in
//! axisymmetric form (n = 3), the spacetime norm M(T), the ε-sweep
//! stability experiment, and the weak-strong Gronwall diagnostic.

mod axisym;
mod background;
mod kernel;
mod modes;
mod sweep;

pub use axisym::{
    axisym_derivative, axisym_lp_norm, axisym_max_dt, evolve_axisym, AxisymState, ThetaGrid,
};
pub use background::{potential, Background};
pub use kernel::{expansion_identity_error, f_kernel, nonlinear_difference};
pub use modes::{evolve_mode, legendre_p, linearized_mode_rhs, ModeState};
pub use sweep::{
    gronwall_check, m_norm, sobolev_extended_delta, stability_sweep, sweep_csv, DecompSample,
    GronwallReport, PerturbationShape, StabilityRecord, SweepMode, SweepSettings,
};
