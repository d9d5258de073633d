//! Numerical laboratory for the defocusing wave equation
//!
//!   u_tt - Δu + |u|^{p-1} u = 0
//!
//! posed on the exterior domain Ω = {|x| > 1} of R^n with homogeneous
//! Dirichlet data on the unit sphere. The crate evolves large radial
//! solutions in physical coordinates, evolves the conformally transformed
//! field on the sphere through the Penrose compactification, propagates
//! nonradial perturbations against the radial background, and measures the
//! energies, decay weights, Strichartz norms, Hardy ratios and Gronwall
//! bounds that control the dynamics.
//!
//! Conventions shared by every module:
//! * all radial integrals carry the measure r^{n-1} dr; the constant
//!   surface factor |S^{n-1}| is omitted everywhere (it cancels in every
//!   ratio the diagnostics form);
//! * ⟨s⟩ denotes the Japanese bracket (1 + s²)^{1/2};
//! * spatial derivatives use second-order centered stencils in the
//!   interior and second-order one-sided stencils at grid edges, uniformly
//!   across the crate (see [`fields::derivative`]).

pub mod compat;
pub mod config;
pub mod diagnostics;
pub mod error;
pub mod fields;
pub mod penrose;
pub mod perturb;
pub mod profiles;
pub mod radial;
pub mod runner;

pub use error::{Error, Result};
pub use fields::{EnergyReport, Params, RadialGrid, RadialState};
