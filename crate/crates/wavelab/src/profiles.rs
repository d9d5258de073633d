//! Built-in analytic data profiles. Each profile is parameterized by
//! amplitude/center/width and documents the compatibility order it supports,
//! evaluated by running the nonlinear compatibility recursion on refined
//! grids when the catalog is built.

use serde::{Deserialize, Serialize};

use crate::compat;
use crate::error::{Error, Result};
use crate::fields::{make_grid, Params, RadialGrid};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProfileKind {
    /// compact bump ((r-a)(b-r))⁴ on (a, b), peak-normalized
    Bump4,
    /// Gaussian times a smooth cutoff vanishing at the obstacle
    GaussCut,
    /// boundary-touching polynomial (r-1)² z-shape: vanishes to first order
    /// at r = 1, so only the order-1 conditions hold
    PolyCompat,
}

impl ProfileKind {
    pub fn name(&self) -> &'static str {
        match self {
            ProfileKind::Bump4 => "bump4",
            ProfileKind::GaussCut => "gauss_cut",
            ProfileKind::PolyCompat => "poly_compat",
        }
    }

    pub fn from_name(name: &str) -> Result<Self> {
        match name {
            "bump4" => Ok(ProfileKind::Bump4),
            "gauss_cut" => Ok(ProfileKind::GaussCut),
            "poly_compat" => Ok(ProfileKind::PolyCompat),
            other => Err(Error::UnknownProfile(other.into())),
        }
    }

    pub fn description(&self) -> &'static str {
        match self {
            ProfileKind::Bump4 => "compact bump ((r-a)(b-r))^4 normalized to its amplitude",
            ProfileKind::GaussCut => "Gaussian exp(-((r-c)/w)^2) times a smooth obstacle cutoff",
            ProfileKind::PolyCompat => {
                "boundary-compatible polynomial vanishing to first order at r = 1"
            }
        }
    }
}

/// A concrete profile instance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Profile {
    pub kind: ProfileKind,
    pub amplitude: f64,
    pub center: f64,
    pub width: f64,
}

/// C^∞ transition equal to 0 for s <= 0 and 1 for s >= 1.
fn smoothstep(s: f64) -> f64 {
    if s <= 0.0 {
        0.0
    } else if s >= 1.0 {
        1.0
    } else {
        let e = |x: f64| (-1.0 / x).exp();
        e(s) / (e(s) + e(1.0 - s))
    }
}

impl Profile {
    pub fn new(kind: ProfileKind, amplitude: f64, center: f64, width: f64) -> Result<Self> {
        if !(width > 0.0) {
            return Err(Error::Params(format!("profile width {width} must be positive")));
        }
        match kind {
            ProfileKind::Bump4 => {
                if center - width / 2.0 < 1.0 {
                    return Err(Error::Params(format!(
                        "bump4 support [{}, {}] must lie inside the domain r > 1",
                        center - width / 2.0,
                        center + width / 2.0
                    )));
                }
            }
            ProfileKind::GaussCut | ProfileKind::PolyCompat => {
                if center <= 1.0 {
                    return Err(Error::Params(format!(
                        "profile center {center} must exceed the obstacle radius 1"
                    )));
                }
            }
        }
        Ok(Profile {
            kind,
            amplitude,
            center,
            width,
        })
    }

    pub fn eval(&self, r: f64) -> f64 {
        let (a, b) = (self.center - self.width / 2.0, self.center + self.width / 2.0);
        match self.kind {
            ProfileKind::Bump4 => {
                if r > a && r < b {
                    let norm = (self.width / 2.0).powi(8);
                    self.amplitude * ((r - a) * (b - r)).powi(4) / norm
                } else {
                    0.0
                }
            }
            ProfileKind::GaussCut => {
                let z = (r - self.center) / self.width;
                self.amplitude * (-z * z).exp() * smoothstep((r - 1.0) / (0.5 * self.width))
            }
            ProfileKind::PolyCompat => {
                if r > 1.0 && r < b {
                    let z = (r - 1.0) / (b - 1.0);
                    // max of z²(1-z)⁴ is 16/729 at z = 1/3
                    self.amplitude * z * z * (1.0 - z).powi(4) * 729.0 / 16.0
                } else {
                    0.0
                }
            }
        }
    }

    /// Outermost radius with |profile| above the causality floor.
    pub fn support_radius(&self) -> f64 {
        match self.kind {
            ProfileKind::Bump4 => self.center + self.width / 2.0,
            ProfileKind::PolyCompat => self.center + self.width / 2.0,
            ProfileKind::GaussCut => {
                let floor = 1e-14;
                if self.amplitude.abs() <= floor {
                    return 1.0;
                }
                self.center + self.width * (self.amplitude.abs() / floor).ln().sqrt()
            }
        }
    }

    pub fn sample(&self, grid: &RadialGrid) -> Vec<f64> {
        let mut out: Vec<f64> = (0..grid.num_points).map(|i| self.eval(grid.r(i))).collect();
        out[0] = 0.0;
        out
    }
}

/// Catalog entry: name, description and the compatibility order obtained by
/// evaluating the nonlinear recursion on refined grids.
#[derive(Debug, Clone, Serialize)]
pub struct ProfileInfo {
    pub name: String,
    pub description: String,
    pub compat_order: usize,
}

/// Compatibility order supported by a profile used as u0 (u1 = 0): the
/// largest m <= 4 such that ψ_0..ψ_m pass the boundary check and their H¹
/// norms stay stable under grid refinement (a growing norm flags a ψ_j that
/// leaves H¹ in the continuum limit).
pub fn evaluated_compat_order(profile: &Profile) -> usize {
    let params = Params::new(3, 7.0, "catalog").unwrap();
    let r_max = profile.support_radius() + 0.5;
    let run = |pts: usize| {
        let grid = make_grid(r_max, pts).unwrap();
        let u0 = profile.sample(&grid);
        let u1 = vec![0.0; grid.num_points];
        let rep = compat::nonlinear_sequence(&u0, &u1, &grid, &params, 4).unwrap();
        let norms: Vec<f64> = rep
            .sequence
            .iter()
            .map(|psi| crate::fields::sobolev_norm(psi, &grid, 3, 1).unwrap())
            .collect();
        (rep, norms)
    };
    let base = ((r_max - 1.0) / 7.5e-4).round() as usize + 1;
    let (rep_coarse, norms_coarse) = run(base);
    let (rep_fine, norms_fine) = run(2 * (base - 1) + 1);
    let mut order = 0;
    for j in 0..=4 {
        let boundary_ok = rep_coarse.verdicts[j] && rep_fine.verdicts[j];
        let stable = if norms_coarse[j] <= 1e-12 {
            true
        } else {
            norms_fine[j] / norms_coarse[j] <= 1.3
        };
        if boundary_ok && stable {
            order = j;
        } else {
            break;
        }
    }
    order
}

/// The built-in catalog with evaluated compatibility orders, optionally
/// filtered by a substring of the name. Unknown filters yield an empty list.
pub fn catalog(filter: Option<&str>) -> Vec<ProfileInfo> {
    let reference = [
        Profile::new(ProfileKind::Bump4, 1.0, 2.5, 2.0).unwrap(),
        Profile::new(ProfileKind::GaussCut, 1.0, 2.5, 0.8).unwrap(),
        Profile::new(ProfileKind::PolyCompat, 1.0, 2.0, 2.0).unwrap(),
    ];
    reference
        .iter()
        .filter(|p| match filter {
            Some(f) => p.kind.name().contains(f),
            None => true,
        })
        .map(|p| ProfileInfo {
            name: p.kind.name().into(),
            description: p.kind.description().into(),
            compat_order: evaluated_compat_order(p),
        })
        .collect()
}
