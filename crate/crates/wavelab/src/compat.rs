//! Compatibility sequences for the mixed problem u_tt = Δu + f(u) on the
//! exterior domain: the linear sequence h_j = Δh_{j-2} + ∂_t^{j-2}F(0, ·)
//! and the nonlinear sequence ψ_j = Δψ_{j-2} + ∂_t^{j-2}(f(u))|_{t=0}, with
//! the time derivative of f(u) expanded through the chain rule in
//! ψ_0, ..., ψ_{j-2}. For the defocusing problem f(s) = -|s|^{p-1}s, so the
//! ψ_j are exactly the formal time derivatives ∂_t^j u(0, ·) of the solver's
//! semidiscrete flow.
//!
//! H¹₀-membership of ψ_j has no finite-grid meaning beyond the boundary
//! trace, so the verdict is the relative bound
//! |ψ_j(1)| <= 1e-8 ‖ψ_j‖_{H¹} + 1e-14. Orders are capped at 4: each
//! recursion level applies a discrete Laplacian and costs two orders of
//! accuracy, so deeper verdicts would be noise. (The headline theorems ask
//! for N >= 5n/2, which is untestable at this fidelity.)

use serde::Serialize;

use crate::error::{Error, Result};
use crate::fields::{derivative, radial_laplacian, sobolev_norm, Params, RadialGrid};

/// Relative boundary-trace tolerance for the H¹₀ verdict.
pub const BOUNDARY_TOL: f64 = 1e-8;

/// Maximum supported compatibility order.
pub const MAX_ORDER: usize = 4;

/// Result of computing a compatibility sequence.
#[derive(Debug, Clone, PartialEq)]
pub struct CompatReport {
    pub order: usize,
    /// ψ_0, ..., ψ_N (or h_0, ..., h_N)
    pub sequence: Vec<Vec<f64>>,
    /// |ψ_j(1)| per j
    pub boundary_values: Vec<f64>,
    /// pass/fail of the boundary-trace bound per j
    pub verdicts: Vec<bool>,
    pub tolerance: f64,
}

#[derive(Serialize)]
struct CompatReportJson<'a> {
    order: usize,
    boundary_values: &'a [f64],
    verdicts: &'a [bool],
    tolerance: f64,
}

impl CompatReport {
    pub fn all_pass(&self) -> bool {
        self.verdicts.iter().all(|&v| v)
    }

    /// Largest order m <= N such that ψ_0, ..., ψ_m all pass.
    pub fn passing_order(&self) -> Option<usize> {
        let mut last = None;
        for (j, &ok) in self.verdicts.iter().enumerate() {
            if ok {
                last = Some(j);
            } else {
                break;
            }
        }
        last
    }

    /// JSON form {order, boundary_values, verdicts, tolerance}.
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(CompatReportJson {
            order: self.order,
            boundary_values: &self.boundary_values,
            verdicts: &self.verdicts,
            tolerance: self.tolerance,
        })
        .expect("report serialization cannot fail")
    }
}

/// Discrete Laplacian Δ = ∂_r² + (n-1)/r ∂_r used by the recursions:
/// conservative flux form in the interior (bit-identical with the solver's
/// operator) and one-sided pointwise stencils at the two edge nodes, so the
/// boundary value Δf(1) is meaningful for the trace check.
pub fn dirichlet_laplacian(f: &[f64], grid: &RadialGrid, n: usize) -> Vec<f64> {
    let mut out = radial_laplacian(f, grid, n);
    let d1 = derivative(f, grid.h, 1);
    let d2 = derivative(f, grid.h, 2);
    let m = f.len();
    let c = (n - 1) as f64;
    out[0] = d2[0] + c / grid.r(0) * d1[0];
    out[m - 1] = d2[m - 1] + c / grid.r(m - 1) * d1[m - 1];
    out
}

fn check_order(order: usize) -> Result<()> {
    if order > MAX_ORDER {
        return Err(Error::CompatOrder {
            order,
            reason: format!("capped at {MAX_ORDER}: discrete Laplacian iterates lose accuracy"),
        });
    }
    Ok(())
}

fn finish_report(
    sequence: Vec<Vec<f64>>,
    grid: &RadialGrid,
    n: usize,
    order: usize,
) -> Result<CompatReport> {
    let mut boundary_values = Vec::with_capacity(sequence.len());
    let mut verdicts = Vec::with_capacity(sequence.len());
    for psi in &sequence {
        let bv = psi[0].abs();
        let h1 = sobolev_norm(psi, grid, n, 1)?;
        boundary_values.push(bv);
        verdicts.push(bv <= BOUNDARY_TOL * h1 + 1e-14);
    }
    Ok(CompatReport {
        order,
        sequence,
        boundary_values,
        verdicts,
        tolerance: BOUNDARY_TOL,
    })
}

/// Linear compatibility sequence h_j = Δh_{j-2} + ∂_t^{j-2}F(0, ·).
/// `forcing_time_derivatives[k]` holds ∂_t^k F(0, ·); orders above 1 need
/// entries up to k = order - 2.
pub fn linear_sequence(
    u0: &[f64],
    u1: &[f64],
    forcing_time_derivatives: &[Vec<f64>],
    grid: &RadialGrid,
    params: &Params,
    order: usize,
) -> Result<CompatReport> {
    check_order(order)?;
    let need = order.saturating_sub(1);
    if forcing_time_derivatives.len() < need {
        return Err(Error::MissingForcing {
            got: forcing_time_derivatives.len(),
            need,
            order,
        });
    }
    let mut seq: Vec<Vec<f64>> = vec![u0.to_vec()];
    if order >= 1 {
        seq.push(u1.to_vec());
    }
    for j in 2..=order {
        let lap = dirichlet_laplacian(&seq[j - 2], grid, params.n);
        let forced: Vec<f64> = lap
            .iter()
            .zip(forcing_time_derivatives[j - 2].iter())
            .map(|(a, b)| a + b)
            .collect();
        seq.push(forced);
    }
    finish_report(seq, grid, params.n, order)
}

/// Nonlinear sequence with an injected nonlinearity (f, f', f''); the
/// public power-law entry point wraps this. Expansion of ∂_t^m f(u)|_0:
///   m = 0: f(ψ_0)
///   m = 1: f'(ψ_0) ψ_1
///   m = 2: f''(ψ_0) ψ_1² + f'(ψ_0) ψ_2
pub(crate) fn nonlinear_sequence_with(
    u0: &[f64],
    u1: &[f64],
    grid: &RadialGrid,
    params: &Params,
    order: usize,
    f: impl Fn(f64) -> f64,
    fp: impl Fn(f64) -> f64,
    fpp: impl Fn(f64) -> f64,
) -> Result<CompatReport> {
    check_order(order)?;
    let mut seq: Vec<Vec<f64>> = vec![u0.to_vec()];
    if order >= 1 {
        seq.push(u1.to_vec());
    }
    for j in 2..=order {
        let lap = dirichlet_laplacian(&seq[j - 2], grid, params.n);
        let m = j - 2;
        let psi: Vec<f64> = (0..u0.len())
            .map(|i| {
                let chain = match m {
                    0 => f(seq[0][i]),
                    1 => fp(seq[0][i]) * seq[1][i],
                    2 => fpp(seq[0][i]) * seq[1][i] * seq[1][i] + fp(seq[0][i]) * seq[2][i],
                    _ => unreachable!("order capped at 4"),
                };
                lap[i] + chain
            })
            .collect();
        seq.push(psi);
    }
    finish_report(seq, grid, params.n, order)
}

/// Nonlinear compatibility sequence for the defocusing power nonlinearity:
/// u_tt = Δu + f(u) with f(s) = -|s|^{p-1}s, so that
///   f'(s) = -p|s|^{p-1},   f''(s) = -p(p-1)|s|^{p-3}s.
/// Requires p > order so the closed-form derivatives stay pointwise finite.
pub fn nonlinear_sequence(
    u0: &[f64],
    u1: &[f64],
    grid: &RadialGrid,
    params: &Params,
    order: usize,
) -> Result<CompatReport> {
    if params.p <= order as f64 {
        return Err(Error::CompatOrder {
            order,
            reason: format!(
                "insufficient smoothness: need p > N, got p = {} <= N = {order}",
                params.p
            ),
        });
    }
    let p = params.p;
    nonlinear_sequence_with(
        u0,
        u1,
        grid,
        params,
        order,
        move |s: f64| -s.abs().powf(p - 1.0) * s,
        move |s: f64| -p * s.abs().powf(p - 1.0),
        move |s: f64| -p * (p - 1.0) * s.abs().powf(p - 3.0) * s,
    )
}

/// Cheap sufficient screen: u0 and its radial derivatives up to order
/// ⌊n/2⌋ + N (and u1 up to ⌊n/2⌋ + N - 1) vanish at r = 1. Derivative
/// orders are capped at 3 by the stencil table; the screen is strictly
/// conservative (it uses the same relative tolerance as the sequence
/// verdicts), matching its role as a sufficient condition.
pub fn strong_condition_check(
    u0: &[f64],
    u1: &[f64],
    grid: &RadialGrid,
    n: usize,
    order: usize,
) -> bool {
    let k0 = (n / 2 + order).min(3);
    let k1 = (n / 2 + order).saturating_sub(1).min(3);
    let vanished = |f: &[f64], k_max: usize| -> bool {
        for k in 0..=k_max {
            let dk = derivative(f, grid.h, k);
            let sup = dk.iter().fold(0.0f64, |a, &x| a.max(x.abs()));
            if dk[0].abs() > BOUNDARY_TOL * sup + 1e-14 {
                return false;
            }
        }
        true
    };
    vanished(u0, k0) && vanished(u1, k1)
}
