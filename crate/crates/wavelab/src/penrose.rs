//! Penrose compactification: coordinate maps, the conformal factor, the
//! image of the obstacle boundary, field transformation, and the leapfrog
//! solver for the extended equation on the sphere
//!
//!   ∂_T²U = ∂_α²U + (n-1) cot(α) ∂_αU - ((n-1)²/4) U - ω̃^ν |U|^{p-1} U,
//!   ν = (n-1)p/2 - (n+3)/2,
//!
//! where ω̃ = max(cos T + cos α, 0) extends the conformal factor by zero
//! beyond the null line T + α = π. The obstacle boundary r = 1 maps to the
//! curve α = Γ(T), handled by zero-masking plus a first-order cut-cell
//! ghost; the α-grid is staggered by half a spacing so neither pole is ever
//! a node and the cot α coefficient stays finite.

use std::f64::consts::PI;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fields::{cubic_interp, Params, RadialState};

/// CFL ceiling in compact coordinates (unit propagation speed in (T, α)).
pub const CFL_FRACTION: f64 = 0.9;

/// A point (T, α) on the Einstein cylinder.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PenrosePoint {
    pub t_compact: f64,
    pub alpha: f64,
}

/// Π: (t, r) ↦ (T, α) = (arctan(t+r) + arctan(t-r), arctan(t+r) - arctan(t-r)).
pub fn to_penrose(t: f64, r: f64) -> PenrosePoint {
    debug_assert!(r > 0.0);
    let a = (t + r).atan();
    let b = (t - r).atan();
    PenrosePoint {
        t_compact: a + b,
        alpha: a - b,
    }
}

/// Conformal factor ω = cos T + cos α.
#[inline]
pub fn omega(pt: PenrosePoint) -> f64 {
    pt.t_compact.cos() + pt.alpha.cos()
}

/// The same factor in physical coordinates, ω = 2/(⟨t+r⟩⟨t-r⟩).
#[inline]
pub fn omega_physical(t: f64, r: f64) -> f64 {
    2.0 / (crate::fields::bracket(t + r) * crate::fields::bracket(t - r))
}

/// Π^{-1}: (T, α) ↦ (sin T/ω, sin α/ω); defined only inside the diamond.
pub fn from_penrose(pt: PenrosePoint) -> Result<(f64, f64)> {
    let w = omega(pt);
    if w <= 0.0 {
        return Err(Error::OutsideDiamond {
            t_compact: pt.t_compact,
            alpha: pt.alpha,
            omega: w,
        });
    }
    Ok((pt.t_compact.sin() / w, pt.alpha.sin() / w))
}

/// Γ(T) = π/4 + arcsin(cos T/√2): the α-coordinate of the obstacle boundary.
pub fn boundary_alpha(t_compact: f64) -> f64 {
    PI / 4.0 + (t_compact.cos() / 2.0f64.sqrt()).asin()
}

/// dΓ/dT = -(sin T/√2)/(1 - cos²T/2)^{1/2}; finite on all of [0, π].
pub fn boundary_alpha_slope(t_compact: f64) -> f64 {
    let c = t_compact.cos();
    -(t_compact.sin() / 2.0f64.sqrt()) / (1.0 - 0.5 * c * c).sqrt()
}

/// γ(α) = arccos(sin α - cos α): the inverse boundary curve, α ∈ (0, π/2].
pub fn boundary_time(alpha: f64) -> f64 {
    (alpha.sin() - alpha.cos()).acos()
}

/// γ'(α) = -(cos α + sin α)/(1 - (sin α - cos α)²)^{1/2}; the branch endpoint
/// α = π/2 has a vanishing denominator and is reported as unbounded.
pub fn boundary_time_slope(alpha: f64) -> Result<f64> {
    let s = alpha.sin() - alpha.cos();
    let denom_sq = 1.0 - s * s;
    if denom_sq <= 1e-12 {
        return Err(Error::UnboundedSlope { alpha });
    }
    Ok(-(alpha.cos() + alpha.sin()) / denom_sq.sqrt())
}

/// Staggered uniform grid on (0, π): α_j = (j + 1/2) dα, j = 0..num_points.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AlphaGrid {
    pub num_points: usize,
    pub d_alpha: f64,
}

impl AlphaGrid {
    pub fn new(num_points: usize) -> Result<Self> {
        if num_points < 32 {
            return Err(Error::Grid(format!(
                "alpha grid needs >= 32 points, got {num_points}"
            )));
        }
        Ok(AlphaGrid {
            num_points,
            d_alpha: PI / num_points as f64,
        })
    }

    #[inline]
    pub fn alpha(&self, j: usize) -> f64 {
        (j as f64 + 0.5) * self.d_alpha
    }

    /// Number of masked nodes at compact time T: exactly those with
    /// α_j <= Γ(T).
    pub fn mask_count(&self, t_compact: f64) -> usize {
        let x = boundary_alpha(t_compact) / self.d_alpha - 0.5;
        if x < 0.0 {
            0
        } else {
            (x.floor() as usize + 1).min(self.num_points)
        }
    }
}

/// The transformed field (U, ∂_T U) on a staggered α-grid at compact time T.
#[derive(Debug, Clone, PartialEq)]
pub struct CompactState {
    pub grid: AlphaGrid,
    pub t_compact: f64,
    pub u: Vec<f64>,
    pub w: Vec<f64>,
    pub params: Params,
    pub nu: f64,
    pub delta: f64,
    /// false switches the ω̃^ν |U|^{p-1}U term off (linear diagnostics runs)
    pub nonlinear: bool,
}

/// ν = (n-1)p/2 - (n+3)/2; must be positive for the extended equation.
pub fn nu_exponent(params: &Params) -> Result<f64> {
    let n = params.n as f64;
    let nu = (n - 1.0) * params.p / 2.0 - (n + 3.0) / 2.0;
    if nu < 1.0 {
        return Err(Error::Params(format!(
            "nu = {nu:.3} < 1: (n, p) = ({}, {}) is outside the compact solver's range",
            params.n, params.p
        )));
    }
    let n0 = (params.n / 2 + 1) as f64;
    if nu < n0 {
        log::warn!(
            "nu = {nu:.3} below the smoothness threshold N0 = {n0}: \
             reduced regularity of omega^nu at the null boundary degrades convergence"
        );
    }
    Ok(nu)
}

impl CompactState {
    pub fn zero(
        grid: AlphaGrid,
        params: Params,
        delta: f64,
        nonlinear: bool,
    ) -> Result<Self> {
        let nu = nu_exponent(&params)?;
        Ok(CompactState {
            grid,
            t_compact: 0.0,
            u: vec![0.0; grid.num_points],
            w: vec![0.0; grid.num_points],
            params,
            nu,
            delta,
            nonlinear,
        })
    }

    /// Zero the masked nodes and prescribe the first active node from the
    /// boundary interpolant (quadratic through (Γ, 0) and the two nodes
    /// beyond it; all weights bounded). The velocity at the cut follows the
    /// Dirichlet-curve relation W(Γ) = -Γ'(T) U'(Γ).
    fn enforce_boundary(&mut self) {
        let m = self.grid.num_points;
        let mask = self.grid.mask_count(self.t_compact);
        for j in 0..mask {
            self.u[j] = 0.0;
            self.w[j] = 0.0;
        }
        if mask >= m {
            return;
        }
        let j0 = mask;
        let da = self.grid.d_alpha;
        let gamma = boundary_alpha(self.t_compact);
        let eps = self.grid.alpha(j0) - gamma;
        let u_next = if j0 + 1 < m { self.u[j0 + 1] } else { 0.0 };
        let u_next2 = if j0 + 2 < m { self.u[j0 + 2] } else { u_next };
        // interpolation weights at α_{j0} = Γ + eps
        let lb = 2.0 * eps / (eps + da);
        let lc = -eps / (eps + 2.0 * da);
        self.u[j0] = lb * u_next + lc * u_next2;
        let du_bnd = cut_derivative(eps, da, u_next, u_next2);
        let w_bnd = -boundary_alpha_slope(self.t_compact) * du_bnd;
        let w_next = if j0 + 1 < m { self.w[j0 + 1] } else { 0.0 };
        let w_next2 = if j0 + 2 < m { self.w[j0 + 2] } else { w_next };
        // quadratic through (Γ, w_bnd) and the two nodes beyond
        let l0 = 2.0 * da * da / ((eps + da) * (eps + 2.0 * da));
        self.w[j0] = l0 * w_bnd + lb * w_next + lc * w_next2;
    }

    /// CSV columns `alpha,U,W`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "alpha,U,W")?;
        for j in 0..self.grid.num_points {
            writeln!(
                w,
                "{:.16e},{:.16e},{:.16e}",
                self.grid.alpha(j),
                self.u[j],
                self.w[j]
            )?;
        }
        Ok(())
    }

    pub fn sidecar(&self) -> CompactSidecar {
        CompactSidecar {
            t_compact: self.t_compact,
            n: self.params.n,
            p: self.params.p,
            nu: self.nu,
            delta: self.delta,
            gamma_t: boundary_alpha(self.t_compact),
        }
    }
}

/// JSON sidecar accompanying a compact snapshot.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CompactSidecar {
    #[serde(rename = "T")]
    pub t_compact: f64,
    pub n: usize,
    pub p: f64,
    pub nu: f64,
    pub delta: f64,
    #[serde(rename = "Gamma_T")]
    pub gamma_t: f64,
}

#[inline]
fn omega_tilde(t_compact: f64, alpha: f64) -> f64 {
    (t_compact.cos() + alpha.cos()).max(0.0)
}

/// Ghost value below the cut for the stencil at the first active node j0:
/// quadratic interpolation through (Γ, 0) and the two nodes *beyond* j0,
/// evaluated at α_{j0} - dα. Excluding u_{j0} from its own ghost keeps the
/// interpolation weights bounded (|w| <= 3) for every cut position, so no
/// small-cell time-step restriction arises.
#[inline]
fn cut_ghost(eps: f64, da: f64, u_next: f64, u_next2: f64) -> f64 {
    // nodes at distances (from Γ): x_b = eps + da, x_c = eps + 2 da;
    // evaluation point xg = eps - da
    let lb = 3.0 * (eps - da) / (eps + da);
    let lc = -2.0 * (eps - da) / (eps + 2.0 * da);
    lb * u_next + lc * u_next2
}

/// First-order-accurate boundary derivative ∂_α U(Γ) from the same
/// quadratic interpolant.
#[inline]
fn cut_derivative(eps: f64, da: f64, u_next: f64, u_next2: f64) -> f64 {
    let lb = (eps + 2.0 * da) / (da * (eps + da));
    let lc = -(eps + da) / (da * (eps + 2.0 * da));
    lb * u_next + lc * u_next2
}

/// Acceleration ∂_T W for the extended equation at compact time `t_compact`.
/// Masked nodes produce zero; the first active node uses the cut-cell ghost
/// (linear profile through U(Γ) = 0); the pole α = π uses even reflection.
fn accel_into(
    u: &[f64],
    t_compact: f64,
    grid: &AlphaGrid,
    params: &Params,
    nu: f64,
    nonlinear: bool,
    out: &mut [f64],
) {
    let m = grid.num_points;
    let da = grid.d_alpha;
    let n1 = (params.n - 1) as f64;
    let mass = n1 * n1 / 4.0;
    let pm1 = crate::fields::AbsPower::new(params.p - 1.0);
    let mask = grid.mask_count(t_compact);
    let gamma = boundary_alpha(t_compact);
    for x in out[..mask].iter_mut() {
        *x = 0.0;
    }
    for j in mask..m {
        let alpha = grid.alpha(j);
        let u_minus = if j == mask {
            let eps = alpha - gamma;
            let u_next = if j + 1 < m { u[j + 1] } else { u[j] };
            let u_next2 = if j + 2 < m { u[j + 2] } else { u_next };
            cut_ghost(eps, da, u_next, u_next2)
        } else {
            u[j - 1]
        };
        let u_plus = if j == m - 1 { u[m - 1] } else { u[j + 1] };
        let lap = (u_plus - 2.0 * u[j] + u_minus) / (da * da);
        let first = n1 * (alpha.cos() / alpha.sin()) * (u_plus - u_minus) / (2.0 * da);
        let mut a = lap + first - mass * u[j];
        if nonlinear {
            let ot = omega_tilde(t_compact, alpha);
            if ot > 0.0 {
                a -= ot.powf(nu) * pm1.eval(u[j]) * u[j];
            }
        }
        out[j] = a;
    }
}

/// Right-hand side (dU, dW) of the extended compactified equation.
pub fn compact_rhs(state: &CompactState) -> (Vec<f64>, Vec<f64>) {
    let mut dw = vec![0.0; state.grid.num_points];
    accel_into(
        &state.u,
        state.t_compact,
        &state.grid,
        &state.params,
        state.nu,
        state.nonlinear,
        &mut dw,
    );
    (state.w.clone(), dw)
}

/// One observation row along a compact evolution.
#[derive(Debug, Clone, PartialEq)]
pub struct CompactSample {
    pub t_compact: f64,
    pub energy_e: f64,
    pub energy_f: f64,
    pub sup_u: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct CompactLog {
    pub samples: Vec<CompactSample>,
}

impl CompactLog {
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "T,E,F,sup_U")?;
        for s in &self.samples {
            writeln!(
                w,
                "{:.16e},{:.16e},{:.16e},{:.16e}",
                s.t_compact, s.energy_e, s.energy_f, s.sup_u
            )?;
        }
        Ok(())
    }

    /// Largest uphill excursion above the running minimum of a series.
    pub fn max_uphill(series: &[f64]) -> f64 {
        let mut run_min = f64::INFINITY;
        let mut worst: f64 = 0.0;
        for &x in series {
            run_min = run_min.min(x);
            worst = worst.max(x - run_min);
        }
        worst
    }
}

/// Verlet evolution of the compact state to `t_end` (< π), logging energies
/// every `stride` steps.
pub fn evolve_compact(
    initial: &CompactState,
    t_end: f64,
    dt: f64,
    stride: usize,
    mut observer: impl FnMut(&CompactState),
) -> Result<(CompactState, CompactLog)> {
    if !(t_end < PI) {
        return Err(Error::Params(format!(
            "compact evolution must end before T = pi, got {t_end}"
        )));
    }
    let max_dt = CFL_FRACTION * initial.grid.d_alpha;
    if dt > max_dt {
        return Err(Error::CflViolation { dt, max_dt });
    }
    let span = t_end - initial.t_compact;
    let steps = (span / dt).ceil().max(1.0) as usize;
    let dt = span / steps as f64;
    let stride = stride.max(1);

    let mut state = initial.clone();
    state.enforce_boundary();
    let mut scratch = vec![0.0; state.grid.num_points];
    let mut log = CompactLog::default();
    let record =
        |s: &CompactState, log: &mut CompactLog, obs: &mut dyn FnMut(&CompactState)| {
            log.samples.push(CompactSample {
                t_compact: s.t_compact,
                energy_e: energy_e(s),
                energy_f: energy_f(s, s.delta).unwrap_or(f64::NAN),
                sup_u: s.u.iter().fold(0.0f64, |a, &x| a.max(x.abs())),
            });
            obs(s);
        };
    record(&state, &mut log, &mut observer);

    let t0 = initial.t_compact;
    for k in 1..=steps {
        let t_now = state.t_compact;
        let t_next = t0 + k as f64 * dt;
        accel_into(
            &state.u,
            t_now,
            &state.grid,
            &state.params,
            state.nu,
            state.nonlinear,
            &mut scratch,
        );
        for j in 0..state.grid.num_points {
            state.w[j] += 0.5 * dt * scratch[j];
            state.u[j] += dt * state.w[j];
        }
        // the mask and cut position belong to t_next from here on
        state.t_compact = t_next;
        state.enforce_boundary();
        accel_into(
            &state.u,
            t_next,
            &state.grid,
            &state.params,
            state.nu,
            state.nonlinear,
            &mut scratch,
        );
        for j in 0..state.grid.num_points {
            state.w[j] += 0.5 * dt * scratch[j];
        }
        state.enforce_boundary();
        if k % stride == 0 || k == steps {
            if !state.u.iter().all(|x| x.is_finite()) || !state.w.iter().all(|x| x.is_finite())
            {
                return Err(Error::NumericalBlowup { t: state.t_compact });
            }
            record(&state, &mut log, &mut observer);
        }
    }
    Ok((state, log))
}

/// Energy density (sin α)^{n-1}[(W² + U'²)/2 + ω̃^ν|U|^{p+1}/(p+1)
/// + ((n-1)²/8)U²] per active node, with the same ghost treatment as the
/// solver stencils. Returns (densities, mask, Γ).
fn energy_density(state: &CompactState) -> (Vec<f64>, usize, f64) {
    let grid = &state.grid;
    let m = grid.num_points;
    let da = grid.d_alpha;
    let n1 = (state.params.n - 1) as f64;
    let mask = grid.mask_count(state.t_compact);
    let gamma = boundary_alpha(state.t_compact);
    let mut dens = vec![0.0; m];
    for j in mask..m {
        let alpha = grid.alpha(j);
        let u_minus = if j == mask {
            let eps = alpha - gamma;
            let u_next = if j + 1 < m { state.u[j + 1] } else { state.u[j] };
            let u_next2 = if j + 2 < m { state.u[j + 2] } else { u_next };
            cut_ghost(eps, da, u_next, u_next2)
        } else {
            state.u[j - 1]
        };
        let u_plus = if j == m - 1 { state.u[m - 1] } else { state.u[j + 1] };
        let du = (u_plus - u_minus) / (2.0 * da);
        let mut e = 0.5 * (state.w[j] * state.w[j] + du * du)
            + n1 * n1 / 8.0 * state.u[j] * state.u[j];
        if state.nonlinear {
            let ot = omega_tilde(state.t_compact, alpha);
            if ot > 0.0 {
                e += ot.powf(state.nu) * state.u[j].abs().powf(state.params.p + 1.0)
                    / (state.params.p + 1.0);
            }
        }
        dens[j] = alpha.sin().powf(n1) * e;
    }
    (dens, mask, gamma)
}

/// E(T) = ∫_{Γ(T)}^{π} energy density dα: midpoint rule over active cells
/// with the cut cell weighted by its covered width.
pub fn energy_e(state: &CompactState) -> f64 {
    let (dens, mask, gamma) = energy_density(state);
    let grid = &state.grid;
    let da = grid.d_alpha;
    if mask >= grid.num_points {
        return 0.0;
    }
    let mut sum = 0.0;
    for j in mask..grid.num_points {
        let left = grid.alpha(j) - 0.5 * da;
        let right = grid.alpha(j) + 0.5 * da;
        sum += (right - left.max(gamma)).max(0.0) * dens[j];
    }
    sum
}

/// F(T): the same integrand truncated at α = π - T + δ/4.
pub fn energy_f(state: &CompactState, delta: f64) -> Result<f64> {
    let upper = (PI - state.t_compact + delta / 4.0).min(PI);
    let gamma = boundary_alpha(state.t_compact);
    if gamma >= upper {
        return Err(Error::EmptyRange {
            lo: gamma,
            hi: upper,
        });
    }
    let (dens, mask, gamma) = energy_density(state);
    let grid = &state.grid;
    let da = grid.d_alpha;
    if mask >= grid.num_points {
        return Ok(0.0);
    }
    let mut sum = 0.0;
    for j in mask..grid.num_points {
        let left = grid.alpha(j) - 0.5 * da;
        let right = grid.alpha(j) + 0.5 * da;
        if left >= upper {
            break;
        }
        sum += (right.min(upper) - left.max(gamma)).max(0.0) * dens[j];
    }
    Ok(sum)
}

/// Cut-boundary values (U'(Γ), W(Γ)): the derivative from the boundary
/// interpolant, the velocity from the Dirichlet-curve relation
/// W(Γ) = -Γ'(T) U'(Γ).
fn cut_values(state: &CompactState) -> (f64, f64, usize, f64) {
    let grid = &state.grid;
    let m = grid.num_points;
    let mask = grid.mask_count(state.t_compact);
    let gamma = boundary_alpha(state.t_compact);
    if mask >= m {
        return (0.0, 0.0, mask, gamma);
    }
    let eps = grid.alpha(mask) - gamma;
    let u_next = if mask + 1 < m { state.u[mask + 1] } else { state.u[mask] };
    let u_next2 = if mask + 2 < m { state.u[mask + 2] } else { u_next };
    let du = cut_derivative(eps, grid.d_alpha, u_next, u_next2);
    let w = -boundary_alpha_slope(state.t_compact) * du;
    (du, w, mask, gamma)
}

/// Residual of the integrated flux identity over a slice of stored history:
///
///   E(T₂) - E(T₁) + ∫ [Γ' e(Γ) + (sin Γ)^{n-1} U'(Γ) W(Γ)] dT
///                 + ∫∫ ν ω̃^{ν-1} sin T (sin α)^{n-1} |U|^{p+1}/(p+1)
///
/// which vanishes for the exact solution; the discrete value shrinks at
/// order >= 1 under refinement (limited by the cut-cell treatment).
pub fn flux_identity_residual(history: &[CompactState]) -> Result<f64> {
    if history.len() < 3 {
        return Err(Error::HistoryTooShort {
            got: history.len(),
            need: 3,
        });
    }
    let n1 = (history[0].params.n - 1) as f64;
    let p = history[0].params.p;
    let nu = history[0].nu;
    let e_first = energy_e(&history[0]);
    let e_last = energy_e(&history[history.len() - 1]);

    // per-snapshot integrands for the boundary and sink time-integrals
    let mut boundary_term = Vec::with_capacity(history.len());
    let mut sink_term = Vec::with_capacity(history.len());
    for s in history {
        let (du, w, _mask, gamma) = cut_values(s);
        let slope = boundary_alpha_slope(s.t_compact);
        let weight = gamma.sin().powf(n1);
        let e_bnd = weight * 0.5 * (w * w + du * du);
        boundary_term.push(slope * e_bnd + weight * du * w);

        let mut sink = 0.0;
        if s.nonlinear {
            let (_, mask, _) = energy_density(s);
            let da = s.grid.d_alpha;
            for j in mask..s.grid.num_points {
                let alpha = s.grid.alpha(j);
                let ot = omega_tilde(s.t_compact, alpha);
                if ot > 0.0 {
                    sink += nu
                        * ot.powf(nu - 1.0)
                        * s.t_compact.sin()
                        * alpha.sin().powf(n1)
                        * s.u[j].abs().powf(p + 1.0)
                        / (p + 1.0)
                        * da;
                }
            }
        }
        sink_term.push(sink);
    }
    let dt = history[1].t_compact - history[0].t_compact;
    let trap = |series: &[f64]| -> f64 {
        let m = series.len();
        (0.5 * (series[0] + series[m - 1]) + series[1..m - 1].iter().sum::<f64>()) * dt
    };
    Ok((e_last - e_first + trap(&boundary_term) + trap(&sink_term)).abs())
}

// ---------------------------------------------------------------------------
// Field transformation u <-> U
// ---------------------------------------------------------------------------

/// One sample of the transformed field.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CompactSample2D {
    pub point: PenrosePoint,
    pub u_compact: f64,
}

fn interp_radial(values: &[f64], grid: &crate::fields::RadialGrid, r: f64) -> f64 {
    cubic_interp(values, (r - grid.r_min) / grid.h)
}

/// Transform a radial snapshot u(t, ·) into compact-field samples at the
/// requested α values (cubic interpolation from the radial grid). The image
/// of a constant-t slice is a curve in (T, α); each sample carries its own
/// point.
pub fn transform_snapshot(
    state: &RadialState,
    params: &Params,
    alphas: &[f64],
) -> Result<Vec<CompactSample2D>> {
    let kappa = (params.n - 1) as f64 / 2.0;
    let t = state.t;
    let alpha_of = |r: f64| (t + r).atan() - (t - r).atan();
    let (a_lo, a_hi) = (alpha_of(state.grid.r_min), alpha_of(state.grid.r_max));
    let mut out = Vec::with_capacity(alphas.len());
    for &alpha in alphas {
        if alpha < a_lo - 1e-12 || alpha > a_hi + 1e-12 {
            return Err(Error::OutsideDiamond {
                t_compact: f64::NAN,
                alpha,
                omega: f64::NAN,
            });
        }
        // α is strictly increasing in r at fixed t: bisect
        let (mut lo, mut hi) = (state.grid.r_min, state.grid.r_max);
        for _ in 0..80 {
            let mid = 0.5 * (lo + hi);
            if alpha_of(mid) < alpha {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let r = 0.5 * (lo + hi);
        let pt = to_penrose(t, r);
        let w = omega(pt);
        if w <= 0.0 {
            return Err(Error::OutsideDiamond {
                t_compact: pt.t_compact,
                alpha: pt.alpha,
                omega: w,
            });
        }
        let u_val = interp_radial(&state.u, &state.grid, r);
        out.push(CompactSample2D {
            point: pt,
            u_compact: w.powf(-kappa) * u_val,
        });
    }
    Ok(out)
}

/// Build the T = 0 compact slice from a radial state at t = 0:
///   U(0, α) = ω^{-(n-1)/2} u0(tan(α/2)),  W(0, α) = ω^{-(n+1)/2} u1(tan(α/2))
/// with ω = 1 + cos α. The data must fit inside the radial grid.
pub fn initial_compact_state(
    state: &RadialState,
    params: &Params,
    num_alpha: usize,
    delta: f64,
    nonlinear: bool,
) -> Result<CompactState> {
    if state.t != 0.0 {
        return Err(Error::Params(
            "initial_compact_state requires a t = 0 radial slice".into(),
        ));
    }
    let support = state.support_radius(1e-14);
    if support > state.grid.r_max - 4.0 * state.grid.h {
        return Err(Error::Params(format!(
            "radial data support (r <= {support:.3}) too close to the grid end \
             r_max = {:.3} for interpolation",
            state.grid.r_max
        )));
    }
    let grid = AlphaGrid::new(num_alpha)?;
    let mut cs = CompactState::zero(grid, params.clone(), delta, nonlinear)?;
    let kappa = (params.n - 1) as f64 / 2.0;
    let mask = grid.mask_count(0.0);
    for j in mask..grid.num_points {
        let alpha = grid.alpha(j);
        let r = (alpha / 2.0).tan();
        if r > state.grid.r_max {
            break; // data vanish out there by the support check
        }
        let w_conf = 1.0 + alpha.cos();
        cs.u[j] = w_conf.powf(-kappa) * interp_radial(&state.u, &state.grid, r);
        cs.w[j] = w_conf.powf(-kappa - 1.0) * interp_radial(&state.v, &state.grid, r);
    }
    Ok(cs)
}

/// Dual-representation comparison: for each stored compact snapshot, map
/// the active nodes comfortably inside the diamond back to physical
/// coordinates and compare ω^{(n-1)/2} U against the interpolated radial
/// solution. Returns (sup difference, number of points compared).
pub fn dual_representation_diff(
    history: &[CompactState],
    bg: &crate::perturb::Background,
) -> Result<(f64, usize)> {
    if history.is_empty() {
        return Err(Error::HistoryTooShort { got: 0, need: 1 });
    }
    let kappa = (history[0].params.n - 1) as f64 / 2.0;
    let mut worst: f64 = 0.0;
    let mut count = 0usize;
    for cs in history {
        let mask = cs.grid.mask_count(cs.t_compact);
        for j in mask..cs.grid.num_points {
            let pt = PenrosePoint {
                t_compact: cs.t_compact,
                alpha: cs.grid.alpha(j),
            };
            let w = omega(pt);
            // stay away from the null boundary and the cut cell
            if w < 0.25 || cs.grid.alpha(j) < boundary_alpha(cs.t_compact) + 3.0 * cs.grid.d_alpha
            {
                continue;
            }
            let (t, r) = from_penrose(pt)?;
            if !bg.covers(t, r) || r > bg.grid.r_max - 0.5 {
                continue;
            }
            let u_phys = w.powf(kappa) * cs.u[j];
            let u_ref = bg.u_at(t, r)?;
            worst = worst.max((u_phys - u_ref).abs());
            count += 1;
        }
    }
    Ok((worst, count))
}

/// Inverse transform of a compact slice: physical samples (t, r, u) for the
/// active nodes inside the diamond.
pub fn physical_samples(state: &CompactState) -> Vec<(f64, f64, f64)> {
    let kappa = (state.params.n - 1) as f64 / 2.0;
    let mask = state.grid.mask_count(state.t_compact);
    let mut out = Vec::new();
    for j in mask..state.grid.num_points {
        let pt = PenrosePoint {
            t_compact: state.t_compact,
            alpha: state.grid.alpha(j),
        };
        let w = omega(pt);
        if w <= 1e-9 {
            continue;
        }
        let (t, r) = from_penrose(pt).expect("omega checked positive");
        out.push((t, r, w.powf(kappa) * state.u[j]));
    }
    out
}
