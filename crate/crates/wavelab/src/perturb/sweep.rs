//! The stability experiment: the a-priori norm M(T), the ε-sweep in
//! linearized and axisymmetric nonlinear modes, and the weak-strong
//! Gronwall diagnostic.
//!
//! Sweep runs co-evolve the radial background with each perturbation using
//! the same Verlet steps, so the perturbation equations always see the
//! background at the exact step times (no stored-frame interpolation and no
//! frame storage for long stiff runs). The stored-`Background` entry points
//! in `modes`/`axisym` remain available for runs whose frame stride passes
//! validation.

use std::collections::VecDeque;

use crate::compat;
use crate::error::{Error, Result};
use crate::fields::{derivative, time_lq, y_norm, Params, RadialGrid, RadialState};
use crate::profiles::Profile;
use crate::radial::{self, NonlinearitySpec};

use super::axisym::{
    axisym_accel_into, axisym_derivative, axisym_max_dt, axisym_weight, AxisymState, ThetaGrid,
};
use super::modes::{legendre_p, mode_accel_with};

// ---------------------------------------------------------------------------
// M(T) and the Sobolev-extended admissibility gate
// ---------------------------------------------------------------------------

/// δ such that q = 2/δ and r = 2n/(n-2-δ) with 0 <= δ < 1, when the pair
/// has that form.
pub fn sobolev_extended_delta(n: usize, q: f64, r_exp: f64) -> Option<f64> {
    let delta = if q.is_infinite() { 0.0 } else { 2.0 / q };
    if !(0.0..1.0).contains(&delta) {
        return None;
    }
    let denom = n as f64 - 2.0 - delta;
    if denom <= 0.0 {
        return None;
    }
    let r_target = 2.0 * n as f64 / denom;
    ((r_exp - r_target).abs() <= 1e-9 * r_target).then_some(delta)
}

/// M(T) = ‖w‖_{Y^{∞,2;m+1}} + ‖w‖_{Y^{q,r;m}} over a stored radial-channel
/// history. The derivative order m is capped at 1 on the discrete grid.
pub fn m_norm(
    history: &[RadialState],
    m_order: usize,
    q: f64,
    r_exp: f64,
    params: &Params,
) -> Result<f64> {
    if m_order > 1 {
        return Err(Error::CompatOrder {
            order: m_order,
            reason: "M(T) derivative order is capped at 1 discretely".into(),
        });
    }
    if sobolev_extended_delta(params.n, q, r_exp).is_none() {
        return Err(Error::InadmissiblePair { q, r: r_exp });
    }
    Ok(y_norm(history, params.n, f64::INFINITY, 2.0, m_order + 1)?
        + y_norm(history, params.n, q, r_exp, m_order)?)
}

// ---------------------------------------------------------------------------
// Streaming M(T) for axisymmetric runs
// ---------------------------------------------------------------------------

/// Ring-buffered spacetime-norm tracker: consumes uniformly spaced w
/// snapshots and accumulates the per-derivative spatial norm series needed
/// for M(T), with centered time differencing at a two-snapshot lag.
struct AxisymNormTracker {
    grid: RadialGrid,
    theta: ThetaGrid,
    q: f64,
    r_exp: f64,
    ring: VecDeque<Vec<f64>>,
    snap_dt: Option<f64>,
    last_t: Option<f64>,
    /// ‖∂_t^j ∂^α w‖_{L²} series, per (j, |α|) with j + |α| <= 2
    series_l2: Vec<Vec<f64>>,
    /// ‖∂_t^j ∂^α w‖_{L^{r_exp}} series, per (j, |α|) with j + |α| <= 1
    series_lr: Vec<Vec<f64>>,
    term_times: Vec<f64>,
}

impl AxisymNormTracker {
    fn new(grid: RadialGrid, theta: ThetaGrid, q: f64, r_exp: f64) -> Self {
        AxisymNormTracker {
            grid,
            theta,
            q,
            r_exp,
            ring: VecDeque::new(),
            snap_dt: None,
            last_t: None,
            series_l2: vec![Vec::new(); 6],
            series_lr: vec![Vec::new(); 3],
            term_times: Vec::new(),
        }
    }

    fn spatial_norms(&self, f: &[f64], orders: usize) -> (Vec<f64>, Vec<f64>) {
        let combos: [&[(usize, usize)]; 3] =
            [&[(0, 0)], &[(1, 0), (0, 1)], &[(2, 0), (1, 1), (0, 2)]];
        let mut l2 = Vec::new();
        let mut lr = Vec::new();
        for k in 0..=orders {
            let mut s2 = 0.0;
            let mut sr = 0.0;
            for &(dr, dth) in combos[k] {
                let g = axisym_derivative(f, &self.grid, &self.theta, dr, dth);
                s2 += super::axisym::axisym_lp_norm(&g, &self.grid, &self.theta, 2.0);
                if k <= 1 {
                    sr += super::axisym::axisym_lp_norm(&g, &self.grid, &self.theta, self.r_exp);
                }
            }
            l2.push(s2);
            if k <= 1 {
                lr.push(sr);
            }
        }
        (l2, lr)
    }

    fn push(&mut self, t: f64, w: &[f64]) {
        if let Some(last) = self.last_t {
            let dt = t - last;
            match self.snap_dt {
                None => self.snap_dt = Some(dt),
                Some(d) => debug_assert!((dt - d).abs() < 1e-9 * d.max(1e-12)),
            }
        }
        self.last_t = Some(t);
        self.ring.push_back(w.to_vec());
        if self.ring.len() > 5 {
            self.ring.pop_front();
        }
        if self.ring.len() == 5 {
            let dt = self.snap_dt.unwrap();
            let center_t = t - 2.0 * dt;
            let c = &self.ring;
            let len = c[2].len();
            let mut dw1 = vec![0.0; len];
            let mut dw2 = vec![0.0; len];
            for i in 0..len {
                dw1[i] = (c[3][i] - c[1][i]) / (2.0 * dt);
                dw2[i] = (c[3][i] - 2.0 * c[2][i] + c[1][i]) / (dt * dt);
            }
            // j = 0: spatial orders up to 2; j = 1: up to 1; j = 2: only 0
            let (l2_0, lr_0) = self.spatial_norms(&c[2], 2);
            let (l2_1, lr_1) = self.spatial_norms(&dw1, 1);
            let (l2_2, _) = self.spatial_norms(&dw2, 0);
            // series layout: (j,k) = (0,0),(0,1),(0,2),(1,0),(1,1),(2,0)
            self.series_l2[0].push(l2_0[0]);
            self.series_l2[1].push(l2_0[1]);
            self.series_l2[2].push(l2_0[2]);
            self.series_l2[3].push(l2_1[0]);
            self.series_l2[4].push(l2_1[1]);
            self.series_l2[5].push(l2_2[0]);
            self.series_lr[0].push(lr_0[0]);
            self.series_lr[1].push(lr_0[1]);
            self.series_lr[2].push(lr_1[0]);
            self.term_times.push(center_t);
        }
    }

    /// M over everything consumed so far.
    fn m_value(&self) -> f64 {
        if self.term_times.is_empty() {
            return 0.0;
        }
        let dt = self.snap_dt.unwrap_or(1.0);
        let sup_part: f64 = self
            .series_l2
            .iter()
            .map(|s| s.iter().cloned().fold(0.0, f64::max))
            .sum();
        let lr_part: f64 = self
            .series_lr
            .iter()
            .map(|s| time_lq(s, dt, self.q))
            .sum();
        sup_part + lr_part
    }
}

// ---------------------------------------------------------------------------
// Energy decomposition and the Gronwall bound
// ---------------------------------------------------------------------------

/// Integrated quantities at one shared snapshot time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecompSample {
    pub t: f64,
    pub e_u: f64,
    pub e_v: f64,
    pub a: f64,
    pub b: f64,
    pub e_w: f64,
    pub w_l2_sq: f64,
}

/// Evaluate E(u), E(v), A, B, E(w), ‖w‖² with one shared quadrature over
/// the axisym grid (u radial, v = u + w).
fn decomposition_at(
    t: f64,
    u: &[f64],
    ut: &[f64],
    grid: &RadialGrid,
    theta: &ThetaGrid,
    w: &[f64],
    wt: &[f64],
    p: f64,
) -> DecompSample {
    let nt = theta.num_points;
    let du_r = derivative(u, grid.h, 1);
    let dw_r = axisym_derivative(w, grid, theta, 1, 0);
    let dw_th = axisym_derivative(w, grid, theta, 0, 1);
    let mut s = DecompSample {
        t,
        e_u: 0.0,
        e_v: 0.0,
        a: 0.0,
        b: 0.0,
        e_w: 0.0,
        w_l2_sq: 0.0,
    };
    let pot = |s: f64| s.abs().powf(p + 1.0) / (p + 1.0);
    for i in 0..grid.num_points {
        for q in 0..nt {
            let k = i * nt + q;
            let wgt = axisym_weight(grid, theta, i, q);
            let (uu, uut, dur) = (u[i], ut[i], du_r[i]);
            let (ww, wwt, dwr, dwth) = (w[k], wt[k], dw_r[k], dw_th[k]);
            let fu = uu.abs().powf(p - 1.0) * uu;
            let p_term = (pot(uu + ww) - pot(uu)) - fu * ww;
            s.e_u += wgt * (0.5 * (uut * uut + dur * dur) + pot(uu));
            s.e_v += wgt
                * (0.5 * ((uut + wwt).powi(2) + (dur + dwr).powi(2) + dwth * dwth)
                    + pot(uu + ww));
            s.a += wgt * (0.5 * (wwt * wwt + dwr * dwr + dwth * dwth) + p_term);
            s.b += wgt * (uut * wwt + dur * dwr + fu * ww);
            s.e_w += wgt * (0.5 * (wwt * wwt + dwr * dwr + dwth * dwth) + pot(ww));
            s.w_l2_sq += wgt * ww * ww;
        }
    }
    s
}

/// The weak-strong stability report: the decomposition E(v) = E(u) + A + B
/// and the Gronwall bound E(w(t)) <= a0 e^{b0 t} with the coefficients
/// computed from the measured sup-norms by the explicit constant chain of
/// the stability proof.
#[derive(Debug, Clone)]
pub struct GronwallReport {
    pub samples: Vec<DecompSample>,
    /// max |E(v) - E(u) - A - B| over samples
    pub decomposition_residual: f64,
    /// scale for relative comparison (max |E(v)|)
    pub decomposition_scale: f64,
    pub sup_u: f64,
    pub sup_ut: f64,
    /// bound coefficient a0 divided by (E(w(0)) + ‖w(0)‖²)
    pub bound_coefficient: f64,
    /// exponential rate b0
    pub bound_rate: f64,
    pub bound_holds: bool,
}

impl GronwallReport {
    /// ln of the bound at time t (the bound itself can overflow f64).
    pub fn bound_log(&self, t: f64) -> f64 {
        let base = self.samples[0].e_w + self.samples[0].w_l2_sq;
        if base <= 0.0 {
            return f64::NEG_INFINITY;
        }
        (self.bound_coefficient * base).ln() + self.bound_rate * t
    }

    pub fn relative_decomposition_residual(&self) -> f64 {
        self.decomposition_residual / self.decomposition_scale.max(1e-300)
    }
}

fn assemble_gronwall(
    samples: Vec<DecompSample>,
    sup_u: f64,
    sup_ut: f64,
    p: f64,
) -> GronwallReport {
    let t_end = samples.last().map(|s| s.t).unwrap_or(0.0);
    let mut residual: f64 = 0.0;
    let mut scale: f64 = 0.0;
    for s in &samples {
        residual = residual.max((s.e_v - s.e_u - s.a - s.b).abs());
        scale = scale.max(s.e_v.abs());
    }
    // explicit constant chain (pointwise inequalities with safe constants):
    //   A(t)  >= κ E(w) - C1 ‖w‖²,       κ = min(1, c_low (p+1)),
    //            c_low = (p/32) 4^{1-p},  C1 = (p/2) S_u^{p-1}
    //   A(0)  <= C2 (E(w(0)) + ‖w(0)‖²), C2 = 1 + p(p+1)2^{p-3} + p 2^{p-3} S_u^{p-1}
    //   |B(0)-B(t)| <= C3 ∫ (E + ‖w‖²),  C3 = S_ut p(p-1) 2^{p-3} max(S_u^{p-1}, p+1)
    //   ‖w(t)‖² <= 4T ∫ E + 2‖w(0)‖²
    // giving E(w(t)) <= a0 e^{b0 t} with a0, b0 below.
    let s_up = sup_u.powf(p - 1.0);
    let c_low = (p / 32.0) * 4.0f64.powf(1.0 - p);
    let kappa = (c_low * (p + 1.0)).min(1.0);
    let c1 = 0.5 * p * s_up;
    let c2 = 1.0 + p * (p + 1.0) * 2.0f64.powf(p - 3.0) + p * 2.0f64.powf(p - 3.0) * s_up;
    let c3 = sup_ut * p * (p - 1.0) * 2.0f64.powf(p - 3.0) * s_up.max(p + 1.0);
    let a0 = (c2 + 2.0 * t_end * c3 + 2.0 * c1) / kappa;
    let b0 = (c3 * (1.0 + 4.0 * t_end * t_end) + 4.0 * t_end * c1) / kappa;

    let base = samples[0].e_w + samples[0].w_l2_sq;
    let mut holds = true;
    for s in &samples {
        if s.e_w <= 0.0 {
            continue;
        }
        if base <= 0.0 {
            // zero-data perturbation must stay at rounding level
            if s.e_w > 1e-14 * scale.max(1.0) {
                holds = false;
            }
        } else if s.e_w.ln() > (a0 * base).ln() + b0 * s.t + 1e-9 {
            holds = false;
        }
    }
    GronwallReport {
        samples,
        decomposition_residual: residual,
        decomposition_scale: scale,
        sup_u,
        sup_ut,
        bound_coefficient: a0,
        bound_rate: b0,
        bound_holds: holds,
    }
}

/// Weak-strong diagnostic for two aligned runs: `u_run` is the radial
/// reference, `v_run` the perturbed axisymmetric run on the same grid and
/// times; w = v - u.
pub fn gronwall_check(
    u_run: &[RadialState],
    v_run: &[AxisymState],
    params: &Params,
) -> Result<GronwallReport> {
    if u_run.len() != v_run.len() || u_run.len() < 2 {
        return Err(Error::HistoryTooShort {
            got: u_run.len().min(v_run.len()),
            need: 2,
        });
    }
    let grid = u_run[0].grid;
    let mut samples = Vec::with_capacity(u_run.len());
    let mut sup_u: f64 = 0.0;
    let mut sup_ut: f64 = 0.0;
    for (us, vs) in u_run.iter().zip(v_run.iter()) {
        if vs.grid != grid || us.grid != grid {
            return Err(Error::Grid("gronwall_check: mismatched grids".into()));
        }
        if (us.t - vs.t).abs() > 1e-9 {
            return Err(Error::Grid(
                "gronwall_check: runs sampled at different times".into(),
            ));
        }
        sup_u = sup_u.max(us.u.iter().fold(0.0f64, |a, &x| a.max(x.abs())));
        sup_ut = sup_ut.max(us.v.iter().fold(0.0f64, |a, &x| a.max(x.abs())));
        let nt = vs.theta.num_points;
        let mut w = vec![0.0; vs.w.len()];
        let mut wt = vec![0.0; vs.w.len()];
        for i in 0..grid.num_points {
            for q in 0..nt {
                let k = i * nt + q;
                w[k] = vs.w[k] - us.u[i];
                wt[k] = vs.w_t[k] - us.v[i];
            }
        }
        samples.push(decomposition_at(
            us.t, &us.u, &us.v, &grid, &vs.theta, &w, &wt, params.p,
        ));
    }
    Ok(assemble_gronwall(samples, sup_u, sup_ut, params.p))
}

// ---------------------------------------------------------------------------
// The ε-sweep
// ---------------------------------------------------------------------------

/// Perturbation shape: radial profile times one axisymmetric spherical
/// harmonic (Legendre) channel.
#[derive(Debug, Clone)]
pub struct PerturbationShape {
    pub profile: Profile,
    pub ell: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepMode {
    Linearized,
    AxisymNonlinear,
}

#[derive(Debug, Clone)]
pub struct SweepSettings {
    pub t_end: f64,
    pub dt: f64,
    /// steps between stored snapshots (energy/M sampling)
    pub snapshot_every: usize,
    /// snapshots between M-history entries
    pub report_every: usize,
    pub n_theta: usize,
    /// Sobolev-extended pair for the second Y norm of M(T)
    pub q: f64,
    pub r_exp: f64,
    pub m_order: usize,
}

/// One sweep member's outcome.
#[derive(Debug, Clone)]
pub struct StabilityRecord {
    pub epsilon: f64,
    pub m_history: Vec<(f64, f64)>,
    pub bounded: bool,
    pub growth_factor: f64,
    pub gronwall: Option<GronwallReport>,
    pub error: Option<String>,
}

/// Bounded-verdict classifier: M(t_end) <= 10 x M over the initial window.
const BOUNDED_FACTOR: f64 = 10.0;

fn verdict(m_history: &[(f64, f64)], t_end: f64) -> (bool, f64) {
    let early_window = 0.05 * t_end;
    let early = m_history
        .iter()
        .find(|(t, m)| *t >= early_window && *m > 0.0)
        .or_else(|| m_history.iter().find(|(_, m)| *m > 0.0));
    let last = m_history.last().map(|&(_, m)| m).unwrap_or(0.0);
    match early {
        None => (true, 1.0), // identically zero
        Some(&(_, m0)) => {
            let growth = last / m0;
            (growth <= BOUNDED_FACTOR, growth)
        }
    }
}

/// Run the ε-sweep: for each ε, co-evolve the radial background and the
/// perturbation (linearized per-mode or full axisymmetric difference
/// equation), recording M histories, verdicts and the Gronwall report.
/// Per-run failures are recorded and the sweep continues.
pub fn stability_sweep(
    epsilons: &[f64],
    shape: &PerturbationShape,
    bg_initial: &RadialState,
    params: &Params,
    mode: SweepMode,
    settings: &SweepSettings,
) -> Result<Vec<StabilityRecord>> {
    if sobolev_extended_delta(params.n, settings.q, settings.r_exp).is_none() {
        return Err(Error::InadmissiblePair {
            q: settings.q,
            r: settings.r_exp,
        });
    }
    if mode == SweepMode::AxisymNonlinear && params.n != 3 {
        return Err(Error::Params(
            "axisymmetric nonlinear sweep requires n = 3".into(),
        ));
    }
    let grid = bg_initial.grid;
    // shape must satisfy the compatibility checks before it is used
    let g_prof = shape.profile.sample(&grid);
    let rep = compat::nonlinear_sequence(&g_prof, &vec![0.0; grid.num_points], &grid, params, 1)?;
    if !rep.all_pass() {
        return Err(Error::Params(
            "perturbation shape fails the order-1 compatibility check".into(),
        ));
    }
    let support = bg_initial
        .support_radius(1e-14)
        .max(shape.profile.support_radius());
    if settings.t_end > grid.r_max - support + 1e-9 {
        return Err(Error::CausalWindow {
            support,
            t_end: settings.t_end,
            r_max: grid.r_max,
            required: support + settings.t_end,
        });
    }

    let mut out = Vec::with_capacity(epsilons.len());
    for &eps in epsilons {
        let rec = run_member(eps, shape, &g_prof, bg_initial, params, mode, settings);
        out.push(match rec {
            Ok(r) => r,
            Err(e) => StabilityRecord {
                epsilon: eps,
                m_history: Vec::new(),
                bounded: false,
                growth_factor: f64::NAN,
                gronwall: None,
                error: Some(e.to_string()),
            },
        });
    }
    Ok(out)
}

fn run_member(
    eps: f64,
    shape: &PerturbationShape,
    g_prof: &[f64],
    bg_initial: &RadialState,
    params: &Params,
    mode: SweepMode,
    settings: &SweepSettings,
) -> Result<StabilityRecord> {
    let grid = bg_initial.grid;
    let nr = grid.num_points;
    let theta = ThetaGrid::new(settings.n_theta)?;
    let nt = theta.num_points;
    let nl = NonlinearitySpec::untruncated(params.p)?;
    nl.check_solver_floor()?;

    let max_dt = match mode {
        SweepMode::Linearized => radial::CFL_FRACTION * grid.h,
        SweepMode::AxisymNonlinear => axisym_max_dt(&grid, &theta),
    };
    if settings.dt > max_dt {
        return Err(Error::CflViolation {
            dt: settings.dt,
            max_dt,
        });
    }
    let steps = (settings.t_end / settings.dt).ceil().max(1.0) as usize;
    let dt = settings.t_end / steps as f64;

    // background state
    let mut u = bg_initial.u.clone();
    let mut v = bg_initial.v.clone();
    let mut scratch_u = vec![0.0; nr];

    // perturbation state
    let angular: Vec<f64> = (0..nt)
        .map(|q| legendre_p(shape.ell, theta.theta(q).cos()))
        .collect();
    let (mut w, mut wt, w_len) = match mode {
        SweepMode::Linearized => {
            let w0: Vec<f64> = g_prof.iter().map(|x| eps * x).collect();
            (w0, vec![0.0; nr], nr)
        }
        SweepMode::AxisymNonlinear => {
            let mut w0 = vec![0.0; nr * nt];
            for i in 0..nr {
                for q in 0..nt {
                    w0[i * nt + q] = eps * g_prof[i] * angular[q];
                }
            }
            for q in 0..nt {
                w0[q] = 0.0;
            }
            let len = w0.len();
            (w0, vec![0.0; len], len)
        }
    };
    let mut scratch_w = vec![0.0; w_len];

    let coeffs = radial::stencil_coeffs(grid.h, params.n, nr);
    let accel_w = |w: &[f64], u_now: &[f64], out: &mut [f64]| match mode {
        SweepMode::Linearized => {
            mode_accel_with(w, u_now, shape.ell, &coeffs, grid.h, params, out);
        }
        SweepMode::AxisymNonlinear => {
            axisym_accel_into(w, u_now, &grid, &theta, params.p, true, out);
        }
    };

    // streaming observers
    let mut mode_hist: Vec<RadialState> = Vec::new();
    let mut tracker = AxisymNormTracker::new(grid, theta, settings.q, settings.r_exp);
    let mut samples: Vec<DecompSample> = Vec::new();
    let mut m_history: Vec<(f64, f64)> = Vec::new();
    let mut sup_u: f64 = 0.0;
    let mut sup_ut: f64 = 0.0;
    let mut snap_count = 0usize;

    let mut lift_w = vec![0.0; nr * nt];
    let mut lift_wt = vec![0.0; nr * nt];

    let mut record = |t: f64,
                      u: &[f64],
                      v: &[f64],
                      w: &[f64],
                      wt: &[f64],
                      mode_hist: &mut Vec<RadialState>,
                      tracker: &mut AxisymNormTracker,
                      samples: &mut Vec<DecompSample>,
                      m_history: &mut Vec<(f64, f64)>,
                      snap_count: &mut usize,
                      lift_w: &mut [f64],
                      lift_wt: &mut [f64]|
     -> Result<()> {
        if !w.iter().all(|x| x.is_finite()) || !u.iter().all(|x| x.is_finite()) {
            return Err(Error::NumericalBlowup { t });
        }
        sup_u = sup_u.max(u.iter().fold(0.0f64, |a, &x| a.max(x.abs())));
        sup_ut = sup_ut.max(v.iter().fold(0.0f64, |a, &x| a.max(x.abs())));
        let (w2d, wt2d): (&[f64], &[f64]) = match mode {
            SweepMode::Linearized => {
                for i in 0..nr {
                    for qq in 0..nt {
                        lift_w[i * nt + qq] = w[i] * angular[qq];
                        lift_wt[i * nt + qq] = wt[i] * angular[qq];
                    }
                }
                let st = RadialState {
                    grid,
                    t,
                    u: w.to_vec(),
                    v: wt.to_vec(),
                };
                mode_hist.push(st);
                (&*lift_w, &*lift_wt)
            }
            SweepMode::AxisymNonlinear => {
                tracker.push(t, w);
                (w, wt)
            }
        };
        samples.push(decomposition_at(
            t, u, v, &grid, &theta, w2d, wt2d, params.p,
        ));
        *snap_count += 1;
        let report_due = (*snap_count - 1) % settings.report_every.max(1) == 0;
        if report_due {
            let m = match mode {
                SweepMode::Linearized => {
                    if mode_hist.len() >= 4 {
                        m_norm(
                            mode_hist,
                            settings.m_order,
                            settings.q,
                            settings.r_exp,
                            params,
                        )?
                    } else {
                        0.0
                    }
                }
                SweepMode::AxisymNonlinear => tracker.m_value(),
            };
            m_history.push((t, m));
        }
        Ok(())
    };

    record(
        0.0,
        &u,
        &v,
        &w,
        &wt,
        &mut mode_hist,
        &mut tracker,
        &mut samples,
        &mut m_history,
        &mut snap_count,
        &mut lift_w,
        &mut lift_wt,
    )?;

    for k in 1..=steps {
        let t_next = k as f64 * dt;
        // first kicks at t with the current background
        accel_w(&w, &u, &mut scratch_w);
        for j in 0..w_len {
            wt[j] += 0.5 * dt * scratch_w[j];
            w[j] += dt * wt[j];
        }
        // advance the background itself
        radial::step_with(&mut u, &mut v, &mut scratch_u, &coeffs, &nl, dt);
        // second kicks at t + dt with the advanced background
        accel_w(&w, &u, &mut scratch_w);
        for j in 0..w_len {
            wt[j] += 0.5 * dt * scratch_w[j];
        }
        match mode {
            SweepMode::Linearized => {
                w[0] = 0.0;
                wt[0] = 0.0;
            }
            SweepMode::AxisymNonlinear => {
                for q in 0..nt {
                    w[q] = 0.0;
                    wt[q] = 0.0;
                }
            }
        }
        if k % settings.snapshot_every.max(1) == 0 || k == steps {
            record(
                t_next,
                &u,
                &v,
                &w,
                &wt,
                &mut mode_hist,
                &mut tracker,
                &mut samples,
                &mut m_history,
                &mut snap_count,
                &mut lift_w,
                &mut lift_wt,
            )?;
        }
    }

    // final M entry at t_end if the report stride skipped it
    if m_history.last().map(|&(t, _)| t) != Some(settings.t_end) {
        let m = match mode {
            SweepMode::Linearized => {
                if mode_hist.len() >= 4 {
                    m_norm(
                        &mode_hist,
                        settings.m_order,
                        settings.q,
                        settings.r_exp,
                        params,
                    )?
                } else {
                    0.0
                }
            }
            SweepMode::AxisymNonlinear => tracker.m_value(),
        };
        m_history.push((settings.t_end, m));
    }

    let (bounded, growth) = verdict(&m_history, settings.t_end);
    let gronwall = assemble_gronwall(samples, sup_u, sup_ut, params.p);
    Ok(StabilityRecord {
        epsilon: eps,
        m_history,
        bounded,
        growth_factor: growth,
        gronwall: Some(gronwall),
        error: None,
    })
}

/// CSV rows `epsilon,t,M,E_w,bound` for a set of sweep records. When the
/// bound overflows f64 the column carries `inf`.
pub fn sweep_csv(records: &[StabilityRecord]) -> String {
    let mut out = String::from("epsilon,t,M,E_w,bound\n");
    for rec in records {
        for &(t, m) in &rec.m_history {
            let (e_w, bound) = match &rec.gronwall {
                Some(g) => {
                    let e_w = g
                        .samples
                        .iter()
                        .min_by(|a, b| {
                            (a.t - t).abs().partial_cmp(&(b.t - t).abs()).unwrap()
                        })
                        .map(|s| s.e_w)
                        .unwrap_or(f64::NAN);
                    let lb = g.bound_log(t);
                    let bound = if lb > 700.0 {
                        f64::INFINITY
                    } else {
                        lb.exp()
                    };
                    (e_w, bound)
                }
                None => (f64::NAN, f64::NAN),
            };
            out.push_str(&format!(
                "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}\n",
                rec.epsilon, t, m, e_w, bound
            ));
        }
    }
    out
}
