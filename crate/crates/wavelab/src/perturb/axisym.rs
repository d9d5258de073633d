//! Full nonlinear difference equation for the perturbation in axisymmetric
//! form (n = 3 only):
//!
//!   ∂_t²w = Δ_{(r,θ)} w - [f(u + w) - f(u)],   f(s) = |s|^{p-1}s,
//!
//! on the (r, θ) grid with Dirichlet data at r = 1, causal truncation at
//! r_max, and flux-form pole treatment in θ (the sin θ face factor vanishes
//! at both poles, so no ghost is needed there). The θ grid is staggered by
//! half a spacing.

use std::io::Write;

use crate::error::{Error, Result};
use crate::fields::{derivative, Params, RadialGrid};
use crate::radial::CFL_FRACTION;

use super::background::Background;

/// Staggered polar-angle grid: θ_q = (q + 1/2) dθ on (0, π).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThetaGrid {
    pub num_points: usize,
    pub d_theta: f64,
}

impl ThetaGrid {
    pub fn new(num_points: usize) -> Result<Self> {
        if num_points < 4 {
            return Err(Error::Grid(format!(
                "theta grid needs >= 4 points, got {num_points}"
            )));
        }
        Ok(ThetaGrid {
            num_points,
            d_theta: std::f64::consts::PI / num_points as f64,
        })
    }

    #[inline]
    pub fn theta(&self, q: usize) -> f64 {
        (q as f64 + 0.5) * self.d_theta
    }
}

/// Axisymmetric perturbation state w(r, θ), stored r-major.
#[derive(Debug, Clone, PartialEq)]
pub struct AxisymState {
    pub grid: RadialGrid,
    pub theta: ThetaGrid,
    pub t: f64,
    pub w: Vec<f64>,
    pub w_t: Vec<f64>,
}

impl AxisymState {
    pub fn new(grid: RadialGrid, theta: ThetaGrid, w: Vec<f64>, w_t: Vec<f64>) -> Result<Self> {
        let len = grid.num_points * theta.num_points;
        if w.len() != len || w_t.len() != len {
            return Err(Error::Grid("axisym field length mismatch".into()));
        }
        for q in 0..theta.num_points {
            if w[q] != 0.0 || w_t[q] != 0.0 {
                return Err(Error::Grid(
                    "Dirichlet violation: axisym data must vanish at r = 1".into(),
                ));
            }
        }
        Ok(AxisymState {
            grid,
            theta,
            t: 0.0,
            w,
            w_t,
        })
    }

    pub fn zero(grid: RadialGrid, theta: ThetaGrid) -> Self {
        let len = grid.num_points * theta.num_points;
        AxisymState {
            grid,
            theta,
            t: 0.0,
            w: vec![0.0; len],
            w_t: vec![0.0; len],
        }
    }

    /// Separable data w = g(r)·P(cos θ) (P supplied as per-θ values).
    pub fn from_mode_shape(
        grid: RadialGrid,
        theta: ThetaGrid,
        radial_profile: &[f64],
        angular: &[f64],
    ) -> Result<Self> {
        let nt = theta.num_points;
        let mut w = vec![0.0; grid.num_points * nt];
        for i in 0..grid.num_points {
            for q in 0..nt {
                w[i * nt + q] = radial_profile[i] * angular[q];
            }
        }
        for q in 0..nt {
            w[q] = 0.0;
        }
        let len = w.len();
        AxisymState::new(grid, theta, w, vec![0.0; len])
    }

    #[inline]
    pub fn idx(&self, i: usize, q: usize) -> usize {
        i * self.theta.num_points + q
    }

    pub fn sup_abs(&self) -> f64 {
        self.w.iter().fold(0.0f64, |a, &x| a.max(x.abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.w.iter().all(|x| x.is_finite()) && self.w_t.iter().all(|x| x.is_finite())
    }

    /// Max over θ of |w(r_i, ·)| per radial node.
    pub fn radial_envelope(&self) -> Vec<f64> {
        let nt = self.theta.num_points;
        (0..self.grid.num_points)
            .map(|i| {
                self.w[i * nt..(i + 1) * nt]
                    .iter()
                    .fold(0.0f64, |a, &x| a.max(x.abs()))
            })
            .collect()
    }

    /// CSV columns `r,theta,w,w_t`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "r,theta,w,w_t")?;
        for i in 0..self.grid.num_points {
            for q in 0..self.theta.num_points {
                let k = self.idx(i, q);
                writeln!(
                    out,
                    "{:.16e},{:.16e},{:.16e},{:.16e}",
                    self.grid.r(i),
                    self.theta.theta(q),
                    self.w[k],
                    self.w_t[k]
                )?;
            }
        }
        Ok(())
    }
}

/// Acceleration of the difference equation against an explicit background
/// frame u(t, ·). Radial part in conservative flux form; angular part in
/// flux form with sin θ face factors (exactly zero at the poles).
pub(crate) fn axisym_accel_into(
    w: &[f64],
    u_frame: &[f64],
    grid: &RadialGrid,
    theta: &ThetaGrid,
    p: f64,
    nonlinear: bool,
    out: &mut [f64],
) {
    let nr = grid.num_points;
    let nt = theta.num_points;
    let h = grid.h;
    let dth = theta.d_theta;
    let inv_h2 = 1.0 / (h * h);
    let inv_dth2 = 1.0 / (dth * dth);
    let pm1 = crate::fields::AbsPower::new(p - 1.0);
    let f = move |s: f64| pm1.eval(s) * s;
    for q in 0..nt {
        out[q] = 0.0;
        out[(nr - 1) * nt + q] = 0.0;
    }
    for i in 1..nr - 1 {
        let r = grid.r(i);
        let r2 = r * r;
        let rm = (r - 0.5 * h) * (r - 0.5 * h);
        let rp = (r + 0.5 * h) * (r + 0.5 * h);
        let u_val = u_frame[i];
        let fu = if nonlinear { f(u_val) } else { 0.0 };
        let row = i * nt;
        for q in 0..nt {
            let k = row + q;
            let lap_r = (rp * (w[k + nt] - w[k]) - rm * (w[k] - w[k - nt])) * inv_h2 / r2;
            // θ fluxes: sin at the faces; sin(0) = sin(π) = 0 closes the poles
            let flux_hi = if q + 1 < nt {
                ((q as f64 + 1.0) * dth).sin() * (w[k + 1] - w[k])
            } else {
                0.0
            };
            let flux_lo = if q > 0 {
                (q as f64 * dth).sin() * (w[k] - w[k - 1])
            } else {
                0.0
            };
            let lap_th = (flux_hi - flux_lo) * inv_dth2 / (theta.theta(q).sin() * r2);
            let nl_term = if nonlinear { f(u_val + w[k]) - fu } else { 0.0 };
            out[k] = lap_r + lap_th - nl_term;
        }
    }
}

/// Largest stable time step for the axisym stencil (wave part only; a stiff
/// background potential may require a smaller step, which the caller
/// accounts for).
pub fn axisym_max_dt(grid: &RadialGrid, theta: &ThetaGrid) -> f64 {
    let eff = 1.0 / (1.0 / (grid.h * grid.h) + 1.0 / (theta.d_theta * theta.d_theta)).sqrt();
    CFL_FRACTION * eff
}

/// Verlet evolution against a stored background, collecting snapshots every
/// `stride` steps.
pub fn evolve_axisym(
    initial: &AxisymState,
    bg: &Background,
    params: &Params,
    t_end: f64,
    dt: f64,
    stride: usize,
) -> Result<Vec<AxisymState>> {
    if params.n != 3 {
        return Err(Error::Params(format!(
            "axisymmetric evolution is implemented for n = 3 only (got n = {})",
            params.n
        )));
    }
    if bg.grid != initial.grid {
        return Err(Error::Grid(
            "axisym grid must coincide with the background grid".into(),
        ));
    }
    let max_dt = axisym_max_dt(&initial.grid, &initial.theta);
    if dt > max_dt {
        return Err(Error::CflViolation { dt, max_dt });
    }
    if t_end > bg.t_end() + 1e-9 {
        return Err(Error::OutOfCoverage {
            t: t_end,
            r: f64::NAN,
        });
    }
    let steps = ((t_end - initial.t) / dt).ceil().max(1.0) as usize;
    let dt = (t_end - initial.t) / steps as f64;
    let stride = stride.max(1);
    let nr = initial.grid.num_points;
    let nt = initial.theta.num_points;

    let mut state = initial.clone();
    let mut scratch = vec![0.0; nr * nt];
    let mut u_frame = vec![0.0; nr];
    let mut history = vec![state.clone()];
    for k in 1..=steps {
        let t_next = initial.t + k as f64 * dt;
        bg.u_frame_at(state.t, &mut u_frame)?;
        axisym_accel_into(
            &state.w,
            &u_frame,
            &initial.grid,
            &initial.theta,
            params.p,
            true,
            &mut scratch,
        );
        for j in 0..nr * nt {
            state.w_t[j] += 0.5 * dt * scratch[j];
            state.w[j] += dt * state.w_t[j];
        }
        bg.u_frame_at(t_next, &mut u_frame)?;
        axisym_accel_into(
            &state.w,
            &u_frame,
            &initial.grid,
            &initial.theta,
            params.p,
            true,
            &mut scratch,
        );
        for j in 0..nr * nt {
            state.w_t[j] += 0.5 * dt * scratch[j];
        }
        for q in 0..nt {
            state.w[q] = 0.0;
            state.w_t[q] = 0.0;
        }
        state.t = t_next;
        if k % stride == 0 || k == steps {
            if !state.is_finite() {
                return Err(Error::NumericalBlowup { t: state.t });
            }
            history.push(state.clone());
        }
    }
    Ok(history)
}

/// Quadrature weight at node (i, q): trapezoid in r, midpoint in θ, with
/// the r² sin θ measure (surface factor omitted as everywhere).
#[inline]
pub(crate) fn axisym_weight(grid: &RadialGrid, theta: &ThetaGrid, i: usize, q: usize) -> f64 {
    let wr = if i == 0 || i == grid.num_points - 1 {
        0.5 * grid.h
    } else {
        grid.h
    };
    let r = grid.r(i);
    wr * r * r * theta.theta(q).sin() * theta.d_theta
}

/// L^q norm of an axisym field with the r² sin θ measure.
pub fn axisym_lp_norm(
    field: &[f64],
    grid: &RadialGrid,
    theta: &ThetaGrid,
    q_exp: f64,
) -> f64 {
    let nt = theta.num_points;
    let mut sum = 0.0;
    for i in 0..grid.num_points {
        for q in 0..nt {
            sum += axisym_weight(grid, theta, i, q) * field[i * nt + q].abs().powf(q_exp);
        }
    }
    sum.max(0.0).powf(1.0 / q_exp)
}

/// Frame spatial derivatives of an axisym field: (∂_r, (1/r)∂_θ) and the
/// order-2 combinations, with the crate's radial stencils per θ-column and
/// even-reflection ghosts across the poles.
pub fn axisym_derivative(
    field: &[f64],
    grid: &RadialGrid,
    theta: &ThetaGrid,
    dr_order: usize,
    dtheta_order: usize,
) -> Vec<f64> {
    let nr = grid.num_points;
    let nt = theta.num_points;
    let mut work = field.to_vec();
    // θ derivatives first (they commute with the radial stencil anyway)
    for _ in 0..dtheta_order {
        let mut next = vec![0.0; nr * nt];
        let c = 1.0 / (2.0 * theta.d_theta);
        for i in 0..nr {
            let row = i * nt;
            for q in 0..nt {
                let lo = if q > 0 { work[row + q - 1] } else { work[row] };
                let hi = if q + 1 < nt {
                    work[row + q + 1]
                } else {
                    work[row + nt - 1]
                };
                next[row + q] = (hi - lo) * c;
            }
        }
        work = next;
    }
    if dr_order > 0 {
        let mut next = vec![0.0; nr * nt];
        for q in 0..nt {
            let col: Vec<f64> = (0..nr).map(|i| work[i * nt + q]).collect();
            let dcol = derivative(&col, grid.h, dr_order);
            for i in 0..nr {
                next[i * nt + q] = dcol[i];
            }
        }
        work = next;
    }
    // scale the θ-derivatives into frame components
    if dtheta_order > 0 {
        for i in 0..nr {
            let scale = grid.r(i).powi(-(dtheta_order as i32));
            for q in 0..nt {
                work[i * nt + q] *= scale;
            }
        }
    }
    work
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::{make_grid, RadialState};
    use crate::perturb::modes::legendre_p;
    use crate::radial::{evolve, NonlinearitySpec};

    fn params3() -> Params {
        Params::new(3, 7.0, "test").unwrap()
    }

    fn bump_profile(grid: &RadialGrid, amp: f64, a: f64, b: f64) -> Vec<f64> {
        (0..grid.num_points)
            .map(|i| {
                let r = grid.r(i);
                if r > a && r < b {
                    amp * ((r - a) * (b - r)).powi(4) / ((b - a) / 2.0f64).powi(8)
                } else {
                    0.0
                }
            })
            .collect()
    }

    fn background_from_bump(
        grid: RadialGrid,
        amp: f64,
        t_end: f64,
        params: &Params,
    ) -> Background {
        let u0 = bump_profile(&grid, amp, 1.4, 2.6);
        let mut state = RadialState::zero(grid);
        state.u = u0;
        state.u[0] = 0.0;
        let nl = NonlinearitySpec::untruncated(params.p).unwrap();
        let (bg, _) =
            Background::from_radial_run(&state, t_end, 0.45 * grid.h, 2, &nl, params).unwrap();
        bg
    }

    #[test]
    fn zero_perturbation_stays_zero() {
        // w = 0 means v = u solves the equation itself
        let g = make_grid(7.0, 241).unwrap();
        let p = params3();
        let bg = background_from_bump(g, 1.0, 3.0, &p);
        let th = ThetaGrid::new(8).unwrap();
        let z = AxisymState::zero(g, th);
        let dt = 0.8 * axisym_max_dt(&g, &th);
        let hist = evolve_axisym(&z, &bg, &p, 3.0, dt, 64).unwrap();
        assert!(hist.iter().all(|s| s.sup_abs() == 0.0));
    }

    #[test]
    fn radial_data_stay_radial_and_match_difference_oracle() {
        // θ-independent perturbation data: the axisym run must stay radial
        // and match the radial-solver difference u_pert - u to combined
        // solver tolerance
        let g = make_grid(7.0, 301).unwrap();
        let p = params3();
        let amp = 1.0;
        let eps = 0.05;
        let bg = background_from_bump(g, amp, 2.5, &p);
        let th = ThetaGrid::new(8).unwrap();
        let gp = bump_profile(&g, eps, 1.6, 2.4);
        let ang = vec![1.0; th.num_points];
        let w0 = AxisymState::from_mode_shape(g, th, &gp, &ang).unwrap();
        let dt = (0.8 * axisym_max_dt(&g, &th)).min(0.45 * g.h);
        let t_end = 2.5;
        let hist = evolve_axisym(&w0, &bg, &p, t_end, dt, 1 << 30).unwrap();
        let fin = hist.last().unwrap();

        // θ-independence
        let nt = th.num_points;
        let mut aniso: f64 = 0.0;
        for i in 0..g.num_points {
            let row = &fin.w[i * nt..(i + 1) * nt];
            let (lo, hi) = row
                .iter()
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &x| {
                    (a.min(x), b.max(x))
                });
            aniso = aniso.max(hi - lo);
        }
        assert!(aniso < 1e-10, "radial data developed anisotropy {aniso:e}");

        // difference oracle: evolve u and u + εg with the radial solver
        let nl = NonlinearitySpec::untruncated(p.p).unwrap();
        let u_bg = bump_profile(&g, amp, 1.4, 2.6);
        let mk = |extra: Option<&[f64]>| {
            let mut s = RadialState::zero(g);
            s.u = u_bg.clone();
            if let Some(e) = extra {
                for (a, b) in s.u.iter_mut().zip(e.iter()) {
                    *a += b;
                }
            }
            s.u[0] = 0.0;
            s
        };
        let (plain, _) = evolve(&mk(None), t_end, dt, &nl, &p, 1 << 30, |_| {}).unwrap();
        let (pert, _) = evolve(&mk(Some(&gp)), t_end, dt, &nl, &p, 1 << 30, |_| {}).unwrap();
        let mut worst: f64 = 0.0;
        for i in 0..g.num_points {
            let oracle = pert.u[i] - plain.u[i];
            let got = fin.w[i * nt];
            worst = worst.max((got - oracle).abs());
        }
        assert!(
            worst < 5e-3 * eps,
            "axisym/radial-difference mismatch {worst:e} (eps = {eps})"
        );
    }

    #[test]
    fn small_perturbation_energy_scales_quadratically() {
        let g = make_grid(7.0, 241).unwrap();
        let p = params3();
        let bg = background_from_bump(g, 1.0, 2.0, &p);
        let th = ThetaGrid::new(8).unwrap();
        let ang: Vec<f64> = (0..th.num_points)
            .map(|q| legendre_p(2, th.theta(q).cos()))
            .collect();
        let run_energy = |eps: f64| -> f64 {
            let gp = bump_profile(&g, eps, 1.6, 2.4);
            let w0 = AxisymState::from_mode_shape(g, th, &gp, &ang).unwrap();
            let dt = (0.8 * axisym_max_dt(&g, &th)).min(0.45 * g.h);
            let hist = evolve_axisym(&w0, &bg, &p, 2.0, dt, 1 << 30).unwrap();
            let fin = hist.last().unwrap();
            // kinetic part of w's energy as the scaling observable
            let sq: Vec<f64> = fin.w_t.iter().map(|x| x * x).collect();
            let nt = th.num_points;
            let mut sum = 0.0;
            for i in 0..g.num_points {
                for q in 0..nt {
                    sum += axisym_weight(&g, &th, i, q) * sq[i * nt + q];
                }
            }
            sum
        };
        let e1 = run_energy(1e-3);
        let e2 = run_energy(2e-3);
        let ratio = e2 / e1;
        assert!(
            (ratio - 4.0).abs() < 0.1,
            "kinetic energy should scale like eps² (ratio {ratio})"
        );
    }

    #[test]
    fn axisym_norm_consistent_with_radial_measure() {
        // constant field: ∫ r² sinθ over [1, R]×(0, π) = 2 (R³-1)/3
        let g = make_grid(2.0, 101).unwrap();
        let th = ThetaGrid::new(32).unwrap();
        let ones = vec![1.0; g.num_points * th.num_points];
        let got = axisym_lp_norm(&ones, &g, &th, 2.0);
        let expect = (2.0 * 7.0 / 3.0f64).sqrt();
        assert!((got - expect).abs() < 1e-3, "{got} vs {expect}");
    }
}
