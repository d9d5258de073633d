//! Per-mode linearized perturbations: one spherical-harmonic channel
//! w_ℓ(t, r) evolving against the radial background through
//!
//!   ∂_t²w = Δ_r w - ℓ(ℓ+n-2)/r² w - V(t, r) w,   V = p|u|^{p-1},
//!
//! with the same conservative radial Laplacian as the radial solver, so the
//! ℓ = 0, V = 0 channel reproduces the free solver bit for bit.

use crate::error::{Error, Result};
use crate::fields::{Params, RadialGrid, RadialState};
use crate::radial::CFL_FRACTION;

use super::background::Background;

/// One spherical-harmonic perturbation channel.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeState {
    pub ell: usize,
    pub grid: RadialGrid,
    pub t: f64,
    pub w: Vec<f64>,
    pub w_t: Vec<f64>,
}

impl ModeState {
    pub fn new(ell: usize, grid: RadialGrid, w: Vec<f64>, w_t: Vec<f64>) -> Result<Self> {
        if w.len() != grid.num_points || w_t.len() != grid.num_points {
            return Err(Error::Grid("mode field length mismatch".into()));
        }
        if w[0] != 0.0 || w_t[0] != 0.0 {
            return Err(Error::Grid(
                "Dirichlet violation: mode data must vanish at r = 1".into(),
            ));
        }
        if ell >= 1 {
            // loose regularity check: ℓ >= 1 channels should not pile their
            // amplitude onto the first cells next to the obstacle
            let sup = w.iter().fold(0.0f64, |a, &x| a.max(x.abs()));
            if sup > 0.0 && w[1].abs() > 0.5 * sup {
                log::warn!(
                    "mode ell = {ell}: data concentrated at the obstacle boundary \
                     (|w(1+h)| = {:.2e} vs sup {:.2e})",
                    w[1].abs(),
                    sup
                );
            }
        }
        Ok(ModeState {
            ell,
            grid,
            t: 0.0,
            w,
            w_t,
        })
    }

    /// View as a RadialState (u := w, v := w_t) for the shared norms.
    pub fn as_radial_state(&self) -> RadialState {
        RadialState {
            grid: self.grid,
            t: self.t,
            u: self.w.clone(),
            v: self.w_t.clone(),
        }
    }
}

/// Legendre polynomial P_ℓ(x) by the three-term recurrence.
pub fn legendre_p(ell: usize, x: f64) -> f64 {
    match ell {
        0 => 1.0,
        1 => x,
        _ => {
            let (mut pm1, mut p0) = (1.0, x);
            for k in 1..ell {
                let next = ((2 * k + 1) as f64 * x * p0 - k as f64 * pm1) / (k + 1) as f64;
                pm1 = p0;
                p0 = next;
            }
            p0
        }
    }
}

/// Mode acceleration against an explicit background frame u(t, ·) sampled
/// on the same grid.
pub(crate) fn mode_accel_into(
    w: &[f64],
    u_frame: &[f64],
    ell: usize,
    grid_h: f64,
    params: &Params,
    out: &mut [f64],
) {
    let coeffs = crate::radial::stencil_coeffs(grid_h, params.n, w.len());
    mode_accel_with(w, u_frame, ell, &coeffs, grid_h, params, out);
}

pub(crate) fn mode_accel_with(
    w: &[f64],
    u_frame: &[f64],
    ell: usize,
    coeffs: &crate::radial::StencilCoeffs,
    grid_h: f64,
    params: &Params,
    out: &mut [f64],
) {
    let m = w.len();
    let n = params.n;
    let p = params.p;
    let pm1 = crate::fields::AbsPower::new(p - 1.0);
    let cent = (ell * (ell + n - 2)) as f64;
    out[0] = 0.0;
    out[m - 1] = 0.0;
    for i in 1..m - 1 {
        let r = 1.0 + i as f64 * grid_h;
        let lap = coeffs.cp[i] * (w[i + 1] - w[i]) - coeffs.cm[i] * (w[i] - w[i - 1]);
        let v_pot = p * pm1.eval(u_frame[i]);
        out[i] = lap - (cent / (r * r) + v_pot) * w[i];
    }
}

/// Right-hand side of the linearized per-mode system, reading the
/// background through its interpolators.
pub fn linearized_mode_rhs(
    state: &ModeState,
    bg: &Background,
    params: &Params,
) -> Result<(Vec<f64>, Vec<f64>)> {
    if bg.grid != state.grid {
        return Err(Error::Grid(
            "mode grid must coincide with the background grid".into(),
        ));
    }
    let mut u_frame = vec![0.0; state.grid.num_points];
    bg.u_frame_at(state.t, &mut u_frame)?;
    let mut dwt = vec![0.0; state.grid.num_points];
    mode_accel_into(&state.w, &u_frame, state.ell, state.grid.h, params, &mut dwt);
    Ok((state.w_t.clone(), dwt))
}

/// Verlet evolution of one mode against a stored background, collecting
/// snapshots every `stride` steps.
pub fn evolve_mode(
    initial: &ModeState,
    bg: &Background,
    params: &Params,
    t_end: f64,
    dt: f64,
    stride: usize,
) -> Result<Vec<ModeState>> {
    if bg.grid != initial.grid {
        return Err(Error::Grid(
            "mode grid must coincide with the background grid".into(),
        ));
    }
    let max_dt = CFL_FRACTION * initial.grid.h;
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
    let m = initial.grid.num_points;

    let mut state = initial.clone();
    let mut scratch = vec![0.0; m];
    let mut u_frame = vec![0.0; m];
    let mut history = vec![state.clone()];
    for k in 1..=steps {
        let t_next = initial.t + k as f64 * dt;
        bg.u_frame_at(state.t, &mut u_frame)?;
        mode_accel_into(&state.w, &u_frame, state.ell, state.grid.h, params, &mut scratch);
        for i in 0..m {
            state.w_t[i] += 0.5 * dt * scratch[i];
            state.w[i] += dt * state.w_t[i];
        }
        bg.u_frame_at(t_next, &mut u_frame)?;
        mode_accel_into(&state.w, &u_frame, state.ell, state.grid.h, params, &mut scratch);
        for i in 0..m {
            state.w_t[i] += 0.5 * dt * scratch[i];
        }
        state.w[0] = 0.0;
        state.w_t[0] = 0.0;
        state.t = t_next;
        if k % stride == 0 || k == steps {
            if !state.w.iter().all(|x| x.is_finite()) {
                return Err(Error::NumericalBlowup { t: state.t });
            }
            history.push(state.clone());
        }
    }
    Ok(history)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::make_grid;
    use crate::radial::{rhs, NonlinearitySpec};
    use approx::assert_relative_eq;

    fn params3() -> Params {
        Params::new(3, 7.0, "test").unwrap()
    }

    fn static_background(grid: RadialGrid, value: f64, params: &Params) -> Background {
        let frames = vec![vec![value; grid.num_points]; 8];
        let zero = vec![vec![0.0; grid.num_points]; 8];
        Background::from_frames(grid, 0.0, 10.0, frames, zero, params.clone()).unwrap()
    }

    #[test]
    fn ell0_zero_potential_matches_radial_rhs_exactly() {
        let g = make_grid(3.0, 201).unwrap();
        let p = params3();
        let bg = static_background(g, 0.0, &p);
        let w: Vec<f64> = (0..g.num_points)
            .map(|i| {
                let r = g.r(i);
                if r > 1.2 && r < 2.4 {
                    ((r - 1.2) * (2.4 - r)).powi(4)
                } else {
                    0.0
                }
            })
            .collect();
        let mut w0 = w.clone();
        w0[0] = 0.0;
        let mode = ModeState::new(0, g, w0.clone(), vec![0.0; g.num_points]).unwrap();
        let (_, dwt) = linearized_mode_rhs(&mode, &bg, &p).unwrap();

        let state = RadialState::new(g, 0.0, w0, vec![0.0; g.num_points]).unwrap();
        let nl = NonlinearitySpec::linear(7.0).unwrap();
        let (_, dv) = rhs(&state, &nl, &p);
        assert_eq!(dwt, dv, "ell = 0, V = 0 must reproduce the free radial rhs");
    }

    #[test]
    fn frozen_potential_shifts_standing_mode_frequency() {
        // standing mode sin(k(r-1))/r on [1, 2] with a frozen potential
        // V = c: measured ω² must equal k² + c (spectral oracle via zero
        // crossings of the core amplitude)
        let g = make_grid(2.0, 257).unwrap();
        let p = params3();
        let c = 9.0f64;
        // V = p|u|^{p-1} = c  =>  |u| = (c/p)^{1/(p-1)}
        let u_c = (c / p.p).powf(1.0 / (p.p - 1.0));
        let bg = static_background(g, u_c, &p);
        let k = 2.0 * std::f64::consts::PI; // second Dirichlet mode on [1,2]
        let w: Vec<f64> = (0..g.num_points)
            .map(|i| (k * (g.r(i) - 1.0)).sin() / g.r(i))
            .collect();
        let mode = ModeState::new(0, g, w, vec![0.0; g.num_points]).unwrap();
        let dt = 0.4 * g.h;
        let hist = evolve_mode(&mode, &bg, &p, 6.0, dt, 1).unwrap();
        // amplitude a(t) = w(t, probe) ~ cos(ω t): count zero crossings
        // (probe away from the mode's spatial node at r = 1.5)
        let probe = g.num_points / 4;
        let series: Vec<(f64, f64)> = hist.iter().map(|s| (s.t, s.w[probe])).collect();
        let mut crossings = Vec::new();
        for win in series.windows(2) {
            let (t0, a0) = win[0];
            let (t1, a1) = win[1];
            if a0 == 0.0 {
                continue;
            }
            if a0.signum() != a1.signum() {
                crossings.push(t0 + (t1 - t0) * a0.abs() / (a0 - a1).abs());
            }
        }
        assert!(crossings.len() >= 4, "need several periods");
        let half_period =
            (crossings.last().unwrap() - crossings[0]) / (crossings.len() - 1) as f64;
        let omega_sq = (std::f64::consts::PI / half_period).powi(2);
        assert_relative_eq!(omega_sq, k * k + c, max_relative = 2e-3);
    }

    #[test]
    fn centrifugal_term_suppresses_boundary_amplitude() {
        let g = make_grid(6.0, 401).unwrap();
        let p = params3();
        let bg = static_background(g, 0.0, &p);
        let data: Vec<f64> = (0..g.num_points)
            .map(|i| {
                let r = g.r(i);
                if r > 2.0 && r < 3.5 {
                    ((r - 2.0) * (3.5 - r)).powi(4) / 0.75f64.powi(8)
                } else {
                    0.0
                }
            })
            .collect();
        let near_boundary_max = |ell: usize| -> f64 {
            let mode = ModeState::new(ell, g, data.clone(), vec![0.0; g.num_points]).unwrap();
            let hist = evolve_mode(&mode, &bg, &p, 2.5, 0.4 * g.h, 8).unwrap();
            let cutoff = ((1.3 - 1.0) / g.h) as usize;
            hist.iter()
                .flat_map(|s| s.w[..cutoff].iter())
                .fold(0.0f64, |a, &x| a.max(x.abs()))
        };
        let low = near_boundary_max(1);
        let high = near_boundary_max(8);
        assert!(
            high < 0.5 * low,
            "centrifugal dominance: ell = 8 near-boundary amplitude {high:.3e} \
             should sit well below ell = 1 ({low:.3e})"
        );
    }

    #[test]
    fn legendre_values() {
        assert_eq!(legendre_p(0, 0.3), 1.0);
        assert_eq!(legendre_p(1, 0.3), 0.3);
        // P2(x) = (3x² - 1)/2
        assert_relative_eq!(
            legendre_p(2, 0.5),
            (3.0 * 0.25 - 1.0) / 2.0,
            max_relative = 1e-15
        );
        // P3(x) = (5x³ - 3x)/2
        assert_relative_eq!(
            legendre_p(3, -0.7),
            (5.0 * (-0.343) + 2.1) / 2.0,
            max_relative = 1e-12
        );
    }
}
