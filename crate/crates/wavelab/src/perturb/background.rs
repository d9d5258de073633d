//! Stored radial background: dense time-indexed snapshots of (u, u_t) from
//! a radial run, with cubic interpolation in t and r. The perturbation
//! equations read the background through `V(t, x) = p|u|^{p-1}`.

use crate::error::{Error, Result};
use crate::fields::{cubic_interp, Params, RadialGrid, RadialState};
use crate::radial::{evolve, NonlinearitySpec, RunLog};

/// Dense time-indexed radial snapshots with (t, r) interpolators.
#[derive(Debug, Clone)]
pub struct Background {
    pub grid: RadialGrid,
    pub t0: f64,
    /// time between stored frames
    pub frame_dt: f64,
    pub frames_u: Vec<Vec<f64>>,
    pub frames_v: Vec<Vec<f64>>,
    pub params: Params,
}

impl Background {
    /// Run the radial solver and store every `frame_stride`-th step.
    /// The stored stride must resolve the background's own oscillation
    /// (>= 8 samples per period, estimated from sup|u_t|/sup|u|).
    pub fn from_radial_run(
        initial: &RadialState,
        t_end: f64,
        dt: f64,
        frame_stride: usize,
        nl: &NonlinearitySpec,
        params: &Params,
    ) -> Result<(Background, RunLog)> {
        let mut frames_u = Vec::new();
        let mut frames_v = Vec::new();
        let mut times = Vec::new();
        let (_, log) = evolve(initial, t_end, dt, nl, params, frame_stride, |s| {
            frames_u.push(s.u.clone());
            frames_v.push(s.v.clone());
            times.push(s.t);
        })?;
        if frames_u.len() < 4 {
            return Err(Error::HistoryTooShort {
                got: frames_u.len(),
                need: 4,
            });
        }
        let bg = Background {
            grid: initial.grid,
            t0: times[0],
            frame_dt: times[1] - times[0],
            frames_u,
            frames_v,
            params: params.clone(),
        };
        bg.validate_stride()?;
        Ok((bg, log))
    }

    /// Wrap preexisting frames (tests, frozen potentials).
    pub fn from_frames(
        grid: RadialGrid,
        t0: f64,
        frame_dt: f64,
        frames_u: Vec<Vec<f64>>,
        frames_v: Vec<Vec<f64>>,
        params: Params,
    ) -> Result<Background> {
        if frames_u.len() < 4 || frames_v.len() != frames_u.len() {
            return Err(Error::HistoryTooShort {
                got: frames_u.len().min(frames_v.len()),
                need: 4,
            });
        }
        let bg = Background {
            grid,
            t0,
            frame_dt,
            frames_u,
            frames_v,
            params,
        };
        bg.validate_stride()?;
        Ok(bg)
    }

    pub fn t_end(&self) -> f64 {
        self.t0 + (self.frames_u.len() - 1) as f64 * self.frame_dt
    }

    pub fn covers(&self, t: f64, r: f64) -> bool {
        t >= self.t0 - 1e-12
            && t <= self.t_end() + 1e-12
            && r >= self.grid.r_min - 1e-12
            && r <= self.grid.r_max + 1e-12
    }

    /// Frame-stride admissibility: the stored spacing must give at least
    /// ~8 samples per background oscillation. The oscillation rate is
    /// estimated per frame as sup|u_t| / sup|u| (zero fields pass).
    pub fn validate_stride(&self) -> Result<()> {
        let mut tau_min = f64::INFINITY;
        for (u, v) in self.frames_u.iter().zip(self.frames_v.iter()) {
            let su = u.iter().fold(0.0f64, |a, &x| a.max(x.abs()));
            let sv = v.iter().fold(0.0f64, |a, &x| a.max(x.abs()));
            if su > 1e-14 && sv > 1e-14 {
                tau_min = tau_min.min(su / sv);
            }
        }
        let max_stride = 2.0 * std::f64::consts::PI / 8.0 * tau_min;
        if self.frame_dt > max_stride {
            return Err(Error::StrideTooCoarse {
                stride: self.frame_dt,
                max: max_stride,
            });
        }
        Ok(())
    }

    fn frame_index(&self, t: f64) -> Result<f64> {
        if t < self.t0 - 1e-12 || t > self.t_end() + 1e-12 {
            return Err(Error::OutOfCoverage { t, r: f64::NAN });
        }
        Ok((t - self.t0) / self.frame_dt)
    }

    fn interp_frames(frames: &[Vec<f64>], x: f64, out: &mut [f64]) {
        let n = frames.len();
        let i = (x.floor() as isize).clamp(1, n as isize - 3) as usize;
        let s = x - i as f64;
        let b0 = -s * (s - 1.0) * (s - 2.0) / 6.0;
        let b1 = (s + 1.0) * (s - 1.0) * (s - 2.0) / 2.0;
        let b2 = -(s + 1.0) * s * (s - 2.0) / 2.0;
        let b3 = (s + 1.0) * s * (s - 1.0) / 6.0;
        let (f0, f1, f2, f3) = (&frames[i - 1], &frames[i], &frames[i + 1], &frames[i + 2]);
        for k in 0..out.len() {
            out[k] = f0[k] * b0 + f1[k] * b1 + f2[k] * b2 + f3[k] * b3;
        }
    }

    /// Whole-grid u(t, ·) by cubic interpolation in time.
    pub fn u_frame_at(&self, t: f64, out: &mut [f64]) -> Result<()> {
        let x = self.frame_index(t)?;
        Self::interp_frames(&self.frames_u, x, out);
        Ok(())
    }

    /// Whole-grid u_t(t, ·) by cubic interpolation in time.
    pub fn v_frame_at(&self, t: f64, out: &mut [f64]) -> Result<()> {
        let x = self.frame_index(t)?;
        Self::interp_frames(&self.frames_v, x, out);
        Ok(())
    }

    /// Pointwise u(t, r), cubic in both t and r.
    pub fn u_at(&self, t: f64, r: f64) -> Result<f64> {
        if !self.covers(t, r) {
            return Err(Error::OutOfCoverage { t, r });
        }
        let x = self.frame_index(t)?;
        let n_frames = self.frames_u.len();
        let i = (x.floor() as isize).clamp(1, n_frames as isize - 3) as usize;
        let s = x - i as f64;
        let b = [
            -s * (s - 1.0) * (s - 2.0) / 6.0,
            (s + 1.0) * (s - 1.0) * (s - 2.0) / 2.0,
            -(s + 1.0) * s * (s - 2.0) / 2.0,
            (s + 1.0) * s * (s - 1.0) / 6.0,
        ];
        let xr = (r - self.grid.r_min) / self.grid.h;
        let mut val = 0.0;
        for (k, bk) in b.iter().enumerate() {
            val += bk * cubic_interp(&self.frames_u[i - 1 + k], xr);
        }
        Ok(val)
    }

    /// Measured sup-norms (sup|u|, sup|u_t|) over all stored frames.
    pub fn measured_sups(&self) -> (f64, f64) {
        let sup = |frames: &[Vec<f64>]| {
            frames
                .iter()
                .flat_map(|f| f.iter())
                .fold(0.0f64, |a, &x| a.max(x.abs()))
        };
        (sup(&self.frames_u), sup(&self.frames_v))
    }
}

/// V(t, x) = p|u(t, x)|^{p-1} through the background interpolators.
pub fn potential(bg: &Background, t: f64, r: f64) -> Result<f64> {
    let u = bg.u_at(t, r)?;
    Ok(bg.params.p * u.abs().powf(bg.params.p - 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::make_grid;
    use approx::assert_relative_eq;

    fn params3() -> Params {
        Params::new(3, 7.0, "test").unwrap()
    }

    fn bump_state(grid: RadialGrid, amp: f64) -> RadialState {
        RadialState::from_fn(
            grid,
            move |r| {
                if r > 1.4 && r < 2.6 {
                    amp * ((r - 1.4) * (2.6 - r)).powi(4) / 0.6f64.powi(8)
                } else {
                    0.0
                }
            },
            |_| 0.0,
        )
    }

    #[test]
    fn potential_zero_background() {
        let g = make_grid(6.0, 301).unwrap();
        let p = params3();
        let z = RadialState::zero(g);
        let nl = NonlinearitySpec::untruncated(7.0).unwrap();
        let (bg, _) = Background::from_radial_run(&z, 2.0, 0.5 * g.h, 4, &nl, &p).unwrap();
        assert_eq!(potential(&bg, 1.0, 2.0).unwrap(), 0.0);
        assert!(potential(&bg, 5.0, 2.0).is_err());
    }

    #[test]
    fn potential_nonnegative_and_interpolates() {
        let g = make_grid(7.0, 601).unwrap();
        let p = params3();
        let s = bump_state(g, 1.2);
        let nl = NonlinearitySpec::untruncated(7.0).unwrap();
        let (bg, _) = Background::from_radial_run(&s, 3.0, 0.5 * g.h, 2, &nl, &p).unwrap();
        for k in 0..50 {
            let t = 0.06 * k as f64;
            let r = 1.3 + 0.08 * k as f64;
            let v = potential(&bg, t, r).unwrap();
            assert!(v >= 0.0);
        }
        // at t = 0 the interpolant reproduces the datum
        let u00 = bg.u_at(0.0, 2.0).unwrap();
        assert_relative_eq!(u00, s.u[(1.0 / g.h).round() as usize], max_relative = 1e-8);
    }

    #[test]
    fn stride_validation_rejects_coarse_frames() {
        let g = make_grid(7.0, 601).unwrap();
        let p = params3();
        let s = bump_state(g, 1.2);
        let nl = NonlinearitySpec::untruncated(7.0).unwrap();
        // stride ~ 1.0 is far coarser than the ~0.28 oscillation scale
        let err = Background::from_radial_run(&s, 3.0, 0.5 * g.h, 200, &nl, &p);
        assert!(matches!(err, Err(Error::StrideTooCoarse { .. })));
    }
}
