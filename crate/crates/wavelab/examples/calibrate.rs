// Calibration probe for the acceptance thresholds: prints measured energy
// drift, dual-representation differences under refinement, and compact
// energy uphill excursions. Not part of the test suite.

use wavelab::fields::{make_grid, Params, RadialState};
use wavelab::penrose;
use wavelab::perturb::Background;
use wavelab::profiles::{Profile, ProfileKind};
use wavelab::radial::{evolve, NonlinearitySpec};

fn bump_state(grid: wavelab::fields::RadialGrid, amp: f64) -> RadialState {
    let p = Profile::new(ProfileKind::Bump4, amp, 2.5, 2.0).unwrap();
    let u0 = p.sample(&grid);
    RadialState::new(grid, 0.0, u0, vec![0.0; grid.num_points]).unwrap()
}

fn main() {
    let params = Params::new(3, 7.0, "cal").unwrap();
    let nl = NonlinearitySpec::untruncated(7.0).unwrap();

    // criterion 2: energy drift at h = 0.005, t_end = 10, amplitude 1
    for (h, dtf) in [(0.005f64, 0.45f64), (0.0025, 0.45), (0.005, 0.25), (0.0025, 0.25)] {
        let r_max = 14.0;
        let n_pts = ((r_max - 1.0) / h).round() as usize + 1;
        let g = make_grid(r_max, n_pts).unwrap();
        let s = bump_state(g, 1.0);
        let dt = dtf * h;
        let t0 = std::time::Instant::now();
        let (_, log) = evolve(&s, 10.0, dt, &nl, &params, 50, |_| {}).unwrap();
        println!(
            "drift h={h} dt={dt:.5}: {:.3e}   ({:.2?})",
            log.max_relative_energy_drift(),
            t0.elapsed()
        );
    }

    // criterion 3/4: dual representation + compact energy, three levels
    let t_compact_end = 1.2f64;
    let t_phys = 4.0;
    for (h, n_alpha) in [(0.02f64, 256usize), (0.01, 512), (0.005, 1024)] {
        let r_max = 9.0;
        let n_pts = ((r_max - 1.0) / h).round() as usize + 1;
        let g = make_grid(r_max, n_pts).unwrap();
        let s = bump_state(g, 1.0);
        let dt = 0.45 * h;
        let t0 = std::time::Instant::now();
        let (bg, _) = Background::from_radial_run(&s, t_phys, dt, 2, &nl, &params).unwrap();
        let cs0 = penrose::initial_compact_state(&s, &params, n_alpha, 0.2, true).unwrap();
        let dt_c = 0.45 * cs0.grid.d_alpha;
        let mut hist = Vec::new();
        let (_, clog) =
            penrose::evolve_compact(&cs0, t_compact_end, dt_c, 4, |st| hist.push(st.clone()))
                .unwrap();
        let (diff, pts) = penrose::dual_representation_diff(&hist, &bg).unwrap();
        let e: Vec<f64> = clog.samples.iter().map(|x| x.energy_e).collect();
        let f: Vec<f64> = clog
            .samples
            .iter()
            .map(|x| x.energy_f)
            .filter(|x| x.is_finite())
            .collect();
        let flux = penrose::flux_identity_residual(&hist).unwrap();
        println!(
            "dual h={h} nA={n_alpha}: diff={diff:.3e} ({pts} pts)  E0={:.4}  E_up={:.3e}  F_up={:.3e}  flux={:.3e}  scale(h²+dT²)={:.3e}  ({:.2?})",
            e[0],
            penrose::CompactLog::max_uphill(&e),
            penrose::CompactLog::max_uphill(&f),
            flux,
            h * h + dt_c * dt_c,
            t0.elapsed()
        );
    }
}
