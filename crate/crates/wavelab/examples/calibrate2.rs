// Isolate the order-reduction source: free propagation (no boundary
// contact) vs boundary-interacting runs; print E(T) shape.
use wavelab::fields::{make_grid, Params, RadialState};
use wavelab::penrose;
use wavelab::perturb::Background;
use wavelab::profiles::{Profile, ProfileKind};
use wavelab::radial::NonlinearitySpec;

fn state_with(grid: wavelab::fields::RadialGrid, center: f64, width: f64) -> RadialState {
    let p = Profile::new(ProfileKind::Bump4, 1.0, center, width).unwrap();
    let u0 = p.sample(&grid);
    RadialState::new(grid, 0.0, u0, vec![0.0; grid.num_points]).unwrap()
}

fn study(label: &str, center: f64, width: f64, t_compact_end: f64) {
    let params = Params::new(3, 7.0, "cal").unwrap();
    let nl = NonlinearitySpec::untruncated(7.0).unwrap();
    println!("== {label} (center {center}, width {width}, T_end {t_compact_end})");
    let mut prev_diff = None;
    for (h, n_alpha) in [(0.02f64, 256usize), (0.01, 512), (0.005, 1024)] {
        let r_max = 12.0;
        let n_pts = ((r_max - 1.0) / h).round() as usize + 1;
        let g = make_grid(r_max, n_pts).unwrap();
        let s = state_with(g, center, width);
        let (bg, _) = Background::from_radial_run(&s, 5.0, 0.45 * h, 2, &nl, &params).unwrap();
        let cs0 = penrose::initial_compact_state(&s, &params, n_alpha, 0.2, true).unwrap();
        let dt_c = 0.45 * cs0.grid.d_alpha;
        let mut hist = Vec::new();
        let (_, clog) = penrose::evolve_compact(&cs0, t_compact_end, dt_c, 4, |st| hist.push(st.clone())).unwrap();
        let (diff, pts) = penrose::dual_representation_diff(&hist, &bg).unwrap();
        let e: Vec<f64> = clog.samples.iter().map(|x| x.energy_e).collect();
        let ratio = prev_diff.map(|p: f64| p / diff).unwrap_or(f64::NAN);
        println!("  h={h:6} nA={n_alpha:5} diff={diff:.3e} (ratio {ratio:.2}, {pts} pts)  E_up={:.3e}", penrose::CompactLog::max_uphill(&e));
        prev_diff = Some(diff);
        if h == 0.01 {
            // where does E climb?
            let ts: Vec<f64> = clog.samples.iter().map(|x| x.t_compact).collect();
            let mut climbs = Vec::new();
            for i in 1..e.len() { if e[i] > e[i-1] + 1e-3 { climbs.push((ts[i], e[i]-e[i-1])); } }
            println!("    E0={:.3}, climbs>{:.0e}: {:?}", e[0], 1e-3, &climbs[..climbs.len().min(6)]);
        }
    }
}

fn main() {
    // boundary-free: data far from obstacle, short compact window
    study("free (no boundary contact)", 5.0, 2.0, 0.5);
    // boundary-interacting
    study("boundary-interacting", 2.5, 2.0, 1.2);
}
