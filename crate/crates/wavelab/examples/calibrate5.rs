// Probe the stability sweep configuration for runtime and verdicts.
use wavelab::fields::{make_grid, Params, RadialState};
use wavelab::perturb::{stability_sweep, PerturbationShape, SweepMode, SweepSettings};
use wavelab::profiles::{Profile, ProfileKind};

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let full = args.iter().any(|a| a == "--full");
    let params = Params::new(3, 7.0, "cal").unwrap();
    let (t_end, h, epsilons): (f64, f64, Vec<f64>) = if full {
        (50.0, 0.005, vec![1e-3, 1e-2, 1e-1])
    } else {
        (10.0, 0.02, vec![1e-3, 1e-2])
    };
    let r_max = 3.5 + t_end + 1.0;
    let n_pts = ((r_max - 1.0) / h).round() as usize + 1;
    let g = make_grid(r_max, n_pts).unwrap();
    let bgp = Profile::new(ProfileKind::Bump4, 5.0, 2.5, 2.0).unwrap();
    let bg = RadialState::new(g, 0.0, bgp.sample(&g), vec![0.0; g.num_points]).unwrap();
    let shape = PerturbationShape {
        profile: Profile::new(ProfileKind::Bump4, 1.0, 2.0, 0.8).unwrap(),
        ell: 2,
    };
    let dt = if full { 1e-3f64 } else { 1e-3f64 };
    let steps = (t_end / dt).ceil() as usize;
    let settings = SweepSettings {
        t_end,
        dt,
        snapshot_every: (steps / 200).max(1),
        report_every: 10,
        n_theta: 8,
        q: 4.0,
        r_exp: 12.0,
        m_order: 1,
    };
    println!("dt = {dt:.4e}, steps = {steps}, N_r = {n_pts}");
    for (mode, name) in [
        (SweepMode::Linearized, "linearized"),
        (SweepMode::AxisymNonlinear, "axisym"),
    ] {
        let t0 = std::time::Instant::now();
        let recs = stability_sweep(&epsilons, &shape, &bg, &params, mode, &settings).unwrap();
        println!("{name} ({:.1?}):", t0.elapsed());
        for r in &recs {
            match &r.error {
                Some(e) => println!("  eps={:.0e}: ERROR {e}", r.epsilon),
                None => {
                    let g = r.gronwall.as_ref().unwrap();
                    println!(
                        "  eps={:.0e}: bounded={} growth={:.3} M_end={:.4e} M/eps={:.4e} decomp={:.1e} bound_ok={} b0={:.2e}",
                        r.epsilon, r.bounded, r.growth_factor,
                        r.m_history.last().unwrap().1,
                        r.m_history.last().unwrap().1 / r.epsilon,
                        g.relative_decomposition_residual(),
                        g.bound_holds, g.bound_rate,
                    );
                }
            }
        }
    }
}
