// Resolution dependence of the linearized amplification factor.
use wavelab::fields::{make_grid, Params, RadialState};
use wavelab::perturb::{stability_sweep, PerturbationShape, SweepMode, SweepSettings};
use wavelab::profiles::{Profile, ProfileKind};

fn main() {
    let params = Params::new(3, 7.0, "cal").unwrap();
    let t_end = 10.0f64;
    for (h, dt) in [(0.02f64, 1e-3f64), (0.01, 5e-4), (0.005, 2.5e-4), (0.0025, 1.25e-4)] {
        let r_max = 3.5 + t_end + 1.0;
        let n_pts = ((r_max - 1.0) / h).round() as usize + 1;
        let g = make_grid(r_max, n_pts).unwrap();
        let bgp = Profile::new(ProfileKind::Bump4, 5.0, 2.5, 2.0).unwrap();
        let bg = RadialState::new(g, 0.0, bgp.sample(&g), vec![0.0; g.num_points]).unwrap();
        let shape = PerturbationShape {
            profile: Profile::new(ProfileKind::Bump4, 1.0, 2.0, 0.8).unwrap(),
            ell: 2,
        };
        let steps = (t_end / dt).ceil() as usize;
        let settings = SweepSettings {
            t_end, dt,
            snapshot_every: (steps / 200).max(1),
            report_every: 10,
            n_theta: 8,
            q: 4.0, r_exp: 12.0, m_order: 1,
        };
        let t0 = std::time::Instant::now();
        let recs = stability_sweep(&[1e-3], &shape, &bg, &params, SweepMode::Linearized, &settings).unwrap();
        let r = &recs[0];
        match &r.error {
            Some(e) => println!("h={h} dt={dt}: ERROR {e}"),
            None => {
                let m_end = r.m_history.last().unwrap().1;
                // growth location: first time M reaches half its final value
                let t_half = r.m_history.iter().find(|(_, m)| *m >= 0.5 * m_end).map(|(t, _)| *t).unwrap_or(f64::NAN);
                println!("h={h} dt={dt}: M_end/eps={:.3e} growth={:.3e} t_half={t_half:.1} ({:.1?})",
                    m_end / r.epsilon, r.growth_factor, t0.elapsed());
            }
        }
    }
}
