// measure sup|u| of the amplitude-5 run to size the stable time step
use wavelab::fields::{make_grid, Params, RadialState};
use wavelab::profiles::{Profile, ProfileKind};
use wavelab::radial::{evolve, NonlinearitySpec};

fn main() {
    let params = Params::new(3, 7.0, "cal").unwrap();
    let nl = NonlinearitySpec::untruncated(7.0).unwrap();
    let h = 0.01f64;
    let t_end = 8.0;
    let r_max = 3.5 + t_end + 1.0;
    let n_pts = ((r_max - 1.0) / h).round() as usize + 1;
    let g = make_grid(r_max, n_pts).unwrap();
    let prof = Profile::new(ProfileKind::Bump4, 5.0, 2.5, 2.0).unwrap();
    let u0 = prof.sample(&g);
    let s = RadialState::new(g, 0.0, u0, vec![0.0; g.num_points]).unwrap();
    for dt in [1e-3, 5e-4, 2.5e-4] {
        let t0 = std::time::Instant::now();
        match evolve(&s, t_end, dt, &nl, &params, 100, |_| {}) {
            Ok((_, log)) => {
                let sup = log.samples.iter().map(|x| x.sup_u).fold(0.0f64, f64::max);
                println!("dt={dt}: sup|u|={sup:.3} drift={:.3e} ({:.2?})", log.max_relative_energy_drift(), t0.elapsed());
            }
            Err(e) => println!("dt={dt}: {e}"),
        }
    }
}
