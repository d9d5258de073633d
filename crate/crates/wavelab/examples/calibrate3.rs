// Probe the large-amplitude decay run at several resolutions.
use wavelab::diagnostics;
use wavelab::fields::{make_grid, Params, RadialState};
use wavelab::profiles::{Profile, ProfileKind};
use wavelab::radial::{evolve, NonlinearitySpec};

fn main() {
    let params = Params::new(3, 7.0, "cal").unwrap();
    let nl = NonlinearitySpec::untruncated(7.0).unwrap();
    for (h, dt) in [(0.005f64, 5e-4f64), (0.0025, 2.5e-4)] {
        let t_end = 50.0;
        let r_max = 3.5 + t_end + 1.0;
        let n_pts = ((r_max - 1.0) / h).round() as usize + 1;
        let g = make_grid(r_max, n_pts).unwrap();
        let prof = Profile::new(ProfileKind::Bump4, 5.0, 2.5, 2.0).unwrap();
        let u0 = prof.sample(&g);
        let s = RadialState::new(g, 0.0, u0, vec![0.0; g.num_points]).unwrap();
        let steps = (t_end / dt).ceil() as usize;
        let stride = (steps / 200).max(1);
        let mut hist = Vec::new();
        let t0 = std::time::Instant::now();
        match evolve(&s, t_end, dt, &nl, &params, stride, |st| hist.push(st.clone())) {
            Err(e) => { println!("h={h} dt={dt}: {e}"); continue; }
            Ok((_, log)) => {
                let el = t0.elapsed();
                let decay = diagnostics::decay_profile(&hist, &params).unwrap();
                let tmid = 25.0;
                let fmax = |s: &[f64], lo: bool| decay.times.iter().zip(s).filter(|(t, _)| (**t <= tmid) == lo).map(|(_, q)| *q).fold(0.0f64, f64::max);
                let v: Vec<f64> = log.samples.iter().map(|s| 7.0 * s.sup_u.powi(6)).collect();
                let ts: Vec<f64> = log.samples.iter().map(|s| s.t).collect();
                let (mut head, mut tail) = (0.0, 0.0);
                for i in 1..ts.len() {
                    let seg = 0.5 * (v[i] + v[i-1]) * (ts[i] - ts[i-1]);
                    if ts[i] <= 25.0 { head += seg } else { tail += seg }
                }
                println!("h={h} dt={dt}: drift={:.2e} | Q 1st={:.2} 2nd={:.2} bounded={} | tinf 1st={:.2} 2nd={:.2} bounded={} | V head={head:.3e} tail={tail:.3e} | {el:.2?}",
                    log.max_relative_energy_drift(),
                    fmax(&decay.q_series, true), fmax(&decay.q_series, false), decay.bounded,
                    fmax(&decay.tinf_series, true), fmax(&decay.tinf_series, false), decay.tinf_bounded);
                // Q(t) every 5 time units for shape inspection
                let mut line = String::from("  Q(t): ");
                for (t, q) in decay.times.iter().zip(&decay.q_series) {
                    if (t / 5.0 - (t / 5.0).round()).abs() < 0.02 { line.push_str(&format!("{t:.0}:{q:.2} ")); }
                }
                println!("{line}");
            }
        }
    }
}
