//! Configuration-driven experiment runner: executes the named experiment,
//! writes CSV/JSON artifacts plus a manifest (config echo + code version +
//! wall time), and reports whether all in-run assertions passed.
//!
//! Reproducibility contract: the same config and seed produce byte-identical
//! CSV/JSON artifacts; `verify` re-runs a manifest into a scratch directory
//! and compares bytes.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;

use crate::config::{DataSpec, ExperimentConfig, ExperimentKind, GridSpec, Manifest, TimeSpec};
use crate::diagnostics;
use crate::error::{Error, Result};
use crate::fields::{make_grid, Params, RadialGrid, RadialState};
use crate::penrose;
use crate::perturb::{
    self, Background, PerturbationShape, StabilityRecord, SweepMode, SweepSettings,
};
use crate::profiles;
use crate::radial::{self, NonlinearitySpec};

/// Result of a run: artifacts were written either way; `failures` lists the
/// in-run assertions that did not hold.
#[derive(Debug)]
pub struct RunReport {
    pub failures: Vec<String>,
    pub artifacts: Vec<String>,
    pub output_dir: PathBuf,
}

impl RunReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

struct Sink {
    dir: PathBuf,
    artifacts: Vec<String>,
}

impl Sink {
    fn new(dir: &Path) -> Result<Self> {
        fs::create_dir_all(dir)?;
        Ok(Sink {
            dir: dir.to_path_buf(),
            artifacts: Vec::new(),
        })
    }

    fn write(&mut self, name: &str, contents: &str) -> Result<()> {
        fs::write(self.dir.join(name), contents)?;
        self.artifacts.push(name.to_string());
        Ok(())
    }

    fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<()> {
        let text = serde_json::to_string_pretty(value)?;
        self.write(name, &text)
    }
}

fn require_time(config: &ExperimentConfig) -> Result<&TimeSpec> {
    config
        .time
        .as_ref()
        .ok_or_else(|| Error::Config("experiment requires a `time` block".into()))
}

fn require_data(config: &ExperimentConfig) -> Result<&DataSpec> {
    config
        .data
        .as_ref()
        .ok_or_else(|| Error::Config("experiment requires a `data` block".into()))
}

fn build_grid(spec: &GridSpec, default_r_max: f64) -> Result<RadialGrid> {
    let r_max = spec.r_max.unwrap_or(default_r_max);
    let num_points = match (spec.h, spec.num_points) {
        (Some(h), _) => ((r_max - 1.0) / h).round() as usize + 1,
        (None, Some(n)) => n,
        (None, None) => return Err(Error::Config("grid needs `h` or `num_points`".into())),
    };
    make_grid(r_max, num_points)
}

fn initial_state(data: &DataSpec, grid: RadialGrid) -> Result<(RadialState, f64)> {
    let u0p = data.u0.build()?;
    let mut support = u0p.support_radius();
    let u0 = u0p.sample(&grid);
    let u1 = match &data.u1 {
        Some(spec) => {
            let p = spec.build()?;
            support = support.max(p.support_radius());
            p.sample(&grid)
        }
        None => vec![0.0; grid.num_points],
    };
    Ok((RadialState::new(grid, 0.0, u0, u1)?, support))
}

/// Execute an experiment. `out_root` overrides the WAVELAB_OUT resolution
/// (used by `verify` to redirect into a scratch directory).
pub fn run(config: &ExperimentConfig, out_root: Option<&Path>) -> Result<RunReport> {
    let started = Instant::now();
    let out_dir = config.resolved_output_dir(out_root);
    let mut sink = Sink::new(&out_dir)?;
    let params = config.params()?;

    let failures = match config.experiment {
        ExperimentKind::RunRadial => run_radial(config, &params, &mut sink)?,
        ExperimentKind::RunPenrose => run_penrose(config, &params, &mut sink)?,
        ExperimentKind::RunPerturb => run_perturb(config, &params, &mut sink)?,
        ExperimentKind::CheckCompat => check_compat(config, &params, &mut sink)?,
        ExperimentKind::Diagnose => diagnose(config, &params, &mut sink)?,
        ExperimentKind::HardyTest => hardy_test(config, &params, &mut sink)?,
        ExperimentKind::Sweep => sweep(config, &params, &mut sink)?,
    };

    let manifest = Manifest {
        config: config.clone(),
        code_version: env!("CARGO_PKG_VERSION").to_string(),
        wall_time_s: started.elapsed().as_secs_f64(),
        artifacts: sink.artifacts.clone(),
    };
    fs::write(
        out_dir.join("manifest.json"),
        serde_json::to_string_pretty(&manifest)?,
    )?;

    Ok(RunReport {
        failures,
        artifacts: sink.artifacts,
        output_dir: out_dir,
    })
}

// ---------------------------------------------------------------------------
// run-radial
// ---------------------------------------------------------------------------

#[derive(Serialize)]
struct RadialSummary {
    energy_drift: f64,
    sup_u_max: f64,
    strauss_max: Option<f64>,
    blowup: Option<f64>,
}

fn run_radial(
    config: &ExperimentConfig,
    params: &Params,
    sink: &mut Sink,
) -> Result<Vec<String>> {
    let time = require_time(config)?;
    let data = require_data(config)?;
    let probe = data.u0.build()?;
    let default_r_max = probe.support_radius().max(
        data.u1
            .as_ref()
            .map(|s| s.build().map(|p| p.support_radius()))
            .transpose()?
            .unwrap_or(1.0),
    ) + time.t_end
        + 1.0;
    let grid = build_grid(&config.grid, default_r_max)?;
    let (state, _) = initial_state(data, grid)?;
    let dt = time.dt.unwrap_or(time.cfl_fraction * grid.h);
    let nl = NonlinearitySpec::new(params.p, config.truncation)?;
    let steps = (time.t_end / dt).ceil() as usize;
    let stride = config.snapshot_stride.unwrap_or((steps / 400).max(1));
    let dump = config.dump_snapshots.unwrap_or(false);

    let mut snap_idx = 0usize;
    let mut dump_err: Option<Error> = None;
    let dir = sink.dir.clone();
    let mut dumped: Vec<String> = Vec::new();
    let (_, log) = radial::evolve(&state, time.t_end, dt, &nl, params, stride, |s| {
        if dump && dump_err.is_none() {
            let name = format!("snapshot_{snap_idx:06}.csv");
            let res = (|| -> Result<()> {
                let mut buf = Vec::new();
                s.write_csv(&mut buf)?;
                fs::write(dir.join(&name), buf)?;
                Ok(())
            })();
            match res {
                Ok(()) => dumped.push(name),
                Err(e) => dump_err = Some(e),
            }
        }
        snap_idx += 1;
    })?;
    if let Some(e) = dump_err {
        return Err(e);
    }
    sink.artifacts.extend(dumped);

    let mut buf = Vec::new();
    log.write_csv(&mut buf)?;
    sink.write("run_log.csv", std::str::from_utf8(&buf).unwrap())?;

    let drift = log.max_relative_energy_drift();
    let sup_max = log.samples.iter().map(|s| s.sup_u).fold(0.0, f64::max);
    let strauss_max = log
        .samples
        .iter()
        .map(|s| s.strauss)
        .filter(|x| x.is_finite())
        .fold(f64::NAN, f64::max);
    let verdict = config
        .blowup_threshold
        .map(|th| radial::detect_blowup(&log, th));
    let summary = RadialSummary {
        energy_drift: drift,
        sup_u_max: sup_max,
        strauss_max: strauss_max.is_finite().then_some(strauss_max),
        blowup: verdict.as_ref().and_then(|v| v.first_time),
    };
    sink.write_json("radial_report.json", &summary)?;

    let mut failures = Vec::new();
    // default assertion scales with the discretization (order-2 scheme)
    let tol = config
        .energy_tolerance
        .unwrap_or(100.0 * (grid.h * grid.h + dt * dt));
    if drift > tol {
        failures.push(format!("energy drift {drift:.3e} exceeds {tol:.1e}"));
    }
    if let Some(v) = verdict {
        if v.exceeded {
            failures.push(format!(
                "sup-norm crossed {:.3e} at t = {:.4}",
                v.threshold,
                v.first_time.unwrap()
            ));
        }
    }
    Ok(failures)
}

// ---------------------------------------------------------------------------
// run-penrose
// ---------------------------------------------------------------------------

#[derive(Serialize)]
struct PenroseSummary {
    t_compact_end: f64,
    energy_e_initial: f64,
    energy_e_final: f64,
    e_uphill: f64,
    f_uphill: f64,
    flux_residual: f64,
    dual_diff: Option<f64>,
    dual_points: Option<usize>,
    dual_tolerance: Option<f64>,
}

fn run_penrose(
    config: &ExperimentConfig,
    params: &Params,
    sink: &mut Sink,
) -> Result<Vec<String>> {
    let time = require_time(config)?;
    let data = require_data(config)?;
    let t_compact_end = time.t_end.min(3.0);
    let delta = config.delta.unwrap_or(0.2);
    let num_alpha = config.num_alpha.unwrap_or(512);

    // physical window needed to cover the comparison region of the compact run
    let t_phys = 4.0 * t_compact_end.sin().abs().max(0.3) + 0.5;
    let probe = data.u0.build()?;
    let default_r_max = probe.support_radius() + t_phys + 1.0;
    let grid = build_grid(&config.grid, default_r_max)?;
    let (state, _) = initial_state(data, grid)?;
    let dt = time.dt.unwrap_or(time.cfl_fraction * grid.h);
    let nl = NonlinearitySpec::untruncated(params.p)?;
    let (bg, radial_log) = Background::from_radial_run(&state, t_phys, dt, 2, &nl, params)?;
    let mut buf = Vec::new();
    radial_log.write_csv(&mut buf)?;
    sink.write("radial_log.csv", std::str::from_utf8(&buf).unwrap())?;

    let cs0 = penrose::initial_compact_state(&state, params, num_alpha, delta, true)?;
    let d_alpha = cs0.grid.d_alpha;
    let dt_compact = time.cfl_fraction * d_alpha;
    let mut history: Vec<penrose::CompactState> = Vec::new();
    let (fin, clog) =
        penrose::evolve_compact(&cs0, t_compact_end, dt_compact, 4, |s| history.push(s.clone()))?;

    let mut buf = Vec::new();
    clog.write_csv(&mut buf)?;
    sink.write("compact_log.csv", std::str::from_utf8(&buf).unwrap())?;
    let mut buf = Vec::new();
    fin.write_csv(&mut buf)?;
    sink.write("compact_final.csv", std::str::from_utf8(&buf).unwrap())?;
    sink.write_json("compact_final_meta.json", &fin.sidecar())?;

    let e_series: Vec<f64> = clog.samples.iter().map(|s| s.energy_e).collect();
    let f_series: Vec<f64> = clog
        .samples
        .iter()
        .map(|s| s.energy_f)
        .filter(|x| x.is_finite())
        .collect();
    let e_uphill = penrose::CompactLog::max_uphill(&e_series);
    let f_uphill = penrose::CompactLog::max_uphill(&f_series);
    let flux = penrose::flux_identity_residual(&history)?;

    let (dual_diff, dual_points, dual_tol) = if config.dual_oracle.unwrap_or(false) {
        let (diff, pts) = penrose::dual_representation_diff(&history, &bg)?;
        // O(h² + dT²)-scaled default, calibrated by the refinement study in
        // the acceptance suite
        let tol = config
            .oracle_tolerance
            .unwrap_or(300.0 * (grid.h * grid.h + dt_compact * dt_compact));
        (Some(diff), Some(pts), Some(tol))
    } else {
        (None, None, None)
    };

    let e0 = e_series.first().copied().unwrap_or(0.0);
    let summary = PenroseSummary {
        t_compact_end,
        energy_e_initial: e0,
        energy_e_final: *e_series.last().unwrap_or(&0.0),
        e_uphill,
        f_uphill,
        flux_residual: flux,
        dual_diff,
        dual_points: dual_points.map(|x| x),
        dual_tolerance: dual_tol,
    };
    sink.write_json("penrose_report.json", &summary)?;

    let mut failures = Vec::new();
    let scale = e0.max(1e-30);
    if e_uphill > 0.05 * scale {
        failures.push(format!(
            "compact energy E increased by {e_uphill:.3e} (> 5% of E(0))"
        ));
    }
    if f_uphill > 0.05 * scale {
        failures.push(format!(
            "compact energy F increased by {f_uphill:.3e} (> 5% of E(0))"
        ));
    }
    if let (Some(d), Some(tol)) = (dual_diff, dual_tol) {
        if d > tol {
            failures.push(format!(
                "dual-representation difference {d:.3e} exceeds {tol:.3e}"
            ));
        }
    }
    Ok(failures)
}

// ---------------------------------------------------------------------------
// run-perturb and sweep
// ---------------------------------------------------------------------------

#[derive(Serialize)]
struct SweepMemberSummary {
    epsilon: f64,
    bounded: bool,
    growth_factor: Option<f64>,
    m_final: Option<f64>,
    decomposition_residual_rel: Option<f64>,
    gronwall_bound_holds: Option<bool>,
    error: Option<String>,
}

#[derive(Serialize)]
struct SweepSummary {
    mode: String,
    members: Vec<SweepMemberSummary>,
}

fn summarize_records(mode: &str, records: &[StabilityRecord]) -> SweepSummary {
    SweepSummary {
        mode: mode.to_string(),
        members: records
            .iter()
            .map(|r| SweepMemberSummary {
                epsilon: r.epsilon,
                bounded: r.bounded,
                growth_factor: r.growth_factor.is_finite().then_some(r.growth_factor),
                m_final: r.m_history.last().map(|&(_, m)| m),
                decomposition_residual_rel: r
                    .gronwall
                    .as_ref()
                    .map(|g| g.relative_decomposition_residual()),
                gronwall_bound_holds: r.gronwall.as_ref().map(|g| g.bound_holds),
                error: r.error.clone(),
            })
            .collect(),
    }
}

fn sweep_failures(mode: &str, records: &[StabilityRecord]) -> Vec<String> {
    let mut failures = Vec::new();
    for r in records {
        if let Some(e) = &r.error {
            failures.push(format!("{mode} eps = {:.1e}: {e}", r.epsilon));
            continue;
        }
        if !r.bounded {
            failures.push(format!(
                "{mode} eps = {:.1e}: M grew by {:.1}x",
                r.epsilon, r.growth_factor
            ));
        }
        if let Some(g) = &r.gronwall {
            if !g.bound_holds {
                failures.push(format!(
                    "{mode} eps = {:.1e}: Gronwall bound violated",
                    r.epsilon
                ));
            }
            if g.relative_decomposition_residual() > 1e-8 {
                failures.push(format!(
                    "{mode} eps = {:.1e}: decomposition residual {:.2e}",
                    r.epsilon,
                    g.relative_decomposition_residual()
                ));
            }
        }
    }
    failures
}

fn sweep_common(
    config: &ExperimentConfig,
    params: &Params,
    sink: &mut Sink,
    epsilons: &[f64],
) -> Result<Vec<String>> {
    let time = require_time(config)?;
    let data = require_data(config)?;
    let pert_spec = config
        .perturbation
        .as_ref()
        .ok_or_else(|| Error::Config("sweep requires a `perturbation` profile".into()))?;
    let shape = PerturbationShape {
        profile: pert_spec.build()?,
        ell: config.ell.unwrap_or(2),
    };
    let probe = data.u0.build()?;
    let support = probe.support_radius().max(shape.profile.support_radius());
    let grid = build_grid(&config.grid, support + time.t_end + 1.0)?;
    let (bg_state, _) = initial_state(data, grid)?;

    // step size: CFL of the stencils and the stiff potential scale
    let amp = bg_state.sup_abs_u().0;
    let v_max = params.p * amp.powf(params.p - 1.0);
    let n_theta = config.n_theta.unwrap_or(16);
    let theta = perturb::ThetaGrid::new(n_theta)?;
    let dt_wave = (radial::CFL_FRACTION * grid.h).min(perturb::axisym_max_dt(&grid, &theta));
    let dt = time
        .dt
        .unwrap_or_else(|| dt_wave.min(1.5 / (v_max + 1.0).sqrt()) * (time.cfl_fraction / 0.45));
    let steps = (time.t_end / dt).ceil() as usize;
    let snapshot_every = config.snapshot_stride.unwrap_or((steps / 200).max(1));
    let settings = SweepSettings {
        t_end: time.t_end,
        dt,
        snapshot_every,
        report_every: 10,
        n_theta,
        q: 4.0,
        r_exp: 2.0 * params.n as f64 / (params.n as f64 - 2.5),
        m_order: 1,
    };

    let modes: Vec<(SweepMode, &str)> = match config.sweep_mode.as_deref() {
        Some("linearized") => vec![(SweepMode::Linearized, "linearized")],
        Some("axisym") => vec![(SweepMode::AxisymNonlinear, "axisym")],
        _ => {
            if params.n == 3 {
                vec![
                    (SweepMode::Linearized, "linearized"),
                    (SweepMode::AxisymNonlinear, "axisym"),
                ]
            } else {
                vec![(SweepMode::Linearized, "linearized")]
            }
        }
    };

    let mut failures = Vec::new();
    let mut summaries = Vec::new();
    for (mode, name) in modes {
        let records =
            perturb::stability_sweep(epsilons, &shape, &bg_state, params, mode, &settings)?;
        sink.write(
            &format!("sweep_{name}.csv"),
            &perturb::sweep_csv(&records),
        )?;
        failures.extend(sweep_failures(name, &records));
        summaries.push(summarize_records(name, &records));
    }
    sink.write_json("sweep_report.json", &summaries)?;
    Ok(failures)
}

fn run_perturb(
    config: &ExperimentConfig,
    params: &Params,
    sink: &mut Sink,
) -> Result<Vec<String>> {
    let eps = config
        .epsilons
        .as_ref()
        .and_then(|v| v.first().copied())
        .unwrap_or(1e-2);
    sweep_common(config, params, sink, &[eps])
}

fn sweep(config: &ExperimentConfig, params: &Params, sink: &mut Sink) -> Result<Vec<String>> {
    let epsilons = config
        .epsilons
        .clone()
        .ok_or_else(|| Error::Config("sweep requires `epsilons`".into()))?;
    sweep_common(config, params, sink, &epsilons)
}

// ---------------------------------------------------------------------------
// check-compat
// ---------------------------------------------------------------------------

#[derive(Serialize)]
struct CompatSummary {
    report: serde_json::Value,
    strong_screen: bool,
    all_pass: bool,
}

fn check_compat(
    config: &ExperimentConfig,
    params: &Params,
    sink: &mut Sink,
) -> Result<Vec<String>> {
    let data = require_data(config)?;
    let probe = data.u0.build()?;
    let grid = build_grid(&config.grid, probe.support_radius() + 1.0)?;
    let (state, _) = initial_state(data, grid)?;
    let max_order = (params.p.ceil() as usize).saturating_sub(1).min(4);
    let order = config.compat_order.unwrap_or(max_order).min(max_order);
    let report = crate::compat::nonlinear_sequence(&state.u, &state.v, &grid, params, order)?;
    let screen = crate::compat::strong_condition_check(&state.u, &state.v, &grid, params.n, order);
    let summary = CompatSummary {
        report: report.to_json(),
        strong_screen: screen,
        all_pass: report.all_pass(),
    };
    sink.write_json("compat.json", &summary)?;
    let mut failures = Vec::new();
    if !report.all_pass() {
        failures.push(format!(
            "nonlinear compatibility conditions fail at order {order}: boundary values {:?}",
            report.boundary_values
        ));
    }
    Ok(failures)
}

// ---------------------------------------------------------------------------
// diagnose
// ---------------------------------------------------------------------------

#[derive(Serialize)]
struct PotentialSummary {
    total: f64,
    head: f64,
    tail: f64,
}

fn diagnose(config: &ExperimentConfig, params: &Params, sink: &mut Sink) -> Result<Vec<String>> {
    let time = require_time(config)?;
    if time.t_end < 20.0 {
        return Err(Error::Config(
            "diagnose needs t_end >= 20 for the decay profile".into(),
        ));
    }
    let data = require_data(config)?;
    let probe = data.u0.build()?;
    let grid = build_grid(&config.grid, probe.support_radius() + time.t_end + 1.0)?;
    let (state, _) = initial_state(data, grid)?;
    let dt = time.dt.unwrap_or(time.cfl_fraction * grid.h);
    let nl = NonlinearitySpec::untruncated(params.p)?;
    let steps = (time.t_end / dt).ceil() as usize;
    let stride = config.snapshot_stride.unwrap_or((steps / 200).max(1));
    let mut history: Vec<RadialState> = Vec::new();
    let (_, log) = radial::evolve(&state, time.t_end, dt, &nl, params, stride, |s| {
        history.push(s.clone())
    })?;

    let mut buf = Vec::new();
    log.write_csv(&mut buf)?;
    sink.write("run_log.csv", std::str::from_utf8(&buf).unwrap())?;

    let decay = diagnostics::decay_profile(&history, params)?;
    sink.write(
        "decay.csv",
        &diagnostics::series_csv(&decay.times, &decay.q_series, "Q"),
    )?;
    sink.write_json("decay.json", &decay)?;

    let pairs = config
        .pairs
        .clone()
        .unwrap_or_else(|| vec![(f64::INFINITY, 2.0), (4.0, 4.0), (4.0, 12.0)]);
    let st = diagnostics::strichartz_monitor(&history, &pairs, params)?;
    sink.write_json("strichartz.json", &st)?;

    let sob = diagnostics::sobolev_history(&history, 2, params)?;
    sink.write(
        "sobolev.csv",
        &diagnostics::series_csv(&sob.times, &sob.series, "norm"),
    )?;
    sink.write_json("sobolev.json", &sob)?;

    let m_radius = config.m_radius.unwrap_or(2.0);
    let dn = diagnostics::data_norm(&state.u, &state.v, &grid, m_radius, params)?;
    sink.write_json("data_norm.json", &dn)?;

    // ∫ ‖V(t)‖_∞ dt from the run log: ‖V‖_∞ = p sup|u|^{p-1}
    let v_sup: Vec<f64> = log
        .samples
        .iter()
        .map(|s| params.p * s.sup_u.powf(params.p - 1.0))
        .collect();
    let times: Vec<f64> = log.samples.iter().map(|s| s.t).collect();
    let trapz = |lo: f64, hi: f64| -> f64 {
        let mut acc = 0.0;
        for w in times.windows(2).zip(v_sup.windows(2)) {
            let (ts, vs) = w;
            let (t0, t1) = (ts[0], ts[1]);
            if t1 <= lo || t0 >= hi {
                continue;
            }
            acc += 0.5 * (vs[0] + vs[1]) * (t1 - t0);
        }
        acc
    };
    let t_mid = 0.5 * time.t_end;
    let pot = PotentialSummary {
        total: trapz(0.0, time.t_end),
        head: trapz(0.0, t_mid),
        tail: trapz(t_mid, time.t_end),
    };
    sink.write_json("potential.json", &pot)?;

    let mut failures = Vec::new();
    if !decay.bounded {
        failures.push("weighted decay profile Q(t) not bounded".into());
    }
    if !decay.tinf_bounded {
        failures.push("⟨t⟩·sup|u| not bounded".into());
    }
    if !sob.bounded {
        failures.push("Sobolev history not bounded".into());
    }
    if pot.tail > pot.head {
        failures.push(format!(
            "potential integral tail {:.3e} exceeds head {:.3e}",
            pot.tail, pot.head
        ));
    }
    Ok(failures)
}

// ---------------------------------------------------------------------------
// hardy-test
// ---------------------------------------------------------------------------

#[derive(Serialize)]
struct HardySummary {
    seed: u64,
    trials: usize,
    c_h: f64,
    c_h_dilated_half: f64,
    c_h_dilated_two: f64,
    max_dilation_shift: f64,
}

fn hardy_test(
    config: &ExperimentConfig,
    params: &Params,
    sink: &mut Sink,
) -> Result<Vec<String>> {
    let trials = config.trials.unwrap_or(10_000);
    let base = diagnostics::hardy_monte_carlo(config.seed, trials, params.n, 600, 1.0);
    let lo = diagnostics::hardy_monte_carlo(config.seed, trials, params.n, 600, 0.5);
    let hi = diagnostics::hardy_monte_carlo(config.seed, trials, params.n, 600, 2.0);
    let shift = ((lo.c_h - base.c_h).abs() / base.c_h).max((hi.c_h - base.c_h).abs() / base.c_h);
    let summary = HardySummary {
        seed: config.seed,
        trials,
        c_h: base.c_h,
        c_h_dilated_half: lo.c_h,
        c_h_dilated_two: hi.c_h,
        max_dilation_shift: shift,
    };
    sink.write_json("hardy.json", &summary)?;
    let mut failures = Vec::new();
    if !base.c_h.is_finite() {
        failures.push("Hardy constant not finite".into());
    }
    if shift > 0.10 {
        failures.push(format!("Hardy constant moved {shift:.3} under dilation"));
    }
    Ok(failures)
}

// ---------------------------------------------------------------------------
// profiles and verify
// ---------------------------------------------------------------------------

/// The `profiles` subcommand: catalog entries (optionally filtered).
pub fn list_profiles(filter: Option<&str>) -> Vec<profiles::ProfileInfo> {
    profiles::catalog(filter)
}

/// Re-run the manifest's config into `scratch` and byte-compare every
/// artifact against the original output directory. Returns mismatches.
pub fn verify(manifest_path: &Path, scratch: &Path) -> Result<Vec<String>> {
    let manifest = Manifest::load(manifest_path)?;
    let original_dir = manifest_path
        .parent()
        .ok_or_else(|| Error::Config("manifest has no parent directory".into()))?;
    let report = run(&manifest.config, Some(scratch))?;
    let mut mismatches = Vec::new();
    if !report.passed() {
        mismatches.push(format!(
            "re-run reported assertion failures: {:?}",
            report.failures
        ));
    }
    for name in &manifest.artifacts {
        let a = fs::read(original_dir.join(name));
        let b = fs::read(report.output_dir.join(name));
        match (a, b) {
            (Ok(x), Ok(y)) if x == y => {}
            (Ok(_), Ok(_)) => mismatches.push(format!("{name}: contents differ")),
            (Err(e), _) => mismatches.push(format!("{name}: cannot read original: {e}")),
            (_, Err(e)) => mismatches.push(format!("{name}: cannot read re-run copy: {e}")),
        }
    }
    Ok(mismatches)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(json: &str) -> ExperimentConfig {
        ExperimentConfig::from_json(json).unwrap()
    }

    #[test]
    fn run_radial_zero_amplitude_passes() {
        let dir = tempfile::tempdir().unwrap();
        let config = cfg(&format!(
            r#"{{
                "experiment": "run-radial",
                "params": {{"n": 3, "p": 7.0}},
                "grid": {{"h": 0.02}},
                "time": {{"t_end": 1.0}},
                "data": {{"u0": {{"profile": "bump4", "amplitude": 0.0, "center": 2.0, "width": 1.0}}}},
                "output_dir": "{}"
            }}"#,
            dir.path().join("zero").display()
        ));
        let report = run(&config, None).unwrap();
        assert!(report.passed(), "{:?}", report.failures);
        let log = fs::read_to_string(report.output_dir.join("run_log.csv")).unwrap();
        assert!(log.starts_with("t,E_total,E_kin,E_grad,E_pot,sup_u,strauss_ratio"));
        // zero data: all energies exactly zero
        for line in log.lines().skip(1) {
            let cols: Vec<&str> = line.split(',').collect();
            assert_eq!(cols[1].parse::<f64>().unwrap(), 0.0);
        }
        assert!(report.output_dir.join("manifest.json").exists());
    }

    #[test]
    fn run_radial_determinism_and_verify() {
        let dir = tempfile::tempdir().unwrap();
        let config = cfg(&format!(
            r#"{{
                "experiment": "run-radial",
                "params": {{"n": 3, "p": 7.0}},
                "grid": {{"h": 0.02}},
                "time": {{"t_end": 1.5}},
                "data": {{"u0": {{"profile": "bump4", "amplitude": 1.0, "center": 2.0, "width": 1.0}}}},
                "output_dir": "{}"
            }}"#,
            dir.path().join("a").display()
        ));
        let report = run(&config, None).unwrap();
        assert!(report.passed());
        let scratch = tempfile::tempdir().unwrap();
        let mismatches = verify(&report.output_dir.join("manifest.json"), scratch.path())
            .unwrap();
        assert!(mismatches.is_empty(), "{mismatches:?}");
    }

    #[test]
    fn hardy_experiment_runs() {
        let dir = tempfile::tempdir().unwrap();
        let config = cfg(&format!(
            r#"{{
                "experiment": "hardy-test",
                "params": {{"n": 3, "p": 7.0}},
                "seed": 42,
                "trials": 400,
                "output_dir": "{}"
            }}"#,
            dir.path().join("h").display()
        ));
        let report = run(&config, None).unwrap();
        assert!(report.passed(), "{:?}", report.failures);
        assert!(report.output_dir.join("hardy.json").exists());
    }
}
