//! Study drivers: convergence ladders and eps-sweeps, R13 steady-state
//! runs and the KLF stability demonstration.

use std::f64::consts::{PI, TAU};
use std::time::Instant;

use super::config::{ExperimentConfig, InitialData, ModelSpec, Study};
use super::report::{ExperimentReport, ReportRow, RunSummary, FLAG_ABORTED, FLAG_DEGRADED};
use super::{convergence_rate, error_norm, oscillation_indicator, self_convergence_errors, Norm, Restriction};
use crate::error::{Error, Result};
use crate::integrator::{integrate, integrate_partitioned, StepControl, Trajectory};
use crate::models::{
    broadwell_system, diffusive2x2_system, klf_system, r13_steady_state, r13_system, vdp_system, Closure,
    PenalizationConfig, R13Boundary, R13Params, VanDerPol, R13,
};
use crate::spatial::Grid1D;
use crate::state::{Mode, State};
use crate::tableau::ImexTableau;

/// Convergence study output: the CSV rows plus lookup helpers.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceReport {
    pub report: ExperimentReport,
}

impl ConvergenceReport {
    fn rows<'a>(&'a self, eps: f64, component: &'a str, norm: Norm) -> impl Iterator<Item = &'a ReportRow> {
        self.report.select(component, norm.label()).filter(move |r| r.eps == eps)
    }

    pub fn errors(&self, eps: f64, component: &str, norm: Norm) -> Vec<f64> {
        self.rows(eps, component, norm).map(|r| r.error).collect()
    }

    /// Observed orders, one per consecutive pair of errors.
    pub fn orders(&self, eps: f64, component: &str, norm: Norm) -> Vec<f64> {
        self.rows(eps, component, norm).filter_map(|r| r.order).collect()
    }

    pub fn flagged(&self, eps: f64, flag: &str) -> bool {
        self.report.rows.iter().any(|r| r.eps == eps && r.flag.contains(flag))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SteadyStateReport {
    pub report: ExperimentReport,
    pub n: usize,
    pub dt: f64,
    pub steps: usize,
    /// `(t, ||y(t) - steady||_inf)` at t = 0 and every requested snapshot.
    pub snapshots: Vec<(f64, f64)>,
    pub final_distance: f64,
    /// No step after `monotone_from` increases the distance.
    pub monotone: bool,
    pub monotone_from: f64,
    pub reference_dt: Option<f64>,
    pub reference_steps: Option<usize>,
    pub reference_distance: Option<f64>,
}

impl SteadyStateReport {
    pub fn step_ratio(&self) -> Option<f64> {
        self.reference_steps.map(|r| r as f64 / self.steps as f64)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct KlfRun {
    pub label: &'static str,
    pub mode: Mode,
    pub scheme: String,
    pub n: usize,
    pub dt: f64,
    pub steps: usize,
    /// Indicator at the check time (`None` if the run ended earlier).
    pub indicator_check: Option<usize>,
    /// Indicator at `t_end`, on the coarse nodes for the reference run.
    pub indicator_final: Option<usize>,
    pub max_u: Option<f64>,
    pub seconds: f64,
    pub abort: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct KlfDemoReport {
    pub report: ExperimentReport,
    pub explicit: KlfRun,
    pub penalized: KlfRun,
    pub reference: KlfRun,
    pub check_time: f64,
}

impl KlfDemoReport {
    /// Reference indicator floored at one so that a perfectly smooth
    /// reference still gives a usable scale.
    pub fn reference_scale(&self) -> f64 {
        self.reference.indicator_final.unwrap_or(0).max(1) as f64
    }

    pub fn step_ratio(&self) -> f64 {
        self.explicit.steps as f64 / self.penalized.steps as f64
    }
}

/// Runs whatever study the configuration selects and writes the CSV when an
/// output path is set.
pub fn run(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    let report = match cfg.study {
        Study::Convergence => run_convergence_study(cfg)?.report,
        Study::SteadyState => run_steady_state_study(cfg)?.report,
        Study::KlfDemo => run_klf_demo(cfg)?.report,
    };
    if let Some(path) = &cfg.output {
        report.save(path)?;
    }
    Ok(report)
}

fn fixed_control(dt: f64, t_end: f64) -> StepControl {
    StepControl::fixed(dt, t_end)
}

fn penalization(on: bool) -> PenalizationConfig {
    if on {
        PenalizationConfig::default()
    } else {
        PenalizationConfig::disabled()
    }
}

fn r13_for(cfg: &ExperimentConfig, n: usize, eps: f64) -> Result<R13> {
    let ModelSpec::R13 { walls, coupling, penalized, g, alpha, beta, .. } = cfg.model else {
        return Err(Error::Config("expected the r13 model".into()));
    };
    let boundary = match walls {
        None => R13Boundary::Periodic,
        Some((set, rule)) => R13Boundary::Walls { set, rule },
    };
    let params = R13Params { g, alpha_bc: alpha, beta_bc: beta, eps };
    Ok(r13_system(n, params, boundary, penalization(penalized))?.with_coupling(coupling))
}

fn periodic_central(f: &[f64], dx: f64) -> Vec<f64> {
    let n = f.len();
    (0..n).map(|j| (f[(j + 1) % n] - f[(j + n - 1) % n]) / (2.0 * dx)).collect()
}

/// `u = sin(pi x) + 0.5 sin(5 pi x)`; moments zero or relaxed (`v = -u_x/2`, `w = -v_x`).
fn r13_periodic_initial(sys: &R13, initial: InitialData) -> Result<State> {
    let n = sys.grid.n;
    let u = sys.grid.sample(|x| (PI * x).sin() + 0.5 * (5.0 * PI * x).sin());
    let (v, w) = match initial {
        InitialData::Prepared => {
            let v: Vec<f64> = periodic_central(&u, sys.grid.dx).iter().map(|d| -0.5 * d).collect();
            let w = periodic_central(&v, sys.grid.dx).iter().map(|d| -d).collect();
            (v, w)
        }
        _ => (vec![0.0; n], vec![0.0; n]),
    };
    State::from_components(&[u, v, w])
}

/// Channel data for the steady-state study: `v = g x + C`, `w = -x^2`, and
/// `u~` per the chosen variant. Only `Compatible` satisfies the wall
/// conditions at t = 0.
pub fn r13_channel_initial(sys: &R13, initial: InitialData, wall_c: f64) -> Result<State> {
    let R13Params { g, alpha_bc: a, beta_bc: b, eps } = sys.params;
    let x = sys.grid.points();
    let u: Vec<f64> = match initial {
        InitialData::Compatible => x.iter().map(|x| eps / a * (wall_c * x + g + b * eps)).collect(),
        _ => x.iter().map(|x| eps / a * ((wall_c + b * eps) * x - g)).collect(),
    };
    let v = x.iter().map(|x| g * x + wall_c).collect();
    let w = x.iter().map(|x| -x * x).collect();
    State::from_components(&[u, v, w])
}

/// One finished (or aborted) cell of a ladder.
struct Cell {
    n: usize,
    eps: f64,
    dt: f64,
    dx: f64,
    state: Result<State>,
    steps: usize,
    seconds: f64,
}

fn timed(f: impl FnOnce() -> Result<Trajectory>) -> (Result<Trajectory>, f64) {
    let start = Instant::now();
    let r = f();
    (r, start.elapsed().as_secs_f64())
}

fn run_cell(cfg: &ExperimentConfig, tab: &ImexTableau, eps: f64, n: usize) -> Cell {
    let t_end = cfg.t_end;
    let setup = || -> Result<(f64, f64, Box<dyn FnOnce() -> Result<Trajectory> + '_>)> {
        match &cfg.model {
            ModelSpec::R13 { .. } => {
                let sys = r13_for(cfg, n, eps)?;
                let y0 = r13_periodic_initial(&sys, cfg.initial)?;
                let dx = sys.grid.dx;
                let dt = cfg.dt.dt(dx, n, t_end);
                Ok((dx, dt, Box::new(move || integrate(&sys, tab, &y0, &fixed_control(dt, t_end)))))
            }
            ModelSpec::Diffusive2x2 { penalized } => {
                let grid = Grid1D::periodic(0.0, TAU, n)?;
                let mode = if *penalized { Mode::ImexI } else { Mode::ImexE };
                let sys = diffusive2x2_system(grid, eps, Closure::identity(), Closure::zero(), mode, penalization(*penalized))?;
                let u = grid.sample(f64::sin);
                let v = match cfg.initial {
                    InitialData::Prepared => sys.equilibrium_v(&u)?,
                    _ => vec![0.0; n],
                };
                let y0 = State::from_components(&[u, v])?;
                let dt = cfg.dt.dt(grid.dx, n, t_end);
                Ok((grid.dx, dt, Box::new(move || integrate(&sys, tab, &y0, &fixed_control(dt, t_end)))))
            }
            ModelSpec::Broadwell => {
                let grid = Grid1D::periodic(0.0, TAU, n)?;
                let sys = broadwell_system(grid, eps)?;
                let y0 = sys.smooth_initial();
                let dt = cfg.dt.dt(grid.dx, n, t_end);
                Ok((grid.dx, dt, Box::new(move || integrate(&sys, tab, &y0, &fixed_control(dt, t_end)))))
            }
            ModelSpec::VanDerPol => {
                let sys = vdp_system(eps)?;
                let dt = cfg.dt.dt(1.0, n, t_end);
                let y0 = VanDerPol::default_initial();
                Ok((1.0, dt, Box::new(move || integrate(&sys, tab, &y0, &fixed_control(dt, t_end)))))
            }
            ModelSpec::Klf { .. } => Err(Error::Config("klf runs through the klf-demo study".into())),
        }
    };
    match setup() {
        Ok((dx, dt, go)) => {
            let (traj, seconds) = timed(go);
            let steps = traj.as_ref().map_or(0, |t| t.step_count());
            Cell { n, eps, dt, dx, state: traj.map(|t| t.final_state().clone()), steps, seconds }
        }
        Err(e) => Cell { n, eps, dt: f64::NAN, dx: f64::NAN, state: Err(e), steps: 0, seconds: 0.0 },
    }
}

/// Per-component error of one grid against the next finer one (or against
/// the exact solution for the heat limit).
fn cell_errors(cfg: &ExperimentConfig, cells: &[Cell], k: usize, ratio: usize, norm: Norm) -> Result<Vec<f64>> {
    let coarse = cells[k].state.as_ref().map_err(|e| Error::State(e.to_string()))?;
    match cfg.model {
        ModelSpec::Diffusive2x2 { .. } => {
            let (n, dx) = (cells[k].n, cells[k].dx);
            let decay = (-cfg.t_end).exp();
            let x: Vec<f64> = (0..n).map(|j| j as f64 * dx).collect();
            let u: Vec<f64> = x.iter().map(|x| decay * x.sin()).collect();
            // v sits at the half nodes.
            let v: Vec<f64> = x.iter().map(|x| -decay * (x + 0.5 * dx).cos()).collect();
            Ok(vec![error_norm(coarse.comp(0), &u, dx, norm)?, error_norm(coarse.comp(1), &v, dx, norm)?])
        }
        _ => {
            let fine = cells[k + 1].state.as_ref().map_err(|e| Error::State(e.to_string()))?;
            let restriction = match cfg.model {
                ModelSpec::R13 { .. } if ratio == 3 => Restriction::CellCentersRatio3,
                ModelSpec::R13 { .. } => {
                    return Err(Error::Config("r13 self-convergence needs a ratio-3 ladder".into()))
                }
                // A single point per state: compare the final values directly.
                ModelSpec::VanDerPol => {
                    return (0..coarse.ncomp)
                        .map(|c| error_norm(coarse.comp(c), fine.comp(c), 1.0, norm))
                        .collect()
                }
                _ => Restriction::Nodes(ratio),
            };
            self_convergence_errors(coarse, fine, restriction, cells[k].dx, norm)
        }
    }
}

fn component_names(model: &ModelSpec) -> &'static [&'static str] {
    match model {
        ModelSpec::R13 { .. } => &["u", "v", "w"],
        ModelSpec::Diffusive2x2 { .. } | ModelSpec::Klf { .. } => &["u", "v"],
        ModelSpec::Broadwell => &["rho", "m", "z"],
        ModelSpec::VanDerPol => &["y", "z"],
    }
}

/// Grid (or step) ladder for every eps. Cells run concurrently; a blown-up
/// cell yields NaN rows flagged `aborted` and the study carries on.
pub fn run_convergence_study(cfg: &ExperimentConfig) -> Result<ConvergenceReport> {
    if cfg.study != Study::Convergence {
        return Err(Error::Config("not a convergence study".into()));
    }
    let tab = cfg.tableau()?;
    let ratio = cfg.ratio().ok_or_else(|| Error::Config("need at least two grids".into()))?;
    let cells: Vec<Cell> = std::thread::scope(|s| {
        let handles: Vec<_> = cfg
            .eps
            .iter()
            .flat_map(|&eps| cfg.sizes.iter().map(move |&n| (eps, n)))
            .map(|(eps, n)| {
                let tab = &tab;
                s.spawn(move || run_cell(cfg, tab, eps, n))
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("study cell panicked")).collect()
    });

    let exact = matches!(cfg.model, ModelSpec::Diffusive2x2 { .. });
    let names = component_names(&cfg.model);
    let mut report = ExperimentReport::default();
    for c in &cells {
        report.runs.push(RunSummary {
            eps: c.eps,
            n: c.n,
            dt: c.dt,
            steps: c.steps,
            seconds: c.seconds,
            abort: c.state.as_ref().err().map(|e| e.to_string()),
        });
    }
    for ladder in cells.chunks(cfg.sizes.len()) {
        // Self-convergence compares each grid with the next one.
        let pairs = if exact { ladder.len() } else { ladder.len() - 1 };
        for &norm in cfg.norm.norms() {
            let mut prev: Option<Vec<f64>> = None;
            for k in 0..pairs {
                let aborted = ladder[k].state.is_err() || (!exact && ladder[k + 1].state.is_err());
                let errs = if aborted {
                    vec![f64::NAN; names.len()]
                } else {
                    cell_errors(cfg, ladder, k, ratio, norm)?
                };
                for (q, name) in names.iter().enumerate() {
                    let e = errs[q];
                    let order = prev.as_ref().map(|p| {
                        convergence_rate(p[q], e, ratio as f64).unwrap_or(f64::NAN)
                    });
                    let flag = if aborted {
                        FLAG_ABORTED
                    } else if order.is_some_and(|o| !(o >= cfg.nominal_order - 0.2)) {
                        FLAG_DEGRADED
                    } else {
                        ""
                    };
                    report.rows.push(ReportRow {
                        model: cfg.model.id().into(),
                        scheme: cfg.scheme.clone(),
                        eps: ladder[k].eps,
                        n: ladder[k].n,
                        dt: ladder[k].dt,
                        component: (*name).into(),
                        norm: norm.label().into(),
                        error: e,
                        order,
                        flag: flag.into(),
                        seconds: if cfg.timing { ladder[k].seconds } else { 0.0 },
                    });
                }
                prev = Some(errs);
            }
        }
    }
    Ok(ConvergenceReport { report })
}

/// Integrates the channel problem towards the scaled steady state, records the
/// max-norm distance at the snapshots, checks monotone decay over the tail
/// window, and optionally runs the parabolic-step reference.
pub fn run_steady_state_study(cfg: &ExperimentConfig) -> Result<SteadyStateReport> {
    let ModelSpec::R13 { walls: Some(_), wall_c, .. } = cfg.model else {
        return Err(Error::Config("steady-state studies need r13 with walls".into()));
    };
    let tab = cfg.tableau()?;
    let (n, eps) = (cfg.sizes[0], cfg.eps[0]);
    let sys = r13_for(cfg, n, eps)?;
    let steady = r13_steady_state(&sys.grid, &sys.params);
    let y0 = r13_channel_initial(&sys, cfg.initial, wall_c)?;
    let dt = cfg.dt.dt(sys.grid.dx, n, cfg.t_end);
    let monotone_from = cfg.check_time.unwrap_or(5.0);

    let control = fixed_control(dt, cfg.t_end).with_snapshots(&cfg.snapshots).recording_every_step();
    let (traj, seconds) = timed(|| integrate(&sys, &tab, &y0, &control));
    let traj = traj?;
    let dist = |s: &State| s.max_abs_diff(&steady);
    let snapshots: Vec<(f64, f64)> = std::iter::once(0.0)
        .chain(cfg.snapshots.iter().copied())
        .chain(std::iter::once(cfg.t_end))
        .filter_map(|t| traj.at(t).map(|s| (t, dist(s))))
        .fold(Vec::new(), |mut acc, p| {
            if acc.last().map_or(true, |(t, _)| *t != p.0) {
                acc.push(p);
            }
            acc
        });
    let tail: Vec<f64> = traj
        .times
        .iter()
        .zip(&traj.states)
        .filter(|(t, _)| **t >= monotone_from - 1e-12)
        .map(|(_, s)| dist(s))
        .collect();
    let monotone = tail.windows(2).all(|w| w[1] <= w[0]);
    let final_distance = dist(traj.final_state());

    let reference = match cfg.reference_c {
        Some(c) => {
            let rdt = c * sys.grid.dx * sys.grid.dx;
            let (r, _) = timed(|| integrate(&sys, &tab, &y0, &fixed_control(rdt, cfg.t_end)));
            let r = r?;
            Some((rdt, r.step_count(), dist(r.final_state())))
        }
        None => None,
    };

    let row = |dt: f64, component: &str, norm: String, error: f64, flag: &str| ReportRow {
        model: cfg.model.id().into(),
        scheme: cfg.scheme.clone(),
        eps,
        n,
        dt,
        component: component.into(),
        norm,
        error,
        order: None,
        flag: flag.into(),
        seconds: if cfg.timing { seconds } else { 0.0 },
    };
    let mut report = ExperimentReport::default();
    for (t, d) in &snapshots {
        report.rows.push(row(dt, "state", format!("Linf@t={t}"), *d, ""));
    }
    let mono_flag = if monotone { "monotone" } else { "nonmonotone" };
    report.rows.push(row(dt, "steps", "count".into(), traj.step_count() as f64, mono_flag));
    if let Some((rdt, steps, d)) = reference {
        report.rows.push(row(rdt, "state", format!("Linf@t={}", cfg.t_end), d, "reference"));
        report.rows.push(row(rdt, "steps", "count".into(), steps as f64, "reference"));
    }
    report.runs.push(RunSummary { eps, n, dt, steps: traj.step_count(), seconds, abort: None });

    Ok(SteadyStateReport {
        report,
        n,
        dt,
        steps: traj.step_count(),
        snapshots,
        final_distance,
        monotone,
        monotone_from,
        reference_dt: reference.map(|r| r.0),
        reference_steps: reference.map(|r| r.1),
        reference_distance: reference.map(|r| r.2),
    })
}

/// The two KLF runs at the demo grid, explicit-limit with `dt = C dx^2` and
/// penalized partitioned with the configured step, plus the fine reference
/// (same setup as the penalized run) restricted to the demo grid.
pub fn run_klf_demo(cfg: &ExperimentConfig) -> Result<KlfDemoReport> {
    let ModelSpec::Klf { m, tol } = cfg.model else {
        return Err(Error::Config("klf-demo needs model klf".into()));
    };
    let explicit_c = cfg.reference_c.ok_or_else(|| Error::Config("[time] reference_c is required".into()))?;
    let (n, eps) = (cfg.sizes[0], cfg.eps[0]);
    let n_ref = cfg.reference_n;
    if n_ref % n != 0 || n_ref <= n {
        return Err(Error::Config(format!("reference grid {n_ref} must be a multiple of {n}")));
    }
    let check_time = cfg.check_time.unwrap_or(1.0);
    let tab_pen = cfg.tableau()?;
    let tab_exp = cfg.tableau_named(&cfg.explicit_scheme)?;

    let one = |label: &'static str, n: usize, mode: Mode, tab: &ImexTableau, dt_of: &dyn Fn(f64) -> f64| -> Result<KlfRun> {
        let grid = Grid1D::periodic(0.0, TAU, n)?;
        let sys = klf_system(grid, eps, m, tol, mode, penalization(mode == Mode::ImexI))?;
        let dt = dt_of(grid.dx);
        let control = fixed_control(dt, cfg.t_end).with_snapshots(&[check_time]);
        let (traj, seconds) = timed(|| integrate_partitioned(&sys, tab, &sys.demo_initial(), &control));
        let stride = n / cfg.sizes[0];
        let indicator = |s: &State| {
            let u: Vec<f64> = s.comp(0).iter().step_by(stride).copied().collect();
            oscillation_indicator(&u)
        };
        let mut run = KlfRun {
            label,
            mode,
            scheme: tab.name.clone(),
            n,
            dt,
            steps: 0,
            indicator_check: None,
            indicator_final: None,
            max_u: None,
            seconds,
            abort: None,
        };
        match traj {
            Ok(t) => {
                run.steps = t.step_count();
                run.indicator_check = t.at(check_time).map(indicator);
                run.indicator_final = Some(indicator(t.final_state()));
                run.max_u = Some(t.final_state().comp(0).iter().fold(0.0f64, |a, v| a.max(v.abs())));
            }
            Err(Error::BlowUp { time }) => run.abort = Some(format!("blew up at t = {time}")),
            Err(e) => return Err(e),
        }
        Ok(run)
    };

    let explicit = one("explicit-limit", n, Mode::ImexE, &tab_exp, &|dx| explicit_c * dx * dx)?;
    let step = |dx: f64| cfg.dt.dt(dx, n, cfg.t_end);
    let penalized = one("penalized", n, Mode::ImexI, &tab_pen, &step)?;
    let reference = one("reference", n_ref, Mode::ImexI, &tab_pen, &step)?;

    let mut report = ExperimentReport::default();
    for r in [&explicit, &penalized, &reference] {
        let row = |component: &str, norm: String, value: Option<f64>, flag: &str| ReportRow {
            model: cfg.model.id().into(),
            scheme: r.scheme.clone(),
            eps,
            n: r.n,
            dt: r.dt,
            component: component.into(),
            norm,
            error: value.unwrap_or(f64::NAN),
            order: None,
            flag: flag.into(),
            seconds: if cfg.timing { r.seconds } else { 0.0 },
        };
        let flag = if r.abort.is_some() { FLAG_ABORTED } else { r.label };
        report.rows.push(row("u", format!("osc@t={check_time}"), r.indicator_check.map(|v| v as f64), flag));
        report.rows.push(row("u", format!("osc@t={}", cfg.t_end), r.indicator_final.map(|v| v as f64), flag));
        report.rows.push(row("u", format!("max@t={}", cfg.t_end), r.max_u, flag));
        report.rows.push(row("steps", "count".into(), Some(r.steps as f64), flag));
        report.runs.push(RunSummary { eps, n: r.n, dt: r.dt, steps: r.steps, seconds: r.seconds, abort: r.abort.clone() });
    }
    Ok(KlfDemoReport { report, explicit, penalized, reference, check_time })
}
