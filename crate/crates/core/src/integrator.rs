//! IMEX Runge-Kutta stepping: additive stage loop, the partitioned
//! frozen-argument variant, and a fixed/CFL-slaved time loop.

use crate::error::{Error, Result};
use crate::state::{Mode, NewtonControl, PartitionedSystem, SplitSystem, StageSolve, State};
use crate::tableau::{is_globally_stiffly_accurate, ImexTableau, STRUCT_TOL};

/// Relative tolerance for the last-stage identity of globally stiffly
/// accurate tableaux.
pub const GSA_DEFECT_TOL: f64 = 1e-13;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DtMode {
    FixedDt(f64),
    /// `dt = cfl * dx / max_speed`
    HyperbolicCfl(f64),
    /// `dt = cfl * dx^2`
    ParabolicCfl(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepControl {
    pub dt_mode: DtMode,
    pub t_end: f64,
    pub newton: NewtonControl,
    /// Extra times at which the state is recorded; each is hit exactly.
    pub snapshots: Vec<f64>,
    /// Guard against runaway loops.
    pub max_steps: usize,
    /// Record the state after every step, not only at snapshots.
    pub record_all: bool,
}

impl StepControl {
    pub fn fixed(dt: f64, t_end: f64) -> Self {
        Self {
            dt_mode: DtMode::FixedDt(dt),
            t_end,
            newton: NewtonControl::default(),
            snapshots: Vec::new(),
            max_steps: 50_000_000,
            record_all: false,
        }
    }

    pub fn recording_every_step(mut self) -> Self {
        self.record_all = true;
        self
    }

    pub fn with_snapshots(mut self, times: &[f64]) -> Self {
        self.snapshots = times.to_vec();
        self
    }

    fn validate(&self) -> Result<()> {
        let v = match self.dt_mode {
            DtMode::FixedDt(v) | DtMode::HyperbolicCfl(v) | DtMode::ParabolicCfl(v) => v,
        };
        if !(v > 0.0) || !v.is_finite() {
            return Err(Error::Config(format!("time step parameter must be positive, got {v}")));
        }
        if !(self.t_end >= 0.0) || !self.t_end.is_finite() {
            return Err(Error::Config(format!("t_end must be finite and nonnegative, got {}", self.t_end)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepDiagnostics {
    /// Time at the end of the step.
    pub t: f64,
    pub dt: f64,
    pub manifold_residual: Option<f64>,
    /// `|y0 + h sum b K - Y_s|` relative to the state size, for GSA tableaux.
    pub gsa_defect: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    /// Initial time, every requested snapshot, and the final time.
    pub times: Vec<f64>,
    pub states: Vec<State>,
    pub steps: Vec<StepDiagnostics>,
}

impl Trajectory {
    pub fn final_state(&self) -> &State {
        self.states.last().expect("trajectory holds the initial state")
    }

    pub fn final_time(&self) -> f64 {
        *self.times.last().expect("trajectory holds the initial time")
    }

    pub fn step_count(&self) -> usize {
        self.steps.len()
    }

    /// The recorded state closest to `t`.
    pub fn at(&self, t: f64) -> Option<&State> {
        self.times
            .iter()
            .position(|s| (s - t).abs() <= 1e-12 * (1.0 + t.abs()))
            .map(|k| &self.states[k])
    }
}

fn wrap_stage(stage: usize) -> impl FnOnce(Error) -> Error {
    move |e| Error::Stage { stage, source: Box::new(e) }
}

/// Combination `y0 + h sum_j w_j k_j` skipping zero weights.
fn combine(y0: &State, h: f64, weights: impl Iterator<Item = f64>, ks: &[Option<State>]) -> State {
    let mut out = y0.clone();
    for (w, k) in weights.zip(ks) {
        if w != 0.0 {
            let k = k.as_ref().expect("stage derivative needed by a nonzero weight");
            out.axpy(h * w, k);
        }
    }
    out
}

/// Whether stage `j`'s derivative appears in any later row or in the weights.
fn needed(t: &crate::tableau::ButcherTableau, j: usize) -> bool {
    t.b[j] != 0.0 || (j + 1..t.stages).any(|i| t.coef(i, j) != 0.0)
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepResult {
    pub state: State,
    pub gsa_defect: Option<f64>,
}

/// One additive IMEX step from `(t0, y0)` with step `h`.
pub fn imex_step(sys: &dyn SplitSystem, tab: &ImexTableau, y0: &State, t0: f64, h: f64) -> Result<State> {
    imex_step_detailed(sys, tab, y0, t0, h, &NewtonControl::default()).map(|r| r.state)
}

pub fn imex_step_detailed(
    sys: &dyn SplitSystem,
    tab: &ImexTableau,
    y0: &State,
    t0: f64,
    h: f64,
    newton: &NewtonControl,
) -> Result<StepResult> {
    let s = tab.stages();
    let (ex, im) = (&tab.explicit, &tab.implicit);
    let mut ke: Vec<Option<State>> = vec![None; s];
    let mut ki: Vec<Option<State>> = vec![None; s];
    let mut last = y0.clone();
    for i in 0..s {
        let mut r = combine(y0, h, (0..i).map(|j| ex.coef(i, j)), &ke[..i]);
        for j in 0..i {
            let a = im.coef(i, j);
            if a != 0.0 {
                r.axpy(h * a, ki[j].as_ref().expect("implicit stage derivative"));
            }
        }
        let aii = im.coef(i, i);
        let ti = t0 + im.c[i] * h;
        let y = if aii != 0.0 {
            let ctx = StageSolve { t: ti, h_aii: h * aii, newton: *newton };
            let y = sys.stage_solve(&r, &ctx).map_err(wrap_stage(i))?;
            if needed(im, i) {
                ki[i] = Some(y.difference_quotient(&r, h * aii));
            }
            y
        } else {
            if needed(im, i) {
                ki[i] = Some(sys.implicit_rhs(&r, ti).map_err(wrap_stage(i))?);
            }
            r
        };
        if !y.is_finite() {
            return Err(wrap_stage(i)(Error::NonFinite(format!("stage value at t = {ti}"))));
        }
        if needed(ex, i) {
            ke[i] = Some(sys.explicit_rhs(&y, t0 + ex.c[i] * h).map_err(wrap_stage(i))?);
        }
        last = y;
    }
    let mut update = combine(y0, h, ex.b.iter().copied(), &ke);
    for (j, b) in im.b.iter().enumerate() {
        if *b != 0.0 {
            update.axpy(h * b, ki[j].as_ref().expect("implicit stage derivative"));
        }
    }
    if is_globally_stiffly_accurate(tab) {
        let defect = update.max_abs_diff(&last) / (1.0 + last.max_abs());
        Ok(StepResult { state: last, gsa_defect: Some(defect) })
    } else {
        Ok(StepResult { state: update, gsa_defect: None })
    }
}

/// Rejects tableaux that violate the weight condition of the partitioned
/// construction for the given mode.
pub fn check_partitioned_tableau(tab: &ImexTableau, mode: Mode) -> Result<()> {
    match mode {
        Mode::ImexI => {
            let same = tab
                .explicit
                .b
                .iter()
                .zip(&tab.implicit.b)
                .all(|(a, b)| (a - b).abs() <= STRUCT_TOL);
            if !same {
                return Err(Error::Config(format!(
                    "partitioned IMEX-I needs equal weights b = b~; tableau {} violates it",
                    tab.name
                )));
            }
        }
        Mode::ImexE => {
            if !is_globally_stiffly_accurate(tab) {
                return Err(Error::Config(format!(
                    "partitioned IMEX-E needs a globally stiffly accurate tableau; {} is not",
                    tab.name
                )));
            }
        }
    }
    Ok(())
}

/// One step of `y' = F(y*, y)`: the frozen argument follows the explicit
/// tableau, the live one the implicit tableau.
pub fn imex_step_partitioned(
    sys: &dyn PartitionedSystem,
    tab: &ImexTableau,
    y0: &State,
    t0: f64,
    h: f64,
) -> Result<State> {
    check_partitioned_tableau(tab, sys.mode())?;
    partitioned_step_unchecked(sys, tab, y0, t0, h, &NewtonControl::default())
}

fn partitioned_step_unchecked(
    sys: &dyn PartitionedSystem,
    tab: &ImexTableau,
    y0: &State,
    t0: f64,
    h: f64,
    newton: &NewtonControl,
) -> Result<State> {
    let s = tab.stages();
    let (ex, im) = (&tab.explicit, &tab.implicit);
    let mut k: Vec<Option<State>> = vec![None; s];
    let mut last = y0.clone();
    let used = |j: usize| needed(im, j) || needed(ex, j);
    for i in 0..s {
        let ystar = combine(y0, h, (0..i).map(|j| ex.coef(i, j)), &k[..i]);
        let r = combine(y0, h, (0..i).map(|j| im.coef(i, j)), &k[..i]);
        let aii = im.coef(i, i);
        let ti = t0 + im.c[i] * h;
        let y = if aii != 0.0 {
            let ctx = StageSolve { t: ti, h_aii: h * aii, newton: *newton };
            let y = sys.stage_solve(&ystar, &r, &ctx).map_err(wrap_stage(i))?;
            if used(i) {
                k[i] = Some(y.difference_quotient(&r, h * aii));
            }
            y
        } else {
            if used(i) {
                k[i] = Some(sys.rhs(&ystar, &r, ti).map_err(wrap_stage(i))?);
            }
            r
        };
        if !y.is_finite() {
            return Err(wrap_stage(i)(Error::NonFinite(format!("stage value at t = {ti}"))));
        }
        last = y;
    }
    match sys.mode() {
        Mode::ImexE => Ok(last),
        Mode::ImexI => Ok(combine(y0, h, im.b.iter().copied(), &k)),
    }
}

fn step_size(mode: DtMode, dx: Option<f64>, speed: impl FnOnce() -> f64) -> Result<f64> {
    match mode {
        DtMode::FixedDt(dt) => Ok(dt),
        DtMode::HyperbolicCfl(cfl) => {
            let dx = dx.ok_or_else(|| Error::Config("CFL stepping needs a spatial grid".into()))?;
            let a = speed();
            if !(a > 0.0) || !a.is_finite() {
                return Err(Error::Config(format!("invalid characteristic speed {a}")));
            }
            Ok(cfl * dx / a)
        }
        DtMode::ParabolicCfl(cfl) => {
            let dx = dx.ok_or_else(|| Error::Config("CFL stepping needs a spatial grid".into()))?;
            Ok(cfl * dx * dx)
        }
    }
}

struct Driver<'a> {
    control: &'a StepControl,
    dx: Option<f64>,
}

impl Driver<'_> {
    fn run(
        &self,
        y0: &State,
        mut step: impl FnMut(&State, f64, f64) -> Result<(State, Option<f64>)>,
        speed: impl Fn(&State) -> f64,
        residual: impl Fn(&State) -> Option<f64>,
    ) -> Result<Trajectory> {
        self.control.validate()?;
        if !y0.is_finite() {
            return Err(Error::BlowUp { time: 0.0 });
        }
        let t_end = self.control.t_end;
        let mut marks: Vec<f64> = self
            .control
            .snapshots
            .iter()
            .copied()
            .filter(|s| *s > 0.0 && *s < t_end)
            .collect();
        marks.sort_by(f64::total_cmp);
        marks.dedup();
        let mut marks = marks.into_iter().peekable();

        let mut traj = Trajectory { times: vec![0.0], states: vec![y0.clone()], steps: Vec::new() };
        let mut y = y0.clone();
        let mut t = 0.0;
        while t < t_end {
            if traj.steps.len() >= self.control.max_steps {
                return Err(Error::Config(format!("step limit {} reached at t = {t}", self.control.max_steps)));
            }
            let mut dt = step_size(self.control.dt_mode, self.dx, || speed(&y))?;
            while marks.peek().is_some_and(|m| *m <= t) {
                marks.next();
            }
            let target = marks.peek().copied().unwrap_or(t_end);
            let mut lands = false;
            // Loose enough to absorb rounding accumulated over thousands of fixed steps.
            if target - t <= dt * (1.0 + 1e-8) {
                dt = target - t;
                lands = true;
            }
            let (next, defect) = step(&y, t, dt)?;
            if !next.is_finite() {
                return Err(Error::BlowUp { time: t + dt });
            }
            t = if lands { target } else { t + dt };
            y = next;
            traj.steps.push(StepDiagnostics { t, dt, manifold_residual: residual(&y), gsa_defect: defect });
            if lands || self.control.record_all {
                traj.times.push(t);
                traj.states.push(y.clone());
            }
        }
        if traj.times.len() == 1 {
            // t_end = 0
            traj.times.push(t);
            traj.states.push(y);
        }
        Ok(traj)
    }
}

/// Repeated additive IMEX steps from `t = 0` to `control.t_end`.
pub fn integrate(sys: &dyn SplitSystem, tab: &ImexTableau, y0: &State, control: &StepControl) -> Result<Trajectory> {
    sys.check_admissible(y0)?;
    let newton = control.newton;
    let driver = Driver { control, dx: sys.dx() };
    driver.run(
        y0,
        |y, t, dt| {
            let r = imex_step_detailed(sys, tab, y, t, dt, &newton).map_err(|e| blow_up_or(e, t + dt))?;
            Ok((r.state, r.gsa_defect))
        },
        |y| sys.max_speed(y),
        |y| sys.constraint_residual(y),
    )
}

/// Repeated partitioned steps; the weight condition is checked once up front.
pub fn integrate_partitioned(
    sys: &dyn PartitionedSystem,
    tab: &ImexTableau,
    y0: &State,
    control: &StepControl,
) -> Result<Trajectory> {
    check_partitioned_tableau(tab, sys.mode())?;
    let newton = control.newton;
    let driver = Driver { control, dx: sys.dx() };
    driver.run(
        y0,
        |y, t, dt| {
            let next = partitioned_step_unchecked(sys, tab, y, t, dt, &newton).map_err(|e| blow_up_or(e, t + dt))?;
            Ok((next, None))
        },
        |y| sys.max_speed(y),
        |y| sys.constraint_residual(y),
    )
}

/// Non-finite stage values are reported as a blow-up at the step's end time.
fn blow_up_or(e: Error, time: f64) -> Error {
    match e {
        Error::Stage { ref source, .. } if matches!(**source, Error::NonFinite(_)) => Error::BlowUp { time },
        other => other,
    }
}

/// Max norm of the model's algebraic relaxation constraint.
pub fn manifold_residual(sys: &dyn SplitSystem, y: &State) -> Result<f64> {
    sys.constraint_residual(y)
        .ok_or_else(|| Error::InvalidArgument("system exposes no algebraic constraint".into()))
}

#[cfg(test)]
mod tests {
    use super::*;

    /// `y' = l1 y + l2 y` with the first term explicit.
    struct Dahlquist {
        l1: f64,
        l2: f64,
        mode: Mode,
    }

    impl SplitSystem for Dahlquist {
        fn names(&self) -> &[&'static str] {
            &["y"]
        }
        fn len(&self) -> usize {
            1
        }
        fn epsilon(&self) -> f64 {
            1.0
        }
        fn mode(&self) -> Mode {
            self.mode
        }
        fn explicit_rhs(&self, y: &State, _t: f64) -> Result<State> {
            Ok(y.scaled(self.l1))
        }
        fn implicit_rhs(&self, y: &State, _t: f64) -> Result<State> {
            Ok(y.scaled(self.l2))
        }
        fn stage_solve(&self, rhs: &State, ctx: &StageSolve) -> Result<State> {
            Ok(rhs.scaled(1.0 / (1.0 - ctx.h_aii * self.l2)))
        }
        fn unsplit_rhs(&self, y: &State, _t: f64) -> Result<State> {
            Ok(y.scaled(self.l1 + self.l2))
        }
    }

    fn tab(name: &str) -> ImexTableau {
        ImexTableau::builtin(name).unwrap()
    }

    #[test]
    fn imex_euler_one_step() {
        let sys = Dahlquist { l1: 0.7, l2: -3.0, mode: Mode::ImexI };
        let y = imex_step(&sys, &tab("imex-euler"), &State::scalar(&[1.5]), 0.0, 0.1).unwrap();
        let expected = 1.5 * (1.0 + 0.1 * 0.7) / (1.0 + 0.3);
        assert!((y.data[0] - expected).abs() < 1e-15);
    }

    #[test]
    fn zero_rhs_is_identity() {
        let sys = Dahlquist { l1: 0.0, l2: 0.0, mode: Mode::ImexI };
        for name in ["imex-euler", "imex-midpoint-trapezoid", "ssp2-332"] {
            let y = imex_step(&sys, &tab(name), &State::scalar(&[2.25]), 0.0, 0.3).unwrap();
            assert_eq!(y.data[0], 2.25);
        }
    }

    #[test]
    fn gsa_update_equals_last_stage() {
        let sys = Dahlquist { l1: 0.4, l2: -20.0, mode: Mode::ImexI };
        let r = imex_step_detailed(&sys, &tab("imex-midpoint-trapezoid"), &State::scalar(&[1.0]), 0.0, 0.1, &NewtonControl::default())
            .unwrap();
        assert!(r.gsa_defect.unwrap() < 1e-15);
    }

    #[test]
    fn implicit_decay_recurrence() {
        let sys = Dahlquist { l1: 0.0, l2: -1.0, mode: Mode::ImexI };
        let traj = integrate(&sys, &tab("imex-euler"), &State::scalar(&[1.0]), &StepControl::fixed(0.1, 1.0)).unwrap();
        assert_eq!(traj.step_count(), 10);
        assert!((traj.final_state().data[0] - (1.0f64 / 1.1).powi(10)).abs() < 1e-14);
        assert!((traj.final_state().data[0] - 0.385543).abs() < 1e-6);
    }

    #[test]
    fn last_step_is_clipped() {
        let sys = Dahlquist { l1: 0.0, l2: -1.0, mode: Mode::ImexI };
        let c = StepControl::fixed(0.3, 1.0).with_snapshots(&[0.5]);
        let traj = integrate(&sys, &tab("imex-euler"), &State::scalar(&[1.0]), &c).unwrap();
        assert_eq!(traj.final_time(), 1.0);
        assert_eq!(traj.times, vec![0.0, 0.5, 1.0]);
        let times: Vec<f64> = traj.steps.iter().map(|s| s.t).collect();
        assert!(times.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn blow_up_reports_time() {
        let sys = Dahlquist { l1: 1e200, l2: 0.0, mode: Mode::ImexI };
        let err = integrate(&sys, &tab("imex-euler"), &State::scalar(&[1e200]), &StepControl::fixed(1.0, 10.0)).unwrap_err();
        assert!(matches!(err, Error::BlowUp { time } if time == 1.0));
    }

    #[test]
    fn partitioned_degenerate_cases() {
        // F independent of its live argument: explicit RK of the explicit half.
        let explicit = Dahlquist { l1: -2.0, l2: 0.0, mode: Mode::ImexI };
        let t = tab("ssp2-332");
        let y = imex_step_partitioned(&AsPartitionedRef(&explicit), &t, &State::scalar(&[1.0]), 0.0, 0.1).unwrap();
        let z = -0.2f64;
        // Stability polynomial of the explicit half (three stages, order two).
        let stages = [1.0, 1.0 + 0.5 * z, 1.0 + z + 0.25 * z * z];
        let expected = 1.0 + z / 3.0 * stages.iter().sum::<f64>();
        assert!((y.data[0] - expected).abs() < 1e-15);

        // F depending only on the live argument: backward Euler with imex-euler.
        let implicit = Dahlquist { l1: 0.0, l2: -4.0, mode: Mode::ImexI };
        let y = imex_step_partitioned(&AsPartitionedRef(&implicit), &tab("imex-euler"), &State::scalar(&[1.0]), 0.0, 0.1)
            .unwrap();
        assert!((y.data[0] - 1.0 / 1.4).abs() < 1e-15);
    }

    #[test]
    fn partitioned_gate() {
        let sys = Dahlquist { l1: 0.0, l2: -1.0, mode: Mode::ImexI };
        let err = imex_step_partitioned(&AsPartitionedRef(&sys), &tab("imex-midpoint-trapezoid"), &State::scalar(&[1.0]), 0.0, 0.1)
            .unwrap_err();
        assert!(err.to_string().contains("b = b~"));
        let sys = Dahlquist { l1: 0.0, l2: -1.0, mode: Mode::ImexE };
        let err = imex_step_partitioned(&AsPartitionedRef(&sys), &tab("ssp2-332"), &State::scalar(&[1.0]), 0.0, 0.1).unwrap_err();
        assert!(err.to_string().contains("globally stiffly accurate"));
    }

    use crate::state::AsPartitioned as AsPartitionedRef;
}
