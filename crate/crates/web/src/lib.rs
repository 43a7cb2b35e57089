//! Browser demo: three small experiments driven from `www/index.html`.

use std::f64::consts::TAU;

use wasm_bindgen::prelude::*;

use imexrelax::harness::{r13_channel_initial, InitialData};
use imexrelax::integrator::{imex_step, integrate, StepControl};
use imexrelax::models::{
    diffusive2x2_system, r13_steady_state, r13_system, Closure, PenalizationConfig, R13Boundary, R13Params,
};
use imexrelax::r13_boundary::{BoundarySet, GhostRule};
use imexrelax::spatial::Grid1D;
use imexrelax::tableau::{check_order_conditions, classify, load_tableau, validate, Registry};
use imexrelax::{Mode, State};

fn js(e: imexrelax::Error) -> JsError {
    JsError::new(&e.to_string())
}

/// Final channel profile next to the analytic steady state.
#[wasm_bindgen]
pub struct Profile {
    x: Vec<f64>,
    numeric: State,
    exact: State,
    distances: Vec<f64>,
    steps: usize,
}

#[wasm_bindgen]
impl Profile {
    pub fn x(&self) -> Vec<f64> {
        self.x.clone()
    }
    /// Component 0, 1 or 2 (`u~`, `v`, `w~`).
    pub fn numeric(&self, k: usize) -> Vec<f64> {
        self.numeric.comp(k).to_vec()
    }
    pub fn exact(&self, k: usize) -> Vec<f64> {
        self.exact.comp(k).to_vec()
    }
    /// Max-norm distance to the steady state after every step.
    pub fn distances(&self) -> Vec<f64> {
        self.distances.clone()
    }
    pub fn steps(&self) -> usize {
        self.steps
    }
}

/// Runs the R13 channel with slip walls from the printed initial data.
#[wasm_bindgen]
pub fn r13_channel(n: usize, eps: f64, g: f64, alpha: f64, beta: f64, c: f64, t_end: f64) -> Result<Profile, JsError> {
    let params = R13Params { g, alpha_bc: alpha, beta_bc: beta, eps };
    let boundary = R13Boundary::Walls { set: BoundarySet::Slip, rule: GhostRule::SecondOrder };
    let sys = r13_system(n, params, boundary, PenalizationConfig::default()).map_err(js)?;
    let y0 = r13_channel_initial(&sys, InitialData::Printed, 0.0).map_err(js)?;
    let tab = imexrelax::tableau::ImexTableau::builtin("ssp2-332").map_err(js)?;
    let control = StepControl::fixed(c * sys.grid.dx, t_end).recording_every_step();
    let traj = integrate(&sys, &tab, &y0, &control).map_err(js)?;
    let exact = r13_steady_state(&sys.grid, &sys.params);
    Ok(Profile {
        x: sys.grid.points(),
        distances: traj.states.iter().map(|s| s.max_abs_diff(&exact)).collect(),
        steps: traj.step_count(),
        numeric: traj.final_state().clone(),
        exact,
    })
}

/// Max error of `u` against `exp(-t) sin x` after each step of the 2x2
/// diffusive system at `dt = c dx`, flattened as `[t0, e0, t1, e1, ...]`.
/// Stops early once the solution leaves `1e6`.
#[wasm_bindgen]
pub fn heat_errors(n: usize, eps: f64, c: f64, t_end: f64, penalized: bool) -> Result<Vec<f64>, JsError> {
    let grid = Grid1D::periodic(0.0, TAU, n).map_err(js)?;
    let (mode, pen) = if penalized {
        (Mode::ImexI, PenalizationConfig::default())
    } else {
        (Mode::ImexE, PenalizationConfig::disabled())
    };
    let sys = diffusive2x2_system(grid, eps, Closure::identity(), Closure::zero(), mode, pen).map_err(js)?;
    let tab = imexrelax::tableau::ImexTableau::builtin("ssp2-332").map_err(js)?;
    let x = grid.points();
    let err = |y: &State, t: f64| {
        y.comp(0).iter().zip(&x).map(|(u, x)| (u - (-t).exp() * x.sin()).abs()).fold(0.0, f64::max)
    };
    let mut y = State::from_components(&[grid.sample(f64::sin), vec![0.0; n]]).map_err(js)?;
    let dt = c * grid.dx;
    let mut t = 0.0;
    let mut out = vec![0.0, err(&y, 0.0)];
    while t < t_end - 1e-12 {
        let h = dt.min(t_end - t);
        y = match imex_step(&sys, &tab, &y, t, h) {
            Ok(y) => y,
            Err(_) => break,
        };
        t += h;
        let e = err(&y, t);
        out.extend([t, e]);
        if !e.is_finite() || e >= 1e6 {
            break;
        }
    }
    Ok(out)
}

/// Names of the schemes shipped with the library.
#[wasm_bindgen]
pub fn builtin_schemes() -> Vec<String> {
    Registry::builtin().names().map(String::from).collect()
}

/// Registry text of one builtin scheme, for editing on the page.
#[wasm_bindgen]
pub fn builtin_scheme_text(name: &str) -> Result<String, JsError> {
    let t = Registry::builtin().get(name).map_err(js)?;
    Ok(imexrelax::tableau::serialize(&t))
}

/// Structure, class and order report for a scheme block.
#[wasm_bindgen]
pub fn check_tableau(text: &str) -> String {
    let tab = match load_tableau(text) {
        Ok(t) => t,
        Err(e) => return format!("error: {e}"),
    };
    let mut out = format!("scheme: {} ({} stages)\n", tab.name, tab.stages());
    match validate(&tab) {
        Ok(v) if v.is_valid() => out.push_str("structure: ok\n"),
        Ok(v) => {
            for x in v.violations {
                out.push_str(&format!("structure: {x}\n"));
            }
            return out;
        }
        Err(e) => return out + &format!("error: {e}\n"),
    }
    match classify(&tab) {
        Ok(c) => out.push_str(&format!("class: {:?} ({})\n", c.kind, c.diagnostic)),
        Err(e) => out.push_str(&format!("class: {e}\n")),
    }
    let p = check_order_conditions(&tab, 3);
    out.push_str(&format!(
        "order: {}\nstiffly accurate: {}\nglobally stiffly accurate: {}\n",
        p.satisfied_order, p.stiffly_accurate, p.globally_stiffly_accurate
    ));
    // Only the first unmet order; everything above it fails as a matter of course.
    for c in p.failed_conditions.iter().filter(|c| c.order == p.satisfied_order + 1) {
        out.push_str(&format!("failed {} (order {}): residual {:e}\n", c.id, c.order, c.residual));
    }
    out
}
