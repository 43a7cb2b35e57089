use super::{check_eps, periodic_forward, staggered_flux_derivative, Closure, PenalizationConfig};
use crate::error::{Error, Result};
use crate::spatial::{solve_tridiagonal, Grid1D, TridiagonalSystem};
use crate::state::{solve_monotone_scalar, Mode, NewtonControl, PartitionedSystem, StageSolve, State};

/// Kawashima-LeFloch nonlinear relaxation
/// `u_t + v_x = 0, eps^2 v_t + b(u)_x = -|v|^(m-1) v + q(u)`
/// in partitioned form `y' = F(y*, y)`: the diffusion coefficient
/// `|b(u*)_x|^alpha` of the penalty is frozen, the `u` it multiplies is live.
#[derive(Debug, Clone, PartialEq)]
pub struct Klf {
    pub grid: Grid1D,
    pub eps: f64,
    pub m: f64,
    /// `-1 + 1/m`
    pub alpha: f64,
    /// Floor added to `|u_x|` wherever it is raised to a negative power.
    pub tol: f64,
    pub b: Closure,
    pub q: Closure,
    pub mode: Mode,
    pub penalization: PenalizationConfig,
    pub mu: f64,
}

pub fn klf_system(grid: Grid1D, eps: f64, m: f64, tol: f64, mode: Mode, penalization: PenalizationConfig) -> Result<Klf> {
    check_eps(eps)?;
    if !(m > 0.0) || !m.is_finite() {
        return Err(Error::InvalidArgument(format!("exponent m must be positive, got {m}")));
    }
    if !(tol >= 0.0) {
        return Err(Error::InvalidArgument(format!("TOL must be nonnegative, got {tol}")));
    }
    if mode == Mode::ImexI && !penalization.enabled {
        return Err(Error::Config("IMEX-I needs the penalization term enabled".into()));
    }
    let mu = penalization.mu(eps, grid.dx);
    Ok(Klf {
        grid,
        eps,
        m,
        alpha: -1.0 + 1.0 / m,
        tol,
        b: Closure::identity(),
        q: Closure::zero(),
        mode,
        penalization,
        mu,
    })
}

/// Solves `a v + kappa |v|^(m-1) v = s` for `a > 0, kappa >= 0`.
pub fn solve_power_source(a: f64, kappa: f64, s: f64, m: f64, newton: &NewtonControl) -> Result<f64> {
    if kappa == 0.0 {
        return Ok(s / a);
    }
    if m == 1.0 {
        return Ok(s / (a + kappa));
    }
    if m == 2.0 {
        // Rationalized root of kappa v^2 + a v - |s| = 0.
        return Ok(2.0 * s / (a + (a * a + 4.0 * kappa * s.abs()).sqrt()));
    }
    let scale = a + kappa;
    let f = |v: f64| {
        let av = v.abs();
        let val = (a * v + kappa * av.powf(m - 1.0) * v - s) / scale;
        let der = (a + kappa * m * av.powf(m - 1.0)) / scale;
        (val, der)
    };
    solve_monotone_scalar(f, s / scale, newton)
}

/// Largest step with `(1 + alpha) |u_x|^alpha dt / dx^2 <= 1`; `tol` regularizes
/// `|u_x|` when `alpha < 0`.
pub fn klf_parabolic_cfl(alpha: f64, max_ux: f64, dx: f64, tol: f64) -> Result<f64> {
    if alpha <= -1.0 {
        return Err(Error::InvalidArgument(format!("alpha = {alpha} gives a degenerate diffusion coefficient")));
    }
    if !(max_ux >= 0.0) {
        return Err(Error::InvalidArgument(format!("max |u_x| must be nonnegative, got {max_ux}")));
    }
    let g = if alpha < 0.0 { max_ux + tol } else { max_ux };
    Ok(dx * dx / ((1.0 + alpha) * g.powf(alpha)))
}

impl Klf {
    /// `u = cos x, v = sin x`.
    pub fn demo_initial(&self) -> State {
        State {
            ncomp: 2,
            n: self.grid.n,
            data: [self.grid.sample(f64::cos), self.grid.sample(f64::sin)].concat(),
        }
    }

    fn pen(&self) -> f64 {
        if self.penalization.enabled {
            self.mu
        } else {
            0.0
        }
    }

    fn lambda(&self, u: &[f64]) -> f64 {
        u.iter().map(|u| self.b.derivative(*u)).fold(0.0, f64::max).sqrt() / self.eps
    }

    /// Interface coefficients `nu_{j+1/2} = (|D+ b(u*)_j| + TOL)^alpha`.
    pub fn nu(&self, ustar: &[f64]) -> Vec<f64> {
        if self.alpha == 0.0 {
            return vec![1.0; self.grid.n];
        }
        let floor = if self.alpha < 0.0 { self.tol } else { 0.0 };
        periodic_forward(&self.b.apply(ustar), self.grid.dx)
            .iter()
            .map(|g| (g.abs() + floor).powf(self.alpha))
            .collect()
    }

    /// `D-(nu D+ w)`. Same composition as the transport `D- v` with
    /// `v = -nu D+ w`, so the penalty cancels exactly in the limit.
    fn weighted_laplacian(&self, nu: &[f64], w: &[f64]) -> Vec<f64> {
        let n = self.grid.n;
        let h2 = self.grid.dx * self.grid.dx;
        (0..n)
            .map(|j| {
                let (jm, jp) = ((j + n - 1) % n, (j + 1) % n);
                (nu[j] * (w[jp] - w[j]) - nu[jm] * (w[j] - w[jm])) / h2
            })
            .collect()
    }

    fn power(&self, v: f64) -> f64 {
        v.abs().powf(self.m - 1.0) * v
    }

    /// Frozen part of `F_u`: `-D- v* - mu L(b(u*))` plus blended dissipation.
    fn frozen_u(&self, frozen: &State, nu: &[f64]) -> Result<Vec<f64>> {
        let (us, vs) = (frozen.comp(0), frozen.comp(1));
        let mut out: Vec<f64> = staggered_flux_derivative(vs, us, self.lambda(us), self.mu, self.grid.dx)?
            .into_iter()
            .map(|d| -d)
            .collect();
        let pen = self.pen();
        if pen != 0.0 {
            let l = self.weighted_laplacian(nu, &self.b.apply(us));
            out.iter_mut().zip(l).for_each(|(o, l)| *o -= pen * l);
        }
        Ok(out)
    }

    /// Equilibrium flux `q(u) - D b(u)` that `|v|^(m-1) v` relaxes to.
    pub fn equilibrium_flux(&self, u: &[f64]) -> Result<Vec<f64>> {
        let db = periodic_forward(&self.b.apply(u), self.grid.dx);
        Ok(u.iter().zip(&db).map(|(u, d)| self.q.value(*u) - d).collect())
    }
}

impl PartitionedSystem for Klf {
    fn names(&self) -> &[&'static str] {
        &["u", "v"]
    }
    fn len(&self) -> usize {
        self.grid.n
    }
    fn mode(&self) -> Mode {
        self.mode
    }

    fn rhs(&self, frozen: &State, live: &State, _t: f64) -> Result<State> {
        let nu = self.nu(frozen.comp(0));
        let mut fu = self.frozen_u(frozen, &nu)?;
        let pen = self.pen();
        if pen != 0.0 {
            let l = self.weighted_laplacian(&nu, &self.b.apply(live.comp(0)));
            fu.iter_mut().zip(l).for_each(|(f, l)| *f += pen * l);
        }
        let db = periodic_forward(&self.b.apply(live.comp(0)), self.grid.dx);
        let (u, v) = (live.comp(0), live.comp(1));
        let e2 = self.eps * self.eps;
        let fv = (0..self.grid.n)
            .map(|j| (-db[j] - self.power(v[j]) + self.q.value(u[j])) / e2)
            .collect();
        State::from_components(&[fu, fv])
    }

    fn stage_solve(&self, frozen: &State, rhs: &State, ctx: &StageSolve) -> Result<State> {
        let k = ctx.h_aii;
        let n = self.grid.n;
        let nu = self.nu(frozen.comp(0));
        let explicit_u = self.frozen_u(frozen, &nu)?;
        let ru: Vec<f64> = rhs.comp(0).iter().zip(&explicit_u).map(|(r, e)| r + k * e).collect();
        let pen = self.pen();
        let u = if pen != 0.0 {
            // (I - k mu D-(nu D+ b(u))) u = ru with b linearized about ru.
            let c = k * pen / (self.grid.dx * self.grid.dx);
            let slope: Vec<f64> = ru.iter().map(|u| self.b.derivative(*u)).collect();
            let offset: Vec<f64> = ru.iter().zip(&slope).map(|(u, s)| self.b.value(*u) - s * u).collect();
            let loff = self.weighted_laplacian(&nu, &offset);
            let sys = TridiagonalSystem {
                lower: (0..n).map(|j| -c * nu[(j + n - 1) % n] * slope[(j + n - 1) % n]).collect(),
                diag: (0..n).map(|j| 1.0 + c * (nu[j] + nu[(j + n - 1) % n]) * slope[j]).collect(),
                upper: (0..n).map(|j| -c * nu[j] * slope[(j + 1) % n]).collect(),
                rhs: (0..n).map(|j| ru[j] + k * pen * loff[j]).collect(),
                cyclic: true,
            };
            solve_tridiagonal(&sys)?.x
        } else {
            ru
        };
        let db = periodic_forward(&self.b.apply(&u), self.grid.dx);
        let e2 = self.eps * self.eps;
        let rv = rhs.comp(1);
        let v = (0..n)
            .map(|j| {
                let s = e2 * rv[j] + k * (self.q.value(u[j]) - db[j]);
                solve_power_source(e2, k, s, self.m, &ctx.newton)
            })
            .collect::<Result<Vec<f64>>>()?;
        State::from_components(&[u, v])
    }

    fn constraint_residual(&self, y: &State) -> Option<f64> {
        let flux = self.equilibrium_flux(y.comp(0)).ok()?;
        Some(y.comp(1).iter().zip(&flux).fold(0.0, |m, (v, f)| m.max((self.power(*v) - f).abs())))
    }

    fn dx(&self) -> Option<f64> {
        Some(self.grid.dx)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::TAU;

    #[test]
    fn power_source_closed_forms() {
        let nc = NewtonControl::default();
        assert!((solve_power_source(1.0, 1.0, 2.0, 2.0, &nc).unwrap() - 1.0).abs() < 1e-15);
        assert!((solve_power_source(1.0, 1.0, -2.0, 2.0, &nc).unwrap() + 1.0).abs() < 1e-15);
        for m in [0.5, 1.5, 3.0] {
            let v = solve_power_source(0.3, 2.0, 1.7, m, &nc).unwrap();
            assert!((0.3 * v + 2.0 * v.abs().powf(m - 1.0) * v - 1.7).abs() < 1e-10);
        }
    }

    #[test]
    fn parabolic_cfl_examples() {
        assert!((klf_parabolic_cfl(0.0, 3.0, 0.1, 0.0).unwrap() - 0.01).abs() < 1e-15);
        assert!((klf_parabolic_cfl(1.0, 2.0, 0.1, 0.0).unwrap() - 0.0025).abs() < 1e-15);
        assert!(klf_parabolic_cfl(-0.5, 0.0, 0.1, 1e-6).unwrap().is_finite());
        assert!(klf_parabolic_cfl(-1.0, 1.0, 0.1, 1e-6).is_err());
    }

    #[test]
    fn linear_case_has_unit_coefficient() {
        let grid = Grid1D::periodic(0.0, TAU, 32).unwrap();
        let sys = klf_system(grid, 1e-3, 1.0, 1e-6, Mode::ImexI, PenalizationConfig::default()).unwrap();
        assert_eq!(sys.alpha, 0.0);
        assert!(sys.nu(&grid.sample(f64::cos)).iter().all(|v| *v == 1.0));
        let sq = klf_system(grid, 1e-3, 2.0, 1e-6, Mode::ImexI, PenalizationConfig::default()).unwrap();
        assert_eq!(sq.alpha, -0.5);
    }

    #[test]
    fn stage_solve_satisfies_stage_equation() {
        let grid = Grid1D::periodic(0.0, TAU, 32).unwrap();
        for mode in [Mode::ImexI, Mode::ImexE] {
            let sys = klf_system(grid, 0.05, 2.0, 1e-6, mode, PenalizationConfig::default()).unwrap();
            let frozen = sys.demo_initial();
            let r = State::from_components(&[grid.sample(|x| x.cos() + 0.1), grid.sample(|x| 0.5 * x.sin())]).unwrap();
            let ctx = StageSolve { t: 0.0, h_aii: 0.02, newton: NewtonControl::default() };
            let y = sys.stage_solve(&frozen, &r, &ctx).unwrap();
            let mut back = r.clone();
            back.axpy(0.02, &sys.rhs(&frozen, &y, 0.0).unwrap());
            assert!(back.max_abs_diff(&y) < 1e-11, "{mode:?}");
        }
    }
}
