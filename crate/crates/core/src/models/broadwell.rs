use super::check_eps;
use crate::error::{Error, Result};
use crate::spatial::{conservative_divergence, split_flux, weno_reconstruct, Field, Grid1D, Side, WenoOrder};
use crate::state::{Mode, SplitSystem, StageSolve, State};

/// Broadwell kinetic model in `(rho, m, z)`: convection explicit through
/// WENO flux splitting, the collision term in `z` implicit.
#[derive(Debug, Clone, PartialEq)]
pub struct Broadwell {
    pub grid: Grid1D,
    pub eps: f64,
    pub weno: WenoOrder,
}

pub fn broadwell_system(grid: Grid1D, eps: f64) -> Result<Broadwell> {
    check_eps(eps)?;
    Ok(Broadwell { grid, eps, weno: WenoOrder::Five })
}

/// `z* = (rho^2 + m^2) / (2 rho)`.
pub fn broadwell_equilibrium(rho: f64, m: f64) -> f64 {
    (rho * rho + m * m) / (2.0 * rho)
}

impl Broadwell {
    /// `rho = 1 + 0.2 sin x`, `m = 0`, `z` at equilibrium.
    pub fn smooth_initial(&self) -> State {
        let rho = self.grid.sample(|x| 1.0 + 0.2 * x.sin());
        let m = vec![0.0; self.grid.n];
        let z = rho.iter().map(|r| broadwell_equilibrium(*r, 0.0)).collect();
        State { ncomp: 3, n: self.grid.n, data: [rho, m, z].concat() }
    }

    fn convection(&self, s: &State) -> Result<State> {
        // Flux of (rho, m, z) is (m, z, m); characteristic speeds are 0, ±1.
        let fluxes = [s.comp(1), s.comp(2), s.comp(1)];
        let g = self.weno.ghosts();
        let mut out = State::zeros(3, self.grid.n);
        for k in 0..3 {
            let (fp, fm) = split_flux(fluxes[k], 1.0, s.comp(k))?;
            let left = weno_reconstruct(&Field::periodic(&fp, g)?, Side::LeftOfInterface, self.weno)?;
            let right = weno_reconstruct(&Field::periodic(&fm, g)?, Side::RightOfInterface, self.weno)?;
            let fhat: Vec<f64> = left.iter().zip(&right).map(|(a, b)| a + b).collect();
            out.set_comp(k, &conservative_divergence(&fhat, self.grid.dx));
        }
        Ok(out)
    }

    fn collision(&self, s: &State) -> State {
        let mut out = State::zeros(3, self.grid.n);
        let (rho, m, z) = (s.comp(0), s.comp(1), s.comp(2));
        let src: Vec<f64> = (0..self.grid.n)
            .map(|j| (rho[j] * rho[j] + m[j] * m[j] - 2.0 * rho[j] * z[j]) / self.eps)
            .collect();
        out.set_comp(2, &src);
        out
    }
}

impl SplitSystem for Broadwell {
    fn names(&self) -> &[&'static str] {
        &["rho", "m", "z"]
    }
    fn len(&self) -> usize {
        self.grid.n
    }
    fn epsilon(&self) -> f64 {
        self.eps
    }
    fn mode(&self) -> Mode {
        Mode::ImexE
    }

    fn explicit_rhs(&self, s: &State, _t: f64) -> Result<State> {
        self.check_admissible(s)?;
        self.convection(s)
    }

    fn implicit_rhs(&self, s: &State, _t: f64) -> Result<State> {
        Ok(self.collision(s))
    }

    fn stage_solve(&self, rhs: &State, ctx: &StageSolve) -> Result<State> {
        self.check_admissible(rhs)?;
        let k = ctx.h_aii;
        let mut out = rhs.clone();
        let z: Vec<f64> = (0..self.grid.n)
            .map(|j| {
                let (rho, m, rz) = (rhs.comp(0)[j], rhs.comp(1)[j], rhs.comp(2)[j]);
                (self.eps * rz + k * (rho * rho + m * m)) / (self.eps + 2.0 * k * rho)
            })
            .collect();
        out.set_comp(2, &z);
        Ok(out)
    }

    fn unsplit_rhs(&self, s: &State, _t: f64) -> Result<State> {
        Ok(self.convection(s)?.sum(&self.collision(s)))
    }

    fn constraint_residual(&self, s: &State) -> Option<f64> {
        let (rho, m, z) = (s.comp(0), s.comp(1), s.comp(2));
        Some((0..self.grid.n).fold(0.0, |acc, j| acc.max((z[j] - broadwell_equilibrium(rho[j], m[j])).abs())))
    }

    fn dx(&self) -> Option<f64> {
        Some(self.grid.dx)
    }

    fn max_speed(&self, _s: &State) -> f64 {
        1.0
    }

    fn check_admissible(&self, s: &State) -> Result<()> {
        match s.comp(0).iter().position(|r| !(*r > 0.0)) {
            Some(j) => Err(Error::State(format!("nonpositive density {} at cell {j}", s.comp(0)[j]))),
            None => Ok(()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn equilibrium_examples() {
        assert_eq!(broadwell_equilibrium(1.0, 0.0), 0.5);
        assert_eq!(broadwell_equilibrium(2.0, 2.0), 2.0);
    }

    #[test]
    fn collision_vanishes_at_equilibrium() {
        let grid = Grid1D::periodic(0.0, std::f64::consts::TAU, 16).unwrap();
        let sys = broadwell_system(grid, 1e-3).unwrap();
        let s = sys.smooth_initial();
        assert!(sys.implicit_rhs(&s, 0.0).unwrap().data.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn nonpositive_density_is_rejected() {
        let grid = Grid1D::periodic(0.0, 1.0, 8).unwrap();
        let sys = broadwell_system(grid, 1e-3).unwrap();
        let mut s = State::zeros(3, 8);
        s.comp_mut(0).fill(1.0);
        s.comp_mut(0)[3] = -0.1;
        assert!(matches!(sys.explicit_rhs(&s, 0.0), Err(Error::State(_))));
    }
}
