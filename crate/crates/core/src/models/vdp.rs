use super::check_eps;
use crate::error::{Error, Result};
use crate::state::{Mode, SplitSystem, StageSolve, State};

/// `y' = z, eps z' = (1 - y^2) z - y` with the relaxation term implicit.
#[derive(Debug, Clone, PartialEq)]
pub struct VanDerPol {
    pub eps: f64,
}

pub fn vdp_system(eps: f64) -> Result<VanDerPol> {
    check_eps(eps)?;
    Ok(VanDerPol { eps })
}

/// Leading-order slow manifold `z = y / (1 - y^2)`.
pub fn vdp_manifold(y: f64) -> f64 {
    y / (1.0 - y * y)
}

impl VanDerPol {
    /// `y(0) = 2` on the leading-order manifold.
    pub fn default_initial() -> State {
        State::scalar(&[2.0, vdp_manifold(2.0)])
    }

    fn source(&self, y: f64, z: f64) -> f64 {
        ((1.0 - y * y) * z - y) / self.eps
    }
}

impl SplitSystem for VanDerPol {
    fn names(&self) -> &[&'static str] {
        &["y", "z"]
    }
    fn len(&self) -> usize {
        1
    }
    fn epsilon(&self) -> f64 {
        self.eps
    }
    fn mode(&self) -> Mode {
        Mode::ImexE
    }

    fn explicit_rhs(&self, s: &State, _t: f64) -> Result<State> {
        Ok(State::scalar(&[s.data[1], 0.0]))
    }

    fn implicit_rhs(&self, s: &State, _t: f64) -> Result<State> {
        Ok(State::scalar(&[0.0, self.source(s.data[0], s.data[1])]))
    }

    fn stage_solve(&self, rhs: &State, ctx: &StageSolve) -> Result<State> {
        let (y, rz) = (rhs.data[0], rhs.data[1]);
        if ctx.h_aii == 0.0 {
            return Ok(rhs.clone());
        }
        // eps z = eps rz + k ((1 - y^2) z - y)
        let k = ctx.h_aii;
        let denom = self.eps - k * (1.0 - y * y);
        if denom == 0.0 {
            return Err(Error::Singular { row: 1 });
        }
        Ok(State::scalar(&[y, (self.eps * rz - k * y) / denom]))
    }

    fn unsplit_rhs(&self, s: &State, _t: f64) -> Result<State> {
        Ok(State::scalar(&[s.data[1], self.source(s.data[0], s.data[1])]))
    }

    fn constraint_residual(&self, s: &State) -> Option<f64> {
        let (y, z) = (s.data[0], s.data[1]);
        Some(((1.0 - y * y) * z - y).abs())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::state::NewtonControl;

    #[test]
    fn manifold_at_two() {
        assert!((vdp_manifold(2.0) + 2.0 / 3.0).abs() < 1e-15);
        let s = VanDerPol::default_initial();
        assert!(vdp_system(1e-6).unwrap().constraint_residual(&s).unwrap() < 1e-15);
    }

    #[test]
    fn implicit_rhs_arithmetic() {
        let sys = vdp_system(1.0).unwrap();
        let r = sys.implicit_rhs(&State::scalar(&[0.0, 1.0]), 0.0).unwrap();
        assert_eq!(r.data, vec![0.0, 1.0]);
    }

    #[test]
    fn identity_stage() {
        let sys = vdp_system(1e-3).unwrap();
        let rhs = State::scalar(&[0.3, -0.7]);
        let ctx = StageSolve { t: 0.0, h_aii: 0.0, newton: NewtonControl::default() };
        assert_eq!(sys.stage_solve(&rhs, &ctx).unwrap(), rhs);
    }

    #[test]
    fn stage_solve_satisfies_stage_equation() {
        let sys = vdp_system(1e-2).unwrap();
        let rhs = State::scalar(&[1.7, 0.4]);
        let ctx = StageSolve { t: 0.0, h_aii: 0.05, newton: NewtonControl::default() };
        let y = sys.stage_solve(&rhs, &ctx).unwrap();
        let mut back = rhs.clone();
        back.axpy(0.05, &sys.implicit_rhs(&y, 0.0).unwrap());
        assert!(back.max_abs_diff(&y) < 1e-12);
    }
}
