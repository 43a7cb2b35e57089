use super::{check_eps, PenalizationConfig};
use crate::error::{Error, Result};
use crate::r13_boundary::{
    apply_ghost, apply_ghost_vw, apply_u_ghost, u_ghost_rule, BoundarySet, GhostRule, R13Fields, WallData, WallSide,
};
use crate::spatial::{
    solve_banded, solve_stride_two_cyclic, BandedSystem, BoundaryKind, Field, Grid1D, NodeKind,
    TridiagonalSystem,
};
use crate::state::{Mode, SplitSystem, StageSolve, State};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct R13Params {
    pub g: f64,
    pub alpha_bc: f64,
    pub beta_bc: f64,
    pub eps: f64,
}

impl R13Params {
    pub fn channel(eps: f64) -> Self {
        Self { g: 1.0, alpha_bc: 0.7, beta_bc: 0.3, eps }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum R13Boundary {
    Periodic,
    Walls { set: BoundarySet, rule: GhostRule },
}

/// First-derivative operator for the transport terms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum R13Derivative {
    /// `(f_{i+1} - f_{i-1}) / (2 dx)`
    #[default]
    Central,
    /// Differences of interface averages of a minmod-limited linear reconstruction.
    Minmod,
}

/// Treatment of the `-w~_x / 2` term of the `v` equation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MomentCoupling {
    /// Explicit, as in the classical split. Needs `eps^2 <~ dx^2` or
    /// `dt <~ dx^2` to stay stable once `w~` relaxes implicitly.
    #[default]
    Explicit,
    /// Implicit, solved jointly with `v`; stable at `dt ~ dx` for all `eps`
    /// in the diffusive range.
    Implicit,
}

/// One-dimensional R13 channel model in diffusive scaling, state `(u~, v, w~)`
/// on cell centers of `[-1, 1]`:
/// explicit `(-v_x - mu u~_xx/2, -w~_x/2, 0)`,
/// implicit `(mu u~_xx/2 + g, -u~_x/(2 eps^2) - v/eps^2, -v_x/eps^2 - w~/eps^2)`.
#[derive(Debug, Clone, PartialEq)]
pub struct R13 {
    pub grid: Grid1D,
    pub params: R13Params,
    pub boundary: R13Boundary,
    pub derivative: R13Derivative,
    pub penalization: PenalizationConfig,
    pub mu: f64,
    pub coupling: MomentCoupling,
    /// Upper bound on the lagged wall sweeps of a stage solve.
    pub max_sweeps: usize,
}

const GHOSTS: usize = 2;

pub fn r13_system(n: usize, params: R13Params, boundary: R13Boundary, penalization: PenalizationConfig) -> Result<R13> {
    check_eps(params.eps)?;
    if !(params.alpha_bc > params.beta_bc && params.beta_bc > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "wall coefficients need alpha > beta > 0, got {} and {}",
            params.alpha_bc, params.beta_bc
        )));
    }
    if let R13Boundary::Walls { rule: GhostRule::Lagrange(d), .. } = boundary {
        if d == 0 || d > 2 {
            return Err(Error::Config(format!(
                "implicit wall rows support Lagrange degree 1 or 2, got {d}"
            )));
        }
    }
    let kind = match boundary {
        R13Boundary::Periodic => BoundaryKind::Periodic,
        R13Boundary::Walls { .. } => BoundaryKind::GhostCells(GHOSTS),
    };
    let grid = Grid1D::new(-1.0, 1.0, n, kind, NodeKind::CellCenters)?;
    let mu = penalization.mu(params.eps, grid.dx);
    Ok(R13 {
        grid,
        params,
        boundary,
        derivative: R13Derivative::Central,
        penalization,
        mu,
        coupling: MomentCoupling::Explicit,
        max_sweeps: 50,
    })
}

/// Scaled steady state `u~ = eps g (1 + eps beta)/alpha + g (1 - x^2)`,
/// `v = g x`, `w~ = -g` sampled at the grid points.
pub fn r13_steady_state(grid: &Grid1D, p: &R13Params) -> State {
    let x = grid.points();
    let u = x.iter().map(|x| r13_steady_point(*x, p)[0]).collect::<Vec<_>>();
    let v = x.iter().map(|x| p.g * x).collect::<Vec<_>>();
    let w = vec![-p.g; x.len()];
    State { ncomp: 3, n: x.len(), data: [u, v, w].concat() }
}

/// Unscaled steady profile `(u_s, v_s, w_s)` then scaled as `(eps u, v, w/eps)`.
pub fn r13_steady_point(x: f64, p: &R13Params) -> [f64; 3] {
    let e = p.eps;
    let us = p.g * ((1.0 + e * p.beta_bc) / p.alpha_bc + (1.0 - x * x) / e);
    let ws = -e * p.g;
    [e * us, p.g * x, ws / e]
}

fn minmod(a: f64, b: f64) -> f64 {
    if a * b <= 0.0 {
        0.0
    } else if a.abs() < b.abs() {
        a
    } else {
        b
    }
}

impl R13 {
    pub fn with_coupling(mut self, coupling: MomentCoupling) -> Self {
        self.coupling = coupling;
        self
    }

    pub fn with_derivative(mut self, derivative: R13Derivative) -> Self {
        self.derivative = derivative;
        self
    }

    fn pen(&self) -> f64 {
        if self.penalization.enabled {
            self.mu
        } else {
            0.0
        }
    }

    pub fn wall(&self, side: WallSide) -> WallData {
        WallData {
            g: self.params.g,
            alpha_bc: self.params.alpha_bc,
            beta_bc: self.params.beta_bc,
            eps: self.params.eps,
            dx: self.grid.dx,
            side,
        }
    }

    /// Interior values wrapped with ghosts filled by the boundary treatment.
    pub fn fields(&self, s: &State) -> Result<R13Fields> {
        let mut f = R13Fields::from_interior(s.comp(0), s.comp(1), s.comp(2), GHOSTS)?;
        match self.boundary {
            R13Boundary::Periodic => {
                f.u.fill_periodic();
                f.v.fill_periodic();
                f.w.fill_periodic();
            }
            R13Boundary::Walls { set, rule } => {
                apply_ghost(&mut f, &self.wall(WallSide::Left), set, rule)?;
                apply_ghost(&mut f, &self.wall(WallSide::Right), set, rule)?;
            }
        }
        Ok(f)
    }

    pub fn d(&self, f: &Field) -> Vec<f64> {
        let n = self.grid.n as isize;
        let dx = self.grid.dx;
        match self.derivative {
            R13Derivative::Central => (0..n).map(|i| (f.at(i + 1) - f.at(i - 1)) / (2.0 * dx)).collect(),
            R13Derivative::Minmod => {
                let slope = |i: isize| minmod(f.at(i) - f.at(i - 1), f.at(i + 1) - f.at(i));
                // Interface k sits between cells k - 1 and k.
                let face = |k: isize| {
                    let left = f.at(k - 1) + 0.5 * slope(k - 1);
                    let right = f.at(k) - 0.5 * slope(k);
                    0.5 * (left + right)
                };
                (0..n).map(|i| (face(i + 1) - face(i)) / dx).collect()
            }
        }
    }

    /// `D(D f)` with central `D`: `(f_{j+2} - 2 f_j + f_{j-2}) / (4 dx^2)`.
    /// Composing the transport operator makes the added and subtracted terms
    /// cancel exactly against `-D v` once `v = -D u~ / 2`.
    fn d2(&self, f: &Field) -> Result<Vec<f64>> {
        let h2 = 4.0 * self.grid.dx * self.grid.dx;
        Ok((0..self.grid.n as isize).map(|i| (f.at(i + 2) - 2.0 * f.at(i) + f.at(i - 2)) / h2).collect())
    }

    /// Pointwise residuals of `v = -D u~ / 2` and `w~ = -D v`.
    fn constraint_parts(&self, s: &State) -> Result<(Vec<f64>, Vec<f64>)> {
        let f = self.fields(s)?;
        let du = self.central(&f.u);
        let dv = self.central(&f.v);
        let g1 = s.comp(1).iter().zip(&du).map(|(v, d)| v + 0.5 * d).collect();
        let g2 = s.comp(2).iter().zip(&dv).map(|(w, d)| w + d).collect();
        Ok((g1, g2))
    }

    /// Affine maps `[constant, c1, c2, c3]` of ghost layers 0 and -1 of one
    /// component in terms of the first three interior cells (inward order),
    /// found by probing `fill` with unit data.
    fn ghost_maps(
        &self,
        side: WallSide,
        fields: &R13Fields,
        comp: usize,
        fill: &dyn Fn(&mut R13Fields) -> Result<()>,
    ) -> Result<[[f64; 4]; 2]> {
        let n = self.grid.n as isize;
        let at = |k: isize| match side {
            WallSide::Left => k - 1,
            WallSide::Right => n - k,
        };
        let mut probe = fields.clone();
        let mut ghosts_for = |unit: Option<isize>| -> Result<[f64; 2]> {
            let f = component_mut(&mut probe, comp);
            f.values.iter_mut().for_each(|x| *x = 0.0);
            if let Some(k) = unit {
                f.set(at(k), 1.0);
            }
            fill(&mut probe)?;
            let f = component_mut(&mut probe, comp);
            Ok([f.at(at(0)), f.at(at(-1))])
        };
        let base = ghosts_for(None)?;
        let mut maps = [[base[0], 0.0, 0.0, 0.0], [base[1], 0.0, 0.0, 0.0]];
        for k in 1..=3 {
            let g = ghosts_for(Some(k))?;
            maps[0][k as usize] = g[0] - base[0];
            maps[1][k as usize] = g[1] - base[1];
        }
        if maps[0][3] != 0.0 || maps[1][3] != 0.0 {
            return Err(Error::Config("wall rule too wide for the implicit stage".into()));
        }
        Ok(maps)
    }

    fn u_ghost_maps(&self, fields: &R13Fields, side: WallSide) -> Result<[[f64; 4]; 2]> {
        let R13Boundary::Walls { set, rule } = self.boundary else {
            return Err(Error::InvalidArgument("periodic grid has no walls".into()));
        };
        let ghost = u_ghost_rule(fields, &self.wall(side), set, rule)?;
        self.ghost_maps(side, fields, 0, &|f| apply_u_ghost(f, side, &ghost, rule))
    }

    fn vw_ghost_maps(&self, fields: &R13Fields, side: WallSide, comp: usize) -> Result<[[f64; 4]; 2]> {
        let R13Boundary::Walls { set, rule } = self.boundary else {
            return Err(Error::InvalidArgument("periodic grid has no walls".into()));
        };
        let wall = self.wall(side);
        self.ghost_maps(side, fields, comp, &|f| apply_ghost_vw(f, &wall, set, rule))
    }

    /// Interior row of the cell `k` cells in from `side` (1-based).
    fn row(&self, side: WallSide, k: usize) -> usize {
        match side {
            WallSide::Left => k - 1,
            WallSide::Right => self.grid.n - k,
        }
    }

    /// Solves `u - c (u_{j+2} - 2 u_j + u_{j-2}) = rhs` with the wall ghost
    /// maps embedded.
    fn u_solve(&self, rhs: &[f64], c: f64, fields: &R13Fields) -> Result<Vec<f64>> {
        let n = self.grid.n;
        if let R13Boundary::Periodic = self.boundary {
            return constant_stride_two(rhs, c, 1.0 + 2.0 * c);
        }
        let mut sys = BandedSystem::new(n, 2, 2);
        sys.rhs = rhs.to_vec();
        for i in 0..n {
            sys.add(i, i, 1.0 + 2.0 * c)?;
            if i + 2 < n {
                sys.add(i, i + 2, -c)?;
                sys.add(i + 2, i, -c)?;
            }
        }
        for side in [WallSide::Left, WallSide::Right] {
            let maps = self.u_ghost_maps(fields, side)?;
            // Only the two cells next to the wall reach outside: the first sees
            // ghost layer -1, the second ghost layer 0.
            for (k, map) in [(1, maps[1]), (2, maps[0])] {
                let row = self.row(side, k);
                sys.rhs[row] += c * map[0];
                for (m, coef) in map[1..3].iter().enumerate() {
                    sys.add(row, self.row(side, m + 1), -c * coef)?;
                }
            }
        }
        solve_banded(&sys)
    }

    /// Joint solve of
    /// `(e2 + k) v + k e2 D w / 2 = e2 r_v - k D u / 2` and
    /// `(e2 + k) w + k D v = e2 r_w`
    /// for the implicit moment coupling; `fields.u` must carry its ghosts.
    fn vw_solve(&self, rv: &[f64], rw: &[f64], k: f64, fields: &R13Fields) -> Result<(Vec<f64>, Vec<f64>)> {
        let n = self.grid.n;
        let e2 = self.params.eps * self.params.eps;
        let dx = self.grid.dx;
        let du = self.central(&fields.u);
        let bv: Vec<f64> = (0..n).map(|i| e2 * rv[i] - 0.5 * k * du[i]).collect();
        let bw: Vec<f64> = rw.iter().map(|r| e2 * r).collect();
        let a = e2 + k;
        if let R13Boundary::Periodic = self.boundary {
            // Eliminate w: a v - (k^2 e2 / 2a) D D v = bv - (k e2 / 2a) D bw.
            let dbw = periodic_d(&bw, dx);
            let rhs: Vec<f64> = (0..n).map(|i| (bv[i] - k * e2 / (2.0 * a) * dbw[i]) / a).collect();
            let c = k * k * e2 / (2.0 * a * a * 4.0 * dx * dx);
            let v = constant_stride_two(&rhs, c, 1.0 + 2.0 * c)?;
            let dv = periodic_d(&v, dx);
            let w = (0..n).map(|i| (bw[i] - k * dv[i]) / a).collect();
            return Ok((v, w));
        }
        // Unknowns interleaved as (v_0, w_0, v_1, w_1, ...).
        let (iv, iw) = (|j: usize| 2 * j, |j: usize| 2 * j + 1);
        let mut sys = BandedSystem::new(2 * n, 3, 3);
        let cv = k * e2 / (4.0 * dx);
        let cw = k / (2.0 * dx);
        for j in 0..n {
            sys.rhs[iv(j)] = bv[j];
            sys.rhs[iw(j)] = bw[j];
            sys.add(iv(j), iv(j), a)?;
            sys.add(iw(j), iw(j), a)?;
            if j + 1 < n {
                sys.add(iv(j), iw(j + 1), cv)?;
                sys.add(iw(j), iv(j + 1), cw)?;
            }
            if j >= 1 {
                sys.add(iv(j), iw(j - 1), -cv)?;
                sys.add(iw(j), iv(j - 1), -cw)?;
            }
        }
        for side in [WallSide::Left, WallSide::Right] {
            // The neighbor across the wall has sign -1 on the left and +1 on the right.
            let s = side.normal();
            let row = self.row(side, 1);
            let wmap = self.vw_ghost_maps(fields, side, 2)?[0];
            let vmap = self.vw_ghost_maps(fields, side, 1)?[0];
            sys.rhs[iv(row)] -= s * cv * wmap[0];
            sys.rhs[iw(row)] -= s * cw * vmap[0];
            for m in 0..2 {
                let col = self.row(side, m + 1);
                sys.add(iv(row), iw(col), s * cv * wmap[m + 1])?;
                sys.add(iw(row), iv(col), s * cw * vmap[m + 1])?;
            }
        }
        let x = solve_banded(&sys)?;
        Ok(((0..n).map(|j| x[iv(j)]).collect(), (0..n).map(|j| x[iw(j)]).collect()))
    }

    fn central(&self, f: &Field) -> Vec<f64> {
        let dx = self.grid.dx;
        (0..self.grid.n as isize).map(|i| (f.at(i + 1) - f.at(i - 1)) / (2.0 * dx)).collect()
    }

    fn fill_u(&self, fields: &mut R13Fields) -> Result<()> {
        match self.boundary {
            R13Boundary::Periodic => fields.u.fill_periodic(),
            R13Boundary::Walls { set, rule } => {
                for side in [WallSide::Left, WallSide::Right] {
                    let ghost = u_ghost_rule(fields, &self.wall(side), set, rule)?;
                    apply_u_ghost(fields, side, &ghost, rule)?;
                }
            }
        }
        Ok(())
    }

    fn fill_vw(&self, fields: &mut R13Fields) -> Result<()> {
        match self.boundary {
            R13Boundary::Periodic => {
                fields.v.fill_periodic();
                fields.w.fill_periodic();
            }
            R13Boundary::Walls { set, rule } => {
                for side in [WallSide::Left, WallSide::Right] {
                    apply_ghost_vw(fields, &self.wall(side), set, rule)?;
                }
            }
        }
        Ok(())
    }

    fn wrap(&self, v: Vec<f64>) -> Result<Field> {
        Field::from_interior(&v, GHOSTS)
    }
}

impl SplitSystem for R13 {
    fn names(&self) -> &[&'static str] {
        &["u", "v", "w"]
    }
    fn len(&self) -> usize {
        self.grid.n
    }
    fn epsilon(&self) -> f64 {
        self.params.eps
    }
    fn mode(&self) -> Mode {
        Mode::ImexI
    }

    fn explicit_rhs(&self, s: &State, _t: f64) -> Result<State> {
        let f = self.fields(s)?;
        let n = self.grid.n;
        let dv = self.d(&f.v);
        let pen = self.pen();
        let d2u = if pen != 0.0 { self.d2(&f.u)? } else { vec![0.0; n] };
        let fu = dv.iter().zip(&d2u).map(|(dv, d2)| -dv - 0.5 * pen * d2).collect();
        let fv = match self.coupling {
            MomentCoupling::Explicit => self.d(&f.w).iter().map(|d| -0.5 * d).collect(),
            MomentCoupling::Implicit => vec![0.0; n],
        };
        State::from_components(&[fu, fv, vec![0.0; n]])
    }

    fn implicit_rhs(&self, s: &State, _t: f64) -> Result<State> {
        let f = self.fields(s)?;
        let n = self.grid.n;
        let e2 = self.params.eps * self.params.eps;
        let pen = self.pen();
        let d2u = if pen != 0.0 { self.d2(&f.u)? } else { vec![0.0; n] };
        let (du, dv) = (self.central(&f.u), self.central(&f.v));
        let dw = match self.coupling {
            MomentCoupling::Explicit => vec![0.0; n],
            MomentCoupling::Implicit => self.central(&f.w),
        };
        let gu = d2u.iter().map(|d| 0.5 * pen * d + self.params.g).collect();
        let gv = (0..n).map(|i| (-0.5 * du[i] - s.comp(1)[i]) / e2 - 0.5 * dw[i]).collect();
        let gw = (0..n).map(|i| (-dv[i] - s.comp(2)[i]) / e2).collect();
        State::from_components(&[gu, gv, gw])
    }

    fn stage_solve(&self, rhs: &State, ctx: &StageSolve) -> Result<State> {
        let n = self.grid.n;
        let k = ctx.h_aii;
        let e2 = self.params.eps * self.params.eps;
        let pen = self.pen();
        let ru: Vec<f64> = rhs.comp(0).iter().map(|r| r + k * self.params.g).collect();
        let (rv, rw) = (rhs.comp(1), rhs.comp(2));
        // Walls couple the u~ ghost to the wall values of v and w~, which are
        // lagged and refreshed until they settle.
        let mut fields = R13Fields::from_interior(rhs.comp(0), rv, rw, GHOSTS)?;
        let sweeps = match self.boundary {
            R13Boundary::Periodic => 1,
            R13Boundary::Walls { .. } => self.max_sweeps.max(1),
        };
        let mut out = rhs.clone();
        for sweep in 0..sweeps {
            self.fill_vw(&mut fields)?;
            let c = k * pen / (8.0 * self.grid.dx * self.grid.dx);
            let u = if pen != 0.0 { self.u_solve(&ru, c, &fields)? } else { ru.clone() };
            fields.u = self.wrap(u.clone())?;
            self.fill_u(&mut fields)?;
            let (v, w) = match self.coupling {
                MomentCoupling::Implicit => self.vw_solve(rv, rw, k, &fields)?,
                MomentCoupling::Explicit => {
                    let du = self.central(&fields.u);
                    let v: Vec<f64> = (0..n).map(|i| (e2 * rv[i] - 0.5 * k * du[i]) / (e2 + k)).collect();
                    fields.v = self.wrap(v.clone())?;
                    self.fill_vw(&mut fields)?;
                    let dv = self.central(&fields.v);
                    let w = (0..n).map(|i| (e2 * rw[i] - k * dv[i]) / (e2 + k)).collect();
                    (v, w)
                }
            };
            let next = State::from_components(&[u, v.clone(), w.clone()])?;
            let change = if sweep == 0 { f64::INFINITY } else { next.max_abs_diff(&out) };
            out = next;
            fields.v = self.wrap(v)?;
            fields.w = self.wrap(w)?;
            if change <= 1e-14 * (1.0 + out.max_abs()) {
                break;
            }
        }
        Ok(out)
    }


    fn unsplit_rhs(&self, s: &State, _t: f64) -> Result<State> {
        let f = self.fields(s)?;
        let n = self.grid.n;
        let e2 = self.params.eps * self.params.eps;
        let (du, dv) = (self.central(&f.u), self.central(&f.v));
        let dv_transport = self.d(&f.v);
        let dw = match self.coupling {
            MomentCoupling::Explicit => self.d(&f.w),
            MomentCoupling::Implicit => self.central(&f.w),
        };
        let fu = (0..n).map(|i| -dv_transport[i] + self.params.g).collect();
        let fv = (0..n).map(|i| -0.5 * (du[i] / e2 + dw[i]) - s.comp(1)[i] / e2).collect();
        let fw = (0..n).map(|i| (-dv[i] - s.comp(2)[i]) / e2).collect();
        State::from_components(&[fu, fv, fw])
    }

    fn constraint_residual(&self, s: &State) -> Option<f64> {
        let (g1, g2) = self.constraint_parts(s).ok()?;
        Some(g1.iter().chain(&g2).fold(0.0, |m, v| m.max(v.abs())))
    }

    fn dx(&self) -> Option<f64> {
        Some(self.grid.dx)
    }

    fn max_speed(&self, _s: &State) -> f64 {
        1.0
    }
}

fn component_mut(f: &mut R13Fields, comp: usize) -> &mut Field {
    match comp {
        0 => &mut f.u,
        1 => &mut f.v,
        _ => &mut f.w,
    }
}

fn periodic_d(f: &[f64], dx: f64) -> Vec<f64> {
    let n = f.len();
    (0..n).map(|i| (f[(i + 1) % n] - f[(i + n - 1) % n]) / (2.0 * dx)).collect()
}

/// Periodic version: the stencil couples `j` only to `j +- 2`, so each orbit
/// of `j -> j + 2 (mod n)` is an independent cyclic tridiagonal system.
fn constant_stride_two(rhs: &[f64], c: f64, diag: f64) -> Result<Vec<f64>> {
    let n = rhs.len();
    solve_stride_two_cyclic(&TridiagonalSystem {
        lower: vec![-c; n],
        diag: vec![diag; n],
        upper: vec![-c; n],
        rhs: rhs.to_vec(),
        cyclic: true,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::state::NewtonControl;

    fn walls() -> R13Boundary {
        R13Boundary::Walls { set: BoundarySet::Slip, rule: GhostRule::SecondOrder }
    }

    #[test]
    fn steady_state_samples() {
        let p = R13Params::channel(1e-4);
        let u0 = r13_steady_point(0.0, &p)[0];
        assert!((u0 - 1.000142861).abs() < 1e-9);
        assert_eq!(r13_steady_point(0.5, &p)[1], 0.5);
        for e in [1e-6, 0.3] {
            assert!((r13_steady_point(0.2, &R13Params::channel(e))[2] + 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn steady_state_is_a_discrete_fixed_point() {
        for set in [BoundarySet::Slip, BoundarySet::Flux] {
            let p = R13Params::channel(1e-4);
            let sys = r13_system(50, p, R13Boundary::Walls { set, rule: GhostRule::SecondOrder }, PenalizationConfig::default()).unwrap();
            let s = r13_steady_state(&sys.grid, &p);
            let full = sys.explicit_rhs(&s, 0.0).unwrap().sum(&sys.implicit_rhs(&s, 0.0).unwrap());
            // Entries of the stiff rows are scaled by 1/eps^2.
            assert!(full.max_abs() * 1e-8 < 1e-9, "{set:?}: {}", full.max_abs());
        }
    }

    #[test]
    fn stage_solve_satisfies_stage_equation() {
        let p = R13Params::channel(0.05);
        let flux = R13Boundary::Walls { set: BoundarySet::Flux, rule: GhostRule::Lagrange(2) };
        for (boundary, coupling) in [R13Boundary::Periodic, walls(), flux]
            .into_iter()
            .flat_map(|b| [(b, MomentCoupling::Explicit), (b, MomentCoupling::Implicit)])
        {
            let sys = r13_system(20, p, boundary, PenalizationConfig::default()).unwrap().with_coupling(coupling);
            let x = sys.grid.points();
            let r = State::from_components(&[
                x.iter().map(|x| 0.3 + x.cos()).collect(),
                x.iter().map(|x| 0.2 * x).collect(),
                x.iter().map(|x| -1.0 + 0.1 * x * x).collect(),
            ])
            .unwrap();
            let ctx = StageSolve { t: 0.0, h_aii: 0.01, newton: NewtonControl::default() };
            let y = sys.stage_solve(&r, &ctx).unwrap();
            let mut back = r.clone();
            back.axpy(0.01, &sys.implicit_rhs(&y, 0.0).unwrap());
            assert!(back.max_abs_diff(&y) < 1e-10, "{boundary:?} {coupling:?}: {}", back.max_abs_diff(&y));
        }
    }

    #[test]
    fn invalid_coefficients() {
        let p = R13Params { g: 1.0, alpha_bc: 0.3, beta_bc: 0.7, eps: 0.1 };
        assert!(r13_system(10, p, walls(), PenalizationConfig::default()).is_err());
    }
}
