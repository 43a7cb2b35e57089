//! Wall ghost cells for the R13 channel problem.
//!
//! Indices follow [`Field`]: interior cells `0..n`, left ghosts `-1, -2`,
//! right ghosts `n, n + 1`. Internally each wall is handled in a local,
//! inward-pointing numbering where `1` is the cell next to the wall, `0` the
//! first ghost and `-1` the second; `s = -1` at the left wall and `+1` at
//! the right one is the sign of the outward normal.

use crate::error::{Error, Result};
use crate::spatial::Field;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WallSide {
    Left,
    Right,
}

impl WallSide {
    pub(crate) fn normal(self) -> f64 {
        match self {
            WallSide::Left => -1.0,
            WallSide::Right => 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WallData {
    pub g: f64,
    pub alpha_bc: f64,
    pub beta_bc: f64,
    pub eps: f64,
    pub dx: f64,
    pub side: WallSide,
}

impl WallData {
    pub fn new(g: f64, alpha_bc: f64, beta_bc: f64, eps: f64, dx: f64, side: WallSide) -> Result<Self> {
        if !(alpha_bc > beta_bc && beta_bc > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "wall coefficients need alpha > beta > 0, got alpha = {alpha_bc}, beta = {beta_bc}"
            )));
        }
        Ok(Self { g, alpha_bc, beta_bc, eps, dx, side })
    }

    pub fn with_side(self, side: WallSide) -> Self {
        Self { side, ..self }
    }

    /// Wall value of `u~` from the slip relation, given wall `v` and `w~`.
    pub fn slip_u(&self, v_wall: f64, w_wall: f64) -> f64 {
        let s = self.side.normal();
        s * self.eps * (v_wall - s * self.eps * self.beta_bc * w_wall) / self.alpha_bc
    }
}

/// Which wall conditions close the system: `w~ = -g`, `v_x = g` and either
/// the slip relation for `u~` or the stationary flux relation
/// `u~_x + eps^2 w~_x = -2 v`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BoundarySet {
    #[default]
    Slip,
    Flux,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum GhostRule {
    /// Quadratic extrapolation through the wall value.
    #[default]
    SecondOrder,
    /// Constrained Lagrange interpolant of the given degree.
    Lagrange(usize),
}

/// `u~, v, w~` with their ghost layers.
#[derive(Debug, Clone, PartialEq)]
pub struct R13Fields {
    pub u: Field,
    pub v: Field,
    pub w: Field,
}

impl R13Fields {
    pub fn from_interior(u: &[f64], v: &[f64], w: &[f64], ghost: usize) -> Result<Self> {
        Ok(Self {
            u: Field::from_interior(u, ghost)?,
            v: Field::from_interior(v, ghost)?,
            w: Field::from_interior(w, ghost)?,
        })
    }

    fn check(&self) -> Result<()> {
        let n = self.u.n();
        if n < 3 {
            return Err(Error::InvalidArgument(format!("wall treatment needs at least 3 interior cells, got {n}")));
        }
        if self.u.ghost < 1 || self.v.ghost < 1 || self.w.ghost < 1 {
            return Err(Error::InsufficientGhosts { needed: 1, have: 0 });
        }
        Ok(())
    }
}

/// Maps local wall indices to field indices.
#[derive(Debug, Clone, Copy)]
struct Local {
    n: isize,
    side: WallSide,
}

impl Local {
    fn idx(&self, k: isize) -> isize {
        match self.side {
            WallSide::Left => k - 1,
            WallSide::Right => self.n - k,
        }
    }
    fn get(&self, f: &Field, k: isize) -> f64 {
        f.at(self.idx(k))
    }
    fn set(&self, f: &mut Field, k: isize, v: f64) {
        f.set(self.idx(k), v);
    }
}

/// Quadratic interpolant through local cells 0, 1, 2 evaluated at the wall.
fn wall_value(l: &Local, f: &Field) -> f64 {
    0.375 * l.get(f, 0) + 0.75 * l.get(f, 1) - 0.125 * l.get(f, 2)
}

/// Ghost `0` as `constant + sum_i coeffs[i-1] * U_i` over interior cells `1..`.
#[derive(Debug, Clone, PartialEq)]
pub struct AffineGhost {
    pub constant: f64,
    pub coeffs: Vec<f64>,
}

impl AffineGhost {
    fn eval(&self, l: &Local, f: &Field) -> f64 {
        self.coeffs
            .iter()
            .enumerate()
            .fold(self.constant, |acc, (i, c)| acc + c * l.get(f, i as isize + 1))
    }
}

fn lagrange_basis(n: usize, i: usize, x: f64) -> f64 {
    (0..=n)
        .filter(|&k| k != i)
        .fold(1.0, |acc, k| acc * (x - k as f64) / (i as f64 - k as f64))
}

fn lagrange_basis_derivative(n: usize, i: usize, x: f64) -> f64 {
    let mut total = 0.0;
    for skip in (0..=n).filter(|&k| k != i) {
        let mut term = 1.0 / (i as f64 - skip as f64);
        for k in (0..=n).filter(|&k| k != i && k != skip) {
            term *= (x - k as f64) / (i as f64 - k as f64);
        }
        total += term;
    }
    total
}

/// Local coordinate of the wall (in cells, inward).
const WALL: f64 = 0.5;

/// Ghost-0 rules for one wall, with the `u~` rule depending on the current
/// `v` and `w~`.
struct WallRules {
    local: Local,
    wall: WallData,
    set: BoundarySet,
    rule: GhostRule,
}

impl WallRules {
    fn degree(&self) -> usize {
        match self.rule {
            GhostRule::SecondOrder => 2,
            GhostRule::Lagrange(n) => n,
        }
    }

    fn w_ghost(&self) -> Result<AffineGhost> {
        let target = -self.wall.g;
        match self.rule {
            GhostRule::SecondOrder => Ok(AffineGhost { constant: 8.0 * target / 3.0, coeffs: vec![-2.0, 1.0 / 3.0] }),
            GhostRule::Lagrange(n) => value_constraint(n, target),
        }
    }

    fn v_ghost(&self) -> Result<AffineGhost> {
        let s = self.wall.side.normal();
        match self.rule {
            GhostRule::SecondOrder => Ok(AffineGhost { constant: s * self.wall.g * self.wall.dx, coeffs: vec![1.0] }),
            GhostRule::Lagrange(n) => {
                // v_x = -s / dx * sum v_i l_i'(wall) = g
                let d0 = lagrange_basis_derivative(n, 0, WALL);
                if d0.abs() < 1e-14 {
                    return Err(Error::DegenerateStencil("basis derivative vanishes at the wall".into()));
                }
                Ok(AffineGhost {
                    constant: -s * self.wall.g * self.wall.dx / d0,
                    coeffs: (1..=n).map(|i| -lagrange_basis_derivative(n, i, WALL) / d0).collect(),
                })
            }
        }
    }

    /// Interpolated wall value of a field whose ghost 0 is already set.
    fn at_wall(&self, f: &Field) -> f64 {
        match self.rule {
            GhostRule::SecondOrder => wall_value(&self.local, f),
            GhostRule::Lagrange(n) => (0..=n).map(|i| self.local.get(f, i as isize) * lagrange_basis(n, i, WALL)).sum(),
        }
    }

    fn wall_derivative(&self, f: &Field) -> f64 {
        let s = self.wall.side.normal();
        match self.rule {
            GhostRule::SecondOrder => s * (self.local.get(f, 0) - self.local.get(f, 1)) / self.wall.dx,
            GhostRule::Lagrange(n) => {
                -s / self.wall.dx
                    * (0..=n)
                        .map(|i| self.local.get(f, i as isize) * lagrange_basis_derivative(n, i, WALL))
                        .sum::<f64>()
            }
        }
    }

    /// `u~` ghost rule given `v` and `w~` with ghost 0 filled.
    fn u_ghost(&self, v: &Field, w: &Field) -> Result<AffineGhost> {
        let s = self.wall.side.normal();
        let (vw, ww) = (self.at_wall(v), self.at_wall(w));
        match (self.set, self.rule) {
            (BoundarySet::Slip, GhostRule::SecondOrder) => {
                let uw = self.wall.slip_u(vw, ww);
                Ok(AffineGhost { constant: 8.0 * uw / 3.0, coeffs: vec![-2.0, 1.0 / 3.0] })
            }
            (BoundarySet::Slip, GhostRule::Lagrange(n)) => value_constraint(n, self.wall.slip_u(vw, ww)),
            (BoundarySet::Flux, GhostRule::SecondOrder) => {
                // s (u0 - u1) / dx + eps^2 s (w0 - w1) / dx = -2 v_wall
                let e2 = self.wall.eps * self.wall.eps;
                let dw = self.local.get(w, 0) - self.local.get(w, 1);
                Ok(AffineGhost { constant: -e2 * dw - 2.0 * s * self.wall.dx * vw, coeffs: vec![1.0] })
            }
            (BoundarySet::Flux, GhostRule::Lagrange(n)) => {
                let d0 = lagrange_basis_derivative(n, 0, WALL);
                if d0.abs() < 1e-14 {
                    return Err(Error::DegenerateStencil("basis derivative vanishes at the wall".into()));
                }
                let e2 = self.wall.eps * self.wall.eps;
                let wsum: f64 = (0..=n)
                    .map(|i| self.local.get(w, i as isize) * lagrange_basis_derivative(n, i, WALL))
                    .sum();
                Ok(AffineGhost {
                    constant: (2.0 * s * self.wall.dx * vw - e2 * wsum) / d0,
                    coeffs: (1..=n).map(|i| -lagrange_basis_derivative(n, i, WALL) / d0).collect(),
                })
            }
        }
    }

    /// Outer ghost layers from the stencil once ghost 0 is set.
    fn fill_outer(&self, f: &mut Field) {
        let l = self.local;
        for k in 1..f.ghost as isize {
            let value = match self.rule {
                GhostRule::SecondOrder => {
                    3.0 * l.get(f, 1 - k) - 3.0 * l.get(f, 2 - k) + l.get(f, 3 - k)
                }
                GhostRule::Lagrange(n) => (0..=n)
                    .map(|i| l.get(f, i as isize) * lagrange_basis(n, i, -(k as f64)))
                    .sum(),
            };
            l.set(f, -k, value);
        }
    }

    fn apply(&self, fields: &mut R13Fields) -> Result<()> {
        let l = self.local;
        let wg = self.w_ghost()?.eval(&l, &fields.w);
        l.set(&mut fields.w, 0, wg);
        let vg = self.v_ghost()?.eval(&l, &fields.v);
        l.set(&mut fields.v, 0, vg);
        let ug = self.u_ghost(&fields.v, &fields.w)?.eval(&l, &fields.u);
        l.set(&mut fields.u, 0, ug);
        self.fill_outer(&mut fields.w);
        self.fill_outer(&mut fields.v);
        self.fill_outer(&mut fields.u);
        Ok(())
    }
}

/// Ghost 0 such that the degree-`n` interpolant equals `target` at the wall.
fn value_constraint(n: usize, target: f64) -> Result<AffineGhost> {
    let l0 = lagrange_basis(n, 0, WALL);
    if l0.abs() < 1e-14 {
        return Err(Error::DegenerateStencil("basis value vanishes at the wall".into()));
    }
    Ok(AffineGhost {
        constant: target / l0,
        coeffs: (1..=n).map(|i| -lagrange_basis(n, i, WALL) / l0).collect(),
    })
}

fn rules(fields: &R13Fields, wall: &WallData, set: BoundarySet, rule: GhostRule) -> Result<WallRules> {
    fields.check()?;
    let r = WallRules { local: Local { n: fields.u.n() as isize, side: wall.side }, wall: *wall, set, rule };
    if let GhostRule::Lagrange(n) = rule {
        if n == 0 || n > fields.u.n() {
            return Err(Error::InvalidArgument(format!("Lagrange degree {n} needs 1..={} interior points", fields.u.n())));
        }
    }
    if r.degree() + 1 > fields.u.n() + 1 {
        return Err(Error::InvalidArgument("stencil wider than the grid".into()));
    }
    Ok(r)
}

/// Second-order ghost fill with the slip relation for `u~`.
pub fn apply_ghost_second_order(fields: &mut R13Fields, wall: &WallData) -> Result<()> {
    apply_ghost(fields, wall, BoundarySet::Slip, GhostRule::SecondOrder)
}

/// Constrained degree-`n` Lagrange ghost fill with the slip relation for `u~`.
pub fn apply_ghost_lagrange(fields: &mut R13Fields, wall: &WallData, n: usize) -> Result<()> {
    apply_ghost(fields, wall, BoundarySet::Slip, GhostRule::Lagrange(n))
}

pub fn apply_ghost(fields: &mut R13Fields, wall: &WallData, set: BoundarySet, rule: GhostRule) -> Result<()> {
    rules(fields, wall, set, rule)?.apply(fields)
}

/// Ghost-0 rule for `u~` as an affine map of interior `u~`, for embedding in
/// implicit rows; `v` and `w~` must already carry their ghosts.
pub fn u_ghost_rule(fields: &R13Fields, wall: &WallData, set: BoundarySet, rule: GhostRule) -> Result<AffineGhost> {
    rules(fields, wall, set, rule)?.u_ghost(&fields.v, &fields.w)
}

/// Fills only the `v` and `w~` ghosts (they do not depend on `u~`).
pub fn apply_ghost_vw(fields: &mut R13Fields, wall: &WallData, set: BoundarySet, rule: GhostRule) -> Result<()> {
    let r = rules(fields, wall, set, rule)?;
    let l = r.local;
    let wg = r.w_ghost()?.eval(&l, &fields.w);
    l.set(&mut fields.w, 0, wg);
    let vg = r.v_ghost()?.eval(&l, &fields.v);
    l.set(&mut fields.v, 0, vg);
    r.fill_outer(&mut fields.w);
    r.fill_outer(&mut fields.v);
    Ok(())
}

/// Fills only the `u~` ghosts from an already computed rule.
pub(crate) fn apply_u_ghost(fields: &mut R13Fields, side: WallSide, ghost: &AffineGhost, rule: GhostRule) -> Result<()> {
    let n = fields.u.n() as isize;
    let l = Local { n, side };
    let value = ghost.eval(&l, &fields.u);
    l.set(&mut fields.u, 0, value);
    let dummy = WallRules {
        local: l,
        wall: WallData { g: 0.0, alpha_bc: 1.0, beta_bc: 0.5, eps: 1.0, dx: 1.0, side },
        set: BoundarySet::Slip,
        rule,
    };
    dummy.fill_outer(&mut fields.u);
    Ok(())
}

/// Residuals of `w~ = -g`, `v_x = g` and the slip relation at one wall,
/// using the interpolants of the second-order fill.
pub fn wall_residuals(fields: &R13Fields, wall: &WallData) -> Result<(f64, f64, f64)> {
    wall_residuals_with(fields, wall, GhostRule::SecondOrder)
}

pub fn wall_residuals_with(fields: &R13Fields, wall: &WallData, rule: GhostRule) -> Result<(f64, f64, f64)> {
    let r = rules(fields, wall, BoundarySet::Slip, rule)?;
    let (uw, vw, ww) = (r.at_wall(&fields.u), r.at_wall(&fields.v), r.at_wall(&fields.w));
    Ok((ww + wall.g, r.wall_derivative(&fields.v) - wall.g, uw - wall.slip_u(vw, ww)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn wall(side: WallSide, dx: f64) -> WallData {
        WallData::new(1.0, 0.7, 0.3, 1e-4, dx, side).unwrap()
    }

    fn centers(n: usize) -> Vec<f64> {
        let dx = 2.0 / n as f64;
        (0..n).map(|i| -1.0 + (i as f64 + 0.5) * dx).collect()
    }

    #[test]
    fn lagrange_basis_partition_of_unity() {
        for n in 1..5 {
            let s: f64 = (0..=n).map(|i| lagrange_basis(n, i, 0.37)).sum();
            assert!((s - 1.0).abs() < 1e-14);
            let d: f64 = (0..=n).map(|i| lagrange_basis_derivative(n, i, 0.37)).sum();
            assert!(d.abs() < 1e-13);
        }
    }

    #[test]
    fn constant_fields_with_zero_forcing() {
        let n = 10;
        let mut f = R13Fields::from_interior(&[2.0; 10], &[0.5; 10], &[0.0; 10], 2).unwrap();
        let mut w = wall(WallSide::Left, 0.2);
        w.g = 0.0;
        apply_ghost_second_order(&mut f, &w).unwrap();
        apply_ghost_second_order(&mut f, &w.with_side(WallSide::Right)).unwrap();
        for k in [-2, -1, n, n + 1] {
            assert_eq!(f.v.at(k), 0.5);
            assert_eq!(f.w.at(k), 0.0);
        }
    }

    #[test]
    fn outer_extrapolation_exact_on_linears() {
        let n = 8;
        let x = centers(n);
        let lin: Vec<f64> = x.iter().map(|x| 3.0 * x - 1.0).collect();
        let mut f = R13Fields::from_interior(&lin, &lin, &lin, 2).unwrap();
        let w = wall(WallSide::Left, 0.25);
        let r = rules(&f, &w, BoundarySet::Slip, GhostRule::SecondOrder).unwrap();
        // Set ghost 0 exactly, then check the outer layer.
        f.u.set(-1, 3.0 * (-1.0 - 0.125) - 1.0);
        r.fill_outer(&mut f.u);
        assert!((f.u.at(-2) - (3.0 * (-1.0 - 0.375) - 1.0)).abs() < 1e-13);
    }

    #[test]
    fn filled_steady_state_meets_wall_conditions() {
        let n = 50;
        let dx = 2.0 / n as f64;
        let x = centers(n);
        let (g, a, b, e) = (1.0, 0.7, 0.3, 1e-4);
        let u: Vec<f64> = x.iter().map(|x| e * g * (1.0 + e * b) / a + g * (1.0 - x * x)).collect();
        let v: Vec<f64> = x.iter().map(|x| g * x).collect();
        let w = vec![-g; n];
        for side in [WallSide::Left, WallSide::Right] {
            let wd = wall(side, dx);
            let mut f = R13Fields::from_interior(&u, &v, &w, 2).unwrap();
            apply_ghost_second_order(&mut f, &wd).unwrap();
            let (r1, r2, r4) = wall_residuals(&f, &wd).unwrap();
            assert!(r1.abs() < 1e-13 && r2.abs() < 1e-12 && r4.abs() < 1e-12, "{side:?}: {r1} {r2} {r4}");
            let r = rules(&f, &wd, BoundarySet::Slip, GhostRule::SecondOrder).unwrap();
            let expected_v = if side == WallSide::Left { -1.0 } else { 1.0 };
            assert!((r.at_wall(&f.v) - expected_v).abs() < 1e-12);
            // The quadratic profile is reproduced in the ghosts.
            let ghost_x = if side == WallSide::Left { -1.0 - dx / 2.0 } else { 1.0 + dx / 2.0 };
            let k = if side == WallSide::Left { -1 } else { n as isize };
            let exact_u = e * g * (1.0 + e * b) / a + g * (1.0 - ghost_x * ghost_x);
            assert!((f.u.at(k) - exact_u).abs() < 1e-12);
        }
    }

    #[test]
    fn zero_w_residual() {
        let f = R13Fields::from_interior(&[0.0; 6], &[0.0; 6], &[0.0; 6], 2).unwrap();
        let (r1, _, _) = wall_residuals(&f, &wall(WallSide::Left, 0.1)).unwrap();
        assert_eq!(r1, 1.0);
    }

    #[test]
    fn lagrange_degree_one_matches_on_linears() {
        let n = 8;
        let dx = 2.0 / n as f64;
        let x = centers(n);
        let v: Vec<f64> = x.clone();
        let w = vec![-1.0; n];
        let wd = wall(WallSide::Left, dx);
        let u: Vec<f64> = x.iter().map(|x| 0.2 + 0.1 * x).collect();
        let mut a = R13Fields::from_interior(&u, &v, &w, 2).unwrap();
        let mut b = a.clone();
        apply_ghost_second_order(&mut a, &wd).unwrap();
        apply_ghost_lagrange(&mut b, &wd, 1).unwrap();
        assert!((a.v.at(-1) - b.v.at(-1)).abs() < 1e-13);
        assert!((a.w.at(-1) - b.w.at(-1)).abs() < 1e-13);
    }

    #[test]
    fn lagrange_degree_two_steady_residuals() {
        let n = 40;
        let dx = 2.0 / n as f64;
        let x = centers(n);
        let (g, a, b, e) = (1.0, 0.7, 0.3, 1e-4);
        let u: Vec<f64> = x.iter().map(|x| e * g * (1.0 + e * b) / a + g * (1.0 - x * x)).collect();
        let v: Vec<f64> = x.iter().map(|x| g * x).collect();
        let w = vec![-g; n];
        for side in [WallSide::Left, WallSide::Right] {
            let wd = wall(side, dx);
            let mut f = R13Fields::from_interior(&u, &v, &w, 2).unwrap();
            apply_ghost_lagrange(&mut f, &wd, 2).unwrap();
            let (r1, r2, r4) = wall_residuals_with(&f, &wd, GhostRule::Lagrange(2)).unwrap();
            assert!(r1.abs() < 1e-12 && r2.abs() < 1e-11 && r4.abs() < 1e-12, "{r1} {r2} {r4}");
        }
    }

    #[test]
    fn too_few_cells() {
        let mut f = R13Fields::from_interior(&[0.0; 2], &[0.0; 2], &[0.0; 2], 2).unwrap();
        assert!(apply_ghost_second_order(&mut f, &wall(WallSide::Left, 1.0)).is_err());
    }

    #[test]
    fn fill_is_idempotent() {
        let n = 12;
        let x = centers(n);
        let u: Vec<f64> = x.iter().map(|x| x.sin()).collect();
        let v: Vec<f64> = x.iter().map(|x| x.cos()).collect();
        let w: Vec<f64> = x.iter().map(|x| x * x).collect();
        let wd = wall(WallSide::Right, 2.0 / n as f64);
        let mut f = R13Fields::from_interior(&u, &v, &w, 2).unwrap();
        apply_ghost_second_order(&mut f, &wd).unwrap();
        let once = f.clone();
        apply_ghost_second_order(&mut f, &wd).unwrap();
        assert_eq!(once, f);
    }
}
