//! Multi-component grid state and the system contracts the integrator drives.

use crate::error::{Error, Result};

/// `ncomp` components of `n` values each, stored component-major.
#[derive(Debug, Clone, PartialEq)]
pub struct State {
    pub ncomp: usize,
    pub n: usize,
    pub data: Vec<f64>,
}

impl State {
    pub fn zeros(ncomp: usize, n: usize) -> Self {
        Self {
            ncomp,
            n,
            data: vec![0.0; ncomp * n],
        }
    }

    pub fn from_components(comps: &[Vec<f64>]) -> Result<Self> {
        let n = comps.first().map_or(0, Vec::len);
        if let Some(bad) = comps.iter().find(|c| c.len() != n) {
            return Err(Error::SizeMismatch { expected: n, got: bad.len() });
        }
        Ok(Self {
            ncomp: comps.len(),
            n,
            data: comps.concat(),
        })
    }

    pub fn scalar(values: &[f64]) -> Self {
        Self {
            ncomp: values.len(),
            n: 1,
            data: values.to_vec(),
        }
    }

    pub fn comp(&self, k: usize) -> &[f64] {
        &self.data[k * self.n..(k + 1) * self.n]
    }

    pub fn comp_mut(&mut self, k: usize) -> &mut [f64] {
        &mut self.data[k * self.n..(k + 1) * self.n]
    }

    pub fn set_comp(&mut self, k: usize, v: &[f64]) {
        self.comp_mut(k).copy_from_slice(v);
    }

    pub fn same_shape(&self, other: &State) -> bool {
        self.ncomp == other.ncomp && self.n == other.n
    }

    /// `self += a * x`
    pub fn axpy(&mut self, a: f64, x: &State) {
        debug_assert!(self.same_shape(x));
        self.data.iter_mut().zip(&x.data).for_each(|(s, x)| *s += a * x);
    }

    pub fn scaled(&self, a: f64) -> State {
        State {
            ncomp: self.ncomp,
            n: self.n,
            data: self.data.iter().map(|v| a * v).collect(),
        }
    }

    pub fn sum(&self, other: &State) -> State {
        let mut out = self.clone();
        out.axpy(1.0, other);
        out
    }

    /// `(self - other) / h`
    pub fn difference_quotient(&self, other: &State, h: f64) -> State {
        State {
            ncomp: self.ncomp,
            n: self.n,
            data: self.data.iter().zip(&other.data).map(|(a, b)| (a - b) / h).collect(),
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn max_abs_diff(&self, other: &State) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    /// Penalized: the stiff first-order coupling sits in the implicit part.
    ImexI,
    /// Additive: the whole hyperbolic part is explicit, only the source is implicit.
    ImexE,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NewtonControl {
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for NewtonControl {
    fn default() -> Self {
        Self { tol: 1e-12, max_iter: 50 }
    }
}

/// Everything an implicit stage solve needs besides its right-hand side.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StageSolve {
    pub t: f64,
    /// `a_ii * dt`
    pub h_aii: f64,
    pub newton: NewtonControl,
}

/// `y' = E(y) + I(y)` with `I` stiff.
pub trait SplitSystem {
    fn names(&self) -> &[&'static str];
    /// Values per component.
    fn len(&self) -> usize;
    fn epsilon(&self) -> f64;
    fn mode(&self) -> Mode;

    fn explicit_rhs(&self, y: &State, t: f64) -> Result<State>;
    fn implicit_rhs(&self, y: &State, t: f64) -> Result<State>;
    /// Solves `Y = rhs + h_aii I(Y)`.
    fn stage_solve(&self, rhs: &State, ctx: &StageSolve) -> Result<State>;
    /// The semi-discrete right-hand side assembled without any splitting.
    fn unsplit_rhs(&self, y: &State, t: f64) -> Result<State>;

    /// Max norm of the algebraic relaxation constraint, if the model has one.
    fn constraint_residual(&self, _y: &State) -> Option<f64> {
        None
    }
    fn dx(&self) -> Option<f64> {
        None
    }
    /// Largest non-stiff characteristic speed.
    fn max_speed(&self, _y: &State) -> f64 {
        1.0
    }
    fn check_admissible(&self, _y: &State) -> Result<()> {
        Ok(())
    }
}

/// `y' = F(y*, y)`, non-stiff in the frozen argument and stiff in the live one.
pub trait PartitionedSystem {
    fn names(&self) -> &[&'static str];
    fn len(&self) -> usize;
    fn mode(&self) -> Mode;

    fn rhs(&self, frozen: &State, live: &State, t: f64) -> Result<State>;
    /// Solves `Y = rhs + h_aii F(frozen, Y)`.
    fn stage_solve(&self, frozen: &State, rhs: &State, ctx: &StageSolve) -> Result<State>;

    fn constraint_residual(&self, _y: &State) -> Option<f64> {
        None
    }
    fn dx(&self) -> Option<f64> {
        None
    }
    fn max_speed(&self, _y: &State) -> f64 {
        1.0
    }
}

/// Views a split system as `F(y*, y) = E(y*) + I(y)`.
pub struct AsPartitioned<'a, S: ?Sized>(pub &'a S);

impl<S: SplitSystem + ?Sized> PartitionedSystem for AsPartitioned<'_, S> {
    fn names(&self) -> &[&'static str] {
        self.0.names()
    }
    fn len(&self) -> usize {
        self.0.len()
    }
    fn mode(&self) -> Mode {
        self.0.mode()
    }
    fn rhs(&self, frozen: &State, live: &State, t: f64) -> Result<State> {
        Ok(self.0.explicit_rhs(frozen, t)?.sum(&self.0.implicit_rhs(live, t)?))
    }
    fn stage_solve(&self, frozen: &State, rhs: &State, ctx: &StageSolve) -> Result<State> {
        let mut r = rhs.clone();
        r.axpy(ctx.h_aii, &self.0.explicit_rhs(frozen, ctx.t)?);
        self.0.stage_solve(&r, ctx)
    }
    fn constraint_residual(&self, y: &State) -> Option<f64> {
        self.0.constraint_residual(y)
    }
    fn dx(&self) -> Option<f64> {
        self.0.dx()
    }
    fn max_speed(&self, y: &State) -> f64 {
        self.0.max_speed(y)
    }
}

/// Scalar Newton iteration for a monotone increasing `f` with a bracketing
/// bisection fallback. `f` returns `(value, derivative)`.
pub fn solve_monotone_scalar(
    f: impl Fn(f64) -> (f64, f64),
    x0: f64,
    control: &NewtonControl,
) -> Result<f64> {
    let mut x = x0;
    let mut trace = Vec::with_capacity(control.max_iter);
    for _ in 0..control.max_iter {
        let (fx, dfx) = f(x);
        trace.push(fx);
        if fx.abs() <= control.tol * (1.0 + x.abs()) {
            return Ok(x);
        }
        if !(dfx > 0.0) || !dfx.is_finite() {
            break;
        }
        let next = x - fx / dfx;
        if !next.is_finite() {
            break;
        }
        x = next;
    }
    // Bracket and bisect.
    let (mut lo, mut hi) = (x0.min(x) - 1.0, x0.max(x) + 1.0);
    let mut width = 1.0;
    while f(lo).0 > 0.0 {
        width *= 2.0;
        lo -= width;
        if !lo.is_finite() {
            return Err(Error::NewtonFailed { iterations: control.max_iter, trace });
        }
    }
    width = 1.0;
    while f(hi).0 < 0.0 {
        width *= 2.0;
        hi += width;
        if !hi.is_finite() {
            return Err(Error::NewtonFailed { iterations: control.max_iter, trace });
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let fm = f(mid).0;
        if fm == 0.0 || hi - lo <= control.tol * (1.0 + mid.abs()) {
            return Ok(mid);
        }
        if fm < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}
