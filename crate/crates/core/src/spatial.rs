//! Uniform-grid discrete operators: WENO reconstruction, flux splitting,
//! conservative differences, first/second derivatives and tridiagonal solves.
//!
//! Operators never invent boundary data. Ghost cells are filled by the caller
//! (periodic wrap here, or the wall treatment in [`crate::r13_boundary`]).

use crate::error::{Error, Result};

/// Smoothness-indicator floor for WENO weights.
pub const WENO_EPS: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundaryKind {
    Periodic,
    GhostCells(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NodeKind {
    /// `x_i = x_left + (i + 1/2) dx`
    CellCenters,
    /// `x_i = x_left + i dx`
    Nodes,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid1D {
    pub x_left: f64,
    pub x_right: f64,
    pub n: usize,
    pub dx: f64,
    pub boundary: BoundaryKind,
    pub nodes: NodeKind,
}

impl Grid1D {
    pub fn new(x_left: f64, x_right: f64, n: usize, boundary: BoundaryKind, nodes: NodeKind) -> Result<Self> {
        if n < 4 {
            return Err(Error::InvalidArgument(format!("grid needs at least 4 points, got {n}")));
        }
        if !(x_right > x_left) {
            return Err(Error::InvalidArgument("x_right must exceed x_left".into()));
        }
        if let BoundaryKind::GhostCells(0) = boundary {
            return Err(Error::InvalidArgument("ghost width must be at least 1".into()));
        }
        Ok(Self {
            x_left,
            x_right,
            n,
            dx: (x_right - x_left) / n as f64,
            boundary,
            nodes,
        })
    }

    pub fn periodic(x_left: f64, x_right: f64, n: usize) -> Result<Self> {
        Self::new(x_left, x_right, n, BoundaryKind::Periodic, NodeKind::Nodes)
    }

    /// Coordinate of interior point `i` (0-based; negative and `>= n` give ghosts).
    pub fn x(&self, i: isize) -> f64 {
        let shift = match self.nodes {
            NodeKind::CellCenters => 0.5,
            NodeKind::Nodes => 0.0,
        };
        self.x_left + (i as f64 + shift) * self.dx
    }

    /// Coordinate of the interface between point `i` and `i + 1`.
    pub fn x_interface(&self, i: isize) -> f64 {
        self.x(i) + 0.5 * self.dx
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.n as isize).map(|i| self.x(i)).collect()
    }

    pub fn sample(&self, f: impl Fn(f64) -> f64) -> Vec<f64> {
        (0..self.n as isize).map(|i| f(self.x(i))).collect()
    }
}

/// Grid values plus `ghost` layers on each side.
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    pub values: Vec<f64>,
    pub ghost: usize,
}

impl Field {
    pub fn zeros(n: usize, ghost: usize) -> Self {
        Self {
            values: vec![0.0; n + 2 * ghost],
            ghost,
        }
    }

    /// Wraps interior values; ghosts start at zero. Rejects non-finite input.
    pub fn from_interior(interior: &[f64], ghost: usize) -> Result<Self> {
        if let Some(i) = interior.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(format!("field entry {i}")));
        }
        let mut values = vec![0.0; interior.len() + 2 * ghost];
        values[ghost..ghost + interior.len()].copy_from_slice(interior);
        Ok(Self { values, ghost })
    }

    /// Interior values with ghosts filled by periodic wrap.
    pub fn periodic(interior: &[f64], ghost: usize) -> Result<Self> {
        let mut f = Self::from_interior(interior, ghost)?;
        f.fill_periodic();
        Ok(f)
    }

    pub fn n(&self) -> usize {
        self.values.len() - 2 * self.ghost
    }

    /// Value at interior index `i`; `-1` is the first ghost on the left.
    #[inline]
    pub fn at(&self, i: isize) -> f64 {
        self.values[(i + self.ghost as isize) as usize]
    }

    #[inline]
    pub fn set(&mut self, i: isize, v: f64) {
        self.values[(i + self.ghost as isize) as usize] = v;
    }

    pub fn interior(&self) -> &[f64] {
        let n = self.n();
        &self.values[self.ghost..self.ghost + n]
    }

    pub fn fill_periodic(&mut self) {
        let n = self.n() as isize;
        for k in 1..=self.ghost as isize {
            let left = self.at(n - k);
            let right = self.at(k - 1);
            self.set(-k, left);
            self.set(n - 1 + k, right);
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    /// Value at `x_{j+1/2}` from the stencil biased to the left (upwind for
    /// rightward transport).
    LeftOfInterface,
    /// Value at `x_{j+1/2}` from the stencil biased to the right.
    RightOfInterface,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WenoOrder {
    Three,
    Five,
}

impl WenoOrder {
    pub fn ghosts(self) -> usize {
        match self {
            WenoOrder::Three => 2,
            WenoOrder::Five => 3,
        }
    }

    pub fn formal_order(self) -> f64 {
        match self {
            WenoOrder::Three => 3.0,
            WenoOrder::Five => 5.0,
        }
    }
}

fn weno5_left(v: [f64; 5]) -> f64 {
    let [a, b, c, d, e] = v;
    let b0 = 13.0 / 12.0 * (a - 2.0 * b + c).powi(2) + 0.25 * (a - 4.0 * b + 3.0 * c).powi(2);
    let b1 = 13.0 / 12.0 * (b - 2.0 * c + d).powi(2) + 0.25 * (b - d).powi(2);
    let b2 = 13.0 / 12.0 * (c - 2.0 * d + e).powi(2) + 0.25 * (3.0 * c - 4.0 * d + e).powi(2);
    let q0 = (2.0 * a - 7.0 * b + 11.0 * c) / 6.0;
    let q1 = (-b + 5.0 * c + 2.0 * d) / 6.0;
    let q2 = (2.0 * c + 5.0 * d - e) / 6.0;
    let w0 = 0.1 / (WENO_EPS + b0).powi(2);
    let w1 = 0.6 / (WENO_EPS + b1).powi(2);
    let w2 = 0.3 / (WENO_EPS + b2).powi(2);
    (w0 * q0 + w1 * q1 + w2 * q2) / (w0 + w1 + w2)
}

fn weno3_left(v: [f64; 3]) -> f64 {
    let [a, b, c] = v;
    let b0 = (b - a).powi(2);
    let b1 = (c - b).powi(2);
    let q0 = -0.5 * a + 1.5 * b;
    let q1 = 0.5 * (b + c);
    let w0 = (1.0 / 3.0) / (WENO_EPS + b0).powi(2);
    let w1 = (2.0 / 3.0) / (WENO_EPS + b1).powi(2);
    (w0 * q0 + w1 * q1) / (w0 + w1)
}

/// Reconstructs point values at the `n + 1` interfaces `x_{-1/2} .. x_{n-1/2}`
/// from the cell-average-like data in `f` (interface `k` sits between
/// interior points `k - 1` and `k`).
pub fn weno_reconstruct(f: &Field, side: Side, order: WenoOrder) -> Result<Vec<f64>> {
    let needed = order.ghosts();
    if f.ghost < needed {
        return Err(Error::InsufficientGhosts { needed, have: f.ghost });
    }
    let n = f.n() as isize;
    let out = (0..=n)
        .map(|k| {
            let j = k - 1; // interface j+1/2
            match (order, side) {
                (WenoOrder::Five, Side::LeftOfInterface) => {
                    weno5_left([f.at(j - 2), f.at(j - 1), f.at(j), f.at(j + 1), f.at(j + 2)])
                }
                (WenoOrder::Five, Side::RightOfInterface) => {
                    weno5_left([f.at(j + 3), f.at(j + 2), f.at(j + 1), f.at(j), f.at(j - 1)])
                }
                (WenoOrder::Three, Side::LeftOfInterface) => {
                    weno3_left([f.at(j - 1), f.at(j), f.at(j + 1)])
                }
                (WenoOrder::Three, Side::RightOfInterface) => {
                    weno3_left([f.at(j + 2), f.at(j + 1), f.at(j)])
                }
            }
        })
        .collect();
    Ok(out)
}

/// Lax-Friedrichs splitting `f± = (f ± alpha u) / 2`.
pub fn split_flux(f: &[f64], alpha: f64, u: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
    if f.len() != u.len() {
        return Err(Error::SizeMismatch { expected: u.len(), got: f.len() });
    }
    if !(alpha > 0.0) {
        let constant = f.windows(2).all(|w| w[0] == w[1]);
        if !constant {
            return Err(Error::InvalidArgument(format!(
                "splitting speed must be positive for a nonconstant flux, got {alpha}"
            )));
        }
    }
    let plus = f.iter().zip(u).map(|(f, u)| 0.5 * (f + alpha * u)).collect();
    let minus = f.iter().zip(u).map(|(f, u)| 0.5 * (f - alpha * u)).collect();
    Ok((plus, minus))
}

/// `-(fhat_{j+1/2} - fhat_{j-1/2}) / dx` for each of the `fhat.len() - 1` cells.
pub fn conservative_divergence(fhat: &[f64], dx: f64) -> Vec<f64> {
    fhat.windows(2).map(|w| -(w[1] - w[0]) / dx).collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Derivative {
    Central,
    /// One-sided difference taken from the upwind side of a wave moving with
    /// the given sign: `+1` uses the backward difference, `-1` the forward one.
    Upwind(f64),
    /// `(1 - mu) Upwind(sign) + mu Central`.
    Blended { mu: f64, sign: f64 },
}

/// First derivative at every interior point; needs one ghost layer.
pub fn first_derivative(f: &Field, dx: f64, mode: Derivative) -> Result<Vec<f64>> {
    if f.ghost < 1 {
        return Err(Error::InsufficientGhosts { needed: 1, have: f.ghost });
    }
    let n = f.n() as isize;
    let central = |j: isize| (f.at(j + 1) - f.at(j - 1)) / (2.0 * dx);
    let upwind = |j: isize, sign: f64| {
        if sign >= 0.0 {
            (f.at(j) - f.at(j - 1)) / dx
        } else {
            (f.at(j + 1) - f.at(j)) / dx
        }
    };
    match mode {
        Derivative::Central => Ok((0..n).map(central).collect()),
        Derivative::Upwind(sign) => Ok((0..n).map(|j| upwind(j, sign)).collect()),
        Derivative::Blended { mu, sign } => {
            if !(0.0..=1.0).contains(&mu) {
                return Err(Error::InvalidArgument(format!("blend weight {mu} outside [0, 1]")));
            }
            Ok((0..n)
                .map(|j| (1.0 - mu) * upwind(j, sign) + mu * central(j))
                .collect())
        }
    }
}

/// `(f_{j+1} - 2 f_j + f_{j-1}) / dx^2`.
pub fn second_derivative(f: &Field, dx: f64) -> Result<Vec<f64>> {
    if f.ghost < 1 {
        return Err(Error::InsufficientGhosts { needed: 1, have: f.ghost });
    }
    let n = f.n() as isize;
    let inv = 1.0 / (dx * dx);
    Ok((0..n)
        .map(|j| (f.at(j + 1) - 2.0 * f.at(j) + f.at(j - 1)) * inv)
        .collect())
}

/// Tridiagonal system. Row `i` reads
/// `lower[i] x[i-1] + diag[i] x[i] + upper[i] x[i+1] = rhs[i]`;
/// `lower[0]` and `upper[n-1]` are the wrap-around corners when `cyclic`
/// and are ignored otherwise.
#[derive(Debug, Clone, PartialEq)]
pub struct TridiagonalSystem {
    pub lower: Vec<f64>,
    pub diag: Vec<f64>,
    pub upper: Vec<f64>,
    pub rhs: Vec<f64>,
    pub cyclic: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TridiagonalSolution {
    pub x: Vec<f64>,
    /// `||A x - rhs||_inf`.
    pub residual: f64,
}

impl TridiagonalSystem {
    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let n = self.len();
        (0..n)
            .map(|i| {
                let mut s = self.diag[i] * x[i];
                if i > 0 {
                    s += self.lower[i] * x[i - 1];
                } else if self.cyclic {
                    s += self.lower[0] * x[n - 1];
                }
                if i + 1 < n {
                    s += self.upper[i] * x[i + 1];
                } else if self.cyclic {
                    s += self.upper[n - 1] * x[0];
                }
                s
            })
            .collect()
    }
}

fn thomas(lower: &[f64], diag: &[f64], upper: &[f64], rhs: &[f64]) -> Result<Vec<f64>> {
    let n = diag.len();
    let mut cp = vec![0.0; n];
    let mut dp = vec![0.0; n];
    if diag[0] == 0.0 {
        return Err(Error::Singular { row: 0 });
    }
    cp[0] = upper[0] / diag[0];
    dp[0] = rhs[0] / diag[0];
    for i in 1..n {
        let m = diag[i] - lower[i] * cp[i - 1];
        if m == 0.0 || !m.is_finite() {
            return Err(Error::Singular { row: i });
        }
        cp[i] = if i + 1 < n { upper[i] / m } else { 0.0 };
        dp[i] = (rhs[i] - lower[i] * dp[i - 1]) / m;
    }
    let mut x = dp;
    for i in (0..n - 1).rev() {
        let next = x[i + 1];
        x[i] -= cp[i] * next;
    }
    Ok(x)
}

/// Thomas algorithm; cyclic systems use a Sherman-Morrison correction.
pub fn solve_tridiagonal(sys: &TridiagonalSystem) -> Result<TridiagonalSolution> {
    let n = sys.len();
    if n < 2 {
        return Err(Error::InvalidArgument(format!("tridiagonal system needs n >= 2, got {n}")));
    }
    for (name, v) in [("lower", &sys.lower), ("upper", &sys.upper), ("rhs", &sys.rhs)] {
        if v.len() != n {
            return Err(Error::SizeMismatch { expected: n, got: v.len() }).map_err(|e| {
                Error::InvalidArgument(format!("{name}: {e}"))
            });
        }
    }
    let x = if !sys.cyclic || (sys.lower[0] == 0.0 && sys.upper[n - 1] == 0.0) {
        thomas(&sys.lower, &sys.diag, &sys.upper, &sys.rhs)?
    } else {
        if n < 3 {
            return Err(Error::InvalidArgument("cyclic system needs n >= 3".into()));
        }
        let alpha = sys.upper[n - 1]; // A[n-1][0]
        let beta = sys.lower[0]; // A[0][n-1]
        let gamma = if sys.diag[0] != 0.0 { -sys.diag[0] } else { 1.0 };
        let mut diag = sys.diag.clone();
        diag[0] -= gamma;
        diag[n - 1] -= alpha * beta / gamma;
        let y = thomas(&sys.lower, &diag, &sys.upper, &sys.rhs)?;
        let mut u = vec![0.0; n];
        u[0] = gamma;
        u[n - 1] = alpha;
        let z = thomas(&sys.lower, &diag, &sys.upper, &u)?;
        let vy = y[0] + beta / gamma * y[n - 1];
        let vz = z[0] + beta / gamma * z[n - 1];
        let denom = 1.0 + vz;
        if denom == 0.0 || !denom.is_finite() {
            return Err(Error::Singular { row: n - 1 });
        }
        let factor = vy / denom;
        y.iter().zip(&z).map(|(y, z)| y - factor * z).collect()
    };
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::Singular { row: n - 1 });
    }
    let ax = sys.apply(&x);
    let residual = ax
        .iter()
        .zip(&sys.rhs)
        .map(|(a, r)| (a - r).abs())
        .fold(0.0, f64::max);
    Ok(TridiagonalSolution { x, residual })
}

/// Periodic system whose off-diagonals couple `j` to `j - 2` (`lower[j]`)
/// and `j + 2` (`upper[j]`). Solved one stride-2 orbit at a time, so it is
/// two cyclic tridiagonal systems for even `n` and one for odd `n`.
pub fn solve_stride_two_cyclic(sys: &TridiagonalSystem) -> Result<Vec<f64>> {
    let n = sys.len();
    if n < 6 {
        return Err(Error::InvalidArgument(format!("stride-2 cyclic system needs n >= 6, got {n}")));
    }
    for v in [&sys.lower, &sys.upper, &sys.rhs] {
        if v.len() != n {
            return Err(Error::SizeMismatch { expected: n, got: v.len() });
        }
    }
    let mut x = vec![0.0; n];
    let mut seen = vec![false; n];
    for start in 0..n {
        if seen[start] {
            continue;
        }
        let mut orbit = Vec::new();
        let mut j = start;
        while !seen[j] {
            seen[j] = true;
            orbit.push(j);
            j = (j + 2) % n;
        }
        let pick = |v: &[f64]| orbit.iter().map(|&j| v[j]).collect::<Vec<f64>>();
        let sub = TridiagonalSystem {
            lower: pick(&sys.lower),
            diag: pick(&sys.diag),
            upper: pick(&sys.upper),
            rhs: pick(&sys.rhs),
            cyclic: true,
        };
        for (&j, v) in orbit.iter().zip(solve_tridiagonal(&sub)?.x) {
            x[j] = v;
        }
    }
    Ok(x)
}

/// Square system stored by diagonals: entry `(i, j)` with `-kl <= j - i <= ku`.
#[derive(Debug, Clone, PartialEq)]
pub struct BandedSystem {
    pub n: usize,
    pub kl: usize,
    pub ku: usize,
    band: Vec<f64>,
    pub rhs: Vec<f64>,
}

impl BandedSystem {
    pub fn new(n: usize, kl: usize, ku: usize) -> Self {
        Self { n, kl, ku, band: vec![0.0; n * (kl + ku + 1)], rhs: vec![0.0; n] }
    }

    fn slot(&self, i: usize, j: usize) -> Option<usize> {
        let d = j as isize - i as isize;
        if i >= self.n || j >= self.n || d < -(self.kl as isize) || d > self.ku as isize {
            return None;
        }
        Some(i * (self.kl + self.ku + 1) + (d + self.kl as isize) as usize)
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.slot(i, j).map_or(0.0, |k| self.band[k])
    }

    /// Adds `v` to entry `(i, j)`, which must lie inside the band.
    pub fn add(&mut self, i: usize, j: usize, v: f64) -> Result<()> {
        let k = self.slot(i, j).ok_or_else(|| {
            Error::InvalidArgument(format!("entry ({i}, {j}) outside band ({}, {})", self.kl, self.ku))
        })?;
        self.band[k] += v;
        Ok(())
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        (0..self.n)
            .map(|i| {
                let lo = i.saturating_sub(self.kl);
                let hi = (i + self.ku + 1).min(self.n);
                (lo..hi).map(|j| self.get(i, j) * x[j]).sum()
            })
            .collect()
    }
}

/// Gaussian elimination without pivoting, so the band does not grow. Meant
/// for matrices whose symmetric part is positive definite after scaling.
pub fn solve_banded(sys: &BandedSystem) -> Result<Vec<f64>> {
    let n = sys.n;
    let mut a = sys.clone();
    let mut b = sys.rhs.clone();
    if b.len() != n {
        return Err(Error::SizeMismatch { expected: n, got: b.len() });
    }
    for k in 0..n {
        let pivot = a.get(k, k);
        if pivot == 0.0 || !pivot.is_finite() {
            return Err(Error::Singular { row: k });
        }
        for i in k + 1..(k + a.kl + 1).min(n) {
            let f = a.get(i, k) / pivot;
            if f == 0.0 {
                continue;
            }
            for j in k..(k + a.ku + 1).min(n) {
                let v = a.get(k, j);
                a.add(i, j, -f * v)?;
            }
            b[i] -= f * b[k];
        }
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let mut s = b[i];
        for j in i + 1..(i + a.ku + 1).min(n) {
            s -= a.get(i, j) * x[j];
        }
        x[i] = s / a.get(i, i);
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("banded solve".into()));
    }
    Ok(x)
}
