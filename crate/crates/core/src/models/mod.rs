//! Relaxation models as split (or partitioned) semi-discrete systems, plus
//! the analytic reference objects used to check them.

mod broadwell;
mod diffusive;
mod klf;
mod r13;
mod vdp;

pub use broadwell::{broadwell_equilibrium, broadwell_system, Broadwell};
pub use diffusive::{diffusive2x2_system, Diffusive2x2};
pub use klf::{klf_parabolic_cfl, klf_system, solve_power_source, Klf};
pub use r13::{r13_steady_point, r13_steady_state, r13_system, MomentCoupling, R13Boundary, R13Derivative, R13Params, R13};
pub use vdp::{vdp_manifold, vdp_system, VanDerPol};

use crate::error::{Error, Result};

/// `mu(eps)` used both as penalty weight and as the central/upwind blend.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MuRule {
    /// `exp(-eps^2 / (scale * dx))`
    Exponential { scale: f64 },
    Constant(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PenalizationConfig {
    /// Whether `mu` times the diffusion term is added and subtracted.
    pub enabled: bool,
    pub rule: MuRule,
}

impl Default for PenalizationConfig {
    fn default() -> Self {
        Self { enabled: true, rule: MuRule::Exponential { scale: 1.0 } }
    }
}

impl PenalizationConfig {
    pub fn disabled() -> Self {
        Self { enabled: false, ..Self::default() }
    }

    /// Clamped to `[0, 1]`.
    pub fn mu(&self, eps: f64, dx: f64) -> f64 {
        let raw = match self.rule {
            MuRule::Exponential { scale } => (-eps * eps / (scale * dx)).exp(),
            MuRule::Constant(c) => c,
        };
        if raw.is_nan() {
            return 1.0;
        }
        raw.clamp(0.0, 1.0)
    }
}

/// Polynomial closure `sum_k c_k u^k`.
#[derive(Debug, Clone, PartialEq)]
pub struct Closure {
    pub coeffs: Vec<f64>,
}

impl Closure {
    pub fn zero() -> Self {
        Self { coeffs: vec![] }
    }

    pub fn identity() -> Self {
        Self { coeffs: vec![0.0, 1.0] }
    }

    pub fn linear(slope: f64) -> Self {
        Self { coeffs: vec![0.0, slope] }
    }

    pub fn value(&self, u: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, c| acc * u + c)
    }

    pub fn derivative(&self, u: f64) -> f64 {
        self.coeffs
            .iter()
            .enumerate()
            .skip(1)
            .rev()
            .fold(0.0, |acc, (k, c)| acc * u + k as f64 * c)
    }

    pub fn is_affine(&self) -> bool {
        self.coeffs.iter().skip(2).all(|c| *c == 0.0)
    }

    pub fn apply(&self, u: &[f64]) -> Vec<f64> {
        u.iter().map(|u| self.value(*u)).collect()
    }

    /// Smallest derivative over the sampled values.
    pub fn min_derivative(&self, u: &[f64]) -> f64 {
        u.iter().map(|u| self.derivative(*u)).fold(f64::INFINITY, f64::min)
    }
}

/// `u`-equation flux derivative for `u_t + v_x = 0, eps^2 v_t + p(u)_x = ...`
/// on a staggered pair: `v_j` sits at `x_{j+1/2}`, so `v_x` is the backward
/// difference and the matching `p(u)_x` is [`periodic_forward`]. The limit
/// operator is then the compact `D-(D+ p)`. A fraction `1 - mu` of
/// Rusanov dissipation `lambda dx / 2 * D2 u` is blended in for the
/// hyperbolic regime.
pub(crate) fn staggered_flux_derivative(v: &[f64], u: &[f64], lambda: f64, mu: f64, dx: f64) -> Result<Vec<f64>> {
    let n = v.len();
    if u.len() != n {
        return Err(Error::SizeMismatch { expected: n, got: u.len() });
    }
    if n < 3 {
        return Err(Error::InvalidArgument(format!("periodic grid needs n >= 3, got {n}")));
    }
    let visc = (1.0 - mu) * lambda * 0.5 / dx;
    Ok((0..n)
        .map(|j| {
            let (jm, jp) = ((j + n - 1) % n, (j + 1) % n);
            (v[j] - v[jm]) / dx - visc * (u[jp] - 2.0 * u[j] + u[jm])
        })
        .collect())
}

/// `(f_{j+1} - f_j) / dx`, periodic.
pub(crate) fn periodic_forward(f: &[f64], dx: f64) -> Vec<f64> {
    let n = f.len();
    (0..n).map(|j| (f[(j + 1) % n] - f[j]) / dx).collect()
}

/// Outcome of [`linear_stability_bound`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StabilityBound {
    Unbounded,
    MaxDt(f64),
    /// `4 eps^2 xi^2 >= 1`; carries the (nonpositive) formula value.
    UnstableAtWavenumber(f64),
}

/// Largest stable step of forward/backward Euler on the penalized linear
/// model with `mu = 1`, in the space-continuous setting.
pub fn linear_stability_bound(eps: f64, xi: f64) -> Result<StabilityBound> {
    if !(eps >= 0.0) || !(xi > 0.0) {
        return Err(Error::InvalidArgument(format!("need eps >= 0 and xi > 0, got {eps}, {xi}")));
    }
    if eps == 0.0 {
        return Ok(StabilityBound::Unbounded);
    }
    let s = 4.0 * eps * eps * xi * xi;
    let bound = (1.0 - s) / (s * xi * xi);
    if s >= 1.0 {
        Ok(StabilityBound::UnstableAtWavenumber(bound))
    } else {
        Ok(StabilityBound::MaxDt(bound))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Scaling {
    /// `p' >= f'^2` with `f'` bounded by the given value.
    Hyperbolic { f_prime_max_abs: f64 },
    /// `q'^2 < p' / eps^2`.
    Diffusive { q_prime_max_abs: f64, eps: f64 },
}

pub fn subcharacteristic_check(p_prime_min: f64, scaling: Scaling) -> bool {
    match scaling {
        Scaling::Hyperbolic { f_prime_max_abs } => p_prime_min >= f_prime_max_abs * f_prime_max_abs,
        Scaling::Diffusive { q_prime_max_abs, eps } => q_prime_max_abs * q_prime_max_abs * eps * eps < p_prime_min,
    }
}

fn check_eps(eps: f64) -> Result<()> {
    if !(eps > 0.0) || !eps.is_finite() {
        return Err(Error::InvalidArgument(format!("relaxation time must be positive, got {eps}")));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mu_endpoints() {
        let p = PenalizationConfig::default();
        assert_eq!(p.mu(0.0, 0.1), 1.0);
        assert!(p.mu(10.0, 0.1) >= 0.0);
        assert_eq!(PenalizationConfig { enabled: true, rule: MuRule::Constant(3.0) }.mu(0.1, 0.1), 1.0);
    }

    #[test]
    fn stability_bound_examples() {
        assert_eq!(linear_stability_bound(0.0, 1.0).unwrap(), StabilityBound::Unbounded);
        match linear_stability_bound(0.1, 1.0).unwrap() {
            StabilityBound::MaxDt(dt) => assert!((dt - 24.0).abs() < 1e-12),
            other => panic!("{other:?}"),
        }
        assert!(matches!(
            linear_stability_bound(1.0, 1.0).unwrap(),
            StabilityBound::UnstableAtWavenumber(b) if b <= 0.0
        ));
    }

    #[test]
    fn subcharacteristic_examples() {
        assert!(subcharacteristic_check(1.0, Scaling::Hyperbolic { f_prime_max_abs: 0.0 }));
        assert!(!subcharacteristic_check(1.0, Scaling::Hyperbolic { f_prime_max_abs: 2.0 }));
        assert!(subcharacteristic_check(1.0, Scaling::Diffusive { q_prime_max_abs: 1.0, eps: 0.5 }));
    }

    #[test]
    fn closure_evaluation() {
        let c = Closure { coeffs: vec![1.0, -2.0, 3.0] };
        assert_eq!(c.value(2.0), 9.0);
        assert_eq!(c.derivative(2.0), 10.0);
        assert!(Closure::identity().is_affine() && !c.is_affine());
        assert_eq!(Closure::zero().value(5.0), 0.0);
    }

    #[test]
    fn staggered_pair_collapses_to_compact_laplacian() {
        let n = 16;
        let dx = 0.1;
        let u: Vec<f64> = (0..n).map(|i| (i as f64 * 0.7).sin()).collect();
        let v: Vec<f64> = periodic_forward(&u, dx).into_iter().map(|d| -d).collect();
        let (lambda, mu) = (3.0, 0.4);
        let got = staggered_flux_derivative(&v, &u, lambda, mu, dx).unwrap();
        for j in 0..n {
            let d2 = (u[(j + 1) % n] - 2.0 * u[j] + u[(j + n - 1) % n]) / (dx * dx);
            let expected = -d2 - (1.0 - mu) * lambda * dx / 2.0 * d2;
            assert!((got[j] - expected).abs() < 1e-11);
        }
    }
}
