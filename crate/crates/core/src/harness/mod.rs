//! Experiment plumbing: error norms, observed orders, grid restriction,
//! INI configuration, CSV reports and the study drivers.

pub mod config;
pub mod report;
pub mod studies;

pub use config::{DtRule, ExperimentConfig, InitialData, ModelSpec, NormChoice, Study};
pub use report::{ExperimentReport, ReportRow, RunSummary};
pub use studies::{
    r13_channel_initial, run, run_convergence_study, run_klf_demo, run_steady_state_study, ConvergenceReport, KlfDemoReport, KlfRun,
    SteadyStateReport,
};

use crate::error::{Error, Result};
use crate::state::State;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Norm {
    L1,
    Linf,
}

impl Norm {
    pub fn label(self) -> &'static str {
        match self {
            Norm::L1 => "L1",
            Norm::Linf => "Linf",
        }
    }
}

/// `L1 = sum |a - b| dx`, `Linf = max |a - b|`.
pub fn error_norm(a: &[f64], b: &[f64], dx: f64, norm: Norm) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::SizeMismatch { expected: a.len(), got: b.len() });
    }
    let diffs = a.iter().zip(b).map(|(a, b)| (a - b).abs());
    Ok(match norm {
        Norm::L1 => diffs.sum::<f64>() * dx,
        Norm::Linf => diffs.fold(0.0, f64::max),
    })
}

/// `log3(e1 / e2)`.
pub fn convergence_rate_log3(e1: f64, e2: f64) -> Result<f64> {
    convergence_rate(e1, e2, 3.0)
}

/// Observed order between errors on grids that differ by `ratio`.
pub fn convergence_rate(e1: f64, e2: f64, ratio: f64) -> Result<f64> {
    if !(e1 > 0.0) || !(e2 > 0.0) {
        return Err(Error::InvalidArgument(format!("errors must be positive, got {e1} and {e2}")));
    }
    if !(ratio > 1.0) {
        return Err(Error::InvalidArgument(format!("refinement ratio must exceed 1, got {ratio}")));
    }
    Ok((e1 / e2).ln() / ratio.ln())
}

/// How a fine grid sits over a coarse one.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Restriction {
    /// Cell centers, ratio 3: coarse cell `j` is fine cell `3j + 1`.
    CellCentersRatio3,
    /// Nodes including the left end, ratio 2: coarse node `j` is fine node `2j`.
    NodesRatio2,
    /// Nodes, any integer ratio `r`: coarse node `j` is fine node `r j`.
    Nodes(usize),
}

impl Restriction {
    pub fn ratio(self) -> usize {
        match self {
            Restriction::CellCentersRatio3 => 3,
            Restriction::NodesRatio2 => 2,
            Restriction::Nodes(r) => r,
        }
    }

    pub fn fine_index(self, j: usize) -> usize {
        match self {
            Restriction::CellCentersRatio3 => 3 * j + 1,
            Restriction::NodesRatio2 => 2 * j,
            Restriction::Nodes(r) => r * j,
        }
    }

    pub fn apply(self, fine: &[f64], n_coarse: usize) -> Result<Vec<f64>> {
        if self.ratio() == 0 || fine.len() != self.ratio() * n_coarse {
            return Err(Error::SizeMismatch { expected: self.ratio() * n_coarse, got: fine.len() });
        }
        Ok((0..n_coarse).map(|j| fine[self.fine_index(j)]).collect())
    }
}

/// Per-component norm of `coarse - R(fine)`.
pub fn self_convergence_errors(
    coarse: &State,
    fine: &State,
    restriction: Restriction,
    dx_coarse: f64,
    norm: Norm,
) -> Result<Vec<f64>> {
    if coarse.ncomp != fine.ncomp {
        return Err(Error::SizeMismatch { expected: coarse.ncomp, got: fine.ncomp });
    }
    (0..coarse.ncomp)
        .map(|k| {
            let r = restriction.apply(fine.comp(k), coarse.n)?;
            error_norm(coarse.comp(k), &r, dx_coarse, norm)
        })
        .collect()
}

/// Second differences below this fraction of `max|u|` are ignored. A
/// smooth but sharply peaked profile sampled at `dx = 2 pi / 96` already has
/// second differences of a few percent of its peak, so the floor
/// sits just below that.
pub const OSC_FLOOR: f64 = 3e-2;

/// Sign changes of the periodic second difference `u_{j+1} - 2u_j + u_{j-1}`
/// between neighbours that both lie near an extremum (`|u| >= 0.5 max|u|`) and
/// both exceed [`OSC_FLOOR`]` max|u|`. Smooth profiles score a handful at
/// most; grid-scale zigzags score one per cell.
pub fn oscillation_indicator(u: &[f64]) -> usize {
    let n = u.len();
    if n < 3 {
        return 0;
    }
    let top = u.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if top == 0.0 || !top.is_finite() {
        return 0;
    }
    let d2: Vec<f64> = (0..n).map(|j| u[(j + 1) % n] - 2.0 * u[j] + u[(j + n - 1) % n]).collect();
    let keep = |j: usize| u[j].abs() >= 0.5 * top && d2[j].abs() > OSC_FLOOR * top;
    (0..n)
        .filter(|&j| {
            let k = (j + 1) % n;
            keep(j) && keep(k) && d2[j] * d2[k] < 0.0
        })
        .count()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn norms_on_constant_difference() {
        let a = vec![1.0; 40];
        let b = vec![0.0; 40];
        assert!((error_norm(&a, &b, 2.0 / 40.0, Norm::L1).unwrap() - 2.0).abs() < 1e-14);
        assert_eq!(error_norm(&a, &b, 2.0 / 40.0, Norm::Linf).unwrap(), 1.0);
        assert_eq!(error_norm(&a, &a, 0.1, Norm::L1).unwrap(), 0.0);
        assert!(error_norm(&a, &b[..3], 0.1, Norm::L1).is_err());
    }

    #[test]
    fn log3_rates() {
        assert_eq!(convergence_rate_log3(9e-4, 1e-4).unwrap(), 2.0);
        assert!((convergence_rate_log3(8.062e-4, 7.838e-5).unwrap() - 2.121).abs() < 1e-3);
        assert!((convergence_rate_log3(2.530e-3, 2.879e-4).unwrap() - 1.978).abs() < 5e-4);
        assert!(convergence_rate_log3(0.0, 1.0).is_err());
        assert!(convergence_rate_log3(1.0, -1.0).is_err());
    }

    #[test]
    fn restriction_picks_aligned_points() {
        let fine: Vec<f64> = (0..9).map(|i| i as f64).collect();
        assert_eq!(Restriction::CellCentersRatio3.apply(&fine, 3).unwrap(), vec![1.0, 4.0, 7.0]);
        let fine: Vec<f64> = (0..8).map(|i| i as f64).collect();
        assert_eq!(Restriction::NodesRatio2.apply(&fine, 4).unwrap(), vec![0.0, 2.0, 4.0, 6.0]);
        assert!(Restriction::NodesRatio2.apply(&fine, 3).is_err());
    }

    #[test]
    fn indicator_separates_zigzag_from_smooth() {
        let n = 96;
        let smooth: Vec<f64> = (0..n).map(|j| (std::f64::consts::TAU * j as f64 / n as f64).cos()).collect();
        assert!(oscillation_indicator(&smooth) <= 2);
        let zig: Vec<f64> = smooth.iter().enumerate().map(|(j, v)| v + if j % 2 == 0 { 0.05 } else { -0.05 }).collect();
        assert!(oscillation_indicator(&zig) >= 40);
    }
}
