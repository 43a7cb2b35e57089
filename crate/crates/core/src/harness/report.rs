//! Report rows and their CSV form.

use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};

pub const CSV_HEADER: [&str; 11] = ["model", "scheme", "eps", "N", "dt", "component", "norm", "error", "order", "flag", "seconds"];

pub const FLAG_ABORTED: &str = "aborted";
pub const FLAG_DEGRADED: &str = "degraded";

#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow {
    pub model: String,
    pub scheme: String,
    pub eps: f64,
    /// Grid size (or step count for ODE ladders) of the coarser run of the pair.
    pub n: usize,
    pub dt: f64,
    pub component: String,
    /// `L1`, `Linf`, or a study-specific label such as `Linf@t=3`.
    pub norm: String,
    /// NaN for aborted cells.
    pub error: f64,
    pub order: Option<f64>,
    pub flag: String,
    pub seconds: f64,
}

/// One integration run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunSummary {
    pub eps: f64,
    pub n: usize,
    pub dt: f64,
    pub steps: usize,
    pub seconds: f64,
    /// Error message when the run aborted.
    pub abort: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ExperimentReport {
    pub rows: Vec<ReportRow>,
    pub runs: Vec<RunSummary>,
}

fn sci(x: f64) -> String {
    if x.is_nan() {
        "NaN".into()
    } else {
        format!("{x:.6e}")
    }
}

impl ExperimentReport {
    pub fn aborted(&self) -> bool {
        self.runs.iter().any(|r| r.abort.is_some()) || self.rows.iter().any(|r| r.flag.contains(FLAG_ABORTED))
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let csv_err = |e: csv::Error| Error::Io(std::io::Error::other(e));
        w.write_record(CSV_HEADER).map_err(csv_err)?;
        for r in &self.rows {
            w.write_record([
                r.model.clone(),
                r.scheme.clone(),
                sci(r.eps),
                r.n.to_string(),
                sci(r.dt),
                r.component.clone(),
                r.norm.clone(),
                sci(r.error),
                r.order.map_or_else(String::new, |o| format!("{o:.4}")),
                r.flag.clone(),
                format!("{:.3}", r.seconds),
            ])
            .map_err(csv_err)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)?;
        String::from_utf8(buf).map_err(|e| Error::Io(std::io::Error::other(e)))
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            std::fs::create_dir_all(dir)?;
        }
        self.write_csv(std::fs::File::create(path)?)
    }

    /// Rows for one component and norm, in emission order.
    pub fn select<'a>(&'a self, component: &'a str, norm: &'a str) -> impl Iterator<Item = &'a ReportRow> {
        self.rows.iter().filter(move |r| r.component == component && r.norm == norm)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(error: f64, order: Option<f64>, flag: &str) -> ReportRow {
        ReportRow {
            model: "r13-periodic".into(),
            scheme: "ssp2-332".into(),
            eps: 1e-2,
            n: 50,
            dt: 0.012,
            component: "u".into(),
            norm: "L1".into(),
            error,
            order,
            flag: flag.into(),
            seconds: 0.0,
        }
    }

    #[test]
    fn csv_layout() {
        let rep = ExperimentReport { rows: vec![row(8.062e-4, None, ""), row(f64::NAN, Some(2.121), FLAG_ABORTED)], runs: vec![] };
        let text = rep.to_csv().unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "model,scheme,eps,N,dt,component,norm,error,order,flag,seconds");
        assert_eq!(lines[1], "r13-periodic,ssp2-332,1.000000e-2,50,1.200000e-2,u,L1,8.062000e-4,,,0.000");
        assert_eq!(lines[2], "r13-periodic,ssp2-332,1.000000e-2,50,1.200000e-2,u,L1,NaN,2.1210,aborted,0.000");
        assert!(rep.aborted());
        assert!(!ExperimentReport { rows: vec![row(1.0, None, "")], runs: vec![] }.aborted());
    }
}
