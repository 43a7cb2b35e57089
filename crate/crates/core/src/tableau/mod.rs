//! Double Butcher tableaux for IMEX Runge-Kutta schemes.
//!
//! An [`ImexTableau`] pairs a strictly lower triangular explicit tableau with a
//! diagonally implicit (DIRK) one. This module validates the pair, classifies
//! the implicit part (type A, type CK, ARS), evaluates the classical additive
//! order conditions up to order three and reads/writes the plain-text scheme
//! registry.

mod order;
mod registry;

use std::fmt;

use crate::error::{Error, Result};

pub use order::{
    check_order_conditions, check_single_order_conditions, ConditionResidual, PropertyReport,
    ORDER_TOL,
};
pub use registry::{load_tableau, serialize, Registry, RegistryEntry, BUILTIN_REGISTRY};

/// Row-sum and stiff-accuracy tolerance.
pub const STRUCT_TOL: f64 = 1e-12;
/// Diagonal entries at or below this magnitude count as zero.
pub const INVERTIBILITY_TOL: f64 = 1e-14;

/// One Butcher array: `s x s` coefficients, weights and abscissae.
#[derive(Debug, Clone, PartialEq)]
pub struct ButcherTableau {
    /// Row-major `s x s` coefficients.
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    pub c: Vec<f64>,
    pub stages: usize,
}

impl ButcherTableau {
    /// Builds a tableau from rows. Shape errors are reported by [`validate`],
    /// not here, so malformed tableaux can still be inspected.
    pub fn from_rows(rows: &[Vec<f64>], b: Vec<f64>, c: Vec<f64>) -> Self {
        let stages = rows.len();
        let mut a = Vec::with_capacity(stages * stages);
        for row in rows {
            if row.len() == stages {
                a.extend_from_slice(row);
            } else {
                // Ragged rows are kept as NaN so validate reports the shape.
                a.extend(std::iter::repeat(f64::NAN).take(stages));
            }
        }
        Self { a, b, c, stages }
    }

    #[inline]
    pub fn coef(&self, i: usize, j: usize) -> f64 {
        self.a[i * self.stages + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.a[i * self.stages..(i + 1) * self.stages]
    }

    fn shape_violations(&self, part: Part) -> Vec<Violation> {
        let mut out = Vec::new();
        let s = self.stages;
        if self.a.len() != s * s || self.a.iter().any(|x| x.is_nan()) {
            out.push(Violation::Shape {
                part,
                detail: format!("coefficient matrix is not {s}x{s}"),
            });
        }
        if self.b.len() != s {
            out.push(Violation::Shape {
                part,
                detail: format!("weights have length {}, expected {s}", self.b.len()),
            });
        }
        if self.c.len() != s {
            out.push(Violation::Shape {
                part,
                detail: format!("abscissae have length {}, expected {s}", self.c.len()),
            });
        }
        out
    }
}

/// Which half of the double tableau a diagnostic refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Part {
    Explicit,
    Implicit,
}

impl fmt::Display for Part {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Part::Explicit => f.write_str("explicit"),
            Part::Implicit => f.write_str("implicit"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    Shape { part: Part, detail: String },
    Triangularity { part: Part, row: usize, col: usize, value: f64 },
    RowSum { part: Part, row: usize, magnitude: f64 },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::Shape { part, detail } => write!(f, "{part} shape: {detail}"),
            Violation::Triangularity { part, row, col, value } => write!(
                f,
                "{part} triangularity: entry ({}, {}) = {value:e} must vanish",
                row + 1,
                col + 1
            ),
            Violation::RowSum { part, row, magnitude } => write!(
                f,
                "{part} row sum: row {} differs from c by {magnitude:e}",
                row + 1
            ),
        }
    }
}

/// Outcome of [`validate`]. Valid tableaux have no violations.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Explicit/implicit pair with a scheme name.
#[derive(Debug, Clone, PartialEq)]
pub struct ImexTableau {
    pub name: String,
    pub explicit: ButcherTableau,
    pub implicit: ButcherTableau,
}

impl ImexTableau {
    pub fn new(name: impl Into<String>, explicit: ButcherTableau, implicit: ButcherTableau) -> Self {
        Self {
            name: name.into(),
            explicit,
            implicit,
        }
    }

    pub fn stages(&self) -> usize {
        self.implicit.stages
    }

    /// Builtin registry lookup.
    pub fn builtin(name: &str) -> Result<Self> {
        Registry::builtin().get(name)
    }
}

/// Checks shapes, triangular structure and row sums.
///
/// A stage-count mismatch between the two halves is a structural error; every
/// other problem is collected in the report.
pub fn validate(t: &ImexTableau) -> Result<ValidationReport> {
    if t.explicit.stages != t.implicit.stages {
        return Err(Error::Structural(format!(
            "explicit part has {} stages, implicit part has {}",
            t.explicit.stages, t.implicit.stages
        )));
    }
    let mut violations = t.explicit.shape_violations(Part::Explicit);
    violations.extend(t.implicit.shape_violations(Part::Implicit));
    if !violations.is_empty() {
        return Ok(ValidationReport { violations });
    }
    let s = t.stages();
    for (part, tab, strict) in [
        (Part::Explicit, &t.explicit, true),
        (Part::Implicit, &t.implicit, false),
    ] {
        for i in 0..s {
            let first_forbidden = if strict { i } else { i + 1 };
            for j in first_forbidden..s {
                let v = tab.coef(i, j);
                if v != 0.0 {
                    violations.push(Violation::Triangularity { part, row: i, col: j, value: v });
                }
            }
        }
        for i in 0..s {
            let sum: f64 = tab.row(i).iter().sum();
            let magnitude = (sum - tab.c[i]).abs();
            if magnitude > STRUCT_TOL {
                violations.push(Violation::RowSum { part, row: i, magnitude });
            }
        }
    }
    Ok(ValidationReport { violations })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ClassKind {
    TypeA,
    TypeCk,
    Ars,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TableauClass {
    pub kind: ClassKind,
    pub diagnostic: String,
}

/// Classifies the implicit coefficient matrix.
///
/// For a DIRK matrix invertibility is decided by the diagonal alone.
pub fn classify(t: &ImexTableau) -> Result<TableauClass> {
    let a = &t.implicit;
    let s = a.stages;
    let nonzero = |x: f64| x.abs() > INVERTIBILITY_TOL;
    let diag: Vec<f64> = (0..s).map(|i| a.coef(i, i)).collect();
    if diag.iter().all(|&d| nonzero(d)) {
        return Ok(TableauClass {
            kind: ClassKind::TypeA,
            diagnostic: format!("all {s} diagonal entries nonzero"),
        });
    }
    let first_row_zero = a.row(0).iter().all(|&x| !nonzero(x));
    if !first_row_zero {
        return Err(Error::Unclassifiable(
            "singular matrix with a nonzero first row".into(),
        ));
    }
    if let Some(k) = (1..s).find(|&i| !nonzero(diag[i])) {
        return Err(Error::Unclassifiable(format!(
            "zero first row but trailing block is singular (diagonal entry {} vanishes)",
            k + 1
        )));
    }
    if s == 1 {
        return Err(Error::Unclassifiable("single zero stage".into()));
    }
    let a_col_zero = (1..s).all(|i| !nonzero(a.coef(i, 0)));
    if a_col_zero {
        Ok(TableauClass {
            kind: ClassKind::Ars,
            diagnostic: "zero first row and column, invertible trailing block".into(),
        })
    } else {
        let max_a = (1..s).map(|i| a.coef(i, 0).abs()).fold(0.0, f64::max);
        Ok(TableauClass {
            kind: ClassKind::TypeCk,
            diagnostic: format!("zero first row, first column magnitude {max_a:e}"),
        })
    }
}

/// Last row of the coefficient matrix equals the weights.
pub fn is_stiffly_accurate(t: &ButcherTableau) -> bool {
    let s = t.stages;
    if s == 0 || t.b.len() != s {
        return false;
    }
    t.row(s - 1)
        .iter()
        .zip(&t.b)
        .all(|(a, b)| (a - b).abs() <= STRUCT_TOL)
}

/// Both halves stiffly accurate and the last stage sits at the step end.
pub fn is_globally_stiffly_accurate(t: &ImexTableau) -> bool {
    let s = t.stages();
    is_stiffly_accurate(&t.explicit)
        && is_stiffly_accurate(&t.implicit)
        && (t.explicit.c[s - 1] - 1.0).abs() <= STRUCT_TOL
        && (t.implicit.c[s - 1] - 1.0).abs() <= STRUCT_TOL
}
