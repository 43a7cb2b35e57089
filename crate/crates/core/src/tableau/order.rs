//! Classical additive Runge-Kutta order conditions up to order three.

use super::{is_globally_stiffly_accurate, is_stiffly_accurate, ButcherTableau, ImexTableau, STRUCT_TOL};

pub const ORDER_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct ConditionResidual {
    pub id: String,
    pub order: usize,
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PropertyReport {
    /// Stiff accuracy of the implicit part.
    pub stiffly_accurate: bool,
    pub globally_stiffly_accurate: bool,
    pub satisfied_order: usize,
    /// Conditions up to the target order whose residual exceeds [`ORDER_TOL`].
    pub failed_conditions: Vec<ConditionResidual>,
    /// Set when the two halves use different abscissae, so the coupling
    /// conditions are not the simplified `c~ = c` set.
    pub nonstandard_coupling: bool,
}

struct Half<'a> {
    tag: &'static str,
    t: &'a ButcherTableau,
}

fn dot(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}

fn mat_vec(t: &ButcherTableau, v: &[f64]) -> Vec<f64> {
    (0..t.stages).map(|i| dot(t.row(i), v)).collect()
}

fn all_conditions(halves: &[Half<'_>], target: usize) -> Vec<ConditionResidual> {
    let mut out = Vec::new();
    if target >= 1 {
        for w in halves {
            let sum: f64 = w.t.b.iter().sum();
            out.push(ConditionResidual {
                id: format!("sum(b{})=1", w.tag),
                order: 1,
                residual: (sum - 1.0).abs(),
            });
        }
    }
    if target >= 2 {
        for w in halves {
            for x in halves {
                out.push(ConditionResidual {
                    id: format!("b{}.c{}=1/2", w.tag, x.tag),
                    order: 2,
                    residual: (dot(&w.t.b, &x.t.c) - 0.5).abs(),
                });
            }
        }
    }
    if target >= 3 {
        for w in halves {
            for (k, x) in halves.iter().enumerate() {
                for y in &halves[k..] {
                    let v: f64 = w
                        .t
                        .b
                        .iter()
                        .zip(x.t.c.iter().zip(&y.t.c))
                        .map(|(b, (cx, cy))| b * cx * cy)
                        .sum();
                    out.push(ConditionResidual {
                        id: format!("b{}.(c{}*c{})=1/3", w.tag, x.tag, y.tag),
                        order: 3,
                        residual: (v - 1.0 / 3.0).abs(),
                    });
                }
            }
        }
        for w in halves {
            for m in halves {
                for x in halves {
                    let v = dot(&w.t.b, &mat_vec(m.t, &x.t.c));
                    out.push(ConditionResidual {
                        id: format!("b{}.A{}.c{}=1/6", w.tag, m.tag, x.tag),
                        order: 3,
                        residual: (v - 1.0 / 6.0).abs(),
                    });
                }
            }
        }
    }
    out
}

fn summarize(conds: Vec<ConditionResidual>, target: usize) -> (usize, Vec<ConditionResidual>) {
    let mut satisfied = 0;
    for k in 1..=target {
        if conds.iter().filter(|c| c.order == k).all(|c| c.residual <= ORDER_TOL) {
            satisfied = k;
        } else {
            break;
        }
    }
    let failed = conds.into_iter().filter(|c| c.residual > ORDER_TOL).collect();
    (satisfied, failed)
}

/// Evaluates every order condition of the IMEX pair up to `target_order`
/// (clamped to 3), including all explicit/implicit coupling combinations.
pub fn check_order_conditions(t: &ImexTableau, target_order: usize) -> PropertyReport {
    let target = target_order.min(3);
    let halves = [
        Half { tag: "~", t: &t.explicit },
        Half { tag: "", t: &t.implicit },
    ];
    let (satisfied_order, failed_conditions) = summarize(all_conditions(&halves, target), target);
    let nonstandard_coupling = t
        .explicit
        .c
        .iter()
        .zip(&t.implicit.c)
        .any(|(a, b)| (a - b).abs() > STRUCT_TOL);
    PropertyReport {
        stiffly_accurate: is_stiffly_accurate(&t.implicit),
        globally_stiffly_accurate: is_globally_stiffly_accurate(t),
        satisfied_order,
        failed_conditions,
        nonstandard_coupling,
    }
}

/// Order conditions of a single (non-additive) tableau.
pub fn check_single_order_conditions(t: &ButcherTableau, target_order: usize) -> PropertyReport {
    let target = target_order.min(3);
    let halves = [Half { tag: "", t }];
    let (satisfied_order, failed_conditions) = summarize(all_conditions(&halves, target), target);
    PropertyReport {
        stiffly_accurate: is_stiffly_accurate(t),
        globally_stiffly_accurate: false,
        satisfied_order,
        failed_conditions,
        nonstandard_coupling: false,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn implicit_euler_is_first_order() {
        let t = ButcherTableau::from_rows(&[vec![1.0]], vec![1.0], vec![1.0]);
        let r = check_single_order_conditions(&t, 3);
        assert_eq!(r.satisfied_order, 1);
        assert!(r.failed_conditions.iter().any(|c| c.id == "b.c=1/2" && (c.residual - 0.5).abs() < 1e-15));
    }

    #[test]
    fn implicit_midpoint_is_second_order() {
        let t = ButcherTableau::from_rows(&[vec![0.5]], vec![1.0], vec![0.5]);
        assert_eq!(check_single_order_conditions(&t, 3).satisfied_order, 2);
        assert_eq!(check_single_order_conditions(&t, 2).satisfied_order, 2);
    }

    #[test]
    fn weights_summing_to_point_nine() {
        let t = ButcherTableau::from_rows(&[vec![0.9]], vec![0.9], vec![0.9]);
        let r = check_single_order_conditions(&t, 3);
        assert_eq!(r.satisfied_order, 0);
        let first = &r.failed_conditions[0];
        assert_eq!(first.order, 1);
        assert!((first.residual - 0.1).abs() < 1e-12);
    }

    #[test]
    fn coupling_flag_for_distinct_abscissae() {
        let t = ImexTableau::builtin("imex-euler").unwrap();
        let r = check_order_conditions(&t, 2);
        assert!(r.nonstandard_coupling);
        assert_eq!(r.satisfied_order, 1);
        let gsa = ImexTableau::builtin("imex-midpoint-trapezoid").unwrap();
        assert!(!check_order_conditions(&gsa, 3).nonstandard_coupling);
    }
}
