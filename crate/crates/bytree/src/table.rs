//! Table runner: checks a symbolic Tamagawa expression of a fixture
//! against an expected formula and the lattice oracle by sampling every
//! variable over {1,2,3,4} (restricted to its declared parity).

use std::collections::BTreeMap;

use serde::Serialize;

use crate::forest::{BYForest, Parity};
use crate::formula;
use crate::oracle;
use crate::tamagawa;

#[derive(Debug, Serialize)]
pub struct RowReport {
    pub name: String,
    pub symbolic: String,
    pub expected: String,
    pub points_checked: usize,
    pub pass: bool,
    pub detail: Option<String>,
}

/// All sample points: the cartesian product of {1,2,3,4} per variable,
/// filtered by declared parity (even variables take {2,4}, odd {1,3}).
pub fn sample_points(p: &BYForest) -> Vec<BTreeMap<String, u64>> {
    let vars = p.variables();
    let mut points = vec![BTreeMap::new()];
    for (v, parity) in vars {
        let choices: &[u64] = match parity {
            Parity::Even => &[2, 4],
            Parity::Odd => &[1, 3],
            Parity::Unknown => &[1, 2, 3, 4],
        };
        let mut next = Vec::with_capacity(points.len() * choices.len());
        for pt in &points {
            for &c in choices {
                let mut q = pt.clone();
                q.insert(v.clone(), c);
                next.push(q);
            }
        }
        points = next;
    }
    points
}

/// Compare the symbolic Tamagawa number of `forest` with `expected` and
/// the numeric oracle on the full sample grid.
pub fn check_row(name: &str, forest: &BYForest, expected: &str) -> RowReport {
    let fail = |symbolic: String, detail: String| RowReport {
        name: name.to_string(),
        symbolic,
        expected: expected.to_string(),
        points_checked: 0,
        pass: false,
        detail: Some(detail),
    };
    let expr = match tamagawa::tamagawa_symbolic(forest) {
        Ok(e) => e,
        Err(e) => return fail("<error>".into(), e.to_string()),
    };
    let formula = match formula::parse(expected) {
        Ok(f) => f,
        Err(e) => return fail(expr.to_string(), e.to_string()),
    };
    let points = sample_points(forest);
    for pt in &points {
        let got = match expr.eval(pt) {
            Ok(v) => v,
            Err(e) => return fail(expr.to_string(), format!("eval at {pt:?}: {e}")),
        };
        let want = match formula.eval(pt) {
            Ok(v) => v,
            Err(e) => return fail(expr.to_string(), format!("formula at {pt:?}: {e}")),
        };
        if got != want {
            return fail(
                expr.to_string(),
                format!("at {pt:?}: symbolic gives {got}, expected formula gives {want}"),
            );
        }
        let concrete = match forest.substitute(pt) {
            Ok(c) => c,
            Err(e) => return fail(expr.to_string(), format!("substitute at {pt:?}: {e}")),
        };
        match oracle::tamagawa_oracle(&concrete) {
            Ok(o) if o == got => {}
            Ok(o) => {
                return fail(
                    expr.to_string(),
                    format!("at {pt:?}: oracle gives {o}, symbolic gives {got}"),
                )
            }
            Err(e) => return fail(expr.to_string(), format!("oracle at {pt:?}: {e}")),
        }
    }
    RowReport {
        name: name.to_string(),
        symbolic: expr.to_string(),
        expected: expected.to_string(),
        points_checked: points.len(),
        pass: true,
        detail: None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::genus2;

    #[test]
    fn star_row_passes() {
        let rep = check_row("star", &genus2::star_fixture(), genus2::STAR_EXPECTED);
        assert!(rep.pass, "{:?}", rep.detail);
        assert_eq!(rep.symbolic, "a*b + a*c + 2*b*c");
        assert_eq!(rep.points_checked, 64);
    }
}
