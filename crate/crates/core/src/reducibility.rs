//! Outcome-grouping reducibility checker: decides whether an inequality's
//! coefficient tensor fits the two-outcome form obtained by merging a pair
//! of outcomes, for each of the three possible pairings.
//!
//! Merging outcomes x and y is possible only when, for every settings pair,
//! all coefficients inside each merged cell agree: the two coefficients of
//! a singleton-times-grouped cell and all four of the grouped-times-grouped
//! block. Every violated equality is reported as an obstruction.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::inequalities::InequalitySpec;
use crate::measurements::outcome_symbol;

/// Tolerance for coefficient equality; shipped specs are integer-valued so
/// this only matters for user-supplied real tensors.
const COEFF_TOL: f64 = 1e-12;

/// An unordered pair of outcome indices to merge.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Grouping {
    /// The two merged outcome indices, ascending.
    pub pair: (usize, usize),
}

impl Grouping {
    pub fn new(first: usize, second: usize) -> Result<Self> {
        if first > 2 || second > 2 || first == second {
            return Err(Error::InvalidState(format!(
                "grouping needs two distinct outcome indices in 0..3, got ({first}, {second})"
            )));
        }
        Ok(Self {
            pair: (first.min(second), first.max(second)),
        })
    }

    /// The outcome left alone by this grouping.
    pub fn singleton(&self) -> usize {
        3 - self.pair.0 - self.pair.1
    }

    pub fn label(&self) -> String {
        format!(
            "{{{},{}}}",
            outcome_symbol(self.pair.0),
            outcome_symbol(self.pair.1)
        )
    }
}

/// The three possible outcome pairings, in a fixed order.
pub fn all_groupings() -> [Grouping; 3] {
    [
        Grouping { pair: (1, 2) }, // merge 0 and -
        Grouping { pair: (0, 1) }, // merge + and 0
        Grouping { pair: (0, 2) }, // merge + and -
    ]
}

/// One violated coefficient equality.
#[derive(Debug, Clone, Serialize)]
pub struct Obstruction {
    /// 1-based (a-setting, b-setting) pair.
    pub setting_pair: (usize, usize),
    /// Human-readable cell description.
    pub cell: String,
    /// The two coefficients that had to be equal.
    pub values: (f64, f64),
}

/// Result of checking one grouping.
#[derive(Debug, Clone, Serialize)]
pub struct GroupingReport {
    pub grouping: Grouping,
    pub reducible: bool,
    pub obstructions: Vec<Obstruction>,
}

impl GroupingReport {
    /// Appendix-style bullet list of the obstructions.
    pub fn to_text(&self, label: &str) -> String {
        let mut out = format!(
            "{label}, grouping {}: {}\n",
            self.grouping.label(),
            if self.reducible {
                "reducible"
            } else {
                "NOT reducible"
            }
        );
        for o in &self.obstructions {
            out.push_str(&format!(
                "  * (a{},b{}) {}: coefficients {} and {} differ\n",
                o.setting_pair.0, o.setting_pair.1, o.cell, o.values.0, o.values.1
            ));
        }
        out
    }
}

/// Check whether `spec` fits the two-outcome form for one grouping.
pub fn check_grouping(spec: &InequalitySpec, grouping: Grouping) -> GroupingReport {
    let (x, y) = grouping.pair;
    let mut obstructions = Vec::new();
    for i in 0..2 {
        for j in 0..2 {
            // B-side merged cells: for every a-outcome k the coefficients at
            // (k, x) and (k, y) must agree.
            for k in 0..3 {
                let cx = spec.coeffs[i][j][k][x];
                let cy = spec.coeffs[i][j][k][y];
                if (cx - cy).abs() > COEFF_TOL {
                    let kind = if k == grouping.singleton() {
                        "singleton x grouped"
                    } else {
                        "grouped x grouped"
                    };
                    obstructions.push(Obstruction {
                        setting_pair: (i + 1, j + 1),
                        cell: format!(
                            "{kind} cell (a={}, b in {})",
                            outcome_symbol(k),
                            grouping.label()
                        ),
                        values: (cx, cy),
                    });
                }
            }
            // A-side merged cells: for every b-outcome l the coefficients at
            // (x, l) and (y, l) must agree.
            for l in 0..3 {
                let cx = spec.coeffs[i][j][x][l];
                let cy = spec.coeffs[i][j][y][l];
                if (cx - cy).abs() > COEFF_TOL {
                    let kind = if l == grouping.singleton() {
                        "grouped x singleton"
                    } else {
                        "grouped x grouped"
                    };
                    obstructions.push(Obstruction {
                        setting_pair: (i + 1, j + 1),
                        cell: format!(
                            "{kind} cell (a in {}, b={})",
                            grouping.label(),
                            outcome_symbol(l)
                        ),
                        values: (cx, cy),
                    });
                }
            }
        }
    }
    GroupingReport {
        grouping,
        reducible: obstructions.is_empty(),
        obstructions,
    }
}

/// True (with per-grouping reports) when any of the three pairings reduces
/// the inequality to a two-outcome form.
pub fn is_chsh_reducible(spec: &InequalitySpec) -> (bool, Vec<GroupingReport>) {
    let reports: Vec<GroupingReport> = all_groupings()
        .into_iter()
        .map(|g| check_grouping(spec, g))
        .collect();
    (reports.iter().any(|r| r.reducible), reports)
}
