//! Coefficient-tensor representations of the GWI family, the CGLMP
//! inequality and the Wu inequality, evaluation on probability tables, and
//! exhaustive certification of classical bounds.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measurements::JointProbTable;

/// Coefficient tensor indexed like a `JointProbTable`:
/// `[a_setting][b_setting][a_outcome][b_outcome]`.
pub type CoeffTensor = [[[[f64; 3]; 3]; 2]; 2];

/// One linear local-realist inequality: sum(coeffs * p) <= bound.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InequalitySpec {
    pub label: String,
    pub bound: f64,
    pub coeffs: CoeffTensor,
}

impl InequalitySpec {
    pub fn coefficient_sum(&self) -> f64 {
        self.coeffs.iter().flatten().flatten().flatten().sum()
    }
}

/// Exhaustively certified classical maximum of an inequality.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LhvCertificate {
    pub max_value: f64,
    /// Deterministic outcome assignment (a1, a2, b1, b2) attaining the
    /// maximum, each an outcome index in {0, 1, 2}; lexicographically first
    /// among ties.
    pub argmax_strategy: [usize; 4],
}

/// Outcome label permutations (m1, m2, m3) in the fixed enumeration order,
/// written over the label alphabet (+1, 0, -1) as indices (0, 1, 2).
const PERMUTATIONS: [[usize; 3]; 6] = [
    [0, 1, 2], // (+1, 0, -1)
    [0, 2, 1], // (+1, -1, 0)
    [1, 0, 2], // (0, +1, -1)
    [1, 2, 0], // (0, -1, +1)
    [2, 0, 1], // (-1, +1, 0)
    [2, 1, 0], // (-1, 0, +1)
];

fn permutation_name(perm: &[usize; 3]) -> String {
    let sym = |i: usize| ['+', '0', '-'][i];
    format!("({},{},{})", sym(perm[0]), sym(perm[1]), sym(perm[2]))
}

/// One 8-term template entry: (sign, a-setting, b-setting, a-outcome slot,
/// b-outcome slot), where outcome slots 0/1/2 select m1/m2/m3 of the
/// permutation.
type Term = (f64, usize, usize, usize, usize);

/// First 8-term GWI template.
const TEMPLATE_A: [Term; 8] = [
    (1.0, 0, 0, 0, 1),
    (-1.0, 1, 0, 0, 1),
    (-1.0, 1, 0, 0, 0),
    (-1.0, 0, 1, 0, 1),
    (-1.0, 0, 1, 0, 0),
    (-1.0, 1, 1, 2, 2),
    (-1.0, 1, 1, 1, 2),
    (1.0, 0, 0, 0, 0),
];

/// Second 8-term GWI template; the reference inequality is this template at
/// permutation (0, -, +).
const TEMPLATE_B: [Term; 8] = [
    (1.0, 0, 0, 0, 1),
    (-1.0, 1, 0, 0, 1),
    (-1.0, 1, 0, 1, 1),
    (-1.0, 0, 1, 0, 1),
    (-1.0, 0, 1, 1, 1),
    (-1.0, 1, 1, 2, 2),
    (-1.0, 1, 1, 2, 0),
    (1.0, 0, 0, 1, 1),
];

/// Setting-interchange variants: swap a1<->a2, b1<->b2, or both.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Interchange {
    None,
    A,
    B,
    Both,
}

impl Interchange {
    const ALL: [Interchange; 4] = [
        Interchange::None,
        Interchange::A,
        Interchange::B,
        Interchange::Both,
    ];

    fn suffix(&self) -> &'static str {
        match self {
            Interchange::None => "",
            Interchange::A => "-a",
            Interchange::B => "-b",
            Interchange::Both => "-ab",
        }
    }

    fn apply(&self, i: usize, j: usize) -> (usize, usize) {
        match self {
            Interchange::None => (i, j),
            Interchange::A => (1 - i, j),
            Interchange::B => (i, 1 - j),
            Interchange::Both => (1 - i, 1 - j),
        }
    }
}

fn build_gwi(template: &[Term; 8], perm: &[usize; 3], interchange: Interchange) -> CoeffTensor {
    let mut coeffs = [[[[0.0; 3]; 3]; 2]; 2];
    for &(sign, i, j, a_slot, b_slot) in template {
        let (i, j) = interchange.apply(i, j);
        coeffs[i][j][perm[a_slot]][perm[b_slot]] += sign;
    }
    coeffs
}

/// All 48 generalized Wigner inequalities: 2 templates x 6 label
/// permutations x 4 setting interchanges, classical bound 0 each. No
/// deduplication is performed; labels encode the construction.
pub fn enumerate_gwi() -> Vec<InequalitySpec> {
    let mut specs = Vec::with_capacity(48);
    for interchange in Interchange::ALL {
        for (t_name, template) in [("A", &TEMPLATE_A), ("B", &TEMPLATE_B)] {
            for perm in &PERMUTATIONS {
                specs.push(InequalitySpec {
                    label: format!(
                        "GWI-{t_name}-{}{}",
                        permutation_name(perm),
                        interchange.suffix()
                    ),
                    bound: 0.0,
                    coeffs: build_gwi(template, perm, interchange),
                });
            }
        }
    }
    specs
}

/// The reference GWI, written out term by term:
/// p(a1=0, b1=-) - p(a2=0, b1=-) - p(a2=-, b1=-) - p(a1=0, b2=-)
/// - p(a1=-, b2=-) - p(a2=+, b2=+) - p(a2=+, b2=0) + p(a1=-, b1=-) <= 0.
pub fn gwi_eq3() -> InequalitySpec {
    let mut coeffs = [[[[0.0; 3]; 3]; 2]; 2];
    // Outcome indices: + -> 0, 0 -> 1, - -> 2.
    coeffs[0][0][1][2] = 1.0;
    coeffs[1][0][1][2] = -1.0;
    coeffs[1][0][2][2] = -1.0;
    coeffs[0][1][1][2] = -1.0;
    coeffs[0][1][2][2] = -1.0;
    coeffs[1][1][0][0] = -1.0;
    coeffs[1][1][0][1] = -1.0;
    coeffs[0][0][2][2] = 1.0;
    InequalitySpec {
        label: "GWI-EQ3".into(),
        bound: 0.0,
        coeffs,
    }
}

/// The CGLMP inequality for three outcomes:
///
/// I3 = P(a1=b1) + P(b1=a2+1) + P(a2=b2) + P(b2=a1)
///    - P(a1=b1-1) - P(b1=a2) - P(a2=b2-1) - P(b2=a1-1) <= 2,
///
/// with P(a=b+k) expanded over outcome digits mod 3 (digit = table index).
pub fn cglmp() -> InequalitySpec {
    let mut coeffs = [[[[0.0; 3]; 3]; 2]; 2];
    for d in 0..3 {
        // P(a1 = b1): settings (1,1), equal digits.
        coeffs[0][0][d][d] += 1.0;
        // P(b1 = a2 + 1): settings (2,1), b digit one above a.
        coeffs[1][0][d][(d + 1) % 3] += 1.0;
        // P(a2 = b2): settings (2,2), equal digits.
        coeffs[1][1][d][d] += 1.0;
        // P(b2 = a1): settings (1,2), equal digits.
        coeffs[0][1][d][d] += 1.0;
        // -P(a1 = b1 - 1): a digit one below b.
        coeffs[0][0][d][(d + 1) % 3] -= 1.0;
        // -P(b1 = a2): settings (2,1), equal digits.
        coeffs[1][0][d][d] -= 1.0;
        // -P(a2 = b2 - 1).
        coeffs[1][1][d][(d + 1) % 3] -= 1.0;
        // -P(b2 = a1 - 1): b digit one below a.
        coeffs[0][1][d][(d + 2) % 3] -= 1.0;
    }
    InequalitySpec {
        label: "CGLMP".into(),
        bound: 2.0,
        coeffs,
    }
}

/// The Wu inequality:
/// S = P(a1+, b1+) - P(a1+, b2+) + P(a2+, b2+) + P(a2 0, b1 0)
///   + P(a2 0, b1 -) + P(a2 -, b1 0) + P(a2 -, b1 -) <= 1.
pub fn wu() -> InequalitySpec {
    let mut coeffs = [[[[0.0; 3]; 3]; 2]; 2];
    coeffs[0][0][0][0] = 1.0;
    coeffs[0][1][0][0] = -1.0;
    coeffs[1][1][0][0] = 1.0;
    coeffs[1][0][1][1] = 1.0;
    coeffs[1][0][1][2] = 1.0;
    coeffs[1][0][2][1] = 1.0;
    coeffs[1][0][2][2] = 1.0;
    InequalitySpec {
        label: "WU".into(),
        bound: 1.0,
        coeffs,
    }
}

/// Look up an inequality by CLI-style name: `gwi-eq3`, `cglmp`, `wu`, or
/// `gwi:<label>` with a label from `enumerate_gwi`.
pub fn by_name(name: &str) -> Result<InequalitySpec> {
    match name.to_ascii_lowercase().as_str() {
        "gwi-eq3" => Ok(gwi_eq3()),
        "cglmp" => Ok(cglmp()),
        "wu" => Ok(wu()),
        _ => {
            if let Some(label) = name.strip_prefix("gwi:") {
                enumerate_gwi()
                    .into_iter()
                    .find(|s| s.label.eq_ignore_ascii_case(label))
                    .ok_or_else(|| Error::UnknownInequality(name.into()))
            } else {
                Err(Error::UnknownInequality(name.into()))
            }
        }
    }
}

/// Left-hand side of the inequality on a probability table.
pub fn evaluate(spec: &InequalitySpec, table: &JointProbTable) -> f64 {
    let mut acc = 0.0;
    for i in 0..2 {
        for j in 0..2 {
            for k in 0..3 {
                for l in 0..3 {
                    let c = spec.coeffs[i][j][k][l];
                    if c != 0.0 {
                        acc += c * table.get(i, j, k, l);
                    }
                }
            }
        }
    }
    acc
}

/// Amount by which the table beats the classical bound.
pub fn violation(spec: &InequalitySpec, table: &JointProbTable) -> f64 {
    evaluate(spec, table) - spec.bound
}

/// Exact classical maximum over all 3^4 = 81 deterministic outcome
/// assignments; ties resolve to the lexicographically first strategy.
pub fn lhv_max(spec: &InequalitySpec) -> LhvCertificate {
    let mut best = f64::NEG_INFINITY;
    let mut best_strategy = [0usize; 4];
    for a1 in 0..3 {
        for a2 in 0..3 {
            for b1 in 0..3 {
                for b2 in 0..3 {
                    let a = [a1, a2];
                    let b = [b1, b2];
                    let mut value = 0.0;
                    for i in 0..2 {
                        for j in 0..2 {
                            value += spec.coeffs[i][j][a[i]][b[j]];
                        }
                    }
                    if value > best {
                        best = value;
                        best_strategy = [a1, a2, b1, b2];
                    }
                }
            }
        }
    }
    LhvCertificate {
        max_value: best,
        argmax_strategy: best_strategy,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measurements::{joint_prob_table, ObservableKind, ScenarioSettings};
    use crate::states::{DensityMatrix, Ket};
    use num_complex::Complex64;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::TAU;

    #[test]
    fn enumeration_counts_48_with_unique_labels() {
        let specs = enumerate_gwi();
        assert_eq!(specs.len(), 48);
        let mut labels: Vec<&str> = specs.iter().map(|s| s.label.as_str()).collect();
        labels.sort_unstable();
        labels.dedup();
        assert_eq!(labels.len(), 48);
        assert!(specs.iter().all(|s| s.bound == 0.0));
    }

    #[test]
    fn every_gwi_has_coefficient_sum_minus_four() {
        for spec in enumerate_gwi() {
            assert_eq!(spec.coefficient_sum(), -4.0, "{}", spec.label);
        }
        assert_eq!(gwi_eq3().coefficient_sum(), -4.0);
    }

    #[test]
    fn reference_inequality_appears_in_enumeration() {
        // The hand-written Eq-3 tensor is template B at permutation
        // (0, -, +) with no interchange.
        let reference = gwi_eq3();
        let specs = enumerate_gwi();
        let matching: Vec<&InequalitySpec> = specs
            .iter()
            .filter(|s| s.coeffs == reference.coeffs)
            .collect();
        assert!(
            matching.iter().any(|s| s.label == "GWI-B-(0,-,+)"),
            "matching labels: {:?}",
            matching.iter().map(|s| &s.label).collect::<Vec<_>>()
        );
    }

    #[test]
    fn cglmp_tensor_structure() {
        let spec = cglmp();
        assert_eq!(spec.bound, 2.0);
        for d in 0..3 {
            assert_eq!(spec.coeffs[0][0][d][d], 1.0);
        }
        assert_eq!(spec.coefficient_sum(), 0.0);
        assert!((evaluate(&spec, &JointProbTable::uniform())).abs() < 1e-15);
    }

    #[test]
    fn wu_tensor_structure() {
        let spec = wu();
        assert_eq!(spec.bound, 1.0);
        assert_eq!(spec.coeffs[1][0][1][1], 1.0); // P(a2=0, b1=0)
        for j in 0..2 {
            for l in 0..3 {
                assert_eq!(spec.coeffs[0][j][2][l], 0.0); // no a1=- terms
            }
        }
        let uniform_value = evaluate(&spec, &JointProbTable::uniform());
        assert!((uniform_value - 5.0 / 9.0).abs() < 1e-15);
    }

    #[test]
    fn gwi_on_uniform_table() {
        let uniform = JointProbTable::uniform();
        for spec in enumerate_gwi() {
            assert!((evaluate(&spec, &uniform) - (-4.0 / 9.0)).abs() < 1e-14);
        }
    }

    #[test]
    fn lhv_bounds_are_exact() {
        for spec in enumerate_gwi() {
            let cert = lhv_max(&spec);
            assert_eq!(cert.max_value, 0.0, "{}", spec.label);
        }
        assert_eq!(lhv_max(&cglmp()).max_value, 2.0);
        assert_eq!(lhv_max(&wu()).max_value, 1.0);
    }

    #[test]
    fn lhv_certificate_is_self_consistent() {
        for spec in [gwi_eq3(), cglmp(), wu()] {
            let cert = lhv_max(&spec);
            let [a1, a2, b1, b2] = cert.argmax_strategy;
            let table = JointProbTable::deterministic([a1, a2], [b1, b2]);
            assert_eq!(evaluate(&spec, &table), cert.max_value);
        }
    }

    #[test]
    fn evaluate_is_linear_in_the_table() {
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        let spec = cglmp();
        for _ in 0..100 {
            let t1 = JointProbTable::deterministic(
                [rng.random_range(0..3), rng.random_range(0..3)],
                [rng.random_range(0..3), rng.random_range(0..3)],
            );
            let t2 = JointProbTable::uniform();
            let alpha: f64 = rng.random_range(0.0..1.0);
            let mixed = t1.mix(&t2, alpha);
            let lhs = evaluate(&spec, &mixed);
            let rhs = alpha * evaluate(&spec, &t1) + (1.0 - alpha) * evaluate(&spec, &t2);
            assert!((lhs - rhs).abs() < 1e-12);
        }
    }

    #[test]
    fn product_states_never_violate() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let specs = enumerate_gwi();
        for trial in 0..1000 {
            // Random pure product state |u> x |v>.
            let u: Vec<Complex64> = (0..3)
                .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
                .collect();
            let v: Vec<Complex64> = (0..3)
                .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
                .collect();
            let mut amps = vec![Complex64::ZERO; 9];
            for a in 0..3 {
                for b in 0..3 {
                    amps[3 * a + b] = u[a] * v[b];
                }
            }
            let ket = match Ket::from_unnormalized(amps) {
                Ok(k) => k,
                Err(_) => continue, // astronomically unlikely zero draw
            };
            let rho = DensityMatrix::from_pure(&ket);
            let kind = if trial % 2 == 0 {
                ObservableKind::SixPort
            } else {
                ObservableKind::Spin
            };
            let dim = if kind == ObservableKind::SixPort {
                12
            } else {
                8
            };
            let coords: Vec<f64> = (0..dim).map(|_| rng.random_range(0.0..TAU)).collect();
            let settings = ScenarioSettings::from_coords(kind, &coords).unwrap();
            let table = joint_prob_table(&rho, &settings).unwrap();
            let spec = &specs[trial % specs.len()];
            assert!(
                evaluate(spec, &table) <= spec.bound + 1e-10,
                "{} violated by a product state",
                spec.label
            );
        }
    }

    #[test]
    fn spec_json_round_trip() {
        let spec = cglmp();
        let json = serde_json::to_string(&spec).unwrap();
        let back: InequalitySpec = serde_json::from_str(&json).unwrap();
        assert_eq!(spec, back);
    }

    #[test]
    fn lookup_by_name() {
        assert_eq!(by_name("gwi-eq3").unwrap().label, "GWI-EQ3");
        assert_eq!(by_name("cglmp").unwrap().label, "CGLMP");
        assert_eq!(by_name("wu").unwrap().label, "WU");
        assert_eq!(by_name("gwi:GWI-B-(0,-,+)").unwrap().label, "GWI-B-(0,-,+)");
        assert!(by_name("gwi:nope").is_err());
        assert!(by_name("chsh").is_err());
    }
}
