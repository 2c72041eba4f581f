//! Bell operators: the inequality left-hand side as a Hermitian 9x9 matrix
//! at fixed settings, so the maximal quantum value over states is its top
//! eigenvalue and the optimal state its top eigenvector.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::Result;
use crate::inequalities::InequalitySpec;
use crate::linalg::{hermitian_eig, kron, CMatrix};
use crate::measurements::ScenarioSettings;
use crate::states::Ket;

/// Eigenvalue gap below which the top eigenspace is treated as degenerate.
const DEGENERACY_GAP: f64 = 1e-9;

/// B = sum coeffs[i][j][k][l] * (Pi_a^i_k x Pi_b^j_l).
#[derive(Debug, Clone)]
pub struct BellOperator {
    matrix: CMatrix,
    label: String,
    settings: ScenarioSettings,
}

impl BellOperator {
    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn settings(&self) -> &ScenarioSettings {
        &self.settings
    }

    /// Expectation <psi|B|psi>.
    pub fn expectation(&self, state: &Ket) -> f64 {
        self.matrix
            .mul_vec(state.vector())
            .inner(state.vector())
            .conj()
            .re
    }
}

/// Top eigenpair of a Bell operator together with the implied violation.
#[derive(Debug, Clone, Serialize)]
pub struct MaxViolation {
    pub lambda_max: f64,
    /// Amount above the classical bound.
    pub violation: f64,
    /// Top eigenvector, global phase fixed so the largest-magnitude
    /// amplitude is real positive.
    pub state: Ket,
    /// True when the top eigenvalue gap is below 1e-9.
    pub degenerate: bool,
}

/// Assemble the Bell operator of `spec` at the given settings.
pub fn build(spec: &InequalitySpec, settings: &ScenarioSettings) -> BellOperator {
    let sets = settings.projector_sets();
    let mut matrix = CMatrix::zeros(9, 9);
    for i in 0..2 {
        for j in 0..2 {
            for k in 0..3 {
                for l in 0..3 {
                    let c = spec.coeffs[i][j][k][l];
                    if c != 0.0 {
                        let term = kron(sets[i].projector(k), sets[2 + j].projector(l))
                            .expect("projectors are 3x3");
                        matrix.add_scaled(&term, c);
                    }
                }
            }
        }
    }
    debug_assert!(matrix.is_hermitian(1e-10));
    BellOperator {
        matrix,
        label: spec.label.clone(),
        settings: settings.clone(),
    }
}

/// Maximal quantum value of `spec` at fixed settings over all states: the
/// top eigenpair of the Bell operator.
pub fn max_violation_state(
    spec: &InequalitySpec,
    settings: &ScenarioSettings,
) -> Result<MaxViolation> {
    let operator = build(spec, settings);
    let decomp = hermitian_eig(operator.matrix(), 1e-9)?;
    let n = decomp.eigenvalues.len();
    let lambda_max = decomp.eigenvalues[n - 1];

    // Collect the (near-)top eigenspace basis returned by the solver and
    // pick the lexicographically largest absolute-amplitude sequence, so
    // degenerate spectra still give a deterministic representative.
    let mut candidates: Vec<usize> = (0..n)
        .filter(|&i| lambda_max - decomp.eigenvalues[i] < DEGENERACY_GAP)
        .collect();
    let degenerate = candidates.len() > 1;
    candidates.sort_by(|&a, &b| {
        let abs_a: Vec<f64> = decomp.eigenvectors[a]
            .entries()
            .iter()
            .map(|z| z.norm())
            .collect();
        let abs_b: Vec<f64> = decomp.eigenvectors[b]
            .entries()
            .iter()
            .map(|z| z.norm())
            .collect();
        abs_b
            .iter()
            .zip(&abs_a)
            .map(|(x, y)| x.total_cmp(y))
            .find(|o| o.is_ne())
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let vector = &decomp.eigenvectors[candidates[0]];

    // Global phase convention: largest-magnitude amplitude real positive.
    let lead = vector
        .entries()
        .iter()
        .enumerate()
        .max_by(|(_, a), (_, b)| a.norm().total_cmp(&b.norm()))
        .map(|(i, _)| i)
        .unwrap_or(0);
    let lead_amp = vector.entries()[lead];
    let phase = if lead_amp.norm() > 0.0 {
        lead_amp.conj() / lead_amp.norm()
    } else {
        Complex64::ONE
    };
    let fixed = vector.scale(phase).normalized()?;
    let state = Ket::new(fixed.entries().to_vec())?;

    Ok(MaxViolation {
        lambda_max,
        violation: lambda_max - spec.bound,
        state,
        degenerate,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::inequalities::{cglmp, evaluate, gwi_eq3, InequalitySpec};
    use crate::measurements::{joint_prob_table, ObservableKind, ScenarioSettings};
    use crate::states::{DensityMatrix, Ket};
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::TAU;

    fn random_settings(rng: &mut ChaCha8Rng, kind: ObservableKind) -> ScenarioSettings {
        let dim = if kind == ObservableKind::SixPort {
            12
        } else {
            8
        };
        let coords: Vec<f64> = (0..dim).map(|_| rng.random_range(0.0..TAU)).collect();
        ScenarioSettings::from_coords(kind, &coords).unwrap()
    }

    fn random_ket(rng: &mut ChaCha8Rng) -> Ket {
        let amps: Vec<Complex64> = (0..9)
            .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
            .collect();
        Ket::from_unnormalized(amps).unwrap()
    }

    #[test]
    fn zero_spec_gives_zero_operator() {
        let spec = InequalitySpec {
            label: "ZERO".into(),
            bound: 0.0,
            coeffs: [[[[0.0; 3]; 3]; 2]; 2],
        };
        let mut rng = ChaCha8Rng::seed_from_u64(51);
        let settings = random_settings(&mut rng, ObservableKind::SixPort);
        let op = build(&spec, &settings);
        assert_eq!(op.matrix().max_abs(), 0.0);
        let top = max_violation_state(&spec, &settings).unwrap();
        assert!(top.lambda_max.abs() < 1e-12);
        assert!(top.degenerate);
    }

    #[test]
    fn expectation_matches_table_evaluation() {
        let mut rng = ChaCha8Rng::seed_from_u64(52);
        let specs = [gwi_eq3(), cglmp()];
        for trial in 0..200 {
            let spec = &specs[trial % 2];
            let kind = if trial % 4 < 2 {
                ObservableKind::SixPort
            } else {
                ObservableKind::Spin
            };
            let settings = random_settings(&mut rng, kind);
            let psi = random_ket(&mut rng);
            let op = build(spec, &settings);
            let via_operator = op.expectation(&psi);
            let table = joint_prob_table(&DensityMatrix::from_pure(&psi), &settings).unwrap();
            let via_table = evaluate(spec, &table);
            assert!(
                (via_operator - via_table).abs() < 1e-10,
                "{} mismatch {via_operator} vs {via_table}",
                spec.label
            );
        }
    }

    #[test]
    fn uniform_mixture_expectation_is_trace_over_nine() {
        let mut rng = ChaCha8Rng::seed_from_u64(53);
        for spec in [gwi_eq3(), cglmp()] {
            let settings = random_settings(&mut rng, ObservableKind::SixPort);
            let op = build(&spec, &settings);
            let trace = op.matrix().trace().re;
            assert!((trace / 9.0 - spec.coefficient_sum() / 9.0).abs() < 1e-10);
        }
    }

    #[test]
    fn lambda_max_dominates_state_values() {
        let mut rng = ChaCha8Rng::seed_from_u64(54);
        let spec = gwi_eq3();
        for _ in 0..20 {
            let settings = random_settings(&mut rng, ObservableKind::Spin);
            let top = max_violation_state(&spec, &settings).unwrap();
            for _ in 0..20 {
                let psi = random_ket(&mut rng);
                let table = joint_prob_table(&DensityMatrix::from_pure(&psi), &settings).unwrap();
                assert!(evaluate(&spec, &table) <= top.lambda_max + 1e-10);
            }
            // The eigenstate itself attains lambda_max.
            let table = joint_prob_table(&DensityMatrix::from_pure(&top.state), &settings).unwrap();
            assert!((evaluate(&spec, &table) - top.lambda_max).abs() < 1e-9);
        }
    }

    #[test]
    fn spectrum_invariant_under_consistent_party_swap() {
        let mut rng = ChaCha8Rng::seed_from_u64(55);
        for trial in 0..20 {
            let spec = if trial % 2 == 0 { gwi_eq3() } else { cglmp() };
            let swapped_spec = InequalitySpec {
                label: format!("{}-swapped", spec.label),
                bound: spec.bound,
                coeffs: {
                    let mut c = [[[[0.0; 3]; 3]; 2]; 2];
                    for i in 0..2 {
                        for j in 0..2 {
                            for k in 0..3 {
                                for l in 0..3 {
                                    c[j][i][l][k] = spec.coeffs[i][j][k][l];
                                }
                            }
                        }
                    }
                    c
                },
            };

            // Spin observables are identical on both parties, so swapping
            // the parties just swaps the settings lists. For six-port the
            // second party carries the conjugated Fourier transform, so the
            // consistent swap also negates all phases (B -> conj(B) up to
            // the party swap, and conjugation preserves a Hermitian
            // spectrum).
            let (settings, swapped) = if trial % 4 < 2 {
                let coords: Vec<f64> = (0..8).map(|_| rng.random_range(0.0..TAU)).collect();
                let settings =
                    ScenarioSettings::from_coords(ObservableKind::Spin, &coords).unwrap();
                let mut sw = coords[4..].to_vec();
                sw.extend_from_slice(&coords[..4]);
                (
                    settings,
                    ScenarioSettings::from_coords(ObservableKind::Spin, &sw).unwrap(),
                )
            } else {
                let coords: Vec<f64> = (0..12).map(|_| rng.random_range(0.0..TAU)).collect();
                let settings =
                    ScenarioSettings::from_coords(ObservableKind::SixPort, &coords).unwrap();
                let mut sw: Vec<f64> = coords[6..].iter().map(|c| -c).collect();
                sw.extend(coords[..6].iter().map(|c| -c));
                (
                    settings,
                    ScenarioSettings::from_coords(ObservableKind::SixPort, &sw).unwrap(),
                )
            };

            let spec_eig = hermitian_eig(build(&spec, &settings).matrix(), 1e-9).unwrap();
            let swap_eig = hermitian_eig(build(&swapped_spec, &swapped).matrix(), 1e-9).unwrap();
            for (a, b) in spec_eig.eigenvalues.iter().zip(&swap_eig.eigenvalues) {
                assert!((a - b).abs() < 1e-9, "{} spectra differ", spec.label);
            }
        }
    }

    #[test]
    fn phase_convention_makes_lead_amplitude_real_positive() {
        let mut rng = ChaCha8Rng::seed_from_u64(56);
        let spec = cglmp();
        let settings = random_settings(&mut rng, ObservableKind::SixPort);
        let top = max_violation_state(&spec, &settings).unwrap();
        let lead = top
            .state
            .amplitudes()
            .iter()
            .max_by(|a, b| a.norm().total_cmp(&b.norm()))
            .unwrap();
        assert!(lead.im.abs() < 1e-12);
        assert!(lead.re > 0.0);
    }
}
