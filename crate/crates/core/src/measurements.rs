//! Trichotomic measurement models and joint probability tables.
//!
//! Two observable families are implemented. Six-port beam-splitter
//! observables apply per-mode phase shifts followed by a three-mode discrete
//! Fourier transform (conjugated on the second party) and detect the output
//! port. Spin-1 component observables project onto the eigenstates of
//! n.S along an arbitrary direction. Both produce three rank-1 orthogonal
//! projectors; outcome labels (+1, 0, -1) map to table indices (0, 1, 2).

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::CMatrix;
use crate::states::DensityMatrix;

/// Outcome labels by table index: index 0 <-> +1, 1 <-> 0, 2 <-> -1.
pub const OUTCOME_LABELS: [i32; 3] = [1, 0, -1];

/// Printable outcome label for a table index.
pub fn outcome_symbol(index: usize) -> char {
    ['+', '0', '-'][index]
}

/// Phase triple for one six-port observable, in radians.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SixPortSetting {
    phases: [f64; 3],
}

impl SixPortSetting {
    pub fn new(phases: [f64; 3]) -> Result<Self> {
        if phases.iter().any(|p| !p.is_finite()) {
            return Err(Error::NonFinite("six-port phase"));
        }
        Ok(Self { phases })
    }

    /// Wraps each phase into [0, 2pi).
    pub fn wrapped(phases: [f64; 3]) -> Self {
        Self {
            phases: [
                wrap_angle(phases[0]),
                wrap_angle(phases[1]),
                wrap_angle(phases[2]),
            ],
        }
    }

    pub fn phases(&self) -> [f64; 3] {
        self.phases
    }
}

/// Measurement direction (theta, phi) for one spin-1 observable.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpinSetting {
    theta: f64,
    phi: f64,
}

impl SpinSetting {
    pub fn new(theta: f64, phi: f64) -> Result<Self> {
        if !theta.is_finite() || !phi.is_finite() {
            return Err(Error::NonFinite("spin angle"));
        }
        if !(0.0..=PI).contains(&theta) {
            return Err(Error::OutOfRange {
                name: "theta",
                value: theta,
                min: 0.0,
                max: PI,
            });
        }
        if !(0.0..=TAU).contains(&phi) {
            return Err(Error::OutOfRange {
                name: "phi",
                value: phi,
                min: 0.0,
                max: TAU,
            });
        }
        Ok(Self { theta, phi })
    }

    /// Folds arbitrary finite angles into the domain: theta is reflected
    /// into [0, pi], phi wrapped into [0, 2pi).
    pub fn folded(theta: f64, phi: f64) -> Self {
        Self {
            theta: fold_polar(theta),
            phi: wrap_angle(phi),
        }
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn phi(&self) -> f64 {
        self.phi
    }
}

pub(crate) fn wrap_angle(x: f64) -> f64 {
    let mut y = x % TAU;
    if y < 0.0 {
        y += TAU;
    }
    y
}

pub(crate) fn fold_polar(theta: f64) -> f64 {
    let mut t = wrap_angle(theta);
    if t > PI {
        t = TAU - t;
    }
    t
}

/// Which party a six-port observable belongs to. The Fourier transform is
/// conjugated on side B.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    A,
    B,
}

/// Observable family tag.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ObservableKind {
    SixPort,
    Spin,
}

impl ObservableKind {
    pub fn name(&self) -> &'static str {
        match self {
            ObservableKind::SixPort => "sixport",
            ObservableKind::Spin => "spin",
        }
    }
}

impl std::str::FromStr for ObservableKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "sixport" | "six-port" => Ok(ObservableKind::SixPort),
            "spin" | "spin1" | "spin-1" => Ok(ObservableKind::Spin),
            other => Err(Error::InvalidState(format!(
                "unknown observable kind '{other}', expected sixport or spin"
            ))),
        }
    }
}

/// The four observables of one Bell scenario; all share one kind.
#[derive(Debug, Clone, PartialEq)]
pub enum ScenarioSettings {
    SixPort {
        a1: SixPortSetting,
        a2: SixPortSetting,
        b1: SixPortSetting,
        b2: SixPortSetting,
    },
    Spin {
        a1: SpinSetting,
        a2: SpinSetting,
        b1: SpinSetting,
        b2: SpinSetting,
    },
}

impl ScenarioSettings {
    pub fn kind(&self) -> ObservableKind {
        match self {
            ScenarioSettings::SixPort { .. } => ObservableKind::SixPort,
            ScenarioSettings::Spin { .. } => ObservableKind::Spin,
        }
    }

    /// Projector sets for (a1, a2, b1, b2).
    pub fn projector_sets(&self) -> [ProjectorSet; 4] {
        match self {
            ScenarioSettings::SixPort { a1, a2, b1, b2 } => [
                sixport_projectors(a1, Side::A),
                sixport_projectors(a2, Side::A),
                sixport_projectors(b1, Side::B),
                sixport_projectors(b2, Side::B),
            ],
            ScenarioSettings::Spin { a1, a2, b1, b2 } => [
                spin_projectors(a1),
                spin_projectors(a2),
                spin_projectors(b1),
                spin_projectors(b2),
            ],
        }
    }

    /// Flat coordinate vector: 12 phases (six-port) or 4 x (theta, phi).
    pub fn to_coords(&self) -> Vec<f64> {
        match self {
            ScenarioSettings::SixPort { a1, a2, b1, b2 } => [a1, a2, b1, b2]
                .iter()
                .flat_map(|s| s.phases().into_iter())
                .collect(),
            ScenarioSettings::Spin { a1, a2, b1, b2 } => [a1, a2, b1, b2]
                .iter()
                .flat_map(|s| [s.theta(), s.phi()].into_iter())
                .collect(),
        }
    }

    /// Rebuild settings from a flat coordinate vector, folding every
    /// coordinate into its domain (phases wrap mod 2pi, polar angles are
    /// reflected into [0, pi]).
    pub fn from_coords(kind: ObservableKind, coords: &[f64]) -> Result<Self> {
        match kind {
            ObservableKind::SixPort => {
                if coords.len() != 12 {
                    return Err(Error::DimensionMismatch(format!(
                        "six-port settings need 12 coordinates, got {}",
                        coords.len()
                    )));
                }
                if coords.iter().any(|c| !c.is_finite()) {
                    return Err(Error::NonFinite("six-port coordinate"));
                }
                let s = |k: usize| {
                    SixPortSetting::wrapped([coords[3 * k], coords[3 * k + 1], coords[3 * k + 2]])
                };
                Ok(ScenarioSettings::SixPort {
                    a1: s(0),
                    a2: s(1),
                    b1: s(2),
                    b2: s(3),
                })
            }
            ObservableKind::Spin => {
                if coords.len() != 8 {
                    return Err(Error::DimensionMismatch(format!(
                        "spin settings need 8 coordinates, got {}",
                        coords.len()
                    )));
                }
                if coords.iter().any(|c| !c.is_finite()) {
                    return Err(Error::NonFinite("spin coordinate"));
                }
                let s = |k: usize| SpinSetting::folded(coords[2 * k], coords[2 * k + 1]);
                Ok(ScenarioSettings::Spin {
                    a1: s(0),
                    a2: s(1),
                    b1: s(2),
                    b2: s(3),
                })
            }
        }
    }
}

/// Wire format: {"kind": "sixport"|"spin", "a1": [...], ...} with angles in
/// radians ([phi0, phi1, phi2] per observable for six-port, [theta, phi] for
/// spin).
#[derive(Serialize, Deserialize)]
struct SettingsWire {
    kind: ObservableKind,
    a1: Vec<f64>,
    a2: Vec<f64>,
    b1: Vec<f64>,
    b2: Vec<f64>,
}

impl Serialize for ScenarioSettings {
    fn serialize<S: serde::Serializer>(
        &self,
        serializer: S,
    ) -> std::result::Result<S::Ok, S::Error> {
        let wire = match self {
            ScenarioSettings::SixPort { a1, a2, b1, b2 } => SettingsWire {
                kind: ObservableKind::SixPort,
                a1: a1.phases().to_vec(),
                a2: a2.phases().to_vec(),
                b1: b1.phases().to_vec(),
                b2: b2.phases().to_vec(),
            },
            ScenarioSettings::Spin { a1, a2, b1, b2 } => SettingsWire {
                kind: ObservableKind::Spin,
                a1: vec![a1.theta(), a1.phi()],
                a2: vec![a2.theta(), a2.phi()],
                b1: vec![b1.theta(), b1.phi()],
                b2: vec![b2.theta(), b2.phi()],
            },
        };
        wire.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for ScenarioSettings {
    fn deserialize<D: serde::Deserializer<'de>>(
        deserializer: D,
    ) -> std::result::Result<Self, D::Error> {
        let wire = SettingsWire::deserialize(deserializer)?;
        let per = match wire.kind {
            ObservableKind::SixPort => 3,
            ObservableKind::Spin => 2,
        };
        let mut coords = Vec::with_capacity(4 * per);
        for (name, angles) in [
            ("a1", &wire.a1),
            ("a2", &wire.a2),
            ("b1", &wire.b1),
            ("b2", &wire.b2),
        ] {
            if angles.len() != per {
                return Err(serde::de::Error::custom(format!(
                    "observable {name} needs {per} angles, got {}",
                    angles.len()
                )));
            }
            coords.extend_from_slice(angles);
        }
        ScenarioSettings::from_coords(wire.kind, &coords).map_err(serde::de::Error::custom)
    }
}

/// Three rank-1 orthogonal projectors summing to the identity: one
/// trichotomic observable. Index order is the outcome-label order
/// (+1, 0, -1).
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectorSet {
    projectors: [CMatrix; 3],
}

impl ProjectorSet {
    pub fn projector(&self, outcome_index: usize) -> &CMatrix {
        &self.projectors[outcome_index]
    }

    pub fn projectors(&self) -> &[CMatrix; 3] {
        &self.projectors
    }

    /// Checks the full projective-measurement algebra at tolerance `tol`:
    /// Hermiticity, idempotence, mutual orthogonality, completeness and
    /// unit trace of each projector.
    pub fn validate(&self, tol: f64) -> Result<()> {
        let mut sum = CMatrix::zeros(3, 3);
        for (k, p) in self.projectors.iter().enumerate() {
            let dev = p.hermiticity_deviation();
            if dev >= tol {
                return Err(Error::InvalidState(format!(
                    "projector {k} not Hermitian (deviation {dev:e})"
                )));
            }
            let idem = p.matmul(p).sub(p).max_abs();
            if idem >= tol {
                return Err(Error::InvalidState(format!(
                    "projector {k} not idempotent (deviation {idem:e})"
                )));
            }
            let tr = p.trace();
            if (tr.re - 1.0).abs() >= tol || tr.im.abs() >= tol {
                return Err(Error::InvalidState(format!(
                    "projector {k} trace is {tr}, expected 1"
                )));
            }
            for (l, other) in self.projectors.iter().enumerate() {
                if l != k {
                    let cross = p.matmul(other).max_abs();
                    if cross >= tol {
                        return Err(Error::InvalidState(format!(
                            "projectors {k} and {l} not orthogonal (deviation {cross:e})"
                        )));
                    }
                }
            }
            sum.add_scaled(p, 1.0);
        }
        let complete = sum.sub(&CMatrix::identity(3)).max_abs();
        if complete >= tol {
            return Err(Error::InvalidState(format!(
                "projectors do not sum to identity (deviation {complete:e})"
            )));
        }
        Ok(())
    }
}

/// Three-mode discrete Fourier transform, unitary normalization:
/// entries exp(i 2pi jk / 3) / sqrt(3) for j, k in {0, 1, 2}.
pub fn fourier_matrix() -> CMatrix {
    let norm = 1.0 / 3f64.sqrt();
    CMatrix::from_fn(3, 3, |j, k| {
        Complex64::from_polar(norm, TAU * (j * k) as f64 / 3.0)
    })
}

/// Projector set for a six-port observable: Pi_k = V^dag |k><k| V with
/// V = F U(phases), where F is the DFT on side A and its conjugate on
/// side B, and U is the diagonal phase unitary.
pub fn sixport_projectors(setting: &SixPortSetting, side: Side) -> ProjectorSet {
    let f = match side {
        Side::A => fourier_matrix(),
        Side::B => fourier_matrix().conj(),
    };
    let phases = setting.phases();
    let u = CMatrix::from_fn(3, 3, |i, j| {
        if i == j {
            Complex64::from_polar(1.0, phases[i])
        } else {
            Complex64::ZERO
        }
    });
    let v = f.matmul(&u);
    let v_dag = v.dagger();
    let projectors = std::array::from_fn(|k| {
        // V^dag |k><k| V = (row k of V)^dag (row k of V)
        CMatrix::from_fn(3, 3, |i, j| v_dag.get(i, k) * v.get(k, j))
    });
    let set = ProjectorSet { projectors };
    debug_assert!(set.validate(1e-10).is_ok());
    set
}

/// Spin-1 matrices in the basis where |0>, |1>, |2> are the S_z eigenstates
/// with eigenvalues +1, 0, -1.
pub fn spin_matrices() -> [CMatrix; 3] {
    let h = 1.0 / 2f64.sqrt();
    let sx = CMatrix::new(
        3,
        3,
        vec![
            Complex64::ZERO,
            Complex64::new(h, 0.0),
            Complex64::ZERO,
            Complex64::new(h, 0.0),
            Complex64::ZERO,
            Complex64::new(h, 0.0),
            Complex64::ZERO,
            Complex64::new(h, 0.0),
            Complex64::ZERO,
        ],
    )
    .expect("static shape");
    let sy = CMatrix::new(
        3,
        3,
        vec![
            Complex64::ZERO,
            Complex64::new(0.0, -h),
            Complex64::ZERO,
            Complex64::new(0.0, h),
            Complex64::ZERO,
            Complex64::new(0.0, -h),
            Complex64::ZERO,
            Complex64::new(0.0, h),
            Complex64::ZERO,
        ],
    )
    .expect("static shape");
    let sz = CMatrix::diag(&[1.0, 0.0, -1.0]);
    [sx, sy, sz]
}

/// Eigenprojectors of n.S for the direction (theta, phi):
/// Pi_+ = S(S+1)/2, Pi_0 = 1 - S^2, Pi_- = S(S-1)/2.
pub fn spin_projectors(setting: &SpinSetting) -> ProjectorSet {
    let [sx, sy, sz] = spin_matrices();
    let (st, ct) = setting.theta().sin_cos();
    let (sp, cp) = setting.phi().sin_cos();
    let mut sn = sx.scale_re(st * cp);
    sn.add_scaled(&sy, st * sp);
    sn.add_scaled(&sz, ct);

    let sn2 = sn.matmul(&sn);
    let id = CMatrix::identity(3);
    let plus = sn2.add(&sn).scale_re(0.5);
    let zero = id.sub(&sn2);
    let minus = sn2.sub(&sn).scale_re(0.5);
    let set = ProjectorSet {
        projectors: [plus, zero, minus],
    };
    debug_assert!(set.validate(1e-10).is_ok());
    set
}

/// Joint outcome probabilities for the four setting pairs.
///
/// Indexed `[a_setting][b_setting][a_outcome][b_outcome]` with settings in
/// {0, 1} (for observables 1, 2) and outcomes in label order (+1, 0, -1).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JointProbTable {
    values: [[[[f64; 3]; 3]; 2]; 2],
}

impl JointProbTable {
    pub fn get(&self, a_setting: usize, b_setting: usize, a_out: usize, b_out: usize) -> f64 {
        self.values[a_setting][b_setting][a_out][b_out]
    }

    pub fn values(&self) -> &[[[[f64; 3]; 3]; 2]; 2] {
        &self.values
    }

    /// Marginal P(a-outcome | settings pair) summed over the other party.
    pub fn marginal_a(&self, a_setting: usize, b_setting: usize, a_out: usize) -> f64 {
        (0..3)
            .map(|l| self.values[a_setting][b_setting][a_out][l])
            .sum()
    }

    pub fn marginal_b(&self, a_setting: usize, b_setting: usize, b_out: usize) -> f64 {
        (0..3)
            .map(|k| self.values[a_setting][b_setting][k][b_out])
            .sum()
    }

    /// Table of a deterministic local strategy: outcome `a_strategy[i]` for
    /// observable a^i and `b_strategy[j]` for b^j with probability 1.
    pub fn deterministic(a_strategy: [usize; 2], b_strategy: [usize; 2]) -> Self {
        let mut values = [[[[0.0; 3]; 3]; 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                values[i][j][a_strategy[i]][b_strategy[j]] = 1.0;
            }
        }
        Self { values }
    }

    /// The maximally mixed table: every entry is 1/9.
    pub fn uniform() -> Self {
        Self {
            values: [[[[1.0 / 9.0; 3]; 3]; 2]; 2],
        }
    }

    /// Convex combination alpha * self + (1 - alpha) * other.
    pub fn mix(&self, other: &JointProbTable, alpha: f64) -> Self {
        let mut values = [[[[0.0; 3]; 3]; 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                for k in 0..3 {
                    for l in 0..3 {
                        values[i][j][k][l] = alpha * self.values[i][j][k][l]
                            + (1.0 - alpha) * other.values[i][j][k][l];
                    }
                }
            }
        }
        Self { values }
    }
}

/// Tr[rho (A x B)] without forming the 9x9 Kronecker product.
pub(crate) fn expectation_kron(rho: &CMatrix, a_op: &CMatrix, b_op: &CMatrix) -> Complex64 {
    let mut acc = Complex64::ZERO;
    for a in 0..3 {
        for ap in 0..3 {
            let a_elem = a_op.get(ap, a);
            if a_elem == Complex64::ZERO {
                continue;
            }
            for b in 0..3 {
                for bp in 0..3 {
                    acc += rho.get(3 * a + b, 3 * ap + bp) * a_elem * b_op.get(bp, b);
                }
            }
        }
    }
    acc
}

/// Joint probability table p(a^i = k, b^j = l) = Tr[rho (Pi_a x Pi_b)].
///
/// Entries are checked non-negative to -1e-12, every settings pair must
/// normalize to 1 within 1e-8, then values are clamped to [0, 1].
pub fn joint_prob_table(
    rho: &DensityMatrix,
    settings: &ScenarioSettings,
) -> Result<JointProbTable> {
    let sets = settings.projector_sets();
    let mut values = [[[[0.0; 3]; 3]; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            let mut sum = 0.0;
            for k in 0..3 {
                for l in 0..3 {
                    let p = expectation_kron(
                        rho.matrix(),
                        sets[i].projector(k),
                        sets[2 + j].projector(l),
                    )
                    .re;
                    if p < -1e-12 {
                        return Err(Error::InvalidState(format!(
                            "negative probability {p:e} at ({i},{j},{k},{l})"
                        )));
                    }
                    values[i][j][k][l] = p;
                    sum += p;
                }
            }
            if (sum - 1.0).abs() > 1e-8 {
                return Err(Error::TableNormalization { i, j, sum });
            }
        }
    }
    // Clamp floating-point dust after the tolerance checks.
    for block in values.iter_mut().flatten() {
        for row in block.iter_mut() {
            for v in row.iter_mut() {
                *v = v.clamp(0.0, 1.0);
            }
        }
    }
    Ok(JointProbTable { values })
}

/// Closed-form left-hand side of the reference GWI for the isotropic state
/// under six-port observables, as a cross-check of the trace-based path.
///
/// W = (1/27) [ -12 - 2 sum_{i,j,k} (-1)^{delta_{i+j,2}}
///                                  sin(pi/6 - alpha_ik - beta_jk) ]
/// with alpha_ik = phi_{a_i}(k) - phi_{a_i}(k+1 mod 3) and beta analogous.
pub fn gwi_isotropic_sixport_closed_form(
    a1: &SixPortSetting,
    a2: &SixPortSetting,
    b1: &SixPortSetting,
    b2: &SixPortSetting,
) -> f64 {
    let a = [a1.phases(), a2.phases()];
    let b = [b1.phases(), b2.phases()];
    let mut sum = 0.0;
    for i in 0..2 {
        for j in 0..2 {
            // (-1)^delta: -1 only for the (a1, b1) pair.
            let sign = if i + j == 0 { -1.0 } else { 1.0 };
            for k in 0..3 {
                let alpha = a[i][k] - a[i][(k + 1) % 3];
                let beta = b[j][k] - b[j][(k + 1) % 3];
                sum += sign * (PI / 6.0 - alpha - beta).sin();
            }
        }
    }
    (-12.0 - 2.0 * sum) / 27.0
}

/// Closed-form left-hand side of the reference GWI for the isotropic state
/// under spin-1 observables, as a cross-check of the trace-based path.
pub fn gwi_isotropic_spin_closed_form(
    a1: &SpinSetting,
    a2: &SpinSetting,
    b1: &SpinSetting,
    b2: &SpinSetting,
) -> f64 {
    let a = [a1, a2];
    let b = [b1, b2];
    let mut w = 0.0;
    for i in 0..2 {
        for j in 0..2 {
            let sign = if i + j == 0 { -1.0 } else { 1.0 };
            let (ta, pa) = (a[i].theta(), a[i].phi());
            let (tb, pb) = (b[j].theta(), b[j].phi());
            let bracket = (ta + tb).sin().powi(2)
                + 2.0 * (1.0 - ta.sin() * tb.sin()) * ta.cos() * tb.cos()
                + 2.0 * (1.0 - ta.cos() * tb.cos()) * (pa + pb).cos() * ta.sin() * tb.sin()
                + (pa + pb).sin().powi(2) * ta.sin().powi(2) * tb.sin().powi(2)
                + 2.0;
            w += (-1.0 / 12.0) * sign * bracket;
        }
    }
    w
}
