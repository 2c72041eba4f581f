//! Constructors for the bipartite qutrit states under study, pure and mixed.
//!
//! Basis ordering is |ab> with the first party's index varying slowest:
//! |00>, |01>, |02>, |10>, ..., |22>. All modules share this convention so
//! kron(A_op, B_op) acts correctly without permutations.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{hermitian_eig, CMatrix, CVector};

const DIM: usize = 9;
const NORM_TOL: f64 = 1e-12;
const HERM_TOL: f64 = 1e-12;
const TRACE_TOL: f64 = 1e-12;
/// Smallest admissible eigenvalue for a density matrix; tolerates rounding
/// in composed mixtures.
const POSITIVITY_FLOOR: f64 = -1e-10;

/// Pure bipartite qutrit state: 9 amplitudes in the |ab> basis.
#[derive(Debug, Clone, PartialEq)]
pub struct Ket {
    amplitudes: CVector,
}

impl Ket {
    /// Build from 9 amplitudes; the norm must already be 1 within 1e-12.
    pub fn new(amplitudes: Vec<Complex64>) -> Result<Self> {
        let v = CVector::new(amplitudes)?;
        if v.dim() != DIM {
            return Err(Error::DimensionMismatch(format!(
                "a bipartite qutrit ket has 9 amplitudes, got {}",
                v.dim()
            )));
        }
        let norm = v.norm();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::InvalidState(format!(
                "ket norm is {norm}, expected 1 within {NORM_TOL:e}"
            )));
        }
        Ok(Self { amplitudes: v })
    }

    /// Build from arbitrary non-zero amplitudes, normalizing.
    pub fn from_unnormalized(amplitudes: Vec<Complex64>) -> Result<Self> {
        let v = CVector::new(amplitudes)?;
        if v.dim() != DIM {
            return Err(Error::DimensionMismatch(format!(
                "a bipartite qutrit ket has 9 amplitudes, got {}",
                v.dim()
            )));
        }
        Ok(Self {
            amplitudes: v.normalized()?,
        })
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        self.amplitudes.entries()
    }

    pub fn vector(&self) -> &CVector {
        &self.amplitudes
    }

    /// Amplitude of basis state |ab>.
    pub fn amplitude(&self, a: usize, b: usize) -> Complex64 {
        self.amplitudes.entries()[3 * a + b]
    }

    /// |psi><psi| as a 9x9 matrix.
    pub fn projector(&self) -> CMatrix {
        self.amplitudes.outer(&self.amplitudes)
    }
}

impl Serialize for Ket {
    fn serialize<S: serde::Serializer>(
        &self,
        serializer: S,
    ) -> std::result::Result<S::Ok, S::Error> {
        self.amplitudes.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Ket {
    fn deserialize<D: serde::Deserializer<'de>>(
        deserializer: D,
    ) -> std::result::Result<Self, D::Error> {
        let v = CVector::deserialize(deserializer)?;
        Ket::new(v.entries().to_vec()).map_err(serde::de::Error::custom)
    }
}

/// Mixed bipartite qutrit state: 9x9 Hermitian, unit trace, positive
/// semidefinite up to the -1e-10 floor.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    matrix: CMatrix,
}

impl DensityMatrix {
    pub fn new(matrix: CMatrix) -> Result<Self> {
        if matrix.rows() != DIM || matrix.cols() != DIM {
            return Err(Error::DimensionMismatch(format!(
                "density matrix must be 9x9, got {}x{}",
                matrix.rows(),
                matrix.cols()
            )));
        }
        let dev = matrix.hermiticity_deviation();
        if dev > HERM_TOL {
            return Err(Error::NotHermitian { deviation: dev });
        }
        let trace = matrix.trace();
        if (trace.re - 1.0).abs() > TRACE_TOL || trace.im.abs() > TRACE_TOL {
            return Err(Error::InvalidState(format!(
                "density matrix trace is {trace}, expected 1"
            )));
        }
        let eig = hermitian_eig(&matrix, 1e-10)?;
        let min = eig.eigenvalues[0];
        if min < POSITIVITY_FLOOR {
            return Err(Error::InvalidState(format!(
                "density matrix has negative eigenvalue {min:e}"
            )));
        }
        Ok(Self { matrix })
    }

    pub fn from_pure(ket: &Ket) -> Self {
        // |psi><psi| with a unit-norm ket satisfies every invariant exactly.
        Self {
            matrix: ket.projector(),
        }
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }
}

impl Serialize for DensityMatrix {
    fn serialize<S: serde::Serializer>(
        &self,
        serializer: S,
    ) -> std::result::Result<S::Ok, S::Error> {
        self.matrix.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for DensityMatrix {
    fn deserialize<D: serde::Deserializer<'de>>(
        deserializer: D,
    ) -> std::result::Result<Self, D::Error> {
        let m = CMatrix::deserialize(deserializer)?;
        DensityMatrix::new(m).map_err(serde::de::Error::custom)
    }
}

/// The four mixed-state families studied with the sweep machinery.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MixedFamily {
    /// p |iso><iso| + (1-p) I/9
    Rho1,
    /// p |singlet><singlet| + (1-p) I/9
    Rho2,
    /// p |iso><iso| + (1-p) |singlet><singlet|
    Rho3,
    /// p (q |iso><iso| + (1-q) |singlet><singlet|) + (1-p) I/9
    Rho4,
}

impl MixedFamily {
    pub fn name(&self) -> &'static str {
        match self {
            MixedFamily::Rho1 => "rho1",
            MixedFamily::Rho2 => "rho2",
            MixedFamily::Rho3 => "rho3",
            MixedFamily::Rho4 => "rho4",
        }
    }
}

impl std::str::FromStr for MixedFamily {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "rho1" => Ok(MixedFamily::Rho1),
            "rho2" => Ok(MixedFamily::Rho2),
            "rho3" => Ok(MixedFamily::Rho3),
            "rho4" => Ok(MixedFamily::Rho4),
            other => Err(Error::InvalidState(format!(
                "unknown mixed family '{other}', expected rho1..rho4"
            ))),
        }
    }
}

/// Maximally entangled isotropic state (|00> + |11> + |22>)/sqrt(3).
pub fn isotropic() -> Ket {
    let a = Complex64::new(1.0 / 3f64.sqrt(), 0.0);
    let mut amps = vec![Complex64::ZERO; DIM];
    amps[0] = a; // |00>
    amps[4] = a; // |11>
    amps[8] = a; // |22>
    Ket::new(amps).expect("isotropic state is unit norm")
}

/// Qutrit singlet (|02> - |11> + |20>)/sqrt(3).
pub fn singlet() -> Ket {
    let a = Complex64::new(1.0 / 3f64.sqrt(), 0.0);
    let mut amps = vec![Complex64::ZERO; DIM];
    amps[2] = a; // |02>
    amps[4] = -a; // |11>
    amps[6] = a; // |20>
    Ket::new(amps).expect("singlet state is unit norm")
}

/// White-noise mixture p |psi><psi| + (1-p) I/9.
pub fn noisy(pure: &Ket, p: f64) -> Result<DensityMatrix> {
    check_unit_interval("p", p)?;
    let mut m = pure.projector().scale_re(p);
    m.add_scaled(&CMatrix::identity(DIM), (1.0 - p) / DIM as f64);
    DensityMatrix::new(m)
}

/// One of the four mixed families at parameters (p, q); q is only read for
/// rho4.
pub fn mixed_family(which: MixedFamily, p: f64, q: f64) -> Result<DensityMatrix> {
    check_unit_interval("p", p)?;
    if which == MixedFamily::Rho4 {
        check_unit_interval("q", q)?;
    }
    match which {
        MixedFamily::Rho1 => noisy(&isotropic(), p),
        MixedFamily::Rho2 => noisy(&singlet(), p),
        MixedFamily::Rho3 => {
            let mut m = isotropic().projector().scale_re(p);
            m.add_scaled(&singlet().projector(), 1.0 - p);
            DensityMatrix::new(m)
        }
        MixedFamily::Rho4 => {
            let mut m = isotropic().projector().scale_re(p * q);
            m.add_scaled(&singlet().projector(), p * (1.0 - q));
            m.add_scaled(&CMatrix::identity(DIM), (1.0 - p) / DIM as f64);
            DensityMatrix::new(m)
        }
    }
}

fn check_unit_interval(name: &'static str, value: f64) -> Result<()> {
    if !value.is_finite() || !(0.0..=1.0).contains(&value) {
        return Err(Error::OutOfRange {
            name,
            value,
            min: 0.0,
            max: 1.0,
        });
    }
    Ok(())
}
