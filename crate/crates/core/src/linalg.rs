//! Dense complex linear algebra for the 3- and 9-dimensional objects used
//! throughout the crate, including a cyclic-Jacobi Hermitian eigensolver.
//!
//! Everything here is sized for qutrit problems: matrices are 3x3 or 9x9,
//! stored row-major as `Complex64`. Robustness is preferred over speed.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Off-diagonal magnitude below which the Jacobi iteration stops.
const JACOBI_OFF_TOL: f64 = 1e-12;
/// Hard cap on Jacobi sweeps before reporting non-convergence.
const JACOBI_MAX_SWEEPS: usize = 100;
/// Allowed deviation from Hermiticity on eigensolver input.
const HERMITICITY_TOL: f64 = 1e-9;

/// Dense complex matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct CMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl CMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<Complex64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch(format!(
                "expected {} entries for a {rows}x{cols} matrix, got {}",
                rows * cols,
                data.len()
            )));
        }
        if data.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite("matrix entry"));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![Complex64::ZERO; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = Complex64::ONE;
        }
        m
    }

    pub fn from_fn<F: FnMut(usize, usize) -> Complex64>(
        rows: usize,
        cols: usize,
        mut f: F,
    ) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn diag(entries: &[f64]) -> Self {
        let n = entries.len();
        let mut m = Self::zeros(n, n);
        for (i, &x) in entries.iter().enumerate() {
            m.data[i * n + i] = Complex64::new(x, 0.0);
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, value: Complex64) {
        self.data[i * self.cols + j] = value;
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.data
    }

    /// Conjugate transpose.
    pub fn dagger(&self) -> CMatrix {
        CMatrix::from_fn(self.cols, self.rows, |i, j| self.get(j, i).conj())
    }

    /// Elementwise complex conjugate (no transpose).
    pub fn conj(&self) -> CMatrix {
        CMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z.conj()).collect(),
        }
    }

    pub fn transpose(&self) -> CMatrix {
        CMatrix::from_fn(self.cols, self.rows, |i, j| self.get(j, i))
    }

    pub fn trace(&self) -> Complex64 {
        assert!(self.is_square(), "trace of a non-square matrix");
        (0..self.rows).map(|i| self.get(i, i)).sum()
    }

    /// Matrix product. Panics on inner-dimension mismatch; shapes are fixed
    /// by construction everywhere in this crate.
    pub fn matmul(&self, rhs: &CMatrix) -> CMatrix {
        assert_eq!(
            self.cols, rhs.rows,
            "matmul dimension mismatch {}x{} * {}x{}",
            self.rows, self.cols, rhs.rows, rhs.cols
        );
        let mut out = CMatrix::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let aik = self.get(i, k);
                if aik == Complex64::ZERO {
                    continue;
                }
                for j in 0..rhs.cols {
                    out.data[i * rhs.cols + j] += aik * rhs.get(k, j);
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &CVector) -> CVector {
        assert_eq!(self.cols, v.dim(), "mul_vec dimension mismatch");
        let mut out = vec![Complex64::ZERO; self.rows];
        for i in 0..self.rows {
            for j in 0..self.cols {
                out[i] += self.get(i, j) * v.entries()[j];
            }
        }
        CVector::from_entries(out)
    }

    pub fn add(&self, rhs: &CMatrix) -> CMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        CMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&rhs.data)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }

    pub fn sub(&self, rhs: &CMatrix) -> CMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        CMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&rhs.data)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }

    pub fn scale(&self, factor: Complex64) -> CMatrix {
        CMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z * factor).collect(),
        }
    }

    pub fn scale_re(&self, factor: f64) -> CMatrix {
        self.scale(Complex64::new(factor, 0.0))
    }

    /// Add `factor * rhs` in place.
    pub fn add_scaled(&mut self, rhs: &CMatrix, factor: f64) {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        for (a, b) in self.data.iter_mut().zip(&rhs.data) {
            *a += b * factor;
        }
    }

    /// Largest entry magnitude (max-norm).
    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Max-norm of H - H^dagger.
    pub fn hermiticity_deviation(&self) -> f64 {
        assert!(self.is_square());
        let mut dev: f64 = 0.0;
        for i in 0..self.rows {
            for j in 0..self.cols {
                dev = dev.max((self.get(i, j) - self.get(j, i).conj()).norm());
            }
        }
        dev
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.is_square() && self.hermiticity_deviation() < tol
    }

    /// Tr[self * rhs] without forming the product.
    pub fn trace_product(&self, rhs: &CMatrix) -> Complex64 {
        assert_eq!(self.cols, rhs.rows);
        assert_eq!(self.rows, rhs.cols);
        let mut acc = Complex64::ZERO;
        for i in 0..self.rows {
            for j in 0..self.cols {
                acc += self.get(i, j) * rhs.get(j, i);
            }
        }
        acc
    }
}

/// Dense complex vector.
#[derive(Debug, Clone, PartialEq)]
pub struct CVector {
    data: Vec<Complex64>,
}

impl CVector {
    pub fn new(data: Vec<Complex64>) -> Result<Self> {
        if data.is_empty() {
            return Err(Error::DimensionMismatch("empty vector".into()));
        }
        if data.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite("vector entry"));
        }
        Ok(Self { data })
    }

    pub(crate) fn from_entries(data: Vec<Complex64>) -> Self {
        Self { data }
    }

    pub fn zeros(dim: usize) -> Self {
        Self {
            data: vec![Complex64::ZERO; dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.data.len()
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.data
    }

    /// Inner product <self|rhs> (conjugate-linear in `self`).
    pub fn inner(&self, rhs: &CVector) -> Complex64 {
        assert_eq!(self.dim(), rhs.dim());
        self.data
            .iter()
            .zip(&rhs.data)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    pub fn norm(&self) -> f64 {
        self.inner(self).re.sqrt()
    }

    pub fn scale(&self, factor: Complex64) -> CVector {
        CVector {
            data: self.data.iter().map(|z| z * factor).collect(),
        }
    }

    pub fn normalized(&self) -> Result<CVector> {
        let n = self.norm();
        if n < 1e-14 {
            return Err(Error::InvalidState("cannot normalize a zero vector".into()));
        }
        Ok(self.scale(Complex64::new(1.0 / n, 0.0)))
    }

    /// Outer product |self><rhs|.
    pub fn outer(&self, rhs: &CVector) -> CMatrix {
        CMatrix::from_fn(self.dim(), rhs.dim(), |i, j| {
            self.data[i] * rhs.data[j].conj()
        })
    }
}

/// Sorted eigensystem of a Hermitian matrix.
#[derive(Debug, Clone)]
pub struct EigenDecomposition {
    /// Ascending eigenvalues.
    pub eigenvalues: Vec<f64>,
    /// Orthonormal eigenvectors, paired with `eigenvalues` by index.
    pub eigenvectors: Vec<CVector>,
}

/// Kronecker product of two 3x3 matrices.
///
/// Indexing follows (kron)[3i+k][3j+l] = a[i][j] * b[k][l], matching the
/// |ab> basis ordering used by the state constructors.
pub fn kron(a: &CMatrix, b: &CMatrix) -> Result<CMatrix> {
    if a.rows() != 3 || a.cols() != 3 || b.rows() != 3 || b.cols() != 3 {
        return Err(Error::DimensionMismatch(format!(
            "kron expects two 3x3 matrices, got {}x{} and {}x{}",
            a.rows(),
            a.cols(),
            b.rows(),
            b.cols()
        )));
    }
    let mut out = CMatrix::zeros(9, 9);
    for i in 0..3 {
        for j in 0..3 {
            let aij = a.get(i, j);
            for k in 0..3 {
                for l in 0..3 {
                    out.set(3 * i + k, 3 * j + l, aij * b.get(k, l));
                }
            }
        }
    }
    Ok(out)
}

/// Full eigensystem of a Hermitian matrix by cyclic Jacobi rotations.
///
/// Each rotation zeroes one off-diagonal element with a phase factor folded
/// into the plane rotation; the iteration stops when the largest off-diagonal
/// magnitude drops below 1e-12 and errors out after 100 sweeps. The returned
/// decomposition is checked against `tol`: residuals `|H v - lambda v|` and
/// pairwise orthonormality must both stay below it.
pub fn hermitian_eig(h: &CMatrix, tol: f64) -> Result<EigenDecomposition> {
    if !h.is_square() {
        return Err(Error::DimensionMismatch(format!(
            "eigensolver needs a square matrix, got {}x{}",
            h.rows(),
            h.cols()
        )));
    }
    let dev = h.hermiticity_deviation();
    if dev >= HERMITICITY_TOL {
        return Err(Error::NotHermitian { deviation: dev });
    }
    let n = h.rows();

    // Work on the symmetrized copy so rounding dust cannot accumulate.
    let mut a = CMatrix::from_fn(n, n, |i, j| (h.get(i, j) + h.get(j, i).conj()) * 0.5);
    let mut v = CMatrix::identity(n);

    let mut converged = false;
    let mut sweeps_used = 0;
    for sweep in 0..JACOBI_MAX_SWEEPS {
        sweeps_used = sweep;
        if max_off_diagonal(&a) < JACOBI_OFF_TOL {
            converged = true;
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                jacobi_rotate(&mut a, &mut v, p, q);
            }
        }
    }
    let residual = max_off_diagonal(&a);
    if !converged && residual >= JACOBI_OFF_TOL {
        return Err(Error::EigNotConverged {
            sweeps: sweeps_used + 1,
            residual,
        });
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a.get(i, i).re.total_cmp(&a.get(j, j).re));

    let eigenvalues: Vec<f64> = order.iter().map(|&i| a.get(i, i).re).collect();
    let eigenvectors: Vec<CVector> = order
        .iter()
        .map(|&c| CVector::from_entries((0..n).map(|r| v.get(r, c)).collect()))
        .collect();

    let decomp = EigenDecomposition {
        eigenvalues,
        eigenvectors,
    };
    let res = decomposition_residual(h, &decomp);
    if res > tol {
        return Err(Error::EigNotConverged {
            sweeps: sweeps_used + 1,
            residual: res,
        });
    }
    Ok(decomp)
}

/// Worst residual of the decomposition: eigen-equation max-norm and
/// orthonormality deviation, whichever is larger.
pub fn decomposition_residual(h: &CMatrix, decomp: &EigenDecomposition) -> f64 {
    let n = h.rows();
    let mut worst: f64 = 0.0;
    for (lambda, vec) in decomp.eigenvalues.iter().zip(&decomp.eigenvectors) {
        let hv = h.mul_vec(vec);
        for i in 0..n {
            worst = worst.max((hv.entries()[i] - vec.entries()[i] * lambda).norm());
        }
    }
    for i in 0..decomp.eigenvectors.len() {
        for j in 0..decomp.eigenvectors.len() {
            let overlap = decomp.eigenvectors[i].inner(&decomp.eigenvectors[j]);
            let expected = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((overlap - expected).norm());
        }
    }
    worst
}

fn max_off_diagonal(a: &CMatrix) -> f64 {
    let n = a.rows();
    let mut m: f64 = 0.0;
    for p in 0..n {
        for q in 0..n {
            if p != q {
                m = m.max(a.get(p, q).norm());
            }
        }
    }
    m
}

/// One complex Jacobi rotation zeroing a[p][q] (and a[q][p]).
fn jacobi_rotate(a: &mut CMatrix, v: &mut CMatrix, p: usize, q: usize) {
    let n = a.rows();
    let apq = a.get(p, q);
    let r = apq.norm();
    if r < 1e-300 {
        return;
    }
    // Phase that makes the pivot real, then a standard symmetric rotation.
    let alpha = apq / r;
    let app = a.get(p, p).re;
    let aqq = a.get(q, q).re;
    let tau = (aqq - app) / (2.0 * r);
    let t = if tau >= 0.0 {
        1.0 / (tau + (1.0 + tau * tau).sqrt())
    } else {
        -1.0 / (-tau + (1.0 + tau * tau).sqrt())
    };
    let c = 1.0 / (1.0 + t * t).sqrt();
    let s = t * c;

    // Column rotation: columns p and q mix through U = [[alpha c, alpha s], [-s, c]].
    let upp = alpha * c;
    let upq = alpha * s;
    for i in 0..n {
        let aip = a.get(i, p);
        let aiq = a.get(i, q);
        a.set(i, p, aip * upp - aiq * s);
        a.set(i, q, aip * upq + aiq * c);
    }
    // Row rotation with the conjugates.
    let upp_c = upp.conj();
    let upq_c = upq.conj();
    for j in 0..n {
        let apj = a.get(p, j);
        let aqj = a.get(q, j);
        a.set(p, j, upp_c * apj - aqj * s);
        a.set(q, j, upq_c * apj + aqj * c);
    }
    // Pin the algebraically exact values.
    a.set(p, q, Complex64::ZERO);
    a.set(q, p, Complex64::ZERO);
    let new_app = a.get(p, p);
    let new_aqq = a.get(q, q);
    a.set(p, p, Complex64::new(new_app.re, 0.0));
    a.set(q, q, Complex64::new(new_aqq.re, 0.0));

    // Accumulate eigenvectors.
    for i in 0..n {
        let vip = v.get(i, p);
        let viq = v.get(i, q);
        v.set(i, p, vip * upp - viq * s);
        v.set(i, q, vip * upq + viq * c);
    }
}

// JSON wire format: complex numbers as [re, im] pairs; matrices row-major.

impl Serialize for CMatrix {
    fn serialize<S: serde::Serializer>(
        &self,
        serializer: S,
    ) -> std::result::Result<S::Ok, S::Error> {
        let rows: Vec<Vec<[f64; 2]>> = (0..self.rows)
            .map(|i| {
                (0..self.cols)
                    .map(|j| complex_to_pair(self.get(i, j)))
                    .collect()
            })
            .collect();
        rows.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for CMatrix {
    fn deserialize<D: serde::Deserializer<'de>>(
        deserializer: D,
    ) -> std::result::Result<Self, D::Error> {
        let rows: Vec<Vec<[f64; 2]>> = Vec::deserialize(deserializer)?;
        let nrows = rows.len();
        if nrows == 0 {
            return Err(serde::de::Error::custom("empty matrix"));
        }
        let ncols = rows[0].len();
        if rows.iter().any(|r| r.len() != ncols) {
            return Err(serde::de::Error::custom("ragged matrix rows"));
        }
        let data = rows
            .into_iter()
            .flatten()
            .map(pair_to_complex)
            .collect::<Vec<_>>();
        CMatrix::new(nrows, ncols, data).map_err(serde::de::Error::custom)
    }
}

impl Serialize for CVector {
    fn serialize<S: serde::Serializer>(
        &self,
        serializer: S,
    ) -> std::result::Result<S::Ok, S::Error> {
        let pairs: Vec<[f64; 2]> = self.data.iter().map(|&z| complex_to_pair(z)).collect();
        pairs.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for CVector {
    fn deserialize<D: serde::Deserializer<'de>>(
        deserializer: D,
    ) -> std::result::Result<Self, D::Error> {
        let pairs: Vec<[f64; 2]> = Vec::deserialize(deserializer)?;
        CVector::new(pairs.into_iter().map(pair_to_complex).collect())
            .map_err(serde::de::Error::custom)
    }
}

pub(crate) fn complex_to_pair(z: Complex64) -> [f64; 2] {
    [z.re, z.im]
}

pub(crate) fn pair_to_complex(p: [f64; 2]) -> Complex64 {
    Complex64::new(p[0], p[1])
}
