//! Dense Hermitian linear algebra: eigendecomposition with a fixed
//! ordering/sign convention, spectral projections onto the PSD cone and
//! low-rank sets, a pivot-reporting Cholesky, and the trace inner product.

use crate::field::Field;
use crate::{Error, Result};
use nalgebra::{DMatrix, DVector};

/// Threshold below which an eigenvector component is considered zero when
/// picking the component that anchors the sign/phase convention.
const SIGN_ANCHOR_TOL: f64 = 1e-12;

/// A Hermitian (or real symmetric) matrix.
///
/// Construction symmetrizes: the stored matrix is `(M + M^H)/2`, so the
/// Hermitian invariant holds exactly in floating point and downstream
/// spectral routines never see asymmetric drift.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianMatrix<T: Field> {
    mat: DMatrix<T>,
}

impl<T: Field> HermitianMatrix<T> {
    /// Symmetrize `m` and wrap it. Accepts any square matrix.
    pub fn new(m: DMatrix<T>) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::DimensionMismatch {
                expected: m.nrows(),
                got: m.ncols(),
                context: "HermitianMatrix::new (square matrix required)",
            });
        }
        let half = T::from_real(0.5);
        let sym = (&m + m.adjoint()).map(|x| x * half);
        Ok(Self { mat: sym })
    }

    /// Wrap a matrix that is already Hermitian by construction.
    /// Still symmetrizes (cheap) so the invariant can never be violated.
    pub fn from_hermitian_parts(m: DMatrix<T>) -> Result<Self> {
        Self::new(m)
    }

    pub fn zeros(n: usize) -> Self {
        Self {
            mat: DMatrix::zeros(n, n),
        }
    }

    pub fn identity(n: usize) -> Self {
        Self {
            mat: DMatrix::identity(n, n),
        }
    }

    /// Side length.
    pub fn n(&self) -> usize {
        self.mat.nrows()
    }

    /// Borrow the underlying dense storage.
    pub fn as_matrix(&self) -> &DMatrix<T> {
        &self.mat
    }

    /// Consume and return the dense storage.
    pub fn into_matrix(self) -> DMatrix<T> {
        self.mat
    }

    /// Real trace. The diagonal is exactly real after symmetrization.
    pub fn trace(&self) -> f64 {
        (0..self.n()).map(|i| self.mat[(i, i)].re()).sum()
    }

    /// Frobenius norm.
    pub fn fro_norm(&self) -> f64 {
        self.mat.iter().map(|x| x.modulus_squared()).sum::<f64>().sqrt()
    }

    /// Frobenius distance to another matrix of the same size.
    pub fn fro_dist(&self, other: &Self) -> Result<f64> {
        self.check_same_size(other, "fro_dist")?;
        let mut acc = 0.0;
        for (a, b) in self.mat.iter().zip(other.mat.iter()) {
            acc += (*a - *b).modulus_squared();
        }
        Ok(acc.sqrt())
    }

    /// Trace inner product `<A, B> = Re tr(A^H B)`, real by Hermiticity.
    pub fn inner(&self, other: &Self) -> Result<f64> {
        self.check_same_size(other, "inner")?;
        let mut acc = 0.0;
        for (a, b) in self.mat.iter().zip(other.mat.iter()) {
            // Re(conj(a) * b) without forming the full product.
            acc += a.re() * b.re() + a.im() * b.im();
        }
        Ok(acc)
    }

    /// `self + scale * other`, resymmetrized.
    pub fn axpy(&self, scale: f64, other: &Self) -> Result<Self> {
        self.check_same_size(other, "axpy")?;
        let s = T::from_real(scale);
        Ok(Self {
            mat: &self.mat + other.mat.map(|x| x * s),
        })
    }

    /// Scalar multiple.
    pub fn scale(&self, scale: f64) -> Self {
        let s = T::from_real(scale);
        Self {
            mat: self.mat.map(|x| x * s),
        }
    }

    /// Eigendecomposition with eigenvalues sorted in descending order and
    /// each eigenvector's phase fixed so its first component of modulus
    /// above `1e-12` is real and positive. Output is deterministic for a
    /// given input matrix.
    pub fn eig(&self) -> Result<EigenDecomposition<T>> {
        let n = self.n();
        if n == 0 {
            return Ok(EigenDecomposition {
                values: DVector::zeros(0),
                vectors: DMatrix::zeros(0, 0),
            });
        }
        let se = self
            .mat
            .clone()
            .try_symmetric_eigen(f64::EPSILON, 10_000)
            .ok_or(Error::EigenFailed { n })?;
        if se.eigenvalues.iter().any(|v| !v.is_finite()) {
            return Err(Error::EigenFailed { n });
        }

        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| {
            se.eigenvalues[b]
                .partial_cmp(&se.eigenvalues[a])
                .expect("finite eigenvalues compare")
        });

        let mut values = DVector::zeros(n);
        let mut vectors = DMatrix::zeros(n, n);
        for (dst, &src) in order.iter().enumerate() {
            values[dst] = se.eigenvalues[src];
            let mut col = se.eigenvectors.column(src).clone_owned();
            fix_phase(&mut col);
            vectors.set_column(dst, &col);
        }
        Ok(EigenDecomposition { values, vectors })
    }

    /// Projection onto the PSD cone: negative eigenvalues clipped to zero.
    /// This is the nearest PSD matrix in Frobenius norm.
    pub fn psd_project(&self) -> Result<Self> {
        let eig = self.eig()?;
        let clipped = eig.values.map(|v| v.max(0.0));
        eig.reconstruct_with(&clipped)
    }

    /// Projection onto the PSD cone intersected with rank at most `r`:
    /// keep the `r` largest eigenvalues, clipped at zero, drop the rest.
    pub fn psd_rank_project(&self, r: usize) -> Result<Self> {
        let n = self.n();
        if r == 0 || r > n {
            return Err(Error::RankOutOfRange { r, n });
        }
        let eig = self.eig()?;
        let mut vals = DVector::zeros(n);
        for i in 0..r {
            vals[i] = eig.values[i].max(0.0);
        }
        eig.reconstruct_with(&vals)
    }

    /// Best rank-`r` approximation in Frobenius norm: keep the `r`
    /// eigenvalues of largest magnitude (sign preserved), zero the rest.
    pub fn best_rank_r(&self, r: usize) -> Result<Self> {
        let n = self.n();
        if r == 0 || r > n {
            return Err(Error::RankOutOfRange { r, n });
        }
        let eig = self.eig()?;
        let mut by_mag: Vec<usize> = (0..n).collect();
        by_mag.sort_by(|&a, &b| {
            eig.values[b]
                .abs()
                .partial_cmp(&eig.values[a].abs())
                .expect("finite eigenvalues compare")
        });
        let mut vals = DVector::zeros(n);
        for &i in by_mag.iter().take(r) {
            vals[i] = eig.values[i];
        }
        eig.reconstruct_with(&vals)
    }

    /// Sum of absolute eigenvalues (nuclear norm of a Hermitian matrix).
    pub fn nuclear_norm(&self) -> Result<f64> {
        Ok(self.eig()?.values.iter().map(|v| v.abs()).sum())
    }

    /// Largest absolute eigenvalue (spectral norm of a Hermitian matrix).
    pub fn spectral_norm(&self) -> Result<f64> {
        Ok(self
            .eig()?
            .values
            .iter()
            .fold(0.0f64, |acc, v| acc.max(v.abs())))
    }

    /// Smallest eigenvalue.
    pub fn min_eigenvalue(&self) -> Result<f64> {
        let eig = self.eig()?;
        Ok(eig.values[eig.values.len() - 1])
    }

    /// Lower-triangular Cholesky factor `L` with `self = L L^H`.
    ///
    /// Fails with the index of the first non-positive pivot, which callers
    /// surface when a claimed positive-definite combination is not.
    pub fn cholesky_lower(&self) -> Result<DMatrix<T>> {
        let n = self.n();
        let a = &self.mat;
        let mut l: DMatrix<T> = DMatrix::zeros(n, n);
        for j in 0..n {
            let mut d = a[(j, j)].re();
            for k in 0..j {
                d -= l[(j, k)].modulus_squared();
            }
            if d <= 0.0 || !d.is_finite() {
                return Err(Error::NotPositiveDefinite { pivot: j, value: d });
            }
            let djj = d.sqrt();
            l[(j, j)] = T::from_real(djj);
            let inv = T::from_real(1.0 / djj);
            for i in (j + 1)..n {
                let mut s = a[(i, j)];
                for k in 0..j {
                    s -= l[(i, k)] * l[(j, k)].conjugate();
                }
                l[(i, j)] = s * inv;
            }
        }
        Ok(l)
    }

    fn check_same_size(&self, other: &Self, context: &'static str) -> Result<()> {
        if self.n() != other.n() {
            return Err(Error::DimensionMismatch {
                expected: self.n(),
                got: other.n(),
                context,
            });
        }
        Ok(())
    }
}

/// Rotate each eigenvector so its anchor component (first with modulus
/// above `SIGN_ANCHOR_TOL`) is real and positive. For real scalars this
/// reduces to a sign flip.
fn fix_phase<T: Field>(col: &mut DVector<T>) {
    let anchor = col.iter().position(|x| x.modulus() > SIGN_ANCHOR_TOL);
    if let Some(i) = anchor {
        let x = col[i];
        let m = x.modulus();
        // multiply by conj(x)/|x|: unit modulus, maps x to |x| (> 0).
        let phase = x.conjugate() * T::from_real(1.0 / m);
        for v in col.iter_mut() {
            *v *= phase;
        }
    }
}

/// Result of [`HermitianMatrix::eig`]: `values` descending, `vectors`
/// orthonormal columns in matching order with fixed phases.
#[derive(Debug, Clone)]
pub struct EigenDecomposition<T: Field> {
    pub values: DVector<f64>,
    pub vectors: DMatrix<T>,
}

impl<T: Field> EigenDecomposition<T> {
    /// `Q diag(values) Q^H` with the stored eigenvalues.
    pub fn reconstruct(&self) -> Result<HermitianMatrix<T>> {
        self.reconstruct_with(&self.values)
    }

    /// `Q diag(vals) Q^H` with replacement eigenvalues (used by the
    /// spectral projections and eigenvalue shrinkage operators).
    pub fn reconstruct_with(&self, vals: &DVector<f64>) -> Result<HermitianMatrix<T>> {
        let n = self.vectors.nrows();
        if vals.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: vals.len(),
                context: "reconstruct_with",
            });
        }
        let mut scaled = self.vectors.clone();
        for (j, mut col) in scaled.column_iter_mut().enumerate() {
            let s = T::from_real(vals[j]);
            for v in col.iter_mut() {
                *v *= s;
            }
        }
        HermitianMatrix::new(scaled * self.vectors.adjoint())
    }

    /// `max_j ||A q_j - lambda_j q_j||_2` — residual of the eigenpair
    /// identity, used by tests to pin decomposition quality.
    pub fn residual(&self, a: &HermitianMatrix<T>) -> f64 {
        let n = self.vectors.nrows();
        let mut worst = 0.0f64;
        for j in 0..n {
            let q = self.vectors.column(j);
            let aq = a.as_matrix() * q;
            let lq = q.map(|x| x * T::from_real(self.values[j]));
            worst = worst.max((aq - lq).norm());
        }
        worst
    }

    /// `||Q^H Q - I||_F` — orthonormality residual for tests.
    pub fn orthonormality_residual(&self) -> f64 {
        let n = self.vectors.ncols();
        let gram = self.vectors.adjoint() * &self.vectors;
        (gram - DMatrix::<T>::identity(n, n)).norm()
    }
}
