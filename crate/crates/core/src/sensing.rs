//! Measurement ensembles.
//!
//! A sensing map is an ordered list of Hermitian matrices `A_1..A_m`
//! acting on Hermitian `X` by `A(X)_i = <A_i, X> = Re tr(A_i^H X)`, with
//! adjoint `A*(y) = sum_i y_i A_i`. Three generators are provided:
//! Wishart (positive definite), rank-one Gaussian, and Pauli projectors.
//!
//! Randomness: measurement `i` is drawn from stream `i + 1` of the seed's
//! ChaCha8 cipher; ensemble-level draws (Pauli string selection and
//! signs) use stream 0. See [`crate::rng`].

use crate::field::Field;
use crate::linalg::HermitianMatrix;
use crate::rng::substream;
use crate::{Error, Result};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::{ChiSquared, Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

/// How a sensing map was generated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SensingFamily {
    Wishart,
    RankOneGaussian,
    Pauli,
    /// Produced by whitening another map.
    Whitened,
    /// Built from explicit matrices.
    Custom,
}

impl std::fmt::Display for SensingFamily {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            SensingFamily::Wishart => "wishart",
            SensingFamily::RankOneGaussian => "rank_one_gaussian",
            SensingFamily::Pauli => "pauli",
            SensingFamily::Whitened => "whitened",
            SensingFamily::Custom => "custom",
        };
        write!(f, "{s}")
    }
}

impl std::str::FromStr for SensingFamily {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "wishart" => Ok(SensingFamily::Wishart),
            "rank_one_gaussian" | "rank1" => Ok(SensingFamily::RankOneGaussian),
            "pauli" => Ok(SensingFamily::Pauli),
            "whitened" => Ok(SensingFamily::Whitened),
            "custom" => Ok(SensingFamily::Custom),
            other => Err(Error::InvalidConfig(format!(
                "unknown sensing family {other:?}"
            ))),
        }
    }
}

/// Relative tolerance on the imaginary part of a measurement; anything
/// larger means the inputs were not actually Hermitian.
const MEASUREMENT_IMAG_TOL: f64 = 1e-9;

/// An ordered measurement ensemble `A_1..A_m` of `n x n` Hermitian
/// matrices together with the linear map/adjoint pair they induce.
#[derive(Debug, Clone)]
pub struct SensingMap<T: Field> {
    n: usize,
    matrices: Vec<HermitianMatrix<T>>,
    fro_norms: Vec<f64>,
    family: SensingFamily,
}

impl<T: Field> SensingMap<T> {
    /// Build a map from explicit matrices (family `Custom`).
    pub fn from_matrices(matrices: Vec<HermitianMatrix<T>>) -> Result<Self> {
        Self::from_parts(matrices, SensingFamily::Custom)
    }

    /// Relabels the family tag (used when decoding stored containers whose
    /// matrices were loaded explicitly).
    pub fn with_family(self, family: SensingFamily) -> Result<Self> {
        Self::from_parts(self.matrices, family)
    }

    pub(crate) fn from_parts(
        matrices: Vec<HermitianMatrix<T>>,
        family: SensingFamily,
    ) -> Result<Self> {
        if matrices.is_empty() {
            return Err(Error::InvalidConfig(
                "sensing map needs at least one matrix".into(),
            ));
        }
        let n = matrices[0].n();
        if n == 0 {
            return Err(Error::InvalidConfig("sensing matrices must be non-empty".into()));
        }
        for a in &matrices {
            if a.n() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    got: a.n(),
                    context: "SensingMap matrices must share one size",
                });
            }
        }
        let fro_norms = matrices.iter().map(|a| a.fro_norm()).collect();
        Ok(Self {
            n,
            matrices,
            fro_norms,
            family,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of measurements.
    pub fn m(&self) -> usize {
        self.matrices.len()
    }

    pub fn family(&self) -> SensingFamily {
        self.family
    }

    pub fn matrices(&self) -> &[HermitianMatrix<T>] {
        &self.matrices
    }

    pub fn matrix(&self, i: usize) -> &HermitianMatrix<T> {
        &self.matrices[i]
    }

    /// Apply the map: `y_i = <A_i, X>`. Rejects matrices of the wrong
    /// size and measurements whose full complex trace has an imaginary
    /// part beyond `1e-9` relative (non-Hermitian input).
    pub fn apply(&self, x: &HermitianMatrix<T>) -> Result<DVector<f64>> {
        if x.n() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                got: x.n(),
                context: "SensingMap::apply",
            });
        }
        let x_norm = x.fro_norm();
        let mut y = DVector::zeros(self.m());
        for (i, a) in self.matrices.iter().enumerate() {
            let (re, im) = inner_full(a, x);
            let tol = MEASUREMENT_IMAG_TOL * self.fro_norms[i] * x_norm;
            if im.abs() > tol.max(f64::MIN_POSITIVE) {
                return Err(Error::NonRealMeasurement { index: i, imag: im });
            }
            y[i] = re;
        }
        Ok(y)
    }

    /// Adjoint: `A*(y) = sum_i y_i A_i`.
    pub fn adjoint(&self, y: &DVector<f64>) -> Result<HermitianMatrix<T>> {
        if y.len() != self.m() {
            return Err(Error::DimensionMismatch {
                expected: self.m(),
                got: y.len(),
                context: "SensingMap::adjoint",
            });
        }
        let mut acc: DMatrix<T> = DMatrix::zeros(self.n, self.n);
        for (i, a) in self.matrices.iter().enumerate() {
            let w = T::from_real(y[i]);
            acc.zip_apply(a.as_matrix(), |dst, src| *dst += src * w);
        }
        HermitianMatrix::new(acc)
    }

    /// Gram matrix `G_ij = <A_i, A_j>` (real symmetric PSD, `m x m`).
    pub fn gram(&self) -> Result<HermitianMatrix<f64>> {
        let m = self.m();
        let mut g: DMatrix<f64> = DMatrix::zeros(m, m);
        for i in 0..m {
            for j in i..m {
                let v = self.matrices[i].inner(&self.matrices[j])?;
                g[(i, j)] = v;
                g[(j, i)] = v;
            }
        }
        HermitianMatrix::new(g)
    }

    /// Average squared Frobenius norm of the matrices,
    /// `s = (1/m) sum_i ||A_i||_F^2`, the natural scale of `A* A`.
    pub fn frobenius_scale(&self) -> f64 {
        self.fro_norms.iter().map(|v| v * v).sum::<f64>() / self.m() as f64
    }
}

/// Full complex inner product `tr(A^H B)` split into (re, im).
fn inner_full<T: Field>(a: &HermitianMatrix<T>, b: &HermitianMatrix<T>) -> (f64, f64) {
    let mut re = 0.0;
    let mut im = 0.0;
    for (x, y) in a.as_matrix().iter().zip(b.as_matrix().iter()) {
        // conj(x) * y
        re += x.re() * y.re() + x.im() * y.im();
        im += x.re() * y.im() - x.im() * y.re();
    }
    (re, im)
}

// ---------------------------------------------------------------------
// Wishart ensemble
// ---------------------------------------------------------------------

/// Family-specific knobs for the Wishart ensemble. `A_i = Z_i^T Z_i`
/// where `Z_i` is `p x n` with i.i.d. `N(0, sigma2)` entries, so each
/// `A_i` is positive definite almost surely when `p > n + 1`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WishartParams {
    /// Degrees of freedom; `None` means `max(2n, n + 2)`.
    #[serde(default)]
    pub p: Option<usize>,
    /// Entry variance of the Gaussian factor.
    #[serde(default = "default_sigma2")]
    pub sigma2: f64,
    /// Draw through the Bartlett factorization instead of the dense
    /// Gaussian factor. Same distribution, different draw path.
    #[serde(default)]
    pub bartlett: bool,
}

fn default_sigma2() -> f64 {
    1.0
}

impl Default for WishartParams {
    fn default() -> Self {
        Self {
            p: None,
            sigma2: 1.0,
            bartlett: false,
        }
    }
}

impl WishartParams {
    /// Effective degrees of freedom for matrices of side `n`.
    pub fn dof(&self, n: usize) -> usize {
        self.p.unwrap_or_else(|| (2 * n).max(n + 2))
    }
}

/// Generate a Wishart sensing map of `m` measurements on `n x n` real
/// symmetric matrices. Measurement `i` uses stream `i + 1` of `seed`.
///
/// Direct path: draw `Z` (`p x n`, row-major order) with `N(0, sigma2)`
/// entries and form `Z^T Z`. Bartlett path: draw the lower-triangular
/// factor `W` column by column (chi-squared diagonal `chi2(p - j)` for
/// zero-based column `j`, then standard normal subdiagonal), and form
/// `sigma2 * W W^T`. Every matrix is checked positive definite.
pub fn gen_wishart(
    n: usize,
    m: usize,
    seed: u64,
    params: &WishartParams,
) -> Result<SensingMap<f64>> {
    if n == 0 || m == 0 {
        return Err(Error::InvalidConfig(
            "wishart ensemble needs n >= 1 and m >= 1".into(),
        ));
    }
    let p = params.dof(n);
    if p <= n + 1 {
        return Err(Error::InvalidConfig(format!(
            "wishart degrees of freedom p = {p} must exceed n + 1 = {}",
            n + 1
        )));
    }
    if !(params.sigma2 > 0.0) || !params.sigma2.is_finite() {
        return Err(Error::InvalidConfig(format!(
            "wishart sigma2 = {} must be positive and finite",
            params.sigma2
        )));
    }
    let sigma = params.sigma2.sqrt();
    let mut matrices = Vec::with_capacity(m);
    for i in 0..m {
        let mut rng = substream(seed, i as u64 + 1);
        let a = if params.bartlett {
            let mut w: DMatrix<f64> = DMatrix::zeros(n, n);
            for j in 0..n {
                let chi = ChiSquared::new((p - j) as f64).map_err(|e| {
                    Error::InvalidConfig(format!("chi-squared dof {}: {e}", p - j))
                })?;
                w[(j, j)] = chi.sample(&mut rng).sqrt();
                for k in (j + 1)..n {
                    w[(k, j)] = rng.sample(StandardNormal);
                }
            }
            let mut a = &w * w.transpose(); // W W^T
            a *= params.sigma2;
            a
        } else {
            let mut z: DMatrix<f64> = DMatrix::zeros(p, n);
            for r in 0..p {
                for c in 0..n {
                    let g: f64 = rng.sample(StandardNormal);
                    z[(r, c)] = sigma * g;
                }
            }
            z.tr_mul(&z) // Z^T Z
        };
        let h = HermitianMatrix::new(a)?;
        // p > n + 1 makes this hold almost surely; a failure here means a
        // genuinely degenerate draw and must surface, not pass through.
        h.cholesky_lower()?;
        matrices.push(h);
    }
    SensingMap::from_parts(matrices, SensingFamily::Wishart)
}

// ---------------------------------------------------------------------
// Rank-one Gaussian ensemble
// ---------------------------------------------------------------------

/// Generate `m` rank-one measurements `A_i = b_i b_i^T / (2 sqrt(n))`
/// with `b_i ~ N(0, I_n)`. Measurement `i` uses stream `i + 1`.
pub fn gen_rank_one_gaussian(n: usize, m: usize, seed: u64) -> Result<SensingMap<f64>> {
    if n == 0 || m == 0 {
        return Err(Error::InvalidConfig(
            "rank-one ensemble needs n >= 1 and m >= 1".into(),
        ));
    }
    let scale = 1.0 / (2.0 * (n as f64).sqrt());
    let mut matrices = Vec::with_capacity(m);
    for i in 0..m {
        let mut rng = substream(seed, i as u64 + 1);
        let mut b = DVector::zeros(n);
        for k in 0..n {
            b[k] = rng.sample::<f64, _>(StandardNormal);
        }
        let a = (&b * b.transpose()) * scale;
        matrices.push(HermitianMatrix::new(a)?);
    }
    SensingMap::from_parts(matrices, SensingFamily::RankOneGaussian)
}

// ---------------------------------------------------------------------
// Pauli ensemble
// ---------------------------------------------------------------------

/// Sign attached to each Pauli projector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum SignRule {
    /// Independent fair `+1`/`-1` per measurement.
    #[default]
    Random,
    /// Always `+1`.
    Plus,
}

impl std::str::FromStr for SignRule {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "random" => Ok(SignRule::Random),
            "plus" => Ok(SignRule::Plus),
            other => Err(Error::InvalidConfig(format!("unknown sign rule {other:?}"))),
        }
    }
}

/// Family-specific knobs for the Pauli ensemble.
#[derive(Debug, Clone, Serialize, Deserialize, Default)]
pub struct PauliParams {
    #[serde(default)]
    pub sign_rule: SignRule,
}

/// Number of non-identity Pauli strings on `q` qubits: `4^q - 1`.
pub fn pauli_dictionary_size(q: usize) -> usize {
    (1usize << (2 * q)) - 1
}

/// Hard cap on qubit count; above this the dense `2^q x 2^q` matrices
/// no longer fit a workstation.
pub const PAULI_MAX_QUBITS: usize = 12;

/// Generate `m` Pauli projector measurements on `q` qubits
/// (`n = 2^q`, complex): `A_i = (I +- P_i)/2` where `P_i` is a tensor
/// product of single-qubit Paulis, never the all-identity string.
///
/// Strings are drawn on stream 0: without replacement (all distinct)
/// while `m <= 4^q - 1`, with replacement otherwise. All string draws
/// happen first, then one sign draw per measurement in index order.
/// String code `c` in `[1, 4^q)` maps qubit `j` to base-4 digit
/// `(c >> 2j) & 3` with `0 -> I, 1 -> X, 2 -> Y, 3 -> Z`, and
/// `P = s_0 (x) s_1 (x) ... (x) s_{q-1}`.
pub fn gen_pauli(
    q: usize,
    m: usize,
    seed: u64,
    params: &PauliParams,
) -> Result<SensingMap<Complex64>> {
    if q == 0 {
        return Err(Error::InvalidConfig("pauli ensemble needs q >= 1".into()));
    }
    if q > PAULI_MAX_QUBITS {
        return Err(Error::InvalidConfig(format!(
            "q = {q} qubits exceeds the dense-matrix cap of {PAULI_MAX_QUBITS}"
        )));
    }
    if m == 0 {
        return Err(Error::InvalidConfig("pauli ensemble needs m >= 1".into()));
    }
    let dict = pauli_dictionary_size(q);
    let mut rng = substream(seed, 0);

    let codes: Vec<usize> = if m <= dict {
        // distinct non-identity strings
        rand::seq::index::sample(&mut rng, dict, m)
            .into_iter()
            .map(|idx| idx + 1)
            .collect()
    } else {
        (0..m).map(|_| rng.random_range(1..=dict)).collect()
    };
    let signs: Vec<f64> = (0..m)
        .map(|_| match params.sign_rule {
            SignRule::Plus => 1.0,
            SignRule::Random => {
                if rng.random::<bool>() {
                    1.0
                } else {
                    -1.0
                }
            }
        })
        .collect();

    let n = 1usize << q;
    let eye = DMatrix::<Complex64>::identity(n, n);
    let half = Complex64::new(0.5, 0.0);
    let mut matrices = Vec::with_capacity(m);
    for i in 0..m {
        let p = pauli_string_matrix(q, codes[i]);
        let s = Complex64::new(signs[i], 0.0);
        let a = (&eye + p * s) * half;
        matrices.push(HermitianMatrix::new(a)?);
    }
    SensingMap::from_parts(matrices, SensingFamily::Pauli)
}

/// Dense matrix of the Pauli string with base-4 code `c` (see
/// [`gen_pauli`] for the digit convention).
fn pauli_string_matrix(q: usize, code: usize) -> DMatrix<Complex64> {
    let z = Complex64::new(0.0, 0.0);
    let one = Complex64::new(1.0, 0.0);
    let i = Complex64::new(0.0, 1.0);
    let single = |d: usize| -> DMatrix<Complex64> {
        match d {
            0 => DMatrix::from_row_slice(2, 2, &[one, z, z, one]),
            1 => DMatrix::from_row_slice(2, 2, &[z, one, one, z]),
            2 => DMatrix::from_row_slice(2, 2, &[z, -i, i, z]),
            _ => DMatrix::from_row_slice(2, 2, &[one, z, z, -one]),
        }
    };
    let mut p = DMatrix::from_element(1, 1, one);
    for j in 0..q {
        let d = (code >> (2 * j)) & 3;
        p = p.kronecker(&single(d));
    }
    p
}

// ---------------------------------------------------------------------
// Ground truths
// ---------------------------------------------------------------------

/// A planted PSD matrix of known rank.
#[derive(Debug, Clone)]
pub struct GroundTruth<T: Field> {
    pub matrix: HermitianMatrix<T>,
    pub rank: usize,
    /// Whether the matrix was rescaled to unit trace.
    pub normalized: bool,
}

/// Draw `X = G G^H` with `G` an `n x r` standard normal factor (stream 0
/// of `seed`, entries in row-major order, real part before imaginary).
/// With `normalized`, rescale to unit trace.
pub fn gen_ground_truth<T: Field>(
    n: usize,
    r: usize,
    normalized: bool,
    seed: u64,
) -> Result<GroundTruth<T>> {
    if n == 0 {
        return Err(Error::InvalidConfig("ground truth needs n >= 1".into()));
    }
    if r == 0 || r > n {
        return Err(Error::RankOutOfRange { r, n });
    }
    let mut rng = substream(seed, 0);
    let mut g: DMatrix<T> = DMatrix::zeros(n, r);
    for i in 0..n {
        for j in 0..r {
            g[(i, j)] = T::sample_standard(&mut rng);
        }
    }
    let mut x = HermitianMatrix::new(&g * g.adjoint())?;
    if normalized {
        let t = x.trace();
        if !(t > f64::MIN_POSITIVE) {
            return Err(Error::InvalidConfig(
                "degenerate ground truth draw (zero trace)".into(),
            ));
        }
        x = x.scale(1.0 / t);
    }
    Ok(GroundTruth {
        matrix: x,
        rank: r,
        normalized,
    })
}
