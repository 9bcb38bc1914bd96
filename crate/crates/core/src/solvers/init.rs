//! Spectral initialization shared by the gradient methods.
//!
//! `X_0 = psd_rank_project(A*(b)/s, r)` with `s = (1/m) sum ||A_i||_F^2`
//! calibrating the back-projection scale, `U_0 = Q_r Lambda_r^{1/2}` from
//! the top eigenpairs, and the automatic step size
//! `eta = 1 / (4 * lambda_max(G) * ||X_0||_2 + eps)` where `G` is the
//! measurement Gram matrix. `lambda_max(G)` is the gradient's Lipschitz
//! constant for the unaveraged objective `0.5 ||b - A(X)||^2` the solvers
//! minimize, and the extra `||X_0||_2` covers the factored
//! parameterization's curvature.

use crate::field::Field;
use crate::linalg::HermitianMatrix;
use crate::sensing::SensingMap;
use crate::{Error, Result};
use nalgebra::{DMatrix, DVector};

/// Regularizer in the auto step size denominator.
pub(crate) const ETA_EPS: f64 = 1e-12;

/// Initial point for the gradient methods.
#[derive(Debug, Clone)]
pub struct SpectralInit<T: Field> {
    /// `psd_rank_project(A*(b)/s, r)`.
    pub x0: HermitianMatrix<T>,
    /// `n x r` factor with `U_0 U_0^H = x0`.
    pub u0: DMatrix<T>,
    /// Step size from the auto rule.
    pub eta_auto: f64,
    /// Largest Gram eigenvalue used in the step size (power-iteration
    /// estimate of `lambda_max(G) = lambda_max(A A*)`).
    pub gram_lambda_max: f64,
}

/// Build the spectral initialization at rank `r`.
pub fn spectral_init<T: Field>(
    map: &SensingMap<T>,
    b: &DVector<f64>,
    r: usize,
) -> Result<SpectralInit<T>> {
    let n = map.n();
    if r == 0 || r > n {
        return Err(Error::RankOutOfRange { r, n });
    }
    if b.len() != map.m() {
        return Err(Error::DimensionMismatch {
            expected: map.m(),
            got: b.len(),
            context: "spectral_init: measurement vector",
        });
    }
    let s = map.frobenius_scale();
    if !(s > 0.0) {
        return Err(Error::InvalidConfig(
            "degenerate sensing map: zero Frobenius scale".into(),
        ));
    }
    let raw = map.adjoint(b)?.scale(1.0 / s);
    let eig = raw.eig()?;

    let mut vals = DVector::zeros(n);
    let mut u0: DMatrix<T> = DMatrix::zeros(n, r);
    for j in 0..r {
        let lam = eig.values[j].max(0.0);
        vals[j] = lam;
        let sq = T::from_real(lam.sqrt());
        let col = eig.vectors.column(j).map(|x| x * sq);
        u0.set_column(j, &col);
    }
    let x0 = eig.reconstruct_with(&vals)?;
    // spectral norm of the PSD x0 is its top eigenvalue
    let x0_spec = vals[0];

    let gram_lambda_max = gram_lambda_max(map)?;
    let eta_auto = 1.0 / (4.0 * gram_lambda_max * x0_spec + ETA_EPS);

    Ok(SpectralInit {
        x0,
        u0,
        eta_auto,
        gram_lambda_max,
    })
}

/// Largest eigenvalue of the Gram matrix, computed through the operator
/// identity `lambda_max(G) = lambda_max(A* A)` by power iteration on
/// `X -> A*(A(X))`. Avoids forming the `m x m` Gram matrix just for a
/// step size. Deterministic start: `A*(1)`, falling back to the identity
/// if that vanishes.
pub(crate) fn gram_lambda_max<T: Field>(map: &SensingMap<T>) -> Result<f64> {
    let ones = DVector::from_element(map.m(), 1.0);
    let mut x = map.adjoint(&ones)?;
    if x.fro_norm() < 1e-300 {
        x = HermitianMatrix::identity(map.n());
    }
    let mut lam = 0.0f64;
    for _ in 0..100 {
        let norm = x.fro_norm();
        if norm < 1e-300 {
            break;
        }
        x = x.scale(1.0 / norm);
        let y = map.apply(&x)?;
        let next = map.adjoint(&y)?;
        let new_lam = x.inner(&next)?; // Rayleigh quotient = ||A(x)||^2
        let done = (new_lam - lam).abs() <= 1e-6 * new_lam.abs().max(1e-300);
        lam = new_lam;
        x = next;
        if done {
            break;
        }
    }
    Ok(lam.max(0.0))
}
