//! Whitening against a positive-definite certificate.
//!
//! Given measurements `<A_i, X> = b_i` and weights `phi` with
//! `B = sum_i phi_i A_i` positive definite, factor `B = V V^H` (Cholesky)
//! and change variables `Y = V^H X V`, `M_i = V^{-1} A_i V^{-H}`. Then
//! `sum_i phi_i M_i = I`, feasible PSD points map to feasible PSD points,
//! and every feasible `X` satisfies the trace identity
//! `tr(V^H X V) = sum_i phi_i b_i = c`.

use crate::field::Field;
use crate::linalg::HermitianMatrix;
use crate::sensing::{SensingFamily, SensingMap};
use crate::{Error, Result};
use nalgebra::{DMatrix, DVector};
use serde::Serialize;

/// Relative feasibility gate: `X` counts as a solution of `A(X) = b` when
/// the residual is below this times `max(1, ||b||)`.
pub const FEASIBILITY_TOL: f64 = 1e-6;

/// Relative tolerance on the trace identity `tr(Y) = c`.
pub const TRACE_TOL: f64 = 1e-6;

/// Find weights `phi` such that `sum_i phi_i A_i` is positive definite.
///
/// The all-ones vector works for ensembles whose matrices are themselves
/// PSD with a full-rank sum (Wishart, rank-one Gaussian, Pauli). When it
/// does not, a projected subgradient ascent on
/// `phi -> lambda_min(sum_i phi_i A_i)` searches for a certificate and
/// gives up after a fixed budget.
pub fn find_phi<T: Field>(map: &SensingMap<T>) -> Result<DVector<f64>> {
    let m = map.m();
    let ones = DVector::from_element(m, 1.0);
    if is_certificate(map, &ones)? {
        return Ok(ones);
    }

    const BUDGET: usize = 500;
    let mut phi = ones / m as f64;
    let target_norm = (m as f64).sqrt();
    for it in 0..BUDGET {
        let b = map.adjoint(&phi)?;
        let eig = b.eig()?;
        let lam_min = eig.values[eig.values.len() - 1];
        let lam_max = eig.values[0].abs().max(1e-300);
        if lam_min > 1e-10 * lam_max {
            return Ok(phi);
        }
        // subgradient of lambda_min at phi: g_i = <A_i, u u^H> for the
        // bottom eigenvector u
        let u = eig.vectors.column(eig.vectors.ncols() - 1).clone_owned();
        let uu = HermitianMatrix::new(&u * u.adjoint())?;
        let mut g = DVector::zeros(m);
        for i in 0..m {
            g[i] = map.matrix(i).inner(&uu)?;
        }
        let gn = g.norm();
        if gn > 0.0 {
            let step = target_norm / ((it + 1) as f64).sqrt();
            phi += g * (step / gn);
        }
        let pn = phi.norm();
        if pn > 0.0 {
            phi *= target_norm / pn;
        }
    }
    Err(Error::NoPositiveSpan { tried: BUDGET + 1 })
}

fn is_certificate<T: Field>(map: &SensingMap<T>, phi: &DVector<f64>) -> Result<bool> {
    let b = map.adjoint(phi)?;
    match b.cholesky_lower() {
        Ok(_) => {
            // Cholesky succeeding only proves positive pivots; gate on a
            // safely positive smallest eigenvalue as well.
            let eig = b.eig()?;
            let lam_min = eig.values[eig.values.len() - 1];
            let lam_max = eig.values[0].abs().max(1e-300);
            Ok(lam_min > 1e-10 * lam_max)
        }
        Err(Error::NotPositiveDefinite { .. }) => Ok(false),
        Err(e) => Err(e),
    }
}

/// A sensing problem after the whitening change of variables.
#[derive(Debug, Clone)]
pub struct WhitenedProblem<T: Field> {
    source: SensingMap<T>,
    whitened: SensingMap<T>,
    phi: DVector<f64>,
    b: DVector<f64>,
    /// Lower-triangular factor with `sum_i phi_i A_i = V V^H`.
    factor: DMatrix<T>,
    /// Trace constant `c = sum_i phi_i b_i`.
    c: f64,
    /// `|| sum_i phi_i M_i - I ||_F`, a diagnostic of the factorization.
    identity_residual: f64,
}

/// Whiten a sensing problem with certificate weights `phi`.
///
/// Fails with the offending Cholesky pivot when `sum_i phi_i A_i` is not
/// positive definite.
pub fn whiten<T: Field>(
    map: SensingMap<T>,
    b: DVector<f64>,
    phi: DVector<f64>,
) -> Result<WhitenedProblem<T>> {
    let m = map.m();
    if b.len() != m {
        return Err(Error::DimensionMismatch {
            expected: m,
            got: b.len(),
            context: "whiten: measurement vector",
        });
    }
    if phi.len() != m {
        return Err(Error::DimensionMismatch {
            expected: m,
            got: phi.len(),
            context: "whiten: certificate weights",
        });
    }
    let span = map.adjoint(&phi)?;
    let factor = span.cholesky_lower()?;

    let mut whitened = Vec::with_capacity(m);
    for a in map.matrices() {
        whitened.push(whiten_matrix(&factor, a)?);
    }
    let whitened = SensingMap::from_parts(whitened, SensingFamily::Whitened)?;

    let c = phi.dot(&b);
    let ident = whitened.adjoint(&phi)?;
    let identity_residual = ident.fro_dist(&HermitianMatrix::identity(map.n()))?;

    Ok(WhitenedProblem {
        source: map,
        whitened,
        phi,
        b,
        factor,
        c,
        identity_residual,
    })
}

/// `V^{-1} A V^{-H}` via two triangular solves.
fn whiten_matrix<T: Field>(v: &DMatrix<T>, a: &HermitianMatrix<T>) -> Result<HermitianMatrix<T>> {
    let w = v
        .solve_lower_triangular(a.as_matrix())
        .ok_or(Error::NotPositiveDefinite { pivot: 0, value: 0.0 })?;
    let z = v
        .solve_lower_triangular(&w.adjoint())
        .ok_or(Error::NotPositiveDefinite { pivot: 0, value: 0.0 })?;
    HermitianMatrix::new(z.adjoint())
}

/// Report of the trace-identity check for one candidate solution.
#[derive(Debug, Clone, Serialize)]
pub struct TraceCheck {
    pub trace_y: f64,
    pub c: f64,
    pub gap: f64,
    pub tol: f64,
    pub feasibility_residual: f64,
    pub pass: bool,
}

impl<T: Field> WhitenedProblem<T> {
    pub fn source(&self) -> &SensingMap<T> {
        &self.source
    }

    /// The whitened measurement matrices `M_i`.
    pub fn whitened_map(&self) -> &SensingMap<T> {
        &self.whitened
    }

    pub fn phi(&self) -> &DVector<f64> {
        &self.phi
    }

    pub fn b(&self) -> &DVector<f64> {
        &self.b
    }

    pub fn factor(&self) -> &DMatrix<T> {
        &self.factor
    }

    /// Trace constant `c = sum_i phi_i b_i`.
    pub fn trace_constant(&self) -> f64 {
        self.c
    }

    /// `|| sum_i phi_i M_i - I ||_F`.
    pub fn identity_residual(&self) -> f64 {
        self.identity_residual
    }

    /// Forward change of variables: `Y = V^H X V`.
    pub fn to_y(&self, x: &HermitianMatrix<T>) -> Result<HermitianMatrix<T>> {
        self.check_n(x)?;
        HermitianMatrix::new(self.factor.adjoint() * x.as_matrix() * &self.factor)
    }

    /// Inverse change of variables: `X = V^{-H} Y V^{-1}`.
    pub fn from_y(&self, y: &HermitianMatrix<T>) -> Result<HermitianMatrix<T>> {
        self.check_n(y)?;
        let vh = self.factor.adjoint();
        // w = V^{-H} Y, then z = V^{-H} (w^H) = V^{-H} Y V^{-1}
        let w = vh
            .solve_upper_triangular(y.as_matrix())
            .ok_or(Error::NotPositiveDefinite { pivot: 0, value: 0.0 })?;
        let z = vh
            .solve_upper_triangular(&w.adjoint())
            .ok_or(Error::NotPositiveDefinite { pivot: 0, value: 0.0 })?;
        HermitianMatrix::new(z)
    }

    /// Check the trace identity `tr(V^H X V) = c` for a candidate `x`.
    ///
    /// `x` must actually solve `A(x) = b` (relative residual below
    /// [`FEASIBILITY_TOL`]); infeasible inputs are an error, not a failed
    /// check. The identity itself is gated at `1e-6 * (1 + |c|)`.
    pub fn verify_trace_invariance(&self, x: &HermitianMatrix<T>) -> Result<TraceCheck> {
        self.check_n(x)?;
        let resid = (self.source.apply(x)? - &self.b).norm();
        let rel = resid / self.b.norm().max(1.0);
        if rel > FEASIBILITY_TOL {
            return Err(Error::Infeasible {
                residual: rel,
                tol: FEASIBILITY_TOL,
            });
        }
        let trace_y = self.to_y(x)?.trace();
        let gap = (trace_y - self.c).abs();
        let tol = TRACE_TOL * (1.0 + self.c.abs());
        Ok(TraceCheck {
            trace_y,
            c: self.c,
            gap,
            tol,
            feasibility_residual: rel,
            pass: gap <= tol,
        })
    }

    fn check_n(&self, x: &HermitianMatrix<T>) -> Result<()> {
        if x.n() != self.source.n() {
            return Err(Error::DimensionMismatch {
                expected: self.source.n(),
                got: x.n(),
                context: "whitened problem matrix size",
            });
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sensing::{gen_ground_truth, gen_rank_one_gaussian, gen_wishart, WishartParams};

    fn wishart_problem(seed: u64) -> (SensingMap<f64>, HermitianMatrix<f64>, DVector<f64>) {
        let map = gen_wishart(5, 12, seed, &WishartParams::default()).unwrap();
        let x = gen_ground_truth::<f64>(5, 1, false, seed + 1).unwrap().matrix;
        let b = map.apply(&x).unwrap();
        (map, x, b)
    }

    #[test]
    fn all_ones_certifies_wishart() {
        let (map, _, _) = wishart_problem(3);
        let phi = find_phi(&map).unwrap();
        for v in phi.iter() {
            assert_eq!(*v, 1.0);
        }
    }

    #[test]
    fn whitening_identity_and_trace_constant() {
        let (map, x, b) = wishart_problem(7);
        let phi = find_phi(&map).unwrap();
        let wp = whiten(map, b, phi).unwrap();
        assert!(wp.identity_residual() <= 1e-8);

        let check = wp.verify_trace_invariance(&x).unwrap();
        assert!(check.pass, "gap {} tol {}", check.gap, check.tol);
    }

    #[test]
    fn whitened_matrices_match_direct_solves() {
        let (map, _, b) = wishart_problem(11);
        let phi = find_phi(&map).unwrap();
        let a0 = map.matrix(0).clone();
        let wp = whiten(map, b, phi).unwrap();
        // M_0 reconstructs A_0 = V M_0 V^H
        let v = wp.factor();
        let back =
            HermitianMatrix::new(v * wp.whitened_map().matrix(0).as_matrix() * v.adjoint())
                .unwrap();
        assert!(back.fro_dist(&a0).unwrap() <= 1e-10 * a0.fro_norm());
    }

    #[test]
    fn to_y_from_y_roundtrip_preserves_psd() {
        let (map, x, b) = wishart_problem(13);
        let phi = find_phi(&map).unwrap();
        let wp = whiten(map, b, phi).unwrap();
        let y = wp.to_y(&x).unwrap();
        assert!(y.min_eigenvalue().unwrap() >= -1e-10 * y.fro_norm());
        let back = wp.from_y(&y).unwrap();
        assert!(back.fro_dist(&x).unwrap() <= 1e-9 * x.fro_norm().max(1.0));
    }

    #[test]
    fn infeasible_points_are_rejected_not_failed() {
        let (map, x, b) = wishart_problem(17);
        let phi = find_phi(&map).unwrap();
        let wp = whiten(map, b, phi).unwrap();
        let off = x.axpy(0.5, &HermitianMatrix::identity(5)).unwrap();
        assert!(matches!(
            wp.verify_trace_invariance(&off),
            Err(Error::Infeasible { .. })
        ));
    }

    #[test]
    fn rank_one_ensemble_whitens_too() {
        // rank-one PSD matrices: individually singular, but their sum is
        // full rank once m >= n, so all-ones certifies
        let map = gen_rank_one_gaussian(4, 10, 5).unwrap();
        let x = gen_ground_truth::<f64>(4, 1, false, 6).unwrap().matrix;
        let b = map.apply(&x).unwrap();
        let phi = find_phi(&map).unwrap();
        let wp = whiten(map, b, phi).unwrap();
        assert!(wp.identity_residual() <= 1e-8);
        assert!(wp.verify_trace_invariance(&x).unwrap().pass);
    }

    #[test]
    fn indefinite_single_matrix_has_no_certificate() {
        // a single traceless indefinite matrix spans no PD combination
        let a = HermitianMatrix::new(DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1.0]))
            .unwrap();
        let map = SensingMap::from_matrices(vec![a]).unwrap();
        assert!(matches!(find_phi(&map), Err(Error::NoPositiveSpan { .. })));
    }

    #[test]
    fn whiten_rejects_non_certificate_weights() {
        let (map, _, b) = wishart_problem(19);
        let phi = DVector::from_element(12, -1.0); // negative sum: not PD
        assert!(matches!(
            whiten(map, b, phi),
            Err(Error::NotPositiveDefinite { .. })
        ));
    }
}
