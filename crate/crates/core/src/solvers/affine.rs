//! Projection onto the affine constraint set `{X : A(X) = b}`.
//!
//! Built on the measurement Gram matrix `G_ij = <A_i, A_j>`: the
//! orthogonal projection of `X` is `X - A*(G^+ (A(X) - b))`. `G` is
//! factored once per solve and reused every iteration.

use crate::field::Field;
use crate::linalg::HermitianMatrix;
use crate::sensing::SensingMap;
use crate::{Error, Result};
use nalgebra::{DMatrix, DVector};

/// Relative eigenvalue cutoff below which Gram directions are treated as
/// numerically null when forming the pseudo-inverse.
pub const GRAM_CUTOFF_REL: f64 = 1e-10;

/// Precomputed pseudo-inverse of a sensing map's Gram matrix.
#[derive(Debug, Clone)]
pub struct AffineProjector {
    vectors: DMatrix<f64>,
    /// `1/lambda_i` on the kept eigenspace, zero elsewhere.
    inv_values: DVector<f64>,
    cond: f64,
    rank: usize,
}

impl AffineProjector {
    pub fn new<T: Field>(map: &SensingMap<T>) -> Result<Self> {
        let gram = map.gram()?;
        let eig = gram.eig()?;
        let lam_max = eig.values[0];
        if !(lam_max > 0.0) {
            return Err(Error::GramIllConditioned { cond: f64::INFINITY });
        }
        let cutoff = GRAM_CUTOFF_REL * lam_max;
        let mut inv_values = DVector::zeros(eig.values.len());
        let mut lam_min_kept = lam_max;
        let mut rank = 0;
        for (i, &v) in eig.values.iter().enumerate() {
            if v > cutoff {
                inv_values[i] = 1.0 / v;
                lam_min_kept = lam_min_kept.min(v);
                rank += 1;
            }
        }
        Ok(Self {
            vectors: eig.vectors,
            inv_values,
            cond: lam_max / lam_min_kept,
            rank,
        })
    }

    /// Condition number of the kept eigenspace.
    pub fn cond(&self) -> f64 {
        self.cond
    }

    /// Numerical rank of the Gram matrix.
    pub fn rank(&self) -> usize {
        self.rank
    }

    /// `G^+ v`.
    pub fn pinv_apply(&self, v: &DVector<f64>) -> DVector<f64> {
        let mut coeffs = self.vectors.tr_mul(v);
        coeffs.component_mul_assign(&self.inv_values);
        &self.vectors * coeffs
    }

    /// Orthogonal projection of `x` onto `{A(X) = b}` (within the range
    /// of the map; an unreachable `b` leaves a residual).
    pub fn project<T: Field>(
        &self,
        map: &SensingMap<T>,
        x: &HermitianMatrix<T>,
        b: &DVector<f64>,
    ) -> Result<HermitianMatrix<T>> {
        let gap = map.apply(x)? - b;
        let corr = self.pinv_apply(&gap);
        let dx = map.adjoint(&corr)?;
        x.axpy(-1.0, &dx)
    }

    /// Minimum-Frobenius-norm solution of `A(X) = b` over all Hermitian
    /// `X` (no PSD constraint): `A*(G^+ b)`.
    pub fn min_norm_solution<T: Field>(
        &self,
        map: &SensingMap<T>,
        b: &DVector<f64>,
    ) -> Result<HermitianMatrix<T>> {
        let w = self.pinv_apply(b);
        map.adjoint(&w)
    }

    /// Verify `b` is reachable through the kept Gram eigenspace: the
    /// min-norm solution must fit the measurements to `tol` relative.
    /// Failure names the Gram condition number, since an unreachable `b`
    /// on exact data means the pseudo-inverse truncated real directions.
    pub fn check_reachable<T: Field>(
        &self,
        map: &SensingMap<T>,
        b: &DVector<f64>,
        tol: f64,
    ) -> Result<()> {
        let x = self.min_norm_solution(map, b)?;
        let resid = (map.apply(&x)? - b).norm() / super::resid_denom(b);
        if resid > tol {
            return Err(Error::GramIllConditioned { cond: self.cond });
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sensing::{gen_ground_truth, gen_rank_one_gaussian, gen_wishart, WishartParams};

    #[test]
    fn projection_is_idempotent_and_feasible() {
        let map = gen_wishart(5, 8, 3, &WishartParams::default()).unwrap();
        let x_star = gen_ground_truth::<f64>(5, 2, false, 4).unwrap().matrix;
        let b = map.apply(&x_star).unwrap();
        let proj = AffineProjector::new(&map).unwrap();

        let x = HermitianMatrix::identity(5);
        let p1 = proj.project(&map, &x, &b).unwrap();
        let resid = (map.apply(&p1).unwrap() - &b).norm() / b.norm();
        assert!(resid < 1e-10, "resid {resid}");

        let p2 = proj.project(&map, &p1, &b).unwrap();
        assert!(p1.fro_dist(&p2).unwrap() < 1e-9 * p1.fro_norm().max(1.0));
    }

    #[test]
    fn projection_moves_orthogonally() {
        // x - P(x) must be orthogonal to the affine set's direction space,
        // i.e. in the span of the A_i: check <x - P(x), Z> = 0 for a Z
        // orthogonal to all A_i... easier: P is the nearest feasible point,
        // so for any feasible F, ||x - P(x)|| <= ||x - F||.
        let map = gen_wishart(4, 5, 9, &WishartParams::default()).unwrap();
        let x_star = gen_ground_truth::<f64>(4, 1, false, 10).unwrap().matrix;
        let b = map.apply(&x_star).unwrap();
        let proj = AffineProjector::new(&map).unwrap();
        let x = gen_ground_truth::<f64>(4, 4, false, 11).unwrap().matrix;
        let px = proj.project(&map, &x, &b).unwrap();
        let d_proj = x.fro_dist(&px).unwrap();
        let d_star = x.fro_dist(&x_star).unwrap();
        assert!(d_proj <= d_star + 1e-10, "{d_proj} > {d_star}");
    }

    #[test]
    fn min_norm_solution_matches_truth_at_full_measurement_count() {
        // m = n(n+1)/2 independent measurements determine X uniquely
        let n = 4;
        let m = n * (n + 1) / 2;
        let map = gen_wishart(n, m, 7, &WishartParams::default()).unwrap();
        let x_star = gen_ground_truth::<f64>(n, 2, false, 8).unwrap().matrix;
        let b = map.apply(&x_star).unwrap();
        let proj = AffineProjector::new(&map).unwrap();
        let x = proj.min_norm_solution(&map, &b).unwrap();
        assert!(x.fro_dist(&x_star).unwrap() <= 1e-8 * x_star.fro_norm());
        assert_eq!(proj.rank(), m);
    }

    #[test]
    fn rank_deficient_gram_is_handled_and_reachability_checked() {
        // duplicate measurements: Gram rank collapses but projection works
        let base = gen_rank_one_gaussian(3, 2, 5).unwrap();
        let mats = vec![
            base.matrix(0).clone(),
            base.matrix(0).clone(),
            base.matrix(1).clone(),
        ];
        let map = SensingMap::from_matrices(mats).unwrap();
        let proj = AffineProjector::new(&map).unwrap();
        assert_eq!(proj.rank(), 2);

        // consistent b: reachable
        let x_star = gen_ground_truth::<f64>(3, 1, false, 6).unwrap().matrix;
        let b = map.apply(&x_star).unwrap();
        proj.check_reachable(&map, &b, 1e-8).unwrap();

        // inconsistent b (duplicated rows disagree): unreachable
        let mut bad = b.clone();
        bad[0] += 1.0;
        assert!(matches!(
            proj.check_reachable(&map, &bad, 1e-8),
            Err(Error::GramIllConditioned { .. })
        ));
    }

    #[test]
    fn zero_map_rejected() {
        let map = SensingMap::from_matrices(vec![HermitianMatrix::<f64>::zeros(3)]).unwrap();
        assert!(matches!(
            AffineProjector::new(&map),
            Err(Error::GramIllConditioned { .. })
        ));
    }
}
