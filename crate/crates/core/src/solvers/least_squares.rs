//! Unconstrained least squares: the baseline the PSD constraint is
//! measured against.
//!
//! Returns the minimum-Frobenius-norm Hermitian solution of `A(X) = b`
//! through the Gram pseudo-inverse, with no cone constraint. Below
//! `m = n(n+1)/2` measurements this is underdetermined and lands far
//! from a planted low-rank truth — which is exactly its experimental
//! role.

use super::{resid_denom, AffineProjector, SolverReport};
use crate::field::Field;
use crate::sensing::SensingMap;
use crate::{Error, Result};
use nalgebra::DVector;
use std::time::Instant;

pub fn unconstrained_ls<T: Field>(
    map: &SensingMap<T>,
    b: &DVector<f64>,
) -> Result<SolverReport<T>> {
    let start = Instant::now();
    if b.len() != map.m() {
        return Err(Error::DimensionMismatch {
            expected: map.m(),
            got: b.len(),
            context: "unconstrained_ls: measurement vector",
        });
    }
    let proj = AffineProjector::new(map)?;
    let x = proj.min_norm_solution(map, b)?;
    let rel = (map.apply(&x)? - b).norm() / resid_denom(b);
    let denom = resid_denom(b);
    Ok(SolverReport {
        solver: "unconstrained_ls",
        x_hat: x,
        iters: 1,
        // direct method: always "done"; the residual reports whether b
        // was reachable
        converged: true,
        resid_history: vec![rel],
        objective_value: 0.5 * (rel * denom) * (rel * denom),
        wall_time: start.elapsed(),
        descent_violations: 0,
        dist_full: None,
        dist_rank: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::HermitianMatrix;
    use crate::sensing::{gen_ground_truth, gen_wishart, SensingMap, WishartParams};

    #[test]
    fn full_measurement_count_recovers_exactly() {
        let n = 4;
        let m = n * (n + 1) / 2;
        let truth = gen_ground_truth::<f64>(n, 1, false, 2).unwrap();
        let map = gen_wishart(n, m, 3, &WishartParams::default()).unwrap();
        let b = map.apply(&truth.matrix).unwrap();
        let mut rep = unconstrained_ls(&map, &b).unwrap();
        rep.eval_against(&truth).unwrap();
        assert!(rep.dist_full.unwrap() <= 1e-8 * truth.matrix.fro_norm());
        assert!(rep.final_resid() <= 1e-10);
    }

    #[test]
    fn single_identity_measurement_gives_min_norm_point() {
        // A = I, b = 1: min-Frobenius solution of tr X = 1 is I/n
        let n = 2;
        let map =
            SensingMap::from_matrices(vec![HermitianMatrix::<f64>::identity(n)]).unwrap();
        let b = DVector::from_element(1, 1.0);
        let rep = unconstrained_ls(&map, &b).unwrap();
        let expect = HermitianMatrix::<f64>::identity(n).scale(0.5);
        assert!(rep.x_hat.fro_dist(&expect).unwrap() <= 1e-12);
    }

    #[test]
    fn zero_measurements_give_zero() {
        let map = gen_wishart(3, 4, 5, &WishartParams::default()).unwrap();
        let b = DVector::zeros(4);
        let rep = unconstrained_ls(&map, &b).unwrap();
        assert_eq!(rep.x_hat.fro_norm(), 0.0);
    }

    #[test]
    fn underdetermined_regime_misses_low_rank_truth() {
        // m far below n(n+1)/2: the min-norm point is not the planted truth
        let n = 8;
        let truth = gen_ground_truth::<f64>(n, 1, false, 6).unwrap();
        let map = crate::sensing::gen_rank_one_gaussian(n, 12, 7).unwrap();
        let b = map.apply(&truth.matrix).unwrap();
        let mut rep = unconstrained_ls(&map, &b).unwrap();
        rep.eval_against(&truth).unwrap();
        assert!(rep.final_resid() <= 1e-10); // feasible...
        let d = rep.dist_full.unwrap() / truth.matrix.fro_norm();
        assert!(d >= 1e-1, "relative dist {d}"); // ...but wrong
    }
}
