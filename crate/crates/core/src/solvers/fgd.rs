//! Factored gradient descent.
//!
//! Parameterize `X = U U^H` with `U` of width `r` (or `n`) and iterate
//! `U <- U - eta * A*(A(U U^H) - b) * U`. PSD-ness is free; the rank
//! budget is enforced by the factor's shape. The chain-rule factor of 2
//! is absorbed into `eta`.

use super::{count_descent_violations, resid_denom, DivergenceGuard, SolverConfig, SolverReport};
use crate::field::Field;
use crate::linalg::HermitianMatrix;
use crate::sensing::SensingMap;
use crate::{Error, Result};
use nalgebra::DVector;
use std::time::Instant;

pub fn fgd<T: Field>(
    map: &SensingMap<T>,
    b: &DVector<f64>,
    cfg: &SolverConfig,
) -> Result<SolverReport<T>> {
    let start = Instant::now();
    let rank = cfg.validate(map.n())?;
    if b.len() != map.m() {
        return Err(Error::DimensionMismatch {
            expected: map.m(),
            got: b.len(),
            context: "fgd: measurement vector",
        });
    }
    let init = super::spectral_init(map, b, rank)?;
    let eta = match cfg.eta {
        super::StepSize::Auto => init.eta_auto,
        super::StepSize::Fixed(v) => v,
    };
    let denom = resid_denom(b);

    let mut u = init.u0;
    let mut x = HermitianMatrix::new(&u * u.adjoint())?;
    let mut history = Vec::with_capacity(64);
    let mut gap = map.apply(&x)? - b;
    let mut rel = gap.norm() / denom;
    history.push(rel);

    let mut guard = DivergenceGuard::new(rel);
    let mut converged = rel <= cfg.tol_resid;
    let mut iters = 0;

    while !converged && iters < cfg.max_iters {
        let grad = map.adjoint(&gap)?;
        u -= (grad.as_matrix() * &u).map(|v| v * T::from_real(eta));
        iters += 1;

        x = HermitianMatrix::new(&u * u.adjoint())?;
        gap = map.apply(&x)? - b;
        rel = gap.norm() / denom;
        history.push(rel);

        if guard.observe(rel) {
            return Err(Error::SolverDiverged {
                solver: "fgd",
                iters,
                residual: rel,
                history,
            });
        }
        converged = rel <= cfg.tol_resid;
    }

    let objective_value = 0.5 * (rel * denom) * (rel * denom);
    let descent_violations = count_descent_violations(&history, denom);
    Ok(SolverReport {
        solver: "fgd",
        x_hat: x,
        iters,
        converged,
        resid_history: history,
        objective_value,
        wall_time: start.elapsed(),
        descent_violations,
        dist_full: None,
        dist_rank: None,
    })
}
