//! Nuclear-norm minimization over `{A(X) = b}` by proximal splitting
//! with continuation.
//!
//! Alternates the eigenvalue soft-threshold (the prox of `lambda ||.||_*`
//! for Hermitian arguments) with projection onto the affine set, while
//! `lambda` decays geometrically to zero; a final clean-up phase at
//! `lambda = 0` polishes feasibility. When the PSD-cone variant is
//! requested the shrinkage also floors eigenvalues at zero (the exact
//! prox of the nuclear norm plus the PSD indicator), and the clean-up
//! alternates PSD and affine projections until both constraints hold.

use super::{resid_denom, AffineProjector, SolverConfig, SolverReport};
use crate::field::Field;
use crate::linalg::HermitianMatrix;
use crate::sensing::SensingMap;
use crate::{Error, Result};
use nalgebra::DVector;
use std::time::Instant;

/// Geometric decay of the shrinkage weight between stages.
const CONTINUATION_RHO: f64 = 0.6;
/// Number of continuation stages (final weight ~ 4e-7 of the initial).
const CONTINUATION_STAGES: usize = 30;
/// Prox/projection cycles per stage.
const CYCLES_PER_STAGE: usize = 6;
/// Relative reachability gate on `b` before iterating.
const RANGE_TOL: f64 = 1e-6;

/// Minimize the nuclear norm subject to `A(X) = b`; with `psd_cone`,
/// additionally constrain `X` to the PSD cone.
pub fn nuclear_min<T: Field>(
    map: &SensingMap<T>,
    b: &DVector<f64>,
    cfg: &SolverConfig,
    psd_cone: bool,
) -> Result<SolverReport<T>> {
    let start = Instant::now();
    cfg.validate(map.n())?;
    if b.len() != map.m() {
        return Err(Error::DimensionMismatch {
            expected: map.m(),
            got: b.len(),
            context: "nuclear_min: measurement vector",
        });
    }
    let solver: &'static str = if psd_cone { "nuclear_psd" } else { "nuclear" };
    let proj = AffineProjector::new(map)?;
    proj.check_reachable(map, b, RANGE_TOL)?;
    let denom = resid_denom(b);

    let mut x = proj.min_norm_solution(map, b)?;
    let mut history = Vec::with_capacity(64);
    history.push((map.apply(&x)? - b).norm() / denom);

    let lambda0 = 0.5 * x.spectral_norm()?;
    let mut iters = 0;
    let mut converged = false;

    if lambda0 > 0.0 {
        let continuation_budget = (CONTINUATION_STAGES * CYCLES_PER_STAGE).min(cfg.max_iters);
        let mut lambda = lambda0;
        let mut stage_cycle = 0;
        for _ in 0..continuation_budget {
            let shrunk = shrink(&x, lambda, psd_cone)?;
            history.push((map.apply(&shrunk)? - b).norm() / denom);
            x = proj.project(map, &shrunk, b)?;
            iters += 1;
            stage_cycle += 1;
            if stage_cycle == CYCLES_PER_STAGE {
                stage_cycle = 0;
                lambda *= CONTINUATION_RHO;
            }
        }
    }

    // clean-up at lambda = 0: restore feasibility (and PSD-ness for the
    // cone variant) up to tol_resid
    if psd_cone {
        while iters < cfg.max_iters {
            let x_psd = x.psd_project()?;
            let rel = (map.apply(&x_psd)? - b).norm() / denom;
            history.push(rel);
            iters += 1;
            if rel <= cfg.tol_resid {
                x = x_psd;
                converged = true;
                break;
            }
            x = proj.project(map, &x_psd, b)?;
        }
    } else {
        // x is affine-feasible after the last projection (or was the
        // feasible starting point when lambda0 == 0)
        let rel = (map.apply(&x)? - b).norm() / denom;
        history.push(rel);
        converged = rel <= cfg.tol_resid;
    }

    let rel = *history.last().expect("nonempty history");
    let objective_value = 0.5 * (rel * denom) * (rel * denom);
    // alternation residuals are not monotone by design; informational only
    let descent_violations = super::count_descent_violations(&history, denom);
    Ok(SolverReport {
        solver,
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

/// Eigenvalue shrinkage: the prox of `lambda ||.||_*` (symmetric
/// soft-threshold), flooring at zero as well when `psd_cone` (the prox of
/// nuclear norm + PSD indicator).
fn shrink<T: Field>(
    x: &HermitianMatrix<T>,
    lambda: f64,
    psd_cone: bool,
) -> Result<HermitianMatrix<T>> {
    let eig = x.eig()?;
    let vals = eig.values.map(|v| {
        if psd_cone {
            (v - lambda).max(0.0)
        } else {
            v.signum() * (v.abs() - lambda).max(0.0)
        }
    });
    eig.reconstruct_with(&vals)
}
