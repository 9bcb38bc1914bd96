//! Recovery solvers.
//!
//! Five ways to attack `find X with A(X) = b`: factored gradient descent
//! ([`fgd`]), projected gradient descent over the PSD cone ([`pgd_psd`]),
//! nuclear-norm minimization by proximal continuation ([`nuclear_min`]),
//! minimum-Frobenius-norm feasibility by Dykstra's alternating
//! projections ([`min_fro_norm`]), and the unconstrained least-squares
//! baseline ([`least_squares::unconstrained_ls`]). Their mutual agreement
//! on well-posed instances is the point: with enough measurements the
//! PSD-feasible set collapses to one matrix and every solver lands on it.

mod affine;
mod fgd;
mod init;
mod least_squares;
mod min_fro;
mod nuclear;
mod pgd;

pub use affine::AffineProjector;
pub use fgd::fgd;
pub use init::{spectral_init, SpectralInit};
pub use least_squares::unconstrained_ls;
pub use min_fro::min_fro_norm;
pub use nuclear::nuclear_min;
pub use pgd::{pgd_psd, pgd_psd_from};

use crate::field::Field;
use crate::linalg::HermitianMatrix;
use crate::sensing::GroundTruth;
use crate::{Error, Result};
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use std::time::Duration;

/// Step size: a fixed positive value or the spectral-init prescription.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StepSize {
    Auto,
    Fixed(f64),
}

impl Default for StepSize {
    fn default() -> Self {
        StepSize::Auto
    }
}

impl std::fmt::Display for StepSize {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            StepSize::Auto => write!(f, "auto"),
            StepSize::Fixed(v) => write!(f, "{v}"),
        }
    }
}

impl std::str::FromStr for StepSize {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        if s == "auto" {
            return Ok(StepSize::Auto);
        }
        s.parse::<f64>()
            .map(StepSize::Fixed)
            .map_err(|_| Error::InvalidConfig(format!("step size {s:?} is neither \"auto\" nor a number")))
    }
}

impl Serialize for StepSize {
    fn serialize<S: Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            StepSize::Auto => ser.serialize_str("auto"),
            StepSize::Fixed(v) => ser.serialize_f64(*v),
        }
    }
}

impl<'de> Deserialize<'de> for StepSize {
    fn deserialize<D: Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        let v = serde_json::Value::deserialize(de)?;
        match v {
            serde_json::Value::String(s) if s == "auto" => Ok(StepSize::Auto),
            serde_json::Value::Number(n) => n
                .as_f64()
                .map(StepSize::Fixed)
                .ok_or_else(|| D::Error::custom("step size must be finite")),
            other => Err(D::Error::custom(format!(
                "step size must be \"auto\" or a number, got {other}"
            ))),
        }
    }
}

/// Rank budget: factor width / projection rank, or the full dimension.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RankBudget {
    Full,
    Fixed(usize),
}

impl Default for RankBudget {
    fn default() -> Self {
        RankBudget::Full
    }
}

impl std::fmt::Display for RankBudget {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            RankBudget::Full => write!(f, "full"),
            RankBudget::Fixed(r) => write!(f, "{r}"),
        }
    }
}

impl std::str::FromStr for RankBudget {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        if s == "full" {
            return Ok(RankBudget::Full);
        }
        s.parse::<usize>()
            .map(RankBudget::Fixed)
            .map_err(|_| Error::InvalidConfig(format!("rank budget {s:?} is neither \"full\" nor an integer")))
    }
}

impl Serialize for RankBudget {
    fn serialize<S: Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            RankBudget::Full => ser.serialize_str("full"),
            RankBudget::Fixed(r) => ser.serialize_u64(*r as u64),
        }
    }
}

impl<'de> Deserialize<'de> for RankBudget {
    fn deserialize<D: Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        let v = serde_json::Value::deserialize(de)?;
        match v {
            serde_json::Value::String(s) if s == "full" => Ok(RankBudget::Full),
            serde_json::Value::Number(n) => n
                .as_u64()
                .map(|r| RankBudget::Fixed(r as usize))
                .ok_or_else(|| D::Error::custom("rank budget must be a nonnegative integer")),
            other => Err(D::Error::custom(format!(
                "rank budget must be \"full\" or an integer, got {other}"
            ))),
        }
    }
}

/// Shared solver knobs.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverConfig {
    pub max_iters: usize,
    /// Stop when `||b - A(X_k)||_2 / ||b||_2` drops below this
    /// (absolute residual when `b = 0`).
    pub tol_resid: f64,
    pub eta: StepSize,
    pub rank_budget: RankBudget,
    /// Reserved for randomized variants; the shipped initializations are
    /// deterministic, so this only flows into reports.
    pub seed: u64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            max_iters: 20_000,
            tol_resid: 1e-7,
            eta: StepSize::Auto,
            rank_budget: RankBudget::Full,
            seed: 0,
        }
    }
}

impl SolverConfig {
    /// Validate and resolve the rank budget against matrix size `n`.
    pub fn validate(&self, n: usize) -> Result<usize> {
        if self.max_iters == 0 {
            return Err(Error::InvalidConfig("max_iters must be at least 1".into()));
        }
        if !(self.tol_resid > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "tol_resid = {} must be positive",
                self.tol_resid
            )));
        }
        if let StepSize::Fixed(v) = self.eta {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::InvalidConfig(format!(
                    "eta = {v} must be positive and finite"
                )));
            }
        }
        match self.rank_budget {
            RankBudget::Full => Ok(n),
            RankBudget::Fixed(r) => {
                if r == 0 || r > n {
                    Err(Error::RankOutOfRange { r, n })
                } else {
                    Ok(r)
                }
            }
        }
    }
}

/// Additive slack on the objective before an uptick counts as a descent
/// violation.
pub const DESCENT_SLACK: f64 = 1e-12;

/// What a solver hands back.
#[derive(Debug, Clone)]
pub struct SolverReport<T: Field> {
    pub solver: &'static str,
    pub x_hat: HermitianMatrix<T>,
    /// Update steps performed.
    pub iters: usize,
    /// Whether the stopping tolerance was reached within budget.
    pub converged: bool,
    /// Relative measurement residual per iterate, entry 0 = initial point.
    pub resid_history: Vec<f64>,
    /// `0.5 * ||b - A(X_hat)||^2`.
    pub objective_value: f64,
    pub wall_time: Duration,
    /// Objective upticks beyond [`DESCENT_SLACK`] over the final 80% of
    /// iterations (logged, not fatal).
    pub descent_violations: usize,
    /// `||X_hat - X_star||_F`, when a ground truth was attached.
    pub dist_full: Option<f64>,
    /// `||best_rank_r(X_hat) - X_star||_F` with `r` from the ground truth.
    pub dist_rank: Option<f64>,
}

impl<T: Field> SolverReport<T> {
    /// Fill the distance fields against a known ground truth.
    pub fn eval_against(&mut self, truth: &GroundTruth<T>) -> Result<()> {
        self.dist_full = Some(self.x_hat.fro_dist(&truth.matrix)?);
        let truncated = self.x_hat.best_rank_r(truth.rank)?;
        self.dist_rank = Some(truncated.fro_dist(&truth.matrix)?);
        Ok(())
    }

    pub fn final_resid(&self) -> f64 {
        *self.resid_history.last().unwrap_or(&f64::NAN)
    }

    /// First iterate index whose relative residual is at or below
    /// `thresh`, if any.
    pub fn iters_to(&self, thresh: f64) -> Option<usize> {
        self.resid_history.iter().position(|&r| r <= thresh)
    }
}

/// Residual denominator: `||b||`, or 1 for the zero vector so relative
/// and absolute residuals coincide.
pub(crate) fn resid_denom(b: &nalgebra::DVector<f64>) -> f64 {
    let n = b.norm();
    if n > 0.0 {
        n
    } else {
        1.0
    }
}

/// Count objective upticks (beyond [`DESCENT_SLACK`]) over the final 80%
/// of a residual history. `denom` converts relative residuals back to
/// absolute ones so the slack applies to `g = 0.5 ||b - A(X)||^2`.
pub(crate) fn count_descent_violations(history: &[f64], denom: f64) -> usize {
    if history.len() < 2 {
        return 0;
    }
    let start = history.len() / 5; // skip the first 20%
    let g = |rel: f64| 0.5 * (rel * denom) * (rel * denom);
    history[start..]
        .windows(2)
        .filter(|w| g(w[1]) > g(w[0]) + DESCENT_SLACK)
        .count()
}

/// Divergence watchdog shared by the iterative solvers: trips after 50
/// consecutive iterates whose residual exceeds 10x the initial one.
pub(crate) struct DivergenceGuard {
    initial: f64,
    streak: usize,
}

pub(crate) const DIVERGENCE_FACTOR: f64 = 10.0;
pub(crate) const DIVERGENCE_PATIENCE: usize = 50;

impl DivergenceGuard {
    pub fn new(initial: f64) -> Self {
        Self { initial, streak: 0 }
    }

    /// Record one residual; returns true when the watchdog trips.
    pub fn observe(&mut self, resid: f64) -> bool {
        if !resid.is_finite() || resid > DIVERGENCE_FACTOR * self.initial.max(f64::MIN_POSITIVE) {
            self.streak += 1;
        } else {
            self.streak = 0;
        }
        self.streak >= DIVERGENCE_PATIENCE
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_validation() {
        let n = 8;
        let mut cfg = SolverConfig::default();
        assert_eq!(cfg.validate(n).unwrap(), 8);
        cfg.rank_budget = RankBudget::Fixed(3);
        assert_eq!(cfg.validate(n).unwrap(), 3);
        cfg.rank_budget = RankBudget::Fixed(9);
        assert!(cfg.validate(n).is_err());
        cfg.rank_budget = RankBudget::Full;
        cfg.max_iters = 0;
        assert!(cfg.validate(n).is_err());
        cfg.max_iters = 1;
        cfg.tol_resid = 0.0;
        assert!(cfg.validate(n).is_err());
        cfg.tol_resid = 1e-8;
        cfg.eta = StepSize::Fixed(-1.0);
        assert!(cfg.validate(n).is_err());
    }

    #[test]
    fn step_size_and_rank_budget_serde() {
        let cfg = SolverConfig {
            eta: StepSize::Fixed(0.25),
            rank_budget: RankBudget::Fixed(2),
            ..Default::default()
        };
        let js = serde_json::to_string(&cfg).unwrap();
        let back: SolverConfig = serde_json::from_str(&js).unwrap();
        assert_eq!(back.eta, StepSize::Fixed(0.25));
        assert_eq!(back.rank_budget, RankBudget::Fixed(2));

        let auto: SolverConfig = serde_json::from_str(
            r#"{"max_iters": 10, "tol_resid": 1e-6, "eta": "auto", "rank_budget": "full", "seed": 7}"#,
        )
        .unwrap();
        assert_eq!(auto.eta, StepSize::Auto);
        assert_eq!(auto.rank_budget, RankBudget::Full);

        // parse from CLI-style strings
        assert_eq!("auto".parse::<StepSize>().unwrap(), StepSize::Auto);
        assert_eq!("0.5".parse::<StepSize>().unwrap(), StepSize::Fixed(0.5));
        assert_eq!("full".parse::<RankBudget>().unwrap(), RankBudget::Full);
        assert_eq!("4".parse::<RankBudget>().unwrap(), RankBudget::Fixed(4));
        assert!("nope".parse::<StepSize>().is_err());
    }

    #[test]
    fn descent_violation_counter_ignores_burn_in() {
        // uptick at index 1 (inside first 20%) is ignored; the late one counts
        let hist = vec![1.0, 2.0, 0.5, 0.4, 0.3, 0.2, 0.1, 0.15, 0.05, 0.01];
        assert_eq!(count_descent_violations(&hist, 1.0), 1);
        assert_eq!(count_descent_violations(&[1.0, 0.5], 1.0), 0);
    }

    #[test]
    fn divergence_guard_needs_a_streak() {
        let mut g = DivergenceGuard::new(1.0);
        for _ in 0..DIVERGENCE_PATIENCE - 1 {
            assert!(!g.observe(100.0));
        }
        assert!(!g.observe(0.5)); // streak broken
        for k in 0..DIVERGENCE_PATIENCE {
            let tripped = g.observe(f64::INFINITY);
            assert_eq!(tripped, k == DIVERGENCE_PATIENCE - 1);
        }
    }
}
