//! Python bindings: the `psdsense` extension module.
//!
//! Every class wraps either the real (`f64`) or the complex (`Complex64`)
//! instantiation of the corresponding core type and dispatches on that tag at
//! runtime, so Python callers never see the generics. Matrices cross the
//! boundary as nested lists — floats on the real field, Python complex
//! numbers otherwise.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use pyo3::exceptions::{PyIOError, PyIndexError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use psdsense_core::sensing::{
    gen_ground_truth, gen_pauli, gen_rank_one_gaussian, gen_wishart, GroundTruth, PauliParams,
    WishartParams,
};
use psdsense_core::solvers::{
    fgd, min_fro_norm, nuclear_min, pgd_psd, unconstrained_ls, RankBudget, SolverConfig,
    SolverReport, StepSize,
};
use psdsense_core::transform::{self, TraceCheck, WhitenedProblem};
use psdsense_core::{rip, Error, ErrorKind, Field, HermitianMatrix, ScalarField, SensingMap};

fn to_py(err: Error) -> PyErr {
    match err.kind() {
        ErrorKind::Config => PyValueError::new_err(err.to_string()),
        ErrorKind::Numerical => PyRuntimeError::new_err(err.to_string()),
        ErrorKind::Io => PyIOError::new_err(err.to_string()),
    }
}

fn field_mismatch() -> PyErr {
    PyValueError::new_err("operands live on different scalar fields")
}

fn parse_field(s: &str) -> PyResult<ScalarField> {
    s.parse::<ScalarField>().map_err(to_py)
}

/// Nested rows -> dense square matrix, entry-wise via `from_re_im`.
fn rows_to_dmatrix<T: Field>(rows: &[Vec<Complex64>]) -> PyResult<DMatrix<T>> {
    let n = rows.len();
    if n == 0 {
        return Err(PyValueError::new_err("matrix needs at least one row"));
    }
    for (i, row) in rows.iter().enumerate() {
        if row.len() != n {
            return Err(PyValueError::new_err(format!(
                "row {i} has {} entries, expected {n}",
                row.len()
            )));
        }
    }
    Ok(DMatrix::from_fn(n, n, |i, j| {
        T::from_re_im(rows[i][j].re, rows[i][j].im)
    }))
}

/// Dense matrix -> nested Python lists (floats or complex per the field).
fn dmatrix_to_py<T: Field>(py: Python<'_>, m: &DMatrix<T>) -> PyResult<Py<PyAny>> {
    match T::FIELD {
        ScalarField::Real => {
            let rows: Vec<Vec<f64>> = (0..m.nrows())
                .map(|i| (0..m.ncols()).map(|j| m[(i, j)].re()).collect())
                .collect();
            Ok(rows.into_pyobject(py)?.into_any().unbind())
        }
        ScalarField::Complex => {
            let rows: Vec<Vec<Complex64>> = (0..m.nrows())
                .map(|i| {
                    (0..m.ncols())
                        .map(|j| Complex64::new(m[(i, j)].re(), m[(i, j)].im()))
                        .collect()
                })
                .collect();
            Ok(rows.into_pyobject(py)?.into_any().unbind())
        }
    }
}

#[derive(Clone)]
enum MatrixInner {
    Real(HermitianMatrix<f64>),
    Complex(HermitianMatrix<Complex64>),
}

/// Run `$e` on whichever field the wrapped value holds.
macro_rules! on_matrix {
    ($self:expr, $m:ident => $e:expr) => {
        match &$self.inner {
            MatrixInner::Real($m) => $e,
            MatrixInner::Complex($m) => $e,
        }
    };
}

/// Wrap a same-field `Result<HermitianMatrix<T>>` back into the class.
macro_rules! map_matrix {
    ($self:expr, $m:ident => $e:expr) => {
        match &$self.inner {
            MatrixInner::Real($m) => $e.map(MatrixInner::Real),
            MatrixInner::Complex($m) => $e.map(MatrixInner::Complex),
        }
        .map(|inner| PyHermitianMatrix { inner })
        .map_err(to_py)
    };
}

/// Dense square matrix over the real or complex field, symmetrized at
/// construction.
#[pyclass(name = "HermitianMatrix", from_py_object)]
#[derive(Clone)]
pub struct PyHermitianMatrix {
    inner: MatrixInner,
}

impl PyHermitianMatrix {
    fn from_real(m: HermitianMatrix<f64>) -> Self {
        Self {
            inner: MatrixInner::Real(m),
        }
    }

    fn from_complex(m: HermitianMatrix<Complex64>) -> Self {
        Self {
            inner: MatrixInner::Complex(m),
        }
    }
}

#[pymethods]
impl PyHermitianMatrix {
    /// Build from nested rows. Entries may be floats or complex numbers;
    /// the field is inferred unless `field` forces it. The matrix is
    /// symmetrized as `(M + M^H)/2`.
    #[new]
    #[pyo3(signature = (rows, field=None))]
    fn new(rows: Vec<Vec<Complex64>>, field: Option<&str>) -> PyResult<Self> {
        let all_real = rows.iter().flatten().all(|z| z.im == 0.0);
        let field = match field {
            Some(s) => parse_field(s)?,
            None if all_real => ScalarField::Real,
            None => ScalarField::Complex,
        };
        let inner = match field {
            ScalarField::Real => {
                if !all_real {
                    return Err(PyValueError::new_err(
                        "field=\"real\" but entries have nonzero imaginary parts",
                    ));
                }
                MatrixInner::Real(HermitianMatrix::new(rows_to_dmatrix(&rows)?).map_err(to_py)?)
            }
            ScalarField::Complex => {
                MatrixInner::Complex(HermitianMatrix::new(rows_to_dmatrix(&rows)?).map_err(to_py)?)
            }
        };
        Ok(Self { inner })
    }

    #[staticmethod]
    #[pyo3(signature = (n, field="real"))]
    fn zeros(n: usize, field: &str) -> PyResult<Self> {
        Ok(match parse_field(field)? {
            ScalarField::Real => Self::from_real(HermitianMatrix::zeros(n)),
            ScalarField::Complex => Self::from_complex(HermitianMatrix::zeros(n)),
        })
    }

    #[staticmethod]
    #[pyo3(signature = (n, field="real"))]
    fn identity(n: usize, field: &str) -> PyResult<Self> {
        Ok(match parse_field(field)? {
            ScalarField::Real => Self::from_real(HermitianMatrix::identity(n)),
            ScalarField::Complex => Self::from_complex(HermitianMatrix::identity(n)),
        })
    }

    #[getter]
    fn n(&self) -> usize {
        on_matrix!(self, m => m.n())
    }

    #[getter]
    fn field(&self) -> String {
        match &self.inner {
            MatrixInner::Real(_) => "real".into(),
            MatrixInner::Complex(_) => "complex".into(),
        }
    }

    /// Entries as nested lists, row by row.
    fn rows(&self, py: Python<'_>) -> PyResult<Py<PyAny>> {
        on_matrix!(self, m => dmatrix_to_py(py, m.as_matrix()))
    }

    fn entry(&self, py: Python<'_>, i: usize, j: usize) -> PyResult<Py<PyAny>> {
        let n = self.n();
        if i >= n || j >= n {
            return Err(PyIndexError::new_err(format!(
                "entry ({i}, {j}) out of range for n = {n}"
            )));
        }
        match &self.inner {
            MatrixInner::Real(m) => Ok(m.as_matrix()[(i, j)].into_pyobject(py)?.into_any().unbind()),
            MatrixInner::Complex(m) => {
                Ok(m.as_matrix()[(i, j)].into_pyobject(py)?.into_any().unbind())
            }
        }
    }

    fn trace(&self) -> f64 {
        on_matrix!(self, m => m.trace())
    }

    fn fro_norm(&self) -> f64 {
        on_matrix!(self, m => m.fro_norm())
    }

    fn spectral_norm(&self) -> PyResult<f64> {
        on_matrix!(self, m => m.spectral_norm().map_err(to_py))
    }

    fn nuclear_norm(&self) -> PyResult<f64> {
        on_matrix!(self, m => m.nuclear_norm().map_err(to_py))
    }

    fn min_eigenvalue(&self) -> PyResult<f64> {
        on_matrix!(self, m => m.min_eigenvalue().map_err(to_py))
    }

    fn fro_dist(&self, other: &PyHermitianMatrix) -> PyResult<f64> {
        match (&self.inner, &other.inner) {
            (MatrixInner::Real(a), MatrixInner::Real(b)) => a.fro_dist(b).map_err(to_py),
            (MatrixInner::Complex(a), MatrixInner::Complex(b)) => a.fro_dist(b).map_err(to_py),
            _ => Err(field_mismatch()),
        }
    }

    /// Real inner product `Re tr(A^H B)`.
    fn inner(&self, other: &PyHermitianMatrix) -> PyResult<f64> {
        match (&self.inner, &other.inner) {
            (MatrixInner::Real(a), MatrixInner::Real(b)) => a.inner(b).map_err(to_py),
            (MatrixInner::Complex(a), MatrixInner::Complex(b)) => a.inner(b).map_err(to_py),
            _ => Err(field_mismatch()),
        }
    }

    /// Eigenvalues (descending) and eigenvector matrix as nested rows.
    fn eig(&self, py: Python<'_>) -> PyResult<(Vec<f64>, Py<PyAny>)> {
        on_matrix!(self, m => {
            let d = m.eig().map_err(to_py)?;
            Ok((d.values.iter().copied().collect(), dmatrix_to_py(py, &d.vectors)?))
        })
    }

    /// Frobenius-nearest positive-semidefinite matrix.
    fn psd_project(&self) -> PyResult<Self> {
        map_matrix!(self, m => m.psd_project())
    }

    /// Frobenius-nearest PSD matrix of rank at most `r`.
    fn psd_rank_project(&self, r: usize) -> PyResult<Self> {
        map_matrix!(self, m => m.psd_rank_project(r))
    }

    /// Best rank-`r` approximation (signed eigenvalue truncation).
    fn best_rank(&self, r: usize) -> PyResult<Self> {
        map_matrix!(self, m => m.best_rank_r(r))
    }

    fn scale(&self, s: f64) -> Self {
        Self {
            inner: match &self.inner {
                MatrixInner::Real(m) => MatrixInner::Real(m.scale(s)),
                MatrixInner::Complex(m) => MatrixInner::Complex(m.scale(s)),
            },
        }
    }

    fn __repr__(&self) -> String {
        format!("HermitianMatrix(n={}, field={})", self.n(), self.field())
    }
}

#[derive(Clone)]
enum MapInner {
    Real(SensingMap<f64>),
    Complex(SensingMap<Complex64>),
}

macro_rules! on_map {
    ($self:expr, $m:ident => $e:expr) => {
        match &$self.inner {
            MapInner::Real($m) => $e,
            MapInner::Complex($m) => $e,
        }
    };
}

/// Ordered list of measurement matrices; implements the linear map
/// `A(X)_i = Re tr(A_i^H X)` and its adjoint.
#[pyclass(name = "SensingMap", skip_from_py_object)]
#[derive(Clone)]
pub struct PySensingMap {
    inner: MapInner,
}

#[pymethods]
impl PySensingMap {
    /// `m` Wishart measurements on `n x n` real symmetric matrices.
    /// `p` defaults to `max(2n, n + 2)` degrees of freedom.
    #[staticmethod]
    #[pyo3(signature = (n, m, seed=0, p=None, sigma2=1.0, bartlett=false))]
    fn wishart(
        n: usize,
        m: usize,
        seed: u64,
        p: Option<usize>,
        sigma2: f64,
        bartlett: bool,
    ) -> PyResult<Self> {
        let params = WishartParams { p, sigma2, bartlett };
        Ok(Self {
            inner: MapInner::Real(gen_wishart(n, m, seed, &params).map_err(to_py)?),
        })
    }

    /// `m` rank-one Gaussian measurements `a_i a_i^T` on `n x n` matrices.
    #[staticmethod]
    #[pyo3(signature = (n, m, seed=0))]
    fn rank_one_gaussian(n: usize, m: usize, seed: u64) -> PyResult<Self> {
        Ok(Self {
            inner: MapInner::Real(gen_rank_one_gaussian(n, m, seed).map_err(to_py)?),
        })
    }

    /// `m` Pauli projector measurements on `qubits` qubits (`n = 2^qubits`,
    /// complex field). `sign_rule` is `"random"` or `"plus"`.
    #[staticmethod]
    #[pyo3(signature = (qubits, m, seed=0, sign_rule="random"))]
    fn pauli(qubits: usize, m: usize, seed: u64, sign_rule: &str) -> PyResult<Self> {
        let params = PauliParams {
            sign_rule: sign_rule.parse().map_err(to_py)?,
        };
        Ok(Self {
            inner: MapInner::Complex(gen_pauli(qubits, m, seed, &params).map_err(to_py)?),
        })
    }

    /// Custom map from explicit measurement matrices (all on one field).
    #[staticmethod]
    fn from_matrices(matrices: Vec<PyHermitianMatrix>) -> PyResult<Self> {
        let first = matrices
            .first()
            .ok_or_else(|| PyValueError::new_err("need at least one measurement matrix"))?;
        let inner = match &first.inner {
            MatrixInner::Real(_) => {
                let ms = matrices
                    .iter()
                    .map(|w| match &w.inner {
                        MatrixInner::Real(m) => Ok(m.clone()),
                        MatrixInner::Complex(_) => Err(field_mismatch()),
                    })
                    .collect::<PyResult<Vec<_>>>()?;
                MapInner::Real(SensingMap::from_matrices(ms).map_err(to_py)?)
            }
            MatrixInner::Complex(_) => {
                let ms = matrices
                    .iter()
                    .map(|w| match &w.inner {
                        MatrixInner::Complex(m) => Ok(m.clone()),
                        MatrixInner::Real(_) => Err(field_mismatch()),
                    })
                    .collect::<PyResult<Vec<_>>>()?;
                MapInner::Complex(SensingMap::from_matrices(ms).map_err(to_py)?)
            }
        };
        Ok(Self { inner })
    }

    #[getter]
    fn n(&self) -> usize {
        on_map!(self, m => m.n())
    }

    #[getter]
    fn m(&self) -> usize {
        on_map!(self, m => m.m())
    }

    #[getter]
    fn field(&self) -> String {
        match &self.inner {
            MapInner::Real(_) => "real".into(),
            MapInner::Complex(_) => "complex".into(),
        }
    }

    #[getter]
    fn family(&self) -> String {
        on_map!(self, m => m.family().to_string())
    }

    fn matrix(&self, i: usize) -> PyResult<PyHermitianMatrix> {
        if i >= self.m() {
            return Err(PyIndexError::new_err(format!(
                "measurement {i} out of range for m = {}",
                self.m()
            )));
        }
        Ok(match &self.inner {
            MapInner::Real(m) => PyHermitianMatrix::from_real(m.matrix(i).clone()),
            MapInner::Complex(m) => PyHermitianMatrix::from_complex(m.matrix(i).clone()),
        })
    }

    /// Forward map: the measurement vector of `x`.
    fn apply(&self, x: &PyHermitianMatrix) -> PyResult<Vec<f64>> {
        let b = match (&self.inner, &x.inner) {
            (MapInner::Real(m), MatrixInner::Real(x)) => m.apply(x).map_err(to_py)?,
            (MapInner::Complex(m), MatrixInner::Complex(x)) => m.apply(x).map_err(to_py)?,
            _ => return Err(field_mismatch()),
        };
        Ok(b.iter().copied().collect())
    }

    /// Adjoint map: `sum_i y_i A_i`.
    fn adjoint(&self, y: Vec<f64>) -> PyResult<PyHermitianMatrix> {
        let y = DVector::from_vec(y);
        Ok(match &self.inner {
            MapInner::Real(m) => PyHermitianMatrix::from_real(m.adjoint(&y).map_err(to_py)?),
            MapInner::Complex(m) => PyHermitianMatrix::from_complex(m.adjoint(&y).map_err(to_py)?),
        })
    }

    fn __repr__(&self) -> String {
        format!(
            "SensingMap(family={}, n={}, m={}, field={})",
            self.family(),
            self.n(),
            self.m(),
            self.field()
        )
    }
}

#[derive(Clone)]
enum TruthInner {
    Real(GroundTruth<f64>),
    Complex(GroundTruth<Complex64>),
}

/// Planted low-rank PSD matrix together with its rank.
#[pyclass(name = "GroundTruth", skip_from_py_object)]
#[derive(Clone)]
pub struct PyGroundTruth {
    inner: TruthInner,
}

#[pymethods]
impl PyGroundTruth {
    #[getter]
    fn matrix(&self) -> PyHermitianMatrix {
        match &self.inner {
            TruthInner::Real(g) => PyHermitianMatrix::from_real(g.matrix.clone()),
            TruthInner::Complex(g) => PyHermitianMatrix::from_complex(g.matrix.clone()),
        }
    }

    #[getter]
    fn rank(&self) -> usize {
        match &self.inner {
            TruthInner::Real(g) => g.rank,
            TruthInner::Complex(g) => g.rank,
        }
    }

    #[getter]
    fn normalized(&self) -> bool {
        match &self.inner {
            TruthInner::Real(g) => g.normalized,
            TruthInner::Complex(g) => g.normalized,
        }
    }

    #[getter]
    fn field(&self) -> String {
        match &self.inner {
            TruthInner::Real(_) => "real".into(),
            TruthInner::Complex(_) => "complex".into(),
        }
    }

    fn __repr__(&self) -> String {
        let g = self.matrix();
        format!(
            "GroundTruth(n={}, rank={}, field={})",
            g.n(),
            self.rank(),
            self.field()
        )
    }
}

/// Draw `X = G G^H` with an `n x rank` standard normal factor; optionally
/// rescaled to unit trace.
#[pyfunction]
#[pyo3(signature = (n, rank, seed=0, normalized=false, field="real"))]
fn ground_truth(
    n: usize,
    rank: usize,
    seed: u64,
    normalized: bool,
    field: &str,
) -> PyResult<PyGroundTruth> {
    let inner = match parse_field(field)? {
        ScalarField::Real => {
            TruthInner::Real(gen_ground_truth(n, rank, normalized, seed).map_err(to_py)?)
        }
        ScalarField::Complex => {
            TruthInner::Complex(gen_ground_truth(n, rank, normalized, seed).map_err(to_py)?)
        }
    };
    Ok(PyGroundTruth { inner })
}

/// Outcome of one solver run.
#[pyclass(name = "SolverReport", skip_from_py_object)]
#[derive(Clone)]
pub struct PySolverReport {
    #[pyo3(get)]
    solver: String,
    #[pyo3(get)]
    x_hat: PyHermitianMatrix,
    #[pyo3(get)]
    iters: usize,
    #[pyo3(get)]
    converged: bool,
    #[pyo3(get)]
    resid_final: f64,
    #[pyo3(get)]
    objective_value: f64,
    #[pyo3(get)]
    wall_ms: f64,
    #[pyo3(get)]
    descent_violations: usize,
    /// `||X_hat - X_star||_F`, present when a ground truth was passed.
    #[pyo3(get)]
    dist_full: Option<f64>,
    /// Distance after truncating `X_hat` to the ground-truth rank.
    #[pyo3(get)]
    dist_rank: Option<f64>,
    resid_history: Vec<f64>,
}

#[pymethods]
impl PySolverReport {
    /// Relative residual per iterate, entry 0 = initial point.
    fn resid_history(&self) -> Vec<f64> {
        self.resid_history.clone()
    }

    fn __repr__(&self) -> String {
        format!(
            "SolverReport(solver={}, iters={}, converged={}, resid_final={:.3e})",
            self.solver, self.iters, self.converged, self.resid_final
        )
    }
}

fn make_py_report<T: Field>(
    report: SolverReport<T>,
    wrap: fn(HermitianMatrix<T>) -> PyHermitianMatrix,
) -> PySolverReport {
    PySolverReport {
        solver: report.solver.to_string(),
        iters: report.iters,
        converged: report.converged,
        resid_final: report.final_resid(),
        objective_value: report.objective_value,
        wall_ms: report.wall_time.as_secs_f64() * 1e3,
        descent_violations: report.descent_violations,
        dist_full: report.dist_full,
        dist_rank: report.dist_rank,
        resid_history: report.resid_history,
        x_hat: wrap(report.x_hat),
    }
}

fn run_solver<T: Field>(
    map: &SensingMap<T>,
    b: &DVector<f64>,
    solver: &str,
    cfg: &SolverConfig,
) -> PyResult<SolverReport<T>> {
    match solver {
        "fgd" => fgd(map, b, cfg),
        "pgd_psd" | "pgd" => pgd_psd(map, b, cfg),
        "min_fro_norm" | "min_fro" => min_fro_norm(map, b, cfg),
        "nuclear_psd" => nuclear_min(map, b, cfg, true),
        "nuclear" => nuclear_min(map, b, cfg, false),
        "unconstrained_ls" | "ls" => unconstrained_ls(map, b),
        other => Err(Error::InvalidConfig(format!(
            "unknown solver {other:?} (expected fgd, pgd_psd, min_fro_norm, nuclear_psd, or unconstrained_ls)"
        ))),
    }
    .map_err(to_py)
}

/// Run one solver on `(map, b)`.
///
/// `rank` caps the factored solver's rank budget (default: full rank).
/// `eta` fixes the step size (default: automatic). Passing `truth` fills
/// the report's distance fields.
#[pyfunction]
#[pyo3(signature = (map, b, solver, rank=None, eta=None, max_iters=None, tol=None, seed=0, truth=None))]
#[allow(clippy::too_many_arguments)]
fn solve(
    map: &PySensingMap,
    b: Vec<f64>,
    solver: &str,
    rank: Option<usize>,
    eta: Option<f64>,
    max_iters: Option<usize>,
    tol: Option<f64>,
    seed: u64,
    truth: Option<&PyGroundTruth>,
) -> PyResult<PySolverReport> {
    let mut cfg = SolverConfig {
        seed,
        ..SolverConfig::default()
    };
    if let Some(v) = max_iters {
        cfg.max_iters = v;
    }
    if let Some(v) = tol {
        cfg.tol_resid = v;
    }
    if let Some(v) = eta {
        cfg.eta = StepSize::Fixed(v);
    }
    if let Some(r) = rank {
        cfg.rank_budget = RankBudget::Fixed(r);
    }
    let b = DVector::from_vec(b);
    match &map.inner {
        MapInner::Real(m) => {
            let truth = match truth.map(|t| &t.inner) {
                None => None,
                Some(TruthInner::Real(g)) => Some(g),
                Some(TruthInner::Complex(_)) => return Err(field_mismatch()),
            };
            let mut report = run_solver(m, &b, solver, &cfg)?;
            if let Some(g) = truth {
                report.eval_against(g).map_err(to_py)?;
            }
            Ok(make_py_report(report, PyHermitianMatrix::from_real))
        }
        MapInner::Complex(m) => {
            let truth = match truth.map(|t| &t.inner) {
                None => None,
                Some(TruthInner::Complex(g)) => Some(g),
                Some(TruthInner::Real(_)) => return Err(field_mismatch()),
            };
            let mut report = run_solver(m, &b, solver, &cfg)?;
            if let Some(g) = truth {
                report.eval_against(g).map_err(to_py)?;
            }
            Ok(make_py_report(report, PyHermitianMatrix::from_complex))
        }
    }
}

/// Weights `phi > 0` making `sum_i phi_i A_i` positive definite.
#[pyfunction]
fn find_phi(map: &PySensingMap) -> PyResult<Vec<f64>> {
    let phi = on_map!(map, m => transform::find_phi(m).map_err(to_py))?;
    Ok(phi.iter().copied().collect())
}

/// One trace-certificate check `tr(V^H X V) = c`.
#[pyclass(name = "TraceCheck", skip_from_py_object)]
#[derive(Clone)]
pub struct PyTraceCheck {
    #[pyo3(get)]
    trace_y: f64,
    #[pyo3(get)]
    c: f64,
    #[pyo3(get)]
    gap: f64,
    #[pyo3(get)]
    tol: f64,
    #[pyo3(get)]
    feasibility_residual: f64,
    /// `pass` is a Python keyword, so the flag is exposed as `passed`.
    #[pyo3(get)]
    passed: bool,
}

impl From<TraceCheck> for PyTraceCheck {
    fn from(t: TraceCheck) -> Self {
        Self {
            trace_y: t.trace_y,
            c: t.c,
            gap: t.gap,
            tol: t.tol,
            feasibility_residual: t.feasibility_residual,
            passed: t.pass,
        }
    }
}

#[pymethods]
impl PyTraceCheck {
    fn __repr__(&self) -> String {
        format!(
            "TraceCheck(trace_y={:.6e}, c={:.6e}, gap={:.3e}, passed={})",
            self.trace_y, self.c, self.gap, self.passed
        )
    }
}

#[derive(Clone)]
enum WhitenedInner {
    Real(WhitenedProblem<f64>),
    Complex(WhitenedProblem<Complex64>),
}

macro_rules! on_whitened {
    ($self:expr, $w:ident => $e:expr) => {
        match &$self.inner {
            WhitenedInner::Real($w) => $e,
            WhitenedInner::Complex($w) => $e,
        }
    };
}

/// Certificate bundle `(phi, B = V V^H, {M_i}, c)` produced by whitening a
/// sensing map against a measurement vector.
#[pyclass(name = "WhitenedProblem", skip_from_py_object)]
#[derive(Clone)]
pub struct PyWhitenedProblem {
    inner: WhitenedInner,
}

#[pymethods]
impl PyWhitenedProblem {
    /// Trace certificate: every PSD solution of the whitened system has
    /// `tr(Y) = c`.
    #[getter]
    fn c(&self) -> f64 {
        on_whitened!(self, w => w.trace_constant())
    }

    #[getter]
    fn phi(&self) -> Vec<f64> {
        on_whitened!(self, w => w.phi().iter().copied().collect())
    }

    #[getter]
    fn b(&self) -> Vec<f64> {
        on_whitened!(self, w => w.b().iter().copied().collect())
    }

    #[getter]
    fn field(&self) -> String {
        match &self.inner {
            WhitenedInner::Real(_) => "real".into(),
            WhitenedInner::Complex(_) => "complex".into(),
        }
    }

    /// `||sum_i phi_i M_i - I||_F` — how exactly the whitened dictionary
    /// resolves the identity.
    fn identity_residual(&self) -> f64 {
        on_whitened!(self, w => w.identity_residual())
    }

    /// The whitened sensing map `{M_i}`.
    fn whitened_map(&self) -> PySensingMap {
        PySensingMap {
            inner: match &self.inner {
                WhitenedInner::Real(w) => MapInner::Real(w.whitened_map().clone()),
                WhitenedInner::Complex(w) => MapInner::Complex(w.whitened_map().clone()),
            },
        }
    }

    /// The original sensing map `{A_i}`.
    fn source_map(&self) -> PySensingMap {
        PySensingMap {
            inner: match &self.inner {
                WhitenedInner::Real(w) => MapInner::Real(w.source().clone()),
                WhitenedInner::Complex(w) => MapInner::Complex(w.source().clone()),
            },
        }
    }

    /// Change of variables `Y = V^H X V`.
    fn to_y(&self, x: &PyHermitianMatrix) -> PyResult<PyHermitianMatrix> {
        match (&self.inner, &x.inner) {
            (WhitenedInner::Real(w), MatrixInner::Real(x)) => {
                Ok(PyHermitianMatrix::from_real(w.to_y(x).map_err(to_py)?))
            }
            (WhitenedInner::Complex(w), MatrixInner::Complex(x)) => {
                Ok(PyHermitianMatrix::from_complex(w.to_y(x).map_err(to_py)?))
            }
            _ => Err(field_mismatch()),
        }
    }

    /// Inverse change of variables `X = V^{-H} Y V^{-1}`.
    fn from_y(&self, y: &PyHermitianMatrix) -> PyResult<PyHermitianMatrix> {
        match (&self.inner, &y.inner) {
            (WhitenedInner::Real(w), MatrixInner::Real(y)) => {
                Ok(PyHermitianMatrix::from_real(w.from_y(y).map_err(to_py)?))
            }
            (WhitenedInner::Complex(w), MatrixInner::Complex(y)) => {
                Ok(PyHermitianMatrix::from_complex(w.from_y(y).map_err(to_py)?))
            }
            _ => Err(field_mismatch()),
        }
    }

    /// Check `tr(V^H X V) = c` for a feasible point `X` of the original
    /// system.
    fn verify_trace_invariance(&self, x: &PyHermitianMatrix) -> PyResult<PyTraceCheck> {
        let check = match (&self.inner, &x.inner) {
            (WhitenedInner::Real(w), MatrixInner::Real(x)) => {
                w.verify_trace_invariance(x).map_err(to_py)?
            }
            (WhitenedInner::Complex(w), MatrixInner::Complex(x)) => {
                w.verify_trace_invariance(x).map_err(to_py)?
            }
            _ => return Err(field_mismatch()),
        };
        Ok(check.into())
    }

    fn __repr__(&self) -> String {
        let map = self.whitened_map();
        format!(
            "WhitenedProblem(n={}, m={}, c={:.6e}, field={})",
            map.n(),
            map.m(),
            self.c(),
            self.field()
        )
    }
}

/// Whiten `(map, b)`: factor `B = sum_i phi_i A_i = V V^H`, transform the
/// dictionary to `M_i = V^{-1} A_i V^{-H}`, and carry the trace certificate
/// `c = sum_i phi_i b_i`. `phi` defaults to `find_phi(map)`.
#[pyfunction]
#[pyo3(signature = (map, b, phi=None))]
fn whiten(map: &PySensingMap, b: Vec<f64>, phi: Option<Vec<f64>>) -> PyResult<PyWhitenedProblem> {
    let b = DVector::from_vec(b);
    let inner = match &map.inner {
        MapInner::Real(m) => {
            let phi = match phi {
                Some(v) => DVector::from_vec(v),
                None => transform::find_phi(m).map_err(to_py)?,
            };
            WhitenedInner::Real(transform::whiten(m.clone(), b, phi).map_err(to_py)?)
        }
        MapInner::Complex(m) => {
            let phi = match phi {
                Some(v) => DVector::from_vec(v),
                None => transform::find_phi(m).map_err(to_py)?,
            };
            WhitenedInner::Complex(transform::whiten(m.clone(), b, phi).map_err(to_py)?)
        }
    };
    Ok(PyWhitenedProblem { inner })
}

/// Empirical restricted-isometry estimate at one rank.
#[pyclass(name = "RipEstimate", skip_from_py_object)]
#[derive(Clone)]
pub struct PyRipEstimate {
    #[pyo3(get)]
    r: usize,
    #[pyo3(get)]
    samples: usize,
    #[pyo3(get)]
    alpha: f64,
    #[pyo3(get)]
    delta_hat: f64,
    #[pyo3(get)]
    ratio_min: f64,
    #[pyo3(get)]
    ratio_median: f64,
    #[pyo3(get)]
    ratio_max: f64,
    #[pyo3(get)]
    note: String,
}

#[pymethods]
impl PyRipEstimate {
    fn __repr__(&self) -> String {
        format!(
            "RipEstimate(r={}, delta_hat={:.4}, alpha={:.4e}, samples={})",
            self.r, self.delta_hat, self.alpha, self.samples
        )
    }
}

/// Monte-Carlo lower bound on the rank-`r` restricted-isometry constant.
#[pyfunction]
#[pyo3(signature = (map, rank, samples=200, seed=0))]
fn estimate_rip(map: &PySensingMap, rank: usize, samples: usize, seed: u64) -> PyResult<PyRipEstimate> {
    let est = on_map!(map, m => rip::estimate_rip_l2l1(m, rank, samples, seed).map_err(to_py))?;
    Ok(PyRipEstimate {
        r: est.r,
        samples: est.samples,
        alpha: est.alpha,
        delta_hat: est.delta_hat,
        ratio_min: est.ratio_min,
        ratio_median: est.ratio_median,
        ratio_max: est.ratio_max,
        note: est.note.to_string(),
    })
}

/// Rank-scaling comparison `delta(gamma * r)` vs `delta(r)`.
#[pyclass(name = "ScalingCheck", skip_from_py_object)]
#[derive(Clone)]
pub struct PyScalingCheck {
    #[pyo3(get)]
    r: usize,
    #[pyo3(get)]
    gamma: usize,
    #[pyo3(get)]
    rank_lo: usize,
    #[pyo3(get)]
    rank_hi: usize,
    #[pyo3(get)]
    alpha: f64,
    #[pyo3(get)]
    delta_lo: f64,
    #[pyo3(get)]
    delta_hi: f64,
    #[pyo3(get)]
    slack: f64,
    #[pyo3(get)]
    holds: bool,
    #[pyo3(get)]
    sampling_artifact_warning: bool,
}

#[pymethods]
impl PyScalingCheck {
    fn __repr__(&self) -> String {
        format!(
            "ScalingCheck(r={}, gamma={}, delta_lo={:.4}, delta_hi={:.4}, holds={})",
            self.r, self.gamma, self.delta_lo, self.delta_hi, self.holds
        )
    }
}

/// Check the expected growth of the restricted-isometry estimate when the
/// probed rank is scaled by `gamma`.
#[pyfunction]
#[pyo3(signature = (map, rank, gamma=3, samples=200, seed=0))]
fn check_rip_scaling(
    map: &PySensingMap,
    rank: usize,
    gamma: usize,
    samples: usize,
    seed: u64,
) -> PyResult<PyScalingCheck> {
    let check =
        on_map!(map, m => rip::check_corollary_scaling(m, rank, gamma, samples, seed).map_err(to_py))?;
    Ok(PyScalingCheck {
        r: check.r,
        gamma: check.gamma,
        rank_lo: check.rank_lo,
        rank_hi: check.rank_hi,
        alpha: check.alpha,
        delta_lo: check.delta_lo,
        delta_hi: check.delta_hi,
        slack: check.slack,
        holds: check.holds,
        sampling_artifact_warning: check.sampling_artifact_warning,
    })
}

#[pymodule]
fn psdsense(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyHermitianMatrix>()?;
    m.add_class::<PySensingMap>()?;
    m.add_class::<PyGroundTruth>()?;
    m.add_class::<PySolverReport>()?;
    m.add_class::<PyWhitenedProblem>()?;
    m.add_class::<PyTraceCheck>()?;
    m.add_class::<PyRipEstimate>()?;
    m.add_class::<PyScalingCheck>()?;
    m.add_function(wrap_pyfunction!(ground_truth, m)?)?;
    m.add_function(wrap_pyfunction!(solve, m)?)?;
    m.add_function(wrap_pyfunction!(find_phi, m)?)?;
    m.add_function(wrap_pyfunction!(whiten, m)?)?;
    m.add_function(wrap_pyfunction!(estimate_rip, m)?)?;
    m.add_function(wrap_pyfunction!(check_rip_scaling, m)?)?;
    Ok(())
}
