//! Named experiments: recovery-vs-samples sweep, the two solver tables,
//! the trace-certificate study, and the RIP estimation study.
//!
//! Every experiment is described by an [`ExperimentSpec`] (JSON-friendly,
//! fully seeded) and produces:
//!
//! * a CSV of per-trial results with the fixed column schema
//!   `experiment,n2,m,solver,trial,dist_full,dist_rank1,iters,wall_ms`,
//! * an SVG plot where the experiment defines one,
//! * a JSON manifest echoing the full spec, per-row instance seeds, the
//!   lean (seed-only) containers from which every instance can be
//!   regenerated, SHA-256 hashes of the emitted artifacts, and an
//!   experiment-specific report section.
//!
//! Re-running an experiment with an identical spec produces byte-identical
//! CSV except for the `wall_ms` column. Work items are dispatched to a
//! worker pool and collected in `(grid index, trial index)` order, so the
//! output does not depend on scheduling.

use crate::field::{Field, ScalarField};
use crate::linalg::HermitianMatrix;
use crate::plot::{render_log_y, PlotSpec, Series};
use crate::report::{
    map_to_container, sha256_file, truth_to_container, JsonContainer, MapConfig,
};
use crate::rip::{check_corollary_scaling, estimate_rip_l2l1};
use crate::rng::mix_seed;
use crate::sensing::{
    gen_ground_truth, gen_pauli, gen_rank_one_gaussian, gen_wishart, GroundTruth, PauliParams,
    SensingFamily, SensingMap, WishartParams,
};
use crate::solvers::{
    fgd, min_fro_norm, nuclear_min, pgd_psd, unconstrained_ls, RankBudget, SolverConfig,
    SolverReport,
};
use crate::transform::{find_phi, whiten};
use crate::{Error, Result};
use nalgebra::DVector;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

/// The named experiments the harness knows how to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentName {
    Fig1,
    Table1,
    Table2,
    Certificate,
    RipStudy,
}

impl fmt::Display for ExperimentName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            ExperimentName::Fig1 => "fig1",
            ExperimentName::Table1 => "table1",
            ExperimentName::Table2 => "table2",
            ExperimentName::Certificate => "certificate",
            ExperimentName::RipStudy => "rip_study",
        };
        f.write_str(s)
    }
}

impl std::str::FromStr for ExperimentName {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fig1" => Ok(ExperimentName::Fig1),
            "table1" => Ok(ExperimentName::Table1),
            "table2" => Ok(ExperimentName::Table2),
            "certificate" => Ok(ExperimentName::Certificate),
            "rip_study" | "rip-study" => Ok(ExperimentName::RipStudy),
            other => Err(Error::InvalidConfig(format!(
                "unknown experiment '{other}' (expected fig1|table1|table2|certificate|rip_study)"
            ))),
        }
    }
}

/// One `(n^2, m)` grid row for the Pauli tables, keyed by qubit count
/// (`n = 2^qubits`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GridPoint {
    pub qubits: usize,
    pub m: usize,
}

impl GridPoint {
    pub fn n(&self) -> usize {
        1usize << self.qubits
    }
    pub fn n2(&self) -> usize {
        self.n() * self.n()
    }
}

/// Full, seeded description of an experiment run.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct ExperimentSpec {
    pub name: ExperimentName,
    pub family: SensingFamily,
    /// Matrix size for non-Pauli experiments.
    pub n: usize,
    /// Sample-count sweep (fig1) or per-instance sample count
    /// (certificate / rip_study, single entry).
    pub m_sweep: Vec<usize>,
    /// `(n^2, m)` rows for the tables.
    pub grid: Vec<GridPoint>,
    pub r: usize,
    pub trials: usize,
    pub seed: u64,
    /// Give the ground truth unit trace.
    pub normalize_truth: bool,
    /// Number of independent instances for the certificate study.
    pub instances: usize,
    /// Probe count for RIP estimation.
    pub rip_samples: usize,
    /// Rank-scaling factor for the corollary check.
    pub rip_gamma: usize,
    pub wishart: WishartParams,
    pub pauli: PauliParams,
    /// Per-solver configurations.
    pub pgd: SolverConfig,
    pub fgd: SolverConfig,
    pub nuclear: SolverConfig,
    pub min_fro: SolverConfig,
}

impl Default for ExperimentSpec {
    fn default() -> Self {
        ExperimentSpec::fig1(0)
    }
}

impl ExperimentSpec {
    /// Recovery error vs sample count, n = 15, rank 1, three solvers.
    /// The default family is the scaled rank-one Gaussian construction;
    /// set `family = wishart` for the true-Wishart variant.
    pub fn fig1(seed: u64) -> Self {
        ExperimentSpec {
            name: ExperimentName::Fig1,
            family: SensingFamily::RankOneGaussian,
            n: 15,
            m_sweep: (10..130).step_by(10).collect(),
            grid: Vec::new(),
            r: 1,
            trials: 5,
            seed,
            normalize_truth: false,
            instances: 0,
            rip_samples: 0,
            rip_gamma: 0,
            wishart: WishartParams::default(),
            pauli: PauliParams::default(),
            pgd: SolverConfig {
                max_iters: 30_000,
                ..SolverConfig::default()
            },
            fgd: SolverConfig::default(),
            nuclear: SolverConfig::default(),
            min_fro: SolverConfig::default(),
        }
    }

    fn table_grid(large: bool) -> Vec<GridPoint> {
        let mut grid = vec![
            GridPoint { qubits: 4, m: 128 },
            GridPoint { qubits: 5, m: 288 },
        ];
        if large {
            grid.push(GridPoint { qubits: 6, m: 640 });
            grid.push(GridPoint { qubits: 7, m: 1536 });
        }
        grid
    }

    /// Pauli-ensemble comparison of nuclear_min / min_fro_norm / pgd_psd.
    /// `large` appends the (4096, 640) and (16384, 1536) rows, which take
    /// several minutes each.
    pub fn table1(seed: u64, large: bool) -> Self {
        ExperimentSpec {
            name: ExperimentName::Table1,
            family: SensingFamily::Pauli,
            n: 0,
            m_sweep: Vec::new(),
            grid: Self::table_grid(large),
            r: 1,
            trials: 5,
            seed,
            normalize_truth: true,
            instances: 0,
            rip_samples: 0,
            rip_gamma: 0,
            wishart: WishartParams::default(),
            pauli: PauliParams::default(),
            pgd: SolverConfig {
                max_iters: 30_000,
                ..SolverConfig::default()
            },
            fgd: SolverConfig::default(),
            nuclear: SolverConfig::default(),
            min_fro: SolverConfig::default(),
        }
    }

    /// Pauli-ensemble comparison of pgd_psd / fgd(r) / fgd(full).
    pub fn table2(seed: u64, large: bool) -> Self {
        ExperimentSpec {
            name: ExperimentName::Table2,
            family: SensingFamily::Pauli,
            n: 0,
            m_sweep: Vec::new(),
            grid: Self::table_grid(large),
            r: 1,
            trials: 5,
            seed,
            normalize_truth: true,
            instances: 0,
            rip_samples: 0,
            rip_gamma: 0,
            wishart: WishartParams::default(),
            pauli: PauliParams::default(),
            pgd: SolverConfig {
                max_iters: 30_000,
                ..SolverConfig::default()
            },
            fgd: SolverConfig {
                max_iters: 200_000,
                ..SolverConfig::default()
            },
            nuclear: SolverConfig::default(),
            min_fro: SolverConfig::default(),
        }
    }

    /// Whitening / trace-certificate study on seeded Wishart instances.
    pub fn certificate(seed: u64) -> Self {
        ExperimentSpec {
            name: ExperimentName::Certificate,
            family: SensingFamily::Wishart,
            n: 10,
            m_sweep: vec![150],
            grid: Vec::new(),
            r: 1,
            trials: 1,
            seed,
            normalize_truth: false,
            instances: 20,
            rip_samples: 200,
            rip_gamma: 0,
            wishart: WishartParams::default(),
            pauli: PauliParams::default(),
            pgd: SolverConfig {
                max_iters: 20_000,
                ..SolverConfig::default()
            },
            fgd: SolverConfig::default(),
            nuclear: SolverConfig::default(),
            min_fro: SolverConfig::default(),
        }
    }

    /// RIP-l2/l1 estimation on a whitened Wishart ensemble.
    pub fn rip_study(seed: u64) -> Self {
        ExperimentSpec {
            name: ExperimentName::RipStudy,
            family: SensingFamily::Wishart,
            n: 8,
            m_sweep: vec![200],
            grid: Vec::new(),
            r: 1,
            trials: 1,
            seed,
            normalize_truth: false,
            instances: 1,
            rip_samples: 500,
            rip_gamma: 3,
            wishart: WishartParams::default(),
            pauli: PauliParams::default(),
            pgd: SolverConfig::default(),
            fgd: SolverConfig::default(),
            nuclear: SolverConfig::default(),
            min_fro: SolverConfig::default(),
        }
    }

    /// Builds the default spec for a named experiment.
    pub fn named(name: ExperimentName, seed: u64, large: bool) -> Self {
        match name {
            ExperimentName::Fig1 => Self::fig1(seed),
            ExperimentName::Table1 => Self::table1(seed, large),
            ExperimentName::Table2 => Self::table2(seed, large),
            ExperimentName::Certificate => Self::certificate(seed),
            ExperimentName::RipStudy => Self::rip_study(seed),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::InvalidConfig("trials must be >= 1".into()));
        }
        match self.name {
            ExperimentName::Fig1 => {
                if self.m_sweep.is_empty() {
                    return Err(Error::InvalidConfig("fig1 needs a nonempty m sweep".into()));
                }
                if self.n == 0 || self.r == 0 || self.r > self.n {
                    return Err(Error::InvalidConfig(format!(
                        "fig1 needs 0 < r <= n, got n={} r={}",
                        self.n, self.r
                    )));
                }
                if !matches!(
                    self.family,
                    SensingFamily::RankOneGaussian | SensingFamily::Wishart
                ) {
                    return Err(Error::InvalidConfig(format!(
                        "fig1 supports rank_one_gaussian or wishart, got {}",
                        self.family
                    )));
                }
            }
            ExperimentName::Table1 | ExperimentName::Table2 => {
                if self.grid.is_empty() {
                    return Err(Error::InvalidConfig("table needs a nonempty grid".into()));
                }
                if self.family != SensingFamily::Pauli {
                    return Err(Error::InvalidConfig(format!(
                        "tables use the pauli family, got {}",
                        self.family
                    )));
                }
                for g in &self.grid {
                    if self.r == 0 || self.r > g.n() {
                        return Err(Error::InvalidConfig(format!(
                            "grid row q={} needs 0 < r <= {}, got r={}",
                            g.qubits,
                            g.n(),
                            self.r
                        )));
                    }
                }
            }
            ExperimentName::Certificate => {
                if self.instances == 0 {
                    return Err(Error::InvalidConfig(
                        "certificate needs instances >= 1".into(),
                    ));
                }
                if self.m_sweep.len() != 1 {
                    return Err(Error::InvalidConfig(
                        "certificate takes exactly one m value".into(),
                    ));
                }
            }
            ExperimentName::RipStudy => {
                if self.m_sweep.len() != 1 {
                    return Err(Error::InvalidConfig(
                        "rip_study takes exactly one m value".into(),
                    ));
                }
                if self.rip_samples == 0 {
                    return Err(Error::InvalidConfig("rip_samples must be >= 1".into()));
                }
            }
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let spec: ExperimentSpec = serde_json::from_str(text)?;
        spec.validate()?;
        Ok(spec)
    }
}

/// One solver run on one instance. The first nine fields are the CSV
/// schema; the rest travel in the manifest only.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ResultRow {
    pub experiment: String,
    pub n2: usize,
    pub m: usize,
    pub solver: String,
    pub trial: usize,
    pub dist_full: f64,
    pub dist_rank1: f64,
    pub iters: usize,
    pub wall_ms: f64,
    /// Seed of the sensing-map draw for this instance.
    pub map_seed: u64,
    /// Seed of the ground-truth draw for this instance.
    pub truth_seed: u64,
    pub converged: bool,
    pub resid: f64,
    /// Top eigenvalue as a fraction of the trace (full-rank factored runs).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub energy_fraction: Option<f64>,
}

impl ResultRow {
    fn from_report<T: Field>(
        experiment: ExperimentName,
        n2: usize,
        m: usize,
        solver: &str,
        trial: usize,
        map_seed: u64,
        truth_seed: u64,
        report: &SolverReport<T>,
    ) -> Result<Self> {
        let dist_full = report.dist_full.ok_or_else(|| {
            Error::InvalidConfig("result row requires an evaluated report".into())
        })?;
        let dist_rank1 = report.dist_rank.unwrap_or(dist_full);
        if !(dist_full >= 0.0) || !(dist_rank1 >= 0.0) {
            return Err(Error::InvalidConfig(format!(
                "negative or NaN distance in {solver} row: {dist_full} / {dist_rank1}"
            )));
        }
        Ok(ResultRow {
            experiment: experiment.to_string(),
            n2,
            m,
            solver: solver.to_string(),
            trial,
            dist_full,
            dist_rank1,
            iters: report.iters,
            wall_ms: report.wall_time.as_secs_f64() * 1e3,
            map_seed,
            truth_seed,
            converged: report.converged,
            resid: report.final_resid(),
            energy_fraction: None,
        })
    }
}

/// The fixed CSV column header.
pub const CSV_HEADER: &str = "experiment,n2,m,solver,trial,dist_full,dist_rank1,iters,wall_ms";

/// Writes rows in the fixed schema. Formatting is deterministic, so two
/// runs with the same spec differ only in `wall_ms`.
pub fn write_csv(path: &Path, rows: &[ResultRow]) -> Result<()> {
    let mut out = String::new();
    out.push_str(CSV_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{:.9e},{:.9e},{},{:.3}\n",
            r.experiment, r.n2, r.m, r.solver, r.trial, r.dist_full, r.dist_rank1, r.iters,
            r.wall_ms
        ));
    }
    std::fs::write(path, out)?;
    Ok(())
}

/// Lean (seed-only) containers for one instance, enough to regenerate it.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InstanceRecord {
    pub grid_index: usize,
    pub trial: usize,
    pub map: JsonContainer,
    pub truth: JsonContainer,
}

/// Everything a run wrote to disk, plus the in-memory rows.
#[derive(Debug, Clone)]
pub struct RunArtifacts {
    pub out_dir: PathBuf,
    pub csv: Option<PathBuf>,
    pub svg: Option<PathBuf>,
    pub manifest: PathBuf,
    pub rows: Vec<ResultRow>,
    /// Experiment-specific report section (also embedded in the manifest).
    pub report: serde_json::Value,
}

#[derive(Serialize)]
struct Manifest<'a> {
    spec: &'a ExperimentSpec,
    rows: &'a [ResultRow],
    instances: &'a [InstanceRecord],
    artifacts: BTreeMap<String, String>,
    report: &'a serde_json::Value,
}

/// Runs a named experiment, writing artifacts under `out_dir`.
pub fn run(spec: &ExperimentSpec, out_dir: &Path) -> Result<RunArtifacts> {
    spec.validate()?;
    std::fs::create_dir_all(out_dir)?;
    match spec.name {
        ExperimentName::Fig1 => run_fig1(spec, out_dir),
        ExperimentName::Table1 => run_table1(spec, out_dir),
        ExperimentName::Table2 => run_table2(spec, out_dir),
        ExperimentName::Certificate => run_certificate(spec, out_dir),
        ExperimentName::RipStudy => run_rip_study(spec, out_dir),
    }
}

/// Instance seeds: one independent pair per (grid index, trial).
fn instance_seeds(spec_seed: u64, grid_index: usize, trial: usize) -> (u64, u64) {
    let map_seed = mix_seed(spec_seed, grid_index as u64, 2 * trial as u64);
    let truth_seed = mix_seed(spec_seed, grid_index as u64, 2 * trial as u64 + 1);
    (map_seed, truth_seed)
}

fn finalize(
    spec: &ExperimentSpec,
    out_dir: &Path,
    rows: Vec<ResultRow>,
    instances: Vec<InstanceRecord>,
    svg: Option<PathBuf>,
    report: serde_json::Value,
) -> Result<RunArtifacts> {
    let stem = spec.name.to_string();
    let csv = if rows.is_empty() {
        None
    } else {
        let p = out_dir.join(format!("{stem}.csv"));
        write_csv(&p, &rows)?;
        Some(p)
    };
    let mut artifacts = BTreeMap::new();
    if let Some(p) = &csv {
        artifacts.insert(file_name(p), sha256_file(p)?);
    }
    if let Some(p) = &svg {
        artifacts.insert(file_name(p), sha256_file(p)?);
    }
    let manifest_path = out_dir.join(format!("{stem}_manifest.json"));
    let manifest = Manifest {
        spec,
        rows: &rows,
        instances: &instances,
        artifacts,
        report: &report,
    };
    std::fs::write(&manifest_path, serde_json::to_string_pretty(&manifest)?)?;
    Ok(RunArtifacts {
        out_dir: out_dir.to_path_buf(),
        csv,
        svg,
        manifest: manifest_path,
        rows,
        report,
    })
}

fn file_name(p: &Path) -> String {
    p.file_name()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| p.display().to_string())
}

/// Generates the real-field map for fig1/certificate instances.
fn gen_real_map(spec: &ExperimentSpec, n: usize, m: usize, seed: u64) -> Result<SensingMap<f64>> {
    match spec.family {
        SensingFamily::RankOneGaussian => gen_rank_one_gaussian(n, m, seed),
        SensingFamily::Wishart => gen_wishart(n, m, seed, &spec.wishart),
        other => Err(Error::InvalidConfig(format!(
            "unsupported real sensing family {other}"
        ))),
    }
}

fn real_map_config(spec: &ExperimentSpec) -> MapConfig {
    MapConfig {
        wishart: (spec.family == SensingFamily::Wishart).then(|| spec.wishart.clone()),
        ..MapConfig::default()
    }
}

// ---------------------------------------------------------------------------
// fig1: recovery error vs sample count
// ---------------------------------------------------------------------------

fn run_fig1(spec: &ExperimentSpec, out_dir: &Path) -> Result<RunArtifacts> {
    struct Job {
        gi: usize,
        m: usize,
        trial: usize,
    }
    let jobs: Vec<Job> = spec
        .m_sweep
        .iter()
        .enumerate()
        .flat_map(|(gi, &m)| (0..spec.trials).map(move |trial| Job { gi, m, trial }))
        .collect();

    let outcomes: Vec<(usize, usize, Vec<ResultRow>, InstanceRecord)> = jobs
        .into_par_iter()
        .map(|job| -> Result<_> {
            let (map_seed, truth_seed) = instance_seeds(spec.seed, job.gi, job.trial);
            let map = gen_real_map(spec, spec.n, job.m, map_seed)?;
            let truth =
                gen_ground_truth::<f64>(spec.n, spec.r, spec.normalize_truth, truth_seed)?;
            let b = map.apply(&truth.matrix)?;

            let mut rows = Vec::with_capacity(3);
            let mut push = |rep: &mut SolverReport<f64>, name: &str| -> Result<()> {
                rep.eval_against(&truth)?;
                rows.push(ResultRow::from_report(
                    spec.name,
                    spec.n * spec.n,
                    job.m,
                    name,
                    job.trial,
                    map_seed,
                    truth_seed,
                    rep,
                )?);
                Ok(())
            };
            let mut ls = unconstrained_ls(&map, &b)?;
            push(&mut ls, "unconstrained_ls")?;
            let mut pgd = pgd_psd(&map, &b, &spec.pgd)?;
            push(&mut pgd, "pgd_psd")?;
            let mut mf = min_fro_norm(&map, &b, &spec.min_fro)?;
            push(&mut mf, "min_fro")?;

            let record = InstanceRecord {
                grid_index: job.gi,
                trial: job.trial,
                map: map_to_container(&map, map_seed, &real_map_config(spec), false)?,
                truth: truth_to_container(&truth, truth_seed, false)?,
            };
            Ok((job.gi, job.trial, rows, record))
        })
        .collect::<Result<Vec<_>>>()?;

    let (rows, instances) = order_outcomes(outcomes);

    // per-m medians per solver drive the plot and the report section
    let solvers = ["unconstrained_ls", "pgd_psd", "min_fro"];
    let mut medians: BTreeMap<String, Vec<(f64, f64)>> = BTreeMap::new();
    for name in solvers {
        let mut pts = Vec::with_capacity(spec.m_sweep.len());
        for &m in &spec.m_sweep {
            let vals: Vec<f64> = rows
                .iter()
                .filter(|r| r.m == m && r.solver == name)
                .map(|r| r.dist_full)
                .collect();
            pts.push((m as f64, crate::rip::median(&vals)));
        }
        medians.insert(name.to_string(), pts);
    }

    let series: Vec<Series> = solvers
        .iter()
        .map(|name| Series {
            label: name.to_string(),
            points: medians[*name].clone(),
        })
        .collect();
    let plot = PlotSpec {
        title: format!(
            "recovery error vs samples (n={}, rank {}, {} trials, {} family)",
            spec.n, spec.r, spec.trials, spec.family
        ),
        x_label: "samples m".into(),
        y_label: "median recovery error (Frobenius)".into(),
        x_guides: vec![(spec.n * (spec.n + 1) / 2) as f64],
        ..PlotSpec::default()
    };
    let svg_path = out_dir.join("fig1.svg");
    std::fs::write(&svg_path, render_log_y(&plot, &series)?)?;

    let report = serde_json::json!({ "median_dist_full": medians });
    finalize(spec, out_dir, rows, instances, Some(svg_path), report)
}

fn order_outcomes(
    mut outcomes: Vec<(usize, usize, Vec<ResultRow>, InstanceRecord)>,
) -> (Vec<ResultRow>, Vec<InstanceRecord>) {
    outcomes.sort_by_key(|(gi, trial, _, _)| (*gi, *trial));
    let mut rows = Vec::new();
    let mut instances = Vec::new();
    for (_, _, mut r, inst) in outcomes {
        rows.append(&mut r);
        instances.push(inst);
    }
    (rows, instances)
}

// ---------------------------------------------------------------------------
// tables: Pauli ensembles, complex field
// ---------------------------------------------------------------------------

/// Shared instance generation for the two tables.
fn pauli_instance(
    spec: &ExperimentSpec,
    g: GridPoint,
    map_seed: u64,
    truth_seed: u64,
) -> Result<(
    SensingMap<num_complex::Complex64>,
    GroundTruth<num_complex::Complex64>,
    DVector<f64>,
)> {
    let map = gen_pauli(g.qubits, g.m, map_seed, &spec.pauli)?;
    let truth = gen_ground_truth::<num_complex::Complex64>(
        g.n(),
        spec.r,
        spec.normalize_truth,
        truth_seed,
    )?;
    let b = map.apply(&truth.matrix)?;
    Ok((map, truth, b))
}

fn pauli_record(
    spec: &ExperimentSpec,
    g: GridPoint,
    gi: usize,
    trial: usize,
    map: &SensingMap<num_complex::Complex64>,
    truth: &GroundTruth<num_complex::Complex64>,
    map_seed: u64,
    truth_seed: u64,
) -> Result<InstanceRecord> {
    let cfg = MapConfig {
        pauli: Some(spec.pauli.clone()),
        qubits: Some(g.qubits),
        ..MapConfig::default()
    };
    Ok(InstanceRecord {
        grid_index: gi,
        trial,
        map: map_to_container(map, map_seed, &cfg, false)?,
        truth: truth_to_container(truth, truth_seed, false)?,
    })
}

fn run_table1(spec: &ExperimentSpec, out_dir: &Path) -> Result<RunArtifacts> {
    let jobs: Vec<(usize, GridPoint, usize)> = spec
        .grid
        .iter()
        .enumerate()
        .flat_map(|(gi, &g)| (0..spec.trials).map(move |t| (gi, g, t)))
        .collect();

    let outcomes = jobs
        .into_par_iter()
        .map(|(gi, g, trial)| -> Result<_> {
            let (map_seed, truth_seed) = instance_seeds(spec.seed, gi, trial);
            let (map, truth, b) = pauli_instance(spec, g, map_seed, truth_seed)?;

            let mut rows = Vec::with_capacity(3);
            let mut push = |rep: &mut SolverReport<num_complex::Complex64>,
                            name: &str|
             -> Result<()> {
                rep.eval_against(&truth)?;
                rows.push(ResultRow::from_report(
                    spec.name, g.n2(), g.m, name, trial, map_seed, truth_seed, rep,
                )?);
                Ok(())
            };
            let mut nuc = nuclear_min(&map, &b, &spec.nuclear, true)?;
            push(&mut nuc, "nuclear_psd")?;
            let mut mf = min_fro_norm(&map, &b, &spec.min_fro)?;
            push(&mut mf, "min_fro")?;
            let mut pgd = pgd_psd(&map, &b, &spec.pgd)?;
            push(&mut pgd, "pgd_psd")?;

            let record = pauli_record(spec, g, gi, trial, &map, &truth, map_seed, truth_seed)?;
            Ok((gi, trial, rows, record))
        })
        .collect::<Result<Vec<_>>>()?;

    let (rows, instances) = order_outcomes(outcomes);
    let report = table_medians(&rows);
    finalize(spec, out_dir, rows, instances, None, report)
}

fn run_table2(spec: &ExperimentSpec, out_dir: &Path) -> Result<RunArtifacts> {
    let jobs: Vec<(usize, GridPoint, usize)> = spec
        .grid
        .iter()
        .enumerate()
        .flat_map(|(gi, &g)| (0..spec.trials).map(move |t| (gi, g, t)))
        .collect();

    let outcomes = jobs
        .into_par_iter()
        .map(|(gi, g, trial)| -> Result<_> {
            let (map_seed, truth_seed) = instance_seeds(spec.seed, gi, trial);
            let (map, truth, b) = pauli_instance(spec, g, map_seed, truth_seed)?;

            let mut rows = Vec::with_capacity(3);

            let mut pgd = pgd_psd(&map, &b, &spec.pgd)?;
            pgd.eval_against(&truth)?;
            rows.push(ResultRow::from_report(
                spec.name, g.n2(), g.m, "pgd_psd", trial, map_seed, truth_seed, &pgd,
            )?);

            let fgd_r_cfg = SolverConfig {
                rank_budget: RankBudget::Fixed(spec.r),
                ..spec.fgd.clone()
            };
            let mut fr = fgd(&map, &b, &fgd_r_cfg)?;
            fr.eval_against(&truth)?;
            rows.push(ResultRow::from_report(
                spec.name, g.n2(), g.m, "fgd_r", trial, map_seed, truth_seed, &fr,
            )?);

            let fgd_full_cfg = SolverConfig {
                rank_budget: RankBudget::Full,
                ..spec.fgd.clone()
            };
            let mut ff = fgd(&map, &b, &fgd_full_cfg)?;
            ff.eval_against(&truth)?;
            let mut full_row = ResultRow::from_report(
                spec.name, g.n2(), g.m, "fgd_full", trial, map_seed, truth_seed, &ff,
            )?;
            full_row.energy_fraction = Some(top_eigenvalue_fraction(&ff.x_hat)?);
            rows.push(full_row);

            let record = pauli_record(spec, g, gi, trial, &map, &truth, map_seed, truth_seed)?;
            Ok((gi, trial, rows, record))
        })
        .collect::<Result<Vec<_>>>()?;

    let (rows, instances) = order_outcomes(outcomes);
    let report = table_medians(&rows);
    finalize(spec, out_dir, rows, instances, None, report)
}

/// Top eigenvalue as a fraction of the trace of a PSD iterate.
fn top_eigenvalue_fraction<T: Field>(x: &HermitianMatrix<T>) -> Result<f64> {
    let top = x.spectral_norm()?;
    let tr = x.trace();
    if tr <= 0.0 {
        return Ok(0.0);
    }
    Ok(top / tr)
}

/// Median dist_full / dist_rank1 per (n2, m, solver), echoed in manifests.
fn table_medians(rows: &[ResultRow]) -> serde_json::Value {
    let mut groups: BTreeMap<(usize, usize, String), (Vec<f64>, Vec<f64>)> = BTreeMap::new();
    for r in rows {
        let e = groups
            .entry((r.n2, r.m, r.solver.clone()))
            .or_default();
        e.0.push(r.dist_full);
        e.1.push(r.dist_rank1);
    }
    let summary: Vec<serde_json::Value> = groups
        .into_iter()
        .map(|((n2, m, solver), (df, dr))| {
            serde_json::json!({
                "n2": n2,
                "m": m,
                "solver": solver,
                "median_dist_full": crate::rip::median(&df),
                "median_dist_rank1": crate::rip::median(&dr),
            })
        })
        .collect();
    serde_json::json!({ "medians": summary })
}

// ---------------------------------------------------------------------------
// certificate: whitening, trace checks, solver agreement
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SolverCheck {
    pub solver: String,
    pub resid: f64,
    pub feasible: bool,
    pub psd: bool,
    /// |Tr(V^H X V) - c|, present when the output was feasible.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trace_gap: Option<f64>,
    pub trace_pass: Option<bool>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PairDistance {
    pub a: String,
    pub b: String,
    pub dist: f64,
    pub threshold: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CertificateInstance {
    pub index: usize,
    pub map_seed: u64,
    pub truth_seed: u64,
    /// Skip reason when no strictly positive certificate was found.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub skipped: Option<String>,
    pub c_from_phi: Option<f64>,
    pub c_from_truth: Option<f64>,
    pub c_gap: Option<f64>,
    #[serde(default)]
    pub solver_checks: Vec<SolverCheck>,
    #[serde(default)]
    pub pairwise: Vec<PairDistance>,
    /// Empirical RIP constant of the whitened map at rank min(4r, n).
    pub rip_delta_hat: Option<f64>,
}

fn run_certificate(spec: &ExperimentSpec, out_dir: &Path) -> Result<RunArtifacts> {
    let m = spec.m_sweep[0];
    let feas_tol = 1e-6;

    let outcomes: Vec<(usize, usize, Vec<ResultRow>, InstanceRecord, CertificateInstance)> =
        (0..spec.instances)
            .into_par_iter()
            .map(|idx| -> Result<_> {
                let (map_seed, truth_seed) = instance_seeds(spec.seed, 0, idx);
                let map = gen_real_map(spec, spec.n, m, map_seed)?;
                let truth =
                    gen_ground_truth::<f64>(spec.n, spec.r, spec.normalize_truth, truth_seed)?;
                let b = map.apply(&truth.matrix)?;
                let record = InstanceRecord {
                    grid_index: 0,
                    trial: idx,
                    map: map_to_container(&map, map_seed, &real_map_config(spec), false)?,
                    truth: truth_to_container(&truth, truth_seed, false)?,
                };

                let phi = match find_phi(&map) {
                    Ok(phi) => phi,
                    Err(e) => {
                        let inst = CertificateInstance {
                            index: idx,
                            map_seed,
                            truth_seed,
                            skipped: Some(format!("no positive certificate: {e}")),
                            c_from_phi: None,
                            c_from_truth: None,
                            c_gap: None,
                            solver_checks: Vec::new(),
                            pairwise: Vec::new(),
                            rip_delta_hat: None,
                        };
                        return Ok((0, idx, Vec::new(), record, inst));
                    }
                };
                let problem = whiten(map.clone(), b.clone(), phi)?;

                // the trace constant two ways: sum phi_i b_i vs Tr(V^H X* V)
                let c_from_phi = problem.trace_constant();
                let c_from_truth = problem.to_y(&truth.matrix)?.trace();
                let c_gap = (c_from_phi - c_from_truth).abs();

                // solver runs on the raw (unwhitened) instance
                let mut rows = Vec::new();
                let mut checks = Vec::new();
                let mut outputs: Vec<(String, HermitianMatrix<f64>)> = Vec::new();

                let handle = |name: &str,
                                  rep: &mut SolverReport<f64>,
                                  rows: &mut Vec<ResultRow>,
                                  checks: &mut Vec<SolverCheck>,
                                  outputs: &mut Vec<(String, HermitianMatrix<f64>)>|
                 -> Result<()> {
                    rep.eval_against(&truth)?;
                    rows.push(ResultRow::from_report(
                        spec.name,
                        spec.n * spec.n,
                        m,
                        name,
                        idx,
                        map_seed,
                        truth_seed,
                        rep,
                    )?);
                    let resid = rep.final_resid();
                    let lam_min = rep.x_hat.min_eigenvalue()?;
                    let lam_max = rep.x_hat.spectral_norm()?.max(1e-300);
                    let psd = lam_min >= -1e-8 * lam_max;
                    let feasible = resid <= feas_tol;
                    let (trace_gap, trace_pass) = if feasible {
                        match problem.verify_trace_invariance(&rep.x_hat) {
                            Ok(check) => (Some(check.gap), Some(check.pass)),
                            Err(_) => (None, Some(false)),
                        }
                    } else {
                        (None, None)
                    };
                    checks.push(SolverCheck {
                        solver: name.to_string(),
                        resid,
                        feasible,
                        psd,
                        trace_gap,
                        trace_pass,
                    });
                    outputs.push((name.to_string(), rep.x_hat.clone()));
                    Ok(())
                };

                let mut nuc = nuclear_min(&map, &b, &spec.nuclear, true)?;
                handle("nuclear_psd", &mut nuc, &mut rows, &mut checks, &mut outputs)?;
                let mut mf = min_fro_norm(&map, &b, &spec.min_fro)?;
                handle("min_fro", &mut mf, &mut rows, &mut checks, &mut outputs)?;
                let mut pgd = pgd_psd(&map, &b, &spec.pgd)?;
                handle("pgd_psd", &mut pgd, &mut rows, &mut checks, &mut outputs)?;
                let mut ls = unconstrained_ls(&map, &b)?;
                handle("unconstrained_ls", &mut ls, &mut rows, &mut checks, &mut outputs)?;

                // pairwise agreement among the PSD-constrained solvers
                let threshold = 1e-2 * (1.0 + truth.matrix.fro_norm());
                let psd_solvers = ["nuclear_psd", "min_fro", "pgd_psd"];
                let mut pairwise = Vec::new();
                for i in 0..psd_solvers.len() {
                    for j in (i + 1)..psd_solvers.len() {
                        let xa = &outputs.iter().find(|(n, _)| n == psd_solvers[i]).unwrap().1;
                        let xb = &outputs.iter().find(|(n, _)| n == psd_solvers[j]).unwrap().1;
                        let dist = xa.fro_dist(xb)?;
                        pairwise.push(PairDistance {
                            a: psd_solvers[i].to_string(),
                            b: psd_solvers[j].to_string(),
                            dist,
                            threshold,
                            pass: dist <= threshold,
                        });
                    }
                }

                let rip_rank = (4 * spec.r).min(spec.n);
                let rip = estimate_rip_l2l1(
                    problem.whitened_map(),
                    rip_rank,
                    spec.rip_samples,
                    mix_seed(spec.seed, 1, idx as u64),
                )?;

                let inst = CertificateInstance {
                    index: idx,
                    map_seed,
                    truth_seed,
                    skipped: None,
                    c_from_phi: Some(c_from_phi),
                    c_from_truth: Some(c_from_truth),
                    c_gap: Some(c_gap),
                    solver_checks: checks,
                    pairwise,
                    rip_delta_hat: Some(rip.delta_hat),
                };
                Ok((0, idx, rows, record, inst))
            })
            .collect::<Result<Vec<_>>>()?;

    let mut outcomes = outcomes;
    outcomes.sort_by_key(|(gi, t, _, _, _)| (*gi, *t));
    let mut rows = Vec::new();
    let mut instances = Vec::new();
    let mut cert_instances = Vec::new();
    for (_, _, mut r, rec, inst) in outcomes {
        rows.append(&mut r);
        instances.push(rec);
        cert_instances.push(inst);
    }

    let run_count = cert_instances.iter().filter(|i| i.skipped.is_none()).count();
    let all_trace_pass = cert_instances.iter().all(|i| {
        i.solver_checks
            .iter()
            .all(|c| c.trace_pass.unwrap_or(true))
    });
    let all_pairwise_pass = cert_instances
        .iter()
        .all(|i| i.pairwise.iter().all(|p| p.pass));
    let max_c_gap = cert_instances
        .iter()
        .filter_map(|i| i.c_gap)
        .fold(0.0f64, f64::max);

    let report = serde_json::json!({
        "instances": cert_instances,
        "summary": {
            "requested": spec.instances,
            "ran": run_count,
            "skipped": spec.instances - run_count,
            "all_trace_pass": all_trace_pass,
            "all_pairwise_pass": all_pairwise_pass,
            "max_c_gap": max_c_gap,
        },
    });
    let report_path = out_dir.join("certificate.json");
    std::fs::write(&report_path, serde_json::to_string_pretty(&report)?)?;

    finalize(spec, out_dir, rows, instances, None, report)
}

// ---------------------------------------------------------------------------
// rip_study: empirical RIP constants on a whitened ensemble
// ---------------------------------------------------------------------------

fn run_rip_study(spec: &ExperimentSpec, out_dir: &Path) -> Result<RunArtifacts> {
    let m = spec.m_sweep[0];
    let map_seed = mix_seed(spec.seed, 0, 0);
    let map = gen_real_map(spec, spec.n, m, map_seed)?;
    let phi = find_phi(&map)?;
    let b = DVector::zeros(m); // the RIP study is a property of the map alone
    let problem = whiten(map.clone(), b, phi)?;
    let wmap = problem.whitened_map();

    // delta-hat across ranks 1..=min(4r, n)
    let max_rank = (4 * spec.r).min(spec.n);
    let mut estimates = Vec::new();
    for rank in 1..=max_rank {
        let est = estimate_rip_l2l1(
            wmap,
            rank,
            spec.rip_samples,
            mix_seed(spec.seed, 2, rank as u64),
        )?;
        estimates.push(est);
    }
    let raw = estimate_rip_l2l1(&map, spec.r, spec.rip_samples, mix_seed(spec.seed, 3, 0))?;

    // rip_gamma = 0 skips the scaling comparison; gamma = 1 is the
    // degenerate monotonicity check.
    let scaling = if spec.rip_gamma >= 1 {
        Some(check_corollary_scaling(
            wmap,
            spec.r,
            spec.rip_gamma,
            spec.rip_samples,
            mix_seed(spec.seed, 4, 0),
        )?)
    } else {
        None
    };

    let instances = vec![InstanceRecord {
        grid_index: 0,
        trial: 0,
        map: map_to_container(&map, map_seed, &real_map_config(spec), false)?,
        truth: JsonContainer {
            family: "none".into(),
            n: spec.n,
            m: 0,
            field: ScalarField::Real,
            seed: 0,
            config: serde_json::Value::Null,
            matrices: None,
        },
    }];

    let report = serde_json::json!({
        "identity_residual": problem.identity_residual(),
        "whitened_estimates": estimates,
        "raw_map_estimate": raw,
        "scaling": scaling,
    });
    let report_path = out_dir.join("rip_study.json");
    std::fs::write(&report_path, serde_json::to_string_pretty(&report)?)?;

    finalize(spec, out_dir, Vec::new(), instances, None, report)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tmp_dir(tag: &str) -> PathBuf {
        let dir = std::env::temp_dir().join(format!(
            "psdsense-exp-{tag}-{}",
            std::process::id()
        ));
        let _ = std::fs::remove_dir_all(&dir);
        std::fs::create_dir_all(&dir).unwrap();
        dir
    }

    #[test]
    fn spec_validation_rejects_bad_inputs() {
        let mut s = ExperimentSpec::fig1(1);
        s.trials = 0;
        assert!(s.validate().is_err());
        let mut s = ExperimentSpec::fig1(1);
        s.m_sweep.clear();
        assert!(s.validate().is_err());
        let mut s = ExperimentSpec::table1(1, false);
        s.family = SensingFamily::Wishart;
        assert!(s.validate().is_err());
        let mut s = ExperimentSpec::certificate(1);
        s.instances = 0;
        assert!(s.validate().is_err());
    }

    #[test]
    fn spec_json_roundtrip() {
        let s = ExperimentSpec::table2(7, true);
        let text = serde_json::to_string(&s).unwrap();
        let back = ExperimentSpec::from_json(&text).unwrap();
        assert_eq!(back.name, ExperimentName::Table2);
        assert_eq!(back.grid.len(), 4);
        assert_eq!(back.seed, 7);
    }

    #[test]
    fn fig1_small_sweep_produces_artifacts_and_is_deterministic() {
        let mut spec = ExperimentSpec::fig1(11);
        spec.m_sweep = vec![20, 120];
        spec.trials = 2;
        spec.n = 8;

        let d1 = tmp_dir("fig1-a");
        let a1 = run(&spec, &d1).unwrap();
        let d2 = tmp_dir("fig1-b");
        let a2 = run(&spec, &d2).unwrap();

        // CSV identical modulo wall_ms (the last column)
        let strip = |p: &Path| -> Vec<String> {
            std::fs::read_to_string(p)
                .unwrap()
                .lines()
                .map(|l| l.rsplitn(2, ',').nth(1).unwrap_or(l).to_string())
                .collect()
        };
        assert_eq!(strip(a1.csv.as_ref().unwrap()), strip(a2.csv.as_ref().unwrap()));
        assert!(a1.svg.as_ref().unwrap().exists());
        assert!(a1.manifest.exists());

        // rows ordered by (grid, trial) and solver order stable
        let solv: Vec<&str> = a1.rows.iter().map(|r| r.solver.as_str()).collect();
        assert_eq!(
            &solv[..6],
            &[
                "unconstrained_ls",
                "pgd_psd",
                "min_fro",
                "unconstrained_ls",
                "pgd_psd",
                "min_fro"
            ]
        );
        assert!(a1.rows.iter().all(|r| r.dist_full >= 0.0));
        // m = 120 is n(n+1)/2 for n = 15 but overdetermined for n = 8:
        // every solver should nail it
        assert!(a1
            .rows
            .iter()
            .filter(|r| r.m == 120)
            .all(|r| r.dist_full <= 1e-4));

        // instances regenerable from the manifest's lean containers
        let text = std::fs::read_to_string(&a1.manifest).unwrap();
        let v: serde_json::Value = serde_json::from_str(&text).unwrap();
        let inst = &v["instances"][0];
        assert!(inst["map"]["matrices"].is_null());
        let c: JsonContainer = serde_json::from_value(inst["map"].clone()).unwrap();
        let map = crate::report::map_from_container::<f64>(&c).unwrap();
        assert_eq!(map.m(), 20);

        let _ = std::fs::remove_dir_all(&d1);
        let _ = std::fs::remove_dir_all(&d2);
    }

    #[test]
    fn certificate_small_run_reports_checks() {
        let mut spec = ExperimentSpec::certificate(3);
        spec.instances = 2;
        spec.n = 6;
        spec.m_sweep = vec![60];
        spec.rip_samples = 120;

        let d = tmp_dir("cert");
        let art = run(&spec, &d).unwrap();
        let summary = &art.report["summary"];
        assert_eq!(summary["ran"], 2);
        assert_eq!(summary["all_trace_pass"], true);
        assert_eq!(summary["all_pairwise_pass"], true);
        assert!(summary["max_c_gap"].as_f64().unwrap() <= 1e-8);
        // four solvers per instance
        assert_eq!(art.rows.len(), 8);
        assert!(d.join("certificate.json").exists());
        let _ = std::fs::remove_dir_all(&d);
    }

    #[test]
    fn rip_study_small_run_reports_estimates() {
        let mut spec = ExperimentSpec::rip_study(5);
        spec.n = 6;
        spec.m_sweep = vec![80];
        spec.rip_samples = 100;

        let d = tmp_dir("rip");
        let art = run(&spec, &d).unwrap();
        let est = art.report["whitened_estimates"].as_array().unwrap();
        assert_eq!(est.len(), 4); // ranks 1..=4
        let d1 = est[0]["delta_hat"].as_f64().unwrap();
        assert!(d1 > 0.0 && d1 < 1.0, "delta_hat_1 = {d1}");
        assert!(art.report["scaling"]["holds"].as_bool().unwrap());
        assert!(d.join("rip_study.json").exists());
        let _ = std::fs::remove_dir_all(&d);
    }
}
