//! End-to-end acceptance checks, one test per criterion.
//!
//! Each test prints a single `criterion N: PASS/FAIL — ...` line with the
//! measured values and the pinned tolerances (run with `--nocapture` to see
//! the lines on success). Tests serialize on a shared lock so the wall-clock
//! budgets are measured without cross-test contention.

use std::path::PathBuf;
use std::process::Command;
use std::sync::{Mutex, MutexGuard, OnceLock};
use std::time::Instant;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use psdsense_core::experiments::{self, CertificateInstance, ExperimentSpec, GridPoint, ResultRow};
use psdsense_core::rng::{complex_normal, mix_seed, normal, substream};
use psdsense_core::sensing::{
    gen_ground_truth, gen_pauli, gen_wishart, PauliParams, WishartParams,
};
use psdsense_core::solvers::fgd;
use psdsense_core::transform::{find_phi, whiten};
use psdsense_core::{HermitianMatrix, RankBudget, SolverConfig};

const SEED: u64 = 42;

static SERIAL: Mutex<()> = Mutex::new(());

fn serial() -> MutexGuard<'static, ()> {
    SERIAL.lock().unwrap_or_else(|e| e.into_inner())
}

fn out_dir(name: &str) -> PathBuf {
    let dir = PathBuf::from(env!("CARGO_TARGET_TMPDIR"))
        .join("acceptance")
        .join(name);
    if dir.exists() {
        std::fs::remove_dir_all(&dir).expect("clear stale acceptance artifacts");
    }
    std::fs::create_dir_all(&dir).expect("create acceptance out dir");
    dir
}

/// Accumulates labelled checks and prints one pass/fail line per criterion.
struct Criterion {
    id: usize,
    passed: Vec<String>,
    failed: Vec<String>,
}

impl Criterion {
    fn new(id: usize) -> Self {
        Criterion {
            id,
            passed: Vec::new(),
            failed: Vec::new(),
        }
    }

    fn check(&mut self, ok: bool, detail: String) {
        if ok {
            self.passed.push(detail);
        } else {
            self.failed.push(detail);
        }
    }

    fn finish(self) {
        if self.failed.is_empty() {
            println!("criterion {}: PASS — {}", self.id, self.passed.join("; "));
        } else {
            println!("criterion {}: FAIL — {}", self.id, self.failed.join("; "));
            panic!(
                "criterion {} failed: {}",
                self.id,
                self.failed.join("; ")
            );
        }
    }
}

fn median(values: &mut Vec<f64>) -> f64 {
    assert!(!values.is_empty(), "median of an empty set");
    values.sort_by(f64::total_cmp);
    let k = values.len();
    if k % 2 == 1 {
        values[k / 2]
    } else {
        0.5 * (values[k / 2 - 1] + values[k / 2])
    }
}

fn median_dist(rows: &[ResultRow], m: usize, solver: &str) -> f64 {
    let mut v: Vec<f64> = rows
        .iter()
        .filter(|r| r.m == m && r.solver == solver)
        .map(|r| r.dist_full)
        .collect();
    median(&mut v)
}

fn dist_of(rows: &[ResultRow], solver: &str) -> f64 {
    rows.iter()
        .find(|r| r.solver == solver)
        .unwrap_or_else(|| panic!("no {solver} row"))
        .dist_full
}

// ---------------------------------------------------------------------------
// 1. recovery error vs sample count, n = 15, rank 1, 5 trials
// ---------------------------------------------------------------------------

#[test]
fn criterion_1_recovery_error_vs_sample_count() {
    let _guard = serial();
    let mut spec = ExperimentSpec::fig1(SEED);
    spec.m_sweep = vec![60, 126];

    let start = Instant::now();
    let art = experiments::run(&spec, &out_dir("criterion1")).expect("sweep run");
    let secs = start.elapsed().as_secs_f64();

    let pgd60 = median_dist(&art.rows, 60, "pgd_psd");
    let ls60 = median_dist(&art.rows, 60, "unconstrained_ls");
    let pgd126 = median_dist(&art.rows, 126, "pgd_psd");
    let ls126 = median_dist(&art.rows, 126, "unconstrained_ls");

    let mut c = Criterion::new(1);
    c.check(
        pgd60 <= 1e-3,
        format!("median pgd_psd dist at m=60 = {pgd60:.2e} (<= 1e-3)"),
    );
    c.check(
        ls60 >= 1e-1,
        format!("median unconstrained_ls dist at m=60 = {ls60:.2e} (>= 1e-1)"),
    );
    c.check(
        pgd126 <= 1e-3,
        format!("median pgd_psd dist at m=126 = {pgd126:.2e} (<= 1e-3)"),
    );
    c.check(
        ls126 <= 1e-3,
        format!("median unconstrained_ls dist at m=126 = {ls126:.2e} (<= 1e-3)"),
    );
    c.check(secs < 60.0, format!("wall time {secs:.1}s (< 60s)"));
    c.finish();
}

// ---------------------------------------------------------------------------
// 2. convex-solver comparison on the (n^2 = 256, m = 128) Pauli instance
// ---------------------------------------------------------------------------

#[test]
fn criterion_2_convex_solvers_on_pauli_instance() {
    let _guard = serial();
    let mut spec = ExperimentSpec::table1(SEED, false);
    spec.grid = vec![GridPoint { qubits: 4, m: 128 }];
    spec.trials = 1;

    let start = Instant::now();
    let art = experiments::run(&spec, &out_dir("criterion2")).expect("comparison run");
    let secs = start.elapsed().as_secs_f64();

    let nuclear = dist_of(&art.rows, "nuclear_psd");
    let min_fro = dist_of(&art.rows, "min_fro");
    let pgd = dist_of(&art.rows, "pgd_psd");

    let mut c = Criterion::new(2);
    c.check(
        nuclear <= 1e-3,
        format!("nuclear_psd dist = {nuclear:.2e} (<= 1e-3)"),
    );
    c.check(
        min_fro <= 2e-2,
        format!("min_fro dist = {min_fro:.2e} (<= 2e-2)"),
    );
    c.check(pgd <= 1e-3, format!("pgd_psd dist = {pgd:.2e} (<= 1e-3)"));
    c.check(
        nuclear <= min_fro,
        format!("ordering nuclear {nuclear:.2e} <= min_fro {min_fro:.2e}"),
    );
    c.check(secs < 120.0, format!("wall time {secs:.1}s (< 120s)"));
    c.finish();
}

// ---------------------------------------------------------------------------
// 3. factored solver, known rank vs full width, on the same Pauli instance
// ---------------------------------------------------------------------------

#[test]
fn criterion_3_factored_solver_rank_budgets() {
    let _guard = serial();
    // Same instance derivation as the experiment harness uses for the
    // (256, 128) grid point so the two routes see identical data.
    let map_seed = mix_seed(SEED, 0, 0);
    let truth_seed = mix_seed(SEED, 0, 1);
    let map = gen_pauli(4, 128, map_seed, &PauliParams::default()).expect("pauli map");
    let truth = gen_ground_truth::<Complex64>(16, 1, true, truth_seed).expect("ground truth");
    let b = map.apply(&truth.matrix).expect("measurements");

    let budget = 200_000;
    let cfg_r = SolverConfig {
        max_iters: budget,
        rank_budget: RankBudget::Fixed(1),
        ..SolverConfig::default()
    };
    let cfg_full = SolverConfig {
        max_iters: budget,
        rank_budget: RankBudget::Full,
        ..SolverConfig::default()
    };

    let start = Instant::now();
    let mut rank1 = fgd(&map, &b, &cfg_r).expect("factored solve, rank 1");
    let mut full = fgd(&map, &b, &cfg_full).expect("factored solve, full width");
    let secs = start.elapsed().as_secs_f64();
    rank1.eval_against(&truth).expect("distance eval");
    full.eval_against(&truth).expect("distance eval");

    let dist_r = rank1.dist_full.unwrap();
    let dist_full = full.dist_full.unwrap();
    let eig = full.x_hat.eig().expect("eigendecomposition");
    let energy = eig.values[0] / full.x_hat.trace();

    // Iterations to reach relative residual 1e-4 under an equal iteration
    // budget; not reaching it within the budget counts as more.
    let thresh = 1e-4;
    let it_r = rank1.iters_to(thresh);
    let it_full = full.iters_to(thresh).unwrap_or(budget + 1);

    let mut c = Criterion::new(3);
    c.check(
        dist_r <= 1e-3,
        format!("fgd rank-1 dist = {dist_r:.2e} (<= 1e-3)"),
    );
    c.check(
        dist_full <= 1e-1,
        format!("fgd full dist = {dist_full:.2e} (<= 1e-1)"),
    );
    c.check(
        energy >= 0.9,
        format!("full-width top-eigenvalue energy fraction = {energy:.3} (>= 0.9)"),
    );
    c.check(
        it_r.is_some_and(|it| it < it_full),
        format!(
            "iterations to residual 1e-4: rank-1 {} vs full {} of {budget} budget",
            it_r.map_or("unreached".into(), |it| it.to_string()),
            if it_full > budget { "unreached".into() } else { it_full.to_string() },
        ),
    );
    c.check(secs < 120.0, format!("wall time {secs:.1}s (< 120s)"));
    c.finish();
}

// ---------------------------------------------------------------------------
// 4 + 5. certificate study on 20 seeded Wishart instances (n = 10, m = 150),
// shared between the two criteria via a OnceLock.
// ---------------------------------------------------------------------------

struct CertificateRun {
    instances: Vec<CertificateInstance>,
    summary: serde_json::Value,
    secs: f64,
}

static CERTIFICATE: OnceLock<CertificateRun> = OnceLock::new();

fn certificate_run() -> &'static CertificateRun {
    CERTIFICATE.get_or_init(|| {
        let spec = ExperimentSpec::certificate(SEED);
        let start = Instant::now();
        let art = experiments::run(&spec, &out_dir("criterion4_5")).expect("certificate run");
        let secs = start.elapsed().as_secs_f64();
        let instances: Vec<CertificateInstance> =
            serde_json::from_value(art.report["instances"].clone())
                .expect("certificate instance records");
        CertificateRun {
            instances,
            summary: art.report["summary"].clone(),
            secs,
        }
    })
}

#[test]
fn criterion_4_trace_certificate_on_feasible_psd_outputs() {
    let _guard = serial();
    let run = certificate_run();

    let mut c = Criterion::new(4);
    let ran = run.summary["ran"].as_u64().unwrap_or(0);
    c.check(ran == 20, format!("instances run = {ran} (= 20, none skipped)"));

    let mut checked = 0usize;
    let mut max_rel_gap = 0.0f64;
    let mut violations = Vec::new();
    for inst in &run.instances {
        if inst.skipped.is_some() {
            continue;
        }
        let cval = inst.c_from_phi.expect("certificate constant");
        let tol = 1e-6 * (1.0 + cval.abs());
        for check in &inst.solver_checks {
            if !(check.feasible && check.psd) {
                continue;
            }
            checked += 1;
            let gap = check.trace_gap.unwrap_or(f64::INFINITY);
            max_rel_gap = max_rel_gap.max(gap / tol);
            if !(gap <= tol && check.trace_pass == Some(true)) {
                violations.push(format!(
                    "instance {} {}: gap {gap:.2e} > tol {tol:.2e}",
                    inst.index, check.solver
                ));
            }
        }
    }
    c.check(
        checked >= 20,
        format!("feasible PSD solver outputs checked = {checked} (>= 20)"),
    );
    c.check(
        violations.is_empty(),
        if violations.is_empty() {
            format!(
                "all trace gaps within 1e-6*(1+|c|), worst at {:.1}% of tolerance",
                100.0 * max_rel_gap
            )
        } else {
            violations.join(", ")
        },
    );
    c.check(
        run.summary["all_trace_pass"].as_bool() == Some(true),
        "summary flag all_trace_pass".into(),
    );
    c.check(true, format!("wall time {:.1}s", run.secs));
    c.finish();
}

#[test]
fn criterion_5_solver_outputs_agree_pairwise() {
    let _guard = serial();
    let run = certificate_run();

    let mut c = Criterion::new(5);
    let mut pairs = 0usize;
    let mut worst = 0.0f64;
    let mut violations = Vec::new();
    for inst in &run.instances {
        if inst.skipped.is_some() {
            continue;
        }
        // Independent threshold route: rebuild the ground truth from its
        // recorded seed and recompute 1e-2 * (1 + ||X*||_F).
        let truth =
            gen_ground_truth::<f64>(10, 1, false, inst.truth_seed).expect("ground truth replay");
        let expected_tol = 1e-2 * (1.0 + truth.matrix.fro_norm());
        if inst.pairwise.len() != 3 {
            violations.push(format!(
                "instance {}: {} pairwise distances, expected 3",
                inst.index,
                inst.pairwise.len()
            ));
            continue;
        }
        for pair in &inst.pairwise {
            pairs += 1;
            worst = worst.max(pair.dist / expected_tol);
            let tol_consistent = (pair.threshold - expected_tol).abs() <= 1e-9 * expected_tol;
            if !(pair.pass && pair.dist <= expected_tol && tol_consistent) {
                violations.push(format!(
                    "instance {} {}-{}: dist {:.2e} vs tol {:.2e}",
                    inst.index, pair.a, pair.b, pair.dist, expected_tol
                ));
            }
        }
    }
    c.check(
        pairs == 60,
        format!("pairwise distances checked = {pairs} (= 3 per instance)"),
    );
    c.check(
        violations.is_empty(),
        if violations.is_empty() {
            format!(
                "all pairs within 1e-2*(1+||X*||_F), worst at {:.1}% of tolerance",
                100.0 * worst
            )
        } else {
            violations.join(", ")
        },
    );
    c.check(
        run.summary["all_pairwise_pass"].as_bool() == Some(true),
        "summary flag all_pairwise_pass".into(),
    );
    c.finish();
}

// ---------------------------------------------------------------------------
// 6. restricted-isometry estimates on a whitened Wishart map
// ---------------------------------------------------------------------------

#[test]
fn criterion_6_whitened_rip_estimates() {
    let _guard = serial();
    let spec = ExperimentSpec::rip_study(SEED);

    let start = Instant::now();
    let art = experiments::run(&spec, &out_dir("criterion6")).expect("rip study run");
    let secs = start.elapsed().as_secs_f64();

    let est = &art.report["whitened_estimates"][0];
    let delta1 = est["delta_hat"].as_f64().unwrap_or(f64::INFINITY);
    let rank = est["r"].as_u64().unwrap_or(0);
    let scaling = &art.report["scaling"];
    let gamma = scaling["gamma"].as_u64().unwrap_or(0);
    let slack = scaling["slack"].as_f64().unwrap_or(f64::NAN);
    let holds = scaling["holds"].as_bool() == Some(true);
    let delta_hi = scaling["delta_hi"].as_f64().unwrap_or(f64::NAN);
    let delta_lo = scaling["delta_lo"].as_f64().unwrap_or(f64::NAN);

    let mut c = Criterion::new(6);
    c.check(
        rank == 1 && delta1 < 1.0,
        format!("delta_hat(r=1) = {delta1:.3} (< 1)"),
    );
    c.check(
        gamma == 3 && slack == 0.05 && holds,
        format!(
            "rank-scaling check: delta_hat({}) = {delta_hi:.3} <= {gamma}*delta_hat({}) + {slack} = {:.3}",
            scaling["rank_hi"], scaling["rank_lo"],
            gamma as f64 * delta_lo + slack
        ),
    );
    c.check(secs < 10.0, format!("wall time {secs:.1}s (< 10s)"));
    c.finish();
}

// ---------------------------------------------------------------------------
// 7. numerical kernel suite
// ---------------------------------------------------------------------------

/// Deterministic pseudo-random stream for the direct-search oracle.
struct Lcg(u64);

impl Lcg {
    fn next_u64(&mut self) -> u64 {
        self.0 = self.0.wrapping_add(0x9e3779b97f4a7c15);
        let mut z = self.0;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
        z ^ (z >> 31)
    }

    fn sym(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 / (1u64 << 53) as f64 * 2.0 - 1.0
    }
}

fn rand_herm(n: usize, seed: u64, stream: u64) -> HermitianMatrix<f64> {
    let mut rng = substream(seed, stream);
    HermitianMatrix::new(DMatrix::from_fn(n, n, |_, _| normal(&mut rng))).expect("square matrix")
}

fn rand_herm_complex(n: usize, seed: u64, stream: u64) -> HermitianMatrix<Complex64> {
    let mut rng = substream(seed, stream);
    HermitianMatrix::new(DMatrix::from_fn(n, n, |_, _| complex_normal(&mut rng)))
        .expect("square matrix")
}

fn rand_vector(len: usize, seed: u64, stream: u64) -> DVector<f64> {
    let mut rng = substream(seed, stream);
    DVector::from_fn(len, |_, _| normal(&mut rng))
}

/// Lower-triangular parameter vector -> L L^T, the direct-search iterate.
fn factor_to_psd(params: &[f64], n: usize) -> HermitianMatrix<f64> {
    let mut l = DMatrix::zeros(n, n);
    let mut k = 0;
    for i in 0..n {
        for j in 0..=i {
            l[(i, j)] = params[k];
            k += 1;
        }
    }
    HermitianMatrix::new(&l * l.transpose()).expect("square matrix")
}

/// Nearest PSD point by annealed direct search plus coordinate pattern
/// search over a Cholesky-style factor; independent of the spectral route.
fn nearest_psd_by_search(target: &HermitianMatrix<f64>) -> HermitianMatrix<f64> {
    let n = target.n();
    let dim = n * (n + 1) / 2;
    let mut rng = Lcg(0x5eed);
    let objective = |params: &[f64]| -> f64 {
        factor_to_psd(params, n)
            .fro_dist(target)
            .expect("matching sizes")
    };

    let mut best = vec![0.0; dim];
    let mut best_obj = objective(&best);
    let mut sigma = 1.0f64;
    for step in 0..4000 {
        if step % 500 == 499 {
            sigma = (sigma * 0.5).max(1e-4);
        }
        let cand: Vec<f64> = best.iter().map(|v| v + sigma * rng.sym()).collect();
        let obj = objective(&cand);
        if obj < best_obj {
            best = cand;
            best_obj = obj;
        }
    }

    let mut step = 0.1;
    while step > 1e-10 {
        let mut improved = false;
        for k in 0..dim {
            for dir in [1.0, -1.0] {
                let mut cand = best.clone();
                cand[k] += dir * step;
                let obj = objective(&cand);
                if obj < best_obj {
                    best = cand;
                    best_obj = obj;
                    improved = true;
                }
            }
        }
        if !improved {
            step *= 0.5;
        }
    }
    factor_to_psd(&best, n)
}

#[test]
fn criterion_7_numerical_kernels() {
    let _guard = serial();
    let mut c = Criterion::new(7);

    // Analytic data-fit gradient A*(A(X) - b) vs central finite differences
    // of 0.5*||A(X) - b||^2, relative tolerance 1e-5, on 5x5 instances.
    let mut worst_grad = 0.0f64;
    for seed in [5, 6, 7] {
        let map = gen_wishart(5, 8, seed, &WishartParams::default()).expect("map");
        let x = rand_herm(5, seed, 100).scale(0.5);
        let dir = {
            let d = rand_herm(5, seed, 101);
            d.scale(1.0 / d.fro_norm())
        };
        let b = rand_vector(8, seed, 102);
        let f = |x: &HermitianMatrix<f64>| -> f64 {
            let r = map.apply(x).expect("apply") - &b;
            0.5 * r.norm_squared()
        };
        let grad = map
            .adjoint(&(map.apply(&x).expect("apply") - &b))
            .expect("adjoint");
        let analytic = grad.inner(&dir).expect("inner");
        let h = 1e-5;
        let fd = (f(&x.axpy(h, &dir).unwrap()) - f(&x.axpy(-h, &dir).unwrap())) / (2.0 * h);
        worst_grad = worst_grad.max((analytic - fd).abs() / (1.0 + analytic.abs()));
    }
    c.check(
        worst_grad <= 1e-5,
        format!("gradient vs central differences: worst rel err {worst_grad:.2e} (<= 1e-5)"),
    );

    // PSD projection: idempotence, and agreement with a direct search for
    // the nearest PSD point.
    let target = rand_herm(3, 11, 0).scale(2.0);
    let proj = target.psd_project().expect("projection");
    let idem = proj
        .psd_project()
        .expect("projection")
        .fro_dist(&proj)
        .expect("distance");
    c.check(
        idem <= 1e-10,
        format!("psd_project idempotence gap {idem:.2e} (<= 1e-10)"),
    );
    let searched = nearest_psd_by_search(&target);
    let oracle_gap = searched.fro_dist(&proj).expect("distance");
    c.check(
        oracle_gap <= 1e-4,
        format!("nearest-PSD direct search vs psd_project: {oracle_gap:.2e} (<= 1e-4)"),
    );

    // Whitening identity sum_i phi_i M_i = I.
    let map = gen_wishart(6, 40, 9, &WishartParams::default()).expect("map");
    let phi = find_phi(&map).expect("certificate weights");
    let m = map.m();
    let problem = whiten(map, DVector::zeros(m), phi).expect("whitened problem");
    let identity_gap = problem.identity_residual();
    c.check(
        identity_gap <= 1e-8,
        format!("whitening identity residual {identity_gap:.2e} (<= 1e-8)"),
    );

    // Adjoint identity <A(X), y> = <X, A*(y)> on normalized probes, real
    // and complex.
    let mut worst_adj = 0.0f64;
    let real_map = gen_wishart(8, 20, 13, &WishartParams::default()).expect("map");
    for probe in 0..5 {
        let x = {
            let x = rand_herm(8, 13, 50 + probe);
            x.scale(1.0 / x.fro_norm())
        };
        let y = rand_vector(20, 13, 80 + probe).normalize();
        let lhs = real_map.apply(&x).expect("apply").dot(&y);
        let rhs = real_map.adjoint(&y).expect("adjoint").inner(&x).expect("inner");
        worst_adj = worst_adj.max((lhs - rhs).abs());
    }
    let complex_map = gen_pauli(2, 10, 14, &PauliParams::default()).expect("map");
    for probe in 0..5 {
        let x = {
            let x = rand_herm_complex(4, 14, 50 + probe);
            x.scale(1.0 / x.fro_norm())
        };
        let y = rand_vector(10, 14, 80 + probe).normalize();
        let lhs = complex_map.apply(&x).expect("apply").dot(&y);
        let rhs = complex_map
            .adjoint(&y)
            .expect("adjoint")
            .inner(&x)
            .expect("inner");
        worst_adj = worst_adj.max((lhs - rhs).abs());
    }
    c.check(
        worst_adj <= 1e-10,
        format!("adjoint identity: worst gap {worst_adj:.2e} (<= 1e-10)"),
    );

    c.finish();
}

// ---------------------------------------------------------------------------
// 8. determinism of experiment reruns
// ---------------------------------------------------------------------------

#[test]
fn criterion_8_rerun_determinism() {
    let _guard = serial();
    let exe = env!("CARGO_BIN_EXE_psdsense");
    let dirs = [out_dir("criterion8_run1"), out_dir("criterion8_run2")];
    for dir in &dirs {
        let output = Command::new(exe)
            .args(["exp", "table1", "--seed", "42", "--out"])
            .arg(dir)
            .output()
            .expect("spawn experiment run");
        assert!(
            output.status.success(),
            "experiment run failed: {}",
            String::from_utf8_lossy(&output.stderr)
        );
    }

    let first = std::fs::read_to_string(dirs[0].join("table1.csv")).expect("first CSV");
    let second = std::fs::read_to_string(dirs[1].join("table1.csv")).expect("second CSV");
    let a: Vec<&str> = first.lines().collect();
    let b: Vec<&str> = second.lines().collect();

    let mut c = Criterion::new(8);
    c.check(
        a.len() == b.len() && a.len() > 1,
        format!("row counts {} vs {}", a.len(), b.len()),
    );
    c.check(a[0] == b[0], "identical headers".into());

    // The schema is a fixed unquoted column list, so a comma split is exact.
    let wall_idx = a[0]
        .split(',')
        .position(|h| h == "wall_ms")
        .expect("wall_ms column");
    let mut mismatches = Vec::new();
    for (line, (ra, rb)) in a.iter().zip(&b).enumerate().skip(1) {
        let fa: Vec<&str> = ra.split(',').collect();
        let fb: Vec<&str> = rb.split(',').collect();
        if fa.len() != fb.len() {
            mismatches.push(format!("line {line}: field counts differ"));
            continue;
        }
        for (k, (va, vb)) in fa.iter().zip(&fb).enumerate() {
            if k != wall_idx && va != vb {
                mismatches.push(format!("line {line} column {k}: {va} vs {vb}"));
            }
        }
    }
    c.check(
        mismatches.is_empty(),
        if mismatches.is_empty() {
            format!(
                "{} data rows identical outside wall_ms",
                a.len().saturating_sub(1)
            )
        } else {
            mismatches.join(", ")
        },
    );
    c.finish();
}
