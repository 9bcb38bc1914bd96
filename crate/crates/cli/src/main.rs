//! Command-line front end for the matrix-sensing toolkit.
//!
//! Subcommands: `gen` (seeded sensing map / ground truth containers),
//! `solve` (one solver on one instance), `whiten`, `rip`, `exp <name>`
//! (full experiments), and `plot` (CSV to SVG). Exit codes: 0 on success,
//! 2 for invalid configuration, 3 for numerical failure.

use clap::{Args, Parser, Subcommand};
use nalgebra::DVector;
use num_complex::Complex64;
use psdsense_core::experiments::{self, ExperimentName, ExperimentSpec};
use psdsense_core::plot::{render_log_y, PlotSpec, Series};
use psdsense_core::report::{
    map_from_container, map_to_container, truth_from_container, truth_to_container,
    whitened_to_container, JsonContainer, MapConfig, SolverRunRecord,
};
use psdsense_core::rip::{check_corollary_scaling, estimate_rip_l2l1};
use psdsense_core::sensing::{
    gen_ground_truth, gen_pauli, gen_rank_one_gaussian, gen_wishart, GroundTruth, PauliParams,
    SensingFamily, SensingMap, WishartParams,
};
use psdsense_core::solvers::{
    fgd, min_fro_norm, nuclear_min, pgd_psd, unconstrained_ls, SolverReport,
};
use psdsense_core::transform::{find_phi, whiten};
use psdsense_core::{Error, ErrorKind, Field, RankBudget, ScalarField, SolverConfig};
use serde::Deserialize;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "psdsense",
    version,
    about = "Low-rank PSD matrix sensing: ensembles, whitening, RIP estimation, solvers"
)]
struct Cli {
    /// Base seed for all randomness.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory for artifacts.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// JSON config file (experiment spec for `exp`, generator/solver
    /// parameters elsewhere).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Scalar field for generated data.
    #[arg(long, global = true, value_parser = parse_field, default_value = "real")]
    field: ScalarField,
    /// Worker threads (defaults to the number of cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    cmd: Cmd,
}

fn parse_field(s: &str) -> Result<ScalarField, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

#[derive(Subcommand)]
enum Cmd {
    /// Generate a sensing map (and optionally a ground truth + measurements).
    Gen(GenArgs),
    /// Run one solver on one stored instance.
    Solve(SolveArgs),
    /// Find a positive certificate and whiten a stored map.
    Whiten(WhitenArgs),
    /// Estimate RIP-l2/l1 constants of a stored map.
    Rip(RipArgs),
    /// Run a named experiment (fig1|table1|table2|certificate|rip_study).
    Exp(ExpArgs),
    /// Render a results CSV as an SVG line chart (median dist_full vs m).
    Plot(PlotArgs),
}

#[derive(Args)]
struct GenArgs {
    /// Sensing family: wishart | rank_one_gaussian | pauli.
    #[arg(long)]
    family: SensingFamilyArg,
    /// Matrix size (wishart / rank_one_gaussian).
    #[arg(long)]
    n: Option<usize>,
    /// Qubit count (pauli; n = 2^qubits).
    #[arg(long)]
    qubits: Option<usize>,
    /// Number of measurements.
    #[arg(long)]
    m: usize,
    /// Also draw a ground truth and the measurement vector.
    #[arg(long)]
    truth: bool,
    /// Ground-truth rank.
    #[arg(long, default_value_t = 1)]
    rank: usize,
    /// Give the ground truth unit trace.
    #[arg(long)]
    normalize: bool,
    /// Embed matrices in the container instead of relying on the seed.
    #[arg(long)]
    embed: bool,
}

#[derive(Clone, Copy)]
struct SensingFamilyArg(SensingFamily);

impl std::str::FromStr for SensingFamilyArg {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        let fam: SensingFamily = s.parse().map_err(|e: Error| e.to_string())?;
        Ok(SensingFamilyArg(fam))
    }
}

#[derive(Args)]
struct SolveArgs {
    /// Solver: unconstrained_ls | pgd_psd | fgd | nuclear | nuclear_psd | min_fro.
    #[arg(long)]
    solver: String,
    /// Sensing-map container (from `gen`).
    #[arg(long)]
    map: PathBuf,
    /// Ground-truth container; measurements are recomputed from it and the
    /// solution is scored against it.
    #[arg(long)]
    truth: Option<PathBuf>,
    /// Measurement vector JSON ({"b": [...]}); alternative to --truth.
    #[arg(long)]
    b: Option<PathBuf>,
    /// Rank budget: a number or "full".
    #[arg(long)]
    rank: Option<String>,
    /// Embed the recovered matrix in the output record.
    #[arg(long)]
    embed: bool,
}

#[derive(Args)]
struct WhitenArgs {
    #[arg(long)]
    map: PathBuf,
    /// Measurement vector JSON ({"b": [...]}).
    #[arg(long)]
    b: PathBuf,
}

#[derive(Args)]
struct RipArgs {
    #[arg(long)]
    map: PathBuf,
    /// Probe rank.
    #[arg(long, default_value_t = 1)]
    rank: usize,
    /// Number of probes.
    #[arg(long, default_value_t = 200)]
    samples: usize,
    /// Whiten the map (requires a positive certificate) before estimating.
    #[arg(long)]
    whiten: bool,
    /// Also run the rank-scaling check at this factor (>= 1; 1 is the
    /// degenerate monotonicity check).
    #[arg(long)]
    gamma: Option<usize>,
}

#[derive(Args)]
struct ExpArgs {
    /// fig1 | table1 | table2 | certificate | rip_study.
    name: String,
    /// Add the (4096, 640) and (16384, 1536) table rows (multi-minute).
    #[arg(long)]
    large: bool,
    /// fig1 only: use true Wishart sensing instead of scaled rank-one
    /// Gaussian outer products.
    #[arg(long)]
    wishart: bool,
}

#[derive(Args)]
struct PlotArgs {
    /// Results CSV in the harness schema.
    #[arg(long)]
    csv: PathBuf,
    /// Output SVG path (default: CSV path with .svg extension under --out).
    #[arg(long)]
    svg: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(t) = cli.threads {
        // fails harmlessly if a pool was already installed
        let _ = rayon::ThreadPoolBuilder::new().num_threads(t).build_global();
    }
    match dispatch(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            match e.kind() {
                ErrorKind::Config => ExitCode::from(2),
                ErrorKind::Numerical => ExitCode::from(3),
                ErrorKind::Io => ExitCode::from(1),
            }
        }
    }
}

fn dispatch(cli: &Cli) -> Result<(), Error> {
    std::fs::create_dir_all(&cli.out)?;
    match &cli.cmd {
        Cmd::Gen(args) => cmd_gen(cli, args),
        Cmd::Solve(args) => cmd_solve(cli, args),
        Cmd::Whiten(args) => cmd_whiten(cli, args),
        Cmd::Rip(args) => cmd_rip(cli, args),
        Cmd::Exp(args) => cmd_exp(cli, args),
        Cmd::Plot(args) => cmd_plot(cli, args),
    }
}

fn seed_of(cli: &Cli) -> u64 {
    cli.seed.unwrap_or(0)
}

/// Generator parameters optionally supplied via --config.
#[derive(Default, Deserialize)]
#[serde(default)]
struct GenConfig {
    wishart: Option<WishartParams>,
    pauli: Option<PauliParams>,
    solver: Option<SolverConfig>,
}

fn load_gen_config(cli: &Cli) -> Result<GenConfig, Error> {
    match &cli.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)?;
            Ok(serde_json::from_str(&text)?)
        }
        None => Ok(GenConfig::default()),
    }
}

// ---------------------------------------------------------------------------
// gen
// ---------------------------------------------------------------------------

fn cmd_gen(cli: &Cli, args: &GenArgs) -> Result<(), Error> {
    let cfg = load_gen_config(cli)?;
    let seed = seed_of(cli);
    let family = args.family.0;

    match family {
        SensingFamily::Pauli => {
            let q = args.qubits.ok_or_else(|| {
                Error::InvalidConfig("pauli generation requires --qubits".into())
            })?;
            let params = cfg.pauli.unwrap_or_default();
            let map = gen_pauli(q, args.m, seed, &params)?;
            let map_cfg = MapConfig {
                pauli: Some(params),
                qubits: Some(q),
                ..MapConfig::default()
            };
            let container = map_to_container(&map, seed, &map_cfg, args.embed)?;
            finish_gen::<Complex64>(cli, args, map, container)
        }
        SensingFamily::Wishart | SensingFamily::RankOneGaussian => {
            if cli.field == ScalarField::Complex {
                return Err(Error::InvalidConfig(format!(
                    "{family} generation is real-valued; drop --field complex"
                )));
            }
            let n = args
                .n
                .ok_or_else(|| Error::InvalidConfig(format!("{family} requires --n")))?;
            let (map, map_cfg) = match family {
                SensingFamily::Wishart => {
                    let params = cfg.wishart.unwrap_or_default();
                    let map = gen_wishart(n, args.m, seed, &params)?;
                    let mc = MapConfig {
                        wishart: Some(params),
                        ..MapConfig::default()
                    };
                    (map, mc)
                }
                _ => (
                    gen_rank_one_gaussian(n, args.m, seed)?,
                    MapConfig::default(),
                ),
            };
            let container = map_to_container(&map, seed, &map_cfg, args.embed)?;
            finish_gen::<f64>(cli, args, map, container)
        }
        other => Err(Error::InvalidConfig(format!(
            "cannot generate family {other}"
        ))),
    }
}

fn finish_gen<T: Field>(
    cli: &Cli,
    args: &GenArgs,
    map: SensingMap<T>,
    container: JsonContainer,
) -> Result<(), Error> {
    let map_path = cli.out.join("map.json");
    container.save(&map_path)?;
    println!("wrote {}", map_path.display());

    if args.truth {
        let truth_seed = seed_of(cli).wrapping_add(1);
        let truth = gen_ground_truth::<T>(map.n(), args.rank, args.normalize, truth_seed)?;
        let b = map.apply(&truth.matrix)?;

        let truth_path = cli.out.join("truth.json");
        truth_to_container(&truth, truth_seed, args.embed)?.save(&truth_path)?;
        println!("wrote {}", truth_path.display());

        let b_path = cli.out.join("b.json");
        let payload = serde_json::json!({ "b": b.as_slice() });
        std::fs::write(&b_path, serde_json::to_string_pretty(&payload)?)?;
        println!("wrote {}", b_path.display());
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// solve
// ---------------------------------------------------------------------------

#[derive(Deserialize)]
struct BFile {
    b: Vec<f64>,
}

fn load_b(path: &Path) -> Result<DVector<f64>, Error> {
    let text = std::fs::read_to_string(path)?;
    // accept {"b": [...]} or a bare array
    if let Ok(file) = serde_json::from_str::<BFile>(&text) {
        return Ok(DVector::from_vec(file.b));
    }
    let raw: Vec<f64> = serde_json::from_str(&text)?;
    Ok(DVector::from_vec(raw))
}

fn cmd_solve(cli: &Cli, args: &SolveArgs) -> Result<(), Error> {
    let container = JsonContainer::load(&args.map)?;
    match container.field {
        ScalarField::Real => solve_typed::<f64>(cli, args, &container),
        ScalarField::Complex => solve_typed::<Complex64>(cli, args, &container),
    }
}

fn solve_typed<T: Field>(
    cli: &Cli,
    args: &SolveArgs,
    container: &JsonContainer,
) -> Result<(), Error> {
    let map = map_from_container::<T>(container)?;

    let truth: Option<GroundTruth<T>> = match &args.truth {
        Some(path) => Some(truth_from_container::<T>(&JsonContainer::load(path)?)?),
        None => None,
    };
    let b = match (&args.b, &truth) {
        (Some(path), _) => load_b(path)?,
        (None, Some(t)) => map.apply(&t.matrix)?,
        (None, None) => {
            return Err(Error::InvalidConfig(
                "solve needs --b or --truth to define the measurements".into(),
            ))
        }
    };

    let mut cfg = load_gen_config(cli)?.solver.unwrap_or_default();
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(rank) = &args.rank {
        cfg.rank_budget = rank
            .parse::<RankBudget>()
            .map_err(|e| Error::InvalidConfig(format!("--rank: {e}")))?;
    }

    let mut report: SolverReport<T> = match args.solver.as_str() {
        "unconstrained_ls" | "ls" => unconstrained_ls(&map, &b)?,
        "pgd_psd" | "pgd" => pgd_psd(&map, &b, &cfg)?,
        "fgd" => fgd(&map, &b, &cfg)?,
        "nuclear" => nuclear_min(&map, &b, &cfg, false)?,
        "nuclear_psd" => nuclear_min(&map, &b, &cfg, true)?,
        "min_fro" | "min_fro_norm" => min_fro_norm(&map, &b, &cfg)?,
        other => {
            return Err(Error::InvalidConfig(format!(
                "unknown solver '{other}' (unconstrained_ls|pgd_psd|fgd|nuclear|nuclear_psd|min_fro)"
            )))
        }
    };
    if let Some(t) = &truth {
        report.eval_against(t)?;
    }

    let record = SolverRunRecord::from_report(&report, args.embed);
    let path = cli.out.join("solution.json");
    std::fs::write(&path, serde_json::to_string_pretty(&record)?)?;

    print!(
        "solver={} iters={} converged={} resid={:.3e}",
        record.solver, record.iters, record.converged, record.resid_final
    );
    if let (Some(df), Some(dr)) = (record.dist_full, record.dist_rank1) {
        print!(" dist_full={df:.3e} dist_rank1={dr:.3e}");
    }
    println!(" wall_ms={:.1}", record.wall_ms);
    println!("wrote {}", path.display());
    Ok(())
}

// ---------------------------------------------------------------------------
// whiten
// ---------------------------------------------------------------------------

fn cmd_whiten(cli: &Cli, args: &WhitenArgs) -> Result<(), Error> {
    let container = JsonContainer::load(&args.map)?;
    match container.field {
        ScalarField::Real => whiten_typed::<f64>(cli, args, container),
        ScalarField::Complex => whiten_typed::<Complex64>(cli, args, container),
    }
}

fn whiten_typed<T: Field>(
    cli: &Cli,
    args: &WhitenArgs,
    container: JsonContainer,
) -> Result<(), Error> {
    let map = map_from_container::<T>(&container)?;
    let b = load_b(&args.b)?;
    let phi = find_phi(&map)?;
    let problem = whiten(map, b, phi)?;

    let out = whitened_to_container(&problem, container)?;
    let path = cli.out.join("whitened.json");
    out.save(&path)?;

    println!(
        "trace constant c = {:.12e}; identity residual = {:.3e}",
        problem.trace_constant(),
        problem.identity_residual()
    );
    println!("wrote {}", path.display());
    Ok(())
}

// ---------------------------------------------------------------------------
// rip
// ---------------------------------------------------------------------------

fn cmd_rip(cli: &Cli, args: &RipArgs) -> Result<(), Error> {
    let container = JsonContainer::load(&args.map)?;
    match container.field {
        ScalarField::Real => rip_typed::<f64>(cli, args, &container),
        ScalarField::Complex => rip_typed::<Complex64>(cli, args, &container),
    }
}

fn rip_typed<T: Field>(cli: &Cli, args: &RipArgs, container: &JsonContainer) -> Result<(), Error> {
    let loaded = map_from_container::<T>(container)?;
    let map = if args.whiten {
        let phi = find_phi(&loaded)?;
        let m = loaded.m();
        whiten(loaded, DVector::zeros(m), phi)?.whitened_map().clone()
    } else {
        loaded
    };

    let seed = seed_of(cli);
    let est = estimate_rip_l2l1(&map, args.rank, args.samples, seed)?;
    println!(
        "rank {}: delta_hat = {:.4} (alpha = {:.4}, {} samples; lower-bound estimate)",
        est.r, est.delta_hat, est.alpha, est.samples
    );
    let scaling = match args.gamma {
        Some(g) => {
            let check = check_corollary_scaling(&map, args.rank, g, args.samples, seed)?;
            println!(
                "scaling: delta_{} = {:.4} vs {}*delta_{} + {:.2} = {:.4} -> {}",
                check.rank_hi,
                check.delta_hi,
                g,
                check.rank_lo,
                check.slack,
                g as f64 * check.delta_lo + check.slack,
                if check.holds { "holds" } else { "violated" }
            );
            Some(check)
        }
        None => None,
    };

    let path = cli.out.join("rip.json");
    let payload = serde_json::json!({ "estimate": est, "scaling": scaling });
    std::fs::write(&path, serde_json::to_string_pretty(&payload)?)?;
    println!("wrote {}", path.display());
    Ok(())
}

// ---------------------------------------------------------------------------
// exp
// ---------------------------------------------------------------------------

fn cmd_exp(cli: &Cli, args: &ExpArgs) -> Result<(), Error> {
    let name: ExperimentName = args.name.parse()?;
    let mut spec = match &cli.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)?;
            let spec = ExperimentSpec::from_json(&text)?;
            if spec.name != name {
                return Err(Error::InvalidConfig(format!(
                    "config file describes {}, command line asked for {name}",
                    spec.name
                )));
            }
            spec
        }
        None => ExperimentSpec::named(name, seed_of(cli), args.large),
    };
    if let Some(seed) = cli.seed {
        spec.seed = seed;
    }
    if args.wishart {
        if name != ExperimentName::Fig1 {
            return Err(Error::InvalidConfig(
                "--wishart only applies to fig1".into(),
            ));
        }
        spec.family = SensingFamily::Wishart;
    }

    let artifacts = experiments::run(&spec, &cli.out)?;
    for path in [&artifacts.csv, &artifacts.svg] {
        if let Some(p) = path {
            println!("wrote {}", p.display());
        }
    }
    println!("wrote {}", artifacts.manifest.display());
    Ok(())
}

// ---------------------------------------------------------------------------
// plot
// ---------------------------------------------------------------------------

fn cmd_plot(cli: &Cli, args: &PlotArgs) -> Result<(), Error> {
    let text = std::fs::read_to_string(&args.csv)?;
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::InvalidConfig("empty CSV".into()))?;
    let cols: Vec<&str> = header.split(',').collect();
    let idx = |name: &str| -> Result<usize, Error> {
        cols.iter().position(|c| *c == name).ok_or_else(|| {
            Error::InvalidConfig(format!("CSV is missing required column '{name}'"))
        })
    };
    let (mi, si, di) = (idx("m")?, idx("solver")?, idx("dist_full")?);

    // gather dist values per (solver, m), then take medians
    let mut groups: std::collections::BTreeMap<(String, usize), Vec<f64>> =
        std::collections::BTreeMap::new();
    for (lineno, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        let need = mi.max(si).max(di);
        if fields.len() <= need {
            return Err(Error::InvalidConfig(format!(
                "CSV row {} has {} fields, need at least {}",
                lineno + 2,
                fields.len(),
                need + 1
            )));
        }
        let m: usize = fields[mi]
            .parse()
            .map_err(|e| Error::InvalidConfig(format!("row {}: bad m: {e}", lineno + 2)))?;
        let d: f64 = fields[di]
            .parse()
            .map_err(|e| Error::InvalidConfig(format!("row {}: bad dist: {e}", lineno + 2)))?;
        groups
            .entry((fields[si].to_string(), m))
            .or_default()
            .push(d);
    }
    if groups.is_empty() {
        return Err(Error::InvalidConfig("CSV has no data rows".into()));
    }

    let mut by_solver: std::collections::BTreeMap<String, Vec<(f64, f64)>> =
        std::collections::BTreeMap::new();
    for ((solver, m), mut vals) in groups {
        vals.sort_by(f64::total_cmp);
        let mid = vals.len() / 2;
        let med = if vals.len() % 2 == 1 {
            vals[mid]
        } else {
            0.5 * (vals[mid - 1] + vals[mid])
        };
        by_solver.entry(solver).or_default().push((m as f64, med));
    }
    let series: Vec<Series> = by_solver
        .into_iter()
        .map(|(label, points)| Series { label, points })
        .collect();

    let stem = args
        .csv
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "plot".into());
    let svg_path = args
        .svg
        .clone()
        .unwrap_or_else(|| cli.out.join(format!("{stem}.svg")));
    let plot = PlotSpec {
        title: stem,
        x_label: "samples m".into(),
        y_label: "median recovery error (Frobenius)".into(),
        ..PlotSpec::default()
    };
    std::fs::write(&svg_path, render_log_y(&plot, &series)?)?;
    println!("wrote {}", svg_path.display());
    Ok(())
}
