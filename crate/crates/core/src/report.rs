//! JSON artifact containers and hashing for reproducible runs.
//!
//! Sensing maps, ground truths, and whitened problems all share one
//! container shape:
//!
//! ```json
//! {
//!   "family": "wishart",
//!   "n": 10, "m": 150,
//!   "field": "real",
//!   "seed": 42,
//!   "config": { ... family-specific parameters ... },
//!   "matrices": ["<base64>", ...]
//! }
//! ```
//!
//! `matrices` holds one base64 string per matrix: row-major `f64`
//! little-endian, with real and imaginary parts interleaved per entry for
//! complex data. The field is omitted whenever the content is regenerable
//! from `(family, seed, config)` alone; loading such a container re-runs
//! the seeded generator. Custom maps and whitened ensembles embed their
//! matrices (the whitened container instead embeds enough context — the
//! source container, `phi`, `b`, and `c` — to re-derive them exactly).

use crate::field::{Field, ScalarField};
use crate::linalg::HermitianMatrix;
use crate::sensing::{
    gen_ground_truth, gen_pauli, gen_rank_one_gaussian, gen_wishart, GroundTruth, PauliParams,
    SensingFamily, SensingMap, WishartParams,
};
use crate::solvers::SolverReport;
use crate::transform::{whiten, WhitenedProblem};
use crate::{Error, Result};
use base64::engine::general_purpose::STANDARD as B64;
use base64::Engine;
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::path::Path;

/// The shared on-disk container for maps, truths, and whitened problems.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct JsonContainer {
    pub family: String,
    pub n: usize,
    pub m: usize,
    pub field: ScalarField,
    pub seed: u64,
    #[serde(default)]
    pub config: serde_json::Value,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub matrices: Option<Vec<String>>,
}

impl JsonContainer {
    pub fn to_json_string(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json_string()?)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Ok(serde_json::from_str(&text)?)
    }
}

/// Encodes a matrix as base64 of row-major little-endian `f64` values,
/// interleaving real and imaginary parts for complex scalars.
pub fn encode_matrix<T: Field>(mat: &HermitianMatrix<T>) -> String {
    let n = mat.n();
    let per_entry = match T::FIELD {
        ScalarField::Real => 1,
        ScalarField::Complex => 2,
    };
    let mut bytes = Vec::with_capacity(n * n * per_entry * 8);
    let m = mat.as_matrix();
    for i in 0..n {
        for j in 0..n {
            let v = m[(i, j)];
            bytes.extend_from_slice(&v.re().to_le_bytes());
            if per_entry == 2 {
                bytes.extend_from_slice(&v.im().to_le_bytes());
            }
        }
    }
    B64.encode(bytes)
}

/// Inverse of [`encode_matrix`]; validates length against `n`.
pub fn decode_matrix<T: Field>(data: &str, n: usize) -> Result<HermitianMatrix<T>> {
    let bytes = B64
        .decode(data)
        .map_err(|e| Error::Decode(format!("base64: {e}")))?;
    let per_entry = match T::FIELD {
        ScalarField::Real => 1,
        ScalarField::Complex => 2,
    };
    let expect = n * n * per_entry * 8;
    if bytes.len() != expect {
        return Err(Error::Decode(format!(
            "matrix payload is {} bytes, expected {expect} for n={n} {} data",
            bytes.len(),
            T::FIELD
        )));
    }
    let mut vals = Vec::with_capacity(n * n * per_entry);
    for chunk in bytes.chunks_exact(8) {
        vals.push(f64::from_le_bytes(chunk.try_into().expect("chunk of 8")));
    }
    let mut m = DMatrix::<T>::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            let k = (i * n + j) * per_entry;
            let re = vals[k];
            let im = if per_entry == 2 { vals[k + 1] } else { 0.0 };
            m[(i, j)] = T::from_re_im(re, im);
        }
    }
    HermitianMatrix::new(m)
}

fn encode_all<T: Field>(mats: &[HermitianMatrix<T>]) -> Vec<String> {
    mats.iter().map(encode_matrix).collect()
}

/// Family-specific generation parameters echoed into `config`.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct MapConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wishart: Option<WishartParams>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pauli: Option<PauliParams>,
    /// Qubit count for Pauli ensembles (`n = 2^qubits`).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub qubits: Option<usize>,
}

/// Serializes a sensing map. `embed` forces the matrices into the
/// container even when they are regenerable from the seed.
pub fn map_to_container<T: Field>(
    map: &SensingMap<T>,
    seed: u64,
    config: &MapConfig,
    embed: bool,
) -> Result<JsonContainer> {
    let regenerable = matches!(
        map.family(),
        SensingFamily::Wishart | SensingFamily::RankOneGaussian | SensingFamily::Pauli
    );
    if map.family() == SensingFamily::Pauli && config.qubits.is_none() {
        return Err(Error::InvalidConfig(
            "pauli map container requires config.qubits".into(),
        ));
    }
    let matrices = if embed || !regenerable {
        Some(encode_all(map.matrices()))
    } else {
        None
    };
    Ok(JsonContainer {
        family: map.family().to_string(),
        n: map.n(),
        m: map.m(),
        field: T::FIELD,
        seed,
        config: serde_json::to_value(config)?,
        matrices,
    })
}

/// Reconstructs a sensing map, regenerating from the seed when the
/// container has no embedded matrices.
pub fn map_from_container<T: Field>(c: &JsonContainer) -> Result<SensingMap<T>> {
    if c.field != T::FIELD {
        return Err(Error::InvalidConfig(format!(
            "container holds {} data, requested {}",
            c.field,
            T::FIELD
        )));
    }
    let family: SensingFamily = c.family.parse()?;
    if let Some(encoded) = &c.matrices {
        if encoded.len() != c.m {
            return Err(Error::Decode(format!(
                "container lists m={} but has {} matrices",
                c.m,
                encoded.len()
            )));
        }
        let mats = encoded
            .iter()
            .map(|s| decode_matrix::<T>(s, c.n))
            .collect::<Result<Vec<_>>>()?;
        let map = SensingMap::from_matrices(mats)?;
        return map.with_family(family);
    }
    let config: MapConfig = serde_json::from_value(c.config.clone())?;
    regenerate_map::<T>(family, c.n, c.m, c.seed, &config)
}

fn regenerate_map<T: Field>(
    family: SensingFamily,
    n: usize,
    m: usize,
    seed: u64,
    config: &MapConfig,
) -> Result<SensingMap<T>> {
    match family {
        SensingFamily::Wishart => {
            let params = config.wishart.clone().unwrap_or_default();
            let map = gen_wishart(n, m, seed, &params)?;
            cast_real_map::<T>(map, "wishart")
        }
        SensingFamily::RankOneGaussian => {
            let map = gen_rank_one_gaussian(n, m, seed)?;
            cast_real_map::<T>(map, "rank_one_gaussian")
        }
        SensingFamily::Pauli => {
            let q = config.qubits.ok_or_else(|| {
                Error::InvalidConfig("pauli regeneration requires config.qubits".into())
            })?;
            if (1usize << q) != n {
                return Err(Error::InvalidConfig(format!(
                    "pauli container has n={n} but 2^qubits = {}",
                    1usize << q
                )));
            }
            let params = config.pauli.clone().unwrap_or_default();
            let map = gen_pauli(q, m, seed, &params)?;
            cast_complex_map::<T>(map)
        }
        SensingFamily::Whitened | SensingFamily::Custom => Err(Error::InvalidConfig(format!(
            "{family} maps are not regenerable from a seed; container must embed matrices"
        ))),
    }
}

/// Real-family generators produce `SensingMap<f64>`; promote entrywise
/// when the requested scalar is complex.
fn cast_real_map<T: Field>(map: SensingMap<f64>, tag: &str) -> Result<SensingMap<T>> {
    match T::FIELD {
        ScalarField::Real => {
            // Same scalar type; round-trip through the encoder to avoid a
            // specialization dance. Cheap relative to generation.
            let mats = map
                .matrices()
                .iter()
                .map(|h| decode_matrix::<T>(&encode_matrix(h), h.n()))
                .collect::<Result<Vec<_>>>()?;
            SensingMap::from_matrices(mats)?.with_family(map.family())
        }
        ScalarField::Complex => {
            let mats = map
                .matrices()
                .iter()
                .map(|h| {
                    let src = h.as_matrix();
                    let mut out = DMatrix::<T>::zeros(h.n(), h.n());
                    for i in 0..h.n() {
                        for j in 0..h.n() {
                            out[(i, j)] = T::from_re_im(src[(i, j)], 0.0);
                        }
                    }
                    HermitianMatrix::new(out)
                })
                .collect::<Result<Vec<_>>>()?;
            SensingMap::from_matrices(mats)?.with_family(map.family()).map_err(|_| {
                Error::InvalidConfig(format!("failed to promote {tag} map to complex"))
            })
        }
    }
}

fn cast_complex_map<T: Field>(map: SensingMap<num_complex::Complex64>) -> Result<SensingMap<T>> {
    if T::FIELD != ScalarField::Complex {
        return Err(Error::InvalidConfig(
            "pauli ensembles are complex; load with field=complex".into(),
        ));
    }
    let mats = map
        .matrices()
        .iter()
        .map(|h| decode_matrix::<T>(&encode_matrix(h), h.n()))
        .collect::<Result<Vec<_>>>()?;
    SensingMap::from_matrices(mats)?.with_family(map.family())
}

/// Ground-truth parameters echoed into `config`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TruthConfig {
    pub rank: usize,
    pub normalized: bool,
}

/// Serializes a ground truth; the single matrix is embedded only on request
/// since `(seed, rank, normalized)` regenerate it exactly.
pub fn truth_to_container<T: Field>(
    truth: &GroundTruth<T>,
    seed: u64,
    embed: bool,
) -> Result<JsonContainer> {
    let config = TruthConfig {
        rank: truth.rank,
        normalized: truth.normalized,
    };
    Ok(JsonContainer {
        family: "ground_truth".into(),
        n: truth.matrix.n(),
        m: 1,
        field: T::FIELD,
        seed,
        config: serde_json::to_value(&config)?,
        matrices: embed.then(|| vec![encode_matrix(&truth.matrix)]),
    })
}

pub fn truth_from_container<T: Field>(c: &JsonContainer) -> Result<GroundTruth<T>> {
    if c.family != "ground_truth" {
        return Err(Error::InvalidConfig(format!(
            "expected a ground_truth container, found {}",
            c.family
        )));
    }
    if c.field != T::FIELD {
        return Err(Error::InvalidConfig(format!(
            "container holds {} data, requested {}",
            c.field,
            T::FIELD
        )));
    }
    let config: TruthConfig = serde_json::from_value(c.config.clone())?;
    if let Some(encoded) = &c.matrices {
        let first = encoded
            .first()
            .ok_or_else(|| Error::Decode("ground_truth container with empty matrices".into()))?;
        let matrix = decode_matrix::<T>(first, c.n)?;
        return Ok(GroundTruth {
            matrix,
            rank: config.rank,
            normalized: config.normalized,
        });
    }
    gen_ground_truth::<T>(c.n, config.rank, config.normalized, c.seed)
}

/// Whitened-problem context stored in `config`.
#[derive(Debug, Clone, Serialize, Deserialize)]
struct WhitenedConfig {
    phi: Vec<f64>,
    b: Vec<f64>,
    c: f64,
    source: JsonContainer,
}

/// Serializes a whitened problem: the whitened matrices are re-derivable
/// from the source container plus `(phi, b)`, so only those are stored.
pub fn whitened_to_container<T: Field>(
    problem: &WhitenedProblem<T>,
    source: JsonContainer,
) -> Result<JsonContainer> {
    let config = WhitenedConfig {
        phi: problem.phi().iter().copied().collect(),
        b: problem.b().iter().copied().collect(),
        c: problem.trace_constant(),
        source,
    };
    Ok(JsonContainer {
        family: SensingFamily::Whitened.to_string(),
        n: problem.whitened_map().n(),
        m: problem.whitened_map().m(),
        field: T::FIELD,
        seed: 0,
        config: serde_json::to_value(&config)?,
        matrices: None,
    })
}

pub fn whitened_from_container<T: Field>(c: &JsonContainer) -> Result<WhitenedProblem<T>> {
    if c.family != SensingFamily::Whitened.to_string() {
        return Err(Error::InvalidConfig(format!(
            "expected a whitened container, found {}",
            c.family
        )));
    }
    let config: WhitenedConfig = serde_json::from_value(c.config.clone())?;
    let source = map_from_container::<T>(&config.source)?;
    let phi = DVector::from_vec(config.phi.clone());
    let b = DVector::from_vec(config.b.clone());
    let problem = whiten(source, b, phi)?;
    let c_gap = (problem.trace_constant() - config.c).abs();
    if c_gap > 1e-8 * (1.0 + config.c.abs()) {
        return Err(Error::Decode(format!(
            "re-derived trace constant differs from stored value by {c_gap:.3e}"
        )));
    }
    Ok(problem)
}

/// Flat, JSON-friendly view of a solver run (matrix embedded on request).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SolverRunRecord {
    pub solver: String,
    pub n: usize,
    pub iters: usize,
    pub converged: bool,
    pub resid_final: f64,
    pub objective_value: f64,
    pub wall_ms: f64,
    pub descent_violations: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dist_full: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dist_rank1: Option<f64>,
    pub field: ScalarField,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x_hat: Option<String>,
}

impl SolverRunRecord {
    pub fn from_report<T: Field>(report: &SolverReport<T>, embed_matrix: bool) -> Self {
        SolverRunRecord {
            solver: report.solver.to_string(),
            n: report.x_hat.n(),
            iters: report.iters,
            converged: report.converged,
            resid_final: report.final_resid(),
            objective_value: report.objective_value,
            wall_ms: report.wall_time.as_secs_f64() * 1e3,
            descent_violations: report.descent_violations,
            dist_full: report.dist_full,
            dist_rank1: report.dist_rank,
            field: T::FIELD,
            x_hat: embed_matrix.then(|| encode_matrix(&report.x_hat)),
        }
    }

    pub fn decode_x_hat<T: Field>(&self) -> Result<Option<HermitianMatrix<T>>> {
        match &self.x_hat {
            Some(s) => Ok(Some(decode_matrix::<T>(s, self.n)?)),
            None => Ok(None),
        }
    }
}

/// SHA-256 of a byte slice, lowercase hex. Used for manifest artifact hashes.
pub fn sha256_hex(bytes: &[u8]) -> String {
    let mut hasher = Sha256::new();
    hasher.update(bytes);
    let digest = hasher.finalize();
    let mut out = String::with_capacity(64);
    for byte in digest {
        out.push_str(&format!("{byte:02x}"));
    }
    out
}

/// SHA-256 of a file's contents.
pub fn sha256_file(path: &Path) -> Result<String> {
    Ok(sha256_hex(&std::fs::read(path)?))
}
