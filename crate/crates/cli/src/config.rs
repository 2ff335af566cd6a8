//! Run configuration: one JSON document, with command-line flags layered on
//! top before it is parsed.

use std::path::PathBuf;

use qmemory::davies::{build_jump_set, Coupling, SpectralFunction, MAX_DENSE_QUBITS};
use qmemory::kmc::{relevant_sectors, MAX_SCAN_RING, MAX_SCAN_TORUS, MIN_TRAJECTORIES};
use qmemory::model::{build_ising_ring, build_kitaev_torus, ModelKind, StabilizerModel};
use qmemory::pauli::PauliOp;
use qmemory::reduced::{geometric_grid, MAX_SYNDROME_BITS};
use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::error::CliError;

pub const SCHEMA: u32 = 1;

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    ExactFull,
    ExactReduced,
    Kmc,
    /// lifetime-scan only: exact-reduced up to `max_exact_bits`, kmc beyond.
    Auto,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::ExactFull => "exact-full",
            Method::ExactReduced => "exact-reduced",
            Method::Kmc => "kmc",
            Method::Auto => "auto",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSpec {
    pub kind: ModelKind,
    pub size: usize,
}

/// Either the uniform rule `ĥ(ω>0) = γ`, `ĥ(0) = γ₀`, or an explicit table
/// of `[ω, ĥ(ω)]` pairs completed by the thermal ratio.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BathSpec {
    #[serde(default = "one")]
    pub gamma: f64,
    #[serde(default = "one")]
    pub gamma_zero: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub table: Option<Vec<[f64; 2]>>,
}

fn one() -> f64 {
    1.0
}

impl Default for BathSpec {
    fn default() -> Self {
        BathSpec {
            gamma: 1.0,
            gamma_zero: 1.0,
            table: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeGrid {
    /// Explicit time points; overrides the geometric grid when present.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub points: Option<Vec<f64>>,
    #[serde(default = "default_t_min")]
    pub t_min: f64,
    #[serde(default = "default_t_max")]
    pub t_max: f64,
    #[serde(default = "default_per_decade")]
    pub per_decade: usize,
}

fn default_t_min() -> f64 {
    0.01
}

fn default_t_max() -> f64 {
    100.0
}

fn default_per_decade() -> usize {
    10
}

impl Default for TimeGrid {
    fn default() -> Self {
        TimeGrid {
            points: None,
            t_min: default_t_min(),
            t_max: default_t_max(),
            per_decade: default_per_decade(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default = "schema")]
    pub schema: u32,
    pub model: ModelSpec,
    pub beta: f64,
    #[serde(default)]
    pub bath: BathSpec,
    /// Defaults to `x-only` on the ring and `both` on the torus.
    #[serde(default)]
    pub coupling: Option<Coupling>,
    /// Logical name; defaults to the model's first logical.
    #[serde(default)]
    pub logical: Option<String>,
    /// Stabilizer indices whose product is the syndrome function `F`.
    #[serde(default)]
    pub dressing: Vec<usize>,
    #[serde(default)]
    pub times: TimeGrid,
    #[serde(default = "default_method")]
    pub method: Method,
    #[serde(default = "default_n_traj")]
    pub n_traj: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub threads: Option<usize>,
    /// Lattice sizes for `lifetime-scan`; defaults to `[model.size]`.
    #[serde(default)]
    pub sizes: Vec<usize>,
    /// Largest syndrome space propagated exactly before a scan falls back to KMC.
    #[serde(default = "default_max_exact_bits")]
    pub max_exact_bits: usize,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
}

fn schema() -> u32 {
    SCHEMA
}

fn default_method() -> Method {
    Method::ExactReduced
}

fn default_n_traj() -> usize {
    10_000
}

fn default_max_exact_bits() -> usize {
    20
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("qmemory-out")
}

/// Set `path` (dot-separated) inside a JSON object, creating objects on the way.
pub fn set_path(doc: &mut Value, path: &str, value: Value) {
    let mut cur = doc;
    let mut parts = path.split('.').peekable();
    while let Some(key) = parts.next() {
        if !cur.is_object() {
            *cur = Value::Object(Default::default());
        }
        let obj = cur.as_object_mut().expect("object");
        if parts.peek().is_none() {
            obj.insert(key.to_string(), value);
            return;
        }
        cur = obj.entry(key.to_string()).or_insert_with(|| Value::Object(Default::default()));
    }
}

pub fn parse_model_kind(s: &str) -> Result<ModelKind, String> {
    match s.to_ascii_lowercase().as_str() {
        "ising" | "ising-ring" | "ising_ring" | "ring" => Ok(ModelKind::IsingRing),
        "kitaev" | "kitaev-torus" | "kitaev_torus" | "toric" | "torus" => Ok(ModelKind::KitaevTorus),
        other => Err(format!("unknown model {other:?}; expected ising or kitaev")),
    }
}

fn invalid(field: &str, message: impl Into<String>) -> CliError {
    CliError::Config {
        field: field.to_string(),
        message: message.into(),
    }
}

/// Which command a configuration is validated for; capacity limits differ.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum Purpose {
    Check,
    Gibbs,
    Autocorr,
    LifetimeScan,
}

impl Purpose {
    pub fn name(self) -> &'static str {
        match self {
            Purpose::Check => "check",
            Purpose::Gibbs => "gibbs",
            Purpose::Autocorr => "autocorr",
            Purpose::LifetimeScan => "lifetime-scan",
        }
    }
}

pub fn build_model(kind: ModelKind, size: usize) -> Result<StabilizerModel, CliError> {
    match kind {
        ModelKind::IsingRing => build_ising_ring(size),
        ModelKind::KitaevTorus => build_kitaev_torus(size),
    }
    .map_err(|e| invalid("model.size", e.to_string()))
}

impl RunConfig {
    pub fn from_value(doc: Value) -> Result<Self, CliError> {
        serde_json::from_value(doc).map_err(|e| invalid("config", e.to_string()))
    }

    pub fn coupling(&self) -> Coupling {
        self.coupling.unwrap_or(match self.model.kind {
            ModelKind::IsingRing => Coupling::XOnly,
            ModelKind::KitaevTorus => Coupling::Both,
        })
    }

    pub fn spectral(&self) -> Result<SpectralFunction, CliError> {
        match &self.bath.table {
            None => SpectralFunction::thermal(self.beta, self.bath.gamma, self.bath.gamma_zero),
            Some(rows) => {
                let entries: Vec<(f64, f64)> = rows.iter().map(|r| (r[0], r[1])).collect();
                SpectralFunction::from_table(self.beta, self.bath.gamma_zero, &entries)
            }
        }
        .map_err(|e| invalid("bath", e.to_string()))
    }

    pub fn time_points(&self) -> Result<Vec<f64>, CliError> {
        let points = match &self.times.points {
            Some(p) => p.clone(),
            None => geometric_grid(self.times.t_min, self.times.t_max, self.times.per_decade)
                .map_err(|e| invalid("times", e.to_string()))?,
        };
        if points.is_empty() {
            return Err(invalid("times", "time grid is empty"));
        }
        if let Some(t) = points.iter().find(|t| !(**t >= 0.0) || !t.is_finite()) {
            return Err(invalid("times", format!("time {t} is not finite and non-negative")));
        }
        Ok(points)
    }

    pub fn model(&self) -> Result<StabilizerModel, CliError> {
        build_model(self.model.kind, self.model.size)
    }

    /// The configured logical, else the first `Z`-type one (the memory that
    /// decays under `σˣ` coupling).
    pub fn logical_name(&self, m: &StabilizerModel) -> String {
        self.logical.clone().unwrap_or_else(|| {
            let ls = m.logicals();
            ls.iter()
                .find(|l| l.name.starts_with('Z'))
                .unwrap_or(&ls[0])
                .name
                .clone()
        })
    }

    pub fn logical_op(&self, m: &StabilizerModel) -> Result<PauliOp, CliError> {
        let name = self.logical_name(m);
        m.logical(&name).cloned().ok_or_else(|| {
            let known: Vec<&str> = m.logicals().iter().map(|l| l.name.as_str()).collect();
            invalid("logical", format!("{name:?} is not a logical of this model; known: {known:?}"))
        })
    }

    /// Fill every defaulted field so that the document fully determines the run.
    pub fn resolve(mut self) -> Result<Self, CliError> {
        let m = self.model()?;
        self.coupling = Some(self.coupling());
        self.logical = Some(self.logical_name(&m));
        self.times.points = Some(self.time_points()?);
        if self.sizes.is_empty() {
            self.sizes = vec![self.model.size];
        }
        Ok(self)
    }

    /// Reject anything that would fail at run time, naming the offending field.
    pub fn validate(&self, purpose: Purpose) -> Result<(), CliError> {
        if self.schema != SCHEMA {
            return Err(invalid("schema", format!("unsupported schema {}, expected {SCHEMA}", self.schema)));
        }
        if !(self.beta >= 0.0) || !self.beta.is_finite() {
            return Err(invalid("beta", format!("must be finite and non-negative, got {}", self.beta)));
        }
        if matches!(purpose, Purpose::Check | Purpose::Gibbs) && self.beta == 0.0 {
            return Err(invalid("beta", format!("{} needs beta > 0", purpose.name())));
        }
        if self.threads == Some(0) {
            return Err(invalid("threads", "must be at least 1"));
        }
        let m = self.model()?;
        let h = self.spectral()?;
        build_jump_set(&m, self.coupling()).map_err(|e| invalid("coupling", e.to_string()))?;
        let q = self.logical_op(&m)?;
        if let Some(&i) = self.dressing.iter().find(|&&i| i >= m.stabilizers().len()) {
            return Err(invalid(
                "dressing",
                format!("stabilizer index {i} out of range (model has {})", m.stabilizers().len()),
            ));
        }
        if matches!(purpose, Purpose::Autocorr | Purpose::LifetimeScan) {
            self.time_points()?;
        }
        match purpose {
            Purpose::Check => {
                if m.n_qubits() > MAX_DENSE_QUBITS {
                    return Err(invalid(
                        "model.size",
                        format!(
                            "check builds the dense generator, which supports at most {MAX_DENSE_QUBITS} qubits \
                             (got {}); use autocorr with method exact-reduced or kmc for larger lattices",
                            m.n_qubits()
                        ),
                    ));
                }
            }
            Purpose::Gibbs => {}
            Purpose::Autocorr => match self.method {
                Method::ExactFull => {
                    if m.n_qubits() > MAX_DENSE_QUBITS {
                        return Err(invalid(
                            "method",
                            format!(
                                "exact-full supports at most {MAX_DENSE_QUBITS} qubits (got {}); \
                                 use method exact-reduced",
                                m.n_qubits()
                            ),
                        ));
                    }
                }
                Method::ExactReduced => {
                    let bits = self.relevant_bits(&m, &h, &q, &self.dressing)?;
                    if bits > MAX_SYNDROME_BITS {
                        return Err(invalid(
                            "method",
                            format!(
                                "exact-reduced needs a {bits}-bit syndrome space, more than the \
                                 supported {MAX_SYNDROME_BITS}; use method kmc"
                            ),
                        ));
                    }
                }
                Method::Kmc => self.check_n_traj()?,
                Method::Auto => {
                    return Err(invalid("method", "auto is only available for lifetime-scan"));
                }
            },
            Purpose::LifetimeScan => {
                let cap = match self.model.kind {
                    ModelKind::IsingRing => MAX_SCAN_RING,
                    ModelKind::KitaevTorus => MAX_SCAN_TORUS,
                };
                for &size in self.sizes.iter().chain(std::iter::once(&self.model.size)) {
                    build_model(self.model.kind, size).map_err(|e| match e {
                        CliError::Config { message, .. } => invalid("sizes", message),
                        other => other,
                    })?;
                    if size > cap {
                        return Err(invalid("sizes", format!("size {size} exceeds the scan cap {cap}")));
                    }
                }
                match self.method {
                    Method::ExactFull => {
                        return Err(invalid(
                            "method",
                            "lifetime-scan does not propagate the full generator; use exact-reduced or kmc",
                        ))
                    }
                    Method::Kmc => self.check_n_traj()?,
                    Method::ExactReduced => {
                        for &size in &self.sizes {
                            let ms = build_model(self.model.kind, size)?;
                            let qs = self.logical_op(&ms)?;
                            let bits = self.relevant_bits(&ms, &h, &qs, &[])?;
                            if bits > MAX_SYNDROME_BITS {
                                return Err(invalid(
                                    "method",
                                    format!(
                                        "size {size} needs a {bits}-bit syndrome space, more than the \
                                         supported {MAX_SYNDROME_BITS}; use method auto or kmc"
                                    ),
                                ));
                            }
                        }
                    }
                    Method::Auto => {
                        self.check_n_traj()?;
                        if self.max_exact_bits > MAX_SYNDROME_BITS {
                            return Err(invalid(
                                "max_exact_bits",
                                format!("at most {MAX_SYNDROME_BITS}, got {}", self.max_exact_bits),
                            ));
                        }
                    }
                }
                if !self.dressing.is_empty() {
                    return Err(invalid("dressing", "lifetime-scan uses the bare logical; leave dressing empty"));
                }
            }
        }
        Ok(())
    }

    /// Syndrome bits of the sectors that matter for `q` dressed by `dressing`.
    fn relevant_bits(
        &self,
        m: &StabilizerModel,
        h: &SpectralFunction,
        q: &PauliOp,
        dressing: &[usize],
    ) -> Result<usize, CliError> {
        let kinds =
            relevant_sectors(m, self.coupling(), h, q, dressing).map_err(|e| invalid("logical", e.to_string()))?;
        Ok(m.sectors().iter().filter(|s| kinds.contains(&s.kind)).map(|s| s.len() - 1).sum())
    }

    fn check_n_traj(&self) -> Result<(), CliError> {
        if self.n_traj < MIN_TRAJECTORIES {
            return Err(invalid(
                "n_traj",
                format!("at least {MIN_TRAJECTORIES} trajectories are required, got {}", self.n_traj),
            ));
        }
        Ok(())
    }

    /// Hex SHA-256 of the canonical JSON serialization.
    pub fn hash(&self) -> String {
        let bytes = serde_json::to_vec(self).expect("config serializes");
        hex::encode(Sha256::digest(&bytes))
    }
}
