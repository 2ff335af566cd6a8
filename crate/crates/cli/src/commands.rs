use num_complex::Complex64;
use qmemory::davies::{
    build_jump_set, check_detailed_balance, check_locality, commutant_dimension, default_options as dense_options,
    ergodicity_inputs, propagate_observable_at, DaviesGenerator, DetailedBalanceReport, Observable,
};
use qmemory::ed::{diagonalize, MAX_ED_QUBITS};
use qmemory::kmc::{engine_on, lifetime_scan, relevant_sectors, run_autocorrelation, ScanConfig, ScanMethod, ScanRow};
use qmemory::model::{gibbs_expectation, ground_expectation, hamiltonian_energy, ModelKind, StabilizerKind, StabilizerModel};
use qmemory::pauli::{Pauli, PauliOp, PauliPolynomial};
use qmemory::reduced::{
    autocorrelation, build_reduced_generator, build_reduced_generator_on, default_options, fit_lifetime,
    function_polynomial, half_time_norm, propagate_reduced, stabilizer_product, FitQuality, LifetimeFit, SyndromeSpace,
};
use serde::Serialize;
use serde_json::json;

use crate::config::{Method, Purpose, RunConfig};
use crate::error::CliError;
use crate::output::{fmt_opt, ArtifactWriter};

/// Residual tolerance for every `check` property.
pub const CHECK_TOL: f64 = 1e-8;
pub const FACTORIZATION_TIMES: [f64; 3] = [0.1, 1.0, 10.0];
pub const CHAIN_TIMES: [f64; 5] = [0.05, 0.3, 1.0, 4.0, 20.0];
const LOCALITY_POWER: usize = 6;
const N_RANDOM: usize = 40;

#[derive(Clone, Debug, Serialize)]
pub struct CheckItem {
    pub name: String,
    pub value: f64,
    pub tolerance: f64,
    pub passed: bool,
}

impl CheckItem {
    fn below(name: impl Into<String>, value: f64, tolerance: f64) -> Self {
        CheckItem {
            name: name.into(),
            value,
            tolerance,
            passed: value.is_finite() && value <= tolerance,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Ergodicity {
    pub commutant_dimension: u64,
    /// Only multiples of the identity commute with `H` and every coupling.
    pub ergodic: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct LocalitySummary {
    pub power: usize,
    pub n_operators: usize,
    pub all_contained: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct FactorizationEntry {
    pub logical: String,
    pub dressing: Vec<usize>,
    pub times: Vec<f64>,
    /// `max_t ‖e^{tL}(Q F) − Q e^{tL̃}(F)‖` (normalized Hilbert–Schmidt).
    pub max_distance: f64,
    /// `max_t |⟨Q̃(t), Q̃⟩_β − ‖Q̃(t/2)‖²_β|`.
    pub chain_residual: f64,
    pub reduced_detailed_balance: f64,
}

/// One quantity computed by exact diagonalization next to the
/// implementation's value and the value the source text labels it with.
#[derive(Clone, Debug, Serialize)]
pub struct Adjudicated {
    pub quantity: String,
    pub exact_diagonalization: f64,
    pub implementation: f64,
    pub quoted_label: String,
    pub quoted_value: f64,
    pub consistent: bool,
    pub matches_quoted_label: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct CheckReport {
    pub model: String,
    pub n_qubits: usize,
    pub beta: f64,
    pub coupling: String,
    pub detailed_balance: DetailedBalanceReport,
    pub ergodicity: Ergodicity,
    pub locality: LocalitySummary,
    pub factorization: Vec<FactorizationEntry>,
    pub adjudication: Vec<Adjudicated>,
    pub checks: Vec<CheckItem>,
    pub passed: bool,
}

fn adjudicated(quantity: &str, ed: f64, implementation: f64, label: &str, label_value: f64, tol: f64) -> Adjudicated {
    Adjudicated {
        quantity: quantity.into(),
        exact_diagonalization: ed,
        implementation,
        quoted_label: label.into(),
        quoted_value: label_value,
        consistent: (ed - implementation).abs() <= tol,
        matches_quoted_label: (ed - label_value).abs() <= tol,
    }
}

/// Spectrum step from syndrome enumeration, independent of any matrix.
fn syndrome_energy_step(m: &StabilizerModel) -> Result<f64, CliError> {
    let space = SyndromeSpace::full(m)?;
    let mut levels: Vec<f64> = Vec::new();
    for idx in 0..space.len() {
        let e = hamiltonian_energy(m, &space.decode(idx))?;
        if !levels.iter().any(|l| (l - e).abs() < 1e-9) {
            levels.push(e);
        }
    }
    levels.sort_by(f64::total_cmp);
    Ok(levels.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min))
}

/// The stabilizer whose mean the source text calls `⟨X_s⟩`: a star on the
/// torus, a bond on the ring.
fn reference_stabilizer(m: &StabilizerModel) -> (usize, &PauliOp) {
    let kind = match m.kind() {
        ModelKind::KitaevTorus => StabilizerKind::Star,
        ModelKind::IsingRing => StabilizerKind::Bond,
    };
    let i = m.sector(kind).expect("model has the sector").stabilizers[0];
    (i, &m.stabilizers()[i].op)
}

fn adjudication(m: &StabilizerModel, cfg: &RunConfig) -> Result<Vec<Adjudicated>, CliError> {
    let ed = diagonalize(m)?;
    let jumps = build_jump_set(m, cfg.coupling())?;
    let sigma = jumps.channels()[0].coupling_op(m);
    let bohr = ed.bohr_frequencies(&sigma)?;
    let ed_omega = bohr.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let omega = jumps.omega_star().unwrap_or(f64::NAN);
    let ed_step = ed.energy_step().unwrap_or(f64::NAN);
    let step = syndrome_energy_step(m)?;
    let (i, stab) = reference_stabilizer(m);
    let ed_mean = ed.thermal_expectation(stab, cfg.beta)?.re;
    let mean = gibbs_expectation(m, stab, cfg.beta)?;
    Ok(vec![
        adjudicated("bohr_frequency_omega_star", ed_omega, omega, "±2", 2.0, 1e-9),
        adjudicated("energy_spectrum_step", ed_step, step, "(2n−N)", 2.0, 1e-9),
        adjudicated(
            &format!("stabilizer_mean_S{i}"),
            ed_mean,
            mean,
            "tanh(β/2)",
            (cfg.beta / 2.0).tanh(),
            1e-10,
        ),
    ])
}

fn encoded(q: &PauliOp, m: &StabilizerModel, space: &SyndromeSpace, f: &[f64]) -> Result<Observable, CliError> {
    let poly = PauliPolynomial::from_op(q).mul(&function_polynomial(m, space, f)?)?;
    Ok(Observable::from_polynomial(&poly)?)
}

fn factorization(
    m: &StabilizerModel,
    cfg: &RunConfig,
    gen: &DaviesGenerator,
    logical: &str,
) -> Result<FactorizationEntry, CliError> {
    let h = cfg.spectral()?;
    let jumps = build_jump_set(m, cfg.coupling())?;
    let q = m.logical(logical).expect("listed logical").clone();
    let red = build_reduced_generator(m, &jumps, &h, &q)?;
    let f = stabilizer_product(m, red.space(), &cfg.dressing)?;
    let x0 = encoded(&q, m, red.space(), &f)?;
    let full = propagate_observable_at(gen, &x0, &FACTORIZATION_TIMES, &dense_options())?;
    let mut max_distance: f64 = 0.0;
    for (t, xt) in FACTORIZATION_TIMES.iter().zip(&full) {
        let ft = propagate_reduced(&red, &f, *t, &default_options())?;
        max_distance = max_distance.max(xt.distance(&encoded(&q, m, red.space(), &ft)?));
    }
    let c = autocorrelation(&red, m, &f, &CHAIN_TIMES, &default_options())?;
    let mut chain_residual: f64 = 0.0;
    for (t, ct) in CHAIN_TIMES.iter().zip(&c) {
        let n = half_time_norm(&red, m, &f, *t, &default_options())?;
        chain_residual = chain_residual.max((ct - n).abs());
    }
    Ok(FactorizationEntry {
        logical: logical.into(),
        dressing: cfg.dressing.clone(),
        times: FACTORIZATION_TIMES.to_vec(),
        max_distance,
        chain_residual,
        reduced_detailed_balance: red.detailed_balance_residual(m)?,
    })
}

pub fn run_check(cfg: &RunConfig) -> Result<CheckReport, CliError> {
    cfg.validate(Purpose::Check)?;
    let m = cfg.model()?;
    let h = cfg.spectral()?;
    let jumps = build_jump_set(&m, cfg.coupling())?;
    let gen = DaviesGenerator::new(&m, &jumps, &h)?;
    let detailed_balance = check_detailed_balance(&gen, N_RANDOM, cfg.seed)?;
    let dim = commutant_dimension(&ergodicity_inputs(&m, &jumps))?;

    let mut contained = true;
    let mut n_ops = 0;
    for site in 0..m.n_qubits() {
        for p in [Pauli::X, Pauli::Y, Pauli::Z] {
            let x = PauliOp::single(m.n_qubits(), site, p);
            contained &= check_locality(&m, &x, LOCALITY_POWER)?.contained;
            n_ops += 1;
        }
    }

    let mut factor = Vec::new();
    for l in m.logicals() {
        factor.push(factorization(&m, cfg, &gen, &l.name)?);
    }
    let adjudication = adjudication(&m, cfg)?;

    let mut checks = vec![
        CheckItem::below("unitality", detailed_balance.unitality, 0.0),
        CheckItem::below("gibbs_stationarity", detailed_balance.stationarity, CHECK_TOL),
        CheckItem::below("derivation_commutes_with_dissipator", detailed_balance.derivation_commutator, CHECK_TOL),
        CheckItem::below("dissipator_self_adjointness", detailed_balance.self_adjoint_asymmetry, CHECK_TOL),
        CheckItem::below("locality_violations", if contained { 0.0 } else { 1.0 }, 0.0),
    ];
    for f in &factor {
        checks.push(CheckItem::below(format!("factorization_{}", f.logical), f.max_distance, CHECK_TOL));
        checks.push(CheckItem::below(format!("autocorrelation_chain_{}", f.logical), f.chain_residual, CHECK_TOL));
        checks.push(CheckItem::below(
            format!("reduced_detailed_balance_{}", f.logical),
            f.reduced_detailed_balance,
            CHECK_TOL,
        ));
    }
    for a in &adjudication {
        checks.push(CheckItem::below(
            format!("oracle_consistency_{}", a.quantity),
            (a.exact_diagonalization - a.implementation).abs(),
            CHECK_TOL,
        ));
    }
    let passed = checks.iter().all(|c| c.passed);
    Ok(CheckReport {
        model: m.kind().name().into(),
        n_qubits: m.n_qubits(),
        beta: cfg.beta,
        coupling: cfg.coupling().name().into(),
        detailed_balance,
        ergodicity: Ergodicity {
            commutant_dimension: dim,
            ergodic: dim == 1,
        },
        locality: LocalitySummary {
            power: LOCALITY_POWER,
            n_operators: n_ops,
            all_contained: contained,
        },
        factorization: factor,
        adjudication,
        checks,
        passed,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct GibbsRow {
    pub operator: String,
    pub pauli: String,
    pub ground: f64,
    pub gibbs: f64,
    /// Dense reference, for lattices small enough to diagonalize.
    pub exact_diagonalization: Option<f64>,
}

pub fn run_gibbs(cfg: &RunConfig) -> Result<Vec<GibbsRow>, CliError> {
    cfg.validate(Purpose::Gibbs)?;
    let m = cfg.model()?;
    let mut ops: Vec<(String, PauliOp)> = Vec::new();
    for (i, s) in m.stabilizers().iter().enumerate() {
        ops.push((format!("S{i}:{}", s.kind.name()), s.op.clone()));
    }
    for sector in m.sectors() {
        if let [a, b, ..] = sector.stabilizers[..] {
            let p = m.stabilizers()[a].op.multiply(&m.stabilizers()[b].op)?;
            ops.push((format!("S{a}*S{b}"), p));
        }
    }
    for l in m.logicals() {
        if l.op.is_hermitian() {
            ops.push((format!("logical:{}", l.name), l.op.clone()));
        }
    }
    let ed = if m.n_qubits() <= MAX_ED_QUBITS { Some(diagonalize(&m)?) } else { None };
    ops.into_iter()
        .map(|(name, op)| {
            Ok(GibbsRow {
                pauli: op.to_string(),
                ground: ground_expectation(&m, &op)?.value,
                gibbs: gibbs_expectation(&m, &op, cfg.beta)?,
                exact_diagonalization: match &ed {
                    Some(e) => Some(e.thermal_expectation(&op, cfg.beta)?.re),
                    None => None,
                },
                operator: name,
            })
        })
        .collect()
}

#[derive(Clone, Debug, Serialize)]
pub struct AutocorrResult {
    pub method: &'static str,
    pub logical: String,
    pub dressing: Vec<usize>,
    pub times: Vec<f64>,
    pub values: Vec<f64>,
    pub stderr: Option<Vec<f64>>,
    pub n_traj: Option<usize>,
    pub seed: Option<u64>,
    pub fit: LifetimeFit,
}

pub fn run_autocorr(cfg: &RunConfig) -> Result<AutocorrResult, CliError> {
    cfg.validate(Purpose::Autocorr)?;
    let m = cfg.model()?;
    let h = cfg.spectral()?;
    let jumps = build_jump_set(&m, cfg.coupling())?;
    let q = cfg.logical_op(&m)?;
    let times = cfg.time_points()?;
    let kinds = relevant_sectors(&m, cfg.coupling(), &h, &q, &cfg.dressing)?;
    let (values, stderr, n_traj, seed) = match cfg.method {
        Method::ExactFull => {
            let red = build_reduced_generator(&m, &jumps, &h, &q)?;
            let f = stabilizer_product(&m, red.space(), &cfg.dressing)?;
            let gen = DaviesGenerator::new(&m, &jumps, &h)?;
            let x0 = encoded(&q, &m, red.space(), &f)?;
            let xs = propagate_observable_at(&gen, &x0, &times, &dense_options())?;
            let values = xs.iter().map(|xt| gen.inner(&x0, xt)).map(|c: Complex64| c.re).collect();
            (values, None, None, None)
        }
        Method::ExactReduced => {
            let red = build_reduced_generator_on(&m, &jumps, &h, &q, &kinds)?;
            let f = stabilizer_product(&m, red.space(), &cfg.dressing)?;
            (autocorrelation(&red, &m, &f, &times, &default_options())?, None, None, None)
        }
        Method::Kmc => {
            let engine = engine_on(&m, cfg.coupling(), &h, &q, &kinds)?;
            let est = run_autocorrelation(&engine, &cfg.dressing, &times, cfg.n_traj, cfg.seed)?;
            (est.mean, Some(est.stderr), Some(cfg.n_traj), Some(cfg.seed))
        }
        Method::Auto => unreachable!("rejected by validate"),
    };
    Ok(AutocorrResult {
        method: cfg.method.name(),
        logical: cfg.logical_name(&m),
        dressing: cfg.dressing.clone(),
        fit: fit_lifetime(&times, &values),
        times,
        values,
        stderr,
        n_traj,
        seed,
    })
}

pub fn run_scan(cfg: &RunConfig) -> Result<Vec<ScanRow>, CliError> {
    cfg.validate(Purpose::LifetimeScan)?;
    let sizes = if cfg.sizes.is_empty() { vec![cfg.model.size] } else { cfg.sizes.clone() };
    let method = match cfg.method {
        Method::Kmc => ScanMethod::Kmc,
        Method::Auto => ScanMethod::Auto,
        Method::ExactFull | Method::ExactReduced => ScanMethod::ExactReduced,
    };
    let m = cfg.model()?;
    Ok(lifetime_scan(&ScanConfig {
        kind: cfg.model.kind,
        sizes,
        coupling: cfg.coupling(),
        spectral: cfg.spectral()?,
        logical: cfg.logical_name(&m),
        times: cfg.time_points()?,
        n_traj: cfg.n_traj,
        seed: cfg.seed,
        method,
        max_exact_bits: cfg.max_exact_bits,
    })?)
}

/// Bath summary for manifests: `ĥ` at every Bohr frequency of the jump set.
fn bath_summary(cfg: &RunConfig) -> Result<serde_json::Value, CliError> {
    let m = cfg.model()?;
    let h = cfg.spectral()?;
    let jumps = build_jump_set(&m, cfg.coupling())?;
    let rates: Vec<serde_json::Value> = jumps
        .frequencies()
        .into_iter()
        .map(|w| Ok(json!({"omega": w, "rate": h.rate(w)?})))
        .collect::<Result<_, CliError>>()?;
    Ok(json!({
        "beta": cfg.beta,
        "omega_star": jumps.omega_star(),
        "rates": rates,
    }))
}

fn model_summary(cfg: &RunConfig) -> Result<serde_json::Value, CliError> {
    let m = cfg.model()?;
    Ok(json!({
        "kind": m.kind(),
        "size": m.size(),
        "n_qubits": m.n_qubits(),
        "n_stabilizers": m.stabilizers().len(),
        "logicals": m.logicals().iter().map(|l| l.name.clone()).collect::<Vec<_>>(),
    }))
}

/// What a finished command reports back to the caller.
#[derive(Clone, Debug)]
pub struct Outcome {
    pub passed: bool,
    pub summary: String,
    pub manifest: std::path::PathBuf,
}

fn quality_name(q: FitQuality) -> String {
    serde_json::to_value(q).ok().and_then(|v| v.as_str().map(str::to_string)).unwrap_or_default()
}

/// Validate, run, and write artifacts plus a manifest.
pub fn execute(purpose: Purpose, cfg: RunConfig) -> Result<Outcome, CliError> {
    cfg.validate(purpose)?;
    let cfg = cfg.resolve()?;
    let mut out = ArtifactWriter::new(purpose.name(), &cfg)?;
    let (passed, summary) = match purpose {
        Purpose::Check => {
            let report = run_check(&cfg)?;
            out.json("check.json", &report)?;
            let failed: Vec<&str> = report.checks.iter().filter(|c| !c.passed).map(|c| c.name.as_str()).collect();
            let mut lines = Vec::new();
            for c in &report.checks {
                lines.push(format!(
                    "{:<48} {:>12.3e} (tol {:.0e}) {}",
                    c.name,
                    c.value,
                    c.tolerance,
                    if c.passed { "ok" } else { "FAILED" }
                ));
            }
            lines.push(format!(
                "commutant dimension {} ({})",
                report.ergodicity.commutant_dimension,
                if report.ergodicity.ergodic { "ergodic" } else { "not ergodic" }
            ));
            for a in &report.adjudication {
                lines.push(format!(
                    "{}: ED {} implementation {} quoted label {} = {}",
                    a.quantity, a.exact_diagonalization, a.implementation, a.quoted_label, a.quoted_value
                ));
            }
            if !failed.is_empty() {
                lines.push(format!("failed: {}", failed.join(", ")));
            }
            (report.passed, lines.join("\n"))
        }
        Purpose::Gibbs => {
            let rows = run_gibbs(&cfg)?;
            let table: Vec<Vec<String>> = rows
                .iter()
                .map(|r| {
                    vec![
                        r.operator.clone(),
                        r.pauli.clone(),
                        format!("{}", r.ground),
                        format!("{}", r.gibbs),
                        fmt_opt(r.exact_diagonalization),
                    ]
                })
                .collect();
            out.csv("gibbs.csv", &["operator", "pauli", "ground", "gibbs", "exact_diagonalization"], &table)?;
            let worst = rows
                .iter()
                .filter_map(|r| r.exact_diagonalization.map(|e| (e - r.gibbs).abs()))
                .fold(0.0, f64::max);
            (true, format!("{} operators; max |gibbs − ED| = {worst:.2e}", rows.len()))
        }
        Purpose::Autocorr => {
            let r = run_autocorr(&cfg)?;
            let rows: Vec<Vec<String>> = (0..r.times.len())
                .map(|i| {
                    vec![
                        format!("{}", r.times[i]),
                        format!("{}", r.values[i]),
                        fmt_opt(r.stderr.as_ref().map(|s| s[i])),
                        r.n_traj.map(|n| n.to_string()).unwrap_or_default(),
                    ]
                })
                .collect();
            out.csv("autocorrelation.csv", &["t", "value", "stderr", "n_traj"], &rows)?;
            out.json("autocorrelation.json", &r)?;
            (
                true,
                format!(
                    "{} on {} points: tau = {} ({}, window {:?}, residual {})",
                    r.method,
                    r.times.len(),
                    r.fit.tau,
                    quality_name(r.fit.quality),
                    r.fit.window,
                    r.fit.residual
                ),
            )
        }
        Purpose::LifetimeScan => {
            let rows = run_scan(&cfg)?;
            let table: Vec<Vec<String>> = rows
                .iter()
                .map(|r| {
                    vec![
                        r.size.to_string(),
                        r.n_qubits.to_string(),
                        r.method.to_string(),
                        format!("{}", r.tau),
                        format!("{}", r.ci_low),
                        format!("{}", r.ci_high),
                        quality_name(r.quality),
                        format!("{}", r.window[0]),
                        format!("{}", r.window[1]),
                        r.n_points.to_string(),
                        format!("{}", r.residual),
                    ]
                })
                .collect();
            out.csv(
                "lifetimes.csv",
                &[
                    "size", "n_qubits", "method", "tau", "ci_low", "ci_high", "quality", "window_start",
                    "window_end", "n_points", "residual",
                ],
                &table,
            )?;
            let summary = rows
                .iter()
                .map(|r| format!("size {}: tau = {} [{}, {}] ({})", r.size, r.tau, r.ci_low, r.ci_high, quality_name(r.quality)))
                .collect::<Vec<_>>()
                .join("\n");
            (true, summary)
        }
    };
    let manifest = out.finish(json!({
        "model": model_summary(&cfg)?,
        "bath": bath_summary(&cfg)?,
        "passed": passed,
    }))?;
    Ok(Outcome {
        passed,
        summary,
        manifest,
    })
}
