use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::engine::{KmcEngine, SectorSampler};
use crate::davies::{build_jump_set, Coupling, SpectralFunction};
use crate::error::{Error, Result};
use crate::model::{build_ising_ring, build_kitaev_torus, ModelKind, StabilizerKind, StabilizerModel};
use crate::pauli::PauliOp;
use crate::reduced::{
    autocorrelation, build_reduced_generator_on, default_options, fit_lifetime, fit_lifetime_on, site_rules,
    stabilizer_product, FitQuality,
};

pub const MIN_TRAJECTORIES: usize = 100;
/// Trajectories simulated per parallel block; results are reduced in index
/// order so the output does not depend on the thread count.
const BLOCK: usize = 4096;
/// Batches used for confidence intervals of derived quantities.
pub const N_BATCHES: usize = 10;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AutocorrelationEstimate {
    pub times: Vec<f64>,
    pub mean: Vec<f64>,
    pub stderr: Vec<f64>,
    pub n_traj: usize,
    pub seed: u64,
    /// Mean curves of `N_BATCHES` contiguous trajectory blocks.
    pub batch_means: Vec<Vec<f64>>,
}

fn sign_of(excited: &[bool], f: &[usize]) -> f64 {
    if f.iter().filter(|&&i| excited[i]).count() % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Monte Carlo estimate of `⟨Q̃(t), Q̃⟩_β` with `F_Q = ∏_{i∈f} s_i`: the mean
/// over Gibbs-started trajectories of `w(t) F(η_t) F(η_0)`, `w` the product of
/// jump signs. Trajectory `k` draws from stream `k` of a ChaCha8 generator
/// seeded with `seed`.
pub fn run_autocorrelation(
    engine: &KmcEngine,
    f: &[usize],
    times: &[f64],
    n_traj: usize,
    seed: u64,
) -> Result<AutocorrelationEstimate> {
    if n_traj < MIN_TRAJECTORIES {
        return Err(Error::domain(format!(
            "at least {MIN_TRAJECTORIES} trajectories are required, got {n_traj}"
        )));
    }
    if times.is_empty() {
        return Err(Error::domain("empty time grid"));
    }
    if let Some(t) = times.iter().find(|&&t| !(t >= 0.0) || !t.is_finite()) {
        return Err(Error::domain(format!("time must be finite and non-negative, got {t}")));
    }
    if let Some(&i) = f.iter().find(|&&i| i >= engine.n_stabilizers()) {
        return Err(Error::InvalidFunction(format!("stabilizer index {i} out of range")));
    }
    let mut order: Vec<usize> = (0..times.len()).collect();
    order.sort_by(|&a, &b| times[a].total_cmp(&times[b]));

    let run_one = |k: usize| -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(k as u64);
        let initial = engine.sample_initial(&mut rng);
        let f0 = sign_of(&initial, f);
        let mut traj = engine.trajectory(initial);
        let mut out = vec![0.0; times.len()];
        for &i in &order {
            traj.advance_to(times[i], &mut rng);
            out[i] = traj.weight() as f64 * sign_of(traj.excited(), f) * f0;
        }
        out
    };

    let nt = times.len();
    let mut sum = vec![0.0; nt];
    let mut sum_sq = vec![0.0; nt];
    let batch_size = n_traj.div_ceil(N_BATCHES);
    let mut batch_sums = vec![vec![0.0; nt]; N_BATCHES];
    let mut batch_counts = vec![0usize; N_BATCHES];
    let mut start = 0;
    while start < n_traj {
        let end = (start + BLOCK).min(n_traj);
        let block: Vec<Vec<f64>> = (start..end).into_par_iter().map(run_one).collect();
        for (offset, values) in block.iter().enumerate() {
            let b = (start + offset) / batch_size;
            batch_counts[b] += 1;
            for i in 0..nt {
                sum[i] += values[i];
                sum_sq[i] += values[i] * values[i];
                batch_sums[b][i] += values[i];
            }
        }
        start = end;
    }
    let n = n_traj as f64;
    let mean: Vec<f64> = sum.iter().map(|s| s / n).collect();
    let stderr = sum_sq
        .iter()
        .zip(&mean)
        .map(|(sq, m)| ((sq - n * m * m).max(0.0) / (n - 1.0) / n).sqrt())
        .collect();
    let batch_means = batch_sums
        .into_iter()
        .zip(batch_counts)
        .filter(|(_, c)| *c > 0)
        .map(|(s, c)| s.into_iter().map(|v| v / c as f64).collect())
        .collect();
    Ok(AutocorrelationEstimate {
        times: times.to_vec(),
        mean,
        stderr,
        n_traj,
        seed,
        batch_means,
    })
}

/// Sectors whose dynamics can change `Q F`: those with a sign flip, plus
/// those `F` depends on. The others contribute a Markov factor that acts
/// trivially.
pub fn relevant_sectors(
    m: &StabilizerModel,
    coupling: Coupling,
    h: &SpectralFunction,
    q: &PauliOp,
    f: &[usize],
) -> Result<Vec<StabilizerKind>> {
    let jumps = build_jump_set(m, coupling)?;
    let rules = site_rules(m, &jumps, h, q)?;
    let mut kinds: Vec<StabilizerKind> = Vec::new();
    for s in m.sectors() {
        let flipped = rules.iter().any(|r| r.sector == s.kind && r.sign == -1);
        let used = f.iter().any(|i| s.stabilizers.contains(i));
        if flipped || used {
            kinds.push(s.kind);
        }
    }
    if kinds.is_empty() {
        if let Some(r) = rules.first() {
            kinds.push(r.sector);
        }
    }
    Ok(kinds)
}

/// KMC engine restricted to the listed sectors.
pub fn engine_on(
    m: &StabilizerModel,
    coupling: Coupling,
    h: &SpectralFunction,
    q: &PauliOp,
    kinds: &[StabilizerKind],
) -> Result<KmcEngine> {
    let jumps = build_jump_set(m, coupling)?;
    let rules = site_rules(m, &jumps, h, q)?
        .into_iter()
        .filter(|r| kinds.contains(&r.sector))
        .collect();
    let samplers = m
        .sectors()
        .iter()
        .filter(|s| kinds.contains(&s.kind))
        .map(|s| SectorSampler::thermal(m, &s.stabilizers, h.beta()))
        .collect();
    KmcEngine::from_parts(m.stabilizers().len(), samplers, rules)
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScanMethod {
    ExactReduced,
    Kmc,
    /// Exact where the syndrome space is small enough, otherwise KMC.
    Auto,
}

#[derive(Clone, Debug)]
pub struct ScanConfig {
    pub kind: ModelKind,
    pub sizes: Vec<usize>,
    pub coupling: Coupling,
    pub spectral: SpectralFunction,
    pub logical: String,
    pub times: Vec<f64>,
    pub n_traj: usize,
    pub seed: u64,
    pub method: ScanMethod,
    /// Largest syndrome space (bits) propagated exactly under `Auto`.
    pub max_exact_bits: usize,
}

pub const MAX_SCAN_TORUS: usize = 32;
pub const MAX_SCAN_RING: usize = 4096;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScanRow {
    pub size: usize,
    pub n_qubits: usize,
    pub method: &'static str,
    pub tau: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub quality: FitQuality,
    pub window: [f64; 2],
    pub n_points: usize,
    pub residual: f64,
}

fn build_model(kind: ModelKind, size: usize) -> Result<StabilizerModel> {
    let (cap, build): (usize, fn(usize) -> Result<StabilizerModel>) = match kind {
        ModelKind::IsingRing => (MAX_SCAN_RING, build_ising_ring),
        ModelKind::KitaevTorus => (MAX_SCAN_TORUS, build_kitaev_torus),
    };
    if size > cap {
        return Err(Error::Capacity {
            what: "lifetime scan lattice size",
            size,
            max: cap,
            hint: "",
        });
    }
    build(size)
}

/// Student t quantile at 0.975 for `N_BATCHES − 1` degrees of freedom.
/// Two-sided 95% Student-t quantiles for 1..=9 degrees of freedom.
const T_975: [f64; 9] = [12.706, 4.303, 3.182, 2.776, 2.571, 2.447, 2.365, 2.306, 2.262];

/// `τ(size)` from the autocorrelation of the bare logical on a fixed grid.
/// KMC rows carry a 95% interval from batch fits; exact rows a degenerate one.
pub fn lifetime_scan(cfg: &ScanConfig) -> Result<Vec<ScanRow>> {
    if cfg.sizes.is_empty() {
        return Err(Error::domain("no sizes to scan"));
    }
    if cfg.times.is_empty() {
        return Err(Error::domain("empty time grid"));
    }
    let mut rows = Vec::with_capacity(cfg.sizes.len());
    for &size in &cfg.sizes {
        let m = build_model(cfg.kind, size)?;
        let q = m
            .logical(&cfg.logical)
            .ok_or_else(|| Error::InvalidLogical(format!("{} has no logical {:?}", cfg.kind.name(), cfg.logical)))?
            .clone();
        let kinds = relevant_sectors(&m, cfg.coupling, &cfg.spectral, &q, &[])?;
        let bits: usize = m
            .sectors()
            .iter()
            .filter(|s| kinds.contains(&s.kind))
            .map(|s| s.len() - 1)
            .sum();
        let exact = match cfg.method {
            ScanMethod::ExactReduced => true,
            ScanMethod::Kmc => false,
            ScanMethod::Auto => bits <= cfg.max_exact_bits,
        };
        let row = if exact {
            let jumps = build_jump_set(&m, cfg.coupling)?;
            let g = build_reduced_generator_on(&m, &jumps, &cfg.spectral, &q, &kinds)?;
            let f = stabilizer_product(&m, g.space(), &[])?;
            let c = autocorrelation(&g, &m, &f, &cfg.times, &default_options())?;
            let fit = fit_lifetime(&cfg.times, &c);
            ScanRow {
                size,
                n_qubits: m.n_qubits(),
                method: "exact-reduced",
                tau: fit.tau,
                ci_low: fit.tau,
                ci_high: fit.tau,
                quality: fit.quality,
                window: fit.window,
                n_points: fit.n_points,
                residual: fit.residual,
            }
        } else {
            let engine = engine_on(&m, cfg.coupling, &cfg.spectral, &q, &kinds)?;
            let est = run_autocorrelation(&engine, &[], &cfg.times, cfg.n_traj, cfg.seed)?;
            let fit = fit_lifetime(&cfg.times, &est.mean);
            // every batch is fitted on the pooled window so the spread reflects
            // sampling noise, not window selection
            let taus: Vec<f64> = if fit.window[0].is_finite() {
                est.batch_means
                    .iter()
                    .map(|b| fit_lifetime_on(&cfg.times, b, fit.window).tau)
                    .filter(|t| t.is_finite())
                    .collect()
            } else {
                Vec::new()
            };
            let (lo, hi) = if taus.len() >= 2 {
                let k = taus.len() as f64;
                let mean = taus.iter().sum::<f64>() / k;
                let sd = (taus.iter().map(|t| (t - mean).powi(2)).sum::<f64>() / (k - 1.0)).sqrt();
                let half = T_975[taus.len() - 2] * sd / k.sqrt();
                (fit.tau - half, fit.tau + half)
            } else {
                (f64::NAN, f64::NAN)
            };
            ScanRow {
                size,
                n_qubits: m.n_qubits(),
                method: "kmc",
                tau: fit.tau,
                ci_low: lo,
                ci_high: hi,
                quality: fit.quality,
                window: fit.window,
                n_points: fit.n_points,
                residual: fit.residual,
            }
        };
        rows.push(row);
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::build_ising_ring;
    use crate::reduced::SiteRule;
    use crate::pauli::Pauli;

    fn two_state(r: f64) -> KmcEngine {
        let rule = SiteRule {
            site: 0,
            coupling: Pauli::X,
            sector: StabilizerKind::Bond,
            stabilizers: [0, 1],
            bits: [0, 1],
            rates: [r, 0.0, 0.0, r],
            sign: 1,
        };
        let sampler = SectorSampler {
            stabilizers: vec![0, 1],
            excite_prob: vec![0.5, 0.5],
        };
        KmcEngine::from_parts(2, vec![sampler], vec![rule]).unwrap()
    }

    #[test]
    fn two_state_estimator_is_unbiased() {
        let r = 0.5;
        let times = [0.0, 0.2, 0.5, 1.0, 2.0];
        let est = run_autocorrelation(&two_state(r), &[0], &times, 10_000, 5).unwrap();
        assert_eq!(est.mean[0], 1.0);
        for (i, t) in times.iter().enumerate().skip(1) {
            let exact = (-2.0 * r * t).exp();
            assert!((est.mean[i] - exact).abs() < 3.0 * est.stderr[i] + 1e-12, "t={t}");
        }
    }

    #[test]
    fn deterministic_under_seed() {
        let m = build_ising_ring(6).unwrap();
        let jumps = build_jump_set(&m, Coupling::XOnly).unwrap();
        let h = SpectralFunction::thermal(0.5, 1.0, 1.0).unwrap();
        let engine = KmcEngine::new(&m, &jumps, &h, m.logical("Z").unwrap()).unwrap();
        let a = run_autocorrelation(&engine, &[], &[0.1, 1.0], 500, 9).unwrap();
        let b = run_autocorrelation(&engine, &[], &[1.0, 0.1], 500, 9).unwrap();
        assert_eq!(a.mean[0].to_bits(), b.mean[1].to_bits());
        assert_eq!(a.mean[1].to_bits(), b.mean[0].to_bits());
        assert!(run_autocorrelation(&engine, &[], &[1.0], 50, 9).is_err());
    }

    #[test]
    fn negative_rates_are_rejected() {
        let mut engine_rule = two_state(1.0).rules()[0].clone();
        engine_rule.rates[0] = -0.1;
        assert!(matches!(
            KmcEngine::from_parts(2, vec![], vec![engine_rule]),
            Err(Error::NegativeRate { .. })
        ));
    }
}
