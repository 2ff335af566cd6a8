use rayon::prelude::*;
use serde::Serialize;

use super::space::{BitSource, SyndromeSpace};
use crate::davies::{Coupling, DaviesJumpSet, SpectralFunction, build_jump_set};
use crate::error::{Error, Result};
use crate::expm::{expmv, KrylovOptions, LinearOperator};
use crate::model::{StabilizerKind, StabilizerModel};
use crate::pauli::{Pauli, PauliOp};
use crate::sparse::CsrMatrix;

/// Rate and sign data of one coupling operator on syndrome space.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SiteRule {
    pub site: usize,
    pub coupling: Pauli,
    pub sector: StabilizerKind,
    /// Model indices of the two flipped stabilizers.
    pub stabilizers: [usize; 2],
    /// Positions of the flipped stabilizers inside their sector.
    pub bits: [usize; 2],
    /// `ĥ(ω)` for a jump from each pattern `e₀ + 2e₁`: annihilation from
    /// pattern 3, creation from pattern 0, hopping otherwise.
    pub rates: [f64; 4],
    /// `g` with `σ Q σ = g Q`.
    pub sign: i8,
}

fn check_logical(m: &StabilizerModel, q: &PauliOp) -> Result<()> {
    if q.n_qubits() != m.n_qubits() {
        return Err(Error::DimensionMismatch {
            left: q.n_qubits(),
            right: m.n_qubits(),
        });
    }
    if !m.commutes_with_stabilizers(q)? {
        return Err(Error::InvalidLogical(format!(
            "{q} does not commute with every stabilizer"
        )));
    }
    Ok(())
}

/// Per-channel rates and signs for the logical `q`.
pub fn site_rules(
    m: &StabilizerModel,
    jumps: &DaviesJumpSet,
    h: &SpectralFunction,
    q: &PauliOp,
) -> Result<Vec<SiteRule>> {
    check_logical(m, q)?;
    jumps
        .channels()
        .iter()
        .map(|ch| {
            let mut rates = [0.0; 4];
            for (r, &w) in rates.iter_mut().zip(&ch.frequencies) {
                *r = h.rate(w)?;
            }
            Ok(SiteRule {
                site: ch.site,
                coupling: ch.coupling,
                sector: ch.sector,
                stabilizers: ch.stabilizers,
                bits: ch.bits,
                rates,
                sign: PauliOp::conjugate_sign(&ch.coupling_op(m), q)?,
            })
        })
        .collect()
}

#[derive(Clone, Debug)]
struct Transition {
    mask: usize,
    sources: [BitSource; 2],
    rates: [f64; 4],
    sign: f64,
}

impl Transition {
    #[inline]
    fn rate(&self, idx: usize) -> f64 {
        self.rates[self.sources[0].read(idx) | self.sources[1].read(idx) << 1]
    }
}

/// `(L̃_Q F)(η) = Σ_j D_j(η) (g_Q(j) F(η ⊕ flip_j) − F(η))`, the signed rate
/// operator that carries `e^{tL}(Q F) = Q e^{tL̃_Q}(F)`.
#[derive(Clone, Debug)]
pub struct ReducedGenerator {
    space: SyndromeSpace,
    rules: Vec<SiteRule>,
    transitions: Vec<Transition>,
    logical: PauliOp,
    beta: f64,
}

/// Generator on every sector touched by the jump set.
pub fn build_reduced_generator(
    m: &StabilizerModel,
    jumps: &DaviesJumpSet,
    h: &SpectralFunction,
    q: &PauliOp,
) -> Result<ReducedGenerator> {
    let mut kinds: Vec<StabilizerKind> = Vec::new();
    for ch in jumps.channels() {
        if !kinds.contains(&ch.sector) {
            kinds.push(ch.sector);
        }
    }
    build_reduced_generator_on(m, jumps, h, q, &kinds)
}

/// Generator restricted to the listed sectors; channels flipping other
/// sectors are left out.
pub fn build_reduced_generator_on(
    m: &StabilizerModel,
    jumps: &DaviesJumpSet,
    h: &SpectralFunction,
    q: &PauliOp,
    kinds: &[StabilizerKind],
) -> Result<ReducedGenerator> {
    let space = SyndromeSpace::new(m, kinds)?;
    let rules: Vec<SiteRule> = site_rules(m, jumps, h, q)?
        .into_iter()
        .filter(|r| kinds.contains(&r.sector))
        .collect();
    let transitions = rules
        .iter()
        .map(|r| {
            let pos = space.sector_position(r.sector).expect("sector in space");
            Transition {
                mask: space.flip_mask(pos, r.bits[0], r.bits[1]),
                sources: [space.source(pos, r.bits[0]), space.source(pos, r.bits[1])],
                rates: r.rates,
                sign: r.sign as f64,
            }
        })
        .collect();
    Ok(ReducedGenerator {
        space,
        rules,
        transitions,
        logical: q.clone(),
        beta: h.beta(),
    })
}

/// The toric-code generator driven by `σˣ` couplings only, on the plaquette
/// sector: the dynamics that governs `Z`-type logicals.
pub fn kitaev_z_generator(m: &StabilizerModel, h: &SpectralFunction, q: &PauliOp) -> Result<ReducedGenerator> {
    let jumps = build_jump_set(m, Coupling::XOnly)?;
    build_reduced_generator_on(m, &jumps, h, q, &[StabilizerKind::Plaquette])
}

/// Largest space for which [`ReducedGenerator::matrix`] materializes a CSR matrix.
pub const MAX_CSR_STATES: usize = 1 << 20;

impl ReducedGenerator {
    pub fn space(&self) -> &SyndromeSpace {
        &self.space
    }

    pub fn rules(&self) -> &[SiteRule] {
        &self.rules
    }

    pub fn logical(&self) -> &PauliOp {
        &self.logical
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// Whether every sign is `+1`, i.e. `L̃` is a Markov generator.
    pub fn is_unsigned(&self) -> bool {
        self.rules.iter().all(|r| r.sign == 1)
    }

    /// Sites whose coupling operator anticommutes with the logical.
    pub fn negative_sites(&self) -> Vec<(usize, Pauli)> {
        self.rules
            .iter()
            .filter(|r| r.sign == -1)
            .map(|r| (r.site, r.coupling))
            .collect()
    }

    /// Total jump rate `Σ_j D_j(η)` out of a state.
    pub fn exit_rate(&self, idx: usize) -> f64 {
        self.transitions.iter().map(|t| t.rate(idx)).sum()
    }

    /// `(η', rate, sign)` for every jump out of `η`.
    pub fn jumps_from(&self, idx: usize) -> impl Iterator<Item = (usize, f64, f64)> + '_ {
        self.transitions
            .iter()
            .map(move |t| (idx ^ t.mask, t.rate(idx), t.sign))
    }

    /// The signed rate matrix, duplicates (two sites flipping the same pair)
    /// merged.
    pub fn matrix(&self) -> Result<CsrMatrix> {
        let n = self.space.len();
        if n > MAX_CSR_STATES {
            return Err(Error::Capacity {
                what: "explicit reduced rate matrix (states)",
                size: n,
                max: MAX_CSR_STATES,
                hint: "; use the matrix-free operator instead",
            });
        }
        let mut triplets = Vec::with_capacity(n * (self.transitions.len() + 1));
        for idx in 0..n {
            let mut diag = 0.0;
            for t in &self.transitions {
                let r = t.rate(idx);
                if r != 0.0 {
                    triplets.push((idx, idx ^ t.mask, t.sign * r));
                    diag -= r;
                }
            }
            triplets.push((idx, idx, diag));
        }
        Ok(CsrMatrix::from_triplets(n, triplets))
    }

    /// Largest violation of `π(η) r(η→η') = π(η') r(η'→η)` for the unsigned
    /// chain, relative to `max π`.
    pub fn detailed_balance_residual(&self, m: &StabilizerModel) -> Result<f64> {
        let pi = self.space.gibbs_weights(m, self.beta)?;
        let top = pi.iter().cloned().fold(0.0, f64::max);
        let mut worst: f64 = 0.0;
        for idx in 0..self.space.len() {
            for t in &self.transitions {
                let j = idx ^ t.mask;
                let v = (pi[idx] * t.rate(idx) - pi[j] * t.rate(j)).abs() / top;
                worst = worst.max(v);
            }
        }
        Ok(worst)
    }
}

impl LinearOperator<f64> for ReducedGenerator {
    fn dim(&self) -> usize {
        self.space.len()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        y.par_iter_mut().enumerate().for_each(|(idx, out)| {
            let fx = x[idx];
            let mut acc = 0.0;
            for t in &self.transitions {
                let r = t.rate(idx);
                acc += r * (t.sign * x[idx ^ t.mask] - fx);
            }
            *out = acc;
        });
    }

    fn norm_bound(&self) -> f64 {
        2.0 * self
            .transitions
            .iter()
            .map(|t| t.rates.iter().cloned().fold(0.0, f64::max))
            .sum::<f64>()
    }
}

pub fn default_options() -> KrylovOptions {
    KrylovOptions {
        tol: 1e-12,
        ..KrylovOptions::default()
    }
}

/// `e^{tL̃}(F)`.
pub fn propagate_reduced(g: &ReducedGenerator, f: &[f64], t: f64, opts: &KrylovOptions) -> Result<Vec<f64>> {
    if f.len() != g.space.len() {
        return Err(Error::InvalidFunction(format!(
            "function has {} values, syndrome space has {}",
            f.len(),
            g.space.len()
        )));
    }
    Ok(expmv(g, t, f, opts)?.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{build_ising_ring, build_kitaev_torus};

    #[test]
    fn identity_logical_is_markov() {
        let m = build_kitaev_torus(2).unwrap();
        let jumps = build_jump_set(&m, Coupling::Both).unwrap();
        let h = SpectralFunction::thermal(0.9, 1.0, 0.7).unwrap();
        let g = build_reduced_generator(&m, &jumps, &h, &PauliOp::identity(8)).unwrap();
        assert!(g.is_unsigned());
        let a = g.matrix().unwrap();
        for r in 0..a.n() {
            let sum: f64 = a.row(r).map(|(_, v)| v).sum();
            assert!(sum.abs() < 1e-13);
            assert!(a.row(r).all(|(c, v)| c == r || v >= 0.0));
        }
        assert!(g.detailed_balance_residual(&m).unwrap() < 1e-14);
    }

    #[test]
    fn ising_z_sign_only_at_first_site() {
        let m = build_ising_ring(4).unwrap();
        let jumps = build_jump_set(&m, Coupling::XOnly).unwrap();
        let h = SpectralFunction::thermal(1.0, 1.0, 1.0).unwrap();
        let g = build_reduced_generator(&m, &jumps, &h, m.logical("Z").unwrap()).unwrap();
        assert_eq!(g.negative_sites(), vec![(0, Pauli::X)]);
    }

    #[test]
    fn non_logical_is_rejected() {
        let m = build_ising_ring(4).unwrap();
        let jumps = build_jump_set(&m, Coupling::XOnly).unwrap();
        let h = SpectralFunction::thermal(1.0, 1.0, 1.0).unwrap();
        let q = PauliOp::single(4, 1, Pauli::X);
        assert!(matches!(
            build_reduced_generator(&m, &jumps, &h, &q),
            Err(Error::InvalidLogical(_))
        ));
    }

    #[test]
    fn matrix_free_matches_csr() {
        let m = build_kitaev_torus(2).unwrap();
        let jumps = build_jump_set(&m, Coupling::Both).unwrap();
        let h = SpectralFunction::thermal(0.4, 1.0, 0.3).unwrap();
        let g = build_reduced_generator(&m, &jumps, &h, m.logical("Z1").unwrap()).unwrap();
        let a = g.matrix().unwrap();
        let x: Vec<f64> = (0..g.space().len()).map(|i| ((i * 37 % 11) as f64) - 5.0).collect();
        let mut y1 = vec![0.0; x.len()];
        let mut y2 = vec![0.0; x.len()];
        g.apply(&x, &mut y1);
        a.matvec(&x, &mut y2);
        for (a, b) in y1.iter().zip(&y2) {
            assert!((a - b).abs() < 1e-12);
        }
    }
}
