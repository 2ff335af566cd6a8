use rand::Rng;

use super::fenwick::Fenwick;
use crate::davies::{DaviesJumpSet, SpectralFunction};
use crate::error::{Error, Result};
use crate::model::{StabilizerModel, SyndromeState};
use crate::pauli::PauliOp;
use crate::reduced::{site_rules, SiteRule};

/// Stabilizers of one parity-constrained sector with their Gibbs excitation
/// probabilities before conditioning.
#[derive(Clone, Debug, PartialEq)]
pub struct SectorSampler {
    pub stabilizers: Vec<usize>,
    pub excite_prob: Vec<f64>,
}

impl SectorSampler {
    /// `p_i = e^{−2βJ_i} / (1 + e^{−2βJ_i})`, the excitation probability of an
    /// unconstrained stabilizer under `e^{−βH}`.
    pub fn thermal(m: &StabilizerModel, stabilizers: &[usize], beta: f64) -> Self {
        let excite_prob = stabilizers
            .iter()
            .map(|&i| {
                let x = 2.0 * beta * m.stabilizers()[i].coupling;
                1.0 / (1.0 + x.exp())
            })
            .collect();
        SectorSampler {
            stabilizers: stabilizers.to_vec(),
            excite_prob,
        }
    }

    /// Independent Bernoulli draws conditioned on even parity (by rejection;
    /// acceptance is at least ½).
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R, excited: &mut [bool]) {
        loop {
            let mut parity = false;
            for (&i, &p) in self.stabilizers.iter().zip(&self.excite_prob) {
                let e = rng.random::<f64>() < p;
                excited[i] = e;
                parity ^= e;
            }
            if !parity {
                return;
            }
        }
    }
}

/// Exact sample of the Gibbs syndrome law of every sector.
pub fn sample_gibbs_syndrome<R: Rng + ?Sized>(
    m: &StabilizerModel,
    beta: f64,
    rng: &mut R,
) -> Result<Vec<SyndromeState>> {
    if !(beta >= 0.0) || !beta.is_finite() {
        return Err(Error::domain(format!("beta must be finite and non-negative, got {beta}")));
    }
    let mut excited = vec![false; m.stabilizers().len()];
    Ok(m.sectors()
        .iter()
        .map(|s| {
            SectorSampler::thermal(m, &s.stabilizers, beta).sample(rng, &mut excited);
            SyndromeState {
                sector: s.kind,
                excited: s.stabilizers.iter().map(|&i| excited[i]).collect(),
            }
        })
        .collect())
}

/// Continuous-time jump process of the unsigned reduced chain, with the
/// sign of each rule carried as a trajectory weight.
#[derive(Clone, Debug)]
pub struct KmcEngine {
    n_stabilizers: usize,
    rules: Vec<SiteRule>,
    /// Rules touching each stabilizer.
    touching: Vec<Vec<usize>>,
    samplers: Vec<SectorSampler>,
}

impl KmcEngine {
    /// Engine for the logical `q` under the jump set and bath.
    pub fn new(
        m: &StabilizerModel,
        jumps: &DaviesJumpSet,
        h: &SpectralFunction,
        q: &PauliOp,
    ) -> Result<Self> {
        let rules = site_rules(m, jumps, h, q)?;
        let samplers = m
            .sectors()
            .iter()
            .filter(|s| rules.iter().any(|r| r.sector == s.kind))
            .map(|s| SectorSampler::thermal(m, &s.stabilizers, h.beta()))
            .collect();
        Self::from_parts(m.stabilizers().len(), samplers, rules)
    }

    /// Engine from explicit parts; stabilizer indices refer to a state vector
    /// of length `n_stabilizers`.
    pub fn from_parts(n_stabilizers: usize, samplers: Vec<SectorSampler>, rules: Vec<SiteRule>) -> Result<Self> {
        let mut touching = vec![Vec::new(); n_stabilizers];
        for (k, r) in rules.iter().enumerate() {
            if let Some(&rate) = r.rates.iter().find(|&&v| !(v >= 0.0) || !v.is_finite()) {
                return Err(Error::NegativeRate { rate });
            }
            for &s in &r.stabilizers {
                if s >= n_stabilizers {
                    return Err(Error::domain(format!("rule refers to stabilizer {s} of {n_stabilizers}")));
                }
                touching[s].push(k);
            }
        }
        Ok(KmcEngine {
            n_stabilizers,
            rules,
            touching,
            samplers,
        })
    }

    pub fn rules(&self) -> &[SiteRule] {
        &self.rules
    }

    pub fn n_stabilizers(&self) -> usize {
        self.n_stabilizers
    }

    pub fn sample_initial<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<bool> {
        let mut excited = vec![false; self.n_stabilizers];
        for s in &self.samplers {
            s.sample(rng, &mut excited);
        }
        excited
    }

    fn rate(&self, rule: usize, excited: &[bool]) -> f64 {
        let r = &self.rules[rule];
        let p = excited[r.stabilizers[0]] as usize | (excited[r.stabilizers[1]] as usize) << 1;
        r.rates[p]
    }

    pub fn trajectory(&self, excited: Vec<bool>) -> Trajectory<'_> {
        assert_eq!(excited.len(), self.n_stabilizers);
        let rates = (0..self.rules.len()).map(|k| self.rate(k, &excited)).collect();
        Trajectory {
            engine: self,
            excited,
            clock: 0.0,
            weight: 1,
            tree: Fenwick::new(rates),
            next_jump: None,
        }
    }
}

/// One realization: syndrome, clock and accumulated sign.
#[derive(Clone, Debug)]
pub struct Trajectory<'a> {
    engine: &'a KmcEngine,
    excited: Vec<bool>,
    clock: f64,
    weight: i8,
    tree: Fenwick,
    next_jump: Option<f64>,
}

impl Trajectory<'_> {
    pub fn excited(&self) -> &[bool] {
        &self.excited
    }

    pub fn clock(&self) -> f64 {
        self.clock
    }

    /// Product of the signs of all jumps so far.
    pub fn weight(&self) -> i8 {
        self.weight
    }

    pub fn total_rate(&self) -> f64 {
        self.tree.total()
    }

    fn sample_next<R: Rng + ?Sized>(&mut self, rng: &mut R) -> f64 {
        *self.next_jump.get_or_insert_with(|| {
            let total = self.tree.total();
            if total > 0.0 {
                let u: f64 = 1.0 - rng.random::<f64>();
                self.clock - u.ln() / total
            } else {
                f64::INFINITY
            }
        })
    }

    fn jump<R: Rng + ?Sized>(&mut self, at: f64, rng: &mut R) -> usize {
        let u = rng.random::<f64>() * self.tree.total();
        let k = self.tree.find(u);
        let rule = &self.engine.rules[k];
        for &s in &rule.stabilizers {
            self.excited[s] = !self.excited[s];
        }
        self.weight *= rule.sign;
        for &s in &rule.stabilizers {
            for &j in &self.engine.touching[s] {
                self.tree.set(j, self.engine.rate(j, &self.excited));
            }
        }
        self.clock = at;
        self.next_jump = None;
        debug_assert!(self
            .engine
            .samplers
            .iter()
            .all(|s| s.stabilizers.iter().filter(|&&i| self.excited[i]).count() % 2 == 0));
        k
    }

    /// Perform the next jump; `None` if every rate vanishes.
    pub fn step<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Option<usize> {
        let at = self.sample_next(rng);
        if at.is_infinite() {
            return None;
        }
        Some(self.jump(at, rng))
    }

    /// Run until the clock reaches `t`; returns the number of jumps.
    pub fn advance_to<R: Rng + ?Sized>(&mut self, t: f64, rng: &mut R) -> usize {
        let mut jumps = 0;
        loop {
            let at = self.sample_next(rng);
            if at > t {
                self.clock = self.clock.max(t);
                return jumps;
            }
            self.jump(at, rng);
            jumps += 1;
        }
    }
}
