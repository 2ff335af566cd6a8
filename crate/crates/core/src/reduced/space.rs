use crate::error::{Error, Result};
use crate::model::{StabilizerKind, StabilizerModel, SyndromeState};

/// Largest syndrome space (log2 of the number of states).
pub const MAX_SYNDROME_BITS: usize = 26;

#[derive(Clone, Debug, PartialEq)]
pub(crate) struct SectorLayout {
    pub kind: StabilizerKind,
    /// Model stabilizer indices, in sector order.
    pub stabilizers: Vec<usize>,
    /// First index bit of this sector.
    pub offset: usize,
}

impl SectorLayout {
    fn free_bits(&self) -> usize {
        self.stabilizers.len() - 1
    }

    fn free_mask(&self) -> usize {
        ((1usize << self.free_bits()) - 1) << self.offset
    }
}

/// Where the excitation bit of one stabilizer lives in a state index.
#[derive(Copy, Clone, Debug, PartialEq)]
pub(crate) enum BitSource {
    Bit(usize),
    /// The sector's last stabilizer, fixed by even parity.
    Parity(usize),
}

impl BitSource {
    #[inline]
    pub fn read(self, idx: usize) -> usize {
        match self {
            BitSource::Bit(k) => idx >> k & 1,
            BitSource::Parity(mask) => ((idx & mask).count_ones() & 1) as usize,
        }
    }
}

/// Even-parity syndrome configurations of one or more sectors.
///
/// In each sector every stabilizer but the last owns one index bit; the last
/// is reconstructed from parity, so indexing is a bijection onto `0..2^B`.
#[derive(Clone, Debug, PartialEq)]
pub struct SyndromeSpace {
    pub(crate) sectors: Vec<SectorLayout>,
    n_bits: usize,
}

impl SyndromeSpace {
    /// The listed sectors, in model order.
    pub fn new(m: &StabilizerModel, kinds: &[StabilizerKind]) -> Result<Self> {
        let mut sectors = Vec::new();
        let mut offset = 0;
        for s in m.sectors() {
            if !kinds.contains(&s.kind) {
                continue;
            }
            sectors.push(SectorLayout {
                kind: s.kind,
                stabilizers: s.stabilizers.clone(),
                offset,
            });
            offset += s.len() - 1;
        }
        for k in kinds {
            if !sectors.iter().any(|s| s.kind == *k) {
                return Err(Error::domain(format!(
                    "the {} model has no {} sector",
                    m.kind().name(),
                    k.name()
                )));
            }
        }
        if offset > MAX_SYNDROME_BITS {
            return Err(Error::Capacity {
                what: "syndrome space (bits)",
                size: offset,
                max: MAX_SYNDROME_BITS,
                hint: "; use the kmc method for this size",
            });
        }
        Ok(SyndromeSpace {
            sectors,
            n_bits: offset,
        })
    }

    /// Every sector of the model.
    pub fn full(m: &StabilizerModel) -> Result<Self> {
        let kinds: Vec<StabilizerKind> = m.sectors().iter().map(|s| s.kind).collect();
        Self::new(m, &kinds)
    }

    pub fn n_bits(&self) -> usize {
        self.n_bits
    }

    pub fn len(&self) -> usize {
        1usize << self.n_bits
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn kinds(&self) -> Vec<StabilizerKind> {
        self.sectors.iter().map(|s| s.kind).collect()
    }

    pub(crate) fn sector_position(&self, kind: StabilizerKind) -> Option<usize> {
        self.sectors.iter().position(|s| s.kind == kind)
    }

    pub(crate) fn source(&self, sector: usize, bit: usize) -> BitSource {
        let s = &self.sectors[sector];
        if bit + 1 < s.stabilizers.len() {
            BitSource::Bit(s.offset + bit)
        } else {
            BitSource::Parity(s.free_mask())
        }
    }

    /// Index mask that flips stabilizers `b0` and `b1` of a sector.
    pub(crate) fn flip_mask(&self, sector: usize, b0: usize, b1: usize) -> usize {
        let s = &self.sectors[sector];
        let last = s.stabilizers.len() - 1;
        [b0, b1]
            .iter()
            .filter(|&&b| b != last)
            .fold(0, |acc, &b| acc ^ 1 << (s.offset + b))
    }

    pub fn is_excited(&self, idx: usize, kind: StabilizerKind, bit: usize) -> bool {
        let pos = self.sector_position(kind).expect("sector in space");
        self.source(pos, bit).read(idx) == 1
    }

    pub fn decode(&self, idx: usize) -> Vec<SyndromeState> {
        self.sectors
            .iter()
            .enumerate()
            .map(|(pos, s)| SyndromeState {
                sector: s.kind,
                excited: (0..s.stabilizers.len())
                    .map(|b| self.source(pos, b).read(idx) == 1)
                    .collect(),
            })
            .collect()
    }

    /// Inverse of [`decode`](Self::decode); every sector of the space must be
    /// given exactly once.
    pub fn encode(&self, states: &[SyndromeState]) -> Result<usize> {
        let mut idx = 0;
        for s in &self.sectors {
            let mut found = states.iter().filter(|st| st.sector == s.kind);
            let st = found
                .next()
                .ok_or_else(|| Error::InvalidState(format!("missing {} sector", s.kind.name())))?;
            if found.next().is_some() {
                return Err(Error::InvalidState(format!("duplicate {} sector", s.kind.name())));
            }
            if st.excited.len() != s.stabilizers.len() {
                return Err(Error::InvalidState(format!(
                    "{} sector has {} stabilizers, got {} bits",
                    s.kind.name(),
                    s.stabilizers.len(),
                    st.excited.len()
                )));
            }
            if st.n_excited() % 2 == 1 {
                return Err(Error::InvalidState(format!(
                    "odd number of excitations in the {} sector",
                    s.kind.name()
                )));
            }
            for (b, &e) in st.excited[..s.stabilizers.len() - 1].iter().enumerate() {
                if e {
                    idx |= 1 << (s.offset + b);
                }
            }
        }
        Ok(idx)
    }

    /// Gibbs law of the syndrome, `π(η) ∝ exp(−2β Σ_{excited} J_i)`.
    pub fn gibbs_weights(&self, m: &StabilizerModel, beta: f64) -> Result<Vec<f64>> {
        if !(beta >= 0.0) || !beta.is_finite() {
            return Err(Error::domain(format!("beta must be finite and non-negative, got {beta}")));
        }
        // sectors are independent: π is a product of per-sector tables
        let mut out = vec![1.0];
        for (pos, s) in self.sectors.iter().enumerate() {
            let n_states = 1usize << s.free_bits();
            let cost: Vec<f64> = s
                .stabilizers
                .iter()
                .map(|&i| 2.0 * beta * m.stabilizers()[i].coupling)
                .collect();
            let mut table: Vec<f64> = (0..n_states)
                .map(|local| {
                    let idx = local << s.offset;
                    let e: f64 = (0..s.stabilizers.len())
                        .filter(|&b| self.source(pos, b).read(idx) == 1)
                        .map(|b| cost[b])
                        .sum();
                    (-e).exp()
                })
                .collect();
            let z: f64 = table.iter().sum();
            table.iter_mut().for_each(|v| *v /= z);
            out = table
                .iter()
                .flat_map(|&t| out.iter().map(move |&o| o * t))
                .collect();
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{build_ising_ring, build_kitaev_torus};

    #[test]
    fn roundtrip_and_parity() {
        let m = build_kitaev_torus(2).unwrap();
        let space = SyndromeSpace::full(&m).unwrap();
        assert_eq!(space.len(), 64);
        for idx in 0..space.len() {
            let states = space.decode(idx);
            for s in &states {
                assert_eq!(s.n_excited() % 2, 0);
            }
            assert_eq!(space.encode(&states).unwrap(), idx);
        }
    }

    #[test]
    fn flip_mask_flips_exactly_two() {
        let m = build_ising_ring(5).unwrap();
        let space = SyndromeSpace::full(&m).unwrap();
        for (b0, b1) in [(0, 1), (3, 4), (4, 0)] {
            let mask = space.flip_mask(0, b0, b1);
            for idx in 0..space.len() {
                let a = &space.decode(idx)[0].excited;
                let b = &space.decode(idx ^ mask)[0].excited;
                let diff: Vec<usize> = (0..5).filter(|&i| a[i] != b[i]).collect();
                let mut want = vec![b0, b1];
                want.sort();
                assert_eq!(diff, want);
            }
        }
    }

    #[test]
    fn gibbs_weights_sum_to_one_and_match_tanh() {
        let m = build_ising_ring(4).unwrap();
        let space = SyndromeSpace::full(&m).unwrap();
        let beta = 0.6;
        let pi = space.gibbs_weights(&m, beta).unwrap();
        assert!((pi.iter().sum::<f64>() - 1.0).abs() < 1e-14);
        let mean: f64 = (0..space.len())
            .map(|i| pi[i] * if space.is_excited(i, StabilizerKind::Bond, 0) { -1.0 } else { 1.0 })
            .sum();
        let exact = crate::model::gibbs_expectation(&m, &m.stabilizers()[0].op, beta).unwrap();
        assert!((mean - exact).abs() < 1e-14);
    }

    #[test]
    fn capacity() {
        let m = build_kitaev_torus(4).unwrap();
        assert!(matches!(SyndromeSpace::full(&m), Err(Error::Capacity { .. })));
        assert!(SyndromeSpace::new(&m, &[StabilizerKind::Plaquette]).is_ok());
    }
}
