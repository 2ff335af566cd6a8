use serde::{Deserialize, Serialize};

use super::{StabilizerKind, StabilizerModel};
use crate::error::{Error, Result};

/// Excitation pattern of one stabilizer sector; bit `i` is set when the
/// `i`-th stabilizer of the sector has eigenvalue −1.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SyndromeState {
    pub sector: StabilizerKind,
    pub excited: Vec<bool>,
}

impl SyndromeState {
    pub fn vacuum(m: &StabilizerModel, sector: StabilizerKind) -> Result<Self> {
        let s = m
            .sector(sector)
            .ok_or_else(|| Error::InvalidState(format!("model has no {} sector", sector.name())))?;
        Ok(SyndromeState {
            sector,
            excited: vec![false; s.len()],
        })
    }

    pub fn n_excited(&self) -> usize {
        self.excited.iter().filter(|&&e| e).count()
    }

    /// Checks length and even parity against the model.
    pub fn validate(&self, m: &StabilizerModel) -> Result<()> {
        let sector = m.sector(self.sector).ok_or_else(|| {
            Error::InvalidState(format!("model has no {} sector", self.sector.name()))
        })?;
        if self.excited.len() != sector.len() {
            return Err(Error::InvalidState(format!(
                "{} syndrome has {} bits, sector has {}",
                self.sector.name(),
                self.excited.len(),
                sector.len()
            )));
        }
        if self.n_excited() % 2 != 0 {
            return Err(Error::InvalidState(format!(
                "odd number ({}) of excited {} stabilizers",
                self.n_excited(),
                self.sector.name()
            )));
        }
        Ok(())
    }
}

/// Energy of `H = −Σ J_i S_i` on the eigenspace with the given syndromes.
/// Sectors not listed are taken as unexcited.
pub fn hamiltonian_energy(m: &StabilizerModel, syndrome: &[SyndromeState]) -> Result<f64> {
    let mut seen = Vec::new();
    for s in syndrome {
        s.validate(m)?;
        if seen.contains(&s.sector) {
            return Err(Error::InvalidState(format!(
                "{} sector given twice",
                s.sector.name()
            )));
        }
        seen.push(s.sector);
    }
    let mut energy = 0.0;
    for sector in m.sectors() {
        let bits = syndrome.iter().find(|s| s.sector == sector.kind);
        for (bit, &i) in sector.stabilizers.iter().enumerate() {
            let excited = bits.is_some_and(|s| s.excited[bit]);
            let j = m.stabilizers()[i].coupling;
            energy += if excited { j } else { -j };
        }
    }
    Ok(energy)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{build_ising_ring, build_kitaev_torus};

    #[test]
    fn vacuum_energy_is_minus_n() {
        for n in 3..8 {
            let m = build_ising_ring(n).unwrap();
            let e = hamiltonian_energy(&m, &[SyndromeState::vacuum(&m, StabilizerKind::Bond).unwrap()]).unwrap();
            assert_eq!(e, -(n as f64));
        }
    }

    #[test]
    fn two_kinks_on_four_sites() {
        let m = build_ising_ring(4).unwrap();
        let s = SyndromeState {
            sector: StabilizerKind::Bond,
            excited: vec![true, false, true, false],
        };
        assert_eq!(hamiltonian_energy(&m, &[s]).unwrap(), 0.0);
    }

    #[test]
    fn kitaev_pair_energies() {
        let m = build_kitaev_torus(2).unwrap();
        let p = SyndromeState {
            sector: StabilizerKind::Plaquette,
            excited: vec![true, true, false, false],
        };
        let s = SyndromeState {
            sector: StabilizerKind::Star,
            excited: vec![false, true, false, true],
        };
        assert_eq!(hamiltonian_energy(&m, &[p, s]).unwrap(), -8.0 + 8.0);
    }

    #[test]
    fn parity_violation_rejected() {
        let m = build_ising_ring(4).unwrap();
        let s = SyndromeState {
            sector: StabilizerKind::Bond,
            excited: vec![true, false, false, false],
        };
        assert!(matches!(hamiltonian_energy(&m, &[s]), Err(Error::InvalidState(_))));
        let wrong = SyndromeState {
            sector: StabilizerKind::Star,
            excited: vec![false; 4],
        };
        assert!(hamiltonian_energy(&m, &[wrong]).is_err());
    }
}
