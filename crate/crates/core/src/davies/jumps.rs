use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{ModelKind, StabilizerKind, StabilizerModel};
use crate::pauli::{Pauli, PauliOp, PauliPolynomial};

const FREQ_TOL: f64 = 1e-9;

/// Which single-site operators couple to the bath.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Coupling {
    XOnly,
    ZOnly,
    Both,
}

impl Coupling {
    pub fn includes(self, p: Pauli) -> bool {
        matches!(
            (self, p),
            (Coupling::XOnly, Pauli::X) | (Coupling::ZOnly, Pauli::Z) | (Coupling::Both, Pauli::X | Pauli::Z)
        )
    }

    pub fn name(self) -> &'static str {
        match self {
            Coupling::XOnly => "x-only",
            Coupling::ZOnly => "z-only",
            Coupling::Both => "both",
        }
    }
}

impl fmt::Display for Coupling {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Coupling {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "x" | "x-only" | "xonly" => Ok(Coupling::XOnly),
            "z" | "z-only" | "zonly" => Ok(Coupling::ZOnly),
            "both" | "xz" => Ok(Coupling::Both),
            _ => Err(Error::domain(format!(
                "unknown coupling {s:?}; expected x-only, z-only or both"
            ))),
        }
    }
}

/// One coupling operator `σ_j^α` and the two stabilizers it flips.
///
/// Syndrome patterns of the two stabilizers are indexed `e₀ + 2e₁` with
/// `eᵢ = 1` when stabilizer `i` is excited (eigenvalue −1).
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct JumpChannel {
    pub site: usize,
    pub coupling: Pauli,
    pub sector: StabilizerKind,
    /// Model indices of the flipped stabilizers.
    pub stabilizers: [usize; 2],
    /// Positions of the flipped stabilizers inside their sector.
    pub bits: [usize; 2],
    /// Bohr frequency `E_before − E_after` of a jump from each pattern.
    pub frequencies: [f64; 4],
}

/// `P⁻` (no excitation), `P⁰` (one), `P⁺` (two) on the flipped pair.
#[derive(Clone, Debug, PartialEq)]
pub struct Projections {
    pub minus: PauliPolynomial,
    pub zero: PauliPolynomial,
    pub plus: PauliPolynomial,
}

impl JumpChannel {
    pub fn coupling_op(&self, m: &StabilizerModel) -> PauliOp {
        PauliOp::single(m.n_qubits(), self.site, self.coupling)
    }

    /// Projector onto one syndrome pattern of the flipped pair.
    pub fn pattern_projector(&self, m: &StabilizerModel, pattern: usize) -> PauliPolynomial {
        let n = m.n_qubits();
        let half = Complex64::new(0.5, 0.0);
        let mut out = PauliPolynomial::identity(n);
        for (i, &s) in self.stabilizers.iter().enumerate() {
            let sign = if pattern >> i & 1 == 1 { -0.5 } else { 0.5 };
            let mut factor = PauliPolynomial::zero(n);
            factor.add_term(half, &PauliOp::identity(n));
            factor.add_term(Complex64::new(sign, 0.0), &m.stabilizers()[s].op);
            out = out.mul(&factor).expect("same qubit count");
        }
        out
    }

    pub fn projections(&self, m: &StabilizerModel) -> Projections {
        let minus = self.pattern_projector(m, 0);
        let zero = self
            .pattern_projector(m, 1)
            .add(&self.pattern_projector(m, 2))
            .expect("same qubit count");
        let plus = self.pattern_projector(m, 3);
        Projections { minus, zero, plus }
    }

    fn times_coupling(&self, m: &StabilizerModel, p: &PauliPolynomial) -> PauliPolynomial {
        PauliPolynomial::from_op(&self.coupling_op(m))
            .mul(p)
            .expect("same qubit count")
    }

    /// `a_j = σ_j P⁺`, the pair-annihilating part.
    pub fn lowering(&self, m: &StabilizerModel) -> PauliPolynomial {
        self.times_coupling(m, &self.pattern_projector(m, 3))
    }

    /// `a_j† = σ_j P⁻`, the pair-creating part.
    pub fn raising(&self, m: &StabilizerModel) -> PauliPolynomial {
        self.times_coupling(m, &self.pattern_projector(m, 0))
    }

    /// `a_j⁰ = σ_j P⁰`, the hopping part.
    pub fn dephasing(&self, m: &StabilizerModel) -> PauliPolynomial {
        self.times_coupling(m, &self.projections(m).zero)
    }

    /// Fourier components `S(ω) = σ_j Π_ω` with `Π_ω` the projector onto the
    /// patterns whose jump has Bohr frequency `ω`; sorted by `ω`.
    pub fn fourier_components(&self, m: &StabilizerModel) -> Vec<(f64, PauliPolynomial)> {
        let mut out: Vec<(f64, PauliPolynomial)> = Vec::new();
        for pattern in 0..4 {
            let w = self.frequencies[pattern];
            let proj = self.pattern_projector(m, pattern);
            match out.iter_mut().find(|(v, _)| (v - w).abs() < FREQ_TOL) {
                Some((_, p)) => *p = p.add(&proj).expect("same qubit count"),
                None => out.push((w, proj)),
            }
        }
        out.sort_by(|a, b| a.0.total_cmp(&b.0));
        out.into_iter()
            .map(|(w, proj)| (w, self.times_coupling(m, &proj)))
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DaviesJumpSet {
    coupling: Coupling,
    channels: Vec<JumpChannel>,
}

/// Coupling operators for every spin; for `Both` each spin carries a `σˣ` and
/// a `σᶻ` channel with independent baths.
pub fn build_jump_set(m: &StabilizerModel, coupling: Coupling) -> Result<DaviesJumpSet> {
    if m.kind() == ModelKind::IsingRing && coupling != Coupling::XOnly {
        // σᶻ commutes with every bond: such a bath only dephases at ω = 0
        // and never changes the syndrome
        return Err(Error::UnsupportedCoupling {
            coupling: coupling.name(),
            model: m.kind().name(),
        });
    }
    let mut channels = Vec::new();
    for p in [Pauli::X, Pauli::Z] {
        if !coupling.includes(p) {
            continue;
        }
        for sector in m.sectors().iter().filter(|s| s.kind.flipped_by() == p) {
            for (site, &[b0, b1]) in sector.site_pairs.iter().enumerate() {
                let stabilizers = [sector.stabilizers[b0], sector.stabilizers[b1]];
                let j = stabilizers.map(|s| m.stabilizers()[s].coupling);
                let mut frequencies = [0.0; 4];
                for (pattern, w) in frequencies.iter_mut().enumerate() {
                    let s0 = if pattern & 1 == 1 { -1.0 } else { 1.0 };
                    let s1 = if pattern & 2 == 2 { -1.0 } else { 1.0 };
                    *w = -2.0 * (j[0] * s0 + j[1] * s1);
                }
                channels.push(JumpChannel {
                    site,
                    coupling: p,
                    sector: sector.kind,
                    stabilizers,
                    bits: [b0, b1],
                    frequencies,
                });
            }
        }
    }
    Ok(DaviesJumpSet { coupling, channels })
}

impl DaviesJumpSet {
    pub fn coupling(&self) -> Coupling {
        self.coupling
    }

    pub fn channels(&self) -> &[JumpChannel] {
        &self.channels
    }

    /// Distinct Bohr frequencies over all channels, ascending.
    pub fn frequencies(&self) -> Vec<f64> {
        let mut out: Vec<f64> = Vec::new();
        for w in self.channels.iter().flat_map(|c| c.frequencies) {
            if !out.iter().any(|v| (v - w).abs() < FREQ_TOL) {
                out.push(w);
            }
        }
        out.sort_by(f64::total_cmp);
        out
    }

    /// The single positive Bohr frequency, if the set is `{0, ±ω*}` (or `{±ω*}`).
    pub fn omega_star(&self) -> Option<f64> {
        let positive: Vec<f64> = self.frequencies().into_iter().filter(|&w| w > FREQ_TOL).collect();
        match positive.as_slice() {
            [w] => Some(*w),
            _ => None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{build_ising_ring, build_kitaev_torus};

    fn close(a: &PauliPolynomial, b: &PauliPolynomial) -> bool {
        a.distance(b).unwrap() < 1e-14
    }

    #[test]
    fn ising_frequencies_are_zero_and_four() {
        let m = build_ising_ring(5).unwrap();
        let jumps = build_jump_set(&m, Coupling::XOnly).unwrap();
        assert_eq!(jumps.channels().len(), 5);
        assert_eq!(jumps.frequencies(), vec![-4.0, 0.0, 4.0]);
        assert_eq!(jumps.omega_star(), Some(4.0));
        assert!(build_jump_set(&m, Coupling::ZOnly).is_err());
        assert!(build_jump_set(&m, Coupling::Both).is_err());
    }

    #[test]
    fn hopping_projection_matches_pair_form() {
        // P⁰ = ½(1 − S S')
        let m = build_kitaev_torus(2).unwrap();
        let jumps = build_jump_set(&m, Coupling::Both).unwrap();
        let n = m.n_qubits();
        for ch in jumps.channels() {
            let [s0, s1] = ch.stabilizers;
            let pair = m.stabilizers()[s0].op.multiply(&m.stabilizers()[s1].op).unwrap();
            let mut expected = PauliPolynomial::zero(n);
            expected.add_term(Complex64::new(0.5, 0.0), &PauliOp::identity(n));
            expected.add_term(Complex64::new(-0.5, 0.0), &pair);
            assert!(close(&ch.projections(&m).zero, &expected));
        }
    }

    #[test]
    fn projections_resolve_identity_and_intertwine() {
        let m = build_ising_ring(4).unwrap();
        let jumps = build_jump_set(&m, Coupling::XOnly).unwrap();
        let n = m.n_qubits();
        let one = PauliPolynomial::identity(n);
        for ch in jumps.channels() {
            let p = ch.projections(&m);
            let total = p.minus.add(&p.zero).unwrap().add(&p.plus).unwrap();
            assert!(close(&total, &one));
            for a in [&p.minus, &p.zero, &p.plus] {
                assert!(close(&a.mul(a).unwrap(), a));
            }
            assert!(p.minus.mul(&p.plus).unwrap().is_empty());
            // a = σP⁺ = P⁻σ
            let sigma = PauliPolynomial::from_op(&ch.coupling_op(&m));
            let a = ch.lowering(&m);
            assert!(close(&a, &p.minus.mul(&sigma).unwrap()));
            // a†a + aa† + (a⁰)² = 1
            let a0 = ch.dephasing(&m);
            let sum = a
                .adjoint()
                .mul(&a)
                .unwrap()
                .add(&a.mul(&a.adjoint()).unwrap())
                .unwrap()
                .add(&a0.mul(&a0).unwrap())
                .unwrap();
            assert!(close(&sum, &one));
            assert!(close(&ch.raising(&m), &a.adjoint()));
        }
    }

    #[test]
    fn perturbed_couplings_split_frequencies() {
        let m = build_ising_ring(3)
            .unwrap()
            .with_couplings(&[1.0, 1.5, 2.0])
            .unwrap();
        let jumps = build_jump_set(&m, Coupling::XOnly).unwrap();
        assert_eq!(jumps.omega_star(), None);
        for ch in jumps.channels() {
            let w = ch.frequencies;
            assert!((w[0] + w[3]).abs() < 1e-15 && (w[1] + w[2]).abs() < 1e-15);
        }
    }

    #[test]
    fn coupling_parses() {
        assert_eq!("x".parse::<Coupling>().unwrap(), Coupling::XOnly);
        assert_eq!("Both".parse::<Coupling>().unwrap(), Coupling::Both);
        assert!("y".parse::<Coupling>().is_err());
    }
}
