//! Stabilizer Hamiltonians: the Ising ring and the toric code.
//!
//! Both models have the form `H = −Σ_i J_i S_i` with mutually commuting Pauli
//! stabilizers `S_i`. Stabilizers are grouped into sectors by the single-site
//! Pauli that flips them: ring bonds and plaquettes (`Z` type) are flipped by
//! `σˣ`, stars (`X` type) by `σᶻ`. Every site sits in exactly two stabilizers
//! of each sector it belongs to.
//!
//! Torus layout for edge length `K`: vertices `(r, c)` with `r, c ∈ 0..K`,
//! horizontal edge `h(r,c)` joins `(r,c)`–`(r,c+1)` and has index
//! `2(rK + c)`, vertical edge `v(r,c)` joins `(r,c)`–`(r+1,c)` and has index
//! `2(rK + c) + 1`. The star at `(r,c)` holds the four edges meeting at the
//! vertex; the plaquette at `(r,c)` holds the edges of the face whose top-left
//! corner is `(r,c)`.

mod expectation;
mod syndrome;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pauli::gf2::{BitVec, Gf2Basis};
use crate::pauli::{Pauli, PauliOp, PauliPolynomial};

pub use expectation::{ground_expectation, gibbs_expectation, StabilizerMonomialExpectation};
pub use syndrome::{hamiltonian_energy, SyndromeState};

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    IsingRing,
    KitaevTorus,
}

impl ModelKind {
    pub fn name(self) -> &'static str {
        match self {
            ModelKind::IsingRing => "ising",
            ModelKind::KitaevTorus => "kitaev",
        }
    }
}

/// Which family a stabilizer belongs to. Also names the syndrome sector.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StabilizerKind {
    Bond,
    Star,
    Plaquette,
}

impl StabilizerKind {
    /// Single-site Pauli that anticommutes with stabilizers of this kind.
    pub fn flipped_by(self) -> Pauli {
        match self {
            StabilizerKind::Bond | StabilizerKind::Plaquette => Pauli::X,
            StabilizerKind::Star => Pauli::Z,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            StabilizerKind::Bond => "bond",
            StabilizerKind::Star => "star",
            StabilizerKind::Plaquette => "plaquette",
        }
    }
}

#[derive(Clone, Debug)]
pub struct Stabilizer {
    pub kind: StabilizerKind,
    pub op: PauliOp,
    pub sites: Vec<usize>,
    pub coupling: f64,
}

#[derive(Clone, Debug)]
pub struct Logical {
    pub name: String,
    pub op: PauliOp,
}

/// Stabilizers of one kind together with the site adjacency.
#[derive(Clone, Debug)]
pub struct Sector {
    pub kind: StabilizerKind,
    /// Model indices of the stabilizers in this sector; position in this list
    /// is the syndrome bit.
    pub stabilizers: Vec<usize>,
    /// For every site, the two syndrome bits it flips.
    pub site_pairs: Vec<[usize; 2]>,
}

impl Sector {
    pub fn len(&self) -> usize {
        self.stabilizers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.stabilizers.is_empty()
    }
}

#[derive(Clone, Debug)]
pub struct StabilizerModel {
    kind: ModelKind,
    size: usize,
    n_qubits: usize,
    stabilizers: Vec<Stabilizer>,
    constraints: Vec<Vec<usize>>,
    logicals: Vec<Logical>,
    independent_basis: Vec<usize>,
    sectors: Vec<Sector>,
    basis: Gf2Basis,
}

/// Ring of `n ≥ 3` spins with bonds `Z_b = σᶻ_j σᶻ_{j+1}`, site `n+1 ≡ 1`.
pub fn build_ising_ring(n: usize) -> Result<StabilizerModel> {
    if n < 3 {
        return Err(Error::InvalidSize {
            what: "Ising ring",
            size: n,
            min: 3,
        });
    }
    let stabilizers = (0..n)
        .map(|b| {
            let sites = vec![b, (b + 1) % n];
            Stabilizer {
                kind: StabilizerKind::Bond,
                op: PauliOp::uniform(n, &sites, Pauli::Z),
                sites,
                coupling: 1.0,
            }
        })
        .collect();
    let all_x: Vec<usize> = (0..n).collect();
    let x = PauliOp::uniform(n, &all_x, Pauli::X);
    let y = x.clone().with_site(0, Pauli::Y);
    let z = PauliOp::single(n, 0, Pauli::Z);
    let logicals = vec![
        Logical { name: "X".into(), op: x },
        Logical { name: "Y".into(), op: y },
        Logical { name: "Z".into(), op: z },
    ];
    Ok(StabilizerModel::assemble(
        ModelKind::IsingRing,
        n,
        n,
        stabilizers,
        logicals,
    ))
}

/// Toric code on a `K × K` torus, `N = 2K²` spins on the edges.
pub fn build_kitaev_torus(k: usize) -> Result<StabilizerModel> {
    if k < 2 {
        return Err(Error::InvalidSize {
            what: "Kitaev torus",
            size: k,
            min: 2,
        });
    }
    let n = 2 * k * k;
    let h = |r: usize, c: usize| 2 * ((r % k) * k + (c % k));
    let v = |r: usize, c: usize| 2 * ((r % k) * k + (c % k)) + 1;
    let mut stabilizers = Vec::with_capacity(n);
    for r in 0..k {
        for c in 0..k {
            let sites = sorted(vec![h(r, c), h(r, c + k - 1), v(r, c), v(r + k - 1, c)]);
            stabilizers.push(Stabilizer {
                kind: StabilizerKind::Star,
                op: PauliOp::uniform(n, &sites, Pauli::X),
                sites,
                coupling: 1.0,
            });
        }
    }
    for r in 0..k {
        for c in 0..k {
            let sites = sorted(vec![h(r, c), h(r + 1, c), v(r, c), v(r, c + 1)]);
            stabilizers.push(Stabilizer {
                kind: StabilizerKind::Plaquette,
                op: PauliOp::uniform(n, &sites, Pauli::Z),
                sites,
                coupling: 1.0,
            });
        }
    }
    let row0: Vec<usize> = (0..k).map(|c| h(0, c)).collect();
    let col0_v: Vec<usize> = (0..k).map(|r| v(r, 0)).collect();
    let col0_h: Vec<usize> = (0..k).map(|r| h(r, 0)).collect();
    let row0_v: Vec<usize> = (0..k).map(|c| v(0, c)).collect();
    let logicals = vec![
        Logical {
            name: "X1".into(),
            op: PauliOp::uniform(n, &col0_h, Pauli::X),
        },
        Logical {
            name: "Z1".into(),
            op: PauliOp::uniform(n, &row0, Pauli::Z),
        },
        Logical {
            name: "X2".into(),
            op: PauliOp::uniform(n, &row0_v, Pauli::X),
        },
        Logical {
            name: "Z2".into(),
            op: PauliOp::uniform(n, &col0_v, Pauli::Z),
        },
    ];
    Ok(StabilizerModel::assemble(
        ModelKind::KitaevTorus,
        k,
        n,
        stabilizers,
        logicals,
    ))
}

fn sorted(mut v: Vec<usize>) -> Vec<usize> {
    v.sort_unstable();
    v
}

impl StabilizerModel {
    fn assemble(
        kind: ModelKind,
        size: usize,
        n_qubits: usize,
        stabilizers: Vec<Stabilizer>,
        logicals: Vec<Logical>,
    ) -> Self {
        let mut sectors: Vec<Sector> = Vec::new();
        for kind in [
            StabilizerKind::Bond,
            StabilizerKind::Star,
            StabilizerKind::Plaquette,
        ] {
            let members: Vec<usize> = (0..stabilizers.len())
                .filter(|&i| stabilizers[i].kind == kind)
                .collect();
            if members.is_empty() {
                continue;
            }
            let mut touching: Vec<Vec<usize>> = vec![Vec::new(); n_qubits];
            for (bit, &i) in members.iter().enumerate() {
                for &s in &stabilizers[i].sites {
                    touching[s].push(bit);
                }
            }
            let site_pairs = touching
                .into_iter()
                .enumerate()
                .map(|(s, t)| {
                    assert_eq!(t.len(), 2, "site {s} touches {} {kind:?} stabilizers", t.len());
                    [t[0], t[1]]
                })
                .collect();
            sectors.push(Sector {
                kind,
                stabilizers: members,
                site_pairs,
            });
        }
        // each sector multiplies to the identity; dropping its last member
        // leaves an independent set
        let constraints: Vec<Vec<usize>> =
            sectors.iter().map(|s| s.stabilizers.clone()).collect();
        let independent_basis: Vec<usize> = sectors
            .iter()
            .flat_map(|s| s.stabilizers[..s.len() - 1].iter().copied())
            .collect();
        let rows: Vec<BitVec> = stabilizers.iter().map(|s| s.op.symplectic_row()).collect();
        let basis = Gf2Basis::new(&rows);
        StabilizerModel {
            kind,
            size,
            n_qubits,
            stabilizers,
            constraints,
            logicals,
            independent_basis,
            sectors,
            basis,
        }
    }

    /// Replace the couplings `J_i > 0` of `H = −Σ J_i S_i`, one per stabilizer.
    pub fn with_couplings(mut self, couplings: &[f64]) -> Result<Self> {
        if couplings.len() != self.stabilizers.len() {
            return Err(Error::domain(format!(
                "expected {} couplings, got {}",
                self.stabilizers.len(),
                couplings.len()
            )));
        }
        if let Some(bad) = couplings.iter().find(|&&j| !(j > 0.0 && j.is_finite())) {
            return Err(Error::domain(format!("coupling {bad} must be positive")));
        }
        for (s, &j) in self.stabilizers.iter_mut().zip(couplings) {
            s.coupling = j;
        }
        Ok(self)
    }

    pub fn kind(&self) -> ModelKind {
        self.kind
    }

    /// Ring length `N` or torus edge length `K`.
    pub fn size(&self) -> usize {
        self.size
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn stabilizers(&self) -> &[Stabilizer] {
        &self.stabilizers
    }

    pub fn constraints(&self) -> &[Vec<usize>] {
        &self.constraints
    }

    pub fn logicals(&self) -> &[Logical] {
        &self.logicals
    }

    pub fn logical(&self, name: &str) -> Option<&PauliOp> {
        self.logicals.iter().find(|l| l.name == name).map(|l| &l.op)
    }

    pub fn independent_basis(&self) -> &[usize] {
        &self.independent_basis
    }

    pub fn sectors(&self) -> &[Sector] {
        &self.sectors
    }

    pub fn sector(&self, kind: StabilizerKind) -> Option<&Sector> {
        self.sectors.iter().find(|s| s.kind == kind)
    }

    pub fn has_unit_couplings(&self) -> bool {
        self.stabilizers.iter().all(|s| s.coupling == 1.0)
    }

    /// `H = −Σ J_i S_i`.
    pub fn hamiltonian(&self) -> PauliPolynomial {
        let mut h = PauliPolynomial::zero(self.n_qubits);
        for s in &self.stabilizers {
            h.add_term(num_complex::Complex64::new(-s.coupling, 0.0), &s.op);
        }
        h
    }

    /// Rank over GF(2) of the stabilizer check matrix.
    pub fn stabilizer_rank(&self) -> usize {
        self.basis.rank()
    }

    /// Write `p = λ · ∏_{i ∈ S} S_i` if possible; returns `(S, λ)`.
    pub fn decompose(&self, p: &PauliOp) -> Result<Option<(Vec<usize>, crate::pauli::Phase)>> {
        if p.n_qubits() != self.n_qubits {
            return Err(Error::DimensionMismatch {
                left: p.n_qubits(),
                right: self.n_qubits,
            });
        }
        let Some(combo) = self.basis.decompose(&p.symplectic_row()) else {
            return Ok(None);
        };
        let members: Vec<usize> = combo.ones().collect();
        let mut prod = PauliOp::identity(self.n_qubits);
        for &i in &members {
            prod = prod.mul_unchecked(&self.stabilizers[i].op);
        }
        // p = λ · prod with identical masks, so the internal phases differ by λ
        let lambda = crate::pauli::Phase::from_power(
            (p.xz_phase().power() + 4 - prod.xz_phase().power()) & 3,
        );
        Ok(Some((members, lambda)))
    }

    /// Whether `p` commutes with every stabilizer.
    pub fn commutes_with_stabilizers(&self, p: &PauliOp) -> Result<bool> {
        for s in &self.stabilizers {
            if !s.op.commutes(p)? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    pub fn describe(&self) -> ModelDescription {
        ModelDescription {
            kind: self.kind,
            size: self.size,
            n_qubits: self.n_qubits,
            stabilizers: self
                .stabilizers
                .iter()
                .map(|s| StabilizerDescription {
                    kind: s.kind,
                    sites: s.sites.iter().map(|x| x + 1).collect(),
                    coupling: s.coupling,
                })
                .collect(),
            constraints: self.constraints.clone(),
            logicals: self
                .logicals
                .iter()
                .map(|l| LogicalDescription {
                    name: l.name.clone(),
                    pauli: l.op.to_string(),
                    sites: l.op.support().iter().map(|x| x + 1).collect(),
                })
                .collect(),
            independent_basis: self.independent_basis.clone(),
        }
    }
}

/// JSON-friendly export; sites are 1-based, stabilizer indices 0-based.
#[derive(Clone, Debug, Serialize)]
pub struct ModelDescription {
    pub kind: ModelKind,
    pub size: usize,
    pub n_qubits: usize,
    pub stabilizers: Vec<StabilizerDescription>,
    pub constraints: Vec<Vec<usize>>,
    pub logicals: Vec<LogicalDescription>,
    pub independent_basis: Vec<usize>,
}

#[derive(Clone, Debug, Serialize)]
pub struct StabilizerDescription {
    pub kind: StabilizerKind,
    pub sites: Vec<usize>,
    pub coupling: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct LogicalDescription {
    pub name: String,
    pub pauli: String,
    pub sites: Vec<usize>,
}
