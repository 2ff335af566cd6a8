//! Exact diagonalization of small stabilizer Hamiltonians, used as an
//! independent reference for spectra, Bohr frequencies and thermal averages.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::model::StabilizerModel;
use crate::pauli::PauliOp;

pub const MAX_ED_QUBITS: usize = 10;

const LEVEL_TOL: f64 = 1e-8;
const ELEMENT_TOL: f64 = 1e-9;

/// `|b⟩ ↦ c (−1)^{|z∧b|} |b ⊕ x⟩` for the monomial `op = c X^x Z^z`.
fn monomial_action(op: &PauliOp) -> (usize, usize, Complex64) {
    (
        op.x_mask().first().copied().unwrap_or(0) as usize,
        op.z_mask().first().copied().unwrap_or(0) as usize,
        op.xz_phase().to_complex(),
    )
}

fn sign(z: usize, b: usize) -> f64 {
    if (z & b).count_ones() % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Dense real `H = −Σ J_i S_i`.
pub fn hamiltonian_matrix(m: &StabilizerModel) -> Result<DMatrix<f64>> {
    let n = m.n_qubits();
    if n > MAX_ED_QUBITS {
        return Err(Error::Capacity {
            what: "exact diagonalization (qubits)",
            size: n,
            max: MAX_ED_QUBITS,
            hint: "",
        });
    }
    let dim = 1usize << n;
    let mut h = DMatrix::<f64>::zeros(dim, dim);
    for s in m.stabilizers() {
        let (x, z, c) = monomial_action(&s.op);
        let c = c.re;
        for b in 0..dim {
            h[(b ^ x, b)] -= s.coupling * c * sign(z, b);
        }
    }
    Ok(h)
}

#[derive(Clone, Debug)]
pub struct ExactSpectrum {
    n: usize,
    energies: Vec<f64>,
    /// Eigenvectors as columns, in the order of `energies`.
    vectors: DMatrix<f64>,
}

pub fn diagonalize(m: &StabilizerModel) -> Result<ExactSpectrum> {
    let h = hamiltonian_matrix(m)?;
    let eig = SymmetricEigen::new(h);
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let energies = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = DMatrix::from_fn(eig.eigenvectors.nrows(), order.len(), |r, c| {
        eig.eigenvectors[(r, order[c])]
    });
    Ok(ExactSpectrum {
        n: m.n_qubits(),
        energies,
        vectors,
    })
}

impl ExactSpectrum {
    pub fn energies(&self) -> &[f64] {
        &self.energies
    }

    /// Distinct eigenvalues with multiplicities, ascending.
    pub fn levels(&self) -> Vec<(f64, usize)> {
        let mut out: Vec<(f64, usize)> = Vec::new();
        for &e in &self.energies {
            match out.last_mut() {
                Some((v, k)) if (e - *v).abs() < LEVEL_TOL => *k += 1,
                _ => out.push((e, 1)),
            }
        }
        out
    }

    /// Smallest gap between consecutive distinct levels.
    pub fn energy_step(&self) -> Option<f64> {
        self.levels()
            .windows(2)
            .map(|w| w[1].0 - w[0].0)
            .min_by(f64::total_cmp)
    }

    fn apply(&self, op: &PauliOp, v: &[f64]) -> Vec<Complex64> {
        let (x, z, c) = monomial_action(op);
        let mut out = vec![Complex64::new(0.0, 0.0); v.len()];
        for (b, &vb) in v.iter().enumerate() {
            out[b ^ x] += c * sign(z, b) * vb;
        }
        out
    }

    /// Bohr frequencies `ω = E_b − E_a` over eigenpairs with `⟨a|op|b⟩ ≠ 0`,
    /// so that `e^{itH} op e^{−itH} = Σ_ω e^{−iωt} op(ω)`.
    pub fn bohr_frequencies(&self, op: &PauliOp) -> Result<Vec<f64>> {
        if op.n_qubits() != self.n {
            return Err(Error::DimensionMismatch {
                left: op.n_qubits(),
                right: self.n,
            });
        }
        let dim = self.energies.len();
        let mut out: Vec<f64> = Vec::new();
        for b in 0..dim {
            let col: Vec<f64> = self.vectors.column(b).iter().copied().collect();
            let img = self.apply(op, &col);
            for a in 0..dim {
                let elem: Complex64 = self
                    .vectors
                    .column(a)
                    .iter()
                    .zip(&img)
                    .map(|(u, w)| w * *u)
                    .sum();
                if elem.norm() > ELEMENT_TOL {
                    let w = self.energies[b] - self.energies[a];
                    if !out.iter().any(|v| (v - w).abs() < LEVEL_TOL) {
                        out.push(w);
                    }
                }
            }
        }
        out.sort_by(f64::total_cmp);
        Ok(out)
    }

    /// `tr(e^{−βH} op) / tr(e^{−βH})`.
    pub fn thermal_expectation(&self, op: &PauliOp, beta: f64) -> Result<Complex64> {
        if op.n_qubits() != self.n {
            return Err(Error::DimensionMismatch {
                left: op.n_qubits(),
                right: self.n,
            });
        }
        let e0 = self.energies[0];
        let mut num = Complex64::new(0.0, 0.0);
        let mut z = 0.0;
        for (k, &e) in self.energies.iter().enumerate() {
            let w = (-beta * (e - e0)).exp();
            if w == 0.0 {
                continue;
            }
            let v: Vec<f64> = self.vectors.column(k).iter().copied().collect();
            let img = self.apply(op, &v);
            let diag: Complex64 = v.iter().zip(&img).map(|(u, w)| w * *u).sum();
            num += w * diag;
            z += w;
        }
        Ok(num / z)
    }
}
