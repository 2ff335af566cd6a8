use num_complex::Complex64;
use rand::Rng;

use crate::error::{Error, Result};
use crate::pauli::{PauliOp, PauliPolynomial};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Largest number of qubits for dense observables.
pub const MAX_DENSE_QUBITS: usize = 9;

pub(crate) fn check_capacity(n: usize) -> Result<()> {
    if n > MAX_DENSE_QUBITS {
        return Err(Error::Capacity {
            what: "dense observable space (qubits)",
            size: n,
            max: MAX_DENSE_QUBITS,
            hint: "; use the reduced syndrome dynamics or Monte Carlo instead",
        });
    }
    Ok(())
}

/// Dense `2ⁿ × 2ⁿ` operator, row-major, in the computational basis. Bit `j`
/// of a basis index is the `σᶻ` eigenvalue of site `j` (0 ↦ +1).
#[derive(Clone, Debug, PartialEq)]
pub struct Observable {
    n: usize,
    dim: usize,
    data: Vec<Complex64>,
}

impl Observable {
    pub fn zeros(n: usize) -> Result<Self> {
        check_capacity(n)?;
        let dim = 1usize << n;
        Ok(Observable {
            n,
            dim,
            data: vec![ZERO; dim * dim],
        })
    }

    pub fn identity(n: usize) -> Result<Self> {
        let mut o = Self::zeros(n)?;
        for r in 0..o.dim {
            o.data[r * o.dim + r] = Complex64::new(1.0, 0.0);
        }
        Ok(o)
    }

    pub fn from_data(n: usize, data: Vec<Complex64>) -> Result<Self> {
        check_capacity(n)?;
        let dim = 1usize << n;
        if data.len() != dim * dim {
            return Err(Error::domain(format!(
                "expected {} entries for {n} qubits, got {}",
                dim * dim,
                data.len()
            )));
        }
        Ok(Observable { n, dim, data })
    }

    pub fn from_pauli(op: &PauliOp) -> Result<Self> {
        let mut o = Self::zeros(op.n_qubits())?;
        o.add_pauli(Complex64::new(1.0, 0.0), op);
        Ok(o)
    }

    pub fn from_polynomial(p: &PauliPolynomial) -> Result<Self> {
        let mut o = Self::zeros(p.n_qubits())?;
        for (op, c) in p.terms() {
            o.add_pauli(c, op);
        }
        Ok(o)
    }

    /// `self += c · op`. `i^k X^x Z^z` sends `|b⟩` to `i^k (−1)^{|z∧b|} |b ⊕ x⟩`.
    pub fn add_pauli(&mut self, c: Complex64, op: &PauliOp) {
        assert_eq!(op.n_qubits(), self.n);
        let x = op.x_mask().first().copied().unwrap_or(0) as usize;
        let z = op.z_mask().first().copied().unwrap_or(0) as usize;
        let c = c * op.xz_phase().to_complex();
        for b in 0..self.dim {
            let sign = if (z & b).count_ones() % 2 == 0 { 1.0 } else { -1.0 };
            self.data[(b ^ x) * self.dim + b] += c * sign;
        }
    }

    /// Entries iid uniform in the unit square of the complex plane, shifted to mean zero.
    pub fn random<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<Self> {
        let mut o = Self::zeros(n)?;
        for v in o.data.iter_mut() {
            *v = Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5);
        }
        Ok(o)
    }

    pub fn n_qubits(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [Complex64] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<Complex64> {
        self.data
    }

    pub fn get(&self, r: usize, c: usize) -> Complex64 {
        self.data[r * self.dim + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: Complex64) {
        self.data[r * self.dim + c] = v;
    }

    pub fn scale(&self, c: Complex64) -> Self {
        let mut o = self.clone();
        o.data.iter_mut().for_each(|v| *v *= c);
        o
    }

    pub fn add(&self, other: &Observable) -> Self {
        assert_eq!(self.n, other.n);
        let mut o = self.clone();
        o.data.iter_mut().zip(&other.data).for_each(|(a, b)| *a += b);
        o
    }

    pub fn sub(&self, other: &Observable) -> Self {
        assert_eq!(self.n, other.n);
        let mut o = self.clone();
        o.data.iter_mut().zip(&other.data).for_each(|(a, b)| *a -= b);
        o
    }

    pub fn adjoint(&self) -> Self {
        let mut o = self.clone();
        for r in 0..self.dim {
            for c in 0..self.dim {
                o.data[r * self.dim + c] = self.data[c * self.dim + r].conj();
            }
        }
        o
    }

    pub fn matmul(&self, other: &Observable) -> Self {
        assert_eq!(self.n, other.n);
        let d = self.dim;
        let mut out = vec![ZERO; d * d];
        for r in 0..d {
            let row = &mut out[r * d..(r + 1) * d];
            for k in 0..d {
                let a = self.data[r * d + k];
                if a == ZERO {
                    continue;
                }
                let orow = &other.data[k * d..(k + 1) * d];
                for (o, b) in row.iter_mut().zip(orow) {
                    *o += a * b;
                }
            }
        }
        Observable {
            n: self.n,
            dim: d,
            data: out,
        }
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dim).map(|r| self.data[r * self.dim + r]).sum()
    }

    /// `tr(self · other)` without forming the product.
    pub fn trace_product(&self, other: &Observable) -> Complex64 {
        let d = self.dim;
        let mut acc = ZERO;
        for r in 0..d {
            for c in 0..d {
                acc += self.data[r * d + c] * other.data[c * d + r];
            }
        }
        acc
    }

    /// `[self, other]`.
    pub fn commutator(&self, other: &Observable) -> Self {
        self.matmul(other).sub(&other.matmul(self))
    }

    /// Hilbert–Schmidt norm scaled so that the identity has norm 1.
    pub fn normalized_norm(&self) -> f64 {
        (self.data.iter().map(|v| v.norm_sqr()).sum::<f64>() / self.dim as f64).sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Normalized Hilbert–Schmidt distance.
    pub fn distance(&self, other: &Observable) -> f64 {
        self.sub(other).normalized_norm()
    }

    /// `self ↦ W self W` with `W = H^{⊗n}` the normalized Hadamard transform.
    pub fn hadamard_conjugate(&self) -> Self {
        let mut o = self.clone();
        hadamard_conjugate_in_place(&mut o.data, self.n);
        o
    }
}

/// In-place normalized fast Walsh–Hadamard transform of a length-`2ⁿ` slice.
pub(crate) fn fwht(v: &mut [Complex64]) {
    let len = v.len();
    let mut h = 1;
    while h < len {
        for start in (0..len).step_by(2 * h) {
            for i in start..start + h {
                let (a, b) = (v[i], v[i + h]);
                v[i] = a + b;
                v[i + h] = a - b;
            }
        }
        h *= 2;
    }
    let s = 1.0 / (len as f64).sqrt();
    v.iter_mut().for_each(|x| *x *= s);
}

/// `M ↦ W M W` on a row-major `2ⁿ × 2ⁿ` buffer.
pub(crate) fn hadamard_conjugate_in_place(data: &mut [Complex64], n: usize) {
    let dim = 1usize << n;
    for row in data.chunks_mut(dim) {
        fwht(row);
    }
    let mut col = vec![ZERO; dim];
    for c in 0..dim {
        for r in 0..dim {
            col[r] = data[r * dim + c];
        }
        fwht(&mut col);
        for r in 0..dim {
            data[r * dim + c] = col[r];
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pauli::Pauli;

    #[test]
    fn pauli_matrices() {
        let y = Observable::from_pauli(&PauliOp::single(1, 0, Pauli::Y)).unwrap();
        // Y = [[0, -i], [i, 0]] with |0⟩ = spin up
        assert_eq!(y.get(0, 1), Complex64::new(0.0, -1.0));
        assert_eq!(y.get(1, 0), Complex64::new(0.0, 1.0));
        let z2 = Observable::from_pauli(&PauliOp::single(2, 1, Pauli::Z)).unwrap();
        assert_eq!(z2.get(2, 2), Complex64::new(-1.0, 0.0));
        assert_eq!(z2.get(1, 1), Complex64::new(1.0, 0.0));
    }

    #[test]
    fn dense_product_matches_symbolic() {
        let a = PauliOp::parse(3, "X1 Y2").unwrap();
        let b = PauliOp::parse(3, "Z1 Y2 X3").unwrap();
        let dense = Observable::from_pauli(&a)
            .unwrap()
            .matmul(&Observable::from_pauli(&b).unwrap());
        let sym = Observable::from_pauli(&a.multiply(&b).unwrap()).unwrap();
        assert!(dense.distance(&sym) < 1e-15);
    }

    #[test]
    fn hadamard_swaps_x_and_z() {
        let x = Observable::from_pauli(&PauliOp::parse(2, "X1 Z2").unwrap()).unwrap();
        let z = Observable::from_pauli(&PauliOp::parse(2, "Z1 X2").unwrap()).unwrap();
        assert!(x.hadamard_conjugate().distance(&z) < 1e-14);
    }

    #[test]
    fn capacity_is_enforced() {
        assert!(matches!(
            Observable::zeros(MAX_DENSE_QUBITS + 1),
            Err(Error::Capacity { .. })
        ));
    }
}
