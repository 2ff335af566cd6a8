use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex64;

use super::PauliOp;
use crate::error::{Error, Result};

/// Complex linear combination of Pauli monomials.
///
/// Keys are stored with internal phase zero (`X^x Z^z`); the phase of any
/// inserted monomial is folded into its coefficient. Exact zeros are dropped.
#[derive(Clone, Debug, PartialEq)]
pub struct PauliPolynomial {
    n: usize,
    terms: BTreeMap<PauliOp, Complex64>,
}

impl PauliPolynomial {
    pub fn zero(n: usize) -> Self {
        PauliPolynomial {
            n,
            terms: BTreeMap::new(),
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_op(&PauliOp::identity(n))
    }

    pub fn from_op(op: &PauliOp) -> Self {
        let mut p = Self::zero(op.n_qubits());
        p.add_term(Complex64::new(1.0, 0.0), op);
        p
    }

    pub fn n_qubits(&self) -> usize {
        self.n
    }

    pub fn add_term(&mut self, coeff: Complex64, op: &PauliOp) {
        assert_eq!(op.n_qubits(), self.n, "qubit count mismatch");
        let c = coeff * op.xz_phase().to_complex();
        let key = op.xz_normalized();
        let entry = self.terms.entry(key).or_insert(Complex64::new(0.0, 0.0));
        *entry += c;
        if *entry == Complex64::new(0.0, 0.0) {
            let key = op.xz_normalized();
            self.terms.remove(&key);
        }
    }

    /// Terms as `(coefficient, monomial with internal phase zero)`.
    pub fn terms(&self) -> impl Iterator<Item = (&PauliOp, Complex64)> {
        self.terms.iter().map(|(k, v)| (k, *v))
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Coefficient of the bare monomial `X^x Z^z` of `op` (its phase is ignored).
    pub fn coefficient(&self, op: &PauliOp) -> Complex64 {
        self.terms
            .get(&op.xz_normalized())
            .copied()
            .unwrap_or(Complex64::new(0.0, 0.0))
    }

    pub fn scale(&self, c: Complex64) -> Self {
        let mut out = Self::zero(self.n);
        for (k, v) in &self.terms {
            out.add_term(v * c, k);
        }
        out
    }

    pub fn add(&self, other: &PauliPolynomial) -> Result<Self> {
        check(self.n, other.n)?;
        let mut out = self.clone();
        for (k, v) in &other.terms {
            out.add_term(*v, k);
        }
        Ok(out)
    }

    pub fn sub(&self, other: &PauliPolynomial) -> Result<Self> {
        self.add(&other.scale(Complex64::new(-1.0, 0.0)))
    }

    pub fn mul(&self, other: &PauliPolynomial) -> Result<Self> {
        check(self.n, other.n)?;
        let mut out = Self::zero(self.n);
        for (a, ca) in &self.terms {
            for (b, cb) in &other.terms {
                out.add_term(ca * cb, &a.mul_unchecked(b));
            }
        }
        Ok(out)
    }

    /// `[self, other] = self·other − other·self`.
    pub fn commutator(&self, other: &PauliPolynomial) -> Result<Self> {
        check(self.n, other.n)?;
        let mut out = Self::zero(self.n);
        for (a, ca) in &self.terms {
            for (b, cb) in &other.terms {
                if !a.commutes_unchecked(b) {
                    out.add_term(ca * cb * 2.0, &a.mul_unchecked(b));
                }
            }
        }
        Ok(out)
    }

    pub fn adjoint(&self) -> Self {
        let mut out = Self::zero(self.n);
        for (k, v) in &self.terms {
            out.add_term(v.conj(), &k.adjoint());
        }
        out
    }

    /// Union of the supports of all terms with nonzero coefficient.
    pub fn support(&self) -> Vec<usize> {
        let mut mark = vec![false; self.n];
        for k in self.terms.keys() {
            for s in k.support() {
                mark[s] = true;
            }
        }
        (0..self.n).filter(|&s| mark[s]).collect()
    }

    /// Largest coefficient modulus of `self − other`.
    pub fn distance(&self, other: &PauliPolynomial) -> Result<f64> {
        let d = self.sub(other)?;
        Ok(d.terms.values().map(|c| c.norm()).fold(0.0, f64::max))
    }
}

fn check(a: usize, b: usize) -> Result<()> {
    if a != b {
        return Err(Error::DimensionMismatch { left: a, right: b });
    }
    Ok(())
}

impl fmt::Display for PauliPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        let mut first = true;
        for (k, v) in &self.terms {
            if !first {
                f.write_str(" + ")?;
            }
            first = false;
            // keys carry internal phase 0; print in Y convention
            let shown = k.phase().to_complex();
            let c = v * shown;
            write!(f, "({:.6}{:+.6}i) [{}]", c.re, c.im, k.clone().with_phase(super::Phase::ONE))?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn commutator_of_x_and_z() {
        let x = PauliPolynomial::from_op(&PauliOp::parse(1, "X1").unwrap());
        let z = PauliPolynomial::from_op(&PauliOp::parse(1, "Z1").unwrap());
        // [X, Z] = -2i Y
        let c = x.commutator(&z).unwrap();
        let expect = PauliPolynomial::from_op(&PauliOp::parse(1, "-i Y1").unwrap())
            .scale(Complex64::new(2.0, 0.0));
        assert!(c.distance(&expect).unwrap() < 1e-15);
    }

    #[test]
    fn projector_is_idempotent() {
        let zz = PauliPolynomial::from_op(&PauliOp::parse(2, "Z1 Z2").unwrap());
        let half = Complex64::new(0.5, 0.0);
        let p = PauliPolynomial::identity(2).add(&zz).unwrap().scale(half);
        let p2 = p.mul(&p).unwrap();
        assert!(p2.distance(&p).unwrap() < 1e-15);
        assert_eq!(p.support(), vec![0, 1]);
    }

    #[test]
    fn cancelled_terms_disappear() {
        let x = PauliPolynomial::from_op(&PauliOp::parse(2, "X1").unwrap());
        assert!(x.sub(&x).unwrap().is_empty());
    }
}
