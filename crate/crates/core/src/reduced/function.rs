use num_complex::Complex64;

use super::space::SyndromeSpace;
use crate::error::{Error, Result};
use crate::model::{StabilizerModel, SyndromeState};
use crate::pauli::{PauliOp, PauliPolynomial};

/// Largest space converted to an explicit stabilizer polynomial.
pub const MAX_POLYNOMIAL_BITS: usize = 16;

/// Tabulate `F` over the space.
pub fn tabulate<F>(space: &SyndromeSpace, f: F) -> Vec<f64>
where
    F: Fn(&[SyndromeState]) -> f64,
{
    (0..space.len()).map(|idx| f(&space.decode(idx))).collect()
}

/// `F(η) = ∏_{i ∈ stabilizers} s_i(η)` with `s_i = −1` on excited stabilizers;
/// the empty product is the constant 1.
pub fn stabilizer_product(
    m: &StabilizerModel,
    space: &SyndromeSpace,
    stabilizers: &[usize],
) -> Result<Vec<f64>> {
    let mut locs = Vec::with_capacity(stabilizers.len());
    for &i in stabilizers {
        let st = m.stabilizers().get(i).ok_or_else(|| {
            Error::InvalidFunction(format!("stabilizer index {i} out of range"))
        })?;
        let pos = space.sector_position(st.kind).ok_or_else(|| {
            Error::InvalidFunction(format!(
                "stabilizer {i} lies in the {} sector, which the dynamics does not track",
                st.kind.name()
            ))
        })?;
        let bit = space.sectors[pos]
            .stabilizers
            .iter()
            .position(|&s| s == i)
            .expect("stabilizer belongs to its sector");
        locs.push(space.source(pos, bit));
    }
    Ok((0..space.len())
        .map(|idx| {
            let odd = locs.iter().map(|s| s.read(idx)).sum::<usize>() % 2 == 1;
            if odd {
                -1.0
            } else {
                1.0
            }
        })
        .collect())
}

/// `F² = 1` pointwise.
pub fn validate_sign_function(f: &[f64]) -> Result<()> {
    if let Some((i, v)) = f
        .iter()
        .enumerate()
        .find(|(_, v)| ((*v).abs() - 1.0).abs() > 1e-12)
    {
        return Err(Error::InvalidFunction(format!(
            "value {v} at index {i}; encoded observables need F = ±1"
        )));
    }
    Ok(())
}

/// `F` written as a polynomial in the stabilizers, `Σ_A f̂(A) ∏_{i∈A} S_i`
/// over the independent stabilizers of the space.
pub fn function_polynomial(m: &StabilizerModel, space: &SyndromeSpace, f: &[f64]) -> Result<PauliPolynomial> {
    if f.len() != space.len() {
        return Err(Error::InvalidFunction(format!(
            "function has {} values, syndrome space has {}",
            f.len(),
            space.len()
        )));
    }
    if space.n_bits() > MAX_POLYNOMIAL_BITS {
        return Err(Error::Capacity {
            what: "syndrome function expansion (bits)",
            size: space.n_bits(),
            max: MAX_POLYNOMIAL_BITS,
            hint: "",
        });
    }
    // bit k of the index is the excitation of the k-th independent stabilizer,
    // so s_k = (−1)^bit and the expansion is a Walsh–Hadamard transform
    let mut coeffs = f.to_vec();
    let len = coeffs.len();
    let mut h = 1;
    while h < len {
        for start in (0..len).step_by(2 * h) {
            for i in start..start + h {
                let (a, b) = (coeffs[i], coeffs[i + h]);
                coeffs[i] = a + b;
                coeffs[i + h] = a - b;
            }
        }
        h *= 2;
    }
    let generators: Vec<&PauliOp> = space
        .sectors
        .iter()
        .flat_map(|s| s.stabilizers[..s.stabilizers.len() - 1].iter())
        .map(|&i| &m.stabilizers()[i].op)
        .collect();
    let n = m.n_qubits();
    let mut out = PauliPolynomial::zero(n);
    for (a, &c) in coeffs.iter().enumerate() {
        let c = c / len as f64;
        if c == 0.0 {
            continue;
        }
        let mut op = PauliOp::identity(n);
        for (k, g) in generators.iter().enumerate() {
            if a >> k & 1 == 1 {
                op = op.multiply(g)?;
            }
        }
        out.add_term(Complex64::new(c, 0.0), &op);
    }
    Ok(out)
}
