use serde::Serialize;

use super::StabilizerModel;
use crate::error::{Error, Result};
use crate::pauli::PauliOp;

#[derive(Copy, Clone, Debug, PartialEq, Serialize)]
pub struct StabilizerMonomialExpectation {
    pub value: f64,
    /// Whether the monomial is (up to phase) a product of stabilizers.
    pub reducible: bool,
}

fn require_hermitian(p: &PauliOp) -> Result<()> {
    if !p.is_hermitian() {
        return Err(Error::NotHermitian { op: p.to_string() });
    }
    Ok(())
}

/// Expectation in the ground state that gives every stabilizer product the
/// value 1 and every logical (times stabilizers) the value 0.
pub fn ground_expectation(
    m: &StabilizerModel,
    p: &PauliOp,
) -> Result<StabilizerMonomialExpectation> {
    require_hermitian(p)?;
    Ok(match m.decompose(p)? {
        Some((_, lambda)) => StabilizerMonomialExpectation {
            value: lambda.to_real().expect("hermitian product has real phase"),
            reducible: true,
        },
        None => StabilizerMonomialExpectation {
            value: 0.0,
            reducible: false,
        },
    })
}

/// `tr(ρ_β p)` for `ρ_β ∝ exp(β Σ J_i S_i)`.
///
/// Stabilizer eigenvalues `s_i = ±1` are independent apart from one parity
/// constraint per sector (`∏ s_i = 1`). For a subset `A` of a sector `T` with
/// `t_i = tanh(β J_i)` the constrained average is
/// `(∏_A t_i + ∏_{T∖A} t_i) / (1 + ∏_T t_i)`; sectors are independent.
pub fn gibbs_expectation(m: &StabilizerModel, p: &PauliOp, beta: f64) -> Result<f64> {
    if !(beta > 0.0) || !beta.is_finite() {
        return Err(Error::domain(format!("beta must be positive and finite, got {beta}")));
    }
    require_hermitian(p)?;
    let Some((members, lambda)) = m.decompose(p)? else {
        return Ok(0.0);
    };
    let mut chosen = vec![false; m.stabilizers().len()];
    for i in members {
        chosen[i] = true;
    }
    let mut value = lambda.to_real().expect("hermitian product has real phase");
    for sector in m.sectors() {
        let mut inside = 1.0;
        let mut outside = 1.0;
        for &i in &sector.stabilizers {
            let t = (beta * m.stabilizers()[i].coupling).tanh();
            if chosen[i] {
                inside *= t;
            } else {
                outside *= t;
            }
        }
        value *= (inside + outside) / (1.0 + inside * outside);
    }
    Ok(value)
}
