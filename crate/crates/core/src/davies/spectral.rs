use serde::Serialize;

use crate::error::{Error, Result};

const FREQ_TOL: f64 = 1e-9;
const KMS_RTOL: f64 = 1e-12;

/// Bath rate function `ĥ(ω)` with the thermal ratio `ĥ(−ω) = e^{−βω} ĥ(ω)`.
///
/// Either a uniform rule (`ĥ(ω) = γ` for every `ω > 0`) or an explicit table
/// of positive frequencies; the negative side is always derived from the ratio.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SpectralFunction {
    beta: f64,
    zero_rate: f64,
    uniform: Option<f64>,
    positive: Vec<(f64, f64)>,
}

impl SpectralFunction {
    /// `ĥ(ω) = γ` for `ω > 0`, `ĥ(0) = γ₀`, `ĥ(−ω) = γ e^{−βω}`.
    pub fn thermal(beta: f64, gamma: f64, gamma_zero: f64) -> Result<Self> {
        check_beta(beta)?;
        check_rate(gamma)?;
        check_rate(gamma_zero)?;
        Ok(SpectralFunction {
            beta,
            zero_rate: gamma_zero,
            uniform: Some(gamma),
            positive: Vec::new(),
        })
    }

    /// Explicit `(ω, ĥ(ω))` pairs, either sign, plus `ĥ(0)`. Where both `ω` and
    /// `−ω` are listed the pair must satisfy the thermal ratio; a frequency listed
    /// on one side only is completed from the ratio.
    pub fn from_table(beta: f64, zero_rate: f64, entries: &[(f64, f64)]) -> Result<Self> {
        check_beta(beta)?;
        check_rate(zero_rate)?;
        let mut positive: Vec<(f64, f64)> = Vec::new();
        for &(omega, rate) in entries {
            check_rate(rate)?;
            if !omega.is_finite() {
                return Err(Error::domain(format!("frequency {omega} is not finite")));
            }
            if omega.abs() < FREQ_TOL {
                return Err(Error::domain("put the zero-frequency rate in zero_rate"));
            }
            let (w, up) = if omega > 0.0 {
                (omega, rate)
            } else {
                // ĥ(ω) = e^{β|ω|} ĥ(−|ω|)
                (-omega, rate * (beta * -omega).exp())
            };
            if let Some(&(_, existing)) = positive.iter().find(|(p, _)| (p - w).abs() < FREQ_TOL) {
                let expected = existing * (-beta * w).exp();
                let minus = up * (-beta * w).exp();
                if (existing - up).abs() > KMS_RTOL * existing.abs().max(up.abs()) {
                    return Err(Error::KmsViolation {
                        omega: w,
                        minus,
                        expected,
                    });
                }
            } else {
                positive.push((w, up));
            }
        }
        positive.sort_by(|a, b| a.0.total_cmp(&b.0));
        Ok(SpectralFunction {
            beta,
            zero_rate,
            uniform: None,
            positive,
        })
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn zero_rate(&self) -> f64 {
        self.zero_rate
    }

    /// `ĥ(ω)`.
    pub fn rate(&self, omega: f64) -> Result<f64> {
        if omega.abs() < FREQ_TOL {
            return Ok(self.zero_rate);
        }
        let w = omega.abs();
        let up = match self.uniform {
            Some(g) => g,
            None => self
                .positive
                .iter()
                .find(|(p, _)| (p - w).abs() < FREQ_TOL)
                .map(|&(_, r)| r)
                .ok_or(Error::MissingFrequency { omega })?,
        };
        Ok(if omega > 0.0 {
            up
        } else {
            up * (-self.beta * w).exp()
        })
    }
}

fn check_beta(beta: f64) -> Result<()> {
    if !(beta >= 0.0) || !beta.is_finite() {
        return Err(Error::domain(format!("beta must be finite and non-negative, got {beta}")));
    }
    Ok(())
}

fn check_rate(r: f64) -> Result<()> {
    if !(r >= 0.0) || !r.is_finite() {
        return Err(Error::domain(format!("rates must be finite and non-negative, got {r}")));
    }
    Ok(())
}
