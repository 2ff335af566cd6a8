use num_complex::Complex64;
use rayon::prelude::*;

use super::jumps::{DaviesJumpSet, JumpChannel};
use super::observable::{check_capacity, hadamard_conjugate_in_place, Observable};
use super::spectral::SpectralFunction;
use crate::error::{Error, Result};
use crate::expm::LinearOperator;
use crate::model::StabilizerModel;
use crate::pauli::Pauli;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const FREQ_TOL: f64 = 1e-9;

/// A channel as seen in a frame where its coupling operator is `σˣ_site`.
#[derive(Clone, Debug)]
struct FrameChannel {
    flip: usize,
    /// Syndrome pattern (`e₀ + 2e₁`) of each basis state.
    pattern: Vec<u8>,
    /// Index of the distinct Bohr frequency of each pattern.
    class: [u8; 4],
    rate: [f64; 4],
}

/// Everything diagonal in one basis: the stabilizers written as `Z`-strings
/// there, and the channels that flip them.
#[derive(Clone, Debug)]
struct Frame {
    energy: Vec<f64>,
    channels: Vec<FrameChannel>,
}

impl Frame {
    fn new(
        dim: usize,
        stabilizer_masks: &[(usize, usize, f64)],
        channels: &[&JumpChannel],
        h: &SpectralFunction,
    ) -> Result<Self> {
        let parity = |r: usize, mask: usize| (r & mask).count_ones() & 1 == 1;
        let energy: Vec<f64> = (0..dim)
            .map(|r| {
                stabilizer_masks
                    .iter()
                    .map(|&(_, mask, j)| if parity(r, mask) { j } else { -j })
                    .sum()
            })
            .collect();
        let mask_of = |s: usize| {
            stabilizer_masks
                .iter()
                .find(|&&(i, _, _)| i == s)
                .map(|&(_, mask, _)| mask)
                .expect("channel stabilizer lives in this frame")
        };
        let mut out = Vec::with_capacity(channels.len());
        for ch in channels {
            let masks = ch.stabilizers.map(mask_of);
            let pattern: Vec<u8> = (0..dim)
                .map(|r| parity(r, masks[0]) as u8 | (parity(r, masks[1]) as u8) << 1)
                .collect();
            let mut distinct: Vec<f64> = Vec::new();
            let mut class = [0u8; 4];
            let mut rate = [0.0; 4];
            for p in 0..4 {
                let w = ch.frequencies[p];
                rate[p] = h.rate(w)?;
                class[p] = match distinct.iter().position(|v| (v - w).abs() < FREQ_TOL) {
                    Some(i) => i as u8,
                    None => {
                        distinct.push(w);
                        (distinct.len() - 1) as u8
                    }
                };
            }
            out.push(FrameChannel {
                flip: 1 << ch.site,
                pattern,
                class,
                rate,
            });
        }
        Ok(Frame {
            energy,
            channels: out,
        })
    }

    fn is_trivial(&self) -> bool {
        self.channels.is_empty() && self.energy.iter().all(|&e| e == 0.0)
    }

    /// `out = δ_frame(x) + L_frame(x)` in this frame's basis.
    fn apply(&self, x: &[Complex64], out: &mut [Complex64], ham: bool, dis: bool) {
        let dim = self.energy.len();
        out.par_chunks_mut(dim).enumerate().for_each(|(r, row)| {
            for (c, o) in row.iter_mut().enumerate() {
                let xrc = x[r * dim + c];
                let mut v = ZERO;
                if ham {
                    v += Complex64::new(0.0, self.energy[r] - self.energy[c]) * xrc;
                }
                if dis {
                    // per channel, so that L(1) vanishes without rounding
                    for ch in &self.channels {
                        let pr = ch.pattern[r] as usize;
                        let pc = ch.pattern[c] as usize;
                        let mut t = -0.5 * (ch.rate[pr] + ch.rate[pc]) * xrc;
                        if ch.class[pr] == ch.class[pc] {
                            t += ch.rate[pr] * x[(r ^ ch.flip) * dim + (c ^ ch.flip)];
                        }
                        v += t;
                    }
                }
                *o = v;
            }
        });
    }

    fn norm_bound(&self) -> f64 {
        let (lo, hi) = self
            .energy
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &e| (lo.min(e), hi.max(e)));
        let ham = if self.energy.is_empty() { 0.0 } else { hi - lo };
        let dis: f64 = self
            .channels
            .iter()
            .map(|ch| 2.0 * ch.rate.iter().cloned().fold(0.0, f64::max))
            .sum();
        ham + dis
    }
}

/// Heisenberg-picture Davies generator `L = δ + L_dis` on dense observables,
/// `δ(X) = i[H, X]`.
///
/// Stabilizers and couplings that are `Z`/`σˣ`-type act diagonally or as bit
/// flips in the computational basis; the `X`/`σᶻ`-type ones do so after a
/// Hadamard transform on every qubit. Each application therefore costs
/// `O(#channels · 4ⁿ)` plus two fast Walsh–Hadamard conjugations.
#[derive(Clone, Debug)]
pub struct DaviesGenerator {
    n: usize,
    dim: usize,
    beta: f64,
    computational: Frame,
    hadamard: Option<Frame>,
    gibbs: Observable,
}

impl DaviesGenerator {
    pub fn new(m: &StabilizerModel, jumps: &DaviesJumpSet, h: &SpectralFunction) -> Result<Self> {
        let n = m.n_qubits();
        check_capacity(n)?;
        let dim = 1usize << n;
        let mut z_type = Vec::new();
        let mut x_type = Vec::new();
        for (i, s) in m.stabilizers().iter().enumerate() {
            let x = s.op.x_mask()[0] as usize;
            let z = s.op.z_mask()[0] as usize;
            match (x, z) {
                (0, z) => z_type.push((i, z, s.coupling)),
                (x, 0) => x_type.push((i, x, s.coupling)),
                _ => return Err(Error::domain("stabilizers must be X-type or Z-type")),
            }
        }
        let x_channels: Vec<&JumpChannel> =
            jumps.channels().iter().filter(|c| c.coupling == Pauli::X).collect();
        let z_channels: Vec<&JumpChannel> =
            jumps.channels().iter().filter(|c| c.coupling == Pauli::Z).collect();
        let computational = Frame::new(dim, &z_type, &x_channels, h)?;
        let hadamard = Frame::new(dim, &x_type, &z_channels, h)?;
        let hadamard = (!hadamard.is_trivial()).then_some(hadamard);

        // ρ ∝ e^{−βH_Z} · W e^{−βH_X} W, the two factors commute
        let beta = h.beta();
        let mut gibbs = Observable::zeros(n)?;
        {
            let data = gibbs.data_mut();
            match &hadamard {
                Some(f) => {
                    for r in 0..dim {
                        data[r * dim + r] = Complex64::new((-beta * f.energy[r]).exp(), 0.0);
                    }
                    hadamard_conjugate_in_place(data, n);
                }
                None => {
                    for r in 0..dim {
                        data[r * dim + r] = Complex64::new(1.0, 0.0);
                    }
                }
            }
            for r in 0..dim {
                let w = (-beta * computational.energy[r]).exp();
                data[r * dim..(r + 1) * dim].iter_mut().for_each(|v| *v *= w);
            }
        }
        let z = gibbs.trace().re;
        let gibbs = gibbs.scale(Complex64::new(1.0 / z, 0.0));
        Ok(DaviesGenerator {
            n,
            dim,
            beta,
            computational,
            hadamard,
            gibbs,
        })
    }

    pub fn n_qubits(&self) -> usize {
        self.n
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// `ρ_β = e^{−βH} / tr e^{−βH}`.
    pub fn gibbs_state(&self) -> &Observable {
        &self.gibbs
    }

    /// `⟨X, Y⟩_β = tr(ρ_β X† Y)`.
    pub fn inner(&self, x: &Observable, y: &Observable) -> Complex64 {
        self.gibbs.trace_product(&x.adjoint().matmul(y))
    }

    /// `tr(ρ_β X)`.
    pub fn gibbs_mean(&self, x: &Observable) -> Complex64 {
        self.gibbs.trace_product(x)
    }

    /// Raw application on a row-major buffer, selecting the Hamiltonian and/or
    /// dissipative parts.
    pub fn apply_parts(&self, x: &[Complex64], y: &mut [Complex64], hamiltonian: bool, dissipator: bool) {
        assert_eq!(x.len(), self.dim * self.dim);
        assert_eq!(y.len(), x.len());
        self.computational.apply(x, y, hamiltonian, dissipator);
        if let Some(f) = &self.hadamard {
            let mut xh = x.to_vec();
            hadamard_conjugate_in_place(&mut xh, self.n);
            let mut yh = vec![ZERO; xh.len()];
            f.apply(&xh, &mut yh, hamiltonian, dissipator);
            hadamard_conjugate_in_place(&mut yh, self.n);
            y.iter_mut().zip(&yh).for_each(|(a, b)| *a += b);
        }
    }

    fn apply_with(&self, x: &Observable, ham: bool, dis: bool) -> Observable {
        assert_eq!(x.n_qubits(), self.n, "observable size does not match generator");
        let mut out = Observable::zeros(self.n).expect("capacity checked at construction");
        self.apply_parts(x.data(), out.data_mut(), ham, dis);
        out
    }

    /// `L(X) = i[H, X] + L_dis(X)`.
    pub fn apply(&self, x: &Observable) -> Observable {
        self.apply_with(x, true, true)
    }

    pub fn apply_dissipator(&self, x: &Observable) -> Observable {
        self.apply_with(x, false, true)
    }

    /// `δ(X) = i[H, X]`.
    pub fn apply_derivation(&self, x: &Observable) -> Observable {
        self.apply_with(x, true, false)
    }
}

impl LinearOperator<Complex64> for DaviesGenerator {
    fn dim(&self) -> usize {
        self.dim * self.dim
    }

    fn apply(&self, x: &[Complex64], y: &mut [Complex64]) {
        self.apply_parts(x, y, true, true);
    }

    fn norm_bound(&self) -> f64 {
        self.computational.norm_bound() + self.hadamard.as_ref().map_or(0.0, Frame::norm_bound)
    }
}

/// `L(X)` for a one-off application.
pub fn apply_lindblad(
    m: &StabilizerModel,
    jumps: &DaviesJumpSet,
    h: &SpectralFunction,
    x: &Observable,
) -> Result<Observable> {
    if x.n_qubits() != m.n_qubits() {
        return Err(Error::DimensionMismatch {
            left: x.n_qubits(),
            right: m.n_qubits(),
        });
    }
    Ok(DaviesGenerator::new(m, jumps, h)?.apply(x))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::davies::jumps::{build_jump_set, Coupling};
    use crate::model::{build_ising_ring, build_kitaev_torus};
    use crate::pauli::{PauliOp, PauliPolynomial};

    fn symbolic_lindblad(
        m: &StabilizerModel,
        jumps: &DaviesJumpSet,
        h: &SpectralFunction,
        x: &PauliPolynomial,
    ) -> PauliPolynomial {
        let i = Complex64::new(0.0, 1.0);
        let mut out = m.hamiltonian().commutator(x).unwrap().scale(i);
        for ch in jumps.channels() {
            for (w, s) in ch.fourier_components(m) {
                let rate = Complex64::new(h.rate(w).unwrap(), 0.0);
                let sd = s.adjoint();
                let sds = sd.mul(&s).unwrap();
                let term = sd
                    .mul(x)
                    .unwrap()
                    .mul(&s)
                    .unwrap()
                    .sub(&sds.mul(x).unwrap().add(&x.mul(&sds).unwrap()).unwrap().scale(Complex64::new(0.5, 0.0)))
                    .unwrap();
                out = out.add(&term.scale(rate)).unwrap();
            }
        }
        out
    }

    #[test]
    fn matches_symbolic_gkls_on_monomials() {
        let h = SpectralFunction::thermal(0.8, 1.3, 0.6).unwrap();
        let cases = [
            (build_ising_ring(3).unwrap(), Coupling::XOnly, vec!["Z1", "X1 Y2", "Y1 Y2 Y3", "Z2 X3"]),
            (build_kitaev_torus(2).unwrap(), Coupling::Both, vec!["Z1", "X1 Y3 Z8", "Y2 Y5"]),
        ];
        for (m, coupling, ops) in cases {
            let jumps = build_jump_set(&m, coupling).unwrap();
            let gen = DaviesGenerator::new(&m, &jumps, &h).unwrap();
            for s in ops {
                let p = PauliOp::parse(m.n_qubits(), s).unwrap();
                let x = PauliPolynomial::from_op(&p);
                let expected = Observable::from_polynomial(&symbolic_lindblad(&m, &jumps, &h, &x)).unwrap();
                let got = gen.apply(&Observable::from_pauli(&p).unwrap());
                assert!(got.distance(&expected) < 1e-12, "{s}: {}", got.distance(&expected));
            }
        }
    }

    #[test]
    fn unital_and_gibbs_normalized() {
        let m = build_kitaev_torus(2).unwrap();
        let jumps = build_jump_set(&m, Coupling::Both).unwrap();
        let h = SpectralFunction::thermal(1.0, 1.0, 1.0).unwrap();
        let gen = DaviesGenerator::new(&m, &jumps, &h).unwrap();
        let one = Observable::identity(m.n_qubits()).unwrap();
        assert_eq!(gen.apply(&one).max_abs(), 0.0);
        assert!((gen.gibbs_state().trace().re - 1.0).abs() < 1e-14);
    }
}
