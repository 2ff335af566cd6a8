//! Pauli monomials on `n` qubits in binary-symplectic form.
//!
//! A [`PauliOp`] is stored as `i^k · X^x · Z^z` where `x` and `z` are bit masks
//! over the sites and `k` is a power of `i` kept modulo 4. This internal phase
//! differs from the user-facing one, which labels a site carrying both bits as
//! the Hermitian `Y = i X Z`; see [`PauliOp::phase`].
//!
//! Sites are 0-based in the API and 1-based in the text form (`"X1 Z5 Y7"`).

pub mod gf2;
mod polynomial;

use std::fmt;

use crate::error::{Error, Result};

pub use polynomial::PauliPolynomial;

/// Single-site Pauli label.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    fn bits(self) -> (bool, bool) {
        match self {
            Pauli::I => (false, false),
            Pauli::X => (true, false),
            Pauli::Y => (true, true),
            Pauli::Z => (false, true),
        }
    }

    fn from_bits(x: bool, z: bool) -> Self {
        match (x, z) {
            (false, false) => Pauli::I,
            (true, false) => Pauli::X,
            (true, true) => Pauli::Y,
            (false, true) => Pauli::Z,
        }
    }

    fn letter(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }
}

/// Phase in front of a Pauli monomial, a power of `i`.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Phase(u8);

impl Phase {
    pub const ONE: Phase = Phase(0);
    pub const I: Phase = Phase(1);
    pub const MINUS_ONE: Phase = Phase(2);
    pub const MINUS_I: Phase = Phase(3);

    pub fn from_power(k: u8) -> Self {
        Phase(k & 3)
    }

    /// Exponent `k` in `i^k`.
    pub fn power(self) -> u8 {
        self.0
    }

    pub fn is_real(self) -> bool {
        self.0 & 1 == 0
    }

    pub fn to_complex(self) -> num_complex::Complex64 {
        use num_complex::Complex64 as C;
        match self.0 {
            0 => C::new(1.0, 0.0),
            1 => C::new(0.0, 1.0),
            2 => C::new(-1.0, 0.0),
            _ => C::new(0.0, -1.0),
        }
    }

    /// Real value for `±1`, `None` for `±i`.
    pub fn to_real(self) -> Option<f64> {
        match self.0 {
            0 => Some(1.0),
            2 => Some(-1.0),
            _ => None,
        }
    }
}

impl std::ops::Mul for Phase {
    type Output = Phase;
    fn mul(self, rhs: Phase) -> Phase {
        Phase((self.0 + rhs.0) & 3)
    }
}

const WORD: usize = 64;

fn words_for(n: usize) -> usize {
    n.div_ceil(WORD)
}

fn parity(a: &[u64], b: &[u64]) -> u32 {
    a.iter()
        .zip(b)
        .map(|(p, q)| (p & q).count_ones())
        .sum::<u32>()
        & 1
}

/// An `n`-qubit Pauli monomial with exact phase.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PauliOp {
    n: usize,
    x: Vec<u64>,
    z: Vec<u64>,
    /// Power of `i` in the `X^x Z^z` ordering.
    k: u8,
}

impl PauliOp {
    pub fn identity(n: usize) -> Self {
        let w = words_for(n);
        PauliOp {
            n,
            x: vec![0; w],
            z: vec![0; w],
            k: 0,
        }
    }

    pub fn single(n: usize, site: usize, p: Pauli) -> Self {
        assert!(site < n, "site {site} out of range for {n} qubits");
        let mut op = PauliOp::identity(n);
        op.set(site, p);
        op
    }

    /// Product of one Pauli letter over every listed site.
    pub fn uniform(n: usize, sites: &[usize], p: Pauli) -> Self {
        let mut op = PauliOp::identity(n);
        for &s in sites {
            assert!(s < n, "site {s} out of range for {n} qubits");
            op.set(s, p);
        }
        op
    }

    /// Build from explicit masks and a Y-convention phase.
    pub fn from_masks(n: usize, x: Vec<u64>, z: Vec<u64>, phase: Phase) -> Self {
        assert_eq!(x.len(), words_for(n));
        assert_eq!(z.len(), words_for(n));
        let mut op = PauliOp { n, x, z, k: 0 };
        op.mask_tail();
        let ny = op.count_y();
        op.k = ((phase.0 as u32 + ny) & 3) as u8;
        op
    }

    fn mask_tail(&mut self) {
        let rem = self.n % WORD;
        if rem != 0 {
            let m = (1u64 << rem) - 1;
            if let Some(last) = self.x.last_mut() {
                *last &= m;
            }
            if let Some(last) = self.z.last_mut() {
                *last &= m;
            }
        }
    }

    fn count_y(&self) -> u32 {
        self.x
            .iter()
            .zip(&self.z)
            .map(|(a, b)| (a & b).count_ones())
            .sum()
    }

    /// Replace the letter at `site`, keeping the Y-convention phase unchanged.
    fn set(&mut self, site: usize, p: Pauli) {
        let phase = self.phase();
        let (w, b) = (site / WORD, site % WORD);
        let (xb, zb) = p.bits();
        self.x[w] = (self.x[w] & !(1 << b)) | ((xb as u64) << b);
        self.z[w] = (self.z[w] & !(1 << b)) | ((zb as u64) << b);
        self.k = ((phase.0 as u32 + self.count_y()) & 3) as u8;
    }

    /// Replace the letter at `site`, keeping the phase in front of the letters.
    pub fn with_site(mut self, site: usize, p: Pauli) -> Self {
        assert!(site < self.n, "site {site} out of range for {} qubits", self.n);
        self.set(site, p);
        self
    }

    pub fn n_qubits(&self) -> usize {
        self.n
    }

    pub fn x_mask(&self) -> &[u64] {
        &self.x
    }

    pub fn z_mask(&self) -> &[u64] {
        &self.z
    }

    /// Phase `c` such that the operator equals `c · ⊗_j P_j` with `P_j ∈ {I, X, Y, Z}`.
    pub fn phase(&self) -> Phase {
        Phase(((self.k as u32 + 4 - (self.count_y() & 3)) & 3) as u8)
    }

    /// Phase in the internal `i^k X^x Z^z` ordering.
    pub fn xz_phase(&self) -> Phase {
        Phase(self.k)
    }

    pub fn with_phase(mut self, phase: Phase) -> Self {
        self.k = ((phase.0 as u32 + self.count_y()) & 3) as u8;
        self
    }

    /// Same masks with internal phase `k = 0`, i.e. the bare `X^x Z^z` product.
    pub fn xz_normalized(&self) -> Self {
        PauliOp {
            n: self.n,
            x: self.x.clone(),
            z: self.z.clone(),
            k: 0,
        }
    }

    pub fn scaled(mut self, phase: Phase) -> Self {
        self.k = (self.k + phase.0) & 3;
        self
    }

    pub fn get(&self, site: usize) -> Pauli {
        let (w, b) = (site / WORD, site % WORD);
        Pauli::from_bits((self.x[w] >> b) & 1 == 1, (self.z[w] >> b) & 1 == 1)
    }

    pub fn is_identity_up_to_phase(&self) -> bool {
        self.x.iter().chain(&self.z).all(|&w| w == 0)
    }

    pub fn is_identity(&self) -> bool {
        self.is_identity_up_to_phase() && self.k == 0
    }

    pub fn is_hermitian(&self) -> bool {
        self.phase().is_real()
    }

    /// Sites with a non-identity letter, ascending.
    pub fn support(&self) -> Vec<usize> {
        (0..self.n)
            .filter(|&s| {
                let (w, b) = (s / WORD, s % WORD);
                ((self.x[w] | self.z[w]) >> b) & 1 == 1
            })
            .collect()
    }

    pub fn weight(&self) -> usize {
        self.x
            .iter()
            .zip(&self.z)
            .map(|(a, b)| (a | b).count_ones() as usize)
            .sum()
    }

    fn check_dims(&self, other: &PauliOp) -> Result<()> {
        if self.n != other.n {
            return Err(Error::DimensionMismatch {
                left: self.n,
                right: other.n,
            });
        }
        Ok(())
    }

    /// Exact product `self · other`.
    pub fn multiply(&self, other: &PauliOp) -> Result<PauliOp> {
        self.check_dims(other)?;
        Ok(self.mul_unchecked(other))
    }

    pub(crate) fn mul_unchecked(&self, other: &PauliOp) -> PauliOp {
        // Z^za X^xb = (-1)^{|za & xb|} X^xb Z^za
        let sign = parity(&self.z, &other.x) as u8 * 2;
        PauliOp {
            n: self.n,
            x: self.x.iter().zip(&other.x).map(|(a, b)| a ^ b).collect(),
            z: self.z.iter().zip(&other.z).map(|(a, b)| a ^ b).collect(),
            k: (self.k + other.k + sign) & 3,
        }
    }

    pub fn adjoint(&self) -> PauliOp {
        // (X^x Z^z)† = Z^z X^x = (-1)^{|x & z|} X^x Z^z
        let sign = parity(&self.x, &self.z) as u8 * 2;
        PauliOp {
            n: self.n,
            x: self.x.clone(),
            z: self.z.clone(),
            k: (4 - self.k + sign) & 3,
        }
    }

    pub fn commutes(&self, other: &PauliOp) -> Result<bool> {
        self.check_dims(other)?;
        Ok(self.commutes_unchecked(other))
    }

    pub(crate) fn commutes_unchecked(&self, other: &PauliOp) -> bool {
        (parity(&self.x, &other.z) + parity(&self.z, &other.x)) & 1 == 0
    }

    /// Sign `g` with `u · q · u = g · q` for a single-site Pauli `u`.
    pub fn conjugate_sign(u: &PauliOp, q: &PauliOp) -> Result<i8> {
        u.check_dims(q)?;
        if u.weight() > 1 {
            return Err(Error::NotSingleSite { op: u.to_string() });
        }
        Ok(if u.commutes_unchecked(q) { 1 } else { -1 })
    }

    /// Symplectic vector `(x | z)` as one bit row of length `2n`.
    pub fn symplectic_row(&self) -> gf2::BitVec {
        let mut row = gf2::BitVec::zeros(2 * self.n);
        for s in 0..self.n {
            let (xb, zb) = self.get(s).bits();
            if xb {
                row.set(s, true);
            }
            if zb {
                row.set(self.n + s, true);
            }
        }
        row
    }

    /// Inverse of [`symplectic_row`](Self::symplectic_row), internal phase `k = 0`.
    pub fn from_symplectic_row(n: usize, row: &gf2::BitVec) -> PauliOp {
        let mut op = PauliOp::identity(n);
        for s in 0..n {
            let (w, b) = (s / WORD, s % WORD);
            if row.get(s) {
                op.x[w] |= 1 << b;
            }
            if row.get(n + s) {
                op.z[w] |= 1 << b;
            }
        }
        op
    }

    /// Parse `"X1 Z5 Y7"` (1-based sites) with an optional leading `+`, `-`, `+i`, `-i` or `i`.
    /// `"I"` or an empty string is the identity.
    pub fn parse(n: usize, input: &str) -> Result<PauliOp> {
        let err = |reason: String| Error::Parse {
            input: input.to_string(),
            reason,
        };
        let mut tokens = input.split_whitespace().peekable();
        let mut phase = Phase::ONE;
        if let Some(&first) = tokens.peek() {
            let p = match first {
                "+" | "+1" => Some(Phase::ONE),
                "-" | "-1" => Some(Phase::MINUS_ONE),
                "i" | "+i" => Some(Phase::I),
                "-i" => Some(Phase::MINUS_I),
                _ => None,
            };
            if let Some(p) = p {
                phase = p;
                tokens.next();
            }
        }
        let mut op = PauliOp::identity(n);
        let mut seen = vec![false; n];
        for tok in tokens {
            if tok == "I" {
                continue;
            }
            let mut chars = tok.chars();
            let letter = match chars.next() {
                Some('X') | Some('x') => Pauli::X,
                Some('Y') | Some('y') => Pauli::Y,
                Some('Z') | Some('z') => Pauli::Z,
                Some('I') | Some('i') => Pauli::I,
                _ => return Err(err(format!("bad token {tok:?}"))),
            };
            let site: usize = chars
                .as_str()
                .parse()
                .map_err(|_| err(format!("bad site index in {tok:?}")))?;
            if site == 0 || site > n {
                return Err(err(format!("site {site} outside 1..={n}")));
            }
            if seen[site - 1] {
                return Err(err(format!("site {site} repeated")));
            }
            seen[site - 1] = true;
            op.set(site - 1, letter);
        }
        Ok(op.with_phase(phase))
    }
}

impl fmt::Display for PauliOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let prefix = match self.phase().0 {
            0 => "",
            1 => "i ",
            2 => "- ",
            _ => "-i ",
        };
        f.write_str(prefix)?;
        let support = self.support();
        if support.is_empty() {
            return f.write_str("I");
        }
        let parts: Vec<String> = support
            .iter()
            .map(|&s| format!("{}{}", self.get(s).letter(), s + 1))
            .collect();
        f.write_str(&parts.join(" "))
    }
}
