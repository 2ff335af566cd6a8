use std::collections::{BTreeSet, HashMap};

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::generator::DaviesGenerator;
use super::jumps::DaviesJumpSet;
use super::observable::Observable;
use crate::error::{Error, Result};
use crate::model::StabilizerModel;
use crate::pauli::gf2::{self, BitVec};
use crate::pauli::{PauliOp, PauliPolynomial, Phase};

/// Largest size for which structural checks sweep the full Pauli basis.
pub const MAX_BASIS_QUBITS: usize = 6;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DetailedBalanceReport {
    pub n_qubits: usize,
    pub beta: f64,
    /// `"pauli-basis"` or `"random"`.
    pub sample: &'static str,
    pub n_observables: usize,
    /// `max |L(1)|` entrywise.
    pub unitality: f64,
    /// `max |tr(ρ_β L(X))|` over random unit-norm `X`.
    pub stationarity: f64,
    /// `max ‖δ L_dis(X) − L_dis δ(X)‖`.
    pub derivation_commutator: f64,
    /// `max |⟨Y, L_dis X⟩_β − ⟨L_dis Y, X⟩_β|` over random unit-norm pairs.
    pub self_adjoint_asymmetry: f64,
}

fn random_unit(n: usize, rng: &mut ChaCha8Rng) -> Result<Observable> {
    let x = Observable::random(n, rng)?;
    let norm = x.normalized_norm();
    Ok(x.scale(Complex64::new(1.0 / norm, 0.0)))
}

/// Unitality, Gibbs stationarity, `[δ, L_dis] = 0` and self-adjointness of
/// `L_dis` in `⟨X, Y⟩_β = tr(ρ_β X† Y)`.
///
/// The commutator residual runs over every Pauli monomial when
/// `n ≤ MAX_BASIS_QUBITS`, otherwise over `n_random` random observables. The
/// other two checks always use `n_random` random observables (pairs).
pub fn check_detailed_balance(
    gen: &DaviesGenerator,
    n_random: usize,
    seed: u64,
) -> Result<DetailedBalanceReport> {
    let n = gen.n_qubits();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let unitality = gen.apply(&Observable::identity(n)?).max_abs();

    let commutator_residual = |x: &Observable| {
        let a = gen.apply_derivation(&gen.apply_dissipator(x));
        let b = gen.apply_dissipator(&gen.apply_derivation(x));
        a.distance(&b)
    };
    let mut derivation_commutator: f64 = 0.0;
    let (sample, n_observables) = if n <= MAX_BASIS_QUBITS {
        for idx in 0..1u64 << (2 * n) {
            let x = idx & ((1 << n) - 1);
            let z = idx >> n;
            let p = PauliOp::from_masks(n, vec![x], vec![z], Phase::ONE);
            derivation_commutator = derivation_commutator.max(commutator_residual(&Observable::from_pauli(&p)?));
        }
        ("pauli-basis", 1usize << (2 * n))
    } else {
        for _ in 0..n_random {
            derivation_commutator = derivation_commutator.max(commutator_residual(&random_unit(n, &mut rng)?));
        }
        ("random", n_random)
    };

    let mut stationarity: f64 = 0.0;
    let mut self_adjoint_asymmetry: f64 = 0.0;
    for _ in 0..n_random {
        let x = random_unit(n, &mut rng)?;
        let y = random_unit(n, &mut rng)?;
        stationarity = stationarity.max(gen.gibbs_mean(&gen.apply(&x)).norm());
        let lx = gen.apply_dissipator(&x);
        let ly = gen.apply_dissipator(&y);
        let asym = (gen.inner(&y, &lx) - gen.inner(&ly, &x)).norm();
        self_adjoint_asymmetry = self_adjoint_asymmetry.max(asym);
    }
    Ok(DetailedBalanceReport {
        n_qubits: n,
        beta: gen.beta(),
        sample,
        n_observables,
        unitality,
        stationarity,
        derivation_commutator,
        self_adjoint_asymmetry,
    })
}

/// Largest monomial commutant enumerated when polynomial inputs are present.
pub const MAX_COMMUTANT_ENUMERATION: usize = 1 << 14;

/// Dimension of `{X : [A, X] = 0 for all A in ops}`.
///
/// The commutant of the monomial inputs is spanned by the monomials that
/// commute with all of them (a GF(2) nullspace). Polynomial inputs then cut
/// that span down by a complex linear system.
pub fn commutant_dimension(ops: &[PauliPolynomial]) -> Result<u64> {
    let Some(first) = ops.first() else {
        return Err(Error::domain("commutant of an empty operator list"));
    };
    let n = first.n_qubits();
    for op in ops {
        if op.n_qubits() != n {
            return Err(Error::DimensionMismatch {
                left: n,
                right: op.n_qubits(),
            });
        }
    }
    // commuting with a monomial (x, z) is a linear condition on (x', z'):
    // x·z' + z·x' = 0, i.e. a row with the halves swapped
    let swapped = |op: &PauliOp| {
        let row = op.symplectic_row();
        let mut out = BitVec::zeros(2 * n);
        for i in row.ones() {
            out.set((i + n) % (2 * n), true);
        }
        out
    };
    let mut rows = Vec::new();
    let mut polys = Vec::new();
    for op in ops {
        match op.len() {
            0 => {}
            1 => rows.push(swapped(op.terms().next().expect("one term").0)),
            _ => polys.push(op),
        }
    }
    let null = gf2::nullspace(&rows, 2 * n);
    let free = null.len();
    if polys.is_empty() {
        if free >= 64 {
            return Err(Error::Capacity {
                what: "commutant dimension (log2)",
                size: free,
                max: 63,
                hint: "",
            });
        }
        return Ok(1u64 << free);
    }
    if free > MAX_COMMUTANT_ENUMERATION.trailing_zeros() as usize {
        return Err(Error::Capacity {
            what: "monomial commutant to enumerate",
            size: 1 << free.min(62),
            max: MAX_COMMUTANT_ENUMERATION,
            hint: "; add monomial inputs to shrink it",
        });
    }
    let span: Vec<PauliOp> = (0..1usize << free)
        .map(|mask| {
            let mut v = BitVec::zeros(2 * n);
            for (i, b) in null.iter().enumerate() {
                if mask >> i & 1 == 1 {
                    v.xor_assign(b);
                }
            }
            PauliOp::from_symplectic_row(n, &v)
        })
        .collect();
    // rows: (polynomial, output monomial); columns: span elements
    let mut row_index: HashMap<(usize, PauliOp), usize> = HashMap::new();
    let mut entries: Vec<(usize, usize, Complex64)> = Vec::new();
    for (col, mono) in span.iter().enumerate() {
        for (pi, p) in polys.iter().enumerate() {
            let c = p.commutator(&PauliPolynomial::from_op(mono))?;
            for (out, v) in c.terms() {
                let next = row_index.len();
                let r = *row_index.entry((pi, out.clone())).or_insert(next);
                entries.push((r, col, v));
            }
        }
    }
    if row_index.is_empty() {
        return Ok(span.len() as u64);
    }
    let mut a = DMatrix::<Complex64>::zeros(row_index.len(), span.len());
    for (r, c, v) in entries {
        a[(r, c)] += v;
    }
    let scale = a.iter().map(|v| v.norm()).fold(0.0, f64::max);
    let rank = a.rank(1e-9 * scale.max(1.0));
    Ok((span.len() - rank) as u64)
}

/// `H` and every coupling operator, whose joint commutant decides ergodicity.
pub fn ergodicity_inputs(m: &StabilizerModel, jumps: &DaviesJumpSet) -> Vec<PauliPolynomial> {
    let mut ops = vec![m.hamiltonian()];
    ops.extend(
        jumps
            .channels()
            .iter()
            .map(|c| PauliPolynomial::from_op(&c.coupling_op(m))),
    );
    ops
}

/// `Λ(1)`: the sites plus every stabilizer touching them.
pub fn neighborhood(m: &StabilizerModel, sites: &[usize]) -> Vec<usize> {
    let inside: BTreeSet<usize> = sites.iter().copied().collect();
    let mut out = inside.clone();
    for s in m.stabilizers() {
        if s.sites.iter().any(|j| inside.contains(j)) {
            out.extend(s.sites.iter().copied());
        }
    }
    out.into_iter().collect()
}

/// `[X, δ(X), …, δᵏ(X)]` with `δ(Y) = i[H, Y]`, symbolically.
pub fn derivation_powers(m: &StabilizerModel, x: &PauliOp, k: usize) -> Result<Vec<PauliPolynomial>> {
    let h = m.hamiltonian();
    let i = Complex64::new(0.0, 1.0);
    let mut out = vec![PauliPolynomial::from_op(x)];
    for _ in 0..k {
        let next = h.commutator(out.last().expect("non-empty"))?.scale(i);
        out.push(next);
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LocalityReport {
    pub support: Vec<usize>,
    pub neighborhood: Vec<usize>,
    /// Support of `δᵏ(X)` for `k = 0, 1, …`.
    pub supports: Vec<Vec<usize>>,
    pub contained: bool,
}

/// Whether `δᵏ(X)` stays inside `Λ(1)` for every power up to `k`.
pub fn check_locality(m: &StabilizerModel, x: &PauliOp, k: usize) -> Result<LocalityReport> {
    if x.n_qubits() != m.n_qubits() {
        return Err(Error::DimensionMismatch {
            left: x.n_qubits(),
            right: m.n_qubits(),
        });
    }
    let support = x.support();
    let hood = neighborhood(m, &support);
    let supports: Vec<Vec<usize>> = derivation_powers(m, x, k)?
        .iter()
        .map(PauliPolynomial::support)
        .collect();
    let contained = supports
        .iter()
        .all(|s| s.iter().all(|j| hood.binary_search(j).is_ok()));
    Ok(LocalityReport {
        support,
        neighborhood: hood,
        supports,
        contained,
    })
}
