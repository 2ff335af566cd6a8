//! Linear algebra over GF(2) on packed bit rows.

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct BitVec {
    len: usize,
    words: Vec<u64>,
}

impl BitVec {
    pub fn zeros(len: usize) -> Self {
        BitVec {
            len,
            words: vec![0; len.div_ceil(64)],
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn get(&self, i: usize) -> bool {
        (self.words[i / 64] >> (i % 64)) & 1 == 1
    }

    pub fn set(&mut self, i: usize, v: bool) {
        let (w, b) = (i / 64, i % 64);
        if v {
            self.words[w] |= 1 << b;
        } else {
            self.words[w] &= !(1 << b);
        }
    }

    pub fn flip(&mut self, i: usize) {
        self.words[i / 64] ^= 1 << (i % 64);
    }

    pub fn xor_assign(&mut self, other: &BitVec) {
        debug_assert_eq!(self.len, other.len);
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a ^= b;
        }
    }

    pub fn is_zero(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn dot(&self, other: &BitVec) -> bool {
        self.words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| (a & b).count_ones())
            .sum::<u32>()
            & 1
            == 1
    }

    pub fn ones(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.len).filter(move |&i| self.get(i))
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    fn first_one(&self) -> Option<usize> {
        self.words
            .iter()
            .enumerate()
            .find(|(_, &w)| w != 0)
            .map(|(i, w)| i * 64 + w.trailing_zeros() as usize)
    }
}

/// Row echelon form of a set of generators, remembering which generators
/// combine into each pivot row so that targets can be decomposed.
#[derive(Clone, Debug)]
pub struct Gf2Basis {
    n_generators: usize,
    /// (pivot column, reduced row, combination of generators)
    pivots: Vec<(usize, BitVec, BitVec)>,
}

impl Gf2Basis {
    pub fn new(generators: &[BitVec]) -> Self {
        let n_generators = generators.len();
        let mut pivots: Vec<(usize, BitVec, BitVec)> = Vec::new();
        for (i, g) in generators.iter().enumerate() {
            let mut row = g.clone();
            let mut combo = BitVec::zeros(n_generators);
            combo.set(i, true);
            for (col, prow, pcombo) in &pivots {
                if row.get(*col) {
                    row.xor_assign(prow);
                    combo.xor_assign(pcombo);
                }
            }
            if let Some(col) = row.first_one() {
                // keep the echelon fully reduced so reduction order never matters
                for (_, prow, pcombo) in pivots.iter_mut() {
                    if prow.get(col) {
                        prow.xor_assign(&row);
                        pcombo.xor_assign(&combo);
                    }
                }
                pivots.push((col, row, combo));
            }
        }
        Gf2Basis {
            n_generators,
            pivots,
        }
    }

    pub fn rank(&self) -> usize {
        self.pivots.len()
    }

    /// Generators whose sum is `target`, if `target` lies in the span.
    pub fn decompose(&self, target: &BitVec) -> Option<BitVec> {
        let mut row = target.clone();
        let mut combo = BitVec::zeros(self.n_generators);
        for (col, prow, pcombo) in &self.pivots {
            if row.get(*col) {
                row.xor_assign(prow);
                combo.xor_assign(pcombo);
            }
        }
        row.is_zero().then_some(combo)
    }

    /// Combinations of generators that sum to zero (a basis of the relations).
    pub fn relations(generators: &[BitVec]) -> Vec<BitVec> {
        let n = generators.len();
        let mut pivots: Vec<(usize, BitVec, BitVec)> = Vec::new();
        let mut out = Vec::new();
        for (i, g) in generators.iter().enumerate() {
            let mut row = g.clone();
            let mut combo = BitVec::zeros(n);
            combo.set(i, true);
            for (col, prow, pcombo) in &pivots {
                if row.get(*col) {
                    row.xor_assign(prow);
                    combo.xor_assign(pcombo);
                }
            }
            match row.first_one() {
                Some(col) => {
                    for (_, prow, pcombo) in pivots.iter_mut() {
                        if prow.get(col) {
                            prow.xor_assign(&row);
                            pcombo.xor_assign(&combo);
                        }
                    }
                    pivots.push((col, row, combo))
                }
                None => out.push(combo),
            }
        }
        out
    }
}

pub fn rank(rows: &[BitVec]) -> usize {
    Gf2Basis::new(rows).rank()
}

/// Basis of `{v : r · v = 0 for every row r}` in a space of `ncols` bits.
pub fn nullspace(rows: &[BitVec], ncols: usize) -> Vec<BitVec> {
    let basis = Gf2Basis::new(rows);
    let pivot_cols: Vec<usize> = basis.pivots.iter().map(|(c, _, _)| *c).collect();
    let mut is_pivot = vec![false; ncols];
    for &c in &pivot_cols {
        is_pivot[c] = true;
    }
    let mut out = Vec::new();
    for free in (0..ncols).filter(|&c| !is_pivot[c]) {
        let mut v = BitVec::zeros(ncols);
        v.set(free, true);
        // fully reduced rows: pivot column c is the only pivot column set in its row
        for (c, row, _) in &basis.pivots {
            if row.get(free) {
                v.set(*c, true);
            }
        }
        out.push(v);
    }
    out
}
