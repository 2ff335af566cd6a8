/// Binary indexed tree over non-negative weights with prefix-sum search.
#[derive(Clone, Debug)]
pub(crate) struct Fenwick {
    tree: Vec<f64>,
    values: Vec<f64>,
    updates: usize,
}

/// Rebuild from the stored values this often to flush rounding drift.
const REBUILD_EVERY: usize = 1 << 14;

impl Fenwick {
    pub fn new(values: Vec<f64>) -> Self {
        let mut f = Fenwick {
            tree: vec![0.0; values.len() + 1],
            values,
            updates: 0,
        };
        f.rebuild();
        f
    }

    fn rebuild(&mut self) {
        let n = self.values.len();
        self.tree.iter_mut().for_each(|v| *v = 0.0);
        for i in 0..n {
            let k = i + 1;
            self.tree[k] += self.values[i];
            let parent = k + (k & k.wrapping_neg());
            if parent <= n {
                self.tree[parent] += self.tree[k];
            }
        }
        self.updates = 0;
    }

    #[cfg(test)]
    pub fn get(&self, i: usize) -> f64 {
        self.values[i]
    }

    pub fn set(&mut self, i: usize, v: f64) {
        let delta = v - self.values[i];
        if delta == 0.0 {
            return;
        }
        self.values[i] = v;
        self.updates += 1;
        if self.updates >= REBUILD_EVERY {
            self.rebuild();
            return;
        }
        let mut k = i + 1;
        while k < self.tree.len() {
            self.tree[k] += delta;
            k += k & k.wrapping_neg();
        }
    }

    pub fn total(&self) -> f64 {
        let mut k = self.values.len();
        let mut acc = 0.0;
        while k > 0 {
            acc += self.tree[k];
            k &= k - 1;
        }
        acc.max(0.0)
    }

    /// Index `i` with `Σ_{j<i} w_j ≤ u < Σ_{j≤i} w_j`, skipping zero weights.
    pub fn find(&self, mut u: f64) -> usize {
        let n = self.values.len();
        let mut pos = 0;
        let mut step = n.next_power_of_two();
        while step > 0 {
            let next = pos + step;
            if next <= n && self.tree[next] <= u {
                u -= self.tree[next];
                pos = next;
            }
            step >>= 1;
        }
        // rounding can land on an empty slot or past the end
        let mut i = pos.min(n - 1);
        while self.values[i] == 0.0 && i > 0 {
            i -= 1;
        }
        while self.values[i] == 0.0 && i + 1 < n {
            i += 1;
        }
        i
    }
}
