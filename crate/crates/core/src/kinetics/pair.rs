//! `O(K²)` right-hand sides for the built-in rules.
//!
//! Every built-in rule adds exactly one edge, so its kernel is fixed by
//! `q(a, b)`: the probability that the added edge joins a component of
//! class `a` to one of class `b` (classes `1..=K` and the giant). Then
//!
//! ```text
//! ρ_k' = k Σ_{a+b=k} q(a, b) − k Σ_b (q(k, b) + q(b, k)).
//! ```

use super::{GelMode, StateVector};
use crate::error::{Error, Result};
use crate::rules::{BoundedTable, Builtin, RuleSpec};

/// Scratch buffers reused across evaluations.
#[derive(Debug, Default)]
pub struct PairWorkspace {
    dist: Vec<f64>,
    tail: Vec<f64>,
    aux: Vec<f64>,
    nz: Vec<usize>,
    bf: Option<BoundedTable>,
}

impl PairWorkspace {
    pub fn new() -> Self {
        Self::default()
    }
}

/// Right-hand side for a built-in rule; custom rules are rejected.
pub fn rhs_pair(
    rule: &RuleSpec,
    state: &StateVector,
    mode: GelMode,
    ws: &mut PairWorkspace,
) -> Result<Vec<f64>> {
    let kind = rule.builtin_kind().ok_or_else(|| {
        Error::invalid(format!("rule `{}` has no pair kernel; use the generic kernel", rule.name()))
    })?;
    let k = state.order();
    let w = state.weights(mode);
    ws.nz.clear();
    ws.nz.extend((0..=k).filter(|&i| w[i] != 0.0));
    let mut acc = Acc::new(k);
    match kind {
        Builtin::ErdosRenyi => {
            acc.symmetric_pairs(&ws.nz, |a, b| w[a] * w[b]);
        }
        Builtin::Product => order_stat(&mut acc, ws, &w, product_index(k), product_index_len(k)),
        Builtin::Sum => order_stat(&mut acc, ws, &w, sum_index(k), 3 * k),
        Builtin::BohmanFrieze => {
            let table = ws
                .bf
                .get_or_insert_with(|| BoundedTable::bohman_frieze_like(1).expect("bound 1 is valid"))
                .clone();
            bounded(&mut acc, ws, &w, k, &table);
        }
        Builtin::BoundedSize(table) => bounded(&mut acc, ws, &w, k, table),
        Builtin::Dcdgm => {
            min_weights(ws, &w);
            let mw = &ws.aux;
            acc.symmetric_pairs(&ws.nz, |a, b| mw[a] * mw[b]);
        }
        Builtin::AdjacentEdge => {
            min_weights(ws, &w);
            let mw = &ws.aux;
            acc.pairs(&ws.nz, |a, b| w[a] * mw[b]);
        }
    }
    Ok(acc.finish())
}

/// Gain and loss accumulators; index `k` is the giant.
struct Acc {
    k: usize,
    gain: Vec<f64>,
    loss: Vec<f64>,
}

impl Acc {
    fn new(k: usize) -> Self {
        Acc {
            k,
            gain: vec![0.0; k],
            loss: vec![0.0; k + 1],
        }
    }

    #[inline]
    fn pairs(&mut self, nz: &[usize], q: impl Fn(usize, usize) -> f64) {
        let k = self.k;
        for &a in nz {
            let mut row = 0.0;
            for &b in nz {
                let v = q(a, b);
                row += v;
                self.loss[b] += v;
                // Sizes a+1 and b+1 merge into a+b+2, index a+b+1.
                if a < k && b < k && a + b + 1 < k {
                    self.gain[a + b + 1] += v;
                }
            }
            self.loss[a] += row;
        }
    }

    /// Same as [`Acc::pairs`] for `q(a, b) = q(b, a)`, visiting `a ≤ b` only.
    #[inline]
    fn symmetric_pairs(&mut self, nz: &[usize], q: impl Fn(usize, usize) -> f64) {
        let k = self.k;
        for (i, &a) in nz.iter().enumerate() {
            let v = q(a, a);
            self.loss[a] += 2.0 * v;
            if a < k && 2 * a + 1 < k {
                self.gain[2 * a + 1] += v;
            }
            let mut row = 0.0;
            for &b in &nz[i + 1..] {
                let v = 2.0 * q(a, b);
                row += v;
                self.loss[b] += v;
                if b < k && a + b + 1 < k {
                    self.gain[a + b + 1] += v;
                }
            }
            self.loss[a] += row;
        }
    }

    fn finish(self) -> Vec<f64> {
        (0..self.k)
            .map(|i| (i + 1) as f64 * (self.gain[i] - self.loss[i]))
            .collect()
    }
}

fn product_index_len(k: usize) -> usize {
    k * k + k + 1
}

/// Position of `size(a)·size(b)` in the symbolic order
/// `1 < 2 < … < K² < G·1 < … < G·K < G²`.
fn product_index(k: usize) -> impl Fn(usize, usize) -> usize + Copy {
    move |a, b| match (a == k, b == k) {
        (false, false) => (a + 1) * (b + 1) - 1,
        (true, false) => k * k + b,
        (false, true) => k * k + a,
        (true, true) => k * k + k,
    }
}

/// Position of `size(a)+size(b)` in `2 < … < 2K < G+1 < … < G+K < 2G`.
fn sum_index(k: usize) -> impl Fn(usize, usize) -> usize + Copy {
    move |a, b| match (a == k, b == k) {
        (false, false) => a + b,
        (true, false) => 2 * k - 1 + b,
        (false, true) => 2 * k - 1 + a,
        (true, true) => 3 * k - 1,
    }
}

/// Rules choosing the pair with the smaller symmetric statistic, ties to the first
/// pair: pair `(a, b)` in first position wins when the other pair's value
/// is at least as large, in second position when strictly larger.
fn order_stat(
    acc: &mut Acc,
    ws: &mut PairWorkspace,
    w: &[f64],
    index: impl Fn(usize, usize) -> usize + Copy,
    len: usize,
) {
    ws.dist.clear();
    ws.dist.resize(len, 0.0);
    for (i, &a) in ws.nz.iter().enumerate() {
        ws.dist[index(a, a)] += w[a] * w[a];
        for &b in &ws.nz[i + 1..] {
            ws.dist[index(a, b)] += 2.0 * w[a] * w[b];
        }
    }
    ws.tail.clear();
    ws.tail.resize(len + 1, 0.0);
    for i in (0..len).rev() {
        ws.tail[i] = ws.tail[i + 1] + ws.dist[i];
    }
    let tail = &ws.tail;
    acc.symmetric_pairs(&ws.nz, |a, b| {
        let i = index(a, b);
        w[a] * w[b] * (tail[i] + tail[i + 1])
    });
}

/// Table rules: the choice depends only on capped size classes.
fn bounded(acc: &mut Acc, ws: &mut PairWorkspace, w: &[f64], k: usize, table: &BoundedTable) {
    let b = table.bound() as usize;
    let classes = b + 1;
    let class_of = |i: usize| if i < k && i < b { i } else { b };
    let mut pi = vec![0.0; classes];
    for &i in &ws.nz {
        pi[class_of(i)] += w[i];
    }
    // win[u][v]: probability that an edge between classes u, v is added,
    // per unit weight of the pair holding them.
    let mut win = vec![0.0; classes * classes];
    for u in 0..classes {
        for v in 0..classes {
            let mut p = 0.0;
            for x in 0..classes {
                for y in 0..classes {
                    let pxy = pi[x] * pi[y];
                    if pxy == 0.0 {
                        continue;
                    }
                    let c = |p: [usize; 4]| p.map(|z| z as u64);
                    if table.first_by_class(c([u, v, x, y])) {
                        p += pxy;
                    }
                    if !table.first_by_class(c([x, y, u, v])) {
                        p += pxy;
                    }
                }
            }
            win[u * classes + v] = p;
        }
    }
    let q = |x: usize, y: usize| w[x] * w[y] * win[class_of(x) * classes + class_of(y)];
    let symmetric = (0..classes).all(|u| (0..u).all(|v| win[u * classes + v] == win[v * classes + u]));
    if symmetric {
        acc.symmetric_pairs(&ws.nz, q);
    } else {
        acc.pairs(&ws.nz, q);
    }
}

/// `aux[a] = P(min of two draws = a) = w_a (2 S_{≥a} − w_a)`.
fn min_weights(ws: &mut PairWorkspace, w: &[f64]) {
    let n = w.len();
    ws.aux.clear();
    ws.aux.resize(n, 0.0);
    let mut above = 0.0;
    for i in (0..n).rev() {
        above += w[i];
        ws.aux[i] = w[i] * (2.0 * above - w[i]);
    }
}
