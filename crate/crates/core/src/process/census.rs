use std::collections::BTreeMap;

use crate::error::{Error, Result};

/// Default size below which counts live in a dense array.
pub const DEFAULT_DENSE_LIMIT: u64 = 1 << 16;

/// Number of components of each size.
///
/// Sizes up to the dense limit are counted in an array; larger sizes (few,
/// by vertex counting) go to a sorted map. `N_k = k · count(k)`.
#[derive(Clone, Debug)]
pub struct Census {
    dense: Vec<u64>,
    sparse: BTreeMap<u64, u64>,
    n: u64,
    largest: u64,
}

impl Census {
    /// `n` isolated vertices.
    pub fn new(n: u64) -> Self {
        Self::with_dense_limit(n, DEFAULT_DENSE_LIMIT)
    }

    pub fn with_dense_limit(n: u64, dense_limit: u64) -> Self {
        let dense_len = dense_limit.min(n).max(1) as usize + 1;
        let mut dense = vec![0; dense_len];
        dense[1] = n;
        Census {
            dense,
            sparse: BTreeMap::new(),
            n,
            largest: 1,
        }
    }

    /// Build from explicit `(size, count)` pairs.
    pub fn from_counts(counts: &[(u64, u64)]) -> Result<Self> {
        let n: u64 = counts.iter().map(|&(k, c)| k * c).sum();
        if n == 0 || counts.iter().any(|&(k, _)| k == 0) {
            return Err(Error::invalid("census needs positive sizes and at least one vertex"));
        }
        let mut census = Census::new(n);
        census.dense[1] = 0;
        census.largest = 0;
        for &(k, c) in counts {
            for _ in 0..c {
                census.add(k);
            }
        }
        Ok(census)
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    /// `L₁`, the largest component size.
    pub fn largest(&self) -> u64 {
        self.largest
    }

    #[inline]
    pub fn count(&self, k: u64) -> u64 {
        if (k as usize) < self.dense.len() {
            self.dense[k as usize]
        } else {
            self.sparse.get(&k).copied().unwrap_or(0)
        }
    }

    /// Vertices in components of size `k`.
    #[inline]
    pub fn vertices_in(&self, k: u64) -> u64 {
        k * self.count(k)
    }

    #[inline]
    pub(crate) fn add(&mut self, k: u64) {
        if (k as usize) < self.dense.len() {
            self.dense[k as usize] += 1;
        } else {
            *self.sparse.entry(k).or_insert(0) += 1;
        }
        if k > self.largest {
            self.largest = k;
        }
    }

    #[inline]
    pub(crate) fn remove(&mut self, k: u64) {
        if (k as usize) < self.dense.len() {
            debug_assert!(self.dense[k as usize] > 0);
            self.dense[k as usize] -= 1;
        } else {
            let c = self.sparse.get_mut(&k).expect("removing an absent size");
            *c -= 1;
            if *c == 0 {
                self.sparse.remove(&k);
            }
        }
        // Callers always add the merged size after removing its parts, and
        // components only grow, so the largest size never decreases.
    }

    /// Record a merge of components of sizes `a` and `b`.
    #[inline]
    pub(crate) fn merge(&mut self, a: u64, b: u64) {
        self.remove(a);
        self.remove(b);
        self.add(a + b);
    }

    /// Nonzero `(size, count)` pairs in ascending size order.
    pub fn iter(&self) -> impl Iterator<Item = (u64, u64)> + '_ {
        self.dense
            .iter()
            .enumerate()
            .filter(|&(_, &c)| c > 0)
            .map(|(k, &c)| (k as u64, c))
            .chain(self.sparse.iter().map(|(&k, &c)| (k, c)))
    }

    /// The `m` largest component sizes, with multiplicity, descending.
    pub fn top(&self, m: usize) -> Vec<u64> {
        let mut out = Vec::with_capacity(m);
        for (&k, &c) in self.sparse.iter().rev() {
            for _ in 0..c {
                if out.len() == m {
                    return out;
                }
                out.push(k);
            }
        }
        for k in (1..self.dense.len()).rev() {
            for _ in 0..self.dense[k] {
                if out.len() == m {
                    return out;
                }
                out.push(k as u64);
            }
        }
        out
    }

    /// Number of components of size at least `s`.
    pub fn components_at_least(&self, s: u64) -> u64 {
        self.iter().filter(|&(k, _)| k >= s).map(|(_, c)| c).sum()
    }

    /// `Σ_k k²·count(k) / n`, the expected size of the component of a
    /// uniform vertex; with `exclude_largest`, one largest component is
    /// left out of the sum (0 when it is the whole graph).
    ///
    /// ```
    /// use achlioptas::process::Census;
    /// let c = Census::from_counts(&[(2, 1), (1, 2)]).unwrap();
    /// assert_eq!(c.susceptibility(false), 1.5);
    /// ```
    pub fn susceptibility(&self, exclude_largest: bool) -> f64 {
        let mut sum: u128 = self.iter().map(|(k, c)| (k as u128) * (k as u128) * c as u128).sum();
        if exclude_largest {
            sum -= (self.largest as u128) * (self.largest as u128);
        }
        sum as f64 / self.n as f64
    }

    /// `Σ k·count = n` and `largest = max{k : count > 0}`.
    pub fn check(&self) -> Result<()> {
        let mass: u64 = self.iter().map(|(k, c)| k * c).sum();
        if mass != self.n {
            return Err(Error::Invariant(format!("census holds {mass} vertices, expected {}", self.n)));
        }
        let max = self.iter().map(|(k, _)| k).last().unwrap_or(0);
        if max != self.largest {
            return Err(Error::Invariant(format!(
                "largest recorded as {} but census maximum is {max}",
                self.largest
            )));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn susceptibility_examples() {
        assert_eq!(Census::new(10).susceptibility(false), 1.0);
        let c = Census::from_counts(&[(2, 1), (1, 2)]).unwrap();
        assert_eq!(c.susceptibility(false), 1.5);
        assert_eq!(c.susceptibility(true), 0.5);
        let one = Census::from_counts(&[(5, 1)]).unwrap();
        assert_eq!(one.susceptibility(true), 0.0);
    }

    #[test]
    fn merges_cross_dense_limit() {
        let mut c = Census::with_dense_limit(8, 3);
        c.merge(1, 1);
        c.merge(1, 1);
        c.merge(2, 2);
        assert_eq!(c.count(4), 1);
        assert_eq!(c.largest(), 4);
        c.merge(4, 1);
        assert_eq!(c.top(3), vec![5, 1, 1]);
        assert_eq!(c.components_at_least(2), 1);
        c.check().unwrap();
        assert_eq!(c.iter().collect::<Vec<_>>(), vec![(1, 3), (5, 1)]);
    }

    #[test]
    fn from_counts_rejects_empty() {
        assert!(Census::from_counts(&[]).is_err());
        assert!(Census::from_counts(&[(0, 3)]).is_err());
    }
}
