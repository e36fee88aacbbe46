use crate::error::{Error, Result};

/// Disjoint-set forest over `0..n` with union by size and path halving.
#[derive(Clone, Debug)]
pub struct DisjointSetForest {
    parent: Vec<u32>,
    size: Vec<u32>,
}

impl DisjointSetForest {
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 || n > u32::MAX as usize {
            return Err(Error::invalid(format!("vertex count must be in 1..=2^32-1, got {n}")));
        }
        let mut parent = Vec::new();
        let mut size = Vec::new();
        parent
            .try_reserve_exact(n)
            .and_then(|_| size.try_reserve_exact(n))
            .map_err(|_| Error::Resource(format!("cannot allocate a forest on {n} vertices")))?;
        parent.extend(0..n as u32);
        size.resize(n, 1);
        Ok(DisjointSetForest { parent, size })
    }

    pub fn len(&self) -> usize {
        self.parent.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parent.is_empty()
    }

    #[inline]
    pub fn find(&mut self, mut x: u32) -> u32 {
        loop {
            let p = self.parent[x as usize];
            if p == x {
                return x;
            }
            let gp = self.parent[p as usize];
            self.parent[x as usize] = gp;
            x = gp;
        }
    }

    /// Size of the tree rooted at `root`.
    #[inline]
    pub fn root_size(&self, root: u32) -> u64 {
        self.size[root as usize] as u64
    }

    pub fn component_size(&mut self, x: u32) -> u64 {
        let r = self.find(x);
        self.root_size(r)
    }

    /// Join the trees rooted at `a` and `b` (both roots, distinct);
    /// returns the new root.
    #[inline]
    pub fn union_roots(&mut self, a: u32, b: u32) -> u32 {
        debug_assert_ne!(a, b);
        let (big, small) = if self.size[a as usize] >= self.size[b as usize] {
            (a, b)
        } else {
            (b, a)
        };
        self.parent[small as usize] = big;
        self.size[big as usize] += self.size[small as usize];
        big
    }

    /// Acyclic parent pointers and root sizes equal to tree sizes.
    pub fn check(&self) -> Result<()> {
        let n = self.parent.len();
        let mut counted = vec![0u64; n];
        for v in 0..n {
            let mut x = v;
            let mut hops = 0;
            while self.parent[x] as usize != x {
                x = self.parent[x] as usize;
                hops += 1;
                if hops > n {
                    return Err(Error::Invariant(format!("cycle through vertex {v}")));
                }
            }
            counted[x] += 1;
        }
        for (r, &c) in counted.iter().enumerate() {
            if c > 0 && c != self.size[r] as u64 {
                return Err(Error::Invariant(format!(
                    "root {r} records size {} but spans {c} vertices",
                    self.size[r]
                )));
            }
        }
        Ok(())
    }
}
