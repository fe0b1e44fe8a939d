//! Dense tensors with polynomial components over a chart.

use std::fmt;

use crate::coeffring::{MultiPoly, Vars};

/// Index position of a tensor slot.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Slot {
    Up,
    Down,
}

/// Rank-`rank` array of `dim^rank` polynomial components, row-major.
#[derive(Clone, PartialEq, Eq)]
pub struct Tensor {
    vars: Vars,
    dim: usize,
    rank: usize,
    data: Vec<MultiPoly>,
}

impl Tensor {
    pub fn zeros(vars: &Vars, dim: usize, rank: usize) -> Self {
        Tensor {
            vars: vars.clone(),
            dim,
            rank,
            data: vec![MultiPoly::zero(vars); dim.pow(rank as u32)],
        }
    }

    pub fn scalar(p: MultiPoly) -> Self {
        Tensor {
            vars: p.vars().clone(),
            dim: p.vars().len(),
            rank: 0,
            data: vec![p],
        }
    }

    /// Builds a tensor by evaluating `f` on every multi-index.
    pub fn from_fn(vars: &Vars, dim: usize, rank: usize, mut f: impl FnMut(&[usize]) -> MultiPoly) -> Self {
        let mut t = Self::zeros(vars, dim, rank);
        for (k, idx) in MultiIndices::new(dim, rank).enumerate() {
            t.data[k] = f(&idx);
        }
        t
    }

    pub fn vars(&self) -> &Vars {
        &self.vars
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    fn offset(&self, idx: &[usize]) -> usize {
        debug_assert_eq!(idx.len(), self.rank);
        idx.iter().fold(0, |acc, &i| {
            debug_assert!(i < self.dim);
            acc * self.dim + i
        })
    }

    pub fn get(&self, idx: &[usize]) -> &MultiPoly {
        &self.data[self.offset(idx)]
    }

    pub fn set(&mut self, idx: &[usize], value: MultiPoly) {
        let o = self.offset(idx);
        self.data[o] = value;
    }

    pub fn add_to(&mut self, idx: &[usize], value: &MultiPoly) {
        let o = self.offset(idx);
        self.data[o] += value;
    }

    pub fn indices(&self) -> MultiIndices {
        MultiIndices::new(self.dim, self.rank)
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(MultiPoly::is_zero)
    }

    /// First nonzero component, for error reporting.
    pub fn first_nonzero(&self) -> Option<(Vec<usize>, &MultiPoly)> {
        self.indices()
            .zip(self.data.iter())
            .find(|(_, p)| !p.is_zero())
    }

    pub fn sub(&self, other: &Tensor) -> Tensor {
        assert_eq!(self.rank, other.rank);
        Tensor {
            vars: self.vars.clone(),
            dim: self.dim,
            rank: self.rank,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect(),
        }
    }

    pub fn add(&self, other: &Tensor) -> Tensor {
        assert_eq!(self.rank, other.rank);
        Tensor {
            vars: self.vars.clone(),
            dim: self.dim,
            rank: self.rank,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn map(&self, f: impl Fn(&MultiPoly) -> MultiPoly) -> Tensor {
        Tensor {
            vars: self.vars.clone(),
            dim: self.dim,
            rank: self.rank,
            data: self.data.iter().map(f).collect(),
        }
    }

    pub fn nonzero(&self) -> impl Iterator<Item = (Vec<usize>, &MultiPoly)> {
        self.indices().zip(self.data.iter()).filter(|(_, p)| !p.is_zero())
    }

    /// Contracts slot pairs `(slot of self, slot of other)`; the free slots of
    /// `self` come first in the result, then those of `other`.
    pub fn contract(&self, other: &Tensor, pairs: &[(usize, usize)]) -> Tensor {
        assert_eq!(self.dim, other.dim);
        let free_a: Vec<usize> = (0..self.rank).filter(|s| !pairs.iter().any(|p| p.0 == *s)).collect();
        let free_b: Vec<usize> = (0..other.rank).filter(|s| !pairs.iter().any(|p| p.1 == *s)).collect();
        let mut out = Tensor::zeros(&self.vars, self.dim, free_a.len() + free_b.len());
        let b_entries: Vec<_> = other.nonzero().collect();
        let mut idx = vec![0; out.rank];
        for (ia, pa) in self.nonzero() {
            for (ib, pb) in &b_entries {
                if pairs.iter().any(|&(sa, sb)| ia[sa] != ib[sb]) {
                    continue;
                }
                for (k, &s) in free_a.iter().enumerate() {
                    idx[k] = ia[s];
                }
                for (k, &s) in free_b.iter().enumerate() {
                    idx[free_a.len() + k] = ib[s];
                }
                out.add_to(&idx, &(pa * *pb));
            }
        }
        out
    }

    /// The tensor with slots reordered so that slot `k` of the result is slot
    /// `order[k]` of `self`.
    pub fn permuted(&self, order: &[usize]) -> Tensor {
        assert_eq!(order.len(), self.rank);
        let mut out = Tensor::zeros(&self.vars, self.dim, self.rank);
        let mut src = vec![0; self.rank];
        for idx in self.indices() {
            for (k, &s) in order.iter().enumerate() {
                src[s] = idx[k];
            }
            out.set(&idx, self.get(&src).clone());
        }
        out
    }

    pub fn scale(&self, c: &crate::coeffring::Rational) -> Tensor {
        self.map(|p| p.scale(c))
    }

    /// True when the components are invariant under every permutation of slots.
    pub fn is_fully_symmetric(&self) -> bool {
        self.indices().all(|idx| {
            let mut sorted = idx.clone();
            sorted.sort_unstable();
            self.get(&idx) == self.get(&sorted)
        })
    }
}

impl fmt::Debug for Tensor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Tensor(rank {}, dim {}) {{", self.rank, self.dim)?;
        for (idx, p) in self.indices().zip(&self.data) {
            if !p.is_zero() {
                write!(f, " {idx:?}: {p};")?;
            }
        }
        write!(f, " }}")
    }
}

/// Iterator over `[0, dim)^rank` in row-major order.
pub struct MultiIndices {
    dim: usize,
    current: Option<Vec<usize>>,
}

impl MultiIndices {
    pub fn new(dim: usize, rank: usize) -> Self {
        MultiIndices {
            dim,
            current: if dim == 0 && rank > 0 { None } else { Some(vec![0; rank]) },
        }
    }
}

impl Iterator for MultiIndices {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        let cur = self.current.take()?;
        let mut next = cur.clone();
        let mut k = next.len();
        loop {
            if k == 0 {
                self.current = None;
                break;
            }
            k -= 1;
            next[k] += 1;
            if next[k] < self.dim {
                self.current = Some(next);
                break;
            }
            next[k] = 0;
        }
        Some(cur)
    }
}
