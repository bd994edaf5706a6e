//! Row-major shape bookkeeping for dense tensors over named variables.

use crate::error::{Error, Result};

/// Hard cap on dense tensor size: 2^24 cells.
pub const MAX_CELLS: usize = 1 << 24;

/// Cardinalities plus derived strides, first axis slowest.
#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) struct Shape {
    cards: Vec<usize>,
    strides: Vec<usize>,
    len: usize,
}

impl Shape {
    pub fn new(cards: Vec<usize>) -> Result<Self> {
        let mut len: u128 = 1;
        for &c in &cards {
            if c == 0 {
                return Err(Error::InvalidInput("variable cardinality must be >= 1".into()));
            }
            len *= c as u128;
        }
        if len > MAX_CELLS as u128 {
            return Err(Error::StateSpaceTooLarge { cells: len, cap: MAX_CELLS });
        }
        let len = len as usize;
        let mut strides = vec![1usize; cards.len()];
        for i in (0..cards.len().saturating_sub(1)).rev() {
            strides[i] = strides[i + 1] * cards[i + 1];
        }
        Ok(Shape { cards, strides, len })
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn rank(&self) -> usize {
        self.cards.len()
    }

    pub fn cards(&self) -> &[usize] {
        &self.cards
    }

    pub fn stride(&self, axis: usize) -> usize {
        self.strides[axis]
    }

    pub fn index_of(&self, multi: &[usize]) -> usize {
        debug_assert_eq!(multi.len(), self.cards.len());
        multi.iter().zip(&self.strides).map(|(i, s)| i * s).sum()
    }

    #[cfg(test)]
    pub fn multi_of(&self, mut cell: usize, out: &mut [usize]) {
        for (i, &s) in self.strides.iter().enumerate() {
            out[i] = cell / s;
            cell %= s;
        }
    }

    /// Shape of the marginal over `axes` (ascending), preserving axis order.
    pub fn sub_shape(&self, axes: &[usize]) -> Shape {
        let cards: Vec<usize> = axes.iter().map(|&a| self.cards[a]).collect();
        Shape::new(cards).expect("sub-shape within cap")
    }

    /// For every cell, the flat index of its projection onto `axes`
    /// (ascending axis order, row-major).
    ///
    /// Walks cells in order with an odometer so the map costs O(len).
    pub fn bucket_map(&self, axes: &[usize]) -> Vec<u32> {
        debug_assert!(axes.windows(2).all(|w| w[0] < w[1]));
        let sub = self.sub_shape(axes);
        let mut bucket_stride = vec![0usize; self.rank()];
        for (pos, &a) in axes.iter().enumerate() {
            bucket_stride[a] = sub.stride(pos);
        }
        let mut map = vec![0u32; self.len];
        let mut idx = vec![0usize; self.rank()];
        let mut bucket = 0usize;
        for cell in 0..self.len {
            map[cell] = bucket as u32;
            // odometer increment, last axis fastest
            for a in (0..self.rank()).rev() {
                idx[a] += 1;
                bucket += bucket_stride[a];
                if idx[a] < self.cards[a] {
                    break;
                }
                bucket -= bucket_stride[a] * self.cards[a];
                idx[a] = 0;
            }
        }
        map
    }

    /// Accumulate `probs` into buckets indexed by the projection onto `axes`,
    /// without materializing the cell->bucket map.
    pub fn fold_buckets<F: Copy + std::ops::AddAssign + num_traits::Zero>(
        &self,
        probs: &[F],
        axes: &[usize],
    ) -> Vec<F> {
        debug_assert_eq!(probs.len(), self.len);
        let sub = self.sub_shape(axes);
        let mut bucket_stride = vec![0usize; self.rank()];
        for (pos, &a) in axes.iter().enumerate() {
            bucket_stride[a] = sub.stride(pos);
        }
        let mut out = vec![F::zero(); sub.len()];
        let mut idx = vec![0usize; self.rank()];
        let mut bucket = 0usize;
        for cell in 0..self.len {
            out[bucket] += probs[cell];
            for a in (0..self.rank()).rev() {
                idx[a] += 1;
                bucket += bucket_stride[a];
                if idx[a] < self.cards[a] {
                    break;
                }
                bucket -= bucket_stride[a] * self.cards[a];
                idx[a] = 0;
            }
        }
        out
    }
}
