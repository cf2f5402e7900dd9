//! Dense covariant tensors on a finite frame.

use alloc::vec;
use alloc::vec::Vec;

/// A rank-`rank` array over a frame of dimension `dim`, stored row-major
/// (last index fastest). All indices are lowered.
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor {
    dim: usize,
    rank: usize,
    data: Vec<f64>,
}

impl Tensor {
    pub fn zeros(dim: usize, rank: usize) -> Self {
        Self { dim, rank, data: vec![0.0; dim.pow(rank as u32)] }
    }

    pub fn from_fn(dim: usize, rank: usize, mut f: impl FnMut(&[usize]) -> f64) -> Self {
        let mut t = Self::zeros(dim, rank);
        let mut idx = vec![0usize; rank];
        for flat in 0..t.data.len() {
            t.unflatten(flat, &mut idx);
            t.data[flat] = f(&idx);
        }
        t
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    #[inline]
    pub fn offset(&self, idx: &[usize]) -> usize {
        debug_assert_eq!(idx.len(), self.rank);
        idx.iter().fold(0, |acc, &i| acc * self.dim + i)
    }

    pub fn unflatten(&self, mut flat: usize, out: &mut [usize]) {
        for slot in out.iter_mut().rev() {
            *slot = flat % self.dim;
            flat /= self.dim;
        }
    }

    #[inline]
    pub fn get(&self, idx: &[usize]) -> f64 {
        self.data[self.offset(idx)]
    }

    #[inline]
    pub fn set(&mut self, idx: &[usize], v: f64) {
        let o = self.offset(idx);
        self.data[o] = v;
    }

    #[inline]
    pub fn add_at(&mut self, idx: &[usize], v: f64) {
        let o = self.offset(idx);
        self.data[o] += v;
    }

    pub fn sup_norm(&self) -> f64 {
        self.data.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    /// Sup norm of the difference; panics on shape mismatch.
    pub fn distance(&self, other: &Tensor) -> f64 {
        assert_eq!((self.dim, self.rank), (other.dim, other.rank));
        self.data.iter().zip(&other.data).fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }

    pub fn scaled(&self, s: f64) -> Tensor {
        Tensor { dim: self.dim, rank: self.rank, data: self.data.iter().map(|x| x * s).collect() }
    }

    pub fn add(&self, other: &Tensor) -> Tensor {
        assert_eq!((self.dim, self.rank), (other.dim, other.rank));
        Tensor { dim: self.dim, rank: self.rank, data: self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect() }
    }

    pub fn sub(&self, other: &Tensor) -> Tensor {
        self.add(&other.scaled(-1.0))
    }

    /// Contract slot `slot` with the matrix `m`: `out[.., a, ..] = sum_b m[a][b] self[.., b, ..]`.
    pub fn contract_slot(&self, slot: usize, m: &nalgebra::DMatrix<f64>) -> Tensor {
        let n = self.dim;
        let mut out = Tensor::zeros(n, self.rank);
        let mut idx = vec![0usize; self.rank];
        for flat in 0..self.data.len() {
            let v = self.data[flat];
            if v == 0.0 {
                continue;
            }
            self.unflatten(flat, &mut idx);
            let b = idx[slot];
            for a in 0..n {
                let w = m[(a, b)];
                if w != 0.0 {
                    idx[slot] = a;
                    out.add_at(&idx, w * v);
                }
            }
            idx[slot] = b;
        }
        out
    }

    /// Full contraction `sum self[i..] * other[i..]` of equal-shape tensors.
    pub fn dot(&self, other: &Tensor) -> f64 {
        assert_eq!((self.dim, self.rank), (other.dim, other.rank));
        self.data.iter().zip(&other.data).map(|(a, b)| a * b).sum()
    }
}
