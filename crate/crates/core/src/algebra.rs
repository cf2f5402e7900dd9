//! Lie algebra frames given by structure constants.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::forms::FormTensor;
use crate::linalg::Mat;
use crate::tensor::Tensor;

/// Structure constants `c[i][j][k]` with `[e_i, e_j] = Σ_k c[i][j][k] e_k`.
#[derive(Debug, Clone, PartialEq)]
pub struct StructureAlgebra {
    c: Tensor,
}

/// Tolerance on the Jacobi residual, relative to the square of the largest constant.
pub const JACOBI_TOLERANCE: f64 = 1e-14;

impl StructureAlgebra {
    /// Validated construction from a dense rank-3 tensor.
    pub fn new(c: Tensor) -> Result<Self> {
        if c.rank() != 3 {
            return Err(Error::DimensionMismatch { expected: 3, found: c.rank() });
        }
        let a = Self { c };
        let scale = a.c.sup_norm().max(1.0);
        let asym = a.antisymmetry_residual();
        if asym > JACOBI_TOLERANCE * scale {
            return Err(Error::NotAntisymmetric(asym));
        }
        let jac = a.jacobi_residual();
        if jac > JACOBI_TOLERANCE * scale * scale {
            return Err(Error::JacobiFailure(jac));
        }
        Ok(a)
    }

    /// Builds from sparse triples `(i, j, k, value)`; the `(j, i)` entry is filled by antisymmetry.
    pub fn from_triples(dim: usize, triples: &[(usize, usize, usize, f64)]) -> Result<Self> {
        let mut c = Tensor::zeros(dim, 3);
        for &(i, j, k, v) in triples {
            let bad = i.max(j).max(k);
            if bad >= dim {
                return Err(Error::DimensionMismatch { expected: dim, found: bad + 1 });
            }
            if i == j {
                if v != 0.0 {
                    return Err(Error::NotAntisymmetric(v.abs()));
                }
                continue;
            }
            c.set(&[i, j, k], v);
            c.set(&[j, i, k], -v);
        }
        Self::new(c)
    }

    pub fn abelian(dim: usize) -> Self {
        Self { c: Tensor::zeros(dim, 3) }
    }

    /// `su(2)` with `[e_0, e_1] = e_2` and cyclic permutations.
    pub fn su2() -> Self {
        Self::from_triples(3, &[(0, 1, 2, 1.0), (1, 2, 0, 1.0), (2, 0, 1, 1.0)]).expect("su(2) is a Lie algebra")
    }

    pub fn dim(&self) -> usize {
        self.c.dim()
    }

    pub fn constants(&self) -> &Tensor {
        &self.c
    }

    #[inline]
    pub fn c(&self, i: usize, j: usize, k: usize) -> f64 {
        self.c.get(&[i, j, k])
    }

    /// Nonzero `(i, j, k, c_ijk)` with `i < j`, in lexicographic order.
    pub fn triples(&self) -> Vec<(usize, usize, usize, f64)> {
        let n = self.dim();
        let mut out = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                for k in 0..n {
                    let v = self.c(i, j, k);
                    if v != 0.0 {
                        out.push((i, j, k, v));
                    }
                }
            }
        }
        out
    }

    pub fn bracket(&self, x: &[f64], y: &[f64]) -> Vec<f64> {
        let n = self.dim();
        let mut out = vec![0.0; n];
        for i in 0..n {
            if x[i] == 0.0 {
                continue;
            }
            for j in 0..n {
                if y[j] == 0.0 {
                    continue;
                }
                let w = x[i] * y[j];
                for (k, o) in out.iter_mut().enumerate() {
                    *o += w * self.c(i, j, k);
                }
            }
        }
        out
    }

    pub fn antisymmetry_residual(&self) -> f64 {
        let n = self.dim();
        let mut r = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    r = r.max((self.c(i, j, k) + self.c(j, i, k)).abs());
                }
            }
        }
        r
    }

    /// Sup norm of `[[e_i,e_j],e_k] + cyclic`.
    pub fn jacobi_residual(&self) -> f64 {
        let n = self.dim();
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    for l in 0..n {
                        let mut s = 0.0;
                        for m in 0..n {
                            s += self.c(i, j, m) * self.c(m, k, l)
                                + self.c(j, k, m) * self.c(m, i, l)
                                + self.c(k, i, m) * self.c(m, j, l);
                        }
                        worst = worst.max(s.abs());
                    }
                }
            }
        }
        worst
    }

    /// Invariant exterior derivative
    /// `dβ(X_0..X_k) = Σ_{s<t} (-1)^{s+t} β([X_s,X_t], X_0..X̂_s..X̂_t..X_k)`.
    pub fn exterior_derivative(&self, beta: &FormTensor) -> Result<FormTensor> {
        let n = self.dim();
        if beta.dim() != n {
            return Err(Error::DimensionMismatch { expected: n, found: beta.dim() });
        }
        let k = beta.degree();
        let mut out = FormTensor::zero(n, k + 1)?;
        let targets: Vec<u32> = out.components().map(|(m, _)| m).collect();
        let mut args = vec![0usize; k];
        for mask in targets {
            let idx: Vec<usize> = (0..n).filter(|&i| mask & (1 << i) != 0).collect();
            let mut acc = 0.0;
            for s in 0..=k {
                for t in s + 1..=k {
                    let sign = if (s + t) % 2 == 0 { 1.0 } else { -1.0 };
                    let mut pos = 1;
                    for (r, &x) in idx.iter().enumerate() {
                        if r != s && r != t {
                            if k > 0 {
                                args[pos] = x;
                            }
                            pos += 1;
                        }
                    }
                    for m in 0..n {
                        let cm = self.c(idx[s], idx[t], m);
                        if cm != 0.0 {
                            args[0] = m;
                            acc += sign * cm * beta.get(&args);
                        }
                    }
                }
            }
            out.add_component(&idx, acc);
        }
        Ok(out)
    }

    /// Structure constants in the frame `e'_a = Σ_i B[i][a] e_i`.
    pub fn change_basis(&self, b: &Mat) -> Result<Self> {
        let n = self.dim();
        if b.nrows() != n || b.ncols() != n {
            return Err(Error::DimensionMismatch { expected: n, found: b.nrows() });
        }
        let binv = b.clone().try_inverse().ok_or_else(|| Error::Singular("frame change".into()))?;
        let mut c = Tensor::zeros(n, 3);
        for a in 0..n {
            for bb in 0..n {
                let x: Vec<f64> = (0..n).map(|i| b[(i, a)]).collect();
                let y: Vec<f64> = (0..n).map(|i| b[(i, bb)]).collect();
                let z = self.bracket(&x, &y);
                for cc in 0..n {
                    let v: f64 = (0..n).map(|k| binv[(cc, k)] * z[k]).sum();
                    c.set(&[a, bb, cc], v);
                }
            }
        }
        Self::new(c)
    }

    pub fn direct_sum(&self, other: &Self) -> Self {
        let (n, m) = (self.dim(), other.dim());
        let mut c = Tensor::zeros(n + m, 3);
        for (i, j, k, v) in self.triples() {
            c.set(&[i, j, k], v);
            c.set(&[j, i, k], -v);
        }
        for (i, j, k, v) in other.triples() {
            c.set(&[n + i, n + j, n + k], v);
            c.set(&[n + j, n + i, n + k], -v);
        }
        Self { c }
    }

    /// Sup norm of the Nijenhuis tensor
    /// `N(X,Y) = [JX,JY] - J[JX,Y] - J[X,JY] - [X,Y]` on frame pairs.
    pub fn nijenhuis_residual(&self, j: &Mat) -> f64 {
        let n = self.dim();
        let col = |i: usize| -> Vec<f64> { (0..n).map(|k| j[(k, i)]).collect() };
        let apply = |v: &[f64]| -> Vec<f64> { crate::linalg::mat_vec(j, v) };
        let mut worst = 0.0f64;
        for a in 0..n {
            for b in a + 1..n {
                let mut ea = vec![0.0; n];
                ea[a] = 1.0;
                let mut eb = vec![0.0; n];
                eb[b] = 1.0;
                let (ja, jb) = (col(a), col(b));
                let t1 = self.bracket(&ja, &jb);
                let t2 = apply(&self.bracket(&ja, &eb));
                let t3 = apply(&self.bracket(&ea, &jb));
                let t4 = self.bracket(&ea, &eb);
                for k in 0..n {
                    worst = worst.max((t1[k] - t2[k] - t3[k] - t4[k]).abs());
                }
            }
        }
        worst
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn abelian_derivative_vanishes() {
        let a = StructureAlgebra::abelian(4);
        let b = FormTensor::basis(4, &[0, 2]).unwrap();
        assert_eq!(a.exterior_derivative(&b).unwrap().sup_norm(), 0.0);
    }

    #[test]
    fn su2_coframe_derivative() {
        // dσ(X,Y) = -σ([X,Y]) gives dσ^0 = -σ^1∧σ^2.
        let a = StructureAlgebra::su2();
        let s0 = FormTensor::basis(3, &[0]).unwrap();
        let d = a.exterior_derivative(&s0).unwrap();
        let expected = FormTensor::basis(3, &[1, 2]).unwrap().scale(-1.0);
        assert_eq!(d, expected);
        // direct expansion of the invariant formula on (e_1, e_2)
        let e1 = [0.0, 1.0, 0.0];
        let e2 = [0.0, 0.0, 1.0];
        let br = a.bracket(&e1, &e2);
        assert_eq!(d.eval(&[&e1, &e2]).unwrap(), -s0.eval(&[&br]).unwrap());
    }

    #[test]
    fn non_jacobi_constants_are_rejected() {
        let r = StructureAlgebra::from_triples(3, &[(0, 1, 2, 1.0), (1, 2, 0, 1.0), (0, 2, 0, 1.0)]);
        assert!(matches!(r, Err(Error::JacobiFailure(_))));
    }

    #[test]
    fn frame_change_preserves_jacobi() {
        let a = StructureAlgebra::su2().direct_sum(&StructureAlgebra::abelian(1));
        let b = Mat::from_fn(4, 4, |i, j| if i == j { 2.0 } else { 0.1 * (i + 2 * j) as f64 });
        let c = a.change_basis(&b).unwrap();
        assert!(c.jacobi_residual() < 1e-13);
        let back = c.change_basis(&b.try_inverse().unwrap()).unwrap();
        assert!(back.constants().distance(a.constants()) < 1e-13);
    }

    fn random_form(n: usize, k: usize, vals: &[f64]) -> FormTensor {
        let mut f = FormTensor::zero(n, k).unwrap();
        let masks: Vec<u32> = f.components().map(|(m, _)| m).collect();
        for (m, v) in masks.iter().zip(vals.iter().cycle()) {
            let idx: Vec<usize> = (0..n).filter(|i| m & (1 << i) != 0).collect();
            f.add_component(&idx, *v);
        }
        f
    }

    proptest! {
        #[test]
        fn d_squared_vanishes(k in 0usize..4, vals in proptest::collection::vec(-1.0f64..1.0, 20), s in 0.2f64..3.0) {
            let a = StructureAlgebra::su2().direct_sum(&StructureAlgebra::su2());
            let b = Mat::from_fn(6, 6, |i, j| if i == j { s } else { 0.05 * ((i * 7 + j * 3) % 5) as f64 });
            let a = a.change_basis(&b).unwrap();
            let beta = random_form(6, k, &vals);
            let dd = a.exterior_derivative(&a.exterior_derivative(&beta).unwrap()).unwrap();
            prop_assert!(dd.sup_norm() < 1e-12);
        }
    }
}
