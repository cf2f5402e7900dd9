//! Alternating forms on a finite frame.
//!
//! A [`FormTensor`] stores one coefficient per strictly increasing index
//! tuple, addressed by the bitmask of the tuple, so `e^0 ∧ e^2` lives at mask
//! `0b101`. Evaluation follows the determinant convention
//! `(e^1 ∧ e^2)(e_1, e_2) = 1`. Contractions go through an explicit
//! [`MetricFrame`] and never assume orthonormality.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::linalg::{det_in_place, Mat};
use crate::tensor::Tensor;

/// Largest supported frame dimension.
pub const MAX_DIM: usize = 16;

/// Number of inversions between two disjoint sorted index sets placed side by side.
fn shuffle_inversions(a: u32, b: u32) -> u32 {
    let mut count = 0;
    let mut rest = b;
    while rest != 0 {
        let j = rest.trailing_zeros();
        count += (a >> (j + 1)).count_ones();
        rest &= rest - 1;
    }
    count
}

fn parity_sign(inversions: u32) -> f64 {
    if inversions.is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

/// Sorts `idx` into a bitmask and returns the permutation sign, or `None` on a repeated index.
pub fn sort_indices(idx: &[usize]) -> Option<(u32, f64)> {
    let mut mask = 0u32;
    let mut inversions = 0u32;
    for &i in idx {
        let bit = 1u32 << i;
        if mask & bit != 0 {
            return None;
        }
        inversions += (mask >> (i + 1)).count_ones();
        mask |= bit;
    }
    Some((mask, parity_sign(inversions)))
}

fn mask_indices(mask: u32) -> Vec<usize> {
    let mut out = Vec::with_capacity(mask.count_ones() as usize);
    let mut m = mask;
    while m != 0 {
        out.push(m.trailing_zeros() as usize);
        m &= m - 1;
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct FormTensor {
    dim: usize,
    degree: usize,
    coeffs: Vec<f64>,
}

impl FormTensor {
    pub fn zero(dim: usize, degree: usize) -> Result<Self> {
        if dim == 0 || dim > MAX_DIM {
            return Err(Error::UnsupportedDimension(dim));
        }
        if degree > dim {
            return Err(Error::DegreeOverflow { degree, dim });
        }
        Ok(Self { dim, degree, coeffs: vec![0.0; 1 << dim] })
    }

    pub fn scalar(dim: usize, value: f64) -> Result<Self> {
        let mut f = Self::zero(dim, 0)?;
        f.coeffs[0] = value;
        Ok(f)
    }

    /// `e^{i_1} ∧ ... ∧ e^{i_k}` in the given (not necessarily sorted) order.
    pub fn basis(dim: usize, indices: &[usize]) -> Result<Self> {
        let mut f = Self::zero(dim, indices.len())?;
        if let Some(&bad) = indices.iter().find(|&&i| i >= dim) {
            return Err(Error::DimensionMismatch { expected: dim, found: bad + 1 });
        }
        f.add_component(indices, 1.0);
        Ok(f)
    }

    pub fn one_form(coeffs: &[f64]) -> Result<Self> {
        let mut f = Self::zero(coeffs.len(), 1)?;
        for (i, &c) in coeffs.iter().enumerate() {
            f.coeffs[1 << i] = c;
        }
        Ok(f)
    }

    /// Reads the strictly upper triangle of an antisymmetric matrix.
    pub fn from_antisymmetric(m: &Mat) -> Result<Self> {
        let n = m.nrows();
        if m.ncols() != n {
            return Err(Error::DimensionMismatch { expected: n, found: m.ncols() });
        }
        let scale = m.iter().fold(1.0f64, |a, x| a.max(x.abs()));
        let mut asym = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                asym = asym.max((m[(i, j)] + m[(j, i)]).abs());
            }
        }
        if asym > 1e-12 * scale {
            return Err(Error::NotAntisymmetric(asym));
        }
        let mut f = Self::zero(n, 2)?;
        for i in 0..n {
            for j in i + 1..n {
                f.coeffs[(1 << i) | (1 << j)] = m[(i, j)];
            }
        }
        Ok(f)
    }

    /// Builds a form from a dense fully antisymmetric tensor.
    pub fn from_tensor(t: &Tensor) -> Result<Self> {
        let mut f = Self::zero(t.dim(), t.rank())?;
        let scale = t.sup_norm().max(1.0);
        let mut idx = vec![0usize; t.rank()];
        let mut worst = 0.0f64;
        for flat in 0..t.data().len() {
            t.unflatten(flat, &mut idx);
            let v = t.data()[flat];
            match sort_indices(&idx) {
                None => worst = worst.max(v.abs()),
                Some((mask, sign)) => {
                    if idx.windows(2).all(|w| w[0] < w[1]) {
                        f.coeffs[mask as usize] = v;
                    } else {
                        let reference = t.get(&mask_indices(mask));
                        worst = worst.max((v - sign * reference).abs());
                    }
                }
            }
        }
        if worst > 1e-12 * scale {
            return Err(Error::NotAntisymmetric(worst));
        }
        Ok(f)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    /// Iterates over `(mask, coefficient)` for all increasing index tuples.
    pub fn components(&self) -> impl Iterator<Item = (u32, f64)> + '_ {
        let k = self.degree as u32;
        self.coeffs.iter().enumerate().filter(move |(m, _)| (*m as u32).count_ones() == k).map(|(m, &v)| (m as u32, v))
    }

    pub fn coefficient(&self, mask: u32) -> f64 {
        self.coeffs[mask as usize]
    }

    /// Component on an arbitrary index tuple (antisymmetry applied).
    pub fn get(&self, idx: &[usize]) -> f64 {
        debug_assert_eq!(idx.len(), self.degree);
        match sort_indices(idx) {
            Some((mask, sign)) => sign * self.coeffs[mask as usize],
            None => 0.0,
        }
    }

    /// Adds `v` to the component on `idx`; repeated indices are ignored.
    pub fn add_component(&mut self, idx: &[usize], v: f64) {
        debug_assert_eq!(idx.len(), self.degree);
        if let Some((mask, sign)) = sort_indices(idx) {
            self.coeffs[mask as usize] += sign * v;
        }
    }

    pub fn to_tensor(&self) -> Tensor {
        let k = self.degree;
        Tensor::from_fn(self.dim, k, |idx| self.get(idx))
    }

    pub fn to_matrix(&self) -> Result<Mat> {
        self.expect_degree(2)?;
        Ok(Mat::from_fn(self.dim, self.dim, |i, j| self.get(&[i, j])))
    }

    pub fn to_vector(&self) -> Result<Vec<f64>> {
        self.expect_degree(1)?;
        Ok((0..self.dim).map(|i| self.coeffs[1 << i]).collect())
    }

    pub fn expect_degree(&self, degree: usize) -> Result<()> {
        if self.degree != degree {
            return Err(Error::WrongDegree { expected: degree, found: self.degree });
        }
        Ok(())
    }

    fn check_shape(&self, other: &Self) -> Result<()> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, found: other.dim });
        }
        if self.degree != other.degree {
            return Err(Error::WrongDegree { expected: self.degree, found: other.degree });
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_shape(other)?;
        let coeffs = self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a + b).collect();
        Ok(Self { coeffs, ..*self })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.scale(-1.0))
    }

    pub fn scale(&self, s: f64) -> Self {
        Self { coeffs: self.coeffs.iter().map(|x| x * s).collect(), ..*self }
    }

    /// Largest absolute coefficient on increasing tuples.
    pub fn sup_norm(&self) -> f64 {
        self.coeffs.iter().fold(0.0, |a, x| a.max(x.abs()))
    }

    pub fn distance(&self, other: &Self) -> Result<f64> {
        Ok(self.sub(other)?.sup_norm())
    }

    pub fn wedge(&self, other: &Self) -> Result<Self> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, found: other.dim });
        }
        let mut out = Self::zero(self.dim, self.degree + other.degree)?;
        for (ma, a) in self.components() {
            if a == 0.0 {
                continue;
            }
            for (mb, b) in other.components() {
                if b == 0.0 || ma & mb != 0 {
                    continue;
                }
                let sign = parity_sign(shuffle_inversions(ma, mb));
                out.coeffs[(ma | mb) as usize] += sign * a * b;
            }
        }
        Ok(out)
    }

    /// Interior product `ι_x β`, inserting `x` into the first slot.
    pub fn interior(&self, x: &[f64]) -> Result<Self> {
        if x.len() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, found: x.len() });
        }
        if self.degree == 0 {
            return Self::zero(self.dim, 0);
        }
        let mut out = Self::zero(self.dim, self.degree - 1)?;
        for (mask, v) in self.components() {
            if v == 0.0 {
                continue;
            }
            let mut rest = mask;
            let mut position = 0;
            while rest != 0 {
                let i = rest.trailing_zeros() as usize;
                let remaining = mask & !(1u32 << i);
                out.coeffs[remaining as usize] += parity_sign(position) * x[i] * v;
                position += 1;
                rest &= rest - 1;
            }
        }
        Ok(out)
    }

    /// `β(X_1, ..., X_k)` for frame-coordinate vectors.
    pub fn eval(&self, vectors: &[&[f64]]) -> Result<f64> {
        let k = self.degree;
        if vectors.len() != k {
            return Err(Error::WrongDegree { expected: k, found: vectors.len() });
        }
        if let Some(v) = vectors.iter().find(|v| v.len() != self.dim) {
            return Err(Error::DimensionMismatch { expected: self.dim, found: v.len() });
        }
        let mut total = 0.0;
        let mut buf = vec![0.0; k * k];
        for (mask, c) in self.components() {
            if c == 0.0 {
                continue;
            }
            let rows = mask_indices(mask);
            for (r, &i) in rows.iter().enumerate() {
                for (col, v) in vectors.iter().enumerate() {
                    buf[r * k + col] = v[i];
                }
            }
            total += c * det_in_place(&mut buf, k);
        }
        Ok(total)
    }

    /// `(A^* β)(X_1, ..., X_k) = β(A X_1, ..., A X_k)` where column `i` of `a`
    /// holds the frame coordinates of `A e_i`.
    pub fn pullback(&self, a: &Mat) -> Result<Self> {
        if a.nrows() != self.dim || a.ncols() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, found: a.nrows() });
        }
        let k = self.degree;
        let mut out = Self::zero(self.dim, k)?;
        let mut buf = vec![0.0; k * k];
        let targets: Vec<u32> = out.components().map(|(m, _)| m).collect();
        let sources: Vec<(Vec<usize>, f64)> =
            self.components().filter(|(_, v)| *v != 0.0).map(|(m, v)| (mask_indices(m), v)).collect();
        for tmask in targets {
            let cols = mask_indices(tmask);
            let mut acc = 0.0;
            for (rows, v) in &sources {
                for (r, &i) in rows.iter().enumerate() {
                    for (c, &j) in cols.iter().enumerate() {
                        buf[r * k + c] = a[(i, j)];
                    }
                }
                acc += v * det_in_place(&mut buf, k);
            }
            out.coeffs[tmask as usize] = acc;
        }
        Ok(out)
    }

    /// The action of an almost complex structure on forms,
    /// `(Jβ)(X_1, ..., X_k) = (-1)^k β(JX_1, ..., JX_k)`, so that `Jη = -η∘J`
    /// on 1-forms and `Jβ = β(J·,J·)` on 2-forms.
    pub fn j_action(&self, j: &Mat) -> Result<Self> {
        let pulled = self.pullback(j)?;
        Ok(if self.degree.is_multiple_of(2) { pulled } else { pulled.scale(-1.0) })
    }

    /// Components on the leading `dim` frame vectors, as a form on that subframe.
    pub fn leading(&self, dim: usize) -> Result<Self> {
        let mut out = Self::zero(dim.min(self.dim), self.degree)?;
        let len = out.coeffs.len();
        out.coeffs.copy_from_slice(&self.coeffs[..len]);
        Ok(out)
    }

    /// Inverse of [`FormTensor::leading`]: the same components in a larger frame.
    pub fn extend(&self, dim: usize) -> Result<Self> {
        if dim < self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, found: dim });
        }
        let mut out = Self::zero(dim, self.degree)?;
        out.coeffs[..self.coeffs.len()].copy_from_slice(&self.coeffs);
        Ok(out)
    }

    /// Component with every index restricted to `keep` (other components zeroed).
    pub fn restrict(&self, keep: &[usize]) -> Self {
        let allowed: u32 = keep.iter().fold(0, |m, &i| m | (1 << i));
        let coeffs =
            self.coeffs.iter().enumerate().map(|(m, &v)| if (m as u32) & !allowed == 0 { v } else { 0.0 }).collect();
        Self { coeffs, ..*self }
    }
}

/// A symmetric positive-definite metric on a frame together with its inverse.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricFrame {
    g: Mat,
    inv: Mat,
    sqrt_det: f64,
}

impl MetricFrame {
    pub fn new(g: Mat) -> Result<Self> {
        let n = g.nrows();
        if g.ncols() != n {
            return Err(Error::DimensionMismatch { expected: n, found: g.ncols() });
        }
        if n == 0 || n > MAX_DIM {
            return Err(Error::UnsupportedDimension(n));
        }
        let scale = g.iter().fold(0.0f64, |a, x| a.max(x.abs()));
        let asymmetry = (&g - g.transpose()).iter().fold(0.0f64, |a, x| a.max(x.abs()));
        if !(scale > 0.0) || asymmetry > 1e-13 * scale || g.iter().any(|x| !x.is_finite()) {
            return Err(Error::NotPositiveDefinite { asymmetry });
        }
        let sym = (&g + g.transpose()) * 0.5;
        let chol = sym.clone().cholesky().ok_or(Error::NotPositiveDefinite { asymmetry })?;
        let inv = chol.inverse();
        let det: f64 = chol.l().diagonal().iter().map(|d| d * d).product();
        Ok(Self { g: sym, inv, sqrt_det: libm::sqrt(det) })
    }

    pub fn identity(n: usize) -> Result<Self> {
        Self::new(Mat::identity(n, n))
    }

    pub fn dim(&self) -> usize {
        self.g.nrows()
    }

    pub fn matrix(&self) -> &Mat {
        &self.g
    }

    pub fn inverse(&self) -> &Mat {
        &self.inv
    }

    pub fn sqrt_det(&self) -> f64 {
        self.sqrt_det
    }

    pub fn scaled(&self, s: f64) -> Result<Self> {
        Self::new(&self.g * s)
    }

    pub fn inner_vectors(&self, u: &[f64], v: &[f64]) -> f64 {
        crate::linalg::bilinear(&self.g, u, v)
    }

    /// `g(x, ·)` as a 1-form.
    pub fn flat(&self, x: &[f64]) -> Result<FormTensor> {
        FormTensor::one_form(&crate::linalg::mat_vec(&self.g, x))
    }

    /// `g^{-1}(α, ·)` as a frame vector.
    pub fn sharp(&self, alpha: &FormTensor) -> Result<Vec<f64>> {
        Ok(crate::linalg::mat_vec(&self.inv, &alpha.to_vector()?))
    }

    /// Riemannian volume form `sqrt(det g) e^1 ∧ ... ∧ e^n` for the frame orientation.
    pub fn volume_form(&self) -> FormTensor {
        let n = self.dim();
        let mut f = FormTensor::zero(n, n).expect("dimension validated at construction");
        f.coeffs[(1usize << n) - 1] = self.sqrt_det;
        f
    }

    fn check_form(&self, a: &FormTensor) -> Result<()> {
        if a.dim != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: a.dim });
        }
        Ok(())
    }

    /// Dense tensor of `a` with every index raised.
    pub fn raise_all(&self, a: &FormTensor) -> Tensor {
        let mut t = a.to_tensor();
        for slot in 0..a.degree {
            t = t.contract_slot(slot, &self.inv);
        }
        t
    }
}

/// `e^I ∧ e^J` style sign for a form of degree `k` against its complement.
fn complement_sign(mask: u32, full: u32) -> f64 {
    parity_sign(shuffle_inversions(full & !mask, mask))
}

/// Hodge star for the frame orientation, characterized by `a ∧ *b = <a,b> dV`
/// with the determinant inner product on forms.
pub fn hodge_star(a: &FormTensor, g: &MetricFrame) -> Result<FormTensor> {
    g.check_form(a)?;
    let n = a.dim;
    let k = a.degree;
    let raised = g.raise_all(a);
    let full: u32 = ((1u64 << n) - 1) as u32;
    let mut out = FormTensor::zero(n, n - k)?;
    let targets: Vec<u32> = out.components().map(|(m, _)| m).collect();
    for jmask in targets {
        let imask = full & !jmask;
        let upper = raised.get(&mask_indices(imask));
        out.coeffs[jmask as usize] = g.sqrt_det * complement_sign(jmask, full) * upper;
    }
    Ok(out)
}

/// Determinant inner product `<a, b>`, for which `<e^1∧e^2, e^1∧e^2> = 1`
/// in an orthonormal frame.
pub fn inner(a: &FormTensor, b: &FormTensor, g: &MetricFrame) -> Result<f64> {
    a.check_shape(b)?;
    g.check_form(a)?;
    let raised = g.raise_all(b);
    let mut s = 0.0;
    for (mask, v) in a.components() {
        if v != 0.0 {
            s += v * raised.get(&mask_indices(mask));
        }
    }
    Ok(s)
}

/// Full tensor norm `Σ β_{i_1..i_k} β^{i_1..i_k}` over ordered tuples;
/// for 2-forms this is the doubled norm with `|ω|² = 4` on a Hermitian 4-frame.
pub fn norm_sq(a: &FormTensor, g: &MetricFrame) -> Result<f64> {
    let fact: f64 = (1..=a.degree).map(|x| x as f64).product();
    Ok(fact * inner(a, a, g)?)
}

/// Raised Kähler-type form `ω^{ij} = g^{ia} ω_{ab} g^{bj}`.
fn raise_two_form(omega: &FormTensor, g: &MetricFrame) -> Result<Mat> {
    omega.expect_degree(2)?;
    g.check_form(omega)?;
    let w = omega.to_matrix()?;
    Ok(g.inverse() * w * g.inverse())
}

/// `Σ_{i,j} ω^{ij} ψ(e_i, e_j, ·)` over all ordered pairs.
pub fn omega_contract(psi: &FormTensor, omega: &FormTensor, g: &MetricFrame) -> Result<FormTensor> {
    if psi.degree < 2 {
        return Err(Error::WrongDegree { expected: 2, found: psi.degree });
    }
    g.check_form(psi)?;
    let up = raise_two_form(omega, g)?;
    let n = psi.dim;
    let mut out = FormTensor::zero(n, psi.degree - 2)?;
    let targets: Vec<u32> = out.components().map(|(m, _)| m).collect();
    let mut idx = vec![0usize; psi.degree];
    for tmask in targets {
        let rest = mask_indices(tmask);
        idx[2..].copy_from_slice(&rest);
        let mut acc = 0.0;
        for i in 0..n {
            for j in 0..n {
                let w = up[(i, j)];
                if w == 0.0 {
                    continue;
                }
                idx[0] = i;
                idx[1] = j;
                acc += w * psi.get(&idx);
            }
        }
        out.coeffs[tmask as usize] = acc;
    }
    Ok(out)
}

/// `tr_ω b = Σ_{i,j} ω^{ij} b_{ij}` (full double sum, no ½).
pub fn omega_trace(b: &FormTensor, omega: &FormTensor, g: &MetricFrame) -> Result<f64> {
    b.expect_degree(2)?;
    Ok(omega_contract(b, omega, g)?.coeffs[0])
}

pub fn wedge(a: &FormTensor, b: &FormTensor) -> Result<FormTensor> {
    a.wedge(b)
}

/// Residual `|J² + I|` of a candidate almost complex structure.
pub fn almost_complex_residual(j: &Mat) -> f64 {
    let n = j.nrows();
    let sq = j * j + Mat::identity(n, n);
    crate::linalg::sup_norm(&sq)
}

/// Splits a 2-form into its `(1,1)` and `(2,0)+(0,2)` parts.
pub fn type_decompose(b: &FormTensor, j: &Mat) -> Result<(FormTensor, FormTensor)> {
    b.expect_degree(2)?;
    let res = almost_complex_residual(j);
    if res > 1e-12 {
        return Err(Error::NotAlmostComplex(res));
    }
    let rotated = b.pullback(j)?;
    let one_one = b.add(&rotated)?.scale(0.5);
    let two_zero = b.sub(&rotated)?.scale(0.5);
    Ok((one_one, two_zero))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn standard_j(n: usize) -> Mat {
        let mut j = Mat::zeros(n, n);
        for p in 0..n / 2 {
            j[(2 * p + 1, 2 * p)] = 1.0;
            j[(2 * p, 2 * p + 1)] = -1.0;
        }
        j
    }

    fn kahler_form(n: usize) -> FormTensor {
        let mut w = FormTensor::zero(n, 2).unwrap();
        for p in 0..n / 2 {
            w.add_component(&[2 * p, 2 * p + 1], 1.0);
        }
        w
    }

    /// Brute-force wedge: sum over all permutations of the concatenated arguments.
    fn wedge_by_permutations(a: &FormTensor, b: &FormTensor, args: &[usize]) -> f64 {
        fn permutations(items: &[usize]) -> Vec<(Vec<usize>, f64)> {
            if items.len() <= 1 {
                return vec![(items.to_vec(), 1.0)];
            }
            let mut out = Vec::new();
            for i in 0..items.len() {
                let mut rest = items.to_vec();
                let head = rest.remove(i);
                let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
                for (mut p, s) in permutations(&rest) {
                    p.insert(0, head);
                    out.push((p, s * sign));
                }
            }
            out
        }
        let (k, l) = (a.degree(), b.degree());
        let kf: f64 = (1..=k).map(|x| x as f64).product();
        let lf: f64 = (1..=l).map(|x| x as f64).product();
        permutations(args).into_iter().map(|(p, s)| s * a.get(&p[..k]) * b.get(&p[k..])).sum::<f64>() / (kf * lf)
    }

    #[test]
    fn elementary_two_form_is_antisymmetric() {
        let e12 = FormTensor::basis(4, &[0, 1]).unwrap();
        let e1 = [1.0, 0.0, 0.0, 0.0];
        let e2 = [0.0, 1.0, 0.0, 0.0];
        assert_eq!(e12.eval(&[&e1, &e2]).unwrap(), 1.0);
        assert_eq!(e12.eval(&[&e2, &e1]).unwrap(), -1.0);
    }

    #[test]
    fn product_of_planes_is_volume() {
        let a = FormTensor::basis(4, &[0, 1]).unwrap();
        let b = FormTensor::basis(4, &[2, 3]).unwrap();
        let vol = a.wedge(&b).unwrap();
        assert_eq!(vol.coefficient(0b1111), 1.0);
    }

    #[test]
    fn wedge_overflow_is_rejected() {
        let a = FormTensor::basis(3, &[0, 1]).unwrap();
        assert!(matches!(a.wedge(&a), Err(Error::DegreeOverflow { .. })));
    }

    #[test]
    fn asd_square_matches_permutation_expansion() {
        let w1 = FormTensor::basis(4, &[0, 1]).unwrap();
        let w2 = FormTensor::basis(4, &[2, 3]).unwrap();
        let alpha = w1.sub(&w2).unwrap().scale(0.5);
        let sq = alpha.wedge(&alpha).unwrap();
        let brute = wedge_by_permutations(&alpha, &alpha, &[0, 1, 2, 3]);
        assert_abs_diff_eq!(sq.coefficient(0b1111), brute, epsilon = 1e-15);
        assert_abs_diff_eq!(brute, -0.5, epsilon = 1e-15);
    }

    #[test]
    fn hodge_star_examples() {
        let g = MetricFrame::identity(4).unwrap();
        let e12 = FormTensor::basis(4, &[0, 1]).unwrap();
        let star = hodge_star(&e12, &g).unwrap();
        assert_eq!(star, FormTensor::basis(4, &[2, 3]).unwrap());
        let w = kahler_form(4);
        assert_eq!(hodge_star(&w, &g).unwrap(), w);
        let b = FormTensor::basis(4, &[0, 2]).unwrap().add(&FormTensor::basis(4, &[1, 3]).unwrap().scale(3.0)).unwrap();
        let twice = hodge_star(&hodge_star(&b, &g).unwrap(), &g).unwrap();
        assert!(twice.distance(&b).unwrap() < 1e-15);
    }

    #[test]
    fn kahler_trace_in_dimension_four() {
        let g = MetricFrame::identity(4).unwrap();
        let w = kahler_form(4);
        assert_abs_diff_eq!(omega_trace(&w, &w, &g).unwrap(), 4.0, epsilon = 1e-15);
        let primitive = FormTensor::basis(4, &[0, 1]).unwrap().sub(&FormTensor::basis(4, &[2, 3]).unwrap()).unwrap();
        assert_abs_diff_eq!(omega_trace(&primitive, &w, &g).unwrap(), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn trace_scales_inversely_with_conformal_factor() {
        let g = MetricFrame::identity(4).unwrap();
        let w = kahler_form(4);
        let b = FormTensor::basis(4, &[0, 1]).unwrap().scale(0.7);
        let s = libm::exp(0.3);
        let scaled_w = w.scale(s);
        let scaled_g = g.scaled(s).unwrap();
        assert_abs_diff_eq!(
            omega_trace(&b, &scaled_w, &scaled_g).unwrap(),
            omega_trace(&b, &w, &g).unwrap() / s,
            epsilon = 1e-14
        );
    }

    #[test]
    fn type_decomposition_examples() {
        let j = standard_j(4);
        let w = kahler_form(4);
        let (p11, p20) = type_decompose(&w, &j).unwrap();
        assert!(p11.distance(&w).unwrap() < 1e-15 && p20.sup_norm() < 1e-15);
        let anti = FormTensor::basis(4, &[0, 2]).unwrap().sub(&FormTensor::basis(4, &[1, 3]).unwrap()).unwrap();
        let (p11, p20) = type_decompose(&anti, &j).unwrap();
        assert!(p11.sup_norm() < 1e-15 && p20.distance(&anti).unwrap() < 1e-15);
        assert!(matches!(type_decompose(&w, &Mat::identity(4, 4)), Err(Error::NotAlmostComplex(_))));
    }

    #[test]
    fn interior_product_of_volume() {
        let vol = FormTensor::basis(3, &[0, 1, 2]).unwrap();
        let i = vol.interior(&[0.0, 1.0, 0.0]).unwrap();
        assert_eq!(i.get(&[0, 2]), -1.0);
        let j = vol.interior(&[1.0, 0.0, 0.0]).unwrap();
        assert_eq!(j.get(&[1, 2]), 1.0);
    }

    #[test]
    fn full_norm_doubles_two_forms() {
        let g = MetricFrame::identity(4).unwrap();
        assert_abs_diff_eq!(norm_sq(&kahler_form(4), &g).unwrap(), 4.0, epsilon = 1e-15);
    }

    fn form_strategy(n: usize, k: usize) -> impl Strategy<Value = FormTensor> {
        proptest::collection::vec(-1.0f64..1.0, 1 << n).prop_map(move |vals| {
            let mut f = FormTensor::zero(n, k).unwrap();
            for (m, v) in vals.into_iter().enumerate() {
                if (m as u32).count_ones() as usize == k {
                    f.coeffs[m] = v;
                }
            }
            f
        })
    }

    fn metric_strategy(n: usize) -> impl Strategy<Value = MetricFrame> {
        proptest::collection::vec(-1.0f64..1.0, n * n).prop_map(move |vals| {
            let a = Mat::from_row_slice(n, n, &vals);
            MetricFrame::new(&a * a.transpose() + Mat::identity(n, n) * 0.5).unwrap()
        })
    }

    fn random_asd(vals: &[f64]) -> FormTensor {
        let basis = [
            FormTensor::basis(4, &[0, 1]).unwrap().sub(&FormTensor::basis(4, &[2, 3]).unwrap()).unwrap(),
            FormTensor::basis(4, &[0, 2]).unwrap().add(&FormTensor::basis(4, &[1, 3]).unwrap()).unwrap(),
            FormTensor::basis(4, &[0, 3]).unwrap().sub(&FormTensor::basis(4, &[1, 2]).unwrap()).unwrap(),
        ];
        let mut out = FormTensor::zero(4, 2).unwrap();
        for (b, v) in basis.iter().zip(vals) {
            out = out.add(&b.scale(*v)).unwrap();
        }
        out
    }

    proptest! {
        #[test]
        fn wedge_is_graded_commutative(k in 0usize..4, l in 0usize..3, seed in proptest::collection::vec(-1.0f64..1.0, 64)) {
            let n = 6;
            let mut a = FormTensor::zero(n, k).unwrap();
            let mut b = FormTensor::zero(n, l).unwrap();
            for (m, v) in seed.iter().enumerate() {
                if (m as u32).count_ones() as usize == k { a.coeffs[m] = *v; }
                if (m as u32).count_ones() as usize == l { b.coeffs[m] = v * 0.5 - 0.1; }
            }
            let ab = a.wedge(&b).unwrap();
            let ba = b.wedge(&a).unwrap().scale(if (k * l) % 2 == 0 { 1.0 } else { -1.0 });
            prop_assert!(ab.distance(&ba).unwrap() < 1e-13);
        }

        #[test]
        fn wedge_agrees_with_permutation_sum(a in form_strategy(5, 2), b in form_strategy(5, 1)) {
            let ab = a.wedge(&b).unwrap();
            for args in [[0usize, 1, 2], [1, 3, 4], [4, 0, 2]] {
                let brute = wedge_by_permutations(&a, &b, &args);
                prop_assert!((ab.get(&args) - brute).abs() < 1e-13);
            }
        }

        #[test]
        fn hodge_star_is_isometry(a in form_strategy(4, 2), b in form_strategy(4, 2), g in metric_strategy(4)) {
            let sa = hodge_star(&a, &g).unwrap();
            let sb = hodge_star(&b, &g).unwrap();
            let lhs = inner(&sa, &sb, &g).unwrap();
            let rhs = inner(&a, &b, &g).unwrap();
            prop_assert!((lhs - rhs).abs() < 1e-10 * (1.0 + rhs.abs()));
        }

        #[test]
        fn hodge_star_defines_inner_product(a in form_strategy(5, 2), b in form_strategy(5, 2), g in metric_strategy(5)) {
            let lhs = a.wedge(&hodge_star(&b, &g).unwrap()).unwrap();
            let rhs = g.volume_form().scale(inner(&a, &b, &g).unwrap());
            prop_assert!(lhs.distance(&rhs).unwrap() < 1e-10 * (1.0 + rhs.sup_norm()));
        }

        #[test]
        fn asd_square_is_negative_half_norm(vals in proptest::collection::vec(-2.0f64..2.0, 3)) {
            let g = MetricFrame::identity(4).unwrap();
            let b = random_asd(&vals);
            prop_assert!(hodge_star(&b, &g).unwrap().add(&b).unwrap().sup_norm() < 1e-14);
            let w = kahler_form(4);
            let dv = w.wedge(&w).unwrap().scale(0.5);
            let rhs = dv.scale(-0.5 * norm_sq(&b, &g).unwrap());
            prop_assert!(b.wedge(&b).unwrap().distance(&rhs).unwrap() < 1e-13);
        }

        #[test]
        fn type_parts_are_orthogonal_and_idempotent(b in form_strategy(6, 2)) {
            let j = standard_j(6);
            let g = MetricFrame::identity(6).unwrap();
            let (p, q) = type_decompose(&b, &j).unwrap();
            prop_assert!(p.add(&q).unwrap().distance(&b).unwrap() < 1e-14);
            prop_assert!(inner(&p, &q, &g).unwrap().abs() < 1e-13);
            let (pp, pq) = type_decompose(&p, &j).unwrap();
            prop_assert!(pp.distance(&p).unwrap() < 1e-14 && pq.sup_norm() < 1e-14);
            let (qp, qq) = type_decompose(&q, &j).unwrap();
            prop_assert!(qq.distance(&q).unwrap() < 1e-14 && qp.sup_norm() < 1e-14);
        }

        #[test]
        fn tensor_round_trip(a in form_strategy(5, 3)) {
            let back = FormTensor::from_tensor(&a.to_tensor()).unwrap();
            prop_assert_eq!(back, a);
        }
    }
}
