//! Invariant connections, curvature and covariant derivatives on a frame.

use alloc::vec;
use alloc::vec::Vec;

use crate::algebra::StructureAlgebra;
use crate::forms::{FormTensor, MetricFrame};
use crate::hermitian::HermitianModel;
use crate::linalg::Mat;
use crate::tensor::Tensor;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConnectionKind {
    LeviCivita,
    Bismut,
    /// Basic connection on the horizontal part of a foliated frame.
    Transverse,
}

/// Coefficients `Γ[a][b][c] = <∇_{e_a} e_b, e_c>`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConnectionCoeffs {
    pub kind: ConnectionKind,
    gamma: Tensor,
}

impl ConnectionCoeffs {
    pub fn from_tensor(kind: ConnectionKind, gamma: Tensor) -> Self {
        Self { kind, gamma }
    }

    /// Invariant Koszul formula
    /// `2Γ_abc = <[a,b],c> - <[b,c],a> + <[c,a],b>`.
    pub fn levi_civita(algebra: &StructureAlgebra, metric: &MetricFrame) -> Self {
        let n = algebra.dim();
        let cl = lowered_brackets(algebra, metric);
        let gamma = Tensor::from_fn(n, 3, |i| {
            let (a, b, c) = (i[0], i[1], i[2]);
            0.5 * (cl.get(&[a, b, c]) - cl.get(&[b, c, a]) + cl.get(&[c, a, b]))
        });
        Self { kind: ConnectionKind::LeviCivita, gamma }
    }

    /// `Γ^B = Γ^g + ½H`.
    pub fn bismut(algebra: &StructureAlgebra, metric: &MetricFrame, h: &FormTensor) -> Self {
        let lc = Self::levi_civita(algebra, metric);
        let gamma = lc.gamma.add(&h.to_tensor().scaled(0.5));
        Self { kind: ConnectionKind::Bismut, gamma }
    }

    pub fn tensor(&self) -> &Tensor {
        &self.gamma
    }

    #[inline]
    pub fn get(&self, a: usize, b: usize, c: usize) -> f64 {
        self.gamma.get(&[a, b, c])
    }

    /// `Γ_ab^f = Γ_abe g^{ef}`.
    pub fn raised(&self, metric: &MetricFrame) -> Tensor {
        self.gamma.contract_slot(2, metric.inverse())
    }

    /// Sup norm of `Γ_abc + Γ_acb`.
    pub fn compatibility_residual(&self) -> f64 {
        let n = self.gamma.dim();
        let mut r = 0.0f64;
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    r = r.max((self.get(a, b, c) + self.get(a, c, b)).abs());
                }
            }
        }
        r
    }

    /// `<∇_{e_a} X, e_c> = X^b Γ_abc` for a constant-coefficient vector field.
    pub fn derivative_of_vector(&self, x: &[f64]) -> Mat {
        let n = self.gamma.dim();
        Mat::from_fn(n, n, |a, c| (0..n).map(|b| x[b] * self.get(a, b, c)).sum())
    }

    /// `(∇_a T)_{b_1..b_k} = -Σ_s Γ_{a b_s}^f T_{b_1..f..b_k}` with the derivative index first.
    pub fn covariant_derivative(&self, t: &Tensor, metric: &MetricFrame) -> Tensor {
        let n = t.dim();
        let k = t.rank();
        let up = self.raised(metric);
        let mut out = Tensor::zeros(n, k + 1);
        let mut idx = vec![0usize; k + 1];
        let mut inner = vec![0usize; k];
        for flat in 0..out.data().len() {
            out.unflatten(flat, &mut idx);
            let a = idx[0];
            inner.copy_from_slice(&idx[1..]);
            let mut acc = 0.0;
            for s in 0..k {
                let b = inner[s];
                for f in 0..n {
                    let w = up.get(&[a, b, f]);
                    if w != 0.0 {
                        inner[s] = f;
                        acc -= w * t.get(&inner);
                    }
                }
                inner[s] = b;
            }
            out.data_mut()[flat] = acc;
        }
        out
    }

    /// `R_ABCD = Γ_BC^F Γ_AFD - Γ_AC^F Γ_BFD - c_AB^E Γ_ECD`, i.e. `<R(e_A,e_B)e_C, e_D>`.
    pub fn curvature(&self, algebra: &StructureAlgebra, metric: &MetricFrame) -> CurvatureTensor {
        let n = algebra.dim();
        let up = self.raised(metric);
        let r = Tensor::from_fn(n, 4, |i| {
            let (a, b, c, d) = (i[0], i[1], i[2], i[3]);
            let mut s = 0.0;
            for f in 0..n {
                s += up.get(&[b, c, f]) * self.get(a, f, d) - up.get(&[a, c, f]) * self.get(b, f, d);
                s -= algebra.c(a, b, f) * self.get(f, c, d);
            }
            s
        });
        CurvatureTensor { r }
    }
}

/// `<[e_a, e_b], e_c>`.
pub fn lowered_brackets(algebra: &StructureAlgebra, metric: &MetricFrame) -> Tensor {
    algebra.constants().contract_slot(2, &metric.matrix().transpose())
}

/// Curvature `R[a][b][c][d] = <R(e_a,e_b)e_c, e_d>` with all indices lowered.
#[derive(Debug, Clone, PartialEq)]
pub struct CurvatureTensor {
    r: Tensor,
}

impl CurvatureTensor {
    pub fn tensor(&self) -> &Tensor {
        &self.r
    }

    #[inline]
    pub fn get(&self, a: usize, b: usize, c: usize, d: usize) -> f64 {
        self.r.get(&[a, b, c, d])
    }

    pub fn dim(&self) -> usize {
        self.r.dim()
    }

    /// Largest violation of antisymmetry in `(a,b)` and in `(c,d)`.
    pub fn antisymmetry_residual(&self) -> f64 {
        let n = self.dim();
        let mut w = 0.0f64;
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    for d in 0..n {
                        let v = self.get(a, b, c, d);
                        w = w.max((v + self.get(b, a, c, d)).abs()).max((v + self.get(a, b, d, c)).abs());
                    }
                }
            }
        }
        w
    }

    /// Largest violation of `R_abcd + R_bcad + R_cabd = 0`.
    pub fn bianchi_residual(&self) -> f64 {
        let n = self.dim();
        let mut w = 0.0f64;
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    for d in 0..n {
                        let s = self.get(a, b, c, d) + self.get(b, c, a, d) + self.get(c, a, b, d);
                        w = w.max(s.abs());
                    }
                }
            }
        }
        w
    }

    /// `Rc(Y, Z) = g^{AD} R(e_A, Y, Z, e_D)`.
    pub fn ricci(&self, metric: &MetricFrame) -> Mat {
        let n = self.dim();
        let gi = metric.inverse();
        Mat::from_fn(n, n, |y, z| {
            let mut s = 0.0;
            for a in 0..n {
                for d in 0..n {
                    s += gi[(a, d)] * self.get(a, y, z, d);
                }
            }
            s
        })
    }

    /// Curvature operator on 2-vectors of an orthonormal frame,
    /// `ℛ_{(ab),(cd)} = R_{abdc}` for `a < b`, `c < d`; positive on round spheres.
    pub fn operator_matrix(&self) -> Mat {
        let n = self.dim();
        let pairs: Vec<(usize, usize)> = (0..n).flat_map(|a| (a + 1..n).map(move |b| (a, b))).collect();
        Mat::from_fn(pairs.len(), pairs.len(), |p, q| {
            let (a, b) = pairs[p];
            let (c, d) = pairs[q];
            self.get(a, b, d, c)
        })
    }
}

/// Levi-Civita connection of a model.
pub fn levi_civita(m: &HermitianModel) -> ConnectionCoeffs {
    ConnectionCoeffs::levi_civita(m.algebra(), m.metric())
}
