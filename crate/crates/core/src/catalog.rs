//! Bismut-flat model geometries and controls, each normalized so that `|V| = 1`.

use crate::algebra::StructureAlgebra;
use crate::error::Result;
use crate::forms::MetricFrame;
use crate::hermitian::HermitianModel;
use crate::linalg::Mat;

pub const NAMES: [&str; 4] = ["su2xsu2", "su2xRxC", "hopf", "flat"];

/// Complex structure with `J e_a = e_b` for each pair `(a, b)`.
pub fn paired_j(n: usize, pairs: &[(usize, usize)]) -> Mat {
    let mut j = Mat::zeros(n, n);
    for &(a, b) in pairs {
        j[(b, a)] = 1.0;
        j[(a, b)] = -1.0;
    }
    j
}

fn build(name: &str, algebra: StructureAlgebra, scale: f64, pairs: &[(usize, usize)]) -> HermitianModel {
    let n = algebra.dim();
    let metric = MetricFrame::new(Mat::identity(n, n) * scale).expect("positive multiple of the identity");
    HermitianModel::new(name, algebra, metric, paired_j(n, pairs), 0.0).expect("catalog structures are integrable")
}

/// `su(2) ⊕ su(2)`, bi-invariant metric, `J` pairing the third directions of the two summands.
pub fn su2xsu2() -> HermitianModel {
    let a = StructureAlgebra::su2().direct_sum(&StructureAlgebra::su2());
    build("su2xsu2", a, 2.0, &[(0, 1), (3, 4), (2, 5)])
}

/// `su(2) ⊕ ℝ ⊕ ℝ²`, product metric, `J` pairing the third `su(2)` direction with `ℝ`.
pub fn su2xrxc() -> HermitianModel {
    let a = StructureAlgebra::su2().direct_sum(&StructureAlgebra::abelian(3));
    build("su2xRxC", a, 1.0, &[(0, 1), (2, 3), (4, 5)])
}

/// Hopf surface algebra `su(2) ⊕ ℝ`.
pub fn hopf() -> HermitianModel {
    let a = StructureAlgebra::su2().direct_sum(&StructureAlgebra::abelian(1));
    build("hopf", a, 1.0, &[(0, 1), (2, 3)])
}

/// Flat Kähler `ℝ⁶`.
pub fn flat() -> HermitianModel {
    build("flat", StructureAlgebra::abelian(6), 1.0, &[(0, 1), (2, 3), (4, 5)])
}

pub fn by_name(name: &str) -> Option<HermitianModel> {
    match name {
        "su2xsu2" => Some(su2xsu2()),
        "su2xRxC" | "su2xrxc" => Some(su2xrxc()),
        "hopf" => Some(hopf()),
        "flat" | "flat-torus" => Some(flat()),
        _ => None,
    }
}

/// `g + ε·½(S + JᵀSJ)`: a J-compatible perturbation in the direction of a symmetric `S`.
pub fn perturb_metric(m: &HermitianModel, s: &Mat, eps: f64) -> Result<HermitianModel> {
    let sym = (s + s.transpose()) * 0.5;
    let j = m.j();
    let dg = (&sym + j.transpose() * &sym * j) * 0.5;
    let name = alloc::format!("{}-perturbed", m.name());
    Ok(m.with_metric(m.metric().matrix() + dg * eps)?.with_name(name))
}
