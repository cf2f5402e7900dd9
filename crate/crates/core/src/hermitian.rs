//! Invariant Hermitian structures on Lie algebra frames.

use alloc::string::String;
use alloc::vec::Vec;

use crate::algebra::StructureAlgebra;
use crate::error::{Error, Result};
use crate::forms::{almost_complex_residual, FormTensor, MetricFrame};
use crate::linalg::Mat;

/// Tolerance for `J² = -I`, `g(J·,J·) = g` and the Nijenhuis tensor.
pub const STRUCTURE_TOLERANCE: f64 = 1e-12;

/// `J` is stored as a matrix acting on frame coordinates: `J e_i = Σ_k J[k][i] e_k`.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianModel {
    name: String,
    algebra: StructureAlgebra,
    metric: MetricFrame,
    j: Mat,
    f: f64,
}

impl HermitianModel {
    pub fn new(
        name: impl Into<String>,
        algebra: StructureAlgebra,
        metric: MetricFrame,
        j: Mat,
        f: f64,
    ) -> Result<Self> {
        let n = algebra.dim();
        if metric.dim() != n {
            return Err(Error::DimensionMismatch { expected: n, found: metric.dim() });
        }
        if j.nrows() != n || j.ncols() != n {
            return Err(Error::DimensionMismatch { expected: n, found: j.nrows() });
        }
        let jj = almost_complex_residual(&j);
        if jj > STRUCTURE_TOLERANCE {
            return Err(Error::NotAlmostComplex(jj));
        }
        let g = metric.matrix();
        let scale = g.iter().fold(1.0f64, |a, x| a.max(x.abs()));
        let compat = crate::linalg::sup_distance(&(j.transpose() * g * &j), g);
        if compat > STRUCTURE_TOLERANCE * scale {
            return Err(Error::NotCompatible(compat));
        }
        let cscale = algebra.constants().sup_norm().max(1.0);
        let nij = algebra.nijenhuis_residual(&j);
        if nij > STRUCTURE_TOLERANCE * cscale {
            return Err(Error::NotIntegrable(nij));
        }
        if !f.is_finite() {
            return Err(Error::InvalidConfig("soliton potential must be finite".into()));
        }
        Ok(Self { name: name.into(), algebra, metric, j, f })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.algebra.dim()
    }

    pub fn algebra(&self) -> &StructureAlgebra {
        &self.algebra
    }

    pub fn metric(&self) -> &MetricFrame {
        &self.metric
    }

    pub fn j(&self) -> &Mat {
        &self.j
    }

    pub fn potential(&self) -> f64 {
        self.f
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    /// `J` applied to frame coordinates.
    pub fn apply_j(&self, x: &[f64]) -> Vec<f64> {
        crate::linalg::mat_vec(&self.j, x)
    }

    /// Fundamental form `ω(X, Y) = g(JX, Y)`.
    pub fn omega(&self) -> FormTensor {
        let w = self.j.transpose() * self.metric.matrix();
        let anti = (&w - w.transpose()) * 0.5;
        FormTensor::from_antisymmetric(&anti).expect("J-compatible metric gives an antisymmetric form")
    }

    /// Same algebra and `J`, metric multiplied by `s > 0`.
    pub fn rescale(&self, s: f64) -> Result<Self> {
        Self::new(self.name.clone(), self.algebra.clone(), self.metric.scaled(s)?, self.j.clone(), self.f)
    }

    /// The same structure expressed in the frame `e'_a = Σ_i B[i][a] e_i`.
    pub fn change_frame(&self, b: &Mat) -> Result<Self> {
        let binv = b.clone().try_inverse().ok_or_else(|| Error::Singular("frame change".into()))?;
        let algebra = self.algebra.change_basis(b)?;
        let metric = MetricFrame::new(b.transpose() * self.metric.matrix() * b)?;
        let j = &binv * &self.j * b;
        Self::new(self.name.clone(), algebra, metric, j, self.f)
    }

    /// Same algebra and `J` with a different invariant metric.
    pub fn with_metric(&self, g: Mat) -> Result<Self> {
        Self::new(self.name.clone(), self.algebra.clone(), MetricFrame::new(g)?, self.j.clone(), self.f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn hopf() -> HermitianModel {
        let a = StructureAlgebra::su2().direct_sum(&StructureAlgebra::abelian(1));
        let mut j = Mat::zeros(4, 4);
        for (x, y) in [(0, 1), (2, 3)] {
            j[(y, x)] = 1.0;
            j[(x, y)] = -1.0;
        }
        HermitianModel::new("hopf", a, MetricFrame::identity(4).unwrap(), j, 0.0).unwrap()
    }

    #[test]
    fn omega_pairs_frame_vectors() {
        let m = hopf();
        let w = m.omega();
        assert_eq!(w.get(&[0, 1]), 1.0);
        assert_eq!(w.get(&[2, 3]), 1.0);
        assert_eq!(w.get(&[0, 2]), 0.0);
    }

    #[test]
    fn non_integrable_structure_is_rejected() {
        // pairing each su(2) direction with its copy in the other summand
        let a = StructureAlgebra::su2().direct_sum(&StructureAlgebra::su2());
        let mut j = Mat::zeros(6, 6);
        for (x, y) in [(0, 3), (1, 4), (2, 5)] {
            j[(y, x)] = 1.0;
            j[(x, y)] = -1.0;
        }
        let r = HermitianModel::new("bad", a, MetricFrame::identity(6).unwrap(), j, 0.0);
        assert!(matches!(r, Err(Error::NotIntegrable(_))));
    }

    #[test]
    fn incompatible_metric_is_rejected() {
        let m = hopf();
        let mut g = Mat::identity(4, 4);
        g[(0, 0)] = 2.0;
        assert!(matches!(m.with_metric(g), Err(Error::NotCompatible(_))));
    }

    #[test]
    fn frame_change_round_trip() {
        let m = hopf();
        let b = Mat::from_fn(4, 4, |i, j| if i == j { 1.5 } else { 0.2 * (i as f64 - j as f64) });
        let back = m.change_frame(&b).unwrap().change_frame(&b.clone().try_inverse().unwrap()).unwrap();
        assert!(crate::linalg::sup_distance(back.metric().matrix(), m.metric().matrix()) < 1e-13);
        assert!(crate::linalg::sup_distance(back.j(), m.j()) < 1e-13);
    }
}
