//! Grid-refinement studies: observed orders of the discretized PDE residual.

use alloc::vec::Vec;

use crate::error::Result;
use crate::report::Report;
use crate::toric::{pde_residual, ProductSurface, SphereProfile};

/// Errors at or below this are roundoff: both members of a refinement pair
/// under the floor count as exact and carry no order.
pub const EXACT_FLOOR: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceStudy {
    pub grids: Vec<usize>,
    pub spacings: Vec<f64>,
    pub errors: Vec<f64>,
    /// Order between consecutive grids; `None` when both errors are at the floor.
    pub orders: Vec<Option<f64>>,
}

impl ConvergenceStudy {
    pub fn new(grids: Vec<usize>, spacings: Vec<f64>, errors: Vec<f64>) -> Self {
        let orders = (1..errors.len())
            .map(|k| {
                if errors[k - 1] <= EXACT_FLOOR && errors[k] <= EXACT_FLOOR {
                    None
                } else {
                    Some(observed_order(errors[k - 1], errors[k], spacings[k - 1] / spacings[k]))
                }
            })
            .collect();
        Self { grids, spacings, errors, orders }
    }

    /// `max e/h²` over the grids.
    pub fn constant(&self) -> f64 {
        self.errors.iter().zip(&self.spacings).map(|(e, h)| e / (h * h)).fold(0.0, f64::max)
    }

    /// Order of the finest refinement pair; `None` when it is exact or there is no pair.
    pub fn asymptotic_order(&self) -> Option<f64> {
        self.orders.last().copied().flatten()
    }

    /// Every refinement pair is either exact or converges with at least `min_order`.
    pub fn passes(&self, min_order: f64) -> bool {
        self.errors.iter().all(|e| e.is_finite()) && self.orders.iter().all(|o| o.is_none_or(|p| p >= min_order))
    }

    pub fn report(&self, prefix: &str) -> Report {
        let mut r = Report::new();
        for (n, e) in self.grids.iter().zip(&self.errors) {
            r.push(alloc::format!("{prefix}.n{n}"), *e);
        }
        for (k, o) in self.orders.iter().enumerate() {
            match o {
                Some(p) => {
                    r.note(alloc::format!("{prefix}: order {p:.3} from n={} to n={}", self.grids[k], self.grids[k + 1]))
                }
                None => r.note(alloc::format!(
                    "{prefix}: exact to roundoff from n={} to n={}",
                    self.grids[k],
                    self.grids[k + 1]
                )),
            }
        }
        r
    }
}

/// `log(e_coarse/e_fine)/log(ratio)`.
pub fn observed_order(coarse: f64, fine: f64, ratio: f64) -> f64 {
    libm::log(coarse / fine) / libm::log(ratio)
}

/// Sup norm of the PDE residual of `build(n)` for each grid.
pub fn residual_study(grids: &[usize], build: impl Fn(usize) -> Result<ProductSurface>) -> Result<ConvergenceStudy> {
    let mut spacings = Vec::with_capacity(grids.len());
    let mut errors = Vec::with_capacity(grids.len());
    for &n in grids {
        let s = build(n)?;
        spacings.push(s.spacing());
        errors.push(pde_residual(&s).sup_norm());
    }
    Ok(ConvergenceStudy::new(grids.to_vec(), spacings, errors))
}

/// Non-polynomial sphere profile `Θ = ((c² - z²)/c)(1 + δ cos²(πz/2c))` with
/// closed-form derivatives; it satisfies the pole conditions for every `δ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ManufacturedProfile {
    pub c: f64,
    pub delta: f64,
}

impl ManufacturedProfile {
    /// `(Θ, Θ', Θ'', Θ''', Θ'''')` at `z`.
    pub fn derivatives(&self, z: f64) -> [f64; 5] {
        let (c, d) = (self.c, self.delta);
        let k = core::f64::consts::PI / (2.0 * c);
        let (s2, c2) = (libm::sin(2.0 * k * z), libm::cos(2.0 * k * z));
        let cos = libm::cos(k * z);
        let q = [
            1.0 + d * cos * cos,
            -d * k * s2,
            -2.0 * d * k * k * c2,
            4.0 * d * k * k * k * s2,
            8.0 * d * k * k * k * k * c2,
        ];
        let p = [(c * c - z * z) / c, -2.0 * z / c, -2.0 / c];
        [
            p[0] * q[0],
            p[1] * q[0] + p[0] * q[1],
            p[2] * q[0] + 2.0 * p[1] * q[1] + p[0] * q[2],
            3.0 * p[2] * q[1] + 3.0 * p[1] * q[2] + p[0] * q[3],
            6.0 * p[2] * q[2] + 4.0 * p[1] * q[3] + p[0] * q[4],
        ]
    }

    pub fn theta(&self, z: f64) -> f64 {
        self.derivatives(z)[0]
    }

    /// `κ = -Θ''/2`.
    pub fn curvature(&self, z: f64) -> f64 {
        -0.5 * self.derivatives(z)[2]
    }

    /// `(Θκ')' = Θ'κ' + Θκ''`.
    pub fn laplacian_of_curvature(&self, z: f64) -> f64 {
        let t = self.derivatives(z);
        -0.5 * (t[1] * t[3] + t[0] * t[4])
    }

    pub fn sample(&self, n: usize) -> Result<SphereProfile> {
        SphereProfile::from_fn(self.c, n, |z| self.theta(z))
    }
}

/// Sup-norm error of the discrete residual against its closed form on the
/// product of a manufactured profile with a round sphere of the same area.
pub fn manufactured_study(grids: &[usize], profile: ManufacturedProfile, a: f64) -> Result<ConvergenceStudy> {
    let c = profile.c;
    let mut spacings = Vec::with_capacity(grids.len());
    let mut errors = Vec::with_capacity(grids.len());
    for &n in grids {
        let s = ProductSurface::new(profile.sample(n)?, SphereProfile::round(c, n)?, a)?;
        let e = pde_residual(&s);
        let k2 = 1.0 / c;
        let (m1, m2) = e.shape();
        let z = s.factors().0.nodes();
        let mut err = 0.0f64;
        for (i, &zi) in z.iter().enumerate().take(m1) {
            let exact = profile.laplacian_of_curvature(zi) - 2.0 * profile.curvature(zi) * k2 + 2.0 * a * a;
            for j in 0..m2 {
                err = err.max((e.get(i, j) - exact).abs());
            }
        }
        spacings.push(s.spacing());
        errors.push(err);
    }
    Ok(ConvergenceStudy::new(grids.to_vec(), spacings, errors))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::toric::gauss_curvature;
    use alloc::vec;

    const GRIDS: [usize; 3] = [64, 128, 256];

    #[test]
    fn manufactured_derivatives_match_finite_differences() {
        let p = ManufacturedProfile { c: 1.7, delta: 0.3 };
        let h = 1e-4;
        for z in [-1.2, -0.3, 0.5, 1.1] {
            let d = p.derivatives(z);
            let dp = p.derivatives(z + h);
            let dm = p.derivatives(z - h);
            for k in 0..4 {
                let fd = (dp[k] - dm[k]) / (2.0 * h);
                assert!((fd - d[k + 1]).abs() < 1e-6 * (1.0 + d[k + 1].abs()), "order {k} at {z}");
            }
        }
        assert!(p.theta(1.7).abs() < 1e-15 && (p.derivatives(-1.7)[1] - 2.0).abs() < 1e-14);
    }

    #[test]
    fn manufactured_curvature_converges_at_second_order() {
        let p = ManufacturedProfile { c: 1.5, delta: 0.4 };
        let mut spacings = Vec::new();
        let mut errors = Vec::new();
        for n in GRIDS {
            let prof = p.sample(n).unwrap();
            let k = gauss_curvature(&prof);
            let err = prof.nodes().iter().zip(&k).map(|(z, k)| (k - p.curvature(*z)).abs()).fold(0.0, f64::max);
            spacings.push(prof.spacing());
            errors.push(err);
        }
        let study = ConvergenceStudy::new(GRIDS.to_vec(), spacings, errors);
        assert!(study.passes(1.9), "{study:?}");
        assert!(study.orders.iter().all(|o| o.is_some()));
    }

    #[test]
    fn manufactured_residual_converges_at_second_order() {
        let study = manufactured_study(&[128, 256, 512], ManufacturedProfile { c: 2.0, delta: 0.3 }, 0.5).unwrap();
        assert!(study.orders.iter().all(|o| o.is_some()));
        assert!(study.passes(1.9), "{study:?}");
    }

    #[test]
    fn exact_solutions_sit_at_the_floor() {
        let study = residual_study(&GRIDS, |n| {
            ProductSurface::new(SphereProfile::round(2.0, n)?, SphereProfile::round(2.0, n)?, 0.5)
        })
        .unwrap();
        assert!(study.passes(1.9));
        assert!(study.errors.iter().all(|e| *e <= EXACT_FLOOR));
    }

    #[test]
    fn first_order_errors_fail_the_order_test() {
        let study = ConvergenceStudy::new(vec![64, 128], vec![0.1, 0.05], vec![1e-3, 5e-4]);
        assert!(!study.passes(1.9));
        assert!((study.orders[0].unwrap() - 1.0).abs() < 1e-12);
    }
}
