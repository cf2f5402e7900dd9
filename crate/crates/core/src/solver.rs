//! Damped Gauss-Newton for the reduced scalar-curvature PDE on product
//! surfaces, and the 1D elliptic solve on a single factor.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::linalg::Mat;
use crate::toric::{pde_residual, FactorKind, ProductSurface, SphereProfile, MIN_GRID};

/// Relative size of the discrete compatibility defect accepted by [`poisson_1d`].
pub const POISSON_TOLERANCE: f64 = 1e-10;

/// Singular values below this fraction of the largest are truncated.
pub const SVD_CUTOFF: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig {
    pub max_iterations: usize,
    /// Target for the sup norm of the PDE residual.
    pub tolerance: f64,
    /// Step multiplier applied on each rejected line-search trial.
    pub backtrack: f64,
    /// Smallest line-search step before the solve is declared stalled.
    pub min_step: f64,
    /// Relative forward-difference step for the Jacobian.
    pub fd_step: f64,
    /// Intervals per factor used when building profiles from a configuration.
    pub grid: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self { max_iterations: 50, tolerance: 1e-8, backtrack: 0.5, min_step: 1e-6, fd_step: 1e-6, grid: 64 }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::InvalidConfig(format!("{name} must be positive, got {v}")))
            }
        };
        if self.max_iterations == 0 {
            return Err(Error::InvalidConfig("max_iterations must be positive".into()));
        }
        positive("tolerance", self.tolerance)?;
        positive("backtrack", self.backtrack)?;
        positive("min_step", self.min_step)?;
        positive("fd_step", self.fd_step)?;
        if self.tolerance >= 1.0 {
            return Err(Error::InvalidConfig(format!("tolerance must be below 1, got {}", self.tolerance)));
        }
        if self.backtrack >= 1.0 {
            return Err(Error::InvalidConfig(format!("backtrack must be below 1, got {}", self.backtrack)));
        }
        if self.min_step >= 1.0 {
            return Err(Error::InvalidConfig(format!("min_step must be below 1, got {}", self.min_step)));
        }
        if self.grid < MIN_GRID {
            return Err(Error::InvalidConfig(format!("grid must be at least {MIN_GRID}, got {}", self.grid)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveFlag {
    /// The initial guess already met the tolerance.
    AtFloor,
    Converged,
    /// The line search could not decrease the residual.
    Stalled,
    MaxIterations,
}

impl SolveFlag {
    pub fn as_str(&self) -> &'static str {
        match self {
            SolveFlag::AtFloor => "at-floor",
            SolveFlag::Converged => "converged",
            SolveFlag::Stalled => "stalled",
            SolveFlag::MaxIterations => "max-iterations",
        }
    }

    pub fn is_success(&self) -> bool {
        matches!(self, SolveFlag::AtFloor | SolveFlag::Converged)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IterationRecord {
    pub iteration: usize,
    /// Sup norm of the PDE residual.
    pub residual: f64,
    /// Weighted `L²` norm, the quantity the line search decreases.
    pub l2: f64,
    /// Accepted line-search step (0 for the initial guess).
    pub step: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveTrace {
    pub history: Vec<IterationRecord>,
    pub flag: SolveFlag,
    pub surface: ProductSurface,
}

impl SolveTrace {
    pub fn iterations(&self) -> usize {
        self.history.last().map_or(0, |r| r.iteration)
    }

    pub fn final_residual(&self) -> f64 {
        self.history.last().map_or(f64::NAN, |r| r.residual)
    }
}

/// Free profile values of both factors, concatenated.
pub fn unknowns(s: &ProductSurface) -> Vec<f64> {
    let (f1, f2) = s.factors();
    let mut x = f1.unknowns();
    x.extend(f2.unknowns());
    x
}

fn rebuild(p: &SphereProfile, x: &[f64]) -> Result<SphereProfile> {
    match p.kind() {
        FactorKind::Sphere => SphereProfile::from_unknowns(p.half_length(), p.intervals(), x),
        FactorKind::FlatTorus => Ok(p.clone()),
    }
}

/// Surface with the same class data and factor grids and new free profile values.
pub fn with_unknowns(s: &ProductSurface, x: &[f64]) -> Result<ProductSurface> {
    let (f1, f2) = s.factors();
    let k = f1.unknowns().len();
    if x.len() != k + f2.unknowns().len() {
        return Err(Error::DimensionMismatch { expected: k + f2.unknowns().len(), found: x.len() });
    }
    s.with_factors(rebuild(f1, &x[..k])?, rebuild(f2, &x[k..])?)
}

/// Residual vector `√(w/Σw) E`, whose Euclidean norm is the weighted `L²` norm of `E`.
pub fn residual_vector(s: &ProductSurface) -> Vec<f64> {
    let e = pde_residual(s);
    let w = s.weights();
    let total: f64 = w.iter().sum();
    e.values().iter().zip(&w).map(|(v, w)| libm::sqrt(w / total) * v).collect()
}

fn norm(v: &[f64]) -> f64 {
    libm::sqrt(v.iter().map(|x| x * x).sum())
}

/// Forward-difference Jacobian of [`residual_vector`] with respect to [`unknowns`].
pub fn jacobian(s: &ProductSurface, fd_step: f64) -> Result<Mat> {
    let x = unknowns(s);
    let s = &with_unknowns(s, &x)?;
    let r0 = residual_vector(s);
    let mut jac = Mat::zeros(r0.len(), x.len());
    let mut xp = x.clone();
    for k in 0..x.len() {
        let dx = fd_step * x[k].abs().max(1.0);
        xp[k] = x[k] + dx;
        let rp = residual_vector(&with_unknowns(s, &xp)?);
        for (i, (a, b)) in rp.iter().zip(&r0).enumerate() {
            jac[(i, k)] = (a - b) / dx;
        }
        xp[k] = x[k];
    }
    Ok(jac)
}

/// Minimum-norm least-squares step `-J⁺ r` with truncated singular values.
fn gauss_newton_step(jac: Mat, r: &[f64]) -> Result<Vec<f64>> {
    let svd = jac.svd(true, true);
    let smax = svd.singular_values.iter().cloned().fold(0.0f64, f64::max);
    if !(smax > 0.0) {
        return Err(Error::RankCollapse(smax));
    }
    let (u, vt) = (svd.u.expect("requested U"), svd.v_t.expect("requested V^T"));
    let mut step = vec![0.0; vt.ncols()];
    for (k, &sigma) in svd.singular_values.iter().enumerate() {
        if sigma <= SVD_CUTOFF * smax {
            continue;
        }
        let coeff: f64 = -(0..r.len()).map(|i| u[(i, k)] * r[i]).sum::<f64>() / sigma;
        for (j, s) in step.iter_mut().enumerate() {
            *s += coeff * vt[(k, j)];
        }
    }
    Ok(step)
}

/// Damped Gauss-Newton on the free profile values. Class data (half-lengths
/// and `a`) never change. Trial steps that leave `Θ > 0` or fail to decrease
/// the weighted `L²` residual are halved until the step drops below
/// `min_step`, at which point the best iterate is returned as stalled.
pub fn newton_solve(s0: &ProductSurface, cfg: &SolverConfig) -> Result<SolveTrace> {
    cfg.validate()?;
    // sampled profiles satisfy the pole constraints only to second order
    let mut s = with_unknowns(s0, &unknowns(s0))?;
    let mut e = pde_residual(&s);
    let mut history = vec![IterationRecord { iteration: 0, residual: e.sup_norm(), l2: e.l2_norm(), step: 0.0 }];
    if e.sup_norm() <= cfg.tolerance {
        return Ok(SolveTrace { history, flag: SolveFlag::AtFloor, surface: s });
    }
    if unknowns(&s).is_empty() {
        return Ok(SolveTrace { history, flag: SolveFlag::Stalled, surface: s });
    }
    for iteration in 1..=cfg.max_iterations {
        let r = residual_vector(&s);
        let current = norm(&r);
        let dx = gauss_newton_step(jacobian(&s, cfg.fd_step)?, &r)?;
        let x = unknowns(&s);
        let mut t = 1.0;
        let accepted = loop {
            let trial: Vec<f64> = x.iter().zip(&dx).map(|(a, b)| a + t * b).collect();
            if let Ok(candidate) = with_unknowns(&s, &trial) {
                if norm(&residual_vector(&candidate)) < current {
                    break Some(candidate);
                }
            }
            t *= cfg.backtrack;
            if t < cfg.min_step {
                break None;
            }
        };
        let Some(next) = accepted else {
            return Ok(SolveTrace { history, flag: SolveFlag::Stalled, surface: s });
        };
        s = next;
        e = pde_residual(&s);
        history.push(IterationRecord { iteration, residual: e.sup_norm(), l2: e.l2_norm(), step: t });
        if e.sup_norm() <= cfg.tolerance {
            return Ok(SolveTrace { history, flag: SolveFlag::Converged, surface: s });
        }
    }
    Ok(SolveTrace { history, flag: SolveFlag::MaxIterations, surface: s })
}

/// Solves `(Θu')' = rhs` on one factor in the zero-mean gauge `Σ w u = 0`.
///
/// The discrete operator annihilates constants, so `rhs` must lie in its
/// range. The bordered system `[L 1; wᵀ 0][u; μ] = [rhs; 0]` measures the
/// defect as `μ`; a defect above [`POISSON_TOLERANCE`] relative to `rhs` is
/// rejected.
pub fn poisson_1d(p: &SphereProfile, rhs: &[f64]) -> Result<Vec<f64>> {
    let m = p.len();
    if rhs.len() != m {
        return Err(Error::DimensionMismatch { expected: m, found: rhs.len() });
    }
    let l = p.laplacian_matrix();
    let w = p.weights();
    let mut a = Mat::zeros(m + 1, m + 1);
    a.view_mut((0, 0), (m, m)).copy_from(&l);
    for j in 0..m {
        a[(j, m)] = 1.0;
        a[(m, j)] = w[j];
    }
    let mut b = nalgebra::DVector::zeros(m + 1);
    for j in 0..m {
        b[j] = rhs[j];
    }
    let sol = a.lu().solve(&b).ok_or_else(|| Error::Singular("bordered Poisson system".into()))?;
    let scale = rhs.iter().fold(0.0f64, |acc, v| acc.max(v.abs())).max(1.0);
    let defect = sol[m].abs() / scale;
    if defect > POISSON_TOLERANCE {
        return Err(Error::IncompatibleRhs(defect));
    }
    Ok(sol.iter().take(m).cloned().collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::toric::gauss_curvature;

    fn perturbed(c: f64, n: usize, eps: f64) -> SphereProfile {
        SphereProfile::from_fn(c, n, |z| (c * c - z * z) / c + eps * (c * c - z * z) * (c * c - z * z) * libm::sin(z))
            .unwrap()
    }

    fn sup(v: &[f64]) -> f64 {
        v.iter().fold(0.0f64, |m, x| m.max(x.abs()))
    }

    #[test]
    fn default_config_is_valid_and_bad_configs_are_rejected() {
        let cfg = SolverConfig::default();
        assert!(cfg.validate().is_ok());
        for bad in [
            SolverConfig { tolerance: 2.0, ..cfg },
            SolverConfig { backtrack: 0.0, ..cfg },
            SolverConfig { min_step: -1.0, ..cfg },
            SolverConfig { max_iterations: 0, ..cfg },
            SolverConfig { grid: 4, ..cfg },
        ] {
            assert!(matches!(bad.validate(), Err(Error::InvalidConfig(_))));
        }
    }

    #[test]
    fn exact_solution_is_at_floor() {
        let r = SphereProfile::round(2.0, 32).unwrap();
        let s = ProductSurface::new(r.clone(), r, 0.5).unwrap();
        let trace = newton_solve(&s, &SolverConfig::default()).unwrap();
        assert_eq!(trace.flag, SolveFlag::AtFloor);
        assert_eq!(trace.iterations(), 0);
    }

    #[test]
    fn perturbed_round_product_converges_to_round() {
        let s = ProductSurface::new(perturbed(2.0, 32, 1e-2), perturbed(2.0, 32, 1e-2), 0.5).unwrap();
        let trace = newton_solve(&s, &SolverConfig::default()).unwrap();
        assert_eq!(trace.flag, SolveFlag::Converged, "{:?}", trace.history);
        assert!(trace.final_residual() < 1e-8);
        assert!(trace.iterations() <= 50);
        let (f1, f2) = trace.surface.factors();
        for f in [f1, f2] {
            assert!(gauss_curvature(f).iter().all(|k| (k - 0.5).abs() < 1e-6));
            assert_eq!(f.half_length(), 2.0);
        }
        for w in trace.history.windows(2) {
            assert!(w[1].l2 < w[0].l2);
        }
        let t = trace.surface.topo_invariants();
        assert!(t.report().passes(1e-6), "{t:?}");
    }

    #[test]
    fn inconsistent_class_data_stalls() {
        let s = ProductSurface::new(perturbed(2.0, 32, 1e-2), perturbed(2.0, 32, 1e-2), 0.25).unwrap();
        let trace = newton_solve(&s, &SolverConfig::default()).unwrap();
        assert_eq!(trace.flag, SolveFlag::Stalled, "{:?}", trace.history);
        assert!(trace.final_residual() > 1e-3);
        for w in trace.history.windows(2) {
            assert!(w[1].l2 < w[0].l2);
        }
    }

    #[test]
    fn reflection_symmetry_is_preserved() {
        // an even perturbation of z stays even under the solve
        let even = |c: f64| {
            SphereProfile::from_fn(c, 32, move |z| {
                (c * c - z * z) / c + 0.05 * (c * c - z * z) * (c * c - z * z) / (c * c)
            })
            .unwrap()
        };
        let s = ProductSurface::new(even(2.0), even(2.0), 0.5).unwrap();
        let trace = newton_solve(&s, &SolverConfig::default()).unwrap();
        let (f1, _) = trace.surface.factors();
        let t = f1.theta();
        let n = t.len() - 1;
        let asym = (0..=n).map(|j| (t[j] - t[n - j]).abs()).fold(0.0f64, f64::max);
        assert!(asym < 1e-10, "{asym}");
    }

    #[test]
    fn jacobian_matches_directional_differences() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let s = ProductSurface::new(perturbed(2.0, 16, 5e-2), perturbed(2.0, 16, -3e-2), 0.5).unwrap();
        let s = with_unknowns(&s, &unknowns(&s)).unwrap();
        let jac = jacobian(&s, 1e-6).unwrap();
        let x = unknowns(&s);
        let r0 = residual_vector(&s);
        for _ in 0..5 {
            let d: Vec<f64> = (0..x.len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let h = 1e-6;
            let xp: Vec<f64> = x.iter().zip(&d).map(|(a, b)| a + h * b).collect();
            let rp = residual_vector(&with_unknowns(&s, &xp).unwrap());
            let fd: Vec<f64> = rp.iter().zip(&r0).map(|(a, b)| (a - b) / h).collect();
            let jd = &jac * nalgebra::DVector::from_vec(d);
            let diff: Vec<f64> = fd.iter().zip(jd.iter()).map(|(a, b)| a - b).collect();
            assert!(norm(&diff) <= 1e-4 * norm(&fd), "{} vs {}", norm(&diff), norm(&fd));
        }
    }

    #[test]
    fn flat_factor_has_no_unknowns() {
        let s = ProductSurface::new(perturbed(1.0, 16, 1e-2), SphereProfile::flat_torus(1.0, 16, 1.0).unwrap(), 0.0)
            .unwrap();
        assert_eq!(unknowns(&s).len(), 13);
    }

    #[test]
    fn poisson_zero_rhs_gives_zero() {
        let p = SphereProfile::round(1.0, 32).unwrap();
        let u = poisson_1d(&p, &vec![0.0; 33]).unwrap();
        assert!(sup(&u) == 0.0);
    }

    #[test]
    fn poisson_recovers_coordinate_function() {
        let mut errs = Vec::new();
        for n in [32, 64] {
            let p = SphereProfile::round(1.0, n).unwrap();
            let z = p.nodes();
            let rhs: Vec<f64> = z.iter().map(|x| -2.0 * x).collect();
            let u = poisson_1d(&p, &rhs).unwrap();
            let round_trip: Vec<f64> = p.laplacian(&u).iter().zip(&rhs).map(|(a, b)| a - b).collect();
            assert!(sup(&round_trip) <= 1e-10 * sup(&rhs));
            let mean: f64 = u.iter().zip(p.weights()).map(|(a, w)| a * w).sum();
            assert!(mean.abs() < 1e-12);
            errs.push(sup(&u.iter().zip(&z).map(|(a, b)| a - b).collect::<Vec<_>>()));
        }
        assert!(errs[1] < 1e-8, "{errs:?}");
    }

    #[test]
    fn poisson_rejects_incompatible_rhs() {
        let p = SphereProfile::round(1.0, 32).unwrap();
        assert!(matches!(poisson_1d(&p, &vec![1.0; 33]), Err(Error::IncompatibleRhs(_))));
        let flat = SphereProfile::flat_torus(1.0, 32, 2.0).unwrap();
        assert!(matches!(poisson_1d(&flat, &vec![1.0; 32]), Err(Error::IncompatibleRhs(_))));
        let z = flat.nodes();
        let rhs: Vec<f64> = z.iter().map(|x| libm::cos(core::f64::consts::PI * x)).collect();
        let u = poisson_1d(&flat, &rhs).unwrap();
        let rt: Vec<f64> = flat.laplacian(&u).iter().zip(&rhs).map(|(a, b)| a - b).collect();
        assert!(sup(&rt) < 1e-10);
    }
}
