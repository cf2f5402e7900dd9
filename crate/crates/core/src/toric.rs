//! Products of axially symmetric surfaces in momentum coordinates.
//!
//! A factor carries the metric `dz²/Θ(z) + Θ(z) dθ²` on `[-c, c] × S¹`,
//! sampled at `z_j = -c + j h`. Sphere factors close up smoothly at the poles
//! (`Θ(±c) = 0`, `Θ'(∓c) = ±2`); flat-torus factors use a periodic grid with
//! constant `Θ`. Grid functions on the product are stored row-major with the
//! first factor's index outermost.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::error::{Error, Result};
use crate::forms::{hodge_star, norm_sq, omega_contract, omega_trace, FormTensor, MetricFrame};
use crate::linalg::Mat;
use crate::report::Report;

/// Smallest accepted number of grid intervals per factor.
pub const MIN_GRID: usize = 16;

/// Largest accepted pole-slope defect of a sampled sphere profile.
pub const POLE_SLOPE_TOLERANCE: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FactorKind {
    Sphere,
    FlatTorus,
}

/// One surface factor: half-length `c`, `n` grid intervals and nodal `Θ`.
#[derive(Debug, Clone, PartialEq)]
pub struct SphereProfile {
    kind: FactorKind,
    c: f64,
    n: usize,
    theta: Vec<f64>,
}

fn check_grid(c: f64, n: usize) -> Result<()> {
    if !(c > 0.0) || !c.is_finite() {
        return Err(Error::InvalidProfile(format!("half-length must be positive, got {c}")));
    }
    if n < MIN_GRID {
        return Err(Error::InvalidProfile(format!("grid needs at least {MIN_GRID} intervals, got {n}")));
    }
    Ok(())
}

impl SphereProfile {
    /// Round sphere `Θ = (c² - z²)/c` of curvature `1/c` and area `4πc`.
    pub fn round(c: f64, n: usize) -> Result<Self> {
        check_grid(c, n)?;
        let h = 2.0 * c / n as f64;
        // (c - z)(c + z) with z = -c + jh, written to avoid cancellation
        let theta = (0..=n).map(|j| (j as f64 * h) * ((n - j) as f64 * h) / c).collect();
        Self::validated(FactorKind::Sphere, c, n, theta)
    }

    /// Samples `f` at the nodes. `f` must vanish at `±c` and have slope `±2`
    /// there; the sampled slope is checked to within [`POLE_SLOPE_TOLERANCE`].
    pub fn from_fn(c: f64, n: usize, f: impl Fn(f64) -> f64) -> Result<Self> {
        check_grid(c, n)?;
        let h = 2.0 * c / n as f64;
        let mut theta: Vec<f64> = (0..=n).map(|j| f(-c + j as f64 * h)).collect();
        let scale = theta.iter().fold(0.0f64, |m, t| m.max(t.abs()));
        for j in [0, n] {
            if !(theta[j].abs() <= 1e-12 * scale) {
                return Err(Error::InvalidProfile(format!("Theta must vanish at the poles, got {}", theta[j])));
            }
            theta[j] = 0.0;
        }
        let p = Self::validated(FactorKind::Sphere, c, n, theta)?;
        let defect = p.pole_slope_defect();
        if !(defect <= POLE_SLOPE_TOLERANCE) {
            return Err(Error::InvalidProfile(format!("pole slope differs from 2 by {defect}")));
        }
        Ok(p)
    }

    /// Builds a sphere profile from `Θ_2, ..., Θ_{n-2}`.
    pub fn from_unknowns(c: f64, n: usize, interior: &[f64]) -> Result<Self> {
        check_grid(c, n)?;
        if interior.len() != n - 3 {
            return Err(Error::DimensionMismatch { expected: n - 3, found: interior.len() });
        }
        let h = 2.0 * c / n as f64;
        let mut theta = vec![0.0; n + 1];
        theta[2..n - 1].copy_from_slice(interior);
        apply_pole_constraints(&mut theta, h);
        Self::validated(FactorKind::Sphere, c, n, theta)
    }

    /// Flat factor with constant `Θ` on a periodic grid of `n` nodes.
    pub fn flat_torus(c: f64, n: usize, theta: f64) -> Result<Self> {
        check_grid(c, n)?;
        if !(theta > 0.0) || !theta.is_finite() {
            return Err(Error::InvalidProfile(format!("flat factor needs positive Theta, got {theta}")));
        }
        Ok(Self { kind: FactorKind::FlatTorus, c, n, theta: vec![theta; n] })
    }

    fn validated(kind: FactorKind, c: f64, n: usize, theta: Vec<f64>) -> Result<Self> {
        for (j, &t) in theta.iter().enumerate().take(n).skip(1) {
            if !(t > 0.0) || !t.is_finite() {
                return Err(Error::InvalidProfile(format!("Theta must be positive inside, got {t} at node {j}")));
            }
        }
        Ok(Self { kind, c, n, theta })
    }

    /// `max |Θ'(∓c) ∓ 2|` from one-sided differences; zero for a flat factor.
    pub fn pole_slope_defect(&self) -> f64 {
        match self.kind {
            FactorKind::FlatTorus => 0.0,
            FactorKind::Sphere => {
                let d = self.derivative(&self.theta);
                (d[0] - 2.0).abs().max((d[self.n] + 2.0).abs())
            }
        }
    }

    pub fn kind(&self) -> FactorKind {
        self.kind
    }

    pub fn half_length(&self) -> f64 {
        self.c
    }

    /// Number of grid intervals.
    pub fn intervals(&self) -> usize {
        self.n
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.c / self.n as f64
    }

    /// Number of nodes: `n + 1` on a sphere, `n` on a periodic flat factor.
    pub fn len(&self) -> usize {
        self.theta.len()
    }

    pub fn is_empty(&self) -> bool {
        self.theta.is_empty()
    }

    pub fn nodes(&self) -> Vec<f64> {
        let h = self.spacing();
        (0..self.len()).map(|j| -self.c + j as f64 * h).collect()
    }

    pub fn theta(&self) -> &[f64] {
        &self.theta
    }

    /// `Θ_2, ..., Θ_{n-2}`, the free values of a sphere profile; empty for a flat factor.
    pub fn unknowns(&self) -> Vec<f64> {
        match self.kind {
            FactorKind::Sphere => self.theta[2..self.n - 1].to_vec(),
            FactorKind::FlatTorus => Vec::new(),
        }
    }

    /// `∫ dA = 2π ∫ dz = 4πc`.
    pub fn area(&self) -> f64 {
        4.0 * PI * self.c
    }

    /// Quadrature weights for `∫ · dz`: trapezoid on a sphere, uniform when periodic.
    pub fn weights(&self) -> Vec<f64> {
        let h = self.spacing();
        let mut w = vec![h; self.len()];
        if self.kind == FactorKind::Sphere {
            w[0] = 0.5 * h;
            w[self.n] = 0.5 * h;
        }
        w
    }

    /// Second-order first derivative: central inside, one-sided at the poles.
    pub fn derivative(&self, u: &[f64]) -> Vec<f64> {
        let h = self.spacing();
        let m = self.len();
        match self.kind {
            FactorKind::FlatTorus => (0..m).map(|j| (u[(j + 1) % m] - u[(j + m - 1) % m]) / (2.0 * h)).collect(),
            FactorKind::Sphere => (0..m)
                .map(|j| {
                    if j == 0 {
                        (-3.0 * u[0] + 4.0 * u[1] - u[2]) / (2.0 * h)
                    } else if j == m - 1 {
                        (3.0 * u[j] - 4.0 * u[j - 1] + u[j - 2]) / (2.0 * h)
                    } else {
                        (u[j + 1] - u[j - 1]) / (2.0 * h)
                    }
                })
                .collect(),
        }
    }

    /// `(Θ u')'` in conservative form with midpoint averages of `Θ`; at a pole,
    /// where `Θ = 0`, the value is `Θ' u'`.
    pub fn laplacian(&self, u: &[f64]) -> Vec<f64> {
        let h = self.spacing();
        let m = self.len();
        let t = &self.theta;
        match self.kind {
            FactorKind::FlatTorus => {
                (0..m).map(|j| t[j] * (u[(j + 1) % m] - 2.0 * u[j] + u[(j + m - 1) % m]) / (h * h)).collect()
            }
            FactorKind::Sphere => {
                let dt = self.derivative(t);
                let du = self.derivative(u);
                (0..m)
                    .map(|j| {
                        if j == 0 || j == m - 1 {
                            dt[j] * du[j]
                        } else {
                            let up = 0.5 * (t[j] + t[j + 1]) * (u[j + 1] - u[j]);
                            let down = 0.5 * (t[j] + t[j - 1]) * (u[j] - u[j - 1]);
                            (up - down) / (h * h)
                        }
                    })
                    .collect()
            }
        }
    }

    /// The matrix of [`SphereProfile::laplacian`].
    pub fn laplacian_matrix(&self) -> Mat {
        let m = self.len();
        let mut out = Mat::zeros(m, m);
        let mut e = vec![0.0; m];
        for k in 0..m {
            e[k] = 1.0;
            for (j, v) in self.laplacian(&e).into_iter().enumerate() {
                out[(j, k)] = v;
            }
            e[k] = 0.0;
        }
        out
    }
}

/// `Θ_1 = h + Θ_2/4` and `Θ_{n-1} = h + Θ_{n-2}/4`: second-order `Θ'(∓c) = ±2` with `Θ(±c) = 0`.
fn apply_pole_constraints(theta: &mut [f64], h: f64) {
    let n = theta.len() - 1;
    theta[0] = 0.0;
    theta[n] = 0.0;
    theta[1] = h + 0.25 * theta[2];
    theta[n - 1] = h + 0.25 * theta[n - 2];
}

/// Gauss curvature `κ = -Θ''/2` at the nodes.
pub fn gauss_curvature(p: &SphereProfile) -> Vec<f64> {
    let h2 = p.spacing() * p.spacing();
    let t = &p.theta;
    let m = p.len();
    match p.kind {
        FactorKind::FlatTorus => vec![0.0; m],
        FactorKind::Sphere => (0..m)
            .map(|j| {
                // at a pole: quadratic extrapolation of the central values, so the
                // discretization error stays smooth up to the boundary
                let second = if j == 0 {
                    3.0 * t[0] - 9.0 * t[1] + 10.0 * t[2] - 5.0 * t[3] + t[4]
                } else if j == m - 1 {
                    3.0 * t[j] - 9.0 * t[j - 1] + 10.0 * t[j - 2] - 5.0 * t[j - 3] + t[j - 4]
                } else {
                    t[j + 1] - 2.0 * t[j] + t[j - 1]
                };
                -0.5 * second / h2
            })
            .collect(),
    }
}

/// Topological quantities of a product surface with class datum `a`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TopoInvariants {
    /// `Ω·A` with `Ω = [ω]` and `A = [α/2π]`.
    pub omega_dot_a: f64,
    pub a_dot_a: f64,
    /// `c₁² = ∫ (ρ/2π)²`.
    pub c1_sq: f64,
}

impl TopoInvariants {
    /// Defects of `Ω·A = 0` and `A·A = -c₁²`.
    pub fn report(&self) -> Report {
        let mut r = Report::new();
        r.push("topology.omega_dot_a", self.omega_dot_a);
        r.push("topology.a_dot_a_plus_c1_sq", self.a_dot_a + self.c1_sq);
        r
    }
}

/// `s = a(c₁ + c₂)`: the class `A` has periods `±s` on the two factors, and its
/// harmonic representative is `α = (s/2)(ω₁/c₁ - ω₂/c₂)`, which is `a(ω₁ - ω₂)`
/// when the areas agree.
fn class_period(f1: &SphereProfile, f2: &SphereProfile, a: f64) -> f64 {
    a * (f1.c + f2.c)
}

/// Quadrature values of `Ω·A`, `A·A` and `c₁²`.
pub fn topo_invariants(f1: &SphereProfile, f2: &SphereProfile, a: f64) -> TopoInvariants {
    let (w1, w2) = (f1.weights(), f2.weights());
    let int = |k: &[f64], w: &[f64]| k.iter().zip(w).map(|(x, y)| x * y).sum::<f64>();
    let len1: f64 = w1.iter().sum();
    let len2: f64 = w2.iter().sum();
    let c1_sq = 2.0 * int(&gauss_curvature(f1), &w1) * int(&gauss_curvature(f2), &w2);
    let s = class_period(f1, f2, a);
    let (p, q) = (0.5 * s / f1.c, 0.5 * s / f2.c);
    // α = p ω₁ - q ω₂, so α∧α = -2pq ω₁∧ω₂ and ω∧α = (p - q) ω₁∧ω₂,
    // with ∫ ω₁∧ω₂ = (2π)² ∫∫ dz₁ dz₂
    let vol = 4.0 * PI * PI * len1 * len2;
    let a_dot_a = -2.0 * p * q * vol / (4.0 * PI * PI);
    let omega_dot_a = (p - q) * vol / (2.0 * PI);
    TopoInvariants { omega_dot_a, a_dot_a, c1_sq }
}

/// A product surface `S₁ × S₂` with harmonic anti-self-dual class datum `a`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProductSurface {
    f1: SphereProfile,
    f2: SphereProfile,
    a: f64,
}

/// Relative tolerance on equal areas for the class constraint.
const AREA_TOLERANCE: f64 = 1e-12;

impl ProductSurface {
    pub fn new(f1: SphereProfile, f2: SphereProfile, a: f64) -> Result<Self> {
        if !a.is_finite() {
            return Err(Error::InvalidConfig(format!("class datum must be finite, got {a}")));
        }
        if a != 0.0 && (f1.c - f2.c).abs() > AREA_TOLERANCE * f1.c.max(f2.c) {
            let t = topo_invariants(&f1, &f2, a);
            return Err(Error::ClassConstraint(format!("Ω·A ≠ 0 (Ω·A = {:e})", t.omega_dot_a)));
        }
        Ok(Self { f1, f2, a })
    }

    pub fn factors(&self) -> (&SphereProfile, &SphereProfile) {
        (&self.f1, &self.f2)
    }

    pub fn alpha_coeff(&self) -> f64 {
        self.a
    }

    pub fn with_factors(&self, f1: SphereProfile, f2: SphereProfile) -> Result<Self> {
        Self::new(f1, f2, self.a)
    }

    /// Node counts `(m₁, m₂)` of the tensor grid.
    pub fn shape(&self) -> (usize, usize) {
        (self.f1.len(), self.f2.len())
    }

    /// Product quadrature weights for `∫∫ · dz₁ dz₂`.
    pub fn weights(&self) -> Vec<f64> {
        let (w1, w2) = (self.f1.weights(), self.f2.weights());
        w1.iter().flat_map(|x| w2.iter().map(move |y| x * y)).collect()
    }

    /// Largest grid spacing of the two factors.
    pub fn spacing(&self) -> f64 {
        self.f1.spacing().max(self.f2.spacing())
    }

    pub fn topo_invariants(&self) -> TopoInvariants {
        topo_invariants(&self.f1, &self.f2, self.a)
    }
}

/// `(κ₁, κ₂)` with `ρ = κ₁ω₁ + κ₂ω₂`.
pub fn ricci_form_coeffs(s: &ProductSurface) -> (Vec<f64>, Vec<f64>) {
    (gauss_curvature(&s.f1), gauss_curvature(&s.f2))
}

fn outer(u: &[f64], v: &[f64], f: impl Fn(f64, f64) -> f64) -> Vec<f64> {
    u.iter().flat_map(|&x| v.iter().map(move |&y| (x, y))).map(|(x, y)| f(x, y)).collect()
}

/// `R = 2κ₁ + 2κ₂` on the tensor grid.
pub fn scalar_curvature(s: &ProductSurface) -> Vec<f64> {
    let (k1, k2) = ricci_form_coeffs(s);
    outer(&k1, &k2, |x, y| 2.0 * x + 2.0 * y)
}

/// `Δu = ∂₁(Θ₁∂₁u) + ∂₂(Θ₂∂₂u)` for a torus-invariant grid function.
pub fn invariant_laplacian(s: &ProductSurface, u: &[f64]) -> Result<Vec<f64>> {
    let (m1, m2) = s.shape();
    if u.len() != m1 * m2 {
        return Err(Error::DimensionMismatch { expected: m1 * m2, found: u.len() });
    }
    let mut out = vec![0.0; m1 * m2];
    for i in 0..m1 {
        let row = s.f2.laplacian(&u[i * m2..(i + 1) * m2]);
        out[i * m2..(i + 1) * m2].copy_from_slice(&row);
    }
    let mut col = vec![0.0; m1];
    for k in 0..m2 {
        for i in 0..m1 {
            col[i] = u[i * m2 + k];
        }
        for (i, v) in s.f1.laplacian(&col).into_iter().enumerate() {
            out[i * m2 + k] += v;
        }
    }
    Ok(out)
}

/// Pointwise residual of `½(dd^c R)∧ω = α∧α + ρ∧ρ` in units of the volume form.
#[derive(Debug, Clone, PartialEq)]
pub struct PdeResidualField {
    shape: (usize, usize),
    values: Vec<f64>,
    sup: f64,
    l2: f64,
}

impl PdeResidualField {
    fn new(shape: (usize, usize), values: Vec<f64>, weights: &[f64]) -> Self {
        let sup = values.iter().fold(0.0f64, |m, v| if v.is_nan() { f64::NAN } else { m.max(v.abs()) });
        let total: f64 = weights.iter().sum();
        let l2 = libm::sqrt(values.iter().zip(weights).map(|(v, w)| w * v * v).sum::<f64>() / total);
        Self { shape, values, sup, l2 }
    }

    pub fn shape(&self) -> (usize, usize) {
        self.shape
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.shape.1 + j]
    }

    pub fn sup_norm(&self) -> f64 {
        self.sup
    }

    /// Quadrature `L²` norm normalized by the total weight.
    pub fn l2_norm(&self) -> f64 {
        self.l2
    }
}

/// `E = ½ΔR - 2κ₁κ₂ + 2a²`, using `ρ∧ρ = 2κ₁κ₂ dV` and `α∧α = -2a² dV`.
pub fn pde_residual(s: &ProductSurface) -> PdeResidualField {
    let (k1, k2) = ricci_form_coeffs(s);
    // ΔR separates: ½ΔR = Δ₁κ₁ + Δ₂κ₂
    let (l1, l2) = (s.f1.laplacian(&k1), s.f2.laplacian(&k2));
    let a2 = 2.0 * s.a * s.a;
    let m2 = k2.len();
    let values = (0..k1.len() * m2)
        .map(|idx| {
            let (i, j) = (idx / m2, idx % m2);
            l1[i] + l2[j] - 2.0 * k1[i] * k2[j] + a2
        })
        .collect();
    PdeResidualField::new(s.shape(), values, &s.weights())
}

/// Harmonic anti-self-dual form of the class datum and its numerical checks.
#[derive(Debug, Clone, PartialEq)]
pub struct HarmonicAsd {
    /// Coefficients `(p, q)` in `α = p ω₁ - q ω₂`.
    pub coeffs: (f64, f64),
    pub report: Report,
}

/// Coordinate coframe `(dz₁, dθ₁, dz₂, dθ₂)` metric at a node.
fn coordinate_metric(t1: f64, t2: f64) -> Result<MetricFrame> {
    MetricFrame::new(Mat::from_diagonal(&nalgebra::DVector::from_vec(vec![1.0 / t1, t1, 1.0 / t2, t2])))
}

fn factor_pair_form(p: f64, q: f64) -> FormTensor {
    let mut f = FormTensor::zero(4, 2).expect("4-frame");
    f.add_component(&[0, 1], p);
    f.add_component(&[2, 3], q);
    f
}

/// `α = (s/2)(ω₁/c₁ - ω₂/c₂)`. In the product ansatz the area forms are
/// parallel, so this constant-coefficient form is the harmonic representative;
/// closedness, primitivity, anti-self-duality and `|α|² = 4a²` are checked at
/// every interior node in the coordinate coframe.
pub fn harmonic_asd(s: &ProductSurface) -> HarmonicAsd {
    let sp = class_period(&s.f1, &s.f2, s.a);
    let (p, q) = (0.5 * sp / s.f1.c, 0.5 * sp / s.f2.c);
    let alpha = factor_pair_form(p, -q);
    let omega = factor_pair_form(1.0, 1.0);

    // dα: the coefficient functions are constant along both momentum coordinates
    let c1 = vec![p; s.f2.len()];
    let c2 = vec![-q; s.f1.len()];
    let closed = s.f2.derivative(&c1).iter().chain(s.f1.derivative(&c2).iter()).fold(0.0f64, |m, v| m.max(v.abs()));

    let interior = |f: &SphereProfile| -> Vec<usize> {
        match f.kind {
            FactorKind::Sphere => (1..f.len() - 1).collect(),
            FactorKind::FlatTorus => (0..f.len()).collect(),
        }
    };
    let (mut trace, mut asd, mut norm) = (0.0f64, 0.0f64, 0.0f64);
    for &i in &interior(&s.f1) {
        for &j in &interior(&s.f2) {
            let g = coordinate_metric(s.f1.theta[i], s.f2.theta[j]).expect("positive interior profile");
            trace = trace.max(omega_trace(&alpha, &omega, &g).expect("2-forms").abs());
            let star = hodge_star(&alpha, &g).expect("4-frame");
            asd = asd.max(star.add(&alpha).expect("same shape").sup_norm());
            norm = norm.max((norm_sq(&alpha, &g).expect("4-frame") - 4.0 * p * q).abs());
        }
    }
    let mut report = Report::new();
    report.push("asd.closed", closed);
    report.push("asd.primitive", trace);
    report.push("asd.anti_self_dual", asd);
    report.push("asd.norm", norm);
    HarmonicAsd { coeffs: (p, q), report }
}

/// Transverse data `g^T = (R/2) g_K`, `F_V = α`, `F_JV = -ρ`, `f = log(R/2)`
/// built from a product Kähler surface, with its structural checks.
#[derive(Debug, Clone, PartialEq)]
pub struct ForwardMap {
    pub shape: (usize, usize),
    /// `R/2` at each node.
    pub conformal_factor: Vec<f64>,
    /// `f = log(R/2)`.
    pub potential: Vec<f64>,
    pub report: Report,
}

/// Pointwise transverse checks of the forward map, each maximized over the grid:
/// `θ_{g^T} = df`, `tr F_V = 0`, `tr F_JV = -2`, the anomaly identity and
/// `|α|² + |γ|² = 1` with `γ = F_JV + ½ω^T`.
pub fn forward_map(s: &ProductSurface) -> Result<ForwardMap> {
    let (k1, k2) = ricci_form_coeffs(s);
    let r = scalar_curvature(s);
    let min_r = r.iter().cloned().fold(f64::INFINITY, f64::min);
    if !(min_r > 0.0) {
        return Err(Error::NonPositiveScalarCurvature(min_r));
    }
    let (m1, m2) = s.shape();
    let lambda: Vec<f64> = r.iter().map(|x| 0.5 * x).collect();
    let f: Vec<f64> = lambda.iter().map(|x| libm::log(*x)).collect();
    let dd_c = invariant_laplacian(s, &lambda)?;

    let along = |u: &[f64], axis: usize| -> Vec<f64> {
        let mut out = vec![0.0; m1 * m2];
        if axis == 1 {
            let mut col = vec![0.0; m1];
            for k in 0..m2 {
                for i in 0..m1 {
                    col[i] = u[i * m2 + k];
                }
                for (i, v) in s.f1.derivative(&col).into_iter().enumerate() {
                    out[i * m2 + k] = v;
                }
            }
        } else {
            for i in 0..m1 {
                out[i * m2..(i + 1) * m2].copy_from_slice(&s.f2.derivative(&u[i * m2..(i + 1) * m2]));
            }
        }
        out
    };
    let (dl1, dl2) = (along(&lambda, 1), along(&lambda, 2));
    let (df1, df2) = (along(&f, 1), along(&f, 2));

    let sp = class_period(&s.f1, &s.f2, s.a);
    let alpha = factor_pair_form(0.5 * sp / s.f1.c, -0.5 * sp / s.f2.c);
    let omega_k = factor_pair_form(1.0, 1.0);
    let mut vol = FormTensor::zero(4, 4)?;
    vol.add_component(&[0, 1, 2, 3], 1.0);
    let alpha_sq = alpha.wedge(&alpha)?;

    let (mut lee, mut tr_v, mut tr_jv, mut anomaly, mut norms) = (0.0f64, 0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for i in 0..m1 {
        let root1 = libm::sqrt(s.f1.theta[i]);
        for j in 0..m2 {
            let root2 = libm::sqrt(s.f2.theta[j]);
            let idx = i * m2 + j;
            let l = lambda[idx];
            // orthonormal coframe (dz₁/√Θ₁, √Θ₁dθ₁, dz₂/√Θ₂, √Θ₂dθ₂) of g_K
            let gt = MetricFrame::new(Mat::identity(4, 4) * l)?;
            let omega_t = omega_k.scale(l);
            let f_jv = factor_pair_form(-k1[i], -k2[j]);

            let d_lambda = FormTensor::one_form(&[dl1[idx] * root1, 0.0, dl2[idx] * root2, 0.0])?;
            let d_f = FormTensor::one_form(&[df1[idx] * root1, 0.0, df2[idx] * root2, 0.0])?;
            let d_omega_t = d_lambda.wedge(&omega_k)?;
            let theta = omega_contract(&d_omega_t, &omega_t, &gt)?.scale(0.5);
            lee = lee.max(theta.distance(&d_f)?);

            tr_v = tr_v.max(omega_trace(&alpha, &omega_t, &gt)?.abs());
            tr_jv = tr_jv.max((omega_trace(&f_jv, &omega_t, &gt)? + 2.0).abs());

            let lhs = vol.scale(dd_c[idx]);
            let rhs = alpha_sq.add(&f_jv.wedge(&f_jv)?)?;
            anomaly = anomaly.max(lhs.distance(&rhs)?);

            let gamma = f_jv.add(&omega_t.scale(0.5))?;
            norms = norms.max((norm_sq(&alpha, &gt)? + norm_sq(&gamma, &gt)? - 1.0).abs());
        }
    }
    let mut report = Report::new();
    report.push("forward.lee_form", lee);
    report.push("forward.trace_F_V", tr_v);
    report.push("forward.trace_F_JV", tr_jv);
    report.push("forward.anomaly", anomaly);
    report.push("forward.principal_norms", norms);
    Ok(ForwardMap { shape: (m1, m2), conformal_factor: lambda, potential: f, report })
}
