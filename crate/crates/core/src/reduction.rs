//! Canonical `T²` reduction of Bismut-Hermitian-Einstein models and the
//! inverse assembly of total spaces from transverse data.
//!
//! Reduced data lives in an adapted orthonormal frame: horizontal vectors
//! `x_1, Jx_1, ..., x_m, Jx_m` first, then `V` and `JV` in the last two slots.
//! Indices `i, j, k, l` below are horizontal, `α` is `V` and `β` is `JV`.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::algebra::StructureAlgebra;
use crate::connection::{lowered_brackets, ConnectionCoeffs, ConnectionKind, CurvatureTensor};
use crate::error::{Error, Result};
use crate::forms::{inner, norm_sq, omega_contract, omega_trace, FormTensor, MetricFrame};
use crate::geometry;
use crate::hermitian::HermitianModel;
use crate::linalg::{sorted_symmetric_eigenvalues, sup_distance, vec_sup, Mat};
use crate::report::Report;
use crate::tensor::Tensor;

/// Largest `‖ρ_B‖∞` accepted by [`reduce`].
pub const BHE_TOLERANCE: f64 = 1e-10;
/// Tolerance for horizontality and `(1,1)` type of the principal curvatures.
pub const BASIC_TOLERANCE: f64 = 1e-12;
/// Below this length the Lee field counts as zero.
pub const VANISHING_TOLERANCE: f64 = 1e-10;

/// The reduced structure of a model with non-vanishing Lee field.
#[derive(Debug, Clone, PartialEq)]
pub struct ReductionData {
    source: HermitianModel,
    model: HermitianModel,
    frame: Mat,
    scale: f64,
    v: Vec<f64>,
    jv: Vec<f64>,
    eta: FormTensor,
    j_eta: FormTensor,
    f_v: FormTensor,
    f_jv: FormTensor,
    omega_t: FormTensor,
    omega_v: FormTensor,
    torsion: FormTensor,
    h_t: FormTensor,
    g_t: Mat,
    f: f64,
}

/// Reduces a BHE model, rescaling so that `|V| = 1`.
pub fn reduce(m: &HermitianModel) -> Result<ReductionData> {
    let rho = geometry::bhe_residual(m);
    if !(rho <= BHE_TOLERANCE) {
        return Err(Error::NotBhe(rho));
    }
    let data = reduce_unchecked(m)?;
    let basic = data.structure_report().max_residual();
    if !(basic <= BASIC_TOLERANCE) {
        return Err(Error::NotBasic(basic));
    }
    Ok(data)
}

/// The same construction without the BHE and basic-curvature checks, for
/// reporting on control metrics.
pub fn reduce_unchecked(m: &HermitianModel) -> Result<ReductionData> {
    let n = m.dim();
    if n < 4 || !n.is_multiple_of(2) {
        return Err(Error::UnsupportedDimension(n));
    }
    let v0 = geometry::lee_vector(m)?;
    let len_sq = m.metric().inner_vectors(&v0, &v0);
    let len = libm::sqrt(len_sq.max(0.0));
    if !(len > VANISHING_TOLERANCE) {
        return Err(Error::VanishingLeeField(len));
    }
    let source = m.rescale(len_sq)?;
    let v_source = geometry::lee_vector(&source)?;
    let frame = adapted_frame(&source, &v_source)?;
    let model = source.change_frame(&frame)?;

    let h = n - 2;
    let v = geometry::lee_vector(&model)?;
    let jv = model.apply_j(&v);
    let metric = model.metric();
    let eta = metric.flat(&v)?;
    let j_eta = eta.j_action(model.j())?;
    let algebra = model.algebra();
    let f_v = algebra.exterior_derivative(&eta)?;
    let f_jv = algebra.exterior_derivative(&j_eta)?;
    let omega_v = eta.wedge(&j_eta)?;
    let omega_t = model.omega().sub(&omega_v)?;
    let torsion = geometry::bismut_torsion(&model);
    let horizontal: Vec<usize> = (0..h).collect();
    let h_t = torsion.restrict(&horizontal);
    let mut g_t = metric.matrix().clone();
    for a in h..n {
        for b in 0..n {
            g_t[(a, b)] = 0.0;
            g_t[(b, a)] = 0.0;
        }
    }
    let f = model.potential();
    Ok(ReductionData {
        source,
        model,
        frame,
        scale: len_sq,
        v,
        jv,
        eta,
        j_eta,
        f_v,
        f_jv,
        omega_t,
        omega_v,
        torsion,
        h_t,
        g_t,
        f,
    })
}

/// Columns `x_1, Jx_1, ..., V, JV` in the coordinates of `m`, orthonormal for its metric.
fn adapted_frame(m: &HermitianModel, v: &[f64]) -> Result<Mat> {
    let n = m.dim();
    let g = m.metric();
    let project = |x: &mut [f64], against: &[Vec<f64>]| {
        for w in against {
            let c = g.inner_vectors(w, x);
            for (xi, wi) in x.iter_mut().zip(w) {
                *xi -= c * wi;
            }
        }
    };
    let normalize = |x: &mut [f64]| -> f64 {
        let len = libm::sqrt(g.inner_vectors(x, x));
        for xi in x.iter_mut() {
            *xi /= len;
        }
        len
    };
    let mut chosen: Vec<Vec<f64>> = vec![v.to_vec(), m.apply_j(v)];
    while chosen.len() < n {
        let mut best: Option<(f64, Vec<f64>)> = None;
        for k in 0..n {
            let mut x = vec![0.0; n];
            x[k] = 1.0;
            project(&mut x, &chosen);
            project(&mut x, &chosen);
            let len = libm::sqrt(g.inner_vectors(&x, &x));
            if best.as_ref().is_none_or(|(b, _)| len > *b) {
                best = Some((len, x));
            }
        }
        let (len, mut x) = best.expect("frame is nonempty");
        if len < 1e-8 {
            return Err(Error::Singular("horizontal complement".into()));
        }
        normalize(&mut x);
        let mut y = m.apply_j(&x);
        project(&mut y, &chosen);
        normalize(&mut y);
        chosen.push(x);
        chosen.push(y);
    }
    // horizontal pairs first, then V and JV
    chosen.rotate_left(2);
    Ok(Mat::from_fn(n, n, |i, a| chosen[a][i]))
}

fn sup_over(h: usize, rank: usize, mut f: impl FnMut(&[usize]) -> f64) -> f64 {
    let total = h.pow(rank as u32);
    let mut idx = vec![0usize; rank];
    let mut worst = 0.0f64;
    for mut flat in 0..total {
        for slot in (0..rank).rev() {
            idx[slot] = flat % h;
            flat /= h;
        }
        let v = f(&idx);
        worst = if v.is_nan() { f64::NAN } else { worst.max(v.abs()) };
    }
    worst
}

/// `d^cβ = -(dβ)(J·,…,J·)`, the sign for which `H = -d^cω`.
pub fn d_c(algebra: &StructureAlgebra, beta: &FormTensor, j: &Mat) -> Result<FormTensor> {
    Ok(algebra.exterior_derivative(beta)?.pullback(j)?.scale(-1.0))
}

/// `⅙|H^T|² + ½(|F_V|² + |F_JV|²)`.
fn dilaton(h_t: &FormTensor, f_v: &FormTensor, f_jv: &FormTensor, g: &MetricFrame) -> Result<f64> {
    Ok(norm_sq(h_t, g)? / 6.0 + 0.5 * (norm_sq(f_v, g)? + norm_sq(f_jv, g)?))
}

impl ReductionData {
    pub fn name(&self) -> &str {
        self.model.name()
    }

    /// The model in the adapted frame.
    pub fn model(&self) -> &HermitianModel {
        &self.model
    }

    /// The rescaled model in its original frame.
    pub fn source(&self) -> &HermitianModel {
        &self.source
    }

    /// Columns are the adapted frame vectors in source coordinates.
    pub fn frame(&self) -> &Mat {
        &self.frame
    }

    /// Factor applied to the input metric to reach `|V| = 1`.
    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn dim(&self) -> usize {
        self.model.dim()
    }

    pub fn horizontal_dim(&self) -> usize {
        self.model.dim() - 2
    }

    pub fn v(&self) -> &[f64] {
        &self.v
    }

    pub fn jv(&self) -> &[f64] {
        &self.jv
    }

    pub fn eta(&self) -> &FormTensor {
        &self.eta
    }

    pub fn j_eta(&self) -> &FormTensor {
        &self.j_eta
    }

    pub fn f_v(&self) -> &FormTensor {
        &self.f_v
    }

    pub fn f_jv(&self) -> &FormTensor {
        &self.f_jv
    }

    pub fn omega_t(&self) -> &FormTensor {
        &self.omega_t
    }

    pub fn omega_v(&self) -> &FormTensor {
        &self.omega_v
    }

    /// Bismut torsion of the adapted model.
    pub fn torsion(&self) -> &FormTensor {
        &self.torsion
    }

    pub fn h_t(&self) -> &FormTensor {
        &self.h_t
    }

    /// Transverse metric extended by zero on the vertical directions.
    pub fn g_t(&self) -> &Mat {
        &self.g_t
    }

    pub fn potential(&self) -> f64 {
        self.f
    }

    /// `g^T` on the horizontal subframe.
    pub fn transverse_metric(&self) -> MetricFrame {
        let h = self.horizontal_dim();
        MetricFrame::new(self.g_t.view((0, 0), (h, h)).into_owned()).expect("restriction of a metric")
    }

    /// `J^T` on the horizontal subframe.
    pub fn transverse_j(&self) -> Mat {
        let h = self.horizontal_dim();
        self.model.j().view((0, 0), (h, h)).into_owned()
    }

    /// A form on the full frame seen on the horizontal subframe.
    pub fn transverse(&self, beta: &FormTensor) -> FormTensor {
        beta.leading(self.horizontal_dim()).expect("degree fits the transverse frame")
    }

    /// A 3-form on the horizontal subframe, `None` when that frame is a surface.
    fn transverse_3form(&self, beta: &FormTensor) -> Option<FormTensor> {
        (self.horizontal_dim() >= 3).then(|| self.transverse(beta))
    }

    /// `(F_V, F_JV)` on the horizontal subframe.
    pub fn principal_curvatures(&self) -> (FormTensor, FormTensor) {
        (self.transverse(&self.f_v), self.transverse(&self.f_jv))
    }

    /// Frame normalization and the basic `(1,1)` character of `F_V`, `F_JV`.
    pub fn structure_report(&self) -> Report {
        let g = self.model.metric();
        let j = self.model.j();
        let mut r = Report::new();
        r.push("frame.unit_V", g.inner_vectors(&self.v, &self.v) - 1.0);
        r.push("frame.unit_JV", g.inner_vectors(&self.jv, &self.jv) - 1.0);
        r.push("frame.orthogonal", g.inner_vectors(&self.v, &self.jv));
        let eta_v = self.eta.eval(&[&self.v]).expect("1-form");
        let eta_jv = self.eta.eval(&[&self.jv]).expect("1-form");
        let jeta_v = self.j_eta.eval(&[&self.v]).expect("1-form");
        let jeta_jv = self.j_eta.eval(&[&self.jv]).expect("1-form");
        r.push("frame.eta", (eta_v - 1.0).abs().max(eta_jv.abs()));
        r.push("frame.j_eta", (jeta_jv - 1.0).abs().max(jeta_v.abs()));
        for (name, f) in [("F_V", &self.f_v), ("F_JV", &self.f_jv)] {
            let iv = f.interior(&self.v).expect("shapes agree").sup_norm();
            let ijv = f.interior(&self.jv).expect("shapes agree").sup_norm();
            r.push(format!("basic.{name}.horizontal"), iv.max(ijv));
            let rotated = f.pullback(j).expect("shapes agree");
            r.push(format!("basic.{name}.type_11"), f.distance(&rotated).expect("shapes agree"));
        }
        r
    }

    /// `H - (H^T + JF_V∧η + JF_JV∧Jη)` and `H^T + d^cω^T`.
    pub fn torsion_split_residual(&self) -> Result<Report> {
        let j = self.model.j();
        let split =
            self.h_t.add(&self.f_v.j_action(j)?.wedge(&self.eta)?)?.add(&self.f_jv.j_action(j)?.wedge(&self.j_eta)?)?;
        let potential = d_c(self.model.algebra(), &self.omega_t, j)?;
        let mut r = Report::new();
        r.push("torsion.split", self.torsion.distance(&split)?);
        r.push("torsion.transverse_potential", self.h_t.add(&potential)?.sup_norm());
        Ok(r)
    }

    /// `tr_{ω^T} F_JV`.
    pub fn trace_f_jv(&self) -> Result<f64> {
        let gt = self.transverse_metric();
        omega_trace(&self.transverse(&self.f_jv), &self.transverse(&self.omega_t), &gt)
    }

    /// Conformally balanced transverse metric, traces of the principal
    /// curvatures, and the anomaly identity `dd^cω^T = F_V∧F_V + F_JV∧F_JV`.
    pub fn transverse_residuals(&self) -> Result<Report> {
        let gt = self.transverse_metric();
        let algebra = self.model.algebra();
        let omega_t = self.transverse(&self.omega_t);
        // invariant frame models only carry constant potentials, so df = 0
        let lee_t = match self.transverse_3form(&algebra.exterior_derivative(&self.omega_t)?) {
            Some(d_omega_t) => omega_contract(&d_omega_t, &omega_t, &gt)?.scale(0.5).sup_norm(),
            None => 0.0,
        };
        let ddc = algebra.exterior_derivative(&d_c(algebra, &self.omega_t, self.model.j())?)?;
        let anomaly = ddc.sub(&self.f_v.wedge(&self.f_v)?)?.sub(&self.f_jv.wedge(&self.f_jv)?)?;
        let mut r = Report::new();
        r.push("transverse.lee_form", lee_t);
        r.push("transverse.trace_F_V", omega_trace(&self.transverse(&self.f_v), &omega_t, &gt)?);
        r.push("transverse.trace_F_JV", self.trace_f_jv()? + 2.0);
        r.push("transverse.anomaly", anomaly.sup_norm());
        Ok(r)
    }

    /// Lowered horizontal brackets `<[e_i,e_j],e_k>` for the transverse metric.
    fn transverse_brackets(&self) -> Tensor {
        let h = self.horizontal_dim();
        let gt = self.transverse_metric();
        let algebra = self.model.algebra();
        Tensor::from_fn(h, 3, |i| (0..h).map(|m| algebra.c(i[0], i[1], m) * gt.matrix()[(m, i[2])]).sum())
    }

    /// Levi-Civita connection of `g^T` from the Koszul formula on projected brackets.
    pub fn transverse_christoffel(&self) -> Tensor {
        let l = self.transverse_brackets();
        Tensor::from_fn(self.horizontal_dim(), 3, |i| {
            let (a, b, c) = (i[0], i[1], i[2]);
            0.5 * (l.get(&[a, b, c]) - l.get(&[b, c, a]) + l.get(&[c, a, b]))
        })
    }

    /// Basic connection: transverse Levi-Civita along horizontal directions,
    /// `<[e_A, e_k], e_l>` along vertical ones; zero unless `k, l` are horizontal.
    pub fn transverse_connection(&self) -> ConnectionCoeffs {
        let n = self.dim();
        let h = self.horizontal_dim();
        let gamma_t = self.transverse_christoffel();
        let lowered = lowered_brackets(self.model.algebra(), self.model.metric());
        let w = Tensor::from_fn(n, 3, |i| {
            let (a, k, l) = (i[0], i[1], i[2]);
            if k >= h || l >= h {
                0.0
            } else if a < h {
                gamma_t.get(&[a, k, l])
            } else {
                lowered.get(&[a, k, l])
            }
        });
        ConnectionCoeffs::from_tensor(ConnectionKind::Transverse, w)
    }

    /// Curvature of the basic connection; horizontal entries are `R^{g^T}`.
    pub fn transverse_curvature(&self) -> CurvatureTensor {
        self.transverse_connection().curvature(self.model.algebra(), self.model.metric())
    }

    /// `Rc^{g^T}` on the horizontal subframe.
    pub fn transverse_ricci(&self) -> Mat {
        let h = self.horizontal_dim();
        let rt = self.transverse_curvature();
        let gi = self.transverse_metric().inverse().clone();
        Mat::from_fn(h, h, |y, z| {
            let mut s = 0.0;
            for a in 0..h {
                for d in 0..h {
                    s += gi[(a, d)] * rt.get(a, y, z, d);
                }
            }
            s
        })
    }

    /// `F²(X,Y) = <ι_X F_V, ι_Y F_V> + <ι_X F_JV, ι_Y F_JV>` on the horizontal subframe.
    pub fn f_squared(&self) -> Mat {
        let gt = self.transverse_metric();
        let gi = gt.inverse();
        let fv = self.transverse(&self.f_v).to_matrix().expect("2-form");
        let fjv = self.transverse(&self.f_jv).to_matrix().expect("2-form");
        &fv * gi * fv.transpose() + &fjv * gi * fjv.transpose()
    }

    /// `⅙|H^T|² + ½|F|²` computed on the transverse frame.
    pub fn dilaton(&self) -> Result<f64> {
        let gt = self.transverse_metric();
        let (fv, fjv) = self.principal_curvatures();
        let h_t_norm = match self.transverse_3form(&self.h_t) {
            Some(h_t) => norm_sq(&h_t, &gt)?,
            None => 0.0,
        };
        Ok(h_t_norm / 6.0 + 0.5 * (norm_sq(&fv, &gt)? + norm_sq(&fjv, &gt)?))
    }

    /// A form of the adapted frame expressed in the source frame.
    fn to_source(&self, beta: &FormTensor) -> Result<FormTensor> {
        let inv = self.frame.clone().try_inverse().ok_or_else(|| Error::Singular("adapted frame".into()))?;
        beta.pullback(&inv)
    }

    /// The transverse Einstein-Maxwell system for constant potential,
    /// closedness and twisted co-closedness of `F_V`, `F_JV`, and the norm
    /// identities tying `H`, `H^T` and `F` together.
    pub fn einstein_maxwell_residual(&self) -> Result<Report> {
        let h = self.horizontal_dim();
        let metric = self.model.metric();
        let gt = self.transverse_metric();
        let algebra = self.model.algebra();
        let w = self.transverse_connection();
        let h_t = self.transverse_3form(&self.h_t);

        let h_sq = match &h_t {
            Some(h_t) => geometry::h_squared(h_t, &gt),
            None => Mat::zeros(h, h),
        };
        let symmetric = self.transverse_ricci() - h_sq * 0.25 - self.f_squared();
        let skew = self.transverse(&geometry::codifferential_with(&self.h_t, &w, metric)).scale(0.5);

        let mut r = Report::new();
        r.push("einstein_maxwell.symmetric", crate::linalg::sup_norm(&symmetric));
        r.push("einstein_maxwell.skew", skew.sup_norm());
        for (name, f) in [("F_V", &self.f_v), ("F_JV", &self.f_jv)] {
            r.push(format!("einstein_maxwell.closed_{name}"), algebra.exterior_derivative(f)?.sup_norm());
            let dstar = self.transverse(&geometry::codifferential_with(f, &w, metric)).to_vector()?;
            let ft = self.transverse(f);
            let mut worst = 0.0f64;
            for (x, ds) in dstar.iter().enumerate().take(h) {
                let mut e = vec![0.0; h];
                e[x] = 1.0;
                let twist = match &h_t {
                    Some(h_t) => inner(&h_t.interior(&e)?, &ft, &gt)?,
                    None => 0.0,
                };
                worst = worst.max((ds - 0.5 * twist).abs());
            }
            r.push(format!("einstein_maxwell.coclosed_{name}"), worst);
        }

        let source_metric = self.source.metric();
        let in_source = dilaton(
            &self.to_source(&self.h_t)?,
            &self.to_source(&self.f_v)?,
            &self.to_source(&self.f_jv)?,
            source_metric,
        )?;
        r.push("einstein_maxwell.dilaton_frame_variance", self.dilaton()? - in_source);

        let split = norm_sq(&self.torsion, metric)?
            - h_t.as_ref().map_or(Ok(0.0), |h_t| norm_sq(h_t, &gt))?
            - 3.0 * (norm_sq(&self.f_v, metric)? + norm_sq(&self.f_jv, metric)?);
        r.push("einstein_maxwell.norm_split", split);
        r.push("einstein_maxwell.torsion_norm_identity", geometry::torsion_norm_identity(&self.model)?);
        Ok(r)
    }

    /// Norms that must not depend on the frame: adapted versus source frame.
    pub fn frame_invariance(&self) -> Result<Report> {
        let src = self.source.metric();
        let gt = self.transverse_metric();
        let mut r = Report::new();
        for (name, f) in [("F_V", &self.f_v), ("F_JV", &self.f_jv)] {
            r.push(
                format!("frame.norm_{name}"),
                norm_sq(&self.transverse(f), &gt)? - norm_sq(&self.to_source(f)?, src)?,
            );
        }
        let theta_adapted = norm_sq(&geometry::lee_form(&self.model)?, self.model.metric())?;
        let theta_source = norm_sq(&geometry::lee_form(&self.source)?, src)?;
        r.push("frame.norm_theta", theta_adapted - theta_source);
        let v_source = geometry::lee_vector(&self.source)?;
        let jv_source = self.source.apply_j(&v_source);
        r.push(
            "frame.g_V_JV",
            self.model.metric().inner_vectors(&self.v, &self.jv) - src.inner_vectors(&v_source, &jv_source),
        );
        Ok(r)
    }

    /// Component identities for the Christoffel symbols, Bismut and Riemann
    /// curvature and `∇H` in the adapted frame, each side computed separately.
    pub fn component_identities(&self) -> Result<Report> {
        let n = self.dim();
        let h = self.horizontal_dim();
        let (al, be) = (h, h + 1);
        let m = &self.model;
        let metric = m.metric();
        let gi = self.transverse_metric().inverse().clone();
        let algebra = m.algebra();

        let lc = ConnectionCoeffs::levi_civita(algebra, metric);
        let bismut = geometry::bismut_connection(m);
        let w = self.transverse_connection();
        let rg = lc.curvature(algebra, metric);
        let rb = bismut.curvature(algebra, metric);
        let rt = w.curvature(algebra, metric);
        let gamma_t = self.transverse_christoffel();
        let lowered = lowered_brackets(algebra, metric);
        let h_t = self.h_t.to_tensor();
        let nabla_h = lc.covariant_derivative(&self.torsion.to_tensor(), metric);
        let nabla_t_ht = w.covariant_derivative(&h_t, metric);

        let fa = self.f_v.to_tensor();
        let fb = self.f_jv.to_tensor();
        let fs = [(al, &fa), (be, &fb)];
        let f_of = |a: usize| if a == al { &fa } else { &fb };
        let nabla_b_f: Vec<Tensor> = fs.iter().map(|(_, f)| bismut.covariant_derivative(f, metric)).collect();
        let nabla_t_f: Vec<Tensor> = fs.iter().map(|(_, f)| w.covariant_derivative(f, metric)).collect();
        let slot = |a: usize| if a == al { 0 } else { 1 };
        // Σ_{k,l} X_{ik} g^{kl} Y_{jl} over horizontal k, l
        let contract = |x: &Tensor, y: &Tensor, i: usize, j: usize| -> f64 {
            let mut s = 0.0;
            for k in 0..h {
                for l in 0..h {
                    s += x.get(&[i, k]) * gi[(k, l)] * y.get(&[j, l]);
                }
            }
            s
        };
        let verticals = [al, be];

        let mut r = Report::new();

        r.push("christoffel.lc_horizontal", sup_over(h, 3, |i| lc.get(i[0], i[1], i[2]) - gamma_t.get(i)));
        let mut mixed = 0.0f64;
        let mut bis_vert = 0.0f64;
        for &a in &verticals {
            let f = f_of(a);
            mixed = mixed
                .max(sup_over(h, 2, |i| lc.get(i[0], i[1], a) + 0.5 * f.get(i)))
                .max(sup_over(h, 2, |i| lc.get(i[0], a, i[1]) - 0.5 * f.get(i)))
                .max(sup_over(h, 2, |i| lc.get(a, i[0], i[1]) - lowered.get(&[a, i[0], i[1]]) - 0.5 * f.get(i)));
            bis_vert =
                bis_vert.max(sup_over(h, 2, |i| bismut.get(a, i[0], i[1]) - lowered.get(&[a, i[0], i[1]]) - f.get(i)));
        }
        r.push("christoffel.lc_mixed", mixed);
        r.push(
            "christoffel.bismut_horizontal",
            sup_over(h, 3, |i| bismut.get(i[0], i[1], i[2]) - gamma_t.get(i) - 0.5 * h_t.get(i)),
        );
        r.push("christoffel.bismut_vertical", bis_vert);

        // H^T_{jkm} g^{mp} H^T_{ipl}
        let hh = |j: usize, k: usize, i: usize, l: usize| -> f64 {
            let mut s = 0.0;
            for mm in 0..h {
                for p in 0..h {
                    s += h_t.get(&[j, k, mm]) * gi[(mm, p)] * h_t.get(&[i, p, l]);
                }
            }
            s
        };
        r.push(
            "bismut_curvature.horizontal",
            sup_over(h, 4, |x| {
                let (i, j, k, l) = (x[0], x[1], x[2], x[3]);
                let rhs = rt.get(i, j, k, l)
                    + fa.get(&[i, j]) * fa.get(&[k, l])
                    + fb.get(&[i, j]) * fb.get(&[k, l])
                    + 0.5
                        * (nabla_t_ht.get(&[i, j, k, l]) - nabla_t_ht.get(&[j, i, k, l]) + 0.5 * hh(j, k, i, l)
                            - 0.5 * hh(i, k, j, l));
                rb.get(i, j, k, l) - rhs
            }),
        );
        r.push(
            "bismut_curvature.vertical",
            sup_over(h, 2, |x| {
                let (i, j) = (x[0], x[1]);
                rb.get(al, be, i, j) - (contract(&fa, &fb, i, j) - contract(&fb, &fa, i, j))
            }),
        );
        let mut bis_mixed = 0.0f64;
        for &a in &verticals {
            let nf = &nabla_b_f[slot(a)];
            bis_mixed = bis_mixed.max(sup_over(h, 3, |x| rb.get(a, x[0], x[1], x[2]) + nf.get(x)));
        }
        r.push("bismut_curvature.mixed", bis_mixed);

        let mut dh_horizontal = 0.0f64;
        for &a in &verticals {
            let nf = &nabla_t_f[slot(a)];
            dh_horizontal = dh_horizontal.max(sup_over(h, 3, |x| nabla_h.get(&[x[0], a, x[1], x[2]]) - nf.get(x)));
        }
        r.push("torsion_derivative.horizontal", dh_horizontal);
        r.push(
            "torsion_derivative.vertical_pair",
            sup_over(h, 2, |x| nabla_h.get(&[x[0], al, be, x[1]]) + 0.5 * rb.get(al, be, x[0], x[1])),
        );
        let vd = sup_over(h, 2, |x| nabla_h.get(&[al, be, x[0], x[1]]) - 0.5 * rb.get(al, be, x[0], x[1]))
            .max(sup_over(h, 2, |x| nabla_h.get(&[be, al, x[0], x[1]]) + 0.5 * rb.get(al, be, x[0], x[1])));
        r.push("torsion_derivative.vertical_direction", vd);

        let mut riem_mixed = 0.0f64;
        for &a in &verticals {
            let nf = &nabla_t_f[slot(a)];
            riem_mixed = riem_mixed
                .max(sup_over(h, 3, |x| rg.get(a, x[0], x[1], x[2]) - 0.5 * rb.get(a, x[0], x[1], x[2])))
                .max(sup_over(h, 3, |x| rg.get(a, x[0], x[1], x[2]) + 0.5 * nf.get(x)));
        }
        r.push("riemann.mixed", riem_mixed);
        r.push("riemann.vertical", sup_over(h, 2, |x| rg.get(al, be, x[0], x[1]) - 0.25 * rb.get(al, be, x[0], x[1])));
        r.push("riemann.cross", sup_over(h, 2, |x| rg.get(al, x[0], x[1], be) - 0.25 * contract(&fa, &fb, x[1], x[0])));
        r.push("riemann.vertical_vanishing", sup_over(h, 2, |x| rg.get(al, be, x[0], x[1])));

        if n == 6 {
            let gt = self.transverse_metric();
            let alpha = self.transverse(&self.f_v);
            let f_jv = self.transverse(&self.f_jv);
            let gamma = f_jv.add(&self.transverse(&self.omega_t).scale(0.5))?;
            let (a2, g2) = (norm_sq(&alpha, &gt)?, norm_sq(&gamma, &gt)?);
            r.push("principal_norms.sum", a2 + g2 - 1.0);
            r.push("principal_norms.F_JV", norm_sq(&f_jv, &gt)? - 1.0 - g2);
        } else {
            r.note(format!("principal norm identities need a 4-dimensional transverse frame (dimension {n})"));
        }
        Ok(r)
    }

    /// Every reduction check in one report.
    pub fn full_report(&self) -> Result<Report> {
        let mut r = Report::new();
        r.merge("", &self.structure_report());
        r.merge("", &self.torsion_split_residual()?);
        r.merge("", &self.transverse_residuals()?);
        r.merge("", &self.einstein_maxwell_residual()?);
        r.merge("", &self.frame_invariance()?);
        r.merge("", &self.component_identities()?);
        Ok(r)
    }
}

/// An isotropy generator of a homogeneous transverse geometry: it appears in
/// horizontal brackets as `Ω(x,y)` and acts on horizontal vectors by `D`.
#[derive(Debug, Clone, PartialEq)]
pub struct Isotropy {
    pub omega: FormTensor,
    pub derivation: Mat,
}

/// Surface factors for [`TransverseFrame::sphere_product`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SurfaceFactor {
    /// Round sphere of constant Gauss curvature.
    Round {
        curvature: f64,
    },
    Flat,
}

/// Frame data of a homogeneous transverse Hermitian geometry:
/// `[x, y] = t(x, y) + Σ_m Ω_m(x, y) k_m` and `[k_m, x] = D_m x`.
#[derive(Debug, Clone, PartialEq)]
pub struct TransverseFrame {
    metric: MetricFrame,
    j: Mat,
    brackets: Tensor,
    isotropy: Vec<Isotropy>,
}

impl TransverseFrame {
    pub fn new(metric: MetricFrame, j: Mat, brackets: Tensor, isotropy: Vec<Isotropy>) -> Result<Self> {
        let h = metric.dim();
        if j.nrows() != h || j.ncols() != h {
            return Err(Error::DimensionMismatch { expected: h, found: j.nrows() });
        }
        if brackets.dim() != h || brackets.rank() != 3 {
            return Err(Error::DimensionMismatch { expected: h, found: brackets.dim() });
        }
        for iso in &isotropy {
            iso.omega.expect_degree(2)?;
            if iso.omega.dim() != h {
                return Err(Error::DimensionMismatch { expected: h, found: iso.omega.dim() });
            }
            if iso.derivation.nrows() != h || iso.derivation.ncols() != h {
                return Err(Error::DimensionMismatch { expected: h, found: iso.derivation.nrows() });
            }
        }
        let jj = crate::forms::almost_complex_residual(&j);
        if jj > crate::hermitian::STRUCTURE_TOLERANCE {
            return Err(Error::NotAlmostComplex(jj));
        }
        let compat = sup_distance(&(j.transpose() * metric.matrix() * &j), metric.matrix());
        if compat > crate::hermitian::STRUCTURE_TOLERANCE {
            return Err(Error::NotCompatible(compat));
        }
        Ok(Self { metric, j, brackets, isotropy })
    }

    /// A Lie algebra transverse model with no isotropy.
    pub fn from_model(m: &HermitianModel) -> Self {
        Self {
            metric: m.metric().clone(),
            j: m.j().clone(),
            brackets: m.algebra().constants().clone(),
            isotropy: Vec::new(),
        }
    }

    /// Product of two surfaces in the orthonormal frame `(x_1, y_1, x_2, y_2)`
    /// with `Jx_i = y_i`; a round factor of curvature `κ` contributes
    /// `Ω = κ x^i∧y^i` and `D = J` on that factor.
    pub fn sphere_product(factors: [SurfaceFactor; 2]) -> Result<Self> {
        let j = crate::catalog::paired_j(4, &[(0, 1), (2, 3)]);
        let mut isotropy = Vec::new();
        for (i, factor) in factors.iter().enumerate() {
            if let SurfaceFactor::Round { curvature } = *factor {
                if !(curvature > 0.0) || !curvature.is_finite() {
                    return Err(Error::InvalidProfile(format!("sphere curvature must be positive, got {curvature}")));
                }
                let (x, y) = (2 * i, 2 * i + 1);
                let omega = FormTensor::basis(4, &[x, y])?.scale(curvature);
                let mut derivation = Mat::zeros(4, 4);
                derivation[(y, x)] = 1.0;
                derivation[(x, y)] = -1.0;
                isotropy.push(Isotropy { omega, derivation });
            }
        }
        Self::new(MetricFrame::identity(4)?, j, Tensor::zeros(4, 3), isotropy)
    }

    pub fn dim(&self) -> usize {
        self.metric.dim()
    }

    pub fn metric(&self) -> &MetricFrame {
        &self.metric
    }

    pub fn j(&self) -> &Mat {
        &self.j
    }

    pub fn isotropy(&self) -> &[Isotropy] {
        &self.isotropy
    }

    /// Kähler form `ω^T = g(J·,·)` of the transverse frame.
    pub fn omega(&self) -> FormTensor {
        let w = self.j.transpose() * self.metric.matrix();
        FormTensor::from_antisymmetric(&((&w - w.transpose()) * 0.5)).expect("antisymmetric")
    }
}

/// Builds the total space with vertical frame `V, JV` over transverse data:
/// `[x, y] = t(x, y) - F_V(x,y) V - F_JV(x,y) JV`, `[V, x] = D_V x`, `[JV, x] = D_JV x`,
/// where the vertical derivations realize the transverse isotropy.
pub fn assemble(t: &TransverseFrame, f_v: &FormTensor, f_jv: &FormTensor, f: f64) -> Result<HermitianModel> {
    let h = t.dim();
    let n = h + 2;
    let fs = [f_v, f_jv];
    for form in fs {
        form.expect_degree(2)?;
        if form.dim() != h {
            return Err(Error::DimensionMismatch { expected: h, found: form.dim() });
        }
        let rotated = form.pullback(&t.j)?;
        let res = form.distance(&rotated)?;
        if res > BASIC_TOLERANCE * form.sup_norm().max(1.0) {
            return Err(Error::NotBasic(res));
        }
    }

    // Σ_m Ω_m b_mA = -F_A in the least-squares sense; D_A = Σ_m b⁺_Am D_m.
    let pairs: Vec<(usize, usize)> = (0..h).flat_map(|i| (i + 1..h).map(move |j| (i, j))).collect();
    let iso = &t.isotropy;
    let derivations: Vec<Mat> = if iso.is_empty() {
        vec![Mat::zeros(h, h); 2]
    } else {
        let omat = Mat::from_fn(pairs.len(), iso.len(), |p, m| iso[m].omega.get(&[pairs[p].0, pairs[p].1]));
        let rhs = Mat::from_fn(pairs.len(), 2, |p, a| -fs[a].get(&[pairs[p].0, pairs[p].1]));
        let opinv = omat.svd(true, true).pseudo_inverse(1e-12).map_err(|e| Error::Singular(e.into()))?;
        let b = opinv * rhs;
        let bpinv = b.clone().svd(true, true).pseudo_inverse(1e-12).map_err(|e| Error::Singular(e.into()))?;
        let ident = &b * &bpinv;
        let res = sup_distance(&ident, &Mat::identity(iso.len(), iso.len()));
        if res > 1e-12 {
            return Err(Error::UnrealizableCurvature(res));
        }
        (0..2)
            .map(|a| iso.iter().enumerate().fold(Mat::zeros(h, h), |acc, (m, s)| acc + &s.derivation * bpinv[(a, m)]))
            .collect()
    };

    let mut c = Tensor::zeros(n, 3);
    for i in 0..h {
        for j in 0..h {
            for k in 0..h {
                c.set(&[i, j, k], t.brackets.get(&[i, j, k]));
            }
            for (a, form) in fs.iter().enumerate() {
                c.set(&[i, j, h + a], -form.get(&[i, j]));
            }
        }
    }
    for (a, d) in derivations.iter().enumerate() {
        for x in 0..h {
            for k in 0..h {
                c.set(&[h + a, x, k], d[(k, x)]);
                c.set(&[x, h + a, k], -d[(k, x)]);
            }
        }
    }
    let algebra = StructureAlgebra::new(c)?;
    let mut g = Mat::identity(n, n);
    g.view_mut((0, 0), (h, h)).copy_from(t.metric.matrix());
    let mut j = Mat::zeros(n, n);
    j.view_mut((0, 0), (h, h)).copy_from(&t.j);
    j[(h + 1, h)] = 1.0;
    j[(h, h + 1)] = -1.0;
    HermitianModel::new("assembled", algebra, MetricFrame::new(g)?, j, f)
}

/// The same model in an orthonormal frame, `B = L^{-T}` for `g = LLᵀ`.
pub fn orthonormal_frame(m: &HermitianModel) -> Result<HermitianModel> {
    let chol = m.metric().matrix().clone().cholesky().ok_or(Error::NotPositiveDefinite { asymmetry: 0.0 })?;
    let b = chol.l().transpose().try_inverse().ok_or_else(|| Error::Singular("Cholesky factor".into()))?;
    m.change_frame(&b)
}

/// Basis-free invariants used to compare models up to frame isomorphism.
#[derive(Debug, Clone, PartialEq)]
pub struct CurvatureFingerprint {
    /// Sorted spectrum of the Levi-Civita curvature operator on 2-vectors.
    pub operator: Vec<f64>,
    /// Sorted Ricci eigenvalues in an orthonormal frame.
    pub ricci: Vec<f64>,
    pub torsion_norm: f64,
    pub lee_norm: f64,
}

impl CurvatureFingerprint {
    pub fn of(m: &HermitianModel) -> Result<Self> {
        let on = orthonormal_frame(m)?;
        let r = geometry::levi_civita_curvature(&on);
        Ok(Self {
            operator: sorted_symmetric_eigenvalues(&r.operator_matrix()),
            ricci: sorted_symmetric_eigenvalues(&r.ricci(on.metric())),
            torsion_norm: norm_sq(&geometry::bismut_torsion(&on), on.metric())?,
            lee_norm: norm_sq(&geometry::lee_form_trace(&on), on.metric())?,
        })
    }

    /// Sup distance between all entries; infinite if dimensions differ.
    pub fn distance(&self, other: &Self) -> f64 {
        if self.operator.len() != other.operator.len() || self.ricci.len() != other.ricci.len() {
            return f64::INFINITY;
        }
        let diff = |a: &[f64], b: &[f64]| vec_sup(&a.iter().zip(b).map(|(x, y)| x - y).collect::<Vec<_>>());
        diff(&self.operator, &other.operator)
            .max(diff(&self.ricci, &other.ricci))
            .max((self.torsion_norm - other.torsion_norm).abs())
            .max((self.lee_norm - other.lee_norm).abs())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;

    fn eigen(m: &Mat) -> Vec<f64> {
        sorted_symmetric_eigenvalues(&((m + m.transpose()) * 0.5))
    }

    #[test]
    fn su2xsu2_lee_field_is_anti_diagonal() {
        let m = catalog::su2xsu2();
        let d = reduce(&m).unwrap();
        // V in source coordinates lies in span(e_2, e_5) with opposite coefficients
        let v = d.frame().column(4);
        assert!(v[0].abs() + v[1].abs() + v[3].abs() + v[4].abs() < 1e-14);
        assert!((v[2] + v[5]).abs() < 1e-14 || (v[2] - v[5]).abs() < 1e-14);
        assert!(v[2].abs() > 0.1);
        assert!(d.structure_report().passes(1e-14));
        assert!((d.scale() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn unnormalized_input_is_rescaled() {
        let m = catalog::su2xsu2().rescale(3.0).unwrap();
        let d = reduce(&m).unwrap();
        assert!((d.scale() - 1.0 / 3.0).abs() < 1e-14);
        assert!(d.structure_report().passes(1e-13));
    }

    #[test]
    fn kahler_model_has_no_lee_field() {
        assert!(matches!(reduce(&catalog::flat()), Err(Error::VanishingLeeField(_))));
    }

    #[test]
    fn non_bhe_model_is_rejected() {
        let s = Mat::from_fn(6, 6, |i, j| ((i * 3 + j * 5) % 7) as f64 / 7.0);
        let m = catalog::perturb_metric(&catalog::su2xsu2(), &s, 1e-2).unwrap();
        assert!(matches!(reduce(&m), Err(Error::NotBhe(_))));
        assert!(reduce_unchecked(&m).is_ok());
    }

    #[test]
    fn su2xrxc_has_vanishing_f_v() {
        let d = reduce(&catalog::su2xrxc()).unwrap();
        assert!(d.f_v().sup_norm() < 1e-14);
        assert!(d.f_jv().sup_norm() > 0.5);
        let ev = eigen(&d.transverse_ricci());
        let expect = [0.0, 0.0, 1.0, 1.0];
        for (a, b) in ev.iter().zip(expect) {
            assert!((a - b).abs() < 1e-13, "{ev:?}");
        }
    }

    #[test]
    fn su2xsu2_transverse_structure() {
        let d = reduce(&catalog::su2xsu2()).unwrap();
        let ev = eigen(&d.transverse_ricci());
        for x in &ev {
            assert!((x - 0.5).abs() < 1e-13, "{ev:?}");
        }
        assert!((d.trace_f_jv().unwrap() + 2.0).abs() < 1e-14);
        // F_V = ±½(ω_1 - ω_2), F_JV = -½(ω_1 + ω_2) on the horizontal pairs
        let (fv, fjv) = d.principal_curvatures();
        assert!((fv.get(&[0, 1]).abs() - 0.5).abs() < 1e-14);
        assert!((fv.get(&[0, 1]) + fv.get(&[2, 3])).abs() < 1e-14);
        assert!((fjv.get(&[0, 1]) + 0.5).abs() < 1e-14);
        assert!((fjv.get(&[2, 3]) + 0.5).abs() < 1e-14);
        assert!(d.h_t().sup_norm() < 1e-14);
    }

    #[test]
    fn reduction_suites_pass_on_catalog() {
        for m in [catalog::su2xsu2(), catalog::su2xrxc()] {
            let d = reduce(&m).unwrap();
            let r = d.full_report().unwrap();
            let bad: Vec<_> = r.failing(1e-12).collect();
            assert!(bad.is_empty(), "{}: {bad:?}", m.name());
        }
    }

    #[test]
    fn hopf_reduces_with_two_dimensional_transverse_frame() {
        let d = reduce(&catalog::hopf()).unwrap();
        assert_eq!(d.horizontal_dim(), 2);
        let mut r = d.torsion_split_residual().unwrap();
        r.merge("", &d.transverse_residuals().unwrap());
        r.merge("", &d.einstein_maxwell_residual().unwrap());
        assert!(r.passes(1e-12), "{r:?}");
    }

    #[test]
    fn suites_are_frame_independent() {
        let b = Mat::from_fn(6, 6, |i, j| if i == j { 1.3 } else { 0.07 * ((i * 5 + j * 3) % 4) as f64 });
        let m = catalog::su2xsu2().change_frame(&b).unwrap();
        let d = reduce(&m).unwrap();
        let r = d.full_report().unwrap();
        let bad: Vec<_> = r.failing(1e-11).collect();
        assert!(bad.is_empty(), "{bad:?}");
    }

    #[test]
    fn perturbed_control_reports_vertical_curvature() {
        let s = Mat::from_fn(6, 6, |i, j| if i == j { 1.0 } else { 0.3 * ((i + 2 * j) % 3) as f64 });
        let m = catalog::perturb_metric(&catalog::su2xsu2(), &s, 0.2).unwrap();
        let d = reduce_unchecked(&m).unwrap();
        let r = d.component_identities().unwrap();
        assert!(r.max_residual() > 1e-4, "{r:?}");
    }

    #[test]
    fn assemble_two_spheres_reproduces_su2xsu2() {
        let catalog_model = catalog::su2xsu2();
        let d = reduce(&catalog_model).unwrap();
        let (fv, fjv) = d.principal_curvatures();
        let t = TransverseFrame::sphere_product([SurfaceFactor::Round { curvature: 0.5 }; 2]).unwrap();
        let m = assemble(&t, &fv, &fjv, 0.0).unwrap();
        assert!(geometry::bhe_residual(&m) < 1e-12);
        let dist = CurvatureFingerprint::of(&m).unwrap().distance(&CurvatureFingerprint::of(&catalog_model).unwrap());
        assert!(dist < 1e-10, "{dist}");
        let back = reduce(&m).unwrap();
        let (fv2, fjv2) = back.principal_curvatures();
        assert!(fv2.distance(&fv).unwrap() < 1e-12);
        assert!(fjv2.distance(&fjv).unwrap() < 1e-12);
    }

    #[test]
    fn assemble_sphere_and_plane_reproduces_su2xrxc() {
        let t =
            TransverseFrame::sphere_product([SurfaceFactor::Round { curvature: 1.0 }, SurfaceFactor::Flat]).unwrap();
        let fv = FormTensor::zero(4, 2).unwrap();
        let fjv = FormTensor::basis(4, &[0, 1]).unwrap().scale(-1.0);
        let m = assemble(&t, &fv, &fjv, 0.0).unwrap();
        assert!(geometry::bhe_residual(&m) < 1e-12);
        let dist =
            CurvatureFingerprint::of(&m).unwrap().distance(&CurvatureFingerprint::of(&catalog::su2xrxc()).unwrap());
        assert!(dist < 1e-10, "{dist}");
    }

    #[test]
    fn assemble_flat_data_is_abelian_kahler() {
        let flat = HermitianModel::new(
            "plane",
            StructureAlgebra::abelian(4),
            MetricFrame::identity(4).unwrap(),
            catalog::paired_j(4, &[(0, 1), (2, 3)]),
            0.0,
        )
        .unwrap();
        let z = FormTensor::zero(4, 2).unwrap();
        let m = assemble(&TransverseFrame::from_model(&flat), &z, &z, 0.0).unwrap();
        assert_eq!(m.algebra().constants().sup_norm(), 0.0);
        assert_eq!(geometry::bismut_torsion(&m).sup_norm(), 0.0);
    }

    #[test]
    fn non_11_curvature_is_rejected() {
        let t = TransverseFrame::sphere_product([SurfaceFactor::Round { curvature: 0.5 }; 2]).unwrap();
        let bad = FormTensor::basis(4, &[0, 2]).unwrap();
        let z = FormTensor::zero(4, 2).unwrap();
        assert!(matches!(assemble(&t, &bad, &z, 0.0), Err(Error::NotBasic(_))));
    }

    #[test]
    fn sphere_without_vertical_rotation_is_unrealizable() {
        let t =
            TransverseFrame::sphere_product([SurfaceFactor::Round { curvature: 1.0 }, SurfaceFactor::Flat]).unwrap();
        let z = FormTensor::zero(4, 2).unwrap();
        assert!(matches!(assemble(&t, &z, &z, 0.0), Err(Error::UnrealizableCurvature(_))));
    }
}
