//! The `verify`, `reduce`, `pde` and `converge` runs. Each writes its
//! artifacts into an output directory and returns an exit status.

use std::path::{Path, PathBuf};

use serde_json::{json, Map, Value};

use bhe_core::convergence::{manufactured_study, residual_study, ConvergenceStudy, ManufacturedProfile};
use bhe_core::forms::FormTensor;
use bhe_core::geometry::{bhe_residual, bismut_flat_report, identity_report, lee_vector};
use bhe_core::hermitian::HermitianModel;
use bhe_core::linalg::{sorted_symmetric_eigenvalues, Mat};
use bhe_core::reduction::{reduce, ReductionData, BHE_TOLERANCE, VANISHING_TOLERANCE};
use bhe_core::solver::newton_solve;
use bhe_core::toric::{
    forward_map, gauss_curvature, pde_residual, topo_invariants, FactorKind, ProductSurface, SphereProfile,
};
use bhe_core::{Error, Report};

use crate::config::SurfaceConfig;
use crate::error::CliError;
use crate::format::{cell, float, num, num_array, to_csv, to_json};
use crate::io::write_atomic;
use crate::models::lookup;

/// Default tolerance of `verify` and `reduce`.
pub const DEFAULT_TOLERANCE: f64 = 1e-10;

/// Smallest observed order accepted by `converge`.
pub const MIN_ORDER: f64 = 1.9;

pub const KAEHLER_NOTE: &str = "V vanishes: Kaehler Calabi-Yau, reduction suite skipped";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Pass,
    /// A residual exceeded its tolerance.
    Fail,
    /// The input was rejected.
    Invalid,
}

impl Status {
    pub fn code(self) -> i32 {
        match self {
            Status::Pass => 0,
            Status::Fail => 1,
            Status::Invalid => 2,
        }
    }

    fn from_pass(pass: bool) -> Self {
        if pass {
            Status::Pass
        } else {
            Status::Fail
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub status: Status,
    pub files: Vec<PathBuf>,
}

/// `{"model", "tolerance", "checks": [{"name", "residual", "pass"}], "pass", "notes"}`.
pub fn report_json(model: &str, tolerance: f64, report: &Report, pass: bool) -> Value {
    let checks: Vec<Value> = report
        .checks()
        .iter()
        .map(|c| json!({"name": c.name, "residual": num(c.residual), "pass": c.passes(tolerance)}))
        .collect();
    json!({
        "model": model,
        "tolerance": num(tolerance),
        "checks": checks,
        "pass": pass,
        "notes": report.notes(),
    })
}

fn write_report(out: &Path, model: &str, tolerance: f64, report: &Report, pass: bool) -> Result<PathBuf, CliError> {
    write_atomic(out, "report.json", &to_json(&report_json(model, tolerance, report, pass))?)
}

/// Identity, Bismut-flatness and (when applicable) reduction checks of a model.
pub fn verify_report(m: &HermitianModel) -> Result<Report, CliError> {
    let mut r = Report::new();
    let bhe = bhe_residual(m);
    r.push("bhe.rho_B", bhe);
    r.merge("identity", &identity_report(m)?);
    r.merge("bismut_flat", &bismut_flat_report(m)?);
    let v = lee_vector(m)?;
    let len = m.metric().inner_vectors(&v, &v).sqrt();
    if len <= VANISHING_TOLERANCE {
        r.note(KAEHLER_NOTE);
    } else if bhe <= BHE_TOLERANCE {
        r.merge("reduction", &reduce(m)?.full_report()?);
    } else {
        r.note(format!("not Bismut-Hermitian-Einstein (|rho_B| = {bhe:e}), reduction suite skipped"));
    }
    Ok(r)
}

pub fn run_verify(model: &str, tolerance: f64, out: &Path) -> Result<Outcome, CliError> {
    let m = lookup(model)?;
    let report = verify_report(&m)?;
    let pass = report.passes(tolerance);
    let file = write_report(out, model, tolerance, &report, pass)?;
    Ok(Outcome { status: Status::from_pass(pass), files: vec![file] })
}

fn mat_json(m: &Mat) -> Value {
    Value::Array((0..m.nrows()).map(|i| num_array(&m.row(i).iter().copied().collect::<Vec<_>>())).collect())
}

/// Nonzero components `{"indices", "value"}` with increasing indices.
pub fn form_json(f: &FormTensor) -> Value {
    let components: Vec<Value> = f
        .components()
        .filter(|(_, v)| *v != 0.0)
        .map(|(mask, v)| {
            let idx: Vec<usize> = (0..f.dim()).filter(|k| mask & (1 << k) != 0).collect();
            json!({"indices": idx, "value": num(v)})
        })
        .collect();
    json!({"dim": f.dim(), "degree": f.degree(), "components": components})
}

/// Every field of the reduction, in the adapted frame.
pub fn reduction_json(d: &ReductionData) -> Result<Value, CliError> {
    let mut o = Map::new();
    o.insert("model".into(), json!(d.name()));
    o.insert("dim".into(), json!(d.dim()));
    o.insert("horizontal_dim".into(), json!(d.horizontal_dim()));
    o.insert("scale".into(), num(d.scale()));
    o.insert("frame".into(), mat_json(d.frame()));
    o.insert("V".into(), num_array(d.v()));
    o.insert("JV".into(), num_array(d.jv()));
    o.insert("eta".into(), form_json(d.eta()));
    o.insert("J_eta".into(), form_json(d.j_eta()));
    o.insert("F_V".into(), form_json(d.f_v()));
    o.insert("F_JV".into(), form_json(d.f_jv()));
    o.insert("omega_T".into(), form_json(d.omega_t()));
    o.insert("omega_V".into(), form_json(d.omega_v()));
    o.insert("H".into(), form_json(d.torsion()));
    o.insert("H_T".into(), form_json(d.h_t()));
    o.insert("g_T".into(), mat_json(d.g_t()));
    o.insert("potential".into(), num(d.potential()));
    o.insert("dilaton".into(), num(d.dilaton()?));
    o.insert("transverse_ricci_spectrum".into(), num_array(&sorted_symmetric_eigenvalues(&d.transverse_ricci())));
    Ok(Value::Object(o))
}

pub fn run_reduce(model: &str, tolerance: f64, out: &Path) -> Result<Outcome, CliError> {
    let m = lookup(model)?;
    let data = reduce(&m)?;
    let report = data.full_report()?;
    let pass = report.passes(tolerance);
    let a = write_atomic(out, "reduction.json", &to_json(&reduction_json(&data)?)?)?;
    let b = write_report(out, model, tolerance, &report, pass)?;
    Ok(Outcome { status: Status::from_pass(pass), files: vec![a, b] })
}

fn surface_label(cfg: &SurfaceConfig) -> String {
    let part = |f: &crate::config::FactorConfig| match *f {
        crate::config::FactorConfig::Sphere { c } => format!("sphere({c})"),
        crate::config::FactorConfig::FlatTorus { c, theta } => format!("flat-torus({c},{theta})"),
    };
    format!("{}x{}, a={}", part(&cfg.factors[0]), part(&cfg.factors[1]), cfg.a)
}

/// Builds the configured surface, or writes the topology report and returns
/// `Err(outcome)` when the class data are inconsistent.
fn build_surface(cfg: &SurfaceConfig, n: usize, out: &Path) -> Result<Result<ProductSurface, Outcome>, CliError> {
    let (f1, f2) = cfg.profiles(n)?;
    let topo = topo_invariants(&f1, &f2, cfg.a);
    match ProductSurface::new(f1, f2, cfg.a) {
        Ok(s) => Ok(Ok(s)),
        Err(e @ Error::ClassConstraint(_)) => {
            let mut report = topo.report();
            report.note(e.to_string());
            let file = write_report(out, &surface_label(cfg), cfg.tolerance, &report, false)?;
            Ok(Err(Outcome { status: Status::Invalid, files: vec![file] }))
        }
        Err(e) => Err(e.into()),
    }
}

/// `z, Theta1, Theta2, kappa1, kappa2`; `z` is the first factor's coordinate
/// and row `j` holds node `j` of each factor.
pub fn surface_csv(s: &ProductSurface) -> Result<Vec<u8>, CliError> {
    let (f1, f2) = s.factors();
    let (k1, k2) = (gauss_curvature(f1), gauss_curvature(f2));
    let z = f1.nodes();
    let rows = (0..f1.len().max(f2.len())).map(|j| {
        vec![
            cell(z.get(j).copied()),
            cell(f1.theta().get(j).copied()),
            cell(f2.theta().get(j).copied()),
            cell(k1.get(j).copied()),
            cell(k2.get(j).copied()),
        ]
    });
    Ok(to_csv(&["z", "Theta1", "Theta2", "kappa1", "kappa2"], rows)?)
}

/// `z1, z2, E` over the tensor grid.
pub fn residual_csv(s: &ProductSurface) -> Result<Vec<u8>, CliError> {
    let e = pde_residual(s);
    let (z1, z2) = (s.factors().0.nodes(), s.factors().1.nodes());
    let rows = z1.iter().enumerate().flat_map(|(i, a)| {
        let e = &e;
        z2.iter().enumerate().map(move |(j, b)| vec![float(*a), float(*b), float(e.get(i, j))])
    });
    Ok(to_csv(&["z1", "z2", "E"], rows)?)
}

/// PDE residual norms, topology defects and the forward-map checks.
pub fn surface_report(s: &ProductSurface) -> Report {
    let e = pde_residual(s);
    let mut r = Report::new();
    r.push("pde.residual_sup", e.sup_norm());
    r.push("pde.residual_l2", e.l2_norm());
    r.merge("", &s.topo_invariants().report());
    match forward_map(s) {
        Ok(f) => r.merge("", &f.report),
        Err(err) => r.note(format!("forward map skipped: {err}")),
    }
    r
}

fn surface_artifacts(s: &ProductSurface, out: &Path) -> Result<Vec<PathBuf>, CliError> {
    Ok(vec![write_atomic(out, "surface.csv", &surface_csv(s)?)?, write_atomic(out, "residual.csv", &residual_csv(s)?)?])
}

pub fn run_pde_residual(cfg: &SurfaceConfig, out: &Path) -> Result<Outcome, CliError> {
    let s = match build_surface(cfg, cfg.grid, out)? {
        Ok(s) => s,
        Err(outcome) => return Ok(outcome),
    };
    let report = surface_report(&s);
    let pass = report.passes(cfg.tolerance);
    let mut files = surface_artifacts(&s, out)?;
    files.push(write_report(out, &surface_label(cfg), cfg.tolerance, &report, pass)?);
    Ok(Outcome { status: Status::from_pass(pass), files })
}

pub fn run_pde_solve(cfg: &SurfaceConfig, out: &Path) -> Result<Outcome, CliError> {
    let s0 = match build_surface(cfg, cfg.grid, out)? {
        Ok(s) => s,
        Err(outcome) => return Ok(outcome),
    };
    let trace = newton_solve(&s0, &cfg.solver_config())?;
    let history: Vec<Value> = trace
        .history
        .iter()
        .map(|h| json!({"iteration": h.iteration, "residual": num(h.residual), "l2": num(h.l2), "step": num(h.step)}))
        .collect();
    let trace_json = json!({
        "flag": trace.flag.as_str(),
        "iterations": trace.iterations(),
        "final_residual": num(trace.final_residual()),
        "history": history,
    });
    let history_csv = to_csv(
        &["iteration", "residual", "step"],
        trace.history.iter().map(|h| vec![h.iteration.to_string(), float(h.residual), float(h.step)]),
    )?;
    let mut report = surface_report(&trace.surface);
    report.note(format!("solver flag: {} after {} iterations", trace.flag.as_str(), trace.iterations()));
    let pass = trace.flag.is_success() && report.passes(cfg.tolerance);
    let mut files = surface_artifacts(&trace.surface, out)?;
    files.push(write_atomic(out, "trace.json", &to_json(&trace_json)?)?);
    files.push(write_atomic(out, "history.csv", &history_csv)?);
    files.push(write_report(out, &surface_label(cfg), cfg.tolerance, &report, pass)?);
    Ok(Outcome { status: Status::from_pass(pass), files })
}

fn exact_curvature(p: &SphereProfile) -> f64 {
    match p.kind() {
        FactorKind::Sphere => 1.0 / p.half_length(),
        FactorKind::FlatTorus => 0.0,
    }
}

/// Order deficit `max(0, MIN_ORDER - order)` over refinement pairs; exact pairs contribute 0.
fn order_deficit(study: &ConvergenceStudy) -> f64 {
    study.orders.iter().flatten().fold(0.0f64, |d, p| d.max(MIN_ORDER - p))
}

/// Refinement study of a configured exact surface: PDE residual and curvature
/// fields on `cfg.grids`, plus a manufactured non-polynomial profile whose
/// finest refinement pair measures the discretization order.
pub fn run_converge(cfg: &SurfaceConfig, out: &Path) -> Result<Outcome, CliError> {
    if cfg.perturbation != 0.0 {
        return Err(CliError::Config("converge needs exact profiles (perturbation must be 0)".into()));
    }
    let mut surfaces = Vec::with_capacity(cfg.grids.len());
    for &n in &cfg.grids {
        match build_surface(cfg, n, out)? {
            Ok(s) => surfaces.push(s),
            Err(outcome) => return Ok(outcome),
        }
    }
    let residual = residual_study(&cfg.grids, |n| {
        Ok(surfaces[cfg.grids.iter().position(|m| *m == n).expect("grid listed")].clone())
    })?;
    let spacings: Vec<f64> = surfaces.iter().map(|s| s.spacing()).collect();
    let kappa_error = |s: &ProductSurface| {
        let (f1, f2) = s.factors();
        let err =
            |p: &SphereProfile| gauss_curvature(p).iter().map(|k| (k - exact_curvature(p)).abs()).fold(0.0, f64::max);
        err(f1).max(err(f2))
    };
    let kappa = ConvergenceStudy::new(cfg.grids.clone(), spacings.clone(), surfaces.iter().map(kappa_error).collect());
    let manufactured = manufactured_study(&cfg.grids, ManufacturedProfile { c: 2.0, delta: 0.3 }, 0.5)?;

    let mut report = Report::new();
    report.push("order_deficit.residual", order_deficit(&residual));
    report.push("order_deficit.kappa", order_deficit(&kappa));
    report.push(
        "order_deficit.manufactured_finest",
        manufactured.asymptotic_order().map_or(0.0, |p| (MIN_ORDER - p).max(0.0)),
    );
    let finest = surfaces.last().expect("at least one grid");
    report.merge("finest", &finest.topo_invariants().report());
    for (name, study) in [("residual", &residual), ("kappa", &kappa), ("manufactured", &manufactured)] {
        let notes = study.report(name);
        for n in notes.notes() {
            report.note(n.clone());
        }
    }
    report.note(format!("residual <= C h^2 with C = {:e}", residual.constant()));
    let pass = report.passes(cfg.tolerance);

    let t = topo_invariants(finest.factors().0, finest.factors().1, cfg.a);
    let rows = (0..cfg.grids.len()).map(|k| {
        vec![
            cfg.grids[k].to_string(),
            float(spacings[k]),
            float(residual.errors[k]),
            float(kappa.errors[k]),
            float(manufactured.errors[k]),
        ]
    });
    let csv = to_csv(&["n", "h", "residual", "kappa_error", "manufactured_error"], rows)?;
    let summary = json!({
        "grids": cfg.grids,
        "residual_orders": residual.orders.iter().map(|o| o.map_or(Value::Null, num)).collect::<Vec<_>>(),
        "kappa_orders": kappa.orders.iter().map(|o| o.map_or(Value::Null, num)).collect::<Vec<_>>(),
        "manufactured_orders": manufactured.orders.iter().map(|o| o.map_or(Value::Null, num)).collect::<Vec<_>>(),
        "topology": {"omega_dot_a": num(t.omega_dot_a), "a_dot_a": num(t.a_dot_a), "c1_sq": num(t.c1_sq)},
    });
    let files = vec![
        write_atomic(out, "convergence.csv", &csv)?,
        write_atomic(out, "convergence.json", &to_json(&summary)?)?,
        write_report(out, &surface_label(cfg), cfg.tolerance, &report, pass)?,
    ];
    Ok(Outcome { status: Status::from_pass(pass), files })
}
