//! Command implementations. Each returns the process exit code.

use std::path::Path;

use steklov_core::asymptotics::fit_report;
use steklov_core::bounds::{self, AtermMode, BoundId, BoundParams, FlagStatus, Status};
use steklov_core::fem::{dtn_spectrum_estimated, dtn_spectrum_mesh, load_mesh, FemEstimate, MeshOptions};
use steklov_core::geometry::Domain;
use steklov_core::riesz::riesz_curve;
use steklov_core::spectra::{cylinder_spectrum, load_spectrum, rectangle_sd, rectangle_sn, DomainMeta, Problem, Spectrum};
use steklov_core::{Error, Result};

use crate::parse::{self, Geometry};
use crate::{AtermArg, SourceArgs};

/// Mesh size used when FEM is needed and --fem-h is absent.
pub const DEFAULT_FEM_H: f64 = 0.02;

pub fn init_threads() -> Result<()> {
    let Ok(v) = std::env::var("STEKLOV_THREADS") else { return Ok(()) };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|n| *n > 0)
        .ok_or_else(|| Error::InvalidArgument(format!("STEKLOV_THREADS must be a positive integer, got '{v}'")))?;
    #[cfg(feature = "parallel")]
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Error::InvalidArgument(format!("cannot size the thread pool: {e}")))?;
    #[cfg(not(feature = "parallel"))]
    let _ = n;
    Ok(())
}

struct Loaded {
    spectrum: Spectrum,
    domain: Option<Domain>,
    estimate: Option<FemEstimate>,
}

fn geometry(src: &SourceArgs) -> Result<Option<Geometry>> {
    if let Some(p) = &src.preset {
        return parse::preset(p).map(Some);
    }
    if let Some(path) = &src.domain {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::InvalidArgument(format!("cannot read domain file '{path}': {e}")))?;
        return parse::domain_json(&text, path).map(Some);
    }
    Ok(None)
}

fn load(src: &SourceArgs, default_problem: Problem) -> Result<Loaded> {
    let problem = match &src.problem {
        Some(p) => Problem::parse(p)?,
        None => default_problem,
    };
    let geo = geometry(src)?;
    if let Some(path) = &src.spectrum {
        let s = load_spectrum(Path::new(path)).map_err(|e| match e {
            Error::Io(io) => Error::InvalidArgument(format!("cannot read spectrum file '{path}': {io}")),
            e => e,
        })?;
        if src.problem.is_some() && s.problem() != problem {
            return Err(Error::InvalidArgument(format!(
                "--problem {} does not match the {} spectrum in '{path}'",
                problem.as_str(),
                s.problem().as_str()
            )));
        }
        return Ok(Loaded { spectrum: s, domain: geo.map(|g| g.domain), estimate: None });
    }
    if let Some(path) = &src.mesh {
        let (mesh, warnings) = load_mesh(Path::new(path)).map_err(|e| match e {
            Error::Io(io) => Error::InvalidArgument(format!("cannot read mesh file '{path}': {io}")),
            e => e,
        })?;
        for w in warnings {
            eprintln!("warning: {w}");
        }
        let meta = DomainMeta::new(mesh.free_length(), 2);
        let s = dtn_spectrum_mesh(&mesh, problem, src.count, meta)?;
        return Ok(Loaded { spectrum: s, domain: None, estimate: None });
    }
    let geo = geo.ok_or_else(|| {
        Error::InvalidArgument("one of --preset, --domain, --mesh or --spectrum is required".into())
    })?;
    if src.count == 0 {
        return Err(Error::InvalidArgument("--count must be positive".into()));
    }
    let fem_h = src.fem_h.as_deref().map(parse::number).transpose()?;
    let use_fem = fem_h.is_some() || !geo.exact;
    let (spectrum, estimate) = match (&geo.domain, use_fem) {
        (Domain::Polygon(p), true) => {
            let h = fem_h.unwrap_or(DEFAULT_FEM_H);
            let grading = parse::number(&src.grading)?;
            if !(h > 0.0) || !(grading >= 0.0) {
                return Err(Error::InvalidArgument("--fem-h must be positive and --grading nonnegative".into()));
            }
            let est = dtn_spectrum_estimated(p, problem, src.count, &MeshOptions::graded(h, grading))?;
            (est.spectrum.clone(), Some(est))
        }
        (Domain::Polygon(p), false) => {
            let s = match problem {
                Problem::Sn => rectangle_sn(p.free_length(), p.depth(), src.count)?,
                Problem::Sd => rectangle_sd(p.free_length(), p.depth(), src.count)?,
            };
            (s, None)
        }
        (Domain::Cylinder(c), false) => (cylinder_spectrum(c, problem, src.count)?, None),
        (Domain::Cylinder(_) | Domain::Cone(_), _) => {
            return Err(Error::Unsupported(
                "no spectrum solver for this domain: FEM covers polygons, closed forms cover rectangles and cylinders; pass --spectrum".into(),
            ))
        }
    };
    Ok(Loaded { spectrum, domain: Some(geo.domain), estimate })
}

fn emit(out: Option<&str>, text: &str) -> Result<()> {
    match out {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| Error::InvalidArgument(format!("cannot write '{path}': {e}"))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn extrapolated(l: &Loaded) -> Result<Spectrum> {
    l.estimate
        .as_ref()
        .ok_or_else(|| Error::InvalidArgument("--extrapolate needs a FEM spectrum computed from a polygon".into()))?
        .extrapolated_spectrum()
}

pub fn spectrum(src: &SourceArgs, extrapolate: bool, out: Option<&str>) -> Result<u8> {
    let l = load(src, Problem::Sn)?;
    let s = if extrapolate { extrapolated(&l)? } else { l.spectrum };
    emit(out, &s.to_csv())?;
    Ok(0)
}

pub fn riesz(src: &SourceArgs, gamma: &str, grid: &str, out: Option<&str>) -> Result<u8> {
    let g = parse::number(gamma)?;
    let grid = parse::grid(grid)?;
    let l = load(src, Problem::Sn)?;
    let curve = riesz_curve(&l.spectrum, g, &grid)?;
    emit(out, &curve.to_csv())?;
    Ok(0)
}

pub struct VerifyOptions {
    pub bound: String,
    pub gamma: String,
    pub grid: String,
    pub tol: String,
    pub width: Option<String>,
    pub alpha: Option<String>,
    pub beta: Option<String>,
    pub delta: Option<String>,
    pub bc_length: Option<String>,
    pub aterm: AtermArg,
}

fn opt_number(v: &Option<String>) -> Result<Option<f64>> {
    v.as_deref().map(parse::number).transpose()
}

pub fn verify(src: &SourceArgs, o: &VerifyOptions, out: Option<&str>) -> Result<u8> {
    let bound = BoundId::parse(&o.bound)?;
    let gamma = parse::number(&o.gamma)?;
    let grid = parse::grid(&o.grid)?;
    let tol = parse::number(&o.tol)?;
    if !(tol >= 0.0) {
        return Err(Error::InvalidArgument("--tol must be nonnegative".into()));
    }
    let l = load(src, bound.problem())?;
    let mut params = BoundParams::from_meta(l.spectrum.meta());
    params.gamma = gamma;
    params.width = opt_number(&o.width)?;
    if let Some(a) = opt_number(&o.alpha)? {
        params.alpha = Some(a);
    }
    if let Some(b) = opt_number(&o.beta)? {
        params.beta = Some(b);
    }
    params.delta = opt_number(&o.delta)?;
    params.bc_length = opt_number(&o.bc_length)?;
    params.aterm_mode = match o.aterm {
        AtermArg::ClosedForm => AtermMode::ClosedForm,
        AtermArg::Quadrature => AtermMode::Quadrature,
    };
    let report = bounds::verify(&l.spectrum, bound, &params, l.domain.as_ref(), &grid, tol)?;
    emit(out, &report.to_json()?)?;
    eprintln!(
        "{}: {} (min margin {:e}, {} violation(s))",
        bound.as_str(),
        match report.status {
            Status::Holds => "holds",
            Status::HoldsWithFlags => "holds with unverified hypotheses",
            Status::Violated => "violated",
        },
        report.min_margin,
        report.violations.len()
    );
    Ok(match report.status {
        Status::Holds => 0,
        Status::Violated => 1,
        Status::HoldsWithFlags => 4,
    })
}

pub fn asym(src: &SourceArgs, gamma: &str, window: &str, extrapolate: bool, out: Option<&str>) -> Result<u8> {
    let g = parse::number(gamma)?;
    let w = parse::window(window)?;
    let l = load(src, Problem::Sn)?;
    let s = if extrapolate { extrapolated(&l)? } else { l.spectrum };
    let report = fit_report(&s, g, w)?;
    emit(out, &report.to_json()?)?;
    let flagged = report.hypothesis_flags.iter().any(|f| f.status != FlagStatus::Satisfied);
    Ok(if flagged { 4 } else { 0 })
}
