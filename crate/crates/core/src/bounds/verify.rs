//! Checking a bound against a spectrum along an axis and reporting margins.

use std::collections::BTreeMap;

use serde::Serialize;

use super::aterm::{c_b_with, AtermMode};
use super::formulas::*;
use crate::error::{Error, Result};
use crate::geometry::Domain;
use crate::par;
use crate::riesz::{heat_trace, partial_sum, riesz_mean, riesz_tolerance};
use crate::specfun::w_constant;
use crate::spectra::{DomainMeta, Problem, Spectrum};

/// Default relative verification tolerance for exact spectra.
pub const DEFAULT_REL_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum BoundId {
    #[serde(rename = "main")]
    Main,
    #[serde(rename = "split")]
    Split,
    #[serde(rename = "triangle")]
    Triangle,
    #[serde(rename = "john2d")]
    John2d,
    #[serde(rename = "johnNd")]
    JohnNd,
    #[serde(rename = "via-neumann")]
    ViaNeumann,
    #[serde(rename = "kroger")]
    Kroger,
    #[serde(rename = "bracket")]
    Bracket,
    #[serde(rename = "sd-upper")]
    SdUpper,
    #[serde(rename = "sd-john2d")]
    SdJohn2d,
    #[serde(rename = "sd-lower2d")]
    SdLower2d,
    #[serde(rename = "sd-sum")]
    SdSum,
    #[serde(rename = "heat-trace")]
    HeatTrace,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    /// Spectral parameter z of a Riesz mean.
    Z,
    /// Eigenvalue count k.
    K,
    /// Heat-trace time t.
    T,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Side {
    Lower,
    Upper,
    Bracket,
}

impl BoundId {
    pub const ALL: [BoundId; 13] = [
        BoundId::Main,
        BoundId::Split,
        BoundId::Triangle,
        BoundId::John2d,
        BoundId::JohnNd,
        BoundId::ViaNeumann,
        BoundId::Kroger,
        BoundId::Bracket,
        BoundId::SdUpper,
        BoundId::SdJohn2d,
        BoundId::SdLower2d,
        BoundId::SdSum,
        BoundId::HeatTrace,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            BoundId::Main => "main",
            BoundId::Split => "split",
            BoundId::Triangle => "triangle",
            BoundId::John2d => "john2d",
            BoundId::JohnNd => "johnNd",
            BoundId::ViaNeumann => "via-neumann",
            BoundId::Kroger => "kroger",
            BoundId::Bracket => "bracket",
            BoundId::SdUpper => "sd-upper",
            BoundId::SdJohn2d => "sd-john2d",
            BoundId::SdLower2d => "sd-lower2d",
            BoundId::SdSum => "sd-sum",
            BoundId::HeatTrace => "heat-trace",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        Self::ALL.into_iter().find(|b| b.as_str() == s).ok_or_else(|| {
            let names: Vec<&str> = Self::ALL.iter().map(|b| b.as_str()).collect();
            Error::Parse(format!("unknown bound '{s}' (expected one of {})", names.join(", ")))
        })
    }

    pub fn axis(self) -> Axis {
        match self {
            BoundId::Kroger | BoundId::Bracket | BoundId::SdSum => Axis::K,
            BoundId::HeatTrace => Axis::T,
            _ => Axis::Z,
        }
    }

    pub fn problem(self) -> Problem {
        match self {
            BoundId::SdUpper
            | BoundId::SdJohn2d
            | BoundId::SdLower2d
            | BoundId::SdSum
            | BoundId::HeatTrace => Problem::Sd,
            _ => Problem::Sn,
        }
    }

    fn side(self) -> Side {
        match self {
            BoundId::Kroger | BoundId::SdUpper | BoundId::SdJohn2d | BoundId::HeatTrace => Side::Upper,
            BoundId::Bracket => Side::Bracket,
            _ => Side::Lower,
        }
    }
}

/// Parameters a bound is evaluated with. Unset geometric fields are filled
/// from the domain or the spectrum metadata where possible.
#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct BoundParams {
    pub gamma: f64,
    pub n: u32,
    pub area_f: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub depth: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bc_length: Option<f64>,
    /// Width δ_v of the Neumann comparison.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub width: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub john: Option<bool>,
    pub aterm_mode: AtermMode,
}

impl BoundParams {
    pub fn from_meta(meta: &DomainMeta) -> Self {
        Self {
            gamma: 1.0,
            n: meta.dim,
            area_f: meta.area_f,
            depth: meta.depth,
            alpha: meta.alpha,
            beta: meta.beta,
            john: meta.john,
            ..Default::default()
        }
    }

    /// Takes the geometric facts from `d`; explicit values already set win.
    pub fn fill_from_domain(&mut self, d: &Domain) {
        let meta = DomainMeta::for_domain(d);
        self.n = meta.dim;
        self.area_f = meta.area_f;
        self.depth = self.depth.or(meta.depth);
        self.alpha = self.alpha.or(meta.alpha);
        self.beta = self.beta.or(meta.beta);
        self.john = Some(d.john_condition());
        if let (Domain::Polygon(p), None) = (d, self.delta) {
            if let Ok(t) = TriangleParams::from_polygon(p) {
                self.delta = Some(t.delta);
                self.bc_length = self.bc_length.or(Some(t.bc_length));
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum FlagStatus {
    Satisfied,
    Violated,
    Unknown,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HypothesisFlag {
    pub name: String,
    pub status: FlagStatus,
    pub detail: String,
}

impl HypothesisFlag {
    pub fn new(name: &str, status: FlagStatus, detail: impl Into<String>) -> Self {
        Self { name: name.into(), status, detail: detail.into() }
    }

    pub fn from_option(name: &str, v: Option<bool>, detail: &str) -> Self {
        let status = match v {
            Some(true) => FlagStatus::Satisfied,
            Some(false) => FlagStatus::Violated,
            None => FlagStatus::Unknown,
        };
        Self::new(name, status, detail)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Holds,
    HoldsWithFlags,
    Violated,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundReport {
    pub bound_id: BoundId,
    pub axis: Axis,
    pub params: BoundParams,
    pub grid: Vec<f64>,
    pub bound: Vec<f64>,
    pub observed: Vec<f64>,
    /// observed − bound for lower bounds, bound − observed for upper
    /// bounds, distance to the nearer end for brackets.
    pub margins: Vec<f64>,
    pub min_margin: f64,
    /// Axis points with margin < −tolerance.
    pub violations: Vec<f64>,
    pub hypothesis_flags: Vec<HypothesisFlag>,
    pub status: Status,
    pub tolerance: Vec<f64>,
    pub notes: Vec<String>,
    /// Extra per-point columns (upper end of a bracket, alternative readings).
    #[serde(skip_serializing_if = "BTreeMap::is_empty")]
    pub extra: BTreeMap<String, Vec<f64>>,
}

impl BoundReport {
    /// Recomputes margins and violations from the stored arrays.
    pub fn is_consistent(&self) -> bool {
        let side = self.bound_id.side();
        let n = self.grid.len();
        if [self.bound.len(), self.observed.len(), self.margins.len(), self.tolerance.len()]
            .iter()
            .any(|&l| l != n)
        {
            return false;
        }
        let upper = self.extra.get("bound_upper");
        let margins_ok = (0..n).all(|i| {
            let m = match side {
                Side::Lower => self.observed[i] - self.bound[i],
                Side::Upper => self.bound[i] - self.observed[i],
                Side::Bracket => {
                    let Some(u) = upper else { return false };
                    bracket_margin(self.observed[i], self.bound[i], u[i], self.extra.get("s_k").map(|s| s[i]))
                }
            };
            m == self.margins[i] || (m.is_nan() && self.margins[i].is_nan())
        });
        let expected: Vec<f64> = (0..n)
            .filter(|&i| !(self.margins[i] >= -self.tolerance[i]))
            .map(|i| self.grid[i])
            .collect();
        margins_ok && expected == self.violations
    }

    pub fn to_json(&self) -> Result<String> {
        crate::report::to_json(self)
    }
}

fn bracket_margin(nu: f64, lo: f64, hi: f64, s_k: Option<f64>) -> f64 {
    let m = (nu - lo).min(hi - nu);
    match s_k {
        Some(s) if s > 1.0 => m.min(-(s - 1.0) * lo.max(hi)),
        _ => m,
    }
}

struct Point {
    bound: f64,
    observed: f64,
    tolerance: f64,
    extra: Vec<(&'static str, f64)>,
}

fn missing(what: &str, bound: BoundId) -> Error {
    Error::Hypothesis(format!("bound '{}' needs {what}", bound.as_str()))
}

fn fem_mean_error(s: &Spectrum, k: usize) -> f64 {
    s.errors().map_or(0.0, |e| e[..k].iter().sum::<f64>() / k as f64)
}

fn fem_error(s: &Spectrum, j: usize) -> f64 {
    s.errors().map_or(0.0, |e| e[j - 1])
}

fn axis_k(v: f64) -> Result<usize> {
    if !(v >= 1.0) || v.fract() != 0.0 || v > 1e12 {
        return Err(Error::InvalidArgument(format!("k-axis values must be positive integers, got {v}")));
    }
    Ok(v as usize)
}

/// Evaluates `bound` and the matching spectral quantity at every axis point
/// and assembles the report. `rel_tol` scales the tolerance 1 + |bound|;
/// FEM error estimates carried by `s` are added on top.
pub fn verify(
    s: &Spectrum,
    bound: BoundId,
    params: &BoundParams,
    domain: Option<&Domain>,
    grid: &[f64],
    rel_tol: f64,
) -> Result<BoundReport> {
    if s.problem() != bound.problem() {
        return Err(Error::InvalidArgument(format!(
            "bound '{}' applies to {} spectra, got {}",
            bound.as_str(),
            bound.problem().as_str(),
            s.problem().as_str()
        )));
    }
    if grid.is_empty() {
        return Err(Error::InvalidArgument("empty verification grid".into()));
    }
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidArgument("verification grid must be strictly increasing".into()));
    }
    let mut params = params.clone();
    if let Some(d) = domain {
        params.fill_from_domain(d);
    }
    let g = params.gamma;
    let n = params.n;
    let area = params.area_f;
    if !(area > 0.0) || n < 2 {
        return Err(Error::InvalidArgument("|F| > 0 and n ≥ 2 are required".into()));
    }
    let needs_gamma_one = matches!(
        bound,
        BoundId::Split
            | BoundId::JohnNd
            | BoundId::ViaNeumann
            | BoundId::SdJohn2d
            | BoundId::SdLower2d
    );
    if needs_gamma_one && g != 1.0 {
        return Err(Error::InvalidArgument(format!(
            "bound '{}' is stated for γ = 1 only",
            bound.as_str()
        )));
    }
    match bound.axis() {
        Axis::Z => {
            let ceiling = s.validity_ceiling();
            if let Some(&z) = grid.iter().find(|&&z| z > ceiling || z < 0.0) {
                if z < 0.0 {
                    return Err(Error::InvalidArgument(format!("z = {z} < 0")));
                }
                return Err(Error::AboveCeiling { z, ceiling });
            }
        }
        Axis::K => {
            let extra = usize::from(bound != BoundId::SdSum);
            for &v in grid {
                let k = axis_k(v)?;
                if k + extra > s.len() {
                    return Err(Error::IndexOutOfRange { index: k + extra, len: s.len() });
                }
            }
        }
        Axis::T => {
            if grid.iter().any(|t| !(*t > 0.0)) {
                return Err(Error::InvalidArgument("heat-trace times must be positive".into()));
            }
        }
    }

    let john = params.john;
    let mut flags = Vec::new();
    let mut notes = Vec::new();
    let mode = params.aterm_mode;
    let tol_z = |b: f64, z: f64| rel_tol * (1.0 + b.abs()) + riesz_tolerance(s, g, z);
    let observed_z = |z: f64| riesz_mean(s, g, z);

    let points: Vec<Point> = match bound {
        BoundId::Main | BoundId::Split => {
            let d = domain.ok_or_else(|| missing("the domain geometry (wall integral)", bound))?;
            if bound == BoundId::Split {
                let delta_ok = d.walls_face_down() || d.delta_overhang().map(|x| x.is_some()).unwrap_or(false);
                flags.push(HypothesisFlag::from_option(
                    "overhang_delta_positive",
                    Some(delta_ok),
                    "upward-facing walls stay below a depth δ > 0",
                ));
                if !delta_ok {
                    return Err(Error::Hypothesis("δ is not positive for this domain".into()));
                }
            }
            flags.push(HypothesisFlag::new("gamma_at_least_one", FlagStatus::Satisfied, "γ ≥ 1"));
            par::try_map_slice(grid, |&z| {
                let b = if bound == BoundId::Main {
                    sn_lower_main_with(d, g, z, mode)?
                } else {
                    sn_lower_split(d, z)?
                };
                Ok::<_, Error>(Point { bound: b, observed: observed_z(z)?, tolerance: tol_z(b, z), extra: vec![] })
            })?
        }
        BoundId::Triangle => {
            let (Some(alpha), Some(beta)) = (params.alpha, params.beta) else {
                return Err(missing("the corner angles α and β", bound));
            };
            let (delta, bc) = match (params.delta, params.depth) {
                (Some(d), _) => (d, params.bc_length.unwrap_or(0.0)),
                (None, Some(h)) => {
                    flags.push(HypothesisFlag::new(
                        "comparison_domain",
                        FlagStatus::Unknown,
                        "δ taken as the depth and |B̃c| = 0, the triangle/trapezoid reading; no geometry was given to confirm it",
                    ));
                    (h, params.bc_length.unwrap_or(0.0))
                }
                (None, None) => return Err(missing("δ or the domain depth", bound)),
            };
            params.delta = Some(delta);
            params.bc_length = Some(bc);
            let tp = TriangleParams::new(alpha, beta, delta, bc, area)?;
            flags.push(HypothesisFlag::new("angles_in_open_interval", FlagStatus::Satisfied, "α, β ∈ (0, π)"));
            flags.push(HypothesisFlag::new("delta_positive", FlagStatus::Satisfied, format!("δ = {delta}")));
            notes.push(
                "the bound uses c with a negative cotangent term for acute angles; \
                 the columns c_printed and bound_printed carry c with the opposite sign of that term"
                    .into(),
            );
            par::try_map_slice(grid, |&z| {
                let t = sn_lower_2d_angles(&tp, g, z)?;
                Ok::<_, Error>(Point {
                    bound: t.value,
                    observed: observed_z(z)?,
                    tolerance: tol_z(t.value, z),
                    extra: vec![("c", t.c), ("c_printed", t.c_printed), ("bound_printed", t.value_printed)],
                })
            })?
        }
        BoundId::John2d | BoundId::JohnNd | BoundId::ViaNeumann | BoundId::SdUpper | BoundId::SdJohn2d => {
            if matches!(bound, BoundId::John2d | BoundId::SdJohn2d) && n != 2 {
                return Err(Error::InvalidArgument(format!("bound '{}' is two-dimensional", bound.as_str())));
            }
            let depth = params.depth;
            let width = params.width;
            match bound {
                BoundId::ViaNeumann => flags.push(HypothesisFlag::new(
                    "neumann_width",
                    FlagStatus::Unknown,
                    "the width δ_v is taken as given",
                )),
                BoundId::SdUpper => flags.push(HypothesisFlag::from_option(
                    "john",
                    john,
                    "domain lies in the cylinder over the free surface",
                )),
                _ => flags.push(HypothesisFlag::from_option(
                    "john",
                    john,
                    "domain lies in the strip/cylinder over the free surface",
                )),
            }
            if bound == BoundId::ViaNeumann {
                notes.push("leading constant is a factor n/(n+1) below the sharp one by construction".into());
            }
            par::try_map_slice(grid, |&z| {
                let b = match bound {
                    BoundId::John2d => sn_lower_john_2d(area, g, z)?,
                    BoundId::JohnNd => {
                        sn_lower_john_ndim(area, depth.ok_or_else(|| missing("the depth h", bound))?, n, z)?
                    }
                    BoundId::ViaNeumann => {
                        sn_lower_via_neumann(area, width.ok_or_else(|| missing("the width δ_v (--width)", bound))?, n, z)?
                    }
                    BoundId::SdUpper => sd_upper_ndim(area, n, g, z)?,
                    _ => sd_upper_2d_john(area, z)?,
                };
                Ok::<_, Error>(Point { bound: b, observed: observed_z(z)?, tolerance: tol_z(b, z), extra: vec![] })
            })?
        }
        BoundId::SdLower2d => {
            if n != 2 {
                return Err(Error::InvalidArgument("sd-lower2d is two-dimensional".into()));
            }
            let contains = match domain {
                Some(Domain::Polygon(p)) => Some(p.contains_free_rectangle(1.0)),
                Some(Domain::Cylinder(c)) => Some(c.depth() >= 1.0),
                Some(Domain::Cone(_)) => Some(false),
                None => params.depth.filter(|_| john == Some(true)).map(|h| h >= 1.0),
            };
            flags.push(HypothesisFlag::from_option(
                "contains_unit_depth_rectangle",
                contains,
                "the rectangle F × (−1, 0) lies inside the domain",
            ));
            if grid[0] < 1.0 {
                return Err(Error::InvalidArgument("sd-lower2d is stated for z ≥ 1".into()));
            }
            par::try_map_slice(grid, |&z| {
                let b = sd_lower_2d(area, z)?;
                Ok::<_, Error>(Point { bound: b, observed: observed_z(z)?, tolerance: tol_z(b, z), extra: vec![] })
            })?
        }
        BoundId::Kroger => {
            let general = john != Some(true);
            flags.push(HypothesisFlag::from_option("john", john, "domain lies in the cylinder over the free surface"));
            if general {
                notes.push("John condition not established: the general form with c_B(ν_{k+1}) is used".into());
            }
            let d = if general {
                Some(domain.ok_or_else(|| missing("the domain geometry for c_B", bound))?)
            } else {
                None
            };
            par::try_map_slice(grid, |&v| {
                let k = v as usize;
                let cb = match d {
                    Some(d) => Some(c_b_with(d, s.get(k + 1)?, mode)?),
                    None => None,
                };
                let c = kroger_sum_bound(s, n, area, k, cb)?;
                let nu = s.get(k + 1)?;
                let slope = (n as f64 - 1.0) / n as f64 * 2.0 * (nu - c.w).abs() / c.w;
                let tol = rel_tol * (1.0 + c.bound.abs()) + fem_mean_error(s, k) + slope * fem_error(s, k + 1);
                Ok::<_, Error>(Point {
                    bound: c.bound,
                    observed: c.mean,
                    tolerance: tol,
                    extra: vec![("w", c.w)],
                })
            })?
        }
        BoundId::Bracket => {
            flags.push(HypothesisFlag::from_option("john", john, "domain lies in the cylinder over the free surface"));
            par::try_map_slice(grid, |&v| {
                let k = v as usize;
                let sk = s_k(s, n, area, k)?;
                let w = w_constant(n, k, area)?;
                let root = (1.0 - sk).max(0.0).sqrt();
                let (lo, hi) = (w * (1.0 - root), w * (1.0 + root));
                let nu = s.get(k + 1)?;
                let tol = rel_tol * (1.0 + nu.abs()) + fem_error(s, k + 1) + fem_mean_error(s, k);
                Ok::<_, Error>(Point { bound: lo, observed: nu, tolerance: tol, extra: vec![("bound_upper", hi), ("s_k", sk)] })
            })?
        }
        BoundId::SdSum => {
            flags.push(HypothesisFlag::from_option("john", john, "domain lies in the cylinder over the free surface"));
            par::try_map_slice(grid, |&v| {
                let k = v as usize;
                let b = sd_sum_lower(n, area, k)?;
                let mean = partial_sum(s, k)? / k as f64;
                Ok::<_, Error>(Point {
                    bound: b,
                    observed: mean,
                    tolerance: rel_tol * (1.0 + b.abs()) + fem_mean_error(s, k),
                    extra: vec![],
                })
            })?
        }
        BoundId::HeatTrace => {
            flags.push(HypothesisFlag::from_option("john", john, "domain lies in the cylinder over the free surface"));
            notes.push("observed = partial heat trace + certified tail bound".into());
            par::try_map_slice(grid, |&t| {
                let b = sd_heat_trace_upper(area, n, t)?;
                let h = heat_trace(s, t)?;
                let fem: f64 = s.errors().map_or(0.0, |e| {
                    s.values().iter().zip(e).map(|(v, e)| e * t * (-(v - e).max(0.0) * t).exp()).sum()
                });
                Ok::<_, Error>(Point {
                    bound: b,
                    observed: h.value + h.tail,
                    tolerance: rel_tol * (1.0 + b.abs()) + fem,
                    extra: vec![("tail", h.tail)],
                })
            })?
        }
    };

    let side = bound.side();
    let mut extra: BTreeMap<String, Vec<f64>> = BTreeMap::new();
    for p in &points {
        for (k, v) in &p.extra {
            extra.entry((*k).to_string()).or_default().push(*v);
        }
    }
    let margins: Vec<f64> = points
        .iter()
        .enumerate()
        .map(|(i, p)| match side {
            Side::Lower => p.observed - p.bound,
            Side::Upper => p.bound - p.observed,
            Side::Bracket => bracket_margin(p.observed, p.bound, extra["bound_upper"][i], Some(extra["s_k"][i])),
        })
        .collect();
    if side == Side::Bracket && extra["s_k"].iter().any(|s| *s > 1.0) {
        notes.push("S_k > 1 somewhere: the bracket is undefined there and counted as a violation".into());
    }
    let tolerance: Vec<f64> = points.iter().map(|p| p.tolerance).collect();
    let violations: Vec<f64> = (0..grid.len())
        .filter(|&i| !(margins[i] >= -tolerance[i]))
        .map(|i| grid[i])
        .collect();
    let min_margin = margins.iter().copied().fold(f64::INFINITY, f64::min);
    let status = if !violations.is_empty() {
        Status::Violated
    } else if flags.iter().any(|f| f.status != FlagStatus::Satisfied) {
        Status::HoldsWithFlags
    } else {
        Status::Holds
    };
    if s.errors().is_some() {
        notes.push("tolerance includes the propagated FEM error estimates".into());
    }
    Ok(BoundReport {
        bound_id: bound,
        axis: bound.axis(),
        params,
        grid: grid.to_vec(),
        bound: points.iter().map(|p| p.bound).collect(),
        observed: points.iter().map(|p| p.observed).collect(),
        margins,
        min_margin,
        violations,
        hypothesis_flags: flags,
        status,
        tolerance,
        notes,
        extra,
    })
}
