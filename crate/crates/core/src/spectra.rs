//! Eigenvalue lists: closed-form generators for rectangles and cylinders,
//! and the CSV exchange format.

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{CylinderBase, CylinderDomain, Domain, PolygonalDomain};
use crate::specfun::{stable_coth, stable_tanh};

/// Threshold below which the first sloshing value counts as the zero mode
/// for exact spectra.
pub const TOL_ZERO_EXACT: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Problem {
    /// Steklov–Neumann (sloshing).
    Sn,
    /// Steklov–Dirichlet.
    Sd,
}

impl Problem {
    pub fn as_str(self) -> &'static str {
        match self {
            Problem::Sn => "sn",
            Problem::Sd => "sd",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "sn" => Ok(Problem::Sn),
            "sd" => Ok(Problem::Sd),
            other => Err(Error::Parse(format!("unknown problem '{other}' (expected sn or sd)"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Source {
    Exact,
    Fem { h: f64 },
    File { path: String },
}

impl Source {
    fn encode(&self) -> String {
        match self {
            Source::Exact => "exact".into(),
            Source::Fem { h } => format!("fem:{}", fmt17(*h)),
            Source::File { path } => format!("file:{path}"),
        }
    }
}

/// Domain facts carried alongside a spectrum.
#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct DomainMeta {
    pub area_f: f64,
    pub dim: u32,
    pub alpha: Option<f64>,
    pub beta: Option<f64>,
    pub depth: Option<f64>,
    pub john: Option<bool>,
}

impl DomainMeta {
    pub fn new(area_f: f64, dim: u32) -> Self {
        Self { area_f, dim, ..Default::default() }
    }

    pub fn for_polygon(d: &PolygonalDomain) -> Self {
        let (alpha, beta) = match d.angle_pair() {
            Ok((a, b)) => (Some(a), Some(b)),
            Err(_) => (None, None),
        };
        Self {
            area_f: d.free_length(),
            dim: 2,
            alpha,
            beta,
            depth: Some(d.depth()),
            john: Some(d.john_condition()),
        }
    }

    pub fn for_domain(d: &Domain) -> Self {
        match d {
            Domain::Polygon(p) => Self::for_polygon(p),
            Domain::Cylinder(c) => {
                let right = if c.dimension() == 2 { Some(std::f64::consts::FRAC_PI_2) } else { None };
                Self {
                    area_f: c.base_area(),
                    dim: c.dimension(),
                    alpha: right,
                    beta: right,
                    depth: Some(c.depth()),
                    john: Some(true),
                }
            }
            Domain::Cone(c) => Self {
                area_f: c.free_area(),
                dim: 3,
                alpha: Some(c.alpha()),
                beta: None,
                depth: Some(c.depth()),
                john: Some(d.john_condition()),
            },
        }
    }
}

/// A sorted eigenvalue list with its provenance.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Spectrum {
    problem: Problem,
    values: Vec<f64>,
    source: Source,
    meta: DomainMeta,
    /// Per-eigenvalue error estimates (FEM spectra).
    errors: Option<Vec<f64>>,
}

impl Spectrum {
    /// Validates and wraps an eigenvalue list. `tol_zero` bounds the first
    /// sloshing value.
    pub fn new(
        problem: Problem,
        values: Vec<f64>,
        source: Source,
        meta: DomainMeta,
        tol_zero: f64,
    ) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidArgument("spectrum is empty".into()));
        }
        for (i, v) in values.iter().enumerate() {
            if !v.is_finite() || *v < 0.0 {
                return Err(Error::InvalidArgument(format!(
                    "eigenvalue {} = {v} is negative or not finite",
                    i + 1
                )));
            }
        }
        if let Some(i) = values.windows(2).position(|w| w[1] < w[0]) {
            return Err(Error::InvalidArgument(format!(
                "eigenvalues out of order at index {} ({} > {})",
                i + 1,
                values[i],
                values[i + 1]
            )));
        }
        match problem {
            Problem::Sn if values[0] > tol_zero => {
                return Err(Error::InvalidArgument(format!(
                    "sloshing spectrum must start with the zero mode, first value is {}",
                    values[0]
                )));
            }
            Problem::Sd if values[0] <= 0.0 => {
                return Err(Error::InvalidArgument(
                    "Steklov–Dirichlet eigenvalues must be strictly positive".into(),
                ));
            }
            _ => {}
        }
        Ok(Self { problem, values, source, meta, errors: None })
    }

    pub fn with_errors(mut self, errors: Vec<f64>) -> Result<Self> {
        if errors.len() != self.values.len() || errors.iter().any(|e| !(*e >= 0.0)) {
            return Err(Error::InvalidArgument(
                "error estimates must be nonnegative, one per eigenvalue".into(),
            ));
        }
        self.errors = Some(errors);
        Ok(self)
    }

    pub fn with_meta(mut self, meta: DomainMeta) -> Self {
        self.meta = meta;
        self
    }

    pub fn problem(&self) -> Problem {
        self.problem
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn source(&self) -> &Source {
        &self.source
    }

    pub fn meta(&self) -> &DomainMeta {
        &self.meta
    }

    pub fn errors(&self) -> Option<&[f64]> {
        self.errors.as_deref()
    }

    /// Largest z for which every eigenvalue below z is stored.
    pub fn validity_ceiling(&self) -> f64 {
        *self.values.last().expect("spectrum is nonempty")
    }

    /// The `j`-th eigenvalue, 1-based.
    pub fn get(&self, j: usize) -> Result<f64> {
        if j == 0 || j > self.values.len() {
            return Err(Error::IndexOutOfRange { index: j, len: self.values.len() });
        }
        Ok(self.values[j - 1])
    }

    /// Keeps the first `count` eigenvalues.
    pub fn truncated(&self, count: usize) -> Self {
        let mut s = self.clone();
        s.values.truncate(count.max(1));
        if let Some(e) = s.errors.as_mut() {
            e.truncate(count.max(1));
        }
        s
    }

    /// Renders the CSV exchange format.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# problem={}", self.problem.as_str());
        let _ = writeln!(out, "# source={}", self.source.encode());
        let _ = writeln!(out, "# areaF={}", fmt17(self.meta.area_f));
        let _ = writeln!(out, "# n={}", self.meta.dim);
        for (key, val) in [("alpha", self.meta.alpha), ("beta", self.meta.beta), ("depth", self.meta.depth)] {
            if let Some(v) = val {
                let _ = writeln!(out, "# {key}={}", fmt17(v));
            }
        }
        if let Some(j) = self.meta.john {
            let _ = writeln!(out, "# john={j}");
        }
        match &self.errors {
            None => {
                out.push_str("index,value\n");
                for (i, v) in self.values.iter().enumerate() {
                    let _ = writeln!(out, "{},{}", i + 1, fmt17(*v));
                }
            }
            Some(errs) => {
                out.push_str("index,value,error\n");
                for (i, (v, e)) in self.values.iter().zip(errs).enumerate() {
                    let _ = writeln!(out, "{},{},{}", i + 1, fmt17(*v), fmt17(*e));
                }
            }
        }
        out
    }

    /// Parses the CSV exchange format. `origin` names the file for the
    /// provenance tag.
    pub fn from_csv(text: &str, origin: &str) -> Result<Self> {
        let mut problem = None;
        let mut meta = DomainMeta::default();
        let mut have_area = false;
        let mut header: Option<Vec<String>> = None;
        let mut values = Vec::new();
        let mut errors = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() {
                continue;
            }
            let bad = |msg: &str| Error::Parse(format!("{origin}:{}: {msg}", lineno + 1));
            if let Some(comment) = line.strip_prefix('#') {
                let Some((key, val)) = comment.trim().split_once('=') else { continue };
                let val = val.trim();
                let num = || val.parse::<f64>().map_err(|_| bad(&format!("bad number for {key}")));
                match key.trim() {
                    "problem" => problem = Some(Problem::parse(val)?),
                    "areaF" => {
                        meta.area_f = num()?;
                        have_area = true;
                    }
                    "n" => meta.dim = val.parse().map_err(|_| bad("bad dimension"))?,
                    "alpha" => meta.alpha = Some(num()?),
                    "beta" => meta.beta = Some(num()?),
                    "depth" => meta.depth = Some(num()?),
                    "john" => meta.john = Some(val == "true"),
                    _ => {}
                }
                continue;
            }
            if header.is_none() {
                let cols: Vec<String> = line.split(',').map(|c| c.trim().to_string()).collect();
                if cols.len() < 2 || cols[0] != "index" || cols[1] != "value" {
                    return Err(bad("expected header 'index,value'"));
                }
                header = Some(cols);
                continue;
            }
            let cols: Vec<&str> = line.split(',').map(str::trim).collect();
            let ncols = header.as_ref().map_or(2, Vec::len);
            if cols.len() != ncols {
                return Err(bad(&format!("expected {ncols} columns")));
            }
            let index: usize = cols[0].parse().map_err(|_| bad("non-numeric index"))?;
            if index != values.len() + 1 {
                return Err(bad("indices must run 1, 2, 3, …"));
            }
            let v: f64 = cols[1].parse().map_err(|_| bad("non-numeric value"))?;
            values.push(v);
            if ncols > 2 {
                errors.push(cols[2].parse::<f64>().map_err(|_| bad("non-numeric error"))?);
            }
        }
        let problem = problem
            .ok_or_else(|| Error::Parse(format!("{origin}: missing '# problem=' metadata")))?;
        if !have_area || meta.area_f <= 0.0 {
            return Err(Error::Parse(format!("{origin}: missing or invalid '# areaF=' metadata")));
        }
        if meta.dim == 0 {
            meta.dim = 2;
        }
        let tol = if errors.is_empty() { TOL_ZERO_EXACT } else { errors[0].max(TOL_ZERO_EXACT) };
        let s = Spectrum::new(problem, values, Source::File { path: origin.to_string() }, meta, tol)?;
        if errors.is_empty() {
            Ok(s)
        } else {
            s.with_errors(errors)
        }
    }
}

/// Writes a spectrum CSV.
pub fn save_spectrum(s: &Spectrum, path: &Path) -> Result<()> {
    std::fs::write(path, s.to_csv())?;
    Ok(())
}

/// Reads a spectrum CSV.
pub fn load_spectrum(path: &Path) -> Result<Spectrum> {
    let text = std::fs::read_to_string(path)?;
    Spectrum::from_csv(&text, &path.display().to_string())
}

/// Fixed 17-significant-digit float formatting.
pub fn fmt17(v: f64) -> String {
    format!("{v:.16e}")
}

/// Boundary condition for the base Laplacian.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BaseCondition {
    Neumann,
    Dirichlet,
}

/// (kπ/ℓ)² for k ≥ 0 (Neumann) or k ≥ 1 (Dirichlet).
pub fn interval_laplacian(length: f64, bc: BaseCondition, count: usize) -> Vec<f64> {
    let start = match bc {
        BaseCondition::Neumann => 0,
        BaseCondition::Dirichlet => 1,
    };
    (start..start + count)
        .map(|k| (k as f64 * std::f64::consts::PI / length).powi(2))
        .collect()
}

/// The first `count` eigenvalues π²(p²/a² + q²/b²) of the rectangle (0,a)×(0,b).
pub fn rectangle_laplacian(a: f64, b: f64, bc: BaseCondition, count: usize) -> Vec<f64> {
    let pi2 = std::f64::consts::PI.powi(2);
    let start = match bc {
        BaseCondition::Neumann => 0usize,
        BaseCondition::Dirichlet => 1,
    };
    // Weyl estimate for the cutoff, enlarged until enough values are found.
    let mut cutoff = 4.0 * std::f64::consts::PI * count as f64 / (a * b) * 1.5 + pi2 * (1.0 / (a * a) + 1.0 / (b * b)) * 4.0;
    loop {
        let mut vals = Vec::new();
        let pmax = (cutoff.sqrt() * a / std::f64::consts::PI) as usize + 1;
        let qmax = (cutoff.sqrt() * b / std::f64::consts::PI) as usize + 1;
        for p in start..=pmax {
            for q in start..=qmax {
                let v = pi2 * ((p * p) as f64 / (a * a) + (q * q) as f64 / (b * b));
                if v <= cutoff {
                    vals.push(v);
                }
            }
        }
        if vals.len() >= count {
            vals.sort_by(f64::total_cmp);
            vals.truncate(count);
            return vals;
        }
        cutoff *= 2.0;
    }
}

/// √μ tanh(√μ h) for Neumann base eigenvalues μ.
pub fn cylinder_sn_values(base: &[f64], depth: f64, count: usize) -> Result<Vec<f64>> {
    if base.len() < count {
        return Err(Error::InvalidArgument(format!(
            "base spectrum has {} values, {count} requested",
            base.len()
        )));
    }
    if base.first().is_some_and(|m| *m > TOL_ZERO_EXACT) {
        return Err(Error::InvalidArgument("Neumann base spectrum must start with 0".into()));
    }
    let mut v: Vec<f64> = base[..count]
        .iter()
        .map(|&mu| {
            let s = mu.max(0.0).sqrt();
            s * stable_tanh(s * depth)
        })
        .collect();
    v.sort_by(f64::total_cmp);
    Ok(v)
}

/// √λ coth(√λ h) for Dirichlet base eigenvalues λ > 0.
pub fn cylinder_sd_values(base: &[f64], depth: f64, count: usize) -> Result<Vec<f64>> {
    if base.len() < count {
        return Err(Error::InvalidArgument(format!(
            "base spectrum has {} values, {count} requested",
            base.len()
        )));
    }
    if base.iter().take(count).any(|l| *l <= 0.0) {
        return Err(Error::InvalidArgument(
            "Dirichlet base eigenvalues must be positive (coth is singular at 0)".into(),
        ));
    }
    let mut v: Vec<f64> = base[..count]
        .iter()
        .map(|&lam| {
            let s = lam.sqrt();
            s * stable_coth(s * depth)
        })
        .collect();
    v.sort_by(f64::total_cmp);
    Ok(v)
}

fn rectangle_meta(length: f64, depth: f64) -> DomainMeta {
    DomainMeta {
        area_f: length,
        dim: 2,
        alpha: Some(std::f64::consts::FRAC_PI_2),
        beta: Some(std::f64::consts::FRAC_PI_2),
        depth: Some(depth),
        john: Some(true),
    }
}

/// Sloshing spectrum of (0, ℓ) × (−h, 0): (kπ/ℓ) tanh(kπh/ℓ), k = 0, 1, …
pub fn rectangle_sn(length: f64, depth: f64, count: usize) -> Result<Spectrum> {
    check_rect(length, depth, count)?;
    let base = interval_laplacian(length, BaseCondition::Neumann, count);
    let v = cylinder_sn_values(&base, depth, count)?;
    Spectrum::new(Problem::Sn, v, Source::Exact, rectangle_meta(length, depth), TOL_ZERO_EXACT)
}

/// Steklov–Dirichlet spectrum of (0, ℓ) × (−h, 0): (jπ/ℓ) coth(jπh/ℓ), j ≥ 1.
pub fn rectangle_sd(length: f64, depth: f64, count: usize) -> Result<Spectrum> {
    check_rect(length, depth, count)?;
    let base = interval_laplacian(length, BaseCondition::Dirichlet, count);
    let v = cylinder_sd_values(&base, depth, count)?;
    Spectrum::new(Problem::Sd, v, Source::Exact, rectangle_meta(length, depth), TOL_ZERO_EXACT)
}

fn check_rect(length: f64, depth: f64, count: usize) -> Result<()> {
    if !(length > 0.0 && depth > 0.0) || count == 0 {
        return Err(Error::InvalidArgument(
            "rectangle spectra need ℓ > 0, h > 0 and count ≥ 1".into(),
        ));
    }
    Ok(())
}

/// Base Laplacian eigenvalues of a cylinder's cross-section.
pub fn base_laplacian(c: &CylinderDomain, bc: BaseCondition, count: usize) -> Result<Vec<f64>> {
    match c.base() {
        CylinderBase::Interval { length } => Ok(interval_laplacian(*length, bc, count)),
        CylinderBase::Rectangle { a, b } => Ok(rectangle_laplacian(*a, *b, bc, count)),
        CylinderBase::Explicit { neumann, dirichlet, .. } => {
            let list = match bc {
                BaseCondition::Neumann => neumann,
                BaseCondition::Dirichlet => dirichlet,
            };
            if list.len() < count {
                return Err(Error::InvalidArgument(format!(
                    "explicit base has {} {:?} eigenvalues, {count} requested",
                    list.len(),
                    bc
                )));
            }
            Ok(list[..count].to_vec())
        }
    }
}

/// Exact spectrum of a cylinder by separation of variables.
pub fn cylinder_spectrum(c: &CylinderDomain, problem: Problem, count: usize) -> Result<Spectrum> {
    if count == 0 {
        return Err(Error::InvalidArgument("count must be ≥ 1".into()));
    }
    let values = match problem {
        Problem::Sn => {
            cylinder_sn_values(&base_laplacian(c, BaseCondition::Neumann, count)?, c.depth(), count)?
        }
        Problem::Sd => {
            cylinder_sd_values(&base_laplacian(c, BaseCondition::Dirichlet, count)?, c.depth(), count)?
        }
    };
    let meta = DomainMeta::for_domain(&Domain::Cylinder(c.clone()));
    Spectrum::new(problem, values, Source::Exact, meta, TOL_ZERO_EXACT)
}
