//! Two-term asymptotics in two dimensions and fitting of the second
//! coefficient from computed spectra.

use std::f64::consts::{FRAC_PI_2, PI};

use serde::Serialize;

use crate::bounds::{FlagStatus, HypothesisFlag};
use crate::error::{Error, Result};
use crate::fem::FEM_TOL_ZERO;
use crate::riesz::{riesz_mean, RieszCurve};
use crate::specfun::{cot_angle, weyl_constant};
use crate::spectra::{Problem, Spectrum};

/// Fraction of the second-term size that a FEM error may reach inside a fit
/// window.
pub const FEM_WINDOW_FRACTION: f64 = 0.1;

/// Fewest sample points a fit accepts.
pub const MIN_FIT_POINTS: usize = 4;

const ANGLE_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AsymptoticPrediction {
    pub problem: Problem,
    pub length: f64,
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    /// C_{2,γ}·L.
    pub leading: f64,
    /// ±(π/8)(1/α + 1/β).
    pub second: f64,
    pub hypothesis_flags: Vec<HypothesisFlag>,
}

impl AsymptoticPrediction {
    /// Angles must lie in (0, π/2]. `local_john` tells whether the domain is
    /// locally a John domain near right-angled corners, if known.
    pub fn new(
        problem: Problem,
        length: f64,
        alpha: f64,
        beta: f64,
        gamma: f64,
        local_john: Option<bool>,
    ) -> Result<Self> {
        check_angles(alpha, beta)?;
        if !(length > 0.0 && length.is_finite()) {
            return Err(Error::InvalidArgument(format!("free length must be positive, got {length}")));
        }
        let leading = weyl_constant(2, gamma)? * length;
        let mag = second_magnitude(alpha, beta);
        let second = match problem {
            Problem::Sn => mag,
            Problem::Sd => -mag,
        };
        let mut flags = vec![HypothesisFlag::new(
            "angles_at_most_right",
            FlagStatus::Satisfied,
            format!("α = {alpha}, β = {beta} ∈ (0, π/2]"),
        )];
        let right = is_right(alpha) || is_right(beta);
        if right {
            flags.push(HypothesisFlag::from_option(
                "local_john_at_right_angles",
                local_john,
                "near a right-angled corner the domain lies over the free surface",
            ));
        }
        Ok(Self { problem, length, alpha, beta, gamma, leading, second, hypothesis_flags: flags })
    }

    pub fn eval(&self, z: f64) -> f64 {
        self.leading * z.powf(self.gamma + 1.0) + self.second * z.powf(self.gamma)
    }
}

fn is_right(a: f64) -> bool {
    (a - FRAC_PI_2).abs() <= ANGLE_SLACK
}

fn check_angles(alpha: f64, beta: f64) -> Result<()> {
    for (name, a) in [("α", alpha), ("β", beta)] {
        if !(a > 0.0) || a > FRAC_PI_2 + ANGLE_SLACK {
            return Err(Error::Hypothesis(format!(
                "{name} = {a} is outside (0, π/2], where the two-term asymptotics are established"
            )));
        }
    }
    Ok(())
}

/// (π/8)(1/α + 1/β).
pub fn second_magnitude(alpha: f64, beta: f64) -> f64 {
    PI / 8.0 * (1.0 / alpha + 1.0 / beta)
}

/// Coefficient (1/2π)(cot α + cot β) of z in the corner-angle lower bound.
pub fn triangle_bound_coefficient(alpha: f64, beta: f64) -> f64 {
    (cot_angle(alpha) + cot_angle(beta)) / (2.0 * PI)
}

/// C_{2,γ}Lz^{γ+1} ± (π/8)(1/α + 1/β)z^γ, plus for SN, minus for SD.
pub fn two_term_riesz(problem: Problem, length: f64, alpha: f64, beta: f64, gamma: f64, z: f64) -> Result<f64> {
    if !(gamma >= 0.0) {
        return Err(Error::InvalidArgument(format!("γ must be ≥ 0, got {gamma}")));
    }
    if !(z >= 0.0) {
        return Err(Error::InvalidArgument(format!("z must be ≥ 0, got {z}")));
    }
    Ok(AsymptoticPrediction::new(problem, length, alpha, beta, gamma, None)?.eval(z))
}

/// (π/L)(k − ½) ∓ (π²/8L)(1/α + 1/β) with 1-based k (ν₁ = 0 for SN).
/// SN takes the minus sign, SD the plus sign.
pub fn two_term_eigenvalue(problem: Problem, length: f64, alpha: f64, beta: f64, k: usize) -> Result<f64> {
    check_angles(alpha, beta)?;
    if k == 0 {
        return Err(Error::InvalidArgument("eigenvalue index is 1-based".into()));
    }
    let shift = PI / length * second_magnitude(alpha, beta);
    let base = PI / length * (k as f64 - 0.5);
    Ok(match problem {
        Problem::Sn => base - shift,
        Problem::Sd => base + shift,
    })
}

/// Data a second-term fit can run on.
#[derive(Debug, Clone, Copy)]
pub enum FitInput<'a> {
    Spectrum(&'a Spectrum),
    Curve(&'a RieszCurve),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SecondTermFit {
    pub coefficient: f64,
    pub stderr: f64,
    /// Coefficient of the 1/z nuisance term.
    pub nuisance: f64,
    pub samples: usize,
    pub window: [f64; 2],
}

/// Least-squares fit of y(z) = (R_γ(z) − C_{2,γ}Lz^{γ+1})/z^γ against
/// a + b/z over `window`, returning a and its standard error.
///
/// On a spectrum the samples are the midpoints between consecutive
/// eigenvalues inside the window, where the bounded oscillation of R_γ is
/// in a fixed phase; on a curve they are the curve's own grid points.
pub fn fit_second_term(input: FitInput<'_>, gamma: f64, length: f64, window: [f64; 2]) -> Result<SecondTermFit> {
    let [z1, z2] = window;
    if !(z1 > 0.0 && z2 > z1) {
        return Err(Error::InvalidArgument(format!("fit window [{z1}, {z2}] must satisfy 0 < z₁ < z₂")));
    }
    if !(length > 0.0) {
        return Err(Error::InvalidArgument(format!("free length must be positive, got {length}")));
    }
    let lead = weyl_constant(2, gamma)? * length;
    let (zs, rs): (Vec<f64>, Vec<f64>) = match input {
        FitInput::Spectrum(s) => {
            let ceiling = s.validity_ceiling();
            if z2 > ceiling {
                return Err(Error::AboveCeiling { z: z2, ceiling });
            }
            let zs: Vec<f64> = s
                .values()
                .windows(2)
                .map(|w| 0.5 * (w[0] + w[1]))
                .filter(|z| *z >= z1 && *z <= z2)
                .collect();
            let rs = zs.iter().map(|&z| riesz_mean(s, gamma, z)).collect::<Result<Vec<_>>>()?;
            (zs, rs)
        }
        FitInput::Curve(c) => {
            if c.gamma != gamma {
                return Err(Error::InvalidArgument(format!("curve has γ = {}, fit asked for {gamma}", c.gamma)));
            }
            if z2 > c.validity_ceiling {
                return Err(Error::AboveCeiling { z: z2, ceiling: c.validity_ceiling });
            }
            c.grid.iter().zip(&c.values).filter(|(z, _)| **z >= z1 && **z <= z2).map(|(z, r)| (*z, *r)).unzip()
        }
    };
    let ys: Vec<f64> = zs
        .iter()
        .zip(&rs)
        .map(|(&z, &r)| (r - lead * z.powf(gamma + 1.0)) / z.powf(gamma))
        .collect();
    let xs: Vec<f64> = zs.iter().map(|z| 1.0 / z).collect();
    let (a, b, se) = affine_fit(&xs, &ys)?;
    Ok(SecondTermFit { coefficient: a, stderr: se, nuisance: b, samples: xs.len(), window })
}

/// Ordinary least squares y = a + b·x; returns (a, b, stderr of a).
fn affine_fit(xs: &[f64], ys: &[f64]) -> Result<(f64, f64, f64)> {
    let m = xs.len();
    if m < MIN_FIT_POINTS {
        return Err(Error::IllConditioned(format!(
            "{m} sample points in the window, at least {MIN_FIT_POINTS} needed"
        )));
    }
    let mf = m as f64;
    let xbar = xs.iter().sum::<f64>() / mf;
    let ybar = ys.iter().sum::<f64>() / mf;
    let sxx: f64 = xs.iter().map(|x| (x - xbar).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - xbar) * (y - ybar)).sum();
    let spread = xs.iter().map(|x| x * x).sum::<f64>() / mf;
    if !(sxx > 1e-10 * mf * spread) {
        return Err(Error::IllConditioned("window too narrow to separate the constant from the 1/z term".into()));
    }
    let b = sxy / sxx;
    let a = ybar - b * xbar;
    let rss: f64 = xs.iter().zip(ys).map(|(x, y)| (y - a - b * x).powi(2)).sum();
    let sigma2 = rss / (mf - 2.0);
    let se = (sigma2 * (1.0 / mf + xbar * xbar / sxx)).sqrt();
    Ok((a, b, se))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ShiftFit {
    /// Mean of ν_k L − πk + π/2.
    pub mean: f64,
    pub stderr: f64,
    pub samples: usize,
}

/// Eigenvalue-level fit: the mean of ν_k L − πk + π/2 over `k_range`
/// (1-based, inclusive), which two_term_eigenvalue predicts to be
/// ∓(π²/8)(1/α + 1/β).
pub fn fit_eigenvalue_shift(s: &Spectrum, length: f64, k_range: (usize, usize)) -> Result<ShiftFit> {
    let (k1, k2) = k_range;
    if k1 == 0 || k2 < k1 {
        return Err(Error::InvalidArgument(format!("bad index range {k1}..={k2}")));
    }
    if k2 > s.len() {
        return Err(Error::IndexOutOfRange { index: k2, len: s.len() });
    }
    let d: Vec<f64> = (k1..=k2)
        .map(|k| s.values()[k - 1] * length - PI * k as f64 + FRAC_PI_2)
        .collect();
    let m = d.len() as f64;
    let mean = d.iter().sum::<f64>() / m;
    let stderr = if d.len() > 1 {
        (d.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (m - 1.0) / m).sqrt()
    } else {
        f64::NAN
    };
    Ok(ShiftFit { mean, stderr, samples: d.len() })
}

/// Largest z such that every FEM eigenvalue below z has relative error
/// under FEM_WINDOW_FRACTION·|c|/(C_{2,γ}Lz), the relative size of a second
/// term with coefficient c. Exact spectra return their validity ceiling.
pub fn fem_window_limit(s: &Spectrum, coefficient: f64, length: f64, gamma: f64) -> Result<f64> {
    let ceiling = s.validity_ceiling();
    let Some(errors) = s.errors() else { return Ok(ceiling) };
    let scale = FEM_WINDOW_FRACTION * coefficient.abs() / (weyl_constant(2, gamma)? * length);
    let mut limit = f64::INFINITY;
    for (&v, &e) in s.values().iter().zip(errors) {
        if v >= limit {
            break;
        }
        if v <= FEM_TOL_ZERO {
            continue;
        }
        if e > 0.0 {
            limit = limit.min(scale * v / e);
        }
    }
    Ok(limit.min(ceiling))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FitReport {
    pub model: String,
    pub window: [f64; 2],
    pub coefficient: f64,
    pub stderr: f64,
    /// Predicted second coefficient; None where an angle exceeds π/2 or is
    /// unknown.
    pub prediction: Option<f64>,
    pub hypothesis_flags: Vec<HypothesisFlag>,
    pub problem: Problem,
    pub gamma: f64,
    pub length: f64,
    pub nuisance: f64,
    pub samples: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bound_coefficient: Option<f64>,
    pub notes: Vec<String>,
}

impl FitReport {
    pub fn to_json(&self) -> Result<String> {
        crate::report::to_json(self)
    }
}

/// Fits the second coefficient of a spectrum over `window` and attaches the
/// prediction for the spectrum's corner angles. FEM spectra get their window
/// clipped to fem_window_limit for the predicted coefficient.
pub fn fit_report(s: &Spectrum, gamma: f64, window: [f64; 2]) -> Result<FitReport> {
    let meta = s.meta();
    if meta.dim != 2 {
        return Err(Error::Unsupported("second-term fits are implemented for planar domains".into()));
    }
    let length = meta.area_f;
    let mut notes = vec![format!(
        "model (R_γ(z) − C_(2,γ)·L·z^(γ+1))/z^γ = a + b/z, sampled at midpoints of consecutive eigenvalues"
    )];
    let mut flags = Vec::new();
    let (prediction, bound_coefficient) = match (meta.alpha, meta.beta) {
        (Some(a), Some(b)) => match AsymptoticPrediction::new(s.problem(), length, a, b, gamma, meta.john) {
            Ok(p) => {
                flags = p.hypothesis_flags.clone();
                let bc = (s.problem() == Problem::Sn).then(|| triangle_bound_coefficient(a, b));
                (Some(p.second), bc)
            }
            Err(Error::Hypothesis(msg)) => {
                flags.push(HypothesisFlag::new("angles_at_most_right", FlagStatus::Violated, msg));
                notes.push("no theorem coverage: prediction left empty".into());
                (None, None)
            }
            Err(e) => return Err(e),
        },
        _ => {
            flags.push(HypothesisFlag::new("angles_at_most_right", FlagStatus::Unknown, "corner angles not known"));
            notes.push("no theorem coverage: prediction left empty".into());
            (None, None)
        }
    };
    let mut window = window;
    if s.errors().is_some() {
        let target = prediction.unwrap_or(0.5);
        let limit = fem_window_limit(s, target, length, gamma)?;
        if limit < window[1] {
            notes.push(format!("window clipped from {} to the FEM certification limit {limit}", window[1]));
            window[1] = limit;
        }
    }
    let fit = fit_second_term(FitInput::Spectrum(s), gamma, length, window)?;
    Ok(FitReport {
        model: "a + b/z".into(),
        window: fit.window,
        coefficient: fit.coefficient,
        stderr: fit.stderr,
        prediction,
        hypothesis_flags: flags,
        problem: s.problem(),
        gamma,
        length,
        nuisance: fit.nuisance,
        samples: fit.samples,
        bound_coefficient,
        notes,
    })
}
