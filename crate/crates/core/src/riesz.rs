//! Riesz means, counting functions, partial sums, the Riesz iteration, the
//! staircase inequality and the heat trace, all computed from a spectrum.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::par;
use crate::quad::{GaussRule, QuadResult};
use crate::specfun::gamma;
use crate::spectra::{fmt17, Spectrum};

/// Relative tolerance the iteration quadrature must reach.
pub const ITERATION_TOL: f64 = 1e-8;

/// Heat-trace tails must stay below this times (1 + value).
pub const HEAT_TAIL_TOL: f64 = 1e-9;

fn check_gamma(g: f64) -> Result<()> {
    if !(g >= 0.0) || !g.is_finite() {
        return Err(Error::InvalidArgument(format!("Riesz order must be finite and ≥ 0, got {g}")));
    }
    Ok(())
}

fn check_ceiling(s: &Spectrum, z: f64) -> Result<()> {
    let ceiling = s.validity_ceiling();
    if z > ceiling {
        return Err(Error::AboveCeiling { z, ceiling });
    }
    Ok(())
}

/// Σ (z − ν)₊^γ over an ascending list; γ = 0 counts ν < z.
fn riesz_sum(values: &[f64], g: f64, z: f64) -> f64 {
    let below = values.partition_point(|&v| v < z);
    if g == 0.0 {
        return below as f64;
    }
    values[..below].iter().map(|&v| (z - v).powf(g)).sum()
}

/// R_γ(z) = Σ (z − ν_j)₊^γ, and N(z) = #{ν_j < z} for γ = 0.
pub fn riesz_mean(s: &Spectrum, g: f64, z: f64) -> Result<f64> {
    check_gamma(g)?;
    check_ceiling(s, z)?;
    Ok(riesz_sum(s.values(), g, z))
}

/// N(z) with the strict inequality ν_j < z.
pub fn counting_function(s: &Spectrum, z: f64) -> Result<usize> {
    check_ceiling(s, z)?;
    Ok(s.values().partition_point(|&v| v < z))
}

/// Uncertainty of R_γ(z) induced by per-eigenvalue error estimates: the sum
/// of err_j·γ·z^{γ−1} over ν_j − err_j < z, or for γ = 0 the number of
/// eigenvalues whose error interval contains z. Zero for exact spectra.
pub fn riesz_tolerance(s: &Spectrum, g: f64, z: f64) -> f64 {
    let Some(errors) = s.errors() else { return 0.0 };
    let pairs = s.values().iter().zip(errors);
    if g == 0.0 {
        return pairs.filter(|(v, e)| (*v - z).abs() <= **e).count() as f64;
    }
    let w = g * z.max(0.0).powf(g - 1.0);
    pairs.filter(|(v, e)| *v - *e < z).map(|(_, e)| e * w).sum()
}

/// Sampled Riesz mean with the data needed to evaluate it between samples.
#[derive(Debug, Clone, PartialEq)]
pub struct RieszCurve {
    pub gamma: f64,
    pub grid: Vec<f64>,
    pub values: Vec<f64>,
    pub validity_ceiling: f64,
    /// Eigenvalues up to the ceiling, when the curve comes from a spectrum.
    /// Empty for curves given only by samples.
    pub knots: Vec<f64>,
}

impl RieszCurve {
    /// A curve known only through samples (e.g. a bound); it is evaluated
    /// by linear interpolation with R(0) = 0.
    pub fn from_samples(g: f64, grid: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        check_gamma(g)?;
        check_grid(&grid)?;
        if values.len() != grid.len() || values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("one finite value per grid point required".into()));
        }
        let validity_ceiling = *grid.last().expect("grid checked nonempty");
        Ok(Self { gamma: g, grid, values, validity_ceiling, knots: Vec::new() })
    }

    /// R_γ(t) for 0 ≤ t ≤ ceiling.
    pub fn eval(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return 0.0;
        }
        if !self.knots.is_empty() {
            return riesz_sum(&self.knots, self.gamma, t);
        }
        let i = self.grid.partition_point(|&x| x < t);
        if i == 0 {
            let (x1, y1) = (self.grid[0], self.values[0]);
            return if x1 > 0.0 { y1 * t / x1 } else { y1 };
        }
        if i == self.grid.len() {
            return *self.values.last().unwrap();
        }
        let (x0, x1) = (self.grid[i - 1], self.grid[i]);
        let (y0, y1) = (self.values[i - 1], self.values[i]);
        y0 + (y1 - y0) * (t - x0) / (x1 - x0)
    }

    /// Breakpoints where the curve fails to be smooth.
    fn breakpoints(&self) -> &[f64] {
        if self.knots.is_empty() {
            &self.grid
        } else {
            &self.knots
        }
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# gamma={}", fmt17(self.gamma));
        let _ = writeln!(out, "# ceiling={}", fmt17(self.validity_ceiling));
        out.push_str("z,value\n");
        for (z, v) in self.grid.iter().zip(&self.values) {
            let _ = writeln!(out, "{},{}", fmt17(*z), fmt17(*v));
        }
        out
    }
}

fn check_grid(grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::InvalidArgument("empty z grid".into()));
    }
    if grid.iter().any(|z| !z.is_finite() || *z < 0.0) {
        return Err(Error::InvalidArgument("grid points must be finite and ≥ 0".into()));
    }
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidArgument("grid must be strictly increasing".into()));
    }
    Ok(())
}

/// R_γ on a grid. Fails on the first grid point above the ceiling.
pub fn riesz_curve(s: &Spectrum, g: f64, grid: &[f64]) -> Result<RieszCurve> {
    check_gamma(g)?;
    check_grid(grid)?;
    let ceiling = s.validity_ceiling();
    if let Some(&z) = grid.iter().find(|&&z| z > ceiling) {
        return Err(Error::AboveCeiling { z, ceiling });
    }
    let values = par::map_slice(grid, |&z| riesz_sum(s.values(), g, z));
    Ok(RieszCurve {
        gamma: g,
        grid: grid.to_vec(),
        values,
        validity_ceiling: ceiling,
        knots: s.values().to_vec(),
    })
}

/// Γ(γ+ρ+1)/(Γ(γ+1)Γ(ρ)) ∫₀^z (z−t)^{ρ−1} f(t) dt, with panels aligned to
/// `knots` (where f may be non-smooth). For ρ < 1 the substitution
/// u = (z−t)^ρ removes the endpoint singularity. The error is estimated by
/// comparing against a run with every panel halved.
pub fn iterate_function<F: Fn(f64) -> f64>(
    f: F,
    g: f64,
    rho: f64,
    z: f64,
    knots: &[f64],
) -> Result<QuadResult> {
    check_gamma(g)?;
    if !(rho > 0.0) || !rho.is_finite() {
        return Err(Error::InvalidArgument(format!("iteration step ρ must be > 0, got {rho}")));
    }
    if !(z >= 0.0) {
        return Err(Error::InvalidArgument(format!("z must be ≥ 0, got {z}")));
    }
    let coeff = gamma(g + rho + 1.0) / (gamma(g + 1.0) * gamma(rho));
    if z == 0.0 {
        return Ok(QuadResult { value: 0.0, error: 0.0 });
    }
    let mut ts: Vec<f64> = std::iter::once(0.0)
        .chain(knots.iter().copied().filter(|&k| k > 0.0 && k < z))
        .chain(std::iter::once(z))
        .collect();
    ts.dedup();
    let substitute = rho < 1.0;
    let breaks: Vec<f64> = if substitute {
        let mut u: Vec<f64> = ts.iter().map(|&t| (z - t).max(0.0).powf(rho)).collect();
        u.reverse();
        u
    } else {
        ts
    };
    let integrand = |x: f64| -> f64 {
        if substitute {
            f(z - x.powf(1.0 / rho)) / rho
        } else {
            (z - x).max(0.0).powf(rho - 1.0) * f(x)
        }
    };
    // Non-integer orders put power singularities at panel ends; the
    // smoothstep map t = a + (b−a)(3w² − 2w³) flattens them.
    let smooth = g.fract() != 0.0 || rho.fract() != 0.0;
    let rule = GaussRule::new(8);
    let panel = |a: f64, b: f64| -> f64 {
        if smooth {
            rule.integrate(0.0, 1.0, |w| {
                let s = w * w * (3.0 - 2.0 * w);
                integrand(a + (b - a) * s) * (b - a) * 6.0 * w * (1.0 - w)
            })
        } else {
            rule.integrate(a, b, integrand)
        }
    };
    let sweep = |pieces: usize| -> f64 {
        breaks
            .windows(2)
            .map(|w| {
                let step = (w[1] - w[0]) / pieces as f64;
                (0..pieces)
                    .map(|i| {
                        let a = w[0] + step * i as f64;
                        let b = if i + 1 == pieces { w[1] } else { a + step };
                        panel(a, b)
                    })
                    .sum::<f64>()
            })
            .sum()
    };
    let mut pieces = 1;
    let mut coarse = sweep(pieces);
    loop {
        let fine = sweep(2 * pieces);
        let error = (fine - coarse).abs();
        if error <= ITERATION_TOL * fine.abs().max(1.0) {
            return Ok(QuadResult { value: coeff * fine, error: coeff * error });
        }
        if pieces >= 64 {
            return Err(Error::Quadrature {
                estimate: coeff * error,
                tolerance: coeff * ITERATION_TOL * fine.abs().max(1.0),
            });
        }
        pieces *= 2;
        coarse = fine;
    }
}

/// R_{γ+ρ}(z) from a curve of order γ via the Riesz iteration.
pub fn riesz_iterate(curve: &RieszCurve, rho: f64, z: f64) -> Result<f64> {
    riesz_iterate_with_error(curve, rho, z).map(|r| r.value)
}

pub fn riesz_iterate_with_error(curve: &RieszCurve, rho: f64, z: f64) -> Result<QuadResult> {
    if z > curve.validity_ceiling {
        return Err(Error::AboveCeiling { z, ceiling: curve.validity_ceiling });
    }
    if curve.knots.is_empty() && z > *curve.grid.last().unwrap() {
        return Err(Error::InvalidArgument(format!("z = {z} is outside the curve's grid")));
    }
    iterate_function(|t| curve.eval(t), curve.gamma, rho, z, curve.breakpoints())
}

/// Σ_{j=1}^k ν_j in stored order (the sloshing zero mode counts).
pub fn partial_sum(s: &Spectrum, k: usize) -> Result<f64> {
    if k == 0 || k > s.len() {
        return Err(Error::IndexOutOfRange { index: k, len: s.len() });
    }
    Ok(s.values()[..k].iter().sum())
}

pub fn mean_sum(s: &Spectrum, k: usize) -> Result<f64> {
    Ok(partial_sum(s, k)? / k as f64)
}

/// Σ_{k≥0} (R − k)₊ by direct summation.
pub fn staircase_sum(r: f64) -> f64 {
    assert!(r >= 0.0, "staircase_sum needs R ≥ 0");
    let mut sum = 0.0;
    let mut k = 0.0;
    while k < r {
        sum += r - k;
        k += 1.0;
    }
    sum
}

/// (½(R² + R), ½(R² + R + 1)).
pub fn staircase_bounds(r: f64) -> (f64, f64) {
    let base = r * r + r;
    (0.5 * base, 0.5 * (base + 1.0))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HeatTrace {
    pub value: f64,
    /// Bound on the contribution of the eigenvalues not stored.
    pub tail: f64,
}

/// Σ e^{−ν_j t} with the geometric tail bound e^{−ν_last t}/(1 − e^{−gap·t}),
/// gap being the smallest spacing in the last tenth of the spectrum.
pub fn heat_trace(s: &Spectrum, t: f64) -> Result<HeatTrace> {
    if !(t > 0.0) || !t.is_finite() {
        return Err(Error::InvalidArgument(format!("heat trace needs t > 0, got {t}")));
    }
    let v = s.values();
    let value: f64 = v.iter().map(|&x| (-x * t).exp()).sum();
    let start = (v.len() - v.len().div_ceil(10)).min(v.len().saturating_sub(2));
    let gap = v[start..].windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min);
    let last = s.validity_ceiling();
    let tail = if gap.is_finite() && gap > 0.0 {
        (-last * t).exp() / (-(-gap * t).exp_m1())
    } else {
        f64::INFINITY
    };
    if !(tail <= HEAT_TAIL_TOL * (1.0 + value)) {
        return Err(Error::InvalidArgument(format!(
            "heat-trace tail at t = {t} cannot be certified (bound {tail:e}); supply more eigenvalues"
        )));
    }
    Ok(HeatTrace { value, tail })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LegendreBound {
    /// sup_z (kz − U(z)) over the grid.
    pub value: f64,
    pub argmax: f64,
    /// The supremum sits at an end of the grid, so the bound may not be tight.
    pub at_boundary: bool,
}

/// Discrete Legendre transform of a convex upper bound U on R₁; a lower
/// bound on the sum of the first k eigenvalues.
pub fn legendre_sum_bound(curve: &RieszCurve, k: usize) -> Result<LegendreBound> {
    if k == 0 {
        return Ok(LegendreBound { value: 0.0, argmax: 0.0, at_boundary: false });
    }
    let (x, y) = (&curve.grid, &curve.values);
    let scale = y.iter().fold(1.0f64, |m, v| m.max(v.abs()));
    let slopes: Vec<f64> = (1..x.len()).map(|i| (y[i] - y[i - 1]) / (x[i] - x[i - 1])).collect();
    if slopes.windows(2).any(|w| w[1] < w[0] - 1e-10 * scale) {
        return Err(Error::InvalidArgument("Legendre bound needs a convex curve".into()));
    }
    let kf = k as f64;
    let (i, value) = x
        .iter()
        .zip(y)
        .map(|(z, u)| kf * z - u)
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |best, (i, v)| if v > best.1 { (i, v) } else { best });
    Ok(LegendreBound { value, argmax: x[i], at_boundary: i == 0 || i + 1 == x.len() })
}
