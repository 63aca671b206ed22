//! The wall integral W(R) = ∫₀^R r^{n−1} ∫_B ⟨n, e_n⟩ e^{2x_n r} ds dr and
//! the quantities built from it: A_{n,1} = −K_n W, A_{n,γ} and c_B.

use std::cell::RefCell;
use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{ConeDomain, Domain, PolygonalDomain};
use crate::quad::{adaptive, GaussRule};
use crate::riesz::iterate_function;
use crate::specfun::{lower_incomplete_gamma, unit_ball_volume};

/// How the wall integral is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum AtermMode {
    #[default]
    ClosedForm,
    /// Nested adaptive Gauss–Kronrod of the defining integral.
    Quadrature,
}

const QUAD_REL: f64 = 1e-13;

/// K_n = (n−1)ω_{n−1}/(2π)^{n−1}; K₂ = 1/π, K₃ = 1/(2π).
pub fn wall_constant(n: u32) -> f64 {
    (n as f64 - 1.0) * unit_ball_volume(n - 1) / (2.0 * PI).powi(n as i32 - 1)
}

/// φ(x) = (1 − e^{−x}(1 + x))/x², the derivative of Φ(x) = (e^{−x} − 1)/x.
fn phi(x: f64) -> f64 {
    if x.abs() < 0.1 {
        // Σ_{m≥2} (−1)^m (m−1)/m! x^{m−2}
        let mut sum = 0.0;
        let mut fact = 2.0;
        let mut pow = 1.0;
        for m in 2..16 {
            if m > 2 {
                fact *= m as f64;
                pow *= -x;
            }
            sum += (m as f64 - 1.0) / fact * pow;
        }
        sum
    } else {
        (1.0 - (-x).exp() * (1.0 + x)) / (x * x)
    }
}

fn big_phi(x: f64) -> f64 {
    if x == 0.0 {
        -1.0
    } else {
        (-x).exp_m1() / x
    }
}

/// Divided difference (Φ(b) − Φ(a))/(b − a), switching to the mean of φ
/// when the points are close.
fn phi_divided_difference(a: f64, b: f64) -> f64 {
    if (b - a).abs() < 1e-3 * a.abs().max(b.abs()).max(1.0) {
        GaussRule::new(8).integrate(0.0, 1.0, |s| phi(a + (b - a) * s))
    } else {
        (big_phi(b) - big_phi(a)) / (b - a)
    }
}

fn check_radius(r: f64) -> Result<()> {
    if !(r >= 0.0) || !r.is_finite() {
        return Err(Error::InvalidArgument(format!("z must be finite and ≥ 0, got {r}")));
    }
    Ok(())
}

/// Polygon wall integral, edge by edge: a straight edge with endpoints at
/// x = −2Ry_a, −2Ry_b contributes R²·(n_y ℓ)·(Φ(x_b) − Φ(x_a))/(x_b − x_a).
fn polygon_wall_closed(d: &PolygonalDomain, r: f64) -> f64 {
    d.wall_edges()
        .map(|e| {
            let ny_len = -(e.b.x - e.a.x);
            ny_len * phi_divided_difference(-2.0 * r * e.a.y, -2.0 * r * e.b.y)
        })
        .sum::<f64>()
        * r
        * r
}

/// Runs a fallible integrand inside `adaptive`, keeping the first error.
fn nested<F: Fn(f64) -> Result<f64>>(f: F, a: f64, b: f64, rel: f64) -> Result<f64> {
    let err: RefCell<Option<Error>> = RefCell::new(None);
    let out = adaptive(
        |x| match f(x) {
            Ok(v) => v,
            Err(e) => {
                err.borrow_mut().get_or_insert(e);
                0.0
            }
        },
        a,
        b,
        0.0,
        rel,
    );
    if let Some(e) = err.into_inner() {
        return Err(e);
    }
    Ok(out?.value)
}

fn polygon_wall_quadrature(d: &PolygonalDomain, r: f64) -> Result<f64> {
    if r == 0.0 {
        return Ok(0.0);
    }
    let mut total = 0.0;
    for e in d.wall_edges() {
        let len = e.length();
        let ny = e.normal_y();
        if ny == 0.0 {
            continue;
        }
        let outer = nested(
            |t| {
                let inner = nested(
                    |s| {
                        let y = e.a.y + (e.b.y - e.a.y) * s / len;
                        Ok((2.0 * y * t).exp())
                    },
                    0.0,
                    len,
                    QUAD_REL,
                )?;
                Ok(t * inner)
            },
            0.0,
            r,
            QUAD_REL,
        )?;
        total += ny * outer;
    }
    Ok(total)
}

/// |F| γ(n, 2hR)/(2h)^n, the flat bottom of a cylinder (with sign −).
fn cylinder_wall_closed(area: f64, h: f64, n: u32, r: f64) -> Result<f64> {
    Ok(-area * lower_incomplete_gamma(n, 2.0 * h * r)? / (2.0 * h).powi(n as i32))
}

fn cylinder_wall_quadrature(area: f64, h: f64, n: u32, r: f64) -> Result<f64> {
    if r == 0.0 {
        return Ok(0.0);
    }
    let v = nested(|t| Ok(t.powi(n as i32 - 1) * (-2.0 * h * t).exp()), 0.0, r, QUAD_REL)?;
    Ok(-area * v)
}

/// 1/(|tan α| tan α): 1/tan²α for the acute cone, continued with a sign
/// flip for obtuse α.
fn cone_factor(alpha: f64) -> f64 {
    let t = alpha.tan();
    1.0 / (t.abs() * t)
}

/// Cone wall: ∫_B ⟨n, e₃⟩ e^{−2tr} ds = −2π/(|tan α| tan α) ∫₀^h (h − t) e^{−2tr} dt
/// at depth t, which integrates to −(π/(2|tan α| tan α))(hR² − R + (1 − e^{−2hR})/(2h)).
fn cone_wall_closed(c: &ConeDomain, r: f64) -> f64 {
    let h = c.depth();
    let bracket = h * r * r - r - (-2.0 * h * r).exp_m1() / (2.0 * h);
    -0.5 * PI * cone_factor(c.alpha()) * bracket
}

/// Surface integral over the cone wall parametrized by depth: radius
/// ρ = (h − t)/tan α, slant element dt/sin α, normal component −cos α.
fn cone_wall_quadrature(c: &ConeDomain, r: f64) -> Result<f64> {
    if r == 0.0 {
        return Ok(0.0);
    }
    let (alpha, h) = (c.alpha(), c.depth());
    let coef = if alpha < PI / 2.0 {
        let (s, co) = alpha.sin_cos();
        -co * 2.0 * PI / (alpha.tan() * s)
    } else {
        // Formal continuation past α = π/2, matching the closed form.
        -2.0 * PI * cone_factor(alpha)
    };
    let weight = |t: f64| coef * (h - t);
    nested(
        |rr| {
            let inner = nested(|t| Ok(weight(t) * (-2.0 * t * rr).exp()), 0.0, h, QUAD_REL)?;
            Ok(rr * rr * inner)
        },
        0.0,
        r,
        QUAD_REL,
    )
}

/// W(R) for any supported domain.
pub fn wall_integral(d: &Domain, r: f64, mode: AtermMode) -> Result<f64> {
    check_radius(r)?;
    match (d, mode) {
        (Domain::Polygon(p), AtermMode::ClosedForm) => Ok(polygon_wall_closed(p, r)),
        (Domain::Polygon(p), AtermMode::Quadrature) => polygon_wall_quadrature(p, r),
        (Domain::Cylinder(c), mode) => {
            // Vertical walls contribute nothing; only the bottom counts.
            let (a, h, n) = (c.base_area(), c.depth(), c.dimension());
            match mode {
                AtermMode::ClosedForm => cylinder_wall_closed(a, h, n, r),
                AtermMode::Quadrature => cylinder_wall_quadrature(a, h, n, r),
            }
        }
        (Domain::Cone(c), AtermMode::ClosedForm) => Ok(cone_wall_closed(c, r)),
        (Domain::Cone(c), AtermMode::Quadrature) => cone_wall_quadrature(c, r),
    }
}

/// A_{2,1}(z) = −(1/π) W(z) for a polygon, closed form.
pub fn a21_polygon(d: &PolygonalDomain, z: f64) -> f64 {
    -polygon_wall_closed(d, z.max(0.0)) / PI
}

/// A_{n,1}(z) = −K_n W(z).
pub fn a_n1(d: &Domain, z: f64) -> Result<f64> {
    a_n1_with(d, z, AtermMode::ClosedForm)
}

pub fn a_n1_with(d: &Domain, z: f64, mode: AtermMode) -> Result<f64> {
    Ok(-wall_constant(d.dimension()) * wall_integral(d, z, mode)?)
}

/// A_{n,γ}(z) = γ(γ−1) ∫₀^z (z−t)^{γ−2} A_{n,1}(t) dt for γ > 1, i.e. the
/// Riesz iteration of A_{n,1} by ρ = γ − 1.
pub fn a_ngamma(d: &Domain, g: f64, z: f64) -> Result<f64> {
    a_ngamma_with(d, g, z, AtermMode::ClosedForm)
}

pub fn a_ngamma_with(d: &Domain, g: f64, z: f64, mode: AtermMode) -> Result<f64> {
    if !(g >= 1.0) || !g.is_finite() {
        return Err(Error::InvalidArgument(format!("A_{{n,γ}} needs γ ≥ 1, got {g}")));
    }
    if g == 1.0 {
        return a_n1_with(d, z, mode);
    }
    check_radius(z)?;
    let err: RefCell<Option<Error>> = RefCell::new(None);
    let r = iterate_function(
        |t| match a_n1_with(d, t, mode) {
            Ok(v) => v,
            Err(e) => {
                err.borrow_mut().get_or_insert(e);
                0.0
            }
        },
        1.0,
        g - 1.0,
        z,
        &[],
    )?;
    if let Some(e) = err.into_inner() {
        return Err(e);
    }
    Ok(r.value)
}

/// c_B(R) = (n−1)ω_{n−1}|F|^{−1} W(R).
pub fn c_b(d: &Domain, r: f64) -> Result<f64> {
    c_b_with(d, r, AtermMode::ClosedForm)
}

pub fn c_b_with(d: &Domain, r: f64, mode: AtermMode) -> Result<f64> {
    let n = d.dimension();
    Ok((n as f64 - 1.0) * unit_ball_volume(n - 1) / d.free_area() * wall_integral(d, r, mode)?)
}

/// A one-dimensional reduction of the cone's A-term,
/// (1/(4|tan α| tan α)) ∫₀^z (1 − e^{−2hr} − 2hr e^{−2hr}) dr, in
/// closed form: z − (1 − e^{−2hz})/h + z e^{−2hz} inside the bracket.
///
/// This grows like z, while the surface integral it is meant to evaluate
/// grows like z² (see [`a_n1`] for cones); it is kept for comparison only.
pub fn cone_printed_intermediate(alpha: f64, h: f64, z: f64) -> f64 {
    let e = (-2.0 * h * z).exp();
    cone_factor(alpha) / 4.0 * (z + (-2.0 * h * z).exp_m1() / h + z * e)
}

/// The same integrand integrated by adaptive quadrature.
pub fn cone_printed_intermediate_quadrature(alpha: f64, h: f64, z: f64) -> Result<f64> {
    if z == 0.0 {
        return Ok(0.0);
    }
    let v = nested(
        |r| Ok(1.0 - (-2.0 * h * r).exp() - 2.0 * h * r * (-2.0 * h * r).exp()),
        0.0,
        z,
        QUAD_REL,
    )?;
    Ok(cone_factor(alpha) / 4.0 * v)
}
