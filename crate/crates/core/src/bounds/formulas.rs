//! Closed-form bounds on Riesz means, eigenvalue sums and the heat trace.

use std::f64::consts::PI;

use serde::Serialize;

use super::aterm::{a_ngamma_with, wall_constant, AtermMode};
use crate::error::{Error, Result};
use crate::geometry::{Domain, PolygonalDomain};
use crate::riesz::{iterate_function, partial_sum};
use crate::specfun::{
    berezin_constant, cot_angle, gamma, lower_incomplete_gamma, unit_ball_volume, w_constant,
    weyl_constant,
};
use crate::spectra::{Problem, Spectrum};

fn check_z(z: f64) -> Result<()> {
    if !(z >= 0.0) || !z.is_finite() {
        return Err(Error::InvalidArgument(format!("z must be finite and ≥ 0, got {z}")));
    }
    Ok(())
}

fn check_gamma_ge1(g: f64) -> Result<()> {
    if !(g >= 1.0) || !g.is_finite() {
        return Err(Error::InvalidArgument(format!("this bound needs γ ≥ 1, got {g}")));
    }
    Ok(())
}

fn check_positive(name: &str, v: f64) -> Result<()> {
    if !(v > 0.0) || !v.is_finite() {
        return Err(Error::InvalidArgument(format!("{name} must be positive, got {v}")));
    }
    Ok(())
}

/// C_{n,γ}|F| z^{n+γ−1} + A_{n,γ}(z).
pub fn sn_lower_main(d: &Domain, g: f64, z: f64) -> Result<f64> {
    sn_lower_main_with(d, g, z, AtermMode::ClosedForm)
}

pub fn sn_lower_main_with(d: &Domain, g: f64, z: f64, mode: AtermMode) -> Result<f64> {
    check_gamma_ge1(g)?;
    check_z(z)?;
    let n = d.dimension();
    Ok(weyl_constant(n, g)? * d.free_area() * z.powf(n as f64 + g - 1.0)
        + a_ngamma_with(d, g, z, mode)?)
}

/// C_{n,1}|F|z^n + K_n[m⁻ γ(n, 2hz)/(2h)^n − m⁺ γ(n, 2δz)/(2δ)^n], with
/// m⁻ = ∫_{B⁻}|⟨n,e_n⟩|, m⁺ = ∫_{B⁺}⟨n,e_n⟩, h the depth and δ the overhang.
pub fn sn_lower_split(d: &Domain, z: f64) -> Result<f64> {
    check_z(z)?;
    let n = d.dimension();
    let h = d.depth();
    let (minus, plus) = d.normal_moments();
    let mut a = minus * lower_incomplete_gamma(n, 2.0 * h * z)? / (2.0 * h).powi(n as i32);
    if plus > 0.0 {
        let delta = d.delta_overhang()?.ok_or_else(|| {
            Error::Hypothesis("upward-facing walls present but δ is undefined".into())
        })?;
        a -= plus * lower_incomplete_gamma(n, 2.0 * delta * z)? / (2.0 * delta).powi(n as i32);
    }
    Ok(weyl_constant(n, 1.0)? * d.free_area() * z.powi(n as i32) + wall_constant(n) * a)
}

/// Data of the comparison domain in the two-corner bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TriangleParams {
    pub alpha: f64,
    pub beta: f64,
    /// Depth to which both corner walls are straight segments.
    pub delta: f64,
    /// Length of the remaining wall, |B̃_c|.
    pub bc_length: f64,
    pub area_f: f64,
}

impl TriangleParams {
    pub fn new(alpha: f64, beta: f64, delta: f64, bc_length: f64, area_f: f64) -> Result<Self> {
        for (name, a) in [("α", alpha), ("β", beta)] {
            if !(a > 0.0 && a < PI) {
                return Err(Error::InvalidArgument(format!("{name} = {a} is outside (0, π)")));
            }
        }
        check_positive("δ", delta)?;
        check_positive("|F|", area_f)?;
        if !(bc_length >= 0.0) {
            return Err(Error::InvalidArgument(format!("|B̃c| must be ≥ 0, got {bc_length}")));
        }
        Ok(Self { alpha, beta, delta, bc_length, area_f })
    }

    /// Reads the parameters off a polygon taken as its own comparison domain.
    /// δ is the depth reached by the shorter straight corner wall, capped by
    /// the shallowest upward-facing wall away from the corners. Only upward-facing
    /// wall pieces beyond the corner segments enter |B̃c|: downward-facing
    /// ones contribute a nonnegative amount to A and are dropped, which for
    /// triangles and trapezoids gives |B̃c| = 0 with δ equal to the height.
    pub fn from_polygon(d: &PolygonalDomain) -> Result<Self> {
        let corners = d.corner_angles()?;
        if corners.len() != 2 {
            return Err(Error::Hypothesis(format!(
                "the two-corner bound needs exactly two corner points, found {}",
                corners.len()
            )));
        }
        let (alpha, beta) = d.angle_pair()?;
        let corner_edges: Vec<usize> = corners.iter().map(|c| c.wall_edge).collect();
        let mut delta = corner_edges
            .iter()
            .map(|&i| {
                let e = d.edge(i);
                (-e.a.y).max(-e.b.y)
            })
            .fold(f64::INFINITY, f64::min);
        // Upward-facing walls away from the corners must lie below depth δ.
        let upward_depth = d
            .wall_edges()
            .filter(|e| !corner_edges.contains(&e.index) && e.normal_y() > 0.0)
            .map(|e| (-e.a.y).min(-e.b.y))
            .fold(f64::INFINITY, f64::min);
        delta = delta.min(upward_depth);
        let mut bc = 0.0;
        for e in d.wall_edges() {
            if e.normal_y() <= 0.0 {
                continue;
            }
            if corner_edges.contains(&e.index) {
                let depth = (-e.a.y).max(-e.b.y);
                bc += e.length() * ((depth - delta) / depth).max(0.0);
            } else {
                bc += e.length();
            }
        }
        Self::new(alpha, beta, delta, bc, d.free_length())
    }

    fn cot_sum(&self) -> f64 {
        cot_angle(self.alpha) + cot_angle(self.beta)
    }
}

/// The γ = 1 constant c(z): the corner segments down to
/// depth δ and the rest of the wall bounded by |B̃c| e^{−2δr}.
pub fn triangle_constant(p: &TriangleParams, z: f64) -> f64 {
    let d = p.delta;
    let e = (-2.0 * d * z).exp();
    let one_minus = -(-2.0 * d * z).exp_m1();
    -p.cot_sum() * one_minus / (4.0 * PI * d)
        - (one_minus / (2.0 * d) - z * e) * p.bc_length / (2.0 * PI * d)
}

/// c(z) with a positive cotangent term. Reported for comparison, not used
/// as the bound.
pub fn triangle_constant_printed(p: &TriangleParams, z: f64) -> f64 {
    let d = p.delta;
    let e = (-2.0 * d * z).exp();
    let one_minus = -(-2.0 * d * z).exp_m1();
    p.cot_sum() * one_minus / (4.0 * PI * d)
        - (one_minus / (2.0 * d) - z * e) * p.bc_length / (2.0 * PI * d)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TriangleBound {
    pub value: f64,
    pub leading: f64,
    pub second: f64,
    pub c: f64,
    /// c with a positive cotangent term, and the bound it would give.
    pub c_printed: f64,
    pub value_printed: f64,
}

/// C_{2,γ}|F|z^{γ+1} + (1/2π)(cot α + cot β)z^γ + c. For γ > 1 the
/// constant is the Riesz iteration of the γ = 1 constant (the other two
/// terms iterate exactly).
pub fn sn_lower_2d_angles(p: &TriangleParams, g: f64, z: f64) -> Result<TriangleBound> {
    check_gamma_ge1(g)?;
    check_z(z)?;
    let leading = weyl_constant(2, g)? * p.area_f * z.powf(g + 1.0);
    let second = p.cot_sum() / (2.0 * PI) * z.powf(g);
    let (c, c_printed) = if g == 1.0 {
        (triangle_constant(p, z), triangle_constant_printed(p, z))
    } else {
        (
            iterate_function(|t| triangle_constant(p, t), 1.0, g - 1.0, z, &[])?.value,
            iterate_function(|t| triangle_constant_printed(p, t), 1.0, g - 1.0, z, &[])?.value,
        )
    };
    Ok(TriangleBound {
        value: leading + second + c,
        leading,
        second,
        c,
        c_printed,
        value_printed: leading + second + c_printed,
    })
}

/// (ℓ/(π(γ+1)))z^{γ+1} + ½z^γ.
pub fn sn_lower_john_2d(length: f64, g: f64, z: f64) -> Result<f64> {
    check_gamma_ge1(g)?;
    check_z(z)?;
    check_positive("ℓ", length)?;
    Ok(length / (PI * (g + 1.0)) * z.powf(g + 1.0) + 0.5 * z.powf(g))
}

/// C_{n,1}|F|z^n + K_n|F| γ(n, 2hz)/(2h)^n.
pub fn sn_lower_john_ndim(area_f: f64, h: f64, n: u32, z: f64) -> Result<f64> {
    check_z(z)?;
    check_positive("|F|", area_f)?;
    check_positive("h", h)?;
    if n < 2 {
        return Err(Error::InvalidArgument(format!("n must be ≥ 2, got {n}")));
    }
    Ok(weyl_constant(n, 1.0)? * area_f * z.powi(n as i32)
        + wall_constant(n) * area_f * lower_incomplete_gamma(n, 2.0 * h * z)? / (2.0 * h).powi(n as i32))
}

/// (n/(n+1))C_{n,1}|F|z^n + (1/8)L^{cl}_{1,n−2}(|F|/δ_v)z^{n−1}
/// − (1/192)(2π)^{2−n}ω_n(|F|/δ_v²)z^{n−2}. The leading constant is a factor
/// n/(n+1) below the sharp one.
pub fn sn_lower_via_neumann(area_f: f64, width: f64, n: u32, z: f64) -> Result<f64> {
    check_z(z)?;
    check_positive("|F|", area_f)?;
    check_positive("δ_v", width)?;
    if n < 3 {
        return Err(Error::Unsupported(format!(
            "the Neumann route needs n ≥ 3 (L^cl_(1,n−2) is undefined for n = {n})"
        )));
    }
    let nf = n as f64;
    Ok(nf / (nf + 1.0) * weyl_constant(n, 1.0)? * area_f * z.powi(n as i32)
        + berezin_constant(n - 1)? / 8.0 * (area_f / width) * z.powi(n as i32 - 1)
        - (2.0 * PI).powf(2.0 - nf) * unit_ball_volume(n) / 192.0 * (area_f / (width * width))
            * z.powi(n as i32 - 2))
}

fn check_sn(s: &Spectrum) -> Result<()> {
    if s.problem() != Problem::Sn {
        return Err(Error::InvalidArgument("this bound is about sloshing (SN) spectra".into()));
    }
    Ok(())
}

/// Both sides of ν_{k+1}R^{n−1} − ((n−1)/n)R^n ≤ W^{n−1}(ν_{k+1} − mean_k) + c_B(R).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MasterSides {
    pub lhs: f64,
    pub rhs: f64,
}

impl MasterSides {
    pub fn holds(&self, tol: f64) -> bool {
        self.lhs <= self.rhs + tol
    }
}

pub fn kroger_master(
    s: &Spectrum,
    n: u32,
    area_f: f64,
    k: usize,
    r: f64,
    c_b_at_r: f64,
) -> Result<MasterSides> {
    check_sn(s)?;
    if !(r >= 0.0) {
        return Err(Error::InvalidArgument(format!("R must be ≥ 0, got {r}")));
    }
    let nu = s.get(k + 1)?;
    let mean = partial_sum(s, k)? / k as f64;
    let w = w_constant(n, k, area_f)?;
    let nf = n as f64;
    Ok(MasterSides {
        lhs: nu * r.powf(nf - 1.0) - (nf - 1.0) / nf * r.powf(nf),
        rhs: w.powf(nf - 1.0) * (nu - mean) + c_b_at_r,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KrogerCheck {
    pub k: usize,
    pub mean: f64,
    pub bound: f64,
    pub w: f64,
    /// W^{−(n−1)} c_B(ν_{k+1}) when the general form is used.
    pub c_b_term: Option<f64>,
}

/// (1/k)Σν_j ≤ ((n−1)/n)(W − (ν_{k+1} − W)²/W) [+ W^{−(n−1)}c_B(ν_{k+1})].
/// Pass `c_b_at_nu` = c_B(ν_{k+1}) for the general form, `None` for John
/// domains, where c_B ≤ 0 is dropped.
pub fn kroger_sum_bound(
    s: &Spectrum,
    n: u32,
    area_f: f64,
    k: usize,
    c_b_at_nu: Option<f64>,
) -> Result<KrogerCheck> {
    check_sn(s)?;
    let nu = s.get(k + 1)?;
    let mean = partial_sum(s, k)? / k as f64;
    let w = w_constant(n, k, area_f)?;
    let nf = n as f64;
    let mut bound = (nf - 1.0) / nf * (w - (nu - w).powi(2) / w);
    let c_b_term = c_b_at_nu.map(|c| c / w.powf(nf - 1.0));
    if let Some(t) = c_b_term {
        bound += t;
    }
    Ok(KrogerCheck { k, mean, bound, w, c_b_term })
}

/// c_n with W_{n,k}^{n−1} = c_n k, i.e. (2π)^{n−1}/(ω_{n−1}|F|).
pub fn kroger_c_n(n: u32, area_f: f64) -> f64 {
    (2.0 * PI).powi(n as i32 - 1) / (unit_ball_volume(n - 1) * area_f)
}

/// The radius R with R^{n−1} = c_n(k+1).
pub fn kroger_remark_radius(n: u32, area_f: f64, k: usize) -> f64 {
    (kroger_c_n(n, area_f) * (k + 1) as f64).powf(1.0 / (n as f64 - 1.0))
}

/// Σ_{j≤k+1} ν_j ≤ ((n−1)/n) c_n^{1/(n−1)} (k+1)^{n/(n−1)} + c_B(R)/c_n at
/// the radius of [`kroger_remark_radius`].
pub fn kroger_remark_sum_bound(n: u32, area_f: f64, k: usize, c_b_at_r: f64) -> f64 {
    let nf = n as f64;
    let cn = kroger_c_n(n, area_f);
    (nf - 1.0) / nf * cn.powf(1.0 / (nf - 1.0)) * ((k + 1) as f64).powf(nf / (nf - 1.0)) + c_b_at_r / cn
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Bracket {
    pub s_k: f64,
    pub w: f64,
    pub lower: f64,
    pub upper: f64,
}

/// S_k = (n/(n−1))Σ_{j≤k}ν_j/(kW) and W(1 ∓ √(1 − S_k)).
pub fn s_k(s: &Spectrum, n: u32, area_f: f64, k: usize) -> Result<f64> {
    check_sn(s)?;
    let w = w_constant(n, k, area_f)?;
    let nf = n as f64;
    Ok(nf / (nf - 1.0) * partial_sum(s, k)? / (k as f64 * w))
}

pub fn eigenvalue_bracket(s: &Spectrum, n: u32, area_f: f64, k: usize) -> Result<Bracket> {
    let sk = s_k(s, n, area_f, k)?;
    let w = w_constant(n, k, area_f)?;
    if sk > 1.0 + 1e-12 {
        return Err(Error::Hypothesis(format!(
            "S_{k} = {sk} > 1: the bracket is undefined, which on a John domain would contradict the sum bound"
        )));
    }
    let root = (1.0 - sk).max(0.0).sqrt();
    Ok(Bracket { s_k: sk, w, lower: w * (1.0 - root), upper: w * (1.0 + root) })
}

/// C_{n,γ}|F|z^{n+γ−1}.
pub fn sd_upper_ndim(area_f: f64, n: u32, g: f64, z: f64) -> Result<f64> {
    check_gamma_ge1(g)?;
    check_z(z)?;
    Ok(weyl_constant(n, g)? * area_f * z.powf(n as f64 + g - 1.0))
}

/// ((n−1)/n) W_{n,k}.
pub fn sd_sum_lower(n: u32, area_f: f64, k: usize) -> Result<f64> {
    Ok((n as f64 - 1.0) / n as f64 * w_constant(n, k, area_f)?)
}

/// (ℓ/2π)z² − ½z + π/(2ℓ).
pub fn sd_upper_2d_john(length: f64, z: f64) -> Result<f64> {
    check_z(z)?;
    check_positive("ℓ", length)?;
    Ok(length / (2.0 * PI) * z * z - 0.5 * z + PI / (2.0 * length))
}

/// (ℓ/2π)z² − (½ + ℓ/π)z + ½, valid for z ≥ 1.
pub fn sd_lower_2d(length: f64, z: f64) -> Result<f64> {
    check_positive("ℓ", length)?;
    if !(z >= 1.0) || !z.is_finite() {
        return Err(Error::InvalidArgument(format!("this bound is stated for z ≥ 1, got {z}")));
    }
    Ok(length / (2.0 * PI) * z * z - (0.5 + length / PI) * z + 0.5)
}

/// Γ(n)/((4π)^{(n−1)/2}Γ((n+1)/2)) · |F| t^{−(n−1)}.
pub fn sd_heat_trace_upper(area_f: f64, n: u32, t: f64) -> Result<f64> {
    check_positive("t", t)?;
    let nf = n as f64;
    Ok(gamma(nf) / ((4.0 * PI).powf((nf - 1.0) / 2.0) * gamma((nf + 1.0) / 2.0)) * area_f
        / t.powf(nf - 1.0))
}
