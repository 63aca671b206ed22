//! Special functions and the semiclassical constants used by the bounds.
//!
//! Γ is evaluated exactly (as a product) at integer and half-integer
//! arguments, which covers every dimension-dependent constant, and by a
//! Lanczos approximation elsewhere.

use std::f64::consts::PI;

use crate::error::{Error, Result};

const LANCZOS_G: f64 = 7.0;
const LANCZOS_COEF: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

/// Largest n with n! finite in f64.
const MAX_FACTORIAL: u32 = 170;

/// n! as f64, exact up to 22! and correctly rounded products beyond.
pub fn factorial(n: u32) -> f64 {
    if n > MAX_FACTORIAL {
        return f64::INFINITY;
    }
    (1..=n).fold(1.0, |acc, k| acc * k as f64)
}

fn lanczos_gamma(x: f64) -> f64 {
    if x < 0.5 {
        // Reflection.
        PI / ((PI * x).sin() * lanczos_gamma(1.0 - x))
    } else {
        let x = x - 1.0;
        let mut a = LANCZOS_COEF[0];
        let t = x + LANCZOS_G + 0.5;
        for (i, c) in LANCZOS_COEF.iter().enumerate().skip(1) {
            a += c / (x + i as f64);
        }
        (2.0 * PI).sqrt() * t.powf(x + 0.5) * (-t).exp() * a
    }
}

/// The Gamma function on the positive reals (and non-integer negatives).
pub fn gamma(x: f64) -> f64 {
    if x.is_nan() {
        return f64::NAN;
    }
    if x > 0.0 && x.fract() == 0.0 && x <= (MAX_FACTORIAL + 1) as f64 {
        return factorial(x as u32 - 1);
    }
    if x > 0.0 && (x - 0.5).fract() == 0.0 && x < 171.0 {
        // Γ(k + 1/2) = (k - 1/2)(k - 3/2)...(1/2) √π
        let k = (x - 0.5) as u32;
        return (0..k).fold(PI.sqrt(), |acc, j| acc * (j as f64 + 0.5));
    }
    lanczos_gamma(x)
}

/// Volume of the unit ball in R^m: π^{m/2} / Γ(m/2 + 1).
pub fn unit_ball_volume(m: u32) -> f64 {
    PI.powf(m as f64 / 2.0) / gamma(m as f64 / 2.0 + 1.0)
}

/// Upper incomplete Gamma function for a positive integer order, by the
/// finite sum Γ(n, x) = (n-1)! e^{-x} Σ_{k<n} x^k / k!.
pub fn upper_incomplete_gamma(n: u32, x: f64) -> Result<f64> {
    if n == 0 {
        return Err(Error::InvalidArgument(
            "upper_incomplete_gamma: order must be a positive integer".into(),
        ));
    }
    if !(x >= 0.0) {
        return Err(Error::InvalidArgument(format!(
            "upper_incomplete_gamma: x must be nonnegative, got {x}"
        )));
    }
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..n {
        term *= x / k as f64;
        sum += term;
    }
    Ok(factorial(n - 1) * (-x).exp() * sum)
}

/// Γ(n) − Γ(n, x) = ∫_0^x t^{n-1} e^{-t} dt for integer n ≥ 1, evaluated
/// without cancellation for small x.
pub fn lower_incomplete_gamma(n: u32, x: f64) -> Result<f64> {
    if n == 0 {
        return Err(Error::InvalidArgument(
            "lower_incomplete_gamma: order must be a positive integer".into(),
        ));
    }
    if !(x >= 0.0) {
        return Err(Error::InvalidArgument(format!(
            "lower_incomplete_gamma: x must be nonnegative, got {x}"
        )));
    }
    if x == 0.0 {
        return Ok(0.0);
    }
    if x > n as f64 {
        return Ok(factorial(n - 1) - upper_incomplete_gamma(n, x)?);
    }
    // (n-1)! e^{-x} Σ_{k≥n} x^k/k! = e^{-x} x^n / n * Σ_{j≥0} x^j n!/(n+j)! * ...
    // written as e^{-x} x^n Σ_{j≥0} x^j / (n (n+1) ... (n+j)).
    let mut term = 1.0 / n as f64;
    let mut sum = term;
    let mut j = 1;
    loop {
        term *= x / (n + j) as f64;
        sum += term;
        if term < sum * 1e-17 || j > 500 {
            break;
        }
        j += 1;
    }
    Ok((-x).exp() * x.powi(n as i32) * sum)
}

/// Weyl-type constant C_{n,γ} of the Riesz mean asymptotics.
pub fn weyl_constant(n: u32, gamma_order: f64) -> Result<f64> {
    if n < 2 {
        return Err(Error::InvalidArgument(format!("weyl_constant: n must be ≥ 2, got {n}")));
    }
    if !(gamma_order >= 0.0) {
        return Err(Error::InvalidArgument(format!(
            "weyl_constant: γ must be ≥ 0, got {gamma_order}"
        )));
    }
    let nf = n as f64;
    Ok((4.0 * PI).powf(-(nf - 1.0) / 2.0) * gamma(gamma_order + 1.0) * gamma(nf)
        / (gamma((nf + 1.0) / 2.0) * gamma(nf + gamma_order)))
}

/// Classical Berezin–Li–Yau constant L^{cl}_{1,n-1} for the Laplacian on an
/// (n−1)-dimensional base.
pub fn berezin_constant(n: u32) -> Result<f64> {
    if n < 2 {
        return Err(Error::InvalidArgument(format!("berezin_constant: n must be ≥ 2, got {n}")));
    }
    let nf = n as f64;
    Ok(1.0 / ((4.0 * PI).powf((nf - 1.0) / 2.0) * gamma(1.0 + (nf + 1.0) / 2.0)))
}

/// W_{n,k} = 2π ω_{n−1}^{−1/(n−1)} (k/|F|)^{1/(n−1)}.
pub fn w_constant(n: u32, k: usize, area_f: f64) -> Result<f64> {
    if n < 2 || k == 0 || !(area_f > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "w_constant: need n ≥ 2, k ≥ 1, |F| > 0 (got n={n}, k={k}, |F|={area_f})"
        )));
    }
    let p = 1.0 / (n as f64 - 1.0);
    Ok(2.0 * PI * unit_ball_volume(n - 1).powf(-p) * (k as f64 / area_f).powf(p))
}

/// tanh saturated to 1 beyond argument 40.
pub fn stable_tanh(x: f64) -> f64 {
    if x > 40.0 {
        1.0
    } else if x < -40.0 {
        -1.0
    } else {
        x.tanh()
    }
}

/// coth saturated to 1 beyond argument 40; singular at 0.
pub fn stable_coth(x: f64) -> f64 {
    if x > 40.0 {
        1.0
    } else if x < -40.0 {
        -1.0
    } else {
        1.0 / x.tanh()
    }
}

/// cot with the convention cot(π/2) = 0 (exactly, within a few ulps of π/2).
pub fn cot_angle(angle: f64) -> f64 {
    if (angle - PI / 2.0).abs() < 1e-12 {
        0.0
    } else {
        angle.cos() / angle.sin()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * (1.0 + b.abs())
    }

    #[test]
    fn gamma_known_values() {
        assert_eq!(gamma(1.0), 1.0);
        assert_eq!(gamma(5.0), 24.0);
        assert!(close(gamma(0.5), PI.sqrt(), 1e-15));
        assert!(close(gamma(2.5), 0.75 * PI.sqrt(), 1e-15));
        // Lanczos path against Γ(x+1) = xΓ(x) and a tabulated value.
        assert!(close(gamma(1.3), 0.897_470_696_306_277_2, 1e-13));
        for &x in &[0.1, 0.7, 3.3, 11.9, 27.25, 49.6] {
            assert!(close(gamma(x + 1.0), x * gamma(x), 1e-12), "x = {x}");
        }
    }

    #[test]
    fn unit_ball_volumes() {
        assert_eq!(unit_ball_volume(0), 1.0);
        assert!(close(unit_ball_volume(1), 2.0, 1e-15));
        assert!(close(unit_ball_volume(2), PI, 1e-15));
        assert!(close(unit_ball_volume(3), 4.0 * PI / 3.0, 1e-15));
    }

    #[test]
    fn incomplete_gamma_examples() {
        assert_eq!(upper_incomplete_gamma(1, 0.0).unwrap(), 1.0);
        assert_eq!(upper_incomplete_gamma(3, 0.0).unwrap(), 2.0);
        let v = upper_incomplete_gamma(2, 1.0).unwrap();
        assert!(close(v, 2.0 / std::f64::consts::E, 1e-15));
        assert!(upper_incomplete_gamma(0, 1.0).is_err());
        assert!(upper_incomplete_gamma(2, -1.0).is_err());
    }

    #[test]
    fn lower_incomplete_gamma_matches_difference() {
        for n in 1..=8 {
            for &x in &[1e-6, 0.01, 0.5, 1.0, 3.0, 7.5, 12.0, 40.0] {
                let direct = factorial(n - 1) - upper_incomplete_gamma(n, x).unwrap();
                let stable = lower_incomplete_gamma(n, x).unwrap();
                // The direct difference loses digits for small x.
                let scale = factorial(n - 1) * 1e-14;
                assert!((direct - stable).abs() <= scale, "n={n} x={x}: {direct} vs {stable}");
                assert!(stable > 0.0);
            }
        }
        // Small-x asymptotics x^n / n.
        let v = lower_incomplete_gamma(3, 1e-4).unwrap();
        assert!(close(v, 1e-12 / 3.0, 1e-3));
    }

    #[test]
    fn incomplete_gamma_monotone_and_normalized() {
        for n in 1..=12u32 {
            assert_eq!(upper_incomplete_gamma(n, 0.0).unwrap(), factorial(n - 1));
            let mut prev = f64::INFINITY;
            for i in 0..=500 {
                let x = i as f64 * 0.1;
                let v = upper_incomplete_gamma(n, x).unwrap();
                // Near 0 the decrease x^n/n can be below one ulp of (n-1)!.
                assert!(v <= prev * (1.0 + 1e-15), "n={n} x={x}");
                if x > 0.0 {
                    assert!(lower_incomplete_gamma(n, x).unwrap() > 0.0);
                }
                prev = v;
            }
        }
    }

    #[test]
    fn weyl_constant_examples() {
        assert!(close(weyl_constant(2, 1.0).unwrap(), 1.0 / (2.0 * PI), 1e-14));
        for &g in &[0.0, 0.5, 2.0, 3.0] {
            assert!(close(weyl_constant(2, g).unwrap(), 1.0 / (PI * (g + 1.0)), 1e-13));
        }
        for n in 2..=8u32 {
            let expected = unit_ball_volume(n - 1) / (2.0 * PI).powi(n as i32 - 1);
            assert!(close(weyl_constant(n, 0.0).unwrap(), expected, 1e-13), "n={n}");
        }
    }

    #[test]
    fn berezin_constant_examples() {
        assert!(close(berezin_constant(2).unwrap(), 2.0 / (3.0 * PI), 1e-14));
        for n in 2..=10u32 {
            let ratio = berezin_constant(n).unwrap() / weyl_constant(n, 1.0).unwrap();
            assert!(close(ratio, 2.0 * n as f64 / (n as f64 + 1.0), 1e-12), "n={n}");
        }
    }

    #[test]
    fn w_constant_examples() {
        assert!(close(w_constant(2, 1, PI).unwrap(), 1.0, 1e-14));
        assert!(close(w_constant(2, 7, 2.5).unwrap(), PI * 7.0 / 2.5, 1e-14));
        assert!(close(w_constant(3, 8, PI).unwrap(), 4.0 * 2f64.sqrt(), 1e-14));
        assert!(w_constant(2, 0, 1.0).is_err());
    }

    #[test]
    fn cot_convention() {
        assert_eq!(cot_angle(PI / 2.0), 0.0);
        assert!(close(cot_angle(PI / 4.0), 1.0, 1e-15));
    }

    proptest! {
        #[test]
        fn weyl_constant_two_dims(g in 0.0f64..10.0) {
            let c = weyl_constant(2, g).unwrap();
            prop_assert!((c * PI * (g + 1.0) - 1.0).abs() < 1e-12);
        }

        #[test]
        fn w_constant_two_dims(k in 1usize..10_000, len in 0.01f64..100.0) {
            let w = w_constant(2, k, len).unwrap();
            let expected = PI * k as f64 / len;
            prop_assert!((w - expected).abs() <= 1e-12 * expected);
        }
    }
}
