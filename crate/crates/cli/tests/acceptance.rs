//! Acceptance suite: one PASS/FAIL line per criterion. Exits nonzero if any
//! criterion fails.

use std::f64::consts::{FRAC_PI_4, PI};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::Command;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use steklov_core::asymptotics::{fem_window_limit, fit_second_term, second_magnitude, triangle_bound_coefficient, FitInput};
use steklov_core::bounds::{
    a_n1, a_n1_with, c_b_with, cone_printed_intermediate, kroger_master, s_k, verify, AtermMode, BoundId,
    BoundParams, BoundReport, Status, DEFAULT_REL_TOL,
};
use steklov_core::fem::{dtn_spectrum, dtn_spectrum_estimated, MeshOptions};
use steklov_core::geometry::{ConeDomain, CylinderBase, CylinderDomain, Domain, PolygonalDomain};
use steklov_core::riesz::{riesz_curve, riesz_iterate, riesz_mean, staircase_bounds, staircase_sum};
use steklov_core::spectra::{cylinder_spectrum, rectangle_sd, rectangle_sn, Problem, Spectrum};
use steklov_core::specfun::w_constant;

type Outcome = Result<String, String>;

fn check(cond: bool, ok: String, fail: String) -> Outcome {
    if cond {
        Ok(ok)
    } else {
        Err(fail)
    }
}

fn rect() -> Domain {
    Domain::Polygon(PolygonalDomain::rectangle(PI, 1.0).unwrap())
}

fn grids() -> Vec<Vec<f64>> {
    let n = 2000;
    let (a, b) = (0.1f64, 1000.0f64);
    let log: Vec<f64> = (0..n).map(|i| (a.ln() + (b.ln() - a.ln()) * i as f64 / (n - 1) as f64).exp()).collect();
    let lin: Vec<f64> = (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect();
    let mut log = log;
    log[n - 1] = b;
    vec![log, lin]
}

fn run_bound(s: &Spectrum, id: BoundId, d: Option<&Domain>, grid: &[f64]) -> BoundReport {
    let p = BoundParams::from_meta(s.meta());
    let r = verify(s, id, &p, d, grid, DEFAULT_REL_TOL).unwrap();
    assert!(r.is_consistent());
    r
}

fn holds_on_grids(s: &Spectrum, id: BoundId, d: Option<&Domain>, lo: f64) -> (bool, f64, usize) {
    let mut ok = true;
    let mut min = f64::INFINITY;
    let mut viol = 0;
    for g in grids() {
        let g: Vec<f64> = g.into_iter().filter(|z| *z >= lo).collect();
        let r = run_bound(s, id, d, &g);
        ok &= r.status == Status::Holds;
        min = min.min(r.min_margin);
        viol += r.violations.len();
    }
    (ok, min, viol)
}

fn c1() -> Outcome {
    let d = PolygonalDomain::rectangle(PI, 1.0).unwrap();
    let hs = [0.08, 0.04, 0.02];
    let mut lines = Vec::new();
    let mut ok = true;
    for problem in [Problem::Sn, Problem::Sd] {
        let start = Instant::now();
        let skip = usize::from(problem == Problem::Sn);
        let exact = match problem {
            Problem::Sn => rectangle_sn(PI, 1.0, 11).unwrap(),
            Problem::Sd => rectangle_sd(PI, 1.0, 10).unwrap(),
        };
        let mut errs: Vec<Vec<f64>> = Vec::new();
        for h in hs {
            let s = dtn_spectrum(&d, problem, 10 + skip, h).unwrap();
            errs.push(
                (skip..10 + skip)
                    .map(|i| ((s.values()[i] - exact.values()[i]) / exact.values()[i]).abs())
                    .collect(),
            );
        }
        let secs = start.elapsed().as_secs_f64();
        let max_rel = errs[2].iter().cloned().fold(0.0, f64::max);
        let orders: Vec<f64> = (0..10)
            .map(|j| {
                // Least-squares slope of log e against log h over the three meshes.
                let xs: Vec<f64> = hs.iter().map(|h| h.ln()).collect();
                let ys: Vec<f64> = errs.iter().map(|e| e[j].ln()).collect();
                let (mx, my) = (xs.iter().sum::<f64>() / 3.0, ys.iter().sum::<f64>() / 3.0);
                let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
                let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
                sxy / sxx
            })
            .collect();
        let min_order = orders.iter().cloned().fold(f64::INFINITY, f64::min);
        ok &= max_rel <= 0.01 && min_order >= 1.5 && secs <= 60.0;
        lines.push(format!(
            "{}: max rel err {:.2e} at h=0.02, min order {:.2}, {:.1}s",
            problem.as_str(),
            max_rel,
            min_order,
            secs
        ));
    }
    let msg = lines.join("; ");
    check(ok, msg.clone(), msg)
}

fn c2() -> Outcome {
    let s = rectangle_sn(PI, 1.0, 5000).unwrap();
    let (ok, min, viol) = holds_on_grids(&s, BoundId::John2d, Some(&rect()), 0.0);
    let msg = format!("min margin {min:.3e}, {viol} violations over log and linear 2000-point grids");
    check(ok && viol == 0, msg.clone(), msg)
}

fn c3() -> Outcome {
    let s = rectangle_sn(PI, 1.0, 5000).unwrap();
    let f = fit_second_term(FitInput::Spectrum(&s), 1.0, PI, [100.0, 1000.0]).unwrap();
    let msg = format!("coefficient {:.6} ± {:.1e}", f.coefficient, f.stderr);
    check((f.coefficient - 0.5).abs() <= 0.02 * 0.5, msg.clone(), msg)
}

fn c4() -> Outcome {
    let s = rectangle_sd(PI, 1.0, 5000).unwrap();
    let (ok, min, viol) = holds_on_grids(&s, BoundId::SdJohn2d, Some(&rect()), 0.0);
    let f = fit_second_term(FitInput::Spectrum(&s), 1.0, PI, [100.0, 1000.0]).unwrap();
    let fit_ok = (f.coefficient + 0.5).abs() <= 0.02 * 0.5;
    let msg = format!("min margin {min:.3e}, {viol} violations; coefficient {:.6}", f.coefficient);
    check(ok && fit_ok, msg.clone(), msg)
}

fn c5() -> Outcome {
    let s = rectangle_sd(PI, 1.0, 5000).unwrap();
    let (ok, min, viol) = holds_on_grids(&s, BoundId::SdUpper, Some(&rect()), 0.0);
    let msg = format!("min margin {min:.3e}, {viol} violations");
    check(ok && min >= 0.0, msg.clone(), msg)
}

fn c6() -> Outcome {
    let s = rectangle_sd(PI, 1.0, 5000).unwrap();
    let (ok, min, viol) = holds_on_grids(&s, BoundId::SdLower2d, Some(&rect()), 1.0);
    let msg = format!("z ∈ [1, 1000]: min margin {min:.3e}, {viol} violations");
    check(ok, msg.clone(), msg)
}

fn c7() -> Outcome {
    let length = PI;
    let alpha = FRAC_PI_4;
    let tri = PolygonalDomain::isoceles_triangle(length, alpha).unwrap();
    let dom = Domain::Polygon(tri.clone());
    let start = Instant::now();
    let est = dtn_spectrum_estimated(&tri, Problem::Sn, 200, &MeshOptions::graded(0.002, 0.1)).unwrap();
    let secs = start.elapsed().as_secs_f64();
    let fine = &est.spectrum;
    let target = second_magnitude(alpha, alpha);
    let z_cert = fem_window_limit(fine, target, length, 1.0).unwrap();
    let grid: Vec<f64> = (1..=400).map(|i| z_cert * i as f64 / 400.0).collect();
    let report = run_bound(fine, BoundId::Triangle, Some(&dom), &grid);
    let ext = est.extrapolated_spectrum().unwrap();
    let window = [2.0, z_cert];
    let f = fit_second_term(FitInput::Spectrum(&ext), 1.0, length, window).unwrap();
    let bound_coef = triangle_bound_coefficient(alpha, alpha);
    let fit_ok = (f.coefficient - target).abs() <= 0.1 * target && f.coefficient > bound_coef;
    let msg = format!(
        "{} eigenvalues ({secs:.1}s), certified z ≤ {z_cert:.2}: bound {} (min margin {:.3e}); \
         fitted coefficient {:.4} ± {:.1e} on [{}, {:.2}] vs 1 (bound coefficient {:.4})",
        fine.len(),
        if report.status == Status::Holds { "holds" } else { "fails" },
        report.min_margin,
        f.coefficient,
        f.stderr,
        window[0],
        window[1],
        bound_coef
    );
    check(fine.len() >= 150 && report.status == Status::Holds && fit_ok, msg.clone(), msg)
}

fn c8() -> Outcome {
    let cyl = Domain::Cylinder(CylinderDomain::new(3, CylinderBase::Rectangle { a: 1.0, b: 1.3 }, 1.0).unwrap());
    let cases = [
        ("rectangle", rectangle_sn(PI, 1.0, 2000).unwrap(), rect()),
        ("box cylinder", {
            let Domain::Cylinder(c) = &cyl else { unreachable!() };
            cylinder_spectrum(c, Problem::Sn, 2000).unwrap()
        }, cyl.clone()),
    ];
    let ks: Vec<f64> = (1..=500).map(|k| k as f64).collect();
    let mut rng = rand::rngs::StdRng::seed_from_u64(0x5EED);
    let mut ok = true;
    let mut parts = Vec::new();
    for (name, s, d) in &cases {
        let n = d.dimension();
        let area = d.free_area();
        let kr = run_bound(s, BoundId::Kroger, Some(d), &ks);
        let br = run_bound(s, BoundId::Bracket, Some(d), &ks);
        let max_sk = (1..=500).map(|k| s_k(s, n, area, k).unwrap()).fold(0.0, f64::max);
        let mut master_fail = 0;
        for _ in 0..100 {
            let k = rng.random_range(1..=500usize);
            let w = w_constant(n, k, area).unwrap();
            let r = rng.random_range(0.0..3.0 * w);
            let m = kroger_master(s, n, area, k, r, c_b_with(d, r, AtermMode::ClosedForm).unwrap()).unwrap();
            if !m.holds(1e-9 * (1.0 + m.lhs.abs() + m.rhs.abs())) {
                master_fail += 1;
            }
        }
        let good = kr.status == Status::Holds && br.status == Status::Holds && max_sk <= 1.0 && master_fail == 0;
        ok &= good;
        parts.push(format!(
            "{name}: sum bound min margin {:.3e}, max S_k {:.6}, bracket min margin {:.3e}, master failures {master_fail}/100",
            kr.min_margin, max_sk, br.min_margin
        ));
    }
    let msg = parts.join("; ");
    check(ok, msg.clone(), msg)
}

fn c9() -> Outcome {
    let s = rectangle_sn(PI, 1.0, 200).unwrap();
    let grid: Vec<f64> = (0..=100).map(|i| i as f64 * 0.5).collect();
    let curve = riesz_curve(&s, 1.0, &grid).unwrap();
    let mut worst: f64 = 0.0;
    for z in [5.0, 20.0, 50.0] {
        let it = riesz_iterate(&curve, 1.0, z).unwrap();
        let direct = riesz_mean(&s, 2.0, z).unwrap();
        worst = worst.max(((it - direct) / direct).abs());
    }
    let msg = format!("max relative difference {worst:.2e}");
    check(worst <= 1e-6, msg.clone(), msg)
}

fn c10() -> Outcome {
    let mut rng = rand::rngs::StdRng::seed_from_u64(10);
    let mut outside = 0;
    for _ in 0..10_000 {
        let r: f64 = rng.random_range(0.0..=100.0);
        let (lo, hi) = staircase_bounds(r);
        let v = staircase_sum(r);
        if !(lo <= v && v <= hi) {
            outside += 1;
        }
    }
    let mut not_attained = 0;
    for _ in 0..100 {
        let m = rng.random_range(0..=100u32) as f64;
        if staircase_sum(m) != staircase_bounds(m).0 {
            not_attained += 1;
        }
    }
    let msg = format!("{outside}/10000 outside [lo, hi]; lower bound missed at {not_attained}/100 integers");
    check(outside == 0 && not_attained == 0, msg.clone(), msg)
}

fn c11() -> Outcome {
    let domains = [
        ("rectangle", rect()),
        ("cylinder", Domain::Cylinder(CylinderDomain::new(3, CylinderBase::Rectangle { a: 1.0, b: 1.3 }, 1.0).unwrap())),
        ("cone", Domain::Cone(ConeDomain::new(FRAC_PI_4, 1.0).unwrap())),
    ];
    let mut worst_identity: f64 = 0.0;
    for (_, d) in &domains {
        let n = d.dimension();
        for r in [0.1, 0.5, 1.0, 2.0, 5.0, 10.0, 30.0] {
            let lhs = c_b_with(d, r, AtermMode::Quadrature).unwrap() * d.free_area();
            let rhs = -(2.0 * PI).powi(n as i32 - 1) * a_n1(d, r).unwrap();
            worst_identity = worst_identity.max((lhs - rhs).abs() / (1.0 + rhs.abs()));
        }
    }
    let cone = &domains[2].1;
    let mut worst_cone: f64 = 0.0;
    let mut printed_gap: f64 = 0.0;
    for z in [0.5, 2.0, 10.0, 40.0] {
        let closed = a_n1_with(cone, z, AtermMode::ClosedForm).unwrap();
        let quad = a_n1_with(cone, z, AtermMode::Quadrature).unwrap();
        worst_cone = worst_cone.max((closed - quad).abs() / (1.0 + closed.abs()));
        let printed = cone_printed_intermediate(FRAC_PI_4, 1.0, z);
        printed_gap = printed_gap.max((printed - closed).abs() / closed.abs());
    }
    let msg = format!(
        "identity max rel diff {worst_identity:.1e}; cone closed vs quadrature {worst_cone:.1e}; \
         one-dimensional cone reduction differs by up to {:.0}%",
        100.0 * printed_gap
    );
    check(worst_identity <= 1e-10 && worst_cone <= 1e-8, msg.clone(), msg)
}

/// ν_k(h = 1) − ν_k(h = ½) for the rectangle of length π, evaluated as
/// k·sinh(k/2)/(cosh k·cosh(k/2)) so that it keeps full relative accuracy.
fn sn_depth_gap(k: f64) -> f64 {
    k * (k / 2.0).sinh() / (k.cosh() * (k / 2.0).cosh())
}

/// η_j(h = ½) − η_j(h = 1) = j(coth(j/2) − coth j) = j/sinh j.
fn sd_depth_gap(j: f64) -> f64 {
    j / j.sinh()
}

fn c12() -> Outcome {
    let (sn1, sn05) = (rectangle_sn(PI, 1.0, 51).unwrap(), rectangle_sn(PI, 0.5, 51).unwrap());
    let (sd1, sd05) = (rectangle_sd(PI, 1.0, 50).unwrap(), rectangle_sd(PI, 0.5, 50).unwrap());
    let mut exact_ok = true;
    for k in 1..=50usize {
        let (a, b) = (sn1.values()[k], sn05.values()[k]);
        let g = sn_depth_gap(k as f64);
        exact_ok &= g > 0.0 && ((a - b) - g).abs() <= 4.0 * f64::EPSILON * a && a >= b;
        let (c, d) = (sd1.values()[k - 1], sd05.values()[k - 1]);
        let g = sd_depth_gap(k as f64);
        exact_ok &= g > 0.0 && ((d - c) - g).abs() <= 4.0 * f64::EPSILON * d && d >= c;
    }
    // FEM: ordering wherever the exact gap exceeds 5× the certified errors.
    let opts = MeshOptions::uniform(0.02);
    let mut checked = 0;
    let mut wrong = 0;
    for problem in [Problem::Sn, Problem::Sd] {
        let deep = dtn_spectrum_estimated(&PolygonalDomain::rectangle(PI, 1.0).unwrap(), problem, 51, &opts).unwrap();
        let shallow = dtn_spectrum_estimated(&PolygonalDomain::rectangle(PI, 0.5).unwrap(), problem, 51, &opts).unwrap();
        let (ed, es) = (deep.spectrum.errors().unwrap(), shallow.spectrum.errors().unwrap());
        let (range, sign) = match problem {
            Problem::Sn => (1..=50usize, 1.0),
            Problem::Sd => (0..=49usize, -1.0),
        };
        for i in range {
            let k = if problem == Problem::Sn { i as f64 } else { i as f64 + 1.0 };
            let gap = if problem == Problem::Sn { sn_depth_gap(k) } else { sd_depth_gap(k) };
            if gap > 5.0 * (ed[i] + es[i]) {
                checked += 1;
                if sign * (deep.spectrum.values()[i] - shallow.spectrum.values()[i]) <= 0.0 {
                    wrong += 1;
                }
            }
        }
    }
    let msg = format!(
        "exact: strict monotonicity for k ≤ 50 {}; FEM: {checked} resolved pairs, {wrong} out of order",
        if exact_ok { "confirmed" } else { "FAILED" }
    );
    check(exact_ok && wrong == 0 && checked > 0, msg.clone(), msg)
}

fn c13() -> Outcome {
    let s = rectangle_sd(PI, 1.0, 5000).unwrap();
    let r = run_bound(&s, BoundId::HeatTrace, Some(&rect()), &[0.1, 1.0]);
    let msg = format!(
        "margins {:.4e}, {:.4e}; tails {:.1e}, {:.1e}",
        r.margins[0], r.margins[1], r.extra["tail"][0], r.extra["tail"][1]
    );
    check(r.status == Status::Holds, msg.clone(), msg)
}

fn c14() -> Outcome {
    let bin = env!("CARGO_BIN_EXE_steklov");
    let cmds: Vec<Vec<&str>> = vec![
        vec!["spectrum", "--preset", "rectangle:pi,1", "--problem", "sn", "--count", "200"],
        vec!["spectrum", "--preset", "cylinder:1,1.3,1", "--problem", "sd", "--count", "200"],
        vec!["spectrum", "--preset", "triangle:pi,pi/4", "--problem", "sd", "--fem-h", "0.05", "--count", "30"],
        vec!["spectrum", "--preset", "triangle:pi,pi/4", "--fem-h", "0.05", "--count", "30", "--extrapolate"],
        vec!["riesz", "--preset", "rectangle:pi,1", "--count", "500", "--gamma", "1.5", "--grid", "log200(0.1,400)"],
        vec!["verify", "--preset", "rectangle:pi,1", "--count", "2000", "--bound", "main", "--grid", "0.5:1000:0.5"],
        vec!["verify", "--preset", "rectangle:pi,1", "--count", "600", "--bound", "kroger", "--grid", "1:500:1"],
        vec!["verify", "--preset", "rectangle:pi,1", "--count", "2000", "--bound", "heat-trace", "--grid", "0.1,1"],
        vec!["verify", "--preset", "triangle:pi,pi/4", "--fem-h", "0.02", "--count", "40", "--bound", "triangle", "--grid", "0.5:10:0.5"],
        vec!["asym", "--preset", "rectangle:pi,1", "--count", "5000", "--window", "100:1000"],
    ];
    let mut differing = Vec::new();
    for args in &cmds {
        let mut outputs = Vec::new();
        for threads in ["1", "1", "3"] {
            let out = Command::new(bin).args(args).env("STEKLOV_THREADS", threads).output().unwrap();
            outputs.push((out.status.code(), out.stdout));
        }
        if outputs.iter().any(|o| o != &outputs[0]) || outputs[0].1.is_empty() {
            differing.push(args.join(" "));
        }
    }
    let msg = format!("{} commands × 3 runs (thread counts 1, 1, 3): {} differ", cmds.len(), differing.len());
    check(differing.is_empty(), msg.clone(), format!("{msg}: {}", differing.join(" | ")))
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() {
    let criteria: Vec<Criterion> = vec![
        ("FEM oracle on the rectangle", c1),
        ("rectangle sloshing lower bound (ℓ/2π)z² + ½z", c2),
        ("sloshing second coefficient 0.5 ± 2%", c3),
        ("rectangle Steklov–Dirichlet upper bound and coefficient −0.5 ± 2%", c4),
        ("Steklov–Dirichlet Riesz mean ≤ (ℓ/2π)z²", c5),
        ("Steklov–Dirichlet lower bound on [1, 1000]", c6),
        ("corner-angle bound and second coefficient on the π/4 triangle", c7),
        ("eigenvalue-sum bound, bracket and master inequality", c8),
        ("Riesz iteration R₁ → R₂", c9),
        ("staircase sum bounds", c10),
        ("wall-integral identities and cone closed form", c11),
        ("monotonicity in depth", c12),
        ("heat-trace bound", c13),
        ("determinism of every CLI command", c14),
    ];
    let only: Option<usize> = std::env::args().skip(1).find_map(|a| a.parse().ok());
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let id = i + 1;
        if only.is_some_and(|o| o != id) {
            continue;
        }
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panic".into());
            Err(format!("panicked: {msg}"))
        });
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("criterion {id:>2} PASS  {name} [{secs:.1}s]: {detail}"),
            Err(detail) => {
                failed += 1;
                println!("criterion {id:>2} FAIL  {name} [{secs:.1}s]: {detail}");
            }
        }
    }
    if failed > 0 {
        println!("{failed} criterion/criteria failed");
        std::process::exit(1);
    }
}
