//! Every bound that applies to a rectangle or a box cylinder holds on the
//! closed-form spectra of randomly sized ones.

use proptest::prelude::*;
use steklov_core::bounds::{verify, BoundId, BoundParams, Status, DEFAULT_REL_TOL};
use steklov_core::geometry::{CylinderBase, CylinderDomain, Domain, PolygonalDomain};
use steklov_core::spectra::{cylinder_spectrum, rectangle_sd, rectangle_sn, Problem, Spectrum};

fn check(s: &Spectrum, id: BoundId, d: &Domain, grid: &[f64]) -> Result<(), TestCaseError> {
    let mut p = BoundParams::from_meta(s.meta());
    p.width = Some(d.depth());
    let r = verify(s, id, &p, Some(d), grid, DEFAULT_REL_TOL).unwrap();
    prop_assert!(r.is_consistent());
    prop_assert!(r.status != Status::Violated, "{:?} violated at {:?}", id, r.violations);
    Ok(())
}

fn z_grid(top: f64) -> Vec<f64> {
    (1..=300).map(|i| top * i as f64 / 300.0).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn rectangle_bounds(len in 0.5f64..5.0, depth in 0.2f64..3.0) {
        let d = Domain::Polygon(PolygonalDomain::rectangle(len, depth).unwrap());
        let sn = rectangle_sn(len, depth, 3000).unwrap();
        let sd = rectangle_sd(len, depth, 3000).unwrap();
        let top = 0.9 * sn.validity_ceiling().min(sd.validity_ceiling());
        let grid = z_grid(top);
        for id in [BoundId::Main, BoundId::Split, BoundId::Triangle, BoundId::John2d, BoundId::JohnNd] {
            check(&sn, id, &d, &grid)?;
        }
        for id in [BoundId::SdUpper, BoundId::SdJohn2d] {
            check(&sd, id, &d, &grid)?;
        }
        let ks: Vec<f64> = (1..=400).map(|k| k as f64).collect();
        check(&sn, BoundId::Kroger, &d, &ks)?;
        check(&sn, BoundId::Bracket, &d, &ks)?;
        check(&sd, BoundId::SdSum, &d, &ks)?;
        check(&sd, BoundId::HeatTrace, &d, &[0.05, 0.3, 2.0])?;
    }

    #[test]
    fn box_cylinder_bounds(a in 0.5f64..2.0, b in 0.5f64..2.0, depth in 0.3f64..2.0) {
        let c = CylinderDomain::new(3, CylinderBase::Rectangle { a, b }, depth).unwrap();
        let d = Domain::Cylinder(c.clone());
        let sn = cylinder_spectrum(&c, Problem::Sn, 3000).unwrap();
        let sd = cylinder_spectrum(&c, Problem::Sd, 3000).unwrap();
        let top = 0.9 * sn.validity_ceiling().min(sd.validity_ceiling());
        let grid = z_grid(top);
        for id in [BoundId::Main, BoundId::JohnNd, BoundId::ViaNeumann] {
            check(&sn, id, &d, &grid)?;
        }
        check(&sd, BoundId::SdUpper, &d, &grid)?;
        let ks: Vec<f64> = (1..=1000).map(|k| k as f64).collect();
        check(&sn, BoundId::Kroger, &d, &ks)?;
        check(&sn, BoundId::Bracket, &d, &ks)?;
        check(&sd, BoundId::SdSum, &d, &ks)?;
        check(&sd, BoundId::HeatTrace, &d, &[0.5, 1.0, 2.0])?;
    }
}

#[test]
fn deeper_rectangles_slosh_higher() {
    let shallow = rectangle_sn(2.0, 0.3, 40).unwrap();
    let deep = rectangle_sn(2.0, 0.6, 40).unwrap();
    for k in 1..40 {
        assert!(deep.values()[k] >= shallow.values()[k]);
    }
    let shallow = rectangle_sd(2.0, 0.3, 40).unwrap();
    let deep = rectangle_sd(2.0, 0.6, 40).unwrap();
    for k in 0..40 {
        assert!(deep.values()[k] <= shallow.values()[k]);
    }
}
