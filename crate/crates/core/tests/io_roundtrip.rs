use std::f64::consts::PI;

use steklov_core::bounds::{verify, BoundId, BoundParams, DEFAULT_REL_TOL};
use steklov_core::fem::{dtn_spectrum_estimated, triangulate, Mesh, MeshOptions};
use steklov_core::geometry::PolygonalDomain;
use steklov_core::riesz::riesz_curve;
use steklov_core::spectra::{load_spectrum, rectangle_sd, save_spectrum, Problem, Spectrum};

#[test]
fn spectrum_csv_round_trip_is_bit_exact() {
    let dir = tempfile::tempdir().unwrap();
    let s = rectangle_sd(PI, 0.7, 300).unwrap();
    let path = dir.path().join("sd.csv");
    save_spectrum(&s, &path).unwrap();
    let back = load_spectrum(&path).unwrap();
    assert_eq!(back.values(), s.values());
    assert_eq!(back.meta(), s.meta());
    assert_eq!(back.to_csv().lines().skip(2).collect::<Vec<_>>(), s.to_csv().lines().skip(2).collect::<Vec<_>>());
}

#[test]
fn fem_errors_survive_the_csv() {
    let tri = PolygonalDomain::isoceles_triangle(2.0, 1.0).unwrap();
    let est = dtn_spectrum_estimated(&tri, Problem::Sn, 12, &MeshOptions::uniform(0.05)).unwrap();
    let back = Spectrum::from_csv(&est.spectrum.to_csv(), "mem").unwrap();
    assert_eq!(back.errors(), est.spectrum.errors());
    assert_eq!(back.values(), est.spectrum.values());
}

#[test]
fn mesh_text_round_trip() {
    let tri = PolygonalDomain::isoceles_triangle(2.0, 1.0).unwrap();
    let m = triangulate(&tri, 0.2).unwrap();
    let (back, warnings) = Mesh::from_text(&m.to_text()).unwrap();
    assert!(warnings.is_empty());
    assert_eq!(back.triangles(), m.triangles());
    assert_eq!(back.nodes().len(), m.nodes().len());
}

#[test]
fn reports_are_reproducible() {
    let s = rectangle_sd(PI, 1.0, 2000).unwrap();
    let grid: Vec<f64> = (1..=500).map(|i| i as f64).collect();
    let p = BoundParams::from_meta(s.meta());
    let a = verify(&s, BoundId::SdJohn2d, &p, None, &grid, DEFAULT_REL_TOL).unwrap().to_json().unwrap();
    let b = verify(&s, BoundId::SdJohn2d, &p, None, &grid, DEFAULT_REL_TOL).unwrap().to_json().unwrap();
    assert_eq!(a, b);
    let c1 = riesz_curve(&s, 0.5, &grid).unwrap().to_csv();
    let c2 = riesz_curve(&s, 0.5, &grid).unwrap().to_csv();
    assert_eq!(c1, c2);
}
