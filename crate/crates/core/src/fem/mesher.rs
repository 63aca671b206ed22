//! Layered mesher for convex polygons.
//!
//! Horizontal rows of nodes are placed from the free surface down to the
//! deepest vertex (every vertex depth is a row), and consecutive rows are
//! stitched with a zipper that always takes the shorter diagonal. On a
//! rectangle this gives the structured right-triangle grid. An optional
//! grading lets the local size grow linearly with depth, which keeps the
//! resolution where high sloshing modes live.

use crate::error::{Error, Result};
use crate::geometry::{Point, PolygonalDomain};

use super::mesh::{BoundaryEdge, Mesh};

/// Local mesh size `target_h + grading·|y|`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeshOptions {
    pub target_h: f64,
    pub grading: f64,
}

impl MeshOptions {
    pub fn uniform(target_h: f64) -> Self {
        Self { target_h, grading: 0.0 }
    }

    pub fn graded(target_h: f64, grading: f64) -> Self {
        Self { target_h, grading }
    }

    /// Same grading profile with every size halved.
    pub fn refined(&self) -> Self {
        Self { target_h: self.target_h / 2.0, grading: self.grading / 2.0 }
    }

    /// Same grading profile with every size doubled.
    pub fn coarsened(&self) -> Self {
        Self { target_h: self.target_h * 2.0, grading: self.grading * 2.0 }
    }

    fn size_at(&self, y: f64) -> f64 {
        self.target_h + self.grading * y.abs()
    }

    /// Stretched depth coordinate ξ(y) = ∫₀^{|y|} dt / size(t).
    fn stretch(&self, y: f64) -> f64 {
        let d = y.abs();
        if self.grading > 0.0 {
            (1.0 + self.grading * d / self.target_h).ln() / self.grading
        } else {
            d / self.target_h
        }
    }

    fn unstretch(&self, xi: f64) -> f64 {
        if self.grading > 0.0 {
            -(self.target_h / self.grading) * ((self.grading * xi).exp() - 1.0)
        } else {
            -xi * self.target_h
        }
    }
}

/// Uniform triangulation with edges of length about `target_h`.
pub fn triangulate(d: &PolygonalDomain, target_h: f64) -> Result<Mesh> {
    triangulate_with(d, &MeshOptions::uniform(target_h))
}

pub fn triangulate_with(d: &PolygonalDomain, opts: &MeshOptions) -> Result<Mesh> {
    if !(opts.target_h > 0.0) || !(opts.grading >= 0.0) {
        return Err(Error::InvalidArgument("mesh size must be positive and grading ≥ 0".into()));
    }
    if opts.target_h >= d.diameter() {
        return Err(Error::InvalidArgument(format!(
            "target mesh size {} is not smaller than the domain diameter {}",
            opts.target_h,
            d.diameter()
        )));
    }
    if !d.is_convex() {
        return Err(Error::Mesh(
            "the built-in mesher handles convex polygons only; supply a mesh file instead".into(),
        ));
    }
    let tol = d.snap_tolerance().max(1e-12 * d.diameter());

    // Row depths: every vertex depth, subdivided in the stretched coordinate.
    let mut breaks: Vec<f64> = d.vertices().iter().map(|p| p.y).collect();
    breaks.push(0.0);
    breaks.sort_by(|a, b| b.total_cmp(a));
    breaks.dedup_by(|a, b| (*a - *b).abs() <= tol);
    let mut levels = vec![breaks[0]];
    for w in breaks.windows(2) {
        let (top, bottom) = (opts.stretch(w[0]), opts.stretch(w[1]));
        let m = ((bottom - top) - 1e-9).ceil().max(1.0) as usize;
        for i in 1..m {
            levels.push(opts.unstretch(top + (bottom - top) * i as f64 / m as f64));
        }
        levels.push(w[1]);
    }

    let mut nodes: Vec<Point> = Vec::new();
    let mut rows: Vec<Vec<usize>> = Vec::with_capacity(levels.len());
    for &y in &levels {
        let (xl, xr) = cross_section(d, y, tol)?;
        let mut xs = vec![xl];
        // Vertices lying inside this row (e.g. between collinear Free edges).
        let mut inner: Vec<f64> = d
            .vertices()
            .iter()
            .filter(|p| (p.y - y).abs() <= tol && p.x > xl + tol && p.x < xr - tol)
            .map(|p| p.x)
            .collect();
        inner.sort_by(f64::total_cmp);
        inner.push(xr);
        let size = opts.size_at(y);
        for &stop in &inner {
            let start = *xs.last().unwrap();
            if stop - start <= tol {
                continue;
            }
            let m = ((stop - start) / size - 1e-9).ceil().max(1.0) as usize;
            for i in 1..=m {
                xs.push(if i == m { stop } else { start + (stop - start) * i as f64 / m as f64 });
            }
        }
        let row: Vec<usize> = xs
            .iter()
            .map(|&x| {
                nodes.push(Point::new(x, y));
                nodes.len() - 1
            })
            .collect();
        rows.push(row);
    }

    let mut triangles = Vec::new();
    for w in rows.windows(2) {
        zipper(&nodes, &w[0], &w[1], &mut triangles);
    }
    for t in triangles.iter_mut() {
        let [a, b, c] = *t;
        let (pa, pb, pc) = (nodes[a], nodes[b], nodes[c]);
        if (pb.x - pa.x) * (pc.y - pa.y) - (pc.x - pa.x) * (pb.y - pa.y) < 0.0 {
            t.swap(1, 2);
        }
    }

    // Boundary edges inherit the tag of the polygon edge they lie on.
    let mut count = std::collections::HashMap::new();
    for t in &triangles {
        for k in 0..3 {
            let (i, j) = (t[k], t[(k + 1) % 3]);
            *count.entry((i.min(j), i.max(j))).or_insert(0u32) += 1;
        }
    }
    let mut bnd: Vec<(usize, usize)> =
        count.into_iter().filter(|(_, c)| *c == 1).map(|(e, _)| e).collect();
    bnd.sort_unstable();
    let edges: Vec<_> = d.edges().collect();
    let boundary = bnd
        .into_iter()
        .map(|(i, j)| {
            let mid = Point::new(0.5 * (nodes[i].x + nodes[j].x), 0.5 * (nodes[i].y + nodes[j].y));
            let best = edges
                .iter()
                .min_by(|e, f| {
                    seg_dist(mid, e.a, e.b).total_cmp(&seg_dist(mid, f.a, f.b))
                })
                .expect("polygon has edges");
            BoundaryEdge { nodes: [i, j], tag: best.tag }
        })
        .collect();
    let (mesh, _) = Mesh::new(nodes, triangles, boundary)?;
    Ok(mesh)
}

/// Horizontal extent of a convex polygon at height `y`.
fn cross_section(d: &PolygonalDomain, y: f64, tol: f64) -> Result<(f64, f64)> {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for e in d.edges() {
        let (a, b) = (e.a, e.b);
        if (a.y - y).abs() <= tol {
            lo = lo.min(a.x);
            hi = hi.max(a.x);
        }
        if (b.y - y).abs() <= tol {
            lo = lo.min(b.x);
            hi = hi.max(b.x);
        }
        if (a.y - y) * (b.y - y) < 0.0 {
            let x = a.x + (y - a.y) * (b.x - a.x) / (b.y - a.y);
            lo = lo.min(x);
            hi = hi.max(x);
        }
    }
    if !lo.is_finite() {
        return Err(Error::Mesh(format!("no cross-section at depth {y}")));
    }
    Ok((lo, hi))
}

fn seg_dist(p: Point, a: Point, b: Point) -> f64 {
    let (dx, dy) = (b.x - a.x, b.y - a.y);
    let len2 = dx * dx + dy * dy;
    let t = (((p.x - a.x) * dx + (p.y - a.y) * dy) / len2).clamp(0.0, 1.0);
    p.dist(Point::new(a.x + t * dx, a.y + t * dy))
}

/// Stitches two x-sorted rows into triangles, preferring the shorter diagonal.
fn zipper(nodes: &[Point], upper: &[usize], lower: &[usize], out: &mut Vec<[usize; 3]>) {
    let (mut i, mut j) = (0usize, 0usize);
    while i + 1 < upper.len() || j + 1 < lower.len() {
        let advance_upper = if i + 1 >= upper.len() {
            false
        } else if j + 1 >= lower.len() {
            true
        } else {
            let du = nodes[upper[i + 1]].dist(nodes[lower[j]]);
            let dl = nodes[upper[i]].dist(nodes[lower[j + 1]]);
            du <= dl * (1.0 + 1e-12)
        };
        if advance_upper {
            out.push([upper[i], lower[j], upper[i + 1]]);
            i += 1;
        } else {
            out.push([upper[i], lower[j], lower[j + 1]]);
            j += 1;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn check_mesh(m: &Mesh, d: &PolygonalDomain) {
        for t in 0..m.triangles().len() {
            assert!(m.triangle_area(t) > 0.0);
        }
        let total: f64 = (0..m.triangles().len()).map(|t| m.triangle_area(t)).sum();
        assert!((total - d.area()).abs() < 1e-10 * d.area());
        assert!((m.free_length() - d.free_length()).abs() < 1e-12);
        let perimeter: f64 = d.edges().map(|e| e.length()).sum();
        let bl: f64 = m
            .boundary()
            .iter()
            .map(|b| m.nodes()[b.nodes[0]].dist(m.nodes()[b.nodes[1]]))
            .sum();
        assert!((bl - perimeter).abs() < 1e-10 * perimeter);
    }

    #[test]
    fn rectangle_is_structured() {
        let d = PolygonalDomain::rectangle(PI, 1.0).unwrap();
        let m = triangulate(&d, 0.1).unwrap();
        check_mesh(&m, &d);
        assert_eq!(m.nodes().len(), 33 * 11);
        // Nearly square cells split along one diagonal.
        assert!(m.min_angle() > 44.0f64.to_radians());
        assert!(m.mesh_size() <= 1.5 * 0.1);
        assert_eq!(m.free_nodes().len(), 33);
    }

    #[test]
    fn triangle_and_trapezoid_meshes_are_valid() {
        let tri = PolygonalDomain::isoceles_triangle(PI, PI / 4.0).unwrap();
        let m = triangulate(&tri, 0.05).unwrap();
        check_mesh(&m, &tri);
        assert!(m.mesh_size() <= 1.5 * 0.05);
        let trap = PolygonalDomain::trapezoid(4.0, 1.0, 2.0).unwrap();
        let m = triangulate(&trap, 0.1).unwrap();
        check_mesh(&m, &trap);
        let right = PolygonalDomain::triangle(2.0, PI / 2.0, PI / 3.0).unwrap();
        let m = triangulate(&right, 0.05).unwrap();
        check_mesh(&m, &right);
    }

    #[test]
    fn graded_mesh_is_valid_and_coarsens_with_depth() {
        let d = PolygonalDomain::isoceles_triangle(PI, PI / 4.0).unwrap();
        let m = triangulate_with(&d, &MeshOptions::graded(0.02, 0.2)).unwrap();
        check_mesh(&m, &d);
        let uniform = triangulate(&d, 0.02).unwrap();
        assert!(m.nodes().len() * 3 < uniform.nodes().len());
        assert_eq!(m.free_nodes().len(), uniform.free_nodes().len());
    }

    #[test]
    fn rejects_bad_requests() {
        let d = PolygonalDomain::rectangle(1.0, 1.0).unwrap();
        assert!(triangulate(&d, 5.0).is_err());
        assert!(triangulate(&d, -1.0).is_err());
        let l_shape = PolygonalDomain::new(
            vec![
                Point::new(2.0, 0.0),
                Point::new(0.0, 0.0),
                Point::new(0.0, -2.0),
                Point::new(1.0, -2.0),
                Point::new(1.0, -1.0),
                Point::new(2.0, -1.0),
            ],
            &[0],
        )
        .unwrap();
        assert!(matches!(triangulate(&l_shape, 0.1), Err(Error::Mesh(_))));
    }
}
