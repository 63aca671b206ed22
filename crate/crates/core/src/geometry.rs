//! Domain descriptions: planar polygons with a free surface on the axis
//! `y = 0`, cylinders `F × (−h, 0)` and a cone.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn dist(self, other: Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum EdgeTag {
    Free,
    Wall,
}

/// A straight boundary edge `a → b` (counterclockwise traversal).
#[derive(Debug, Clone, Copy)]
pub struct Edge {
    pub index: usize,
    pub a: Point,
    pub b: Point,
    pub tag: EdgeTag,
}

impl Edge {
    pub fn length(&self) -> f64 {
        self.a.dist(self.b)
    }

    /// Unit outward normal; for a counterclockwise polygon this is the
    /// edge direction rotated clockwise.
    pub fn outward_normal(&self) -> Point {
        let len = self.length();
        Point::new((self.b.y - self.a.y) / len, -(self.b.x - self.a.x) / len)
    }

    /// ⟨n, e₂⟩, constant along a straight edge.
    pub fn normal_y(&self) -> f64 {
        -(self.b.x - self.a.x) / self.length()
    }

    pub fn midpoint(&self) -> Point {
        Point::new(0.5 * (self.a.x + self.b.x), 0.5 * (self.a.y + self.b.y))
    }
}

/// A point where a Free edge meets a Wall edge, with the interior angle
/// between them.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Corner {
    pub vertex: usize,
    pub point: Point,
    pub angle: f64,
    pub free_edge: usize,
    pub wall_edge: usize,
}

/// Threshold on ⟨n, e₂⟩ above which a wall edge is counted in B⁺.
const NORMAL_SIGN_TOL: f64 = 1e-12;

/// Simple counterclockwise polygon whose Free edges lie on `y = 0` and whose
/// Wall edges lie below it.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PolygonalDomain {
    vertices: Vec<Point>,
    tags: Vec<EdgeTag>,
    snap_tol: f64,
}

impl PolygonalDomain {
    /// Builds and validates a domain. Edge `i` joins vertex `i` to vertex
    /// `i + 1 (mod n)`; `free_edges` lists the Free edge indices.
    pub fn new(vertices: Vec<Point>, free_edges: &[usize]) -> Result<Self> {
        let n = vertices.len();
        if n < 3 {
            return Err(Error::InvalidDomain(format!("polygon needs ≥ 3 vertices, got {n}")));
        }
        if vertices.iter().any(|p| !p.x.is_finite() || !p.y.is_finite()) {
            return Err(Error::InvalidDomain("non-finite vertex coordinate".into()));
        }
        let mut tags = vec![EdgeTag::Wall; n];
        for &e in free_edges {
            if e >= n {
                return Err(Error::InvalidDomain(format!("free edge index {e} out of range (n = {n})")));
            }
            tags[e] = EdgeTag::Free;
        }
        if !tags.contains(&EdgeTag::Free) {
            return Err(Error::InvalidDomain("the free surface is empty".into()));
        }

        let diameter = diameter(&vertices);
        let snap_tol = 1e-9 * diameter;
        let mut vertices = vertices;
        for (i, tag) in tags.iter().enumerate() {
            if *tag == EdgeTag::Free {
                for j in [i, (i + 1) % n] {
                    if vertices[j].y.abs() > snap_tol {
                        return Err(Error::InvalidDomain(format!(
                            "free edge {i} is off the axis y = 0 (vertex {j} has y = {})",
                            vertices[j].y
                        )));
                    }
                }
            }
        }
        for v in vertices.iter_mut() {
            if v.y.abs() <= snap_tol {
                v.y = 0.0;
            } else if v.y > 0.0 {
                return Err(Error::InvalidDomain(format!(
                    "vertex ({}, {}) lies above the free surface",
                    v.x, v.y
                )));
            }
        }

        let domain = Self { vertices, tags, snap_tol };
        if signed_area(&domain.vertices) <= 0.0 {
            return Err(Error::InvalidDomain("vertices must be ordered counterclockwise".into()));
        }
        domain.check_simple()?;
        for e in domain.edges() {
            match e.tag {
                EdgeTag::Free => {
                    if e.b.x >= e.a.x {
                        return Err(Error::InvalidDomain(format!(
                            "free edge {} does not bound the domain from above",
                            e.index
                        )));
                    }
                }
                EdgeTag::Wall => {
                    if e.a.y >= 0.0 && e.b.y >= 0.0 {
                        return Err(Error::InvalidDomain(format!(
                            "wall edge {} lies on the free surface",
                            e.index
                        )));
                    }
                }
            }
        }
        for i in 0..n {
            let prev = (i + n - 1) % n;
            if domain.vertices[i].y == 0.0
                && domain.tags[i] == EdgeTag::Wall
                && domain.tags[prev] == EdgeTag::Wall
            {
                return Err(Error::InvalidDomain(format!(
                    "wall touches the free surface at vertex {i} away from a corner"
                )));
            }
        }
        Ok(domain)
    }

    /// Rectangle (0, ℓ) × (−h, 0) with its top edge free.
    pub fn rectangle(length: f64, depth: f64) -> Result<Self> {
        if !(length > 0.0 && depth > 0.0) {
            return Err(Error::InvalidArgument("rectangle: ℓ and h must be positive".into()));
        }
        Self::new(
            vec![
                Point::new(0.0, -depth),
                Point::new(length, -depth),
                Point::new(length, 0.0),
                Point::new(0.0, 0.0),
            ],
            &[2],
        )
    }

    /// Triangle with free side (0, L) and angles α (at the origin) and β
    /// (at (L, 0)) between the free side and the walls.
    pub fn triangle(length: f64, alpha: f64, beta: f64) -> Result<Self> {
        if !(length > 0.0 && alpha > 0.0 && beta > 0.0 && alpha + beta < PI) {
            return Err(Error::InvalidArgument(
                "triangle: need L > 0, α, β > 0 and α + β < π".into(),
            ));
        }
        // Apex from the law of sines.
        let side = length * beta.sin() / (alpha + beta).sin();
        let apex = Point::new(side * alpha.cos(), -side * alpha.sin());
        Self::new(vec![Point::new(0.0, 0.0), apex, Point::new(length, 0.0)], &[2])
    }

    /// Isoceles triangle with both wall angles equal to α.
    pub fn isoceles_triangle(length: f64, alpha: f64) -> Result<Self> {
        Self::triangle(length, alpha, alpha)
    }

    /// Symmetric trapezoid with free side (0, L), depth h and wall angle α
    /// (α < π/2: walls slope inwards; α > π/2: the bottom is wider).
    pub fn trapezoid(length: f64, depth: f64, alpha: f64) -> Result<Self> {
        if !(length > 0.0 && depth > 0.0 && alpha > 0.0 && alpha < PI) {
            return Err(Error::InvalidArgument("trapezoid: need L, h > 0 and α ∈ (0, π)".into()));
        }
        let inset = depth / alpha.tan();
        if length - 2.0 * inset <= 0.0 {
            return Err(Error::InvalidArgument(
                "trapezoid: walls meet above the bottom (use a triangle)".into(),
            ));
        }
        Self::new(
            vec![
                Point::new(0.0, 0.0),
                Point::new(inset, -depth),
                Point::new(length - inset, -depth),
                Point::new(length, 0.0),
            ],
            &[3],
        )
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn tags(&self) -> &[EdgeTag] {
        &self.tags
    }

    pub fn snap_tolerance(&self) -> f64 {
        self.snap_tol
    }

    pub fn edges(&self) -> impl Iterator<Item = Edge> + '_ {
        let n = self.vertices.len();
        (0..n).map(move |i| Edge {
            index: i,
            a: self.vertices[i],
            b: self.vertices[(i + 1) % n],
            tag: self.tags[i],
        })
    }

    pub fn edge(&self, i: usize) -> Edge {
        let n = self.vertices.len();
        Edge { index: i, a: self.vertices[i], b: self.vertices[(i + 1) % n], tag: self.tags[i] }
    }

    pub fn wall_edges(&self) -> impl Iterator<Item = Edge> + '_ {
        self.edges().filter(|e| e.tag == EdgeTag::Wall)
    }

    /// |F|: total length of the Free edges.
    pub fn free_length(&self) -> f64 {
        self.edges().filter(|e| e.tag == EdgeTag::Free).map(|e| e.length()).sum()
    }

    pub fn depth(&self) -> f64 {
        self.vertices.iter().map(|p| -p.y).fold(0.0, f64::max)
    }

    pub fn area(&self) -> f64 {
        signed_area(&self.vertices)
    }

    pub fn diameter(&self) -> f64 {
        diameter(&self.vertices)
    }

    /// Interior angles at every Free/Wall corner, in vertex order.
    pub fn corner_angles(&self) -> Result<Vec<Corner>> {
        let n = self.vertices.len();
        let mut corners = Vec::new();
        for i in 0..n {
            let prev = (i + n - 1) % n;
            if self.tags[prev] == self.tags[i] {
                continue;
            }
            let angle = interior_angle(self.vertices[prev], self.vertices[i], self.vertices[(i + 1) % n]);
            if !(angle > 0.0 && angle < PI) {
                return Err(Error::InvalidDomain(format!(
                    "corner at vertex {i} has interior angle {angle} outside (0, π)"
                )));
            }
            let (free_edge, wall_edge) =
                if self.tags[i] == EdgeTag::Free { (i, prev) } else { (prev, i) };
            corners.push(Corner { vertex: i, point: self.vertices[i], angle, free_edge, wall_edge });
        }
        Ok(corners)
    }

    /// The (α, β) pair when the domain has exactly two corners, ordered by
    /// the x-coordinate of the corner point.
    pub fn angle_pair(&self) -> Result<(f64, f64)> {
        let mut corners = self.corner_angles()?;
        if corners.len() != 2 {
            return Err(Error::Hypothesis(format!(
                "the two-corner bound needs exactly two corner points, found {}",
                corners.len()
            )));
        }
        corners.sort_by(|a, b| a.point.x.total_cmp(&b.point.x));
        Ok((corners[0].angle, corners[1].angle))
    }

    /// Wall edges split by the sign of ⟨n, e₂⟩: (B⁺, B⁻), B⁻ taking ≤ 0.
    pub fn wall_sign_split(&self) -> (Vec<usize>, Vec<usize>) {
        let mut plus = Vec::new();
        let mut minus = Vec::new();
        for e in self.wall_edges() {
            if e.normal_y() > NORMAL_SIGN_TOL {
                plus.push(e.index);
            } else {
                minus.push(e.index);
            }
        }
        (plus, minus)
    }

    /// ∫_{B⁻} |⟨n, e₂⟩| ds and ∫_{B⁺} ⟨n, e₂⟩ ds.
    pub fn normal_moments(&self) -> (f64, f64) {
        let mut minus = 0.0;
        let mut plus = 0.0;
        for e in self.wall_edges() {
            let ny = e.normal_y();
            if ny > NORMAL_SIGN_TOL {
                plus += ny * e.length();
            } else {
                minus += ny.abs() * e.length();
            }
        }
        (minus, plus)
    }

    /// Smallest depth over B⁺; `None` when B⁺ is empty.
    pub fn delta_overhang(&self) -> Result<Option<f64>> {
        let (plus, _) = self.wall_sign_split();
        if plus.is_empty() {
            return Ok(None);
        }
        let delta = plus
            .iter()
            .map(|&i| {
                let e = self.edge(i);
                (-e.a.y).min(-e.b.y)
            })
            .fold(f64::INFINITY, f64::min);
        if delta <= self.snap_tol {
            return Err(Error::Hypothesis(
                "an upward-facing wall (B⁺) reaches the free surface, so δ = 0".into(),
            ));
        }
        Ok(Some(delta))
    }

    /// Merged x-intervals covered by the Free edges.
    pub fn free_segments(&self) -> Vec<(f64, f64)> {
        let mut segs: Vec<(f64, f64)> = self
            .edges()
            .filter(|e| e.tag == EdgeTag::Free)
            .map(|e| (e.a.x.min(e.b.x), e.a.x.max(e.b.x)))
            .collect();
        segs.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut merged: Vec<(f64, f64)> = Vec::new();
        for (lo, hi) in segs {
            match merged.last_mut() {
                Some(last) if lo <= last.1 + self.snap_tol => last.1 = last.1.max(hi),
                _ => merged.push((lo, hi)),
            }
        }
        merged
    }

    /// Ω ⊂ F × (−∞, 0): the Free part is one segment and every vertex lies
    /// in its x-span.
    pub fn john_condition(&self) -> bool {
        let segs = self.free_segments();
        if segs.len() != 1 {
            return false;
        }
        let (lo, hi) = segs[0];
        self.vertices
            .iter()
            .all(|p| p.x >= lo - self.snap_tol && p.x <= hi + self.snap_tol)
    }

    /// The wall leaving `corner` stays inside the strip above the Free part
    /// near the corner (vertical or pointing towards the Free side).
    pub fn local_john_condition(&self, corner: &Corner) -> bool {
        let v = corner.point;
        let free = self.edge(corner.free_edge);
        let wall = self.edge(corner.wall_edge);
        let free_other = if free.a == v { free.b } else { free.a };
        let wall_other = if wall.a == v { wall.b } else { wall.a };
        let side = (free_other.x - v.x).signum();
        let dx = wall_other.x - v.x;
        dx * side >= -self.snap_tol
    }

    /// Convexity (collinear vertices allowed).
    pub fn is_convex(&self) -> bool {
        let n = self.vertices.len();
        (0..n).all(|i| {
            let a = self.vertices[(i + n - 1) % n];
            let b = self.vertices[i];
            let c = self.vertices[(i + 1) % n];
            cross(sub(b, a), sub(c, b)) >= -1e-12 * self.diameter().powi(2)
        })
    }

    /// Even-odd point-in-polygon test (points on the boundary are unspecified).
    pub fn contains(&self, p: Point) -> bool {
        let n = self.vertices.len();
        let mut inside = false;
        for i in 0..n {
            let a = self.vertices[i];
            let b = self.vertices[(i + 1) % n];
            if (a.y > p.y) != (b.y > p.y) {
                let x = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
                if p.x < x {
                    inside = !inside;
                }
            }
        }
        inside
    }

    /// True when the rectangle (x₀, x₀+ℓ) × (−d, 0) spanning the Free part
    /// lies inside the domain (checked on the polygon's convex hull of the
    /// rectangle corners and edge crossings).
    pub fn contains_free_rectangle(&self, d: f64) -> bool {
        let segs = self.free_segments();
        if segs.len() != 1 {
            return false;
        }
        let (lo, hi) = segs[0];
        let eps = 1e-9 * self.diameter();
        let probes = [
            Point::new(lo + eps, -d + eps),
            Point::new(hi - eps, -d + eps),
            Point::new(lo + eps, -eps),
            Point::new(hi - eps, -eps),
        ];
        if !probes.iter().all(|p| self.contains(*p)) {
            return false;
        }
        // No polygon vertex strictly inside the rectangle.
        !self
            .vertices
            .iter()
            .any(|v| v.x > lo + eps && v.x < hi - eps && v.y < -eps && v.y > -d + eps)
    }

    fn check_simple(&self) -> Result<()> {
        let n = self.vertices.len();
        for i in 0..n {
            let (a, b) = (self.vertices[i], self.vertices[(i + 1) % n]);
            if a.dist(b) == 0.0 {
                return Err(Error::InvalidDomain(format!("edge {i} has zero length")));
            }
            for j in (i + 1)..n {
                let adjacent = j == i + 1 || (i == 0 && j == n - 1);
                let (c, d) = (self.vertices[j], self.vertices[(j + 1) % n]);
                if adjacent {
                    // Adjacent edges must not fold back onto each other.
                    let shared = if j == i + 1 { b } else { a };
                    let p = if j == i + 1 { a } else { b };
                    let q = if j == i + 1 { d } else { c };
                    let u = sub(p, shared);
                    let w = sub(q, shared);
                    if cross(u, w).abs() <= 1e-14 * norm(u) * norm(w) && dot(u, w) > 0.0 {
                        return Err(Error::InvalidDomain(format!("edges {i} and {j} overlap")));
                    }
                } else if segments_intersect(a, b, c, d) {
                    return Err(Error::InvalidDomain(format!(
                        "polygon is not simple: edges {i} and {j} intersect"
                    )));
                }
            }
        }
        Ok(())
    }
}

fn sub(a: Point, b: Point) -> Point {
    Point::new(a.x - b.x, a.y - b.y)
}

fn cross(a: Point, b: Point) -> f64 {
    a.x * b.y - a.y * b.x
}

fn dot(a: Point, b: Point) -> f64 {
    a.x * b.x + a.y * b.y
}

fn norm(a: Point) -> f64 {
    a.x.hypot(a.y)
}

fn signed_area(v: &[Point]) -> f64 {
    let n = v.len();
    0.5 * (0..n).map(|i| cross(v[i], v[(i + 1) % n])).sum::<f64>()
}

fn diameter(v: &[Point]) -> f64 {
    let mut d: f64 = 0.0;
    for (i, p) in v.iter().enumerate() {
        for q in &v[i + 1..] {
            d = d.max(p.dist(*q));
        }
    }
    d
}

/// Interior angle at `b` of a counterclockwise polygon `… a, b, c …`.
fn interior_angle(a: Point, b: Point, c: Point) -> f64 {
    let to_next = sub(c, b);
    let to_prev = sub(a, b);
    let ang = cross(to_next, to_prev).atan2(dot(to_next, to_prev));
    if ang < 0.0 {
        ang + 2.0 * PI
    } else {
        ang
    }
}

fn orient(a: Point, b: Point, c: Point) -> f64 {
    cross(sub(b, a), sub(c, a))
}

fn on_segment(a: Point, b: Point, p: Point) -> bool {
    p.x >= a.x.min(b.x) && p.x <= a.x.max(b.x) && p.y >= a.y.min(b.y) && p.y <= a.y.max(b.y)
}

fn segments_intersect(a: Point, b: Point, c: Point, d: Point) -> bool {
    let d1 = orient(c, d, a);
    let d2 = orient(c, d, b);
    let d3 = orient(a, b, c);
    let d4 = orient(a, b, d);
    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0))
        && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0))
    {
        return true;
    }
    (d1 == 0.0 && on_segment(c, d, a))
        || (d2 == 0.0 && on_segment(c, d, b))
        || (d3 == 0.0 && on_segment(a, b, c))
        || (d4 == 0.0 && on_segment(a, b, d))
}

/// Base of a cylinder F × (−h, 0).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CylinderBase {
    /// F = (0, ℓ), so n = 2.
    Interval { length: f64 },
    /// F = (0, a) × (0, b), so n = 3.
    Rectangle { a: f64, b: f64 },
    /// Base Laplacian eigenvalues supplied directly.
    Explicit {
        neumann: Vec<f64>,
        #[serde(default)]
        dirichlet: Vec<f64>,
        area: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CylinderDomain {
    dim: u32,
    base: CylinderBase,
    depth: f64,
}

impl CylinderDomain {
    pub fn new(dim: u32, base: CylinderBase, depth: f64) -> Result<Self> {
        if !(depth > 0.0) {
            return Err(Error::InvalidDomain(format!("cylinder depth must be positive, got {depth}")));
        }
        match &base {
            CylinderBase::Interval { length } => {
                if dim != 2 || !(*length > 0.0) {
                    return Err(Error::InvalidDomain("interval base needs n = 2 and ℓ > 0".into()));
                }
            }
            CylinderBase::Rectangle { a, b } => {
                if dim != 3 || !(*a > 0.0 && *b > 0.0) {
                    return Err(Error::InvalidDomain("rectangle base needs n = 3 and a, b > 0".into()));
                }
            }
            CylinderBase::Explicit { neumann, dirichlet, area } => {
                if dim < 2 || !(*area > 0.0) {
                    return Err(Error::InvalidDomain("explicit base needs n ≥ 2 and |F| > 0".into()));
                }
                for list in [neumann, dirichlet] {
                    if list.iter().any(|v| !(*v >= 0.0)) || list.windows(2).any(|w| w[1] < w[0]) {
                        return Err(Error::InvalidDomain(
                            "base eigenvalues must be nonnegative and sorted".into(),
                        ));
                    }
                }
            }
        }
        Ok(Self { dim, base, depth })
    }

    pub fn dimension(&self) -> u32 {
        self.dim
    }

    pub fn base(&self) -> &CylinderBase {
        &self.base
    }

    pub fn depth(&self) -> f64 {
        self.depth
    }

    pub fn base_area(&self) -> f64 {
        match &self.base {
            CylinderBase::Interval { length } => *length,
            CylinderBase::Rectangle { a, b } => a * b,
            CylinderBase::Explicit { area, .. } => *area,
        }
    }
}

/// Cone {tan²α (x² + y²) = (z + h)², −h < z < 0} in R³ with its top disk free.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConeDomain {
    alpha: f64,
    depth: f64,
}

impl ConeDomain {
    pub fn new(alpha: f64, depth: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha < PI) || (alpha - PI / 2.0).abs() < 1e-12 {
            return Err(Error::InvalidDomain(format!(
                "cone angle must lie in (0, π/2) ∪ (π/2, π), got {alpha}"
            )));
        }
        if !(depth > 0.0) {
            return Err(Error::InvalidDomain(format!("cone depth must be positive, got {depth}")));
        }
        Ok(Self { alpha, depth })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn depth(&self) -> f64 {
        self.depth
    }

    /// Radius of the free disk, h / |tan α|.
    pub fn free_radius(&self) -> f64 {
        self.depth / self.alpha.tan().abs()
    }

    pub fn free_area(&self) -> f64 {
        PI * self.free_radius().powi(2)
    }
}

/// Any domain the bounds can be evaluated on.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum Domain {
    Polygon(PolygonalDomain),
    Cylinder(CylinderDomain),
    Cone(ConeDomain),
}

impl Domain {
    pub fn dimension(&self) -> u32 {
        match self {
            Domain::Polygon(_) => 2,
            Domain::Cylinder(c) => c.dimension(),
            Domain::Cone(_) => 3,
        }
    }

    /// |F|, the (n−1)-volume of the free surface.
    pub fn free_area(&self) -> f64 {
        match self {
            Domain::Polygon(p) => p.free_length(),
            Domain::Cylinder(c) => c.base_area(),
            Domain::Cone(c) => c.free_area(),
        }
    }

    pub fn depth(&self) -> f64 {
        match self {
            Domain::Polygon(p) => p.depth(),
            Domain::Cylinder(c) => c.depth(),
            Domain::Cone(c) => c.depth(),
        }
    }

    /// Ω ⊂ F × (−∞, 0).
    pub fn john_condition(&self) -> bool {
        match self {
            Domain::Polygon(p) => p.john_condition(),
            Domain::Cylinder(_) => true,
            Domain::Cone(c) => c.alpha() < PI / 2.0,
        }
    }

    /// B⁺ is empty (no upward-facing wall).
    pub fn walls_face_down(&self) -> bool {
        match self {
            Domain::Polygon(p) => p.wall_sign_split().0.is_empty(),
            Domain::Cylinder(_) => true,
            Domain::Cone(c) => c.alpha() < PI / 2.0,
        }
    }

    /// (∫_{B⁻} |⟨n,e_n⟩| ds, ∫_{B⁺} ⟨n,e_n⟩ ds).
    pub fn normal_moments(&self) -> (f64, f64) {
        match self {
            Domain::Polygon(p) => p.normal_moments(),
            Domain::Cylinder(c) => (c.base_area(), 0.0),
            // The wall projects onto the free disk.
            Domain::Cone(c) if c.alpha() < PI / 2.0 => (c.free_area(), 0.0),
            Domain::Cone(c) => (0.0, c.free_area()),
        }
    }

    /// Overhang depth δ (None when B⁺ is empty).
    pub fn delta_overhang(&self) -> Result<Option<f64>> {
        match self {
            Domain::Polygon(p) => p.delta_overhang(),
            Domain::Cylinder(_) => Ok(None),
            Domain::Cone(c) if c.alpha() < PI / 2.0 => Ok(None),
            Domain::Cone(_) => Err(Error::Hypothesis(
                "the obtuse cone wall reaches the free surface, so δ = 0".into(),
            )),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn square() -> PolygonalDomain {
        PolygonalDomain::rectangle(1.0, 1.0).unwrap()
    }

    /// A domain whose right wall overhangs: the wall leaves the surface
    /// going down-left, then turns back out under a ledge.
    fn overhang() -> PolygonalDomain {
        PolygonalDomain::new(
            vec![
                Point::new(0.0, 0.0),
                Point::new(0.0, -1.0),
                Point::new(2.0, -1.0),
                Point::new(2.0, -0.5),
                Point::new(1.5, -0.25),
                Point::new(1.5, 0.0),
            ],
            &[5],
        )
        .unwrap()
    }

    #[test]
    fn free_length_examples() {
        assert_eq!(square().free_length(), 1.0);
        let tri = PolygonalDomain::new(
            vec![Point::new(0.0, 0.0), Point::new(0.4, -0.7), Point::new(2.0, 0.0)],
            &[2],
        )
        .unwrap();
        assert!((tri.free_length() - 2.0).abs() < 1e-15);
        assert!((tri.depth() - 0.7).abs() < 1e-15);
        // Two Free pieces separated by a dip of the wall.
        let w = PolygonalDomain::new(
            vec![
                Point::new(0.0, 0.0),
                Point::new(0.0, -1.0),
                Point::new(1.5, -1.0),
                Point::new(1.5, 0.0),
                Point::new(0.8, 0.0),
                Point::new(0.6, -0.2),
                Point::new(0.3, 0.0),
            ],
            &[3, 6],
        )
        .unwrap();
        assert!((w.free_length() - 1.0).abs() < 1e-14);
        assert_eq!(w.free_segments().len(), 2);
        assert!(!w.john_condition());
    }

    #[test]
    fn rejects_bad_domains() {
        // Clockwise.
        assert!(PolygonalDomain::new(
            vec![Point::new(0.0, 0.0), Point::new(1.0, 0.0), Point::new(0.5, -1.0)],
            &[0]
        )
        .is_err());
        // Free edge off axis.
        assert!(PolygonalDomain::new(
            vec![Point::new(0.0, -1.0), Point::new(1.0, -1.0), Point::new(1.0, -0.1), Point::new(0.0, 0.0)],
            &[2]
        )
        .is_err());
        // Self-intersecting bow tie.
        assert!(PolygonalDomain::new(
            vec![
                Point::new(0.0, -1.0),
                Point::new(1.0, 0.0),
                Point::new(0.0, 0.0),
                Point::new(1.0, -1.0)
            ],
            &[1]
        )
        .is_err());
        // No free edge.
        assert!(PolygonalDomain::new(
            vec![Point::new(0.0, -1.0), Point::new(1.0, -1.0), Point::new(1.0, 0.0), Point::new(0.0, 0.0)],
            &[]
        )
        .is_err());
    }

    #[test]
    fn snaps_noisy_coordinates() {
        let d = PolygonalDomain::new(
            vec![
                Point::new(0.0, -1.0),
                Point::new(1.0, -1.0),
                Point::new(1.0, 1e-12),
                Point::new(0.0, -3e-13),
            ],
            &[2],
        )
        .unwrap();
        assert!(d.vertices().iter().filter(|p| p.y == 0.0).count() == 2);
    }

    #[test]
    fn corner_angles_examples() {
        let c = square().corner_angles().unwrap();
        assert_eq!(c.len(), 2);
        for corner in &c {
            assert!((corner.angle - PI / 2.0).abs() < 1e-12);
        }
        let tri = PolygonalDomain::isoceles_triangle(2.0, PI / 4.0).unwrap();
        let (a, b) = tri.angle_pair().unwrap();
        assert!((a - PI / 4.0).abs() < 1e-12 && (b - PI / 4.0).abs() < 1e-12);
        // Trapezoids with wall slopes ±1.
        let narrow = PolygonalDomain::trapezoid(4.0, 1.0, PI / 4.0).unwrap();
        let (a, b) = narrow.angle_pair().unwrap();
        assert!((a - PI / 4.0).abs() < 1e-12 && (b - PI / 4.0).abs() < 1e-12);
        let wide = PolygonalDomain::trapezoid(4.0, 1.0, 3.0 * PI / 4.0).unwrap();
        let (a, b) = wide.angle_pair().unwrap();
        assert!((a - 3.0 * PI / 4.0).abs() < 1e-12 && (b - 3.0 * PI / 4.0).abs() < 1e-12);
    }

    #[test]
    fn wall_split_examples() {
        let (plus, minus) = square().wall_sign_split();
        assert!(plus.is_empty());
        assert_eq!(minus.len(), 3);
        assert_eq!(square().delta_overhang().unwrap(), None);
        let tri = PolygonalDomain::isoceles_triangle(2.0, PI / 3.0).unwrap();
        assert!(tri.wall_sign_split().0.is_empty());

        let o = overhang();
        let (plus, _) = o.wall_sign_split();
        // Edge 4 (1.5,-0.25) → (1.5,0) is vertical; edge 3 (2,-0.5) → (1.5,-0.25)
        // faces up and to the right.
        assert_eq!(plus, vec![3]);
        assert!((o.delta_overhang().unwrap().unwrap() - 0.25).abs() < 1e-15);
        assert!(!o.john_condition());
    }

    #[test]
    fn overhang_touching_surface_is_rejected() {
        let d = PolygonalDomain::new(
            vec![
                Point::new(0.0, 0.0),
                Point::new(0.0, -1.0),
                Point::new(2.0, -1.0),
                Point::new(1.5, 0.0),
            ],
            &[3],
        )
        .unwrap();
        assert!(d.delta_overhang().is_err());
    }

    #[test]
    fn john_conditions() {
        assert!(square().john_condition());
        assert!(PolygonalDomain::isoceles_triangle(1.0, 1.0).unwrap().john_condition());
        assert!(!PolygonalDomain::trapezoid(4.0, 1.0, 2.0).unwrap().john_condition());

        let sq = square();
        for c in sq.corner_angles().unwrap() {
            assert!(sq.local_john_condition(&c));
        }
        let tri = PolygonalDomain::isoceles_triangle(1.0, 0.6).unwrap();
        for c in tri.corner_angles().unwrap() {
            assert!(tri.local_john_condition(&c));
        }
        let wide = PolygonalDomain::trapezoid(4.0, 1.0, 2.0).unwrap();
        for c in wide.corner_angles().unwrap() {
            assert!(!wide.local_john_condition(&c));
        }
    }

    #[test]
    fn outward_normals_point_out() {
        for d in [square(), overhang(), PolygonalDomain::trapezoid(3.0, 0.7, 1.2).unwrap()] {
            let scale = d.diameter();
            for e in d.edges() {
                let n = e.outward_normal();
                assert!((n.x.hypot(n.y) - 1.0).abs() < 1e-12);
                let m = e.midpoint();
                let out = Point::new(m.x + 1e-6 * scale * n.x, m.y + 1e-6 * scale * n.y);
                let inn = Point::new(m.x - 1e-6 * scale * n.x, m.y - 1e-6 * scale * n.y);
                assert!(!d.contains(out), "edge {}", e.index);
                assert!(d.contains(inn), "edge {}", e.index);
            }
        }
    }

    #[test]
    fn free_rectangle_containment() {
        assert!(PolygonalDomain::rectangle(PI, 1.0).unwrap().contains_free_rectangle(1.0));
        assert!(!PolygonalDomain::rectangle(PI, 0.5).unwrap().contains_free_rectangle(1.0));
        assert!(!PolygonalDomain::isoceles_triangle(PI, 1.0).unwrap().contains_free_rectangle(0.1));
    }

    #[test]
    fn cone_and_cylinder() {
        let cone = ConeDomain::new(PI / 4.0, 1.0).unwrap();
        assert!((cone.free_area() - PI).abs() < 1e-14);
        assert!(ConeDomain::new(PI / 2.0, 1.0).is_err());
        let cyl = CylinderDomain::new(3, CylinderBase::Rectangle { a: 1.0, b: 2.0 }, 0.5).unwrap();
        assert_eq!(cyl.base_area(), 2.0);
        assert!(CylinderDomain::new(2, CylinderBase::Rectangle { a: 1.0, b: 2.0 }, 0.5).is_err());
        assert!(CylinderDomain::new(2, CylinderBase::Interval { length: 1.0 }, 0.0).is_err());
    }

    proptest! {
        #[test]
        fn rectangle_invariants(l in 0.01f64..100.0, h in 0.01f64..100.0, s in 0.01f64..100.0) {
            let d = PolygonalDomain::rectangle(l, h).unwrap();
            for c in d.corner_angles().unwrap() {
                prop_assert!((c.angle - PI / 2.0).abs() < 1e-12);
            }
            let (plus, minus) = d.wall_sign_split();
            prop_assert_eq!(plus.len() + minus.len(), d.wall_edges().count());
            prop_assert!(d.john_condition());
            // Horizontal scaling keeps the John condition.
            let scaled = PolygonalDomain::new(
                d.vertices().iter().map(|p| Point::new(p.x * s, p.y)).collect(),
                &[2],
            ).unwrap();
            prop_assert!(scaled.john_condition());
        }

        #[test]
        fn split_is_partition(l in 0.5f64..5.0, h in 0.1f64..2.0, a in 0.2f64..2.9) {
            if let Ok(d) = PolygonalDomain::trapezoid(l, h, a) {
                let (plus, minus) = d.wall_sign_split();
                let mut all: Vec<usize> = plus.iter().chain(&minus).copied().collect();
                all.sort();
                let walls: Vec<usize> = d.wall_edges().map(|e| e.index).collect();
                prop_assert_eq!(all, walls);
            }
        }
    }
}
