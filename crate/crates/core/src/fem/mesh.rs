//! Triangle meshes with tagged boundary edges, and the plain-text mesh format.
//!
//! File format (indices are 0-based, `#` starts a comment):
//!
//! ```text
//! <node count>
//! x y            (one line per node)
//! <triangle count>
//! i j k          (one line per triangle)
//! <boundary edge count>
//! i j Free|Wall  (one line per boundary edge)
//! ```

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::geometry::{EdgeTag, Point};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryEdge {
    pub nodes: [usize; 2],
    pub tag: EdgeTag,
}

/// A validated conforming triangulation. Triangles are counterclockwise.
#[derive(Debug, Clone)]
pub struct Mesh {
    nodes: Vec<Point>,
    triangles: Vec<[usize; 3]>,
    boundary: Vec<BoundaryEdge>,
    h: f64,
}

fn signed_area(a: Point, b: Point, c: Point) -> f64 {
    0.5 * ((b.x - a.x) * (c.y - a.y) - (c.x - a.x) * (b.y - a.y))
}

fn edge_key(i: usize, j: usize) -> (usize, usize) {
    (i.min(j), i.max(j))
}

impl Mesh {
    /// Validates a mesh. Clockwise triangles are flipped and reported in the
    /// returned warnings.
    pub fn new(
        nodes: Vec<Point>,
        mut triangles: Vec<[usize; 3]>,
        boundary: Vec<BoundaryEdge>,
    ) -> Result<(Self, Vec<String>)> {
        let n = nodes.len();
        let mut warnings = Vec::new();
        if n < 3 || triangles.is_empty() {
            return Err(Error::Mesh("a mesh needs at least 3 nodes and 1 triangle".into()));
        }
        if let Some(p) = nodes.iter().position(|p| !(p.x.is_finite() && p.y.is_finite())) {
            return Err(Error::Mesh(format!("node {p} has non-finite coordinates")));
        }
        let scale = nodes.iter().fold(0.0f64, |m, p| m.max(p.x.abs()).max(p.y.abs())).max(1e-300);
        let mut used = vec![false; n];
        let mut edges: HashMap<(usize, usize), u32> = HashMap::new();
        for (t, tri) in triangles.iter_mut().enumerate() {
            if tri.iter().any(|&i| i >= n) {
                return Err(Error::Mesh(format!("triangle {t} references a node index ≥ {n}")));
            }
            if tri[0] == tri[1] || tri[1] == tri[2] || tri[0] == tri[2] {
                return Err(Error::Mesh(format!("triangle {t} repeats a node")));
            }
            let area = signed_area(nodes[tri[0]], nodes[tri[1]], nodes[tri[2]]);
            if area.abs() <= 1e-14 * scale * scale {
                return Err(Error::Mesh(format!("triangle {t} is degenerate (area {area:e})")));
            }
            if area < 0.0 {
                tri.swap(1, 2);
                warnings.push(format!("triangle {t} was clockwise; flipped"));
            }
            for k in 0..3 {
                used[tri[k]] = true;
                *edges.entry(edge_key(tri[k], tri[(k + 1) % 3])).or_insert(0) += 1;
            }
        }
        if let Some(p) = used.iter().position(|u| !u) {
            return Err(Error::Mesh(format!("node {p} is not used by any triangle")));
        }
        if let Some((e, _)) = edges.iter().find(|(_, c)| **c > 2) {
            return Err(Error::Mesh(format!("edge {e:?} is shared by more than two triangles")));
        }
        let mut tagged: HashMap<(usize, usize), EdgeTag> = HashMap::new();
        for b in &boundary {
            let key = edge_key(b.nodes[0], b.nodes[1]);
            if edges.get(&key) != Some(&1) {
                return Err(Error::Mesh(format!(
                    "listed boundary edge {:?} is not a boundary edge of the triangulation",
                    b.nodes
                )));
            }
            if tagged.insert(key, b.tag).is_some() {
                return Err(Error::Mesh(format!("boundary edge {:?} listed twice", b.nodes)));
            }
        }
        let mut untagged: Vec<_> = edges
            .iter()
            .filter(|(k, c)| **c == 1 && !tagged.contains_key(*k))
            .map(|(k, _)| *k)
            .collect();
        if !untagged.is_empty() {
            untagged.sort_unstable();
            return Err(Error::Mesh(format!(
                "{} boundary edge(s) carry no Free/Wall tag, first {:?}",
                untagged.len(),
                untagged[0]
            )));
        }
        let mut h = 0.0f64;
        for (i, j) in edges.keys() {
            h = h.max(nodes[*i].dist(nodes[*j]));
        }
        Ok((Self { nodes, triangles, boundary, h }, warnings))
    }

    pub fn nodes(&self) -> &[Point] {
        &self.nodes
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    pub fn boundary(&self) -> &[BoundaryEdge] {
        &self.boundary
    }

    /// Longest edge.
    pub fn mesh_size(&self) -> f64 {
        self.h
    }

    /// Nodes on a Free boundary edge, sorted by x then y.
    pub fn free_nodes(&self) -> Vec<usize> {
        self.tagged_nodes(EdgeTag::Free)
    }

    /// Nodes on a Wall boundary edge (corner points belong to both lists).
    pub fn wall_nodes(&self) -> Vec<usize> {
        self.tagged_nodes(EdgeTag::Wall)
    }

    fn tagged_nodes(&self, tag: EdgeTag) -> Vec<usize> {
        let mut v: Vec<usize> = self
            .boundary
            .iter()
            .filter(|b| b.tag == tag)
            .flat_map(|b| b.nodes)
            .collect();
        v.sort_unstable();
        v.dedup();
        v.sort_by(|&a, &b| {
            let (p, q) = (self.nodes[a], self.nodes[b]);
            p.x.total_cmp(&q.x).then(p.y.total_cmp(&q.y))
        });
        v
    }

    /// Total length of the Free edges.
    pub fn free_length(&self) -> f64 {
        self.boundary
            .iter()
            .filter(|b| b.tag == EdgeTag::Free)
            .map(|b| self.nodes[b.nodes[0]].dist(self.nodes[b.nodes[1]]))
            .sum()
    }

    /// Smallest interior angle over all triangles, in radians.
    pub fn min_angle(&self) -> f64 {
        let mut best = std::f64::consts::PI;
        for t in &self.triangles {
            for k in 0..3 {
                let a = self.nodes[t[k]];
                let b = self.nodes[t[(k + 1) % 3]];
                let c = self.nodes[t[(k + 2) % 3]];
                let (ux, uy) = (b.x - a.x, b.y - a.y);
                let (vx, vy) = (c.x - a.x, c.y - a.y);
                let ang = (ux * vy - uy * vx).abs().atan2(ux * vx + uy * vy);
                best = best.min(ang);
            }
        }
        best
    }

    /// Signed area of triangle `t`.
    pub fn triangle_area(&self, t: usize) -> f64 {
        let [a, b, c] = self.triangles[t];
        signed_area(self.nodes[a], self.nodes[b], self.nodes[c])
    }

    /// Parses the text format. Returns the mesh and any warnings.
    pub fn from_text(text: &str) -> Result<(Self, Vec<String>)> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
            .filter(|(_, l)| !l.is_empty());
        let mut next = |what: &str| {
            lines.next().ok_or_else(|| Error::Parse(format!("mesh file ended while reading {what}")))
        };
        let count = |(ln, l): (usize, &str), what: &str| -> Result<usize> {
            l.parse().map_err(|_| Error::Parse(format!("line {ln}: expected {what} count")))
        };
        let nn = count(next("node count")?, "node")?;
        let mut nodes = Vec::with_capacity(nn);
        for _ in 0..nn {
            let (ln, l) = next("nodes")?;
            let v: Vec<f64> = l
                .split_whitespace()
                .map(str::parse)
                .collect::<std::result::Result<_, _>>()
                .map_err(|_| Error::Parse(format!("line {ln}: bad node coordinates")))?;
            if v.len() != 2 {
                return Err(Error::Parse(format!("line {ln}: expected 'x y'")));
            }
            nodes.push(Point::new(v[0], v[1]));
        }
        let nt = count(next("triangle count")?, "triangle")?;
        let mut triangles = Vec::with_capacity(nt);
        for _ in 0..nt {
            let (ln, l) = next("triangles")?;
            let v: Vec<usize> = l
                .split_whitespace()
                .map(str::parse)
                .collect::<std::result::Result<_, _>>()
                .map_err(|_| Error::Parse(format!("line {ln}: bad triangle indices")))?;
            if v.len() != 3 {
                return Err(Error::Parse(format!("line {ln}: expected 'i j k'")));
            }
            triangles.push([v[0], v[1], v[2]]);
        }
        let nb = count(next("boundary count")?, "boundary edge")?;
        let mut boundary = Vec::with_capacity(nb);
        for _ in 0..nb {
            let (ln, l) = next("boundary edges")?;
            let parts: Vec<&str> = l.split_whitespace().collect();
            if parts.len() != 3 {
                return Err(Error::Parse(format!("line {ln}: expected 'i j Free|Wall'")));
            }
            let idx = |s: &str| {
                s.parse::<usize>()
                    .map_err(|_| Error::Parse(format!("line {ln}: bad boundary index '{s}'")))
            };
            let (i, j) = (idx(parts[0])?, idx(parts[1])?);
            if i >= nn || j >= nn {
                return Err(Error::Mesh(format!("line {ln}: boundary edge references a missing node")));
            }
            let tag = match parts[2].to_ascii_lowercase().as_str() {
                "free" => EdgeTag::Free,
                "wall" => EdgeTag::Wall,
                other => {
                    return Err(Error::Mesh(format!(
                        "line {ln}: boundary tag '{other}' is neither Free nor Wall"
                    )))
                }
            };
            boundary.push(BoundaryEdge { nodes: [i, j], tag });
        }
        if let Some((ln, _)) = lines.next() {
            return Err(Error::Parse(format!("line {ln}: unexpected trailing content")));
        }
        Mesh::new(nodes, triangles, boundary)
    }

    /// Renders the text format.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "{}", self.nodes.len());
        for p in &self.nodes {
            let _ = writeln!(s, "{:.17e} {:.17e}", p.x, p.y);
        }
        let _ = writeln!(s, "{}", self.triangles.len());
        for t in &self.triangles {
            let _ = writeln!(s, "{} {} {}", t[0], t[1], t[2]);
        }
        let _ = writeln!(s, "{}", self.boundary.len());
        for b in &self.boundary {
            let tag = match b.tag {
                EdgeTag::Free => "Free",
                EdgeTag::Wall => "Wall",
            };
            let _ = writeln!(s, "{} {} {tag}", b.nodes[0], b.nodes[1]);
        }
        s
    }
}

/// Reads a mesh file. Warnings (such as flipped triangles) are returned
/// alongside the mesh.
pub fn load_mesh(path: &Path) -> Result<(Mesh, Vec<String>)> {
    let text = std::fs::read_to_string(path)?;
    Mesh::from_text(&text)
}
