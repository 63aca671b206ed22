//! P1 assembly, static condensation onto the free surface and the
//! generalized eigensolve S u = λ M_F u.

use std::collections::VecDeque;

use crate::error::{Error, Result};
use crate::geometry::{EdgeTag, PolygonalDomain};
use crate::par;
use crate::spectra::{DomainMeta, Problem, Source, Spectrum};

use super::linalg::{symmetric_eigenvalues, CsrMatrix, DenseSym, Envelope};
use super::mesh::Mesh;
use super::mesher::{triangulate_with, MeshOptions};

/// Tolerance for the discrete sloshing zero mode.
pub const FEM_TOL_ZERO: f64 = 1e-8;

/// Safety factor applied to the Richardson error estimate.
pub const ERROR_SAFETY: f64 = 2.0;

/// Global stiffness matrix and the free-surface boundary mass matrix.
#[derive(Debug, Clone)]
pub struct Assembly {
    pub stiffness: CsrMatrix,
    /// Mesh nodes carrying the free-surface mass, sorted by x.
    pub free_nodes: Vec<usize>,
    /// Consistent mass matrix in `free_nodes` numbering.
    pub free_mass: CsrMatrix,
}

/// P1 stiffness (1/4A)(bᵢbⱼ + cᵢcⱼ) and consistent 1D mass ℓ/6·[2 1; 1 2]
/// on Free edges.
pub fn assemble(mesh: &Mesh) -> Result<Assembly> {
    let nodes = mesh.nodes();
    let elems = par::map_slice(mesh.triangles(), |t| {
        let p = [nodes[t[0]], nodes[t[1]], nodes[t[2]]];
        let mut b = [0.0; 3];
        let mut c = [0.0; 3];
        for i in 0..3 {
            b[i] = p[(i + 1) % 3].y - p[(i + 2) % 3].y;
            c[i] = p[(i + 2) % 3].x - p[(i + 1) % 3].x;
        }
        let area = 0.5 * (b[0] * c[1] - b[1] * c[0]);
        let mut k = [[0.0; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                k[i][j] = (b[i] * b[j] + c[i] * c[j]) / (4.0 * area);
            }
        }
        (area, k)
    });
    let mut trip = Vec::with_capacity(9 * elems.len());
    for (t, (area, k)) in mesh.triangles().iter().zip(elems) {
        if !(area > 0.0) {
            return Err(Error::Mesh(format!("degenerate triangle {t:?}")));
        }
        for i in 0..3 {
            for j in 0..3 {
                trip.push((t[i], t[j], k[i][j]));
            }
        }
    }
    let stiffness = CsrMatrix::from_triplets(nodes.len(), trip);

    let free_nodes = mesh.free_nodes();
    let mut local = vec![usize::MAX; nodes.len()];
    for (a, &v) in free_nodes.iter().enumerate() {
        local[v] = a;
    }
    let mut mtrip = Vec::new();
    for e in mesh.boundary().iter().filter(|e| e.tag == EdgeTag::Free) {
        let (i, j) = (local[e.nodes[0]], local[e.nodes[1]]);
        let len = nodes[e.nodes[0]].dist(nodes[e.nodes[1]]);
        mtrip.push((i, i, len / 3.0));
        mtrip.push((j, j, len / 3.0));
        mtrip.push((i, j, len / 6.0));
        mtrip.push((j, i, len / 6.0));
    }
    let free_mass = CsrMatrix::from_triplets(free_nodes.len(), mtrip);
    Ok(Assembly { stiffness, free_nodes, free_mass })
}

/// Condensed pencil (S, M_F) on the free-surface unknowns.
#[derive(Debug, Clone)]
pub struct DtnMatrixPair {
    /// Mesh nodes of the free-surface unknowns, sorted by x.
    pub dofs: Vec<usize>,
    pub s: DenseSym,
    pub mass: DenseSym,
    pub stats: CondensationStats,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CondensationStats {
    pub interior_unknowns: usize,
    pub envelope_entries: usize,
    pub condition_estimate: f64,
}

/// Schur complement S = K_FF − K_FI K_II⁻¹ K_IF. For the sloshing problem
/// wall nodes stay unknowns (natural condition); for Steklov–Dirichlet they
/// are removed, corner points included.
pub fn dtn_matrices(mesh: &Mesh, problem: Problem) -> Result<DtnMatrixPair> {
    let asm = assemble(mesh)?;
    let n = mesh.nodes().len();
    let mut on_wall = vec![false; n];
    for e in mesh.boundary().iter().filter(|e| e.tag == EdgeTag::Wall) {
        on_wall[e.nodes[0]] = true;
        on_wall[e.nodes[1]] = true;
    }
    let mut is_free = vec![false; n];
    for &v in &asm.free_nodes {
        is_free[v] = true;
    }
    // Local indices into the assembled free mass matrix.
    let keep: Vec<usize> = asm
        .free_nodes
        .iter()
        .enumerate()
        .filter(|(_, &v)| problem == Problem::Sn || !on_wall[v])
        .map(|(a, _)| a)
        .collect();
    let dofs: Vec<usize> = keep.iter().map(|&a| asm.free_nodes[a]).collect();
    if dofs.is_empty() {
        return Err(Error::Mesh("the free surface carries no unknowns on this mesh".into()));
    }
    let eliminated = |v: usize| problem == Problem::Sd && on_wall[v];

    // Reverse Cuthill–McKee from the surface: surface-adjacent unknowns last.
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n];
    for t in mesh.triangles() {
        for k in 0..3 {
            adj[t[k]].push(t[(k + 1) % 3]);
            adj[t[(k + 1) % 3]].push(t[k]);
        }
    }
    let pts = mesh.nodes();
    for a in adj.iter_mut() {
        a.sort_unstable();
        a.dedup();
        a.sort_by(|&i, &j| pts[i].x.total_cmp(&pts[j].x).then(pts[i].y.total_cmp(&pts[j].y)));
    }
    let mut seen = vec![false; n];
    let mut order = Vec::new();
    let mut queue: VecDeque<usize> = VecDeque::new();
    for &v in &asm.free_nodes {
        seen[v] = true;
        queue.push_back(v);
    }
    while let Some(v) = queue.pop_front() {
        for &w in &adj[v] {
            if !seen[w] {
                seen[w] = true;
                if !eliminated(w) {
                    order.push(w);
                }
                queue.push_back(w);
            }
        }
    }
    order.extend((0..n).filter(|&v| !seen[v] && !is_free[v] && !eliminated(v)));
    order.reverse();
    let ni = order.len();
    let mut pos = vec![usize::MAX; n];
    for (p, &v) in order.iter().enumerate() {
        pos[v] = p;
    }

    let k = &asm.stiffness;
    let rows: Vec<Vec<(usize, f64)>> = order
        .iter()
        .map(|&v| {
            k.row(v)
                .filter(|&(w, _)| pos[w] != usize::MAX && pos[w] <= pos[v])
                .map(|(w, val)| (pos[w], val))
                .collect()
        })
        .collect();
    let mut env = Envelope::from_rows(&rows);
    let envelope_entries = env.stored();
    let pivots = if ni > 0 {
        env.cholesky()?
    } else {
        super::linalg::PivotStats { min_pivot: 1.0, max_pivot: 1.0 }
    };

    // Y = L⁻¹ K_IF, one column per surface unknown, stored from its first
    // nonzero row on.
    let cols: Vec<(usize, Vec<f64>)> = par::map_slice(&dofs, |&f| {
        let entries: Vec<(usize, f64)> =
            k.row(f).filter(|&(w, _)| pos[w] != usize::MAX).map(|(w, v)| (pos[w], v)).collect();
        let start = entries.iter().map(|e| e.0).min().unwrap_or(ni);
        let mut y = vec![0.0; ni - start];
        for (p, v) in entries {
            y[p - start] = v;
        }
        env.forward_solve_tail(&mut y, start);
        (start, y)
    });

    let nf = dofs.len();
    let srows: Vec<Vec<f64>> = par::map_range(nf, |a| {
        let (sa, ya) = &cols[a];
        (0..nf)
            .map(|b| {
                let (sb, yb) = &cols[b];
                let lo = (*sa).max(*sb);
                let mut acc = 0.0;
                for p in lo..ni {
                    acc += ya[p - sa] * yb[p - sb];
                }
                k.get(dofs[a], dofs[b]) - acc
            })
            .collect()
    });
    let s = DenseSym::from_rows(srows);

    let mut mass = DenseSym::zeros(nf);
    for (a, &ka) in keep.iter().enumerate() {
        for (b, &kb) in keep.iter().enumerate() {
            mass.set(a, b, asm.free_mass.get(ka, kb));
        }
    }
    Ok(DtnMatrixPair {
        dofs,
        s,
        mass,
        stats: CondensationStats {
            interior_unknowns: ni,
            envelope_entries,
            condition_estimate: pivots.condition_estimate(),
        },
    })
}

/// Eigenvalues of S u = λ M u, ascending, via M = L Lᵀ and L⁻¹ S L⁻ᵀ.
pub fn generalized_eigenvalues(s: &DenseSym, m: &DenseSym) -> Result<Vec<f64>> {
    let n = s.dim();
    let rows: Vec<Vec<(usize, f64)>> = (0..n)
        .map(|i| (0..=i).filter(|&j| m.get(i, j) != 0.0).map(|j| (j, m.get(i, j))).collect())
        .collect();
    let mut l = Envelope::from_rows(&rows);
    l.cholesky().map_err(|e| Error::Singular(format!("boundary mass matrix: {e}")))?;
    // Z = L⁻¹ S column by column; S symmetric so column b is row b.
    let z: Vec<Vec<f64>> = par::map_range(n, |b| {
        let mut col = s.row(b).to_vec();
        l.forward_solve_tail(&mut col, 0);
        col
    });
    // C = L⁻¹ Zᵀ; column a of Zᵀ is row a of Z, i.e. (z[b][a])_b.
    let c_cols: Vec<Vec<f64>> = par::map_range(n, |a| {
        let mut col: Vec<f64> = (0..n).map(|b| z[b][a]).collect();
        l.forward_solve_tail(&mut col, 0);
        col
    });
    let mut c = DenseSym::zeros(n);
    for (a, col) in c_cols.iter().enumerate() {
        for (i, v) in col.iter().enumerate() {
            c.set(i, a, *v);
        }
    }
    c.symmetrize();
    symmetric_eigenvalues(&c)
}

/// Raw FEM eigenvalues (all of them) of the condensed problem on `mesh`.
pub fn fem_eigenvalues(mesh: &Mesh, problem: Problem) -> Result<Vec<f64>> {
    let pair = dtn_matrices(mesh, problem)?;
    let mut v = generalized_eigenvalues(&pair.s, &pair.mass)?;
    if problem == Problem::Sn {
        if let Some(first) = v.first_mut() {
            if first.abs() <= FEM_TOL_ZERO {
                *first = 0.0;
            }
        }
    }
    Ok(v)
}

/// Spectrum of the condensed problem on a given mesh.
pub fn dtn_spectrum_mesh(
    mesh: &Mesh,
    problem: Problem,
    count: usize,
    meta: DomainMeta,
) -> Result<Spectrum> {
    let values = fem_eigenvalues(mesh, problem)?;
    take_count(values, problem, count, mesh.mesh_size(), meta)
}

fn take_count(
    mut values: Vec<f64>,
    problem: Problem,
    count: usize,
    h: f64,
    meta: DomainMeta,
) -> Result<Spectrum> {
    let limit = values.len().saturating_sub(1).max(1);
    if count == 0 || count > limit {
        return Err(Error::InvalidArgument(format!(
            "count {count} exceeds what the mesh resolves ({limit} free-surface eigenvalues); refine the mesh"
        )));
    }
    values.truncate(count);
    Spectrum::new(problem, values, Source::Fem { h }, meta, FEM_TOL_ZERO)
}

/// FEM spectrum on the built-in uniform mesh of size `target_h`.
pub fn dtn_spectrum(
    d: &PolygonalDomain,
    problem: Problem,
    count: usize,
    target_h: f64,
) -> Result<Spectrum> {
    dtn_spectrum_with(d, problem, count, &MeshOptions::uniform(target_h))
}

pub fn dtn_spectrum_with(
    d: &PolygonalDomain,
    problem: Problem,
    count: usize,
    opts: &MeshOptions,
) -> Result<Spectrum> {
    let mesh = triangulate_with(d, opts)?;
    dtn_spectrum_mesh(&mesh, problem, count, DomainMeta::for_polygon(d))
}

/// Which mesh a FEM spectrum was compared against for its error estimate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Comparison {
    /// Sizes doubled; err = ERROR_SAFETY·|ν_{2h} − ν_h|/3.
    Coarse,
    /// Sizes halved, used when the coarse mesh cannot resolve the requested
    /// count; err = ERROR_SAFETY·4|ν_h − ν_{h/2}|/3.
    Refined,
}

/// A FEM spectrum with Richardson error estimates from a second mesh.
#[derive(Debug, Clone)]
pub struct FemEstimate {
    /// Eigenvalues on the requested mesh carrying per-eigenvalue error estimates.
    pub spectrum: Spectrum,
    pub comparison: Comparison,
    /// Eigenvalues on the comparison mesh.
    pub reference: Vec<f64>,
    /// Richardson extrapolation of the pair, assuming second-order convergence.
    pub extrapolated: Vec<f64>,
}

impl FemEstimate {
    /// The extrapolated values carrying the error estimates of `spectrum`.
    pub fn extrapolated_spectrum(&self) -> Result<Spectrum> {
        let errors = self.spectrum.errors().unwrap_or(&[]);
        let mut pairs: Vec<(f64, f64)> = self.extrapolated.iter().copied().zip(errors.iter().copied()).collect();
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        let (values, errors): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
        let s = &self.spectrum;
        Spectrum::new(s.problem(), values, s.source().clone(), s.meta().clone(), FEM_TOL_ZERO)?.with_errors(errors)
    }
}

/// Solves on `opts` and compares with the mesh of doubled sizes, or of
/// halved sizes when the doubled one resolves fewer than `count` values.
pub fn dtn_spectrum_estimated(
    d: &PolygonalDomain,
    problem: Problem,
    count: usize,
    opts: &MeshOptions,
) -> Result<FemEstimate> {
    let mesh = triangulate_with(d, opts)?;
    let values = fem_eigenvalues(&mesh, problem)?;
    let spectrum = take_count(values, problem, count, mesh.mesh_size(), DomainMeta::for_polygon(d))?;
    let coarse = fem_eigenvalues(&triangulate_with(d, &opts.coarsened())?, problem)?;
    let (comparison, reference) = if coarse.len().saturating_sub(1) >= count {
        (Comparison::Coarse, coarse)
    } else {
        (Comparison::Refined, fem_eigenvalues(&triangulate_with(d, &opts.refined())?, problem)?)
    };
    let reference: Vec<f64> = reference[..count].to_vec();
    let pairs = spectrum.values().iter().zip(&reference);
    let (errors, extrapolated): (Vec<f64>, Vec<f64>) = match comparison {
        Comparison::Coarse => pairs
            .map(|(f, c)| (ERROR_SAFETY * (c - f).abs() / 3.0, (f - (c - f) / 3.0).max(0.0)))
            .unzip(),
        Comparison::Refined => pairs
            .map(|(c, f)| (ERROR_SAFETY * 4.0 * (c - f).abs() / 3.0, (f - (c - f) / 3.0).max(0.0)))
            .unzip(),
    };
    let spectrum = spectrum.with_errors(errors)?;
    Ok(FemEstimate { spectrum, comparison, reference, extrapolated })
}
