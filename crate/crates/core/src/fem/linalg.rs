//! Sparse assembly storage, envelope (skyline) Cholesky, and dense
//! symmetric eigenvalue routines.

use crate::error::{Error, Result};
use crate::par;

/// Symmetric sparse matrix in compressed-row form (both triangles stored).
#[derive(Debug, Clone)]
pub struct CsrMatrix {
    n: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<f64>,
}

impl CsrMatrix {
    /// Builds from triplets; duplicates are summed in input order, so the
    /// result does not depend on how the triplets were produced.
    pub fn from_triplets(n: usize, mut trip: Vec<(usize, usize, f64)>) -> Self {
        // Stable sort keeps the input order among duplicates.
        trip.sort_by_key(|&(i, j, _)| (i, j));
        let mut row_ptr = vec![0usize; n + 1];
        let mut cols = Vec::with_capacity(trip.len());
        let mut vals: Vec<f64> = Vec::with_capacity(trip.len());
        let mut last: Option<(usize, usize)> = None;
        for (i, j, v) in trip {
            if last == Some((i, j)) {
                *vals.last_mut().unwrap() += v;
            } else {
                cols.push(j);
                vals.push(v);
                row_ptr[i + 1] += 1;
                last = Some((i, j));
            }
        }
        for i in 0..n {
            row_ptr[i + 1] += row_ptr[i];
        }
        Self { n, row_ptr, cols, vals }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// (column, value) pairs of row `i`, sorted by column.
    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        self.cols[r.clone()].iter().copied().zip(self.vals[r].iter().copied())
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        match self.cols[r.clone()].binary_search(&j) {
            Ok(k) => self.vals[r.start + k],
            Err(_) => 0.0,
        }
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut d = vec![vec![0.0; self.n]; self.n];
        for (i, row) in d.iter_mut().enumerate() {
            for (j, v) in self.row(i) {
                row[j] = v;
            }
        }
        d
    }
}

/// Lower triangle of a symmetric matrix in envelope storage: row `i` keeps
/// columns `first[i]..=i` contiguously.
#[derive(Debug, Clone)]
pub struct Envelope {
    first: Vec<usize>,
    offset: Vec<usize>,
    data: Vec<f64>,
}

/// Pivot statistics of a Cholesky factorization.
#[derive(Debug, Clone, Copy)]
pub struct PivotStats {
    pub min_pivot: f64,
    pub max_pivot: f64,
}

impl PivotStats {
    /// Crude condition estimate (max/min squared pivot ratio).
    pub fn condition_estimate(&self) -> f64 {
        (self.max_pivot / self.min_pivot).powi(2)
    }
}

impl Envelope {
    /// Builds from the lower-triangle entries of each row (`col ≤ row`).
    pub fn from_rows(rows: &[Vec<(usize, f64)>]) -> Self {
        let n = rows.len();
        let mut first = Vec::with_capacity(n);
        let mut offset = Vec::with_capacity(n + 1);
        offset.push(0);
        for (i, r) in rows.iter().enumerate() {
            let f = r.iter().map(|&(j, _)| j).filter(|&j| j <= i).min().unwrap_or(i);
            first.push(f);
            offset.push(offset[i] + (i - f + 1));
        }
        let mut data = vec![0.0; offset[n]];
        for (i, r) in rows.iter().enumerate() {
            for &(j, v) in r {
                if j <= i {
                    data[offset[i] + j - first[i]] += v;
                }
            }
        }
        Self { first, offset, data }
    }

    pub fn dim(&self) -> usize {
        self.first.len()
    }

    /// Number of stored entries.
    pub fn stored(&self) -> usize {
        self.data.len()
    }

    pub fn first(&self, i: usize) -> usize {
        self.first[i]
    }

    fn row(&self, i: usize) -> &[f64] {
        &self.data[self.offset[i]..self.offset[i + 1]]
    }

    /// In-place Cholesky A = L Lᵀ (row-oriented, fill stays in the envelope).
    pub fn cholesky(&mut self) -> Result<PivotStats> {
        let n = self.dim();
        let mut stats = PivotStats { min_pivot: f64::INFINITY, max_pivot: 0.0 };
        for i in 0..n {
            let fi = self.first[i];
            let (before, rest) = self.data.split_at_mut(self.offset[i]);
            let row_i = &mut rest[..i - fi + 1];
            for j in fi..i {
                let fj = self.first[j];
                let start = fi.max(fj);
                let row_j = &before[self.offset[j]..self.offset[j + 1]];
                let a = &row_i[start - fi..j - fi];
                let b = &row_j[start - fj..j - fj];
                let s = row_i[j - fi] - dot(a, b);
                row_i[j - fi] = s / row_j[j - fj];
            }
            let orig = row_i[i - fi];
            let d = orig - dot(&row_i[..i - fi], &row_i[..i - fi]);
            if !(d > 1e-14 * orig.abs()) || !d.is_finite() {
                let cond = if stats.min_pivot.is_finite() {
                    stats.condition_estimate()
                } else {
                    f64::INFINITY
                };
                return Err(Error::Singular(format!(
                    "pivot {i} vanished (remaining {d:e} of {orig:e}); condition estimate so far {cond:e}"
                )));
            }
            let p = d.sqrt();
            stats.min_pivot = stats.min_pivot.min(p);
            stats.max_pivot = stats.max_pivot.max(p);
            row_i[i - fi] = p;
        }
        Ok(stats)
    }

    /// Solves L y = b in place for a factored envelope, assuming
    /// `b[..start] == 0` (the solution then vanishes there too). `b` holds
    /// entries `start..n`.
    pub fn forward_solve_tail(&self, b: &mut [f64], start: usize) {
        let n = self.dim();
        debug_assert_eq!(b.len(), n - start);
        for i in start..n {
            let fi = self.first[i];
            let lo = fi.max(start);
            let row = self.row(i);
            let s = b[i - start] - dot(&row[lo - fi..i - fi], &b[lo - start..i - start]);
            b[i - start] = s / row[i - fi];
        }
    }
}

#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    // Four accumulators: lets the compiler vectorize while keeping a fixed
    // summation order.
    let n = a.len().min(b.len());
    let (a, b) = (&a[..n], &b[..n]);
    let mut acc = [0.0f64; 4];
    let chunks = n / 4;
    for k in 0..chunks {
        for l in 0..4 {
            acc[l] += a[4 * k + l] * b[4 * k + l];
        }
    }
    let mut s = (acc[0] + acc[1]) + (acc[2] + acc[3]);
    for k in 4 * chunks..n {
        s += a[k] * b[k];
    }
    s
}

/// Dense symmetric matrix stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseSym {
    n: usize,
    a: Vec<f64>,
}

impl DenseSym {
    pub fn zeros(n: usize) -> Self {
        Self { n, a: vec![0.0; n * n] }
    }

    pub fn from_rows(rows: Vec<Vec<f64>>) -> Self {
        let n = rows.len();
        let a = rows.into_iter().flatten().collect::<Vec<_>>();
        assert_eq!(a.len(), n * n);
        Self { n, a }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.a[i * self.n + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.a[i * self.n + j] = v;
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.a[i * self.n..(i + 1) * self.n]
    }

    /// max |a_ij − a_ji| / max |a_ij|.
    pub fn asymmetry(&self) -> f64 {
        let mut diff = 0.0f64;
        let mut size = 0.0f64;
        for i in 0..self.n {
            for j in 0..self.n {
                diff = diff.max((self.get(i, j) - self.get(j, i)).abs());
                size = size.max(self.get(i, j).abs());
            }
        }
        if size == 0.0 {
            0.0
        } else {
            diff / size
        }
    }

    /// Replaces A by (A + Aᵀ)/2.
    pub fn symmetrize(&mut self) {
        for i in 0..self.n {
            for j in 0..i {
                let v = 0.5 * (self.get(i, j) + self.get(j, i));
                self.set(i, j, v);
                self.set(j, i, v);
            }
        }
    }
}

/// Eigenvalues of a dense symmetric matrix in ascending order, by Householder
/// tridiagonalization followed by the implicit QL iteration.
pub fn symmetric_eigenvalues(m: &DenseSym) -> Result<Vec<f64>> {
    let (d, e) = tridiagonalize(m.clone());
    let mut vals = tridiagonal_ql(d, e)?;
    vals.sort_by(f64::total_cmp);
    Ok(vals)
}

/// Householder reduction to tridiagonal form. Returns the diagonal and the
/// subdiagonal (`e[i]` couples `i` and `i+1`; the last entry is 0).
fn tridiagonalize(mut m: DenseSym) -> (Vec<f64>, Vec<f64>) {
    let n = m.n;
    let mut d = vec![0.0; n];
    let mut e = vec![0.0; n];
    if n == 0 {
        return (d, e);
    }
    // Work on the trailing block of column k: zero entries k+2.. of column k.
    for k in 0..n.saturating_sub(2) {
        let x: Vec<f64> = (k + 1..n).map(|i| m.get(i, k)).collect();
        let alpha_norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        if alpha_norm == 0.0 {
            e[k] = 0.0;
            continue;
        }
        let alpha = if x[0] > 0.0 { -alpha_norm } else { alpha_norm };
        let mut v = x;
        v[0] -= alpha;
        let vnorm2: f64 = v.iter().map(|t| t * t).sum();
        e[k] = alpha;
        if vnorm2 == 0.0 {
            continue;
        }
        let beta = 2.0 / vnorm2;
        // Trailing block B = A[k+1.., k+1..]; B ← H B H with H = I − β v vᵀ.
        let off = k + 1;
        let size = n - off;
        let a = &m.a;
        let p: Vec<f64> = par::map_range(size, |i| {
            let row = &a[(off + i) * n + off..(off + i) * n + n];
            beta * dot(row, &v)
        });
        let kfac = 0.5 * beta * dot(&p, &v);
        let w: Vec<f64> = p.iter().zip(&v).map(|(pi, vi)| pi - kfac * vi).collect();
        // B ← B − v wᵀ − w vᵀ, row by row.
        update_rows(&mut m.a, n, off, &v, &w);
        for i in off + 1..n {
            m.a[i * n + k] = 0.0;
            m.a[k * n + i] = 0.0;
        }
        m.a[off * n + k] = alpha;
        m.a[k * n + off] = alpha;
    }
    for i in 0..n {
        d[i] = m.get(i, i);
    }
    if n >= 2 {
        e[n - 2] = m.get(n - 1, n - 2);
    }
    e[n - 1] = 0.0;
    (d, e)
}

fn update_rows(a: &mut [f64], n: usize, off: usize, v: &[f64], w: &[f64]) {
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        a[off * n..]
            .par_chunks_mut(n)
            .enumerate()
            .for_each(|(i, row)| rank2_row(&mut row[off..], v[i], w[i], v, w));
    }
    #[cfg(not(feature = "parallel"))]
    {
        for (i, row) in a[off * n..].chunks_mut(n).enumerate() {
            rank2_row(&mut row[off..], v[i], w[i], v, w);
        }
    }
}

#[inline]
fn rank2_row(row: &mut [f64], vi: f64, wi: f64, v: &[f64], w: &[f64]) {
    for ((r, vj), wj) in row.iter_mut().zip(v).zip(w) {
        *r -= vi * wj + wi * vj;
    }
}

/// Eigenvalues of the symmetric tridiagonal matrix (d, e) by implicit QL
/// with Wilkinson shifts.
fn tridiagonal_ql(mut d: Vec<f64>, mut e: Vec<f64>) -> Result<Vec<f64>> {
    let n = d.len();
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > 60 {
                return Err(Error::Singular("QL iteration did not converge".into()));
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut i = m;
            let mut deflated = false;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    deflated = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
            }
            if deflated {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    Ok(d)
}

/// Cyclic Jacobi eigenvalues (reference path for small matrices).
pub fn jacobi_eigenvalues(m: &DenseSym) -> Vec<f64> {
    let n = m.n;
    let mut a = m.clone();
    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a.get(i, j).powi(2))
            .sum();
        let diag: f64 = (0..n).map(|i| a.get(i, i).powi(2)).sum();
        if off <= 1e-30 * diag.max(1e-300) {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a.get(p, q);
                if apq == 0.0 {
                    continue;
                }
                let theta = (a.get(q, q) - a.get(p, p)) / (2.0 * apq);
                let sign = if theta >= 0.0 { 1.0 } else { -1.0 };
                let t = sign / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a.get(k, p);
                    let akq = a.get(k, q);
                    a.set(k, p, c * akp - s * akq);
                    a.set(k, q, s * akp + c * akq);
                }
                for k in 0..n {
                    let apk = a.get(p, k);
                    let aqk = a.get(q, k);
                    a.set(p, k, c * apk - s * aqk);
                    a.set(q, k, s * apk + c * aqk);
                }
            }
        }
    }
    let mut v: Vec<f64> = (0..n).map(|i| a.get(i, i)).collect();
    v.sort_by(f64::total_cmp);
    v
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    fn random_sym(n: usize, seed: u64) -> DenseSym {
        let mut rng = rand::rngs::StdRng::seed_from_u64(seed);
        let mut m = DenseSym::zeros(n);
        for i in 0..n {
            for j in 0..=i {
                let v: f64 = rng.random_range(-1.0..1.0);
                m.set(i, j, v);
                m.set(j, i, v);
            }
        }
        m
    }

    #[test]
    fn ql_matches_jacobi() {
        for (n, seed) in [(1, 1), (2, 2), (5, 3), (17, 4), (40, 5)] {
            let m = random_sym(n, seed);
            let a = symmetric_eigenvalues(&m).unwrap();
            let b = jacobi_eigenvalues(&m);
            for (x, y) in a.iter().zip(&b) {
                assert!((x - y).abs() < 1e-11, "n={n}: {x} vs {y}");
            }
            let trace: f64 = (0..n).map(|i| m.get(i, i)).sum();
            assert!((a.iter().sum::<f64>() - trace).abs() < 1e-11);
        }
    }

    #[test]
    fn known_tridiagonal_spectrum() {
        // Second-difference matrix: eigenvalues 2 − 2cos(kπ/(n+1)).
        let n = 30;
        let mut m = DenseSym::zeros(n);
        for i in 0..n {
            m.set(i, i, 2.0);
            if i + 1 < n {
                m.set(i, i + 1, -1.0);
                m.set(i + 1, i, -1.0);
            }
        }
        let v = symmetric_eigenvalues(&m).unwrap();
        for (k, x) in v.iter().enumerate() {
            let exact = 2.0 - 2.0 * ((k + 1) as f64 * std::f64::consts::PI / (n + 1) as f64).cos();
            assert!((x - exact).abs() < 1e-13);
        }
    }

    #[test]
    fn envelope_cholesky_solves() {
        // SPD banded matrix with a variable profile.
        let n = 25;
        let mut rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
        let mut dense = vec![vec![0.0; n]; n];
        for i in 0..n {
            let width = 1 + (i * 7) % 4;
            for j in i.saturating_sub(width)..i {
                let v = -0.3 / (1.0 + (i - j) as f64);
                rows[i].push((j, v));
                dense[i][j] = v;
                dense[j][i] = v;
            }
            rows[i].push((i, 3.0));
            dense[i][i] = 3.0;
        }
        let mut env = Envelope::from_rows(&rows);
        env.cholesky().unwrap();
        // L y = b then check L Lᵀ x = b through the dense matrix: solve with
        // b = A e_k restricted, compare L·(L⁻¹ b) = b.
        let start = 5;
        let mut b: Vec<f64> = (start..n).map(|i| (i as f64).sin()).collect();
        let orig = b.clone();
        env.forward_solve_tail(&mut b, start);
        for i in start..n {
            let fi = env.first(i).max(start);
            let s: f64 = (fi..=i).map(|j| env.row(i)[j - env.first(i)] * b[j - start]).sum();
            assert!((s - orig[i - start]).abs() < 1e-12);
        }
        // LLᵀ reproduces A.
        for i in 0..n {
            for j in 0..=i {
                let lo = env.first(i).max(env.first(j));
                let s: f64 = (lo..=j)
                    .map(|k| env.row(i)[k - env.first(i)] * env.row(j)[k - env.first(j)])
                    .sum();
                assert!((s - dense[i][j]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn singular_matrix_reported() {
        let rows = vec![vec![(0, 1.0)], vec![(0, 1.0), (1, 1.0)]];
        let mut env = Envelope::from_rows(&rows);
        assert!(matches!(env.cholesky(), Err(Error::Singular(_))));
    }

    #[test]
    fn csr_sums_duplicates() {
        let m = CsrMatrix::from_triplets(2, vec![(0, 0, 1.0), (1, 0, 2.0), (0, 0, 0.5), (0, 1, 2.0)]);
        assert_eq!(m.get(0, 0), 1.5);
        assert_eq!(m.get(1, 0), 2.0);
        assert_eq!(m.get(1, 1), 0.0);
    }
}
