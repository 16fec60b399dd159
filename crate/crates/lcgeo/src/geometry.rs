//! Halfspace polytopes in dimension <= 4: feasibility, Chebyshev centers,
//! recession cones, vertex enumeration and exact volumes.
//!
//! Volumes are computed by the classical pyramid decomposition: pick an
//! interior point, split the polytope into pyramids over its facets and
//! recurse on each facet in hyperplane coordinates. Vertex enumeration is
//! brute force over row subsets, which is exact and fast at this scale.

use crate::lin::null_basis;
use crate::lp::{self, LpOutcome, Row};
use nalgebra::{DMatrix, DVector};
use std::sync::OnceLock;

/// `{ x : C x <= d }`. Immutable; derived data is cached lazily.
#[derive(Debug)]
pub struct Polytope {
    c: DMatrix<f64>,
    d: DVector<f64>,
    /// Rows with a zero gradient make the set empty when their offset is
    /// negative; they are dropped from the stored system otherwise.
    trivially_empty: bool,
    cheb: OnceLock<Option<(DVector<f64>, f64)>>,
    bounded: OnceLock<bool>,
    vertices: OnceLock<Vec<DVector<f64>>>,
}

impl Clone for Polytope {
    fn clone(&self) -> Self {
        Polytope::new(self.c.clone(), self.d.clone())
    }
}

/// Radius cap for Chebyshev balls of unbounded polytopes.
const CHEB_CAP: f64 = 1e6;

impl Polytope {
    pub fn new(c: DMatrix<f64>, d: DVector<f64>) -> Self {
        assert_eq!(c.nrows(), d.len());
        // Drop zero rows, remembering whether one of them is infeasible.
        let mut keep: Vec<usize> = Vec::new();
        let mut trivially_empty = false;
        for i in 0..c.nrows() {
            let norm = c.row(i).norm();
            if norm <= 1e-13 {
                if d[i] < -1e-12 {
                    trivially_empty = true;
                }
            } else {
                keep.push(i);
            }
        }
        let (c, d) = if keep.len() == c.nrows() {
            (c, d)
        } else {
            let rows: Vec<_> = keep.iter().map(|&i| c.row(i).clone_owned()).collect();
            let cc = if rows.is_empty() {
                DMatrix::zeros(0, c.ncols())
            } else {
                DMatrix::from_rows(&rows)
            };
            let dd = DVector::from_iterator(keep.len(), keep.iter().map(|&i| d[i]));
            (cc, dd)
        };
        Polytope {
            c,
            d,
            trivially_empty,
            cheb: OnceLock::new(),
            bounded: OnceLock::new(),
            vertices: OnceLock::new(),
        }
    }

    /// All of R^n.
    pub fn whole_space(dim: usize) -> Self {
        Polytope::new(DMatrix::zeros(0, dim), DVector::zeros(0))
    }

    /// Axis-aligned box `lo <= x <= hi`.
    pub fn from_box(lo: &DVector<f64>, hi: &DVector<f64>) -> Self {
        let n = lo.len();
        let mut c = DMatrix::zeros(2 * n, n);
        let mut d = DVector::zeros(2 * n);
        for i in 0..n {
            c[(2 * i, i)] = 1.0;
            d[2 * i] = hi[i];
            c[(2 * i + 1, i)] = -1.0;
            d[2 * i + 1] = -lo[i];
        }
        Polytope::new(c, d)
    }

    pub fn dim(&self) -> usize {
        self.c.ncols()
    }

    pub fn rows(&self) -> (&DMatrix<f64>, &DVector<f64>) {
        (&self.c, &self.d)
    }

    pub fn num_rows(&self) -> usize {
        self.c.nrows()
    }

    pub fn lp_rows(&self) -> Vec<Row> {
        (0..self.c.nrows())
            .map(|i| Row::new(self.c.row(i).transpose(), self.d[i]))
            .collect()
    }

    pub fn contains(&self, x: &DVector<f64>, tol: f64) -> bool {
        if self.trivially_empty {
            return false;
        }
        (0..self.c.nrows()).all(|i| self.c.row(i).transpose().dot(x) <= self.d[i] + tol)
    }

    /// Center and radius of the largest inscribed ball (radius capped for
    /// unbounded sets). `None` when the polytope is empty.
    pub fn chebyshev(&self) -> Option<(DVector<f64>, f64)> {
        self.cheb
            .get_or_init(|| {
                if self.trivially_empty {
                    return None;
                }
                let n = self.dim();
                let mut rows: Vec<Row> = Vec::with_capacity(self.c.nrows() + 2);
                for i in 0..self.c.nrows() {
                    let nr = self.c.row(i).norm();
                    let mut a = DVector::zeros(n + 1);
                    a.rows_mut(0, n).copy_from(&self.c.row(i).transpose());
                    a[n] = nr;
                    rows.push(Row::new(a, self.d[i]));
                }
                let mut cap = DVector::zeros(n + 1);
                cap[n] = 1.0;
                rows.push(Row::new(cap.clone(), CHEB_CAP));
                cap[n] = -1.0;
                rows.push(Row::new(cap, 0.0));
                let mut c = DVector::zeros(n + 1);
                c[n] = -1.0;
                match lp::minimize(&c, &rows) {
                    LpOutcome::Optimal { x, .. } => {
                        let center = x.rows(0, n).clone_owned();
                        Some((center, x[n]))
                    }
                    _ => None,
                }
            })
            .clone()
    }

    pub fn is_empty(&self) -> bool {
        self.trivially_empty || self.chebyshev().is_none()
    }

    /// Nonempty interior (inscribed ball of positive radius).
    pub fn is_full_dimensional(&self) -> bool {
        matches!(self.chebyshev(), Some((_, r)) if r > 1e-10)
    }

    /// Whether the recession cone `{u : C u <= 0}`, optionally intersected
    /// with `{u : A u <= 0}`, contains a nonzero direction. A polyhedral cone
    /// is nontrivial iff it meets one of the slices `u_j = +/-1`.
    pub fn recession_cone_nontrivial(&self, extra: Option<&DMatrix<f64>>) -> bool {
        let n = self.dim();
        let mut rows: Vec<Row> = Vec::new();
        for i in 0..self.c.nrows() {
            rows.push(Row::new(self.c.row(i).transpose(), 0.0));
        }
        if let Some(a) = extra {
            for i in 0..a.nrows() {
                if a.row(i).norm() > 1e-13 {
                    rows.push(Row::new(a.row(i).transpose(), 0.0));
                }
            }
        }
        for j in 0..n {
            for sign in [1.0, -1.0] {
                let mut fixed = rows.clone();
                let mut e = DVector::zeros(n);
                e[j] = sign;
                fixed.push(Row::new(e.clone(), 1.0));
                e[j] = -sign;
                fixed.push(Row::new(e, -1.0));
                if lp::feasible_point(n, &fixed).is_some() {
                    return true;
                }
            }
        }
        false
    }

    pub fn is_bounded(&self) -> bool {
        *self
            .bounded
            .get_or_init(|| self.num_rows() > 0 && !self.recession_cone_nontrivial(None))
    }

    /// Exact vertex set by enumerating row subsets (dimension <= 4).
    pub fn vertices(&self) -> &[DVector<f64>] {
        self.vertices.get_or_init(|| {
            let n = self.dim();
            let r = self.c.nrows();
            if self.trivially_empty || r < n {
                return Vec::new();
            }
            let scale = 1.0 + self.d.amax();
            let mut verts: Vec<DVector<f64>> = Vec::new();
            let mut subset = vec![0usize; n];
            enumerate_subsets(r, n, &mut subset, 0, 0, &mut |rows_idx| {
                let mut a = DMatrix::zeros(n, n);
                let mut b = DVector::zeros(n);
                for (row, &i) in rows_idx.iter().enumerate() {
                    a.row_mut(row).copy_from(&self.c.row(i));
                    b[row] = self.d[i];
                }
                let lu = a.clone().full_piv_lu();
                if let Some(x) = lu.solve(&b) {
                    // Reject near-singular intersections.
                    let residual = (&a * &x - &b).amax();
                    if residual > 1e-7 * scale || !x.iter().all(|v| v.is_finite()) {
                        return;
                    }
                    if self.contains(&x, 1e-7 * scale)
                        && !verts
                            .iter()
                            .any(|v| (v - &x).amax() < 1e-7 * (1.0 + x.amax()))
                    {
                        verts.push(x);
                    }
                }
            });
            verts
        })
    }

    /// Componentwise bounds from the vertex set; `None` when unbounded.
    pub fn bounding_box(&self) -> Option<(DVector<f64>, DVector<f64>)> {
        if !self.is_bounded() {
            return None;
        }
        let verts = self.vertices();
        if verts.is_empty() {
            return None;
        }
        let n = self.dim();
        let mut lo = DVector::from_element(n, f64::INFINITY);
        let mut hi = DVector::from_element(n, f64::NEG_INFINITY);
        for v in verts {
            for i in 0..n {
                lo[i] = lo[i].min(v[i]);
                hi[i] = hi[i].max(v[i]);
            }
        }
        Some((lo, hi))
    }

    pub fn circumradius(&self) -> Option<f64> {
        if !self.is_bounded() {
            return None;
        }
        self.vertices()
            .iter()
            .map(|v| v.norm())
            .fold(None, |acc, r| Some(acc.map_or(r, |a: f64| a.max(r))))
    }

    /// Exact volume by pyramid decomposition (bounded, dimension <= 4).
    pub fn volume(&self) -> Option<f64> {
        if !self.is_bounded() {
            return None;
        }
        let verts: Vec<DVector<f64>> = self.vertices().to_vec();
        let rows: Vec<(DVector<f64>, f64)> = (0..self.c.nrows())
            .map(|i| {
                let nr = self.c.row(i).norm();
                (self.c.row(i).transpose() / nr, self.d[i] / nr)
            })
            .collect();
        Some(volume_rec(&rows, &verts, self.dim()))
    }

    /// Rows of the intersection with further halfspaces.
    pub fn with_rows(&self, extra_c: &DMatrix<f64>, extra_d: &DVector<f64>) -> Polytope {
        let mut c = DMatrix::zeros(self.c.nrows() + extra_c.nrows(), self.dim());
        c.rows_mut(0, self.c.nrows()).copy_from(&self.c);
        c.rows_mut(self.c.nrows(), extra_c.nrows()).copy_from(extra_c);
        let mut d = DVector::zeros(self.d.len() + extra_d.len());
        d.rows_mut(0, self.d.len()).copy_from(&self.d);
        d.rows_mut(self.d.len(), extra_d.len()).copy_from(extra_d);
        Polytope::new(c, d)
    }

    /// Image under `x -> A x + t`, expressed with `A^{-1}` supplied by the
    /// caller: `{ x : C A^{-1} (x - t) <= d }`.
    pub fn affine_image(&self, a_inv: &DMatrix<f64>, t: &DVector<f64>) -> Polytope {
        let c = &self.c * a_inv;
        let d = &self.d + &c * t;
        Polytope::new(c, d)
    }

    /// The slice `{ y in R^k : basis y + offset in self }` in subspace
    /// coordinates.
    pub fn section(&self, basis: &DMatrix<f64>, offset: &DVector<f64>) -> Polytope {
        let c = &self.c * basis;
        let d = &self.d - &self.c * offset;
        Polytope::new(c, d)
    }
}

fn enumerate_subsets(
    r: usize,
    n: usize,
    subset: &mut Vec<usize>,
    depth: usize,
    start: usize,
    f: &mut impl FnMut(&[usize]),
) {
    if depth == n {
        f(subset);
        return;
    }
    for i in start..r {
        subset[depth] = i;
        enumerate_subsets(r, n, subset, depth + 1, i + 1, f);
    }
}

/// Pyramid-decomposition volume over normalized rows and the vertex set.
fn volume_rec(rows: &[(DVector<f64>, f64)], verts: &[DVector<f64>], dim: usize) -> f64 {
    if verts.len() < dim + 1 {
        return 0.0;
    }
    if dim == 1 {
        let lo = verts.iter().map(|v| v[0]).fold(f64::INFINITY, f64::min);
        let hi = verts.iter().map(|v| v[0]).fold(f64::NEG_INFINITY, f64::max);
        return (hi - lo).max(0.0);
    }
    let mut centroid = DVector::zeros(dim);
    for v in verts {
        centroid += v;
    }
    centroid /= verts.len() as f64;

    let mut total = 0.0;
    let mut used: Vec<(DVector<f64>, f64)> = Vec::new();
    for (a, b) in rows {
        // Skip duplicate facets coming from repeated rows.
        if used
            .iter()
            .any(|(ua, ub)| (ua - a).amax() < 1e-9 && (ub - b).abs() < 1e-9)
        {
            continue;
        }
        used.push((a.clone(), *b));
        let ftol = 1e-7 * (1.0 + b.abs());
        let on_facet: Vec<&DVector<f64>> =
            verts.iter().filter(|v| (a.dot(v) - b).abs() <= ftol).collect();
        if on_facet.len() < dim {
            continue;
        }
        let height = b - a.dot(&centroid);
        if height <= 1e-12 {
            continue;
        }
        let basis = null_basis(a);
        let p = a * *b;
        let sub_verts: Vec<DVector<f64>> = on_facet
            .iter()
            .map(|v| basis.transpose() * (*v - &p))
            .collect();
        let mut sub_rows: Vec<(DVector<f64>, f64)> = Vec::new();
        for (aj, bj) in rows {
            let a_sub = basis.transpose() * aj;
            let norm = a_sub.norm();
            if norm <= 1e-11 {
                continue;
            }
            sub_rows.push((a_sub / norm, (bj - aj.dot(&p)) / norm));
        }
        let facet_vol = volume_rec(&sub_rows, &sub_verts, dim - 1);
        total += height * facet_vol / dim as f64;
    }
    total
}
