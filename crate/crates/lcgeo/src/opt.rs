//! Convex subproblems behind the function operations: Euclidean projection
//! onto a polytope, quadratic minimization over a ball, max-affine
//! minimization over a polytope-ball intersection, and the maximum-volume
//! inscribed ellipsoid of a polytope.

use crate::error::{Error, Result};
use crate::geometry::Polytope;
use crate::lp::{self, LpOutcome, Row};
use nalgebra::{DMatrix, DVector};

/// Euclidean projection of `x` onto the polytope, with the distance.
/// Solved on the central path of `t |y-x|^2 - sum log s_i`; the polytope
/// must have nonempty interior.
pub fn project_onto_polytope(poly: &Polytope, x: &DVector<f64>) -> Result<(DVector<f64>, f64)> {
    if poly.contains(x, 0.0) {
        return Ok((x.clone(), 0.0));
    }
    let n = poly.dim();
    let (rows_c, rows_d) = poly.rows();
    let m = rows_c.nrows();
    let (start, radius) = poly.chebyshev().ok_or(Error::EmptyPolytope)?;
    if radius <= 1e-10 {
        return Err(Error::EmptyPolytope);
    }

    // Normalized rows.
    let mut a_rows: Vec<DVector<f64>> = Vec::with_capacity(m);
    let mut b: Vec<f64> = Vec::with_capacity(m);
    for i in 0..m {
        let nr = rows_c.row(i).norm();
        a_rows.push(rows_c.row(i).transpose() / nr);
        b.push(rows_d[i] / nr);
    }

    let slacks = |y: &DVector<f64>| -> Vec<f64> {
        (0..m).map(|i| b[i] - a_rows[i].dot(y)).collect()
    };
    let barrier_value = |t: f64, y: &DVector<f64>, s: &[f64]| -> f64 {
        t * (y - x).norm_squared() - s.iter().map(|v| v.ln()).sum::<f64>()
    };

    let mut y = start;
    let mut t = 1.0;
    while t < 1e13 {
        for _ in 0..60 {
            let s = slacks(&y);
            let mut grad = (&y - x) * (2.0 * t);
            let mut hess = DMatrix::identity(n, n) * (2.0 * t);
            for i in 0..m {
                grad += &a_rows[i] / s[i];
                hess += &a_rows[i] * a_rows[i].transpose() / (s[i] * s[i]);
            }
            let step = match hess.clone().cholesky() {
                Some(ch) => ch.solve(&(-&grad)),
                None => break,
            };
            let decrement = -grad.dot(&step);
            if decrement < 1e-13 * (1.0 + t) {
                break;
            }
            // Backtrack to stay strictly feasible, then Armijo.
            let f0 = barrier_value(t, &y, &s);
            let mut alpha = 1.0;
            let mut accepted = false;
            for _ in 0..60 {
                let cand = &y + &step * alpha;
                let sc = slacks(&cand);
                if sc.iter().all(|&v| v > 0.0)
                    && barrier_value(t, &cand, &sc) <= f0 - 0.25 * alpha * decrement
                {
                    y = cand;
                    accepted = true;
                    break;
                }
                alpha *= 0.5;
            }
            if !accepted {
                break;
            }
        }
        t *= 10.0;
    }
    let dist = (&y - x).norm();
    Ok((y, dist))
}

/// Minimum of `(y - m)^T Q (y - m) / 2` over the ball `|y - x| <= delta`,
/// with `Q = U diag(lam) U^T`. Solved on the boundary by safeguarded
/// root-finding for the multiplier.
pub fn min_quadratic_over_ball(
    u: &DMatrix<f64>,
    lam: &DVector<f64>,
    m: &DVector<f64>,
    x: &DVector<f64>,
    delta: f64,
) -> f64 {
    let n = lam.len();
    let w = x - m;
    let quad_at_x = {
        let wp = u.transpose() * &w;
        0.5 * (0..n).map(|i| lam[i] * wp[i] * wp[i]).sum::<f64>()
    };
    if delta <= 0.0 {
        return quad_at_x;
    }
    if w.norm() <= delta {
        return 0.0;
    }
    let wp = u.transpose() * &w;
    // |z(mu)|^2 with z the boundary minimizer as a function of the multiplier.
    let norm_z = |mu: f64| -> f64 {
        (0..n)
            .map(|i| {
                let zi = lam[i] * wp[i] / (lam[i] + mu);
                zi * zi
            })
            .sum::<f64>()
            .sqrt()
    };
    let lam_max = lam.max();
    let mut lo = 0.0;
    let mut hi = lam_max * w.norm() / delta;
    while norm_z(hi) > delta {
        hi *= 2.0;
    }
    // Newton on 1/delta - 1/|z(mu)|, bisection as a safeguard.
    let mut mu = 0.5 * (lo + hi);
    for _ in 0..200 {
        let nz = norm_z(mu);
        if (nz - delta).abs() <= 1e-14 * delta {
            break;
        }
        if nz > delta {
            lo = mu;
        } else {
            hi = mu;
        }
        let dnz = {
            // d|z|/dmu = -(1/|z|) sum z_i^2 / (lam_i + mu)
            let s: f64 = (0..n)
                .map(|i| {
                    let zi = lam[i] * wp[i] / (lam[i] + mu);
                    zi * zi / (lam[i] + mu)
                })
                .sum();
            -s / nz
        };
        let phi = 1.0 / delta - 1.0 / nz;
        let dphi = dnz / (nz * nz);
        let newton = mu - phi / dphi;
        mu = if newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
        if hi - lo <= 1e-15 * (1.0 + hi) {
            break;
        }
    }
    0.5 * (0..n)
        .map(|i| {
            let yi = wp[i] * mu / (lam[i] + mu);
            lam[i] * yi * yi
        })
        .sum::<f64>()
}

/// Minimum of `max_i (a_i . y + b_i)` over `P ∩ B(x, delta)`.
///
/// Outer cutting planes on the ball give a certified lower bound; feasible
/// upper bounds come from pulling the LP optimum back to the sphere along a
/// segment through an interior anchor. Returns `None` when the ball misses
/// the polytope. Gap target is 1e-8 on the exponent scale.
pub fn min_max_affine_over_ball(
    pieces: &[(DVector<f64>, f64)],
    poly: &Polytope,
    x: &DVector<f64>,
    delta: f64,
) -> Result<Option<f64>> {
    let n = poly.dim();
    let eval = |y: &DVector<f64>| -> f64 {
        pieces
            .iter()
            .map(|(a, b)| a.dot(y) + b)
            .fold(f64::NEG_INFINITY, f64::max)
    };
    let (anchor, dist) = project_onto_polytope(poly, x)?;
    if dist > delta + 1e-12 {
        return Ok(None);
    }
    if dist >= delta - 1e-9 {
        // Touching case: the intersection is essentially the contact point.
        return Ok(Some(eval(&anchor)));
    }

    let mut rows = poly.lp_rows();
    // Outer box around the ball keeps every relaxation compact.
    for i in 0..n {
        let mut e = DVector::zeros(n);
        e[i] = 1.0;
        rows.push(Row::new(e.clone(), x[i] + delta));
        e[i] = -1.0;
        rows.push(Row::new(e, -(x[i] - delta)));
    }

    let mut upper = eval(&anchor);
    for _ in 0..300 {
        let (zt, lower) = match lp::minimize_max_affine(pieces, &rows, n) {
            LpOutcome::Optimal { x: zt, objective } => (zt, objective),
            LpOutcome::Infeasible => return Ok(Some(upper)),
            LpOutcome::Unbounded => {
                return Err(Error::SolverFailure(
                    "unbounded relaxation in ball-constrained minimization".into(),
                ))
            }
        };
        let z = zt.rows(0, n).clone_owned();
        let gap_dir = &z - x;
        let r = gap_dir.norm();
        if r <= delta * (1.0 + 1e-10) {
            return Ok(Some(lower));
        }
        // Feasible candidate: walk from the anchor toward z until the sphere.
        let u = &z - &anchor;
        let v = &anchor - x;
        let uu = u.norm_squared();
        let uv = u.dot(&v);
        let disc = (uv * uv - uu * (v.norm_squared() - delta * delta)).max(0.0);
        let t = ((-uv + disc.sqrt()) / uu).clamp(0.0, 1.0);
        let candidate = &anchor + &u * t;
        upper = upper.min(eval(&candidate));
        if upper - lower <= 1e-8 * upper.abs().max(1.0) {
            return Ok(Some(upper));
        }
        let cut = &gap_dir / r;
        let rhs = cut.dot(x) + delta;
        rows.push(Row::new(cut, rhs));
    }
    Err(Error::SolverFailure(
        "ball-constrained minimization did not reach the gap target".into(),
    ))
}

/// Maximum-volume inscribed ellipsoid `{ c + L u : |u| <= 1 }` of a bounded
/// full-dimensional polytope.
#[derive(Clone, Debug)]
pub struct InscribedEllipsoid {
    pub center: DVector<f64>,
    /// Lower-triangular with positive diagonal.
    pub shape: DMatrix<f64>,
}

impl InscribedEllipsoid {
    pub fn det_shape(&self) -> f64 {
        (0..self.shape.nrows()).map(|i| self.shape[(i, i)]).product()
    }
}

/// Determinant maximization subject to `|L^T a_i| + a_i . c <= b_i`, solved
/// by Newton steps on the log barrier. Stops when successive log-volumes
/// agree to 1e-9.
pub fn max_volume_inscribed_ellipsoid(poly: &Polytope) -> Result<InscribedEllipsoid> {
    if !poly.is_bounded() {
        return Err(Error::UnboundedPolytope);
    }
    let n = poly.dim();
    let (rows_c, rows_d) = poly.rows();
    let m = rows_c.nrows();
    let (c0, radius) = poly.chebyshev().ok_or(Error::EmptyPolytope)?;
    if radius <= 1e-10 {
        return Err(Error::EmptyPolytope);
    }

    let mut a_rows: Vec<DVector<f64>> = Vec::with_capacity(m);
    let mut b: Vec<f64> = Vec::with_capacity(m);
    for i in 0..m {
        let nr = rows_c.row(i).norm();
        a_rows.push(rows_c.row(i).transpose() / nr);
        b.push(rows_d[i] / nr);
    }

    // Variable layout: center (n entries) then vech(L) column by column.
    let tri: Vec<(usize, usize)> = (0..n)
        .flat_map(|q| (q..n).map(move |p| (p, q)))
        .collect();
    let nv = n + tri.len();

    let mut center = c0;
    let mut l = DMatrix::<f64>::identity(n, n) * (0.9 * radius);

    let slack = |center: &DVector<f64>, l: &DMatrix<f64>, i: usize| -> f64 {
        b[i] - a_rows[i].dot(center) - (l.transpose() * &a_rows[i]).norm()
    };
    let logdet = |l: &DMatrix<f64>| -> f64 { (0..n).map(|j| l[(j, j)].ln()).sum() };
    let barrier = |t: f64, center: &DVector<f64>, l: &DMatrix<f64>| -> f64 {
        let mut f = -t * logdet(l);
        for i in 0..m {
            let s = slack(center, l, i);
            if s <= 0.0 {
                return f64::INFINITY;
            }
            f -= s.ln();
        }
        f
    };

    let mut t = 1.0;
    let mut last_logdet = f64::NEG_INFINITY;
    for _stage in 0..40 {
        for _newton in 0..60 {
            // Assemble gradient and Hessian over (center, vech(L)).
            let mut grad = DVector::zeros(nv);
            let mut hess = DMatrix::zeros(nv, nv);
            for (row, &(p, q)) in tri.iter().enumerate() {
                if p == q {
                    grad[n + row] -= t / l[(p, p)];
                    hess[(n + row, n + row)] += t / (l[(p, p)] * l[(p, p)]);
                }
            }
            let mut failed = false;
            for i in 0..m {
                let a = &a_rows[i];
                let v = l.transpose() * a;
                let r = v.norm().max(1e-300);
                let s = b[i] - a.dot(&center) - r;
                if s <= 0.0 {
                    failed = true;
                    break;
                }
                // Gradient of the slack w.r.t. variables: -a on the center
                // block, -(a_p v_q / r) on the L block.
                let mut ds = DVector::zeros(nv);
                for u in 0..n {
                    ds[u] = -a[u];
                }
                for (row, &(p, q)) in tri.iter().enumerate() {
                    ds[n + row] = -a[p] * v[q] / r;
                }
                grad -= &ds / s;
                hess += &ds * ds.transpose() / (s * s);
                // Curvature of |L^T a| itself.
                for (row, &(p, q)) in tri.iter().enumerate() {
                    for (col, &(pu, qw)) in tri.iter().enumerate() {
                        let kron = if q == qw { 1.0 } else { 0.0 };
                        let term = a[p] * a[pu] * (kron - v[q] * v[qw] / (r * r)) / r;
                        hess[(n + row, n + col)] += term / s;
                    }
                }
            }
            if failed {
                return Err(Error::SolverFailure("inscribed ellipsoid left the domain".into()));
            }
            for i in 0..nv {
                hess[(i, i)] += 1e-12 * (1.0 + hess[(i, i)].abs());
            }
            let step = hess
                .clone()
                .cholesky()
                .map(|ch| ch.solve(&(-&grad)))
                .ok_or_else(|| Error::SolverFailure("singular Newton system in ellipsoid solver".into()))?;
            let decrement = -grad.dot(&step);
            if decrement < 1e-12 * (1.0 + t) {
                break;
            }
            let f0 = barrier(t, &center, &l);
            let mut alpha = 1.0;
            let mut moved = false;
            for _ in 0..60 {
                let mut cand_c = center.clone();
                let mut cand_l = l.clone();
                for u in 0..n {
                    cand_c[u] += alpha * step[u];
                }
                for (row, &(p, q)) in tri.iter().enumerate() {
                    cand_l[(p, q)] += alpha * step[n + row];
                }
                let diag_ok = (0..n).all(|j| cand_l[(j, j)] > 0.0);
                if diag_ok && barrier(t, &cand_c, &cand_l) <= f0 - 0.25 * alpha * decrement {
                    center = cand_c;
                    l = cand_l;
                    moved = true;
                    break;
                }
                alpha *= 0.5;
            }
            if !moved {
                break;
            }
        }
        let ld = logdet(&l);
        if (ld - last_logdet).abs() < 1e-9 && (m as f64) / t < 1e-9 {
            break;
        }
        last_logdet = ld;
        t *= 8.0;
    }

    for i in 0..m {
        if slack(&center, &l, i) < -1e-7 * (1.0 + b[i].abs()) {
            return Err(Error::SolverFailure(
                "inscribed ellipsoid violates a constraint".into(),
            ));
        }
    }
    Ok(InscribedEllipsoid { center, shape: l })
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::{DMatrix, DVector};

    fn square(half: f64) -> Polytope {
        Polytope::from_box(
            &DVector::from_vec(vec![-half, -half]),
            &DVector::from_vec(vec![half, half]),
        )
    }

    #[test]
    fn projection_basics() {
        let p = square(1.0);
        let (y, dist) = project_onto_polytope(&p, &DVector::from_vec(vec![3.0, 0.0])).unwrap();
        assert!((dist - 2.0).abs() < 1e-6);
        assert!((y - DVector::from_vec(vec![1.0, 0.0])).norm() < 1e-5);

        let inside = DVector::from_vec(vec![0.3, -0.4]);
        let (y, dist) = project_onto_polytope(&p, &inside).unwrap();
        assert_eq!(dist, 0.0);
        assert_eq!(y, inside);

        // Corner projection.
        let (y, dist) = project_onto_polytope(&p, &DVector::from_vec(vec![2.0, 2.0])).unwrap();
        assert!((dist - 2.0f64.sqrt()).abs() < 1e-6);
        assert!((y - DVector::from_vec(vec![1.0, 1.0])).norm() < 1e-5);
    }

    #[test]
    fn quadratic_over_ball_matches_hand_values() {
        // Q = I in 1D: f(y) = y^2/2, ball around x = 2 with delta = 1.
        let u = DMatrix::identity(1, 1);
        let lam = DVector::from_vec(vec![1.0]);
        let v = min_quadratic_over_ball(
            &u,
            &lam,
            &DVector::zeros(1),
            &DVector::from_vec(vec![2.0]),
            1.0,
        );
        assert!((v - 0.5).abs() < 1e-10);

        // Ball covers the minimizer.
        let v = min_quadratic_over_ball(
            &u,
            &lam,
            &DVector::zeros(1),
            &DVector::from_vec(vec![0.5]),
            1.0,
        );
        assert_eq!(v, 0.0);

        // Anisotropic 2D, verified against a fine boundary scan.
        let q = DMatrix::from_row_slice(2, 2, &[3.0, 1.0, 1.0, 2.0]);
        let eig = nalgebra::SymmetricEigen::new(q.clone());
        let m = DVector::from_vec(vec![0.2, -0.1]);
        let x = DVector::from_vec(vec![2.0, 1.5]);
        let delta = 0.7;
        let v = min_quadratic_over_ball(&eig.eigenvectors, &eig.eigenvalues, &m, &x, delta);
        let mut best = f64::INFINITY;
        for i in 0..20000 {
            let t = 2.0 * std::f64::consts::PI * i as f64 / 20000.0;
            let y = DVector::from_vec(vec![x[0] + delta * t.cos(), x[1] + delta * t.sin()]);
            let d = &y - &m;
            best = best.min(0.5 * (q.clone() * &d).dot(&d));
        }
        assert!((v - best).abs() < 1e-6, "{v} vs {best}");
    }

    #[test]
    fn ball_constrained_max_affine() {
        // |y|_1-like exponent over the square, ball far outside.
        let pieces = vec![
            (DVector::from_vec(vec![1.0, 0.0]), 0.0),
            (DVector::from_vec(vec![-1.0, 0.0]), 0.0),
        ];
        let p = square(1.0);
        let miss = min_max_affine_over_ball(&pieces, &p, &DVector::from_vec(vec![5.0, 0.0]), 1.0)
            .unwrap();
        assert!(miss.is_none());

        // Ball around (1.4, 0) with delta .5 reaches x1 = 0.9: min |x1| = 0.9.
        let v = min_max_affine_over_ball(&pieces, &p, &DVector::from_vec(vec![1.4, 0.0]), 0.5)
            .unwrap()
            .unwrap();
        assert!((v - 0.9).abs() < 1e-7, "{v}");

        // Ball containing the whole strip: min is 0.
        let v = min_max_affine_over_ball(&pieces, &p, &DVector::from_vec(vec![0.2, 0.1]), 0.5)
            .unwrap()
            .unwrap();
        assert!(v.abs() < 1e-7);
    }

    #[test]
    fn mvie_of_square_is_unit_disk() {
        let e = max_volume_inscribed_ellipsoid(&square(1.0)).unwrap();
        assert!(e.center.norm() < 1e-6);
        assert!((e.det_shape() - 1.0).abs() < 1e-5);
        assert!(((&e.shape * e.shape.transpose()) - DMatrix::identity(2, 2)).norm() < 1e-4);
    }

    #[test]
    fn mvie_of_triangle_is_steiner_inellipse() {
        let c = DMatrix::from_row_slice(3, 2, &[-1.0, 0.0, 0.0, -1.0, 1.0, 1.0]);
        let d = DVector::from_vec(vec![0.0, 0.0, 1.0]);
        let tri = Polytope::new(c, d);
        let e = max_volume_inscribed_ellipsoid(&tri).unwrap();
        // Center at the centroid, area pi/(6 sqrt 3).
        assert!((&e.center - DVector::from_vec(vec![1.0 / 3.0, 1.0 / 3.0])).norm() < 1e-5);
        let target = 1.0 / (6.0 * 3.0f64.sqrt());
        assert!((e.det_shape() - target).abs() < 1e-6 * 10.0);
    }

    #[test]
    fn mvie_of_cube_is_unit_ball() {
        let cube = Polytope::from_box(
            &DVector::from_element(3, -1.0),
            &DVector::from_element(3, 1.0),
        );
        let e = max_volume_inscribed_ellipsoid(&cube).unwrap();
        assert!(e.center.norm() < 1e-6);
        assert!((e.det_shape() - 1.0).abs() < 1e-5);
    }

    #[test]
    fn mvie_is_affine_equivariant_in_volume() {
        let p = square(1.0);
        let e0 = max_volume_inscribed_ellipsoid(&p).unwrap();
        let a = DMatrix::from_row_slice(2, 2, &[1.5, 0.7, 0.0, 0.8]);
        let a_inv = a.clone().try_inverse().unwrap();
        let img = p.affine_image(&a_inv, &DVector::from_vec(vec![0.4, -0.2]));
        let e1 = max_volume_inscribed_ellipsoid(&img).unwrap();
        let det: f64 = a.determinant();
        assert!(
            (e1.det_shape() - det.abs() * e0.det_shape()).abs() < 1e-4,
            "{} vs {}",
            e1.det_shape(),
            det.abs() * e0.det_shape()
        );
    }
}
