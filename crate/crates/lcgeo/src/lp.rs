//! Dense linear programs in a handful of variables, solved by Seidel's
//! randomized incremental algorithm.
//!
//! Every linear program in this crate lives in at most `dim + 1` variables
//! (a point of R^n plus, sometimes, an epigraph variable), while constraint
//! counts stay in the tens. In that regime Seidel's method runs in expected
//! O(d! * m) time, which keeps the per-sample subproblems of the Monte Carlo
//! integrators cheap. Feasible sets are intersected with the implicit box
//! |x_i| <= BOX_BOUND; an optimum pinned to that box is reported as
//! unbounded.

use crate::lin::{null_basis, shuffled_indices, splitmix64};
use nalgebra::DVector;

/// Implicit bounding box that keeps every subproblem compact.
pub const BOX_BOUND: f64 = 1e7;

const FEAS_TOL: f64 = 1e-9;

/// One inequality `a . x <= b`.
#[derive(Clone, Debug)]
pub struct Row {
    pub a: DVector<f64>,
    pub b: f64,
}

impl Row {
    pub fn new(a: DVector<f64>, b: f64) -> Self {
        Row { a, b }
    }
}

#[derive(Clone, Debug)]
pub enum LpOutcome {
    Optimal { x: DVector<f64>, objective: f64 },
    Infeasible,
    Unbounded,
}

impl LpOutcome {
    pub fn optimal(self) -> Option<(DVector<f64>, f64)> {
        match self {
            LpOutcome::Optimal { x, objective } => Some((x, objective)),
            _ => None,
        }
    }
}

/// Minimize `c . x` subject to `rows` and the implicit box.
pub fn minimize(c: &DVector<f64>, rows: &[Row]) -> LpOutcome {
    let d = c.len();
    // Normalize rows; constant rows (zero gradient) are either vacuous or
    // certify infeasibility outright.
    let mut clean: Vec<Row> = Vec::with_capacity(rows.len());
    for r in rows {
        debug_assert_eq!(r.a.len(), d);
        let norm = r.a.norm();
        if norm <= 1e-13 {
            if r.b < -1e-12 {
                return LpOutcome::Infeasible;
            }
            continue;
        }
        clean.push(Row::new(&r.a / norm, r.b / norm));
    }
    let order = shuffled_indices(clean.len(), splitmix64((d as u64) << 32 ^ clean.len() as u64));
    match solve_rec(c, &clean, &order) {
        None => LpOutcome::Infeasible,
        Some(x) => {
            if x.iter().any(|v| v.abs() >= BOX_BOUND * (1.0 - 1e-6)) {
                LpOutcome::Unbounded
            } else {
                let objective = c.dot(&x);
                LpOutcome::Optimal { x, objective }
            }
        }
    }
}

/// Any point satisfying `rows` (and the implicit box), if one exists.
pub fn feasible_point(dim: usize, rows: &[Row]) -> Option<DVector<f64>> {
    match minimize(&DVector::zeros(dim), rows) {
        LpOutcome::Optimal { x, .. } => Some(x),
        LpOutcome::Unbounded => None,
        LpOutcome::Infeasible => None,
    }
}

/// Minimize `max_i (alpha_i . z + beta_i)` over `region`, via the epigraph
/// variable. Returns the optimal `(z, value)`.
pub fn minimize_max_affine(
    affine: &[(DVector<f64>, f64)],
    region: &[Row],
    dim: usize,
) -> LpOutcome {
    debug_assert!(!affine.is_empty());
    let mut rows: Vec<Row> = Vec::with_capacity(affine.len() + region.len());
    for (alpha, beta) in affine {
        let mut a = DVector::zeros(dim + 1);
        a.rows_mut(0, dim).copy_from(alpha);
        a[dim] = -1.0;
        rows.push(Row::new(a, -beta));
    }
    for r in region {
        let mut a = DVector::zeros(dim + 1);
        a.rows_mut(0, dim).copy_from(&r.a);
        rows.push(Row::new(a, r.b));
    }
    let mut c = DVector::zeros(dim + 1);
    c[dim] = 1.0;
    minimize(&c, &rows)
}

fn solve_rec(c: &DVector<f64>, rows: &[Row], order: &[usize]) -> Option<DVector<f64>> {
    let d = c.len();
    if d == 1 {
        return solve_1d(c[0], rows.iter().map(|r| (r.a[0], r.b)));
    }

    // Start at the box corner that minimizes the objective.
    let mut x = DVector::from_iterator(
        d,
        c.iter().map(|&cj| {
            if cj > 0.0 {
                -BOX_BOUND
            } else if cj < 0.0 {
                BOX_BOUND
            } else {
                0.0
            }
        }),
    );

    let mut active: Vec<usize> = Vec::with_capacity(rows.len());
    for &idx in order {
        let row = &rows[idx];
        let slack = row.b - row.a.dot(&x);
        if slack >= -FEAS_TOL * (1.0 + row.b.abs()) {
            active.push(idx);
            continue;
        }

        // The optimum of the active set plus this row lies on its hyperplane.
        // Parameterize the hyperplane and recurse one dimension down.
        let basis = null_basis(&row.a); // d x (d-1)
        let p = &row.a * row.b;
        let mut sub_rows: Vec<Row> = Vec::with_capacity(active.len() + 2 * d);
        for &j in &active {
            let rj = &rows[j];
            if !project_row(&basis, &p, &rj.a, rj.b, &mut sub_rows) {
                return None;
            }
        }
        // Implicit box, projected explicitly so sub-problems stay compact.
        for i in 0..d {
            let mut e = DVector::zeros(d);
            e[i] = 1.0;
            if !project_row(&basis, &p, &e, BOX_BOUND, &mut sub_rows) {
                return None;
            }
            e[i] = -1.0;
            if !project_row(&basis, &p, &e, BOX_BOUND, &mut sub_rows) {
                return None;
            }
        }
        let sub_c = basis.transpose() * c;
        let sub_order = shuffled_indices(
            sub_rows.len(),
            splitmix64((d as u64) << 40 ^ sub_rows.len() as u64 ^ idx as u64),
        );
        let y = solve_rec(&sub_c, &sub_rows, &sub_order)?;
        x = &p + &basis * y;
        active.push(idx);
    }
    Some(x)
}

/// Express `a . x <= b` in hyperplane coordinates `x = p + W y`. Returns
/// false when the row is parallel to the hyperplane and violated on it.
fn project_row(
    basis: &nalgebra::DMatrix<f64>,
    p: &DVector<f64>,
    a: &DVector<f64>,
    b: f64,
    out: &mut Vec<Row>,
) -> bool {
    let a_sub = basis.transpose() * a;
    let b_sub = b - a.dot(p);
    let norm = a_sub.norm();
    if norm <= 1e-11 {
        return b_sub >= -1e-7 * (1.0 + b.abs());
    }
    out.push(Row::new(a_sub / norm, b_sub / norm));
    true
}

fn solve_1d(c: f64, rows: impl Iterator<Item = (f64, f64)>) -> Option<DVector<f64>> {
    let mut lo = -BOX_BOUND;
    let mut hi = BOX_BOUND;
    for (a, b) in rows {
        if a > 1e-12 {
            hi = hi.min(b / a);
        } else if a < -1e-12 {
            lo = lo.max(b / a);
        } else if b < -1e-9 {
            return None;
        }
    }
    if lo > hi + 1e-9 {
        return None;
    }
    let hi_c = hi.max(lo);
    let x = if c > 0.0 {
        lo
    } else if c < 0.0 {
        hi_c
    } else {
        lo.max(hi_c.min(0.0))
    };
    Some(DVector::from_element(1, x))
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DVector;

    fn unit_square() -> Vec<Row> {
        vec![
            Row::new(DVector::from_vec(vec![1.0, 0.0]), 1.0),
            Row::new(DVector::from_vec(vec![-1.0, 0.0]), 0.0),
            Row::new(DVector::from_vec(vec![0.0, 1.0]), 1.0),
            Row::new(DVector::from_vec(vec![0.0, -1.0]), 0.0),
        ]
    }

    #[test]
    fn minimizes_over_square() {
        let (x, obj) = minimize(&DVector::from_vec(vec![1.0, 1.0]), &unit_square())
            .optimal()
            .unwrap();
        assert!((x - DVector::from_vec(vec![0.0, 0.0])).norm() < 1e-9);
        assert!(obj.abs() < 1e-9);

        let (x, obj) = minimize(&DVector::from_vec(vec![-1.0, -2.0]), &unit_square())
            .optimal()
            .unwrap();
        assert!((x - DVector::from_vec(vec![1.0, 1.0])).norm() < 1e-9);
        assert!((obj + 3.0).abs() < 1e-9);
    }

    #[test]
    fn detects_infeasible() {
        let rows = vec![
            Row::new(DVector::from_vec(vec![1.0, 0.0]), -1.0),
            Row::new(DVector::from_vec(vec![-1.0, 0.0]), -1.0),
        ];
        assert!(matches!(
            minimize(&DVector::from_vec(vec![1.0, 0.0]), &rows),
            LpOutcome::Infeasible
        ));
    }

    #[test]
    fn detects_unbounded() {
        let rows = vec![Row::new(DVector::from_vec(vec![-1.0, 0.0]), 0.0)];
        assert!(matches!(
            minimize(&DVector::from_vec(vec![-1.0, 0.0]), &rows),
            LpOutcome::Unbounded
        ));
    }

    #[test]
    fn epigraph_minimizes_abs() {
        // max(z, -z) over [-2, 3]: minimum 0 at z = 0.
        let affine = vec![
            (DVector::from_vec(vec![1.0]), 0.0),
            (DVector::from_vec(vec![-1.0]), 0.0),
        ];
        let region = vec![
            Row::new(DVector::from_vec(vec![1.0]), 3.0),
            Row::new(DVector::from_vec(vec![-1.0]), 2.0),
        ];
        let (x, obj) = minimize_max_affine(&affine, &region, 1).optimal().unwrap();
        assert!(x[0].abs() < 1e-9);
        assert!(obj.abs() < 1e-9);
    }

    #[test]
    fn epigraph_respects_region() {
        // max(z, -z) over [1, 3]: minimum 1 at z = 1.
        let affine = vec![
            (DVector::from_vec(vec![1.0]), 0.0),
            (DVector::from_vec(vec![-1.0]), 0.0),
        ];
        let region = vec![
            Row::new(DVector::from_vec(vec![1.0]), 3.0),
            Row::new(DVector::from_vec(vec![-1.0]), -1.0),
        ];
        let (x, obj) = minimize_max_affine(&affine, &region, 1).optimal().unwrap();
        assert!((x[0] - 1.0).abs() < 1e-9);
        assert!((obj - 1.0).abs() < 1e-9);
    }

    #[test]
    fn three_dim_corner() {
        // min -x-y-z over unit cube.
        let mut rows = Vec::new();
        for i in 0..3 {
            let mut a = DVector::zeros(3);
            a[i] = 1.0;
            rows.push(Row::new(a.clone(), 1.0));
            a[i] = -1.0;
            rows.push(Row::new(a, 0.0));
        }
        let (x, obj) = minimize(&DVector::from_vec(vec![-1.0, -1.0, -1.0]), &rows)
            .optimal()
            .unwrap();
        assert!((x - DVector::from_vec(vec![1.0, 1.0, 1.0])).norm() < 1e-9);
        assert!((obj + 3.0).abs() < 1e-9);
    }

    #[test]
    fn redundant_and_degenerate_rows() {
        let mut rows = unit_square();
        rows.push(Row::new(DVector::from_vec(vec![1.0, 0.0]), 5.0)); // redundant
        rows.push(Row::new(DVector::from_vec(vec![0.0, 0.0]), 1.0)); // vacuous
        rows.push(Row::new(DVector::from_vec(vec![1.0, 1.0]), 2.0)); // redundant diagonal
        let (x, _) = minimize(&DVector::from_vec(vec![0.0, -1.0]), &rows)
            .optimal()
            .unwrap();
        assert!((x[1] - 1.0).abs() < 1e-9);
    }
}
