//! Small shared linear-algebra and integer helpers.

use nalgebra::{DMatrix, DVector};

/// Orthonormal basis of the hyperplane orthogonal to a unit vector `a`,
/// returned as the columns of a d x (d-1) matrix. Built from the Householder
/// reflector that maps `a` to a signed coordinate axis.
pub fn null_basis(a: &DVector<f64>) -> DMatrix<f64> {
    let d = a.len();
    assert!(d >= 1);
    if d == 1 {
        return DMatrix::zeros(1, 0);
    }
    let sigma = if a[0] >= 0.0 { 1.0 } else { -1.0 };
    let mut u = a.clone();
    u[0] += sigma;
    let uu = u.dot(&u);
    let mut basis = DMatrix::zeros(d, d - 1);
    for j in 1..d {
        // column j of H = I - 2 u uᵀ / (uᵀu), which is orthogonal to a
        let factor = 2.0 * u[j] / uu;
        for i in 0..d {
            let e = if i == j { 1.0 } else { 0.0 };
            basis[(i, j - 1)] = e - factor * u[i];
        }
    }
    basis
}

/// Symmetric positive square root via eigendecomposition.
pub fn symmetric_sqrt(m: &DMatrix<f64>) -> Option<DMatrix<f64>> {
    let sym = nalgebra::SymmetricEigen::new(m.clone());
    if sym.eigenvalues.iter().any(|&l| l <= 0.0) {
        return None;
    }
    let sqrt_l = DVector::from_iterator(m.nrows(), sym.eigenvalues.iter().map(|l| l.sqrt()));
    Some(&sym.eigenvectors * DMatrix::from_diagonal(&sqrt_l) * sym.eigenvectors.transpose())
}

/// 2-norm condition number estimate from singular values.
pub fn cond_2(m: &DMatrix<f64>) -> f64 {
    let svd = m.clone().svd(false, false);
    let max = svd.singular_values.max();
    let min = svd.singular_values.min();
    if min <= 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}

pub fn splitmix64(state: u64) -> u64 {
    let mut z = state.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// FNV-1a over a label, used to derive named random streams.
pub fn fnv1a(label: &str) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for byte in label.as_bytes() {
        h ^= u64::from(*byte);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

/// Deterministic Fisher-Yates shuffle of 0..m driven by splitmix64.
pub fn shuffled_indices(m: usize, seed: u64) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..m).collect();
    let mut state = seed;
    for i in (1..m).rev() {
        state = splitmix64(state);
        let j = (state % (i as u64 + 1)) as usize;
        idx.swap(i, j);
    }
    idx
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn null_basis_is_orthonormal_complement() {
        for dir in [
            DVector::from_vec(vec![1.0, 0.0, 0.0]),
            DVector::from_vec(vec![0.0, -1.0, 0.0]),
            DVector::from_vec(vec![0.6, 0.8, 0.0]),
            DVector::from_vec(vec![-0.5, 0.5, 1.0 / 2.0f64.sqrt()]),
        ] {
            let a = dir.normalize();
            let w = null_basis(&a);
            let gram = w.transpose() * &w;
            assert!((gram - DMatrix::identity(2, 2)).norm() < 1e-12);
            assert!((w.transpose() * &a).norm() < 1e-12);
        }
    }

    #[test]
    fn symmetric_sqrt_squares_back() {
        let m = DMatrix::from_row_slice(2, 2, &[2.0, 0.5, 0.5, 1.0]);
        let s = symmetric_sqrt(&m).unwrap();
        assert!((&s * &s - &m).norm() < 1e-12);
    }

    #[test]
    fn shuffle_is_deterministic() {
        assert_eq!(shuffled_indices(10, 7), shuffled_indices(10, 7));
        assert_ne!(shuffled_indices(10, 7), shuffled_indices(10, 8));
    }
}
