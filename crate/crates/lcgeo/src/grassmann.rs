//! Subspaces, orthonormal frames and Haar-distributed sampling on the
//! Grassmannian of k-dimensional subspaces of R^n, plus uniform sampling on
//! the unit sphere.
//!
//! Randomness is counter-based: a [`SeededStream`] is a `(seed, index)` pair
//! and every draw is a pure function of it, so partitioning index ranges
//! across workers cannot change results.

use crate::error::{Error, Result};
use crate::lin::{fnv1a, splitmix64};
use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rand_distr::StandardNormal;

/// A named, splittable random stream. Identical `(seed, index)` pairs
/// reproduce identical draws regardless of worker count.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SeededStream {
    pub seed: u64,
    pub index: u64,
}

impl SeededStream {
    pub fn new(seed: u64) -> Self {
        SeededStream { seed, index: 0 }
    }

    /// Independent stream for a named sub-computation.
    pub fn derive(&self, label: &str) -> SeededStream {
        SeededStream {
            seed: splitmix64(self.seed ^ fnv1a(label)),
            index: 0,
        }
    }

    /// Same stream family at a different counter value.
    pub fn at(&self, index: u64) -> SeededStream {
        SeededStream {
            seed: self.seed,
            index,
        }
    }

    pub fn rng(&self) -> ChaCha12Rng {
        let mut rng = ChaCha12Rng::seed_from_u64(self.seed);
        rng.set_stream(self.index);
        rng
    }
}

/// An orthonormal basis of a k-dimensional subspace H of R^n together with
/// an orthonormal basis of its orthogonal complement.
#[derive(Clone, Debug)]
pub struct Frame {
    n: usize,
    k: usize,
    basis: DMatrix<f64>,      // n x k
    complement: DMatrix<f64>, // n x (n-k)
}

const ORTHO_TOL: f64 = 1e-12;

impl Frame {
    /// Validates orthonormality of both blocks and mutual orthogonality.
    pub fn new(basis: DMatrix<f64>, complement: DMatrix<f64>) -> Result<Self> {
        let n = basis.nrows();
        let k = basis.ncols();
        if complement.nrows() != n || complement.ncols() != n - k {
            return Err(Error::DimensionMismatch {
                expected: n - k,
                got: complement.ncols(),
            });
        }
        let defect = orthonormality_defect(&basis, &complement);
        if defect > ORTHO_TOL {
            return Err(Error::FrameNotOrthonormal { defect });
        }
        Ok(Frame {
            n,
            k,
            basis,
            complement,
        })
    }

    /// The whole space as a frame (empty complement).
    pub fn full(n: usize) -> Self {
        Frame {
            n,
            k: n,
            basis: DMatrix::identity(n, n),
            complement: DMatrix::zeros(n, 0),
        }
    }

    /// The hyperplane orthogonal to a unit vector.
    pub fn hyperplane_orthogonal_to(theta: &DVector<f64>) -> Result<Self> {
        let n = theta.len();
        if (theta.norm() - 1.0).abs() > 1e-10 {
            return Err(Error::invalid("theta", "direction must be a unit vector"));
        }
        let basis = crate::lin::null_basis(theta);
        Frame::new(basis, DMatrix::from_column_slice(n, 1, theta.as_slice()))
    }

    /// Orthonormalizes the given spanning columns and completes them to a
    /// full orthonormal system.
    pub fn from_spanning_columns(cols: &DMatrix<f64>) -> Result<Self> {
        let n = cols.nrows();
        let k = cols.ncols();
        let mut accepted: Vec<DVector<f64>> = Vec::with_capacity(n);
        for j in 0..k {
            let mut v = cols.column(j).clone_owned();
            for _ in 0..2 {
                for a in &accepted {
                    let proj = a.dot(&v);
                    v -= a * proj;
                }
            }
            let norm = v.norm();
            if norm <= 1e-10 {
                return Err(Error::invalid("cols", "columns are not linearly independent"));
            }
            accepted.push(v / norm);
        }
        // Complete with coordinate axes.
        for j in 0..n {
            if accepted.len() == n {
                break;
            }
            let mut v = DVector::zeros(n);
            v[j] = 1.0;
            for _ in 0..2 {
                for a in &accepted {
                    let proj = a.dot(&v);
                    v -= a * proj;
                }
            }
            let norm = v.norm();
            if norm > 1e-8 {
                accepted.push(v / norm);
            }
        }
        if accepted.len() != n {
            return Err(Error::Internal("orthonormal completion failed".into()));
        }
        let basis = DMatrix::from_columns(&accepted[..k]);
        let complement = if k == n {
            DMatrix::zeros(n, 0)
        } else {
            DMatrix::from_columns(&accepted[k..])
        };
        Frame::new(basis, complement)
    }

    pub fn ambient_dim(&self) -> usize {
        self.n
    }

    pub fn subspace_dim(&self) -> usize {
        self.k
    }

    pub fn basis(&self) -> &DMatrix<f64> {
        &self.basis
    }

    pub fn complement_basis(&self) -> &DMatrix<f64> {
        &self.complement
    }

    /// The orthogonal complement as a frame in its own right.
    pub fn orthocomplement(&self) -> Frame {
        Frame {
            n: self.n,
            k: self.n - self.k,
            basis: self.complement.clone(),
            complement: self.basis.clone(),
        }
    }

    /// Embed subspace coordinates into the ambient space.
    pub fn embed(&self, y: &DVector<f64>) -> Result<DVector<f64>> {
        if y.len() != self.k {
            return Err(Error::DimensionMismatch {
                expected: self.k,
                got: y.len(),
            });
        }
        Ok(&self.basis * y)
    }

    /// Subspace coordinates of an ambient point (orthogonal projection).
    pub fn coords(&self, x: &DVector<f64>) -> Result<DVector<f64>> {
        if x.len() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                got: x.len(),
            });
        }
        Ok(self.basis.transpose() * x)
    }

    /// `basis . basisᵀ`, the orthogonal projector onto the subspace.
    pub fn projector(&self) -> DMatrix<f64> {
        &self.basis * self.basis.transpose()
    }

    pub fn orthonormality_defect(&self) -> f64 {
        orthonormality_defect(&self.basis, &self.complement)
    }
}

fn orthonormality_defect(basis: &DMatrix<f64>, complement: &DMatrix<f64>) -> f64 {
    let k = basis.ncols();
    let kc = complement.ncols();
    let mut defect: f64 = 0.0;
    if k > 0 {
        defect = defect.max((basis.transpose() * basis - DMatrix::identity(k, k)).amax());
    }
    if kc > 0 {
        defect =
            defect.max((complement.transpose() * complement - DMatrix::identity(kc, kc)).amax());
    }
    if k > 0 && kc > 0 {
        defect = defect.max((basis.transpose() * complement).amax());
    }
    defect
}

/// Haar-distributed frame on the Grassmannian: QR of a standard Gaussian
/// matrix with the diagonal of R forced positive, first k columns spanning
/// the subspace.
pub fn sample_haar(n: usize, k: usize, stream: &SeededStream) -> Result<Frame> {
    if k > n {
        return Err(Error::invalid("k", format!("k = {k} exceeds n = {n}")));
    }
    let q = match haar_orthogonal(n, stream) {
        Some(q) => q,
        // A rank-deficient Gaussian draw has probability zero; retry once on
        // a derived stream, then give up.
        None => haar_orthogonal(n, &stream.derive("redraw"))
            .ok_or_else(|| Error::SolverFailure("degenerate Gaussian draw for QR".into()))?,
    };
    let basis = q.columns(0, k).clone_owned();
    let complement = q.columns(k, n - k).clone_owned();
    Frame::new(basis, complement)
}

fn haar_orthogonal(n: usize, stream: &SeededStream) -> Option<DMatrix<f64>> {
    let mut rng = stream.rng();
    let g = DMatrix::from_fn(n, n, |_, _| rng.sample::<f64, _>(StandardNormal));
    let qr = g.qr();
    let r = qr.r();
    let mut q = qr.q();
    for j in 0..n {
        if r[(j, j)].abs() < 1e-12 {
            return None;
        }
        if r[(j, j)] < 0.0 {
            for i in 0..n {
                q[(i, j)] = -q[(i, j)];
            }
        }
    }
    Some(q)
}

/// Uniform point on the unit sphere S^{n-1}.
pub fn sample_sphere(n: usize, stream: &SeededStream) -> DVector<f64> {
    let mut rng = stream.rng();
    loop {
        let g = DVector::from_fn(n, |_, _| rng.sample::<f64, _>(StandardNormal));
        let norm = g.norm();
        if norm > 1e-150 {
            return g / norm;
        }
    }
}
