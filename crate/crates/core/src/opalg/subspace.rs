use nalgebra::DVector;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::operator::CMatrix;

/// Orthonormal basis of a subspace of `C^n`, stored as columns.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SubspaceBasis {
    ambient: usize,
    /// Basis vectors (each of length `ambient`).
    vectors: Vec<Vec<Complex64>>,
    pub tol: f64,
}

impl SubspaceBasis {
    pub fn from_columns(m: &CMatrix, tol: f64) -> Self {
        let vectors = (0..m.ncols()).map(|c| m.column(c).iter().copied().collect()).collect();
        SubspaceBasis {
            ambient: m.nrows(),
            vectors,
            tol,
        }
    }

    pub fn trivial(ambient: usize, tol: f64) -> Self {
        SubspaceBasis {
            ambient,
            vectors: Vec::new(),
            tol,
        }
    }

    pub fn whole(ambient: usize, tol: f64) -> Self {
        Self::from_columns(&CMatrix::identity(ambient, ambient), tol)
    }

    pub fn dim(&self) -> usize {
        self.vectors.len()
    }

    pub fn ambient(&self) -> usize {
        self.ambient
    }

    pub fn is_trivial(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn vectors(&self) -> &[Vec<Complex64>] {
        &self.vectors
    }

    pub fn matrix(&self) -> CMatrix {
        let mut m = CMatrix::zeros(self.ambient, self.dim());
        for (c, v) in self.vectors.iter().enumerate() {
            for (r, z) in v.iter().enumerate() {
                m[(r, c)] = *z;
            }
        }
        m
    }

    /// Orthogonal projector onto the subspace.
    pub fn projector(&self) -> CMatrix {
        let q = self.matrix();
        &q * q.adjoint()
    }

    /// Largest deviation of `Q*Q` from the identity.
    pub fn orthonormality_error(&self) -> f64 {
        let q = self.matrix();
        let g = q.adjoint() * &q - CMatrix::identity(self.dim(), self.dim());
        g.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Distance from `v` to the subspace.
    pub fn distance(&self, v: &[Complex64]) -> f64 {
        let x = CMatrix::from_column_slice(v.len(), 1, v);
        let r = &x - self.projector() * &x;
        r.norm()
    }
}

/// Singular values and right singular vectors with a full `V` even for
/// wide matrices (rows are zero-padded).
fn full_svd(m: &CMatrix) -> (Vec<f64>, CMatrix) {
    let (r, c) = m.shape();
    let padded = if r < c {
        let mut p = CMatrix::zeros(c, c);
        p.view_mut((0, 0), (r, c)).copy_from(m);
        p
    } else {
        m.clone()
    };
    let svd = padded.svd(false, true);
    let vt = svd.v_t.expect("requested V^T");
    (svd.singular_values.iter().copied().collect(), vt)
}

/// Nullspace of `m` with rank decided by `σ <= rel_tol · σ_max`.
pub fn nullspace(m: &CMatrix, rel_tol: f64) -> SubspaceBasis {
    let c = m.ncols();
    let (s, vt) = full_svd(m);
    let smax = s.iter().copied().fold(0.0, f64::max);
    let thresh = rel_tol * smax;
    let mut cols = Vec::new();
    for (i, &sv) in s.iter().enumerate() {
        if smax == 0.0 || sv <= thresh {
            cols.push(vt.row(i).adjoint());
        }
    }
    basis_from(cols, c, rel_tol)
}

/// Nullspace with an absolute singular-value threshold.
pub fn nullspace_abs(m: &CMatrix, tol: f64) -> SubspaceBasis {
    let c = m.ncols();
    let (s, vt) = full_svd(m);
    let cols: Vec<_> = s
        .iter()
        .enumerate()
        .filter(|(_, &sv)| sv <= tol)
        .map(|(i, _)| vt.row(i).adjoint())
        .collect();
    basis_from(cols, c, tol)
}

fn basis_from(cols: Vec<DVector<Complex64>>, ambient: usize, tol: f64) -> SubspaceBasis {
    let mut m = CMatrix::zeros(ambient, cols.len());
    for (j, col) in cols.iter().enumerate() {
        m.set_column(j, col);
    }
    SubspaceBasis::from_columns(&m, tol)
}

/// Column space of `m`.
pub fn column_space(m: &CMatrix, rel_tol: f64) -> SubspaceBasis {
    let svd = m.clone().svd(true, false);
    let u = svd.u.expect("requested U");
    let s = &svd.singular_values;
    let smax = s.iter().copied().fold(0.0, f64::max);
    let keep: Vec<usize> = (0..s.len()).filter(|&i| smax > 0.0 && s[i] > rel_tol * smax).collect();
    let mut q = CMatrix::zeros(m.nrows(), keep.len());
    for (j, &i) in keep.iter().enumerate() {
        q.set_column(j, &u.column(i));
    }
    SubspaceBasis::from_columns(&q, rel_tol)
}

/// Intersection of two subspaces: `x = A y` with `(I − P_B) A y = 0`.
pub fn intersect(a: &SubspaceBasis, b: &SubspaceBasis, tol: f64) -> SubspaceBasis {
    if a.is_trivial() || b.is_trivial() {
        return SubspaceBasis::trivial(a.ambient(), tol);
    }
    let qa = a.matrix();
    let n = a.ambient();
    let resid = (CMatrix::identity(n, n) - b.projector()) * &qa;
    let ys = nullspace_abs(&resid, tol);
    if ys.is_trivial() {
        return SubspaceBasis::trivial(n, tol);
    }
    let x = &qa * ys.matrix();
    // re-orthonormalize
    column_space(&x, 1e-12)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(v: &[f64], r: usize, cols: usize) -> CMatrix {
        CMatrix::from_row_slice(r, cols, &v.iter().map(|x| Complex64::new(*x, 0.0)).collect::<Vec<_>>())
    }

    #[test]
    fn nullspace_of_wide_matrix() {
        let m = c(&[1.0, 0.0], 1, 2);
        let n = nullspace(&m, 1e-10);
        assert_eq!(n.dim(), 1);
        assert!(n.vectors()[0][0].norm() < 1e-14);
        assert!((n.vectors()[0][1].norm() - 1.0).abs() < 1e-14);
        assert!(n.orthonormality_error() < 1e-12);
    }

    #[test]
    fn zero_matrix_has_full_nullspace() {
        let n = nullspace(&CMatrix::zeros(2, 3), 1e-10);
        assert_eq!(n.dim(), 3);
    }

    #[test]
    fn lines_meet_in_zero() {
        let a = column_space(&c(&[1.0, 0.0], 2, 1), 1e-10);
        let b = column_space(&c(&[1.0, 1.0], 2, 1), 1e-10);
        assert!(intersect(&a, &b, 1e-10).is_trivial());
        assert_eq!(intersect(&a, &a, 1e-10).dim(), 1);
    }

    #[test]
    fn planes_meet_in_line() {
        let a = column_space(&c(&[1.0, 0.0, 0.0, 1.0, 0.0, 0.0], 3, 2), 1e-10);
        let b = column_space(&c(&[0.0, 0.0, 1.0, 1.0, 0.0, 0.0], 3, 2), 1e-10);
        let i = intersect(&a, &b, 1e-10);
        assert_eq!(i.dim(), 1);
        assert!(
            i.distance(&[
                Complex64::new(0.0, 0.0),
                Complex64::new(1.0, 0.0),
                Complex64::new(0.0, 0.0)
            ]) < 1e-12
        );
    }
}
