//! Small dense linear-algebra helpers shared by the manifold code.
//!
//! Matrices are stored row-major in flat slices throughout the crate; these
//! helpers convert to and from `nalgebra` and implement the symmetric matrix
//! functions (log, exp, square root) by eigendecomposition.

use nalgebra::{DMatrix, DVector, Matrix3, SymmetricEigen, Vector3};

pub fn from_row_major(data: &[f64], m: usize) -> DMatrix<f64> {
    DMatrix::from_row_slice(m, m, data)
}

pub fn to_row_major(a: &DMatrix<f64>) -> Vec<f64> {
    let (r, c) = a.shape();
    let mut out = Vec::with_capacity(r * c);
    for i in 0..r {
        for j in 0..c {
            out.push(a[(i, j)]);
        }
    }
    out
}

pub fn symmetrize(a: &DMatrix<f64>) -> DMatrix<f64> {
    (a + a.transpose()) * 0.5
}

/// Applies a scalar function to the eigenvalues of a symmetric matrix.
pub fn sym_apply(a: &DMatrix<f64>, f: impl Fn(f64) -> f64) -> DMatrix<f64> {
    let eig = SymmetricEigen::new(symmetrize(a));
    let mapped = eig.eigenvalues.map(f);
    let v = &eig.eigenvectors;
    let scaled = v * DMatrix::from_diagonal(&mapped);
    symmetrize(&(scaled * v.transpose()))
}

pub fn sym_eigenvalues(a: &DMatrix<f64>) -> DVector<f64> {
    SymmetricEigen::new(symmetrize(a)).eigenvalues
}

pub fn min_eigenvalue(a: &DMatrix<f64>) -> f64 {
    sym_eigenvalues(a).min()
}

/// Square root and inverse square root of an SPD matrix from a single
/// eigendecomposition.
pub fn sqrt_and_inv_sqrt(a: &DMatrix<f64>) -> (DMatrix<f64>, DMatrix<f64>) {
    let eig = SymmetricEigen::new(symmetrize(a));
    let v = &eig.eigenvectors;
    let s = eig.eigenvalues.map(f64::sqrt);
    let sqrt = v * DMatrix::from_diagonal(&s) * v.transpose();
    let inv = v * DMatrix::from_diagonal(&s.map(|x| 1.0 / x)) * v.transpose();
    (symmetrize(&sqrt), symmetrize(&inv))
}

/// Number of Mandel coordinates of an `m x m` symmetric matrix.
pub fn mandel_len(m: usize) -> usize {
    m * (m + 1) / 2
}

/// Mandel vectorisation: the diagonal first, then the strict upper triangle
/// in row-major order scaled by sqrt(2). The Euclidean dot product of two
/// such vectors equals the Frobenius inner product of the matrices.
pub fn to_mandel(a: &DMatrix<f64>) -> Vec<f64> {
    let m = a.nrows();
    let mut out = Vec::with_capacity(mandel_len(m));
    for i in 0..m {
        out.push(a[(i, i)]);
    }
    for i in 0..m {
        for j in (i + 1)..m {
            out.push(std::f64::consts::SQRT_2 * 0.5 * (a[(i, j)] + a[(j, i)]));
        }
    }
    out
}

pub fn from_mandel(v: &[f64], m: usize) -> DMatrix<f64> {
    debug_assert_eq!(v.len(), mandel_len(m));
    let mut a = DMatrix::zeros(m, m);
    for i in 0..m {
        a[(i, i)] = v[i];
    }
    let mut k = m;
    for i in 0..m {
        for j in (i + 1)..m {
            let x = v[k] * std::f64::consts::FRAC_1_SQRT_2;
            a[(i, j)] = x;
            a[(j, i)] = x;
            k += 1;
        }
    }
    a
}

pub fn hat3(w: &Vector3<f64>) -> Matrix3<f64> {
    Matrix3::new(0.0, -w.z, w.y, w.z, 0.0, -w.x, -w.y, w.x, 0.0)
}

pub fn vee3(s: &Matrix3<f64>) -> Vector3<f64> {
    Vector3::new(s[(2, 1)], s[(0, 2)], s[(1, 0)])
}

/// Number of coordinates of an `m x m` skew-symmetric matrix.
pub fn skew_len(m: usize) -> usize {
    m * (m - 1) / 2
}

/// Coordinates of a skew-symmetric matrix. For `m = 3` this is the usual
/// axis-angle vector `[s21, s02, s10]`; otherwise the entries `s[j][i]` for
/// `i < j` in row-major pair order. In both cases the Euclidean norm of the
/// coordinates is `‖S‖_F / sqrt(2)`.
pub fn skew_to_coords(s: &DMatrix<f64>) -> Vec<f64> {
    let m = s.nrows();
    if m == 3 {
        return vec![
            0.5 * (s[(2, 1)] - s[(1, 2)]),
            0.5 * (s[(0, 2)] - s[(2, 0)]),
            0.5 * (s[(1, 0)] - s[(0, 1)]),
        ];
    }
    let mut out = Vec::with_capacity(skew_len(m));
    for i in 0..m {
        for j in (i + 1)..m {
            out.push(0.5 * (s[(j, i)] - s[(i, j)]));
        }
    }
    out
}

pub fn coords_to_skew(c: &[f64], m: usize) -> DMatrix<f64> {
    if m == 3 {
        let h = hat3(&Vector3::new(c[0], c[1], c[2]));
        return DMatrix::from_iterator(3, 3, h.iter().copied());
    }
    let mut s = DMatrix::zeros(m, m);
    let mut k = 0;
    for i in 0..m {
        for j in (i + 1)..m {
            s[(j, i)] = c[k];
            s[(i, j)] = -c[k];
            k += 1;
        }
    }
    s
}

pub fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn max_abs(a: &DMatrix<f64>) -> f64 {
    a.iter().fold(0.0, |m, x| m.max(x.abs()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mandel_preserves_frobenius_product() {
        let a = DMatrix::from_row_slice(3, 3, &[2.0, 0.5, -1.0, 0.5, 3.0, 0.25, -1.0, 0.25, 1.0]);
        let b = DMatrix::from_row_slice(3, 3, &[1.0, -2.0, 0.3, -2.0, 0.5, 0.7, 0.3, 0.7, -4.0]);
        let frob: f64 = a.component_mul(&b).sum();
        assert!((dot(&to_mandel(&a), &to_mandel(&b)) - frob).abs() < 1e-12);
        assert!((from_mandel(&to_mandel(&a), 3) - &a).amax() < 1e-15);
    }

    #[test]
    fn skew_coords_norm() {
        for m in 2..6 {
            let c: Vec<f64> = (0..skew_len(m)).map(|k| (k as f64 * 0.7).sin()).collect();
            let s = coords_to_skew(&c, m);
            assert!((s.norm() / 2f64.sqrt() - norm(&c)).abs() < 1e-14);
            assert_eq!(skew_to_coords(&s), c);
        }
    }

    #[test]
    fn sqrt_pair_is_consistent() {
        let a = DMatrix::from_row_slice(2, 2, &[4.0, 1.0, 1.0, 3.0]);
        let (s, si) = sqrt_and_inv_sqrt(&a);
        assert!((&s * &s - &a).norm() < 1e-12);
        assert!((&s * &si - DMatrix::identity(2, 2)).norm() < 1e-12);
    }
}
