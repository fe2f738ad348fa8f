//! Dense linear-algebra helpers shared across the crate.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type RMat = DMatrix<f64>;
pub type RVec = DVector<f64>;
pub type CMat = DMatrix<C64>;
pub type CVec = DVector<C64>;

pub const I: C64 = C64::new(0.0, 1.0);

/// Canonical symplectic form `[[0, I], [-I, 0]]` for `n` degrees of freedom.
pub fn symplectic_form(n: usize) -> RMat {
    let mut j = RMat::zeros(2 * n, 2 * n);
    for k in 0..n {
        j[(k, n + k)] = 1.0;
        j[(n + k, k)] = -1.0;
    }
    j
}

pub fn to_complex(m: &RMat) -> CMat {
    m.map(|v| C64::new(v, 0.0))
}

pub fn to_complex_vec(v: &RVec) -> CVec {
    v.map(|x| C64::new(x, 0.0))
}

pub fn re(m: &CMat) -> RMat {
    m.map(|v| v.re)
}

pub fn im(m: &CMat) -> RMat {
    m.map(|v| v.im)
}

pub fn re_vec(v: &CVec) -> RVec {
    v.map(|x| x.re)
}

pub fn im_vec(v: &CVec) -> RVec {
    v.map(|x| x.im)
}

pub fn max_abs(m: &RMat) -> f64 {
    m.iter().fold(0.0, |a, v| a.max(v.abs()))
}

pub fn max_abs_c(m: &CMat) -> f64 {
    m.iter().fold(0.0, |a, v| a.max(v.norm()))
}

pub fn symmetrize(m: &RMat) -> RMat {
    (m + m.transpose()) * 0.5
}

pub fn symmetrize_c(m: &CMat) -> CMat {
    (m + m.transpose()) * C64::new(0.5, 0.0)
}

/// Plain transpose bilinear product `aᵀ b` without conjugation.
pub fn dot_t(a: &CVec, b: &CVec) -> C64 {
    a.iter().zip(b.iter()).map(|(x, y)| x * y).sum()
}

/// `vᵀ M v` without conjugation.
pub fn quad_form(m: &CMat, v: &CVec) -> C64 {
    dot_t(v, &(m * v))
}

pub fn quad_form_r(m: &RMat, v: &RVec) -> f64 {
    v.dot(&(m * v))
}

/// Eigenvalues of a general complex matrix.
pub fn eigenvalues_c(m: &CMat) -> Vec<C64> {
    let t = m.clone().schur().unpack().1;
    (0..t.nrows()).map(|k| t[(k, k)]).collect()
}

/// `ln √det M` on the branch continuous from real positive-definite matrices.
///
/// Requires every eigenvalue to lie in the open right half-plane, which holds
/// whenever the Hermitian part of `m` is positive definite.
pub fn log_sqrt_det(m: &CMat) -> Result<C64> {
    if m.nrows() == 0 {
        return Ok(C64::new(0.0, 0.0));
    }
    let scale = max_abs_c(m).max(f64::MIN_POSITIVE);
    let mut acc = C64::new(0.0, 0.0);
    for lam in eigenvalues_c(m) {
        if lam.re <= 1e-14 * scale {
            return Err(Error::NotPositiveDefinite);
        }
        acc += 0.5 * lam.ln();
    }
    Ok(acc)
}

pub fn sqrt_det(m: &CMat) -> Result<C64> {
    log_sqrt_det(m).map(|l| l.exp())
}

pub fn inverse_c(m: &CMat) -> Result<CMat> {
    m.clone()
        .lu()
        .try_inverse()
        .ok_or(Error::Singular("complex matrix inverse"))
}

pub fn inverse_r(m: &RMat) -> Result<RMat> {
    m.clone()
        .lu()
        .try_inverse()
        .ok_or(Error::Singular("real matrix inverse"))
}

pub fn solve_c(m: &CMat, b: &CVec) -> Result<CVec> {
    m.clone()
        .lu()
        .solve(b)
        .ok_or(Error::Singular("complex linear solve"))
}

/// Smallest eigenvalue of a real symmetric matrix.
pub fn min_eigenvalue_sym(m: &RMat) -> f64 {
    symmetrize(m)
        .symmetric_eigen()
        .eigenvalues
        .iter()
        .cloned()
        .fold(f64::INFINITY, f64::min)
}

/// Symmetric eigen-decomposition with eigenvalues sorted in descending order.
pub fn sorted_eigen(m: &RMat) -> (RVec, RMat) {
    let eig = symmetrize(m).symmetric_eigen();
    let n = m.nrows();
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let vals = RVec::from_iterator(n, idx.iter().map(|&k| eig.eigenvalues[k]));
    let mut vecs = RMat::zeros(n, n);
    for (c, &k) in idx.iter().enumerate() {
        vecs.set_column(c, &eig.eigenvectors.column(k));
    }
    (vals, vecs)
}

/// Principal square root of a real symmetric positive-definite matrix.
pub fn sqrtm_spd(m: &RMat) -> Result<RMat> {
    let eig = symmetrize(m).symmetric_eigen();
    if eig.eigenvalues.iter().any(|&v| v <= 0.0) {
        return Err(Error::NotPositiveDefinite);
    }
    let d = RMat::from_diagonal(&eig.eigenvalues.map(f64::sqrt));
    Ok(&eig.eigenvectors * d * eig.eigenvectors.transpose())
}

/// Matrix exponential (Padé approximant with scaling and squaring).
pub fn expm(m: &RMat) -> RMat {
    m.exp()
}

/// Blocks of a `2n × 2n` matrix ordered as `(qq, qp, pq, pp)`.
pub fn blocks<T: nalgebra::ComplexField>(
    m: &DMatrix<T>,
) -> (DMatrix<T>, DMatrix<T>, DMatrix<T>, DMatrix<T>) {
    let n = m.nrows() / 2;
    (
        m.view((0, 0), (n, n)).into_owned(),
        m.view((0, n), (n, n)).into_owned(),
        m.view((n, 0), (n, n)).into_owned(),
        m.view((n, n), (n, n)).into_owned(),
    )
}

pub fn from_blocks<T: nalgebra::ComplexField>(
    a: &DMatrix<T>,
    b: &DMatrix<T>,
    c: &DMatrix<T>,
    d: &DMatrix<T>,
) -> DMatrix<T> {
    let n = a.nrows();
    let mut m = DMatrix::<T>::zeros(2 * n, 2 * n);
    m.view_mut((0, 0), (n, n)).copy_from(a);
    m.view_mut((0, n), (n, n)).copy_from(b);
    m.view_mut((n, 0), (n, n)).copy_from(c);
    m.view_mut((n, n), (n, n)).copy_from(d);
    m
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sqrt_det_of_real_spd_is_positive_root() {
        let m = to_complex(&RMat::from_row_slice(2, 2, &[2.0, 0.5, 0.5, 1.0]));
        let s = sqrt_det(&m).unwrap();
        assert!((s.re - 1.75f64.sqrt()).abs() < 1e-13);
        assert!(s.im.abs() < 1e-13);
    }

    #[test]
    fn sqrt_det_follows_continuous_branch() {
        // det = (1 + i 3)^2 has argument beyond π; the principal root of det would flip sign.
        let z = C64::new(1.0, 3.0);
        let m = CMat::from_diagonal(&CVec::from_vec(vec![z, z]));
        let s = sqrt_det(&m).unwrap();
        assert!((s - z).norm() < 1e-12);
    }

    #[test]
    fn sqrt_det_rejects_left_half_plane() {
        let m = CMat::from_diagonal(&CVec::from_vec(vec![C64::new(-1.0, 0.2)]));
        assert!(sqrt_det(&m).is_err());
    }
}
