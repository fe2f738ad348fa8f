//! Phase-space linear algebra.
//!
//! Coordinates are ordered `x = (q₁..qₙ, p₁..pₙ)` and the symplectic form is
//! `J = [[0, I], [-I, 0]]`. The wedge product is `a ∧ b = (J a)·b`.

use std::ops::{Add, Mul, Neg, Sub};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{expm, max_abs, sorted_eigen, symplectic_form, RMat, RVec};

/// Real phase-space vector of even length `2n`.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseVector {
    entries: RVec,
}

impl PhaseVector {
    pub fn new(entries: Vec<f64>) -> Result<Self> {
        Self::from_vector(RVec::from_vec(entries))
    }

    pub fn from_vector(entries: RVec) -> Result<Self> {
        if entries.is_empty() || !entries.len().is_multiple_of(2) {
            return Err(Error::OddDimension(entries.len()));
        }
        if entries.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(Self { entries })
    }

    pub fn from_qp(q: &[f64], p: &[f64]) -> Result<Self> {
        if q.len() != p.len() {
            return Err(Error::DimensionMismatch {
                expected: q.len(),
                found: p.len(),
            });
        }
        Self::new(q.iter().chain(p.iter()).cloned().collect())
    }

    pub fn zeros(n: usize) -> Self {
        Self {
            entries: RVec::zeros(2 * n),
        }
    }

    pub fn n(&self) -> usize {
        self.entries.len() / 2
    }

    pub fn dim(&self) -> usize {
        self.entries.len()
    }

    pub fn q(&self) -> &[f64] {
        &self.entries.as_slice()[..self.n()]
    }

    pub fn p(&self) -> &[f64] {
        &self.entries.as_slice()[self.n()..]
    }

    pub fn as_slice(&self) -> &[f64] {
        self.entries.as_slice()
    }

    pub fn as_vector(&self) -> &RVec {
        &self.entries
    }

    pub fn into_vector(self) -> RVec {
        self.entries
    }

    pub fn norm(&self) -> f64 {
        self.entries.norm()
    }

    pub fn scale(&self, s: f64) -> Self {
        Self {
            entries: &self.entries * s,
        }
    }

    pub(crate) fn check_same(&self, other: &PhaseVector) -> Result<()> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: other.dim(),
            });
        }
        Ok(())
    }
}

impl Add for &PhaseVector {
    type Output = PhaseVector;
    fn add(self, rhs: &PhaseVector) -> PhaseVector {
        PhaseVector {
            entries: &self.entries + &rhs.entries,
        }
    }
}

impl Sub for &PhaseVector {
    type Output = PhaseVector;
    fn sub(self, rhs: &PhaseVector) -> PhaseVector {
        PhaseVector {
            entries: &self.entries - &rhs.entries,
        }
    }
}

impl Neg for &PhaseVector {
    type Output = PhaseVector;
    fn neg(self) -> PhaseVector {
        PhaseVector {
            entries: -&self.entries,
        }
    }
}

/// The canonical symplectic form for `n` degrees of freedom.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SymplecticForm {
    n: usize,
}

impl SymplecticForm {
    pub fn new(n: usize) -> Self {
        Self { n }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn matrix(&self) -> RMat {
        symplectic_form(self.n)
    }

    pub fn apply(&self, x: &PhaseVector) -> Result<PhaseVector> {
        if x.n() != self.n {
            return Err(Error::DimensionMismatch {
                expected: 2 * self.n,
                found: x.dim(),
            });
        }
        let n = self.n;
        let mut out = RVec::zeros(2 * n);
        for k in 0..n {
            out[k] = x.entries[n + k];
            out[n + k] = -x.entries[k];
        }
        Ok(PhaseVector { entries: out })
    }
}

/// `a ∧ b = a_p·b_q − a_q·b_p`.
pub fn wedge(a: &PhaseVector, b: &PhaseVector) -> Result<f64> {
    a.check_same(b)?;
    Ok(wedge_raw(a.as_vector(), b.as_vector()))
}

pub(crate) fn wedge_raw(a: &RVec, b: &RVec) -> f64 {
    let n = a.len() / 2;
    (0..n).map(|k| a[n + k] * b[k] - a[k] * b[n + k]).sum()
}

/// Max-norm deviation `‖M J Mᵀ − J‖`.
pub fn symplectic_deviation(m: &RMat) -> Result<f64> {
    if m.nrows() != m.ncols() {
        return Err(Error::DimensionMismatch {
            expected: m.nrows(),
            found: m.ncols(),
        });
    }
    if !m.nrows().is_multiple_of(2) || m.nrows() == 0 {
        return Err(Error::OddDimension(m.nrows()));
    }
    let j = symplectic_form(m.nrows() / 2);
    Ok(max_abs(&(m * &j * m.transpose() - &j)))
}

pub fn is_symplectic(m: &RMat, tol: f64) -> Result<bool> {
    Ok(symplectic_deviation(m)? <= tol)
}

/// Real symplectic matrix, validated on construction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<f64>>", into = "Vec<Vec<f64>>")]
pub struct SymplecticMatrix {
    m: RMat,
}

impl SymplecticMatrix {
    pub const DEFAULT_TOL: f64 = 1e-10;

    /// Validates `S J Sᵀ = J` to `1e-10` relative to `max(1, ‖S‖²)`.
    pub fn new(m: RMat) -> Result<Self> {
        Self::with_tolerance(m, Self::DEFAULT_TOL)
    }

    pub fn with_tolerance(m: RMat, tol: f64) -> Result<Self> {
        if m.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite);
        }
        let dev = symplectic_deviation(&m)?;
        let scale = max_abs(&m).powi(2).max(1.0);
        if dev > tol * scale {
            return Err(Error::NotSymplectic(dev));
        }
        Ok(Self { m })
    }

    pub fn from_row_slice(dim: usize, data: &[f64]) -> Result<Self> {
        if data.len() != dim * dim {
            return Err(Error::DimensionMismatch {
                expected: dim * dim,
                found: data.len(),
            });
        }
        Self::new(RMat::from_row_slice(dim, dim, data))
    }

    pub(crate) fn new_unchecked(m: RMat) -> Self {
        Self { m }
    }

    pub fn identity(n: usize) -> Self {
        Self {
            m: RMat::identity(2 * n, 2 * n),
        }
    }

    /// Harmonic flow `[[cos θ I, sin θ I], [−sin θ I, cos θ I]]`.
    pub fn rotation(n: usize, theta: f64) -> Self {
        let (s, c) = theta.sin_cos();
        let mut m = RMat::zeros(2 * n, 2 * n);
        for k in 0..n {
            m[(k, k)] = c;
            m[(n + k, n + k)] = c;
            m[(k, n + k)] = s;
            m[(n + k, k)] = -s;
        }
        Self { m }
    }

    /// `diag(s₁..sₙ, 1/s₁..1/sₙ)`.
    pub fn squeeze(s: &[f64]) -> Result<Self> {
        if s.iter().any(|&v| !(v > 0.0) || !v.is_finite()) {
            return Err(Error::InvalidParameter(
                "squeeze factors must be positive".into(),
            ));
        }
        let n = s.len();
        let mut m = RMat::zeros(2 * n, 2 * n);
        for (k, &v) in s.iter().enumerate() {
            m[(k, k)] = v;
            m[(n + k, n + k)] = 1.0 / v;
        }
        Ok(Self { m })
    }

    /// Flow `exp(J B t)` of the quadratic Hamiltonian `½ xᵀ B x`.
    pub fn from_hamiltonian(b: &RMat, t: f64) -> Result<Self> {
        let n = b.nrows() / 2;
        if !b.nrows().is_multiple_of(2) {
            return Err(Error::OddDimension(b.nrows()));
        }
        let asym = max_abs(&(b - b.transpose()));
        if asym > 1e-12 * max_abs(b).max(1.0) {
            return Err(Error::NotSymmetric(asym));
        }
        Self::new(expm(&(symplectic_form(n) * b * t)))
    }

    /// Random `O₁ diag(s, 1/s) O₂` with orthogonal-symplectic factors and
    /// log-squeezes uniform in `[-max_log_squeeze, max_log_squeeze]`.
    pub fn random<R: Rng + ?Sized>(n: usize, max_log_squeeze: f64, rng: &mut R) -> Self {
        let s: Vec<f64> = (0..n)
            .map(|_| (rng.gen_range(-1.0..=1.0) * max_log_squeeze).exp())
            .collect();
        let o1 = random_orthosymplectic(n, rng);
        let o2 = random_orthosymplectic(n, rng);
        let d = Self::squeeze(&s).expect("positive squeeze");
        Self::new_unchecked(o1.m * d.m * o2.m)
    }

    pub fn n(&self) -> usize {
        self.m.nrows() / 2
    }

    pub fn matrix(&self) -> &RMat {
        &self.m
    }

    pub fn into_matrix(self) -> RMat {
        self.m
    }

    /// `S⁻¹ = −J Sᵀ J`.
    pub fn inverse(&self) -> Self {
        let j = symplectic_form(self.n());
        Self {
            m: -(&j * self.m.transpose() * &j),
        }
    }

    pub fn transpose(&self) -> Self {
        Self {
            m: self.m.transpose(),
        }
    }

    pub fn compose(&self, other: &SymplecticMatrix) -> Result<Self> {
        if self.n() != other.n() {
            return Err(Error::DimensionMismatch {
                expected: self.m.nrows(),
                found: other.m.nrows(),
            });
        }
        Ok(Self {
            m: &self.m * &other.m,
        })
    }

    pub fn apply(&self, x: &PhaseVector) -> Result<PhaseVector> {
        if x.dim() != self.m.nrows() {
            return Err(Error::DimensionMismatch {
                expected: self.m.nrows(),
                found: x.dim(),
            });
        }
        Ok(PhaseVector {
            entries: &self.m * x.as_vector(),
        })
    }

    pub fn determinant(&self) -> f64 {
        self.m.determinant()
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.m
            .row_iter()
            .map(|r| r.iter().cloned().collect())
            .collect()
    }
}

impl Mul for &SymplecticMatrix {
    type Output = SymplecticMatrix;
    fn mul(self, rhs: &SymplecticMatrix) -> SymplecticMatrix {
        SymplecticMatrix {
            m: &self.m * &rhs.m,
        }
    }
}

impl TryFrom<Vec<Vec<f64>>> for SymplecticMatrix {
    type Error = Error;
    fn try_from(rows: Vec<Vec<f64>>) -> Result<Self> {
        let dim = rows.len();
        if rows.iter().any(|r| r.len() != dim) {
            return Err(Error::InvalidParameter("matrix is not square".into()));
        }
        let flat: Vec<f64> = rows.into_iter().flatten().collect();
        Self::from_row_slice(dim, &flat)
    }
}

impl From<SymplecticMatrix> for Vec<Vec<f64>> {
    fn from(s: SymplecticMatrix) -> Self {
        s.to_rows()
    }
}

fn random_orthosymplectic<R: Rng + ?Sized>(n: usize, rng: &mut R) -> SymplecticMatrix {
    // exp(J H) with H = [[P, Q], [−Q, P]], P symmetric, Q antisymmetric.
    let mut p = RMat::zeros(n, n);
    let mut q = RMat::zeros(n, n);
    for i in 0..n {
        for k in i..n {
            let a: f64 = rng.gen_range(-std::f64::consts::PI..std::f64::consts::PI);
            p[(i, k)] = a;
            p[(k, i)] = a;
            if k > i {
                let b: f64 = rng.gen_range(-std::f64::consts::PI..std::f64::consts::PI);
                q[(i, k)] = b;
                q[(k, i)] = -b;
            }
        }
    }
    let mut h = RMat::zeros(2 * n, 2 * n);
    h.view_mut((0, 0), (n, n)).copy_from(&p);
    h.view_mut((n, n), (n, n)).copy_from(&p);
    h.view_mut((0, n), (n, n)).copy_from(&q);
    h.view_mut((n, 0), (n, n)).copy_from(&(-&q));
    SymplecticMatrix::new_unchecked(expm(&(symplectic_form(n) * h)))
}

/// Symplectic Cayley transform `J (S − I)(S + I)⁻¹`.
///
/// Fails when `S` has an eigenvalue at −1; perturb by a small rotation in that case.
pub fn cayley(s: &SymplecticMatrix) -> Result<RMat> {
    let dim = s.m.nrows();
    let id = RMat::identity(dim, dim);
    let plus = &s.m + &id;
    let sv = plus.clone().singular_values();
    let smax = sv.max();
    let smin = sv.min();
    if smin <= 1e-12 * smax.max(1.0) {
        return Err(Error::SingularCayley);
    }
    let inv = plus.try_inverse().ok_or(Error::SingularCayley)?;
    let c = symplectic_form(dim / 2) * (&s.m - &id) * inv;
    Ok((&c + c.transpose()) * 0.5)
}

/// Diagonal factor of `S Sᵀ`: orthogonal-symplectic `O` and eigenvalues
/// `(λ₁..λₙ, 1/λ₁..1/λₙ)` with `λ₁ ≥ … ≥ λₙ ≥ 1`.
#[derive(Debug, Clone)]
pub struct SstDiagonalization {
    pub o: SymplecticMatrix,
    pub lambdas: Vec<f64>,
}

impl SstDiagonalization {
    pub fn lambda_matrix(&self) -> RMat {
        let n = self.lambdas.len();
        let mut d = RVec::zeros(2 * n);
        for (k, &l) in self.lambdas.iter().enumerate() {
            d[k] = l;
            d[n + k] = 1.0 / l;
        }
        RMat::from_diagonal(&d)
    }
}

pub fn diagonalize_sst(s: &SymplecticMatrix) -> Result<SstDiagonalization> {
    check_symplectic(s)?;
    let p = &s.m * s.m.transpose();
    diagonalize_symplectic_spd(&p)
}

/// Orthogonal-symplectic diagonalization of a symmetric positive-definite
/// symplectic matrix `P = O diag(λ, 1/λ) Oᵀ`.
pub(crate) fn diagonalize_symplectic_spd(p: &RMat) -> Result<SstDiagonalization> {
    let n = p.nrows() / 2;
    let j = symplectic_form(n);
    let (_, vecs) = sorted_eigen(p);
    let mut chosen: Vec<RVec> = Vec::with_capacity(n);
    for c in 0..2 * n {
        if chosen.len() == n {
            break;
        }
        let mut v: RVec = vecs.column(c).into_owned();
        for _ in 0..2 {
            for w in &chosen {
                let jw = &j * w;
                v -= w * w.dot(&v);
                v -= &jw * jw.dot(&v);
            }
        }
        let nv = v.norm();
        if nv < 1e-6 {
            continue;
        }
        v /= nv;
        let imax = v.iamax();
        if v[imax] < 0.0 {
            v = -v;
        }
        chosen.push(v);
    }
    if chosen.len() != n {
        return Err(Error::Singular("symplectic eigenbasis"));
    }
    let mut o = RMat::zeros(2 * n, 2 * n);
    for (k, v) in chosen.iter().enumerate() {
        o.set_column(k, v);
        o.set_column(n + k, &(-(&j * v)));
    }
    let d = o.transpose() * p * &o;
    let lambdas: Vec<f64> = (0..n)
        .map(|k| (d[(k, k)] / d[(n + k, n + k)]).sqrt())
        .collect();
    Ok(SstDiagonalization {
        o: SymplecticMatrix::new_unchecked(o),
        lambdas,
    })
}

/// `S = O Λ O′` with `O`, `O′` orthogonal symplectic and
/// `Λ = diag(s₁..sₙ, 1/s₁..1/sₙ)`, `s₁ ≥ … ≥ sₙ ≥ 1`.
#[derive(Debug, Clone)]
pub struct EulerDecomposition {
    pub outer: SymplecticMatrix,
    pub squeezes: Vec<f64>,
    pub inner: SymplecticMatrix,
}

impl EulerDecomposition {
    pub fn lambda(&self) -> SymplecticMatrix {
        SymplecticMatrix::squeeze(&self.squeezes).expect("squeezes are positive")
    }

    pub fn reconstruct(&self) -> RMat {
        self.outer.matrix() * self.lambda().matrix() * self.inner.matrix()
    }
}

pub fn euler_decompose(s: &SymplecticMatrix) -> Result<EulerDecomposition> {
    let diag = diagonalize_sst(s)?;
    let squeezes: Vec<f64> = diag.lambdas.iter().map(|l| l.sqrt()).collect();
    let n = squeezes.len();
    let mut inv = RVec::zeros(2 * n);
    for (k, &v) in squeezes.iter().enumerate() {
        inv[k] = 1.0 / v;
        inv[n + k] = v;
    }
    let inner = RMat::from_diagonal(&inv) * diag.o.matrix().transpose() * s.matrix();
    Ok(EulerDecomposition {
        outer: diag.o,
        squeezes,
        inner: SymplecticMatrix::new_unchecked(inner),
    })
}

fn check_symplectic(s: &SymplecticMatrix) -> Result<()> {
    let dev = symplectic_deviation(&s.m)?;
    if dev > SymplecticMatrix::DEFAULT_TOL * max_abs(&s.m).powi(2).max(1.0) {
        return Err(Error::NotSymplectic(dev));
    }
    Ok(())
}

/// Counts of positive, negative and zero eigenvalues.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Signature {
    pub n_plus: usize,
    pub n_minus: usize,
    pub n_zero: usize,
}

/// Signature with eigenvalues inside `±zero_tol` counted as zero.
///
/// `zero_tol = None` uses `1e-8 × max |eigenvalue|`.
pub fn signature(m: &RMat, zero_tol: Option<f64>) -> Result<Signature> {
    if m.nrows() != m.ncols() {
        return Err(Error::DimensionMismatch {
            expected: m.nrows(),
            found: m.ncols(),
        });
    }
    let asym = max_abs(&(m - m.transpose()));
    if asym > 1e-10 * max_abs(m).max(1.0) {
        return Err(Error::NotSymmetric(asym));
    }
    let eig = ((m + m.transpose()) * 0.5).symmetric_eigenvalues();
    let scale = eig.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let tol = zero_tol.unwrap_or(1e-8 * scale);
    let mut sig = Signature {
        n_plus: 0,
        n_minus: 0,
        n_zero: 0,
    };
    for &v in eig.iter() {
        if v > tol {
            sig.n_plus += 1;
        } else if v < -tol {
            sig.n_minus += 1;
        } else {
            sig.n_zero += 1;
        }
    }
    Ok(sig)
}
