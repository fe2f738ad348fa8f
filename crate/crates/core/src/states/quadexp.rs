//! Exponentials of complex quadratic polynomials, `exp(−yᵀQy + lᵀy + c)`.
//!
//! Closed under products, affine substitution, conjugation and Gaussian
//! marginalization, which is enough to compute Wigner functions, cross-Wigner
//! functions and overlaps of Gaussian wavefunctions exactly.

use crate::error::{Error, Result};
use crate::linalg::{
    dot_t, inverse_c, log_sqrt_det, max_abs, quad_form, re, solve_c, symmetrize_c, CMat, CVec, C64,
};

#[derive(Debug, Clone, PartialEq)]
pub struct QuadExp {
    pub quad: CMat,
    pub lin: CVec,
    pub constant: C64,
}

impl QuadExp {
    pub fn new(quad: CMat, lin: CVec, constant: C64) -> Self {
        Self {
            quad: symmetrize_c(&quad),
            lin,
            constant,
        }
    }

    /// The constant function `exp(c)` on `ℝ^dim`.
    pub fn constant(dim: usize, c: C64) -> Self {
        Self {
            quad: CMat::zeros(dim, dim),
            lin: CVec::zeros(dim),
            constant: c,
        }
    }

    pub fn dim(&self) -> usize {
        self.lin.len()
    }

    pub fn log_eval(&self, y: &CVec) -> C64 {
        -quad_form(&self.quad, y) + dot_t(&self.lin, y) + self.constant
    }

    pub fn eval(&self, y: &[f64]) -> C64 {
        let v = CVec::from_iterator(y.len(), y.iter().map(|&t| C64::new(t, 0.0)));
        self.log_eval(&v).exp()
    }

    pub fn conj(&self) -> Self {
        Self {
            quad: self.quad.map(|v| v.conj()),
            lin: self.lin.map(|v| v.conj()),
            constant: self.constant.conj(),
        }
    }

    pub fn mul(&self, other: &QuadExp) -> Result<Self> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: other.dim(),
            });
        }
        Ok(Self {
            quad: &self.quad + &other.quad,
            lin: &self.lin + &other.lin,
            constant: self.constant + other.constant,
        })
    }

    /// Substitution `y_old = L y_new + d`, giving a function of `y_new`.
    pub fn pullback(&self, l: &CMat, d: &CVec) -> Result<Self> {
        if l.nrows() != self.dim() || d.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: l.nrows(),
            });
        }
        let lt = l.transpose();
        let qd = &self.quad * d;
        Ok(Self::new(
            &lt * &self.quad * l,
            &lt * (&self.lin - qd * C64::new(2.0, 0.0)),
            self.constant - quad_form(&self.quad, d) + dot_t(&self.lin, d),
        ))
    }

    /// Adds the quadratic, linear and constant pieces of another exponent.
    pub fn add_exponent(&mut self, quad: &CMat, lin: &CVec, constant: C64) {
        self.quad += quad;
        self.quad = symmetrize_c(&self.quad);
        self.lin += lin;
        self.constant += constant;
    }

    /// Integrates out the trailing `k` variables.
    pub fn marginalize_tail(&self, k: usize) -> Result<Self> {
        let dim = self.dim();
        if k > dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: k,
            });
        }
        if k == 0 {
            return Ok(self.clone());
        }
        let m = dim - k;
        let q11 = self.quad.view((0, 0), (m, m)).into_owned();
        let q12 = self.quad.view((0, m), (m, k)).into_owned();
        let q22 = self.quad.view((m, m), (k, k)).into_owned();
        let l1 = self.lin.rows(0, m).into_owned();
        let l2 = self.lin.rows(m, k).into_owned();
        check_re_positive(&q22)?;
        let inv22 = inverse_c(&q22)?;
        let x = &q12 * &inv22;
        let quad = q11 - &x * q12.transpose();
        let lin = l1 - &x * &l2;
        let constant = self.constant
            + 0.25 * quad_form(&inv22, &l2)
            + 0.5 * k as f64 * std::f64::consts::PI.ln()
            - log_sqrt_det(&q22)?;
        Ok(Self::new(quad, lin, constant))
    }

    /// `ln ∫ exp(−yᵀQy + lᵀy + c) dy` over all of `ℝ^dim`.
    pub fn log_integral(&self) -> Result<C64> {
        Ok(self.marginalize_tail(self.dim())?.constant)
    }

    pub fn integral(&self) -> Result<C64> {
        self.log_integral().map(|v| v.exp())
    }

    /// Stationary point `w = Q⁻¹ l / 2`.
    pub fn center(&self) -> Result<CVec> {
        Ok(solve_c(&self.quad, &self.lin)? * C64::new(0.5, 0.0))
    }
}

pub(crate) fn check_re_positive(q: &CMat) -> Result<()> {
    let r = re(q);
    let scale = max_abs(&r).max(f64::MIN_POSITIVE);
    let min = crate::linalg::min_eigenvalue_sym(&r);
    if !(min > 1e-14 * scale) {
        return Err(Error::NotPositiveDefinite);
    }
    Ok(())
}
