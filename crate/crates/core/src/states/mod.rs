//! Gaussian states and sums of complex Gaussian terms.
//!
//! Every Wigner function handled by the crate is a finite sum of terms
//! `a · 𝒢(x; M, w)` where
//! `𝒢(x; M, w) = √det M / (πħ)ⁿ · exp[−(x−w)ᵀ M (x−w)/ħ]`
//! with complex symmetric `M` (`Re M ≻ 0`) and complex center `w`.

mod quadexp;
pub mod wavefunction;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use quadexp::QuadExp;
pub use wavefunction::GaussianWavefunction;

use crate::error::{Error, Result};
use crate::linalg::{
    inverse_c, log_sqrt_det, max_abs_c, quad_form, solve_c, symmetrize_c, to_complex,
    to_complex_vec, CMat, CVec, RMat, RVec, C64, I,
};
use crate::symplectic::{symplectic_deviation, wedge_raw, PhaseVector, SymplecticMatrix};

pub(crate) fn check_hbar(hbar: f64) -> Result<()> {
    if !(hbar > 0.0) || !hbar.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "hbar must be positive, got {hbar}"
        )));
    }
    Ok(())
}

pub(crate) fn same_hbar(a: f64, b: f64) -> Result<()> {
    if (a - b).abs() > 1e-14 * a.abs().max(b.abs()) {
        return Err(Error::HbarMismatch(a, b));
    }
    Ok(())
}

/// Pure Gaussian `|S, ζ⟩ = T̂_ζ M̂_S |0⟩`.
///
/// The metaplectic phase is fixed by requiring `⟨0|S, 0⟩ > 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianPure {
    s: SymplecticMatrix,
    zeta: PhaseVector,
    hbar: f64,
}

impl GaussianPure {
    pub fn new(s: SymplecticMatrix, zeta: PhaseVector, hbar: f64) -> Result<Self> {
        check_hbar(hbar)?;
        if s.n() != zeta.n() {
            return Err(Error::DimensionMismatch {
                expected: s.matrix().nrows(),
                found: zeta.dim(),
            });
        }
        Ok(Self { s, zeta, hbar })
    }

    pub fn vacuum(n: usize, hbar: f64) -> Result<Self> {
        Self::new(SymplecticMatrix::identity(n), PhaseVector::zeros(n), hbar)
    }

    pub fn coherent(center: PhaseVector, hbar: f64) -> Result<Self> {
        Self::new(SymplecticMatrix::identity(center.n()), center, hbar)
    }

    pub fn s(&self) -> &SymplecticMatrix {
        &self.s
    }

    pub fn zeta(&self) -> &PhaseVector {
        &self.zeta
    }

    pub fn hbar(&self) -> f64 {
        self.hbar
    }

    pub fn n(&self) -> usize {
        self.s.n()
    }

    /// Wigner matrix `(S Sᵀ)⁻¹`.
    pub fn wigner_matrix(&self) -> RMat {
        let inv = self.s.inverse();
        inv.matrix().transpose() * inv.matrix()
    }

    /// Covariance `⟨{Δx, Δx}⟩/2 = (ħ/2) S Sᵀ`.
    pub fn covariance(&self) -> RMat {
        self.s.matrix() * self.s.matrix().transpose() * (0.5 * self.hbar)
    }
}

/// `amplitude · 𝒢(x; M, w)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexGaussianTerm {
    log_amp: C64,
    m: CMat,
    center: CVec,
    hbar: f64,
    sqrt_det: C64,
}

impl ComplexGaussianTerm {
    pub fn new(amplitude: C64, m: CMat, center: CVec, hbar: f64) -> Result<Self> {
        Self::from_log_amplitude(amplitude.ln(), m, center, hbar)
    }

    /// Same as [`Self::new`] with the amplitude given as its logarithm, so that
    /// magnitudes far outside the `f64` range survive.
    pub fn from_log_amplitude(log_amp: C64, m: CMat, center: CVec, hbar: f64) -> Result<Self> {
        check_hbar(hbar)?;
        if m.nrows() != m.ncols() || !m.nrows().is_multiple_of(2) || m.nrows() == 0 {
            return Err(Error::OddDimension(m.nrows()));
        }
        if center.len() != m.nrows() {
            return Err(Error::DimensionMismatch {
                expected: m.nrows(),
                found: center.len(),
            });
        }
        let asym = max_abs_c(&(&m - m.transpose()));
        if asym > 1e-10 * max_abs_c(&m).max(1.0) {
            return Err(Error::NotSymmetric(asym));
        }
        let m = symmetrize_c(&m);
        quadexp::check_re_positive(&m)?;
        let sqrt_det = log_sqrt_det(&m)?.exp();
        Ok(Self {
            log_amp,
            m,
            center,
            hbar,
            sqrt_det,
        })
    }

    pub fn real(amplitude: f64, m: &RMat, center: &RVec, hbar: f64) -> Result<Self> {
        Self::new(
            C64::new(amplitude, 0.0),
            to_complex(m),
            to_complex_vec(center),
            hbar,
        )
    }

    pub fn amplitude(&self) -> C64 {
        self.log_amp.exp()
    }

    pub fn log_amplitude(&self) -> C64 {
        self.log_amp
    }

    pub fn matrix(&self) -> &CMat {
        &self.m
    }

    pub fn center(&self) -> &CVec {
        &self.center
    }

    pub fn hbar(&self) -> f64 {
        self.hbar
    }

    pub fn n(&self) -> usize {
        self.m.nrows() / 2
    }

    pub fn sqrt_det(&self) -> C64 {
        self.sqrt_det
    }

    fn log_prefactor(&self) -> C64 {
        self.log_amp + self.sqrt_det.ln()
            - self.n() as f64 * (std::f64::consts::PI * self.hbar).ln()
    }

    /// Natural logarithm of the value at `x`; the imaginary part is not wrapped.
    pub fn log_eval(&self, x: &[f64]) -> C64 {
        let d = CVec::from_iterator(
            x.len(),
            x.iter()
                .zip(self.center.iter())
                .map(|(&a, &w)| C64::new(a, 0.0) - w),
        );
        self.log_prefactor() - quad_form(&self.m, &d) / self.hbar
    }

    pub fn eval(&self, x: &[f64]) -> C64 {
        let l = self.log_eval(x);
        if l.re == f64::NEG_INFINITY {
            return C64::new(0.0, 0.0);
        }
        l.exp()
    }

    /// `max_x |term(x)|`, attained where the real part of the exponent peaks.
    pub fn peak_modulus(&self) -> Result<f64> {
        let rm = crate::linalg::re(&self.m);
        let rmw = crate::linalg::re_vec(&(&self.m * &self.center));
        let x = crate::linalg::inverse_r(&rm)? * rmw;
        Ok(self.log_eval(x.as_slice()).re.exp())
    }

    /// Analytic integral over phase space; the kernel is normalized, so this is the amplitude.
    pub fn integral(&self) -> C64 {
        self.amplitude()
    }

    pub fn conj(&self) -> Self {
        Self {
            log_amp: self.log_amp.conj(),
            m: self.m.map(|v| v.conj()),
            center: self.center.map(|v| v.conj()),
            hbar: self.hbar,
            sqrt_det: self.sqrt_det.conj(),
        }
    }

    pub fn scaled(&self, c: C64) -> Self {
        Self {
            log_amp: self.log_amp + c.ln(),
            ..self.clone()
        }
    }

    pub fn with_amplitude(&self, amplitude: C64) -> Self {
        Self {
            log_amp: amplitude.ln(),
            ..self.clone()
        }
    }

    pub fn translated(&self, xi: &RVec) -> Self {
        Self {
            center: &self.center + to_complex_vec(xi),
            ..self.clone()
        }
    }

    /// Term of the transformed state `W(S⁻¹x)`.
    pub fn transformed(&self, s: &SymplecticMatrix) -> Result<Self> {
        let inv = to_complex(s.inverse().matrix());
        let m = inv.transpose() * &self.m * &inv;
        let center = to_complex(s.matrix()) * &self.center;
        Self::from_log_amplitude(self.log_amp, m, center, self.hbar)
    }

    /// Multiplies by `exp(i k·x/ħ)`, folding the phase into the center.
    pub fn times_linear_phase(&self, k: &RVec) -> Result<Self> {
        let kc = to_complex_vec(k);
        let minv_k = solve_c(&self.m, &kc)?;
        let shift = &minv_k * (0.5 * I);
        let kw: C64 = kc.iter().zip(self.center.iter()).map(|(a, b)| a * b).sum();
        let kmk: C64 = kc.iter().zip(minv_k.iter()).map(|(a, b)| a * b).sum();
        Ok(Self {
            log_amp: self.log_amp + (I * kw - 0.25 * kmk) / self.hbar,
            center: &self.center + shift,
            ..self.clone()
        })
    }

    /// Multiplies by `exp(i x∧ζ/ħ)`.
    pub fn times_wedge_phase(&self, zeta: &RVec) -> Result<Self> {
        // x∧ζ = xᵀ Jᵀ ζ
        let n = self.n();
        let mut k = RVec::zeros(2 * n);
        for i in 0..n {
            k[i] = -zeta[n + i];
            k[n + i] = zeta[i];
        }
        self.times_linear_phase(&k)
    }

    /// `exp(−yᵀ Q y + lᵀ y + c)` representation; `None` for a zero amplitude.
    pub fn to_quadexp(&self) -> Option<QuadExp> {
        if self.log_amp.re == f64::NEG_INFINITY {
            return None;
        }
        let q = &self.m / C64::new(self.hbar, 0.0);
        let lin = &q * &self.center * C64::new(2.0, 0.0);
        let n = self.n() as f64;
        let c = self.log_amp + self.sqrt_det.ln()
            - n * (std::f64::consts::PI * self.hbar).ln()
            - quad_form(&q, &self.center);
        Some(QuadExp::new(q, lin, c))
    }

    pub fn from_quadexp(f: &QuadExp, hbar: f64) -> Result<Self> {
        let dim = f.dim();
        if !dim.is_multiple_of(2) || dim == 0 {
            return Err(Error::OddDimension(dim));
        }
        let m = &f.quad * C64::new(hbar, 0.0);
        let w = f.center()?;
        let lsd = log_sqrt_det(&m)?;
        let n = (dim / 2) as f64;
        let log_amp =
            f.constant + quad_form(&f.quad, &w) + n * (std::f64::consts::PI * hbar).ln() - lsd;
        Self::from_log_amplitude(log_amp, m, w, hbar)
    }
}

/// `∫ a(x) b(x) dx` for two terms.
pub fn product_integral(a: &ComplexGaussianTerm, b: &ComplexGaussianTerm) -> Result<C64> {
    same_hbar(a.hbar, b.hbar)?;
    match (a.to_quadexp(), b.to_quadexp()) {
        (Some(fa), Some(fb)) => fa.mul(&fb)?.integral(),
        _ => Ok(C64::new(0.0, 0.0)),
    }
}

/// Normalized kernel `𝒢(x; M, ζ)`.
pub fn gauss_eval(m: &CMat, zeta: &CVec, x: &PhaseVector, hbar: f64) -> Result<C64> {
    let t = ComplexGaussianTerm::new(C64::new(1.0, 0.0), m.clone(), zeta.clone(), hbar)?;
    if x.dim() != zeta.len() {
        return Err(Error::DimensionMismatch {
            expected: zeta.len(),
            found: x.dim(),
        });
    }
    Ok(t.eval(x.as_slice()))
}

/// Wigner function `𝒢(x; (S Sᵀ)⁻¹, ζ)` of a pure Gaussian.
pub fn wigner_pure(g: &GaussianPure) -> ComplexGaussianTerm {
    ComplexGaussianTerm::real(1.0, &g.wigner_matrix(), g.zeta.as_vector(), g.hbar)
        .expect("symplectic Wigner matrix is positive definite")
}

/// Characteristic function `2⁻ⁿ 𝒢(ξ/2; (S Sᵀ)⁻¹, 0) e^{i ζ∧ξ/ħ}`.
pub fn chi_pure(g: &GaussianPure, xi: &PhaseVector) -> Result<C64> {
    g.zeta.check_same(xi)?;
    let n = g.n();
    let centered = ComplexGaussianTerm::real(1.0, &g.wigner_matrix(), &RVec::zeros(2 * n), g.hbar)?;
    let half: Vec<f64> = xi.as_slice().iter().map(|v| 0.5 * v).collect();
    let phase = I * wedge_raw(g.zeta.as_vector(), xi.as_vector()) / g.hbar;
    Ok(centered.eval(&half) * phase.exp() / 2f64.powi(n as i32))
}

/// Amplitude of `exp(−ζᵀ Jᵀ M⁻¹ J ζ/(4ħ))`-type folding, exposed for cross-checks.
pub fn fold_factor(m: &CMat, zeta: &RVec, hbar: f64) -> Result<C64> {
    let n = zeta.len() / 2;
    let mut jz = CVec::zeros(2 * n);
    for i in 0..n {
        jz[i] = C64::new(zeta[n + i], 0.0);
        jz[n + i] = C64::new(-zeta[i], 0.0);
    }
    let inv = inverse_c(m)?;
    Ok((-quad_form(&inv, &jz) / (4.0 * hbar)).exp())
}

/// Finite sum of complex Gaussian terms sharing `n` and `ħ`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianSumState {
    terms: Vec<ComplexGaussianTerm>,
    n: usize,
    hbar: f64,
}

impl GaussianSumState {
    pub const RESIDUE_TOL: f64 = 1e-10;

    pub fn empty(n: usize, hbar: f64) -> Result<Self> {
        check_hbar(hbar)?;
        Ok(Self {
            terms: Vec::new(),
            n,
            hbar,
        })
    }

    pub fn from_terms(terms: Vec<ComplexGaussianTerm>) -> Result<Self> {
        let first = terms
            .first()
            .ok_or_else(|| Error::InvalidParameter("no terms".into()))?;
        let mut st = Self::empty(first.n(), first.hbar)?;
        for t in terms {
            st.push(t)?;
        }
        Ok(st)
    }

    pub fn push(&mut self, t: ComplexGaussianTerm) -> Result<()> {
        if t.n() != self.n {
            return Err(Error::DimensionMismatch {
                expected: 2 * self.n,
                found: 2 * t.n(),
            });
        }
        same_hbar(self.hbar, t.hbar)?;
        self.terms.push(t);
        Ok(())
    }

    pub fn extend(&mut self, other: &GaussianSumState) -> Result<()> {
        for t in &other.terms {
            self.push(t.clone())?;
        }
        Ok(())
    }

    pub fn terms(&self) -> &[ComplexGaussianTerm] {
        &self.terms
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn hbar(&self) -> f64 {
        self.hbar
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn integral(&self) -> C64 {
        self.terms.iter().map(|t| t.integral()).sum()
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self {
            terms: self
                .terms
                .iter()
                .map(|t| t.scaled(C64::new(c, 0.0)))
                .collect(),
            ..self.clone()
        }
    }

    /// Rescales so the analytic integral equals one.
    pub fn normalized(&self) -> Result<Self> {
        let total = self.integral();
        if !(total.norm() > 1e-300) {
            return Err(Error::ZeroNorm(total.norm()));
        }
        if total.im.abs() > 1e-8 * total.norm() {
            return Err(Error::ImaginaryResidueExceeded {
                residue: total.im.abs(),
                bound: 1e-8 * total.norm(),
            });
        }
        Ok(self.scaled(1.0 / total.re))
    }

    /// Pointwise sum together with the magnitude scale `Σ |termₖ(x)|`.
    pub fn eval_with_scale(&self, x: &[f64]) -> (C64, f64) {
        let mut sum = C64::new(0.0, 0.0);
        let mut scale = 0.0;
        for t in &self.terms {
            let v = t.eval(x);
            sum += v;
            scale += v.norm();
        }
        (sum, scale)
    }

    pub fn eval_complex(&self, x: &[f64]) -> C64 {
        self.eval_with_scale(x).0
    }

    /// `(2πħ)ⁿ ∫ W²`, equal to `tr ρ²` for a normalized state.
    pub fn purity(&self) -> Result<f64> {
        let mut acc = C64::new(0.0, 0.0);
        for a in &self.terms {
            for b in &self.terms {
                acc += product_integral(a, b)?;
            }
        }
        Ok(acc.re * (2.0 * std::f64::consts::PI * self.hbar).powi(self.n as i32))
    }
}

pub fn gaussian_integral(term: &ComplexGaussianTerm) -> C64 {
    term.integral()
}

pub fn apply_translation(state: &GaussianSumState, xi: &PhaseVector) -> Result<GaussianSumState> {
    if xi.n() != state.n {
        return Err(Error::DimensionMismatch {
            expected: 2 * state.n,
            found: xi.dim(),
        });
    }
    Ok(GaussianSumState {
        terms: state
            .terms
            .iter()
            .map(|t| t.translated(xi.as_vector()))
            .collect(),
        ..state.clone()
    })
}

pub fn apply_metaplectic(
    state: &GaussianSumState,
    s: &SymplecticMatrix,
) -> Result<GaussianSumState> {
    if s.n() != state.n {
        return Err(Error::DimensionMismatch {
            expected: 2 * state.n,
            found: s.matrix().nrows(),
        });
    }
    let dev = symplectic_deviation(s.matrix())?;
    if dev > SymplecticMatrix::DEFAULT_TOL * crate::linalg::max_abs(s.matrix()).powi(2).max(1.0) {
        return Err(Error::NotSymplectic(dev));
    }
    let terms = state
        .terms
        .iter()
        .map(|t| t.transformed(s))
        .collect::<Result<Vec<_>>>()?;
    Ok(GaussianSumState {
        terms,
        ..state.clone()
    })
}

/// Real value of the state at `x`, after checking the imaginary residue.
pub fn eval_state(state: &GaussianSumState, x: &PhaseVector) -> Result<f64> {
    if x.n() != state.n {
        return Err(Error::DimensionMismatch {
            expected: 2 * state.n,
            found: x.dim(),
        });
    }
    real_value(state, x.as_slice())
}

fn real_value(state: &GaussianSumState, x: &[f64]) -> Result<f64> {
    let (v, scale) = state.eval_with_scale(x);
    let bound = GaussianSumState::RESIDUE_TOL * scale.max(f64::MIN_POSITIVE);
    if v.im.abs() > bound {
        return Err(Error::ImaginaryResidueExceeded {
            residue: v.im.abs(),
            bound,
        });
    }
    Ok(v.re)
}

/// Uniform axis with `count ≥ 2` points including both ends.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Axis {
    pub min: f64,
    pub max: f64,
    pub count: usize,
}

impl Axis {
    pub fn new(min: f64, max: f64, count: usize) -> Result<Self> {
        if count < 2 || !(max > min) || !min.is_finite() || !max.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "axis [{min}, {max}] with {count} points"
            )));
        }
        Ok(Self { min, max, count })
    }

    pub fn step(&self) -> f64 {
        (self.max - self.min) / (self.count - 1) as f64
    }

    pub fn point(&self, k: usize) -> f64 {
        if k + 1 == self.count {
            self.max
        } else {
            self.min + k as f64 * self.step()
        }
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.count).map(|k| self.point(k)).collect()
    }
}

/// Dense samples of a Wigner function; axis 0 varies fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct WignerGrid {
    pub axes: Vec<Axis>,
    pub values: Vec<f64>,
    pub hbar: f64,
    pub description: String,
}

impl WignerGrid {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn point(&self, flat: usize) -> Vec<f64> {
        grid_point(&self.axes, flat)
    }

    pub fn get(&self, idx: &[usize]) -> f64 {
        let mut flat = 0;
        let mut stride = 1;
        for (a, &i) in self.axes.iter().zip(idx) {
            flat += i * stride;
            stride *= a.count;
        }
        self.values[flat]
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |a, v| a.max(v.abs()))
    }

    /// Riemann sum `Σ W · Π Δ`.
    pub fn riemann_sum(&self) -> f64 {
        let cell: f64 = self.axes.iter().map(|a| a.step()).product();
        self.values.iter().sum::<f64>() * cell
    }
}

pub(crate) fn grid_point(axes: &[Axis], mut flat: usize) -> Vec<f64> {
    axes.iter()
        .map(|a| {
            let k = flat % a.count;
            flat /= a.count;
            a.point(k)
        })
        .collect()
}

pub fn sample_grid(state: &GaussianSumState, axes: &[Axis]) -> Result<WignerGrid> {
    if axes.len() != 2 * state.n {
        return Err(Error::DimensionMismatch {
            expected: 2 * state.n,
            found: axes.len(),
        });
    }
    let total: usize = axes.iter().map(|a| a.count).product();
    let values = (0..total)
        .into_par_iter()
        .map(|flat| real_value(state, &grid_point(axes, flat)))
        .collect::<Result<Vec<f64>>>()?;
    Ok(WignerGrid {
        axes: axes.to_vec(),
        values,
        hbar: state.hbar,
        description: String::new(),
    })
}
