//! Mixed Gaussian cats: thermal inputs, conditional superpositions and Kerr
//! fractional revivals.
//!
//! A Gaussian mixed state `ρ₀ = M̂_S ρ_th M̂_S†` translated to `c` is treated as
//! the mixture `∫ dη N(η) |S, c + √(ħn̄) S η⟩⟨S, c + √(ħn̄) S η|` over a
//! standard normal `η`. Every term `Û_A ρ₀ Û_B†` is then a single complex
//! Gaussian Weyl symbol, obtained by integrating `η` out in closed form.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{
    inverse_r, min_eigenvalue_sym, re, sorted_eigen, symmetrize, CVec, RMat, RVec, C64, I,
};
use crate::states::wavefunction::{metaplectic_phase, translated_family, weyl_symbol_family};
use crate::states::{
    check_hbar, ComplexGaussianTerm, GaussianPure, GaussianSumState, GaussianWavefunction, QuadExp,
};
use crate::symplectic::{wedge_raw, PhaseVector, SymplecticMatrix};

/// Displaced thermal state with Wigner function `𝒢(x; I/(2n̄+1), center)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ThermalState {
    pub nbar: f64,
    pub center: PhaseVector,
    pub hbar: f64,
}

impl ThermalState {
    pub fn new(nbar: f64, center: PhaseVector, hbar: f64) -> Result<Self> {
        check_hbar(hbar)?;
        if !(nbar >= 0.0) || !nbar.is_finite() {
            return Err(Error::NegativeOccupation(nbar));
        }
        Ok(Self { nbar, center, hbar })
    }

    pub fn n(&self) -> usize {
        self.center.n()
    }

    /// Characteristic function `(2πħ)⁻ⁿ exp[−(2n̄+1)|ξ|²/4ħ]` of the centered state.
    pub fn chi_centered(&self, xi: &[f64]) -> f64 {
        let n = self.n() as f64;
        let r2: f64 = xi.iter().map(|v| v * v).sum();
        (2.0 * std::f64::consts::PI * self.hbar).powf(-n)
            * (-(2.0 * self.nbar + 1.0) * r2 / (4.0 * self.hbar)).exp()
    }
}

/// `M̂_S ρ_th M̂_S†` translated to `center`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianMixed {
    pub s: SymplecticMatrix,
    pub center: PhaseVector,
    pub nbar: f64,
    pub hbar: f64,
}

impl GaussianMixed {
    pub fn new(s: SymplecticMatrix, center: PhaseVector, nbar: f64, hbar: f64) -> Result<Self> {
        check_hbar(hbar)?;
        if !(nbar >= 0.0) || !nbar.is_finite() {
            return Err(Error::NegativeOccupation(nbar));
        }
        if s.n() != center.n() {
            return Err(Error::DimensionMismatch {
                expected: 2 * s.n(),
                found: center.dim(),
            });
        }
        Ok(Self {
            s,
            center,
            nbar,
            hbar,
        })
    }

    pub fn pure(g: &GaussianPure) -> Self {
        Self {
            s: g.s().clone(),
            center: g.zeta().clone(),
            nbar: 0.0,
            hbar: g.hbar(),
        }
    }

    pub fn n(&self) -> usize {
        self.center.n()
    }

    pub fn wigner(&self) -> Result<ComplexGaussianTerm> {
        let sst = self.s.matrix() * self.s.matrix().transpose();
        let m = symmetrize(&(inverse_r(&sst)? / (2.0 * self.nbar + 1.0)));
        ComplexGaussianTerm::real(1.0, &m, self.center.as_vector(), self.hbar)
    }
}

impl From<&ThermalState> for GaussianMixed {
    fn from(ts: &ThermalState) -> Self {
        Self {
            s: SymplecticMatrix::identity(ts.n()),
            center: ts.center.clone(),
            nbar: ts.nbar,
            hbar: ts.hbar,
        }
    }
}

pub fn thermal_wigner(ts: &ThermalState) -> Result<ComplexGaussianTerm> {
    let n = ts.n();
    let m = RMat::identity(2 * n, 2 * n) / (2.0 * ts.nbar + 1.0);
    ComplexGaussianTerm::real(1.0, &m, ts.center.as_vector(), ts.hbar)
}

/// The unitary `T̂_ξ M̂_S`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearOp {
    pub s: SymplecticMatrix,
    pub xi: PhaseVector,
}

impl LinearOp {
    pub fn new(s: SymplecticMatrix, xi: PhaseVector) -> Result<Self> {
        if s.n() != xi.n() {
            return Err(Error::DimensionMismatch {
                expected: 2 * s.n(),
                found: xi.dim(),
            });
        }
        Ok(Self { s, xi })
    }

    pub fn identity(n: usize) -> Self {
        Self {
            s: SymplecticMatrix::identity(n),
            xi: PhaseVector::zeros(n),
        }
    }

    /// `e^{−iθ N̂}` on all modes.
    pub fn rotation(n: usize, theta: f64) -> Self {
        Self {
            s: SymplecticMatrix::rotation(n, theta),
            xi: PhaseVector::zeros(n),
        }
    }

    pub fn translation(xi: PhaseVector) -> Self {
        Self {
            s: SymplecticMatrix::identity(xi.n()),
            xi,
        }
    }

    pub fn n(&self) -> usize {
        self.xi.n()
    }
}

/// `Û |S₀, c + Fη⟩` as a function of `(q, η)`.
fn ket_family(rho: &GaussianMixed, op: &LinearOp) -> Result<QuadExp> {
    let n = rho.n();
    let h = rho.hbar;
    if op.n() != n {
        return Err(Error::DimensionMismatch {
            expected: 2 * n,
            found: op.xi.dim(),
        });
    }
    let m = if rho.nbar > 0.0 { 2 * n } else { 0 };
    let phi = GaussianWavefunction::from_pure(&GaussianPure::new(
        op.s.compose(&rho.s)?,
        PhaseVector::zeros(n),
        h,
    )?)?;
    let kappa = metaplectic_phase(&op.s, &rho.s, h)?;
    let a = op.xi.as_vector();
    let sc = op.s.matrix() * rho.center.as_vector();
    let f = if m > 0 {
        op.s.matrix() * rho.s.matrix() * (h * rho.nbar).sqrt()
    } else {
        RMat::zeros(2 * n, 0)
    };
    // T_a M_S T_ζ |S₀,0⟩ = κ e^{i a∧(Sζ)/2ħ} T_{a+Sζ} |SS₀,0⟩, ζ = c + √(ħn̄)S₀η
    let mut fam = translated_family(phi.quadexp(), &(a + &sc), &f, h)?;
    let ja = crate::linalg::symplectic_form(n) * a;
    let lin_eta = f.transpose() * ja;
    let mut lin = CVec::zeros(n + m);
    for j in 0..m {
        lin[n + j] = I * lin_eta[j] / (2.0 * h);
    }
    let c = kappa.ln() + I * wedge_raw(a, &sc) / (2.0 * h);
    fam.add_exponent(&crate::linalg::CMat::zeros(n + m, n + m), &lin, c);
    Ok(fam)
}

fn mixture_weight(rho: &GaussianMixed) -> QuadExp {
    if rho.nbar > 0.0 {
        let m = 2 * rho.n();
        QuadExp::new(
            crate::linalg::CMat::identity(m, m) * C64::new(0.5, 0.0),
            CVec::zeros(m),
            C64::new(-0.5 * m as f64 * (2.0 * std::f64::consts::PI).ln(), 0.0),
        )
    } else {
        QuadExp::constant(0, C64::new(0.0, 0.0))
    }
}

/// Wigner-normalized Weyl symbol of `Û_A ρ₀ Û_B†`.
pub fn cross_term_symbol(
    op_a: &LinearOp,
    rho: &GaussianMixed,
    op_b: &LinearOp,
) -> Result<ComplexGaussianTerm> {
    let ket = ket_family(rho, op_a)?;
    let bra = ket_family(rho, op_b)?;
    weyl_symbol_family(&ket, &bra, rho.n(), &mixture_weight(rho), rho.hbar)
}

/// `𝒩 (1 ± Û) ρ₀ (1 ± Û†)` with unit trace.
pub fn conditional_cat(rho: &GaussianMixed, op: &LinearOp, sign: i8) -> Result<GaussianSumState> {
    let s = match sign {
        1 => 1.0,
        -1 => -1.0,
        _ => {
            return Err(Error::InvalidParameter(format!(
                "sign must be ±1, got {sign}"
            )))
        }
    };
    let id = LinearOp::identity(rho.n());
    let diag0 = cross_term_symbol(&id, rho, &id)?;
    let diag1 = cross_term_symbol(op, rho, op)?;
    let cross = cross_term_symbol(op, rho, &id)?.scaled(C64::new(s, 0.0));
    let terms = vec![diag0, diag1, cross.conj(), cross];
    let total: C64 = terms.iter().map(|t| t.integral()).sum();
    let scale: f64 = terms.iter().map(|t| t.integral().norm()).sum();
    if total.re <= 1e-12 * scale {
        return Err(Error::ZeroNorm(total.re));
    }
    Ok(GaussianSumState::from_terms(terms)?.scaled(1.0 / total.re))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KerrCoefficients {
    pub mu: u32,
    pub nu: u32,
    pub period: u32,
    pub coeffs: Vec<Complex64>,
}

/// Threshold below which a Fourier coefficient is treated as exactly zero.
pub const COEFF_ZERO: f64 = 1e-9;

impl KerrCoefficients {
    /// Indices `k` with nonzero `c_k`.
    pub fn support(&self) -> Vec<usize> {
        (0..self.coeffs.len())
            .filter(|&k| self.coeffs[k].norm() > COEFF_ZERO)
            .collect()
    }

    pub fn component_count(&self) -> usize {
        self.support().len()
    }

    /// Propagator phase `e^{−iπμn²/ν}`.
    pub fn phase(&self, n: u64) -> C64 {
        kerr_phase(self.mu, self.nu, n)
    }

    /// `Σ_k c_k e^{−2πikn/L}`.
    pub fn reconstruct(&self, n: u64) -> C64 {
        let l = self.period as u64;
        self.coeffs
            .iter()
            .enumerate()
            .map(|(k, c)| c * unit_root(-2 * ((k as u64 * n) % l) as i64, l))
            .sum()
    }

    pub fn angle(&self, k: usize) -> f64 {
        2.0 * std::f64::consts::PI * k as f64 / self.period as f64
    }
}

/// `e^{iπ m / l}` with `m` reduced modulo `2l`.
fn unit_root(m: i64, l: u64) -> C64 {
    let r = m.rem_euclid(2 * l as i64) as f64;
    C64::from_polar(1.0, std::f64::consts::PI * r / l as f64)
}

fn kerr_phase(mu: u32, nu: u32, n: u64) -> C64 {
    let nu64 = nu as u64;
    let r =
        (mu as u64 % (2 * nu64)) * ((n % (2 * nu64)) * (n % (2 * nu64)) % (2 * nu64)) % (2 * nu64);
    unit_root(-(r as i64), nu64)
}

fn gcd(a: u32, b: u32) -> u32 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Fourier coefficients of the Kerr propagator at `t = (μ/ν)T`, where
/// `e^{−iπμn̂²/ν} = Σ_k c_k e^{−2πik n̂/L}`.
pub fn kerr_coefficients(mu: u32, nu: u32) -> Result<KerrCoefficients> {
    if mu == 0 || nu == 0 || gcd(mu, nu) != 1 {
        return Err(Error::NotCoprime(mu, nu));
    }
    let l = if (mu as u64 * nu as u64).is_multiple_of(2) {
        nu
    } else {
        2 * nu
    };
    let l64 = l as u64;
    let ratio = l64 / nu as u64;
    let coeffs = (0..l64)
        .map(|k| {
            let sum: C64 = (0..l64)
                .map(|n| {
                    // −πμn²/ν + 2πkn/L = π(2kn − μn²·L/ν)/L
                    let m = 2 * ((k * n) % l64) as i64
                        - ((mu as u64 % (2 * l64)) * ((n * n * ratio) % (2 * l64)) % (2 * l64))
                            as i64;
                    unit_root(m, l64)
                })
                .sum();
            sum / l as f64
        })
        .map(|c: C64| {
            let snap = |v: f64| if v.abs() < 1e-15 { 0.0 } else { v };
            C64::new(snap(c.re), snap(c.im))
        })
        .collect();
    Ok(KerrCoefficients {
        mu,
        nu,
        period: l,
        coeffs,
    })
}

/// Kerr evolution of `ρ₀` to `t = (μ/ν)T`: `Σ_{k,j} c_k c̄_j R̂_k ρ₀ R̂_j†`.
pub fn kerr_cat(rho: &GaussianMixed, mu: u32, nu: u32) -> Result<GaussianSumState> {
    let kc = kerr_coefficients(mu, nu)?;
    let support = kc.support();
    let n = rho.n();
    let pairs: Vec<(usize, usize)> = support
        .iter()
        .enumerate()
        .flat_map(|(a, &k)| support[a..].iter().map(move |&j| (k, j)))
        .collect();
    let symbols = pairs
        .par_iter()
        .map(|&(k, j)| {
            let t = cross_term_symbol(
                &LinearOp::rotation(n, kc.angle(k)),
                rho,
                &LinearOp::rotation(n, kc.angle(j)),
            )?;
            Ok(t.scaled(kc.coeffs[k] * kc.coeffs[j].conj()))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut terms = Vec::with_capacity(support.len() * support.len());
    for (&(k, j), t) in pairs.iter().zip(symbols) {
        if k != j {
            terms.push(t.conj());
        }
        terms.push(t);
    }
    GaussianSumState::from_terms(terms)
}

/// `ρ′ = ½(1 + iR̂₀)ρ₀(1 − iR̂₀)` for a displaced thermal `ρ₀`, as two hills
/// and a conjugate pair of cross terms `±i χ_th(2x) e^{±i x∧2η/ħ}`.
pub fn binary_kerr_state(ts: &ThermalState) -> Result<GaussianSumState> {
    let n = ts.n();
    let h = ts.hbar;
    let g = 2.0 * ts.nbar + 1.0;
    let eta = ts.center.as_vector();
    let hill = thermal_wigner(&ThermalState::new(ts.nbar, PhaseVector::zeros(n), h)?)?;
    let plus = hill.translated(eta).scaled(C64::new(0.5, 0.0));
    let minus = hill.translated(&(-eta)).scaled(C64::new(0.5, 0.0));
    let amp = (2.0 * g).powi(-(n as i32));
    let chi = ComplexGaussianTerm::real(
        amp,
        &(RMat::identity(2 * n, 2 * n) * g),
        &RVec::zeros(2 * n),
        h,
    )?;
    let cross = chi.scaled(I).times_wedge_phase(&(eta * 2.0))?;
    GaussianSumState::from_terms(vec![plus, minus, cross.conj(), cross])
}

/// `W′(x)` from `2W′ = W_th(x−η) + W_th(x+η) − 4 sin(x∧2η/ħ) χ_th(2x)`.
pub fn binary_kerr_wigner(ts: &ThermalState, x: &PhaseVector) -> Result<f64> {
    if x.n() != ts.n() {
        return Err(Error::DimensionMismatch {
            expected: ts.center.dim(),
            found: x.dim(),
        });
    }
    let h = ts.hbar;
    let n = ts.n() as f64;
    let g = 2.0 * ts.nbar + 1.0;
    let eta = ts.center.as_vector();
    let xv = x.as_vector();
    let w_th =
        |d: &RVec| (std::f64::consts::PI * h * g).powf(-n) * (-d.norm_squared() / (g * h)).exp();
    let twox: Vec<f64> = xv.iter().map(|v| 2.0 * v).collect();
    let s = (wedge_raw(xv, &(eta * 2.0)) / h).sin();
    Ok(0.5 * (w_th(&(xv - eta)) + w_th(&(xv + eta)) - 4.0 * s * ts.chi_centered(&twox)))
}

/// Full width at half maximum of the binary-cat interference envelope.
pub fn binary_fringe_fwhm(nbar: f64, hbar: f64) -> f64 {
    2.0 * (hbar * std::f64::consts::LN_2 / (2.0 * nbar + 1.0)).sqrt()
}

/// FWHM of a term's Gaussian envelope along the unit direction `u`.
pub fn envelope_fwhm(term: &ComplexGaussianTerm, u: &RVec) -> f64 {
    let m = re(term.matrix());
    let d = u / u.norm();
    2.0 * (term.hbar() * std::f64::consts::LN_2 / d.dot(&(m * &d))).sqrt()
}

/// Covariance `(ħ/2)(Re M)⁻¹` of a term's envelope.
pub fn term_envelope_covariance(term: &ComplexGaussianTerm) -> Result<RMat> {
    Ok(symmetrize(
        &(inverse_r(&re(term.matrix()))? * (0.5 * term.hbar())),
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FringePattern {
    Linear,
    Elliptical,
    Parabolic,
    Hyperbolic,
}

/// Shape of the fringes from the signs of the eigenvalues of `Im M`.
pub fn fringe_pattern(term: &ComplexGaussianTerm, tol: f64) -> FringePattern {
    let m = term.matrix();
    let imm = symmetrize(&crate::linalg::im(m));
    let scale = crate::linalg::max_abs_c(m).max(1e-300);
    let (vals, _) = sorted_eigen(&imm);
    let pos = vals.iter().filter(|&&v| v > tol * scale).count();
    let neg = vals.iter().filter(|&&v| v < -tol * scale).count();
    match (pos, neg) {
        (0, 0) => FringePattern::Linear,
        (p, q) if p > 0 && q > 0 => FringePattern::Hyperbolic,
        (p, q) if p + q == vals.len() => FringePattern::Elliptical,
        _ => FringePattern::Parabolic,
    }
}

/// One cross term of a Kerr cat with its fringe shape.
#[derive(Debug, Clone, PartialEq)]
pub struct KerrCrossTerm {
    pub k: usize,
    pub j: usize,
    pub term: ComplexGaussianTerm,
    pub pattern: FringePattern,
}

/// The `k < j` cross terms of a Kerr cat, classified.
pub fn kerr_cross_terms(
    rho: &GaussianMixed,
    mu: u32,
    nu: u32,
    tol: f64,
) -> Result<Vec<KerrCrossTerm>> {
    let kc = kerr_coefficients(mu, nu)?;
    let support = kc.support();
    let n = rho.n();
    let mut out = Vec::new();
    for (a, &k) in support.iter().enumerate() {
        for &j in &support[a + 1..] {
            let t = cross_term_symbol(
                &LinearOp::rotation(n, kc.angle(k)),
                rho,
                &LinearOp::rotation(n, kc.angle(j)),
            )?
            .scaled(kc.coeffs[k] * kc.coeffs[j].conj());
            let pattern = fringe_pattern(&t, tol);
            out.push(KerrCrossTerm {
                k,
                j,
                term: t,
                pattern,
            });
        }
    }
    Ok(out)
}

/// `true` when `a ≺ b` in the Loewner order.
pub fn strictly_smaller(a: &RMat, b: &RMat) -> bool {
    min_eigenvalue_sym(&symmetrize(&(b - a))) > 0.0
}

/// Rotates a mixed state's center, for symmetry checks.
pub fn rotate_input(rho: &GaussianMixed, theta: f64) -> Result<GaussianMixed> {
    let r = SymplecticMatrix::rotation(rho.n(), theta);
    GaussianMixed::new(
        r.compose(&rho.s)?.compose(&r.inverse())?,
        PhaseVector::from_vector(r.matrix() * rho.center.as_vector())?,
        rho.nbar,
        rho.hbar,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::max_abs_c;

    fn pv(v: &[f64]) -> PhaseVector {
        PhaseVector::new(v.to_vec()).unwrap()
    }

    #[test]
    fn thermal_peak_and_vacuum_limit() {
        let ts = ThermalState::new(1.0, pv(&[0.0, 0.0]), 0.7).unwrap();
        let w = thermal_wigner(&ts).unwrap();
        let peak = w.eval(&[0.0, 0.0]).re;
        assert!((peak - 1.0 / (3.0 * std::f64::consts::PI * 0.7)).abs() < 1e-14);
        let v = thermal_wigner(&ThermalState::new(0.0, pv(&[0.0, 0.0]), 0.7).unwrap()).unwrap();
        assert!(max_abs_c(&(v.matrix() - crate::linalg::CMat::identity(2, 2))) == 0.0);
        assert!(ThermalState::new(-0.1, pv(&[0.0, 0.0]), 1.0).is_err());
    }

    #[test]
    fn coefficients_reconstruct_and_share_modulus() {
        for nu in 1..=12u32 {
            for mu in 1..=2 * nu {
                if gcd(mu, nu) != 1 {
                    assert!(kerr_coefficients(mu, nu).is_err());
                    continue;
                }
                let kc = kerr_coefficients(mu, nu).unwrap();
                for n in 0..(2 * kc.period as u64) {
                    assert!((kc.reconstruct(n) - kc.phase(n)).norm() < 1e-12);
                }
                let sup = kc.support();
                let r0 = kc.coeffs[sup[0]].norm();
                for &k in &sup {
                    assert!((kc.coeffs[k].norm() - r0).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn binary_case_weights() {
        let kc = kerr_coefficients(1, 2).unwrap();
        assert_eq!(kc.period, 2);
        assert_eq!(kc.support(), vec![0, 1]);
        // c₁/c₀ = i, |c| = 1/√2
        let ratio = kc.coeffs[1] / kc.coeffs[0];
        assert!((ratio - I).norm() < 1e-14);
        assert!((kc.coeffs[0].norm() - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-14);
        let full = kerr_coefficients(2, 1).unwrap();
        assert_eq!(full.support(), vec![0]);
        let parity = kerr_coefficients(1, 1).unwrap();
        assert_eq!(parity.period, 2);
        assert_eq!(parity.support(), vec![1]);
    }

    #[test]
    fn diagonal_symbol_is_transformed_state() {
        let s = SymplecticMatrix::squeeze(&[1.4]).unwrap();
        let rho = GaussianMixed::new(s, pv(&[0.3, -0.2]), 0.6, 0.9).unwrap();
        let op = LinearOp::new(SymplecticMatrix::rotation(1, 0.7), pv(&[0.5, 1.0])).unwrap();
        let t = cross_term_symbol(&op, &rho, &op).unwrap();
        let want = rho
            .wigner()
            .unwrap()
            .transformed(&op.s)
            .unwrap()
            .translated(op.xi.as_vector());
        assert!((t.amplitude() - 1.0).norm() < 1e-12);
        assert!(max_abs_c(&(t.matrix() - want.matrix())) < 1e-12);
        assert!((t.center() - want.center()).norm() < 1e-12);
    }

    #[test]
    fn identity_conditional_cats() {
        let rho: GaussianMixed = (&ThermalState::new(0.5, pv(&[1.0, 0.0]), 1.0).unwrap()).into();
        let id = LinearOp::identity(1);
        let plus = conditional_cat(&rho, &id, 1).unwrap();
        let w = rho.wigner().unwrap();
        for x in [[0.0, 0.0], [1.0, 0.3], [-0.4, 1.2]] {
            let got: f64 = plus.eval_complex(&x).re;
            assert!((got - w.eval(&x).re).abs() < 1e-12);
        }
        assert!(matches!(
            conditional_cat(&rho, &id, -1),
            Err(Error::ZeroNorm(_))
        ));
    }

    #[test]
    fn pure_conditional_cat_matches_pure_cat() {
        use crate::cat::{cat_wigner, PureCat};
        let g = GaussianPure::new(
            SymplecticMatrix::squeeze(&[1.5]).unwrap(),
            pv(&[0.4, -0.3]),
            0.8,
        )
        .unwrap();
        let xi = pv(&[1.2, 0.9]);
        let st = conditional_cat(
            &GaussianMixed::pure(&g),
            &LinearOp::translation(xi.clone()),
            1,
        )
        .unwrap();
        // T_ξ T_ζ = e^{i ξ∧ζ/2ħ} T_{ξ+ζ}
        let b = (I * wedge_raw(xi.as_vector(), g.zeta().as_vector()) / (2.0 * 0.8)).exp();
        let g2 = GaussianPure::new(g.s().clone(), &xi + g.zeta(), 0.8).unwrap();
        let cat = cat_wigner(&PureCat::new(C64::new(1.0, 0.0), b, g.clone(), g2).unwrap()).unwrap();
        for x in [[0.0, 0.0], [1.0, 0.3], [-0.4, 1.2], [0.9, 0.2]] {
            assert!((st.eval_complex(&x) - cat.eval_complex(&x)).norm() < 1e-10);
        }
    }

    #[test]
    fn binary_closed_form_matches_kerr_cat() {
        for nbar in [0.0, 0.5, 2.0] {
            let ts = ThermalState::new(nbar, pv(&[1.3, -0.6]), 1.0).unwrap();
            let cat = kerr_cat(&(&ts).into(), 1, 2).unwrap();
            let closed = binary_kerr_state(&ts).unwrap();
            assert!((cat.integral() - 1.0).norm() < 1e-12);
            assert!((closed.integral() - 1.0).norm() < 1e-12);
            for x in [[0.0, 0.0], [0.2, 0.4], [1.3, -0.6], [-1.0, 0.5], [0.7, 1.9]] {
                let a = cat.eval_complex(&x);
                let b = binary_kerr_wigner(&ts, &pv(&x)).unwrap();
                let c = closed.eval_complex(&x);
                assert!((a.re - b).abs() < 1e-12, "nbar {nbar} x {x:?}: {a} vs {b}");
                assert!((c.re - b).abs() < 1e-12);
                assert!(a.im.abs() < 1e-12);
            }
        }
    }

    #[test]
    fn fwhm_shrinks_with_temperature() {
        let mut last = f64::INFINITY;
        for nbar in [0.0, 0.5, 1.0, 2.0] {
            let ts = ThermalState::new(nbar, pv(&[2.0, 0.0]), 1.0).unwrap();
            let st = binary_kerr_state(&ts).unwrap();
            let f = envelope_fwhm(&st.terms()[3], &RVec::from_vec(vec![1.0, 0.0]));
            assert!((f - binary_fringe_fwhm(nbar, 1.0)).abs() < 1e-12);
            assert!(f < last);
            last = f;
        }
    }

    #[test]
    fn compass_fringes_and_extent() {
        let ts = ThermalState::new(0.5, pv(&[2.0, 0.0]), 1.0).unwrap();
        let rho: GaussianMixed = (&ts).into();
        let cross = kerr_cross_terms(&rho, 1, 4, 1e-9).unwrap();
        assert_eq!(cross.len(), 6);
        let hill = term_envelope_covariance(&rho.wigner().unwrap()).unwrap();
        for c in &cross {
            let opposite = (c.j - c.k) % 4 == 2;
            let want = if opposite {
                FringePattern::Linear
            } else {
                FringePattern::Elliptical
            };
            assert_eq!(c.pattern, want, "pair ({}, {})", c.k, c.j);
            assert!(strictly_smaller(
                &term_envelope_covariance(&c.term).unwrap(),
                &hill
            ));
        }
        let cat = kerr_cat(&rho, 1, 4).unwrap();
        assert!((cat.integral() - 1.0).norm() < 1e-10);
        assert!(cat.purity().unwrap() < 1.0);
    }

    #[test]
    fn pure_kerr_cat_is_pure() {
        let g = GaussianPure::new(
            SymplecticMatrix::squeeze(&[1.3]).unwrap(),
            pv(&[1.5, 0.5]),
            1.0,
        )
        .unwrap();
        let cat = kerr_cat(&GaussianMixed::pure(&g), 1, 3).unwrap();
        assert!((cat.integral() - 1.0).norm() < 1e-10);
        assert!((cat.purity().unwrap() - 1.0).abs() < 1e-8);
    }

    #[test]
    fn rotating_the_input_rotates_the_output() {
        let rho: GaussianMixed = (&ThermalState::new(0.3, pv(&[1.5, 0.4]), 1.0).unwrap()).into();
        let nu = 4;
        let theta = 2.0 * std::f64::consts::PI / nu as f64;
        let a = kerr_cat(&rho, 1, nu).unwrap();
        let b = kerr_cat(&rotate_input(&rho, theta).unwrap(), 1, nu).unwrap();
        let r = SymplecticMatrix::rotation(1, theta);
        for x in [[0.1, 0.2], [1.0, -0.5], [-1.2, 0.8]] {
            let xv = RVec::from_vec(x.to_vec());
            let rx = r.matrix() * &xv;
            assert!((a.eval_complex(&x) - b.eval_complex(rx.as_slice())).norm() < 1e-12);
        }
    }
}
