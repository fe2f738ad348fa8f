//! Linear open-system dynamics.
//!
//! A quadratic Hamiltonian `½ x̂ᵀBx̂` with linear Lindblad operators
//! `L̂ₖ = λₖ∧x̂` maps Wigner functions by a linear Fokker-Planck flow with drift
//! `A = J(B − Im Υ)` and diffusion `D = ħ Re Υ`, `Υ = Σ λₖλₖ†`. Gaussian
//! terms stay Gaussian; their covariance `C = (ħ/2)M⁻¹` obeys
//! `Ċ = AC + CAᵀ + D`.

use crate::error::{Error, Result};
use crate::linalg::{
    expm, im, inverse_c, max_abs, re, symmetrize, symmetrize_c, symplectic_form, to_complex, CMat,
    CVec, RMat, C64,
};
use crate::states::{check_hbar, ComplexGaussianTerm, GaussianSumState};
use crate::symplectic::{signature, Signature};

#[derive(Debug, Clone, PartialEq)]
pub struct LindbladChannel {
    b: RMat,
    lambdas: Vec<CVec>,
    hbar: f64,
}

impl LindbladChannel {
    pub fn new(b: RMat, lambdas: Vec<CVec>, hbar: f64) -> Result<Self> {
        check_hbar(hbar)?;
        if b.nrows() != b.ncols() || !b.nrows().is_multiple_of(2) || b.nrows() == 0 {
            return Err(Error::OddDimension(b.nrows()));
        }
        let asym = max_abs(&(&b - b.transpose()));
        if asym > 1e-12 * max_abs(&b).max(1.0) {
            return Err(Error::NotSymmetric(asym));
        }
        for l in &lambdas {
            if l.len() != b.nrows() {
                return Err(Error::DimensionMismatch {
                    expected: b.nrows(),
                    found: l.len(),
                });
            }
        }
        if max_abs(&b) == 0.0 && lambdas.iter().all(|l| l.iter().all(|z| z.norm() == 0.0)) {
            return Err(Error::InvalidParameter("channel has no dynamics".into()));
        }
        Ok(Self { b, lambdas, hbar })
    }

    /// Oscillators of unit frequency with energy damping at rate `kappa`
    /// towards a bath of occupation `nbar`.
    pub fn damped_oscillator(n: usize, kappa: f64, nbar: f64, hbar: f64) -> Result<Self> {
        if kappa < 0.0 || nbar < 0.0 {
            return Err(Error::InvalidParameter(
                "negative rate or occupation".into(),
            ));
        }
        let mut lambdas = Vec::new();
        let s = std::f64::consts::FRAC_1_SQRT_2;
        for k in 0..n {
            let mut down = CVec::zeros(2 * n);
            down[k] = C64::new(s * (kappa * (nbar + 1.0)).sqrt(), 0.0);
            down[n + k] = C64::new(0.0, s * (kappa * (nbar + 1.0)).sqrt());
            lambdas.push(down);
            if nbar > 0.0 {
                let mut up = CVec::zeros(2 * n);
                up[k] = C64::new(s * (kappa * nbar).sqrt(), 0.0);
                up[n + k] = C64::new(0.0, -s * (kappa * nbar).sqrt());
                lambdas.push(up);
            }
        }
        Self::new(RMat::identity(2 * n, 2 * n), lambdas, hbar)
    }

    pub fn b(&self) -> &RMat {
        &self.b
    }

    pub fn lambdas(&self) -> &[CVec] {
        &self.lambdas
    }

    pub fn hbar(&self) -> f64 {
        self.hbar
    }

    pub fn n(&self) -> usize {
        self.b.nrows() / 2
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChannelMatrices {
    pub a: RMat,
    pub d: RMat,
    pub upsilon: CMat,
    pub hbar: f64,
}

pub fn channel_matrices(ch: &LindbladChannel) -> Result<ChannelMatrices> {
    let dim = ch.b.nrows();
    let mut upsilon = CMat::zeros(dim, dim);
    for l in &ch.lambdas {
        upsilon += l * l.adjoint();
    }
    let d = symmetrize(&(re(&upsilon) * ch.hbar));
    let imu = im(&upsilon);
    let a = symplectic_form(dim / 2) * (&ch.b - &imu);
    let anti = max_abs(&(&imu + imu.transpose()));
    if anti > 1e-12 * max_abs(&imu).max(1.0) {
        return Err(Error::NotSymmetric(anti));
    }
    if crate::linalg::min_eigenvalue_sym(&d) < -1e-12 * max_abs(&d).max(1.0) {
        return Err(Error::NotPositiveDefinite);
    }
    Ok(ChannelMatrices {
        a,
        d,
        upsilon,
        hbar: ch.hbar,
    })
}

/// `(e^{At}, ∫₀ᵗ e^{As} D e^{Aᵀs} ds)` from one block exponential.
pub fn propagator(cm: &ChannelMatrices, t: f64) -> Result<(RMat, RMat)> {
    if t < 0.0 {
        return Err(Error::NegativeTime(t));
    }
    let dim = cm.a.nrows();
    if t == 0.0 {
        return Ok((RMat::identity(dim, dim), RMat::zeros(dim, dim)));
    }
    let mut big = RMat::zeros(2 * dim, 2 * dim);
    big.view_mut((0, 0), (dim, dim)).copy_from(&(&cm.a * t));
    big.view_mut((0, dim), (dim, dim)).copy_from(&(&cm.d * t));
    big.view_mut((dim, dim), (dim, dim))
        .copy_from(&(-cm.a.transpose() * t));
    let f = expm(&big);
    let f11 = f.view((0, 0), (dim, dim)).into_owned();
    let f12 = f.view((0, dim), (dim, dim)).into_owned();
    let noise = symmetrize(&(&f12 * f11.transpose()));
    Ok((f11, noise))
}

/// `C(t) = e^{At} C₀ e^{Aᵀt} + ∫₀ᵗ e^{As} D e^{Aᵀs} ds`.
pub fn evolve_covariance(c0: &CMat, cm: &ChannelMatrices, t: f64) -> Result<CMat> {
    if t < 0.0 {
        return Err(Error::NegativeTime(t));
    }
    if t == 0.0 {
        return Ok(c0.clone());
    }
    let (e, noise) = propagator(cm, t)?;
    let ec = to_complex(&e);
    Ok(symmetrize_c(
        &(&ec * c0 * ec.transpose() + to_complex(&noise)),
    ))
}

/// Evolves one Gaussian term; the amplitude (its integral) is conserved.
pub fn evolve_term(
    term: &ComplexGaussianTerm,
    cm: &ChannelMatrices,
    t: f64,
) -> Result<ComplexGaussianTerm> {
    if t < 0.0 {
        return Err(Error::NegativeTime(t));
    }
    if t == 0.0 {
        return Ok(term.clone());
    }
    let half = C64::new(0.5 * term.hbar(), 0.0);
    let c0 = inverse_c(term.matrix())? * half;
    let c = evolve_covariance(&c0, cm, t)?;
    let m = symmetrize_c(&(inverse_c(&c)? * half));
    let (e, _) = propagator(cm, t)?;
    let center = to_complex(&e) * term.center();
    ComplexGaussianTerm::from_log_amplitude(term.log_amplitude(), m, center, term.hbar())
}

pub fn evolve_state(
    state: &GaussianSumState,
    ch: &LindbladChannel,
    t: f64,
) -> Result<GaussianSumState> {
    crate::states::same_hbar(state.hbar(), ch.hbar)?;
    if ch.n() != state.n() {
        return Err(Error::DimensionMismatch {
            expected: 2 * state.n(),
            found: 2 * ch.n(),
        });
    }
    let cm = channel_matrices(ch)?;
    let mut out = GaussianSumState::empty(state.n(), state.hbar())?;
    for term in state.terms() {
        out.push(evolve_term(term, &cm, t)?)?;
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct CovarianceTrajectory {
    pub times: Vec<f64>,
    pub matrices: Vec<CMat>,
}

pub fn covariance_trajectory(
    c0: &CMat,
    cm: &ChannelMatrices,
    times: &[f64],
) -> Result<CovarianceTrajectory> {
    let matrices = times
        .iter()
        .map(|&t| evolve_covariance(c0, cm, t))
        .collect::<Result<Vec<_>>>()?;
    Ok(CovarianceTrajectory {
        times: times.to_vec(),
        matrices,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SignatureSample {
    pub t: f64,
    pub re_inverse: Signature,
    pub im_inverse: Signature,
    pub re_positive: bool,
    pub im_nonsingular: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SignatureReport {
    pub initial: SignatureSample,
    pub samples: Vec<SignatureSample>,
    pub violations: Vec<String>,
}

impl SignatureReport {
    pub fn ok(&self) -> bool {
        self.violations.is_empty()
    }
}

fn sample(c: &CMat, t: f64) -> Result<SignatureSample> {
    let inv = inverse_c(c)?;
    let re_c = re(c);
    let im_c = im(c);
    let scale = max_abs(&re_c).max(max_abs(&im_c));
    let im_sig = signature(&symmetrize(&im_c), Some(1e-10 * scale))?;
    Ok(SignatureSample {
        t,
        re_inverse: signature(&symmetrize(&re(&inv)), None)?,
        im_inverse: signature(
            &symmetrize(&im(&inv)),
            Some(1e-10 * max_abs(&re(&inv)).max(max_abs(&im(&inv)))),
        )?,
        re_positive: crate::linalg::min_eigenvalue_sym(&re_c) > 0.0,
        im_nonsingular: im_sig.n_zero == 0,
    })
}

/// Tracks the signatures of `Re C⁻¹` and `Im C⁻¹`, positivity of `Re C`, and
/// nonsingularity of `Im C` along the evolution.
pub fn check_signature_preservation(
    c0: &CMat,
    ch: &LindbladChannel,
    times: &[f64],
) -> Result<SignatureReport> {
    let cm = channel_matrices(ch)?;
    let initial = sample(c0, 0.0)?;
    let mut violations = Vec::new();
    let mut samples = Vec::new();
    for &t in times {
        let s = sample(&evolve_covariance(c0, &cm, t)?, t)?;
        if s.re_inverse != initial.re_inverse {
            violations.push(format!("t = {t}: signature of Re C⁻¹ changed"));
        }
        if s.im_inverse != initial.im_inverse {
            violations.push(format!("t = {t}: signature of Im C⁻¹ changed"));
        }
        if !s.re_positive {
            violations.push(format!("t = {t}: Re C lost positivity"));
        }
        if initial.im_nonsingular && !s.im_nonsingular {
            violations.push(format!("t = {t}: Im C became singular"));
        }
        samples.push(s);
    }
    Ok(SignatureReport {
        initial,
        samples,
        violations,
    })
}

/// Covariance `C = (ħ/2) M⁻¹` of a term.
pub fn term_covariance(term: &ComplexGaussianTerm) -> Result<CMat> {
    Ok(inverse_c(term.matrix())? * C64::new(0.5 * term.hbar(), 0.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{max_abs_c, RVec};
    use crate::symplectic::SymplecticMatrix;

    fn kron_solve_lyapunov(a: &RMat, d: &RMat) -> RMat {
        // vec(AC + CAᵀ) = (I⊗A + A⊗I) vec C
        let n = a.nrows();
        let id = RMat::identity(n, n);
        let k = id.kronecker(a) + a.kronecker(&id);
        let rhs = RVec::from_column_slice((-d).as_slice());
        let sol = k.lu().solve(&rhs).unwrap();
        RMat::from_column_slice(n, n, sol.as_slice())
    }

    #[test]
    fn closed_flow_and_pure_noise() {
        let b = RMat::from_row_slice(2, 2, &[2.0, 0.3, 0.3, 1.0]);
        let cm = channel_matrices(&LindbladChannel::new(b.clone(), vec![], 1.0).unwrap()).unwrap();
        assert_eq!(cm.d, RMat::zeros(2, 2));
        assert!(max_abs(&(cm.a - symplectic_form(1) * b)) < 1e-15);
        let l = CVec::from_vec(vec![C64::new(0.5, 0.0), C64::new(-0.2, 0.0)]);
        let cm = channel_matrices(&LindbladChannel::new(RMat::zeros(2, 2), vec![l], 0.7).unwrap())
            .unwrap();
        assert!(max_abs(&cm.a) < 1e-15);
        let want = RMat::from_row_slice(2, 2, &[0.25, -0.1, -0.1, 0.04]) * 0.7;
        assert!(max_abs(&(cm.d - want)) < 1e-15);
    }

    #[test]
    fn damped_oscillator_matrices() {
        let kappa = 0.3;
        let cm = channel_matrices(&LindbladChannel::damped_oscillator(1, kappa, 0.0, 1.0).unwrap())
            .unwrap();
        let want_a = symplectic_form(1) - RMat::identity(2, 2) * (kappa / 2.0);
        assert!(max_abs(&(cm.a - want_a)) < 1e-15);
        assert!(max_abs(&(cm.d - RMat::identity(2, 2) * (kappa / 2.0))) < 1e-15);
    }

    #[test]
    fn closed_cases() {
        let cm =
            channel_matrices(&LindbladChannel::new(RMat::identity(2, 2), vec![], 1.0).unwrap())
                .unwrap();
        let c0 = to_complex(&RMat::from_row_slice(2, 2, &[2.0, 0.4, 0.4, 0.7]));
        assert_eq!(evolve_covariance(&c0, &cm, 0.0).unwrap(), c0);
        let t = 0.8;
        let r = to_complex(SymplecticMatrix::rotation(1, t).matrix());
        let want = &r * &c0 * r.transpose();
        assert!(max_abs_c(&(evolve_covariance(&c0, &cm, t).unwrap() - want)) < 1e-13);
        assert!(matches!(
            evolve_covariance(&c0, &cm, -1.0),
            Err(Error::NegativeTime(_))
        ));
        let lr = CVec::from_vec(vec![C64::new(0.5, 0.0), C64::new(0.2, 0.0)]);
        let cmr =
            channel_matrices(&LindbladChannel::new(RMat::zeros(2, 2), vec![lr], 1.0).unwrap())
                .unwrap();
        let got = evolve_covariance(&c0, &cmr, 1.7).unwrap();
        assert!(max_abs_c(&(got - (&c0 + to_complex(&cmr.d) * C64::new(1.7, 0.0)))) < 1e-13);
    }

    #[test]
    fn vacuum_relaxes_to_stationary_state() {
        let ch = LindbladChannel::damped_oscillator(1, 0.5, 0.4, 1.0).unwrap();
        let cm = channel_matrices(&ch).unwrap();
        let cinf = kron_solve_lyapunov(&cm.a, &cm.d);
        let term = ComplexGaussianTerm::real(
            1.0,
            &RMat::identity(2, 2),
            &RVec::from_vec(vec![1.0, -0.5]),
            1.0,
        )
        .unwrap();
        let evolved = evolve_term(&term, &cm, 80.0).unwrap();
        let c = term_covariance(&evolved).unwrap();
        assert!(max_abs_c(&(c - to_complex(&cinf))) < 1e-10);
        assert!((cinf[(0, 0)] - 0.5 * (2.0 * 0.4 + 1.0)).abs() < 1e-12);
        assert!(evolved.center().norm() < 1e-6);
    }

    #[test]
    fn zero_temperature_damping_keeps_vacuum() {
        let cm = channel_matrices(&LindbladChannel::damped_oscillator(1, 0.7, 0.0, 0.3).unwrap())
            .unwrap();
        let term =
            ComplexGaussianTerm::real(1.0, &RMat::identity(2, 2), &RVec::zeros(2), 0.3).unwrap();
        let e = evolve_term(&term, &cm, 2.5).unwrap();
        assert!(max_abs_c(&(e.matrix() - CMat::identity(2, 2))) < 1e-12);
    }

    #[test]
    fn real_terms_stay_real() {
        let cm = channel_matrices(&LindbladChannel::damped_oscillator(2, 0.2, 0.3, 1.0).unwrap())
            .unwrap();
        let c0 = to_complex(&(RMat::identity(4, 4) * 0.8));
        for t in [0.1, 1.0, 3.0] {
            assert!(max_abs(&im(&evolve_covariance(&c0, &cm, t).unwrap())) == 0.0);
        }
    }
}
