//! Oracle-comparison suite: one runner per acceptance criterion.
//!
//! Each runner returns named measurements with their bounds; a criterion
//! passes when every measurement is within bound and no step errored.

use std::f64::consts::PI;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cat::{
    cat_wigner, classify_fringes, interference_matrices, interference_term, normal_form,
    reduced_im_g, FringeClass, PureCat,
};
use crate::error::Result;
use crate::kerr::{
    binary_kerr_state, conditional_cat, envelope_fwhm, kerr_cat, kerr_coefficients,
    kerr_cross_terms, GaussianMixed, LinearOp, ThermalState,
};
use crate::linalg::{
    expm, im, max_abs, max_abs_c, symmetrize, symplectic_form, to_complex, CMat, CVec, RMat, RVec,
    C64, I,
};
use crate::lindblad::{
    channel_matrices, check_signature_preservation, evolve_covariance, evolve_state, evolve_term,
    term_covariance, LindbladChannel,
};
use crate::oracle::{
    auto_truncate, fock_cat, fock_kerr, fock_thermal, fock_wigner_grid, DEFAULT_DIM,
};
use crate::semiclassical::{kho_compare, KhoSetup};
use crate::states::{sample_grid, Axis, GaussianPure, GaussianSumState, WignerGrid};
use crate::symplectic::{euler_decompose, PhaseVector, SymplecticMatrix};

pub const DEFAULT_SEED: u64 = 20240001;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Bound {
    AtMost(f64),
    AtLeast(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metric {
    pub name: String,
    pub value: f64,
    pub bound: Bound,
}

impl Metric {
    pub fn at_most(name: &str, value: f64, limit: f64) -> Self {
        Self {
            name: name.into(),
            value,
            bound: Bound::AtMost(limit),
        }
    }

    pub fn at_least(name: &str, value: f64, limit: f64) -> Self {
        Self {
            name: name.into(),
            value,
            bound: Bound::AtLeast(limit),
        }
    }

    pub fn ok(&self) -> bool {
        match self.bound {
            Bound::AtMost(l) => self.value <= l,
            Bound::AtLeast(l) => self.value >= l,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriterionReport {
    pub id: String,
    pub title: String,
    pub metrics: Vec<Metric>,
    pub error: Option<String>,
    pub seconds: f64,
}

impl CriterionReport {
    pub fn passed(&self) -> bool {
        self.error.is_none() && self.metrics.iter().all(Metric::ok)
    }

    pub fn metric(&self, name: &str) -> Option<&Metric> {
        self.metrics.iter().find(|m| m.name == name)
    }

    /// `AC-n PASS|FAIL title: name=value (bound), ...`
    pub fn summary_line(&self) -> String {
        let status = if self.passed() { "PASS" } else { "FAIL" };
        let mut parts: Vec<String> = self
            .metrics
            .iter()
            .map(|m| {
                let (op, l) = match m.bound {
                    Bound::AtMost(l) => ("<=", l),
                    Bound::AtLeast(l) => (">=", l),
                };
                let flag = if m.ok() { "" } else { " !" };
                format!("{}={:.3e} ({op} {:.1e}){flag}", m.name, m.value, l)
            })
            .collect();
        if let Some(e) = &self.error {
            parts.push(format!("error: {e}"));
        }
        format!(
            "{} {} {} [{:.1}s]: {}",
            self.id,
            status,
            self.title,
            self.seconds,
            parts.join(", ")
        )
    }
}

fn run(id: &str, title: &str, f: impl FnOnce() -> Result<Vec<Metric>>) -> CriterionReport {
    let start = Instant::now();
    let out = f();
    let seconds = start.elapsed().as_secs_f64();
    let (metrics, error) = match out {
        Ok(m) => (m, None),
        Err(e) => (Vec::new(), Some(e.to_string())),
    };
    CriterionReport {
        id: id.into(),
        title: title.into(),
        metrics,
        error,
        seconds,
    }
}

fn pv(v: &[f64]) -> PhaseVector {
    PhaseVector::new(v.to_vec()).expect("finite entries")
}

fn grid_axes() -> Result<(Axis, Axis)> {
    Ok((Axis::new(-5.0, 5.0, 41)?, Axis::new(-5.0, 5.0, 41)?))
}

fn grid_deviation(a: &WignerGrid, b: &WignerGrid) -> f64 {
    a.values
        .iter()
        .zip(&b.values)
        .fold(0.0, |m, (x, y)| m.max((x - y).abs()))
}

fn random_phase_amplitude(rng: &mut ChaCha8Rng) -> C64 {
    C64::from_polar(rng.gen_range(0.3..1.0), rng.gen_range(-PI..PI))
}

/// A random pure Gaussian with `e^{|r|} ≤ e^{max_log_squeeze}` and `|ζ| ≤ radius`.
pub fn random_gaussian(
    n: usize,
    max_log_squeeze: f64,
    radius: f64,
    hbar: f64,
    rng: &mut ChaCha8Rng,
) -> Result<GaussianPure> {
    let s = SymplecticMatrix::random(n, max_log_squeeze, rng);
    let mut z: Vec<f64> = (0..2 * n).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let norm = z.iter().map(|v| v * v).sum::<f64>().sqrt().max(1e-12);
    let r = radius * rng.gen_range(0.0f64..1.0).powf(1.0 / (2 * n) as f64);
    z.iter_mut().for_each(|v| *v *= r / norm);
    GaussianPure::new(s, PhaseVector::new(z)?, hbar)
}

pub fn random_cat(n: usize, hbar: f64, rng: &mut ChaCha8Rng) -> Result<PureCat> {
    let g1 = random_gaussian(n, 1.0, 3.0 * hbar.sqrt(), hbar, rng)?;
    let g2 = random_gaussian(n, 1.0, 3.0 * hbar.sqrt(), hbar, rng)?;
    PureCat::new(
        random_phase_amplitude(rng),
        random_phase_amplitude(rng),
        g1,
        g2,
    )
}

/// Closed-form cat Wigner grids against the Fock-space parity oracle.
pub fn ac1(seed: u64) -> CriterionReport {
    run("AC-1", "cat closed form vs Fock oracle", || {
        let start = Instant::now();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (qa, pa) = grid_axes()?;
        let mut worst: f64 = 0.0;
        let mut max_dim = 0;
        for _ in 0..10 {
            let cat = random_cat(1, 1.0, &mut rng)?;
            let closed = sample_grid(&cat_wigner(&cat)?, &[qa, pa])?;
            let (ket, dim) = auto_truncate(DEFAULT_DIM, |d| fock_cat(&cat, d))?;
            max_dim = max_dim.max(dim);
            let oracle = fock_wigner_grid(&ket.density(), &qa, &pa)?;
            worst = worst.max(grid_deviation(&closed, &oracle) / closed.max_abs());
        }
        Ok(vec![
            Metric::at_most("max_error_over_peak", worst, 1e-6),
            Metric::at_most("fock_dim", max_dim as f64, crate::oracle::MAX_DIM as f64),
            Metric::at_most("seconds", start.elapsed().as_secs_f64(), 60.0),
        ])
    })
}

fn sorted(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_by(f64::total_cmp);
    v
}

/// Normal form of random symplectic pairs.
pub fn ac2(seed: u64) -> CriterionReport {
    run("AC-2", "normal form of random pairs", || {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut spectrum: f64 = 0.0;
        let mut det: f64 = 0.0;
        let mut symp: f64 = 0.0;
        let mut residual: f64 = 0.0;
        for n in 1..=3 {
            let j = to_complex(&symplectic_form(n));
            for _ in 0..100 {
                let u = SymplecticMatrix::random(n, 1.0, &mut rng);
                let v = SymplecticMatrix::random(n, 1.0, &mut rng);
                let nf = normal_form(&u, &v)?;
                residual = residual.max(nf.residual);
                let eig = symmetrize(&reduced_im_g(&u, &v)?)
                    .symmetric_eigen()
                    .eigenvalues;
                let got = sorted(eig.iter().cloned().collect());
                let want = sorted(nf.thetas.iter().flat_map(|&t| [t, -t]).collect());
                for (a, b) in got.iter().zip(&want) {
                    spectrum = spectrum.max((a - b).abs());
                }
                let (_, g) = interference_matrices(&u, &v)?;
                det = det.max((g.determinant() - 1.0).norm());
                symp = symp.max(max_abs_c(&(&g * &j * g.transpose() - &j)));
            }
        }
        Ok(vec![
            Metric::at_most("spectrum_error", spectrum, 1e-10),
            Metric::at_most("det_g_error", det, 1e-10),
            Metric::at_most("symplectic_error", symp, 1e-10),
            Metric::at_most("normal_form_residual", residual, 1e-10),
        ])
    })
}

/// Equal branch matrices give a purely linear fringe phase.
pub fn ac3(seed: u64) -> CriterionReport {
    run("AC-3", "degenerate pair U = V", || {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut im_g: f64 = 0.0;
        let mut not_linear = 0usize;
        for n in 1..=3 {
            for _ in 0..100 {
                let u = SymplecticMatrix::random(n, 1.0, &mut rng);
                let (_, g) = interference_matrices(&u, &u)?;
                im_g = im_g.max(max_abs(&im(&g)));
                if classify_fringes(&normal_form(&u, &u)?, 1e-9) != FringeClass::Linear {
                    not_linear += 1;
                }
            }
        }
        Ok(vec![
            Metric::at_most("max_abs_im_g", im_g, 1e-12),
            Metric::at_most("non_linear_classifications", not_linear as f64, 0.0),
        ])
    })
}

fn random_channel(n: usize, hbar: f64, rng: &mut ChaCha8Rng) -> Result<LindbladChannel> {
    let b = RMat::from_fn(2 * n, 2 * n, |_, _| rng.gen_range(-1.0..1.0));
    let lambdas = (0..2)
        .map(|_| {
            CVec::from_fn(2 * n, |_, _| {
                C64::new(rng.gen_range(-0.6..0.6), rng.gen_range(-0.6..0.6))
            })
        })
        .collect();
    LindbladChannel::new(symmetrize(&b), lambdas, hbar)
}

fn rel(a: &CMat, b: &CMat) -> f64 {
    max_abs_c(&(a - b)) / max_abs_c(b).max(f64::MIN_POSITIVE)
}

/// Covariance evolution against its differential equation and closed cases.
pub fn ac4(seed: u64) -> CriterionReport {
    run("AC-4", "Lindblad covariance solution", || {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let hbar = 1.0;
        let ch = random_channel(2, hbar, &mut rng)?;
        let cm = channel_matrices(&ch)?;
        let cat = random_cat(2, hbar, &mut rng)?;
        let c0 = term_covariance(&interference_term(&cat)?.complex_term()?)?;
        let (a, d) = (to_complex(&cm.a), to_complex(&cm.d));
        let delta = 1e-4;
        let mut fd: f64 = 0.0;
        let mut semigroup: f64 = 0.0;
        for _ in 0..10 {
            let t = rng.gen_range(0.1..3.0);
            let c = evolve_covariance(&c0, &cm, t)?;
            let deriv = (evolve_covariance(&c0, &cm, t + delta)?
                - evolve_covariance(&c0, &cm, t - delta)?)
                / C64::new(2.0 * delta, 0.0);
            let rhs = &a * &c + &c * a.transpose() + &d;
            fd = fd.max(rel(&deriv, &rhs));
            let t2 = rng.gen_range(0.1..2.0);
            let once = evolve_covariance(&c0, &cm, t + t2)?;
            let twice = evolve_covariance(&c, &cm, t2)?;
            semigroup = semigroup.max(rel(&twice, &once));
        }
        let at_zero = max_abs_c(&(evolve_covariance(&c0, &cm, 0.0)? - &c0));
        // A = 0: real Lindblad vectors and no Hamiltonian
        let real_l = CVec::from_fn(4, |_, _| C64::new(rng.gen_range(-0.6..0.6), 0.0));
        let pure_noise = channel_matrices(&LindbladChannel::new(
            RMat::zeros(4, 4),
            vec![real_l],
            hbar,
        )?)?;
        let t = 1.3;
        let want = &c0 + to_complex(&pure_noise.d) * C64::new(t, 0.0);
        let no_drift = rel(&evolve_covariance(&c0, &pure_noise, t)?, &want);
        // D = 0: closed harmonic flow
        let closed = channel_matrices(&LindbladChannel::new(RMat::identity(4, 4), vec![], hbar)?)?;
        let r = to_complex(SymplecticMatrix::rotation(2, t).matrix());
        let no_noise = rel(
            &evolve_covariance(&c0, &closed, t)?,
            &(&r * &c0 * r.transpose()),
        );
        Ok(vec![
            Metric::at_most("finite_difference_rel", fd, 1e-6),
            Metric::at_most("semigroup_rel", semigroup, 1e-10),
            Metric::at_most("t0_error", at_zero, 0.0),
            Metric::at_most("zero_drift_rel", no_drift, 1e-13),
            Metric::at_most("zero_noise_rel", no_noise, 1e-13),
        ])
    })
}

/// `∫₀ᵗ e^{As} D e^{Aᵀs} ds` by composite Simpson quadrature.
fn noise_by_simpson(a: &RMat, d: &RMat, t: f64, intervals: usize) -> RMat {
    let h = t / intervals as f64;
    let f = |s: f64| {
        let e = expm(&(a * s));
        &e * d * e.transpose()
    };
    let mut acc = f(0.0) + f(t);
    for k in 1..intervals {
        let w = if k % 2 == 1 { 4.0 } else { 2.0 };
        acc += f(k as f64 * h) * w;
    }
    acc * (h / 3.0)
}

/// The squeezed–coherent cat used for the decoherence checks.
pub fn decoherence_cat(hbar: f64) -> Result<PureCat> {
    let g1 = GaussianPure::new(SymplecticMatrix::squeeze(&[1.8])?, pv(&[-1.5, 0.3]), hbar)?;
    let g2 = GaussianPure::coherent(pv(&[1.5, -0.2]), hbar)?;
    PureCat::new(C64::new(1.0, 0.0), C64::new(0.0, 1.0), g1, g2)
}

/// Signature preservation and a direct convolution of the interference term.
pub fn ac5() -> CriterionReport {
    run("AC-5", "signature preservation under damping", || {
        let hbar = 1.0;
        let cat = decoherence_cat(hbar)?;
        let ch = LindbladChannel::damped_oscillator(1, 0.4, 0.3, hbar)?;
        let times = [0.1, 0.25, 0.5, 1.0, 2.0];
        let mut violations = 0usize;
        for term in cat_wigner(&cat)?.terms() {
            let rep = check_signature_preservation(&term_covariance(term)?, &ch, &times)?;
            violations += rep.violations.len();
        }
        let cm = channel_matrices(&ch)?;
        let t = 0.5;
        let e = expm(&(&cm.a * t));
        let sigma = symmetrize(&noise_by_simpson(&cm.a, &cm.d, t, 2000));
        let sigma_inv = crate::linalg::inverse_r(&sigma)?;
        let norm = 1.0 / (2.0 * PI * sigma.determinant().sqrt());
        let w0 = interference_term(&cat)?.complex_term()?;
        let evolved = evolve_term(&w0, &cm, t)?;
        let eta = interference_term(&cat)?.eta;
        let step = 0.02;
        let half = 400;
        let mut worst: f64 = 0.0;
        let mut peak: f64 = 0.0;
        for off in [[0.0, 0.0], [0.4, 0.3], [-0.5, 0.2], [0.1, -0.6], [0.8, 0.8]] {
            let x = RVec::from_vec(vec![eta.q()[0] + off[0], eta.p()[0] + off[1]]);
            let direct: C64 = (0..2 * half + 1)
                .into_par_iter()
                .map(|i| {
                    let yq = eta.q()[0] + (i as f64 - half as f64) * step;
                    let mut row = C64::new(0.0, 0.0);
                    for k in 0..=2 * half {
                        let yp = eta.p()[0] + (k as f64 - half as f64) * step;
                        let y = RVec::from_vec(vec![yq, yp]);
                        let r = &x - &e * &y;
                        let kern = norm * (-0.5 * r.dot(&(&sigma_inv * &r))).exp();
                        row += w0.eval(&[yq, yp]) * kern;
                    }
                    row
                })
                .sum::<C64>()
                * (step * step);
            let want = evolved.eval(x.as_slice());
            worst = worst.max((direct - want).norm());
            peak = peak.max(want.norm());
        }
        Ok(vec![
            Metric::at_most("signature_violations", violations as f64, 0.0),
            Metric::at_most("convolution_error_over_peak", worst / peak, 1e-6),
        ])
    })
}

fn gcd(a: u32, b: u32) -> u32 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Kerr propagator decomposition into rotations.
pub fn ac6() -> CriterionReport {
    run("AC-6", "Kerr coefficients", || {
        let mut recon: f64 = 0.0;
        let mut moduli: f64 = 0.0;
        let mut cases = 0usize;
        for nu in 1..=12u32 {
            for mu in 1..=2 * nu {
                if gcd(mu, nu) != 1 {
                    continue;
                }
                cases += 1;
                let kc = kerr_coefficients(mu, nu)?;
                for n in 0..(2 * kc.period as u64) {
                    recon = recon.max((kc.reconstruct(n) - kc.phase(n)).norm());
                }
                let sup = kc.support();
                let r0 = kc.coeffs[sup[0]].norm();
                for &k in &sup {
                    moduli = moduli.max((kc.coeffs[k].norm() - r0).abs());
                }
            }
        }
        // ½(1 + iR̂₀) ρ₀ (1 − iR̂₀): c₀ = 1/√2 up to phase, c₁ = i c₀, R̂₀ the parity
        let kc = kerr_coefficients(1, 2)?;
        let binary = (kc.component_count() as f64 - 2.0).abs()
            + (kc.coeffs[0].norm() - std::f64::consts::FRAC_1_SQRT_2).abs()
            + (kc.coeffs[1] / kc.coeffs[0] - I).norm()
            + (kc.angle(1) - PI).abs();
        Ok(vec![
            Metric::at_most("reconstruction_error", recon, 1e-12),
            Metric::at_most("modulus_spread", moduli, 1e-12),
            Metric::at_most("binary_weight_error", binary, 1e-12),
            Metric::at_least("coprime_cases", cases as f64, 1.0),
        ])
    })
}

/// The ν = 4 displaced thermal input used for the compass checks.
pub fn compass_input(nbar: f64) -> Result<ThermalState> {
    ThermalState::new(nbar, pv(&[2.0, 0.0]), 1.0)
}

/// Mixed compass state against the Fock-space Kerr oracle.
pub fn ac7() -> CriterionReport {
    run("AC-7", "mixed compass state", || {
        let (qa, pa) = grid_axes()?;
        let ts = compass_input(0.5)?;
        let rho: GaussianMixed = (&ts).into();
        let closed = sample_grid(&kerr_cat(&rho, 1, 4)?, &[qa, pa])?;
        let (fock, dim) = auto_truncate(DEFAULT_DIM, |d| fock_thermal(&ts, d))?;
        let oracle = fock_wigner_grid(&fock_kerr(&fock, 1, 4), &qa, &pa)?;
        let compass = grid_deviation(&closed, &oracle) / closed.max_abs();
        let two = sample_grid(&kerr_cat(&rho, 1, 2)?, &[qa, pa])?;
        let binary = grid_deviation(&sample_grid(&binary_kerr_state(&ts)?, &[qa, pa])?, &two);
        let mut last = f64::INFINITY;
        let mut increases = 0usize;
        for nbar in [0.0, 0.5, 1.0, 2.0] {
            let rho: GaussianMixed = (&compass_input(nbar)?).into();
            let cross = kerr_cross_terms(&rho, 1, 2, 1e-9)?;
            let f = envelope_fwhm(&cross[0].term, &RVec::from_vec(vec![1.0, 0.0]));
            if !(f < last) {
                increases += 1;
            }
            last = f;
        }
        Ok(vec![
            Metric::at_most("compass_error_over_peak", compass, 1e-6),
            Metric::at_most("binary_pointwise_error", binary, 1e-12),
            Metric::at_most("fwhm_non_decreasing_steps", increases as f64, 0.0),
            Metric::at_most("fock_dim", dim as f64, crate::oracle::MAX_DIM as f64),
        ])
    })
}

/// Kicked-oscillator section and fidelity at the reference parameters.
pub fn ac8() -> CriterionReport {
    run("AC-8", "kicked oscillator swarm vs exact", || {
        let start = Instant::now();
        let cmp = kho_compare(&KhoSetup::reference(), false)?;
        Ok(vec![
            Metric::at_most("section_l2", cmp.section_l2, 0.10),
            Metric::at_least("fidelity", cmp.fidelity, 0.98),
            Metric::at_most("seconds", start.elapsed().as_secs_f64(), 300.0),
        ])
    })
}

/// Normalization, reality and decomposition sanity over many assembled objects.
pub fn ac9(seed: u64) -> CriterionReport {
    run("AC-9", "global sanity", || {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut states: Vec<GaussianSumState> = Vec::new();
        for n in 1..=3 {
            for _ in 0..10 {
                states.push(cat_wigner(&random_cat(
                    n,
                    rng.gen_range(0.2..1.5),
                    &mut rng,
                )?)?);
            }
        }
        let ch = LindbladChannel::damped_oscillator(1, 0.4, 0.3, 1.0)?;
        states.push(evolve_state(
            &cat_wigner(&decoherence_cat(1.0)?)?,
            &ch,
            1.0,
        )?);
        for nbar in [0.0, 0.5, 2.0] {
            let rho: GaussianMixed = (&compass_input(nbar)?).into();
            for (mu, nu) in [(1, 2), (1, 3), (1, 4), (3, 5)] {
                states.push(kerr_cat(&rho, mu, nu)?);
            }
            states.push(binary_kerr_state(&compass_input(nbar)?)?);
            let op = LinearOp::new(SymplecticMatrix::rotation(1, 0.9), pv(&[0.3, -0.4]))?;
            states.push(conditional_cat(&rho, &op, 1)?);
        }
        let mut integral: f64 = 0.0;
        let mut residue: f64 = 0.0;
        for st in &states {
            integral = integral.max((st.integral() - 1.0).norm());
            for _ in 0..20 {
                let x: Vec<f64> = (0..2 * st.n()).map(|_| rng.gen_range(-3.0..3.0)).collect();
                let (v, scale) = st.eval_with_scale(&x);
                if scale > 0.0 {
                    residue = residue.max(v.im.abs() / scale);
                }
            }
        }
        let mut euler: f64 = 0.0;
        for k in 0..300 {
            let s = SymplecticMatrix::random(1 + k % 3, 1.0, &mut rng);
            let d = euler_decompose(&s)?;
            euler = euler.max(max_abs(&(d.reconstruct() - s.matrix())));
        }
        Ok(vec![
            Metric::at_most("integral_error", integral, 1e-10),
            Metric::at_most("imaginary_residue", residue, 1e-10),
            Metric::at_most("euler_reconstruction", euler, 1e-10),
            Metric::at_least("states_checked", states.len() as f64, 1.0),
        ])
    })
}

/// Every criterion in order.
pub fn run_all(seed: u64) -> Vec<CriterionReport> {
    vec![
        ac1(seed),
        ac2(seed),
        ac3(seed),
        ac4(seed),
        ac5(),
        ac6(),
        ac7(),
        ac8(),
        ac9(seed),
    ]
}
