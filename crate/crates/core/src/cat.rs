//! Two-Gaussian superpositions `a|U, u⟩ + b|V, v⟩`.
//!
//! The Wigner function is two hills plus an interference term
//! `ℐ(x) = 2|K| Re[e^{i x∧ζ/ħ + iφ} 𝒢(x; G, η)]` with `η = (u+v)/2`, `ζ = u − v`
//! and `G = (UUᵀ+VVᵀ)⁻¹[2 − i(UUᵀ−VVᵀ)J]`.
//! The phase `φ` is computed exactly from the overlap integral, so it
//! includes every metaplectic sign.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{
    im, max_abs, max_abs_c, quad_form_r, re, sqrt_det, symplectic_form, to_complex, CMat, RMat,
    RVec, C64, I,
};
use crate::states::wavefunction::cross_wigner;
use crate::states::{
    same_hbar, wigner_pure, ComplexGaussianTerm, GaussianPure, GaussianSumState,
    GaussianWavefunction,
};
use crate::symplectic::{diagonalize_sst, wedge_raw, PhaseVector, SymplecticMatrix};

#[derive(Debug, Clone, PartialEq)]
pub struct PureCat {
    pub a: C64,
    pub b: C64,
    pub g1: GaussianPure,
    pub g2: GaussianPure,
}

impl PureCat {
    pub fn new(a: C64, b: C64, g1: GaussianPure, g2: GaussianPure) -> Result<Self> {
        if g1.n() != g2.n() {
            return Err(Error::DimensionMismatch {
                expected: 2 * g1.n(),
                found: 2 * g2.n(),
            });
        }
        same_hbar(g1.hbar(), g2.hbar())?;
        if a.norm() == 0.0 && b.norm() == 0.0 {
            return Err(Error::ZeroNorm(0.0));
        }
        Ok(Self { a, b, g1, g2 })
    }

    pub fn n(&self) -> usize {
        self.g1.n()
    }

    pub fn hbar(&self) -> f64 {
        self.g1.hbar()
    }

    /// Squared norm `|a|² + |b|² + 2 Re(a* b ⟨U,u|V,v⟩)`.
    pub fn norm_sqr(&self) -> Result<f64> {
        let ov = GaussianWavefunction::from_pure(&self.g1)?
            .overlap(&GaussianWavefunction::from_pure(&self.g2)?)?;
        Ok(self.a.norm_sqr() + self.b.norm_sqr() + 2.0 * (self.a.conj() * self.b * ov).re)
    }

    pub fn wavefunction(&self) -> Result<(GaussianWavefunction, GaussianWavefunction)> {
        Ok((
            GaussianWavefunction::from_pure(&self.g1)?.scaled(self.a),
            GaussianWavefunction::from_pure(&self.g2)?.scaled(self.b),
        ))
    }
}

/// Structured interference term.
#[derive(Debug, Clone, PartialEq)]
pub struct InterferenceTerm {
    pub k_magnitude: f64,
    pub global_phase: f64,
    pub g: CMat,
    pub eta: PhaseVector,
    pub zeta_rel: PhaseVector,
    pub hbar: f64,
}

impl InterferenceTerm {
    pub fn n(&self) -> usize {
        self.eta.n()
    }

    /// `|K| e^{iφ} e^{i x∧ζ/ħ} 𝒢(x; G, η)` as one folded term.
    pub fn complex_term(&self) -> Result<ComplexGaussianTerm> {
        let base = ComplexGaussianTerm::new(
            C64::from_polar(self.k_magnitude, self.global_phase),
            self.g.clone(),
            to_complex(&RMat::from_column_slice(
                2 * self.n(),
                1,
                self.eta.as_slice(),
            ))
            .column(0)
            .into_owned(),
            self.hbar,
        )?;
        base.times_wedge_phase(self.zeta_rel.as_vector())
    }

    /// `ℐ(x)` evaluated directly from the structured form.
    pub fn eval(&self, x: &PhaseVector) -> Result<f64> {
        self.eta.check_same(x)?;
        let d = x - &self.eta;
        let dc = to_complex(&RMat::from_column_slice(d.dim(), 1, d.as_slice()));
        let e = (dc.transpose() * &self.g * &dc)[(0, 0)];
        let pref = sqrt_det(&self.g)? / (std::f64::consts::PI * self.hbar).powi(self.n() as i32);
        let phase = I
            * (wedge_raw(x.as_vector(), self.zeta_rel.as_vector()) / self.hbar + self.global_phase);
        Ok(2.0 * self.k_magnitude * (phase.exp() * pref * (-e / self.hbar).exp()).re)
    }
}

/// `(|K|, G)` for the branch matrices `U`, `V`.
pub fn interference_matrices(u: &SymplecticMatrix, v: &SymplecticMatrix) -> Result<(f64, CMat)> {
    if u.n() != v.n() {
        return Err(Error::DimensionMismatch {
            expected: 2 * u.n(),
            found: 2 * v.n(),
        });
    }
    let n = u.n();
    let j = symplectic_form(n);
    let (um, vm) = (u.matrix(), v.matrix());
    let kmat = to_complex(&(um + vm)) + to_complex(&((um - vm) * &j)) * I;
    let det = kmat.determinant().norm();
    if det < 1e-12 * 4f64.powi(n as i32) {
        return Err(Error::DegenerateOverlap(det));
    }
    let k_magnitude = 2f64.powi(n as i32) / det.sqrt();
    let uu = um * um.transpose();
    let vv = vm * vm.transpose();
    let sum_inv = crate::linalg::inverse_r(&(&uu + &vv))?;
    let two = RMat::identity(2 * n, 2 * n) * 2.0;
    let g = to_complex(&sum_inv) * (to_complex(&two) - to_complex(&((&uu - &vv) * &j)) * I);
    let g = crate::linalg::symmetrize_c(&g);
    let jc = to_complex(&j);
    let symp = max_abs_c(&(&g * &jc * g.transpose() - &jc));
    if symp > 1e-8 * max_abs_c(&g).powi(2).max(1.0) {
        return Err(Error::NotSymplectic(symp));
    }
    Ok((k_magnitude, g))
}

/// Exact `⟨U,u|R̂_x|V,v⟩/(πħ)ⁿ` as a single complex Gaussian term.
pub fn overlap_symbol(g1: &GaussianPure, g2: &GaussianPure) -> Result<ComplexGaussianTerm> {
    cross_wigner(
        &GaussianWavefunction::from_pure(g1)?,
        &GaussianWavefunction::from_pure(g2)?,
    )
}

pub fn interference_term(cat: &PureCat) -> Result<InterferenceTerm> {
    let (k_magnitude, g) = interference_matrices(cat.g1.s(), cat.g2.s())?;
    let u = cat.g1.zeta();
    let v = cat.g2.zeta();
    let eta = (u + v).scale(0.5);
    let zeta_rel = u - v;
    let c = overlap_symbol(&cat.g1, &cat.g2)?;
    let c_phase = c.log_eval(eta.as_slice()).im;
    let hbar = cat.hbar();
    let phi = if cat.a.norm() > 0.0 && cat.b.norm() > 0.0 {
        (cat.a.conj() * cat.b).arg()
    } else {
        0.0
    };
    let global_phase = wrap(
        phi + c_phase
            - wedge_raw(eta.as_vector(), zeta_rel.as_vector()) / hbar
            - sqrt_det(&g)?.arg(),
    );
    Ok(InterferenceTerm {
        k_magnitude,
        global_phase,
        g,
        eta,
        zeta_rel,
        hbar,
    })
}

fn wrap(a: f64) -> f64 {
    let t = std::f64::consts::TAU;
    let r = a.rem_euclid(t);
    if r > std::f64::consts::PI {
        r - t
    } else {
        r
    }
}

/// `(2|K|/(πħ)ⁿ) exp[−(x−η)·Re G (x−η)/ħ]`.
pub fn envelope(term: &InterferenceTerm, x: &PhaseVector) -> Result<f64> {
    term.eta.check_same(x)?;
    let d = (x - &term.eta).into_vector();
    let pref = 2.0 * term.k_magnitude / (std::f64::consts::PI * term.hbar).powi(term.n() as i32);
    Ok(pref * (-quad_form_r(&re(&term.g), &d) / term.hbar).exp())
}

/// Phase of the interference term, `φ + x∧ζ/ħ − (x−η)·Im G (x−η)/ħ`.
///
/// `ℐ(x) = envelope(x) · cos(oscillation_phase(x))` holds exactly.
pub fn oscillation_phase(term: &InterferenceTerm, x: &PhaseVector) -> Result<f64> {
    term.eta.check_same(x)?;
    let d = (x - &term.eta).into_vector();
    Ok(
        term.global_phase + wedge_raw(x.as_vector(), term.zeta_rel.as_vector()) / term.hbar
            - quad_form_r(&im(&term.g), &d) / term.hbar,
    )
}

/// Canonical reduction of the quadratic fringe phase to `Σ θᵢ (Qᵢ² − Pᵢ²)`.
#[derive(Debug, Clone, PartialEq)]
pub struct NormalForm {
    pub thetas: Vec<f64>,
    pub transform: SymplecticMatrix,
    pub base_change: SymplecticMatrix,
    pub residual: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FringeClass {
    Linear,
    Hyperbolic,
}

/// Normal coordinates are `Z = transform · base_change⁻¹ · (x − η)`, in which
/// the quadratic part of the phase, `−(x−η)·Im G (x−η)`, becomes `Zᵀ diag(Ξ, −Ξ) Z`.
pub fn normal_form(u: &SymplecticMatrix, v: &SymplecticMatrix) -> Result<NormalForm> {
    let n = u.n();
    let up = v.inverse().compose(u)?;
    let (_, gp) = interference_matrices(&up, &SymplecticMatrix::identity(n))?;
    let form = -im(&gp);
    let diag = diagonalize_sst(&up)?;
    let thetas: Vec<f64> = diag.lambdas.iter().map(|l| (l - 1.0) / (l + 1.0)).collect();
    let h = SymplecticMatrix::rotation(n, std::f64::consts::FRAC_PI_4);
    let mut t = h.matrix() * diag.o.matrix().transpose();
    let mut target = RVec::zeros(2 * n);
    for (k, th) in thetas.iter().enumerate() {
        target[k] = *th;
        target[n + k] = -th;
    }
    let target = RMat::from_diagonal(&target);
    let reduced = &t * &form * t.transpose();
    let r1 = max_abs(&(&reduced - &target));
    let j = symplectic_form(n);
    let swapped = &j * &reduced * j.transpose();
    let r2 = max_abs(&(&swapped - &target));
    let residual = if r2 < r1 {
        t = &j * t;
        r2
    } else {
        r1
    };
    Ok(NormalForm {
        thetas,
        transform: SymplecticMatrix::new_unchecked(t),
        base_change: v.clone(),
        residual,
    })
}

/// `Linear` iff every `θᵢ ≤ tol` (inclusive).
pub fn classify_fringes(nf: &NormalForm, tol: f64) -> FringeClass {
    if nf.thetas.iter().all(|&t| t <= tol) {
        FringeClass::Linear
    } else {
        FringeClass::Hyperbolic
    }
}

/// Normalized Wigner function: two hills and the interference term as a conjugate pair.
pub fn cat_wigner(cat: &PureCat) -> Result<GaussianSumState> {
    let hbar = cat.hbar();
    let mut st = GaussianSumState::empty(cat.n(), hbar)?;
    let (a2, b2) = (cat.a.norm_sqr(), cat.b.norm_sqr());
    if a2 > 0.0 {
        st.push(wigner_pure(&cat.g1).scaled(C64::new(a2, 0.0)))?;
    }
    if b2 > 0.0 {
        st.push(wigner_pure(&cat.g2).scaled(C64::new(b2, 0.0)))?;
    }
    if a2 > 0.0 && b2 > 0.0 {
        let it = interference_term(cat)?;
        let t = it
            .complex_term()?
            .scaled(C64::new(cat.a.norm() * cat.b.norm(), 0.0));
        st.push(t.conj())?;
        st.push(t)?;
    }
    let norm = st.integral().re;
    if !(norm > 1e-12 * (a2 + b2)) {
        return Err(Error::ZeroNorm(norm));
    }
    Ok(st.scaled(1.0 / norm))
}

/// Hessian of the oscillation phase, `−2 Im G/ħ`.
pub fn phase_hessian(term: &InterferenceTerm) -> RMat {
    -im(&term.g) * (2.0 / term.hbar)
}

/// Inverse of `Re G`, which equals the average of `UUᵀ` and `VVᵀ`.
pub fn envelope_covariance(term: &InterferenceTerm) -> Result<RMat> {
    crate::linalg::inverse_r(&re(&term.g))
}

/// Imaginary part of `G` after the pullback `x → V x`.
pub fn reduced_im_g(u: &SymplecticMatrix, v: &SymplecticMatrix) -> Result<RMat> {
    let up = v.inverse().compose(u)?;
    let (_, gp) = interference_matrices(&up, &SymplecticMatrix::identity(u.n()))?;
    Ok(im(&gp))
}
