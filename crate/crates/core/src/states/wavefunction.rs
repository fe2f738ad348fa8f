//! Position-representation Gaussian wavefunctions and their Weyl symbols.

use super::{check_hbar, same_hbar, ComplexGaussianTerm, GaussianPure, QuadExp};
use crate::error::{Error, Result};
use crate::linalg::{
    blocks, from_blocks, im, inverse_r, re, sqrtm_spd, symmetrize, to_complex, to_complex_vec,
    CMat, CVec, RMat, RVec, C64, I,
};
use crate::symplectic::{wedge_raw, PhaseVector, SymplecticMatrix};

/// `ψ(q) = exp(−qᵀQq + lᵀq + c)` on `ℝⁿ`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianWavefunction {
    exp: QuadExp,
    hbar: f64,
}

impl GaussianWavefunction {
    pub fn from_quadexp(exp: QuadExp, hbar: f64) -> Result<Self> {
        check_hbar(hbar)?;
        super::quadexp::check_re_positive(&exp.quad)?;
        Ok(Self { exp, hbar })
    }

    pub fn vacuum(n: usize, hbar: f64) -> Result<Self> {
        check_hbar(hbar)?;
        let q = CMat::identity(n, n) * C64::new(0.5 / hbar, 0.0);
        let c = -0.25 * n as f64 * (std::f64::consts::PI * hbar).ln();
        Ok(Self {
            exp: QuadExp::new(q, CVec::zeros(n), C64::new(c, 0.0)),
            hbar,
        })
    }

    /// `|S, ζ⟩` with the phase convention `⟨0|S, 0⟩ > 0`.
    pub fn from_pure(g: &GaussianPure) -> Result<Self> {
        let n = g.n();
        let hbar = g.hbar();
        let gamma = g.wigner_matrix();
        let (_, gqp, _, gpp) = blocks(&gamma);
        let y = symmetrize(&inverse_r(&gpp)?);
        let x = symmetrize(&(-(gqp * &y)));
        // ψ ∝ exp(i qᵀ(X + iY)q / 2ħ)
        let q = (to_complex(&y) - to_complex(&x) * I) * C64::new(0.5 / hbar, 0.0);
        let mut psi = Self {
            exp: QuadExp::new(q, CVec::zeros(n), C64::new(0.0, 0.0)),
            hbar,
        };
        let norm = psi.norm_sqr()?;
        psi.exp.constant -= 0.5 * norm.ln();
        let ov = Self::vacuum(n, hbar)?.overlap(&psi)?;
        psi.exp.constant -= I * ov.arg();
        Ok(psi.translated(g.zeta().as_vector()))
    }

    pub fn quadexp(&self) -> &QuadExp {
        &self.exp
    }

    pub fn hbar(&self) -> f64 {
        self.hbar
    }

    pub fn n(&self) -> usize {
        self.exp.dim()
    }

    pub fn eval(&self, q: &[f64]) -> C64 {
        self.exp.eval(q)
    }

    /// `T̂_ξ ψ(q) = e^{i ξ_p·(q − ξ_q/2)/ħ} ψ(q − ξ_q)`.
    pub fn translated(&self, xi: &RVec) -> Self {
        let n = self.n();
        let xq = xi.rows(0, n).into_owned();
        let xp = xi.rows(n, n).into_owned();
        let shifted = self
            .exp
            .pullback(&CMat::identity(n, n), &to_complex_vec(&(-&xq)))
            .expect("square pullback");
        let mut exp = shifted;
        exp.lin += to_complex_vec(&xp) * (I / self.hbar);
        exp.constant -= I * xp.dot(&xq) / (2.0 * self.hbar);
        Self {
            exp,
            hbar: self.hbar,
        }
    }

    pub fn scaled(&self, c: C64) -> Self {
        let mut exp = self.exp.clone();
        exp.constant += c.ln();
        Self {
            exp,
            hbar: self.hbar,
        }
    }

    pub fn norm_sqr(&self) -> Result<f64> {
        Ok(self.exp.conj().mul(&self.exp)?.integral()?.re)
    }

    /// `⟨self|other⟩`.
    pub fn overlap(&self, other: &GaussianWavefunction) -> Result<C64> {
        same_hbar(self.hbar, other.hbar)?;
        self.exp.conj().mul(&other.exp)?.integral()
    }

    /// Wigner function as a single real Gaussian term.
    pub fn wigner(&self) -> Result<ComplexGaussianTerm> {
        cross_wigner(self, self)
    }

    /// Gaussian `(S, ζ)` and amplitude `c` with `ψ = c |S, ζ⟩`.
    pub fn to_pure(&self) -> Result<(GaussianPure, C64)> {
        let w = self.wigner()?;
        let m = symmetrize(&re(w.matrix()));
        let cov = inverse_r(&m)?;
        let s = SymplecticMatrix::with_tolerance(sqrtm_spd(&cov)?, 1e-8)?;
        let center = PhaseVector::from_vector(re_vec(w.center()))?;
        let g = GaussianPure::new(s, center, self.hbar)?;
        let amp = Self::from_pure(&g)?.overlap(self)?;
        Ok((g, amp))
    }
}

fn re_vec(v: &CVec) -> RVec {
    v.map(|z| z.re)
}

/// `(πħ)⁻ⁿ ⟨bra|R̂_x|ket⟩`, the Weyl symbol of `|ket⟩⟨bra|` divided by `(2πħ)ⁿ`.
pub fn cross_wigner(
    bra: &GaussianWavefunction,
    ket: &GaussianWavefunction,
) -> Result<ComplexGaussianTerm> {
    same_hbar(bra.hbar, ket.hbar)?;
    if bra.n() != ket.n() {
        return Err(Error::DimensionMismatch {
            expected: bra.n(),
            found: ket.n(),
        });
    }
    weyl_symbol_family(
        &ket.exp,
        &bra.exp,
        bra.n(),
        &QuadExp::constant(0, C64::new(0.0, 0.0)),
        bra.hbar,
    )
}

/// Weyl symbol of `∫ dξ w(ξ) |ket_ξ⟩⟨bra_ξ|`, normalized like a Wigner function.
///
/// `ket` and `bra` are functions of `(q, ξ)` with `q ∈ ℝⁿ`; `weight` is a function of `ξ`.
pub(crate) fn weyl_symbol_family(
    ket: &QuadExp,
    bra: &QuadExp,
    n: usize,
    weight: &QuadExp,
    hbar: f64,
) -> Result<ComplexGaussianTerm> {
    let m = weight.dim();
    if ket.dim() != n + m || bra.dim() != n + m {
        return Err(Error::DimensionMismatch {
            expected: n + m,
            found: ket.dim().max(bra.dim()),
        });
    }
    // Variables z = (q, p, y, ξ).
    let dim = 3 * n + m;
    let lift = |sign: f64| {
        let mut l = CMat::zeros(n + m, dim);
        for i in 0..n {
            l[(i, i)] = C64::new(1.0, 0.0);
            l[(i, 2 * n + i)] = C64::new(0.5 * sign, 0.0);
        }
        for j in 0..m {
            l[(n + j, 3 * n + j)] = C64::new(1.0, 0.0);
        }
        l
    };
    let zero = CVec::zeros(n + m);
    let mut f = ket.pullback(&lift(1.0), &zero)?;
    f = f.mul(&bra.conj().pullback(&lift(-1.0), &zero)?)?;
    let mut lw = CMat::zeros(m, dim);
    for j in 0..m {
        lw[(j, 3 * n + j)] = C64::new(1.0, 0.0);
    }
    f = f.mul(&weight.pullback(&lw, &CVec::zeros(m))?)?;
    let mut phase = CMat::zeros(dim, dim);
    for i in 0..n {
        phase[(n + i, 2 * n + i)] = I / (2.0 * hbar);
        phase[(2 * n + i, n + i)] = I / (2.0 * hbar);
    }
    f.add_exponent(
        &phase,
        &CVec::zeros(dim),
        C64::new(-(n as f64) * (2.0 * std::f64::consts::PI * hbar).ln(), 0.0),
    );
    let marg = f.marginalize_tail(n + m)?;
    ComplexGaussianTerm::from_quadexp(&marg, hbar)
}

/// `T̂_{a + Fξ} φ(q)` as a function of `(q, ξ)`.
pub(crate) fn translated_family(phi: &QuadExp, a: &RVec, f: &RMat, hbar: f64) -> Result<QuadExp> {
    let n = phi.dim();
    let m = f.ncols();
    if a.len() != 2 * n || f.nrows() != 2 * n {
        return Err(Error::DimensionMismatch {
            expected: 2 * n,
            found: a.len(),
        });
    }
    let (aq, ap) = (a.rows(0, n).into_owned(), a.rows(n, n).into_owned());
    let fq = f.rows(0, n).into_owned();
    let fp = f.rows(n, n).into_owned();
    // φ(q − a_q − F_q ξ)
    let mut l = CMat::zeros(n, n + m);
    l.view_mut((0, 0), (n, n)).copy_from(&CMat::identity(n, n));
    l.view_mut((0, n), (n, m)).copy_from(&to_complex(&(-&fq)));
    let mut out = phi.pullback(&l, &to_complex_vec(&(-&aq)))?;
    let dim = n + m;
    let mut quad = CMat::zeros(dim, dim);
    let mut lin = CVec::zeros(dim);
    let k = I / hbar;
    // i c_p·q/ħ with c_p = a_p + F_p ξ
    for i in 0..n {
        lin[i] += k * ap[i];
    }
    let cross = to_complex(&fp) * (-0.5 * k);
    quad.view_mut((0, n), (n, m)).copy_from(&cross);
    quad.view_mut((n, 0), (m, n)).copy_from(&cross.transpose());
    // −i c_p·c_q/(2ħ)
    let fpq = symmetrize(&(fp.transpose() * &fq));
    let block = to_complex(&fpq) * (0.5 * k);
    let mut qb = quad.view((n, n), (m, m)).into_owned();
    qb += block;
    quad.view_mut((n, n), (m, m)).copy_from(&qb);
    let lx = fp.transpose() * &aq + fq.transpose() * &ap;
    for j in 0..m {
        lin[n + j] += -0.5 * k * lx[j];
    }
    let c = -0.5 * k * ap.dot(&aq);
    out.add_exponent(&quad, &lin, c);
    Ok(out)
}

/// `⟨S₂⁻¹, 0|S₁, 0⟩ / |…|`: the phase in `M̂_{S₂} |S₁, 0⟩ = κ |S₂S₁, 0⟩`.
pub fn metaplectic_phase(s2: &SymplecticMatrix, s1: &SymplecticMatrix, hbar: f64) -> Result<C64> {
    let n = s1.n();
    let a = GaussianWavefunction::from_pure(&GaussianPure::new(
        s2.inverse(),
        PhaseVector::zeros(n),
        hbar,
    )?)?;
    let b = GaussianWavefunction::from_pure(&GaussianPure::new(
        s1.clone(),
        PhaseVector::zeros(n),
        hbar,
    )?)?;
    let ov = a.overlap(&b)?;
    Ok(ov / ov.norm())
}

/// Wavefunction of `T̂_a M̂_S |ψ⟩` for `ψ = |S₀, ζ₀⟩`, with the exact phase.
pub fn apply_linear(
    s: &SymplecticMatrix,
    a: &RVec,
    g: &GaussianPure,
) -> Result<GaussianWavefunction> {
    // T_a M_S T_ζ M_S0 |0⟩ = κ e^{i a∧(Sζ)/2ħ} T_{a+Sζ} |S S0, 0⟩
    let hbar = g.hbar();
    let kappa = metaplectic_phase(s, g.s(), hbar)?;
    let sz = s.matrix() * g.zeta().as_vector();
    let base = GaussianWavefunction::from_pure(&GaussianPure::new(
        s.compose(g.s())?,
        PhaseVector::zeros(g.n()),
        hbar,
    )?)?;
    let phase = (I * wedge_raw(a, &sz) / (2.0 * hbar)).exp();
    Ok(base.translated(&(a + sz)).scaled(kappa * phase))
}

/// Symmetric Wigner matrix implied by a position-space quadratic exponent.
#[allow(dead_code)]
pub(crate) fn wigner_matrix_of(q: &CMat, hbar: f64) -> Result<RMat> {
    let y = re(q) * (2.0 * hbar);
    let x = -im(q) * (2.0 * hbar);
    let yi = inverse_r(&y)?;
    Ok(from_blocks(
        &(&y + &x * &yi * &x),
        &(-(&x * &yi)),
        &(-(&yi * &x)),
        &yi,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{max_abs, max_abs_c};
    use crate::states::wigner_pure;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn vacuum_is_normalized() {
        let v = GaussianWavefunction::vacuum(2, 0.3).unwrap();
        assert!((v.norm_sqr().unwrap() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn wigner_of_wavefunction_matches_closed_form() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for n in 1..=3 {
            let s = SymplecticMatrix::random(n, 1.0, &mut rng);
            let z = RVec::from_iterator(2 * n, (0..2 * n).map(|k| 0.2 * k as f64 - 0.3));
            let g = GaussianPure::new(s, PhaseVector::from_vector(z).unwrap(), 0.8).unwrap();
            let psi = GaussianWavefunction::from_pure(&g).unwrap();
            assert!((psi.norm_sqr().unwrap() - 1.0).abs() < 1e-12);
            let w = psi.wigner().unwrap();
            let want = wigner_pure(&g);
            assert!(max_abs_c(&(w.matrix() - want.matrix())) < 1e-10);
            assert!(
                max_abs_c(&CMat::from_column_slice(
                    2 * n,
                    1,
                    (w.center() - want.center()).as_slice()
                )) < 1e-10
            );
            assert!((w.amplitude() - C64::new(1.0, 0.0)).norm() < 1e-10);
        }
    }

    #[test]
    fn vacuum_gauge_is_positive() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let s = SymplecticMatrix::random(2, 1.0, &mut rng);
        let g = GaussianPure::new(s, PhaseVector::zeros(2), 1.0).unwrap();
        let psi = GaussianWavefunction::from_pure(&g).unwrap();
        let ov = GaussianWavefunction::vacuum(2, 1.0)
            .unwrap()
            .overlap(&psi)
            .unwrap();
        assert!(ov.re > 0.0 && ov.im.abs() < 1e-13);
    }

    #[test]
    fn translations_compose_with_wedge_phase() {
        let g = GaussianPure::new(
            SymplecticMatrix::squeeze(&[1.3]).unwrap(),
            PhaseVector::zeros(1),
            1.0,
        )
        .unwrap();
        let psi = GaussianWavefunction::from_pure(&g).unwrap();
        let a = RVec::from_vec(vec![0.4, -0.9]);
        let b = RVec::from_vec(vec![1.1, 0.3]);
        let lhs = psi.translated(&b).translated(&a);
        let rhs = psi
            .translated(&(&a + &b))
            .scaled((I * wedge_raw(&a, &b) / 2.0).exp());
        for q in [-1.0, 0.2, 0.8] {
            assert!((lhs.eval(&[q]) - rhs.eval(&[q])).norm() < 1e-13);
        }
    }

    #[test]
    fn round_trip_to_pure() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let s = SymplecticMatrix::random(1, 0.9, &mut rng);
        let g = GaussianPure::new(s, PhaseVector::new(vec![0.5, -0.4]).unwrap(), 1.0).unwrap();
        let psi = GaussianWavefunction::from_pure(&g)
            .unwrap()
            .scaled(C64::from_polar(0.7, 1.1));
        let (g2, amp) = psi.to_pure().unwrap();
        let psi2 = GaussianWavefunction::from_pure(&g2).unwrap().scaled(amp);
        for q in [-1.0, 0.2, 0.8] {
            assert!((psi.eval(&[q]) - psi2.eval(&[q])).norm() < 1e-10);
        }
        assert!((amp.norm() - 0.7).abs() < 1e-10);
    }

    #[test]
    fn wigner_matrix_helper_agrees() {
        let g = GaussianPure::new(
            SymplecticMatrix::random(2, 0.8, &mut ChaCha8Rng::seed_from_u64(14)),
            PhaseVector::zeros(2),
            1.0,
        )
        .unwrap();
        let psi = GaussianWavefunction::from_pure(&g).unwrap();
        let m = wigner_matrix_of(&psi.quadexp().quad, 1.0).unwrap();
        assert!(max_abs(&(m - g.wigner_matrix())) < 1e-10);
    }
}
