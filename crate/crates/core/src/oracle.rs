//! Brute-force references for single-mode states.
//!
//! Two independent routes: a truncated Fock space, where Wigner values are
//! parity expectations `(πħ)⁻¹ tr(ρ T̂_x R̂₀ T̂_x†)`, and position grids, where
//! they are chord integrals of a sampled wavefunction.

use std::sync::Arc;

use nalgebra::SymmetricEigen;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};

use crate::cat::PureCat;
use crate::error::{Error, Result};
use crate::kerr::{GaussianMixed, ThermalState};
use crate::linalg::{CMat, CVec, C64, I};
use crate::states::{check_hbar, Axis, GaussianPure, WignerGrid};
use crate::symplectic::{euler_decompose, SymplecticMatrix};

/// Default Fock truncation.
pub const DEFAULT_DIM: usize = 160;
/// Largest truncation tried by [`auto_truncate`].
pub const MAX_DIM: usize = 640;
/// Allowed population above `0.9 N`.
pub const TAIL_TOL: f64 = 1e-10;

/// Ladder, quadrature and number operators on `span{|0⟩..|N−1⟩}`.
#[derive(Debug, Clone)]
pub struct FockOperators {
    pub dim: usize,
    pub hbar: f64,
    pub a: CMat,
    pub q: CMat,
    pub p: CMat,
    pub number: CMat,
}

impl FockOperators {
    pub fn new(dim: usize, hbar: f64) -> Result<Self> {
        check_hbar(hbar)?;
        if dim < 2 {
            return Err(Error::InvalidParameter(format!("Fock dimension {dim}")));
        }
        let mut a = CMat::zeros(dim, dim);
        for m in 1..dim {
            a[(m - 1, m)] = C64::new((m as f64).sqrt(), 0.0);
        }
        let ad = a.adjoint();
        let s = (hbar / 2.0).sqrt();
        let q = (&a + &ad) * C64::new(s, 0.0);
        let p = (&a - &ad) * C64::new(0.0, -s);
        let number = CMat::from_diagonal(&CVec::from_fn(dim, |m, _| C64::new(m as f64, 0.0)));
        Ok(Self {
            dim,
            hbar,
            a,
            q,
            p,
            number,
        })
    }

    /// `max |[q̂, p̂] − iħ|` over the leading `k × k` block.
    pub fn commutator_defect(&self, k: usize) -> f64 {
        let c = &self.q * &self.p - &self.p * &self.q;
        let mut worst = 0.0f64;
        for i in 0..k.min(self.dim) {
            for j in 0..k.min(self.dim) {
                let want = if i == j {
                    I * self.hbar
                } else {
                    C64::new(0.0, 0.0)
                };
                worst = worst.max((c[(i, j)] - want).norm());
            }
        }
        worst
    }
}

/// Pure state vector in a truncated Fock space.
#[derive(Debug, Clone, PartialEq)]
pub struct FockKet {
    pub psi: CVec,
    pub hbar: f64,
}

impl FockKet {
    pub fn dim(&self) -> usize {
        self.psi.len()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.psi.norm_squared()
    }

    pub fn inner(&self, other: &FockKet) -> C64 {
        self.psi.dotc(&other.psi)
    }

    pub fn tail(&self) -> f64 {
        let start = tail_start(self.dim());
        self.psi.iter().skip(start).map(|z| z.norm_sqr()).sum()
    }

    pub fn density(&self) -> FockDensity {
        FockDensity {
            rho: &self.psi * self.psi.adjoint(),
            hbar: self.hbar,
        }
    }
}

/// Density matrix in a truncated Fock space.
#[derive(Debug, Clone, PartialEq)]
pub struct FockDensity {
    pub rho: CMat,
    pub hbar: f64,
}

impl FockDensity {
    pub fn dim(&self) -> usize {
        self.rho.nrows()
    }

    pub fn trace(&self) -> C64 {
        self.rho.trace()
    }

    /// Population above `0.9 N`.
    pub fn tail(&self) -> f64 {
        let start = tail_start(self.dim());
        (start..self.dim()).map(|m| self.rho[(m, m)].re).sum()
    }

    pub fn hermiticity_defect(&self) -> f64 {
        crate::linalg::max_abs_c(&(&self.rho - self.rho.adjoint()))
    }

    pub fn check_truncation(&self) -> Result<()> {
        let tail = self.tail();
        if tail > TAIL_TOL {
            return Err(Error::TruncationInsufficient {
                dim: self.dim(),
                tail,
            });
        }
        Ok(())
    }
}

fn tail_start(dim: usize) -> usize {
    (0.9 * dim as f64).ceil() as usize
}

fn work_dim(dim: usize) -> usize {
    dim + dim / 2 + 20
}

fn hermitian_exp(g: &CMat, scale: f64) -> CMat {
    // exp(i·scale·G) for Hermitian G
    let eig = SymmetricEigen::new(g.clone());
    let d = CVec::from_fn(g.nrows(), |k, _| (I * scale * eig.eigenvalues[k]).exp());
    &eig.eigenvectors * CMat::from_diagonal(&d) * eig.eigenvectors.adjoint()
}

/// `T̂_ζ = exp(i(ζ_p q̂ − ζ_q p̂)/ħ)`.
fn displacement(ops: &FockOperators, zq: f64, zp: f64) -> CMat {
    let g = &ops.q * C64::new(zp, 0.0) - &ops.p * C64::new(zq, 0.0);
    hermitian_exp(&g, 1.0 / ops.hbar)
}

/// `exp[(r/2)(â†² − â²)]`, widening `q` by `e^r`.
fn squeezer(ops: &FockOperators, r: f64) -> CMat {
    let a2 = &ops.a * &ops.a;
    // i(r/2)(â†² − â²) is Hermitian
    let h = (a2.adjoint() - a2) * C64::new(0.0, 0.5 * r);
    hermitian_exp(&h, -1.0)
}

fn rotation_diag(dim: usize, theta: f64) -> CVec {
    CVec::from_fn(dim, |m, _| (-I * theta * m as f64).exp())
}

/// Rotation angle and log-squeeze with `M̂_S |0⟩ ∝ e^{−iθn̂} Ŝ(r) |0⟩`.
fn euler_angles(s: &SymplecticMatrix) -> Result<(f64, f64)> {
    if s.n() != 1 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            found: 2 * s.n(),
        });
    }
    let e = euler_decompose(s)?;
    let o = e.outer.matrix();
    Ok((o[(0, 1)].atan2(o[(0, 0)]), e.squeezes[0].ln()))
}

/// Unitary `T̂_c e^{−iθn̂} Ŝ(r)` on the working space.
fn gaussian_unitary(ops: &FockOperators, s: &SymplecticMatrix, c: &[f64]) -> Result<(CMat, CMat)> {
    let (theta, r) = euler_angles(s)?;
    let sq = squeezer(ops, r);
    let rot = CMat::from_diagonal(&rotation_diag(ops.dim, theta));
    Ok((displacement(ops, c[0], c[1]), rot * sq))
}

fn truncate_ket(psi: &CVec, dim: usize, hbar: f64) -> Result<FockKet> {
    let ket = FockKet {
        psi: psi.rows(0, dim).into_owned(),
        hbar,
    };
    let lost = psi.rows(dim, psi.len() - dim).norm_squared();
    let tail = ket.tail() + lost;
    if tail > TAIL_TOL {
        return Err(Error::TruncationInsufficient { dim, tail });
    }
    Ok(ket)
}

/// `|S, ζ⟩` with the phase convention `⟨0|S, 0⟩ > 0`.
pub fn fock_gaussian(g: &GaussianPure, dim: usize) -> Result<FockKet> {
    let ops = FockOperators::new(work_dim(dim), g.hbar())?;
    let (disp, shape) = gaussian_unitary(&ops, g.s(), g.zeta().as_slice())?;
    let mut v = shape.column(0).into_owned();
    let v0 = v[0];
    v *= v0.conj() / v0.norm();
    truncate_ket(&(disp * v), dim, g.hbar())
}

/// `a|g₁⟩ + b|g₂⟩`, normalized.
pub fn fock_cat(cat: &PureCat, dim: usize) -> Result<FockKet> {
    let k1 = fock_gaussian(&cat.g1, dim)?;
    let k2 = fock_gaussian(&cat.g2, dim)?;
    let psi = &k1.psi * cat.a + &k2.psi * cat.b;
    let norm = psi.norm();
    if norm < 1e-12 {
        return Err(Error::ZeroNorm(norm));
    }
    Ok(FockKet {
        psi: psi / C64::new(norm, 0.0),
        hbar: k1.hbar,
    })
}

/// `T̂_c M̂_S ρ_th M̂_S† T̂_c†` with Bose-Einstein populations.
pub fn fock_mixed(rho: &GaussianMixed, dim: usize) -> Result<FockDensity> {
    let ops = FockOperators::new(work_dim(dim), rho.hbar)?;
    let (disp, shape) = gaussian_unitary(&ops, &rho.s, rho.center.as_slice())?;
    let u = disp * shape;
    let nb = rho.nbar;
    let pops = CVec::from_fn(ops.dim, |m, _| {
        let p = if nb == 0.0 {
            if m == 0 {
                1.0
            } else {
                0.0
            }
        } else {
            (nb / (nb + 1.0)).powi(m as i32) / (nb + 1.0)
        };
        C64::new(p, 0.0)
    });
    let full = &u * CMat::from_diagonal(&pops) * u.adjoint();
    let lost: f64 = (dim..ops.dim).map(|m| full[(m, m)].re).sum();
    let out = FockDensity {
        rho: full.view((0, 0), (dim, dim)).into_owned(),
        hbar: rho.hbar,
    };
    let tail = out.tail() + lost;
    if tail > TAIL_TOL {
        return Err(Error::TruncationInsufficient { dim, tail });
    }
    Ok(out)
}

pub fn fock_thermal(ts: &ThermalState, dim: usize) -> Result<FockDensity> {
    fock_mixed(&ts.into(), dim)
}

/// Conjugation by `diag(e^{−iπμm²/ν})`, the Kerr propagator at `t = (μ/ν)T`.
pub fn fock_kerr(rho: &FockDensity, mu: u32, nu: u32) -> FockDensity {
    let two_nu = 2 * nu as u64;
    let phases = CVec::from_fn(rho.dim(), |m, _| {
        let m = m as u64 % two_nu;
        let r = (mu as u64 % two_nu) * (m * m % two_nu) % two_nu;
        C64::from_polar(1.0, -std::f64::consts::PI * r as f64 / nu as f64)
    });
    let d = CMat::from_diagonal(&phases);
    FockDensity {
        rho: &d * &rho.rho * d.adjoint(),
        hbar: rho.hbar,
    }
}

/// Retries `f` with doubled truncation while it reports an insufficient one.
pub fn auto_truncate<T>(start: usize, f: impl Fn(usize) -> Result<T>) -> Result<(T, usize)> {
    let mut dim = start;
    loop {
        match f(dim) {
            Err(Error::TruncationInsufficient { .. }) if dim < MAX_DIM => dim *= 2,
            other => return other.map(|v| (v, dim)),
        }
    }
}

/// Precomputed bases for parity-based Wigner evaluation.
///
/// `ρ` is held as `Σ λₖ uₖuₖ†` in the momentum eigenbasis, so a row costs
/// `O(r N²)` for rank `r` instead of several dense `N³` products.
struct ParityEvaluator {
    hbar: f64,
    /// Columns `P†vₖ` for the retained eigenvectors `vₖ` of `ρ`.
    factors: CMat,
    weights: Vec<f64>,
    p_vals: Vec<f64>,
    /// `Q†P`: momentum to position eigenbasis.
    p_to_q: CMat,
    q_vals: Vec<f64>,
    parity_q_t: CMat,
}

impl ParityEvaluator {
    fn new(rho: &FockDensity) -> Result<Self> {
        rho.check_truncation()?;
        let dim = rho.dim();
        let w = work_dim(dim);
        let ops = FockOperators::new(w, rho.hbar)?;
        let pe = SymmetricEigen::new(ops.p.clone());
        let qe = SymmetricEigen::new(ops.q.clone());
        let parity = CVec::from_fn(w, |m, _| C64::new(if m % 2 == 0 { 1.0 } else { -1.0 }, 0.0));
        let parity_q = qe.eigenvectors.adjoint() * CMat::from_diagonal(&parity) * &qe.eigenvectors;
        let herm = (&rho.rho + rho.rho.adjoint()) * C64::new(0.5, 0.0);
        let re = SymmetricEigen::new(herm);
        let top = re.eigenvalues.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let keep: Vec<usize> = (0..dim)
            .filter(|&k| re.eigenvalues[k].abs() > 1e-15 * top)
            .collect();
        let mut embedded = CMat::zeros(w, keep.len());
        for (c, &k) in keep.iter().enumerate() {
            embedded
                .view_mut((0, c), (dim, 1))
                .copy_from(&re.eigenvectors.column(k));
        }
        Ok(Self {
            hbar: rho.hbar,
            factors: pe.eigenvectors.adjoint() * embedded,
            weights: keep.iter().map(|&k| re.eigenvalues[k]).collect(),
            p_vals: pe.eigenvalues.iter().copied().collect(),
            p_to_q: qe.eigenvectors.adjoint() * &pe.eigenvectors,
            q_vals: qe.eigenvalues.iter().copied().collect(),
            parity_q_t: parity_q.transpose(),
        })
    }

    /// `A_kl = ρ′_kl P_lk` for the row at position `q`, where `ρ′ = T̂_q†ρT̂_q`
    /// in the position eigenbasis.
    fn row(&self, q: f64) -> CMat {
        let mut shifted = self.factors.clone();
        for (k, mut r) in shifted.row_iter_mut().enumerate() {
            r *= (I * q * self.p_vals[k] / self.hbar).exp();
        }
        let y = &self.p_to_q * shifted;
        let mut yw = y.clone();
        for (c, mut col) in yw.column_iter_mut().enumerate() {
            col *= C64::new(self.weights[c], 0.0);
        }
        (yw * y.adjoint()).component_mul(&self.parity_q_t)
    }

    fn value(&self, a: &CMat, p: f64) -> C64 {
        let d = CVec::from_fn(a.nrows(), |l, _| (I * p * self.q_vals[l] / self.hbar).exp());
        d.dotc(&(a * &d)) / (std::f64::consts::PI * self.hbar)
    }
}

fn real_part(v: C64, scale: f64) -> Result<f64> {
    if v.im.abs() > 1e-10 * scale.max(v.re.abs()).max(1e-300) {
        return Err(Error::ImaginaryResidueExceeded {
            residue: v.im.abs(),
            bound: 1e-10 * scale,
        });
    }
    Ok(v.re)
}

/// `(πħ)⁻¹ tr(ρ T̂_x R̂₀ T̂_x†)`.
pub fn fock_wigner(rho: &FockDensity, x: [f64; 2]) -> Result<f64> {
    let ev = ParityEvaluator::new(rho)?;
    let v = ev.value(&ev.row(x[0]), x[1]);
    real_part(v, 1.0 / (std::f64::consts::PI * rho.hbar))
}

/// Parity Wigner function on a `(q, p)` grid; `q` varies fastest.
pub fn fock_wigner_grid(rho: &FockDensity, q_axis: &Axis, p_axis: &Axis) -> Result<WignerGrid> {
    let ev = ParityEvaluator::new(rho)?;
    let scale = 1.0 / (std::f64::consts::PI * rho.hbar);
    let ps = p_axis.points();
    let columns = q_axis
        .points()
        .par_iter()
        .map(|&q| {
            let a = ev.row(q);
            ps.iter()
                .map(|&p| real_part(ev.value(&a, p), scale))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    let nq = q_axis.count;
    let mut values = vec![0.0; nq * ps.len()];
    for (i, col) in columns.iter().enumerate() {
        for (j, v) in col.iter().enumerate() {
            values[i + nq * j] = *v;
        }
    }
    Ok(WignerGrid {
        axes: vec![*q_axis, *p_axis],
        values,
        hbar: rho.hbar,
        description: format!("Fock parity oracle, N = {}", rho.dim()),
    })
}

/// Wavefunction sampled at `q_j = q0 + j dq`.
#[derive(Debug, Clone, PartialEq)]
pub struct GridWavefunction {
    pub q0: f64,
    pub dq: f64,
    pub values: Vec<C64>,
    pub hbar: f64,
}

/// Samples counted as the boundary of a grid.
const EDGE: usize = 4;
/// Boundary amplitude allowed for Wigner quadrature, relative to the peak.
pub const BOUNDARY_TOL: f64 = 1e-12;
/// Boundary amplitude allowed in position and momentum for propagation.
pub const PROPAGATION_TOL: f64 = 1e-10;

impl GridWavefunction {
    pub fn new(q0: f64, dq: f64, values: Vec<C64>, hbar: f64) -> Result<Self> {
        check_hbar(hbar)?;
        if !(dq > 0.0) || values.len() < 4 * EDGE {
            return Err(Error::Grid(format!(
                "{} points with step {dq}",
                values.len()
            )));
        }
        Ok(Self {
            q0,
            dq,
            values,
            hbar,
        })
    }

    /// Symmetric grid `q_j = (j − N/2) L/N`.
    pub fn centered(count: usize, length: f64, hbar: f64, f: impl Fn(f64) -> C64) -> Result<Self> {
        let dq = length / count as f64;
        let q0 = -(count as f64 / 2.0).floor() * dq;
        let values = (0..count).map(|j| f(q0 + j as f64 * dq)).collect();
        Self::new(q0, dq, values, hbar)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn q(&self, j: usize) -> f64 {
        self.q0 + j as f64 * self.dq
    }

    pub fn norm_sqr(&self) -> f64 {
        self.values.iter().map(|z| z.norm_sqr()).sum::<f64>() * self.dq
    }

    /// `⟨self|other⟩` on a shared grid.
    pub fn inner(&self, other: &GridWavefunction) -> Result<C64> {
        self.check_same_grid(other)?;
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a.conj() * b)
            .sum::<C64>()
            * self.dq)
    }

    pub fn scaled(&self, c: C64) -> Self {
        Self {
            values: self.values.iter().map(|v| v * c).collect(),
            ..self.clone()
        }
    }

    pub fn normalized(&self) -> Result<Self> {
        let n = self.norm_sqr();
        if !(n > 0.0) {
            return Err(Error::ZeroNorm(n));
        }
        Ok(self.scaled(C64::new(1.0 / n.sqrt(), 0.0)))
    }

    pub fn distance(&self, other: &GridWavefunction) -> Result<f64> {
        self.check_same_grid(other)?;
        Ok((self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            * self.dq)
            .sqrt())
    }

    fn check_same_grid(&self, other: &GridWavefunction) -> Result<()> {
        if self.len() != other.len()
            || (self.q0 - other.q0).abs() > 1e-12 * self.dq
            || (self.dq - other.dq).abs() > 1e-15 * self.dq
        {
            return Err(Error::Grid("wavefunctions live on different grids".into()));
        }
        Ok(())
    }

    fn peak(&self) -> f64 {
        self.values.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Largest amplitude on the outermost samples, relative to the peak.
    pub fn boundary_ratio(&self) -> f64 {
        let n = self.len();
        let edge = self.values[..EDGE]
            .iter()
            .chain(&self.values[n - EDGE..])
            .map(|z| z.norm())
            .fold(0.0, f64::max);
        edge / self.peak().max(1e-300)
    }

    /// Largest amplitude of the discrete spectrum near the Nyquist frequency,
    /// relative to its peak.
    pub fn momentum_edge_ratio(&self) -> f64 {
        let mut buf = self.values.clone();
        FftPlanner::new()
            .plan_fft_forward(buf.len())
            .process(&mut buf);
        let n = buf.len();
        let peak = buf.iter().map(|z| z.norm()).fold(0.0, f64::max);
        let mid = n / 2;
        let edge = buf[mid - EDGE..mid + EDGE]
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max);
        edge / peak.max(1e-300)
    }

    /// `ψ(q + δ)` on the same nodes, by band-limited interpolation.
    fn shifted(&self, delta: f64, plans: &Plans) -> Vec<C64> {
        if delta == 0.0 {
            return self.values.clone();
        }
        let n = self.len();
        let mut buf = self.values.clone();
        plans.forward.process(&mut buf);
        for (j, b) in buf.iter_mut().enumerate() {
            *b *= (I * wavenumber(j, n, self.dq) * delta).exp() / n as f64;
        }
        plans.inverse.process(&mut buf);
        buf
    }

    fn momenta(&self) -> Vec<f64> {
        let n = self.len();
        (0..n)
            .map(|j| self.hbar * wavenumber(j, n, self.dq))
            .collect()
    }
}

fn wavenumber(j: usize, n: usize, dq: f64) -> f64 {
    let signed = if j < n.div_ceil(2) {
        j as f64
    } else {
        j as f64 - n as f64
    };
    2.0 * std::f64::consts::PI * signed / (n as f64 * dq)
}

struct Plans {
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl Plans {
    fn new(n: usize) -> Self {
        let mut planner = FftPlanner::new();
        Self {
            forward: planner.plan_fft_forward(n),
            inverse: planner.plan_fft_inverse(n),
        }
    }
}

/// `W(q, p)` for each `p` in `ps`, from
/// `(πħ)⁻¹ ∫ dy ψ(q+y) ψ*(q−y) e^{−2ipy/ħ}`.
pub fn quadrature_section(psi: &GridWavefunction, q: f64, ps: &[f64]) -> Result<Vec<f64>> {
    let ratio = psi.boundary_ratio();
    if ratio > BOUNDARY_TOL {
        return Err(Error::Grid(format!("boundary amplitude ratio {ratio:e}")));
    }
    let pmax = std::f64::consts::PI * psi.hbar / (2.0 * psi.dq);
    if let Some(p) = ps.iter().find(|p| p.abs() > pmax) {
        return Err(Error::Nyquist(format!("|p| = {} exceeds {pmax}", p.abs())));
    }
    let n = psi.len();
    let pos = (q - psi.q0) / psi.dq;
    if pos < 0.0 || pos > (n - 1) as f64 {
        return Err(Error::Grid(format!("q = {q} outside the grid")));
    }
    let j0 = pos.round() as usize;
    let shifted = psi.shifted(q - psi.q(j0), &Plans::new(n));
    let m_max = j0.min(n - 1 - j0);
    let chord: Vec<C64> = (0..=m_max)
        .map(|m| shifted[j0 + m] * shifted[j0 - m].conj())
        .collect();
    let h = psi.hbar;
    let out = ps
        .par_iter()
        .map(|&p| {
            // the chord product is Hermitian in m, so the sum is real
            let mut s = chord[0].re;
            for (m, f) in chord.iter().enumerate().skip(1) {
                let ph = (-2.0 * I * p * m as f64 * psi.dq / h).exp();
                s += 2.0 * (f * ph).re;
            }
            s * psi.dq / (std::f64::consts::PI * h)
        })
        .collect();
    Ok(out)
}

pub fn quadrature_wigner(psi: &GridWavefunction, q: f64, p: f64) -> Result<f64> {
    Ok(quadrature_section(psi, q, &[p])?[0])
}

pub fn quadrature_wigner_grid(
    psi: &GridWavefunction,
    q_axis: &Axis,
    p_axis: &Axis,
) -> Result<WignerGrid> {
    let ps = p_axis.points();
    let columns = q_axis
        .points()
        .iter()
        .map(|&q| quadrature_section(psi, q, &ps))
        .collect::<Result<Vec<_>>>()?;
    let nq = q_axis.count;
    let mut values = vec![0.0; nq * ps.len()];
    for (i, col) in columns.iter().enumerate() {
        for (j, v) in col.iter().enumerate() {
            values[i + nq * j] = *v;
        }
    }
    Ok(WignerGrid {
        axes: vec![*q_axis, *p_axis],
        values,
        hbar: psi.hbar,
        description: "position-grid chord quadrature".into(),
    })
}

fn check_resolved(psi: &GridWavefunction, what: &str) -> Result<()> {
    let b = psi.boundary_ratio();
    if b > PROPAGATION_TOL {
        return Err(Error::Grid(format!(
            "{what}: boundary amplitude ratio {b:e}"
        )));
    }
    let m = psi.momentum_edge_ratio();
    if m > PROPAGATION_TOL {
        return Err(Error::Nyquist(format!("{what}: spectral edge ratio {m:e}")));
    }
    Ok(())
}

/// Exact harmonic rotation `e^{−iτ(p̂²+q̂²)/2ħ}` by chirp, shear, chirp.
fn rotate(psi: &mut [C64], qs: &[f64], ps: &[f64], tau: f64, hbar: f64, plans: &Plans) {
    if tau.abs() > std::f64::consts::FRAC_PI_2 {
        rotate(psi, qs, ps, tau / 2.0, hbar, plans);
        rotate(psi, qs, ps, tau / 2.0, hbar, plans);
        return;
    }
    let a = (tau / 2.0).tan();
    let b = tau.sin();
    let n = psi.len() as f64;
    for (v, q) in psi.iter_mut().zip(qs) {
        *v *= (-I * a * q * q / (2.0 * hbar)).exp();
    }
    plans.forward.process(psi);
    for (v, p) in psi.iter_mut().zip(ps) {
        *v *= (-I * b * p * p / (2.0 * hbar)).exp() / n;
    }
    plans.inverse.process(psi);
    for (v, q) in psi.iter_mut().zip(qs) {
        *v *= (-I * a * q * q / (2.0 * hbar)).exp();
    }
}

/// Kicked harmonic oscillator: `kicks` periods, each a kick
/// `e^{−iK cos q̂/ħ}` followed by harmonic rotation over `τ`.
pub fn split_operator_kho(
    psi0: &GridWavefunction,
    k: f64,
    tau: f64,
    kicks: usize,
) -> Result<GridWavefunction> {
    if !(tau > 0.0) {
        return Err(Error::InvalidParameter(format!("kick period {tau}")));
    }
    check_resolved(psi0, "initial state")?;
    let qs: Vec<f64> = (0..psi0.len()).map(|j| psi0.q(j)).collect();
    let ps = psi0.momenta();
    let plans = Plans::new(psi0.len());
    let h = psi0.hbar;
    let mut psi = psi0.values.clone();
    for _ in 0..kicks {
        for (v, q) in psi.iter_mut().zip(&qs) {
            *v *= (-I * k * q.cos() / h).exp();
        }
        rotate(&mut psi, &qs, &ps, tau, h, &plans);
    }
    let out = GridWavefunction {
        values: psi,
        ..psi0.clone()
    };
    check_resolved(&out, "evolved state")?;
    Ok(out)
}

/// Harmonic rotation alone, for controls.
pub fn harmonic_rotation(psi0: &GridWavefunction, tau: f64) -> Result<GridWavefunction> {
    let qs: Vec<f64> = (0..psi0.len()).map(|j| psi0.q(j)).collect();
    let ps = psi0.momenta();
    let mut psi = psi0.values.clone();
    rotate(&mut psi, &qs, &ps, tau, psi0.hbar, &Plans::new(psi0.len()));
    Ok(GridWavefunction {
        values: psi,
        ..psi0.clone()
    })
}
