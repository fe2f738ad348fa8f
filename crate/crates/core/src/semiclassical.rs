//! Thawed-Gaussian swarm for the kicked harmonic oscillator
//! `H = (p² + q²)/2 + K cos q Σₙ δ(t − nτ)`.
//!
//! A state squeezed along `q` is written as a continuous superposition of
//! coherent states on the `q`-axis. Each one is carried along its classical
//! trajectory by the locally quadratic dynamics, and the swarm is summed
//! coherently. One period is a kick followed by harmonic rotation over `τ`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cat::{cat_wigner, classify_fringes, normal_form, FringeClass, NormalForm, PureCat};
use crate::error::{Error, Result};
use crate::linalg::{CMat, CVec, RMat, C64, I};
use crate::oracle::{quadrature_section, split_operator_kho, GridWavefunction};
use crate::states::{check_hbar, GaussianPure, GaussianSumState, GaussianWavefunction, QuadExp};
use crate::symplectic::{PhaseVector, SymplecticMatrix};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KHOParams {
    pub k: f64,
    pub tau: f64,
    pub hbar: f64,
    pub kicks: usize,
}

impl KHOParams {
    pub fn new(k: f64, tau: f64, hbar: f64, kicks: usize) -> Result<Self> {
        check_hbar(hbar)?;
        if !(tau > 0.0) || !tau.is_finite() || !k.is_finite() {
            return Err(Error::InvalidParameter(format!("K = {k}, tau = {tau}")));
        }
        Ok(Self {
            k,
            tau,
            hbar,
            kicks,
        })
    }

    /// `K = 2`, `τ = π/3`, `ħ = 0.0128`, two kicks.
    pub fn reference() -> Self {
        Self {
            k: 2.0,
            tau: std::f64::consts::FRAC_PI_3,
            hbar: 0.0128,
            kicks: 2,
        }
    }
}

/// One period of the classical map and its Jacobian.
pub fn classical_map(
    x: &PhaseVector,
    params: &KHOParams,
) -> Result<(PhaseVector, SymplecticMatrix)> {
    if x.n() != 1 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            found: x.dim(),
        });
    }
    let (q, p) = (x.as_slice()[0], x.as_slice()[1]);
    let p1 = p + params.k * q.sin();
    let (s, c) = params.tau.sin_cos();
    let out = PhaseVector::new(vec![c * q + s * p1, -s * q + c * p1])?;
    let kick = RMat::from_row_slice(2, 2, &[1.0, 0.0, params.k * q.cos(), 1.0]);
    let rot = SymplecticMatrix::rotation(1, params.tau);
    let jac = SymplecticMatrix::with_tolerance(rot.matrix() * kick, 1e-9)?;
    Ok((out, jac))
}

/// Gaussian `exp[i(γq² + βq + α)/ħ]` riding on a classical trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct Branch {
    pub center: PhaseVector,
    pub gamma: C64,
    pub beta: C64,
    pub alpha: C64,
    pub jacobian: SymplecticMatrix,
}

impl Branch {
    /// Normalized coherent state centered at `(q, 0)`.
    pub fn coherent(q: f64, hbar: f64) -> Result<Self> {
        let gamma = C64::new(0.0, 0.5);
        Ok(Self {
            center: PhaseVector::new(vec![q, 0.0])?,
            gamma,
            beta: -2.0 * gamma * q,
            alpha: gamma * q * q + I * hbar * 0.25 * (std::f64::consts::PI * hbar).ln(),
            jacobian: SymplecticMatrix::identity(1),
        })
    }

    pub fn eval(&self, q: f64, hbar: f64) -> C64 {
        (I * (self.gamma * q * q + self.beta * q + self.alpha) / hbar).exp()
    }

    pub fn wavefunction(&self, hbar: f64) -> Result<GaussianWavefunction> {
        let f = QuadExp::new(
            CMat::from_element(1, 1, -I * self.gamma / hbar),
            CVec::from_element(1, I * self.beta / hbar),
            I * self.alpha / hbar,
        );
        GaussianWavefunction::from_quadexp(f, hbar)
    }

    fn check(&self) -> Result<()> {
        let finite = [self.gamma, self.beta, self.alpha]
            .iter()
            .all(|z| z.re.is_finite() && z.im.is_finite());
        if !finite || !(self.gamma.im > 0.0) {
            return Err(Error::WidthCollapse);
        }
        Ok(())
    }
}

fn free_shear(b: &mut Branch, tau: f64, hbar: f64) {
    if tau.abs() > std::f64::consts::FRAC_PI_2 {
        free_shear(b, tau / 2.0, hbar);
        free_shear(b, tau / 2.0, hbar);
        return;
    }
    let a = (tau / 2.0).tan();
    let s = tau.sin();
    b.gamma -= a / 2.0;
    // e^{−i s p̂²/2ħ}; Im d keeps one sign, so the principal log is continuous
    let d = 1.0 + 2.0 * s * b.gamma;
    b.alpha += -s * b.beta * b.beta / (2.0 * d) + I * hbar / 2.0 * d.ln();
    b.gamma /= d;
    b.beta /= d;
    b.gamma -= a / 2.0;
}

/// One period: kick with `cos q` expanded to second order about the branch
/// center (first order when `frozen`), then exact harmonic rotation.
pub fn thawed_step(branch: &Branch, params: &KHOParams, frozen: bool) -> Result<Branch> {
    let mut b = branch.clone();
    let qc = b.center.as_slice()[0];
    let ca = qc.cos();
    let cb = -qc.sin();
    let cc = if frozen { 0.0 } else { -qc.cos() / 2.0 };
    let k = params.k;
    b.gamma -= k * cc;
    b.beta -= k * (cb - 2.0 * cc * qc);
    b.alpha -= k * (ca - cb * qc + cc * qc * qc);
    free_shear(&mut b, params.tau, params.hbar);
    let (center, jac) = classical_map(&branch.center, params)?;
    b.center = center;
    b.jacobian = jac.compose(&branch.jacobian)?;
    b.check()?;
    Ok(b)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NodeSpec {
    /// Half-width of the node range in standard deviations of `C(q′)`.
    pub span_sigmas: f64,
    /// Node spacing in units of the coherent width `√(ħ/2)`.
    pub spacing: f64,
}

impl Default for NodeSpec {
    fn default() -> Self {
        Self {
            span_sigmas: 6.0,
            spacing: 0.4,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Swarm {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    pub branches: Vec<Branch>,
    pub hbar: f64,
    /// Standard deviation of `C(q′)`.
    pub sigma: f64,
}

/// Writes `ψ₀ ∝ exp[−(q−q₀)²/2ħs²]` as `Σ C(q′) h |q′, 0⟩` with
/// `C(q′) ∝ exp[−(q′−q₀)²/2ħ(s²−1)]`.
pub fn decompose_squeezed(psi0: &GaussianPure, spec: &NodeSpec) -> Result<Swarm> {
    if psi0.n() != 1 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            found: 2 * psi0.n(),
        });
    }
    let h = psi0.hbar();
    let z = psi0.zeta().as_slice();
    let cov = psi0.s().matrix() * psi0.s().matrix().transpose();
    let s2 = cov[(0, 0)];
    if cov[(0, 1)].abs() > 1e-10 * s2 || z[1].abs() > 1e-12 {
        return Err(Error::InvalidParameter(
            "state must be a real Gaussian centered on the q-axis".into(),
        ));
    }
    let q0 = z[0];
    if (s2 - 1.0).abs() <= 1e-12 {
        return Ok(Swarm {
            nodes: vec![q0],
            weights: vec![1.0],
            branches: vec![Branch::coherent(q0, h)?],
            hbar: h,
            sigma: 0.0,
        });
    }
    if s2 < 1.0 {
        return Err(Error::DeconvolutionIllPosed);
    }
    if !(spec.spacing > 0.0) || !(spec.span_sigmas > 0.0) {
        return Err(Error::InvalidParameter(
            "node spacing and span must be positive".into(),
        ));
    }
    let var_c = h * (s2 - 1.0);
    let sigma = var_c.sqrt();
    let step = spec.spacing * (h / 2.0).sqrt();
    let half = (spec.span_sigmas * sigma / step).floor() as i64;
    let pi = std::f64::consts::PI;
    let amp = (pi * h * s2).powf(-0.25) / ((pi * h).powf(-0.25) * (2.0 * pi * var_c / s2).sqrt());
    let nodes: Vec<f64> = (-half..=half).map(|j| q0 + j as f64 * step).collect();
    let weights = nodes
        .iter()
        .map(|q| amp * (-(q - q0) * (q - q0) / (2.0 * var_c)).exp() * step)
        .collect();
    let branches = nodes
        .iter()
        .map(|&q| Branch::coherent(q, h))
        .collect::<Result<_>>()?;
    Ok(Swarm {
        nodes,
        weights,
        branches,
        hbar: h,
        sigma,
    })
}

/// Applies `params.kicks` periods to every branch.
pub fn propagate_swarm(swarm: &Swarm, params: &KHOParams, frozen: bool) -> Result<Swarm> {
    if (swarm.hbar - params.hbar).abs() > 1e-14 * swarm.hbar {
        return Err(Error::HbarMismatch(swarm.hbar, params.hbar));
    }
    let branches = swarm
        .branches
        .par_iter()
        .map(|b| {
            let mut b = b.clone();
            for _ in 0..params.kicks {
                b = thawed_step(&b, params, frozen)?;
            }
            Ok(b)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Swarm {
        branches,
        ..swarm.clone()
    })
}

/// `Σⱼ Cⱼ φⱼ(q)` on the grid of `template`, summed in node order.
pub fn swarm_wavefunction(swarm: &Swarm, template: &GridWavefunction) -> Result<GridWavefunction> {
    let h = swarm.hbar;
    let values = (0..template.len())
        .into_par_iter()
        .map(|j| {
            let q = template.q(j);
            swarm
                .branches
                .iter()
                .zip(&swarm.weights)
                .map(|(b, w)| b.eval(q, h) * *w)
                .sum::<C64>()
        })
        .collect();
    GridWavefunction::new(template.q0, template.dq, values, h)
}

/// `‖Σ C φ − ψ₀‖` on the grid of `template`.
pub fn reconstruction_residual(
    swarm: &Swarm,
    psi0: &GaussianPure,
    template: &GridWavefunction,
) -> Result<f64> {
    let wf = GaussianWavefunction::from_pure(psi0)?;
    let exact = GridWavefunction::new(
        template.q0,
        template.dq,
        (0..template.len())
            .map(|j| wf.eval(&[template.q(j)]))
            .collect(),
        psi0.hbar(),
    )?;
    swarm_wavefunction(swarm, template)?.distance(&exact)
}

/// A branch as `c |S, x⟩`.
pub fn branch_state(branch: &Branch, hbar: f64) -> Result<(GaussianPure, C64)> {
    branch.wavefunction(hbar)?.to_pure()
}

#[derive(Debug, Clone)]
pub struct PairwiseCat {
    pub cat: PureCat,
    pub wigner: GaussianSumState,
    pub normal_form: NormalForm,
    pub class: FringeClass,
}

/// The two-branch cat `Cᵢφᵢ + Cⱼφⱼ`.
pub fn pairwise_cat_demo(swarm: &Swarm, i: usize, j: usize) -> Result<PairwiseCat> {
    if i == j {
        return Err(Error::InvalidParameter("branches must differ".into()));
    }
    let n = swarm.branches.len();
    if i >= n || j >= n {
        return Err(Error::InvalidParameter(format!(
            "branch index out of range 0..{n}"
        )));
    }
    let (g1, c1) = branch_state(&swarm.branches[i], swarm.hbar)?;
    let (g2, c2) = branch_state(&swarm.branches[j], swarm.hbar)?;
    let cat = PureCat::new(c1 * swarm.weights[i], c2 * swarm.weights[j], g1, g2)?;
    let nf = normal_form(cat.g1.s(), cat.g2.s())?;
    let class = classify_fringes(&nf, 1e-6);
    Ok(PairwiseCat {
        wigner: cat_wigner(&cat)?,
        cat,
        normal_form: nf,
        class,
    })
}

/// The central node and the node closest to one standard deviation of `C(q′)` above it.
///
/// A symmetric pair would be useless: the kicked map is odd under `x → −x`, so
/// mirrored nodes keep identical widths.
pub fn demo_pair(swarm: &Swarm) -> (usize, usize) {
    let mid = swarm.nodes.len() / 2;
    let q0 = swarm.nodes[mid];
    let nearest = |target: f64| {
        (0..swarm.nodes.len())
            .min_by(|&a, &b| {
                (swarm.nodes[a] - target)
                    .abs()
                    .total_cmp(&(swarm.nodes[b] - target).abs())
            })
            .unwrap_or(0)
    };
    (mid, nearest(q0 + swarm.sigma))
}

/// Exact and swarm propagation of a squeezed vacuum, compared on one section.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KhoSetup {
    pub params: KHOParams,
    /// `q`-width of the initial state in units of the coherent width.
    pub squeeze: f64,
    pub grid_points: usize,
    pub grid_length: f64,
    pub section_q: f64,
    pub p_min: f64,
    pub p_max: f64,
    pub p_points: usize,
    pub nodes: NodeSpec,
}

impl KhoSetup {
    pub fn reference() -> Self {
        Self {
            params: KHOParams::reference(),
            squeeze: 8.0,
            grid_points: 8192,
            grid_length: 4.0 * std::f64::consts::PI,
            section_q: -2.0,
            p_min: -5.0,
            p_max: 5.0,
            p_points: 501,
            nodes: NodeSpec::default(),
        }
    }

    pub fn initial_state(&self) -> Result<GaussianPure> {
        GaussianPure::new(
            SymplecticMatrix::squeeze(&[self.squeeze])?,
            PhaseVector::zeros(1),
            self.params.hbar,
        )
    }

    pub fn momenta(&self) -> Vec<f64> {
        let n = self.p_points.max(2);
        (0..n)
            .map(|k| self.p_min + (self.p_max - self.p_min) * k as f64 / (n - 1) as f64)
            .collect()
    }
}

#[derive(Debug, Clone)]
pub struct KhoComparison {
    pub exact: GridWavefunction,
    pub swarm: Swarm,
    pub swarm_wave: GridWavefunction,
    /// `‖ψ_swarm‖²` before normalization.
    pub swarm_norm: f64,
    /// `|⟨ψ_exact|ψ_swarm⟩|² / ‖ψ_swarm‖²`.
    pub fidelity: f64,
    pub momenta: Vec<f64>,
    pub section_exact: Vec<f64>,
    pub section_swarm: Vec<f64>,
    /// `‖W_exact − W_swarm‖₂ / ‖W_exact‖₂` over the section.
    pub section_l2: f64,
    pub initial_residual: f64,
}

pub fn kho_compare(setup: &KhoSetup, frozen: bool) -> Result<KhoComparison> {
    let g = setup.initial_state()?;
    let wf = GaussianWavefunction::from_pure(&g)?;
    let psi0 = GridWavefunction::centered(
        setup.grid_points,
        setup.grid_length,
        setup.params.hbar,
        |q| wf.eval(&[q]),
    )?;
    let exact = split_operator_kho(&psi0, setup.params.k, setup.params.tau, setup.params.kicks)?;
    let swarm0 = decompose_squeezed(&g, &setup.nodes)?;
    let initial_residual = reconstruction_residual(&swarm0, &g, &psi0)?;
    let swarm = propagate_swarm(&swarm0, &setup.params, frozen)?;
    let raw = swarm_wavefunction(&swarm, &psi0)?;
    let swarm_norm = raw.norm_sqr();
    let swarm_wave = raw.normalized()?;
    let fidelity = exact.inner(&swarm_wave)?.norm_sqr() / exact.norm_sqr();
    let momenta = setup.momenta();
    let section_exact = quadrature_section(&exact, setup.section_q, &momenta)?;
    let section_swarm = quadrature_section(&swarm_wave, setup.section_q, &momenta)?;
    let diff: f64 = section_exact
        .iter()
        .zip(&section_swarm)
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt();
    let base: f64 = section_exact.iter().map(|a| a * a).sum::<f64>().sqrt();
    Ok(KhoComparison {
        exact,
        swarm,
        swarm_wave,
        swarm_norm,
        fidelity,
        momenta,
        section_exact,
        section_swarm,
        section_l2: diff / base.max(1e-300),
        initial_residual,
    })
}
