//! Subcommand bodies. Each builds its inputs from the config, runs the
//! computation and writes plot-ready files plus a JSON report.

use std::path::PathBuf;

use anyhow::{Context, Result};
use phasecat::cat::{
    cat_wigner, classify_fringes, envelope_covariance, interference_term, normal_form, FringeClass,
};
use phasecat::kerr::{
    binary_fringe_fwhm, envelope_fwhm, kerr_cat, kerr_coefficients, kerr_cross_terms,
    term_envelope_covariance, FringePattern, GaussianMixed,
};
use phasecat::linalg::{RMat, RVec};
use phasecat::lindblad::{
    channel_matrices, check_signature_preservation, evolve_state, term_covariance,
};
use phasecat::semiclassical::{demo_pair, kho_compare, pairwise_cat_demo, KHOParams};
use phasecat::states::{sample_grid, Axis, GaussianSumState};
use phasecat::symplectic::Signature;
use phasecat::verify::{run_all, CriterionReport};
use serde::Serialize;

use crate::config::RunConfig;
use crate::output::{grid_csv, report_json, table_csv, Sink};

pub struct RunContext {
    pub config: RunConfig,
    pub out: PathBuf,
    pub seed: u64,
}

pub struct Outcome {
    pub written: Vec<PathBuf>,
    pub lines: Vec<String>,
    pub ok: bool,
}

fn rows(m: &RMat) -> Vec<Vec<f64>> {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

#[derive(Serialize)]
struct GridInfo {
    file: String,
    q: Axis,
    p: Axis,
    max_abs: f64,
}

fn emit_grid(
    sink: &mut Sink,
    name: &str,
    st: &GaussianSumState,
    axes: (Axis, Axis),
    state: &str,
) -> Result<GridInfo> {
    let grid = sample_grid(st, &[axes.0, axes.1])?;
    sink.write(name, &grid_csv(&grid, state))?;
    Ok(GridInfo {
        file: name.into(),
        q: axes.0,
        p: axes.1,
        max_abs: grid.max_abs(),
    })
}

fn state_descriptor<T: Serialize>(kind: &str, hbar: f64, section: &T) -> Result<String> {
    Ok(format!(
        "{kind}:hbar={hbar}:{}",
        serde_json::to_string(section)?
    ))
}

#[derive(Serialize)]
struct InterferenceInfo {
    k_magnitude: f64,
    global_phase: f64,
    eta: Vec<f64>,
    zeta_rel: Vec<f64>,
    envelope_covariance: Vec<Vec<f64>>,
}

#[derive(Serialize)]
struct CatReport {
    hbar: f64,
    modes: usize,
    integral: f64,
    purity: f64,
    interference: Option<InterferenceInfo>,
    thetas: Vec<f64>,
    classification: FringeClass,
    linear_theta_tolerance: f64,
    normal_form_transform: Vec<Vec<f64>>,
    normal_form_base_change: Vec<Vec<f64>>,
    normal_form_residual: f64,
    grid: Option<GridInfo>,
}

pub fn cmd_cat(ctx: &RunContext) -> Result<Outcome> {
    let cfg = &ctx.config;
    let cat = cfg.build_cat()?;
    let hbar = cfg.hbar();
    let st = cat_wigner(&cat)?;
    let nf = normal_form(cat.g1.s(), cat.g2.s())?;
    let classification = classify_fringes(&nf, cfg.tolerances.linear_theta);
    let interference = if cat.a.norm() > 0.0 && cat.b.norm() > 0.0 {
        let it = interference_term(&cat)?;
        Some(InterferenceInfo {
            k_magnitude: it.k_magnitude,
            global_phase: it.global_phase,
            eta: it.eta.as_slice().to_vec(),
            zeta_rel: it.zeta_rel.as_slice().to_vec(),
            envelope_covariance: rows(&envelope_covariance(&it)?),
        })
    } else {
        None
    };
    let mut sink = Sink::new(&ctx.out)?;
    let grid = if cat.n() == 1 {
        let state = state_descriptor("cat", hbar, &cfg.cat)?;
        Some(emit_grid(
            &mut sink,
            "cat_wigner.csv",
            &st,
            cfg.axes()?,
            &state,
        )?)
    } else {
        None
    };
    let report = CatReport {
        hbar,
        modes: cat.n(),
        integral: st.integral().re,
        purity: st.purity()?,
        interference,
        thetas: nf.thetas.clone(),
        classification,
        linear_theta_tolerance: cfg.tolerances.linear_theta,
        normal_form_transform: nf.transform.to_rows(),
        normal_form_base_change: nf.base_change.to_rows(),
        normal_form_residual: nf.residual,
        grid,
    };
    sink.write(
        "cat_report.json",
        &report_json("cat", ctx.seed, cfg, &report)?,
    )?;
    let lines = vec![format!(
        "classification {:?}, thetas {:?}",
        report.classification, report.thetas
    )];
    Ok(Outcome {
        written: sink.written,
        lines,
        ok: true,
    })
}

#[derive(Serialize)]
struct SignatureRow {
    term: usize,
    t: f64,
    re_inverse: Signature,
    im_inverse: Signature,
    re_positive: bool,
    im_nonsingular: bool,
}

#[derive(Serialize)]
struct EnvelopeSample {
    t: f64,
    envelope_peak: f64,
    hill_peak: f64,
    ratio: f64,
}

#[derive(Serialize)]
struct DecohereReport {
    hbar: f64,
    drift: Vec<Vec<f64>>,
    diffusion: Vec<Vec<f64>>,
    times: Vec<f64>,
    grids: Vec<GridInfo>,
    signatures: Vec<SignatureRow>,
    signatures_constant: bool,
    violations: Vec<String>,
    envelope: Vec<EnvelopeSample>,
    ratio_nonincreasing: Option<bool>,
    integrals: Vec<f64>,
}

/// Peak of the interference envelope and of the larger hill; `None` without interference.
fn envelope_sample(st: &GaussianSumState, t: f64) -> Result<Option<EnvelopeSample>> {
    let terms = st.terms();
    if terms.len() != 4 {
        return Ok(None);
    }
    let hill_peak = terms[0].peak_modulus()?.max(terms[1].peak_modulus()?);
    let envelope_peak = 2.0 * terms[3].peak_modulus()?;
    Ok(Some(EnvelopeSample {
        t,
        envelope_peak,
        hill_peak,
        ratio: envelope_peak / hill_peak,
    }))
}

pub fn cmd_decohere(ctx: &RunContext) -> Result<Outcome> {
    let cfg = &ctx.config;
    let cat = cfg.build_cat()?;
    if cat.n() != 1 {
        anyhow::bail!("decohere emits phase-plane grids and needs a single-mode cat");
    }
    let hbar = cfg.hbar();
    let ch = cfg.build_channel(cat.n())?;
    let cm = channel_matrices(&ch)?;
    let times = cfg.times();
    let st0 = cat_wigner(&cat)?;
    let axes = cfg.axes()?;
    let mut sink = Sink::new(&ctx.out)?;
    let mut grids = Vec::new();
    let mut envelope = Vec::new();
    let mut integrals = Vec::new();
    for (i, &t) in times.iter().enumerate() {
        let st = evolve_state(&st0, &ch, t)?;
        let state = format!(
            "{}:t={t}",
            state_descriptor("decohere", hbar, &(&cfg.cat, &cfg.channel))?
        );
        grids.push(emit_grid(
            &mut sink,
            &format!("decohere_t{i:02}.csv"),
            &st,
            axes,
            &state,
        )?);
        integrals.push(st.integral().re);
        if let Some(s) = envelope_sample(&st, t)? {
            envelope.push(s);
        }
    }
    let mut signatures = Vec::new();
    let mut violations = Vec::new();
    for (k, term) in st0.terms().iter().enumerate() {
        let rep = check_signature_preservation(&term_covariance(term)?, &ch, &times)?;
        for s in std::iter::once(&rep.initial).chain(rep.samples.iter()) {
            signatures.push(SignatureRow {
                term: k,
                t: s.t,
                re_inverse: s.re_inverse,
                im_inverse: s.im_inverse,
                re_positive: s.re_positive,
                im_nonsingular: s.im_nonsingular,
            });
        }
        violations.extend(rep.violations.iter().map(|v| format!("term {k}: {v}")));
    }
    let ratio_nonincreasing = if envelope.is_empty() {
        None
    } else {
        let mut sorted: Vec<&EnvelopeSample> = envelope.iter().collect();
        sorted.sort_by(|a, b| a.t.total_cmp(&b.t));
        Some(
            sorted
                .windows(2)
                .all(|w| w[1].ratio <= w[0].ratio * (1.0 + 1e-12)),
        )
    };
    let table: Vec<Vec<f64>> = envelope
        .iter()
        .map(|s| vec![s.t, s.envelope_peak, s.hill_peak, s.ratio])
        .collect();
    sink.write(
        "decohere_envelope.csv",
        &table_csv(
            "envelope_series",
            &format!("hbar={hbar}"),
            &["t", "envelope_peak", "hill_peak", "ratio"],
            &table,
        ),
    )?;
    let report = DecohereReport {
        hbar,
        drift: rows(&cm.a),
        diffusion: rows(&cm.d),
        times,
        grids,
        signatures_constant: violations.is_empty(),
        signatures,
        violations,
        envelope,
        ratio_nonincreasing,
        integrals,
    };
    sink.write(
        "decohere_report.json",
        &report_json("decohere", ctx.seed, cfg, &report)?,
    )?;
    let lines = vec![format!(
        "signatures constant: {}, envelope ratio nonincreasing: {:?}",
        report.signatures_constant, report.ratio_nonincreasing
    )];
    Ok(Outcome {
        written: sink.written,
        lines,
        ok: true,
    })
}

#[derive(Serialize)]
struct CoefficientRow {
    k: usize,
    angle: f64,
    re: f64,
    im: f64,
    modulus: f64,
}

#[derive(Serialize)]
struct CrossTermRow {
    k: usize,
    j: usize,
    pattern: FringePattern,
    envelope_covariance: Vec<Vec<f64>>,
}

#[derive(Serialize)]
struct FwhmRow {
    nbar: f64,
    fwhm: f64,
    closed_form: Option<f64>,
}

#[derive(Serialize)]
struct KerrReport {
    hbar: f64,
    mu: u32,
    nu: u32,
    nbar: f64,
    period: u32,
    component_count: usize,
    coefficients: Vec<CoefficientRow>,
    cross_terms: Vec<CrossTermRow>,
    integral: f64,
    purity: f64,
    fwhm_sweep: Vec<FwhmRow>,
    fwhm_decreasing: bool,
    grid: GridInfo,
}

fn binary_fwhm(rho: &GaussianMixed, tol: f64) -> Result<f64> {
    let cross = kerr_cross_terms(rho, 1, 2, tol)?;
    let term = &cross
        .first()
        .context("binary state has no cross term")?
        .term;
    let c = rho.center.as_vector();
    let dir = if c.norm() > 0.0 {
        c / c.norm()
    } else {
        RVec::from_vec(vec![1.0, 0.0])
    };
    Ok(envelope_fwhm(term, &dir))
}

pub fn cmd_kerr(ctx: &RunContext) -> Result<Outcome> {
    let cfg = &ctx.config;
    let kc = cfg.kerr();
    let rho = cfg.kerr_input()?;
    let hbar = cfg.hbar();
    let st = kerr_cat(&rho, kc.mu, kc.nu)?;
    let coeffs = kerr_coefficients(kc.mu, kc.nu)?;
    let coefficients: Vec<CoefficientRow> = coeffs
        .coeffs
        .iter()
        .enumerate()
        .map(|(k, c)| CoefficientRow {
            k,
            angle: coeffs.angle(k),
            re: c.re,
            im: c.im,
            modulus: c.norm(),
        })
        .collect();
    let cross_terms = kerr_cross_terms(&rho, kc.mu, kc.nu, cfg.tolerances.fringe_pattern)?
        .into_iter()
        .map(|c| {
            Ok(CrossTermRow {
                k: c.k,
                j: c.j,
                pattern: c.pattern,
                envelope_covariance: rows(&term_envelope_covariance(&c.term)?),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let mut fwhm_sweep = Vec::new();
    for &nbar in &kc.fwhm_sweep {
        let r = GaussianMixed::new(rho.s.clone(), rho.center.clone(), nbar, hbar)?;
        fwhm_sweep.push(FwhmRow {
            nbar,
            fwhm: binary_fwhm(&r, cfg.tolerances.fringe_pattern)?,
            closed_form: kc.s.is_none().then(|| binary_fringe_fwhm(nbar, hbar)),
        });
    }
    let fwhm_decreasing = fwhm_sweep
        .windows(2)
        .all(|w| w[1].nbar <= w[0].nbar || w[1].fwhm < w[0].fwhm);
    let mut sink = Sink::new(&ctx.out)?;
    let state = state_descriptor("kerr", hbar, &kc)?;
    let grid = emit_grid(&mut sink, "kerr_wigner.csv", &st, cfg.axes()?, &state)?;
    let coef_rows: Vec<Vec<f64>> = coefficients
        .iter()
        .map(|c| vec![c.k as f64, c.angle, c.re, c.im, c.modulus])
        .collect();
    sink.write(
        "kerr_coefficients.csv",
        &table_csv(
            "kerr_coefficients",
            &format!("mu={} nu={} period={}", kc.mu, kc.nu, coeffs.period),
            &["k", "angle", "re", "im", "modulus"],
            &coef_rows,
        ),
    )?;
    let fwhm_rows: Vec<Vec<f64>> = fwhm_sweep
        .iter()
        .map(|r| vec![r.nbar, r.fwhm, r.closed_form.unwrap_or(f64::NAN)])
        .collect();
    sink.write(
        "kerr_fwhm.csv",
        &table_csv(
            "fringe_fwhm",
            &format!("hbar={hbar}"),
            &["nbar", "fwhm", "closed_form"],
            &fwhm_rows,
        ),
    )?;
    let report = KerrReport {
        hbar,
        mu: kc.mu,
        nu: kc.nu,
        nbar: kc.nbar,
        period: coeffs.period,
        component_count: coeffs.component_count(),
        coefficients,
        cross_terms,
        integral: st.integral().re,
        purity: st.purity()?,
        fwhm_sweep,
        fwhm_decreasing,
        grid,
    };
    sink.write(
        "kerr_report.json",
        &report_json("kerr", ctx.seed, cfg, &report)?,
    )?;
    let lines = vec![format!(
        "{} components, {} cross terms, fringe FWHM decreasing: {}",
        report.component_count,
        report.cross_terms.len(),
        report.fwhm_decreasing
    )];
    Ok(Outcome {
        written: sink.written,
        lines,
        ok: true,
    })
}

#[derive(Serialize)]
struct PairInfo {
    branches: [usize; 2],
    thetas: Vec<f64>,
    classification: FringeClass,
}

#[derive(Serialize)]
struct KhoReport {
    params: KHOParams,
    frozen: bool,
    squeeze: f64,
    fidelity: f64,
    section_l2: f64,
    section_max_difference: f64,
    swarm_norm: f64,
    initial_residual: f64,
    branch_count: usize,
    section_q: f64,
    demo_pair: Option<PairInfo>,
}

pub fn cmd_kho(ctx: &RunContext) -> Result<Outcome> {
    let cfg = &ctx.config;
    let (setup, frozen) = cfg.kho_setup()?;
    let cmp = kho_compare(&setup, frozen)?;
    let mut sink = Sink::new(&ctx.out)?;
    let meta = format!(
        "hbar={} K={} tau={} kicks={} squeeze={} q={}",
        setup.params.hbar,
        setup.params.k,
        setup.params.tau,
        setup.params.kicks,
        setup.squeeze,
        setup.section_q
    );
    let section: Vec<Vec<f64>> = cmp
        .momenta
        .iter()
        .zip(cmp.section_exact.iter().zip(&cmp.section_swarm))
        .map(|(p, (e, s))| vec![*p, *e, *s])
        .collect();
    sink.write(
        "kho_section.csv",
        &table_csv("wigner_section", &meta, &["p", "exact", "swarm"], &section),
    )?;
    let manifold: Vec<Vec<f64>> = cmp
        .swarm
        .nodes
        .iter()
        .zip(cmp.swarm.weights.iter().zip(&cmp.swarm.branches))
        .map(|(n, (w, b))| vec![*n, *w, b.center.q()[0], b.center.p()[0]])
        .collect();
    sink.write(
        "kho_manifold.csv",
        &table_csv(
            "branch_centers",
            &meta,
            &["node", "weight", "q", "p"],
            &manifold,
        ),
    )?;
    let demo_pair = if cmp.swarm.branches.len() >= 2 {
        let (i, j) = demo_pair(&cmp.swarm);
        let demo = pairwise_cat_demo(&cmp.swarm, i, j)?;
        Some(PairInfo {
            branches: [i, j],
            thetas: demo.normal_form.thetas.clone(),
            classification: demo.class,
        })
    } else {
        None
    };
    let section_max_difference = cmp
        .section_exact
        .iter()
        .zip(&cmp.section_swarm)
        .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
    let report = KhoReport {
        params: setup.params,
        frozen,
        squeeze: setup.squeeze,
        fidelity: cmp.fidelity,
        section_l2: cmp.section_l2,
        section_max_difference,
        swarm_norm: cmp.swarm_norm,
        initial_residual: cmp.initial_residual,
        branch_count: cmp.swarm.branches.len(),
        section_q: setup.section_q,
        demo_pair,
    };
    sink.write(
        "kho_report.json",
        &report_json("kho", ctx.seed, cfg, &report)?,
    )?;
    let lines = vec![format!(
        "fidelity {:.6}, section L2 {:.4e}, {} branches",
        report.fidelity, report.section_l2, report.branch_count
    )];
    Ok(Outcome {
        written: sink.written,
        lines,
        ok: true,
    })
}

#[derive(Serialize)]
struct VerifyReport {
    passed: bool,
    criteria: Vec<CriterionReport>,
}

pub fn cmd_verify(ctx: &RunContext) -> Result<Outcome> {
    let criteria = run_all(ctx.seed);
    let passed = criteria.iter().all(CriterionReport::passed);
    let lines = criteria.iter().map(CriterionReport::summary_line).collect();
    let mut sink = Sink::new(&ctx.out)?;
    let report = VerifyReport { passed, criteria };
    sink.write(
        "verify_report.json",
        &report_json("verify", ctx.seed, &ctx.config, &report)?,
    )?;
    Ok(Outcome {
        written: sink.written,
        lines,
        ok: passed,
    })
}
