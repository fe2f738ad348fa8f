//! Run configuration: one JSON document per run.

use std::fmt;
use std::path::{Path, PathBuf};

use phasecat::cat::PureCat;
use phasecat::kerr::GaussianMixed;
use phasecat::linalg::{CVec, RMat, C64};
use phasecat::lindblad::LindbladChannel;
use phasecat::semiclassical::{KHOParams, KhoSetup, NodeSpec};
use phasecat::states::{Axis, GaussianPure};
use phasecat::symplectic::{PhaseVector, SymplecticMatrix};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub field: String,
    pub message: String,
}

impl ConfigError {
    fn new(field: impl Into<String>, message: impl fmt::Display) -> Self {
        Self {
            field: field.into(),
            message: message.to_string(),
        }
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.field.is_empty() {
            write!(f, "{}", self.message)
        } else {
            write!(f, "field `{}`: {}", self.field, self.message)
        }
    }
}

impl std::error::Error for ConfigError {}

type Checked<T> = Result<T, ConfigError>;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// When present, must name the subcommand being run.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub subcommand: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hbar: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cat: Option<CatConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub channel: Option<ChannelConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub times: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kerr: Option<KerrConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kho: Option<KhoConfig>,
    #[serde(default)]
    pub tolerances: Tolerances,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AxisConfig {
    pub min: f64,
    pub max: f64,
    pub count: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub q: AxisConfig,
    pub p: AxisConfig,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CatPreset {
    /// Two coherent states on the `q` axis.
    CoherentPair,
    /// Coherent state at `−d/2`, squeezed state at `+d/2`.
    CoherentSqueezed,
    /// `diag(s, 1/s)` and `diag(1/s, s)`, both at the origin.
    OrthogonalSqueezed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BranchConfig {
    /// Row-major symplectic matrix.
    pub s: Vec<Vec<f64>>,
    pub center: Vec<f64>,
    /// `[re, im]`.
    #[serde(default = "unit_amplitude")]
    pub amplitude: [f64; 2],
}

fn unit_amplitude() -> [f64; 2] {
    [1.0, 0.0]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CatConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preset: Option<CatPreset>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub squeeze: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub separation: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub branches: Option<Vec<BranchConfig>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ChannelConfig {
    /// Unit-frequency oscillators damped at `kappa` towards occupation `nbar`.
    Damped { kappa: f64, nbar: f64 },
    /// Hamiltonian matrix `b` and Lindblad vectors as lists of `[re, im]`.
    General {
        b: Vec<Vec<f64>>,
        lambdas: Vec<Vec<[f64; 2]>>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KerrConfig {
    #[serde(default = "one")]
    pub mu: u32,
    #[serde(default = "four")]
    pub nu: u32,
    #[serde(default = "half")]
    pub nbar: f64,
    #[serde(default = "default_displacement")]
    pub displacement: [f64; 2],
    /// Optional squeezing of the input before displacement.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub s: Option<Vec<Vec<f64>>>,
    #[serde(default = "default_sweep")]
    pub fwhm_sweep: Vec<f64>,
}

impl Default for KerrConfig {
    fn default() -> Self {
        Self {
            mu: 1,
            nu: 4,
            nbar: 0.5,
            displacement: default_displacement(),
            s: None,
            fwhm_sweep: default_sweep(),
        }
    }
}

fn one() -> u32 {
    1
}

fn four() -> u32 {
    4
}

fn half() -> f64 {
    0.5
}

fn default_displacement() -> [f64; 2] {
    [2.0, 0.0]
}

fn default_sweep() -> Vec<f64> {
    vec![0.0, 0.5, 1.0, 2.0]
}

/// Overrides of the reference kicked-oscillator setup.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KhoConfig {
    pub k: Option<f64>,
    pub tau: Option<f64>,
    pub hbar: Option<f64>,
    pub kicks: Option<usize>,
    pub squeeze: Option<f64>,
    pub grid_points: Option<usize>,
    pub grid_length: Option<f64>,
    pub section_q: Option<f64>,
    pub p_min: Option<f64>,
    pub p_max: Option<f64>,
    pub p_points: Option<usize>,
    pub span_sigmas: Option<f64>,
    pub spacing: Option<f64>,
    #[serde(default)]
    pub frozen: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    /// Largest `θ` still classified as linear.
    #[serde(default = "default_theta_tol")]
    pub linear_theta: f64,
    /// Threshold for the fringe-pattern classification of Kerr cross terms.
    #[serde(default = "default_theta_tol")]
    pub fringe_pattern: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            linear_theta: default_theta_tol(),
            fringe_pattern: default_theta_tol(),
        }
    }
}

fn default_theta_tol() -> f64 {
    1e-9
}

/// Parses a config, reporting the line, column and field path of any failure.
pub fn parse(text: &str, origin: &Path) -> Checked<RunConfig> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let cfg: RunConfig = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        let inner = e.into_inner();
        ConfigError::new(
            if path == "." { String::new() } else { path },
            format!(
                "{}: line {}, column {}: {}",
                origin.display(),
                inner.line(),
                inner.column(),
                strip_position(&inner.to_string())
            ),
        )
    })?;
    cfg.validate()?;
    Ok(cfg)
}

fn strip_position(msg: &str) -> &str {
    msg.split(" at line ").next().unwrap_or(msg)
}

pub fn load(path: &Path) -> Checked<RunConfig> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| ConfigError::new("", format!("{}: {e}", path.display())))?;
    parse(&text, path)
}

fn finite(field: &str, v: f64) -> Checked<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(ConfigError::new(field, "must be finite"))
    }
}

fn positive(field: &str, v: f64) -> Checked<f64> {
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err(ConfigError::new(
            field,
            format!("must be positive, got {v}"),
        ))
    }
}

fn matrix(field: &str, rows: &[Vec<f64>]) -> Checked<RMat> {
    let dim = rows.len();
    if dim == 0 || rows.iter().any(|r| r.len() != dim) {
        return Err(ConfigError::new(
            field,
            "must be a non-empty square list of rows",
        ));
    }
    let flat: Vec<f64> = rows.iter().flatten().copied().collect();
    if flat.iter().any(|v| !v.is_finite()) {
        return Err(ConfigError::new(field, "must be finite"));
    }
    Ok(RMat::from_row_slice(dim, dim, &flat))
}

fn symplectic(field: &str, rows: &[Vec<f64>]) -> Checked<SymplecticMatrix> {
    SymplecticMatrix::new(matrix(field, rows)?).map_err(|e| ConfigError::new(field, e))
}

fn phase_vector(field: &str, v: &[f64]) -> Checked<PhaseVector> {
    PhaseVector::new(v.to_vec()).map_err(|e| ConfigError::new(field, e))
}

fn axis(field: &str, a: &AxisConfig) -> Checked<Axis> {
    Axis::new(a.min, a.max, a.count).map_err(|e| ConfigError::new(field, e))
}

impl RunConfig {
    /// Structural checks that need no subcommand context.
    pub fn validate(&self) -> Checked<()> {
        if let Some(h) = self.hbar {
            positive("hbar", h)?;
        }
        if let Some(g) = &self.grid {
            axis("grid.q", &g.q)?;
            axis("grid.p", &g.p)?;
        }
        if let Some(c) = &self.cat {
            self.build_cat_from(c)?;
        }
        if let Some(ts) = &self.times {
            for (i, t) in ts.iter().enumerate() {
                let f = format!("times[{i}]");
                if !(finite(&f, *t)? >= 0.0) {
                    return Err(ConfigError::new(f, "must be non-negative"));
                }
            }
        }
        if let Some(ch) = &self.channel {
            self.build_channel_from(ch, None)?;
        }
        if let Some(k) = &self.kerr {
            self.kerr_input_from(k)?;
        }
        if let Some(k) = &self.kho {
            kho_setup_from(k)?;
        }
        positive("tolerances.linear_theta", self.tolerances.linear_theta)?;
        positive("tolerances.fringe_pattern", self.tolerances.fringe_pattern)?;
        Ok(())
    }

    pub fn check_subcommand(&self, name: &str) -> Checked<()> {
        match &self.subcommand {
            Some(s) if s != name => Err(ConfigError::new(
                "subcommand",
                format!("config is for `{s}`, not `{name}`"),
            )),
            _ => Ok(()),
        }
    }

    pub fn hbar(&self) -> f64 {
        self.hbar.unwrap_or(1.0)
    }

    pub fn axes(&self) -> Checked<(Axis, Axis)> {
        let g = self.grid.unwrap_or(GridConfig {
            q: AxisConfig {
                min: -5.0,
                max: 5.0,
                count: 101,
            },
            p: AxisConfig {
                min: -5.0,
                max: 5.0,
                count: 101,
            },
        });
        Ok((axis("grid.q", &g.q)?, axis("grid.p", &g.p)?))
    }

    pub fn build_cat(&self) -> Checked<PureCat> {
        let c = self
            .cat
            .as_ref()
            .ok_or_else(|| ConfigError::new("cat", "section is required"))?;
        self.build_cat_from(c)
    }

    fn build_cat_from(&self, c: &CatConfig) -> Checked<PureCat> {
        let hbar = self.hbar();
        let fail = |f: &str, e: phasecat::Error| ConfigError::new(f, e);
        match (&c.preset, &c.branches) {
            (Some(_), Some(_)) => Err(ConfigError::new(
                "cat",
                "give either `preset` or `branches`, not both",
            )),
            (None, None) => Err(ConfigError::new(
                "cat",
                "one of `preset` or `branches` is required",
            )),
            (Some(preset), None) => {
                let s = positive("cat.squeeze", c.squeeze.unwrap_or(2.0))?;
                let d = finite("cat.separation", c.separation.unwrap_or(4.0))?;
                let sq =
                    |v: f64| SymplecticMatrix::squeeze(&[v]).map_err(|e| fail("cat.squeeze", e));
                let at =
                    |q: f64| PhaseVector::new(vec![q, 0.0]).map_err(|e| fail("cat.separation", e));
                let (g1, g2) = match preset {
                    CatPreset::CoherentPair => (
                        GaussianPure::coherent(at(-d / 2.0)?, hbar),
                        GaussianPure::coherent(at(d / 2.0)?, hbar),
                    ),
                    CatPreset::CoherentSqueezed => (
                        GaussianPure::coherent(at(-d / 2.0)?, hbar),
                        GaussianPure::new(sq(s)?, at(d / 2.0)?, hbar),
                    ),
                    CatPreset::OrthogonalSqueezed => (
                        GaussianPure::new(sq(s)?, PhaseVector::zeros(1), hbar),
                        GaussianPure::new(sq(1.0 / s)?, PhaseVector::zeros(1), hbar),
                    ),
                };
                let one = C64::new(1.0, 0.0);
                PureCat::new(
                    one,
                    one,
                    g1.map_err(|e| fail("cat", e))?,
                    g2.map_err(|e| fail("cat", e))?,
                )
                .map_err(|e| fail("cat", e))
            }
            (None, Some(bs)) => {
                if bs.len() != 2 {
                    return Err(ConfigError::new(
                        "cat.branches",
                        format!("needs exactly 2 entries, got {}", bs.len()),
                    ));
                }
                let mut gs = Vec::new();
                let mut amps = Vec::new();
                for (i, b) in bs.iter().enumerate() {
                    let f = format!("cat.branches[{i}]");
                    let s = symplectic(&format!("{f}.s"), &b.s)?;
                    let z = phase_vector(&format!("{f}.center"), &b.center)?;
                    if z.dim() != s.matrix().nrows() {
                        return Err(ConfigError::new(
                            format!("{f}.center"),
                            format!(
                                "has {} entries, `s` is {}×{}",
                                z.dim(),
                                s.matrix().nrows(),
                                s.matrix().nrows()
                            ),
                        ));
                    }
                    let a = C64::new(
                        finite(&format!("{f}.amplitude"), b.amplitude[0])?,
                        b.amplitude[1],
                    );
                    finite(&format!("{f}.amplitude"), b.amplitude[1])?;
                    gs.push(GaussianPure::new(s, z, hbar).map_err(|e| fail(&f, e))?);
                    amps.push(a);
                }
                let g2 = gs.pop().expect("two branches");
                let g1 = gs.pop().expect("two branches");
                PureCat::new(amps[0], amps[1], g1, g2).map_err(|e| fail("cat.branches", e))
            }
        }
    }

    /// Times at which to evolve, defaulting to `[0, 0.5, 1, 2]`.
    pub fn times(&self) -> Vec<f64> {
        self.times
            .clone()
            .unwrap_or_else(|| vec![0.0, 0.5, 1.0, 2.0])
    }

    pub fn build_channel(&self, n: usize) -> Checked<LindbladChannel> {
        let default = ChannelConfig::Damped {
            kappa: 0.5,
            nbar: 0.0,
        };
        self.build_channel_from(self.channel.as_ref().unwrap_or(&default), Some(n))
    }

    fn build_channel_from(&self, ch: &ChannelConfig, n: Option<usize>) -> Checked<LindbladChannel> {
        let hbar = self.hbar();
        let out = match ch {
            ChannelConfig::Damped { kappa, nbar } => {
                if !(kappa.is_finite() && *kappa >= 0.0) {
                    return Err(ConfigError::new("channel.kappa", "must be non-negative"));
                }
                if !(nbar.is_finite() && *nbar >= 0.0) {
                    return Err(ConfigError::new("channel.nbar", "must be non-negative"));
                }
                LindbladChannel::damped_oscillator(n.unwrap_or(1), *kappa, *nbar, hbar)
                    .map_err(|e| ConfigError::new("channel", e))?
            }
            ChannelConfig::General { b, lambdas } => {
                let bm = matrix("channel.b", b)?;
                let mut ls = Vec::new();
                for (i, l) in lambdas.iter().enumerate() {
                    let f = format!("channel.lambdas[{i}]");
                    if l.iter().flatten().any(|v| !v.is_finite()) {
                        return Err(ConfigError::new(f, "must be finite"));
                    }
                    ls.push(CVec::from_iterator(
                        l.len(),
                        l.iter().map(|z| C64::new(z[0], z[1])),
                    ));
                }
                LindbladChannel::new(bm, ls, hbar).map_err(|e| ConfigError::new("channel", e))?
            }
        };
        if let Some(n) = n {
            if out.n() != n {
                return Err(ConfigError::new(
                    "channel",
                    format!("acts on {} modes, the state has {n}", out.n()),
                ));
            }
        }
        Ok(out)
    }

    pub fn kerr(&self) -> KerrConfig {
        self.kerr.clone().unwrap_or_default()
    }

    pub fn kerr_input(&self) -> Checked<GaussianMixed> {
        self.kerr_input_from(&self.kerr())
    }

    fn kerr_input_from(&self, k: &KerrConfig) -> Checked<GaussianMixed> {
        if k.nu == 0 || k.mu == 0 {
            return Err(ConfigError::new("kerr", "`mu` and `nu` must be positive"));
        }
        if !(k.nbar.is_finite() && k.nbar >= 0.0) {
            return Err(ConfigError::new("kerr.nbar", "must be non-negative"));
        }
        for (i, v) in k.fwhm_sweep.iter().enumerate() {
            if !(v.is_finite() && *v >= 0.0) {
                return Err(ConfigError::new(
                    format!("kerr.fwhm_sweep[{i}]"),
                    "must be non-negative",
                ));
            }
        }
        let s = match &k.s {
            Some(rows) => symplectic("kerr.s", rows)?,
            None => SymplecticMatrix::identity(1),
        };
        if s.n() != 1 {
            return Err(ConfigError::new("kerr.s", "must be 2×2"));
        }
        let c = phase_vector("kerr.displacement", &k.displacement)?;
        GaussianMixed::new(s, c, k.nbar, self.hbar()).map_err(|e| ConfigError::new("kerr", e))
    }

    pub fn kho_setup(&self) -> Checked<(KhoSetup, bool)> {
        let k = self.kho.clone().unwrap_or_default();
        Ok((kho_setup_from(&k)?, k.frozen))
    }
}

fn kho_setup_from(k: &KhoConfig) -> Checked<KhoSetup> {
    let base = KhoSetup::reference();
    let p = base.params;
    let params = KHOParams::new(
        finite("kho.k", k.k.unwrap_or(p.k))?,
        positive("kho.tau", k.tau.unwrap_or(p.tau))?,
        positive("kho.hbar", k.hbar.unwrap_or(p.hbar))?,
        k.kicks.unwrap_or(p.kicks),
    )
    .map_err(|e| ConfigError::new("kho", e))?;
    let setup = KhoSetup {
        params,
        squeeze: positive("kho.squeeze", k.squeeze.unwrap_or(base.squeeze))?,
        grid_points: k.grid_points.unwrap_or(base.grid_points),
        grid_length: positive("kho.grid_length", k.grid_length.unwrap_or(base.grid_length))?,
        section_q: finite("kho.section_q", k.section_q.unwrap_or(base.section_q))?,
        p_min: finite("kho.p_min", k.p_min.unwrap_or(base.p_min))?,
        p_max: finite("kho.p_max", k.p_max.unwrap_or(base.p_max))?,
        p_points: k.p_points.unwrap_or(base.p_points),
        nodes: NodeSpec {
            span_sigmas: positive(
                "kho.span_sigmas",
                k.span_sigmas.unwrap_or(base.nodes.span_sigmas),
            )?,
            spacing: positive("kho.spacing", k.spacing.unwrap_or(base.nodes.spacing))?,
        },
    };
    if setup.grid_points < 16 || !setup.grid_points.is_power_of_two() {
        return Err(ConfigError::new(
            "kho.grid_points",
            "must be a power of two ≥ 16",
        ));
    }
    if setup.p_points < 2 || !(setup.p_max > setup.p_min) {
        return Err(ConfigError::new(
            "kho.p_points",
            "section needs p_max > p_min and at least 2 points",
        ));
    }
    Ok(setup)
}
