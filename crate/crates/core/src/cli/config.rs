//! `key = value` configuration with `[section]` headers.
//!
//! ```text
//! experiment = run
//! seed = 7
//!
//! [grid]
//! x1_min = -1
//! n1 = 96
//!
//! [datum]
//! kind = dirac
//! m = 16
//! ```
//!
//! `#` starts a comment. Every key may be overridden from the environment as
//! `BURG2D_<SECTION>_<KEY>` (top-level keys as `BURG2D_<KEY>`).

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::PathBuf;

use crate::data::{dirac_family, mollified_line_measure, nwave_slice, InitialDatum, Kernel, MollifierSpec, NWaveParams, Profile1D};
use crate::diagnostics::{DiagnosticSpec, Probe};
use crate::grid::{Boundary, Grid2D, Rect};
use crate::scheme::{SchemeConfig, Splitting};
use crate::selfsim::VSSParams;
use crate::{Error, Result};

pub const ENV_PREFIX: &str = "BURG2D_";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Experiment {
    Run,
    Sweep,
    Semigroup,
    Selfsim,
    Calibrate,
    Validate,
}

impl Experiment {
    pub const ALL: [Experiment; 6] = [
        Experiment::Run,
        Experiment::Sweep,
        Experiment::Semigroup,
        Experiment::Selfsim,
        Experiment::Calibrate,
        Experiment::Validate,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Experiment::Run => "run",
            Experiment::Sweep => "sweep",
            Experiment::Semigroup => "semigroup",
            Experiment::Selfsim => "selfsim",
            Experiment::Calibrate => "calibrate",
            Experiment::Validate => "validate",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|e| e.name() == s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SnapshotFormat {
    Csv,
    Raw,
}

impl SnapshotFormat {
    pub fn name(self) -> &'static str {
        match self {
            SnapshotFormat::Csv => "csv",
            SnapshotFormat::Raw => "raw",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub bounds: Rect,
    pub n1: usize,
    pub n2: usize,
    pub boundary: Boundary,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec {
            bounds: Rect::new((-1.0, 2.0), (-0.5, 5.0)),
            n1: 96,
            n2: 176,
            boundary: Boundary::Outflow,
        }
    }
}

impl GridSpec {
    pub fn build(&self) -> Result<Grid2D> {
        Grid2D::new(self.bounds, self.n1, self.n2, self.boundary)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DatumShape {
    Dirac { mass: f64, m: u32 },
    LineMeasure { g_lo: f64, g_hi: f64, g_height: f64, kernel: Kernel, width: f64 },
    Indicator { rect: Rect, height: f64 },
    NWave { p: f64, q: f64, t0: f64 },
    Riemann { u_left: f64, u_right: f64, x0: f64 },
    Constant { value: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DatumSpec {
    pub shape: DatumShape,
    /// Horizontal concentration `a ↦ ρ a(ρ x₁, x₂)`.
    pub rho: f64,
}

impl Default for DatumSpec {
    fn default() -> Self {
        DatumSpec {
            shape: DatumShape::Dirac { mass: 1.0, m: 16 },
            rho: 1.0,
        }
    }
}

impl DatumSpec {
    pub fn kind_name(&self) -> &'static str {
        match self.shape {
            DatumShape::Dirac { .. } => "dirac",
            DatumShape::LineMeasure { .. } => "line_measure",
            DatumShape::Indicator { .. } => "indicator",
            DatumShape::NWave { .. } => "nwave",
            DatumShape::Riemann { .. } => "riemann",
            DatumShape::Constant { .. } => "constant",
        }
    }

    pub fn build(&self) -> Result<InitialDatum> {
        let d = match self.shape {
            DatumShape::Dirac { mass, m } => dirac_family(mass, m)?,
            DatumShape::LineMeasure {
                g_lo,
                g_hi,
                g_height,
                kernel,
                width,
            } => mollified_line_measure(
                Profile1D::Indicator {
                    lo: g_lo,
                    hi: g_hi,
                    height: g_height,
                },
                MollifierSpec::horizontal(kernel, width)?,
            )?,
            DatumShape::Indicator { rect, height } => InitialDatum::indicator(rect, height)?,
            DatumShape::NWave { p, q, t0 } => nwave_slice(NWaveParams::new(p, q)?, t0)?,
            DatumShape::Riemann { u_left, u_right, x0 } => InitialDatum::riemann(u_left, u_right, x0),
            DatumShape::Constant { value } => InitialDatum::constant(value),
        };
        if self.rho == 1.0 {
            Ok(d)
        } else {
            crate::data::scale_datum(&d, self.rho)
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OutputSpec {
    pub dir: PathBuf,
    pub format: SnapshotFormat,
    pub snapshots: bool,
    pub plots: bool,
}

impl Default for OutputSpec {
    fn default() -> Self {
        OutputSpec {
            dir: PathBuf::from("out"),
            format: SnapshotFormat::Csv,
            snapshots: true,
            plots: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub m: Vec<u32>,
    /// Allowed relative spread of `‖u(t_end)‖∞` across members.
    pub decay_spread: f64,
}

impl Default for SweepSpec {
    fn default() -> Self {
        SweepSpec {
            m: vec![8, 16, 32, 64],
            decay_spread: 0.15,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SemigroupSpec {
    pub pairs: usize,
}

impl Default for SemigroupSpec {
    fn default() -> Self {
        SemigroupSpec { pairs: 10 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SelfsimSpec {
    pub c: f64,
    pub cst: f64,
    pub w_min: f64,
    pub w_max: f64,
    pub w_points: usize,
    pub starts: usize,
    pub span: f64,
    /// Constant for the `g` bound; calibrated from the run when absent.
    pub c_infty: Option<f64>,
}

impl Default for SelfsimSpec {
    fn default() -> Self {
        SelfsimSpec {
            c: 4.0 / 3.0,
            cst: 1.0 / 3.0,
            w_min: 0.1,
            w_max: 2.0,
            w_points: 64,
            starts: 100,
            span: 2.0,
            c_infty: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CalibrateSpec {
    pub inv_h: usize,
}

impl Default for CalibrateSpec {
    fn default() -> Self {
        CalibrateSpec { inv_h: 32 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValidateSpec {
    pub nwave_levels: Vec<usize>,
    pub nwave_cfl: f64,
    pub nwave_min_order: f64,
    pub nwave_max_error: f64,
    pub vss_levels: Vec<usize>,
    pub vss_cfl: f64,
    pub vss_min_order: f64,
}

impl Default for ValidateSpec {
    fn default() -> Self {
        ValidateSpec {
            nwave_levels: vec![128, 256, 512],
            nwave_cfl: 0.9,
            nwave_min_order: 0.7,
            nwave_max_error: 2e-3,
            vss_levels: vec![32, 64, 128],
            vss_cfl: 0.5,
            vss_min_order: 0.8,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    pub seed: u64,
    pub grid: GridSpec,
    pub datum: DatumSpec,
    pub scheme: SchemeConfig,
    pub diagnostics: DiagnosticSpec,
    pub output: OutputSpec,
    pub sweep: SweepSpec,
    pub semigroup: SemigroupSpec,
    pub selfsim: SelfsimSpec,
    pub calibrate: CalibrateSpec,
    pub validate: ValidateSpec,
}

impl ExperimentConfig {
    /// Defaults for every section.
    pub fn new(experiment: Experiment) -> Self {
        ExperimentConfig {
            experiment,
            seed: 0,
            grid: GridSpec::default(),
            datum: DatumSpec::default(),
            scheme: SchemeConfig::default(),
            diagnostics: DiagnosticSpec::default(),
            output: OutputSpec::default(),
            sweep: SweepSpec::default(),
            semigroup: SemigroupSpec::default(),
            selfsim: SelfsimSpec::default(),
            calibrate: CalibrateSpec::default(),
            validate: ValidateSpec::default(),
        }
    }

    /// Checks every section against its module invariants.
    pub fn validate(&self) -> Result<()> {
        self.grid.build()?;
        self.datum.build()?;
        self.scheme.validate()?;
        self.diagnostics.validate()?;
        VSSParams::new(self.selfsim.c)?;
        if self.experiment == Experiment::Sweep {
            if !matches!(self.datum.shape, DatumShape::Dirac { .. }) {
                return Err(Error::invalid("sweep needs datum kind = dirac"));
            }
            if self.sweep.m.is_empty() || self.sweep.m.contains(&0) {
                return Err(Error::invalid("sweep.m must list positive integers"));
            }
        }
        let s = &self.selfsim;
        if !(s.w_min > 0.0 && s.w_max > s.w_min && s.w_points >= 2 && s.span > 0.0 && s.cst.is_finite()) {
            return Err(Error::invalid("selfsim needs 0 < w_min < w_max, w_points ≥ 2, span > 0"));
        }
        if s.c_infty.is_some_and(|c| !(c > 0.0)) {
            return Err(Error::invalid("selfsim.c_infty must be positive"));
        }
        if self.calibrate.inv_h < 2 || !self.calibrate.inv_h.is_multiple_of(2) {
            return Err(Error::invalid("calibrate.inv_h must be an even integer ≥ 2"));
        }
        let v = &self.validate;
        if v.nwave_levels.len() < 2 || v.vss_levels.len() < 2 {
            return Err(Error::invalid("validate needs at least two refinement levels per study"));
        }
        if v.nwave_levels.iter().chain(&v.vss_levels).any(|&n| n == 0) {
            return Err(Error::invalid("refinement levels must be positive"));
        }
        for cfl in [v.nwave_cfl, v.vss_cfl] {
            if !(cfl > 0.0 && cfl <= 1.0) {
                return Err(Error::invalid(format!("cfl must lie in (0, 1], got {cfl}")));
            }
        }
        Ok(())
    }
}

// ---------------------------------------------------------------- schema

const SECTIONS: [(&str, &[&str]); 11] = [
    ("", &["experiment", "seed"]),
    ("grid", &["x1_min", "x1_max", "x2_min", "x2_max", "n1", "n2", "boundary"]),
    (
        "datum",
        &[
            "kind", "mass", "m", "g_lo", "g_hi", "g_height", "kernel", "width", "x1_lo", "x1_hi", "x2_lo",
            "x2_hi", "height", "p", "q", "t0", "u_left", "u_right", "x0", "value", "rho",
        ],
    ),
    (
        "scheme",
        &["cfl", "t_end", "dt_max", "splitting", "quadrature_order", "snapshot_times"],
    ),
    (
        "diagnostics",
        &["q", "alpha", "support_threshold", "entropy", "probe", "probe_center", "probe_width"],
    ),
    ("output", &["dir", "format", "snapshots", "plots"]),
    ("sweep", &["m", "decay_spread"]),
    ("semigroup", &["pairs"]),
    (
        "selfsim",
        &["c", "cst", "w_min", "w_max", "w_points", "starts", "span", "c_infty"],
    ),
    ("calibrate", &["inv_h"]),
    (
        "validate",
        &[
            "nwave_levels",
            "nwave_cfl",
            "nwave_min_order",
            "nwave_max_error",
            "vss_levels",
            "vss_cfl",
            "vss_min_order",
        ],
    ),
];

fn section_keys(section: &str) -> Option<&'static [&'static str]> {
    SECTIONS.iter().find(|(s, _)| *s == section).map(|(_, k)| *k)
}

fn cfg_err(line: usize, message: impl Into<String>) -> Error {
    Error::Config {
        line,
        message: message.into(),
    }
}

#[derive(Debug, Clone)]
struct Entry {
    value: String,
    /// 0 for environment overrides.
    line: usize,
}

/// Raw `(section, key) → value` table with source lines.
#[derive(Debug, Clone, Default)]
pub struct RawConfig {
    entries: BTreeMap<(String, String), Entry>,
}

impl RawConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut raw = RawConfig::default();
        let mut section = String::new();
        for (k, line) in text.lines().enumerate() {
            let n = k + 1;
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix('[') {
                let name = rest
                    .strip_suffix(']')
                    .ok_or_else(|| cfg_err(n, "unterminated section header"))?
                    .trim();
                if name.is_empty() || section_keys(name).is_none() {
                    return Err(cfg_err(
                        n,
                        format!("unknown section [{name}]; expected one of {}", section_list()),
                    ));
                }
                section = name.to_string();
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| cfg_err(n, format!("expected key = value, got `{line}`")))?;
            let key = key.trim();
            check_key(&section, key, n)?;
            let prev = raw.entries.insert(
                (section.clone(), key.to_string()),
                Entry {
                    value: value.trim().to_string(),
                    line: n,
                },
            );
            if let Some(p) = prev {
                return Err(cfg_err(n, format!("duplicate key `{key}` (first set on line {})", p.line)));
            }
        }
        Ok(raw)
    }

    /// Applies `BURG2D_*` variables; other variables are ignored.
    pub fn apply_env(&mut self, vars: impl IntoIterator<Item = (String, String)>) -> Result<()> {
        for (name, value) in vars {
            let Some(rest) = name.strip_prefix(ENV_PREFIX) else {
                continue;
            };
            let rest = rest.to_ascii_lowercase();
            let (section, key) = match rest.split_once('_') {
                Some((s, k)) if !s.is_empty() && section_keys(s).is_some() => (s.to_string(), k.to_string()),
                _ => (String::new(), rest.clone()),
            };
            check_key(&section, &key, 0).map_err(|e| match e {
                Error::Config { message, .. } => cfg_err(0, format!("environment variable {name}: {message}")),
                e => e,
            })?;
            self.entries.insert((section, key), Entry { value, line: 0 });
        }
        Ok(())
    }

    fn get(&self, section: &str, key: &str) -> Option<&Entry> {
        self.entries.get(&(section.to_string(), key.to_string()))
    }
}

fn section_list() -> String {
    SECTIONS
        .iter()
        .filter(|(s, _)| !s.is_empty())
        .map(|(s, _)| *s)
        .collect::<Vec<_>>()
        .join(", ")
}

fn check_key(section: &str, key: &str, line: usize) -> Result<()> {
    let keys = section_keys(section).expect("section validated");
    if keys.contains(&key) {
        return Ok(());
    }
    let place = if section.is_empty() {
        "at top level".to_string()
    } else {
        format!("in [{section}]")
    };
    Err(cfg_err(
        line,
        format!("unknown key `{key}` {place}; expected one of {}", keys.join(", ")),
    ))
}

// ---------------------------------------------------------------- typed build

struct Reader<'a> {
    raw: &'a RawConfig,
    section: &'static str,
}

impl Reader<'_> {
    fn entry(&self, key: &str) -> Option<&Entry> {
        self.raw.get(self.section, key)
    }

    fn line(&self, key: &str) -> usize {
        self.entry(key).map_or(0, |e| e.line)
    }

    fn parsed<T>(&self, key: &str, what: &str, f: impl Fn(&str) -> Option<T>) -> Result<Option<T>> {
        match self.entry(key) {
            None => Ok(None),
            Some(e) => f(&e.value)
                .map(Some)
                .ok_or_else(|| cfg_err(e.line, format!("`{key}` expects {what}, got `{}`", e.value))),
        }
    }

    fn f64(&self, key: &str, default: f64) -> Result<f64> {
        Ok(self.parsed(key, "a number", parse_f64)?.unwrap_or(default))
    }

    fn opt_f64(&self, key: &str) -> Result<Option<f64>> {
        self.parsed(key, "a number", parse_f64)
    }

    fn usize(&self, key: &str, default: usize) -> Result<usize> {
        Ok(self.parsed(key, "a nonnegative integer", |s| s.parse().ok())?.unwrap_or(default))
    }

    fn bool(&self, key: &str, default: bool) -> Result<bool> {
        Ok(self
            .parsed(key, "true or false", |s| match s {
                "true" => Some(true),
                "false" => Some(false),
                _ => None,
            })?
            .unwrap_or(default))
    }

    fn list<T>(&self, key: &str, default: Vec<T>, f: impl Fn(&str) -> Option<T>) -> Result<Vec<T>> {
        Ok(self
            .parsed(key, "a comma-separated list", |s| {
                if s.is_empty() {
                    return Some(Vec::new());
                }
                s.split(',').map(|x| f(x.trim())).collect()
            })?
            .unwrap_or(default))
    }

    fn choice<T: Copy>(&self, key: &str, default: T, options: &[(&str, T)]) -> Result<T> {
        match self.entry(key) {
            None => Ok(default),
            Some(e) => options
                .iter()
                .find(|(n, _)| *n == e.value)
                .map(|(_, v)| *v)
                .ok_or_else(|| {
                    let names: Vec<&str> = options.iter().map(|(n, _)| *n).collect();
                    cfg_err(
                        e.line,
                        format!("unknown {key} `{}`; expected one of {}", e.value, names.join(", ")),
                    )
                }),
        }
    }
}

fn parse_f64(s: &str) -> Option<f64> {
    match s {
        "inf" => Some(f64::INFINITY),
        "-inf" => Some(f64::NEG_INFINITY),
        _ => s.parse::<f64>().ok().filter(|v| !v.is_nan()),
    }
}

/// Parses and validates a configuration.
pub fn parse_config(text: &str) -> Result<ExperimentConfig> {
    build(&RawConfig::parse(text)?)
}

/// Like [`parse_config`], then applies `BURG2D_*` overrides from `vars`.
pub fn parse_config_with_env(
    text: &str,
    vars: impl IntoIterator<Item = (String, String)>,
) -> Result<ExperimentConfig> {
    let mut raw = RawConfig::parse(text)?;
    raw.apply_env(vars)?;
    build(&raw)
}

fn build(raw: &RawConfig) -> Result<ExperimentConfig> {
    let top = Reader { raw, section: "" };
    let exp_entry = top.entry("experiment").ok_or_else(|| cfg_err(0, "missing required key `experiment`"))?;
    let experiment = Experiment::parse(&exp_entry.value).ok_or_else(|| {
        let names: Vec<&str> = Experiment::ALL.iter().map(|e| e.name()).collect();
        cfg_err(
            exp_entry.line,
            format!("unknown experiment `{}`; expected one of {}", exp_entry.value, names.join(", ")),
        )
    })?;
    let mut c = ExperimentConfig::new(experiment);
    c.seed = top.parsed("seed", "a nonnegative integer", |s| s.parse().ok())?.unwrap_or(0);

    let r = Reader { raw, section: "grid" };
    let d = GridSpec::default();
    c.grid = GridSpec {
        bounds: Rect::new(
            (r.f64("x1_min", d.bounds.x1_min)?, r.f64("x1_max", d.bounds.x1_max)?),
            (r.f64("x2_min", d.bounds.x2_min)?, r.f64("x2_max", d.bounds.x2_max)?),
        ),
        n1: r.usize("n1", d.n1)?,
        n2: r.usize("n2", d.n2)?,
        boundary: r.choice(
            "boundary",
            d.boundary,
            &[("outflow", Boundary::Outflow), ("periodic", Boundary::Periodic)],
        )?,
    };
    c.grid.build().map_err(|e| cfg_err(r.line("n1").max(r.line("x1_min")), e.to_string()))?;

    let r = Reader { raw, section: "datum" };
    let kind = r.choice(
        "kind",
        "dirac",
        &[
            ("dirac", "dirac"),
            ("line_measure", "line_measure"),
            ("indicator", "indicator"),
            ("nwave", "nwave"),
            ("riemann", "riemann"),
            ("constant", "constant"),
        ],
    )?;
    let shape = match kind {
        "dirac" => DatumShape::Dirac {
            mass: r.f64("mass", 1.0)?,
            m: r.usize("m", 16)? as u32,
        },
        "line_measure" => DatumShape::LineMeasure {
            g_lo: r.f64("g_lo", 0.0)?,
            g_hi: r.f64("g_hi", 1.0)?,
            g_height: r.f64("g_height", 1.0)?,
            kernel: r.choice(
                "kernel",
                Kernel::CosineBump,
                &[("cosine", Kernel::CosineBump), ("triangle", Kernel::Triangle)],
            )?,
            width: r.f64("width", 0.05)?,
        },
        "indicator" => DatumShape::Indicator {
            rect: Rect::new(
                (r.f64("x1_lo", -0.25)?, r.f64("x1_hi", 0.25)?),
                (r.f64("x2_lo", 0.0)?, r.f64("x2_hi", 0.5)?),
            ),
            height: r.f64("height", 2.0)?,
        },
        "nwave" => DatumShape::NWave {
            p: r.f64("p", 0.0)?,
            q: r.f64("q", 1.0)?,
            t0: r.f64("t0", 0.25)?,
        },
        "riemann" => DatumShape::Riemann {
            u_left: r.f64("u_left", -1.0)?,
            u_right: r.f64("u_right", 1.0)?,
            x0: r.f64("x0", 0.0)?,
        },
        _ => DatumShape::Constant {
            value: r.f64("value", 0.0)?,
        },
    };
    if let Some(stray) = stray_datum_key(raw, kind) {
        return Err(cfg_err(
            r.line(stray),
            format!("key `{stray}` does not apply to datum kind {kind}"),
        ));
    }
    c.datum = DatumSpec {
        shape,
        rho: r.f64("rho", 1.0)?,
    };
    c.datum.build().map_err(|e| cfg_err(r.line("kind"), e.to_string()))?;

    let r = Reader { raw, section: "scheme" };
    let d = SchemeConfig::default();
    c.scheme = SchemeConfig {
        cfl: r.f64("cfl", d.cfl)?,
        splitting: r.choice(
            "splitting",
            d.splitting,
            &[("unsplit", Splitting::Unsplit), ("strang", Splitting::Strang)],
        )?,
        t_end: r.f64("t_end", d.t_end)?,
        snapshot_times: r.list("snapshot_times", vec![], parse_f64)?,
        dt_max: r.f64("dt_max", d.dt_max)?,
        quadrature_order: r.usize("quadrature_order", d.quadrature_order)?,
    };
    if let Err(e) = c.scheme.validate() {
        let msg = e.to_string();
        let key = ["cfl", "t_end", "dt_max", "quadrature_order", "snapshot_times"]
            .into_iter()
            .find(|k| msg.contains(&k.replace('_', " ")) || msg.contains(k))
            .unwrap_or("cfl");
        return Err(cfg_err(r.line(key), msg));
    }

    let r = Reader { raw, section: "diagnostics" };
    let d = DiagnosticSpec::default();
    let probe_kind = r.choice(
        "probe",
        "none",
        &[("none", "none"), ("one", "one"), ("cosine", "cosine"), ("gaussian", "gaussian")],
    )?;
    let center = r.f64("probe_center", 0.0)?;
    let width = r.f64("probe_width", 0.5)?;
    c.diagnostics = DiagnosticSpec {
        q_list: r.list("q", d.q_list, parse_f64)?,
        alpha_list: r.list("alpha", d.alpha_list, parse_f64)?,
        support_threshold: r.f64("support_threshold", d.support_threshold)?,
        probe: match probe_kind {
            "none" => None,
            "one" => Some(Probe::One),
            "cosine" => Some(Probe::CosineBump { center, width }),
            _ => Some(Probe::Gaussian { center, width }),
        },
        entropy: r.bool("entropy", d.entropy)?,
    };
    c.diagnostics.validate().map_err(|e| cfg_err(r.line("q").max(r.line("alpha")), e.to_string()))?;

    let r = Reader { raw, section: "output" };
    let d = OutputSpec::default();
    c.output = OutputSpec {
        dir: r.entry("dir").map_or(d.dir, |e| PathBuf::from(&e.value)),
        format: r.choice(
            "format",
            d.format,
            &[("csv", SnapshotFormat::Csv), ("raw", SnapshotFormat::Raw)],
        )?,
        snapshots: r.bool("snapshots", d.snapshots)?,
        plots: r.bool("plots", d.plots)?,
    };

    let r = Reader { raw, section: "sweep" };
    let d = SweepSpec::default();
    c.sweep = SweepSpec {
        m: r.list("m", d.m, |s| s.parse().ok())?,
        decay_spread: r.f64("decay_spread", d.decay_spread)?,
    };

    let r = Reader { raw, section: "semigroup" };
    c.semigroup = SemigroupSpec {
        pairs: r.usize("pairs", SemigroupSpec::default().pairs)?,
    };

    let r = Reader { raw, section: "selfsim" };
    let d = SelfsimSpec::default();
    c.selfsim = SelfsimSpec {
        c: r.f64("c", d.c)?,
        cst: r.f64("cst", d.cst)?,
        w_min: r.f64("w_min", d.w_min)?,
        w_max: r.f64("w_max", d.w_max)?,
        w_points: r.usize("w_points", d.w_points)?,
        starts: r.usize("starts", d.starts)?,
        span: r.f64("span", d.span)?,
        c_infty: r.opt_f64("c_infty")?,
    };

    let r = Reader { raw, section: "calibrate" };
    c.calibrate = CalibrateSpec {
        inv_h: r.usize("inv_h", CalibrateSpec::default().inv_h)?,
    };

    let r = Reader { raw, section: "validate" };
    let d = ValidateSpec::default();
    c.validate = ValidateSpec {
        nwave_levels: r.list("nwave_levels", d.nwave_levels, |s| s.parse().ok())?,
        nwave_cfl: r.f64("nwave_cfl", d.nwave_cfl)?,
        nwave_min_order: r.f64("nwave_min_order", d.nwave_min_order)?,
        nwave_max_error: r.f64("nwave_max_error", d.nwave_max_error)?,
        vss_levels: r.list("vss_levels", d.vss_levels, |s| s.parse().ok())?,
        vss_cfl: r.f64("vss_cfl", d.vss_cfl)?,
        vss_min_order: r.f64("vss_min_order", d.vss_min_order)?,
    };

    c.validate().map_err(|e| cfg_err(0, e.to_string()))?;
    Ok(c)
}

fn stray_datum_key(raw: &RawConfig, kind: &str) -> Option<&'static str> {
    let allowed: &[&str] = match kind {
        "dirac" => &["mass", "m"],
        "line_measure" => &["g_lo", "g_hi", "g_height", "kernel", "width"],
        "indicator" => &["x1_lo", "x1_hi", "x2_lo", "x2_hi", "height"],
        "nwave" => &["p", "q", "t0"],
        "riemann" => &["u_left", "u_right", "x0"],
        _ => &["value"],
    };
    section_keys("datum")
        .expect("datum section")
        .iter()
        .copied()
        .filter(|k| !matches!(*k, "kind" | "rho"))
        .find(|k| !allowed.contains(k) && raw.get("datum", k).is_some())
}

// ---------------------------------------------------------------- render

fn fl(v: f64) -> String {
    format!("{v:?}")
}

fn join<T>(xs: &[T], f: impl Fn(&T) -> String) -> String {
    xs.iter().map(f).collect::<Vec<_>>().join(", ")
}

/// Writes every field explicitly; `parse_config(&render(c)) == c`.
pub fn render(c: &ExperimentConfig) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "experiment = {}", c.experiment.name());
    let _ = writeln!(s, "seed = {}", c.seed);

    let g = &c.grid;
    let _ = writeln!(s, "\n[grid]");
    let _ = writeln!(s, "x1_min = {}\nx1_max = {}", fl(g.bounds.x1_min), fl(g.bounds.x1_max));
    let _ = writeln!(s, "x2_min = {}\nx2_max = {}", fl(g.bounds.x2_min), fl(g.bounds.x2_max));
    let _ = writeln!(s, "n1 = {}\nn2 = {}", g.n1, g.n2);
    let boundary = match g.boundary {
        Boundary::Outflow => "outflow",
        Boundary::Periodic => "periodic",
    };
    let _ = writeln!(s, "boundary = {boundary}");

    let _ = writeln!(s, "\n[datum]\nkind = {}", c.datum.kind_name());
    match c.datum.shape {
        DatumShape::Dirac { mass, m } => {
            let _ = writeln!(s, "mass = {}\nm = {m}", fl(mass));
        }
        DatumShape::LineMeasure {
            g_lo,
            g_hi,
            g_height,
            kernel,
            width,
        } => {
            let k = match kernel {
                Kernel::CosineBump => "cosine",
                Kernel::Triangle => "triangle",
            };
            let _ = writeln!(
                s,
                "g_lo = {}\ng_hi = {}\ng_height = {}\nkernel = {k}\nwidth = {}",
                fl(g_lo),
                fl(g_hi),
                fl(g_height),
                fl(width)
            );
        }
        DatumShape::Indicator { rect, height } => {
            let _ = writeln!(
                s,
                "x1_lo = {}\nx1_hi = {}\nx2_lo = {}\nx2_hi = {}\nheight = {}",
                fl(rect.x1_min),
                fl(rect.x1_max),
                fl(rect.x2_min),
                fl(rect.x2_max),
                fl(height)
            );
        }
        DatumShape::NWave { p, q, t0 } => {
            let _ = writeln!(s, "p = {}\nq = {}\nt0 = {}", fl(p), fl(q), fl(t0));
        }
        DatumShape::Riemann { u_left, u_right, x0 } => {
            let _ = writeln!(s, "u_left = {}\nu_right = {}\nx0 = {}", fl(u_left), fl(u_right), fl(x0));
        }
        DatumShape::Constant { value } => {
            let _ = writeln!(s, "value = {}", fl(value));
        }
    }
    let _ = writeln!(s, "rho = {}", fl(c.datum.rho));

    let sc = &c.scheme;
    let split = match sc.splitting {
        Splitting::Unsplit => "unsplit",
        Splitting::Strang => "strang",
    };
    let _ = writeln!(s, "\n[scheme]");
    let _ = writeln!(s, "cfl = {}\nt_end = {}\ndt_max = {}", fl(sc.cfl), fl(sc.t_end), fl(sc.dt_max));
    let _ = writeln!(s, "splitting = {split}\nquadrature_order = {}", sc.quadrature_order);
    let _ = writeln!(s, "snapshot_times = {}", join(&sc.snapshot_times, |v| fl(*v)));

    let d = &c.diagnostics;
    let _ = writeln!(s, "\n[diagnostics]");
    let _ = writeln!(s, "q = {}\nalpha = {}", join(&d.q_list, |v| fl(*v)), join(&d.alpha_list, |v| fl(*v)));
    let _ = writeln!(s, "support_threshold = {}\nentropy = {}", fl(d.support_threshold), d.entropy);
    match d.probe {
        None => {
            let _ = writeln!(s, "probe = none");
        }
        Some(Probe::One) => {
            let _ = writeln!(s, "probe = one");
        }
        Some(Probe::CosineBump { center, width }) | Some(Probe::Gaussian { center, width }) => {
            let name = if matches!(d.probe, Some(Probe::Gaussian { .. })) {
                "gaussian"
            } else {
                "cosine"
            };
            let _ = writeln!(s, "probe = {name}\nprobe_center = {}\nprobe_width = {}", fl(center), fl(width));
        }
    }

    let o = &c.output;
    let _ = writeln!(s, "\n[output]");
    let _ = writeln!(s, "dir = {}\nformat = {}", o.dir.display(), o.format.name());
    let _ = writeln!(s, "snapshots = {}\nplots = {}", o.snapshots, o.plots);

    let _ = writeln!(s, "\n[sweep]");
    let _ = writeln!(s, "m = {}\ndecay_spread = {}", join(&c.sweep.m, |v| v.to_string()), fl(c.sweep.decay_spread));

    let _ = writeln!(s, "\n[semigroup]\npairs = {}", c.semigroup.pairs);

    let ss = &c.selfsim;
    let _ = writeln!(s, "\n[selfsim]");
    let _ = writeln!(s, "c = {}\ncst = {}", fl(ss.c), fl(ss.cst));
    let _ = writeln!(s, "w_min = {}\nw_max = {}\nw_points = {}", fl(ss.w_min), fl(ss.w_max), ss.w_points);
    let _ = writeln!(s, "starts = {}\nspan = {}", ss.starts, fl(ss.span));
    if let Some(ci) = ss.c_infty {
        let _ = writeln!(s, "c_infty = {}", fl(ci));
    }

    let _ = writeln!(s, "\n[calibrate]\ninv_h = {}", c.calibrate.inv_h);

    let v = &c.validate;
    let _ = writeln!(s, "\n[validate]");
    let _ = writeln!(s, "nwave_levels = {}", join(&v.nwave_levels, |n| n.to_string()));
    let _ = writeln!(s, "nwave_cfl = {}\nnwave_min_order = {}", fl(v.nwave_cfl), fl(v.nwave_min_order));
    let _ = writeln!(s, "nwave_max_error = {}", fl(v.nwave_max_error));
    let _ = writeln!(s, "vss_levels = {}", join(&v.vss_levels, |n| n.to_string()));
    let _ = writeln!(s, "vss_cfl = {}\nvss_min_order = {}", fl(v.vss_cfl), fl(v.vss_min_order));
    s
}
