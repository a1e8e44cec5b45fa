//! Observables and checks on simulated trajectories: supports, norms,
//! moments, decay fits, semigroup properties and mollification experiments.

use rayon::prelude::*;

use crate::data::{line_measure_l1_distance, mollified_line_measure, InitialDatum, Kernel, MollifierSpec, Profile1D};
use crate::grid::{discretize, lp_norm, CellField, Grid2D};
use crate::scheme::{entropy_residual, entropy_scale, run_observed, LockstepRun, SchemeConfig, Trajectory};
use crate::{Error, Result};

/// Kružkov constants used when entropy residuals are tracked.
pub const DEFAULT_ENTROPY_K: [f64; 5] = [-1.0, -0.5, 0.0, 0.5, 1.0];

/// Bounded continuous test function of `x1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Probe {
    One,
    /// `(1 + cos(π (x − center)/width))/2` on `|x − center| < width`.
    CosineBump { center: f64, width: f64 },
    /// `exp(−((x − center)/width)²)`.
    Gaussian { center: f64, width: f64 },
}

impl Probe {
    pub fn eval(&self, x: f64) -> f64 {
        match *self {
            Probe::One => 1.0,
            Probe::CosineBump { center, width } => {
                let s = (x - center) / width;
                if s.abs() >= 1.0 {
                    0.0
                } else {
                    0.5 * (1.0 + (std::f64::consts::PI * s).cos())
                }
            }
            Probe::Gaussian { center, width } => {
                let s = (x - center) / width;
                (-s * s).exp()
            }
        }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            Probe::One => Ok(()),
            Probe::CosineBump { center, width } | Probe::Gaussian { center, width } => {
                if center.is_finite() && width > 0.0 && width.is_finite() {
                    Ok(())
                } else {
                    Err(Error::invalid("probe needs a finite center and positive width"))
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiagnosticSpec {
    pub q_list: Vec<f64>,
    pub alpha_list: Vec<f64>,
    /// Relative column-mass threshold; the absolute threshold is this times `‖u‖∞`.
    pub support_threshold: f64,
    pub probe: Option<Probe>,
    /// Track the maximal normalized entropy residual between snapshots.
    pub entropy: bool,
}

impl Default for DiagnosticSpec {
    fn default() -> Self {
        DiagnosticSpec {
            q_list: vec![2.0],
            alpha_list: vec![4.0],
            support_threshold: 1e-12,
            probe: None,
            entropy: false,
        }
    }
}

impl DiagnosticSpec {
    pub fn validate(&self) -> Result<()> {
        if let Some(q) = self.q_list.iter().find(|&&q| !(q > 1.0 && q < 3.0)) {
            return Err(Error::invalid(format!("moment exponent q must lie in (1, 3), got {q}")));
        }
        if let Some(a) = self.alpha_list.iter().find(|&&a| !(a > 3.0 && a.is_finite())) {
            return Err(Error::invalid(format!("weighted moment exponent must exceed 3, got {a}")));
        }
        if !(self.support_threshold >= 0.0 && self.support_threshold.is_finite()) {
            return Err(Error::invalid("support threshold must be nonnegative"));
        }
        if let Some(p) = &self.probe {
            p.validate()?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SupportInterval {
    Empty,
    Interval { min: f64, max: f64 },
}

impl SupportInterval {
    pub fn half_width(&self) -> Option<f64> {
        match *self {
            SupportInterval::Empty => None,
            SupportInterval::Interval { min, max } => Some(0.5 * (max - min)),
        }
    }

    pub fn bounds(&self) -> Option<(f64, f64)> {
        match *self {
            SupportInterval::Empty => None,
            SupportInterval::Interval { min, max } => Some((min, max)),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Record {
    pub t: f64,
    pub mass: f64,
    pub l1: f64,
    pub l2: f64,
    pub linf: f64,
    pub support_x1: SupportInterval,
    pub iq: Vec<f64>,
    pub weighted: Vec<f64>,
    /// Largest normalized entropy residual over the steps leading here.
    pub entropy_max: Option<f64>,
    pub probe: Option<f64>,
    /// Weighted moments were taken with mass on the upper boundary row.
    pub touches_upper: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiagnosticsReport {
    pub spec: DiagnosticSpec,
    pub records: Vec<Record>,
}

impl DiagnosticsReport {
    /// Records for each field, in time order.
    pub fn from_fields(fields: &[CellField], spec: &DiagnosticSpec) -> Result<Self> {
        spec.validate()?;
        let records = fields
            .par_iter()
            .map(|f| record(f, spec))
            .collect::<Result<Vec<_>>>()?;
        let rep = DiagnosticsReport {
            spec: spec.clone(),
            records,
        };
        rep.validate()?;
        Ok(rep)
    }

    pub fn times(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.t).collect()
    }

    fn validate(&self) -> Result<()> {
        for w in self.records.windows(2) {
            if w[1].t < w[0].t {
                return Err(Error::Internal("report times are not sorted".into()));
            }
        }
        Ok(())
    }

    /// CSV header `t,mass,l1,l2,linf,supp_min,supp_max,Iq_…,Malpha_…,entropy_max`.
    pub fn csv_header(&self) -> String {
        let mut cols: Vec<String> = ["t", "mass", "l1", "l2", "linf", "supp_min", "supp_max"]
            .iter()
            .map(|s| s.to_string())
            .collect();
        cols.extend(self.spec.q_list.iter().map(|q| format!("Iq_{q}")));
        cols.extend(self.spec.alpha_list.iter().map(|a| format!("Malpha_{a}")));
        cols.push("entropy_max".into());
        if self.spec.probe.is_some() {
            cols.push("probe".into());
        }
        cols.join(",")
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.csv_header();
        out.push('\n');
        for r in &self.records {
            let mut cells = vec![num(r.t), num(r.mass), num(r.l1), num(r.l2), num(r.linf)];
            match r.support_x1 {
                SupportInterval::Empty => cells.extend([String::new(), String::new()]),
                SupportInterval::Interval { min, max } => cells.extend([num(min), num(max)]),
            }
            cells.extend(r.iq.iter().map(|&v| num(v)));
            cells.extend(r.weighted.iter().map(|&v| num(v)));
            cells.push(r.entropy_max.map(num).unwrap_or_default());
            if self.spec.probe.is_some() {
                cells.push(r.probe.map(num).unwrap_or_default());
            }
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }
}

/// Shortest round-trip decimal form.
pub(crate) fn num(v: f64) -> String {
    format!("{v:e}")
}

fn record(f: &CellField, spec: &DiagnosticSpec) -> Result<Record> {
    let linf = f.max_abs();
    let mut touches_upper = false;
    let weighted = spec
        .alpha_list
        .iter()
        .map(|&a| {
            weighted_moment(f, a).map(|m| {
                touches_upper |= m.touches_upper_boundary;
                m.value
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Record {
        t: f.time(),
        mass: f.mass(),
        l1: lp_norm(f, 1.0)?,
        l2: lp_norm(f, 2.0)?,
        linf,
        support_x1: support_interval(f, spec.support_threshold * linf)?,
        iq: spec
            .q_list
            .iter()
            .map(|&q| moment_iq(f, q))
            .collect::<Result<Vec<_>>>()?,
        weighted,
        entropy_max: None,
        probe: spec.probe.map(|p| vertical_projection_probe(f, |x| p.eval(x))),
        touches_upper,
    })
}

/// Runs `datum` and records diagnostics at t = 0 and at every snapshot.
pub fn run_with_diagnostics(
    datum: &InitialDatum,
    grid: &Grid2D,
    config: &SchemeConfig,
    spec: &DiagnosticSpec,
) -> Result<(Trajectory, DiagnosticsReport)> {
    spec.validate()?;
    let initial = discretize(datum, grid, config.quadrature_order)?.field;
    let snaps = config.effective_snapshots();
    let mut worst = Vec::with_capacity(snaps.len());
    let mut cur_worst = 0.0_f64;
    let mut next_snap = 0usize;
    let traj = run_observed(datum, grid, config, |ev| {
        if spec.entropy {
            let scale = entropy_scale(ev.before);
            for &k in &DEFAULT_ENTROPY_K {
                if let Ok(r) = entropy_residual(ev.before, ev.after, ev.dt, k) {
                    cur_worst = cur_worst.max(r.max_positive() / scale);
                }
            }
        }
        while next_snap < snaps.len() && ev.after.time() >= snaps[next_snap] {
            worst.push(cur_worst);
            cur_worst = 0.0;
            next_snap += 1;
        }
    })?;
    let mut fields = vec![initial];
    fields.extend(traj.snapshots.iter().cloned());
    let mut rep = DiagnosticsReport::from_fields(&fields, spec)?;
    if spec.entropy {
        rep.records[0].entropy_max = Some(0.0);
        for (k, r) in rep.records.iter_mut().skip(1).enumerate() {
            r.entropy_max = Some(worst.get(k).copied().unwrap_or(0.0));
        }
    }
    Ok((traj, rep))
}

/// Smallest x1 interval of cell columns whose column L¹ mass exceeds
/// `threshold · h1 · h2`.
pub fn support_interval(field: &CellField, threshold: f64) -> Result<SupportInterval> {
    if !(threshold >= 0.0) {
        return Err(Error::invalid(format!("support threshold must be nonnegative, got {threshold}")));
    }
    let g = field.grid();
    let col = |i: usize| (0..g.n2).map(|j| field.get(i, j).abs()).sum::<f64>();
    let first = (0..g.n1).find(|&i| col(i) > threshold);
    Ok(match first {
        None => SupportInterval::Empty,
        Some(lo) => {
            let hi = (0..g.n1).rev().find(|&i| col(i) > threshold).unwrap_or(lo);
            SupportInterval::Interval {
                min: g.x1_edge(lo),
                max: g.x1_edge(hi + 1),
            }
        }
    })
}

/// Rows analogue of [`support_interval`] along x2.
pub fn support_interval_x2(field: &CellField, threshold: f64) -> Result<SupportInterval> {
    if !(threshold >= 0.0) {
        return Err(Error::invalid(format!("support threshold must be nonnegative, got {threshold}")));
    }
    let g = field.grid();
    let row = |j: usize| (0..g.n1).map(|i| field.get(i, j).abs()).sum::<f64>();
    let first = (0..g.n2).find(|&j| row(j) > threshold);
    Ok(match first {
        None => SupportInterval::Empty,
        Some(lo) => {
            let hi = (0..g.n2).rev().find(|&j| row(j) > threshold).unwrap_or(lo);
            SupportInterval::Interval {
                min: g.x2_edge(lo),
                max: g.x2_edge(hi + 1),
            }
        }
    })
}

/// Power-law fit `y ≈ C t^β`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerFit {
    pub exponent: f64,
    pub constant: f64,
    /// Fit undefined or degenerate (constant or zero series); exponent reported as 0.
    pub degenerate: bool,
}

/// Least-squares line through `(ln x, ln y)`.
pub fn loglog_fit(xs: &[f64], ys: &[f64]) -> Result<PowerFit> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return Err(Error::invalid("log-log fit needs at least two paired samples"));
    }
    if xs.iter().chain(ys).any(|&v| !(v > 0.0 && v.is_finite())) {
        return Err(Error::invalid("log-log fit needs positive finite samples"));
    }
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxx: f64 = lx.iter().map(|x| (x - mx) * (x - mx)).sum();
    if sxx == 0.0 {
        return Err(Error::invalid("log-log fit needs distinct abscissae"));
    }
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let beta = sxy / sxx;
    Ok(PowerFit {
        exponent: beta,
        constant: (my - beta * mx).exp(),
        degenerate: false,
    })
}

fn all_equal(v: &[f64]) -> bool {
    let scale = v.iter().fold(0.0_f64, |m, x| m.max(x.abs())).max(f64::MIN_POSITIVE);
    v.iter().all(|x| (x - v[0]).abs() <= 1e-12 * scale)
}

/// Fits `half_width(t) − half_width(0) ≈ C t^β` over records with `t > 0`.
/// The baseline is the record at `t = 0` when present, else zero.
pub fn support_growth_fit(report: &DiagnosticsReport) -> Result<PowerFit> {
    let base = report
        .records
        .iter()
        .find(|r| r.t == 0.0)
        .and_then(|r| r.support_x1.half_width())
        .unwrap_or(0.0);
    let samples: Vec<(f64, f64)> = report
        .records
        .iter()
        .filter(|r| r.t > 0.0)
        .filter_map(|r| r.support_x1.half_width().map(|w| (r.t, w - base)))
        .collect();
    if samples.len() < 4 {
        return Err(Error::SeriesUnavailable(
            "support growth fit needs at least 4 nonempty samples at t > 0".into(),
        ));
    }
    let ex: Vec<f64> = samples.iter().map(|s| s.1).collect();
    if all_equal(&ex) {
        return Ok(PowerFit {
            exponent: 0.0,
            constant: ex[0],
            degenerate: true,
        });
    }
    let (ts, ws): (Vec<f64>, Vec<f64>) = samples.into_iter().filter(|s| s.1 > 0.0).unzip();
    if ts.len() < 2 {
        return Ok(PowerFit {
            exponent: 0.0,
            constant: 0.0,
            degenerate: true,
        });
    }
    loglog_fit(&ts, &ws)
}

/// Largest inflation factor `ĉ` seen, i.e. whether every support stays in
/// `[X − ĉ M^{1/4} √t − pad, X′ + ĉ M^{1/4} √t + pad]`; returns the worst
/// overshoot beyond the strip (≤ 0 means contained).
pub fn support_strip_excess(
    report: &DiagnosticsReport,
    datum_support: (f64, f64),
    mass: f64,
    c_infty: f64,
    pad: f64,
) -> f64 {
    let mut worst = f64::NEG_INFINITY;
    for r in &report.records {
        if let Some((lo, hi)) = r.support_x1.bounds() {
            let reach = c_infty * mass.abs().powf(0.25) * r.t.max(0.0).sqrt() + pad;
            worst = worst.max((datum_support.0 - reach) - lo).max(hi - (datum_support.1 + reach));
        }
    }
    worst
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HalfSpace {
    /// `x2 ≥ X` where X is the lower edge of the initial support.
    UpperX2,
    /// `x1 ≥ X` for nonnegative data.
    RightX1Signed,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum HalfspaceVerdict {
    Holds,
    Violated { time: f64 },
    HypothesisUnmet,
}

/// Whether every snapshot stays in the half-space bounding the initial support.
pub fn halfspace_check(
    initial: &CellField,
    snapshots: &[CellField],
    which: HalfSpace,
    rel_threshold: f64,
) -> Result<HalfspaceVerdict> {
    if which == HalfSpace::RightX1Signed && initial.min_value() < 0.0 {
        return Ok(HalfspaceVerdict::HypothesisUnmet);
    }
    let sup = |f: &CellField| -> Result<SupportInterval> {
        let thr = rel_threshold * f.max_abs();
        match which {
            HalfSpace::UpperX2 => support_interval_x2(f, thr),
            HalfSpace::RightX1Signed => support_interval(f, thr),
        }
    };
    let edge = match sup(initial)?.bounds() {
        Some((lo, _)) => lo,
        None => return Ok(HalfspaceVerdict::Holds),
    };
    for s in snapshots {
        initial.check_same_grid(s)?;
        if let Some((lo, _)) = sup(s)?.bounds() {
            if lo < edge {
                return Ok(HalfspaceVerdict::Violated { time: s.time() });
            }
        }
    }
    Ok(HalfspaceVerdict::Holds)
}

/// `Σ (|x1|^{q−1} + |x2|^{(q−1)/2}) |u| h1 h2` at cell centers, `q ∈ (1, 3)`.
pub fn moment_iq(field: &CellField, q: f64) -> Result<f64> {
    if !(q > 1.0 && q < 3.0) {
        return Err(Error::invalid(format!("moment exponent q must lie in (1, 3), got {q}")));
    }
    let g = field.grid();
    let a = q - 1.0;
    let wx: Vec<f64> = (0..g.n1).map(|i| g.x1_center(i).abs().powf(a)).collect();
    let mut s = 0.0;
    for j in 0..g.n2 {
        let wy = g.x2_center(j).abs().powf(0.5 * a);
        for (i, w) in wx.iter().enumerate() {
            s += (w + wy) * field.get(i, j).abs();
        }
    }
    Ok(s * g.cell_area())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeightedMoment {
    pub value: f64,
    /// Mass sits in the top row, so part of the moment may have left the box.
    pub touches_upper_boundary: bool,
}

/// Signed `Σ |1 + x2|^α u h1 h2` at cell centers, `α > 3`.
pub fn weighted_moment(field: &CellField, alpha: f64) -> Result<WeightedMoment> {
    if !(alpha > 3.0 && alpha.is_finite()) {
        return Err(Error::invalid(format!("weighted moment exponent must exceed 3, got {alpha}")));
    }
    let g = field.grid();
    let mut s = 0.0;
    for j in 0..g.n2 {
        let w = (1.0 + g.x2_center(j)).abs().powf(alpha);
        let row: f64 = (0..g.n1).map(|i| field.get(i, j)).sum();
        s += w * row;
    }
    let top = g.n2 - 1;
    let thr = 1e-12 * field.max_abs();
    let touches = field.max_abs() > 0.0 && (0..g.n1).any(|i| field.get(i, top).abs() > thr);
    Ok(WeightedMoment {
        value: s * g.cell_area(),
        touches_upper_boundary: touches,
    })
}

/// `M + α(α−3) M^{5/2} / (12 c²) · ln(1 + c² t √M / X²)`.
pub fn highmom_lower_bound(mass: f64, x: f64, alpha: f64, c_infty: f64, t: f64) -> Result<f64> {
    if !(mass > 0.0 && x > 0.0 && c_infty > 0.0) {
        return Err(Error::invalid("highmom bound needs M, X, c∞ > 0"));
    }
    if !(t >= 0.0) || !(alpha >= 3.0) {
        return Err(Error::invalid("highmom bound needs t ≥ 0 and α ≥ 3"));
    }
    let c2 = c_infty * c_infty;
    Ok(mass
        + alpha * (alpha - 3.0) * mass.powf(2.5) / (12.0 * c2)
            * (c2 * t * mass.sqrt() / (x * x)).ln_1p())
}

/// Smallest `c ≥ 0` with `I(t) ≤ e^{ct}(I(0) + c√t)` at every sample, where
/// `I(0)` is the value at the first sample (which must be at t = 0).
pub fn tight_constant_fit(times: &[f64], values: &[f64]) -> Result<f64> {
    if times.len() != values.len() || times.len() < 2 {
        return Err(Error::invalid("constant fit needs at least two paired samples"));
    }
    if times[0] != 0.0 {
        return Err(Error::invalid("constant fit needs the t = 0 sample first"));
    }
    let i0 = values[0];
    let ok = |c: f64| {
        times
            .iter()
            .zip(values)
            .all(|(&t, &v)| v <= (c * t).exp() * (i0 + c * t.sqrt()) * (1.0 + 1e-14))
    };
    if ok(0.0) {
        return Ok(0.0);
    }
    let mut hi = 1.0;
    while !ok(hi) {
        hi *= 2.0;
        if hi > 1e12 {
            return Err(Error::invalid("no finite constant bounds the series"));
        }
    }
    let mut lo = 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if ok(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
        if hi - lo <= 1e-14 * hi {
            break;
        }
    }
    Ok(hi)
}

/// Pearson correlation coefficient.
pub fn pearson(xs: &[f64], ys: &[f64]) -> Result<f64> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return Err(Error::invalid("correlation needs at least two paired samples"));
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (x, y) in xs.iter().zip(ys) {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx) * (x - mx);
        syy += (y - my) * (y - my);
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::invalid("correlation undefined for a constant series"));
    }
    Ok(sxy / (sxx * syy).sqrt())
}

/// Log-log fit of `‖u(t)‖∞` against `t` over records with `t > 0`, and the
/// constant estimate `max ‖u(t)‖∞ √t / M^{1/4}`.
pub fn dispersive_fit(report: &DiagnosticsReport, mass: f64) -> Result<PowerFit> {
    if !(mass > 0.0) {
        return Err(Error::invalid("dispersive fit needs a positive mass"));
    }
    let s: Vec<(f64, f64)> = report.records.iter().filter(|r| r.t > 0.0).map(|r| (r.t, r.linf)).collect();
    if s.len() < 4 {
        return Err(Error::SeriesUnavailable("dispersive fit needs at least 4 samples at t > 0".into()));
    }
    let c = s.iter().map(|&(t, v)| v * t.sqrt()).fold(0.0_f64, f64::max) / mass.powf(0.25);
    if s.iter().any(|&(_, v)| v == 0.0) {
        return Ok(PowerFit {
            exponent: 0.0,
            constant: c,
            degenerate: true,
        });
    }
    let (ts, vs): (Vec<f64>, Vec<f64>) = s.into_iter().unzip();
    let mut fit = loglog_fit(&ts, &vs)?;
    fit.constant = c;
    Ok(fit)
}

/// Empirical lower bound for the dispersive constant: max over runs and
/// times `t > 0` of `‖u(t)‖∞ √t / M^{1/4}`.
pub fn calibrate_cinfty<'a>(runs: impl IntoIterator<Item = (&'a DiagnosticsReport, f64)>) -> Result<f64> {
    let mut best: Option<f64> = None;
    for (rep, mass) in runs {
        if !(mass > 0.0) {
            return Err(Error::invalid("calibration runs need positive masses"));
        }
        for r in rep.records.iter().filter(|r| r.t > 0.0) {
            let v = r.linf * r.t.sqrt() / mass.powf(0.25);
            best = Some(best.map_or(v, |b: f64| b.max(v)));
        }
    }
    best.ok_or_else(|| Error::invalid("calibration needs at least one run with samples at t > 0"))
}

/// `Σ u_ij φ(x1_i) h1 h2`.
pub fn vertical_projection_probe(field: &CellField, probe: impl Fn(f64) -> f64) -> f64 {
    let g = field.grid();
    let phi: Vec<f64> = (0..g.n1).map(|i| probe(g.x1_center(i))).collect();
    let mut s = 0.0;
    for j in 0..g.n2 {
        for (i, p) in phi.iter().enumerate() {
            s += field.get(i, j) * p;
        }
    }
    s * g.cell_area()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SemigroupKind {
    Contraction,
    Comparison,
    Mass,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SemigroupVerdict {
    pub kind: SemigroupKind,
    pub passed: bool,
    /// Contraction: largest step increase of ‖u−v‖₁. Comparison: largest
    /// `u − v`. Mass: largest relative drift of `∫(u−v)` net of boundary flux.
    pub worst_margin: f64,
    pub steps: usize,
}

pub const SEMIGROUP_TOL: f64 = 1e-12;

/// Runs both data with a shared time step and checks one semigroup property.
pub fn semigroup_check(
    u0: &InitialDatum,
    v0: &InitialDatum,
    grid: &Grid2D,
    config: &SchemeConfig,
    kind: SemigroupKind,
) -> Result<SemigroupVerdict> {
    let all = semigroup_check_all(u0, v0, grid, config)?;
    Ok(all.into_iter().find(|v| v.kind == kind).expect("all kinds are checked"))
}

/// All three semigroup checks from a single lockstep run.
pub fn semigroup_check_all(
    u0: &InitialDatum,
    v0: &InitialDatum,
    grid: &Grid2D,
    config: &SchemeConfig,
) -> Result<Vec<SemigroupVerdict>> {
    let u = discretize(u0, grid, config.quadrature_order)?.field;
    let v = discretize(v0, grid, config.quadrature_order)?.field;
    semigroup_check_fields(u, v, config)
}

pub fn semigroup_check_fields(u: CellField, v: CellField, config: &SchemeConfig) -> Result<Vec<SemigroupVerdict>> {
    let ordered = u.values().iter().zip(v.values()).all(|(a, b)| a <= b);
    let d0 = u.l1_distance(&v)?;
    let mass_scale = (lp_norm(&u, 1.0)? + lp_norm(&v, 1.0)?).max(f64::MIN_POSITIVE);
    let diff0 = u.mass() - v.mass();
    let mut run = LockstepRun::new(vec![u, v], config.clone())?;
    let mut prev = d0;
    let mut contraction = 0.0_f64;
    let mut comparison = if ordered { 0.0_f64 } else { f64::NAN };
    let mut flux = 0.0;
    let mut mass = 0.0_f64;
    let t_end = run.time() + config.t_end;
    let mut err = None;
    run.advance_to(t_end, |fields, fl| {
        let (a, b) = (&fields[0], &fields[1]);
        let d = match a.l1_distance(b) {
            Ok(d) => d,
            Err(e) => {
                err = Some(e);
                return;
            }
        };
        contraction = contraction.max(d - prev);
        prev = d;
        if ordered {
            let worst = a.values().iter().zip(b.values()).fold(0.0_f64, |m, (x, y)| m.max(x - y));
            comparison = comparison.max(worst);
        }
        flux += fl[0] - fl[1];
        mass = mass.max(((a.mass() - b.mass()) - diff0 - flux).abs() / mass_scale);
    })?;
    if let Some(e) = err {
        return Err(e);
    }
    let steps = run.steps();
    let contraction_tol = SEMIGROUP_TOL * d0.max(1.0);
    let mut out = vec![
        SemigroupVerdict {
            kind: SemigroupKind::Contraction,
            passed: contraction <= contraction_tol,
            worst_margin: contraction.max(0.0),
            steps,
        },
        SemigroupVerdict {
            kind: SemigroupKind::Mass,
            passed: mass <= SEMIGROUP_TOL,
            worst_margin: mass,
            steps,
        },
    ];
    if ordered {
        out.insert(
            1,
            SemigroupVerdict {
                kind: SemigroupKind::Comparison,
                passed: comparison <= SEMIGROUP_TOL,
                worst_margin: comparison,
                steps,
            },
        );
    } else {
        out.insert(
            1,
            SemigroupVerdict {
                kind: SemigroupKind::Comparison,
                passed: false,
                worst_margin: f64::NAN,
                steps: 0,
            },
        );
    }
    Ok(out)
}

/// Distances between runs from differently mollified line measures.
#[derive(Debug, Clone, PartialEq)]
pub struct CauchyMatrix {
    pub widths: Vec<f64>,
    /// `sup_t ‖u_ε(t) − u_ν(t)‖₁`, including t = 0.
    pub entries: Vec<Vec<f64>>,
    /// `‖a_ε − a_ν‖₁` for the continuous data.
    pub data_distance: Vec<Vec<f64>>,
}

impl CauchyMatrix {
    /// Largest `entry − data_distance`.
    pub fn worst_excess(&self) -> f64 {
        let mut w = f64::NEG_INFINITY;
        for (er, dr) in self.entries.iter().zip(&self.data_distance) {
            for (e, d) in er.iter().zip(dr) {
                w = w.max(e - d);
            }
        }
        w
    }
}

/// Evolves horizontally mollified copies of `δ_{x1=0} ⊗ g` in lockstep and
/// tabulates their L¹ distances over the snapshot times.
pub fn mollification_cauchy_check(
    g: &Profile1D,
    kernel: Kernel,
    widths: &[f64],
    grid: &Grid2D,
    config: &SchemeConfig,
) -> Result<CauchyMatrix> {
    if widths.len() < 2 {
        return Err(Error::invalid("Cauchy check needs at least two widths"));
    }
    config.validate()?;
    let specs = widths
        .iter()
        .map(|&w| MollifierSpec::horizontal(kernel, w))
        .collect::<Result<Vec<_>>>()?;
    let fields = specs
        .iter()
        .map(|&s| {
            let d = mollified_line_measure(g.clone(), s)?;
            Ok(discretize(&d, grid, config.quadrature_order)?.field)
        })
        .collect::<Result<Vec<_>>>()?;
    let n = widths.len();
    let mut entries = vec![vec![0.0; n]; n];
    let update = |entries: &mut Vec<Vec<f64>>, fs: &[CellField]| -> Result<()> {
        for a in 0..n {
            for b in a + 1..n {
                let d = fs[a].l1_distance(&fs[b])?;
                if d > entries[a][b] {
                    entries[a][b] = d;
                    entries[b][a] = d;
                }
            }
        }
        Ok(())
    };
    update(&mut entries, &fields)?;
    let mut data_distance = vec![vec![0.0; n]; n];
    for a in 0..n {
        for b in a + 1..n {
            let d = line_measure_l1_distance(g, specs[a], specs[b])?;
            data_distance[a][b] = d;
            data_distance[b][a] = d;
        }
    }
    let t0 = fields[0].time();
    let mut run = LockstepRun::new(fields, config.clone())?;
    for t in config.effective_snapshots() {
        run.advance_to(t0 + t, |_, _| {})?;
        update(&mut entries, run.fields())?;
    }
    Ok(CauchyMatrix {
        widths: widths.to_vec(),
        entries,
        data_distance,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{dirac_family, Bump};
    use crate::grid::{Boundary, Rect};

    fn unit(n: usize) -> Grid2D {
        Grid2D::new(Rect::new((0.0, 1.0), (0.0, 1.0)), n, n, Boundary::Outflow).unwrap()
    }

    fn rec(t: f64, linf: f64, supp: Option<(f64, f64)>) -> Record {
        Record {
            t,
            mass: 1.0,
            l1: 1.0,
            l2: 1.0,
            linf,
            support_x1: supp.map_or(SupportInterval::Empty, |(min, max)| SupportInterval::Interval { min, max }),
            iq: vec![],
            weighted: vec![],
            entropy_max: None,
            probe: None,
            touches_upper: false,
        }
    }

    fn report(records: Vec<Record>) -> DiagnosticsReport {
        DiagnosticsReport {
            spec: DiagnosticSpec {
                q_list: vec![],
                alpha_list: vec![],
                ..Default::default()
            },
            records,
        }
    }

    #[test]
    fn support_of_aligned_indicator_and_zero() {
        let g = unit(10);
        let f = CellField::from_fn(g, 0.0, |x, _| if x < 0.5 { 1.0 } else { 0.0 }).unwrap();
        assert_eq!(
            support_interval(&f, 0.0).unwrap(),
            SupportInterval::Interval { min: 0.0, max: 0.5 }
        );
        assert_eq!(support_interval(&CellField::zeros(g), 0.0).unwrap(), SupportInterval::Empty);
        assert!(support_interval(&f, -1.0).is_err());
    }

    #[test]
    fn growth_fit_synthetic() {
        let ts = [0.0, 0.1, 0.4, 0.9, 1.6, 2.5];
        let r = report(ts.iter().map(|&t| rec(t, 1.0, Some((-2.0 * t.sqrt(), 2.0 * t.sqrt())))).collect());
        let fit = support_growth_fit(&r).unwrap();
        assert!((fit.exponent - 0.5).abs() < 1e-12 && (fit.constant - 2.0).abs() < 1e-12);
        let r = report(ts.iter().map(|&t| rec(t, 1.0, Some((-1.0, 1.0)))).collect());
        let fit = support_growth_fit(&r).unwrap();
        assert_eq!(fit.exponent, 0.0);
        assert!(fit.degenerate);
        let r = report(ts[..3].iter().map(|&t| rec(t, 1.0, Some((0.0, 1.0)))).collect());
        assert!(support_growth_fit(&r).is_err());
    }

    #[test]
    fn moments() {
        // independent oracle: ∫∫ (x1 + √x2) over [0,1]² = 1/2 + 2/3
        let g = unit(400);
        let f = CellField::from_fn(g, 0.0, |_, _| 1.0).unwrap();
        assert!((moment_iq(&f, 2.0).unwrap() - 7.0 / 6.0).abs() < 1e-4);
        assert!((moment_iq(&f, 1.0 + 1e-12).unwrap() - 2.0).abs() < 1e-9);
        assert!(moment_iq(&f, 3.0).is_err() && moment_iq(&f, 1.0).is_err());
        let m = weighted_moment(&f, 4.0).unwrap();
        assert!((m.value - 6.2).abs() < 1e-4);
        assert!(m.touches_upper_boundary);
        assert_eq!(weighted_moment(&CellField::zeros(g), 4.0).unwrap().value, 0.0);
        assert!(weighted_moment(&f, 3.0).is_err());
    }

    #[test]
    fn highmom_bound_values() {
        assert_eq!(highmom_lower_bound(2.0, 0.5, 5.0, 1.3, 0.0).unwrap(), 2.0);
        assert_eq!(highmom_lower_bound(2.0, 0.5, 3.0, 1.3, 7.0).unwrap(), 2.0);
        let v = highmom_lower_bound(1.0, 1.0, 4.0, 1.0, 1.0).unwrap();
        assert!((v - (1.0 + 2f64.ln() / 3.0)).abs() < 1e-15);
        assert!((v - 1.23105).abs() < 1e-5);
        assert!(highmom_lower_bound(0.0, 1.0, 4.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn dispersive_and_calibration_synthetic() {
        let ts = [0.25, 0.5, 1.0, 2.0];
        let r = report(ts.iter().map(|&t| rec(t, 3.0 / t.sqrt(), None)).collect());
        let fit = dispersive_fit(&r, 16.0).unwrap();
        assert!((fit.exponent + 0.5).abs() < 1e-12);
        assert!((fit.constant - 1.5).abs() < 1e-12);
        let c = report(ts.iter().map(|&t| rec(t, 2.0, None)).collect());
        assert!(dispersive_fit(&c, 1.0).unwrap().exponent.abs() < 1e-12);
        let z = report(ts.iter().map(|&t| rec(t, 0.0, None)).collect());
        assert!(dispersive_fit(&z, 1.0).unwrap().degenerate);
        let r7 = report(ts.iter().map(|&t| rec(t, 0.7 * 16f64.powf(0.25) / t.sqrt(), None)).collect());
        assert!((calibrate_cinfty([(&r7, 16.0)]).unwrap() - 0.7).abs() < 1e-12);
        assert!(calibrate_cinfty(std::iter::empty()).is_err());
    }

    #[test]
    fn probe_examples() {
        let g = unit(8);
        let f = CellField::from_fn(g, 0.0, |x, y| x + y).unwrap();
        assert!((vertical_projection_probe(&f, |_| 1.0) - f.mass()).abs() < 1e-15);
        assert_eq!(vertical_projection_probe(&f, |_| 0.0), 0.0);
        assert_eq!(Probe::CosineBump { center: 0.0, width: 0.3 }.eval(0.0), 1.0);
    }

    #[test]
    fn tight_fit_and_pearson() {
        let ts = [0.0, 0.5, 1.0];
        let c = 0.8_f64;
        let vs: Vec<f64> = ts.iter().map(|&t: &f64| (c * t).exp() * (1.0 + c * t.sqrt())).collect();
        let fit = tight_constant_fit(&ts, &vs).unwrap();
        assert!((fit - c).abs() < 1e-9);
        assert_eq!(tight_constant_fit(&ts, &[1.0, 0.5, 0.2]).unwrap(), 0.0);
        assert!((pearson(&[1.0, 2.0, 3.0], &[2.0, 4.0, 6.0]).unwrap() - 1.0).abs() < 1e-15);
        assert!(pearson(&[1.0, 1.0], &[1.0, 2.0]).is_err());
    }

    #[test]
    fn halfspaces() {
        let g = Grid2D::new(Rect::new((-1.0, 1.0), (-1.0, 1.0)), 32, 32, Boundary::Outflow).unwrap();
        let d = InitialDatum::bump_sum(vec![Bump {
            center: (0.0, -0.5),
            half_width: (0.2, 0.2),
            amplitude: 1.0,
        }])
        .unwrap();
        let cfg = SchemeConfig::new(0.5, 0.2, vec![0.05, 0.1, 0.2]).unwrap();
        let tr = crate::scheme::run(&d, &g, &cfg).unwrap();
        let init = discretize(&d, &g, 3).unwrap().field;
        for w in [HalfSpace::UpperX2, HalfSpace::RightX1Signed] {
            assert_eq!(halfspace_check(&init, &tr.snapshots, w, 0.0).unwrap(), HalfspaceVerdict::Holds);
        }
        let neg = init.scaled(-1.0);
        assert_eq!(
            halfspace_check(&neg, &tr.snapshots, HalfSpace::RightX1Signed, 0.0).unwrap(),
            HalfspaceVerdict::HypothesisUnmet
        );
        // signed data still stay above their lowest row
        let tr = crate::scheme::evolve(neg.clone(), &cfg, crate::scheme::BoundaryData::FromGrid, |_| {}).unwrap();
        assert_eq!(
            halfspace_check(&neg, &tr.snapshots, HalfSpace::UpperX2, 0.0).unwrap(),
            HalfspaceVerdict::Holds
        );
    }

    #[test]
    fn semigroup_identical_and_ordered() {
        let g = Grid2D::new(Rect::new((-1.0, 1.0), (-1.0, 1.0)), 24, 24, Boundary::Periodic).unwrap();
        let b = |a: f64| Bump {
            center: (0.0, 0.0),
            half_width: (0.4, 0.4),
            amplitude: a,
        };
        let u = InitialDatum::bump_sum(vec![b(1.0)]).unwrap();
        let cfg = SchemeConfig::new(0.5, 0.3, vec![]).unwrap();
        for v in semigroup_check_all(&u, &u, &g, &cfg).unwrap() {
            assert!(v.passed && v.worst_margin == 0.0, "{v:?}");
        }
        let v = InitialDatum::bump_sum(vec![b(1.5)]).unwrap();
        for k in [SemigroupKind::Contraction, SemigroupKind::Comparison, SemigroupKind::Mass] {
            assert!(semigroup_check(&u, &v, &g, &cfg, k).unwrap().passed);
        }
        let swapped = semigroup_check(&v, &u, &g, &cfg, SemigroupKind::Comparison).unwrap();
        assert!(!swapped.passed);
    }

    #[test]
    fn cauchy_matrix_small() {
        let g = Grid2D::new(Rect::new((-0.5, 1.0), (-0.25, 1.75)), 48, 32, Boundary::Outflow).unwrap();
        let prof = Profile1D::indicator(0.0, 1.0);
        let cfg = SchemeConfig::new(0.5, 0.05, vec![0.025, 0.05]).unwrap();
        let m = mollification_cauchy_check(&prof, Kernel::CosineBump, &[0.2, 0.1], &g, &cfg).unwrap();
        assert_eq!(m.entries[0][0], 0.0);
        assert!(m.entries[0][1] > 0.0);
        assert!(m.worst_excess() <= 2.0 * g.h1, "{m:?}");
        assert!(mollification_cauchy_check(&prof, Kernel::CosineBump, &[0.2], &g, &cfg).is_err());
    }

    #[test]
    fn report_from_run_has_t0_and_csv() {
        let g = Grid2D::new(Rect::new((-1.0, 1.0), (-0.5, 1.5)), 32, 32, Boundary::Outflow).unwrap();
        let d = dirac_family(1.0, 4).unwrap();
        let cfg = SchemeConfig::new(0.5, 0.1, vec![0.05, 0.1]).unwrap();
        let spec = DiagnosticSpec {
            entropy: true,
            probe: Some(Probe::One),
            ..Default::default()
        };
        let (_, rep) = run_with_diagnostics(&d, &g, &cfg, &spec).unwrap();
        assert_eq!(rep.times(), vec![0.0, 0.05, 0.1]);
        let csv = rep.to_csv();
        assert!(csv.starts_with("t,mass,l1,l2,linf,supp_min,supp_max,Iq_2,Malpha_4,entropy_max,probe\n"));
        assert_eq!(csv.lines().count(), 4);
        assert!(rep.records.iter().all(|r| r.entropy_max.unwrap() <= 1e-12));
    }
}
