//! Experiment runner: configuration in, CSV and snapshot artifacts out.

pub mod config;
pub mod plot;
pub mod snapshot;

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

pub use config::{parse_config, parse_config_with_env, render, Experiment, ExperimentConfig, SnapshotFormat};
pub use plot::{emit_plot_data, plot_data, PlotData, PlotInput, PlotKind};
pub use snapshot::{read_snapshot, write_snapshot};

use crate::data::{dirac_family, scale_datum};
use crate::diagnostics::{
    calibrate_cinfty, num, run_with_diagnostics, semigroup_check_fields, DiagnosticsReport, SemigroupKind,
    SEMIGROUP_TOL,
};
use crate::experiments::{calibration_suite, nwave_convergence, observed_order, pairwise_orders, random_bump_pair, vss_convergence, ConvergenceRow};
use crate::scheme::{RunWarning, Trajectory};
use crate::selfsim::{
    contrg_check, extract_profile, g_of_profile, integrate_characteristic, profile_residual, shock_locus, vss_eval,
    vss_implicit_residual, vsss_lhs, vsw_y2, CharacteristicState, VSSParams, WRate,
};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Pass,
    Fail,
    /// Hypotheses of the check were not met; nothing was asserted.
    Unmet,
    /// Measured quantity with no pass/fail meaning.
    Info,
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Status::Pass => "pass",
            Status::Fail => "fail",
            Status::Unmet => "unmet",
            Status::Info => "info",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Verdict {
    pub check: String,
    pub status: Status,
    pub value: f64,
    pub threshold: f64,
}

impl Verdict {
    fn at_most(check: impl Into<String>, value: f64, threshold: f64) -> Self {
        Verdict {
            check: check.into(),
            status: if value <= threshold { Status::Pass } else { Status::Fail },
            value,
            threshold,
        }
    }

    fn at_least(check: impl Into<String>, value: f64, threshold: f64) -> Self {
        Verdict {
            check: check.into(),
            status: if value >= threshold { Status::Pass } else { Status::Fail },
            value,
            threshold,
        }
    }

    fn info(check: impl Into<String>, value: f64) -> Self {
        Verdict {
            check: check.into(),
            status: Status::Info,
            value,
            threshold: f64::NAN,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Artifacts {
    pub dir: PathBuf,
    /// Written files, sorted.
    pub files: Vec<PathBuf>,
    pub verdicts: Vec<Verdict>,
}

impl Artifacts {
    pub fn any_failed(&self) -> bool {
        self.verdicts.iter().any(|v| v.status == Status::Fail)
    }
}

pub fn summary_csv(verdicts: &[Verdict]) -> String {
    let mut s = String::from("check,status,value,threshold\n");
    for v in verdicts {
        let thr = if v.threshold.is_nan() { String::new() } else { num(v.threshold) };
        s.push_str(&format!("{},{},{},{}\n", v.check, v.status, num(v.value), thr));
    }
    s
}

struct Out {
    dir: PathBuf,
    files: Vec<PathBuf>,
}

impl Out {
    fn write(&mut self, name: &str, contents: &str) -> Result<()> {
        let p = self.dir.join(name);
        if let Some(parent) = p.parent() {
            fs::create_dir_all(parent)?;
        }
        fs::write(&p, contents)?;
        self.files.push(p);
        Ok(())
    }

    fn plots(&mut self, input: PlotInput<'_>, kinds: &[PlotKind]) -> Result<()> {
        for &k in kinds {
            match emit_plot_data(input, k, &self.dir.join("plots")) {
                Ok(files) => self.files.extend(files),
                Err(Error::SeriesUnavailable(_)) => {}
                Err(e) => return Err(e),
            }
        }
        Ok(())
    }

    fn snapshots(&mut self, traj: &Trajectory, format: SnapshotFormat, prefix: &str) -> Result<()> {
        let ext = match format {
            SnapshotFormat::Csv => "txt",
            SnapshotFormat::Raw => "bin",
        };
        let dir = self.dir.join("snapshots");
        fs::create_dir_all(&dir)?;
        for (k, s) in traj.snapshots.iter().enumerate() {
            let p = dir.join(format!("{prefix}{k:03}.{ext}"));
            write_snapshot(&p, s, format)?;
            self.files.push(p);
        }
        Ok(())
    }
}

/// Runs the configured experiment and writes its artifacts under
/// `config.output.dir`. Numerical outcomes are reported as verdicts; only
/// invalid configurations and I/O problems are errors.
pub fn execute(config: &ExperimentConfig) -> Result<Artifacts> {
    config.validate()?;
    fs::create_dir_all(&config.output.dir)?;
    let mut out = Out {
        dir: config.output.dir.clone(),
        files: Vec::new(),
    };
    out.write("config.ini", &render(config))?;
    let verdicts = match config.experiment {
        Experiment::Run => exec_run(config, &mut out)?,
        Experiment::Sweep => exec_sweep(config, &mut out)?,
        Experiment::Semigroup => exec_semigroup(config, &mut out)?,
        Experiment::Selfsim => exec_selfsim(config, &mut out)?,
        Experiment::Calibrate => exec_calibrate(config, &mut out)?,
        Experiment::Validate => exec_validate(config, &mut out)?,
    };
    out.write("summary.csv", &summary_csv(&verdicts))?;
    out.files.sort();
    Ok(Artifacts {
        dir: out.dir,
        files: out.files,
        verdicts,
    })
}

fn warning_verdicts(traj: &Trajectory, prefix: &str) -> Vec<Verdict> {
    traj.warnings
        .iter()
        .map(|w| match *w {
            RunWarning::SupportOutsideDomain => Verdict {
                check: format!("{prefix}datum_inside_grid"),
                status: Status::Unmet,
                value: 0.0,
                threshold: f64::NAN,
            },
            RunWarning::SupportEscape { time } => Verdict {
                check: format!("{prefix}support_escape_time"),
                status: Status::Unmet,
                value: time,
                threshold: f64::NAN,
            },
        })
        .collect()
}

fn mass_balance(traj: &Trajectory, rep: &DiagnosticsReport) -> f64 {
    let first = &rep.records[0];
    let last = rep.records.last().expect("nonempty report");
    let flux = traj.boundary_flux.last().copied().unwrap_or(0.0);
    (last.mass - first.mass - flux).abs() / first.l1.max(f64::MIN_POSITIVE)
}

fn exec_run(c: &ExperimentConfig, out: &mut Out) -> Result<Vec<Verdict>> {
    let datum = c.datum.build()?;
    let grid = c.grid.build()?;
    let (traj, rep) = run_with_diagnostics(&datum, &grid, &c.scheme, &c.diagnostics)?;
    out.write("report.csv", &rep.to_csv())?;
    if c.output.snapshots {
        out.snapshots(&traj, c.output.format, "snapshot_")?;
    }
    if c.output.plots {
        out.plots(PlotInput::Report(&rep), &[PlotKind::Decay, PlotKind::Support, PlotKind::Moments])?;
    }
    let mut v = vec![Verdict::at_most("mass_balance", mass_balance(&traj, &rep), 1e-10)];
    if c.diagnostics.entropy {
        let worst = rep.records.iter().filter_map(|r| r.entropy_max).fold(0.0, f64::max);
        v.push(Verdict::at_most("entropy_residual", worst, 1e-12));
    }
    v.extend(warning_verdicts(&traj, ""));
    Ok(v)
}

fn exec_sweep(c: &ExperimentConfig, out: &mut Out) -> Result<Vec<Verdict>> {
    let crate::cli::config::DatumShape::Dirac { mass, .. } = c.datum.shape else {
        return Err(Error::invalid("sweep needs datum kind = dirac"));
    };
    let grid = c.grid.build()?;
    let runs = c
        .sweep
        .m
        .par_iter()
        .map(|&m| {
            let d = scale_datum(&dirac_family(mass, m)?, c.datum.rho)?;
            run_with_diagnostics(&d, &grid, &c.scheme, &c.diagnostics)
        })
        .collect::<Result<Vec<_>>>()?;
    let d = &c.diagnostics;
    let mut table = String::from("m,X,linf");
    for q in &d.q_list {
        table.push_str(&format!(",Iq_{q}"));
    }
    for a in &d.alpha_list {
        table.push_str(&format!(",Malpha_{a}"));
    }
    table.push('\n');
    let mut verdicts = Vec::new();
    for (&m, (traj, rep)) in c.sweep.m.iter().zip(&runs) {
        out.write(&format!("report_m{m}.csv"), &rep.to_csv())?;
        if c.output.snapshots {
            out.snapshots(traj, c.output.format, &format!("m{m}_"))?;
        }
        let last = rep.records.last().expect("nonempty report");
        let mut row = vec![m.to_string(), num(1.0 / m as f64), num(last.linf)];
        row.extend(last.iq.iter().chain(&last.weighted).map(|&x| num(x)));
        table.push_str(&row.join(","));
        table.push('\n');
        verdicts.push(Verdict::at_most(format!("m{m}_mass_balance"), mass_balance(traj, rep), 1e-10));
        verdicts.extend(warning_verdicts(traj, &format!("m{m}_")));
    }
    out.write("moments.csv", &table)?;
    let lin: Vec<f64> = runs.iter().map(|(_, r)| r.records.last().expect("nonempty").linf).collect();
    let (lo, hi) = lin.iter().fold((f64::INFINITY, 0.0_f64), |(a, b), &x| (a.min(x), b.max(x)));
    verdicts.push(Verdict::at_most("linf_spread", (hi - lo) / lo, c.sweep.decay_spread));
    if !d.alpha_list.is_empty() && runs.len() >= 2 {
        let ms: Vec<f64> = runs.iter().map(|(_, r)| r.records.last().expect("nonempty").weighted[0]).collect();
        let min_inc = ms.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min);
        verdicts.push(Verdict {
            check: format!("Malpha_{}_increasing", d.alpha_list[0]),
            status: if min_inc > 0.0 { Status::Pass } else { Status::Fail },
            value: min_inc,
            threshold: 0.0,
        });
    }
    Ok(verdicts)
}

fn exec_semigroup(c: &ExperimentConfig, out: &mut Out) -> Result<Vec<Verdict>> {
    let grid = c.grid.build()?;
    let mut rng = ChaCha8Rng::seed_from_u64(c.seed);
    let pairs = (0..c.semigroup.pairs)
        .map(|_| random_bump_pair(&mut rng, &grid, c.scheme.quadrature_order))
        .collect::<Result<Vec<_>>>()?;
    let results = pairs
        .into_par_iter()
        .map(|(u, v)| semigroup_check_fields(u, v, &c.scheme))
        .collect::<Result<Vec<_>>>()?;
    let mut table = String::from("pair,kind,passed,worst_margin,steps\n");
    let kinds = [
        (SemigroupKind::Contraction, "contraction"),
        (SemigroupKind::Comparison, "comparison"),
        (SemigroupKind::Mass, "mass"),
    ];
    for (k, res) in results.iter().enumerate() {
        for r in res {
            let name = kinds.iter().find(|x| x.0 == r.kind).expect("known kind").1;
            table.push_str(&format!("{k},{name},{},{},{}\n", r.passed, num(r.worst_margin), r.steps));
        }
    }
    out.write("semigroup.csv", &table)?;
    Ok(kinds
        .iter()
        .map(|&(kind, name)| {
            let all: Vec<_> = results.iter().flatten().filter(|r| r.kind == kind).collect();
            let worst = all.iter().map(|r| r.worst_margin).fold(0.0_f64, |a, b| if b.is_nan() { b } else { a.max(b) });
            Verdict {
                check: name.to_string(),
                status: if all.iter().all(|r| r.passed) { Status::Pass } else { Status::Fail },
                value: worst,
                threshold: SEMIGROUP_TOL,
            }
        })
        .collect())
}

fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    (0..n).map(|k| a + (b - a) * k as f64 / (n - 1) as f64).collect()
}

fn exec_selfsim(c: &ExperimentConfig, out: &mut Out) -> Result<Vec<Verdict>> {
    let s = &c.selfsim;
    let mut v = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(c.seed);

    let starts: Vec<CharacteristicState> = (0..s.starts)
        .map(|_| CharacteristicState::new(rng.gen_range(-1.0..1.0), rng.gen_range(0.0..1.0), rng.gen_range(0.1..1.0)))
        .collect();
    let drift = starts
        .par_iter()
        .map(|&st| integrate_characteristic(st, s.span, 1e-12, WRate::Half).map(|p| (p.invariant_drift(), p.failed)))
        .collect::<Result<Vec<_>>>()?;
    let worst = drift.iter().map(|d| d.0).fold(0.0, f64::max);
    if !drift.is_empty() {
        v.push(Verdict::at_most("characteristic_drift", worst, 1e-8));
        v.push(Verdict::at_most(
            "characteristic_failures",
            drift.iter().filter(|d| d.1).count() as f64,
            0.0,
        ));
    }

    let params = VSSParams::new(s.c)?;
    let mut res = 0.0_f64;
    for x1 in linspace(0.5, 2.0, 16) {
        for x2 in linspace(0.0, 1.0, 16) {
            if let Some(u) = vss_eval(params, 1.0, x1, x2)?.root() {
                res = res.max(vss_implicit_residual(params, 1.0, x1, x2, u));
            }
        }
    }
    v.push(Verdict::at_most("vss_residual", res, 1e-12));

    let ws = linspace(s.w_min, s.w_max, s.w_points);
    let locus = shock_locus(params, &ws, s.cst)?;
    let pts: Vec<_> = locus.branches.iter().flatten().collect();
    let scale = 1.0 + s.cst.abs();
    let rel = pts
        .iter()
        .map(|p| ((vsss_lhs(s.c, p.w, p.y1) - s.cst).abs() / scale).max((p.y2 - vsw_y2(s.c, p.w, p.y1)).abs()))
        .fold(0.0, f64::max);
    v.push(Verdict::at_most("locus_relations", rel, 1e-10));
    if (s.c - 4.0 / 3.0).abs() < 1e-15 {
        let k2 = 3.0 * s.cst;
        let dev = pts
            .iter()
            .map(|p| ((p.w * (p.w - 2.0 * p.y1)).powi(2) - k2).abs() / (1.0 + k2))
            .fold(0.0, f64::max);
        v.push(Verdict::at_most("locus_c43_simplification", dev, 1e-10));
    }
    v.push(Verdict::info("locus_points", pts.len() as f64));
    if c.output.plots {
        out.plots(PlotInput::Locus(&locus.branches), &[PlotKind::Locus])?;
    }

    let datum = c.datum.build()?;
    let grid = c.grid.build()?;
    let (traj, rep) = run_with_diagnostics(&datum, &grid, &c.scheme, &c.diagnostics)?;
    let last = traj.snapshots.last().expect("run yields a snapshot");
    if last.time() > 0.0 {
        let prof = extract_profile(last)?;
        let g = g_of_profile(&prof);
        if c.output.plots {
            out.plots(PlotInput::Profile(&g), &[PlotKind::Profile])?;
        }
        v.push(Verdict::info("profile_residual", profile_residual(&prof)));
        let c_inf = match s.c_infty {
            Some(ci) => ci,
            None => calibrate_cinfty([(&rep, datum.mass())])?,
        };
        v.push(Verdict::info("c_infty", c_inf));
        for r in contrg_check(&g, c_inf, &[1.0, 2.0, f64::INFINITY])? {
            let p = if r.p.is_infinite() { "inf".to_string() } else { r.p.to_string() };
            v.push(Verdict {
                check: format!("contrg_p{p}_satisfied"),
                status: Status::Info,
                value: r.norm,
                threshold: r.bound,
            });
        }
    }
    v.extend(warning_verdicts(&traj, ""));
    Ok(v)
}

fn exec_calibrate(c: &ExperimentConfig, out: &mut Out) -> Result<Vec<Verdict>> {
    let suite = calibration_suite(c.calibrate.inv_h)?;
    let mut table = String::from("family,c_infty\n");
    for (name, ci) in &suite {
        table.push_str(&format!("{name},{}\n", num(*ci)));
    }
    out.write("calibration.csv", &table)?;
    let best = suite.iter().map(|r| r.1).fold(0.0, f64::max);
    Ok(vec![Verdict::info("c_infty", best)])
}

fn convergence_rows(study: &str, rows: &[ConvergenceRow]) -> String {
    let orders = pairwise_orders(rows);
    rows.iter()
        .enumerate()
        .map(|(k, r)| {
            let o = if k == 0 { String::new() } else { num(orders[k - 1]) };
            format!("{study},{},{},{},{o}\n", r.n, num(r.h), num(r.error))
        })
        .collect()
}

fn exec_validate(c: &ExperimentConfig, out: &mut Out) -> Result<Vec<Verdict>> {
    let s = &c.validate;
    let nw = nwave_convergence(&s.nwave_levels, s.nwave_cfl)?;
    let vs = vss_convergence(&s.vss_levels, s.vss_cfl)?;
    let mut table = String::from("study,n,h,error,order\n");
    table.push_str(&convergence_rows("nwave", &nw));
    table.push_str(&convergence_rows("vss", &vs));
    out.write("convergence.csv", &table)?;
    let finest = nw.iter().min_by(|a, b| a.h.total_cmp(&b.h)).expect("two levels");
    Ok(vec![
        Verdict::at_least("nwave_order", observed_order(&nw)?, s.nwave_min_order),
        Verdict::at_most("nwave_finest_error", finest.error, s.nwave_max_error),
        Verdict::at_least("vss_order", observed_order(&vs)?, s.vss_min_order),
    ])
}

/// Reads a configuration file, applies environment overrides and returns the
/// validated configuration.
pub fn load_config(path: &Path) -> Result<ExperimentConfig> {
    let text = fs::read_to_string(path)?;
    parse_config_with_env(&text, std::env::vars())
}
