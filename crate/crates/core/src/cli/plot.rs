//! Two-column curve files for plotting.

use std::fs;
use std::path::{Path, PathBuf};

use crate::data::Profile1D;
use crate::diagnostics::{loglog_fit, num, support_growth_fit, DiagnosticsReport, PowerFit};
use crate::selfsim::LocusPoint;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlotKind {
    Decay,
    Support,
    Moments,
    Profile,
    Locus,
}

impl PlotKind {
    pub fn name(self) -> &'static str {
        match self {
            PlotKind::Decay => "decay",
            PlotKind::Support => "support",
            PlotKind::Moments => "moments",
            PlotKind::Profile => "profile",
            PlotKind::Locus => "locus",
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub enum PlotInput<'a> {
    Report(&'a DiagnosticsReport),
    Profile(&'a Profile1D),
    /// Locus branches.
    Locus(&'a [Vec<LocusPoint>]),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Curve {
    pub name: String,
    pub columns: (String, String),
    pub points: Vec<(f64, f64)>,
}

impl Curve {
    fn new(name: impl Into<String>, x: &str, y: &str, points: Vec<(f64, f64)>) -> Self {
        Curve {
            name: name.into(),
            columns: (x.into(), y.into()),
            points,
        }
    }

    pub fn to_csv(&self) -> String {
        let mut s = format!("{},{}\n", self.columns.0, self.columns.1);
        for &(x, y) in &self.points {
            s.push_str(&num(x));
            s.push(',');
            s.push_str(&num(y));
            s.push('\n');
        }
        s
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlotData {
    pub curves: Vec<Curve>,
    /// Fitted power law when the kind has one; its curve is included in `curves`.
    pub fit: Option<PowerFit>,
}

fn unavailable(what: &str) -> Error {
    Error::SeriesUnavailable(what.to_string())
}

fn fit_curve(name: &str, ts: &[f64], offset: f64, fit: &PowerFit) -> Curve {
    Curve::new(
        format!("{name}_fit"),
        "t",
        "fit",
        ts.iter().map(|&t| (t, offset + fit.constant * t.powf(fit.exponent))).collect(),
    )
}

pub fn plot_data(input: PlotInput<'_>, kind: PlotKind) -> Result<PlotData> {
    match (kind, input) {
        (PlotKind::Decay, PlotInput::Report(rep)) => {
            let pts: Vec<(f64, f64)> = rep.records.iter().filter(|r| r.t > 0.0).map(|r| (r.t, r.linf)).collect();
            if pts.len() < 2 {
                return Err(unavailable("decay needs at least two samples at t > 0"));
            }
            let (ts, ys): (Vec<f64>, Vec<f64>) = pts.iter().copied().unzip();
            let fit = loglog_fit(&ts, &ys).ok();
            let mut curves = vec![Curve::new("decay", "t", "linf", pts)];
            if let Some(f) = &fit {
                curves.push(fit_curve("decay", &ts, 0.0, f));
            }
            Ok(PlotData { curves, fit })
        }
        (PlotKind::Support, PlotInput::Report(rep)) => {
            let pts: Vec<(f64, f64)> = rep
                .records
                .iter()
                .filter_map(|r| r.support_x1.half_width().map(|w| (r.t, w)))
                .collect();
            if pts.is_empty() {
                return Err(unavailable("support is empty at every sample"));
            }
            let base = rep
                .records
                .iter()
                .find(|r| r.t == 0.0)
                .and_then(|r| r.support_x1.half_width())
                .unwrap_or(0.0);
            let fit = support_growth_fit(rep).ok().filter(|f| !f.degenerate);
            let ts: Vec<f64> = pts.iter().map(|p| p.0).filter(|&t| t > 0.0).collect();
            let mut curves = vec![Curve::new("support", "t", "half_width", pts)];
            if let Some(f) = &fit {
                curves.push(fit_curve("support", &ts, base, f));
            }
            Ok(PlotData { curves, fit })
        }
        (PlotKind::Moments, PlotInput::Report(rep)) => {
            let mut curves = Vec::new();
            for (k, q) in rep.spec.q_list.iter().enumerate() {
                let pts = rep.records.iter().map(|r| (r.t, r.iq[k])).collect();
                curves.push(Curve::new(format!("moments_Iq_{q}"), "t", &format!("Iq_{q}"), pts));
            }
            for (k, a) in rep.spec.alpha_list.iter().enumerate() {
                let pts = rep.records.iter().map(|r| (r.t, r.weighted[k])).collect();
                curves.push(Curve::new(format!("moments_Malpha_{a}"), "t", &format!("Malpha_{a}"), pts));
            }
            if curves.is_empty() || rep.records.is_empty() {
                return Err(unavailable("report carries no moment series"));
            }
            Ok(PlotData { curves, fit: None })
        }
        (PlotKind::Profile, PlotInput::Profile(g)) => match g {
            Profile1D::PiecewiseConstant { origin, h, values } if !values.is_empty() => {
                let pts = values
                    .iter()
                    .enumerate()
                    .map(|(k, &v)| (origin + (k as f64 + 0.5) * h, v))
                    .collect();
                Ok(PlotData {
                    curves: vec![Curve::new("profile", "y2", "g", pts)],
                    fit: None,
                })
            }
            _ => Err(unavailable("profile must be a nonempty tabulated profile")),
        },
        (PlotKind::Locus, PlotInput::Locus(branches)) => {
            let mut curves = Vec::new();
            for (b, pts) in branches.iter().enumerate().filter(|(_, p)| !p.is_empty()) {
                curves.push(Curve::new(
                    format!("locus_b{b}"),
                    "y1",
                    "y2",
                    pts.iter().map(|p| (p.y1, p.y2)).collect(),
                ));
                curves.push(Curve::new(
                    format!("locus_w_b{b}"),
                    "W",
                    "y1",
                    pts.iter().map(|p| (p.w, p.y1)).collect(),
                ));
            }
            if curves.is_empty() {
                return Err(unavailable("locus has no points"));
            }
            Ok(PlotData { curves, fit: None })
        }
        (kind, _) => Err(unavailable(&format!("{} data not present in this input", kind.name()))),
    }
}

/// Writes `<dir>/<curve>.csv` for every curve of `kind`.
pub fn emit_plot_data(input: PlotInput<'_>, kind: PlotKind, dir: &Path) -> Result<Vec<PathBuf>> {
    let data = plot_data(input, kind)?;
    fs::create_dir_all(dir)?;
    let mut out = Vec::new();
    for c in &data.curves {
        let p = dir.join(format!("{}.csv", c.name));
        fs::write(&p, c.to_csv())?;
        out.push(p);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diagnostics::{DiagnosticSpec, Record, SupportInterval};
    use crate::selfsim::shock_locus_c43;

    fn report(ts: &[f64], linf: impl Fn(f64) -> f64, support: SupportInterval) -> DiagnosticsReport {
        DiagnosticsReport {
            spec: DiagnosticSpec::default(),
            records: ts
                .iter()
                .map(|&t| Record {
                    t,
                    mass: 1.0,
                    l1: 1.0,
                    l2: 1.0,
                    linf: linf(t),
                    support_x1: support,
                    iq: vec![1.0 + t],
                    weighted: vec![2.0 + t],
                    entropy_max: None,
                    probe: None,
                    touches_upper: false,
                })
                .collect(),
        }
    }

    #[test]
    fn decay_fit_recovers_slope() {
        let rep = report(&[0.0, 0.25, 0.5, 1.0, 2.0], |t| 3.0 / t.sqrt(), SupportInterval::Empty);
        let d = plot_data(PlotInput::Report(&rep), PlotKind::Decay).unwrap();
        let f = d.fit.unwrap();
        assert!((f.exponent + 0.5).abs() < 1e-12);
        assert!((f.constant - 3.0).abs() < 1e-12);
        assert_eq!(d.curves.len(), 2);
        assert_eq!(d.curves[0].points.len(), 4);
    }

    #[test]
    fn empty_support_is_unavailable() {
        let rep = report(&[0.0, 1.0], |_| 1.0, SupportInterval::Empty);
        let err = plot_data(PlotInput::Report(&rep), PlotKind::Support).unwrap_err();
        assert!(err.to_string().contains("series unavailable"), "{err}");
    }

    #[test]
    fn mismatched_input_is_unavailable() {
        let g = Profile1D::Zero;
        assert!(matches!(
            plot_data(PlotInput::Profile(&g), PlotKind::Decay),
            Err(Error::SeriesUnavailable(_))
        ));
    }

    #[test]
    fn c43_locus_keeps_relation() {
        let ws: Vec<f64> = (1..=40).map(|k| 0.05 * k as f64).collect();
        let k = 0.7;
        let pts = shock_locus_c43(&ws, k).unwrap();
        let d = plot_data(PlotInput::Locus(&[pts]), PlotKind::Locus).unwrap();
        let wy = &d.curves[1];
        assert!(!wy.points.is_empty());
        for &(w, y1) in &wy.points {
            assert!((w * (w - 2.0 * y1) - k).abs() <= 1e-10, "{w} {y1}");
        }
    }

    #[test]
    fn emits_files() {
        let dir = tempfile::tempdir().unwrap();
        let rep = report(&[0.0, 1.0, 2.0], |t| 1.0 / (1.0 + t), SupportInterval::Empty);
        let files = emit_plot_data(PlotInput::Report(&rep), PlotKind::Moments, dir.path()).unwrap();
        assert_eq!(files.len(), 2);
        let text = fs::read_to_string(&files[0]).unwrap();
        assert!(text.starts_with("t,Iq_2\n"));
        assert_eq!(text.lines().count(), 4);
    }
}
