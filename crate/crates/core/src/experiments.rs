//! Composite experiments shared by the command-line runner and the test
//! suites: oracle convergence studies, the calibration suite for the
//! dispersive constant, randomized data pairs and the Dirac-limit profile.

use rand::Rng;
use rayon::prelude::*;

use crate::data::{
    dirac_family, mollified_line_measure, nwave_cell_average, nwave_slice, Bump, InitialDatum, Kernel,
    MollifierSpec, NWaveParams, Profile1D,
};
use crate::diagnostics::{calibrate_cinfty, loglog_fit, run_with_diagnostics, DiagnosticSpec};
use crate::grid::{discretize, Boundary, CellField, Grid2D, Rect};
use crate::scheme::{evolve, run, BoundaryData, SchemeConfig};
use crate::selfsim::{extract_profile, g_of_profile, vss_eval, VSSParams};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvergenceRow {
    pub n: usize,
    pub h: f64,
    pub error: f64,
}

/// Least-squares slope of `ln error` against `ln h`.
pub fn observed_order(rows: &[ConvergenceRow]) -> Result<f64> {
    let hs: Vec<f64> = rows.iter().map(|r| r.h).collect();
    let es: Vec<f64> = rows.iter().map(|r| r.error).collect();
    Ok(loglog_fit(&hs, &es)?.exponent)
}

/// Order between consecutive levels.
pub fn pairwise_orders(rows: &[ConvergenceRow]) -> Vec<f64> {
    rows.windows(2)
        .map(|w| (w[0].error / w[1].error).ln() / (w[0].h / w[1].h).ln())
        .collect()
}

/// N-wave with `p = 0, q = 1` advanced from t = 0.25 to t = 1 on a single
/// row of `n` cells; L¹ error against exact cell averages.
pub fn nwave_convergence(levels: &[usize], cfl: f64) -> Result<Vec<ConvergenceRow>> {
    let params = NWaveParams::new(0.0, 1.0)?;
    let datum = nwave_slice(params, 0.25)?;
    levels
        .par_iter()
        .map(|&n| {
            // the x = 1/2 jump sits on a cell edge for every n divisible by 8
            let g = Grid2D::new(Rect::new((-0.125, 1.125), (0.0, 1.0)), n, 1, Boundary::Outflow)?;
            let f = discretize(&datum, &g, 3)?.field.with_time(0.25);
            let cfg = SchemeConfig::new(cfl, 0.75, vec![])?;
            let tr = evolve(f, &cfg, BoundaryData::FromGrid, |_| {})?;
            let s = &tr.snapshots[0];
            let mut e = 0.0;
            for i in 0..n {
                let a = nwave_cell_average(params, 1.0, g.x1_edge(i), g.x1_edge(i + 1))?;
                e += (s.get(i, 0) - a).abs() * g.h1;
            }
            Ok(ConvergenceRow { n, h: g.h1, error: e })
        })
        .collect()
}

/// `u = x2/x1` (the `c = 1` member of the implicit family) on `[1,2]×[0,1]`,
/// advanced from t = 1 to 1.5 with exact ghost values.
pub fn vss_convergence(levels: &[usize], cfl: f64) -> Result<Vec<ConvergenceRow>> {
    let p = VSSParams::new(1.0)?;
    let oracle = move |x1: f64, x2: f64, t: f64| vss_eval(p, t, x1, x2).ok().and_then(|v| v.root()).unwrap_or(0.0);
    levels
        .par_iter()
        .map(|&n| {
            let g = Grid2D::new(Rect::new((1.0, 2.0), (0.0, 1.0)), n, n, Boundary::Outflow)?;
            let f = cell_averages(&g, 1.0, &oracle)?;
            let cfg = SchemeConfig::new(cfl, 0.5, vec![])?;
            let tr = evolve(f, &cfg, BoundaryData::Dirichlet(&oracle), |_| {})?;
            let exact = cell_averages(&g, 1.5, &oracle)?;
            Ok(ConvergenceRow {
                n,
                h: g.h1,
                error: tr.snapshots[0].l1_distance(&exact)?,
            })
        })
        .collect()
}

fn cell_averages(g: &Grid2D, t: f64, f: &(dyn Fn(f64, f64, f64) -> f64 + Sync)) -> Result<CellField> {
    let rule = crate::quadrature::GaussRule::new(4)?;
    let mut v = Vec::with_capacity(g.len());
    for j in 0..g.n2 {
        let py = rule.panel_points(g.x2_edge(j), g.x2_edge(j + 1), &[]);
        for i in 0..g.n1 {
            let px = rule.panel_points(g.x1_edge(i), g.x1_edge(i + 1), &[]);
            let mut s = 0.0;
            for &(y, wy) in &py {
                for &(x, wx) in &px {
                    s += wx * wy * f(x, y, t);
                }
            }
            v.push(s / g.cell_area());
        }
    }
    CellField::new(*g, v, t)
}

/// Box used by the calibration suite and the Dirac sweeps.
pub fn standard_box(inv_h: usize) -> Result<Grid2D> {
    Grid2D::new(
        Rect::new((-1.0, 2.0), (-0.5, 5.0)),
        3 * inv_h,
        11 * inv_h / 2,
        Boundary::Outflow,
    )
}

/// Calibration data families: Dirac members `m ∈ {8, 16, 32}`, a mollified
/// line measure and an indicator block.
pub fn calibration_family() -> Result<Vec<(String, InitialDatum)>> {
    let mut out = Vec::new();
    for m in [8, 16, 32] {
        out.push((format!("dirac_m{m}"), dirac_family(1.0, m)?));
    }
    out.push((
        "line_measure".into(),
        mollified_line_measure(
            Profile1D::indicator(0.0, 1.0),
            MollifierSpec::horizontal(Kernel::CosineBump, 0.05)?,
        )?,
    ));
    out.push((
        "indicator".into(),
        InitialDatum::indicator(Rect::new((-0.25, 0.25), (0.0, 0.5)), 2.0)?,
    ));
    Ok(out)
}

/// Per-family calibrated constants on the standard box with spacing `1/inv_h`,
/// sampled every 0.05 up to t = 2.
pub fn calibration_suite(inv_h: usize) -> Result<Vec<(String, f64)>> {
    let grid = standard_box(inv_h)?;
    let times: Vec<f64> = (1..=40).map(|k| 0.05 * k as f64).collect();
    let cfg = SchemeConfig::new(0.5, 2.0, times)?;
    calibration_family()?
        .into_par_iter()
        .map(|(name, d)| {
            let (_, rep) = run_with_diagnostics(&d, &grid, &cfg, &DiagnosticSpec::default())?;
            Ok((name, calibrate_cinfty([(&rep, d.mass())])?))
        })
        .collect()
}

/// Largest constant over the calibration suite.
pub fn calibrated_cinfty(inv_h: usize) -> Result<f64> {
    Ok(calibration_suite(inv_h)?.into_iter().map(|r| r.1).fold(0.0, f64::max))
}

/// A random smooth field and a companion obtained by adding a nonnegative
/// bump, so the pair is ordered cell by cell.
pub fn random_bump_pair(rng: &mut impl Rng, grid: &Grid2D, order: usize) -> Result<(CellField, CellField)> {
    let (w1, w2) = (grid.x1_max() - grid.x1_min, grid.x2_max() - grid.x2_min);
    let bump = |rng: &mut dyn rand::RngCore, amp: f64| {
        let hw = (rng.gen_range(0.08..0.2) * w1, rng.gen_range(0.08..0.2) * w2);
        Bump {
            center: (
                grid.x1_min + rng.gen_range(0.3..0.7) * w1,
                grid.x2_min + rng.gen_range(0.3..0.7) * w2,
            ),
            half_width: hw,
            amplitude: amp,
        }
    };
    let k = rng.gen_range(1..=3);
    let base: Vec<Bump> = (0..k)
        .map(|_| {
            let a = rng.gen_range(-1.0..1.0);
            bump(rng, a)
        })
        .collect();
    let extra_amp = rng.gen_range(0.1..1.0);
    let extra = bump(rng, extra_amp);
    let u = discretize(&InitialDatum::bump_sum(base)?, grid, order)?.field;
    let e = discretize(&InitialDatum::bump_sum(vec![extra])?, grid, order)?.field;
    let v: Vec<f64> = u.values().iter().zip(e.values()).map(|(a, b)| a + b.max(0.0)).collect();
    let v = CellField::new(*grid, v, u.time())?;
    Ok((u, v))
}

/// x2-marginal `g` of the self-similar profile extracted from the Dirac
/// member `m` at the early time `0.1 m⁻⁵`, before vertical transport has
/// moved mass across the datum width. The grid resolves the datum with
/// eight cells per half-width.
pub fn dirac_limit_profile(mass: f64, m: u32) -> Result<(Profile1D, f64)> {
    if m == 0 {
        return Err(Error::invalid("Dirac member index must be positive"));
    }
    let w = 1.0 / m as f64;
    let n = 8;
    let g = Grid2D::new(
        Rect::new((-2.0 * w, 4.0 * w), (-2.0 * w, 6.0 * w)),
        6 * n,
        8 * n,
        Boundary::Outflow,
    )?;
    let t = 0.1 * w.powi(5);
    let cfg = SchemeConfig::new(0.5, t, vec![])?;
    let tr = run(&dirac_family(mass, m)?, &g, &cfg)?;
    let prof = extract_profile(&tr.snapshots[0])?;
    Ok((g_of_profile(&prof), t))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    #[test]
    fn order_of_exact_power_law() {
        let rows: Vec<ConvergenceRow> = [0.1, 0.05, 0.025]
            .iter()
            .map(|&h| ConvergenceRow { n: 0, h, error: 3.0 * h * h })
            .collect();
        assert!((observed_order(&rows).unwrap() - 2.0).abs() < 1e-12);
        assert!(pairwise_orders(&rows).iter().all(|o| (o - 2.0).abs() < 1e-12));
    }

    #[test]
    fn bump_pairs_are_ordered() {
        let g = Grid2D::new(Rect::new((0.0, 1.0), (0.0, 1.0)), 16, 16, Boundary::Periodic).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for _ in 0..5 {
            let (u, v) = random_bump_pair(&mut rng, &g, 3).unwrap();
            assert!(u.values().iter().zip(v.values()).all(|(a, b)| a <= b));
            assert!(v.mass() > u.mass());
        }
    }

    #[test]
    fn limit_profile_keeps_datum_peak() {
        let (g, t) = dirac_limit_profile(1.0, 4).unwrap();
        assert!(t > 0.0);
        assert!((g.mass() - 1.0).abs() < 1e-12);
        // the datum's own marginal peaks at m
        let peak = g.lp_norm(f64::INFINITY).unwrap();
        assert!(peak > 3.0 && peak <= 4.0 + 1e-12, "{peak}");
    }
}
