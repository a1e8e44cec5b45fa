//! First-order monotone finite-volume scheme for
//! `∂t u + ∂1(u²/2) + ∂2(u³/3) = 0`.
//!
//! Horizontal interfaces use the exact Godunov flux of `u²/2`; the vertical
//! flux `u³/3` is nondecreasing, so its Godunov flux is the lower state.
//! Under `dt (max|u|/h1 + max u²/h2) ≤ 1` the update is monotone, hence
//! L¹-contractive, order preserving and conservative.

use rayon::prelude::*;

use crate::data::InitialDatum;
use crate::grid::{discretize, Boundary, CellField, Grid2D};
use crate::{Error, Result};

#[inline]
fn f(u: f64) -> f64 {
    0.5 * u * u
}

#[inline]
fn g(u: f64) -> f64 {
    u * u * u / 3.0
}

// Hot-path Godunov flux; inputs are known finite.
#[inline]
fn godunov(ul: f64, ur: f64) -> f64 {
    if ul >= ur {
        f(ul).max(f(ur))
    } else if ul <= 0.0 && ur >= 0.0 {
        0.0
    } else {
        f(ul).min(f(ur))
    }
}

/// Exact Godunov flux for `f(u) = u²/2`.
pub fn godunov_flux_quadratic(ul: f64, ur: f64) -> Result<f64> {
    if !(ul.is_finite() && ur.is_finite()) {
        return Err(Error::invalid("Godunov flux needs finite states"));
    }
    Ok(godunov(ul, ur))
}

/// Godunov flux for the nondecreasing flux `g(u) = u³/3`: the left state wins.
pub fn upwind_flux_cubic(ul: f64, ur: f64) -> Result<f64> {
    if !(ul.is_finite() && ur.is_finite()) {
        return Err(Error::invalid("upwind flux needs finite states"));
    }
    Ok(g(ul))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Splitting {
    Unsplit,
    /// `X(dt/2) Y(dt) X(dt/2)`.
    Strang,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SchemeConfig {
    pub cfl: f64,
    pub splitting: Splitting,
    pub t_end: f64,
    pub snapshot_times: Vec<f64>,
    pub dt_max: f64,
    pub quadrature_order: usize,
}

impl Default for SchemeConfig {
    fn default() -> Self {
        SchemeConfig {
            cfl: 0.5,
            splitting: Splitting::Unsplit,
            t_end: 1.0,
            snapshot_times: Vec::new(),
            dt_max: 0.1,
            quadrature_order: 3,
        }
    }
}

impl SchemeConfig {
    pub fn new(cfl: f64, t_end: f64, snapshot_times: Vec<f64>) -> Result<Self> {
        let c = SchemeConfig {
            cfl,
            t_end,
            snapshot_times,
            ..Default::default()
        };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.cfl > 0.0 && self.cfl <= 1.0) {
            return Err(Error::invalid(format!("cfl must lie in (0, 1], got {}", self.cfl)));
        }
        if !(self.t_end >= 0.0 && self.t_end.is_finite()) {
            return Err(Error::invalid(format!("t_end must be nonnegative, got {}", self.t_end)));
        }
        if !(self.dt_max > 0.0) {
            return Err(Error::invalid(format!("dt_max must be positive, got {}", self.dt_max)));
        }
        if self.quadrature_order == 0 {
            return Err(Error::invalid("quadrature order must be at least 1"));
        }
        for w in self.snapshot_times.windows(2) {
            if w[1] < w[0] {
                return Err(Error::invalid("snapshot times must be sorted"));
            }
        }
        if let Some(&t) = self.snapshot_times.iter().find(|&&t| !(0.0..=self.t_end).contains(&t)) {
            return Err(Error::invalid(format!(
                "snapshot time {t} outside [0, {}]",
                self.t_end
            )));
        }
        Ok(())
    }

    /// Requested snapshot times; `[t_end]` when none are given.
    pub fn effective_snapshots(&self) -> Vec<f64> {
        if self.snapshot_times.is_empty() {
            vec![self.t_end]
        } else {
            self.snapshot_times.clone()
        }
    }
}

/// Largest stable step `cfl / (max|u|/h1 + max u²/h2)`, capped by `dt_max`.
pub fn cfl_dt(field: &CellField, cfl: f64, dt_max: f64) -> f64 {
    let grid = field.grid();
    let m = field.max_abs();
    let rate = m / grid.h1 + m * m / grid.h2;
    if rate == 0.0 {
        dt_max
    } else {
        (cfl / rate).min(dt_max)
    }
}

/// `dt (max|u|/h1 + max u²/h2)`; the update is monotone while this is ≤ 1.
pub fn courant_number(field: &CellField, dt: f64) -> f64 {
    let grid = field.grid();
    let m = field.max_abs();
    dt * (m / grid.h1 + m * m / grid.h2)
}

/// Ghost-cell source for one update.
#[derive(Clone, Copy)]
pub enum BoundaryData<'a> {
    /// Policy stored on the grid (outflow copy or periodic wrap).
    FromGrid,
    /// Ghost cells take the given function at their centers and the current time.
    Dirichlet(&'a (dyn Fn(f64, f64, f64) -> f64 + Sync)),
}

// Row-padded copy of the field with one ghost layer on each side.
struct Padded {
    n1: usize,
    data: Vec<f64>,
}

impl Padded {
    fn new(field: &CellField, bc: BoundaryData<'_>) -> Self {
        let grid = *field.grid();
        let (n1, n2) = (grid.n1, grid.n2);
        let w = n1 + 2;
        let mut data = vec![0.0; w * (n2 + 2)];
        let v = field.values();
        for j in 0..n2 {
            data[(j + 1) * w + 1..(j + 1) * w + 1 + n1].copy_from_slice(&v[j * n1..(j + 1) * n1]);
        }
        let t = field.time();
        match bc {
            BoundaryData::FromGrid => match grid.boundary {
                Boundary::Outflow => {
                    for j in 1..=n2 {
                        data[j * w] = data[j * w + 1];
                        data[j * w + n1 + 1] = data[j * w + n1];
                    }
                    for i in 0..w {
                        data[i] = data[w + i];
                        data[(n2 + 1) * w + i] = data[n2 * w + i];
                    }
                }
                Boundary::Periodic => {
                    for j in 1..=n2 {
                        data[j * w] = data[j * w + n1];
                        data[j * w + n1 + 1] = data[j * w + 1];
                    }
                    for i in 0..w {
                        data[i] = data[n2 * w + i];
                        data[(n2 + 1) * w + i] = data[w + i];
                    }
                }
            },
            BoundaryData::Dirichlet(h) => {
                let x1 = |i: usize| grid.x1_min + (i as f64 - 0.5) * grid.h1;
                let x2 = |j: usize| grid.x2_min + (j as f64 - 0.5) * grid.h2;
                for j in 0..n2 + 2 {
                    data[j * w] = h(x1(0), x2(j), t);
                    data[j * w + n1 + 1] = h(x1(n1 + 1), x2(j), t);
                }
                for i in 0..w {
                    data[i] = h(x1(i), x2(0), t);
                    data[(n2 + 1) * w + i] = h(x1(i), x2(n2 + 1), t);
                }
            }
        }
        Padded { n1, data }
    }

    #[inline]
    fn at(&self, i: usize, j: usize) -> f64 {
        self.data[j * (self.n1 + 2) + i]
    }

    #[inline]
    fn row(&self, j: usize) -> &[f64] {
        let w = self.n1 + 2;
        &self.data[j * w..(j + 1) * w]
    }
}

fn check_cfl(field: &CellField, dt: f64, cfl: f64) -> Result<()> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::invalid(format!("time step must be positive, got {dt}")));
    }
    let c = courant_number(field, dt);
    let limit = cfl.min(1.0);
    if c > limit * (1.0 + 1e-12) {
        let m = field.max_abs();
        let rate = m / field.grid().h1 + m * m / field.grid().h2;
        return Err(Error::CflViolation {
            dt,
            limit: limit / rate,
        });
    }
    Ok(())
}

/// One conservative update of length `dt` using the grid's boundary policy.
pub fn step(field: &CellField, dt: f64, config: &SchemeConfig) -> Result<CellField> {
    step_with(field, dt, config, BoundaryData::FromGrid)
}

pub fn step_with(
    field: &CellField,
    dt: f64,
    config: &SchemeConfig,
    bc: BoundaryData<'_>,
) -> Result<CellField> {
    check_cfl(field, dt, config.cfl)?;
    let out = match config.splitting {
        Splitting::Unsplit => unsplit_update(field, dt, bc),
        Splitting::Strang => {
            let a = sweep_x1(field, 0.5 * dt, bc);
            let b = sweep_x2(&a, dt, bc);
            sweep_x1(&b, 0.5 * dt, bc)
        }
    };
    Ok(out.with_time(field.time() + dt))
}

fn unsplit_update(field: &CellField, dt: f64, bc: BoundaryData<'_>) -> CellField {
    let grid = *field.grid();
    let p = Padded::new(field, bc);
    let l1 = dt / grid.h1;
    let l2 = dt / grid.h2;
    let n1 = grid.n1;
    let mut out = vec![0.0; grid.len()];
    out.par_chunks_mut(n1).enumerate().for_each(|(j, row)| {
        let cur = p.row(j + 1);
        let below = p.row(j);
        let mut f_left = godunov(cur[0], cur[1]);
        for i in 0..n1 {
            let u = cur[i + 1];
            let f_right = godunov(u, cur[i + 2]);
            row[i] = u - l1 * (f_right - f_left) - l2 * (g(u) - g(below[i + 1]));
            f_left = f_right;
        }
    });
    CellField::from_parts(grid, out, field.time())
}

fn sweep_x1(field: &CellField, dt: f64, bc: BoundaryData<'_>) -> CellField {
    let grid = *field.grid();
    let p = Padded::new(field, bc);
    let l1 = dt / grid.h1;
    let n1 = grid.n1;
    let mut out = vec![0.0; grid.len()];
    out.par_chunks_mut(n1).enumerate().for_each(|(j, row)| {
        let cur = p.row(j + 1);
        let mut f_left = godunov(cur[0], cur[1]);
        for i in 0..n1 {
            let f_right = godunov(cur[i + 1], cur[i + 2]);
            row[i] = cur[i + 1] - l1 * (f_right - f_left);
            f_left = f_right;
        }
    });
    CellField::from_parts(grid, out, field.time())
}

fn sweep_x2(field: &CellField, dt: f64, bc: BoundaryData<'_>) -> CellField {
    let grid = *field.grid();
    let p = Padded::new(field, bc);
    let l2 = dt / grid.h2;
    let n1 = grid.n1;
    let mut out = vec![0.0; grid.len()];
    out.par_chunks_mut(n1).enumerate().for_each(|(j, row)| {
        let cur = p.row(j + 1);
        let below = p.row(j);
        for i in 0..n1 {
            let u = cur[i + 1];
            row[i] = u - l2 * (g(u) - g(below[i + 1]));
        }
    });
    CellField::from_parts(grid, out, field.time())
}

/// Net mass entering the box through its edges during an unsplit step of
/// length `dt` from `field` (zero for periodic grids).
pub fn boundary_mass_flux(field: &CellField, dt: f64) -> f64 {
    let grid = *field.grid();
    if grid.boundary == Boundary::Periodic {
        return 0.0;
    }
    let p = Padded::new(field, BoundaryData::FromGrid);
    let (n1, n2) = (grid.n1, grid.n2);
    let mut horiz = 0.0;
    for j in 1..=n2 {
        horiz += godunov(p.at(0, j), p.at(1, j)) - godunov(p.at(n1, j), p.at(n1 + 1, j));
    }
    let mut vert = 0.0;
    for i in 1..=n1 {
        vert += g(p.at(i, 0)) - g(p.at(i, n2));
    }
    dt * (horiz * grid.h2 + vert * grid.h1)
}

/// Per-cell discrete Kružkov entropy production for the constant `k`.
#[derive(Debug, Clone)]
pub struct EntropyResidualField {
    pub grid: Grid2D,
    pub k: f64,
    pub values: Vec<f64>,
}

impl EntropyResidualField {
    /// Largest positive part; zero when the cell entropy inequality holds.
    pub fn max_positive(&self) -> f64 {
        self.values.iter().fold(0.0_f64, |m, &r| m.max(r))
    }
}

/// Scale used to normalize entropy residuals: `max(1, ‖u‖∞³ / min(h1, h2))`.
pub fn entropy_scale(field: &CellField) -> f64 {
    let m = field.max_abs();
    let h = field.grid().h1.min(field.grid().h2);
    (m * m * m / h).max(1.0)
}

/// `r = (|u′−k| − |u−k|)/dt + ΔQ₁/h1 + ΔQ₂/h2` with the numerical entropy
/// fluxes `Q(a, b) = F(a∨k, b∨k) − F(a∧k, b∧k)` built from the unsplit
/// scheme's fluxes. For a monotone step every `r ≤ 0` up to rounding.
pub fn entropy_residual(
    before: &CellField,
    after: &CellField,
    dt: f64,
    k: f64,
) -> Result<EntropyResidualField> {
    before.check_same_grid(after)?;
    if !(dt > 0.0) {
        return Err(Error::invalid(format!("entropy residual needs dt > 0, got {dt}")));
    }
    if !k.is_finite() {
        return Err(Error::invalid("Kruzkov constant must be finite"));
    }
    let grid = *before.grid();
    let p = Padded::new(before, BoundaryData::FromGrid);
    let n1 = grid.n1;
    let q1 = |a: f64, b: f64| godunov(a.max(k), b.max(k)) - godunov(a.min(k), b.min(k));
    let q2 = |a: f64| g(a.max(k)) - g(a.min(k));
    let mut values = vec![0.0; grid.len()];
    let new = after.values();
    values.par_chunks_mut(n1).enumerate().for_each(|(j, row)| {
        let cur = p.row(j + 1);
        let below = p.row(j);
        for i in 0..n1 {
            let u = cur[i + 1];
            let un = new[j * n1 + i];
            let d1 = q1(u, cur[i + 2]) - q1(cur[i], u);
            let d2 = q2(u) - q2(below[i + 1]);
            row[i] = ((un - k).abs() - (u - k).abs()) / dt + d1 / grid.h1 + d2 / grid.h2;
        }
    });
    Ok(EntropyResidualField { grid, k, values })
}

/// What happened during one step, handed to run observers.
pub struct StepEvent<'a> {
    pub before: &'a CellField,
    pub after: &'a CellField,
    pub dt: f64,
    pub boundary_flux: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum RunWarning {
    /// The datum's declared support is not inside the grid box.
    SupportOutsideDomain,
    /// Nonzero values reached the outermost cell ring under outflow
    /// boundaries (first time recorded).
    SupportEscape { time: f64 },
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub snapshots: Vec<CellField>,
    pub warnings: Vec<RunWarning>,
    pub steps: usize,
    /// Cumulative boundary mass flux at each snapshot.
    pub boundary_flux: Vec<f64>,
}

/// Discretizes `datum` and evolves it, recording snapshots at the requested
/// times. Deterministic for a fixed configuration.
pub fn run(datum: &InitialDatum, grid: &Grid2D, config: &SchemeConfig) -> Result<Trajectory> {
    run_observed(datum, grid, config, |_| {})
}

pub fn run_observed(
    datum: &InitialDatum,
    grid: &Grid2D,
    config: &SchemeConfig,
    observer: impl FnMut(&StepEvent<'_>),
) -> Result<Trajectory> {
    config.validate()?;
    let d = discretize(datum, grid, config.quadrature_order)?;
    let mut traj = evolve(d.field, config, BoundaryData::FromGrid, observer)?;
    if d.support_outside_domain {
        traj.warnings.insert(0, RunWarning::SupportOutsideDomain);
    }
    Ok(traj)
}

/// Evolves an already discretized field.
pub fn evolve(
    initial: CellField,
    config: &SchemeConfig,
    bc: BoundaryData<'_>,
    mut observer: impl FnMut(&StepEvent<'_>),
) -> Result<Trajectory> {
    config.validate()?;
    let t0 = initial.time();
    let targets: Vec<f64> = config.effective_snapshots().into_iter().map(|t| t + t0).collect();
    let t_end = t0 + config.t_end;
    let mut snapshots = Vec::with_capacity(targets.len());
    let mut fluxes = Vec::with_capacity(targets.len());
    let mut warnings = Vec::new();
    let mut cur = initial;
    let mut steps = 0usize;
    let mut flux_total = 0.0;
    let check_escape = matches!(bc, BoundaryData::FromGrid) && cur.grid().boundary == Boundary::Outflow;
    let mut escaped = false;
    for &target in &targets {
        while cur.time() < target {
            let remaining = target - cur.time();
            let mut dt = cfl_dt(&cur, config.cfl, config.dt_max);
            // land exactly on the snapshot; avoid a sliver step just before it
            if dt >= remaining || remaining - dt < 1e-12 * target.max(1.0) {
                dt = remaining;
            }
            let bflux = match bc {
                BoundaryData::FromGrid => boundary_mass_flux(&cur, dt),
                BoundaryData::Dirichlet(_) => f64::NAN,
            };
            let mut next = step_with(&cur, dt, config, bc)?;
            if dt == remaining {
                next = next.with_time(target);
            }
            observer(&StepEvent {
                before: &cur,
                after: &next,
                dt,
                boundary_flux: bflux,
            });
            flux_total += bflux;
            steps += 1;
            cur = next;
            if check_escape && !escaped && touches_boundary(&cur) {
                escaped = true;
                warnings.push(RunWarning::SupportEscape { time: cur.time() });
            }
        }
        snapshots.push(cur.clone());
        fluxes.push(flux_total);
        if cur.time() >= t_end {
            break;
        }
    }
    Ok(Trajectory {
        snapshots,
        warnings,
        steps,
        boundary_flux: fluxes,
    })
}

fn touches_boundary(field: &CellField) -> bool {
    let grid = field.grid();
    let thr = 1e-12 * field.max_abs();
    if thr == 0.0 {
        return false;
    }
    let (n1, n2) = (grid.n1, grid.n2);
    let big = |i: usize, j: usize| field.get(i, j).abs() > thr;
    (0..n1).any(|i| big(i, 0) || big(i, n2 - 1)) || (0..n2).any(|j| big(0, j) || big(n1 - 1, j))
}

/// Several fields on one grid advanced with a common time step (the
/// smallest stable step among them), as needed by contraction and
/// comparison experiments.
pub struct LockstepRun {
    fields: Vec<CellField>,
    config: SchemeConfig,
    steps: usize,
}

impl LockstepRun {
    pub fn new(fields: Vec<CellField>, config: SchemeConfig) -> Result<Self> {
        config.validate()?;
        if fields.is_empty() {
            return Err(Error::invalid("lockstep run needs at least one field"));
        }
        for w in fields.windows(2) {
            w[0].check_same_grid(&w[1])?;
            if w[0].time() != w[1].time() {
                return Err(Error::Internal("lockstep fields start at different times".into()));
            }
        }
        Ok(LockstepRun {
            fields,
            config,
            steps: 0,
        })
    }

    pub fn fields(&self) -> &[CellField] {
        &self.fields
    }

    pub fn time(&self) -> f64 {
        self.fields[0].time()
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    /// Common step for all fields, not exceeding `remaining`.
    pub fn common_dt(&self, remaining: f64) -> f64 {
        let dt = self
            .fields
            .iter()
            .map(|f| cfl_dt(f, self.config.cfl, self.config.dt_max))
            .fold(f64::INFINITY, f64::min);
        if dt >= remaining || remaining - dt < 1e-12 * remaining.max(1.0) {
            remaining
        } else {
            dt
        }
    }

    /// Advances every field by the same `dt`; returns the per-field boundary fluxes.
    pub fn step(&mut self, dt: f64) -> Result<Vec<f64>> {
        let mut fluxes = Vec::with_capacity(self.fields.len());
        let mut next = Vec::with_capacity(self.fields.len());
        for f in &self.fields {
            fluxes.push(boundary_mass_flux(f, dt));
            next.push(step(f, dt, &self.config)?);
        }
        let t = next[0].time();
        if next.iter().any(|f| f.time() != t) {
            return Err(Error::Internal("lockstep fields desynchronized".into()));
        }
        self.fields = next;
        self.steps += 1;
        Ok(fluxes)
    }

    /// Steps until `target`, calling `observe` after every step.
    pub fn advance_to(
        &mut self,
        target: f64,
        mut observe: impl FnMut(&[CellField], &[f64]),
    ) -> Result<()> {
        while self.time() < target {
            let dt = self.common_dt(target - self.time());
            let fl = self.step(dt)?;
            if self.time() > target || (target - self.time()).abs() < 1e-12 * target.max(1.0) {
                let t = target;
                for f in &mut self.fields {
                    *f = f.clone().with_time(t);
                }
            }
            observe(&self.fields, &fl);
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{nwave_cell_average, nwave_slice, NWaveParams};
    use crate::grid::Rect;

    fn grid(n1: usize, n2: usize, b: Boundary) -> Grid2D {
        Grid2D::new(Rect::new((0.0, 1.0), (0.0, 1.0)), n1, n2, b).unwrap()
    }

    // Independent oracle: Godunov flux as the flux at the self-similar
    // Riemann solution's x/t = 0 state, resolved by brute-force search of
    // the exact wave structure (shock speed (ul+ur)/2, fan between).
    fn riemann_origin_state(ul: f64, ur: f64) -> f64 {
        if ul > ur {
            if 0.5 * (ul + ur) >= 0.0 {
                ul
            } else {
                ur
            }
        } else if ul >= 0.0 {
            ul
        } else if ur <= 0.0 {
            ur
        } else {
            0.0
        }
    }

    #[test]
    fn godunov_examples() {
        assert_eq!(godunov_flux_quadratic(1.0, -1.0).unwrap(), 0.5);
        assert_eq!(godunov_flux_quadratic(-1.0, 1.0).unwrap(), 0.0);
        assert_eq!(godunov_flux_quadratic(2.0, 2.0).unwrap(), 2.0);
        assert!(godunov_flux_quadratic(f64::NAN, 1.0).is_err());
        assert!(godunov_flux_quadratic(0.0, f64::INFINITY).is_err());
    }

    #[test]
    fn upwind_examples() {
        assert!((upwind_flux_cubic(2.0, -5.0).unwrap() - 8.0 / 3.0).abs() < 1e-15);
        assert_eq!(upwind_flux_cubic(0.0, 7.0).unwrap(), 0.0);
        assert!(upwind_flux_cubic(1.0, f64::NAN).is_err());
    }

    #[test]
    fn cfl_dt_examples() {
        let g = Grid2D::new(Rect::new((0.0, 1.0), (0.0, 1.0)), 10, 10, Boundary::Outflow).unwrap();
        let f = CellField::new(g, vec![2.0; 100], 0.0).unwrap();
        assert!((cfl_dt(&f, 0.5, 1.0) - 1.0 / 120.0).abs() < 1e-16);
        let g = Grid2D::new(Rect::new((0.0, 1.0), (0.0, 1.0)), 1, 1, Boundary::Outflow).unwrap();
        let f = CellField::new(g, vec![1.0], 0.0).unwrap();
        assert_eq!(cfl_dt(&f, 1.0, 1.0), 0.5);
        assert_eq!(cfl_dt(&CellField::zeros(g), 0.5, 0.1), 0.1);
    }

    #[test]
    fn constants_are_fixed_points() {
        let cfg = SchemeConfig::default();
        for b in [Boundary::Periodic, Boundary::Outflow] {
            let g = grid(7, 5, b);
            let c = CellField::new(g, vec![-0.7; 35], 0.0).unwrap();
            let dt = cfl_dt(&c, 0.5, 0.1);
            let n = step(&c, dt, &cfg).unwrap();
            assert!(n.values().iter().all(|&v| v == -0.7));
            let z = step(&CellField::zeros(g), 0.01, &cfg).unwrap();
            assert!(z.values().iter().all(|&v| v == 0.0));
        }
    }

    #[test]
    fn cfl_violation_is_rejected() {
        let g = grid(10, 10, Boundary::Periodic);
        let f = CellField::new(g, vec![1.0; 100], 0.0).unwrap();
        let dt = 2.0 * cfl_dt(&f, 1.0, 1.0);
        assert!(matches!(step(&f, dt, &SchemeConfig::default()), Err(Error::CflViolation { .. })));
    }

    #[test]
    fn nwave_one_step_error_shrinks_under_refinement() {
        let params = NWaveParams::new(0.0, 1.0).unwrap();
        let datum = nwave_slice(params, 0.25).unwrap();
        let mut errs = Vec::new();
        for n in [64usize, 128, 256] {
            let g = Grid2D::new(Rect::new((-0.125, 1.125), (0.0, 1.0)), n, 1, Boundary::Outflow).unwrap();
            let f = discretize(&datum, &g, 3).unwrap().field.with_time(0.25);
            let dt = cfl_dt(&f, 0.5, 0.1);
            let cfg = SchemeConfig::default();
            let next = step(&f, dt, &cfg).unwrap();
            let mut e = 0.0;
            for i in 0..n {
                let a = nwave_cell_average(params, 0.25 + dt, g.x1_edge(i), g.x1_edge(i + 1)).unwrap();
                e += (next.get(i, 0) - a).abs() * g.h1;
            }
            errs.push(e);
        }
        assert!(errs[1] < errs[0] && errs[2] < errs[1], "{errs:?}");
    }

    #[test]
    fn run_t_end_zero_returns_datum() {
        let g = grid(8, 8, Boundary::Outflow);
        let d = crate::data::dirac_family(0.01, 4).unwrap();
        let cfg = SchemeConfig::new(0.5, 0.0, vec![]).unwrap();
        let tr = run(&d, &g, &cfg).unwrap();
        assert_eq!(tr.snapshots.len(), 1);
        assert_eq!(tr.steps, 0);
        assert_eq!(tr.snapshots[0], discretize(&d, &g, 3).unwrap().field);
    }

    #[test]
    fn run_periodic_constant_stays_constant() {
        let g = grid(6, 6, Boundary::Periodic);
        let d = InitialDatum::constant(0.3);
        let cfg = SchemeConfig::new(0.9, 1.0, vec![0.25, 0.5, 1.0]).unwrap();
        let tr = run(&d, &g, &cfg).unwrap();
        assert_eq!(tr.snapshots.len(), 3);
        for (s, t) in tr.snapshots.iter().zip([0.25, 0.5, 1.0]) {
            assert_eq!(s.time(), t);
            assert!(s.values().iter().all(|&v| (v - 0.3).abs() < 1e-15));
        }
    }

    #[test]
    fn config_validation() {
        assert!(SchemeConfig::new(1.5, 1.0, vec![]).is_err());
        assert!(SchemeConfig::new(0.0, 1.0, vec![]).is_err());
        assert!(SchemeConfig::new(0.5, 1.0, vec![0.5, 0.2]).is_err());
        assert!(SchemeConfig::new(0.5, 1.0, vec![1.5]).is_err());
        assert!(SchemeConfig::new(1.0, 1.0, vec![0.0, 1.0]).is_ok());
    }

    #[test]
    fn entropy_residual_constant_and_shock() {
        let g = grid(16, 4, Boundary::Outflow);
        let cfg = SchemeConfig::default();
        let c = CellField::new(g, vec![0.4; 64], 0.0).unwrap();
        let dt = cfl_dt(&c, 0.5, 0.1);
        let n = step(&c, dt, &cfg).unwrap();
        for k in [-1.0, 0.0, 0.4, 2.0] {
            let r = entropy_residual(&c, &n, dt, k).unwrap();
            assert!(r.values.iter().all(|v| v.abs() < 1e-12));
        }
        // stationary shock 1 | -1 and transonic rarefaction -1 | 1
        for (ul, ur) in [(1.0, -1.0), (-1.0, 1.0)] {
            let d = InitialDatum::riemann(ul, ur, 0.5);
            let mut f = discretize(&d, &g, 3).unwrap().field;
            for _ in 0..40 {
                let dt = cfl_dt(&f, 0.9, 0.1);
                let n = step(&f, dt, &cfg.clone()).unwrap_or_else(|_| {
                    step(&f, dt, &SchemeConfig { cfl: 0.9, ..cfg.clone() }).unwrap()
                });
                let r = entropy_residual(&f, &n, dt, 0.0).unwrap();
                assert!(r.max_positive() <= 1e-12 * entropy_scale(&f), "{ul},{ur}: {}", r.max_positive());
                f = n;
            }
        }
        let other = grid(4, 4, Boundary::Outflow);
        assert!(entropy_residual(&c, &CellField::zeros(other), 0.1, 0.0).is_err());
    }

    #[test]
    fn strang_splitting_conserves_mass() {
        let g = grid(20, 20, Boundary::Periodic);
        let d = crate::data::InitialDatum::bump_sum(vec![crate::data::Bump {
            center: (0.5, 0.5),
            half_width: (0.2, 0.2),
            amplitude: 1.0,
        }])
        .unwrap();
        let mut cfg = SchemeConfig::new(0.5, 0.3, vec![]).unwrap();
        cfg.splitting = Splitting::Strang;
        let tr = run(&d, &g, &cfg).unwrap();
        let m0 = discretize(&d, &g, 3).unwrap().field.mass();
        assert!((tr.snapshots[0].mass() - m0).abs() < 1e-14);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn flux_consistency(u in -50.0f64..50.0) {
                prop_assert_eq!(godunov_flux_quadratic(u, u).unwrap(), 0.5 * u * u);
                prop_assert_eq!(upwind_flux_cubic(u, u).unwrap(), u * u * u / 3.0);
            }

            #[test]
            fn godunov_matches_riemann_oracle(ul in -5.0f64..5.0, ur in -5.0f64..5.0) {
                let s = riemann_origin_state(ul, ur);
                prop_assert!((godunov_flux_quadratic(ul, ur).unwrap() - 0.5 * s * s).abs() < 1e-12);
            }

            #[test]
            fn godunov_is_monotone(a in -3.0f64..3.0, b in -3.0f64..3.0, d in 0.0f64..1.0) {
                // nondecreasing in the left state, nonincreasing in the right
                prop_assert!(godunov(a + d, b) >= godunov(a, b));
                prop_assert!(godunov(a, b + d) <= godunov(a, b));
            }

            #[test]
            fn step_is_l1_contractive_and_order_preserving(
                u in proptest::collection::vec(-2.0f64..2.0, 48),
                bump in proptest::collection::vec(0.0f64..1.0, 48),
            ) {
                let g = grid(8, 6, Boundary::Periodic);
                let fu = CellField::new(g, u.clone(), 0.0).unwrap();
                let v: Vec<f64> = u.iter().zip(&bump).map(|(a, b)| a + b).collect();
                let fv = CellField::new(g, v, 0.0).unwrap();
                let dt = cfl_dt(&fu, 0.9, 1.0).min(cfl_dt(&fv, 0.9, 1.0));
                let cfg = SchemeConfig { cfl: 0.9, ..Default::default() };
                let nu = step(&fu, dt, &cfg).unwrap();
                let nv = step(&fv, dt, &cfg).unwrap();
                let before = fu.l1_distance(&fv).unwrap();
                let after = nu.l1_distance(&nv).unwrap();
                prop_assert!(after <= before + 1e-12);
                for (a, b) in nu.values().iter().zip(nv.values()) {
                    prop_assert!(a <= &(b + 1e-12));
                }
                prop_assert!((nu.mass() - fu.mass()).abs() <= 1e-12 * (1.0 + fu.mass().abs()));
            }

            #[test]
            fn outflow_mass_balance(u in proptest::collection::vec(-2.0f64..2.0, 48)) {
                let g = grid(8, 6, Boundary::Outflow);
                let f = CellField::new(g, u, 0.0).unwrap();
                let dt = cfl_dt(&f, 0.9, 1.0);
                let n = step(&f, dt, &SchemeConfig { cfl: 0.9, ..Default::default() }).unwrap();
                let flux = boundary_mass_flux(&f, dt);
                prop_assert!((n.mass() - f.mass() - flux).abs() <= 1e-13);
            }

            #[test]
            fn cell_entropy_inequality(
                u in proptest::collection::vec(-2.0f64..2.0, 48),
                k in prop_oneof![Just(-1.0), Just(-0.5), Just(0.0), Just(0.5), Just(1.0), -2.0f64..2.0],
            ) {
                let g = grid(8, 6, Boundary::Outflow);
                let f = CellField::new(g, u, 0.0).unwrap();
                let dt = cfl_dt(&f, 0.9, 1.0);
                let n = step(&f, dt, &SchemeConfig { cfl: 0.9, ..Default::default() }).unwrap();
                let r = entropy_residual(&f, &n, dt, k).unwrap();
                prop_assert!(r.max_positive() <= 1e-12 * entropy_scale(&f));
            }
        }
    }
}
