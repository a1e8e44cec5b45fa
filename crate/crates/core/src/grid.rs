//! Uniform rectangular meshes, cell-average fields and the norm primitives
//! shared by the scheme and the diagnostics.

use crate::data::InitialDatum;
use crate::quadrature::GaussRule;
use crate::{Error, Result};

/// Ghost-cell policy at the edge of the computational box.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Boundary {
    /// Zeroth-order extrapolation: ghost cells copy the adjacent interior cell.
    Outflow,
    Periodic,
}

/// Axis-aligned rectangle `[x1_min, x1_max] × [x2_min, x2_max]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rect {
    pub x1_min: f64,
    pub x1_max: f64,
    pub x2_min: f64,
    pub x2_max: f64,
}

impl Rect {
    pub fn new(x1: (f64, f64), x2: (f64, f64)) -> Self {
        Rect {
            x1_min: x1.0,
            x1_max: x1.1,
            x2_min: x2.0,
            x2_max: x2.1,
        }
    }

    pub fn contains(&self, other: &Rect) -> bool {
        other.x1_min >= self.x1_min
            && other.x1_max <= self.x1_max
            && other.x2_min >= self.x2_min
            && other.x2_max <= self.x2_max
    }
}

/// Uniform mesh of `n1 × n2` cells. Cell `(i, j)` covers
/// `[x1_min + i h1, x1_min + (i+1) h1] × [x2_min + j h2, x2_min + (j+1) h2]`
/// and is stored at linear index `j * n1 + i` (x1 varies fastest).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid2D {
    pub x1_min: f64,
    pub x2_min: f64,
    pub h1: f64,
    pub h2: f64,
    pub n1: usize,
    pub n2: usize,
    pub boundary: Boundary,
}

impl Grid2D {
    /// Builds the grid covering `bounds` with `n1 × n2` cells.
    pub fn new(bounds: Rect, n1: usize, n2: usize, boundary: Boundary) -> Result<Self> {
        let w = bounds.x1_max - bounds.x1_min;
        let h = bounds.x2_max - bounds.x2_min;
        if !(w.is_finite() && h.is_finite() && bounds.x1_min.is_finite() && bounds.x2_min.is_finite())
        {
            return Err(Error::invalid("grid bounds must be finite"));
        }
        if w <= 0.0 || h <= 0.0 {
            return Err(Error::invalid(format!(
                "grid extent must be positive, got {w} x {h}"
            )));
        }
        if n1 == 0 || n2 == 0 {
            return Err(Error::invalid("grid cell counts must be at least 1"));
        }
        Ok(Grid2D {
            x1_min: bounds.x1_min,
            x2_min: bounds.x2_min,
            h1: w / n1 as f64,
            h2: h / n2 as f64,
            n1,
            n2,
            boundary,
        })
    }

    /// Grid from its raw header fields, as stored in snapshot files.
    pub fn from_spacing(
        x1_min: f64,
        x2_min: f64,
        h1: f64,
        h2: f64,
        n1: usize,
        n2: usize,
        boundary: Boundary,
    ) -> Result<Self> {
        if !(h1 > 0.0 && h2 > 0.0 && h1.is_finite() && h2.is_finite()) {
            return Err(Error::invalid("cell widths must be positive and finite"));
        }
        if !(x1_min.is_finite() && x2_min.is_finite()) {
            return Err(Error::invalid("grid origin must be finite"));
        }
        if n1 == 0 || n2 == 0 {
            return Err(Error::invalid("grid cell counts must be at least 1"));
        }
        Ok(Grid2D {
            x1_min,
            x2_min,
            h1,
            h2,
            n1,
            n2,
            boundary,
        })
    }

    pub fn with_boundary(mut self, boundary: Boundary) -> Self {
        self.boundary = boundary;
        self
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.n1 * self.n2
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize) -> usize {
        j * self.n1 + i
    }

    #[inline]
    pub fn cell_area(&self) -> f64 {
        self.h1 * self.h2
    }

    pub fn x1_max(&self) -> f64 {
        self.x1_min + self.n1 as f64 * self.h1
    }

    pub fn x2_max(&self) -> f64 {
        self.x2_min + self.n2 as f64 * self.h2
    }

    pub fn bounds(&self) -> Rect {
        Rect::new((self.x1_min, self.x1_max()), (self.x2_min, self.x2_max()))
    }

    #[inline]
    pub fn x1_edge(&self, i: usize) -> f64 {
        self.x1_min + i as f64 * self.h1
    }

    #[inline]
    pub fn x2_edge(&self, j: usize) -> f64 {
        self.x2_min + j as f64 * self.h2
    }

    #[inline]
    pub fn x1_center(&self, i: usize) -> f64 {
        self.x1_min + (i as f64 + 0.5) * self.h1
    }

    #[inline]
    pub fn x2_center(&self, j: usize) -> f64 {
        self.x2_min + (j as f64 + 0.5) * self.h2
    }

    /// Same box and boundary with each cell split into `factor × factor`.
    pub fn refined(&self, factor: usize) -> Self {
        Grid2D {
            h1: self.h1 / factor as f64,
            h2: self.h2 / factor as f64,
            n1: self.n1 * factor,
            n2: self.n2 * factor,
            ..*self
        }
    }
}

/// Cell averages of the conserved quantity at a given time.
#[derive(Debug, Clone, PartialEq)]
pub struct CellField {
    grid: Grid2D,
    values: Vec<f64>,
    time: f64,
}

impl CellField {
    pub fn new(grid: Grid2D, values: Vec<f64>, time: f64) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::invalid(format!(
                "field has {} values, grid has {} cells",
                values.len(),
                grid.len()
            )));
        }
        if let Some(k) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::invalid(format!("non-finite value at cell {k}")));
        }
        if !(time >= 0.0 && time.is_finite()) {
            return Err(Error::invalid(format!("field time must be nonnegative, got {time}")));
        }
        Ok(CellField { grid, values, time })
    }

    pub fn zeros(grid: Grid2D) -> Self {
        CellField {
            grid,
            values: vec![0.0; grid.len()],
            time: 0.0,
        }
    }

    /// Field sampled at cell centers; the caller guarantees finiteness.
    pub fn from_fn(grid: Grid2D, time: f64, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        let mut values = Vec::with_capacity(grid.len());
        for j in 0..grid.n2 {
            let x2 = grid.x2_center(j);
            for i in 0..grid.n1 {
                values.push(f(grid.x1_center(i), x2));
            }
        }
        CellField::new(grid, values, time)
    }

    // Internal constructor for values produced by the scheme itself.
    pub(crate) fn from_parts(grid: Grid2D, values: Vec<f64>, time: f64) -> Self {
        debug_assert_eq!(values.len(), grid.len());
        CellField { grid, values, time }
    }

    #[inline]
    pub fn grid(&self) -> &Grid2D {
        &self.grid
    }

    #[inline]
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    #[inline]
    pub fn time(&self) -> f64 {
        self.time
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[self.grid.index(i, j)]
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn with_time(mut self, time: f64) -> Self {
        self.time = time;
        self
    }

    /// `Σ u h1 h2`.
    pub fn mass(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.grid.cell_area()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    pub fn min_value(&self) -> f64 {
        self.values.iter().fold(f64::INFINITY, |m, &v| m.min(v))
    }

    pub fn scaled(&self, factor: f64) -> CellField {
        CellField {
            grid: self.grid,
            values: self.values.iter().map(|v| v * factor).collect(),
            time: self.time,
        }
    }

    /// `‖self − other‖₁` on a shared grid.
    pub fn l1_distance(&self, other: &CellField) -> Result<f64> {
        self.check_same_grid(other)?;
        let s: f64 = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .sum();
        Ok(s * self.grid.cell_area())
    }

    pub(crate) fn check_same_grid(&self, other: &CellField) -> Result<()> {
        if self.grid != other.grid {
            return Err(Error::invalid("fields live on different grids"));
        }
        Ok(())
    }
}

/// Discrete `L^p` norm `(Σ |u|^p h1 h2)^{1/p}`; `p = ∞` gives the max of
/// the cell averages.
pub fn lp_norm(field: &CellField, p: f64) -> Result<f64> {
    if p.is_nan() || p < 1.0 {
        return Err(Error::invalid(format!("L^p exponent must be >= 1, got {p}")));
    }
    if p.is_infinite() {
        return Ok(field.max_abs());
    }
    let area = field.grid.cell_area();
    if p == 1.0 {
        return Ok(field.values.iter().map(|v| v.abs()).sum::<f64>() * area);
    }
    if p == 2.0 {
        return Ok((field.values.iter().map(|v| v * v).sum::<f64>() * area).sqrt());
    }
    // scale by the max to avoid overflow in |u|^p
    let m = field.max_abs();
    if m == 0.0 {
        return Ok(0.0);
    }
    let s: f64 = field.values.iter().map(|v| (v.abs() / m).powf(p)).sum();
    Ok(m * (s * area).powf(1.0 / p))
}

/// Calibrated universal constants of the dispersive and moment estimates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Constants {
    c_infty: f64,
    c_nq: f64,
}

impl Constants {
    pub fn new(c_infty: f64, c_nq: f64) -> Result<Self> {
        if !(c_infty > 0.0 && c_infty.is_finite() && c_nq > 0.0 && c_nq.is_finite()) {
            return Err(Error::invalid(format!(
                "constants must be positive and finite, got c_infty = {c_infty}, c_nq = {c_nq}"
            )));
        }
        Ok(Constants { c_infty, c_nq })
    }

    pub fn c_infty(&self) -> f64 {
        self.c_infty
    }

    pub fn c_nq(&self) -> f64 {
        self.c_nq
    }
}

/// Result of [`discretize`]: the field plus a flag raised when the datum's
/// declared support is not contained in the grid box.
#[derive(Debug, Clone)]
pub struct Discretization {
    pub field: CellField,
    pub support_outside_domain: bool,
}

/// Cell averages of `datum` by tensor Gauss–Legendre quadrature of the
/// given order per direction. Cells are split at the datum's declared
/// breakpoints so kinks never fall inside a quadrature panel.
pub fn discretize(datum: &InitialDatum, grid: &Grid2D, order: usize) -> Result<Discretization> {
    let rule = GaussRule::new(order)?;
    let bp1 = datum.breakpoints_x1();
    let bp2 = datum.breakpoints_x2();

    let panels1: Vec<Vec<(f64, f64)>> = (0..grid.n1)
        .map(|i| rule.panel_points(grid.x1_edge(i), grid.x1_edge(i + 1), &bp1))
        .collect();
    let panels2: Vec<Vec<(f64, f64)>> = (0..grid.n2)
        .map(|j| rule.panel_points(grid.x2_edge(j), grid.x2_edge(j + 1), &bp2))
        .collect();

    let area = grid.cell_area();
    let mut values = Vec::with_capacity(grid.len());
    for pts2 in &panels2 {
        for pts1 in &panels1 {
            let mut acc = 0.0;
            for &(x2, w2) in pts2 {
                for &(x1, w1) in pts1 {
                    acc += w1 * w2 * datum.value(x1, x2);
                }
            }
            values.push(acc / area);
        }
    }
    let field = CellField::new(*grid, values, 0.0)?;
    let support_outside_domain = !grid.bounds().contains(&datum.support_box());
    Ok(Discretization {
        field,
        support_outside_domain,
    })
}

/// Overlap-weighted (mass-conserving) transfer of cell averages from one
/// tensor grid onto another.
pub fn resample_conservative(src_grid: &Grid2D, values: &[f64], dst: &Grid2D) -> Vec<f64> {
    let w1 = overlap_matrix(src_grid.x1_min, src_grid.h1, src_grid.n1, dst.x1_min, dst.h1, dst.n1);
    let w2 = overlap_matrix(src_grid.x2_min, src_grid.h2, src_grid.n2, dst.x2_min, dst.h2, dst.n2);
    let mut out = vec![0.0; dst.len()];
    // separable transfer: rows first, then columns
    let mut tmp = vec![0.0; dst.n1 * src_grid.n2];
    for js in 0..src_grid.n2 {
        let row = &values[js * src_grid.n1..(js + 1) * src_grid.n1];
        for &(is, id, frac) in &w1 {
            tmp[js * dst.n1 + id] += row[is] * frac;
        }
    }
    for &(js, jd, frac) in &w2 {
        for id in 0..dst.n1 {
            out[jd * dst.n1 + id] += tmp[js * dst.n1 + id] * frac;
        }
    }
    out
}

// (src index, dst index, |src ∩ dst| / |dst|)
fn overlap_matrix(
    s0: f64,
    sh: f64,
    sn: usize,
    d0: f64,
    dh: f64,
    dn: usize,
) -> Vec<(usize, usize, f64)> {
    let mut out = Vec::new();
    for id in 0..dn {
        let a = d0 + id as f64 * dh;
        let b = a + dh;
        let lo = ((a - s0) / sh).floor().max(0.0) as usize;
        let hi = (((b - s0) / sh).ceil().max(0.0) as usize).min(sn);
        for is in lo..hi {
            let sa = s0 + is as f64 * sh;
            let sb = sa + sh;
            let ov = b.min(sb) - a.max(sa);
            if ov > 0.0 {
                out.push((is, id, ov / dh));
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::InitialDatum;

    fn unit(n1: usize, n2: usize) -> Grid2D {
        Grid2D::new(Rect::new((0.0, 1.0), (0.0, 1.0)), n1, n2, Boundary::Outflow).unwrap()
    }

    #[test]
    fn build_grid_spacing() {
        let g = unit(10, 10);
        assert!((g.h1 - 0.1).abs() < 1e-15 && (g.h2 - 0.1).abs() < 1e-15);
        let g = Grid2D::new(Rect::new((-2.0, 2.0), (0.0, 8.0)), 4, 8, Boundary::Periodic).unwrap();
        assert_eq!((g.h1, g.h2), (1.0, 1.0));
    }

    #[test]
    fn build_grid_rejects_degenerate() {
        assert!(Grid2D::new(Rect::new((0.0, 0.0), (0.0, 1.0)), 4, 4, Boundary::Outflow).is_err());
        assert!(Grid2D::new(Rect::new((0.0, 1.0), (1.0, 0.0)), 4, 4, Boundary::Outflow).is_err());
        assert!(Grid2D::new(Rect::new((0.0, 1.0), (0.0, 1.0)), 0, 4, Boundary::Outflow).is_err());
    }

    #[test]
    fn field_rejects_non_finite() {
        let g = unit(2, 1);
        assert!(CellField::new(g, vec![1.0, f64::NAN], 0.0).is_err());
        assert!(CellField::new(g, vec![1.0], 0.0).is_err());
    }

    #[test]
    fn discretize_aligned_indicator() {
        let g = unit(10, 10);
        let d = InitialDatum::indicator(Rect::new((0.0, 0.5), (0.0, 1.0)), 1.0).unwrap();
        let out = discretize(&d, &g, 3).unwrap();
        for j in 0..10 {
            for i in 0..10 {
                let want = if i < 5 { 1.0 } else { 0.0 };
                assert!((out.field.get(i, j) - want).abs() < 1e-14, "cell ({i},{j})");
            }
        }
        assert!(!out.support_outside_domain);
    }

    #[test]
    fn discretize_constant_flags_unbounded_support() {
        let g = unit(4, 3);
        let out = discretize(&InitialDatum::constant(2.5), &g, 3).unwrap();
        assert!(out.field.values().iter().all(|&v| (v - 2.5).abs() < 1e-14));
        assert!(out.support_outside_domain);
    }

    #[test]
    fn discretize_dirac_mass() {
        // kernel support [-0.1, 0.1]^2 aligned with the cells
        let g = Grid2D::new(Rect::new((-0.5, 0.5), (-0.5, 0.5)), 40, 40, Boundary::Outflow).unwrap();
        let d = InitialDatum::dirac_family(1.0, 10).unwrap();
        let f = discretize(&d, &g, 3).unwrap().field;
        assert!((f.mass() - 1.0).abs() < 1e-10, "mass {}", f.mass());
        // unaligned grid: still accurate thanks to the breakpoint split
        let g = Grid2D::new(Rect::new((-0.513, 0.5), (-0.487, 0.5)), 77, 91, Boundary::Outflow).unwrap();
        let f = discretize(&d, &g, 5).unwrap().field;
        assert!((f.mass() - 1.0).abs() < 1e-7, "mass {}", f.mass());
    }

    #[test]
    fn norms_of_simple_fields() {
        let g = unit(8, 8);
        let one = CellField::new(g, vec![1.0; 64], 0.0).unwrap();
        assert!((lp_norm(&one, 1.0).unwrap() - 1.0).abs() < 1e-14);
        assert!((lp_norm(&one, 2.0).unwrap() - 1.0).abs() < 1e-14);
        assert!((lp_norm(&one, 3.5).unwrap() - 1.0).abs() < 1e-14);
        let two = one.scaled(2.0);
        assert_eq!(lp_norm(&two, f64::INFINITY).unwrap(), 2.0);
        assert!(lp_norm(&one, 0.5).is_err());
        assert!(lp_norm(&one, f64::NAN).is_err());
    }

    #[test]
    fn resample_preserves_mass() {
        let g = Grid2D::new(Rect::new((0.0, 1.0), (0.0, 1.0)), 13, 7, Boundary::Outflow).unwrap();
        let f = CellField::from_fn(g, 0.0, |x, y| (x * 7.0).sin().abs() + y).unwrap();
        let dst = Grid2D::new(Rect::new((-0.2, 1.3), (-0.1, 1.05)), 29, 17, Boundary::Outflow).unwrap();
        let out = resample_conservative(&g, f.values(), &dst);
        let m: f64 = out.iter().sum::<f64>() * dst.cell_area();
        assert!((m - f.mass()).abs() < 1e-13);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn lp_norm_is_absolutely_homogeneous(
                vals in proptest::collection::vec(-5.0f64..5.0, 12),
                lambda in -4.0f64..4.0,
                p in prop_oneof![Just(1.0), Just(2.0), 1.0f64..6.0, Just(f64::INFINITY)],
            ) {
                let g = Grid2D::new(Rect::new((0.0, 1.0), (0.0, 1.0)), 4, 3, Boundary::Outflow).unwrap();
                let f = CellField::new(g, vals, 0.0).unwrap();
                let lhs = lp_norm(&f.scaled(lambda), p).unwrap();
                let rhs = lambda.abs() * lp_norm(&f, p).unwrap();
                prop_assert!((lhs - rhs).abs() <= 1e-12 * (1.0 + rhs));
            }

            #[test]
            fn lp_norm_nondecreasing_in_p_on_unit_square(
                vals in proptest::collection::vec(-5.0f64..5.0, 16),
                p in 1.0f64..8.0,
                dp in 0.0f64..4.0,
            ) {
                let g = Grid2D::new(Rect::new((0.0, 1.0), (0.0, 1.0)), 4, 4, Boundary::Outflow).unwrap();
                let f = CellField::new(g, vals, 0.0).unwrap();
                let a = lp_norm(&f, p).unwrap();
                let b = lp_norm(&f, p + dp).unwrap();
                let c = lp_norm(&f, f64::INFINITY).unwrap();
                prop_assert!(a <= b * (1.0 + 1e-12) + 1e-300);
                prop_assert!(b <= c * (1.0 + 1e-12) + 1e-300);
            }
        }
    }
}
