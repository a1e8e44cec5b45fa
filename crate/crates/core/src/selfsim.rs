//! Self-similar solutions `u(t, x) = t^{-1/2} W(x1 t^{-1/2}, x2)`: profile
//! extraction, the profile equation `∂1((W² − y1 W)/2) + ∂2(W³/3) = 0`,
//! characteristics with their first integrals, the implicit family
//! `W² + c(y1 − W)W = y2` and its shock loci.

use crate::data::Profile1D;
use crate::grid::{resample_conservative, CellField, Grid2D};
use crate::{Error, Result};

/// Profile `W` sampled as cell averages on a `(y1, y2)` grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SelfSimilarProfile {
    pub grid: Grid2D,
    pub values: Vec<f64>,
    pub source_time: f64,
}

impl SelfSimilarProfile {
    pub fn new(grid: Grid2D, values: Vec<f64>, source_time: f64) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::invalid("profile length does not match its grid"));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("profile values must be finite"));
        }
        if !(source_time > 0.0) {
            return Err(Error::invalid("profile extraction time must be positive"));
        }
        Ok(SelfSimilarProfile {
            grid,
            values,
            source_time,
        })
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[self.grid.index(i, j)]
    }

    pub fn mass(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.grid.cell_area()
    }

    pub fn l1_distance(&self, other: &SelfSimilarProfile) -> Result<f64> {
        if self.grid != other.grid {
            return Err(Error::invalid("profiles live on different grids"));
        }
        Ok(self.values.iter().zip(&other.values).map(|(a, b)| (a - b).abs()).sum::<f64>() * self.grid.cell_area())
    }
}

/// `W(y1, y2) = √t u(t, y1 √t, y2)` on the grid with `y1` edges `x1/√t`.
pub fn extract_profile(field: &CellField) -> Result<SelfSimilarProfile> {
    let t = field.time();
    if !(t > 0.0) {
        return Err(Error::invalid(format!("profile extraction needs t > 0, got {t}")));
    }
    let s = t.sqrt();
    let g = field.grid();
    let grid = Grid2D::from_spacing(g.x1_min / s, g.x2_min, g.h1 / s, g.h2, g.n1, g.n2, g.boundary)?;
    let values = field.values().iter().map(|v| v * s).collect();
    SelfSimilarProfile::new(grid, values, t)
}

/// As [`extract_profile`], conservatively resampled onto `target`.
pub fn extract_profile_on(field: &CellField, target: &Grid2D) -> Result<SelfSimilarProfile> {
    let natural = extract_profile(field)?;
    let values = resample_conservative(&natural.grid, &natural.values, target);
    SelfSimilarProfile::new(*target, values, natural.source_time)
}

/// Smooth compactly supported test function
/// `ψ((y1 − c1)/r1) ψ((y2 − c2)/r2)` with `ψ(s) = cos²(πs/2)` on `|s| < 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TestBump {
    pub center: (f64, f64),
    pub radius: (f64, f64),
}

impl TestBump {
    fn psi(s: f64) -> (f64, f64) {
        if s.abs() >= 1.0 {
            return (0.0, 0.0);
        }
        let a = 0.5 * std::f64::consts::PI * s;
        (a.cos().powi(2), -0.5 * std::f64::consts::PI * (2.0 * a).sin())
    }

    /// `(φ, ∂1φ, ∂2φ)`.
    pub fn eval(&self, y1: f64, y2: f64) -> (f64, f64, f64) {
        let (a, da) = Self::psi((y1 - self.center.0) / self.radius.0);
        let (b, db) = Self::psi((y2 - self.center.1) / self.radius.1);
        (a * b, da * b / self.radius.0, a * db / self.radius.1)
    }
}

/// Default dictionary: a 4×4 lattice of bumps inside the profile box, each
/// reaching a quarter of the box in each direction.
pub fn default_dictionary(grid: &Grid2D) -> Vec<TestBump> {
    let (w1, w2) = (grid.x1_max() - grid.x1_min, grid.x2_max() - grid.x2_min);
    let r = (w1 / 4.0, w2 / 4.0);
    let mut out = Vec::with_capacity(16);
    for b in 0..4 {
        for a in 0..4 {
            let c1 = grid.x1_min + r.0 + (a as f64) * (w1 - 2.0 * r.0) / 3.0;
            let c2 = grid.x2_min + r.1 + (b as f64) * (w2 - 2.0 * r.1) / 3.0;
            out.push(TestBump {
                center: (c1, c2),
                radius: r,
            });
        }
    }
    out
}

/// Largest weak-form residual `|∫ (W² − y1 W)/2 ∂1φ + W³/3 ∂2φ dy|` over the
/// default test dictionary.
pub fn profile_residual(w: &SelfSimilarProfile) -> f64 {
    profile_residual_with(w, &default_dictionary(&w.grid))
}

pub fn profile_residual_with(w: &SelfSimilarProfile, dict: &[TestBump]) -> f64 {
    let g = &w.grid;
    dict.iter()
        .map(|phi| {
            let mut s = 0.0;
            for j in 0..g.n2 {
                let y2 = g.x2_center(j);
                for i in 0..g.n1 {
                    let y1 = g.x1_center(i);
                    let (_, d1, d2) = phi.eval(y1, y2);
                    if d1 == 0.0 && d2 == 0.0 {
                        continue;
                    }
                    let v = w.get(i, j);
                    s += 0.5 * (v * v - y1 * v) * d1 + v * v * v / 3.0 * d2;
                }
            }
            (s * g.cell_area()).abs()
        })
        .fold(0.0, f64::max)
}

/// `g(y2) = ∫ W(s, y2) ds`, row by row.
pub fn g_of_profile(w: &SelfSimilarProfile) -> Profile1D {
    let g = &w.grid;
    let values = (0..g.n2)
        .map(|j| (0..g.n1).map(|i| w.get(i, j)).sum::<f64>() * g.h1)
        .collect();
    Profile1D::PiecewiseConstant {
        origin: g.x2_min,
        h: g.h2,
        values,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContrgVerdict {
    pub p: f64,
    /// `‖g‖_p`.
    pub norm: f64,
    /// `(2c²)^{1/p′} ‖g‖₁^{(1+1/p)/2}`.
    pub bound: f64,
    pub satisfied: bool,
    /// `bound − norm`.
    pub margin: f64,
}

/// Evaluates `‖g‖_p ≤ (2 c∞²)^{1−1/p} ‖g‖₁^{(1+1/p)/2}` for each `p`.
pub fn contrg_check(g: &Profile1D, c_infty: f64, p_list: &[f64]) -> Result<Vec<ContrgVerdict>> {
    if !(c_infty > 0.0) {
        return Err(Error::invalid("contrg check needs c∞ > 0"));
    }
    let l1 = g.lp_norm(1.0)?;
    if !l1.is_finite() {
        return Err(Error::invalid("profile g is not integrable"));
    }
    p_list
        .iter()
        .map(|&p| {
            if !(p >= 1.0) {
                return Err(Error::invalid(format!("contrg exponent must be ≥ 1, got {p}")));
            }
            let inv = if p.is_infinite() { 0.0 } else { 1.0 / p };
            let norm = g.lp_norm(p)?;
            let bound = (2.0 * c_infty * c_infty).powf(1.0 - inv) * l1.powf(0.5 * (1.0 + inv));
            Ok(ContrgVerdict {
                p,
                norm,
                bound,
                satisfied: norm <= bound,
                margin: bound - norm,
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SupportClass {
    /// Support bounded above: `δ ⊗ g` admits no self-similar solution.
    ObstructedBoundedAbove,
    /// Support unbounded above; this test raises no obstruction.
    NotObstructed,
    /// `g` is not nonnegative, vanishes, or has support unbounded below.
    HypothesesUnmet,
}

pub fn unbounded_support_check(g: &Profile1D) -> SupportClass {
    if !g.is_nonnegative() {
        return SupportClass::HypothesesUnmet;
    }
    match g.support() {
        None => SupportClass::HypothesesUnmet,
        Some((lo, _)) if lo == f64::NEG_INFINITY => SupportClass::HypothesesUnmet,
        Some((_, hi)) if hi.is_finite() => SupportClass::ObstructedBoundedAbove,
        Some(_) => SupportClass::NotObstructed,
    }
}

/// Point `(y1, y2, W)` on a characteristic of the profile equation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CharacteristicState {
    pub y1: f64,
    pub y2: f64,
    pub w: f64,
}

impl CharacteristicState {
    pub fn new(y1: f64, y2: f64, w: f64) -> Self {
        CharacteristicState { y1, y2, w }
    }

    /// `y1 W − y2`.
    pub fn i1(&self) -> f64 {
        self.y1 * self.w - self.y2
    }

    /// `(y1 − W) W`.
    pub fn i2(&self) -> f64 {
        (self.y1 - self.w) * self.w
    }

    fn to_array(self) -> [f64; 3] {
        [self.y1, self.y2, self.w]
    }

    fn from_array(a: [f64; 3]) -> Self {
        CharacteristicState::new(a[0], a[1], a[2])
    }
}

/// Rate in the `W` equation of the characteristic system.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum WRate {
    /// `Ẇ = W/2`; conserves both first integrals.
    #[default]
    Half,
    /// `Ẇ = W`.
    Full,
}

/// `(W − y1/2, W², W/2)`.
pub fn characteristic_rhs(s: CharacteristicState) -> [f64; 3] {
    characteristic_rhs_with(s, WRate::Half)
}

pub fn characteristic_rhs_with(s: CharacteristicState, rate: WRate) -> [f64; 3] {
    let wdot = match rate {
        WRate::Half => 0.5 * s.w,
        WRate::Full => s.w,
    };
    [s.w - 0.5 * s.y1, s.w * s.w, wdot]
}

#[derive(Debug, Clone, PartialEq)]
pub struct CharacteristicPath {
    /// `(s, state)` pairs at accepted steps, starting at `s = 0`.
    pub points: Vec<(f64, CharacteristicState)>,
    /// Step size underflowed before the span was covered.
    pub failed: bool,
}

impl CharacteristicPath {
    /// Largest `|I(s) − I(0)| / (1 + |I(0)|)` over both integrals.
    pub fn invariant_drift(&self) -> f64 {
        let s0 = self.points[0].1;
        let (a, b) = (s0.i1(), s0.i2());
        self.points
            .iter()
            .map(|(_, s)| ((s.i1() - a).abs() / (1.0 + a.abs())).max((s.i2() - b).abs() / (1.0 + b.abs())))
            .fold(0.0, f64::max)
    }
}

// Dormand–Prince 5(4) tableau.
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const B5: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

/// Adaptive Dormand–Prince integration of the characteristic system over
/// `s ∈ [0, span]` (negative spans integrate backwards).
pub fn integrate_characteristic(
    state0: CharacteristicState,
    span: f64,
    tol: f64,
    rate: WRate,
) -> Result<CharacteristicPath> {
    if !(tol > 0.0) {
        return Err(Error::invalid(format!("tolerance must be positive, got {tol}")));
    }
    if !span.is_finite() || !state0.to_array().iter().all(|v| v.is_finite()) {
        return Err(Error::invalid("characteristic start and span must be finite"));
    }
    let mut points = vec![(0.0, state0)];
    if span == 0.0 {
        return Ok(CharacteristicPath { points, failed: false });
    }
    let dir = span.signum();
    let total = span.abs();
    let rhs = |y: [f64; 3]| characteristic_rhs_with(CharacteristicState::from_array(y), rate);
    let mut s = 0.0;
    let mut y = state0.to_array();
    let mut h = (total / 100.0).min(0.1);
    let min_h = 1e-14 * total.max(1.0);
    let mut k = [[0.0; 3]; 7];
    k[0] = rhs(y);
    while s < total {
        if h < min_h {
            return Ok(CharacteristicPath { points, failed: true });
        }
        let h_try = h.min(total - s);
        for st in 1..7 {
            let mut yi = y;
            for (j, kj) in k.iter().enumerate().take(st) {
                for d in 0..3 {
                    yi[d] += dir * h_try * A[st][j] * kj[d];
                }
            }
            k[st] = rhs(yi);
        }
        let mut y5 = y;
        let mut err = 0.0_f64;
        for d in 0..3 {
            let (mut s5, mut s4) = (0.0, 0.0);
            for st in 0..7 {
                s5 += B5[st] * k[st][d];
                s4 += B4[st] * k[st][d];
            }
            y5[d] += dir * h_try * s5;
            let sc = tol * (1.0 + y[d].abs().max(y5[d].abs()));
            err = err.max((h_try * (s5 - s4)).abs() / sc);
        }
        if !err.is_finite() {
            h *= 0.25;
            continue;
        }
        if err <= 1.0 {
            s += h_try;
            y = y5;
            k[0] = k[6];
            points.push((dir * s, CharacteristicState::from_array(y)));
        }
        let factor = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
        h = h_try * factor;
    }
    Ok(CharacteristicPath { points, failed: false })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VSSParams {
    pub c: f64,
}

impl VSSParams {
    pub fn new(c: f64) -> Result<Self> {
        if !c.is_finite() {
            return Err(Error::invalid("VSS constant must be finite"));
        }
        Ok(VSSParams { c })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum VssValue {
    /// Root on the branch through `u = 0` at `x2 = 0`; `other` is the
    /// remaining root when the equation is genuinely quadratic.
    Root { u: f64, other: Option<f64> },
    /// No real root.
    Outside,
}

impl VssValue {
    pub fn root(&self) -> Option<f64> {
        match *self {
            VssValue::Root { u, .. } => Some(u),
            VssValue::Outside => None,
        }
    }
}

/// Solves `(1 − c) t u² + c x1 u − x2 = 0`.
pub fn vss_eval(params: VSSParams, t: f64, x1: f64, x2: f64) -> Result<VssValue> {
    if !(t > 0.0) {
        return Err(Error::invalid(format!("vss_eval needs t > 0, got {t}")));
    }
    if !(x1.is_finite() && x2.is_finite()) {
        return Err(Error::invalid("vss_eval needs a finite point"));
    }
    let a = (1.0 - params.c) * t;
    let b = params.c * x1;
    if a == 0.0 {
        return Ok(if b != 0.0 {
            VssValue::Root { u: x2 / b, other: None }
        } else if x2 == 0.0 {
            VssValue::Root { u: 0.0, other: None }
        } else {
            VssValue::Outside
        });
    }
    let disc = b * b + 4.0 * a * x2;
    if disc < 0.0 {
        return Ok(VssValue::Outside);
    }
    let q = b + if b >= 0.0 { disc.sqrt() } else { -disc.sqrt() };
    if q == 0.0 {
        return Ok(VssValue::Root { u: 0.0, other: Some(0.0) });
    }
    Ok(VssValue::Root {
        u: 2.0 * x2 / q,
        other: Some(-q / (2.0 * a)),
    })
}

/// Profile `W(y1, y2)` of the implicit family, `W² + c(y1 − W)W = y2`.
pub fn vss_profile(params: VSSParams, y1: f64, y2: f64) -> Result<VssValue> {
    vss_eval(params, 1.0, y1, y2)
}

/// `|t u² + c(x1 − t u)u − x2|`.
pub fn vss_implicit_residual(params: VSSParams, t: f64, x1: f64, x2: f64, u: f64) -> f64 {
    (t * u * u + params.c * (x1 - t * u) * u - x2).abs()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReducedProfile {
    pub z: f64,
    pub v: f64,
}

impl ReducedProfile {
    /// `(V² − z)/(V(1 − V))`; `None` on the singular set `V ∈ {0, 1}`.
    pub fn k(&self) -> Option<f64> {
        let den = self.v * (1.0 - self.v);
        if den.abs() < 1e-12 {
            None
        } else {
            Some((self.v * self.v - self.z) / den)
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReducedOdeReport {
    /// Max of `|(V² + z(1 − 2V))V′ − V(1 − V)|` at interior samples, with
    /// `V′` from three-point differences.
    pub residual: f64,
    /// Max deviation of `K` from its first valid value; `None` when no
    /// sample is valid.
    pub k_deviation: Option<f64>,
    /// Indices on the singular set, excluded from both measures.
    pub flagged: Vec<usize>,
}

pub fn reduced_ode_check(path: &[ReducedProfile]) -> Result<ReducedOdeReport> {
    if path.len() < 3 {
        return Err(Error::invalid("reduced ODE check needs at least three samples"));
    }
    for w in path.windows(2) {
        if !(w[1].z > w[0].z) {
            return Err(Error::invalid("reduced ODE samples must have increasing z"));
        }
    }
    let flagged: Vec<usize> = (0..path.len()).filter(|&i| path[i].k().is_none()).collect();
    let mut residual = 0.0_f64;
    for i in 1..path.len() - 1 {
        if flagged.contains(&i) {
            continue;
        }
        let (p, c, n) = (path[i - 1], path[i], path[i + 1]);
        let (h0, h1) = (c.z - p.z, n.z - c.z);
        let dv = -h1 / (h0 * (h0 + h1)) * p.v + (h1 - h0) / (h0 * h1) * c.v + h0 / (h1 * (h0 + h1)) * n.v;
        let r = (c.v * c.v + c.z * (1.0 - 2.0 * c.v)) * dv - c.v * (1.0 - c.v);
        residual = residual.max(r.abs());
    }
    let ks: Vec<f64> = path.iter().filter_map(|p| p.k()).collect();
    let k_deviation = ks.first().map(|&k0| ks.iter().map(|k| (k - k0).abs()).fold(0.0, f64::max));
    Ok(ReducedOdeReport {
        residual,
        k_deviation,
        flagged,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocusPoint {
    pub w: f64,
    pub y1: f64,
    pub y2: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ShockLocus {
    /// One curve per root of the `y1` quadratic (a single curve when `c = 0`).
    pub branches: Vec<Vec<LocusPoint>>,
    /// Parameter values with no real `y1`.
    pub gaps: Vec<f64>,
}

/// `W²(c(W − y1)² + W(4 y1/3 − W))`.
pub fn vsss_lhs(c: f64, w: f64, y1: f64) -> f64 {
    w * w * (c * (w - y1).powi(2) + w * (4.0 * y1 / 3.0 - w))
}

/// `W² + c(y1 − W)W`.
pub fn vsw_y2(c: f64, w: f64, y1: f64) -> f64 {
    w * w + c * (y1 - w) * w
}

/// Parametric shock locus: for each `W`, the `y1` solving
/// `W²(c(W − y1)² + W(4y1/3 − W)) = cst`, then `y2` from the profile relation.
pub fn shock_locus(params: VSSParams, w_values: &[f64], cst: f64) -> Result<ShockLocus> {
    if w_values.iter().any(|&w| w == 0.0 || !w.is_finite()) {
        return Err(Error::invalid("shock locus parameter must avoid W = 0"));
    }
    if !cst.is_finite() {
        return Err(Error::invalid("locus constant must be finite"));
    }
    let c = params.c;
    let nb = if c == 0.0 { 1 } else { 2 };
    let mut branches = vec![Vec::new(); nb];
    let mut gaps = Vec::new();
    for &w in w_values {
        // c y1² + (4W/3 − 2cW) y1 + (c − 1)W² − cst/W² = 0
        let qa = c;
        let qb = w * (4.0 / 3.0 - 2.0 * c);
        let qc = (c - 1.0) * w * w - cst / (w * w);
        let roots: Vec<f64> = if qa == 0.0 {
            vec![-qc / qb]
        } else {
            let disc = qb * qb - 4.0 * qa * qc;
            if disc < 0.0 {
                gaps.push(w);
                continue;
            }
            let q = -0.5 * (qb + if qb >= 0.0 { disc.sqrt() } else { -disc.sqrt() });
            let (r1, r2) = if q == 0.0 { (0.0, 0.0) } else { (q / qa, qc / q) };
            vec![r1.min(r2), r1.max(r2)]
        };
        for (b, y1) in roots.into_iter().enumerate() {
            let y1 = polish_y1(c, w, y1, cst);
            branches[b].push(LocusPoint {
                w,
                y1,
                y2: vsw_y2(c, w, y1),
            });
        }
    }
    Ok(ShockLocus { branches, gaps })
}

// One Newton correction on the locus relation.
fn polish_y1(c: f64, w: f64, y1: f64, cst: f64) -> f64 {
    let f = vsss_lhs(c, w, y1) - cst;
    let df = w * w * (-2.0 * c * (w - y1) + 4.0 * w / 3.0);
    if df != 0.0 {
        let y = y1 - f / df;
        if (vsss_lhs(c, w, y) - cst).abs() <= f.abs() {
            return y;
        }
    }
    y1
}

/// Locus for `c = 4/3`, where the locus relation reduces to `W(W − 2y1) = k`;
/// returns the points of the branch carrying that value of `k`.
pub fn shock_locus_c43(w_values: &[f64], k: f64) -> Result<Vec<LocusPoint>> {
    let params = VSSParams::new(4.0 / 3.0)?;
    let loc = shock_locus(params, w_values, k * k / 3.0)?;
    let mut out: Vec<LocusPoint> = loc
        .branches
        .into_iter()
        .flatten()
        .filter(|p| (p.w * (p.w - 2.0 * p.y1) - k).abs() <= 1e-8 * (1.0 + k.abs()))
        .collect();
    out.sort_by(|a, b| a.w.total_cmp(&b.w));
    out.dedup_by(|a, b| a.w == b.w && a.y1 == b.y1);
    Ok(out)
}
