//! Initial data: exact oracles, mollified measures and the scaling transforms.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use crate::grid::{resample_conservative, CellField, Grid2D, Rect};
use crate::quadrature::GaussRule;
use crate::{Error, Result};

/// Compactly supported, unit-mass mollifier shapes on `[-w, w]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kernel {
    /// `(1 - |s|/w) / w`
    Triangle,
    /// `(1 + cos(π s / w)) / (2w)`
    CosineBump,
}

impl Kernel {
    #[inline]
    pub fn eval(self, s: f64, w: f64) -> f64 {
        let r = s.abs() / w;
        if r >= 1.0 {
            return 0.0;
        }
        match self {
            Kernel::Triangle => (1.0 - r) / w,
            Kernel::CosineBump => (1.0 + (PI * r).cos()) / (2.0 * w),
        }
    }

    pub fn peak(self, w: f64) -> f64 {
        1.0 / w
    }

    pub fn breakpoints(self, center: f64, w: f64) -> Vec<f64> {
        match self {
            Kernel::Triangle => vec![center - w, center, center + w],
            Kernel::CosineBump => vec![center - w, center + w],
        }
    }

    /// `∫ θ_w^p ds`.
    pub fn power_integral(self, w: f64, p: f64) -> f64 {
        match self {
            Kernel::Triangle => 2.0 * w.powf(1.0 - p) / (p + 1.0),
            Kernel::CosineBump => {
                let rule = GaussRule::new(16).expect("static order");
                rule.integrate(|s| self.eval(s, w).powf(p), -w, w, 64, &[])
            }
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Kernel::Triangle => "triangle",
            Kernel::CosineBump => "cosine",
        }
    }
}

/// Directional mollifier: kernel, half-width `ε` and the convolution
/// direction `ξ = (cos angle, sin angle)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MollifierSpec {
    pub kernel: Kernel,
    pub width: f64,
    pub angle: f64,
}

impl MollifierSpec {
    /// Mollifier acting along `e₁`.
    pub fn horizontal(kernel: Kernel, width: f64) -> Result<Self> {
        Self::new(kernel, width, 0.0)
    }

    pub fn new(kernel: Kernel, width: f64, angle: f64) -> Result<Self> {
        if !(width > 0.0 && width.is_finite()) {
            return Err(Error::invalid(format!("mollifier width must be positive, got {width}")));
        }
        if !angle.is_finite() {
            return Err(Error::invalid("mollifier angle must be finite"));
        }
        Ok(MollifierSpec {
            kernel,
            width,
            angle,
        })
    }
}

/// Transverse profile `g(x₂)` of a line measure `δ_{x₁=0} ⊗ g`.
#[derive(Debug, Clone, PartialEq)]
pub enum Profile1D {
    Zero,
    Indicator { lo: f64, hi: f64, height: f64 },
    /// `(1 + x₂ − start)^{-2}` on `[start, ∞)`.
    Tail { start: f64 },
    /// `mass · θ_width(x₂ − center)`.
    Kernel {
        center: f64,
        width: f64,
        kernel: Kernel,
        mass: f64,
    },
    /// Value `values[k]` on `[origin + k h, origin + (k+1) h)`.
    PiecewiseConstant {
        origin: f64,
        h: f64,
        values: Vec<f64>,
    },
}

impl Profile1D {
    pub fn indicator(lo: f64, hi: f64) -> Self {
        Profile1D::Indicator {
            lo,
            hi,
            height: 1.0,
        }
    }

    pub fn value(&self, x: f64) -> f64 {
        match self {
            Profile1D::Zero => 0.0,
            Profile1D::Indicator { lo, hi, height } => {
                if x >= *lo && x < *hi {
                    *height
                } else {
                    0.0
                }
            }
            Profile1D::Tail { start } => {
                if x >= *start {
                    let s = 1.0 + x - start;
                    1.0 / (s * s)
                } else {
                    0.0
                }
            }
            Profile1D::Kernel {
                center,
                width,
                kernel,
                mass,
            } => mass * kernel.eval(x - center, *width),
            Profile1D::PiecewiseConstant { origin, h, values } => {
                let k = ((x - origin) / h).floor();
                if k < 0.0 || k >= values.len() as f64 {
                    0.0
                } else {
                    values[k as usize]
                }
            }
        }
    }

    /// Checks that the representation is a finite integrable function.
    pub fn validate(&self) -> Result<()> {
        let ok = match self {
            Profile1D::Zero => true,
            Profile1D::Indicator { lo, hi, height } => {
                lo.is_finite() && hi.is_finite() && lo <= hi && height.is_finite()
            }
            Profile1D::Tail { start } => start.is_finite(),
            Profile1D::Kernel {
                center,
                width,
                mass,
                ..
            } => center.is_finite() && *width > 0.0 && width.is_finite() && mass.is_finite(),
            Profile1D::PiecewiseConstant { origin, h, values } => {
                origin.is_finite() && *h > 0.0 && h.is_finite() && values.iter().all(|v| v.is_finite())
            }
        };
        if ok {
            Ok(())
        } else {
            Err(Error::invalid(format!("profile is not an integrable function: {self:?}")))
        }
    }

    /// `∫ g`.
    pub fn mass(&self) -> f64 {
        match self {
            Profile1D::Zero => 0.0,
            Profile1D::Indicator { lo, hi, height } => height * (hi - lo),
            Profile1D::Tail { .. } => 1.0,
            Profile1D::Kernel { mass, .. } => *mass,
            Profile1D::PiecewiseConstant { h, values, .. } => values.iter().sum::<f64>() * h,
        }
    }

    /// `‖g‖_p`, `p ∈ [1, ∞]`.
    pub fn lp_norm(&self, p: f64) -> Result<f64> {
        if p.is_nan() || p < 1.0 {
            return Err(Error::invalid(format!("L^p exponent must be >= 1, got {p}")));
        }
        self.validate()?;
        let inf = p.is_infinite();
        Ok(match self {
            Profile1D::Zero => 0.0,
            Profile1D::Indicator { lo, hi, height } => {
                if inf || hi <= lo {
                    if hi > lo {
                        height.abs()
                    } else {
                        0.0
                    }
                } else {
                    height.abs() * (hi - lo).powf(1.0 / p)
                }
            }
            Profile1D::Tail { .. } => {
                if inf {
                    1.0
                } else {
                    (1.0 / (2.0 * p - 1.0)).powf(1.0 / p)
                }
            }
            Profile1D::Kernel {
                width,
                kernel,
                mass,
                ..
            } => {
                if inf {
                    mass.abs() * kernel.peak(*width)
                } else if p == 1.0 {
                    mass.abs()
                } else {
                    mass.abs() * kernel.power_integral(*width, p).powf(1.0 / p)
                }
            }
            Profile1D::PiecewiseConstant { h, values, .. } => {
                let m = values.iter().fold(0.0_f64, |a, v| a.max(v.abs()));
                if inf || m == 0.0 {
                    m
                } else if p == 1.0 {
                    values.iter().map(|v| v.abs()).sum::<f64>() * h
                } else {
                    let s: f64 = values.iter().map(|v| (v.abs() / m).powf(p)).sum();
                    m * (s * h).powf(1.0 / p)
                }
            }
        })
    }

    pub fn is_nonnegative(&self) -> bool {
        match self {
            Profile1D::Zero | Profile1D::Tail { .. } => true,
            Profile1D::Indicator { height, .. } => *height >= 0.0,
            Profile1D::Kernel { mass, .. } => *mass >= 0.0,
            Profile1D::PiecewiseConstant { values, .. } => values.iter().all(|&v| v >= 0.0),
        }
    }

    /// Closed support `[lo, hi]`, possibly unbounded; `None` for `g ≡ 0`.
    pub fn support(&self) -> Option<(f64, f64)> {
        match self {
            Profile1D::Zero => None,
            Profile1D::Indicator { lo, hi, height } => {
                (*height != 0.0 && hi > lo).then_some((*lo, *hi))
            }
            Profile1D::Tail { start } => Some((*start, f64::INFINITY)),
            Profile1D::Kernel {
                center,
                width,
                mass,
                ..
            } => (*mass != 0.0).then_some((center - width, center + width)),
            Profile1D::PiecewiseConstant { origin, h, values } => {
                let first = values.iter().position(|&v| v != 0.0)?;
                let last = values.iter().rposition(|&v| v != 0.0)?;
                Some((origin + first as f64 * h, origin + (last + 1) as f64 * h))
            }
        }
    }

    pub fn breakpoints(&self) -> Vec<f64> {
        match self {
            Profile1D::Zero => vec![],
            Profile1D::Indicator { lo, hi, .. } => vec![*lo, *hi],
            Profile1D::Tail { start } => vec![*start],
            Profile1D::Kernel {
                center,
                width,
                kernel,
                ..
            } => kernel.breakpoints(*center, *width),
            Profile1D::PiecewiseConstant { origin, h, values } => {
                (0..=values.len()).map(|k| origin + k as f64 * h).collect()
            }
        }
    }
}

/// N-wave parameters `p ≤ 0 ≤ q`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NWaveParams {
    p: f64,
    q: f64,
}

impl NWaveParams {
    pub fn new(p: f64, q: f64) -> Result<Self> {
        if !(p <= 0.0 && q >= 0.0 && p.is_finite() && q.is_finite()) {
            return Err(Error::invalid(format!("N-wave needs p <= 0 <= q, got p = {p}, q = {q}")));
        }
        Ok(NWaveParams { p, q })
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    /// `(q² − p²) / 2`, independent of time.
    pub fn mass(&self) -> f64 {
        0.5 * (self.q * self.q - self.p * self.p)
    }

    /// Shock positions `(p√t, q√t)`.
    pub fn edges(&self, t: f64) -> (f64, f64) {
        let s = t.sqrt();
        (self.p * s, self.q * s)
    }
}

/// Exact 1-D Burgers N-wave: `x/t` on `[p√t, q√t]`, zero elsewhere.
pub fn nwave_exact(params: NWaveParams, t: f64, x: f64) -> Result<f64> {
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::invalid(format!("N-wave time must be positive, got {t}")));
    }
    let (lo, hi) = params.edges(t);
    Ok(if x >= lo && x <= hi { x / t } else { 0.0 })
}

/// Exact cell average of the N-wave over `[a, b]`.
pub fn nwave_cell_average(params: NWaveParams, t: f64, a: f64, b: f64) -> Result<f64> {
    if !(t > 0.0) {
        return Err(Error::invalid(format!("N-wave time must be positive, got {t}")));
    }
    let (lo, hi) = params.edges(t);
    let l = a.max(lo);
    let r = b.min(hi);
    if r <= l {
        return Ok(0.0);
    }
    Ok((r * r - l * l) / (2.0 * t * (b - a)))
}

/// One tensor cosine bump `amplitude · b((x₁−c₁)/w₁) b((x₂−c₂)/w₂)` with
/// `b(s) = (1 + cos π s)/2` on `[-1, 1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bump {
    pub center: (f64, f64),
    pub half_width: (f64, f64),
    pub amplitude: f64,
}

impl Bump {
    #[inline]
    pub fn value(&self, x1: f64, x2: f64) -> f64 {
        let r1 = (x1 - self.center.0).abs() / self.half_width.0;
        let r2 = (x2 - self.center.1).abs() / self.half_width.1;
        if r1 >= 1.0 || r2 >= 1.0 {
            return 0.0;
        }
        self.amplitude * 0.25 * (1.0 + (PI * r1).cos()) * (1.0 + (PI * r2).cos())
    }

    pub fn mass(&self) -> f64 {
        self.amplitude * self.half_width.0 * self.half_width.1
    }
}

type PointFn = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;

#[derive(Clone)]
enum DatumKind {
    Function {
        f: PointFn,
        breaks1: Vec<f64>,
        breaks2: Vec<f64>,
        label: String,
    },
    LineMeasure {
        g: Profile1D,
        spec: MollifierSpec,
    },
    Dirac {
        mass: f64,
        m: u32,
    },
    NWaveSlice {
        params: NWaveParams,
        t0: f64,
    },
}

/// Declarative initial datum `a(x₁, x₂)`.
///
/// Every datum carries a horizontal concentration factor `ρ` so that the
/// evaluated density is `ρ · base(ρ x₁, x₂)`; [`scale_datum`] only touches
/// this factor, which makes scalings compose exactly.
#[derive(Clone)]
pub struct InitialDatum {
    kind: DatumKind,
    rho: f64,
    mass: f64,
    support: Rect,
}

impl fmt::Debug for InitialDatum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kind = match &self.kind {
            DatumKind::Function { label, .. } => format!("Function({label})"),
            DatumKind::LineMeasure { g, spec } => format!("LineMeasure({g:?}, {spec:?})"),
            DatumKind::Dirac { mass, m } => format!("Dirac(mass = {mass}, m = {m})"),
            DatumKind::NWaveSlice { params, t0 } => format!("NWaveSlice({params:?}, t0 = {t0})"),
        };
        f.debug_struct("InitialDatum")
            .field("kind", &kind)
            .field("rho", &self.rho)
            .field("mass", &self.mass)
            .field("support", &self.support)
            .finish()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DatumKindTag {
    Function,
    MollifiedLineMeasure,
    MollifiedDirac,
    NWaveSlice,
}

impl InitialDatum {
    /// General bounded function with declared mass and support.
    pub fn function(
        f: impl Fn(f64, f64) -> f64 + Send + Sync + 'static,
        mass: f64,
        support: Rect,
        breaks1: Vec<f64>,
        breaks2: Vec<f64>,
        label: impl Into<String>,
    ) -> Self {
        InitialDatum {
            kind: DatumKind::Function {
                f: Arc::new(f),
                breaks1,
                breaks2,
                label: label.into(),
            },
            rho: 1.0,
            mass,
            support,
        }
    }

    pub fn indicator(rect: Rect, height: f64) -> Result<Self> {
        if !(rect.x1_max > rect.x1_min && rect.x2_max > rect.x2_min) || !height.is_finite() {
            return Err(Error::invalid("indicator needs a nondegenerate rectangle and finite height"));
        }
        let r = rect;
        Ok(Self::function(
            move |x1, x2| {
                if x1 >= r.x1_min && x1 < r.x1_max && x2 >= r.x2_min && x2 < r.x2_max {
                    height
                } else {
                    0.0
                }
            },
            height * (r.x1_max - r.x1_min) * (r.x2_max - r.x2_min),
            rect,
            vec![rect.x1_min, rect.x1_max],
            vec![rect.x2_min, rect.x2_max],
            format!("indicator({height})"),
        ))
    }

    pub fn constant(c: f64) -> Self {
        let inf = f64::INFINITY;
        Self::function(
            move |_, _| c,
            if c == 0.0 { 0.0 } else { c * inf },
            Rect::new((-inf, inf), (-inf, inf)),
            vec![],
            vec![],
            format!("constant({c})"),
        )
    }

    /// Sum of tensor cosine bumps.
    pub fn bump_sum(bumps: Vec<Bump>) -> Result<Self> {
        if bumps.is_empty() {
            return Err(Error::invalid("bump sum needs at least one bump"));
        }
        for b in &bumps {
            if !(b.half_width.0 > 0.0 && b.half_width.1 > 0.0 && b.amplitude.is_finite()) {
                return Err(Error::invalid(format!("invalid bump {b:?}")));
            }
        }
        let mass = bumps.iter().map(Bump::mass).sum();
        let mut support = Rect::new((f64::INFINITY, f64::NEG_INFINITY), (f64::INFINITY, f64::NEG_INFINITY));
        let mut b1 = Vec::new();
        let mut b2 = Vec::new();
        for b in &bumps {
            support.x1_min = support.x1_min.min(b.center.0 - b.half_width.0);
            support.x1_max = support.x1_max.max(b.center.0 + b.half_width.0);
            support.x2_min = support.x2_min.min(b.center.1 - b.half_width.1);
            support.x2_max = support.x2_max.max(b.center.1 + b.half_width.1);
            b1.extend([b.center.0 - b.half_width.0, b.center.0 + b.half_width.0]);
            b2.extend([b.center.1 - b.half_width.1, b.center.1 + b.half_width.1]);
        }
        let n = bumps.len();
        Ok(Self::function(
            move |x1, x2| bumps.iter().map(|b| b.value(x1, x2)).sum(),
            mass,
            support,
            b1,
            b2,
            format!("bumps({n})"),
        ))
    }

    /// Piecewise-constant Riemann datum in `x₁`, constant in `x₂`.
    pub fn riemann(u_left: f64, u_right: f64, x0: f64) -> Self {
        let inf = f64::INFINITY;
        Self::function(
            move |x1, _| if x1 < x0 { u_left } else { u_right },
            f64::NAN,
            Rect::new((-inf, inf), (-inf, inf)),
            vec![x0],
            vec![],
            format!("riemann({u_left}, {u_right})"),
        )
    }

    pub fn kind(&self) -> DatumKindTag {
        match self.kind {
            DatumKind::Function { .. } => DatumKindTag::Function,
            DatumKind::LineMeasure { .. } => DatumKindTag::MollifiedLineMeasure,
            DatumKind::Dirac { .. } => DatumKindTag::MollifiedDirac,
            DatumKind::NWaveSlice { .. } => DatumKindTag::NWaveSlice,
        }
    }

    /// `∫ a` (per unit `x₂`-length for the N-wave slice).
    pub fn mass(&self) -> f64 {
        self.mass
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    /// Horizontal support `[X, X′]`.
    pub fn horizontal_support(&self) -> (f64, f64) {
        (self.support.x1_min, self.support.x1_max)
    }

    pub fn support_box(&self) -> Rect {
        self.support
    }

    #[inline]
    pub fn value(&self, x1: f64, x2: f64) -> f64 {
        let y1 = self.rho * x1;
        let base = match &self.kind {
            DatumKind::Function { f, .. } => f(y1, x2),
            DatumKind::LineMeasure { g, spec } => {
                let (s, c) = spec.angle.sin_cos();
                spec.kernel.eval(y1 / c, spec.width) * g.value(x2 - y1 * s / c) / c.abs()
            }
            DatumKind::Dirac { mass, m } => {
                let w = 1.0 / *m as f64;
                mass * Kernel::CosineBump.eval(y1, w) * Kernel::CosineBump.eval(x2, w)
            }
            DatumKind::NWaveSlice { params, t0 } => nwave_exact(*params, *t0, y1).unwrap_or(0.0),
        };
        self.rho * base
    }

    pub fn breakpoints_x1(&self) -> Vec<f64> {
        let base = match &self.kind {
            DatumKind::Function { breaks1, .. } => breaks1.clone(),
            DatumKind::LineMeasure { spec, .. } => {
                let c = spec.angle.cos();
                spec.kernel
                    .breakpoints(0.0, spec.width)
                    .into_iter()
                    .map(|x| x * c)
                    .collect()
            }
            DatumKind::Dirac { m, .. } => Kernel::CosineBump.breakpoints(0.0, 1.0 / *m as f64),
            DatumKind::NWaveSlice { params, t0 } => {
                let (a, b) = params.edges(*t0);
                vec![a, b]
            }
        };
        base.into_iter().map(|x| x / self.rho).collect()
    }

    pub fn breakpoints_x2(&self) -> Vec<f64> {
        match &self.kind {
            DatumKind::Function { breaks2, .. } => breaks2.clone(),
            DatumKind::LineMeasure { g, spec } => {
                if spec.angle == 0.0 {
                    g.breakpoints()
                } else {
                    vec![]
                }
            }
            DatumKind::Dirac { m, .. } => Kernel::CosineBump.breakpoints(0.0, 1.0 / *m as f64),
            DatumKind::NWaveSlice { .. } => vec![],
        }
    }

    /// Concentration index `m` for members of the Dirac family.
    pub fn dirac_index(&self) -> Option<u32> {
        match self.kind {
            DatumKind::Dirac { m, .. } => Some(m),
            _ => None,
        }
    }
}

/// `a_ε(x) = (θ_ε *_ξ (δ_{x₁=0} ⊗ g))(x)`, i.e. `θ_ε(x₁) g(x₂)` for `ξ = e₁`.
pub fn mollified_line_measure(g: Profile1D, spec: MollifierSpec) -> Result<InitialDatum> {
    g.validate()?;
    let c = spec.angle.cos();
    if c.abs() < 1e-12 {
        return Err(Error::invalid(
            "mollifying a vertical line measure along e2 does not produce a function",
        ));
    }
    let s = spec.angle.sin();
    // kernel normalization is an invariant of the closed-form shapes
    let norm = GaussRule::new(8)?.integrate(
        |x| spec.kernel.eval(x, spec.width),
        -spec.width,
        spec.width,
        8,
        &spec.kernel.breakpoints(0.0, spec.width),
    );
    if (norm - 1.0).abs() > 1e-12 {
        return Err(Error::Internal(format!("mollifier integrates to {norm}")));
    }
    let half = spec.width * c.abs();
    let (glo, ghi) = g.support().unwrap_or((0.0, 0.0));
    let shear = spec.width * s.abs();
    let support = Rect::new((-half, half), (glo - shear, ghi + shear));
    Ok(InitialDatum {
        mass: g.mass(),
        kind: DatumKind::LineMeasure { g, spec },
        rho: 1.0,
        support,
    })
}

/// Tensor cosine bump of mass `M` supported in `[−1/m, 1/m]²`.
pub fn dirac_family(mass: f64, m: u32) -> Result<InitialDatum> {
    if !(mass > 0.0 && mass.is_finite()) {
        return Err(Error::invalid(format!("Dirac mass must be positive, got {mass}")));
    }
    if m == 0 {
        return Err(Error::invalid("Dirac concentration index m must be >= 1"));
    }
    let w = 1.0 / m as f64;
    Ok(InitialDatum {
        kind: DatumKind::Dirac { mass, m },
        rho: 1.0,
        mass,
        support: Rect::new((-w, w), (-w, w)),
    })
}

impl InitialDatum {
    pub fn dirac_family(mass: f64, m: u32) -> Result<Self> {
        dirac_family(mass, m)
    }
}

/// N-wave profile at time `t0`, extended constantly in `x₂`.
pub fn nwave_slice(params: NWaveParams, t0: f64) -> Result<InitialDatum> {
    if !(t0 > 0.0) {
        return Err(Error::invalid(format!("N-wave slice time must be positive, got {t0}")));
    }
    let (lo, hi) = params.edges(t0);
    Ok(InitialDatum {
        kind: DatumKind::NWaveSlice { params, t0 },
        rho: 1.0,
        mass: params.mass(),
        support: Rect::new((lo, hi), (f64::NEG_INFINITY, f64::INFINITY)),
    })
}

/// `a_ρ(x) = ρ a(ρ x₁, x₂)`: mass invariant, horizontal support shrinks by `1/ρ`.
pub fn scale_datum(a: &InitialDatum, rho: f64) -> Result<InitialDatum> {
    if !(rho > 0.0 && rho.is_finite()) {
        return Err(Error::invalid(format!("scaling factor must be positive, got {rho}")));
    }
    if let DatumKind::NWaveSlice { .. } = a.kind {
        return Err(Error::invalid("the N-wave slice does not support horizontal scaling"));
    }
    let mut out = a.clone();
    out.rho = a.rho * rho;
    out.support.x1_min = a.support.x1_min / rho;
    out.support.x1_max = a.support.x1_max / rho;
    Ok(out)
}

/// Outcome of [`scale_solution`].
#[derive(Debug, Clone)]
pub struct ScaledField {
    pub field: CellField,
    /// Mass of the scaled field fell partly outside the target grid.
    pub support_outside_target: bool,
}

/// `u^μ(t, x) = √μ u(μt, √μ x₁, x₂)`: maps a snapshot at time `T` to the
/// scaled solution at time `T/μ`, conservatively resampled onto `target`.
pub fn scale_solution(field: &CellField, mu: f64, target: &Grid2D) -> Result<ScaledField> {
    if !(mu > 0.0 && mu.is_finite()) {
        return Err(Error::invalid(format!("scaling parameter must be positive, got {mu}")));
    }
    let s = mu.sqrt();
    let src = field.grid();
    let stretched = Grid2D::from_spacing(
        src.x1_min / s,
        src.x2_min,
        src.h1 / s,
        src.h2,
        src.n1,
        src.n2,
        src.boundary,
    )?;
    let vals: Vec<f64> = field.values().iter().map(|v| v * s).collect();
    let out = resample_conservative(&stretched, &vals, target);
    let mass_in: f64 = vals.iter().map(|v| v.abs()).sum::<f64>() * stretched.cell_area();
    let mass_out: f64 = out.iter().map(|v| v.abs()).sum::<f64>() * target.cell_area();
    let field = CellField::new(*target, out, field.time() / mu)?;
    Ok(ScaledField {
        field,
        support_outside_target: (mass_in - mass_out).abs() > 1e-12 * mass_in.max(1e-300),
    })
}

/// `‖a_ε − a_ν‖₁` for two horizontal mollifications of the same profile.
pub fn line_measure_l1_distance(g: &Profile1D, a: MollifierSpec, b: MollifierSpec) -> Result<f64> {
    if a.angle != 0.0 || b.angle != 0.0 {
        return Err(Error::invalid("L1 distance is implemented for horizontal mollifiers only"));
    }
    let w = a.width.max(b.width);
    let mut breaks = a.kernel.breakpoints(0.0, a.width);
    breaks.extend(b.kernel.breakpoints(0.0, b.width));
    // the kernels' crossing points are kinks of |θa − θb|
    let diff = |s: f64| a.kernel.eval(s, a.width) - b.kernel.eval(s, b.width);
    let n = 4096;
    let step = 2.0 * w / n as f64;
    for k in 0..n {
        let (mut lo, mut hi) = (-w + k as f64 * step, -w + (k + 1) as f64 * step);
        let (dl, dh) = (diff(lo), diff(hi));
        if dl == 0.0 || dl.signum() == dh.signum() {
            continue;
        }
        for _ in 0..80 {
            let mid = 0.5 * (lo + hi);
            if diff(mid).signum() == dl.signum() {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        breaks.push(0.5 * (lo + hi));
    }
    let rule = GaussRule::new(12)?;
    let d = rule.integrate(|s| diff(s).abs(), -w, w, 64, &breaks);
    Ok(d * g.lp_norm(1.0)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{discretize, Boundary};

    #[test]
    fn nwave_values_and_mass() {
        let p = NWaveParams::new(0.0, 1.0).unwrap();
        assert_eq!(nwave_exact(p, 1.0, 0.5).unwrap(), 0.5);
        assert_eq!(nwave_exact(p, 1.0, 1.5).unwrap(), 0.0);
        assert!(nwave_exact(p, 0.0, 0.5).is_err());
        assert_eq!(NWaveParams::new(-1.0, 1.0).unwrap().mass(), 0.0);
        // p = 0, q = 2, t = 4: ∫_0^4 x/4 dx = 2
        let p = NWaveParams::new(0.0, 2.0).unwrap();
        let rule = GaussRule::new(4).unwrap();
        let m = rule.integrate(|x| nwave_exact(p, 4.0, x).unwrap(), -1.0, 5.0, 6, &[0.0, 4.0]);
        assert!((m - 2.0).abs() < 1e-13);
        assert_eq!(p.mass(), 2.0);
        assert!(NWaveParams::new(0.5, 1.0).is_err());
    }

    #[test]
    fn nwave_rankine_hugoniot() {
        // shock x = q√t moves at q/(2√t), half of the left trace q/√t
        let p = NWaveParams::new(-0.7, 1.3).unwrap();
        for &t in &[0.3, 1.0, 2.5] {
            let dt = 1e-6;
            let speed = (p.edges(t + dt).1 - p.edges(t - dt).1) / (2.0 * dt);
            let trace = nwave_exact(p, t, p.edges(t).1).unwrap();
            assert!((speed - 0.5 * trace).abs() < 1e-8);
            let speed = (p.edges(t + dt).0 - p.edges(t - dt).0) / (2.0 * dt);
            let trace = nwave_exact(p, t, p.edges(t).0).unwrap();
            assert!((speed - 0.5 * trace).abs() < 1e-8);
        }
    }

    #[test]
    fn nwave_cell_average_matches_quadrature() {
        let p = NWaveParams::new(-0.5, 1.0).unwrap();
        let rule = GaussRule::new(4).unwrap();
        for &(a, b) in &[(-0.3, -0.1), (0.9, 1.2), (-2.0, -1.0), (-0.6, 1.1)] {
            let (lo, hi) = p.edges(1.0);
            let q = rule.integrate(|x| nwave_exact(p, 1.0, x).unwrap(), a, b, 1, &[lo, hi]) / (b - a);
            assert!((nwave_cell_average(p, 1.0, a, b).unwrap() - q).abs() < 1e-14);
        }
    }

    #[test]
    fn line_measure_mass_and_zero_profile() {
        let spec = MollifierSpec::horizontal(Kernel::CosineBump, 0.1).unwrap();
        let a = mollified_line_measure(Profile1D::indicator(0.0, 1.0), spec).unwrap();
        assert_eq!(a.mass(), 1.0);
        assert_eq!(a.horizontal_support(), (-0.1, 0.1));
        let z = mollified_line_measure(Profile1D::Zero, spec).unwrap();
        assert_eq!(z.mass(), 0.0);
        assert_eq!(z.value(0.0, 0.5), 0.0);
        let vertical = MollifierSpec::new(Kernel::Triangle, 0.1, std::f64::consts::FRAC_PI_2).unwrap();
        assert!(mollified_line_measure(Profile1D::indicator(0.0, 1.0), vertical).is_err());
        assert!(MollifierSpec::horizontal(Kernel::Triangle, 0.0).is_err());
    }

    #[test]
    fn line_measure_distance_shrinks() {
        let g = Profile1D::indicator(0.0, 1.0);
        let d = |e: f64, n: f64| {
            line_measure_l1_distance(
                &g,
                MollifierSpec::horizontal(Kernel::Triangle, e).unwrap(),
                MollifierSpec::horizontal(Kernel::Triangle, n).unwrap(),
            )
            .unwrap()
        };
        assert!(d(0.1, 0.1) < 1e-14);
        // both triangles are dilations: the distance depends only on the ratio
        assert!((d(0.2, 0.1) - d(0.02, 0.01)).abs() < 1e-8);
        assert!(d(0.2, 0.1) > 0.1);
        // vs. brute-force quadrature of the 2-D difference
        let a = mollified_line_measure(g.clone(), MollifierSpec::horizontal(Kernel::Triangle, 0.2).unwrap()).unwrap();
        let b = mollified_line_measure(g.clone(), MollifierSpec::horizontal(Kernel::Triangle, 0.1).unwrap()).unwrap();
        let rule = GaussRule::new(6).unwrap();
        let brute = rule.integrate(|x| (a.value(x, 0.5) - b.value(x, 0.5)).abs(), -0.2, 0.2, 400, &[-0.1, -1.0 / 15.0, 0.0, 1.0 / 15.0, 0.1]);
        assert!((brute - d(0.2, 0.1)).abs() < 1e-10);
    }

    #[test]
    fn dirac_family_support_mass_and_peak() {
        let a = dirac_family(1.0, 10).unwrap();
        let b = a.support_box();
        assert_eq!((b.x1_min, b.x1_max, b.x2_min, b.x2_max), (-0.1, 0.1, -0.1, 0.1));
        assert_eq!(a.mass(), 1.0);
        let a2 = dirac_family(1.0, 20).unwrap();
        assert!((a2.value(0.0, 0.0) / a.value(0.0, 0.0) - 4.0).abs() < 1e-14);
        assert!(dirac_family(0.0, 3).is_err());
        assert!(dirac_family(1.0, 0).is_err());
        assert_eq!(a.value(0.1, 0.0), 0.0);
    }

    #[test]
    fn declared_metadata_matches_quadrature() {
        // independent fine quadrature of each factory output
        let rule = GaussRule::new(8).unwrap();
        let data = vec![
            dirac_family(2.5, 7).unwrap(),
            mollified_line_measure(
                Profile1D::indicator(-0.5, 1.0),
                MollifierSpec::horizontal(Kernel::Triangle, 0.3).unwrap(),
            )
            .unwrap(),
            mollified_line_measure(
                Profile1D::Kernel { center: 0.2, width: 0.4, kernel: Kernel::CosineBump, mass: 3.0 },
                MollifierSpec::horizontal(Kernel::CosineBump, 0.05).unwrap(),
            )
            .unwrap(),
            scale_datum(&dirac_family(1.0, 4).unwrap(), 3.0).unwrap(),
            InitialDatum::bump_sum(vec![
                Bump { center: (0.1, 0.2), half_width: (0.3, 0.2), amplitude: 2.0 },
                Bump { center: (-0.4, 0.0), half_width: (0.1, 0.5), amplitude: -1.0 },
            ])
            .unwrap(),
        ];
        for a in data {
            let s = a.support_box();
            let b1 = a.breakpoints_x1();
            let b2 = a.breakpoints_x2();
            let m = rule.integrate(
                |x2| rule.integrate(|x1| a.value(x1, x2), s.x1_min, s.x1_max, 16, &b1),
                s.x2_min,
                s.x2_max,
                16,
                &b2,
            );
            assert!((m - a.mass()).abs() < 1e-10, "{a:?}: quadrature {m}");
            // nothing outside the declared support
            for &(x1, x2) in &[(s.x1_min - 1e-9, 0.0), (s.x1_max + 1e-9, 0.1), (0.0, s.x2_max + 1e-9)] {
                assert_eq!(a.value(x1, x2), 0.0);
            }
        }
    }

    #[test]
    fn scale_datum_identity_mass_and_support() {
        let a = dirac_family(1.0, 8).unwrap();
        let same = scale_datum(&a, 1.0).unwrap();
        for &(x, y) in &[(0.01, 0.02), (-0.1, 0.0), (0.05, -0.07)] {
            assert_eq!(same.value(x, y), a.value(x, y));
        }
        let s = scale_datum(&a, 4.0).unwrap();
        assert_eq!(s.mass(), 1.0);
        let (lo, hi) = s.horizontal_support();
        assert_eq!((lo, hi), (-0.125 / 4.0, 0.125 / 4.0));
        assert!(scale_datum(&nwave_slice(NWaveParams::new(0.0, 1.0).unwrap(), 1.0).unwrap(), 2.0).is_err());
        assert!(scale_datum(&a, 0.0).is_err());
    }

    #[test]
    fn scaled_dirac_is_anisotropic_member() {
        // ρ = 2: kernel of half-width 1/(2m) in x1 and 1/m in x2
        let m = 6u32;
        let s = scale_datum(&dirac_family(1.0, m).unwrap(), 2.0).unwrap();
        let w = 1.0 / m as f64;
        for k in 0..50 {
            let x1 = -0.1 + 0.004 * k as f64;
            let x2 = 0.15 - 0.006 * k as f64;
            let want = Kernel::CosineBump.eval(x1, w / 2.0) * Kernel::CosineBump.eval(x2, w);
            assert!((s.value(x1, x2) - want).abs() < 1e-12 * (1.0 + want));
        }
    }

    #[test]
    fn scale_solution_identity_and_mass() {
        let g = Grid2D::new(Rect::new((-1.0, 1.0), (-1.0, 1.0)), 32, 16, Boundary::Outflow).unwrap();
        let f = discretize(&dirac_family(1.0, 4).unwrap(), &g, 3).unwrap().field.with_time(2.0);
        let same = scale_solution(&f, 1.0, &g).unwrap();
        assert_eq!(same.field.values(), f.values());
        let scaled = scale_solution(&f, 4.0, &g).unwrap();
        assert!((scaled.field.mass() - f.mass()).abs() < 1e-8);
        assert!(!scaled.support_outside_target);
        assert_eq!(scaled.field.time(), 0.5);
        let narrow = Grid2D::new(Rect::new((0.0, 1.0), (-1.0, 1.0)), 8, 8, Boundary::Outflow).unwrap();
        assert!(scale_solution(&f, 4.0, &narrow).unwrap().support_outside_target);
    }

    #[test]
    fn profile_norms() {
        let g = Profile1D::indicator(0.0, 2.0);
        assert!((g.lp_norm(2.0).unwrap() - 2f64.sqrt()).abs() < 1e-15);
        assert_eq!(g.lp_norm(f64::INFINITY).unwrap(), 1.0);
        let t = Profile1D::Tail { start: 0.0 };
        assert!((t.lp_norm(2.0).unwrap() - (1.0f64 / 3.0).sqrt()).abs() < 1e-15);
        assert_eq!(t.support(), Some((0.0, f64::INFINITY)));
        let k = Profile1D::Kernel { center: 0.0, width: 0.5, kernel: Kernel::CosineBump, mass: 1.0 };
        // ∫ θ² for the cosine bump of half-width w is 3/(4w)
        assert!((k.lp_norm(2.0).unwrap() - (1.5f64).sqrt()).abs() < 1e-12);
        let k = Profile1D::Kernel { center: 0.0, width: 0.5, kernel: Kernel::Triangle, mass: 1.0 };
        // 2/(3w)
        assert!((k.lp_norm(2.0).unwrap() - (4.0f64 / 3.0).sqrt()).abs() < 1e-12);
        assert!(g.lp_norm(0.5).is_err());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn scale_datum_composes_exactly(rho in 0.1f64..10.0, sigma in 0.1f64..10.0, m in 1u32..40) {
                let a = dirac_family(1.0, m).unwrap();
                let two = scale_datum(&scale_datum(&a, rho).unwrap(), sigma).unwrap();
                let one = scale_datum(&a, rho * sigma).unwrap();
                prop_assert_eq!(two.rho(), one.rho());
                prop_assert_eq!(two.mass(), one.mass());
            }
        }
    }
}
