//! Float evaluation of truncated series fields, their term-wise derivatives,
//! the PDE residual, and a finite-difference cross-check.
//!
//! Every mode is a plane exponential `e^{w·x}`: `w = −k` for Euler tables and
//! `w = kλ` for Navier-Stokes tables, so `∂_i` multiplies by `w_i` and `Δ` by
//! `|w|²`.

use alloc::vec::Vec;
use core::fmt;

use crate::lattice::MultiIndex;
use crate::ring::{to_f64, CompiledExpPoly, ExpPoly};
use crate::table::{CoefficientTable, ProblemMeta, TableKind};

pub type Point = [f64; 3];

#[derive(Clone, Debug, PartialEq)]
pub enum FieldError {
    /// Euler fields live on `x_j ≥ 0`.
    Domain { axis: usize, value: f64 },
    Grid(&'static str),
    Step(f64),
    NonFinite { x: Point, t: f64 },
}

impl fmt::Display for FieldError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FieldError::Domain { axis, value } => {
                write!(f, "x{} = {value} lies outside the half-space x >= 0", axis + 1)
            }
            FieldError::Grid(why) => write!(f, "invalid grid: {why}"),
            FieldError::Step(h) => write!(f, "invalid step {h}"),
            FieldError::NonFinite { x, t } => {
                write!(f, "field not finite at x = ({}, {}, {}), t = {t}", x[0], x[1], x[2])
            }
        }
    }
}

impl core::error::Error for FieldError {}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Derivative {
    Dt,
    Dx(usize),
    Laplacian,
}

/// Velocity and pressure (or their derivatives) at one point.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct FieldValue {
    pub u: [f64; 3],
    pub p: f64,
}

impl FieldValue {
    fn axpy(&mut self, a: f64, other: &FieldValue) {
        for j in 0..3 {
            self.u[j] += a * other.u[j];
        }
        self.p += a * other.p;
    }

    fn scaled(&self, a: f64) -> FieldValue {
        FieldValue {
            u: self.u.map(|v| a * v),
            p: a * self.p,
        }
    }
}

/// `r_j = u_j,t − νΔu_j + Σ_i u_i u_j,x_i + p_x_j − f_j` and `∇·u`.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Residual {
    pub r: [f64; 3],
    pub div: f64,
    /// Sum of absolute values of the terms entering `r`; the round-off scale.
    pub scale: f64,
    /// Sum of absolute values of the terms entering `div`.
    pub div_scale: f64,
}

impl Residual {
    pub fn max_abs(&self) -> f64 {
        self.r.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

struct CompiledMode {
    wave: [f64; 3],
    velocity: [CompiledExpPoly; 3],
    velocity_dt: [CompiledExpPoly; 3],
    pressure: CompiledExpPoly,
    pressure_dt: CompiledExpPoly,
}

/// A coefficient table compiled to floats for repeated evaluation.
pub struct FieldEvaluator {
    kind: TableKind,
    modes: Vec<CompiledMode>,
    nu: f64,
    forcing: Vec<([f64; 3], [CompiledExpPoly; 3])>,
    max_level: u32,
}

fn wave_of(meta: &ProblemMeta, k: &MultiIndex) -> [f64; 3] {
    match meta {
        ProblemMeta::Euler { .. } => k.0.map(|c| -(c as f64)),
        ProblemMeta::NavierStokes { lambda, .. } => {
            let kk = k.get(0) as f64;
            [0, 1, 2].map(|j| kk * to_f64(&lambda[j]))
        }
    }
}

fn compile3(f: &[ExpPoly; 3]) -> [CompiledExpPoly; 3] {
    [0, 1, 2].map(|j| CompiledExpPoly::from(&f[j]))
}

impl FieldEvaluator {
    pub fn new(table: &CoefficientTable) -> Self {
        Self::build(table, true)
    }

    /// Evaluator without the zero mode: the fluctuating part of the fields.
    /// Finite differences of it avoid cancellation against a large constant.
    pub fn fluctuation(table: &CoefficientTable) -> Self {
        Self::build(table, false)
    }

    fn build(table: &CoefficientTable, with_zero: bool) -> Self {
        let meta = table.meta();
        let modes = table
            .iter()
            .filter(|(k, _)| with_zero || !k.is_zero())
            .filter(|(_, c)| !c.is_zero())
            .map(|(k, c)| CompiledMode {
                wave: wave_of(meta, k),
                velocity: compile3(&c.velocity),
                velocity_dt: compile3(&c.velocity.clone().map(|f| f.diff())),
                pressure: CompiledExpPoly::from(&c.pressure),
                pressure_dt: CompiledExpPoly::from(&c.pressure.diff()),
            })
            .collect();
        let (nu, forcing) = match meta {
            ProblemMeta::Euler { .. } => (0.0, Vec::new()),
            ProblemMeta::NavierStokes { nu, forcing, .. } => (
                to_f64(nu),
                forcing
                    .iter()
                    .map(|(k, b)| (wave_of(meta, &MultiIndex::new(*k, 0, 0)), compile3(b)))
                    .collect(),
            ),
        };
        FieldEvaluator {
            kind: table.kind(),
            modes,
            nu,
            forcing,
            max_level: table.max_level(),
        }
    }

    pub fn kind(&self) -> TableKind {
        self.kind
    }

    pub fn max_level(&self) -> u32 {
        self.max_level
    }

    pub fn check_point(&self, x: &Point) -> Result<(), FieldError> {
        if self.kind == TableKind::Euler {
            if let Some(axis) = (0..3).find(|&j| !(x[j] >= 0.0)) {
                return Err(FieldError::Domain { axis, value: x[axis] });
            }
        }
        Ok(())
    }

    /// Coefficients of every mode at time `t`.
    pub fn slice(&self, t: f64) -> TimeSlice<'_> {
        let coeffs = self
            .modes
            .iter()
            .map(|m| ModeAtTime {
                u: [0, 1, 2].map(|j| m.velocity[j].eval(t)),
                du: [0, 1, 2].map(|j| m.velocity_dt[j].eval(t)),
                p: m.pressure.eval(t),
                dp: m.pressure_dt.eval(t),
            })
            .collect();
        let forcing = self
            .forcing
            .iter()
            .map(|(_, b)| [0, 1, 2].map(|j| b[j].eval(t)))
            .collect();
        TimeSlice {
            ev: self,
            t,
            coeffs,
            forcing,
        }
    }

    pub fn eval_field(&self, x: &Point, t: f64) -> Result<FieldValue, FieldError> {
        self.slice(t).field(x)
    }

    pub fn eval_derivative(&self, which: Derivative, x: &Point, t: f64) -> Result<FieldValue, FieldError> {
        self.slice(t).derivative(which, x)
    }

    pub fn pde_residual(&self, x: &Point, t: f64) -> Result<Residual, FieldError> {
        self.slice(t).residual(x)
    }
}

struct ModeAtTime {
    u: [f64; 3],
    du: [f64; 3],
    p: f64,
    dp: f64,
}

/// All mode coefficients evaluated at one time; spatial evaluation then
/// costs one exponential per mode.
pub struct TimeSlice<'a> {
    ev: &'a FieldEvaluator,
    t: f64,
    coeffs: Vec<ModeAtTime>,
    forcing: Vec<[f64; 3]>,
}

fn dot(a: &[f64; 3], b: &Point) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

impl TimeSlice<'_> {
    pub fn t(&self) -> f64 {
        self.t
    }

    fn finite(&self, x: &Point, v: FieldValue) -> Result<FieldValue, FieldError> {
        if v.u.iter().all(|c| c.is_finite()) && v.p.is_finite() {
            Ok(v)
        } else {
            Err(FieldError::NonFinite { x: *x, t: self.t })
        }
    }

    /// `Σ_k T_jk(t) e^{w_k·x}` in table order.
    pub fn field(&self, x: &Point) -> Result<FieldValue, FieldError> {
        self.derivative_with(x, |_, c| (c.u, c.p))
    }

    pub fn derivative(&self, which: Derivative, x: &Point) -> Result<FieldValue, FieldError> {
        match which {
            Derivative::Dt => self.derivative_with(x, |_, c| (c.du, c.dp)),
            Derivative::Dx(i) => self.derivative_with(x, |w, c| (c.u.map(|v| w[i] * v), w[i] * c.p)),
            Derivative::Laplacian => self.derivative_with(x, |w, c| {
                let w2 = dot(w, w);
                (c.u.map(|v| w2 * v), w2 * c.p)
            }),
        }
    }

    fn derivative_with(
        &self,
        x: &Point,
        f: impl Fn(&[f64; 3], &ModeAtTime) -> ([f64; 3], f64),
    ) -> Result<FieldValue, FieldError> {
        self.ev.check_point(x)?;
        let mut acc = FieldValue::default();
        for (m, c) in self.ev.modes.iter().zip(&self.coeffs) {
            let basis = libm::exp(dot(&m.wave, x));
            let (u, p) = f(&m.wave, c);
            acc.axpy(basis, &FieldValue { u, p });
        }
        self.finite(x, acc)
    }

    /// Forcing `f_j(x, t)`; zero for Euler tables.
    pub fn forcing(&self, x: &Point) -> [f64; 3] {
        let mut f = [0.0; 3];
        for ((w, _), b) in self.ev.forcing.iter().zip(&self.forcing) {
            let basis = libm::exp(dot(w, x));
            for j in 0..3 {
                f[j] += b[j] * basis;
            }
        }
        f
    }

    /// Residual from term-wise symbolic derivatives, one pass over the modes.
    pub fn residual(&self, x: &Point) -> Result<Residual, FieldError> {
        self.ev.check_point(x)?;
        let nu = self.ev.nu;
        let mut u = [0.0; 3];
        let mut ut = [0.0; 3];
        let mut lap = [0.0; 3];
        let mut grad_u = [[0.0; 3]; 3]; // grad_u[i][j] = ∂_i u_j
        let mut grad_p = [0.0; 3];
        let mut div = 0.0;
        let mut scale = 0.0;
        let mut div_scale = 0.0;
        for (m, c) in self.ev.modes.iter().zip(&self.coeffs) {
            let basis = libm::exp(dot(&m.wave, x));
            let w2 = dot(&m.wave, &m.wave);
            for j in 0..3 {
                let v = c.u[j] * basis;
                u[j] += v;
                ut[j] += c.du[j] * basis;
                lap[j] += w2 * v;
                div += m.wave[j] * v;
                div_scale += (m.wave[j] * v).abs();
                scale += (c.du[j] * basis).abs() + nu * (w2 * v).abs();
                for i in 0..3 {
                    grad_u[i][j] += m.wave[i] * v;
                }
                grad_p[j] += m.wave[j] * c.p * basis;
                scale += (m.wave[j] * c.p * basis).abs();
            }
        }
        let f = self.forcing(x);
        let mut r = [0.0; 3];
        for j in 0..3 {
            let mut adv = 0.0;
            for i in 0..3 {
                adv += u[i] * grad_u[i][j];
                scale += (u[i] * grad_u[i][j]).abs();
            }
            r[j] = ut[j] - nu * lap[j] + adv + grad_p[j] - f[j];
            scale += f[j].abs();
        }
        if !(r.iter().all(|v| v.is_finite()) && div.is_finite()) {
            return Err(FieldError::NonFinite { x: *x, t: self.t });
        }
        Ok(Residual {
            r,
            div,
            scale,
            div_scale,
        })
    }
}

fn check_step(h: f64) -> Result<(), FieldError> {
    if h > 0.0 && h.is_finite() {
        Ok(())
    } else {
        Err(FieldError::Step(h))
    }
}

/// Direction of a finite difference.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FdAxis {
    T,
    X(usize),
}

fn shifted(x: &Point, t: f64, axis: FdAxis, d: f64) -> (Point, f64) {
    match axis {
        FdAxis::T => (*x, t + d),
        FdAxis::X(i) => {
            let mut y = *x;
            y[i] += d;
            (y, t)
        }
    }
}

/// `(F(·+h) − F(·−h)) / 2h` of the evaluated fields.
pub fn fd_partial(ev: &FieldEvaluator, axis: FdAxis, x: &Point, t: f64, h: f64) -> Result<FieldValue, FieldError> {
    check_step(h)?;
    let (xp, tp) = shifted(x, t, axis, h);
    let (xm, tm) = shifted(x, t, axis, -h);
    ev.check_point(&xm)?;
    let mut d = ev.eval_field(&xp, tp)?;
    d.axpy(-1.0, &ev.eval_field(&xm, tm)?);
    Ok(d.scaled(0.5 / h))
}

/// Richardson combination `(4 D(h/2) − D(h)) / 3` of central differences.
pub fn fd_partial_richardson(
    ev: &FieldEvaluator,
    axis: FdAxis,
    x: &Point,
    t: f64,
    h: f64,
) -> Result<FieldValue, FieldError> {
    let coarse = fd_partial(ev, axis, x, t, h)?;
    let mut fine = fd_partial(ev, axis, x, t, 0.5 * h)?.scaled(4.0 / 3.0);
    fine.axpy(-1.0 / 3.0, &coarse);
    Ok(fine)
}

/// `(F(·+h) − 2F + F(·−h)) / h²`.
pub fn fd_second(ev: &FieldEvaluator, axis: FdAxis, x: &Point, t: f64, h: f64) -> Result<FieldValue, FieldError> {
    check_step(h)?;
    let (xp, tp) = shifted(x, t, axis, h);
    let (xm, tm) = shifted(x, t, axis, -h);
    ev.check_point(&xm)?;
    let mut d = ev.eval_field(&xp, tp)?;
    d.axpy(-2.0, &ev.eval_field(x, t)?);
    d.axpy(1.0, &ev.eval_field(&xm, tm)?);
    Ok(d.scaled(1.0 / (h * h)))
}

/// Laplacian by Richardson-extrapolated second differences.
pub fn fd_laplacian(ev: &FieldEvaluator, x: &Point, t: f64, h: f64) -> Result<FieldValue, FieldError> {
    let mut acc = FieldValue::default();
    for i in 0..3 {
        let coarse = fd_second(ev, FdAxis::X(i), x, t, h)?;
        let fine = fd_second(ev, FdAxis::X(i), x, t, 0.5 * h)?;
        acc.axpy(4.0 / 3.0, &fine);
        acc.axpy(-1.0 / 3.0, &coarse);
    }
    Ok(acc)
}

/// Step used for second differences relative to the first-derivative step:
/// the `h⁻²` round-off amplification needs a larger step.
pub const SECOND_STEP_FACTOR: f64 = 10.0;

/// The residual with every derivative replaced by a Richardson-extrapolated
/// finite difference of [`FieldEvaluator::eval_field`]; `h` is the
/// first-derivative step.
pub fn fd_residual(ev: &FieldEvaluator, x: &Point, t: f64, h: f64) -> Result<Residual, FieldError> {
    let slice = ev.slice(t);
    let f0 = slice.field(x)?;
    let ut = fd_partial_richardson(ev, FdAxis::T, x, t, h)?;
    let grads: [FieldValue; 3] = [
        fd_partial_richardson(ev, FdAxis::X(0), x, t, h)?,
        fd_partial_richardson(ev, FdAxis::X(1), x, t, h)?,
        fd_partial_richardson(ev, FdAxis::X(2), x, t, h)?,
    ];
    let lap = if ev.nu != 0.0 {
        fd_laplacian(ev, x, t, SECOND_STEP_FACTOR * h)?
    } else {
        FieldValue::default()
    };
    let f = slice.forcing(x);
    let mut out = Residual::default();
    for j in 0..3 {
        let mut adv = 0.0;
        for (i, g) in grads.iter().enumerate() {
            adv += f0.u[i] * g.u[j];
        }
        let terms = [ut.u[j], -ev.nu * lap.u[j], adv, grads[j].p, -f[j]];
        out.r[j] = terms.iter().sum();
        out.scale += terms.iter().map(|v| v.abs()).sum::<f64>();
        out.div += grads[j].u[j];
        out.div_scale += grads[j].u[j].abs();
    }
    Ok(out)
}

/// One axis of a grid: `count` evenly spaced values on `[min, max]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AxisRange {
    pub min: f64,
    pub max: f64,
    pub count: usize,
}

impl AxisRange {
    pub fn new(min: f64, max: f64, count: usize) -> Self {
        AxisRange { min, max, count }
    }

    pub fn value(&self, i: usize) -> f64 {
        if self.count <= 1 {
            return self.min;
        }
        self.min + (self.max - self.min) * (i as f64) / ((self.count - 1) as f64)
    }

    pub fn values(&self) -> Vec<f64> {
        (0..self.count).map(|i| self.value(i)).collect()
    }

    fn validate(&self) -> Result<(), FieldError> {
        if self.count == 0 {
            return Err(FieldError::Grid("axis with no points"));
        }
        if !(self.min.is_finite() && self.max.is_finite()) {
            return Err(FieldError::Grid("non-finite axis bound"));
        }
        if self.min > self.max {
            return Err(FieldError::Grid("axis minimum exceeds maximum"));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GridSpec {
    pub x: [AxisRange; 3],
    pub t: AxisRange,
}

impl GridSpec {
    pub fn cardinality(&self) -> usize {
        self.x.iter().map(|a| a.count).product::<usize>() * self.t.count
    }

    /// Checks the ranges; Euler grids must lie in the half-space `x ≥ 0`.
    pub fn validate(&self, kind: TableKind) -> Result<(), FieldError> {
        for a in self.x.iter().chain(core::iter::once(&self.t)) {
            a.validate()?;
        }
        if kind == TableKind::Euler {
            if let Some(axis) = (0..3).find(|&j| self.x[j].min < 0.0) {
                return Err(FieldError::Domain {
                    axis,
                    value: self.x[axis].min,
                });
            }
        }
        Ok(())
    }

    /// Grid points as `(x, t_index)`, `x1` outermost and `t` innermost.
    pub fn points(&self) -> Vec<(Point, usize)> {
        let [a, b, c] = self.x.map(|r| r.values());
        let mut out = Vec::with_capacity(self.cardinality());
        for &x1 in &a {
            for &x2 in &b {
                for &x3 in &c {
                    for it in 0..self.t.count {
                        out.push(([x1, x2, x3], it));
                    }
                }
            }
        }
        out
    }
}

/// Everything computed at one grid point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PointSample {
    pub x: Point,
    pub t: f64,
    pub field: FieldValue,
    pub residual: Residual,
    /// Finite-difference residual; `None` where the stencil leaves the domain.
    pub fd: Option<Residual>,
}

/// Evaluates one point against a precomputed time slice.
pub fn sample_point(ev: &FieldEvaluator, slice: &TimeSlice<'_>, x: &Point, h: f64) -> Result<PointSample, FieldError> {
    let field = slice.field(x)?;
    let residual = slice.residual(x)?;
    let fd = match fd_residual(ev, x, slice.t(), h) {
        Ok(r) => Some(r),
        Err(FieldError::Domain { .. }) => None,
        Err(e) => return Err(e),
    };
    Ok(PointSample {
        x: *x,
        t: slice.t(),
        field,
        residual,
        fd,
    })
}

/// Evaluates every grid point in [`GridSpec::points`] order.
pub fn sample_grid(ev: &FieldEvaluator, grid: &GridSpec, h: f64) -> Result<Vec<PointSample>, FieldError> {
    grid.validate(ev.kind())?;
    check_step(h)?;
    let slices: Vec<TimeSlice<'_>> = grid.t.values().into_iter().map(|t| ev.slice(t)).collect();
    grid.points()
        .iter()
        .map(|(x, it)| sample_point(ev, &slices[*it], x, h))
        .collect()
}

/// Worst value of some quantity and where it occurred.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Extremum {
    pub value: f64,
    pub x: Point,
    pub t: f64,
}

impl Extremum {
    fn update(&mut self, value: f64, s: &PointSample) {
        if value > self.value || value.is_nan() {
            *self = Extremum { value, x: s.x, t: s.t };
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ResidualReport {
    pub grid: Option<GridSpec>,
    pub max_level: u32,
    pub points: usize,
    /// Per-component max of the symbolic residual.
    pub max_residual: [Extremum; 3],
    pub mean_residual: [f64; 3],
    pub max_divergence: Extremum,
    /// Max of `|div| / div_scale` over points with nonzero scale.
    pub max_divergence_ratio: f64,
    /// Max of the round-off scale of the residual.
    pub max_scale: f64,
    pub fd_points: usize,
    pub fd_max_residual: [f64; 3],
    pub fd_max_divergence: f64,
    /// Proof-derived estimate of the truncation residual, when known.
    pub tail_estimate: Option<f64>,
}

impl ResidualReport {
    /// Reduces samples in their given order, so the result is reproducible.
    pub fn from_samples(samples: &[PointSample], max_level: u32) -> Self {
        let mut max_residual = [Extremum::default(); 3];
        let mut sums = [0.0; 3];
        let mut max_divergence = Extremum::default();
        let mut max_divergence_ratio: f64 = 0.0;
        let mut max_scale: f64 = 0.0;
        let mut fd_points = 0;
        let mut fd_max_residual = [0.0f64; 3];
        let mut fd_max_divergence: f64 = 0.0;
        for s in samples {
            for j in 0..3 {
                let r = s.residual.r[j].abs();
                max_residual[j].update(r, s);
                sums[j] += r;
            }
            let d = s.residual.div.abs();
            max_divergence.update(d, s);
            if s.residual.div_scale > 0.0 {
                max_divergence_ratio = max_divergence_ratio.max(d / s.residual.div_scale);
            } else if d > 0.0 {
                max_divergence_ratio = f64::INFINITY;
            }
            max_scale = max_scale.max(s.residual.scale);
            if let Some(fd) = &s.fd {
                fd_points += 1;
                for j in 0..3 {
                    fd_max_residual[j] = fd_max_residual[j].max(fd.r[j].abs());
                }
                fd_max_divergence = fd_max_divergence.max(fd.div.abs());
            }
        }
        let n = samples.len().max(1) as f64;
        ResidualReport {
            grid: None,
            max_level,
            points: samples.len(),
            max_residual,
            mean_residual: sums.map(|s| s / n),
            max_divergence,
            max_divergence_ratio,
            max_scale,
            fd_points,
            fd_max_residual,
            fd_max_divergence,
            tail_estimate: None,
        }
    }

    pub fn max_abs_residual(&self) -> f64 {
        self.max_residual.iter().fold(0.0, |m, e| m.max(e.value))
    }

    pub fn worst_residual(&self) -> Extremum {
        *self
            .max_residual
            .iter()
            .fold(&self.max_residual[0], |a, b| if b.value > a.value { b } else { a })
    }

    /// `|∇·u| ≤ tol · max(|u| terms)` at every point.
    pub fn divergence_ok(&self, rel_tol: f64) -> bool {
        self.max_divergence_ratio <= rel_tol
    }

    /// `max |r| ≤ tol · max(1, scale)`.
    pub fn residual_ok(&self, tol: f64) -> bool {
        self.max_abs_residual() <= tol * self.max_scale.max(1.0)
    }
}

/// Samples the grid and reduces to a report.
pub fn residual_report(table: &CoefficientTable, grid: &GridSpec, h: f64) -> Result<ResidualReport, FieldError> {
    let ev = FieldEvaluator::new(table);
    let samples = sample_grid(&ev, grid, h)?;
    let mut report = ResidualReport::from_samples(&samples, table.max_level());
    report.grid = Some(*grid);
    Ok(report)
}
