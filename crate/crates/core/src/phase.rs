//! The autonomous quadratic system in `t = ln r`,
//!
//! ```text
//! X_t = X (X - A + Z/(m-1))
//! Z_t = Z (ξ - pX + (q+1-m) Z/(m-1))
//! ```
//!
//! with `X = -r u'/u`, `Z = -r u^p |u'|^{q-m} u'`, `A = (N-m)/(m-1)` and
//! `ξ = N - (N-1)q/(m-1)`. Both axes are invariant, so orbits are integrated
//! in `(ln|X|, ln|Z|)`: signs are preserved exactly and approach to the axes
//! is resolved in relative terms.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimates::{estimate_limit, LimitMode};
use crate::ode::{self, Control, Dense, DriveStatus, Segment, StepperOptions};
use crate::params::{a0_eigen_slope, a0_stable_eigenvalue, FixedPointLabel, Params, Regime};
use crate::radial::{self, IntegrateOptions, RadialState, TerminalKind, Trajectory};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhasePoint {
    pub t: f64,
    #[serde(rename = "X")]
    pub x: f64,
    #[serde(rename = "Z")]
    pub z: f64,
}

/// Constants of the field.
#[derive(Debug, Clone, Copy)]
struct Field {
    a: f64,
    xi: f64,
    p: f64,
    beta: f64,
    inv_m1: f64,
}

impl Field {
    fn new(params: &Params) -> Field {
        let n = params.nf();
        let Params { m, p, q, .. } = *params;
        Field {
            a: (n - m) / (m - 1.0),
            xi: n - (n - 1.0) * q / (m - 1.0),
            p,
            beta: (q + 1.0 - m) / (m - 1.0),
            inv_m1: 1.0 / (m - 1.0),
        }
    }

    #[inline]
    fn rates(&self, x: f64, z: f64) -> (f64, f64) {
        (x - self.a + z * self.inv_m1, self.xi - self.p * x + self.beta * z)
    }
}

pub fn vector_field(params: &Params, x: f64, z: f64) -> (f64, f64) {
    let (fx, fz) = Field::new(params).rates(x, z);
    (x * fx, z * fz)
}

pub fn to_phase(params: &Params, state: &RadialState) -> Result<PhasePoint> {
    if !(state.r > 0.0) {
        return Err(Error::NonpositiveRadius(state.r));
    }
    if state.du == 0.0 {
        return Err(Error::DegenerateGradient);
    }
    if !(state.u > 0.0) {
        return Err(Error::InvalidArgument(format!("u = {} must be positive", state.u)));
    }
    let Params { m, p, q, .. } = *params;
    Ok(PhasePoint {
        t: state.r.ln(),
        x: -state.r * state.du / state.u,
        z: -state.r * state.u.powf(p) * state.du.abs().powf(q - m) * state.du,
    })
}

/// `ln u` at a phase point given in log coordinates.
#[inline]
fn log_u(params: &Params, t: f64, lx: f64, lz: f64) -> f64 {
    let Params { m, p, q, .. } = *params;
    ((q - m) * t + lz + (m - 1.0 - q) * lx) / (p + q - m + 1.0)
}

pub fn from_phase(params: &Params, point: &PhasePoint) -> Result<RadialState> {
    if !(point.x * point.z > 0.0) {
        return Err(Error::InadmissiblePoint { x: point.x, z: point.z });
    }
    let r = point.t.exp();
    let u = log_u(params, point.t, point.x.abs().ln(), point.z.abs().ln()).exp();
    Ok(RadialState::new(params, r, u, -point.x * u / r))
}

/// Eigenvalues of the central-difference Jacobian of the field at `(x, z)`,
/// ascending; `None` when they are complex.
pub fn jacobian_eigenvalues(params: &Params, x: f64, z: f64, h: f64) -> Option<(f64, f64)> {
    let (ax, az) = vector_field(params, x + h, z);
    let (bx, bz) = vector_field(params, x - h, z);
    let (cx, cz) = vector_field(params, x, z + h);
    let (dx, dz) = vector_field(params, x, z - h);
    let j = [[(ax - bx) / (2.0 * h), (cx - dx) / (2.0 * h)], [(az - bz) / (2.0 * h), (cz - dz) / (2.0 * h)]];
    let tr = j[0][0] + j[1][1];
    let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
    let disc = tr * tr / 4.0 - det;
    if disc < 0.0 {
        return None;
    }
    let s = disc.sqrt();
    let big = tr / 2.0 + s.copysign(tr);
    if big == 0.0 {
        return Some((0.0, 0.0));
    }
    let small = det / big;
    Some((big.min(small), big.max(small)))
}

/// Straight line `Z = slope·X + intercept`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Line {
    pub slope: f64,
    pub intercept: f64,
}

impl Line {
    pub fn at(&self, x: f64) -> f64 {
        self.slope * x + self.intercept
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Nullclines {
    /// `X_t = 0` off the Z-axis; passes through `A0`.
    pub l_x: Line,
    /// `Z_t = 0` off the X-axis; passes through `N0`.
    pub l_z: Line,
}

pub fn nullclines(params: &Params) -> Result<Nullclines> {
    params.require(Regime::Supercritical)?;
    let dc = params.derived();
    let m1 = params.m - 1.0;
    Ok(Nullclines {
        l_x: Line {
            slope: -m1,
            intercept: m1 * dc.mu_decay,
        },
        l_z: Line {
            slope: params.p * m1 / (params.q + 1.0 - params.m),
            intercept: dc.z_n0,
        },
    })
}

/// Thresholds for the lines `Z = cX + zN0` (`X > 0`) and `Z = kX` (`X < 0`)
/// beyond which the field crosses them in one direction only.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GuardLines {
    pub c_star: f64,
    pub k_star: f64,
    /// Whether `Z_t - cX_t > 0` held at 100 sampled points of each line for
    /// `c = 2c*` and `k = 2k*`.
    pub sampled_ok: bool,
}

/// `(m-1)(Z_t - c X_t)/X` on `Z = cX + zN0`, `X > 0`.
pub fn upper_guard_margin(params: &Params, c: f64, x: f64) -> f64 {
    let z = c * x + params.derived().z_n0;
    let (xt, zt) = vector_field(params, x, z);
    (params.m - 1.0) * (zt - c * xt) / x
}

/// `(m-1)(Z_t - k X_t)` on `Z = kX`, `X < 0`.
pub fn lower_guard_margin(params: &Params, k: f64, x: f64) -> f64 {
    let (xt, zt) = vector_field(params, x, k * x);
    (params.m - 1.0) * (zt - k * xt)
}

pub fn guard_lines(params: &Params) -> Result<GuardLines> {
    params.require(Regime::Supercritical)?;
    let n = params.nf();
    let Params { m, p, q, .. } = *params;
    let z0 = params.derived().z_n0;
    let c_star = ((p + 1.0) * (m - 1.0) / (q - m)).max(p * (m - 1.0) * z0 / (z0 * (q - m) + n - m));
    let k_star = (p + 1.0) * (m - 1.0) / (q - m);
    let xs = (0..100).map(|i| 1e-3 * 1e6f64.powf(i as f64 / 99.0));
    let sampled_ok = xs
        .clone()
        .all(|x| upper_guard_margin(params, 2.0 * c_star, x) > 0.0 && lower_guard_margin(params, 2.0 * k_star, -x) > 0.0);
    Ok(GuardLines {
        c_star,
        k_star,
        sampled_ok,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseOptions {
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Radius of the fixed-point ball, also the bound on the field norm
    /// relative to `max(1, |(X, Z)|)`.
    pub fp_tol: f64,
    pub escape_radius: f64,
    pub max_steps: usize,
}

impl Default for PhaseOptions {
    fn default() -> Self {
        PhaseOptions {
            rel_tol: 1e-10,
            abs_tol: 1e-12,
            fp_tol: 1e-8,
            escape_radius: 1e6,
            max_steps: 1_000_000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum PhaseEnd {
    FixedPoint(FixedPointLabel),
    Escape,
    SpanEnd,
    /// A caller-supplied stopping rule fired.
    Stopped,
    StepUnderflow,
    MaxSteps,
}

#[derive(Debug, Clone, PartialEq)]
struct PhaseModel {
    sx: f64,
    sz: f64,
    dense: Arc<Dense<2>>,
}

/// Samples ordered by `t`, with the limits reached at either end.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseTrajectory {
    pub params: Params,
    pub samples: Vec<PhasePoint>,
    pub alpha_limit: Option<FixedPointLabel>,
    pub omega_limit: Option<FixedPointLabel>,
    /// How the backward part ended, if any.
    pub backward_end: Option<PhaseEnd>,
    /// How the forward part ended, if any.
    pub forward_end: Option<PhaseEnd>,
    #[serde(skip)]
    model: Option<PhaseModel>,
}

impl PhaseTrajectory {
    pub fn t_range(&self) -> (f64, f64) {
        (self.samples[0].t, self.samples[self.samples.len() - 1].t)
    }

    /// Log coordinates `(ln|X|, ln|Z|)` of the continuous model at `t`.
    fn eval_log(&self, t: f64) -> Option<[f64; 2]> {
        self.model.as_ref()?.dense.eval(t)
    }

    pub fn eval(&self, t: f64) -> Option<PhasePoint> {
        let m = self.model.as_ref()?;
        let y = m.dense.eval(t)?;
        Some(PhasePoint {
            t,
            x: m.sx * y[0].exp(),
            z: m.sz * y[1].exp(),
        })
    }

    /// `ln u` recovered at `t`.
    pub fn log_u_at(&self, t: f64) -> Option<f64> {
        let y = self.eval_log(t)?;
        Some(log_u(&self.params, t, y[0], y[1]))
    }

    /// Radial state recovered at `t`.
    pub fn radial_at(&self, t: f64) -> Option<RadialState> {
        from_phase(&self.params, &self.eval(t)?).ok()
    }
}

struct Run {
    points: Vec<PhasePoint>,
    segs: Vec<Segment<2>>,
    end: PhaseEnd,
}

fn fixed_point_hit(params: &Params, fld: &Field, p: &PhasePoint, tol: f64) -> Option<FixedPointLabel> {
    let z0 = params.derived().z_n0;
    let spots = [
        (FixedPointLabel::N0, 0.0, z0),
        (FixedPointLabel::O, 0.0, 0.0),
        (FixedPointLabel::A0, fld.a, 0.0),
    ];
    for (label, fx, fz) in spots {
        if (p.x - fx).hypot(p.z - fz) < tol {
            let (rx, rz) = fld.rates(p.x, p.z);
            if (p.x * rx).hypot(p.z * rz) < tol * p.x.hypot(p.z).max(1.0) {
                return Some(label);
            }
        }
    }
    None
}

fn run_phase(
    params: &Params,
    start: &PhasePoint,
    t_end: f64,
    opts: &PhaseOptions,
    stop: &mut dyn FnMut(&PhasePoint) -> bool,
) -> Result<Run> {
    let fld = Field::new(params);
    let (sx, sz) = (start.x.signum(), start.z.signum());
    let sys = move |_t: f64, y: &[f64; 2]| {
        let (rx, rz) = fld.rates(sx * y[0].exp(), sz * y[1].exp());
        [rx, rz]
    };
    run_log_system(params, &sys, start, t_end, opts, stop)
}

/// Drives `sys`, written in `(ln|X|, ln|Z|)`, from `start`.
fn run_log_system<S: Fn(f64, &[f64; 2]) -> [f64; 2]>(
    params: &Params,
    sys: &S,
    start: &PhasePoint,
    t_end: f64,
    opts: &PhaseOptions,
    stop: &mut dyn FnMut(&PhasePoint) -> bool,
) -> Result<Run> {
    if !(start.x * start.z > 0.0) || !start.x.is_finite() || !start.z.is_finite() {
        return Err(Error::InadmissiblePoint { x: start.x, z: start.z });
    }
    let fld = Field::new(params);
    let (sx, sz) = (start.x.signum(), start.z.signum());
    let stepper = StepperOptions {
        rel_tol: opts.rel_tol,
        abs_tol: opts.abs_tol,
        max_steps: opts.max_steps,
        h_max: 5.0,
        ..Default::default()
    };
    let mut points = vec![*start];
    let mut segs = Vec::new();
    let mut end = None;
    let outcome = ode::drive(sys, start.t, [start.x.abs().ln(), start.z.abs().ln()], t_end, &stepper, |seg| {
        segs.push(*seg);
        let y = seg.y1();
        let pt = PhasePoint {
            t: seg.t1(),
            x: sx * y[0].exp(),
            z: sz * y[1].exp(),
        };
        points.push(pt);
        if let Some(label) = fixed_point_hit(params, &fld, &pt, opts.fp_tol) {
            end = Some(PhaseEnd::FixedPoint(label));
        } else if pt.x.abs() > opts.escape_radius || pt.z.abs() > opts.escape_radius {
            end = Some(PhaseEnd::Escape);
        } else if stop(&pt) {
            end = Some(PhaseEnd::Stopped);
        }
        if end.is_some() {
            Control::Stop
        } else {
            Control::Continue
        }
    });
    let end = match (end, outcome.status) {
        (Some(e), _) => e,
        (None, DriveStatus::Finished) => PhaseEnd::SpanEnd,
        (None, DriveStatus::MaxSteps) => PhaseEnd::MaxSteps,
        (None, DriveStatus::Nonfinite) => PhaseEnd::Escape,
        (None, _) => PhaseEnd::StepUnderflow,
    };
    Ok(Run { points, segs, end })
}

fn limit_of(end: PhaseEnd) -> Option<FixedPointLabel> {
    match end {
        PhaseEnd::FixedPoint(l) => Some(l),
        _ => None,
    }
}

fn assemble(params: &Params, start: &PhasePoint, back: Option<Run>, fwd: Option<Run>) -> PhaseTrajectory {
    let mut samples = Vec::new();
    let mut segs = Vec::new();
    let (mut alpha, mut omega, mut bend, mut fend) = (None, None, None, None);
    if let Some(b) = back {
        alpha = limit_of(b.end);
        bend = Some(b.end);
        samples.extend(b.points.into_iter().rev());
        segs.extend(b.segs);
    }
    if let Some(f) = fwd {
        omega = limit_of(f.end);
        fend = Some(f.end);
        let skip = usize::from(!samples.is_empty());
        samples.extend(f.points.into_iter().skip(skip));
        segs.extend(f.segs);
    }
    if samples.is_empty() {
        samples.push(*start);
    }
    PhaseTrajectory {
        params: *params,
        samples,
        alpha_limit: alpha,
        omega_limit: omega,
        backward_end: bend,
        forward_end: fend,
        model: Some(PhaseModel {
            sx: start.x.signum(),
            sz: start.z.signum(),
            dense: Arc::new(Dense::new(segs)),
        }),
    }
}

/// Integrates from `start` (at `t_span.0`) to `t_span.1`, stopping early at
/// a fixed point or on escape.
pub fn integrate_phase(
    params: &Params,
    start: &PhasePoint,
    t_span: (f64, f64),
    opts: &PhaseOptions,
) -> Result<PhaseTrajectory> {
    if !(t_span.0.is_finite() && t_span.1.is_finite()) || (start.t - t_span.0).abs() > 1e-14 * t_span.0.abs().max(1.0) {
        return Err(Error::InvalidSpan(t_span.0, t_span.1));
    }
    let run = run_phase(params, start, t_span.1, opts, &mut |_| false)?;
    Ok(if t_span.1 >= t_span.0 {
        assemble(params, start, None, Some(run))
    } else {
        assemble(params, start, Some(run), None)
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ClassKind {
    /// Orbit on the stable manifold of `A0`: `u ~ c r^{-A}` at infinity.
    ConnectsN0toA0,
    /// Decreasing on `(0, ∞)` with a positive limit at infinity.
    SingularToDecayAtInfinity,
    /// Defined on `(0, ρ)` with `u(ρ) = 0`.
    SingularToVanish,
    /// Defined on `(0, ρ)` with `u' → -∞` at `ρ`.
    SingularToGradientBlowup,
    /// Increasing on `(ρ, ∞)` with `u(ρ) = 0`.
    IncreasingFromVanish,
    /// Increasing on `(ρ, ∞)` with `u' → +∞` at `ρ`.
    IncreasingFromGradientBlowup,
    ConstantSolution,
}

impl ClassKind {
    pub const ALL: [ClassKind; 7] = [
        ClassKind::ConnectsN0toA0,
        ClassKind::SingularToDecayAtInfinity,
        ClassKind::SingularToVanish,
        ClassKind::SingularToGradientBlowup,
        ClassKind::IncreasingFromVanish,
        ClassKind::IncreasingFromGradientBlowup,
        ClassKind::ConstantSolution,
    ];
}

/// `u₀ = lim_{r→0} u`, `l = lim_{r→∞} u`, `ρ` the finite end of the
/// interval of existence, `c = lim r^A u` on the stable manifold and
/// `k = lim r^A |u - l|`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Witnesses {
    pub u0: Option<f64>,
    pub l: Option<f64>,
    pub rho: Option<f64>,
    pub c: Option<f64>,
    pub k: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Classification {
    pub kind: ClassKind,
    pub witnesses: Witnesses,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Seed {
    Radial(RadialState),
    Phase(PhasePoint),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassifyOptions {
    pub phase: PhaseOptions,
    pub radial: IntegrateOptions,
    /// Largest `|t - t_seed|` explored in either direction.
    pub t_horizon: f64,
}

impl Default for ClassifyOptions {
    fn default() -> Self {
        ClassifyOptions {
            phase: PhaseOptions::default(),
            radial: IntegrateOptions::default(),
            t_horizon: 1e4,
        }
    }
}

impl ClassifyOptions {
    pub fn with_tolerances(rel_tol: f64, abs_tol: f64) -> Self {
        ClassifyOptions {
            phase: PhaseOptions {
                rel_tol,
                abs_tol,
                ..Default::default()
            },
            radial: IntegrateOptions::with_tolerances(rel_tol, abs_tol),
            t_horizon: 1e4,
        }
    }
}

/// A classification together with the evidence used for it.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassifiedOrbit {
    pub classification: Classification,
    pub orbit: Option<PhaseTrajectory>,
    pub radial: Option<Trajectory>,
}

/// Decay rate of the slowest mode near a fixed point, used to space the
/// samples handed to the limit estimator.
fn tail_rate(params: &Params, label: FixedPointLabel) -> f64 {
    let fld = Field::new(params);
    match label {
        FixedPointLabel::N0 => (params.q - params.m) / (params.q + 1.0 - params.m),
        FixedPointLabel::O => fld.a.min(fld.xi.abs()),
        FixedPointLabel::A0 => a0_stable_eigenvalue(params).abs(),
    }
}

/// Limit of `f(t, ln|X|, ln|Z|)` along the end of an orbit that converged to
/// `label` at time `t_end`.
fn tail_limit<F>(orbit: &PhaseTrajectory, label: FixedPointLabel, t_end: f64, f: F) -> Option<f64>
where
    F: Fn(f64, [f64; 2]) -> f64,
{
    let (t_lo, t_hi) = orbit.t_range();
    let forward = t_end >= t_hi - 1e-12 * t_hi.abs().max(1.0);
    let dir = if forward { 1.0 } else { -1.0 };
    let rate = tail_rate(&orbit.params, label);
    let mut step = std::f64::consts::LN_2 / rate;
    let span = t_hi - t_lo;
    if 9.0 * step > span {
        step = span / 9.0;
    }
    let mut pts = Vec::new();
    for j in 0..8 {
        let t = t_end - dir * j as f64 * step;
        let y = orbit.eval_log(t)?;
        pts.push(((j + 1) as f64, f(t, y)));
    }
    match estimate_limit(&pts, LimitMode::RToZero) {
        Ok(e) => Some(e.value),
        Err(_) => Some(pts[0].1),
    }
}

fn unclassifiable<T>(why: impl Into<String>) -> Result<T> {
    Err(Error::Unclassifiable(why.into()))
}

/// Limits at `O` reached at `t_end`: `(l, k)`.
fn decay_witnesses(orbit: &PhaseTrajectory, t_end: f64) -> (Option<f64>, Option<f64>) {
    let params = orbit.params;
    let a = params.decay_exponent();
    let l = tail_limit(orbit, FixedPointLabel::O, t_end, |t, y| log_u(&params, t, y[0], y[1]).exp());
    let k = tail_limit(orbit, FixedPointLabel::O, t_end, |t, y| {
        (a * t + y[0] + log_u(&params, t, y[0], y[1])).exp() / a
    });
    (l, k)
}

/// Classifies the solution through `seed` by integrating the phase-plane
/// orbit both ways and locating it relative to the invariant regions.
pub fn classify(params: &Params, seed: &Seed) -> Result<Classification> {
    classify_with(params, seed, &ClassifyOptions::default()).map(|c| c.classification)
}

pub fn classify_with(params: &Params, seed: &Seed, opts: &ClassifyOptions) -> Result<ClassifiedOrbit> {
    params.require(Regime::Supercritical)?;
    let (state, point) = match seed {
        Seed::Radial(s) => {
            if s.du == 0.0 {
                return Ok(ClassifiedOrbit {
                    classification: Classification {
                        kind: ClassKind::ConstantSolution,
                        witnesses: Witnesses {
                            l: Some(s.u),
                            ..Default::default()
                        },
                    },
                    orbit: None,
                    radial: None,
                });
            }
            (*s, to_phase(params, s)?)
        }
        Seed::Phase(p) => (from_phase(params, p)?, *p),
    };
    let dc = params.derived();
    let a = dc.mu_decay;
    let nc = nullclines(params)?;
    let guards = guard_lines(params)?;
    let po = &opts.phase;
    let t0 = point.t;
    if point.x > 0.0 {
        let back = run_phase(params, &point, t0 - opts.t_horizon, po, &mut |_| false)?;
        let back_end = back.end;
        let upper = Line {
            slope: 2.0 * guards.c_star,
            intercept: dc.z_n0,
        };
        let mut region = None;
        let fwd = run_phase(params, &point, t0 + opts.t_horizon, po, &mut |pt| {
            if pt.x > a && pt.z < nc.l_z.at(pt.x) {
                region = Some(ClassKind::SingularToVanish);
            } else if pt.z > upper.at(pt.x) {
                region = Some(ClassKind::SingularToGradientBlowup);
            }
            region.is_some()
        })?;
        let fwd_end = fwd.end;
        let t_fwd = fwd.points.last().unwrap().t;
        let t_back = back.points.last().unwrap().t;
        if region.is_none() {
            if let PhaseEnd::Escape = fwd_end {
                region = None;
            }
        }
        let orbit = assemble(params, &point, Some(back), Some(fwd));
        if back_end != PhaseEnd::FixedPoint(FixedPointLabel::N0) {
            return unclassifiable(format!("backward orbit ended with {back_end:?}"));
        }
        let u0 = tail_limit(&orbit, FixedPointLabel::N0, t_back, |t, y| log_u(params, t, y[0], y[1]).exp());
        let mut w = Witnesses {
            u0,
            ..Default::default()
        };
        let (kind, radial) = match (fwd_end, region) {
            (PhaseEnd::FixedPoint(FixedPointLabel::O), _) => {
                let (l, k) = decay_witnesses(&orbit, t_fwd);
                w.l = l;
                w.k = k;
                (ClassKind::SingularToDecayAtInfinity, None)
            }
            (PhaseEnd::FixedPoint(FixedPointLabel::A0), _) => {
                w.c = tail_limit(&orbit, FixedPointLabel::A0, t_fwd, |t, y| {
                    (a * t + log_u(params, t, y[0], y[1])).exp()
                });
                (ClassKind::ConnectsN0toA0, None)
            }
            (PhaseEnd::Stopped, Some(kind)) | (PhaseEnd::Escape, Some(kind)) => {
                let tr = radial::integrate(params, &state, (state.r, f64::INFINITY), &opts.radial)?;
                let expected = match kind {
                    ClassKind::SingularToVanish => TerminalKind::UVanished,
                    _ => TerminalKind::GradientBlowup,
                };
                if tr.terminal.kind != expected {
                    return unclassifiable(format!(
                        "phase region predicts {kind:?} but radial integration ended with {:?}",
                        tr.terminal.kind
                    ));
                }
                w.rho = tr.terminal.payload;
                (kind, Some(tr))
            }
            (PhaseEnd::Escape, None) => {
                let tr = radial::integrate(params, &state, (state.r, f64::INFINITY), &opts.radial)?;
                let kind = match tr.terminal.kind {
                    TerminalKind::UVanished => ClassKind::SingularToVanish,
                    TerminalKind::GradientBlowup => ClassKind::SingularToGradientBlowup,
                    other => return unclassifiable(format!("escaped orbit, radial integration ended with {other:?}")),
                };
                w.rho = tr.terminal.payload;
                (kind, Some(tr))
            }
            (end, _) => return unclassifiable(format!("forward orbit ended with {end:?}")),
        };
        Ok(ClassifiedOrbit {
            classification: Classification { kind, witnesses: w },
            orbit: Some(orbit),
            radial,
        })
    } else {
        let fwd = run_phase(params, &point, t0 + opts.t_horizon, po, &mut |_| false)?;
        let fwd_end = fwd.end;
        let t_fwd = fwd.points.last().unwrap().t;
        let lower = Line {
            slope: 2.0 * guards.k_star,
            intercept: 0.0,
        };
        let mut region = None;
        let back = run_phase(params, &point, t0 - opts.t_horizon, po, &mut |pt| {
            if pt.z > nc.l_z.at(pt.x) {
                region = Some(ClassKind::IncreasingFromVanish);
            } else if pt.z < lower.at(pt.x) {
                region = Some(ClassKind::IncreasingFromGradientBlowup);
            }
            region.is_some()
        })?;
        let back_end = back.end;
        let orbit = assemble(params, &point, Some(back), Some(fwd));
        if fwd_end != PhaseEnd::FixedPoint(FixedPointLabel::O) {
            return unclassifiable(format!("forward orbit ended with {fwd_end:?}"));
        }
        let (l, k) = decay_witnesses(&orbit, t_fwd);
        let tiny = state.r * 1e-30;
        let tr = radial::integrate(params, &state, (state.r, tiny), &opts.radial)?;
        let from_radial = match tr.terminal.kind {
            TerminalKind::UVanished => Some(ClassKind::IncreasingFromVanish),
            TerminalKind::GradientBlowup => Some(ClassKind::IncreasingFromGradientBlowup),
            _ => None,
        };
        let kind = match (back_end, region, from_radial) {
            (PhaseEnd::Stopped, Some(k1), Some(k2)) if k1 == k2 => k1,
            (PhaseEnd::Stopped, Some(k1), other) => {
                return unclassifiable(format!("phase region predicts {k1:?} but radial integration gives {other:?}"));
            }
            (PhaseEnd::Escape, None, Some(k2)) => k2,
            (end, _, _) => return unclassifiable(format!("backward orbit ended with {end:?}")),
        };
        Ok(ClassifiedOrbit {
            classification: Classification {
                kind,
                witnesses: Witnesses {
                    l,
                    k,
                    rho: tr.terminal.payload,
                    ..Default::default()
                },
            },
            orbit: Some(orbit),
            radial: Some(tr),
        })
    }
}

/// The orbit converging to `A0`, normalized by the scaling so that the
/// corresponding solution has `u(1) = 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct StableManifold {
    pub orbit: PhaseTrajectory,
    pub seed: PhasePoint,
    /// Distance to `N0` at the end of the backward integration.
    pub n0_distance: f64,
    /// `t`-shift of the normalization: `u_norm(r) = e^{-θτ} u(e^τ r)`.
    pub shift: f64,
    /// `lim_{r→0} u_norm`.
    pub u0: f64,
    /// `lim_{r→∞} r^A u_norm`.
    pub c: f64,
    /// Whether the orbit crosses the nullcline `Z_t = 0`.
    pub crosses_l_z: bool,
}

impl StableManifold {
    /// Normalized solution at radius `r`.
    pub fn u_at(&self, r: f64) -> Option<f64> {
        let t = r.ln() + self.shift;
        let y = self.orbit.eval_log(t)?;
        Some(log_u(&self.orbit.params, r.ln(), y[0], y[1]).exp())
    }

    /// Normalized radial state at `r`.
    pub fn state_at(&self, r: f64) -> Option<RadialState> {
        let p = self.orbit.eval(r.ln() + self.shift)?;
        from_phase(&self.orbit.params, &PhasePoint { t: r.ln(), ..p }).ok()
    }

    /// Radius interval where [`Self::u_at`] is defined.
    pub fn r_range(&self) -> (f64, f64) {
        let (a, b) = self.orbit.t_range();
        ((a - self.shift).exp(), (b - self.shift).exp())
    }
}

/// Power series `φ(Z) = Σ_k a_k Z^k` of the stable manifold of `A0` as a
/// graph `X = A + φ(Z)`.
#[derive(Debug, Clone, PartialEq)]
struct ManifoldSeries {
    coef: Vec<f64>,
}

impl ManifoldSeries {
    fn value(&self, z: f64) -> f64 {
        self.coef.iter().rev().fold(0.0, |acc, &a| (acc + a) * z)
    }

    fn slope(&self, z: f64) -> f64 {
        self.coef
            .iter()
            .enumerate()
            .rev()
            .fold(0.0, |acc, (i, &a)| acc * z + (i + 1) as f64 * a)
    }
}

/// Coefficients from matching powers of `Z` in `X' = φ'(Z) Z'`.
fn a0_manifold_series(params: &Params) -> ManifoldSeries {
    const TERMS: usize = 16;
    let fld = Field::new(params);
    let mu1 = a0_stable_eigenvalue(params);
    let mut a = [0.0f64; TERMS + 1];
    for k in 1..=TERMS {
        let mut rhs = if k == 1 { fld.a * fld.inv_m1 } else { a[k - 1] * (fld.inv_m1 - fld.beta * (k - 1) as f64) };
        for i in 1..k {
            let j = k - i;
            rhs += a[i] * a[j] * (1.0 + fld.p * j as f64);
        }
        a[k] = rhs / (mu1 * k as f64 - fld.a);
    }
    ManifoldSeries { coef: a[1..].to_vec() }
}

/// Seeds on the stable manifold of `A0` at distance about `epsilon`
/// (`Z > 0` branch) and integrates backward to `N0` and forward to `A0`.
pub fn stable_manifold_a0(params: &Params, epsilon: f64, opts: &PhaseOptions) -> Result<StableManifold> {
    params.require(Regime::Supercritical)?;
    if !(epsilon > 0.0 && epsilon <= 1e-4) {
        return Err(Error::InvalidArgument(format!("epsilon = {epsilon} not in (0, 1e-4]")));
    }
    let fld = Field::new(params);
    let d = a0_eigen_slope(params);
    let mu1 = a0_stable_eigenvalue(params);
    let graph = a0_manifold_series(params);
    let z0 = epsilon * d;
    let seed = PhasePoint {
        t: 0.0,
        x: fld.a + graph.value(z0),
        z: z0,
    };
    let horizon = 1e4;
    let back = run_phase(params, &seed, -horizon, opts, &mut |_| false)?;
    // Toward A0 the orbit is followed on the graph X = A + φ(Z), where the
    // flow reduces to Z' = Z(μ1 - pφ + βZ).
    let reduced = |_t: f64, y: &[f64; 2]| {
        let z = y[1].exp();
        let phi = graph.value(z);
        let rate = mu1 - fld.p * phi + fld.beta * z;
        [graph.slope(z) * z * rate / (fld.a + phi), rate]
    };
    let fwd = run_log_system(params, &reduced, &seed, horizon, opts, &mut |_| false)?;
    let z_n0 = params.derived().z_n0;
    let last = *back.points.last().unwrap();
    let n0_distance = last.x.hypot(last.z - z_n0);
    if back.end != PhaseEnd::FixedPoint(FixedPointLabel::N0) {
        return Err(Error::ManifoldEscape(format!(
            "backward orbit ended with {:?} at distance {n0_distance:e} from N0",
            back.end
        )));
    }
    if fwd.end != PhaseEnd::FixedPoint(FixedPointLabel::A0) {
        return Err(Error::ManifoldEscape(format!("forward orbit ended with {:?}", fwd.end)));
    }
    let t_back = last.t;
    let t_fwd = fwd.points.last().unwrap().t;
    let orbit = assemble(params, &seed, Some(back), Some(fwd));
    let nc = nullclines(params)?;
    let side = |p: &PhasePoint| p.z > nc.l_z.at(p.x);
    let crosses_l_z = orbit.samples.windows(2).any(|w| side(&w[0]) != side(&w[1]));
    // ln u(e^τ) - θτ depends on the orbit point only: (ln Z + (m-1-q) ln X)/(p+q-m+1).
    let g = |t: f64| -> Option<f64> {
        let y = orbit.eval_log(t)?;
        Some(log_u(params, 0.0, y[0], y[1]))
    };
    let mut lo = t_back;
    let mut hi = t_fwd;
    let (glo, ghi) = (g(lo).unwrap(), g(hi).unwrap());
    if !(glo > 0.0 && ghi < 0.0) {
        return Err(Error::ManifoldEscape("normalization u(1) = 1 not bracketed".into()));
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if g(mid).unwrap() > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-15 * mid.abs().max(1.0) {
            break;
        }
    }
    let shift = 0.5 * (lo + hi);
    let a = fld.a;
    let u0 = tail_limit(&orbit, FixedPointLabel::N0, t_back, |t, y| log_u(params, t - shift, y[0], y[1]).exp())
        .ok_or_else(|| Error::ManifoldEscape("u0 extrapolation failed".into()))?;
    let c = tail_limit(&orbit, FixedPointLabel::A0, t_fwd, |t, y| {
        (a * (t - shift) + log_u(params, t - shift, y[0], y[1])).exp()
    })
    .ok_or_else(|| Error::ManifoldEscape("c extrapolation failed".into()))?;
    Ok(StableManifold {
        orbit,
        seed,
        n0_distance,
        shift,
        u0,
        c,
        crosses_l_z,
    })
}

/// Writes `orbit,t,X,Z` rows for a set of orbits.
pub fn write_orbits_csv<W: std::io::Write>(orbits: &[PhaseTrajectory], out: W) -> std::io::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["orbit", "t", "X", "Z"])?;
    for (i, o) in orbits.iter().enumerate() {
        for p in &o.samples {
            w.write_record([
                i.to_string(),
                format!("{:.16e}", p.t),
                format!("{:.16e}", p.x),
                format!("{:.16e}", p.z),
            ])?;
        }
    }
    w.flush()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn p3213() -> Params {
        Params::new(3.0, 2.0, 1.0, 3.0).unwrap()
    }

    #[test]
    fn field_examples() {
        let p = p3213();
        assert_eq!(vector_field(&p, 1.0, 1.0), (1.0, -2.0));
        assert_eq!(vector_field(&p, 0.0, 1.5), (0.0, 0.0));
        assert_eq!(vector_field(&p, 1.0, 0.0), (0.0, 0.0));
        assert_eq!(vector_field(&p, 7.0, 0.0).1, 0.0);
    }

    #[test]
    fn coordinate_maps() {
        let p = p3213();
        let s = RadialState::new(&p, 1.0, 1.0, -1.0);
        let pt = to_phase(&p, &s).unwrap();
        assert_eq!((pt.t, pt.x, pt.z), (0.0, 1.0, 1.0));
        let back = from_phase(&p, &pt).unwrap();
        assert_eq!((back.r, back.u, back.du), (1.0, 1.0, -1.0));
        assert!(matches!(
            to_phase(&p, &RadialState::new(&p, 1.0, 1.0, 0.0)),
            Err(Error::DegenerateGradient)
        ));
        let inc = from_phase(&p, &PhasePoint { t: 0.3, x: -0.5, z: -2.0 }).unwrap();
        assert!(inc.du > 0.0);
        assert!(matches!(
            from_phase(&p, &PhasePoint { t: 0.0, x: 1.0, z: -1.0 }),
            Err(Error::InadmissiblePoint { .. })
        ));
    }

    #[test]
    fn nullcline_and_guard_values() {
        let p = p3213();
        let nc = nullclines(&p).unwrap();
        assert_eq!((nc.l_x.slope, nc.l_x.intercept), (-1.0, 1.0));
        assert_eq!((nc.l_z.slope, nc.l_z.intercept), (0.5, 1.5));
        for i in 0..20 {
            let x = 0.1 * i as f64;
            assert!(vector_field(&p, x, nc.l_x.at(x)).0.abs() < 1e-14);
            assert!(vector_field(&p, x, nc.l_z.at(x)).1.abs() < 1e-14);
        }
        let g = guard_lines(&p).unwrap();
        assert_eq!((g.c_star, g.k_star), (2.0, 2.0));
        assert!(g.sampled_ok);
        let xs: Vec<f64> = (0..100).map(|i| 1e-3 * 1e6f64.powf(i as f64 / 99.0)).collect();
        assert!(xs.iter().any(|&x| upper_guard_margin(&p, g.c_star / 10.0, x) < 0.0));
        assert!(xs.iter().any(|&x| lower_guard_margin(&p, g.k_star / 10.0, -x) < 0.0));
    }

    #[test]
    fn unstable_direction_at_n0() {
        let p = p3213();
        let c = crate::params::n0_eigen_slope(&p);
        let eps = 1e-6;
        let start = PhasePoint {
            t: 0.0,
            x: eps,
            z: 1.5 + c * eps,
        };
        let tr = integrate_phase(&p, &start, (0.0, 3.0), &PhaseOptions::default()).unwrap();
        assert!(tr.samples.windows(2).all(|w| w[1].x > w[0].x));
    }

    #[test]
    fn manifold_reaches_n0() {
        let p = p3213();
        let sm = stable_manifold_a0(&p, 1e-4, &PhaseOptions::default()).unwrap();
        assert!(sm.n0_distance < 1e-6);
        assert_eq!(sm.orbit.alpha_limit, Some(FixedPointLabel::N0));
        assert_eq!(sm.orbit.omega_limit, Some(FixedPointLabel::A0));
        assert!(sm.orbit.samples.windows(2).all(|w| w[1].x > w[0].x));
        assert_relative_eq!(sm.u_at(1.0).unwrap(), 1.0, max_relative = 1e-12);
        assert!(sm.u0 > 1.0 && sm.c > 0.0 && sm.c.is_finite());
    }

    #[test]
    fn classify_constant_and_decreasing() {
        let p = p3213();
        let c = classify(&p, &Seed::Radial(RadialState::new(&p, 2.0, 3.0, 0.0))).unwrap();
        assert_eq!(c.kind, ClassKind::ConstantSolution);
        assert_eq!(c.witnesses.l, Some(3.0));
        let c = classify(&p, &Seed::Phase(PhasePoint { t: 0.0, x: 0.3, z: 0.2 })).unwrap();
        assert_eq!(c.kind, ClassKind::SingularToDecayAtInfinity);
        assert!(c.witnesses.u0.unwrap() > 0.0 && c.witnesses.l.unwrap() > 0.0 && c.witnesses.k.unwrap() > 0.0);
        let c = classify(&p, &Seed::Phase(PhasePoint { t: 0.0, x: 0.5, z: 8.0 })).unwrap();
        assert_eq!(c.kind, ClassKind::SingularToGradientBlowup);
        assert!(c.witnesses.rho.unwrap() > 1.0);
        let c = classify(&p, &Seed::Phase(PhasePoint { t: 0.0, x: 3.0, z: 0.1 })).unwrap();
        assert_eq!(c.kind, ClassKind::SingularToVanish);
    }

    #[test]
    fn classify_increasing() {
        let p = p3213();
        let c = classify(&p, &Seed::Phase(PhasePoint { t: 0.0, x: -3.0, z: -0.05 })).unwrap();
        assert_eq!(c.kind, ClassKind::IncreasingFromVanish);
        assert!(c.witnesses.rho.unwrap() < 1.0);
        let c = classify(&p, &Seed::Phase(PhasePoint { t: 0.0, x: -0.1, z: -5.0 })).unwrap();
        assert_eq!(c.kind, ClassKind::IncreasingFromGradientBlowup);
    }

    fn supercritical() -> impl Strategy<Value = Params> {
        (3u32..7, 0.05f64..0.95, 0.05f64..2.0, 0.0f64..2.0).prop_map(|(n, fm, dq, p)| {
            let m = 1.1 + fm * (n as f64 - 1.3).min(3.0);
            Params::new(n as f64, m, p, m + dq).unwrap()
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn roundtrip(p in supercritical(), r in 0.01f64..100.0, u in 0.01f64..100.0, du in -50.0f64..50.0) {
            prop_assume!(du.abs() > 1e-3);
            let s = RadialState::new(&p, r, u, du);
            let back = from_phase(&p, &to_phase(&p, &s).unwrap()).unwrap();
            prop_assert!((back.r - r).abs() <= 1e-12 * r);
            prop_assert!((back.u - u).abs() <= 1e-12 * u);
            prop_assert!((back.du - du).abs() <= 1e-12 * du.abs());
        }

        #[test]
        fn jacobian_matches_linearization(p in supercritical()) {
            for label in FixedPointLabel::ALL {
                let fp = crate::params::linearize(&p, label).unwrap();
                let (l1, l2) = fp.eigenvalues.unwrap();
                let (e1, e2) = jacobian_eigenvalues(&p, fp.location.0, fp.location.1, 1e-6).unwrap();
                let (lo, hi) = (l1.min(l2), l1.max(l2));
                prop_assert!((e1 - lo).abs() <= 1e-8 * lo.abs().max(1e-300));
                prop_assert!((e2 - hi).abs() <= 1e-8 * hi.abs().max(1e-300));
            }
        }

        #[test]
        fn orbits_keep_signs_and_follow_field(p in supercritical(), x in 0.05f64..5.0, z in 0.05f64..5.0, neg in any::<bool>()) {
            let s = if neg { -1.0 } else { 1.0 };
            let start = PhasePoint { t: 0.0, x: s * x, z: s * z };
            let opts = PhaseOptions::default();
            for end in [-5.0, 5.0] {
                let tr = integrate_phase(&p, &start, (0.0, end), &opts).unwrap();
                for w in tr.samples.windows(2) {
                    prop_assert!(w[1].x.signum() == s && w[1].z.signum() == s);
                    let mid = tr.eval(0.5 * (w[0].t + w[1].t)).unwrap();
                    let (fx, fz) = vector_field(&p, mid.x, mid.z);
                    let dot = (w[1].x - w[0].x) * fx + (w[1].z - w[0].z) * fz;
                    prop_assert!(dot * (w[1].t - w[0].t) >= 0.0);
                }
            }
        }
    }
}
