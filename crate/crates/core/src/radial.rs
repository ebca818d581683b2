//! The radial ODE `(r^{N-1}|u'|^{m-2}u')' + r^{N-1} u^p |u'|^q = 0`.
//!
//! Integration runs on the state `(u, W)` with the flux
//! `W = r^{N-1}|u'|^{m-2}u'`, which keeps the right-hand side regular where
//! `u'` vanishes. Internally the independent variable is `t = ln r`, so a
//! decade of radius costs the same number of steps near the origin as far
//! from it.

use std::io;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ode::{self, Control, Dense, DriveStatus, Segment, StepperOptions};
use crate::params::{Params, Regime};

/// `u^p` extended to `u <= 0`: zero for `p > 0`, one for `p = 0`, infinite
/// for `p < 0`.
#[inline]
pub fn upow(u: f64, p: f64) -> f64 {
    if p == 0.0 {
        1.0
    } else if u > 0.0 {
        u.powf(p)
    } else if p > 0.0 {
        0.0
    } else {
        f64::INFINITY
    }
}

/// `r^{N-1}|du|^{m-2}du`.
#[inline]
pub fn flux(params: &Params, r: f64, du: f64) -> f64 {
    if du == 0.0 {
        return 0.0;
    }
    r.powf(params.nf() - 1.0) * du.abs().powf(params.m - 1.0) * du.signum()
}

/// Inverse of [`flux`] in `du`.
#[inline]
pub fn flux_to_du(params: &Params, r: f64, w: f64) -> f64 {
    if w == 0.0 {
        return 0.0;
    }
    w.signum() * (w.abs() * r.powf(1.0 - params.nf())).powf(1.0 / (params.m - 1.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadialState {
    pub r: f64,
    pub u: f64,
    pub du: f64,
    #[serde(rename = "W")]
    pub w: f64,
}

impl RadialState {
    /// State from `(r, u, u')`, computing the flux.
    pub fn new(params: &Params, r: f64, u: f64, du: f64) -> RadialState {
        RadialState {
            r,
            u,
            du,
            w: flux(params, r, du),
        }
    }

    /// State from `(r, u, W)`, computing `u'`.
    pub fn from_flux(params: &Params, r: f64, u: f64, w: f64) -> RadialState {
        RadialState {
            r,
            u,
            du: flux_to_du(params, r, w),
            w,
        }
    }

    fn is_consistent(&self, params: &Params) -> bool {
        let w = flux(params, self.r, self.du);
        (w - self.w).abs() <= 1e-12 * w.abs().max(self.w.abs()) || (w == 0.0 && self.w == 0.0)
    }
}

/// `(u', W')` at a state.
pub fn rhs(params: &Params, state: &RadialState) -> Result<(f64, f64)> {
    if !(state.r > 0.0) {
        return Err(Error::NonpositiveRadius(state.r));
    }
    let du = flux_to_du(params, state.r, state.w);
    let dw = -state.r.powf(params.nf() - 1.0) * upow(state.u, params.p) * du.abs().powf(params.q);
    Ok((du, if du == 0.0 { 0.0 } else { dw }))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TerminalKind {
    ReachedSpanEnd,
    UVanished,
    GradientBlowup,
    GradientVanished,
    ConvergedToLimit,
    StepUnderflow,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TerminalEvent {
    pub kind: TerminalKind,
    pub location: f64,
    /// Limit `l` for [`TerminalKind::ConvergedToLimit`], estimated radius
    /// `ρ` for [`TerminalKind::UVanished`] and [`TerminalKind::GradientBlowup`].
    pub payload: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegrateOptions {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_steps: usize,
    /// `u_floor = u_floor_rel · u(r_start)`.
    pub u_floor_rel: f64,
    /// Blow-up is declared at `|u'| >= du_ceiling`, or earlier once the predicted
    /// distance to the blow-up radius drops below `1e-11 r`.
    pub du_ceiling: f64,
    /// `du_floor = du_floor_rel · max(|u'|, u/r)` at the start.
    pub du_floor_rel: f64,
    /// Relative accuracy of event locations in `r`.
    pub event_tol: f64,
    /// Stand-in for `r = ∞` in direct integration.
    pub r_infinity: f64,
}

impl Default for IntegrateOptions {
    fn default() -> Self {
        IntegrateOptions {
            rel_tol: 1e-10,
            abs_tol: 1e-12,
            max_steps: 1_000_000,
            u_floor_rel: 1e-12,
            du_ceiling: 1e10,
            du_floor_rel: 1e-14,
            event_tol: 1e-10,
            r_infinity: 1e6,
        }
    }
}

impl IntegrateOptions {
    pub fn with_tolerances(rel_tol: f64, abs_tol: f64) -> Self {
        IntegrateOptions {
            rel_tol,
            abs_tol,
            ..Default::default()
        }
    }

    fn stepper(&self) -> StepperOptions {
        StepperOptions {
            rel_tol: self.rel_tol,
            abs_tol: self.abs_tol,
            max_steps: self.max_steps,
            ..Default::default()
        }
    }
}

/// Continuous representation of an integrated solution.
#[derive(Debug, Clone, PartialEq)]
enum Model {
    /// Variable `t = ln r`, state `(u/su, W/sw)`.
    Log { pieces: Arc<Dense<2>>, su: f64, sw: f64 },
    /// Variable `s = r^{-A}`, state `(u, W)`.
    Infinity { pieces: Arc<Dense<2>>, a: f64 },
    Scaled { inner: Arc<Model>, lambda: f64, theta: f64 },
}

/// Queries within rounding of a step node are evaluated at the node, where
/// the dense output agrees with the field.
fn snap_to_node(seg: &Segment<2>, t: f64, tol: f64) -> f64 {
    if (t - seg.t0).abs() <= tol {
        seg.t0
    } else if (t - seg.t1()).abs() <= tol {
        seg.t1()
    } else {
        t
    }
}

/// Point value of a model: `(u, W, u', dW/dr)`.
type Jet = (f64, f64, f64, f64);

impl Model {
    fn eval(&self, params: &Params, r: f64) -> Option<Jet> {
        match self {
            Model::Log { pieces, su, sw } => {
                let t = r.ln();
                let seg = pieces.find(t)?;
                let t = snap_to_node(seg, t, 4.0 * f64::EPSILON * (1.0 + t.abs()));
                let y = seg.eval(t);
                let dy = seg.deriv(t);
                let w = sw * y[1];
                Some((su * y[0], w, flux_to_du(params, r, w), sw * dy[1] / r))
            }
            Model::Infinity { pieces, a } => {
                let s = r.powf(-a);
                let seg = pieces.find(s)?;
                let s = snap_to_node(seg, s, 4.0 * f64::EPSILON * (1.0 + a) * s);
                let y = seg.eval(s);
                let dy = seg.deriv(s);
                Some((y[0], y[1], flux_to_du(params, r, y[1]), dy[1] * (-a * s / r)))
            }
            Model::Scaled { inner, lambda, theta } => {
                let (u, w, du, dw) = inner.eval(params, lambda * r)?;
                let n = params.nf();
                let m = params.m;
                let wf = lambda.powf(1.0 - n + (1.0 - theta) * (m - 1.0));
                Some((
                    lambda.powf(-theta) * u,
                    wf * w,
                    lambda.powf(1.0 - theta) * du,
                    lambda * wf * dw,
                ))
            }
        }
    }
}

/// Samples of a solution, ordered by increasing `r`, with the event that
/// ended the integration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub params: Params,
    pub terminal: TerminalEvent,
    pub samples: Vec<RadialState>,
    #[serde(skip)]
    model: Option<Model>,
}

impl Trajectory {
    pub fn first(&self) -> &RadialState {
        &self.samples[0]
    }

    pub fn last(&self) -> &RadialState {
        &self.samples[self.samples.len() - 1]
    }

    /// Radius interval covered by the samples.
    pub fn r_range(&self) -> (f64, f64) {
        (self.first().r, self.last().r)
    }

    /// Interpolated state at `r`; `None` outside the integrated range or
    /// for trajectories without a continuous model (e.g. deserialized ones).
    pub fn eval(&self, r: f64) -> Option<RadialState> {
        let (u, w, du, _) = self.model.as_ref()?.eval(&self.params, r)?;
        Some(RadialState { r, u, du, w })
    }

    /// Defect `r^{1-N} W' + u^p |u'|^q` of the continuous model at `r`,
    /// together with the magnitude of the larger of the two terms.
    pub fn residual(&self, r: f64) -> Option<(f64, f64)> {
        let (u, _, du, dw) = self.model.as_ref()?.eval(&self.params, r)?;
        let a = r.powf(1.0 - self.params.nf()) * dw;
        let b = upow(u, self.params.p) * du.abs().powf(self.params.q);
        Some((a + b, a.abs().max(b.abs())))
    }

    /// JSON envelope `{schema, params, terminal, samples}`.
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "schema": "1",
            "params": self.params,
            "terminal": self.terminal,
            "samples": self.samples,
        })
    }

    /// CSV with columns `r,u,du,W` in 17 significant digits.
    pub fn write_csv<W: io::Write>(&self, out: W) -> io::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["r", "u", "du", "W"])?;
        for s in &self.samples {
            w.write_record([s.r, s.u, s.du, s.w].map(|v| format!("{v:.16e}")))?;
        }
        w.flush()
    }
}

fn check_init(params: &Params, init: &RadialState) -> Result<()> {
    if !(init.r > 0.0) {
        return Err(Error::NonpositiveRadius(init.r));
    }
    if !(init.u.is_finite() && init.du.is_finite() && init.w.is_finite()) {
        return Err(Error::NonfiniteState(init.r));
    }
    if init.u < 0.0 {
        return Err(Error::InvalidArgument(format!("u = {} is negative", init.u)));
    }
    if !init.is_consistent(params) {
        return Err(Error::InvalidArgument("W does not match r, u'".into()));
    }
    Ok(())
}

const BLOWUP_REL_GAP: f64 = 1e-11;

/// Estimated blow-up radius beyond a point where `|u'|` is already huge,
/// from the leading balance `(m-1)|u'|^{m-2}u'' ≈ ±u^p|u'|^q`.
fn blowup_offset(params: &Params, u: f64, du: f64) -> f64 {
    let k = params.q + 1.0 - params.m;
    (params.m - 1.0) * du.abs().powf(-k) / (k * upow(u, params.p))
}

/// Integrates from `init` (at `span.0`) toward `span.1`, which may be
/// smaller than `span.0` or `f64::INFINITY`.
pub fn integrate(
    params: &Params,
    init: &RadialState,
    span: (f64, f64),
    opts: &IntegrateOptions,
) -> Result<Trajectory> {
    let (r0, r1) = span;
    if !(r0 > 0.0 && r1 > 0.0 && r0.is_finite()) || r1.is_nan() {
        return Err(Error::InvalidSpan(r0, r1));
    }
    check_init(params, init)?;
    if (init.r - r0).abs() > 1e-14 * r0 {
        return Err(Error::InvalidSpan(r0, r1));
    }
    let to_infinity = r1.is_infinite() || r1 >= opts.r_infinity;
    let r_end = if to_infinity { opts.r_infinity.max(r0) } else { r1 };
    let forward = r_end >= r0;
    let u_floor = opts.u_floor_rel * init.u;
    let du_floor = opts.du_floor_rel * init.du.abs().max(init.u / init.r);
    let p = *params;
    let n = params.nf();
    // Unknowns are measured in units of their initial size, so the step
    // sequence does not depend on the scale of the data.
    let su = init.u;
    let sw = if init.w != 0.0 { init.w.abs() } else { 1.0 };
    let sys = move |t: f64, y: &[f64; 2]| {
        let r = t.exp();
        let du = flux_to_du(&p, r, sw * y[1]);
        let dw = if du == 0.0 {
            0.0
        } else {
            -r.powf(n) * upow(su * y[0], p.p) * du.abs().powf(p.q)
        };
        [r * du / su, dw / sw]
    };
    let mut samples = vec![*init];
    let mut segs: Vec<Segment<2>> = Vec::new();
    let mut event: Option<TerminalEvent> = None;
    let ttol = opts.event_tol;
    let state_at = |seg: &Segment<2>, t: f64| {
        let y = seg.eval(t);
        RadialState::from_flux(&p, t.exp(), su * y[0], sw * y[1])
    };
    let outcome = ode::drive(&sys, r0.ln(), [1.0, init.w / sw], r_end.ln(), &opts.stepper(), |seg| {
        let y0 = seg.y0();
        let y1 = seg.y1();
        let du_at = |t: f64, y: &[f64; 2]| flux_to_du(&p, t.exp(), sw * y[1]).abs();
        let mut hits: Vec<(f64, TerminalKind)> = Vec::new();
        // A zero closer than the resolvable gap counts as reached.
        let above_floor = |t: f64, y: &[f64; 2]| {
            let u = su * y[0];
            u - u_floor.max(BLOWUP_REL_GAP * t.exp() * du_at(t, y))
        };
        if above_floor(seg.t0, &y0) > 0.0 && above_floor(seg.t1(), &y1) <= 0.0 {
            if let Some(t) = seg.locate(above_floor, ttol) {
                hits.push((t, TerminalKind::UVanished));
            }
        }
        // Beyond this the remaining distance to the blow-up radius is no
        // longer resolvable in double precision.
        let ceiling = |t: f64, y: &[f64; 2]| {
            let k = p.q + 1.0 - p.m;
            let near = ((p.m - 1.0) / (k * upow(su * y[0], p.p) * t.exp() * BLOWUP_REL_GAP)).powf(1.0 / k);
            opts.du_ceiling.min(near)
        };
        let g0 = du_at(seg.t0, &y0) - ceiling(seg.t0, &y0);
        let g1 = du_at(seg.t1(), &y1) - ceiling(seg.t1(), &y1);
        if g0 < 0.0 && g1 >= 0.0 {
            if let Some(t) = seg.locate(|t, y| du_at(t, y) - ceiling(t, y), ttol) {
                hits.push((t, TerminalKind::GradientBlowup));
            }
        }
        if g0 > du_floor && g1 <= du_floor {
            if let Some(t) = seg.locate(|t, y| du_at(t, y) - du_floor, ttol) {
                let kind = if to_infinity {
                    TerminalKind::ConvergedToLimit
                } else {
                    TerminalKind::GradientVanished
                };
                hits.push((t, kind));
            }
        }
        segs.push(*seg);
        let first = hits.into_iter().min_by(|a, b| {
            let key = |t: f64| if forward { t } else { -t };
            key(a.0).total_cmp(&key(b.0))
        });
        match first {
            Some((t, kind)) => {
                let s = state_at(seg, t);
                let payload = match kind {
                    TerminalKind::UVanished => Some(s.r - s.u / s.du),
                    TerminalKind::GradientBlowup => {
                        let off = blowup_offset(&p, s.u, s.du);
                        Some(if forward { s.r + off } else { s.r - off })
                    }
                    TerminalKind::ConvergedToLimit => Some(s.u + s.du * s.r / p.decay_exponent()),
                    _ => None,
                };
                samples.push(s);
                event = Some(TerminalEvent {
                    kind,
                    location: s.r,
                    payload,
                });
                Control::Stop
            }
            None => {
                samples.push(RadialState::from_flux(&p, seg.t1().exp(), su * y1[0], sw * y1[1]));
                Control::Continue
            }
        }
    });
    let terminal = match (event, outcome.status) {
        (Some(e), _) => e,
        (None, DriveStatus::Finished) => {
            let last = samples.last_mut().unwrap();
            last.r = r_end;
            if to_infinity {
                TerminalEvent {
                    kind: TerminalKind::ConvergedToLimit,
                    location: r_end,
                    payload: Some(last.u + last.du * last.r / params.decay_exponent()),
                }
            } else {
                TerminalEvent {
                    kind: TerminalKind::ReachedSpanEnd,
                    location: r_end,
                    payload: None,
                }
            }
        }
        (None, DriveStatus::Nonfinite) => return Err(Error::NonfiniteState(outcome.t.exp())),
        (None, _) => TerminalEvent {
            kind: TerminalKind::StepUnderflow,
            location: outcome.t.exp(),
            payload: None,
        },
    };
    if !forward {
        samples.reverse();
    }
    Ok(Trajectory {
        params: *params,
        terminal,
        samples,
        model: Some(Model::Log {
            pieces: Arc::new(Dense::new(segs)),
            su,
            sw,
        }),
    })
}

/// Image of a trajectory under `u ↦ λ^{-θ} u(λ r)`, `θ = (q-m)/(p+q+1-m)`.
pub fn scale_solution(traj: &Trajectory, lambda: f64) -> Result<Trajectory> {
    if !(lambda > 0.0) || !lambda.is_finite() {
        return Err(Error::NonpositiveLambda(lambda));
    }
    if lambda == 1.0 {
        return Ok(traj.clone());
    }
    let params = &traj.params;
    let theta = params.scaling_exponent();
    let su = lambda.powf(-theta);
    let sdu = lambda.powf(1.0 - theta);
    let samples = traj
        .samples
        .iter()
        .map(|s| RadialState::new(params, s.r / lambda, su * s.u, sdu * s.du))
        .collect();
    let payload = match traj.terminal.kind {
        TerminalKind::ConvergedToLimit => traj.terminal.payload.map(|l| su * l),
        _ => traj.terminal.payload.map(|rho| rho / lambda),
    };
    Ok(Trajectory {
        params: *params,
        terminal: TerminalEvent {
            kind: traj.terminal.kind,
            location: traj.terminal.location / lambda,
            payload,
        },
        samples,
        model: traj.model.clone().map(|inner| Model::Scaled {
            inner: Arc::new(inner),
            lambda,
            theta,
        }),
    })
}

/// Solution with prescribed behaviour at infinity,
/// `u(r) = l + c r^{-A} + o(r^{-A})`, `A = (N-m)/(m-1)`, integrated in
/// `s = r^{-A}` from `s = 0` to `s_span.1` and returned in `r`.
pub fn integrate_at_infinity(
    params: &Params,
    l: f64,
    c: f64,
    s_span: (f64, f64),
    opts: &IntegrateOptions,
) -> Result<Trajectory> {
    params.require(Regime::Supercritical)?;
    if !(l >= 0.0) || (l == 0.0 && !(c > 0.0)) || !c.is_finite() {
        return Err(Error::SignViolation { l, c });
    }
    let (s0, s1) = s_span;
    if !(s0 == 0.0 && s1 > 0.0 && s1.is_finite()) {
        return Err(Error::InvalidSpan(s0, s1));
    }
    let a = params.decay_exponent();
    let n = params.nf();
    let m = params.m;
    let p = *params;
    // W is r-independent here: W = -A^{m-1}|ũ_s|^{m-2}ũ_s.
    let am1 = a.powf(m - 1.0);
    let grad_s = move |w: f64| -> f64 {
        if w == 0.0 {
            0.0
        } else {
            -w.signum() * (w.abs() / am1).powf(1.0 / (m - 1.0))
        }
    };
    let r_pow = (n - 1.0) * (p.q - m) / (n - m);
    let coef = a.powf(p.q - 1.0);
    let sys = move |s: f64, y: &[f64; 2]| {
        let us = grad_s(y[1]);
        let dw = if us == 0.0 {
            0.0
        } else {
            coef * s.powf(r_pow) * upow(y[0], p.p) * us.abs().powf(p.q)
        };
        [us, dw]
    };
    let w0 = -am1 * c.abs().powf(m - 2.0) * c;
    let w0 = if c == 0.0 { 0.0 } else { w0 };
    let r_of = |s: f64| s.powf(-1.0 / a);
    let state_of = |s: f64, y: [f64; 2]| RadialState::from_flux(&p, r_of(s), y[0], y[1]);
    let u_floor = opts.u_floor_rel * l.max(c.abs() * s1);
    let mut samples = Vec::new();
    let mut segs: Vec<Segment<2>> = Vec::new();
    let mut event: Option<TerminalEvent> = None;
    let ttol = opts.event_tol * s1;
    let stepper = StepperOptions {
        rel_tol: opts.rel_tol,
        abs_tol: opts.abs_tol,
        max_steps: opts.max_steps,
        h_init: Some(1e-3 * s1),
        ..Default::default()
    };
    let outcome = ode::drive(&sys, 0.0, [l, w0], s1, &stepper, |seg| {
        let y0 = seg.y0();
        let y1 = seg.y1();
        let du_at = |s: f64, y: &[f64; 2]| flux_to_du(&p, r_of(s), y[1]).abs();
        let mut hit: Option<(f64, TerminalKind)> = None;
        if y0[0] > u_floor && y1[0] <= u_floor {
            hit = seg
                .locate(|_, y| y[0] - u_floor, ttol)
                .map(|s| (s, TerminalKind::UVanished));
        }
        if seg.t0 > 0.0 && du_at(seg.t0, &y0) < opts.du_ceiling && du_at(seg.t1(), &y1) >= opts.du_ceiling {
            if let Some(s) = seg.locate(|s, y| du_at(s, y) - opts.du_ceiling, ttol) {
                if hit.is_none_or(|h| s < h.0) {
                    hit = Some((s, TerminalKind::GradientBlowup));
                }
            }
        }
        segs.push(*seg);
        match hit {
            Some((s, kind)) => {
                let st = state_of(s, seg.eval(s));
                let payload = match kind {
                    TerminalKind::UVanished => st.r - st.u / st.du,
                    _ => st.r - blowup_offset(&p, st.u, st.du),
                };
                samples.push(st);
                event = Some(TerminalEvent {
                    kind,
                    location: st.r,
                    payload: Some(payload),
                });
                Control::Stop
            }
            None => {
                samples.push(state_of(seg.t1(), y1));
                Control::Continue
            }
        }
    });
    let terminal = match (event, outcome.status) {
        (Some(e), _) => e,
        (None, DriveStatus::Finished) => TerminalEvent {
            kind: TerminalKind::ReachedSpanEnd,
            location: r_of(s1),
            payload: None,
        },
        (None, DriveStatus::Nonfinite) => return Err(Error::NonfiniteState(r_of(outcome.t))),
        (None, _) => TerminalEvent {
            kind: TerminalKind::StepUnderflow,
            location: r_of(outcome.t),
            payload: None,
        },
    };
    samples.reverse();
    Ok(Trajectory {
        params: *params,
        terminal,
        samples,
        model: Some(Model::Infinity {
            pieces: Arc::new(Dense::new(segs)),
            a,
        }),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn p3213() -> Params {
        Params::new(3.0, 2.0, 1.0, 3.0).unwrap()
    }

    #[test]
    fn rhs_examples() {
        let p = p3213();
        let s = RadialState::from_flux(&p, 1.0, 1.0, -1.0);
        assert_eq!(rhs(&p, &s).unwrap(), (-1.0, -1.0));
        let rest = RadialState::from_flux(&p, 2.0, 1.0, 0.0);
        assert_eq!(rhs(&p, &rest).unwrap(), (0.0, 0.0));
        let s = RadialState::from_flux(&p, 2.0, 1.0, 3.0);
        assert_relative_eq!(s.du, 3.0 / 4.0);
        assert!(matches!(
            rhs(&p, &RadialState::from_flux(&p, 0.0, 1.0, 1.0)),
            Err(Error::NonpositiveRadius(_))
        ));
    }

    #[test]
    fn flux_roundtrip_general_m() {
        let p = Params::new(4.0, 2.5, 1.0, 3.0).unwrap();
        for &du in &[-3.0, -1e-3, 0.5, 7.0] {
            let w = flux(&p, 1.7, du);
            assert_relative_eq!(flux_to_du(&p, 1.7, w), du, max_relative = 1e-14);
        }
    }

    #[test]
    fn constant_solution_reaches_span_end() {
        let p = p3213();
        let init = RadialState::new(&p, 1.0, 1.0, 0.0);
        let tr = integrate(&p, &init, (1.0, 10.0), &IntegrateOptions::default()).unwrap();
        assert_eq!(tr.terminal.kind, TerminalKind::ReachedSpanEnd);
        assert!(tr.samples.iter().all(|s| s.u == 1.0 && s.du == 0.0));
    }

    #[test]
    fn decreasing_seed_hits_an_event_or_decays() {
        let p = p3213();
        let init = RadialState::new(&p, 1.0, 1.0, -1.0);
        let tr = integrate(&p, &init, (1.0, f64::INFINITY), &IntegrateOptions::default()).unwrap();
        assert!(matches!(
            tr.terminal.kind,
            TerminalKind::UVanished | TerminalKind::GradientBlowup | TerminalKind::ConvergedToLimit
        ));
        for w in tr.samples.windows(2) {
            assert!(w[1].r > w[0].r);
            assert!(w[1].w <= w[0].w);
            assert!(w[1].u <= w[0].u);
        }
    }

    #[test]
    fn backward_integration_sorts_samples() {
        let p = p3213();
        let init = RadialState::new(&p, 1.0, 1.0, -0.1);
        let tr = integrate(&p, &init, (1.0, 0.01), &IntegrateOptions::default()).unwrap();
        assert_eq!(tr.terminal.kind, TerminalKind::ReachedSpanEnd);
        assert_eq!(tr.first().r, 0.01);
        assert_eq!(tr.last().r, 1.0);
        let mid = tr.eval(0.1).unwrap();
        let (d, scale) = tr.residual(0.1).unwrap();
        assert!(d.abs() <= 1e-7 * scale, "{d} {scale}");
        assert!(mid.u > 1.0);
    }

    #[test]
    fn scaling_group_property() {
        let p = p3213();
        let init = RadialState::new(&p, 1.0, 1.0, -0.1);
        let tr = integrate(&p, &init, (1.0, 3.0), &IntegrateOptions::default()).unwrap();
        let id = scale_solution(&tr, 1.0).unwrap();
        assert_eq!(id.samples, tr.samples);
        let back = scale_solution(&scale_solution(&tr, 3.7).unwrap(), 1.0 / 3.7).unwrap();
        for (a, b) in back.samples.iter().zip(&tr.samples) {
            assert_relative_eq!(a.r, b.r, max_relative = 1e-12);
            assert_relative_eq!(a.u, b.u, max_relative = 1e-12);
            assert_relative_eq!(a.du, b.du, max_relative = 1e-12);
        }
        assert!(matches!(scale_solution(&tr, 0.0), Err(Error::NonpositiveLambda(_))));
    }

    #[test]
    fn at_infinity_constant_and_sign_rules() {
        let p = p3213();
        let o = IntegrateOptions::default();
        let tr = integrate_at_infinity(&p, 2.0, 0.0, (0.0, 1.0), &o).unwrap();
        assert!(tr.samples.iter().all(|s| s.u == 2.0 && s.du == 0.0));
        assert!(matches!(
            integrate_at_infinity(&p, 0.0, -1.0, (0.0, 1.0), &o),
            Err(Error::SignViolation { .. })
        ));
        assert!(matches!(
            integrate_at_infinity(&p, 0.0, 0.0, (0.0, 1.0), &o),
            Err(Error::SignViolation { .. })
        ));
    }

    #[test]
    fn at_infinity_matches_direct_integration() {
        let p = p3213();
        let o = IntegrateOptions::default();
        let tr = integrate_at_infinity(&p, 1.0, 1.0, (0.0, 0.1), &o).unwrap();
        assert_eq!(tr.terminal.kind, TerminalKind::ReachedSpanEnd);
        let start = tr.eval(10.0).unwrap();
        let direct = integrate(&p, &start, (10.0, 1000.0), &o).unwrap();
        let far = tr.eval(1000.0).unwrap();
        assert_relative_eq!(direct.last().u, far.u, max_relative = 1e-9);
        assert_relative_eq!(direct.last().du, far.du, max_relative = 1e-7);
        let near = tr.eval(1e4).unwrap();
        assert_relative_eq!(1e4 * (near.u - 1.0), 1.0, max_relative = 1e-3);
    }

    #[test]
    fn serialization() {
        let p = p3213();
        let init = RadialState::new(&p, 1.0, 1.0, -0.1);
        let tr = integrate(&p, &init, (1.0, 1.5), &IntegrateOptions::default()).unwrap();
        let mut buf = Vec::new();
        tr.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("r,u,du,W\n1.0000000000000000e0,"));
        let v = tr.to_json();
        assert_eq!(v["schema"], "1");
        assert_eq!(v["params"]["N"], 3);
        assert_eq!(v["samples"][0]["W"], -0.1);
    }

    #[test]
    fn negative_power_vanishes_with_steep_gradient() {
        let p = Params::new(5.0, 2.2948, -0.2265, 3.0303).unwrap();
        let init = RadialState::new(&p, 1.0, 1.0, -2.4416);
        let tr = integrate(&p, &init, (1.0, 50.0), &IntegrateOptions::default()).unwrap();
        assert_eq!(tr.terminal.kind, TerminalKind::UVanished);
        let rho = tr.terminal.payload.unwrap();
        assert!((rho - 1.2538195).abs() < 1e-6, "{rho}");
    }

    #[test]
    fn residual_vanishes_at_samples_near_blowup() {
        let p = Params::new(5.0, 1.3708, 0.8765, 3.1004).unwrap();
        let init = RadialState::new(&p, 1.0, 1.0, -2.8588);
        let tr = integrate(&p, &init, (1.0, 50.0), &IntegrateOptions::default()).unwrap();
        assert_eq!(tr.terminal.kind, TerminalKind::GradientBlowup);
        let n = tr.samples.len();
        for s in &tr.samples[1..n - 1] {
            let (d, size) = tr.residual(s.r).unwrap();
            assert!(d.abs() <= 1e-12 * size, "r = {}: {d:e} of {size:e}", s.r);
        }
    }
}
