//! Dormand–Prince 5(4) stepper with continuous (dense) output.
//!
//! The driver hands every accepted step to a caller-supplied observer as a
//! [`Segment`], which can be evaluated and differentiated anywhere inside the
//! step. Event location is done by the observers (bisection on the segment),
//! which keeps the stepper itself free of problem-specific logic.

/// Right-hand side of `y' = f(t, y)`.
pub trait OdeSystem<const D: usize> {
    fn rhs(&self, t: f64, y: &[f64; D]) -> [f64; D];
}

impl<const D: usize, F> OdeSystem<D> for F
where
    F: Fn(f64, &[f64; D]) -> [f64; D],
{
    fn rhs(&self, t: f64, y: &[f64; D]) -> [f64; D] {
        self(t, y)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepperOptions {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_steps: usize,
    /// Initial step; `None` selects one automatically.
    pub h_init: Option<f64>,
    /// Largest step magnitude.
    pub h_max: f64,
    /// Steps below `h_min_rel * max(|t|, 1)` count as underflow.
    pub h_min_rel: f64,
}

impl Default for StepperOptions {
    fn default() -> Self {
        StepperOptions {
            rel_tol: 1e-10,
            abs_tol: 1e-12,
            max_steps: 1_000_000,
            h_init: None,
            h_max: f64::INFINITY,
            h_min_rel: 1e-15,
        }
    }
}

/// One accepted step with its continuous extension.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Segment<const D: usize> {
    pub t0: f64,
    pub h: f64,
    rcont: [[f64; D]; 5],
}

impl<const D: usize> Segment<D> {
    #[inline]
    pub fn t1(&self) -> f64 {
        self.t0 + self.h
    }

    pub fn y0(&self) -> [f64; D] {
        self.rcont[0]
    }

    pub fn y1(&self) -> [f64; D] {
        let mut y = [0.0; D];
        for (i, yi) in y.iter_mut().enumerate() {
            *yi = self.rcont[0][i] + self.rcont[1][i];
        }
        y
    }

    /// Whether `t` lies in the closed step interval.
    pub fn contains(&self, t: f64) -> bool {
        let (a, b) = if self.h >= 0.0 { (self.t0, self.t1()) } else { (self.t1(), self.t0) };
        t >= a && t <= b
    }

    pub fn eval(&self, t: f64) -> [f64; D] {
        let th = (t - self.t0) / self.h;
        let th1 = 1.0 - th;
        let r = &self.rcont;
        let mut y = [0.0; D];
        for (i, yi) in y.iter_mut().enumerate() {
            *yi = r[0][i] + th * (r[1][i] + th1 * (r[2][i] + th * (r[3][i] + th1 * r[4][i])));
        }
        y
    }

    /// Time derivative of the continuous extension.
    pub fn deriv(&self, t: f64) -> [f64; D] {
        let th = (t - self.t0) / self.h;
        let th1 = 1.0 - th;
        let r = &self.rcont;
        let mut d = [0.0; D];
        for (i, di) in d.iter_mut().enumerate() {
            let dth = r[1][i]
                + (1.0 - 2.0 * th) * r[2][i]
                + th * (2.0 - 3.0 * th) * r[3][i]
                + 2.0 * th * th1 * (1.0 - 2.0 * th) * r[4][i];
            *di = dth / self.h;
        }
        d
    }

    /// Bisection for a sign change of `g` inside the segment, returning the
    /// point on the near side of the root within `tol` (absolute in `t`).
    pub fn locate<G>(&self, g: G, tol: f64) -> Option<f64>
    where
        G: Fn(f64, &[f64; D]) -> f64,
    {
        let (mut a, mut b) = (self.t0, self.t1());
        let ga = g(a, &self.eval(a));
        let gb = g(b, &self.eval(b));
        if ga == 0.0 {
            return Some(a);
        }
        if !(ga * gb <= 0.0) {
            return None;
        }
        for _ in 0..200 {
            if (b - a).abs() <= tol {
                break;
            }
            let mid = 0.5 * (a + b);
            let gm = g(mid, &self.eval(mid));
            if gm == 0.0 {
                return Some(mid);
            }
            if (gm > 0.0) == (ga > 0.0) {
                a = mid;
            } else {
                b = mid;
            }
        }
        Some(b)
    }
}

/// Piecewise continuous solution assembled from accepted steps, searchable
/// by the independent variable regardless of the integration direction.
#[derive(Debug, Clone, PartialEq)]
pub struct Dense<const D: usize> {
    segs: Vec<(f64, f64, Segment<D>)>,
}

impl<const D: usize> Dense<D> {
    pub fn new(mut raw: Vec<Segment<D>>) -> Dense<D> {
        raw.sort_by(|a, b| a.t0.min(a.t1()).total_cmp(&b.t0.min(b.t1())));
        Dense {
            segs: raw
                .into_iter()
                .map(|s| (s.t0.min(s.t1()), s.t0.max(s.t1()), s))
                .collect(),
        }
    }

    /// Covered interval, or `None` when empty.
    pub fn range(&self) -> Option<(f64, f64)> {
        let lo = self.segs.first()?.0;
        let hi = self.segs.iter().map(|s| s.1).fold(f64::NEG_INFINITY, f64::max);
        Some((lo, hi))
    }

    /// Segment containing `t`; points within `1e-12 max(|t|, 1)` outside the
    /// covered range snap to the nearest end.
    pub fn find(&self, t: f64) -> Option<&Segment<D>> {
        let (first, last) = (self.segs.first()?, self.segs.last()?);
        let slack = 1e-12 * t.abs().max(1.0);
        if t < first.0 && first.0 - t <= slack {
            return Some(&first.2);
        }
        if t > last.1 && t - last.1 <= slack {
            return Some(&last.2);
        }
        let i = self.segs.partition_point(|s| s.0 <= t);
        if i == 0 {
            return None;
        }
        let (lo, hi, seg) = &self.segs[i - 1];
        if t >= *lo && t <= *hi {
            Some(seg)
        } else {
            None
        }
    }

    pub fn eval(&self, t: f64) -> Option<[f64; D]> {
        self.find(t).map(|s| s.eval(t))
    }
}

/// Observer verdict after each accepted step.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Control {
    Continue,
    Stop,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DriveStatus {
    /// `t_end` reached.
    Finished,
    /// The observer requested a stop.
    Stopped,
    /// Step size collapsed under error control.
    StepUnderflow,
    /// Step size collapsed because the field kept producing non-finite values.
    Nonfinite,
    MaxSteps,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DriveOutcome<const D: usize> {
    pub status: DriveStatus,
    pub t: f64,
    pub y: [f64; D],
    pub accepted: usize,
    pub rejected: usize,
}

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;
const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

#[inline]
fn comb<const D: usize>(y: &[f64; D], h: f64, terms: &[(f64, &[f64; D])]) -> [f64; D] {
    let mut out = *y;
    for (i, o) in out.iter_mut().enumerate() {
        let mut acc = 0.0;
        for (c, k) in terms {
            acc += c * k[i];
        }
        *o += h * acc;
    }
    out
}

#[inline]
fn all_finite<const D: usize>(v: &[f64; D]) -> bool {
    v.iter().all(|x| x.is_finite())
}

fn initial_step<const D: usize, S: OdeSystem<D>>(
    sys: &S,
    t0: f64,
    y0: &[f64; D],
    f0: &[f64; D],
    dir: f64,
    span: f64,
    opts: &StepperOptions,
) -> f64 {
    let sk: Vec<f64> = y0.iter().map(|y| opts.abs_tol + opts.rel_tol * y.abs()).collect();
    let norm = |v: &[f64; D]| -> f64 {
        (v.iter().zip(&sk).map(|(a, s)| (a / s).powi(2)).sum::<f64>() / D as f64).sqrt()
    };
    let d0 = norm(y0);
    let d1 = norm(f0);
    let mut h = if d0 < 1e-10 || d1 < 1e-10 { 1e-6 } else { 0.01 * d0 / d1 };
    h = h.min(opts.h_max).min(span);
    let y1 = comb(y0, dir * h, &[(1.0, f0)]);
    let f1 = sys.rhs(t0 + dir * h, &y1);
    if !all_finite(&f1) {
        return (h * 1e-3).max(1e-12);
    }
    let mut diff = [0.0; D];
    for i in 0..D {
        diff[i] = f1[i] - f0[i];
    }
    let d2 = norm(&diff) / h;
    let h1 = if d1.max(d2) <= 1e-15 {
        (h * 1e-3).max(1e-6)
    } else {
        (0.01 / d1.max(d2)).powf(0.2)
    };
    (100.0 * h).min(h1).min(opts.h_max)
}

/// Integrates from `t0` toward `t_end` (either direction), calling `observer`
/// on every accepted step.
pub fn drive<const D: usize, S, F>(
    sys: &S,
    t0: f64,
    y0: [f64; D],
    t_end: f64,
    opts: &StepperOptions,
    mut observer: F,
) -> DriveOutcome<D>
where
    S: OdeSystem<D>,
    F: FnMut(&Segment<D>) -> Control,
{
    let dir = if t_end >= t0 { 1.0 } else { -1.0 };
    let mut t = t0;
    let mut y = y0;
    let mut k1 = sys.rhs(t, &y);
    let mut accepted = 0usize;
    let mut rejected = 0usize;
    let outcome = |status, t, y, a, r| DriveOutcome {
        status,
        t,
        y,
        accepted: a,
        rejected: r,
    };
    if !all_finite(&k1) || !all_finite(&y) {
        return outcome(DriveStatus::Nonfinite, t, y, 0, 0);
    }
    if t0 == t_end {
        return outcome(DriveStatus::Finished, t, y, 0, 0);
    }
    let mut h = opts
        .h_init
        .map(f64::abs)
        .unwrap_or_else(|| initial_step(sys, t, &y, &k1, dir, (t_end - t).abs(), opts));
    let mut last_failure_nonfinite = false;
    let mut reject_streak = 0usize;
    loop {
        if accepted >= opts.max_steps {
            return outcome(DriveStatus::MaxSteps, t, y, accepted, rejected);
        }
        let remaining = (t_end - t).abs();
        let mut last = false;
        if h >= remaining {
            h = remaining;
            last = true;
        }
        let h_min = opts.h_min_rel * t.abs().max(1.0);
        if h < h_min && !last {
            let status = if last_failure_nonfinite {
                DriveStatus::Nonfinite
            } else {
                DriveStatus::StepUnderflow
            };
            return outcome(status, t, y, accepted, rejected);
        }
        let t_new = if last { t_end } else { t + dir * h };
        let hs = t_new - t;
        if hs == 0.0 {
            return outcome(DriveStatus::StepUnderflow, t, y, accepted, rejected);
        }
        let k2 = sys.rhs(t + C2 * hs, &comb(&y, hs, &[(A21, &k1)]));
        let k3 = sys.rhs(t + C3 * hs, &comb(&y, hs, &[(A31, &k1), (A32, &k2)]));
        let k4 = sys.rhs(t + C4 * hs, &comb(&y, hs, &[(A41, &k1), (A42, &k2), (A43, &k3)]));
        let k5 = sys.rhs(
            t + C5 * hs,
            &comb(&y, hs, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]),
        );
        let k6 = sys.rhs(
            t + hs,
            &comb(&y, hs, &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)]),
        );
        let y_new = comb(&y, hs, &[(A71, &k1), (A73, &k3), (A74, &k4), (A75, &k5), (A76, &k6)]);
        let k7 = sys.rhs(t_new, &y_new);
        let finite = [&k2, &k3, &k4, &k5, &k6, &k7, &y_new].iter().all(|v| all_finite(v));
        if !finite {
            rejected += 1;
            reject_streak += 1;
            last_failure_nonfinite = true;
            h *= 0.25;
            continue;
        }
        let mut err = 0.0;
        for i in 0..D {
            let ei = hs * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
            let sk = opts.abs_tol + opts.rel_tol * y[i].abs().max(y_new[i].abs());
            err += (ei / sk).powi(2);
        }
        let err = (err / D as f64).sqrt();
        if !err.is_finite() {
            rejected += 1;
            reject_streak += 1;
            last_failure_nonfinite = true;
            h *= 0.25;
            continue;
        }
        if err > 1.0 {
            rejected += 1;
            reject_streak += 1;
            last_failure_nonfinite = false;
            let fac = (0.9 * err.powf(-0.2)).clamp(0.1, 0.9);
            h *= if reject_streak > 3 { fac.min(0.5) } else { fac };
            continue;
        }
        reject_streak = 0;
        last_failure_nonfinite = false;
        let mut rcont = [[0.0; D]; 5];
        for i in 0..D {
            let ydiff = y_new[i] - y[i];
            let bspl = hs * k1[i] - ydiff;
            rcont[0][i] = y[i];
            rcont[1][i] = ydiff;
            rcont[2][i] = bspl;
            rcont[3][i] = ydiff - hs * k7[i] - bspl;
            rcont[4][i] = hs
                * (D1 * k1[i] + D3 * k3[i] + D4 * k4[i] + D5 * k5[i] + D6 * k6[i] + D7 * k7[i]);
        }
        let seg = Segment {
            t0: t,
            h: hs,
            rcont,
        };
        accepted += 1;
        t = t_new;
        y = y_new;
        k1 = k7;
        if observer(&seg) == Control::Stop {
            return outcome(DriveStatus::Stopped, t, y, accepted, rejected);
        }
        if last {
            return outcome(DriveStatus::Finished, t, y, accepted, rejected);
        }
        let fac = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
        h = (h * fac).min(opts.h_max);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_growth_and_dense_output() {
        let sys = |_t: f64, y: &[f64; 1]| [y[0]];
        let opts = StepperOptions {
            rel_tol: 1e-12,
            abs_tol: 1e-14,
            ..Default::default()
        };
        let mut worst_dense: f64 = 0.0;
        let mut worst_deriv: f64 = 0.0;
        let out = drive(&sys, 0.0, [1.0], 2.0, &opts, |seg| {
            for j in 1..8 {
                let t = seg.t0 + seg.h * j as f64 / 8.0;
                worst_dense = worst_dense.max((seg.eval(t)[0] / t.exp() - 1.0).abs());
                worst_deriv = worst_deriv.max((seg.deriv(t)[0] / t.exp() - 1.0).abs());
            }
            Control::Continue
        });
        assert_eq!(out.status, DriveStatus::Finished);
        assert_eq!(out.t, 2.0);
        assert!((out.y[0] / 2f64.exp() - 1.0).abs() < 1e-11, "{:?}", out);
        assert!(worst_dense < 1e-10, "{worst_dense}");
        assert!(worst_deriv < 1e-8, "{worst_deriv}");
    }

    #[test]
    fn backward_harmonic_oscillator() {
        let sys = |_t: f64, y: &[f64; 2]| [y[1], -y[0]];
        let opts = StepperOptions::default();
        let out = drive(&sys, 0.0, [0.0, 1.0], -10.0, &opts, |_| Control::Continue);
        assert_eq!(out.status, DriveStatus::Finished);
        assert!((out.y[0] - (-10f64).sin()).abs() < 1e-8);
        assert!((out.y[1] - (-10f64).cos()).abs() < 1e-8);
    }

    #[test]
    fn finite_time_blowup_collapses_step() {
        // y' = y^2 blows up at t = 1.
        let sys = |_t: f64, y: &[f64; 1]| [y[0] * y[0]];
        let out = drive(&sys, 0.0, [1.0], 2.0, &StepperOptions::default(), |_| Control::Continue);
        assert!(matches!(out.status, DriveStatus::StepUnderflow | DriveStatus::Nonfinite));
        assert!((out.t - 1.0).abs() < 1e-6);
    }

    #[test]
    fn segment_locates_roots() {
        let sys = |_t: f64, y: &[f64; 2]| [y[1], -y[0]];
        let mut root = None;
        drive(&sys, 0.0, [1.0, 0.0], 3.0, &StepperOptions::default(), |seg| {
            if let Some(t) = seg.locate(|_, y| y[0], 1e-13) {
                root = Some(t);
                return Control::Stop;
            }
            Control::Continue
        });
        assert!((root.unwrap() - std::f64::consts::FRAC_PI_2).abs() < 1e-9);
    }

    #[test]
    fn dense_derivative_matches_field_at_nodes_far_from_origin() {
        let sys = |_t: f64, y: &[f64; 1]| [y[0] * y[0]];
        let opts = StepperOptions { rel_tol: 1e-10, abs_tol: 0.0, ..Default::default() };
        let t0 = 1e3;
        let mut worst = 0.0f64;
        drive(&sys, t0, [1.0], t0 + 1.0 - 1e-9, &opts, |seg| {
            let y = seg.eval(seg.t1())[0];
            worst = worst.max((seg.deriv(seg.t1())[0] / (y * y) - 1.0).abs());
            Control::Continue
        });
        assert!(worst < 1e-12, "{worst:e}");
    }
}
