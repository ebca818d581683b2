//! Numerical asymptotics and explicit bound formulas.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::Params;
use crate::radial::{RadialState, TerminalKind, Trajectory};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LimitMode {
    RToZero,
    RToInfinity,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LimitEstimate {
    pub value: f64,
    pub error_bar: f64,
    pub n_points: usize,
    pub mode: LimitMode,
}

fn aitken_pass(s: &[f64], noise: f64) -> Vec<f64> {
    s.windows(3)
        .map(|w| {
            let d1 = w[2] - w[1];
            let d0 = w[1] - w[0];
            let den = d1 - d0;
            // Without clear contraction the step is left alone.
            if d1.abs() <= noise || den == 0.0 || d1.abs() >= 0.95 * d0.abs() {
                w[2]
            } else {
                w[2] - d1 * d1 / den
            }
        })
        .collect()
}

const CONVERGED_REL: f64 = 1e-9;

/// Limit of `value(r)` as `r → 0` or `r → ∞` from geometrically spaced
/// samples, by two levels of Aitken Δ² acceleration. The error bar is the
/// last difference at the final level. A sequence whose last raw difference
/// exceeds its first is reported as divergent. Differences below `1e-9` of
/// the sample magnitude are treated as converged.
pub fn estimate_limit(samples: &[(f64, f64)], mode: LimitMode) -> Result<LimitEstimate> {
    const NEEDED: usize = 6;
    if samples.len() < NEEDED {
        return Err(Error::InsufficientSamples {
            needed: NEEDED,
            got: samples.len(),
        });
    }
    let mut sorted = samples.to_vec();
    match mode {
        LimitMode::RToZero => sorted.sort_by(|a, b| b.0.total_cmp(&a.0)),
        LimitMode::RToInfinity => sorted.sort_by(|a, b| a.0.total_cmp(&b.0)),
    }
    let seq: Vec<f64> = sorted.iter().map(|s| s.1).collect();
    if seq.iter().any(|v| !v.is_finite()) {
        return Err(Error::Divergent);
    }
    let mag = seq.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let noise = CONVERGED_REL * mag;
    let diffs: Vec<f64> = seq.windows(2).map(|w| (w[1] - w[0]).abs()).collect();
    let (first, last) = (diffs[0], diffs[diffs.len() - 1]);
    if last > first && last > noise {
        return Err(Error::Divergent);
    }
    let mut level = seq;
    for _ in 0..2 {
        if level.len() < 3 {
            break;
        }
        level = aitken_pass(&level, noise);
    }
    let n = level.len();
    let value = level[n - 1];
    let error_bar = if n >= 2 { (level[n - 1] - level[n - 2]).abs() } else { 0.0 };
    Ok(LimitEstimate {
        value,
        error_bar,
        n_points: samples.len(),
        mode,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerLawFit {
    pub exponent: f64,
    pub coefficient: f64,
    pub r_squared: f64,
    pub window: (f64, f64),
}

/// Least-squares line through `(ln r, ln value)` for samples with `r` in
/// the closed window.
pub fn fit_power_law(samples: &[(f64, f64)], window: (f64, f64)) -> Result<PowerLawFit> {
    const NEEDED: usize = 8;
    let pts: Vec<(f64, f64)> = samples
        .iter()
        .filter(|s| s.0 >= window.0 && s.0 <= window.1)
        .copied()
        .collect();
    if pts.len() < NEEDED {
        return Err(Error::InsufficientSamples {
            needed: NEEDED,
            got: pts.len(),
        });
    }
    if pts.iter().any(|s| !(s.0 > 0.0 && s.1 > 0.0)) {
        return Err(Error::NonpositiveValues);
    }
    let n = pts.len() as f64;
    let xs: Vec<f64> = pts.iter().map(|s| s.0.ln()).collect();
    let ys: Vec<f64> = pts.iter().map(|s| s.1.ln()).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::InvalidArgument("window contains a single radius".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (y - intercept - slope * x).powi(2))
        .sum();
    let r_squared = if syy == 0.0 { 1.0 } else { (1.0 - ss_res / syy).max(0.0) };
    Ok(PowerLawFit {
        exponent: slope,
        coefficient: intercept.exp(),
        r_squared,
        window,
    })
}

/// Keller–Osserman barrier value
/// `(c'·max(1/α)/ρ²)^{1/(k-1)} + (max β/α)^{1/k}` with
/// `c' = Θ·[4(2N + (k+1)/(k-1))/(k-1) + 16d/(k-1)²]`.
pub fn osserman_bound(
    k: f64,
    d: f64,
    theta_cap: f64,
    n: f64,
    rho: f64,
    max_inv_alpha: f64,
    max_beta_over_alpha: f64,
) -> Result<f64> {
    if !(k > 1.0 && d >= 0.0 && theta_cap >= 1.0 && rho > 0.0 && max_inv_alpha > 0.0 && max_beta_over_alpha >= 0.0) {
        return Err(Error::InvalidArgument("osserman_bound inputs out of range".into()));
    }
    let c = osserman_constant(k, d, theta_cap, n);
    Ok((c * max_inv_alpha / (rho * rho)).powf(1.0 / (k - 1.0)) + max_beta_over_alpha.powf(1.0 / k))
}

/// The constant `c'` of [`osserman_bound`].
pub fn osserman_constant(k: f64, d: f64, theta_cap: f64, n: f64) -> f64 {
    let km1 = k - 1.0;
    theta_cap * (4.0 * (2.0 * n + (k + 1.0) / km1) / km1 + 16.0 * d / (km1 * km1))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BootstrapBound {
    /// `ln` of the iterated product limit.
    pub log_iterated: f64,
    pub iterated: f64,
    /// `(K ε₀^{-h})^{1/(1-d)} 2^{h/(1-d)²}`, the summed series.
    pub closed_form: f64,
    /// `(K ε₀^{-h})^{1/(1-d)} 2^{d/(1-d)²}`, with `d` in place of `h` in the power of two.
    pub closed_form_alt: f64,
    /// `iterated / closed_form_alt`.
    pub ratio_to_alt: f64,
    pub log_closed_form: f64,
    pub log_closed_form_alt: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Limit of `Π_{i≥1} (K ε_i^{-h})^{d^{i-1}}` with `ε_i = ε₀ 2^{-i}`,
/// accumulated in logarithms until the next term is below `1e-15`.
pub fn bootstrap_bound(k: f64, d: f64, h: f64, eps0: f64) -> Result<BootstrapBound> {
    if !(k > 0.0 && d > 0.0 && d < 1.0 && eps0 > 0.0 && h.is_finite()) {
        return Err(Error::InvalidArgument("bootstrap_bound needs K > 0, 0 < d < 1, ε₀ > 0".into()));
    }
    let ln2 = std::f64::consts::LN_2;
    let base = k.ln() - h * eps0.ln();
    let mut sum = 0.0;
    let mut weight = 1.0;
    let mut converged = false;
    let mut i = 0usize;
    while i < 1_000_000 {
        i += 1;
        let term = weight * (base + h * i as f64 * ln2);
        sum += term;
        weight *= d;
        let next = weight * (base.abs() + h.abs() * (i + 1) as f64 * ln2);
        if next < 1e-15 * (1.0 + sum.abs()) && weight < 1e-15 {
            converged = true;
            break;
        }
    }
    let one_d = 1.0 - d;
    let log_closed = base / one_d + h * ln2 / (one_d * one_d);
    let log_alt = base / one_d + d * ln2 / (one_d * one_d);
    Ok(BootstrapBound {
        log_iterated: sum,
        iterated: sum.exp(),
        closed_form: log_closed.exp(),
        closed_form_alt: log_alt.exp(),
        ratio_to_alt: (sum - log_alt).exp(),
        log_closed_form: log_closed,
        log_closed_form_alt: log_alt,
        iterations: i,
        converged,
    })
}

/// `v = u^{1/b}` and `z = (v')²` along a trajectory, with the exponent
/// `s = m - 1 - q + b(p + q - m + 1)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BernsteinSubstitution {
    pub b: f64,
    pub s: f64,
    /// `(r, v, z)`.
    pub v_samples: Vec<(f64, f64, f64)>,
}

impl BernsteinSubstitution {
    pub fn new(traj: &Trajectory, b: f64) -> BernsteinSubstitution {
        let dc = traj.params.derived();
        BernsteinSubstitution {
            b,
            s: dc.s(b),
            v_samples: traj.samples.iter().map(|st| bernstein_point(st, b)).collect(),
        }
    }
}

/// `(r, v, z)` for one state.
pub fn bernstein_point(st: &RadialState, b: f64) -> (f64, f64, f64) {
    let v = st.u.powf(1.0 / b);
    let dv = st.u.powf(1.0 / b - 1.0) * st.du / b;
    (st.r, v, dv * dv)
}

/// Quantity whose power-law behaviour is checked.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum RateQuantity {
    /// `|u'|` against `r` as `r → 0`.
    GradientNearOrigin,
    /// `|u - u₀|` against `r` as `r → 0`.
    OscillationNearOrigin { u0: f64 },
    /// `|u - l|` against `r` as `r → ∞`.
    DecayAtInfinity { l: f64 },
    /// `|u'|` against `|ρ - r|` near a gradient blow-up at `ρ`.
    GradientNearBlowup { rho: f64 },
}

impl RateQuantity {
    pub fn name(&self) -> &'static str {
        match self {
            RateQuantity::GradientNearOrigin => "gradient_near_origin",
            RateQuantity::OscillationNearOrigin { .. } => "oscillation_near_origin",
            RateQuantity::DecayAtInfinity { .. } => "decay_at_infinity",
            RateQuantity::GradientNearBlowup { .. } => "gradient_near_blowup",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateVerdict {
    pub check: String,
    pub target: f64,
    pub fit: PowerLawFit,
    pub pass: bool,
    pub window: (f64, f64),
    pub params: Params,
}

impl RateVerdict {
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "check": self.check,
            "target": self.target,
            "fit": self.fit,
            "verdict": if self.pass { "PASS" } else { "FAIL" },
            "window": self.window,
            "params": self.params,
        })
    }
}

/// Fits the quantity on 48 geometrically spaced points of `window` (in the
/// independent variable of the quantity) and passes iff the exponent is
/// within `tol·|target|` of `target` and `R² ≥ 0.999`.
pub fn check_rate(
    traj: &Trajectory,
    quantity: RateQuantity,
    target: f64,
    window: (f64, f64),
    tol: f64,
) -> Result<RateVerdict> {
    if !(window.0 > 0.0 && window.1 > window.0) {
        return Err(Error::InvalidArgument(format!("window {:?}", window)));
    }
    let hi = traj.r_range().1;
    let wrong = |why: &str| Err(Error::WrongClassification(format!("{}: {why}", quantity.name())));
    if traj.samples.iter().all(|s| s.du == 0.0) {
        return wrong("constant trajectory");
    }
    let radius_of = |x: f64| match quantity {
        RateQuantity::GradientNearBlowup { rho } => {
            if traj.last().r <= rho {
                rho - x
            } else {
                rho + x
            }
        }
        _ => x,
    };
    match quantity {
        RateQuantity::GradientNearBlowup { .. } => {
            if traj.terminal.kind != TerminalKind::GradientBlowup {
                return wrong("trajectory does not end in a gradient blow-up");
            }
        }
        RateQuantity::GradientNearOrigin | RateQuantity::OscillationNearOrigin { .. } => {
            if traj.first().du >= 0.0 {
                return wrong("not a decreasing orbit near the origin");
            }
        }
        RateQuantity::DecayAtInfinity { .. } => {
            let stops = matches!(traj.terminal.kind, TerminalKind::UVanished | TerminalKind::GradientBlowup);
            if stops && traj.terminal.location >= hi {
                return wrong("trajectory stops at a finite radius");
            }
        }
    }
    let n = 48;
    let mut pts = Vec::with_capacity(n);
    for j in 0..n {
        let x = (window.0 * (window.1 / window.0).powf(j as f64 / (n - 1) as f64)).clamp(window.0, window.1);
        let r = radius_of(x);
        let st = traj
            .eval(r)
            .ok_or_else(|| Error::InvalidArgument(format!("r = {r} outside the trajectory")))?;
        let v = match quantity {
            RateQuantity::GradientNearOrigin | RateQuantity::GradientNearBlowup { .. } => st.du.abs(),
            RateQuantity::OscillationNearOrigin { u0 } => (st.u - u0).abs(),
            RateQuantity::DecayAtInfinity { l } => (st.u - l).abs(),
        };
        pts.push((x, v));
    }
    let fit = fit_power_law(&pts, window)?;
    let pass = (fit.exponent - target).abs() <= tol * target.abs() && fit.r_squared >= 0.999;
    Ok(RateVerdict {
        check: quantity.name().to_string(),
        target,
        fit,
        pass,
        window,
        params: traj.params,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn geo(n: usize, r0: f64, ratio: f64) -> Vec<f64> {
        (0..n).map(|i| r0 * ratio.powi(i as i32)).collect()
    }

    #[test]
    fn limit_of_constant_and_power_tail() {
        let s: Vec<_> = geo(8, 1.0, 0.5).into_iter().map(|r| (r, 3.0)).collect();
        let e = estimate_limit(&s, LimitMode::RToZero).unwrap();
        assert_eq!((e.value, e.error_bar), (3.0, 0.0));
        let s: Vec<_> = geo(8, 0.1, 0.5).into_iter().map(|r| (r, 2.0 + r.sqrt())).collect();
        let e = estimate_limit(&s, LimitMode::RToZero).unwrap();
        assert!((e.value - 2.0).abs() < 1e-6, "{e:?}");
        let s: Vec<_> = geo(8, 10.0, 2.0).into_iter().map(|r| (r, 1.0 + 2.0 / r + 1.0 / (r * r))).collect();
        let e = estimate_limit(&s, LimitMode::RToInfinity).unwrap();
        assert!((e.value - 1.0).abs() < 1e-7, "{e:?}");
    }

    #[test]
    fn limit_errors() {
        let s: Vec<_> = geo(5, 1.0, 0.5).into_iter().map(|r| (r, r)).collect();
        assert!(matches!(
            estimate_limit(&s, LimitMode::RToZero),
            Err(Error::InsufficientSamples { needed: 6, got: 5 })
        ));
        let s: Vec<_> = geo(8, 1.0, 0.5).into_iter().map(|r| (r, 1.0 / r)).collect();
        assert!(matches!(estimate_limit(&s, LimitMode::RToZero), Err(Error::Divergent)));
    }

    #[test]
    fn exact_power_law() {
        let s: Vec<_> = geo(10, 0.1, 1.7).into_iter().map(|r| (r, 3.0 * r.powi(-2))).collect();
        let f = fit_power_law(&s, (0.0, f64::INFINITY)).unwrap();
        assert_relative_eq!(f.exponent, -2.0, max_relative = 1e-12);
        assert_relative_eq!(f.coefficient, 3.0, max_relative = 1e-12);
        assert_relative_eq!(f.r_squared, 1.0, max_relative = 1e-12);
        let mut bad = s.clone();
        bad[3].1 = 0.0;
        assert!(matches!(fit_power_law(&bad, (0.0, 1e9)), Err(Error::NonpositiveValues)));
    }

    #[test]
    fn osserman_values() {
        assert_eq!(osserman_constant(2.0, 0.0, 1.0, 3.0), 36.0);
        let b = osserman_bound(2.0, 0.0, 1.0, 3.0, 2.0, 1.0, 0.0).unwrap();
        assert_relative_eq!(b, 9.0);
        let b2 = osserman_bound(2.0, 0.0, 1.0, 3.0, 2.0, 1.0, 16.0).unwrap();
        assert_relative_eq!(b2, 13.0);
    }

    #[test]
    fn bootstrap_limits() {
        let b = bootstrap_bound(3.0, 0.5, 0.0, 0.7).unwrap();
        assert!(b.converged);
        assert_relative_eq!(b.iterated, 9.0, max_relative = 1e-12);
        let b = bootstrap_bound(2.0, 0.5, 1.0, 0.5).unwrap();
        assert_relative_eq!(b.iterated, b.closed_form, max_relative = 1e-12);
        assert_relative_eq!(b.closed_form, 16.0 * 16.0, max_relative = 1e-12);
        assert_relative_eq!(b.ratio_to_alt, 4.0, max_relative = 1e-12);
    }

    #[test]
    fn bernstein_exponents() {
        let p = Params::new(3.0, 2.0, 1.0, 3.0).unwrap();
        let dc = p.derived();
        assert!((dc.s(dc.b_interior) + 1.0).abs() < 1e-14);
        assert!(dc.s(dc.b_nonpos).abs() < 1e-14);
        let st = RadialState::new(&p, 1.0, 8.0, -3.0);
        let (_, v, z) = bernstein_point(&st, 1.0 / 3.0);
        assert_relative_eq!(v, 512.0);
        assert_relative_eq!(z, (3.0 * 64.0 * 3.0f64).powi(2));
    }
}
