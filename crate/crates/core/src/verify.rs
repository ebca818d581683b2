//! The acceptance suite: eleven numbered checks, each returning a verdict
//! with the numbers behind it. All randomness flows from one seed.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use crate::closed_form::{self, Branch, ExplicitP0, PsiTransform};
use crate::error::{Error, Result};
use crate::estimates::{self, LimitMode, RateQuantity};
use crate::params::{self, FixedPointLabel, Params};
use crate::phase::{self, ClassKind, ClassifyOptions, PhaseOptions, PhasePoint, Seed};
use crate::radial::{self, IntegrateOptions, RadialState, TerminalKind};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VerifyConfig {
    pub seed: u64,
    pub rel_tol: f64,
    pub abs_tol: f64,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig {
            seed: 0,
            rel_tol: 1e-10,
            abs_tol: 1e-12,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CriterionReport {
    pub id: u32,
    pub name: &'static str,
    pub pass: bool,
    pub details: Value,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyReport {
    pub schema: &'static str,
    pub seed: u64,
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub criteria: Vec<CriterionReport>,
    pub all_pass: bool,
}

impl VerifyReport {
    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

pub const CRITERIA: [(u32, &str); 11] = [
    (1, "eigen_structure"),
    (2, "explicit_p0_oracle"),
    (3, "q_equals_m_oracle"),
    (4, "singular_rate_at_origin"),
    (5, "decay_at_infinity"),
    (6, "connecting_orbit"),
    (7, "taxonomy_coverage"),
    (8, "gradient_exponents"),
    (9, "scaling_equivariance"),
    (10, "bound_formulas"),
    (11, "determinism"),
];

fn rng_for(cfg: &VerifyConfig, id: u32) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(cfg.seed.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(id as u64))
}

/// A random Supercritical quadruple with `N ∈ 3..=6`, `q - m ∈ [0.5, 2]`,
/// `p ∈ [0, 2]`.
pub fn random_supercritical(rng: &mut impl Rng) -> Params {
    let n = rng.random_range(3..=6u32) as f64;
    let m = rng.random_range(1.2..(n - 0.2).min(4.0));
    let q = m + rng.random_range(0.5..2.0);
    let p = rng.random_range(0.0..2.0);
    Params::new(n, m, p, q).expect("sampled quadruple is admissible")
}

/// Any admissible quadruple: Supercritical, `q = m`, or `p < 0`.
fn random_admissible(rng: &mut impl Rng) -> Params {
    match rng.random_range(0..3u32) {
        0 => random_supercritical(rng),
        1 => {
            let n = rng.random_range(3..=6u32) as f64;
            let m = rng.random_range(1.2..(n - 0.2).min(4.0));
            Params::new(n, m, rng.random_range(0.0..2.0), m).unwrap()
        }
        _ => {
            let n = rng.random_range(3..=6u32) as f64;
            let m = rng.random_range(1.2..(n - 0.2).min(4.0));
            let q = m + rng.random_range(0.2..2.0);
            let p = -rng.random_range(0.05..0.9) * (q + 1.0 - m);
            Params::new(n, m, p, q).unwrap()
        }
    }
}

fn p3213() -> Params {
    Params::new(3.0, 2.0, 1.0, 3.0).unwrap()
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}

fn geometric(lo: f64, hi: f64, n: usize) -> impl Iterator<Item = f64> {
    (0..n).map(move |i| lo * (hi / lo).powf(i as f64 / (n - 1) as f64))
}

fn verdict(id: u32, outcome: Result<(bool, Value)>) -> CriterionReport {
    let name = CRITERIA[(id - 1) as usize].1;
    match outcome {
        Ok((pass, details)) => CriterionReport { id, name, pass, details },
        Err(e) => CriterionReport {
            id,
            name,
            pass: false,
            details: json!({ "error": e.to_string() }),
        },
    }
}

fn integrate_options(cfg: &VerifyConfig) -> IntegrateOptions {
    IntegrateOptions::with_tolerances(cfg.rel_tol, cfg.abs_tol)
}

fn classify_options(cfg: &VerifyConfig) -> ClassifyOptions {
    ClassifyOptions::with_tolerances(cfg.rel_tol, cfg.abs_tol)
}

fn eigen_structure(cfg: &VerifyConfig) -> Result<(bool, Value)> {
    let mut rng = rng_for(cfg, 1);
    let mut worst = 0.0f64;
    for _ in 0..50 {
        let p = random_supercritical(&mut rng);
        for label in FixedPointLabel::ALL {
            let fp = params::linearize(&p, label)?;
            let (l1, l2) = fp.eigenvalues.unwrap();
            let (lo, hi) = (l1.min(l2), l1.max(l2));
            let (e1, e2) = phase::jacobian_eigenvalues(&p, fp.location.0, fp.location.1, 1e-6)
                .ok_or_else(|| Error::InvalidArgument("complex eigenvalues".into()))?;
            worst = worst.max(rel(e1, lo)).max(rel(e2, hi));
        }
    }
    let p = p3213();
    let get = |l| params::linearize(&p, l).map(|f| f.eigenvalues.unwrap());
    let n0 = get(FixedPointLabel::N0)?;
    let o = get(FixedPointLabel::O)?;
    let a0 = get(FixedPointLabel::A0)?;
    let c = params::n0_eigen_slope(&p);
    let d = params::a0_eigen_slope(&p);
    let pair = |x: (f64, f64), y: (f64, f64)| (x.0 - y.0).abs().max((x.1 - y.1).abs()) <= 1e-12;
    let exact = pair(n0, (0.5, 3.0))
        && pair(o, (-1.0, -3.0))
        && pair(a0, (-4.0, 1.0))
        && (c - 0.6).abs() <= 1e-12
        && (d - 5.0).abs() <= 1e-12;
    Ok((
        worst <= 1e-8 && exact,
        json!({
            "quadruples": 50,
            "max_rel_dev": worst,
            "reference": { "n0": n0, "o": o, "a0": a0, "c": c, "d": d },
        }),
    ))
}

fn explicit_p0_oracle(cfg: &VerifyConfig) -> Result<(bool, Value)> {
    let mut rng = rng_for(cfg, 2);
    let p = Params::new(3.0, 2.0, 0.0, 3.0)?;
    let a = p.derived().e_explicit;
    let opts = integrate_options(cfg);
    let mut worst = 0.0f64;
    let mut cases = Vec::new();
    for _ in 0..10 {
        for branch in [Branch::Decreasing, Branch::Increasing] {
            let c = match branch {
                Branch::Decreasing => 10f64.powf(rng.random_range(-2.0..1.0)),
                Branch::Increasing => {
                    let r_min: f64 = rng.random_range(1e-3..5e-3);
                    r_min.powf(-a) / a
                }
            };
            let ep = ExplicitP0::new(&p, branch, c)?;
            // For p = 0 the level of u is irrelevant to the equation; keep it
            // well above the vanishing threshold.
            let drop = (closed_form::p0_value(&ep, 1.0, 1e6, 100.0)? - 1e6).abs()
                + (closed_form::p0_value(&ep, 1.0, 1e6, 0.01)? - 1e6).abs();
            let u_ref = 1.0 + drop;
            let init = RadialState::new(&p, 1.0, u_ref, closed_form::p0_derivative(&ep, 1.0)?);
            let fwd = radial::integrate(&p, &init, (1.0, 100.0), &opts)?;
            let back = radial::integrate(&p, &init, (1.0, 0.01), &opts)?;
            let mut dev = 0.0f64;
            for r in geometric(0.01, 100.0, 41) {
                let tr = if r >= 1.0 { &fwd } else { &back };
                let st = tr
                    .eval(r)
                    .ok_or_else(|| Error::InvalidArgument(format!("r = {r} not covered")))?;
                let u = closed_form::p0_value(&ep, 1.0, u_ref, r)?;
                let du = closed_form::p0_derivative(&ep, r)?;
                dev = dev.max(rel(st.u, u)).max(rel(st.du, du));
            }
            worst = worst.max(dev);
            cases.push(json!({ "branch": branch, "C": c, "max_rel_dev": dev }));
        }
    }
    Ok((worst <= 1e-8, json!({ "params": p, "max_rel_dev": worst, "cases": cases })))
}

/// Defect of `(r^{N-1}|u'|^{m-2}u')' + r^{N-1}u^p|u'|^q` relative to its
/// larger term, by a five-point stencil in `ln r`.
fn closed_form_residual(p: &Params, state_at: impl Fn(f64) -> Result<(f64, f64)>, r: f64) -> Result<f64> {
    let h = 1e-3;
    let t = r.ln();
    let w = |dt: f64| -> Result<f64> {
        let rr = (t + dt).exp();
        let (_, du) = state_at(rr)?;
        Ok(radial::flux(p, rr, du))
    };
    let dw_dt = (-w(2.0 * h)? + 8.0 * w(h)? - 8.0 * w(-h)? + w(-2.0 * h)?) / (12.0 * h);
    let (u, du) = state_at(r)?;
    let source = r.powf(p.nf()) * radial::upow(u, p.p) * du.abs().powf(p.q);
    Ok((dw_dt + source).abs() / dw_dt.abs().max(source))
}

fn q_equals_m_oracle(cfg: &VerifyConfig) -> Result<(bool, Value)> {
    let _ = cfg;
    let p = Params::new(3.0, 2.0, 1.0, 2.0)?;
    let ps = PsiTransform::new(&p)?;
    let (k, lambda) = (0.5, 0.5);
    let sol = |r: f64| closed_form::qm_solution(&ps, k, lambda, r);
    let mut residual = 0.0f64;
    for r in geometric(1e-3, 1e3, 61) {
        residual = residual.max(closed_form_residual(&p, sol, r)?);
    }
    let target = (p.nf() - p.m) * (p.p + 1.0) / (p.m - 1.0);
    let x0 = 1.0 / 1e-10f64.ln().abs();
    let mut samples = Vec::new();
    for j in 0..8 {
        let x = x0 / 0.8f64.powi(j);
        let r = (-1.0 / x).exp();
        let (u, _) = sol(r)?;
        samples.push((x, u.powf(p.p + 1.0) * x));
    }
    let raw = samples[0].1;
    // The approach is f = L + x(α + β ln x) + o(x); a geometric Aitken
    // sequence does not remove the x ln x term, so the three are fitted.
    let limit = fit_log_corrected(&samples)?;
    let pass = residual <= 1e-8 && rel(limit, target) <= 0.05;
    Ok((
        pass,
        json!({
            "params": p, "k": k, "lambda": lambda,
            "max_residual": residual,
            "limit_target": target, "limit_extrapolated": limit, "limit_raw_at_1e-10": raw,
            "rel_dev": rel(limit, target),
        }),
    ))
}

/// Least-squares value at `x = 0` of `f ≈ L + αx + βx ln x`.
fn fit_log_corrected(samples: &[(f64, f64)]) -> Result<f64> {
    let mut ata = [[0.0f64; 3]; 3];
    let mut atb = [0.0f64; 3];
    for &(x, f) in samples {
        let row = [1.0, x, x * x.ln()];
        for i in 0..3 {
            for j in 0..3 {
                ata[i][j] += row[i] * row[j];
            }
            atb[i] += row[i] * f;
        }
    }
    let det3 = |m: &[[f64; 3]; 3]| {
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    };
    let det = det3(&ata);
    if det == 0.0 || !det.is_finite() {
        return Err(Error::Divergent);
    }
    let mut first = ata;
    for i in 0..3 {
        first[i][0] = atb[i];
    }
    Ok(det3(&first) / det)
}

fn singular_rate_at_origin(cfg: &VerifyConfig) -> Result<(bool, Value)> {
    let mut rng = rng_for(cfg, 4);
    let mut sets = vec![p3213()];
    sets.extend((0..4).map(|_| random_supercritical(&mut rng)));
    let copts = classify_options(cfg);
    // The flux decays toward the origin, so error control is purely relative.
    let iopts = IntegrateOptions {
        abs_tol: 0.0,
        ..integrate_options(cfg)
    };
    let mut worst = 0.0f64;
    let mut cases = Vec::new();
    for p in sets {
        let z0 = p.derived().z_n0;
        for (x, z) in [(0.3 * p.decay_exponent(), 0.2 * z0), (0.5 * p.decay_exponent(), 3.0 * z0)] {
            let seed = PhasePoint { t: 0.0, x, z };
            let co = phase::classify_with(&p, &Seed::Phase(seed), &copts)?;
            let u0 = co
                .classification
                .witnesses
                .u0
                .ok_or_else(|| Error::Unclassifiable("no u0 witness".into()))?;
            let init = phase::from_phase(&p, &seed)?;
            let tr = radial::integrate(&p, &init, (init.r, init.r * 1e-12), &iopts)?;
            let mut samples = Vec::new();
            for j in 0..10 {
                let r = init.r * 1e-10 * 2f64.powi(j);
                let st = tr
                    .eval(r)
                    .ok_or_else(|| Error::InvalidArgument(format!("r = {r} not covered")))?;
                samples.push((r, r * st.du.abs().powf(p.q - p.m + 1.0) * u0.powf(p.p)));
            }
            let est = estimates::estimate_limit(&samples, LimitMode::RToZero)?;
            let dev = rel(est.value, z0);
            worst = worst.max(dev);
            cases.push(json!({
                "params": p, "seed": seed, "kind": co.classification.kind,
                "u0": u0, "limit": est.value, "z_n0": z0, "rel_dev": dev,
            }));
        }
    }
    Ok((worst <= 5e-3, json!({ "max_rel_dev": worst, "cases": cases })))
}

fn decay_at_infinity(cfg: &VerifyConfig) -> Result<(bool, Value)> {
    let mut rng = rng_for(cfg, 5);
    let mut sets = vec![p3213()];
    sets.extend((0..3).map(|_| random_supercritical(&mut rng)));
    let opts = integrate_options(cfg);
    let mut pass = true;
    let mut cases = Vec::new();
    for p in sets {
        let a = p.decay_exponent();
        let tr = radial::integrate_at_infinity(&p, 1.0, 1.0, (0.0, 1.0), &opts)?;
        // Radii where r^{-A} runs from 1e-3 to 1e-6, and a fit window with
        // r^{-A} in [1e-7, 1e-3].
        let r_at = |s: f64| s.powf(-1.0 / a);
        let mut samples = Vec::new();
        for j in 0..10 {
            let r = r_at(1e-3 * 1e-3f64.powf(j as f64 / 9.0));
            let st = tr
                .eval(r)
                .ok_or_else(|| Error::InvalidArgument(format!("r = {r} not covered")))?;
            samples.push((r, r.powf(a) * (st.u - 1.0)));
        }
        let lim = estimates::estimate_limit(&samples, LimitMode::RToInfinity)?;
        let window = (r_at(1e-3), r_at(1e-7));
        let v = estimates::check_rate(&tr, RateQuantity::DecayAtInfinity { l: 1.0 }, -a, window, 0.01)?;
        let ok = (lim.value - 1.0).abs() <= 1e-3 && v.pass;
        pass &= ok;
        cases.push(json!({
            "params": p, "limit": lim.value, "exponent": v.fit.exponent, "target": -a, "pass": ok,
        }));
    }
    Ok((pass, json!({ "cases": cases })))
}

fn connecting_orbit(cfg: &VerifyConfig) -> Result<(bool, Value)> {
    let mut rng = rng_for(cfg, 6);
    let mut sets = vec![p3213()];
    sets.extend((0..2).map(|_| random_supercritical(&mut rng)));
    let opts = PhaseOptions {
        rel_tol: cfg.rel_tol,
        abs_tol: cfg.abs_tol,
        ..Default::default()
    };
    let mut pass = true;
    let mut cases = Vec::new();
    for p in sets {
        let a = phase::stable_manifold_a0(&p, 1e-4, &opts)?;
        let b = phase::stable_manifold_a0(&p, 5e-5, &opts)?;
        let (lo, hi) = (a.r_range().0.max(b.r_range().0), a.r_range().1.min(b.r_range().1));
        let (lo, hi) = (lo.max(1e-3), hi.min(1e2));
        let mut halving = 0.0f64;
        for r in geometric(lo, hi, 101) {
            let (x, y) = (a.u_at(r).unwrap(), b.u_at(r).unwrap());
            halving = halving.max(rel(y, x));
        }
        let x_increasing = a.orbit.samples.windows(2).all(|w| w[1].x > w[0].x);
        let ok = a.n0_distance <= 1e-6
            && a.u0 > 0.0
            && a.c > 0.0
            && a.c.is_finite()
            && halving <= 1e-6
            && x_increasing
            && hi / lo >= 100.0;
        pass &= ok;
        cases.push(json!({
            "params": p, "n0_distance": a.n0_distance, "u0": a.u0, "c": a.c,
            "halving_rel_dev": halving, "compared_on": [lo, hi],
            "x_increasing": x_increasing, "crosses_l_z": a.crosses_l_z, "pass": ok,
        }));
    }
    Ok((pass, json!({ "cases": cases })))
}

/// Phase seeds: ten values of `X` on each side of zero, twenty values of `Z`
/// with the sign of `X`.
pub fn seed_grid() -> Vec<PhasePoint> {
    let xs: Vec<f64> = geometric(0.05, 5.0, 10).collect();
    let zs: Vec<f64> = geometric(0.02, 20.0, 20).collect();
    let mut out = Vec::with_capacity(400);
    for s in [-1.0, 1.0] {
        for &x in &xs {
            for &z in &zs {
                out.push(PhasePoint { t: 0.0, x: s * x, z: s * z });
            }
        }
    }
    out
}

fn orbit_invariants_hold(co: &phase::ClassifiedOrbit) -> bool {
    let Some(orbit) = &co.orbit else { return true };
    let s = orbit.samples[0].x.signum();
    let signs = orbit.samples.iter().all(|p| p.x.signum() == s && p.z.signum() == s);
    let x_monotone = s > 0.0 || orbit.samples.windows(2).all(|w| w[1].x >= w[0].x);
    let u_monotone = co.radial.as_ref().is_none_or(|tr| {
        tr.samples.iter().all(|st| st.du.signum() == -s) && tr.samples.windows(2).all(|w| (w[1].u - w[0].u) * (w[1].r - w[0].r) * s <= 0.0)
    });
    signs && x_monotone && u_monotone
}

fn taxonomy_coverage(cfg: &VerifyConfig) -> Result<(bool, Value)> {
    let p = p3213();
    let copts = classify_options(cfg);
    let seeds = seed_grid();
    let results: Vec<Result<phase::ClassifiedOrbit>> =
        seeds.par_iter().map(|s| phase::classify_with(&p, &Seed::Phase(*s), &copts)).collect();
    let mut counts = std::collections::BTreeMap::new();
    let mut unclassifiable = 0usize;
    let mut violations = 0usize;
    for r in &results {
        match r {
            Ok(co) => {
                *counts.entry(format!("{:?}", co.classification.kind)).or_insert(0usize) += 1;
                if !orbit_invariants_hold(co) {
                    violations += 1;
                }
            }
            Err(_) => unclassifiable += 1,
        }
    }
    let generic = [
        ClassKind::SingularToDecayAtInfinity,
        ClassKind::SingularToVanish,
        ClassKind::SingularToGradientBlowup,
        ClassKind::IncreasingFromVanish,
        ClassKind::IncreasingFromGradientBlowup,
    ];
    let grid_ok = generic.iter().all(|k| counts.contains_key(&format!("{k:?}")));
    let popts = PhaseOptions {
        rel_tol: cfg.rel_tol,
        abs_tol: cfg.abs_tol,
        ..Default::default()
    };
    let sm = phase::stable_manifold_a0(&p, 1e-4, &popts)?;
    let on_manifold = phase::classify_with(&p, &Seed::Phase(sm.seed), &copts)?;
    let constant = phase::classify_with(&p, &Seed::Radial(RadialState::new(&p, 1.0, 2.0, 0.0)), &copts)?;
    let special_ok = on_manifold.classification.kind == ClassKind::ConnectsN0toA0
        && orbit_invariants_hold(&on_manifold)
        && constant.classification.kind == ClassKind::ConstantSolution;
    Ok((
        grid_ok && special_ok && violations == 0,
        json!({
            "params": p,
            "grid_size": seeds.len(),
            "counts": counts,
            "unclassifiable": unclassifiable,
            "invariant_violations": violations,
            "manifold_seed_kind": on_manifold.classification.kind,
            "constant_seed_kind": constant.classification.kind,
        }),
    ))
}

fn gradient_exponents(cfg: &VerifyConfig) -> Result<(bool, Value)> {
    let opts = integrate_options(cfg);
    let p = p3213();
    let k = p.q - p.m + 1.0;
    let seed = PhasePoint { t: 0.0, x: 0.3, z: 0.2 };
    let init = phase::from_phase(&p, &seed)?;
    let inward = IntegrateOptions {
        abs_tol: 0.0,
        ..opts
    };
    let tr = radial::integrate(&p, &init, (init.r, 1e-16), &inward)?;
    let inv = estimates::check_rate(&tr, RateQuantity::GradientNearOrigin, -1.0 / k, (1e-12, 1e-8), 0.01)?;
    let mut samples = Vec::new();
    for j in 0..10 {
        let r = 1e-14 * 4f64.powi(j);
        samples.push((r, tr.eval(r).map(|s| s.u).unwrap_or(f64::NAN)));
    }
    let u0 = estimates::estimate_limit(&samples, LimitMode::RToZero)?.value;
    let tur = estimates::check_rate(
        &tr,
        RateQuantity::OscillationNearOrigin { u0 },
        (p.q - p.m) / k,
        (1e-12, 1e-8),
        0.01,
    )?;
    let pn = Params::new(3.0, 2.0, -0.5, 3.0)?;
    let init = RadialState::new(&pn, 1.0, 1.0, -5.0);
    let bt = radial::integrate(&pn, &init, (1.0, f64::INFINITY), &opts)?;
    if bt.terminal.kind != TerminalKind::GradientBlowup {
        return Err(Error::WrongClassification(format!("p < 0 orbit ended with {:?}", bt.terminal.kind)));
    }
    let rho = bt.terminal.payload.unwrap();
    let nonpos = estimates::check_rate(
        &bt,
        RateQuantity::GradientNearBlowup { rho },
        -1.0 / (pn.q + 1.0 - pn.m),
        (1e-9 * rho, 1e-5 * rho),
        0.01,
    )?;
    Ok((
        inv.pass && tur.pass && nonpos.pass,
        json!({
            "gradient_near_origin": inv.to_json(),
            "oscillation_near_origin": tur.to_json(),
            "gradient_near_blowup_p_negative": nonpos.to_json(),
        }),
    ))
}

fn scaling_equivariance(cfg: &VerifyConfig) -> Result<(bool, Value)> {
    let mut rng = rng_for(cfg, 9);
    let opts = integrate_options(cfg);
    let mut worst = 0.0f64;
    let mut cases = Vec::new();
    for _ in 0..20 {
        let p = random_admissible(&mut rng);
        let lambda = 10f64.powf(rng.random_range(-1.0..1.0));
        let init = RadialState::new(&p, 1.0, 1.0, -0.1);
        let tr = radial::integrate(&p, &init, (1.0, 2.0), &opts)?;
        let scaled = radial::scale_solution(&tr, lambda)?;
        let theta = p.scaling_exponent();
        let sinit = RadialState::new(&p, 1.0 / lambda, lambda.powf(-theta), -0.1 * lambda.powf(1.0 - theta));
        let direct = radial::integrate(&p, &sinit, (1.0 / lambda, 2.0 / lambda), &opts)?;
        let mut dev = 0.0f64;
        for r in geometric(1.0 / lambda, 2.0 / lambda, 21) {
            let (a, b) = (scaled.eval(r).unwrap(), direct.eval(r).unwrap());
            dev = dev.max(rel(b.u, a.u)).max(rel(b.du, a.du));
        }
        worst = worst.max(dev);
        cases.push(json!({ "params": p, "lambda": lambda, "max_rel_dev": dev }));
    }
    Ok((
        worst <= 10.0 * cfg.rel_tol,
        json!({ "max_rel_dev": worst, "threshold": 10.0 * cfg.rel_tol, "cases": cases }),
    ))
}

/// `(k, d, Θ)` of the Bernstein inequality for `z = |v'|²`.
pub fn osserman_exponents(p: &Params) -> (f64, f64, f64) {
    (p.q + 2.0 - p.m, (p.m - 2.0).abs(), (p.m - 1.0).max(1.0))
}

/// Ball centers of an annulus `[lo, hi]` with the ball radius half the
/// distance to the nearer edge: `(center, radius, z(center), max v on ball)`.
pub fn osserman_samples(tr: &radial::Trajectory, b: f64, lo: f64, hi: f64) -> Vec<(f64, f64, f64, f64)> {
    geometric(lo, hi, 102)
        .skip(1)
        .take(100)
        .map(|x0| {
            let rho = 0.5 * (x0 - lo).min(hi - x0);
            let st = tr.eval(x0).unwrap();
            let (_, _, z) = estimates::bernstein_point(&st, b);
            let vmax = [x0 - rho, x0 + rho]
                .iter()
                .map(|&r| tr.eval(r).unwrap().u.powf(1.0 / b))
                .fold(0.0, f64::max);
            (x0, rho, z, vmax)
        })
        .collect()
}

/// A decreasing orbit through `seed` and the annulus it is tested on:
/// `[0.05ρ, 0.9ρ]` when the solution stops at a finite `ρ`, otherwise
/// `[0.1, 10]` times the seed radius.
pub fn decreasing_orbit(p: &Params, seed: PhasePoint, opts: &IntegrateOptions) -> Result<(radial::Trajectory, f64, f64)> {
    let init = phase::from_phase(p, &seed)?;
    let fwd = radial::integrate(p, &init, (init.r, f64::INFINITY), opts)?;
    let (lo, hi) = match fwd.terminal.kind {
        TerminalKind::UVanished | TerminalKind::GradientBlowup => {
            let end = fwd.terminal.payload.unwrap_or(fwd.terminal.location);
            (0.05 * end, 0.9 * end)
        }
        _ => (0.1 * init.r, 10.0 * init.r),
    };
    let start = if lo < init.r {
        *radial::integrate(p, &init, (init.r, lo), opts)?.first()
    } else {
        fwd.eval(lo).ok_or_else(|| Error::InvalidArgument(format!("r = {lo} not covered")))?
    };
    let whole = radial::integrate(p, &start, (start.r, hi), opts)?;
    Ok((whole, lo, hi))
}

fn bound_formulas(cfg: &VerifyConfig) -> Result<(bool, Value)> {
    let mut rng = rng_for(cfg, 10);
    let p = p3213();
    let opts = integrate_options(cfg);
    let b = p.derived().b_interior;
    let (k, d, theta_cap) = osserman_exponents(&p);
    let cprime = estimates::osserman_constant(k, d, theta_cap, p.nf());
    // Calibration on a gradient blow-up orbit: the largest a₀ with
    // z ≤ bound at every center, halved.
    let (cal, lo, hi) = decreasing_orbit(&p, PhasePoint { t: 0.0, x: 0.5, z: 8.0 }, &opts)?;
    let mut a0 = f64::INFINITY;
    for (_, rho, z, vmax) in osserman_samples(&cal, b, lo, hi) {
        if z > 1.0 {
            a0 = a0.min(cprime * vmax * vmax / (rho * rho * (z - 1.0).powf(k - 1.0)));
        }
    }
    if !a0.is_finite() {
        a0 = 1.0;
    }
    a0 *= 0.5;
    let mut min_margin = f64::INFINITY;
    let mut osserman_ok = true;
    let mut orbits = Vec::new();
    for _ in 0..10 {
        let seed = PhasePoint {
            t: 0.0,
            x: 10f64.powf(rng.random_range(-1.0..0.5)),
            z: 10f64.powf(rng.random_range(-1.5..1.0)),
        };
        let (tr, lo, hi) = decreasing_orbit(&p, seed, &opts)?;
        let mut margin = f64::INFINITY;
        for (_, rho, z, vmax) in osserman_samples(&tr, b, lo, hi) {
            let bound = estimates::osserman_bound(k, d, theta_cap, p.nf(), rho, vmax * vmax / a0, 1.0)?;
            margin = margin.min(bound / z);
        }
        osserman_ok &= margin >= 1.0;
        min_margin = min_margin.min(margin);
        orbits.push(json!({ "seed": seed, "annulus": [lo, hi], "min_bound_over_z": margin }));
    }
    let mut boot_ok = true;
    let mut worst_closed = 0.0f64;
    let mut min_log_margin = f64::INFINITY;
    let mut log2_ratio_to_alt = Vec::new();
    for _ in 0..100 {
        let kk = rng.random_range(1.0..10.0);
        let dd = rng.random_range(0.05..0.95);
        let h = rng.random_range(0.0..3.0);
        let eps0 = rng.random_range(0.01..1.0);
        let bb = estimates::bootstrap_bound(kk, dd, h, eps0)?;
        worst_closed = worst_closed.max((bb.log_iterated - bb.log_closed_form).abs() / bb.log_iterated.abs().max(1.0));
        // The constant satisfying the hypothesis with equality at ε₀, and
        // chains ln y_{i-1} = ln K - h ln ε_i + d ln y_i ending in y_M = 1.
        let log_constant = (kk.ln() - h * eps0.ln()) / (1.0 - dd);
        let mut log_chain_max = f64::NEG_INFINITY;
        for depth in 1..=60 {
            let mut ly = 0.0f64;
            for i in (1..=depth).rev() {
                let eps_i = eps0 * 0.5f64.powi(i);
                ly = kk.ln() - h * eps_i.ln() + dd * ly;
            }
            log_chain_max = log_chain_max.max(ly);
        }
        let log_top = log_constant.max(log_chain_max);
        min_log_margin = min_log_margin.min(bb.log_iterated - log_top);
        boot_ok &= bb.converged && bb.log_iterated >= log_top - 1e-12 * log_top.abs().max(1.0);
        log2_ratio_to_alt.push((bb.log_iterated - bb.log_closed_form_alt) / std::f64::consts::LN_2);
    }
    let alt_range = (
        log2_ratio_to_alt.iter().cloned().fold(f64::INFINITY, f64::min),
        log2_ratio_to_alt.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
    );
    Ok((
        osserman_ok && boot_ok && worst_closed <= 1e-10,
        json!({
            "osserman": {
                "params": p, "k": k, "d": d, "theta_cap": theta_cap, "a0": a0,
                "min_bound_over_z": min_margin, "orbits": orbits,
            },
            "bootstrap": {
                "cases": 100,
                "min_log_bound_minus_log_witness": min_log_margin,
                "max_rel_dev_closed_form": worst_closed,
                "log2_ratio_to_alt_form_range": [alt_range.0, alt_range.1],
            },
        }),
    ))
}

fn run_one(id: u32, cfg: &VerifyConfig) -> CriterionReport {
    let outcome = match id {
        1 => eigen_structure(cfg),
        2 => explicit_p0_oracle(cfg),
        3 => q_equals_m_oracle(cfg),
        4 => singular_rate_at_origin(cfg),
        5 => decay_at_infinity(cfg),
        6 => connecting_orbit(cfg),
        7 => taxonomy_coverage(cfg),
        8 => gradient_exponents(cfg),
        9 => scaling_equivariance(cfg),
        10 => bound_formulas(cfg),
        _ => Err(Error::InvalidArgument(format!("no criterion {id}"))),
    };
    verdict(id, outcome)
}

/// Runs one criterion. Criterion 11 reruns 1–10 twice and compares the
/// serialized results byte for byte.
pub fn run_criterion(id: u32, cfg: &VerifyConfig) -> CriterionReport {
    if id != 11 {
        return run_one(id, cfg);
    }
    let render = || {
        let all: Vec<CriterionReport> = (1..=10).into_par_iter().map(|i| run_one(i, cfg)).collect();
        serde_json::to_string(&all).expect("report serializes")
    };
    let (a, b) = (render(), render());
    verdict(
        11,
        Ok((a == b, json!({ "bytes": a.len(), "identical": a == b }))),
    )
}

/// Runs the full suite.
pub fn run_all(cfg: &VerifyConfig) -> VerifyReport {
    let criteria: Vec<CriterionReport> = (1..=11).into_par_iter().map(|i| run_criterion(i, cfg)).collect();
    let all_pass = criteria.iter().all(|c| c.pass);
    VerifyReport {
        schema: "1",
        seed: cfg.seed,
        rel_tol: cfg.rel_tol,
        abs_tol: cfg.abs_tol,
        criteria,
        all_pass,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sampler_is_seeded() {
        let a: Vec<Params> = (0..5).map({
            let mut r = ChaCha8Rng::seed_from_u64(7);
            move |_| random_supercritical(&mut r)
        }).collect();
        let mut r = ChaCha8Rng::seed_from_u64(7);
        let b: Vec<Params> = (0..5).map(|_| random_supercritical(&mut r)).collect();
        assert_eq!(a, b);
        assert!(a.iter().all(|p| p.regime == crate::params::Regime::Supercritical));
    }

    #[test]
    fn grid_shape() {
        let g = seed_grid();
        assert_eq!(g.len(), 400);
        assert!(g.iter().all(|p| p.x * p.z > 0.0));
    }
}
