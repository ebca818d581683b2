//! Exact solution families used as oracles: the explicit `p = 0` family and
//! the `q = m` family obtained from m-harmonic functions through the
//! transform `U = Ψ(u)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::{Params, Regime};
use crate::quadrature;

const QUAD_ABS: f64 = 1e-14;
const QUAD_REL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Branch {
    /// `u' < 0`, `|u'|^{-(q-m+1)} = β r^{(N-1)(q-m+1)/(m-1)} (C + r^{-a}/a)`.
    Decreasing,
    /// `u' > 0`, `|u'|^{-(q-m+1)} = β r^{(N-1)(q-m+1)/(m-1)} (C - r^{-a}/a)`.
    Increasing,
}

/// Explicit solutions for `p = 0`, with `a = ((N-1)q - N(m-1))/(m-1)` and
/// `β = (q-m+1)/(m-1)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExplicitP0 {
    pub params: Params,
    pub branch: Branch,
    #[serde(rename = "C")]
    pub c: f64,
    /// Open interval of radii where the inner expression is positive.
    pub domain: (f64, f64),
}

impl ExplicitP0 {
    pub fn new(params: &Params, branch: Branch, c: f64) -> Result<ExplicitP0> {
        if params.p != 0.0 {
            return Err(Error::InvalidArgument(format!("explicit family needs p = 0, got {}", params.p)));
        }
        if !(params.q > params.m) {
            return Err(Error::WrongRegime {
                expected: Regime::Supercritical.name(),
            });
        }
        if !c.is_finite() {
            return Err(Error::InvalidArgument(format!("C = {c}")));
        }
        let a = params.derived().e_explicit;
        let domain = match branch {
            Branch::Decreasing if c >= 0.0 => (0.0, f64::INFINITY),
            Branch::Decreasing => (0.0, (a * -c).powf(-1.0 / a)),
            Branch::Increasing if c > 0.0 => ((a * c).powf(-1.0 / a), f64::INFINITY),
            Branch::Increasing => {
                return Err(Error::InvalidArgument("increasing branch needs C > 0".into()));
            }
        };
        Ok(ExplicitP0 {
            params: *params,
            branch,
            c,
            domain,
        })
    }

    pub fn contains(&self, r: f64) -> bool {
        r > self.domain.0 && r < self.domain.1
    }
}

/// `u'(r)` on the explicit `p = 0` family.
pub fn p0_derivative(ep: &ExplicitP0, r: f64) -> Result<f64> {
    if !ep.contains(r) {
        return Err(Error::OutOfDomain(r));
    }
    let pr = &ep.params;
    let dc = pr.derived();
    let a = dc.e_explicit;
    let beta = (pr.q - pr.m + 1.0) / (pr.m - 1.0);
    let tail = r.powf(-a) / a;
    let (inner, sign) = match ep.branch {
        Branch::Decreasing => (ep.c + tail, -1.0),
        Branch::Increasing => (ep.c - tail, 1.0),
    };
    if !(inner > 0.0) {
        return Err(Error::OutOfDomain(r));
    }
    Ok(sign * r.powf((1.0 - pr.nf()) / (pr.m - 1.0)) * (beta * inner).powf(-dc.grad_exp))
}

/// `u(r) = u_ref + ∫_{r_ref}^{r} u'`, integrated in `ln r`.
pub fn p0_value(ep: &ExplicitP0, r_ref: f64, u_ref: f64, r: f64) -> Result<f64> {
    for x in [r_ref, r] {
        if !ep.contains(x) {
            return Err(Error::OutOfDomain(x));
        }
    }
    let f = |y: f64| {
        let x = y.exp();
        p0_derivative(ep, x).map(|d| d * x).unwrap_or(f64::NAN)
    };
    let q = quadrature::integrate(f, r_ref.ln(), r.ln(), QUAD_ABS, QUAD_REL);
    if !q.value.is_finite() {
        return Err(Error::OutOfDomain(r));
    }
    let u = u_ref + q.value;
    if !(u > 0.0) {
        return Err(Error::PositivityLost(r));
    }
    Ok(u)
}

/// `Ψ(u) = ∫_0^u exp(θ^{p+1}/((p+1)(m-1))) dθ`, tabulated on a grid that is
/// refined until `Ψ⁻¹ ∘ Ψ` is the identity to `1e-13` on probe points.
#[derive(Debug, Clone, PartialEq)]
pub struct PsiTransform {
    pub params: Params,
    nodes: Vec<f64>,
    values: Vec<f64>,
}

impl PsiTransform {
    pub fn new(params: &Params) -> Result<PsiTransform> {
        params.require(Regime::QEqualsM)?;
        let k = (params.p + 1.0) * (params.m - 1.0);
        // Ψ' stays below e^{700}.
        let u_max = (700.0 * k).powf(1.0 / (params.p + 1.0));
        let mut n = 32;
        loop {
            let ps = PsiTransform::tabulate(params, u_max, n);
            if n >= 1 << 14 || ps.roundtrip_ok() {
                return Ok(ps);
            }
            n *= 2;
        }
    }

    fn tabulate(params: &Params, u_max: f64, n: usize) -> PsiTransform {
        let mut ps = PsiTransform {
            params: *params,
            nodes: (0..=n).map(|i| u_max * i as f64 / n as f64).collect(),
            values: vec![0.0; n + 1],
        };
        for i in 1..=n {
            let seg = quadrature::integrate(|t| ps.density(t), ps.nodes[i - 1], ps.nodes[i], 0.0, QUAD_REL);
            ps.values[i] = ps.values[i - 1] + seg.value;
        }
        ps
    }

    fn roundtrip_ok(&self) -> bool {
        let top = *self.nodes.last().unwrap();
        (1..40).all(|j| {
            let u = top * (j as f64 / 40.0).powi(3);
            match psi(self, u).and_then(|v| psi_inverse(self, v)) {
                Ok(back) => (back - u).abs() <= 1e-13 * u,
                Err(_) => false,
            }
        })
    }

    /// `Ψ'(θ)`.
    pub fn density(&self, theta: f64) -> f64 {
        let p1 = self.params.p + 1.0;
        (theta.powf(p1) / (p1 * (self.params.m - 1.0))).exp()
    }

    /// Largest tabulated argument.
    pub fn u_max(&self) -> f64 {
        *self.nodes.last().unwrap()
    }

    fn node_index(&self, u: f64) -> usize {
        let h = self.nodes[1];
        ((u / h).floor() as usize).min(self.nodes.len() - 1)
    }

    fn eval_from_node(&self, i: usize, u: f64) -> f64 {
        self.values[i] + quadrature::integrate(|t| self.density(t), self.nodes[i], u, 0.0, QUAD_REL * 0.1).value
    }
}

pub fn psi(ps: &PsiTransform, u: f64) -> Result<f64> {
    if u < 0.0 || u.is_nan() {
        return Err(Error::NegativeInput(u));
    }
    let i = ps.node_index(u);
    let j = if i + 1 < ps.nodes.len() && u - ps.nodes[i] > ps.nodes[i + 1] - u { i + 1 } else { i };
    Ok(ps.eval_from_node(j, u))
}

/// Safeguarded Newton iteration inside the bracketing table cell.
pub fn psi_inverse(ps: &PsiTransform, target: f64) -> Result<f64> {
    if target < 0.0 || target.is_nan() {
        return Err(Error::NegativeInput(target));
    }
    if target == 0.0 {
        return Ok(0.0);
    }
    let last = *ps.values.last().unwrap();
    if target > last {
        return Err(Error::OutOfDomain(target));
    }
    let i = ps.values.partition_point(|&v| v <= target).clamp(1, ps.values.len() - 1) - 1;
    let (mut lo, mut hi) = (ps.nodes[i], ps.nodes[i + 1]);
    let (vlo, vhi) = (ps.values[i], ps.values[i + 1]);
    let mut x = lo + (hi - lo) * (target - vlo) / (vhi - vlo);
    for _ in 0..100 {
        let fx = ps.eval_from_node(i, x) - target;
        if fx == 0.0 {
            return Ok(x);
        }
        if fx > 0.0 {
            hi = x;
        } else {
            lo = x;
        }
        let mut next = x - fx / ps.density(x);
        if !(next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        let done = (next - x).abs() <= 1e-15 * x.abs() || hi - lo <= 1e-15 * hi;
        x = next;
        if done {
            break;
        }
    }
    Ok(x)
}

/// `u = Ψ⁻¹(k r^{(m-N)/(m-1)} + λ)` and its derivative.
pub fn qm_solution(ps: &PsiTransform, k: f64, lambda: f64, r: f64) -> Result<(f64, f64)> {
    if k < 0.0 {
        return Err(Error::NegativeInput(k));
    }
    if lambda < 0.0 {
        return Err(Error::NegativeInput(lambda));
    }
    if k == 0.0 && lambda == 0.0 {
        return Err(Error::InvalidArgument("(k, λ) = (0, 0)".into()));
    }
    if !(r > 0.0) {
        return Err(Error::NonpositiveRadius(r));
    }
    let a = ps.params.decay_exponent();
    let big_u = k * r.powf(-a) + lambda;
    let u = psi_inverse(ps, big_u)?;
    let du_big = -a * k * r.powf(-a - 1.0);
    Ok((u, du_big / ps.density(u)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn explicit_domains() {
        let p = Params::new(3.0, 2.0, 0.0, 3.0).unwrap();
        let dec = ExplicitP0::new(&p, Branch::Decreasing, -1.0).unwrap();
        assert_relative_eq!(dec.domain.1, 3f64.powf(-1.0 / 3.0));
        assert!(p0_derivative(&dec, 0.9).is_err());
        let inc = ExplicitP0::new(&p, Branch::Increasing, 2.0).unwrap();
        assert_relative_eq!(inc.domain.0, 6f64.powf(-1.0 / 3.0));
        assert!(p0_derivative(&inc, 2.0).unwrap() > 0.0);
        assert!(ExplicitP0::new(&Params::new(3.0, 2.0, 1.0, 3.0).unwrap(), Branch::Decreasing, 1.0).is_err());
    }

    #[test]
    fn explicit_large_constant_regime() {
        let p = Params::new(3.0, 2.0, 0.0, 3.0).unwrap();
        let c = 1e8;
        let ep = ExplicitP0::new(&p, Branch::Decreasing, c).unwrap();
        let r: f64 = 2.0;
        let approx = -(2.0 * c).powf(-0.5) * r.powf(-2.0);
        assert_relative_eq!(p0_derivative(&ep, r).unwrap(), approx, max_relative = 1e-8);
    }

    #[test]
    fn explicit_value_at_reference() {
        let p = Params::new(3.0, 2.0, 0.0, 3.0).unwrap();
        let ep = ExplicitP0::new(&p, Branch::Decreasing, 0.5).unwrap();
        assert_eq!(p0_value(&ep, 1.0, 2.0, 1.0).unwrap(), 2.0);
        assert!(p0_value(&ep, 1.0, 2.0, 0.01).unwrap() > 2.0);
        assert!(matches!(p0_value(&ep, 1.0, 1e-3, 100.0), Err(Error::PositivityLost(_))));
    }

    #[test]
    fn psi_basics() {
        let p = Params::new(3.0, 2.0, 1.0, 2.0).unwrap();
        let ps = PsiTransform::new(&p).unwrap();
        assert_eq!(psi(&ps, 0.0).unwrap(), 0.0);
        assert_relative_eq!(psi(&ps, 1e-8).unwrap(), 1e-8, max_relative = 1e-12);
        let g7 = |a: f64, b: f64, n: usize| {
            let h = (b - a) / n as f64;
            (0..n)
                .map(|i| quadrature::gauss7(&|t: f64| (t * t / 2.0).exp(), a + i as f64 * h, a + (i + 1) as f64 * h))
                .sum::<f64>()
        };
        assert_relative_eq!(psi(&ps, 1.0).unwrap(), g7(0.0, 1.0, 16), max_relative = 1e-12);
        for &u in &[1e-6, 0.3, 1.0, 4.7, 10.0] {
            let back = psi_inverse(&ps, psi(&ps, u).unwrap()).unwrap();
            assert_relative_eq!(back, u, max_relative = 1e-12);
        }
        assert!(matches!(psi(&ps, -1.0), Err(Error::NegativeInput(_))));
    }

    #[test]
    fn qm_family_shapes() {
        let p = Params::new(3.0, 2.0, 1.0, 2.0).unwrap();
        let ps = PsiTransform::new(&p).unwrap();
        let (u, du) = qm_solution(&ps, 0.0, 0.7, 3.0).unwrap();
        assert_relative_eq!(psi(&ps, u).unwrap(), 0.7, max_relative = 1e-13);
        assert_eq!(du, 0.0);
        let mut prev = f64::INFINITY;
        for j in 0..20 {
            let r = 0.01 * 1.5f64.powi(j);
            let (u, du) = qm_solution(&ps, 1.0, 0.5, r).unwrap();
            assert!(u < prev && du < 0.0);
            prev = u;
        }
        assert!(qm_solution(&ps, 0.0, 0.0, 1.0).is_err());
    }
}
