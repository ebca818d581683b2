//! Parameter quadruples `(N, m, p, q)`, regime detection and the closed-form
//! constants of the radial problem.
//!
//! The phase-plane coordinates have three fixed points in the closed first
//! quadrant: the source `N0 = (0, zN0)`, the sink `O = (0, 0)` and the saddle
//! `A0 = ((N-m)/(m-1), 0)`. Their eigen-data is available in closed form and
//! is computed here; `phase::vector_field` is checked against it by numerical
//! differentiation in the tests.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Analytic regime of a parameter quadruple.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Regime {
    /// `q > m`, `p >= 0`.
    Supercritical,
    /// `q = m`, `p >= 0`.
    QEqualsM,
    /// `p <= 0`, `p + q + 1 - m > 0`.
    PNonpositive,
}

impl Regime {
    pub fn name(self) -> &'static str {
        match self {
            Regime::Supercritical => "Supercritical",
            Regime::QEqualsM => "QEqualsM",
            Regime::PNonpositive => "PNonpositive",
        }
    }
}

/// A validated quadruple together with its regime.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Params {
    #[serde(rename = "N")]
    pub n: u32,
    pub m: f64,
    pub p: f64,
    pub q: f64,
    pub regime: Regime,
    /// `q > m - 1`: constant-or-strictly-monotone holds on every segment.
    pub monotone_flag: bool,
}

impl Params {
    /// Validates raw values. When several regime predicates hold at once
    /// (`p = 0` sits on the boundary of `p <= 0`) the first of
    /// Supercritical, QEqualsM, PNonpositive wins.
    pub fn new(n: f64, m: f64, p: f64, q: f64) -> Result<Params> {
        if !n.is_finite() || n.fract() != 0.0 || n < 2.0 || n > u32::MAX as f64 {
            return Err(Error::DimensionViolation(n));
        }
        if !(m.is_finite() && p.is_finite() && q.is_finite()) {
            return Err(Error::RegimeViolation { n, m, p, q });
        }
        if m <= 1.0 || m >= n {
            return Err(Error::MViolation { m, n });
        }
        let regime = if q > m && p >= 0.0 {
            Regime::Supercritical
        } else if q == m && p >= 0.0 {
            Regime::QEqualsM
        } else if p <= 0.0 && p + q + 1.0 - m > 0.0 {
            Regime::PNonpositive
        } else {
            return Err(Error::RegimeViolation { n, m, p, q });
        };
        Ok(Params {
            n: n as u32,
            m,
            p,
            q,
            regime,
            monotone_flag: q > m - 1.0,
        })
    }

    /// `N` as a float.
    #[inline]
    pub fn nf(&self) -> f64 {
        self.n as f64
    }

    pub fn require(&self, regime: Regime) -> Result<()> {
        if self.regime == regime {
            Ok(())
        } else {
            Err(Error::WrongRegime {
                expected: regime.name(),
            })
        }
    }

    /// `(N-m)/(m-1)`: the X-coordinate of `A0` and the exterior decay exponent.
    #[inline]
    pub fn decay_exponent(&self) -> f64 {
        (self.nf() - self.m) / (self.m - 1.0)
    }

    /// Exponent `(q-m)/(p+q+1-m)` of the scaling `u -> λ^{-θ} u(λ r)`.
    #[inline]
    pub fn scaling_exponent(&self) -> f64 {
        (self.q - self.m) / (self.p + self.q + 1.0 - self.m)
    }

    pub fn derived(&self) -> DerivedConstants {
        derived_constants(self)
    }
}

/// Closed-form constants attached to a quadruple.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DerivedConstants {
    /// Z-coordinate of `N0`: `((N-1)q - N(m-1))/(q+1-m)`.
    pub z_n0: f64,
    /// Exponent of the explicit `p = 0` family: `((N-1)q - N(m-1))/(m-1)`.
    pub e_explicit: f64,
    /// `(N-m)/(m-1)`.
    pub mu_decay: f64,
    /// `1/(q-m+1)`.
    pub grad_exp: f64,
    /// `(q-m)/(q-m+1)`.
    pub holder_exp: f64,
    /// `(q-m)/(p+q-m+1)`, the power giving `s = -1`.
    pub b_interior: f64,
    /// `(q+1-m)/(p+q+1-m)`, the power giving `s = 0`.
    pub b_nonpos: f64,
    pub m: f64,
    pub p: f64,
    pub q: f64,
}

impl DerivedConstants {
    /// `s(b) = m - 1 - q + b (p + q - m + 1)`.
    pub fn s(&self, b: f64) -> f64 {
        self.m - 1.0 - self.q + b * (self.p + self.q - self.m + 1.0)
    }
}

pub fn derived_constants(params: &Params) -> DerivedConstants {
    let n = params.nf();
    let Params { m, p, q, .. } = *params;
    let num = (n - 1.0) * q - n * (m - 1.0);
    let q1m = q + 1.0 - m;
    let pq1m = p + q + 1.0 - m;
    assert!(q1m != 0.0 && pq1m != 0.0, "degenerate exponent denominators");
    DerivedConstants {
        z_n0: num / q1m,
        e_explicit: num / (m - 1.0),
        mu_decay: (n - m) / (m - 1.0),
        grad_exp: 1.0 / q1m,
        holder_exp: (q - m) / q1m,
        b_interior: (q - m) / pq1m,
        b_nonpos: q1m / pq1m,
        m,
        p,
        q,
    }
}

/// Label of a fixed point of the phase-plane system.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum FixedPointLabel {
    N0,
    O,
    A0,
}

impl FixedPointLabel {
    pub const ALL: [FixedPointLabel; 3] = [FixedPointLabel::N0, FixedPointLabel::O, FixedPointLabel::A0];
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Stability {
    Source,
    Sink,
    Saddle,
}

impl Stability {
    pub fn from_eigenvalues(l1: f64, l2: f64) -> Option<Stability> {
        if l1 > 0.0 && l2 > 0.0 {
            Some(Stability::Source)
        } else if l1 < 0.0 && l2 < 0.0 {
            Some(Stability::Sink)
        } else if l1 * l2 < 0.0 {
            Some(Stability::Saddle)
        } else {
            None
        }
    }
}

/// Location and (optionally) linearization of a fixed point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FixedPointData {
    pub label: FixedPointLabel,
    pub location: (f64, f64),
    pub eigenvalues: Option<(f64, f64)>,
    pub eigenvectors: Option<[(f64, f64); 2]>,
    pub stability: Option<Stability>,
}

/// Locations of `N0`, `O` and `A0` (eigen-data unset).
pub fn fixed_points(params: &Params) -> Result<[FixedPointData; 3]> {
    params.require(Regime::Supercritical)?;
    let dc = params.derived();
    let at = |label, location| FixedPointData {
        label,
        location,
        eigenvalues: None,
        eigenvectors: None,
        stability: None,
    };
    Ok([
        at(FixedPointLabel::N0, (0.0, dc.z_n0)),
        at(FixedPointLabel::O, (0.0, 0.0)),
        at(FixedPointLabel::A0, (dc.mu_decay, 0.0)),
    ])
}

/// Closed-form linearization at one fixed point.
pub fn linearize(params: &Params, label: FixedPointLabel) -> Result<FixedPointData> {
    params.require(Regime::Supercritical)?;
    let n = params.nf();
    let Params { m, q, .. } = *params;
    let dc = params.derived();
    let (location, eigenvalues, eigenvectors) = match label {
        FixedPointLabel::N0 => {
            let l1 = (q - m) / (q + 1.0 - m);
            let l2 = dc.e_explicit;
            let c = n0_eigen_slope(params);
            ((0.0, dc.z_n0), (l1, l2), [(1.0, c), (0.0, 1.0)])
        }
        FixedPointLabel::O => {
            let xi1 = -dc.mu_decay;
            let xi2 = n - (n - 1.0) * q / (m - 1.0);
            ((0.0, 0.0), (xi1, xi2), [(1.0, 0.0), (0.0, 1.0)])
        }
        FixedPointLabel::A0 => {
            let mu1 = a0_stable_eigenvalue(params);
            let mu2 = dc.mu_decay;
            let d = a0_eigen_slope(params);
            ((dc.mu_decay, 0.0), (mu1, mu2), [(1.0, -d), (1.0, 0.0)])
        }
    };
    Ok(FixedPointData {
        label,
        location,
        eigenvalues: Some(eigenvalues),
        eigenvectors: Some(eigenvectors),
        stability: Stability::from_eigenvalues(eigenvalues.0, eigenvalues.1),
    })
}

/// `c_{m,q} = p zN0 / (λ2 - λ1)`, slope of the weak unstable direction at `N0`.
pub fn n0_eigen_slope(params: &Params) -> f64 {
    let dc = params.derived();
    let l1 = (params.q - params.m) / (params.q + 1.0 - params.m);
    params.p * dc.z_n0 / (dc.e_explicit - l1)
}

/// `μ1 = -((N-m)p + (N-1)q - (m-1)N)/(m-1)`.
pub fn a0_stable_eigenvalue(params: &Params) -> f64 {
    let n = params.nf();
    let Params { m, p, q, .. } = *params;
    -((n - m) * p + (n - 1.0) * q - (m - 1.0) * n) / (m - 1.0)
}

/// `d_{m,q} = (m-1)(μ2 - μ1)/μ2`; the stable direction at `A0` is `(1, -d)`.
pub fn a0_eigen_slope(params: &Params) -> f64 {
    let mu2 = params.decay_exponent();
    (params.m - 1.0) * (mu2 - a0_stable_eigenvalue(params)) / mu2
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
    fn regimes() {
        assert_eq!(p3213().regime, Regime::Supercritical);
        assert_eq!(Params::new(3.0, 2.0, 1.0, 2.0).unwrap().regime, Regime::QEqualsM);
        assert_eq!(Params::new(3.0, 2.0, -0.5, 3.0).unwrap().regime, Regime::PNonpositive);
        assert_eq!(Params::new(3.0, 2.0, 0.0, 3.0).unwrap().regime, Regime::Supercritical);
        assert_eq!(Params::new(3.0, 2.0, 0.0, 2.0).unwrap().regime, Regime::QEqualsM);
        assert!(matches!(Params::new(2.0, 2.0, 1.0, 3.0), Err(Error::MViolation { .. })));
        assert!(matches!(Params::new(3.0, 1.0, 1.0, 3.0), Err(Error::MViolation { .. })));
        assert!(matches!(Params::new(3.0, 2.0, 1.0, 1.5), Err(Error::RegimeViolation { .. })));
        assert!(matches!(Params::new(3.0, 2.0, -2.0, 2.5), Err(Error::RegimeViolation { .. })));
        assert!(matches!(Params::new(2.5, 2.0, 1.0, 3.0), Err(Error::DimensionViolation(_))));
        assert!(Params::new(4.0, 3.0, -0.5, 2.7).unwrap().monotone_flag);
    }

    #[test]
    fn derived_values() {
        let dc = p3213().derived();
        assert_relative_eq!(dc.z_n0, 1.5);
        assert_relative_eq!(dc.e_explicit, 3.0);
        assert_relative_eq!(dc.mu_decay, 1.0);
        assert_relative_eq!(dc.grad_exp, 0.5);
        assert_relative_eq!(dc.b_interior, 1.0 / 3.0);
        let dc0 = Params::new(3.0, 2.0, 0.0, 3.0).unwrap().derived();
        assert_relative_eq!(dc0.b_interior, 0.5);
        assert_relative_eq!(dc0.s(dc0.b_interior), -1.0, epsilon = 1e-14);
        let qm = Params::new(3.0, 2.0, 1.0, 2.0).unwrap().derived();
        assert_eq!(qm.grad_exp, 1.0);
    }

    #[test]
    fn fixed_point_locations() {
        let fps = fixed_points(&p3213()).unwrap();
        assert_eq!(fps[0].location, (0.0, 1.5));
        assert_eq!(fps[1].location, (0.0, 0.0));
        assert_eq!(fps[2].location, (1.0, 0.0));
        let fps = fixed_points(&Params::new(4.0, 3.0, 1.0, 4.0).unwrap()).unwrap();
        assert_relative_eq!(fps[2].location.0, 0.5);
        assert!(fixed_points(&Params::new(3.0, 2.0, 1.0, 2.0).unwrap()).is_err());
    }

    #[test]
    fn linearization_3213() {
        let p = p3213();
        let n0 = linearize(&p, FixedPointLabel::N0).unwrap();
        assert_eq!(n0.eigenvalues, Some((0.5, 3.0)));
        assert_relative_eq!(n0.eigenvectors.unwrap()[0].1, 0.6, epsilon = 1e-15);
        assert_eq!(n0.stability, Some(Stability::Source));
        let o = linearize(&p, FixedPointLabel::O).unwrap();
        assert_eq!(o.eigenvalues, Some((-1.0, -3.0)));
        assert_eq!(o.stability, Some(Stability::Sink));
        let a0 = linearize(&p, FixedPointLabel::A0).unwrap();
        assert_eq!(a0.eigenvalues, Some((-4.0, 1.0)));
        assert_relative_eq!(a0_eigen_slope(&p), 5.0);
        assert_eq!(a0.stability, Some(Stability::Saddle));
    }

    fn supercritical() -> impl Strategy<Value = Params> {
        (3u32..=8, 0.05f64..0.95, 0.05f64..3.0, 0.0f64..3.0).prop_map(|(n, mf, dq, p)| {
            let n = n as f64;
            let m = 1.0 + mf * (n - 1.0);
            Params::new(n, m, p, m + dq).unwrap()
        })
    }

    proptest! {
        #[test]
        fn eigenvalue_ordering(p in supercritical()) {
            let [n0, o, a0] = FixedPointLabel::ALL.map(|l| linearize(&p, l).unwrap().eigenvalues.unwrap());
            prop_assert!(0.0 < n0.0 && n0.0 < n0.1);
            prop_assert!(o.1 < o.0 && o.0 < 0.0);
            prop_assert!(a0.0 < 0.0 && 0.0 < a0.1);
        }

        #[test]
        fn n0_slope_matches_rational_form(p in supercritical()) {
            let n = p.nf();
            let Params { m, p: pp, q, .. } = p;
            let num = pp * ((n - 1.0) * q - n * (m - 1.0)) * (m - 1.0);
            let den = (n - 1.0) * q * q - 2.0 * n * (m - 1.0) * q + (m - 1.0) * (n * (m - 1.0) + m);
            let c = n0_eigen_slope(&p);
            prop_assert!((c - num / den).abs() <= 1e-12 * c.abs().max(1e-300));
        }

        #[test]
        fn substitution_powers(p in supercritical()) {
            let dc = p.derived();
            prop_assert!((dc.s(dc.b_interior) + 1.0).abs() <= 1e-14);
            prop_assert!(dc.s(dc.b_nonpos).abs() <= 1e-14);
        }
    }
}
