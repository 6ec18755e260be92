//! Densities of the equilibrium measures `μ₁, μ₂, μ₃` and the constraint
//! `σ`, together with their masses and logarithmic potentials.
//!
//! All densities are boundary values of the `ξ` functions. They are
//! evaluated through the uniformization: for `x` on a cut the relevant
//! boundary value is `h(t)` at the preimage `t` on the matching arc, and
//! the arc point is carried as an offset from the nearby finite limit of
//! `t` so that the differences `α − Re√t` and `Re√t − β` do not cancel.

mod potential;
mod table;

pub use potential::{
    cauchy_transform, log_potential, mass, mass_on, verify_variational, VariationalReport,
};
pub use table::{cdf_at_sorted, fit_exponent, DensityTable, Endpoint};

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::ModelParams;
use crate::quadrature::{adaptive_with_endpoints, Tolerance};
use crate::spectral_curve::{self, Side};
use crate::uniformization::{arc_point, Contour};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Measure {
    Mu1,
    Mu2,
    Mu3,
    Sigma,
    SigmaMinusMu1,
}

impl Measure {
    pub const ALL: [Measure; 5] = [
        Measure::Mu1,
        Measure::Mu2,
        Measure::Mu3,
        Measure::Sigma,
        Measure::SigmaMinusMu1,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Measure::Mu1 => "mu1",
            Measure::Mu2 => "mu2",
            Measure::Mu3 => "mu3",
            Measure::Sigma => "sigma",
            Measure::SigmaMinusMu1 => "sigma_minus_mu1",
        }
    }

    /// Total mass, `None` for the infinite measures `σ` and `σ − μ₁`.
    pub fn total_mass(self) -> Option<f64> {
        match self {
            Measure::Mu1 | Measure::Mu3 => Some(0.5),
            Measure::Mu2 => Some(1.0),
            Measure::Sigma | Measure::SigmaMinusMu1 => None,
        }
    }
}

impl fmt::Display for Measure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Measure {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Measure::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown measure `{s}`")))
    }
}

/// Validated parameters together with the endpoints every density query
/// needs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Equilibrium {
    pub params: ModelParams,
    pub p: f64,
    pub q: f64,
}

impl Equilibrium {
    pub fn new(params: &ModelParams) -> Result<Self> {
        let e = spectral_curve::endpoints(params)?;
        Ok(Equilibrium {
            params: *params,
            p: e.p,
            q: e.q,
        })
    }

    /// Support as a closed interval, with `−∞` for unbounded supports.
    pub fn support(&self, measure: Measure) -> (f64, f64) {
        match measure {
            Measure::Mu2 => (0.0, self.p),
            Measure::SigmaMinusMu1 => (f64::NEG_INFINITY, -self.q),
            _ => (f64::NEG_INFINITY, 0.0),
        }
    }

    pub fn density(&self, measure: Measure, x: f64) -> Result<f64> {
        let outside = || Error::OutsideSupport {
            measure: measure.name(),
            x,
        };
        let alpha = self.params.alpha();
        let beta = self.params.beta();
        match measure {
            Measure::Mu2 => {
                if !(x > 0.0 && x < self.p) {
                    return Err(outside());
                }
                let pt = arc_point(&self.params, Contour::G2Minus, x)?;
                let t = pt.t();
                let h = (t - self.params.alpha2()) * (t - self.params.beta2()) / self.params.gap();
                Ok(h.im / PI)
            }
            Measure::Sigma => {
                if !(x < 0.0) {
                    return Err(outside());
                }
                Ok(sigma_density(alpha, x))
            }
            Measure::SigmaMinusMu1 => {
                if !(x < 0.0) {
                    return Err(outside());
                }
                if x >= -self.q {
                    return Ok(0.0);
                }
                let s = arc_point(&self.params, Contour::G1Plus, x)?.offset;
                // h = s (s − (β²−α²)) / (β²−α²) with s = t − α²
                let d = self.params.gap();
                let h = s * (s - d) / d;
                Ok(-h.im / PI)
            }
            Measure::Mu1 => {
                if !(x < 0.0) {
                    return Err(outside());
                }
                if x >= -self.q {
                    return Ok(sigma_density(alpha, x));
                }
                let pt = arc_point(&self.params, Contour::G1Plus, x)?;
                let root = pt.t().sqrt();
                let diff = -(pt.offset / (root + alpha)).re;
                Ok(diff / (PI * (-x).sqrt()))
            }
            Measure::Mu3 => {
                if !(x < 0.0) {
                    return Err(outside());
                }
                let pt = arc_point(&self.params, Contour::G3Plus, x)?;
                let root = pt.t().sqrt();
                let diff = (pt.offset / (root + beta)).re;
                Ok(diff / (PI * (-x).sqrt()))
            }
        }
    }

    /// The same densities from one-sided limits of the quartic's roots.
    /// Unavailable within `1e-6·p` of a branch point.
    pub fn density_plemelj(&self, measure: Measure, x: f64) -> Result<f64> {
        let outside = || Error::OutsideSupport {
            measure: measure.name(),
            x,
        };
        let alpha = self.params.alpha();
        let beta = self.params.beta();
        let xi = |x: f64| spectral_curve::boundary_values(&self.params, x, Side::Plus).map(|b| b.xi);
        match measure {
            Measure::Mu2 => {
                if !(x > 0.0 && x < self.p) {
                    return Err(outside());
                }
                Ok(xi(x)?[1].im / PI)
            }
            Measure::Sigma => self.density(measure, x),
            Measure::SigmaMinusMu1 | Measure::Mu1 => {
                if !(x < 0.0) {
                    return Err(outside());
                }
                let smu1 = -xi(x)?[0].im / PI;
                if measure == Measure::SigmaMinusMu1 {
                    Ok(smu1)
                } else {
                    Ok(sigma_density(alpha, x) - smu1)
                }
            }
            Measure::Mu3 => {
                if !(x < 0.0) {
                    return Err(outside());
                }
                Ok(-(xi(x)?[3].im + beta / (-x).sqrt()) / PI)
            }
        }
    }

    /// `μ₃` density as half the balayage of `μ₂` onto `ℝ₋`:
    /// `(1/(2π√|x|)) ∫₀^p √s/(s−x) dμ₂(s)`.
    ///
    /// Evaluated at two tolerances; a disagreement beyond `1e-6` relative
    /// is reported as a quadrature failure.
    pub fn density_mu3_balayage(&self, x: f64) -> Result<f64> {
        if !(x < 0.0) {
            return Err(Error::OutsideSupport { measure: "mu3", x });
        }
        let integrand = |s: f64| {
            if s <= 0.0 || s >= self.p {
                return 0.0;
            }
            s.sqrt() / (s - x) * self.density(Measure::Mu2, s).unwrap_or(f64::NAN)
        };
        let coarse = adaptive_with_endpoints(integrand, 0.0, self.p, 3, 2, Tolerance::new(0.0, 1e-9))?;
        let fine = adaptive_with_endpoints(integrand, 0.0, self.p, 3, 2, Tolerance::new(0.0, 1e-11))?;
        if (coarse.value - fine.value).abs() > 1e-6 * fine.value.abs() {
            return Err(Error::QuadratureFailure {
                context: format!("balayage refinement disagrees at x = {x}"),
                estimate: (coarse.value - fine.value).abs(),
            });
        }
        Ok(fine.value / (2.0 * PI * (-x).sqrt()))
    }

    /// `ξ₂,₊(x)` for `x ∈ (0, p)` through the uniformization.
    pub fn xi2_plus(&self, x: f64) -> Result<Complex64> {
        let t = arc_point(&self.params, Contour::G2Minus, x)?.t();
        Ok((t - self.params.alpha2()) * (t - self.params.beta2()) / self.params.gap())
    }
}

pub fn sigma_density(alpha: f64, x: f64) -> f64 {
    alpha / (PI * (-x).sqrt())
}

/// Density of `measure` at `x`.
pub fn density(params: &ModelParams, measure: Measure, x: f64) -> Result<f64> {
    Equilibrium::new(params)?.density(measure, x)
}

/// `σ` density `α/(π√|x|)`.
pub fn density_sigma(params: &ModelParams, x: f64) -> Result<f64> {
    if !(x < 0.0) {
        return Err(Error::OutsideSupport { measure: "sigma", x });
    }
    Ok(sigma_density(params.alpha(), x))
}

/// Density at `x ≤ −c` of the balayage of the unit point mass at `z > −c`
/// onto `(−∞, −c]`.
pub fn balayage_point_density(c: f64, z: f64, x: f64) -> Result<f64> {
    if !(z > -c) || !(x <= -c) || c < 0.0 {
        return Err(Error::InvalidArgument(format!(
            "balayage needs c ≥ 0, z > −c, x ≤ −c (got c = {c}, z = {z}, x = {x})"
        )));
    }
    Ok((z + c).sqrt() / (PI * (-(x + c)).sqrt() * (z - x)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::{map_power, map_tail};

    fn eq() -> Equilibrium {
        Equilibrium::new(&ModelParams::curve(1.0, 2.0).unwrap()).unwrap()
    }

    fn close(a: f64, b: f64, rel: f64) {
        assert!((a - b).abs() <= rel * b.abs(), "{a} vs {b}");
    }

    #[test]
    fn reference_values() {
        let e = eq();
        close(e.density(Measure::Mu2, 1.0).unwrap(), 0.167_538_559_497_054_15, 1e-12);
        close(e.density(Measure::Mu2, 2.0).unwrap(), 0.077_235_193_435_865_63, 1e-12);
        close(e.density(Measure::Mu2, 4.0).unwrap(), 0.013_622_243_895_060_178, 1e-11);
        close(e.density(Measure::Mu3, -1.0).unwrap(), 0.046_086_360_174_984_91, 1e-11);
        close(e.density(Measure::Mu3, -10.0).unwrap(), 0.002_430_445_372_082_562_5, 1e-10);
        close(e.density(Measure::Mu3, -0.1).unwrap(), 0.488_784_965_86, 1e-10);
        close(e.density(Measure::Mu3, -0.001).unwrap(), 22.800_521_427_259, 1e-11);
        close(e.density(Measure::SigmaMinusMu1, -0.2).unwrap(), 0.368_564_528_062_158_3, 1e-12);
        close(e.density(Measure::SigmaMinusMu1, -1.0).unwrap(), 0.265_360_888_095_328_1, 1e-12);
        close(e.density(Measure::SigmaMinusMu1, -10.0).unwrap(), 0.098_017_578_348_644_73, 1e-12);
    }

    #[test]
    fn plemelj_route_agrees() {
        let e = eq();
        for (m, x) in [
            (Measure::Mu2, 0.01),
            (Measure::Mu2, 1.0),
            (Measure::Mu2, 4.0),
            (Measure::Mu3, -0.05),
            (Measure::Mu3, -3.0),
            (Measure::Mu1, -0.5),
            (Measure::SigmaMinusMu1, -2.0),
        ] {
            close(e.density_plemelj(m, x).unwrap(), e.density(m, x).unwrap(), 1e-6);
        }
    }

    #[test]
    fn saturation_and_splitting() {
        let e = eq();
        for x in [-0.09, -0.01, -1e-5] {
            assert_eq!(e.density(Measure::Mu1, x).unwrap(), sigma_density(1.0, x));
            assert_eq!(e.density(Measure::SigmaMinusMu1, x).unwrap(), 0.0);
        }
        for x in [-0.2, -5.0, -300.0] {
            let sum = e.density(Measure::Mu1, x).unwrap() + e.density(Measure::SigmaMinusMu1, x).unwrap();
            close(sum, sigma_density(1.0, x), 1e-12);
        }
    }

    #[test]
    fn sigma_values() {
        let p = ModelParams::curve(1.0, 2.0).unwrap();
        close(density_sigma(&p, -1.0).unwrap(), 1.0 / PI, 1e-15);
        close(density_sigma(&p, -4.0).unwrap(), 0.5 / PI, 1e-15);
        assert!(density_sigma(&p, 1.0).is_err());
    }

    #[test]
    fn support_is_enforced() {
        let e = eq();
        assert!(matches!(e.density(Measure::Mu2, 5.0), Err(Error::OutsideSupport { .. })));
        assert!(matches!(e.density(Measure::Mu3, 0.5), Err(Error::OutsideSupport { .. })));
    }

    #[test]
    fn point_balayage() {
        close(balayage_point_density(0.0, 1.0, -1.0).unwrap(), 0.5 / PI, 1e-15);
        let (c, z) = (0.5, 2.0);
        let mut f = |x: f64| balayage_point_density(c, z, x).unwrap_or(0.0);
        let near = map_power(&mut f, -c, -c - 1.0, 2, Tolerance::default()).unwrap();
        let tail = map_tail(&mut f, -c - 1.0, 1.0, 2, Tolerance::default()).unwrap();
        close(near.value + tail.value, 1.0, 1e-10);
        let r = balayage_point_density(c, z, -1e6).unwrap() / balayage_point_density(c, z, -1e7).unwrap();
        close(r.log10(), 1.5, 1e-3);
    }

    #[test]
    fn balayage_route_matches() {
        let e = eq();
        for x in [-1e-3, -0.1, -1.0, -10.0] {
            close(e.density_mu3_balayage(x).unwrap(), e.density(Measure::Mu3, x).unwrap(), 1e-8);
        }
    }
}
