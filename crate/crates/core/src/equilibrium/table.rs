use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::Serialize;

use super::{Equilibrium, Measure};
use crate::error::{Error, Result};
use crate::quadrature::{adaptive_with_endpoints, Tolerance};

/// Endpoint at which a local power law is fitted.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Endpoint {
    /// `x → 0` (from the right for `μ₂`, from the left otherwise).
    Zero,
    /// `x → p⁻`.
    P,
    /// `x → −q⁻`.
    MinusQ,
}

/// Sampled density with fitted endpoint exponents.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DensityTable {
    pub measure: Measure,
    pub rows: Vec<(f64, f64)>,
    pub exponent_fits: BTreeMap<String, f64>,
}

/// Points `x` at 12 log-spaced distances over three decades from the
/// endpoint, nearest first, with the distances.
///
/// At `p` and `−q` the window is `[1e-9, 1e-6]` times the endpoint. At `0`
/// the densities follow `|x|^{−2/3}` only once `|x| ≪ x₀ = (β²−α²)²/(α²+β²)³`,
/// so the windows are `[1e-9, 1e-6]·x₀` for `μ₂` and, because the leading
/// correction of `μ₃` is only `O(|x|^{1/6})`, `[1e-16, 1e-13]·x₀` for `μ₃`.
fn fit_points(eq: &Equilibrium, measure: Measure, end: Endpoint) -> Result<Vec<(f64, f64)>> {
    let (p, q) = (eq.p, eq.q);
    let params = &eq.params;
    let x0 = (params.gap() * params.gap() / (params.alpha2() + params.beta2()).powi(3)).min(p);
    let start = if measure == Measure::Mu3 { -16.0 } else { -9.0 };
    let dist = |i: usize| 10f64.powf(start + 3.0 * i as f64 / 11.0);
    let place: Box<dyn Fn(f64) -> f64> = match (end, measure) {
        (Endpoint::Zero, Measure::Mu2) => Box::new(move |d| d * x0),
        (Endpoint::Zero, Measure::Mu3) => Box::new(move |d| -d * x0),
        (Endpoint::P, Measure::Mu2) => Box::new(move |d| p - d * p),
        (Endpoint::MinusQ, Measure::SigmaMinusMu1) => Box::new(move |d| -q - d * q),
        _ => {
            return Err(Error::InvalidArgument(format!(
                "no power law fitted for {measure} at {end:?}"
            )))
        }
    };
    Ok((0..12)
        .map(|i| {
            let x = place(dist(i));
            (x, dist(i))
        })
        .collect())
}

/// Local exponent of `measure` at `end` by weighted least squares of
/// `log density` against `log distance`; points nearer the endpoint get
/// larger weights, `w ∝ distance^{−1/3}`.
pub fn fit_exponent(eq: &Equilibrium, measure: Measure, end: Endpoint) -> Result<f64> {
    let pts = fit_points(eq, measure, end)?;
    let mut rows = Vec::with_capacity(pts.len());
    for (x, d) in pts {
        let v = eq.density(measure, x)?;
        rows.push((d.ln(), v.ln(), d.powf(-1.0 / 3.0)));
    }
    let sw: f64 = rows.iter().map(|r| r.2).sum();
    let mx = rows.iter().map(|r| r.2 * r.0).sum::<f64>() / sw;
    let my = rows.iter().map(|r| r.2 * r.1).sum::<f64>() / sw;
    let sxy: f64 = rows.iter().map(|r| r.2 * (r.0 - mx) * (r.1 - my)).sum();
    let sxx: f64 = rows.iter().map(|r| r.2 * (r.0 - mx) * (r.0 - mx)).sum();
    Ok(sxy / sxx)
}

impl DensityTable {
    /// Samples `measure` on `npoints` abscissae clustered toward the ends of
    /// its support and fits the endpoint exponents that apply.
    pub fn build(eq: &Equilibrium, measure: Measure, npoints: usize) -> Result<Self> {
        let n = npoints.max(2);
        let (p, q) = (eq.p, eq.q);
        let far = 1e4 * q.max(1.0);
        let u = |i: usize| (i as f64 + 0.5) / n as f64;
        let xs: Vec<f64> = match measure {
            Measure::Mu2 => (0..n)
                .map(|i| p * (0.5 - 0.5 * (std::f64::consts::PI * u(i)).cos()))
                .collect(),
            Measure::SigmaMinusMu1 => (0..n)
                .map(|i| -q - q * 1e-9 * (far / (q * 1e-9)).powf(1.0 - u(i)))
                .collect(),
            _ => (0..n).map(|i| -(1e-9 * q) * (far / (1e-9 * q)).powf(1.0 - u(i))).collect(),
        };
        let rows: Vec<(f64, f64)> = xs
            .into_par_iter()
            .map(|x| Ok((x, eq.density(measure, x)?)))
            .collect::<Result<_>>()?;
        if let Some(&(x, v)) = rows.iter().find(|r| !(r.1 >= -1e-12)) {
            return Err(Error::ViolationDetected {
                condition: "density_nonnegative",
                x,
                value: v,
            });
        }
        let mut exponent_fits = BTreeMap::new();
        match measure {
            Measure::Mu2 => {
                exponent_fits.insert("near_zero".into(), fit_exponent(eq, measure, Endpoint::Zero)?);
                exponent_fits.insert("near_finite_endpoint".into(), fit_exponent(eq, measure, Endpoint::P)?);
            }
            Measure::Mu3 => {
                exponent_fits.insert("near_zero".into(), fit_exponent(eq, measure, Endpoint::Zero)?);
            }
            Measure::SigmaMinusMu1 => {
                exponent_fits.insert(
                    "near_finite_endpoint".into(),
                    fit_exponent(eq, measure, Endpoint::MinusQ)?,
                );
            }
            _ => {}
        }
        Ok(DensityTable {
            measure,
            rows,
            exponent_fits,
        })
    }
}

/// `μ₂((0, x])` at every `x` of a nondecreasing list, by integrating the
/// density between consecutive abscissae.
pub fn cdf_at_sorted(eq: &Equilibrium, xs: &[f64]) -> Result<Vec<f64>> {
    if xs.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::InvalidArgument("abscissae must be sorted".into()));
    }
    let p = eq.p;
    let clipped: Vec<f64> = xs.iter().map(|&x| x.clamp(0.0, p)).collect();
    let mut edges = Vec::with_capacity(clipped.len() + 1);
    edges.push(0.0);
    edges.extend_from_slice(&clipped);
    let tol = Tolerance::new(1e-14, 1e-11);
    let pieces: Vec<f64> = edges
        .par_windows(2)
        .map(|w| {
            let (a, b) = (w[0], w[1]);
            if !(b > a) {
                return Ok(0.0);
            }
            let ka = if a == 0.0 { 3 } else { 1 };
            let kb = if b == p { 2 } else { 1 };
            let g = |s: f64| eq.density(Measure::Mu2, s).unwrap_or(f64::NAN);
            Ok(adaptive_with_endpoints(g, a, b, ka, kb, tol)?.value)
        })
        .collect::<Result<_>>()?;
    let mut acc = 0.0;
    Ok(pieces
        .into_iter()
        .map(|v| {
            acc += v;
            acc
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::ModelParams;

    fn eq() -> Equilibrium {
        Equilibrium::new(&ModelParams::curve(1.0, 2.0).unwrap()).unwrap()
    }

    #[test]
    fn exponents() {
        let e = eq();
        let s = fit_exponent(&e, Measure::Mu2, Endpoint::Zero).unwrap();
        assert!((s + 2.0 / 3.0).abs() < 0.01, "{s}");
        let s = fit_exponent(&e, Measure::Mu2, Endpoint::P).unwrap();
        assert!((s - 0.5).abs() < 0.01, "{s}");
        let s = fit_exponent(&e, Measure::Mu3, Endpoint::Zero).unwrap();
        assert!((s + 2.0 / 3.0).abs() < 0.01, "{s}");
        let s = fit_exponent(&e, Measure::SigmaMinusMu1, Endpoint::MinusQ).unwrap();
        assert!((s - 0.5).abs() < 0.02, "{s}");
    }

    #[test]
    fn table_is_sorted_and_nonnegative() {
        let e = eq();
        for m in [Measure::Mu1, Measure::Mu2, Measure::Mu3, Measure::SigmaMinusMu1] {
            let t = DensityTable::build(&e, m, 60).unwrap();
            assert!(t.rows.windows(2).all(|w| w[0].0 < w[1].0), "{m}");
            assert!(t.rows.iter().all(|r| r.1 >= -1e-12));
        }
    }

    #[test]
    fn cdf_reaches_one() {
        let e = eq();
        let xs = [-1.0, 0.5, 1.0, 2.0, e.p, 10.0];
        let f = cdf_at_sorted(&e, &xs).unwrap();
        assert_eq!(f[0], 0.0);
        assert!(f.windows(2).all(|w| w[1] >= w[0]));
        assert!((f[5] - 1.0).abs() < 1e-9);
    }
}
