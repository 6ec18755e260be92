use rayon::prelude::*;
use serde::Serialize;

use super::{Equilibrium, Measure};
use crate::error::{Error, Result};
use crate::model::ModelParams;
use crate::quadrature::{adaptive_with_endpoints, map_tail, Tolerance};

const TOL: Tolerance = Tolerance {
    abs: 1e-13,
    rel: 1e-11,
    max_intervals: 4000,
};

/// A finite piece `[l, r]` of a support with the substitution powers used
/// at each end.
#[derive(Debug, Clone, Copy)]
struct Piece {
    l: f64,
    r: f64,
    kl: u32,
    kr: u32,
}

/// Finite pieces of the support plus the start of the `|x|^{−3/2}` tail.
fn pieces(eq: &Equilibrium, measure: Measure) -> (Vec<Piece>, Option<(f64, f64)>) {
    let q = eq.q;
    let far = q.max(1.0);
    match measure {
        Measure::Mu2 => (
            vec![Piece {
                l: 0.0,
                r: eq.p,
                kl: 3,
                kr: 2,
            }],
            None,
        ),
        Measure::Mu3 => (
            vec![Piece {
                l: -far,
                r: 0.0,
                kl: 1,
                kr: 3,
            }],
            Some((-far, far)),
        ),
        Measure::Sigma => (
            vec![Piece {
                l: -far,
                r: 0.0,
                kl: 1,
                kr: 2,
            }],
            Some((-far, far)),
        ),
        Measure::Mu1 => (
            vec![
                Piece {
                    l: -q - far,
                    r: -q,
                    kl: 1,
                    kr: 2,
                },
                Piece {
                    l: -q,
                    r: 0.0,
                    kl: 1,
                    kr: 2,
                },
            ],
            Some((-q - far, far)),
        ),
        Measure::SigmaMinusMu1 => (
            vec![Piece {
                l: -q - far,
                r: -q,
                kl: 1,
                kr: 2,
            }],
            Some((-q - far, far)),
        ),
    }
}

/// Splits the piece containing `x` so that a log singularity at `x` sits at
/// a piece end.
fn split_at(pieces: Vec<Piece>, x: f64) -> Vec<Piece> {
    let mut out = Vec::with_capacity(pieces.len() + 1);
    for pc in pieces {
        if x > pc.l && x < pc.r {
            out.push(Piece { r: x, kr: 2, ..pc });
            out.push(Piece { l: x, kl: 2, ..pc });
        } else {
            out.push(pc);
        }
    }
    out
}

fn integrate<F: Fn(f64) -> f64>(
    eq: &Equilibrium,
    measure: Measure,
    split: Option<f64>,
    tail_power: u32,
    weight: F,
) -> Result<f64> {
    let (mut list, mut tail) = pieces(eq, measure);
    if let (Some(x), Some((start, scale))) = (split, tail) {
        if x <= start {
            // Pull the tail start below `x` so the log singularity sits in a
            // finite piece.
            let lower = 2.0 * x - start;
            list.insert(
                0,
                Piece {
                    l: lower,
                    r: start,
                    kl: 1,
                    kr: 1,
                },
            );
            tail = Some((lower, scale.max(-lower)));
        }
    }
    if let Some(x) = split {
        list = split_at(list, x);
    }
    let g = |y: f64| match eq.density(measure, y) {
        Ok(d) => d * weight(y),
        Err(_) => f64::NAN,
    };
    let mut total = 0.0;
    for pc in list {
        total += adaptive_with_endpoints(g, pc.l, pc.r, pc.kl, pc.kr, TOL)?.value;
    }
    if let Some((start, scale)) = tail {
        let mut g = g;
        total += map_tail(&mut g, start, scale, tail_power, TOL)?.value;
    }
    Ok(total)
}

/// Total mass of a finite measure.
pub fn mass(params: &ModelParams, measure: Measure) -> Result<f64> {
    if measure.total_mass().is_none() {
        return Err(Error::InvalidArgument(format!("{measure} has infinite mass")));
    }
    let eq = Equilibrium::new(params)?;
    integrate(&eq, measure, None, 2, |_| 1.0)
}

/// Mass of `measure` on the window `[a, b]` intersected with its support.
pub fn mass_on(params: &ModelParams, measure: Measure, a: f64, b: f64) -> Result<f64> {
    let eq = Equilibrium::new(params)?;
    let (lo, hi) = eq.support(measure);
    let (l, r) = (a.max(lo), b.min(hi));
    if !(l < r) || !l.is_finite() {
        return Ok(0.0);
    }
    let power = |v: f64| {
        let singular = v == 0.0 || v == eq.p || v == -eq.q;
        match (singular, v == 0.0, measure) {
            (true, true, Measure::Mu2 | Measure::Mu3) => 3,
            (true, _, _) => 2,
            _ => 1,
        }
    };
    let g = |y: f64| eq.density(measure, y).unwrap_or(f64::NAN);
    Ok(adaptive_with_endpoints(g, l, r, power(l), power(r), TOL)?.value)
}

/// `U^μ(x) = ∫ log(1/|x−y|) dμ(y)` for a finite measure.
pub fn log_potential(params: &ModelParams, measure: Measure, x: f64) -> Result<f64> {
    let eq = Equilibrium::new(params)?;
    log_potential_eq(&eq, measure, x)
}

fn log_potential_eq(eq: &Equilibrium, measure: Measure, x: f64) -> Result<f64> {
    if measure.total_mass().is_none() {
        return Err(Error::InvalidArgument(format!(
            "the logarithmic potential of {measure} diverges"
        )));
    }
    integrate(eq, measure, Some(x), 4, |y| -(x - y).abs().ln())
}

/// Cauchy transform `∫ dμ(y)/(y − z)` at a real `z` off the support.
pub fn cauchy_transform(params: &ModelParams, measure: Measure, z: f64) -> Result<f64> {
    let eq = Equilibrium::new(params)?;
    let (lo, hi) = eq.support(measure);
    if z >= lo && z <= hi {
        return Err(Error::InvalidArgument(format!("z = {z} lies on the support of {measure}")));
    }
    integrate(&eq, measure, None, 2, |y| 1.0 / (y - z))
}

/// Outcome of the Euler–Lagrange checks.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VariationalReport {
    /// Mean of the effective potential on `(0, p)`.
    pub ell: f64,
    /// `max − min` of the effective potential on `(0, p)`.
    pub spread_on_support: f64,
    /// `(x, F(x) − ℓ)` on `(p, 5p)` and `(x, U^{μ₂} − 2U^{μ₁})` on `(−q, 0)`;
    /// all must be positive.
    pub inequality_margins: Vec<(f64, f64)>,
    /// `(x, 2U^{μ₁} − U^{μ₂})` on `(−10q, −q)`; must vanish.
    pub delta1_residuals: Vec<(f64, f64)>,
    /// `(x, 2U^{μ₃} − U^{μ₂})` on `(−10q, 0)`; must vanish.
    pub balayage_residuals: Vec<(f64, f64)>,
}

impl VariationalReport {
    pub fn relative_spread(&self) -> f64 {
        self.spread_on_support / self.ell.abs()
    }
}

fn interior(a: f64, b: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| a + (b - a) * (i as f64 + 0.5) / n as f64).collect()
}

/// Evaluates the variational conditions without judging them.
pub fn variational_report(params: &ModelParams) -> Result<VariationalReport> {
    let eq = Equilibrium::new(params)?;
    let (p, q) = (eq.p, eq.q);
    let shift = 2.0 * (params.beta() - params.alpha());
    let u = |m: Measure, x: f64| log_potential_eq(&eq, m, x);
    let effective = |x: f64| -> Result<f64> {
        Ok(2.0 * u(Measure::Mu2, x)? - u(Measure::Mu1, x)? - u(Measure::Mu3, x)? + shift * x.sqrt())
    };
    let on_support: Vec<f64> = interior(0.0, p, 30)
        .into_par_iter()
        .map(effective)
        .collect::<Result<_>>()?;
    let ell = on_support.iter().sum::<f64>() / on_support.len() as f64;
    let (lo, hi) = on_support
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));

    let mut margins: Vec<(f64, f64)> = interior(p, 5.0 * p, 10)
        .into_par_iter()
        .map(|x| Ok((x, effective(x)? - ell)))
        .collect::<Result<_>>()?;
    let gap: Vec<(f64, f64)> = interior(-q, 0.0, 10)
        .into_par_iter()
        .map(|x| Ok((x, u(Measure::Mu2, x)? - 2.0 * u(Measure::Mu1, x)?)))
        .collect::<Result<_>>()?;
    margins.extend(gap);
    let delta1_residuals = interior(-10.0 * q, -q, 10)
        .into_par_iter()
        .map(|x| Ok((x, 2.0 * u(Measure::Mu1, x)? - u(Measure::Mu2, x)?)))
        .collect::<Result<_>>()?;
    let balayage_residuals = interior(-10.0 * q, 0.0, 10)
        .into_par_iter()
        .map(|x| Ok((x, 2.0 * u(Measure::Mu3, x)? - u(Measure::Mu2, x)?)))
        .collect::<Result<_>>()?;

    Ok(VariationalReport {
        ell,
        spread_on_support: hi - lo,
        inequality_margins: margins,
        delta1_residuals,
        balayage_residuals,
    })
}

/// Evaluates and checks the variational conditions: constancy on `(0, p)`
/// to `1e-4·|ℓ|`, strict inequalities off the supports, and the two
/// potential identities on `ℝ₋` to `1e-4`.
pub fn verify_variational(params: &ModelParams) -> Result<VariationalReport> {
    let report = variational_report(params)?;
    if !(report.spread_on_support < 1e-4 * report.ell.abs()) {
        return Err(Error::ViolationDetected {
            condition: "effective_potential_constant_on_support",
            x: f64::NAN,
            value: report.spread_on_support,
        });
    }
    if let Some(&(x, m)) = report.inequality_margins.iter().find(|(_, m)| !(*m > 0.0)) {
        return Err(Error::ViolationDetected {
            condition: "strict_inequality_off_support",
            x,
            value: m,
        });
    }
    for (name, list) in [
        ("delta1_equality", &report.delta1_residuals),
        ("balayage_equality", &report.balayage_residuals),
    ] {
        if let Some(&(x, r)) = list.iter().find(|(_, r)| !(r.abs() < 1e-4)) {
            return Err(Error::ViolationDetected {
                condition: name,
                x,
                value: r,
            });
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params() -> ModelParams {
        ModelParams::curve(1.0, 2.0).unwrap()
    }

    #[test]
    fn masses() {
        let p = params();
        assert!((mass(&p, Measure::Mu2).unwrap() - 1.0).abs() < 1e-10);
        assert!((mass(&p, Measure::Mu3).unwrap() - 0.5).abs() < 1e-8);
        assert!((mass(&p, Measure::Mu1).unwrap() - 0.5).abs() < 1e-6);
        assert!(mass(&p, Measure::Sigma).is_err());
    }

    #[test]
    fn window_mass_shrinks() {
        let p = params();
        let q = Equilibrium::new(&p).unwrap().q;
        let wide = mass_on(&p, Measure::SigmaMinusMu1, -q - 1.0, -q).unwrap();
        let narrow = mass_on(&p, Measure::SigmaMinusMu1, -q - 1e-4, -q).unwrap();
        assert!(wide > 0.0 && narrow > 0.0 && narrow < 1e-4 * wide);
    }

    #[test]
    fn sigma_cauchy_transform() {
        let p = params();
        let c = cauchy_transform(&p, Measure::Sigma, 1.0).unwrap();
        assert!((c + 1.0).abs() < 1e-9, "{c}");
    }

    #[test]
    fn far_field() {
        let p = params();
        let x = 1e4 * Equilibrium::new(&p).unwrap().p;
        let u = log_potential(&p, Measure::Mu2, x).unwrap();
        assert!((u + x.ln()).abs() < 1e-3);
    }
}
