//! The quartic spectral curve
//!
//! ```text
//! ξ⁴ − (α²+β²)/z · ξ² + (α²−β²)/z² · ξ + α²β²/z² = 0
//! ```
//!
//! its endpoints `p`, `q`, and the four sheet-labelled solution branches.

use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::ModelParams;
use crate::poly;

/// Which one-sided limit of a boundary value is requested.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Plus,
    Minus,
}

/// The four branches `(ξ₁, ξ₂, ξ₃, ξ₄)` at `z`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BranchSet {
    pub z: Complex64,
    pub xi: [Complex64; 4],
}

impl BranchSet {
    /// Largest relative quartic residual over the four branches.
    pub fn max_residual(&self, params: &ModelParams) -> f64 {
        self.xi
            .iter()
            .map(|&x| quartic_residual(params, self.z, x))
            .fold(0.0, f64::max)
    }

    /// Absolute deviations of the three Vieta relations
    /// `(Σξ, Σ_{j<k} ξⱼξₖ + (α²+β²)/z, Πξ/(α²β²/z²) − 1)`.
    pub fn vieta(&self, params: &ModelParams) -> [f64; 3] {
        let x = self.xi;
        let z = self.z;
        let sum = x.iter().sum::<Complex64>();
        let mut pairs = Complex64::new(0.0, 0.0);
        for j in 0..4 {
            for k in j + 1..4 {
                pairs += x[j] * x[k];
            }
        }
        let e2 = -(params.alpha2() + params.beta2()) / z;
        let prod = x[0] * x[1] * x[2] * x[3];
        let e4 = params.alpha2() * params.beta2() / (z * z);
        [
            sum.norm(),
            (pairs - e2).norm() / e2.norm(),
            (prod / e4 - 1.0).norm(),
        ]
    }
}

/// Endpoints of the supports and their preimages under the uniformization.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EndpointData {
    pub p: f64,
    pub q: f64,
    pub t_plus: f64,
    pub t_minus: f64,
    pub residuals: BTreeMap<String, f64>,
}

/// Coefficients of `D₁(z) = c₀ + c₁ z + c₂ z²`.
pub fn discriminant_coefficients(params: &ModelParams) -> [f64; 3] {
    let a = params.alpha2();
    let b = params.beta2();
    let g = a - b;
    [
        -27.0 * g * g,
        4.0 * (a + b) * (a * a - 34.0 * a * b + b * b),
        16.0 * a * b * g * g,
    ]
}

pub fn discriminant_d1(params: &ModelParams, z: f64) -> f64 {
    let [c0, c1, c2] = discriminant_coefficients(params);
    c0 + z * (c1 + z * c2)
}

/// `|D₁(z)|` divided by the magnitude of its largest term.
pub fn discriminant_relative(params: &ModelParams, z: f64) -> f64 {
    let [c0, c1, c2] = discriminant_coefficients(params);
    let scale = c0.abs().max((c1 * z).abs()).max((c2 * z * z).abs());
    discriminant_d1(params, z).abs() / scale
}

/// `p` and `q` from their closed forms.
///
/// Numerators are `R^{3/2} ± X` with `R = a²+14ab+b²`,
/// `X = 33a²b+33ab²−a³−b³`, `a = α²`, `b = β²`; whichever of the two
/// cancels is rewritten with `R³ − X² = 108ab(b−a)⁴`.
pub fn closed_form_endpoints(params: &ModelParams) -> (f64, f64) {
    let a = params.alpha2();
    let b = params.beta2();
    let d = params.gap();
    let r = a * a + 14.0 * a * b + b * b;
    let r32 = r * r.sqrt();
    let x = 33.0 * a * b * (a + b) - a * a * a - b * b * b;
    let den = 8.0 * a * b * d * d;
    if x >= 0.0 {
        let p = (r32 + x) / den;
        let q = 27.0 * d * d / (2.0 * (r32 + x));
        (p, q)
    } else {
        let p = 27.0 * d * d / (2.0 * (r32 - x));
        let q = (r32 - x) / den;
        (p, q)
    }
}

/// The two critical points `t₋ < 0 < t₊` of `z(t)`, the roots of
/// `3t² − (α²+β²)t − α²β²`.
pub fn critical_points(params: &ModelParams) -> (f64, f64) {
    let a = params.alpha2();
    let b = params.beta2();
    let s = (a * a + 14.0 * a * b + b * b).sqrt();
    let t_plus = (a + b + s) / 6.0;
    let t_minus = -2.0 * a * b / (a + b + s);
    (t_plus, t_minus)
}

fn z_real(params: &ModelParams, t: f64) -> f64 {
    let d = params.gap();
    let u = (t - params.alpha2()) * (t - params.beta2());
    t * d * d / (u * u)
}

/// Endpoints with every consistency residual recorded; fails if any exceeds
/// its bound.
pub fn endpoints(params: &ModelParams) -> Result<EndpointData> {
    let (p, q) = closed_form_endpoints(params);
    let (t_plus, t_minus) = critical_points(params);
    let a = params.alpha2();
    let b = params.beta2();
    let hhat = |t: f64| {
        let terms = [3.0 * t * t, t * (a + b), a * b];
        (terms[0] - terms[1] - terms[2]).abs() / terms.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    };

    let mut residuals = BTreeMap::new();
    let mut check = |name: &str, value: f64, bound: f64, static_name: &'static str| -> Result<()> {
        residuals.insert(name.to_string(), value);
        if !(value <= bound) {
            return Err(Error::ConsistencyFailure {
                check: static_name,
                residual: value,
                bound,
            });
        }
        Ok(())
    };
    check("d1_at_p", discriminant_relative(params, p), 1e-10, "d1_at_p")?;
    check("d1_at_minus_q", discriminant_relative(params, -q), 1e-10, "d1_at_minus_q")?;
    check("z_t_plus_vs_p", (z_real(params, t_plus) / p - 1.0).abs(), 1e-10, "z_t_plus_vs_p")?;
    check("z_t_minus_vs_q", (z_real(params, t_minus) / -q - 1.0).abs(), 1e-10, "z_t_minus_vs_q")?;
    check("hhat_t_plus", hhat(t_plus), 1e-12, "hhat_t_plus")?;
    check("hhat_t_minus", hhat(t_minus), 1e-12, "hhat_t_minus")?;
    let ordered = t_minus < 0.0 && 0.0 < a && a < t_plus && t_plus < b && p > 0.0 && q > 0.0;
    check("ordering", if ordered { 0.0 } else { 1.0 }, 0.0, "ordering")?;

    Ok(EndpointData {
        p,
        q,
        t_plus,
        t_minus,
        residuals,
    })
}

/// Quartic coefficients in `ξ`, constant term first.
fn quartic(params: &ModelParams, z: Complex64) -> [Complex64; 5] {
    let a = params.alpha2();
    let b = params.beta2();
    let zi = z.inv();
    let zi2 = zi * zi;
    [
        zi2 * (a * b),
        zi2 * (a - b),
        -zi * (a + b),
        Complex64::new(0.0, 0.0),
        Complex64::new(1.0, 0.0),
    ]
}

/// Quartic at `(z, ξ)` normalized by its largest term.
pub fn quartic_residual(params: &ModelParams, z: Complex64, xi: Complex64) -> f64 {
    let c = quartic(params, z);
    let terms = [c[0], c[1] * xi, c[2] * xi * xi, xi * xi * xi * xi];
    let sum: Complex64 = terms.iter().sum();
    let scale = terms.iter().map(|t| t.norm()).fold(0.0, f64::max);
    sum.norm() / scale
}

fn sqrt_principal(z: Complex64) -> Complex64 {
    z.sqrt()
}

/// Leading large-`z` behavior of the four branches.
fn asymptotic_branches(params: &ModelParams, z: Complex64) -> [Complex64; 4] {
    let s = sqrt_principal(z).inv();
    let a = params.alpha();
    let b = params.beta();
    let half = 0.5 / z;
    [s * a - half, -s * a - half, -s * b + half, s * b + half]
}

const PERMUTATIONS: [[usize; 4]; 24] = [
    [0, 1, 2, 3], [0, 1, 3, 2], [0, 2, 1, 3], [0, 2, 3, 1], [0, 3, 1, 2], [0, 3, 2, 1],
    [1, 0, 2, 3], [1, 0, 3, 2], [1, 2, 0, 3], [1, 2, 3, 0], [1, 3, 0, 2], [1, 3, 2, 0],
    [2, 0, 1, 3], [2, 0, 3, 1], [2, 1, 0, 3], [2, 1, 3, 0], [2, 3, 0, 1], [2, 3, 1, 0],
    [3, 0, 1, 2], [3, 0, 2, 1], [3, 1, 0, 2], [3, 1, 2, 0], [3, 2, 0, 1], [3, 2, 1, 0],
];

/// Assigns `found` to the labels of `reference` by the permutation with the
/// smallest maximal displacement. Returns the reordered roots and whether
/// the match is unambiguous: every displacement stays below a third of the
/// smallest separation among the reference roots.
pub(crate) fn match_roots(reference: &[Complex64; 4], found: &[Complex64]) -> ([Complex64; 4], bool) {
    let mut best = PERMUTATIONS[0];
    let mut best_cost = f64::INFINITY;
    for perm in PERMUTATIONS.iter() {
        let cost = (0..4)
            .map(|j| (found[perm[j]] - reference[j]).norm())
            .fold(0.0, f64::max);
        if cost < best_cost {
            best_cost = cost;
            best = *perm;
        }
    }
    let out = [found[best[0]], found[best[1]], found[best[2]], found[best[3]]];
    let mut sep = f64::INFINITY;
    for j in 0..4 {
        for k in j + 1..4 {
            sep = sep.min((reference[j] - reference[k]).norm());
        }
    }
    (out, best_cost < sep / 3.0)
}

fn min_gap(x: &[Complex64]) -> f64 {
    let mut gap = f64::INFINITY;
    for j in 0..x.len() {
        for k in j + 1..x.len() {
            gap = gap.min((x[j] - x[k]).norm());
        }
    }
    gap
}

fn raw_roots(params: &ModelParams, z: Complex64) -> Vec<Complex64> {
    poly::roots(&quartic(params, z))
}

/// Anchor radius for sheet identification.
pub fn anchor_radius(p: f64) -> f64 {
    1e6 * p.max(1.0)
}

/// Continuation path from the anchor to `z`: a ray at an argument kept at
/// least π/4 away from the real axis, then an arc at radius `|z|`.
pub(crate) fn continuation_path(z: Complex64, p: f64) -> Vec<(f64, f64)> {
    let r_anchor = anchor_radius(p).max(z.norm());
    let theta = z.arg();
    let clamp = std::f64::consts::FRAC_PI_4;
    let phi = if theta.abs() < clamp {
        clamp.copysign(if theta == 0.0 { 1.0 } else { theta })
    } else if theta.abs() > 3.0 * clamp {
        (3.0 * clamp).copysign(theta)
    } else {
        theta
    };
    let mut nodes = Vec::with_capacity(130);
    let steps = 64;
    let (l0, l1) = (r_anchor.ln(), z.norm().ln());
    for k in 0..=steps {
        let s = k as f64 / steps as f64;
        nodes.push(((l0 + (l1 - l0) * s).exp(), phi));
    }
    if phi != theta {
        for k in 1..=steps {
            let s = k as f64 / steps as f64;
            nodes.push((z.norm(), phi + (theta - phi) * s));
        }
    }
    nodes
}

/// Tracks a family of four labelled roots along `path`, refining steps
/// whenever the root matching becomes ambiguous.
pub(crate) fn track<F>(path: &[(f64, f64)], start: [Complex64; 4], mut roots_at: F) -> Result<[Complex64; 4]>
where
    F: FnMut(Complex64) -> Vec<Complex64>,
{
    let point = |r: f64, phi: f64| Complex64::from_polar(r, phi);
    let mut current = start;
    let mut budget = 20_000usize;
    for w in path.windows(2) {
        let (r0, p0) = w[0];
        let (r1, p1) = w[1];
        let mut s = 0.0_f64;
        let mut h = 1.0_f64;
        while s < 1.0 {
            let s_next = (s + h).min(1.0);
            let r = (r0.ln() + (r1.ln() - r0.ln()) * s_next).exp();
            let phi = p0 + (p1 - p0) * s_next;
            let (next, unambiguous) = match_roots(&current, &roots_at(point(r, phi)));
            if unambiguous {
                current = next;
                s = s_next;
                h = (h * 2.0).min(1.0);
            } else {
                h *= 0.5;
            }
            budget = budget.checked_sub(1).ok_or_else(|| Error::NoConvergence {
                context: "branch continuation step budget exhausted".into(),
            })?;
            if h < 1e-14 {
                return Err(Error::NoConvergence {
                    context: format!("branch continuation stalled at |z| = {r:e}"),
                });
            }
        }
    }
    Ok(current)
}

/// The four branches at a point off the cuts.
///
/// `z` must satisfy `Im z ≠ 0` or `z > p`; for boundary values on the real
/// axis use [`boundary_values`].
pub fn solve_branches(params: &ModelParams, z: Complex64) -> Result<BranchSet> {
    let (p, _) = closed_form_endpoints(params);
    if !z.is_finite() || z.norm() == 0.0 {
        return Err(Error::InvalidArgument(format!("z = {z} must be finite and nonzero")));
    }
    if z.im == 0.0 && z.re <= p {
        return Err(Error::InvalidArgument(format!(
            "z = {} lies on a cut; request a boundary value instead",
            z.re
        )));
    }
    let roots = raw_roots(params, z);
    let gap = min_gap(&roots);
    let scale = roots.iter().map(|r| r.norm()).fold(0.0, f64::max);
    if gap < 1e-8 * scale {
        return Err(Error::NearBranchPoint { z, gap: gap / scale });
    }
    let path = continuation_path(z, p);
    let (r0, phi0) = path[0];
    let anchor = Complex64::from_polar(r0, phi0);
    let (start, ok) = match_roots(&asymptotic_branches(params, anchor), &raw_roots(params, anchor));
    if !ok {
        return Err(Error::NoConvergence {
            context: "anchor roots do not separate".into(),
        });
    }
    let xi = track(&path, start, |w| raw_roots(params, w))?;
    // The last tracking step solved exactly at `z`; reuse the polished roots.
    let (xi, _) = match_roots(&xi, &roots);
    Ok(BranchSet { z, xi })
}

/// One-sided limits `ξⱼ,±(x)` on the real axis, from `x ± iε` with
/// `ε = 1e-8(1+|x|)` and one Richardson step.
///
/// Within `1e-6·p` of a branch point (`−q`, `0`, `p`) this returns
/// [`Error::NearBranchPoint`]; use the uniformization there.
pub fn boundary_values(params: &ModelParams, x: f64, side: Side) -> Result<BranchSet> {
    let (p, q) = closed_form_endpoints(params);
    let guard = 1e-6 * p;
    for bp in [-q, 0.0, p] {
        if (x - bp).abs() < guard {
            return Err(Error::NearBranchPoint {
                z: Complex64::new(x, 0.0),
                gap: (x - bp).abs(),
            });
        }
    }
    let eps = 1e-8 * (1.0 + x.abs());
    let sign = match side {
        Side::Plus => 1.0,
        Side::Minus => -1.0,
    };
    let far = solve_branches(params, Complex64::new(x, sign * eps))?;
    let near = solve_branches(params, Complex64::new(x, sign * eps * 0.5))?;
    let mut xi = [Complex64::new(0.0, 0.0); 4];
    for j in 0..4 {
        xi[j] = near.xi[j] * 2.0 - far.xi[j];
    }
    Ok(BranchSet {
        z: Complex64::new(x, 0.0),
        xi,
    })
}
