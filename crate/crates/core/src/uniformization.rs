//! Rational parametrization `t ↦ (z, ξ) = (t/h(t)², h(t))` of the spectral
//! curve, its per-sheet inverse, and the real-preimage contours `γₖ±`.
//!
//! The real preimages of the cuts are three pairs of conjugate arcs:
//! `γ₁±` joins `t₋` to `α²` (over `Δ₁ = (−∞, −q)`), `γ₂±` joins `t₊` to `∞`
//! (over `Δ₂ = (0, p)`), and `γ₃±` joins `β²` to `∞` (over `Δ₃ = (−∞, 0)`).

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::ModelParams;
use crate::poly;
use crate::spectral_curve::{self, closed_form_endpoints, critical_points};

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

/// `h(t) = (t−α²)(t−β²)/(β²−α²)`.
pub fn h_of_t(params: &ModelParams, t: Complex64) -> Complex64 {
    (t - params.alpha2()) * (t - params.beta2()) / params.gap()
}

/// `ĥ(t) = 3t² − (α²+β²)t − α²β²`, whose roots are `t±`.
pub fn hhat(params: &ModelParams, t: Complex64) -> Complex64 {
    t * t * 3.0 - t * (params.alpha2() + params.beta2()) - params.alpha2() * params.beta2()
}

/// `z(t) = t/h(t)²`.
pub fn z_of_t(params: &ModelParams, t: Complex64) -> Result<Complex64> {
    if (t - params.alpha2()).norm() < 1e-12 || (t - params.beta2()).norm() < 1e-12 {
        return Err(Error::PoleAtInfinitySheet { t });
    }
    let d = params.gap();
    let u = (t - params.alpha2()) * (t - params.beta2());
    Ok(t * (d * d) / (u * u))
}

/// `z′(t) = −(β²−α²)² ĥ(t) / ((t−α²)³(t−β²)³)`.
pub fn dz_dt(params: &ModelParams, t: Complex64) -> Complex64 {
    let d = params.gap();
    let u = (t - params.alpha2()) * (t - params.beta2());
    -hhat(params, t) * (d * d) / (u * u * u)
}

/// Relative residual of the quartic at `(z(t), h(t))`.
pub fn curve_identity_check(params: &ModelParams, t: Complex64) -> f64 {
    match z_of_t(params, t) {
        Ok(z) => spectral_curve::quartic_residual(params, z, h_of_t(params, t)),
        Err(_) => f64::NAN,
    }
}

/// Coefficients (constant first) of `z(t−α²)²(t−β²)² − (β²−α²)² t` in the
/// shifted variable `s = t − center`.
fn preimage_poly(params: &ModelParams, z: Complex64, center: f64) -> [Complex64; 5] {
    let d = params.gap();
    let ua = center - params.alpha2();
    let ub = center - params.beta2();
    // (s + ua)² (s + ub)² = (s² + 2ua s + ua²)(s² + 2ub s + ub²)
    let q = [
        ua * ua * ub * ub,
        2.0 * ua * ub * (ua + ub),
        ua * ua + ub * ub + 4.0 * ua * ub,
        2.0 * (ua + ub),
        1.0,
    ];
    let mut out = [Complex64::new(0.0, 0.0); 5];
    for k in 0..5 {
        out[k] = z * q[k];
    }
    out[0] -= d * d * center;
    out[1] -= d * d;
    out
}

/// All four preimages `t` of `z`, returned as offsets from `center`.
pub fn preimages(params: &ModelParams, z: Complex64, center: f64) -> Vec<Complex64> {
    poly::roots(&preimage_poly(params, z, center))
}

/// Sheet domains: sheet 1 is cut along `(−∞,−q]`, sheet 2 along
/// `(−∞,−q] ∪ [0,p]`, sheet 3 along `(−∞,p]`, sheet 4 along `(−∞,0]`.
pub fn in_sheet_domain(params: &ModelParams, sheet: usize, z: Complex64) -> bool {
    if z.im != 0.0 {
        return true;
    }
    let (p, q) = closed_form_endpoints(params);
    let x = z.re;
    match sheet {
        1 => x > -q,
        2 => (x > -q && x < 0.0) || x > p,
        3 => x > p,
        4 => x > 0.0,
        _ => false,
    }
}

/// The preimage of `z` in the domain of sheet `sheet ∈ 1..=4`.
///
/// Seeds come from the large-`z` expansion at `α²` (sheets 1, 2) and `β²`
/// (sheets 3, 4), continued along the same path the branch solver uses;
/// every step re-solves the quartic preimage equation and matches roots.
pub fn t_of_z(params: &ModelParams, sheet: usize, z: Complex64) -> Result<Complex64> {
    if !(1..=4).contains(&sheet) {
        return Err(Error::InvalidArgument(format!("sheet {sheet} not in 1..=4")));
    }
    if !z.is_finite() || z.norm() == 0.0 {
        return Err(Error::InvalidArgument(format!("z = {z} must be finite and nonzero")));
    }
    if !in_sheet_domain(params, sheet, z) {
        return Err(Error::InvalidArgument(format!("z = {} lies on a cut of sheet {sheet}", z.re)));
    }
    let (p, _) = closed_form_endpoints(params);
    let path = spectral_curve::continuation_path(z, p);
    let (r0, phi0) = path[0];
    let anchor = Complex64::from_polar(r0, phi0);
    let s = anchor.sqrt().inv();
    let (a, b) = (params.alpha2(), params.beta2());
    let guess = [
        s * -params.alpha() + a,
        s * params.alpha() + a,
        s * -params.beta() + b,
        s * params.beta() + b,
    ];
    let roots_at = |w: Complex64| preimages(params, w, 0.0);
    let (start, ok) = spectral_curve::match_roots(&guess, &roots_at(anchor));
    if !ok {
        return Err(Error::NoConvergence {
            context: "anchor preimages do not separate".into(),
        });
    }
    let ts = spectral_curve::track(&path, start, roots_at)?;
    let t = newton_preimage(params, z, ts[sheet - 1]).unwrap_or(ts[sheet - 1]);
    Ok(t)
}

/// Newton iteration on the preimage polynomial.
fn newton_preimage(params: &ModelParams, z: Complex64, seed: Complex64) -> Option<Complex64> {
    let coeffs = preimage_poly(params, z, 0.0);
    let mut t = seed;
    for _ in 0..60 {
        let (f, df) = poly::eval_with_derivative(&coeffs, t);
        if f.norm() == 0.0 {
            return Some(t);
        }
        let step = f / df;
        if !step.is_finite() {
            return None;
        }
        t -= step;
        if step.norm() <= 1e-15 * t.norm().max(1e-300) {
            return Some(poly::polish(&coeffs, t));
        }
    }
    None
}

/// Labels of the six contour arcs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Contour {
    G1Plus,
    G1Minus,
    G2Plus,
    G2Minus,
    G3Plus,
    G3Minus,
}

impl Contour {
    pub const ALL: [Contour; 6] = [
        Contour::G1Plus,
        Contour::G1Minus,
        Contour::G2Plus,
        Contour::G2Minus,
        Contour::G3Plus,
        Contour::G3Minus,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Contour::G1Plus => "g1plus",
            Contour::G1Minus => "g1minus",
            Contour::G2Plus => "g2plus",
            Contour::G2Minus => "g2minus",
            Contour::G3Plus => "g3plus",
            Contour::G3Minus => "g3minus",
        }
    }

    /// `1`, `2` or `3`.
    pub fn index(self) -> usize {
        match self {
            Contour::G1Plus | Contour::G1Minus => 1,
            Contour::G2Plus | Contour::G2Minus => 2,
            Contour::G3Plus | Contour::G3Minus => 3,
        }
    }

    /// Whether the arc lies in the upper half `t`-plane.
    pub fn upper(self) -> bool {
        matches!(self, Contour::G1Plus | Contour::G2Plus | Contour::G3Plus)
    }

    pub fn conjugate(self) -> Contour {
        match self {
            Contour::G1Plus => Contour::G1Minus,
            Contour::G1Minus => Contour::G1Plus,
            Contour::G2Plus => Contour::G2Minus,
            Contour::G2Minus => Contour::G2Plus,
            Contour::G3Plus => Contour::G3Minus,
            Contour::G3Minus => Contour::G3Plus,
        }
    }

    /// Open interval `Δₖ` parametrizing the arc.
    pub fn interval(self, params: &ModelParams) -> (f64, f64) {
        let (p, q) = closed_form_endpoints(params);
        match self.index() {
            1 => (f64::NEG_INFINITY, -q),
            2 => (0.0, p),
            _ => (f64::NEG_INFINITY, 0.0),
        }
    }

    /// Expansion center used for the shifted preimage variable: the finite
    /// limit of `t` at the unbounded end of `Δₖ`, or `0` for `γ₂`.
    pub fn center(self, params: &ModelParams) -> f64 {
        match self.index() {
            1 => params.alpha2(),
            2 => 0.0,
            _ => params.beta2(),
        }
    }
}

impl fmt::Display for Contour {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Contour {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Contour::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown contour `{s}`")))
    }
}

/// A point of a contour, with `t = center + offset` kept in split form so
/// that quantities like `t − β²` carry full relative precision.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArcPoint {
    pub x: f64,
    pub center: f64,
    pub offset: Complex64,
}

impl ArcPoint {
    pub fn t(&self) -> Complex64 {
        self.offset + self.center
    }
}

/// Preimage polynomial around a critical point `tc` of `z(t)`, where the two
/// lowest coefficients carry the exact factor `x − z(tc)`.
fn critical_poly(params: &ModelParams, x: f64, tc: f64) -> [Complex64; 5] {
    let d = params.gap();
    let ua = tc - params.alpha2();
    let ub = tc - params.beta2();
    let zc = tc * d * d / (ua * ua * ub * ub);
    let dx = x - zc;
    [
        c(dx * ua * ua * ub * ub),
        c(dx * 2.0 * ua * ub * (ua + ub)),
        c(x * (ua * ua + ub * ub + 4.0 * ua * ub)),
        c(x * 2.0 * (ua + ub)),
        c(x),
    ]
}

/// Splits four roots into the two conjugate pairs and returns the upper
/// member of the pair with the smaller mean real part, then of the other.
/// Pairing by conjugacy rather than by imaginary part tolerates a far pair
/// whose imaginary parts are swamped by rounding.
fn conjugate_pairs(roots: &[Complex64]) -> (Complex64, Complex64) {
    let pairings = [((0, 1), (2, 3)), ((0, 2), (1, 3)), ((0, 3), (1, 2))];
    let mismatch = |(i, j): (usize, usize)| (roots[i] - roots[j].conj()).norm();
    let &(first, second) = pairings
        .iter()
        .min_by(|a, b| (mismatch(a.0) + mismatch(a.1)).total_cmp(&(mismatch(b.0) + mismatch(b.1))))
        .expect("three pairings");
    let upper = |(i, j): (usize, usize)| {
        if roots[i].im >= roots[j].im {
            roots[i]
        } else {
            roots[j]
        }
    };
    let mean = |(i, j): (usize, usize)| roots[i].re + roots[j].re;
    if mean(first) <= mean(second) {
        (upper(first), upper(second))
    } else {
        (upper(second), upper(first))
    }
}

/// Preimage of `x ∈ Δₖ` on the requested arc, selected from the four roots
/// of the preimage equation.
///
/// On `(0, p)` there is one conjugate pair (`γ₂`); on `(−q, 0)` one pair
/// (`γ₃`); below `−q` two conjugate pairs; the upper root of the pair with the
/// smaller real part lies on `γ₁⁺` and the other on `γ₃⁺`. Near `p` and
/// `−q` the roots are computed around `t₊` and `t₋` so that the small
/// imaginary parts keep full relative precision.
pub fn arc_point(params: &ModelParams, which: Contour, x: f64) -> Result<ArcPoint> {
    let (lo, hi) = which.interval(params);
    if !(x > lo && x < hi) {
        return Err(Error::InvalidArgument(format!("x = {x} lies outside Δ{} of {which}", which.index())));
    }
    let center = which.center(params);
    let (p, q) = closed_form_endpoints(params);
    let (t_plus, t_minus) = critical_points(params);
    let (root_center, mut roots) = if which.index() == 2 && x > 0.5 * p {
        (t_plus, poly::roots(&critical_poly(params, x, t_plus)))
    } else if which.index() != 2 && (x + q).abs() < 0.5 * q {
        (t_minus, poly::roots(&critical_poly(params, x, t_minus)))
    } else {
        (center, preimages(params, c(x), center))
    };
    let offset = if which.index() == 2 {
        roots.sort_by(|a, b| a.im.total_cmp(&b.im));
        roots[0]
    } else {
        roots.sort_by(|a, b| b.im.total_cmp(&a.im));
        if x > -q {
            roots[0]
        } else {
            let (left, right) = conjugate_pairs(&roots);
            if which.index() == 1 {
                left
            } else {
                right
            }
        }
    };
    let offset = offset + (root_center - center);
    let offset = if which.upper() == (offset.im >= 0.0) {
        offset
    } else {
        offset.conj()
    };
    Ok(ArcPoint { x, center, offset })
}

/// One traced point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ContourPoint {
    pub x: f64,
    pub t: Complex64,
    pub z_residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ContourTrace {
    pub which: Contour,
    pub points: Vec<ContourPoint>,
}

/// Local seed near the finite branch-point end of an arc.
fn branch_seed(params: &ModelParams, which: Contour, x: f64) -> Complex64 {
    let (p, q) = closed_form_endpoints(params);
    let (t_plus, t_minus) = critical_points(params);
    let sign = if which.upper() { 1.0 } else { -1.0 };
    let curvature = |t0: f64| {
        let d = params.gap();
        let u = (t0 - params.alpha2()) * (t0 - params.beta2());
        let hhat_prime = 6.0 * t0 - (params.alpha2() + params.beta2());
        0.5 * (-d * d * hhat_prime / (u * u * u))
    };
    match which.index() {
        1 => c(t_minus) + Complex64::new(0.0, sign * ((-q - x) / curvature(t_minus)).abs().sqrt()),
        2 => c(t_plus) + Complex64::new(0.0, sign * ((p - x) / curvature(t_plus)).abs().sqrt()),
        _ => c(params.beta2()) + Complex64::new(0.0, sign * params.beta() / x.abs().sqrt()),
    }
}

/// Traces the arc over `grid`, which must be sorted from the branch-point
/// end outward: toward `−∞` from `−q` for `γ₁`, from `p` toward `0` for
/// `γ₂`, and from `−∞` toward `0` for `γ₃`.
///
/// Each point is found by Newton continuation from the previous one and
/// cross-checked against the root classification of [`arc_point`].
pub fn trace_gamma(params: &ModelParams, which: Contour, grid: &[f64]) -> Result<ContourTrace> {
    let (lo, hi) = which.interval(params);
    let outward = |a: f64, b: f64| match which.index() {
        3 => b > a,
        _ => b < a,
    };
    for w in grid.windows(2) {
        if !outward(w[0], w[1]) {
            return Err(Error::InvalidArgument(format!(
                "grid for {which} must be strictly ordered from the branch point outward"
            )));
        }
    }
    let mut points = Vec::with_capacity(grid.len());
    let mut prev: Option<Complex64> = None;
    for &x in grid {
        if !(x > lo && x < hi) {
            return Err(Error::InvalidArgument(format!("grid point {x} outside Δ{}", which.index())));
        }
        let seed = prev.unwrap_or_else(|| branch_seed(params, which, x));
        let reference = arc_point(params, which, x)?.t();
        let t = match newton_preimage(params, c(x), seed) {
            Some(t) if (t - reference).norm() <= 1e-6 * reference.norm().max(1.0) => t,
            _ => newton_preimage(params, c(x), reference).unwrap_or(reference),
        };
        if (t.im > 0.0) != which.upper() {
            return Err(Error::SideFlip { x });
        }
        let z = z_of_t(params, t)?;
        points.push(ContourPoint {
            x,
            t,
            z_residual: (z - x).norm() / x.abs(),
        });
        prev = Some(t);
    }
    Ok(ContourTrace { which, points })
}

/// Geometric grid clustering at the branch-point end of `Δₖ`, spanning
/// twelve decades: the requested ratio is used when it fits, otherwise the
/// ratio is lowered until `npoints` points cover the span.
pub fn default_grid(params: &ModelParams, which: Contour, npoints: usize, ratio: f64) -> Vec<f64> {
    let (p, q) = closed_form_endpoints(params);
    let n = npoints.max(2);
    let ratio = ratio.min(1e12f64.powf(1.0 / (n - 1) as f64)).max(1.0 + 1e-9);
    let scale = |k: usize| ratio.powi(k as i32 - (n as i32 - 1));
    let far = 1e4 * q.max(1.0);
    match which.index() {
        1 => (0..n).map(|k| -q - far * scale(k)).collect(),
        2 => (0..n).map(|k| p - p * (1.0 - 1e-6) * scale(k)).collect(),
        _ => (0..n).map(|k| -far * scale(n - 1 - k)).collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params() -> ModelParams {
        ModelParams::curve(1.0, 2.0).unwrap()
    }

    #[test]
    fn h_values() {
        let p = params();
        assert_eq!(h_of_t(&p, c(1.0)), c(0.0));
        assert_eq!(h_of_t(&p, c(4.0)), c(0.0));
        assert!((h_of_t(&p, c(0.0)) - c(4.0 / 3.0)).norm() < 1e-15);
    }

    #[test]
    fn z_at_critical_points() {
        let p = params();
        let e = spectral_curve::endpoints(&p).unwrap();
        assert!((z_of_t(&p, c(e.t_plus)).unwrap().re / e.p - 1.0).abs() < 1e-12);
        assert!((z_of_t(&p, c(e.t_minus)).unwrap().re / -e.q - 1.0).abs() < 1e-12);
        assert!(matches!(z_of_t(&p, c(1.0)), Err(Error::PoleAtInfinitySheet { .. })));
        let t = c(1e7);
        assert!((z_of_t(&p, t).unwrap() * t * t * t / 9.0 - 1.0).norm() < 1e-5);
    }

    #[test]
    fn derivative_matches_finite_difference() {
        let p = params();
        let t = Complex64::new(0.7, 0.4);
        let h = 1e-6;
        let fd = (z_of_t(&p, t + h).unwrap() - z_of_t(&p, t - h).unwrap()) / (2.0 * h);
        assert!((fd - dz_dt(&p, t)).norm() < 1e-7 * fd.norm());
    }

    #[test]
    fn identity_residuals() {
        let p = params();
        assert!(curve_identity_check(&p, Complex64::new(0.3, 0.7)) < 1e-12);
        assert!(curve_identity_check(&p, c(-5.0)) < 1e-12);
    }

    #[test]
    fn round_trip_and_branch_consistency() {
        let p = params();
        for z in [Complex64::new(1.0, 0.5), Complex64::new(-3.0, -0.2), Complex64::new(20.0, 1.0)] {
            let b = spectral_curve::solve_branches(&p, z).unwrap();
            for sheet in 1..=4 {
                let t = t_of_z(&p, sheet, z).unwrap();
                assert!((z_of_t(&p, t).unwrap() / z - 1.0).norm() < 1e-10);
                assert!((h_of_t(&p, t) - b.xi[sheet - 1]).norm() < 1e-8 * b.xi[sheet - 1].norm().max(1.0));
            }
        }
    }

    #[test]
    fn t_of_z_special_points() {
        let p = params();
        let e = spectral_curve::endpoints(&p).unwrap();
        let t = t_of_z(&p, 1, c(-e.q * 0.999_999)).unwrap();
        assert!((t - e.t_minus).norm() < 1e-2);
        let t = t_of_z(&p, 4, Complex64::new(-1e-6, 1e-9)).unwrap();
        let z = Complex64::new(-1e-6, 1e-9);
        assert!(t.norm() > 100.0);
        assert!((z * t * t * t / 9.0 - 1.0).norm() < 0.05);
    }

    #[test]
    fn traced_arcs() {
        let p = params();
        let e = spectral_curve::endpoints(&p).unwrap();
        for which in Contour::ALL {
            let grid = default_grid(&p, which, 200, 1.3);
            let trace = trace_gamma(&p, which, &grid).unwrap();
            let conj = trace_gamma(&p, which.conjugate(), &grid).unwrap();
            for (a, b) in trace.points.iter().zip(&conj.points) {
                assert!(a.z_residual < 1e-9, "{which} {}", a.x);
                assert!((a.t - b.t.conj()).norm() < 1e-9 * a.t.norm().max(1.0));
            }
            let first = trace.points[0].t;
            let last = trace.points.last().unwrap().t;
            match which.index() {
                1 => {
                    assert!((first - e.t_minus).norm() < 1e-3);
                    assert!((last - 1.0).norm() < 2e-2);
                }
                2 => {
                    assert!((first - e.t_plus).norm() < 1e-4);
                    assert!(last.norm() > 10.0);
                }
                _ => {
                    assert!((first - 4.0).norm() < 1e-1);
                    assert!(last.norm() > 10.0);
                }
            }
        }
    }

    #[test]
    fn h_is_not_purely_imaginary_on_g2() {
        let p = params();
        let pt = arc_point(&p, Contour::G2Minus, 1.0).unwrap();
        let h = h_of_t(&p, pt.t());
        assert!(h.re.abs() > 0.1 * h.norm());
        assert!(h.im > 0.0);
    }
}
