use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::gamma::{gamma_real, log_gamma_complex};
use crate::error::{Error, Result};

/// Parameters of `G^{m,0}_{0,3}(−; b₁, b₂, b₃ | ζ)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeijerSpec {
    pub m: u32,
    pub b: [f64; 3],
}

impl MeijerSpec {
    pub fn new(m: u32, b: [f64; 3]) -> Result<Self> {
        if !(1..=3).contains(&m) {
            return Err(Error::InvalidArgument(format!("m = {m} must be 1, 2 or 3")));
        }
        if b.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("Meijer parameters must be finite".into()));
        }
        Ok(Self { m, b })
    }

    /// `G^{1,0}_{0,3}(−; 0, −ν₁, −ν₂ | ·)`.
    pub fn hard_edge_first(nu1: u32, nu2: u32) -> Self {
        Self {
            m: 1,
            b: [0.0, -(nu1 as f64), -(nu2 as f64)],
        }
    }

    /// `G^{2,0}_{0,3}(−; ν₁, ν₂, 0 | ·)`.
    pub fn hard_edge_second(nu1: u32, nu2: u32) -> Self {
        Self {
            m: 2,
            b: [nu1 as f64, nu2 as f64, 0.0],
        }
    }

    /// Contour abscissa for argument `ζ`: right of the rightmost pole `−bⱼ`
    /// (`j ≤ m`) by `δ = 2/|ln ζ|` clamped to `[0.1, 0.5]`, so `ζ^{−δ} ≤ e²`,
    /// and moved toward the saddle near `ζ^{1/3}` for `ζ > 1`.
    pub fn default_abscissa(&self, zeta: f64) -> f64 {
        let min = self.b[..self.m as usize].iter().cloned().fold(f64::INFINITY, f64::min);
        let delta = (2.0 / zeta.ln().abs()).clamp(0.1, 0.5);
        -min + delta + (zeta.cbrt() - 1.0).max(0.0)
    }

    /// Log of the Mellin–Barnes integrand without the `ζ^{−u}` factor.
    fn log_gamma_ratio(&self, u: Complex64) -> Option<Complex64> {
        let mut acc = Complex64::new(0.0, 0.0);
        for (j, &b) in self.b.iter().enumerate() {
            if (j as u32) < self.m {
                acc += log_gamma_complex(u + b).ok()?;
            } else {
                match log_gamma_complex(Complex64::new(1.0 - b, 0.0) - u) {
                    Ok(l) => acc -= l,
                    // 1/Γ vanishes at its poles.
                    Err(Error::PoleHit { .. }) => return None,
                    Err(_) => return None,
                }
            }
        }
        Some(acc)
    }
}

/// Value with the quadrature's self-consistency estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MeijerValue {
    pub value: f64,
    pub error: f64,
    pub abscissa: f64,
}

fn truncation(zeta: f64) -> f64 {
    40.0 + 10.0 * (1.0 + zeta).ln()
}

/// Trapezoid sums of `f` on `[−s_max, s_max]`, halving the step until
/// consecutive sums agree to `1e-12` relative, or to the rounding floor
/// `100ε∫|f|` when the integral is much smaller than the integrand.
fn trapezoid<F: Fn(f64) -> Complex64>(f: F, s_max: f64) -> Result<(Complex64, f64)> {
    let mut h = 0.5;
    let mut n = (s_max / h).ceil() as i64;
    let (mut sum, mut mag) = (Complex64::new(0.0, 0.0), 0.0);
    for k in -n..=n {
        let v = f(k as f64 * h);
        sum += v;
        mag += v.norm();
    }
    let mut prev = sum * h;
    for _ in 0..12 {
        for k in -n..n {
            let v = f((k as f64 + 0.5) * h);
            sum += v;
            mag += v.norm();
        }
        h *= 0.5;
        n *= 2;
        let cur = sum * h;
        let diff = (cur - prev).norm();
        if diff <= (1e-12 * cur.norm()).max(100.0 * f64::EPSILON * mag * h) {
            return Ok((cur, diff));
        }
        prev = cur;
    }
    Err(Error::ContourQuadratureDivergence {
        context: format!("trapezoid sums still differ at step {h}"),
    })
}

/// `G^{m,0}_{0,3}(−; b | ζ)` by the Mellin–Barnes integral.
///
/// For `m ≥ 2` the contour is the vertical line `Re u = c`; the integrand
/// decays like `e^{−(2m−3)π|Im u|/2}`. For `m = 1` that line diverges, so
/// the contour is bent into the parabola `u = c − s²/10 + is`, which
/// encloses the same poles and along which the Gamma factors decay
/// super-exponentially.
pub fn meijer_g03(spec: &MeijerSpec, zeta: f64) -> Result<MeijerValue> {
    meijer_g03_at(spec, zeta, spec.default_abscissa(zeta))
}

/// As [`meijer_g03`] on a contour through `c`, which must lie right of
/// every pole `−bⱼ − k` (`j ≤ m`).
pub fn meijer_g03_at(spec: &MeijerSpec, zeta: f64, c: f64) -> Result<MeijerValue> {
    if !(zeta > 0.0) || !zeta.is_finite() {
        return Err(Error::InvalidArgument(format!("ζ = {zeta} must be positive")));
    }
    let rightmost = spec.b[..spec.m as usize]
        .iter()
        .map(|b| -b)
        .fold(f64::NEG_INFINITY, f64::max);
    if !(c > rightmost) {
        return Err(Error::InvalidArgument(format!(
            "abscissa {c} is not right of the pole at {rightmost}"
        )));
    }
    let log_zeta = zeta.ln();
    let bend = if spec.m == 1 { 0.1 } else { 0.0 };
    let integrand = |s: f64| -> Complex64 {
        let u = Complex64::new(c - bend * s * s, s);
        let du = Complex64::new(-2.0 * bend * s, 1.0);
        match spec.log_gamma_ratio(u) {
            Some(l) => (l - u * log_zeta).exp() * du,
            None => Complex64::new(0.0, 0.0),
        }
    };
    let s_max = truncation(zeta);
    // The apex can sit on a zero of a reciprocal Gamma, so take the peak
    // over a stretch of the contour.
    let peak = (0..=40)
        .map(|k| integrand(0.25 * k as f64).norm())
        .fold(0.0_f64, f64::max);
    let edge = integrand(s_max).norm().max(integrand(-s_max).norm());
    if !peak.is_finite() || !(edge <= 1e-16 * peak.max(1e-300)) {
        return Err(Error::ContourQuadratureDivergence {
            context: format!("|integrand| at |Im u| = {s_max} is {edge:e} against {peak:e} at the apex"),
        });
    }
    let (sum, diff) = trapezoid(integrand, s_max)?;
    // (1/2πi) ∫ F(u) du with du = u'(s) ds.
    let value = sum / Complex64::new(0.0, 2.0 * PI);
    Ok(MeijerValue {
        value: value.re,
        error: diff / (2.0 * PI),
        abscissa: c,
    })
}

/// Residue series of `G^{1,0}_{0,3}(−; b₁, b₂, b₃ | ζ)`:
/// `Σₖ (−1)ᵏ ζ^{b₁+k} / (k! Γ(1+b₁−b₂+k) Γ(1+b₁−b₃+k))`.
pub fn meijer_g1_series(spec: &MeijerSpec, zeta: f64) -> Result<f64> {
    if spec.m != 1 {
        return Err(Error::InvalidArgument("the series route covers m = 1 only".into()));
    }
    if !(zeta > 0.0) {
        return Err(Error::InvalidArgument(format!("ζ = {zeta} must be positive")));
    }
    let [b1, b2, b3] = spec.b;
    let (e2, e3) = (1.0 + b1 - b2, 1.0 + b1 - b3);
    let rg = |x: f64| -> Result<f64> {
        if x <= 0.0 && x == x.round() {
            Ok(0.0)
        } else {
            Ok(1.0 / gamma_real(x)?)
        }
    };
    // Start from the first term whose Gamma arguments are off the poles.
    let mut sum = 0.0;
    let mut term_abs_max: f64 = 0.0;
    let mut k = 0u32;
    let mut term;
    loop {
        let kf = k as f64;
        let t = rg(e2 + kf)? * rg(e3 + kf)?;
        if t != 0.0 || k > 64 {
            term = t * zeta.powf(b1 + kf) / gamma_real(kf + 1.0)? * if k % 2 == 0 { 1.0 } else { -1.0 };
            break;
        }
        k += 1;
    }
    loop {
        sum += term;
        term_abs_max = term_abs_max.max(term.abs());
        let kf = k as f64;
        term *= -zeta / ((kf + 1.0) * (e2 + kf) * (e3 + kf));
        k += 1;
        if term.abs() <= 1e-17 * sum.abs().max(1e-300) && kf > zeta.cbrt() {
            break;
        }
        if k > 10_000 {
            return Err(Error::NoConvergence {
                context: "Meijer G series".into(),
            });
        }
    }
    if term_abs_max > 1e6 * sum.abs() {
        return Err(Error::NoConvergence {
            context: format!("Meijer G series loses precision at ζ = {zeta}"),
        });
    }
    Ok(sum)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, rel: f64) {
        assert!((a - b).abs() <= rel * b.abs(), "{a} vs {b}");
    }

    #[test]
    fn series_at_small_argument() {
        let s = MeijerSpec::hard_edge_first(0, 0);
        close(meijer_g1_series(&s, 1e-300).unwrap(), 1.0, 1e-14);
        let s = MeijerSpec::new(1, [0.0, -1.0, -2.0]).unwrap();
        close(meijer_g1_series(&s, 1e-300).unwrap(), 0.5, 1e-14);
    }

    #[test]
    fn reference_values() {
        let s = MeijerSpec::hard_edge_first(1, 2);
        close(meijer_g03(&s, 1.0).unwrap().value, 0.42008149848198278, 1e-11);
        let s = MeijerSpec::hard_edge_first(0, 0);
        close(meijer_g03(&s, 0.1).unwrap().value, 0.90124537759838230, 1e-11);
        close(meijer_g03(&s, 10.0).unwrap().value, -0.46151779199957366, 1e-11);
        close(meijer_g03(&s, 1.0).unwrap().value, 0.1204421323010176, 1e-11);
        let s = MeijerSpec::hard_edge_second(1, 2);
        close(meijer_g03(&s, 0.5).unwrap().value, 0.28203179329877513, 1e-11);
        let s = MeijerSpec::hard_edge_second(0, 0);
        close(meijer_g03(&s, 3.0).unwrap().value, -0.088249505722537712, 1e-11);
        let s = MeijerSpec::hard_edge_second(1, 1);
        close(meijer_g03(&s, 1.0).unwrap().value, 0.2864860854166904, 1e-11);
        close(meijer_g03(&s, 1.5).unwrap().value, 0.22838532970432683, 1e-11);
        let s = MeijerSpec::new(3, [0.0, 1.0, 2.0]).unwrap();
        close(meijer_g03(&s, 1.5).unwrap().value, 0.30239610205412897, 1e-11);
    }

    #[test]
    fn vertical_line_diverges_for_m1() {
        let s = MeijerSpec::hard_edge_first(0, 0);
        let bad = MeijerSpec { m: 1, ..s };
        assert!(meijer_g03_at(&bad, 1.0, 1.0).is_ok());
        let odd = MeijerSpec::new(2, [0.0, 0.0, 0.0]).unwrap();
        assert!(meijer_g03_at(&odd, 1.0, -0.5).is_err());
    }

    #[test]
    fn offset_invariance() {
        let s = MeijerSpec::hard_edge_second(1, 1);
        let c = s.default_abscissa(1.0);
        let a = meijer_g03_at(&s, 1.0, c).unwrap().value;
        let b = meijer_g03_at(&s, 1.0, c + 0.25).unwrap().value;
        assert!((a - b).abs() < 1e-10);
    }
}
