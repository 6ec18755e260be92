//! Numerical integration rules.
//!
//! * [`adaptive`]: globally adaptive 7/15-point Gauss-Kronrod bisection.
//!   Open rule, so integrable endpoint singularities are never sampled.
//! * [`gauss_legendre`]: nodes and weights for fixed-order rules.
//! * [`tanh_sinh`]: trapezoid rule after the double-exponential map, with
//!   step halving. Used as an independent second rule.
//! * [`map_power`] and [`map_tail`]: endpoint substitutions that turn
//!   algebraic endpoint behavior into smooth integrands.

use std::collections::BinaryHeap;
use std::cmp::Ordering;

use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// Value and error estimate of an integral.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
    pub evaluations: usize,
}

/// Tolerances and limits for [`adaptive`].
#[derive(Debug, Clone, Copy)]
pub struct Tolerance {
    pub abs: f64,
    pub rel: f64,
    pub max_intervals: usize,
}

impl Tolerance {
    pub const fn new(abs: f64, rel: f64) -> Self {
        Tolerance {
            abs,
            rel,
            max_intervals: 4000,
        }
    }
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance::new(1e-13, 1e-12)
    }
}

/// Kronrod value, `|Kronrod − Gauss|` and the Kronrod estimate of `∫|f|`.
fn kronrod15<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> (f64, f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    let mut magnitude = fc.abs() * WGK[7];
    for j in 0..7 {
        let dx = half * XGK[j];
        let (f1, f2) = (f(center - dx), f(center + dx));
        kronrod += WGK[j] * (f1 + f2);
        magnitude += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            gauss += WG[j / 2] * (f1 + f2);
        }
    }
    let value = kronrod * half;
    let error = ((kronrod - gauss) * half).abs();
    (value, error, magnitude * half.abs())
}

#[derive(Debug, Clone, Copy)]
struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
    magnitude: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

/// Globally adaptive Gauss-Kronrod integration of `f` over `[a, b]`.
///
/// Fails with [`Error::QuadratureFailure`] if the tolerance is not met
/// within `tol.max_intervals` panels or the integrand is not finite.
pub fn adaptive<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, tol: Tolerance) -> Result<Estimate> {
    if a == b {
        return Ok(Estimate {
            value: 0.0,
            error: 0.0,
            evaluations: 0,
        });
    }
    let (v, e, m) = kronrod15(&mut f, a, b);
    let mut evaluations = 15;
    let mut heap = BinaryHeap::new();
    heap.push(Panel {
        a,
        b,
        value: v,
        error: e,
        magnitude: m,
    });
    let mut total = v;
    let mut total_err = e;
    let mut total_mag = m;
    loop {
        if !total.is_finite() {
            return Err(Error::QuadratureFailure {
                context: format!("non-finite integrand on [{a}, {b}]"),
                estimate: f64::NAN,
            });
        }
        // Below `50ε∫|f|` the estimate is rounding noise.
        let floor = 50.0 * f64::EPSILON * total_mag;
        if total_err <= tol.abs.max(tol.rel * total.abs()).max(floor) {
            break;
        }
        if heap.len() >= tol.max_intervals {
            return Err(Error::QuadratureFailure {
                context: format!("panel budget exhausted on [{a}, {b}], value {total}"),
                estimate: total_err,
            });
        }
        let worst = heap.pop().expect("heap is never empty");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a.min(worst.b) || mid >= worst.a.max(worst.b) {
            // Panel cannot be split further in floating point.
            return Err(Error::QuadratureFailure {
                context: format!("panel underflow near {mid} on [{a}, {b}]"),
                estimate: total_err,
            });
        }
        let (v1, e1, m1) = kronrod15(&mut f, worst.a, mid);
        let (v2, e2, m2) = kronrod15(&mut f, mid, worst.b);
        evaluations += 30;
        total += v1 + v2 - worst.value;
        total_err += e1 + e2 - worst.error;
        total_mag += m1 + m2 - worst.magnitude;
        heap.push(Panel {
            a: worst.a,
            b: mid,
            value: v1,
            error: e1,
            magnitude: m1,
        });
        heap.push(Panel {
            a: mid,
            b: worst.b,
            value: v2,
            error: e2,
            magnitude: m2,
        });
    }
    // Re-sum to shed the drift of the running totals.
    let value: f64 = heap.iter().map(|p| p.value).sum();
    let error: f64 = heap.iter().map(|p| p.error).sum();
    Ok(Estimate {
        value,
        error,
        evaluations,
    })
}

/// Integral over `[a, b]` where the integrand behaves like `|x - a|^ea`
/// near `a` and `|x - b|^eb` near `b`; the interval is split at its
/// midpoint and each half is mapped with `x = endpoint ± s^k`, `k` chosen
/// from the exponent so the mapped integrand is smooth.
pub fn adaptive_with_endpoints<F: FnMut(f64) -> f64>(
    mut f: F,
    a: f64,
    b: f64,
    power_a: u32,
    power_b: u32,
    tol: Tolerance,
) -> Result<Estimate> {
    let mid = 0.5 * (a + b);
    let left = map_power(&mut f, a, mid, power_a, tol)?;
    let right = map_power(&mut f, b, mid, power_b, tol)?;
    Ok(Estimate {
        value: left.value + right.value,
        error: left.error + right.error,
        evaluations: left.evaluations + right.evaluations,
    })
}

/// `∫ f` over the interval between `endpoint` and `other` (taken in
/// increasing direction), substituting
/// `x = endpoint + sign·s^k` so that a singularity `|x - endpoint|^γ`
/// with `γ·k + k - 1 >= 0` integer-smooths out.
pub fn map_power<F: FnMut(f64) -> f64>(
    f: &mut F,
    endpoint: f64,
    other: f64,
    k: u32,
    tol: Tolerance,
) -> Result<Estimate> {
    let span = other - endpoint;
    if span == 0.0 {
        return Ok(Estimate {
            value: 0.0,
            error: 0.0,
            evaluations: 0,
        });
    }
    let k = k.max(1);
    if k == 1 {
        return adaptive(|x| f(x), endpoint.min(other), endpoint.max(other), tol);
    }
    let sign = span.signum();
    let smax = span.abs().powf(1.0 / k as f64);
    let kf = k as f64;
    adaptive(
        |s| {
            let x = endpoint + sign * s.powi(k as i32);
            let jac = kf * s.powi(k as i32 - 1);
            if jac == 0.0 {
                0.0
            } else {
                f(x) * jac
            }
        },
        0.0,
        smax,
        tol,
    )
}

/// `∫_{-∞}^{endpoint} f(x) dx` for integrands decaying like `|x|^{-3/2}`,
/// via `x = endpoint - scale·(w^{-k} - 1)`, `w ∈ (0, 1]`. `k = 2` makes a
/// pure `|x|^{-3/2}` tail constant in `w`; larger `k` also tames
/// logarithmic factors.
pub fn map_tail<F: FnMut(f64) -> f64>(
    f: &mut F,
    endpoint: f64,
    scale: f64,
    k: u32,
    tol: Tolerance,
) -> Result<Estimate> {
    let k = k.max(1) as i32;
    adaptive(
        |w| {
            if w <= 0.0 {
                return 0.0;
            }
            let wk = w.powi(-k);
            let x = endpoint - scale * (wk - 1.0);
            let jac = k as f64 * scale * wk / w;
            let v = f(x) * jac;
            if v.is_finite() {
                v
            } else {
                0.0
            }
        },
        0.0,
        1.0,
        tol,
    )
}

/// Gauss-Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 1 { x } else { p1 };
            let pm = if n == 1 { 1.0 } else { p0 };
            dp = nf * (x * pn - pm) / (x * x - 1.0);
            let dx = pn / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        if n == 1 {
            dp = 1.0;
        }
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n == 1 {
        nodes[0] = 0.0;
        weights[0] = 2.0;
    }
    (nodes, weights)
}

/// Composite Gauss-Legendre rule with `panels` equal panels of `order` nodes.
pub fn gauss_composite<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, panels: usize, order: usize) -> f64 {
    let (x, w) = gauss_legendre(order);
    let h = (b - a) / panels as f64;
    let mut sum = 0.0;
    for p in 0..panels {
        let lo = a + h * p as f64;
        let c = lo + 0.5 * h;
        for (xi, wi) in x.iter().zip(&w) {
            sum += wi * f(c + 0.5 * h * xi);
        }
    }
    sum * 0.5 * h
}

/// Double-exponential (tanh-sinh) trapezoid rule on `[a, b]` with step
/// halving until two successive levels agree to `tol` (relative).
pub fn tanh_sinh<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, tol: f64) -> Result<Estimate> {
    let half = 0.5 * (b - a);
    let t_max = 4.5;
    let pi2 = std::f64::consts::FRAC_PI_2;
    let eval = |t: f64, f: &mut F| -> f64 {
        let u = pi2 * t.sinh();
        let x = u.tanh();
        let w = pi2 * t.cosh() / (u.cosh() * u.cosh());
        // Distance to the nearer endpoint, computed without cancellation.
        let e = 1.0 / (u.abs().exp() * u.abs().cosh());
        let xx = if x > 0.0 { b - half * e } else { a + half * e };
        if w == 0.0 || e == 0.0 {
            return 0.0;
        }
        let v = f(xx) * w;
        if v.is_finite() {
            v
        } else {
            0.0
        }
    };
    let mut h = 0.5;
    let mut sum = eval(0.0, &mut f);
    let mut k = 1;
    while k as f64 * h <= t_max {
        let t = k as f64 * h;
        sum += eval(t, &mut f) + eval(-t, &mut f);
        k += 1;
    }
    let mut evaluations = 2 * k - 1;
    let mut prev = sum * h * half;
    for _ in 0..12 {
        h *= 0.5;
        let mut k = 1;
        while k as f64 * h <= t_max {
            let t = k as f64 * h;
            sum += eval(t, &mut f) + eval(-t, &mut f);
            evaluations += 2;
            k += 2;
        }
        let cur = sum * h * half;
        let diff = (cur - prev).abs();
        if diff <= tol * cur.abs().max(1e-300) {
            return Ok(Estimate {
                value: cur,
                error: diff,
                evaluations,
            });
        }
        prev = cur;
    }
    Err(Error::QuadratureFailure {
        context: "tanh-sinh halving did not converge".into(),
        estimate: f64::NAN,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn smooth_integral() {
        let e = adaptive(|x| x.exp(), 0.0, 1.0, Tolerance::default()).unwrap();
        assert!((e.value - (1f64.exp() - 1.0)).abs() < 1e-14);
    }

    #[test]
    fn log_singularity_interior_split() {
        // ∫_0^1 ln x dx = -1
        let e = adaptive(|x| x.ln(), 0.0, 1.0, Tolerance::new(1e-13, 1e-13)).unwrap();
        assert!((e.value + 1.0).abs() < 1e-12, "{}", e.value);
    }

    #[test]
    fn power_map_removes_two_thirds_singularity() {
        // ∫_0^1 x^{-2/3} dx = 3
        let mut f = |x: f64| x.powf(-2.0 / 3.0);
        let e = map_power(&mut f, 0.0, 1.0, 3, Tolerance::default()).unwrap();
        assert!((e.value - 3.0).abs() < 1e-13);
        assert!(e.evaluations < 100);
        // ∫_0^1 sqrt(1-x) dx = 2/3 from the right endpoint
        let mut g = |x: f64| (1.0 - x).sqrt();
        let e = map_power(&mut g, 1.0, 0.0, 2, Tolerance::default()).unwrap();
        assert!((e.value - 2.0 / 3.0).abs() < 1e-14, "{}", e.value);
        let e = adaptive_with_endpoints(|x| (x * (1.0 - x)).sqrt(), 0.0, 1.0, 2, 2, Tolerance::default()).unwrap();
        assert!((e.value - std::f64::consts::PI / 8.0).abs() < 1e-14, "{}", e.value);
    }

    #[test]
    fn tail_map_three_halves() {
        // ∫_{-∞}^{-1} |x|^{-3/2} dx = 2
        let mut f = |x: f64| x.abs().powf(-1.5);
        for k in [2, 4] {
            let e = map_tail(&mut f, -1.0, 1.0, k, Tolerance::default()).unwrap();
            assert!((e.value - 2.0).abs() < 1e-12, "{}", e.value);
        }
    }

    #[test]
    fn gauss_legendre_exactness() {
        for n in [1usize, 2, 5, 16, 33] {
            let (x, w) = gauss_legendre(n);
            let deg = 2 * n - 1;
            let approx: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(deg as i32 - 1)).sum();
            let exact = if (deg - 1) % 2 == 0 { 2.0 / deg as f64 } else { 0.0 };
            assert!((approx - exact).abs() < 1e-13, "n={n}");
            assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-13);
        }
    }

    #[test]
    fn tanh_sinh_endpoint_singularities() {
        // ∫_0^1 x^{-1/2} (1-x)^{-1/2} dx = π; the abscissae saturate at the
        // endpoints, which caps the attainable accuracy.
        let e = tanh_sinh(|x| 1.0 / (x * (1.0 - x)).sqrt(), 0.0, 1.0, 1e-7).unwrap();
        assert!((e.value - std::f64::consts::PI).abs() < 1e-6, "{}", e.value);
        // ∫_0^1 sqrt(x) ln x dx = -4/9
        let e = tanh_sinh(|x| x.sqrt() * x.ln(), 0.0, 1.0, 1e-13).unwrap();
        assert!((e.value + 4.0 / 9.0).abs() < 1e-13, "{}", e.value);
    }

    #[test]
    fn budget_exhaustion_is_reported() {
        let tol = Tolerance {
            abs: 0.0,
            rel: 0.0,
            max_intervals: 10,
        };
        assert!(matches!(
            adaptive(|x| x.sin(), 0.0, 100.0, tol),
            Err(Error::QuadratureFailure { .. })
        ));
    }
}
