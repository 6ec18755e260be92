use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// `B₂ₖ / (2k(2k−1))` for k = 1..=10.
const STIRLING: [f64; 10] = [
    1.0 / 12.0,
    -1.0 / 360.0,
    1.0 / 1260.0,
    -1.0 / 1680.0,
    1.0 / 1188.0,
    -691.0 / 360360.0,
    1.0 / 156.0,
    -3617.0 / 122400.0,
    43867.0 / 244188.0,
    -174611.0 / 125400.0,
];

const SHIFT_TO: f64 = 16.0;

fn stirling(z: Complex64) -> Complex64 {
    let inv = z.inv();
    let inv2 = inv * inv;
    let mut corr = Complex64::new(0.0, 0.0);
    let mut pow = inv;
    for c in STIRLING {
        corr += pow * c;
        pow *= inv2;
    }
    (z - 0.5) * z.ln() - z + 0.5 * (2.0 * PI).ln() + corr
}

/// `log Γ(s)` for `Re s ≥ 1/2`, continuous in `s`.
fn loggamma_right(s: Complex64) -> Complex64 {
    let mut z = s;
    let mut logs = Complex64::new(0.0, 0.0);
    // For Re s > 0 every factor has argument in (−π/2, π/2), so the sum of
    // principal logs is the continuous branch.
    while z.re < SHIFT_TO && z.im.abs() < SHIFT_TO {
        logs += z.ln();
        z += 1.0;
    }
    stirling(z) - logs
}

/// `(sin πr, cos πr)` for real `r`, exact at multiples of 1/2.
fn sincos_pi(r: f64) -> (f64, f64) {
    let n = (2.0 * r).round();
    let (sf, cf) = (PI * (r - 0.5 * n)).sin_cos();
    match (n as i64).rem_euclid(4) {
        0 => (sf, cf),
        1 => (cf, -sf),
        2 => (-sf, -cf),
        _ => (-cf, sf),
    }
}

/// `sin(πs)`; a vanishing imaginary part is returned as `+0`.
fn sin_pi(s: Complex64) -> Complex64 {
    let (sr, cr) = sincos_pi(s.re);
    let y = PI * s.im;
    Complex64::new(sr * y.cosh(), cr * y.sinh() + 0.0)
}

/// Log-gamma on the standard branch: analytic on `ℂ` minus `(−∞, 0]`,
/// real on the positive axis and equal to the principal `log Γ` there.
pub fn log_gamma_complex(s: Complex64) -> Result<Complex64> {
    if !s.re.is_finite() || !s.im.is_finite() {
        return Err(Error::InvalidArgument(format!("log Γ at non-finite s = {s}")));
    }
    if s.im == 0.0 && s.re <= 0.0 && s.re == s.re.round() {
        return Err(Error::PoleHit { s });
    }
    if s.re >= 0.5 {
        return Ok(loggamma_right(s));
    }
    // Reflection with the branch correction that keeps the result
    // continuous across Re s = 1/2.
    let sign = if s.im >= 0.0 { 1.0 } else { -1.0 };
    let turns = (0.5 * s.re + 0.25).floor();
    let correction = Complex64::new(PI.ln(), sign * 2.0 * PI * turns);
    Ok(correction - sin_pi(s).ln() - loggamma_right(Complex64::new(1.0, 0.0) - s))
}

/// `1/Γ(s)`, zero at the poles of `Γ`.
pub fn rgamma_complex(s: Complex64) -> Complex64 {
    match log_gamma_complex(s) {
        Ok(l) => (-l).exp(),
        Err(_) => Complex64::new(0.0, 0.0),
    }
}

/// `Γ(x)` for real `x` away from the poles.
pub fn gamma_real(x: f64) -> Result<f64> {
    let l = log_gamma_complex(Complex64::new(x, 0.0))?;
    let v = l.exp();
    if !v.re.is_finite() {
        return Err(Error::Overflow { function: "gamma", x });
    }
    Ok(v.re)
}
