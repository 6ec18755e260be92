use std::f64::consts::PI;

use crate::error::{Error, Result};

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

fn check(order: u32, x: f64) -> Result<()> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "Bessel argument must be positive and finite (order {order}, x = {x})"
        )));
    }
    Ok(())
}

/// Below this the ascending series is used for `I`; above it the large-`x`
/// expansion has converged to rounding for every order in use.
fn i_series_limit(order: u32) -> f64 {
    let n = order as f64;
    30.0 + 0.5 * n * n
}

/// `Σ (x/2)^{2k+n} / (k!(k+n)!)`, all terms positive.
fn i_series(order: u32, x: f64) -> f64 {
    let half = 0.5 * x;
    let mut term = 1.0;
    for j in 1..=order {
        term *= half / j as f64;
    }
    let q = half * half;
    let mut sum = term;
    let mut k = 1.0;
    loop {
        term *= q / (k * (k + order as f64));
        sum += term;
        if term <= 1e-17 * sum {
            break;
        }
        k += 1.0;
    }
    sum
}

/// `Σ cₖ/x^k` of the large-`x` expansions with
/// `cₖ = Π_{j≤k} (4n² − (2j−1)²) / (k! 8^k)`; `alternate` flips every
/// other sign (the `I` case).
fn hankel_sum(order: u32, x: f64, alternate: bool) -> f64 {
    let mu = 4.0 * (order as f64).powi(2);
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut last = f64::INFINITY;
    for k in 1..200 {
        let kf = k as f64;
        term *= (mu - (2.0 * kf - 1.0).powi(2)) / (8.0 * kf * x);
        let t = if alternate && k % 2 == 1 { -term } else { term };
        if t.abs() > last {
            break;
        }
        sum += t;
        last = t.abs();
        if last <= 1e-17 * sum.abs() {
            break;
        }
    }
    sum
}

/// `e^{−x} I_n(x)`.
pub fn bessel_i_scaled(order: u32, x: f64) -> Result<f64> {
    check(order, x)?;
    if x < i_series_limit(order) {
        Ok(i_series(order, x) * (-x).exp())
    } else {
        Ok(hankel_sum(order, x, true) / (2.0 * PI * x).sqrt())
    }
}

/// Modified Bessel function of the first kind `I_n(x)`.
pub fn bessel_i(order: u32, x: f64) -> Result<f64> {
    check(order, x)?;
    if x < i_series_limit(order) && x < 700.0 {
        return Ok(i_series(order, x));
    }
    let scaled = bessel_i_scaled(order, x)?;
    let v = scaled * x.exp();
    if !v.is_finite() {
        return Err(Error::Overflow { function: "bessel_i", x });
    }
    Ok(v)
}

/// `K₀(x)` and `K₁(x)` for `x ≤ 2` from the logarithmic series.
fn k01_series(x: f64) -> (f64, f64) {
    let q = 0.25 * x * x;
    let log_half = (0.5 * x).ln();
    // K₀ = −(ln(x/2)+γ) I₀ + Σ qᵏ/(k!)² Hₖ
    let (mut t0, mut i0, mut s0, mut h) = (1.0, 1.0, 0.0, 0.0);
    // K₁ = 1/x + ln(x/2) I₁ − (x/4) Σ qᵏ/(k!(k+1)!) (ψ(k+1)+ψ(k+2))
    let (mut t1, mut i1, mut s1) = (0.5 * x, 0.5 * x, 0.0);
    let mut tk = 1.0;
    let mut psi_sum = -2.0 * EULER_GAMMA + 1.0;
    s1 += tk * psi_sum;
    for k in 1..60 {
        let kf = k as f64;
        h += 1.0 / kf;
        t0 *= q / (kf * kf);
        i0 += t0;
        s0 += t0 * h;
        t1 *= q / (kf * (kf + 1.0));
        i1 += t1;
        tk *= q / (kf * (kf + 1.0));
        psi_sum += 1.0 / kf + 1.0 / (kf + 1.0);
        s1 += tk * psi_sum;
        if t0 < 1e-18 * i0 {
            break;
        }
    }
    let k0 = -(log_half + EULER_GAMMA) * i0 + s0;
    let k1 = 1.0 / x + log_half * i1 - 0.25 * x * s1;
    (k0, k1)
}

/// `e^x K₀(x)` and `e^x K₁(x)` for `x > 2` by Steed's continued fraction.
fn k01_scaled_cf(x: f64) -> (f64, f64) {
    let mut b = 2.0 * (1.0 + x);
    let mut d = 1.0 / b;
    let mut h = d;
    let mut delh = d;
    let mut q1 = 0.0;
    let mut q2 = 1.0;
    let a1 = 0.25;
    let mut q = a1;
    let mut c = a1;
    let mut a = -a1;
    let mut s = 1.0 + q * delh;
    for i in 1..100_000 {
        let fi = i as f64;
        a -= 2.0 * fi;
        c = -a * c / (fi + 1.0);
        let qnew = (q1 - b * q2) / a;
        q1 = q2;
        q2 = qnew;
        q += c * qnew;
        b += 2.0;
        d = 1.0 / (b + a * d);
        delh = (b * d - 1.0) * delh;
        h += delh;
        let dels = q * delh;
        s += dels;
        if (dels / s).abs() < 1e-17 {
            break;
        }
    }
    let k0 = (PI / (2.0 * x)).sqrt() / s;
    let k1 = k0 * (x + 0.5 - a1 * h) / x;
    (k0, k1)
}

/// Upward recurrence `K_{n+1} = K_{n−1} + (2n/x) K_n`, stable for `K`.
fn k_from_pair(order: u32, x: f64, k0: f64, k1: f64) -> f64 {
    if order == 0 {
        return k0;
    }
    let (mut prev, mut cur) = (k0, k1);
    for n in 1..order {
        let next = prev + 2.0 * n as f64 / x * cur;
        prev = cur;
        cur = next;
    }
    cur
}

/// `e^x K_n(x)`.
pub fn bessel_k_scaled(order: u32, x: f64) -> Result<f64> {
    check(order, x)?;
    let (k0, k1) = if x <= 2.0 {
        let (k0, k1) = k01_series(x);
        let e = x.exp();
        (k0 * e, k1 * e)
    } else {
        k01_scaled_cf(x)
    };
    let v = k_from_pair(order, x, k0, k1);
    if !v.is_finite() {
        return Err(Error::Overflow { function: "bessel_k", x });
    }
    Ok(v)
}

/// Modified Bessel function of the second kind `K_n(x)`.
pub fn bessel_k(order: u32, x: f64) -> Result<f64> {
    check(order, x)?;
    let v = if x <= 2.0 {
        let (k0, k1) = k01_series(x);
        k_from_pair(order, x, k0, k1)
    } else {
        bessel_k_scaled(order, x)? * (-x).exp()
    };
    if !v.is_finite() {
        return Err(Error::Overflow { function: "bessel_k", x });
    }
    if v == 0.0 {
        return Err(Error::Underflow { function: "bessel_k", x });
    }
    Ok(v)
}

/// `y₁,ₐ(z) = z^{(a+1)/2} I_{a+1}(2√z)` for integer `a ≥ −1`.
pub fn y1(a: i32, z: f64) -> Result<f64> {
    let n = (a + 1).unsigned_abs();
    Ok(z.powf(0.5 * (a + 1) as f64) * bessel_i(n, 2.0 * z.sqrt())?)
}

/// `y₂,ₐ(z) = z^{(a+1)/2} K_{a+1}(2√z)` for integer `a ≥ −1`.
pub fn y2(a: i32, z: f64) -> Result<f64> {
    let n = (a + 1).unsigned_abs();
    Ok(z.powf(0.5 * (a + 1) as f64) * bessel_k(n, 2.0 * z.sqrt())?)
}

/// `y₁,ₐ y₂,ₐ′ − y₁,ₐ′ y₂,ₐ + zᵃ/2`, using `y₁,ₐ′ = y₁,ₐ₋₁` and
/// `y₂,ₐ′ = −y₂,ₐ₋₁`; relative to `zᵃ/2`.
pub fn wronskian_residual(a: i32, z: f64) -> Result<f64> {
    let w = -y1(a, z)? * y2(a - 1, z)? - y1(a - 1, z)? * y2(a, z)?;
    let target = -0.5 * z.powi(a);
    Ok((w - target).abs() / target.abs())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, rel: f64) {
        assert!((a - b).abs() <= rel * b.abs(), "{a} vs {b}");
    }

    #[test]
    fn i_reference() {
        let cases = [
            (0, 1.0, 1.2660658777520083),
            (1, 1.0, 0.56515910399248503),
            (0, 0.1, 1.0025015629340956),
            (3, 2.5, 0.47437040877803559),
            (2, 10.0, 2281.5189677260035),
            (5, 30.0, 512151465476.93497),
            (0, 50.0, 2.9325537838493363e20),
            (13, 40.0, 1787449207713414.8),
            (20, 300.0, 2.2959873033106909e128),
            (0, 700.0, 1.5295933476718737e302),
            (1, 650.0, 3.0592563989529064e280),
        ];
        for (n, x, want) in cases {
            close(bessel_i(n, x).unwrap(), want, 1e-13);
        }
        assert!(matches!(bessel_i(0, 720.0), Err(Error::Overflow { .. })));
        close(bessel_i_scaled(0, 720.0).unwrap(), 1.0 / (2.0 * PI * 720.0f64).sqrt(), 1e-3);
    }

    #[test]
    fn k_reference() {
        let cases = [
            (0, 1.0, 0.42102443824070833),
            (1, 1.0, 0.60190723019723457),
            (0, 1e-6, 13.931442073626419),
            (0, 2.0, 0.11389387274953344),
            (1, 2.5, 0.073890816347747064),
            (3, 2.5, 0.2682271463934492),
            (0, 5.0, 0.0036910983340425943),
            (2, 10.0, 2.1509817006932769e-5),
            (6, 0.3, 5243852.5086971349),
            (0, 50.0, 3.4101677497894955e-23),
            (13, 40.0, 6.650998713612697e-18),
            (20, 300.0, 7.2429734231571056e-132),
            (5, 0.01, 3839976000099.9992),
        ];
        for (n, x, want) in cases {
            close(bessel_k(n, x).unwrap(), want, 1e-13);
        }
        assert!(matches!(bessel_k(0, 800.0), Err(Error::Underflow { .. })));
    }

    #[test]
    fn small_and_large_argument() {
        assert!((bessel_i(0, 1e-300).unwrap() - 1.0).abs() < 1e-15);
        let x: f64 = 1e-6;
        assert!((bessel_k(0, x).unwrap() + (x / 2.0).ln() + EULER_GAMMA).abs() < 1e-5);
        let x = 50.0;
        for n in 0..2 {
            let r = bessel_k(n, x).unwrap() * x.exp() * (2.0 * x / PI).sqrt();
            assert!((r - 1.0).abs() < 1e-2);
        }
    }

    #[test]
    fn recurrence_and_wronskian() {
        let (mu, z) = (2, 3.0);
        let r = bessel_i(mu - 1, z).unwrap() - bessel_i(mu + 1, z).unwrap()
            - 2.0 * mu as f64 / z * bessel_i(mu, z).unwrap();
        assert!(r.abs() < 1e-12);
        assert!(wronskian_residual(1, 1.7).unwrap() < 1e-12);
        assert!(wronskian_residual(0, 0.3).unwrap() < 1e-12);
    }
}
