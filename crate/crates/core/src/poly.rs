//! Roots of small complex polynomials.
//!
//! Aberth-Ehrlich simultaneous iteration followed by per-root Newton
//! polishing. Degrees here never exceed four, so the cost is negligible
//! and the method is robust even when two roots nearly coalesce.

use num_complex::Complex64;

/// Evaluates `p(z)` and `p'(z)`; coefficients are ordered from the
/// constant term upward.
pub fn eval_with_derivative(coeffs: &[Complex64], z: Complex64) -> (Complex64, Complex64) {
    let mut p = Complex64::new(0.0, 0.0);
    let mut dp = Complex64::new(0.0, 0.0);
    for &c in coeffs.iter().rev() {
        dp = dp * z + p;
        p = p * z + c;
    }
    (p, dp)
}

/// All roots of the polynomial with the given coefficients (constant term
/// first). Leading zero coefficients are not allowed.
pub fn roots(coeffs: &[Complex64]) -> Vec<Complex64> {
    let degree = coeffs.len() - 1;
    assert!(degree >= 1, "polynomial must have degree at least one");
    let lead = coeffs[degree];
    assert!(lead.norm() > 0.0, "leading coefficient vanishes");
    let monic: Vec<Complex64> = coeffs.iter().map(|&c| c / lead).collect();

    // Cauchy-style bound for the initial circle.
    let radius = monic[..degree]
        .iter()
        .enumerate()
        .map(|(k, c)| c.norm().powf(1.0 / (degree - k) as f64))
        .fold(0.0_f64, f64::max)
        .max(1e-300);
    let mut z: Vec<Complex64> = (0..degree)
        .map(|k| {
            let angle = 2.0 * std::f64::consts::PI * k as f64 / degree as f64 + 0.4;
            Complex64::from_polar(radius, angle)
        })
        .collect();

    for _ in 0..500 {
        let mut max_step = 0.0_f64;
        for i in 0..degree {
            let (p, dp) = eval_with_derivative(&monic, z[i]);
            if p.norm() == 0.0 {
                continue;
            }
            let ratio = p / dp;
            let mut repulsion = Complex64::new(0.0, 0.0);
            for j in 0..degree {
                if j != i {
                    let d = z[i] - z[j];
                    if d.norm() > 0.0 {
                        repulsion += d.inv();
                    }
                }
            }
            let step = ratio / (Complex64::new(1.0, 0.0) - ratio * repulsion);
            if step.is_finite() {
                z[i] -= step;
                max_step = max_step.max(step.norm() / z[i].norm().max(1e-300));
            }
        }
        if max_step < 1e-15 {
            break;
        }
    }
    for r in z.iter_mut() {
        *r = polish(&monic, *r);
    }
    z
}

/// Newton polishing on `p`; keeps the iterate with the smallest residual.
pub fn polish(coeffs: &[Complex64], mut z: Complex64) -> Complex64 {
    let (mut best_p, _) = eval_with_derivative(coeffs, z);
    let mut best = z;
    for _ in 0..8 {
        let (p, dp) = eval_with_derivative(coeffs, z);
        if p.norm() < best_p.norm() {
            best_p = p;
            best = z;
        }
        if p.norm() == 0.0 || dp.norm() == 0.0 {
            break;
        }
        let next = z - p / dp;
        if !next.is_finite() {
            break;
        }
        z = next;
    }
    let (p, _) = eval_with_derivative(coeffs, z);
    if p.norm() < best_p.norm() {
        z
    } else {
        best
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn from_roots(rs: &[Complex64]) -> Vec<Complex64> {
        let mut coeffs = vec![c(1.0, 0.0)];
        for &r in rs {
            let mut next = vec![c(0.0, 0.0); coeffs.len() + 1];
            for (k, &a) in coeffs.iter().enumerate() {
                next[k + 1] += a;
                next[k] -= a * r;
            }
            coeffs = next;
        }
        coeffs
    }

    fn matched(found: &[Complex64], want: &[Complex64], tol: f64) {
        for w in want {
            let best = found
                .iter()
                .map(|f| (f - w).norm())
                .fold(f64::INFINITY, f64::min);
            assert!(best < tol * (1.0 + w.norm()), "root {w} missed by {best:e}");
        }
    }

    #[test]
    fn quartic_with_distinct_roots() {
        let want = [c(1.0, 0.0), c(-2.0, 0.5), c(-2.0, -0.5), c(3.0, 0.0)];
        matched(&roots(&from_roots(&want)), &want, 1e-13);
    }

    #[test]
    fn nearly_double_root() {
        let want = [c(1.0, 1e-6), c(1.0, -1e-6), c(-4.0, 0.0), c(0.25, 0.0)];
        matched(&roots(&from_roots(&want)), &want, 1e-9);
    }

    #[test]
    fn widely_scaled_roots() {
        let want = [c(1e-6, 0.0), c(1e3, 0.0), c(-5e2, 8e2), c(-5e2, -8e2)];
        matched(&roots(&from_roots(&want)), &want, 1e-12);
    }

    #[test]
    fn linear() {
        let r = roots(&[c(-3.0, 0.0), c(2.0, 0.0)]);
        assert!((r[0] - c(1.5, 0.0)).norm() < 1e-15);
    }
}
