//! Monte Carlo sampling of the coupled pair `(X₁, X₂)` and the squared
//! singular values of `X₁X₂`.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;

use crate::equilibrium::{cdf_at_sorted, Equilibrium};
use crate::error::{Error, Result};
use crate::model::ModelParams;

pub type CMatrix = DMatrix<Complex64>;

/// Generator for trial `stream` of run `seed`.
pub fn trial_rng(seed: u64, stream: u64) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn normal<R: Rng>(rng: &mut R) -> f64 {
    rng.sample(StandardNormal)
}

/// Centered complex Gaussian with `E|z|² = var`.
fn complex_normal<R: Rng>(rng: &mut R, var: f64) -> Complex64 {
    let s = (0.5 * var).sqrt();
    Complex64::new(s * normal(rng), s * normal(rng))
}

/// Two real Gaussians with covariance `s [[β, ρ], [ρ, β]]`.
fn correlated<R: Rng>(rng: &mut R, s: f64, beta: f64, rho: f64) -> (f64, f64) {
    let l11 = (s * beta).sqrt();
    let l21 = s * rho / l11;
    let l22 = (s * beta - l21 * l21).sqrt();
    let (z1, z2) = (normal(rng), normal(rng));
    (l11 * z1, l21 * z1 + l22 * z2)
}

/// Draws `(X₁, X₂)` of shapes `L×M` and `M×n` from the density
/// `∝ exp(−β tr(X₁X₁* + X₂*X₂) + tr(ΩX₁X₂ + (ΩX₁X₂)*))` with
/// `Ω = α (I_n | 0)`.
///
/// `(X₁)_{bc}` for `b ≤ n` couples only to `(X₂)_{cb}`: the real parts have
/// covariance `[[β, α], [α, β]]/(2(β²−α²))` and the imaginary parts
/// `[[β, −α], [−α, β]]/(2(β²−α²))`. Rows `b > n` of `X₁` are independent
/// with `E|entry|² = 1/β`.
pub fn sample_pair<R: Rng>(params: &ModelParams, rng: &mut R) -> (CMatrix, CMatrix) {
    let (n, l, m) = (params.n() as usize, params.rows_l(), params.inner_m());
    let (alpha, beta) = (params.alpha(), params.beta());
    let s = 0.5 / (beta * beta - alpha * alpha);
    let mut x1 = CMatrix::zeros(l, m);
    let mut x2 = CMatrix::zeros(m, n);
    for b in 0..n {
        for c in 0..m {
            let (ur, vr) = correlated(rng, s, beta, alpha);
            let (ui, vi) = correlated(rng, s, beta, -alpha);
            x1[(b, c)] = Complex64::new(ur, ui);
            x2[(c, b)] = Complex64::new(vr, vi);
        }
    }
    for b in n..l {
        for c in 0..m {
            x1[(b, c)] = complex_normal(rng, 1.0 / beta);
        }
    }
    (x1, x2)
}

/// [`sample_pair`] on the stream `(seed, 0)`.
pub fn sample_pair_seeded(params: &ModelParams, seed: u64) -> (CMatrix, CMatrix) {
    sample_pair(params, &mut trial_rng(seed, 0))
}

/// `(α, β)` equivalent to the interpolating parameter `τ`.
pub fn tau_to_alpha_beta(tau: f64) -> (f64, f64) {
    ((1.0 - tau) / (2.0 * tau), (1.0 + tau) / (2.0 * tau))
}

/// `X₁ = (A − i√τ B)/√2`, `X₂ = (A* − i√τ B*)/√2` with `A`, `B`
/// independent `n×M` matrices of standard complex Gaussians
/// (`E|entry|² = 1`). Also returns `A` and `B`.
pub fn tau_pair_with_factors<R: Rng>(n: usize, m: usize, tau: f64, rng: &mut R) -> Result<[CMatrix; 4]> {
    if m < n || !(tau > 0.0 && tau < 1.0) {
        return Err(Error::InvalidArgument(format!("τ-pair needs M ≥ n and 0 < τ < 1 (n = {n}, M = {m}, τ = {tau})")));
    }
    let a = CMatrix::from_fn(n, m, |_, _| complex_normal(rng, 1.0));
    let b = CMatrix::from_fn(n, m, |_, _| complex_normal(rng, 1.0));
    let st = Complex64::new(0.0, tau.sqrt());
    let r = std::f64::consts::FRAC_1_SQRT_2;
    let x1 = (&a - &b * st) * Complex64::new(r, 0.0);
    let x2 = (a.adjoint() - b.adjoint() * st) * Complex64::new(r, 0.0);
    Ok([x1, x2, a, b])
}

pub fn tau_pair<R: Rng>(n: usize, m: usize, tau: f64, rng: &mut R) -> Result<(CMatrix, CMatrix)> {
    let [x1, x2, _, _] = tau_pair_with_factors(n, m, tau, rng)?;
    Ok((x1, x2))
}

/// Eigenvalues of `(X₁X₂)*(X₁X₂)`, clamped at zero, ascending.
pub fn squared_singular_values(x1: &CMatrix, x2: &CMatrix) -> Result<Vec<f64>> {
    if x1.ncols() != x2.nrows() {
        return Err(Error::InvalidArgument(format!(
            "shapes {}×{} and {}×{} do not conform",
            x1.nrows(),
            x1.ncols(),
            x2.nrows(),
            x2.ncols()
        )));
    }
    let y = x1 * x2;
    let h = y.adjoint() * &y;
    // Symmetrize against rounding so the solver sees an exact Hermitian.
    let h = (&h + h.adjoint()) * Complex64::new(0.5, 0.0);
    let eig = SymmetricEigen::try_new(h, f64::EPSILON, 10_000)
        .ok_or_else(|| Error::EigenFailure("Hermitian eigensolver did not converge".into()))?;
    let mut v: Vec<f64> = eig.eigenvalues.iter().map(|&e| e.max(0.0)).collect();
    v.sort_by(f64::total_cmp);
    Ok(v)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnsembleStats {
    pub params: ModelParams,
    pub trials: usize,
    pub seed: u64,
    /// Squared singular values divided by `n²`, ascending.
    pub values: Vec<f64>,
    /// Kolmogorov–Smirnov distance to the `μ₂` distribution function.
    pub ks_distance: f64,
    /// Means of the first three powers of the scaled values.
    pub moment_summary: [f64; 3],
    /// Standard errors of those means, from the spread of per-trial means.
    pub moment_standard_errors: [f64; 3],
}

fn moments(per_trial: &[[f64; 3]]) -> ([f64; 3], [f64; 3]) {
    let t = per_trial.len() as f64;
    let mut mean = [0.0; 3];
    let mut se = [0.0; 3];
    for k in 0..3 {
        mean[k] = per_trial.iter().map(|m| m[k]).sum::<f64>() / t;
        let var = if per_trial.len() > 1 {
            per_trial.iter().map(|m| (m[k] - mean[k]).powi(2)).sum::<f64>() / (t - 1.0)
        } else {
            f64::NAN
        };
        se[k] = (var / t).sqrt();
    }
    (mean, se)
}

/// `sup |F_emp − F|` for sorted samples against `μ₂`.
pub fn ks_distance(eq: &Equilibrium, sorted: &[f64]) -> Result<f64> {
    let cdf = cdf_at_sorted(eq, sorted)?;
    let n = sorted.len() as f64;
    Ok(cdf
        .iter()
        .enumerate()
        .map(|(i, &f)| (f - i as f64 / n).max((i + 1) as f64 / n - f))
        .fold(0.0, f64::max))
}

fn aggregate(params: &ModelParams, seed: u64, per_trial: Vec<Vec<f64>>) -> Result<EnsembleStats> {
    let n2 = (params.n() as f64).powi(2);
    let scaled: Vec<Vec<f64>> = per_trial
        .into_iter()
        .map(|v| v.into_iter().map(|x| x / n2).collect())
        .collect();
    let trial_moments: Vec<[f64; 3]> = scaled
        .iter()
        .map(|v| {
            let c = v.len() as f64;
            [
                v.iter().sum::<f64>() / c,
                v.iter().map(|x| x * x).sum::<f64>() / c,
                v.iter().map(|x| x * x * x).sum::<f64>() / c,
            ]
        })
        .collect();
    let (moment_summary, moment_standard_errors) = moments(&trial_moments);
    let trials = scaled.len();
    let mut values: Vec<f64> = scaled.into_iter().flatten().collect();
    values.sort_by(f64::total_cmp);
    let eq = Equilibrium::new(params)?;
    let ks = ks_distance(&eq, &values)?;
    Ok(EnsembleStats {
        params: *params,
        trials,
        seed,
        values,
        ks_distance: ks,
        moment_summary,
        moment_standard_errors,
    })
}

/// `trials` independent draws of [`sample_pair`], trial `i` on stream
/// `(seed, i)`, pooled and compared with `μ₂`.
pub fn run_ensemble(params: &ModelParams, trials: usize, seed: u64) -> Result<EnsembleStats> {
    params.require_even_n()?;
    if trials == 0 {
        return Err(Error::InvalidArgument("at least one trial is needed".into()));
    }
    let per_trial: Vec<Vec<f64>> = (0..trials)
        .into_par_iter()
        .map(|i| {
            let mut rng = trial_rng(seed, i as u64);
            let (x1, x2) = sample_pair(params, &mut rng);
            squared_singular_values(&x1, &x2)
        })
        .collect::<Result<_>>()?;
    aggregate(params, seed, per_trial)
}

/// As [`run_ensemble`] with the `τ` construction; the statistics carry the
/// equivalent `(α, β)` with `κ = 0`, `ν = M − n`.
pub fn run_tau_ensemble(n: usize, m: usize, tau: f64, trials: usize, seed: u64) -> Result<EnsembleStats> {
    let (alpha, beta) = tau_to_alpha_beta(tau);
    let params = ModelParams::new(alpha, beta, 0, m as i64 - n as i64, n as i64)?.require_even_n()?;
    if trials == 0 {
        return Err(Error::InvalidArgument("at least one trial is needed".into()));
    }
    let per_trial: Vec<Vec<f64>> = (0..trials)
        .into_par_iter()
        .map(|i| {
            let mut rng = trial_rng(seed, i as u64);
            let (x1, x2) = tau_pair(n, m, tau, &mut rng)?;
            squared_singular_values(&x1, &x2)
        })
        .collect::<Result<_>>()?;
    aggregate(&params, seed, per_trial)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scalar_case() {
        let x1 = CMatrix::from_element(1, 1, Complex64::new(1.0, 2.0));
        let x2 = CMatrix::from_element(1, 1, Complex64::new(-0.5, 0.25));
        let v = squared_singular_values(&x1, &x2).unwrap();
        let want = (Complex64::new(1.0, 2.0) * Complex64::new(-0.5, 0.25)).norm_sqr();
        assert!((v[0] - want).abs() < 1e-14);
    }

    #[test]
    fn shapes_follow_params() {
        let p = ModelParams::new(1.0, 2.0, 2, 3, 4).unwrap();
        let (x1, x2) = sample_pair_seeded(&p, 1);
        assert_eq!((x1.nrows(), x1.ncols()), (6, 7));
        assert_eq!((x2.nrows(), x2.ncols()), (7, 4));
        assert_eq!(squared_singular_values(&x1, &x2).unwrap().len(), 4);
        assert!(squared_singular_values(&x2, &x2).is_err());
    }

    #[test]
    fn tau_mapping() {
        let (a, b) = tau_to_alpha_beta(1.0 / 3.0);
        assert!((a - 1.0).abs() < 1e-15 && (b - 2.0).abs() < 1e-15);
    }

    #[test]
    fn tau_structure_is_exact() {
        let mut rng = trial_rng(3, 0);
        let [x1, x2, a, b] = tau_pair_with_factors(3, 5, 0.4, &mut rng).unwrap();
        let st = Complex64::new(0.0, 0.4f64.sqrt());
        let r = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        assert_eq!(x2, (a.adjoint() - b.adjoint() * st) * r);
        assert_eq!(x1, (&a - &b * st) * r);
    }
}
