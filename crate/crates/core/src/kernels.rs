//! Finite-`n` biorthogonal kernel and its hard-edge Meijer-G limit.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dd::{self, Dd};
use crate::equilibrium::{Equilibrium, Measure};
use crate::error::{Error, Result};
use crate::model::ModelParams;
use crate::quadrature::{adaptive, gauss_legendre, map_tail, tanh_sinh, Tolerance};
use crate::special::{bessel_i_scaled, bessel_k_scaled, meijer_g03, meijer_g1_series, MeijerSpec};

/// Largest `n` for which the Gram matrix is built.
pub const GRAM_BUDGET: u32 = 12;
/// Equilibrated condition numbers beyond this are refused.
pub const CONDITION_LIMIT: f64 = 1e12;

const ENTRY_TOL: Tolerance = Tolerance {
    abs: 0.0,
    rel: 1e-14,
    max_intervals: 4000,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KernelRoute {
    FiniteN,
    HardEdgeLimit,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KernelEval {
    pub x: f64,
    pub y: f64,
    pub value: f64,
    pub route: KernelRoute,
}

fn g1(nu1: u32, nu2: u32, zeta: f64) -> Result<f64> {
    let spec = MeijerSpec::hard_edge_first(nu1, nu2);
    match meijer_g1_series(&spec, zeta) {
        Ok(v) => Ok(v),
        Err(_) => Ok(meijer_g03(&spec, zeta)?.value),
    }
}

fn g2(nu1: u32, nu2: u32, zeta: f64) -> Result<f64> {
    Ok(meijer_g03(&MeijerSpec::hard_edge_second(nu1, nu2), zeta)?.value)
}

/// `3w² G^{1,0}(w³x) G^{2,0}(w³y)`, the integrand after `u = w³`. Below
/// `u = 1e-15` it is dropped: the integrand is `O(w² log² w)` there, so the
/// omitted piece is below `1e-12`.
fn hard_edge_integrand(nu1: u32, nu2: u32, x: f64, y: f64, w: f64) -> Result<f64> {
    let u = w * w * w;
    if u < 1e-15 {
        return Ok(0.0);
    }
    Ok(3.0 * w * w * g1(nu1, nu2, u * x)? * g2(nu1, nu2, u * y)?)
}

/// Panel breakpoints on `[0, 1]`: geometric toward `w = 0`, where the
/// integrand behaves like `w² log² w`, and uniform on `[1/4, 1]`. Every
/// panel is split into `split` equal parts.
fn hard_edge_panels(split: usize) -> Vec<(f64, f64)> {
    let mut edges: Vec<f64> = (1..=9).rev().map(|k| 0.25f64.powi(k)).collect();
    edges.insert(0, 0.0);
    edges.extend([0.5, 0.75, 1.0]);
    let mut out = Vec::new();
    for w in edges.windows(2) {
        let h = (w[1] - w[0]) / split as f64;
        out.extend((0..split).map(|i| (w[0] + h * i as f64, w[0] + h * (i + 1) as f64)));
    }
    out
}

/// Gauss–Legendre sum over [`hard_edge_panels`] with 16 nodes per panel,
/// the nodes evaluated in parallel.
fn gauss_parallel(nu1: u32, nu2: u32, x: f64, y: f64, split: usize) -> Result<f64> {
    let (gx, gw) = gauss_legendre(16);
    let mut nodes = Vec::new();
    for (a, b) in hard_edge_panels(split) {
        let (c, h) = (0.5 * (a + b), 0.5 * (b - a));
        nodes.extend(gx.iter().zip(&gw).map(|(xi, wi)| (c + h * xi, h * wi)));
    }
    let values: Vec<f64> = nodes
        .par_iter()
        .map(|&(w, wt)| Ok(wt * hard_edge_integrand(nu1, nu2, x, y, w)?))
        .collect::<Result<_>>()?;
    Ok(values.iter().sum())
}

/// The Meijer-G kernel
/// `K_{ν₁,ν₂}(x,y) = ∫₀¹ G^{1,0}_{0,3}(−;0,−ν₁,−ν₂|ux) G^{2,0}_{0,3}(−;ν₁,ν₂,0|uy) du`
/// by Gauss–Legendre after `u = w³`; fails if halving the panels moves the
/// value by more than `1e-7` relative.
pub fn hard_edge_kernel(nu1: u32, nu2: u32, x: f64, y: f64) -> Result<f64> {
    if !(x > 0.0 && y > 0.0) {
        return Err(Error::InvalidArgument(format!("kernel arguments must be positive (x = {x}, y = {y})")));
    }
    let coarse = gauss_parallel(nu1, nu2, x, y, 1)?;
    let fine = gauss_parallel(nu1, nu2, x, y, 2)?;
    if !((coarse - fine).abs() <= 1e-7 * fine.abs()) {
        return Err(Error::QuadratureFailure {
            context: format!("Meijer kernel node doubling at ({x}, {y})"),
            estimate: (coarse - fine).abs(),
        });
    }
    Ok(fine)
}

/// Same integral by tanh-sinh in `w`; an independent second route.
pub fn hard_edge_kernel_tanh_sinh(nu1: u32, nu2: u32, x: f64, y: f64) -> Result<f64> {
    let mut failure = None;
    let est = tanh_sinh(
        |w| match hard_edge_integrand(nu1, nu2, x, y, w) {
            Ok(v) => v,
            Err(e) => {
                failure.get_or_insert(e);
                0.0
            }
        },
        0.0,
        1.0,
        1e-9,
    )?;
    match failure {
        Some(e) => Err(e),
        None => Ok(est.value),
    }
}

/// Gram matrix `G_{jk} = ∫₀^∞ φⱼ ψₖ dx` of the two Bessel families, with
/// its double-double inverse.
#[derive(Debug, Clone, Serialize)]
pub struct GramMatrix {
    pub n: usize,
    /// Row-major entries.
    pub entries: Vec<f64>,
    /// 1-norm condition number after row and column equilibration.
    pub condition_estimate: f64,
    #[serde(skip)]
    inverse: Vec<Dd>,
    #[serde(skip)]
    params: Option<ModelParams>,
}

fn phi_order(params: &ModelParams, j: usize) -> u32 {
    params.kappa() + j as u32
}

fn psi_order(params: &ModelParams, k: usize) -> u32 {
    params.nu() - params.kappa() + k as u32
}

/// `∫₀^∞ f` for an integrand decaying like `e^{−2(β−α)√x}` in the
/// variable `t = √x`, already transformed by the caller.
fn half_line(f: impl Fn(f64) -> f64, split: f64, tol: Tolerance) -> Result<f64> {
    let head = adaptive(&f, 0.0, split, tol)?;
    let mut g = |s: f64| f(-s);
    let tail = map_tail(&mut g, -split, split, 2, tol)?;
    Ok(head.value + tail.value)
}

fn gram_entry(params: &ModelParams, j: usize, k: usize) -> Result<f64> {
    let (a, b) = (phi_order(params, j), psi_order(params, k));
    let (alpha, beta) = (params.alpha(), params.beta());
    let decay = 2.0 * (beta - alpha);
    let power = (a + b + 1) as i32;
    let f = |t: f64| {
        if t <= 0.0 {
            return 0.0;
        }
        match (bessel_i_scaled(a, 2.0 * alpha * t), bessel_k_scaled(b, 2.0 * beta * t)) {
            (Ok(i), Ok(kk)) => 2.0 * t.powi(power) * i * kk * (-decay * t).exp(),
            _ => f64::NAN,
        }
    };
    let split = (1.0 + power as f64) / decay;
    half_line(f, split, ENTRY_TOL)
}

/// Builds the Gram matrix of `params` and inverts it in double-double.
pub fn gram_matrix(params: &ModelParams) -> Result<GramMatrix> {
    let n = params.n();
    if n > GRAM_BUDGET {
        return Err(Error::IllConditioned {
            estimate: f64::INFINITY,
            n: n as usize,
        });
    }
    let n = n as usize;
    let entries: Vec<f64> = (0..n * n)
        .into_par_iter()
        .map(|idx| gram_entry(params, idx / n, idx % n))
        .collect::<Result<_>>()?;
    if let Some(v) = entries.iter().find(|v| !(**v > 0.0) || !v.is_finite()) {
        return Err(Error::ConsistencyFailure {
            check: "gram_entries_positive",
            residual: *v,
            bound: 0.0,
        });
    }
    let inverse = dd::invert(&entries, n).ok_or(Error::IllConditioned {
        estimate: f64::INFINITY,
        n,
    })?;
    let condition_estimate = equilibrated_condition(&entries, &inverse, n);
    if !(condition_estimate <= CONDITION_LIMIT) {
        return Err(Error::IllConditioned {
            estimate: condition_estimate,
            n,
        });
    }
    Ok(GramMatrix {
        n,
        entries,
        condition_estimate,
        inverse,
        params: Some(*params),
    })
}

/// `‖A‖₁ ‖A⁻¹‖₁` for `A = R G C`, with `R` scaling rows to unit max and
/// `C` then scaling columns to unit max.
fn equilibrated_condition(g: &[f64], inv: &[Dd], n: usize) -> f64 {
    let r: Vec<f64> = (0..n)
        .map(|i| 1.0 / (0..n).map(|j| g[i * n + j].abs()).fold(0.0, f64::max))
        .collect();
    let c: Vec<f64> = (0..n)
        .map(|j| 1.0 / (0..n).map(|i| (r[i] * g[i * n + j]).abs()).fold(0.0, f64::max))
        .collect();
    let norm1 = |m: &dyn Fn(usize, usize) -> f64| {
        (0..n)
            .map(|j| (0..n).map(|i| m(i, j).abs()).sum::<f64>())
            .fold(0.0, f64::max)
    };
    let a = norm1(&|i, j| r[i] * g[i * n + j] * c[j]);
    // (RGC)⁻¹ = C⁻¹ G⁻¹ R⁻¹.
    let ainv = norm1(&|i, j| inv[i * n + j].to_f64() / (c[i] * r[j]));
    a * ainv
}

impl GramMatrix {
    pub fn entry(&self, j: usize, k: usize) -> f64 {
        self.entries[j * self.n + k]
    }

    pub fn inverse_entry(&self, j: usize, k: usize) -> f64 {
        self.inverse[j * self.n + k].to_f64()
    }

    fn check_params(&self, params: &ModelParams) -> Result<()> {
        match self.params {
            Some(p) if p == *params => Ok(()),
            _ => Err(Error::InvalidArgument(
                "Gram matrix was built for different parameters".into(),
            )),
        }
    }
}

/// `x^{a/2} e^{−2α√x} I_a(2α√x)` for the orders of `φ₁..φₙ`.
fn phi_scaled(params: &ModelParams, n: usize, x: f64) -> Result<Vec<f64>> {
    let r = x.sqrt();
    (0..n)
        .map(|j| {
            let a = phi_order(params, j);
            Ok(x.powf(0.5 * a as f64) * bessel_i_scaled(a, 2.0 * params.alpha() * r)?)
        })
        .collect()
}

/// `y^{b/2} e^{2β√y} K_b(2β√y)` for the orders of `ψ₁..ψₙ`.
fn psi_scaled(params: &ModelParams, n: usize, y: f64) -> Result<Vec<f64>> {
    let r = y.sqrt();
    (0..n)
        .map(|k| {
            let b = psi_order(params, k);
            Ok(y.powf(0.5 * b as f64) * bessel_k_scaled(b, 2.0 * params.beta() * r)?)
        })
        .collect()
}

/// `K_n(x, y) = Σⱼₗ φⱼ(x) (G⁻¹)ₗⱼ ψₗ(y)`; the biorthogonal pair is
/// `𝒬ⱼ = φⱼ`, `𝒫ⱼ = Σₗ (G⁻¹)ₗⱼ ψₗ`.
pub fn finite_n_kernel(params: &ModelParams, gram: &GramMatrix, x: f64, y: f64) -> Result<KernelEval> {
    gram.check_params(params)?;
    if !(x > 0.0 && y > 0.0) {
        return Err(Error::InvalidArgument(format!("kernel arguments must be positive (x = {x}, y = {y})")));
    }
    let n = gram.n;
    let phi = phi_scaled(params, n, x)?;
    let psi = psi_scaled(params, n, y)?;
    let mut acc = Dd::ZERO;
    for (l, &p) in psi.iter().enumerate() {
        let mut inner = Dd::ZERO;
        for (j, &f) in phi.iter().enumerate() {
            inner = inner + gram.inverse[l * n + j] * Dd::from(f);
        }
        acc = acc + inner * Dd::from(p);
    }
    let scale = (2.0 * params.alpha() * x.sqrt() - 2.0 * params.beta() * y.sqrt()).exp();
    let value = acc.to_f64() * scale;
    if !value.is_finite() {
        return Err(Error::Overflow {
            function: "finite_n_kernel",
            x,
        });
    }
    Ok(KernelEval {
        x,
        y,
        value,
        route: KernelRoute::FiniteN,
    })
}

/// Split point in `t = √x` past which the kernel diagonal is in its
/// exponential tail.
fn diagonal_split(params: &ModelParams, gram: &GramMatrix) -> f64 {
    let p = crate::spectral_curve::closed_form_endpoints(params).0;
    2.0 * gram.n as f64 * p.sqrt() + 1.0 / (params.beta() - params.alpha())
}

fn kernel_value(params: &ModelParams, gram: &GramMatrix, x: f64, y: f64) -> f64 {
    finite_n_kernel(params, gram, x, y).map(|k| k.value).unwrap_or(f64::NAN)
}

/// `∫₀^∞ K_n(x, x) dx`, which equals `n`.
pub fn kernel_trace(params: &ModelParams, gram: &GramMatrix) -> Result<f64> {
    let f = |t: f64| if t <= 0.0 { 0.0 } else { 2.0 * t * kernel_value(params, gram, t * t, t * t) };
    half_line(f, diagonal_split(params, gram), Tolerance::new(1e-12, 1e-10))
}

/// `∫ K_n(x, s) K_n(s, y) ds − K_n(x, y)`.
pub fn reproducing_residual(params: &ModelParams, gram: &GramMatrix, x: f64, y: f64) -> Result<f64> {
    let f = |t: f64| {
        if t <= 0.0 {
            return 0.0;
        }
        let s = t * t;
        2.0 * t * kernel_value(params, gram, x, s) * kernel_value(params, gram, s, y)
    };
    let lhs = half_line(f, diagonal_split(params, gram), Tolerance::new(1e-13, 1e-11))?;
    Ok(lhs - finite_n_kernel(params, gram, x, y)?.value)
}

/// `max |∫ 𝒬ₖ 𝒫ⱼ − δⱼₖ|` with each integral done in one piece over a
/// truncated range in `t = √x`, independently of the Gram quadrature.
pub fn biorthogonality_residual(params: &ModelParams, gram: &GramMatrix) -> Result<f64> {
    gram.check_params(params)?;
    let n = gram.n;
    let decay = 2.0 * (params.beta() - params.alpha());
    let top = (phi_order(params, n - 1) + psi_order(params, n - 1) + 1) as f64;
    // e^{−decay·t} t^top is below 1e-20 of its peak here.
    let end = (top + 50.0 + top * (1.0 + top / decay).ln()) / decay;
    let mut worst: f64 = 0.0;
    for k in 0..n {
        for j in 0..n {
            let f = |t: f64| {
                if t <= 0.0 {
                    return 0.0;
                }
                let x = t * t;
                let (Ok(phi), Ok(psi)) = (phi_scaled(params, n, x), psi_scaled(params, n, x)) else {
                    return f64::NAN;
                };
                let p: f64 = (0..n).map(|l| gram.inverse_entry(l, j) * psi[l]).sum();
                2.0 * t * phi[k] * p * (-decay * t).exp()
            };
            let v = adaptive(f, 0.0, end, Tolerance::new(1e-12, 1e-12))?.value;
            let want = if j == k { 1.0 } else { 0.0 };
            worst = worst.max((v - want).abs());
        }
    }
    Ok(worst)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GlobalLimitRow {
    pub n: u32,
    pub x: f64,
    /// `n K_n(n²x, n²x)`.
    pub scaled_kernel: f64,
    pub dmu2_dx: f64,
    pub deviation: f64,
}

/// Compares `n K_n(n²x, n²x)` with the `μ₂` density on `grid ⊂ (0, p)`.
pub fn check_global_limit(params: &ModelParams, grid: &[f64]) -> Result<Vec<GlobalLimitRow>> {
    let gram = gram_matrix(params)?;
    let eq = Equilibrium::new(params)?;
    let n = params.n();
    let nf = n as f64;
    grid.iter()
        .map(|&x| {
            if !(x > 0.0 && x < eq.p) {
                return Err(Error::OutsideSupport { measure: "mu2", x });
            }
            let scaled = nf * finite_n_kernel(params, &gram, nf * nf * x, nf * nf * x)?.value;
            let dens = eq.density(Measure::Mu2, x)?;
            Ok(GlobalLimitRow {
                n,
                x,
                scaled_kernel: scaled,
                dmu2_dx: dens,
                deviation: (scaled - dens).abs(),
            })
        })
        .collect()
}

/// `∫₀^p n K_n(n²x, n²x) dx`.
pub fn scaled_mass_on_support(params: &ModelParams, gram: &GramMatrix) -> Result<f64> {
    let p = crate::spectral_curve::closed_form_endpoints(params).0;
    let nf = gram.n as f64;
    let f = |x: f64| nf * kernel_value(params, gram, nf * nf * x, nf * nf * x);
    Ok(crate::quadrature::adaptive_with_endpoints(f, 0.0, p, 3, 1, Tolerance::new(1e-10, 1e-9))?.value)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HardEdgeRow {
    pub n: u32,
    pub x: f64,
    pub y: f64,
    /// `K_n(x/s, y/s)/s` with `s = n(β²−α²)`.
    pub scaled_finite_n: f64,
    /// `(y/x)^{κ/2} K_{ν,κ}(y, x)`.
    pub limit_value: f64,
    pub deviation: f64,
    /// `(x/y)^κ K_{ν,κ}(x, y)`, the same point process in the gauge of
    /// the finite-`n` kernel.
    pub gauge_matched_limit: f64,
    pub gauge_matched_deviation: f64,
}

/// Hard-edge limit values `(y/x)^{κ/2} K_{ν,κ}(y,x)` and
/// `(x/y)^κ K_{ν,κ}(x,y)`; they depend on `(κ, ν)` only.
pub fn hard_edge_limits(kappa: u32, nu: u32, x: f64, y: f64) -> Result<(f64, f64)> {
    let k = kappa as f64;
    let literal = (y / x).powf(0.5 * k) * hard_edge_kernel(nu, kappa, y, x)?;
    let matched = if x == y {
        literal
    } else {
        (x / y).powf(k) * hard_edge_kernel(nu, kappa, x, y)?
    };
    Ok((literal, matched))
}

/// Scaled finite-`n` kernel against the Meijer-G limit at each pair.
pub fn check_hard_edge(params: &ModelParams, pairs: &[(f64, f64)]) -> Result<Vec<HardEdgeRow>> {
    let gram = gram_matrix(params)?;
    let s = params.n() as f64 * params.gap();
    pairs
        .iter()
        .map(|&(x, y)| {
            let scaled = finite_n_kernel(params, &gram, x / s, y / s)?.value / s;
            let (limit, matched) = hard_edge_limits(params.kappa(), params.nu(), x, y)?;
            Ok(HardEdgeRow {
                n: params.n(),
                x,
                y,
                scaled_finite_n: scaled,
                limit_value: limit,
                deviation: (scaled - limit).abs(),
                gauge_matched_limit: matched,
                gauge_matched_deviation: (scaled - matched).abs(),
            })
        })
        .collect()
}

/// `true` when every consecutive pair strictly decreases.
pub fn strictly_decreasing(values: &[f64]) -> bool {
    values.windows(2).all(|w| w[1] < w[0])
}
