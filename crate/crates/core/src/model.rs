//! Model parameters of the confluent coupled two-matrix product.
//!
//! The model is fixed by the coupling singular value `alpha`, the Gaussian
//! scale `beta`, the rectangularity offsets `kappa = L - n`, `nu = M - n`
//! and the matrix size `n`. A [`ModelParams`] value can only be built
//! through validation, so every consumer sees parameters with
//! `0 < alpha < beta` and `nu >= kappa`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result, Violation};

/// Unvalidated parameter record, as read from flags or a config file.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RawParams {
    pub alpha: f64,
    pub beta: f64,
    #[serde(default)]
    pub kappa: i64,
    #[serde(default)]
    pub nu: i64,
    #[serde(default = "default_n")]
    pub n: i64,
}

fn default_n() -> i64 {
    2
}

/// Validated model parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawParams", into = "RawParams")]
pub struct ModelParams {
    alpha: f64,
    beta: f64,
    kappa: u32,
    nu: u32,
    n: u32,
}

impl From<ModelParams> for RawParams {
    fn from(p: ModelParams) -> Self {
        RawParams {
            alpha: p.alpha,
            beta: p.beta,
            kappa: p.kappa as i64,
            nu: p.nu as i64,
            n: p.n as i64,
        }
    }
}

impl TryFrom<RawParams> for ModelParams {
    type Error = Error;

    fn try_from(raw: RawParams) -> Result<Self> {
        validate(raw)
    }
}

/// Checks every parameter invariant and returns the validated parameters.
///
/// The first violated invariant is reported, in the order: finiteness,
/// positivity of `alpha` and `beta`, `alpha < beta`, size positivity,
/// `kappa <= nu`.
pub fn validate(raw: RawParams) -> Result<ModelParams> {
    let reject = |v| Err(Error::RejectedParams(v));
    if !raw.alpha.is_finite() || !raw.beta.is_finite() {
        return reject(Violation::NotFinite);
    }
    if raw.alpha <= 0.0 {
        return reject(Violation::AlphaNotPositive);
    }
    if raw.beta <= 0.0 {
        return reject(Violation::BetaNotPositive);
    }
    if raw.alpha >= raw.beta {
        return reject(Violation::AlphaGeBeta);
    }
    if raw.n <= 0 || raw.kappa < 0 || raw.nu < 0 {
        return reject(Violation::SizeNotPositive);
    }
    if raw.kappa > raw.nu {
        return reject(Violation::KappaGtNu);
    }
    let fits = |v: i64| u32::try_from(v).map_err(|_| Error::RejectedParams(Violation::NotFinite));
    Ok(ModelParams {
        alpha: raw.alpha,
        beta: raw.beta,
        kappa: fits(raw.kappa)?,
        nu: fits(raw.nu)?,
        n: fits(raw.n)?,
    })
}

impl ModelParams {
    pub fn new(alpha: f64, beta: f64, kappa: i64, nu: i64, n: i64) -> Result<Self> {
        validate(RawParams {
            alpha,
            beta,
            kappa,
            nu,
            n,
        })
    }

    /// Parameters for the n-free modules (curve, uniformization, measures).
    pub fn curve(alpha: f64, beta: f64) -> Result<Self> {
        Self::new(alpha, beta, 0, 0, 2)
    }

    /// Re-validates; a no-op for values that were built through [`validate`].
    pub fn validate(&self) -> Result<Self> {
        validate(RawParams::from(*self))
    }

    /// Finite-n machinery and the simulator need an even matrix size.
    pub fn require_even_n(&self) -> Result<Self> {
        if self.n % 2 != 0 {
            return Err(Error::RejectedParams(Violation::SizeNotEven));
        }
        Ok(*self)
    }

    pub fn with_n(&self, n: u32) -> Result<Self> {
        Self::new(self.alpha, self.beta, self.kappa as i64, self.nu as i64, n as i64)
    }

    pub fn with_kappa_nu(&self, kappa: u32, nu: u32) -> Result<Self> {
        Self::new(self.alpha, self.beta, kappa as i64, nu as i64, self.n as i64)
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn kappa(&self) -> u32 {
        self.kappa
    }

    pub fn nu(&self) -> u32 {
        self.nu
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    /// Row count `L = n + kappa` of the first factor.
    pub fn rows_l(&self) -> usize {
        (self.n + self.kappa) as usize
    }

    /// Inner dimension `M = n + nu`.
    pub fn inner_m(&self) -> usize {
        (self.n + self.nu) as usize
    }

    pub fn alpha2(&self) -> f64 {
        self.alpha * self.alpha
    }

    pub fn beta2(&self) -> f64 {
        self.beta * self.beta
    }

    /// `beta^2 - alpha^2`, strictly positive.
    pub fn gap(&self) -> f64 {
        (self.beta - self.alpha) * (self.beta + self.alpha)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn accepts_admissible() {
        let p = ModelParams::new(1.0, 2.0, 0, 0, 4).unwrap();
        assert_eq!(p.alpha(), 1.0);
        assert_eq!(p.n(), 4);
    }

    #[test]
    fn rejects_alpha_ge_beta() {
        assert_eq!(
            ModelParams::new(2.0, 1.0, 0, 0, 4),
            Err(Error::RejectedParams(Violation::AlphaGeBeta))
        );
        assert_eq!(
            ModelParams::new(1.5, 1.5, 0, 0, 4),
            Err(Error::RejectedParams(Violation::AlphaGeBeta))
        );
    }

    #[test]
    fn rejects_kappa_gt_nu() {
        assert_eq!(
            ModelParams::new(1.0, 2.0, 3, 1, 4),
            Err(Error::RejectedParams(Violation::KappaGtNu))
        );
    }

    #[test]
    fn rejects_nonpositive_sizes() {
        assert_eq!(
            ModelParams::new(1.0, 2.0, 0, 0, 0),
            Err(Error::RejectedParams(Violation::SizeNotPositive))
        );
        assert_eq!(
            ModelParams::new(1.0, 2.0, -1, 0, 2),
            Err(Error::RejectedParams(Violation::SizeNotPositive))
        );
        assert_eq!(
            ModelParams::new(0.0, 2.0, 0, 0, 2),
            Err(Error::RejectedParams(Violation::AlphaNotPositive))
        );
        assert_eq!(
            ModelParams::new(f64::NAN, 2.0, 0, 0, 2),
            Err(Error::RejectedParams(Violation::NotFinite))
        );
    }

    #[test]
    fn even_n_only_where_required() {
        let odd = ModelParams::new(1.0, 2.0, 0, 0, 5).unwrap();
        assert_eq!(
            odd.require_even_n(),
            Err(Error::RejectedParams(Violation::SizeNotEven))
        );
        assert!(odd.with_n(6).unwrap().require_even_n().is_ok());
    }

    #[test]
    fn config_roundtrip_revalidates() {
        let p: ModelParams =
            serde_json::from_str(r#"{"alpha":1.0,"beta":2.0,"kappa":1,"nu":2,"n":4}"#).unwrap();
        assert_eq!(p.kappa(), 1);
        assert!(serde_json::from_str::<ModelParams>(r#"{"alpha":3.0,"beta":2.0}"#).is_err());
    }

    proptest::proptest! {
        #[test]
        fn validate_is_idempotent(a in 0.01f64..5.0, db in 0.001f64..5.0, k in 0i64..4, dn in 0i64..4, n in 1i64..50) {
            let p = ModelParams::new(a, a + db, k, k + dn, n).unwrap();
            proptest::prop_assert_eq!(p.validate().unwrap(), p);
            proptest::prop_assert_eq!(p.validate().unwrap().validate().unwrap(), p);
        }
    }
}
