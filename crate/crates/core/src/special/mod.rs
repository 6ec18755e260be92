//! Modified Bessel functions, complex log-gamma and `G^{m,0}_{0,3}`.

mod bessel;
mod gamma;
mod meijer;

pub use bessel::{bessel_i, bessel_i_scaled, bessel_k, bessel_k_scaled, wronskian_residual, y1, y2};
pub use gamma::{gamma_real, log_gamma_complex, rgamma_complex};
pub use meijer::{meijer_g03, meijer_g03_at, meijer_g1_series, MeijerSpec, MeijerValue};
