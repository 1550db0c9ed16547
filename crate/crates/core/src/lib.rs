//! Heat content of bounded sets under the Poisson (Cauchy) kernel, computed
//! through the set covariance function, with the three-term small-time
//! expansion and its third-order constant.

pub mod acceptance;
pub mod asymptotics;
pub mod error;
pub mod kernel;
pub mod mc;
pub mod quadrature;
pub mod shapes;

pub use error::{Error, Result};
pub use kernel::{kappa, poisson_kernel, tanh_deficit, unit_ball_volume, unit_sphere_area, Dim, KernelConstants};
pub use quadrature::{Estimate, LimitFit, QuadSpec};
pub use shapes::{CovarianceProfile, GammaIntegral, GammaProfile, Polygon, ShapeSpec};
pub use asymptotics::{
    decomposition, heat_content, third_term, ExpansionBreakdown, ThirdTermPieces, ThirdTermReport,
};
pub use mc::{mc_covariance, mc_heat_content, McEstimate};
