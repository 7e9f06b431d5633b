//! Independent numerical checks for the closed forms: adaptive quadrature,
//! Fourier transforms of spectral amplitudes, SVD purity, the exact
//! un-projected filter model and the post-cavity filter comparator.

pub mod exact;
pub mod fourier;
pub mod post_filter;
pub mod quad;
pub mod svd;

pub use exact::{exact_unprojected_spectrum, projected_spectrum, ExactFilterModel, TransferCoefficients};
pub use fourier::{fourier_g2, FourierSpec};
pub use post_filter::{post_cavity_filter_compare, PostFilterResult};
pub use quad::{quad_1d, quad_1d_complex, QuadError, Quadrature, QuadratureSpec};
pub use svd::svd_purity;
