//! Reduced dynamics of encoded observables `Q F` (`Q` a logical operator, `F`
//! a function of the stabilizers): a signed classical rate operator on the
//! even-parity syndrome space.

mod autocorr;
mod function;
mod generator;
mod space;

pub use autocorr::{
    autocorrelation, autocorrelation_with, fit_lifetime, fit_lifetime_on, geometric_grid, half_time_norm, lifetime,
    FitQuality, LifetimeFit, LifetimeOptions, LifetimeResult, FIT_WINDOW,
};
pub use function::{
    function_polynomial, stabilizer_product, tabulate, validate_sign_function, MAX_POLYNOMIAL_BITS,
};
pub use generator::{
    build_reduced_generator, build_reduced_generator_on, default_options, kitaev_z_generator,
    propagate_reduced, site_rules, ReducedGenerator, SiteRule, MAX_CSR_STATES,
};
pub use space::{SyndromeSpace, MAX_SYNDROME_BITS};
