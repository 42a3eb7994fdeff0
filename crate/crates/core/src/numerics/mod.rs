//! Quadrature, improper-integral classification, Stieltjes integration,
//! generalized inverses and grids.

pub mod grid;
pub mod improper;
pub mod inverse;
pub mod quadrature;
pub mod stieltjes;

pub use grid::{lin_space, log_space, Grid};
pub use improper::{
    classify_improper, classify_improper_with, classify_sup, classify_sup_with, AsymptoticClass, ClassifyOptions,
    Convergence, IntegralVerdict, SingularEnd, SupVerdict, EXPONENT_MARGIN,
};
pub use inverse::{generalized_left_inverse, Inverse, TableKind, Tabulated};
pub use quadrature::{
    integrate_adaptive, integrate_log_scale, integrate_to_infinity, integrate_with, Quadrature, Tolerance,
    IMPROPER_REL_TOL, PROPER_REL_TOL,
};
pub use stieltjes::{stieltjes_integrate, stieltjes_integrate_tol, RealFn, StieltjesWeight};
