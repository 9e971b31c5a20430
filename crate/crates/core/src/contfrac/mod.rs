//! Continued fractions: exact periodic expansions of quadratic irrationals,
//! certified terms of general reals, convergents, `lambda_k`, and halving.

mod expansion;
mod terms;
mod value;

pub use expansion::{
    best_approx_witness, cf_of_quadratic, cf_of_rational, cf_of_real, convergents,
    expansion_past, lambda_k, CFExpansion, Convergent, ExpansionKind, Lambda,
};
pub use terms::CfTerms;
pub use value::{halve_cf, quad_from_cf, value_from_cf};
