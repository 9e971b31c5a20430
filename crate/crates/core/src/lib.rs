//! Certified computation of `M_theta(n) = floor(1 / {theta^(1/n)})`, the
//! atypical set `A_theta`, and the continued-fraction machinery behind it.

pub mod atypical;
pub mod contfrac;
pub mod error;
pub mod families;
pub mod mtheta;
pub mod realnum;
pub(crate) mod serde_big;

pub use error::{Error, Result};
