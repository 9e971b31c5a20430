//! Certified real arithmetic: dyadic balls, `exp`/`log`, exact quadratic
//! fields, and floor / fractional-part decisions with adaptive precision.

mod ball;
mod decide;
mod dyadic;
mod elementary;
mod quad;
mod spec;

use serde::{Deserialize, Serialize};

pub use ball::Ball;
pub use decide::{floor_certified, frac_compare, ExactPath, FloorDecision, FracCertificate, FracRelation};
pub use dyadic::Dyadic;
pub use elementary::{exp_ball, expm1_ball, ln2, log_ball};
pub use quad::{is_perfect_square, QuadIrr};
pub use spec::{eval, Exact, RealSpec};

/// Precision schedule for adaptive refinement: start, multiply by `growth`,
/// stop after `cap_bits`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RefinePolicy {
    pub start_bits: u64,
    pub growth: u64,
    pub cap_bits: u64,
}

impl Default for RefinePolicy {
    fn default() -> Self {
        RefinePolicy {
            start_bits: 64,
            growth: 2,
            cap_bits: 16384,
        }
    }
}

impl RefinePolicy {
    pub fn with_cap(cap_bits: u64) -> Self {
        RefinePolicy {
            cap_bits,
            ..RefinePolicy::default()
        }
    }

    /// The working precisions to try, in order. The last one is `cap_bits`.
    pub fn precisions(&self) -> impl Iterator<Item = u64> {
        let growth = self.growth.max(2);
        let cap = self.cap_bits.max(2);
        let mut next = Some(self.start_bits.clamp(2, cap));
        std::iter::from_fn(move || {
            let cur = next?;
            next = if cur >= cap {
                None
            } else {
                Some(cur.saturating_mul(growth).min(cap))
            };
            Some(cur)
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_schedule_doubles_to_cap() {
        let p: Vec<u64> = RefinePolicy::default().precisions().collect();
        assert_eq!(p, vec![64, 128, 256, 512, 1024, 2048, 4096, 8192, 16384]);
        let q: Vec<u64> = RefinePolicy::with_cap(100).precisions().collect();
        assert_eq!(q, vec![64, 100]);
    }
}
