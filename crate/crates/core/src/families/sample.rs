//! Seeded sampling of `theta = e^w` with `w` an irrational quadratic.

use num_bigint::BigInt;
use num_rational::BigRational;
use rand::Rng;

use crate::mtheta::ThetaSpec;
use crate::realnum::{is_perfect_square, QuadIrr};

/// `theta = e^((a + b sqrt d)/c)` with `log theta` roughly uniform in
/// `(lo, hi)` and certified to lie there.
pub fn sample_exp_quadratic<R: Rng + ?Sized>(rng: &mut R, lo: &BigRational, hi: &BigRational) -> ThetaSpec {
    let lo_f = num_traits::ToPrimitive::to_f64(lo).unwrap_or(0.0);
    let hi_f = num_traits::ToPrimitive::to_f64(hi).unwrap_or(1.0);
    loop {
        let d: u32 = rng.gen_range(2..200);
        if is_perfect_square(&BigInt::from(d)) {
            continue;
        }
        let c: i64 = rng.gen_range(1..60);
        let b: i64 = rng.gen_range(1..12) * if rng.gen_bool(0.5) { 1 } else { -1 };
        let target = rng.gen_range(lo_f..hi_f);
        let a = (target * c as f64 - b as f64 * (d as f64).sqrt()).round() as i64;
        let Ok(w) = QuadIrr::new(a.into(), b.into(), d.into(), c.into()) else { continue };
        if w.is_rational() {
            continue;
        }
        let above = w.add_rational(&-lo.clone()).signum() > 0;
        let below = w.add_rational(&-hi.clone()).signum() < 0;
        if above && below {
            if let Ok(t) = ThetaSpec::exp_quadratic(w) {
                return t;
            }
        }
    }
}
