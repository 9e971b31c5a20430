//! Certified `exp` and `log` on balls.
//!
//! `exp` halves the argument until it is small, sums the Taylor series with
//! an explicit remainder bound, then squares back up. `log` reduces to a
//! mantissa near 1 and sums the `atanh` series.

use num_bigint::BigInt;

use super::ball::Ball;
use super::dyadic::Dyadic;

/// Encloses `e^y` for every `y` in `x`.
pub fn exp_ball(x: &Ball, prec: u64) -> Ball {
    if x.is_exact() {
        return exp_point(x.lo(), prec);
    }
    let lo = exp_point(x.lo(), prec);
    let hi = exp_point(x.hi(), prec);
    Ball::new(lo.lo().clone(), hi.hi().clone())
}

/// Encloses `e^y - 1` for every `y` in `x`, without cancellation for small `y`.
pub fn expm1_ball(x: &Ball, prec: u64) -> Ball {
    if x.is_exact() {
        return expm1_point(x.lo(), prec);
    }
    let lo = expm1_point(x.lo(), prec);
    let hi = expm1_point(x.hi(), prec);
    Ball::new(lo.lo().clone(), hi.hi().clone())
}

/// Encloses `log y` for every `y` in `x`. Returns `None` unless `x > 0`.
pub fn log_ball(x: &Ball, prec: u64) -> Option<Ball> {
    if !x.is_positive() {
        return None;
    }
    if x.is_exact() {
        return Some(log_point(x.lo(), prec));
    }
    let lo = log_point(x.lo(), prec);
    let hi = log_point(x.hi(), prec);
    Some(Ball::new(lo.lo().clone(), hi.hi().clone()))
}

fn reduction_bits(prec: u64) -> i64 {
    ((prec as f64).sqrt() as i64 / 2).clamp(4, 32)
}

/// Taylor sum of `e^s - 1` for `|s| <= 2^-r`, `r >= 1`, with tail bound.
fn expm1_series(s: &Dyadic, wp: u64) -> Ball {
    if s.is_zero() {
        return Ball::zero();
    }
    let sb = Ball::exact(s.clone());
    let mut term = sb.clone();
    let mut sum = sb.clone();
    let stop = -(wp as i64) - 4 + s.magnitude().min(0);
    let mut j: u64 = 1;
    loop {
        j += 1;
        term = term
            .mul(&sb, wp)
            .div(&Ball::from_int(j), wp)
            .expect("nonzero integer");
        sum = sum.add(&term, wp);
        if term.mag_upper().magnitude() < stop {
            break;
        }
    }
    // sum_{i>j} |s|^i/i! <= |s|^j/j! whenever |s| <= 1/2
    sum.inflate(&term.mag_upper())
}

fn exp_point(d: &Dyadic, prec: u64) -> Ball {
    if d.is_zero() {
        return Ball::one();
    }
    let r = reduction_bits(prec);
    let k = (d.magnitude() + r).max(0);
    let wp = prec + k as u64 + 16;
    let s = d.shl(-k);
    let mut y = expm1_series(&s, wp).add(&Ball::one(), wp);
    for _ in 0..k {
        y = y.square(wp);
    }
    y.round(prec)
}

fn expm1_point(d: &Dyadic, prec: u64) -> Ball {
    if d.is_zero() {
        return Ball::zero();
    }
    let r = reduction_bits(prec);
    if d.magnitude() > 0 {
        // |d| >= 1/2: no cancellation to speak of
        let wp = prec + 8;
        return exp_point(d, wp).sub(&Ball::one(), prec);
    }
    let k = (d.magnitude() + r).max(0);
    let wp = prec + 2 * k as u64 + 16;
    let s = d.shl(-k);
    // e^{2u} - 1 = (e^u - 1)(e^u - 1 + 2)
    let mut m = expm1_series(&s, wp);
    let two = Ball::from_int(2);
    for _ in 0..k {
        let t = m.add(&two, wp);
        m = m.mul(&t, wp);
    }
    m.round(prec)
}

/// `atanh(z) = sum z^(2j+1)/(2j+1)` for `|z| <= 1/3`.
fn atanh_series(z: &Ball, wp: u64) -> Ball {
    if z.is_exact() && z.lo().is_zero() {
        return Ball::zero();
    }
    let z2 = z.square(wp);
    let mut power = z.clone();
    let mut sum = z.clone();
    let stop = -(wp as i64) - 4;
    let mut j: u64 = 0;
    loop {
        j += 1;
        power = power.mul(&z2, wp);
        let term = power
            .div(&Ball::from_int(2 * j + 1), wp)
            .expect("nonzero integer");
        sum = sum.add(&term, wp);
        if power.mag_upper().magnitude() < stop {
            break;
        }
    }
    // remaining terms: |z|^(2j+3)/(2j+3) / (1 - z^2) <= (9/8)|z|^(2j+3)
    let tail = power.mul(&z2, wp).mag_upper();
    let tail = tail.add(&tail.shl(-3));
    sum.inflate(&tail)
}

/// `log 2 = 2 atanh(1/3)`.
pub fn ln2(prec: u64) -> Ball {
    let wp = prec + 16;
    let third = Ball::one().div(&Ball::from_int(3), wp).expect("3 != 0");
    atanh_series(&third, wp).shl(1).round(prec)
}

fn log_point(d: &Dyadic, prec: u64) -> Ball {
    assert!(d.signum() > 0, "log of nonpositive dyadic");
    if *d == Dyadic::one() {
        return Ball::zero();
    }
    // d = y * 2^e with y in [3/4, 3/2)
    let mut e = d.magnitude() - 1;
    let mut y = d.shl(-e);
    if y >= Dyadic::new(BigInt::from(3), -1) {
        y = y.shl(-1);
        e += 1;
    }
    let ebits = 64 - e.unsigned_abs().leading_zeros() as u64;
    let wp = prec + ebits + 16;
    let yb = Ball::exact(y.clone());
    let num = yb.sub(&Ball::one(), wp);
    let den = yb.add(&Ball::one(), wp);
    let z = num.div(&den, wp).expect("y + 1 > 0");
    let mut out = atanh_series(&z, wp).shl(1);
    if e != 0 {
        let l2 = ln2(wp);
        out = out.add(&l2.mul_int(&BigInt::from(e), wp), wp);
    }
    out.round(prec)
}
