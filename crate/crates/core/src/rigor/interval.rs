//! Closed intervals with outward-padded endpoint arithmetic.
//!
//! Every primitive computes its endpoints in round-to-nearest and then widens
//! them by a fixed number of ulps. Basic arithmetic and `sqrt` are correctly
//! rounded (error ≤ ½ ulp), so [`ARITH_ULPS`] = 2 is conservative. Library
//! transcendental functions are only faithfully rounded to within a couple of
//! ulps, so they get [`TRANSC_ULPS`].

use serde::{Deserialize, Serialize};
use std::fmt;

use crate::error::RigorError;

pub const ARITH_ULPS: u32 = 2;
pub const TRANSC_ULPS: u32 = 4;

#[derive(Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl fmt::Debug for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{:e}, {:e}]", self.lo, self.hi)
    }
}

fn down(mut x: f64, k: u32) -> f64 {
    for _ in 0..k {
        x = x.next_down();
    }
    x
}

fn up(mut x: f64, k: u32) -> f64 {
    for _ in 0..k {
        x = x.next_up();
    }
    x
}

type R = Result<Interval, RigorError>;

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Interval {
        debug_assert!(lo <= hi, "empty interval [{lo}, {hi}]");
        Interval { lo, hi }
    }

    pub fn point(x: f64) -> Interval {
        Interval { lo: x, hi: x }
    }

    /// Enclosure of a decimal constant that `x` only approximates.
    pub fn around(x: f64) -> Interval {
        Interval { lo: x.next_down(), hi: x.next_up() }
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn mid(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }

    pub fn contains_zero(&self) -> bool {
        self.lo <= 0.0 && 0.0 <= self.hi
    }

    pub fn mag(&self) -> f64 {
        self.lo.abs().max(self.hi.abs())
    }

    pub fn mig(&self) -> f64 {
        if self.contains_zero() {
            0.0
        } else {
            self.lo.abs().min(self.hi.abs())
        }
    }

    pub fn intersect(&self, other: &Interval) -> Option<Interval> {
        let lo = self.lo.max(other.lo);
        let hi = self.hi.min(other.hi);
        (lo <= hi).then_some(Interval { lo, hi })
    }

    pub fn hull(&self, other: &Interval) -> Interval {
        Interval { lo: self.lo.min(other.lo), hi: self.hi.max(other.hi) }
    }

    fn padded(lo: f64, hi: f64, k: u32) -> R {
        if lo.is_nan() || hi.is_nan() {
            return Err(RigorError::Guard("NaN endpoint"));
        }
        Ok(Interval { lo: down(lo, k), hi: up(hi, k) })
    }

    pub fn add(&self, o: &Interval) -> R {
        Self::padded(self.lo + o.lo, self.hi + o.hi, ARITH_ULPS)
    }

    pub fn sub(&self, o: &Interval) -> R {
        Self::padded(self.lo - o.hi, self.hi - o.lo, ARITH_ULPS)
    }

    pub fn neg(&self) -> Interval {
        Interval { lo: -self.hi, hi: -self.lo }
    }

    pub fn mul(&self, o: &Interval) -> R {
        let p = [self.lo * o.lo, self.lo * o.hi, self.hi * o.lo, self.hi * o.hi];
        let lo = p.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = p.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        Self::padded(lo, hi, ARITH_ULPS)
    }

    pub fn recip(&self) -> R {
        if self.contains_zero() {
            return Err(RigorError::Guard("division by an interval containing 0"));
        }
        Self::padded(1.0 / self.hi, 1.0 / self.lo, ARITH_ULPS)
    }

    pub fn div(&self, o: &Interval) -> R {
        if o.contains_zero() {
            return Err(RigorError::Guard("division by an interval containing 0"));
        }
        let p = [self.lo / o.lo, self.lo / o.hi, self.hi / o.lo, self.hi / o.hi];
        let lo = p.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = p.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        Self::padded(lo, hi, ARITH_ULPS)
    }

    pub fn sqrt(&self) -> R {
        if self.lo < 0.0 {
            return Err(RigorError::Guard("sqrt of an interval with negative part"));
        }
        let r = Self::padded(self.lo.sqrt(), self.hi.sqrt(), ARITH_ULPS)?;
        Ok(Interval { lo: r.lo.max(0.0), hi: r.hi })
    }

    pub fn sqr(&self) -> R {
        self.powi(2)
    }

    pub fn powi(&self, k: i32) -> R {
        if k == 0 {
            return Ok(Interval::point(1.0));
        }
        if k < 0 {
            return self.powi(-k)?.recip();
        }
        // repeated multiplication: at most k−1 roundings
        let ulps = 2 * k as u32;
        if k % 2 == 1 {
            return Self::padded(self.lo.powi(k), self.hi.powi(k), ulps);
        }
        if self.contains_zero() {
            let m = self.mag().powi(k);
            return Ok(Interval { lo: 0.0, hi: up(m, ulps) });
        }
        let (a, b) = (self.mig().powi(k), self.mag().powi(k));
        let r = Self::padded(a, b, ulps)?;
        Ok(Interval { lo: r.lo.max(0.0), hi: r.hi })
    }

    pub fn exp(&self) -> R {
        let r = Self::padded(self.lo.exp(), self.hi.exp(), TRANSC_ULPS)?;
        Ok(Interval { lo: r.lo.max(0.0), hi: r.hi })
    }

    pub fn ln(&self) -> R {
        if self.lo <= 0.0 {
            return Err(RigorError::Guard("log of an interval reaching 0"));
        }
        Self::padded(self.lo.ln(), self.hi.ln(), TRANSC_ULPS)
    }

    pub fn tanh(&self) -> R {
        let r = Self::padded(self.lo.tanh(), self.hi.tanh(), TRANSC_ULPS)?;
        Ok(Interval { lo: r.lo.max(-1.0), hi: r.hi.min(1.0) })
    }

    /// `x^c` for a positive base, as `exp(c·ln x)`.
    pub fn pow(&self, c: &Interval) -> R {
        if self.lo <= 0.0 {
            return Err(RigorError::Guard("pow with a base interval reaching 0"));
        }
        c.mul(&self.ln()?)?.exp()
    }

    /// Point enclosure of `cosh x`.
    fn cosh_point(x: f64) -> R {
        Self::padded(x.cosh(), x.cosh(), TRANSC_ULPS)
    }

    fn sinh_point(x: f64) -> R {
        Self::padded(x.sinh(), x.sinh(), TRANSC_ULPS)
    }

    fn sech2_point(x: f64) -> R {
        Self::cosh_point(x)?.sqr()?.recip()
    }

    /// `sech²(x)`: even, decreasing in `|x|`.
    pub fn sech2(&self) -> R {
        let far = Self::sech2_point(self.mag())?;
        let hi = if self.contains_zero() { 1.0 } else { Self::sech2_point(self.mig())?.hi.min(1.0) };
        Ok(Interval { lo: far.lo.max(0.0), hi })
    }

    /// `(Q(y) − Q(z))/(y² − z²)` with `Q(x) = √2x/sinh(√2x)`, over `y ∈ self`,
    /// `z ∈ other`, both nonnegative. Intersection of the mean-value
    /// enclosure and, when `y² − z²` is bounded away from 0, the direct quotient.
    pub fn q_divdiff(&self, other: &Interval) -> R {
        if self.lo < 0.0 || other.lo < 0.0 {
            return Err(RigorError::Guard("q_divdiff needs nonnegative arguments"));
        }
        let sqrt2 = Interval::point(2.0).sqrt()?;
        let lo_arg = sqrt2.mul(&Interval::point(self.lo.min(other.lo)))?.lo.max(0.0);
        let hi_arg = sqrt2.mul(&Interval::point(self.hi.max(other.hi)))?.hi;
        let mv = kappa_range(lo_arg, hi_arg)?;
        let gap = self.sqr()?.sub(&other.sqr()?)?;
        if gap.lo > 0.0 {
            let direct = q_range(self)?.sub(&q_range(other)?)?.div(&gap)?;
            if let Some(both) = mv.intersect(&direct) {
                return Ok(both);
            }
        }
        Ok(mv)
    }
}

/// Enclosures of `Ñ(v) = (v cosh v − sinh v)/v³` and `S(v) = sinh v / v` at a
/// point `v ≥ 0`. Both are increasing.
fn ntilde_point(v: f64) -> R {
    if v < 0.5 {
        // Σ_{k≥1} 2k v^{2k−2}/(2k+1)!, truncated after k = 8; tail < 1e−20
        let mut acc = Interval::point(0.0);
        let v2 = Interval::point(v).sqr()?;
        let mut vp = Interval::point(1.0);
        let mut fact = 6.0; // 3!
        for k in 1..=8u32 {
            let coeff = Interval::point(2.0 * k as f64).div(&Interval::point(fact))?;
            acc = acc.add(&coeff.mul(&vp)?)?;
            vp = vp.mul(&v2)?;
            let a = (2 * k + 2) as f64;
            let b = (2 * k + 3) as f64;
            fact *= a * b;
        }
        return acc.add(&Interval::new(0.0, 1e-20));
    }
    let x = Interval::point(v);
    let num = x.mul(&Interval::cosh_point(v)?)?.sub(&Interval::sinh_point(v)?)?;
    num.div(&x.powi(3)?)
}

fn sinhc_point(v: f64) -> R {
    if v < 0.5 {
        // Σ_{k≥0} v^{2k}/(2k+1)!, truncated after k = 8
        let mut acc = Interval::point(0.0);
        let v2 = Interval::point(v).sqr()?;
        let mut vp = Interval::point(1.0);
        let mut fact = 1.0;
        for k in 0..=8u32 {
            acc = acc.add(&vp.div(&Interval::point(fact))?)?;
            vp = vp.mul(&v2)?;
            fact *= ((2 * k + 2) * (2 * k + 3)) as f64;
        }
        return acc.add(&Interval::new(0.0, 1e-20));
    }
    Interval::sinh_point(v)?.div(&Interval::point(v))
}

/// Range of `κ(v) = −Ñ(v)/S(v)²` over `v ∈ [v1, v2]`.
fn kappa_range(v1: f64, v2: f64) -> R {
    let s1 = sinhc_point(v1)?.sqr()?;
    let s2 = sinhc_point(v2)?.sqr()?;
    let lo = ntilde_point(v2)?.div(&s1)?.neg().lo;
    let hi = ntilde_point(v1)?.div(&s2)?.neg().hi;
    Ok(Interval::new(lo, hi))
}

/// Range of the decreasing function `Q(x) = 1/S(√2x)` over `x ∈ X`, `X ≥ 0`.
fn q_range(x: &Interval) -> R {
    let sqrt2 = Interval::point(2.0).sqrt()?;
    let v_lo = sqrt2.mul(&Interval::point(x.lo))?.lo.max(0.0);
    let v_hi = sqrt2.mul(&Interval::point(x.hi))?.hi;
    let hi = sinhc_point(v_lo)?.recip()?.hi;
    let lo = sinhc_point(v_hi)?.recip()?.lo;
    Ok(Interval::new(lo, hi))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn square_over_sign_change() {
        let x = Interval::new(-1.0, 2.0);
        let sq = x.sqr().unwrap();
        assert!(sq.lo <= 0.0 && sq.hi >= 4.0);
        assert!(sq.lo >= 0.0);
        // plain product is the conservative [−2, 4]
        let p = x.mul(&x).unwrap();
        assert!(p.lo <= -2.0 && p.hi >= 4.0);
    }

    #[test]
    fn tanh_is_monotone_enclosure() {
        let r = Interval::new(0.0, 1.0).tanh().unwrap();
        assert!(r.lo <= 0.0 && r.hi >= 1f64.tanh());
        assert!(r.hi - 1f64.tanh() < 1e-15);
    }

    #[test]
    fn guards() {
        let z = Interval::new(-1.0, 1.0);
        assert!(Interval::point(1.0).div(&z).is_err());
        assert!(z.sqrt().is_err());
        assert!(z.ln().is_err());
        assert!(z.pow(&Interval::point(2.5)).is_err());
    }

    #[test]
    fn kappa_at_origin() {
        let k = kappa_range(0.0, 0.0).unwrap();
        assert!(k.contains(-1.0 / 3.0));
        assert!(k.width() < 1e-14);
    }

    #[test]
    fn q_divdiff_matches_point_values() {
        let q = |x: f64| {
            let v = std::f64::consts::SQRT_2 * x;
            v / v.sinh()
        };
        for &(y, z) in &[(1.0, 0.5), (3.0, 2.99), (12.0, 11.0), (0.3, 0.01), (5.0, 0.02)] {
            let exact = (q(y) - q(z)) / (y * y - z * z);
            let r = Interval::point(y).q_divdiff(&Interval::point(z)).unwrap();
            assert!(r.contains(exact), "({y},{z}) {exact} ∉ {r:?}");
            assert!(r.width() <= 1e-9 * exact.abs().max(1e-12), "({y},{z}) {r:?}");
        }
    }

    #[test]
    fn sech2_encloses() {
        for &(a, b) in &[(-1.0, 2.0), (0.5, 0.7), (-3.0, -2.0)] {
            let r = Interval::new(a, b).sech2().unwrap();
            for k in 0..=100 {
                let x: f64 = a + (b - a) * k as f64 / 100.0;
                let v = 1.0 / x.cosh().powi(2);
                assert!(r.contains(v));
            }
        }
    }
}
