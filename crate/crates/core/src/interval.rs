//! Outward-rounded interval arithmetic.
//!
//! Hardware rounding modes are not portable from safe Rust, so every
//! operation widens its result by one ulp on each side instead. The
//! enclosures are slightly looser than round-to-nearest-outward would give,
//! which only delays pruning decisions and never breaks soundness.

use std::ops::{Add, Mul, Neg, Sub};

/// A closed interval `[lo, hi]` of finite f64 values.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Self {
        debug_assert!(lo <= hi, "invalid interval [{lo}, {hi}]");
        Interval { lo, hi }
    }

    pub fn point(v: f64) -> Self {
        Interval { lo: v, hi: v }
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn mid(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }

    pub fn contains(&self, v: f64) -> bool {
        self.lo <= v && v <= self.hi
    }

    /// Magnitude bound: max |y| over y in the interval.
    pub fn mag(&self) -> f64 {
        self.lo.abs().max(self.hi.abs())
    }

    /// Smallest |y| over the interval (0 if it straddles 0).
    pub fn mig(&self) -> f64 {
        if self.lo <= 0.0 && self.hi >= 0.0 {
            0.0
        } else {
            self.lo.abs().min(self.hi.abs())
        }
    }

    pub fn abs(&self) -> Interval {
        Interval::new(self.mig(), self.mag())
    }

    /// Interval of y^2 over the interval.
    pub fn square(&self) -> Interval {
        let a = self.mig();
        let b = self.mag();
        Interval::new((a * a).next_down().max(0.0), (b * b).next_up())
    }

    pub fn sqrt(&self) -> Interval {
        debug_assert!(self.lo >= 0.0);
        Interval::new(self.lo.sqrt().next_down().max(0.0), self.hi.sqrt().next_up())
    }

    pub fn bisect(&self) -> (Interval, Interval) {
        let m = self.mid();
        (Interval::new(self.lo, m), Interval::new(m, self.hi))
    }

    pub fn intersects(&self, other: &Interval) -> bool {
        self.lo <= other.hi && other.lo <= self.hi
    }
}

impl Add for Interval {
    type Output = Interval;
    fn add(self, rhs: Interval) -> Interval {
        Interval::new((self.lo + rhs.lo).next_down(), (self.hi + rhs.hi).next_up())
    }
}

impl Sub for Interval {
    type Output = Interval;
    fn sub(self, rhs: Interval) -> Interval {
        Interval::new((self.lo - rhs.hi).next_down(), (self.hi - rhs.lo).next_up())
    }
}

impl Mul for Interval {
    type Output = Interval;
    fn mul(self, rhs: Interval) -> Interval {
        let cands = [
            self.lo * rhs.lo,
            self.lo * rhs.hi,
            self.hi * rhs.lo,
            self.hi * rhs.hi,
        ];
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for c in cands {
            lo = lo.min(c);
            hi = hi.max(c);
        }
        Interval::new(lo.next_down(), hi.next_up())
    }
}

impl Neg for Interval {
    type Output = Interval;
    fn neg(self) -> Interval {
        Interval::new(-self.hi, -self.lo)
    }
}

impl Mul<f64> for Interval {
    type Output = Interval;
    fn mul(self, rhs: f64) -> Interval {
        self * Interval::point(rhs)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn arithmetic_encloses_exact_results() {
        let a = Interval::new(1.0, 2.0);
        let b = Interval::new(-3.0, 0.5);
        let s = a + b;
        assert!(s.lo <= -2.0 && s.hi >= 2.5);
        let p = a * b;
        assert!(p.lo <= -6.0 && p.hi >= 1.0);
        let d = a - b;
        assert!(d.lo <= 0.5 && d.hi >= 5.0);
    }

    #[test]
    fn square_of_straddling_interval_starts_at_zero() {
        let a = Interval::new(-2.0, 3.0);
        let sq = a.square();
        assert_eq!(sq.lo, 0.0);
        assert!(sq.hi >= 9.0);
    }

    #[test]
    fn mig_and_mag() {
        assert_eq!(Interval::new(-2.0, -1.0).mig(), 1.0);
        assert_eq!(Interval::new(-2.0, -1.0).mag(), 2.0);
        assert_eq!(Interval::new(-1.0, 2.0).mig(), 0.0);
    }
}
