//! Enclosures `[lo, hi]` of nonnegative reals with cheap outward rounding.

use serde::{Deserialize, Serialize};

/// Ulps added per arithmetic stage when widening outward.
pub const STAGE_ULPS: u32 = 4;

/// Move `x` down by `k` ulps, clamped at zero.
pub fn down(x: f64, k: u32) -> f64 {
    let mut y = x;
    for _ in 0..k {
        y = y.next_down();
    }
    y.max(0.0)
}

/// Move `x` up by `k` ulps.
pub fn up(x: f64, k: u32) -> f64 {
    let mut y = x;
    for _ in 0..k {
        y = y.next_up();
    }
    y
}

/// Certified enclosure of a nonnegative quantity.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Bracket {
    pub lo: f64,
    pub hi: f64,
    /// Set when an iteration budget ran out before the requested width was met.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub loose: bool,
}

impl Bracket {
    pub fn new(lo: f64, hi: f64) -> Self {
        debug_assert!(lo <= hi, "bracket [{lo}, {hi}] is inverted");
        Bracket { lo: lo.max(0.0), hi, loose: false }
    }

    pub fn point(x: f64) -> Self {
        Bracket::new(x, x)
    }

    pub fn zero() -> Self {
        Bracket::point(0.0)
    }

    pub fn with_loose(mut self, loose: bool) -> Self {
        self.loose |= loose;
        self
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

    /// True if `x` lies within `eps` of the bracket.
    pub fn contains_within(&self, x: f64, eps: f64) -> bool {
        self.lo - eps <= x && x <= self.hi + eps
    }

    pub fn overlaps(&self, other: &Bracket) -> bool {
        self.lo <= other.hi && other.lo <= self.hi
    }

    /// Widen outward by `k` ulps on each side.
    pub fn widen(&self, k: u32) -> Bracket {
        Bracket { lo: down(self.lo, k), hi: up(self.hi, k), loose: self.loose }
    }

    /// `[lo^p, hi^p]` for `p > 0`.
    pub fn powf(&self, p: f64) -> Bracket {
        assert!(p > 0.0, "bracket exponent must be positive");
        if p == 1.0 {
            return *self;
        }
        Bracket { lo: down(self.lo.powf(p), STAGE_ULPS), hi: up(self.hi.powf(p), STAGE_ULPS), loose: self.loose }
    }

    pub fn sqrt(&self) -> Bracket {
        Bracket { lo: down(self.lo.sqrt(), 1), hi: up(self.hi.sqrt(), 1), loose: self.loose }
    }

    pub fn mul(&self, other: &Bracket) -> Bracket {
        Bracket {
            lo: down(self.lo * other.lo, 1),
            hi: up(self.hi * other.hi, 1),
            loose: self.loose || other.loose,
        }
    }

    /// Multiply by an exactly known positive scalar.
    pub fn scale(&self, s: f64) -> Bracket {
        Bracket { lo: down(self.lo * s, 1), hi: up(self.hi * s, 1), loose: self.loose }
    }

    /// Enclosure of `max(x, y)` for `x` in `self`, `y` in `other`.
    pub fn max(&self, other: &Bracket) -> Bracket {
        Bracket {
            lo: self.lo.max(other.lo),
            hi: self.hi.max(other.hi),
            loose: self.loose || other.loose,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rounding_moves_outward() {
        assert!(down(1.0, 1) < 1.0);
        assert!(up(1.0, 1) > 1.0);
        assert_eq!(down(0.0, 3), 0.0);
    }

    #[test]
    fn pow_one_is_identity() {
        let b = Bracket::new(1.25, 1.5);
        assert_eq!(b.powf(1.0), b);
    }

    #[test]
    fn pow_and_mul_enclose() {
        let b = Bracket::new(2.0, 3.0);
        let p = b.powf(0.5);
        assert!(p.contains(2f64.sqrt()) && p.contains(3f64.sqrt()));
        let m = b.mul(&Bracket::new(0.5, 0.5));
        assert!(m.contains(1.0) && m.contains(1.5));
    }

    #[test]
    fn serializes_without_loose_flag() {
        let s = serde_json::to_string(&Bracket::new(1.0, 2.0)).unwrap();
        assert_eq!(s, r#"{"lo":1.0,"hi":2.0}"#);
    }
}
