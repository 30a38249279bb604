//! The closing inequality a²|M|¹⁴b^|M| < 1 and the size of M it forces.
//!
//! Logarithms are carried in outward-rounded intervals: every libm result is
//! widened by a few ulps, so a `Pass` verdict is never an artifact of
//! rounding.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Pow};
use serde::Serialize;

use crate::error::{precondition, Result};
use crate::lll::Verdict;

const SLACK_ULPS: u32 = 4;

fn widen_down(mut x: f64, n: u32) -> f64 {
    for _ in 0..n {
        x = x.next_down();
    }
    x
}

fn widen_up(mut x: f64, n: u32) -> f64 {
    for _ in 0..n {
        x = x.next_up();
    }
    x
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    fn point(x: f64) -> Self {
        Interval { lo: widen_down(x, SLACK_ULPS), hi: widen_up(x, SLACK_ULPS) }
    }

    fn add(self, o: Interval) -> Self {
        Interval { lo: widen_down(self.lo + o.lo, 1), hi: widen_up(self.hi + o.hi, 1) }
    }

    /// Product with a positive exact scalar.
    fn scale(self, s: f64) -> Self {
        Interval { lo: widen_down(self.lo * s, 1), hi: widen_up(self.hi * s, 1) }
    }

    /// ln of a positive integer.
    fn ln_int(n: u64) -> Self {
        if n == 1 {
            return Interval { lo: 0.0, hi: 0.0 };
        }
        Interval::point((n as f64).ln())
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct BoundReport {
    pub colors: u64,
    pub d: u64,
    pub r: u64,
    pub m: u64,
    /// 256|D|¹⁴|R|⁷, exact.
    pub a: String,
    /// 1/(8|D|³|R|), exact.
    pub c: String,
    /// (1 − ℓ^−|D|)^c, enclosed.
    pub b: Interval,
    /// ln(a²|M|¹⁴b^|M|), enclosed.
    pub ln_product: Interval,
    pub verdict: Verdict,
    /// Least |M| with product < 1, with the verdicts at it and one below.
    pub threshold: u64,
    pub at_threshold: Verdict,
    pub below_threshold: Verdict,
}

/// ln(b) = c · ln(1 − ℓ^−|D|), enclosed.
fn ln_b(colors: u64, d: u64, r: u64) -> Interval {
    let x = (colors as f64).powi(-(d as i32));
    let x = Interval::point(x);
    // ln_1p is increasing, so the endpoints swap under negation
    let l = Interval { lo: widen_down((-x.hi).ln_1p(), SLACK_ULPS), hi: widen_up((-x.lo).ln_1p(), SLACK_ULPS) };
    let c = 1.0 / (8.0 * (d as f64).powi(3) * r as f64);
    let c = Interval::point(c);
    // l ≤ 0 and c > 0: [c.hi·l.lo, c.lo·l.hi]
    Interval { lo: widen_down(c.hi * l.lo, 1), hi: widen_up(c.lo * l.hi, 1) }
}

fn ln_a(d: u64, r: u64) -> Interval {
    Interval::ln_int(256).add(Interval::ln_int(d).scale(14.0)).add(Interval::ln_int(r).scale(7.0))
}

fn ln_product(colors: u64, d: u64, r: u64, m: u64) -> Interval {
    let lb = ln_b(colors, d, r);
    let mb = Interval { lo: widen_down(lb.lo * m as f64, 1), hi: widen_up(lb.hi * m as f64, 1) };
    ln_a(d, r).scale(2.0).add(Interval::ln_int(m).scale(14.0)).add(mb)
}

fn verdict(iv: Interval) -> Verdict {
    if iv.hi < 0.0 {
        Verdict::Pass
    } else if iv.lo >= 0.0 {
        Verdict::Fail
    } else {
        Verdict::Undecided
    }
}

fn below_one(colors: u64, d: u64, r: u64, m: u64) -> bool {
    let iv = ln_product(colors, d, r, m);
    (iv.lo + iv.hi) / 2.0 < 0.0
}

/// Least |M| with a²|M|¹⁴b^|M| < 1. The product rises up to |M| ≈ 14/|ln b|
/// and falls after it, so the search doubles past the peak and bisects.
fn threshold(colors: u64, d: u64, r: u64) -> u64 {
    let lb = ln_b(colors, d, r);
    let peak = (14.0 / -lb.hi).ceil().max(1.0) as u64;
    let mut lo = peak;
    let mut hi = peak.max(2);
    while !below_one(colors, d, r, hi) {
        lo = hi;
        hi = hi.checked_mul(2).expect("threshold search bounded by the size precondition");
    }
    // invariant: product(lo) ≥ 1 > product(hi)
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if below_one(colors, d, r, mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

pub fn bound_report(colors: u64, d: u64, r: u64, m: u64) -> Result<BoundReport> {
    precondition(colors >= 2 && d >= 1 && r >= 1 && m >= 1, "ℓ ≥ 2 and |D|, |R|, |M| ≥ 1 required")?;
    // the threshold sits a log factor past the peak 14/|ln b| ≈ 112|D|³|R|ℓ^|D|
    let ln_peak = 112f64.ln() + 3.0 * (d as f64).ln() + (r as f64).ln() + d as f64 * (colors as f64).ln();
    precondition(ln_peak <= 40.0 * 2f64.ln(), "ℓ^|D| too large: the threshold would exceed 2^40")?;
    let a = BigInt::from(256u32) * BigInt::from(d).pow(14u32) * BigInt::from(r).pow(7u32);
    let c = BigRational::new(BigInt::one(), BigInt::from(8u32) * BigInt::from(d).pow(3u32) * BigInt::from(r));
    let lb = ln_b(colors, d, r);
    let b = Interval { lo: widen_down(lb.lo.exp(), SLACK_ULPS), hi: widen_up(lb.hi.exp(), SLACK_ULPS) };
    let lp = ln_product(colors, d, r, m);
    let t = threshold(colors, d, r);
    Ok(BoundReport {
        colors,
        d,
        r,
        m,
        a: a.to_string(),
        c: c.to_string(),
        b,
        ln_product: lp,
        verdict: verdict(lp),
        threshold: t,
        at_threshold: verdict(ln_product(colors, d, r, t)),
        below_threshold: verdict(ln_product(colors, d, r, t - 1)),
    })
}

/// Independent oracle for ℓ = 2, |D| = |R| = 1: there b^|M| = 2^(−|M|/8), so
/// the product is below 1 iff 2¹²⁸·|M|¹¹² < 2^|M| (both sides raised to the
/// 8th power). Scans |M| upward in exact integers.
pub fn exact_threshold_base_case() -> u64 {
    let lhs_const = BigInt::one() << 128u32;
    (1u64..)
        .find(|&m| {
            let lhs = &lhs_const * BigInt::from(m).pow(112u32);
            lhs < (BigInt::one() << m)
        })
        .unwrap()
}

/// Product value for display, clamped into f64.
pub fn product_estimate(report: &BoundReport) -> f64 {
    ((report.ln_product.lo + report.ln_product.hi) / 2.0).exp()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn base_case_constants() {
        let r = bound_report(2, 1, 1, 10).unwrap();
        assert_eq!(r.a, "256");
        assert_eq!(r.c, "1/8");
        let b = 0.5f64.powf(0.125);
        assert!(r.b.lo <= b && b <= r.b.hi);
        assert_eq!(r.verdict, Verdict::Fail);
        assert_eq!(r.at_threshold, Verdict::Pass);
        assert_eq!(r.below_threshold, Verdict::Fail);
        assert_eq!(r.threshold, exact_threshold_base_case());
    }

    #[test]
    fn decreasing_past_threshold() {
        let r = bound_report(3, 2, 1, 1).unwrap();
        let t = r.threshold;
        let mut prev = f64::INFINITY;
        for m in (t..t + 5000).step_by(97) {
            let iv = ln_product(3, 2, 1, m);
            assert!(iv.hi < 0.0);
            assert!(iv.hi < prev);
            prev = iv.hi;
        }
        assert!(bound_report(1, 1, 1, 1).is_err());
        assert!(bound_report(2, 40, 1, 1).is_err());
        assert!(bound_report(2, 20, 1, 1).is_ok());
    }
}
