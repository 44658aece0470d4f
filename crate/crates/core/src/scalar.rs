//! Floating point abstraction shared by every numerical module.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, NumAssign, ToPrimitive};

/// Real scalar used for fields, metric data and diagnostics: `f32` or `f64`.
pub trait Scalar:
    Float + FloatConst + FromPrimitive + ToPrimitive + NumAssign + Sum + Default + Debug + Display + Send + Sync + 'static
{
    /// Converts an `f64` literal. Every value used here is representable in `f32`.
    #[inline]
    fn lit(value: f64) -> Self {
        Self::from_f64(value).expect("f64 literal representable in scalar type")
    }

    #[inline]
    fn from_usize_lossy(value: usize) -> Self {
        Self::from_usize(value).expect("usize representable in scalar type")
    }

    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}

const PAIRWISE_BLOCK: usize = 32;

/// Pairwise sum of `term(k)` for `k` in `0..n`.
///
/// The recursion splits at fixed midpoints, so the rounding pattern depends
/// only on `n` and never on how the terms are produced.
pub fn pairwise_sum<T: Scalar>(n: usize, term: &impl Fn(usize) -> T) -> T {
    pairwise_range(0, n, term)
}

fn pairwise_range<T: Scalar>(lo: usize, hi: usize, term: &impl Fn(usize) -> T) -> T {
    let len = hi - lo;
    if len <= PAIRWISE_BLOCK {
        let mut acc = T::zero();
        for k in lo..hi {
            acc += term(k);
        }
        acc
    } else {
        let mid = lo + len / 2;
        pairwise_range(lo, mid, term) + pairwise_range(mid, hi, term)
    }
}

/// Pairwise dot product of two equally long slices.
pub fn pairwise_dot<T: Scalar>(a: &[T], b: &[T]) -> T {
    debug_assert_eq!(a.len(), b.len());
    pairwise_sum(a.len(), &|k| a[k] * b[k])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pairwise_matches_exact_integer_sum() {
        let s: f64 = pairwise_sum(1000, &|k| k as f64);
        assert_eq!(s, 499_500.0);
    }

    #[test]
    fn pairwise_is_independent_of_term_source() {
        let v: Vec<f64> = (0..257).map(|k| (k as f64 * 0.37).sin()).collect();
        let a = pairwise_sum(v.len(), &|k| v[k]);
        let b = pairwise_dot(&v, &vec![1.0; v.len()]);
        assert_eq!(a, b);
    }

    #[test]
    fn works_for_f32() {
        let a = [1.0_f32, 2.0, 3.0];
        assert_eq!(pairwise_dot(&a, &a), 14.0);
    }
}
