//! Error-free floating-point accumulation.
//!
//! An [`ExactSum`] holds a sum of `f64` values as a non-overlapping
//! expansion (Shewchuk's representation), so the represented value is the
//! exact real sum of everything added. Rounding happens once, in
//! [`ExactSum::value`], and yields the correctly rounded result. Because the
//! represented value does not depend on how the terms were grouped, partial
//! sums computed on different workers can be merged in any order and any
//! partitioning and still round to the same bits.

use smallvec::SmallVec;

#[derive(Clone, Debug, Default)]
pub struct ExactSum {
    // increasing magnitude, non-overlapping
    partials: SmallVec<[f64; 4]>,
}

impl ExactSum {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds `x` exactly.
    #[inline]
    pub fn add(&mut self, mut x: f64) {
        let mut i = 0;
        for j in 0..self.partials.len() {
            let mut y = self.partials[j];
            if x.abs() < y.abs() {
                std::mem::swap(&mut x, &mut y);
            }
            let hi = x + y;
            let lo = y - (hi - x);
            if lo != 0.0 {
                self.partials[i] = lo;
                i += 1;
            }
            x = hi;
        }
        self.partials.truncate(i);
        self.partials.push(x);
    }

    /// Adds the exact product `a * b` rounded to `f64`.
    ///
    /// Only the sum is error-free; the product itself is rounded, which is
    /// identical on every worker because it only depends on the two factors.
    #[inline]
    pub fn add_product(&mut self, a: f64, b: f64) {
        self.add(a * b);
    }

    /// Merges another exact sum into this one.
    pub fn merge(&mut self, other: &ExactSum) {
        for &p in &other.partials {
            self.add(p);
        }
    }

    /// Correctly rounded value of the sum (round-half-even).
    pub fn value(&self) -> f64 {
        let p = &self.partials;
        let mut n = p.len();
        if n == 0 {
            return 0.0;
        }
        n -= 1;
        let mut hi = p[n];
        let mut lo = 0.0;
        while n > 0 {
            let x = hi;
            let y = p[n - 1];
            n -= 1;
            hi = x + y;
            let yr = hi - x;
            lo = y - yr;
            if lo != 0.0 {
                break;
            }
        }
        // Half-way correction: the remaining partials decide the tie.
        if n > 0 && ((lo < 0.0 && p[n - 1] < 0.0) || (lo > 0.0 && p[n - 1] > 0.0)) {
            let y = lo * 2.0;
            let x = hi + y;
            let yr = x - hi;
            if y == yr {
                hi = x;
            }
        }
        hi
    }

    pub fn len(&self) -> usize {
        self.partials.len()
    }

    pub fn is_empty(&self) -> bool {
        self.partials.is_empty()
    }
}

impl FromIterator<f64> for ExactSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut acc = ExactSum::new();
        for x in iter {
            acc.add(x);
        }
        acc
    }
}

/// Correctly rounded dot product of two equal-length slices.
pub fn exact_dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let mut acc = ExactSum::new();
    for (x, y) in a.iter().zip(b) {
        acc.add_product(*x, *y);
    }
    acc.value()
}
