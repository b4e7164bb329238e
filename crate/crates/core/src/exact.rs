//! Error-free floating point accumulation.
//!
//! [`ExactSum`] keeps a non-overlapping expansion of partial sums (Shewchuk's
//! algorithm) so that the represented value is the exact real sum of every
//! term added. [`ExactSum::value`] rounds that exact value once, to nearest
//! with ties to even. Two accumulators fed the same multiset of terms in any
//! order therefore report bit-identical values.

use std::cmp::Ordering;

#[derive(Debug, Clone, Default)]
pub struct ExactSum {
    partials: Vec<f64>,
}

impl ExactSum {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds one finite term.
    pub fn add(&mut self, x: f64) {
        debug_assert!(x.is_finite());
        let mut x = x;
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

    pub fn add_all<I: IntoIterator<Item = f64>>(&mut self, iter: I) {
        for x in iter {
            self.add(x);
        }
    }

    /// Adds the exact value held by another accumulator.
    pub fn add_sum(&mut self, other: &ExactSum) {
        for &p in &other.partials {
            self.add(p);
        }
    }

    /// Subtracts the exact value held by another accumulator.
    pub fn sub_sum(&mut self, other: &ExactSum) {
        for &p in &other.partials {
            self.add(-p);
        }
    }

    /// Correctly rounded value of the exact sum.
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
            n -= 1;
            let y = p[n];
            hi = x + y;
            let yr = hi - x;
            lo = y - yr;
            if lo != 0.0 {
                break;
            }
        }
        // Half-way case: the remaining partials decide the tie.
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

    /// Exact comparison of the represented values.
    pub fn cmp_exact(&self, other: &ExactSum) -> Ordering {
        let mut d = self.clone();
        d.sub_sum(other);
        let v = d.value();
        if v > 0.0 {
            Ordering::Greater
        } else if v < 0.0 {
            Ordering::Less
        } else {
            Ordering::Equal
        }
    }

    /// Correctly rounded value of `self - other`.
    pub fn difference(&self, other: &ExactSum) -> f64 {
        let mut d = self.clone();
        d.sub_sum(other);
        d.value()
    }

    pub fn is_empty(&self) -> bool {
        self.partials.is_empty()
    }
}

/// Correctly rounded sum of a sequence.
pub fn exact_sum<I: IntoIterator<Item = f64>>(iter: I) -> f64 {
    let mut s = ExactSum::new();
    s.add_all(iter);
    s.value()
}
