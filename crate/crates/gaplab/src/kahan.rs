//! Compensated (Neumaier) summation.
//!
//! Every place the crate accumulates reals uses this type, and parallel
//! reductions merge per-block sums in a fixed ascending block order, so
//! results are reproducible across thread counts.

/// Running compensated sum.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct KahanSum {
    sum: f64,
    compensation: f64,
}

impl KahanSum {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds `x` with Neumaier compensation.
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.compensation += (self.sum - t) + x;
        } else {
            self.compensation += (x - t) + self.sum;
        }
        self.sum = t;
    }

    /// Folds another compensated sum into this one.
    ///
    /// Merging is two compensated adds, so `merge` is associative up to the
    /// usual 1e-12-relative reproducibility contract as long as the merge
    /// order is fixed.
    pub fn merge(&mut self, other: KahanSum) {
        self.add(other.sum);
        self.add(other.compensation);
    }

    /// Current value of the sum.
    pub fn value(&self) -> f64 {
        self.sum + self.compensation
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn compensates_small_terms_against_large() {
        let mut s = KahanSum::new();
        s.add(1.0);
        for _ in 0..1_000_000 {
            s.add(1e-18);
        }
        // Naive f64 addition would lose every 1e-18 term entirely.
        assert!((s.value() - (1.0 + 1e-12)).abs() < 1e-15);
    }

    #[test]
    fn merge_matches_single_pass() {
        let terms: Vec<f64> = (1..=10_000).map(|i| 1.0 / i as f64).collect();
        let mut whole = KahanSum::new();
        for &t in &terms {
            whole.add(t);
        }
        let mut left = KahanSum::new();
        let mut right = KahanSum::new();
        for &t in &terms[..3_000] {
            left.add(t);
        }
        for &t in &terms[3_000..] {
            right.add(t);
        }
        left.merge(right);
        let rel = (left.value() - whole.value()).abs() / whole.value();
        assert!(rel < 1e-14, "rel {rel}");
    }

    #[test]
    fn value_of_empty_sum_is_zero() {
        assert_eq!(KahanSum::new().value(), 0.0);
    }
}
