//! Compensated accumulation and the fixed pairwise reduction tree.
//!
//! Parallel work is cut into a fixed number of chunks; each chunk
//! accumulates with Neumaier's variant of Kahan summation and the chunk
//! results are merged by [`pairwise_reduce`], whose tree shape depends only
//! on the number of chunks.

use alloc::vec::Vec;

use crate::math::{abs, C64};

/// Neumaier-compensated running sum.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    pub const fn new() -> Self {
        CompensatedSum { sum: 0.0, comp: 0.0 }
    }

    #[inline]
    pub fn add(&mut self, v: f64) {
        let t = self.sum + v;
        if abs(self.sum) >= abs(v) {
            self.comp += (self.sum - t) + v;
        } else {
            self.comp += (v - t) + self.sum;
        }
        self.sum = t;
    }

    /// Folds another partial sum into this one, keeping both compensations.
    pub fn merge(&mut self, other: &CompensatedSum) {
        self.add(other.sum);
        self.comp += other.comp;
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

impl Extend<f64> for CompensatedSum {
    fn extend<I: IntoIterator<Item = f64>>(&mut self, iter: I) {
        for v in iter {
            self.add(v);
        }
    }
}

/// Compensated sum of a slice.
pub fn compensated_sum(values: &[f64]) -> f64 {
    let mut acc = CompensatedSum::new();
    acc.extend(values.iter().copied());
    acc.value()
}

/// Component-wise compensated complex sum.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct CompensatedComplex {
    re: CompensatedSum,
    im: CompensatedSum,
}

impl CompensatedComplex {
    pub const fn new() -> Self {
        CompensatedComplex {
            re: CompensatedSum::new(),
            im: CompensatedSum::new(),
        }
    }

    #[inline]
    pub fn add(&mut self, z: C64) {
        self.re.add(z.re);
        self.im.add(z.im);
    }

    pub fn merge(&mut self, other: &CompensatedComplex) {
        self.re.merge(&other.re);
        self.im.merge(&other.im);
    }

    #[inline]
    pub fn value(&self) -> C64 {
        C64::new(self.re.value(), self.im.value())
    }
}

/// Reduces `items` with `combine` along a balanced binary tree over the
/// index range: `[0, n)` splits into `[0, n/2)` and `[n/2, n)`.
///
/// Returns `None` for an empty input.
pub fn pairwise_reduce<T, F>(items: Vec<T>, combine: F) -> Option<T>
where
    F: Fn(T, T) -> T + Copy,
{
    let mut slots: Vec<Option<T>> = items.into_iter().map(Some).collect();
    reduce_range(&mut slots, combine)
}

fn reduce_range<T, F>(slots: &mut [Option<T>], combine: F) -> Option<T>
where
    F: Fn(T, T) -> T + Copy,
{
    match slots.len() {
        0 => None,
        1 => slots[0].take(),
        n => {
            let (lo, hi) = slots.split_at_mut(n / 2);
            let a = reduce_range(lo, combine);
            let b = reduce_range(hi, combine);
            match (a, b) {
                (Some(a), Some(b)) => Some(combine(a, b)),
                (a, b) => a.or(b),
            }
        }
    }
}

/// Running mean and variance (Welford), mergeable with Chan's update.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct RunningStats {
    count: u64,
    mean: f64,
    m2: f64,
}

impl RunningStats {
    pub const fn new() -> Self {
        RunningStats {
            count: 0,
            mean: 0.0,
            m2: 0.0,
        }
    }

    #[inline]
    pub fn push(&mut self, v: f64) {
        self.count += 1;
        let delta = v - self.mean;
        self.mean += delta / self.count as f64;
        self.m2 += delta * (v - self.mean);
    }

    pub fn merge(self, other: RunningStats) -> RunningStats {
        if self.count == 0 {
            return other;
        }
        if other.count == 0 {
            return self;
        }
        let n = self.count + other.count;
        let (na, nb) = (self.count as f64, other.count as f64);
        let delta = other.mean - self.mean;
        RunningStats {
            count: n,
            mean: self.mean + delta * nb / n as f64,
            m2: self.m2 + other.m2 + delta * delta * na * nb / n as f64,
        }
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    /// Unbiased sample variance; zero with fewer than two observations.
    pub fn variance(&self) -> f64 {
        if self.count < 2 {
            0.0
        } else {
            self.m2 / (self.count - 1) as f64
        }
    }

    /// Standard error of the mean.
    pub fn std_error(&self) -> f64 {
        if self.count < 2 {
            0.0
        } else {
            crate::math::sqrt(self.variance() / self.count as f64)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn compensated_recovers_cancelled_terms() {
        let v = [1.0, 1e100, 1.0, -1e100];
        assert_eq!(compensated_sum(&v), 2.0);
        let naive: f64 = v.iter().sum();
        assert_eq!(naive, 0.0);
    }

    #[test]
    fn merge_matches_sequential() {
        let xs: Vec<f64> = (1..=1000).map(|i| 1.0 / i as f64).collect();
        let mut a = CompensatedSum::new();
        a.extend(xs[..400].iter().copied());
        let mut b = CompensatedSum::new();
        b.extend(xs[400..].iter().copied());
        a.merge(&b);
        assert!((a.value() - compensated_sum(&xs)).abs() < 1e-15);
    }

    #[test]
    fn pairwise_tree_shape_is_fixed() {
        // Non-associative combine exposes the tree: ((0,1),(2,(3,4))).
        let items: Vec<alloc::string::String> =
            (0..5).map(|i| alloc::format!("{i}")).collect();
        let out = pairwise_reduce(items, |a, b| alloc::format!("({a},{b})")).unwrap();
        assert_eq!(out, "((0,1),(2,(3,4)))");
        assert_eq!(pairwise_reduce(Vec::<u8>::new(), |a, _| a), None);
        assert_eq!(pairwise_reduce(vec![7u8], |a, _| a), Some(7));
    }

    #[test]
    fn running_stats_merge() {
        let xs: Vec<f64> = (0..101).map(|i| (i as f64 * 0.37).sin()).collect();
        let mut whole = RunningStats::new();
        xs.iter().for_each(|&v| whole.push(v));
        let mut a = RunningStats::new();
        let mut b = RunningStats::new();
        xs[..33].iter().for_each(|&v| a.push(v));
        xs[33..].iter().for_each(|&v| b.push(v));
        let m = a.merge(b);
        assert_eq!(m.count(), 101);
        assert!((m.mean() - whole.mean()).abs() < 1e-14);
        assert!((m.variance() - whole.variance()).abs() < 1e-13);
    }
}
