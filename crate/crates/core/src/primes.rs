//! Primes up to a limit, with a smallest-prime-factor table.
//!
//! Up to [`DENSE_LIMIT`] a linear sieve fills both the prime list and the
//! factor table. Beyond it, primes come from a segmented Eratosthenes sieve
//! and smallest prime factors are found by trial division with the stored
//! primes, which keeps memory proportional to the number of primes.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{param_err, Result};

/// Largest limit served entirely by the dense factor table.
pub const DENSE_LIMIT: u64 = 1 << 24;

/// Largest accepted sieve limit.
pub const MAX_LIMIT: u64 = 1 << 31;

const SEGMENT_LEN: u64 = 1 << 18;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PrimeTable {
    limit: u64,
    primes: Vec<u32>,
    /// `spf[n]` for `n <= min(limit, dense limit)`; entries 0 and 1 are 0.
    spf: Vec<u32>,
}

/// Sieves all primes `<= limit`, `2 <= limit <= 2^31`.
pub fn sieve(limit: u64) -> Result<PrimeTable> {
    sieve_with_dense_limit(limit, DENSE_LIMIT)
}

pub(crate) fn sieve_with_dense_limit(limit: u64, dense_limit: u64) -> Result<PrimeTable> {
    if !(2..=MAX_LIMIT).contains(&limit) {
        return Err(param_err!("sieve limit {limit} outside [2, 2^31]"));
    }
    let dense = limit.min(dense_limit.max(2));
    let (mut primes, spf) = linear_sieve(dense as usize);
    if limit > dense {
        segmented_extend(&mut primes, dense, limit);
    }
    Ok(PrimeTable { limit, primes, spf })
}

fn linear_sieve(n: usize) -> (Vec<u32>, Vec<u32>) {
    let mut spf = vec![0u32; n + 1];
    let mut primes = Vec::new();
    for i in 2..=n {
        if spf[i] == 0 {
            spf[i] = i as u32;
            primes.push(i as u32);
        }
        let si = spf[i];
        for &p in &primes {
            let m = i * p as usize;
            if p > si || m > n {
                break;
            }
            spf[m] = p;
        }
    }
    (primes, spf)
}

/// Appends the primes in `(lo, hi]`; `primes` must already hold every prime
/// `<= lo`, and `lo >= sqrt(hi)`.
fn segmented_extend(primes: &mut Vec<u32>, lo: u64, hi: u64) {
    let root = isqrt(hi);
    let base: Vec<u64> = primes
        .iter()
        .map(|&p| p as u64)
        .take_while(|&p| p <= root)
        .collect();
    let mut start = lo + 1;
    let mut composite = vec![false; SEGMENT_LEN as usize];
    while start <= hi {
        let end = (start + SEGMENT_LEN - 1).min(hi);
        let len = (end - start + 1) as usize;
        composite[..len].fill(false);
        for &p in &base {
            let mut m = (start.div_ceil(p) * p).max(p * p);
            while m <= end {
                composite[(m - start) as usize] = true;
                m += p;
            }
        }
        primes.extend(
            composite[..len]
                .iter()
                .enumerate()
                .filter(|(_, &c)| !c)
                .map(|(i, _)| (start + i as u64) as u32),
        );
        start = end + 1;
    }
}

fn isqrt(n: u64) -> u64 {
    let mut r = crate::math::sqrt(n as f64) as u64;
    while r * r > n {
        r -= 1;
    }
    while (r + 1) * (r + 1) <= n {
        r += 1;
    }
    r
}

impl PrimeTable {
    pub fn limit(&self) -> u64 {
        self.limit
    }

    /// All primes `<= limit`, ascending.
    pub fn primes(&self) -> &[u32] {
        &self.primes
    }

    /// Smallest prime factor of `n`, for `2 <= n <= limit`.
    pub fn spf(&self, n: u64) -> Option<u64> {
        if n < 2 || n > self.limit {
            return None;
        }
        if (n as usize) < self.spf.len() {
            return Some(self.spf[n as usize] as u64);
        }
        for &p in &self.primes {
            let p = p as u64;
            if p * p > n {
                break;
            }
            if n % p == 0 {
                return Some(p);
            }
        }
        Some(n)
    }

    /// The dense part of the factor table, indexed by `n`.
    pub fn spf_table(&self) -> &[u32] {
        &self.spf
    }

    /// Primes `p` with `a < p <= b`, as a contiguous slice.
    pub fn primes_between(&self, a: f64, b: f64) -> Result<&[u32]> {
        if b > self.limit as f64 {
            return Err(param_err!(
                "range end {b} exceeds sieve limit {}",
                self.limit
            ));
        }
        if a.is_nan() || b.is_nan() {
            return Err(param_err!("prime range bounds must not be NaN"));
        }
        let lo = self.primes.partition_point(|&p| (p as f64) <= a);
        let hi = self.primes.partition_point(|&p| (p as f64) <= b);
        Ok(if lo >= hi { &[] } else { &self.primes[lo..hi] })
    }

    /// Prime factorization of `n <= limit` as (prime, exponent) pairs.
    pub fn factor(&self, mut n: u64) -> Option<Vec<(u64, u32)>> {
        if n == 0 || n > self.limit {
            return None;
        }
        let mut out: Vec<(u64, u32)> = Vec::new();
        while n > 1 {
            let p = self.spf(n)?;
            match out.last_mut() {
                Some((q, e)) if *q == p => *e += 1,
                _ => out.push((p, 1)),
            }
            n /= p;
        }
        Some(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn is_prime_trial(n: u64) -> bool {
        n >= 2 && (2..).take_while(|d| d * d <= n).all(|d| n % d != 0)
    }

    fn least_factor_trial(n: u64) -> u64 {
        (2..).take_while(|d| d * d <= n).find(|d| n % d == 0).unwrap_or(n)
    }

    #[test]
    fn small_sieves() {
        assert_eq!(sieve(10).unwrap().primes(), &[2, 3, 5, 7]);
        assert_eq!(sieve(2).unwrap().primes(), &[2]);
        let t = sieve(100).unwrap();
        let oracle = (2..=100u64).filter(|&n| is_prime_trial(n)).count();
        assert_eq!(oracle, 25);
        assert_eq!(t.primes().len(), oracle);
    }

    #[test]
    fn limit_is_validated() {
        assert!(sieve(1).is_err());
        assert!(sieve(0).is_err());
        assert!(sieve(MAX_LIMIT + 1).is_err());
    }

    #[test]
    fn half_open_ranges() {
        let t = sieve(100).unwrap();
        assert_eq!(t.primes_between(1.0, 5.0).unwrap(), &[2, 3, 5]);
        assert!(t.primes_between(5.0, 5.0).unwrap().is_empty());
        assert_eq!(t.primes_between(3.0, 10.0).unwrap(), &[5, 7]);
        assert_eq!(t.primes_between(7.5, 2.0).unwrap(), &[] as &[u32]);
        assert_eq!(t.primes_between(1.0, 100.0).unwrap(), t.primes());
        assert!(t.primes_between(1.0, 101.0).is_err());
    }

    #[test]
    fn segmented_path_matches_trial_division() {
        let t = sieve_with_dense_limit(200_000, 1_000).unwrap();
        let dense = sieve(200_000).unwrap();
        assert_eq!(t.primes(), dense.primes());
        for n in (2..200_000u64).step_by(997) {
            assert_eq!(t.spf(n), Some(least_factor_trial(n)), "n={n}");
        }
        assert_eq!(t.spf(199_999), Some(least_factor_trial(199_999)));
    }

    #[test]
    fn factorization_terminates() {
        let t = sieve(10_000).unwrap();
        for n in 2..=10_000u64 {
            let f = t.factor(n).unwrap();
            let back: u64 = f.iter().map(|&(p, e)| p.pow(e)).product();
            assert_eq!(back, n);
        }
        assert_eq!(t.factor(1).unwrap(), Vec::new());
    }

    proptest! {
        #[test]
        fn spf_is_least_prime_factor(limit in 2u64..5_000) {
            let t = sieve(limit).unwrap();
            for n in 2..=limit {
                let p = t.spf(n).unwrap();
                prop_assert_eq!(p, least_factor_trial(n));
            }
            let expected: Vec<u32> =
                (2..=limit).filter(|&n| is_prime_trial(n)).map(|n| n as u32).collect();
            prop_assert_eq!(t.primes(), &expected[..]);
        }
    }
}
