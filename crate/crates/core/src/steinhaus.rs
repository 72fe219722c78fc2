//! Steinhaus random multiplicative functions and the exact and factorized
//! expectations built from them.
//!
//! A sample assigns every prime `p` an independent phase `θ_p` uniform on
//! `[0, 2π)` and sets `f(p) = e^{iθ_p}`, extended completely
//! multiplicatively. Phases come from ChaCha8 keyed by `(seed, sample)` as
//! (seed, stream), read at word offset `2p`, so any single prime's phase can
//! be regenerated without touching the others.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

use crate::dd::DoubleDouble;
use crate::dirichlet::{shift_range, BlockBasis};
use crate::error::{param_err, Error, Result};
use crate::exec::Executor;
use crate::math::{self, cis, C64, TAU};
use crate::moments::MomentEstimate;
use crate::primes::PrimeTable;
use crate::sum::{pairwise_reduce, CompensatedSum, RunningStats};

/// Monte Carlo samples per reduction chunk.
pub const SAMPLE_CHUNK: usize = 1024;

/// Uniform phase in `[0, 2π)` for prime `p` of sample `sample` under `seed`.
pub fn prime_phase(seed: u64, sample: u64, p: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(sample);
    phase_at(&mut rng, p)
}

#[inline]
fn phase_at(rng: &mut ChaCha8Rng, p: u64) -> f64 {
    rng.set_word_pos(2 * p as u128);
    let bits = rng.next_u64() >> 11;
    bits as f64 * (1.0 / (1u64 << 53) as f64) * TAU
}

/// One realization of a Steinhaus completely multiplicative function on
/// `[1, limit]`.
#[derive(Debug, Clone, PartialEq)]
pub struct RmfSample {
    seed: u64,
    sample: u64,
    limit: u64,
    primes: Vec<u32>,
    theta: Vec<f64>,
}

impl RmfSample {
    /// Draws sample number `sample` of the stream keyed by `seed`.
    pub fn draw(table: &PrimeTable, limit: u64, seed: u64, sample: u64) -> Result<Self> {
        if limit < 2 {
            return Err(param_err!("sample limit must be at least 2, got {limit}"));
        }
        if limit > table.limit() {
            return Err(param_err!(
                "sample limit {limit} exceeds sieve limit {}",
                table.limit()
            ));
        }
        let primes = table.primes_between(1.0, limit as f64)?.to_vec();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(sample);
        let theta = primes.iter().map(|&p| phase_at(&mut rng, p as u64)).collect();
        Ok(RmfSample {
            seed,
            sample,
            limit,
            primes,
            theta,
        })
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn sample_index(&self) -> u64 {
        self.sample
    }

    pub fn limit(&self) -> u64 {
        self.limit
    }

    pub fn primes(&self) -> &[u32] {
        &self.primes
    }

    /// Phases aligned with [`Self::primes`].
    pub fn thetas(&self) -> &[f64] {
        &self.theta
    }

    pub fn theta(&self, p: u64) -> Option<f64> {
        let i = self.primes.binary_search(&(p as u32)).ok()?;
        Some(self.theta[i])
    }

    /// `f(p)` for prime `p <= limit`.
    pub fn at_prime(&self, p: u64) -> Option<C64> {
        self.theta(p).map(cis)
    }

    /// `f(1), …, f(x)` (index 0 holds `f(1)`), built through the smallest
    /// prime factor table.
    pub fn values(&self, table: &PrimeTable, x: u64) -> Result<Vec<C64>> {
        if x > self.limit {
            return Err(param_err!(
                "x = {x} exceeds the sample limit {}",
                self.limit
            ));
        }
        let mut f = vec![C64::new(0.0, 0.0); x as usize + 1];
        if x >= 1 {
            f[1] = C64::new(1.0, 0.0);
        }
        let mut next_prime = 0usize;
        for n in 2..=x {
            let p = table.spf(n).ok_or_else(|| param_err!("{n} outside the table"))?;
            if p == n {
                f[n as usize] = cis(self.theta[next_prime]);
                next_prime += 1;
            } else {
                f[n as usize] = f[p as usize] * f[(n / p) as usize];
            }
        }
        f.remove(0);
        Ok(f)
    }
}

/// Sample 0 of the stream keyed by `seed`.
pub fn sample_rmf(table: &PrimeTable, limit: u64, seed: u64) -> Result<RmfSample> {
    RmfSample::draw(table, limit, seed, 0)
}

/// `Σ_{n ≤ x} f(n)`.
pub fn rmf_partial_sum(sample: &RmfSample, table: &PrimeTable, x: u64) -> Result<C64> {
    let f = sample.values(table, x)?;
    let mut re = CompensatedSum::new();
    let mut im = CompensatedSum::new();
    for z in f {
        re.add(z.re);
        im.add(z.im);
    }
    Ok(C64::new(re.value(), im.value()))
}

/// Exact `E|Σ_{n ≤ x} f(n)|^{2k}`: the number of `2k`-tuples in `[1, x]`
/// with `n_1⋯n_k = m_1⋯m_k`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EnergyCount {
    pub x: u64,
    pub k: u32,
    pub count: u128,
}

/// Default bound on `x^k` for the product-multiset oracles.
pub const DEFAULT_ENUMERATION_BUDGET: u128 = 1_000_000_000;

/// Distinct `k`-fold products of integers in `[1, x]` with their
/// multiplicities, ascending by product.
pub fn product_multiset(x: u64, k: u32, budget: u128) -> Result<Vec<(u64, u128)>> {
    if x == 0 {
        return Err(param_err!("x must be at least 1"));
    }
    let total = (x as u128).checked_pow(k);
    match total {
        Some(t) if t <= budget && t <= u64::MAX as u128 => {}
        _ => {
            return Err(Error::Resource(alloc::format!(
                "x^k = {x}^{k} exceeds the enumeration budget {budget}"
            )))
        }
    }
    let mut current: BTreeMap<u64, u128> = BTreeMap::new();
    current.insert(1, 1);
    for _ in 0..k {
        let mut next: BTreeMap<u64, u128> = BTreeMap::new();
        for (&prod, &mult) in &current {
            for n in 1..=x {
                *next.entry(prod * n).or_insert(0) += mult;
            }
        }
        current = next;
    }
    Ok(current.into_iter().collect())
}

/// Multiplicative energy by product-multiset convolution:
/// `Σ_P mult(P)²`.
pub fn multiplicative_energy(x: u64, k: u32) -> Result<EnergyCount> {
    multiplicative_energy_with_budget(x, k, DEFAULT_ENUMERATION_BUDGET)
}

pub fn multiplicative_energy_with_budget(x: u64, k: u32, budget: u128) -> Result<EnergyCount> {
    let products = product_multiset(x, k, budget)?;
    let count = products.iter().map(|&(_, m)| m * m).sum();
    Ok(EnergyCount { x, k, count })
}

/// Monte Carlo mean of `|Σ_{n ≤ x} f(n)|^{2k}` over `samples` independent
/// functions, with its standard error.
pub fn mc_moment<E: Executor>(
    table: &PrimeTable,
    x: u64,
    k: f64,
    samples: usize,
    seed: u64,
    exec: &E,
) -> Result<MomentEstimate> {
    if samples < 2 {
        return Err(param_err!("need at least two samples, got {samples}"));
    }
    if x < 1 || x > table.limit() {
        return Err(param_err!(
            "x = {x} must lie in [1, {}]",
            table.limit()
        ));
    }
    if !(k > 0.0) {
        return Err(param_err!("k must be positive, got {k}"));
    }
    let limit = x.max(2);
    let stats = sample_stats(samples, exec, |s| {
        let sample = RmfSample::draw(table, limit, seed, s)?;
        let sum = rmf_partial_sum(&sample, table, x)?;
        Ok(math::abs_pow(sum, 2.0 * k))
    })?;
    Ok(MomentEstimate::monte_carlo(stats))
}

/// Runs `eval` for sample indices `0..samples` in fixed chunks and merges
/// the chunk statistics pairwise.
pub(crate) fn sample_stats<E, F>(samples: usize, exec: &E, eval: F) -> Result<RunningStats>
where
    E: Executor,
    F: Fn(u64) -> Result<f64> + Sync + Send,
{
    let n_chunks = samples.div_ceil(SAMPLE_CHUNK);
    let parts = exec.map_indexed(n_chunks, |c| -> Result<RunningStats> {
        let lo = c * SAMPLE_CHUNK;
        let hi = (lo + SAMPLE_CHUNK).min(samples);
        let mut st = RunningStats::new();
        for s in lo..hi {
            st.push(eval(s as u64)?);
        }
        Ok(st)
    });
    let parts: Vec<RunningStats> = parts.into_iter().collect::<Result<_>>()?;
    Ok(pairwise_reduce(parts, RunningStats::merge).unwrap_or_default())
}

fn check_lemma1_args(table: &PrimeTable, y: f64, k: f64) -> Result<()> {
    if !(y >= 1.0) {
        return Err(param_err!("y must be at least 1, got {y}"));
    }
    if y > table.limit() as f64 {
        return Err(param_err!("y = {y} exceeds sieve limit {}", table.limit()));
    }
    if !k.is_finite() {
        return Err(param_err!("k must be finite"));
    }
    Ok(())
}

/// `Σ_{|ℓ| ≤ ⌊ln y / 2⌋} Π_{p ≤ y} E exp(2(k-1)·Re[A_p f(p) + B_p f(p)²])`
/// with `A_p = p^{-1/2 - iℓ/ln y}` and `B_p = ½p^{-1 - 2iℓ/ln y}`.
///
/// Each per-prime expectation is an integral over one uniform phase,
/// computed with the `nodes`-point trapezoid rule (spectrally accurate for
/// this smooth periodic integrand); the product over primes is accumulated
/// in log space.
pub fn lemma1_lhs_quadrature(table: &PrimeTable, y: f64, k: f64, nodes: usize) -> Result<f64> {
    check_lemma1_args(table, y, k)?;
    if nodes < 64 {
        return Err(param_err!("need at least 64 quadrature nodes, got {nodes}"));
    }
    let ln_y = math::ln(y);
    let primes = table.primes_between(1.0, y)?;
    let coef = 2.0 * (k - 1.0);
    let nodes_unit: Vec<C64> = (0..nodes)
        .map(|j| cis(TAU * j as f64 / nodes as f64))
        .collect();
    let mut total = CompensatedSum::new();
    for ell in shift_range(ln_y) {
        let shift = if ell == 0 { 0.0 } else { ell as f64 / ln_y };
        let mut log_prod = CompensatedSum::new();
        for &p in primes {
            let pf = p as f64;
            let lp = math::ln(pf);
            let a = cis(-shift * lp) / math::sqrt(pf);
            let b = cis(-2.0 * shift * lp) * (0.5 / pf);
            let mut mean = CompensatedSum::new();
            for &u in &nodes_unit {
                let re = (a * u + b * (u * u)).re;
                mean.add(math::exp(coef * re));
            }
            log_prod.add(math::ln(mean.value() / nodes as f64));
        }
        total.add(math::exp(log_prod.value()));
    }
    Ok(total.value())
}

/// Monte Carlo estimate of the same expectation, drawing `f(p)` from
/// [`RmfSample`]s. Independent of the quadrature route above.
pub fn lemma1_lhs_monte_carlo<E: Executor>(
    table: &PrimeTable,
    y: f64,
    k: f64,
    samples: usize,
    seed: u64,
    exec: &E,
) -> Result<MomentEstimate> {
    check_lemma1_args(table, y, k)?;
    if samples < 2 {
        return Err(param_err!("need at least two samples, got {samples}"));
    }
    let ln_y = math::ln(y);
    let ells: Vec<i64> = shift_range(ln_y).collect();
    let count = ells.len() as f64;
    if y < 2.0 {
        let mut st = RunningStats::new();
        (0..samples).for_each(|_| st.push(count));
        return Ok(MomentEstimate::monte_carlo(st));
    }
    let basis = BlockBasis::new(table, 1.0, y, &ells, y)?;
    let limit = math::floor(y) as u64;
    let coef = 2.0 * (k - 1.0);
    let stats = sample_stats(samples, exec, |s| {
        let sample = RmfSample::draw(table, limit, seed, s)?;
        let phases: Vec<C64> = sample.thetas().iter().map(|&t| cis(t)).collect();
        let mut acc = CompensatedSum::new();
        for d in basis.eval_all(&phases) {
            acc.add(math::exp(coef * d.re));
        }
        Ok(acc.value())
    })?;
    Ok(MomentEstimate::monte_carlo(stats))
}

/// Probe normalization `value / (x·(ln y)^{k²-1})` for the factorized
/// expectation. The implied constant is not known, so this is reported,
/// never compared against a threshold.
pub fn lemma1_probe_ratio(value: f64, x: f64, ln_y: f64, k: f64) -> f64 {
    value / (x * math::pow(ln_y, k * k - 1.0))
}

/// `exp(2(k-1)·re_d) − (Σ_{j ≤ J} (k-1)^j re_d^j / j!)²`, the tail of the
/// squared truncated exponential. Equals the double series
/// `Σ_{max(u,v) > J} (k-1)^{u+v} re_d^{u+v} / (u! v!)`.
///
/// Evaluated as the difference in double-double arithmetic (Horner for
/// the truncated sum), then rounded once. Arguments with
/// `|2(k-1)·re_d| > 600` fall back to plain doubles, where the exponential
/// dominates anyway.
pub fn tail_error(re_d: f64, k: f64, j_max: u32) -> f64 {
    let km1 = DoubleDouble::difference(k, 1.0);
    let a = km1 * DoubleDouble::from_f64(re_d);
    if math::abs(2.0 * a.to_f64()) > 600.0 {
        let af = a.to_f64();
        let mut p = 1.0;
        for j in (1..=j_max).rev() {
            p = 1.0 + af * p / j as f64;
        }
        return math::exp(2.0 * af) - p * p;
    }
    let mut p = DoubleDouble::ONE;
    for j in (1..=j_max).rev() {
        p = DoubleDouble::ONE + (a * p).div_u64(j as u64);
    }
    ((a + a).exp() - p * p).to_f64()
}

/// `4·e^{2|k-1||re_d|}·(|k-1||re_d|)^{J+1}/(J+1)!`, a bound on
/// `|tail_error(re_d, k, J)|`.
pub fn tail_bound(re_d: f64, k: f64, j_max: u32) -> f64 {
    let a = math::abs((k - 1.0) * re_d);
    if a == 0.0 {
        return 0.0;
    }
    let n = j_max as f64 + 1.0;
    math::exp(math::ln(4.0) + 2.0 * a + n * math::ln(a) - math::ln_gamma(n + 1.0))
}
