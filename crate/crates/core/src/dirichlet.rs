//! The zeta sum `S(x, t) = Σ_{n ≤ x} n^{-it}` and the shifted prime block
//! polynomials
//!
//! ```text
//! D(t) = Σ_{a < p ≤ b} p^{-(1/2 + i t + i ℓ/ln y)} + ½ p^{-(1 + 2 i t + 2 i ℓ/ln y)}
//! ```
//!
//! Each comes in two flavours: a direct evaluation that calls sine/cosine
//! for every term, and a grid evaluation that rotates each term's phase by
//! a precomputed unit complex number per grid step. The grid versions split
//! the term range into fixed chunks, accumulate each chunk with compensated
//! summation and merge chunks along the pairwise tree of [`crate::sum`].

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{param_err, Error, Result};
use crate::exec::Executor;
use crate::math::{self, cis, C64};
use crate::primes::PrimeTable;
use crate::sum::{pairwise_reduce, CompensatedComplex};

/// Scalars shared by every experiment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GlobalParams {
    /// Length of the zeta sum.
    pub x: f64,
    /// Integration horizon `T`.
    pub t_max: f64,
    /// Moment parameter (the `2k`-th moment).
    pub k: f64,
    /// Scale exponent: `y = x^{1/c0}`.
    pub c0: f64,
}

impl GlobalParams {
    pub fn new(x: f64, t_max: f64, k: f64, c0: f64) -> Result<Self> {
        if !(x >= 1.0 && x.is_finite()) {
            return Err(param_err!("x must be a finite real >= 1, got {x}"));
        }
        if !(t_max > 0.0 && t_max.is_finite()) {
            return Err(param_err!("T must be finite and positive, got {t_max}"));
        }
        if !(k > 0.0 && k.is_finite()) {
            return Err(param_err!("k must be finite and positive, got {k}"));
        }
        if !(c0 > 0.0 && c0.is_finite()) {
            return Err(param_err!("c0 must be finite and positive, got {c0}"));
        }
        Ok(GlobalParams { x, t_max, k, c0 })
    }

    /// `⌊x⌋`, the number of terms in the zeta sum.
    pub fn n_max(&self) -> u64 {
        math::floor(self.x) as u64
    }

    pub fn ln_y(&self) -> f64 {
        math::ln(self.x) / self.c0
    }

    pub fn y(&self) -> f64 {
        math::exp(self.ln_y())
    }

    /// `L = min(x, T/x)`.
    pub fn big_l(&self) -> f64 {
        self.x.min(self.t_max / self.x)
    }

    /// Conditions under which the proxy weight is meaningful:
    /// `y >= 2`, `x <= sqrt(T)` and `k > 1`.
    pub fn check_proxy_preconditions(&self) -> Result<()> {
        if self.y() < 2.0 {
            return Err(param_err!(
                "y = x^(1/c0) = {} is below 2; no primes to build blocks from",
                self.y()
            ));
        }
        if self.x * self.x > self.t_max {
            return Err(param_err!(
                "x = {} exceeds sqrt(T) = {}",
                self.x,
                math::sqrt(self.t_max)
            ));
        }
        if self.k <= 1.0 {
            return Err(param_err!("k must exceed 1, got {}", self.k));
        }
        Ok(())
    }
}

/// Uniform grid `t_j = t0 + j·dt`, `0 <= j < count`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub t0: f64,
    pub dt: f64,
    pub count: usize,
}

impl GridSpec {
    pub fn new(t0: f64, dt: f64, count: usize) -> Result<Self> {
        if !(dt > 0.0 && dt.is_finite()) || !t0.is_finite() {
            return Err(param_err!("grid needs finite t0 and dt > 0 (t0={t0}, dt={dt})"));
        }
        if count == 0 {
            return Err(param_err!("grid count must be at least 1"));
        }
        Ok(GridSpec { t0, dt, count })
    }

    /// Midpoints of `count` equal cells of `[0, T]`.
    pub fn midpoint(t_max: f64, count: usize) -> Result<Self> {
        if !(t_max > 0.0) {
            return Err(param_err!("T must be positive, got {t_max}"));
        }
        if count == 0 {
            return Err(param_err!("grid count must be at least 1"));
        }
        let dt = t_max / count as f64;
        GridSpec::new(0.5 * dt, dt, count)
    }

    /// Midpoint grid on `[0, T]` whose step does not exceed `max_step`.
    pub fn midpoint_with_step(t_max: f64, max_step: f64) -> Result<Self> {
        if !(max_step > 0.0) {
            return Err(param_err!("grid step must be positive, got {max_step}"));
        }
        let count = math::ceil(t_max / max_step).max(1.0);
        if count > usize::MAX as f64 / 2.0 {
            return Err(Error::Resource(alloc::format!(
                "grid of {count} points is not addressable"
            )));
        }
        GridSpec::midpoint(t_max, count as usize)
    }

    #[inline]
    pub fn point(&self, j: usize) -> f64 {
        self.t0 + j as f64 * self.dt
    }

    /// Last grid point.
    pub fn end(&self) -> f64 {
        self.point(self.count - 1)
    }

    /// True when the grid lies inside `[0, T]` (up to rounding in the last
    /// point).
    pub fn within(&self, t_max: f64) -> bool {
        self.t0 >= 0.0 && self.end() <= t_max * (1.0 + 4.0 * f64::EPSILON)
    }

    /// The `len` points starting at index `start`.
    pub fn sub_grid(&self, start: usize, len: usize) -> GridSpec {
        GridSpec {
            t0: self.point(start),
            dt: self.dt,
            count: len,
        }
    }
}

/// Tuning knobs for grid evaluation. The chunk length fixes the reduction
/// tree, so two runs agree bit for bit when it agrees.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EvalConfig {
    /// Maximum `count · terms` for one grid evaluation.
    pub work_budget: u64,
    /// Terms (integers `n` or primes `p`) per chunk.
    pub chunk_len: usize,
    /// Rotation steps between renormalizations of each phase to unit modulus.
    pub renorm_interval: usize,
}

impl Default for EvalConfig {
    fn default() -> Self {
        EvalConfig {
            work_budget: 1 << 36,
            chunk_len: 4096,
            renorm_interval: 1 << 10,
        }
    }
}

impl EvalConfig {
    fn check_budget(&self, count: usize, terms: u64) -> Result<()> {
        let work = (count as u128) * (terms as u128);
        if work > self.work_budget as u128 {
            return Err(Error::Resource(alloc::format!(
                "grid work {work} exceeds budget {}",
                self.work_budget
            )));
        }
        Ok(())
    }
}

/// Integer shifts `|ℓ| <= ⌊(ln y)/2⌋`. Empty-range scales (`y < 1`) give
/// only `ℓ = 0`.
pub fn shift_range(ln_y: f64) -> core::ops::RangeInclusive<i64> {
    let half = if ln_y > 0.0 { math::floor(0.5 * ln_y) as i64 } else { 0 };
    -half..=half
}

/// `2⌊(ln y)/2⌋ + 1`, the number of shifts.
pub fn shift_count(ln_y: f64) -> usize {
    let r = shift_range(ln_y);
    (r.end() - r.start() + 1) as usize
}

fn truncate_length(x: f64) -> Result<u64> {
    if !(x >= 1.0 && x.is_finite()) {
        return Err(param_err!("sum length must be a finite real >= 1, got {x}"));
    }
    Ok(math::floor(x) as u64)
}

/// `S(x, t)` with a fresh sine/cosine per term and compensated accumulation.
pub fn zeta_sum_direct(x: f64, t: f64) -> Result<C64> {
    let n_max = truncate_length(x)?;
    let mut acc = CompensatedComplex::new();
    for n in 1..=n_max {
        acc.add(cis(-t * math::ln(n as f64)));
    }
    Ok(acc.value())
}

/// One rotating term: current value and per-step multiplier.
#[derive(Clone, Copy)]
struct Rotor {
    z: C64,
    w: C64,
}

impl Rotor {
    #[inline]
    fn step(&mut self) {
        self.z *= self.w;
    }

    #[inline]
    fn renormalize(&mut self) {
        let r = math::modulus(self.z);
        self.z /= r;
    }
}

/// Accumulates `Σ_i weight_i · z_i(t_j)` over one chunk of rotors for every
/// grid point.
fn rotate_chunk(
    rotors: &mut [Rotor],
    weights: &[f64],
    count: usize,
    renorm_interval: usize,
) -> Vec<CompensatedComplex> {
    let mut out = vec![CompensatedComplex::new(); count];
    let renorm = renorm_interval.max(1);
    for (j, slot) in out.iter_mut().enumerate() {
        if j > 0 && j % renorm == 0 {
            rotors.iter_mut().for_each(Rotor::renormalize);
        }
        for (r, &wgt) in rotors.iter_mut().zip(weights) {
            slot.add(r.z * wgt);
            r.step();
        }
    }
    out
}

fn merge_columns(
    mut a: Vec<CompensatedComplex>,
    b: Vec<CompensatedComplex>,
) -> Vec<CompensatedComplex> {
    for (x, y) in a.iter_mut().zip(&b) {
        x.merge(y);
    }
    a
}

fn finish(columns: Option<Vec<CompensatedComplex>>, count: usize) -> Vec<C64> {
    match columns {
        Some(c) => c.iter().map(CompensatedComplex::value).collect(),
        None => vec![C64::new(0.0, 0.0); count],
    }
}

/// `S(x, t_j)` for every grid point by phase rotation.
pub fn zeta_sum_grid<E: Executor>(
    x: f64,
    grid: &GridSpec,
    cfg: &EvalConfig,
    exec: &E,
) -> Result<Vec<C64>> {
    let n_max = truncate_length(x)?;
    cfg.check_budget(grid.count, n_max)?;
    let chunk = cfg.chunk_len.max(1) as u64;
    let n_chunks = n_max.div_ceil(chunk) as usize;
    let parts = exec.map_indexed(n_chunks, |c| {
        let lo = 1 + c as u64 * chunk;
        let hi = (lo + chunk - 1).min(n_max);
        let mut rotors: Vec<Rotor> = (lo..=hi)
            .map(|n| {
                let ln_n = math::ln(n as f64);
                Rotor {
                    z: cis(-grid.t0 * ln_n),
                    w: cis(-grid.dt * ln_n),
                }
            })
            .collect();
        let weights = vec![1.0; rotors.len()];
        rotate_chunk(&mut rotors, &weights, grid.count, cfg.renorm_interval)
    });
    Ok(finish(pairwise_reduce(parts, merge_columns), grid.count))
}

fn check_block_args(table: &PrimeTable, y_hi: f64, y: f64) -> Result<()> {
    if !(y >= 2.0) {
        return Err(param_err!("block scale y must be at least 2, got {y}"));
    }
    if y_hi > table.limit() as f64 {
        return Err(param_err!(
            "block end {y_hi} exceeds sieve limit {}",
            table.limit()
        ));
    }
    Ok(())
}

/// `D(t)` over the primes in `(y_lo, y_hi]` with shift `ℓ / ln y`.
pub fn block_poly(
    table: &PrimeTable,
    y_lo: f64,
    y_hi: f64,
    ell: i64,
    y: f64,
    t: f64,
) -> Result<C64> {
    check_block_args(table, y_hi, y)?;
    let s = t + ell as f64 / math::ln(y);
    let mut acc = CompensatedComplex::new();
    for &p in table.primes_between(y_lo, y_hi)? {
        let pf = p as f64;
        let ln_p = math::ln(pf);
        acc.add(cis(-s * ln_p) / math::sqrt(pf));
        acc.add(cis(-2.0 * s * ln_p) * (0.5 / pf));
    }
    Ok(acc.value())
}

/// `D(t_j)` on a grid, with one rotor for `p^{-it}` and one for `p^{-2it}`
/// per prime.
#[allow(clippy::too_many_arguments)]
pub fn block_poly_grid<E: Executor>(
    table: &PrimeTable,
    y_lo: f64,
    y_hi: f64,
    ell: i64,
    y: f64,
    grid: &GridSpec,
    cfg: &EvalConfig,
    exec: &E,
) -> Result<Vec<C64>> {
    check_block_args(table, y_hi, y)?;
    let primes = table.primes_between(y_lo, y_hi)?;
    cfg.check_budget(grid.count, 2 * primes.len() as u64)?;
    let shift = ell as f64 / math::ln(y);
    let s0 = grid.t0 + shift;
    let chunk = cfg.chunk_len.max(1);
    let n_chunks = primes.len().div_ceil(chunk);
    let parts = exec.map_indexed(n_chunks, |c| {
        let ps = &primes[c * chunk..((c + 1) * chunk).min(primes.len())];
        let mut rotors = Vec::with_capacity(2 * ps.len());
        let mut weights = Vec::with_capacity(2 * ps.len());
        for &p in ps {
            let pf = p as f64;
            let ln_p = math::ln(pf);
            rotors.push(Rotor {
                z: cis(-s0 * ln_p),
                w: cis(-grid.dt * ln_p),
            });
            weights.push(1.0 / math::sqrt(pf));
            rotors.push(Rotor {
                z: cis(-2.0 * s0 * ln_p),
                w: cis(-2.0 * grid.dt * ln_p),
            });
            weights.push(0.5 / pf);
        }
        rotate_chunk(&mut rotors, &weights, grid.count, cfg.renorm_interval)
    });
    Ok(finish(pairwise_reduce(parts, merge_columns), grid.count))
}

/// Precomputed coefficients for evaluating one prime block at several
/// shifts `ℓ` from the unit phases `u_p` (either `p^{-it}` or a random
/// multiplicative function's `f(p)`):
///
/// `D_ℓ = Σ_p c1[ℓ][p]·u_p + c2[ℓ][p]·u_p²`, with
/// `c1 = p^{-1/2}·p^{-iℓ/ln y}` and `c2 = ½p^{-1}·p^{-2iℓ/ln y}`.
#[derive(Debug, Clone)]
pub struct BlockBasis {
    primes: Vec<u32>,
    ln_p: Vec<f64>,
    ells: Vec<i64>,
    c1: Vec<Vec<C64>>,
    c2: Vec<Vec<C64>>,
}

impl BlockBasis {
    pub fn new(
        table: &PrimeTable,
        y_lo: f64,
        y_hi: f64,
        ells: &[i64],
        y: f64,
    ) -> Result<Self> {
        check_block_args(table, y_hi, y)?;
        let primes = table.primes_between(y_lo, y_hi)?.to_vec();
        let ln_p: Vec<f64> = primes.iter().map(|&p| math::ln(p as f64)).collect();
        let ln_y = math::ln(y);
        let mut c1 = Vec::with_capacity(ells.len());
        let mut c2 = Vec::with_capacity(ells.len());
        for &ell in ells {
            let shift = ell as f64 / ln_y;
            c1.push(
                primes
                    .iter()
                    .zip(&ln_p)
                    .map(|(&p, &lp)| cis(-shift * lp) / math::sqrt(p as f64))
                    .collect(),
            );
            c2.push(
                primes
                    .iter()
                    .zip(&ln_p)
                    .map(|(&p, &lp)| cis(-2.0 * shift * lp) * (0.5 / p as f64))
                    .collect(),
            );
        }
        Ok(BlockBasis {
            primes,
            ln_p,
            ells: ells.to_vec(),
            c1,
            c2,
        })
    }

    pub fn primes(&self) -> &[u32] {
        &self.primes
    }

    pub fn ln_primes(&self) -> &[f64] {
        &self.ln_p
    }

    pub fn ells(&self) -> &[i64] {
        &self.ells
    }

    pub fn is_empty(&self) -> bool {
        self.primes.is_empty()
    }

    /// `p^{-it}` for every prime of the block.
    pub fn phases_at(&self, t: f64) -> Vec<C64> {
        self.ln_p.iter().map(|&lp| cis(-t * lp)).collect()
    }

    /// `D_ℓ` for shift index `i` (into [`Self::ells`]) from unit phases.
    pub fn eval(&self, i: usize, phases: &[C64]) -> C64 {
        debug_assert_eq!(phases.len(), self.primes.len());
        let mut acc = CompensatedComplex::new();
        for ((&a, &b), &u) in self.c1[i].iter().zip(&self.c2[i]).zip(phases) {
            acc.add(a * u + b * (u * u));
        }
        acc.value()
    }

    /// `D_ℓ` for every shift at once.
    pub fn eval_all(&self, phases: &[C64]) -> Vec<C64> {
        (0..self.ells.len()).map(|i| self.eval(i, phases)).collect()
    }
}

/// Phases `p^{-i t_j}` advanced along a grid by rotation, with the same
/// renormalization schedule as the grid evaluators.
#[derive(Debug, Clone)]
pub struct PhaseRotor {
    z: Vec<C64>,
    w: Vec<C64>,
    steps: usize,
    renorm_interval: usize,
}

impl PhaseRotor {
    pub fn new(ln_terms: &[f64], grid: &GridSpec, renorm_interval: usize) -> Self {
        PhaseRotor {
            z: ln_terms.iter().map(|&l| cis(-grid.t0 * l)).collect(),
            w: ln_terms.iter().map(|&l| cis(-grid.dt * l)).collect(),
            steps: 0,
            renorm_interval: renorm_interval.max(1),
        }
    }

    /// Phases at the current grid point.
    pub fn current(&self) -> &[C64] {
        &self.z
    }

    /// Moves to the next grid point.
    pub fn advance(&mut self) {
        for (z, w) in self.z.iter_mut().zip(&self.w) {
            *z *= *w;
        }
        self.steps += 1;
        if self.steps % self.renorm_interval == 0 {
            for z in self.z.iter_mut() {
                *z /= math::modulus(*z);
            }
        }
    }
}
