//! Time averages `(1/T)∫₀ᵀ … dt` of zeta-sum and proxy integrands, the
//! exact tuple oracle, Hölder extraction and the probes.
//!
//! Quadrature is the midpoint rule on a [`GridSpec`]. Grids are cut into
//! blocks of [`GRID_BLOCK`] points that run on the executor; per-block
//! compensated sums are merged pairwise, so the result does not depend on
//! the worker count. The error indicator compares the full estimate with
//! the estimate from the even-indexed points alone (step `2·dt`).

use alloc::vec::Vec;

use crate::dirichlet::{shift_range, zeta_sum_grid, EvalConfig, GlobalParams, GridSpec, PhaseRotor};
use crate::error::{param_err, Error, Result};
use crate::exec::{Executor, Serial};
use crate::math::{self, C64};
use crate::primes::PrimeTable;
use crate::proxy::Proxy;
use crate::steinhaus::{product_multiset, sample_stats, RmfSample, DEFAULT_ENUMERATION_BUDGET};
use crate::sum::{pairwise_reduce, CompensatedSum, RunningStats};

/// Grid points per parallel block. Even, so block-local parity is global
/// parity.
pub const GRID_BLOCK: usize = 4096;

/// Largest number of product pairs the tuple oracle will sum.
pub const ORACLE_PAIR_BUDGET: u128 = 1 << 30;

/// Relative rounding slack allowed in the discrete Hölder inequality.
pub const HOLDER_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    RiemannMidpoint,
    Trapezoid,
    MonteCarlo,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::RiemannMidpoint => "riemann-midpoint",
            Method::Trapezoid => "trapezoid",
            Method::MonteCarlo => "monte-carlo",
        }
    }
}

/// A quadrature or Monte Carlo estimate. For quadrature, `error_indicator`
/// is `|estimate − half-resolution estimate|`; for Monte Carlo it is the
/// standard error and `dt` is 0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentEstimate {
    pub value: f64,
    pub dt: f64,
    pub points: u64,
    pub method: Method,
    pub error_indicator: f64,
}

impl MomentEstimate {
    pub fn monte_carlo(stats: RunningStats) -> Self {
        MomentEstimate {
            value: stats.mean(),
            dt: 0.0,
            points: stats.count(),
            method: Method::MonteCarlo,
            error_indicator: stats.std_error(),
        }
    }

    fn midpoint(grid: &GridSpec, all: &CompensatedSum, even: &CompensatedSum) -> Self {
        let value = all.value() / grid.count as f64;
        let n_even = grid.count.div_ceil(2);
        let error_indicator = if grid.count >= 2 {
            math::abs(value - even.value() / n_even as f64)
        } else {
            math::abs(value)
        };
        MomentEstimate {
            value,
            dt: grid.dt,
            points: grid.count as u64,
            method: Method::RiemannMidpoint,
            error_indicator,
        }
    }

    /// Same grid (step, size, rule).
    pub fn same_grid(&self, other: &MomentEstimate) -> bool {
        self.dt == other.dt && self.points == other.points && self.method == other.method
    }
}

/// Default step: `1/(8 ln x)` for the second moment, `1/(8 k ln x)` for
/// `two_k = 2k > 2`. Lengths below 2 have a constant integrand and use
/// `ln 2`.
pub fn default_step(x: f64, two_k: f64) -> f64 {
    let freq = math::ln(x.max(2.0));
    if two_k > 2.0 {
        1.0 / (4.0 * two_k * freq)
    } else {
        1.0 / (8.0 * freq)
    }
}

/// Midpoint grid on `[0, T]` at [`default_step`].
pub fn default_grid(params: &GlobalParams, two_k: f64) -> Result<GridSpec> {
    GridSpec::midpoint_with_step(params.t_max, default_step(params.x, two_k))
}

/// Step for integrands carrying the proxy weight: eight points per period of
/// the fastest of `|S|^{2k}` (frequency `k ln x`) and `R` (frequency up to
/// `4 Σ_m J_m ln y_m`).
pub fn proxy_step(params: &GlobalParams, proxy: &Proxy) -> f64 {
    let sub = proxy.subdivision();
    let r_freq: f64 = (1..=sub.blocks())
        .map(|m| 4.0 * sub.truncation(m) as f64 * sub.ln_scales()[m])
        .sum();
    let z_freq = params.k.max(1.0) * math::ln(params.x.max(2.0));
    1.0 / (8.0 * z_freq.max(r_freq))
}

pub fn proxy_grid(params: &GlobalParams, proxy: &Proxy) -> Result<GridSpec> {
    GridSpec::midpoint_with_step(params.t_max, proxy_step(params, proxy))
}

fn check_grid(grid: &GridSpec, t_max: f64) -> Result<()> {
    if !grid.within(t_max) {
        return Err(param_err!(
            "grid [{}, {}] does not lie in [0, T = {t_max}]",
            grid.t0,
            grid.end()
        ));
    }
    Ok(())
}

fn check_work(eval: &EvalConfig, points: usize, terms: u64) -> Result<()> {
    let work = points as u128 * terms.max(1) as u128;
    if work > eval.work_budget as u128 {
        return Err(Error::Resource(alloc::format!(
            "quadrature work {work} exceeds budget {}",
            eval.work_budget
        )));
    }
    Ok(())
}

/// Sums of `Q` per-point quantities over all points and over the even ones.
#[derive(Clone)]
struct GridSums<const Q: usize> {
    all: [CompensatedSum; Q],
    even: [CompensatedSum; Q],
}

impl<const Q: usize> GridSums<Q> {
    fn new() -> Self {
        GridSums {
            all: [CompensatedSum::new(); Q],
            even: [CompensatedSum::new(); Q],
        }
    }

    fn push(&mut self, j: usize, v: &[f64; Q]) {
        for q in 0..Q {
            self.all[q].add(v[q]);
            if j % 2 == 0 {
                self.even[q].add(v[q]);
            }
        }
    }

    fn merge(mut self, o: Self) -> Self {
        for q in 0..Q {
            self.all[q].merge(&o.all[q]);
            self.even[q].merge(&o.even[q]);
        }
        self
    }

    fn estimate(&self, grid: &GridSpec, q: usize) -> MomentEstimate {
        MomentEstimate::midpoint(grid, &self.all[q], &self.even[q])
    }
}

/// Runs `block` on each grid block; `block` pushes one value row per point.
fn grid_sums<const Q: usize, E, F>(grid: &GridSpec, exec: &E, block: F) -> Result<GridSums<Q>>
where
    E: Executor,
    F: Fn(&GridSpec, &mut dyn FnMut([f64; Q])) -> Result<()> + Sync + Send,
{
    let n_blocks = grid.count.div_ceil(GRID_BLOCK);
    let parts = exec.map_indexed(n_blocks, |b| -> Result<GridSums<Q>> {
        let start = b * GRID_BLOCK;
        let sub = grid.sub_grid(start, GRID_BLOCK.min(grid.count - start));
        let mut sums = GridSums::<Q>::new();
        let mut j = 0usize;
        block(&sub, &mut |v| {
            sums.push(j, &v);
            j += 1;
        })?;
        if j != sub.count {
            return Err(Error::Consistency(alloc::format!(
                "block produced {j} values for {} points",
                sub.count
            )));
        }
        Ok(sums)
    });
    let parts: Vec<GridSums<Q>> = parts.into_iter().collect::<Result<_>>()?;
    Ok(pairwise_reduce(parts, GridSums::merge).unwrap_or_else(GridSums::new))
}

/// Midpoint estimate of `(1/T)∫₀ᵀ |S(x,t)|^{two_k} dt`.
pub fn integrate_moment<E: Executor>(
    params: &GlobalParams,
    two_k: f64,
    grid: &GridSpec,
    eval: &EvalConfig,
    exec: &E,
) -> Result<MomentEstimate> {
    if !(two_k > 0.0 && two_k.is_finite()) {
        return Err(param_err!("two_k must be finite and positive, got {two_k}"));
    }
    check_grid(grid, params.t_max)?;
    check_work(eval, grid.count, params.n_max())?;
    let sums = grid_sums::<1, _, _>(grid, exec, |g, push| {
        for s in zeta_sum_grid(params.x, g, eval, &Serial)? {
            push([math::abs_pow(s, two_k)]);
        }
        Ok(())
    })?;
    Ok(sums.estimate(grid, 0))
}

/// Distinct `n_1 ⋯ n_k` with their multiplicities, as `(ln P, count)`.
fn weighted_logs(x: u64, k: u32) -> Result<Vec<(u64, f64)>> {
    let products = product_multiset(x, k, DEFAULT_ENUMERATION_BUDGET)?;
    let d = products.len() as u128;
    if d * d / 2 > ORACLE_PAIR_BUDGET {
        return Err(Error::Resource(alloc::format!(
            "{d} distinct products give more than {ORACLE_PAIR_BUDGET} pairs"
        )));
    }
    Ok(products.into_iter().map(|(p, c)| (p, c as f64)).collect())
}

/// `ln(q/p)` for integers `p < q`, accurate when the ratio is near 1.
fn ln_ratio(p: u64, q: u64) -> f64 {
    libm::log1p((q - p) as f64 / p as f64)
}

/// Exact `(1/T)∫₀ᵀ |S(x,t)|^{2k} dt` for integer `k`, by expanding into
/// products: `Σ_P c_P² + 2 Σ_{P<Q} c_P c_Q sin(T ln(Q/P)) / (T ln(Q/P))`
/// where `c_P` counts the `k`-tuples with product `P`.
pub fn tuple_integral_oracle(x: u64, k: u32, t_max: f64) -> Result<f64> {
    if !(t_max > 0.0 && t_max.is_finite()) {
        return Err(param_err!("T must be finite and positive, got {t_max}"));
    }
    let w = weighted_logs(x, k)?;
    let mut acc = CompensatedSum::new();
    for (i, &(p, cp)) in w.iter().enumerate() {
        acc.add(cp * cp);
        for &(q, cq) in &w[i + 1..] {
            let u = t_max * ln_ratio(p, q);
            acc.add(2.0 * cp * cq * libm::sin(u) / u);
        }
    }
    Ok(acc.value())
}

/// `C(x, k) = Σ_{P<Q} 2 c_P c_Q / ln(Q/P)`, so that the oracle differs from
/// the multiplicative energy by at most `C / T`.
pub fn oracle_offdiag_constant(x: u64, k: u32) -> Result<f64> {
    let w = weighted_logs(x, k)?;
    let mut acc = CompensatedSum::new();
    for (i, &(p, cp)) in w.iter().enumerate() {
        for &(q, cq) in &w[i + 1..] {
            acc.add(2.0 * cp * cq / ln_ratio(p, q));
        }
    }
    Ok(acc.value())
}

/// Grid means needed by the Hölder step, all from one pass.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeightedPass {
    /// `|S|^{2k}`.
    pub moment: MomentEstimate,
    /// `|S|²`.
    pub second: MomentEstimate,
    /// `R`.
    pub weight: MomentEstimate,
    /// `|S|² R`.
    pub weighted: MomentEstimate,
    /// `R^{k/(k-1)}`; `None` when `k <= 1`.
    pub proxy_power: Option<MomentEstimate>,
}

/// Evaluates `S` and `R` on the grid by phase rotation and accumulates
/// every integrand used downstream.
pub fn weighted_pass<E: Executor>(
    params: &GlobalParams,
    proxy: &Proxy,
    grid: &GridSpec,
    eval: &EvalConfig,
    exec: &E,
) -> Result<WeightedPass> {
    check_grid(grid, params.t_max)?;
    let terms = params.n_max() + (proxy.prime_count() * proxy.ells().len() * 2) as u64;
    check_work(eval, grid.count, terms)?;
    let k = params.k;
    let power = if k > 1.0 { k / (k - 1.0) } else { f64::NAN };
    let sums = grid_sums::<5, _, _>(grid, exec, |g, push| {
        let s = zeta_sum_grid(params.x, g, eval, &Serial)?;
        let mut rot = PhaseRotor::new(proxy.ln_primes(), g, eval.renorm_interval);
        for sj in s {
            let r = proxy.weight_from_blocks(&proxy.block_values_from_phases(rot.current()));
            rot.advance();
            let s2 = math::abs_pow(sj, 2.0);
            let p = if k > 1.0 { math::pow(r, power) } else { 0.0 };
            push([math::abs_pow(sj, 2.0 * k), s2, r, s2 * r, p]);
        }
        Ok(())
    })?;
    Ok(WeightedPass {
        moment: sums.estimate(grid, 0),
        second: sums.estimate(grid, 1),
        weight: sums.estimate(grid, 2),
        weighted: sums.estimate(grid, 3),
        proxy_power: (k > 1.0).then(|| sums.estimate(grid, 4)),
    })
}

/// Midpoint estimate of `(1/T)∫₀ᵀ |S(x,t)|² R(t) dt`.
pub fn integrate_weighted<E: Executor>(
    params: &GlobalParams,
    proxy: &Proxy,
    grid: &GridSpec,
    eval: &EvalConfig,
    exec: &E,
) -> Result<MomentEstimate> {
    Ok(weighted_pass(params, proxy, grid, eval, exec)?.weighted)
}

/// Midpoint estimate of `(1/T)∫₀ᵀ R(t)^{k/(k-1)} dt`.
pub fn integrate_proxy_power<E: Executor>(
    params: &GlobalParams,
    proxy: &Proxy,
    grid: &GridSpec,
    eval: &EvalConfig,
    exec: &E,
) -> Result<MomentEstimate> {
    if !(params.k > 1.0) {
        return Err(param_err!("proxy power needs k > 1, got {}", params.k));
    }
    weighted_pass(params, proxy, grid, eval, exec)?
        .proxy_power
        .ok_or_else(|| Error::Consistency("proxy power missing for k > 1".into()))
}

/// `value / (ln y)^{k²+1}`; a probe with an unknown implied constant.
pub fn proxy_power_probe_ratio(value: f64, ln_y: f64, k: f64) -> f64 {
    math::exp(math::ln(value) - (k * k + 1.0) * math::ln(ln_y))
}

/// `(I_w / I_p^{(k-1)/k})^k`, the lower bound for the `2k`-th moment.
pub fn holder_lower_bound(i_w: &MomentEstimate, i_p: &MomentEstimate, k: f64) -> Result<f64> {
    if !i_w.same_grid(i_p) {
        return Err(param_err!(
            "estimates come from different grids (dt {} vs {}, {} vs {} points)",
            i_w.dt,
            i_p.dt,
            i_w.points,
            i_p.points
        ));
    }
    if !(k > 1.0) {
        return Err(param_err!("Hölder extraction needs k > 1, got {k}"));
    }
    if !(i_p.value > 0.0) {
        return Err(param_err!("proxy power integral must be positive, got {}", i_p.value));
    }
    Ok(math::pow(i_w.value / math::pow(i_p.value, (k - 1.0) / k), k))
}

/// The grid-level inequality `W <= M_{2k}^{1/k} P^{(k-1)/k}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HolderCheck {
    pub w: f64,
    pub m_2k: f64,
    pub p: f64,
    pub rhs: f64,
    /// `W / rhs − 1`; at most [`HOLDER_SLACK`] when the check holds.
    pub slack: f64,
    pub holds: bool,
}

pub fn holder_check(w: f64, m_2k: f64, p: f64, k: f64) -> HolderCheck {
    let rhs = math::pow(m_2k, 1.0 / k) * math::pow(p, (k - 1.0) / k);
    let slack = if rhs > 0.0 { w / rhs - 1.0 } else if w > 0.0 { f64::INFINITY } else { 0.0 };
    HolderCheck {
        w,
        m_2k,
        p,
        rhs,
        slack,
        holds: slack <= HOLDER_SLACK,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LowerBoundReport {
    pub i_w: MomentEstimate,
    pub i_p: MomentEstimate,
    pub m_2k: MomentEstimate,
    pub lb: f64,
    pub holder: HolderCheck,
    /// `LB <= M_{2k}` up to [`HOLDER_SLACK`].
    pub lb_below_moment: bool,
    pub proxy_power_probe: f64,
}

impl LowerBoundReport {
    pub fn holder_ok(&self) -> bool {
        self.holder.holds && self.lb_below_moment
    }
}

/// Full Hölder pipeline on one shared grid.
pub fn lower_bound<E: Executor>(
    params: &GlobalParams,
    proxy: &Proxy,
    grid: &GridSpec,
    eval: &EvalConfig,
    exec: &E,
) -> Result<LowerBoundReport> {
    if !(params.k > 1.0) {
        return Err(param_err!("lower bound needs k > 1, got {}", params.k));
    }
    let pass = weighted_pass(params, proxy, grid, eval, exec)?;
    let i_p = pass
        .proxy_power
        .ok_or_else(|| Error::Consistency("proxy power missing for k > 1".into()))?;
    let lb = holder_lower_bound(&pass.weighted, &i_p, params.k)?;
    let holder = holder_check(pass.weighted.value, pass.moment.value, i_p.value, params.k);
    Ok(LowerBoundReport {
        i_w: pass.weighted,
        i_p,
        m_2k: pass.moment,
        lb,
        holder,
        lb_below_moment: lb <= pass.moment.value * (1.0 + HOLDER_SLACK),
        proxy_power_probe: proxy_power_probe_ratio(i_p.value, proxy.ln_y(), params.k),
    })
}

/// Running `ln Σ e^{v_i}`.
#[derive(Debug, Clone, Copy, PartialEq)]
struct LogSumExp {
    max: f64,
    sum: f64,
}

impl LogSumExp {
    const EMPTY: LogSumExp = LogSumExp {
        max: f64::NEG_INFINITY,
        sum: 0.0,
    };

    fn add(&mut self, v: f64) {
        if v == f64::NEG_INFINITY {
            return;
        }
        if v > self.max {
            self.sum = self.sum * math::exp(self.max - v) + 1.0;
            self.max = v;
        } else {
            self.sum += math::exp(v - self.max);
        }
    }

    fn merge(self, o: LogSumExp) -> LogSumExp {
        if o.max == f64::NEG_INFINITY {
            return self;
        }
        if self.max == f64::NEG_INFINITY {
            return o;
        }
        let max = self.max.max(o.max);
        LogSumExp {
            max,
            sum: self.sum * math::exp(self.max - max) + o.sum * math::exp(o.max - max),
        }
    }

    fn ln(&self) -> f64 {
        self.max + math::ln(self.sum)
    }
}

/// Correlation of the proxy at shift `ℓ` against the majorant at `ℓ'`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorrelationProbe {
    pub ell: i64,
    pub ell_prime: i64,
    pub ln_estimate: f64,
    /// `exp(ln_estimate)`; may overflow to `inf`.
    pub estimate: f64,
    /// `ln[(ln y)^{k²} / (|ℓ−ℓ'|^{2(k-1)} + 1)]`.
    pub ln_shape: f64,
    /// `estimate / shape`, computed in log space.
    pub ratio: f64,
    pub points: u64,
}

/// Midpoint estimate of `(1/T)∫₀ᵀ Π_m R_{m,ℓ}(t) U_{m,ℓ'}(t) dt`, summed
/// in log space, reported against the shape
/// `(ln y)^{k²} / (|ℓ−ℓ'|^{2(k-1)} + 1)`.
pub fn correlation_probe<E: Executor>(
    params: &GlobalParams,
    proxy: &Proxy,
    ell: i64,
    ell_prime: i64,
    grid: &GridSpec,
    eval: &EvalConfig,
    exec: &E,
) -> Result<CorrelationProbe> {
    let k = proxy.k();
    if !(k > 1.0) {
        return Err(param_err!("correlation needs k > 1, got {k}"));
    }
    check_grid(grid, params.t_max)?;
    let pos = |e: i64| {
        proxy.ell_position(e).ok_or_else(|| {
            let r = shift_range(proxy.ln_y());
            param_err!("shift {e} outside [{}, {}]", r.start(), r.end())
        })
    };
    let (i, ip) = (pos(ell)?, pos(ell_prime)?);
    check_work(eval, grid.count, (proxy.prime_count() * proxy.ells().len()) as u64)?;
    let n_blocks = grid.count.div_ceil(GRID_BLOCK);
    let parts = exec.map_indexed(n_blocks, |b| -> Result<LogSumExp> {
        let start = b * GRID_BLOCK;
        let g = grid.sub_grid(start, GRID_BLOCK.min(grid.count - start));
        let mut rot = PhaseRotor::new(proxy.ln_primes(), &g, eval.renorm_interval);
        let mut acc = LogSumExp::EMPTY;
        for _ in 0..g.count {
            let d = proxy.block_values_from_phases(rot.current());
            rot.advance();
            acc.add(proxy.correlation_log_integrand(&d, i, ip)?);
        }
        Ok(acc)
    });
    let parts: Vec<LogSumExp> = parts.into_iter().collect::<Result<_>>()?;
    let total = pairwise_reduce(parts, LogSumExp::merge).unwrap_or(LogSumExp::EMPTY);
    let ln_estimate = total.ln() - math::ln(grid.count as f64);
    let gap = (ell - ell_prime).unsigned_abs() as f64;
    let ln_shape = k * k * math::ln(proxy.ln_y()) - math::ln(math::pow(gap, 2.0 * (k - 1.0)) + 1.0);
    Ok(CorrelationProbe {
        ell,
        ell_prime,
        ln_estimate,
        estimate: math::exp(ln_estimate),
        ln_shape,
        ratio: math::exp(ln_estimate - ln_shape),
        points: grid.count as u64,
    })
}

/// Terms summed explicitly in [`shift_sum_limit`].
pub const SHIFT_LIMIT_TERMS: u64 = 1_000_000;

/// Upper bound for `Σ_{d∈ℤ} 1/(|d|^{2(k-1)} + 1)`: the first
/// [`SHIFT_LIMIT_TERMS`] terms on each side plus the integral bound on the
/// rest. Infinite when `2(k-1) <= 1`.
pub fn shift_sum_limit(k: f64) -> f64 {
    let s = 2.0 * (k - 1.0);
    if !(s > 1.0) {
        return f64::INFINITY;
    }
    let mut acc = CompensatedSum::new();
    for d in (1..=SHIFT_LIMIT_TERMS).rev() {
        acc.add(1.0 / (math::pow(d as f64, s) + 1.0));
    }
    let n = SHIFT_LIMIT_TERMS as f64;
    1.0 + 2.0 * (acc.value() + math::pow(n, 1.0 - s) / (s - 1.0))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShiftSumReport {
    /// `⌊ln y / 2⌋`.
    pub half_range: u64,
    pub sum: f64,
    /// `sum / (2⌊ln y/2⌋ + 1)`.
    pub bound_ratio: f64,
    pub limit: f64,
    pub holds: bool,
}

/// `Σ_{|ℓ|,|ℓ'| ≤ N} 1/(|ℓ−ℓ'|^{2(k-1)} + 1)` with `N = ⌊ln y / 2⌋`, by
/// counting differences: `d` occurs `2N + 1 − |d|` times.
pub fn shift_sum_check_log(ln_y: f64, k: f64) -> Result<ShiftSumReport> {
    if !(k > 1.0 && k.is_finite()) {
        return Err(param_err!("shift sum needs finite k > 1, got {k}"));
    }
    if !(ln_y.is_finite()) {
        return Err(param_err!("ln y must be finite, got {ln_y}"));
    }
    let half = *shift_range(ln_y).end() as u64;
    let width = 2 * half + 1;
    let s = 2.0 * (k - 1.0);
    let mut acc = CompensatedSum::new();
    for d in (1..width).rev() {
        acc.add(2.0 * (width - d) as f64 / (math::pow(d as f64, s) + 1.0));
    }
    acc.add(width as f64);
    let sum = acc.value();
    let bound_ratio = sum / width as f64;
    let limit = shift_sum_limit(k);
    Ok(ShiftSumReport {
        half_range: half,
        sum,
        bound_ratio,
        limit,
        holds: bound_ratio <= limit,
    })
}

pub fn shift_sum_check(y: f64, k: f64) -> Result<ShiftSumReport> {
    if !(y > 0.0) {
        return Err(param_err!("y must be positive, got {y}"));
    }
    shift_sum_check_log(math::ln(y), k)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExpectationComparison {
    /// `(1/T)∫₀ᵀ |S|² R dt`.
    pub integral: MomentEstimate,
    /// Monte Carlo `E|Σ_{n≤x} f(n)|² R(f)`.
    pub rmf_expectation: MomentEstimate,
    /// `integral − rmf_expectation`.
    pub discrepancy: f64,
}

impl ExpectationComparison {
    /// `3·SE + quadrature indicator`.
    pub fn tolerance(&self) -> f64 {
        3.0 * self.rmf_expectation.error_indicator + self.integral.error_indicator
    }
}

/// Compares the time average of `|S|² R` with its random-model counterpart,
/// where `R(f)` substitutes `f(p)` for `p^{-it}` in every block polynomial.
#[allow(clippy::too_many_arguments)]
pub fn expectation_comparison<E: Executor>(
    params: &GlobalParams,
    table: &PrimeTable,
    proxy: &Proxy,
    grid: &GridSpec,
    samples: usize,
    seed: u64,
    eval: &EvalConfig,
    exec: &E,
) -> Result<ExpectationComparison> {
    if samples < 2 {
        return Err(param_err!("need at least two samples, got {samples}"));
    }
    let integral = integrate_weighted(params, proxy, grid, eval, exec)?;
    let n_max = params.n_max();
    let y_floor = math::floor(proxy.subdivision().scale(proxy.subdivision().blocks())) as u64;
    let limit = n_max.max(y_floor).max(2);
    let np = proxy.prime_count();
    let stats = sample_stats(samples, exec, |s| {
        let sample = RmfSample::draw(table, limit, seed, s)?;
        let values = sample.values(table, n_max)?;
        let mut sum = crate::sum::CompensatedComplex::new();
        for &v in &values {
            sum.add(v);
        }
        let phases: Vec<C64> = sample.thetas()[..np].iter().map(|&t| math::cis(t)).collect();
        let r = proxy.weight_from_blocks(&proxy.block_values_from_phases(&phases));
        Ok(math::abs_pow(sum.value(), 2.0) * r)
    })?;
    let rmf_expectation = MomentEstimate::monte_carlo(stats);
    Ok(ExpectationComparison {
        integral,
        rmf_expectation,
        discrepancy: integral.value - rmf_expectation.value,
    })
}

pub const EXPONENT_SWEEP_WARNING: &str =
    "non-binding probe: the (k-1)^2 exponent is asymptotic and not reachable at desk scale";

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRow {
    pub t_max: f64,
    pub big_l: f64,
    pub ln_ln_l: f64,
    pub moment: MomentEstimate,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExponentSweep {
    pub rows: Vec<SweepRow>,
    /// Least-squares slope of `ln M_{2k}` against `ln ln L`.
    pub slope: f64,
    pub intercept: f64,
    /// `(k-1)²`.
    pub predicted_slope: f64,
    pub warning: &'static str,
}

/// Least-squares line through `(u_i, v_i)`; `None` when the `u` are all
/// equal.
pub fn fit_line(u: &[f64], v: &[f64]) -> Option<(f64, f64)> {
    let n = u.len() as f64;
    if u.len() < 2 || u.len() != v.len() {
        return None;
    }
    let mu = u.iter().sum::<f64>() / n;
    let mv = v.iter().sum::<f64>() / n;
    let (mut suu, mut suv) = (0.0, 0.0);
    for (a, b) in u.iter().zip(v) {
        suu += (a - mu) * (a - mu);
        suv += (a - mu) * (b - mv);
    }
    if !(suu > 0.0) {
        return None;
    }
    let slope = suv / suu;
    Some((slope, mv - slope * mu))
}

/// Moment at each `T` on the default grid, and the fitted exponent.
pub fn exponent_sweep<E: Executor>(
    x: f64,
    k: f64,
    t_values: &[f64],
    eval: &EvalConfig,
    exec: &E,
) -> Result<ExponentSweep> {
    let mut rows = Vec::with_capacity(t_values.len());
    for &t in t_values {
        let params = GlobalParams::new(x, t, k, 1.0)?;
        let big_l = params.big_l();
        if !(big_l > 1.0) {
            return Err(param_err!("L = min(x, T/x) = {big_l} must exceed 1 (T = {t})"));
        }
        let grid = default_grid(&params, 2.0 * k)?;
        let moment = integrate_moment(&params, 2.0 * k, &grid, eval, exec)?;
        rows.push(SweepRow {
            t_max: t,
            big_l,
            ln_ln_l: math::ln(math::ln(big_l)),
            moment,
        });
    }
    let u: Vec<f64> = rows.iter().map(|r| r.ln_ln_l).collect();
    let v: Vec<f64> = rows.iter().map(|r| math::ln(r.moment.value)).collect();
    let (slope, intercept) = fit_line(&u, &v)
        .ok_or_else(|| param_err!("exponent fit needs at least two distinct values of L"))?;
    Ok(ExponentSweep {
        rows,
        slope,
        intercept,
        predicted_slope: (k - 1.0) * (k - 1.0),
        warning: EXPONENT_SWEEP_WARNING,
    })
}

/// Number of shifts `ℓ` as a float.
pub fn shift_count_f64(proxy: &Proxy) -> f64 {
    proxy.ells().len() as f64
}
