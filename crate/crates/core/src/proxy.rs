//! The weight `R(t)` used in the Hölder lower-bound argument, and the band
//! machinery that bounds its pieces.
//!
//! Scales `1 = y_0 < y_1 < … < y_M = y` satisfy `y_{m-1} = y_m^{1/r}` for a
//! step ratio `r`. On block `m` the shifted prime polynomial `D_{m,ℓ}(t)`
//! enters through the truncated exponential
//!
//! ```text
//! R_{m,ℓ}(t) = ( Σ_{j ≤ J_m} (k-1)^j (Re D_{m,ℓ}(t))^j / j! )²
//! R(t)       = Σ_{|ℓ| ≤ ⌊ln y / 2⌋} Π_m R_{m,ℓ}(t)
//! ```
//!
//! With the constants that make the asymptotic argument work, `J_M` is far
//! beyond anything computable, so [`ProxyConfig`] has a desk mode in which
//! `J_M` is set directly. Every structural relation (schedule, band scales,
//! the length inequality in log space, the pointwise majorant bounds) is
//! kept as is.

use alloc::vec;
use alloc::vec::Vec;

use crate::dirichlet::{shift_range, BlockBasis, GlobalParams};
use crate::error::{param_err, Error, Result};
use crate::exec::Executor;
use crate::math::{self, C64};
use crate::primes::PrimeTable;
use crate::sum::pairwise_reduce;

/// Exponents below this use the direct (non-log) majorant path.
pub const DIRECT_EXPONENT_LIMIT: u64 = 300;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProxyConfig {
    pub c0: f64,
    /// `y_m / y_{m-1}` in log scale; 20 in the construction.
    pub step_ratio: f64,
    /// `J_1 = ⌈(ln ln y)^{j1_exponent}⌉`; 3/2 in the construction.
    pub j1_exponent: f64,
    /// `J_M = ⌊c0 / jm_divisor⌋`; `10^5·k` in the construction.
    pub jm_divisor: f64,
    /// Base band width is `J_m / band_divisor`; `100·k`.
    pub band_divisor: f64,
    /// Majorant power `a_m = 2⌈power_multiplier·J_m⌉`; `200·k`.
    pub power_multiplier: f64,
    /// Per-block weight in the length inequality `Π y_m^{w·J_m} < x`;
    /// `10^4·k`.
    pub short_poly_multiplier: f64,
    pub desk_mode: bool,
    /// `J_M` in desk mode.
    pub desk_jm: u64,
    /// Number of scales in desk mode; `None` picks it by the window rule
    /// when `y >= e^e`, else 1.
    pub desk_m: Option<usize>,
}

impl ProxyConfig {
    /// The constants of the construction, for moment parameter `k`.
    pub fn paper(c0: f64, k: f64) -> Self {
        ProxyConfig {
            c0,
            step_ratio: 20.0,
            j1_exponent: 1.5,
            jm_divisor: 1e5 * k,
            band_divisor: 100.0 * k,
            power_multiplier: 200.0 * k,
            short_poly_multiplier: 1e4 * k,
            desk_mode: false,
            desk_jm: 0,
            desk_m: None,
        }
    }

    /// Same structure with a user-chosen `J_M` (and optionally `M`).
    pub fn desk(c0: f64, k: f64, desk_jm: u64, desk_m: Option<usize>) -> Self {
        ProxyConfig {
            desk_mode: true,
            desk_jm,
            desk_m,
            ..ProxyConfig::paper(c0, k)
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.step_ratio > 1.0) {
            return Err(param_err!("step_ratio must exceed 1, got {}", self.step_ratio));
        }
        for (name, v) in [
            ("jm_divisor", self.jm_divisor),
            ("band_divisor", self.band_divisor),
            ("power_multiplier", self.power_multiplier),
            ("short_poly_multiplier", self.short_poly_multiplier),
            ("c0", self.c0),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(param_err!("{name} must be finite and positive, got {v}"));
            }
        }
        if self.desk_m == Some(0) {
            return Err(param_err!("desk M must be at least 1"));
        }
        Ok(())
    }
}

/// Scale ladder and truncation schedule.
#[derive(Debug, Clone, PartialEq)]
pub struct Subdivision {
    /// `ln y_0 = 0, ln y_1, …, ln y_M`.
    ln_y: Vec<f64>,
    /// `y_0 = 1, …, y_M`; may hold `inf` when the scales are symbolic.
    y: Vec<f64>,
    /// `J_1, …, J_M`.
    j: Vec<u64>,
    /// `y_1` lies in `[y^{1/(20 (ln ln y)²)}, y^{1/(ln ln y)²}]`.
    pub window_ok: bool,
    /// `J_M >= exp(10^4 k²)`; only evaluated outside desk mode.
    pub jm_assumption_ok: Option<bool>,
}

impl Subdivision {
    /// Number of blocks `M`.
    pub fn blocks(&self) -> usize {
        self.j.len()
    }

    pub fn ln_scales(&self) -> &[f64] {
        &self.ln_y
    }

    /// `y_m` for `0 <= m <= M`.
    pub fn scale(&self, m: usize) -> f64 {
        self.y[m]
    }

    pub fn scales(&self) -> &[f64] {
        &self.y
    }

    /// `J_m` for `1 <= m <= M`.
    pub fn truncation(&self, m: usize) -> u64 {
        self.j[m - 1]
    }

    pub fn truncations(&self) -> &[u64] {
        &self.j
    }

    pub fn ln_top(&self) -> f64 {
        self.ln_y[self.ln_y.len() - 1]
    }

    /// Copy with every `J_m` replaced.
    pub fn with_truncations(&self, j: Vec<u64>) -> Result<Subdivision> {
        if j.len() != self.j.len() {
            return Err(param_err!(
                "expected {} truncation depths, got {}",
                self.j.len(),
                j.len()
            ));
        }
        Ok(Subdivision { j, ..self.clone() })
    }

    /// Copy with every `J_m` multiplied by `factor`.
    pub fn scaled_truncations(&self, factor: u64) -> Subdivision {
        Subdivision {
            j: self.j.iter().map(|&j| j.saturating_mul(factor)).collect(),
            ..self.clone()
        }
    }
}

/// Builds the subdivision for `y = x^{1/c0}` from `params`.
pub fn build_subdivision(params: &GlobalParams, cfg: &ProxyConfig) -> Result<Subdivision> {
    build_subdivision_log(params.ln_y(), Some(params.y()), params.k, cfg)
}

/// Builds the subdivision from `ln y` alone, so that scales far beyond the
/// range of `f64` can be handled; `y_exact` pins `y_M` when it is
/// representable.
pub fn build_subdivision_log(
    ln_y: f64,
    y_exact: Option<f64>,
    k: f64,
    cfg: &ProxyConfig,
) -> Result<Subdivision> {
    cfg.validate()?;
    if !(ln_y > 0.0 && ln_y.is_finite()) {
        return Err(param_err!("ln y must be finite and positive, got {ln_y}"));
    }
    let e = core::f64::consts::E;
    let lnln = if ln_y > 1.0 { math::ln(ln_y) } else { 0.0 };
    let paper_window = ln_y >= e;
    if !cfg.desk_mode && !paper_window {
        return Err(param_err!(
            "y = e^{ln_y} is below e^e; ln ln y must exceed 1 outside desk mode"
        ));
    }
    let window_m = if paper_window {
        // Largest M with y_1 = y^{r^{1-M}} >= y^{1/(20 (ln ln y)^2)},
        // i.e. (M-1)·ln r <= ln(20 (ln ln y)^2).
        let cap = math::ln(20.0 * lnln * lnln);
        if cap < 0.0 {
            return Err(Error::Construction(alloc::format!(
                "no M >= 1 puts y_1 above the lower window bound (ln ln y = {lnln})"
            )));
        }
        let step = math::ln(cfg.step_ratio);
        let mut m = 1usize;
        while (m as f64) * step <= cap * (1.0 + 1e-12) {
            m += 1;
        }
        Some(m)
    } else {
        None
    };
    let m = if cfg.desk_mode {
        cfg.desk_m.or(window_m).unwrap_or(1)
    } else {
        window_m.unwrap_or(1)
    };

    let ln_scale = |i: usize| -> f64 {
        if i == 0 {
            0.0
        } else {
            ln_y * math::pow(cfg.step_ratio, i as f64 - m as f64)
        }
    };
    let ln_ys: Vec<f64> = (0..=m).map(ln_scale).collect();
    let ys: Vec<f64> = (0..=m)
        .map(|i| match (i, y_exact) {
            (0, _) => 1.0,
            (i, Some(y)) if i == m => y,
            (i, _) => math::exp(ln_ys[i]),
        })
        .collect();

    let window_ok = paper_window && {
        let exponent = ln_ys[1] / ln_y;
        let lo = 1.0 / (20.0 * lnln * lnln);
        let hi = 1.0 / (lnln * lnln);
        exponent >= lo * (1.0 - 1e-12) && exponent <= hi * (1.0 + 1e-12)
    };

    let (jm, jm_assumption_ok) = if cfg.desk_mode {
        (cfg.desk_jm, None)
    } else {
        let real = cfg.c0 / cfg.jm_divisor;
        let jm = math::floor(real);
        if jm < 1.0 {
            return Err(Error::Construction(alloc::format!(
                "J_M = c0 / {} = {real} is below 1",
                cfg.jm_divisor
            )));
        }
        (jm as u64, Some(math::ln(real) >= 1e4 * k * k))
    };
    let mut j: Vec<u64> = (1..=m).map(|i| jm + (m - i) as u64).collect();
    if !cfg.desk_mode && m >= 2 {
        j[0] = math::ceil(math::pow(lnln, cfg.j1_exponent)) as u64;
    }
    Ok(Subdivision {
        ln_y: ln_ys,
        y: ys,
        j,
        window_ok,
        jm_assumption_ok,
    })
}

/// Result of the log-space length check `Π_m y_m^{w·J_m} < x`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShortPolyReport {
    pub lhs_log: f64,
    pub rhs_log: f64,
    pub holds: bool,
}

/// Compares `Σ_m w·J_m·ln y_m` with `ln x`.
pub fn check_short_polynomial_log(sub: &Subdivision, ln_x: f64, cfg: &ProxyConfig) -> ShortPolyReport {
    let lhs_log: f64 = (1..=sub.blocks())
        .map(|m| cfg.short_poly_multiplier * sub.truncation(m) as f64 * sub.ln_y[m])
        .sum();
    ShortPolyReport {
        lhs_log,
        rhs_log: ln_x,
        holds: lhs_log < ln_x,
    }
}

pub fn check_short_polynomial(
    sub: &Subdivision,
    params: &GlobalParams,
    cfg: &ProxyConfig,
) -> ShortPolyReport {
    check_short_polynomial_log(sub, math::ln(params.x), cfg)
}

/// Smallest integer factor `s <= max_factor` for which scaling every `J_m`
/// by `s` breaks the length inequality, found by bisection. `None` if it
/// still holds at `max_factor`; `Some(1)` if it already fails.
pub fn short_polynomial_break_factor(
    sub: &Subdivision,
    ln_x: f64,
    cfg: &ProxyConfig,
    max_factor: u64,
) -> Option<u64> {
    let fails = |s: u64| !check_short_polynomial_log(&sub.scaled_truncations(s), ln_x, cfg).holds;
    if !fails(max_factor) {
        return None;
    }
    let (mut lo, mut hi) = (0u64, max_factor);
    // Invariant: fails(hi), and lo == 0 or !fails(lo).
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if fails(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Some(hi.max(1))
}

/// The break factor predicted from the top block alone: the smallest `s`
/// with `s·w·J_M·ln y >= ln x`. The full sum adds the lower blocks, so the
/// bisection result is never larger than this.
pub fn single_block_break_factor(sub: &Subdivision, ln_x: f64, cfg: &ProxyConfig) -> u64 {
    let top = cfg.short_poly_multiplier * sub.truncation(sub.blocks()) as f64 * sub.ln_top();
    math::ceil(ln_x / top).max(1.0) as u64
}

/// `count` points uniform on `[0, t_max)` from ChaCha8 keyed by `seed`.
pub fn uniform_points(seed: u64, count: usize, t_max: f64) -> Vec<f64> {
    use rand_chacha::ChaCha8Rng;
    use rand_core::{RngCore, SeedableRng};
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64) * t_max)
        .collect()
}

/// `Σ_{j=0}^{J} x^j / j!` by Horner from the top.
#[inline]
pub fn truncated_exp(x: f64, j_max: u64) -> f64 {
    let mut p = 1.0;
    for j in (1..=j_max).rev() {
        p = 1.0 + x * p / j as f64;
    }
    p
}

/// `R_{m,ℓ}` as a function of `Re D`: `(Σ_{j ≤ J} (k-1)^j re_d^j / j!)²`.
pub fn truncated_block(re_d: f64, k: f64, j_max: u64) -> f64 {
    let p = truncated_exp((k - 1.0) * re_d, j_max);
    p * p
}

/// Band of `|Re D|`: 0 below `b = J / band_divisor`, otherwise the `n >= 1`
/// with `2^{n-1} b <= |Re D| < 2^n b`. A zero base width (`J = 0`) puts
/// everything in band 0.
pub fn band_index(abs_re_d: f64, j_max: u64, band_divisor: f64) -> u32 {
    let b = j_max as f64 / band_divisor;
    if !(b > 0.0) || !(abs_re_d >= b) {
        return 0;
    }
    let mut n = 1u32;
    let mut hi = 2.0 * b;
    while abs_re_d >= hi && hi.is_finite() {
        hi *= 2.0;
        n += 1;
    }
    n
}

/// Infimum of band `n`: 0 for `n = 0`, else `2^{n-1} J / band_divisor`.
pub fn band_floor(n: u32, j_max: u64, band_divisor: f64) -> f64 {
    if n == 0 {
        0.0
    } else {
        libm::ldexp(j_max as f64 / band_divisor, n as i32 - 1)
    }
}

/// One scale's band data: index, infimum `A` and majorant power `a`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Band {
    pub n: u32,
    pub a_inf: f64,
    pub power: u64,
}

impl Band {
    pub fn of(re_d: f64, j_max: u64, cfg: &ProxyConfig) -> Band {
        let n = band_index(math::abs(re_d), j_max, cfg.band_divisor);
        Band {
            n,
            a_inf: band_floor(n, j_max, cfg.band_divisor),
            power: 2 * math::ceil(cfg.power_multiplier * j_max as f64) as u64,
        }
    }
}

/// Band data for every scale at one `(t, ℓ)`.
#[derive(Debug, Clone, PartialEq)]
pub struct BandAssignment {
    pub bands: Vec<Band>,
}

impl BandAssignment {
    /// Bands from `D_{m,ℓ}` for `m = 1..=M` (one fixed `ℓ`).
    pub fn from_block_values(d: &[C64], sub: &Subdivision, cfg: &ProxyConfig) -> Self {
        BandAssignment {
            bands: d
                .iter()
                .enumerate()
                .map(|(i, z)| Band::of(z.re, sub.truncation(i + 1), cfg))
                .collect(),
        }
    }
}

/// Which branch of the majorant applies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MajorantCase {
    /// `n = 0`: `(Σ_{j ≤ J} (Re D)^j / j!)²`.
    Small,
    /// `J/band_divisor <= A <= band_divisor·J`: `e^{4A} |D/A|^a`.
    Moderate,
    /// `A > band_divisor·J`: `(2 (2(k-1)A)^J / J!)^{2/(k-1)} |D/A|^a`.
    Large,
}

impl MajorantCase {
    pub fn index(self) -> usize {
        match self {
            MajorantCase::Small => 0,
            MajorantCase::Moderate => 1,
            MajorantCase::Large => 2,
        }
    }
}

fn majorant_case(band: &Band, j_max: u64, cfg: &ProxyConfig) -> Result<MajorantCase> {
    if band.n == 0 {
        return Ok(MajorantCase::Small);
    }
    if !(band.a_inf > 0.0) {
        return Err(Error::Consistency(alloc::format!(
            "band {} has infimum {}",
            band.n,
            band.a_inf
        )));
    }
    Ok(if band.a_inf <= cfg.band_divisor * j_max as f64 {
        MajorantCase::Moderate
    } else {
        MajorantCase::Large
    })
}

/// `ln U` for the majorant of `R_{m,ℓ}^{1/(k-1)}`.
pub fn majorant_u_ln(
    d: C64,
    band: &Band,
    k: f64,
    j_max: u64,
    cfg: &ProxyConfig,
) -> Result<(f64, MajorantCase)> {
    if !(k > 1.0) {
        return Err(param_err!("majorant needs k > 1, got {k}"));
    }
    let case = majorant_case(band, j_max, cfg)?;
    let value = match case {
        MajorantCase::Small => 2.0 * math::ln(math::abs(truncated_exp(d.re, j_max))),
        MajorantCase::Moderate => {
            let a = band.a_inf;
            4.0 * a + band.power as f64 * math::ln(math::modulus(d) / a)
        }
        MajorantCase::Large => {
            let a = band.a_inf;
            let jf = j_max as f64;
            let head = math::ln(2.0) + jf * math::ln(2.0 * (k - 1.0) * a) - math::ln_factorial(j_max);
            2.0 / (k - 1.0) * head + band.power as f64 * math::ln(math::modulus(d) / a)
        }
    };
    Ok((value, case))
}

/// The majorant evaluated without logarithms. Only for exponents below
/// [`DIRECT_EXPONENT_LIMIT`].
pub fn majorant_u_direct(d: C64, band: &Band, k: f64, j_max: u64, cfg: &ProxyConfig) -> Result<f64> {
    if !(k > 1.0) {
        return Err(param_err!("majorant needs k > 1, got {k}"));
    }
    if band.power >= DIRECT_EXPONENT_LIMIT || j_max >= DIRECT_EXPONENT_LIMIT {
        return Err(param_err!(
            "direct majorant limited to exponents below {DIRECT_EXPONENT_LIMIT}"
        ));
    }
    Ok(match majorant_case(band, j_max, cfg)? {
        MajorantCase::Small => {
            let p = truncated_exp(d.re, j_max);
            p * p
        }
        MajorantCase::Moderate => {
            let a = band.a_inf;
            math::exp(4.0 * a) * math::pow(math::modulus(d) / a, band.power as f64)
        }
        MajorantCase::Large => {
            let a = band.a_inf;
            let fact: f64 = (1..=j_max).map(|i| i as f64).product();
            let head = 2.0 * math::pow(2.0 * (k - 1.0) * a, j_max as f64) / fact;
            math::pow(head, 2.0 / (k - 1.0)) * math::pow(math::modulus(d) / a, band.power as f64)
        }
    })
}

/// `exp` of [`majorant_u_ln`]; overflows to `inf` for large exponents.
pub fn majorant_u(d: C64, band: &Band, k: f64, j_max: u64, cfg: &ProxyConfig) -> Result<f64> {
    majorant_u_ln(d, band, k, j_max, cfg).map(|(v, _)| math::exp(v))
}

/// `R(t)` machinery bound to one prime table, subdivision and shift range.
#[derive(Debug, Clone)]
pub struct Proxy {
    sub: Subdivision,
    cfg: ProxyConfig,
    k: f64,
    ln_y: f64,
    ells: Vec<i64>,
    blocks: Vec<BlockBasis>,
    /// `ln p` for all primes `<= y`, block after block.
    ln_primes: Vec<f64>,
    offsets: Vec<usize>,
}

impl Proxy {
    pub fn new(table: &PrimeTable, sub: &Subdivision, k: f64, cfg: &ProxyConfig) -> Result<Self> {
        let y = sub.scale(sub.blocks());
        if !(y >= 2.0) {
            return Err(param_err!("top scale y = {y} must be at least 2"));
        }
        let ln_y = math::ln(y);
        let ells: Vec<i64> = shift_range(ln_y).collect();
        let mut blocks = Vec::with_capacity(sub.blocks());
        let mut ln_primes = Vec::new();
        let mut offsets = vec![0];
        for m in 1..=sub.blocks() {
            let b = BlockBasis::new(table, sub.scale(m - 1), sub.scale(m), &ells, y)?;
            ln_primes.extend_from_slice(b.ln_primes());
            offsets.push(ln_primes.len());
            blocks.push(b);
        }
        Ok(Proxy {
            sub: sub.clone(),
            cfg: *cfg,
            k,
            ln_y,
            ells,
            blocks,
            ln_primes,
            offsets,
        })
    }

    pub fn subdivision(&self) -> &Subdivision {
        &self.sub
    }

    pub fn config(&self) -> &ProxyConfig {
        &self.cfg
    }

    pub fn k(&self) -> f64 {
        self.k
    }

    pub fn ln_y(&self) -> f64 {
        self.ln_y
    }

    pub fn ells(&self) -> &[i64] {
        &self.ells
    }

    /// Position of `ell` in [`Self::ells`].
    pub fn ell_position(&self, ell: i64) -> Option<usize> {
        self.ells.iter().position(|&e| e == ell)
    }

    /// `ln p` for every prime `<= y`, in the order expected by
    /// [`Self::block_values_from_phases`].
    pub fn ln_primes(&self) -> &[f64] {
        &self.ln_primes
    }

    /// Number of primes `<= y`.
    pub fn prime_count(&self) -> usize {
        self.ln_primes.len()
    }

    /// `D_{m,ℓ}` indexed `[m-1][ℓ position]` from unit phases of all primes
    /// `<= y` (`p^{-it}` or `f(p)`).
    pub fn block_values_from_phases(&self, phases: &[C64]) -> Vec<Vec<C64>> {
        self.blocks
            .iter()
            .enumerate()
            .map(|(i, b)| b.eval_all(&phases[self.offsets[i]..self.offsets[i + 1]]))
            .collect()
    }

    /// `D_{m,ℓ}(t)` for every block and shift.
    pub fn block_values(&self, t: f64) -> Vec<Vec<C64>> {
        let phases: Vec<C64> = self.ln_primes.iter().map(|&l| math::cis(-t * l)).collect();
        self.block_values_from_phases(&phases)
    }

    /// `Π_m R_{m,ℓ}` for each shift.
    pub fn shift_products(&self, d: &[Vec<C64>]) -> Vec<f64> {
        (0..self.ells.len())
            .map(|i| {
                d.iter()
                    .enumerate()
                    .map(|(m, row)| truncated_block(row[i].re, self.k, self.sub.truncation(m + 1)))
                    .product()
            })
            .collect()
    }

    /// `R` from precomputed block values.
    pub fn weight_from_blocks(&self, d: &[Vec<C64>]) -> f64 {
        let mut acc = crate::sum::CompensatedSum::new();
        acc.extend(self.shift_products(d));
        acc.value()
    }

    /// `R(t)`.
    pub fn weight(&self, t: f64) -> f64 {
        self.weight_from_blocks(&self.block_values(t))
    }

    /// `Σ_m ln R_{m,ℓ} + ln U_{m,ℓ'}` at one point, bands taken from
    /// `D_{m,ℓ'}`.
    pub fn correlation_log_integrand(&self, d: &[Vec<C64>], ell_pos: usize, ell_prime_pos: usize) -> Result<f64> {
        let mut total = 0.0;
        for (m, row) in d.iter().enumerate() {
            let j = self.sub.truncation(m + 1);
            total += math::ln(truncated_block(row[ell_pos].re, self.k, j));
            let dp = row[ell_prime_pos];
            let band = Band::of(dp.re, j, &self.cfg);
            total += majorant_u_ln(dp, &band, self.k, j, &self.cfg)?.0;
        }
        Ok(total)
    }
}

/// `R(t)` for the subdivision of `params`.
pub fn proxy_r(
    t: f64,
    sub: &Subdivision,
    params: &GlobalParams,
    cfg: &ProxyConfig,
    table: &PrimeTable,
) -> Result<f64> {
    Ok(Proxy::new(table, sub, params.k, cfg)?.weight(t))
}

/// One pointwise comparison `R^{1/(k-1)} / U` against its bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MajorantCheck {
    pub ratio: f64,
    /// `1 + 2e^{-J}` in band 0, else 1.
    pub bound: f64,
    pub case: MajorantCase,
}

impl MajorantCheck {
    pub fn holds(&self) -> bool {
        self.ratio <= self.bound
    }
}

/// Compares `R_{m,ℓ}^{1/(k-1)}` with its majorant for a single `D`.
pub fn majorant_check(d: C64, k: f64, j_max: u64, cfg: &ProxyConfig) -> Result<MajorantCheck> {
    let band = Band::of(d.re, j_max, cfg);
    let (ln_u, case) = majorant_u_ln(d, &band, k, j_max, cfg)?;
    let p = truncated_exp((k - 1.0) * d.re, j_max);
    let ln_r = 2.0 * math::ln(math::abs(p)) / (k - 1.0);
    let ratio = math::exp(ln_r - ln_u);
    let bound = match case {
        MajorantCase::Small => 1.0 + 2.0 * math::exp(-(j_max as f64)),
        _ => 1.0,
    };
    Ok(MajorantCheck { ratio, bound, case })
}

/// Aggregate of many [`majorant_check`]s.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Lemma51Report {
    pub checks: u64,
    pub violations: u64,
    /// Largest `ratio / bound`.
    pub max_violation_ratio: f64,
    pub max_ratio_small: f64,
    pub max_ratio_banded: f64,
    /// Checks per [`MajorantCase`] (small, moderate, large).
    pub cases_hit: [u64; 3],
    /// `(t, m, ℓ)` of the largest `ratio / bound`.
    pub worst: Option<(f64, usize, i64)>,
}

impl Default for Lemma51Report {
    fn default() -> Self {
        Lemma51Report {
            checks: 0,
            violations: 0,
            max_violation_ratio: 0.0,
            max_ratio_small: 0.0,
            max_ratio_banded: 0.0,
            cases_hit: [0; 3],
            worst: None,
        }
    }
}

impl Lemma51Report {
    fn record(&mut self, c: &MajorantCheck, at: (f64, usize, i64)) {
        self.checks += 1;
        if !c.holds() {
            self.violations += 1;
        }
        self.cases_hit[c.case.index()] += 1;
        match c.case {
            MajorantCase::Small => self.max_ratio_small = self.max_ratio_small.max(c.ratio),
            _ => self.max_ratio_banded = self.max_ratio_banded.max(c.ratio),
        }
        let rel = c.ratio / c.bound;
        if self.worst.is_none() || rel > self.max_violation_ratio {
            self.max_violation_ratio = rel;
            self.worst = Some(at);
        }
    }

    fn merge(self, o: Lemma51Report) -> Lemma51Report {
        let (max_violation_ratio, worst) = match (self.worst, o.worst) {
            (None, _) => (o.max_violation_ratio, o.worst),
            (_, None) => (self.max_violation_ratio, self.worst),
            _ if o.max_violation_ratio > self.max_violation_ratio => (o.max_violation_ratio, o.worst),
            _ => (self.max_violation_ratio, self.worst),
        };
        Lemma51Report {
            checks: self.checks + o.checks,
            violations: self.violations + o.violations,
            max_violation_ratio,
            max_ratio_small: self.max_ratio_small.max(o.max_ratio_small),
            max_ratio_banded: self.max_ratio_banded.max(o.max_ratio_banded),
            cases_hit: [
                self.cases_hit[0] + o.cases_hit[0],
                self.cases_hit[1] + o.cases_hit[1],
                self.cases_hit[2] + o.cases_hit[2],
            ],
            worst,
        }
    }

    pub fn all_hold(&self) -> bool {
        self.violations == 0
    }
}

const T_CHUNK: usize = 256;

/// Checks `R_{m,ℓ}(t)^{1/(k-1)} <= (1 + slack) U_{m,ℓ}(t)` at every sample
/// point, scale and shift; slack is `2e^{-J_m}` in band 0 and zero in the
/// banded cases.
pub fn check_lemma51<E: Executor>(t_samples: &[f64], proxy: &Proxy, exec: &E) -> Result<Lemma51Report> {
    let n_chunks = t_samples.len().div_ceil(T_CHUNK);
    let parts = exec.map_indexed(n_chunks, |c| -> Result<Lemma51Report> {
        let mut rep = Lemma51Report::default();
        for &t in &t_samples[c * T_CHUNK..((c + 1) * T_CHUNK).min(t_samples.len())] {
            let d = proxy.block_values(t);
            for (m, row) in d.iter().enumerate() {
                let j = proxy.sub.truncation(m + 1);
                for (i, &z) in row.iter().enumerate() {
                    let chk = majorant_check(z, proxy.k, j, &proxy.cfg)?;
                    rep.record(&chk, (t, m + 1, proxy.ells[i]));
                }
            }
        }
        Ok(rep)
    });
    let parts: Vec<Lemma51Report> = parts.into_iter().collect::<Result<_>>()?;
    Ok(pairwise_reduce(parts, Lemma51Report::merge).unwrap_or_default())
}
