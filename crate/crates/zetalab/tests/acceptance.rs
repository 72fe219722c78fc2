//! Acceptance criteria, one PASS/FAIL line each. Run with
//! `cargo test -p zetalab --test acceptance`.

use std::process::Command;
use std::time::{Duration, Instant};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use zetalab::Pool;
use zetalab_core::dirichlet::{self, EvalConfig};
use zetalab_core::math::modulus;
use zetalab_core::primes::sieve;
use zetalab_core::{moments, proxy, steinhaus, GlobalParams, GridSpec, ProxyConfig, Serial};

type Outcome = Result<String, String>;

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn err<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

fn c1_moments_vs_tuple_oracle() -> Outcome {
    let pool = Pool::new(0).map_err(err)?;
    let eval = EvalConfig::default();
    let start = Instant::now();
    let mut worst = 0.0f64;
    let mut failures = Vec::new();
    for x in [2u64, 8, 20] {
        for k in [1u32, 2] {
            for t in [1e5, 1e6] {
                let params = GlobalParams::new(x as f64, t, k as f64, 1.0).map_err(err)?;
                let two_k = 2.0 * k as f64;
                let grid = moments::default_grid(&params, two_k).map_err(err)?;
                let est = moments::integrate_moment(&params, two_k, &grid, &eval, &pool).map_err(err)?;
                let oracle = moments::tuple_integral_oracle(x, k, t).map_err(err)?;
                let rel = (est.value - oracle).abs() / oracle.abs();
                let tol = 1e-3f64.max(3.0 * est.error_indicator / oracle.abs());
                worst = worst.max(rel / tol);
                if rel > tol {
                    failures.push(format!("x={x} k={k} T={t:e} rel={rel:.2e} tol={tol:.2e}"));
                }
            }
        }
    }
    let elapsed = start.elapsed();
    let in_time = elapsed <= Duration::from_secs(120);
    check(
        failures.is_empty() && in_time,
        format!("12 cases, worst rel/tol {worst:.3e}, {:.1}s (limit 120s) {failures:?}", elapsed.as_secs_f64()),
    )
}

fn c2_rmf_vs_energy() -> Outcome {
    let pool = Pool::new(0).map_err(err)?;
    let table = sieve(31).map_err(err)?;
    let mut worst = 0.0f64;
    let mut failures = Vec::new();
    for x in [2u64, 10, 30] {
        for k in [1u32, 2] {
            let est = steinhaus::mc_moment(&table, x, k as f64, 100_000, 0, &pool).map_err(err)?;
            let energy = steinhaus::multiplicative_energy(x, k).map_err(err)?.count as f64;
            let z = (est.value - energy).abs() / est.error_indicator;
            worst = worst.max(z);
            if z > 3.0 {
                failures.push(format!("x={x} k={k} z={z:.2}"));
            }
        }
    }
    check(failures.is_empty(), format!("6 cases, max |z| {worst:.2} (limit 3) {failures:?}"))
}

fn c3_pointwise_majorant() -> Outcome {
    let pool = Pool::new(0).map_err(err)?;
    let cfg = ProxyConfig::desk(1.0, 3.0, 5, Some(3));
    let y = 1e4f64;
    let sub = proxy::build_subdivision_log(y.ln(), Some(y), 3.0, &cfg).map_err(err)?;
    if sub.truncations() != [7, 6, 5] {
        return Err(format!("truncation schedule {:?}, expected [7, 6, 5]", sub.truncations()));
    }
    let table = sieve(10_001).map_err(err)?;
    let p = proxy::Proxy::new(&table, &sub, 3.0, &cfg).map_err(err)?;
    let ts = proxy::uniform_points(0, 10_000, 1e6);
    let rep = proxy::check_lemma51(&ts, &p, &pool).map_err(err)?;
    check(
        rep.violations == 0,
        format!(
            "{} checks, {} violations, max ratio/bound {:.4}, cases {:?}",
            rep.checks, rep.violations, rep.max_violation_ratio, rep.cases_hit
        ),
    )
}

fn c4_holder_lower_bound() -> Outcome {
    let pool = Pool::new(0).map_err(err)?;
    let eval = EvalConfig::default();
    let configs: [(f64, f64, f64, u64); 6] = [
        (10.0, 1e3, 2.5, 2),
        (20.0, 1e3, 2.5, 3),
        (10.0, 2e3, 3.0, 2),
        (30.0, 1e3, 3.0, 3),
        (20.0, 2e3, 4.0, 2),
        (30.0, 1e3, 4.0, 2),
    ];
    let mut failures = Vec::new();
    let mut min_gap = f64::INFINITY;
    for (x, t, k, jm) in configs {
        let params = GlobalParams::new(x, t, k, 1.0).map_err(err)?;
        params.check_proxy_preconditions().map_err(err)?;
        let cfg = ProxyConfig::desk(1.0, k, jm, None);
        let sub = proxy::build_subdivision(&params, &cfg).map_err(err)?;
        let table = sieve(params.y().max(x) as u64 + 1).map_err(err)?;
        let p = proxy::Proxy::new(&table, &sub, k, &cfg).map_err(err)?;
        let grid = moments::proxy_grid(&params, &p).map_err(err)?;
        let rep = moments::lower_bound(&params, &p, &grid, &eval, &pool).map_err(err)?;
        min_gap = min_gap.min(rep.m_2k.value - rep.lb);
        if !(rep.holder.holds && rep.lb <= rep.m_2k.value) {
            failures.push(format!("x={x} T={t} k={k} jm={jm} LB={:e} M={:e}", rep.lb, rep.m_2k.value));
        }
    }
    check(
        failures.is_empty(),
        format!("6 configs, k in {{2.5,3,4}}, min M_2k - LB {min_gap:.3e} {failures:?}"),
    )
}

/// `Σ_{max(u,v) > J, u,v <= 60} a^{u+v}/(u! v!)` over a common denominator,
/// with `a` taken exactly from its binary value.
fn exact_tail(a: f64, j: u32) -> f64 {
    const U: usize = 60;
    let a = BigRational::from_float(a).expect("finite");
    let (num, den) = (a.numer().clone(), a.denom().clone());
    let mut fact = vec![BigInt::one(); U + 1];
    for i in 1..=U {
        fact[i] = &fact[i - 1] * BigInt::from(i);
    }
    let mut num_pow = vec![BigInt::one(); U + 1];
    let mut den_pow = vec![BigInt::one(); U + 1];
    for i in 1..=U {
        num_pow[i] = &num_pow[i - 1] * &num;
        den_pow[i] = &den_pow[i - 1] * &den;
    }
    // term_u · L = num^u · den^(U-u) · U!/u! with L = den^U · U!.
    let scaled: Vec<BigInt> = (0..=U)
        .map(|u| &num_pow[u] * &den_pow[U - u] * (&fact[U] / &fact[u]))
        .collect();
    let mut total = BigInt::zero();
    for u in 0..=U {
        for v in 0..=U {
            if u.max(v) as u32 > j {
                total += &scaled[u] * &scaled[v];
            }
        }
    }
    let l = &den_pow[U] * &fact[U];
    BigRational::new(total, &l * &l).to_f64().expect("representable")
}

fn c5_tail_lattice() -> Outcome {
    let mut worst = 0.0f64;
    let mut failures = Vec::new();
    let mut n = 0;
    for re_d in [-2.0, -0.7, 0.0, 0.3, 2.0] {
        for k in [1.5, 2.0, 3.0, 4.0] {
            for j in [0u32, 1, 4, 8, 12] {
                n += 1;
                let got = steinhaus::tail_error(re_d, k, j);
                let want = exact_tail((k - 1.0) * re_d, j);
                let bound = steinhaus::tail_bound(re_d, k, j);
                let diff = (got - want).abs();
                worst = worst.max(diff);
                if diff > 1e-12 || want.abs() > bound || got.abs() > bound {
                    failures.push(format!("reD={re_d} k={k} J={j} got={got:e} exact={want:e} bound={bound:e}"));
                }
            }
        }
    }
    check(
        failures.is_empty(),
        format!("{n} lattice points, max abs error {worst:.2e} (limit 1e-12), all within bound {failures:?}"),
    )
}

fn c6_lemma1_routes() -> Outcome {
    let pool = Pool::new(0).map_err(err)?;
    let table = sieve(101).map_err(err)?;
    let quad = steinhaus::lemma1_lhs_quadrature(&table, 100.0, 2.0, 256).map_err(err)?;
    let quad2 = steinhaus::lemma1_lhs_quadrature(&table, 100.0, 2.0, 512).map_err(err)?;
    let mc = steinhaus::lemma1_lhs_monte_carlo(&table, 100.0, 2.0, 100_000, 0, &pool).map_err(err)?;
    let z = (quad - mc.value).abs() / mc.error_indicator;
    let change = (quad2 - quad).abs() / quad.abs();
    let k1 = steinhaus::lemma1_lhs_quadrature(&table, 100.0, 1.0, 256).map_err(err)?;
    let count = dirichlet::shift_count(100f64.ln()) as f64;
    check(
        z <= 3.0 && change < 1e-10 && k1 == count,
        format!(
            "quadrature {quad:.10e}, MC {:.6e} ± {:.2e} (|z| {z:.2}), node doubling {change:.1e}, k=1 gives {k1} (shift count {count})",
            mc.value, mc.error_indicator
        ),
    )
}

fn c7_length_inequality() -> Outcome {
    let mut failures = Vec::new();
    let mut cases = 0;
    for k in [2.5, 3.0, 5.0] {
        for e in 6..=12 {
            let c0 = 10f64.powi(e);
            let cfg = ProxyConfig::paper(c0, k);
            for ln_y in [1e2, 1e4] {
                cases += 1;
                let ln_x = c0 * ln_y;
                let sub = proxy::build_subdivision_log(ln_y, None, k, &cfg).map_err(err)?;
                let rep = proxy::check_short_polynomial_log(&sub, ln_x, &cfg);
                let inflated = proxy::check_short_polynomial_log(&sub.scaled_truncations(20), ln_x, &cfg);
                let found = proxy::short_polynomial_break_factor(&sub, ln_x, &cfg, 20);
                let predicted = proxy::single_block_break_factor(&sub, ln_x, &cfg);
                let agree = found.is_some_and(|f| f.abs_diff(predicted) <= 1);
                if !(rep.holds && !inflated.holds && agree) {
                    failures.push(format!(
                        "k={k} C0=1e{e} ln_y={ln_y} holds={} inflated={} found={found:?} predicted={predicted}",
                        rep.holds, inflated.holds
                    ));
                }
            }
        }
    }
    check(
        failures.is_empty(),
        format!("{cases} cases hold at paper constants and break within 20x at the predicted factor ±1 {failures:?}"),
    )
}

fn c8_shift_sum() -> Outcome {
    let limit = moments::shift_sum_limit(2.0);
    let pi = std::f64::consts::PI;
    let closed = pi / pi.tanh();
    let mut failures = Vec::new();
    let mut ratios = Vec::new();
    for half in [1u64, 10, 100, 1000] {
        let rep = moments::shift_sum_check_log(2.0 * half as f64 + 0.5, 2.0).map_err(err)?;
        ratios.push(format!("{:.6}", rep.bound_ratio));
        if rep.half_range != half || !(rep.bound_ratio <= 3.1533 && rep.bound_ratio <= rep.limit) {
            failures.push(format!("half={half} ratio={}", rep.bound_ratio));
        }
    }
    let limit_ok = (limit - closed).abs() < 1e-5;
    check(
        failures.is_empty() && limit_ok,
        format!("ratios {ratios:?} <= 3.1533, limit {limit:.8} vs pi coth pi {closed:.8} {failures:?}"),
    )
}

fn c9_grid_vs_direct() -> Outcome {
    let x = 1e5;
    let grid = GridSpec::new(1e4, 0.37, 4096).map_err(err)?;
    let eval = EvalConfig::default();
    let start = Instant::now();
    let fast = dirichlet::zeta_sum_grid(x, &grid, &eval, &Serial).map_err(err)?;
    let t_grid = start.elapsed();
    let start = Instant::now();
    let direct: Vec<_> = (0..grid.count)
        .map(|j| dirichlet::zeta_sum_direct(x, grid.point(j)))
        .collect::<Result<_, _>>()
        .map_err(err)?;
    let t_direct = start.elapsed();
    let scale = direct.iter().map(|z| modulus(*z)).fold(0.0, f64::max);
    let max_err = fast.iter().zip(&direct).map(|(a, b)| modulus(a - b)).fold(0.0, f64::max) / scale;
    let speedup = t_direct.as_secs_f64() / t_grid.as_secs_f64();
    let one = dirichlet::zeta_sum_grid(x, &grid, &eval, &Pool::new(1).map_err(err)?).map_err(err)?;
    let four = dirichlet::zeta_sum_grid(x, &grid, &eval, &Pool::new(4).map_err(err)?).map_err(err)?;
    let identical = one.iter().zip(&four).all(|(a, b)| a.re.to_bits() == b.re.to_bits() && a.im.to_bits() == b.im.to_bits());
    check(
        max_err <= 1e-8 && speedup >= 3.0 && identical,
        format!("max rel error {max_err:.2e}, speedup {speedup:.1}x (need 3x), 1 vs 4 workers bit-identical: {identical}"),
    )
}

fn cli(args: &[&str]) -> Result<String, String> {
    let o = Command::new(env!("CARGO_BIN_EXE_zetalab")).args(args).output().map_err(err)?;
    if o.status.code() != Some(0) {
        return Err(format!("{args:?} exited {:?}: {}", o.status.code(), String::from_utf8_lossy(&o.stderr)));
    }
    String::from_utf8(o.stdout).map_err(err)
}

fn has_column(csv: &str, name: &str) -> bool {
    csv.lines()
        .find(|l| !l.starts_with('#'))
        .is_some_and(|h| h.split(',').any(|c| c == name))
}

fn c10_probe_reports() -> Outcome {
    let sweep = cli(&["exponent-sweep", "--x", "50", "--k", "1.5", "--t-values", "200,600,1500"])?;
    let lb = cli(&["lower-bound", "--x", "10", "--T", "500", "--k", "3", "--desk-jm", "2"])?;
    let corr = cli(&["correlation", "--x", "30", "--T", "1000", "--k", "2.5", "--ell-prime", "0,1"])?;
    let non_binding = |s: &str| s.lines().any(|l| l.starts_with("# note:") && l.contains("non-binding"));
    let checks = [
        ("sweep fitted_slope", has_column(&sweep, "fitted_slope")),
        ("sweep warning", sweep.lines().any(|l| l.starts_with("# warning:"))),
        ("lower-bound I_p_ratio_to_shape", has_column(&lb, "I_p_ratio_to_shape")),
        ("lower-bound note", non_binding(&lb)),
        ("correlation ratio_to_shape", has_column(&corr, "ratio_to_shape")),
        ("correlation note", non_binding(&corr)),
    ];
    let missing: Vec<_> = checks.iter().filter(|c| !c.1).map(|c| c.0).collect();
    check(missing.is_empty(), format!("probe columns and non-binding labels present, missing {missing:?}"))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("moment quadrature vs tuple oracle", c1_moments_vs_tuple_oracle),
        ("Steinhaus moments vs multiplicative energy", c2_rmf_vs_energy),
        ("pointwise majorant sweep", c3_pointwise_majorant),
        ("Hölder lower bound matrix", c4_holder_lower_bound),
        ("exponential tail lattice", c5_tail_lattice),
        ("factorized expectation routes", c6_lemma1_routes),
        ("short polynomial length inequality", c7_length_inequality),
        ("shift double sum", c8_shift_sum),
        ("grid evaluation vs direct", c9_grid_vs_direct),
        ("probe reporting", c10_probe_reports),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = run();
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(d) => println!("criterion {:2} PASS {name} [{secs:.1}s]: {d}", i + 1),
            Err(d) => {
                failed += 1;
                println!("criterion {:2} FAIL {name} [{secs:.1}s]: {d}", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
