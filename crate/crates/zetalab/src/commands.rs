//! One function per subcommand. Each reads its settings, runs the core
//! computation and fills a [`Report`].

use zetalab_core::dirichlet::{shift_count, EvalConfig};
use zetalab_core::moments::{self, default_step, proxy_step};
use zetalab_core::primes::sieve;
use zetalab_core::proxy::{self, Proxy};
use zetalab_core::steinhaus;
use zetalab_core::{GlobalParams, GridSpec, PrimeTable, ProxyConfig, Subdivision};

use crate::config::Settings;
use crate::output::{Cell, Report};
use crate::{CliError, Command, Pool};

/// Largest `y` for which `proxy-check` sieves and runs the majorant sweep.
pub const SWEEP_Y_LIMIT: f64 = 1e8;

pub const PROBE_NOTE: &str = "non-binding probe: ratio to the asymptotic shape, implied constant unknown";

type Out = Result<Report, CliError>;

pub fn dispatch(cmd: Command, s: &Settings) -> Out {
    let threads: usize = s.get("threads", 0)?;
    let pool = Pool::new(threads).map_err(|e| CliError::Io(format!("thread pool: {e}")))?;
    let mut report = match cmd {
        Command::Moment => moment(s, &pool),
        Command::Oracle => oracle(s),
        Command::Energy => energy(s),
        Command::Rmf => rmf(s, &pool),
        Command::Lemma1 => lemma1(s, &pool),
        Command::ProxyCheck => proxy_check(s, &pool),
        Command::LowerBound => lower_bound(s, &pool),
        Command::Correlation => correlation(s, &pool),
        Command::ShiftSum => shift_sum(s),
        Command::ExponentSweep => exponent_sweep(s, &pool),
    }?;
    let mut config = vec![("command".to_string(), cmd.name().to_string())];
    config.extend(s.resolved());
    report.config = config;
    Ok(report)
}

fn grid(s: &Settings, t_max: f64, step: f64) -> Result<GridSpec, CliError> {
    let g = if let Some(dt) = s.opt::<f64>("dt")? {
        GridSpec::midpoint_with_step(t_max, dt)?
    } else if let Some(n) = s.opt::<usize>("points")? {
        GridSpec::midpoint(t_max, n)?
    } else {
        GridSpec::midpoint_with_step(t_max, step)?
    };
    Ok(g)
}

fn estimate_cells(e: &moments::MomentEstimate) -> Vec<Cell> {
    vec![
        e.value.into(),
        e.error_indicator.into(),
        e.dt.into(),
        e.points.into(),
        e.method.as_str().into(),
    ]
}

fn moment(s: &Settings, pool: &Pool) -> Out {
    let x: f64 = s.require("x")?;
    let t: f64 = s.require("T")?;
    let two_k: f64 = s.get("two-k", 2.0)?;
    let params = GlobalParams::new(x, t, (two_k / 2.0).max(f64::MIN_POSITIVE), 1.0)?;
    let g = grid(s, t, default_step(x, two_k))?;
    let e = moments::integrate_moment(&params, two_k, &g, &EvalConfig::default(), pool)?;
    let mut r = Report::new(&["x", "T", "two_k", "value", "error_indicator", "dt", "points", "method"]);
    let mut row: Vec<Cell> = vec![x.into(), t.into(), two_k.into()];
    row.extend(estimate_cells(&e));
    r.row(row);
    Ok(r)
}

fn oracle(s: &Settings) -> Out {
    let x: u64 = s.require("x")?;
    let k: u32 = s.require("k")?;
    let t: f64 = s.require("T")?;
    let value = moments::tuple_integral_oracle(x, k, t)?;
    let energy = steinhaus::multiplicative_energy(x, k)?.count;
    let c = moments::oracle_offdiag_constant(x, k)?;
    let mut r = Report::new(&["x", "k", "T", "value", "energy", "offdiag_constant", "energy_gap_bound"]);
    r.row(vec![x.into(), (k as u64).into(), t.into(), value.into(), energy.into(), c.into(), (c / t).into()]);
    Ok(r)
}

fn energy(s: &Settings) -> Out {
    let x: u64 = s.require("x")?;
    let k: u32 = s.require("k")?;
    let e = steinhaus::multiplicative_energy(x, k)?;
    let mut r = Report::new(&["x", "k", "energy"]);
    r.row(vec![x.into(), (k as u64).into(), e.count.into()]);
    Ok(r)
}

fn table_for(limit: f64) -> Result<PrimeTable, CliError> {
    Ok(sieve(limit.max(2.0).floor() as u64 + 1)?)
}

fn rmf(s: &Settings, pool: &Pool) -> Out {
    let x: u64 = s.require("x")?;
    let k: f64 = s.require("k")?;
    let samples: usize = s.get("samples", 100_000)?;
    let seed: u64 = s.get("seed", 0)?;
    let table = table_for(x as f64)?;
    let e = steinhaus::mc_moment(&table, x, k, samples, seed, pool)?;
    let energy = if k.fract() == 0.0 && k >= 1.0 && k <= 16.0 {
        steinhaus::multiplicative_energy(x, k as u32).ok().map(|c| c.count)
    } else {
        None
    };
    let z = energy.map(|c| (e.value - c as f64) / e.error_indicator);
    let mut r = Report::new(&["x", "k", "samples", "value", "std_error", "energy", "z_score"]);
    r.row(vec![
        x.into(),
        k.into(),
        e.points.into(),
        e.value.into(),
        e.error_indicator.into(),
        energy.into(),
        z.into(),
    ]);
    Ok(r)
}

fn lemma1(s: &Settings, pool: &Pool) -> Out {
    let y: f64 = s.require("y")?;
    let k: f64 = s.require("k")?;
    let nodes: usize = s.get("nodes", 256)?;
    let samples: usize = s.get("samples", 0)?;
    let x: f64 = s.get("x", y)?;
    let table = table_for(y)?;
    let v = steinhaus::lemma1_lhs_quadrature(&table, y, k, nodes)?;
    let v2 = steinhaus::lemma1_lhs_quadrature(&table, y, k, 2 * nodes)?;
    let ln_y = y.ln();
    let mc = if samples > 0 {
        let seed: u64 = s.get("seed", 0)?;
        Some(steinhaus::lemma1_lhs_monte_carlo(&table, y, k, samples, seed, pool)?)
    } else {
        None
    };
    let mut r = Report::new(&[
        "y",
        "k",
        "nodes",
        "value",
        "value_double_nodes",
        "rel_change",
        "shift_count",
        "probe_ratio",
        "mc_value",
        "mc_std_error",
    ]);
    r.row(vec![
        y.into(),
        k.into(),
        nodes.into(),
        v.into(),
        v2.into(),
        ((v2 - v).abs() / v.abs()).into(),
        shift_count(ln_y).into(),
        steinhaus::lemma1_probe_ratio(v, x, ln_y, k).into(),
        mc.map(|e| e.value).into(),
        mc.map(|e| e.error_indicator).into(),
    ]);
    r.note(format!("probe_ratio: {PROBE_NOTE}"));
    Ok(r)
}

/// Paper constants unless `desk-jm` is given.
fn proxy_config(s: &Settings, k: f64, c0: f64, default_jm: Option<u64>) -> Result<ProxyConfig, CliError> {
    let jm: Option<u64> = match default_jm {
        Some(d) => Some(s.get("desk-jm", d)?),
        None => s.opt("desk-jm")?,
    };
    let mut cfg = match jm {
        Some(jm) => ProxyConfig::desk(c0, k, jm, s.opt::<usize>("desk-m")?),
        None => ProxyConfig::paper(c0, k),
    };
    cfg.step_ratio = s.get("step-ratio", cfg.step_ratio)?;
    cfg.validate()?;
    Ok(cfg)
}

fn joined<T: ToString>(v: &[T]) -> String {
    v.iter().map(ToString::to_string).collect::<Vec<_>>().join(";")
}

fn proxy_check(s: &Settings, pool: &Pool) -> Out {
    let k: f64 = s.require("k")?;
    let c0: f64 = s.get("c0", 1.0)?;
    let cfg = proxy_config(s, k, c0, None)?;
    let (ln_x, sub) = if s.is_set("ln-x") {
        let ln_x: f64 = s.require("ln-x")?;
        (ln_x, proxy::build_subdivision_log(ln_x / c0, None, k, &cfg)?)
    } else {
        let x: f64 = s.require("x")?;
        let params = GlobalParams::new(x, 1.0, k, c0)?;
        (x.ln(), proxy::build_subdivision(&params, &cfg)?)
    };
    let short = proxy::check_short_polynomial_log(&sub, ln_x, &cfg);
    let max_factor: u64 = s.get("max-factor", 20)?;
    let found = proxy::short_polynomial_break_factor(&sub, ln_x, &cfg, max_factor);
    let predicted = proxy::single_block_break_factor(&sub, ln_x, &cfg);

    let t_samples: usize = s.get("t-samples", 10_000)?;
    let y = sub.scale(sub.blocks());
    let mut r = Report::new(&[
        "M",
        "ln_y",
        "ln_scales",
        "J",
        "window_ok",
        "jm_assumption_ok",
        "short_poly_lhs_log",
        "short_poly_rhs_log",
        "short_poly_holds",
        "break_factor",
        "predicted_break_factor",
        "lemma51_checks",
        "lemma51_violations",
        "max_ratio_band0",
        "max_ratio_banded",
        "max_violation_ratio",
        "case_small",
        "case_moderate",
        "case_large",
    ]);
    let sweep = if t_samples > 0 && y.is_finite() && y >= 2.0 && y <= SWEEP_Y_LIMIT {
        let t_max: f64 = s.get("T", 1e6)?;
        let seed: u64 = s.get("seed", 0)?;
        let table = table_for(y)?;
        let p = Proxy::new(&table, &sub, k, &cfg)?;
        let ts = proxy::uniform_points(seed, t_samples, t_max);
        Some(proxy::check_lemma51(&ts, &p, pool)?)
    } else {
        if t_samples > 0 {
            r.note(format!("majorant sweep skipped: y = {y} outside [2, {SWEEP_Y_LIMIT}]"));
        }
        None
    };
    if let Some(rep) = &sweep {
        r.violation = !rep.all_hold();
        if let Some((t, m, ell)) = rep.worst {
            r.note(format!("largest ratio/bound at t={t} m={m} ell={ell}"));
        }
    }
    r.row(vec![
        (sub.blocks() as u64).into(),
        sub.ln_top().into(),
        joined(sub.ln_scales()).into(),
        joined(sub.truncations()).into(),
        sub.window_ok.into(),
        sub.jm_assumption_ok.into(),
        short.lhs_log.into(),
        short.rhs_log.into(),
        short.holds.into(),
        found.into(),
        predicted.into(),
        sweep.map(|r| r.checks).into(),
        sweep.map(|r| r.violations).into(),
        sweep.map(|r| r.max_ratio_small).into(),
        sweep.map(|r| r.max_ratio_banded).into(),
        sweep.map(|r| r.max_violation_ratio).into(),
        sweep.map(|r| r.cases_hit[0]).into(),
        sweep.map(|r| r.cases_hit[1]).into(),
        sweep.map(|r| r.cases_hit[2]).into(),
    ]);
    Ok(r)
}

struct ProxySetup {
    params: GlobalParams,
    table: PrimeTable,
    proxy: Proxy,
}

fn proxy_setup(s: &Settings) -> Result<ProxySetup, CliError> {
    let x: f64 = s.require("x")?;
    let t: f64 = s.require("T")?;
    let k: f64 = s.require("k")?;
    let c0: f64 = s.get("c0", 1.0)?;
    let params = GlobalParams::new(x, t, k, c0)?;
    params.check_proxy_preconditions()?;
    let cfg = proxy_config(s, k, c0, Some(2))?;
    let sub: Subdivision = proxy::build_subdivision(&params, &cfg)?;
    let table = table_for(params.y().max(x))?;
    let proxy = Proxy::new(&table, &sub, k, &cfg)?;
    Ok(ProxySetup { params, table, proxy })
}

fn lower_bound(s: &Settings, pool: &Pool) -> Out {
    let ps = proxy_setup(s)?;
    let g = grid(s, ps.params.t_max, proxy_step(&ps.params, &ps.proxy))?;
    let eval = EvalConfig::default();
    let rep = moments::lower_bound(&ps.params, &ps.proxy, &g, &eval, pool)?;
    let samples: usize = s.get("samples", 0)?;
    let cmp = if samples > 0 {
        let seed: u64 = s.get("seed", 0)?;
        Some(moments::expectation_comparison(
            &ps.params, &ps.table, &ps.proxy, &g, samples, seed, &eval, pool,
        )?)
    } else {
        None
    };
    let mut r = Report::new(&[
        "I_w",
        "I_p",
        "LB",
        "M_2k",
        "holder_ok",
        "holder_slack",
        "lb_over_moment",
        "I_p_ratio_to_shape",
        "error_indicator_I_w",
        "error_indicator_I_p",
        "error_indicator_M_2k",
        "dt",
        "points",
        "rmf_expectation",
        "rmf_std_error",
        "discrepancy",
    ]);
    r.row(vec![
        rep.i_w.value.into(),
        rep.i_p.value.into(),
        rep.lb.into(),
        rep.m_2k.value.into(),
        rep.holder_ok().into(),
        rep.holder.slack.into(),
        (rep.lb / rep.m_2k.value).into(),
        rep.proxy_power_probe.into(),
        rep.i_w.error_indicator.into(),
        rep.i_p.error_indicator.into(),
        rep.m_2k.error_indicator.into(),
        g.dt.into(),
        g.count.into(),
        cmp.map(|c| c.rmf_expectation.value).into(),
        cmp.map(|c| c.rmf_expectation.error_indicator).into(),
        cmp.map(|c| c.discrepancy).into(),
    ]);
    r.note(format!("I_p_ratio_to_shape = I_p / (ln y)^(k^2+1); {PROBE_NOTE}"));
    if cmp.is_some() {
        r.note("discrepancy = I_w − E|Σf|²R(f); reported, no tolerance");
    }
    r.violation = !rep.holder_ok();
    Ok(r)
}

fn correlation(s: &Settings, pool: &Pool) -> Out {
    let ps = proxy_setup(s)?;
    let ells = ps.proxy.ells();
    let (lo, hi) = (ells[0], ells[ells.len() - 1]);
    let ell: i64 = s.get("ell", 0)?;
    let primes: Vec<i64> = match s.list::<i64>("ell-prime")? {
        Some(v) => v,
        None => {
            let v: Vec<i64> = [ell, ell + 2, ell + 8]
                .into_iter()
                .filter(|e| (lo..=hi).contains(e))
                .collect();
            s.record_list("ell-prime", &v);
            v
        }
    };
    let g = grid(s, ps.params.t_max, proxy_step(&ps.params, &ps.proxy))?;
    let mut r = Report::new(&[
        "ell",
        "ell_prime",
        "ln_estimate",
        "estimate",
        "ln_shape",
        "ratio_to_shape",
        "ln_ratio_to_shape",
        "dt",
        "points",
    ]);
    for ep in primes {
        let c = moments::correlation_probe(&ps.params, &ps.proxy, ell, ep, &g, &EvalConfig::default(), pool)?;
        r.row(vec![
            ell.into(),
            ep.into(),
            c.ln_estimate.into(),
            c.estimate.into(),
            c.ln_shape.into(),
            c.ratio.into(),
            (c.ln_estimate - c.ln_shape).into(),
            g.dt.into(),
            g.count.into(),
        ]);
    }
    r.note(format!("ratio_to_shape: {PROBE_NOTE}"));
    Ok(r)
}

fn shift_sum(s: &Settings) -> Out {
    let k: f64 = s.require("k")?;
    let ln_y = if s.is_set("ln-y") {
        s.require::<f64>("ln-y")?
    } else {
        let y: f64 = s.require("y")?;
        if !(y > 0.0) {
            return Err(CliError::Usage(format!("invalid value `{y}` for `y`: must be positive")));
        }
        y.ln()
    };
    let rep = moments::shift_sum_check_log(ln_y, k)?;
    let mut r = Report::new(&["half_range", "sum", "bound_ratio", "limit", "holds"]);
    r.row(vec![
        rep.half_range.into(),
        rep.sum.into(),
        rep.bound_ratio.into(),
        rep.limit.into(),
        rep.holds.into(),
    ]);
    r.violation = !rep.holds;
    Ok(r)
}

fn exponent_sweep(s: &Settings, pool: &Pool) -> Out {
    let x: f64 = s.require("x")?;
    let k: f64 = s.require("k")?;
    let ts: Vec<f64> = s
        .list("t-values")?
        .ok_or_else(|| CliError::Usage("missing required setting `t-values`".into()))?;
    let sw = moments::exponent_sweep(x, k, &ts, &EvalConfig::default(), pool)?;
    let mut r = Report::new(&[
        "T",
        "L",
        "ln_ln_L",
        "moment",
        "error_indicator",
        "dt",
        "points",
        "fitted_slope",
        "predicted_slope",
    ]);
    for row in &sw.rows {
        r.row(vec![
            row.t_max.into(),
            row.big_l.into(),
            row.ln_ln_l.into(),
            row.moment.value.into(),
            row.moment.error_indicator.into(),
            row.moment.dt.into(),
            row.moment.points.into(),
            sw.slope.into(),
            sw.predicted_slope.into(),
        ]);
    }
    r.note(format!(
        "fitted slope of ln M_2k against ln ln L: {} (intercept {})",
        sw.slope, sw.intercept
    ));
    r.warn(sw.warning);
    Ok(r)
}
