use fracdual::duality::{
    battery_residuals, observed_order, solve_duality, young_check, Battery, DualitySchedule, ScheduleLevel,
    YOUNG_TOLERANCE,
};
use fracdual::norms::{default_schedule, embedding_check_on, regularity_sweep, BallMesh};
use fracdual::potential::{check_decay, check_linfty_bound, PotentialField, Source};
use fracdual::{Ball, Error, ExponentSpec, Field, GridFunction, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::{Experiment, Resolved};

/// Tolerances of the embedded assertions.
pub mod tol {
    pub const ORDER_MIN: f64 = 0.8;
    pub const RESIDUAL_MAX: f64 = 1e-2;
    pub const SOBOLEV_SPREAD_MAX: f64 = 0.25;
    pub const LIMIT_ERROR_MAX: f64 = 2e-2;
    /// Inner radius of the annulus on which the limit is compared.
    pub const LIMIT_INNER_RADIUS: f64 = 0.2;
    pub const HALVING_MAX: f64 = 1e-2;
    pub const INDICATOR_EQUALITY: f64 = 1e-3;
    pub const EMBEDDING_SPREAD_MAX: f64 = 3.0;
}

/// One line of the tabular output.
#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub param: String,
    pub level: f64,
    pub value: f64,
    pub flag: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct Item {
    pub name: String,
    pub pass: bool,
    pub detail: Value,
}

#[derive(Debug, Clone, Default)]
pub struct Outcome {
    pub summary: Value,
    pub items: Vec<Item>,
    pub rows: Vec<Row>,
}

impl Outcome {
    fn item(&mut self, name: impl Into<String>, pass: bool, detail: Value) {
        self.items.push(Item {
            name: name.into(),
            pass,
            detail,
        });
    }

    fn row(&mut self, param: impl Into<String>, level: f64, value: f64, flag: impl Into<String>) {
        self.rows.push(Row {
            param: param.into(),
            level,
            value,
            flag: flag.into(),
        });
    }
}

fn pass_flag(ok: bool) -> &'static str {
    if ok {
        "pass"
    } else {
        "fail"
    }
}

pub fn run(cfg: &Resolved) -> Result<Outcome> {
    match cfg.experiment {
        Experiment::FundamentalSolution | Experiment::RegularitySweep => sweep(cfg),
        Experiment::DualityConvergence => duality_convergence(cfg),
        Experiment::YoungSuite => young_suite(cfg),
        Experiment::Lemma24Suite => lemma24_suite(cfg),
        Experiment::EmbeddingSuite => embedding_suite(cfg),
    }
}

fn sweep(cfg: &Resolved) -> Result<Outcome> {
    let par = cfg.params;
    let dim = par.dim();
    let crit = par.critical_exponents();
    let center = cfg.atoms.first().map_or(vec![0.0; dim], |a| a.point.clone());
    let singular = cfg.atoms.first().is_some_and(|a| a.weight != 0.0);
    let u = PotentialField::new(Source::Measure(cfg.measure()), par)?;
    let ball = Ball::new(center, cfg.ball_radius)?;

    let mut specs = Vec::new();
    for &r in &cfg.lebesgue {
        specs.push((ExponentSpec::lebesgue(r)?, format!("r={r}"), singular && r >= crit.r_star));
    }
    for &q in &cfg.sobolev_q {
        specs.push((ExponentSpec::sobolev(cfg.eta_of(q), q)?, format!("q={q}"), singular && q >= crit.q_star));
    }
    let schedule = default_schedule(cfg.ball_radius, cfg.levels);
    let list: Vec<ExponentSpec> = specs.iter().map(|s| s.0).collect();
    let reports = regularity_sweep(&u, &list, &ball, &schedule)?;

    let mut out = Outcome {
        summary: json!({
            "r_star": crit.r_star,
            "q_star": crit.q_star,
            "excision_radii": schedule,
        }),
        ..Outcome::default()
    };
    for ((_, label, expect_divergent), rep) in specs.iter().zip(&reports) {
        let flag = if rep.divergence_flag { "divergent" } else { "bounded" };
        for (eps, v) in rep.excision_radii.iter().zip(&rep.values) {
            out.row(label.as_str(), *eps, *v, flag);
        }
        out.item(
            label.as_str(),
            rep.divergence_flag == *expect_divergent,
            json!({
                "norm": rep.spec.label(),
                "expected": if *expect_divergent { "divergent" } else { "bounded" },
                "flag": flag,
                "fitted_rate": finite_or_null(rep.fitted_rate),
                "value_slope": rep.value_slope,
                "values": rep.values,
            }),
        );
    }
    Ok(out)
}

fn finite_or_null(x: f64) -> Value {
    if x.is_finite() {
        json!(x)
    } else {
        Value::Null
    }
}

fn relative(residual: f64, rhs: f64) -> f64 {
    if rhs == 0.0 {
        residual
    } else {
        residual / rhs.abs()
    }
}

fn duality_convergence(cfg: &Resolved) -> Result<Outcome> {
    let par = cfg.params;
    let dim = par.dim();
    let mu = cfg.measure();
    let exact = PotentialField::new(Source::Measure(mu.clone()), par)?;
    let battery = Battery::standard(dim, cfg.seed)?;
    let mut out = Outcome::default();

    // Battery residuals of the closed-form solution under refinement.
    let hw = cfg.refinement.half_width;
    let spacings: Vec<f64> = cfg.refinement.resolutions.iter().map(|&n| 2.0 * hw / n as f64).collect();
    let per_level = cfg
        .refinement
        .resolutions
        .iter()
        .map(|&n| battery_residuals(&exact, &mu, &battery, hw, n, &par))
        .collect::<Result<Vec<_>>>()?;
    let mut worst_order = f64::INFINITY;
    let mut worst_residual: f64 = 0.0;
    for k in 0..battery.len() {
        let name = per_level[0][k].test_function.clone();
        let residuals: Vec<f64> = per_level.iter().map(|l| l[k].residual).collect();
        let finest = &per_level[per_level.len() - 1][k];
        let order = observed_order(&spacings, &residuals, finest.rhs);
        let rel = relative(finest.residual, finest.rhs);
        let ok = order >= tol::ORDER_MIN && rel <= tol::RESIDUAL_MAX;
        worst_order = worst_order.min(order);
        worst_residual = worst_residual.max(rel);
        for (h, l) in spacings.iter().zip(&per_level) {
            out.row(format!("battery:{name}"), *h, relative(l[k].residual, l[k].rhs), pass_flag(ok));
        }
        out.item(
            format!("refinement:{name}"),
            ok,
            json!({
                "residuals": residuals,
                "rhs": finest.rhs,
                "observed_order": finite_or_null(order),
                "finest_relative_residual": rel,
            }),
        );
    }

    // Mollified existence pipeline.
    let q = cfg.sobolev_q[0];
    let gamma_max = 1.0 + 2.0 / par.riesz_exponent();
    let gamma = if gamma_max > 2.0 { 2.0 } else { 0.5 * (1.0 + gamma_max) };
    let finest_n = *cfg.grid.resolutions.last().expect("validated");
    let schedule = DualitySchedule {
        levels: (0..cfg.mollifier.levels)
            .map(|k| ScheduleLevel {
                bandwidth: cfg.mollifier.bandwidth * 0.5f64.powi(k as i32),
                resolution: finest_n,
            })
            .collect(),
        half_width: cfg.grid.half_width,
        profile: cfg.mollifier.profile,
        ball_radius: cfg.ball_radius,
        gamma,
        eta: cfg.eta_of(q),
        q,
    };
    let sol = solve_duality(&mu, &par, &schedule, &battery)?;
    for l in &sol.levels {
        if let Some(d) = l.cauchy_difference {
            out.row(format!("cauchy_L{gamma}"), l.bandwidth, d, pass_flag(sol.cauchy_monotone()));
        }
    }
    out.item(
        "cauchy_monotone",
        sol.cauchy_monotone(),
        json!({ "gamma": gamma, "differences": sol.cauchy_differences() }),
    );
    let spread = sol.sobolev_spread(cfg.ball_radius);
    let spread_ok = spread <= tol::SOBOLEV_SPREAD_MAX;
    for l in &sol.levels {
        out.row(format!("sobolev_q={q}"), l.bandwidth, l.sobolev_norm, pass_flag(spread_ok));
    }
    out.item(
        "sobolev_uniform",
        spread_ok,
        json!({
            "eta": schedule.eta,
            "q": q,
            "norms": sol.levels.iter().map(|l| l.sobolev_norm).collect::<Vec<_>>(),
            "spread": spread,
        }),
    );

    let limit_error = limit_error(&sol.u, &exact, cfg);
    let finest_bw = schedule.levels[schedule.levels.len() - 1].bandwidth;
    let limit_ok = limit_error <= tol::LIMIT_ERROR_MAX;
    out.row("limit_error", finest_bw, limit_error, pass_flag(limit_ok));
    out.item(
        "limit_matches_closed_form",
        limit_ok,
        json!({ "relative_error": limit_error, "inner_radius": tol::LIMIT_INNER_RADIUS }),
    );
    let pipeline_worst = sol
        .battery
        .iter()
        .map(|r| relative(r.residual, r.rhs))
        .fold(0.0, f64::max);
    for r in &sol.battery {
        out.row(format!("pipeline:{}", r.test_function), r.spacing, relative(r.residual, r.rhs), "info");
    }

    out.summary = json!({
        "spacings": spacings,
        "worst_observed_order": finite_or_null(worst_order),
        "worst_finest_residual": worst_residual,
        "cauchy_differences": sol.cauchy_differences(),
        "sobolev_spread": spread,
        "limit_error": limit_error,
        "pipeline_battery_worst": pipeline_worst,
        "warning": sol.warning,
    });
    Ok(out)
}

/// Relative sup error of the pipeline limit against the closed form on
/// `B_R` minus balls of radius 0.2 about every atom. The scale is the
/// pointwise value for nonnegative measures and the sup over the region
/// otherwise.
fn limit_error(u: &GridFunction, exact: &PotentialField, cfg: &Resolved) -> f64 {
    let signed = cfg.atoms.iter().any(|a| a.weight < 0.0);
    let mut x = vec![0.0; u.dim()];
    let mut pairs = Vec::new();
    for i in 0..u.len() {
        u.point_into(i, &mut x);
        if fracdual::grid::norm(&x) > cfg.ball_radius
            || cfg
                .atoms
                .iter()
                .any(|a| fracdual::grid::distance(&x, &a.point) < tol::LIMIT_INNER_RADIUS)
        {
            continue;
        }
        pairs.push((u.values()[i], exact.value(&x)));
    }
    let scale = pairs.iter().fold(0.0f64, |m, p| m.max(p.1.abs()));
    pairs
        .iter()
        .map(|&(a, e)| {
            let d = (a - e).abs();
            let s = if signed { scale } else { e.abs() };
            if s == 0.0 {
                d
            } else {
                d / s
            }
        })
        .fold(0.0, f64::max)
}

/// `(1 - |x - c|^2 / rho^2)^4`, scaled to `amplitude`.
fn poly_bump(x: &[f64], c: &[f64], rho: f64, amplitude: f64) -> f64 {
    let r2 = fracdual::grid::distance(x, c).powi(2) / (rho * rho);
    if r2 < 1.0 {
        amplitude * (1.0 - r2).powi(4)
    } else {
        0.0
    }
}

fn random_pair_member(rng: &mut ChaCha8Rng, dim: usize, hw: f64, n: usize) -> Result<GridFunction> {
    let count = rng.gen_range(1..=3);
    let bumps: Vec<(Vec<f64>, f64, f64)> = (0..count)
        .map(|_| {
            let c: Vec<f64> = (0..dim).map(|_| rng.gen_range(-0.4..0.4) * hw).collect();
            (c, rng.gen_range(0.15..0.5) * hw, rng.gen_range(-1.0..1.0))
        })
        .collect();
    GridFunction::from_fn(vec![0.0; dim], hw, n, |x| {
        bumps.iter().map(|(c, r, a)| poly_bump(x, c, *r, *a)).sum()
    })
}

fn young_suite(cfg: &Resolved) -> Result<Outcome> {
    let dim = cfg.params.dim();
    let hw = cfg.grid.half_width;
    let n = cfg.grid.resolutions[0];
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut out = Outcome::default();
    let mut worst_ratio: f64 = 0.0;
    for &[p, q] in &cfg.young {
        let label = format!("p={p} q={q}");
        let mut ratios = Vec::with_capacity(cfg.trials);
        for t in 0..cfg.trials {
            let f = random_pair_member(&mut rng, dim, hw, n)?;
            let g = random_pair_member(&mut rng, dim, hw, n)?;
            let c = young_check(&f, &g, p, q)?;
            let ok = c.ratio <= 1.0 + YOUNG_TOLERANCE;
            out.row(label.as_str(), t as f64, c.ratio, pass_flag(ok));
            ratios.push(c.ratio);
        }
        let max = ratios.iter().cloned().fold(0.0, f64::max);
        worst_ratio = worst_ratio.max(max);
        out.item(
            label.as_str(),
            max <= 1.0 + YOUNG_TOLERANCE,
            json!({ "p": p, "q": q, "r": fracdual::duality::young_exponent(p, q)?, "max_ratio": max }),
        );
    }

    // Nonnegative indicators make the L1 x L1 case an equality.
    let mut worst_gap: f64 = 0.0;
    for t in 0..cfg.trials.min(10) {
        let a: Vec<f64> = (0..dim).map(|_| rng.gen_range(0.1..0.6) * hw).collect();
        let c: Vec<f64> = (0..dim).map(|_| rng.gen_range(-0.3..0.3) * hw).collect();
        let rho = rng.gen_range(0.2..0.6) * hw;
        let f = GridFunction::from_fn(vec![0.0; dim], hw, n, |x| {
            if x.iter().zip(&a).all(|(xi, ai)| xi.abs() <= *ai) {
                1.0
            } else {
                0.0
            }
        })?;
        let g = GridFunction::from_fn(vec![0.0; dim], hw, n, |x| {
            if fracdual::grid::distance(x, &c) <= rho {
                1.0
            } else {
                0.0
            }
        })?;
        let check = young_check(&f, &g, 1.0, 1.0)?;
        let gap = (check.ratio - 1.0).abs();
        out.row("indicator_l1", t as f64, check.ratio, pass_flag(gap <= tol::INDICATOR_EQUALITY));
        worst_gap = worst_gap.max(gap);
    }
    out.item(
        "indicator_l1_equality",
        worst_gap <= tol::INDICATOR_EQUALITY,
        json!({ "max_gap": worst_gap }),
    );
    out.summary = json!({ "worst_ratio": worst_ratio, "indicator_gap": worst_gap });
    Ok(out)
}

fn lemma24_suite(cfg: &Resolved) -> Result<Outcome> {
    let par = cfg.params;
    let dim = par.dim();
    let hw = cfg.grid.half_width;
    let n = cfg.grid.resolutions[0];
    let threshold = dim as f64 / (2.0 * par.order());
    let halving = 0.5f64.powf(par.riesz_exponent());
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut out = Outcome::default();
    let mut worst_holder: f64 = 0.0;
    let mut worst_halving: f64 = 0.0;

    for t in 0..cfg.trials {
        let c: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let rho = rng.gen_range(0.4..0.9) * hw;
        let amplitude = rng.gen_range(0.5..2.0);
        let f = GridFunction::from_fn(c.clone(), hw, n, |x| poly_bump(x, &c, rho, amplitude))?;
        let mass = f.integral();
        let f = f.scaled(1.0 / mass);
        let support = Ball::new(c.clone(), rho)?;
        let points: Vec<Vec<f64>> = (0..500)
            .map(|_| c.iter().map(|ci| ci + rng.gen_range(-2.0..2.0) * hw).collect())
            .collect();

        for &sigma in &cfg.sigma {
            let label = format!("sigma={sigma}");
            match check_linfty_bound(&f, sigma, &par, &points, &support) {
                Ok(check) => {
                    let ratio = if check.rhs > 0.0 { check.lhs / check.rhs } else { 0.0 };
                    let ok = sigma > threshold && check.ok;
                    worst_holder = worst_holder.max(ratio);
                    out.row(label.as_str(), t as f64, ratio, pass_flag(ok));
                    out.item(
                        format!("holder:{t}:{label}"),
                        ok,
                        json!({ "lhs": check.lhs, "rhs": check.rhs, "ratio": ratio }),
                    );
                }
                Err(Error::Exponent(msg)) => {
                    let ok = sigma <= threshold;
                    out.row(label.as_str(), t as f64, f64::NAN, if ok { "rejected" } else { "fail" });
                    out.item(format!("holder:{t}:{label}"), ok, json!({ "rejected": msg }));
                }
                Err(e) => return Err(e),
            }
        }

        let source = Source::Density(f);
        let r0 = 10.0 * source.support_ball().radius();
        let profile = check_decay(&source, &par, &[r0, 2.0 * r0, 4.0 * r0], cfg.seed.wrapping_add(t as u64))?;
        let gaps: Vec<f64> = profile
            .halving_ratios()
            .iter()
            .map(|(_, ratio)| (ratio / halving - 1.0).abs())
            .collect();
        let gap = gaps.iter().cloned().fold(0.0, f64::max);
        worst_halving = worst_halving.max(gap);
        let ok = gap <= tol::HALVING_MAX && profile.monotone && profile.power_bound;
        for (r, sup) in &profile.entries {
            out.row("decay_sup", *r, *sup, pass_flag(ok));
        }
        out.item(
            format!("decay:{t}"),
            ok,
            json!({
                "entries": profile.entries,
                "halving_gaps": gaps,
                "monotone": profile.monotone,
                "power_bound": profile.power_bound,
            }),
        );
    }
    out.summary = json!({
        "sigma_threshold": threshold,
        "worst_holder_ratio": worst_holder,
        "halving_factor": halving,
        "worst_halving_gap": worst_halving,
    });
    Ok(out)
}

fn embedding_suite(cfg: &Resolved) -> Result<Outcome> {
    let dim = cfg.params.dim();
    let ball = Ball::centered(dim, cfg.ball_radius)?;
    let mesh = BallMesh::cartesian(&ball, cfg.grid.resolutions[0], None)?;
    let mut out = Outcome::default();
    let mut spreads = Vec::new();
    for &q in &cfg.sobolev_q {
        let eta = cfg.eta_of(q);
        let label = format!("q={q}");
        let mut ratios = Vec::new();
        for &w in &cfg.widths {
            let origin = vec![0.0; dim];
            let v = fracdual::FnField::new(dim, move |x: &[f64]| poly_bump(x, &origin, w, 1.0));
            let check = embedding_check_on(&v, eta, q, &mesh)?;
            ratios.push(check.ratio);
            out.row(label.as_str(), w, check.ratio, "info");
        }
        let max = ratios.iter().cloned().fold(0.0, f64::max);
        let min = ratios.iter().cloned().fold(f64::INFINITY, f64::min);
        let spread = if min > 0.0 { max / min } else { f64::INFINITY };
        let ok = spread.is_finite() && spread <= tol::EMBEDDING_SPREAD_MAX;
        spreads.push(finite_or_null(spread));
        out.item(
            label.as_str(),
            ok,
            json!({
                "eta": eta,
                "gamma_bar": fracdual::norms::embedding_exponent(dim, eta, q)?,
                "ratios": ratios,
                "spread": finite_or_null(spread),
            }),
        );
    }
    out.summary = json!({ "widths": cfg.widths, "spreads": spreads });
    Ok(out)
}
