//! Radial conditions: the pointwise two-weight criterion, Hardy-type
//! products, tail bounds and the `u ∈ L^p` ball condition.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::radial::{
    ball_integral, ball_volume, head_exponent, head_integral, log_integral, shell_integral, sup_inverse_inside,
    sup_inverse_outside, tail_integral,
};
use super::report::{relative_spread, ConditionReport, Truncation};
use super::testing::{BallFamily, FLAT_TOL};
use super::weight::Weight;
use crate::error::{Error, Result};
use crate::numerics::{gauss_legendre, sphere_area};

/// Relative agreement required across the truncation sweep for a finite verdict.
pub const TRUNCATION_TOL: f64 = 1e-2;

/// Truncation radii for the sweep: up to five log-spaced values in
/// `[max(t·10^{-4}, floor), t]`.
fn truncation_sweep(t: f64, floor: f64) -> Vec<f64> {
    let lo = (t * 1e-4).max(floor);
    if lo >= t {
        return vec![t];
    }
    (0..5).map(|k| lo * (t / lo).powf(k as f64 / 4.0)).collect()
}

/// `∫_{S^{N−1}} |r ω − s e_1|^{−c} dω` over directions with
/// `|r ω − s e_1| > s/2`.
fn angular_outside(dim: usize, r: f64, s: f64, c: f64) -> f64 {
    let kappa = (r * r + 0.75 * s * s) / (2.0 * r * s);
    let dist2 = |cos_t: f64| (r * r + s * s - 2.0 * r * s * cos_t).max(0.0);
    match dim {
        1 => {
            let mut v = (r + s).powf(-c);
            if (r - s).abs() > 0.5 * s {
                v += (r - s).abs().powf(-c);
            }
            v
        }
        2 => {
            let th0 = if kappa >= 1.0 { 0.0 } else { kappa.acos() };
            let rule = gauss_legendre(32);
            let panels = 4;
            let width = (PI - th0) / panels as f64;
            let mut total = 0.0;
            for p in 0..panels {
                let a = th0 + p as f64 * width;
                let (m, h) = (a + 0.5 * width, 0.5 * width);
                total += rule
                    .iter()
                    .map(|&(x, w)| w * h * dist2((m + h * x).cos()).powf(-0.5 * c))
                    .sum::<f64>();
            }
            2.0 * total
        }
        3 => {
            let tmax = kappa.min(1.0);
            let (hi, lo) = (dist2(-1.0), dist2(tmax));
            let e = 1.0 - 0.5 * c;
            if e.abs() < 1e-12 {
                2.0 * PI / (2.0 * r * s) * (hi / lo).ln()
            } else {
                2.0 * PI / (2.0 * r * s * e) * (hi.powf(e) - lo.powf(e))
            }
        }
        _ => unreachable!("dimension checked by caller"),
    }
}

/// `∫_{S^{N−1}} u(|y + ρ ω|) dω` with `|y| = s`.
fn angular_average_near(u: &Weight, dim: usize, s: f64, rho: f64) -> f64 {
    let at = |cos_t: f64| u.eval_r((s * s + rho * rho + 2.0 * s * rho * cos_t).max(0.0).sqrt());
    match dim {
        1 => at(1.0) + at(-1.0),
        2 => {
            let rule = gauss_legendre(32);
            2.0 * rule
                .iter()
                .map(|&(x, w)| w * 0.5 * PI * at((0.5 * PI * (x + 1.0)).cos()))
                .sum::<f64>()
        }
        3 => {
            let rule = gauss_legendre(32);
            2.0 * PI * rule.iter().map(|&(x, w)| w * at(x)).sum::<f64>()
        }
        _ => unreachable!("dimension checked by caller"),
    }
}

/// `∫_{|x|<t} u(x) |x − y|^{−c} dx` for `|y| = s`, with the power-law head
/// below `h` and (when `with_tail`) the convergent tail beyond `t`.
pub fn singular_integral(u: &Weight, dim: usize, c: f64, s: f64, trunc: Truncation, with_tail: bool) -> f64 {
    let n = dim as f64;
    // inside B(y, s/2): polar around y with ρ = (s/2) τ^{1/(N−c)}
    let e = n - c;
    let rule = gauss_legendre(32);
    let near: f64 = [(0.0, 0.1), (0.1, 1.0)]
        .iter()
        .map(|&(a, b)| {
            let (m, h) = (0.5 * (a + b), 0.5 * (b - a));
            rule.iter()
                .map(|&(x, w)| {
                    let tau: f64 = m + h * x;
                    let rho = 0.5 * s * tau.powf(1.0 / e);
                    w * h * angular_average_near(u, dim, s, rho)
                })
                .sum::<f64>()
        })
        .sum::<f64>()
        * (0.5 * s).powf(e)
        / e;
    // outside B(y, s/2): polar around the origin
    let h = trunc.h.min(0.25 * s);
    let mut breaks = vec![0.5 * s, 1.5 * s];
    breaks.extend(u.breakpoints());
    let far = log_integral(
        |r| u.eval_r(r) * r.powi(dim as i32 - 1) * angular_outside(dim, r, s, c),
        h,
        trunc.t,
        &breaks,
    );
    let head = head_integral(u, 1.0, dim, h) * s.powf(-c);
    let tail = if with_tail {
        tail_integral(u, 1.0, -c, dim, trunc.t)
    } else {
        0.0
    };
    near + far + head + tail
}

/// Criterion `sup_y (∫ u(x) |x−y|^{−(N−ℓ)q} dx)^{1/q} / v(y)` over the radii
/// `y_radii` (radial weights).
pub fn pointwise_condition(
    u: &Weight,
    v: &Weight,
    dim: usize,
    ell: f64,
    q: f64,
    y_radii: &[f64],
    trunc: Truncation,
) -> Result<ConditionReport> {
    if !(1..=3).contains(&dim) {
        return Err(Error::arg(format!("pointwise condition supports N <= 3, got {dim}")));
    }
    if !(ell > 0.0 && ell < dim as f64) || !(q >= 1.0) {
        return Err(Error::arg(format!("need 0 < ell < N and q >= 1, got ell={ell}, q={q}")));
    }
    if y_radii.is_empty() || y_radii.iter().any(|r| !(*r > 0.0)) {
        return Err(Error::arg("y radii must be positive"));
    }
    let name = "pointwise";
    if u.is_zero() {
        return Ok(ConditionReport::zero(name, trunc));
    }
    let c = (ell - dim as f64).abs() * q;
    let n = dim as f64;
    if c >= n {
        return Err(Error::NotIntegrable { exponent: -c, dim });
    }
    if let Some(a) = head_exponent(u, 1.0) {
        if a + n <= 0.0 {
            return Err(Error::NotIntegrable { exponent: a, dim });
        }
    }
    let tail_ok = tail_integral(u, 1.0, -c, dim, trunc.t).is_finite();
    let max_s = y_radii.iter().copied().fold(0.0, f64::max);
    let sweep = truncation_sweep(trunc.t, 20.0 * max_s);
    let mut report = ConditionReport::new(name, trunc);
    let mut last = Vec::new();
    for &t in &sweep {
        let tr = Truncation { h: trunc.h, t };
        let vals: Vec<f64> = y_radii
            .par_iter()
            .map(|&s| singular_integral(u, dim, c, s, tr, tail_ok).powf(1.0 / q) / v.eval_r(s))
            .collect();
        let (arg, sup) = vals.iter().enumerate().fold(
            (0, f64::NEG_INFINITY),
            |acc, (i, &x)| if x > acc.1 { (i, x) } else { acc },
        );
        report.running.push((t, sup));
        report.argmax = Some(vec![y_radii[arg]]);
        last = vals;
    }
    report.samples = y_radii.iter().copied().zip(last.iter().copied()).collect();
    report.parameter_independent = Some(relative_spread(&last) < FLAT_TOL);
    let run: Vec<f64> = report.running.iter().map(|p| p.1).collect();
    if !tail_ok {
        let a = u.exponent_at_infinity().unwrap_or(0.0);
        report.tail_exponent = Some(a + n - c);
        report.diverge(
            q,
            "truncation",
            format!(
                "far-field integrand r^({:.4}) is not integrable at infinity",
                a + n - c - 1.0
            ),
        );
    } else if relative_spread(&run) > TRUNCATION_TOL {
        report.diverge(
            q,
            "truncation",
            "supremum keeps growing with the truncation radius".into(),
        );
    } else {
        report.constant = run.last().copied();
    }
    Ok(report)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HardyVariant {
    /// `sup_R (∫_{|x|>R} ũ)^{1/q} sup_{|x|<R} ṽ^{-1}`
    W2,
    /// `sup_R (∫_{|x|<R} ũ)^{1/q} sup_{|x|>R} ṽ^{-1}`
    W4,
}

/// Hardy-type product over the radii `r_grid`.
pub fn hardy_constant(
    u: &Weight,
    v: &Weight,
    dim: usize,
    q: f64,
    variant: HardyVariant,
    r_grid: &[f64],
    trunc: Truncation,
) -> Result<ConditionReport> {
    if !(q >= 1.0) || r_grid.is_empty() || r_grid.iter().any(|r| !(*r > 0.0)) {
        return Err(Error::arg("hardy product needs q >= 1 and positive radii"));
    }
    let name = match variant {
        HardyVariant::W2 => "hardy_w2",
        HardyVariant::W4 => "hardy_w4",
    };
    if u.is_zero() {
        return Ok(ConditionReport::zero(name, trunc));
    }
    let n = dim as f64;
    let mut report = ConditionReport::new(name, trunc);
    let product = |radius: f64, tr: Truncation, attach: bool| -> f64 {
        match variant {
            HardyVariant::W2 => {
                let mut mass = shell_integral(u, 1.0, dim, radius, tr.t.max(radius));
                if attach {
                    mass += tail_integral(u, 1.0, 0.0, dim, tr.t.max(radius));
                }
                mass.powf(1.0 / q) * sup_inverse_inside(v, radius, tr.h)
            }
            HardyVariant::W4 => {
                let h = tr.h.min(radius);
                let mut mass = shell_integral(u, 1.0, dim, h, radius);
                if attach {
                    mass += head_integral(u, 1.0, dim, h);
                }
                mass.powf(1.0 / q) * sup_inverse_outside(v, radius, tr.t)
            }
        }
    };
    // analytic screen of the improper part
    let (improper_ok, exponent) = match variant {
        HardyVariant::W2 => {
            let e = u.exponent_at_infinity().map(|a| a + n);
            (tail_integral(u, 1.0, 0.0, dim, trunc.t).is_finite(), e)
        }
        HardyVariant::W4 => {
            let e = u.exponent_at_zero().map(|a| a + n);
            (head_integral(u, 1.0, dim, trunc.h).is_finite(), e)
        }
    };
    let vals: Vec<f64> = r_grid.iter().map(|&r| product(r, trunc, improper_ok)).collect();
    report.samples = r_grid.iter().copied().zip(vals.iter().copied()).collect();
    report.parameter_independent = Some(relative_spread(&vals) < FLAT_TOL);
    let (arg, sup) = vals.iter().enumerate().fold(
        (0, f64::NEG_INFINITY),
        |acc, (i, &x)| if x > acc.1 { (i, x) } else { acc },
    );
    report.argmax = Some(vec![r_grid[arg]]);
    if !improper_ok {
        // sweep the truncation at the first radius to expose the growth law
        let r0 = r_grid[0];
        let sweep: Vec<Truncation> = (0..5)
            .map(|k| match variant {
                HardyVariant::W2 => Truncation {
                    h: trunc.h,
                    t: r0 * 10f64.powi(k + 1),
                },
                HardyVariant::W4 => Truncation {
                    h: r0 * 10f64.powi(-k - 1),
                    t: trunc.t,
                },
            })
            .collect();
        for tr in sweep {
            let p = match variant {
                HardyVariant::W2 => tr.t,
                HardyVariant::W4 => 1.0 / tr.h,
            };
            report.running.push((p, product(r0, tr, false)));
        }
        report.tail_exponent = exponent;
        report.diverge(
            q,
            "truncation",
            format!(
                "weight integral diverges: radial exponent {:.4} + N >= 0",
                exponent.unwrap_or(f64::NAN) - n
            ),
        );
    } else if !sup.is_finite() {
        report.finite = false;
        report.divergence_law = Some(super::report::GrowthLaw {
            kind: super::report::LawKind::Power,
            slope: f64::INFINITY,
            intercept: 0.0,
            r2: 1.0,
            variable: "radius".into(),
        });
        report
            .notes
            .push("the inverse weight is unbounded on the tested region".into());
    } else {
        report.constant = Some(sup);
    }
    Ok(report)
}

/// `sup_y (∫_{|x|>2|y|} u(x) |x|^{−(N−ℓ+1)q} dx)^{1/q} · |y| / v(y)`.
pub fn pesopeso_condition(
    u: &Weight,
    v: &Weight,
    dim: usize,
    ell: f64,
    q: f64,
    y_radii: &[f64],
    trunc: Truncation,
) -> Result<ConditionReport> {
    if !(ell > 0.0 && ell < dim as f64) || !(q >= 1.0) || y_radii.iter().any(|r| !(*r > 0.0)) {
        return Err(Error::arg(
            "tail condition needs 0 < ell < N, q >= 1 and positive radii",
        ));
    }
    let name = "tail_bound";
    if u.is_zero() {
        return Ok(ConditionReport::zero(name, trunc));
    }
    let n = dim as f64;
    let extra = -(n - ell + 1.0) * q;
    let tail_ok = tail_integral(u, 1.0, extra, dim, trunc.t).is_finite();
    let area = sphere_area(dim);
    let tail_of = |s: f64, t: f64, attach: bool| -> f64 {
        let mut m = log_integral(
            |r| area * u.eval_r(r) * r.powf(extra + n - 1.0),
            2.0 * s,
            t.max(2.0 * s),
            &u.breakpoints(),
        );
        if attach {
            m += tail_integral(u, 1.0, extra, dim, t.max(2.0 * s));
        }
        m
    };
    let vals: Vec<f64> = y_radii
        .iter()
        .map(|&s| tail_of(s, trunc.t, tail_ok).powf(1.0 / q) * s / v.eval_r(s))
        .collect();
    let mut report = ConditionReport::new(name, trunc);
    report.samples = y_radii.iter().copied().zip(vals.iter().copied()).collect();
    report.parameter_independent = Some(relative_spread(&vals) < FLAT_TOL);
    let (arg, sup) = vals.iter().enumerate().fold(
        (0, f64::NEG_INFINITY),
        |acc, (i, &x)| if x > acc.1 { (i, x) } else { acc },
    );
    report.argmax = Some(vec![y_radii[arg]]);
    if !tail_ok {
        let s0 = y_radii[0];
        for k in 1..=5 {
            let t = 2.0 * s0 * 10f64.powi(k);
            report
                .running
                .push((t, tail_of(s0, t, false).powf(1.0 / q) * s0 / v.eval_r(s0)));
        }
        let a = u.exponent_at_infinity().unwrap_or(0.0);
        report.tail_exponent = Some(a + extra + n);
        report.diverge(
            q,
            "truncation",
            format!("tail integrand exponent {:.4} >= -1", a + extra + n - 1.0),
        );
    } else {
        report.constant = Some(sup);
    }
    Ok(report)
}

/// Ball condition `|B|^{1/q+ℓ/N−1} (avg_B u^p)^{1/(pq)}` over the family,
/// plus the implied tail bound at `y_radii` checked directly and through
/// the dyadic-shell chain.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BallTailReport {
    pub ball: ConditionReport,
    /// `(|y|, |y| · direct tail, |y| · dyadic sum, |y| · chain bound)`
    pub tail: Vec<(f64, f64, f64, f64)>,
    pub chain_holds: bool,
}

#[allow(clippy::too_many_arguments)]
pub fn bump_u3(
    u: &Weight,
    p: f64,
    dim: usize,
    ell: f64,
    q: f64,
    family: &BallFamily,
    y_radii: &[f64],
    trunc: Truncation,
) -> Result<BallTailReport> {
    if !(p >= 1.0) || !(q >= 1.0) || !(ell > 0.0 && ell < dim as f64) {
        return Err(Error::arg("ball condition needs p, q >= 1 and 0 < ell < N"));
    }
    let name = "ball_condition_lp";
    let n = dim as f64;
    if u.is_zero() {
        return Ok(BallTailReport {
            ball: ConditionReport::zero(name, trunc),
            tail: y_radii.iter().map(|&s| (s, 0.0, 0.0, 0.0)).collect(),
            chain_holds: true,
        });
    }
    let mut ball = ConditionReport::new(name, trunc);
    let balls = family.balls();
    let vals: Vec<f64> = balls
        .iter()
        .map(|b| {
            let vol = ball_volume(dim, b.radius);
            let avg = ball_integral(u, p, dim, b.dist(), b.radius, trunc.h) / vol;
            vol.powf(1.0 / q + ell / n - 1.0) * avg.powf(1.0 / (p * q))
        })
        .collect();
    family.judge(&mut ball, &balls, &vals, q);
    let c = ball.constant.unwrap_or(f64::INFINITY);
    let extra = -(n - ell + 1.0) * q;
    let omega = crate::numerics::ball_volume(dim);
    let tail = y_radii
        .iter()
        .map(|&s| {
            let direct = log_integral(
                |r| sphere_area(dim) * u.eval_r(r) * r.powf(extra + n - 1.0),
                2.0 * s,
                trunc.t.max(4.0 * s),
                &u.breakpoints(),
            ) + tail_integral(u, 1.0, extra, dim, trunc.t.max(4.0 * s));
            // shell k: 2^k|y| <= |x| < 2^{k+1}|y|, bounded by its inner radius and the ball mass
            let mut dyadic = 0.0;
            let mut k = 1;
            loop {
                let inner = 2f64.powi(k) * s;
                let term = inner.powf(extra) * ball_integral(u, 1.0, dim, 0.0, 2.0 * inner, trunc.h);
                dyadic += term;
                if !(term > 1e-14 * dyadic) || k > 200 {
                    break;
                }
                k += 1;
            }
            let chain = c * omega.powf(1.0 - ell / n) * 2f64.powf(n - ell) * (2f64.powf(q) - 1.0).powf(-1.0 / q) / s;
            (s, direct.powf(1.0 / q) * s, dyadic.powf(1.0 / q) * s, chain * s)
        })
        .collect::<Vec<_>>();
    let chain_holds = tail
        .iter()
        .all(|&(_, d, y, c)| d <= y * (1.0 + 1e-6) && y <= c * (1.0 + 1e-6));
    Ok(BallTailReport {
        ball,
        tail,
        chain_holds,
    })
}
