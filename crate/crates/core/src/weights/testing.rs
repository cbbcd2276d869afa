//! Ball-tested conditions: the two testing integrals and the bump condition.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::params::SWParams;
use super::radial::{ball_integral, ball_volume};
use super::report::{fit_growth, relative_spread, ConditionReport, GrowthLaw, LawKind, Truncation};
use super::weight::Weight;
use crate::error::{Error, Result};
use crate::quad::geometry::ball_cell_fraction;
use crate::quad::{potential_on_grid, FieldSamples, GridSpec, KernelSpec};

/// Relative spread under which sampled values count as parameter-independent.
pub const FLAT_TOL: f64 = 2e-2;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Ball {
    pub center: Vec<f64>,
    pub radius: f64,
}

impl Ball {
    pub fn dist(&self) -> f64 {
        self.center.iter().map(|c| c * c).sum::<f64>().sqrt()
    }
}

/// Every combination of a center and a radius.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BallFamily {
    pub centers: Vec<Vec<f64>>,
    pub radii: Vec<f64>,
}

impl BallFamily {
    /// Centers `0, e_1, −2e_1 + e_2`; radii `2^k`, `k = −6..=6`.
    pub fn standard(dim: usize) -> Self {
        let mut e1 = vec![0.0; dim];
        e1[0] = 1.0;
        let mut c = vec![0.0; dim];
        c[0] = -2.0;
        if dim > 1 {
            c[1] = 1.0;
        }
        BallFamily {
            centers: vec![vec![0.0; dim], e1, c],
            radii: (-6..=6).map(|k| 2f64.powi(k)).collect(),
        }
    }

    pub fn dim(&self) -> usize {
        self.centers.first().map_or(0, |c| c.len())
    }

    /// Family dilated by `s` (centers and radii).
    pub fn scaled(&self, s: f64) -> Self {
        BallFamily {
            centers: self.centers.iter().map(|c| c.iter().map(|x| x * s).collect()).collect(),
            radii: self.radii.iter().map(|r| r * s).collect(),
        }
    }

    pub fn validate(&self, dim: usize) -> Result<()> {
        if self.centers.is_empty() || self.radii.is_empty() {
            return Err(Error::arg("ball family needs at least one center and one radius"));
        }
        if self.centers.iter().any(|c| c.len() != dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: self.centers.iter().map(Vec::len).find(|&l| l != dim).unwrap_or(0),
            });
        }
        if self.radii.iter().any(|r| !(*r > 0.0 && r.is_finite())) {
            return Err(Error::arg("ball radii must be positive and finite"));
        }
        Ok(())
    }

    /// Balls center-major, radii in the given order.
    pub fn balls(&self) -> Vec<Ball> {
        self.centers
            .iter()
            .flat_map(|c| {
                self.radii.iter().map(move |&r| Ball {
                    center: c.clone(),
                    radius: r,
                })
            })
            .collect()
    }

    /// Fills the verdict from per-ball values. A center whose values follow a
    /// power law in the radius at both ends of the range (|slope| > 0.05 with
    /// R² > 0.99) makes the supremum over all balls infinite.
    pub(crate) fn judge(&self, report: &mut ConditionReport, balls: &[Ball], vals: &[f64], q: f64) {
        report.samples = balls.iter().map(|b| b.radius).zip(vals.iter().copied()).collect();
        report.parameter_independent = Some(relative_spread(vals) < FLAT_TOL);
        let (arg, sup) = vals.iter().enumerate().fold((0, f64::NEG_INFINITY), |acc, (i, &x)| {
            if x > acc.1 || x.is_nan() {
                (i, x)
            } else {
                acc
            }
        });
        if let Some(b) = balls.get(arg) {
            let mut at = b.center.clone();
            at.push(b.radius);
            report.argmax = Some(at);
        }
        let per = self.radii.len();
        let mut worst: Option<(GrowthLaw, Vec<(f64, f64)>)> = None;
        for (ci, chunk) in vals.chunks(per).enumerate() {
            let radii = &self.radii;
            let ends = [0..per.min(5), per.saturating_sub(5)..per];
            for range in ends {
                let (r, v): (Vec<f64>, Vec<f64>) = range.clone().map(|i| (radii[i], chunk[i])).unzip();
                if v.iter().any(|x| !x.is_finite()) {
                    continue;
                }
                let lr: Vec<f64> = r.iter().map(|x| x.ln()).collect();
                let lv: Vec<f64> = v.iter().map(|x| x.max(1e-300).ln()).collect();
                if let Some(f) = crate::numerics::fit_line(&lr, &lv) {
                    if f.slope.abs() > 0.05 && f.r2 > 0.99 && v.iter().all(|x| *x > 0.0) {
                        let law = GrowthLaw {
                            kind: LawKind::Power,
                            slope: f.slope,
                            intercept: f.intercept,
                            r2: f.r2,
                            variable: "radius".into(),
                        };
                        if worst.as_ref().is_none_or(|w| f.slope.abs() > w.0.slope.abs()) {
                            let pts = range.map(|i| (radii[i], chunk[i])).collect();
                            worst = Some((law, pts));
                        }
                    }
                }
            }
            let _ = ci;
        }
        if !sup.is_finite() {
            report.finite = false;
            report.constant = None;
            report.divergence_law = Some(GrowthLaw {
                kind: LawKind::Power,
                slope: f64::INFINITY,
                intercept: 0.0,
                r2: 1.0,
                variable: "radius".into(),
            });
            report.notes.push("a tested ball gives an infinite value".into());
        } else if let Some((law, pts)) = worst {
            report.running = pts;
            report.finite = false;
            report.constant = None;
            let (t, v): (Vec<f64>, Vec<f64>) = report.running.iter().copied().unzip();
            report.divergence_law = Some(fit_growth(&t, &v, q, "radius").filter(|g| g.r2 > 0.99).unwrap_or(law));
            report
                .notes
                .push("values grow without bound along the radii of a center".into());
        } else {
            report.constant = Some(sup);
        }
    }
}

fn grid_points(dim: usize) -> usize {
    match dim {
        1 => 512,
        2 => 64,
        _ => 24,
    }
}

/// Weight averaged over `2^N` points at `±h/4` around `x`.
fn cell_average(w: &Weight, x: &[f64], h: f64) -> f64 {
    let dim = x.len();
    let mut s = 0.0;
    let mut p = vec![0.0; dim];
    for mask in 0..(1usize << dim) {
        for k in 0..dim {
            p[k] = x[k] + if mask >> k & 1 == 1 { 0.25 * h } else { -0.25 * h };
        }
        s += w.eval(&p);
    }
    s / (1usize << dim) as f64
}

/// `(∫_B I_ℓ(χ_B w)^e σ)^{1/e}` on a grid centred at the ball.
fn tested_integral(kernel: &KernelSpec, ball: &Ball, w: &Weight, sigma: &Weight, e: f64) -> Result<f64> {
    let dim = ball.center.len();
    let n = grid_points(dim);
    let half = ball.radius * n as f64 / (n as f64 - 4.0);
    let grid = GridSpec::new(dim, half, n)?;
    let h = grid.h();
    let mut frac = vec![0.0; grid.len()];
    let mut dens = vec![0.0; grid.len()];
    let mut test = vec![0.0; grid.len()];
    for i in 0..grid.len() {
        let x = grid.coords(i);
        let f = ball_cell_fraction(&x, h, ball.radius);
        if f == 0.0 {
            continue;
        }
        let at: Vec<f64> = x.iter().zip(&ball.center).map(|(a, c)| a + c).collect();
        frac[i] = f;
        dens[i] = f * cell_average(w, &at, h);
        test[i] = f * cell_average(sigma, &at, h);
    }
    if dens.iter().chain(&test).any(|v| !v.is_finite()) {
        return Err(Error::Quadrature(format!(
            "weight is not finite on the cells of the ball centred at {:?} with radius {}",
            ball.center, ball.radius
        )));
    }
    let pot = potential_on_grid(&FieldSamples::from_scalar(grid, dens)?, kernel)?;
    let vol = grid.cell_volume();
    let total = crate::numerics::stable_par_sum(grid.len(), |i| {
        if frac[i] == 0.0 {
            0.0
        } else {
            test[i] * pot.values[i].abs().powf(e) * vol
        }
    });
    Ok(total.powf(1.0 / e))
}

/// Both testing ratios over the family:
/// `(∫_B I_ℓ(χ_B u)^{p'} v)^{1/p'} / (∫_B u)^{1/q'}` and
/// `(∫_B I_ℓ(χ_B v)^q u)^{1/q} / (∫_B v)^{1/p}`. The report constant is the
/// larger of the two suprema; `samples` hold the per-ball maximum.
pub fn sawyer_testing(u: &Weight, v: &Weight, params: &SWParams, family: &BallFamily) -> Result<ConditionReport> {
    params.validate()?;
    if !(params.p > 1.0) || params.p > params.q {
        return Err(Error::Inadmissible(format!(
            "testing conditions need 1 < p <= q, got p={}, q={}",
            params.p, params.q
        )));
    }
    let dim = params.dim;
    family.validate(dim)?;
    let trunc = Truncation::default();
    let name = "sawyer_testing";
    if u.is_zero() {
        return Ok(ConditionReport::zero(name, trunc));
    }
    let kernel = KernelSpec::riesz(dim, params.ell)?;
    let p_conj = params.p_conj();
    let q_conj_inv = 1.0 - 1.0 / params.q;
    let balls = family.balls();
    let pairs: Vec<Result<(f64, f64)>> = balls
        .par_iter()
        .map(|b| {
            let mass_u = ball_integral(u, 1.0, dim, b.dist(), b.radius, trunc.h);
            let mass_v = ball_integral(v, 1.0, dim, b.dist(), b.radius, trunc.h);
            let first = if mass_u == 0.0 {
                0.0
            } else {
                tested_integral(&kernel, b, u, v, p_conj)? / mass_u.powf(q_conj_inv)
            };
            let second = if mass_v == 0.0 {
                0.0
            } else {
                tested_integral(&kernel, b, v, u, params.q)? / mass_v.powf(1.0 / params.p)
            };
            Ok((first, second))
        })
        .collect();
    let pairs = pairs.into_iter().collect::<Result<Vec<_>>>()?;
    let vals: Vec<f64> = pairs.iter().map(|(a, b)| a.max(*b)).collect();
    let mut report = ConditionReport::new(name, trunc);
    family.judge(&mut report, &balls, &vals, params.q);
    let s1 = pairs.iter().map(|p| p.0).fold(0.0, f64::max);
    let s2 = pairs.iter().map(|p| p.1).fold(0.0, f64::max);
    report.notes.push(format!("sup of first testing ratio {s1:.6e}"));
    report.notes.push(format!("sup of second testing ratio {s2:.6e}"));
    Ok(report)
}

/// `|B|^{ℓ/N+1/q−1/p} (avg_B u^r)^{1/(rq)} (avg_B v^{(1−p')r})^{1/(p'r)}` over the family.
pub fn bump_condition(
    u: &Weight,
    v: &Weight,
    params: &SWParams,
    r: f64,
    family: &BallFamily,
) -> Result<ConditionReport> {
    params.validate()?;
    if !(params.p > 1.0) {
        return Err(Error::Inadmissible(format!(
            "bump condition needs p > 1, got p={}",
            params.p
        )));
    }
    if !(r >= 1.0) {
        return Err(Error::arg(format!("bump exponent r must be >= 1, got {r}")));
    }
    let dim = params.dim;
    family.validate(dim)?;
    let trunc = Truncation::default();
    let name = "bump";
    if u.is_zero() {
        return Ok(ConditionReport::zero(name, trunc));
    }
    let n = dim as f64;
    let p_conj = params.p_conj();
    let sv = (1.0 - p_conj) * r;
    let e = params.ell / n + 1.0 / params.q - 1.0 / params.p;
    let balls = family.balls();
    let vals: Vec<f64> = balls
        .par_iter()
        .map(|b| {
            let vol = ball_volume(dim, b.radius);
            let au = ball_integral(u, r, dim, b.dist(), b.radius, trunc.h) / vol;
            let av = ball_integral(v, sv, dim, b.dist(), b.radius, trunc.h) / vol;
            vol.powf(e) * au.powf(1.0 / (r * params.q)) * av.powf(1.0 / (p_conj * r))
        })
        .collect();
    let mut report = ConditionReport::new(name, trunc);
    family.judge(&mut report, &balls, &vals, params.q);
    if let Some(a) = v.exponent_at_zero() {
        if a * sv + n <= 0.0 && !report.finite {
            report.tail_exponent = Some(a * sv);
            report
                .notes
                .push(format!("v^(1-p')r has exponent {:.4} <= -N at the origin", a * sv));
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn sobolev() -> SWParams {
        SWParams::new(2, 4.0 / 3.0, 4.0, 1.0, 0.0, 0.0).unwrap()
    }

    #[test]
    fn bump_of_constant_weights_is_one() {
        let rep = bump_condition(
            &Weight::one(),
            &Weight::one(),
            &sobolev(),
            2.0,
            &BallFamily::standard(2),
        )
        .unwrap();
        assert!(rep.finite);
        assert_relative_eq!(rep.constant.unwrap(), 1.0, max_relative = 1e-9);
        assert_eq!(rep.parameter_independent, Some(true));
    }

    #[test]
    fn bump_rejects_singular_dual_weight() {
        // v = |x|^{3}: (1 − p')·r·3 = −18 <= −2
        let rep = bump_condition(
            &Weight::one(),
            &Weight::power(3.0),
            &sobolev(),
            2.0,
            &BallFamily::standard(2),
        )
        .unwrap();
        assert!(!rep.finite);
        assert!(rep.divergence_law.is_some());
    }

    #[test]
    fn testing_ratios_scale_free_for_constant_weights() {
        let fam = BallFamily {
            centers: vec![vec![0.0, 0.0]],
            radii: vec![0.01, 0.1, 1.0, 10.0, 100.0],
        };
        let rep = sawyer_testing(&Weight::one(), &Weight::one(), &sobolev(), &fam).unwrap();
        assert!(rep.finite, "{:?}", rep.notes);
        assert_eq!(rep.parameter_independent, Some(true), "{:?}", rep.samples);
        assert!(
            sawyer_testing(&Weight::Zero, &Weight::one(), &sobolev(), &fam)
                .unwrap()
                .constant
                == Some(0.0)
        );
    }

    #[test]
    fn growing_family_is_divergent() {
        let fam = BallFamily::standard(2);
        let balls = fam.balls();
        let vals: Vec<f64> = balls.iter().map(|b| b.radius.powf(0.5)).collect();
        let mut rep = ConditionReport::new("t", Truncation::default());
        fam.judge(&mut rep, &balls, &vals, 2.0);
        assert!(!rep.finite);
        assert!((rep.divergence_law.unwrap().slope - 0.5).abs() < 1e-9);
    }
}
