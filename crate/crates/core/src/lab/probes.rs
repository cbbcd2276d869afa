//! Blow-up, necessity and convergence probes built on radial sources.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::trend::{classify, FittedLaw, TrendPolicy, TrendReport, TrendVerdict};
use crate::error::{Error, Result};
use crate::fields::{divfree_family, make_bump, PlateauProfile};
use crate::numerics::{fit_line, gauss_legendre, graded_nodes, sphere_area, sphere_rule};
use crate::opalg::{cocanceling_check, HomogeneousOperator, Verdict};
use crate::quad::{riesz_constant, weighted_norm_samples, Domain, FieldSamples, GridSpec};
use crate::weights::radial::log_integral;
use crate::weights::{LawKind, PowerWeight, SWParams};

/// `φ(|x|)` of the unit bump, with `I_ℓφ` and its radial derivative by
/// quadrature over the support.
#[derive(Clone, Debug)]
pub struct RadialSource {
    pub dim: usize,
    pub ell: f64,
    pub gamma: f64,
    pub mass: f64,
    profile: Vec<(f64, f64)>,
    phi: crate::fields::ClosedFormField,
}

impl RadialSource {
    pub fn bump(dim: usize, ell: f64, normalize: bool) -> Result<Self> {
        if !(1..=3).contains(&dim) || !(ell > 0.0 && ell < dim as f64) {
            return Err(Error::arg(format!(
                "radial source needs N in 1..=3 and 0 < ell < N, got N={dim}, ell={ell}"
            )));
        }
        let phi = make_bump(dim, &vec![0.0; dim], 1.0, normalize)?;
        let rule = gauss_legendre(16);
        let panels = 8;
        let mut profile = Vec::new();
        for p in 0..panels {
            let (a, b) = (p as f64 / panels as f64, (p + 1) as f64 / panels as f64);
            let (m, h) = (0.5 * (a + b), 0.5 * (b - a));
            for &(x, w) in rule {
                let rho = m + h * x;
                profile.push((rho, w * h));
            }
        }
        let mut s = RadialSource {
            dim,
            ell,
            gamma: riesz_constant(dim, ell),
            mass: 0.0,
            profile,
            phi,
        };
        s.mass = sphere_area(dim)
            * s.profile
                .iter()
                .map(|&(r, w)| w * s.phi_at(r) * r.powi(dim as i32 - 1))
                .sum::<f64>();
        Ok(s)
    }

    pub fn phi_at(&self, rho: f64) -> f64 {
        let mut x = vec![0.0; self.dim];
        x[0] = rho;
        self.phi.value(&x)[0]
    }

    /// `∫_{S^{N−1}} g(|r e_1 − ρ ω|²) dω` with `t = cos θ`-type nodes.
    fn angular(&self, r: f64, rho: f64, g: impl Fn(f64, f64) -> f64) -> f64 {
        let d = |c: f64| (r * r + rho * rho - 2.0 * r * rho * c).max(0.0);
        match self.dim {
            1 => g(d(1.0), 1.0) + g(d(-1.0), -1.0),
            2 => {
                let min_w = (1e-3 * (r - rho).abs() / r.max(rho)).max(1e-15);
                let nodes = if (r - rho).abs() < 0.5 * r.max(rho) {
                    graded_nodes(0.0, PI, 0.0, 16, 0.25, min_w)
                } else {
                    gauss_legendre(48)
                        .iter()
                        .map(|&(x, w)| (0.5 * PI * (x + 1.0), 0.5 * PI * w))
                        .collect()
                };
                2.0 * nodes.iter().map(|&(t, w)| w * g(d(t.cos()), t.cos())).sum::<f64>()
            }
            _ => {
                let min_w = (1e-3 * (r - rho).abs() / r.max(rho)).powi(2).max(1e-15);
                let nodes = graded_nodes(-1.0, 1.0, 1.0, 16, 0.25, min_w);
                2.0 * PI * nodes.iter().map(|&(c, w)| w * g(d(c), c)).sum::<f64>()
            }
        }
    }

    /// `(I_ℓ φ)(r)` for any `r > 0`.
    pub fn potential(&self, r: f64) -> f64 {
        let e = 0.5 * (self.ell - self.dim as f64);
        let nodes: Vec<(f64, f64)> = if r >= 2.0 {
            self.profile.clone()
        } else {
            graded_nodes(0.0, 1.0, r.min(1.0), 16, 0.3, 1e-12)
        };
        self.gamma
            * nodes
                .iter()
                .map(|&(rho, w)| {
                    let f = self.phi_at(rho);
                    if f == 0.0 {
                        return 0.0;
                    }
                    w * f * rho.powi(self.dim as i32 - 1) * self.angular(r, rho, |d2, _| d2.powf(e))
                })
                .sum::<f64>()
    }

    /// `∂_r (I_ℓ φ)(r)` for `r >= 2` (outside twice the support).
    pub fn radial_derivative(&self, r: f64) -> Result<f64> {
        if r < 2.0 {
            return Err(Error::arg(format!(
                "radial derivative is evaluated for r >= 2, got {r}"
            )));
        }
        let e = 0.5 * (self.ell - self.dim as f64);
        Ok(self.gamma
            * self
                .profile
                .iter()
                .map(|&(rho, w)| {
                    let f = self.phi_at(rho);
                    w * f
                        * rho.powi(self.dim as i32 - 1)
                        * self.angular(r, rho, |d2, c| 2.0 * e * d2.powf(e - 1.0) * (r - rho * c))
                })
                .sum::<f64>())
    }
}

fn check_relation(params: &SWParams) -> Result<()> {
    params.validate()?;
    if params.p != 1.0 {
        return Err(Error::Inadmissible(format!("probe works at p = 1, got p={}", params.p)));
    }
    let d = params.scaling_defect();
    if d.abs() > 1e-12 {
        return Err(Error::Inadmissible(format!(
            "1/q = 1 + (alpha + beta - ell)/N fails: defect {d:.3e}"
        )));
    }
    Ok(())
}

fn trend(
    probe: &str,
    parameter: &str,
    t: &[f64],
    observed: Vec<(String, Vec<f64>)>,
    fit_on: &str,
    q: f64,
    policy: &TrendPolicy,
) -> TrendReport {
    let values = observed
        .iter()
        .find(|(n, _)| n == fit_on)
        .map(|o| o.1.clone())
        .unwrap_or_default();
    let (verdict, law, spread, degenerate) = classify(t, &values, q, policy);
    let mut notes = policy.rationale();
    if degenerate {
        notes.push("fewer than four sweep points".into());
    }
    TrendReport {
        probe: probe.into(),
        parameter: parameter.into(),
        params: t.to_vec(),
        observed,
        law,
        verdict,
        degenerate,
        relative_spread: spread,
        notes,
    }
}

/// `|S| ∫_a^b r^{N−1−βq} g(r)^q dr` on log panels.
fn annulus_mass(dim: usize, beta: f64, q: f64, a: f64, b: f64, g: impl Fn(f64) -> f64 + Sync) -> f64 {
    sphere_area(dim) * log_integral(|r| r.powf(dim as f64 - 1.0 - beta * q) * g(r).abs().powf(q), a, b, &[])
}

/// Annulus masses `∫_{a<|x|<1} |x|^{−βq} |I_ℓ φ_ε|^q` for each `a`, without
/// checking the exponent relation.
pub fn scalar_annulus_masses(source: &RadialSource, beta: f64, q: f64, eps: f64, a_list: &[f64]) -> Result<Vec<f64>> {
    if a_list.iter().any(|a| !(*a > 0.0 && *a < 1.0)) || !(eps > 0.0) {
        return Err(Error::arg("annuli need 0 < a < 1 and eps > 0"));
    }
    let n = source.dim as f64;
    let scale = eps.powf(source.ell - n);
    Ok(a_list
        .par_iter()
        .map(|&a| annulus_mass(source.dim, beta, q, a, 1.0, |r| scale * source.potential(r / eps)))
        .collect())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalarProbeSpec {
    pub a_list: Vec<f64>,
    pub eps: f64,
    /// Unit-mass mollifier seed.
    pub normalize: bool,
}

/// Unconstrained scalar data at `α = 0`: the weighted `q`-mass of `I_ℓ φ_ε`
/// over `a < |x| < 1` against `log(1/a)`.
pub fn counterexample_scalar_probe(
    params: &SWParams,
    spec: &ScalarProbeSpec,
    policy: &TrendPolicy,
) -> Result<TrendReport> {
    check_relation(params)?;
    if params.alpha != 0.0 {
        return Err(Error::Inadmissible(format!(
            "scalar probe needs alpha = 0, got {}",
            params.alpha
        )));
    }
    let source = RadialSource::bump(params.dim, params.ell, spec.normalize)?;
    let masses = scalar_annulus_masses(&source, params.beta, params.q, spec.eps, &spec.a_list)?;
    let t: Vec<f64> = spec.a_list.iter().map(|a| 1.0 / a).collect();
    let lhs: Vec<f64> = masses.iter().map(|m| m.powf(1.0 / params.q)).collect();
    let target = sphere_area(params.dim) * (source.gamma * source.mass).powf(params.q);
    let mut r = trend(
        "counterexample_scalar",
        "1/a",
        &t,
        vec![
            ("a".into(), spec.a_list.clone()),
            ("lhs".into(), lhs),
            ("lhs_q".into(), masses),
        ],
        "lhs",
        params.q,
        policy,
    );
    r.notes.push(format!(
        "limit profile gamma*mass*|x|^(ell-N) gives lhs^q slope {target:.6} in log(1/a) (gamma = {:.6}, mass = {:.6})",
        source.gamma, source.mass
    ));
    r.notes.push(format!("mollifier scale eps = {:e}", spec.eps));
    Ok(r)
}

/// Fixed annulus `(a, 1)`, shrinking `ε`: `I_ℓ φ_ε` approaches the singular profile.
pub fn scalar_eps_sweep(
    params: &SWParams,
    a: f64,
    eps_list: &[f64],
    normalize: bool,
    policy: &TrendPolicy,
) -> Result<TrendReport> {
    check_relation(params)?;
    let source = RadialSource::bump(params.dim, params.ell, normalize)?;
    let masses = eps_list
        .iter()
        .map(|&e| scalar_annulus_masses(&source, params.beta, params.q, e, &[a]).map(|v| v[0]))
        .collect::<Result<Vec<_>>>()?;
    let t: Vec<f64> = eps_list.iter().map(|e| 1.0 / e).collect();
    let lhs: Vec<f64> = masses.iter().map(|m| m.powf(1.0 / params.q)).collect();
    Ok(trend(
        "scalar_eps_sweep",
        "1/eps",
        &t,
        vec![
            ("eps".into(), eps_list.to_vec()),
            ("lhs".into(), lhs),
            ("lhs_q".into(), masses),
        ],
        "lhs",
        params.q,
        policy,
    ))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DivfreeProbeSpec {
    pub eps_list: Vec<f64>,
    /// Inner radius `a = kappa · ε` (kept outside twice the support).
    pub kappa: f64,
    pub normalize: bool,
    /// Points per axis for the right-side quadrature.
    pub n: usize,
}

impl Default for DivfreeProbeSpec {
    fn default() -> Self {
        DivfreeProbeSpec {
            eps_list: vec![1e-3, 1e-4, 1e-5, 1e-6],
            kappa: 4.0,
            normalize: false,
            n: 256,
        }
    }
}

/// Divergence-free family `f_ε = (∂₂φ_ε, −∂₁φ_ε, 0, …)`: left side over
/// `κε < |x| < 1` against the weighted `L¹` norm, as `ε` decreases.
pub fn counterexample_alpha1_probe(
    params: &SWParams,
    spec: &DivfreeProbeSpec,
    policy: &TrendPolicy,
) -> Result<TrendReport> {
    check_relation(params)?;
    let dim = params.dim;
    if dim < 2 {
        return Err(Error::arg("divergence-free family needs N >= 2"));
    }
    if !(spec.kappa >= 2.0) || spec.eps_list.iter().any(|e| !(*e > 0.0 && spec.kappa * e < 1.0)) {
        return Err(Error::arg("need kappa >= 2 and kappa * eps < 1"));
    }
    let q = params.q;
    let source = RadialSource::bump(dim, params.ell, spec.normalize)?;
    // |I f_ε(x)| = |∂_r I φ_ε| (x₁² + x₂²)^{1/2} / |x|
    let ang = sphere_rule(dim, 64)
        .iter()
        .map(|(w, wt)| wt * (w[0] * w[0] + w[1] * w[1]).powf(0.5 * q))
        .sum::<f64>()
        / sphere_area(dim);
    let n = dim as f64;
    let phi = make_bump(dim, &vec![0.0; dim], 1.0, spec.normalize)?;
    let rows = spec
        .eps_list
        .iter()
        .map(|&eps| -> Result<(f64, f64, f64)> {
            let a = spec.kappa * eps;
            let scale = eps.powf(params.ell - n - 1.0);
            let lhs_q = ang
                * annulus_mass(dim, params.beta, q, a, 1.0, |r| {
                    scale * source.radial_derivative(r / eps).unwrap_or(f64::NAN)
                });
            let f = divfree_family(&phi, eps)?;
            let grid = GridSpec::new(dim, 2.0 * eps, spec.n)?;
            let samples = FieldSamples::sample(grid, &f)?;
            let rhs = weighted_norm_samples(
                &samples,
                &PowerWeight::new(params.alpha),
                1.0,
                &Domain::Box { half_width: 2.0 * eps },
            )?;
            Ok((a, lhs_q, rhs))
        })
        .collect::<Result<Vec<_>>>()?;
    let a: Vec<f64> = rows.iter().map(|r| r.0).collect();
    let lhs_q: Vec<f64> = rows.iter().map(|r| r.1).collect();
    let lhs: Vec<f64> = lhs_q.iter().map(|v| v.powf(1.0 / q)).collect();
    let rhs: Vec<f64> = rows.iter().map(|r| r.2).collect();
    let ratio: Vec<f64> = lhs.iter().zip(&rhs).map(|(l, r)| l / r).collect();
    let t: Vec<f64> = a.iter().map(|x| 1.0 / x).collect();
    let mut r = trend(
        "counterexample_divfree",
        "1/a",
        &t,
        vec![
            ("eps".into(), spec.eps_list.clone()),
            ("a".into(), a),
            ("lhs".into(), lhs),
            ("lhs_q".into(), lhs_q),
            ("rhs".into(), rhs.clone()),
            ("ratio".into(), ratio),
        ],
        "ratio",
        q,
        policy,
    );
    let rhs_spread = crate::weights::relative_spread(&rhs);
    r.notes
        .push(format!("right side relative spread over eps: {rhs_spread:.3e}"));
    let (l, b) = (params.ell, params.beta);
    r.notes.push(format!(
        "exponent readings: (-N+ell-2-beta)q+N = {:.6}, (ell-N-1-beta)q+N = {:.6}",
        (-n + l - 2.0 - b) * q + n,
        (l - n - 1.0 - b) * q + n
    ));
    Ok(r)
}

/// `u_λ = p_λ w` for the witness `w` of a non-cocanceling operator, against
/// the `α = 0` inequality: `lhs_λ = ‖|x|^{−β} K ∗ p_λ‖_q`, `rhs_λ = ‖p_λ‖_1`.
pub fn necessity_probe(
    op: &HomogeneousOperator,
    params: &SWParams,
    lambdas: &[f64],
    policy: &TrendPolicy,
) -> Result<TrendReport> {
    check_relation(params)?;
    if params.alpha != 0.0 {
        return Err(Error::Inadmissible(format!(
            "necessity probe runs at alpha = 0, got {}",
            params.alpha
        )));
    }
    if op.dim() != params.dim {
        return Err(Error::DimensionMismatch {
            expected: params.dim,
            got: op.dim(),
        });
    }
    let check = cocanceling_check(op);
    if check.verdict != Verdict::Refuted {
        return Err(Error::ProbeRefused(format!(
            "operator `{}` is cocanceling: no witness in the common kernel",
            op.name()
        )));
    }
    let witness = check.witness_vector().unwrap_or_default();
    let wnorm = witness.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    if lambdas.iter().any(|l| !(*l >= 1.0)) {
        return Err(Error::arg("lambda values must be >= 1"));
    }
    let profile = PlateauProfile::shared(params.dim, params.ell)?;
    let q = params.q;
    let n = params.dim as f64;
    let area = sphere_area(params.dim);
    let rows: Vec<(f64, f64)> = lambdas
        .par_iter()
        .map(|&lam| {
            if lam == 1.0 {
                return (0.0, 0.0);
            }
            let nodes = profile.radial_nodes(lam);
            let lhs_q: f64 = nodes
                .iter()
                .map(|&(r, w)| {
                    w * area * r.powf(n - 1.0 - params.beta * q) * profile.k_conv_p_lambda(lam, r).abs().powf(q)
                })
                .sum();
            (lhs_q, profile.p_lambda_l1(lam))
        })
        .collect();
    let lhs_q: Vec<f64> = rows.iter().map(|r| r.0 * wnorm.powf(q)).collect();
    let lhs: Vec<f64> = lhs_q.iter().map(|v| v.powf(1.0 / q)).collect();
    let rhs: Vec<f64> = rows.iter().map(|r| r.1 * wnorm).collect();
    let bound = 2.0 * profile.psi_l1() * wnorm;
    let mut r = trend(
        "necessity",
        "lambda",
        lambdas,
        vec![
            ("lhs".into(), lhs),
            ("lhs_q".into(), lhs_q),
            ("rhs".into(), rhs.clone()),
            ("rhs_bound".into(), vec![bound; lambdas.len()]),
        ],
        "lhs",
        q,
        policy,
    );
    if lambdas.contains(&1.0) {
        r.degenerate = true;
        r.notes.push("lambda = 1 gives u = 0".into());
    }
    let target = 2.0 * area * profile.gamma.powf(q) * wnorm.powf(q);
    r.notes.push(format!("derived lhs^q slope in log(lambda): {target:.6}"));
    r.notes.push(format!(
        "witness {:?} of operator `{}`",
        witness.iter().map(|c| (c.re, c.im)).collect::<Vec<_>>(),
        op.name()
    ));
    let worst = rhs.iter().map(|v| v / bound).fold(0.0, f64::max);
    r.notes.push(format!("max rhs / (2 |psi|_1) = {worst:.6}"));
    Ok(r)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClaimReport {
    pub lambdas: Vec<f64>,
    /// `(|x|, errors over lambdas, fitted exponent)`
    pub curves: Vec<(f64, Vec<f64>, Option<f64>)>,
    /// `K(x)` at each sampled `|x|` (the error at `λ = 1`).
    pub baseline: Vec<f64>,
    /// `θ` and `κ` of the envelope `λ^{N−θ}|x|^{ℓ−θ} + λ^{κ−N}|x|^{κ−ℓ}`.
    pub theta: f64,
    pub kappa: f64,
    /// Exponent every fitted decay must stay below.
    pub required: f64,
    /// Errors strictly decrease over `λ > 1` at every sampled radius.
    pub monotone: bool,
    pub verdict: TrendVerdict,
}

/// `|K ∗ p_λ(x) − K(x)|` at `|x| ∈ radii` as `λ` grows.
pub fn claim_convergence_probe(dim: usize, ell: f64, lambdas: &[f64], radii: &[f64]) -> Result<ClaimReport> {
    if radii.iter().any(|r| !(*r > 0.0)) || lambdas.iter().any(|l| !(*l >= 1.0)) {
        return Err(Error::arg("need |x| > 0 and lambda >= 1"));
    }
    let profile = PlateauProfile::shared(dim, ell)?;
    let n = dim as f64;
    let (theta, kappa) = (n + 0.5, 0.5 * (ell + n));
    let required = -(theta - n).min(n - kappa) + 0.2;
    let mut monotone = true;
    let mut ok = true;
    let curves = radii
        .iter()
        .map(|&r| {
            let errs: Vec<f64> = lambdas
                .iter()
                .map(|&l| (profile.k_conv_p_lambda(l, r) - profile.kernel(r)).abs())
                .collect();
            let moving: Vec<f64> = lambdas
                .iter()
                .zip(&errs)
                .filter(|(l, _)| **l > 1.0)
                .map(|(_, e)| *e)
                .collect();
            monotone &= moving.windows(2).all(|w| w[1] < w[0]);
            let pts: Vec<(f64, f64)> = lambdas
                .iter()
                .zip(&errs)
                .filter(|(l, _)| **l > 1.0)
                .map(|(l, e)| (l.ln(), e.ln()))
                .collect();
            let (x, y): (Vec<f64>, Vec<f64>) = pts.into_iter().unzip();
            let slope = fit_line(&x, &y).map(|f| f.slope);
            ok &= slope.is_some_and(|s| s <= required);
            (r, errs, slope)
        })
        .collect();
    Ok(ClaimReport {
        lambdas: lambdas.to_vec(),
        curves,
        baseline: radii.iter().map(|&r| profile.kernel(r)).collect(),
        theta,
        kappa,
        required,
        monotone,
        verdict: if ok && monotone {
            TrendVerdict::Bounded
        } else {
            TrendVerdict::Inconclusive
        },
    })
}

/// `|I_ℓ φ_ε(x) − γ m |x|^{ℓ−N}|` as `ε → 0` (`m = ∫φ`).
pub fn mollifier_limit_probe(
    dim: usize,
    ell: f64,
    eps_list: &[f64],
    radius: f64,
    normalize: bool,
) -> Result<TrendReport> {
    if !(radius > 0.0) || eps_list.iter().any(|e| !(*e > 0.0)) {
        return Err(Error::arg("need |x| > 0 and eps > 0"));
    }
    let source = RadialSource::bump(dim, ell, normalize)?;
    let n = dim as f64;
    let limit = source.gamma * source.mass * radius.powf(ell - n);
    let vals: Vec<f64> = eps_list
        .par_iter()
        .map(|&e| e.powf(ell - n) * source.potential(radius / e))
        .collect();
    let errs: Vec<f64> = vals.iter().map(|v| (v - limit).abs()).collect();
    let t: Vec<f64> = eps_list.iter().map(|e| 1.0 / e).collect();
    let (x, y): (Vec<f64>, Vec<f64>) = t
        .iter()
        .zip(&errs)
        .filter(|(_, e)| **e > 0.0)
        .map(|(t, e)| (t.ln(), e.ln()))
        .unzip();
    let law = fit_line(&x, &y).map(|f| FittedLaw {
        kind: LawKind::Power,
        slope: f.slope,
        intercept: f.intercept,
        r2: f.r2,
    });
    let decreasing = errs.windows(2).all(|w| w[1] <= w[0]);
    Ok(TrendReport {
        probe: "mollifier_limit".into(),
        parameter: "1/eps".into(),
        params: t,
        observed: vec![
            ("eps".into(), eps_list.to_vec()),
            ("value".into(), vals),
            ("limit".into(), vec![limit; eps_list.len()]),
            ("error".into(), errs),
        ],
        law,
        verdict: if decreasing {
            TrendVerdict::Bounded
        } else {
            TrendVerdict::Inconclusive
        },
        degenerate: eps_list.len() < 4,
        relative_spread: 0.0,
        notes: vec![format!(
            "limit keeps the constant gamma = {:.6} (mass {:.6})",
            source.gamma, source.mass
        )],
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::opalg::{Builtin, HomogeneousOperator};

    #[test]
    fn far_potential_matches_point_mass() {
        let s = RadialSource::bump(2, 1.0, true).unwrap();
        assert!((s.mass - 1.0).abs() < 1e-10);
        // monopole plus a second-moment correction of order r^{-3}
        let v = s.potential(50.0);
        assert!((v * 50.0 - 1.0).abs() < 1e-3, "{v}");
        let d = s.radial_derivative(50.0).unwrap();
        assert!((d * 2500.0 + 1.0).abs() < 1e-3, "{d}");
    }

    #[test]
    fn potential_is_continuous_across_the_switch() {
        let s = RadialSource::bump(2, 1.0, true).unwrap();
        let (a, b) = (s.potential(2.0 - 1e-9), s.potential(2.0));
        assert!((a - b).abs() < 1e-8 * b.abs(), "{a} {b}");
        let s3 = RadialSource::bump(3, 2.0, true).unwrap();
        let (a, b) = (s3.potential(2.0 - 1e-9), s3.potential(2.0));
        assert!((a - b).abs() < 1e-8 * b.abs(), "{a} {b}");
    }

    #[test]
    fn scalar_probe_grows_like_log() {
        let params = SWParams::p_eq_1(2, 1.0, 0.0, 0.25).unwrap();
        let spec = ScalarProbeSpec {
            a_list: vec![1e-1, 1e-2, 1e-3, 1e-4],
            eps: 1e-6,
            normalize: true,
        };
        let r = counterexample_scalar_probe(&params, &spec, &TrendPolicy::default()).unwrap();
        let law = r.law.clone().unwrap();
        eprintln!("{:?} {:?}", r.verdict, law);
        assert_eq!(r.verdict, TrendVerdict::Divergent);
    }

    #[test]
    fn necessity_refuses_cocanceling() {
        let op = HomogeneousOperator::builtin(Builtin::Divergence, 2).unwrap();
        let params = SWParams::p_eq_1(2, 1.0, 0.0, 0.25).unwrap();
        assert!(matches!(
            necessity_probe(&op, &params, &[2.0, 4.0], &TrendPolicy::default()),
            Err(Error::ProbeRefused(_))
        ));
    }

    #[test]
    fn divfree_family_diverges_at_alpha_one() {
        let params = SWParams::p_eq_1(2, 1.0, 1.0, -0.5).unwrap();
        let r = counterexample_alpha1_probe(&params, &DivfreeProbeSpec::default(), &TrendPolicy::default()).unwrap();
        assert_eq!(r.verdict, TrendVerdict::Divergent);
        assert!(r.law.as_ref().unwrap().r2 > 0.99);
        assert!(crate::weights::relative_spread(r.series("rhs").unwrap()) < 1e-2);
    }

    #[test]
    fn necessity_lhs_grows_with_bounded_rhs() {
        let op = HomogeneousOperator::partial_of_component(2, 2, 0, 0).unwrap();
        let params = SWParams::p_eq_1(2, 1.0, 0.0, 0.25).unwrap();
        let r = necessity_probe(&op, &params, &[2.0, 4.0, 8.0, 16.0], &TrendPolicy::default()).unwrap();
        assert_eq!(r.verdict, TrendVerdict::Divergent);
        let bound = r.series("rhs_bound").unwrap()[0];
        assert!(r.series("rhs").unwrap().iter().all(|v| *v <= bound * 1.02));
        let slope = r.law.unwrap().slope;
        assert!((slope / (4.0 * PI) - 1.0).abs() < 0.2, "{slope}");
    }

    #[test]
    fn claim_error_decays_at_unit_radius() {
        let c = claim_convergence_probe(2, 1.0, &[1.0, 2.0, 4.0, 8.0, 16.0], &[1.0]).unwrap();
        assert!(c.monotone);
        assert_eq!(c.baseline[0], c.curves[0].1[0]);
        assert!(c.curves[0].2.unwrap() <= c.required);
    }

    #[test]
    fn mollified_potential_tends_to_kernel() {
        let m = mollifier_limit_probe(2, 1.0, &[0.5, 0.25, 0.125, 0.0625], 1.0, true).unwrap();
        assert_eq!(m.verdict, TrendVerdict::Bounded);
        let e = m.series("error").unwrap();
        assert!(e[3] < 1e-3 && e[3] < e[0] / 10.0);
    }
}
