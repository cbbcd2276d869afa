//! Shared numerical utilities: Gauss-Legendre panels, sphere rules,
//! special constants, least-squares law fitting and order-stable
//! parallel reductions.

use std::f64::consts::PI;
use std::num::NonZeroUsize;
use std::sync::OnceLock;

use gauss_quad::legendre::GaussLegendre;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

const MAX_CACHED_RULE: usize = 64;

/// Gauss-Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> &'static [(f64, f64)] {
    static RULES: OnceLock<Vec<Vec<(f64, f64)>>> = OnceLock::new();
    assert!((1..=MAX_CACHED_RULE).contains(&n), "rule size {n} out of range");
    let rules = RULES.get_or_init(|| {
        (1..=MAX_CACHED_RULE)
            .map(|k| {
                let rule = GaussLegendre::new(NonZeroUsize::new(k).unwrap());
                let mut pairs: Vec<(f64, f64)> = rule.iter().map(|(x, w)| (*x, *w)).collect();
                pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
                pairs
            })
            .collect()
    });
    &rules[n - 1]
}

/// `∫_a^b f` with an `n`-point Gauss-Legendre rule.
pub fn gl_integrate(a: f64, b: f64, n: usize, mut f: impl FnMut(f64) -> f64) -> f64 {
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    gauss_legendre(n)
        .iter()
        .map(|&(x, w)| w * f(mid + half * x))
        .sum::<f64>()
        * half
}

/// Quadrature nodes `(r, w)` for `∫_a^b g(r) dr` on logarithmically spaced
/// panels, `0 < a < b`.
pub fn log_nodes(a: f64, b: f64, panels_per_decade: usize, order: usize) -> Vec<(f64, f64)> {
    assert!(a > 0.0 && b > a, "log_nodes needs 0 < a < b (got {a}, {b})");
    let decades = (b / a).log10();
    let panels = ((decades * panels_per_decade as f64).ceil() as usize).max(1);
    let (ta, tb) = (a.ln(), b.ln());
    let dt = (tb - ta) / panels as f64;
    let rule = gauss_legendre(order);
    let mut out = Vec::with_capacity(panels * order);
    for p in 0..panels {
        let lo = ta + p as f64 * dt;
        let mid = lo + 0.5 * dt;
        for &(x, w) in rule {
            let t = mid + 0.5 * dt * x;
            let r = t.exp();
            out.push((r, w * 0.5 * dt * r));
        }
    }
    out
}

/// Quadrature nodes for `∫_a^b g(r) dr` with panels graded geometrically
/// toward an interior or end point `s` where `g` may be weakly singular.
pub fn graded_nodes(a: f64, b: f64, s: f64, order: usize, ratio: f64, min_width: f64) -> Vec<(f64, f64)> {
    let mut breaks = vec![a, b];
    for (side_len, sign) in [(s - a, -1.0), (b - s, 1.0)] {
        if side_len <= 0.0 {
            continue;
        }
        let mut w = side_len;
        while w > min_width {
            breaks.push(s + sign * w);
            w *= ratio;
        }
        breaks.push(s + sign * w);
    }
    if s > a && s < b {
        breaks.push(s);
    }
    breaks.retain(|x| *x >= a && *x <= b);
    breaks.sort_by(f64::total_cmp);
    breaks.dedup_by(|x, y| (*x - *y).abs() <= 1e-300);
    let rule = gauss_legendre(order);
    let mut out = Vec::new();
    for pair in breaks.windows(2) {
        let (lo, hi) = (pair[0], pair[1]);
        if hi <= lo {
            continue;
        }
        let half = 0.5 * (hi - lo);
        let mid = 0.5 * (hi + lo);
        out.extend(rule.iter().map(|&(x, w)| (mid + half * x, w * half)));
    }
    out
}

/// Surface area of the unit sphere `S^{N-1}`.
pub fn sphere_area(dim: usize) -> f64 {
    let n = dim as f64;
    2.0 * PI.powf(0.5 * n) / puruspe::gamma(0.5 * n)
}

/// Volume of the unit ball in `R^N`.
pub fn ball_volume(dim: usize) -> f64 {
    sphere_area(dim) / dim as f64
}

pub fn gamma(x: f64) -> f64 {
    puruspe::gamma(x)
}

/// Radius of the ball with the same volume as a cube of side `h`.
pub fn equal_volume_radius(dim: usize, h: f64) -> f64 {
    h * (1.0 / ball_volume(dim)).powf(1.0 / dim as f64)
}

/// Weighted rule on the unit sphere `S^{N-1}`; weights sum to its area.
pub fn sphere_rule(dim: usize, resolution: usize) -> Vec<(Vec<f64>, f64)> {
    match dim {
        1 => vec![(vec![1.0], 1.0), (vec![-1.0], 1.0)],
        2 => {
            let m = resolution.max(4);
            (0..m)
                .map(|k| {
                    let t = 2.0 * PI * (k as f64 + 0.5) / m as f64;
                    (vec![t.cos(), t.sin()], 2.0 * PI / m as f64)
                })
                .collect()
        }
        3 => {
            let nt = (resolution / 2).clamp(4, MAX_CACHED_RULE);
            let m = resolution.max(4);
            let mut out = Vec::with_capacity(nt * m);
            for &(c, w) in gauss_legendre(nt) {
                let s = (1.0 - c * c).sqrt();
                for k in 0..m {
                    let p = 2.0 * PI * (k as f64 + 0.5) / m as f64;
                    out.push((vec![s * p.cos(), s * p.sin(), c], w * 2.0 * PI / m as f64));
                }
            }
            out
        }
        _ => panic!("sphere rules are provided for N <= 3"),
    }
}

pub fn binomial(n: u32, k: u32) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

pub fn factorial(n: u32) -> f64 {
    (1..=n).fold(1.0, |acc, i| acc * i as f64)
}

/// Least-squares line `y = slope * x + intercept` with coefficient of
/// determination.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
}

pub fn fit_line(x: &[f64], y: &[f64]) -> Option<LinearFit> {
    let n = x.len();
    if n < 2 || y.len() != n {
        return None;
    }
    let mx = x.iter().sum::<f64>() / n as f64;
    let my = y.iter().sum::<f64>() / n as f64;
    let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
    let syy: f64 = y.iter().map(|v| (v - my).powi(2)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    if sxx == 0.0 {
        return None;
    }
    let slope = sxy / sxx;
    let r2 = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    Some(LinearFit {
        slope,
        intercept: my - slope * mx,
        r2,
    })
}

const SUM_CHUNK: usize = 4096;

/// Parallel sum of `f(0..n)` whose result does not depend on the number of
/// worker threads: fixed chunks, partial sums combined in index order.
pub fn stable_par_sum(n: usize, f: impl Fn(usize) -> f64 + Sync) -> f64 {
    let chunks = n.div_ceil(SUM_CHUNK);
    let partials: Vec<f64> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let lo = c * SUM_CHUNK;
            let hi = (lo + SUM_CHUNK).min(n);
            (lo..hi).map(&f).sum::<f64>()
        })
        .collect();
    partials.iter().sum()
}

/// Same as [`stable_par_sum`] over a slice of items.
pub fn stable_par_sum_items<T: Sync>(items: &[T], f: impl Fn(&T) -> f64 + Sync) -> f64 {
    stable_par_sum(items.len(), |i| f(&items[i]))
}

/// Radial Fourier inversion kernel in the `e^{-2πi x·ξ}` convention:
/// for radial `F(ξ) = F0(|ξ|)`, `f(r) = ∫_0^∞ F0(ρ) hankel_kernel(N, ρ, r) dρ`.
pub fn hankel_kernel(dim: usize, rho: f64, r: f64) -> f64 {
    let z = 2.0 * PI * rho * r;
    match dim {
        1 => 2.0 * (z).cos(),
        2 => 2.0 * PI * rho * puruspe::Jn(0, z),
        3 => {
            if z < 1e-8 {
                4.0 * PI * rho * rho
            } else {
                2.0 * rho * z.sin() / r
            }
        }
        _ => {
            let nu = 0.5 * dim as f64 - 1.0;
            if z < 1e-12 {
                sphere_area(dim) * rho.powi(dim as i32 - 1)
            } else {
                let (j, _) = puruspe::Jnu_Ynu(nu, z);
                2.0 * PI * r.powf(-nu) * rho.powf(nu + 1.0) * j
            }
        }
    }
}

/// Regularized incomplete beta function `I_x(a, b)`.
pub fn beta_reg(a: f64, b: f64, x: f64) -> f64 {
    puruspe::betai(a, b, x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn gl_integrates_polynomials_exactly() {
        let v = gl_integrate(0.0, 2.0, 4, |x| x.powi(7));
        assert_relative_eq!(v, 2f64.powi(8) / 8.0, max_relative = 1e-13);
    }

    #[test]
    fn log_nodes_integrate_inverse() {
        let s: f64 = log_nodes(1e-3, 1e3, 2, 16).iter().map(|(r, w)| w / r).sum();
        assert_relative_eq!(s, 6.0 * 10f64.ln(), max_relative = 1e-12);
    }

    #[test]
    fn graded_nodes_handle_log_singularity() {
        let s: f64 = graded_nodes(0.0, 2.0, 1.0, 12, 0.25, 1e-12)
            .iter()
            .map(|(r, w)| w * (r - 1.0f64).abs().ln())
            .sum();
        assert_relative_eq!(s, -2.0, max_relative = 1e-9);
    }

    #[test]
    fn sphere_constants() {
        assert_relative_eq!(sphere_area(2), 2.0 * PI, max_relative = 1e-14);
        assert_relative_eq!(sphere_area(3), 4.0 * PI, max_relative = 1e-14);
        assert_relative_eq!(ball_volume(3), 4.0 * PI / 3.0, max_relative = 1e-14);
        for dim in 1..=3 {
            let w: f64 = sphere_rule(dim, 32).iter().map(|p| p.1).sum();
            assert_relative_eq!(w, sphere_area(dim), max_relative = 1e-12);
        }
    }

    #[test]
    fn fit_recovers_line() {
        let x = [1.0, 2.0, 3.0, 4.0];
        let y: Vec<f64> = x.iter().map(|v| 3.0 * v - 1.0).collect();
        let fit = fit_line(&x, &y).unwrap();
        assert_relative_eq!(fit.slope, 3.0, max_relative = 1e-14);
        assert_relative_eq!(fit.r2, 1.0, max_relative = 1e-14);
    }

    #[test]
    fn stable_sum_matches_sequential() {
        let f = |i: usize| 1.0 / (1.0 + i as f64);
        let seq: f64 = (0..100_000).map(f).sum();
        assert_relative_eq!(stable_par_sum(100_000, f), seq, max_relative = 1e-12);
    }

    #[test]
    fn hankel_inverts_gaussian() {
        // exp(-π|ξ|²) is its own transform in every dimension.
        for dim in [1usize, 2, 3] {
            for r in [0.0, 0.3, 1.1] {
                let v = gl_integrate(0.0, 6.0, 64, |rho| (-PI * rho * rho).exp() * hankel_kernel(dim, rho, r));
                let v = if dim == 1 { v / 2.0 * 2.0 } else { v };
                assert_relative_eq!(v, (-PI * r * r).exp(), max_relative = 1e-9);
            }
        }
    }
}
