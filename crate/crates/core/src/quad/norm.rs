use serde::{Deserialize, Serialize};

use super::geometry::{annulus_cell_fraction, ball_cell_fraction};
use super::grid::{FieldSamples, GridSpec};
use crate::error::{Error, Result};
use crate::numerics::{gauss_legendre, log_nodes, sphere_area, sphere_rule, stable_par_sum};
use crate::weights::PowerWeight;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Domain {
    /// `[−L, L]^N`
    Box {
        half_width: f64,
    },
    Ball {
        radius: f64,
    },
    /// `inner <= |x| < outer`
    Annulus {
        inner: f64,
        outer: f64,
    },
}

impl Domain {
    fn contains_origin(&self) -> bool {
        match *self {
            Domain::Box { .. } | Domain::Ball { .. } => true,
            Domain::Annulus { inner, .. } => inner <= 0.0,
        }
    }

    /// Fraction of the cube of side `h` centred at `x` inside the domain.
    pub fn cell_fraction(&self, x: &[f64], h: f64) -> f64 {
        match *self {
            Domain::Box { half_width } => x
                .iter()
                .map(|&c| {
                    let lo = (c - 0.5 * h).max(-half_width);
                    let hi = (c + 0.5 * h).min(half_width);
                    ((hi - lo) / h).clamp(0.0, 1.0)
                })
                .product(),
            Domain::Ball { radius } => ball_cell_fraction(x, h, radius),
            Domain::Annulus { inner, outer } => annulus_cell_fraction(x, h, inner, outer),
        }
    }
}

/// `∫_{[−1,1]^N} |x|^a dx`, via the cone decomposition
/// `(2N/(N+a)) ∫_{face} |p|^a dA` over the face `x_N = 1`.
pub fn unit_cube_moment(dim: usize, a: f64) -> f64 {
    if dim == 1 {
        return 2.0 / (1.0 + a);
    }
    let rule = gauss_legendre(24);
    let m = dim - 1;
    let mut idx = vec![0usize; m];
    let mut face = 0.0;
    loop {
        let mut w = 1.0;
        let mut s = 1.0;
        for &k in &idx {
            let (u, wk) = rule[k];
            w *= wk;
            s += u * u;
        }
        face += w * s.powf(0.5 * a);
        let mut k = 0;
        loop {
            if k == m {
                return 2.0 * dim as f64 / (dim as f64 + a) * face;
            }
            idx[k] += 1;
            if idx[k] < rule.len() {
                break;
            }
            idx[k] = 0;
            k += 1;
        }
    }
}

/// `∫_cell |x|^a dx` for the cell centred at `x` with side `h`, by tensor
/// Gauss-Legendre (the cell must not contain the origin).
fn cell_moment_gl(x: &[f64], h: f64, a: f64) -> f64 {
    let rule = gauss_legendre(10);
    let dim = x.len();
    let mut idx = vec![0usize; dim];
    let mut s = 0.0;
    loop {
        let mut w = 1.0;
        let mut r2 = 0.0;
        for (k, &i) in idx.iter().enumerate() {
            let (u, wk) = rule[i];
            w *= wk * 0.5 * h;
            let p = x[k] + 0.5 * h * u;
            r2 += p * p;
        }
        s += w * r2.powf(0.5 * a);
        let mut k = 0;
        loop {
            if k == dim {
                return s;
            }
            idx[k] += 1;
            if idx[k] < rule.len() {
                break;
            }
            idx[k] = 0;
            k += 1;
        }
    }
}

/// Quadrature weights `∫_{cell_i ∩ D} |x|^a dx`: exact moments in the cells
/// within `2h` of the origin, midpoint elsewhere.
pub fn cell_weights(grid: &GridSpec, weight: &PowerWeight, domain: &Domain) -> Result<Vec<f64>> {
    let a = weight.exponent;
    if !weight.locally_integrable(grid.dim) && domain.contains_origin() {
        return Err(Error::NotIntegrable {
            exponent: a,
            dim: grid.dim,
        });
    }
    let h = grid.h();
    let vol = grid.cell_volume();
    let half = grid.n / 2;
    let origin_moment = (0.5 * h).powf(grid.dim as f64 + a) * unit_cube_moment(grid.dim, a);
    Ok((0..grid.len())
        .map(|i| {
            let x = grid.coords(i);
            let frac = domain.cell_fraction(&x, h);
            if frac == 0.0 {
                return 0.0;
            }
            let idx = grid.multi(i);
            let near = idx
                .iter()
                .map(|&k| (k as i64 - half as i64).unsigned_abs())
                .max()
                .unwrap() as usize;
            let moment = if near == 0 {
                origin_moment
            } else if near <= 2 && a != 0.0 {
                cell_moment_gl(&x, h, a)
            } else {
                vol * weight.eval(&x)
            };
            frac * moment
        })
        .collect())
}

/// `(∫_D |g|^q |x|^a dx)^{1/q}` from grid samples (`|g|` is the fiber norm).
pub fn weighted_norm_samples(g: &FieldSamples, weight: &PowerWeight, q: f64, domain: &Domain) -> Result<f64> {
    if q < 1.0 {
        return Err(Error::arg(format!("q must be >= 1, got {q}")));
    }
    let w = cell_weights(&g.grid, weight, domain)?;
    let norms = g.pointwise_norm();
    let s = stable_par_sum(norms.len(), |i| if w[i] == 0.0 { 0.0 } else { norms[i].powf(q) * w[i] });
    Ok(s.powf(1.0 / q))
}

#[derive(Clone, Debug, PartialEq)]
pub struct ClosedNormOptions {
    pub angular: usize,
    pub panels_per_decade: usize,
    pub order: usize,
    /// Radii where the integrand jumps or kinks.
    pub breaks: Vec<f64>,
    /// Relative inner cut-off for Ball domains; below it the integrand is
    /// frozen at its value at the origin.
    pub inner_cut: f64,
}

impl Default for ClosedNormOptions {
    fn default() -> Self {
        ClosedNormOptions {
            angular: 64,
            panels_per_decade: 6,
            order: 16,
            breaks: Vec::new(),
            inner_cut: 1e-10,
        }
    }
}

/// Radial nodes on `[a, b]` split at the break radii.
fn split_log_nodes(a: f64, b: f64, opts: &ClosedNormOptions) -> Vec<(f64, f64)> {
    let mut cuts = vec![a];
    cuts.extend(opts.breaks.iter().copied().filter(|&r| r > a && r < b));
    cuts.push(b);
    cuts.sort_by(f64::total_cmp);
    cuts.windows(2)
        .flat_map(|w| log_nodes(w[0], w[1], opts.panels_per_decade, opts.order))
        .collect()
}

/// `(∫_D |g|^q |x|^a dx)^{1/q}` for a closed-form `g` (returning `|g|`),
/// by polar quadrature (balls, annuli) or dyadic cube refinement (boxes).
pub fn weighted_norm_closed(
    g: &(dyn Fn(&[f64]) -> f64 + Sync),
    dim: usize,
    weight: &PowerWeight,
    q: f64,
    domain: &Domain,
    opts: &ClosedNormOptions,
) -> Result<f64> {
    if q < 1.0 {
        return Err(Error::arg(format!("q must be >= 1, got {q}")));
    }
    let a = weight.exponent;
    if !weight.locally_integrable(dim) && domain.contains_origin() {
        return Err(Error::NotIntegrable { exponent: a, dim });
    }
    let s = match *domain {
        Domain::Ball { radius } => {
            let r0 = radius * opts.inner_cut;
            let g0 = g(&vec![0.0; dim]).powf(q);
            let inner = g0 * sphere_area(dim) * r0.powf(dim as f64 + a) / (dim as f64 + a);
            inner + polar_shell(g, dim, a, q, r0, radius, opts)
        }
        Domain::Annulus { inner, outer } => polar_shell(g, dim, a, q, inner, outer, opts),
        Domain::Box { half_width } => dyadic_box(g, dim, a, q, half_width),
    };
    Ok(s.powf(1.0 / q))
}

fn polar_shell(
    g: &(dyn Fn(&[f64]) -> f64 + Sync),
    dim: usize,
    a: f64,
    q: f64,
    r0: f64,
    r1: f64,
    opts: &ClosedNormOptions,
) -> f64 {
    let nodes = split_log_nodes(r0, r1, opts);
    let sphere = sphere_rule(dim, opts.angular);
    stable_par_sum(nodes.len(), |i| {
        let (r, w) = nodes[i];
        let ang: f64 = sphere
            .iter()
            .map(|(u, wu)| {
                let x: Vec<f64> = u.iter().map(|t| t * r).collect();
                wu * g(&x).powf(q)
            })
            .sum();
        w * r.powf(a + dim as f64 - 1.0) * ang
    })
}

fn dyadic_box(g: &(dyn Fn(&[f64]) -> f64 + Sync), dim: usize, a: f64, q: f64, half_width: f64) -> f64 {
    let rule = gauss_legendre(12);
    let levels = 40;
    let mut total = 0.0;
    let mut s = half_width;
    for _ in 0..levels {
        // 4^N subcubes of side s/2 tiling [−s, s]^N; skip the inner 2^N
        let side = 0.5 * s;
        let cubes = 4usize.pow(dim as u32);
        let mut level = 0.0;
        for c in 0..cubes {
            let mut lo = vec![0.0; dim];
            let mut inner = true;
            let mut t = c;
            for l in lo.iter_mut() {
                let k = t % 4;
                t /= 4;
                *l = -s + k as f64 * side;
                inner &= k == 1 || k == 2;
            }
            if inner {
                continue;
            }
            let mut idx = vec![0usize; dim];
            loop {
                let mut w = 1.0;
                let mut x = vec![0.0; dim];
                for k in 0..dim {
                    let (u, wk) = rule[idx[k]];
                    x[k] = lo[k] + 0.5 * side * (u + 1.0);
                    w *= 0.5 * side * wk;
                }
                let r = x.iter().map(|v| v * v).sum::<f64>().sqrt();
                level += w * g(&x).powf(q) * r.powf(a);
                let mut k = 0;
                while k < dim {
                    idx[k] += 1;
                    if idx[k] < rule.len() {
                        break;
                    }
                    idx[k] = 0;
                    k += 1;
                }
                if k == dim {
                    break;
                }
            }
        }
        total += level;
        s *= 0.5;
    }
    total + g(&vec![0.0; dim]).powf(q) * s.powf(dim as f64 + a) * unit_cube_moment(dim, a)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::ball_indicator;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    #[test]
    fn cube_moment_matches_known_values() {
        assert_relative_eq!(unit_cube_moment(2, 0.0), 4.0, max_relative = 1e-12);
        assert_relative_eq!(unit_cube_moment(3, 0.0), 8.0, max_relative = 1e-12);
        // ∫_{[−1,1]²} |x|² = 8/3
        assert_relative_eq!(unit_cube_moment(2, 2.0), 8.0 / 3.0, max_relative = 1e-12);
    }

    #[test]
    fn indicator_norm_closed_and_sampled() {
        let expect = (6.0 * PI / 5.0).powf(0.75);
        let w = PowerWeight::new(-1.0 / 3.0);
        let f = ball_indicator(2, &[0.0, 0.0], 1.0);
        let closed = weighted_norm_closed(
            &|x: &[f64]| f.value(x)[0],
            2,
            &w,
            4.0 / 3.0,
            &Domain::Ball { radius: 1.0 },
            &ClosedNormOptions::default(),
        )
        .unwrap();
        assert_relative_eq!(closed, expect, max_relative = 1e-6);
        let g = GridSpec::new(2, 2.0, 256).unwrap();
        let s = FieldSamples::sample(g, &f).unwrap();
        let sampled = weighted_norm_samples(&s, &w, 4.0 / 3.0, &Domain::Box { half_width: 2.0 }).unwrap();
        assert_relative_eq!(sampled, expect, max_relative = 5e-3);
        let boxed = weighted_norm_closed(
            &|x: &[f64]| f.value(x)[0],
            2,
            &w,
            4.0 / 3.0,
            &Domain::Box { half_width: 0.7 },
            &ClosedNormOptions::default(),
        )
        .unwrap();
        // the box [−0.7, 0.7]² lies inside the unit ball
        let exact = (0.7f64.powf(2.0 - 1.0 / 3.0) * unit_cube_moment(2, -1.0 / 3.0)).powf(0.75);
        assert_relative_eq!(boxed, exact, max_relative = 1e-8);
    }

    #[test]
    fn annulus_log_law() {
        // |g|^q |x|^a = r^{−2} in the plane
        for a in [1e-1, 1e-2, 1e-3] {
            let n = weighted_norm_closed(
                &|x: &[f64]| (x[0] * x[0] + x[1] * x[1]).sqrt().powf(-1.5),
                2,
                &PowerWeight::new(0.0),
                4.0 / 3.0,
                &Domain::Annulus { inner: a, outer: 1.0 },
                &ClosedNormOptions::default(),
            )
            .unwrap();
            assert_relative_eq!(n.powf(4.0 / 3.0), 2.0 * PI * (1.0 / a).ln(), max_relative = 1e-10);
        }
    }

    #[test]
    fn non_integrable_weight_is_rejected() {
        let g = GridSpec::new(2, 1.0, 8).unwrap();
        let s = FieldSamples::zeros(g, 1);
        assert!(matches!(
            weighted_norm_samples(&s, &PowerWeight::new(-2.0), 1.0, &Domain::Box { half_width: 1.0 }),
            Err(Error::NotIntegrable { .. })
        ));
        assert!(weighted_norm_samples(
            &s,
            &PowerWeight::new(-2.0),
            1.0,
            &Domain::Annulus { inner: 0.5, outer: 1.0 }
        )
        .is_ok());
    }

    #[test]
    fn annulus_additivity() {
        let g = GridSpec::new(2, 2.0, 64).unwrap();
        let s = FieldSamples::from_fn(g, 1, |x| vec![1.0 + x[0] * x[1]]);
        let w = PowerWeight::new(-0.5);
        let n = |a, b| weighted_norm_samples(&s, &w, 1.0, &Domain::Annulus { inner: a, outer: b }).unwrap();
        assert_relative_eq!(n(0.3, 0.9) + n(0.9, 1.7), n(0.3, 1.7), max_relative = 1e-12);
    }
}
