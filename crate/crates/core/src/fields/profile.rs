//! Radial profiles of the plateau function `ψ` (`ψ̂ = 1` on `B(0,1)`,
//! `ψ̂ = 0` outside `B(0,PLATEAU_OUTER)`) and of `K ∗ ψ` for the Riesz kernel.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::numerics::{gauss_legendre, hankel_kernel, sphere_area};
use crate::quad::riesz_constant;

/// `e^{−1/t} / (e^{−1/t} + e^{−1/(1−t)})`, rising smoothly from 0 to 1.
pub fn smooth_step(t: f64) -> f64 {
    if t <= 0.0 {
        0.0
    } else if t >= 1.0 {
        1.0
    } else {
        let a = (-1.0 / t).exp();
        let b = (-1.0 / (1.0 - t)).exp();
        a / (a + b)
    }
}

/// Outer radius of the transition band of `ψ̂`.
pub const PLATEAU_OUTER: f64 = 1.1;

/// Radial multiplier `ψ̂(ρ)`: 1 for `ρ <= 1`, 0 for `ρ >= PLATEAU_OUTER`.
pub fn plateau(rho: f64) -> f64 {
    smooth_step((PLATEAU_OUTER - rho) / (PLATEAU_OUTER - 1.0))
}

const TABLE_STEP: f64 = 0.02;
const STENCIL: usize = 8;

/// Tabulated `ψ(r)` and `G(r) = (K ∗ ψ)(r)` on `[0, R₀]`; beyond `R₀`
/// `ψ` and `G − K` are below `1e-7` relative to their values at the origin.
#[derive(Clone, Debug)]
pub struct PlateauProfile {
    pub dim: usize,
    pub ell: f64,
    pub gamma: f64,
    pub cutoff: f64,
    psi: Vec<f64>,
    g: Vec<f64>,
}

/// GL nodes on `[0, PLATEAU_OUTER]` (weights times `ψ̂`) resolving `hankel(ρ, r)` for
/// `r <= r_max`; the first panel is graded toward `ρ = 0`.
fn plateau_nodes(r_max: f64) -> Vec<(f64, f64)> {
    let width = (1.0 / r_max.max(1.0)).min(0.05);
    let panels = (PLATEAU_OUTER / width).ceil() as usize;
    let width = PLATEAU_OUTER / panels as f64;
    let rule = gauss_legendre(16);
    let mut out = Vec::new();
    let mut push = |a: f64, b: f64| {
        let (m, h) = (0.5 * (a + b), 0.5 * (b - a));
        for &(x, w) in rule {
            let rho = m + h * x;
            out.push((rho, w * h * plateau(rho)));
        }
    };
    let mut hi = width;
    while hi > 1e-14 {
        push(0.1 * hi, hi);
        hi *= 0.1;
    }
    for p in 1..panels {
        push(p as f64 * width, (p + 1) as f64 * width);
    }
    out
}

/// `(∫ ψ̂ hankel, ∫ ρ^{−ℓ} ψ̂ hankel)` at radius `r`.
fn hankel_pair(dim: usize, ell: f64, nodes: &[(f64, f64)], r: f64) -> (f64, f64) {
    let (mut a, mut b) = (0.0, 0.0);
    for &(rho, w) in nodes {
        let k = w * hankel_kernel(dim, rho, r);
        a += k;
        b += k * rho.powf(-ell);
    }
    (a, b)
}

fn profile_cache() -> &'static Mutex<HashMap<(usize, u64), Arc<PlateauProfile>>> {
    static CACHE: OnceLock<Mutex<HashMap<(usize, u64), Arc<PlateauProfile>>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

impl PlateauProfile {
    pub fn new(dim: usize, ell: f64) -> Result<Self> {
        if !(1..=3).contains(&dim) || !(ell > 0.0 && ell < dim as f64) {
            return Err(Error::arg(format!(
                "profile needs N in 1..=3 and 0 < ell < N, got N={dim}, ell={ell}"
            )));
        }
        let gamma = riesz_constant(dim, ell);
        let kernel = |r: f64| gamma * r.powf(ell - dim as f64);
        // the kernel multiplier |ξ|^{−ℓ} contributes ρ^{−ℓ}; hankel_kernel carries ρ^{N−1}
        let probe_nodes = plateau_nodes(200.0);
        let psi0 = hankel_pair(dim, ell, &probe_nodes, 0.0).0.abs();
        let mut cutoff = 10.0;
        loop {
            let quiet = (0..8).all(|k| {
                let r = cutoff + k as f64 * 0.125;
                let (p, g) = hankel_pair(dim, ell, &probe_nodes, r);
                p.abs() < 1e-14 * psi0 && (g - kernel(r)).abs() < 1e-13 * kernel(r)
            });
            if quiet || cutoff >= 200.0 {
                break;
            }
            cutoff += 5.0;
        }
        let nodes = plateau_nodes(cutoff + 1.0);
        let count = (cutoff / TABLE_STEP).round() as usize + STENCIL;
        let pairs: Vec<(f64, f64)> = (0..count)
            .into_par_iter()
            .map(|i| hankel_pair(dim, ell, &nodes, i as f64 * TABLE_STEP))
            .collect();
        let (psi, g) = pairs.into_iter().unzip();
        Ok(PlateauProfile {
            dim,
            ell,
            gamma,
            cutoff,
            psi,
            g,
        })
    }

    /// Process-wide shared instance.
    pub fn shared(dim: usize, ell: f64) -> Result<Arc<Self>> {
        let key = (dim, ell.to_bits());
        if let Some(p) = profile_cache().lock().expect("cache lock").get(&key) {
            return Ok(p.clone());
        }
        let p = Arc::new(Self::new(dim, ell)?);
        profile_cache().lock().expect("cache lock").insert(key, p.clone());
        Ok(p)
    }

    fn interp(table: &[f64], r: f64) -> f64 {
        // radial profiles are even in r; Lagrange on an 8-point stencil
        let t = r / TABLE_STEP;
        let base = t.floor() as i64 - (STENCIL as i64 / 2 - 1);
        let mut s = 0.0;
        for a in 0..STENCIL as i64 {
            let ia = base + a;
            let mut l = 1.0;
            for b in 0..STENCIL as i64 {
                if b != a {
                    l *= (t - (base + b) as f64) / (a - b) as f64;
                }
            }
            s += l * table[ia.unsigned_abs() as usize];
        }
        s
    }

    /// `ψ(r)`
    pub fn psi(&self, r: f64) -> f64 {
        let r = r.abs();
        if r >= self.cutoff {
            0.0
        } else {
            Self::interp(&self.psi, r)
        }
    }

    /// `(K ∗ ψ)(r)`
    pub fn g(&self, r: f64) -> f64 {
        let r = r.abs();
        if r >= self.cutoff {
            self.kernel(r)
        } else {
            Self::interp(&self.g, r)
        }
    }

    /// `K(r) = γ r^{ℓ−N}`
    pub fn kernel(&self, r: f64) -> f64 {
        self.gamma * r.powf(self.ell - self.dim as f64)
    }

    /// `p_λ(r) = λ^N ψ(λr) − λ^{−N} ψ(r/λ)`
    pub fn p_lambda(&self, lambda: f64, r: f64) -> f64 {
        let n = self.dim as i32;
        lambda.powi(n) * self.psi(lambda * r) - lambda.powi(-n) * self.psi(r / lambda)
    }

    /// `(K ∗ p_λ)(r) = λ^{N−ℓ} G(λr) − λ^{ℓ−N} G(r/λ)`
    pub fn k_conv_p_lambda(&self, lambda: f64, r: f64) -> f64 {
        let e = self.dim as f64 - self.ell;
        lambda.powf(e) * self.g(lambda * r) - lambda.powf(-e) * self.g(r / lambda)
    }

    /// GL nodes on `[0, cutoff·λ]` resolving both the `λr` and `r/λ` scales.
    pub fn radial_nodes(&self, lambda: f64) -> Vec<(f64, f64)> {
        let lambda = lambda.max(1.0);
        let fine = 0.05 / lambda;
        let inner = self.cutoff / lambda;
        let outer = self.cutoff * lambda;
        let mut breaks = Vec::new();
        let mut r = 0.0;
        while r < outer {
            breaks.push(r);
            let w = if r < inner {
                fine
            } else {
                (0.1 * r).clamp(fine, 0.05 * lambda)
            };
            r += w;
        }
        breaks.push(outer);
        let rule = gauss_legendre(8);
        breaks
            .windows(2)
            .flat_map(|p| {
                let (m, h) = (0.5 * (p[0] + p[1]), 0.5 * (p[1] - p[0]));
                rule.iter().map(move |&(x, w)| (m + h * x, w * h))
            })
            .collect()
    }

    /// `∫ |g(|x|)| dx` for radial `g` supported where the nodes reach.
    pub fn radial_l1(&self, lambda: f64, g: impl Fn(f64) -> f64 + Sync) -> f64 {
        let nodes = self.radial_nodes(lambda);
        let area = sphere_area(self.dim);
        let d = self.dim as i32 - 1;
        crate::numerics::stable_par_sum(nodes.len(), |i| {
            let (r, w) = nodes[i];
            w * area * r.powi(d) * g(r).abs()
        })
    }

    pub fn psi_l1(&self) -> f64 {
        self.radial_l1(1.0, |r| self.psi(r))
    }

    pub fn p_lambda_l1(&self, lambda: f64) -> f64 {
        self.radial_l1(lambda, |r| self.p_lambda(lambda, r))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn step_is_smooth_and_complementary() {
        for t in [0.1, 0.3, 0.5, 0.77] {
            assert_relative_eq!(smooth_step(t) + smooth_step(1.0 - t), 1.0, max_relative = 1e-14);
        }
        assert_eq!(plateau(0.5), 1.0);
        assert_eq!(plateau(2.5), 0.0);
    }

    #[test]
    fn psi_has_unit_mass_and_g_tends_to_kernel() {
        let p = PlateauProfile::shared(2, 1.0).unwrap();
        // ∫ψ = ψ̂(0) = 1
        let nodes = p.radial_nodes(1.0);
        let mass: f64 = nodes
            .iter()
            .map(|(r, w)| w * 2.0 * std::f64::consts::PI * r * p.psi(*r))
            .sum();
        assert_relative_eq!(mass, 1.0, max_relative = 1e-6);
        assert!(p.cutoff <= 200.0);
        assert_relative_eq!(p.g(p.cutoff * 0.999), p.kernel(p.cutoff * 0.999), max_relative = 1e-6);
        // interpolation against direct evaluation at off-table radii
        let nodes = plateau_nodes(10.0);
        for r in [0.013, 0.731, 3.3333] {
            let (psi, g) = hankel_pair(2, 1.0, &nodes, r);
            assert_relative_eq!(p.psi(r), psi, epsilon = 1e-8);
            assert_relative_eq!(p.g(r), g, epsilon = 1e-8);
        }
    }

    #[test]
    fn p_lambda_vanishes_at_one() {
        let p = PlateauProfile::shared(2, 1.0).unwrap();
        assert_eq!(p.p_lambda(1.0, 0.37), 0.0);
        assert_eq!(p.k_conv_p_lambda(1.0, 0.37), 0.0);
        let bound = 2.0 * p.psi_l1();
        for lambda in [2.0, 4.0] {
            assert!(p.p_lambda_l1(lambda) <= bound * (1.0 + 1e-6));
        }
    }
}
