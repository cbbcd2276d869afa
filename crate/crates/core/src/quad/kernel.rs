use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{gamma, sphere_area};
use crate::opalg::sampling::random_directions;

/// `γ_{N,ℓ} = π^{ℓ−N/2} Γ((N−ℓ)/2) / Γ(ℓ/2)`
pub fn riesz_constant(dim: usize, ell: f64) -> f64 {
    let n = dim as f64;
    PI.powf(ell - 0.5 * n) * gamma(0.5 * (n - ell)) / gamma(0.5 * ell)
}

/// Convolution kernels `K(x, y) = k(x − y)` of homogeneity `ℓ − N`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum KernelSpec {
    /// `γ_{N,ℓ} |z|^{ℓ−N}`
    Riesz {
        dim: usize,
        ell: f64,
    },
    /// `γ_{N,ℓ} |z|^{ℓ−N} (1 + a z_1/|z|)` with `|a| < 1`.
    Modulated {
        dim: usize,
        ell: f64,
        a: f64,
    },
    Zero {
        dim: usize,
        ell: f64,
    },
}

impl KernelSpec {
    pub fn riesz(dim: usize, ell: f64) -> Result<Self> {
        let k = KernelSpec::Riesz { dim, ell };
        k.validate()?;
        Ok(k)
    }

    pub fn validate(&self) -> Result<()> {
        let (dim, ell) = (self.dim(), self.ell());
        if dim == 0 || !(ell > 0.0 && ell < dim as f64) {
            return Err(Error::arg(format!("kernel needs 0 < ell < N, got ell={ell}, N={dim}")));
        }
        if let KernelSpec::Modulated { a, .. } = self {
            if a.abs() >= 1.0 {
                return Err(Error::arg("modulation must satisfy |a| < 1"));
            }
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        match *self {
            KernelSpec::Riesz { dim, .. } | KernelSpec::Modulated { dim, .. } | KernelSpec::Zero { dim, .. } => dim,
        }
    }

    pub fn ell(&self) -> f64 {
        match *self {
            KernelSpec::Riesz { ell, .. } | KernelSpec::Modulated { ell, .. } | KernelSpec::Zero { ell, .. } => ell,
        }
    }

    pub fn gamma(&self) -> f64 {
        riesz_constant(self.dim(), self.ell())
    }

    /// `k(z)` for `z ≠ 0`.
    pub fn eval(&self, z: &[f64]) -> f64 {
        let r = z.iter().map(|t| t * t).sum::<f64>().sqrt();
        let base = || self.gamma() * r.powf(self.ell() - self.dim() as f64);
        match *self {
            KernelSpec::Riesz { .. } => base(),
            KernelSpec::Modulated { a, .. } => base() * (1.0 + a * z[0] / r),
            KernelSpec::Zero { .. } => 0.0,
        }
    }

    /// Exact integral of `k` over the ball with the volume of a cube of
    /// side `h`; the angular factor of the modulated kernel averages to 1.
    pub fn singular_cell(&self, h: f64) -> f64 {
        match self {
            KernelSpec::Zero { .. } => 0.0,
            _ => {
                let dim = self.dim();
                let rho = crate::numerics::equal_volume_radius(dim, h);
                self.gamma() * sphere_area(dim) * rho.powf(self.ell()) / self.ell()
            }
        }
    }

    /// Declared constants for `|K| <= C_a |x−y|^{ℓ−N}` and
    /// `|K(x,y) − K(x,0)| <= C_b |y| |x|^{ℓ−N−1}` when `2|y| <= |x|`.
    pub fn declared_constants(&self) -> (f64, f64) {
        let (n, ell, g) = (self.dim() as f64, self.ell(), self.gamma());
        let shell = 2f64.powf(n + 1.0 - ell);
        match *self {
            KernelSpec::Riesz { .. } => (g, g * (n - ell) * shell),
            KernelSpec::Modulated { a, .. } => {
                let a = a.abs();
                (g * (1.0 + a), g * shell * ((n - ell) * (1.0 + a) + a))
            }
            KernelSpec::Zero { .. } => (0.0, 0.0),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KernelRegularityReport {
    /// `sup |K(x,y)| |x−y|^{N−ℓ}`
    pub size_constant: f64,
    /// `sup |K(x,y) − K(x,0)| |x|^{N+1−ℓ} / |y|` over `2|y| <= |x|`
    pub smoothness_constant: f64,
    pub declared_size: f64,
    pub declared_smoothness: f64,
    pub pairs: usize,
    pub pass: bool,
}

/// Empirical kernel constants over seeded pairs with `2|y| <= |x|`.
pub fn kernel_regularity_check(kernel: &KernelSpec, pairs: usize, seed: u64) -> Result<KernelRegularityReport> {
    kernel.validate()?;
    let dim = kernel.dim();
    let n = dim as f64;
    let ell = kernel.ell();
    let dirs_x = random_directions(dim, pairs, seed);
    let dirs_y = random_directions(dim, pairs, seed.wrapping_add(1));
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(2));
    let (mut ka, mut kb) = (0.0f64, 0.0f64);
    for (dx, dy) in dirs_x.iter().zip(&dirs_y) {
        let rx = 10f64.powf(rng.random_range(-2.0..2.0));
        let ry = rx * 0.5 * rng.random_range(1e-3..1.0f64);
        let x: Vec<f64> = dx.iter().map(|t| t * rx).collect();
        let y: Vec<f64> = dy.iter().map(|t| t * ry).collect();
        let z: Vec<f64> = x.iter().zip(&y).map(|(a, b)| a - b).collect();
        let rz = z.iter().map(|t| t * t).sum::<f64>().sqrt();
        if rz == 0.0 {
            return Err(Error::arg("kernel evaluated on the diagonal x = y"));
        }
        let kxy = kernel.eval(&z);
        let kx0 = kernel.eval(&x);
        ka = ka.max(kxy.abs() * rz.powf(n - ell));
        kb = kb.max((kxy - kx0).abs() * rx.powf(n + 1.0 - ell) / ry);
    }
    let (da, db) = kernel.declared_constants();
    let slack = 1e-12;
    Ok(KernelRegularityReport {
        size_constant: ka,
        smoothness_constant: kb,
        declared_size: da,
        declared_smoothness: db,
        pairs,
        pass: ka <= da * (1.0 + slack) + slack && kb <= db * (1.0 + slack) + slack,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn riesz_constants() {
        assert_relative_eq!(riesz_constant(2, 1.0), 1.0, max_relative = 1e-14);
        // N=3, ℓ=2: the Newtonian kernel 1/(4π|x|) has multiplier (2π|ξ|)^{-2},
        // so the multiplier |ξ|^{-2} belongs to 4π²/(4π|x|) = π/|x|
        assert_relative_eq!(riesz_constant(3, 2.0), PI, max_relative = 1e-14);
    }

    #[test]
    fn riesz_regularity_constants() {
        let k = KernelSpec::riesz(2, 1.0).unwrap();
        let r = kernel_regularity_check(&k, 2000, 4).unwrap();
        assert_relative_eq!(r.size_constant, 1.0, max_relative = 1e-12);
        assert_eq!(r.declared_smoothness, 4.0);
        assert!(r.smoothness_constant < 4.0 && r.pass);
    }

    #[test]
    fn modulated_and_zero_kernels() {
        let k = KernelSpec::Modulated {
            dim: 3,
            ell: 1.5,
            a: 0.5,
        };
        assert!(kernel_regularity_check(&k, 2000, 5).unwrap().pass);
        let z = KernelSpec::Zero { dim: 2, ell: 1.0 };
        let r = kernel_regularity_check(&z, 100, 5).unwrap();
        assert_eq!((r.size_constant, r.smoothness_constant), (0.0, 0.0));
        assert!(KernelSpec::riesz(2, 2.0).is_err());
    }
}
