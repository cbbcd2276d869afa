//! Band-limited grid fields built on the Fourier side.

use std::collections::HashMap;
use std::sync::{Mutex, OnceLock};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::profile::plateau;
use crate::error::{Error, Result};
use crate::quad::fft::{fft_nd, freq_index, Direction};
use crate::quad::{FieldSamples, GridSpec};

/// Samples of a periodic field whose spectrum is known in closed form.
#[derive(Clone, Debug)]
pub struct BandLimitedField {
    pub samples: FieldSamples,
    /// Scalar profile before tensoring with the witness vector.
    pub profile: FieldSamples,
    pub lambda: f64,
    /// Spectral annulus `inner <= |ξ| <= outer` carrying the profile.
    pub support: (f64, f64),
    pub witness: Vec<f64>,
}

fn frequencies(grid: &GridSpec) -> impl Fn(usize) -> Vec<f64> + '_ {
    let period = 2.0 * grid.half_width;
    move |p| {
        grid.multi(p)
            .iter()
            .map(|&k| freq_index(k, grid.n) as f64 / period)
            .collect()
    }
}

/// Grid samples of the periodic field with Fourier transform `m(|ξ|)`.
pub fn synthesize_radial(grid: &GridSpec, m: impl Fn(f64) -> f64) -> FieldSamples {
    let freq = frequencies(grid);
    let vol = (2.0 * grid.half_width).powi(grid.dim as i32);
    let mut spec: Vec<Complex64> = (0..grid.len())
        .map(|p| {
            let xi = freq(p);
            let r = xi.iter().map(|t| t * t).sum::<f64>().sqrt();
            Complex64::new(m(r) / vol, 0.0)
        })
        .collect();
    fft_nd(&mut spec, &vec![grid.n; grid.dim], Direction::Inverse);
    // FFT index q is the point q h; the grid puts the origin at node n/2
    let values = spec.iter().map(|c| c.re).collect();
    unshift(grid, values)
}

/// Reorders samples from FFT order (index 0 at the origin) to grid order.
fn unshift(grid: &GridSpec, fft_order: Vec<f64>) -> FieldSamples {
    let half = grid.n / 2;
    let mut out = vec![0.0; grid.len()];
    for (p, v) in fft_order.into_iter().enumerate() {
        let idx: Vec<usize> = grid.multi(p).iter().map(|&k| (k + half) % grid.n).collect();
        out[grid.flat(&idx)] = v;
    }
    FieldSamples::from_scalar(*grid, out).expect("length matches grid")
}

/// Fourier coefficients `f̂(ξ_k)` (periodic, box-normalized) of a scalar
/// grid field, paired with `|ξ_k|`.
pub fn spectrum(u: &FieldSamples) -> Vec<(f64, Complex64)> {
    let grid = u.grid;
    let half = grid.n / 2;
    let mut buf = vec![Complex64::new(0.0, 0.0); grid.len()];
    for i in 0..grid.len() {
        let idx: Vec<usize> = grid.multi(i).iter().map(|&k| (k + half) % grid.n).collect();
        buf[grid.flat(&idx)] = Complex64::new(u.values[i * u.fiber], 0.0);
    }
    fft_nd(&mut buf, &vec![grid.n; grid.dim], Direction::Forward);
    let freq = frequencies(&grid);
    let vol = grid.cell_volume();
    buf.iter()
        .enumerate()
        .map(|(p, c)| {
            let r = freq(p).iter().map(|t| t * t).sum::<f64>().sqrt();
            (r, c * vol)
        })
        .collect()
}

/// `u_λ = p_λ ⊗ f` with `p̂_λ(ξ) = ψ̂(ξ/λ) − ψ̂(λξ)`.
pub fn p_lambda_family(grid: GridSpec, lambda: f64, witness: &[f64]) -> Result<BandLimitedField> {
    if lambda < 1.0 {
        return Err(Error::arg(format!("lambda must be >= 1, got {lambda}")));
    }
    let nyquist = grid.n as f64 / (4.0 * grid.half_width);
    if 2.0 * lambda >= nyquist {
        return Err(Error::arg(format!(
            "lambda = {lambda} needs spectral radius {} but the grid resolves |ξ| < {nyquist}",
            2.0 * lambda
        )));
    }
    if witness.is_empty() {
        return Err(Error::arg("witness vector is empty"));
    }
    let profile = synthesize_radial(&grid, |r| plateau(r / lambda) - plateau(lambda * r));
    let comps: Vec<Vec<f64>> = witness
        .iter()
        .map(|&w| profile.values.iter().map(|v| v * w).collect())
        .collect();
    Ok(BandLimitedField {
        samples: FieldSamples::from_components(grid, &comps)?,
        profile,
        lambda,
        support: (1.0 / lambda, 2.0 * lambda),
        witness: witness.to_vec(),
    })
}

impl BandLimitedField {
    /// `Σ h^N |p_λ|`
    pub fn profile_l1(&self) -> f64 {
        self.profile.values.iter().map(|v| v.abs()).sum::<f64>() * self.profile.grid.cell_volume()
    }

    /// Largest Fourier modulus strictly inside `|ξ| < 1/λ`.
    pub fn low_mode_max(&self) -> f64 {
        spectrum(&self.profile)
            .into_iter()
            .filter(|(r, _)| *r < self.support.0)
            .map(|(_, c)| c.norm())
            .fold(0.0, f64::max)
    }
}

fn psi_cache() -> &'static Mutex<HashMap<(usize, usize, u64), f64>> {
    static CACHE: OnceLock<Mutex<HashMap<(usize, usize, u64), f64>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// `‖ψ‖₁` of the grid realization of `ψ`, cached per grid.
pub fn psi_l1_on_grid(grid: &GridSpec) -> f64 {
    let key = (grid.dim, grid.n, grid.half_width.to_bits());
    if let Some(v) = psi_cache().lock().expect("cache lock").get(&key) {
        return *v;
    }
    let psi = synthesize_radial(grid, plateau);
    let v = psi.values.iter().map(|v| v.abs()).sum::<f64>() * grid.cell_volume();
    psi_cache().lock().expect("cache lock").insert(key, v);
    v
}

/// Real periodic field with random coefficients on integer modes
/// `0 < |k|_∞ <= max_mode`.
pub fn random_band_limited(grid: GridSpec, max_mode: usize, seed: u64) -> Result<FieldSamples> {
    if 2 * max_mode >= grid.n {
        return Err(Error::arg(format!("max_mode {max_mode} needs n > {}", 2 * max_mode)));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let period = 2.0 * grid.half_width;
    let side = 2 * max_mode + 1;
    let mut modes = Vec::new();
    for p in 0..side.pow(grid.dim as u32) {
        let mut t = p;
        let k: Vec<i64> = (0..grid.dim)
            .map(|_| {
                let v = (t % side) as i64 - max_mode as i64;
                t /= side;
                v
            })
            .collect();
        // one representative per ±k pair
        if k.iter().all(|&v| v == 0) || k.iter().find(|&&v| v != 0).is_some_and(|&v| v < 0) {
            continue;
        }
        let a: f64 = rng.random_range(-1.0..1.0);
        let b: f64 = rng.random_range(-1.0..1.0);
        modes.push((k, a, b));
    }
    Ok(FieldSamples::from_fn(grid, 1, |x| {
        let mut s = 0.0;
        for (k, a, b) in &modes {
            let t: f64 =
                x.iter().zip(k).map(|(xi, &ki)| ki as f64 * xi).sum::<f64>() * 2.0 * std::f64::consts::PI / period;
            s += a * t.cos() + b * t.sin();
        }
        vec![s]
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::PlateauProfile;
    use approx::assert_relative_eq;

    #[test]
    fn lambda_one_is_zero() {
        let g = GridSpec::new(2, 16.0, 256).unwrap();
        let f = p_lambda_family(g, 1.0, &[0.0, 1.0]).unwrap();
        assert!(f.samples.max_abs() == 0.0);
    }

    #[test]
    fn low_modes_vanish_and_l1_bound_holds() {
        let g = GridSpec::new(2, 16.0, 512).unwrap();
        let psi = psi_l1_on_grid(&g);
        for lambda in [2.0, 3.0] {
            let f = p_lambda_family(g, lambda, &[0.0, 1.0]).unwrap();
            assert!(f.low_mode_max() <= 1e-10);
            assert!(f.profile_l1() <= 2.0 * psi * (1.0 + 1e-2));
        }
        assert!(p_lambda_family(g, 4.0, &[1.0]).is_err());
    }

    #[test]
    fn grid_psi_matches_radial_profile() {
        let g = GridSpec::new(2, 64.0, 512).unwrap();
        let psi = synthesize_radial(&g, plateau);
        let p = PlateauProfile::shared(2, 1.0).unwrap();
        for i in [g.origin_index(), g.origin_index() + 3, g.origin_index() + 5 * 512 + 2] {
            let x = g.coords(i);
            let r = x.iter().map(|t| t * t).sum::<f64>().sqrt();
            assert_relative_eq!(psi.values[i], p.psi(r), epsilon = 1e-6);
        }
    }

    #[test]
    fn random_field_is_real_and_mean_free() {
        let g = GridSpec::new(2, 1.0, 32).unwrap();
        let u = random_band_limited(g, 4, 7).unwrap();
        assert!(u.values.iter().sum::<f64>().abs() < 1e-10);
        assert!(u.max_abs() > 0.1);
    }
}
