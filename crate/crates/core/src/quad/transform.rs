//! Fourier multipliers on the periodic grid: Riesz transforms and spectral
//! derivatives. Frequencies are `ξ = k / (2L)` (cycles per unit length).

use num_complex::Complex64;

use super::fft::{fft_nd, freq_index, Direction};
use super::grid::{FieldSamples, GridSpec};
use crate::error::{Error, Result};

/// Applies `m(ξ)` to a scalar sample array. Modes at the Nyquist index of
/// any axis are dropped so real input stays real.
pub fn apply_multiplier(grid: &GridSpec, values: &[f64], m: impl Fn(&[f64]) -> Complex64) -> Vec<f64> {
    let n = grid.n;
    let shape = vec![n; grid.dim];
    let mut buf: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    fft_nd(&mut buf, &shape, Direction::Forward);
    let period = 2.0 * grid.half_width;
    let mut xi = vec![0.0; grid.dim];
    for (p, c) in buf.iter_mut().enumerate() {
        let idx = grid.multi(p);
        if idx.contains(&(n / 2)) {
            *c = Complex64::new(0.0, 0.0);
            continue;
        }
        for (x, &k) in xi.iter_mut().zip(&idx) {
            *x = freq_index(k, n) as f64 / period;
        }
        *c *= m(&xi);
    }
    fft_nd(&mut buf, &shape, Direction::Inverse);
    let scale = 1.0 / grid.len() as f64;
    buf.iter().map(|c| c.re * scale).collect()
}

fn scalar_values(u: &FieldSamples) -> Result<&[f64]> {
    if u.fiber != 1 {
        return Err(Error::DimensionMismatch {
            expected: 1,
            got: u.fiber,
        });
    }
    Ok(&u.values)
}

/// `R_j u` with multiplier `−i ξ_j / |ξ|`, zero mode set to 0.
pub fn riesz_transform(u: &FieldSamples, axis: usize) -> Result<FieldSamples> {
    let v = scalar_values(u)?;
    if axis >= u.grid.dim {
        return Err(Error::arg(format!("axis {axis} out of range for N={}", u.grid.dim)));
    }
    let out = apply_multiplier(&u.grid, v, |xi| {
        let r = xi.iter().map(|t| t * t).sum::<f64>().sqrt();
        if r == 0.0 {
            Complex64::new(0.0, 0.0)
        } else {
            Complex64::new(0.0, -xi[axis] / r)
        }
    });
    FieldSamples::from_scalar(u.grid, out)
}

/// `∂_j u` with multiplier `2πi ξ_j`.
pub fn spectral_derivative(u: &FieldSamples, axis: usize) -> Result<FieldSamples> {
    let v = scalar_values(u)?;
    if axis >= u.grid.dim {
        return Err(Error::arg(format!("axis {axis} out of range for N={}", u.grid.dim)));
    }
    let out = apply_multiplier(&u.grid, v, |xi| {
        Complex64::new(0.0, 2.0 * std::f64::consts::PI * xi[axis])
    });
    FieldSamples::from_scalar(u.grid, out)
}

/// Grid mean of a scalar sample array.
pub fn mean(u: &FieldSamples) -> f64 {
    u.values.iter().sum::<f64>() / u.values.len() as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn mode(grid: GridSpec, k: &[i64]) -> FieldSamples {
        let period = 2.0 * grid.half_width;
        FieldSamples::from_fn(grid, 1, |x| {
            let t: f64 = x
                .iter()
                .zip(k)
                .map(|(xi, &ki)| 2.0 * PI * ki as f64 * xi / period)
                .sum();
            vec![t.cos()]
        })
    }

    #[test]
    fn single_mode_is_scaled() {
        let g = GridSpec::new(2, 1.0, 32).unwrap();
        let k = [3i64, -4];
        let u = mode(g, &k);
        let r0 = riesz_transform(&u, 0).unwrap();
        // cos(θ) ↦ (−i k_j/|k|)·cos mode = (k_j/|k|)·sin(θ)
        let period = 2.0;
        for i in [0, 5, 100, 777] {
            let x = g.coords(i);
            let t: f64 = x
                .iter()
                .zip(&k)
                .map(|(xi, &ki)| 2.0 * PI * ki as f64 * xi / period)
                .sum();
            assert!((r0.values[i] - 0.6 * t.sin()).abs() < 1e-12);
        }
    }

    #[test]
    fn riesz_squares_sum_to_minus_identity() {
        let g = GridSpec::new(2, 1.0, 32).unwrap();
        let u = FieldSamples::from_scalar(
            g,
            mode(g, &[1, 2])
                .values
                .iter()
                .zip(&mode(g, &[-5, 3]).values)
                .map(|(a, b)| a + 0.3 * b)
                .collect(),
        )
        .unwrap();
        let mut acc = vec![0.0; g.len()];
        for j in 0..2 {
            let r = riesz_transform(&riesz_transform(&u, j).unwrap(), j).unwrap();
            for (a, v) in acc.iter_mut().zip(&r.values) {
                *a += v;
            }
        }
        let err: f64 = acc
            .iter()
            .zip(&u.values)
            .map(|(a, b)| (a + b).powi(2))
            .sum::<f64>()
            .sqrt();
        let norm: f64 = u.values.iter().map(|v| v * v).sum::<f64>().sqrt();
        assert!(err / norm < 1e-12);
    }

    #[test]
    fn spectral_derivative_of_mode() {
        let g = GridSpec::new(1, 1.0, 16).unwrap();
        let u = mode(g, &[2]);
        let d = spectral_derivative(&u, 0).unwrap();
        for i in 0..16 {
            let x = g.coords(i)[0];
            assert!((d.values[i] + 2.0 * PI * (2.0 * PI * x).sin()).abs() < 1e-11);
        }
    }
}
