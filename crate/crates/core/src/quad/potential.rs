use num_complex::Complex64;
use rayon::prelude::*;

use super::fft::{fft_nd, Direction};
use super::grid::{FieldSamples, GridSpec};
use super::kernel::KernelSpec;
use crate::error::{Error, Result};
use crate::fields::ClosedFormField;

/// Input to a potential evaluation.
pub enum Source<'a> {
    Field(&'a ClosedFormField, GridSpec),
    Samples(&'a FieldSamples),
}

/// Nonzero nodes of a sampled field: coordinates and fiber values.
pub struct SourceNodes {
    pub dim: usize,
    pub fiber: usize,
    pub h: f64,
    pub coords: Vec<Vec<f64>>,
    pub values: Vec<Vec<f64>>,
}

impl SourceNodes {
    pub fn from_samples(s: &FieldSamples) -> Self {
        let mut coords = Vec::new();
        let mut values = Vec::new();
        for i in 0..s.grid.len() {
            let v = s.at(i);
            if v.iter().any(|t| *t != 0.0) {
                coords.push(s.grid.coords(i));
                values.push(v.to_vec());
            }
        }
        SourceNodes {
            dim: s.grid.dim,
            fiber: s.fiber,
            h: s.grid.h(),
            coords,
            values,
        }
    }

    /// Midpoint-rule `Σ h^N k(x − y_i) f_i`, with the cell of a coinciding
    /// node replaced by the singular-cell integral.
    pub fn potential_at(&self, kernel: &KernelSpec, x: &[f64]) -> Vec<f64> {
        let vol = self.h.powi(self.dim as i32);
        let sing = kernel.singular_cell(self.h);
        let tol2 = (1e-9 * self.h).powi(2);
        let mut out = vec![0.0; self.fiber];
        let mut z = vec![0.0; self.dim];
        for (y, v) in self.coords.iter().zip(&self.values) {
            let mut d2 = 0.0;
            for k in 0..self.dim {
                z[k] = x[k] - y[k];
                d2 += z[k] * z[k];
            }
            let w = if d2 <= tol2 { sing } else { vol * kernel.eval(&z) };
            for (o, vi) in out.iter_mut().zip(v) {
                *o += w * vi;
            }
        }
        out
    }

    /// `Σ h^N |f_i| |y_i|^a`-type moments: `Σ h^N g(y_i, f_i)`.
    pub fn integrate(&self, g: impl Fn(&[f64], &[f64]) -> f64) -> f64 {
        let vol = self.h.powi(self.dim as i32);
        self.coords.iter().zip(&self.values).map(|(y, v)| vol * g(y, v)).sum()
    }
}

/// Potential at arbitrary points (inside the grid box).
pub fn riesz_potential(source: Source<'_>, kernel: &KernelSpec, points: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
    kernel.validate()?;
    let owned;
    let samples = match source {
        Source::Samples(s) => s,
        Source::Field(f, g) => {
            owned = FieldSamples::sample(g, f)?;
            &owned
        }
    };
    if samples.grid.dim != kernel.dim() {
        return Err(Error::DimensionMismatch {
            expected: kernel.dim(),
            got: samples.grid.dim,
        });
    }
    for p in points {
        if !samples.grid.contains(p) {
            return Err(Error::OutsideGrid {
                point: p.clone(),
                half_width: samples.grid.half_width,
            });
        }
    }
    let nodes = SourceNodes::from_samples(samples);
    Ok(points.par_iter().map(|p| nodes.potential_at(kernel, p)).collect())
}

/// Potential at every grid node via zero-padded FFT convolution; the same
/// discrete sum as [`SourceNodes::potential_at`].
pub fn potential_on_grid(samples: &FieldSamples, kernel: &KernelSpec) -> Result<FieldSamples> {
    kernel.validate()?;
    let g = samples.grid;
    if g.dim != kernel.dim() {
        return Err(Error::DimensionMismatch {
            expected: kernel.dim(),
            got: g.dim,
        });
    }
    let n = g.n;
    let m = 2 * n;
    let shape = vec![m; g.dim];
    let total = m.pow(g.dim as u32);
    let h = g.h();
    let vol = g.cell_volume();
    let sing = kernel.singular_cell(h);
    let unflat = |mut p: usize| {
        let mut idx = vec![0usize; g.dim];
        for k in (0..g.dim).rev() {
            idx[k] = p % m;
            p /= m;
        }
        idx
    };
    let mut kern: Vec<Complex64> = (0..total)
        .into_par_iter()
        .map(|p| {
            let idx = unflat(p);
            if idx.iter().all(|&i| i == 0) {
                return Complex64::new(sing, 0.0);
            }
            let z: Vec<f64> = idx
                .iter()
                .map(|&i| {
                    let o = if i < n { i as i64 } else { i as i64 - m as i64 };
                    o as f64 * h
                })
                .collect();
            Complex64::new(vol * kernel.eval(&z), 0.0)
        })
        .collect();
    fft_nd(&mut kern, &shape, Direction::Forward);
    let mut comps = Vec::with_capacity(samples.fiber);
    for c in 0..samples.fiber {
        let comp = samples.component(c);
        if comp.iter().all(|v| *v == 0.0) {
            comps.push(vec![0.0; g.len()]);
            continue;
        }
        let mut buf = vec![Complex64::new(0.0, 0.0); total];
        for (i, v) in comp.iter().enumerate() {
            let idx = g.multi(i);
            let p = idx.iter().fold(0, |acc, &k| acc * m + k);
            buf[p] = Complex64::new(*v, 0.0);
        }
        fft_nd(&mut buf, &shape, Direction::Forward);
        buf.par_iter_mut().zip(kern.par_iter()).for_each(|(a, b)| *a *= b);
        fft_nd(&mut buf, &shape, Direction::Inverse);
        let scale = 1.0 / total as f64;
        comps.push(
            (0..g.len())
                .map(|i| {
                    let idx = g.multi(i);
                    let p = idx.iter().fold(0, |acc, &k| acc * m + k);
                    buf[p].re * scale
                })
                .collect(),
        );
    }
    FieldSamples::from_components(g, &comps)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::ball_indicator;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    #[test]
    fn indicator_at_origin_is_two_pi() {
        let f = ball_indicator(2, &[0.0, 0.0], 1.0);
        let k = KernelSpec::riesz(2, 1.0).unwrap();
        let g = GridSpec::new(2, 2.0, 256).unwrap();
        let v = riesz_potential(Source::Field(&f, g), &k, &[vec![0.0, 0.0]]).unwrap();
        assert_relative_eq!(v[0][0], 2.0 * PI, max_relative = 1e-2);
    }

    #[test]
    fn fft_matches_direct_sum() {
        let f = crate::fields::make_bump(2, &[0.2, -0.1], 0.8, true).unwrap();
        let g = GridSpec::new(2, 1.0, 32).unwrap();
        let s = FieldSamples::sample(g, &f).unwrap();
        let k = KernelSpec::riesz(2, 1.0).unwrap();
        let full = potential_on_grid(&s, &k).unwrap();
        let nodes = SourceNodes::from_samples(&s);
        for i in [0, 17, 300, 527, 1023] {
            let d = nodes.potential_at(&k, &g.coords(i));
            assert_relative_eq!(full.values[i], d[0], max_relative = 1e-10);
        }
    }

    #[test]
    fn zero_field_and_outside_points() {
        let g = GridSpec::new(2, 1.0, 16).unwrap();
        let s = FieldSamples::zeros(g, 1);
        let k = KernelSpec::riesz(2, 1.0).unwrap();
        assert!(potential_on_grid(&s, &k).unwrap().values.iter().all(|v| *v == 0.0));
        assert!(matches!(
            riesz_potential(Source::Samples(&s), &k, &[vec![2.0, 0.0]]),
            Err(Error::OutsideGrid { .. })
        ));
    }
}
