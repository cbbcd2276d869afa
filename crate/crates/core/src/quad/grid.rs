use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fields::ClosedFormField;

/// Origin-centred uniform grid on `[−L, L)^N` with `n` nodes per axis;
/// nodes at `−L + i h`, so the origin is node `n/2` on every axis.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub dim: usize,
    pub half_width: f64,
    pub n: usize,
}

impl GridSpec {
    pub fn new(dim: usize, half_width: f64, n: usize) -> Result<Self> {
        if dim == 0 || dim > 3 {
            return Err(Error::arg(format!("grid dimension must be 1..=3, got {dim}")));
        }
        if n < 2 || !n.is_multiple_of(2) {
            return Err(Error::arg(format!("points per axis must be even and >= 2, got {n}")));
        }
        if !(half_width > 0.0 && half_width.is_finite()) {
            return Err(Error::arg(format!("half width must be positive, got {half_width}")));
        }
        Ok(GridSpec { dim, half_width, n })
    }

    pub fn h(&self) -> f64 {
        2.0 * self.half_width / self.n as f64
    }

    pub fn len(&self) -> usize {
        self.n.pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn cell_volume(&self) -> f64 {
        self.h().powi(self.dim as i32)
    }

    pub fn axis_coord(&self, i: usize) -> f64 {
        -self.half_width + i as f64 * self.h()
    }

    /// Per-axis indices of a flat index (axis 0 slowest).
    pub fn multi(&self, mut flat: usize) -> Vec<usize> {
        let mut out = vec![0; self.dim];
        for k in (0..self.dim).rev() {
            out[k] = flat % self.n;
            flat /= self.n;
        }
        out
    }

    pub fn flat(&self, idx: &[usize]) -> usize {
        idx.iter().fold(0, |acc, &i| acc * self.n + i)
    }

    pub fn coords(&self, flat: usize) -> Vec<f64> {
        self.multi(flat).iter().map(|&i| self.axis_coord(i)).collect()
    }

    pub fn origin_index(&self) -> usize {
        self.flat(&vec![self.n / 2; self.dim])
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.dim && x.iter().all(|v| v.abs() <= self.half_width)
    }

    /// Flat index of a node coinciding with `x` (to 1e-9 h), if any.
    pub fn node_at(&self, x: &[f64]) -> Option<usize> {
        let h = self.h();
        let mut idx = Vec::with_capacity(self.dim);
        for &v in x {
            let t = (v + self.half_width) / h;
            let r = t.round();
            if (t - r).abs() > 1e-9 || r < 0.0 || r >= self.n as f64 {
                return None;
            }
            idx.push(r as usize);
        }
        Some(self.flat(&idx))
    }

    /// Same relative discretization on a box scaled by `s`.
    pub fn scaled(&self, s: f64) -> GridSpec {
        GridSpec {
            half_width: self.half_width * s,
            ..*self
        }
    }
}

/// Samples of a `fiber`-vector field at every node, point-major with the
/// fiber index innermost.
#[derive(Clone, Debug, PartialEq)]
pub struct FieldSamples {
    pub grid: GridSpec,
    pub fiber: usize,
    pub values: Vec<f64>,
}

impl FieldSamples {
    pub fn new(grid: GridSpec, fiber: usize, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() * fiber {
            return Err(Error::DimensionMismatch {
                expected: grid.len() * fiber,
                got: values.len(),
            });
        }
        if let Some(bad) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::arg(format!("non-finite sample at position {bad}")));
        }
        Ok(FieldSamples { grid, fiber, values })
    }

    pub fn zeros(grid: GridSpec, fiber: usize) -> Self {
        FieldSamples {
            grid,
            fiber,
            values: vec![0.0; grid.len() * fiber],
        }
    }

    pub fn from_fn(grid: GridSpec, fiber: usize, f: impl Fn(&[f64]) -> Vec<f64> + Sync) -> Self {
        let values: Vec<f64> = (0..grid.len())
            .into_par_iter()
            .flat_map_iter(|i| {
                let v = f(&grid.coords(i));
                debug_assert_eq!(v.len(), fiber);
                v.into_iter()
            })
            .collect();
        FieldSamples { grid, fiber, values }
    }

    pub fn from_scalar(grid: GridSpec, values: Vec<f64>) -> Result<Self> {
        Self::new(grid, 1, values)
    }

    /// Point samples, or exact cell averages for indicator-type fields.
    pub fn sample(grid: GridSpec, field: &ClosedFormField) -> Result<Self> {
        if field.dim != grid.dim {
            return Err(Error::DimensionMismatch {
                expected: grid.dim,
                got: field.dim,
            });
        }
        let h = grid.h();
        let avg = field.smoothness() == 0;
        Ok(Self::from_fn(grid, field.fiber(), |x| {
            if avg {
                field.cell_average(x, h)
            } else {
                field.value(x)
            }
        }))
    }

    pub fn at(&self, flat: usize) -> &[f64] {
        &self.values[flat * self.fiber..(flat + 1) * self.fiber]
    }

    pub fn component(&self, k: usize) -> Vec<f64> {
        self.values.iter().skip(k).step_by(self.fiber).copied().collect()
    }

    pub fn from_components(grid: GridSpec, comps: &[Vec<f64>]) -> Result<Self> {
        let fiber = comps.len();
        let mut values = vec![0.0; grid.len() * fiber];
        for (k, c) in comps.iter().enumerate() {
            if c.len() != grid.len() {
                return Err(Error::DimensionMismatch {
                    expected: grid.len(),
                    got: c.len(),
                });
            }
            for (i, v) in c.iter().enumerate() {
                values[i * fiber + k] = *v;
            }
        }
        Self::new(grid, fiber, values)
    }

    /// Pointwise Euclidean norms over the fiber.
    pub fn pointwise_norm(&self) -> Vec<f64> {
        self.values
            .chunks(self.fiber)
            .map(|c| c.iter().map(|v| v * v).sum::<f64>().sqrt())
            .collect()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn write_to(&self, mut w: impl Write) -> Result<()> {
        let g = &self.grid;
        let header = format!(
            "FIELDSAMPLES v1\ndim {}\nn {}\nhalf_width {:?}\nspacing {:?}\nfiber {}\nendian little\ndata\n",
            g.dim,
            g.n,
            g.half_width,
            g.h(),
            self.fiber
        );
        let io = |e| Error::io("<field samples>", e);
        w.write_all(header.as_bytes()).map_err(io)?;
        let mut buf = Vec::with_capacity(self.values.len() * 8);
        for v in &self.values {
            buf.extend_from_slice(&v.to_le_bytes());
        }
        w.write_all(&buf).map_err(io)
    }

    pub fn read_from(r: impl Read) -> Result<Self> {
        let mut r = BufReader::new(r);
        let mut line = String::new();
        let mut next = |r: &mut BufReader<_>| -> Result<String> {
            line.clear();
            r.read_line(&mut line).map_err(|e| Error::io("<field samples>", e))?;
            Ok(line.trim_end().to_string())
        };
        if next(&mut r)? != "FIELDSAMPLES v1" {
            return Err(Error::Format("missing FIELDSAMPLES v1 magic".into()));
        }
        let (mut dim, mut n, mut hw, mut fiber) = (None, None, None, None);
        loop {
            let l = next(&mut r)?;
            if l == "data" {
                break;
            }
            if l.is_empty() {
                return Err(Error::Format("header ended before `data`".into()));
            }
            let (k, v) = l
                .split_once(' ')
                .ok_or_else(|| Error::Format(format!("bad header line `{l}`")))?;
            let bad = |_| Error::Format(format!("bad value in `{l}`"));
            match k {
                "dim" => dim = Some(v.parse::<usize>().map_err(|_| Error::Format(l.clone()))?),
                "n" => n = Some(v.parse::<usize>().map_err(|_| Error::Format(l.clone()))?),
                "half_width" => hw = Some(v.parse::<f64>().map_err(bad)?),
                "fiber" => fiber = Some(v.parse::<usize>().map_err(|_| Error::Format(l.clone()))?),
                "endian" if v != "little" => return Err(Error::Format(format!("unsupported endianness {v}"))),
                _ => {}
            }
        }
        let missing = |k: &str| Error::Format(format!("header lacks `{k}`"));
        let grid = GridSpec::new(
            dim.ok_or_else(|| missing("dim"))?,
            hw.ok_or_else(|| missing("half_width"))?,
            n.ok_or_else(|| missing("n"))?,
        )?;
        let fiber = fiber.ok_or_else(|| missing("fiber"))?;
        let mut bytes = Vec::new();
        r.read_to_end(&mut bytes).map_err(|e| Error::io("<field samples>", e))?;
        if bytes.len() != grid.len() * fiber * 8 {
            return Err(Error::Format(format!(
                "expected {} data bytes, found {}",
                grid.len() * fiber * 8,
                bytes.len()
            )));
        }
        let values = bytes
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
            .collect();
        Self::new(grid, fiber, values)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let f = std::fs::File::create(path.as_ref()).map_err(|e| Error::io(path.as_ref(), e))?;
        self.write_to(std::io::BufWriter::new(f))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let f = std::fs::File::open(path.as_ref()).map_err(|e| Error::io(path.as_ref(), e))?;
        Self::read_from(f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn origin_is_a_node() {
        let g = GridSpec::new(2, 8.0, 512).unwrap();
        assert_eq!(g.coords(g.origin_index()), vec![0.0, 0.0]);
        assert_eq!(g.node_at(&[0.0, 0.0]), Some(g.origin_index()));
        assert_eq!(g.h(), 1.0 / 32.0);
        assert!(GridSpec::new(2, 1.0, 3).is_err());
    }

    #[test]
    fn flat_multi_roundtrip() {
        let g = GridSpec::new(3, 1.0, 4).unwrap();
        for i in 0..g.len() {
            assert_eq!(g.flat(&g.multi(i)), i);
        }
    }

    #[test]
    fn binary_roundtrip() {
        let g = GridSpec::new(2, 1.5, 6).unwrap();
        let s = FieldSamples::from_fn(g, 2, |x| vec![x[0], x[1] * 0.1]);
        let mut buf = Vec::new();
        s.write_to(&mut buf).unwrap();
        let back = FieldSamples::read_from(&buf[..]).unwrap();
        assert_eq!(back, s);
        assert!(FieldSamples::read_from(&buf[..buf.len() - 1]).is_err());
    }
}
