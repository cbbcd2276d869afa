use std::collections::BTreeMap;
use std::path::Path;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::multi_index::MultiIndex;
use crate::error::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;

/// Constant-coefficient operator `L(D) = Σ_{|α|=m} b_α ∂^α` from
/// `C^{fiber_in}` to `C^{fiber_out}`.
#[derive(Clone, Debug, PartialEq)]
pub struct HomogeneousOperator {
    dim: usize,
    order: u32,
    fiber_in: usize,
    fiber_out: usize,
    coeffs: BTreeMap<MultiIndex, CMatrix>,
    name: String,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Builtin {
    Divergence,
    Curl,
    Gradient,
    Laplacian,
}

impl Builtin {
    pub fn parse(name: &str) -> Result<Self> {
        match name {
            "divergence" | "div" => Ok(Builtin::Divergence),
            "curl" => Ok(Builtin::Curl),
            "gradient" | "grad" => Ok(Builtin::Gradient),
            "laplacian" => Ok(Builtin::Laplacian),
            _ => Err(Error::UnsupportedBuiltin {
                name: name.to_string(),
                dim: 0,
            }),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Builtin::Divergence => "divergence",
            Builtin::Curl => "curl",
            Builtin::Gradient => "gradient",
            Builtin::Laplacian => "laplacian",
        }
    }
}

impl HomogeneousOperator {
    pub fn new(
        dim: usize,
        order: u32,
        fiber_in: usize,
        fiber_out: usize,
        coeffs: BTreeMap<MultiIndex, CMatrix>,
    ) -> Result<Self> {
        if dim == 0 || order == 0 || fiber_in == 0 || fiber_out == 0 {
            return Err(Error::MalformedOperator(format!(
                "dim, order and fiber sizes must be positive (dim={dim}, order={order}, in={fiber_in}, out={fiber_out})"
            )));
        }
        for (alpha, b) in &coeffs {
            if alpha.dim() != dim {
                return Err(Error::MalformedOperator(format!(
                    "multi-index {alpha} has length {}, expected {dim}",
                    alpha.dim()
                )));
            }
            if alpha.order() != order {
                return Err(Error::MalformedOperator(format!(
                    "multi-index {alpha} has order {}, operator order is {order}",
                    alpha.order()
                )));
            }
            if b.nrows() != fiber_out || b.ncols() != fiber_in {
                return Err(Error::MalformedOperator(format!(
                    "coefficient at {alpha} is {}x{}, expected {fiber_out}x{fiber_in}",
                    b.nrows(),
                    b.ncols()
                )));
            }
        }
        if coeffs
            .values()
            .all(|b| b.iter().all(|z| *z == Complex64::new(0.0, 0.0)))
        {
            return Err(Error::MalformedOperator("all coefficients vanish".into()));
        }
        Ok(HomogeneousOperator {
            dim,
            order,
            fiber_in,
            fiber_out,
            coeffs,
            name: "custom".into(),
        })
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }
    pub fn dim(&self) -> usize {
        self.dim
    }
    pub fn order(&self) -> u32 {
        self.order
    }
    pub fn fiber_in(&self) -> usize {
        self.fiber_in
    }
    pub fn fiber_out(&self) -> usize {
        self.fiber_out
    }
    pub fn coeffs(&self) -> &BTreeMap<MultiIndex, CMatrix> {
        &self.coeffs
    }

    pub fn is_real(&self) -> bool {
        self.coeffs.values().all(|b| b.iter().all(|z| z.im == 0.0))
    }

    /// Symbol `L(ξ) = Σ b_α ξ^α`.
    pub fn eval_symbol(&self, xi: &[f64]) -> Result<CMatrix> {
        if xi.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: xi.len(),
            });
        }
        let mut out = CMatrix::zeros(self.fiber_out, self.fiber_in);
        for (alpha, b) in &self.coeffs {
            let w = alpha.monomial(xi);
            if w != 0.0 {
                out += b * Complex64::new(w, 0.0);
            }
        }
        Ok(out)
    }

    /// Coefficients stacked vertically in key order.
    pub fn stacked(&self) -> CMatrix {
        let k = self.coeffs.len();
        let mut s = CMatrix::zeros(self.fiber_out * k, self.fiber_in);
        for (i, b) in self.coeffs.values().enumerate() {
            s.view_mut((i * self.fiber_out, 0), (self.fiber_out, self.fiber_in))
                .copy_from(b);
        }
        s
    }

    /// Apply `L(D)` to a field given its derivatives of order `m`.
    /// `deriv(α)` returns `∂^α f` as a fiber vector.
    pub fn apply(&self, mut deriv: impl FnMut(&MultiIndex) -> Vec<f64>) -> Vec<Complex64> {
        let mut out = vec![Complex64::new(0.0, 0.0); self.fiber_out];
        for (alpha, b) in &self.coeffs {
            let d = deriv(alpha);
            for r in 0..self.fiber_out {
                for c in 0..self.fiber_in {
                    out[r] += b[(r, c)] * d[c];
                }
            }
        }
        out
    }

    pub fn builtin(kind: Builtin, dim: usize) -> Result<Self> {
        let unsupported = || Error::UnsupportedBuiltin {
            name: kind.name().to_string(),
            dim,
        };
        if dim == 0 {
            return Err(unsupported());
        }
        let one = Complex64::new(1.0, 0.0);
        let mut coeffs = BTreeMap::new();
        let (order, fin, fout) = match kind {
            Builtin::Divergence => {
                for j in 0..dim {
                    let mut b = CMatrix::zeros(1, dim);
                    b[(0, j)] = one;
                    coeffs.insert(MultiIndex::unit(dim, j), b);
                }
                (1, dim, 1)
            }
            Builtin::Gradient => {
                for j in 0..dim {
                    let mut b = CMatrix::zeros(dim, 1);
                    b[(j, 0)] = one;
                    coeffs.insert(MultiIndex::unit(dim, j), b);
                }
                (1, 1, dim)
            }
            Builtin::Laplacian => {
                for j in 0..dim {
                    let mut e = vec![0; dim];
                    e[j] = 2;
                    coeffs.insert(MultiIndex::new(e)?, CMatrix::from_element(1, 1, one));
                }
                (2, 1, 1)
            }
            Builtin::Curl if dim == 3 => {
                for j in 0..3 {
                    coeffs.insert(MultiIndex::unit(3, j), cross_matrix(j));
                }
                (1, 3, 3)
            }
            Builtin::Curl if dim >= 2 => {
                // 2-form convention: (df)_{ij} = ∂_i f_j − ∂_j f_i, i < j.
                let pairs: Vec<(usize, usize)> = (0..dim).flat_map(|i| (i + 1..dim).map(move |j| (i, j))).collect();
                let mut bs = vec![CMatrix::zeros(pairs.len(), dim); dim];
                for (row, &(i, j)) in pairs.iter().enumerate() {
                    bs[i][(row, j)] += one;
                    bs[j][(row, i)] -= one;
                }
                for (axis, b) in bs.into_iter().enumerate() {
                    coeffs.insert(MultiIndex::unit(dim, axis), b);
                }
                (1, dim, pairs.len())
            }
            Builtin::Curl => return Err(unsupported()),
        };
        Ok(Self::new(dim, order, fin, fout, coeffs)?.with_name(kind.name()))
    }

    /// `∂_axis` applied to component `component` of a `fiber_in`-vector field.
    pub fn partial_of_component(dim: usize, fiber_in: usize, axis: usize, component: usize) -> Result<Self> {
        if axis >= dim || component >= fiber_in {
            return Err(Error::arg("axis or component out of range"));
        }
        let mut b = CMatrix::zeros(1, fiber_in);
        b[(0, component)] = Complex64::new(1.0, 0.0);
        let mut coeffs = BTreeMap::new();
        coeffs.insert(MultiIndex::unit(dim, axis), b);
        Ok(Self::new(dim, 1, fiber_in, 1, coeffs)?.with_name(format!("d{}_component{}", axis + 1, component + 1)))
    }

    pub fn from_spec(spec: &OperatorSpec) -> Result<Self> {
        if let Some(name) = &spec.builtin {
            let dim = spec
                .dim
                .ok_or_else(|| Error::config("operator.dim", "built-in operators need `dim`"))?;
            return Self::builtin(Builtin::parse(name)?, dim).map_err(|e| match e {
                Error::UnsupportedBuiltin { name, .. } => Error::UnsupportedBuiltin { name, dim },
                other => other,
            });
        }
        let need = |v: Option<usize>, key: &str| v.ok_or_else(|| Error::config(format!("operator.{key}"), "missing"));
        let dim = need(spec.dim, "dim")?;
        let order = need(spec.order.map(|o| o as usize), "order")? as u32;
        let fin = need(spec.fiber_in, "fiber_in")?;
        let fout = need(spec.fiber_out, "fiber_out")?;
        let mut coeffs: BTreeMap<MultiIndex, CMatrix> = BTreeMap::new();
        for (k, e) in spec.entries.iter().enumerate() {
            let alpha = MultiIndex::new(e.0.clone())?;
            if e.1 >= fout || e.2 >= fin {
                return Err(Error::MalformedOperator(format!(
                    "entry {k}: index ({}, {}) outside {fout}x{fin}",
                    e.1, e.2
                )));
            }
            let b = coeffs.entry(alpha).or_insert_with(|| CMatrix::zeros(fout, fin));
            b[(e.1, e.2)] += Complex64::new(e.3.value(), e.4.value());
        }
        let op = Self::new(dim, order, fin, fout, coeffs)?;
        Ok(match &spec.name {
            Some(n) => op.with_name(n.clone()),
            None => op,
        })
    }

    pub fn to_spec(&self) -> OperatorSpec {
        let mut entries = Vec::new();
        for (alpha, b) in &self.coeffs {
            for r in 0..b.nrows() {
                for c in 0..b.ncols() {
                    let z = b[(r, c)];
                    if z.re != 0.0 || z.im != 0.0 {
                        entries.push((
                            alpha.exponents().to_vec(),
                            r,
                            c,
                            Number::Float(z.re),
                            Number::Float(z.im),
                        ));
                    }
                }
            }
        }
        OperatorSpec {
            builtin: None,
            name: Some(self.name.clone()),
            dim: Some(self.dim),
            order: Some(self.order as u64),
            fiber_in: Some(self.fiber_in),
            fiber_out: Some(self.fiber_out),
            entries,
        }
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path.as_ref()).map_err(|e| Error::io(path.as_ref(), e))?;
        let spec: OperatorSpec =
            toml::from_str(&text).map_err(|e| Error::Format(format!("{}: {e}", path.as_ref().display())))?;
        Self::from_spec(&spec)
    }
}

/// Matrix of `v ↦ e_j × v` in R³.
pub fn cross_matrix(j: usize) -> CMatrix {
    let mut m = CMatrix::zeros(3, 3);
    let (a, b) = ((j + 1) % 3, (j + 2) % 3);
    // (e_j × v)_a = −v_b, (e_j × v)_b = v_a
    m[(a, b)] = Complex64::new(-1.0, 0.0);
    m[(b, a)] = Complex64::new(1.0, 0.0);
    m
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Number {
    Int(i64),
    Float(f64),
}

impl Number {
    pub fn value(self) -> f64 {
        match self {
            Number::Int(i) => i as f64,
            Number::Float(f) => f,
        }
    }
}

/// On-disk operator description: either a built-in by name or explicit
/// `(multi-index, row, col, re, im)` entries.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OperatorSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub builtin: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(default)]
    pub dim: Option<usize>,
    #[serde(default)]
    pub order: Option<u64>,
    #[serde(default)]
    pub fiber_in: Option<usize>,
    #[serde(default)]
    pub fiber_out: Option<usize>,
    #[serde(default)]
    pub entries: Vec<(Vec<u32>, usize, usize, Number, Number)>,
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn real(m: &CMatrix) -> Vec<f64> {
        m.iter().map(|z| z.re).collect()
    }

    #[test]
    fn divergence_symbol() {
        let op = HomogeneousOperator::builtin(Builtin::Divergence, 2).unwrap();
        let s = op.eval_symbol(&[1.0, 0.0]).unwrap();
        assert_eq!((s.nrows(), s.ncols()), (1, 2));
        assert_eq!(real(&s), vec![1.0, 0.0]);
    }

    #[test]
    fn curl3_symbol_is_cross_product() {
        let op = HomogeneousOperator::builtin(Builtin::Curl, 3).unwrap();
        let s = op.eval_symbol(&[0.0, 0.0, 1.0]).unwrap();
        let expect = [[0.0, -1.0, 0.0], [1.0, 0.0, 0.0], [0.0, 0.0, 0.0]];
        for r in 0..3 {
            for c in 0..3 {
                assert_eq!(s[(r, c)].re, expect[r][c]);
            }
        }
        // ξ × v for arbitrary ξ, v
        let xi = [0.3, -1.2, 2.0];
        let v = [1.0, 0.5, -0.7];
        let s = op.eval_symbol(&xi).unwrap();
        let cross = [
            xi[1] * v[2] - xi[2] * v[1],
            xi[2] * v[0] - xi[0] * v[2],
            xi[0] * v[1] - xi[1] * v[0],
        ];
        for r in 0..3 {
            let got: f64 = (0..3).map(|c| s[(r, c)].re * v[c]).sum();
            assert_relative_eq!(got, cross[r], epsilon = 1e-14);
        }
    }

    #[test]
    fn gradient_and_curl2() {
        let g = HomogeneousOperator::builtin(Builtin::Gradient, 2).unwrap();
        assert_eq!(real(&g.eval_symbol(&[1.0, 2.0]).unwrap()), vec![1.0, 2.0]);
        let c = HomogeneousOperator::builtin(Builtin::Curl, 2).unwrap();
        let s = c.eval_symbol(&[3.0, 5.0]).unwrap();
        // ξ1 f2 − ξ2 f1
        assert_eq!(real(&s), vec![-5.0, 3.0]);
        assert!(HomogeneousOperator::builtin(Builtin::Curl, 1).is_err());
    }

    #[test]
    fn rejects_inhomogeneous_keys() {
        let mut coeffs = BTreeMap::new();
        coeffs.insert(MultiIndex::new(vec![1, 1]).unwrap(), CMatrix::identity(1, 1));
        assert!(matches!(
            HomogeneousOperator::new(2, 1, 1, 1, coeffs),
            Err(Error::MalformedOperator(_))
        ));
    }

    #[test]
    fn dimension_mismatch() {
        let op = HomogeneousOperator::builtin(Builtin::Laplacian, 3).unwrap();
        assert!(matches!(
            op.eval_symbol(&[1.0, 2.0]),
            Err(Error::DimensionMismatch { expected: 3, got: 2 })
        ));
    }

    #[test]
    fn spec_roundtrip_through_toml() {
        let op = HomogeneousOperator::builtin(Builtin::Curl, 3).unwrap();
        let text = toml::to_string(&op.to_spec()).unwrap();
        let spec: OperatorSpec = toml::from_str(&text).unwrap();
        let back = HomogeneousOperator::from_spec(&spec).unwrap();
        assert_eq!(back.coeffs(), op.coeffs());
    }

    #[test]
    fn parses_entries_with_integer_scalars() {
        let text = "dim = 2\norder = 1\nfiber_in = 2\nfiber_out = 1\nentries = [[[1, 0], 0, 0, 1, 0]]\n";
        let spec: OperatorSpec = toml::from_str(text).unwrap();
        let op = HomogeneousOperator::from_spec(&spec).unwrap();
        assert_eq!(real(&op.eval_symbol(&[2.0, 7.0]).unwrap()), vec![2.0, 0.0]);
    }
}
