use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::jet::{Jet, JetSpace};
use super::{DerivativeTable, Differentiable};
use crate::error::{Error, Result};
use crate::numerics::{gl_integrate, sphere_area};
use crate::opalg::MultiIndex;
use crate::quad::geometry::ball_cell_fraction;

/// Scalar closed-form expression with exact derivatives through jets.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Expr {
    Constant(f64),
    /// `exp(−1/(1 − |x−c|²/r²))` inside the ball, zero outside.
    Bump {
        center: Vec<f64>,
        radius: f64,
    },
    /// `exp(−|x−c|²/w²)`
    Gaussian {
        center: Vec<f64>,
        width: f64,
    },
    /// `Σ coeff · (x − center)^α`
    Polynomial {
        center: Vec<f64>,
        terms: Vec<(MultiIndex, f64)>,
    },
    /// Indicator of an open ball; not differentiable.
    Indicator {
        center: Vec<f64>,
        radius: f64,
    },
    Sum(Vec<Expr>),
    Product(Vec<Expr>),
    Scaled {
        factor: f64,
        inner: Box<Expr>,
    },
    /// `inner(x / eps)`
    Dilate {
        eps: f64,
        inner: Box<Expr>,
    },
    Partial {
        axis: usize,
        inner: Box<Expr>,
    },
}

/// Below this exponent the bump and its derivatives are treated as zero.
const BUMP_CUTOFF: f64 = -700.0;

fn dist2(x: &[f64], c: &[f64]) -> f64 {
    x.iter().zip(c).map(|(a, b)| (a - b) * (a - b)).sum()
}

impl Expr {
    /// Highest derivative order available (`usize::MAX` for smooth).
    pub fn smoothness(&self) -> usize {
        match self {
            Expr::Indicator { .. } => 0,
            Expr::Sum(v) | Expr::Product(v) => v.iter().map(Expr::smoothness).min().unwrap_or(usize::MAX),
            Expr::Scaled { inner, .. } | Expr::Dilate { inner, .. } => inner.smoothness(),
            Expr::Partial { inner, .. } => inner.smoothness().saturating_sub(1),
            _ => usize::MAX,
        }
    }

    pub fn jet(&self, x: &[f64], order: usize) -> Jet {
        let dim = x.len();
        let space = JetSpace::get(dim, order);
        self.jet_in(x, &space)
    }

    fn jet_in(&self, x: &[f64], space: &JetSpace) -> Jet {
        let dim = x.len();
        match self {
            Expr::Constant(c) => Jet::constant(space, *c),
            Expr::Bump { center, radius } => {
                let s = dist2(x, center) / (radius * radius);
                if s >= 1.0 || -1.0 / (1.0 - s) < BUMP_CUTOFF {
                    return Jet::constant(space, 0.0);
                }
                let mut sj = Jet::constant(space, 0.0);
                for i in 0..dim {
                    let d = Jet::variable(space, i, x[i] - center[i]);
                    sj = sj.add(&d.mul(&d, space));
                }
                let t = sj.scale(-1.0 / (radius * radius)).add_const(1.0);
                t.recip(space).scale(-1.0).exp(space)
            }
            Expr::Gaussian { center, width } => {
                let mut sj = Jet::constant(space, 0.0);
                for i in 0..dim {
                    let d = Jet::variable(space, i, x[i] - center[i]);
                    sj = sj.add(&d.mul(&d, space));
                }
                sj.scale(-1.0 / (width * width)).exp(space)
            }
            Expr::Polynomial { center, terms } => {
                let vars: Vec<Jet> = (0..dim).map(|i| Jet::variable(space, i, x[i] - center[i])).collect();
                let mut out = Jet::constant(space, 0.0);
                for (alpha, c) in terms {
                    let mut m = Jet::constant(space, *c);
                    for (i, &e) in alpha.exponents().iter().enumerate() {
                        for _ in 0..e {
                            m = m.mul(&vars[i], space);
                        }
                    }
                    out = out.add(&m);
                }
                out
            }
            Expr::Indicator { center, radius } => {
                let v = if dist2(x, center) < radius * radius { 1.0 } else { 0.0 };
                Jet::constant(space, v)
            }
            Expr::Sum(terms) => terms
                .iter()
                .fold(Jet::constant(space, 0.0), |acc, t| acc.add(&t.jet_in(x, space))),
            Expr::Product(terms) => {
                let mut acc = Jet::constant(space, 1.0);
                for t in terms {
                    let j = t.jet_in(x, space);
                    if j.is_zero() {
                        return Jet::constant(space, 0.0);
                    }
                    acc = acc.mul(&j, space);
                }
                acc
            }
            Expr::Scaled { factor, inner } => inner.jet_in(x, space).scale(*factor),
            Expr::Dilate { eps, inner } => {
                let y: Vec<f64> = x.iter().map(|v| v / eps).collect();
                let mut j = inner.jet_in(&y, space);
                for (i, a) in space.indices().iter().enumerate() {
                    j.coeffs[i] *= eps.powi(-(a.order() as i32));
                }
                j
            }
            Expr::Partial { axis, inner } => {
                let upper = JetSpace::get(dim, space.order + 1);
                inner.jet_in(x, &upper).partial(*axis, &upper, space)
            }
        }
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        match self {
            Expr::Constant(c) => *c,
            Expr::Bump { center, radius } => {
                let s = dist2(x, center) / (radius * radius);
                if s >= 1.0 {
                    0.0
                } else {
                    (-1.0 / (1.0 - s)).exp()
                }
            }
            Expr::Gaussian { center, width } => (-dist2(x, center) / (width * width)).exp(),
            Expr::Indicator { center, radius } => {
                if dist2(x, center) < radius * radius {
                    1.0
                } else {
                    0.0
                }
            }
            Expr::Sum(t) => t.iter().map(|e| e.value(x)).sum(),
            Expr::Product(t) => {
                let mut acc = 1.0;
                for e in t {
                    acc *= e.value(x);
                    if acc == 0.0 {
                        break;
                    }
                }
                acc
            }
            Expr::Scaled { factor, inner } => factor * inner.value(x),
            Expr::Dilate { eps, inner } => {
                let y: Vec<f64> = x.iter().map(|v| v / eps).collect();
                inner.value(&y)
            }
            _ => self.jet(x, 0).value(),
        }
    }

    /// Average over the axis-aligned cube of side `h` centred at `x`.
    /// Exact for ball indicators in 2-D; midpoint value for smooth terms.
    pub fn cell_average(&self, x: &[f64], h: f64) -> f64 {
        match self {
            Expr::Indicator { center, radius } => {
                let rel: Vec<f64> = x.iter().zip(center).map(|(a, c)| a - c).collect();
                ball_cell_fraction(&rel, h, *radius)
            }
            Expr::Sum(t) => t.iter().map(|e| e.cell_average(x, h)).sum(),
            Expr::Scaled { factor, inner } => factor * inner.cell_average(x, h),
            Expr::Dilate { eps, inner } => {
                let y: Vec<f64> = x.iter().map(|v| v / eps).collect();
                inner.cell_average(&y, h / eps)
            }
            Expr::Product(t) if t.iter().filter(|e| e.smoothness() == 0).count() == 1 => {
                let mut acc = 1.0;
                for e in t {
                    acc *= if e.smoothness() == 0 {
                        e.cell_average(x, h)
                    } else {
                        e.value(x)
                    };
                }
                acc
            }
            _ => self.value(x),
        }
    }

    /// Enclosing ball of the support, `None` when not compactly supported.
    pub fn support(&self, dim: usize) -> Option<(Vec<f64>, f64)> {
        match self {
            Expr::Constant(c) if *c == 0.0 => Some((vec![0.0; dim], 0.0)),
            Expr::Bump { center, radius } | Expr::Indicator { center, radius } => Some((center.clone(), *radius)),
            Expr::Sum(t) => {
                let balls: Option<Vec<_>> = t.iter().map(|e| e.support(dim)).collect();
                enclosing(balls?, dim)
            }
            Expr::Product(t) => t
                .iter()
                .filter_map(|e| e.support(dim))
                .min_by(|a, b| a.1.total_cmp(&b.1)),
            Expr::Scaled { factor, inner } => {
                if *factor == 0.0 {
                    Some((vec![0.0; dim], 0.0))
                } else {
                    inner.support(dim)
                }
            }
            Expr::Dilate { eps, inner } => inner
                .support(dim)
                .map(|(c, r)| (c.iter().map(|v| v * eps).collect(), r * eps)),
            Expr::Partial { inner, .. } => inner.support(dim),
            _ => None,
        }
    }
}

fn enclosing(balls: Vec<(Vec<f64>, f64)>, dim: usize) -> Option<(Vec<f64>, f64)> {
    let live: Vec<_> = balls.into_iter().filter(|b| b.1 > 0.0).collect();
    if live.is_empty() {
        return Some((vec![0.0; dim], 0.0));
    }
    let c = live[0].0.clone();
    let r = live
        .iter()
        .map(|(cc, rr)| dist2(cc, &c).sqrt() + rr)
        .fold(0.0, f64::max);
    Some((c, r))
}

/// Vector field whose components are closed-form expressions.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClosedFormField {
    pub dim: usize,
    pub id: String,
    pub components: Vec<Expr>,
}

impl ClosedFormField {
    pub fn new(dim: usize, id: impl Into<String>, components: Vec<Expr>) -> Self {
        ClosedFormField {
            dim,
            id: id.into(),
            components,
        }
    }

    pub fn scalar(dim: usize, id: impl Into<String>, e: Expr) -> Self {
        Self::new(dim, id, vec![e])
    }

    pub fn fiber(&self) -> usize {
        self.components.len()
    }

    pub fn value(&self, x: &[f64]) -> Vec<f64> {
        self.components.iter().map(|c| c.value(x)).collect()
    }

    pub fn cell_average(&self, x: &[f64], h: f64) -> Vec<f64> {
        self.components.iter().map(|c| c.cell_average(x, h)).collect()
    }

    /// Euclidean norm of the value at `x`.
    pub fn norm_at(&self, x: &[f64]) -> f64 {
        self.components.iter().map(|c| c.value(x).powi(2)).sum::<f64>().sqrt()
    }

    pub fn support(&self) -> Option<(Vec<f64>, f64)> {
        let balls: Option<Vec<_>> = self.components.iter().map(|c| c.support(self.dim)).collect();
        enclosing(balls?, self.dim)
    }

    pub fn smoothness(&self) -> usize {
        self.components.iter().map(Expr::smoothness).min().unwrap_or(usize::MAX)
    }

    pub fn scaled(&self, factor: f64) -> Self {
        ClosedFormField {
            dim: self.dim,
            id: format!("{}*{factor}", self.id),
            components: self
                .components
                .iter()
                .map(|c| Expr::Scaled {
                    factor,
                    inner: Box::new(c.clone()),
                })
                .collect(),
        }
    }

    /// `component` only, as a scalar field.
    pub fn component(&self, k: usize) -> ClosedFormField {
        ClosedFormField::scalar(self.dim, format!("{}[{k}]", self.id), self.components[k].clone())
    }
}

impl Differentiable for ClosedFormField {
    fn dim(&self) -> usize {
        self.dim
    }
    fn fiber(&self) -> usize {
        self.fiber()
    }
    fn max_order(&self) -> usize {
        self.smoothness()
    }
    fn derivatives(&self, x: &[f64], order: usize) -> Result<DerivativeTable> {
        if x.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: x.len(),
            });
        }
        let avail = self.smoothness();
        if order > avail {
            return Err(Error::MissingDerivative {
                requested: order,
                available: avail,
            });
        }
        let space = JetSpace::get(self.dim, order);
        let jets = self.components.iter().map(|c| c.jet(x, order)).collect();
        Ok(DerivativeTable::new(space, jets))
    }
}

fn bump_unit_mass(dim: usize) -> f64 {
    let panels = 64;
    let mut s = 0.0;
    for p in 0..panels {
        let a = p as f64 / panels as f64;
        let b = (p + 1) as f64 / panels as f64;
        s += gl_integrate(a, b, 16, |r| {
            if r >= 1.0 {
                0.0
            } else {
                (-1.0 / (1.0 - r * r)).exp() * r.powi(dim as i32 - 1)
            }
        });
    }
    sphere_area(dim) * s
}

/// Smooth bump `exp(−1/(1−|x−c|²/r²))`, optionally scaled to unit mass.
pub fn make_bump(dim: usize, center: &[f64], radius: f64, normalize: bool) -> Result<ClosedFormField> {
    if radius <= 0.0 {
        return Err(Error::arg(format!("bump radius must be positive, got {radius}")));
    }
    if center.len() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            got: center.len(),
        });
    }
    let bump = Expr::Bump {
        center: center.to_vec(),
        radius,
    };
    let e = if normalize {
        Expr::Scaled {
            factor: 1.0 / (bump_unit_mass(dim) * radius.powi(dim as i32)),
            inner: Box::new(bump),
        }
    } else {
        bump
    };
    Ok(ClosedFormField::scalar(
        dim,
        if normalize { "bump_normalized" } else { "bump" },
        e,
    ))
}

/// Exact mass of the unnormalized bump of the given radius.
pub fn bump_mass(dim: usize, radius: f64) -> f64 {
    bump_unit_mass(dim) * radius.powi(dim as i32)
}

/// `φ_ε(x) = ε^{−N} φ(x/ε)`
pub fn mollifier_family(phi: &ClosedFormField, eps: f64) -> Result<ClosedFormField> {
    if eps <= 0.0 {
        return Err(Error::arg(format!("eps must be positive, got {eps}")));
    }
    let amp = eps.powi(-(phi.dim as i32));
    Ok(ClosedFormField {
        dim: phi.dim,
        id: format!("{}_eps{eps}", phi.id),
        components: phi
            .components
            .iter()
            .map(|c| Expr::Scaled {
                factor: amp,
                inner: Box::new(Expr::Dilate {
                    eps,
                    inner: Box::new(c.clone()),
                }),
            })
            .collect(),
    })
}

/// `f = (∂₂φ_ε, −∂₁φ_ε, 0, …)`: divergence free for any scalar `φ`.
pub fn divfree_family(phi: &ClosedFormField, eps: f64) -> Result<ClosedFormField> {
    if phi.fiber() != 1 || phi.dim < 2 {
        return Err(Error::arg("divfree_family needs a scalar seed in dimension >= 2"));
    }
    let pe = mollifier_family(phi, eps)?;
    Ok(stream_field(
        &pe.components[0],
        phi.dim,
        format!("divfree_{}_eps{eps}", phi.id),
    ))
}

/// `(∂₂ψ, −∂₁ψ, 0, …)` from a stream function.
pub fn stream_field(psi: &Expr, dim: usize, id: impl Into<String>) -> ClosedFormField {
    let mut comps = vec![
        Expr::Partial {
            axis: 1,
            inner: Box::new(psi.clone()),
        },
        Expr::Scaled {
            factor: -1.0,
            inner: Box::new(Expr::Partial {
                axis: 0,
                inner: Box::new(psi.clone()),
            }),
        },
    ];
    comps.extend((2..dim).map(|_| Expr::Constant(0.0)));
    ClosedFormField::new(dim, id, comps)
}

/// `∇ψ`
pub fn gradient_field(psi: &Expr, dim: usize, id: impl Into<String>) -> ClosedFormField {
    ClosedFormField::new(
        dim,
        id,
        (0..dim)
            .map(|axis| Expr::Partial {
                axis,
                inner: Box::new(psi.clone()),
            })
            .collect(),
    )
}

fn random_point(rng: &mut ChaCha8Rng, dim: usize, spread: f64) -> Vec<f64> {
    (0..dim).map(|_| rng.random_range(-spread..spread)).collect()
}

/// Sum of `count` randomly placed and weighted bumps inside `B(0, extent)`.
pub fn random_bump_sum(dim: usize, count: usize, extent: f64, rng: &mut ChaCha8Rng) -> Expr {
    let terms = (0..count)
        .map(|_| {
            let r = rng.random_range(0.3..0.6) * extent;
            let spread = (extent - r) / (dim as f64).sqrt();
            let c = random_point(rng, dim, spread);
            Expr::Scaled {
                factor: rng.random_range(-1.0..1.0),
                inner: Box::new(Expr::Bump { center: c, radius: r }),
            }
        })
        .collect();
    Expr::Sum(terms)
}

/// Seeded divergence-free field supported in `B(0, extent)` (N = 2 stream
/// function construction, zero in other components).
pub fn random_divfree(dim: usize, extent: f64, seed: u64) -> ClosedFormField {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let psi = random_bump_sum(dim, 3, extent, &mut rng);
    stream_field(&psi, dim, format!("random_divfree_{seed}"))
}

/// Seeded vector field with independent bump components (no constraint).
pub fn random_bump_field(dim: usize, fiber: usize, extent: f64, seed: u64) -> ClosedFormField {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let comps = (0..fiber).map(|_| random_bump_sum(dim, 2, extent, &mut rng)).collect();
    ClosedFormField::new(dim, format!("random_bumps_{seed}"), comps)
}

/// Seeded vector test function: each component a random polynomial of
/// degree <= `degree` times a bump of radius `extent`.
pub fn random_poly_bump(dim: usize, fiber: usize, degree: u32, extent: f64, seed: u64) -> ClosedFormField {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let center = random_point(&mut rng, dim, 0.5 * extent);
    let comps = (0..fiber)
        .map(|_| {
            let terms = MultiIndex::all_up_to(dim, degree)
                .into_iter()
                .map(|a| (a, rng.random_range(-1.0..1.0)))
                .collect();
            Expr::Product(vec![
                Expr::Polynomial {
                    center: vec![0.0; dim],
                    terms,
                },
                Expr::Bump {
                    center: center.clone(),
                    radius: extent,
                },
            ])
        })
        .collect();
    ClosedFormField::new(dim, format!("random_poly_bump_{seed}"), comps)
}

/// Indicator of `B(center, radius)` as a scalar field.
pub fn ball_indicator(dim: usize, center: &[f64], radius: f64) -> ClosedFormField {
    ClosedFormField::scalar(
        dim,
        "ball_indicator",
        Expr::Indicator {
            center: center.to_vec(),
            radius,
        },
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn fd4(f: &dyn Fn(&[f64]) -> f64, x: &[f64], axis: usize, h: f64) -> f64 {
        let at = |s: f64| {
            let mut y = x.to_vec();
            y[axis] += s * h;
            f(&y)
        };
        (-at(2.0) + 8.0 * at(1.0) - 8.0 * at(-1.0) + at(-2.0)) / (12.0 * h)
    }

    #[test]
    fn bump_vanishes_outside_and_is_flat_at_center() {
        let b = make_bump(2, &[0.0, 0.0], 1.0, false).unwrap();
        assert_eq!(b.value(&[1.0, 0.0])[0], 0.0);
        assert_eq!(b.value(&[0.8, 0.7])[0], 0.0);
        let d = b.derivatives(&[0.0, 0.0], 1).unwrap();
        assert_eq!(d.get(&MultiIndex::unit(2, 0))[0], 0.0);
        assert_eq!(d.get(&MultiIndex::unit(2, 1))[0], 0.0);
        assert_relative_eq!(d.get(&MultiIndex::zero(2))[0], (-1f64).exp(), max_relative = 1e-15);
    }

    #[test]
    fn analytic_derivatives_match_finite_differences() {
        let phi = make_bump(2, &[0.1, -0.2], 1.3, true).unwrap();
        let f = divfree_family(&phi, 0.7).unwrap();
        let x = [0.2, 0.15];
        let d = f.derivatives(&x, 1).unwrap();
        for comp in 0..2 {
            let g = |y: &[f64]| f.components[comp].value(y);
            for axis in 0..2 {
                let fd = fd4(&g, &x, axis, 1e-3);
                assert_relative_eq!(d.get(&MultiIndex::unit(2, axis))[comp], fd, max_relative = 1e-6);
            }
        }
    }

    #[test]
    fn dilation_scales_derivatives() {
        let phi = make_bump(2, &[0.0, 0.0], 1.0, false).unwrap();
        let pe = mollifier_family(&phi, 0.5).unwrap();
        let x = [0.1, 0.2];
        let a = pe.derivatives(&x, 2).unwrap();
        let b = phi.derivatives(&[0.2, 0.4], 2).unwrap();
        let g = MultiIndex::new(vec![1, 1]).unwrap();
        // ε^{−N−|γ|}
        assert_relative_eq!(a.get(&g)[0], 0.5f64.powi(-4) * b.get(&g)[0], max_relative = 1e-13);
    }

    #[test]
    fn indicator_refuses_derivatives() {
        let c = ball_indicator(2, &[0.0, 0.0], 1.0);
        assert!(matches!(
            c.derivatives(&[0.0, 0.0], 1),
            Err(Error::MissingDerivative {
                requested: 1,
                available: 0
            })
        ));
    }

    #[test]
    fn supports_are_tracked() {
        let phi = make_bump(2, &[1.0, 0.0], 0.5, true).unwrap();
        let (c, r) = mollifier_family(&phi, 2.0).unwrap().support().unwrap();
        assert_eq!(c, vec![2.0, 0.0]);
        assert_eq!(r, 1.0);
        let f = random_divfree(2, 1.0, 5);
        let (c, r) = f.support().unwrap();
        assert!(c.iter().map(|v| v * v).sum::<f64>().sqrt() + r <= 2.0 + 1e-12);
    }
}
