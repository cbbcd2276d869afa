use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::fit_line;

/// `w(x) = |x|^a`
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PowerWeight {
    pub exponent: f64,
}

impl PowerWeight {
    pub fn new(exponent: f64) -> Self {
        PowerWeight { exponent }
    }

    pub fn unit() -> Self {
        PowerWeight { exponent: 0.0 }
    }

    pub fn eval_r(&self, r: f64) -> f64 {
        if self.exponent == 0.0 {
            1.0
        } else {
            r.powf(self.exponent)
        }
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.eval_r(x.iter().map(|t| t * t).sum::<f64>().sqrt())
    }

    /// `|x|^a` is integrable near the origin in `R^N`.
    pub fn locally_integrable(&self, dim: usize) -> bool {
        self.exponent > -(dim as f64)
    }
}

/// Radial profile sampled on increasing radii, interpolated linearly in
/// `(log r, log w)` with power-law tails outside the table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RadialWeight {
    log_r: Vec<f64>,
    log_w: Vec<f64>,
    pub tail_zero: f64,
    pub tail_infinity: f64,
}

impl RadialWeight {
    /// Tail exponents must agree with the slope of the outermost sampled
    /// decade to within 10%.
    pub fn new(radii: &[f64], values: &[f64], tail_zero: f64, tail_infinity: f64) -> Result<Self> {
        if radii.len() < 2 || radii.len() != values.len() {
            return Err(Error::arg("radial table needs >= 2 matching radii and values"));
        }
        if radii.windows(2).any(|w| w[1] <= w[0]) || radii[0] <= 0.0 {
            return Err(Error::arg("radii must be positive and increasing"));
        }
        if values.iter().any(|v| !(*v > 0.0) || !v.is_finite()) {
            return Err(Error::arg("radial table values must be positive and finite"));
        }
        let log_r: Vec<f64> = radii.iter().map(|r| r.ln()).collect();
        let log_w: Vec<f64> = values.iter().map(|v| v.ln()).collect();
        let w = RadialWeight {
            log_r,
            log_w,
            tail_zero,
            tail_infinity,
        };
        let decade = 10f64.ln();
        let check = |sel: Vec<usize>, tail: f64, which: &str| -> Result<()> {
            if sel.len() < 2 {
                return Ok(());
            }
            let x: Vec<f64> = sel.iter().map(|&i| w.log_r[i]).collect();
            let y: Vec<f64> = sel.iter().map(|&i| w.log_w[i]).collect();
            let slope = fit_line(&x, &y).map(|f| f.slope).unwrap_or(tail);
            if (slope - tail).abs() > 0.1 * tail.abs().max(1.0) {
                return Err(Error::arg(format!(
                    "{which} tail exponent {tail} disagrees with sampled slope {slope:.4}"
                )));
            }
            Ok(())
        };
        let n = w.log_r.len();
        let first: Vec<usize> = (0..n).filter(|&i| w.log_r[i] <= w.log_r[0] + decade).collect();
        let last: Vec<usize> = (0..n).filter(|&i| w.log_r[i] >= w.log_r[n - 1] - decade).collect();
        check(first, tail_zero, "inner")?;
        check(last, tail_infinity, "outer")?;
        Ok(w)
    }

    pub fn from_fn(
        f: impl Fn(f64) -> f64,
        r_min: f64,
        r_max: f64,
        per_decade: usize,
        tail_zero: f64,
        tail_infinity: f64,
    ) -> Result<Self> {
        let decades = (r_max / r_min).log10();
        let count = ((decades * per_decade as f64).ceil() as usize).max(1) + 1;
        let radii: Vec<f64> = (0..count)
            .map(|i| r_min * 10f64.powf(decades * i as f64 / (count - 1) as f64))
            .collect();
        let values: Vec<f64> = radii.iter().map(|&r| f(r)).collect();
        Self::new(&radii, &values, tail_zero, tail_infinity)
    }

    pub fn eval_r(&self, r: f64) -> f64 {
        let n = self.log_r.len();
        let t = r.ln();
        if t <= self.log_r[0] {
            return (self.log_w[0] + self.tail_zero * (t - self.log_r[0])).exp();
        }
        if t >= self.log_r[n - 1] {
            return (self.log_w[n - 1] + self.tail_infinity * (t - self.log_r[n - 1])).exp();
        }
        let k = self.log_r.partition_point(|&v| v <= t).min(n - 1);
        let (x0, x1) = (self.log_r[k - 1], self.log_r[k]);
        let s = (t - x0) / (x1 - x0);
        (self.log_w[k - 1] * (1.0 - s) + self.log_w[k] * s).exp()
    }
}

/// Radial weights accepted by the condition checks.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Weight {
    Zero,
    Constant {
        value: f64,
    },
    /// `c |x|^a`
    Power {
        exponent: f64,
        #[serde(default = "one")]
        scale: f64,
    },
    /// Indicator of `B(0, radius)`.
    BallIndicator {
        radius: f64,
    },
    Table(RadialWeight),
}

fn one() -> f64 {
    1.0
}

impl From<PowerWeight> for Weight {
    fn from(p: PowerWeight) -> Self {
        Weight::Power {
            exponent: p.exponent,
            scale: 1.0,
        }
    }
}

impl Weight {
    pub fn power(exponent: f64) -> Self {
        Weight::Power { exponent, scale: 1.0 }
    }

    pub fn one() -> Self {
        Weight::Constant { value: 1.0 }
    }

    pub fn eval_r(&self, r: f64) -> f64 {
        match self {
            Weight::Zero => 0.0,
            Weight::Constant { value } => *value,
            Weight::Power { exponent, scale } => {
                if *exponent == 0.0 {
                    *scale
                } else {
                    scale * r.powf(*exponent)
                }
            }
            Weight::BallIndicator { radius } => {
                if r < *radius {
                    1.0
                } else {
                    0.0
                }
            }
            Weight::Table(t) => t.eval_r(r),
        }
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.eval_r(x.iter().map(|t| t * t).sum::<f64>().sqrt())
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Weight::Zero)
            || matches!(self, Weight::Constant { value } if *value == 0.0)
            || matches!(self, Weight::Power { scale, .. } if *scale == 0.0)
    }

    /// Power-law exponent near the origin (`None` for the zero weight).
    pub fn exponent_at_zero(&self) -> Option<f64> {
        match self {
            Weight::Zero => None,
            Weight::Constant { .. } | Weight::BallIndicator { .. } => Some(0.0),
            Weight::Power { exponent, .. } => Some(*exponent),
            Weight::Table(t) => Some(t.tail_zero),
        }
    }

    /// Power-law exponent at infinity; `None` when compactly supported.
    pub fn exponent_at_infinity(&self) -> Option<f64> {
        match self {
            Weight::Zero | Weight::BallIndicator { .. } => None,
            Weight::Constant { .. } => Some(0.0),
            Weight::Power { exponent, .. } => Some(*exponent),
            Weight::Table(t) => Some(t.tail_infinity),
        }
    }

    /// Radius beyond which the weight vanishes, if any.
    pub fn support_radius(&self) -> Option<f64> {
        match self {
            Weight::Zero => Some(0.0),
            Weight::BallIndicator { radius } => Some(*radius),
            _ => None,
        }
    }

    /// Radii where the weight is not smooth (quadrature breakpoints).
    pub fn breakpoints(&self) -> Vec<f64> {
        match self {
            Weight::BallIndicator { radius } => vec![*radius],
            _ => Vec::new(),
        }
    }

    /// `w^p`
    pub fn powf(&self, p: f64) -> Weight {
        match self {
            Weight::Zero => Weight::Zero,
            Weight::Constant { value } => Weight::Constant { value: value.powf(p) },
            Weight::Power { exponent, scale } => Weight::Power {
                exponent: exponent * p,
                scale: scale.powf(p),
            },
            Weight::BallIndicator { radius } => Weight::BallIndicator { radius: *radius },
            Weight::Table(t) => Weight::Table(RadialWeight {
                log_r: t.log_r.clone(),
                log_w: t.log_w.iter().map(|v| v * p).collect(),
                tail_zero: t.tail_zero * p,
                tail_infinity: t.tail_infinity * p,
            }),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn power_weight_basics() {
        let w = PowerWeight::new(-0.5);
        assert_relative_eq!(w.eval(&[3.0, 4.0]), 5f64.powf(-0.5));
        assert!(w.locally_integrable(1));
        assert!(!PowerWeight::new(-2.0).locally_integrable(2));
    }

    #[test]
    fn table_reproduces_power_law_and_tails() {
        let t = RadialWeight::from_fn(|r| r.powf(-0.3), 1e-2, 1e2, 5, -0.3, -0.3).unwrap();
        for r in [1e-4, 0.05, 1.0, 37.0, 1e4] {
            assert_relative_eq!(t.eval_r(r), r.powf(-0.3), max_relative = 1e-10);
        }
        assert!(RadialWeight::from_fn(|r| r.powf(-0.3), 1e-2, 1e2, 5, -0.3, 1.0).is_err());
    }

    #[test]
    fn powers_compose() {
        let w = Weight::power(-0.25).powf(4.0);
        assert_relative_eq!(w.eval_r(2.0), 0.5);
        assert_eq!(Weight::Zero.eval_r(1.0), 0.0);
    }
}
