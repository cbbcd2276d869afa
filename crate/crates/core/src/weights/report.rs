use serde::{Deserialize, Serialize};

use crate::numerics::fit_line;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LawKind {
    Constant,
    /// `log value = slope · log t + c`
    Power,
    /// `value^q = slope · log t + c`
    Log,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GrowthLaw {
    pub kind: LawKind,
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
    /// What the law is fitted against (`truncation`, `radius`, `1/a`, ...).
    pub variable: String,
}

impl GrowthLaw {
    pub fn constant(value: f64, variable: &str) -> Self {
        GrowthLaw {
            kind: LawKind::Constant,
            slope: 0.0,
            intercept: value,
            r2: 1.0,
            variable: variable.to_string(),
        }
    }
}

/// Fits both a power law and a log law (on `value^q`) and returns the
/// better one; `None` with fewer than three usable points.
pub fn fit_growth(params: &[f64], values: &[f64], q: f64, variable: &str) -> Option<GrowthLaw> {
    let pts: Vec<(f64, f64)> = params
        .iter()
        .zip(values)
        .filter(|(t, v)| **t > 0.0 && v.is_finite() && **v > 0.0)
        .map(|(t, v)| (*t, *v))
        .collect();
    if pts.len() < 3 {
        return None;
    }
    let lt: Vec<f64> = pts.iter().map(|p| p.0.ln()).collect();
    let lv: Vec<f64> = pts.iter().map(|p| p.1.ln()).collect();
    let vq: Vec<f64> = pts.iter().map(|p| p.1.powf(q)).collect();
    let pow = fit_line(&lt, &lv)?;
    let log = fit_line(&lt, &vq)?;
    let (kind, f) = if log.r2 >= pow.r2 {
        (LawKind::Log, log)
    } else {
        (LawKind::Power, pow)
    };
    Some(GrowthLaw {
        kind,
        slope: f.slope,
        intercept: f.intercept,
        r2: f.r2,
        variable: variable.to_string(),
    })
}

/// Truncation of improper radial integrals to `[h, t]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Truncation {
    pub h: f64,
    pub t: f64,
}

impl Default for Truncation {
    fn default() -> Self {
        Truncation { h: 1e-4, t: 1e4 }
    }
}

impl Truncation {
    pub fn scaled(&self, s: f64) -> Self {
        Truncation {
            h: self.h * s,
            t: self.t * s,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConditionReport {
    pub condition: String,
    pub finite: bool,
    /// Best estimate of the defining supremum (present when finite).
    pub constant: Option<f64>,
    pub divergence_law: Option<GrowthLaw>,
    pub truncation: Truncation,
    /// `(parameter, value)` pairs behind the supremum (radii, `|y|`, ...).
    pub samples: Vec<(f64, f64)>,
    /// `(truncation, constant)` pairs of the truncation sweep.
    pub running: Vec<(f64, f64)>,
    /// Location of the supremum.
    pub argmax: Option<Vec<f64>>,
    /// Power-law exponent of a divergent tail, when detected analytically.
    pub tail_exponent: Option<f64>,
    /// Sample values agree to within the flatness tolerance.
    pub parameter_independent: Option<bool>,
    pub notes: Vec<String>,
}

impl ConditionReport {
    pub fn new(condition: &str, truncation: Truncation) -> Self {
        ConditionReport {
            condition: condition.to_string(),
            finite: true,
            constant: None,
            divergence_law: None,
            truncation,
            samples: Vec::new(),
            running: Vec::new(),
            argmax: None,
            tail_exponent: None,
            parameter_independent: None,
            notes: Vec::new(),
        }
    }

    pub fn zero(condition: &str, truncation: Truncation) -> Self {
        let mut r = Self::new(condition, truncation);
        r.constant = Some(0.0);
        r.parameter_independent = Some(true);
        r.notes.push("weight is identically zero".into());
        r
    }

    /// Marks the report divergent with the law fitted to the running sweep.
    pub fn diverge(&mut self, q: f64, variable: &str, reason: String) {
        self.finite = false;
        self.constant = None;
        let (t, v): (Vec<f64>, Vec<f64>) = self.running.iter().copied().unzip();
        let law = fit_growth(&t, &v, q, variable).unwrap_or(GrowthLaw {
            kind: LawKind::Power,
            slope: f64::INFINITY,
            intercept: 0.0,
            r2: 0.0,
            variable: variable.to_string(),
        });
        self.divergence_law = Some(law);
        self.notes.push(reason);
    }
}

/// `(max − min) / max` of the finite entries; `∞` if any entry is not finite.
pub fn relative_spread(values: &[f64]) -> f64 {
    if values.iter().any(|v| !v.is_finite()) {
        return f64::INFINITY;
    }
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    if max == 0.0 {
        0.0
    } else {
        (max - min) / max.abs()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn growth_fit_picks_the_right_law() {
        let t = [1e1, 1e2, 1e3, 1e4];
        let logv: Vec<f64> = t.iter().map(|x: &f64| (3.0 + 2.0 * x.ln()).powf(0.75)).collect();
        let g = fit_growth(&t, &logv, 4.0 / 3.0, "truncation").unwrap();
        assert_eq!(g.kind, LawKind::Log);
        assert!((g.slope - 2.0).abs() < 1e-10);
        let pw: Vec<f64> = t.iter().map(|x: &f64| 5.0 * x.powf(0.25)).collect();
        let g = fit_growth(&t, &pw, 1.0, "truncation").unwrap();
        assert_eq!(g.kind, LawKind::Power);
        assert!((g.slope - 0.25).abs() < 1e-10);
    }

    #[test]
    fn spread() {
        assert_eq!(relative_spread(&[2.0, 2.0]), 0.0);
        assert!((relative_spread(&[1.0, 2.0]) - 0.5).abs() < 1e-15);
        assert!(relative_spread(&[1.0, f64::INFINITY]).is_infinite());
    }
}
