use serde::{Deserialize, Serialize};

use crate::numerics::fit_line;
use crate::weights::{relative_spread, LawKind};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TrendVerdict {
    Bounded,
    Divergent,
    Inconclusive,
}

/// Decision thresholds for sweeps, each emitted with its rationale.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrendPolicy {
    /// Minimum R² of a growth law behind a divergent verdict.
    pub r2: f64,
    /// Maximum relative spread behind a flat bounded verdict.
    pub spread: f64,
    /// Relative tolerance for growth matched against a derived target.
    pub target: f64,
}

impl Default for TrendPolicy {
    fn default() -> Self {
        TrendPolicy {
            r2: 0.99,
            spread: 0.05,
            target: 0.2,
        }
    }
}

impl TrendPolicy {
    pub fn rationale(&self) -> Vec<String> {
        vec![
            format!("divergent: monotone values with a growth law of R^2 > {}", self.r2),
            format!(
                "bounded: relative spread below {} or geometrically shrinking increments",
                self.spread
            ),
            format!("derived growth targets matched within {}", self.target),
        ]
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FittedLaw {
    pub kind: LawKind,
    /// Power exponent, or slope of `value^q` against the log of the parameter.
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrendReport {
    pub probe: String,
    /// Name of the swept parameter (`eps`, `lambda`, `1/a`, ...).
    pub parameter: String,
    pub params: Vec<f64>,
    /// Named observed sequences, each aligned with `params`.
    pub observed: Vec<(String, Vec<f64>)>,
    pub law: Option<FittedLaw>,
    pub verdict: TrendVerdict,
    /// Fewer points than a fit needs, or degenerate input.
    pub degenerate: bool,
    pub relative_spread: f64,
    pub notes: Vec<String>,
}

impl TrendReport {
    pub fn series(&self, name: &str) -> Option<&[f64]> {
        self.observed.iter().find(|(n, _)| n == name).map(|(_, v)| v.as_slice())
    }
}

fn monotone_increasing(v: &[f64]) -> bool {
    v.windows(2).all(|w| w[1] > w[0])
}

/// Classifies `values` against the growing parameter `t`. `q` selects the
/// log law `value^q = slope · ln t + c`.
pub fn classify(
    t: &[f64],
    values: &[f64],
    q: f64,
    policy: &TrendPolicy,
) -> (TrendVerdict, Option<FittedLaw>, f64, bool) {
    let spread = relative_spread(values);
    if values.len() < 4 || values.iter().any(|v| !v.is_finite()) {
        let verdict = if values.iter().all(|v| v.is_finite()) {
            TrendVerdict::Bounded
        } else {
            TrendVerdict::Divergent
        };
        return (verdict, None, spread, true);
    }
    let lt: Vec<f64> = t.iter().map(|x| x.ln()).collect();
    let vq: Vec<f64> = values.iter().map(|v| v.abs().powf(q)).collect();
    let lv: Vec<f64> = values.iter().map(|v| v.abs().max(1e-300).ln()).collect();
    let log = fit_line(&lt, &vq);
    let pow = fit_line(&lt, &lv);
    if spread < policy.spread {
        let mean = values.iter().sum::<f64>() / values.len() as f64;
        let law = FittedLaw {
            kind: LawKind::Constant,
            slope: 0.0,
            intercept: mean,
            r2: 1.0,
        };
        return (TrendVerdict::Bounded, Some(law), spread, false);
    }
    let best = match (log, pow) {
        (Some(l), Some(p)) => {
            if l.r2 >= p.r2 {
                Some((LawKind::Log, l))
            } else {
                Some((LawKind::Power, p))
            }
        }
        (Some(l), None) => Some((LawKind::Log, l)),
        (None, Some(p)) => Some((LawKind::Power, p)),
        _ => None,
    };
    let law = best.map(|(kind, f)| FittedLaw {
        kind,
        slope: f.slope,
        intercept: f.intercept,
        r2: f.r2,
    });
    let up = monotone_increasing(values);
    if let Some(l) = &law {
        if up && l.r2 > policy.r2 && l.slope > 0.0 {
            return (TrendVerdict::Divergent, law, spread, false);
        }
    }
    // increments shrinking geometrically: a convergent sequence
    let inc: Vec<f64> = values.windows(2).map(|w| (w[1] - w[0]).abs()).collect();
    let shrinking = inc.windows(2).all(|w| w[1] <= 0.6 * w[0] + 1e-300);
    let verdict = if shrinking {
        TrendVerdict::Bounded
    } else {
        TrendVerdict::Inconclusive
    };
    (verdict, law, spread, false)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn verdicts() {
        let p = TrendPolicy::default();
        let t = [10.0, 100.0, 1e3, 1e4];
        let log: Vec<f64> = t.iter().map(|x: &f64| (2.0 * x.ln()).powf(0.75)).collect();
        let (v, law, _, _) = classify(&t, &log, 4.0 / 3.0, &p);
        assert_eq!(v, TrendVerdict::Divergent);
        assert_eq!(law.unwrap().kind, LawKind::Log);
        let conv: Vec<f64> = t.iter().map(|x: &f64| 1.0 - x.powf(-0.5)).collect();
        assert_eq!(classify(&t, &conv, 1.0, &p).0, TrendVerdict::Bounded);
        let flat = [1.0, 1.01, 0.99, 1.0];
        assert_eq!(classify(&t, &flat, 1.0, &p).0, TrendVerdict::Bounded);
        let (v, _, _, degenerate) = classify(&[1.0], &[3.0], 1.0, &p);
        assert_eq!(v, TrendVerdict::Bounded);
        assert!(degenerate);
    }
}
