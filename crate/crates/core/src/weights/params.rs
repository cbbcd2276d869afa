use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const EQ_TOL: f64 = 1e-12;

/// Exponents of `‖|x|^{−β} I_ℓ f‖_q <= C ‖|x|^α f‖_p` in `R^N`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SWParams {
    pub dim: usize,
    pub p: f64,
    pub q: f64,
    pub ell: f64,
    pub alpha: f64,
    pub beta: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    /// Classical range `1 < p <= q`.
    PGt1,
    /// `p = 1` for fields in the kernel of a cocanceling operator.
    PEq1,
    /// `p = 1` for unconstrained scalar data (requires `α < 0`).
    PEqOneScalar,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub condition: String,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Admissibility {
    pub regime: Regime,
    pub pass: bool,
    pub violations: Vec<Violation>,
}

impl SWParams {
    pub fn new(dim: usize, p: f64, q: f64, ell: f64, alpha: f64, beta: f64) -> Result<Self> {
        let s = SWParams {
            dim,
            p,
            q,
            ell,
            alpha,
            beta,
        };
        s.validate()?;
        Ok(s)
    }

    /// `p = 1` with `q` fixed by `1/q = 1 + (α + β − ℓ)/N`.
    pub fn p_eq_1(dim: usize, ell: f64, alpha: f64, beta: f64) -> Result<Self> {
        if dim == 0 || !(ell > 0.0 && ell < dim as f64) {
            return Err(Error::arg(format!("need 0 < ell < N, got ell={ell} with N={dim}")));
        }
        let inv_q = 1.0 + (alpha + beta - ell) / dim as f64;
        if !(inv_q > 0.0 && inv_q <= 1.0) {
            return Err(Error::Inadmissible(format!(
                "1/q = 1 + (alpha + beta - ell)/N = {inv_q} is outside (0, 1]"
            )));
        }
        Self::new(dim, 1.0, 1.0 / inv_q, ell, alpha, beta)
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.dim as f64;
        if self.dim == 0 {
            return Err(Error::arg("N must be >= 1"));
        }
        if !(self.ell > 0.0 && self.ell < n) {
            return Err(Error::arg(format!(
                "need 0 < ell < N, got ell={} with N={}",
                self.ell, self.dim
            )));
        }
        if !(self.p >= 1.0) || !(self.q >= 1.0) || !self.p.is_finite() || !self.q.is_finite() {
            return Err(Error::arg(format!(
                "need p >= 1 and q >= 1, got p={}, q={}",
                self.p, self.q
            )));
        }
        if !self.alpha.is_finite() || !self.beta.is_finite() {
            return Err(Error::arg("weight exponents must be finite"));
        }
        Ok(())
    }

    /// `p' = p/(p−1)` (`∞` at `p = 1`).
    pub fn p_conj(&self) -> f64 {
        if self.p == 1.0 {
            f64::INFINITY
        } else {
            self.p / (self.p - 1.0)
        }
    }

    /// `1/q − 1/p − (α + β − ℓ)/N`, zero when the scaling relation holds.
    pub fn scaling_defect(&self) -> f64 {
        1.0 / self.q - 1.0 / self.p - (self.alpha + self.beta - self.ell) / self.dim as f64
    }
}

pub fn sw_admissible(params: &SWParams, regime: Regime) -> Admissibility {
    let mut v = Vec::new();
    let n = params.dim as f64;
    let mut fail = |condition: &str, detail: String| {
        v.push(Violation {
            condition: condition.to_string(),
            detail,
        })
    };
    if let Err(e) = params.validate() {
        fail("well-formed", e.to_string());
    }
    let defect = params.scaling_defect();
    let scaling_ok = defect.abs() <= EQ_TOL;
    let beta_ok = params.beta < n / params.q;
    match regime {
        Regime::PGt1 => {
            if !(params.p > 1.0) {
                fail("p > 1", format!("p = {}", params.p));
            }
            if params.p > params.q {
                fail("p <= q", format!("p = {} > q = {}", params.p, params.q));
            }
            let bound = n / params.p_conj();
            if !(params.alpha < bound) {
                fail("(i) alpha < N/p'", format!("alpha = {} >= {bound}", params.alpha));
            }
            if !beta_ok {
                fail("(i) beta < N/q", format!("beta = {} >= {}", params.beta, n / params.q));
            }
            if !(params.alpha + params.beta >= 0.0) {
                fail(
                    "(ii) alpha + beta >= 0",
                    format!("alpha + beta = {}", params.alpha + params.beta),
                );
            }
            if !scaling_ok {
                fail(
                    "(iii) 1/q = 1/p + (alpha + beta - ell)/N",
                    format!("defect {defect:.3e}"),
                );
            }
        }
        Regime::PEq1 | Regime::PEqOneScalar => {
            if params.p != 1.0 {
                fail("p = 1", format!("p = {}", params.p));
            }
            if regime == Regime::PEq1 {
                if params.dim < 2 {
                    fail("N >= 2", format!("N = {}", params.dim));
                }
                if !(params.alpha >= 0.0 && params.alpha < 1.0) {
                    fail("0 <= alpha < 1", format!("alpha = {}", params.alpha));
                }
            } else if !(params.alpha < 0.0) {
                fail("alpha < 0", format!("alpha = {}", params.alpha));
            }
            if !beta_ok {
                fail("beta < N/q", format!("beta = {} >= {}", params.beta, n / params.q));
            }
            if !(params.alpha + params.beta > 0.0) {
                fail(
                    "alpha + beta > 0",
                    format!("alpha + beta = {}", params.alpha + params.beta),
                );
            }
            if !scaling_ok {
                fail("1/q = 1 + (alpha + beta - ell)/N", format!("defect {defect:.3e}"));
            }
        }
    }
    Admissibility {
        regime,
        pass: v.is_empty(),
        violations: v,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn classical_example_passes() {
        let p = SWParams::new(2, 4.0 / 3.0, 4.0, 1.0, 0.0, 0.0).unwrap();
        let a = sw_admissible(&p, Regime::PGt1);
        assert!(a.pass, "{:?}", a.violations);
    }

    #[test]
    fn p_eq_1_examples() {
        let p = SWParams::p_eq_1(2, 1.0, 0.25, 0.25).unwrap();
        assert!((p.q - 4.0 / 3.0).abs() < 1e-14);
        assert!(sw_admissible(&p, Regime::PEq1).pass);
        let bad = SWParams { alpha: 1.0, ..p };
        let a = sw_admissible(&bad, Regime::PEq1);
        assert!(!a.pass);
        assert!(a.violations.iter().any(|v| v.condition == "0 <= alpha < 1"));
    }

    #[test]
    fn scalar_regime_needs_negative_alpha() {
        let p = SWParams::p_eq_1(2, 1.0, -0.25, 0.5).unwrap();
        assert!(sw_admissible(&p, Regime::PEqOneScalar).pass);
        let p0 = SWParams::p_eq_1(2, 1.0, 0.0, 0.5).unwrap();
        assert!(!sw_admissible(&p0, Regime::PEqOneScalar).pass);
        assert!(SWParams::new(2, 1.0, 2.0, 2.0, 0.0, 0.0).is_err());
    }
}
