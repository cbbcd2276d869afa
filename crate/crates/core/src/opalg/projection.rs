use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::multi_index::MultiIndex;
use super::operator::{CMatrix, HomogeneousOperator};
use crate::error::{Error, Result};
use crate::fields::Differentiable;
use crate::numerics::binomial;

pub const IDENTITY_TOL: f64 = 1e-10;

/// Maps `k_α: V → F` with `Σ_α k_α b_α = Id_F`.
#[derive(Clone, Debug, PartialEq)]
pub struct ProjectionMaps {
    pub maps: BTreeMap<MultiIndex, CMatrix>,
    /// `‖Σ k_α b_α − Id‖₂`
    pub residual: f64,
}

fn spectral_norm(m: &CMatrix) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.clone()
        .svd(false, false)
        .singular_values
        .iter()
        .copied()
        .fold(0.0, f64::max)
}

impl ProjectionMaps {
    /// `Σ_α k_α b_α`
    pub fn compose(&self, op: &HomogeneousOperator) -> CMatrix {
        let mut s = CMatrix::zeros(op.fiber_in(), op.fiber_in());
        for (alpha, b) in op.coeffs() {
            s += &self.maps[alpha] * b;
        }
        s
    }

    /// `Σ_α ‖k_α‖₂`
    pub fn norm_sum(&self) -> f64 {
        self.maps.values().map(spectral_norm).sum()
    }

    pub fn max_norm(&self) -> f64 {
        self.maps.values().map(spectral_norm).fold(0.0, f64::max)
    }
}

/// Minimal-Frobenius-norm solution of `Σ_α k_α b_α = Id_F`: with `B` the
/// stacked coefficients and `K = [k_α …]`, `K = B⁺`.
pub fn solve_projection_maps(op: &HomogeneousOperator) -> Result<ProjectionMaps> {
    let b = op.stacked();
    let pinv = b
        .clone()
        .pseudo_inverse(1e-13 * spectral_norm(&b))
        .map_err(|e| Error::Quadrature(format!("pseudo-inverse failed: {e}")))?;
    let fout = op.fiber_out();
    let mut maps = BTreeMap::new();
    for (i, alpha) in op.coeffs().keys().enumerate() {
        maps.insert(alpha.clone(), pinv.columns(i * fout, fout).into_owned());
    }
    let pm = ProjectionMaps { maps, residual: 0.0 };
    let id = CMatrix::identity(op.fiber_in(), op.fiber_in());
    let residual = spectral_norm(&(pm.compose(op) - id));
    if residual > IDENTITY_TOL {
        return Err(Error::NoIdentity { residual });
    }
    Ok(ProjectionMaps { residual, ..pm })
}

/// Value of the Leibniz remainder together with its majorant.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TphiValue {
    pub value: Vec<Complex64>,
    /// `C Σ_{j=1}^m |x|^j |D^j φ(x)|`
    pub majorant: f64,
    pub constant: f64,
}

/// `C = (Σ_β ‖k_β‖)(Σ_α ‖b_α‖) max_j binom(m, j)`: with `|x^μ| <= |x|^{|μ|}`
/// each `‖∂^{α−γ}P(x)‖ <= Σ_β ‖k_β‖ |x|^{|γ|}`, and
/// `Σ_{|γ|=j, γ<=α} binom(α,γ) = binom(m, j)`.
pub fn tphi_constant(op: &HomogeneousOperator, k: &ProjectionMaps) -> f64 {
    let m = op.order();
    let bsum: f64 = op.coeffs().values().map(spectral_norm).sum();
    let binom_max = (1..=m).map(|j| binomial(m, j)).fold(0.0, f64::max);
    k.norm_sum() * bsum * binom_max
}

/// `∂^η P(x) = Σ_{β>=η} k_β^* x^{β−η}/(β−η)!`, an `fiber_out × fiber_in` matrix.
fn p_derivative(k: &ProjectionMaps, eta: &MultiIndex, x: &[f64], fin: usize, fout: usize) -> CMatrix {
    let mut out = CMatrix::zeros(fout, fin);
    for (beta, kb) in &k.maps {
        if let Some(mu) = beta.checked_sub(eta) {
            let w = mu.monomial(x) / mu.factorial();
            if w != 0.0 {
                out += kb.adjoint() * Complex64::new(w, 0.0);
            }
        }
    }
    out
}

/// `T_φ(x) = −Σ_α b_α^* Σ_{0<γ<=α} binom(α,γ) ∂^{α−γ}P(x) ∂^γφ(x)`.
pub fn tphi_eval(
    op: &HomogeneousOperator,
    k: &ProjectionMaps,
    phi: &dyn Differentiable,
    x: &[f64],
) -> Result<TphiValue> {
    let m = op.order() as usize;
    if phi.dim() != op.dim() {
        return Err(Error::DimensionMismatch {
            expected: op.dim(),
            got: phi.dim(),
        });
    }
    if phi.fiber() != op.fiber_in() {
        return Err(Error::DimensionMismatch {
            expected: op.fiber_in(),
            got: phi.fiber(),
        });
    }
    if phi.max_order() < m {
        return Err(Error::MissingDerivative {
            requested: m,
            available: phi.max_order(),
        });
    }
    let d = phi.derivatives(x, m)?;
    let (fin, fout) = (op.fiber_in(), op.fiber_out());
    let mut value = vec![Complex64::new(0.0, 0.0); fin];
    for (alpha, b) in op.coeffs() {
        let badj = b.adjoint();
        for gamma in alpha.sub_indices() {
            if gamma.order() == 0 {
                continue;
            }
            let eta = alpha.checked_sub(&gamma).unwrap();
            let dp = p_derivative(k, &eta, x, fin, fout);
            let dphi = d.get(&gamma);
            let c = alpha.binomial(&gamma);
            let v = CMatrix::from_iterator(fin, 1, dphi.iter().map(|&t| Complex64::new(t, 0.0)));
            let term = &badj * (&dp * v) * Complex64::new(c, 0.0);
            for i in 0..fin {
                value[i] -= term[(i, 0)];
            }
        }
    }
    let constant = tphi_constant(op, k);
    let r = x.iter().map(|t| t * t).sum::<f64>().sqrt();
    let majorant = constant * (1..=m).map(|j| r.powi(j as i32) * d.norm_of_order(j)).sum::<f64>();
    Ok(TphiValue {
        value,
        majorant,
        constant,
    })
}

/// `H(ξ) = |ξ|^{ν−ℓ} (A^*A)^{−1} A^*(ξ)` for an elliptic operator `A` of order `ν`.
pub fn eval_h_symbol(a: &HomogeneousOperator, ell: f64, xi: &[f64]) -> Result<CMatrix> {
    let s = a.eval_symbol(xi)?;
    let r = xi.iter().map(|t| t * t).sum::<f64>().sqrt();
    if r == 0.0 {
        return Err(Error::arg("H(ξ) is undefined at ξ = 0"));
    }
    let (sigma, _) = super::properties::min_singular(a, xi);
    let scale = spectral_norm(&s).max(f64::MIN_POSITIVE);
    if a.fiber_out() < a.fiber_in() || sigma <= 1e-12 * scale {
        return Err(Error::EllipticityViolation {
            xi: xi.to_vec(),
            sigma_min: sigma,
        });
    }
    let sa = s.adjoint();
    let gram = &sa * &s;
    let inv = gram.try_inverse().ok_or_else(|| Error::EllipticityViolation {
        xi: xi.to_vec(),
        sigma_min: sigma,
    })?;
    let factor = r.powf(a.order() as f64 - ell);
    Ok(inv * sa * Complex64::new(factor, 0.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::opalg::operator::{cross_matrix, Builtin};
    use crate::opalg::sampling::random_directions;

    fn close(a: &CMatrix, b: &CMatrix, tol: f64) -> bool {
        (a - b).iter().all(|z| z.norm() <= tol)
    }

    #[test]
    fn divergence_maps_are_unit_columns() {
        for n in [2, 3] {
            let op = HomogeneousOperator::builtin(Builtin::Divergence, n).unwrap();
            let k = solve_projection_maps(&op).unwrap();
            assert!(k.residual <= 1e-12);
            for j in 0..n {
                let kj = &k.maps[&MultiIndex::unit(n, j)];
                let mut e = CMatrix::zeros(n, 1);
                e[(j, 0)] = Complex64::new(1.0, 0.0);
                assert!(close(kj, &e, 1e-12));
            }
        }
    }

    #[test]
    fn curl_maps_are_half_negative_cross() {
        let op = HomogeneousOperator::builtin(Builtin::Curl, 3).unwrap();
        let k = solve_projection_maps(&op).unwrap();
        for j in 0..3 {
            let expect = cross_matrix(j) * Complex64::new(-0.5, 0.0);
            assert!(close(&k.maps[&MultiIndex::unit(3, j)], &expect, 1e-12));
        }
    }

    #[test]
    fn non_cocanceling_has_no_identity() {
        let op = HomogeneousOperator::partial_of_component(2, 2, 0, 0).unwrap();
        assert!(matches!(solve_projection_maps(&op), Err(Error::NoIdentity { .. })));
    }

    #[test]
    fn h_symbol_examples() {
        let g = HomogeneousOperator::builtin(Builtin::Gradient, 2).unwrap();
        let h = eval_h_symbol(&g, 1.0, &[1.0, 0.0]).unwrap();
        assert!((h[(0, 0)].re - 1.0).abs() < 1e-14 && h[(0, 1)].norm() < 1e-14);
        for xi in random_directions(2, 100, 9) {
            let h = eval_h_symbol(&g, 0.5, &xi).unwrap();
            let a = g.eval_symbol(&xi).unwrap();
            let id = CMatrix::identity(1, 1);
            assert!(close(&(h.clone() * a), &id, 1e-10));
            let xi2: Vec<f64> = xi.iter().map(|t| 2.0 * t).collect();
            let h2 = eval_h_symbol(&g, 0.5, &xi2).unwrap();
            assert!(close(&h2, &(h * Complex64::new(2f64.powf(-0.5), 0.0)), 1e-10));
        }
        let d = HomogeneousOperator::builtin(Builtin::Divergence, 2).unwrap();
        assert!(matches!(
            eval_h_symbol(&d, 1.0, &[1.0, 0.0]),
            Err(Error::EllipticityViolation { .. })
        ));
    }
}
