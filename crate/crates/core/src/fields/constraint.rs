use rayon::prelude::*;

use super::Differentiable;
use crate::error::{Error, Result};
use crate::opalg::HomogeneousOperator;
use crate::quad::GridSpec;

/// `max |L(D)f| / max |D^m f|` over the grid nodes, from exact derivatives.
/// Returns 0 when `D^m f` vanishes on the grid.
pub fn constraint_residual(op: &HomogeneousOperator, field: &dyn Differentiable, grid: &GridSpec) -> Result<f64> {
    if field.dim() != op.dim() || grid.dim != op.dim() {
        return Err(Error::DimensionMismatch {
            expected: op.dim(),
            got: field.dim(),
        });
    }
    if field.fiber() != op.fiber_in() {
        return Err(Error::DimensionMismatch {
            expected: op.fiber_in(),
            got: field.fiber(),
        });
    }
    let m = op.order() as usize;
    if field.max_order() < m {
        return Err(Error::MissingDerivative {
            requested: m,
            available: field.max_order(),
        });
    }
    let per_node: Vec<(f64, f64)> = (0..grid.len())
        .into_par_iter()
        .map(|i| -> Result<(f64, f64)> {
            let t = field.derivatives(&grid.coords(i), m)?;
            let lf = op.apply(|alpha| t.get(alpha));
            let res = lf.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
            Ok((res, t.norm_of_order(m)))
        })
        .collect::<Result<_>>()?;
    let (res, scale) = per_node
        .iter()
        .fold((0.0f64, 0.0f64), |(a, b), &(r, s)| (a.max(r), b.max(s)));
    Ok(if scale == 0.0 { 0.0 } else { res / scale })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::{divfree_family, gradient_field, make_bump, random_bump_field, Expr};
    use crate::opalg::Builtin;

    #[test]
    fn constrained_fields_have_tiny_residual() {
        let g = GridSpec::new(2, 1.5, 64).unwrap();
        let div = HomogeneousOperator::builtin(Builtin::Divergence, 2).unwrap();
        let phi = make_bump(2, &[0.1, 0.0], 1.0, true).unwrap();
        let f = divfree_family(&phi, 0.7).unwrap();
        assert!(constraint_residual(&div, &f, &g).unwrap() <= 1e-10);
        let curl = HomogeneousOperator::builtin(Builtin::Curl, 2).unwrap();
        let psi = Expr::Gaussian {
            center: vec![0.2, -0.1],
            width: 0.5,
        };
        let grad = gradient_field(&psi, 2, "grad");
        assert!(constraint_residual(&curl, &grad, &g).unwrap() <= 1e-10);
    }

    #[test]
    fn unconstrained_control_and_shape_errors() {
        let g = GridSpec::new(2, 1.5, 64).unwrap();
        let div = HomogeneousOperator::builtin(Builtin::Divergence, 2).unwrap();
        let f = random_bump_field(2, 2, 1.0, 3);
        assert!(constraint_residual(&div, &f, &g).unwrap() > 1e-2);
        let scalar = make_bump(2, &[0.0, 0.0], 1.0, false).unwrap();
        assert!(constraint_residual(&div, &scalar, &g).is_err());
    }
}
