//! Duality bound `|∫ φ·f| <= C ∫ |f| Σ_j |x|^j |D^j φ|` for `f` in the
//! kernel of a cocanceling operator.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fields::closed_form::random_bump_sum;
use crate::fields::{constraint_residual, gradient_field, random_divfree, random_poly_bump, ClosedFormField};
use crate::opalg::{solve_projection_maps, tphi_eval, HomogeneousOperator};
use crate::quad::GridSpec;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairResult {
    pub seed: u64,
    pub lhs: f64,
    pub rhs: f64,
    /// `|∫ φ·f − ∫ Tφ·f|` relative to `∫ |φ||f|`.
    pub identity_gap: f64,
    pub constraint_residual: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Lemma31Report {
    pub operator: String,
    pub constant: f64,
    pub pairs: Vec<PairResult>,
    pub violations: usize,
    pub max_ratio: f64,
    pub grid_points: usize,
}

/// Seeded compactly supported field in the kernel of `op`, for the
/// built-in divergence (stream fields) and curl (gradients).
pub fn kernel_field(op: &HomogeneousOperator, extent: f64, seed: u64) -> Result<ClosedFormField> {
    let dim = op.dim();
    match op.name() {
        "divergence" if dim >= 2 => Ok(random_divfree(dim, extent, seed)),
        "curl" if dim == 3 => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let psi = random_bump_sum(dim, 3, extent, &mut rng);
            Ok(gradient_field(&psi, dim, format!("random_gradient_{seed}")))
        }
        other => Err(Error::arg(format!(
            "no kernel field generator for operator `{other}` in dimension {dim}"
        ))),
    }
}

/// Runs `count` seeded pairs `(φ, f)` on an `n`-point grid over `[-2, 2]^N`.
pub fn lemma31_check(op: &HomogeneousOperator, count: usize, seed: u64, n: usize) -> Result<Lemma31Report> {
    let k = solve_projection_maps(op)?;
    let grid = GridSpec::new(op.dim(), 2.0, n)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let seeds: Vec<u64> = (0..count).map(|_| rng.random()).collect();
    let dv = grid.cell_volume();
    let mut constant = 0.0;
    let pairs = seeds
        .iter()
        .map(|&s| -> Result<PairResult> {
            let phi = random_poly_bump(op.dim(), op.fiber_in(), 2, 1.5, s);
            let f = kernel_field(op, 1.0, s.wrapping_add(1))?;
            let cres = constraint_residual(op, &f, &grid)?;
            let rows: Vec<[f64; 4]> = (0..grid.len())
                .into_par_iter()
                .map(|i| -> Result<[f64; 4]> {
                    let x = grid.coords(i);
                    let fv = f.value(&x);
                    let fnorm = fv.iter().map(|t| t * t).sum::<f64>().sqrt();
                    if fnorm == 0.0 {
                        return Ok([0.0; 4]);
                    }
                    let pv = phi.value(&x);
                    let t = tphi_eval(op, &k, &phi, &x)?;
                    let dot: f64 = pv.iter().zip(&fv).map(|(a, b)| a * b).sum();
                    let tdot: f64 = t.value.iter().zip(&fv).map(|(a, b)| a.re * b).sum();
                    let pnorm = pv.iter().map(|t| t * t).sum::<f64>().sqrt();
                    Ok([dot, tdot, fnorm * t.majorant, pnorm * fnorm])
                })
                .collect::<Result<_>>()?;
            let sum = |j: usize| rows.iter().map(|r| r[j]).sum::<f64>() * dv;
            constant = tphi_eval(op, &k, &phi, &vec![0.0; op.dim()])?.constant;
            let (dot, tdot, rhs, scale) = (sum(0), sum(1), sum(2), sum(3));
            Ok(PairResult {
                seed: s,
                lhs: dot.abs(),
                rhs,
                identity_gap: (dot - tdot).abs() / scale.max(f64::MIN_POSITIVE),
                constraint_residual: cres,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let violations = pairs.iter().filter(|p| p.lhs > p.rhs).count();
    let max_ratio = pairs.iter().map(|p| p.lhs / p.rhs).fold(0.0, f64::max);
    Ok(Lemma31Report {
        operator: op.name().to_string(),
        constant,
        pairs,
        violations,
        max_ratio,
        grid_points: grid.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::opalg::Builtin;

    #[test]
    fn divergence_pairs_hold() {
        let op = HomogeneousOperator::builtin(Builtin::Divergence, 2).unwrap();
        let r = lemma31_check(&op, 5, 7, 96).unwrap();
        assert_eq!(r.violations, 0);
        for p in &r.pairs {
            assert!(p.constraint_residual < 1e-8);
            assert!(p.identity_gap < 1e-3, "gap {}", p.identity_gap);
        }
    }
}
