use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::operator::{CMatrix, HomogeneousOperator};
use super::sampling::{halton_directions, random_directions};
use super::subspace::{column_space, intersect, nullspace, SubspaceBasis};

pub const RANK_TOL: f64 = 1e-10;
/// Absolute threshold when intersecting orthonormal bases.
const INTERSECT_TOL: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Confirmed,
    Refuted,
    HeuristicPass,
    HeuristicFail,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Confirmed => "confirmed",
            Verdict::Refuted => "refuted",
            Verdict::HeuristicPass => "heuristic_pass",
            Verdict::HeuristicFail => "heuristic_fail",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Witness {
    Subspace(SubspaceBasis),
    /// A direction `ξ` and a unit vector in the kernel of the symbol there.
    Direction {
        xi: Vec<f64>,
        kernel: Vec<Complex64>,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PropertyReport {
    pub property: String,
    pub verdict: Verdict,
    pub witness: Option<Witness>,
    pub evidence: BTreeMap<String, f64>,
    pub samples_used: usize,
}

impl PropertyReport {
    /// First witness vector, if any.
    pub fn witness_vector(&self) -> Option<Vec<Complex64>> {
        match &self.witness {
            Some(Witness::Subspace(s)) => s.vectors().first().cloned(),
            Some(Witness::Direction { kernel, .. }) => Some(kernel.clone()),
            None => None,
        }
    }
}

fn singular_values(m: &CMatrix) -> Vec<f64> {
    let mut s: Vec<f64> = m.clone().svd(false, false).singular_values.iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

/// Exact decision: `∩_ξ ker L(ξ)` equals the nullspace of the stacked
/// coefficients, since `ξ ↦ L(ξ)v` vanishes iff every `b_α v` does.
pub fn cocanceling_check(op: &HomogeneousOperator) -> PropertyReport {
    let stacked = op.stacked();
    let null = nullspace(&stacked, RANK_TOL);
    let s = singular_values(&stacked);
    let mut evidence = BTreeMap::new();
    evidence.insert("sigma_max".into(), s.first().copied().unwrap_or(0.0));
    let smin = if stacked.nrows() >= stacked.ncols() {
        s.get(op.fiber_in() - 1).copied().unwrap_or(0.0)
    } else {
        0.0
    };
    evidence.insert("sigma_min".into(), smin);
    evidence.insert("common_kernel_dim".into(), null.dim() as f64);
    let (verdict, witness) = if null.is_trivial() {
        (Verdict::Confirmed, None)
    } else {
        (Verdict::Refuted, Some(Witness::Subspace(null)))
    };
    PropertyReport {
        property: "cocanceling".into(),
        verdict,
        witness,
        evidence,
        samples_used: 0,
    }
}

fn sample_directions(dim: usize, n_samples: usize, seed: u64) -> Vec<Vec<f64>> {
    let half = n_samples.div_ceil(2);
    let mut dirs = halton_directions(dim, half);
    dirs.extend(random_directions(dim, n_samples - half, seed));
    dirs
}

/// Intersects the images `A(ξ)[E]` over sampled directions. A trivial
/// running intersection certifies the property; a persistent candidate is
/// only evidence against it.
pub fn canceling_check(op: &HomogeneousOperator, n_samples: usize, tol: f64, seed: u64) -> PropertyReport {
    let dirs = sample_directions(op.dim(), n_samples.max(1), seed);
    let mut running = SubspaceBasis::whole(op.fiber_out(), tol);
    let mut used = 0;
    for xi in &dirs {
        used += 1;
        let a = op.eval_symbol(xi).expect("direction has operator dimension");
        let img = column_space(&a, tol);
        running = intersect(&running, &img, INTERSECT_TOL);
        if running.is_trivial() {
            break;
        }
    }
    let mut evidence = BTreeMap::new();
    evidence.insert("candidate_dim".into(), running.dim() as f64);
    if running.is_trivial() {
        return PropertyReport {
            property: "canceling".into(),
            verdict: Verdict::Confirmed,
            witness: None,
            evidence,
            samples_used: used,
        };
    }
    // fresh directions: worst distance of a candidate vector to A(ξ)[E]
    let fresh = random_directions(op.dim(), n_samples.max(1), seed.wrapping_add(0x9e37_79b9));
    let mut worst: f64 = 0.0;
    for xi in &fresh {
        let img = column_space(&op.eval_symbol(xi).unwrap(), tol);
        for v in running.vectors() {
            worst = worst.max(img.distance(v));
        }
    }
    evidence.insert("worst_residual_fresh".into(), worst);
    PropertyReport {
        property: "canceling".into(),
        verdict: Verdict::HeuristicFail,
        witness: Some(Witness::Subspace(running)),
        evidence,
        samples_used: used + fresh.len(),
    }
}

/// Smallest singular value of `A(ξ)` as an injectivity measure, with a
/// unit kernel-direction estimate.
pub fn min_singular(op: &HomogeneousOperator, xi: &[f64]) -> (f64, Vec<Complex64>) {
    let a = op.eval_symbol(xi).expect("direction has operator dimension");
    let null = nullspace(&a, 0.0);
    // nullspace with tol 0 keeps only exact zeros; fall back to the last
    // right singular vector
    let (r, c) = a.shape();
    let mut padded = CMatrix::zeros(r.max(c), c);
    padded.view_mut((0, 0), (r, c)).copy_from(&a);
    let svd = padded.svd(false, true);
    let vt = svd.v_t.unwrap();
    let (mut idx, mut smin) = (0, f64::INFINITY);
    for (i, &s) in svd.singular_values.iter().enumerate() {
        if s < smin {
            smin = s;
            idx = i;
        }
    }
    let v = if !null.is_trivial() {
        null.vectors()[0].clone()
    } else {
        vt.row(idx).iter().map(|z| z.conj()).collect()
    };
    (smin, v)
}

pub fn ellipticity_check(
    op: &HomogeneousOperator,
    n_samples: usize,
    refine: bool,
    tol: f64,
    seed: u64,
) -> PropertyReport {
    let dirs = sample_directions(op.dim(), n_samples.max(1), seed);
    let mut best_xi = dirs[0].clone();
    let mut best = f64::INFINITY;
    for xi in &dirs {
        let (s, _) = min_singular(op, xi);
        if s < best {
            best = s;
            best_xi = xi.clone();
        }
    }
    let mut evals = dirs.len();
    if refine && op.dim() > 1 {
        let (xi, s, n) = pattern_refine(op, best_xi, best);
        best_xi = xi;
        best = s;
        evals += n;
    }
    let (_, kernel) = min_singular(op, &best_xi);
    let mut evidence = BTreeMap::new();
    evidence.insert("min_singular_value".into(), best);
    evidence.insert("tolerance".into(), tol);
    let pass = best > tol;
    PropertyReport {
        property: "ellipticity".into(),
        verdict: if pass {
            Verdict::HeuristicPass
        } else {
            Verdict::HeuristicFail
        },
        witness: if pass {
            None
        } else {
            Some(Witness::Direction { xi: best_xi, kernel })
        },
        evidence,
        samples_used: evals,
    }
}

/// Coordinate pattern search on the sphere starting at `xi`.
fn pattern_refine(op: &HomogeneousOperator, mut xi: Vec<f64>, mut best: f64) -> (Vec<f64>, f64, usize) {
    let n = xi.len();
    let mut step = 0.1;
    let mut evals = 0;
    while step > 1e-9 && evals < 20_000 {
        let mut improved = false;
        for axis in 0..n {
            for sign in [1.0, -1.0] {
                let mut cand = xi.clone();
                cand[axis] += sign * step;
                let norm = cand.iter().map(|x| x * x).sum::<f64>().sqrt();
                cand.iter_mut().for_each(|x| *x /= norm);
                let (s, _) = min_singular(op, &cand);
                evals += 1;
                if s < best {
                    best = s;
                    xi = cand;
                    improved = true;
                }
            }
        }
        if !improved {
            step *= 0.5;
        }
    }
    (xi, best, evals)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::opalg::operator::Builtin;

    fn op(kind: Builtin, n: usize) -> HomogeneousOperator {
        HomogeneousOperator::builtin(kind, n).unwrap()
    }

    #[test]
    fn cocanceling_builtins() {
        for n in 2..=4 {
            assert_eq!(
                cocanceling_check(&op(Builtin::Divergence, n)).verdict,
                Verdict::Confirmed
            );
            assert_eq!(cocanceling_check(&op(Builtin::Curl, n)).verdict, Verdict::Confirmed);
        }
        // gradient's kernel is trivial already at one ξ
        assert_eq!(cocanceling_check(&op(Builtin::Gradient, 2)).verdict, Verdict::Confirmed);
    }

    #[test]
    fn partial_of_first_component_is_refuted() {
        let l = HomogeneousOperator::partial_of_component(2, 2, 0, 0).unwrap();
        let r = cocanceling_check(&l);
        assert_eq!(r.verdict, Verdict::Refuted);
        let w = r.witness_vector().unwrap();
        assert!(w[0].norm() < 1e-14);
        assert!((w[1].norm() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn canceling_examples() {
        let g = canceling_check(&op(Builtin::Gradient, 2), 128, 1e-10, 1);
        assert_eq!(g.verdict, Verdict::Confirmed);
        assert!(g.samples_used >= 2);
        let lap = canceling_check(&op(Builtin::Laplacian, 2), 128, 1e-10, 1);
        assert_eq!(lap.verdict, Verdict::HeuristicFail);
        assert_eq!(lap.evidence["candidate_dim"], 1.0);
        let div = canceling_check(&op(Builtin::Divergence, 3), 128, 1e-10, 1);
        assert_eq!(div.verdict, Verdict::HeuristicFail);
    }

    #[test]
    fn ellipticity_examples() {
        let g = ellipticity_check(&op(Builtin::Gradient, 3), 128, true, 1e-8, 3);
        assert_eq!(g.verdict, Verdict::HeuristicPass);
        assert!((g.evidence["min_singular_value"] - 1.0).abs() < 1e-12);
        let l = ellipticity_check(&op(Builtin::Laplacian, 2), 128, false, 1e-8, 3);
        assert!((l.evidence["min_singular_value"] - 1.0).abs() < 1e-12);
        let d = ellipticity_check(&op(Builtin::Divergence, 2), 64, false, 1e-8, 3);
        assert_eq!(d.verdict, Verdict::HeuristicFail);
        match d.witness {
            Some(Witness::Direction { xi, kernel }) => {
                let dot = xi[0] * kernel[0].re + xi[1] * kernel[1].re;
                assert!(dot.abs() < 1e-12);
            }
            _ => panic!("expected a direction witness"),
        }
    }
}
