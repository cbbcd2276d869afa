//! Weighted L1 inequality ratios for divergence-free fields: constant across
//! dilations whenever the exponents are admissible.

use swlab::fields::{divfree_family, make_bump};
use swlab::lab::{scale_invariance_suite, Constraint, GridPolicy, TrendPolicy};
use swlab::opalg::{Builtin, HomogeneousOperator};
use swlab::weights::SWParams;

fn main() -> swlab::Result<()> {
    let op = HomogeneousOperator::builtin(Builtin::Divergence, 2)?;
    let seed = make_bump(2, &[0.3, -0.2], 1.0, false)?;
    let eps = [0.25, 0.5, 1.0, 2.0, 4.0];
    for (alpha, beta) in [(0.25, 0.25), (0.5, 0.25), (0.0, 0.5)] {
        let params = SWParams::p_eq_1(2, 1.0, alpha, beta)?;
        let (trend, _) = scale_invariance_suite(
            |e| divfree_family(&seed, e),
            &eps,
            Constraint::Kernel(&op),
            &params,
            &GridPolicy::default(),
            &TrendPolicy::default(),
        )?;
        println!(
            "alpha={alpha} beta={beta} q={:.4}: ratios {:?} -> {:?}",
            params.q,
            trend
                .series("ratio")
                .unwrap_or(&[])
                .iter()
                .map(|r| format!("{r:.5}"))
                .collect::<Vec<_>>(),
            trend.verdict
        );
    }
    Ok(())
}
