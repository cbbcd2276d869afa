//! The failure modes: scalar data at alpha = 0, divergence-free data at
//! alpha = 1, and operators that are not cocanceling.

use swlab::lab::{
    claim_convergence_probe, counterexample_alpha1_probe, counterexample_scalar_probe, necessity_probe,
    DivfreeProbeSpec, ScalarProbeSpec, TrendPolicy, TrendReport,
};
use swlab::opalg::HomogeneousOperator;
use swlab::weights::SWParams;

fn show(r: &TrendReport) {
    let law = r
        .law
        .as_ref()
        .map(|l| format!("{:?} slope {:.4} R^2 {:.6}", l.kind, l.slope, l.r2));
    println!("{}: {:?} ({})", r.probe, r.verdict, law.unwrap_or_default());
    for n in &r.notes {
        println!("    {n}");
    }
}

fn main() -> swlab::Result<()> {
    let policy = TrendPolicy::default();
    let scalar = SWParams::p_eq_1(2, 1.0, 0.0, 0.25)?;
    let spec = ScalarProbeSpec {
        a_list: vec![1e-1, 1e-2, 1e-3, 1e-4],
        eps: 1e-6,
        normalize: true,
    };
    show(&counterexample_scalar_probe(&scalar, &spec, &policy)?);

    let a1 = SWParams::p_eq_1(2, 1.0, 1.0, -0.5)?;
    show(&counterexample_alpha1_probe(
        &a1,
        &DivfreeProbeSpec::default(),
        &policy,
    )?);

    let op = HomogeneousOperator::partial_of_component(2, 2, 0, 0)?;
    show(&necessity_probe(&op, &scalar, &[2.0, 4.0, 8.0, 16.0], &policy)?);

    let c = claim_convergence_probe(2, 1.0, &[1.0, 2.0, 4.0, 8.0, 16.0], &[1.0, 2.0])?;
    for (r, errs, slope) in &c.curves {
        println!(
            "|K*p - K| at |x|={r}: {:?} slope {:?}",
            errs.iter().map(|e| format!("{e:.3}")).collect::<Vec<_>>(),
            slope
        );
    }
    Ok(())
}
