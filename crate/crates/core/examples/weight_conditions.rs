//! Admissibility of Stein-Weiss exponents and the pointwise and Hardy
//! conditions for power weights.

use swlab::weights::{
    hardy_constant, pointwise_condition, sw_admissible, HardyVariant, Regime, SWParams, Truncation, Weight,
};

fn main() -> swlab::Result<()> {
    for (alpha, beta) in [(0.25, 0.25), (-0.25, 0.5), (1.0, -0.5)] {
        let p = SWParams::p_eq_1(2, 1.0, alpha, beta)?;
        for regime in [Regime::PEq1, Regime::PEqOneScalar] {
            let a = sw_admissible(&p, regime);
            let failed: Vec<&str> = a.violations.iter().map(|v| v.condition.as_str()).collect();
            println!(
                "alpha={alpha:>5} beta={beta:>5} q={:.4} {regime:?}: admissible={} {failed:?}",
                p.q, a.pass
            );
        }
    }

    let radii: Vec<f64> = (0..9).map(|k| 10f64.powf(-2.0 + 0.5 * k as f64)).collect();
    let beta = 0.5;
    for alpha in [-0.25, 0.0] {
        let q = SWParams::p_eq_1(2, 1.0, alpha, beta)?.q;
        let r = pointwise_condition(
            &Weight::power(-beta * q),
            &Weight::power(alpha),
            2,
            1.0,
            q,
            &radii,
            Truncation::default(),
        )?;
        match (r.constant, &r.divergence_law) {
            (Some(c), _) if r.finite => println!("pointwise alpha={alpha}: finite, sup = {c:.5}"),
            (_, Some(l)) => println!(
                "pointwise alpha={alpha}: diverges, {:?} law slope {:.4} (R^2 {:.4})",
                l.kind, l.slope, l.r2
            ),
            _ => println!("pointwise alpha={alpha}: diverges"),
        }
    }

    let h = hardy_constant(
        &Weight::power(-3.0),
        &Weight::power(-1.0),
        2,
        1.0,
        HardyVariant::W2,
        &radii,
        Truncation::default(),
    )?;
    println!(
        "Hardy product (w2): {:.6} (2 pi = {:.6})",
        h.constant.unwrap_or(f64::NAN),
        std::f64::consts::TAU
    );
    Ok(())
}
