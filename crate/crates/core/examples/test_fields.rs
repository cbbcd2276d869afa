//! Closed-form test fields: mollifiers, divergence-free fields and the
//! curl structure of the Riesz transform system.

use swlab::fields::band_limited::random_band_limited;
use swlab::fields::{constraint_residual, divfree_family, make_bump, mollifier_family, riesz_system_field};
use swlab::opalg::{Builtin, HomogeneousOperator};
use swlab::quad::{weighted_norm_closed, ClosedNormOptions, Domain, GridSpec};
use swlab::weights::PowerWeight;

fn main() -> swlab::Result<()> {
    let phi = make_bump(2, &[0.0, 0.0], 1.0, true)?;
    let div = HomogeneousOperator::builtin(Builtin::Divergence, 2)?;
    let w = PowerWeight::new(0.25);
    for eps in [0.25, 1.0, 4.0] {
        let pe = mollifier_family(&phi, eps)?;
        let f = divfree_family(&phi, eps)?;
        let ball = Domain::Ball { radius: eps };
        let opts = ClosedNormOptions::default();
        let mass = weighted_norm_closed(&|x: &[f64]| pe.norm_at(x), 2, &PowerWeight::new(0.0), 1.0, &ball, &opts)?;
        let wf = weighted_norm_closed(&|x: &[f64]| f.norm_at(x), 2, &w, 1.0, &ball, &opts)?;
        let res = constraint_residual(&div, &f, &GridSpec::new(2, eps, 32)?)?;
        println!("eps={eps:<5} |phi_eps|_1 = {mass:.6}  int |x|^1/4 |f_eps| = {wf:.5}  div f = {res:.1e}");
    }

    let u = random_band_limited(GridSpec::new(2, 1.0, 64)?, 8, 3)?;
    let r = riesz_system_field(&u)?;
    println!(
        "Riesz system: curl residual {:.1e}, sum R_j^2 + Id {:.1e}",
        r.curl_residual, r.identity_residual
    );
    Ok(())
}
