//! Ellipticity, canceling and cocanceling of the built-in operators, and the
//! projection maps of the cocanceling ones.

use swlab::opalg::{
    canceling_check, cocanceling_check, ellipticity_check, solve_projection_maps, tphi_constant, Builtin,
    HomogeneousOperator,
};

fn main() -> swlab::Result<()> {
    let mut ops = vec![
        HomogeneousOperator::builtin(Builtin::Gradient, 2)?,
        HomogeneousOperator::builtin(Builtin::Divergence, 3)?,
        HomogeneousOperator::builtin(Builtin::Curl, 3)?,
        HomogeneousOperator::builtin(Builtin::Laplacian, 2)?,
    ];
    // ∂₁ acting on the first of two components
    ops.push(HomogeneousOperator::partial_of_component(2, 2, 0, 0)?);
    for op in &ops {
        let co = cocanceling_check(op);
        println!(
            "{:<14} N={} elliptic={:<15} canceling={:<15} cocanceling={}",
            op.name(),
            op.dim(),
            ellipticity_check(op, 256, true, 1e-10, 1).verdict.as_str(),
            canceling_check(op, 256, 1e-10, 1).verdict.as_str(),
            co.verdict.as_str()
        );
        match solve_projection_maps(op) {
            Ok(k) => println!(
                "    sum k_a b_a = Id to {:.1e}, T_phi constant {:.3}",
                k.residual,
                tphi_constant(op, &k)
            ),
            Err(e) => println!("    {e}; kernel witness {:?}", co.witness_vector()),
        }
    }
    Ok(())
}
