//! Riesz potential of the unit disk indicator at the origin (exact value 2π)
//! under grid refinement, and the FFT potential of a bump.

use swlab::fields::{ball_indicator, make_bump};
use swlab::quad::{potential_on_grid, riesz_potential, FieldSamples, GridSpec, KernelSpec, Source};

fn main() -> swlab::Result<()> {
    let k = KernelSpec::riesz(2, 1.0)?;
    let disk = ball_indicator(2, &[0.0, 0.0], 1.0);
    let exact = std::f64::consts::TAU;
    for n in [64, 128, 256, 512] {
        let g = GridSpec::new(2, 2.0, n)?;
        let v = riesz_potential(Source::Field(&disk, g), &k, &[vec![0.0, 0.0]])?[0][0];
        println!("n={n:<4} I1 chi(0) = {v:.6}  error {:.2e}", (v - exact).abs());
    }

    let bump = make_bump(2, &[0.0, 0.0], 1.0, true)?;
    let s = FieldSamples::sample(GridSpec::new(2, 2.0, 128)?, &bump)?;
    let pot = potential_on_grid(&s, &k)?;
    println!("unit-mass bump: max I1 phi = {:.5}", pot.max_abs());
    Ok(())
}
