//! Riesz energies of the middle-thirds measure across generations.
//!
//! Below the dimension log 2 / log 3 the self-similar completion settles
//! to a plateau; above it the energy grows geometrically.

use fractal_radii::measures::build_cantor;
use fractal_radii::spectral::{energy_integral, energy_integral_with, DiagonalPolicy};
use fractal_radii::CantorSpec;

fn main() -> fractal_radii::Result<()> {
    let spec = CantorSpec::middle_thirds();
    println!("depth  s=0.5 off-diag  s=0.5 completed  s=0.8 off-diag");
    for n in [6u32, 8, 10, 12] {
        let m = build_cantor(&spec, n);
        let off = energy_integral(&m, 0.5)?;
        let full = energy_integral_with(&m, 0.5, DiagonalPolicy::self_similar_for(&spec, n))?;
        let hot = energy_integral(&m, 0.8)?;
        println!(
            "{n:>5}  {:>14.6}  {:>16.6}  {:>14.4}",
            off.value, full.value, hot.value
        );
    }
    Ok(())
}
