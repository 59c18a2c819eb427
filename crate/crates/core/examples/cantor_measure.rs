//! Builds Cantor-type measures and checks their box-counting dimension.

use fractal_radii::measures::{box_dimension, build_cantor, frostman_ratio};
use fractal_radii::{CantorSpec, SetSpec};

fn main() -> fractal_radii::Result<()> {
    let thirds = CantorSpec::middle_thirds();
    let m = build_cantor(&thirds, 8);
    println!(
        "middle thirds, depth 8: {} atoms, resolution {:.3e}, similarity dimension {:.4}",
        m.len(),
        m.resolution(),
        thirds.similarity_dimension()
    );

    let c = CantorSpec::with_dimension(0.8)?;
    let square = SetSpec::cantor_product(c.clone(), c);
    let m = square.realize(8, 1 << 20)?;
    let scales: Vec<f64> = (1..=6).map(|k| 0.5f64.powi(k)).collect();
    let fit = box_dimension(&m, &scales)?;
    println!(
        "C_0.8 x C_0.8, depth 8: {} atoms, box dimension {:.3} (r2 {:.4})",
        m.len(),
        fit.slope,
        fit.r_squared
    );
    for s in [1.2, 1.6, 1.9] {
        let f = frostman_ratio(&m, s, 32, 1)?;
        println!(
            "  sup mu(B(x,r)) / r^{s} = {:.3} at r = {:.3e}",
            f.ratio, f.radius
        );
    }
    Ok(())
}
