//! Covered length of the set of circumradii, for a planar fractal and for a
//! measure confined to a line.

use fractal_radii::intersection::{radii_set_measure, radii_set_measure_with};
use fractal_radii::measures::build_cantor;
use fractal_radii::{CantorSpec, DiscreteMeasure, SetSpec};

fn main() -> fractal_radii::Result<()> {
    let c = CantorSpec::with_dimension(0.8)?;
    let eps = [0.05, 0.01, 0.002];

    let square = SetSpec::cantor_product(c.clone(), c.clone()).realize(4, 1 << 20)?;
    // Near-collinear triples have huge radii; keep those below 2.
    for cl in radii_set_measure_with(&square, &eps, 1 << 22, 5, Some(2.0))? {
        println!(
            "square: eps {:.3}  covered {:.4}  ({} radii, exhaustive {})",
            cl.epsilon, cl.covered_length, cl.radii, cl.exhaustive
        );
    }

    let line = build_cantor(&c, 6);
    let coords: Vec<f64> = line
        .iter()
        .flat_map(|(p, _)| [p[0], 2.0 * p[0] - 1.0])
        .collect();
    let on_line = DiscreteMeasure::new(2, coords, line.masses().to_vec(), line.resolution())?;
    for cl in radii_set_measure(&on_line, &eps, 1 << 22, 5)? {
        println!("line: eps {:.3}  covered {}", cl.epsilon, cl.covered_length);
    }
    Ok(())
}
