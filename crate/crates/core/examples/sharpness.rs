//! Adversarial conditional profile on the strip construction.
//!
//! With Cantor columns of dimension 1/3 the heaviest tangent caps decay
//! like ε^(5/6); replacing the columns by full intervals restores ε^1.

use fractal_radii::sharpness::{adversarial_conditional_profile, uniform_strip, PairSearch};
use fractal_radii::{CantorSpec, SetSpec};

fn main() -> fractal_radii::Result<()> {
    let eps: Vec<f64> = (4..=10).map(|k| 0.5f64.powi(k)).collect();
    let search = PairSearch::default();
    let strip = SetSpec::counterexample(CantorSpec::with_dimension(1.0 / 3.0)?, 20);
    let p = adversarial_conditional_profile(&strip, 10.0, &eps, &search, None, 3)?;
    println!("depth {}", p.depth);
    for pt in &p.points {
        println!(
            "  eps {:.2e}  cap {:.4e}  band {:.4e}  a = {:.5}",
            pt.epsilon, pt.localized, pt.band, pt.a
        );
    }
    println!(
        "cantor columns: slope {:.3} (band {:.3})",
        p.fit.slope, p.band_fit.slope
    );

    let u = adversarial_conditional_profile(&uniform_strip(20), 10.0, &eps, &search, None, 3)?;
    println!("uniform columns: slope {:.3}", u.fit.slope);
    Ok(())
}
