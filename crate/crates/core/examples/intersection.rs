//! Annulus slices of C_0.9 x C_0.9 about one center: the dilation set and
//! the box-counting dimension of the heaviest slice.

use fractal_radii::intersection::{annulus_mass, dilation_set, intersection_dimension};
use fractal_radii::kv::linear_grid;
use fractal_radii::{CantorSpec, SetSpec};

fn main() -> fractal_radii::Result<()> {
    let c = CantorSpec::with_dimension(0.9)?;
    let m = SetSpec::cantor_product(c.clone(), c).realize(9, 1 << 20)?;
    let a = [0.37, 0.81];
    for delta in [0.02, 0.01, 0.005] {
        let g = dilation_set(&m, &a, delta, 0.0, &linear_grid(0.0, 1.5, delta / 4.0)?)?;
        println!(
            "delta {delta}: {} intervals, Lebesgue estimate {:.4}",
            g.intervals.len(),
            g.lebesgue_estimate
        );
    }
    let h = m.resolution();
    let g = dilation_set(&m, &a, h, 0.0, &linear_grid(0.0, 1.5, h)?)?;
    let (r, _) = g
        .r_grid
        .iter()
        .zip(&g.masses)
        .fold((0.0, 0.0), |b, (&r, &w)| if w > b.1 { (r, w) } else { b });
    let slice = annulus_mass(&m, &a, r, h)?;
    let scales: Vec<f64> = (4..=8).map(|k| 0.5f64.powi(k)).collect();
    let fit = intersection_dimension(&m, &a, r, h, &scales)?;
    println!(
        "heaviest slice r = {r:.4}: {} atoms, mass {:.4}, dimension {:.3}",
        slice.retained.len(),
        slice.total_mass,
        fit.slope
    );
    Ok(())
}
