//! Scaling of the radius-window incidence statistic on C_0.8 x C_0.8.
//!
//! Above the critical dimension the mass of tuples with `|R - t| < ε`
//! should scale like ε.

use fractal_radii::incidence::{exhaustive_windows, fit_profile, monte_carlo_windows};
use fractal_radii::{CantorSpec, SetSpec};

fn main() -> fractal_radii::Result<()> {
    let c = CantorSpec::with_dimension(0.8)?;
    let spec = SetSpec::cantor_product(c.clone(), c);
    let eps: Vec<f64> = (3..=10).map(|k| 0.5f64.powi(k)).collect();
    let t = 1.0;
    let windows: Vec<(f64, f64)> = eps.iter().map(|&e| (t, e)).collect();

    let small = spec.realize(3, 1 << 20)?;
    let exact = exhaustive_windows(&small, &windows, 1 << 32)?;
    println!("exhaustive, depth 3 ({} atoms):", small.len());
    for (e, est) in eps.iter().zip(&exact) {
        println!("  eps {e:.2e}  mass {:.4e}", est.estimate);
    }

    let sampler = spec.sampler(12, false)?;
    let mc = monte_carlo_windows(&sampler, &windows, 1 << 21, 42)?;
    let fit = fit_profile(&eps, &mc)?;
    println!("Monte Carlo, depth 12, 2^21 tuples:");
    for (e, est) in eps.iter().zip(&mc) {
        println!(
            "  eps {e:.2e}  mass {:.4e} +- {:.1e}",
            est.estimate, est.stderr
        );
    }
    println!("slope {:.3}, r2 {:.4}", fit.slope, fit.r_squared);
    Ok(())
}
