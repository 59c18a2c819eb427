//! Decay of sphere transforms and of the radius-configuration measure.

use fractal_radii::kv::linear_grid;
use fractal_radii::measures::build_cantor;
use fractal_radii::spectral::{
    decay_envelope_fit, measure_ft, mu1_directional_ft, sphere_ft, sphere_ft_closed_form_3d,
    Direction,
};
use fractal_radii::CantorSpec;

fn main() -> fractal_radii::Result<()> {
    let xi = linear_grid(4.0, 128.0, 0.05)?;

    let circle: Vec<(f64, f64)> = xi
        .iter()
        .map(|&x| Ok((x, sphere_ft(2, &[x, 0.0], None)?.norm())))
        .collect::<fractal_radii::Result<_>>()?;
    println!(
        "circle: decay exponent {:.3}",
        decay_envelope_fit(&circle)?.decay_exponent()
    );

    for x in [5.3, 20.7, 80.1] {
        let v = sphere_ft(3, &[0.0, 0.0, x], None)?;
        println!(
            "  S^2 at |xi| = {x}: {:.6e} (closed form {:.6e})",
            v.re,
            sphere_ft_closed_form_3d(x)
        );
    }

    for dir in [Direction::Opposite, Direction::First] {
        let s: Vec<(f64, f64)> = xi
            .iter()
            .map(|&x| Ok((x, mu1_directional_ft(2, &[x, 0.0], dir)?.norm())))
            .collect::<fractal_radii::Result<_>>()?;
        println!(
            "mu1 in the plane, {} direction: exponent {:.3}",
            dir.label(),
            decay_envelope_fit(&s)?.decay_exponent()
        );
    }

    let m = build_cantor(&CantorSpec::middle_thirds(), 12);
    for k in 1..=4 {
        let x = 3f64.powi(k);
        println!(
            "  middle-thirds transform at {x}: |mu^| = {:.5}",
            measure_ft(&m, &[x])?.norm()
        );
    }
    Ok(())
}
