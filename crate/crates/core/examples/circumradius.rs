//! Circumradius of a few tuples, with the Cayley-Menger formula alongside.
//!
//! Run with `cargo run --example circumradius`.

use fractal_radii::circumsphere::{cayley_menger_radius, circumsphere};

fn main() -> fractal_radii::Result<()> {
    let tuples: [&[&[f64]]; 4] = [
        &[&[0.0, 0.0], &[2.0, 0.0], &[0.0, 2.0]],
        &[&[0.0, 0.0], &[1.0, 1.0], &[2.0, 2.0]],
        &[
            &[1.0, 0.0, 0.0],
            &[0.0, 1.0, 0.0],
            &[0.0, 0.0, 1.0],
            &[-1.0, 0.0, 0.0],
        ],
        &[
            &[0.0, 0.0, 0.0],
            &[1.0, 0.0, 0.0],
            &[0.0, 1.0, 0.0],
            &[1.0, 1.0, 0.0],
        ],
    ];
    for pts in tuples {
        let c = circumsphere(pts)?;
        println!("{pts:?}");
        match &c.center {
            Some(center) => println!("  center {center:?}, R = {:.12}", c.radius),
            None => println!("  degenerate, R = 0"),
        }
        println!("  Cayley-Menger R = {:.12}", cayley_menger_radius(pts)?);
    }
    Ok(())
}
