//! Samples from a measure are a pure function of the seed: the same points
//! come back whatever the size of the thread pool.

use fractal_radii::measures::sample;
use fractal_radii::{CantorSpec, SetSpec};

fn main() -> fractal_radii::Result<()> {
    let c = CantorSpec::with_dimension(0.7)?;
    let m = SetSpec::cantor_product(c.clone(), c).realize(6, 1 << 20)?;
    let draw = |threads| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| sample(&m, 200_000, 9, true))
    };
    let a = draw(1);
    let b = draw(8);
    let same = (0..a.len()).all(|i| a.point(i) == b.point(i));
    println!("first points: {:?} {:?}", a.point(0), a.point(1));
    println!("1 thread vs 8 threads identical: {same}");
    Ok(())
}
