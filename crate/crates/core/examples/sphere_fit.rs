use fractal_radii::intersection::{unique_sphere_fit, SphereFit};

fn main() -> fractal_radii::Result<()> {
    let on_circle: Vec<Vec<f64>> = (0..7)
        .map(|k| {
            let t = k as f64 * 0.9;
            vec![1.0 + 2.0 * t.cos(), -0.5 + 2.0 * t.sin()]
        })
        .collect();
    let collinear: Vec<Vec<f64>> = (0..5).map(|k| vec![k as f64, 2.0 * k as f64]).collect();
    let mut noisy = on_circle.clone();
    noisy[3][0] += 0.1;

    for (name, pts) in [
        ("circle", &on_circle),
        ("line", &collinear),
        ("perturbed", &noisy),
    ] {
        let refs: Vec<&[f64]> = pts.iter().map(|p| p.as_slice()).collect();
        match unique_sphere_fit(&refs, 1e-9)? {
            SphereFit::Sphere {
                center,
                radius,
                residual,
            } => {
                println!("{name}: center {center:.6?}, radius {radius:.6}, residual {residual:.1e}")
            }
            SphereFit::Ambiguous => println!("{name}: no unique sphere"),
            SphereFit::Inconsistent { residual } => {
                println!("{name}: inconsistent, residual {residual:.3e}")
            }
        }
    }
    Ok(())
}
