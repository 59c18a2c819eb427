//! Runs an experiment from config text, as the command-line tool does.

use fractal_radii::experiment::{run, validate, ExperimentConfig};

const CONFIG: &str = "
experiment = dimension
seed = 11
spec.kind = product
spec.0.kind = cantor_dim
spec.0.dim = 0.8
spec.1.kind = cantor_dim
spec.1.dim = 0.8
depth = 7
scales = 2^-1:2^-6:0.5
";

fn main() -> fractal_radii::Result<()> {
    let dir = std::env::temp_dir().join("fractal-radii-example");
    let cfg = ExperimentConfig::parse(CONFIG, None)?.with_output(dir.join("dimension.csv"));
    print!("{}", validate(&cfg).to_text());
    let out = run(&cfg)?;
    for f in &out.files {
        println!("wrote {}", f.display());
        print!("{}", std::fs::read_to_string(f)?);
    }
    println!("{}", out.summary);
    Ok(())
}
