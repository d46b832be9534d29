// Fixed-point evaluation of θ = arcsin(C·f(λ)) with shift-and-add arithmetic.

use qdasim::linalg::SpectralFunction;
use qdasim::rotation::{arcsin_series, dyadic_grid, RotationConfig, RotationPipeline};

pub fn run_example() -> qdasim::error::Result<f64> {
    let grid = dyadic_grid(100.0, 8);
    let f = SpectralFunction::Inverse;
    let c = 0.5 / f.eval(grid[0]);
    let pipe = RotationPipeline::new(f, c, 100.0, RotationConfig::default())?;

    let mut worst: f64 = 0.0;
    for &l in grid.iter().step_by(32) {
        let theta = pipe.angle(l)?.to_f64();
        let exact = (c * f.eval(l)).asin();
        println!("λ = {l:.5}  θ = {theta:.6}  exact {exact:.6}");
    }
    for &l in &grid {
        worst = worst.max((pipe.angle(l)?.to_f64() - (c * f.eval(l)).asin()).abs());
    }
    println!("max error over {} grid points: {worst:.3e}", grid.len());
    println!("four-term arcsin(0.5) = {:.7}", arcsin_series(0.5, 4));
    Ok(worst)
}

fn main() -> qdasim::error::Result<()> {
    run_example().map(|_| ())
}
