// One density-exponentiation slice against exact conjugation: the error falls as Δt².

use qdasim::linalg::{CMatrix, DensityOperator, C64};
use qdasim::qsim::density_exponentiation_step;
use qdasim::random::{random_density, rng};

fn exact(sigma: &DensityOperator, rho: &DensityOperator, dt: f64) -> CMatrix {
    let eig = sigma.eig();
    let d = CMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
        eig.eigenvalues.len(),
        eig.eigenvalues.iter().map(|&l| C64::from_polar(1.0, -l * dt)),
    ));
    let u = &eig.eigenvectors * d * eig.eigenvectors.adjoint();
    &u * rho.matrix() * u.adjoint()
}

pub fn run_example() -> qdasim::error::Result<Vec<f64>> {
    let mut r = rng(5);
    let sigma = random_density(3, 10.0, &mut r);
    let rho = random_density(3, 10.0, &mut r);
    let mut errors = vec![];
    for dt in [0.2, 0.1, 0.05, 0.025] {
        let step = density_exponentiation_step(&sigma, &rho, dt)?;
        let err = (step.matrix() - exact(&sigma, &rho, dt)).norm();
        println!("Δt = {dt:<6} error {err:.3e}");
        errors.push(err);
    }
    Ok(errors)
}

fn main() -> qdasim::error::Result<()> {
    run_example().map(|_| ())
}
