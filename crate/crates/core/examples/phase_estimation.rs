// Phase estimation with a density operator as its own generator, on both realizations.

use qdasim::linalg::DensityOperator;
use qdasim::qsim::{phase_estimation, sample_eigenpairs, PhaseEstimation, EIGENVALUE};
use qdasim::random::{density_with_spectrum, rng};

pub fn run_example() -> qdasim::error::Result<Vec<f64>> {
    let gen = density_with_spectrum(&[0.25, 0.75], &mut rng(2));
    let input = DensityOperator::maximally_mixed(2);

    let exact = phase_estimation(&gen, &input, &PhaseEstimation::new(2))?;
    let probs = exact.probabilities(EIGENVALUE)?;
    println!("exact register distribution {probs:?}");

    let sim = phase_estimation(&gen, &input, &PhaseEstimation::new(2).simulated(4096))?;
    println!("simulated register distribution {:?}", sim.probabilities(EIGENVALUE)?);

    for s in sample_eigenpairs(&exact, 1000, 7)? {
        println!("outcome {}  λ = {}  frequency {:.3}", s.register_value, s.eigenvalue, s.frequency);
    }
    Ok(probs)
}

fn main() -> qdasim::error::Result<()> {
    run_example().map(|_| ())
}
