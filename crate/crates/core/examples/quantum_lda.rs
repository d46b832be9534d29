// Quantum LDA on a three-class Gaussian set, checked against the classical Fisher directions.

use qdasim::io::Preset;
use qdasim::lda::{classical_lda_oracle, fisher_criterion, quantum_lda_run, QuantumLdaConfig};

pub fn run_example() -> qdasim::error::Result<Vec<f64>> {
    let data = Preset::ThreeGauss.generate(60, 3)?;
    let run = quantum_lda_run(&data, &QuantumLdaConfig::new(2, 8, 3))?;
    let oracle = classical_lda_oracle(&data, 2, 100.0)?;

    println!("register draws: {}", run.draws);
    for e in &run.eigenpairs {
        println!("eigenvalue {:.4}  frequency {:.3}", e.eigenvalue, e.frequency);
    }
    let mut overlaps = vec![];
    for (q, c) in run.basis.directions.iter().zip(&oracle.directions) {
        let cos = q.dot(c).abs() / (q.norm() * c.norm());
        println!("direction overlap |cos| = {cos:.6}");
        overlaps.push(cos);
    }
    println!(
        "Fisher criterion: quantum {:.4}, classical {:.4}",
        fisher_criterion(&data, &run.basis)?,
        fisher_criterion(&data, &oracle)?
    );
    Ok(overlaps)
}

fn main() -> qdasim::error::Result<()> {
    run_example().map(|_| ())
}
