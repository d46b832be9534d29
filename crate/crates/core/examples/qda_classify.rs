// Discriminant classification with quantum-estimated inner products, next to the exact path.

use qdasim::io::Preset;
use qdasim::qda::{classify_all, fit, Path};

pub fn run_example() -> qdasim::error::Result<f64> {
    let train = Preset::ThreeGauss.generate(60, 21)?;
    let test = Preset::ThreeGauss.generate(20, 22)?;
    let model = fit(&train, 100.0)?.with_quantum_inversions()?;
    for (c, inv) in model.quantum_inversions().unwrap_or_default().iter().enumerate() {
        println!("class {} inversion success {:.4}", c + 1, inv.success);
    }

    let quantum = classify_all(&model, &test, Path::Quantum, 8192, 1)?;
    let exact = classify_all(&model, &test, Path::Classical, 0, 1)?;
    let agree = quantum.iter().zip(&exact).filter(|(q, e)| q.chosen == e.chosen).count();
    let correct = quantum.iter().zip(test.labels()).filter(|(q, &l)| q.chosen == l).count();
    let first = &quantum[0];
    println!(
        "first sample: values {:?} ± {:?}, margin {:.3}",
        first.values, first.standard_errors, first.margin
    );
    println!("agreement {agree}/{}, accuracy {correct}/{}", test.len(), test.len());
    Ok(agree as f64 / test.len() as f64)
}

fn main() -> qdasim::error::Result<()> {
    run_example().map(|_| ())
}
