// The class separation sits along a low-variance axis, so PCA picks the wrong direction
// and LDA does not.

use qdasim::io::Preset;
use qdasim::lda::{fisher_criterion, pca, project, quantum_lda};

pub fn run_example() -> qdasim::error::Result<(f64, f64)> {
    let data = Preset::Adversarial.generate(150, 5)?;
    let lda = quantum_lda(&data, 1, 100.0, 0.1, 8, 5)?;
    let pc = pca(&data, 1)?;
    let (j_lda, j_pca) = (fisher_criterion(&data, &lda)?, fisher_criterion(&data, &pc)?);
    println!("LDA direction {:?}", lda.directions[0].as_slice());
    println!("PCA direction {:?}", pc.directions[0].as_slice());
    println!("J(LDA) = {j_lda:.3}, J(PCA) = {j_pca:.5}");

    let reduced = project(&data, &lda)?;
    println!("projected to {} feature(s): {:?}", reduced.dim(), reduced.feature_names());
    Ok((j_lda, j_pca))
}

fn main() -> qdasim::error::Result<()> {
    run_example().map(|_| ())
}
