// Synthetic presets, CSV round trip, polynomial features and a JSON run report.

use qdasim::io::{load_csv, save_csv, Preset, RunReport};
use qdasim::lda::{classical_lda_oracle, feature_map, fisher_criterion};

pub fn run_example() -> qdasim::error::Result<f64> {
    let dir = std::env::temp_dir().join(format!("qdasim-example-{}", std::process::id()));
    std::fs::create_dir_all(&dir)?;
    let path = dir.join("circles.csv");

    let data = Preset::Circles.generate(80, 4)?;
    save_csv(&data, &path)?;
    let back = load_csv(&path)?;
    println!("{} samples, classes {:?}, features {:?}", back.len(), back.class_names(), back.feature_names());

    // concentric rings: no linear direction separates them, squared features do
    let linear = fisher_criterion(&back, &classical_lda_oracle(&back, 1, 100.0)?)?;
    let lifted = feature_map(&back, 2)?;
    let quadratic = fisher_criterion(&lifted, &classical_lda_oracle(&lifted, 1, 100.0)?)?;
    println!("features after degree-2 map: {:?}", lifted.feature_names());
    println!("J linear {linear:.4}, J quadratic {quadratic:.4}");

    let mut report = RunReport::new("example", 4);
    report.param("preset", "circles")?.metric("fisher_linear", linear)?.metric("fisher_quadratic", quadratic)?;
    println!("{}", report.to_json()?);
    std::fs::remove_dir_all(&dir)?;
    Ok(quadratic / linear)
}

fn main() -> qdasim::error::Result<()> {
    run_example().map(|_| ())
}
