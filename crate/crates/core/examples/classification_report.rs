//! Builds a metrics report from predictions and prints it as a table and
//! as CSV.

use emigrade::metrics::classification_report;
use emigrade::NoiseLevel;

fn levels(v: &[u8]) -> Vec<NoiseLevel> {
    v.iter().map(|&l| NoiseLevel::new(l).unwrap()).collect()
}

fn main() -> emigrade::Result<()> {
    let truth = levels(&[1, 1, 2, 2, 2, 3, 3, 3, 4, 4, 5, 5]);
    let predicted = levels(&[1, 1, 2, 1, 2, 3, 4, 3, 4, 4, 5, 5]);
    let report = classification_report(&predicted, &truth)?;
    print!("{}", report.to_text());
    println!();
    print!("{}", report.to_csv());
    println!();
    print!("{}", report.confusion_csv());
    Ok(())
}
