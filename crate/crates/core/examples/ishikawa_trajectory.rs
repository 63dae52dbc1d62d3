//! Ishikawa and Mann iterates side by side, plus the shifted view.

use metastab::iterate::{ishikawa, mann, shifted_view};
use metastab::operators::gallery_operator;
use metastab::schedule::canonical_schedule;
use metastab::Point;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let op = gallery_operator("rotation-pi3").expect("gallery operator");
    let x0 = Point::new(vec![0.6, 0.3])?;
    let w = canonical_schedule();

    let ish = ishikawa(&op, &x0, &w, 5_000)?;
    let man = mann(&op, &x0, &w, 5_000)?;
    println!("{:>6}  {:>12}  {:>12}", "n", "ishikawa", "mann");
    for n in [0, 1, 10, 100, 1_000, 5_000] {
        println!("{n:>6}  {:>12.3e}  {:>12.3e}", ish.residuals()[n], man.residuals()[n]);
    }

    let z = shifted_view(&ish, 25)?;
    println!("z_0 = x_{} = {}", z.shift(), z.x()[0]);
    println!("reprojections: {}", ish.reprojections().len());

    let mut csv = Vec::new();
    ish.write_csv(&mut csv)?;
    let text = String::from_utf8_lossy(&csv);
    for line in text.lines().take(4) {
        println!("{line}");
    }
    Ok(())
}
