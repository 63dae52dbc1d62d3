//! Grid moduli of total boundedness and a pigeonhole spot check.

use metastab::numkernel::{AmbientSet, Point};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> metastab::Result<()> {
    let sets = [
        ("unit square", AmbientSet::unit_box(2)),
        ("box [-1,1]", AmbientSet::new_box(Point::new(vec![-1.0])?, Point::new(vec![1.0])?)?),
        ("ball r=1 in R^3", AmbientSet::new_ball(Point::zeros(3), 1.0)?),
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for (name, set) in &sets {
        let gamma = set.total_boundedness_modulus();
        print!("{name:<16} b={}  gamma:", set.diameter_bound());
        for k in 0..4 {
            print!(" {}", gamma.at(k).expect("small grid"));
        }
        println!();

        let k = 2;
        let eps = 1.0 / (k as f64 + 1.0);
        let pts: Vec<Point> = (0..=gamma.at(k).expect("small grid")).map(|_| set.sample(&mut rng)).collect();
        let closest = pts
            .iter()
            .enumerate()
            .flat_map(|(i, a)| pts[i + 1..].iter().map(move |b| a.dist(b).expect("same dimension")))
            .fold(f64::INFINITY, f64::min);
        println!("  {} points, closest pair {closest:.4} <= {eps:.4}", pts.len());
    }
    Ok(())
}
