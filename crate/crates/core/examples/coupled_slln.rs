//! A coupled path of intensities 2^k with monotone hull volumes.

use gausspoly::{convex_hull, coupled_path, SeedPath};

fn main() -> gausspoly::Result<()> {
    let lambdas: Vec<f64> = (1..=14).map(|k| 2f64.powi(k)).collect();
    let path = coupled_path(&lambdas, 2, SeedPath::new(3))?;
    let mut previous = 0.0;
    for level in 0..path.levels() {
        let sample = path.level(level);
        let volume = match convex_hull(&sample.points) {
            Ok(p) => p.volume,
            Err(_) => 0.0,
        };
        let marker = if volume >= previous { "" } else { "  decreased" };
        println!("lambda = {:>6}: {:>6} points, volume {volume:.6}{marker}", sample.lambda, sample.len());
        previous = volume;
    }
    Ok(())
}
