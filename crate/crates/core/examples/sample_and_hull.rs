//! Draws a Poisson-Gaussian sample and prints its hull statistics.

use gausspoly::hull::euler_defect;
use gausspoly::{convex_hull, sample_poisson_gaussian, SeedPath};

fn main() -> gausspoly::Result<()> {
    for (d, lambda) in [(2, 1e4), (3, 1e3), (4, 1e3)] {
        let sample = sample_poisson_gaussian(lambda, d, SeedPath::new(1))?;
        let hull = convex_hull(&sample.points)?;
        println!(
            "d = {d}, lambda = {lambda}: {} points, f = {:?}, volume = {:.4}, euler defect = {}",
            sample.len(),
            hull.f_vector,
            hull.volume,
            euler_defect(&hull.f_vector)
        );
    }
    Ok(())
}
