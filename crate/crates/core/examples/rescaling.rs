//! Maps sample points to the rescaled window and back, and lists the
//! extreme points of the germ-grain process.

use gausspoly::harness::audit_points;
use gausspoly::rescale::{critical_radius, min_admissible_lambda, radius_identity_sides, scale_point, unscale_point};
use gausspoly::{sample_poisson_gaussian, SeedPath};

fn main() -> gausspoly::Result<()> {
    for d in 2..=5 {
        println!("d = {d}: smallest admissible lambda = {:.3}", min_admissible_lambda(d));
    }
    let lambda = 1e3;
    let r = critical_radius(lambda, 3)?;
    let (lhs, rhs) = radius_identity_sides(&[0.0, 0.6, 0.8], r * r / 2.0, lambda)?;
    println!("radius identity at h = R²/2: {lhs:.15e} vs {rhs:.15e}");

    let sample = sample_poisson_gaussian(lambda, 3, SeedPath::new(2))?;
    let mut worst = 0.0f64;
    for x in sample.points.iter().take(5) {
        let w = scale_point(x, lambda)?;
        let back = unscale_point(&w)?;
        worst = worst.max(x.iter().zip(&back).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max));
        println!("x = {x:.4?} -> v = {:.4?}, h = {:.4}", w.v, w.h);
    }
    println!("largest round-trip error: {worst:.3e}");
    let (violations, rate) = audit_points(&sample.points)?;
    println!("extreme points outside the vertex set: {violations}, agreement rate {rate:.3}");
    Ok(())
}
