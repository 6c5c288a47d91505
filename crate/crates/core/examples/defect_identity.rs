//! Splits the defect volume over hull vertices and checks that the atoms
//! add up to `κ_d R^d - vol K`.

use gausspoly::functionals::{pair, xi_face, xi_volume, Functional, TestFunction};
use gausspoly::hull::SolidAngleOptions;
use gausspoly::{convex_hull, sample_poisson_gaussian, SeedPath};

fn main() -> gausspoly::Result<()> {
    let sample = sample_poisson_gaussian(1e4, 2, SeedPath::new(7))?;
    let hull = convex_hull(&sample.points)?;
    let atoms = xi_volume(&sample, &hull, &SolidAngleOptions::default())?;
    println!("critical radius R = {:.6}", atoms.radius);
    println!("defect volume     = {:.12}", atoms.defect);
    println!("R^-1 Σ ξ_V        = {:.12}", atoms.mass() / atoms.radius);
    println!("residual          = {:.3e}", atoms.defect_residual());

    let faces = xi_face(&sample, &hull, 1)?;
    println!("Σ ξ_f1 = {} against f1 = {}", faces.mass(), hull.f_vector[1]);
    for f in [TestFunction::Constant, TestFunction::Coordinate(0), TestFunction::CapBump(0.5)] {
        println!("<μ_V, {f}> = {:.6}", pair(&atoms, &f, atoms.radius)?);
    }
    println!("{} has {} atoms", Functional::Volume, atoms.atoms.len());
    Ok(())
}
