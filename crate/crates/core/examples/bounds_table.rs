//! Tabulates the concentration, cumulant and moment bounds.

use gausspoly::bounds::{
    concentration_bound, concentration_branch_switch, cumulant_bound, moment_envelope, ss_bounds, ss_parameters,
    weights, BoundConstants, SsKind, Statistic,
};
use gausspoly::functionals::Functional;

fn main() -> gausspoly::Result<()> {
    let consts = BoundConstants::default();
    for d in 2..=4 {
        for stat in [Statistic::Volume, Statistic::Face(0)] {
            println!("d = {d}, {stat:?}: E = {}, θ = {:.5}", stat.exponent(d)?, stat.theta(d)?);
        }
        let w = weights(Functional::Face(1), d)?;
        println!("  weights of f1: {w:?}, exponent {}", w.exponent(d));
    }

    let (lambda, d) = (1e4, 2);
    let stat = Statistic::Face(0);
    println!("branch switch at y = {:.4}", concentration_branch_switch(stat, lambda, d, &consts)?);
    let (gamma, delta) = ss_parameters(stat, lambda, d, &consts)?;
    println!("{:>6} {:>14} {:>14}", "y", "bound", "from cumulants");
    for i in 0..=8 {
        let y = i as f64;
        let direct = concentration_bound(stat, y, lambda, d, &consts)?;
        let via_cumulants = ss_bounds(SsKind::Tail, y, gamma, delta, &consts)?;
        println!("{y:>6} {direct:>14.6e} {via_cumulants:>14.6e}");
    }
    for k in 1..=4 {
        let (lo, hi) = moment_envelope(k, lambda, d, stat, &consts)?;
        println!("k = {k}: moment envelope [{lo:.3e}, {hi:.3e}]");
    }
    for k in 3..=6 {
        let c = cumulant_bound(k, lambda, d, Functional::Face(0), 1.0, &consts)?;
        println!("k = {k}: cumulant bound {c:.3e}");
    }
    Ok(())
}
