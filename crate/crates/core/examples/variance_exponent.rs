//! Growth of the vertex-count variance against log log λ.

use gausspoly::harness::{run_experiment, ExperimentConfig, ExperimentKind, Summary};

fn main() -> gausspoly::Result<()> {
    let mut config = ExperimentConfig::new(ExperimentKind::VarianceExponent);
    config.replicates = 200;
    config.lambdas = (6..=10).map(|k| (k as f64).exp()).collect();
    let report = run_experiment(&config, 4)?;
    if let Summary::VarianceExponent { points, fit, target, .. } = &report.summary {
        for p in points {
            println!("lambda = {:>10.1}: variance {:.3}", p.lambda, p.variance);
        }
        println!("slope {:.3}, 95% interval [{:.3}, {:.3}], asymptotic {target}", fit.slope, fit.ci_low, fit.ci_high);
    }
    Ok(())
}
