//! Self-normalized vertex counts against the normal law.

use gausspoly::harness::{run_experiment, ExperimentConfig, ExperimentKind, Summary};

fn main() -> gausspoly::Result<()> {
    let mut config = ExperimentConfig::new(ExperimentKind::Clt);
    config.lambdas = vec![1e3, 5e3];
    config.replicates = 300;
    config.seed = 11;
    let report = run_experiment(&config, 4)?;
    if let Summary::Clt { points } = &report.summary {
        for p in points {
            println!(
                "lambda = {}: mean {:.3}, sd {:.3}, KS {:.4}, lattice KS {:?}",
                p.lambda, p.mean, p.sd, p.ks, p.ks_lattice
            );
        }
    }
    for c in &report.checks {
        println!(
            "{} {}: {:.4} (tolerance {:.4})",
            if c.passed { "pass" } else { "fail" },
            c.name,
            c.value,
            c.tolerance
        );
    }
    Ok(())
}
