//! Extreme points of the rescaled process against hull vertices.

use gausspoly::harness::agreement_audit;

fn main() -> gausspoly::Result<()> {
    let rows = agreement_audit(2, &[1e2, 1e3, 1e4], 50, 5, 4)?;
    for r in rows {
        println!(
            "lambda = {:>7}: {} replicates, {} inclusion violations, agreement rate {:.4}",
            r.lambda, r.replicates, r.inclusion_violations, r.agreement_rate
        );
    }
    Ok(())
}
