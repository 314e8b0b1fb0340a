//! Measuring robustness: gradient checking, a single-step attack against
//! the full projected-gradient sweep, and the accuracy-vs-radius table.

use ecoc::attack::{fgsm, gradient_check, pgd_attack, pgd_sweep, AttackConfig};
use ecoc::classify::{make_gaussian_toy, train, BinaryLearnerSpec};
use ecoc::codebook::Codebook;

fn main() -> ecoc::Result<()> {
    let k = 10;
    let ds = make_gaussian_toy(k, 100, 3, 4.0, 0.8)?;
    let m = Codebook::one_vs_one(k)?;
    let te = train(&ds, &m, &BinaryLearnerSpec::default(), 0)?;

    // Sanity first: analytic gradients must match finite differences, or
    // the attack would silently under-measure.
    let check = gradient_check(&te, ds.row(0), 1e-4)?;
    println!("gradient check: max relative error {:.2e} -> {}", check.max_rel_error, if check.pass { "pass" } else { "FAIL" });
    assert!(check.pass);

    // One sign step is the weak end of the family; iterated projected
    // steps with the same radius can only do at least as well.
    let eps = 0.5;
    let weak = fgsm(&te, &ds, eps)?;
    let strong = pgd_attack(
        &te,
        &ds,
        &AttackConfig {
            epsilon: eps,
            steps: 50,
            ..AttackConfig::default()
        },
    )?;
    println!(
        "\nepsilon {eps}: clean {:.3}, single-step {:.3}, 50-step {:.3}",
        weak.clean_accuracy, weak.adversarial_accuracy, strong.adversarial_accuracy
    );

    // The sweep carries successful adversarial points to larger radii,
    // so the accuracy column is non-increasing by construction.
    let report = pgd_sweep(
        &te,
        &ds,
        &AttackConfig {
            steps: 50,
            ..AttackConfig::default()
        },
        &[0.0, 0.1, 0.25, 0.5, 1.0],
    )?;
    println!("\n{:>8} {:>10}", "epsilon", "accuracy");
    for row in &report.rows {
        println!("{:>8} {:>10.3}", row.epsilon, row.adversarial_accuracy);
    }
    Ok(())
}
