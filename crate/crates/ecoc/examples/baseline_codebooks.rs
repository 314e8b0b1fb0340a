//! The standard codebook baselines side by side: one-vs-all, one-vs-one,
//! random dense, random sparse, and balance filtering of the exhaustive
//! pool.

use ecoc::codebook::{Alphabet, Codebook};

fn describe(name: &str, m: &Codebook) {
    let s = m.distance_summary();
    println!(
        "{name:>14}: k={} L={:>3} alphabet={} min row distance {}",
        m.k(),
        m.n_columns(),
        m.alphabet(),
        s.min_row_distance
    );
}

fn main() -> ecoc::Result<()> {
    let k = 10;
    describe("one-vs-all", &Codebook::one_vs_all(k)?);
    describe("one-vs-one", &Codebook::one_vs_one(k)?);
    describe("exhaustive", &Codebook::exhaustive(k)?);
    // Random generators keep the best of `trials` draws that pass
    // validation (no duplicate or complementary columns, no empty rows).
    describe("random-dense", &Codebook::random(k, 20, Alphabet::Binary, 200, 7)?);
    describe("random-sparse", &Codebook::random(k, 20, Alphabet::Ternary, 200, 7)?);

    // Balance filtering keeps near-even splits; tau bounds the +1/-1
    // count difference per column.
    let full = Codebook::exhaustive(k)?;
    for tau in [0, 2, 4] {
        let filtered = full.filter_balanced(tau)?;
        println!(
            "balanced tau={tau}: {} of {} columns survive",
            filtered.n_columns(),
            full.n_columns()
        );
    }

    // Validation reports structural defects instead of failing: the
    // one-vs-all code at small k has low column separation by design.
    let near = Codebook::one_vs_all(3)?;
    let violations = near.validate();
    println!("\none-vs-all(3) violations: {}", violations.len());
    for v in violations.iter().take(3) {
        println!("  {v:?}");
    }
    Ok(())
}
