//! Canonical exhaustive codebooks: construction, shape, and the
//! equidistance property that makes them the natural candidate pool for
//! column selection.

use ecoc::codebook::Codebook;

fn main() -> ecoc::Result<()> {
    for k in [3, 4, 5, 8] {
        let m = Codebook::exhaustive(k)?;
        let summary = m.distance_summary();
        println!(
            "k={k}: {} columns, min row distance {}",
            m.n_columns(),
            summary.min_row_distance
        );
        // Every row pair of the exhaustive code sits at exactly 2^(k-2).
        let expected = f64::from(1u32 << (k - 2));
        for r in 0..k {
            for s in (r + 1)..k {
                assert_eq!(summary.row_distances[r][s], expected);
            }
        }
    }

    // The canonical form fixes the first row to all +1; each remaining row
    // reads the column index as a binary counter.
    let m = Codebook::exhaustive(4)?;
    println!("\nexhaustive(4), rows as sign patterns:");
    for r in 0..m.k() {
        let row: Vec<String> = m.row(r).iter().map(|e| format!("{e:+}")).collect();
        println!("  class {}: {}", r + 1, row.join(" "));
    }

    // CSV and JSON round trips preserve entries and metadata.
    let text = m.to_csv_string();
    let back = Codebook::from_csv_str(&text, "exhaustive.csv")?;
    assert_eq!(back.n_columns(), m.n_columns());
    println!("\nCSV round trip: {} columns preserved", back.n_columns());
    Ok(())
}
