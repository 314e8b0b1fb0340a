//! Column-pair separation analysis: counting the pairs that violate the
//! distance band, the closed-form check, and compressing the pairwise
//! exclusions into clique constraints.

use ecoc::codebook::Codebook;
use ecoc::conflict::{
    build_graph, classify_pairs, edge_clique_cover, infeasible_count_closed_form, validate_cover,
    UpperBound,
};
use std::time::Instant;

fn main() -> ecoc::Result<()> {
    println!("{:>3} {:>4} {:>12} {:>12} {:>8} {:>10}", "k", "rho", "pairs", "infeasible", "cliques", "reduction");
    for (k, rho) in [(8, 2), (10, 3), (12, 4)] {
        let m = Codebook::exhaustive(k)?;
        let t = Instant::now();
        let pc = classify_pairs(&m, rho, UpperBound::Inactive);
        let closed = infeasible_count_closed_form(k, rho)?;
        assert_eq!(closed, pc.infeasible_pairs.len() as u64, "closed form is exact");

        let g = build_graph(&pc);
        let cover = edge_clique_cover(&g, 0);
        assert!(validate_cover(&g, &cover).is_empty(), "every edge covered, no clique redundant");
        let reduction = g.n_edges() as f64 / cover.cliques.len() as f64;
        println!(
            "{k:>3} {rho:>4} {:>12} {:>12} {:>8} {reduction:>9.1}x  ({:.2}s)",
            pc.n_pairs_total,
            pc.infeasible_pairs.len(),
            cover.cliques.len(),
            t.elapsed().as_secs_f64()
        );
    }

    // An active upper bound also forbids pairs that are too far apart
    // (near-complementary columns).
    let m = Codebook::exhaustive(8)?;
    let open = classify_pairs(&m, 2, UpperBound::Inactive);
    let banded = classify_pairs(&m, 2, UpperBound::Value(6.0));
    println!(
        "\nk=8 rho=2: {} infeasible unbounded, {} with distance capped at 6",
        open.infeasible_pairs.len(),
        banded.infeasible_pairs.len()
    );

    // Covers serialize for reuse by the model builder.
    let g = build_graph(&open);
    let cover = edge_clique_cover(&g, 0);
    let text = cover.to_json_string();
    println!("cover JSON is {} bytes, source '{}'", text.len(), cover.source);
    Ok(())
}
