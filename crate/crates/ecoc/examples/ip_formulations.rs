//! The three integer-programming formulations of max-min codebook design,
//! their sizes, and LP-format export.
//!
//! The linearized form (ip1) carries a product variable per column pair;
//! the pairwise form (ip2) replaces the separation rows with exclusion
//! inequalities; the clique form (ip3) collapses excluded pairs into one
//! row per clique.

use ecoc::codebook::Codebook;
use ecoc::conflict::{build_graph, classify_pairs, edge_clique_cover, UpperBound};
use ecoc::model::{build_ip1, build_ip2, build_ip3, model_stats, parse_lp};

fn main() -> ecoc::Result<()> {
    let k = 10;
    let rho = 3;
    let l = 20;
    let m = Codebook::exhaustive(k)?;

    let ip1 = build_ip1(&m, l, rho, UpperBound::Inactive)?;
    let s1 = model_stats(&ip1);
    println!("ip1: {} binary variables, {} constraints", s1.n_binary_vars, s1.n_constraints);
    let b = s1.breakdown;
    println!("  budget {}, separation {}, linearization {}, links {}", b.budget, b.column_separation, b.and_linearization, b.distance_link);

    let pc = classify_pairs(&m, rho, UpperBound::Inactive);
    let ip2 = build_ip2(&m, l, rho, UpperBound::Inactive)?;
    let s2 = model_stats(&ip2);
    println!(
        "\nip2: {} variables, {} constraints ({} pair exclusions)",
        s2.n_binary_vars,
        s2.n_constraints,
        pc.infeasible_pairs.len()
    );

    let cover = edge_clique_cover(&build_graph(&pc), 0);
    let ip3 = build_ip3(&m, l, rho, UpperBound::Inactive, &cover)?;
    let s3 = model_stats(&ip3);
    println!(
        "ip3: {} variables, {} constraints ({} clique rows)",
        s3.n_binary_vars,
        s3.n_constraints,
        cover.cliques.len()
    );

    // LP text round-trips exactly: models can be written for external
    // solvers and read back without drift.
    let small = build_ip3(
        &Codebook::exhaustive(4)?,
        6,
        2,
        UpperBound::Inactive,
        &edge_clique_cover(
            &build_graph(&classify_pairs(&Codebook::exhaustive(4)?, 2, UpperBound::Inactive)),
            0,
        ),
    )?;
    let text = small.to_lp_string();
    let back = parse_lp(&text, "ip3.lp")?;
    assert_eq!(back.variables.len(), small.variables.len());
    assert_eq!(back.constraints.len(), small.constraints.len());
    println!("\nlp round trip: {} bytes, first lines:", text.len());
    for line in text.lines().take(6) {
        println!("  {line}");
    }
    Ok(())
}
