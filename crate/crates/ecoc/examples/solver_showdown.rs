//! Three ways to solve the same selection problem: the brute-force
//! oracle, branch and bound, and greedy-plus-swaps local search, agreeing
//! where they must and diverging where the heuristic may.

use ecoc::codebook::Codebook;
use ecoc::conflict::{build_graph, classify_pairs, edge_clique_cover, UpperBound};
use ecoc::model::build_ip3;
use ecoc::solve::{brute_force, solve_exact, solve_local_search, SolverConfig};

fn main() -> ecoc::Result<()> {
    println!("{:>14} {:>10} {:>10} {:>12}", "instance", "brute", "exact", "local");
    // Instance sizes are capped by the oracle: subsets of a k=6 pool
    // grow past its enumeration budget once the column budget reaches 8.
    for (k, l, rho) in [(4, 6, 1), (5, 8, 2), (6, 7, 1), (6, 7, 2)] {
        let m = Codebook::exhaustive(k)?;
        let band = UpperBound::Inactive;
        let oracle = brute_force(&m, l, rho, band)?;

        let pc = classify_pairs(&m, rho, band);
        let cover = edge_clique_cover(&build_graph(&pc), 0);
        let model = build_ip3(&m, l, rho, band, &cover)?;
        let cfg = SolverConfig::default();
        let exact = solve_exact(&model, &cfg)?;
        let local = solve_local_search(&m, l, rho, &cover, &cfg)?;

        // The oracle and branch and bound must agree exactly; local
        // search may fall short but never exceeds the optimum.
        assert_eq!(oracle.objective_value, exact.objective_value);
        assert!(local.objective_value <= oracle.objective_value);
        println!(
            "k={k} L={l:>2} rho={rho}: {:>8} {:>10} {:>10}  (nodes: {} vs {} vs {})",
            oracle.objective_value,
            exact.objective_value,
            local.objective_value,
            oracle.node_count,
            exact.node_count,
            local.node_count
        );
    }

    // The oracle guards its own cost: it refuses instances whose subset
    // count would be astronomical unless given an explicit budget.
    let big = Codebook::exhaustive(10)?;
    match brute_force(&big, 20, 3, UpperBound::Inactive) {
        Err(e) => println!("\nbrute force at k=10 declines: {e}"),
        Ok(_) => unreachable!("the guard should trip first"),
    }
    Ok(())
}
