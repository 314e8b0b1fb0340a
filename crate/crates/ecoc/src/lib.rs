//! Error-correcting output codes: codebook design and evaluation.
//!
//! The crate covers the full path from codebook construction to robustness
//! measurement:
//!
//! * [`codebook`]: ternary codebooks, canonical exhaustive codes, baselines,
//!   distances, validation, CSV/JSON round trips.
//! * [`conflict`]: column-pair separation, closed-form infeasible counts,
//!   conflict graphs, and edge clique covers that compress pairwise
//!   exclusions into clique inequalities.
//! * [`model`]: integer-programming formulations of max-min codebook design
//!   (linearized, pairwise, clique-strengthened) and LP-format export.
//! * [`solve`]: exact branch and bound, local search, brute-force oracle,
//!   combinatorial bounds, and solution certification.
//! * [`classify`]: datasets, per-column binary learners, soft decoding, and
//!   error-correlation diagnostics.
//! * [`attack`]: projected-gradient and fast-gradient-sign evasion attacks
//!   with gradient checking.
//! * [`cli`]: the `ecoc` command-line front end with reproducible run
//!   manifests.
//!
//! Everything that consumes randomness takes an explicit seed and is
//! deterministic given that seed.

pub mod attack;
pub mod classify;
pub mod cli;
pub mod codebook;
pub mod conflict;
mod error;
pub mod model;
pub mod solve;

pub use error::{Error, Result};

/// Derives a substream seed from a master seed, a role label, and an index.
///
/// Runs take one user-facing seed; every internal consumer (per-column
/// training, per-example attack restarts, edge partitioning) gets its own
/// stream through this function so that adding a consumer never perturbs the
/// draws of another. SplitMix64 over the label bytes keeps the mapping stable
/// across platforms and releases.
pub fn derive_seed(master: u64, label: &str, index: u64) -> u64 {
    let mut state = master ^ 0x9e37_79b9_7f4a_7c15;
    for &b in label.as_bytes() {
        state = splitmix64(state ^ u64::from(b));
    }
    splitmix64(state ^ index)
}

pub(crate) fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}
