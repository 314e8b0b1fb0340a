//! Integer-programming formulations of codebook design.
//!
//! Three equivalent formulations select at most `L` columns of a candidate
//! codebook to maximize the minimum pairwise row distance:
//!
//! * IP1 carries one AND variable per column pair and linearizes the
//!   separation band through it;
//! * IP2 replaces the AND machinery with one exclusion `x_i + x_j <= 1` per
//!   separation-infeasible pair;
//! * IP3 compresses those exclusions to one `sum_{i in C} x_i <= 1` per
//!   clique of an edge clique cover.
//!
//! All three share the max-min device: a continuous `t` bounded above by the
//! realized distance of every row pair. An alternative objective fits
//! realized distances to a target matrix in l1 norm.
//!
//! Models export to the standard LP text format with deterministic naming
//! and parse back for round-trip checks.

use std::collections::HashMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::Serialize;

use crate::codebook::{Alphabet, Codebook};
use crate::conflict::{build_graph, classify_pairs, validate_cover, CliqueCover, UpperBound};
use crate::{Error, Result};

/// Variable identity. Indices are 0-based in memory and 1-based in display,
/// matching the wire formats.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum VarName {
    /// Column selection `x_i`.
    X(u32),
    /// Pair AND variable `y_i_j`, `i < j`.
    Pair(u32, u32),
    /// Max-min auxiliary `t`.
    T,
    /// Absolute deviation `e_p_q` for row pair `p < q`.
    Dev(u32, u32),
}

impl fmt::Display for VarName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            VarName::X(i) => write!(f, "x_{}", i + 1),
            VarName::Pair(i, j) => write!(f, "y_{}_{}", i + 1, j + 1),
            VarName::T => write!(f, "t"),
            VarName::Dev(p, q) => write!(f, "e_{}_{}", p + 1, q + 1),
        }
    }
}

impl FromStr for VarName {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        if s == "t" {
            return Ok(VarName::T);
        }
        let (prefix, rest) = s.split_once('_').ok_or_else(|| format!("unknown variable '{s}'"))?;
        let parse_index = |tok: &str| -> std::result::Result<u32, String> {
            let v: u32 = tok.parse().map_err(|_| format!("bad index in variable '{s}'"))?;
            if v == 0 {
                return Err(format!("variable '{s}' uses 0; names are 1-based"));
            }
            Ok(v - 1)
        };
        match prefix {
            "x" => Ok(VarName::X(parse_index(rest)?)),
            "y" | "e" => {
                let (a, b) = rest
                    .split_once('_')
                    .ok_or_else(|| format!("variable '{s}' needs two indices"))?;
                let (a, b) = (parse_index(a)?, parse_index(b)?);
                if prefix == "y" {
                    Ok(VarName::Pair(a, b))
                } else {
                    Ok(VarName::Dev(a, b))
                }
            }
            _ => Err(format!("unknown variable '{s}'")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum VarKind {
    Binary,
    Continuous,
}

#[derive(Debug, Clone)]
pub struct Variable {
    pub name: VarName,
    pub kind: VarKind,
    pub lower: f64,
    pub upper: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Le,
    Eq,
    Ge,
}

impl fmt::Display for Sense {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Sense::Le => write!(f, "<="),
            Sense::Eq => write!(f, "="),
            Sense::Ge => write!(f, ">="),
        }
    }
}

/// Constraint identity; doubles as the family tag for statistics.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConLabel {
    Budget,
    /// Lower separation row for a column pair: `(rho - d) y <= 0`.
    SepLow(u32, u32),
    /// Upper separation row: `(d - upper_eff) y <= 0`.
    SepHigh(u32, u32),
    /// `y <= x_i`.
    AndFirst(u32, u32),
    /// `y <= x_j`.
    AndSecond(u32, u32),
    /// `x_i + x_j - 1 <= y`.
    AndLower(u32, u32),
    /// Pairwise exclusion `x_i + x_j <= 1`.
    PairExclusion(u32, u32),
    /// Clique exclusion `sum_{i in C_t} x_i <= 1`.
    Clique(u32),
    /// Max-min link for row pair `(s, t)`: `t <= sum c_i x_i`.
    Link(u32, u32),
    /// `sum c x - e <= d_hat` for row pair `(p, q)`.
    DevPos(u32, u32),
    /// `-sum c x - e <= -d_hat`.
    DevNeg(u32, u32),
}

impl fmt::Display for ConLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use ConLabel::*;
        match self {
            Budget => write!(f, "budget"),
            SepLow(i, j) => write!(f, "sep_lo_{}_{}", i + 1, j + 1),
            SepHigh(i, j) => write!(f, "sep_hi_{}_{}", i + 1, j + 1),
            AndFirst(i, j) => write!(f, "and_a_{}_{}", i + 1, j + 1),
            AndSecond(i, j) => write!(f, "and_b_{}_{}", i + 1, j + 1),
            AndLower(i, j) => write!(f, "and_c_{}_{}", i + 1, j + 1),
            PairExclusion(i, j) => write!(f, "pair_{}_{}", i + 1, j + 1),
            Clique(t) => write!(f, "clique_{}", t + 1),
            Link(s, t) => write!(f, "link_{}_{}", s + 1, t + 1),
            DevPos(p, q) => write!(f, "dev_pos_{}_{}", p + 1, q + 1),
            DevNeg(p, q) => write!(f, "dev_neg_{}_{}", p + 1, q + 1),
        }
    }
}

impl FromStr for ConLabel {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        if s == "budget" {
            return Ok(ConLabel::Budget);
        }
        let err = || format!("unknown constraint label '{s}'");
        let split_two = |rest: &str| -> std::result::Result<(u32, u32), String> {
            let (a, b) = rest.split_once('_').ok_or_else(err)?;
            let a: u32 = a.parse().map_err(|_| err())?;
            let b: u32 = b.parse().map_err(|_| err())?;
            if a == 0 || b == 0 {
                return Err(format!("label '{s}' uses 0; names are 1-based"));
            }
            Ok((a - 1, b - 1))
        };
        if let Some(rest) = s.strip_prefix("clique_") {
            let t: u32 = rest.parse().map_err(|_| err())?;
            if t == 0 {
                return Err(format!("label '{s}' uses 0; names are 1-based"));
            }
            return Ok(ConLabel::Clique(t - 1));
        }
        for (prefix, make) in [
            ("sep_lo_", ConLabel::SepLow as fn(u32, u32) -> ConLabel),
            ("sep_hi_", ConLabel::SepHigh),
            ("and_a_", ConLabel::AndFirst),
            ("and_b_", ConLabel::AndSecond),
            ("and_c_", ConLabel::AndLower),
            ("pair_", ConLabel::PairExclusion),
            ("link_", ConLabel::Link),
            ("dev_pos_", ConLabel::DevPos),
            ("dev_neg_", ConLabel::DevNeg),
        ] {
            if let Some(rest) = s.strip_prefix(prefix) {
                let (a, b) = split_two(rest)?;
                return Ok(make(a, b));
            }
        }
        Err(err())
    }
}

/// Statistics family of a constraint label.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConstraintFamily {
    Budget,
    ColumnSeparation,
    AndLinearization,
    DistanceLink,
    Clique,
}

impl ConLabel {
    pub fn family(self) -> ConstraintFamily {
        use ConLabel::*;
        match self {
            Budget => ConstraintFamily::Budget,
            SepLow(..) | SepHigh(..) | PairExclusion(..) => ConstraintFamily::ColumnSeparation,
            AndFirst(..) | AndSecond(..) | AndLower(..) => ConstraintFamily::AndLinearization,
            Clique(..) => ConstraintFamily::Clique,
            Link(..) | DevPos(..) | DevNeg(..) => ConstraintFamily::DistanceLink,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Constraint {
    pub label: ConLabel,
    /// `(variable index, coefficient)`, in emission order.
    pub terms: Vec<(usize, f64)>,
    pub sense: Sense,
    pub rhs: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ObjSense {
    Max,
    Min,
}

#[derive(Debug, Clone)]
pub struct Objective {
    pub sense: ObjSense,
    pub terms: Vec<(usize, f64)>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Formulation {
    Ip1,
    Ip2,
    Ip3,
}

impl fmt::Display for Formulation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Formulation::Ip1 => write!(f, "ip1"),
            Formulation::Ip2 => write!(f, "ip2"),
            Formulation::Ip3 => write!(f, "ip3"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ObjectiveKind {
    MaxMin,
    DistributionFit,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Provenance {
    pub formulation: Formulation,
    pub k: usize,
    pub l_budget: usize,
    pub rho: u32,
    /// `None` encodes an inactive upper bound.
    pub upper: Option<f64>,
    pub objective: ObjectiveKind,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cover_source: Option<String>,
}

/// An explicit linear integer model.
///
/// Variable order is a stable contract: `x` variables first (index equals
/// column), then formulation-specific auxiliaries (`y` pairs for IP1, `e`
/// deviations for the distribution objective), with `t` last when present.
#[derive(Debug, Clone)]
pub struct IpModel {
    pub variables: Vec<Variable>,
    pub constraints: Vec<Constraint>,
    pub objective: Objective,
    pub provenance: Provenance,
}

/// Per-family constraint counts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct FamilyCounts {
    pub budget: u64,
    pub column_separation: u64,
    pub and_linearization: u64,
    pub distance_link: u64,
    pub clique: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ModelStats {
    pub n_binary_vars: u64,
    pub n_continuous_vars: u64,
    pub n_constraints: u64,
    pub breakdown: FamilyCounts,
}

/// Desired pairwise codeword distances for the distribution-fit objective.
#[derive(Debug, Clone)]
pub struct TargetDistances {
    /// `k x k`, symmetric, nonnegative, zero diagonal.
    pub d_hat: Vec<Vec<f64>>,
}

impl TargetDistances {
    pub fn uniform(k: usize, value: f64) -> TargetDistances {
        let mut d_hat = vec![vec![value; k]; k];
        for (p, row) in d_hat.iter_mut().enumerate() {
            row[p] = 0.0;
        }
        TargetDistances { d_hat }
    }

    fn check(&self, k: usize) -> Result<()> {
        if self.d_hat.len() != k || self.d_hat.iter().any(|r| r.len() != k) {
            return Err(Error::invalid(
                "target distances",
                format!("need a {k}x{k} matrix, got {} rows", self.d_hat.len()),
            ));
        }
        for p in 0..k {
            if self.d_hat[p][p] != 0.0 {
                return Err(Error::invalid("target distances", format!("diagonal entry ({p},{p}) nonzero")));
            }
            for q in 0..k {
                let v = self.d_hat[p][q];
                if v < 0.0 || !v.is_finite() {
                    return Err(Error::invalid("target distances", format!("entry ({p},{q}) = {v}")));
                }
                if self.d_hat[p][q] != self.d_hat[q][p] {
                    return Err(Error::invalid("target distances", format!("asymmetry at ({p},{q})")));
                }
            }
        }
        Ok(())
    }
}

fn check_binary_codebook(m: &Codebook, what: &'static str) -> Result<()> {
    if m.alphabet() != Alphabet::Binary {
        return Err(Error::invalid(what, "design formulations require a binary codebook".to_string()));
    }
    Ok(())
}

// A zero budget stays legal: it forces the empty selection and objective 0.
fn check_rho(rho: u32, what: &'static str) -> Result<()> {
    if rho < 1 {
        return Err(Error::invalid(what, "separation parameter rho must be at least 1".to_string()));
    }
    Ok(())
}

/// Max-min link rows shared by all formulations: for every row pair
/// `(s, t')`, `t <= sum_i c_i x_i` with `c_i = (1 - M(s,i) M(t',i)) / 2`.
/// Only unit coefficients occur for binary codebooks, and zero-coefficient
/// columns are omitted from the row support.
fn push_link_rows(m: &Codebook, t_index: usize, constraints: &mut Vec<Constraint>) {
    for s in 0..m.k() {
        for t2 in s + 1..m.k() {
            let mut terms = vec![(t_index, 1.0)];
            for i in 0..m.n_columns() {
                let c = f64::from(1 - i32::from(m.get(s, i)) * i32::from(m.get(t2, i))) / 2.0;
                if c != 0.0 {
                    terms.push((i, -c));
                }
            }
            constraints.push(Constraint {
                label: ConLabel::Link(s as u32, t2 as u32),
                terms,
                sense: Sense::Le,
                rhs: 0.0,
            });
        }
    }
}

fn budget_row(n_columns: usize, l_budget: usize) -> Constraint {
    Constraint {
        label: ConLabel::Budget,
        terms: (0..n_columns).map(|i| (i, 1.0)).collect(),
        sense: Sense::Le,
        rhs: l_budget as f64,
    }
}

fn x_variables(n_columns: usize) -> Vec<Variable> {
    (0..n_columns)
        .map(|i| Variable {
            name: VarName::X(i as u32),
            kind: VarKind::Binary,
            lower: 0.0,
            upper: 1.0,
        })
        .collect()
}

fn t_variable() -> Variable {
    Variable {
        name: VarName::T,
        kind: VarKind::Continuous,
        lower: 0.0,
        upper: f64::INFINITY,
    }
}

fn upper_option(upper: UpperBound) -> Option<f64> {
    match upper {
        UpperBound::Inactive => None,
        UpperBound::Value(u) => Some(u),
    }
}

/// Full AND-linearized formulation.
///
/// Requires the canonical exhaustive codebook and `k <= 11`: the pair
/// variable count is `C(2^(k-1) - 1, 2)`.
pub fn build_ip1(m: &Codebook, l_budget: usize, rho: u32, upper: UpperBound) -> Result<IpModel> {
    check_rho(rho, "ip1")?;
    if m.k() > 11 {
        return Err(Error::SizeLimit {
            what: "ip1 formulation",
            param: "k",
            min: 2,
            max: 11,
            value: m.k(),
        });
    }
    let canonical = Codebook::exhaustive(m.k())?;
    if (0..m.k()).any(|r| m.row(r) != canonical.row(r)) {
        return Err(Error::invalid("ip1", "codebook is not the canonical exhaustive code".to_string()));
    }
    let n = m.n_columns();
    // The upper band edge never binds at or beyond k: column distances are
    // at most k. An inactive bound is encoded through that inert value.
    let upper_eff = upper_option(upper).unwrap_or(m.k() as f64);

    let mut variables = x_variables(n);
    let mut pair_index = HashMap::new();
    for i in 0..n as u32 {
        for j in i + 1..n as u32 {
            pair_index.insert((i, j), variables.len());
            variables.push(Variable {
                name: VarName::Pair(i, j),
                kind: VarKind::Binary,
                lower: 0.0,
                upper: 1.0,
            });
        }
    }
    let t_index = variables.len();
    variables.push(t_variable());

    let mut constraints = vec![budget_row(n, l_budget)];
    for i in 0..n as u32 {
        for j in i + 1..n as u32 {
            let y = pair_index[&(i, j)];
            let d = m.column_distance(i as usize, j as usize);
            constraints.push(Constraint {
                label: ConLabel::SepLow(i, j),
                terms: vec![(y, f64::from(rho) - d)],
                sense: Sense::Le,
                rhs: 0.0,
            });
            constraints.push(Constraint {
                label: ConLabel::SepHigh(i, j),
                terms: vec![(y, d - upper_eff)],
                sense: Sense::Le,
                rhs: 0.0,
            });
            constraints.push(Constraint {
                label: ConLabel::AndFirst(i, j),
                terms: vec![(y, 1.0), (i as usize, -1.0)],
                sense: Sense::Le,
                rhs: 0.0,
            });
            constraints.push(Constraint {
                label: ConLabel::AndSecond(i, j),
                terms: vec![(y, 1.0), (j as usize, -1.0)],
                sense: Sense::Le,
                rhs: 0.0,
            });
            constraints.push(Constraint {
                label: ConLabel::AndLower(i, j),
                terms: vec![(i as usize, 1.0), (j as usize, 1.0), (y, -1.0)],
                sense: Sense::Le,
                rhs: 1.0,
            });
        }
    }
    push_link_rows(m, t_index, &mut constraints);

    Ok(IpModel {
        variables,
        constraints,
        objective: Objective {
            sense: ObjSense::Max,
            terms: vec![(t_index, 1.0)],
        },
        provenance: Provenance {
            formulation: Formulation::Ip1,
            k: m.k(),
            l_budget,
            rho,
            upper: upper_option(upper),
            objective: ObjectiveKind::MaxMin,
            cover_source: None,
        },
    })
}

/// Pairwise-exclusion formulation: one `x_i + x_j <= 1` per
/// separation-infeasible pair.
pub fn build_ip2(m: &Codebook, l_budget: usize, rho: u32, upper: UpperBound) -> Result<IpModel> {
    check_binary_codebook(m, "ip2")?;
    check_rho(rho, "ip2")?;
    let pc = classify_pairs(m, rho, upper);
    let n = m.n_columns();
    let mut variables = x_variables(n);
    let t_index = variables.len();
    variables.push(t_variable());

    let mut constraints = vec![budget_row(n, l_budget)];
    for &(i, j) in &pc.infeasible_pairs {
        constraints.push(Constraint {
            label: ConLabel::PairExclusion(i, j),
            terms: vec![(i as usize, 1.0), (j as usize, 1.0)],
            sense: Sense::Le,
            rhs: 1.0,
        });
    }
    push_link_rows(m, t_index, &mut constraints);

    Ok(IpModel {
        variables,
        constraints,
        objective: Objective {
            sense: ObjSense::Max,
            terms: vec![(t_index, 1.0)],
        },
        provenance: Provenance {
            formulation: Formulation::Ip2,
            k: m.k(),
            l_budget,
            rho,
            upper: upper_option(upper),
            objective: ObjectiveKind::MaxMin,
            cover_source: None,
        },
    })
}

/// Clique-strengthened formulation: pairwise exclusions replaced by one row
/// per clique of a validated edge clique cover.
pub fn build_ip3(
    m: &Codebook,
    l_budget: usize,
    rho: u32,
    upper: UpperBound,
    cover: &CliqueCover,
) -> Result<IpModel> {
    check_binary_codebook(m, "ip3")?;
    check_rho(rho, "ip3")?;
    let g = build_graph(&classify_pairs(m, rho, upper));
    let violations = validate_cover(&g, cover);
    if !violations.is_empty() {
        let sample: Vec<String> = violations.iter().take(3).map(ToString::to_string).collect();
        return Err(Error::InvalidCover(format!(
            "{} violations against the conflict graph: {}",
            violations.len(),
            sample.join("; ")
        )));
    }
    let n = m.n_columns();
    let mut variables = x_variables(n);
    let t_index = variables.len();
    variables.push(t_variable());

    let mut constraints = vec![budget_row(n, l_budget)];
    for (t, clique) in cover.cliques.iter().enumerate() {
        constraints.push(Constraint {
            label: ConLabel::Clique(t as u32),
            terms: clique.iter().map(|&i| (i as usize, 1.0)).collect(),
            sense: Sense::Le,
            rhs: 1.0,
        });
    }
    push_link_rows(m, t_index, &mut constraints);

    Ok(IpModel {
        variables,
        constraints,
        objective: Objective {
            sense: ObjSense::Max,
            terms: vec![(t_index, 1.0)],
        },
        provenance: Provenance {
            formulation: Formulation::Ip3,
            k: m.k(),
            l_budget,
            rho,
            upper: upper_option(upper),
            objective: ObjectiveKind::MaxMin,
            cover_source: Some(cover.source.clone()),
        },
    })
}

/// Swaps the max-min objective for an l1 fit to target distances.
///
/// Drops `t` and the link rows, keeps all exclusion structure, and adds one
/// deviation variable `e_p_q >= |realized - target|` per row pair through
/// the standard two-inequality split. Link coefficients are harvested from
/// the replaced rows, so the transformation needs no codebook access.
pub fn set_objective_distribution(model: &IpModel, targets: &TargetDistances) -> Result<IpModel> {
    if model.provenance.formulation == Formulation::Ip1 {
        return Err(Error::invalid(
            "distribution objective",
            "supported on ip2/ip3 models (ip1 carries pair variables)".to_string(),
        ));
    }
    if model.provenance.objective != ObjectiveKind::MaxMin {
        return Err(Error::invalid("distribution objective", "model already transformed".to_string()));
    }
    targets.check(model.provenance.k)?;

    let n_x = model
        .variables
        .iter()
        .filter(|v| matches!(v.name, VarName::X(_)))
        .count();
    let mut variables = model.variables[..n_x].to_vec();
    let mut constraints: Vec<Constraint> = Vec::new();
    let mut link_support: Vec<((u32, u32), Vec<(usize, f64)>)> = Vec::new();
    for c in &model.constraints {
        match c.label {
            ConLabel::Link(p, q) => {
                let support: Vec<(usize, f64)> = c
                    .terms
                    .iter()
                    .filter(|&&(v, _)| v < n_x)
                    .map(|&(v, coef)| (v, -coef))
                    .collect();
                link_support.push(((p, q), support));
            }
            _ => constraints.push(c.clone()),
        }
    }

    let mut objective_terms = Vec::new();
    for ((p, q), support) in link_support {
        let e_index = variables.len();
        variables.push(Variable {
            name: VarName::Dev(p, q),
            kind: VarKind::Continuous,
            lower: 0.0,
            upper: f64::INFINITY,
        });
        let target = targets.d_hat[p as usize][q as usize];
        let mut pos = support.clone();
        pos.push((e_index, -1.0));
        constraints.push(Constraint {
            label: ConLabel::DevPos(p, q),
            terms: pos,
            sense: Sense::Le,
            rhs: target,
        });
        let mut neg: Vec<(usize, f64)> = support.iter().map(|&(v, c)| (v, -c)).collect();
        neg.push((e_index, -1.0));
        constraints.push(Constraint {
            label: ConLabel::DevNeg(p, q),
            terms: neg,
            sense: Sense::Le,
            rhs: -target,
        });
        objective_terms.push((e_index, 1.0));
    }

    Ok(IpModel {
        variables,
        constraints,
        objective: Objective {
            sense: ObjSense::Min,
            terms: objective_terms,
        },
        provenance: Provenance {
            objective: ObjectiveKind::DistributionFit,
            ..model.provenance.clone()
        },
    })
}

/// Exact per-family accounting.
pub fn model_stats(model: &IpModel) -> ModelStats {
    let mut counts = FamilyCounts {
        budget: 0,
        column_separation: 0,
        and_linearization: 0,
        distance_link: 0,
        clique: 0,
    };
    for c in &model.constraints {
        match c.label.family() {
            ConstraintFamily::Budget => counts.budget += 1,
            ConstraintFamily::ColumnSeparation => counts.column_separation += 1,
            ConstraintFamily::AndLinearization => counts.and_linearization += 1,
            ConstraintFamily::DistanceLink => counts.distance_link += 1,
            ConstraintFamily::Clique => counts.clique += 1,
        }
    }
    ModelStats {
        n_binary_vars: model.variables.iter().filter(|v| v.kind == VarKind::Binary).count() as u64,
        n_continuous_vars: model.variables.iter().filter(|v| v.kind == VarKind::Continuous).count() as u64,
        n_constraints: model.constraints.len() as u64,
        breakdown: counts,
    }
}

fn format_number(v: f64) -> String {
    if v == v.trunc() && v.abs() < 1e15 {
        format!("{}", v as i64)
    } else {
        format!("{v}")
    }
}

fn format_expression(terms: &[(usize, f64)], variables: &[Variable]) -> String {
    let mut s = String::new();
    for (pos, &(var, coef)) in terms.iter().enumerate() {
        let name = variables[var].name;
        let mag = coef.abs();
        if pos == 0 {
            if coef < 0.0 {
                s.push_str("- ");
            }
        } else if coef < 0.0 {
            s.push_str(" - ");
        } else {
            s.push_str(" + ");
        }
        if mag != 1.0 {
            s.push_str(&format_number(mag));
            s.push(' ');
        }
        s.push_str(&name.to_string());
    }
    s
}

impl IpModel {
    /// Renders the model in LP text format: provenance comment, objective,
    /// `Subject To`, `Bounds` for continuous variables, `Binaries`, `End`.
    pub fn to_lp_string(&self) -> String {
        let p = &self.provenance;
        let mut s = format!(
            "\\ provenance: formulation={} k={} L={} rho={} upper={} objective={}\n",
            p.formulation,
            p.k,
            p.l_budget,
            p.rho,
            p.upper.map_or("inactive".to_string(), |u| format_number(u)),
            match p.objective {
                ObjectiveKind::MaxMin => "max-min",
                ObjectiveKind::DistributionFit => "distribution-fit",
            },
        );
        if let Some(cover) = &p.cover_source {
            s.push_str(&format!("\\ cover: {cover}\n"));
        }
        s.push_str(match self.objective.sense {
            ObjSense::Max => "Maximize\n",
            ObjSense::Min => "Minimize\n",
        });
        s.push_str(" obj: ");
        s.push_str(&format_expression(&self.objective.terms, &self.variables));
        s.push_str("\nSubject To\n");
        for c in &self.constraints {
            s.push_str(&format!(
                " {}: {} {} {}\n",
                c.label,
                format_expression(&c.terms, &self.variables),
                c.sense,
                format_number(c.rhs)
            ));
        }
        let continuous: Vec<&Variable> = self.variables.iter().filter(|v| v.kind == VarKind::Continuous).collect();
        if !continuous.is_empty() {
            s.push_str("Bounds\n");
            for v in continuous {
                if v.upper.is_infinite() {
                    s.push_str(&format!(" {} >= {}\n", v.name, format_number(v.lower)));
                } else {
                    s.push_str(&format!(
                        " {} <= {} <= {}\n",
                        format_number(v.lower),
                        v.name,
                        format_number(v.upper)
                    ));
                }
            }
        }
        let binaries: Vec<String> = self
            .variables
            .iter()
            .filter(|v| v.kind == VarKind::Binary)
            .map(|v| v.name.to_string())
            .collect();
        if !binaries.is_empty() {
            s.push_str("Binaries\n");
            let mut line = String::from(" ");
            for name in binaries {
                if line.len() + name.len() > 200 {
                    s.push_str(line.trim_end());
                    s.push('\n');
                    line = String::from(" ");
                }
                line.push_str(&name);
                line.push(' ');
            }
            if !line.trim().is_empty() {
                s.push_str(line.trim_end());
                s.push('\n');
            }
        }
        s.push_str("End\n");
        s
    }

    pub fn write_lp(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_lp_string())?;
        Ok(())
    }

    pub fn read_lp(path: impl AsRef<Path>) -> Result<IpModel> {
        let path = path.as_ref();
        parse_lp(&std::fs::read_to_string(path)?, &path.display().to_string())
    }
}

/// Parses the LP subset emitted by [`IpModel::to_lp_string`], reproducing an
/// equivalent model (identical variables, constraints, senses, right-hand
/// sides, and provenance up to the cover id).
pub fn parse_lp(text: &str, source_name: &str) -> Result<IpModel> {
    #[derive(PartialEq)]
    enum Section {
        Preamble,
        Objective,
        Constraints,
        Bounds,
        Binaries,
        Done,
    }

    let mut provenance: Option<Provenance> = None;
    let mut cover_source: Option<String> = None;
    let mut obj_sense = ObjSense::Max;
    let mut obj_expr: Option<Vec<(VarName, f64)>> = None;
    let mut rows: Vec<(ConLabel, Vec<(VarName, f64)>, Sense, f64)> = Vec::new();
    let mut bounds: Vec<(VarName, f64, f64)> = Vec::new();
    let mut binaries: Vec<VarName> = Vec::new();
    let mut section = Section::Preamble;

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let fail = |detail: String| Error::format(source_name, line_no, detail);
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(comment) = line.strip_prefix('\\') {
            let comment = comment.trim();
            if let Some(rest) = comment.strip_prefix("provenance:") {
                provenance = Some(parse_provenance(rest.trim()).map_err(fail)?);
            } else if let Some(rest) = comment.strip_prefix("cover:") {
                cover_source = Some(rest.trim().to_string());
            }
            continue;
        }
        let keyword = line.to_ascii_lowercase();
        match keyword.as_str() {
            "maximize" | "minimize" => {
                obj_sense = if keyword == "maximize" { ObjSense::Max } else { ObjSense::Min };
                section = Section::Objective;
                continue;
            }
            "subject to" | "st" | "s.t." => {
                section = Section::Constraints;
                continue;
            }
            "bounds" => {
                section = Section::Bounds;
                continue;
            }
            "binaries" | "binary" => {
                section = Section::Binaries;
                continue;
            }
            "end" => {
                section = Section::Done;
                continue;
            }
            _ => {}
        }
        match section {
            Section::Preamble | Section::Done => {
                return Err(fail(format!("unexpected content '{line}'")));
            }
            Section::Objective => {
                let expr = line.strip_prefix("obj:").ok_or_else(|| fail("objective must be labeled 'obj:'".into()))?;
                obj_expr = Some(parse_expression(expr).map_err(fail)?);
            }
            Section::Constraints => {
                let (label, rest) = line.split_once(':').ok_or_else(|| fail("constraint needs a label".into()))?;
                let label = ConLabel::from_str(label.trim()).map_err(fail)?;
                let (expr, sense, rhs) = split_relation(rest).map_err(fail)?;
                let terms = parse_expression(expr).map_err(fail)?;
                rows.push((label, terms, sense, rhs));
            }
            Section::Bounds => {
                let tokens: Vec<&str> = line.split_whitespace().collect();
                match tokens.as_slice() {
                    [name, ">=", lo] => {
                        let name = VarName::from_str(name).map_err(fail)?;
                        let lo: f64 = lo.parse().map_err(|_| fail(format!("bad bound '{lo}'")))?;
                        bounds.push((name, lo, f64::INFINITY));
                    }
                    [lo, "<=", name, "<=", hi] => {
                        let name = VarName::from_str(name).map_err(fail)?;
                        let lo: f64 = lo.parse().map_err(|_| fail(format!("bad bound '{lo}'")))?;
                        let hi: f64 = hi.parse().map_err(|_| fail(format!("bad bound '{hi}'")))?;
                        bounds.push((name, lo, hi));
                    }
                    _ => return Err(fail(format!("unsupported bounds line '{line}'"))),
                }
            }
            Section::Binaries => {
                for tok in line.split_whitespace() {
                    binaries.push(VarName::from_str(tok).map_err(fail)?);
                }
            }
        }
    }

    let obj_expr = obj_expr.ok_or_else(|| Error::format(source_name, 1, "missing objective"))?;
    let provenance = provenance.ok_or_else(|| Error::format(source_name, 1, "missing provenance comment"))?;

    // Rebuild the variable list: binaries in declaration order, then
    // continuous variables in bounds order, which matches the writer's
    // emission order for models built by this crate.
    let mut variables: Vec<Variable> = Vec::new();
    let mut index: HashMap<VarName, usize> = HashMap::new();
    for name in binaries {
        if index.insert(name, variables.len()).is_some() {
            return Err(Error::format(source_name, 1, format!("variable {name} declared twice")));
        }
        variables.push(Variable {
            name,
            kind: VarKind::Binary,
            lower: 0.0,
            upper: 1.0,
        });
    }
    for (name, lower, upper) in bounds {
        if index.insert(name, variables.len()).is_some() {
            return Err(Error::format(source_name, 1, format!("variable {name} bounded twice")));
        }
        variables.push(Variable {
            name,
            kind: VarKind::Continuous,
            lower,
            upper,
        });
    }
    let lookup = |terms: Vec<(VarName, f64)>| -> Result<Vec<(usize, f64)>> {
        terms
            .into_iter()
            .map(|(name, coef)| {
                index
                    .get(&name)
                    .map(|&i| (i, coef))
                    .ok_or_else(|| Error::format(source_name, 1, format!("undeclared variable {name}")))
            })
            .collect()
    };

    let constraints = rows
        .into_iter()
        .map(|(label, terms, sense, rhs)| {
            Ok(Constraint {
                label,
                terms: lookup(terms)?,
                sense,
                rhs,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    Ok(IpModel {
        variables,
        constraints,
        objective: Objective {
            sense: obj_sense,
            terms: lookup(obj_expr)?,
        },
        provenance: Provenance {
            cover_source,
            ..provenance
        },
    })
}

fn parse_provenance(s: &str) -> std::result::Result<Provenance, String> {
    let mut formulation = None;
    let mut k = None;
    let mut l_budget = None;
    let mut rho = None;
    let mut upper = None;
    let mut objective = None;
    for pair in s.split_whitespace() {
        let (key, value) = pair.split_once('=').ok_or_else(|| format!("bad provenance token '{pair}'"))?;
        match key {
            "formulation" => {
                formulation = Some(match value {
                    "ip1" => Formulation::Ip1,
                    "ip2" => Formulation::Ip2,
                    "ip3" => Formulation::Ip3,
                    _ => return Err(format!("unknown formulation '{value}'")),
                })
            }
            "k" => k = Some(value.parse().map_err(|_| format!("bad k '{value}'"))?),
            "L" => l_budget = Some(value.parse().map_err(|_| format!("bad L '{value}'"))?),
            "rho" => rho = Some(value.parse().map_err(|_| format!("bad rho '{value}'"))?),
            "upper" => {
                upper = Some(if value == "inactive" {
                    None
                } else {
                    Some(value.parse().map_err(|_| format!("bad upper '{value}'"))?)
                })
            }
            "objective" => {
                objective = Some(match value {
                    "max-min" => ObjectiveKind::MaxMin,
                    "distribution-fit" => ObjectiveKind::DistributionFit,
                    _ => return Err(format!("unknown objective '{value}'")),
                })
            }
            _ => return Err(format!("unknown provenance key '{key}'")),
        }
    }
    Ok(Provenance {
        formulation: formulation.ok_or("provenance missing formulation")?,
        k: k.ok_or("provenance missing k")?,
        l_budget: l_budget.ok_or("provenance missing L")?,
        rho: rho.ok_or("provenance missing rho")?,
        upper: upper.ok_or("provenance missing upper")?,
        objective: objective.ok_or("provenance missing objective")?,
        cover_source: None,
    })
}

fn split_relation(s: &str) -> std::result::Result<(&str, Sense, f64), String> {
    for (tok, sense) in [("<=", Sense::Le), (">=", Sense::Ge), ("=", Sense::Eq)] {
        if let Some(pos) = s.rfind(tok) {
            let (lhs, rest) = s.split_at(pos);
            let rhs = rest[tok.len()..].trim();
            let rhs: f64 = rhs.parse().map_err(|_| format!("bad right-hand side '{rhs}'"))?;
            return Ok((lhs.trim(), sense, rhs));
        }
    }
    Err(format!("no relation operator in '{s}'"))
}

fn parse_expression(s: &str) -> std::result::Result<Vec<(VarName, f64)>, String> {
    let mut terms = Vec::new();
    let mut sign = 1.0;
    let mut coef: Option<f64> = None;
    for tok in s.split_whitespace() {
        match tok {
            "+" => sign = 1.0,
            "-" => sign = -1.0,
            _ => {
                if let Ok(v) = tok.parse::<f64>() {
                    if coef.is_some() {
                        return Err(format!("two consecutive numbers near '{tok}'"));
                    }
                    coef = Some(v);
                } else {
                    let name = VarName::from_str(tok)?;
                    terms.push((name, sign * coef.take().unwrap_or(1.0)));
                    sign = 1.0;
                }
            }
        }
    }
    if coef.is_some() {
        return Err("dangling coefficient at end of expression".to_string());
    }
    Ok(terms)
}
