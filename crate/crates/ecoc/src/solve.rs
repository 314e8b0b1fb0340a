//! Solvers for the column-selection design models.
//!
//! Three engines with one solution type:
//!
//! * [`solve_exact`]: depth-first branch and bound over the selection
//!   variables with an admissible per-pair completion bound, for small and
//!   medium instances;
//! * [`solve_local_search`]: greedy construction plus 1-swap hill climbing
//!   for instances beyond the exact engine;
//! * [`brute_force`]: exhaustive subset enumeration, the verification
//!   oracle for everything else.
//!
//! [`certify`] rechecks any claimed solution from scratch and is applied to
//! every solver output in the test suite.

use std::fmt;
use std::path::Path;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::codebook::{Alphabet, Codebook};
use crate::conflict::{build_graph, classify_pairs, validate_cover, CliqueCover, UpperBound};
use crate::model::{ConLabel, IpModel, ObjectiveKind, VarName};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveStatus {
    /// Objective proven equal to the best bound.
    Optimal,
    /// Feasible incumbent returned at a limit, or a heuristic result
    /// without an optimality proof.
    FeasibleTimeLimit,
    Infeasible,
    /// The model has no distance-link rows, so the objective is unbounded;
    /// reported values are placeholders.
    UnboundedGuard,
}

impl fmt::Display for SolveStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            SolveStatus::Optimal => "optimal",
            SolveStatus::FeasibleTimeLimit => "feasible-time-limit",
            SolveStatus::Infeasible => "infeasible",
            SolveStatus::UnboundedGuard => "unbounded-guard",
        };
        write!(f, "{s}")
    }
}

impl std::str::FromStr for SolveStatus {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "optimal" => Ok(SolveStatus::Optimal),
            "feasible-time-limit" => Ok(SolveStatus::FeasibleTimeLimit),
            "infeasible" => Ok(SolveStatus::Infeasible),
            "unbounded-guard" => Ok(SolveStatus::UnboundedGuard),
            _ => Err(format!("unknown solve status '{s}'")),
        }
    }
}

/// Branch-variable choice at a node.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BranchRule {
    /// Among free columns covering the row pair with the lowest accumulated
    /// distance, take the one covering the most row pairs overall; ties go
    /// to the lowest column index.
    #[default]
    MinPairMaxCoverage,
    /// Lowest-index free column. Weaker but useful for cross-checks: the
    /// optimal value must not depend on the rule.
    FirstFree,
}

/// Admissible upper bound computed at a node.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BoundRule {
    /// Per row pair, the accumulated distance plus the number of further
    /// selections that could still cover it: `min(budget slack, free
    /// coverage)`; the bound is the minimum over pairs.
    #[default]
    PairCompletion,
    /// Budget slack only: minimum accumulated distance plus remaining
    /// selections. Weaker, kept for cross-checks.
    BudgetSlack,
}

/// Limits and rule choices for the solvers.
///
/// The seed is reserved for randomized rules; every shipped rule is
/// deterministic, so it currently influences nothing.
#[derive(Debug, Clone, Copy)]
pub struct SolverConfig {
    pub time_limit_s: f64,
    pub node_limit: u64,
    pub seed: u64,
    pub branch_rule: BranchRule,
    pub bound_rule: BoundRule,
}

impl Default for SolverConfig {
    fn default() -> SolverConfig {
        SolverConfig {
            time_limit_s: 600.0,
            node_limit: u64::MAX,
            seed: 0,
            branch_rule: BranchRule::default(),
            bound_rule: BoundRule::default(),
        }
    }
}

impl SolverConfig {
    fn check(&self) -> Result<()> {
        if !(self.time_limit_s > 0.0) {
            return Err(Error::invalid("solver config", format!("time limit {} s", self.time_limit_s)));
        }
        if self.node_limit == 0 {
            return Err(Error::invalid("solver config", "node limit 0".to_string()));
        }
        Ok(())
    }
}

/// A solver's answer: a feasible column selection with an objective value,
/// the best proven bound, and bookkeeping.
#[derive(Debug, Clone, PartialEq)]
pub struct DesignSolution {
    /// Ascending column indices, 0-based (1-based on the wire).
    pub selected_columns: Vec<u32>,
    pub objective_value: f64,
    /// For maximization, `objective_value <= best_bound` always.
    pub best_bound: f64,
    /// Relative: `|objective - bound| / max(1, |bound|)`.
    pub gap: f64,
    pub gap_abs: f64,
    pub status: SolveStatus,
    pub elapsed_s: f64,
    pub node_count: u64,
    /// Recorded on proven-optimal max-min solves: whether every row pair of
    /// the returned selection sits at the same distance.
    pub equidistant: Option<bool>,
    /// Set when a heuristic could not reach the requested selection size.
    pub warning: Option<String>,
}

#[derive(Serialize, Deserialize)]
struct SolutionWire {
    /// 1-based column indices.
    selected: Vec<u32>,
    objective: f64,
    bound: f64,
    gap: f64,
    gap_abs: f64,
    status: String,
    elapsed_s: f64,
    nodes: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    equidistant: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    warning: Option<String>,
}

impl DesignSolution {
    pub fn to_json_string(&self) -> String {
        let wire = SolutionWire {
            selected: self.selected_columns.iter().map(|&i| i + 1).collect(),
            objective: self.objective_value,
            bound: self.best_bound,
            gap: self.gap,
            gap_abs: self.gap_abs,
            status: self.status.to_string(),
            elapsed_s: self.elapsed_s,
            nodes: self.node_count,
            equidistant: self.equidistant,
            warning: self.warning.clone(),
        };
        let mut s = serde_json::to_string_pretty(&wire).expect("solution serialization is infallible");
        s.push('\n');
        s
    }

    pub fn from_json_str(text: &str) -> Result<DesignSolution> {
        let wire: SolutionWire = serde_json::from_str(text)?;
        if wire.selected.contains(&0) {
            return Err(Error::invalid("solution", "selected column 0; indices are 1-based".to_string()));
        }
        Ok(DesignSolution {
            selected_columns: wire.selected.iter().map(|&i| i - 1).collect(),
            objective_value: wire.objective,
            best_bound: wire.bound,
            gap: wire.gap,
            gap_abs: wire.gap_abs,
            status: wire.status.parse().map_err(|detail: String| Error::invalid("solution", detail))?,
            elapsed_s: wire.elapsed_s,
            node_count: wire.nodes,
            equidistant: wire.equidistant,
            warning: wire.warning,
        })
    }

    pub fn write_json(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_json_string())?;
        Ok(())
    }

    pub fn read_json(path: impl AsRef<Path>) -> Result<DesignSolution> {
        DesignSolution::from_json_str(&std::fs::read_to_string(path)?)
    }

    /// The selected columns as a standalone codebook, stamped with the
    /// objective value.
    pub fn materialize(&self, m: &Codebook) -> Result<Codebook> {
        let indices: Vec<usize> = self.selected_columns.iter().map(|&i| i as usize).collect();
        let mut sub = m.select_columns(&indices)?;
        sub.metadata.objective = Some(self.objective_value);
        Ok(sub)
    }
}

fn gaps(objective: f64, bound: f64) -> (f64, f64) {
    let gap_abs = (bound - objective).abs();
    (gap_abs / f64::max(1.0, bound.abs()), gap_abs)
}

/// Combinatorial cap on the max-min row distance of any `L`-column binary
/// selection: a column with `a` positive entries contributes `a(k - a) <=
/// floor(k^2/4)` to the total distance over `C(k, 2)` row pairs, so the
/// minimum pair cannot exceed the average, `floor(L floor(k^2/4) / C(k,2))`.
/// `L = 0` yields 0.
pub fn bound_plotkin(k: usize, l: usize) -> f64 {
    assert!(k >= 2, "need at least two codewords, got k={k}");
    let (k, l) = (k as u64, l as u64);
    (l * (k * k / 4) / (k * (k - 1) / 2)) as f64
}

/// A design model reduced to its selection skeleton: budget, mutually
/// exclusive column sets, and per-row-pair coverage.
struct SelectionProblem {
    n_columns: usize,
    budget: usize,
    /// Adjacency of the exclusion structure, sorted per column.
    conflicts: Vec<Vec<u32>>,
    /// Per row pair, the columns covering it (unit link coefficient).
    pair_support: Vec<Vec<u32>>,
    objective: ObjectiveKind,
    /// Per row pair, the distance target; present for the fit objective.
    targets: Vec<f64>,
    k: usize,
}

/// Projects a design model onto its `x` variables. AND-linearized models
/// reduce exactly: the pair variables are forced to products of the `x`s,
/// so a separation row with a positive pair coefficient excludes its pair.
fn extract_selection_problem(model: &IpModel) -> Result<SelectionProblem> {
    let n_columns = model
        .variables
        .iter()
        .filter(|v| matches!(v.name, VarName::X(_)))
        .count();
    for (i, v) in model.variables.iter().take(n_columns).enumerate() {
        if v.name != VarName::X(i as u32) {
            return Err(Error::UnsupportedModel(format!(
                "variable {i} is {}, expected x_{}",
                v.name,
                i + 1
            )));
        }
    }

    let mut budget = n_columns;
    let mut edges: Vec<(u32, u32)> = Vec::new();
    let mut links: Vec<Vec<u32>> = Vec::new();
    let mut targets: Vec<f64> = Vec::new();
    let mut dev_support: Vec<Vec<u32>> = Vec::new();
    for c in &model.constraints {
        match c.label {
            ConLabel::Budget => budget = c.rhs.max(0.0).floor() as usize,
            ConLabel::PairExclusion(i, j) => edges.push((i, j)),
            ConLabel::Clique(_) => {
                let members: Vec<u32> = c
                    .terms
                    .iter()
                    .filter(|&&(v, _)| v < n_columns)
                    .map(|&(v, _)| v as u32)
                    .collect();
                for a in 0..members.len() {
                    for b in a + 1..members.len() {
                        edges.push((members[a], members[b]));
                    }
                }
            }
            ConLabel::SepLow(i, j) | ConLabel::SepHigh(i, j) => {
                if c.terms.iter().any(|&(_, coef)| coef > 0.0) {
                    edges.push((i, j));
                }
            }
            ConLabel::AndFirst(..) | ConLabel::AndSecond(..) | ConLabel::AndLower(..) => {}
            ConLabel::Link(..) => {
                let mut support = Vec::new();
                for &(v, coef) in &c.terms {
                    if v < n_columns && coef != 0.0 {
                        if coef != -1.0 {
                            return Err(Error::UnsupportedModel(format!(
                                "link coefficient {coef} on {}; only unit coverage is solvable",
                                model.variables[v].name
                            )));
                        }
                        support.push(v as u32);
                    }
                }
                links.push(support);
            }
            ConLabel::DevPos(..) => {
                let mut support = Vec::new();
                for &(v, coef) in &c.terms {
                    if v < n_columns && coef != 0.0 {
                        if coef != 1.0 {
                            return Err(Error::UnsupportedModel(format!(
                                "deviation coefficient {coef} on {}",
                                model.variables[v].name
                            )));
                        }
                        support.push(v as u32);
                    }
                }
                dev_support.push(support);
                targets.push(c.rhs);
            }
            ConLabel::DevNeg(..) => {}
        }
    }

    let mut conflicts = vec![Vec::new(); n_columns];
    for (i, j) in edges {
        conflicts[i as usize].push(j);
        conflicts[j as usize].push(i);
    }
    for adj in &mut conflicts {
        adj.sort_unstable();
        adj.dedup();
    }

    let objective = model.provenance.objective;
    let pair_support = match objective {
        ObjectiveKind::MaxMin => links,
        ObjectiveKind::DistributionFit => dev_support,
    };
    Ok(SelectionProblem {
        n_columns,
        budget: budget.min(n_columns),
        conflicts,
        pair_support,
        objective,
        targets,
        k: model.provenance.k,
    })
}

/// Objective value of a 0/1 selection under the model's own semantics, or
/// `None` when the selection violates the budget or an exclusion. The
/// max-min value of a selection with no distance-link rows is unbounded and
/// reported as infinity.
pub fn evaluate_selection(model: &IpModel, selection: &[bool]) -> Option<f64> {
    let prob = extract_selection_problem(model).ok()?;
    assert_eq!(selection.len(), prob.n_columns, "selection length must match column count");
    let n_sel = selection.iter().filter(|&&s| s).count();
    if n_sel > prob.budget {
        return None;
    }
    for (i, adj) in prob.conflicts.iter().enumerate() {
        if selection[i] && adj.iter().any(|&j| j > i as u32 && selection[j as usize]) {
            return None;
        }
    }
    let coverage = |support: &[u32]| support.iter().filter(|&&i| selection[i as usize]).count() as f64;
    match prob.objective {
        ObjectiveKind::MaxMin => Some(
            prob.pair_support
                .iter()
                .map(|s| coverage(s))
                .fold(f64::INFINITY, f64::min),
        ),
        ObjectiveKind::DistributionFit => Some(
            prob.pair_support
                .iter()
                .zip(&prob.targets)
                .map(|(s, &t)| (coverage(s) - t).abs())
                .sum(),
        ),
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum ColState {
    Free,
    Selected,
    Excluded,
}

struct ExactSearch<'a> {
    prob: &'a SelectionProblem,
    /// Per column, the row pairs it covers.
    col_pairs: Vec<Vec<u32>>,
    /// Static branch score: total pairs covered.
    col_coverage: Vec<u32>,
    state: Vec<ColState>,
    /// Accumulated distance per row pair over selected columns.
    acc: Vec<u32>,
    /// Free columns covering each row pair.
    free_cnt: Vec<u32>,
    n_sel: usize,
    trail: Vec<u32>,
    best_obj: u32,
    best_sel: Vec<u32>,
    nodes: u64,
    node_limit: u64,
    started: Instant,
    time_limit_s: f64,
    hit_limit: bool,
    branch_rule: BranchRule,
    bound_rule: BoundRule,
}

impl ExactSearch<'_> {
    fn bound(&self) -> u32 {
        let slack = (self.prob.budget - self.n_sel) as u32;
        match self.bound_rule {
            BoundRule::PairCompletion => self
                .acc
                .iter()
                .zip(&self.free_cnt)
                .map(|(&a, &f)| a + slack.min(f))
                .min()
                .unwrap_or(0),
            BoundRule::BudgetSlack => self.acc.iter().min().copied().unwrap_or(0) + slack,
        }
    }

    fn pick_column(&self) -> Option<usize> {
        let free_best = |candidates: &mut dyn Iterator<Item = usize>| -> Option<usize> {
            let mut best: Option<(u32, usize)> = None;
            for i in candidates {
                if self.state[i] == ColState::Free {
                    let score = self.col_coverage[i];
                    // Strict inequality keeps the lowest index on ties.
                    if best.map_or(true, |(s, _)| score > s) {
                        best = Some((score, i));
                    }
                }
            }
            best.map(|(_, i)| i)
        };
        match self.branch_rule {
            BranchRule::FirstFree => (0..self.prob.n_columns).find(|&i| self.state[i] == ColState::Free),
            BranchRule::MinPairMaxCoverage => {
                let min_pair = (0..self.acc.len()).min_by_key(|&p| self.acc[p]);
                if let Some(p) = min_pair {
                    let mut covering = self.prob.pair_support[p].iter().map(|&i| i as usize);
                    if let Some(i) = free_best(&mut covering) {
                        return Some(i);
                    }
                }
                free_best(&mut (0..self.prob.n_columns))
            }
        }
    }

    fn set_excluded(&mut self, col: usize) {
        self.state[col] = ColState::Excluded;
        self.trail.push(col as u32);
        for &p in &self.col_pairs[col] {
            self.free_cnt[p as usize] -= 1;
        }
    }

    fn select(&mut self, col: usize) {
        self.state[col] = ColState::Selected;
        self.trail.push(col as u32);
        self.n_sel += 1;
        for &p in &self.col_pairs[col] {
            self.acc[p as usize] += 1;
            self.free_cnt[p as usize] -= 1;
        }
        let neighbors = self.prob.conflicts[col].clone();
        for nb in neighbors {
            if self.state[nb as usize] == ColState::Free {
                self.set_excluded(nb as usize);
            }
        }
    }

    fn undo_to(&mut self, mark: usize) {
        while self.trail.len() > mark {
            let col = self.trail.pop().expect("trail is non-empty above the mark") as usize;
            match self.state[col] {
                ColState::Selected => {
                    self.n_sel -= 1;
                    for &p in &self.col_pairs[col] {
                        self.acc[p as usize] -= 1;
                        self.free_cnt[p as usize] += 1;
                    }
                }
                ColState::Excluded => {
                    for &p in &self.col_pairs[col] {
                        self.free_cnt[p as usize] += 1;
                    }
                }
                ColState::Free => unreachable!("free column on the trail"),
            }
            self.state[col] = ColState::Free;
        }
    }

    fn search(&mut self) {
        if self.hit_limit {
            return;
        }
        self.nodes += 1;
        if self.nodes >= self.node_limit || self.started.elapsed().as_secs_f64() > self.time_limit_s {
            self.hit_limit = true;
            return;
        }
        if self.bound() <= self.best_obj {
            return;
        }
        if self.n_sel == self.prob.budget {
            return;
        }
        let Some(col) = self.pick_column() else {
            return;
        };

        let mark = self.trail.len();
        self.select(col);
        let cur = self.acc.iter().min().copied().unwrap_or(0);
        if cur > self.best_obj {
            self.best_obj = cur;
            self.best_sel = (0..self.prob.n_columns)
                .filter(|&i| self.state[i] == ColState::Selected)
                .map(|i| i as u32)
                .collect();
        }
        self.search();
        self.undo_to(mark);

        let mark = self.trail.len();
        self.set_excluded(col);
        self.search();
        self.undo_to(mark);
    }
}

/// Whether every row pair of the selection sits at the same distance.
fn selection_equidistant(pair_support: &[Vec<u32>], selected: &[u32]) -> bool {
    let mut first = None;
    for support in pair_support {
        let d = support.iter().filter(|i| selected.contains(i)).count();
        match first {
            None => first = Some(d),
            Some(f) if f != d => return false,
            Some(_) => {}
        }
    }
    true
}

/// Depth-first branch and bound over the selection variables of a max-min
/// design model (any of the three formulations; AND-linearized models are
/// projected first). Exhausting the tree proves optimality; at a limit the
/// incumbent is returned with the bound available at the root, capped by
/// [`bound_plotkin`].
///
/// The result is a pure function of model and config when the run ends by
/// tree exhaustion or node limit; a wall-clock interruption point is
/// machine-dependent.
pub fn solve_exact(model: &IpModel, cfg: &SolverConfig) -> Result<DesignSolution> {
    cfg.check()?;
    let started = Instant::now();
    let prob = extract_selection_problem(model)?;
    if prob.objective != ObjectiveKind::MaxMin {
        return Err(Error::UnsupportedModel(
            "distribution-fit objective: enumerate with brute force or export the model".to_string(),
        ));
    }
    if prob.pair_support.is_empty() {
        return Ok(DesignSolution {
            selected_columns: Vec::new(),
            objective_value: 0.0,
            best_bound: 0.0,
            gap: 0.0,
            gap_abs: 0.0,
            status: SolveStatus::UnboundedGuard,
            elapsed_s: started.elapsed().as_secs_f64(),
            node_count: 0,
            equidistant: None,
            warning: Some("no distance-link rows: the max-min objective is unbounded".to_string()),
        });
    }

    let n_pairs = prob.pair_support.len();
    let mut col_pairs = vec![Vec::new(); prob.n_columns];
    let mut col_coverage = vec![0u32; prob.n_columns];
    for (p, support) in prob.pair_support.iter().enumerate() {
        for &i in support {
            col_pairs[i as usize].push(p as u32);
            col_coverage[i as usize] += 1;
        }
    }
    let free_cnt: Vec<u32> = prob.pair_support.iter().map(|s| s.len() as u32).collect();

    let mut search = ExactSearch {
        prob: &prob,
        col_pairs,
        col_coverage,
        state: vec![ColState::Free; prob.n_columns],
        acc: vec![0; n_pairs],
        free_cnt,
        n_sel: 0,
        trail: Vec::new(),
        best_obj: 0,
        best_sel: Vec::new(),
        nodes: 0,
        node_limit: cfg.node_limit,
        started,
        time_limit_s: cfg.time_limit_s,
        hit_limit: false,
        branch_rule: cfg.branch_rule,
        bound_rule: cfg.bound_rule,
    };
    let root_bound = search.bound();
    search.search();

    let objective = f64::from(search.best_obj);
    let plotkin = bound_plotkin(prob.k, prob.budget);
    let best_bound = if search.hit_limit {
        f64::from(root_bound).min(plotkin)
    } else {
        objective
    };
    let status = if best_bound == objective {
        SolveStatus::Optimal
    } else {
        SolveStatus::FeasibleTimeLimit
    };
    let (gap, gap_abs) = gaps(objective, best_bound);
    let equidistant = (status == SolveStatus::Optimal)
        .then(|| selection_equidistant(&prob.pair_support, &search.best_sel));
    Ok(DesignSolution {
        selected_columns: search.best_sel,
        objective_value: objective,
        best_bound,
        gap,
        gap_abs,
        status,
        elapsed_s: started.elapsed().as_secs_f64(),
        node_count: search.nodes,
        equidistant,
        warning: None,
    })
}

/// Row-pair coverage lists of a binary codebook: entry `p` (lexicographic
/// over row pairs) holds the columns on which the two rows disagree.
fn row_pair_support(m: &Codebook) -> Vec<Vec<u32>> {
    let mut support = Vec::with_capacity(m.k() * (m.k() - 1) / 2);
    for s in 0..m.k() {
        for t in s + 1..m.k() {
            support.push(
                (0..m.n_columns())
                    .filter(|&i| m.get(s, i) != m.get(t, i))
                    .map(|i| i as u32)
                    .collect(),
            );
        }
    }
    support
}

/// Greedy construction plus 1-swap hill climbing on the clique-covered
/// design: add the feasible column with the best post-addition minimum
/// row-pair distance until the budget is met, then repeatedly replace one
/// selected column by one unselected feasible column while the minimum
/// distance strictly improves. The cover must validate against the
/// conflict graph of `classify_pairs(m, rho, inactive)`.
///
/// `best_bound` comes from [`bound_plotkin`]; reaching it proves
/// optimality. Node count records objective evaluations.
pub fn solve_local_search(
    m: &Codebook,
    l: usize,
    rho: u32,
    cover: &CliqueCover,
    cfg: &SolverConfig,
) -> Result<DesignSolution> {
    cfg.check()?;
    if m.alphabet() != Alphabet::Binary {
        return Err(Error::invalid("local search", "design requires a binary codebook".to_string()));
    }
    if rho < 1 {
        return Err(Error::invalid("local search", "separation parameter rho must be at least 1".to_string()));
    }
    let started = Instant::now();
    let g = build_graph(&classify_pairs(m, rho, UpperBound::Inactive));
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
    let support = row_pair_support(m);
    let n_pairs = support.len();
    // Coverage bitset per column over row pairs.
    let words = n_pairs.div_ceil(64);
    let mut covers = vec![vec![0u64; words]; n];
    for (p, cols) in support.iter().enumerate() {
        for &i in cols {
            covers[i as usize][p / 64] |= 1 << (p % 64);
        }
    }
    let covered = |col: usize, p: usize| covers[col][p / 64] >> (p % 64) & 1 == 1;

    let budget = l.min(n);
    let mut selected = vec![false; n];
    let mut blocked = vec![0u32; n];
    let mut acc = vec![0u32; n_pairs];
    let mut n_sel = 0usize;
    let mut evals = 0u64;
    let mut warning = None;
    let time_up = |evals: u64| {
        evals >= cfg.node_limit || started.elapsed().as_secs_f64() > cfg.time_limit_s
    };

    while n_sel < budget && !time_up(evals) {
        let mut best: Option<(u32, usize)> = None;
        for i in 0..n {
            if selected[i] || blocked[i] > 0 {
                continue;
            }
            evals += 1;
            let after = (0..n_pairs)
                .map(|p| acc[p] + u32::from(covered(i, p)))
                .min()
                .unwrap_or(0);
            if best.map_or(true, |(obj, _)| after > obj) {
                best = Some((after, i));
            }
        }
        let Some((_, pick)) = best else {
            warning = Some(format!("no feasible column after {n_sel} of {budget} selections"));
            break;
        };
        selected[pick] = true;
        n_sel += 1;
        for p in 0..n_pairs {
            acc[p] += u32::from(covered(pick, p));
        }
        for &nb in g.neighbors(pick as u32) {
            blocked[nb as usize] += 1;
        }
    }

    let mut objective = acc.iter().min().copied().unwrap_or(0);
    'climb: loop {
        if time_up(evals) {
            break;
        }
        for out in 0..n {
            if !selected[out] {
                continue;
            }
            for inc in 0..n {
                if selected[inc] {
                    continue;
                }
                let blocked_without_out = blocked[inc] - u32::from(g.has_edge(inc as u32, out as u32));
                if blocked_without_out > 0 {
                    continue;
                }
                evals += 1;
                let after = (0..n_pairs)
                    .map(|p| acc[p] - u32::from(covered(out, p)) + u32::from(covered(inc, p)))
                    .min()
                    .unwrap_or(0);
                if after > objective {
                    selected[out] = false;
                    selected[inc] = true;
                    for p in 0..n_pairs {
                        acc[p] = acc[p] - u32::from(covered(out, p)) + u32::from(covered(inc, p));
                    }
                    for &nb in g.neighbors(out as u32) {
                        blocked[nb as usize] -= 1;
                    }
                    for &nb in g.neighbors(inc as u32) {
                        blocked[nb as usize] += 1;
                    }
                    objective = after;
                    continue 'climb;
                }
                if time_up(evals) {
                    break 'climb;
                }
            }
        }
        break;
    }

    let objective = f64::from(objective);
    let best_bound = bound_plotkin(m.k(), budget);
    let status = if warning.is_none() && objective == best_bound {
        SolveStatus::Optimal
    } else {
        SolveStatus::FeasibleTimeLimit
    };
    let selected_columns: Vec<u32> = (0..n).filter(|&i| selected[i]).map(|i| i as u32).collect();
    let equidistant =
        (status == SolveStatus::Optimal).then(|| selection_equidistant(&support, &selected_columns));
    let (gap, gap_abs) = gaps(objective, best_bound);
    Ok(DesignSolution {
        selected_columns,
        objective_value: objective,
        best_bound,
        gap,
        gap_abs,
        status,
        elapsed_s: started.elapsed().as_secs_f64(),
        node_count: evals,
        equidistant,
        warning,
    })
}

/// `sum_{j=0}^{cap} C(n, j)` in floating point, saturating to infinity.
fn subset_count(n: usize, cap: usize) -> f64 {
    let mut total = 1.0;
    let mut c = 1.0;
    for j in 1..=cap.min(n) {
        c = c * (n - j + 1) as f64 / j as f64;
        total += c;
        if !total.is_finite() {
            return f64::INFINITY;
        }
    }
    total
}

struct BruteSearch {
    /// Doubled-distance contribution per column, packed as u8 lanes (one
    /// per row pair) in u64 words. Doubling keeps ternary half-steps
    /// integral; lanes beyond the pair count are pinned at 255 so they
    /// never drive the minimum.
    contrib: Vec<Vec<u64>>,
    conflict: Vec<Vec<u64>>,
    acc: Vec<u64>,
    sel_mask: Vec<u64>,
    sel: Vec<u32>,
    n: usize,
    cap: usize,
    best_obj: Option<u64>,
    best_sel: Vec<u32>,
    nodes: u64,
}

impl BruteSearch {
    fn min_lane(&self) -> u64 {
        let mut min = u64::MAX;
        for &word in &self.acc {
            for b in 0..8 {
                min = min.min(word >> (8 * b) & 0xFF);
            }
        }
        min
    }

    fn dfs(&mut self, next: usize) {
        self.nodes += 1;
        let cur = self.min_lane();
        if self.best_obj.map_or(true, |b| cur > b) {
            self.best_obj = Some(cur);
            self.best_sel = self.sel.clone();
        }
        if self.sel.len() == self.cap {
            return;
        }
        let best = self.best_obj.expect("incumbent recorded above");
        for i in next..self.n {
            // Each further column adds at most 2 per (doubled) pair lane.
            if cur + 2 * (self.cap - self.sel.len()).min(self.n - i) as u64 <= best {
                break;
            }
            if self
                .conflict[i]
                .iter()
                .zip(&self.sel_mask)
                .any(|(&c, &s)| c & s != 0)
            {
                continue;
            }
            for (a, &c) in self.acc.iter_mut().zip(&self.contrib[i]) {
                *a += c;
            }
            self.sel_mask[i / 64] |= 1 << (i % 64);
            self.sel.push(i as u32);
            self.dfs(i + 1);
            self.sel.pop();
            self.sel_mask[i / 64] &= !(1 << (i % 64));
            for (a, &c) in self.acc.iter_mut().zip(&self.contrib[i]) {
                *a -= c;
            }
        }
    }
}

/// Exhaustive enumeration of every separation-feasible column subset of
/// size at most `L`, with a guard of ten million subsets. The returned
/// optimum is exact: status optimal, gap zero.
pub fn brute_force(m: &Codebook, l: usize, rho: u32, upper: UpperBound) -> Result<DesignSolution> {
    brute_force_with_budget(m, l, rho, upper, 10_000_000)
}

/// [`brute_force`] with an explicit subset-count guard, for callers that
/// knowingly pay for larger enumerations.
pub fn brute_force_with_budget(
    m: &Codebook,
    l: usize,
    rho: u32,
    upper: UpperBound,
    max_subsets: u64,
) -> Result<DesignSolution> {
    let started = Instant::now();
    let n = m.n_columns();
    let cap = l.min(n);
    let total = subset_count(n, cap);
    if total > max_subsets as f64 {
        return Err(Error::EnumerationBudget {
            subsets: total,
            limit: max_subsets,
        });
    }
    // Doubled distances live in u8 lanes; the guard above cannot pass with
    // more than 127 selectable columns.
    assert!(cap <= 127, "packed accumulators cap the selection depth at 127");

    let n_pairs = m.k() * (m.k() - 1) / 2;
    let words = n_pairs.div_ceil(8);
    let mut contrib = vec![vec![0u64; words]; n];
    for (i, packed) in contrib.iter_mut().enumerate() {
        let mut p = 0;
        for s in 0..m.k() {
            for t in s + 1..m.k() {
                let doubled = (1 - i32::from(m.get(s, i)) * i32::from(m.get(t, i))) as u64;
                packed[p / 8] |= doubled << (8 * (p % 8));
                p += 1;
            }
        }
    }
    let mut acc = vec![0u64; words];
    for lane in n_pairs..8 * words {
        acc[lane / 8] |= 0xFF << (8 * (lane % 8));
    }

    let col_words = n.div_ceil(64);
    let mut conflict = vec![vec![0u64; col_words]; n];
    for &(i, j) in &classify_pairs(m, rho, upper).infeasible_pairs {
        conflict[i as usize][j as usize / 64] |= 1 << (j % 64);
        conflict[j as usize][i as usize / 64] |= 1 << (i % 64);
    }

    let mut search = BruteSearch {
        contrib,
        conflict,
        acc,
        sel_mask: vec![0u64; col_words],
        sel: Vec::new(),
        n,
        cap,
        best_obj: None,
        best_sel: Vec::new(),
        nodes: 0,
    };
    search.dfs(0);

    let objective = search.best_obj.expect("the empty subset is always visited") as f64 / 2.0;
    let support = row_pair_support_generalized(m);
    let equidistant = {
        let distances: Vec<f64> = support
            .iter()
            .map(|s| s.iter().filter(|&&(i, _)| search.best_sel.contains(&i)).map(|&(_, d)| d).sum())
            .collect();
        distances.windows(2).all(|w| w[0] == w[1])
    };
    Ok(DesignSolution {
        selected_columns: search.best_sel,
        objective_value: objective,
        best_bound: objective,
        gap: 0.0,
        gap_abs: 0.0,
        status: SolveStatus::Optimal,
        elapsed_s: started.elapsed().as_secs_f64(),
        node_count: search.nodes,
        equidistant: Some(equidistant),
        warning: None,
    })
}

/// Per row pair, `(column, contribution)` with the generalized half-step
/// contributions, covering ternary codebooks.
fn row_pair_support_generalized(m: &Codebook) -> Vec<Vec<(u32, f64)>> {
    let mut support = Vec::with_capacity(m.k() * (m.k() - 1) / 2);
    for s in 0..m.k() {
        for t in s + 1..m.k() {
            support.push(
                (0..m.n_columns())
                    .filter_map(|i| {
                        let c = f64::from(1 - i32::from(m.get(s, i)) * i32::from(m.get(t, i))) / 2.0;
                        (c != 0.0).then_some((i as u32, c))
                    })
                    .collect(),
            );
        }
    }
    support
}

#[derive(Debug, Clone, PartialEq)]
pub enum CertifyViolation {
    IndexOutOfRange { column: u32, n_columns: usize },
    DuplicateColumn { column: u32 },
    BudgetExceeded { selected: usize, budget: usize },
    SeparationViolated { i: u32, j: u32, distance: f64 },
    ObjectiveMismatch { claimed: f64, recomputed: f64 },
}

impl fmt::Display for CertifyViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CertifyViolation::IndexOutOfRange { column, n_columns } => {
                write!(f, "column {} outside 1..={n_columns}", column + 1)
            }
            CertifyViolation::DuplicateColumn { column } => write!(f, "column {} selected twice", column + 1),
            CertifyViolation::BudgetExceeded { selected, budget } => {
                write!(f, "{selected} columns selected against a budget of {budget}")
            }
            CertifyViolation::SeparationViolated { i, j, distance } => {
                write!(f, "columns {} and {} at distance {distance} outside the band", i + 1, j + 1)
            }
            CertifyViolation::ObjectiveMismatch { claimed, recomputed } => {
                write!(f, "claimed objective {claimed}, recomputed {recomputed}")
            }
        }
    }
}

/// Independent recheck of a claimed design solution.
#[derive(Debug, Clone, PartialEq)]
pub struct CertifyReport {
    pub confirmed: bool,
    /// Minimum row-pair distance of the selection, recomputed from the
    /// codebook entries alone; 0 for an empty selection.
    pub recomputed_objective: f64,
    pub violations: Vec<CertifyViolation>,
}

/// Recomputes budget use, pairwise column separation, and the minimum
/// row-pair distance of `selection` from scratch, confirming or refuting
/// `claimed_objective`. Refutation is data, not an error.
pub fn certify(
    m: &Codebook,
    selection: &[u32],
    l: usize,
    rho: u32,
    upper: UpperBound,
    claimed_objective: f64,
) -> CertifyReport {
    let mut violations = Vec::new();
    let n = m.n_columns();
    let mut seen = vec![false; n];
    let mut valid: Vec<u32> = Vec::new();
    for &col in selection {
        if col as usize >= n {
            violations.push(CertifyViolation::IndexOutOfRange { column: col, n_columns: n });
        } else if seen[col as usize] {
            violations.push(CertifyViolation::DuplicateColumn { column: col });
        } else {
            seen[col as usize] = true;
            valid.push(col);
        }
    }
    if selection.len() > l {
        violations.push(CertifyViolation::BudgetExceeded {
            selected: selection.len(),
            budget: l,
        });
    }
    for a in 0..valid.len() {
        for b in a + 1..valid.len() {
            let (i, j) = (valid[a].min(valid[b]), valid[a].max(valid[b]));
            let d = m.column_distance(i as usize, j as usize);
            if d < f64::from(rho) || !upper.admits(d) {
                violations.push(CertifyViolation::SeparationViolated { i, j, distance: d });
            }
        }
    }

    let mut recomputed = if m.k() >= 2 { f64::INFINITY } else { 0.0 };
    for s in 0..m.k() {
        for t in s + 1..m.k() {
            let d: f64 = valid
                .iter()
                .map(|&i| f64::from(1 - i32::from(m.get(s, i as usize)) * i32::from(m.get(t, i as usize))) / 2.0)
                .sum();
            recomputed = recomputed.min(d);
        }
    }
    if !recomputed.is_finite() {
        recomputed = 0.0;
    }
    if (recomputed - claimed_objective).abs() > 1e-9 {
        violations.push(CertifyViolation::ObjectiveMismatch {
            claimed: claimed_objective,
            recomputed,
        });
    }
    CertifyReport {
        confirmed: violations.is_empty(),
        recomputed_objective: recomputed,
        violations,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::conflict::edge_clique_cover;
    use crate::model::{build_ip1, build_ip2, build_ip3, set_objective_distribution, TargetDistances};

    fn quick_cfg() -> SolverConfig {
        SolverConfig {
            time_limit_s: 60.0,
            ..SolverConfig::default()
        }
    }

    fn exact_ip2(k: usize, l: usize, rho: u32, upper: UpperBound) -> DesignSolution {
        let m = Codebook::exhaustive(k).unwrap();
        let model = build_ip2(&m, l, rho, upper).unwrap();
        solve_exact(&model, &quick_cfg()).unwrap()
    }

    #[test]
    fn plotkin_bound_values() {
        assert_eq!(bound_plotkin(10, 20), 11.0);
        assert_eq!(bound_plotkin(2, 5), 5.0);
        assert_eq!(bound_plotkin(4, 7), 4.0);
        assert_eq!(bound_plotkin(5, 10), 6.0);
        assert_eq!(bound_plotkin(3, 0), 0.0);
    }

    #[test]
    fn brute_force_full_exhaustive_codes_are_equidistant_optima() {
        let m4 = Codebook::exhaustive(4).unwrap();
        let sol = brute_force(&m4, 7, 1, UpperBound::Inactive).unwrap();
        assert_eq!(sol.objective_value, 4.0);
        assert_eq!(sol.selected_columns, (0..7).collect::<Vec<u32>>());
        assert_eq!(sol.equidistant, Some(true));
        assert_eq!(sol.status, SolveStatus::Optimal);
        assert_eq!(sol.gap, 0.0);

        let m5 = Codebook::exhaustive(5).unwrap();
        let sol = brute_force(&m5, 15, 1, UpperBound::Inactive).unwrap();
        assert_eq!(sol.objective_value, 8.0);
        assert_eq!(sol.selected_columns.len(), 15);
    }

    #[test]
    fn brute_force_reports_shorter_selection_under_conflicts() {
        // exhaustive(3) columns: [1,-1,-1], [1,-1,1], [1,1,-1]. Only the
        // last two sit at distance 2, so rho=2 admits at most that pair.
        let m = Codebook::exhaustive(3).unwrap();
        let sol = brute_force(&m, 3, 2, UpperBound::Inactive).unwrap();
        assert_eq!(sol.selected_columns, vec![1, 2]);
        assert_eq!(sol.objective_value, 1.0);
        let report = certify(&m, &sol.selected_columns, 3, 2, UpperBound::Inactive, 1.0);
        assert!(report.confirmed, "{:?}", report.violations);
    }

    #[test]
    fn brute_force_guard_rejects_huge_enumerations() {
        let m = Codebook::exhaustive(10).unwrap();
        let err = brute_force(&m, 20, 3, UpperBound::Inactive).unwrap_err();
        assert!(matches!(err, Error::EnumerationBudget { .. }), "{err}");
    }

    #[test]
    fn exact_matches_brute_force_on_sample_grid() {
        for k in [4, 5] {
            let m = Codebook::exhaustive(k).unwrap();
            for l in [3, 7, 2 * k] {
                for rho in [1u32, 2] {
                    for upper in [UpperBound::Inactive, UpperBound::Value((k as u32 - rho) as f64)] {
                        let oracle = brute_force(&m, l, rho, upper).unwrap();
                        let sol = exact_ip2(k, l, rho, upper);
                        assert_eq!(
                            sol.objective_value, oracle.objective_value,
                            "k={k} L={l} rho={rho} upper={upper}"
                        );
                        assert_eq!(sol.status, SolveStatus::Optimal);
                        let report =
                            certify(&m, &sol.selected_columns, l, rho, upper, sol.objective_value);
                        assert!(report.confirmed, "{:?}", report.violations);
                        assert!(sol.objective_value <= sol.best_bound);
                        assert!(sol.best_bound <= bound_plotkin(k, l.min(m.n_columns())));
                    }
                }
            }
        }
    }

    #[test]
    fn exact_agrees_across_formulations() {
        let m = Codebook::exhaustive(4).unwrap();
        let ip1 = build_ip1(&m, 6, 2, UpperBound::Inactive).unwrap();
        let ip2 = build_ip2(&m, 6, 2, UpperBound::Inactive).unwrap();
        let g = build_graph(&classify_pairs(&m, 2, UpperBound::Inactive));
        let cover = edge_clique_cover(&g, 0);
        let ip3 = build_ip3(&m, 6, 2, UpperBound::Inactive, &cover).unwrap();
        let objs: Vec<f64> = [ip1, ip2, ip3]
            .iter()
            .map(|model| solve_exact(model, &quick_cfg()).unwrap().objective_value)
            .collect();
        assert_eq!(objs[0], objs[1]);
        assert_eq!(objs[1], objs[2]);
        let oracle = brute_force(&m, 6, 2, UpperBound::Inactive).unwrap();
        assert_eq!(objs[0], oracle.objective_value);
    }

    #[test]
    fn evaluate_selection_agrees_across_formulations() {
        let m = Codebook::exhaustive(4).unwrap();
        let ip1 = build_ip1(&m, 6, 2, UpperBound::Inactive).unwrap();
        let ip2 = build_ip2(&m, 6, 2, UpperBound::Inactive).unwrap();
        let cover = edge_clique_cover(&build_graph(&classify_pairs(&m, 2, UpperBound::Inactive)), 0);
        let ip3 = build_ip3(&m, 6, 2, UpperBound::Inactive, &cover).unwrap();
        let mut best = None;
        for bits in 0u32..1 << 7 {
            let selection: Vec<bool> = (0..7).map(|i| bits >> i & 1 == 1).collect();
            let v1 = evaluate_selection(&ip1, &selection);
            assert_eq!(v1, evaluate_selection(&ip2, &selection), "bits={bits:#b}");
            assert_eq!(v1, evaluate_selection(&ip3, &selection), "bits={bits:#b}");
            if let Some(v) = v1 {
                if best.map_or(true, |b| v > b) {
                    best = Some(v);
                }
            }
        }
        let sol = exact_ip2(4, 6, 2, UpperBound::Inactive);
        assert_eq!(best, Some(sol.objective_value));
    }

    #[test]
    fn evaluate_selection_scores_distribution_fit() {
        let m = Codebook::exhaustive(4).unwrap();
        let ip2 = build_ip2(&m, 7, 1, UpperBound::Inactive).unwrap();
        let fitted = set_objective_distribution(&ip2, &TargetDistances::uniform(4, 4.0)).unwrap();
        // The full code realizes distance 4 on every row pair.
        assert_eq!(evaluate_selection(&fitted, &[true; 7]), Some(0.0));
        assert_eq!(evaluate_selection(&fitted, &[false; 7]), Some(6.0 * 4.0));
        let err = solve_exact(&fitted, &quick_cfg()).unwrap_err();
        assert!(matches!(err, Error::UnsupportedModel(_)));
    }

    #[test]
    fn zero_budget_is_a_trivial_optimum() {
        let sol = exact_ip2(4, 0, 2, UpperBound::Inactive);
        assert_eq!(sol.objective_value, 0.0);
        assert!(sol.selected_columns.is_empty());
        assert_eq!(sol.status, SolveStatus::Optimal);
    }

    #[test]
    fn exact_is_deterministic_and_rule_independent() {
        let m = Codebook::exhaustive(5).unwrap();
        let model = build_ip2(&m, 8, 2, UpperBound::Inactive).unwrap();
        let a = solve_exact(&model, &quick_cfg()).unwrap();
        let b = solve_exact(&model, &quick_cfg()).unwrap();
        assert_eq!(a.selected_columns, b.selected_columns);
        assert_eq!(a.node_count, b.node_count);

        for branch_rule in [BranchRule::MinPairMaxCoverage, BranchRule::FirstFree] {
            for bound_rule in [BoundRule::PairCompletion, BoundRule::BudgetSlack] {
                let cfg = SolverConfig {
                    branch_rule,
                    bound_rule,
                    ..quick_cfg()
                };
                let sol = solve_exact(&model, &cfg).unwrap();
                assert_eq!(sol.objective_value, a.objective_value, "{branch_rule:?} {bound_rule:?}");
                assert_eq!(sol.status, SolveStatus::Optimal);
            }
        }
    }

    #[test]
    fn node_limit_returns_certified_incumbent() {
        let m = Codebook::exhaustive(6).unwrap();
        let model = build_ip2(&m, 12, 2, UpperBound::Inactive).unwrap();
        let cfg = SolverConfig {
            node_limit: 50,
            ..quick_cfg()
        };
        let sol = solve_exact(&model, &cfg).unwrap();
        assert_eq!(sol.status, SolveStatus::FeasibleTimeLimit);
        assert!(sol.objective_value <= sol.best_bound);
        assert!(sol.best_bound <= bound_plotkin(6, 12));
        assert!(sol.gap > 0.0);
        assert_eq!(sol.gap_abs, sol.best_bound - sol.objective_value);
        let report = certify(&m, &sol.selected_columns, 12, 2, UpperBound::Inactive, sol.objective_value);
        assert!(report.confirmed, "{:?}", report.violations);
    }

    #[test]
    fn exact_guards_unbounded_and_config() {
        let m = Codebook::exhaustive(3).unwrap();
        let mut model = build_ip2(&m, 3, 1, UpperBound::Inactive).unwrap();
        model.constraints.retain(|c| !matches!(c.label, ConLabel::Link(..)));
        let sol = solve_exact(&model, &quick_cfg()).unwrap();
        assert_eq!(sol.status, SolveStatus::UnboundedGuard);

        let model = build_ip2(&m, 3, 1, UpperBound::Inactive).unwrap();
        let bad = SolverConfig {
            time_limit_s: 0.0,
            ..SolverConfig::default()
        };
        assert!(solve_exact(&model, &bad).is_err());
    }

    #[test]
    fn optimal_solves_record_equidistance() {
        let sol = exact_ip2(4, 7, 1, UpperBound::Inactive);
        assert_eq!(sol.objective_value, 4.0);
        assert_eq!(sol.equidistant, Some(true));

        // Two columns of exhaustive(3) leave the row pairs at (2, 1, 1).
        let sol = exact_ip2(3, 2, 1, UpperBound::Inactive);
        assert_eq!(sol.objective_value, 1.0);
        assert_eq!(sol.status, SolveStatus::Optimal);
        assert_eq!(sol.equidistant, Some(false));
    }

    fn cover_for(m: &Codebook, rho: u32) -> CliqueCover {
        edge_clique_cover(&build_graph(&classify_pairs(m, rho, UpperBound::Inactive)), 0)
    }

    #[test]
    fn local_search_saturates_small_instances() {
        let m = Codebook::exhaustive(5).unwrap();
        let oracle = brute_force(&m, 10, 1, UpperBound::Inactive).unwrap();
        let sol = solve_local_search(&m, 10, 1, &cover_for(&m, 1), &quick_cfg()).unwrap();
        assert_eq!(sol.objective_value, oracle.objective_value);
        assert_eq!(sol.objective_value, 6.0);
        assert_eq!(sol.status, SolveStatus::Optimal, "6 meets the combinatorial bound");

        let m = Codebook::exhaustive(4).unwrap();
        let sol = solve_local_search(&m, 7, 1, &cover_for(&m, 1), &quick_cfg()).unwrap();
        assert_eq!(sol.objective_value, 4.0);
        assert_eq!(sol.selected_columns, (0..7).collect::<Vec<u32>>());
    }

    #[test]
    fn local_search_single_column_budget() {
        let m = Codebook::exhaustive(2).unwrap();
        let sol = solve_local_search(&m, 1, 1, &cover_for(&m, 1), &quick_cfg()).unwrap();
        assert_eq!(sol.objective_value, 1.0);
        assert_eq!(sol.status, SolveStatus::Optimal);

        // With k=4 a single column always leaves some row pair uncovered.
        let m = Codebook::exhaustive(4).unwrap();
        let sol = solve_local_search(&m, 1, 1, &cover_for(&m, 1), &quick_cfg()).unwrap();
        assert_eq!(sol.objective_value, 0.0);
        assert_eq!(sol.selected_columns, vec![0], "ties break to the lowest index");
    }

    #[test]
    fn local_search_warns_when_conflicts_block_the_budget() {
        // rho=2 leaves column 0 conflicting with both others; a greedy start
        // at column 0 (all candidates tie at objective 0) blocks the rest.
        let m = Codebook::exhaustive(3).unwrap();
        let sol = solve_local_search(&m, 3, 2, &cover_for(&m, 2), &quick_cfg()).unwrap();
        assert_eq!(sol.status, SolveStatus::FeasibleTimeLimit);
        assert!(sol.warning.is_some());
        assert!(sol.selected_columns.len() < 3);
    }

    #[test]
    fn local_search_rejects_stale_covers() {
        let m = Codebook::exhaustive(5).unwrap();
        let wrong = cover_for(&m, 3);
        let err = solve_local_search(&m, 10, 2, &wrong, &quick_cfg()).unwrap_err();
        assert!(matches!(err, Error::InvalidCover(_)), "{err}");
    }

    #[test]
    fn certify_refutes_defects() {
        let m = Codebook::exhaustive(3).unwrap();
        let report = certify(&m, &[0, 1], 3, 2, UpperBound::Inactive, 2.0);
        assert!(!report.confirmed);
        assert!(report
            .violations
            .iter()
            .any(|v| matches!(v, CertifyViolation::SeparationViolated { i: 0, j: 1, .. })));

        let sol = brute_force(&m, 3, 1, UpperBound::Inactive).unwrap();
        let doctored = certify(&m, &sol.selected_columns, 3, 1, UpperBound::Inactive, sol.objective_value + 1.0);
        assert!(!doctored.confirmed);
        assert!(doctored
            .violations
            .iter()
            .any(|v| matches!(v, CertifyViolation::ObjectiveMismatch { .. })));

        let report = certify(&m, &[0, 0, 9], 1, 1, UpperBound::Inactive, 0.0);
        let kinds: Vec<&CertifyViolation> = report.violations.iter().collect();
        assert!(kinds.iter().any(|v| matches!(v, CertifyViolation::DuplicateColumn { column: 0 })));
        assert!(kinds.iter().any(|v| matches!(v, CertifyViolation::IndexOutOfRange { column: 9, .. })));
        assert!(kinds.iter().any(|v| matches!(v, CertifyViolation::BudgetExceeded { .. })));
    }

    #[test]
    fn solution_json_round_trip() {
        let m = Codebook::exhaustive(4).unwrap();
        let model = build_ip2(&m, 6, 2, UpperBound::Inactive).unwrap();
        let sol = solve_exact(&model, &quick_cfg()).unwrap();
        let back = DesignSolution::from_json_str(&sol.to_json_string()).unwrap();
        assert_eq!(back, sol);
        assert!(sol.to_json_string().contains("\"status\": \"optimal\""));

        let mat = sol.materialize(&m).unwrap();
        assert_eq!(mat.n_columns(), sol.selected_columns.len());
        assert_eq!(mat.metadata.objective, Some(sol.objective_value));
    }
}
