//! White-box evasion attacks on a trained pipeline: l-infinity projected
//! gradient ascent on the differentiable class scores, the single-step
//! sign-gradient special case, epsilon sweeps, and finite-difference
//! gradient checks.
//!
//! Every iterate stays inside the intersection of the epsilon ball around
//! the clean point and the dataset's per-dimension box. The attack keeps
//! the best iterate seen (preferring misclassifying ones, then higher
//! loss) and the clean point is always a candidate, so an epsilon-0
//! attack reproduces clean accuracy exactly.

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

use crate::classify::{class_score_gradients, class_scores, predict, Dataset, PredictMode, TrainedEcoc};
use crate::{derive_seed, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LossKind {
    /// Cross-entropy of the softmaxed raw class scores against the label.
    CrossEntropy,
    /// Best margin over wrong classes: `max_{i != c} (s_i - s_c)`;
    /// positive exactly when some wrong class outscores the true one.
    Margin,
}

impl fmt::Display for LossKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            LossKind::CrossEntropy => "cross-entropy",
            LossKind::Margin => "margin",
        };
        write!(f, "{s}")
    }
}

impl FromStr for LossKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "cross-entropy" => Ok(LossKind::CrossEntropy),
            "margin" => Ok(LossKind::Margin),
            _ => Err(format!("unknown loss '{s}'")),
        }
    }
}

/// Attack hyperparameters. `steps = 1` without a random start is the fast
/// gradient sign method.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AttackConfig {
    /// l-infinity radius, in feature units.
    pub epsilon: f64,
    pub steps: usize,
    /// Per-step magnitude; `None` means `2.5 * epsilon / steps`.
    pub step_size: Option<f64>,
    pub loss: LossKind,
    /// Start from a uniform point in the epsilon ball instead of the
    /// clean point.
    pub random_start: bool,
    pub seed: u64,
    /// How the attacked model's prediction is read out when deciding
    /// whether an iterate misclassifies.
    pub predict_mode: PredictMode,
}

impl Default for AttackConfig {
    fn default() -> AttackConfig {
        AttackConfig {
            epsilon: 0.1,
            steps: 100,
            step_size: None,
            loss: LossKind::CrossEntropy,
            random_start: false,
            seed: 0,
            predict_mode: PredictMode::Hamming,
        }
    }
}

impl AttackConfig {
    fn check(&self) -> Result<()> {
        let bad = |detail: String| Err(Error::invalid("attack config", detail));
        if !(self.epsilon >= 0.0 && self.epsilon.is_finite()) {
            return bad(format!("epsilon {}", self.epsilon));
        }
        if self.steps == 0 {
            return bad("zero steps".to_string());
        }
        if let Some(s) = self.step_size {
            if !(s >= 0.0 && s.is_finite()) {
                return bad(format!("step size {s}"));
            }
        }
        Ok(())
    }

    fn effective_step(&self) -> f64 {
        self.step_size.unwrap_or(2.5 * self.epsilon / self.steps as f64)
    }

    /// An oversized step cannot leave the ball (clipping catches it) but
    /// wastes iterations bouncing between faces.
    fn step_warning(&self) -> Option<String> {
        let s = self.effective_step();
        if s > self.epsilon && self.epsilon > 0.0 {
            Some(format!("step size {s} exceeds epsilon {}; iterates will clip every step", self.epsilon))
        } else {
            None
        }
    }
}

/// Outcome of attacking one example.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PerExampleAttack {
    /// The best iterate misclassifies.
    pub success: bool,
    /// l-infinity distance of the best iterate from the clean point.
    pub perturbation_norm: f64,
    /// Number of loss evaluations, clean point included.
    pub trace_len: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttackResult {
    pub config: AttackConfig,
    pub clean_accuracy: f64,
    /// Fraction of examples whose best iterate still classifies correctly.
    pub adversarial_accuracy: f64,
    pub per_example: Vec<PerExampleAttack>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub warning: Option<String>,
}

/// Attack loss at `x` for the given true label. Raw (unnormalized) class
/// scores feed both variants.
pub fn attack_loss(te: &TrainedEcoc, x: &[f64], label: u32, kind: LossKind) -> Result<f64> {
    let scores = class_scores(te, x, false)?;
    let c = label as usize;
    if c >= scores.len() {
        return Err(Error::invalid("attack", format!("label {label} outside 0..{}", scores.len())));
    }
    Ok(match kind {
        LossKind::CrossEntropy => {
            let max = scores.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let z: f64 = scores.iter().map(|&s| (s - max).exp()).sum();
            z.ln() - (scores[c] - max)
        }
        LossKind::Margin => scores
            .iter()
            .enumerate()
            .filter(|&(i, _)| i != c)
            .map(|(_, &s)| s - scores[c])
            .fold(f64::NEG_INFINITY, f64::max),
    })
}

/// Gradient of [`attack_loss`] with respect to the input. The margin loss
/// uses the subgradient of its active (lowest-index) maximizer.
pub fn attack_loss_gradient(te: &TrainedEcoc, x: &[f64], label: u32, kind: LossKind) -> Result<Vec<f64>> {
    let scores = class_scores(te, x, false)?;
    let grads = class_score_gradients(te, x, false)?;
    let c = label as usize;
    if c >= scores.len() {
        return Err(Error::invalid("attack", format!("label {label} outside 0..{}", scores.len())));
    }
    match kind {
        LossKind::CrossEntropy => {
            let max = scores.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let exps: Vec<f64> = scores.iter().map(|&s| (s - max).exp()).collect();
            let z: f64 = exps.iter().sum();
            let mut g = vec![0.0; x.len()];
            for (i, gi) in grads.iter().enumerate() {
                let weight = exps[i] / z - f64::from(u8::from(i == c));
                for (a, &b) in g.iter_mut().zip(gi) {
                    *a += weight * b;
                }
            }
            Ok(g)
        }
        LossKind::Margin => {
            let best = scores
                .iter()
                .enumerate()
                .filter(|&(i, _)| i != c)
                .fold((f64::NEG_INFINITY, 0), |acc, (i, &s)| if s > acc.0 { (s, i) } else { acc })
                .1;
            Ok(grads[best].iter().zip(&grads[c]).map(|(a, b)| a - b).collect())
        }
    }
}

/// Projects `x` onto the epsilon ball around `origin` intersected with
/// the per-dimension box.
fn clip_to_ball(x: &mut [f64], origin: &[f64], epsilon: f64, bounds: &[(f64, f64)]) {
    for ((v, &o), &(lo, hi)) in x.iter_mut().zip(origin).zip(bounds) {
        *v = v.clamp((o - epsilon).max(lo), (o + epsilon).min(hi));
    }
}

fn linf(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

struct ExampleOutcome {
    success: bool,
    point: Vec<f64>,
    norm: f64,
    trace_len: usize,
}

/// Drives gradient ascent for one example. `carried` is an optional
/// feasible candidate from an earlier, smaller-radius attack.
fn attack_example(
    te: &TrainedEcoc,
    x0: &[f64],
    label: u32,
    cfg: &AttackConfig,
    bounds: &[(f64, f64)],
    seed: u64,
    carried: Option<&[f64]>,
) -> Result<ExampleOutcome> {
    let step = cfg.effective_step();
    // (misclassifies, loss), ordered lexicographically; the clean point
    // opens the race so the attack can never do worse than no attack.
    let mut evals = 0usize;
    let consider = |point: &[f64], best: &mut (bool, f64, Vec<f64>), evals: &mut usize| -> Result<()> {
        let loss = attack_loss(te, point, label, cfg.loss)?;
        *evals += 1;
        let success = predict(te, point, cfg.predict_mode)? != label;
        if (success, loss) > (best.0, best.1) {
            *best = (success, loss, point.to_vec());
        }
        Ok(())
    };
    let mut best = (false, f64::NEG_INFINITY, x0.to_vec());
    consider(x0, &mut best, &mut evals)?;
    if let Some(c) = carried {
        debug_assert!(linf(c, x0) <= cfg.epsilon + 1e-9);
        consider(c, &mut best, &mut evals)?;
    }
    let mut x = x0.to_vec();
    if cfg.random_start && cfg.epsilon > 0.0 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for v in x.iter_mut() {
            *v += rng.random_range(-cfg.epsilon..=cfg.epsilon);
        }
        clip_to_ball(&mut x, x0, cfg.epsilon, bounds);
        consider(&x, &mut best, &mut evals)?;
    }
    for _ in 0..cfg.steps {
        let g = attack_loss_gradient(te, &x, label, cfg.loss)?;
        for (v, gi) in x.iter_mut().zip(&g) {
            *v += step * gi.signum();
        }
        clip_to_ball(&mut x, x0, cfg.epsilon, bounds);
        for (j, (&v, &o)) in x.iter().zip(x0).enumerate() {
            assert!(
                (v - o).abs() <= cfg.epsilon + 1e-12 && v >= bounds[j].0 && v <= bounds[j].1,
                "iterate escaped the feasible box"
            );
        }
        consider(&x, &mut best, &mut evals)?;
    }
    let norm = linf(&best.2, x0);
    Ok(ExampleOutcome {
        success: best.0,
        point: best.2,
        norm,
        trace_len: evals,
    })
}

fn check_differentiable(te: &TrainedEcoc) -> Result<()> {
    let probe = vec![0.0; te.input_dim()];
    for (l, h) in te.hypotheses.iter().enumerate() {
        if h.gradient(&probe).is_none() {
            return Err(Error::NoGradient {
                column: l,
                kind: "nearest-centroid",
            });
        }
    }
    Ok(())
}

fn attack_all(
    te: &TrainedEcoc,
    ds: &Dataset,
    cfg: &AttackConfig,
    carried: Option<&[Option<Vec<f64>>]>,
) -> Result<Vec<ExampleOutcome>> {
    (0..ds.n())
        .into_par_iter()
        .map(|i| {
            let prior = carried.and_then(|c| c[i].as_deref());
            attack_example(
                te,
                ds.row(i),
                ds.label(i),
                cfg,
                ds.bounds(),
                derive_seed(cfg.seed, "example", i as u64),
                prior,
            )
        })
        .collect()
}

fn summarize(te: &TrainedEcoc, ds: &Dataset, cfg: &AttackConfig, outcomes: &[ExampleOutcome]) -> Result<AttackResult> {
    let clean = crate::classify::accuracy(te, ds, cfg.predict_mode)?;
    let robust = outcomes.iter().filter(|o| !o.success).count();
    Ok(AttackResult {
        config: *cfg,
        clean_accuracy: clean,
        adversarial_accuracy: robust as f64 / outcomes.len() as f64,
        per_example: outcomes
            .iter()
            .map(|o| PerExampleAttack {
                success: o.success,
                perturbation_norm: o.norm,
                trace_len: o.trace_len,
            })
            .collect(),
        warning: cfg.step_warning(),
    })
}

/// Projected gradient attack on every example of `ds`. Per-example work
/// is independent and runs in parallel; each example derives its own seed,
/// so results equal the sequential ones.
pub fn pgd_attack(te: &TrainedEcoc, ds: &Dataset, cfg: &AttackConfig) -> Result<AttackResult> {
    cfg.check()?;
    check_differentiable(te)?;
    let outcomes = attack_all(te, ds, cfg, None)?;
    summarize(te, ds, cfg, &outcomes)
}

/// Single sign-gradient step of size `epsilon` from the clean point.
pub fn fgsm(te: &TrainedEcoc, ds: &Dataset, epsilon: f64) -> Result<AttackResult> {
    let cfg = AttackConfig {
        epsilon,
        steps: 1,
        step_size: Some(epsilon),
        random_start: false,
        ..AttackConfig::default()
    };
    pgd_attack(te, ds, &cfg)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub epsilon: f64,
    pub adversarial_accuracy: f64,
    pub successes: usize,
}

/// One attack per radius over an increasing epsilon list.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub config: AttackConfig,
    pub clean_accuracy: f64,
    pub n_examples: usize,
    pub rows: Vec<SweepRow>,
}

/// Runs the attack at each radius in ascending order. Successful
/// adversarial points carry forward as candidates for every larger
/// radius (they stay feasible), which makes adversarial accuracy
/// non-increasing in epsilon by construction rather than by luck.
pub fn pgd_sweep(te: &TrainedEcoc, ds: &Dataset, cfg: &AttackConfig, epsilons: &[f64]) -> Result<SweepReport> {
    if epsilons.is_empty() {
        return Err(Error::invalid("attack sweep", "empty epsilon list".to_string()));
    }
    for w in epsilons.windows(2) {
        if !(w[0] < w[1]) {
            return Err(Error::invalid(
                "attack sweep",
                format!("epsilons must increase strictly, got {} then {}", w[0], w[1]),
            ));
        }
    }
    if epsilons[0] < 0.0 {
        return Err(Error::invalid("attack sweep", format!("negative epsilon {}", epsilons[0])));
    }
    check_differentiable(te)?;
    let mut carried: Vec<Option<Vec<f64>>> = vec![None; ds.n()];
    let mut rows = Vec::with_capacity(epsilons.len());
    for (idx, &epsilon) in epsilons.iter().enumerate() {
        let stage = AttackConfig {
            epsilon,
            seed: derive_seed(cfg.seed, "sweep-stage", idx as u64),
            ..*cfg
        };
        stage.check()?;
        let outcomes = attack_all(te, ds, &stage, Some(&carried))?;
        let successes = outcomes.iter().filter(|o| o.success).count();
        rows.push(SweepRow {
            epsilon,
            adversarial_accuracy: (ds.n() - successes) as f64 / ds.n() as f64,
            successes,
        });
        for (slot, outcome) in carried.iter_mut().zip(outcomes) {
            if outcome.success {
                *slot = Some(outcome.point);
            }
        }
    }
    Ok(SweepReport {
        config: *cfg,
        clean_accuracy: crate::classify::accuracy(te, ds, cfg.predict_mode)?,
        n_examples: ds.n(),
        rows,
    })
}

/// Result of comparing an analytic gradient with central differences.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GradientCheckReport {
    pub tol: f64,
    pub max_rel_error: f64,
    pub pass: bool,
    /// Worst relative error per assumed true label.
    pub per_label: Vec<f64>,
}

/// Relative error between two gradients, dimension-wise, normalized by
/// `max(1, |numeric|)` so tiny components do not blow up the ratio.
pub fn compare_gradients(analytic: &[f64], numeric: &[f64]) -> f64 {
    analytic
        .iter()
        .zip(numeric)
        .map(|(&a, &n)| (a - n).abs() / f64::max(1.0, n.abs()))
        .fold(0.0, f64::max)
}

/// Checks the analytic cross-entropy loss gradient at `x` against central
/// finite differences, once per possible true label. Failure is data, not
/// an error.
pub fn gradient_check(te: &TrainedEcoc, x: &[f64], tol: f64) -> Result<GradientCheckReport> {
    check_differentiable(te)?;
    const H: f64 = 1e-5;
    let k = te.codebook.k();
    let mut per_label = Vec::with_capacity(k);
    for label in 0..k as u32 {
        let analytic = attack_loss_gradient(te, x, label, LossKind::CrossEntropy)?;
        let mut numeric = vec![0.0; x.len()];
        for j in 0..x.len() {
            let mut xp = x.to_vec();
            let mut xm = x.to_vec();
            xp[j] += H;
            xm[j] -= H;
            numeric[j] = (attack_loss(te, &xp, label, LossKind::CrossEntropy)?
                - attack_loss(te, &xm, label, LossKind::CrossEntropy)?)
                / (2.0 * H);
        }
        per_label.push(compare_gradients(&analytic, &numeric));
    }
    let max_rel_error = per_label.iter().cloned().fold(0.0, f64::max);
    Ok(GradientCheckReport {
        tol,
        max_rel_error,
        pass: max_rel_error < tol,
        per_label,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classify::{
        make_gaussian_toy, train, BinaryLearnerSpec, Hypothesis, LearnerKind,
    };
    use crate::codebook::{Alphabet, Codebook};

    fn toy_model(k: usize, sigma: f64) -> (TrainedEcoc, Dataset) {
        let ds = make_gaussian_toy(k, 40, 5, 4.0, sigma).unwrap();
        let m = Codebook::one_vs_all(k).unwrap();
        let te = train(&ds, &m, &BinaryLearnerSpec::default(), 13).unwrap();
        (te, ds)
    }

    #[test]
    fn config_validation_and_step_warning() {
        let mut cfg = AttackConfig::default();
        cfg.epsilon = -0.1;
        assert!(pgd_attack(&toy_model(3, 0.5).0, &toy_model(3, 0.5).1, &cfg).is_err());
        let (te, ds) = toy_model(3, 0.5);
        let cfg = AttackConfig {
            epsilon: 0.1,
            steps: 2,
            step_size: Some(0.5),
            ..AttackConfig::default()
        };
        let r = pgd_attack(&te, &ds, &cfg).unwrap();
        assert!(r.warning.as_deref().unwrap().contains("exceeds epsilon"));
        let quiet = pgd_attack(
            &te,
            &ds,
            &AttackConfig {
                epsilon: 0.1,
                ..AttackConfig::default()
            },
        )
        .unwrap();
        assert!(quiet.warning.is_none());
    }

    #[test]
    fn zero_epsilon_reproduces_clean_accuracy() {
        let (te, ds) = toy_model(4, 0.8);
        for random_start in [false, true] {
            let cfg = AttackConfig {
                epsilon: 0.0,
                steps: 5,
                random_start,
                ..AttackConfig::default()
            };
            let r = pgd_attack(&te, &ds, &cfg).unwrap();
            assert_eq!(r.adversarial_accuracy, r.clean_accuracy, "random_start={random_start}");
            assert!(r.per_example.iter().all(|p| p.perturbation_norm == 0.0));
        }
    }

    #[test]
    fn attack_degrades_accuracy_within_the_ball() {
        let (te, ds) = toy_model(4, 0.6);
        let cfg = AttackConfig {
            epsilon: 1.5,
            steps: 30,
            ..AttackConfig::default()
        };
        let r = pgd_attack(&te, &ds, &cfg).unwrap();
        assert!(r.clean_accuracy > 0.9, "sanity: model fits the toy task");
        assert!(
            r.adversarial_accuracy < r.clean_accuracy - 0.2,
            "clean {} adversarial {}",
            r.clean_accuracy,
            r.adversarial_accuracy
        );
        for p in &r.per_example {
            assert!(p.perturbation_norm <= cfg.epsilon + 1e-9);
            assert!(p.trace_len >= 31, "clean point plus every step");
        }
    }

    #[test]
    fn sweep_is_monotone_and_anchored_at_clean() {
        let (te, ds) = toy_model(4, 0.6);
        let cfg = AttackConfig {
            steps: 20,
            ..AttackConfig::default()
        };
        let report = pgd_sweep(&te, &ds, &cfg, &[0.0, 0.05, 0.1, 0.2, 1.0]).unwrap();
        assert_eq!(report.rows[0].adversarial_accuracy, report.clean_accuracy);
        for w in report.rows.windows(2) {
            assert!(
                w[1].adversarial_accuracy <= w[0].adversarial_accuracy,
                "{} then {}",
                w[0].adversarial_accuracy,
                w[1].adversarial_accuracy
            );
        }
        assert!(pgd_sweep(&te, &ds, &cfg, &[0.1, 0.1]).is_err(), "not strictly increasing");
        assert!(pgd_sweep(&te, &ds, &cfg, &[]).is_err());
    }

    #[test]
    fn single_step_attack_is_weaker_than_iterated() {
        let (te, ds) = toy_model(4, 0.6);
        let eps = 1.0;
        let weak = fgsm(&te, &ds, eps).unwrap();
        assert_eq!(weak.config.steps, 1);
        let strong = pgd_attack(
            &te,
            &ds,
            &AttackConfig {
                epsilon: eps,
                steps: 40,
                ..AttackConfig::default()
            },
        )
        .unwrap();
        assert!(
            weak.adversarial_accuracy >= strong.adversarial_accuracy,
            "fgsm {} pgd {}",
            weak.adversarial_accuracy,
            strong.adversarial_accuracy
        );
    }

    #[test]
    fn more_steps_never_weaken_the_attack_at_fixed_step_size() {
        let (te, ds) = toy_model(5, 0.8);
        let run = |steps| {
            pgd_attack(
                &te,
                &ds,
                &AttackConfig {
                    epsilon: 0.8,
                    steps,
                    step_size: Some(0.05),
                    ..AttackConfig::default()
                },
            )
            .unwrap()
            .adversarial_accuracy
        };
        assert!(run(25) <= run(5), "shared trajectory prefix plus best-so-far");
    }

    #[test]
    fn attacks_are_deterministic_given_the_seed() {
        let (te, ds) = toy_model(3, 0.7);
        let cfg = AttackConfig {
            epsilon: 0.5,
            steps: 15,
            random_start: true,
            seed: 41,
            ..AttackConfig::default()
        };
        let a = pgd_attack(&te, &ds, &cfg).unwrap();
        let b = pgd_attack(&te, &ds, &cfg).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn centroid_models_are_rejected() {
        let ds = make_gaussian_toy(3, 10, 2, 4.0, 0.5).unwrap();
        let spec = BinaryLearnerSpec {
            kind: LearnerKind::NearestCentroid,
            ..BinaryLearnerSpec::default()
        };
        let te = train(&ds, &Codebook::one_vs_all(3).unwrap(), &spec, 0).unwrap();
        let err = pgd_attack(&te, &ds, &AttackConfig::default()).unwrap_err();
        assert!(matches!(err, Error::NoGradient { .. }), "{err}");
        assert!(gradient_check(&te, ds.row(0), 1e-4).is_err());
    }

    #[test]
    fn single_logit_margin_fgsm_hits_the_box_optimum() {
        // One column, k=2: the margin loss is monotone in the linear logit
        // w.x + b, so its worst case over the ball (box slack left wide by
        // sentinel rows) is the corner x - eps*sign(w) for label 0, and one
        // sign step lands there exactly.
        let m = Codebook::from_rows(vec![vec![1], vec![-1]], Alphabet::Binary).unwrap();
        let w = [2.0, -1.0];
        let te = TrainedEcoc {
            codebook: m,
            hypotheses: vec![Hypothesis::Logistic {
                weights: w.to_vec(),
                bias: 0.3,
            }],
            spec: BinaryLearnerSpec::default(),
        };
        let features = vec![
            vec![1.0, 0.5],
            vec![-0.4, 0.2],
            vec![10.0, 10.0],
            vec![-10.0, -10.0],
        ];
        let ds = Dataset::new(features, vec![0, 0, 0, 1], 2).unwrap();
        let eps = 0.25;
        let cfg = AttackConfig {
            epsilon: eps,
            steps: 1,
            step_size: Some(eps),
            loss: LossKind::Margin,
            ..AttackConfig::default()
        };
        for i in 0..2 {
            let x0 = ds.row(i);
            let out = attack_example(&te, x0, 0, &cfg, ds.bounds(), 0, None).unwrap();
            let corner: Vec<f64> = x0.iter().zip(&w).map(|(&v, &wj)| v - eps * wj.signum()).collect();
            for (a, b) in out.point.iter().zip(&corner) {
                assert!((a - b).abs() < 1e-12, "{:?} vs {corner:?}", out.point);
            }
            let sigma = |t: f64| 1.0 / (1.0 + (-t).exp());
            let worst_logit = x0.iter().zip(&w).map(|(&v, &wj)| v * wj).sum::<f64>() + 0.3
                - eps * w.iter().map(|v| v.abs()).sum::<f64>();
            let expected = 1.0 - 2.0 * sigma(worst_logit);
            let achieved = attack_loss(&te, &out.point, 0, LossKind::Margin).unwrap();
            assert!((achieved - expected).abs() < 1e-9, "{achieved} vs {expected}");
        }
    }

    #[test]
    fn gradient_check_accepts_real_gradients_and_rejects_corrupted_ones() {
        let ds = make_gaussian_toy(3, 30, 9, 4.0, 0.7).unwrap();
        for kind in [LearnerKind::Logistic, LearnerKind::RbfFeaturesLogistic] {
            let spec = BinaryLearnerSpec {
                kind,
                n_features: 20,
                epochs: 40,
                ..BinaryLearnerSpec::default()
            };
            let te = train(&ds, &Codebook::exhaustive(3).unwrap(), &spec, 6).unwrap();
            let report = gradient_check(&te, &[0.7, -1.3], 1e-4).unwrap();
            assert!(report.pass, "{kind}: max rel error {}", report.max_rel_error);
            assert_eq!(report.per_label.len(), 3);

            let mut corrupted = attack_loss_gradient(&te, &[0.7, -1.3], 0, LossKind::CrossEntropy).unwrap();
            let numeric = corrupted.clone();
            corrupted[0] += 0.1;
            assert!(compare_gradients(&corrupted, &numeric) > 1e-4);
        }
    }

    #[test]
    fn constant_scorers_have_zero_gradient_both_ways() {
        let te = TrainedEcoc {
            codebook: Codebook::exhaustive(3).unwrap(),
            hypotheses: (0..3)
                .map(|i| Hypothesis::Logistic {
                    weights: vec![0.0, 0.0],
                    bias: 0.1 * f64::from(i),
                })
                .collect(),
            spec: BinaryLearnerSpec::default(),
        };
        let report = gradient_check(&te, &[2.0, -3.0], 1e-4).unwrap();
        assert!(report.pass);
        assert_eq!(report.max_rel_error, 0.0);
    }

    #[test]
    fn margin_loss_sign_tracks_misclassification() {
        let (te, ds) = toy_model(3, 0.4);
        for i in 0..ds.n() {
            let x = ds.row(i);
            let margin = attack_loss(&te, x, ds.label(i), LossKind::Margin).unwrap();
            let predicted = predict(&te, x, PredictMode::ScoresRaw).unwrap();
            if margin < 0.0 {
                assert_eq!(predicted, ds.label(i), "negative margin means the true class leads");
            }
        }
    }

    #[test]
    fn attack_result_json_round_trips() {
        let (te, ds) = toy_model(3, 0.6);
        let r = pgd_attack(
            &te,
            &ds,
            &AttackConfig {
                epsilon: 0.3,
                steps: 5,
                ..AttackConfig::default()
            },
        )
        .unwrap();
        let text = serde_json::to_string_pretty(&r).unwrap();
        let back: AttackResult = serde_json::from_str(&text).unwrap();
        assert_eq!(back, r);
        let sweep = pgd_sweep(&te, &ds, &AttackConfig { steps: 4, ..AttackConfig::default() }, &[0.0, 0.1]).unwrap();
        let text = serde_json::to_string(&sweep).unwrap();
        assert_eq!(serde_json::from_str::<SweepReport>(&text).unwrap(), sweep);
    }
}
