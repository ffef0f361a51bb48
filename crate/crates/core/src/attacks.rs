//! Reference membership-inference attacks and the membership-inference
//! game.
//!
//! All five attacks reduce to a per-example real score where higher means
//! "more likely a member"; evaluation sweeps thresholds downstream. The
//! game simulator turns score attacks into bit-guessing adversaries and
//! estimates their advantage (TPR − FPR) by Monte Carlo over fresh
//! trainings.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;
use core::fmt;

#[cfg(not(feature = "std"))]
use num_traits::Float;
use rand::Rng;

use crate::learner::{
    self, modified_entropy, EvalError, LearnerConfig, TrainError, TrainedModel,
};
use crate::seed::{self, role};
use crate::selection;
use crate::shadowlab::{HarnessOutput, Phi, ShadowStats, SIGMA_FLOOR};
use crate::synthdata::{Dataset, Group, LabeledExample};

/// The attack that produced a score; doubles as the report label.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum AttackKind {
    Yeom,
    Shokri,
    Song,
    Sablayrolles,
    Lira,
}

impl AttackKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            AttackKind::Yeom => "yeom",
            AttackKind::Shokri => "shokri",
            AttackKind::Song => "song",
            AttackKind::Sablayrolles => "sablayrolles",
            AttackKind::Lira => "lira",
        }
    }
}

impl fmt::Display for AttackKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A membership score for one example; higher means more likely a member.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct AttackScore {
    pub example_id: u64,
    pub score: f64,
    pub attack: AttackKind,
}

#[derive(Clone, Debug, PartialEq)]
pub enum AttackError {
    Eval(EvalError),
    Train(TrainError),
    MissingCalibration { class: usize },
    MissingShadowStats { target_id: u64 },
    DegenerateTraining,
    NonFiniteScore,
    TargetMissing(u64),
    ZeroTrials,
}

impl fmt::Display for AttackError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AttackError::Eval(e) => write!(f, "model evaluation failed: {e}"),
            AttackError::Train(e) => write!(f, "attack-model training failed: {e}"),
            AttackError::MissingCalibration { class } => {
                write!(f, "no entropy calibration for class {class}")
            }
            AttackError::MissingShadowStats { target_id } => {
                write!(f, "no shadow statistics for target {target_id}")
            }
            AttackError::DegenerateTraining => {
                write!(f, "attack training set contains a single class")
            }
            AttackError::NonFiniteScore => write!(f, "adversary function produced a non-finite value"),
            AttackError::TargetMissing(id) => write!(f, "target id {id} not in dataset"),
            AttackError::ZeroTrials => write!(f, "at least one trial required"),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for AttackError {}

impl From<EvalError> for AttackError {
    fn from(e: EvalError) -> Self {
        AttackError::Eval(e)
    }
}

impl From<TrainError> for AttackError {
    fn from(e: TrainError) -> Self {
        AttackError::Train(e)
    }
}

/// Loss thresholding: score = −loss, so members (low loss) rank high.
pub fn yeom_score(model: &TrainedModel, example: &LabeledExample) -> Result<AttackScore, AttackError> {
    Ok(AttackScore {
        example_id: example.id,
        score: -model.loss(example)?,
        attack: AttackKind::Yeom,
    })
}

/// Attack-model input for the Shokri attack: softmax vector concatenated
/// with the one-hot true label.
pub fn shokri_features(model: &TrainedModel, example: &LabeledExample) -> Result<Vec<f64>, AttackError> {
    let mut f = model.probabilities(&example.features)?;
    let classes = model.num_classes;
    f.extend((0..classes).map(|c| f64::from(c == example.label)));
    Ok(f)
}

/// Train a member/non-member classifier on shadow features and score the
/// victims with its member-class probability.
///
/// `shadow` pairs a feature vector with its membership bit; one attack
/// network serves all classes (the label is part of the features).
pub fn shokri_attack(
    shadow: &[(Vec<f64>, bool)],
    victims: &[(u64, Vec<f64>)],
    config: &LearnerConfig,
) -> Result<Vec<AttackScore>, AttackError> {
    if shadow.is_empty() || shadow.iter().all(|(_, m)| *m) || shadow.iter().all(|(_, m)| !*m) {
        return Err(AttackError::DegenerateTraining);
    }
    let dim = shadow[0].0.len();
    let train_set = Dataset {
        examples: shadow
            .iter()
            .enumerate()
            .map(|(i, (features, member))| LabeledExample {
                id: i as u64,
                features: features.clone(),
                label: usize::from(*member),
                group: Group::Over,
            })
            .collect(),
        num_classes: 2,
        dim,
        provenance: alloc::string::String::from("shokri attack features"),
    };
    let attack_model = learner::train(&train_set, config)?;
    victims
        .iter()
        .map(|(id, features)| {
            let p_member = attack_model.probabilities(features)?[1];
            Ok(AttackScore { example_id: *id, score: p_member, attack: AttackKind::Shokri })
        })
        .collect()
}

/// Per-class calibration of the modified-entropy statistic over
/// OUT-shadow models.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ClassEntropyStats {
    pub mean: f64,
    pub std: f64,
}

/// Pool the harness's OUT-model modified entropies by target class.
pub fn song_calibration(
    harness: &HarnessOutput,
    dataset: &Dataset,
) -> BTreeMap<usize, ClassEntropyStats> {
    let mut by_class: BTreeMap<usize, Vec<f64>> = BTreeMap::new();
    for (id, aux) in &harness.aux {
        if let Some(ex) = dataset.example(*id) {
            by_class.entry(ex.label).or_default().extend(&aux.mentr_out);
        }
    }
    by_class
        .into_iter()
        .map(|(class, vals)| {
            let n = vals.len() as f64;
            let mean = vals.iter().sum::<f64>() / n;
            let var = vals.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
            (class, ClassEntropyStats { mean, std: var.sqrt().max(SIGMA_FLOOR) })
        })
        .collect()
}

/// Entropy-calibrated score: −(Mentr − class OUT mean) / class OUT std.
/// Lower entropy than the non-member baseline for its class ranks higher.
pub fn song_score(
    model: &TrainedModel,
    example: &LabeledExample,
    calibration: &BTreeMap<usize, ClassEntropyStats>,
) -> Result<AttackScore, AttackError> {
    let stats = calibration
        .get(&example.label)
        .ok_or(AttackError::MissingCalibration { class: example.label })?;
    let probs = model.probabilities(&example.features)?;
    let mentr = modified_entropy(&probs, example.label);
    Ok(AttackScore {
        example_id: example.id,
        score: -(mentr - stats.mean) / stats.std,
        attack: AttackKind::Song,
    })
}

/// How the per-sample hardness threshold τ(z) summarizes OUT losses.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum TauRule {
    #[default]
    Mean,
    Median,
}

/// Per-sample hardness threshold from the harness's OUT-model losses.
pub fn hardness_threshold(losses_out: &[f64], rule: TauRule) -> f64 {
    match rule {
        TauRule::Mean => losses_out.iter().sum::<f64>() / losses_out.len().max(1) as f64,
        TauRule::Median => {
            let mut sorted = losses_out.to_vec();
            sorted.sort_by(f64::total_cmp);
            let n = sorted.len();
            if n == 0 {
                0.0
            } else if n % 2 == 1 {
                sorted[n / 2]
            } else {
                0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
            }
        }
    }
}

/// Hardness-calibrated loss score: τ(z) − loss(θ, z).
pub fn sablayrolles_score(
    model: &TrainedModel,
    example: &LabeledExample,
    tau: f64,
) -> Result<AttackScore, AttackError> {
    Ok(AttackScore {
        example_id: example.id,
        score: tau - model.loss(example)?,
        attack: AttackKind::Sablayrolles,
    })
}

fn normal_logpdf(x: f64, mu: f64, sigma: f64) -> f64 {
    let z = (x - mu) / sigma;
    -0.5 * z * z - sigma.ln() - 0.5 * (2.0 * core::f64::consts::PI).ln()
}

/// Log likelihood ratio of a φ-transformed confidence under the fitted
/// IN and OUT Gaussians.
pub fn lira_log_ratio(conf: f64, stats: &ShadowStats) -> f64 {
    normal_logpdf(conf, stats.mu_in, stats.sigma_in)
        - normal_logpdf(conf, stats.mu_out, stats.sigma_out)
}

/// The likelihood-ratio attack: score = log Λ at the observed confidence.
pub fn lira_score(
    model: &TrainedModel,
    example: &LabeledExample,
    stats: &ShadowStats,
    phi: Phi,
) -> Result<AttackScore, AttackError> {
    let conf = phi.apply(model.true_class_prob(example)?);
    Ok(AttackScore {
        example_id: example.id,
        score: lira_log_ratio(conf, stats),
        attack: AttackKind::Lira,
    })
}

/// The indicator adversary: guess "member" exactly when the model labels
/// the point correctly. Its expected game advantage is the memorization
/// score of the point.
pub fn indicator_adversary(model: &TrainedModel, example: &LabeledExample) -> Result<bool, AttackError> {
    Ok(model.predict(&example.features)? == example.label)
}

/// Adversaries available to the game simulator.
///
/// `LossGap` and `OodGap` are randomized bounded-function adversaries:
/// they output "member" with probability g(θ, z) where g is the clamped
/// complementary loss or the max-softmax confidence. `Lira` thresholds
/// the log likelihood ratio against shadow-fitted Gaussians.
#[derive(Clone, Debug, PartialEq)]
pub enum Adversary {
    /// Ignores the model; advantage 0 in expectation.
    FairCoin,
    Indicator,
    LossGap { cap: f64 },
    OodGap,
    Lira { mu_in: f64, sigma_in: f64, mu_out: f64, sigma_out: f64, phi: Phi, threshold: f64 },
}

impl Adversary {
    fn guess_member<R: Rng>(
        &self,
        model: &TrainedModel,
        example: &LabeledExample,
        rng: &mut R,
    ) -> Result<bool, AttackError> {
        Ok(match self {
            Adversary::FairCoin => rng.gen::<bool>(),
            Adversary::Indicator => indicator_adversary(model, example)?,
            Adversary::LossGap { cap } => {
                let g = 1.0 - (model.loss(example)? / cap).clamp(0.0, 1.0);
                rng.gen::<f64>() < g
            }
            Adversary::OodGap => {
                let g = 1.0 - selection::msp_ood_score(model, &example.features)?;
                rng.gen::<f64>() < g
            }
            Adversary::Lira { mu_in, sigma_in, mu_out, sigma_out, phi, threshold } => {
                let conf = phi.apply(model.true_class_prob(example)?);
                let ratio = normal_logpdf(conf, *mu_in, *sigma_in)
                    - normal_logpdf(conf, *mu_out, *sigma_out);
                ratio >= *threshold
            }
        })
    }
}

/// One membership-inference game: the dataset is fixed by the caller (the
/// strong variant where the adversary knows S), the target is one of its
/// points.
#[derive(Clone, Debug)]
pub struct GameConfig<'a> {
    pub trials: usize,
    pub adversary: Adversary,
    pub dataset: &'a Dataset,
    pub target_id: u64,
    pub learner: LearnerConfig,
    pub seed: u64,
}

/// Monte-Carlo estimate of the adversary's advantage.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct GameResult {
    pub advantage_estimate: f64,
    pub std_error: f64,
    pub trials: usize,
}

/// Play the game `trials` times: flip the challenge bit, train on S or
/// S ∪ {z}, let the adversary guess, and estimate
/// Pr(guess "out" | out) − Pr(guess "out" | in), i.e. TPR − FPR.
pub fn play_mi_game(config: &GameConfig<'_>) -> Result<GameResult, AttackError> {
    if config.trials == 0 {
        return Err(AttackError::ZeroTrials);
    }
    let target = config
        .dataset
        .example(config.target_id)
        .ok_or(AttackError::TargetMissing(config.target_id))?
        .clone();
    let with_target = config.dataset.clone();
    let without_target = config.dataset.without_example(config.target_id);

    // counts[world][guess] over worlds 0 = excluded, 1 = included.
    let mut n = [0usize; 2];
    let mut guessed_out = [0usize; 2];
    for t in 0..config.trials {
        let trial_seed = seed::mix(&[config.seed, role::GAME_TRIAL, t as u64]);
        let mut rng = seed::rng_from(trial_seed);
        let included = rng.gen::<bool>();
        let train_set = if included { &with_target } else { &without_target };
        let learner_cfg = config.learner.with_seed(seed::mix(&[trial_seed, role::LEARNER_IN]));
        let model = learner::train(train_set, &learner_cfg)?;
        let member_guess = config.adversary.guess_member(&model, &target, &mut rng)?;
        let world = usize::from(included);
        n[world] += 1;
        if !member_guess {
            guessed_out[world] += 1;
        }
    }
    let p = |w: usize| {
        if n[w] == 0 {
            0.0
        } else {
            guessed_out[w] as f64 / n[w] as f64
        }
    };
    let var = |w: usize| {
        if n[w] == 0 {
            0.0
        } else {
            p(w) * (1.0 - p(w)) / n[w] as f64
        }
    };
    Ok(GameResult {
        advantage_estimate: p(0) - p(1),
        std_error: (var(0) + var(1)).sqrt(),
        trials: config.trials,
    })
}

/// Monte-Carlo estimate of the bounded-function gap
/// E_{θ∼L(S∪{z})}[g(θ,z)] − E_{θ∼L(S)}[g(θ,z)], with paired trainings per
/// trial. Returns (gap, standard error of the paired differences).
pub fn bounded_g_gap(
    g: &dyn Fn(&TrainedModel, &LabeledExample) -> f64,
    dataset: &Dataset,
    target_id: u64,
    learner: &LearnerConfig,
    trials: usize,
    seed_value: u64,
) -> Result<(f64, f64), AttackError> {
    if trials == 0 {
        return Err(AttackError::ZeroTrials);
    }
    let target = dataset
        .example(target_id)
        .ok_or(AttackError::TargetMissing(target_id))?
        .clone();
    let with_target = dataset.clone();
    let without_target = dataset.without_example(target_id);
    let mut diffs = Vec::with_capacity(trials);
    for t in 0..trials {
        let cfg = learner.with_seed(seed::mix(&[seed_value, role::GAME_TRIAL, t as u64]));
        let model_in = learner::train(&with_target, &cfg)?;
        let model_out = learner::train(&without_target, &cfg)?;
        let v_in = g(&model_in, &target);
        let v_out = g(&model_out, &target);
        if !v_in.is_finite() || !v_out.is_finite() {
            return Err(AttackError::NonFiniteScore);
        }
        diffs.push(v_in - v_out);
    }
    let n = trials as f64;
    let gap = diffs.iter().sum::<f64>() / n;
    let var = diffs.iter().map(|d| (d - gap) * (d - gap)).sum::<f64>() / n;
    Ok((gap, (var / n).sqrt()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::learner::LearnerArch;
    use crate::synthdata::{generate, GroupGenerator, MixtureSpec};

    fn blob_model(seed: u64) -> (Dataset, TrainedModel) {
        let over = GroupGenerator::random_blobs(4, 2, 4.0, 0.8, seed);
        let under = GroupGenerator::covariate_from(&over, 1.0, 1.0, seed);
        let ds = generate(&MixtureSpec {
            alpha: 1.0,
            over_gen: over,
            under_gen: under,
            examples_per_class: 20,
            planted_singletons: 0,
            seed,
        })
        .unwrap();
        let cfg = LearnerConfig {
            arch: LearnerArch::LogisticRegression,
            epochs: 30,
            learning_rate: 0.5,
            batch_size: 16,
            l2: 0.0,
            seed,
        };
        let model = learner::train(&ds, &cfg).unwrap();
        (ds, model)
    }

    fn stats(mu_in: f64, sigma_in: f64, mu_out: f64, sigma_out: f64) -> ShadowStats {
        ShadowStats {
            target_id: 0,
            m: 2,
            confs_in: alloc::vec![mu_in; 2],
            confs_out: alloc::vec![mu_out; 2],
            correct_in: 2,
            correct_out: 0,
            mu_in,
            mu_out,
            sigma_in,
            sigma_out,
        }
    }

    #[test]
    fn yeom_is_negated_loss() {
        let (ds, model) = blob_model(1);
        let ex = &ds.examples[0];
        let s = yeom_score(&model, ex).unwrap();
        assert_eq!(s.score, -model.loss(ex).unwrap());
        // Strictly lower loss means strictly higher score.
        let (l1, l2) = (0.3f64, 0.7f64);
        assert!(-l1 > -l2);
    }

    #[test]
    fn yeom_uniform_model_scores_ln_c() {
        let (ds, mut model) = blob_model(2);
        let zeros = alloc::vec![0.0; model.weights_flat().len()];
        model.set_weights_flat(&zeros);
        let s = yeom_score(&model, &ds.examples[3]).unwrap();
        assert!((s.score - -(ds.num_classes as f64).ln()).abs() < 1e-9);
    }

    #[test]
    fn lira_log_ratio_matches_direct_densities() {
        // obs = μ_in = 2, μ_out = 0, both σ = 1: log Λ = 4/2 = 2.
        let st = stats(2.0, 1.0, 0.0, 1.0);
        assert!((lira_log_ratio(2.0, &st) - 2.0).abs() < 1e-12);
        // Equal Gaussians: ratio 0 everywhere.
        let eq = stats(1.0, 0.5, 1.0, 0.5);
        for obs in [-3.0, 0.0, 7.5] {
            assert_eq!(lira_log_ratio(obs, &eq), 0.0);
        }
    }

    #[test]
    fn lira_antisymmetric_under_swap() {
        let st = stats(2.0, 1.5, -1.0, 0.5);
        let swapped = stats(-1.0, 0.5, 2.0, 1.5);
        for obs in [-2.0, 0.3, 4.0] {
            assert!((lira_log_ratio(obs, &st) + lira_log_ratio(obs, &swapped)).abs() < 1e-12);
        }
    }

    #[test]
    fn lira_monotone_when_variances_match() {
        let st = stats(3.0, 1.0, -3.0, 1.0);
        let mut prev = f64::NEG_INFINITY;
        for i in 0..20 {
            let obs = -5.0 + i as f64 * 0.5;
            let v = lira_log_ratio(obs, &st);
            assert!(v > prev);
            prev = v;
        }
    }

    #[test]
    fn sablayrolles_arithmetic() {
        let (ds, model) = blob_model(3);
        let ex = &ds.examples[1];
        let loss = model.loss(ex).unwrap();
        let s = sablayrolles_score(&model, ex, loss).unwrap();
        assert!(s.score.abs() < 1e-12);
        let s2 = sablayrolles_score(&model, ex, loss + 1.5).unwrap();
        assert!((s2.score - 1.5).abs() < 1e-12);
    }

    #[test]
    fn hardness_threshold_rules() {
        let losses = [1.0, 3.0, 2.0, 10.0];
        assert_eq!(hardness_threshold(&losses, TauRule::Mean), 4.0);
        assert_eq!(hardness_threshold(&losses, TauRule::Median), 2.5);
    }

    #[test]
    fn song_scores_order_by_entropy() {
        let mut calib = BTreeMap::new();
        calib.insert(0usize, ClassEntropyStats { mean: 1.0, std: 0.5 });
        let (ds, model) = blob_model(4);
        let class0: Vec<&LabeledExample> =
            ds.examples.iter().filter(|e| e.label == 0).collect();
        let mut scored: Vec<(f64, f64)> = class0
            .iter()
            .map(|ex| {
                let probs = model.probabilities(&ex.features).unwrap();
                let mentr = modified_entropy(&probs, ex.label);
                (mentr, song_score(&model, ex, &calib).unwrap().score)
            })
            .collect();
        scored.sort_by(|a, b| a.0.total_cmp(&b.0));
        for w in scored.windows(2) {
            assert!(w[0].1 >= w[1].1, "lower entropy must score at least as high");
        }
        let missing = LabeledExample { id: 0, features: ds.examples[0].features.clone(), label: 1, group: Group::Over };
        assert!(matches!(
            song_score(&model, &missing, &calib),
            Err(AttackError::MissingCalibration { class: 1 })
        ));
    }

    #[test]
    fn shokri_rejects_one_class_and_scores_identically_on_identical_features() {
        let cfg = LearnerConfig {
            arch: LearnerArch::Mlp { hidden: 8 },
            epochs: 20,
            learning_rate: 0.2,
            batch_size: 8,
            l2: 0.0,
            seed: 5,
        };
        let feature = alloc::vec![0.5, 0.5, 0.0, 1.0];
        let one_class: Vec<(Vec<f64>, bool)> =
            (0..6).map(|_| (feature.clone(), true)).collect();
        assert!(matches!(
            shokri_attack(&one_class, &[], &cfg),
            Err(AttackError::DegenerateTraining)
        ));
        // Identical member and non-member features: scores collapse to the
        // same value for every victim.
        let shadow: Vec<(Vec<f64>, bool)> =
            (0..20).map(|i| (feature.clone(), i % 2 == 0)).collect();
        let victims: Vec<(u64, Vec<f64>)> =
            (0..4).map(|i| (i as u64, feature.clone())).collect();
        let scores = shokri_attack(&shadow, &victims, &cfg).unwrap();
        for w in scores.windows(2) {
            assert!((w[0].score - w[1].score).abs() < 1e-12);
        }
        assert!((scores[0].score - 0.5).abs() < 0.2);
    }

    #[test]
    fn indicator_matches_prediction() {
        let (ds, model) = blob_model(6);
        for ex in ds.examples.iter().take(10) {
            let correct = model.predict(&ex.features).unwrap() == ex.label;
            assert_eq!(indicator_adversary(&model, ex).unwrap(), correct);
        }
    }

    #[test]
    fn fair_coin_has_no_advantage() {
        let (ds, _) = blob_model(7);
        let cfg = GameConfig {
            trials: 400,
            adversary: Adversary::FairCoin,
            dataset: &ds,
            target_id: 0,
            learner: LearnerConfig {
                arch: LearnerArch::LogisticRegression,
                epochs: 1,
                learning_rate: 0.01,
                batch_size: 32,
                l2: 0.0,
                seed: 0,
            },
            seed: 13,
        };
        let result = play_mi_game(&cfg).unwrap();
        assert!(result.advantage_estimate.abs() <= 3.0 * result.std_error + 0.05);
    }

    #[test]
    fn data_ignoring_learner_defeats_every_adversary() {
        let (ds, _) = blob_model(8);
        let learner = LearnerConfig {
            arch: LearnerArch::LogisticRegression,
            epochs: 1,
            learning_rate: 1e-12,
            batch_size: 32,
            l2: 0.0,
            seed: 0,
        };
        for adversary in [
            Adversary::Indicator,
            Adversary::LossGap { cap: 5.0 },
            Adversary::OodGap,
        ] {
            let cfg = GameConfig {
                trials: 300,
                adversary,
                dataset: &ds,
                target_id: 1,
                learner,
                seed: 21,
            };
            let result = play_mi_game(&cfg).unwrap();
            assert!(
                result.advantage_estimate.abs() <= 3.0 * result.std_error + 0.05,
                "advantage {} se {}",
                result.advantage_estimate,
                result.std_error
            );
        }
    }

    #[test]
    fn bounded_g_constant_gap_is_zero() {
        let (ds, _) = blob_model(9);
        let learner = LearnerConfig {
            arch: LearnerArch::LogisticRegression,
            epochs: 2,
            learning_rate: 0.1,
            batch_size: 16,
            l2: 0.0,
            seed: 0,
        };
        let (gap, se) = bounded_g_gap(&|_, _| 0.75, &ds, 0, &learner, 5, 3).unwrap();
        assert_eq!(gap, 0.0);
        assert_eq!(se, 0.0);
    }

    #[test]
    fn bounded_g_rejects_non_finite() {
        let (ds, _) = blob_model(10);
        let learner = LearnerConfig {
            arch: LearnerArch::LogisticRegression,
            epochs: 1,
            learning_rate: 0.1,
            batch_size: 16,
            l2: 0.0,
            seed: 0,
        };
        assert!(matches!(
            bounded_g_gap(&|_, _| f64::NAN, &ds, 0, &learner, 1, 3),
            Err(AttackError::NonFiniteScore)
        ));
    }

    #[test]
    fn scores_are_deterministic() {
        let (ds, model) = blob_model(11);
        let a = yeom_score(&model, &ds.examples[2]).unwrap();
        let b = yeom_score(&model, &ds.examples[2]).unwrap();
        assert_eq!(a, b);
    }
}
