//! Target-point selection and OOD scoring.
//!
//! Three ways to pick audit targets from a mixture: uniformly at random
//! from a group, by subpopulation (penultimate features → PCA → k-means,
//! smallest cluster), or by thresholding memorization scores
//! ("singletons"). OOD scores from the max-softmax and energy detectors
//! are oriented so that higher means more out-of-distribution.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

#[cfg(not(feature = "std"))]
use num_traits::Float;
use rand::seq::SliceRandom;

use crate::learner::{EvalError, TrainedModel};
use crate::seed::{self, role};
use crate::synthdata::{Dataset, Group};

/// Declarative selection request; `seed` drives any sampling inside.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SelectionSpec {
    pub strategy: SelectionStrategy,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "strategy", rename_all = "snake_case"))]
pub enum SelectionStrategy {
    Random { k: usize },
    Subpopulation { pca_dims: usize, k_clusters: usize },
    Singleton { mem_threshold: f64 },
}

impl SelectionSpec {
    pub fn validate(&self) -> Result<(), SelectError> {
        match &self.strategy {
            SelectionStrategy::Random { k } => {
                if *k == 0 {
                    return Err(SelectError::ZeroK);
                }
            }
            SelectionStrategy::Subpopulation { pca_dims, k_clusters } => {
                if *pca_dims == 0 || *k_clusters == 0 {
                    return Err(SelectError::ZeroK);
                }
            }
            SelectionStrategy::Singleton { mem_threshold } => {
                if !(*mem_threshold > 0.0 && *mem_threshold <= 1.0) {
                    return Err(SelectError::BadThreshold(*mem_threshold));
                }
            }
        }
        Ok(())
    }
}

/// OOD-ness of one example under both detectors; msp ∈ [0, 1 − 1/C].
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct OodScore {
    pub example_id: u64,
    pub msp: f64,
    pub energy: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub enum SelectError {
    EmptyGroup,
    ZeroK,
    KTooLarge { k: usize, available: usize },
    TooFewSamples { samples: usize, clusters: usize },
    BadThreshold(f64),
    DegenerateFeatures,
    Eval(EvalError),
}

impl fmt::Display for SelectError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SelectError::EmptyGroup => write!(f, "selection group is empty"),
            SelectError::ZeroK => write!(f, "k must be >= 1"),
            SelectError::KTooLarge { k, available } => {
                write!(f, "cannot select {k} from a group of {available}")
            }
            SelectError::TooFewSamples { samples, clusters } => {
                write!(f, "cannot form {clusters} clusters from {samples} samples")
            }
            SelectError::BadThreshold(t) => {
                write!(f, "memorization threshold must be in (0, 1], got {t}")
            }
            SelectError::DegenerateFeatures => {
                write!(f, "feature matrix has no usable variance")
            }
            SelectError::Eval(e) => write!(f, "feature extraction failed: {e}"),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for SelectError {}

impl From<EvalError> for SelectError {
    fn from(e: EvalError) -> Self {
        SelectError::Eval(e)
    }
}

/// 1 − max softmax probability.
pub fn msp_from_probs(probs: &[f64]) -> f64 {
    1.0 - probs.iter().copied().fold(f64::NEG_INFINITY, f64::max)
}

/// −log Σ exp(logit) at temperature 1 (stable log-sum-exp).
pub fn energy_from_logits(logits: &[f64]) -> f64 {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lse = max + logits.iter().map(|&v| (v - max).exp()).sum::<f64>().ln();
    -lse
}

pub fn msp_ood_score(model: &TrainedModel, x: &[f64]) -> Result<f64, EvalError> {
    Ok(msp_from_probs(&model.probabilities(x)?))
}

pub fn energy_ood_score(model: &TrainedModel, x: &[f64]) -> Result<f64, EvalError> {
    Ok(energy_from_logits(&model.logits(x)?))
}

/// Both OOD detectors over a whole dataset.
pub fn ood_scores(model: &TrainedModel, dataset: &Dataset) -> Result<Vec<OodScore>, EvalError> {
    dataset
        .examples
        .iter()
        .map(|ex| {
            Ok(OodScore {
                example_id: ex.id,
                msp: msp_ood_score(model, &ex.features)?,
                energy: energy_ood_score(model, &ex.features)?,
            })
        })
        .collect()
}

/// `k` distinct ids drawn uniformly from the group, sorted.
pub fn select_random(
    dataset: &Dataset,
    group: Group,
    k: usize,
    seed: u64,
) -> Result<Vec<u64>, SelectError> {
    if k == 0 {
        return Err(SelectError::ZeroK);
    }
    let mut ids = dataset.group_ids(group);
    if ids.is_empty() {
        return Err(SelectError::EmptyGroup);
    }
    if k > ids.len() {
        return Err(SelectError::KTooLarge { k, available: ids.len() });
    }
    let mut rng = seed::rng_from(seed::mix(&[seed, role::SELECT]));
    ids.shuffle(&mut rng);
    let mut chosen: Vec<u64> = ids.into_iter().take(k).collect();
    chosen.sort_unstable();
    Ok(chosen)
}

/// Ids whose memorization score strictly exceeds the threshold, sorted.
pub fn select_singletons(mem_scores: &BTreeMap<u64, f64>, threshold: f64) -> Vec<u64> {
    mem_scores
        .iter()
        .filter(|(_, &score)| score > threshold)
        .map(|(&id, _)| id)
        .collect()
}

/// A fitted centered PCA projection.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PcaProjection {
    pub mean: Vec<f64>,
    /// One row per retained component, descending eigenvalue, sign fixed
    /// so the largest-magnitude entry is positive.
    pub components: Vec<Vec<f64>>,
    pub eigenvalues: Vec<f64>,
}

impl PcaProjection {
    pub fn dims(&self) -> usize {
        self.components.len()
    }

    pub fn project(&self, x: &[f64]) -> Vec<f64> {
        self.components
            .iter()
            .map(|comp| comp.iter().zip(x).zip(&self.mean).map(|((c, xi), m)| c * (xi - m)).sum())
            .collect()
    }

    /// Map a projected point back to feature space.
    pub fn reconstruct(&self, projected: &[f64]) -> Vec<f64> {
        let d = self.mean.len();
        let mut out = self.mean.clone();
        for (comp, &p) in self.components.iter().zip(projected) {
            for i in 0..d {
                out[i] += p * comp[i];
            }
        }
        out
    }
}

/// Fit PCA on centered features via eigendecomposition of the covariance.
/// Keeps at most `dims` components; zero-variance directions (eigenvalue
/// ≤ 1e-12) are dropped.
pub fn pca_fit(features: &[Vec<f64>], dims: usize) -> Result<PcaProjection, SelectError> {
    if features.is_empty() || dims == 0 {
        return Err(SelectError::DegenerateFeatures);
    }
    let n = features.len();
    let d = features[0].len();
    let mut mean = vec![0.0; d];
    for row in features {
        for (m, x) in mean.iter_mut().zip(row) {
            *m += x;
        }
    }
    for m in &mut mean {
        *m /= n as f64;
    }
    let mut cov = vec![vec![0.0; d]; d];
    for row in features {
        let centered: Vec<f64> = row.iter().zip(&mean).map(|(x, m)| x - m).collect();
        for i in 0..d {
            for j in i..d {
                cov[i][j] += centered[i] * centered[j];
            }
        }
    }
    let denom = (n.max(2) - 1) as f64;
    for i in 0..d {
        for j in i..d {
            cov[i][j] /= denom;
            cov[j][i] = cov[i][j];
        }
    }
    let (eigenvalues, eigenvectors) = crate::linalg::symmetric_eigen(&cov);
    let keep: usize = eigenvalues
        .iter()
        .take(dims.min(d))
        .filter(|&&v| v > 1e-12)
        .count();
    if keep == 0 {
        return Err(SelectError::DegenerateFeatures);
    }
    Ok(PcaProjection {
        mean,
        components: eigenvectors.into_iter().take(keep).collect(),
        eigenvalues: eigenvalues.into_iter().take(keep).collect(),
    })
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Nearest center index; ties go to the lowest index.
fn assign(point: &[f64], centers: &[Vec<f64>]) -> usize {
    let mut best = 0;
    let mut best_d = sq_dist(point, &centers[0]);
    for (i, c) in centers.iter().enumerate().skip(1) {
        let d = sq_dist(point, c);
        if d < best_d {
            best = i;
            best_d = d;
        }
    }
    best
}

/// Sum of squared distances from each point to its assigned center.
pub fn kmeans_inertia(points: &[Vec<f64>], assignments: &[usize], centers: &[Vec<f64>]) -> f64 {
    points
        .iter()
        .zip(assignments)
        .map(|(p, &a)| sq_dist(p, &centers[a]))
        .sum()
}

/// Lloyd's k-means with k-means++ seeding. Runs until the assignment
/// fixpoint or 300 iterations; empty clusters are refilled with the point
/// farthest from its current center. Deterministic given `seed`.
pub fn kmeans(
    points: &[Vec<f64>],
    k: usize,
    seed: u64,
) -> Result<(Vec<usize>, Vec<Vec<f64>>), SelectError> {
    if k == 0 {
        return Err(SelectError::ZeroK);
    }
    if points.len() < k {
        return Err(SelectError::TooFewSamples { samples: points.len(), clusters: k });
    }
    let mut rng = seed::rng_from(seed::mix(&[seed, role::SELECT, 0x6b6d]));

    // k-means++: first center uniform, then proportional to D².
    let mut centers: Vec<Vec<f64>> = Vec::with_capacity(k);
    centers.push(points[rand::Rng::gen_range(&mut rng, 0..points.len())].clone());
    let mut d2: Vec<f64> = points.iter().map(|p| sq_dist(p, &centers[0])).collect();
    while centers.len() < k {
        let total: f64 = d2.iter().sum();
        let next = if total <= 0.0 {
            // All remaining mass at existing centers: take the first point
            // not yet chosen as a center.
            points
                .iter()
                .position(|p| centers.iter().all(|c| c != p))
                .unwrap_or(0)
        } else {
            let u: f64 = rand::Rng::gen::<f64>(&mut rng) * total;
            let mut acc = 0.0;
            let mut idx = points.len() - 1;
            for (i, &w) in d2.iter().enumerate() {
                acc += w;
                if u < acc {
                    idx = i;
                    break;
                }
            }
            idx
        };
        centers.push(points[next].clone());
        for (slot, p) in d2.iter_mut().zip(points) {
            *slot = slot.min(sq_dist(p, centers.last().unwrap()));
        }
    }

    let dim = points[0].len();
    let mut assignments: Vec<usize> = points.iter().map(|p| assign(p, &centers)).collect();
    for _ in 0..300 {
        // Update step.
        let mut sums = vec![vec![0.0; dim]; k];
        let mut counts = vec![0usize; k];
        for (p, &a) in points.iter().zip(&assignments) {
            counts[a] += 1;
            for (s, x) in sums[a].iter_mut().zip(p) {
                *s += x;
            }
        }
        for c in 0..k {
            if counts[c] > 0 {
                for s in &mut sums[c] {
                    *s /= counts[c] as f64;
                }
                centers[c] = sums[c].clone();
            } else {
                // Refill an empty cluster with the farthest point.
                let mut far = 0;
                let mut far_d = -1.0;
                for (i, p) in points.iter().enumerate() {
                    let d = sq_dist(p, &centers[assignments[i]]);
                    if d > far_d {
                        far_d = d;
                        far = i;
                    }
                }
                centers[c] = points[far].clone();
                assignments[far] = c;
            }
        }
        // Assign step; stop at fixpoint.
        let next: Vec<usize> = points.iter().map(|p| assign(p, &centers)).collect();
        if next == assignments {
            break;
        }
        assignments = next;
    }
    Ok((assignments, centers))
}

/// Subpopulation selection: penultimate features of every example →
/// centered PCA to `pca_dims` → k-means into `k_clusters` → the
/// under-group members of the smallest cluster (ties to the lowest
/// cluster index), sorted by id.
pub fn select_subpopulation(
    dataset: &Dataset,
    feature_model: &TrainedModel,
    pca_dims: usize,
    k_clusters: usize,
    seed: u64,
) -> Result<Vec<u64>, SelectError> {
    let mut features = Vec::with_capacity(dataset.len());
    for ex in &dataset.examples {
        features.push(feature_model.penultimate(&ex.features)?);
    }
    let projection = pca_fit(&features, pca_dims)?;
    let projected: Vec<Vec<f64>> = features.iter().map(|f| projection.project(f)).collect();
    let (assignments, _) = kmeans(&projected, k_clusters, seed)?;

    let mut sizes = vec![0usize; k_clusters];
    for &a in &assignments {
        sizes[a] += 1;
    }
    let smallest = sizes
        .iter()
        .enumerate()
        .min_by_key(|(i, &s)| (s, *i))
        .map(|(i, _)| i)
        .expect("k_clusters >= 1");

    Ok(dataset
        .examples
        .iter()
        .zip(&assignments)
        .filter(|(ex, &a)| a == smallest && ex.group == Group::Under)
        .map(|(ex, _)| ex.id)
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::learner::{train, LearnerArch, LearnerConfig};
    use crate::synthdata::{generate, GroupGenerator, MixtureSpec};

    #[test]
    fn msp_of_uniform_prediction() {
        let probs = vec![0.1; 10];
        assert!((msp_from_probs(&probs) - 0.9).abs() < 1e-12);
        let mut onehot = vec![0.0; 10];
        onehot[2] = 1.0;
        assert_eq!(msp_from_probs(&onehot), 0.0);
    }

    #[test]
    fn logit_shift_moves_energy_not_msp() {
        let logits = [1.0, -0.5, 2.0, 0.0];
        let shifted: Vec<f64> = logits.iter().map(|v| v + 3.0).collect();
        let e0 = energy_from_logits(&logits);
        let e1 = energy_from_logits(&shifted);
        assert!((e1 - (e0 - 3.0)).abs() < 1e-12);
        let p0 = msp_from_probs(&crate::learner::softmax(&logits));
        let p1 = msp_from_probs(&crate::learner::softmax(&shifted));
        assert!((p0 - p1).abs() < 1e-12);
    }

    #[test]
    fn energy_decreases_when_a_logit_increases() {
        let logits = [0.3, -1.0, 0.8];
        for i in 0..3 {
            let mut bumped = logits;
            bumped[i] += 0.5;
            assert!(energy_from_logits(&bumped) < energy_from_logits(&logits));
        }
    }

    #[test]
    fn msp_range_bound() {
        // msp is at most 1 - 1/C (uniform) and at least 0 (one-hot).
        for c in [2usize, 5, 10] {
            let probs = vec![1.0 / c as f64; c];
            let msp = msp_from_probs(&probs);
            assert!(msp <= 1.0 - 1.0 / c as f64 + 1e-12);
            assert!(msp >= 0.0);
        }
    }

    fn mixture(seed: u64) -> Dataset {
        let over = GroupGenerator::random_blobs(4, 2, 4.0, 0.8, seed);
        let under = GroupGenerator::covariate_from(&over, 2.0, 1.5, seed);
        generate(&MixtureSpec {
            alpha: 0.8,
            over_gen: over,
            under_gen: under,
            examples_per_class: 25,
            planted_singletons: 0,
            seed,
        })
        .unwrap()
    }

    #[test]
    fn select_random_contract() {
        let ds = mixture(1);
        let under = ds.group_ids(Group::Under);
        let all = select_random(&ds, Group::Under, under.len(), 7).unwrap();
        assert_eq!(all, under);
        let a = select_random(&ds, Group::Under, 3, 9).unwrap();
        let b = select_random(&ds, Group::Under, 3, 9).unwrap();
        assert_eq!(a, b);
        assert!(matches!(select_random(&ds, Group::Under, 0, 1), Err(SelectError::ZeroK)));
        assert!(matches!(
            select_random(&ds, Group::Under, under.len() + 1, 1),
            Err(SelectError::KTooLarge { .. })
        ));
    }

    #[test]
    fn select_singletons_strict_threshold() {
        let scores: BTreeMap<u64, f64> =
            [(1u64, 0.9), (2, 0.8), (3, 0.81), (4, 0.0)].into_iter().collect();
        assert_eq!(select_singletons(&scores, 0.8), vec![1, 3]);
        assert_eq!(select_singletons(&scores, 0.95), Vec::<u64>::new());
        let zeros: BTreeMap<u64, f64> = [(1u64, 0.0), (2, 0.0)].into_iter().collect();
        assert!(select_singletons(&zeros, 0.5).is_empty());
        // Threshold 0 keeps every strictly positive score.
        assert_eq!(select_singletons(&scores, f64::MIN_POSITIVE), vec![1, 2, 3]);
    }

    #[test]
    fn pca_full_rank_preserves_distances() {
        let ds = mixture(3);
        let feats: Vec<Vec<f64>> = ds.examples.iter().map(|e| e.features.clone()).collect();
        let proj = pca_fit(&feats, ds.dim).unwrap();
        assert_eq!(proj.dims(), ds.dim);
        for pair in feats.windows(2) {
            let orig = sq_dist(&pair[0], &pair[1]);
            let p0 = proj.project(&pair[0]);
            let p1 = proj.project(&pair[1]);
            assert!((orig - sq_dist(&p0, &p1)).abs() < 1e-9);
        }
        // Reconstruction is exact at full rank.
        let x = &feats[0];
        let back = proj.reconstruct(&proj.project(x));
        for (a, b) in back.iter().zip(x) {
            assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn pca_drops_zero_variance_directions() {
        // Second coordinate is constant.
        let feats: Vec<Vec<f64>> =
            (0..10).map(|i| vec![i as f64, 5.0]).collect();
        let proj = pca_fit(&feats, 2).unwrap();
        assert_eq!(proj.dims(), 1);
    }

    #[test]
    fn kmeans_separated_line_clusters() {
        let points: Vec<Vec<f64>> =
            [0.0, 1.0, 10.0, 11.0].iter().map(|&v| vec![v]).collect();
        let (assignments, _) = kmeans(&points, 2, 5).unwrap();
        assert_eq!(assignments[0], assignments[1]);
        assert_eq!(assignments[2], assignments[3]);
        assert_ne!(assignments[0], assignments[2]);
    }

    #[test]
    fn kmeans_k_equals_n_is_exact() {
        let points: Vec<Vec<f64>> = (0..5).map(|i| vec![i as f64 * 2.0, 1.0]).collect();
        let (assignments, centers) = kmeans(&points, 5, 3).unwrap();
        assert!((kmeans_inertia(&points, &assignments, &centers)).abs() < 1e-12);
        let mut sorted = assignments.clone();
        sorted.sort_unstable();
        sorted.dedup();
        assert_eq!(sorted.len(), 5);
    }

    #[test]
    fn kmeans_rejects_too_few_points() {
        let points: Vec<Vec<f64>> = vec![vec![0.0]];
        assert!(matches!(
            kmeans(&points, 2, 1),
            Err(SelectError::TooFewSamples { .. })
        ));
    }

    #[test]
    fn kmeans_inertia_not_worse_than_init_assignment() {
        let ds = mixture(8);
        let points: Vec<Vec<f64>> = ds.examples.iter().map(|e| e.features.clone()).collect();
        let (assignments, centers) = kmeans(&points, 3, 11).unwrap();
        // Final inertia is a local optimum: reassigning any single point
        // to another center cannot reduce it.
        let base = kmeans_inertia(&points, &assignments, &centers);
        for (i, p) in points.iter().enumerate() {
            for c in 0..centers.len() {
                let mut alt = assignments.clone();
                alt[i] = c;
                assert!(kmeans_inertia(&points, &alt, &centers) >= base - 1e-9, "point {i} to {c}");
            }
        }
    }

    #[test]
    fn subpopulation_selection_is_deterministic() {
        let ds = mixture(13);
        let cfg = LearnerConfig {
            arch: LearnerArch::Mlp { hidden: 8 },
            epochs: 10,
            learning_rate: 0.2,
            batch_size: 16,
            l2: 0.0,
            seed: 2,
        };
        let model = train(&ds, &cfg).unwrap();
        let a = select_subpopulation(&ds, &model, 3, 2, 17).unwrap();
        let b = select_subpopulation(&ds, &model, 3, 2, 17).unwrap();
        assert_eq!(a, b);
        for w in a.windows(2) {
            assert!(w[0] < w[1]);
        }
    }

    #[test]
    fn selection_spec_validation() {
        assert!(SelectionSpec {
            strategy: SelectionStrategy::Random { k: 0 },
            seed: 0
        }
        .validate()
        .is_err());
        assert!(SelectionSpec {
            strategy: SelectionStrategy::Singleton { mem_threshold: 0.0 },
            seed: 0
        }
        .validate()
        .is_err());
        assert!(SelectionSpec {
            strategy: SelectionStrategy::Subpopulation { pca_dims: 10, k_clusters: 5 },
            seed: 0
        }
        .validate()
        .is_ok());
    }
}
