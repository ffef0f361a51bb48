//! Composite datasets: an over-represented and an under-represented group
//! mixed at ratio `alpha`, with optional planted high-memorization points.
//!
//! The groups are Gaussian class blobs. The under-represented group is
//! either covariate-shifted (same class means plus a fixed shift and an
//! inflated scale) or semantic (fresh cluster centers relabeled onto the
//! shared label set by generator index). These stand in for the image
//! mixtures the audit is modeled on while keeping thousands of shadow
//! trainings cheap.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

#[cfg(not(feature = "std"))]
use num_traits::Float;
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha12Rng;

use crate::seed::{self, role};

/// Which mixture component an example belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum Group {
    Over,
    Under,
}

/// One labeled feature vector.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct LabeledExample {
    pub id: u64,
    pub features: Vec<f64>,
    pub label: usize,
    pub group: Group,
}

/// A labeled dataset with group tags.
///
/// Examples are kept sorted by id; all operations that build datasets
/// preserve this so training batches depend only on the id set and the
/// shuffle seed, not on construction order.
///
/// Equality compares examples, `num_classes`, and `dim`; `provenance` is
/// descriptive metadata and excluded.
#[derive(Clone, Debug)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Dataset {
    pub examples: Vec<LabeledExample>,
    pub num_classes: usize,
    pub dim: usize,
    pub provenance: String,
}

impl PartialEq for Dataset {
    fn eq(&self, other: &Self) -> bool {
        self.examples == other.examples
            && self.num_classes == other.num_classes
            && self.dim == other.dim
    }
}

/// Errors from dataset construction and manipulation.
#[derive(Clone, Debug, PartialEq)]
pub enum DataError {
    InvalidAlpha(f64),
    ZeroCounts,
    InvalidFraction(f64),
    DimensionMismatch { expected: usize, got: usize },
    LabelOutOfRange { label: usize, classes: usize },
    DuplicateId(u64),
    UnknownId(u64),
    OverlappingForceSets,
    InconsistentGenerators(&'static str),
}

impl fmt::Display for DataError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DataError::InvalidAlpha(a) => write!(f, "alpha must be in [0, 1], got {a}"),
            DataError::ZeroCounts => write!(f, "per-class counts must be positive"),
            DataError::InvalidFraction(x) => write!(f, "fraction must be in (0, 1], got {x}"),
            DataError::DimensionMismatch { expected, got } => {
                write!(f, "feature dimension mismatch: expected {expected}, got {got}")
            }
            DataError::LabelOutOfRange { label, classes } => {
                write!(f, "label {label} out of range for {classes} classes")
            }
            DataError::DuplicateId(id) => write!(f, "duplicate example id {id}"),
            DataError::UnknownId(id) => write!(f, "id {id} not present in dataset"),
            DataError::OverlappingForceSets => {
                write!(f, "include and exclude id sets overlap")
            }
            DataError::InconsistentGenerators(msg) => {
                write!(f, "inconsistent group generators: {msg}")
            }
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for DataError {}

impl Dataset {
    /// Check the structural invariants: unique sorted ids, consistent
    /// dimensions, labels within range.
    pub fn validate(&self) -> Result<(), DataError> {
        let mut prev: Option<u64> = None;
        for ex in &self.examples {
            if let Some(p) = prev {
                if ex.id <= p {
                    return Err(DataError::DuplicateId(ex.id));
                }
            }
            prev = Some(ex.id);
            if ex.features.len() != self.dim {
                return Err(DataError::DimensionMismatch {
                    expected: self.dim,
                    got: ex.features.len(),
                });
            }
            if ex.label >= self.num_classes {
                return Err(DataError::LabelOutOfRange {
                    label: ex.label,
                    classes: self.num_classes,
                });
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.examples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.examples.is_empty()
    }

    pub fn ids(&self) -> Vec<u64> {
        self.examples.iter().map(|e| e.id).collect()
    }

    pub fn group_ids(&self, group: Group) -> Vec<u64> {
        self.examples
            .iter()
            .filter(|e| e.group == group)
            .map(|e| e.id)
            .collect()
    }

    /// Look up an example by id (binary search over the sorted examples).
    pub fn example(&self, id: u64) -> Option<&LabeledExample> {
        self.examples
            .binary_search_by_key(&id, |e| e.id)
            .ok()
            .map(|i| &self.examples[i])
    }

    pub fn contains(&self, id: u64) -> bool {
        self.example(id).is_some()
    }

    /// Copy of this dataset with `extra` inserted at its id position.
    /// Replaces any existing example with the same id.
    pub fn with_example(&self, extra: LabeledExample) -> Dataset {
        let mut out = self.clone();
        match out.examples.binary_search_by_key(&extra.id, |e| e.id) {
            Ok(i) => out.examples[i] = extra,
            Err(i) => out.examples.insert(i, extra),
        }
        out
    }

    /// Copy of this dataset without the example `id` (no-op if absent).
    pub fn without_example(&self, id: u64) -> Dataset {
        let mut out = self.clone();
        if let Ok(i) = out.examples.binary_search_by_key(&id, |e| e.id) {
            out.examples.remove(i);
        }
        out
    }

    /// Restrict to the given ids (ids absent from the dataset are ignored).
    pub fn restrict(&self, ids: &BTreeSet<u64>) -> Dataset {
        Dataset {
            examples: self
                .examples
                .iter()
                .filter(|e| ids.contains(&e.id))
                .cloned()
                .collect(),
            num_classes: self.num_classes,
            dim: self.dim,
            provenance: self.provenance.clone(),
        }
    }
}

/// Group generator: Gaussian class blobs in one of three arrangements.
///
/// `class_scales` are per-class isotropic standard deviations. For
/// `SemanticShifted` the centers are the generator's own clusters and the
/// label of cluster `i` is `i` — the "consistent label assignment by
/// generator index" mapping, recorded in dataset provenance.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "kind", rename_all = "snake_case"))]
pub enum GroupGenerator {
    GaussianBlobs {
        class_means: Vec<Vec<f64>>,
        class_scales: Vec<f64>,
    },
    CovariateShifted {
        class_means: Vec<Vec<f64>>,
        class_scales: Vec<f64>,
        shift: Vec<f64>,
    },
    SemanticShifted {
        cluster_centers: Vec<Vec<f64>>,
        class_scales: Vec<f64>,
    },
}

impl GroupGenerator {
    pub fn num_classes(&self) -> usize {
        self.means().len()
    }

    pub fn dim(&self) -> usize {
        self.means().first().map_or(0, |m| m.len())
    }

    fn means(&self) -> &[Vec<f64>] {
        match self {
            GroupGenerator::GaussianBlobs { class_means, .. } => class_means,
            GroupGenerator::CovariateShifted { class_means, .. } => class_means,
            GroupGenerator::SemanticShifted { cluster_centers, .. } => cluster_centers,
        }
    }

    fn scales(&self) -> &[f64] {
        match self {
            GroupGenerator::GaussianBlobs { class_scales, .. } => class_scales,
            GroupGenerator::CovariateShifted { class_scales, .. } => class_scales,
            GroupGenerator::SemanticShifted { class_scales, .. } => class_scales,
        }
    }

    fn validate(&self) -> Result<(), DataError> {
        let means = self.means();
        if means.is_empty() {
            return Err(DataError::InconsistentGenerators("no class means"));
        }
        let d = means[0].len();
        if d == 0 {
            return Err(DataError::InconsistentGenerators("zero-dimensional means"));
        }
        if means.iter().any(|m| m.len() != d) {
            return Err(DataError::InconsistentGenerators("uneven mean lengths"));
        }
        if self.scales().len() != means.len() {
            return Err(DataError::InconsistentGenerators("one scale per class required"));
        }
        if self.scales().iter().any(|&s| !(s > 0.0)) {
            return Err(DataError::InconsistentGenerators("scales must be positive"));
        }
        if let GroupGenerator::CovariateShifted { shift, .. } = self {
            if shift.len() != d {
                return Err(DataError::InconsistentGenerators("shift length != dim"));
            }
        }
        Ok(())
    }

    /// Draw one feature vector for `class`.
    fn sample(&self, class: usize, rng: &mut ChaCha12Rng) -> Vec<f64> {
        let mu = &self.means()[class];
        let s = self.scales()[class];
        let mut x: Vec<f64> = mu.iter().map(|&m| m + s * standard_normal(rng)).collect();
        if let GroupGenerator::CovariateShifted { shift, .. } = self {
            for (xi, sh) in x.iter_mut().zip(shift) {
                *xi += sh;
            }
        }
        x
    }

    /// Blobs with means drawn from N(0, mean_spread² I).
    pub fn random_blobs(
        dim: usize,
        classes: usize,
        mean_spread: f64,
        scale: f64,
        seed: u64,
    ) -> GroupGenerator {
        let mut rng = seed::rng_from(seed::mix(&[seed, role::GENERATE, 1]));
        let class_means = (0..classes)
            .map(|_| (0..dim).map(|_| mean_spread * standard_normal(&mut rng)).collect())
            .collect();
        GroupGenerator::GaussianBlobs {
            class_means,
            class_scales: alloc::vec![scale; classes],
        }
    }

    /// Covariate-shifted copy of `over`: same class means, a fixed random
    /// shift of the given norm, and scales multiplied by `scale_factor`.
    pub fn covariate_from(
        over: &GroupGenerator,
        shift_norm: f64,
        scale_factor: f64,
        seed: u64,
    ) -> GroupGenerator {
        let d = over.dim();
        let mut rng = seed::rng_from(seed::mix(&[seed, role::GENERATE, 2]));
        let mut shift: Vec<f64> = (0..d).map(|_| standard_normal(&mut rng)).collect();
        let norm = shift.iter().map(|v| v * v).sum::<f64>().sqrt().max(1e-12);
        for v in &mut shift {
            *v *= shift_norm / norm;
        }
        GroupGenerator::CovariateShifted {
            class_means: over.means().to_vec(),
            class_scales: over.scales().iter().map(|s| s * scale_factor).collect(),
            shift,
        }
    }

    /// Semantic group: fresh cluster centers kept at least `min_dist` from
    /// every mean in `avoid`, relabeled onto 0..classes by index.
    pub fn semantic_blobs(
        dim: usize,
        classes: usize,
        mean_spread: f64,
        scale: f64,
        avoid: &GroupGenerator,
        min_dist: f64,
        seed: u64,
    ) -> GroupGenerator {
        let mut rng = seed::rng_from(seed::mix(&[seed, role::GENERATE, 3]));
        let mut centers: Vec<Vec<f64>> = Vec::with_capacity(classes);
        while centers.len() < classes {
            let c: Vec<f64> =
                (0..dim).map(|_| mean_spread * standard_normal(&mut rng)).collect();
            let far_enough = avoid
                .means()
                .iter()
                .all(|m| euclid(&c, m) >= min_dist);
            if far_enough {
                centers.push(c);
            }
        }
        GroupGenerator::SemanticShifted {
            cluster_centers: centers,
            class_scales: alloc::vec![scale; classes],
        }
    }
}

fn euclid(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// Box–Muller standard normal; one draw per call.
fn standard_normal(rng: &mut ChaCha12Rng) -> f64 {
    let u1: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
    let u2: f64 = rng.gen::<f64>();
    (-2.0 * u1.ln()).sqrt() * (2.0 * core::f64::consts::PI * u2).cos()
}

/// Specification of a composite mixture dataset.
///
/// `examples_per_class` counts regular (non-planted) examples per class;
/// the total regular size is `examples_per_class * C`, split
/// `floor(alpha * N)` over / remainder under, class-balanced within each
/// group. `planted_singletons` additional points are appended after the
/// mixture: each sits inside an over-represented class blob but carries the
/// next class's label, so no model trained without it predicts its label
/// while a memorizing model trained with it does.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct MixtureSpec {
    pub alpha: f64,
    pub over_gen: GroupGenerator,
    pub under_gen: GroupGenerator,
    pub examples_per_class: usize,
    pub planted_singletons: usize,
    pub seed: u64,
}

impl MixtureSpec {
    pub fn num_classes(&self) -> usize {
        self.over_gen.num_classes()
    }

    pub fn dim(&self) -> usize {
        self.over_gen.dim()
    }

    /// Total number of regular (non-planted) examples.
    pub fn regular_len(&self) -> usize {
        self.examples_per_class * self.num_classes()
    }

    /// Ids of the planted singletons in the generated dataset.
    pub fn planted_ids(&self) -> Vec<u64> {
        let n = self.regular_len() as u64;
        (n..n + self.planted_singletons as u64).collect()
    }

    pub fn validate(&self) -> Result<(), DataError> {
        if !(0.0..=1.0).contains(&self.alpha) || !self.alpha.is_finite() {
            return Err(DataError::InvalidAlpha(self.alpha));
        }
        if self.examples_per_class == 0 {
            return Err(DataError::ZeroCounts);
        }
        self.over_gen.validate()?;
        self.under_gen.validate()?;
        if self.over_gen.num_classes() != self.under_gen.num_classes() {
            return Err(DataError::InconsistentGenerators("class count mismatch"));
        }
        if self.over_gen.dim() != self.under_gen.dim() {
            return Err(DataError::InconsistentGenerators("dimension mismatch"));
        }
        Ok(())
    }
}

/// Split `total` across `classes` as evenly as possible (first classes get
/// the remainder); counts differ by at most one.
fn per_class_split(total: usize, classes: usize) -> Vec<usize> {
    let base = total / classes;
    let rem = total % classes;
    (0..classes).map(|c| base + usize::from(c < rem)).collect()
}

/// Generate the mixture dataset described by `spec`.
///
/// Pure function of the spec including its seed: ids are assigned in
/// generation order (over group by class, under group by class, planted
/// points last), and the returned examples are id-sorted.
pub fn generate(spec: &MixtureSpec) -> Result<Dataset, DataError> {
    spec.validate()?;
    let classes = spec.num_classes();
    let dim = spec.dim();
    let n = spec.regular_len();
    let n_over = (spec.alpha * n as f64).floor() as usize;
    let n_under = n - n_over;

    let mut rng = seed::rng_from(seed::mix(&[spec.seed, role::GENERATE]));
    let mut examples = Vec::with_capacity(n + spec.planted_singletons);
    let mut next_id: u64 = 0;

    for (group, gen, split) in [
        (Group::Over, &spec.over_gen, per_class_split(n_over, classes)),
        (Group::Under, &spec.under_gen, per_class_split(n_under, classes)),
    ] {
        for (class, &count) in split.iter().enumerate() {
            for _ in 0..count {
                examples.push(LabeledExample {
                    id: next_id,
                    features: gen.sample(class, &mut rng),
                    label: class,
                    group,
                });
                next_id += 1;
            }
        }
    }

    // Planted singletons: feature vector inside over-class blob c, label
    // (c + 1) mod C. Appended after the alpha-mixture, group Under.
    for j in 0..spec.planted_singletons {
        let c = j % classes;
        let mut x = spec.over_gen.sample(c, &mut rng);
        let s = match &spec.over_gen {
            GroupGenerator::GaussianBlobs { class_scales, .. }
            | GroupGenerator::CovariateShifted { class_scales, .. }
            | GroupGenerator::SemanticShifted { class_scales, .. } => class_scales[c],
        };
        // Nudge off the blob center so each planted point is its own
        // micro-cluster rather than a duplicate of a typical sample.
        for xi in x.iter_mut() {
            *xi += 0.25 * s * standard_normal(&mut rng);
        }
        examples.push(LabeledExample {
            id: next_id,
            features: x,
            label: (c + 1) % classes,
            group: Group::Under,
        });
        next_id += 1;
    }

    let provenance = format!(
        "mixture alpha={} per_class={} classes={} dim={} planted={} seed={} \
         (semantic labels map by generator index)",
        spec.alpha, spec.examples_per_class, classes, dim, spec.planted_singletons, spec.seed
    );
    let ds = Dataset {
        examples,
        num_classes: classes,
        dim,
        provenance,
    };
    debug_assert!(ds.validate().is_ok());
    Ok(ds)
}

/// Random subset of `dataset`: roughly `fraction * N` examples, with
/// `include` ids forced in and `exclude` ids forced out. Deterministic
/// given `seed`; output preserves id order.
pub fn subsample(
    dataset: &Dataset,
    fraction: f64,
    seed: u64,
    exclude: &BTreeSet<u64>,
    include: &BTreeSet<u64>,
) -> Result<Dataset, DataError> {
    if !(fraction > 0.0 && fraction <= 1.0) {
        return Err(DataError::InvalidFraction(fraction));
    }
    if include.intersection(exclude).next().is_some() {
        return Err(DataError::OverlappingForceSets);
    }
    for &id in include {
        if !dataset.contains(id) {
            return Err(DataError::UnknownId(id));
        }
    }
    let n = (fraction * dataset.len() as f64).floor() as usize;
    let mut candidates: Vec<u64> = dataset
        .ids()
        .into_iter()
        .filter(|id| !include.contains(id) && !exclude.contains(id))
        .collect();
    let mut rng = seed::rng_from(seed::mix(&[seed, role::SUBSAMPLE]));
    candidates.shuffle(&mut rng);
    let need = n.saturating_sub(include.len()).min(candidates.len());
    let mut chosen: BTreeSet<u64> = include.clone();
    chosen.extend(candidates.into_iter().take(need));
    Ok(dataset.restrict(&chosen))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_spec(alpha: f64, per_class: usize, planted: usize, seed: u64) -> MixtureSpec {
        let over = GroupGenerator::random_blobs(4, 2, 3.0, 1.0, seed);
        let under = GroupGenerator::covariate_from(&over, 2.0, 1.5, seed);
        MixtureSpec {
            alpha,
            over_gen: over,
            under_gen: under,
            examples_per_class: per_class,
            planted_singletons: planted,
            seed,
        }
    }

    fn count_group(ds: &Dataset, g: Group) -> usize {
        ds.examples.iter().filter(|e| e.group == g).count()
    }

    #[test]
    fn degenerate_mixture_all_over() {
        let ds = generate(&small_spec(1.0, 50, 0, 7)).unwrap();
        assert_eq!(ds.len(), 100);
        assert_eq!(count_group(&ds, Group::Over), 100);
        assert_eq!(count_group(&ds, Group::Under), 0);
    }

    #[test]
    fn mixture_arithmetic_990_10() {
        // alpha=0.99 at N=1000 splits 990 over / 10 under.
        let over = GroupGenerator::random_blobs(4, 10, 3.0, 1.0, 3);
        let under = GroupGenerator::covariate_from(&over, 2.0, 1.5, 3);
        let spec = MixtureSpec {
            alpha: 0.99,
            over_gen: over,
            under_gen: under,
            examples_per_class: 100,
            planted_singletons: 0,
            seed: 3,
        };
        let ds = generate(&spec).unwrap();
        assert_eq!(ds.len(), 1000);
        assert_eq!(count_group(&ds, Group::Over), 990);
        assert_eq!(count_group(&ds, Group::Under), 10);
    }

    #[test]
    fn generation_is_deterministic() {
        let a = generate(&small_spec(0.8, 25, 2, 11)).unwrap();
        let b = generate(&small_spec(0.8, 25, 2, 11)).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.provenance, b.provenance);
    }

    #[test]
    fn class_balance_within_groups() {
        let ds = generate(&small_spec(0.73, 30, 0, 5)).unwrap();
        for g in [Group::Over, Group::Under] {
            let mut counts = alloc::vec![0usize; ds.num_classes];
            for e in ds.examples.iter().filter(|e| e.group == g) {
                counts[e.label] += 1;
            }
            let max = counts.iter().max().unwrap();
            let min = counts.iter().min().unwrap();
            assert!(max - min <= 1, "group {g:?} counts {counts:?}");
        }
    }

    #[test]
    fn planted_points_have_flipped_labels() {
        let spec = small_spec(0.9, 20, 3, 13);
        let ds = generate(&spec).unwrap();
        assert_eq!(ds.len(), 43);
        for (j, id) in spec.planted_ids().iter().enumerate() {
            let ex = ds.example(*id).unwrap();
            assert_eq!(ex.group, Group::Under);
            let disguise = j % ds.num_classes;
            assert_eq!(ex.label, (disguise + 1) % ds.num_classes);
        }
    }

    #[test]
    fn invalid_specs_rejected() {
        assert!(matches!(
            generate(&small_spec(1.5, 10, 0, 1)),
            Err(DataError::InvalidAlpha(_))
        ));
        assert!(matches!(
            generate(&small_spec(0.5, 0, 0, 1)),
            Err(DataError::ZeroCounts)
        ));
    }

    #[test]
    fn subsample_full_fraction_is_identity() {
        let ds = generate(&small_spec(0.8, 25, 0, 2)).unwrap();
        let sub = subsample(&ds, 1.0, 9, &BTreeSet::new(), &BTreeSet::new()).unwrap();
        assert_eq!(sub, ds);
    }

    #[test]
    fn subsample_size_and_determinism() {
        let ds = generate(&small_spec(0.8, 50, 0, 2)).unwrap();
        let a = subsample(&ds, 0.7, 21, &BTreeSet::new(), &BTreeSet::new()).unwrap();
        let b = subsample(&ds, 0.7, 21, &BTreeSet::new(), &BTreeSet::new()).unwrap();
        assert_eq!(a.len(), 70);
        assert_eq!(a, b);
    }

    #[test]
    fn subsample_forced_ids() {
        let ds = generate(&small_spec(0.8, 25, 0, 2)).unwrap();
        let include: BTreeSet<u64> = [0, 1].into_iter().collect();
        let exclude: BTreeSet<u64> = [2, 3].into_iter().collect();
        let sub = subsample(&ds, 0.5, 4, &exclude, &include).unwrap();
        assert!(sub.contains(0) && sub.contains(1));
        assert!(!sub.contains(2) && !sub.contains(3));
        assert_eq!(sub.len(), 25);
    }

    #[test]
    fn subsample_rejects_bad_inputs() {
        let ds = generate(&small_spec(0.8, 25, 0, 2)).unwrap();
        let missing: BTreeSet<u64> = [9999].into_iter().collect();
        assert!(matches!(
            subsample(&ds, 0.5, 1, &BTreeSet::new(), &missing),
            Err(DataError::UnknownId(9999))
        ));
        let overlap: BTreeSet<u64> = [0].into_iter().collect();
        assert!(matches!(
            subsample(&ds, 0.5, 1, &overlap, &overlap),
            Err(DataError::OverlappingForceSets)
        ));
        assert!(matches!(
            subsample(&ds, 0.0, 1, &BTreeSet::new(), &BTreeSet::new()),
            Err(DataError::InvalidFraction(_))
        ));
    }
}
