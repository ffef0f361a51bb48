//! Attack evaluation: ROC curves, AUROC via the rank statistic, and TPR
//! at a fixed low FPR — the headline reliability number. Reports can
//! restrict the member pool to the under-represented group while keeping
//! the full negative pool, so low-FPR operating points stay estimable at
//! small group sizes.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::synthdata::Group;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MetricsError {
    OneClass,
    LengthMismatch { scores: usize, labels: usize },
    Empty,
    NonFiniteScore,
}

impl fmt::Display for MetricsError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MetricsError::OneClass => {
                write!(f, "need at least one member and one non-member")
            }
            MetricsError::LengthMismatch { scores, labels } => {
                write!(f, "scores ({scores}) and labels ({labels}) differ in length")
            }
            MetricsError::Empty => write!(f, "no examples to evaluate"),
            MetricsError::NonFiniteScore => write!(f, "scores must be finite"),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for MetricsError {}

/// One ROC operating point: predict "member" when score ≥ threshold.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RocPoint {
    pub fpr: f64,
    pub tpr: f64,
    pub threshold: f64,
}

/// ROC curve from (0,0) at threshold +∞ to (1,1) at −∞, fpr and tpr
/// non-decreasing.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RocCurve {
    pub points: Vec<RocPoint>,
}

impl RocCurve {
    /// Area under the curve by the trapezoid rule.
    pub fn trapezoid_area(&self) -> f64 {
        self.points
            .windows(2)
            .map(|w| 0.5 * (w[1].tpr + w[0].tpr) * (w[1].fpr - w[0].fpr))
            .sum()
    }
}

fn check_inputs(scores: &[f64], labels: &[bool]) -> Result<(usize, usize), MetricsError> {
    if scores.len() != labels.len() {
        return Err(MetricsError::LengthMismatch { scores: scores.len(), labels: labels.len() });
    }
    if scores.is_empty() {
        return Err(MetricsError::Empty);
    }
    if scores.iter().any(|s| !s.is_finite()) {
        return Err(MetricsError::NonFiniteScore);
    }
    let members = labels.iter().filter(|&&l| l).count();
    let nonmembers = labels.len() - members;
    if members == 0 || nonmembers == 0 {
        return Err(MetricsError::OneClass);
    }
    Ok((members, nonmembers))
}

/// ROC curve by sweeping thresholds over the distinct score values,
/// descending.
pub fn roc(scores: &[f64], labels: &[bool]) -> Result<RocCurve, MetricsError> {
    let (members, nonmembers) = check_inputs(scores, labels)?;
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&i, &j| scores[j].total_cmp(&scores[i]));

    let mut points = Vec::with_capacity(scores.len() + 2);
    points.push(RocPoint { fpr: 0.0, tpr: 0.0, threshold: f64::INFINITY });
    let mut tp = 0usize;
    let mut fp = 0usize;
    let mut i = 0;
    while i < order.len() {
        let threshold = scores[order[i]];
        // Consume the whole tie block at this threshold.
        while i < order.len() && scores[order[i]] == threshold {
            if labels[order[i]] {
                tp += 1;
            } else {
                fp += 1;
            }
            i += 1;
        }
        points.push(RocPoint {
            fpr: fp as f64 / nonmembers as f64,
            tpr: tp as f64 / members as f64,
            threshold,
        });
    }
    points.push(RocPoint { fpr: 1.0, tpr: 1.0, threshold: f64::NEG_INFINITY });
    Ok(RocCurve { points })
}

/// AUROC as the Mann-Whitney rank statistic with average ranks for ties:
/// the probability that a random member outscores a random non-member
/// (ties counting half). Equal to the trapezoid area under [`roc`].
pub fn auroc(scores: &[f64], labels: &[bool]) -> Result<f64, MetricsError> {
    let (members, nonmembers) = check_inputs(scores, labels)?;
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&i, &j| scores[i].total_cmp(&scores[j]));

    let mut member_rank_sum = 0.0;
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && scores[order[j + 1]] == scores[order[i]] {
            j += 1;
        }
        let avg_rank = (i + j + 2) as f64 / 2.0; // 1-based
        for &idx in &order[i..=j] {
            if labels[idx] {
                member_rank_sum += avg_rank;
            }
        }
        i = j + 1;
    }
    let m = members as f64;
    Ok((member_rank_sum - m * (m + 1.0) / 2.0) / (m * nonmembers as f64))
}

/// Maximum TPR over thresholds whose empirical FPR is at most
/// `fpr_target`; 0 when no threshold qualifies. The trivial accept-all
/// threshold (−∞) is not a candidate.
pub fn tpr_at_fpr(scores: &[f64], labels: &[bool], fpr_target: f64) -> Result<f64, MetricsError> {
    let curve = roc(scores, labels)?;
    Ok(curve
        .points
        .iter()
        .filter(|p| p.threshold > f64::NEG_INFINITY && p.fpr <= fpr_target)
        .map(|p| p.tpr)
        .fold(0.0, f64::max))
}

/// Which member pool a report covers.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Population {
    All,
    UnderRepresented,
}

impl Population {
    pub fn as_str(&self) -> &'static str {
        match self {
            Population::All => "all",
            Population::UnderRepresented => "under_represented",
        }
    }
}

/// Which negatives an under-represented report keeps. `All` (default)
/// retains the full negative pool so a 0.1% FPR stays measurable;
/// `Group` restricts negatives to the same group.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum NegativePool {
    #[default]
    All,
    Group,
}

/// One evaluated example row.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ScoredExample {
    pub example_id: u64,
    pub score: f64,
    pub is_member: bool,
    pub group: Group,
}

/// TPR at one requested FPR target. `granularity_limited` flags targets
/// finer than 1 / n_nonmembers.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TprAtFpr {
    pub fpr_target: f64,
    pub tpr: f64,
    pub granularity_limited: bool,
}

/// TPR at the smallest achievable nonzero FPR (1 / n_nonmembers);
/// reported alongside granularity-limited targets.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct MinFprTpr {
    pub fpr: f64,
    pub tpr: f64,
}

/// Evaluation summary for one attack on one population.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct MetricsReport {
    pub attack_name: String,
    pub population: Population,
    pub auroc: f64,
    pub tpr_at_fpr: Vec<TprAtFpr>,
    pub n_members: usize,
    pub n_nonmembers: usize,
    pub tpr_at_min_nonzero_fpr: Option<MinFprTpr>,
}

/// Build a report for `population` from scored rows.
///
/// For `UnderRepresented`, members are restricted to the under group while
/// negatives follow `negatives` (default: keep all).
pub fn build_report(
    attack_name: &str,
    population: Population,
    rows: &[ScoredExample],
    fpr_targets: &[f64],
    negatives: NegativePool,
) -> Result<MetricsReport, MetricsError> {
    let keep = |r: &ScoredExample| match population {
        Population::All => true,
        Population::UnderRepresented => {
            if r.is_member {
                r.group == Group::Under
            } else {
                matches!(negatives, NegativePool::All) || r.group == Group::Under
            }
        }
    };
    let mut scores = Vec::new();
    let mut labels = Vec::new();
    for r in rows.iter().filter(|r| keep(r)) {
        scores.push(r.score);
        labels.push(r.is_member);
    }
    let (n_members, n_nonmembers) = check_inputs(&scores, &labels)?;

    let auroc_value = auroc(&scores, &labels)?;
    let mut any_limited = false;
    let mut tprs = Vec::with_capacity(fpr_targets.len());
    for &target in fpr_targets {
        let granularity_limited = (n_nonmembers as f64) < 1.0 / target.max(f64::MIN_POSITIVE);
        any_limited |= granularity_limited;
        tprs.push(TprAtFpr {
            fpr_target: target,
            tpr: tpr_at_fpr(&scores, &labels, target)?,
            granularity_limited,
        });
    }
    let tpr_at_min_nonzero_fpr = if any_limited {
        let fpr = 1.0 / n_nonmembers as f64;
        Some(MinFprTpr { fpr, tpr: tpr_at_fpr(&scores, &labels, fpr)? })
    } else {
        None
    };

    Ok(MetricsReport {
        attack_name: String::from(attack_name),
        population,
        auroc: auroc_value,
        tpr_at_fpr: tprs,
        n_members,
        n_nonmembers,
        tpr_at_min_nonzero_fpr,
    })
}
