//! Hypothesis-testing core: log-likelihood-ratio tests and their soft
//! variant, Hellinger distances (discrete, Bernoulli, and multivariate
//! Gaussian closed form), Monte-Carlo advantage estimation, shadow-budget
//! planning from H², and Spearman rank correlation.
//!
//! The key identity used throughout: the one-sample advantage of the soft
//! LLR test equals the squared Hellinger distance between the two
//! hypotheses, which in turn lower-bounds what a membership adversary can
//! achieve and sets the sample budget ~ 1/H².

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

#[cfg(not(feature = "std"))]
use num_traits::Float;
use rand::Rng;

use crate::linalg;
use crate::seed::{self, role};

#[derive(Clone, Debug, PartialEq)]
pub enum StatsError {
    InvalidDistribution(&'static str),
    OutcomeOutOfRange { outcome: usize, alphabet: usize },
    AlphabetMismatch { left: usize, right: usize },
    BothZero { index: usize },
    UndefinedLlr,
    NotSymmetric,
    NonSpd,
    DimMismatch { left: usize, right: usize },
    LengthMismatch { left: usize, right: usize },
    TooShort { len: usize, min: usize },
    ConstantInput,
    InvalidH2(f64),
    InvalidConstant(f64),
    ZeroTrials,
}

impl fmt::Display for StatsError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StatsError::InvalidDistribution(msg) => write!(f, "invalid distribution: {msg}"),
            StatsError::OutcomeOutOfRange { outcome, alphabet } => {
                write!(f, "outcome {outcome} outside alphabet of size {alphabet}")
            }
            StatsError::AlphabetMismatch { left, right } => {
                write!(f, "alphabet sizes differ: {left} vs {right}")
            }
            StatsError::BothZero { index } => {
                write!(f, "both distributions assign zero probability at outcome {index}")
            }
            StatsError::UndefinedLlr => {
                write!(f, "sequence has zero probability under both hypotheses")
            }
            StatsError::NotSymmetric => write!(f, "covariance matrix is not symmetric"),
            StatsError::NonSpd => write!(f, "covariance matrix is not positive definite"),
            StatsError::DimMismatch { left, right } => {
                write!(f, "dimension mismatch: {left} vs {right}")
            }
            StatsError::LengthMismatch { left, right } => {
                write!(f, "input lengths differ: {left} vs {right}")
            }
            StatsError::TooShort { len, min } => {
                write!(f, "need at least {min} values, got {len}")
            }
            StatsError::ConstantInput => {
                write!(f, "rank correlation undefined for a constant input vector")
            }
            StatsError::InvalidH2(h) => {
                write!(f, "squared Hellinger distance must be in (0, 1], got {h}")
            }
            StatsError::InvalidConstant(c) => write!(f, "planner constant must be > 0, got {c}"),
            StatsError::ZeroTrials => write!(f, "at least one trial required"),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for StatsError {}

/// A Monte-Carlo estimate with its binomial standard error.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct McEstimate {
    pub estimate: f64,
    pub std_error: f64,
    pub trials: usize,
}

/// Discrete distribution over the outcome alphabet `0..probs.len()`.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DiscreteDist {
    probs: Vec<f64>,
}

impl DiscreteDist {
    pub fn new(probs: Vec<f64>) -> Result<Self, StatsError> {
        if probs.is_empty() {
            return Err(StatsError::InvalidDistribution("empty support"));
        }
        if probs.iter().any(|&p| !(p >= 0.0) || !p.is_finite()) {
            return Err(StatsError::InvalidDistribution("negative or non-finite mass"));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(StatsError::InvalidDistribution("mass does not sum to 1"));
        }
        Ok(DiscreteDist { probs })
    }

    /// Two-outcome distribution with P(1) = p.
    pub fn bernoulli(p: f64) -> Result<Self, StatsError> {
        if !(0.0..=1.0).contains(&p) {
            return Err(StatsError::InvalidDistribution("bernoulli p outside [0, 1]"));
        }
        DiscreteDist::new(vec![1.0 - p, p])
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn prob(&self, outcome: usize) -> Result<f64, StatsError> {
        self.probs
            .get(outcome)
            .copied()
            .ok_or(StatsError::OutcomeOutOfRange { outcome, alphabet: self.probs.len() })
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    /// Inverse-CDF sample.
    pub fn sample<R: Rng>(&self, rng: &mut R) -> usize {
        let u: f64 = rng.gen();
        let mut acc = 0.0;
        for (i, &p) in self.probs.iter().enumerate() {
            acc += p;
            if u < acc {
                return i;
            }
        }
        self.probs.len() - 1
    }
}

fn check_same_alphabet(p0: &DiscreteDist, p1: &DiscreteDist) -> Result<(), StatsError> {
    if p0.len() != p1.len() {
        return Err(StatsError::AlphabetMismatch { left: p0.len(), right: p1.len() });
    }
    Ok(())
}

/// Log-likelihood ratio of a sequence: Σ log(P0(o) / P1(o)).
///
/// Returns +∞ when some outcome has P1 = 0 < P0, −∞ for the mirror case,
/// and an error when any outcome (or the sequence as a whole) has zero
/// probability under both hypotheses.
pub fn llr(sequence: &[usize], p0: &DiscreteDist, p1: &DiscreteDist) -> Result<f64, StatsError> {
    check_same_alphabet(p0, p1)?;
    let mut finite = 0.0;
    let mut pos_inf = false;
    let mut neg_inf = false;
    for (i, &o) in sequence.iter().enumerate() {
        let a = p0.prob(o)?;
        let b = p1.prob(o)?;
        match (a > 0.0, b > 0.0) {
            (false, false) => return Err(StatsError::BothZero { index: i }),
            (true, false) => pos_inf = true,
            (false, true) => neg_inf = true,
            (true, true) => finite += (a / b).ln(),
        }
    }
    match (pos_inf, neg_inf) {
        (true, true) => Err(StatsError::UndefinedLlr),
        (true, false) => Ok(f64::INFINITY),
        (false, true) => Ok(f64::NEG_INFINITY),
        (false, false) => Ok(finite),
    }
}

/// Probability that the soft LLR test accepts hypothesis 0 on a single
/// outcome: √P0 / (√P0 + √P1), with the one-sided zero cases mapping to
/// 0 and 1.
pub fn sllr_accept_prob(
    outcome: usize,
    p0: &DiscreteDist,
    p1: &DiscreteDist,
) -> Result<f64, StatsError> {
    check_same_alphabet(p0, p1)?;
    let a = p0.prob(outcome)?;
    let b = p1.prob(outcome)?;
    match (a > 0.0, b > 0.0) {
        (false, false) => Err(StatsError::BothZero { index: 0 }),
        (true, false) => Ok(1.0),
        (false, true) => Ok(0.0),
        (true, true) => {
            let sa = a.sqrt();
            Ok(sa / (sa + b.sqrt()))
        }
    }
}

/// Exact one-sample advantage of the soft LLR test:
/// Σ (P0(o) − P1(o)) · g(o). Algebraically equal to
/// [`hellinger_sq_discrete`].
pub fn sllr_advantage_analytic(
    p0: &DiscreteDist,
    p1: &DiscreteDist,
) -> Result<f64, StatsError> {
    check_same_alphabet(p0, p1)?;
    let mut adv = 0.0;
    for o in 0..p0.len() {
        let a = p0.prob(o)?;
        let b = p1.prob(o)?;
        if a == 0.0 && b == 0.0 {
            continue; // outcome never occurs under either hypothesis
        }
        let g = match (a > 0.0, b > 0.0) {
            (true, false) => 1.0,
            (false, true) => 0.0,
            _ => {
                let sa = a.sqrt();
                sa / (sa + b.sqrt())
            }
        };
        adv += (a - b) * g;
    }
    Ok(adv)
}

/// Monte-Carlo estimate of the one-sample soft-LLR advantage:
/// Pr_{o∼P0}[accept] − Pr_{o∼P1}[accept].
pub fn sllr_advantage_mc(
    p0: &DiscreteDist,
    p1: &DiscreteDist,
    trials: usize,
    seed: u64,
) -> Result<McEstimate, StatsError> {
    advantage_mc(TestRule::Sllr, p0, p1, 1, trials, seed)
}

/// Squared Hellinger distance between discrete distributions:
/// ½ Σ (√p − √q)². Always in [0, 1]; 0 iff equal, 1 iff disjoint support.
pub fn hellinger_sq_discrete(p0: &DiscreteDist, p1: &DiscreteDist) -> Result<f64, StatsError> {
    check_same_alphabet(p0, p1)?;
    let mut acc = 0.0;
    for (a, b) in p0.probs.iter().zip(&p1.probs) {
        let d = a.sqrt() - b.sqrt();
        acc += d * d;
    }
    Ok((0.5 * acc).clamp(0.0, 1.0))
}

/// H² for a pair of label-indicator (Bernoulli) distributions.
pub fn hellinger_sq_bernoulli_pair(p0: f64, p1: f64) -> f64 {
    let cross = (p0 * p1).sqrt() + ((1.0 - p0) * (1.0 - p1)).sqrt();
    (1.0 - cross).clamp(0.0, 1.0)
}

/// Total variation distance for a Bernoulli pair; by definition this is
/// exactly the memorization gap |p1 − p0|, and H² ≤ TV always.
pub fn tv_bernoulli_pair(p0: f64, p1: f64) -> f64 {
    (p1 - p0).abs()
}

/// Parameters of a multivariate normal: mean μ and covariance Γ.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct GaussianParams {
    pub mean: Vec<f64>,
    pub cov: Vec<Vec<f64>>,
}

impl GaussianParams {
    /// 1-D Gaussian from mean and variance.
    pub fn scalar(mean: f64, variance: f64) -> Self {
        GaussianParams { mean: vec![mean], cov: vec![vec![variance]] }
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    fn validate(&self) -> Result<(), StatsError> {
        let n = self.mean.len();
        if self.cov.len() != n || self.cov.iter().any(|r| r.len() != n) {
            return Err(StatsError::DimMismatch { left: n, right: self.cov.len() });
        }
        for i in 0..n {
            for j in 0..i {
                if (self.cov[i][j] - self.cov[j][i]).abs() > 1e-10 {
                    return Err(StatsError::NotSymmetric);
                }
            }
        }
        Ok(())
    }
}

/// Closed-form squared Hellinger distance between two multivariate
/// normals:
///
/// ```text
/// H² = 1 − (det Γ0 · det Γ1)^¼ / det((Γ0+Γ1)/2)^½ · ζ
/// ζ  = exp(−⅛ (μ0−μ1)ᵀ ((Γ0+Γ1)/2)⁻¹ (μ0−μ1))
/// ```
///
/// Determinants and the solve go through Cholesky; a failed factorization
/// is the non-SPD error.
pub fn hellinger_sq_gaussian(
    g0: &GaussianParams,
    g1: &GaussianParams,
) -> Result<f64, StatsError> {
    g0.validate()?;
    g1.validate()?;
    let n = g0.dim();
    if g1.dim() != n {
        return Err(StatsError::DimMismatch { left: n, right: g1.dim() });
    }
    let l0 = linalg::cholesky(&g0.cov).ok_or(StatsError::NonSpd)?;
    let l1 = linalg::cholesky(&g1.cov).ok_or(StatsError::NonSpd)?;
    let mid: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|j| 0.5 * (g0.cov[i][j] + g1.cov[i][j])).collect())
        .collect();
    let lm = linalg::cholesky(&mid).ok_or(StatsError::NonSpd)?;

    let log_coef = 0.25 * (linalg::log_det_from_cholesky(&l0) + linalg::log_det_from_cholesky(&l1))
        - 0.5 * linalg::log_det_from_cholesky(&lm);
    let delta: Vec<f64> = g0.mean.iter().zip(&g1.mean).map(|(a, b)| a - b).collect();
    let solved = linalg::cholesky_solve(&lm, &delta);
    let quad: f64 = delta.iter().zip(&solved).map(|(d, s)| d * s).sum();
    let zeta = (-0.125 * quad).exp();
    Ok((1.0 - log_coef.exp() * zeta).clamp(0.0, 1.0))
}

/// Shadow-budget planner: ⌈c / h²⌉ samples suffice to distinguish the
/// hypotheses at constant advantage; monotone non-increasing in `h2`.
pub fn sample_complexity(h2: f64, c: f64) -> Result<u64, StatsError> {
    if !(h2 > 0.0 && h2 <= 1.0) {
        return Err(StatsError::InvalidH2(h2));
    }
    if !(c > 0.0) {
        return Err(StatsError::InvalidConstant(c));
    }
    Ok((c / h2).ceil() as u64)
}

/// Planner range for c ∈ {0.5, 1, 2}; the asymptotic rule hides its
/// constant, so reports carry the bracket rather than a single number.
pub fn sample_complexity_range(h2: f64) -> Result<[u64; 3], StatsError> {
    Ok([
        sample_complexity(h2, 0.5)?,
        sample_complexity(h2, 1.0)?,
        sample_complexity(h2, 2.0)?,
    ])
}

/// Hypothesis tests supported by the Monte-Carlo advantage estimator.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum TestRule {
    /// Accept hypothesis 0 when LLR(σ) ≥ κ.
    LlrThreshold(f64),
    /// Accept hypothesis 0 with probability e/(1+e), e = exp(½ LLR(σ)).
    Sllr,
}

/// Monte-Carlo estimate of the n-sample advantage
/// Pr_{σ∼P0ⁿ}[T(σ)=0] − Pr_{σ∼P1ⁿ}[T(σ)=0] for the given test.
pub fn advantage_mc(
    rule: TestRule,
    p0: &DiscreteDist,
    p1: &DiscreteDist,
    n: usize,
    trials: usize,
    seed: u64,
) -> Result<McEstimate, StatsError> {
    check_same_alphabet(p0, p1)?;
    if trials == 0 {
        return Err(StatsError::ZeroTrials);
    }
    if n == 0 {
        return Err(StatsError::TooShort { len: 0, min: 1 });
    }
    let mut rng = seed::rng_from(seed::mix(&[seed, role::MC]));
    let mut seq = vec![0usize; n];
    let mut accept = [0usize; 2];
    for world in 0..2 {
        let gen = if world == 0 { p0 } else { p1 };
        for _ in 0..trials {
            for slot in seq.iter_mut() {
                *slot = gen.sample(&mut rng);
            }
            // Outcomes drawn from P0 or P1 always have positive probability
            // under their generator, so the LLR is never 0/0 here.
            let ratio = llr(&seq, p0, p1).expect("sampled outcome has positive probability");
            let accepted = match rule {
                TestRule::LlrThreshold(kappa) => ratio >= kappa,
                TestRule::Sllr => {
                    if ratio == f64::INFINITY {
                        true
                    } else if ratio == f64::NEG_INFINITY {
                        false
                    } else {
                        let e = (0.5 * ratio).exp();
                        rng.gen::<f64>() < e / (1.0 + e)
                    }
                }
            };
            if accepted {
                accept[world] += 1;
            }
        }
    }
    let t = trials as f64;
    let q0 = accept[0] as f64 / t;
    let q1 = accept[1] as f64 / t;
    let std_error = ((q0 * (1.0 - q0) + q1 * (1.0 - q1)) / t).sqrt();
    Ok(McEstimate { estimate: q0 - q1, std_error, trials })
}

/// Average ranks (1-based); ties share the mean of their positions.
fn average_ranks(values: &[f64]) -> Vec<f64> {
    let n = values.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| values[i].total_cmp(&values[j]));
    let mut ranks = vec![0.0; n];
    let mut i = 0;
    while i < n {
        let mut j = i;
        while j + 1 < n && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        let avg = (i + j + 2) as f64 / 2.0; // mean of 1-based positions i+1..=j+1
        for &idx in &order[i..=j] {
            ranks[idx] = avg;
        }
        i = j + 1;
    }
    ranks
}

fn pearson(xs: &[f64], ys: &[f64]) -> Result<f64, StatsError> {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    for (x, y) in xs.iter().zip(ys) {
        let dx = x - mx;
        let dy = y - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(StatsError::ConstantInput);
    }
    Ok((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

/// Spearman rank correlation (average ranks for ties).
pub fn spearman(xs: &[f64], ys: &[f64]) -> Result<f64, StatsError> {
    if xs.len() != ys.len() {
        return Err(StatsError::LengthMismatch { left: xs.len(), right: ys.len() });
    }
    if xs.len() < 3 {
        return Err(StatsError::TooShort { len: xs.len(), min: 3 });
    }
    pearson(&average_ranks(xs), &average_ranks(ys))
}

/// Spearman correlation with a two-sided Monte-Carlo permutation p-value.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SpearmanResult {
    pub rho: f64,
    pub p_value: f64,
    pub permutations: usize,
}

/// Seeded permutation test: p = (1 + #{|ρ_perm| ≥ |ρ|}) / (1 + permutations).
pub fn spearman_perm(
    xs: &[f64],
    ys: &[f64],
    permutations: usize,
    seed: u64,
) -> Result<SpearmanResult, StatsError> {
    let rho = spearman(xs, ys)?;
    if permutations == 0 {
        return Err(StatsError::ZeroTrials);
    }
    let rx = average_ranks(xs);
    let mut ry = average_ranks(ys);
    let mut rng = seed::rng_from(seed::mix(&[seed, role::MC, 0x5370]));
    let mut hits = 0usize;
    for _ in 0..permutations {
        use rand::seq::SliceRandom;
        ry.shuffle(&mut rng);
        let r = pearson(&rx, &ry)?;
        if r.abs() >= rho.abs() - 1e-12 {
            hits += 1;
        }
    }
    Ok(SpearmanResult {
        rho,
        p_value: (1 + hits) as f64 / (1 + permutations) as f64,
        permutations,
    })
}
