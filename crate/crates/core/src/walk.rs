//! The down-up walk over a [`SubsetDensity`], exact small-instance analysis,
//! and marking-time statistics.
//!
//! One step from `S`: drop a uniformly random element to get `T`, then move to
//! `T + j` with probability `μ(T + j) / Σ_{j'∉T} μ(T + j')`. The dropped
//! element itself is a legal choice of `j`. The kernel is reversible with
//! respect to `μ`.

use std::collections::{BTreeMap, HashMap};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::densities::{DensityError, SubsetDensity};
use crate::subsets::{is_strictly_ascending, with_element, without_index};

pub const DEFAULT_EPSILON: f64 = 0.01;
pub const DEFAULT_SCHEDULE_CONSTANT: f64 = 4.0;
/// Largest support [`transition_matrix`] will build a kernel over.
pub const TRANSITION_SUPPORT_CAP: usize = 5000;
/// Absolute slack used by the exact stationarity, contraction and Pinsker checks.
pub const EXACT_CHECK_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum WalkError {
    #[error("invalid walk configuration: {0}")]
    InvalidConfig(String),
    #[error("set {set:?} is not a valid {k}-subset of 0..{n}")]
    InvalidSet { set: Vec<usize>, k: usize, n: usize },
    #[error("set {0:?} has zero density")]
    OutOfSupport(Vec<usize>),
    #[error("density is inconsistent: every extension of {0:?} has zero mass")]
    ZeroExtensionMass(Vec<usize>),
    #[error("density is inconsistent: {0:?} has positive mass but is missing from the support")]
    MissingFromSupport(Vec<usize>),
    #[error("support has {size} sets, above cap {cap}")]
    AboveCap { size: usize, cap: usize },
    #[error("distributions are defined over different supports")]
    SupportMismatch,
    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),
    #[error(transparent)]
    Density(#[from] DensityError),
}

/// Parameters of a single sampling run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WalkConfig {
    /// Target total-variation distance, in `(0, 1)`.
    pub epsilon: f64,
    /// Multiplier `C` in the `C·k·(ln k + ln 1/ε)` step schedule.
    pub schedule_constant: f64,
    pub seed: u64,
    /// Runs exactly this many steps instead of the schedule.
    pub steps: Option<usize>,
}

impl Default for WalkConfig {
    fn default() -> Self {
        WalkConfig {
            epsilon: DEFAULT_EPSILON,
            schedule_constant: DEFAULT_SCHEDULE_CONSTANT,
            seed: 0,
            steps: None,
        }
    }
}

impl WalkConfig {
    pub fn validate(&self) -> Result<(), WalkError> {
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return Err(WalkError::InvalidConfig(format!(
                "epsilon must lie in (0, 1), got {}",
                self.epsilon
            )));
        }
        if !(self.schedule_constant.is_finite() && self.schedule_constant > 0.0) {
            return Err(WalkError::InvalidConfig(format!(
                "schedule constant must be positive, got {}",
                self.schedule_constant
            )));
        }
        Ok(())
    }

    /// Steps to run for rank `k`: the override if set, 0 when `k = 0`,
    /// otherwise [`mixing_steps`].
    pub fn steps_for(&self, k: usize) -> usize {
        match (self.steps, k) {
            (Some(t), _) => t,
            (None, 0) => 0,
            (None, k) => mixing_steps(k, self.epsilon, self.schedule_constant),
        }
    }
}

/// `max(1, ⌈C·k·(ln max(k, 2) + ln 1/ε)⌉)`.
pub fn mixing_steps(k: usize, epsilon: f64, constant: f64) -> usize {
    debug_assert!(k >= 1 && epsilon > 0.0 && epsilon < 1.0 && constant > 0.0);
    let k_f = k as f64;
    let steps = (constant * k_f * (k_f.max(2.0).ln() + (1.0 / epsilon).ln())).ceil();
    (steps as usize).max(1)
}

/// RNG for chain `index` of a run seeded with `seed`. Chains get disjoint
/// ChaCha streams, so results do not depend on how chains are scheduled.
pub fn chain_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

fn check_set<D: SubsetDensity + ?Sized>(d: &D, set: &[usize]) -> Result<(), WalkError> {
    let (n, k) = (d.ground_size(), d.subset_size());
    if set.len() != k || !is_strictly_ascending(set) || set.iter().any(|&x| x >= n) {
        return Err(WalkError::InvalidSet {
            set: set.to_vec(),
            k,
            n,
        });
    }
    if !(d.eval(set) > 0.0) {
        return Err(WalkError::OutOfSupport(set.to_vec()));
    }
    Ok(())
}

/// One down-up step from `set`, which must have positive density and `k ≥ 1`.
pub fn down_up_step<D, R>(d: &D, set: &[usize], rng: &mut R) -> Result<Vec<usize>, WalkError>
where
    D: SubsetDensity + ?Sized,
    R: Rng + ?Sized,
{
    check_set(d, set)?;
    if set.is_empty() {
        return Ok(Vec::new());
    }
    step_from(d, set, rng).map(|(next, _)| next)
}

/// Returns the next set and the element that was dropped.
fn step_from<D, R>(d: &D, set: &[usize], rng: &mut R) -> Result<(Vec<usize>, usize), WalkError>
where
    D: SubsetDensity + ?Sized,
    R: Rng + ?Sized,
{
    let drop_index = rng.random_range(0..set.len());
    let dropped = set[drop_index];
    let base = without_index(set, drop_index);

    let mut candidates = Vec::with_capacity(d.ground_size() - base.len());
    let mut total = 0.0;
    let mut extended = Vec::with_capacity(set.len());
    let mut cursor = 0;
    for j in 0..d.ground_size() {
        if cursor < base.len() && base[cursor] == j {
            cursor += 1;
            continue;
        }
        extended.clear();
        extended.extend_from_slice(&base[..cursor]);
        extended.push(j);
        extended.extend_from_slice(&base[cursor..]);
        let mass = d.eval(&extended);
        if mass > 0.0 {
            total += mass;
            candidates.push((j, mass));
        }
    }
    if !(total > 0.0) {
        return Err(WalkError::ZeroExtensionMass(base));
    }
    let mut target = rng.random::<f64>() * total;
    let mut chosen = candidates.last().map(|c| c.0).unwrap_or(dropped);
    for &(j, mass) in &candidates {
        if target < mass {
            chosen = j;
            break;
        }
        target -= mass;
    }
    Ok((with_element(&base, chosen), dropped))
}

/// Outcome of [`run_chain`].
#[derive(Debug, Clone, PartialEq)]
pub struct WalkRun {
    pub final_set: Vec<usize>,
    pub steps: usize,
    /// First step after which every initial element had been dropped at
    /// least once, if that happened. `Some(0)` when `k = 0`.
    pub tau: Option<usize>,
}

/// Runs `steps` down-up steps from `start`, tracking the marking time.
///
/// An initial element becomes marked the first time it is dropped, even if
/// the walk immediately re-adds it: the re-added copy is a fresh choice.
pub fn run_chain<D, R>(d: &D, start: &[usize], steps: usize, rng: &mut R) -> Result<WalkRun, WalkError>
where
    D: SubsetDensity + ?Sized,
    R: Rng + ?Sized,
{
    check_set(d, start)?;
    if start.is_empty() {
        return Ok(WalkRun {
            final_set: Vec::new(),
            steps: 0,
            tau: Some(0),
        });
    }
    let mut unmarked = vec![false; d.ground_size()];
    for &x in start {
        unmarked[x] = true;
    }
    let mut remaining = start.len();
    let mut tau = None;
    let mut current = start.to_vec();
    for step in 1..=steps {
        let (next, dropped) = step_from(d, &current, rng)?;
        if unmarked[dropped] {
            unmarked[dropped] = false;
            remaining -= 1;
            if remaining == 0 {
                tau = Some(step);
            }
        }
        current = next;
    }
    Ok(WalkRun {
        final_set: current,
        steps,
        tau,
    })
}

/// Fraction of `trials` independent chains from `start` whose marking time
/// exceeds `t`.
pub fn tau_survival<D, R>(d: &D, start: &[usize], t: usize, trials: usize, rng: &mut R) -> Result<f64, WalkError>
where
    D: SubsetDensity + ?Sized,
    R: Rng + ?Sized,
{
    if trials == 0 {
        return Err(WalkError::InvalidConfig("trials must be at least 1".into()));
    }
    let mut survived = 0usize;
    for _ in 0..trials {
        let run = run_chain(d, start, t, rng)?;
        if run.tau.is_none() {
            survived += 1;
        }
    }
    Ok(survived as f64 / trials as f64)
}

// ---------------------------------------------------------------------------

/// A probability vector over an enumerated list of sets.
#[derive(Debug, Clone, PartialEq)]
pub struct DistributionTable {
    support: Vec<Vec<usize>>,
    probs: Vec<f64>,
}

impl DistributionTable {
    /// Normalizes nonnegative `weights` over `support`.
    pub fn from_weights(support: Vec<Vec<usize>>, weights: Vec<f64>) -> Result<Self, WalkError> {
        if support.len() != weights.len() {
            return Err(WalkError::InvalidDistribution(format!(
                "{} sets but {} weights",
                support.len(),
                weights.len()
            )));
        }
        if weights.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
            return Err(WalkError::InvalidDistribution("weights must be finite and nonnegative".into()));
        }
        let total: f64 = weights.iter().sum();
        if !(total > 0.0) {
            return Err(WalkError::InvalidDistribution("total weight is zero".into()));
        }
        let probs = weights.into_iter().map(|w| w / total).collect();
        Ok(DistributionTable { support, probs })
    }

    /// `μ` normalized over its enumerated support.
    pub fn from_density<D: SubsetDensity + ?Sized>(d: &D) -> Result<Self, WalkError> {
        let support = d.support()?;
        let weights = support.iter().map(|s| d.eval(s)).collect();
        Self::from_weights(support, weights)
    }

    pub fn point_mass(support: Vec<Vec<usize>>, index: usize) -> Result<Self, WalkError> {
        let mut weights = vec![0.0; support.len()];
        *weights.get_mut(index).ok_or_else(|| {
            WalkError::InvalidDistribution(format!("index {index} outside support"))
        })? = 1.0;
        Self::from_weights(support, weights)
    }

    pub fn support(&self) -> &[Vec<usize>] {
        &self.support
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    fn same_support(&self, other: &DistributionTable) -> Result<(), WalkError> {
        if self.support == other.support {
            Ok(())
        } else {
            Err(WalkError::SupportMismatch)
        }
    }
}

/// `D(ν | μ) = Σ ν log(ν/μ)`; `+∞` when `ν` charges a `μ`-null set.
pub fn kl_divergence(nu: &DistributionTable, mu: &DistributionTable) -> Result<f64, WalkError> {
    nu.same_support(mu)?;
    let mut total = 0.0;
    for (&p, &q) in nu.probs.iter().zip(&mu.probs) {
        if p > 0.0 {
            if q <= 0.0 {
                return Ok(f64::INFINITY);
            }
            total += p * (p / q).ln();
        }
    }
    Ok(total.max(0.0))
}

/// `½ Σ |ν − μ|`.
pub fn tv_distance(nu: &DistributionTable, mu: &DistributionTable) -> Result<f64, WalkError> {
    nu.same_support(mu)?;
    let l1: f64 = nu.probs.iter().zip(&mu.probs).map(|(p, q)| (p - q).abs()).sum();
    Ok((0.5 * l1).min(1.0))
}

/// Exact one-step kernel of the down-up walk, stored as sparse rows over the
/// lexicographically ordered support.
#[derive(Debug, Clone, PartialEq)]
pub struct TransitionMatrix {
    support: Vec<Vec<usize>>,
    index: HashMap<Vec<usize>, usize>,
    rows: Vec<Vec<(usize, f64)>>,
}

impl TransitionMatrix {
    pub fn support(&self) -> &[Vec<usize>] {
        &self.support
    }

    pub fn len(&self) -> usize {
        self.support.len()
    }

    pub fn is_empty(&self) -> bool {
        self.support.is_empty()
    }

    pub fn index_of(&self, set: &[usize]) -> Option<usize> {
        self.index.get(set).copied()
    }

    /// Nonzero entries of row `i` as `(column, probability)`, ascending.
    pub fn row(&self, i: usize) -> &[(usize, f64)] {
        &self.rows[i]
    }

    pub fn entry(&self, i: usize, j: usize) -> f64 {
        self.rows[i]
            .binary_search_by_key(&j, |&(c, _)| c)
            .map(|at| self.rows[i][at].1)
            .unwrap_or(0.0)
    }

    pub fn dense_row(&self, i: usize) -> Vec<f64> {
        let mut out = vec![0.0; self.len()];
        for &(j, p) in &self.rows[i] {
            out[j] = p;
        }
        out
    }

    /// `νP`.
    pub fn apply(&self, nu: &DistributionTable) -> Result<DistributionTable, WalkError> {
        if nu.support != self.support {
            return Err(WalkError::SupportMismatch);
        }
        let mut out = vec![0.0; self.len()];
        for (i, &p) in nu.probs.iter().enumerate() {
            if p != 0.0 {
                for &(j, q) in &self.rows[i] {
                    out[j] += p * q;
                }
            }
        }
        Ok(DistributionTable {
            support: self.support.clone(),
            probs: out,
        })
    }
}

/// Builds the exact kernel. Fails above [`TRANSITION_SUPPORT_CAP`] sets.
pub fn transition_matrix<D: SubsetDensity + ?Sized>(d: &D) -> Result<TransitionMatrix, WalkError> {
    let support = d.support()?;
    if support.len() > TRANSITION_SUPPORT_CAP {
        return Err(WalkError::AboveCap {
            size: support.len(),
            cap: TRANSITION_SUPPORT_CAP,
        });
    }
    let index: HashMap<Vec<usize>, usize> =
        support.iter().enumerate().map(|(i, s)| (s.clone(), i)).collect();
    let k = d.subset_size();
    let mut rows = Vec::with_capacity(support.len());
    for set in &support {
        if k == 0 {
            rows.push(vec![(0, 1.0)]);
            continue;
        }
        let mut row: BTreeMap<usize, f64> = BTreeMap::new();
        for drop in 0..k {
            let base = without_index(set, drop);
            let mut targets = Vec::new();
            let mut total = 0.0;
            for j in (0..d.ground_size()).filter(|j| base.binary_search(j).is_err()) {
                let next = with_element(&base, j);
                let mass = d.eval(&next);
                if mass > 0.0 {
                    let column = *index
                        .get(&next)
                        .ok_or_else(|| WalkError::MissingFromSupport(next.clone()))?;
                    total += mass;
                    targets.push((column, mass));
                }
            }
            if !(total > 0.0) {
                return Err(WalkError::ZeroExtensionMass(base));
            }
            for (column, mass) in targets {
                *row.entry(column).or_insert(0.0) += mass / (total * k as f64);
            }
        }
        rows.push(row.into_iter().collect());
    }
    Ok(TransitionMatrix {
        support,
        index,
        rows,
    })
}

/// Summary of the exact checks run by [`exact_analysis`].
#[derive(Debug, Clone, PartialEq)]
pub struct ExactAnalysis {
    pub subset_size: usize,
    pub support_size: usize,
    /// `max |μP − μ|`.
    pub stationarity_err: f64,
    /// `max |μ_i P_ij − μ_j P_ji|`.
    pub reversibility_err: f64,
    pub distributions_tested: usize,
    /// `max D(νP|μ) − (1 − 1/k)·D(ν|μ)` over tested `ν`.
    pub worst_contraction_excess: f64,
    pub kl_contraction_pass: bool,
    /// `max TV − √(D/2)` over tested pairs.
    pub worst_pinsker_excess: f64,
    pub pinsker_pass: bool,
}

/// Stationarity, reversibility, one-step KL contraction by `1 − 1/k`, and
/// Pinsker's inequality, on every point mass plus `random_trials` random `ν`.
pub fn exact_analysis<D: SubsetDensity + ?Sized>(
    d: &D,
    random_trials: usize,
    seed: u64,
) -> Result<ExactAnalysis, WalkError> {
    let kernel = transition_matrix(d)?;
    let mu = DistributionTable::from_density(d)?;
    let k = d.subset_size();

    let mu_p = kernel.apply(&mu)?;
    let stationarity_err = mu_p
        .probs
        .iter()
        .zip(&mu.probs)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);

    let mut reversibility_err: f64 = 0.0;
    for i in 0..kernel.len() {
        for &(j, p) in kernel.row(i) {
            let forward = mu.probs[i] * p;
            let backward = mu.probs[j] * kernel.entry(j, i);
            reversibility_err = reversibility_err.max((forward - backward).abs());
        }
    }

    let support = kernel.support().to_vec();
    let mut candidates = Vec::with_capacity(support.len() + random_trials);
    for i in 0..support.len() {
        candidates.push(DistributionTable::point_mass(support.clone(), i)?);
    }
    let mut rng = chain_rng(seed, 0);
    for _ in 0..random_trials {
        let weights = (0..support.len()).map(|_| rng.random::<f64>()).collect();
        candidates.push(DistributionTable::from_weights(support.clone(), weights)?);
    }

    let rate = if k == 0 { 0.0 } else { 1.0 - 1.0 / k as f64 };
    let mut worst_contraction_excess = f64::NEG_INFINITY;
    let mut worst_pinsker_excess = f64::NEG_INFINITY;
    for nu in &candidates {
        let nu_p = kernel.apply(nu)?;
        let before = kl_divergence(nu, &mu)?;
        let after = kl_divergence(&nu_p, &mu)?;
        worst_contraction_excess = worst_contraction_excess.max(after - rate * before);
        for (dist, kl) in [(nu, before), (&nu_p, after)] {
            let tv = tv_distance(dist, &mu)?;
            worst_pinsker_excess = worst_pinsker_excess.max(tv - (kl / 2.0).sqrt());
        }
    }

    Ok(ExactAnalysis {
        subset_size: k,
        support_size: kernel.len(),
        stationarity_err,
        reversibility_err,
        distributions_tested: candidates.len(),
        worst_contraction_excess,
        kl_contraction_pass: worst_contraction_excess <= EXACT_CHECK_TOLERANCE,
        worst_pinsker_excess,
        pinsker_pass: worst_pinsker_excess <= EXACT_CHECK_TOLERANCE,
    })
}
